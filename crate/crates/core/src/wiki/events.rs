use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One edit: `editor` changed `page` at `timestamp` (UTC epoch seconds).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditEvent {
    #[serde(rename = "ts")]
    pub timestamp: i64,
    pub editor: String,
    pub page: String,
}

impl EditEvent {
    pub fn new(timestamp: i64, editor: impl Into<String>, page: impl Into<String>) -> Self {
        EditEvent {
            timestamp,
            editor: editor.into(),
            page: page.into(),
        }
    }
}

/// Clicks a page received during one observation window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadershipRecord {
    pub page: String,
    pub clicks: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Skip malformed lines and count them.
    #[default]
    Lenient,
    /// Fail on the first malformed line.
    Strict,
}

#[derive(Debug, Clone, Default)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub skipped: u64,
}

fn parse_rows<R, T, F>(reader: R, header: &[&str], mode: ParseMode, mut row: F) -> Result<Parsed<T>>
where
    R: Read,
    F: FnMut(&csv::StringRecord) -> Result<T, String>,
{
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr.headers().map_err(io_or_parse)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut out = Parsed {
        records: Vec::new(),
        skipped: 0,
    };
    let mut rec = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        let parsed = match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) if rec.len() == 1 && rec[0].is_empty() => continue,
            Ok(true) if rec.len() != header.len() => Err(format!(
                "expected {} fields, found {}",
                header.len(),
                rec.len()
            )),
            Ok(true) => row(&rec),
            Err(e) if e.is_io_error() => return Err(io_or_parse(e)),
            Err(e) => Err(e.to_string()),
        };
        match parsed {
            Ok(t) => out.records.push(t),
            Err(message) if mode == ParseMode::Strict => {
                let line = rec.position().map_or(line, |p| p.line());
                return Err(Error::Parse { line, message });
            }
            Err(_) => out.skipped += 1,
        }
    }
    Ok(out)
}

fn io_or_parse(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 1,
            message: format!("{other:?}"),
        },
    }
}

/// Reads `ts,editor,page` rows. Lines starting with `#` are ignored.
pub fn parse_events<R: Read>(reader: R, mode: ParseMode) -> Result<Parsed<EditEvent>> {
    parse_rows(reader, &["ts", "editor", "page"], mode, |r| {
        let ts: i64 = r[0]
            .parse()
            .map_err(|e| format!("bad timestamp `{}`: {e}", &r[0]))?;
        if ts < 0 {
            return Err(format!("negative timestamp {ts}"));
        }
        if r[1].is_empty() || r[2].is_empty() {
            return Err("empty editor or page id".into());
        }
        Ok(EditEvent::new(ts, &r[1], &r[2]))
    })
}

/// Reads `page,clicks` rows.
pub fn parse_readership<R: Read>(reader: R, mode: ParseMode) -> Result<Parsed<ReadershipRecord>> {
    parse_rows(reader, &["page", "clicks"], mode, |r| {
        if r[0].is_empty() {
            return Err("empty page id".into());
        }
        let clicks = r[1]
            .parse()
            .map_err(|e| format!("bad clicks `{}`: {e}", &r[1]))?;
        Ok(ReadershipRecord {
            page: r[0].to_string(),
            clicks,
        })
    })
}
