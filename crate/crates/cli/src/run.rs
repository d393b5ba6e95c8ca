use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use thermolens::powerlaw::{classify_with, sample};
use thermolens::structure::{
    alpha_grid, efficiency_vs_alpha_curve, energy_curve, max_entropy_oracle, DEFAULT_LAMBDA_TOL,
};
use thermolens::wiki::{
    correlate_metrics, evolution_report, monthly_collections, page_collections, page_metrics,
    page_timelines, parse_events, parse_readership, EditEvent, EvolutionCsvRow, PageMetrics,
    ParseMode, SaturationParams,
};
use thermolens::{Collection, ThermoReport};

use crate::args::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: thermolens::Error,
    },
    #[error("{0}")]
    Run(#[from] thermolens::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Which fields of a thermodynamic report are plug-in estimates and which are
/// theoretical functions of the fitted exponent.
fn routes() -> Value {
    json!({
        "empirical": ["N", "S", "R", "E", "Q"],
        "theoretical_at_fitted_alpha": ["A", "fe_ratio"],
        "alpha_estimator": "continuous",
    })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// An output document: reproducibility header followed by the body.
struct Output {
    buf: Vec<u8>,
}

impl Output {
    fn new(command: &Command, extra: Value) -> Self {
        let mut config = serde_json::to_value(command).expect("config serializes");
        if let (Value::Object(cfg), Value::Object(extra)) = (&mut config, extra) {
            cfg.extend(extra);
        }
        let buf = format!("# thermolens {} {}\n", env!("CARGO_PKG_VERSION"), config).into_bytes();
        Output { buf }
    }

    fn csv_rows<T: Serialize>(mut self, rows: impl IntoIterator<Item = T>) -> Result<Self> {
        let mut w = csv::Writer::from_writer(&mut self.buf);
        for row in rows {
            w.serialize(row).map_err(thermolens::Error::from)?;
        }
        w.flush().map_err(thermolens::Error::from)?;
        drop(w);
        Ok(self)
    }

    fn json<T: Serialize>(mut self, value: &T) -> Self {
        serde_json::to_writer_pretty(&mut self.buf, value).expect("report serializes");
        self.buf.push(b'\n');
        self
    }

    fn write_to(self, path: Option<&Path>) -> Result<()> {
        let res = match path {
            Some(p) => std::fs::write(p, &self.buf),
            None => std::io::stdout().lock().write_all(&self.buf),
        };
        res.map_err(|source| CliError::Output {
            path: path.map_or("stdout".into(), |p| p.display().to_string()),
            source,
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            source: e.into(),
        })
}

fn read_collection(path: &Path) -> Result<Collection> {
    Collection::read_csv(open(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn read_events(args: &EventArgs) -> Result<(Vec<EditEvent>, u64)> {
    let parsed = parse_events(open(&args.events)?, parse_mode(args.strict)).map_err(|source| {
        CliError::Input {
            path: args.events.clone(),
            source,
        }
    })?;
    if parsed.records.is_empty() {
        return Err(CliError::Input {
            path: args.events.clone(),
            source: thermolens::Error::EmptyCollection,
        });
    }
    Ok((parsed.records, parsed.skipped))
}

fn check_alpha(name: &str, alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(())
    } else {
        Err(usage(format!(
            "--{name} must be a finite number greater than 1, got {alpha}"
        )))
    }
}

fn check_fraction(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must lie in (0, 1], got {x}")))
    }
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Metrics(a) => metrics(command, a),
        Command::Fit(a) => fit(command, a),
        Command::Synth(a) => synth(command, a),
        Command::Curves(a) => curves(command, a),
        Command::VerifyTheorem(a) => verify(command, a),
        Command::Evolve(a) => evolve(command, a),
        Command::Pages(a) => pages(command, a),
        Command::Correlate(a) => correlate(command, a),
    }
}

fn metrics(cmd: &Command, a: &MetricsArgs) -> Result<()> {
    let c = read_collection(&a.input)?;
    let report = ThermoReport::from_collection(&c, a.model.into())?;
    let out = Output::new(cmd, json!({ "routes": routes() }));
    let out = match a.format {
        Format::Csv => out.csv_rows([&report])?,
        Format::Json => out.json(&report),
    };
    out.write_to(a.out.output.as_deref())
}

fn fit(cmd: &Command, a: &FitArgs) -> Result<()> {
    check_fraction("ks-threshold", a.ks_threshold)?;
    let c = read_collection(&a.input)?;
    let fit = classify_with(&c, a.ks_threshold, a.method.into())?;
    let out = Output::new(cmd, json!({ "v_min": 1 }));
    let out = match a.format {
        Format::Csv => out.csv_rows([&fit])?,
        Format::Json => out.json(&fit),
    };
    out.write_to(a.out.output.as_deref())
}

fn synth(cmd: &Command, a: &SynthArgs) -> Result<()> {
    check_alpha("alpha", a.alpha)?;
    let c = sample(a.alpha, a.n, a.seed)?;
    let mut out = Output::new(cmd, json!({ "rng": "chacha8" }));
    c.write_csv(&mut out.buf)?;
    out.write_to(a.out.output.as_deref())
}

fn curves(cmd: &Command, a: &CurvesArgs) -> Result<()> {
    check_alpha("alpha-min", a.alpha_min)?;
    check_alpha("alpha-max", a.alpha_max)?;
    if !(a.step.is_finite() && a.step > 0.0) {
        return Err(usage(format!("--step must be positive, got {}", a.step)));
    }
    if a.alpha_max < a.alpha_min {
        return Err(usage("--alpha-max must not be below --alpha-min"));
    }
    if a.truncation.is_some_and(|n| n < 10) {
        return Err(usage("--truncation must be at least 10"));
    }
    let grid = alpha_grid(a.alpha_min, a.alpha_max, a.step)?;
    let curve = match a.truncation {
        Some(n) => efficiency_vs_alpha_curve(&grid, n)?,
        None => energy_curve(&grid)?,
    };
    let out = Output::new(cmd, json!({ "uniform": curve.uniform }));
    out.csv_rows(&curve.points)?
        .write_to(a.out.output.as_deref())
}

#[derive(Serialize)]
struct TheoremReport {
    model: String,
    support_max: u64,
    target_energy: f64,
    lambda: f64,
    #[serde(rename = "S")]
    entropy: f64,
    #[serde(rename = "E")]
    energy: f64,
    #[serde(rename = "Q")]
    efficiency: f64,
    /// `Q - lambda`, how far `Q` is from the exponent it approximates.
    efficiency_minus_lambda: f64,
    iterations: usize,
    /// Stationarity residual with the energy multiplier.
    lagrange_residual: f64,
    /// Stationarity residual with the multiplier replaced by `Q`.
    efficiency_residual: f64,
    /// Relative spread of `p_v exp(lambda u(v))`.
    form_deviation: f64,
    tol: f64,
    passed: bool,
}

fn verify(cmd: &Command, a: &VerifyArgs) -> Result<()> {
    if a.support_max < 2 {
        return Err(usage("--support-max must be at least 2"));
    }
    if !(a.tol.is_finite() && a.tol > 0.0) {
        return Err(usage(format!("--tol must be positive, got {}", a.tol)));
    }
    if !a.energy.is_finite() {
        return Err(usage("--energy must be finite"));
    }
    let sol = max_entropy_oracle(a.energy, a.support_max, a.model.into(), DEFAULT_LAMBDA_TOL)?;
    let lagrange_residual = sol.lagrange_residual();
    let form_deviation = sol.form_deviation();
    let report = TheoremReport {
        model: sol.model.to_string(),
        support_max: sol.support_max,
        target_energy: sol.target_energy,
        lambda: sol.lambda,
        entropy: sol.entropy,
        energy: sol.energy,
        efficiency: sol.efficiency(),
        efficiency_minus_lambda: sol.efficiency() - sol.lambda,
        iterations: sol.iterations,
        lagrange_residual,
        efficiency_residual: sol.efficiency_residual(),
        form_deviation,
        tol: a.tol,
        passed: lagrange_residual < a.tol && form_deviation < a.tol,
    };
    Output::new(cmd, json!({}))
        .json(&report)
        .write_to(a.out.output.as_deref())
}

#[derive(Serialize)]
struct ClassCsvRow {
    month: String,
    class: u32,
    population: u64,
    mass: u128,
}

fn evolve(cmd: &Command, a: &EvolveArgs) -> Result<()> {
    check_fraction("ks-threshold", a.input.ks_threshold)?;
    let (events, skipped) = read_events(&a.input)?;
    let monthly = monthly_collections(&events)?;
    let rows = evolution_report(&monthly, a.model.into(), a.input.ks_threshold)?;
    let meta = json!({ "months": "utc", "routes": routes(), "skipped_lines": skipped });

    if let Some(path) = &a.classes_out {
        let classes = rows.iter().flat_map(|r| {
            let month = r.month.to_string();
            r.classes.classes.iter().map(move |c| ClassCsvRow {
                month: month.clone(),
                class: c.class,
                population: c.population,
                mass: c.mass,
            })
        });
        Output::new(cmd, meta.clone())
            .csv_rows(classes)?
            .write_to(Some(path))?;
    }
    Output::new(cmd, meta)
        .csv_rows(rows.iter().map(EvolutionCsvRow::from))?
        .write_to(a.out.output.as_deref())
}

fn pages(cmd: &Command, a: &PagesArgs) -> Result<()> {
    check_fraction("ks-threshold", a.input.ks_threshold)?;
    check_fraction("tail-frac", a.tail_frac)?;
    check_fraction("growth-frac", a.growth_frac)?;
    let params = SaturationParams {
        min_edits: a.min_edits,
        tail_frac: a.tail_frac,
        growth_frac: a.growth_frac,
    };
    let (events, skipped) = read_events(&a.input)?;
    let horizon = a
        .horizon
        .unwrap_or_else(|| events.iter().map(|e| e.timestamp).max().unwrap_or(0));
    let collections = page_collections(&events);
    let timelines = page_timelines(&events);
    let metrics = page_metrics(
        &collections,
        Some((&timelines, horizon, &params)),
        a.input.ks_threshold,
    )?;
    let meta = json!({
        "horizon_end": horizon,
        "saturation_time": "wall-clock",
        "fit_method": "discrete",
        "skipped_lines": skipped,
    });
    Output::new(cmd, meta)
        .csv_rows(&metrics)?
        .write_to(a.out.output.as_deref())
}

fn read_page_metrics(path: &Path) -> Result<Vec<PageMetrics>> {
    let err = |e: csv::Error| CliError::Input {
        path: path.to_path_buf(),
        source: e.into(),
    };
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(open(path)?)
        .deserialize()
        .collect::<std::result::Result<Vec<PageMetrics>, _>>()
        .map_err(err)
}

fn correlate(cmd: &Command, a: &CorrelateArgs) -> Result<()> {
    let mut metrics = read_page_metrics(&a.pages)?;
    if a.saturated_only {
        metrics.retain(|m| m.saturated == Some(true));
    }
    let readership =
        parse_readership(open(&a.readership)?, parse_mode(a.strict)).map_err(|source| {
            CliError::Input {
                path: a.readership.clone(),
                source,
            }
        })?;
    let report = correlate_metrics(&metrics, &readership.records);
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    groups.insert("power_law", report.power_law.size);
    groups.insert("non_power_law", report.non_power_law.size);
    let meta = json!({
        "join": "inner",
        "skipped_lines": readership.skipped,
        "group_sizes": groups,
    });
    Output::new(cmd, meta)
        .json(&report)
        .write_to(a.out.output.as_deref())
}
