use std::path::Path;
use std::process::{Command, Output};

fn thermolens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermolens"))
        .args(args)
        .env_remove("THERMOLENS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data lines (without the `#` header) parsed into header-keyed rows.
fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers
                .iter()
                .map(String::from)
                .zip(rec.iter().map(String::from))
                .collect()
        })
        .collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = thermolens(&[
            "synth",
            "--alpha",
            "2",
            "--n",
            "1000",
            "--seed",
            "7",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let (a, b) = (
        std::fs::read_to_string(a).unwrap(),
        std::fs::read_to_string(b).unwrap(),
    );
    // headers differ only in the output path
    assert_eq!(
        a.lines().skip(1).collect::<Vec<_>>(),
        b.lines().skip(1).collect::<Vec<_>>()
    );
    let total: u64 = csv_rows(&a)
        .iter()
        .map(|r| r["count"].parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 1000);

    let other = stdout(&thermolens(&[
        "synth", "--alpha", "2", "--n", "1000", "--seed", "8",
    ]));
    assert_ne!(
        other.lines().skip(1).collect::<Vec<_>>(),
        a.lines().skip(1).collect::<Vec<_>>()
    );
}

#[test]
fn every_output_starts_with_header() {
    let out = stdout(&thermolens(&[
        "synth", "--alpha", "2.5", "--n", "10", "--seed", "1",
    ]));
    let first = out.lines().next().unwrap();
    let prefix = format!("# thermolens {} ", env!("CARGO_PKG_VERSION"));
    assert!(first.starts_with(&prefix), "{first}");
    let config: serde_json::Value = serde_json::from_str(&first[prefix.len()..]).unwrap();
    assert_eq!(config["command"], "synth");
    assert_eq!(config["seed"], 1);
    assert_eq!(config["alpha"], 2.5);
}

#[test]
fn metrics_on_two_value_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.csv", "value,count\n1,2\n2,2\n");
    let rows = csv_rows(&stdout(&thermolens(&["metrics", "--input", &input])));
    assert_eq!(rows.len(), 1);
    let s: f64 = rows[0]["S"].parse().unwrap();
    let q: f64 = rows[0]["Q"].parse().unwrap();
    assert!((s - std::f64::consts::LN_2).abs() < 1e-12);
    assert!((q - 2.0).abs() < 1e-12);
    assert_eq!(rows[0]["N"], "4");

    let json = stdout(&thermolens(&[
        "metrics", "--input", &input, "--format", "json",
    ]));
    let body: serde_json::Value = serde_json::from_str(json.split_once('\n').unwrap().1).unwrap();
    assert!((body["alpha"].as_f64().unwrap() - 3.885390).abs() < 1e-6);
}

#[test]
fn metrics_linear_model_and_single_value() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.csv", "value,count\n3,5\n");
    let rows = csv_rows(&stdout(&thermolens(&[
        "metrics", "-i", &input, "--model", "linear",
    ])));
    assert_eq!(rows[0]["S"].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0]["E"].parse::<f64>().unwrap(), 3.0);
    assert_eq!(rows[0]["alpha"], "");
}

#[test]
fn fit_reports_five_fields() {
    let dir = tempfile::tempdir().unwrap();
    let synth = stdout(&thermolens(&[
        "synth", "--alpha", "2", "--n", "20000", "--seed", "3",
    ]));
    let input = write(dir.path(), "s.csv", &synth);
    let json = stdout(&thermolens(&["fit", "-i", &input]));
    let body: serde_json::Value = serde_json::from_str(json.split_once('\n').unwrap().1).unwrap();
    let keys: Vec<&String> = body.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 5, "{keys:?}");
    assert!((body["alpha"].as_f64().unwrap() - 2.0).abs() < 0.05);
    assert_eq!(body["v_min"], 1);
    assert_eq!(body["is_power_law"], true);

    let rows = csv_rows(&stdout(&thermolens(&[
        "fit",
        "-i",
        &input,
        "--format",
        "csv",
        "--method",
        "continuous",
    ])));
    assert!(rows[0]["alpha"].parse::<f64>().unwrap() > 2.3);
}

#[test]
fn energy_curve_is_decreasing() {
    let rows = csv_rows(&stdout(&thermolens(&[
        "curves",
        "--alpha-min",
        "1.2",
        "--alpha-max",
        "4",
        "--step",
        "0.1",
    ])));
    assert_eq!(rows.len(), 29);
    let e: Vec<f64> = rows.iter().map(|r| r["E"].parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(rows[0]["S"], "");
}

#[test]
fn truncated_curve_has_all_columns() {
    let out = stdout(&thermolens(&[
        "curves",
        "--alpha-min",
        "1.5",
        "--alpha-max",
        "2.5",
        "--step",
        "0.5",
        "--truncation",
        "1000",
    ]));
    assert!(out.lines().next().unwrap().contains("\"uniform\":{"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        for col in ["S", "Q", "R", "E", "A"] {
            assert!(r[col].parse::<f64>().is_ok(), "{col} missing");
        }
    }
}

#[test]
fn verify_theorem_passes_for_both_models() {
    for (model, energy) in [("log", "1.0"), ("linear", "5")] {
        let out = stdout(&thermolens(&[
            "verify-theorem",
            "--model",
            model,
            "--energy",
            energy,
        ]));
        let body: serde_json::Value =
            serde_json::from_str(out.split_once('\n').unwrap().1).unwrap();
        assert_eq!(body["passed"], true, "{model}: {body}");
        assert!(body["lagrange_residual"].as_f64().unwrap() < 1e-6);
    }
}

const EVENTS: &str = "ts,editor,page
1230768000,alice,Foo
1230768060,alice,Foo
1230768120,bob,Foo
1233446400,alice,Foo
1233446460,carol,Bar
1233446520,carol,Bar
1233446580,dave,Bar
not-a-number,x,y
";

#[test]
fn evolve_writes_one_row_per_month() {
    let dir = tempfile::tempdir().unwrap();
    let events = write(dir.path(), "e.csv", EVENTS);
    let classes = dir.path().join("classes.csv");
    let out = stdout(&thermolens(&[
        "evolve",
        "--events",
        &events,
        "--classes-out",
        classes.to_str().unwrap(),
    ]));
    assert!(out.lines().next().unwrap().contains("\"skipped_lines\":1"));
    let rows = csv_rows(&out);
    let months: Vec<&str> = rows.iter().map(|r| r["month"].as_str()).collect();
    assert_eq!(months, ["2009-01", "2009-02"]);
    assert_eq!(rows[0]["N"], "2");
    let class_rows = csv_rows(&std::fs::read_to_string(classes).unwrap());
    let mass: u64 = class_rows
        .iter()
        .map(|r| r["mass"].parse::<u64>().unwrap())
        .sum();
    assert_eq!(mass, 7);
}

#[test]
fn strict_mode_rejects_malformed_lines() {
    let dir = tempfile::tempdir().unwrap();
    let events = write(dir.path(), "e.csv", EVENTS);
    let out = thermolens(&["evolve", "--events", &events, "--strict"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(
        err.starts_with("error: ") && err.contains("line 9"),
        "{err}"
    );
}

#[test]
fn pages_then_correlate() {
    let dir = tempfile::tempdir().unwrap();
    let events = write(dir.path(), "e.csv", EVENTS);
    let pages = dir.path().join("pages.csv");
    let pages = pages.to_str().unwrap();
    stdout(&thermolens(&[
        "pages",
        "--events",
        &events,
        "--min-edits",
        "1",
        "-o",
        pages,
    ]));
    let text = std::fs::read_to_string(pages).unwrap();
    assert!(text
        .lines()
        .next()
        .unwrap()
        .contains("\"horizon_end\":1233446580"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["page"], "Bar");
    assert_eq!(rows[1]["total_edits"], "4");
    // one of Foo's four edits lands in the final tenth of its lifetime
    assert_eq!(rows[1]["saturated"], "false");

    let readership = write(dir.path(), "r.csv", "page,clicks\nFoo,10\nBar,3\nBaz,1\n");
    let out = stdout(&thermolens(&[
        "correlate",
        "--pages",
        pages,
        "--readership",
        &readership,
    ]));
    let body: serde_json::Value = serde_json::from_str(out.split_once('\n').unwrap().1).unwrap();
    assert_eq!(body["pages_analyzed"], 2);
    assert_eq!(body["dropped_pages"], 0);
    assert_eq!(body["all"]["size"], 2);
    assert_eq!(body["all"]["median_readership"], 6.5);

    let out = stdout(&thermolens(&[
        "correlate",
        "--pages",
        pages,
        "--readership",
        &readership,
        "--saturated-only",
    ]));
    let body: serde_json::Value = serde_json::from_str(out.split_once('\n').unwrap().1).unwrap();
    assert_eq!(body["pages_analyzed"], 0);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["synth", "--alpha", "2", "--n", "10"][..],
        &["synth", "--alpha", "1", "--n", "10", "--seed", "1"],
        &["synth", "--alpha", "2", "--n", "0", "--seed", "1"],
        &[
            "curves",
            "--alpha-min",
            "2",
            "--alpha-max",
            "1.5",
            "--step",
            "0.1",
        ],
        &[
            "curves",
            "--alpha-min",
            "1.5",
            "--alpha-max",
            "2",
            "--step",
            "-1",
        ],
        &["fit", "-i", "x.csv", "--ks-threshold", "0"],
        &["metrics", "-i", "x.csv", "--model", "cubic"],
        &["frobnicate"],
    ] {
        let out = thermolens(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.csv", "value,count\n");
    let flat = write(dir.path(), "flat.csv", "value,count\n1,10\n");
    for args in [
        vec!["metrics", "-i", empty.as_str()],
        vec!["fit", "-i", flat.as_str()],
        vec!["metrics", "-i", "/nonexistent/c.csv"],
    ] {
        let out = thermolens(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
    }
}

#[test]
fn environment_overrides_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_thermolens"))
        .args(["synth", "--alpha", "2", "--n", "50"])
        .env("THERMOLENS_SEED", "7")
        .output()
        .unwrap();
    let via_env = stdout(&out);
    let via_flag = stdout(&thermolens(&[
        "synth", "--alpha", "2", "--n", "50", "--seed", "7",
    ]));
    assert_eq!(via_env, via_flag);
}
