use thermolens::powerlaw::{classify, sample};
use thermolens::structure::{class_decompose, max_entropy_oracle, DEFAULT_LAMBDA_TOL};
use thermolens::thermo::{average_energy, entropy_efficiency};
use thermolens::wiki::{
    correlate_pages, evolution_report, monthly_collections, page_collections, page_metrics,
    page_timelines, parse_events, parse_readership, ParseMode, SaturationParams,
};
use thermolens::{Collection, EnergyModel, ThermoReport};

const EVENTS: &str = "\
ts,editor,page
# January 2009
1230768000,alice,A
1230768001,alice,A
1230768002,bob,A
1230768003,carol,B
1230768004,carol,B
1230768005,carol,B
1230768006,dave,B
# February 2009
1233446400,alice,A
1233446401,erin,C
1233446402,erin,C
1233446403,frank,C
";

#[test]
fn events_flow_into_monthly_and_page_metrics() {
    let events = parse_events(EVENTS.as_bytes(), ParseMode::Strict)
        .unwrap()
        .records;
    assert_eq!(events.len(), 11);

    let monthly = monthly_collections(&events).unwrap();
    let jan = monthly.values().next().unwrap();
    // alice 2, bob 1, carol 3, dave 1
    assert_eq!(
        jan,
        &Collection::from_counts([(1, 2), (2, 1), (3, 1)]).unwrap()
    );

    let rows = evolution_report(&monthly, EnergyModel::Logarithmic, 0.1).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].month.to_string(), "2009-01");
    assert_eq!(
        rows[0].report,
        ThermoReport::from_collection(jan, EnergyModel::Logarithmic).unwrap()
    );
    assert_eq!(rows[0].classes, class_decompose(jan, 10).unwrap());

    let pages = page_collections(&events);
    let timelines = page_timelines(&events);
    let params = SaturationParams {
        min_edits: 1,
        ..SaturationParams::default()
    };
    let metrics = page_metrics(&pages, Some((&timelines, 1233446403, &params)), 0.1).unwrap();
    let names: Vec<&str> = metrics.iter().map(|m| m.page.as_str()).collect();
    assert_eq!(names, ["A", "B", "C"]);
    assert_eq!(metrics[0].total_edits, 4);
    // B stopped in January, long before the horizon
    assert_eq!(metrics[1].saturated, Some(true));
    // C exists only inside the final window
    assert_eq!(metrics[2].saturated, Some(false));
}

#[test]
fn readership_join_is_inner() {
    let events = parse_events(EVENTS.as_bytes(), ParseMode::Strict)
        .unwrap()
        .records;
    let pages = page_collections(&events);
    let readership = parse_readership(
        "page,clicks\nA,10\nB,5\nZ,99\nA,2\n".as_bytes(),
        ParseMode::Strict,
    )
    .unwrap()
    .records;
    let report = correlate_pages(&pages, &readership, 0.1).unwrap();
    assert_eq!(report.pages_analyzed, 2);
    assert_eq!(report.dropped_pages, 1);
    assert_eq!(report.all.median_readership, Some(8.5));
}

#[test]
fn sampled_law_round_trips_through_csv() {
    let c = sample(2.2, 50_000, 42).unwrap();
    let mut buf = Vec::new();
    c.write_csv(&mut buf).unwrap();
    let back = Collection::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, c);
    let fit = classify(&back, 0.1).unwrap();
    assert!(fit.is_power_law);
    assert!((fit.alpha - 2.2).abs() < 0.05);
}

#[test]
fn oracle_beats_empirical_collections_at_equal_energy() {
    // any collection on 1..=V with the oracle's energy has no more entropy
    let c = sample(2.0, 20_000, 5).unwrap();
    let v_max = c.max_value().unwrap();
    let e = average_energy(&c, EnergyModel::Logarithmic).unwrap();
    let sol = max_entropy_oracle(e, v_max, EnergyModel::Logarithmic, DEFAULT_LAMBDA_TOL).unwrap();
    let q = entropy_efficiency(&c, EnergyModel::Logarithmic).unwrap();
    assert!(sol.efficiency() >= q - 1e-9, "{} < {q}", sol.efficiency());
}

#[test]
fn monthly_windows_are_independent() {
    let events = parse_events(EVENTS.as_bytes(), ParseMode::Strict)
        .unwrap()
        .records;
    let full = evolution_report(
        &monthly_collections(&events).unwrap(),
        EnergyModel::Logarithmic,
        0.1,
    )
    .unwrap();
    let jan_only: Vec<_> = events
        .iter()
        .filter(|e| e.timestamp < 1233446400)
        .cloned()
        .collect();
    let partial = evolution_report(
        &monthly_collections(&jan_only).unwrap(),
        EnergyModel::Logarithmic,
        0.1,
    )
    .unwrap();
    assert_eq!(partial[0], full[0]);
}
