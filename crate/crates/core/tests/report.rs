use holomorphic_channels::experiment::*;

fn constants_report() -> ExperimentReport {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Constants);
    cfg.record_timing = false;
    run_experiment(&cfg).unwrap()
}

#[test]
fn empty_report_is_header_only() {
    let mut r = constants_report();
    r.rows.clear();
    assert_eq!(report_csv(&r), "nu,measured,target,abs_error,tail_bound,seconds\n");
}

#[test]
fn one_row_gives_two_lines() {
    let mut r = constants_report();
    r.rows.truncate(1);
    let csv = report_csv(&r);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(fields.len(), 6);
    assert_eq!(fields[0], 2.0);
    assert_eq!(fields[1], r.rows[0].measured);
}

#[test]
fn json_round_trip() {
    let r = constants_report();
    let back = parse_report_json(&report_json(&r)).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn write_to_file_and_format_detection() {
    let r = constants_report();
    let dir = std::env::temp_dir().join(format!("hchan-report-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("r.json");
    let fmt = format_for_path(Some(&p));
    assert_eq!(fmt, OutputFormat::Json);
    emit_report(&r, fmt, Some(&p)).unwrap();
    assert_eq!(parse_report_json(&std::fs::read_to_string(&p).unwrap()).unwrap(), r);
    let bad = dir.join("missing-dir").join("r.csv");
    let e = emit_report(&r, OutputFormat::Csv, Some(&bad)).unwrap_err();
    assert!(e.to_string().contains("missing-dir"));
}
