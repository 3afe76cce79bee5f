//! Run a configured sweep from code and print its report.

use holomorphic_channels::experiment::{report_csv, run_experiment, ExperimentConfig};

fn main() -> holomorphic_channels::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        "experiment = \"channel-limit\"\nk = 1\nnu_list = [25, 50, 100, 200, 400]\nrecord_timing = false\n",
        None,
    )?;
    let report = run_experiment(&cfg)?;
    print!("{}", report_csv(&report));
    if let Some(fit) = report.fitted_order {
        println!("fitted order {:.4} ± {:.4}", fit.order, fit.std_error);
    }
    for c in &report.checks {
        println!(
            "{} {}: {:.3e} (threshold {:.3e})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    Ok(())
}
