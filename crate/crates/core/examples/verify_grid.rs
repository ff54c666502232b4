//! Run the analytic check suite over a small parameter grid.

use std::collections::BTreeMap;

use oufpt::verify::{parse_grid, run_suite, summarize, Status};

const GRID: &str = r#"{
    "betas": [0.5, 1.0],
    "sigmas": [0.5, 1.0],
    "x0_theta": [[3.0, 1.0]],
    "s_primes": [10.0, 20.0],
    "mc": null
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = parse_grid(GRID)?;
    let reports = run_suite(&grid, 0)?;
    // smallest margin per check over the judged points
    let mut tightest: BTreeMap<&str, f64> = BTreeMap::new();
    for r in reports.iter().filter(|r| r.status != Status::SkippedHypothesis) {
        let m = r.margin.unwrap_or(f64::INFINITY);
        let e = tightest.entry(r.check_id.as_str()).or_insert(f64::INFINITY);
        *e = e.min(m);
    }
    for (id, m) in &tightest {
        println!("{id:<24} min margin {m:.4e}");
    }
    let (pass, skip, fail) = summarize(&reports);
    println!("{pass} pass / {skip} skip / {fail} fail");
    Ok(())
}
