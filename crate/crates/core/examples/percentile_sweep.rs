//! Availability/excess trade-off of the percentile predictor for k = 0..100,
//! written as `percentile,availability_pct,excess_pct`.
//!
//! ```text
//! cargo run --release --example percentile_sweep [-- <out.csv>]
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use fogsim::experiment::{load_dataset, run_policies, InputConfig};
use fogsim::sim::Policy;
use fogsim::temporal::TemporalKind;
use fogsim::GridNetwork;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = InputConfig {
        root: Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample")),
        trajectories: None,
        users: None,
        sample_users: None,
        seed: 0,
        session_gap: 600,
    };
    let grid = GridNetwork::beijing_default();
    let data = load_dataset(&input, Path::new("."), &grid)?;
    let ks: Vec<f64> = (0..=10).map(|i| i as f64 * 10.0).collect();
    let policies: Vec<Policy> = ks.iter().map(|&k| Policy::tfomm(TemporalKind::Pctl { k })).collect();
    let runs = run_policies(&data.visits, &grid, &policies)?;

    let mut csv = String::from("percentile,availability_pct,excess_pct\n");
    for (k, run) in ks.iter().zip(&runs) {
        let m = &run.metrics;
        csv.push_str(&format!("{k},{:.6},{:.6}\n", m.availability_pct, m.excess_pct));
        let bar = "#".repeat((m.excess_pct / 2.0) as usize);
        println!("k={k:>3}  avail {:>7.3}%  excess {:>7.3}%  {bar}", m.availability_pct, m.excess_pct);
    }
    match std::env::args().nth(1) {
        Some(path) => std::fs::File::create(&path)?.write_all(csv.as_bytes())?,
        None => print!("\n{csv}"),
    }
    Ok(())
}
