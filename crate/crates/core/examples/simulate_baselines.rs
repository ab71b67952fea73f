//! The two naive baselines and T-FOMM with the mean predictor on the bundled
//! sample, with a per-user breakdown.
//!
//! ```text
//! cargo run --release --example simulate_baselines
//! ```

use std::path::{Path, PathBuf};

use fogsim::experiment::{load_dataset, run_policies, InputConfig};
use fogsim::sim::Policy;
use fogsim::temporal::TemporalKind;
use fogsim::GridNetwork;

fn main() -> fogsim::Result<()> {
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
    let policies = [Policy::KeepOnClosest, Policy::AlwaysOnAll, Policy::tfomm(TemporalKind::Mean)];
    let runs = run_policies(&data.visits, &grid, &policies)?;

    for run in &runs {
        let m = &run.metrics;
        println!(
            "{:<16} availability {:>7.3}%  excess {:>9.3}%  (user mean {:.3}% / {:.3}%)",
            run.policy.to_string(),
            m.availability_pct,
            m.excess_pct,
            m.user_mean_availability_pct,
            m.user_mean_excess_pct
        );
    }
    println!();
    println!("{:<6} {:>10} {:>10} {:>10}", "user", "closest", "all", "tfomm");
    for user in data.visits.keys() {
        let cells: Vec<String> = runs
            .iter()
            .map(|r| format!("{:>9.2}%", r.metrics.per_user[user].availability_pct()))
            .collect();
        println!("{user:<6} {}", cells.join(" "));
    }
    Ok(())
}
