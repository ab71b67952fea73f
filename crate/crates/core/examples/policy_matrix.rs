//! Every policy variant on the bundled sample, as one table.
//!
//! ```text
//! cargo run --release --example policy_matrix [-- <geolife-root>]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use fogsim::experiment::{load_dataset, run_policies, InputConfig};
use fogsim::sim::Policy;
use fogsim::temporal::{HwesSplit, Statistic, TdSet, TemporalKind};
use fogsim::GridNetwork;

fn main() -> fogsim::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample"));
    let input = InputConfig {
        root: Some(root),
        trajectories: None,
        users: None,
        sample_users: None,
        seed: 0,
        session_gap: 600,
    };
    let grid = GridNetwork::beijing_default();
    let data = load_dataset(&input, std::path::Path::new("."), &grid)?;

    let mut policies = vec![Policy::KeepOnClosest, Policy::AlwaysOnAll, Policy::tfomm(TemporalKind::Mean)];
    for set in [TdSet::Hours, TdSet::DaysOfWeek, TdSet::Months] {
        for statistic in [Statistic::Mean, Statistic::Median] {
            policies.push(Policy::tfomm(TemporalKind::Td { set, statistic }));
        }
    }
    for split in [HwesSplit::Discretization, HwesSplit::Node, HwesSplit::User] {
        policies.push(Policy::tfomm(TemporalKind::hwes(split)));
    }
    for k in (0..=100).step_by(10) {
        policies.push(Policy::tfomm(TemporalKind::Pctl { k: k as f64 }));
    }

    let started = Instant::now();
    let runs = run_policies(&data.visits, &grid, &policies)?;
    println!("{:<16} {:<28} {:>12} {:>12}", "policy", "variant", "avail %", "excess %");
    for r in &runs {
        let row = r.row();
        println!(
            "{:<16} {:<28} {:>12.3} {:>12.3}",
            row.policy, row.variant, row.availability_pct, row.excess_pct
        );
    }
    println!("{} runs in {:.2?}", runs.len(), started.elapsed());
    Ok(())
}
