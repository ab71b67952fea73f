//! Run a handful of policies, then merge their results with the `compare`
//! pipeline and print the Pareto front.
//!
//! ```text
//! cargo run --release --example pareto_compare
//! ```

use std::path::{Path, PathBuf};

use fogsim::experiment::{compare, simulate, PolicySpec, RunConfig, TemporalName};
use fogsim::experiment::{GridConfig, InputConfig, OutputConfig, PolicyName};
use fogsim::temporal::{HwesSplit, TdSet};

fn main() -> fogsim::Result<()> {
    let out = std::env::temp_dir().join("fogsim-pareto-example");
    let input = InputConfig {
        root: Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample")),
        trajectories: None,
        users: None,
        sample_users: None,
        seed: 0,
        session_gap: 600,
    };
    let baselines = RunConfig {
        input: input.clone(),
        grid: GridConfig::default(),
        output: OutputConfig { dir: out.join("baselines") },
        policies: vec![
            PolicySpec::baseline(PolicyName::KeepOnClosest),
            PolicySpec::baseline(PolicyName::AlwaysOnAll),
            PolicySpec::tfomm(TemporalName::Mean),
        ],
    };
    let mut td = PolicySpec::tfomm(TemporalName::Td);
    td.td_set = Some(TdSet::Hours);
    let mut hwes = PolicySpec::tfomm(TemporalName::Hwes);
    hwes.split = Some(HwesSplit::Node);
    let mut pctl = PolicySpec::tfomm(TemporalName::Pctl);
    pctl.percentile = Some(90.0);
    let variants = RunConfig {
        input,
        grid: GridConfig::default(),
        output: OutputConfig { dir: out.join("variants") },
        policies: vec![td, hwes, pctl],
    };

    let mut files = Vec::new();
    for cfg in [&baselines, &variants] {
        let summary = simulate(cfg, Path::new("."), None)?;
        files.push(summary.out_dir.join("results.csv"));
    }
    let rows = compare(&files, &out)?;
    println!("{:<10} {:<16} {:<24} {:>9} {:>10}  pareto", "source", "policy", "variant", "avail %", "excess %");
    for r in &rows {
        println!(
            "{:<10} {:<16} {:<24} {:>9.3} {:>10.3}  {}",
            r.source,
            r.row.policy,
            r.row.variant,
            r.row.availability_pct,
            r.row.excess_pct,
            if r.pareto { "*" } else { "" }
        );
    }
    println!("tables in {}", out.display());
    Ok(())
}
