//! Compare stay-duration predictors on one user's visits: each stay is
//! predicted from the history before it, then the stay is recorded.
//!
//! ```text
//! cargo run --release --example temporal_predictors [-- <user-id>]
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use fogsim::temporal::{DurationContext, DurationSample, HwesSplit, Statistic, TdSet, TemporalKind, TemporalModel};
use fogsim::trajectory::{load_dataset, DEFAULT_SESSION_GAP};
use fogsim::GridNetwork;

fn main() -> fogsim::Result<()> {
    let user = std::env::args().nth(1).unwrap_or_else(|| "002".to_string());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample");
    let filter: BTreeSet<String> = [user.clone()].into();
    let sessions = load_dataset(&root, Some(&filter), DEFAULT_SESSION_GAP)?;
    let grid = GridNetwork::beijing_default();
    let visits = grid.visits_for_user(sessions.get(&user).map(Vec::as_slice).unwrap_or_default());

    let kinds = [
        TemporalKind::Mean,
        TemporalKind::Pctl { k: 25.0 },
        TemporalKind::Pctl { k: 75.0 },
        TemporalKind::Td { set: TdSet::Hours, statistic: Statistic::Median },
        TemporalKind::Td { set: TdSet::DaysOfWeek, statistic: Statistic::Mean },
        TemporalKind::hwes(HwesSplit::Node),
        TemporalKind::hwes(HwesSplit::User),
    ];
    println!("{:<24} {:>8} {:>12} {:>12}", "predictor", "answered", "MAE (s)", "bias (s)");
    for kind in kinds {
        let mut model = TemporalModel::new(kind);
        let (mut n, mut abs, mut bias) = (0usize, 0.0, 0.0);
        for v in &visits {
            let ctx = DurationContext { node: v.node, arrival: v.arrival, now: v.arrival };
            if let (Some(pred), Some(sample)) = (model.predict_duration(ctx), DurationSample::from_visit(v)) {
                let err = pred - sample.duration as f64;
                n += 1;
                abs += err.abs();
                bias += err;
            }
            if let Some(sample) = DurationSample::from_visit(v) {
                model.record(sample);
            }
        }
        let n_f = n.max(1) as f64;
        println!("{:<24} {n:>8} {:>12.0} {:>12.0}", kind.to_string(), abs / n_f, bias / n_f);
    }
    Ok(())
}
