//! Train the fused Markov model online on one user and report how often the
//! top-1 guess was right, overall and per calendar sub-model.
//!
//! ```text
//! cargo run --example fomm_predict [-- <user-id>]
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use fogsim::fomm::FommModel;
use fogsim::trajectory::{load_dataset, DEFAULT_SESSION_GAP};
use fogsim::GridNetwork;

fn main() -> fogsim::Result<()> {
    let user = std::env::args().nth(1).unwrap_or_else(|| "001".to_string());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample");
    let filter: BTreeSet<String> = [user.clone()].into();
    let sessions = load_dataset(&root, Some(&filter), DEFAULT_SESSION_GAP)?;
    let grid = GridNetwork::beijing_default();
    let visits = grid.visits_for_user(sessions.get(&user).map(Vec::as_slice).unwrap_or_default());

    let mut model = FommModel::new(&user);
    let (mut hits, mut asked) = (0, 0);
    for pair in visits.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        if from.session_index != to.session_index {
            continue;
        }
        if let Some(&(guess, _)) = model.predict_next(from, 1).first() {
            asked += 1;
            hits += usize::from(guess == to.node);
        }
        model.observe_transition(from, to.node);
    }
    println!("user {user}: {hits}/{asked} next-node guesses right");
    for (sub, (acc, w)) in model
        .sub_models()
        .iter()
        .zip(model.sub_model_accuracy().iter().zip(model.weights()))
    {
        println!("  {:<12} accuracy {acc:.3}  weight {w:.3}", sub.discretizer().name());
    }
    if let Some(last) = visits.last() {
        println!("from node {} the model now expects:", last.node);
        for (node, p) in model.predict_next(last, 3) {
            println!("  node {node:>2}  p = {p:.3}");
        }
    }
    Ok(())
}
