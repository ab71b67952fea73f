//! Map one user's fixes onto the 8x8 Beijing grid and list the node visits.
//!
//! ```text
//! cargo run --example grid_visits [-- <user-id>]
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use fogsim::trajectory::{load_dataset, DEFAULT_SESSION_GAP};
use fogsim::GridNetwork;

fn main() -> fogsim::Result<()> {
    let user = std::env::args().nth(1).unwrap_or_else(|| "000".to_string());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample");
    let filter: BTreeSet<String> = [user.clone()].into();
    let sessions = load_dataset(&root, Some(&filter), DEFAULT_SESSION_GAP)?;
    let Some(sessions) = sessions.get(&user) else {
        println!("no data for user {user}");
        return Ok(());
    };

    let grid = GridNetwork::beijing_default();
    let visits = grid.visits_for_user(sessions);
    println!("{} sessions, {} visits", sessions.len(), visits.len());
    for v in visits.iter().filter(|v| v.session_index == 0) {
        let (_, lat, lon) = grid.node_centers()[v.node.0 as usize];
        println!(
            "session 0  node {:>2} ({lat:.4}, {lon:.4})  {:>6} s",
            v.node,
            v.duration()
        );
    }

    let mut durations: Vec<i64> = visits.iter().map(|v| v.duration()).collect();
    durations.sort_unstable();
    let nodes: BTreeSet<_> = visits.iter().map(|v| v.node).collect();
    println!(
        "{} distinct nodes, median stay {} s, {} stays shorter than the transfer time",
        nodes.len(),
        durations[durations.len() / 2],
        durations.iter().filter(|&&d| d < grid.transfer_time()).count()
    );
    Ok(())
}
