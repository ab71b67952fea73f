//! Parse a GeoLife tree, split sessions and write the normalized TSV.
//!
//! ```text
//! cargo run --example parse_geolife [-- <geolife-root> [<out.tsv>]]
//! ```

use std::path::PathBuf;

use fogsim::trajectory::{load_points, split_sessions, write_normalized_file, DEFAULT_SESSION_GAP};

fn main() -> fogsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample"));
    let set = load_points(&root, None)?;
    println!("{:<6} {:>8} {:>9} {:>12}", "user", "points", "sessions", "longest (h)");
    for (user, points) in &set.users {
        let sessions = split_sessions(points, DEFAULT_SESSION_GAP);
        let longest = sessions.iter().map(|s| s.end - s.start).max().unwrap_or(0);
        println!(
            "{user:<6} {:>8} {:>9} {:>12.1}",
            points.len(),
            sessions.len(),
            longest as f64 / 3600.0
        );
    }
    println!("{} malformed records skipped", set.warnings);
    if let Some(out) = args.next() {
        write_normalized_file(out.as_ref(), &set.users)?;
        println!("wrote {out}");
    }
    Ok(())
}
