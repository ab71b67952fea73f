//! Regenerates the bundled sample under `data/geolife-sample`.
//!
//! ```text
//! cargo run --example generate_sample [-- <out-dir>]
//! ```

use std::path::PathBuf;

use fogsim::synth::{generate, write_geolife, SynthConfig};

fn main() -> fogsim::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/geolife-sample"));
    if root.exists() {
        std::fs::remove_dir_all(&root).map_err(|e| fogsim::Error::Io { path: root.clone(), source: e })?;
    }
    let cfg = SynthConfig::default();
    let data = generate(&cfg);
    let files = write_geolife(&root, &data)?;
    let points: usize = data.values().flatten().map(Vec::len).sum();
    println!("{} users, {files} files, {points} points -> {}", data.len(), root.display());
    Ok(())
}
