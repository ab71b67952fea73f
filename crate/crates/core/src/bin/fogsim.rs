use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fogsim::experiment::{self, RunConfig};
use fogsim::trajectory::DEFAULT_SESSION_GAP;

#[derive(Parser)]
#[command(name = "fogsim", version, about = "Fog-node replication simulator")]
struct Cli {
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a GeoLife tree into a normalized trajectory TSV.
    Ingest {
        #[arg(long)]
        root: PathBuf,
        /// Comma-separated user ids.
        #[arg(long, value_delimiter = ',')]
        users: Option<Vec<String>>,
        /// Session gap threshold in seconds.
        #[arg(long, default_value_t = DEFAULT_SESSION_GAP)]
        gap: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every policy in a config file and write results.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        users: Option<Vec<String>>,
        #[arg(long)]
        gap: Option<i64>,
    },
    /// Merge results CSVs and mark the Pareto front.
    Compare {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> fogsim::Result<()> {
    match cli.command {
        Command::Ingest { root, users, gap, out } => {
            let filter: Option<BTreeSet<String>> = users.map(|u| u.into_iter().collect());
            let summary = experiment::ingest(&root, filter.as_ref(), gap, &out)?;
            println!("user\tpoints\tsessions");
            for u in &summary.users {
                println!("{}\t{}\t{}", u.user, u.points, u.sessions);
            }
            if summary.warnings > 0 {
                eprintln!("skipped {} malformed records", summary.warnings);
            }
        }
        Command::Simulate { config, out, users, gap } => {
            let mut cfg = RunConfig::load(&config)?;
            if users.is_some() {
                cfg.input.users = users;
            }
            if let Some(gap) = gap {
                cfg.input.session_gap = gap;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let summary = experiment::simulate(&cfg, base, out.as_deref())?;
            println!("policy\tvariant\tavailability_pct\texcess_pct");
            for r in &summary.rows {
                println!("{}\t{}\t{:.3}\t{:.3}", r.policy, r.variant, r.availability_pct, r.excess_pct);
            }
            println!("wrote {}", summary.out_dir.display());
        }
        Command::Compare { results, out } => {
            let rows = experiment::compare(&results, &out)?;
            for r in rows.iter().filter(|r| r.pareto) {
                println!(
                    "pareto\t{}\t{}\t{:.3}\t{:.3}",
                    r.row.policy, r.row.variant, r.row.availability_pct, r.row.excess_pct
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
