//! Run configuration and the ingest → simulate → compare pipelines.
//!
//! A run is described by one TOML file:
//!
//! ```toml
//! [input]
//! root = "data/geolife-sample"   # or: trajectories = "traj.tsv"
//! users = ["000", "001"]         # optional filter
//! session_gap = 600
//!
//! [grid]
//! rows = 8
//! cols = 8
//! transfer_time = 300
//!
//! [output]
//! dir = "out"
//!
//! [[policy]]
//! kind = "keep_on_closest"
//!
//! [[policy]]
//! kind = "tfomm"
//! temporal = "pctl"
//! sweep = { from = 0, to = 100, step = 10 }
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Every output is a pure function of the config and the input data.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Bounds, GridNetwork, NodeVisit};
use crate::metrics::{self, pareto_front, PolicyMetrics, ResultRow, RESULTS_HEADER};
use crate::sim::{run_simulation, HoldingState, Policy, SimOutcome};
use crate::temporal::{HwesSplit, Statistic, TdSet, TemporalKind};
use crate::trajectory::{self, Session, TrackPoint, DEFAULT_SESSION_GAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// GeoLife tree `root/<user>/Trajectory/*.plt`.
    #[serde(default)]
    pub root: Option<PathBuf>,
    /// Normalized TSV written by `ingest`.
    #[serde(default)]
    pub trajectories: Option<PathBuf>,
    #[serde(default)]
    pub users: Option<Vec<String>>,
    /// Keep a seeded random subset of this many users.
    #[serde(default)]
    pub sample_users: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_gap")]
    pub session_gap: i64,
}

fn default_gap() -> i64 {
    DEFAULT_SESSION_GAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub rows: u32,
    pub cols: u32,
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub transfer_time: i64,
    pub buffer: i64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let b = Bounds::BEIJING;
        GridConfig {
            rows: 8,
            cols: 8,
            lat_min: b.lat_min,
            lat_max: b.lat_max,
            lon_min: b.lon_min,
            lon_max: b.lon_max,
            transfer_time: 300,
            buffer: 0,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<GridNetwork> {
        let bounds = Bounds {
            lat_min: self.lat_min,
            lat_max: self.lat_max,
            lon_min: self.lon_min,
            lon_max: self.lon_max,
        };
        GridNetwork::new(self.rows, self.cols, bounds, self.transfer_time, self.buffer)
            .map_err(|e| Error::config("grid", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.from + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    KeepOnClosest,
    AlwaysOnAll,
    Tfomm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalName {
    Mean,
    Pctl,
    Td,
    Hwes,
}

/// One `[[policy]]` table. T-FOMM parameters on a baseline are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percentile: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub td_set: Option<TdSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<Statistic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<HwesSplit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub season: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fanout: Option<usize>,
}

impl PolicySpec {
    pub fn baseline(kind: PolicyName) -> Self {
        PolicySpec {
            kind,
            temporal: None,
            percentile: None,
            sweep: None,
            td_set: None,
            statistic: None,
            split: None,
            season: None,
            fanout: None,
        }
    }

    pub fn tfomm(temporal: TemporalName) -> Self {
        PolicySpec {
            temporal: Some(temporal),
            ..Self::baseline(PolicyName::Tfomm)
        }
    }

    /// Expands sweeps and fills defaults.
    pub fn expand(&self, index: usize) -> Result<Vec<Policy>> {
        let field = |name: &str| format!("policy[{index}].{name}");
        let tfomm_only = [
            ("temporal", self.temporal.is_some()),
            ("percentile", self.percentile.is_some()),
            ("sweep", self.sweep.is_some()),
            ("td_set", self.td_set.is_some()),
            ("statistic", self.statistic.is_some()),
            ("split", self.split.is_some()),
            ("season", self.season.is_some()),
            ("fanout", self.fanout.is_some()),
        ];
        match self.kind {
            PolicyName::KeepOnClosest | PolicyName::AlwaysOnAll => {
                if let Some((name, _)) = tfomm_only.iter().find(|(_, set)| *set) {
                    return Err(Error::config(field(name), "only valid for kind = \"tfomm\""));
                }
                return Ok(vec![if self.kind == PolicyName::KeepOnClosest {
                    Policy::KeepOnClosest
                } else {
                    Policy::AlwaysOnAll
                }]);
            }
            PolicyName::Tfomm => {}
        }
        let fanout = self.fanout.unwrap_or(1);
        if fanout == 0 {
            return Err(Error::config(field("fanout"), "must be at least 1"));
        }
        let temporal = self.temporal.unwrap_or(TemporalName::Mean);
        let allowed: &[&str] = match temporal {
            TemporalName::Mean => &["temporal", "fanout"],
            TemporalName::Pctl => &["temporal", "fanout", "percentile", "sweep"],
            TemporalName::Td => &["temporal", "fanout", "td_set", "statistic"],
            TemporalName::Hwes => &["temporal", "fanout", "split", "season"],
        };
        if let Some((name, _)) = tfomm_only.iter().find(|(n, set)| *set && !allowed.contains(n)) {
            return Err(Error::config(field(name), format!("not valid for temporal = {temporal:?}")));
        }
        let kinds: Vec<TemporalKind> = match temporal {
            TemporalName::Mean => vec![TemporalKind::Mean],
            TemporalName::Pctl => {
                let ks = match (self.percentile, self.sweep) {
                    (Some(k), None) => vec![k],
                    (None, Some(s)) => {
                        if !(s.step > 0.0) || s.to < s.from {
                            return Err(Error::config(field("sweep"), "need step > 0 and from <= to"));
                        }
                        s.values()
                    }
                    _ => return Err(Error::config(field("percentile"), "give exactly one of percentile or sweep")),
                };
                if let Some(k) = ks.iter().find(|k| !(0.0..=100.0).contains(*k)) {
                    return Err(Error::config(field("percentile"), format!("{k} outside [0, 100]")));
                }
                ks.into_iter().map(|k| TemporalKind::Pctl { k }).collect()
            }
            TemporalName::Td => {
                let set = self.td_set.ok_or_else(|| Error::config(field("td_set"), "required for temporal = \"td\""))?;
                vec![TemporalKind::Td {
                    set,
                    statistic: self.statistic.unwrap_or(Statistic::Mean),
                }]
            }
            TemporalName::Hwes => {
                let m = self.season.unwrap_or(crate::hwes::DEFAULT_SEASON);
                if m < 2 {
                    return Err(Error::config(field("season"), "must be at least 2"));
                }
                vec![TemporalKind::Hwes {
                    split: self.split.unwrap_or(HwesSplit::User),
                    m,
                }]
            }
        };
        Ok(kinds.into_iter().map(|temporal| Policy::TFomm { temporal, fanout }).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(rename = "policy")]
    pub policies: Vec<PolicySpec>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.lines().next().unwrap_or("").trim().to_string())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "config".to_string());
            Error::config(field, msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Expanded policies in config order.
    pub fn expand_policies(&self) -> Result<Vec<Policy>> {
        if self.policies.is_empty() {
            return Err(Error::config("policy", "at least one [[policy]] is required"));
        }
        let mut out = Vec::new();
        for (i, p) in self.policies.iter().enumerate() {
            out.extend(p.expand(i)?);
        }
        Ok(out)
    }

    /// Checks everything that can be checked without loading data.
    pub fn validate(&self, base: &Path) -> Result<()> {
        self.grid.build()?;
        self.expand_policies()?;
        let i = &self.input;
        match (&i.root, &i.trajectories) {
            (Some(r), None) => {
                let p = base.join(r);
                if !p.is_dir() {
                    return Err(Error::MissingRoot(p));
                }
            }
            (None, Some(t)) => {
                let p = base.join(t);
                if !p.is_file() {
                    return Err(Error::config("input.trajectories", format!("{} does not exist", p.display())));
                }
            }
            _ => return Err(Error::config("input", "set exactly one of root or trajectories")),
        }
        if i.session_gap <= 0 {
            return Err(Error::config("input.session_gap", "must be positive"));
        }
        if i.sample_users == Some(0) {
            return Err(Error::config("input.sample_users", "must be at least 1"));
        }
        Ok(())
    }
}

/// Loaded, filtered and segmented input.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: BTreeMap<String, Vec<TrackPoint>>,
    pub warnings: usize,
    pub sessions: BTreeMap<String, Vec<Session>>,
    pub visits: BTreeMap<String, Vec<NodeVisit>>,
    /// SHA-256 of the normalized serialization of `points`.
    pub input_sha256: String,
}

pub fn load_dataset(input: &InputConfig, base: &Path, grid: &GridNetwork) -> Result<Dataset> {
    let filter: Option<BTreeSet<String>> = input.users.as_ref().map(|u| u.iter().cloned().collect());
    let (mut points, warnings) = match (&input.root, &input.trajectories) {
        (Some(root), _) => {
            let set = trajectory::load_points(&base.join(root), filter.as_ref())?;
            (set.users, set.warnings)
        }
        (None, Some(path)) => {
            let mut users = trajectory::read_normalized(&base.join(path))?;
            if let Some(f) = &filter {
                users.retain(|u, _| f.contains(u));
            }
            (users, 0)
        }
        (None, None) => return Err(Error::config("input", "set exactly one of root or trajectories")),
    };
    if let Some(n) = input.sample_users {
        let mut ids: Vec<String> = points.keys().cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
        ids.shuffle(&mut rng);
        let keep: BTreeSet<String> = ids.into_iter().take(n).collect();
        points.retain(|u, _| keep.contains(u));
    }

    let mut hasher = Sha256::new();
    let mut buf = Vec::new();
    trajectory::write_normalized(&mut buf, &points).expect("writing to memory");
    hasher.update(&buf);
    let input_sha256 = hex::encode(hasher.finalize());

    let sessions = trajectory::sessions_by_user(&points, input.session_gap);
    let visits = sessions
        .iter()
        .map(|(u, s)| (u.clone(), grid.visits_for_user(s)))
        .collect();
    Ok(Dataset {
        points,
        warnings,
        sessions,
        visits,
        input_sha256,
    })
}

/// Result of one policy variant.
#[derive(Debug, Clone)]
pub struct PolicyRun {
    pub policy: Policy,
    pub outcome: SimOutcome,
    pub metrics: PolicyMetrics,
}

impl PolicyRun {
    pub fn row(&self) -> ResultRow {
        ResultRow {
            policy: self.policy.name().to_string(),
            variant: self.policy.variant(),
            availability_pct: self.metrics.availability_pct,
            excess_pct: self.metrics.excess_pct,
        }
    }

    /// File-name stem: policy name plus variant for T-FOMM.
    pub fn label(&self) -> String {
        match self.policy {
            Policy::TFomm { .. } => format!("{}_{}", self.policy.name(), self.policy.variant()),
            _ => self.policy.name().to_string(),
        }
    }
}

/// Simulates every policy in parallel; results keep the input order.
pub fn run_policies(visits: &BTreeMap<String, Vec<NodeVisit>>, grid: &GridNetwork, policies: &[Policy]) -> Result<Vec<PolicyRun>> {
    policies
        .par_iter()
        .map(|&policy| {
            let outcome = run_simulation(visits, grid, policy)?;
            let metrics = metrics::evaluate(&outcome);
            info!(
                "{policy}: availability {:.3}%, excess {:.3}%",
                metrics.availability_pct, metrics.excess_pct
            );
            Ok(PolicyRun { policy, outcome, metrics })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct ManifestPolicy {
    label: String,
    policy: Policy,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    policies: Vec<ManifestPolicy>,
    input_sha256: &'a str,
    users: Vec<&'a str>,
    points: usize,
    parse_warnings: usize,
    sessions: usize,
    visits: usize,
}

#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub out_dir: PathBuf,
    pub rows: Vec<ResultRow>,
    pub input_sha256: String,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(f))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Full `simulate` pipeline. `base` resolves relative input paths; the output
/// directory is `out` if given, else the config's (relative to `base`).
pub fn simulate(config: &RunConfig, base: &Path, out: Option<&Path>) -> Result<SimulateSummary> {
    config.validate(base)?;
    let grid = config.grid.build()?;
    let policies = config.expand_policies()?;
    let data = load_dataset(&config.input, base, &grid)?;
    info!(
        "{} users, {} sessions, {} visits",
        data.points.len(),
        data.sessions.values().map(Vec::len).sum::<usize>(),
        data.visits.values().map(Vec::len).sum::<usize>()
    );
    let runs = run_policies(&data.visits, &grid, &policies)?;

    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| base.join(&config.output.dir));
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let rows: Vec<ResultRow> = runs.iter().map(PolicyRun::row).collect();
    write_file(&out_dir.join("results.csv"), |w| metrics::write_results(w, &rows))?;
    let mean_rows: Vec<ResultRow> = runs
        .iter()
        .map(|r| ResultRow {
            availability_pct: r.metrics.user_mean_availability_pct,
            excess_pct: r.metrics.user_mean_excess_pct,
            ..r.row()
        })
        .collect();
    write_file(&out_dir.join("results_user_mean.csv"), |w| metrics::write_results(w, &mean_rows))?;
    write_file(&out_dir.join("per_user.csv"), |w| {
        writeln!(w, "policy,variant,user,presence_s,available_s,excess_s")?;
        for r in &runs {
            for (user, t) in &r.metrics.per_user {
                writeln!(
                    w,
                    "{},{},{user},{},{},{}",
                    r.policy.name(),
                    r.policy.variant(),
                    t.presence_s,
                    t.available_s,
                    t.excess_s
                )?;
            }
        }
        Ok(())
    })?;
    for r in &runs {
        let label = r.label();
        write_file(&out_dir.join(format!("ledger_{label}.csv")), |w| {
            r.outcome.ledger.write_csv(w, HoldingState::Replica)
        })?;
        write_file(&out_dir.join(format!("transfers_{label}.csv")), |w| {
            r.outcome.ledger.write_csv(w, HoldingState::Transfer)
        })?;
    }
    let sweep: Vec<(f64, &ResultRow)> = runs
        .iter()
        .zip(&rows)
        .filter_map(|(r, row)| match r.policy {
            Policy::TFomm {
                temporal: TemporalKind::Pctl { k },
                ..
            } => Some((k, row)),
            _ => None,
        })
        .collect();
    if !sweep.is_empty() {
        write_file(&out_dir.join("percentile_sweep.csv"), |w| {
            writeln!(w, "percentile,availability_pct,excess_pct")?;
            for (k, row) in &sweep {
                writeln!(w, "{k},{:.6},{:.6}", row.availability_pct, row.excess_pct)?;
            }
            Ok(())
        })?;
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        policies: runs
            .iter()
            .map(|r| ManifestPolicy {
                label: r.label(),
                policy: r.policy,
            })
            .collect(),
        input_sha256: &data.input_sha256,
        users: data.points.keys().map(String::as_str).collect(),
        points: data.points.values().map(Vec::len).sum(),
        parse_warnings: data.warnings,
        sessions: data.sessions.values().map(Vec::len).sum(),
        visits: data.visits.values().map(Vec::len).sum(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out_dir.join("manifest.json"), |w| writeln!(w, "{json}"))?;

    Ok(SimulateSummary {
        out_dir,
        rows,
        input_sha256: data.input_sha256,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestUser {
    pub user: String,
    pub points: usize,
    pub sessions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub users: Vec<IngestUser>,
    pub warnings: usize,
}

/// Parses a GeoLife tree and writes the normalized TSV.
pub fn ingest(root: &Path, users: Option<&BTreeSet<String>>, gap: i64, out: &Path) -> Result<IngestSummary> {
    if gap <= 0 {
        return Err(Error::config("gap", "must be positive"));
    }
    let set = trajectory::load_points(root, users)?;
    trajectory::write_normalized_file(out, &set.users)?;
    let sessions = trajectory::sessions_by_user(&set.users, gap);
    Ok(IngestSummary {
        users: set
            .users
            .iter()
            .map(|(u, p)| IngestUser {
                user: u.clone(),
                points: p.len(),
                sessions: sessions[u].len(),
            })
            .collect(),
        warnings: set.warnings,
    })
}

/// One row of the merged comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub source: String,
    pub row: ResultRow,
    pub pareto: bool,
}

fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let schema = |msg: String| Error::Schema {
        path: path.to_path_buf(),
        msg,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == RESULTS_HEADER => {}
        Some(h) => return Err(schema(format!("header {h:?}, expected {RESULTS_HEADER:?}"))),
        None => return Err(schema("file is empty".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(schema(format!("row {}: expected 4 fields", i + 1)));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| schema(format!("row {}: bad number {s:?}", i + 1)));
        rows.push(ResultRow {
            policy: f[0].to_string(),
            variant: f[1].to_string(),
            availability_pct: num(f[2])?,
            excess_pct: num(f[3])?,
        });
    }
    if rows.is_empty() {
        return Err(schema("no result rows".into()));
    }
    Ok(rows)
}

/// Merges result tables, flags the Pareto front and writes
/// `comparison.csv` and `pareto.csv` into `out_dir`.
pub fn compare(inputs: &[PathBuf], out_dir: &Path) -> Result<Vec<CompareRow>> {
    if inputs.is_empty() {
        return Err(Error::config("inputs", "need at least one results CSV"));
    }
    let mut merged = Vec::new();
    for path in inputs {
        let source = path
            .parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for row in read_results(path)? {
            merged.push(CompareRow {
                source: source.clone(),
                row,
                pareto: false,
            });
        }
    }
    let points: Vec<(f64, f64)> = merged.iter().map(|r| (r.row.availability_pct, r.row.excess_pct)).collect();
    let front = pareto_front(&points);
    for &i in &front {
        merged[i].pareto = true;
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_file(&out_dir.join("comparison.csv"), |w| {
        writeln!(w, "source,{RESULTS_HEADER},pareto")?;
        for r in &merged {
            writeln!(
                w,
                "{},{},{},{:.6},{:.6},{}",
                r.source, r.row.policy, r.row.variant, r.row.availability_pct, r.row.excess_pct, r.pareto
            )?;
        }
        Ok(())
    })?;
    write_file(&out_dir.join("pareto.csv"), |w| {
        writeln!(w, "source,{RESULTS_HEADER}")?;
        for &i in &front {
            let r = &merged[i];
            writeln!(
                w,
                "{},{},{},{:.6},{:.6}",
                r.source, r.row.policy, r.row.variant, r.row.availability_pct, r.row.excess_pct
            )?;
        }
        Ok(())
    })?;
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[input]
root = "geolife"

[[policy]]
kind = "keep_on_closest"

[[policy]]
kind = "tfomm"
temporal = "pctl"
sweep = { from = 0, to = 100, step = 10 }
"#;

    #[test]
    fn defaults_filled() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.input.session_gap, 600);
        assert_eq!(c.output.dir, PathBuf::from("out"));
        let p = c.expand_policies().unwrap();
        assert_eq!(p.len(), 12);
        assert_eq!(p[0], Policy::KeepOnClosest);
        assert_eq!(p[11], Policy::tfomm(TemporalKind::Pctl { k: 100.0 }));
    }

    #[test]
    fn field_level_errors() {
        let bad = MINIMAL.replace("kind = \"keep_on_closest\"", "kind = \"keep_on_closest\"\npercentile = 3");
        let err = RunConfig::from_toml(&bad).unwrap().expand_policies().unwrap_err();
        assert!(err.to_string().contains("policy[0].percentile"), "{err}");

        let err = RunConfig::from_toml(&MINIMAL.replace("root", "rooot")).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(err.to_string().contains("rooot"), "{err}");

        let td = "[input]\nroot='x'\n[[policy]]\nkind='tfomm'\ntemporal='td'\n";
        let err = RunConfig::from_toml(td).unwrap().expand_policies().unwrap_err();
        assert!(err.to_string().contains("td_set"), "{err}");

        let none = "policy = []\n[input]\nroot='x'\n";
        assert!(RunConfig::from_toml(none).unwrap().expand_policies().is_err());
    }

    #[test]
    fn sweep_values() {
        let s = Sweep { from: 0.0, to: 100.0, step: 10.0 };
        assert_eq!(s.values().len(), 11);
        let s = Sweep { from: 5.0, to: 6.0, step: 0.5 };
        assert_eq!(s.values(), vec![5.0, 5.5, 6.0]);
    }

    #[test]
    fn hwes_defaults() {
        let spec = PolicySpec::tfomm(TemporalName::Hwes);
        assert_eq!(spec.expand(0).unwrap(), vec![Policy::tfomm(TemporalKind::hwes(HwesSplit::User))]);
    }
}
