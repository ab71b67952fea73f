//! Fusion Multi-Order Markov Model (FOMM) for next-node prediction.
//!
//! Four first-order Markov chains share the same state space (fog nodes) but
//! bucket their transition counts by a different calendar discretization of
//! the departure visit's arrival time. Each chain's next-node distribution is
//! fused into a single ranking with weights that track how often the chain's
//! own top-1 guess turned out right. Everything is learned online; unseen
//! nodes simply create new rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::calendar::Discretizer;
use crate::grid::{NodeId, NodeVisit};
use crate::Timestamp;

type Row = BTreeMap<NodeId, u64>;

/// Transition counts for one discretization.
#[derive(Debug, Clone)]
pub struct MarkovSubModel {
    discretizer: Discretizer,
    counts: BTreeMap<(u32, NodeId), Row>,
}

impl MarkovSubModel {
    pub fn new(discretizer: Discretizer) -> Self {
        MarkovSubModel {
            discretizer,
            counts: BTreeMap::new(),
        }
    }

    pub fn discretizer(&self) -> Discretizer {
        self.discretizer
    }

    pub fn row(&self, t: Timestamp, from: NodeId) -> Option<&Row> {
        self.counts
            .get(&(self.discretizer.bin(t), from))
            .filter(|r| !r.is_empty())
    }

    pub fn observe(&mut self, t: Timestamp, from: NodeId, to: NodeId) {
        *self
            .counts
            .entry((self.discretizer.bin(t), from))
            .or_default()
            .entry(to)
            .or_insert(0) += 1;
    }

    /// Row-normalized probabilities for `(bin(t), from)`.
    pub fn probabilities(&self, t: Timestamp, from: NodeId) -> Vec<(NodeId, f64)> {
        self.row(t, from).map(row_probabilities).unwrap_or_default()
    }

    /// Every non-empty row as `(bin, from, successor probabilities)`.
    pub fn rows(&self) -> impl Iterator<Item = (u32, NodeId, Vec<(NodeId, f64)>)> + '_ {
        self.counts
            .iter()
            .filter(|(_, r)| !r.is_empty())
            .map(|(&(bin, from), r)| (bin, from, row_probabilities(r)))
    }

    /// `bin,from,to,count` lines.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("bin,from,to,count\n");
        for (&(bin, from), row) in &self.counts {
            for (to, n) in row {
                let _ = writeln!(out, "{bin},{from},{to},{n}");
            }
        }
        out
    }
}

fn row_probabilities(row: &Row) -> Vec<(NodeId, f64)> {
    let total: u64 = row.values().sum();
    row.iter().map(|(&n, &c)| (n, c as f64 / total as f64)).collect()
}

fn row_top(row: &Row) -> Option<NodeId> {
    // BTreeMap iterates ascending, so the first maximum wins ties.
    let mut best: Option<(NodeId, u64)> = None;
    for (&n, &c) in row {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((n, c));
        }
    }
    best.map(|(n, _)| n)
}

/// Per-user fused model over the four calendar discretizations.
#[derive(Debug, Clone)]
pub struct FommModel {
    user_id: String,
    subs: Vec<MarkovSubModel>,
    weights: Vec<f64>,
    hits: Vec<u64>,
    misses: Vec<u64>,
}

impl FommModel {
    pub fn new(user_id: impl Into<String>) -> Self {
        let subs: Vec<MarkovSubModel> = Discretizer::ALL.iter().map(|&d| MarkovSubModel::new(d)).collect();
        let n = subs.len();
        FommModel {
            user_id: user_id.into(),
            subs,
            weights: vec![1.0 / n as f64; n],
            hits: vec![0; n],
            misses: vec![0; n],
        }
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn sub_models(&self) -> &[MarkovSubModel] {
        &self.subs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The row sub-model `s` uses: its own, else the global chain's row.
    fn effective_row(&self, s: usize, t: Timestamp, from: NodeId) -> Option<&Row> {
        self.subs[s].row(t, from).or_else(|| self.subs[0].row(t, from))
    }

    /// Learns the transition `from → to`. Each sub-model is first scored on
    /// whether its top-1 guess for this transition was right.
    pub fn observe_transition(&mut self, from: &NodeVisit, to: NodeId) {
        debug_assert_eq!(from.user_id, self.user_id);
        for s in 0..self.subs.len() {
            let hit = self
                .effective_row(s, from.arrival, from.node)
                .and_then(row_top)
                .is_some_and(|top| top == to);
            if hit {
                self.hits[s] += 1;
            } else {
                self.misses[s] += 1;
            }
        }
        for sub in &mut self.subs {
            sub.observe(from.arrival, from.node, to);
        }
        self.update_weights();
    }

    fn update_weights(&mut self) {
        let raw: Vec<f64> = self
            .hits
            .iter()
            .zip(&self.misses)
            .map(|(&h, &m)| (h as f64 + 1.0) / ((h + m) as f64 + 2.0))
            .collect();
        let total: f64 = raw.iter().sum();
        self.weights = raw.into_iter().map(|w| w / total).collect();
    }

    /// Top-`k` next nodes with fused probabilities. Empty when no sub-model
    /// (nor the global fallback) has seen the current node.
    pub fn predict_next(&self, current: &NodeVisit, k: usize) -> Vec<(NodeId, f64)> {
        let rows: Vec<Option<Vec<(NodeId, f64)>>> = (0..self.subs.len())
            .map(|s| {
                self.effective_row(s, current.arrival, current.node)
                    .map(row_probabilities)
            })
            .collect();
        let mut fused = fuse(&self.weights, &rows);
        fused.truncate(k);
        fused
    }

    /// Hit rate of each sub-model's top-1 guess, 0 before any observation.
    pub fn sub_model_accuracy(&self) -> Vec<f64> {
        self.hits
            .iter()
            .zip(&self.misses)
            .map(|(&h, &m)| if h + m == 0 { 0.0 } else { h as f64 / (h + m) as f64 })
            .collect()
    }

    /// CSV dump of every sub-model, each preceded by `# <discretizer>`.
    pub fn dump_csv(&self) -> String {
        self.subs
            .iter()
            .map(|s| format!("# {}\n{}", s.discretizer.name(), s.dump_csv()))
            .collect()
    }
}

/// Convex combination of the contributing rows, weights renormalized over
/// the sub-models that have a row. Sorted by probability, then node id.
pub fn fuse(weights: &[f64], rows: &[Option<Vec<(NodeId, f64)>>]) -> Vec<(NodeId, f64)> {
    let active: f64 = weights
        .iter()
        .zip(rows)
        .filter(|(_, r)| r.as_ref().is_some_and(|r| !r.is_empty()))
        .map(|(w, _)| *w)
        .sum();
    if active <= 0.0 {
        return Vec::new();
    }
    let mut acc: BTreeMap<NodeId, f64> = BTreeMap::new();
    for (w, row) in weights.iter().zip(rows) {
        let Some(row) = row else { continue };
        for &(n, p) in row {
            *acc.entry(n).or_insert(0.0) += w / active * p;
        }
    }
    let mut out: Vec<(NodeId, f64)> = acc.into_iter().collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // 2008-10-28 14:00:00 UTC, a Tuesday
    const TUE_14: Timestamp = 1_225_202_400;

    fn visit(node: u32, t: Timestamp) -> NodeVisit {
        NodeVisit {
            user_id: "u".into(),
            node: NodeId(node),
            arrival: t,
            departure: t + 60,
            session_index: 0,
        }
    }

    #[test]
    fn single_transition() {
        let mut m = FommModel::new("u");
        m.observe_transition(&visit(0, TUE_14), NodeId(1));
        assert_eq!(m.sub_models()[0].probabilities(TUE_14, NodeId(0)), vec![(NodeId(1), 1.0)]);
        assert_eq!(m.predict_next(&visit(0, TUE_14), 3), vec![(NodeId(1), 1.0)]);
    }

    #[test]
    fn count_ratios() {
        let mut m = FommModel::new("u");
        m.observe_transition(&visit(0, TUE_14), NodeId(1));
        m.observe_transition(&visit(0, TUE_14), NodeId(1));
        m.observe_transition(&visit(0, TUE_14), NodeId(2));
        let p = m.sub_models()[0].probabilities(TUE_14, NodeId(0));
        assert!((p[0].1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[1].1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn binning_by_hour_and_weekday() {
        let mut m = FommModel::new("u");
        m.observe_transition(&visit(0, TUE_14), NodeId(1));
        let hour = &m.sub_models()[1];
        let dow = &m.sub_models()[2];
        assert_eq!(hour.rows().map(|(b, _, _)| b).collect::<Vec<_>>(), vec![14]);
        assert_eq!(dow.rows().map(|(b, _, _)| b).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn fusion_hand_arithmetic() {
        let w = [0.25; 4];
        let rows = vec![
            Some(vec![(NodeId(1), 1.0)]),
            Some(vec![(NodeId(2), 1.0)]),
            None,
            None,
        ];
        assert_eq!(fuse(&w, &rows), vec![(NodeId(1), 0.5), (NodeId(2), 0.5)]);
    }

    #[test]
    fn cold_start_is_empty() {
        let mut m = FommModel::new("u");
        assert!(m.predict_next(&visit(7, TUE_14), 1).is_empty());
        m.observe_transition(&visit(0, TUE_14), NodeId(1));
        assert!(m.predict_next(&visit(7, TUE_14), 1).is_empty());
    }

    #[test]
    fn global_fallback_for_other_bins() {
        let mut m = FommModel::new("u");
        m.observe_transition(&visit(0, TUE_14), NodeId(1));
        // a Saturday in March at 03:00: only the global row applies, but every
        // sub-model falls back to it
        let other = visit(0, 1_205_550_000);
        assert_eq!(m.predict_next(&other, 1), vec![(NodeId(1), 1.0)]);
    }

    #[test]
    fn accuracy_tallies() {
        let mut m = FommModel::new("u");
        assert_eq!(m.sub_model_accuracy(), vec![0.0; 4]);
        // global: miss, hit, hit, hit after the first A→B
        for _ in 0..4 {
            m.observe_transition(&visit(0, TUE_14), NodeId(1));
        }
        assert_eq!(m.sub_model_accuracy()[0], 0.75);
    }

    #[test]
    fn loop_accuracy_converges() {
        let mut m = FommModel::new("u");
        let mut t = TUE_14;
        let mut node = 0;
        for _ in 0..400 {
            let next = 1 - node;
            m.observe_transition(&visit(node, t), NodeId(next));
            node = next;
            t += 600;
        }
        for acc in m.sub_model_accuracy() {
            assert!(acc > 0.9, "{acc}");
        }
        let global = m.sub_model_accuracy()[0];
        // only the first two transitions can miss
        assert!((global - 398.0 / 400.0).abs() < 1e-12);
    }

    #[test]
    fn weights_stay_a_probability_vector() {
        let mut m = FommModel::new("u");
        for i in 0..50u32 {
            m.observe_transition(&visit(i % 5, TUE_14 + i as i64 * 3700), NodeId((i * 7) % 5));
            let s: f64 = m.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(m.weights().iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn dump_format() {
        let mut m = FommModel::new("u");
        m.observe_transition(&visit(0, TUE_14), NodeId(1));
        let dump = m.dump_csv();
        assert!(dump.starts_with("# global\nbin,from,to,count\n0,0,1,1\n"));
        assert!(dump.contains("# hour_of_day\nbin,from,to,count\n14,0,1,1\n"));
    }
}
