//! Availability and excess-data metrics over a replayed ledger.
//!
//! Both are integrals over the time users are present in the network, in
//! whole seconds:
//!
//! - availability: share of presence during which the current node held a
//!   complete replica;
//! - excess: replica-seconds (complete or in transfer) spent on nodes other
//!   than the current one, relative to presence.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::grid::{NodeId, NodeVisit};
use crate::sim::{HoldingState, ReplicaLedger, SimOutcome};
use crate::Timestamp;

/// Piecewise-constant count with an exact integral query.
#[derive(Debug, Clone, Default)]
pub struct StepIntegral {
    times: Vec<Timestamp>,
    /// Count on `[times[i], times[i+1])`.
    counts: Vec<i64>,
    /// Integral from `times[0]` up to `times[i]`.
    prefix: Vec<i64>,
}

impl StepIntegral {
    pub fn from_intervals(intervals: impl IntoIterator<Item = (Timestamp, Timestamp)>) -> Self {
        let mut deltas: BTreeMap<Timestamp, i64> = BTreeMap::new();
        for (a, b) in intervals {
            if b > a {
                *deltas.entry(a).or_insert(0) += 1;
                *deltas.entry(b).or_insert(0) -= 1;
            }
        }
        let mut s = StepIntegral::default();
        let mut count = 0;
        let mut acc = 0;
        for (t, d) in deltas {
            if let (Some(&pt), Some(&pc)) = (s.times.last(), s.counts.last()) {
                acc += pc * (t - pt);
            }
            count += d;
            s.times.push(t);
            s.counts.push(count);
            s.prefix.push(acc);
        }
        s
    }

    fn cumulative(&self, t: Timestamp) -> i64 {
        // index of the last breakpoint <= t
        match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            i => self.prefix[i - 1] + self.counts[i - 1] * (t - self.times[i - 1]),
        }
    }

    /// `∫ count dt` over `[a, b)`.
    pub fn integral(&self, a: Timestamp, b: Timestamp) -> i64 {
        if b <= a {
            return 0;
        }
        self.cumulative(b) - self.cumulative(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct UserTally {
    pub presence_s: i64,
    pub available_s: i64,
    pub excess_s: i64,
}

impl UserTally {
    pub fn availability_pct(&self) -> f64 {
        pct(self.available_s, self.presence_s)
    }

    pub fn excess_pct(&self) -> f64 {
        pct(self.excess_s, self.presence_s)
    }
}

fn pct(num: i64, den: i64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Integrates one user's holdings over their visits.
pub fn tally_user(ledger: &ReplicaLedger, user: &str, visits: &[NodeVisit]) -> UserTally {
    let mut replica_at: BTreeMap<NodeId, Vec<(Timestamp, Timestamp)>> = BTreeMap::new();
    let mut any_at: BTreeMap<NodeId, Vec<(Timestamp, Timestamp)>> = BTreeMap::new();
    let mut all = Vec::new();
    for h in ledger.for_user(user) {
        if h.state == HoldingState::Replica {
            replica_at.entry(h.node).or_default().push((h.from, h.to));
        }
        any_at.entry(h.node).or_default().push((h.from, h.to));
        all.push((h.from, h.to));
    }
    let replica_at: BTreeMap<NodeId, StepIntegral> = replica_at
        .into_iter()
        .map(|(n, iv)| (n, StepIntegral::from_intervals(iv)))
        .collect();
    let any_at: BTreeMap<NodeId, StepIntegral> = any_at
        .into_iter()
        .map(|(n, iv)| (n, StepIntegral::from_intervals(iv)))
        .collect();
    let all = StepIntegral::from_intervals(all);

    let mut t = UserTally::default();
    for v in visits {
        let (a, b) = (v.arrival, v.departure);
        t.presence_s += b - a;
        t.available_s += replica_at.get(&v.node).map_or(0, |s| s.integral(a, b));
        t.excess_s += all.integral(a, b) - any_at.get(&v.node).map_or(0, |s| s.integral(a, b));
    }
    t
}

/// Aggregated result of one policy run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyMetrics {
    pub per_user: BTreeMap<String, UserTally>,
    /// Presence-weighted availability in percent.
    pub availability_pct: f64,
    /// Presence-weighted excess data in percent.
    pub excess_pct: f64,
    /// Unweighted means over users with non-zero presence.
    pub user_mean_availability_pct: f64,
    pub user_mean_excess_pct: f64,
}

pub fn evaluate(outcome: &SimOutcome) -> PolicyMetrics {
    let per_user: BTreeMap<String, UserTally> = outcome
        .presence
        .iter()
        .map(|(u, vs)| (u.clone(), tally_user(&outcome.ledger, u, vs)))
        .collect();
    aggregate(per_user)
}

pub fn aggregate(per_user: BTreeMap<String, UserTally>) -> PolicyMetrics {
    let present: Vec<&UserTally> = per_user.values().filter(|t| t.presence_s > 0).collect();
    let presence: i64 = present.iter().map(|t| t.presence_s).sum();
    let available: i64 = present.iter().map(|t| t.available_s).sum();
    let excess: i64 = present.iter().map(|t| t.excess_s).sum();
    let n = present.len().max(1) as f64;
    PolicyMetrics {
        availability_pct: pct(available, presence),
        excess_pct: pct(excess, presence),
        user_mean_availability_pct: present.iter().map(|t| t.availability_pct()).sum::<f64>() / n,
        user_mean_excess_pct: present.iter().map(|t| t.excess_pct()).sum::<f64>() / n,
        per_user,
    }
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub policy: String,
    pub variant: String,
    pub availability_pct: f64,
    pub excess_pct: f64,
}

pub const RESULTS_HEADER: &str = "policy,variant,availability_pct,excess_pct";

pub fn write_results<W: Write>(mut w: W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{:.6},{:.6}", r.policy, r.variant, r.availability_pct, r.excess_pct)?;
    }
    Ok(())
}

/// `a` dominates `b`: no worse on both axes, strictly better on one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 && a.1 <= b.1 && (a.0 > b.0 || a.1 < b.1)
}

/// Indices of the non-dominated points `(availability, excess)`, ordered by
/// availability then excess then index.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<usize> {
    let mut front: Vec<usize> = (0..points.len())
        .filter(|&i| !points.iter().any(|&p| dominates(p, points[i])))
        .collect();
    front.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[a].1.total_cmp(&points[b].1))
            .then(a.cmp(&b))
    });
    front
}
