//! Stay-duration predictors that pair with the spatial model.
//!
//! Every predictor answers one question at arrival time: how long will the
//! user stay at this node? The simulator subtracts the transfer time from the
//! answer to decide when to start replicating to the predicted next node.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::calendar::Discretizer;
use crate::grid::{NodeId, NodeVisit};
use crate::hwes::{Forecaster, DEFAULT_SEASON};
use crate::Timestamp;

/// Calendar set used by the time-discretized predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdSet {
    Hours,
    DaysOfWeek,
    Months,
}

impl TdSet {
    pub fn discretizer(self) -> Discretizer {
        match self {
            TdSet::Hours => Discretizer::HourOfDay,
            TdSet::DaysOfWeek => Discretizer::DayOfWeek,
            TdSet::Months => Discretizer::Month,
        }
    }

    fn name(self) -> &'static str {
        match self {
            TdSet::Hours => "hours",
            TdSet::DaysOfWeek => "days_of_week",
            TdSet::Months => "months",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Median,
}

impl Statistic {
    pub fn apply(self, samples: &[f64]) -> Option<f64> {
        if samples.is_empty() {
            return None;
        }
        Some(match self {
            Statistic::Mean => samples.iter().sum::<f64>() / samples.len() as f64,
            Statistic::Median => percentile(samples, 50.0)?,
        })
    }
}

/// Granularity at which Holt-Winters training series are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HwesSplit {
    /// One series per (node, calendar bin) of the hour, weekday and month
    /// discretizations.
    Discretization,
    /// One series per node.
    Node,
    /// One series per user.
    User,
}

/// Which predictor a [`TemporalModel`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalKind {
    Mean,
    Pctl { k: f64 },
    Td { set: TdSet, statistic: Statistic },
    Hwes { split: HwesSplit, m: usize },
}

impl TemporalKind {
    pub fn hwes(split: HwesSplit) -> Self {
        TemporalKind::Hwes {
            split,
            m: DEFAULT_SEASON,
        }
    }
}

impl fmt::Display for TemporalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalKind::Mean => write!(f, "mean"),
            TemporalKind::Pctl { k } => write!(f, "pctl_{k}"),
            TemporalKind::Td { set, statistic } => {
                let stat = match statistic {
                    Statistic::Mean => "mean",
                    Statistic::Median => "median",
                };
                write!(f, "td_{}_{stat}", set.name())
            }
            TemporalKind::Hwes { split, m } => {
                let split = match split {
                    HwesSplit::Discretization => "discretization",
                    HwesSplit::Node => "node",
                    HwesSplit::User => "user",
                };
                write!(f, "hwes_{split}_m{m}")
            }
        }
    }
}

/// One completed stay used for training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationSample {
    pub duration: i64,
    pub arrival: Timestamp,
    pub node: NodeId,
}

impl DurationSample {
    /// `None` for zero-length stays, which carry no duration information.
    pub fn from_visit(v: &NodeVisit) -> Option<Self> {
        (v.duration() > 0).then_some(DurationSample {
            duration: v.duration(),
            arrival: v.arrival,
            node: v.node,
        })
    }

    pub fn end(&self) -> Timestamp {
        self.arrival + self.duration
    }

    /// (hour of day, day of week, month)
    pub fn bins(&self) -> (u32, u32, u32) {
        (
            Discretizer::HourOfDay.bin(self.arrival),
            Discretizer::DayOfWeek.bin(self.arrival),
            Discretizer::Month.bin(self.arrival),
        )
    }
}

/// What a prediction is asked about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationContext {
    pub node: NodeId,
    pub arrival: Timestamp,
    pub now: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeriesKey {
    User,
    Node(NodeId),
    Bin(NodeId, Discretizer, u32),
}

const DISCRETIZED: [Discretizer; 3] = [Discretizer::HourOfDay, Discretizer::DayOfWeek, Discretizer::Month];

/// Time-ordered durations plus the end time of the latest one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DurationSeries {
    pub durations: Vec<f64>,
    pub last_end: Timestamp,
}

/// Per-user stay-duration predictor.
#[derive(Debug, Clone)]
pub struct TemporalModel {
    kind: TemporalKind,
    by_node: BTreeMap<NodeId, Vec<f64>>,
    by_bin: BTreeMap<NodeId, BTreeMap<u32, Vec<f64>>>,
    series: BTreeMap<SeriesKey, DurationSeries>,
}

impl TemporalModel {
    pub fn new(kind: TemporalKind) -> Self {
        if let TemporalKind::Pctl { k } = kind {
            assert!((0.0..=100.0).contains(&k), "percentile {k} outside [0, 100]");
        }
        TemporalModel {
            kind,
            by_node: BTreeMap::new(),
            by_bin: BTreeMap::new(),
            series: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> TemporalKind {
        self.kind
    }

    pub fn record(&mut self, sample: DurationSample) {
        debug_assert!(sample.duration > 0);
        let d = sample.duration as f64;
        match self.kind {
            TemporalKind::Mean | TemporalKind::Pctl { .. } => {
                self.by_node.entry(sample.node).or_default().push(d);
            }
            TemporalKind::Td { set, .. } => {
                let bin = set.discretizer().bin(sample.arrival);
                self.by_bin
                    .entry(sample.node)
                    .or_default()
                    .entry(bin)
                    .or_default()
                    .push(d);
            }
            TemporalKind::Hwes { split, .. } => {
                let keys: Vec<SeriesKey> = match split {
                    HwesSplit::User => vec![SeriesKey::User],
                    HwesSplit::Node => vec![SeriesKey::Node(sample.node)],
                    HwesSplit::Discretization => DISCRETIZED
                        .iter()
                        .map(|&disc| SeriesKey::Bin(sample.node, disc, disc.bin(sample.arrival)))
                        .collect(),
                };
                for key in keys {
                    let s = self.series.entry(key).or_default();
                    s.durations.push(d);
                    s.last_end = s.last_end.max(sample.end());
                }
            }
        }
    }

    /// Predicted stay in seconds, `None` when nothing relevant was recorded.
    pub fn predict_duration(&self, ctx: DurationContext) -> Option<f64> {
        debug_assert!(ctx.now >= ctx.arrival);
        match self.kind {
            TemporalKind::Mean => Statistic::Mean.apply(self.by_node.get(&ctx.node)?),
            TemporalKind::Pctl { k } => percentile(self.by_node.get(&ctx.node)?, k),
            TemporalKind::Td { set, statistic } => {
                let disc = set.discretizer();
                let bins = self.by_bin.get(&ctx.node)?;
                td_fallback(bins, disc, disc.bin(ctx.arrival), statistic)
            }
            TemporalKind::Hwes { split, m } => {
                let keys: Vec<SeriesKey> = match split {
                    HwesSplit::User => vec![SeriesKey::User],
                    HwesSplit::Node => vec![SeriesKey::Node(ctx.node)],
                    HwesSplit::Discretization => DISCRETIZED
                        .iter()
                        .map(|&disc| SeriesKey::Bin(ctx.node, disc, disc.bin(ctx.arrival)))
                        .collect(),
                };
                let forecasts: Vec<f64> = keys
                    .iter()
                    .filter_map(|k| self.series.get(k))
                    .filter_map(|s| {
                        let pause = (ctx.now - s.last_end).max(0) as f64;
                        hwes_predict_with_pause(&s.durations, pause, m)
                    })
                    .collect();
                if forecasts.is_empty() {
                    None
                } else {
                    Some(forecasts.iter().sum::<f64>() / forecasts.len() as f64)
                }
            }
        }
    }

    pub fn series(&self, key: &SeriesKey) -> Option<&DurationSeries> {
        self.series.get(key)
    }

    pub fn series_keys(&self) -> impl Iterator<Item = &SeriesKey> {
        self.series.keys()
    }
}

/// `k`-th percentile with linear interpolation between closest ranks.
pub fn percentile(samples: &[f64], k: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = k.clamp(0.0, 100.0) / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    Some(sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Statistic of the target bin, or of the nearest non-empty bins.
///
/// Searches outward in cyclic bin distance; at the first distance with any
/// data, the per-bin statistics of all non-empty bins at exactly that
/// distance are averaged.
pub fn td_fallback(
    bins: &BTreeMap<u32, Vec<f64>>,
    disc: Discretizer,
    target: u32,
    statistic: Statistic,
) -> Option<f64> {
    let n = disc.bins();
    for d in 0..=n / 2 {
        let stats: Vec<f64> = bins
            .iter()
            .filter(|(&b, v)| disc.distance(b, target) == d && !v.is_empty())
            .filter_map(|(_, v)| statistic.apply(v))
            .collect();
        if !stats.is_empty() {
            return Some(stats.iter().sum::<f64>() / stats.len() as f64);
        }
    }
    None
}

/// Remaining stay after a pause since the last observation.
///
/// Successive forecasts (each clamped to at least one second) are summed
/// until they cover `pause`; the overshoot is the predicted remaining stay.
/// With no pause this is the one-step forecast.
pub fn hwes_predict_with_pause(series: &[f64], pause: f64, m: usize) -> Option<f64> {
    let model = Forecaster::fit(series, m)?;
    Some(aggregate_over_pause(&model, pause))
}

/// Forecasts that stay constant (or periodic) from some step on are skipped
/// over in closed form so long pauses stay cheap.
pub fn aggregate_over_pause(model: &Forecaster, pause: f64) -> f64 {
    let clamped = |h: usize| model.forecast(h).max(1.0);
    let (trend, period, max_season) = match model {
        Forecaster::Seasonal(p, s) => (s.trend, p.m, s.seasonals().iter().cloned().fold(f64::MIN, f64::max)),
        Forecaster::Holt(f) => (f.trend, 1, 0.0),
        Forecaster::Mean(_) => (0.0, 1, 0.0),
    };
    let level = match model {
        Forecaster::Seasonal(_, s) => s.level,
        Forecaster::Holt(f) => f.level,
        Forecaster::Mean(v) => *v,
    };

    let mut acc = 0.0;
    let mut h = 1usize;
    loop {
        acc += clamped(h);
        if acc >= pause {
            return acc - pause;
        }
        // Zero trend: the clamped forecasts repeat with the season length.
        if trend == 0.0 && h.is_multiple_of(period) {
            let cycle: f64 = (1..=period).map(|j| clamped(h + j)).sum();
            let whole = ((pause - acc) / cycle).floor() - 1.0;
            if whole >= 1.0 {
                acc += whole * cycle;
                h += whole as usize * period;
            }
        }
        // Falling trend: once every seasonal position is clamped, each further
        // step adds exactly one second.
        if trend < 0.0 && level + (h + 1) as f64 * trend + max_season < 1.0 {
            let steps = (pause - acc).ceil();
            return acc + steps - pause;
        }
        h += 1;
    }
}

/// Walk-forward `index,duration,forecast` CSV: the forecast for row `i` is
/// made from rows `0..i` only (empty when there is nothing to fit).
pub fn series_export_csv(durations: &[f64], m: usize) -> String {
    let mut out = String::from("index,duration,forecast\n");
    for (i, d) in durations.iter().enumerate() {
        let f = Forecaster::fit(&durations[..i], m).map(|f| f.forecast(1));
        match f {
            Some(f) => {
                let _ = writeln!(out, "{i},{d},{f:.3}");
            }
            None => {
                let _ = writeln!(out, "{i},{d},");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hwes::{HwesParams, HwesState};

    // 2008-10-27 was a Monday.
    const MON_09: Timestamp = 1_225_098_000;
    const DAY: i64 = 86_400;

    fn sample(node: u32, arrival: Timestamp, duration: i64) -> DurationSample {
        DurationSample {
            duration,
            arrival,
            node: NodeId(node),
        }
    }

    fn ctx(node: u32, t: Timestamp) -> DurationContext {
        DurationContext {
            node: NodeId(node),
            arrival: t,
            now: t,
        }
    }

    #[test]
    fn mean_model() {
        let mut m = TemporalModel::new(TemporalKind::Mean);
        m.record(sample(0, MON_09, 600));
        m.record(sample(0, MON_09, 1000));
        assert_eq!(m.predict_duration(ctx(0, MON_09)), Some(800.0));
        assert_eq!(m.predict_duration(ctx(1, MON_09)), None);
    }

    #[test]
    fn percentiles() {
        let s = [600.0, 1000.0, 1400.0];
        assert_eq!(percentile(&s, 50.0), Some(1000.0));
        assert_eq!(percentile(&s, 0.0), Some(600.0));
        assert_eq!(percentile(&s, 100.0), Some(1400.0));
        assert_eq!(percentile(&[10.0, 20.0, 30.0, 40.0], 25.0), Some(17.5));
        assert_eq!(percentile(&[], 25.0), None);
    }

    #[test]
    fn td_records_only_matching_bin() {
        let mut m = TemporalModel::new(TemporalKind::Td {
            set: TdSet::DaysOfWeek,
            statistic: Statistic::Mean,
        });
        m.record(sample(0, MON_09, 500));
        let bins = &m.by_bin[&NodeId(0)];
        assert_eq!(bins.keys().collect::<Vec<_>>(), vec![&0]);
    }

    #[test]
    fn td_fallback_neighbours() {
        let disc = Discretizer::DayOfWeek;
        let bins: BTreeMap<u32, Vec<f64>> = [(1, vec![400.0]), (3, vec![800.0])].into();
        assert_eq!(td_fallback(&bins, disc, 2, Statistic::Mean), Some(600.0));
        let sunday: BTreeMap<u32, Vec<f64>> = [(6, vec![300.0, 500.0])].into();
        assert_eq!(td_fallback(&sunday, disc, 2, Statistic::Mean), Some(400.0));
        assert_eq!(td_fallback(&BTreeMap::new(), disc, 2, Statistic::Mean), None);
    }

    #[test]
    fn td_median_statistic() {
        let mut m = TemporalModel::new(TemporalKind::Td {
            set: TdSet::Hours,
            statistic: Statistic::Median,
        });
        for d in [100, 200, 900] {
            m.record(sample(0, MON_09, d));
        }
        assert_eq!(m.predict_duration(ctx(0, MON_09)), Some(200.0));
        // two hours later, nearest non-empty bin is still 09:00
        assert_eq!(m.predict_duration(ctx(0, MON_09 + 7200)), Some(200.0));
    }

    #[test]
    fn hwes_user_split_has_one_series() {
        let mut m = TemporalModel::new(TemporalKind::hwes(HwesSplit::User));
        for (i, node) in [0, 1, 2, 0, 1].into_iter().enumerate() {
            m.record(sample(node, MON_09 + i as i64 * 1000, 500));
        }
        assert_eq!(m.series_keys().count(), 1);
        assert_eq!(m.series(&SeriesKey::User).unwrap().durations.len(), 5);
    }

    #[test]
    fn hwes_node_and_discretization_keys() {
        let mut node = TemporalModel::new(TemporalKind::hwes(HwesSplit::Node));
        let mut disc = TemporalModel::new(TemporalKind::hwes(HwesSplit::Discretization));
        for (i, n) in [0, 1, 0].into_iter().enumerate() {
            let s = sample(n, MON_09 + i as i64 * DAY, 500);
            node.record(s);
            disc.record(s);
        }
        assert_eq!(node.series_keys().count(), 2);
        // node 0: same hour, two weekdays, one month → 1 + 2 + 1 series
        // node 1: 3 series
        assert_eq!(disc.series_keys().count(), 7);
    }

    #[test]
    fn pause_aggregation() {
        let flat = Forecaster::Mean(500.0);
        assert_eq!(aggregate_over_pause(&flat, 0.0), 500.0);
        let f300 = Forecaster::Mean(300.0);
        assert_eq!(aggregate_over_pause(&f300, 450.0), 150.0);
        assert_eq!(aggregate_over_pause(&f300, 600.0), 0.0);
        // long pause, closed-form skip must agree with plain stepping
        assert_eq!(aggregate_over_pause(&f300, 1_000_050.0), 150.0);
    }

    #[test]
    fn pause_aggregation_seasonal_and_falling() {
        let p = HwesParams { alpha: 0.5, beta: 0.5, gamma: 0.5, m: 2 };
        let seasonal = Forecaster::Seasonal(p, HwesState::new(500.0, 0.0, vec![-200.0, 200.0], 4));
        // 300, 700, 300, 700, ...: 10 full cycles = 10000, then 300 → overshoot 200
        assert_eq!(aggregate_over_pause(&seasonal, 10_100.0), 200.0);
        let falling = Forecaster::Seasonal(p, HwesState::new(10.0, -5.0, vec![0.0, 0.0], 4));
        // 5, then 1, 1, 1, ...
        assert_eq!(aggregate_over_pause(&falling, 5.0), 0.0);
        assert_eq!(aggregate_over_pause(&falling, 100.5), 0.5);
    }

    #[test]
    fn hwes_pause_zero_is_first_forecast() {
        let y: Vec<f64> = (0..20).map(|i| 500.0 + 100.0 * ((i % 7) as f64)).collect();
        let f = Forecaster::fit(&y, 7).unwrap();
        assert_eq!(hwes_predict_with_pause(&y, 0.0, 7), Some(f.forecast(1).max(1.0)));
        assert_eq!(hwes_predict_with_pause(&[], 0.0, 7), None);
    }

    #[test]
    fn export_csv_shape() {
        let csv = series_export_csv(&[100.0, 200.0, 300.0], 7);
        assert_eq!(csv, "index,duration,forecast\n0,100,\n1,200,100.000\n2,300,150.000\n");
    }

    #[test]
    fn labels() {
        assert_eq!(TemporalKind::Pctl { k: 30.0 }.to_string(), "pctl_30");
        assert_eq!(
            TemporalKind::Td { set: TdSet::DaysOfWeek, statistic: Statistic::Median }.to_string(),
            "td_days_of_week_median"
        );
        assert_eq!(TemporalKind::hwes(HwesSplit::User).to_string(), "hwes_user_m7");
    }
}
