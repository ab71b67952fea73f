//! Additive Holt-Winters (triple exponential) smoothing.
//!
//! ```text
//! level:    l_t = α(y_t − s_{t−m}) + (1 − α)(l_{t−1} + b_{t−1})
//! trend:    b_t = β(l_t − l_{t−1}) + (1 − β)b_{t−1}
//! season:   s_t = γ(y_t − l_{t−1} − b_{t−1}) + (1 − γ)s_{t−m}
//! forecast: ŷ_{t+h} = l_t + h·b_t + s_{t+h−m(⌊(h−1)/m⌋+1)}
//! ```
//!
//! The state is initialized from the first two seasons and placed at the end
//! of the first season: the first-season mean is the level at its midpoint,
//! so it is advanced by `(m − 1)/2` trend steps and the seasonal offsets are
//! taken against that linear baseline. Smoothing factors are chosen by an
//! exhaustive grid search minimizing the one-step-ahead squared error.
//!
//! Series too short for a seasonal fit fall back to Holt's linear method
//! (4+ points) or the plain mean (1–3 points).

use serde::{Deserialize, Serialize};

/// Candidate values for every smoothing factor.
pub const PARAM_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Default season length, counted in visits.
pub const DEFAULT_SEASON: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwesParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HwesState {
    pub level: f64,
    pub trend: f64,
    /// `s_{t−m+1} ..= s_t`, oldest first.
    seasonals: Vec<f64>,
    /// Observations consumed so far, including the initialization season.
    pub consumed: usize,
}

impl HwesState {
    pub fn new(level: f64, trend: f64, seasonals: Vec<f64>, consumed: usize) -> Self {
        HwesState {
            level,
            trend,
            seasonals,
            consumed,
        }
    }

    pub fn seasonals(&self) -> &[f64] {
        &self.seasonals
    }

    /// One-step-ahead prediction for the next observation.
    fn one_step(&self) -> f64 {
        self.level + self.trend + self.seasonals[0]
    }

    fn update(&mut self, p: &HwesParams, y: f64) {
        let s_old = self.seasonals[0];
        let level = p.alpha * (y - s_old) + (1.0 - p.alpha) * (self.level + self.trend);
        let trend = p.beta * (level - self.level) + (1.0 - p.beta) * self.trend;
        let season = p.gamma * (y - self.level - self.trend) + (1.0 - p.gamma) * s_old;
        self.level = level;
        self.trend = trend;
        self.seasonals.rotate_left(1);
        *self.seasonals.last_mut().expect("m >= 1") = season;
        self.consumed += 1;
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Initial state from the first two seasons, or `None` if the series is
/// shorter than `2m` or `m < 2`.
pub fn initial_state(series: &[f64], m: usize) -> Option<HwesState> {
    if m < 2 || series.len() < 2 * m {
        return None;
    }
    let first = mean(&series[..m]);
    let second = mean(&series[m..2 * m]);
    let trend = (second - first) / m as f64;
    let mid = (m as f64 - 1.0) / 2.0;
    let seasonals = (0..m)
        .map(|i| series[i] - (first + (i as f64 - mid) * trend))
        .collect();
    Some(HwesState::new(first + mid * trend, trend, seasonals, m))
}

/// Runs the recursions over the whole series with fixed parameters and
/// returns the final state plus the one-step squared error.
pub fn smooth(series: &[f64], params: &HwesParams) -> Option<(HwesState, f64)> {
    let mut state = initial_state(series, params.m)?;
    let mut sse = 0.0;
    for &y in &series[params.m..] {
        let e = y - state.one_step();
        sse += e * e;
        state.update(params, y);
    }
    Some((state, sse))
}

/// Grid-searched seasonal fit. Ties go to the lexicographically smallest
/// `(alpha, beta, gamma)`.
pub fn fit(series: &[f64], m: usize) -> Option<(HwesParams, HwesState)> {
    initial_state(series, m)?;
    let mut best: Option<(f64, HwesParams, HwesState)> = None;
    for &alpha in &PARAM_GRID {
        for &beta in &PARAM_GRID {
            for &gamma in &PARAM_GRID {
                let params = HwesParams { alpha, beta, gamma, m };
                let (state, sse) = smooth(series, &params)?;
                if best.as_ref().is_none_or(|(b, _, _)| sse < *b) {
                    best = Some((sse, params, state));
                }
            }
        }
    }
    best.map(|(_, p, s)| (p, s))
}

/// `h`-step-ahead forecast from a fitted state, `h >= 1`.
pub fn forecast(params: &HwesParams, state: &HwesState, h: usize) -> f64 {
    debug_assert!(h >= 1);
    state.level + h as f64 * state.trend + state.seasonals[(h - 1) % params.m]
}

/// Holt's linear method: level and trend only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltFit {
    pub alpha: f64,
    pub beta: f64,
    pub level: f64,
    pub trend: f64,
}

impl HoltFit {
    pub fn forecast(&self, h: usize) -> f64 {
        self.level + h as f64 * self.trend
    }
}

fn holt_smooth(series: &[f64], alpha: f64, beta: f64) -> (f64, f64, f64) {
    let mut level = series[0];
    let mut trend = series[1] - series[0];
    let mut sse = 0.0;
    for &y in &series[1..] {
        let e = y - (level + trend);
        sse += e * e;
        let l = alpha * y + (1.0 - alpha) * (level + trend);
        trend = beta * (l - level) + (1.0 - beta) * trend;
        level = l;
    }
    (level, trend, sse)
}

/// Grid-searched Holt fit; needs at least two points.
pub fn fit_holt(series: &[f64]) -> Option<HoltFit> {
    if series.len() < 2 {
        return None;
    }
    let mut best: Option<(f64, HoltFit)> = None;
    for &alpha in &PARAM_GRID {
        for &beta in &PARAM_GRID {
            let (level, trend, sse) = holt_smooth(series, alpha, beta);
            if best.as_ref().is_none_or(|(b, _)| sse < *b) {
                best = Some((sse, HoltFit { alpha, beta, level, trend }));
            }
        }
    }
    best.map(|(_, f)| f)
}

/// Whichever model the series length supports.
#[derive(Debug, Clone, PartialEq)]
pub enum Forecaster {
    Seasonal(HwesParams, HwesState),
    Holt(HoltFit),
    Mean(f64),
}

impl Forecaster {
    /// Seasonal fit when `len >= 2m`, else Holt for `len >= 4`, else the
    /// mean; `None` for an empty series.
    pub fn fit(series: &[f64], m: usize) -> Option<Self> {
        if let Some((p, s)) = fit(series, m) {
            return Some(Forecaster::Seasonal(p, s));
        }
        match series.len() {
            0 => None,
            1..=3 => Some(Forecaster::Mean(mean(series))),
            _ => fit_holt(series).map(Forecaster::Holt),
        }
    }

    pub fn forecast(&self, h: usize) -> f64 {
        match self {
            Forecaster::Seasonal(p, s) => forecast(p, s, h),
            Forecaster::Holt(f) => f.forecast(h),
            Forecaster::Mean(v) => *v,
        }
    }
}

/// Forecast for a series too short to fit seasonally. `None` means no data.
pub fn fallback_forecast(series: &[f64], h: usize) -> Option<f64> {
    match series.len() {
        0 => None,
        1..=3 => Some(mean(series)),
        _ => fit_holt(series).map(|f| f.forecast(h)),
    }
}
