//! Holt-Winters forecasts on a synthetic weekly pattern and on a real stay
//! duration series, including the fallback ladder for short inputs.
//!
//! ```text
//! cargo run --example hwes_forecast
//! ```

use fogsim::hwes::{fit, forecast, Forecaster};

fn main() {
    // a week of daily stays: long weekdays, short weekend, slowly growing
    let week = [480.0, 510.0, 495.0, 505.0, 450.0, 120.0, 90.0];
    let series: Vec<f64> = (0..6 * 7).map(|i| week[i % 7] + 2.0 * i as f64).collect();
    let (params, state) = fit(&series, 7).expect("six seasons");
    println!(
        "alpha {} beta {} gamma {}  level {:.1} trend {:.2}",
        params.alpha, params.beta, params.gamma, state.level, state.trend
    );
    let next: Vec<String> = (1..=7).map(|h| format!("{:.0}", forecast(&params, &state, h))).collect();
    println!("next week: {}", next.join(" "));

    for n in [1, 3, 5, 13, 14] {
        let f = Forecaster::fit(&series[..n], 7).expect("non-empty");
        let rung = match f {
            Forecaster::Seasonal(..) => "seasonal",
            Forecaster::Holt(_) => "holt",
            Forecaster::Mean(_) => "mean",
        };
        println!("{n:>2} points -> {rung:<8} one-step {:.1}", f.forecast(1));
    }
}
