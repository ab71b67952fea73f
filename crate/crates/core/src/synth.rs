//! Synthetic GeoLife-style trajectories.
//!
//! Each simulated person has a home, a workplace, a lunch spot and a few
//! leisure places inside the Beijing box. Weekdays follow a commute routine
//! with jittered times, optional lunch and evening outings; weekends are
//! sparser leisure days. The GPS logger runs from morning until some time
//! after the person gets home, recording a fix every 30 s while moving and
//! every 4-9 minutes while stationary, so one logged day is one session
//! unless the logger drops out for a while.
//!
//! Output is written in the PLT layout (`<root>/<user>/Trajectory/*.plt`)
//! with GMT timestamps, like the real data set.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::{haversine_m, Bounds};
use crate::trajectory::TrackPoint;
use crate::Timestamp;

const LOCAL_OFFSET: i64 = 8 * 3600;
const MOVING_FIX: i64 = 30;
const HOUR: f64 = 3600.0;
const MIN: f64 = 60.0;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub users: usize,
    pub days: u32,
    pub start: NaiveDate,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 10,
            days: 28,
            start: NaiveDate::from_ymd_opt(2008, 10, 20).expect("valid date"),
            seed: 20081020,
        }
    }
}

type Place = (f64, f64);

#[derive(Debug, Clone)]
struct Person {
    home: Place,
    work: Place,
    lunch: Place,
    leisure: Vec<Place>,
    leave: f64,
    work_end: f64,
    speed_mps: f64,
    lunch_p: f64,
    evening_p: f64,
    /// Weekday with a regular evening activity at `leisure[0]`.
    club_day: Weekday,
}

const INNER: Bounds = Bounds {
    lat_min: 39.78,
    lat_max: 40.02,
    lon_min: 116.19,
    lon_max: 116.61,
};

fn inside(p: Place) -> Place {
    (p.0.clamp(INNER.lat_min, INNER.lat_max), p.1.clamp(INNER.lon_min, INNER.lon_max))
}

fn offset(from: Place, rng: &mut ChaCha8Rng, min_m: f64, max_m: f64) -> Place {
    let bearing = rng.gen_range(0.0..std::f64::consts::TAU);
    let dist = rng.gen_range(min_m..max_m);
    let dlat = dist * bearing.cos() / 111_195.0;
    let dlon = dist * bearing.sin() / (111_195.0 * from.0.to_radians().cos());
    inside((from.0 + dlat, from.1 + dlon))
}

impl Person {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        let home = (rng.gen_range(39.82..39.98), rng.gen_range(116.24..116.56));
        let work = offset(home, rng, 5_000.0, 14_000.0);
        let lunch = offset(work, rng, 400.0, 1_500.0);
        let n = rng.gen_range(2..=4);
        let leisure = (0..n).map(|_| offset(home, rng, 2_000.0, 9_000.0)).collect();
        let days = [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri];
        Person {
            home,
            work,
            lunch,
            leisure,
            leave: rng.gen_range(7.0..8.75) * HOUR,
            work_end: rng.gen_range(17.0..19.0) * HOUR,
            speed_mps: rng.gen_range(6.0..10.0),
            lunch_p: rng.gen_range(0.1..0.6),
            evening_p: rng.gen_range(0.1..0.4),
            club_day: days[rng.gen_range(0..days.len())],
        }
    }
}

/// A planned stay: place and local departure time; `None` departs at the
/// end of logging.
struct Stay {
    place: Place,
    until: Option<f64>,
}

fn weekday_plan(p: &Person, wd: Weekday, rng: &mut ChaCha8Rng) -> (f64, Vec<Stay>, f64) {
    let jitter = |rng: &mut ChaCha8Rng, sd: f64| Normal::new(0.0, sd).expect("sd > 0").sample(rng);
    let leave = p.leave + jitter(rng, 12.0 * MIN);
    let wake = leave - rng.gen_range(30.0..80.0) * MIN;
    let mut end = p.work_end + jitter(rng, 20.0 * MIN);
    if wd == Weekday::Fri {
        end -= 45.0 * MIN;
    }
    let mut plan = vec![Stay { place: p.home, until: Some(leave) }];
    if rng.gen_bool(p.lunch_p) {
        let out = 12.0 * HOUR + jitter(rng, 8.0 * MIN);
        plan.push(Stay { place: p.work, until: Some(out) });
        plan.push(Stay {
            place: p.lunch,
            until: Some(out + rng.gen_range(40.0..70.0) * MIN),
        });
    }
    plan.push(Stay { place: p.work, until: Some(end) });
    let evening = if wd == p.club_day && rng.gen_bool(0.8) {
        Some((p.leisure[0], rng.gen_range(80.0..110.0) * MIN))
    } else if rng.gen_bool(p.evening_p) {
        let i = rng.gen_range(0..p.leisure.len());
        Some((p.leisure[i], rng.gen_range(45.0..150.0) * MIN))
    } else {
        None
    };
    let mut home_at = end + 40.0 * MIN;
    if let Some((place, stay)) = evening {
        // departure is filled in relative to the arrival later
        plan.push(Stay { place, until: Some(-stay) });
        home_at += stay + 30.0 * MIN;
    }
    plan.push(Stay { place: p.home, until: None });
    let log_end = (home_at + rng.gen_range(1.0..3.5) * HOUR).min(23.5 * HOUR);
    (wake, plan, log_end)
}

fn weekend_plan(p: &Person, rng: &mut ChaCha8Rng) -> (f64, Vec<Stay>, f64) {
    let wake = rng.gen_range(8.5..10.5) * HOUR;
    let mut plan = vec![Stay {
        place: p.home,
        until: Some(wake + rng.gen_range(60.0..150.0) * MIN),
    }];
    let outings = rng.gen_range(1..=2);
    let mut last = None;
    for _ in 0..outings {
        let mut i = rng.gen_range(0..p.leisure.len());
        if Some(i) == last {
            i = (i + 1) % p.leisure.len();
        }
        last = Some(i);
        plan.push(Stay {
            place: p.leisure[i],
            until: Some(-rng.gen_range(60.0..180.0) * MIN),
        });
    }
    plan.push(Stay { place: p.home, until: None });
    (wake, plan, 21.0 * HOUR + rng.gen_range(0.0..2.0) * HOUR)
}

/// L-shaped route: one leg along a meridian, one along a parallel. The order
/// of the legs depends only on the unordered pair so both directions share
/// the same streets.
fn route(a: Place, b: Place) -> Vec<Place> {
    let key = ((a.0 + b.0) * 1e4 + (a.1 + b.1) * 1e4) as i64;
    let (p, q) = if a.partial_cmp(&b) == Some(std::cmp::Ordering::Less) { (a, b) } else { (b, a) };
    let corner = if key % 2 == 0 { (q.0, p.1) } else { (p.0, q.1) };
    vec![a, corner, b]
}

fn path_length(path: &[Place]) -> f64 {
    path.windows(2).map(|w| haversine_m(w[0].0, w[0].1, w[1].0, w[1].1)).sum()
}

fn point_along(path: &[Place], dist: f64) -> Place {
    let mut left = dist;
    for w in path.windows(2) {
        let seg = haversine_m(w[0].0, w[0].1, w[1].0, w[1].1);
        if left <= seg && seg > 0.0 {
            let f = left / seg;
            return (w[0].0 + f * (w[1].0 - w[0].0), w[0].1 + f * (w[1].1 - w[0].1));
        }
        left -= seg;
    }
    *path.last().expect("non-empty path")
}

struct Recorder<'a> {
    rng: &'a mut ChaCha8Rng,
    noise: Normal<f64>,
    out: Vec<(Timestamp, Place)>,
    /// Logger switched off during `[from, to)`.
    blackout: Option<(i64, i64)>,
}

impl Recorder<'_> {
    fn fix(&mut self, t: i64, p: Place) {
        if self.blackout.is_some_and(|(a, b)| t >= a && t < b) {
            return;
        }
        let lat = p.0 + self.noise.sample(self.rng);
        let lon = p.1 + self.noise.sample(self.rng);
        self.out.push((t, (lat, lon)));
    }

    fn stay(&mut self, place: Place, from: i64, to: i64) {
        let mut t = from;
        while t < to {
            self.fix(t, place);
            t += self.rng.gen_range(240..540);
        }
    }

    fn travel(&mut self, a: Place, b: Place, from: i64, speed: f64) -> i64 {
        let path = route(a, b);
        let len = path_length(&path);
        let secs = (len / speed).ceil() as i64;
        let mut t = from;
        while t < from + secs {
            self.fix(t, point_along(&path, (t - from) as f64 * speed));
            t += MOVING_FIX;
        }
        from + secs
    }
}

fn simulate_day(p: &Person, date: NaiveDate, rng: &mut ChaCha8Rng) -> Vec<(Timestamp, Place)> {
    let wd = date.weekday();
    let (wake, plan, log_end) = match wd {
        Weekday::Sat | Weekday::Sun => weekend_plan(p, rng),
        _ => weekday_plan(p, wd, rng),
    };
    let midnight = date.and_hms_opt(0, 0, 0).expect("valid time").and_utc().timestamp() - LOCAL_OFFSET;
    let at = |local: f64| midnight + local.round() as i64;
    let blackout = rng.gen_bool(0.12).then(|| {
        let start = at(rng.gen_range(13.0..16.0) * HOUR);
        (start, start + rng.gen_range(20..90) * 60)
    });
    let speed = p.speed_mps * rng.gen_range(0.8..1.2);
    let mut rec = Recorder {
        rng,
        noise: Normal::new(0.0, 0.00012).expect("sd > 0"),
        out: Vec::new(),
        blackout,
    };

    let mut t = at(wake);
    let end = at(log_end);
    for (i, stay) in plan.iter().enumerate() {
        let leave = match stay.until {
            None => end,
            Some(u) if u < 0.0 => t + (-u).round() as i64,
            Some(u) => at(u).max(t + 600),
        };
        rec.stay(stay.place, t, leave);
        t = leave;
        if let Some(next) = plan.get(i + 1) {
            t = rec.travel(stay.place, next.place, t, speed);
        }
        if t >= end {
            break;
        }
    }
    rec.out
}

/// Per-user daily tracks, one inner vector per logged day.
pub fn generate(cfg: &SynthConfig) -> BTreeMap<String, Vec<Vec<TrackPoint>>> {
    let mut out = BTreeMap::new();
    for u in 0..cfg.users {
        let user = format!("{u:03}");
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(u as u64 * 7919));
        let person = Person::sample(&mut rng);
        let mut days = Vec::new();
        for d in 0..cfg.days {
            let date = cfg.start + chrono::Days::new(d as u64);
            let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
            if rng.gen_bool(if weekend { 0.3 } else { 0.1 }) {
                continue;
            }
            let pts: Vec<TrackPoint> = simulate_day(&person, date, &mut rng)
                .into_iter()
                .map(|(t, (lat, lon))| TrackPoint {
                    user_id: user.clone(),
                    timestamp: t,
                    lat,
                    lon,
                })
                .collect();
            if !pts.is_empty() {
                days.push(pts);
            }
        }
        out.insert(user, days);
    }
    out
}

const PLT_HEADER: &str = "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n0,2,255,My Track,0,0,2,8421376\n0\n";

/// Writes one PLT file; altitude is a fixed plausible value.
pub fn write_plt<W: Write>(mut w: W, points: &[TrackPoint]) -> std::io::Result<()> {
    w.write_all(PLT_HEADER.as_bytes())?;
    for p in points {
        let dt = chrono::DateTime::from_timestamp(p.timestamp, 0).expect("timestamp in range");
        let days = p.timestamp as f64 / 86_400.0 + 25_569.0;
        writeln!(
            w,
            "{:.6},{:.6},0,160,{:.10},{},{}",
            p.lat,
            p.lon,
            days,
            dt.format("%Y-%m-%d"),
            dt.format("%H:%M:%S")
        )?;
    }
    Ok(())
}

/// Writes the whole data set under `root`; returns the number of files.
pub fn write_geolife(root: &Path, data: &BTreeMap<String, Vec<Vec<TrackPoint>>>) -> Result<usize> {
    let mut files = 0;
    for (user, days) in data {
        let dir = root.join(user).join("Trajectory");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for day in days {
            let first = chrono::DateTime::from_timestamp(day[0].timestamp, 0).expect("timestamp in range");
            let path = dir.join(format!("{}.plt", first.format("%Y%m%d%H%M%S")));
            let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(f);
            write_plt(&mut w, day).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
            files += 1;
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_ordered() {
        let cfg = SynthConfig {
            users: 2,
            days: 7,
            ..SynthConfig::default()
        };
        let a = generate(&cfg);
        assert_eq!(a, generate(&cfg));
        for days in a.values() {
            for day in days {
                assert!(day.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
                assert!(day.iter().all(|p| Bounds::BEIJING.lat_min < p.lat && p.lat < Bounds::BEIJING.lat_max));
            }
        }
    }

    #[test]
    fn route_is_shared_both_ways() {
        let a = (39.9, 116.3);
        let b = (39.95, 116.4);
        let mut back = route(b, a);
        back.reverse();
        assert_eq!(route(a, b), back);
    }

    #[test]
    fn plt_line_layout() {
        let p = TrackPoint {
            user_id: "u".into(),
            timestamp: 1_224_814_199,
            lat: 39.984702,
            lon: 116.318417,
        };
        let mut buf = Vec::new();
        write_plt(&mut buf, &[p]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("39.984702,116.318417,0,160,39745.09"));
        assert!(last.ends_with(",2008-10-24,02:09:59"));
        assert_eq!(text.lines().count(), 7);
    }
}
