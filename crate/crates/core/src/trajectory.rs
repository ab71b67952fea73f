//! GeoLife trajectory ingestion and presence sessions.
//!
//! A GeoLife `.plt` file has six header lines followed by records of the form
//! `lat,lon,0,altitude,fractional_days,YYYY-MM-DD,HH:MM:SS`. The dataset is
//! noisy, so malformed records are skipped and tallied instead of failing the
//! whole file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Timestamp;

const PLT_HEADER_LINES: usize = 6;

/// Default inactivity gap that separates two presence sessions.
pub const DEFAULT_SESSION_GAP: i64 = 600;

/// One GPS fix of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub user_id: String,
    pub timestamp: Timestamp,
    pub lat: f64,
    pub lon: f64,
}

/// A maximal run of fixes without a gap longer than the session threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub user_id: String,
    pub points: Vec<TrackPoint>,
    pub start: Timestamp,
    pub end: Timestamp,
}

/// Points parsed from one file plus the number of records that were skipped.
#[derive(Debug, Clone, Default)]
pub struct PltParse {
    pub points: Vec<TrackPoint>,
    pub warnings: usize,
}

/// Raw per-user point streams, sorted and de-duplicated.
#[derive(Debug, Clone, Default)]
pub struct PointSet {
    pub users: BTreeMap<String, Vec<TrackPoint>>,
    pub warnings: usize,
}

fn parse_record(line: &str, user_id: &str) -> Option<TrackPoint> {
    let fields: Vec<&str> = line.trim().split(',').collect();
    if fields.len() != 7 {
        return None;
    }
    let lat: f64 = fields[0].trim().parse().ok()?;
    let lon: f64 = fields[1].trim().parse().ok()?;
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return None;
    }
    let date = NaiveDate::parse_from_str(fields[5].trim(), "%Y-%m-%d").ok()?;
    let time = NaiveTime::parse_from_str(fields[6].trim(), "%H:%M:%S").ok()?;
    Some(TrackPoint {
        user_id: user_id.to_string(),
        timestamp: date.and_time(time).and_utc().timestamp(),
        lat,
        lon,
    })
}

/// Parses a single `.plt` file. Records are returned in file order.
pub fn parse_plt_file(path: &Path, user_id: &str) -> Result<PltParse> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = PltParse::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if idx < PLT_HEADER_LINES {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line, user_id) {
            Some(p) => out.points.push(p),
            None => out.warnings += 1,
        }
    }
    Ok(out)
}

/// Sorts by timestamp (stable) and drops later fixes that repeat a timestamp.
pub fn normalize_points(points: &mut Vec<TrackPoint>) {
    points.sort_by_key(|p| p.timestamp);
    points.dedup_by_key(|p| p.timestamp);
}

/// Splits a time-ordered point stream wherever consecutive fixes are more
/// than `gap_threshold` seconds apart.
pub fn split_sessions(points: &[TrackPoint], gap_threshold: i64) -> Vec<Session> {
    let mut sessions = Vec::new();
    let mut current: Vec<TrackPoint> = Vec::new();
    for p in points {
        if let Some(last) = current.last() {
            if p.timestamp - last.timestamp > gap_threshold {
                sessions.push(close_session(std::mem::take(&mut current)));
            }
        }
        current.push(p.clone());
    }
    if !current.is_empty() {
        sessions.push(close_session(current));
    }
    sessions
}

fn close_session(points: Vec<TrackPoint>) -> Session {
    Session {
        user_id: points[0].user_id.clone(),
        start: points[0].timestamp,
        end: points[points.len() - 1].timestamp,
        points,
    }
}

fn user_plt_files(user_dir: &Path) -> Result<Vec<PathBuf>> {
    let traj = user_dir.join("Trajectory");
    if !traj.is_dir() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&traj)
        .map_err(|e| Error::io(&traj, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("plt"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Loads every user's fixes from a GeoLife tree `root/<user>/Trajectory/*.plt`.
///
/// Users and files are visited in lexicographic order; users are parsed in
/// parallel but the result does not depend on scheduling.
pub fn load_points(root: &Path, user_filter: Option<&BTreeSet<String>>) -> Result<PointSet> {
    if !root.is_dir() {
        return Err(Error::MissingRoot(root.to_path_buf()));
    }
    let mut user_dirs: Vec<(String, PathBuf)> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), e.path()))
        .filter(|(name, _)| user_filter.is_none_or(|f| f.contains(name)))
        .collect();
    user_dirs.sort();

    let parsed: Vec<(String, Vec<TrackPoint>, usize)> = user_dirs
        .par_iter()
        .map(|(user, dir)| {
            let mut points = Vec::new();
            let mut warnings = 0;
            for file in user_plt_files(dir)? {
                let parse = parse_plt_file(&file, user)?;
                points.extend(parse.points);
                warnings += parse.warnings;
            }
            normalize_points(&mut points);
            Ok((user.clone(), points, warnings))
        })
        .collect::<Result<_>>()?;

    let mut set = PointSet::default();
    for (user, points, warnings) in parsed {
        set.warnings += warnings;
        if !points.is_empty() {
            set.users.insert(user, points);
        }
    }
    Ok(set)
}

/// Loads a GeoLife tree and splits each user's stream into sessions.
pub fn load_dataset(
    root: &Path,
    user_filter: Option<&BTreeSet<String>>,
    gap_threshold: i64,
) -> Result<BTreeMap<String, Vec<Session>>> {
    let set = load_points(root, user_filter)?;
    Ok(sessions_by_user(&set.users, gap_threshold))
}

pub fn sessions_by_user(
    users: &BTreeMap<String, Vec<TrackPoint>>,
    gap_threshold: i64,
) -> BTreeMap<String, Vec<Session>> {
    users
        .iter()
        .map(|(u, pts)| (u.clone(), split_sessions(pts, gap_threshold)))
        .collect()
}

/// Writes the normalized `user<TAB>unix<TAB>lat<TAB>lon` format, sorted by
/// user then timestamp.
pub fn write_normalized<W: Write>(mut w: W, users: &BTreeMap<String, Vec<TrackPoint>>) -> std::io::Result<()> {
    for (user, points) in users {
        let mut sorted: Vec<&TrackPoint> = points.iter().collect();
        sorted.sort_by_key(|p| p.timestamp);
        for p in sorted {
            writeln!(w, "{}\t{}\t{}\t{}", user, p.timestamp, p.lat, p.lon)?;
        }
    }
    Ok(())
}

pub fn write_normalized_file(path: &Path, users: &BTreeMap<String, Vec<TrackPoint>>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_normalized(&mut w, users).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a normalized trajectory file. Unlike raw PLT input, any malformed
/// line here is a hard error.
pub fn read_normalized(path: &Path) -> Result<BTreeMap<String, Vec<TrackPoint>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut users: BTreeMap<String, Vec<TrackPoint>> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Format {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: msg.to_string(),
        };
        let mut it = line.split('\t');
        let (Some(user), Some(ts), Some(lat), Some(lon), None) =
            (it.next(), it.next(), it.next(), it.next(), it.next())
        else {
            return Err(bad("expected 4 tab-separated fields"));
        };
        let timestamp = ts.parse().map_err(|_| bad("bad timestamp"))?;
        let lat: f64 = lat.parse().map_err(|_| bad("bad latitude"))?;
        let lon: f64 = lon.parse().map_err(|_| bad("bad longitude"))?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(bad("coordinate out of range"));
        }
        users.entry(user.to_string()).or_default().push(TrackPoint {
            user_id: user.to_string(),
            timestamp,
            lat,
            lon,
        });
    }
    for points in users.values_mut() {
        normalize_points(points);
    }
    Ok(users)
}
