//! Evenly spaced grid of fog nodes and the mapping from GPS fixes to visits.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Session;
use crate::Timestamp;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Row-major node index, `row * cols + col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Bounds {
    /// Beijing urban area.
    pub const BEIJING: Bounds = Bounds {
        lat_min: 39.75,
        lat_max: 40.05,
        lon_min: 116.15,
        lon_max: 116.65,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridNetwork {
    rows: u32,
    cols: u32,
    bounds: Bounds,
    /// Seconds needed to copy a user's data set to a node.
    transfer_time: i64,
    /// Extra lead time added in front of a predicted replication.
    buffer: i64,
    #[serde(skip)]
    centers: Vec<(f64, f64)>,
}

impl GridNetwork {
    pub fn new(rows: u32, cols: u32, bounds: Bounds, transfer_time: i64, buffer: i64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGrid(format!("{rows}x{cols} grid has no nodes")));
        }
        if !(bounds.lat_min < bounds.lat_max) || !(bounds.lon_min < bounds.lon_max) {
            return Err(Error::InvalidGrid(format!("degenerate bounds {bounds:?}")));
        }
        if transfer_time < 0 || buffer < 0 {
            return Err(Error::InvalidGrid("transfer time and buffer must be non-negative".into()));
        }
        let mut grid = GridNetwork {
            rows,
            cols,
            bounds,
            transfer_time,
            buffer,
            centers: Vec::new(),
        };
        grid.centers = grid.node_centers().into_iter().map(|(_, lat, lon)| (lat, lon)).collect();
        Ok(grid)
    }

    /// 8x8 grid over Beijing, 300 s transfer, no buffer.
    pub fn beijing_default() -> Self {
        Self::new(8, 8, Bounds::BEIJING, 300, 0).expect("valid default grid")
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn transfer_time(&self) -> i64 {
        self.transfer_time
    }

    pub fn buffer(&self) -> i64 {
        self.buffer
    }

    pub fn node_count(&self) -> u32 {
        self.rows * self.cols
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    pub fn node_id(&self, row: u32, col: u32) -> NodeId {
        NodeId(row * self.cols + col)
    }

    /// Cell centers in row-major order.
    pub fn node_centers(&self) -> Vec<(NodeId, f64, f64)> {
        let b = self.bounds;
        let dlat = (b.lat_max - b.lat_min) / self.rows as f64;
        let dlon = (b.lon_max - b.lon_min) / self.cols as f64;
        let mut out = Vec::with_capacity(self.node_count() as usize);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push((
                    self.node_id(r, c),
                    b.lat_min + (r as f64 + 0.5) * dlat,
                    b.lon_min + (c as f64 + 0.5) * dlon,
                ));
            }
        }
        out
    }

    pub fn clamp(&self, lat: f64, lon: f64) -> (f64, f64) {
        let b = self.bounds;
        (lat.clamp(b.lat_min, b.lat_max), lon.clamp(b.lon_min, b.lon_max))
    }

    /// Node with the nearest center by great-circle distance; ties go to the
    /// lower id. Points outside the bounds are clamped first.
    pub fn closest_node(&self, lat: f64, lon: f64) -> NodeId {
        let (lat, lon) = self.clamp(lat, lon);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, &(clat, clon)) in self.centers.iter().enumerate() {
            let d = haversine_m(lat, lon, clat, clon);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        NodeId(best as u32)
    }

    /// Segments a session into maximal same-node runs.
    ///
    /// A run arrives at its first fix and departs at the first fix of the
    /// following run; the final run departs at its own last fix.
    pub fn visits_from_session(&self, session: &Session, session_index: usize) -> Vec<NodeVisit> {
        let mut visits: Vec<NodeVisit> = Vec::new();
        let mut last_fix = session.start;
        for p in &session.points {
            let node = self.closest_node(p.lat, p.lon);
            match visits.last_mut() {
                Some(v) if v.node == node => {}
                Some(v) => {
                    v.departure = p.timestamp;
                    visits.push(NodeVisit::open(&session.user_id, node, p.timestamp, session_index));
                }
                None => visits.push(NodeVisit::open(&session.user_id, node, p.timestamp, session_index)),
            }
            last_fix = p.timestamp;
        }
        if let Some(v) = visits.last_mut() {
            v.departure = last_fix;
        }
        visits
    }

    /// Visits for every session of one user, in time order.
    pub fn visits_for_user(&self, sessions: &[Session]) -> Vec<NodeVisit> {
        sessions
            .iter()
            .enumerate()
            .flat_map(|(i, s)| self.visits_from_session(s, i))
            .collect()
    }
}

/// Great-circle distance in metres.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

/// A maximal stay of one user at one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeVisit {
    pub user_id: String,
    pub node: NodeId,
    pub arrival: Timestamp,
    pub departure: Timestamp,
    pub session_index: usize,
}

impl NodeVisit {
    fn open(user: &str, node: NodeId, t: Timestamp, session_index: usize) -> Self {
        NodeVisit {
            user_id: user.to_string(),
            node,
            arrival: t,
            departure: t,
            session_index,
        }
    }

    pub fn duration(&self) -> i64 {
        self.departure - self.arrival
    }
}

/// `user<TAB>node<TAB>arrival<TAB>departure`, one visit per line.
pub fn write_visits<W: Write>(mut w: W, visits: &[NodeVisit]) -> std::io::Result<()> {
    for v in visits {
        writeln!(w, "{}\t{}\t{}\t{}", v.user_id, v.node, v.arrival, v.departure)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::TrackPoint;

    fn unit(rows: u32, cols: u32) -> GridNetwork {
        let b = Bounds {
            lat_min: 0.0,
            lat_max: 1.0,
            lon_min: 0.0,
            lon_max: 1.0,
        };
        GridNetwork::new(rows, cols, b, 300, 0).unwrap()
    }

    #[test]
    fn centers() {
        assert_eq!(unit(1, 1).node_centers(), vec![(NodeId(0), 0.5, 0.5)]);
        let c: Vec<(f64, f64)> = unit(2, 2).node_centers().iter().map(|&(_, a, b)| (a, b)).collect();
        assert_eq!(c, vec![(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]);
        assert_eq!(unit(2, 3).node_id(1, 2), NodeId(5));
    }

    #[test]
    fn invalid_grids_rejected() {
        let b = Bounds::BEIJING;
        assert!(GridNetwork::new(0, 3, b, 300, 0).is_err());
        let flipped = Bounds { lat_min: 1.0, lat_max: 0.0, ..b };
        assert!(GridNetwork::new(2, 2, flipped, 300, 0).is_err());
        assert!(GridNetwork::new(2, 2, b, -1, 0).is_err());
    }

    #[test]
    fn closest_at_center_and_tie() {
        let g = unit(2, 2);
        for (id, lat, lon) in g.node_centers() {
            assert_eq!(g.closest_node(lat, lon), id);
        }
        // equidistant from node 0 (0.25,0.25) and node 1 (0.25,0.75)
        assert_eq!(g.closest_node(0.25, 0.5), NodeId(0));
    }

    #[test]
    fn clamped_point() {
        let g = unit(4, 4);
        assert_eq!(g.closest_node(5.0, -3.0), g.closest_node(1.0, 0.0));
    }

    fn session(nodes_at: &[(f64, f64, i64)]) -> Session {
        let points: Vec<TrackPoint> = nodes_at
            .iter()
            .map(|&(lat, lon, t)| TrackPoint {
                user_id: "u".into(),
                timestamp: t,
                lat,
                lon,
            })
            .collect();
        Session {
            user_id: "u".into(),
            start: points[0].timestamp,
            end: points.last().unwrap().timestamp,
            points,
        }
    }

    #[test]
    fn segmentation_aab() {
        let g = unit(1, 2);
        let s = session(&[(0.5, 0.25, 0), (0.5, 0.25, 60), (0.5, 0.75, 120)]);
        let v = g.visits_from_session(&s, 0);
        let got: Vec<_> = v.iter().map(|v| (v.node.0, v.arrival, v.departure)).collect();
        assert_eq!(got, vec![(0, 0, 120), (1, 120, 120)]);
    }

    #[test]
    fn segmentation_single_node() {
        let g = unit(1, 2);
        let s = session(&[(0.5, 0.25, 0), (0.5, 0.25, 60), (0.5, 0.25, 500)]);
        let v = g.visits_from_session(&s, 3);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].arrival, v[0].departure, v[0].session_index), (0, 500, 3));
    }

    #[test]
    fn segmentation_alternating() {
        let g = unit(1, 2);
        let s = session(&[(0.5, 0.25, 0), (0.5, 0.75, 60), (0.5, 0.25, 120), (0.5, 0.75, 180)]);
        let d: Vec<i64> = g.visits_from_session(&s, 0).iter().map(NodeVisit::duration).collect();
        assert_eq!(d, vec![60, 60, 60, 0]);
    }

    #[test]
    fn haversine_known_distance() {
        // one degree of latitude
        let d = haversine_m(0.0, 0.0, 1.0, 0.0);
        assert!((d - 111_195.0).abs() < 1.0, "{d}");
    }
}
