//! Calendar bins used by the time-discretized models.

use chrono::{DateTime, Datelike, Timelike};
use serde::{Deserialize, Serialize};

use crate::Timestamp;

/// A cyclic calendar discretization of absolute time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretizer {
    /// Single bin; every timestamp maps to 0.
    Global,
    /// 24 bins, UTC hour of day.
    HourOfDay,
    /// 7 bins, Monday = 0.
    DayOfWeek,
    /// 12 bins, January = 0.
    Month,
}

impl Discretizer {
    pub const ALL: [Discretizer; 4] = [
        Discretizer::Global,
        Discretizer::HourOfDay,
        Discretizer::DayOfWeek,
        Discretizer::Month,
    ];

    pub fn bins(self) -> u32 {
        match self {
            Discretizer::Global => 1,
            Discretizer::HourOfDay => 24,
            Discretizer::DayOfWeek => 7,
            Discretizer::Month => 12,
        }
    }

    pub fn bin(self, t: Timestamp) -> u32 {
        if self == Discretizer::Global {
            return 0;
        }
        let dt = DateTime::from_timestamp(t, 0).expect("timestamp within chrono range");
        match self {
            Discretizer::Global => 0,
            Discretizer::HourOfDay => dt.hour(),
            Discretizer::DayOfWeek => dt.weekday().num_days_from_monday(),
            Discretizer::Month => dt.month0(),
        }
    }

    /// Cyclic distance between two bins.
    pub fn distance(self, a: u32, b: u32) -> u32 {
        let n = self.bins();
        let d = a.abs_diff(b) % n;
        d.min(n - d)
    }

    pub fn name(self) -> &'static str {
        match self {
            Discretizer::Global => "global",
            Discretizer::HourOfDay => "hour_of_day",
            Discretizer::DayOfWeek => "day_of_week",
            Discretizer::Month => "month",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{NaiveDate, TimeZone, Utc};

    fn ts(y: i32, m: u32, d: u32, h: u32) -> Timestamp {
        Utc.from_utc_datetime(&NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(h, 0, 0).unwrap())
            .timestamp()
    }

    #[test]
    fn tuesday_afternoon_bins() {
        // 2008-10-28 was a Tuesday.
        let t = ts(2008, 10, 28, 14);
        assert_eq!(Discretizer::HourOfDay.bin(t), 14);
        assert_eq!(Discretizer::DayOfWeek.bin(t), 1);
        assert_eq!(Discretizer::Month.bin(t), 9);
        assert_eq!(Discretizer::Global.bin(t), 0);
    }

    #[test]
    fn cyclic_distance() {
        assert_eq!(Discretizer::DayOfWeek.distance(2, 6), 3);
        assert_eq!(Discretizer::DayOfWeek.distance(6, 0), 1);
        assert_eq!(Discretizer::HourOfDay.distance(23, 1), 2);
        assert_eq!(Discretizer::Month.distance(0, 6), 6);
        assert_eq!(Discretizer::Month.distance(5, 5), 0);
    }
}
