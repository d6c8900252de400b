//! Acquisition-time planner.
//!
//! Per-point acquisition times are tabulated measurements for two spectral
//! resolutions and are never interpolated or rescaled.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// ¹H detection with an XY8-N dynamical-decoupling sequence.
    Xy8,
    /// XY8-N with double-quantum readout.
    Dqc,
    /// Double-quantum readout plus enhanced photon collection.
    Enhanced,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Xy8, Method::Dqc, Method::Enhanced];
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "xy8" => Ok(Method::Xy8),
            "dqc" => Ok(Method::Dqc),
            "enhanced" => Ok(Method::Enhanced),
            other => Err(Error::UnknownMode {
                kind: "timing method",
                name: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Xy8 => "xy8",
            Method::Dqc => "dqc",
            Method::Enhanced => "enhanced",
        })
    }
}

/// Spectral resolutions (Hz) of the two tabulated columns.
pub const TABLE_COLUMNS_HZ: [f64; 2] = [1.3e3, 30e3];

/// Seconds per spectral point, indexed like [`TABLE_COLUMNS_HZ`].
pub fn per_point_seconds(method: Method) -> [f64; 2] {
    match method {
        Method::Xy8 => [586.0, 22.0],
        Method::Dqc => [37.0, 1.3],
        Method::Enhanced => [1.0, 0.036],
    }
}

/// Column whose resolution is nearest to `delta_f_hz` on a log scale.
pub fn nearest_column(delta_f_hz: f64) -> usize {
    let d = |c: f64| (delta_f_hz / c).ln().abs();
    if d(TABLE_COLUMNS_HZ[0]) <= d(TABLE_COLUMNS_HZ[1]) {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeEstimate {
    pub method: Method,
    pub n_projections: usize,
    pub points_per_projection: u64,
    pub column_hz: f64,
    pub seconds_per_point: f64,
    pub total_seconds: f64,
}

impl fmt::Display for TimeEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method = {}", self.method)?;
        writeln!(f, "n_projections = {}", self.n_projections)?;
        writeln!(f, "points_per_projection = {}", self.points_per_projection)?;
        writeln!(f, "table_column_hz = {}", self.column_hz)?;
        writeln!(f, "seconds_per_point = {}", self.seconds_per_point)?;
        writeln!(f, "total_seconds = {}", self.total_seconds)?;
        writeln!(f, "total_minutes = {:.2}", self.total_seconds / 60.0)
    }
}

/// total = projections × ceil(spread / Δf) × seconds-per-point.
pub fn estimate_time(
    n_projections: usize,
    spread_hz: f64,
    delta_f_hz: f64,
    method: Method,
) -> Result<TimeEstimate> {
    if n_projections == 0 {
        return Err(Error::invalid("need at least one projection"));
    }
    if !(spread_hz > 0.0 && spread_hz.is_finite() && delta_f_hz > 0.0 && delta_f_hz.is_finite()) {
        return Err(Error::invalid("spread and delta_f must be positive"));
    }
    let points = (spread_hz / delta_f_hz).ceil() as u64;
    let column = nearest_column(delta_f_hz);
    let per_point = per_point_seconds(method)[column];
    Ok(TimeEstimate {
        method,
        n_projections,
        points_per_projection: points,
        column_hz: TABLE_COLUMNS_HZ[column],
        seconds_per_point: per_point,
        total_seconds: n_projections as f64 * points as f64 * per_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_plan() {
        let est = estimate_time(81, 30.6e3, 1.28e3, Method::Enhanced).unwrap();
        assert_eq!(est.points_per_projection, 24);
        assert_eq!(est.total_seconds, 1944.0);
        assert!((est.total_seconds / 1980.0 - 1.0).abs() < 0.1);
        let xy8 = estimate_time(81, 30.6e3, 1.28e3, Method::Xy8).unwrap();
        assert_eq!(xy8.total_seconds, 81.0 * 24.0 * 586.0);
        assert!(est.to_string().contains("total_seconds = 1944"));
    }

    #[test]
    fn narrow_spread_is_one_point() {
        let est = estimate_time(1, 500.0, 1.28e3, Method::Dqc).unwrap();
        assert_eq!(est.points_per_projection, 1);
        assert_eq!(est.total_seconds, 37.0);
    }

    #[test]
    fn column_choice() {
        assert_eq!(nearest_column(1.28e3), 0);
        assert_eq!(nearest_column(5e3), 0);
        assert_eq!(nearest_column(7e3), 1);
        assert_eq!(nearest_column(30e3), 1);
        assert_eq!(estimate_time(10, 3e5, 30e3, Method::Enhanced).unwrap().seconds_per_point, 0.036);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(estimate_time(0, 1e3, 1e3, Method::Xy8).is_err());
        assert!(estimate_time(1, 0.0, 1e3, Method::Xy8).is_err());
        assert!(estimate_time(1, 1e3, -1.0, Method::Xy8).is_err());
        assert!("fast".parse::<Method>().is_err());
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
            assert!(per_point_seconds(m).iter().all(|&s| s > 0.0));
        }
    }

    proptest! {
        #[test]
        fn linear_in_projections(n in 1usize..500, spread in 1.0f64..1e5, df in 100.0f64..1e5) {
            for m in Method::ALL {
                let one = estimate_time(1, spread, df, m).unwrap().total_seconds;
                let many = estimate_time(n, spread, df, m).unwrap().total_seconds;
                prop_assert!((many - n as f64 * one).abs() <= 1e-9 * many);
            }
        }

        #[test]
        fn nonincreasing_in_resolution(spread in 1.0f64..1e5, df in 100.0f64..1e5, factor in 1.0f64..10.0) {
            for m in Method::ALL {
                let fine = estimate_time(81, spread, df, m).unwrap().total_seconds;
                let coarse = estimate_time(81, spread, df * factor, m).unwrap().total_seconds;
                prop_assert!(coarse <= fine);
            }
        }
    }
}
