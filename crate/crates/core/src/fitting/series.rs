use serde::{Deserialize, Serialize};

use super::PathLossSample;
use crate::model::{extract_ple, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlePoint {
    pub distance_m: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PleSeries {
    pub points: Vec<PlePoint>,
    /// Samples at or inside the reference distance.
    pub rejected: usize,
}

/// Per-sample exponent `(PL - A) / (10 log10(d / d0))`, in input order.
pub fn extract_ple_series(samples: &[PathLossSample], intercept_db: f64) -> PleSeries {
    let mut series = PleSeries { points: Vec::with_capacity(samples.len()), rejected: 0 };
    for s in samples {
        match extract_ple(s.path_loss_db, intercept_db, s.distance_m) {
            Ok(gamma) => series.points.push(PlePoint { distance_m: s.distance_m, gamma }),
            Err(
                ModelError::SingularDistance
                | ModelError::BelowReferenceDistance(_)
                | ModelError::NonPositiveDistance(_),
            ) => series.rejected += 1,
            Err(e) => unreachable!("extract_ple only fails on distance: {e}"),
        }
    }
    series
}

/// Splits at `breakpoint_m`; points exactly at the breakpoint go to the far band.
pub fn split_by_breakpoint(points: &[PlePoint], breakpoint_m: f64) -> (Vec<PlePoint>, Vec<PlePoint>) {
    points.iter().copied().partition(|p| p.distance_m < breakpoint_m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: f64, pl: f64) -> PathLossSample {
        PathLossSample { distance_m: d, path_loss_db: pl, band_mhz: 2600.0, source_tool: "t".into(), timestamp_s: 0.0 }
    }

    #[test]
    fn single_point() {
        let s = extract_ple_series(&[sample(100.0, 91.4)], 41.0);
        assert_eq!(s.rejected, 0);
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].distance_m, 100.0);
        assert!((s.points[0].gamma - 2.52).abs() < 1e-12);
    }

    #[test]
    fn reference_distance_samples_are_rejected() {
        let samples = vec![sample(1.0, 50.0); 7];
        let s = extract_ple_series(&samples, 41.0);
        assert!(s.points.is_empty());
        assert_eq!(s.rejected, 7);
        let inside = extract_ple_series(&[sample(0.4, 30.0), sample(20.0, 80.0)], 41.0);
        assert_eq!(inside.rejected, 1);
        assert_eq!(inside.points.len(), 1);
    }

    #[test]
    fn split_boundary_convention() {
        let pts: Vec<_> = [59.9, 60.0, 60.1].iter().map(|&d| PlePoint { distance_m: d, gamma: 2.0 }).collect();
        let (near, far) = split_by_breakpoint(&pts, 60.0);
        assert_eq!(near.iter().map(|p| p.distance_m).collect::<Vec<_>>(), vec![59.9]);
        assert_eq!(far.iter().map(|p| p.distance_m).collect::<Vec<_>>(), vec![60.0, 60.1]);

        let (near, far) = split_by_breakpoint(&[], 60.0);
        assert!(near.is_empty() && far.is_empty());

        let all_near: Vec<_> = (1..10).map(|i| PlePoint { distance_m: i as f64, gamma: 2.0 }).collect();
        let (near, far) = split_by_breakpoint(&all_near, 60.0);
        assert_eq!(near.len(), 9);
        assert!(far.is_empty());
    }
}
