use rayon::prelude::*;
use serde::Serialize;

use super::level::extract_level_with;
use super::{Axis, SweepError};
use crate::homology::HomologyBasis;
use crate::mesh::EmbeddedMesh;

/// Default number of sample levels per axis.
pub const DEFAULT_SAMPLES: usize = 512;
/// Interval endpoints are bisected down to this width.
pub const ENDPOINT_TOLERANCE: f64 = 1e-4;

/// Summary of one sampled level.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub t: f64,
    pub arcs: usize,
    pub loops: usize,
    pub nonseparating: bool,
    pub arc_length: f64,
    pub total_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalReport {
    pub axis: Axis,
    pub samples: usize,
    pub range: (f64, f64),
    pub levels: Vec<LevelSummary>,
    /// Maximal intervals of levels carrying a non-separating loop.
    pub intervals: Vec<(f64, f64)>,
    pub measure: f64,
    /// Sampled indicator forms at most `2g` runs, ignoring single-sample gaps.
    pub morse_consistent: bool,
    /// Midpoint-rule estimate of `∫ length(α_t) dt` over the sampled range.
    pub arc_integral: f64,
}

impl IntervalReport {
    pub fn widest(&self) -> Option<(f64, f64)> {
        self.intervals.iter().copied().max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
    }
}

fn nonsep_at(mesh: &EmbeddedMesh, basis: &HomologyBasis, axis: Axis, t: f64) -> Result<bool, SweepError> {
    Ok(extract_level_with(mesh, Some(basis), axis, t)?.has_nonseparating_loop())
}

/// Move from a level without the property (`out`) towards one with it
/// (`inside`) until the bracket is narrower than the tolerance; returns the
/// endpoint on the `inside` side.
fn bisect(mesh: &EmbeddedMesh, basis: &HomologyBasis, axis: Axis, mut out: f64, mut inside: f64) -> Result<f64, SweepError> {
    while (inside - out).abs() > ENDPOINT_TOLERANCE {
        let mid = 0.5 * (out + inside);
        if nonsep_at(mesh, basis, axis, mid)? {
            inside = mid;
        } else {
            out = mid;
        }
    }
    Ok(inside)
}

/// Cell-centered samples over the coordinate range, then endpoint bisection.
pub fn nonsep_interval(mesh: &EmbeddedMesh, basis: &HomologyBasis, axis: Axis, samples: usize) -> Result<IntervalReport, SweepError> {
    let samples = samples.max(2);
    let (lo, hi) = mesh.coord_range(axis.index());
    let width = (hi - lo) / samples as f64;
    let levels: Vec<LevelSummary> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = lo + (i as f64 + 0.5) * width;
            let s = extract_level_with(mesh, Some(basis), axis, t)?;
            Ok(LevelSummary {
                t,
                arcs: s.arcs().count(),
                loops: s.loops().count(),
                nonseparating: s.has_nonseparating_loop(),
                arc_length: s.main_arc().map_or(0.0, |a| a.length),
                total_length: s.total_length(),
            })
        })
        .collect::<Result<_, SweepError>>()?;

    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, l) in levels.iter().enumerate() {
        if l.nonseparating {
            match runs.last_mut() {
                Some(r) if r.1 + 1 == i => r.1 = i,
                _ => runs.push((i, i)),
            }
        }
    }
    let mut intervals = Vec::with_capacity(runs.len());
    for &(i, j) in &runs {
        let a = if i == 0 { lo } else { bisect(mesh, basis, axis, levels[i - 1].t, levels[i].t)? };
        let b = if j + 1 == samples { hi } else { bisect(mesh, basis, axis, levels[j + 1].t, levels[j].t)? };
        intervals.push((a, b));
    }
    let measure = intervals.iter().map(|(a, b)| b - a).sum();
    let mut merged = 0;
    for (k, r) in runs.iter().enumerate() {
        if k == 0 || r.0 > runs[k - 1].1 + 2 {
            merged += 1;
        }
    }
    let morse_consistent = merged <= 2 * mesh.genus();
    let arc_integral = levels.iter().map(|l| l.arc_length).sum::<f64>() * width;
    Ok(IntervalReport { axis, samples, range: (lo, hi), levels, intervals, measure, morse_consistent, arc_integral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::homology::build_basis;

    #[test]
    fn disk_has_no_interval() {
        let m = generators::gen_unit_disk(1).unwrap();
        let r = nonsep_interval(&m, &build_basis(&m).unwrap(), Axis::X, 64).unwrap();
        assert!(r.intervals.is_empty());
        assert_eq!(r.measure, 0.0);
        assert!(r.morse_consistent);
    }

    #[test]
    fn handle_interval_between_legs() {
        let eps = 0.1;
        let m = generators::gen_handle_disk(eps, 2).unwrap();
        let b = build_basis(&m).unwrap();
        let r = nonsep_interval(&m, &b, Axis::X, 128).unwrap();
        assert_eq!(r.intervals.len(), 1);
        let (a, bb) = r.intervals[0];
        let inner = generators::HOLE_OFFSET - eps / 2.0;
        assert!((a + inner).abs() < 1e-3 && (bb - inner).abs() < 1e-3, "{a} {bb}");
        let ry = nonsep_interval(&m, &b, Axis::Y, 128).unwrap();
        assert_eq!(ry.intervals.len(), 1);
        assert!((ry.measure - eps).abs() < 1e-3, "{}", ry.measure);
    }
}
