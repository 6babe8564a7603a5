//! Coordinate sweeps replaying the length-area argument.
//!
//! Levels of the coordinate functions x₁, x₂ are cut out of the mesh as PL
//! curves, classified homologically, compared with shortest paths, and
//! assembled into the separating curve `w` of the construction case.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::{HomologyBasis, HomologyError};
use crate::mesh::{EmbeddedMesh, MeshError};
use crate::systole::SystoleError;

mod arc;
mod curve;
mod interval;
mod level;
mod trace;

pub use arc::{arc_vs_geodesic, ArcComparison, EdgePoint, SteinerGraph, STEINER_POINTS};
pub use curve::{build_w, cap_with_cone, CappedSurface, SeparatingCurve, CORNER_TOLERANCE, CUT_MARGIN};
pub use interval::{nonsep_interval, IntervalReport, LevelSummary, DEFAULT_SAMPLES, ENDPOINT_TOLERANCE};
pub use level::{
    coarea_check, extract_level, extract_level_with, face_gradient_norm, regular_level, CoareaCheck, ComponentKind, LevelComponent,
    LevelSlice, NUDGE,
};
pub use trace::{
    adjust_endpoint, case_bound, trace_proof, trace_proof_with, Construction, ProofCase, ProofCertificate, TraceOptions, TOL_EDGES,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("level {0} stays singular after nudging")]
    SingularLevel(f64),
    #[error("no arc at level {0}")]
    NoArc(f64),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("topology check failed: {0}")]
    Topology(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Systole(#[from] SystoleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" | "x1" => Ok(Axis::X),
            "y" | "x2" => Ok(Axis::Y),
            _ => Err(format!("unknown axis `{s}`, expected x or y")),
        }
    }
}

/// Arc comparisons reported by [`sweep`].
pub const ARC_TABLE_LEVELS: usize = 32;

/// One axis of the sweep: sampled levels, non-separating intervals, co-area
/// sides, an arc/shortest-path table and the moved-out interval endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub axis: Axis,
    pub ell: Option<f64>,
    #[serde(flatten)]
    pub intervals: IntervalReport,
    pub coarea: CoareaCheck,
    pub arcs: Vec<ArcComparison>,
    /// Widest band moved out by at most `ℓ/100` to levels with small arc gap.
    pub adjusted: Option<(Option<f64>, Option<f64>)>,
}

pub fn sweep(mesh: &EmbeddedMesh, basis: &HomologyBasis, axis: Axis, samples: usize) -> Result<SweepReport, SweepError> {
    use rayon::prelude::*;
    let intervals = nonsep_interval(mesh, basis, axis, samples)?;
    let coarea = coarea_check(mesh, axis);
    let graph = SteinerGraph::new(mesh, STEINER_POINTS);
    let (lo, hi) = intervals.range;
    let arcs: Vec<ArcComparison> = (0..ARC_TABLE_LEVELS)
        .into_par_iter()
        .map(|i| {
            let t = lo + (i as f64 + 0.5) * (hi - lo) / ARC_TABLE_LEVELS as f64;
            let s = extract_level_with(mesh, None, axis, t)?;
            Ok(s.main_arc().map(|a| graph.compare(s.level, a, None)))
        })
        .collect::<Result<Vec<_>, SweepError>>()?
        .into_iter()
        .flatten()
        .collect();
    let ell = if basis.rank() > 0 { Some(crate::systole::shortest_with_basis(mesh, basis, &Default::default())?.length) } else { None };
    let adjusted = match (ell, intervals.widest()) {
        (Some(l), Some((a1, b1))) => Some((
            adjust_endpoint(mesh, &graph, axis, a1, -1.0, l)?.map(|x| x.0),
            adjust_endpoint(mesh, &graph, axis, b1, 1.0, l)?.map(|x| x.0),
        )),
        _ => None,
    };
    Ok(SweepReport { axis, ell, intervals, coarea, arcs, adjusted })
}
