//! Inequality verification and batch runs over instance families.
//!
//! A report compares `ℓ²` against `M · (area − π + δ)`, where `δ` is the
//! inscription deficit of the polygonal boundary.

mod family;

pub use family::{exit_code, read_grid, run_family, FamilyRow, FamilyRun, FamilySummary, CSV_COLUMNS};

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::generators::{FamilySpec, GeneratorError};
use crate::homology::{build_basis, HomologyError};
use crate::mesh::{EmbeddedMesh, MeshError};
use crate::sweep::{nonsep_interval, Axis, SweepError, DEFAULT_SAMPLES};
use crate::systole::{shortest_with_basis, SystoleError, SystoleOptions};

/// Constant used by the CLI when none is given.
pub const DEFAULT_CONSTANT: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("anomalous: {0}")]
    Anomalous(String),
    #[error("bad grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Systole(#[from] SystoleError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Non-separating intervals of both coordinate sweeps.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalCensus {
    pub x: Vec<(f64, f64)>,
    pub y: Vec<(f64, f64)>,
    pub measure_x: f64,
    pub measure_y: f64,
    /// Both axis measures are at most `ℓ/10`.
    pub within_tenth: bool,
    pub morse_consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub instance: String,
    pub spec: Option<FamilySpec>,
    pub genus: usize,
    pub area: f64,
    pub boundary_len: f64,
    pub delta: f64,
    pub ell: f64,
    /// `area − π + δ`.
    pub defect: f64,
    pub ratio: f64,
    pub constant: f64,
    pub pass: bool,
    pub refine: u32,
    /// False when the systole came from sampled sources.
    pub exact: bool,
    pub seconds: Option<f64>,
    pub census: Option<IntervalCensus>,
}

impl InequalityReport {
    /// `ratio · defect` reproduces `ℓ²`.
    pub fn consistent(&self) -> bool {
        (self.ratio * self.defect - self.ell * self.ell).abs() <= 1e-9 * self.ell.powi(2).max(1.0)
    }
}

fn check_disk_like(mesh: &EmbeddedMesh) -> Result<(), HarnessError> {
    let info = mesh.info();
    if info.boundary_count != 1 {
        return Err(HarnessError::Hypothesis(format!("need one boundary component, found {}", info.boundary_count)));
    }
    if !info.unit_circle_boundary {
        return Err(HarnessError::Hypothesis("boundary is not inscribed in the unit circle".into()));
    }
    Ok(())
}

fn assemble(mesh: &EmbeddedMesh, instance: &str, spec: Option<&FamilySpec>, constant: f64, census_wanted: bool) -> Result<InequalityReport, HarnessError> {
    let start = Instant::now();
    let info = mesh.info();
    let basis = build_basis(mesh)?;
    let sys = shortest_with_basis(mesh, &basis, &SystoleOptions::default())?;
    let boundary_len = info.boundary_lengths[0];
    let delta = info.inscription_deficit.unwrap_or(0.0);
    let defect = info.total_area - PI + delta;
    if defect <= 0.0 {
        return Err(HarnessError::Anomalous(format!("defect {defect} is not positive on a genus {} surface", info.genus)));
    }
    let ell = sys.length;
    let ratio = ell * ell / defect;
    if !ratio.is_finite() {
        return Err(HarnessError::Anomalous(format!("ratio {ratio} is not finite")));
    }
    let census = if census_wanted {
        let x = nonsep_interval(mesh, &basis, Axis::X, DEFAULT_SAMPLES)?;
        let y = nonsep_interval(mesh, &basis, Axis::Y, DEFAULT_SAMPLES)?;
        Some(IntervalCensus {
            within_tenth: x.measure <= ell / 10.0 && y.measure <= ell / 10.0,
            morse_consistent: x.morse_consistent && y.morse_consistent,
            measure_x: x.measure,
            measure_y: y.measure,
            x: x.intervals,
            y: y.intervals,
        })
    } else {
        None
    };
    Ok(InequalityReport {
        instance: instance.to_string(),
        spec: spec.cloned(),
        genus: info.genus,
        area: info.total_area,
        boundary_len,
        delta,
        ell,
        defect,
        ratio,
        constant,
        pass: ratio <= constant,
        refine: spec.map_or(0, FamilySpec::refine),
        exact: sys.exact,
        seconds: Some(start.elapsed().as_secs_f64()),
        census,
    })
}

/// Check `ℓ² ≤ M · (area − π + δ)` on a torus with one boundary circle.
pub fn verify_inequality(mesh: &EmbeddedMesh, constant: f64) -> Result<InequalityReport, HarnessError> {
    verify_instance(mesh, "mesh", None, constant)
}

pub fn verify_instance(mesh: &EmbeddedMesh, instance: &str, spec: Option<&FamilySpec>, constant: f64) -> Result<InequalityReport, HarnessError> {
    check_disk_like(mesh)?;
    if mesh.genus() < 1 {
        return Err(HarnessError::Hypothesis("genus 0 surface has no non-separating curve".into()));
    }
    assemble(mesh, instance, spec, constant, false)
}

/// Same check for genus at least two, with the interval census attached.
pub fn genus_report(mesh: &EmbeddedMesh, constant: f64) -> Result<InequalityReport, HarnessError> {
    genus_instance(mesh, "mesh", None, constant)
}

pub fn genus_instance(mesh: &EmbeddedMesh, instance: &str, spec: Option<&FamilySpec>, constant: f64) -> Result<InequalityReport, HarnessError> {
    check_disk_like(mesh)?;
    if mesh.genus() < 2 {
        return Err(HarnessError::Hypothesis(format!("genus {} surface; use verify_inequality", mesh.genus())));
    }
    assemble(mesh, instance, spec, constant, true)
}

/// Recover the `familyspec:` comment written by `gen`.
pub fn read_familyspec(text: &str) -> Option<FamilySpec> {
    text.lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .filter_map(|l| l.trim_start().strip_prefix("familyspec:"))
        .find_map(|j| serde_json::from_str(j.trim()).ok())
}
