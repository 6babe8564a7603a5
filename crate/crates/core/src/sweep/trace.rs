use std::f64::consts::PI;

use serde::Serialize;

use super::arc::{ArcComparison, SteinerGraph, STEINER_POINTS};
use super::curve::{build_w, cap_with_cone};
use super::interval::{nonsep_interval, IntervalReport, DEFAULT_SAMPLES};
use super::level::{coarea_check, extract_level_with, CoareaCheck};
use super::{Axis, SweepError};
use crate::homology::HomologyBasis;
use crate::mesh::EmbeddedMesh;
use crate::systole::{shortest_nonseparating, shortest_with_basis, SystoleOptions};

/// Length tolerance in units of the mean edge length.
pub const TOL_EDGES: f64 = 5.0;
/// Candidate offsets `j·ℓ/800`, `j = 1..=8`, when moving interval endpoints out.
const ADJUST_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProofCase {
    /// A non-separating level band of width at least `ℓ/10`.
    A,
    /// Levels whose arc beats the shortest path by `ℓ/10` have measure at
    /// least `ℓ/100`.
    B,
    /// The separating curve construction.
    C,
    /// No case could be certified on this mesh.
    Inconclusive,
}

impl ProofCase {
    pub fn label(self) -> &'static str {
        match self {
            ProofCase::A => "A",
            ProofCase::B => "B",
            ProofCase::C => "C",
            ProofCase::Inconclusive => "inconclusive",
        }
    }

    /// Coefficient `k` of the certified bound `k·ℓ²`.
    fn coefficient(self) -> f64 {
        match self {
            ProofCase::A => 0.1,
            ProofCase::B => 0.001,
            ProofCase::C => 0.01,
            ProofCase::Inconclusive => 0.0,
        }
    }
}

/// The area tolerance and certified bound for a case; linear propagation of
/// the length tolerance through `k·ℓ²`.
pub fn case_bound(case: ProofCase, ell: f64, tol_len: f64) -> (f64, f64) {
    let k = case.coefficient();
    let tol_area = 2.0 * k * ell * tol_len;
    (tol_area, k * ell * ell - tol_area)
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    pub samples: usize,
    /// Also run the separating-curve construction when case A or B fires.
    pub force_construction: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, force_construction: false }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Construction {
    pub w_length: Option<f64>,
    pub w_separates: Option<bool>,
    pub w_simple: Option<bool>,
    pub area_t1: Option<f64>,
    pub area_t2: Option<f64>,
    pub ell1: Option<f64>,
    pub cap_area: Option<f64>,
    pub cap_bound: Option<f64>,
    pub capped_genus: Option<usize>,
    /// Every endpoint keeps its arc within `ℓ/10` of the shortest path.
    pub admissible_endpoints: Option<bool>,
    /// `ℓ₁² / area(T′)`.
    pub loewner_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProofCertificate {
    pub case: ProofCase,
    pub ell: f64,
    pub area: f64,
    pub delta: f64,
    /// `area − π + δ`.
    pub defect: f64,
    pub mean_edge: f64,
    pub tol: f64,
    pub tol_area: f64,
    pub samples: usize,
    pub a1: Option<f64>,
    pub b1: Option<f64>,
    pub c1: Option<f64>,
    pub d1: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    /// Widest non-separating band per axis.
    pub band_x: f64,
    pub band_y: f64,
    pub nonsep_measure_x: f64,
    pub nonsep_measure_y: f64,
    pub intervals_x: usize,
    pub intervals_y: usize,
    pub coarea_lhs: f64,
    pub coarea_rhs_x: f64,
    pub coarea_rhs_y: f64,
    pub arc_integral_x: f64,
    pub arc_integral_y: f64,
    pub gap_measure_x: Option<f64>,
    pub gap_measure_y: Option<f64>,
    #[serde(flatten)]
    pub construction: Construction,
    pub bound: f64,
    /// `defect ≥ bound`.
    pub bound_holds: bool,
    pub diagnostics: Vec<String>,
}

impl ProofCertificate {
    /// Re-derive the case hypothesis and bound from the stored numbers.
    pub fn recheck(&self) -> Result<f64, String> {
        let ell = self.ell;
        let tol = self.tol;
        let (tol_area, bound) = case_bound(self.case, ell, tol);
        match self.case {
            ProofCase::A => {
                if self.band_x.max(self.band_y) < ell / 10.0 {
                    return Err(format!("case A needs a band of width ℓ/10, widest is {}", self.band_x.max(self.band_y)));
                }
            }
            ProofCase::B => {
                let m = self.gap_measure_x.unwrap_or(0.0).max(self.gap_measure_y.unwrap_or(0.0));
                if m < ell / 100.0 {
                    return Err(format!("case B needs gap measure ℓ/100, got {m}"));
                }
            }
            ProofCase::C => {
                let c = &self.construction;
                if c.admissible_endpoints != Some(true) || c.w_separates != Some(true) || c.capped_genus != Some(1) {
                    return Err("case C needs admissible endpoints, a separating w and a genus-1 cap".into());
                }
                let (Some(w), Some(t1), Some(t2), Some(l1)) = (c.w_length, c.area_t1, c.area_t2, c.ell1) else {
                    return Err("case C without construction data".into());
                };
                if w >= 0.9 * ell + tol {
                    return Err(format!("length(w) = {w} is not below 0.9ℓ + tol"));
                }
                if t1 < PI - 0.81 * ell * ell / (4.0 * PI) - tol_area {
                    return Err(format!("area(T1) = {t1} violates the isoperimetric estimate"));
                }
                if ell > 2.0 * l1 + tol {
                    return Err(format!("ℓ = {ell} exceeds 2ℓ₁ + tol"));
                }
                if t2 <= ell * ell / 8.0 - tol_area {
                    return Err(format!("area(T2) = {t2} not above ℓ²/8 − tol"));
                }
            }
            ProofCase::Inconclusive => {}
        }
        if tol_area != self.tol_area || bound != self.bound {
            return Err(format!("stored bound {} differs from recomputed {bound}", self.bound));
        }
        if (self.defect >= self.bound) != self.bound_holds {
            return Err("bound_holds flag inconsistent with defect".into());
        }
        Ok(bound)
    }
}

fn gap_measure(mesh: &EmbeddedMesh, graph: &SteinerGraph, axis: Axis, ell: f64, samples: usize) -> Result<f64, SweepError> {
    use rayon::prelude::*;
    let width = 2.0 / samples as f64;
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = -1.0 + (i as f64 + 0.5) * width;
            let s = extract_level_with(mesh, None, axis, t)?;
            Ok(s.main_arc().is_some_and(|arc| graph.compare(s.level, arc, Some(ell / 10.0)).gap >= ell / 10.0))
        })
        .collect::<Result<Vec<bool>, SweepError>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 * width)
}

/// First level `endpoint + dir·j·ℓ/800` whose arc is within `ℓ/10` of the
/// shortest path.
pub fn adjust_endpoint(mesh: &EmbeddedMesh, graph: &SteinerGraph, axis: Axis, endpoint: f64, dir: f64, ell: f64) -> Result<Option<(f64, ArcComparison)>, SweepError> {
    for j in 1..=ADJUST_STEPS {
        let z = endpoint + dir * j as f64 * ell / (100.0 * ADJUST_STEPS as f64);
        let s = extract_level_with(mesh, None, axis, z)?;
        if let Some(arc) = s.main_arc() {
            let cmp = graph.compare(s.level, arc, Some(ell / 10.0));
            if cmp.gap <= ell / 10.0 {
                return Ok(Some((s.level, cmp)));
            }
        }
    }
    Ok(None)
}

struct Sweeps {
    x: IntervalReport,
    y: IntervalReport,
    coarea_x: CoareaCheck,
    coarea_y: CoareaCheck,
}

/// Replay the length-area argument on a genus-1 surface bounded by the unit
/// circle.
pub fn trace_proof(mesh: &EmbeddedMesh, basis: &HomologyBasis) -> Result<ProofCertificate, SweepError> {
    trace_proof_with(mesh, basis, &TraceOptions::default())
}

pub fn trace_proof_with(mesh: &EmbeddedMesh, basis: &HomologyBasis, opts: &TraceOptions) -> Result<ProofCertificate, SweepError> {
    let info = mesh.info();
    if info.genus != 1 || info.boundary_count != 1 || !info.unit_circle_boundary {
        return Err(SweepError::Precondition(format!(
            "need g = 1, b = 1 and the unit circle as boundary, got g = {}, b = {}, circle = {}",
            info.genus, info.boundary_count, info.unit_circle_boundary
        )));
    }
    let ell = shortest_with_basis(mesh, basis, &SystoleOptions::default())?.length;
    let delta = info.inscription_deficit.unwrap_or(0.0);
    let area = info.total_area;
    let mean_edge = mesh.mean_edge_length();
    let tol = TOL_EDGES * mean_edge;
    let sw = Sweeps {
        x: nonsep_interval(mesh, basis, Axis::X, opts.samples)?,
        y: nonsep_interval(mesh, basis, Axis::Y, opts.samples)?,
        coarea_x: coarea_check(mesh, Axis::X),
        coarea_y: coarea_check(mesh, Axis::Y),
    };
    let wx = sw.x.widest();
    let wy = sw.y.widest();
    let band = |w: Option<(f64, f64)>| w.map_or(0.0, |(a, b)| b - a);
    let mut diagnostics = Vec::new();
    for r in [&sw.x, &sw.y] {
        if !r.morse_consistent {
            diagnostics.push(format!("{} sweep: {} non-separating runs exceed 2g", r.axis.name(), r.intervals.len()));
        }
    }

    let mut case = ProofCase::Inconclusive;
    let (mut gap_x, mut gap_y) = (None, None);
    let graph = SteinerGraph::new(mesh, STEINER_POINTS);
    if band(wx).max(band(wy)) >= ell / 10.0 {
        case = ProofCase::A;
    } else {
        let gx = gap_measure(mesh, &graph, Axis::X, ell, opts.samples)?;
        let gy = gap_measure(mesh, &graph, Axis::Y, ell, opts.samples)?;
        (gap_x, gap_y) = (Some(gx), Some(gy));
        if gx.max(gy) >= ell / 100.0 {
            case = ProofCase::B;
        }
    }

    let mut construction = Construction::default();
    let mut corners = (None, None, None, None);
    if case == ProofCase::Inconclusive || opts.force_construction {
        match construct(mesh, &graph, wx, wy, ell, tol, &mut construction, &mut diagnostics) {
            Ok(Some((a, b, c, d))) => {
                corners = (Some(a), Some(b), Some(c), Some(d));
                if case == ProofCase::Inconclusive && construction_holds(&construction, ell, tol) {
                    case = ProofCase::C;
                }
            }
            Ok(None) => {}
            Err(e) => diagnostics.push(format!("construction failed: {e}")),
        }
        if case == ProofCase::Inconclusive {
            diagnostics.push("no case certified".into());
        }
    }

    let (tol_area, bound) = case_bound(case, ell, tol);
    let defect = area - PI + delta;
    Ok(ProofCertificate {
        case,
        ell,
        area,
        delta,
        defect,
        mean_edge,
        tol,
        tol_area,
        samples: opts.samples,
        a1: wx.map(|w| w.0),
        b1: wx.map(|w| w.1),
        c1: wy.map(|w| w.0),
        d1: wy.map(|w| w.1),
        a: corners.0,
        b: corners.1,
        c: corners.2,
        d: corners.3,
        band_x: band(wx),
        band_y: band(wy),
        nonsep_measure_x: sw.x.measure,
        nonsep_measure_y: sw.y.measure,
        intervals_x: sw.x.intervals.len(),
        intervals_y: sw.y.intervals.len(),
        coarea_lhs: sw.coarea_x.area_lhs,
        coarea_rhs_x: sw.coarea_x.integral_rhs,
        coarea_rhs_y: sw.coarea_y.integral_rhs,
        arc_integral_x: sw.x.arc_integral,
        arc_integral_y: sw.y.arc_integral,
        gap_measure_x: gap_x,
        gap_measure_y: gap_y,
        construction,
        bound,
        bound_holds: defect >= bound,
        diagnostics,
    })
}

fn construction_holds(c: &Construction, ell: f64, tol: f64) -> bool {
    let tol_area = case_bound(ProofCase::C, ell, tol).0;
    match (c.w_separates, c.w_length, c.area_t1, c.area_t2, c.ell1, c.capped_genus) {
        (Some(true), Some(w), Some(t1), Some(t2), Some(l1), Some(1)) if c.admissible_endpoints == Some(true) => {
            w < 0.9 * ell + tol
                && t1 >= PI - 0.81 * ell * ell / (4.0 * PI) - tol_area
                && ell <= 2.0 * l1 + tol
                && t2 > ell * ell / 8.0 - tol_area
        }
        _ => false,
    }
}

/// Adjust the band endpoints, build `w`, cap `T₂` and measure `ℓ₁`.
#[allow(clippy::too_many_arguments)]
fn construct(
    mesh: &EmbeddedMesh,
    graph: &SteinerGraph,
    wx: Option<(f64, f64)>,
    wy: Option<(f64, f64)>,
    ell: f64,
    tol: f64,
    out: &mut Construction,
    diagnostics: &mut Vec<String>,
) -> Result<Option<(f64, f64, f64, f64)>, SweepError> {
    let (Some((a1, b1)), Some((c1, d1))) = (wx, wy) else {
        diagnostics.push("construction needs a non-separating band on both axes".into());
        return Ok(None);
    };
    // Without an admissible level the nearest offset is used and the
    // construction cannot certify case C.
    let mut admissible = true;
    let mut pick = |axis: Axis, z: f64, dir: f64, name: &str| -> Result<f64, SweepError> {
        match adjust_endpoint(mesh, graph, axis, z, dir, ell)? {
            Some((level, _)) => Ok(level),
            None => {
                diagnostics.push(format!("no admissible {name} within ℓ/100 of the band"));
                admissible = false;
                Ok(z + dir * ell / (100.0 * ADJUST_STEPS as f64))
            }
        }
    };
    let a = pick(Axis::X, a1, -1.0, "a")?;
    let b = pick(Axis::X, b1, 1.0, "b")?;
    let c = pick(Axis::Y, c1, -1.0, "c")?;
    let d = pick(Axis::Y, d1, 1.0, "d")?;
    out.admissible_endpoints = Some(admissible);
    let w = build_w(mesh, a, b, c, d)?;
    out.w_length = Some(w.length);
    out.w_separates = Some(w.separates);
    out.w_simple = Some(w.simple);
    out.area_t1 = Some(w.area_t1);
    out.area_t2 = Some(w.area_t2);
    if !w.separates {
        diagnostics.push(format!("w does not separate ({} components)", w.components));
        return Ok(Some((w.a, w.b, w.c, w.d)));
    }
    if w.length >= 0.9 * ell + tol {
        diagnostics.push(format!("length(w) = {:.6} exceeds 0.9ℓ + tol = {:.6}", w.length, 0.9 * ell + tol));
    }
    let capped = cap_with_cone(&w.t2()?)?;
    out.cap_area = Some(capped.cap_area);
    out.cap_bound = Some(capped.cap_bound);
    out.capped_genus = Some(capped.genus);
    if capped.genus != 1 {
        diagnostics.push(format!("capped T2 has genus {}", capped.genus));
        return Ok(Some((w.a, w.b, w.c, w.d)));
    }
    let l1 = shortest_nonseparating(&capped.mesh)?.length;
    out.ell1 = Some(l1);
    out.loewner_ratio = Some(l1 * l1 / capped.mesh.area());
    Ok(Some((w.a, w.b, w.c, w.d)))
}
