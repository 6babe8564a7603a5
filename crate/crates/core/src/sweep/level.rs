use serde::Serialize;

use super::{Axis, SweepError};
use crate::homology::{build_basis, transverse_class, Crossing, CycleSig, HomologyBasis};
use crate::mesh::{dist, EdgeId, EmbeddedMesh, FaceId};

/// Relative step used to move a level off a vertex value.
pub const NUDGE: f64 = 1e-7;
const MAX_NUDGES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Both ends on the boundary.
    Arc,
    Loop,
}

/// One connected piece of a PL level set.
///
/// `points[i]` lies on edge `crossings[i].edge`; `faces[i]` holds the segment
/// from `points[i]` to the next point (wrapping around for loops). For arcs
/// the first and last crossings are boundary edges.
#[derive(Debug, Clone, Serialize)]
pub struct LevelComponent {
    pub kind: ComponentKind,
    pub crossings: Vec<Crossing>,
    pub points: Vec<Vec<f64>>,
    pub faces: Vec<FaceId>,
    pub length: f64,
    /// Homology class (loops only, when a basis was supplied).
    pub class: Option<CycleSig>,
}

impl LevelComponent {
    pub fn is_nonseparating(&self) -> bool {
        self.class.is_some_and(|c| !c.is_zero())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSlice {
    pub axis: Axis,
    pub requested: f64,
    /// Level actually used after moving off vertex values.
    pub level: f64,
    pub components: Vec<LevelComponent>,
}

impl LevelSlice {
    pub fn arcs(&self) -> impl Iterator<Item = &LevelComponent> {
        self.components.iter().filter(|c| c.kind == ComponentKind::Arc)
    }

    pub fn loops(&self) -> impl Iterator<Item = &LevelComponent> {
        self.components.iter().filter(|c| c.kind == ComponentKind::Loop)
    }

    pub fn has_nonseparating_loop(&self) -> bool {
        self.loops().any(LevelComponent::is_nonseparating)
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(|c| c.length).sum()
    }

    /// The longest arc (the spanning arc when the boundary is the unit circle).
    pub fn main_arc(&self) -> Option<&LevelComponent> {
        self.arcs().max_by(|a, b| a.length.total_cmp(&b.length))
    }
}

/// Smallest `t' ≥ t` on the nudge ladder that no vertex hits exactly.
pub fn regular_level(mesh: &EmbeddedMesh, axis: Axis, t: f64) -> Result<f64, SweepError> {
    let k = axis.index();
    let (lo, hi) = mesh.coord_range(k);
    let step = NUDGE * (hi - lo).max(f64::MIN_POSITIVE);
    let mut level = t;
    for _ in 0..MAX_NUDGES {
        if (0..mesh.num_vertices()).all(|v| mesh.point(v)[k] != level) {
            return Ok(level);
        }
        level += step;
    }
    Err(SweepError::SingularLevel(t))
}

/// Level set of coordinate `axis` at `t`, loops classified with a fresh basis.
pub fn extract_level(mesh: &EmbeddedMesh, axis: Axis, t: f64) -> Result<LevelSlice, SweepError> {
    let basis = build_basis(mesh)?;
    extract_level_with(mesh, Some(&basis), axis, t)
}

pub fn extract_level_with(mesh: &EmbeddedMesh, basis: Option<&HomologyBasis>, axis: Axis, t: f64) -> Result<LevelSlice, SweepError> {
    let k = axis.index();
    let level = regular_level(mesh, axis, t)?;
    let f = |v: usize| mesh.point(v)[k] - level;

    let ne = mesh.num_edges();
    let mut crossing: Vec<Option<(Crossing, f64)>> = vec![None; ne];
    for (e, &[u, v]) in mesh.edges().iter().enumerate() {
        let (fu, fv) = (f(u), f(v));
        if (fu < 0.0) != (fv < 0.0) {
            let side = if fu < 0.0 { u } else { v };
            crossing[e] = Some((Crossing { edge: e, side }, fu / (fu - fv)));
        }
    }
    let point_on = |e: EdgeId, lambda: f64| -> Vec<f64> {
        let [u, v] = mesh.edge(e);
        let (a, b) = (mesh.point(u), mesh.point(v));
        let mut p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + lambda * (y - x)).collect();
        p[k] = level;
        p
    };
    // the other crossed edge of face `fc`
    let other = |fc: FaceId, e: EdgeId| -> Result<EdgeId, SweepError> {
        let fe = mesh.face_edges(fc);
        let crossed: Vec<EdgeId> = fe.into_iter().filter(|&x| crossing[x].is_some()).collect();
        if crossed.len() != 2 {
            return Err(SweepError::SingularLevel(t));
        }
        Ok(if crossed[0] == e { crossed[1] } else { crossed[0] })
    };

    let mut visited = vec![false; ne];
    let mut components = Vec::new();
    let starts: Vec<EdgeId> = (0..ne)
        .filter(|&e| crossing[e].is_some() && mesh.is_boundary_edge(e))
        .chain((0..ne).filter(|&e| crossing[e].is_some() && !mesh.is_boundary_edge(e)))
        .collect();
    for start in starts {
        if visited[start] {
            continue;
        }
        let is_arc = mesh.is_boundary_edge(start);
        let mut crossings = Vec::new();
        let mut points = Vec::new();
        let mut faces = Vec::new();
        let mut e = start;
        let mut came_from: Option<FaceId> = None;
        loop {
            visited[e] = true;
            let (c, lambda) = crossing[e].expect("crossed edge");
            crossings.push(c);
            points.push(point_on(e, lambda));
            let next_face = match (mesh.edge_faces(e), came_from) {
                ((f0, None), None) => Some(f0),
                ((_, None), Some(_)) => None,
                ((f0, Some(f1)), None) => Some(f0.min(f1)),
                ((f0, Some(f1)), Some(prev)) => Some(if f0 == prev { f1 } else { f0 }),
            };
            let Some(fc) = next_face else { break };
            let nxt = other(fc, e)?;
            if nxt == start {
                faces.push(fc);
                break;
            }
            faces.push(fc);
            came_from = Some(fc);
            e = nxt;
        }
        let n = points.len();
        let mut length: f64 = points.windows(2).map(|w| dist(&w[0], &w[1])).sum();
        let kind = if is_arc { ComponentKind::Arc } else { ComponentKind::Loop };
        if kind == ComponentKind::Loop && n > 1 {
            length += dist(&points[n - 1], &points[0]);
        }
        let class = match (kind, basis) {
            (ComponentKind::Loop, Some(b)) => Some(transverse_class(b, &crossings)?),
            _ => None,
        };
        components.push(LevelComponent { kind, crossings, points, faces, length, class });
    }
    Ok(LevelSlice { axis, requested: t, level, components })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoareaCheck {
    pub axis: Axis,
    pub area_lhs: f64,
    /// `Σ_faces |∇f| · area`, the exact integral of level-set length.
    pub integral_rhs: f64,
}

/// Gradient norm of coordinate `k` restricted to face `f`.
pub fn face_gradient_norm(mesh: &EmbeddedMesh, f: FaceId, k: usize) -> f64 {
    let [i, j, l] = mesh.face(f);
    let (p0, p1, p2) = (mesh.point(i), mesh.point(j), mesh.point(l));
    let a: Vec<f64> = p1.iter().zip(p0).map(|(x, y)| x - y).collect();
    let b: Vec<f64> = p2.iter().zip(p0).map(|(x, y)| x - y).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let (aa, ab, bb) = (dot(&a, &a), dot(&a, &b), dot(&b, &b));
    let (ga, gb) = (a[k], b[k]);
    let det = 4.0 * mesh.face_area(f).powi(2);
    let num = ga * ga * bb - 2.0 * ga * gb * ab + gb * gb * aa;
    (num / det).max(0.0).sqrt()
}

pub fn coarea_check(mesh: &EmbeddedMesh, axis: Axis) -> CoareaCheck {
    let k = axis.index();
    let integral_rhs = (0..mesh.num_faces()).map(|f| face_gradient_norm(mesh, f, k) * mesh.face_area(f)).sum();
    CoareaCheck { axis, area_lhs: mesh.area(), integral_rhs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn disk_diameter_chord() {
        let m = generators::gen_unit_disk(3).unwrap();
        let s = extract_level(&m, Axis::X, 0.0).unwrap();
        assert_eq!(s.components.len(), 1);
        let arc = s.main_arc().unwrap();
        assert!((arc.length - 2.0).abs() < 0.02, "{}", arc.length);
        assert!(s.level != 0.0, "x=0 is on lattice vertices and must be nudged");
        assert!(extract_level(&m, Axis::Y, 1.5).unwrap().components.is_empty());
    }

    #[test]
    fn handle_tube_loop() {
        let eps = 0.1;
        let m = generators::gen_handle_disk(eps, 3).unwrap();
        let s = extract_level(&m, Axis::X, 0.013).unwrap();
        assert_eq!(s.arcs().count(), 1);
        let loops: Vec<_> = s.loops().collect();
        assert_eq!(loops.len(), 1);
        assert!(loops[0].is_nonseparating());
        assert!((loops[0].length - 4.0 * eps).abs() <= 0.2 * 4.0 * eps, "{}", loops[0].length);
    }

    #[test]
    fn coarea_planar_and_tilted() {
        let sq = generators::gen_square();
        let c = coarea_check(&sq, Axis::X);
        assert!((c.area_lhs - 1.0).abs() < 1e-12 && (c.integral_rhs - 1.0).abs() < 1e-12);
        let tilted = generators::gen_tilted_square(std::f64::consts::PI / 3.0);
        let c = coarea_check(&tilted, Axis::X);
        assert!((c.integral_rhs - 0.5 * c.area_lhs).abs() < 1e-12);
    }

    #[test]
    fn arc_ends_on_boundary() {
        let m = generators::gen_handle_disk(0.2, 1).unwrap();
        let s = extract_level(&m, Axis::Y, 0.31).unwrap();
        for a in s.arcs() {
            assert!(m.is_boundary_edge(a.crossings[0].edge));
            assert!(m.is_boundary_edge(a.crossings.last().unwrap().edge));
            assert_eq!(a.faces.len() + 1, a.points.len());
        }
    }
}
