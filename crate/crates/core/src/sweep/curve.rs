use serde::Serialize;

use super::level::{extract_level_with, LevelComponent};
use super::{Axis, SweepError};
use crate::mesh::{component_labels, dist, EmbeddedMesh, FaceId, VertexId};

/// Corner points computed from the two crossing arcs must agree this well.
pub const CORNER_TOLERANCE: f64 = 1e-7;
/// Cut levels keep at least this multiple of the mean edge length from
/// every vertex value, so split faces stay well above the degeneracy floor.
pub const CUT_MARGIN: f64 = 1e-3;

const TAG_A: u8 = 1;
const TAG_B: u8 = 2;
const TAG_C: u8 = 4;
const TAG_D: u8 = 8;

/// Closed PL curve built from the four restricted level arcs.
#[derive(Debug, Clone, Serialize)]
pub struct SeparatingCurve {
    /// Levels actually used: `a, b` on x₁ and `c, d` on x₂.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub points: Vec<Vec<f64>>,
    pub length: f64,
    pub diameter: f64,
    pub simple: bool,
    pub components: usize,
    pub separates: bool,
    pub area_t1: f64,
    pub area_t2: f64,
    /// Faces of the cut mesh on the side containing the boundary.
    pub t1_faces: Vec<FaceId>,
    pub t2_faces: Vec<FaceId>,
    #[serde(skip)]
    pub cut_mesh: EmbeddedMesh,
}

impl SeparatingCurve {
    pub fn t1(&self) -> Result<EmbeddedMesh, SweepError> {
        Ok(self.cut_mesh.submesh(&self.t1_faces)?)
    }

    pub fn t2(&self) -> Result<EmbeddedMesh, SweepError> {
        Ok(self.cut_mesh.submesh(&self.t2_faces)?)
    }
}

/// Shift `t` upwards until every vertex value is at least `margin` away.
fn clear_level(values: impl Iterator<Item = f64> + Clone, t: f64, margin: f64) -> f64 {
    let mut level = t;
    for _ in 0..10_000 {
        match values.clone().find(|x| (x - level).abs() < margin) {
            None => return level,
            Some(_) => level += margin,
        }
    }
    level
}

/// Split every face crossed by `{x_k = t}`; new vertices lie exactly on the
/// level and get tag `bit` (plus the tags shared by the split edge's ends).
fn split_along(mesh: &EmbeddedMesh, tags: &[u8], k: usize, t: f64, bit: u8) -> Result<(EmbeddedMesh, Vec<u8>), SweepError> {
    let dim = mesh.dim();
    let f = |v: VertexId| mesh.point(v)[k] - t;
    let mut coords = mesh.coords().to_vec();
    let mut new_tags = tags.to_vec();
    let mut mid = vec![usize::MAX; mesh.num_edges()];
    for (e, &[u, v]) in mesh.edges().iter().enumerate() {
        let (fu, fv) = (f(u), f(v));
        if (fu < 0.0) != (fv < 0.0) {
            let lambda = fu / (fu - fv);
            let (a, b) = (mesh.point(u), mesh.point(v));
            let mut p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + lambda * (y - x)).collect();
            p[k] = t;
            mid[e] = coords.len() / dim;
            coords.extend(p);
            new_tags.push((tags[u] & tags[v]) | bit);
        }
    }
    let mut faces = Vec::with_capacity(mesh.num_faces() + 16);
    for fc in 0..mesh.num_faces() {
        let tri = mesh.face(fc);
        let fe = mesh.face_edges(fc);
        let cut: Vec<usize> = (0..3).filter(|&i| mid[fe[i]] != usize::MAX).collect();
        if cut.is_empty() {
            faces.push(tri);
            continue;
        }
        if cut.len() != 2 {
            return Err(SweepError::Degenerate(format!("face {fc} crossed {} times by the cut", cut.len())));
        }
        // edge i joins corners i and i+1; the lone corner touches both cut edges
        let lone = (0..3).find(|&i| cut.contains(&i) && cut.contains(&((i + 2) % 3))).expect("two cut edges meet at a corner");
        let (a, b, c) = (tri[lone], tri[(lone + 1) % 3], tri[(lone + 2) % 3]);
        let p = mid[fe[lone]];
        let q = mid[fe[(lone + 2) % 3]];
        faces.push([a, p, q]);
        let pt = |v: usize| &coords[v * dim..v * dim + dim];
        if dist(pt(p), pt(c)) <= dist(pt(b), pt(q)) {
            faces.push([p, b, c]);
            faces.push([p, c, q]);
        } else {
            faces.push([p, b, q]);
            faces.push([b, c, q]);
        }
    }
    Ok((EmbeddedMesh::new(dim, coords, faces)?, new_tags))
}

fn single_arc(mesh: &EmbeddedMesh, axis: Axis, t: f64) -> Result<LevelComponent, SweepError> {
    let s = extract_level_with(mesh, None, axis, t)?;
    let mut arcs = s.arcs();
    match (arcs.next(), arcs.next()) {
        (Some(a), None) => Ok(a.clone()),
        (None, _) => Err(SweepError::NoArc(t)),
        _ => Err(SweepError::Degenerate(format!("{} level {t} has several arcs", axis.name()))),
    }
}

/// Sub-polyline of `arc` between its unique crossings with `x_k = lo` and
/// `x_k = hi`, oriented from `lo` to `hi`.
fn restrict(arc: &LevelComponent, k: usize, lo: f64, hi: f64, name: &str) -> Result<Vec<Vec<f64>>, SweepError> {
    let pts = &arc.points;
    let crossing = |level: f64| -> Result<(usize, Vec<f64>), SweepError> {
        let hits: Vec<usize> = (0..pts.len() - 1).filter(|&i| (pts[i][k] < level) != (pts[i + 1][k] < level)).collect();
        if hits.len() != 1 {
            return Err(SweepError::Degenerate(format!("arc {name} meets level {level} {} times", hits.len())));
        }
        let i = hits[0];
        let (p, q) = (&pts[i], &pts[i + 1]);
        let lambda = (level - p[k]) / (q[k] - p[k]);
        let mut x: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + lambda * (b - a)).collect();
        x[k] = level;
        Ok((i, x))
    };
    let (i, x_lo) = crossing(lo)?;
    let (j, x_hi) = crossing(hi)?;
    let mut out = vec![x_lo];
    if i < j {
        out.extend(pts[i + 1..=j].iter().cloned());
    } else {
        out.extend(pts[j + 1..=i].iter().rev().cloned());
    }
    out.push(x_hi);
    Ok(out)
}

fn polyline_length(p: &[Vec<f64>]) -> f64 {
    p.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Walk along cut-line edges tagged `line` from `from` until a vertex tagged
/// `stop`, staying inside `[lo, hi]` on coordinate `k`.
fn walk_line(m: &EmbeddedMesh, tags: &[u8], line: u8, stop: u8, from: VertexId, k: usize, lo: f64, hi: f64) -> Result<Vec<usize>, SweepError> {
    let mut edges = Vec::new();
    let mut prev = usize::MAX;
    let mut cur = from;
    for _ in 0..m.num_vertices() {
        let next = m.neighbors(cur).iter().find(|&&(v, _)| {
            v != prev && tags[v] & line != 0 && (lo..=hi).contains(&m.point(v)[k])
        });
        let Some(&(v, e)) = next else {
            return Err(SweepError::Degenerate(format!("cut line walk stuck at vertex {cur}")));
        };
        edges.push(e);
        if tags[v] & stop != 0 {
            return Ok(edges);
        }
        prev = cur;
        cur = v;
    }
    Err(SweepError::Degenerate("cut line walk did not close".into()))
}

fn nearest_tagged(m: &EmbeddedMesh, tags: &[u8], want: u8, p: &[f64]) -> Result<VertexId, SweepError> {
    let scale = m.bbox_diagonal().max(1.0);
    (0..m.num_vertices())
        .filter(|&v| tags[v] & want == want)
        .map(|v| (dist(m.point(v), p), v))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .filter(|(d, _)| *d <= CORNER_TOLERANCE * scale)
        .map(|(_, v)| v)
        .ok_or_else(|| SweepError::Degenerate("corner of w not found on the cut mesh".into()))
}

/// Assemble `w` from `α_a, α_b` restricted to `x₂ ∈ [c, d]` and `β_c, β_d`
/// restricted to `x₁ ∈ [a, b]`, then cut the mesh along it.
pub fn build_w(mesh: &EmbeddedMesh, a: f64, b: f64, c: f64, d: f64) -> Result<SeparatingCurve, SweepError> {
    if !(a < b && c < d) {
        return Err(SweepError::Degenerate(format!("need a < b and c < d, got [{a}, {b}] x [{c}, {d}]")));
    }
    let margin = CUT_MARGIN * mesh.mean_edge_length();
    let xs = |m: &EmbeddedMesh, k: usize| (0..m.num_vertices()).map(move |v| m.point(v)[k]).collect::<Vec<_>>();
    let x0 = xs(mesh, 0);
    let a = clear_level(x0.iter().copied(), a, margin);
    let b = clear_level(x0.iter().copied(), b, margin);
    if !(a < b) {
        return Err(SweepError::Degenerate("a and b collapse after regularization".into()));
    }
    let tags = vec![0u8; mesh.num_vertices()];
    let (m1, tags) = split_along(mesh, &tags, 0, a, TAG_A)?;
    let (m1, tags) = split_along(&m1, &tags, 0, b, TAG_B)?;
    let y1 = xs(&m1, 1);
    let c = clear_level(y1.iter().copied(), c, margin);
    let d = clear_level(y1.iter().copied(), d, margin);
    if !(c < d) {
        return Err(SweepError::Degenerate("c and d collapse after regularization".into()));
    }
    let (m2, tags) = split_along(&m1, &tags, 1, c, TAG_C)?;
    let (m2, tags) = split_along(&m2, &tags, 1, d, TAG_D)?;

    let alpha_a = restrict(&single_arc(mesh, Axis::X, a)?, 1, c, d, "alpha_a")?;
    let alpha_b = restrict(&single_arc(mesh, Axis::X, b)?, 1, c, d, "alpha_b")?;
    let beta_c = restrict(&single_arc(mesh, Axis::Y, c)?, 0, a, b, "beta_c")?;
    let beta_d = restrict(&single_arc(mesh, Axis::Y, d)?, 0, a, b, "beta_d")?;
    let scale = mesh.bbox_diagonal().max(1.0);
    let corners = [
        (&alpha_a[0], &beta_c[0]),
        (alpha_a.last().unwrap(), &beta_d[0]),
        (&alpha_b[0], beta_c.last().unwrap()),
        (alpha_b.last().unwrap(), beta_d.last().unwrap()),
    ];
    for (p, q) in corners {
        if dist(p, q) > CORNER_TOLERANCE * scale {
            return Err(SweepError::Degenerate(format!("arc corners disagree by {:e}", dist(p, q))));
        }
    }
    // (a,c) → (a,d) → (b,d) → (b,c) → back
    let mut points = alpha_a.clone();
    points.extend(beta_d[1..].iter().cloned());
    points.extend(alpha_b.iter().rev().skip(1).cloned());
    points.extend(beta_c.iter().rev().skip(1).cloned());
    let length = polyline_length(&alpha_a) + polyline_length(&alpha_b) + polyline_length(&beta_c) + polyline_length(&beta_d);
    let mut diameter: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diameter = diameter.max(dist(&points[i], &points[j]));
        }
    }

    let ac = nearest_tagged(&m2, &tags, TAG_A | TAG_C, &alpha_a[0])?;
    let bd = nearest_tagged(&m2, &tags, TAG_B | TAG_D, alpha_b.last().unwrap())?;
    let mut cut_edges = walk_line(&m2, &tags, TAG_A, TAG_D, ac, 1, c, d)?;
    let ad = *m2.edge(*cut_edges.last().unwrap()).iter().find(|&&v| tags[v] & TAG_D != 0).expect("walk ends on d");
    cut_edges.extend(walk_line(&m2, &tags, TAG_D, TAG_B, ad, 0, a, b)?);
    cut_edges.extend(walk_line(&m2, &tags, TAG_B, TAG_C, bd, 1, c, d)?);
    let bc = *m2.edge(*cut_edges.last().unwrap()).iter().find(|&&v| tags[v] & TAG_C != 0).expect("walk ends on c");
    cut_edges.extend(walk_line(&m2, &tags, TAG_C, TAG_A, bc, 0, a, b)?);
    let mut on_w = vec![false; m2.num_edges()];
    cut_edges.iter().for_each(|&e| on_w[e] = true);
    let mut degree = vec![0usize; m2.num_vertices()];
    for &e in &cut_edges {
        for v in m2.edge(e) {
            degree[v] += 1;
        }
    }
    let simple = degree.iter().all(|&k| k == 0 || k == 2);

    let pairs = (0..m2.num_edges()).filter(|&e| !on_w[e]).filter_map(|e| match m2.edge_faces(e) {
        (f, Some(g)) => Some((f, g)),
        _ => None,
    });
    let labels = component_labels(m2.num_faces(), pairs);
    let components = labels.iter().max().map_or(0, |&l| l + 1);
    let boundary_label = (0..m2.num_edges()).find(|&e| m2.is_boundary_edge(e)).map(|e| labels[m2.edge_faces(e).0]);
    let boundary_one_side = (0..m2.num_edges())
        .filter(|&e| m2.is_boundary_edge(e))
        .all(|e| Some(labels[m2.edge_faces(e).0]) == boundary_label);
    let separates = components == 2 && boundary_one_side;
    let (mut t1_faces, mut t2_faces) = (Vec::new(), Vec::new());
    for (f, &l) in labels.iter().enumerate() {
        if Some(l) == boundary_label {
            t1_faces.push(f);
        } else {
            t2_faces.push(f);
        }
    }
    let area_of = |fs: &[FaceId]| fs.iter().map(|&f| m2.face_area(f)).sum::<f64>();
    Ok(SeparatingCurve {
        a,
        b,
        c,
        d,
        points,
        length,
        diameter,
        simple,
        components,
        separates,
        area_t1: area_of(&t1_faces),
        area_t2: area_of(&t2_faces),
        t1_faces,
        t2_faces,
        cut_mesh: m2,
    })
}

/// Closed surface obtained by coning off the single boundary loop of `t2`.
#[derive(Debug, Clone, Serialize)]
pub struct CappedSurface {
    #[serde(skip)]
    pub mesh: EmbeddedMesh,
    pub cap_area: f64,
    /// `length(w) · diam(w) / 2` for the capped loop.
    pub cap_bound: f64,
    pub apex: VertexId,
    pub genus: usize,
}

/// Fill the boundary of `t2` with a fan from a new apex at the loop
/// centroid. The result must be closed; its genus is reported.
pub fn cap_with_cone(t2: &EmbeddedMesh) -> Result<CappedSurface, SweepError> {
    let loops = t2.boundary_loops();
    if loops.len() != 1 {
        return Err(SweepError::Topology(format!("T2 has {} boundary loops, expected 1", loops.len())));
    }
    let lp = &loops[0];
    let dim = t2.dim();
    let n = lp.len();
    let mut apex_pos = vec![0.0; dim];
    for &v in lp {
        for (k, x) in t2.point(v).iter().enumerate() {
            apex_pos[k] += x / n as f64;
        }
    }
    let apex = t2.num_vertices();
    let mut coords = t2.coords().to_vec();
    coords.extend(&apex_pos);
    let mut faces = t2.faces().to_vec();
    for i in 0..n {
        faces.push([lp[(i + 1) % n], lp[i], apex]);
    }
    let mesh = EmbeddedMesh::new(dim, coords, faces)?;
    let cap_area: f64 = (t2.num_faces()..mesh.num_faces()).map(|f| mesh.face_area(f)).sum();
    let loop_len = t2.boundary_loop_length(lp);
    let mut diam: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diam = diam.max(dist(t2.point(lp[i]), t2.point(lp[j])));
        }
    }
    let genus = mesh.genus();
    if !mesh.is_closed() {
        return Err(SweepError::Topology(format!("capped surface still has {} boundary loops", mesh.boundary_loops().len())));
    }
    Ok(CappedSurface { mesh, cap_area, cap_bound: 0.5 * loop_len * diam, apex, genus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn split_keeps_area_and_topology() {
        let m = generators::gen_handle_disk(0.2, 1).unwrap();
        let tags = vec![0; m.num_vertices()];
        let (s, t) = split_along(&m, &tags, 0, 0.0123, TAG_A).unwrap();
        assert!((s.area() - m.area()).abs() < 1e-12);
        assert_eq!((s.genus(), s.boundary_loops().len()), (1, 1));
        assert!(t.iter().filter(|&&x| x == TAG_A).count() > 0);
    }

    #[test]
    fn handle_rectangle_separates() {
        let eps = 0.1;
        let m = generators::gen_handle_disk(eps, 1).unwrap();
        let e = eps / 2.0;
        let inner = generators::HOLE_OFFSET - e;
        let w = build_w(&m, -inner - 0.01, inner + 0.01, -e - 0.01, e + 0.01).unwrap();
        assert!(w.separates && w.simple, "{} components", w.components);
        assert!((w.area_t1 + w.area_t2 - m.area()).abs() < 1e-9);
        let t2 = w.t2().unwrap();
        assert_eq!((t2.genus(), t2.boundary_loops().len()), (1, 1));
        let cap = cap_with_cone(&t2).unwrap();
        assert_eq!(cap.genus, 1);
        assert!(cap.cap_area <= cap.cap_bound);
        // symmetric construction, symmetric curve
        let xs: Vec<f64> = w.points.iter().map(|p| p[0]).collect();
        let (lo, hi) = xs.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        assert!((lo + hi).abs() < 0.05, "{lo} {hi}");
    }

    #[test]
    fn degenerate_rectangle() {
        let m = generators::gen_handle_disk(0.2, 0).unwrap();
        assert!(matches!(build_w(&m, 0.1, 0.1, -0.2, 0.2), Err(SweepError::Degenerate(_))));
    }

    #[test]
    fn planar_cap_area() {
        let m = generators::gen_unit_disk(2).unwrap();
        let w = build_w(&m, -0.31, 0.29, -0.2, 0.33).unwrap();
        assert!(w.separates);
        let inner = w.t2().unwrap();
        let exact = (w.b - w.a) * (w.d - w.c);
        assert!((inner.area() - exact).abs() < 1e-9 * exact.max(1.0) + 1e-9);
        let cap = cap_with_cone(&inner).unwrap();
        assert_eq!(cap.genus, 0);
        assert!((cap.cap_area - exact).abs() <= 0.01 * exact, "{} vs {exact}", cap.cap_area);
    }
}
