//! Oriented triangle meshes embedded in ℝⁿ.
//!
//! An [`EmbeddedMesh`] is immutable once built. Construction validates the
//! combinatorics (edge-manifold, vertex-manifold, consistently oriented,
//! connected) and the metric (positive edge lengths, faces above the
//! degeneracy floor), and caches edges, lengths, areas and boundary loops.

mod io;
mod refine;

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

pub use io::{load_mesh, parse_obj, parse_smesh, write_smesh, MeshFormat};
pub use refine::refine;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

/// Faces with area below `DEGENERACY_FLOOR · diag²` are rejected.
pub const DEGENERACY_FLOOR: f64 = 1e-14;
/// Tolerance for "lies on the unit circle in the x₁x₂-plane".
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("ambient dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} references vertex {vertex}, but only {count} vertices exist")]
    IndexOutOfRange { face: FaceId, vertex: VertexId, count: usize },
    #[error("face {0} repeats a vertex")]
    RepeatedVertex(FaceId),
    #[error("vertex {0} is not used by any face")]
    IsolatedVertex(VertexId),
    #[error("non-manifold edge ({0}, {1}) shared by {2} faces")]
    NonManifoldEdge(VertexId, VertexId, usize),
    #[error("non-manifold vertex {0}")]
    NonManifoldVertex(VertexId),
    #[error("inconsistent orientation across edge ({0}, {1})")]
    InconsistentOrientation(VertexId, VertexId),
    #[error("zero-length edge ({0}, {1})")]
    ZeroLengthEdge(VertexId, VertexId),
    #[error("degenerate face {face}: area {area:e} below floor {floor:e}")]
    DegenerateFace { face: FaceId, area: f64, floor: f64 },
    #[error("surface is not connected")]
    Disconnected,
    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(VertexId),
    #[error("OBJ input is only accepted for ambient dimension 3")]
    ObjDimension,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Triangle mesh with vertex coordinates in ℝⁿ.
#[derive(Debug, Clone)]
pub struct EmbeddedMesh {
    dim: usize,
    coords: Vec<f64>,
    faces: Vec<[VertexId; 3]>,
    edges: Vec<[VertexId; 2]>,
    edge_faces: Vec<(FaceId, Option<FaceId>)>,
    face_edges: Vec<[EdgeId; 3]>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    edge_len: Vec<f64>,
    face_area: Vec<f64>,
    boundary_loops: Vec<Vec<VertexId>>,
}

/// Topological and metric census of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceInfo {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler: i64,
    pub genus: usize,
    pub boundary_count: usize,
    pub boundary_lengths: Vec<f64>,
    pub total_area: f64,
    /// `b = 1` and every boundary vertex lies on the unit circle of the
    /// x₁x₂-plane, traversed monotonically in angle.
    pub unit_circle_boundary: bool,
    /// `2π − boundary length` when `b = 1`.
    pub inscription_deficit: Option<f64>,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Count connected classes of `0..n` under the given unions.
pub(crate) fn component_labels(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut ds = DisjointSet::new(n);
    for (a, b) in pairs {
        ds.union(a, b);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let r = ds.find(i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        *slot = label[r];
    }
    out
}

/// Triangle area from side lengths (Kahan's ordering of Heron's formula).
pub fn heron_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

fn on_unit_circle(p: &[f64]) -> bool {
    let r = p[0].hypot(p[1]);
    (r - 1.0).abs() <= UNIT_CIRCLE_TOL && p[2..].iter().all(|x| x.abs() <= UNIT_CIRCLE_TOL)
}

impl EmbeddedMesh {
    /// Build and validate a mesh from flat coordinates (`V·dim` reals) and
    /// oriented faces.
    pub fn new(dim: usize, coords: Vec<f64>, faces: Vec<[VertexId; 3]>) -> Result<Self, MeshError> {
        if dim < 2 {
            return Err(MeshError::BadDimension(dim));
        }
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = coords.len() / dim;
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(MeshError::NonFinite(i / dim));
        }
        let mut used = vec![false; nv];
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange { face: f, vertex: v, count: nv });
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex(f));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::IsolatedVertex(v));
        }

        // (lo, hi, face, forward) half-edge records, grouped by undirected edge.
        let mut half: Vec<(VertexId, VertexId, FaceId, bool)> = Vec::with_capacity(faces.len() * 3);
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                half.push((u.min(v), u.max(v), f, u < v));
            }
        }
        half.sort_unstable();

        let mut edges = Vec::new();
        let mut edge_faces = Vec::new();
        let mut edge_index = HashMap::with_capacity(half.len() / 2 + 1);
        let mut i = 0;
        while i < half.len() {
            let (lo, hi, f0, d0) = half[i];
            let mut j = i + 1;
            while j < half.len() && half[j].0 == lo && half[j].1 == hi {
                j += 1;
            }
            match j - i {
                1 => edge_faces.push((f0, None)),
                2 => {
                    let (_, _, f1, d1) = half[i + 1];
                    if d0 == d1 {
                        return Err(MeshError::InconsistentOrientation(lo, hi));
                    }
                    edge_faces.push((f0, Some(f1)));
                }
                n => return Err(MeshError::NonManifoldEdge(lo, hi, n)),
            }
            edge_index.insert((lo, hi), edges.len());
            edges.push([lo, hi]);
            i = j;
        }

        let mut face_edges = Vec::with_capacity(faces.len());
        for tri in &faces {
            let mut fe = [0; 3];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                fe[k] = edge_index[&(u.min(v), u.max(v))];
            }
            face_edges.push(fe);
        }

        let mut adjacency = vec![Vec::new(); nv];
        for (e, &[u, v]) in edges.iter().enumerate() {
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let point = |v: VertexId| &coords[v * dim..(v + 1) * dim];
        let mut edge_len = Vec::with_capacity(edges.len());
        for &[u, v] in &edges {
            let d = dist(point(u), point(v));
            if d == 0.0 {
                return Err(MeshError::ZeroLengthEdge(u, v));
            }
            edge_len.push(d);
        }

        let diag = bbox_diagonal(dim, &coords);
        let floor = DEGENERACY_FLOOR * diag * diag;
        let mut face_area = Vec::with_capacity(faces.len());
        for (f, fe) in face_edges.iter().enumerate() {
            let area = heron_area(edge_len[fe[0]], edge_len[fe[1]], edge_len[fe[2]]);
            if area < floor {
                return Err(MeshError::DegenerateFace { face: f, area, floor });
            }
            face_area.push(area);
        }

        // Connectivity over faces.
        let labels = component_labels(
            faces.len(),
            edge_faces.iter().filter_map(|&(a, b)| b.map(|b| (a, b))),
        );
        if labels.iter().any(|&l| l != 0) {
            return Err(MeshError::Disconnected);
        }

        // Vertex manifoldness: the corners around each vertex form a single fan.
        let corner = |f: FaceId, v: VertexId| {
            3 * f + faces[f].iter().position(|&w| w == v).expect("vertex of face")
        };
        let mut pairs = Vec::new();
        for (e, &(f0, f1)) in edge_faces.iter().enumerate() {
            if let Some(f1) = f1 {
                for &v in &edges[e] {
                    pairs.push((corner(f0, v), corner(f1, v)));
                }
            }
        }
        let labels = component_labels(3 * faces.len(), pairs);
        let mut fan = vec![usize::MAX; nv];
        for (f, tri) in faces.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                let l = labels[3 * f + k];
                if fan[v] == usize::MAX {
                    fan[v] = l;
                } else if fan[v] != l {
                    return Err(MeshError::NonManifoldVertex(v));
                }
            }
        }

        // Boundary loops, directed as in their incident face.
        let mut next = vec![usize::MAX; nv];
        for (e, &(f0, f1)) in edge_faces.iter().enumerate() {
            if f1.is_none() {
                let [a, b] = edges[e];
                let tri = faces[f0];
                let forward = (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b);
                let (u, v) = if forward { (a, b) } else { (b, a) };
                if next[u] != usize::MAX {
                    return Err(MeshError::NonManifoldVertex(u));
                }
                next[u] = v;
            }
        }
        let mut boundary_loops = Vec::new();
        let mut seen = vec![false; nv];
        for start in 0..nv {
            if next[start] == usize::MAX || seen[start] {
                continue;
            }
            let mut lp = Vec::new();
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                lp.push(v);
                v = next[v];
            }
            boundary_loops.push(lp);
        }

        Ok(Self {
            dim,
            coords,
            faces,
            edges,
            edge_faces,
            face_edges,
            edge_index,
            adjacency,
            edge_len,
            face_area,
            boundary_loops,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, v: VertexId) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn faces(&self) -> &[[VertexId; 3]] {
        &self.faces
    }

    pub fn face(&self, f: FaceId) -> [VertexId; 3] {
        self.faces[f]
    }

    /// Undirected edges as `[lo, hi]`, sorted lexicographically.
    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> [VertexId; 2] {
        self.edges[e]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    /// Faces incident to an edge; the second is `None` on the boundary.
    pub fn edge_faces(&self, e: EdgeId) -> (FaceId, Option<FaceId>) {
        self.edge_faces[e]
    }

    /// `face_edges(f)[k]` joins corners `k` and `k + 1`.
    pub fn face_edges(&self, f: FaceId) -> [EdgeId; 3] {
        self.face_edges[f]
    }

    pub fn is_boundary_edge(&self, e: EdgeId) -> bool {
        self.edge_faces[e].1.is_none()
    }

    /// Neighbours of `v` as `(vertex, edge)`, sorted by neighbour index.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn edge_length(&self, e: EdgeId) -> f64 {
        self.edge_len[e]
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_len
    }

    pub fn face_area(&self, f: FaceId) -> f64 {
        self.face_area[f]
    }

    pub fn boundary_loops(&self) -> &[Vec<VertexId>] {
        &self.boundary_loops
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_loops.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.face_area.iter().sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.edge_len.iter().sum::<f64>() / self.edge_len.len() as f64
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edge_len.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(self.dim, &self.coords)
    }

    /// `(min, max)` of one coordinate over all vertices.
    pub fn coord_range(&self, axis: usize) -> (f64, f64) {
        (0..self.num_vertices()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let x = self.point(v)[axis];
            (lo.min(x), hi.max(x))
        })
    }

    pub fn boundary_loop_length(&self, lp: &[VertexId]) -> f64 {
        (0..lp.len())
            .map(|i| dist(self.point(lp[i]), self.point(lp[(i + 1) % lp.len()])))
            .sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn genus(&self) -> usize {
        let twice = 2 - self.boundary_loops.len() as i64 - self.euler_characteristic();
        debug_assert!(twice >= 0 && twice % 2 == 0, "orientable surface");
        (twice / 2) as usize
    }

    /// Same combinatorics with new coordinates (re-validated).
    pub fn with_coords(&self, coords: Vec<f64>) -> Result<Self, MeshError> {
        Self::new(self.dim, coords, self.faces.clone())
    }

    /// Uniformly scale all coordinates by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self, MeshError> {
        self.with_coords(self.coords.iter().map(|x| x * s).collect())
    }

    /// Sub-mesh on a subset of faces, vertices renumbered in first-use order.
    pub fn submesh(&self, faces: &[FaceId]) -> Result<Self, MeshError> {
        let mut map = vec![usize::MAX; self.num_vertices()];
        let mut coords = Vec::new();
        let mut out = Vec::with_capacity(faces.len());
        for &f in faces {
            let mut tri = [0; 3];
            for (k, &v) in self.faces[f].iter().enumerate() {
                if map[v] == usize::MAX {
                    map[v] = coords.len() / self.dim;
                    coords.extend_from_slice(self.point(v));
                }
                tri[k] = map[v];
            }
            out.push(tri);
        }
        Self::new(self.dim, coords, out)
    }

    pub fn info(&self) -> SurfaceInfo {
        validate(self)
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn bbox_diagonal(dim: usize, coords: &[f64]) -> f64 {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in coords.chunks_exact(dim) {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

/// Sum of triangle areas.
pub fn area(mesh: &EmbeddedMesh) -> f64 {
    mesh.area()
}

/// Census of a mesh, including the unit-circle boundary hypothesis flag.
pub fn validate(mesh: &EmbeddedMesh) -> SurfaceInfo {
    let boundary_lengths: Vec<f64> =
        mesh.boundary_loops.iter().map(|lp| mesh.boundary_loop_length(lp)).collect();
    let b = boundary_lengths.len();
    let unit_circle_boundary = b == 1 && mesh.dim >= 2 && boundary_on_unit_circle(mesh, &mesh.boundary_loops[0]);
    SurfaceInfo {
        vertices: mesh.num_vertices(),
        edges: mesh.num_edges(),
        faces: mesh.num_faces(),
        euler: mesh.euler_characteristic(),
        genus: mesh.genus(),
        boundary_count: b,
        inscription_deficit: (b == 1).then(|| 2.0 * PI - boundary_lengths[0]),
        boundary_lengths,
        total_area: mesh.area(),
        unit_circle_boundary,
    }
}

fn boundary_on_unit_circle(mesh: &EmbeddedMesh, lp: &[VertexId]) -> bool {
    if lp.len() < 3 || !lp.iter().all(|&v| on_unit_circle(mesh.point(v))) {
        return false;
    }
    let angle = |v: VertexId| {
        let p = mesh.point(v);
        p[1].atan2(p[0])
    };
    let mut total = 0.0;
    let mut sign = 0.0;
    for i in 0..lp.len() {
        let mut d = angle(lp[(i + 1) % lp.len()]) - angle(lp[i]);
        if d > PI {
            d -= 2.0 * PI;
        } else if d < -PI {
            d += 2.0 * PI;
        }
        if d == 0.0 || (sign != 0.0 && d.signum() != sign) {
            return false;
        }
        sign = d.signum();
        total += d;
    }
    (total.abs() - 2.0 * PI).abs() < 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn square() -> EmbeddedMesh {
        EmbeddedMesh::new(
            2,
            vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn square_census() {
        let m = square();
        let info = validate(&m);
        assert_eq!((info.vertices, info.edges, info.faces), (4, 5, 2));
        assert_eq!((info.boundary_count, info.genus), (1, 0));
        assert!((info.total_area - 1.0).abs() < 1e-15);
        assert!(!info.unit_circle_boundary);
        assert_eq!(m.boundary_loops()[0], vec![0, 1, 2, 3]);
    }

    #[test]
    fn heron_matches_cross_product() {
        assert!((heron_area(3.0, 4.0, 5.0) - 6.0).abs() < 1e-14);
        // needle with a tiny base
        let c: f64 = 1e-7;
        let a = heron_area(1.0, 1.0, c);
        let exact = 0.5 * c * (1.0 - 0.25 * c * c).sqrt();
        assert!((a - exact).abs() / exact < 1e-12, "{a}");
    }

    #[test]
    fn rejects_edge_shared_by_three_faces() {
        let coords = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0];
        let err = EmbeddedMesh::new(3, coords, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge(0, 1, 3)), "{err}");
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        let err = EmbeddedMesh::new(
            2,
            vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            vec![[0, 1, 2], [0, 3, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::InconsistentOrientation(0, 2)), "{err}");
    }

    #[test]
    fn rejects_zero_length_edge() {
        let err = EmbeddedMesh::new(2, vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0], vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::ZeroLengthEdge(0, 1)), "{err}");
    }

    #[test]
    fn rejects_degenerate_face() {
        let err = EmbeddedMesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 1e-16], vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::DegenerateFace { .. }), "{err}");
    }

    #[test]
    fn rejects_bowtie_vertex() {
        // two triangles sharing only vertex 0
        let coords = vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, -1.0, 0.0, -1.0, -1.0];
        let err = EmbeddedMesh::new(2, coords, vec![[0, 1, 2], [0, 3, 4]]).unwrap_err();
        assert!(matches!(err, MeshError::Disconnected | MeshError::NonManifoldVertex(0)), "{err}");
    }

    #[test]
    fn scaling_scales_area_quadratically() {
        let m = square().scaled(3.0).unwrap();
        assert!((m.area() - 9.0).abs() < 1e-12);
    }
}
