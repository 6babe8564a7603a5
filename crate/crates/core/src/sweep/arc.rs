use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use ordered_float::OrderedFloat;
use serde::Serialize;

use super::level::{extract_level_with, LevelComponent};
use super::{Axis, SweepError};
use crate::mesh::{dist, EdgeId, EmbeddedMesh, FaceId};

/// Steiner points inserted on every edge for the path search.
pub const STEINER_POINTS: usize = 3;

#[derive(Debug, Clone, Serialize)]
pub struct ArcComparison {
    pub t: f64,
    pub arc_length: f64,
    /// Straight distance between the arc endpoints in ℝⁿ.
    pub chord: f64,
    /// Surface shortest path between the endpoints; `None` when the chord
    /// already rules out the requested gap threshold.
    pub geodesic_length: Option<f64>,
    /// `arc_length − geodesic_length`, or the upper bound `arc_length − chord`.
    pub gap: f64,
}

/// Shortest paths on the surface through straight segments inside faces,
/// between vertices and `k` evenly spaced points on every edge.
pub struct SteinerGraph<'a> {
    mesh: &'a EmbeddedMesh,
    k: usize,
    vertex_faces: Vec<Vec<FaceId>>,
}

/// A point on edge `edge`, `lambda` of the way from its first endpoint.
#[derive(Debug, Clone, Copy)]
pub struct EdgePoint {
    pub edge: EdgeId,
    pub lambda: f64,
}

const SOURCE: usize = usize::MAX;
const TARGET: usize = usize::MAX - 1;

impl<'a> SteinerGraph<'a> {
    pub fn new(mesh: &'a EmbeddedMesh, k: usize) -> Self {
        let mut vertex_faces = vec![Vec::new(); mesh.num_vertices()];
        for (f, t) in mesh.faces().iter().enumerate() {
            for &v in t {
                vertex_faces[v].push(f);
            }
        }
        Self { mesh, k, vertex_faces }
    }

    fn position(&self, node: usize) -> Vec<f64> {
        let nv = self.mesh.num_vertices();
        if node < nv {
            return self.mesh.point(node).to_vec();
        }
        let (e, j) = ((node - nv) / self.k, (node - nv) % self.k);
        self.edge_point(EdgePoint { edge: e, lambda: (j + 1) as f64 / (self.k + 1) as f64 })
    }

    pub fn edge_point(&self, p: EdgePoint) -> Vec<f64> {
        let [u, v] = self.mesh.edge(p.edge);
        let (a, b) = (self.mesh.point(u), self.mesh.point(v));
        a.iter().zip(b).map(|(x, y)| x + p.lambda * (y - x)).collect()
    }

    fn edge_faces(&self, e: EdgeId) -> impl Iterator<Item = FaceId> {
        let (f, g) = self.mesh.edge_faces(e);
        std::iter::once(f).chain(g)
    }

    fn face_nodes(&self, f: FaceId, out: &mut Vec<usize>) {
        let nv = self.mesh.num_vertices();
        out.extend(self.mesh.face(f));
        for e in self.mesh.face_edges(f) {
            out.extend((0..self.k).map(|j| nv + e * self.k + j));
        }
    }

    /// Length of the shortest path between two edge points (A* with the
    /// straight-line heuristic).
    pub fn shortest(&self, from: EdgePoint, to: EdgePoint) -> f64 {
        let target = self.edge_point(to);
        let source = self.edge_point(from);
        let target_faces: Vec<FaceId> = self.edge_faces(to.edge).collect();
        let same_face = self.edge_faces(from.edge).any(|f| target_faces.contains(&f));
        if same_face {
            return dist(&source, &target);
        }
        let mut best: HashMap<usize, f64> = HashMap::new();
        let mut pos_cache: HashMap<usize, Vec<f64>> = HashMap::new();
        let mut heap = BinaryHeap::new();
        best.insert(SOURCE, 0.0);
        heap.push(Reverse((OrderedFloat(dist(&source, &target)), OrderedFloat(0.0), SOURCE)));
        let mut nodes = Vec::new();
        while let Some(Reverse((_, OrderedFloat(d), node))) = heap.pop() {
            if node == TARGET {
                return d;
            }
            if best.get(&node).is_some_and(|&b| d > b) {
                continue;
            }
            let here = match node {
                SOURCE => source.clone(),
                n => pos_cache.entry(n).or_insert_with(|| self.position(n)).clone(),
            };
            let faces: Vec<FaceId> = match node {
                SOURCE => self.edge_faces(from.edge).collect(),
                n if n < self.mesh.num_vertices() => self.vertex_faces[n].clone(),
                n => self.edge_faces((n - self.mesh.num_vertices()) / self.k).collect(),
            };
            for f in faces {
                nodes.clear();
                self.face_nodes(f, &mut nodes);
                if target_faces.contains(&f) {
                    nodes.push(TARGET);
                }
                for &m in &nodes {
                    if m == node {
                        continue;
                    }
                    let p = match m {
                        TARGET => target.clone(),
                        n => pos_cache.entry(n).or_insert_with(|| self.position(n)).clone(),
                    };
                    let nd = d + dist(&here, &p);
                    if best.get(&m).map_or(true, |&b| nd < b) {
                        best.insert(m, nd);
                        heap.push(Reverse((OrderedFloat(nd + dist(&p, &target)), OrderedFloat(nd), m)));
                    }
                }
            }
        }
        f64::INFINITY
    }

    /// Compare an arc with the shortest path joining its endpoints. With a
    /// threshold, the search is skipped when `arc − chord` is already below it.
    pub fn compare(&self, t: f64, arc: &LevelComponent, threshold: Option<f64>) -> ArcComparison {
        let (first, last) = (&arc.points[0], arc.points.last().expect("nonempty arc"));
        let chord = dist(first, last);
        if threshold.is_some_and(|th| arc.length - chord < th) {
            return ArcComparison { t, arc_length: arc.length, chord, geodesic_length: None, gap: arc.length - chord };
        }
        let end = |i: usize| {
            let c = arc.crossings[i];
            let [u, v] = self.mesh.edge(c.edge);
            let p = &arc.points[i];
            let (a, b) = (self.mesh.point(u), self.mesh.point(v));
            let lambda = (dist(a, p) / dist(a, b)).clamp(0.0, 1.0);
            EdgePoint { edge: c.edge, lambda }
        };
        let g = self.shortest(end(0), end(arc.crossings.len() - 1));
        ArcComparison { t, arc_length: arc.length, chord, geodesic_length: Some(g), gap: arc.length - g }
    }
}

/// Spanning arc at level `t` against the surface shortest path between its
/// endpoints.
pub fn arc_vs_geodesic(mesh: &EmbeddedMesh, axis: Axis, t: f64) -> Result<ArcComparison, SweepError> {
    let slice = extract_level_with(mesh, None, axis, t)?;
    let arc = slice.main_arc().ok_or(SweepError::NoArc(t))?;
    Ok(SteinerGraph::new(mesh, STEINER_POINTS).compare(slice.level, arc, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn flat_disk_chord_is_geodesic() {
        let m = generators::gen_unit_disk(3).unwrap();
        let c = arc_vs_geodesic(&m, Axis::X, 0.1).unwrap();
        let g = c.geodesic_length.unwrap();
        assert!(c.gap.abs() <= 0.02 * c.arc_length, "{c:?}");
        assert!(g >= c.chord - 1e-12);
    }

    #[test]
    fn detour_over_handle() {
        let m = generators::gen_handle_disk(0.1, 2).unwrap();
        // y = 0 runs over both legs, the shortest path stays near the floor
        let c = arc_vs_geodesic(&m, Axis::Y, 0.01).unwrap();
        assert!(c.gap > 0.1, "{c:?}");
    }

    #[test]
    fn no_arc_outside_range() {
        let m = generators::gen_unit_disk(0).unwrap();
        assert!(matches!(arc_vs_geodesic(&m, Axis::X, 2.0), Err(SweepError::NoArc(_))));
    }
}
