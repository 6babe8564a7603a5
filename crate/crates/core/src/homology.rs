//! Z₂ homology of mesh surfaces via a tree-cotree decomposition.
//!
//! Every edge gets a signature in Z₂^{2g}: bit `i` is set when the edge lies
//! on the `i`-th basis cocycle (the primal edges crossed by the dual loop that
//! closes through the `i`-th leftover edge). The class of an edge cycle is the
//! xor of its edge signatures. Boundary loops are capped by virtual dual
//! vertices, so on a surface with at most one boundary component a simple
//! closed curve separates exactly when its class is zero.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::mesh::{component_labels, EdgeId, EmbeddedMesh, FaceId, VertexId};

/// Signature vectors are packed into a `u64`.
pub const MAX_RANK: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum HomologyError {
    #[error("cycle is not closed")]
    NotClosed,
    #[error("cycle needs at least {0} vertices")]
    TooShort(usize),
    #[error("vertices {0} and {1} are not joined by an edge")]
    NotAdjacent(VertexId, VertexId),
    #[error("cycle repeats vertex {0}")]
    NotSimple(VertexId),
    #[error("edge {0} is not part of the mesh carrying this basis")]
    ForeignEdge(EdgeId),
    #[error("crossing list is not a closed level loop: {0}")]
    OpenCrossings(String),
    #[error("first homology rank {0} exceeds the supported {MAX_RANK}")]
    RankTooLarge(usize),
}

/// A closed walk in the 1-skeleton: `edges[i]` joins `vertices[i]` and
/// `vertices[(i + 1) % n]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeCycle {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    length: f64,
}

impl EdgeCycle {
    /// Closed walk through `vertices` (the closing edge back to the first
    /// vertex is implied).
    pub fn from_vertices(mesh: &EmbeddedMesh, vertices: &[VertexId]) -> Result<Self, HomologyError> {
        if vertices.len() < 2 {
            return Err(HomologyError::TooShort(2));
        }
        let n = vertices.len();
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let (u, v) = (vertices[i], vertices[(i + 1) % n]);
            edges.push(mesh.edge_between(u, v).ok_or(HomologyError::NotAdjacent(u, v))?);
        }
        let length = edges.iter().map(|&e| mesh.edge_length(e)).sum();
        Ok(Self { vertices: vertices.to_vec(), edges, length })
    }

    /// Walk given as a vertex sequence whose last entry repeats the first.
    pub fn from_closed_walk(mesh: &EmbeddedMesh, walk: &[VertexId]) -> Result<Self, HomologyError> {
        match (walk.first(), walk.last()) {
            (Some(a), Some(b)) if a == b && walk.len() >= 3 => Self::from_vertices(mesh, &walk[..walk.len() - 1]),
            _ => Err(HomologyError::NotClosed),
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.repeated_vertex().is_none() && self.vertices.len() >= 3
    }

    fn repeated_vertex(&self) -> Option<VertexId> {
        let mut seen = std::collections::HashSet::with_capacity(self.vertices.len());
        self.vertices.iter().copied().find(|v| !seen.insert(*v))
    }

    /// Rotate to start at the smallest vertex, oriented so the second vertex
    /// is smaller than the last. Length is re-summed in canonical order.
    pub fn canonical(&self, mesh: &EmbeddedMesh) -> Self {
        let n = self.vertices.len();
        let start = (0..n).min_by_key(|&i| self.vertices[i]).unwrap_or(0);
        let fwd: Vec<VertexId> = (0..n).map(|k| self.vertices[(start + k) % n]).collect();
        let mut bwd: Vec<VertexId> = (0..n).map(|k| self.vertices[(start + n - k) % n]).collect();
        let chosen = if n > 2 && bwd[1] < fwd[1] {
            std::mem::take(&mut bwd)
        } else {
            fwd
        };
        Self::from_vertices(mesh, &chosen).expect("rotation of a valid cycle")
    }
}

/// Z₂ homology class, bit `i` = coordinate against basis cocycle `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct CycleSig {
    bits: u64,
    rank: usize,
}

impl CycleSig {
    pub fn zero(rank: usize) -> Self {
        Self { bits: 0, rank }
    }

    pub fn from_bits(bits: u64, rank: usize) -> Self {
        Self { bits, rank }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }
}

impl std::ops::BitXor for CycleSig {
    type Output = Self;

    fn bitxor(self, rhs: Self) -> Self {
        Self { bits: self.bits ^ rhs.bits, rank: self.rank.max(rhs.rank) }
    }
}

impl fmt::Display for CycleSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rank {
            write!(f, "{}", u8::from(self.bit(i)))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeLabel {
    Tree,
    Cotree,
    Generator(usize),
}

/// Tree-cotree labeling with per-edge signature vectors.
#[derive(Debug, Clone)]
pub struct HomologyBasis {
    rank: usize,
    labels: Vec<EdgeLabel>,
    edge_sig: Vec<u64>,
    cocycles: Vec<Vec<EdgeId>>,
    generators: Vec<EdgeId>,
    edge_ends: Vec<[VertexId; 2]>,
    edge_faces: Vec<(FaceId, Option<FaceId>)>,
    face_edges: Vec<[EdgeId; 3]>,
}

/// Edge crossed by a level loop, with the endpoint on the side the loop is
/// pushed towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub edge: EdgeId,
    pub side: VertexId,
}

/// Tree-cotree decomposition: BFS primal spanning tree from vertex 0, BFS
/// dual spanning tree (faces plus one virtual node per boundary loop) over
/// the remaining edges, leftover edges generate.
pub fn build_basis(mesh: &EmbeddedMesh) -> Result<HomologyBasis, HomologyError> {
    let nv = mesh.num_vertices();
    let ne = mesh.num_edges();
    let nf = mesh.num_faces();
    let mut in_tree = vec![false; ne];

    let mut seen = vec![false; nv];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &(v, e) in mesh.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                in_tree[e] = true;
                queue.push_back(v);
            }
        }
    }

    // Dual graph; boundary loop `k` is node `nf + k`.
    let mut loop_of = vec![usize::MAX; nv];
    for (k, lp) in mesh.boundary_loops().iter().enumerate() {
        for &v in lp {
            loop_of[v] = k;
        }
    }
    let dual_ends = |e: EdgeId| -> (usize, usize) {
        match mesh.edge_faces(e) {
            (f, Some(g)) => (f, g),
            (f, None) => (f, nf + loop_of[mesh.edge(e)[0]]),
        }
    };
    let nd = nf + mesh.boundary_loops().len();
    let mut dual_adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); nd];
    for e in (0..ne).filter(|&e| !in_tree[e]) {
        let (p, q) = dual_ends(e);
        dual_adj[p].push((q, e));
        dual_adj[q].push((p, e));
    }
    let mut in_cotree = vec![false; ne];
    let mut parent: Vec<Option<(usize, EdgeId)>> = vec![None; nd];
    let mut depth = vec![usize::MAX; nd];
    depth[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(p) = queue.pop_front() {
        for &(q, e) in &dual_adj[p] {
            if depth[q] == usize::MAX {
                depth[q] = depth[p] + 1;
                parent[q] = Some((p, e));
                in_cotree[e] = true;
                queue.push_back(q);
            }
        }
    }

    let generators: Vec<EdgeId> = (0..ne).filter(|&e| !in_tree[e] && !in_cotree[e]).collect();
    let rank = generators.len();
    if rank > MAX_RANK {
        return Err(HomologyError::RankTooLarge(rank));
    }
    let mut labels: Vec<EdgeLabel> =
        (0..ne).map(|e| if in_tree[e] { EdgeLabel::Tree } else { EdgeLabel::Cotree }).collect();
    let mut edge_sig = vec![0u64; ne];
    let mut cocycles = Vec::with_capacity(rank);
    for (i, &g) in generators.iter().enumerate() {
        labels[g] = EdgeLabel::Generator(i);
        let (mut p, mut q) = dual_ends(g);
        let mut support = vec![g];
        while p != q {
            if depth[p] >= depth[q] {
                let (up, e) = parent[p].expect("non-root has parent");
                support.push(e);
                p = up;
            } else {
                let (up, e) = parent[q].expect("non-root has parent");
                support.push(e);
                q = up;
            }
        }
        support.sort_unstable();
        for &e in &support {
            edge_sig[e] |= 1 << i;
        }
        cocycles.push(support);
    }

    Ok(HomologyBasis {
        rank,
        labels,
        edge_sig,
        cocycles,
        generators,
        edge_ends: mesh.edges().to_vec(),
        edge_faces: (0..ne).map(|e| mesh.edge_faces(e)).collect(),
        face_edges: (0..nf).map(|f| mesh.face_edges(f)).collect(),
    })
}

impl HomologyBasis {
    /// Number of basis elements (2g for surfaces with at most one boundary).
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn labels(&self) -> &[EdgeLabel] {
        &self.labels
    }

    pub fn generators(&self) -> &[EdgeId] {
        &self.generators
    }

    pub fn cocycles(&self) -> &[Vec<EdgeId>] {
        &self.cocycles
    }

    pub fn edge_sig(&self, e: EdgeId) -> CycleSig {
        CycleSig::from_bits(self.edge_sig[e], self.rank)
    }

    pub(crate) fn edge_bits(&self) -> &[u64] {
        &self.edge_sig
    }

    /// Xor of signatures over an arbitrary edge multiset.
    pub fn class_of_edges(&self, edges: &[EdgeId]) -> Result<CycleSig, HomologyError> {
        let mut bits = 0;
        for &e in edges {
            bits ^= *self.edge_sig.get(e).ok_or(HomologyError::ForeignEdge(e))?;
        }
        Ok(CycleSig::from_bits(bits, self.rank))
    }

    pub fn face_sig(&self, f: FaceId) -> CycleSig {
        let fe = self.face_edges[f];
        CycleSig::from_bits(self.edge_sig[fe[0]] ^ self.edge_sig[fe[1]] ^ self.edge_sig[fe[2]], self.rank)
    }

    fn shared_face(&self, a: EdgeId, b: EdgeId) -> Option<FaceId> {
        let (fa, ga) = self.edge_faces[a];
        let (fb, gb) = self.edge_faces[b];
        [Some(fa), ga].into_iter().flatten().find(|f| *f == fb || Some(*f) == gb)
    }
}

pub fn cycle_class(basis: &HomologyBasis, c: &EdgeCycle) -> Result<CycleSig, HomologyError> {
    basis.class_of_edges(c.edges())
}

/// Zero class ⇔ separating (exact for simple cycles when `b ≤ 1`).
pub fn is_separating(basis: &HomologyBasis, c: &EdgeCycle) -> Result<bool, HomologyError> {
    Ok(cycle_class(basis, c)?.is_zero())
}

/// Class of a loop that crosses edges transversally.
///
/// Consecutive crossings share a face; the loop is pushed onto the
/// 1-skeleton through the `side` endpoints, and the class of that companion
/// walk is returned.
pub fn transverse_class(basis: &HomologyBasis, crossings: &[Crossing]) -> Result<CycleSig, HomologyError> {
    if crossings.len() < 2 {
        return Err(HomologyError::OpenCrossings(format!("{} crossing(s)", crossings.len())));
    }
    let n = crossings.len();
    let mut bits = 0;
    for k in 0..n {
        let (a, b) = (crossings[k], crossings[(k + 1) % n]);
        for c in [a, b] {
            if c.edge >= basis.edge_sig.len() {
                return Err(HomologyError::ForeignEdge(c.edge));
            }
            if !basis.edge_ends[c.edge].contains(&c.side) {
                return Err(HomologyError::OpenCrossings(format!("vertex {} is not on edge {}", c.side, c.edge)));
            }
        }
        let f = basis.shared_face(a.edge, b.edge).ok_or_else(|| {
            HomologyError::OpenCrossings(format!("edges {} and {} share no face", a.edge, b.edge))
        })?;
        if a.side != b.side {
            let e = basis.face_edges[f]
                .into_iter()
                .find(|&e| {
                    let [u, v] = basis.edge_ends[e];
                    (u == a.side && v == b.side) || (u == b.side && v == a.side)
                })
                .ok_or_else(|| HomologyError::OpenCrossings(format!("sides {} and {} not joined in face {f}", a.side, b.side)))?;
            bits ^= basis.edge_sig[e];
        }
    }
    Ok(CycleSig::from_bits(bits, basis.rank))
}

/// Independent separation test: cut along `c` and count face components.
///
/// Each boundary loop is capped by a virtual face first, so a cycle running
/// along the boundary behaves like its push-off into the interior.
pub fn oracle_is_separating(mesh: &EmbeddedMesh, c: &EdgeCycle) -> Result<bool, HomologyError> {
    if let Some(v) = c.repeated_vertex() {
        return Err(HomologyError::NotSimple(v));
    }
    if c.vertices().len() < 3 {
        return Err(HomologyError::TooShort(3));
    }
    let nf = mesh.num_faces();
    let mut cut = vec![false; mesh.num_edges()];
    for &e in c.edges() {
        if e >= cut.len() {
            return Err(HomologyError::ForeignEdge(e));
        }
        cut[e] = true;
    }
    let mut loop_of = vec![usize::MAX; mesh.num_vertices()];
    for (k, lp) in mesh.boundary_loops().iter().enumerate() {
        for &v in lp {
            loop_of[v] = k;
        }
    }
    let n = nf + mesh.boundary_loops().len();
    let pairs = (0..mesh.num_edges()).filter(|&e| !cut[e]).map(|e| match mesh.edge_faces(e) {
        (f, Some(g)) => (f, g),
        (f, None) => (f, nf + loop_of[mesh.edge(e)[0]]),
    });
    let labels = component_labels(n, pairs);
    Ok(labels.iter().any(|&l| l != 0))
}
