//! Shortest non-separating cycle in the 1-skeleton.
//!
//! The search runs Dijkstra on the product graph of vertices and homology
//! signatures: state `(v, σ)` means "reached `v` by a walk of class `σ`".
//! For a source `s`, a closed walk through `s` of nonzero class and length
//! `L` splits at the edge containing its midpoint into two halves of length
//! at most `L/2`, so scanning all states up to radius `L/2` and pairing them
//! across edges finds it. Only vertices incident to an edge of nonzero
//! signature need to be sources, since every nonzero class uses such an edge.

use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::homology::{build_basis, oracle_is_separating, CycleSig, EdgeCycle, HomologyBasis, HomologyError};
use crate::mesh::{EmbeddedMesh, VertexId};

/// Relative tolerance under which two cycle lengths count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Above this many vertices the default search samples its sources.
pub const EXACT_VERTEX_LIMIT: usize = 20_000;
/// Edge limit for [`brute_force_systole`].
pub const BRUTE_FORCE_EDGE_LIMIT: usize = 30;
/// Largest signature rank the product-graph search accepts.
pub const MAX_SEARCH_RANK: usize = 12;

#[derive(Debug, Error)]
pub enum SystoleError {
    #[error("surface has no non-separating cycle (first homology rank 0)")]
    NoNonSeparatingCycle,
    #[error("mesh has {edges} edges, exhaustive search is limited to {limit}")]
    TooLarge { edges: usize, limit: usize },
    #[error("signature rank {0} too large for the product-graph search")]
    RankTooLarge(usize),
    #[error("wrong topology: {0}")]
    WrongTopology(String),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Which condition the witness was certified against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystoleMode {
    /// Simple cycle checked by the cut oracle.
    NonSeparating,
    /// Simple cycle of nonzero signature (equivalent when `b ≤ 1`).
    NonzeroClass,
}

#[derive(Debug, Clone, Copy)]
pub struct SystoleOptions {
    pub max_exact_vertices: usize,
    /// How many sources to keep when sampling.
    pub sampled_sources: usize,
}

impl Default for SystoleOptions {
    fn default() -> Self {
        Self { max_exact_vertices: EXACT_VERTEX_LIMIT, sampled_sources: 512 }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SearchStats {
    pub sources: usize,
    pub candidate_sources: usize,
    /// `Some(k)` when only every `k`-th candidate source was searched.
    pub sample_stride: Option<usize>,
    pub states_popped: usize,
    pub initial_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystoleReport {
    pub length: f64,
    pub witness: EdgeCycle,
    pub class: CycleSig,
    pub mode: SystoleMode,
    /// False when sources were sampled; the length is then an upper bound.
    pub exact: bool,
    pub stats: SearchStats,
}

pub fn shortest_nonseparating(mesh: &EmbeddedMesh) -> Result<SystoleReport, SystoleError> {
    shortest_nonseparating_with(mesh, &SystoleOptions::default())
}

pub fn shortest_nonseparating_with(mesh: &EmbeddedMesh, opts: &SystoleOptions) -> Result<SystoleReport, SystoleError> {
    let basis = build_basis(mesh)?;
    shortest_with_basis(mesh, &basis, opts)
}

pub fn shortest_with_basis(mesh: &EmbeddedMesh, basis: &HomologyBasis, opts: &SystoleOptions) -> Result<SystoleReport, SystoleError> {
    let rank = basis.rank();
    if rank == 0 {
        return Err(SystoleError::NoNonSeparatingCycle);
    }
    if rank > MAX_SEARCH_RANK {
        return Err(SystoleError::RankTooLarge(rank));
    }
    let sig = basis.edge_bits();
    let mut is_source = vec![false; mesh.num_vertices()];
    for (e, &[u, v]) in mesh.edges().iter().enumerate() {
        if sig[e] != 0 {
            is_source[u] = true;
            is_source[v] = true;
        }
    }
    let all: Vec<VertexId> = (0..mesh.num_vertices()).filter(|&v| is_source[v]).collect();
    let (sources, stride) = if mesh.num_vertices() > opts.max_exact_vertices && all.len() > opts.sampled_sources {
        let stride = all.len().div_ceil(opts.sampled_sources.max(1));
        (all.iter().copied().step_by(stride).collect::<Vec<_>>(), Some(stride))
    } else {
        (all.clone(), None)
    };

    let search = Search { mesh, sig, states: 1 << rank };
    // A deterministic upper bound keeps each per-source search independent
    // of scheduling.
    let mut bound = fundamental_bound(mesh, basis);
    let initial_bound = bound;
    let first = search.run(sources[0], bound, &mut Scratch::new(mesh.num_vertices() << rank));
    if let Some(c) = &first.best {
        bound = bound.min(c.0);
    }
    let results: Vec<SourceResult> = sources
        .par_iter()
        .map_init(
            || Scratch::new(mesh.num_vertices() << rank),
            |scratch, &s| search.run(s, bound, scratch),
        )
        .collect();

    let mut best: Option<(f64, Vec<VertexId>)> = None;
    let mut popped = 0;
    for r in results {
        popped += r.popped;
        if let Some(c) = r.best {
            if best.as_ref().map_or(true, |b| better(&c, b)) {
                best = Some(c);
            }
        }
    }
    let (_, verts) = best.ok_or(SystoleError::NoNonSeparatingCycle)?;
    let witness = EdgeCycle::from_vertices(mesh, &verts)?;
    let class = basis.class_of_edges(witness.edges())?;
    debug_assert!(!class.is_zero());
    Ok(SystoleReport {
        length: witness.length(),
        witness,
        class,
        mode: SystoleMode::NonzeroClass,
        exact: stride.is_none(),
        stats: SearchStats {
            sources: sources.len(),
            candidate_sources: all.len(),
            sample_stride: stride,
            states_popped: popped,
            initial_bound,
        },
    })
}

/// `a` beats `b`: shorter beyond the tie tolerance, otherwise lexicographically
/// smaller canonical vertex sequence.
fn better(a: &(f64, Vec<VertexId>), b: &(f64, Vec<VertexId>)) -> bool {
    let tol = TIE_TOLERANCE * a.0.max(b.0).max(1.0);
    if (a.0 - b.0).abs() > tol {
        a.0 < b.0
    } else {
        a.1 < b.1
    }
}

/// Shortest fundamental cycle of the primal tree over the generators.
fn fundamental_bound(mesh: &EmbeddedMesh, basis: &HomologyBasis) -> f64 {
    use crate::homology::EdgeLabel;
    let n = mesh.num_vertices();
    let mut parent: Vec<Option<(VertexId, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut root_dist = vec![0.0; n];
    depth[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &(v, e) in mesh.neighbors(u) {
            if basis.labels()[e] == EdgeLabel::Tree && depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = Some((u, e));
                root_dist[v] = root_dist[u] + mesh.edge_length(e);
                queue.push_back(v);
            }
        }
    }
    basis
        .generators()
        .iter()
        .map(|&g| {
            let [mut a, mut b] = mesh.edge(g);
            let (ra, rb) = (root_dist[a], root_dist[b]);
            while a != b {
                if depth[a] >= depth[b] {
                    a = parent[a].expect("tree").0;
                } else {
                    b = parent[b].expect("tree").0;
                }
            }
            ra + rb - 2.0 * root_dist[a] + mesh.edge_length(g)
        })
        .fold(f64::INFINITY, f64::min)
}

struct Search<'a> {
    mesh: &'a EmbeddedMesh,
    sig: &'a [u64],
    states: usize,
}

struct Scratch {
    dist: Vec<f64>,
    parent: Vec<usize>,
    done: Vec<bool>,
    touched: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { dist: vec![f64::INFINITY; n], parent: vec![usize::MAX; n], done: vec![false; n], touched: Vec::new() }
    }

    fn reset(&mut self) {
        for &s in &self.touched {
            self.dist[s] = f64::INFINITY;
            self.parent[s] = usize::MAX;
            self.done[s] = false;
        }
        self.touched.clear();
    }
}

struct SourceResult {
    best: Option<(f64, Vec<VertexId>)>,
    popped: usize,
}

impl Search<'_> {
    fn run(&self, source: VertexId, bound: f64, scr: &mut Scratch) -> SourceResult {
        scr.reset();
        let k = self.states;
        let limit = 0.5 * bound * (1.0 + 1e-9) + 1e-300;
        let accept = bound * (1.0 + 1e-9);
        let start = source * k;
        scr.dist[start] = 0.0;
        scr.touched.push(start);
        let mut heap = BinaryHeap::from([std::cmp::Reverse((OrderedFloat(0.0), start))]);
        let mut best: Option<(f64, usize, usize)> = None; // (length, state u, state v)
        let mut popped = 0;
        while let Some(std::cmp::Reverse((OrderedFloat(d), s))) = heap.pop() {
            if scr.done[s] {
                continue;
            }
            if d > limit {
                break;
            }
            scr.done[s] = true;
            popped += 1;
            let (u, su) = (s / k, s % k);
            for &(v, e) in self.mesh.neighbors(u) {
                let len = self.mesh.edge_length(e);
                let sv = su ^ self.sig[e] as usize;
                // pair with settled states at v
                for tv in 0..k {
                    let t = v * k + tv;
                    if !scr.done[t] || t == s {
                        continue;
                    }
                    if sv ^ tv == 0 {
                        continue;
                    }
                    // skip the tree edge that produced either state
                    if scr.parent[t] == s || scr.parent[s] == t {
                        continue;
                    }
                    let total = d + len + scr.dist[t];
                    if total <= accept && best.map_or(true, |b| total < b.0) {
                        best = Some((total, s, t));
                    }
                }
                let t = v * k + sv;
                let nd = d + len;
                if !scr.done[t] && nd < scr.dist[t] {
                    if scr.dist[t].is_infinite() {
                        scr.touched.push(t);
                    }
                    scr.dist[t] = nd;
                    scr.parent[t] = s;
                    heap.push(std::cmp::Reverse((OrderedFloat(nd), t)));
                }
            }
        }
        let best = best.and_then(|(_, a, b)| {
            let mut walk = self.path(a, scr);
            let mut back = self.path(b, scr);
            back.reverse();
            walk.extend(back);
            // walk: source .. a_v, b_v .. source; drop the duplicated source
            walk.pop();
            simplify(self.mesh, self.sig, &walk)
        });
        SourceResult { best, popped }
    }

    fn path(&self, mut s: usize, scr: &Scratch) -> Vec<VertexId> {
        let mut out = vec![s / self.states];
        while scr.parent[s] != usize::MAX {
            s = scr.parent[s];
            out.push(s / self.states);
        }
        out.reverse();
        out
    }
}

fn walk_bits(mesh: &EmbeddedMesh, sig: &[u64], cyc: &[VertexId]) -> (u64, f64) {
    let n = cyc.len();
    let mut bits = 0;
    let mut len = 0.0;
    for i in 0..n {
        let e = mesh.edge_between(cyc[i], cyc[(i + 1) % n]).expect("walk follows edges");
        bits ^= sig[e];
        len += mesh.edge_length(e);
    }
    (bits, len)
}

/// Cut a closed walk at repeated vertices and keep a simple piece of nonzero
/// class, then rotate it to canonical form.
fn simplify(mesh: &EmbeddedMesh, sig: &[u64], walk: &[VertexId]) -> Option<(f64, Vec<VertexId>)> {
    let mut cur = walk.to_vec();
    loop {
        let mut first_seen = std::collections::HashMap::new();
        let mut split = None;
        for (i, &v) in cur.iter().enumerate() {
            if let Some(&j) = first_seen.get(&v) {
                split = Some((j, i));
                break;
            }
            first_seen.insert(v, i);
        }
        let Some((j, i)) = split else { break };
        let inner: Vec<VertexId> = cur[j..i].to_vec();
        let mut outer: Vec<VertexId> = cur[..j].to_vec();
        outer.extend_from_slice(&cur[i..]);
        let inner_ok = inner.len() >= 3 && walk_bits(mesh, sig, &inner).0 != 0;
        cur = if inner_ok { inner } else { outer };
        if cur.len() < 3 {
            return None;
        }
    }
    if cur.len() < 3 || walk_bits(mesh, sig, &cur).0 == 0 {
        return None;
    }
    let c = EdgeCycle::from_vertices(mesh, &cur).ok()?.canonical(mesh);
    Some((c.length(), c.vertices().to_vec()))
}

/// Exhaustive search over simple cycles, classified by the cut oracle.
pub fn brute_force_systole(mesh: &EmbeddedMesh) -> Result<SystoleReport, SystoleError> {
    if mesh.num_edges() > BRUTE_FORCE_EDGE_LIMIT {
        return Err(SystoleError::TooLarge { edges: mesh.num_edges(), limit: BRUTE_FORCE_EDGE_LIMIT });
    }
    let mut best: Option<(f64, Vec<VertexId>)> = None;
    let cycles = simple_cycles(mesh);
    for (cycle, _) in &cycles {
        if oracle_is_separating(mesh, cycle)? {
            continue;
        }
        let c = cycle.canonical(mesh);
        let cand = (c.length(), c.vertices().to_vec());
        if best.as_ref().map_or(true, |b| better(&cand, b)) {
            best = Some(cand);
        }
    }
    let (_, verts) = best.ok_or(SystoleError::NoNonSeparatingCycle)?;
    let witness = EdgeCycle::from_vertices(mesh, &verts)?;
    let class = build_basis(mesh)?.class_of_edges(witness.edges())?;
    Ok(SystoleReport {
        length: witness.length(),
        witness,
        class,
        mode: SystoleMode::NonSeparating,
        exact: true,
        stats: SearchStats { sources: mesh.num_vertices(), candidate_sources: cycles.len(), ..Default::default() },
    })
}

/// Every simple cycle once (smallest vertex first, `path[1] < path[last]`),
/// with its length.
pub fn simple_cycles(mesh: &EmbeddedMesh) -> Vec<(EdgeCycle, f64)> {
    let n = mesh.num_vertices();
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    for s in 0..n {
        let mut path = vec![s];
        on_path[s] = true;
        dfs(mesh, s, &mut path, &mut on_path, &mut out);
        on_path[s] = false;
    }
    out
}

fn dfs(mesh: &EmbeddedMesh, s: VertexId, path: &mut Vec<VertexId>, on_path: &mut [bool], out: &mut Vec<(EdgeCycle, f64)>) {
    let u = *path.last().expect("nonempty");
    for &(v, _) in mesh.neighbors(u) {
        if v == s && path.len() >= 3 && path[1] < u {
            let c = EdgeCycle::from_vertices(mesh, path).expect("path follows edges");
            let l = c.length();
            out.push((c, l));
        } else if v > s && !on_path[v] {
            on_path[v] = true;
            path.push(v);
            dfs(mesh, s, path, on_path, out);
            path.pop();
            on_path[v] = false;
        }
    }
}

/// `ℓ² / area` against the torus constant `2/√3`.
#[derive(Debug, Clone, Serialize)]
pub struct LoewnerReport {
    pub systole: f64,
    pub area: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

pub const LOEWNER_CONSTANT: f64 = 1.154_700_538_379_251_5; // 2/√3

pub fn loewner_check(mesh: &EmbeddedMesh, tol: f64) -> Result<LoewnerReport, SystoleError> {
    if !mesh.is_closed() || mesh.genus() != 1 {
        return Err(SystoleError::WrongTopology(format!(
            "Loewner check needs a closed torus, got genus {} with {} boundary loop(s)",
            mesh.genus(),
            mesh.boundary_loops().len()
        )));
    }
    let rep = shortest_nonseparating(mesh)?;
    let area = mesh.area();
    let ratio = rep.length * rep.length / area;
    Ok(LoewnerReport { systole: rep.length, area, ratio, bound: LOEWNER_CONSTANT, pass: ratio <= LOEWNER_CONSTANT + tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn csaszar_matches_brute_force() {
        let m = generators::gen_csaszar();
        let fast = shortest_nonseparating(&m).unwrap();
        let slow = brute_force_systole(&m).unwrap().length;
        assert!((fast.length - slow).abs() <= 1e-12 * slow.max(1.0), "{} vs {slow}", fast.length);
        assert!(fast.exact);
        assert!(!oracle_is_separating(&m, &fast.witness).unwrap());
    }

    #[test]
    fn triangle_cycle_count() {
        // K4 boundary of a tetrahedron has 7 simple cycles
        let m = EmbeddedMesh::new(
            3,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
        .unwrap();
        assert_eq!(simple_cycles(&m).len(), 7);
        assert!(matches!(shortest_nonseparating(&m), Err(SystoleError::NoNonSeparatingCycle)));
    }

    #[test]
    fn clifford_systole_is_grid_circle() {
        for n in [8, 12] {
            let m = generators::gen_clifford_torus(n).unwrap();
            let r = shortest_nonseparating(&m).unwrap();
            let expect = n as f64 * std::f64::consts::SQRT_2 * (std::f64::consts::PI / n as f64).sin();
            assert!((r.length - expect).abs() < 1e-12, "{} vs {expect}", r.length);
            assert!(r.witness.is_simple());
        }
    }

    #[test]
    fn loewner_requires_closed_torus() {
        let disk = generators::gen_unit_disk(0).unwrap();
        assert!(matches!(loewner_check(&disk, 0.0), Err(SystoleError::WrongTopology(_))));
        let rep = loewner_check(&generators::gen_clifford_torus(16).unwrap(), 0.0).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn csaszar_loewner_after_refinement() {
        let base = loewner_check(&generators::gen_csaszar(), 0.0).unwrap();
        let fine = loewner_check(&crate::mesh::refine(&generators::gen_csaszar(), 2).unwrap(), 0.0).unwrap();
        assert!(fine.systole <= base.systole + 1e-12);
        assert!(fine.pass, "{fine:?}");
    }

    #[test]
    fn brute_force_guard() {
        let m = generators::gen_clifford_torus(4).unwrap();
        assert!(matches!(brute_force_systole(&m), Err(SystoleError::TooLarge { .. })));
    }
}
