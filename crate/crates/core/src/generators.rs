//! Parametric instance families.
//!
//! Every generator builds its mesh from an explicit parametrization, so the
//! `refine` parameter doubles the lattice resolution per round and
//! re-evaluates positions on the underlying surface. Identical parameters
//! give bit-identical coordinates.
//!
//! Disk-with-handles layout, in the x₁x₂-plane:
//! - an inner rectangle `[−wx, wx] × [−wy, wy]` meshed as a tensor lattice;
//! - a ring of quads from the rectangle boundary out to the unit circle,
//!   each rectangle boundary vertex paired with its radial projection;
//! - per handle, two square holes of side ε centered at `(±d, y₀)`, joined
//!   by an arch-shaped square tube (cross-section ε×ε, girth 4ε) whose legs
//!   rise to height `ε/4` and whose bar runs along x₁.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{EmbeddedMesh, MeshError, VertexId};

/// Hole centers sit at `x₁ = ±HOLE_OFFSET`.
pub const HOLE_OFFSET: f64 = 0.35;
/// Leg height of the handle arch, as a multiple of ε.
pub const LEG_HEIGHT: f64 = 0.25;
/// Lattice spacing of the disk families at `refine = 0`.
pub const DISK_SPACING: f64 = 0.2;
/// Documented constant in `δ ≤ c · 2π / N²` for the disk families.
pub const DEFICIT_CONSTANT: f64 = 7.0;
/// Width of the flat annulus inside the unit circle on the revolution patch.
pub const COLLAR_FLAT_WIDTH: f64 = 0.25;
/// Height of the lowest point of the torus tube above the x₁x₂-plane.
pub const TORUS_CLEARANCE: f64 = 0.4;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

type Key = (u8, i64, i64, i64);

/// Vertex registry keyed by logical lattice position plus a face list.
struct Builder {
    dim: usize,
    coords: Vec<f64>,
    keys: HashMap<Key, VertexId>,
    faces: Vec<[VertexId; 3]>,
}

impl Builder {
    fn new(dim: usize) -> Self {
        Self { dim, coords: Vec::new(), keys: HashMap::new(), faces: Vec::new() }
    }

    fn vertex(&mut self, key: Key, pos: impl FnOnce() -> Vec<f64>) -> VertexId {
        if let Some(&v) = self.keys.get(&key) {
            return v;
        }
        let p = pos();
        debug_assert_eq!(p.len(), self.dim);
        let id = self.coords.len() / self.dim;
        self.coords.extend(p);
        self.keys.insert(key, id);
        id
    }

    /// Quad split along the `a`–`c` diagonal.
    fn quad(&mut self, a: VertexId, b: VertexId, c: VertexId, d: VertexId) {
        self.faces.push([a, b, c]);
        self.faces.push([a, c, d]);
    }

    fn finish(self) -> Result<EmbeddedMesh, MeshError> {
        let faces = orient_consistently(self.faces);
        EmbeddedMesh::new(self.dim, self.coords, faces)
    }
}

/// Flip faces so that every shared edge is traversed in opposite directions,
/// keeping face 0 as given. Faces of a non-orientable input are left as the
/// search leaves them (validation rejects them later).
fn orient_consistently(mut faces: Vec<[VertexId; 3]>) -> Vec<[VertexId; 3]> {
    let mut by_edge: HashMap<(VertexId, VertexId), Vec<usize>> = HashMap::new();
    for (f, t) in faces.iter().enumerate() {
        for k in 0..3 {
            let (u, v) = (t[k], t[(k + 1) % 3]);
            by_edge.entry((u.min(v), u.max(v))).or_default().push(f);
        }
    }
    let mut done = vec![false; faces.len()];
    let has_directed = |t: &[VertexId; 3], u: VertexId, v: VertexId| (0..3).any(|k| t[k] == u && t[(k + 1) % 3] == v);
    for root in 0..faces.len() {
        if done[root] {
            continue;
        }
        done[root] = true;
        let mut stack = vec![root];
        while let Some(f) = stack.pop() {
            let t = faces[f];
            for k in 0..3 {
                let (u, v) = (t[k], t[(k + 1) % 3]);
                for &g in &by_edge[&(u.min(v), u.max(v))] {
                    if done[g] {
                        continue;
                    }
                    if has_directed(&faces[g], u, v) {
                        faces[g].swap(1, 2);
                    }
                    done[g] = true;
                    stack.push(g);
                }
            }
        }
    }
    faces
}

fn reverse_all(faces: &mut [[VertexId; 3]]) {
    faces.iter_mut().for_each(|t| t.swap(1, 2));
}

fn cells(len: f64, spacing: f64, refine: u32) -> usize {
    ((len / spacing).round() as usize).max(1) << refine
}

/// Lattice coordinates over consecutive break intervals; returns the
/// coordinates and the lattice index of every break.
fn lattice(breaks: &[f64], spacing: f64, refine: u32) -> (Vec<f64>, Vec<usize>) {
    let mut xs = vec![breaks[0]];
    let mut at = vec![0];
    for w in breaks.windows(2) {
        let n = cells(w[1] - w[0], spacing, refine);
        for k in 1..n {
            xs.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
        xs.push(w[1]);
        at.push(xs.len() - 1);
    }
    (xs, at)
}

fn check_eps(eps: f64) -> Result<(), GeneratorError> {
    if eps > 0.0 && eps <= 0.5 {
        Ok(())
    } else {
        Err(GeneratorError::OutOfRange(format!("eps must lie in (0, 0.5], got {eps}")))
    }
}

/// Disk with `handles` (each a hole pair at `(±HOLE_OFFSET, y₀)`) of girth 4ε.
fn disk_with_handles(eps: f64, handle_ys: &[f64], half: (f64, f64), refine: u32) -> Result<EmbeddedMesh, GeneratorError> {
    let e = 0.5 * eps;
    let d = HOLE_OFFSET;
    let (wx, wy) = half;
    let xb: Vec<f64> = if handle_ys.is_empty() { vec![-wx, 0.0, wx] } else { vec![-wx, -d - e, -d + e, d - e, d + e, wx] };
    let mut yb = vec![-wy];
    let mut ys_sorted = handle_ys.to_vec();
    ys_sorted.sort_by(f64::total_cmp);
    for &y in &ys_sorted {
        yb.extend([y - e, y + e]);
    }
    if handle_ys.is_empty() {
        yb.push(0.0);
    }
    yb.push(wy);
    let h = LEG_HEIGHT * eps;
    let zb = [0.0, h, h + eps];
    let (xs, xat) = lattice(&xb, DISK_SPACING, refine);
    let (ys, yat) = lattice(&yb, DISK_SPACING, refine);
    let (zs, zat) = lattice(&zb, DISK_SPACING, refine);
    let (nx, ny, nz) = (xs.len() - 1, ys.len() - 1, zs.len() - 1);

    // Occupied voxels of the arch solids and the hole cells they sit on.
    let mut occupied = std::collections::HashSet::new();
    let mut hole = std::collections::HashSet::new();
    for (hk, _) in ys_sorted.iter().enumerate() {
        let (j0, j1) = (yat[1 + 2 * hk], yat[2 + 2 * hk]);
        for j in j0..j1 {
            for (lo, hi) in [(xat[1], xat[2]), (xat[3], xat[4])] {
                for i in lo..hi {
                    hole.insert((i, j));
                    for k in 0..nz {
                        occupied.insert((i, j, k));
                    }
                }
            }
            for i in xat[1]..xat[4] {
                for k in zat[1]..nz {
                    occupied.insert((i, j, k));
                }
            }
        }
    }

    let mut b = Builder::new(3);
    let lat = |b: &mut Builder, i: usize, j: usize, k: usize| {
        b.vertex((0, i as i64, j as i64, k as i64), || vec![xs[i], ys[j], zs[k]])
    };

    for j in 0..ny {
        for i in 0..nx {
            if hole.contains(&(i, j)) {
                continue;
            }
            let (a, bb, c, dd) = (lat(&mut b, i, j, 0), lat(&mut b, i + 1, j, 0), lat(&mut b, i + 1, j + 1, 0), lat(&mut b, i, j + 1, 0));
            b.quad(a, bb, c, dd);
        }
    }
    let disk_faces = b.faces.len();

    let mut voxels: Vec<(usize, usize, usize)> = occupied.iter().copied().collect();
    voxels.sort_unstable();
    for &(i, j, k) in &voxels {
        let free = |di: i64, dj: i64, dk: i64| {
            let (a, bb, c) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
            a < 0 || bb < 0 || c < 0 || !occupied.contains(&(a as usize, bb as usize, c as usize))
        };
        // (normal direction, four lattice corners)
        let faces: [(bool, [(usize, usize, usize); 4]); 6] = [
            (free(-1, 0, 0), [(i, j, k), (i, j + 1, k), (i, j + 1, k + 1), (i, j, k + 1)]),
            (free(1, 0, 0), [(i + 1, j, k), (i + 1, j + 1, k), (i + 1, j + 1, k + 1), (i + 1, j, k + 1)]),
            (free(0, -1, 0), [(i, j, k), (i + 1, j, k), (i + 1, j, k + 1), (i, j, k + 1)]),
            (free(0, 1, 0), [(i, j + 1, k), (i + 1, j + 1, k), (i + 1, j + 1, k + 1), (i, j + 1, k + 1)]),
            (free(0, 0, -1) && k > 0, [(i, j, k), (i + 1, j, k), (i + 1, j + 1, k), (i, j + 1, k)]),
            (free(0, 0, 1), [(i, j, k + 1), (i + 1, j, k + 1), (i + 1, j + 1, k + 1), (i, j + 1, k + 1)]),
        ];
        for (emit, q) in faces {
            if emit {
                let v: Vec<VertexId> = q.iter().map(|&(a, bb, c)| lat(&mut b, a, bb, c)).collect();
                b.quad(v[0], v[1], v[2], v[3]);
            }
        }
    }

    // Rectangle boundary, counter-clockwise from (−wx, −wy).
    let mut rim: Vec<(usize, usize)> = Vec::with_capacity(2 * (nx + ny));
    rim.extend((0..nx).map(|i| (i, 0)));
    rim.extend((0..ny).map(|j| (nx, j)));
    rim.extend((1..=nx).rev().map(|i| (i, ny)));
    rim.extend((1..=ny).rev().map(|j| (0, j)));
    let nr = cells(0.3, DISK_SPACING, refine);
    let n = rim.len();
    let ring = |b: &mut Builder, s: usize, r: usize| {
        let s = s % n;
        let (i, j) = rim[s];
        if r == 0 {
            return lat(b, i, j, 0);
        }
        let (px, py) = (xs[i], ys[j]);
        let rho = px.hypot(py);
        let (cx, cy) = (px / rho, py / rho);
        b.vertex((1, s as i64, r as i64, 0), || {
            if r == nr {
                vec![cx, cy, 0.0]
            } else {
                let t = r as f64 / nr as f64;
                vec![px + t * (cx - px), py + t * (cy - py), 0.0]
            }
        })
    };
    for s in 0..n {
        for r in 0..nr {
            let (a, bb, c, dd) = (ring(&mut b, s, r), ring(&mut b, s + 1, r), ring(&mut b, s + 1, r + 1), ring(&mut b, s, r + 1));
            b.quad(a, bb, c, dd);
        }
    }

    let mut faces = orient_consistently(std::mem::take(&mut b.faces));
    // Disk faces face +x₃.
    let t = faces[0];
    let (p0, p1, p2) = (&b.coords[3 * t[0]..3 * t[0] + 3], &b.coords[3 * t[1]..3 * t[1] + 3], &b.coords[3 * t[2]..3 * t[2] + 3]);
    let nz_sign = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    debug_assert!(disk_faces > 0);
    if nz_sign < 0.0 {
        reverse_all(&mut faces);
    }
    Ok(EmbeddedMesh::new(3, b.coords, faces)?)
}

/// Unit disk in the x₁x₂-plane; boundary vertices exactly on the circle.
pub fn gen_unit_disk(refine: u32) -> Result<EmbeddedMesh, GeneratorError> {
    disk_with_handles(0.1, &[], (0.5, 0.5), refine)
}

/// Unit disk with one thin handle of girth 4ε: `g = 1`, `b = 1`.
pub fn gen_handle_disk(eps: f64, refine: u32) -> Result<EmbeddedMesh, GeneratorError> {
    check_eps(eps)?;
    disk_with_handles(eps, &[0.0], (0.8, 0.4), refine)
}

/// Unit disk with two thin handles at `x₂ = ±0.28`: `g = 2`, `b = 1`.
pub fn gen_genus2_disk(eps: f64, refine: u32) -> Result<EmbeddedMesh, GeneratorError> {
    check_eps(eps)?;
    disk_with_handles(eps, &[-0.28, 0.28], (0.8, 0.55), refine)
}

/// Flat torus grid in ℝ⁴: `(u, v) ↦ (cos u, sin u, cos v, sin v)/√2`.
pub fn gen_clifford_torus(n: usize) -> Result<EmbeddedMesh, GeneratorError> {
    if n < 3 {
        return Err(GeneratorError::OutOfRange(format!("grid size must be at least 3, got {n}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut coords = Vec::with_capacity(4 * n * n);
    for i in 0..n {
        let u = 2.0 * PI * i as f64 / n as f64;
        for j in 0..n {
            let v = 2.0 * PI * j as f64 / n as f64;
            coords.extend([s * u.cos(), s * u.sin(), s * v.cos(), s * v.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % n) * n + j % n;
    let mut faces = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(EmbeddedMesh::new(4, coords, faces)?)
}

/// 7-vertex torus (the Möbius–Császár triangulation, faces `{i, i+1, i+3}`
/// and `{i, i+3, i+2}` mod 7), placed on a torus of revolution with vertex
/// `i` at angles `2π·(i, 3i)/7`.
pub fn gen_csaszar() -> EmbeddedMesh {
    let (big, small) = (3.0, 1.0);
    let mut coords = Vec::with_capacity(21);
    for i in 0..7 {
        let u = 2.0 * PI * i as f64 / 7.0;
        let v = 2.0 * PI * ((3 * i) % 7) as f64 / 7.0;
        let rho = big + small * v.cos();
        coords.extend([rho * u.cos(), rho * u.sin(), small * v.sin()]);
    }
    let mut faces = Vec::with_capacity(14);
    for i in 0..7 {
        faces.push([i, (i + 1) % 7, (i + 3) % 7]);
        faces.push([i, (i + 3) % 7, (i + 2) % 7]);
    }
    EmbeddedMesh::new(3, coords, faces).expect("Császár torus is a valid mesh")
}

/// Torus of revolution (core radius `major`, tube radius `minor`, vertical
/// axis through `(−major, 0)`) with a disk around the tube's lowest point
/// removed. A collar joins the hole to the unit circle: the hole loop is
/// blended to the circle of radius `1 − COLLAR_FLAT_WIDTH` (linear in x₁x₂,
/// height `z·(1 − (3t² − 2t³))`), then a flat annulus reaches the unit circle.
pub fn gen_revolution_torus_patch(major: f64, minor: f64, refine: u32) -> Result<EmbeddedMesh, GeneratorError> {
    if !(minor > 0.0 && major > minor) {
        return Err(GeneratorError::OutOfRange(format!("need R > r > 0, got R={major}, r={minor}")));
    }
    if minor * std::f64::consts::FRAC_1_SQRT_2 >= 1.0 - COLLAR_FLAT_WIDTH {
        return Err(GeneratorError::OutOfRange(format!("tube radius {minor} too large for the unit collar")));
    }
    let scale = 1usize << refine;
    let n_theta = 8 * scale;
    let q = scale; // hole half-width in θ cells: π/4
    let half_theta = PI / 4.0;
    let phi_hole = (minor * half_theta / major).min(PI / 4.0);
    // φ lattice: hole interval [−φh, φh] with 2q cells, the rest with 10·scale cells.
    let n_rest = 10 * scale;
    let mut phis: Vec<f64> = (0..2 * q).map(|k| -phi_hole + 2.0 * phi_hole * k as f64 / (2 * q) as f64).collect();
    phis.extend((0..n_rest).map(|k| phi_hole + (2.0 * PI - 2.0 * phi_hole) * k as f64 / n_rest as f64));
    let n_phi = phis.len();
    let theta = |j: usize| -PI / 2.0 + 2.0 * PI * (j as f64 - (n_theta / 2) as f64) / n_theta as f64;
    let zc = minor + TORUS_CLEARANCE;
    let torus_point = |phi: f64, th: f64| {
        let rho = major + minor * th.cos();
        vec![-major + rho * phi.cos(), rho * phi.sin(), zc + minor * th.sin()]
    };
    // hole cells: i in [0, 2q), j in [n_theta/2 − q, n_theta/2 + q)
    let (i0, i1) = (0usize, 2 * q);
    let (j0, j1) = (n_theta / 2 - q, n_theta / 2 + q);
    let in_hole = |i: usize, j: usize| i >= i0 && i < i1 && j >= j0 && j < j1;

    let mut b = Builder::new(3);
    let tv = |b: &mut Builder, i: usize, j: usize| {
        let (i, j) = (i % n_phi, j % n_theta);
        b.vertex((2, i as i64, j as i64, 0), || torus_point(phis[i], theta(j)))
    };
    for i in 0..n_phi {
        for j in 0..n_theta {
            if in_hole(i, j) {
                continue;
            }
            let (a, bb, c, d) = (tv(&mut b, i, j), tv(&mut b, i + 1, j), tv(&mut b, i + 1, j + 1), tv(&mut b, i, j + 1));
            b.quad(a, bb, c, d);
        }
    }

    let mut hole_loop: Vec<(usize, usize)> = Vec::new();
    hole_loop.extend((i0..i1).map(|i| (i, j0)));
    hole_loop.extend((j0..j1).map(|j| (i1, j)));
    hole_loop.extend((i0 + 1..=i1).rev().map(|i| (i, j1)));
    hole_loop.extend((j0 + 1..=j1).rev().map(|j| (i0, j)));
    let n = hole_loop.len();
    let m_blend = 2 * scale;
    let m_flat = scale;
    let inner = 1.0 - COLLAR_FLAT_WIDTH;
    let collar = |b: &mut Builder, s: usize, r: usize| {
        let s = s % n;
        let (i, j) = hole_loop[s];
        if r == 0 {
            return tv(b, i, j);
        }
        let h = torus_point(phis[i % n_phi], theta(j));
        let ang = h[1].atan2(h[0]);
        let (cx, cy) = (ang.cos(), ang.sin());
        b.vertex((3, s as i64, r as i64, 0), || {
            if r <= m_blend {
                let t = r as f64 / m_blend as f64;
                let beta = t * t * (3.0 - 2.0 * t);
                vec![h[0] + t * (inner * cx - h[0]), h[1] + t * (inner * cy - h[1]), h[2] * (1.0 - beta)]
            } else if r == m_blend + m_flat {
                vec![cx, cy, 0.0]
            } else {
                let t = (r - m_blend) as f64 / m_flat as f64;
                let rho = inner + t * (1.0 - inner);
                vec![rho * cx, rho * cy, 0.0]
            }
        })
    };
    for s in 0..n {
        for r in 0..m_blend + m_flat {
            let (a, bb, c, d) = (collar(&mut b, s, r), collar(&mut b, s + 1, r), collar(&mut b, s + 1, r + 1), collar(&mut b, s, r + 1));
            b.quad(a, bb, c, d);
        }
    }
    Ok(b.finish()?)
}

/// Unit square `[0,1]²` in the plane, two triangles.
pub fn gen_square() -> EmbeddedMesh {
    EmbeddedMesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0], vec![[0, 1, 2], [0, 2, 3]]).expect("square")
}

/// Unit square rotated by `theta` about the x₂-axis in ℝ³.
pub fn gen_tilted_square(theta: f64) -> EmbeddedMesh {
    let (c, s) = (theta.cos(), theta.sin());
    EmbeddedMesh::new(
        3,
        vec![0.0, 0.0, 0.0, c, 0.0, s, c, 1.0, s, 0.0, 1.0, 0.0],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("tilted square")
}

/// Move every non-boundary vertex by a random offset of norm at most
/// `fraction · min edge length`.
pub fn perturb(mesh: &EmbeddedMesh, fraction: f64, seed: u64) -> Result<EmbeddedMesh, GeneratorError> {
    if !(0.0..0.5).contains(&fraction) {
        return Err(GeneratorError::OutOfRange(format!("perturbation fraction {fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = mesh.dim();
    let radius = fraction * mesh.min_edge_length();
    let mut on_boundary = vec![false; mesh.num_vertices()];
    for lp in mesh.boundary_loops() {
        for &v in lp {
            on_boundary[v] = true;
        }
    }
    let mut coords = mesh.coords().to_vec();
    for v in 0..mesh.num_vertices() {
        // rejection-sample the unit ball
        let offset = loop {
            let o: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if o.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                break o;
            }
        };
        if on_boundary[v] {
            continue;
        }
        for k in 0..dim {
            coords[v * dim + k] += radius * offset[k];
        }
    }
    Ok(mesh.with_coords(coords)?)
}

/// Instance family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    HandleDisk {
        eps: f64,
        #[serde(default)]
        refine: u32,
    },
    Genus2Disk {
        eps: f64,
        #[serde(default)]
        refine: u32,
    },
    RevolutionTorus {
        major: f64,
        minor: f64,
        #[serde(default)]
        refine: u32,
    },
    CliffordTorus {
        n: usize,
    },
    Csaszar,
    UnitDisk {
        #[serde(default)]
        refine: u32,
    },
}

/// A family, its parameters and the seed of an optional vertex jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
    /// Jitter radius as a fraction of the minimum edge length; 0 disables it.
    #[serde(default)]
    pub jitter: f64,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        Self { family, seed: 0, jitter: 0.0 }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::HandleDisk { .. } => "handle_disk",
            Family::Genus2Disk { .. } => "genus2_disk",
            Family::RevolutionTorus { .. } => "revolution_torus",
            Family::CliffordTorus { .. } => "clifford_torus",
            Family::Csaszar => "csaszar",
            Family::UnitDisk { .. } => "unit_disk",
        }
    }

    pub fn refine(&self) -> u32 {
        match self.family {
            Family::HandleDisk { refine, .. }
            | Family::Genus2Disk { refine, .. }
            | Family::RevolutionTorus { refine, .. }
            | Family::UnitDisk { refine } => refine,
            Family::CliffordTorus { .. } | Family::Csaszar => 0,
        }
    }

    /// `key=value` pairs joined by `;`, in a fixed order.
    pub fn params(&self) -> String {
        let mut p = match self.family {
            Family::HandleDisk { eps, refine } | Family::Genus2Disk { eps, refine } => format!("eps={eps};refine={refine}"),
            Family::RevolutionTorus { major, minor, refine } => format!("R={major};r={minor};refine={refine}"),
            Family::CliffordTorus { n } => format!("n={n}"),
            Family::Csaszar => String::new(),
            Family::UnitDisk { refine } => format!("refine={refine}"),
        };
        if self.jitter > 0.0 {
            if !p.is_empty() {
                p.push(';');
            }
            p.push_str(&format!("jitter={};seed={}", self.jitter, self.seed));
        }
        p
    }

    pub fn build(&self) -> Result<EmbeddedMesh, GeneratorError> {
        let mesh = match self.family {
            Family::HandleDisk { eps, refine } => gen_handle_disk(eps, refine)?,
            Family::Genus2Disk { eps, refine } => gen_genus2_disk(eps, refine)?,
            Family::RevolutionTorus { major, minor, refine } => gen_revolution_torus_patch(major, minor, refine)?,
            Family::CliffordTorus { n } => gen_clifford_torus(n)?,
            Family::Csaszar => gen_csaszar(),
            Family::UnitDisk { refine } => gen_unit_disk(refine)?,
        };
        if self.jitter > 0.0 {
            perturb(&mesh, self.jitter, self.seed)
        } else {
            Ok(mesh)
        }
    }

    /// Header comments for SMESH output.
    pub fn comments(&self) -> Vec<String> {
        let mut c = vec![format!("familyspec: {}", serde_json::to_string(self).expect("spec serializes"))];
        match self.family {
            Family::RevolutionTorus { .. } => c.push(format!(
                "collar: blend hole loop to radius {} with height factor 1-(3t^2-2t^3), flat annulus width {}",
                1.0 - COLLAR_FLAT_WIDTH,
                COLLAR_FLAT_WIDTH
            )),
            Family::HandleDisk { .. } | Family::Genus2Disk { .. } => c.push(format!(
                "handles: square holes of side eps at x1=+-{HOLE_OFFSET}, arch tube eps x eps, leg height {LEG_HEIGHT}*eps"
            )),
            _ => {}
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{validate, write_smesh};

    #[test]
    fn csaszar_counts() {
        let m = gen_csaszar();
        let info = validate(&m);
        assert_eq!((info.vertices, info.edges, info.faces), (7, 21, 14));
        assert_eq!((info.genus, info.boundary_count), (1, 0));
        assert!(!info.unit_circle_boundary);
        assert!((0..7).all(|v| m.neighbors(v).len() == 6));
    }

    #[test]
    fn clifford_counts_and_area() {
        let m = gen_clifford_torus(8).unwrap();
        let info = validate(&m);
        assert_eq!((info.vertices, info.edges, info.faces, info.genus, info.boundary_count), (64, 192, 128, 1, 0));
        let big = gen_clifford_torus(64).unwrap();
        let exact = 2.0 * PI * PI;
        assert!((big.area() - exact).abs() / exact < 0.005);
        assert_eq!(gen_clifford_torus(3).unwrap().genus(), 1);
        assert!(gen_clifford_torus(2).is_err());
    }

    #[test]
    fn unit_disk_area_and_flags() {
        let m = gen_unit_disk(4).unwrap();
        let info = validate(&m);
        assert_eq!((info.genus, info.boundary_count), (0, 1));
        assert!(info.unit_circle_boundary);
        assert!((m.area() - PI).abs() / PI < 0.01);
    }

    #[test]
    fn handle_disk_topology() {
        for (eps, refine) in [(0.4, 2), (0.05, 1), (0.5, 0)] {
            let m = gen_handle_disk(eps, refine).unwrap();
            let info = validate(&m);
            assert_eq!((info.genus, info.boundary_count), (1, 1), "eps {eps}");
            assert!(info.unit_circle_boundary);
        }
        let m = gen_handle_disk(0.4, 2).unwrap();
        assert!(m.area() > PI && m.area() < PI + 2.0, "{}", m.area());
        assert!(gen_handle_disk(0.6, 0).is_err());
        assert!(gen_handle_disk(0.0, 0).is_err());
    }

    #[test]
    fn handle_disk_area_monotone_in_eps() {
        let areas: Vec<f64> = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5].iter().map(|&e| gen_handle_disk(e, 0).unwrap().area()).collect();
        assert!(areas.windows(2).all(|w| w[0] < w[1]), "{areas:?}");
    }

    #[test]
    fn boundary_deficit_bound() {
        for m in [gen_handle_disk(0.2, 1).unwrap(), gen_genus2_disk(0.1, 1).unwrap(), gen_unit_disk(2).unwrap()] {
            let info = validate(&m);
            let nb = m.boundary_loops()[0].len() as f64;
            let delta = info.inscription_deficit.unwrap();
            assert!(delta > 0.0 && delta <= DEFICIT_CONSTANT * 2.0 * PI / (nb * nb), "{delta} vs N={nb}");
        }
    }

    #[test]
    fn genus2_topology() {
        let m = gen_genus2_disk(0.2, 1).unwrap();
        let info = validate(&m);
        assert_eq!((info.genus, info.boundary_count), (2, 1));
        assert!(info.unit_circle_boundary);
        assert!(gen_genus2_disk(0.6, 0).is_err());
    }

    #[test]
    fn revolution_patch_topology() {
        let m = gen_revolution_torus_patch(2.0, 0.5, 2).unwrap();
        let info = validate(&m);
        assert_eq!((info.genus, info.boundary_count), (1, 1));
        assert!(info.unit_circle_boundary);
        assert!(matches!(gen_revolution_torus_patch(0.5, 0.5, 0), Err(GeneratorError::OutOfRange(_))));
        assert!(gen_revolution_torus_patch(0.3, 0.5, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let spec = FamilySpec { family: Family::HandleDisk { eps: 0.2, refine: 1 }, seed: 7, jitter: 0.01 };
        let a = write_smesh(&spec.build().unwrap(), &spec.comments());
        let b = write_smesh(&spec.build().unwrap(), &spec.comments());
        assert_eq!(a, b);
        let other = FamilySpec { seed: 8, ..spec.clone() };
        assert_ne!(a, write_smesh(&other.build().unwrap(), &other.comments()));
    }

    #[test]
    fn spec_json_shape() {
        let s: FamilySpec = serde_json::from_str(r#"{"family":"handle_disk","eps":0.1,"refine":3}"#).unwrap();
        assert_eq!(s.family, Family::HandleDisk { eps: 0.1, refine: 3 });
        assert_eq!(s.params(), "eps=0.1;refine=3");
        let t: FamilySpec = serde_json::from_str(r#"{"family":"revolution_torus","major":2,"minor":0.5,"refine":2}"#).unwrap();
        assert_eq!(t.name(), "revolution_torus");
    }
}
