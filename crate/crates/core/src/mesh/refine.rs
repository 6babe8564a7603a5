use super::{on_unit_circle, EmbeddedMesh, MeshError};

/// `rounds` passes of 1→4 midpoint subdivision.
///
/// Midpoints of boundary edges whose endpoints both lie on the unit circle
/// are pushed back onto the circle, so the boundary stays inscribed.
/// New vertices are appended in edge order, which keeps the output
/// deterministic.
pub fn refine(mesh: &EmbeddedMesh, rounds: u32) -> Result<EmbeddedMesh, MeshError> {
    let mut current = mesh.clone();
    for _ in 0..rounds {
        current = refine_once(&current)?;
    }
    Ok(current)
}

fn refine_once(mesh: &EmbeddedMesh) -> Result<EmbeddedMesh, MeshError> {
    let dim = mesh.dim();
    let nv = mesh.num_vertices();
    let mut coords = mesh.coords().to_vec();
    coords.reserve(mesh.num_edges() * dim);
    for (e, &[u, v]) in mesh.edges().iter().enumerate() {
        let (a, b) = (mesh.point(u), mesh.point(v));
        let mut mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        if mesh.is_boundary_edge(e) && on_unit_circle(a) && on_unit_circle(b) {
            let r = mid[0].hypot(mid[1]);
            mid[0] /= r;
            mid[1] /= r;
            mid[2..].iter_mut().for_each(|x| *x = 0.0);
        }
        coords.extend(mid);
    }
    let mut faces = Vec::with_capacity(mesh.num_faces() * 4);
    for f in 0..mesh.num_faces() {
        let [a, b, c] = mesh.face(f);
        let [eab, ebc, eca] = mesh.face_edges(f);
        let (ab, bc, ca) = (nv + eab, nv + ebc, nv + eca);
        faces.push([a, ab, ca]);
        faces.push([ab, b, bc]);
        faces.push([ca, bc, c]);
        faces.push([ab, bc, ca]);
    }
    EmbeddedMesh::new(dim, coords, faces)
}
