//! SMESH and OBJ readers, SMESH writer.
//!
//! SMESH layout: `SMESH <n> <V> <F>` on the first line, then `V` lines of `n`
//! reals and `F` lines of three zero-based vertex indices. `#` starts a
//! comment that runs to the end of the line.

use std::fmt::Write as _;
use std::io::Read;

use super::{EmbeddedMesh, MeshError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Smesh,
    Obj,
}

impl MeshFormat {
    /// Guess from a file extension; defaults to SMESH.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("obj") => MeshFormat::Obj,
            _ => MeshFormat::Smesh,
        }
    }
}

pub fn load_mesh(mut source: impl Read, format: MeshFormat) -> Result<EmbeddedMesh, MeshError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    match format {
        MeshFormat::Smesh => parse_smesh(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T, MeshError> {
    tok.parse().map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

pub fn parse_smesh(text: &str) -> Result<EmbeddedMesh, MeshError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing SMESH header"))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 4 || tok[0] != "SMESH" {
        return Err(parse_err(hl, "expected `SMESH <n> <V> <F>`"));
    }
    let dim: usize = parse_num(hl, tok[1])?;
    let nv: usize = parse_num(hl, tok[2])?;
    let nf: usize = parse_num(hl, tok[3])?;
    if dim < 2 {
        return Err(MeshError::BadDimension(dim));
    }

    let mut coords = Vec::with_capacity(nv * dim);
    for i in 0..nv {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(hl, format!("expected {nv} vertex lines, found {i}")))?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != dim {
            return Err(parse_err(ln, format!("expected {dim} coordinates, found {}", vals.len())));
        }
        for v in vals {
            coords.push(parse_num::<f64>(ln, v)?);
        }
    }
    let mut faces = Vec::with_capacity(nf);
    for i in 0..nf {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(hl, format!("expected {nf} face lines, found {i}")))?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != 3 {
            return Err(parse_err(ln, format!("expected 3 indices, found {}", vals.len())));
        }
        faces.push([parse_num(ln, vals[0])?, parse_num(ln, vals[1])?, parse_num(ln, vals[2])?]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after faces"));
    }
    EmbeddedMesh::new(dim, coords, faces)
}

/// Wavefront OBJ (`v x y z`, triangular `f` records; other records ignored).
pub fn parse_obj(text: &str) -> Result<EmbeddedMesh, MeshError> {
    let mut coords = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in content_lines(text) {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let vals: Vec<&str> = tok.collect();
                // optional homogeneous w is not supported
                if vals.len() != 3 {
                    return Err(MeshError::ObjDimension);
                }
                for v in vals {
                    coords.push(parse_num::<f64>(ln, v)?);
                }
            }
            Some("f") => {
                let nv = (coords.len() / 3) as i64;
                let idx: Vec<usize> = tok
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = parse_num(ln, head)?;
                        let resolved = if i < 0 { nv + i } else { i - 1 };
                        if resolved < 0 {
                            return Err(parse_err(ln, format!("bad vertex reference `{t}`")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(ln, format!("only triangles are supported, got {} vertices", idx.len())));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    EmbeddedMesh::new(3, coords, faces)
}

/// Serialize to SMESH with 17 significant digits; `comments` are emitted as
/// `# ` lines right after the header.
pub fn write_smesh(mesh: &EmbeddedMesh, comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "SMESH {} {} {}", mesh.dim(), mesh.num_vertices(), mesh.num_faces());
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    for v in 0..mesh.num_vertices() {
        let row: Vec<String> = mesh.point(v).iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "{} {} {}", f[0], f[1], f[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "SMESH 2 4 2\n# unit square\n0 0\n1 0\n1 1\n0 1 # last vertex\n0 1 2\n0 2 3\n";

    #[test]
    fn parses_square() {
        let m = parse_smesh(SQUARE).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (4, 5, 2));
        assert_eq!(m.genus(), 0);
        assert_eq!(m.boundary_loops().len(), 1);
    }

    #[test]
    fn writer_round_trips_exactly() {
        let m = EmbeddedMesh::new(
            3,
            vec![0.1, 0.2, 0.3, 1.0 / 3.0, 0.0, 1e-300, 0.0, std::f64::consts::PI, -2.5],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let text = write_smesh(&m, &["familyspec: test".to_string()]);
        assert!(text.lines().nth(1).unwrap().starts_with("# familyspec"));
        let back = parse_smesh(&text).unwrap();
        assert_eq!(back.coords(), m.coords());
        assert_eq!(back.faces(), m.faces());
        assert_eq!(write_smesh(&back, &["familyspec: test".to_string()]), text);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_smesh("MESH 2 1 0\n"), Err(MeshError::Parse { line: 1, .. })));
        assert!(matches!(parse_smesh("SMESH 2 3 1\n0 0\n1 0\n"), Err(MeshError::Parse { .. })));
        assert!(matches!(parse_smesh("SMESH 2 3 1\n0 0\n1 x\n0 1\n0 1 2\n"), Err(MeshError::Parse { line: 3, .. })));
        assert!(matches!(
            parse_smesh("SMESH 2 3 1\n0 0\n1 0\n0 1\n0 1 2\n0 1 2\n"),
            Err(MeshError::Parse { line: 6, .. })
        ));
        let nonmanifold = "SMESH 3 5 3\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 1 2\n1 0 3\n0 1 4\n";
        assert!(matches!(parse_smesh(nonmanifold), Err(MeshError::NonManifoldEdge(0, 1, 3))));
    }

    #[test]
    fn obj_triangles() {
        let text = "# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.num_faces(), 1);
        assert!((m.area() - 0.5).abs() < 1e-15);
        assert!(matches!(parse_obj("v 0 0\nv 1 0\nv 0 1\nf 1 2 3\n"), Err(MeshError::ObjDimension)));
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"),
            Err(MeshError::Parse { .. })
        ));
    }
}
