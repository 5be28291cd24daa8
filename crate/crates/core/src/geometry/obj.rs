//! Loader for the `v` / `vt` / `f` subset of Wavefront OBJ.
//!
//! Every face must be a triangle and every face corner must carry a texture
//! coordinate. Normals, groups, materials and smoothing statements are skipped.

use std::path::{Path, PathBuf};

use super::mesh::{Facet, Mesh};
use crate::error::{Error, Result};

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_obj(&text, path)
}

pub fn parse_obj(text: &str, path: impl AsRef<Path>) -> Result<Mesh> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let err = |line: usize, message: String| Error::Parse {
        path: path.clone(),
        line,
        message,
    };

    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut uvs: Vec<[f64; 2]> = Vec::new();
    let mut faces: Vec<[(usize, usize); 3]> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "v" => {
                let xs = parse_floats(tokens, 3).map_err(|m| err(line_no, m))?;
                positions.push([xs[0], xs[1], xs[2]]);
            }
            "vt" => {
                let xs = parse_floats(tokens, 2).map_err(|m| err(line_no, m))?;
                if xs.iter().any(|u| !(0.0..=1.0).contains(u)) {
                    return Err(err(
                        line_no,
                        format!("texture coordinate ({}, {}) outside [0,1]", xs[0], xs[1]),
                    ));
                }
                uvs.push([xs[0], xs[1]]);
            }
            "f" => {
                let corners: Vec<&str> = tokens.collect();
                if corners.len() != 3 {
                    return Err(err(
                        line_no,
                        format!("non-triangular face ({} vertices)", corners.len()),
                    ));
                }
                let mut refs = [(0usize, 0usize); 3];
                for (k, corner) in corners.iter().enumerate() {
                    refs[k] = parse_corner(corner, positions.len(), uvs.len())
                        .map_err(|m| err(line_no, m))?;
                }
                faces.push(refs);
            }
            _ => {}
        }
    }

    let mut facets = Vec::with_capacity(faces.len());
    for refs in faces {
        facets.push(Facet {
            vertices: refs.map(|(v, _)| v),
            uvs: refs.map(|(_, t)| uvs[t]),
        });
    }
    if facets.is_empty() {
        return Err(err(text.lines().count().max(1), "no faces found".into()));
    }
    Mesh::new(positions, facets)
}

fn parse_floats<'a>(
    tokens: impl Iterator<Item = &'a str>,
    want: usize,
) -> std::result::Result<Vec<f64>, String> {
    let xs: Vec<f64> = tokens
        .take(want)
        .map(|t| t.parse::<f64>().map_err(|_| format!("invalid number '{t}'")))
        .collect::<std::result::Result<_, _>>()?;
    if xs.len() < want {
        return Err(format!("expected {want} components, found {}", xs.len()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err("non-finite component".into());
    }
    Ok(xs)
}

/// Resolves `v/vt`, `v/vt/vn` into zero-based (vertex, uv) indices.
fn parse_corner(
    corner: &str,
    n_pos: usize,
    n_uv: usize,
) -> std::result::Result<(usize, usize), String> {
    let mut parts = corner.split('/');
    let v = parts.next().unwrap_or("");
    let vt = parts.next().unwrap_or("");
    if vt.is_empty() {
        return Err(format!("face corner '{corner}' has no texture coordinate"));
    }
    Ok((resolve(v, n_pos, "vertex")?, resolve(vt, n_uv, "texture coordinate")?))
}

fn resolve(token: &str, count: usize, what: &str) -> std::result::Result<usize, String> {
    let idx: i64 = token
        .parse()
        .map_err(|_| format!("invalid {what} index '{token}'"))?;
    let resolved = match idx {
        0 => None,
        i if i > 0 => Some(i as usize - 1),
        i => count.checked_sub(i.unsigned_abs() as usize),
    };
    match resolved {
        Some(r) if r < count => Ok(r),
        _ => Err(format!(
            "{what} index {idx} out of range ({count} defined so far)"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n";

    #[test]
    fn single_triangle() {
        let mesh = parse_obj(TRIANGLE, "tri.obj").unwrap();
        assert_eq!(mesh.facet_count(), 1);
        assert_eq!(mesh.facet(0).uvs, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn quad_is_rejected_with_line_number() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1 4/1\n";
        let e = parse_obj(text, "quad.obj").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("non-triangular face"), "{msg}");
        assert!(msg.contains("quad.obj:6"), "{msg}");
    }

    #[test]
    fn missing_texture_coordinate_is_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n";
        let msg = parse_obj(text, "n.obj").unwrap_err().to_string();
        assert!(msg.contains("no texture coordinate"), "{msg}");
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
        assert!(parse_obj(text, "n.obj").is_err());
    }

    #[test]
    fn out_of_range_index() {
        let text = "v 0 0 0\nv 1 0 0\nvt 0 0\nf 1/1 2/1 3/1\n";
        let msg = parse_obj(text, "r.obj").unwrap_err().to_string();
        assert!(msg.contains("out of range"), "{msg}");
        assert!(msg.contains("r.obj:4"), "{msg}");
    }

    #[test]
    fn bad_number_reports_line() {
        let text = "v 0 0 0\nv 1 zz 0\n";
        let msg = parse_obj(text, "b.obj").unwrap_err().to_string();
        assert!(msg.contains("b.obj:2"), "{msg}");
    }

    #[test]
    fn negative_indices_and_normals() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 1\nf -3/-3/1 -2/-2/1 -1/-1/1\n";
        let mesh = parse_obj(text, "neg.obj").unwrap();
        assert_eq!(mesh.facet(0).vertices, [0, 1, 2]);
        assert_eq!(mesh.facet(0).uvs[2], [0.0, 1.0]);
    }

    #[test]
    fn uv_outside_unit_square_is_rejected() {
        let text = "v 0 0 0\nvt 1.5 0\n";
        assert!(parse_obj(text, "uv.obj").is_err());
    }

    #[test]
    fn obj_string_round_trip() {
        let mesh = parse_obj(TRIANGLE, "tri.obj").unwrap();
        let again = parse_obj(&mesh.to_obj_string(), "again.obj").unwrap();
        assert_eq!(mesh, again);
    }
}
