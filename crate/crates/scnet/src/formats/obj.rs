use std::fmt::Write as _;

use scnet_core::{TriangleMesh, Vec3};

use super::{FormatError, FormatResult};

/// Parses the `v` and `f` lines of a Wavefront OBJ. Faces use 1-based
/// vertex indices (texture/normal suffixes are ignored) and polygons are
/// fan-triangulated. Every other statement is skipped.
pub fn parse_obj(text: &str) -> FormatResult<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces: Vec<(usize, Vec<u64>)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let bad = |msg: &str| FormatError::Corrupt(format!("line {line_no}: {msg}"));
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|_| bad("bad vertex coordinate")))
                    .collect::<FormatResult<_>>()?;
                if c.len() != 3 {
                    return Err(bad("vertex needs three coordinates"));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<u64> = it
                    .map(|tok| {
                        let head = tok.split('/').next().unwrap_or("");
                        head.parse::<u64>().ok().filter(|&i| i >= 1).ok_or_else(|| bad("face index must be a positive integer"))
                    })
                    .collect::<FormatResult<_>>()?;
                if idx.len() < 3 {
                    return Err(bad("face needs at least three vertices"));
                }
                faces.push((line_no, idx));
            }
            _ => {}
        }
    }
    let mut triangles = Vec::new();
    for (line_no, idx) in faces {
        let to = |i: u64| -> FormatResult<u32> {
            if i as usize > vertices.len() {
                return Err(FormatError::Corrupt(format!("line {line_no}: vertex {i} out of range")));
            }
            Ok((i - 1) as u32)
        };
        for k in 1..idx.len() - 1 {
            triangles.push([to(idx[0])?, to(idx[k])?, to(idx[k + 1])?]);
        }
    }
    TriangleMesh::new(vertices, triangles).map_err(|e| FormatError::Corrupt(e.to_string()))
}

/// Writes vertices and triangles with round-trippable float formatting.
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use scnet_core::geometry::primitives::cuboid;

    #[test]
    fn quad_is_fan_triangulated() {
        let m = parse_obj("# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n").unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn mesh_round_trips_through_text() {
        let m = cuboid(Vec3::new(0.1, 0.2, 0.3));
        assert_eq!(parse_obj(&write_obj(&m)).unwrap(), m);
    }

    #[test]
    fn bad_indices_are_errors() {
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n").is_err());
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").is_err());
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -1 -2 -3\n").is_err());
        assert!(parse_obj("v 0 0\n").is_err());
        assert!(parse_obj("v 0 0 0\nf 1 1\n").is_err());
    }
}
