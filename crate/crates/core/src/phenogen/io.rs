//! OBJ and ASCII STL reading and writing.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{normalize, PhenotypeMesh, Provenance, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    StlAscii,
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "stl" | "stl-ascii" | "stl_ascii" => Ok(MeshFormat::StlAscii),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn write_mesh(mesh: &PhenotypeMesh, format: MeshFormat) -> Vec<u8> {
    let mut out = String::new();
    match format {
        MeshFormat::Obj => {
            if let Some(id) = mesh.provenance.genotype_id {
                let _ = writeln!(out, "# genotype {id}, generation {}", mesh.provenance.generation);
            }
            for v in &mesh.vertices {
                let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
            }
            for t in &mesh.triangles {
                let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            }
        }
        MeshFormat::StlAscii => {
            out.push_str("solid phenotype\n");
            for t in 0..mesh.triangles.len() {
                let n = normalize(mesh.scaled_normal(t)).unwrap_or([0.0; 3]);
                let _ = writeln!(out, "  facet normal {} {} {}", n[0], n[1], n[2]);
                out.push_str("    outer loop\n");
                for v in mesh.corners(t) {
                    let _ = writeln!(out, "      vertex {} {} {}", v[0], v[1], v[2]);
                }
                out.push_str("    endloop\n  endfacet\n");
            }
            out.push_str("endsolid phenotype\n");
        }
    }
    out.into_bytes()
}

pub fn read_mesh(bytes: &[u8], format: MeshFormat) -> Result<PhenotypeMesh> {
    let text = std::str::from_utf8(bytes).map_err(|_| {
        Error::UnsupportedFormat("binary or non-UTF-8 input; only text formats are read".into())
    })?;
    let (vertices, triangles) = match format {
        MeshFormat::Obj => parse_obj(text)?,
        MeshFormat::StlAscii => parse_stl(text)?,
    };
    PhenotypeMesh::new(vertices, triangles, Provenance::default())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_coords<'a>(line_no: usize, parts: impl Iterator<Item = &'a str>) -> Result<Vec3> {
    let vals: Vec<f64> = parts
        .take(3)
        .map(|p| p.parse::<f64>().map_err(|_| parse_err(line_no, format!("bad coordinate {p:?}"))))
        .collect::<Result<_>>()?;
    if vals.len() != 3 {
        return Err(parse_err(line_no, "expected three coordinates"));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(parse_err(line_no, "non-finite coordinate"));
    }
    Ok([vals[0], vals[1], vals[2]])
}

fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => vertices.push(parse_coords(line_no, parts)?),
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|p| {
                        let first = p.split('/').next().unwrap_or("");
                        let k: i64 = first
                            .parse()
                            .map_err(|_| parse_err(line_no, format!("bad face index {p:?}")))?;
                        let resolved = if k > 0 {
                            k - 1
                        } else if k < 0 {
                            vertices.len() as i64 + k
                        } else {
                            return Err(parse_err(line_no, "face indices are 1-based; found 0"));
                        };
                        if resolved < 0 || resolved as usize >= vertices.len() {
                            return Err(parse_err(line_no, format!("face index {k} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(line_no, "face needs at least three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

fn parse_stl(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut triangles = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut saw_solid = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut parts = raw.split_whitespace();
        match parts.next() {
            Some("solid") => saw_solid = true,
            Some("vertex") => {
                let v = parse_coords(line_no, parts)?;
                let key = [v[0].to_bits(), v[1].to_bits(), v[2].to_bits()];
                let id = *index.entry(key).or_insert_with(|| {
                    vertices.push(v);
                    vertices.len() - 1
                });
                pending.push(id);
            }
            Some("endloop") => {
                if pending.len() != 3 {
                    return Err(parse_err(line_no, format!("facet has {} vertices", pending.len())));
                }
                triangles.push([pending[0], pending[1], pending[2]]);
                pending.clear();
            }
            Some("facet" | "outer" | "endfacet" | "endsolid") | None => {}
            Some(other) => return Err(parse_err(line_no, format!("unexpected keyword {other:?}"))),
        }
    }
    if !saw_solid {
        return Err(parse_err(1, "missing `solid` header"));
    }
    Ok((vertices, triangles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cuboid, icosphere};
    use proptest::prelude::*;

    #[test]
    fn cube_obj_line_counts() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        let text = String::from_utf8(write_mesh(&cube, MeshFormat::Obj)).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
        let back = read_mesh(text.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(back.triangles, cube.triangles);
        assert_eq!(back.vertices, cube.vertices);
    }

    #[test]
    fn stl_round_trip_preserves_topology() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        let back = read_mesh(&write_mesh(&cube, MeshFormat::StlAscii), MeshFormat::StlAscii).unwrap();
        assert_eq!(back.vertices.len(), 8);
        assert_eq!(back.triangles.len(), 12);
        assert!(back.is_watertight());
        assert!((back.signed_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_index_is_parse_error() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n";
        match read_mesh(text.as_bytes(), MeshFormat::Obj) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn obj_extensions_accepted() {
        let text = "# comment\no thing\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -2 -1\n";
        let m = read_mesh(text.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3], [0, 2, 3]]);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!("ply".parse::<MeshFormat>(), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(
            read_mesh(&[0xff, 0xfe, 0x00], MeshFormat::StlAscii),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            read_mesh(b"v 0 0 zero\n", MeshFormat::Obj),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_mesh(b"v 0 0 0\n", MeshFormat::Obj),
            Err(Error::DegenerateMesh(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_within_tolerance(sx in 0.01f64..100.0, dx in -50.0f64..50.0,
                                       stl in any::<bool>()) {
            let m = icosphere(1).scaled(sx).translated([dx, -dx, dx * 0.5]);
            let fmt = if stl { MeshFormat::StlAscii } else { MeshFormat::Obj };
            let back = read_mesh(&write_mesh(&m, fmt), fmt).unwrap();
            prop_assert_eq!(back.triangles.len(), m.triangles.len());
            prop_assert_eq!(back.vertices.len(), m.vertices.len());
            for t in 0..m.triangles.len() {
                for (a, b) in m.corners(t).iter().zip(back.corners(t).iter()) {
                    for k in 0..3 {
                        prop_assert!((a[k] - b[k]).abs() <= 1e-6);
                    }
                }
            }
        }
    }
}
