//! Indexed triangle meshes and the geometric primitives used by the
//! generator mock and the physical evaluators.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub genotype_id: Option<u64>,
    pub generation: u64,
    pub generator_seed: u64,
    pub generator: String,
    /// Recipe features the generator attached, e.g. `shape:wedge`.
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhenotypeMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub provenance: Provenance,
}

impl PhenotypeMesh {
    /// Validates index range, coordinate finiteness and non-emptiness.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, provenance: Provenance) -> Result<Self> {
        let mesh = PhenotypeMesh {
            vertices,
            triangles,
            provenance,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::DegenerateMesh("mesh has no triangles".into()));
        }
        if let Some(v) = self.vertices.iter().find(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::DegenerateMesh(format!("non-finite vertex {v:?}")));
        }
        let n = self.vertices.len();
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::DegenerateMesh(format!(
                "triangle {t:?} indexes past {n} vertices"
            )));
        }
        Ok(())
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Area-weighted normal (length = 2 × triangle area).
    pub fn scaled_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        cross(sub(b, a), sub(c, a))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        0.5 * norm(self.scaled_normal(t))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Signed volume by summing tetrahedra against the origin. Positive for
    /// closed meshes with outward (counter-clockwise) winding.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for i in 0..3 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    pub fn extents(&self) -> Vec3 {
        let (lo, hi) = self.bounds();
        sub(hi, lo)
    }

    /// Every undirected edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        edges.values().all(|&c| c == 2)
    }

    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> PhenotypeMesh {
        PhenotypeMesh {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            triangles: self.triangles.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn translated(&self, offset: Vec3) -> PhenotypeMesh {
        self.map_vertices(|v| add(v, offset))
    }

    pub fn scaled(&self, s: f64) -> PhenotypeMesh {
        self.map_vertices(|v| scale(v, s))
    }

    pub fn flip_winding(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    /// Centers the bounding box on the origin and scales uniformly so the
    /// largest extent is 1. Returns the mesh and the applied scale factor.
    pub fn normalized_to_unit_cube(&self) -> Result<(PhenotypeMesh, f64)> {
        let (lo, hi) = self.bounds();
        let ext = sub(hi, lo);
        let largest = ext[0].max(ext[1]).max(ext[2]);
        if !(largest > 0.0 && largest.is_finite()) {
            return Err(Error::DegenerateMesh("mesh has zero extent".into()));
        }
        let center = scale(add(lo, hi), 0.5);
        let s = 1.0 / largest;
        Ok((self.map_vertices(|v| scale(sub(v, center), s)), s))
    }

    /// Appends another mesh as a separate shell.
    pub fn append(&mut self, other: &PhenotypeMesh) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
}

/// Axis-aligned box centered at `center` with full side lengths `size`,
/// outward winding, 8 vertices and 12 triangles.
pub fn cuboid(center: Vec3, size: Vec3) -> PhenotypeMesh {
    let h = scale(size, 0.5);
    tapered_box(center, size, [-h[2], h[2]], [-h[2], h[2]])
}

/// Box whose rear (−x) face spans `rear_z` and front (+x) face spans
/// `front_z`, both relative to `center`. Same topology as [`cuboid`].
pub fn tapered_box(center: Vec3, size: Vec3, rear_z: [f64; 2], front_z: [f64; 2]) -> PhenotypeMesh {
    let [cx, cy, cz] = center;
    let hx = size[0] / 2.0;
    let hy = size[1] / 2.0;
    let mut vertices = Vec::with_capacity(8);
    // index = x_bit * 4 + y_bit * 2 + z_bit
    for xb in 0..2 {
        for yb in 0..2 {
            for zb in 0..2 {
                let x = if xb == 0 { -hx } else { hx };
                let y = if yb == 0 { -hy } else { hy };
                let zr = if xb == 0 { rear_z } else { front_z };
                let z = zr[zb];
                vertices.push([cx + x, cy + y, cz + z]);
            }
        }
    }
    let quads: [[usize; 4]; 6] = [
        [0, 1, 3, 2], // -x
        [4, 6, 7, 5], // +x
        [0, 4, 5, 1], // -y
        [2, 3, 7, 6], // +y
        [0, 2, 6, 4], // -z
        [1, 5, 7, 3], // +z
    ];
    let mut triangles = Vec::with_capacity(12);
    for q in quads {
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
    }
    PhenotypeMesh {
        vertices,
        triangles,
        provenance: Provenance::default(),
    }
}

/// Unit-radius icosphere centered on the origin.
pub fn icosphere(subdivisions: u32) -> PhenotypeMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&v| normalize(v).expect("non-zero"))
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = scale(add(vertices[a], vertices[b]), 0.5);
                vertices.push(normalize(m).expect("non-zero"));
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }
    PhenotypeMesh {
        vertices,
        triangles,
        provenance: Provenance::default(),
    }
}

/// Rotation of `v` about the unit `axis` by `angle` radians (Rodrigues).
pub fn rotate(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    let k = axis;
    add(
        add(scale(v, c), scale(cross(k, v), s)),
        scale(k, dot(k, v) * (1.0 - c)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_topology_and_volume() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        assert_eq!(cube.vertices.len(), 8);
        assert_eq!(cube.triangles.len(), 12);
        assert!(cube.is_watertight());
        assert!((cube.signed_volume() - 1.0).abs() < 1e-12);
        assert!((cube.surface_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn volume_is_translation_invariant() {
        let cube = cuboid([3.0, -2.0, 7.0], [1.0, 2.0, 3.0]);
        assert!((cube.signed_volume() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn icosphere_counts_and_radius() {
        let s = icosphere(2);
        assert_eq!(s.triangles.len(), 20 * 16);
        assert_eq!(s.vertices.len(), 162);
        assert!(s.is_watertight());
        assert!(s.vertices.iter().all(|&v| (norm(v) - 1.0).abs() < 1e-12));
        assert!(s.signed_volume() > 0.0);
    }

    #[test]
    fn tapered_box_is_closed_and_positive() {
        let w = tapered_box([0.0; 3], [2.0, 1.0, 1.0], [-0.5, 0.5], [-0.5, -0.3]);
        assert!(w.is_watertight());
        // trapezoid cross-section in x-z: (1.0 + 0.2) / 2 * 2.0, depth 1.0
        assert!((w.signed_volume() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            PhenotypeMesh::new(vec![[0.0; 3]], vec![], Provenance::default()),
            Err(Error::DegenerateMesh(_))
        ));
        assert!(PhenotypeMesh::new(vec![[0.0; 3]; 3], vec![[0, 1, 3]], Provenance::default()).is_err());
        assert!(PhenotypeMesh::new(
            vec![[f64::NAN, 0.0, 0.0], [0.0; 3], [1.0; 3]],
            vec![[0, 1, 2]],
            Provenance::default()
        )
        .is_err());
    }

    #[test]
    fn unit_cube_normalization() {
        let m = cuboid([5.0, 5.0, 5.0], [4.0, 2.0, 1.0]);
        let (n, s) = m.normalized_to_unit_cube().unwrap();
        assert!((s - 0.25).abs() < 1e-12);
        let e = n.extents();
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 0.5).abs() < 1e-12);
    }
}
