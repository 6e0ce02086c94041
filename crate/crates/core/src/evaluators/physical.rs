//! Geometric physical evaluators.
//!
//! `drag_proxy` and `lift_proxy` are geometric heuristics standing in for a
//! flow simulation. They are not CFD and carry no physical calibration.

use crate::domain::PhysicalObjective;
use crate::error::{Error, Result};
use crate::mesh::{cross, dot, normalize, PhenotypeMesh, Vec3};

pub const FLOW_AXIS: Vec3 = [1.0, 0.0, 0.0];
pub const UP_AXIS: Vec3 = [0.0, 0.0, 1.0];
pub const DEFAULT_RESOLUTION: usize = 512;

fn check_mesh(mesh: &PhenotypeMesh) -> Result<()> {
    if mesh.triangles.is_empty() {
        return Err(Error::DegenerateMesh("mesh has no triangles".into()));
    }
    mesh.validate()
}

/// Orthonormal basis of the plane perpendicular to `axis`.
fn projection_basis(axis: Vec3) -> Result<(Vec3, Vec3)> {
    let a = normalize(axis).ok_or(Error::ZeroAxis)?;
    let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = normalize(cross(a, helper)).ok_or(Error::ZeroAxis)?;
    let v = cross(a, u);
    Ok((u, v))
}

/// Area of the silhouette of `mesh` seen along `axis`.
///
/// Triangles are projected onto the plane perpendicular to `axis` and
/// rasterized onto a `resolution`² grid spanning the projected bounding
/// square; a cell is covered when its center lies inside any projected
/// triangle. Overlaps count once.
pub fn projected_frontal_area(mesh: &PhenotypeMesh, axis: Vec3, resolution: usize) -> Result<f64> {
    check_mesh(mesh)?;
    let (u, v) = projection_basis(axis)?;
    let pts: Vec<[f64; 2]> = mesh.vertices.iter().map(|&p| [dot(p, u), dot(p, v)]).collect();

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for t in &mesh.triangles {
        for &i in t {
            for k in 0..2 {
                lo[k] = lo[k].min(pts[i][k]);
                hi[k] = hi[k].max(pts[i][k]);
            }
        }
    }
    let side = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if !(side > 0.0) {
        return Ok(0.0);
    }
    let res = resolution.max(1);
    let cell = side / res as f64;
    let mut covered = vec![false; res * res];
    let to_cell = |x: f64, origin: f64| (x - origin) / cell - 0.5;

    for t in &mesh.triangles {
        let [a, b, c] = [pts[t[0]], pts[t[1]], pts[t[2]]];
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if area2.abs() <= 1e-14 * side * side {
            continue;
        }
        let s = area2.signum();
        let xmin = a[0].min(b[0]).min(c[0]);
        let xmax = a[0].max(b[0]).max(c[0]);
        let ymin = a[1].min(b[1]).min(c[1]);
        let ymax = a[1].max(b[1]).max(c[1]);
        let i0 = to_cell(xmin, lo[0]).ceil().max(0.0) as usize;
        let i1 = (to_cell(xmax, lo[0]).floor().min(res as f64 - 1.0)).max(-1.0);
        let j0 = to_cell(ymin, lo[1]).ceil().max(0.0) as usize;
        let j1 = (to_cell(ymax, lo[1]).floor().min(res as f64 - 1.0)).max(-1.0);
        if i1 < 0.0 || j1 < 0.0 {
            continue;
        }
        let (i1, j1) = (i1 as usize, j1 as usize);
        let edge = |p: [f64; 2], q: [f64; 2], x: f64, y: f64| {
            s * ((q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]))
        };
        for j in j0..=j1 {
            let y = lo[1] + (j as f64 + 0.5) * cell;
            for i in i0..=i1 {
                let idx = j * res + i;
                if covered[idx] {
                    continue;
                }
                let x = lo[0] + (i as f64 + 0.5) * cell;
                if edge(a, b, x, y) >= 0.0 && edge(b, c, x, y) >= 0.0 && edge(c, a, x, y) >= 0.0 {
                    covered[idx] = true;
                }
            }
        }
    }
    let count = covered.iter().filter(|&&c| c).count();
    Ok(count as f64 * cell * cell)
}

/// Frontal area scaled by a bluffness factor `1 + 2·A_f / S`, where `S` is
/// the wetted surface area. Elongated bodies with the same frontal area score
/// lower than blunt ones.
pub fn drag_proxy(mesh: &PhenotypeMesh, axis: Vec3, resolution: usize) -> Result<f64> {
    let frontal = projected_frontal_area(mesh, axis, resolution)?;
    let surface = mesh.surface_area();
    if !(surface > 0.0) {
        return Err(Error::DegenerateMesh("zero surface area".into()));
    }
    Ok(frontal * (1.0 + 2.0 * frontal / surface))
}

/// Area-weighted mean of `(n·up)(n·axis)` over all triangles.
pub fn lift_proxy(mesh: &PhenotypeMesh, axis: Vec3, up: Vec3) -> Result<f64> {
    check_mesh(mesh)?;
    let a = normalize(axis).ok_or(Error::ZeroAxis)?;
    let u = normalize(up).ok_or(Error::ZeroAxis)?;
    let mut weighted = 0.0;
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let n2 = mesh.scaled_normal(t);
        let len = crate::mesh::norm(n2);
        if len == 0.0 {
            continue;
        }
        let n = [n2[0] / len, n2[1] / len, n2[2] / len];
        let area = 0.5 * len;
        weighted += area * dot(n, u) * dot(n, a);
        total += area;
    }
    if total == 0.0 {
        return Err(Error::DegenerateMesh("zero surface area".into()));
    }
    Ok(weighted / total)
}

/// Backend that turns a mesh into raw physical measurements.
pub trait PhysicalEvaluator: Send + Sync {
    fn name(&self) -> &str;
    fn measure(&self, mesh: &PhenotypeMesh, quantity: PhysicalObjective) -> Result<f64>;

    fn measure_all(&self, mesh: &PhenotypeMesh, quantities: &[PhysicalObjective]) -> Result<Vec<f64>> {
        quantities.iter().map(|&q| self.measure(mesh, q)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GeometricEvaluator {
    pub axis: Vec3,
    pub up: Vec3,
    pub resolution: usize,
}

impl Default for GeometricEvaluator {
    fn default() -> Self {
        GeometricEvaluator {
            axis: FLOW_AXIS,
            up: UP_AXIS,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl GeometricEvaluator {
    pub const NAME: &'static str = "geometric";

    pub fn with_resolution(resolution: usize) -> Self {
        GeometricEvaluator {
            resolution,
            ..Self::default()
        }
    }
}

impl PhysicalEvaluator for GeometricEvaluator {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn measure(&self, mesh: &PhenotypeMesh, quantity: PhysicalObjective) -> Result<f64> {
        match quantity {
            PhysicalObjective::FrontalArea => projected_frontal_area(mesh, self.axis, self.resolution),
            PhysicalObjective::DragProxy => drag_proxy(mesh, self.axis, self.resolution),
            PhysicalObjective::LiftProxy => lift_proxy(mesh, self.axis, self.up),
        }
    }

    fn measure_all(&self, mesh: &PhenotypeMesh, quantities: &[PhysicalObjective]) -> Result<Vec<f64>> {
        let mut frontal = None;
        let mut area = |m: &PhenotypeMesh| -> Result<f64> {
            if let Some(a) = frontal {
                return Ok(a);
            }
            let a = projected_frontal_area(m, self.axis, self.resolution)?;
            frontal = Some(a);
            Ok(a)
        };
        quantities
            .iter()
            .map(|&q| match q {
                PhysicalObjective::FrontalArea => area(mesh),
                PhysicalObjective::DragProxy => {
                    let a = area(mesh)?;
                    let s = mesh.surface_area();
                    if !(s > 0.0) {
                        return Err(Error::DegenerateMesh("zero surface area".into()));
                    }
                    Ok(a * (1.0 + 2.0 * a / s))
                }
                PhysicalObjective::LiftProxy => lift_proxy(mesh, self.axis, self.up),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cuboid, icosphere, rotate, Provenance};
    use std::f64::consts::PI;

    #[test]
    fn unit_cube_frontal_area() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        let a = projected_frontal_area(&cube, FLOW_AXIS, 512).unwrap();
        assert!((a - 1.0).abs() < 1e-3, "{a}");
    }

    #[test]
    fn sphere_frontal_area_converges_to_disc() {
        let s = icosphere(4);
        let coarse = projected_frontal_area(&s, FLOW_AXIS, 512).unwrap();
        assert!((coarse - PI).abs() / PI < 0.01, "{coarse}");
        // refining the raster moves the estimate toward the polygonal
        // silhouette, which sits just inside the disc
        let fine = projected_frontal_area(&s, FLOW_AXIS, 4096).unwrap();
        assert!((fine - PI).abs() / PI < 0.01, "{fine}");
        assert!((fine - coarse).abs() < 0.005);
    }

    #[test]
    fn zero_triangles_and_zero_axis() {
        let empty = PhenotypeMesh {
            vertices: vec![[0.0; 3]],
            triangles: vec![],
            provenance: Provenance::default(),
        };
        assert!(matches!(
            projected_frontal_area(&empty, FLOW_AXIS, 64),
            Err(Error::DegenerateMesh(_))
        ));
        let cube = cuboid([0.0; 3], [1.0; 3]);
        assert!(matches!(
            projected_frontal_area(&cube, [0.0; 3], 64),
            Err(Error::ZeroAxis)
        ));
    }

    #[test]
    fn oblique_axis() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        // silhouette of a unit cube along a body diagonal is a regular hexagon
        // of area sqrt(3)
        let a = projected_frontal_area(&cube, [1.0, 1.0, 1.0], 1024).unwrap();
        assert!((a - 3f64.sqrt()).abs() / 3f64.sqrt() < 0.005, "{a}");
    }

    #[test]
    fn drag_prefers_elongated_body() {
        let cube = cuboid([0.0; 3], [1.0; 3]);
        let long = cuboid([0.0; 3], [2.0, 1.0, 1.0]);
        let d_cube = drag_proxy(&cube, FLOW_AXIS, 512).unwrap();
        let d_long = drag_proxy(&long, FLOW_AXIS, 512).unwrap();
        // A = 1 for both; S = 6 and 10
        assert!((d_cube - (1.0 + 2.0 / 6.0)).abs() < 1e-3);
        assert!((d_long - (1.0 + 2.0 / 10.0)).abs() < 1e-3);
        assert!(d_cube > d_long);
    }

    #[test]
    fn lift_is_zero_for_sphere_and_odd_under_flip() {
        let s = icosphere(3);
        assert!(lift_proxy(&s, FLOW_AXIS, UP_AXIS).unwrap().abs() < 1e-6);

        let wedge = crate::mesh::tapered_box([0.0; 3], [2.0, 1.0, 1.0], [-0.5, 0.5], [-0.5, -0.2]);
        let l = lift_proxy(&wedge, FLOW_AXIS, UP_AXIS).unwrap();
        assert!(l.abs() > 1e-3);
        let mut flipped = wedge.map_vertices(|v| [v[0], v[1], -v[2]]);
        flipped.flip_winding();
        let lf = lift_proxy(&flipped, FLOW_AXIS, UP_AXIS).unwrap();
        assert!((l + lf).abs() < 1e-12);
    }

    #[test]
    fn rotation_about_axis_preserves_area() {
        let m = cuboid([0.0; 3], [1.5, 1.0, 0.6]);
        let base = projected_frontal_area(&m, FLOW_AXIS, 512).unwrap();
        for k in 1..8 {
            let r = m.map_vertices(|v| rotate(v, FLOW_AXIS, k as f64 * 0.37));
            let a = projected_frontal_area(&r, FLOW_AXIS, 512).unwrap();
            assert!((a - base).abs() / base < 0.005, "{k}: {a} vs {base}");
        }
    }

    #[test]
    fn measure_all_matches_individual_calls() {
        let m = cuboid([0.0; 3], [1.5, 1.0, 0.6]);
        let ev = GeometricEvaluator::default();
        let qs = [PhysicalObjective::FrontalArea, PhysicalObjective::DragProxy, PhysicalObjective::LiftProxy];
        let all = ev.measure_all(&m, &qs).unwrap();
        for (q, v) in qs.iter().zip(&all) {
            assert_eq!(ev.measure(&m, *q).unwrap(), *v);
        }
    }
}
