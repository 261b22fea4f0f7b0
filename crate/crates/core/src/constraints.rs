//! Assembly-interface detection: hull planes and bolt holes.
//!
//! Both detectors work on the solid mapped uniformly into `[-1, 1]^3`, so
//! tolerances are in normalized units.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;

use crate::geometry::{cross, dot, norm, sub, Point3, PointGrid, UnitCubeMap, GRID_SIZE};
use crate::topology::BRepGraph;

pub const DEFAULT_HULL_TOL: f64 = 1e-6;
pub const DEFAULT_AXIS_TOL_DEG: f64 = 5.0;
/// Fit tolerance for rulings and circles.
const SHAPE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoltHoles {
    pub faces: Vec<usize>,
    /// Set when detection was skipped.
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraints {
    pub hull_planes: Vec<usize>,
    pub bolt_holes: BoltHoles,
}

fn normalized_points(g: &BRepGraph) -> Vec<Vec<Point3>> {
    let map = g.bbox().and_then(|b| UnitCubeMap::for_box(&b).ok());
    g.faces
        .iter()
        .map(|f| {
            f.grid
                .points()
                .iter()
                .map(|&p| map.map_or(p, |m| m.forward(p)))
                .collect()
        })
        .collect()
}

/// Least-squares plane: unit normal, centroid and largest point deviation.
pub fn fit_plane(points: &[Point3]) -> (Point3, Point3, f64) {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = Vector3::new(p[0] - c[0], p[1] - c[1], p[2] - c[2]);
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let k = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(k);
    let normal = [v[0], v[1], v[2]];
    let dev = points
        .iter()
        .map(|p| dot(sub(*p, c), normal).abs())
        .fold(0.0, f64::max);
    (normal, c, dev)
}

/// Planar faces lying within `tol` of one of the solid's six box planes.
pub fn detect_hull_planes(g: &BRepGraph, tol: f64) -> Vec<usize> {
    let Some(b) = g.bbox() else {
        return Vec::new();
    };
    let bbox = UnitCubeMap::for_box(&b).map_or(b, |m| m.forward_box(&b));
    let pts = normalized_points(g);
    let mut out = Vec::new();
    for (f, p) in pts.iter().enumerate() {
        let (_, _, dev) = fit_plane(p);
        if dev >= tol {
            continue;
        }
        let on_plane = (0..3).any(|a| {
            [bbox.min[a], bbox.max[a]]
                .iter()
                .any(|&v| p.iter().all(|q| (q[a] - v).abs() < tol))
        });
        if on_plane {
            out.push(f);
        }
    }
    out
}

struct Cylinder {
    axis: Point3,
    /// A point on the axis.
    origin: Point3,
}

fn unit(v: Point3) -> Option<Point3> {
    let n = norm(v);
    (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// Straight grid lines along one parameter plus a common circular cross
/// section make a cylinder.
fn fit_cylinder(p: &[Point3]) -> Option<Cylinder> {
    let at = |i: usize, j: usize| p[i * GRID_SIZE + j];
    let last = GRID_SIZE - 1;
    for along_v in [true, false] {
        let line = |k: usize, s: usize| if along_v { at(k, s) } else { at(s, k) };
        let mut axis = [0.0; 3];
        let mut ok = true;
        for k in 0..GRID_SIZE {
            let (a, b) = (line(k, 0), line(k, last));
            let Some(d) = unit(sub(b, a)) else {
                ok = false;
                break;
            };
            let straight = (1..last).all(|s| {
                let r = sub(line(k, s), a);
                let off = sub(r, scale(d, dot(r, d)));
                norm(off) < SHAPE_TOL
            });
            if !straight {
                ok = false;
                break;
            }
            let sign = if dot(d, axis) < 0.0 { -1.0 } else { 1.0 };
            for c in 0..3 {
                axis[c] += sign * d[c];
            }
        }
        if !ok {
            continue;
        }
        let Some(axis) = unit(axis) else { continue };
        // cross-section at s = 0
        let section: Vec<Point3> = (0..GRID_SIZE).map(|k| line(k, 0)).collect();
        if let Some(origin) = fit_circle(&section, axis, p) {
            return Some(Cylinder { axis, origin });
        }
    }
    None
}

fn scale(v: Point3, s: f64) -> Point3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

/// Kasa fit in the plane orthogonal to `axis`; every grid point must sit at
/// the fitted radius.
fn fit_circle(section: &[Point3], axis: Point3, all: &[Point3]) -> Option<Point3> {
    let helper = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = unit(cross(axis, helper))?;
    let e2 = cross(axis, e1);
    let uv: Vec<(f64, f64)> = section.iter().map(|&q| (dot(q, e1), dot(q, e2))).collect();
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for &(x, y) in &uv {
        let row = Vector3::new(x, y, 1.0);
        ata += row * row.transpose();
        atb += row * -(x * x + y * y);
    }
    let sol = ata.lu().solve(&atb)?;
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cx * cx + cy * cy - sol[2];
    if !(r2 > 1e-12) {
        return None;
    }
    let r = r2.sqrt();
    // a nearly straight section fits a huge circle: that is a plane
    if r > 1e3 {
        return None;
    }
    let origin = [
        cx * e1[0] + cy * e2[0],
        cx * e1[1] + cy * e2[1],
        cx * e1[2] + cy * e2[2],
    ];
    let fits = all.iter().all(|&q| {
        let d = sub(q, origin);
        let radial = sub(d, scale(axis, dot(d, axis)));
        (norm(radial) - r).abs() < SHAPE_TOL
    });
    fits.then_some(origin)
}

/// Concave cylinders whose axis is within `axis_tol_deg` of the normal of
/// an adjacent planar face. Needs every face's orientation flag.
pub fn detect_bolt_holes(g: &BRepGraph, axis_tol_deg: f64) -> BoltHoles {
    if let Some(f) = g.faces.iter().position(|f| f.grid.orientation_out.is_none()) {
        return BoltHoles {
            faces: Vec::new(),
            warning: Some(format!(
                "face {f} has no orientation flag; bolt-hole detection skipped"
            )),
        };
    }
    let pts = normalized_points(g);
    let adj = g.adjacency();
    let planes: Vec<Option<Point3>> = pts
        .iter()
        .map(|p| {
            let (n, _, dev) = fit_plane(p);
            (dev < SHAPE_TOL).then_some(n)
        })
        .collect();
    let cos_tol = axis_tol_deg.to_radians().cos();
    let mut faces = Vec::new();
    for (f, p) in pts.iter().enumerate() {
        if planes[f].is_some() {
            continue;
        }
        let Some(cyl) = fit_cylinder(p) else { continue };
        let m = GRID_SIZE / 2;
        let at = |i: usize, j: usize| p[i * GRID_SIZE + j];
        let du = sub(at(m + 1, m), at(m - 1, m));
        let dv = sub(at(m, m + 1), at(m, m - 1));
        let mut n = cross(du, dv);
        if g.faces[f].grid.orientation_out == Some(false) {
            n = scale(n, -1.0);
        }
        let d = sub(at(m, m), cyl.origin);
        let radial = sub(d, scale(cyl.axis, dot(d, cyl.axis)));
        if dot(n, radial) >= 0.0 {
            continue;
        }
        let aligned = adj[f].iter().any(|&o| {
            planes[o].is_some_and(|pn| dot(pn, cyl.axis).abs() >= cos_tol)
        });
        if aligned {
            faces.push(f);
        }
    }
    BoltHoles {
        faces,
        warning: None,
    }
}

pub fn detect_constraints(g: &BRepGraph, hull_tol: f64, axis_tol_deg: f64) -> Constraints {
    Constraints {
        hull_planes: detect_hull_planes(g, hull_tol),
        bolt_holes: detect_bolt_holes(g, axis_tol_deg),
    }
}
