//! Kernel-free watertightness proxy.
//!
//! Three categories are reported separately: edges whose face list is not
//! exactly two valid faces, edges with an unassigned face, and edge-face
//! incidences where some edge point lies farther than `gap_tol` from the
//! face's bilinear surface. Distances are measured after mapping the solid
//! uniformly into `[-1, 1]^3`, so the tolerance is in coordinate-bin units.

use serde::Serialize;

use crate::geometry::{
    dist2, dot, sub, Aabb, FaceGrid, Point3, PointGrid, UnitCubeMap, GRID_SIZE,
};
use crate::topology::{BRepGraph, FaceRef};

/// One coordinate bin width.
pub const DEFAULT_GAP_TOL: f64 = 2.0 / 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceViolation {
    pub edge: usize,
    pub incident_faces: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapViolation {
    pub edge: usize,
    pub face: usize,
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ValidityReport {
    pub is_manifold_closed: bool,
    pub edge_incidence_violations: Vec<IncidenceViolation>,
    pub geometric_gap_violations: Vec<GapViolation>,
    pub dangling_edges: Vec<usize>,
}

impl ValidityReport {
    pub fn violation_count(&self) -> usize {
        self.edge_incidence_violations.len()
            + self.geometric_gap_violations.len()
            + self.dangling_edges.len()
    }
}

fn lerp(a: Point3, b: Point3, t: f64) -> Point3 {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

fn segment_dist2(q: Point3, a: Point3, b: Point3) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(q, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist2(q, lerp(a, b, t))
}

/// Squared distance from `q` to the bilinear patch with corners
/// `p00, p10, p01, p11` (first index along `s`).
pub fn bilinear_patch_dist2(q: Point3, p00: Point3, p10: Point3, p01: Point3, p11: Point3) -> f64 {
    let mut best = segment_dist2(q, p00, p10)
        .min(segment_dist2(q, p01, p11))
        .min(segment_dist2(q, p00, p01))
        .min(segment_dist2(q, p10, p11));
    let eval = |s: f64, t: f64| lerp(lerp(p00, p10, s), lerp(p01, p11, s), t);
    // twisted patches can have several interior minima
    for s0 in [0.25, 0.5, 0.75] {
        for t0 in [0.25, 0.5, 0.75] {
            let (mut s, mut t) = (s0, t0);
            for _ in 0..16 {
                let r = sub(eval(s, t), q);
                let ds = sub(lerp(p10, p11, t), lerp(p00, p01, t));
                let dt = sub(lerp(p01, p11, s), lerp(p00, p10, s));
                let dst = sub(sub(p11, p10), sub(p01, p00));
                let a = dot(ds, ds);
                let b = dot(ds, dt) + dot(r, dst);
                let c = dot(dt, dt);
                let gs = dot(r, ds);
                let gt = dot(r, dt);
                let det = a * c - b * b;
                if det.abs() < 1e-300 {
                    break;
                }
                let ns = (s - (c * gs - b * gt) / det).clamp(0.0, 1.0);
                let nt = (t - (a * gt - b * gs) / det).clamp(0.0, 1.0);
                let moved = (ns - s).abs() + (nt - t).abs();
                s = ns;
                t = nt;
                if moved < 1e-14 {
                    break;
                }
            }
            best = best.min(dist2(q, eval(s, t)));
        }
    }
    best
}

/// Bounding-volume hierarchy over the bilinear cells of one face grid.
pub struct SurfaceIndex {
    points: Vec<Point3>,
    nodes: Vec<Node>,
}

struct Node {
    bbox: Aabb,
    /// Cell index range `[i0, i1) x [j0, j1)`.
    cells: [usize; 4],
    children: Option<(usize, usize)>,
}

const CELLS: usize = GRID_SIZE - 1;

impl SurfaceIndex {
    pub fn new(grid: &FaceGrid) -> Self {
        let mut idx = SurfaceIndex {
            points: grid.points().to_vec(),
            nodes: Vec::new(),
        };
        idx.build(0, CELLS, 0, CELLS);
        idx
    }

    fn at(&self, i: usize, j: usize) -> Point3 {
        self.points[i * GRID_SIZE + j]
    }

    fn build(&mut self, i0: usize, i1: usize, j0: usize, j1: usize) -> usize {
        let mut bbox = Aabb {
            min: self.at(i0, j0),
            max: self.at(i0, j0),
        };
        for i in i0..=i1 {
            for j in j0..=j1 {
                bbox.include(self.at(i, j));
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            bbox,
            cells: [i0, i1, j0, j1],
            children: None,
        });
        let (di, dj) = (i1 - i0, j1 - j0);
        if di * dj > 4 {
            let kids = if di >= dj {
                let m = i0 + di / 2;
                (self.build(i0, m, j0, j1), self.build(m, i1, j0, j1))
            } else {
                let m = j0 + dj / 2;
                (self.build(i0, i1, j0, m), self.build(i0, i1, m, j1))
            };
            self.nodes[id].children = Some(kids);
        }
        id
    }

    /// Distance from `q` to the interpolated surface.
    pub fn distance(&self, q: Point3) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack = vec![(0usize, self.nodes[0].bbox.dist2_to(q))];
        while let Some((n, lb)) = stack.pop() {
            if lb >= best {
                continue;
            }
            let node = &self.nodes[n];
            match node.children {
                Some((a, b)) => {
                    let la = self.nodes[a].bbox.dist2_to(q);
                    let lb2 = self.nodes[b].bbox.dist2_to(q);
                    // visit the nearer child first
                    if la <= lb2 {
                        stack.push((b, lb2));
                        stack.push((a, la));
                    } else {
                        stack.push((a, la));
                        stack.push((b, lb2));
                    }
                }
                None => {
                    let [i0, i1, j0, j1] = node.cells;
                    for i in i0..i1 {
                        for j in j0..j1 {
                            let d = bilinear_patch_dist2(
                                q,
                                self.at(i, j),
                                self.at(i + 1, j),
                                self.at(i, j + 1),
                                self.at(i + 1, j + 1),
                            );
                            best = best.min(d);
                        }
                    }
                }
            }
        }
        best.sqrt()
    }
}

/// Checks incidence counts, dangling references and edge-to-face gaps.
pub fn check_validity(g: &BRepGraph, gap_tol: f64) -> ValidityReport {
    let mut report = ValidityReport::default();
    let map = g.bbox().and_then(|b| UnitCubeMap::for_box(&b).ok());
    let norm = |p: Point3| map.map_or(p, |m| m.forward(p));
    let mut index: Vec<Option<SurfaceIndex>> = (0..g.face_count()).map(|_| None).collect();

    for (e, edge) in g.edges.iter().enumerate() {
        let valid: Vec<usize> = edge
            .faces
            .iter()
            .filter_map(|r| r.face())
            .filter(|&f| f < g.face_count())
            .collect();
        let out_of_range = edge
            .faces
            .iter()
            .any(|r| matches!(r, FaceRef::Face(f) if *f >= g.face_count()));
        if edge.faces.len() != 2 || out_of_range {
            report.edge_incidence_violations.push(IncidenceViolation {
                edge: e,
                incident_faces: valid.len(),
            });
        }
        if edge.is_dangling() {
            report.dangling_edges.push(e);
        }
        let mut seen = Vec::new();
        for f in valid {
            if seen.contains(&f) {
                continue;
            }
            seen.push(f);
            let idx = index[f]
                .get_or_insert_with(|| SurfaceIndex::new(&g.faces[f].grid.map_points(norm)));
            let gap = edge
                .grid
                .points()
                .iter()
                .map(|&p| idx.distance(norm(p)))
                .fold(0.0, f64::max);
            if gap > gap_tol {
                report.geometric_gap_violations.push(GapViolation {
                    edge: e,
                    face: f,
                    max_gap: gap,
                });
            }
        }
    }
    report.is_manifold_closed = report.violation_count() == 0;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EdgeGrid;
    use crate::topology::{Edge, Face};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_patch(q: Point3, p: [Point3; 4]) -> f64 {
        let n = 400;
        let mut best = f64::INFINITY;
        for a in 0..=n {
            for b in 0..=n {
                let (s, t) = (a as f64 / n as f64, b as f64 / n as f64);
                let x = lerp(lerp(p[0], p[1], s), lerp(p[2], p[3], s), t);
                best = best.min(dist2(q, x));
            }
        }
        best
    }

    #[test]
    fn patch_distance_matches_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let mut r = || [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let p = [r(), r(), r(), r()];
            let q = r();
            let fast = bilinear_patch_dist2(q, p[0], p[1], p[2], p[3]).sqrt();
            let slow = brute_patch(q, p).sqrt();
            // dense sampling overestimates by at most its spacing
            assert!(fast <= slow + 1e-9, "{fast} vs {slow}");
            assert!(slow - fast < 5e-3, "{fast} vs {slow}");
        }
    }

    #[test]
    fn index_agrees_with_cell_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = FaceGrid::from_fn(None, |i, j| {
            let (u, v) = (i as f64 / 31.0, j as f64 / 31.0);
            [u, v, (3.0 * u).sin() * (2.0 * v).cos() * 0.3]
        })
        .unwrap();
        let idx = SurfaceIndex::new(&grid);
        for _ in 0..50 {
            let q = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>() - 0.5];
            let mut scan = f64::INFINITY;
            for i in 0..31 {
                for j in 0..31 {
                    scan = scan.min(bilinear_patch_dist2(
                        q,
                        grid.at(i, j),
                        grid.at(i + 1, j),
                        grid.at(i, j + 1),
                        grid.at(i + 1, j + 1),
                    ));
                }
            }
            assert_eq!(idx.distance(q), scan.sqrt());
        }
    }

    fn square(z: f64) -> Face {
        Face::new(FaceGrid::from_fn(Some(true), |i, j| [i as f64 / 31.0, j as f64 / 31.0, z]).unwrap())
            .unwrap()
    }

    fn wall() -> Face {
        Face::new(FaceGrid::from_fn(Some(true), |i, j| [i as f64 / 31.0, 0.0, j as f64 / 31.0]).unwrap())
            .unwrap()
    }

    fn shared() -> EdgeGrid {
        EdgeGrid::from_fn(|k| [k as f64 / 31.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn open_pair_reports_only_the_expected_categories() {
        let g = BRepGraph::new(
            vec![square(0.0), wall()],
            vec![Edge::between(shared(), 0, 1).unwrap()],
        )
        .unwrap();
        let r = check_validity(&g, DEFAULT_GAP_TOL);
        assert!(r.is_manifold_closed, "{r:?}");

        let mut moved = g.clone();
        moved.faces[0] = square(0.05);
        let r = check_validity(&moved, DEFAULT_GAP_TOL);
        assert_eq!(r.geometric_gap_violations.len(), 1);
        assert_eq!(r.geometric_gap_violations[0].face, 0);
        assert!((r.geometric_gap_violations[0].max_gap - 0.1).abs() < 1e-9);

        let mut single = g.clone();
        single.edges[0].faces.pop();
        let r = check_validity(&single, DEFAULT_GAP_TOL);
        assert_eq!(
            r.edge_incidence_violations,
            vec![IncidenceViolation { edge: 0, incident_faces: 1 }]
        );
        assert!(r.dangling_edges.is_empty());

        let mut dangling = g;
        dangling.edges[0].faces[1] = FaceRef::Unassigned;
        let r = check_validity(&dangling, DEFAULT_GAP_TOL);
        assert_eq!(r.dangling_edges, vec![0]);
        assert!(r.edge_incidence_violations.is_empty());
        assert!(!r.is_manifold_closed);
    }
}
