//! Point-cloud generation metrics.
//!
//! Chamfer distance is the sum of the two mean squared nearest-neighbour
//! distances. COV is the share of reference clouds that are the nearest
//! reference (ties included) of at least one generated cloud; MMD averages
//! each reference cloud's best chamfer match. JSD compares 32^3 occupancy
//! histograms over `[-1, 1]^3` (points clamped in) with natural logarithms.
//! MMD and JSD are reported multiplied by 100.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{cross, FaceFlips, dist2, norm, sub, Point3, PointGrid, GRID_SIZE};
use crate::topology::BRepGraph;
use crate::validity::check_validity;

pub const DEFAULT_SAMPLES: usize = 2000;
pub const JSD_RESOLUTION: usize = 32;

const LEAF: usize = 8;

/// Static 3-d tree answering exact nearest-neighbour distance queries.
pub struct KdTree {
    points: Vec<Point3>,
    nodes: Vec<KdNode>,
}

struct KdNode {
    lo: usize,
    hi: usize,
    axis: usize,
    split: f64,
    children: Option<(usize, usize)>,
}

impl KdTree {
    pub fn new(points: &[Point3]) -> Self {
        let mut t = KdTree {
            points: points.to_vec(),
            nodes: Vec::new(),
        };
        if !t.points.is_empty() {
            t.build(0, t.points.len());
        }
        t
    }

    fn build(&mut self, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode {
            lo,
            hi,
            axis: 0,
            split: 0.0,
            children: None,
        });
        if hi - lo <= LEAF {
            return id;
        }
        let slice = &mut self.points[lo..hi];
        let mut spread = [0.0; 3];
        for (a, s) in spread.iter_mut().enumerate() {
            let (mn, mx) = slice
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(m, x), p| (m.min(p[a]), x.max(p[a])));
            *s = mx - mn;
        }
        let axis = (0..3).max_by(|&a, &b| spread[a].total_cmp(&spread[b])).unwrap_or(0);
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |p, q| p[axis].total_cmp(&q[axis]));
        let split = slice[mid][axis];
        let left = self.build(lo, lo + mid);
        let right = self.build(lo + mid, hi);
        let n = &mut self.nodes[id];
        n.axis = axis;
        n.split = split;
        n.children = Some((left, right));
        id
    }

    /// Squared distance to the nearest stored point (infinite when empty).
    pub fn nearest_dist2(&self, q: Point3) -> f64 {
        let mut best = f64::INFINITY;
        if !self.nodes.is_empty() {
            self.search(0, q, &mut best);
        }
        best
    }

    fn search(&self, n: usize, q: Point3, best: &mut f64) {
        let node = &self.nodes[n];
        match node.children {
            None => {
                for p in &self.points[node.lo..node.hi] {
                    let d = dist2(q, *p);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Some((l, r)) => {
                let diff = q[node.axis] - node.split;
                let (near, far) = if diff < 0.0 { (l, r) } else { (r, l) };
                self.search(near, q, best);
                if diff * diff <= *best {
                    self.search(far, q, best);
                }
            }
        }
    }
}

fn mean_nearest(from: &[Point3], to: &KdTree) -> f64 {
    from.iter().map(|&p| to.nearest_dist2(p)).sum::<f64>() / from.len() as f64
}

/// Symmetric chamfer distance between two nonempty clouds.
pub fn chamfer(a: &[Point3], b: &[Point3]) -> f64 {
    mean_nearest(a, &KdTree::new(b)) + mean_nearest(b, &KdTree::new(a))
}

/// Area-weighted samples over the triangulated bilinear cells of every
/// face; each returned point carries its face index.
pub fn sample_surface(g: &BRepGraph, n: usize, seed: u64) -> Result<Vec<(usize, Point3)>> {
    sample_with(g, n, ChaCha8Rng::seed_from_u64(seed))
}

fn sample_with(g: &BRepGraph, n: usize, mut rng: ChaCha8Rng) -> Result<Vec<(usize, Point3)>> {
    if g.faces.is_empty() {
        return Err(Error::EmptyGraph);
    }
    // two triangles per cell: (00, 10, 11) and (00, 11, 01)
    let mut tris: Vec<(usize, [Point3; 3])> = Vec::new();
    let mut cumulative: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for (f, face) in g.faces.iter().enumerate() {
        let p = face.grid.points();
        let at = |i: usize, j: usize| p[i * GRID_SIZE + j];
        for i in 0..GRID_SIZE - 1 {
            for j in 0..GRID_SIZE - 1 {
                for t in [
                    [at(i, j), at(i + 1, j), at(i + 1, j + 1)],
                    [at(i, j), at(i + 1, j + 1), at(i, j + 1)],
                ] {
                    let area = 0.5 * norm(cross(sub(t[1], t[0]), sub(t[2], t[0])));
                    if area > 0.0 {
                        total += area;
                        tris.push((f, t));
                        cumulative.push(total);
                    }
                }
            }
        }
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateGeometry("solid has zero surface area".into()));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.random::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= r).min(tris.len() - 1);
        let (f, [a, b, c]) = tris[k];
        let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let p = [
            a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
            a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
            a[2] + u * (b[2] - a[2]) + v * (c[2] - a[2]),
        ];
        out.push((f, p));
    }
    Ok(out)
}

pub fn sample_surface_points(g: &BRepGraph, n: usize, seed: u64) -> Result<Vec<Point3>> {
    Ok(sample_surface(g, n, seed)?.into_iter().map(|(_, p)| p).collect())
}

/// Samples of the `index`-th solid of a set: one seeded stream per solid, so
/// results do not depend on processing order.
pub fn sample_indexed(g: &BRepGraph, n: usize, seed: u64, index: u64) -> Result<Vec<Point3>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Ok(sample_with(g, n, rng)?.into_iter().map(|(_, p)| p).collect())
}

fn histogram(sets: &[Vec<Point3>]) -> Vec<f64> {
    let r = JSD_RESOLUTION;
    let mut h = vec![0.0; r * r * r];
    let bin = |v: f64| {
        let v = if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
        (((v + 1.0) * 0.5 * r as f64).floor() as usize).min(r - 1)
    };
    let mut count = 0.0;
    for p in sets.iter().flatten() {
        h[(bin(p[0]) * r + bin(p[1])) * r + bin(p[2])] += 1.0;
        count += 1.0;
    }
    if count > 0.0 {
        h.iter_mut().for_each(|x| *x /= count);
    }
    h
}

/// Jensen-Shannon divergence of two distributions (natural log).
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            d += 0.5 * a * (a / m).ln();
        }
        if b > 0.0 {
            d += 0.5 * b * (b / m).ln();
        }
    }
    d.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionScores {
    pub cov: f64,
    /// Times 100.
    pub mmd: f64,
    /// Times 100.
    pub jsd: f64,
}

/// All-pairs chamfer matrix, rows indexed by `gen`.
pub fn chamfer_matrix(gen: &[Vec<Point3>], refs: &[Vec<Point3>]) -> Vec<Vec<f64>> {
    let ref_trees: Vec<KdTree> = refs.par_iter().map(|r| KdTree::new(r)).collect();
    gen.par_iter()
        .map(|g| {
            let gt = KdTree::new(g);
            refs.iter()
                .zip(&ref_trees)
                .map(|(r, rt)| mean_nearest(g, rt) + mean_nearest(r, &gt))
                .collect()
        })
        .collect()
}

pub fn compute_cov_mmd_jsd(gen: &[Vec<Point3>], refs: &[Vec<Point3>]) -> Result<DistributionScores> {
    if gen.is_empty() || refs.is_empty() {
        return Err(Error::Contract("metric sets must be nonempty".into()));
    }
    if gen.iter().chain(refs).any(|s| s.is_empty()) {
        return Err(Error::Contract("every point set needs at least one point".into()));
    }
    let d = chamfer_matrix(gen, refs);
    let mut covered = vec![false; refs.len()];
    for row in &d {
        let m = row.iter().copied().fold(f64::INFINITY, f64::min);
        for (r, &v) in row.iter().enumerate() {
            if v == m {
                covered[r] = true;
            }
        }
    }
    let cov = 100.0 * covered.iter().filter(|&&c| c).count() as f64 / refs.len() as f64;
    let mmd = (0..refs.len())
        .map(|r| d.iter().map(|row| row[r]).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / refs.len() as f64;
    let jsd = jensen_shannon(&histogram(gen), &histogram(refs));
    Ok(DistributionScores {
        cov,
        mmd: 100.0 * mmd,
        jsd: 100.0 * jsd,
    })
}

/// Identity of a solid after 4-bit quantization of its normalized face grids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolidKey {
    pub faces: usize,
    pub edges: usize,
    pub grids: Vec<Vec<u8>>,
}

pub fn solid_key(g: &BRepGraph) -> SolidKey {
    let map = g
        .bbox()
        .and_then(|b| crate::geometry::UnitCubeMap::for_box(&b).ok());
    let q = |v: f64| (((v.clamp(-1.0, 1.0) + 1.0) * 8.0).floor() as u8).min(15);
    let mut grids: Vec<Vec<u8>> = g
        .faces
        .iter()
        .map(|f| {
            // choose the flip on the quantized grid so sub-bin noise cannot change it
            FaceFlips::ALL
                .iter()
                .map(|&fl| {
                    f.grid
                        .flipped(fl)
                        .points()
                        .iter()
                        .flat_map(|&p| {
                            let p = map.map_or(p, |m| m.forward(p));
                            [q(p[0]), q(p[1]), q(p[2])]
                        })
                        .collect::<Vec<u8>>()
                })
                .min()
                .expect("four flips")
        })
        .collect();
    grids.sort();
    SolidKey {
        faces: g.face_count(),
        edges: g.edge_count(),
        grids,
    }
}

/// Percentages of generated solids absent from `train`, and of distinct
/// solids within `gen` (a repeated solid counts once).
pub fn novel_unique(gen: &[BRepGraph], train: &[BRepGraph]) -> (f64, f64) {
    if gen.is_empty() {
        return (0.0, 0.0);
    }
    let keys: Vec<SolidKey> = gen.par_iter().map(solid_key).collect();
    let train_keys: HashSet<SolidKey> = train.par_iter().map(solid_key).collect();
    let distinct: HashSet<&SolidKey> = keys.iter().collect();
    let n = keys.len() as f64;
    let novel = keys.iter().filter(|k| !train_keys.contains(*k)).count() as f64;
    (100.0 * novel / n, 100.0 * distinct.len() as f64 / n)
}

pub fn valid_percentage(gen: &[BRepGraph], gap_tol: f64) -> f64 {
    if gen.is_empty() {
        return 0.0;
    }
    let ok = gen
        .par_iter()
        .filter(|g| check_validity(g, gap_tol).is_manifold_closed)
        .count();
    100.0 * ok as f64 / gen.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub cov: f64,
    pub mmd: f64,
    pub jsd: f64,
    pub novel: Option<f64>,
    pub unique: f64,
    pub valid: f64,
}
