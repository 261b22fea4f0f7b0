//! Point-grid geometry: face and edge grids, bounding boxes, unit-cube
//! normalization and UV-origin canonicalization.
//!
//! Face grids are stored row-major with the first index running along `u`
//! and the second along `v`, so `points[i * GRID_SIZE + j]` is the sample at
//! `(u_i, v_j)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per grid axis.
pub const GRID_SIZE: usize = 32;
/// Points in a face grid.
pub const FACE_POINTS: usize = GRID_SIZE * GRID_SIZE;

/// Extents below this are treated as collapsed axes.
pub const DEGENERATE_EXTENT: f64 = 1e-12;

pub type Point3 = [f64; 3];

pub(crate) fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

/// Squared Euclidean distance.
pub fn dist2(a: Point3, b: Point3) -> f64 {
    let d = sub(a, b);
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// Lexicographic order on (x, y, z) using the IEEE total order per component.
pub fn lex_cmp(a: &Point3, b: &Point3) -> Ordering {
    a[0].total_cmp(&b[0])
        .then(a[1].total_cmp(&b[1]))
        .then(a[2].total_cmp(&b[2]))
}

fn check_finite(points: &[Point3], what: &str) -> Result<()> {
    match points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
        Some(i) => Err(Error::MalformedGeometry(format!(
            "{what} point {i} has a non-finite coordinate"
        ))),
        None => Ok(()),
    }
}

/// Anything that exposes a flat slice of sampled points.
pub trait PointGrid {
    fn points(&self) -> &[Point3];
}

/// A 32x32 grid of points sampled on a face's parameter domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceGrid {
    points: Vec<Point3>,
    /// Whether `d/du x d/dv` points out of the solid; `None` when the
    /// producer did not record orientation.
    pub orientation_out: Option<bool>,
}

impl FaceGrid {
    pub fn new(points: Vec<Point3>, orientation_out: Option<bool>) -> Result<Self> {
        if points.len() != FACE_POINTS {
            return Err(Error::DimensionMismatch {
                expected: FACE_POINTS,
                found: points.len(),
            });
        }
        check_finite(&points, "face")?;
        Ok(Self {
            points,
            orientation_out,
        })
    }

    /// Builds a grid by evaluating `f(i, j)` at every `(u, v)` index.
    pub fn from_fn(
        orientation_out: Option<bool>,
        mut f: impl FnMut(usize, usize) -> Point3,
    ) -> Result<Self> {
        let mut points = Vec::with_capacity(FACE_POINTS);
        for i in 0..GRID_SIZE {
            for j in 0..GRID_SIZE {
                points.push(f(i, j));
            }
        }
        Self::new(points, orientation_out)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Point3 {
        self.points[i * GRID_SIZE + j]
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    /// Applies a per-point map, keeping orientation.
    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> FaceGrid {
        FaceGrid {
            points: self.points.iter().map(|&p| f(p)).collect(),
            orientation_out: self.orientation_out,
        }
    }

    /// Reverses the `u` and/or `v` index directions.
    pub fn flipped(&self, flips: FaceFlips) -> FaceGrid {
        let last = GRID_SIZE - 1;
        let mut points = Vec::with_capacity(FACE_POINTS);
        for i in 0..GRID_SIZE {
            let si = if flips.u { last - i } else { i };
            for j in 0..GRID_SIZE {
                let sj = if flips.v { last - j } else { j };
                points.push(self.at(si, sj));
            }
        }
        let parity = flips.u ^ flips.v;
        FaceGrid {
            points,
            orientation_out: self.orientation_out.map(|o| o ^ parity),
        }
    }

    /// Unnormalized normal `d/du x d/dv` from central differences at the grid centre.
    pub fn center_normal(&self) -> Point3 {
        let m = GRID_SIZE / 2;
        let du = sub(self.at(m + 1, m), self.at(m - 1, m));
        let dv = sub(self.at(m, m + 1), self.at(m, m - 1));
        cross(du, dv)
    }
}

impl PointGrid for FaceGrid {
    fn points(&self) -> &[Point3] {
        &self.points
    }
}

/// 32 points sampled along an edge's curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGrid {
    points: Vec<Point3>,
}

impl EdgeGrid {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.len() != GRID_SIZE {
            return Err(Error::DimensionMismatch {
                expected: GRID_SIZE,
                found: points.len(),
            });
        }
        check_finite(&points, "edge")?;
        Ok(Self { points })
    }

    pub fn from_fn(f: impl FnMut(usize) -> Point3) -> Result<Self> {
        Self::new((0..GRID_SIZE).map(f).collect())
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> EdgeGrid {
        EdgeGrid {
            points: self.points.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn reversed(&self) -> EdgeGrid {
        EdgeGrid {
            points: self.points.iter().rev().copied().collect(),
        }
    }
}

impl PointGrid for EdgeGrid {
    fn points(&self) -> &[Point3] {
        &self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        if min.iter().chain(max.iter()).any(|c| !c.is_finite()) {
            return Err(Error::MalformedGeometry("non-finite box corner".into()));
        }
        if (0..3).any(|a| min[a] > max[a]) {
            return Err(Error::MalformedGeometry(format!(
                "box min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    /// Bounding box of a nonempty set of finite points.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            b.include(*p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: Point3) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(p[a]);
            self.max[a] = self.max[a].max(p[a]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut b = *self;
        b.include(other.min);
        b.include(other.max);
        b
    }

    pub fn extent(&self) -> Point3 {
        sub(self.max, self.min)
    }

    pub fn max_extent(&self) -> f64 {
        let e = self.extent();
        e[0].max(e[1]).max(e[2])
    }

    pub fn center(&self) -> Point3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn dist2_to(&self, p: Point3) -> f64 {
        let mut d = 0.0;
        for a in 0..3 {
            let v = if p[a] < self.min[a] {
                self.min[a] - p[a]
            } else if p[a] > self.max[a] {
                p[a] - self.max[a]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }
}

/// Componentwise min/max over all grid points.
pub fn compute_aabb(grid: &impl PointGrid) -> Result<Aabb> {
    let pts = grid.points();
    check_finite(pts, "grid")?;
    Aabb::from_points(pts).ok_or_else(|| Error::MalformedGeometry("empty grid".into()))
}

/// Uniform map taking a box onto `[-1, 1]^3`: centre at the box midpoint,
/// scale so the longest axis spans exactly `[-1, 1]`. Collapsed axes map to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCubeMap {
    center: Point3,
    scale: f64,
    collapsed: [bool; 3],
}

impl UnitCubeMap {
    pub fn for_box(b: &Aabb) -> Result<Self> {
        let ext = b.extent();
        let longest = b.max_extent();
        if longest < DEGENERATE_EXTENT {
            return Err(Error::DegenerateGeometry(
                "every axis of the box has zero extent".into(),
            ));
        }
        Ok(Self {
            center: b.center(),
            scale: 2.0 / longest,
            collapsed: [
                ext[0] < DEGENERATE_EXTENT,
                ext[1] < DEGENERATE_EXTENT,
                ext[2] < DEGENERATE_EXTENT,
            ],
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn forward(&self, p: Point3) -> Point3 {
        let mut q = [0.0; 3];
        for a in 0..3 {
            q[a] = if self.collapsed[a] {
                0.0
            } else {
                (p[a] - self.center[a]) * self.scale
            };
        }
        q
    }

    pub fn inverse(&self, q: Point3) -> Point3 {
        [
            self.center[0] + q[0] / self.scale,
            self.center[1] + q[1] / self.scale,
            self.center[2] + q[2] / self.scale,
        ]
    }

    pub fn forward_box(&self, b: &Aabb) -> Aabb {
        Aabb {
            min: self.forward(b.min),
            max: self.forward(b.max),
        }
    }

    pub fn inverse_box(&self, b: &Aabb) -> Aabb {
        Aabb {
            min: self.inverse(b.min),
            max: self.inverse(b.max),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FaceFlips {
    pub u: bool,
    pub v: bool,
}

impl FaceFlips {
    /// All four configurations in tie-break preference order.
    pub const ALL: [FaceFlips; 4] = [
        FaceFlips { u: false, v: false },
        FaceFlips { u: true, v: false },
        FaceFlips { u: false, v: true },
        FaceFlips { u: true, v: true },
    ];
}

/// A face grid normalized into `[-1, 1]^3`, with the placement needed to undo it.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFace {
    pub grid: FaceGrid,
    pub bbox: Aabb,
    pub flips: FaceFlips,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalEdge {
    pub grid: EdgeGrid,
    pub bbox: Aabb,
    pub reversed: bool,
}

fn normalize_points(points: &[Point3], bbox: &Aabb) -> Result<Vec<Point3>> {
    let map = UnitCubeMap::for_box(bbox)?;
    let out: Vec<Point3> = points.iter().map(|&p| map.forward(p)).collect();
    if out.iter().flatten().any(|c| c.abs() > 1.0 + 1e-9) {
        return Err(Error::Contract(
            "grid extends outside the normalization box".into(),
        ));
    }
    Ok(out)
}

/// Maps a face grid into `[-1, 1]^3` using `bbox` (normally `compute_aabb(grid)`).
pub fn normalize_face(grid: &FaceGrid, bbox: &Aabb) -> Result<CanonicalFace> {
    let points = normalize_points(grid.points(), bbox)?;
    Ok(CanonicalFace {
        grid: FaceGrid {
            points,
            orientation_out: grid.orientation_out,
        },
        bbox: *bbox,
        flips: FaceFlips::default(),
    })
}

pub fn normalize_edge(grid: &EdgeGrid, bbox: &Aabb) -> Result<CanonicalEdge> {
    let points = normalize_points(grid.points(), bbox)?;
    Ok(CanonicalEdge {
        grid: EdgeGrid { points },
        bbox: *bbox,
        reversed: false,
    })
}

impl CanonicalFace {
    /// Undoes the normalization (flips stay applied).
    pub fn denormalize(&self) -> Result<FaceGrid> {
        let map = UnitCubeMap::for_box(&self.bbox)?;
        Ok(self.grid.map_points(|q| map.inverse(q)))
    }
}

impl CanonicalEdge {
    pub fn denormalize(&self) -> Result<EdgeGrid> {
        let map = UnitCubeMap::for_box(&self.bbox)?;
        Ok(self.grid.map_points(|q| map.inverse(q)))
    }
}

/// Visiting order used to compare flip configurations: the origin corner,
/// then its two neighbours along `v` and `u`, then every other point row-major.
fn canonical_visit_order() -> &'static [(usize, usize)] {
    static ORDER: std::sync::OnceLock<Vec<(usize, usize)>> = std::sync::OnceLock::new();
    ORDER.get_or_init(|| {
        let mut order = vec![(0, 0), (0, 1), (1, 0)];
        for i in 0..GRID_SIZE {
            for j in 0..GRID_SIZE {
                if !order.contains(&(i, j)) {
                    order.push((i, j));
                }
            }
        }
        order
    })
}

fn flipped_index(i: usize, j: usize, f: FaceFlips) -> (usize, usize) {
    let last = GRID_SIZE - 1;
    (if f.u { last - i } else { i }, if f.v { last - j } else { j })
}

/// Flips the grid so its lexicographically smallest corner becomes the UV origin.
///
/// Exact corner ties fall through to the neighbouring points; a fully
/// symmetric grid keeps the configuration with the fewest flips.
pub fn canonicalize_uv_origin(grid: &FaceGrid) -> (FaceGrid, FaceFlips) {
    let order = canonical_visit_order();
    let mut best = FaceFlips::ALL[0];
    for &cand in &FaceFlips::ALL[1..] {
        let mut ord = Ordering::Equal;
        for &(i, j) in order {
            let (ci, cj) = flipped_index(i, j, cand);
            let (bi, bj) = flipped_index(i, j, best);
            ord = lex_cmp(&grid.at(ci, cj), &grid.at(bi, bj));
            if ord != Ordering::Equal {
                break;
            }
        }
        if ord == Ordering::Less {
            best = cand;
        }
    }
    (grid.flipped(best), best)
}

/// Reverses the edge when its last point sorts before its first; ties
/// compare the next pair of points inward.
pub fn canonicalize_edge_direction(grid: &EdgeGrid) -> (EdgeGrid, bool) {
    let pts = grid.points();
    let n = pts.len();
    for k in 0..n {
        match lex_cmp(&pts[n - 1 - k], &pts[k]) {
            Ordering::Less => return (grid.reversed(), true),
            Ordering::Greater => return (grid.clone(), false),
            Ordering::Equal => {}
        }
    }
    (grid.clone(), false)
}

/// Canonical UV origin followed by normalization into its own bounding box.
pub fn canonical_face(grid: &FaceGrid) -> Result<CanonicalFace> {
    let (flipped, flips) = canonicalize_uv_origin(grid);
    let bbox = compute_aabb(&flipped)?;
    let mut c = normalize_face(&flipped, &bbox)?;
    c.flips = flips;
    Ok(c)
}

pub fn canonical_edge(grid: &EdgeGrid) -> Result<CanonicalEdge> {
    let (g, reversed) = canonicalize_edge_direction(grid);
    let bbox = compute_aabb(&g)?;
    let mut c = normalize_edge(&g, &bbox)?;
    c.reversed = reversed;
    Ok(c)
}
