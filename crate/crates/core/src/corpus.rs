//! Synthetic solids with exact analytic point grids and constraint labels.
//!
//! Periodic surfaces are split along seams: a cylinder wall becomes two
//! half-cylinder faces joined by two seam edges. Planar faces are sampled
//! over their bounding rectangle, so a cap with holes is still one grid.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::document::{BRepDocument, Labels};
use crate::error::{Error, Result};
use crate::geometry::{dot, sub, EdgeGrid, FaceGrid, Point3};
use crate::tokens::ComplexityClass;
use crate::topology::{rotate_graph, BRepGraph, Edge, Face, QuarterTurn};
use crate::validity::{check_validity, DEFAULT_GAP_TOL};

const N: f64 = 31.0;

fn lin(a: f64, b: f64, k: usize) -> f64 {
    a + (b - a) * k as f64 / N
}

/// Face grid whose orientation flag is set from an outward direction at
/// the grid centre.
fn face(outward: Point3, f: impl FnMut(usize, usize) -> Point3) -> Result<Face> {
    let mut grid = FaceGrid::from_fn(Some(true), f)?;
    grid.orientation_out = Some(dot(grid.center_normal(), outward) > 0.0);
    Face::new(grid)
}

fn edge(a: usize, b: usize, f: impl FnMut(usize) -> Point3) -> Result<Edge> {
    Edge::between(EdgeGrid::from_fn(f)?, a, b)
}

/// Axis-aligned rectangle at `axis = value` spanning `lo..hi` on the other axes.
fn rect(axis: usize, value: f64, lo: Point3, hi: Point3, outward: f64) -> Result<Face> {
    let (ua, va) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut dir = [0.0; 3];
    dir[axis] = outward;
    face(dir, |i, j| {
        let mut p = [0.0; 3];
        p[axis] = value;
        p[ua] = lin(lo[ua], hi[ua], i);
        p[va] = lin(lo[va], hi[va], j);
        p
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Generator(format!("{name} must be positive, got {v}")))
    }
}

fn document(faces: Vec<Face>, edges: Vec<Edge>, bolt_holes: Vec<usize>, hull_planes: Vec<usize>) -> Result<BRepDocument> {
    let g = BRepGraph::new(faces, edges)?;
    let complexity = Some(ComplexityClass::from_face_count(g.face_count()));
    Ok(BRepDocument::from_graph(
        &g,
        Some(Labels {
            bolt_holes,
            hull_planes,
            complexity,
        }),
    ))
}

/// Faces and edges of an axis-aligned box `[0, size]`; faces are ordered
/// x-, x+, y-, y+, z-, z+.
fn box_parts(size: Point3) -> Result<(Vec<Face>, Vec<Edge>)> {
    let lo = [0.0; 3];
    let mut faces = Vec::with_capacity(6);
    for axis in 0..3 {
        faces.push(rect(axis, 0.0, lo, size, -1.0)?);
        faces.push(rect(axis, size[axis], lo, size, 1.0)?);
    }
    let mut edges = Vec::with_capacity(12);
    for a in 0..6 {
        for b in a + 1..6 {
            if a / 2 == b / 2 {
                continue;
            }
            let (aa, ab) = (a / 2, b / 2);
            let free = 3 - aa - ab;
            let side = |f: usize| if f.is_multiple_of(2) { 0.0 } else { size[f / 2] };
            edges.push(edge(a, b, |k| {
                let mut p = [0.0; 3];
                p[aa] = side(a);
                p[ab] = side(b);
                p[free] = lin(0.0, size[free], k);
                p
            })?);
        }
    }
    Ok((faces, edges))
}

pub fn gen_box(size: Point3) -> Result<BRepDocument> {
    for (k, &s) in size.iter().enumerate() {
        positive(&format!("box size[{k}]"), s)?;
    }
    let (faces, edges) = box_parts(size)?;
    document(faces, edges, vec![], (0..6).collect())
}

/// Half of a vertical cylinder wall: `x <= cx` when `left`, else `x >= cx`.
/// `inward` makes the outward side face the axis (a hole wall).
fn half_wall(c: [f64; 2], r: f64, z: [f64; 2], left: bool, inward: bool) -> Result<Face> {
    let t0 = if left { PI / 2.0 } else { -PI / 2.0 };
    let sign = if inward { -1.0 } else { 1.0 };
    let out = [sign * if left { -1.0 } else { 1.0 }, 0.0, 0.0];
    face(out, |i, j| {
        let t = lin(t0, t0 + PI, i);
        [c[0] + r * t.cos(), c[1] + r * t.sin(), lin(z[0], z[1], j)]
    })
}

fn half_circle(c: [f64; 2], r: f64, z: f64, left: bool) -> impl FnMut(usize) -> Point3 {
    let t0 = if left { PI / 2.0 } else { -PI / 2.0 };
    move |k| {
        let t = lin(t0, t0 + PI, k);
        [c[0] + r * t.cos(), c[1] + r * t.sin(), z]
    }
}

fn seam(c: [f64; 2], r: f64, z: [f64; 2], top: bool) -> impl FnMut(usize) -> Point3 {
    let y = if top { c[1] + r } else { c[1] - r };
    move |k| [c[0], y, lin(z[0], z[1], k)]
}

/// Cylinder of radius `radius` on the z axis from 0 to `height`. Faces:
/// bottom cap, wall half with x <= 0, wall half with x >= 0, top cap.
/// Edges: bottom halves, the two seams, top halves.
pub fn gen_cylinder(radius: f64, height: f64) -> Result<BRepDocument> {
    positive("radius", radius)?;
    positive("height", height)?;
    let (c, z) = ([0.0, 0.0], [0.0, height]);
    let lo = [-radius, -radius, 0.0];
    let hi = [radius, radius, height];
    let faces = vec![
        rect(2, 0.0, lo, hi, -1.0)?,
        half_wall(c, radius, z, true, false)?,
        half_wall(c, radius, z, false, false)?,
        rect(2, height, lo, hi, 1.0)?,
    ];
    let edges = vec![
        edge(1, 0, half_circle(c, radius, 0.0, true))?,
        edge(2, 0, half_circle(c, radius, 0.0, false))?,
        edge(2, 1, seam(c, radius, z, true))?,
        edge(2, 1, seam(c, radius, z, false))?,
        edge(3, 1, half_circle(c, radius, height, true))?,
        edge(3, 2, half_circle(c, radius, height, false))?,
    ];
    document(faces, edges, vec![], vec![0, 3])
}

/// Right prism over a regular `sides`-gon with circumradius `radius` and a
/// vertex on the +x axis. Faces: bottom, top, then the sides.
pub fn gen_prism(sides: usize, radius: f64, height: f64) -> Result<BRepDocument> {
    if sides < 3 {
        return Err(Error::Generator(format!("a prism needs at least 3 sides, got {sides}")));
    }
    positive("radius", radius)?;
    positive("height", height)?;
    let vertex = |k: usize| {
        let t = 2.0 * PI * (k % sides) as f64 / sides as f64;
        [radius * t.cos(), radius * t.sin()]
    };
    let mut lo = [f64::INFINITY, f64::INFINITY, 0.0];
    let mut hi = [f64::NEG_INFINITY, f64::NEG_INFINITY, height];
    for k in 0..sides {
        let v = vertex(k);
        for a in 0..2 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    let mut faces = vec![rect(2, 0.0, lo, hi, -1.0)?, rect(2, height, lo, hi, 1.0)?];
    let mut hull = vec![0, 1];
    for k in 0..sides {
        let (a, b) = (vertex(k), vertex(k + 1));
        let mid = 2.0 * PI * (k as f64 + 0.5) / sides as f64;
        faces.push(face([mid.cos(), mid.sin(), 0.0], |i, j| {
            [lin(a[0], b[0], i), lin(a[1], b[1], i), lin(0.0, height, j)]
        })?);
        // the side normal sits at (2k+1) pi / n; axis-aligned sides touch the box
        if (2 * (2 * k + 1)) % sides == 0 {
            hull.push(k + 2);
        }
    }
    let mut edges = Vec::with_capacity(3 * sides);
    for k in 0..sides {
        let (a, b) = (vertex(k), vertex(k + 1));
        for (cap, z) in [(0, 0.0), (1, height)] {
            edges.push(edge(k + 2, cap, |i| [lin(a[0], b[0], i), lin(a[1], b[1], i), z])?);
        }
        let next = (k + 1) % sides + 2;
        edges.push(edge(next, k + 2, |i| [b[0], b[1], lin(0.0, height, i)])?);
    }
    document(faces, edges, vec![], hull)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hole {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Box `[0, size]` with vertical through holes. Faces: the six box faces
/// (x-, x+, y-, y+, bottom, top), then two wall halves per hole.
pub fn gen_plate_with_holes(size: Point3, holes: &[Hole]) -> Result<BRepDocument> {
    for (k, &s) in size.iter().enumerate() {
        positive(&format!("plate size[{k}]"), s)?;
    }
    for (i, h) in holes.iter().enumerate() {
        positive("hole radius", h.radius)?;
        let inside = (0..2).all(|a| h.center[a] - h.radius > 0.0 && h.center[a] + h.radius < size[a]);
        if !inside {
            return Err(Error::Generator(format!("hole {i} is not inside the plate")));
        }
        for (j, o) in holes[..i].iter().enumerate() {
            let d = (h.center[0] - o.center[0]).hypot(h.center[1] - o.center[1]);
            if d <= h.radius + o.radius {
                return Err(Error::Generator(format!("holes {j} and {i} overlap")));
            }
        }
    }
    let (mut faces, mut edges) = box_parts(size)?;
    let (bottom, top) = (4, 5);
    let z = [0.0, size[2]];
    let mut bolt = Vec::with_capacity(2 * holes.len());
    for h in holes {
        let (l, r) = (faces.len(), faces.len() + 1);
        faces.push(half_wall(h.center, h.radius, z, true, true)?);
        faces.push(half_wall(h.center, h.radius, z, false, true)?);
        bolt.extend([l, r]);
        for (wall, left) in [(l, true), (r, false)] {
            edges.push(edge(wall, bottom, half_circle(h.center, h.radius, 0.0, left))?);
            edges.push(edge(wall, top, half_circle(h.center, h.radius, size[2], left))?);
        }
        edges.push(edge(r, l, seam(h.center, h.radius, z, true))?);
        edges.push(edge(r, l, seam(h.center, h.radius, z, false))?);
    }
    document(faces, edges, bolt, (0..6).collect())
}

/// Similarity placed after generation: uniform scale, exact quarter turn,
/// then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub scale: f64,
    pub turn: QuarterTurn,
    pub offset: Point3,
}

impl Placement {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            scale: rng.random_range(0.5..2.0),
            turn: QuarterTurn {
                axis: rng.random_range(0..3),
                turns: rng.random_range(0..4),
            },
            offset: [
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ],
        }
    }

    pub fn apply(&self, doc: &BRepDocument) -> Result<BRepDocument> {
        let g = doc.to_graph()?;
        let s = self.scale;
        let scaled = g.map_points(|p| [p[0] * s, p[1] * s, p[2] * s])?;
        let o = self.offset;
        let placed = rotate_graph(&scaled, self.turn)?
            .map_points(|p| [p[0] + o[0], p[1] + o[1], p[2] + o[2]])?;
        Ok(BRepDocument::from_graph(&placed, doc.labels.clone()))
    }
}

/// Holes on a jittered cell layout; a hole never leaves its cell, so the
/// layout cannot overlap.
fn random_plate(holes: usize, rng: &mut impl Rng) -> Result<BRepDocument> {
    let cols = (holes as f64).sqrt().ceil().max(1.0) as usize;
    let rows = holes.div_ceil(cols).max(1);
    let cell = rng.random_range(1.0..2.0);
    let size = [cols as f64 * cell, rows as f64 * cell, rng.random_range(0.2..0.6) * cell];
    let list: Vec<Hole> = (0..holes)
        .map(|k| {
            let (cx, cy) = ((k % cols) as f64 + 0.5, (k / cols) as f64 + 0.5);
            Hole {
                center: [
                    (cx + rng.random_range(-0.1..0.1)) * cell,
                    (cy + rng.random_range(-0.1..0.1)) * cell,
                ],
                radius: rng.random_range(0.1..0.3) * cell,
            }
        })
        .collect();
    gen_plate_with_holes(size, &list)
}

/// One random solid whose face count falls in `class` (`Random` picks a class).
pub fn random_solid(class: ComplexityClass, rng: &mut impl Rng) -> Result<BRepDocument> {
    let class = match class {
        ComplexityClass::Random => [ComplexityClass::Easy, ComplexityClass::Medium, ComplexityClass::Hard]
            [rng.random_range(0..3)],
        c => c,
    };
    let dims = |rng: &mut dyn rand::RngCore| {
        [
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..2.0),
        ]
    };
    let (prism_sides, plate_holes) = match class {
        ComplexityClass::Easy => (3..=22, 1..=9),
        ComplexityClass::Medium => (23..=48, 10..=22),
        _ => (49..=98, 23..=47),
    };
    let base = match (class, rng.random_range(0..4)) {
        (ComplexityClass::Easy, 0) => gen_box(dims(rng))?,
        (ComplexityClass::Easy, 1) => gen_cylinder(rng.random_range(0.3..1.5), rng.random_range(0.3..2.0))?,
        (_, 0 | 2) => gen_prism(
            rng.random_range(prism_sides),
            rng.random_range(0.5..2.0),
            rng.random_range(0.3..2.0),
        )?,
        _ => random_plate(rng.random_range(plate_holes), rng)?,
    };
    Placement::random(rng).apply(&base)
}

fn solid_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn checked(doc: BRepDocument, index: usize) -> Result<BRepDocument> {
    let report = check_validity(&doc.to_graph()?, DEFAULT_GAP_TOL);
    if !report.is_manifold_closed {
        return Err(Error::Generator(format!(
            "solid {index} failed the validity check with {} violations",
            report.violation_count()
        )));
    }
    Ok(doc)
}

/// `count` validity-checked solids cycling through Easy, Medium and Hard.
/// Solid `i` depends only on `(seed, i)`.
pub fn gen_corpus(count: usize, seed: u64) -> Result<Vec<BRepDocument>> {
    const CLASSES: [ComplexityClass; 3] = [ComplexityClass::Easy, ComplexityClass::Medium, ComplexityClass::Hard];
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = solid_rng(seed, i as u64);
            checked(random_solid(CLASSES[i % 3], &mut rng)?, i)
        })
        .collect()
}

/// Placed plates with 1 to 6 holes.
pub fn gen_plate_corpus(count: usize, seed: u64) -> Result<Vec<BRepDocument>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = solid_rng(seed, i as u64);
            let base = random_plate(rng.random_range(1..=6), &mut rng)?;
            checked(Placement::random(&mut rng).apply(&base)?, i)
        })
        .collect()
}

/// Outward-facing check used by tests: the flagged normal at the grid centre
/// points away from `inside`.
pub fn faces_point_away(g: &BRepGraph, inside: Point3) -> bool {
    g.faces.iter().all(|f| {
        let n = f.grid.center_normal();
        let n = if f.grid.orientation_out == Some(false) { [-n[0], -n[1], -n[2]] } else { n };
        dot(n, sub(f.grid.at(15, 15), inside)) >= 0.0
    })
}
