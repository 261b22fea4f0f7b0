//! Latent geometry codes and the pluggable encoder contract.
//!
//! A face compresses to four FSQ cells and an edge to two; each cell is a
//! 4-vector quantized with levels `[8, 5, 5, 5]`. [`MomentCodec`] is the
//! deterministic reference implementation: it projects each coordinate
//! channel onto low-order discrete Legendre polynomials along the grid
//! parameters and keeps the coefficient ratios. Absolute offset and scale
//! per axis are not stored; the decoder fits the reconstruction to the
//! placement box carried alongside the code.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fsq::{fsq_quantize, FsqLevels};
use crate::geometry::{
    Aabb, CanonicalEdge, CanonicalFace, EdgeGrid, FaceGrid, PointGrid, DEGENERATE_EXTENT,
    GRID_SIZE,
};

pub const FACE_CELLS: usize = 4;
pub const EDGE_CELLS: usize = 2;
pub const CELL_DIMS: usize = 4;

pub type Cell = [f64; CELL_DIMS];

#[derive(Debug, Clone, PartialEq)]
pub struct FaceLatent {
    /// Pre-quantization cell vectors, row-major over the 2x2 layout.
    pub cells: [Cell; FACE_CELLS],
    pub codes: [u16; FACE_CELLS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLatent {
    pub cells: [Cell; EDGE_CELLS],
    pub codes: [u16; EDGE_CELLS],
}

fn quantize_cells<const N: usize>(cells: &[Cell; N], levels: &FsqLevels) -> [u16; N] {
    let mut codes = [0u16; N];
    for (c, cell) in codes.iter_mut().zip(cells) {
        *c = fsq_quantize(cell, levels)
            .expect("cell width matches level count")
            .index as u16;
    }
    codes
}

fn snapped_cells<const N: usize>(codes: &[u16; N], levels: &FsqLevels) -> Result<[Cell; N]> {
    let mut cells = [[0.0; CELL_DIMS]; N];
    for (cell, &code) in cells.iter_mut().zip(codes) {
        let v = crate::fsq::fsq_dequantize(code as usize, levels)?;
        cell.copy_from_slice(&v);
    }
    Ok(cells)
}

impl FaceLatent {
    pub fn from_cells(cells: [Cell; FACE_CELLS], levels: &FsqLevels) -> Self {
        let codes = quantize_cells(&cells, levels);
        Self { cells, codes }
    }

    /// Rebuilds a latent from codebook indices; `cells` hold the snapped values.
    pub fn from_codes(codes: [u16; FACE_CELLS], levels: &FsqLevels) -> Result<Self> {
        Ok(Self {
            cells: snapped_cells(&codes, levels)?,
            codes,
        })
    }
}

impl EdgeLatent {
    pub fn from_cells(cells: [Cell; EDGE_CELLS], levels: &FsqLevels) -> Self {
        let codes = quantize_cells(&cells, levels);
        Self { cells, codes }
    }

    pub fn from_codes(codes: [u16; EDGE_CELLS], levels: &FsqLevels) -> Result<Self> {
        Ok(Self {
            cells: snapped_cells(&codes, levels)?,
            codes,
        })
    }
}

/// Maps canonical grids to latent codes and back.
///
/// Decoders receive the placement box the reconstruction must occupy;
/// codes are at most 1000 entries per codebook so they fit the token
/// vocabulary.
pub trait LatentEncoder: Send + Sync {
    fn levels(&self) -> &FsqLevels;
    fn encode_face(&self, face: &CanonicalFace) -> FaceLatent;
    fn decode_face(&self, code: &FaceLatent, placement: &Aabb) -> Result<FaceGrid>;
    fn encode_edge(&self, edge: &CanonicalEdge) -> EdgeLatent;
    fn decode_edge(&self, code: &EdgeLatent, placement: &Aabb) -> Result<EdgeGrid>;
}

struct Basis {
    p1: [f64; GRID_SIZE],
    p2: [f64; GRID_SIZE],
    p3: [f64; GRID_SIZE],
    n1: f64,
    n2: f64,
    n3: f64,
}

/// Discrete Legendre-like polynomials on the 32 sample parameters in [-1, 1],
/// mutually orthogonal and orthogonal to constants.
fn basis() -> &'static Basis {
    static B: OnceLock<Basis> = OnceLock::new();
    B.get_or_init(|| {
        let n = (GRID_SIZE - 1) as f64;
        let s: Vec<f64> = (0..GRID_SIZE).map(|k| 2.0 * k as f64 / n - 1.0).collect();
        let m2 = s.iter().map(|x| x * x).sum::<f64>() / GRID_SIZE as f64;
        let r = s.iter().map(|x| x.powi(4)).sum::<f64>() / s.iter().map(|x| x * x).sum::<f64>();
        let mut b = Basis {
            p1: [0.0; GRID_SIZE],
            p2: [0.0; GRID_SIZE],
            p3: [0.0; GRID_SIZE],
            n1: 0.0,
            n2: 0.0,
            n3: 0.0,
        };
        for (k, &x) in s.iter().enumerate() {
            b.p1[k] = x;
            b.p2[k] = x * x - m2;
            b.p3[k] = x * x * x - r * x;
        }
        b.n1 = b.p1.iter().map(|x| x * x).sum();
        b.n2 = b.p2.iter().map(|x| x * x).sum();
        b.n3 = b.p3.iter().map(|x| x * x).sum();
        b
    })
}

const S_DIR: usize = 0;
const T_DIR: usize = 1;

/// Face terms in code order: linear along u, linear along v, quadratic
/// along u, quadratic along v.
const FACE_TERMS: [(usize, usize); 4] = [(1, S_DIR), (1, T_DIR), (2, S_DIR), (2, T_DIR)];

fn poly(b: &Basis, order: usize) -> (&[f64; GRID_SIZE], f64) {
    match order {
        1 => (&b.p1, b.n1),
        2 => (&b.p2, b.n2),
        _ => (&b.p3, b.n3),
    }
}

/// Level on the 8-level channel selecting the dominant term and its sign.
fn selector_level(term: usize, positive: bool) -> u32 {
    2 * term as u32 + positive as u32
}

fn selector_term(level: u32, terms: usize) -> (usize, f64) {
    let l = level as usize % (2 * terms);
    (l / 2, if l % 2 == 1 { 1.0 } else { -1.0 })
}

/// Relative coefficients of one axis: the dominant term, its sign, the
/// remaining terms divided by the dominant magnitude, and the cubic term
/// along the dominant direction.
#[derive(Debug, Clone, Copy, PartialEq)]
struct AxisProfile<const T: usize> {
    dominant: usize,
    positive: bool,
    coef: [f64; T],
    cubic: f64,
}

impl<const T: usize> AxisProfile<T> {
    fn flat() -> Self {
        let mut coef = [0.0; T];
        coef[0] = 1.0;
        Self {
            dominant: 0,
            positive: true,
            coef,
            cubic: 0.0,
        }
    }

    fn from_projections(raw: [f64; T], cubic_along: impl Fn(usize) -> f64) -> Self {
        let mut dominant = 0;
        for k in 1..T {
            if raw[k].abs() > raw[dominant].abs() {
                dominant = k;
            }
        }
        let mag = raw[dominant].abs();
        if mag < DEGENERATE_EXTENT {
            return Self::flat();
        }
        let mut coef = [0.0; T];
        for k in 0..T {
            coef[k] = (raw[k] / mag).clamp(-1.0, 1.0);
        }
        Self {
            dominant,
            positive: raw[dominant] > 0.0,
            coef,
            cubic: (cubic_along(dominant) / mag).clamp(-1.0, 1.0),
        }
    }

    fn others(&self) -> impl Iterator<Item = f64> + '_ {
        (0..T).filter(move |&k| k != self.dominant).map(|k| self.coef[k])
    }
}

fn axis_range(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    hi - lo
}

/// Affinely maps `values` onto `[lo, hi]`; collapsed targets or flat
/// inputs land on the midpoint.
fn fit_to_range(values: &mut [f64], lo: f64, hi: f64) {
    let mid = 0.5 * (lo + hi);
    let (vmin, vmax) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < DEGENERATE_EXTENT || vmax - vmin < DEGENERATE_EXTENT {
        values.iter_mut().for_each(|v| *v = mid);
        return;
    }
    let scale = (hi - lo) / (vmax - vmin);
    for v in values.iter_mut() {
        *v = lo + (*v - vmin) * scale;
    }
}

fn orientation_value(o: Option<bool>) -> f64 {
    match o {
        Some(true) => 1.0,
        Some(false) => -1.0,
        None => FsqLevels::level_value(3, 8),
    }
}

fn orientation_from_level(k: u32) -> Option<bool> {
    match k {
        7 => Some(true),
        0 => Some(false),
        _ => None,
    }
}

/// Reference codec built from separable polynomial moments.
///
/// Face layout: cells 0..3 hold the x, y and z channels as
/// `[selector, other terms...]`, where the 8-level selector names the
/// dominant term and its sign; cell 3 holds `[orientation, cubic x, cubic y,
/// cubic z]`. Edge layout: `[sel x, other x, cubic x, sel z]` and
/// `[sel y, other y, cubic y, other z]`; the z channel of an edge carries
/// no cubic term.
#[derive(Debug, Clone, Default)]
pub struct MomentCodec {
    levels: FsqLevels,
}

impl MomentCodec {
    pub fn new() -> Self {
        Self::default()
    }

    fn face_profile(grid: &FaceGrid, axis: usize) -> AxisProfile<4> {
        let pts = grid.points();
        if axis_range(pts.iter().map(|p| p[axis])) < DEGENERATE_EXTENT {
            return AxisProfile::flat();
        }
        let b = basis();
        // marginal sums along each parameter
        let mut along_s = [0.0; GRID_SIZE];
        let mut along_t = [0.0; GRID_SIZE];
        for i in 0..GRID_SIZE {
            for j in 0..GRID_SIZE {
                let v = pts[i * GRID_SIZE + j][axis];
                along_s[i] += v;
                along_t[j] += v;
            }
        }
        let project = |order: usize, dir: usize| {
            let (p, n) = poly(b, order);
            let marg = if dir == S_DIR { &along_s } else { &along_t };
            let dotp: f64 = p.iter().zip(marg).map(|(a, m)| a * m).sum();
            dotp / (n * GRID_SIZE as f64)
        };
        let raw = FACE_TERMS.map(|(order, dir)| project(order, dir));
        AxisProfile::from_projections(raw, |d| project(3, FACE_TERMS[d].1))
    }

    fn edge_profile(grid: &EdgeGrid, axis: usize) -> AxisProfile<2> {
        let pts = grid.points();
        if axis_range(pts.iter().map(|p| p[axis])) < DEGENERATE_EXTENT {
            return AxisProfile::flat();
        }
        let b = basis();
        let project = |order: usize| {
            let (p, n) = poly(b, order);
            p.iter().zip(pts).map(|(a, q)| a * q[axis]).sum::<f64>() / n
        };
        AxisProfile::from_projections([project(1), project(2)], |_| project(3))
    }

    fn face_axis_values(profile: &AxisProfile<4>) -> Vec<f64> {
        let b = basis();
        let mut out = vec![0.0; GRID_SIZE * GRID_SIZE];
        let cubic_dir = FACE_TERMS[profile.dominant].1;
        for i in 0..GRID_SIZE {
            for j in 0..GRID_SIZE {
                let mut v = 0.0;
                for (k, &(order, dir)) in FACE_TERMS.iter().enumerate() {
                    let (p, _) = poly(b, order);
                    v += profile.coef[k] * p[if dir == S_DIR { i } else { j }];
                }
                v += profile.cubic * b.p3[if cubic_dir == S_DIR { i } else { j }];
                out[i * GRID_SIZE + j] = v;
            }
        }
        out
    }

    fn edge_axis_values(profile: &AxisProfile<2>) -> Vec<f64> {
        let b = basis();
        (0..GRID_SIZE)
            .map(|k| profile.coef[0] * b.p1[k] + profile.coef[1] * b.p2[k] + profile.cubic * b.p3[k])
            .collect()
    }
}

fn decoded_profile<const T: usize>(
    selector: (usize, f64),
    others: &[f64],
    cubic: f64,
) -> AxisProfile<T> {
    let (dominant, sign) = selector;
    let mut coef = [0.0; T];
    let mut it = others.iter();
    for (k, c) in coef.iter_mut().enumerate() {
        *c = if k == dominant {
            sign
        } else {
            *it.next().unwrap_or(&0.0)
        };
    }
    AxisProfile {
        dominant,
        positive: sign > 0.0,
        coef,
        cubic,
    }
}

impl LatentEncoder for MomentCodec {
    fn levels(&self) -> &FsqLevels {
        &self.levels
    }

    fn encode_face(&self, face: &CanonicalFace) -> FaceLatent {
        let mut cells = [[0.0; CELL_DIMS]; FACE_CELLS];
        for axis in 0..3 {
            let p = Self::face_profile(&face.grid, axis);
            cells[axis][0] = FsqLevels::level_value(selector_level(p.dominant, p.positive), 8);
            for (slot, v) in p.others().enumerate() {
                cells[axis][1 + slot] = v;
            }
            cells[3][1 + axis] = p.cubic;
        }
        cells[3][0] = orientation_value(face.grid.orientation_out);
        FaceLatent::from_cells(cells, &self.levels)
    }

    fn decode_face(&self, code: &FaceLatent, placement: &Aabb) -> Result<FaceGrid> {
        let snapped = snapped_cells(&code.codes, &self.levels)?;
        let ks: Vec<Vec<u32>> = code
            .codes
            .iter()
            .map(|&c| self.levels.unpack(c as usize))
            .collect();
        let mut channels: Vec<Vec<f64>> = Vec::with_capacity(3);
        for axis in 0..3 {
            let profile: AxisProfile<4> = decoded_profile(
                selector_term(ks[axis][0], 4),
                &snapped[axis][1..],
                snapped[3][1 + axis],
            );
            let mut values = Self::face_axis_values(&profile);
            fit_to_range(&mut values, placement.min[axis], placement.max[axis]);
            channels.push(values);
        }
        let points = (0..GRID_SIZE * GRID_SIZE)
            .map(|k| [channels[0][k], channels[1][k], channels[2][k]])
            .collect();
        FaceGrid::new(points, orientation_from_level(ks[3][0]))
    }

    fn encode_edge(&self, edge: &CanonicalEdge) -> EdgeLatent {
        let [px, py, pz] = [0, 1, 2].map(|a| Self::edge_profile(&edge.grid, a));
        let sel = |p: &AxisProfile<2>| selector_level(p.dominant, p.positive);
        let other = |p: &AxisProfile<2>| p.others().next().unwrap_or(0.0);
        let cells = [
            [
                FsqLevels::level_value(sel(&px), 8),
                other(&px),
                px.cubic,
                FsqLevels::level_value(sel(&pz), 5),
            ],
            [
                FsqLevels::level_value(sel(&py), 8),
                other(&py),
                py.cubic,
                other(&pz),
            ],
        ];
        EdgeLatent::from_cells(cells, &self.levels)
    }

    fn decode_edge(&self, code: &EdgeLatent, placement: &Aabb) -> Result<EdgeGrid> {
        let snapped = snapped_cells(&code.codes, &self.levels)?;
        let k0 = self.levels.unpack(code.codes[0] as usize);
        let k1 = self.levels.unpack(code.codes[1] as usize);
        let profiles: [AxisProfile<2>; 3] = [
            decoded_profile(selector_term(k0[0], 2), &[snapped[0][1]], snapped[0][2]),
            decoded_profile(selector_term(k1[0], 2), &[snapped[1][1]], snapped[1][2]),
            decoded_profile(selector_term(k0[3], 2), &[snapped[1][3]], 0.0),
        ];
        let mut channels: Vec<Vec<f64>> = Vec::with_capacity(3);
        for (axis, p) in profiles.iter().enumerate() {
            let mut values = Self::edge_axis_values(p);
            fit_to_range(&mut values, placement.min[axis], placement.max[axis]);
            channels.push(values);
        }
        EdgeGrid::new(
            (0..GRID_SIZE)
                .map(|k| [channels[0][k], channels[1][k], channels[2][k]])
                .collect(),
        )
    }
}

/// Validates that latent codes fit a 1000-entry codebook.
pub fn check_codes(codes: &[u16], levels: &FsqLevels) -> Result<()> {
    let size = levels.codebook_size();
    match codes.iter().find(|&&c| c as usize >= size) {
        Some(&c) => Err(Error::InvalidCode {
            index: c as usize,
            size,
        }),
        None => Ok(()),
    }
}
