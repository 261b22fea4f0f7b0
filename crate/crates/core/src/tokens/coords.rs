//! Coordinate binning of `[-1, 1]` onto 1024 equal bins.

use crate::geometry::{Aabb, Point3};

pub const COORD_BINS: u16 = 1024;
/// Half of one bin width.
pub const HALF_BIN: f64 = 1.0 / COORD_BINS as f64;

/// Bin of `v` after clamping into `[-1, 1]`.
pub fn quantize_coord(v: f64) -> u16 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
    let n = COORD_BINS as f64;
    let mut bin = (((v + 1.0) * 0.5 * n).floor() as i64).clamp(0, COORD_BINS as i64 - 1);
    // floating rounding can land one bin off near an edge
    let center = |b: i64| 2.0 * (b as f64 + 0.5) / n - 1.0;
    if v - center(bin) > HALF_BIN && bin < COORD_BINS as i64 - 1 {
        bin += 1;
    } else if center(bin) - v > HALF_BIN && bin > 0 {
        bin -= 1;
    }
    bin as u16
}

/// Centre of `bin`.
pub fn dequantize_coord(bin: u16) -> f64 {
    2.0 * (bin as f64 + 0.5) / COORD_BINS as f64 - 1.0
}

/// Bins of `[x0, y0, z0, x1, y1, z1]`.
pub fn quantize_box(b: &Aabb) -> [u16; 6] {
    [
        quantize_coord(b.min[0]),
        quantize_coord(b.min[1]),
        quantize_coord(b.min[2]),
        quantize_coord(b.max[0]),
        quantize_coord(b.max[1]),
        quantize_coord(b.max[2]),
    ]
}

pub fn dequantize_box(bins: &[u16; 6]) -> Aabb {
    let p = |k: usize| -> Point3 {
        [
            dequantize_coord(bins[k]),
            dequantize_coord(bins[k + 1]),
            dequantize_coord(bins[k + 2]),
        ]
    };
    let (lo, hi) = (p(0), p(3));
    // a hand-built stream may list corners out of order
    Aabb {
        min: [lo[0].min(hi[0]), lo[1].min(hi[1]), lo[2].min(hi[2])],
        max: [lo[0].max(hi[0]), lo[1].max(hi[1]), lo[2].max(hi[2])],
    }
}
