//! Finite scalar quantization.
//!
//! Each dimension `i` of a bounded vector is rounded onto `L_i` evenly
//! spaced levels in `[-1, 1]`; the level tuple packs into a mixed-radix
//! codebook index with dimension 0 least significant.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsqLevels(Vec<u32>);

impl Default for FsqLevels {
    fn default() -> Self {
        Self(vec![8, 5, 5, 5])
    }
}

impl FsqLevels {
    pub fn new(levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(|&l| l < 2) {
            return Err(Error::Contract(format!(
                "FSQ levels must be a nonempty list of integers >= 2, got {levels:?}"
            )));
        }
        let size = levels
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l as usize));
        if size.is_none() {
            return Err(Error::Contract("FSQ codebook size overflows".into()));
        }
        Ok(Self(levels))
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn codebook_size(&self) -> usize {
        self.0.iter().map(|&l| l as usize).product()
    }

    /// Lattice value of level `k` on a dimension with `l` levels.
    #[inline]
    pub fn level_value(k: u32, l: u32) -> f64 {
        2.0 * k as f64 / (l - 1) as f64 - 1.0
    }

    /// Level index for `v` on a dimension with `l` levels.
    #[inline]
    pub fn level_of(v: f64, l: u32) -> u32 {
        let v = if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
        // f64::round is half-away-from-zero; the argument is non-negative.
        let k = ((v + 1.0) * 0.5 * (l - 1) as f64).round();
        (k.max(0.0) as u32).min(l - 1)
    }

    pub fn pack(&self, ks: &[u32]) -> usize {
        let mut index = 0usize;
        let mut radix = 1usize;
        for (&k, &l) in ks.iter().zip(&self.0) {
            index += k as usize * radix;
            radix *= l as usize;
        }
        index
    }

    pub fn unpack(&self, mut index: usize) -> Vec<u32> {
        self.0
            .iter()
            .map(|&l| {
                let k = (index % l as usize) as u32;
                index /= l as usize;
                k
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub index: usize,
    pub snapped: Vec<f64>,
}

/// Clamps `v` into `[-1, 1]`, rounds each dimension onto its levels and
/// returns the packed index together with the snapped vector.
pub fn fsq_quantize(v: &[f64], levels: &FsqLevels) -> Result<Quantized> {
    if v.len() != levels.dims() {
        return Err(Error::DimensionMismatch {
            expected: levels.dims(),
            found: v.len(),
        });
    }
    let ks: Vec<u32> = v
        .iter()
        .zip(levels.levels())
        .map(|(&x, &l)| FsqLevels::level_of(x, l))
        .collect();
    let snapped = ks
        .iter()
        .zip(levels.levels())
        .map(|(&k, &l)| FsqLevels::level_value(k, l))
        .collect();
    Ok(Quantized {
        index: levels.pack(&ks),
        snapped,
    })
}

pub fn fsq_dequantize(index: usize, levels: &FsqLevels) -> Result<Vec<f64>> {
    let size = levels.codebook_size();
    if index >= size {
        return Err(Error::InvalidCode { index, size });
    }
    Ok(levels
        .unpack(index)
        .iter()
        .zip(levels.levels())
        .map(|(&k, &l)| FsqLevels::level_value(k, l))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l() -> FsqLevels {
        FsqLevels::default()
    }

    #[test]
    fn default_codebook_has_1000_entries() {
        assert_eq!(l().codebook_size(), 1000);
    }

    #[test]
    fn lower_extreme() {
        let q = fsq_quantize(&[-1.0; 4], &l()).unwrap();
        assert_eq!(q.index, 0);
        assert_eq!(q.snapped, vec![-1.0; 4]);
    }

    #[test]
    fn upper_extreme() {
        let q = fsq_quantize(&[1.0; 4], &l()).unwrap();
        // k = (7, 4, 4, 4): 7 + 4*8 + 4*40 + 4*200
        assert_eq!(q.index, 7 + 4 * 8 + 4 * 40 + 4 * 200);
        assert_eq!(q.index, 999);
        assert_eq!(q.snapped, vec![1.0; 4]);
    }

    #[test]
    fn origin_rounds_half_away_from_zero() {
        let q = fsq_quantize(&[0.0; 4], &l()).unwrap();
        // 3.5 -> 4 on the 8-level axis, exactly 2 elsewhere
        assert_eq!(l().unpack(q.index), vec![4, 2, 2, 2]);
        assert!((q.snapped[0] - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(&q.snapped[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_inputs_clamp() {
        let q = fsq_quantize(&[-3.0, 9.0, 0.0, f64::INFINITY], &l()).unwrap();
        assert_eq!(l().unpack(q.index), vec![0, 4, 2, 4]);
    }

    #[test]
    fn dequantize_extremes_and_errors() {
        assert_eq!(fsq_dequantize(0, &l()).unwrap(), vec![-1.0; 4]);
        assert_eq!(fsq_dequantize(999, &l()).unwrap(), vec![1.0; 4]);
        assert!(matches!(
            fsq_dequantize(1000, &l()),
            Err(Error::InvalidCode { index: 1000, size: 1000 })
        ));
        assert!(matches!(
            fsq_quantize(&[0.0; 3], &l()),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn rejects_bad_levels() {
        assert!(FsqLevels::new(vec![]).is_err());
        assert!(FsqLevels::new(vec![8, 1]).is_err());
    }

    #[test]
    fn exhaustive_codebook_round_trip() {
        let levels = l();
        let mut seen = std::collections::HashSet::new();
        for i in 0..1000 {
            let v = fsq_dequantize(i, &levels).unwrap();
            assert_eq!(fsq_quantize(&v, &levels).unwrap().index, i);
            seen.insert(v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
        assert_eq!(seen.len(), 1000);
    }

    proptest! {
        #[test]
        fn snap_is_idempotent_and_close(v in proptest::collection::vec(-1.0f64..=1.0, 4)) {
            let levels = l();
            let q = fsq_quantize(&v, &levels).unwrap();
            let again = fsq_quantize(&q.snapped, &levels).unwrap();
            prop_assert_eq!(again.index, q.index);
            prop_assert_eq!(&again.snapped, &q.snapped);
            for (i, (&x, &s)) in v.iter().zip(&q.snapped).enumerate() {
                let bound = 1.0 / (levels.levels()[i] - 1) as f64;
                prop_assert!((x - s).abs() <= bound + 1e-15);
            }
        }
    }
}
