//! Observation masks (`true` = observed) and their seeded generators.

use ndarray::Array2;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boolean `M×N` mask; `true` marks an observed entry (the set Ω).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask(Array2<bool>);

impl Mask {
    pub fn full(rows: usize, cols: usize) -> Self {
        Self(Array2::from_elem((rows, cols), true))
    }

    pub fn from_array(a: Array2<bool>) -> Self {
        Self(a.as_standard_layout().into_owned())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        Self(Array2::from_shape_fn((rows, cols), |(m, n)| f(m, n)))
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.dim()
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    #[inline]
    pub fn is_observed(&self, m: usize, n: usize) -> bool {
        self.0[[m, n]]
    }

    pub fn observed_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn missing_ratio(&self) -> f64 {
        let total = self.0.len();
        if total == 0 {
            return 0.0;
        }
        (total - self.observed_count()) as f64 / total as f64
    }

    pub fn as_array(&self) -> &Array2<bool> {
        &self.0
    }
}

/// How a mask is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskSpec {
    /// Exactly `round(mr·M·N)` entries missing, sampled without replacement.
    Random { mr: f64, seed: u64 },
    /// `blocks` L1-ball rhombi with half-diagonals `d1` (rows) and `d2` (cols).
    RhombusBlocks { blocks: usize, d1: usize, d2: usize, seed: u64 },
}

impl MaskSpec {
    /// Half-diagonals used when none are given (full diagonals about 44 and 32).
    pub const DEFAULT_D1: usize = 22;
    pub const DEFAULT_D2: usize = 16;
    pub const DEFAULT_BLOCKS: usize = 2;

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig("mask dimensions must be positive".into()));
        }
        match *self {
            MaskSpec::Random { mr, .. } => {
                if !(0.0..1.0).contains(&mr) {
                    return Err(Error::InvalidConfig(format!("missing ratio must lie in [0, 1), got {mr}")));
                }
                let missing = Self::missing_count(mr, rows * cols);
                if missing >= rows * cols {
                    return Err(Error::InvalidConfig(format!(
                        "missing ratio {mr} leaves no observed entry in a {rows}x{cols} mask"
                    )));
                }
            }
            MaskSpec::RhombusBlocks { d1, d2, .. } => {
                if d1 < 1 || d2 < 1 {
                    return Err(Error::InvalidConfig("rhombus half-diagonals must be at least 1".into()));
                }
            }
        }
        Ok(())
    }

    fn missing_count(mr: f64, total: usize) -> usize {
        (mr * total as f64).round() as usize
    }
}

/// Whether `(m, n)` lies in the rhombus `|m−cm|/d1 + |n−cn|/d2 ≤ 1`.
#[inline]
pub fn in_rhombus(m: usize, n: usize, cm: usize, cn: usize, d1: usize, d2: usize) -> bool {
    // Integer form of the L1-ball test: |Δm|·d2 + |Δn|·d1 ≤ d1·d2.
    let dm = m.abs_diff(cm);
    let dn = n.abs_diff(cn);
    dm * d2 + dn * d1 <= d1 * d2
}

/// Generates a mask; a pure function of `(spec, rows, cols)`.
///
/// Rhombus centres are drawn uniformly over the image and the shape is clipped
/// at the border.
pub fn gen_mask(spec: &MaskSpec, rows: usize, cols: usize) -> Result<Mask> {
    spec.validate(rows, cols)?;
    match *spec {
        MaskSpec::Random { mr, seed } => {
            let total = rows * cols;
            let missing = MaskSpec::missing_count(mr, total);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut flat = vec![true; total];
            for e in index::sample(&mut rng, total, missing) {
                flat[e] = false;
            }
            Ok(Mask(Array2::from_shape_vec((rows, cols), flat).expect("length matches")))
        }
        MaskSpec::RhombusBlocks { blocks, d1, d2, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut mask = Array2::from_elem((rows, cols), true);
            for _ in 0..blocks {
                let cm = rng.random_range(0..rows);
                let cn = rng.random_range(0..cols);
                for m in cm.saturating_sub(d1)..(cm + d1 + 1).min(rows) {
                    for n in cn.saturating_sub(d2)..(cn + d2 + 1).min(cols) {
                        if in_rhombus(m, n, cm, cn, d1, d2) {
                            mask[[m, n]] = false;
                        }
                    }
                }
            }
            if !mask.iter().any(|&b| b) {
                return Err(Error::InvalidConfig("rhombus blocks cover the whole image".into()));
            }
            Ok(Mask(mask))
        }
    }
}
