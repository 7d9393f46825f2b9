//! Orthonormal 2D DCT-II and the left-handed quaternion DCT.
//!
//! The forward transform splits `X = Xa + Xb·j`, applies the real 2D DCT to
//! both complex parts, joins them back and multiplies every entry on the left
//! by the unit pure quaternion `q̇`. Since `q̇² = −1`, the inverse multiplies by
//! `−q̇` first and then undoes the DCT.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CayleyDicksonPair, QuatMatrix};
use crate::quaternion::Quaternion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdctConfig {
    /// Quaternionization factor `q̇`: pure and unit, so `q̇² = −1`.
    pub qfactor: Quaternion,
}

impl Default for QdctConfig {
    /// `q̇ = (i + j + k)/√3`, the gray axis of RGB space.
    fn default() -> Self {
        let c = 1.0 / 3f64.sqrt();
        Self {
            qfactor: Quaternion::pure(c, c, c),
        }
    }
}

impl QdctConfig {
    /// Normalizes a pure axis into a valid factor.
    pub fn from_axis(x: f64, y: f64, z: f64) -> Result<Self> {
        let q = Quaternion::pure(x, y, z);
        let n = q.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidConfig("qfactor axis must be nonzero".into()));
        }
        Ok(Self { qfactor: q / n })
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.qfactor;
        if q.q0 != 0.0 {
            return Err(Error::InvalidConfig(format!("qfactor must be pure, got {q}")));
        }
        if (q.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("qfactor must be unit, |q| = {}", q.norm())));
        }
        Ok(())
    }
}

type BasisCache = RwLock<HashMap<usize, Arc<Array2<f64>>>>;

/// Orthonormal DCT-II basis `B[u, m] = α(u)·cos(π(2m+1)u / 2n)`, cached per size.
fn basis(n: usize) -> Arc<Array2<f64>> {
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.read().expect("dct cache poisoned").get(&n) {
        return Arc::clone(b);
    }
    let nf = n as f64;
    let b = Arc::new(Array2::from_shape_fn((n, n), |(u, m)| {
        let alpha = if u == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        alpha * (std::f64::consts::PI * (2 * m + 1) as f64 * u as f64 / (2.0 * nf)).cos()
    }));
    Arc::clone(cache.write().expect("dct cache poisoned").entry(n).or_insert(b))
}

/// `Bm · P · Bnᵀ`.
pub fn dct2(p: &Array2<f64>) -> Array2<f64> {
    let (m, n) = p.dim();
    let (bm, bn) = (basis(m), basis(n));
    let mut tmp = Array2::zeros((m, n));
    general_mat_mul(1.0, &*bm, p, 0.0, &mut tmp);
    let mut out = Array2::zeros((m, n));
    general_mat_mul(1.0, &tmp, &bn.t(), 0.0, &mut out);
    out
}

/// `Bmᵀ · C · Bn`, the exact inverse of [`dct2`].
pub fn idct2(c: &Array2<f64>) -> Array2<f64> {
    let (m, n) = c.dim();
    let (bm, bn) = (basis(m), basis(n));
    let mut tmp = Array2::zeros((m, n));
    general_mat_mul(1.0, &bm.t(), c, 0.0, &mut tmp);
    let mut out = Array2::zeros((m, n));
    general_mat_mul(1.0, &tmp, &*bn, 0.0, &mut out);
    out
}

fn complex_apply(p: &Array2<Complex64>, f: fn(&Array2<f64>) -> Array2<f64>) -> Array2<Complex64> {
    let re = f(&p.mapv(|z| z.re));
    let im = f(&p.mapv(|z| z.im));
    Zip::from(&re).and(&im).map_collect(|&r, &i| Complex64::new(r, i))
}

/// [`dct2`] applied to the real and imaginary parts independently.
pub fn dct2_complex(p: &Array2<Complex64>) -> Array2<Complex64> {
    complex_apply(p, dct2)
}

pub fn idct2_complex(c: &Array2<Complex64>) -> Array2<Complex64> {
    complex_apply(c, idct2)
}

/// Left-handed forward quaternion DCT.
pub fn fqdct_l(x: &QuatMatrix, cfg: &QdctConfig) -> QuatMatrix {
    let parts = x.split();
    let spectrum = CayleyDicksonPair {
        a: dct2_complex(&parts.a),
        b: dct2_complex(&parts.b),
    }
    .join()
    .expect("parts share a shape");
    spectrum.left_scale(cfg.qfactor)
}

/// Left-handed inverse quaternion DCT, the exact inverse of [`fqdct_l`].
pub fn iqdct_l(c: &QuatMatrix, cfg: &QdctConfig) -> QuatMatrix {
    let parts = c.left_scale(-cfg.qfactor).split();
    CayleyDicksonPair {
        a: idct2_complex(&parts.a),
        b: idct2_complex(&parts.b),
    }
    .join()
    .expect("parts share a shape")
}
