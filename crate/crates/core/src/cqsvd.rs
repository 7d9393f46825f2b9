//! Approximate top-`r` QSVD as an iterated tri-factorization `X ≈ L·D·R`
//! built only from quaternion QR steps (CQSVD-QQR).
//!
//! Each sweep sets `L` to the orthonormal basis of `X·Rᴴ`, then factors
//! `Xᴴ·L = G·T` and takes `R = Gᴴ`, `D = Tᴴ`. With `L` and `R` orthonormal,
//! `Tᴴ = Lᴴ·X·Gᴴᴴ` is exactly the optimal core, so no extra product is needed
//! for `D`. The sweep is a block power iteration on both sides; `D` tends to a
//! diagonal matrix holding the `r` largest singular values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{qqr, singular_values};
use crate::matrix::QuatMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqsvdConfig {
    /// Target rank `r`.
    pub rank: usize,
    /// Stop once `‖L·D·R − X‖_F² ≤ eps`.
    pub eps: f64,
    /// Maximum number of sweeps.
    pub it_max: usize,
}

impl CqsvdConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            eps: 1e-10,
            it_max: 100,
        }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rank < 1 || self.rank > rows.min(cols) {
            return Err(Error::InvalidRank {
                rank: self.rank,
                rows,
                cols,
            });
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if self.it_max < 1 {
            return Err(Error::InvalidConfig("it_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of [`cqsvd_qqr`]: `L` (M×r), `D` (r×r), `R` (r×N).
#[derive(Debug, Clone)]
pub struct TriFactor {
    pub l: QuatMatrix,
    pub d: QuatMatrix,
    pub r: QuatMatrix,
    pub iterations: usize,
    /// `‖L·D·R − X‖_F²` after the last sweep.
    pub residual: f64,
}

impl TriFactor {
    pub fn product(&self) -> QuatMatrix {
        &(&self.l * &self.d) * &self.r
    }
}

/// Snapshot handed to the observer after every sweep.
#[derive(Debug)]
pub struct CqsvdStep<'a> {
    pub iteration: usize,
    pub residual: f64,
    pub l: &'a QuatMatrix,
    pub d: &'a QuatMatrix,
    pub r: &'a QuatMatrix,
}

/// One QR sweep on `b` starting from the row-orthonormal `r_prev`.
///
/// Returns `(L, R, T̂ᴴ)` where `L = Q(QQR(b·r_prevᴴ))`, `bᴴ·L = G·T̂`,
/// `R = Gᴴ`. `T̂ᴴ` equals `Lᴴ·b·Rᴴ`.
pub(crate) fn qqr_sweep(b: &QuatMatrix, r_prev: &QuatMatrix) -> (QuatMatrix, QuatMatrix, QuatMatrix) {
    let rank = r_prev.rows();
    let l = qqr(&b.matmul_h(r_prev).expect("sweep shapes")).q;
    let g = qqr(&b.h_matmul(&l).expect("sweep shapes"));
    debug_assert_eq!(l.cols(), rank);
    (l, g.q.conj_transpose(), g.r.conj_transpose())
}

pub fn cqsvd_qqr(x: &QuatMatrix, cfg: &CqsvdConfig) -> Result<TriFactor> {
    cqsvd_qqr_with(x, cfg, |_| {})
}

/// [`cqsvd_qqr`] with a per-sweep observer.
pub fn cqsvd_qqr_with(
    x: &QuatMatrix,
    cfg: &CqsvdConfig,
    mut observe: impl FnMut(&CqsvdStep<'_>),
) -> Result<TriFactor> {
    let (rows, cols) = x.shape();
    cfg.validate(rows, cols)?;
    let rank = cfg.rank;

    let mut l = QuatMatrix::eye(rows, rank);
    let mut d = QuatMatrix::identity(rank);
    let mut r = QuatMatrix::eye(rank, cols);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < cfg.it_max {
        let (l_next, r_next, d_next) = qqr_sweep(x, &r);
        l = l_next;
        r = r_next;
        d = d_next;
        iterations += 1;

        debug_assert!(
            {
                let explicit = &l.h_matmul(x).unwrap() * &r.conj_transpose();
                (&explicit - &d).fro_norm() <= 1e-8 * x.fro_norm().max(1.0)
            },
            "QR by-product disagrees with Lᴴ·X·Rᴴ"
        );

        residual = (&(&(&l * &d) * &r) - x).fro_norm_sqr();
        observe(&CqsvdStep {
            iteration: iterations,
            residual,
            l: &l,
            d: &d,
            r: &r,
        });
        if residual <= cfg.eps {
            break;
        }
    }

    Ok(TriFactor {
        l,
        d,
        r,
        iterations,
        residual,
    })
}

/// Seeded rank-`rank` test matrix `A·B` with `A` (rows×rank) and `B`
/// (rank×cols) standard-normal quaternion factors.
pub fn synthetic_low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> QuatMatrix {
    &QuatMatrix::random(rows, rank, seed) * &QuatMatrix::random(rank, cols, seed.wrapping_add(1))
}

/// RMSE of the best rank-`r` approximation: `sqrt(Σ_{s>r} σ_s² / (M·N))`.
pub fn truncated_rmse(x: &QuatMatrix, r: usize) -> f64 {
    let (m, n) = x.shape();
    let tail: f64 = singular_values(x).iter().skip(r).map(|s| s * s).sum();
    (tail / (m * n) as f64).sqrt()
}

/// `sqrt(‖X − Y‖_F² / (M·N))`.
pub fn rmse(x: &QuatMatrix, y: &QuatMatrix) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            op: "rmse",
            left: x.shape(),
            right: y.shape(),
        });
    }
    let (m, n) = x.shape();
    Ok(((x - y).fro_norm_sqr() / (m * n) as f64).sqrt())
}

/// `Σ_s |D(s,s)| / Σ_{u,v} |D(u,v)|`; 1 for the zero matrix.
pub fn diagonal_dominance(d: &QuatMatrix) -> Result<f64> {
    let (m, n) = d.shape();
    if m != n {
        return Err(Error::DimensionMismatch {
            op: "diagonal_dominance",
            left: (m, n),
            right: (n, m),
        });
    }
    let mut diag = 0.0;
    let mut total = 0.0;
    for u in 0..m {
        for v in 0..n {
            let a = d.get(u, v).norm();
            total += a;
            if u == v {
                diag += a;
            }
        }
    }
    Ok(if total == 0.0 { 1.0 } else { diag / total })
}
