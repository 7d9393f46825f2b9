//! Quaternion SVD through the complex adjoint `χ(A)`.
//!
//! The singular values of `χ(A)` come in equal pairs; each pair is one
//! quaternion singular value. A complex singular vector `[c1; c2]` of `χ(A)`
//! maps back to the quaternion vector `c1 + (−conj(c2))·j`, and the pairing
//! `χ(A)v = σu` carries over to `A·v_q = σ·u_q`.
//!
//! Inside a cluster of equal singular values the complex solver may return any
//! unitary mix of the structured vectors, so two complex vectors of the same
//! cluster can describe the same quaternion direction. Vectors are therefore
//! picked greedily per cluster with quaternion Gram–Schmidt, applying the same
//! right coefficients to `u` and `v` so that `A·v = σ·u` is preserved.

use faer::Mat;
use num_complex::Complex64;

use crate::matrix::QuatMatrix;
use crate::quaternion::Quaternion;

/// Relative gap (to `σ_max`) under which neighbouring singular values share a cluster.
const CLUSTER_TOL: f64 = 1e-9;
/// Singular values below `ZERO_TOL · σ_max · max(M, N)` are treated as zero.
const ZERO_TOL: f64 = 1e-14;

/// Thin QSVD `A = U·diag(σ)·Vᴴ`, `k = min(M, N)`, `σ` nonincreasing.
#[derive(Debug, Clone)]
pub struct QsvdResult {
    pub u: QuatMatrix,
    pub sigma: Vec<f64>,
    pub v: QuatMatrix,
}

impl QsvdResult {
    pub fn reconstruct(&self) -> QuatMatrix {
        let us = scale_columns(&self.u, &self.sigma);
        us.matmul_h(&self.v).expect("qsvd factor shapes")
    }
}

fn to_faer(a: &QuatMatrix) -> Mat<Complex64> {
    let chi = a.complex_adjoint();
    let (r, c) = chi.dim();
    Mat::from_fn(r, c, |i, j| chi[[i, j]])
}

/// Singular values of `χ(A)`, nonincreasing.
fn complex_singular_values(a: &QuatMatrix) -> Vec<f64> {
    let mut s = to_faer(a).singular_values().expect("complex SVD converges");
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `A·diag(s)` for the leading `s.len()` columns of `A`.
fn scale_columns(a: &QuatMatrix, s: &[f64]) -> QuatMatrix {
    let mut out = a.top_left(a.rows(), s.len());
    for (n, &w) in s.iter().enumerate() {
        for p in 0..4 {
            out.plane_mut(p).column_mut(n).mapv_inplace(|x| x * w);
        }
    }
    out
}

/// Complex vector `[c1; c2]` (length `2·len`) → quaternion vector.
fn to_quaternion_vector(col: impl Fn(usize) -> Complex64, len: usize) -> Vec<Quaternion> {
    (0..len)
        .map(|m| {
            let a = col(m);
            let b = -col(len + m).conj();
            Quaternion::new(a.re, a.im, b.re, b.im)
        })
        .collect()
}

fn inner(x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
    x.iter().zip(y).map(|(&a, &b)| a.conj() * b).sum()
}

fn norm(x: &[Quaternion]) -> f64 {
    x.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

fn sub_scaled(y: &mut [Quaternion], x: &[Quaternion], c: Quaternion) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi -= xi * c;
    }
}

fn normalize(x: &mut [Quaternion]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|q| *q = *q / n);
    }
}

/// Greedy quaternion Gram–Schmidt over `cands`, picking `count` directions.
///
/// Each round takes the candidate with the largest residual, normalizes it and
/// projects it out of the remaining candidates. `partners` (if given) receive
/// the same right coefficients.
fn greedy_pick(
    mut cands: Vec<Vec<Quaternion>>,
    mut partners: Option<&mut Vec<Vec<Quaternion>>>,
    count: usize,
) -> Vec<(Vec<Quaternion>, Option<Vec<Quaternion>>)> {
    let mut picked = Vec::with_capacity(count);
    let mut alive: Vec<usize> = (0..cands.len()).collect();
    while picked.len() < count && !alive.is_empty() {
        let (pos, _) = alive
            .iter()
            .enumerate()
            .map(|(pos, &c)| (pos, norm(&cands[c])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let c = alive.swap_remove(pos);
        let mut u = std::mem::take(&mut cands[c]);
        let mut v = partners.as_mut().map(|p| std::mem::take(&mut p[c]));
        let nu = norm(&u);
        if nu > 0.0 {
            u.iter_mut().for_each(|q| *q = *q / nu);
        }
        if let Some(v) = v.as_mut() {
            normalize(v);
        }
        for &o in &alive {
            let h = inner(&u, &cands[o]);
            sub_scaled(&mut cands[o], &u, h);
            if let (Some(p), Some(v)) = (partners.as_mut(), v.as_ref()) {
                sub_scaled(&mut p[o], v, h);
            }
        }
        picked.push((u, v));
    }
    picked
}

/// Quaternion singular values (nonincreasing), one per complex pair.
pub fn singular_values(a: &QuatMatrix) -> Vec<f64> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    complex_singular_values(a)
        .chunks(2).map(|p| p.iter().sum::<f64>() / p.len() as f64).collect()
}

/// Thin quaternion SVD.
pub fn qsvd(a: &QuatMatrix) -> QsvdResult {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return QsvdResult {
            u: QuatMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            v: QuatMatrix::zeros(cols, 0),
        };
    }

    let svd = to_faer(a).thin_svd().expect("complex SVD converges");
    let (cu, cv) = (svd.U(), svd.V());
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
    let s: Vec<f64> = order.iter().map(|&c| sv[c]).collect();

    let smax = s[0];
    let zero_level = ZERO_TOL * smax * rows.max(cols) as f64;
    let cluster_gap = CLUSTER_TOL * smax;

    let mut us = Vec::with_capacity(k);
    let mut vs = Vec::with_capacity(k);
    let mut sigma = Vec::with_capacity(k);

    let mut start = 0;
    while start < s.len() && sigma.len() < k {
        let mut end = start + 1;
        while end < s.len() && s[end - 1] - s[end] <= cluster_gap {
            end += 1;
        }
        let cluster = &order[start..end];
        let need = (cluster.len().div_ceil(2)).min(k - sigma.len());
        let cu_q: Vec<_> = cluster
            .iter()
            .map(|&c| to_quaternion_vector(|i| cu[(i, c)], rows))
            .collect();
        let mut cv_q: Vec<_> = cluster
            .iter()
            .map(|&c| to_quaternion_vector(|i| cv[(i, c)], cols))
            .collect();
        let value = s[start..end].iter().sum::<f64>() / (end - start) as f64;

        if s[start] <= zero_level {
            // Null part: the u and v sides are unrelated, orthonormalize each.
            let pu = greedy_pick(cu_q, None, need);
            let pv = greedy_pick(cv_q, None, need);
            for ((u, _), (v, _)) in pu.into_iter().zip(pv) {
                us.push(u);
                vs.push(v);
                sigma.push(0.0);
            }
        } else {
            for (u, v) in greedy_pick(cu_q, Some(&mut cv_q), need) {
                us.push(u);
                vs.push(v.expect("partner tracked"));
                sigma.push(value);
            }
        }
        start = end;
    }

    QsvdResult {
        u: QuatMatrix::from_columns(rows, &us),
        sigma,
        v: QuatMatrix::from_columns(cols, &vs),
    }
}

/// Singular value thresholding `U·diag(max(σ − τ, 0))·Vᴴ`.
pub fn svt(a: &QuatMatrix, tau: f64) -> QuatMatrix {
    assert!(tau > 0.0, "svt threshold must be positive");
    let f = qsvd(a);
    let shrunk: Vec<f64> = f
        .sigma
        .iter()
        .map(|&x| (x - tau).max(0.0))
        .take_while(|&x| x > 0.0)
        .collect();
    if shrunk.is_empty() {
        return QuatMatrix::zeros(a.rows(), a.cols());
    }
    let us = scale_columns(&f.u, &shrunk);
    let v = f.v.top_left(f.v.rows(), shrunk.len());
    us.matmul_h(&v).expect("svt factor shapes")
}

/// `‖A‖_* = Σ σ_t`.
pub fn nuclear_norm(a: &QuatMatrix) -> f64 {
    singular_values(a).iter().sum()
}
