//! Economy quaternion QR by modified Gram–Schmidt with one reorthogonalization
//! pass (MGS2).

use crate::matrix::QuatMatrix;
use crate::quaternion::Quaternion;

/// Residual-to-norm ratio below which a column counts as linearly dependent.
const DEPENDENT_TOL: f64 = 1e-12;

/// `A = Q·R` with `QᴴQ = I_k` and `R` upper triangular with a real
/// nonnegative diagonal, `k = min(M, N)`.
#[derive(Debug, Clone)]
pub struct QqrResult {
    pub q: QuatMatrix,
    pub r: QuatMatrix,
}

/// Quaternion inner product `xᴴy = Σ conj(x_m)·y_m`.
#[inline]
fn inner(x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
    x.iter().zip(y).map(|(&a, &b)| a.conj() * b).sum()
}

#[inline]
fn norm(x: &[Quaternion]) -> f64 {
    x.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// `y -= x·c` (right scalar multiplication).
#[inline]
fn sub_scaled(y: &mut [Quaternion], x: &[Quaternion], c: Quaternion) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi -= xi * c;
    }
}

/// Two MGS sweeps of `v` against `basis`; returns the accumulated coefficients.
fn project_out(basis: &[Vec<Quaternion>], v: &mut [Quaternion]) -> Vec<Quaternion> {
    let mut coeffs = vec![Quaternion::ZERO; basis.len()];
    for _ in 0..2 {
        for (q, c) in basis.iter().zip(coeffs.iter_mut()) {
            let h = inner(q, v);
            sub_scaled(v, q, h);
            *c += h;
        }
    }
    coeffs
}

/// A unit vector orthogonal to every column of `basis` (which must have fewer
/// than `rows` columns).
fn complete_basis(basis: &[Vec<Quaternion>], rows: usize) -> Vec<Quaternion> {
    let start = basis.len();
    let mut best: Option<(f64, Vec<Quaternion>)> = None;
    for off in 0..rows {
        let mut e = vec![Quaternion::ZERO; rows];
        e[(start + off) % rows] = Quaternion::ONE;
        project_out(basis, &mut e);
        let n = norm(&e);
        if n >= 0.5 {
            return e.into_iter().map(|x| x / n).collect();
        }
        if best.as_ref().is_none_or(|(b, _)| n > *b) {
            best = Some((n, e));
        }
    }
    let (n, mut e) = best.expect("rows > 0");
    // One more pass after normalizing a short residual.
    e.iter_mut().for_each(|x| *x = *x / n);
    project_out(basis, &mut e);
    let n = norm(&e);
    e.into_iter().map(|x| x / n).collect()
}

/// Economy QR factorization of an `M×N` quaternion matrix.
///
/// No column pivoting is performed. A column whose residual after projection
/// falls below `1e-12·(‖a_j‖ + 1)` gets a zero pivot and its `Q` column is
/// completed with a unit vector orthogonal to the preceding ones.
pub fn qqr(a: &QuatMatrix) -> QqrResult {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    let mut basis: Vec<Vec<Quaternion>> = Vec::with_capacity(k);
    let mut r = QuatMatrix::zeros(k, cols);

    for j in 0..cols {
        let mut v = a.column(j);
        let original = norm(&v);
        let coeffs = project_out(&basis, &mut v);
        for (p, &c) in coeffs.iter().enumerate() {
            r.set(p, j, c);
        }
        if j >= k {
            continue;
        }
        let rho = norm(&v);
        if rho < DEPENDENT_TOL * (original + 1.0) {
            basis.push(complete_basis(&basis, rows));
            // r(j, j) stays 0
        } else {
            basis.push(v.into_iter().map(|x| x / rho).collect());
            r.set(j, j, Quaternion::real(rho));
        }
    }

    QqrResult {
        q: QuatMatrix::from_columns(rows, &basis),
        r,
    }
}

/// Orthonormal basis of the column span: the first `r` columns of the `Q`
/// factor of an `M×r` input.
pub fn orth(a: &QuatMatrix) -> QuatMatrix {
    let (rows, cols) = a.shape();
    assert!(cols <= rows, "orth expects at most as many columns as rows");
    qqr(a).q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_error(q: &QuatMatrix) -> f64 {
        let g = q.h_matmul(q).unwrap();
        (&g - &QuatMatrix::identity(q.cols())).fro_norm()
    }

    fn reconstruction_error(a: &QuatMatrix, f: &QqrResult) -> f64 {
        (&(&f.q * &f.r) - a).fro_norm() / a.fro_norm().max(1e-300)
    }

    #[test]
    fn diagonal_real_input() {
        let a = QuatMatrix::from_real_diag(&[2.0, 3.0]);
        let f = qqr(&a);
        assert_eq!(f.q, QuatMatrix::identity(2));
        assert_eq!(f.r, a);
    }

    #[test]
    fn single_imaginary_column() {
        let a = QuatMatrix::from_fn(2, 1, |m, _| Quaternion::pure(if m == 0 { 3.0 } else { 4.0 }, 0.0, 0.0));
        let f = qqr(&a);
        assert!((f.q.get(0, 0) - Quaternion::pure(0.6, 0.0, 0.0)).norm() < 1e-15);
        assert!((f.q.get(1, 0) - Quaternion::pure(0.8, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(f.r.get(0, 0), Quaternion::real(5.0));
    }

    #[test]
    fn random_tall() {
        let a = QuatMatrix::random(20, 8, 1);
        let f = qqr(&a);
        assert_eq!(f.q.shape(), (20, 8));
        assert_eq!(f.r.shape(), (8, 8));
        assert!(orthogonality_error(&f.q) < 1e-10);
        assert!(reconstruction_error(&a, &f) < 1e-10);
        for p in 0..8 {
            let d = f.r.get(p, p);
            assert!(d.q0 >= 0.0);
            assert!(d.q1.abs() + d.q2.abs() + d.q3.abs() < 1e-12);
            for q in 0..p {
                assert_eq!(f.r.get(p, q), Quaternion::ZERO);
            }
        }
    }

    #[test]
    fn random_wide() {
        let a = QuatMatrix::random(5, 9, 2);
        let f = qqr(&a);
        assert_eq!(f.q.shape(), (5, 5));
        assert_eq!(f.r.shape(), (5, 9));
        assert!(orthogonality_error(&f.q) < 1e-10);
        assert!(reconstruction_error(&a, &f) < 1e-10);
    }

    #[test]
    fn dependent_and_zero_columns() {
        let mut a = QuatMatrix::random(6, 4, 3);
        // column 2 = column 0 · (1 + j), column 3 = 0
        for m in 0..6 {
            a.set(m, 2, a.get(m, 0) * Quaternion::new(1.0, 0.0, 1.0, 0.0));
            a.set(m, 3, Quaternion::ZERO);
        }
        let f = qqr(&a);
        assert!(orthogonality_error(&f.q) < 1e-10);
        assert!(reconstruction_error(&a, &f) < 1e-10);
        assert_eq!(f.r.get(2, 2), Quaternion::ZERO);
        assert_eq!(f.r.get(3, 3), Quaternion::ZERO);

        let z = qqr(&QuatMatrix::zeros(3, 3));
        assert!(orthogonality_error(&z.q) < 1e-12);
        assert_eq!(z.r, QuatMatrix::zeros(3, 3));
    }

    #[test]
    fn orth_examples() {
        let cols = QuatMatrix::eye(6, 3);
        assert_eq!(orth(&cols), cols);
        assert_eq!(orth(&cols.scale(2.0)), cols);
        let q = orth(&QuatMatrix::random(30, 5, 4));
        assert!(orthogonality_error(&q) < 1e-10);
    }
}
