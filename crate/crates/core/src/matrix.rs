//! Dense quaternion matrices stored as four real component planes.
//!
//! `Q = Q0 + Q1·i + Q2·j + Q3·k` where each `Qp` is a row-major `M×N` real
//! array. Products are carried out as sixteen real-plane GEMMs, one per term
//! of the Hamilton multiplication table.

use std::ops::{Add, Mul, Neg, Sub};

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, Zip};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Hamilton table as `(lhs plane, rhs plane, output plane, sign)`.
const PRODUCT_TERMS: [(usize, usize, usize, f64); 16] = [
    (0, 0, 0, 1.0),
    (1, 1, 0, -1.0),
    (2, 2, 0, -1.0),
    (3, 3, 0, -1.0),
    (0, 1, 1, 1.0),
    (1, 0, 1, 1.0),
    (2, 3, 1, 1.0),
    (3, 2, 1, -1.0),
    (0, 2, 2, 1.0),
    (1, 3, 2, -1.0),
    (2, 0, 2, 1.0),
    (3, 1, 2, 1.0),
    (0, 3, 3, 1.0),
    (1, 2, 3, 1.0),
    (2, 1, 3, -1.0),
    (3, 0, 3, 1.0),
];

/// Whether a product operand is used as is or conjugate-transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    None,
    ConjTranspose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuatMatrix {
    planes: [Array2<f64>; 4],
}

impl QuatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            planes: std::array::from_fn(|_| Array2::zeros((rows, cols))),
        }
    }

    /// Rectangular identity `eye(rows, cols)`: ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut q = Self::zeros(rows, cols);
        for d in 0..rows.min(cols) {
            q.planes[0][[d, d]] = 1.0;
        }
        q
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    pub fn from_planes(q0: Array2<f64>, q1: Array2<f64>, q2: Array2<f64>, q3: Array2<f64>) -> Result<Self> {
        for p in [&q1, &q2, &q3] {
            if p.dim() != q0.dim() {
                return Err(Error::DimensionMismatch {
                    op: "from_planes",
                    left: q0.dim(),
                    right: p.dim(),
                });
            }
        }
        // Normalize layout so plane-wise zips never hit mixed strides.
        let std = |a: Array2<f64>| a.as_standard_layout().into_owned();
        Ok(Self {
            planes: [std(q0), std(q1), std(q2), std(q3)],
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut q = Self::zeros(rows, cols);
        for m in 0..rows {
            for n in 0..cols {
                q.set(m, n, f(m, n));
            }
        }
        q
    }

    /// Real diagonal matrix with the given diagonal entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut q = Self::zeros(diag.len(), diag.len());
        for (d, &v) in diag.iter().enumerate() {
            q.planes[0][[d, d]] = v;
        }
        q
    }

    /// `rows×cols` matrix with i.i.d. standard normal entries in all four planes.
    ///
    /// The generator is ChaCha8 seeded through `seed_from_u64(seed)`; normals are
    /// drawn with the ziggurat sampler of `rand_distr::StandardNormal`. Planes are
    /// filled in order `Q0, Q1, Q2, Q3`, each in row-major order.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = std::array::from_fn(|_| {
            Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(&mut rng))
        });
        Self { planes }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.planes[0].nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.planes[0].ncols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.planes[0].dim()
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> Quaternion {
        Quaternion::new(
            self.planes[0][[m, n]],
            self.planes[1][[m, n]],
            self.planes[2][[m, n]],
            self.planes[3][[m, n]],
        )
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, q: Quaternion) {
        self.planes[0][[m, n]] = q.q0;
        self.planes[1][[m, n]] = q.q1;
        self.planes[2][[m, n]] = q.q2;
        self.planes[3][[m, n]] = q.q3;
    }

    pub fn plane(&self, p: usize) -> &Array2<f64> {
        &self.planes[p]
    }

    pub fn plane_mut(&mut self, p: usize) -> &mut Array2<f64> {
        &mut self.planes[p]
    }

    pub fn planes(&self) -> &[Array2<f64>; 4] {
        &self.planes
    }

    pub fn into_planes(self) -> [Array2<f64>; 4] {
        self.planes
    }

    /// True iff the real plane is identically zero.
    pub fn is_pure(&self) -> bool {
        self.planes[0].iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.planes.iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    pub fn column(&self, n: usize) -> Vec<Quaternion> {
        (0..self.rows()).map(|m| self.get(m, n)).collect()
    }

    /// Builds a matrix from equally long columns.
    pub fn from_columns(rows: usize, columns: &[Vec<Quaternion>]) -> Self {
        let mut q = Self::zeros(rows, columns.len());
        for (n, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {n} has wrong length");
            for (m, &v) in col.iter().enumerate() {
                q.set(m, n, v);
            }
        }
        q
    }

    /// Copy of the leading `rows×cols` block.
    pub fn top_left(&self, rows: usize, cols: usize) -> Self {
        Self {
            planes: std::array::from_fn(|p| self.planes[p].slice(s![..rows, ..cols]).to_owned()),
        }
    }

    pub fn conj_transpose(&self) -> Self {
        Self {
            planes: std::array::from_fn(|p| {
                let mut t = self.planes[p].t().as_standard_layout().into_owned();
                if p > 0 {
                    t.mapv_inplace(|v| -v);
                }
                t
            }),
        }
    }

    pub fn fro_norm_sqr(&self) -> f64 {
        self.planes.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>()).sum()
    }

    /// `sqrt(tr(AᴴA))`, i.e. the root of the sum of all squared plane entries.
    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sqr().sqrt()
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> Quaternion {
        (0..self.rows().min(self.cols())).map(|d| self.get(d, d)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            planes: std::array::from_fn(|p| &self.planes[p] * s),
        }
    }

    /// `self += alpha · other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "add_scaled shape mismatch");
        for (a, b) in self.planes.iter_mut().zip(&other.planes) {
            a.scaled_add(alpha, b);
        }
    }

    /// Elementwise left product `q · A(m, n)`.
    pub fn left_scale(&self, q: Quaternion) -> Self {
        let mut out = Self::zeros(self.rows(), self.cols());
        let src: [&[f64]; 4] = std::array::from_fn(|p| self.planes[p].as_slice().expect("standard layout"));
        let [o0, o1, o2, o3] = &mut out.planes;
        let dst = [o0, o1, o2, o3].map(|o| o.as_slice_mut().expect("standard layout"));
        let [d0, d1, d2, d3] = dst;
        for e in 0..src[0].len() {
            let r = q * Quaternion::new(src[0][e], src[1][e], src[2][e], src[3][e]);
            d0[e] = r.q0;
            d1[e] = r.q1;
            d2[e] = r.q2;
            d3[e] = r.q3;
        }
        out
    }

    /// Applies `f` to every entry.
    pub fn map(&self, mut f: impl FnMut(Quaternion) -> Quaternion) -> Self {
        let mut out = self.clone();
        for m in 0..self.rows() {
            for n in 0..self.cols() {
                out.set(m, n, f(self.get(m, n)));
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for m in 0..self.rows() {
            for n in 0..self.cols() {
                best = best.max(self.get(m, n).norm());
            }
        }
        best
    }

    /// `op(A) · op(B)` with Hamilton products, left-to-right order preserved.
    pub fn product(a: &Self, op_a: Op, b: &Self, op_b: Op) -> Result<Self> {
        fn view(x: &QuatMatrix, p: usize, op: Op) -> ArrayView2<'_, f64> {
            match op {
                Op::None => x.planes[p].view(),
                Op::ConjTranspose => x.planes[p].t(),
            }
        }
        let (am, ak) = view(a, 0, op_a).dim();
        let (bk, bn) = view(b, 0, op_b).dim();
        if ak != bk {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: (am, ak),
                right: (bk, bn),
            });
        }
        let mut out = Self::zeros(am, bn);
        for &(pa, pb, pc, sign) in &PRODUCT_TERMS {
            let mut s = sign;
            if op_a == Op::ConjTranspose && pa > 0 {
                s = -s;
            }
            if op_b == Op::ConjTranspose && pb > 0 {
                s = -s;
            }
            general_mat_mul(s, &view(a, pa, op_a), &view(b, pb, op_b), 1.0, &mut out.planes[pc]);
        }
        Ok(out)
    }

    /// `A · B`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        Self::product(self, Op::None, rhs, Op::None)
    }

    /// `Aᴴ · B` without materializing `Aᴴ`.
    pub fn h_matmul(&self, rhs: &Self) -> Result<Self> {
        Self::product(self, Op::ConjTranspose, rhs, Op::None)
    }

    /// `A · Bᴴ` without materializing `Bᴴ`.
    pub fn matmul_h(&self, rhs: &Self) -> Result<Self> {
        Self::product(self, Op::None, rhs, Op::ConjTranspose)
    }

    /// Complex adjoint `χ = [[Qa, Qb], [-conj(Qb), conj(Qa)]]`, size `2M×2N`.
    pub fn complex_adjoint(&self) -> Array2<Complex64> {
        let (rows, cols) = self.shape();
        let mut chi = Array2::zeros((2 * rows, 2 * cols));
        for m in 0..rows {
            for n in 0..cols {
                let q = self.get(m, n);
                let a = Complex64::new(q.q0, q.q1);
                let b = Complex64::new(q.q2, q.q3);
                chi[[m, n]] = a;
                chi[[m, cols + n]] = b;
                chi[[rows + m, n]] = -b.conj();
                chi[[rows + m, cols + n]] = a.conj();
            }
        }
        chi
    }

    /// Cayley–Dickson form `Q = Qa + Qb·j`.
    pub fn split(&self) -> CayleyDicksonPair {
        let [q0, q1, q2, q3] = &self.planes;
        let pack = |re: &Array2<f64>, im: &Array2<f64>| {
            Zip::from(re).and(im).map_collect(|&r, &i| Complex64::new(r, i))
        };
        CayleyDicksonPair {
            a: pack(q0, q1),
            b: pack(q2, q3),
        }
    }
}

/// Complex pair `(Qa, Qb)` with `Qa = Q0 + Q1·i` and `Qb = Q2 + Q3·i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyDicksonPair {
    pub a: Array2<Complex64>,
    pub b: Array2<Complex64>,
}

impl CayleyDicksonPair {
    pub fn join(&self) -> Result<QuatMatrix> {
        if self.a.dim() != self.b.dim() {
            return Err(Error::DimensionMismatch {
                op: "cayley_dickson_join",
                left: self.a.dim(),
                right: self.b.dim(),
            });
        }
        QuatMatrix::from_planes(
            self.a.mapv(|z| z.re),
            self.a.mapv(|z| z.im),
            self.b.mapv(|z| z.re),
            self.b.mapv(|z| z.im),
        )
    }
}

impl Mul for &QuatMatrix {
    type Output = QuatMatrix;

    /// Panics on an inner-dimension mismatch; use [`QuatMatrix::matmul`] for a
    /// fallible product.
    fn mul(self, rhs: &QuatMatrix) -> QuatMatrix {
        self.matmul(rhs).expect("quaternion matrix product")
    }
}

impl Add for &QuatMatrix {
    type Output = QuatMatrix;
    fn add(self, rhs: &QuatMatrix) -> QuatMatrix {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &QuatMatrix {
    type Output = QuatMatrix;
    fn sub(self, rhs: &QuatMatrix) -> QuatMatrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

impl Neg for &QuatMatrix {
    type Output = QuatMatrix;
    fn neg(self) -> QuatMatrix {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::hamilton_product;

    /// Entry-by-entry triple loop over Hamilton scalars.
    fn naive_product(a: &QuatMatrix, b: &QuatMatrix) -> QuatMatrix {
        QuatMatrix::from_fn(a.rows(), b.cols(), |m, n| {
            (0..a.cols()).map(|k| hamilton_product(a.get(m, k), b.get(k, n))).sum()
        })
    }

    fn rel(a: &QuatMatrix, b: &QuatMatrix) -> f64 {
        (a - b).fro_norm() / b.fro_norm().max(1e-300)
    }

    fn cmat_rel(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        let num: f64 = (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        num / den
    }

    fn cmat_mul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
        a.dot(b)
    }

    #[test]
    fn identity_product() {
        let a = QuatMatrix::random(2, 5, 3);
        assert_eq!(&QuatMatrix::identity(2) * &a, a);
    }

    #[test]
    fn one_by_one_product() {
        let i = QuatMatrix::from_fn(1, 1, |_, _| Quaternion::I);
        let j = QuatMatrix::from_fn(1, 1, |_, _| Quaternion::J);
        assert_eq!((&i * &j).get(0, 0), Quaternion::K);
    }

    #[test]
    fn plane_gemm_matches_naive_and_is_associative() {
        let a = QuatMatrix::random(3, 3, 1);
        let b = QuatMatrix::random(3, 3, 2);
        let c = QuatMatrix::random(3, 3, 3);
        assert!(rel(&(&a * &b), &naive_product(&a, &b)) < 1e-14);
        let left = naive_product(&naive_product(&a, &b), &c);
        let right = naive_product(&a, &naive_product(&b, &c));
        assert!(rel(&left, &right) < 1e-12);
        assert!(rel(&(&(&a * &b) * &c), &(&a * &(&b * &c))) < 1e-12);
    }

    #[test]
    fn conjugated_operand_products() {
        let a = QuatMatrix::random(4, 3, 10);
        let b = QuatMatrix::random(4, 5, 11);
        let c = QuatMatrix::random(6, 3, 12);
        assert!(rel(&a.h_matmul(&b).unwrap(), &naive_product(&a.conj_transpose(), &b)) < 1e-14);
        assert!(rel(&a.matmul_h(&c).unwrap(), &naive_product(&a, &c.conj_transpose())) < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let a = QuatMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn conj_transpose_examples() {
        let a = QuatMatrix::from_fn(1, 2, |_, n| if n == 0 { Quaternion::I } else { Quaternion::J });
        let h = a.conj_transpose();
        assert_eq!(h.shape(), (2, 1));
        assert_eq!(h.get(0, 0), -Quaternion::I);
        assert_eq!(h.get(1, 0), -Quaternion::J);
        assert_eq!(h.conj_transpose(), a);

        let x = QuatMatrix::random(2, 2, 4);
        let y = QuatMatrix::random(2, 2, 5);
        let lhs = naive_product(&x, &y).conj_transpose();
        let rhs = naive_product(&y.conj_transpose(), &x.conj_transpose());
        assert!(rel(&lhs, &rhs) < 1e-14);
    }

    #[test]
    fn fro_norm_examples() {
        assert_eq!(QuatMatrix::zeros(3, 4).fro_norm(), 0.0);
        let one = QuatMatrix::from_fn(1, 1, |_, _| Quaternion::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(one.fro_norm(), 2.0);

        let a = QuatMatrix::random(5, 4, 6);
        let trace = a.h_matmul(&a).unwrap().trace();
        let by_trace = trace.q0.sqrt();
        let by_entries = a
            .planes()
            .iter()
            .flat_map(|p| p.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        assert!((by_trace - by_entries).abs() < 1e-12 * by_entries);
        assert!((a.fro_norm() - by_entries).abs() < 1e-12 * by_entries);
        assert!(trace.q1.abs() + trace.q2.abs() + trace.q3.abs() < 1e-12 * by_entries);
    }

    #[test]
    fn complex_adjoint_examples() {
        let c = |re, im| Complex64::new(re, im);
        let i = QuatMatrix::from_fn(1, 1, |_, _| Quaternion::I).complex_adjoint();
        assert_eq!(i, ndarray::array![[c(0., 1.), c(0., 0.)], [c(0., 0.), c(0., -1.)]]);
        let j = QuatMatrix::from_fn(1, 1, |_, _| Quaternion::J).complex_adjoint();
        assert_eq!(j, ndarray::array![[c(0., 0.), c(1., 0.)], [c(-1., 0.), c(0., 0.)]]);
        let one = QuatMatrix::identity(1).complex_adjoint();
        assert_eq!(one, ndarray::array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]]);
    }

    #[test]
    fn complex_adjoint_is_homomorphism() {
        for seed in 0..5 {
            let a = QuatMatrix::random(3, 3, 100 + seed);
            let b = QuatMatrix::random(3, 3, 200 + seed);
            let prod = (&a * &b).complex_adjoint();
            assert!(cmat_rel(&prod, &cmat_mul(&a.complex_adjoint(), &b.complex_adjoint())) < 1e-10);
            let h = a.conj_transpose().complex_adjoint();
            let chi_h = a.complex_adjoint().t().mapv(|z| z.conj());
            assert!(cmat_rel(&h, &chi_h) < 1e-10);
            let chi_norm = a
                .complex_adjoint()
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((a.fro_norm() - chi_norm / 2f64.sqrt()).abs() < 1e-12 * a.fro_norm());
        }
    }

    #[test]
    fn split_join_is_bit_exact() {
        let a = QuatMatrix::random(7, 3, 8);
        assert_eq!(a.split().join().unwrap(), a);
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(QuatMatrix::random(4, 6, 42), QuatMatrix::random(4, 6, 42));
        let d = &QuatMatrix::random(4, 6, 42) - &QuatMatrix::random(4, 6, 43);
        assert!(d.fro_norm() > 0.0);
    }

    #[test]
    fn random_planes_are_centered() {
        let a = QuatMatrix::random(300, 300, 7);
        for p in a.planes() {
            let mean = p.mean().unwrap();
            assert!(mean.abs() < 0.05, "plane mean {mean}");
        }
    }

    #[test]
    fn pure_predicate() {
        let mut a = QuatMatrix::from_fn(2, 2, |_, _| Quaternion::pure(1.0, 2.0, 3.0));
        assert!(a.is_pure());
        a.set(1, 1, Quaternion::new(1e-300, 0.0, 0.0, 0.0));
        assert!(!a.is_pure());
    }

    #[test]
    fn left_scale_matches_entrywise() {
        let a = QuatMatrix::random(3, 4, 9);
        let q = Quaternion::new(0.3, -1.0, 2.0, 0.5);
        let b = a.left_scale(q);
        for m in 0..3 {
            for n in 0..4 {
                assert_eq!(b.get(m, n), q * a.get(m, n));
            }
        }
    }
}
