#![allow(dead_code)]

use ndarray::Array2;
use quatcomp::mask::{gen_mask, MaskSpec};
use quatcomp::QuatMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Pure-quaternion matrix of rank ≤ `rank`: real Gaussian `A` (rows×rank) times
/// a pure Gaussian `C` (rank×cols), rescaled to unit entry RMS.
pub fn pure_low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> QuatMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Array2::from_shape_fn((rows, rank), |_| StandardNormal.sample(&mut rng));
    let zero = || Array2::zeros((rows, rank));
    let a = QuatMatrix::from_planes(a, zero(), zero(), zero()).unwrap();
    let mut c = QuatMatrix::random(rank, cols, seed.wrapping_add(1));
    c.plane_mut(0).fill(0.0);
    let x = &a * &c;
    let rms = x.fro_norm() / ((rows * cols) as f64).sqrt();
    x.scale(1.0 / rms)
}

/// The exact-regime recovery instance: 100×100, rank 10, 50% random missing.
pub fn recovery_instance(seed: u64) -> (QuatMatrix, quatcomp::mask::Mask) {
    let truth = pure_low_rank(100, 100, 10, seed);
    let mask = gen_mask(&MaskSpec::Random { mr: 0.5, seed: seed.wrapping_add(100) }, 100, 100).unwrap();
    (truth, mask)
}
