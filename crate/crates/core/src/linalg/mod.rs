//! Quaternion QR, SVD, singular value thresholding and the nuclear norm.

mod qr;
mod svd;

pub use qr::{orth, qqr, QqrResult};
pub use svd::{nuclear_norm, qsvd, singular_values, svt, QsvdResult};
