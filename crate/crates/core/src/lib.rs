//! Quaternion matrix algebra and low-rank + sparse quaternion matrix
//! completion for color images.
//!
//! Color pixels are pure quaternions `R·i + G·j + B·k`. The completion solver
//! keeps a tri-factorization `X ≈ L·D·R` refreshed by quaternion QR steps,
//! shrinks the singular values of the small core `D`, and adds an ℓ1 prior on
//! the left-handed quaternion DCT of the image.

pub mod completion;
pub mod cqsvd;
pub mod error;
pub mod image;
pub mod linalg;
pub mod manifest;
pub mod mask;
pub mod matrix;
pub mod metrics;
pub mod qdct;
pub mod quaternion;

pub use error::{Error, Result};
pub use matrix::{CayleyDicksonPair, Op, QuatMatrix};
pub use quaternion::{hamilton_product, Quaternion};
