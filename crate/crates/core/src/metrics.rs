//! PSNR and SSIM for 8-bit color images.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::image::ColorImage;

const PEAK: f64 = 255.0;
const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn same_shape(op: &'static str, a: &ColorImage, b: &ColorImage) -> Result<()> {
    let (sa, sb) = ((a.height(), a.width()), (b.height(), b.width()));
    if sa != sb {
        return Err(Error::DimensionMismatch { op, left: sa, right: sb });
    }
    Ok(())
}

/// `10·log10(255² / MSE)` over all 3·W·H samples; `+∞` for identical images.
pub fn psnr(reference: &ColorImage, out: &ColorImage) -> Result<f64> {
    same_shape("psnr", reference, out)?;
    let mut sum = 0.0;
    for c in 0..3 {
        sum += reference
            .channel(c)
            .iter()
            .zip(out.channel(c))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    let mse = sum / (3 * reference.width() * reference.height()) as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    })
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
fn gaussian_taps() -> [f64; WINDOW] {
    let half = (WINDOW / 2) as f64;
    let mut taps = [0.0; WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - half;
        *t = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = taps.iter().sum();
    taps.map(|t| t / s)
}

/// Separable "valid" Gaussian filtering.
fn filter(p: &Array2<f64>, taps: &[f64; WINDOW]) -> Array2<f64> {
    let (h, w) = p.dim();
    let (oh, ow) = (h + 1 - WINDOW, w + 1 - WINDOW);
    let rows: Array2<f64> = Array2::from_shape_fn((h, ow), |(y, x)| (0..WINDOW).map(|k| taps[k] * p[[y, x + k]]).sum::<f64>());
    Array2::from_shape_fn((oh, ow), |(y, x)| (0..WINDOW).map(|k| taps[k] * rows[[y + k, x]]).sum::<f64>())
}

fn ssim_plane(a: &Array2<f64>, b: &Array2<f64>, taps: &[f64; WINDOW]) -> f64 {
    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let mu_a = filter(a, taps);
    let mu_b = filter(b, taps);
    let aa = filter(&(a * a), taps);
    let bb = filter(&(b * b), taps);
    let ab = filter(&(a * b), taps);

    let mut total = 0.0;
    for ((((&ma, &mb), &saa), &sbb), &sab) in mu_a.iter().zip(&mu_b).zip(&aa).zip(&bb).zip(&ab) {
        let var_a = saa - ma * ma;
        let var_b = sbb - mb * mb;
        let cov = sab - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        total += num / den;
    }
    total / mu_a.len() as f64
}

/// Single-scale SSIM (11×11 Gaussian window, σ = 1.5, K₁ = 0.01, K₂ = 0.03,
/// L = 255), the mean SSIM map per channel averaged over R, G, B.
pub fn ssim(reference: &ColorImage, out: &ColorImage) -> Result<f64> {
    same_shape("ssim", reference, out)?;
    let (w, h) = (reference.width(), reference.height());
    if w < WINDOW || h < WINDOW {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min: WINDOW,
        });
    }
    let taps = gaussian_taps();
    let sum: f64 = (0..3)
        .map(|c| ssim_plane(reference.channel(c), out.channel(c), &taps))
        .sum();
    Ok(sum / 3.0)
}
