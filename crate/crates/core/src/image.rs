//! RGB images, their pure-quaternion encoding, and binary PPM/PGM files.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::matrix::QuatMatrix;

/// RGB image with real channel planes (height × width), clamped to [0, 255].
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    channels: [Array2<f64>; 3],
}

impl ColorImage {
    pub fn new(r: Array2<f64>, g: Array2<f64>, b: Array2<f64>) -> Result<Self> {
        if r.dim() != g.dim() || r.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                op: "color image",
                left: r.dim(),
                right: if r.dim() != g.dim() { g.dim() } else { b.dim() },
            });
        }
        let clamp = |p: Array2<f64>| p.mapv(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 255.0) });
        Ok(Self {
            channels: [clamp(r), clamp(g), clamp(b)],
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut r = Array2::zeros((height, width));
        let mut g = Array2::zeros((height, width));
        let mut b = Array2::zeros((height, width));
        for y in 0..height {
            for x in 0..width {
                let [pr, pg, pb] = f(x, y);
                r[[y, x]] = pr;
                g[[y, x]] = pg;
                b[[y, x]] = pb;
            }
        }
        Self::new(r, g, b).expect("planes share a shape")
    }

    pub fn width(&self) -> usize {
        self.channels[0].ncols()
    }

    pub fn height(&self) -> usize {
        self.channels[0].nrows()
    }

    /// Channel 0 = R, 1 = G, 2 = B.
    pub fn channel(&self, c: usize) -> &Array2<f64> {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Array2<f64>; 3] {
        &self.channels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        [0, 1, 2].map(|c| self.channels[c][[y, x]])
    }

    /// Copy with every sample rounded to the nearest integer.
    pub fn quantized(&self) -> Self {
        Self {
            channels: self.channels.clone().map(|p| p.mapv(f64::round)),
        }
    }
}

/// `ṗ = 0 + R·i + G·j + B·k`, one entry per pixel (rows = height).
pub fn image_to_quat(img: &ColorImage) -> QuatMatrix {
    let [r, g, b] = img.channels.clone();
    let zero = Array2::zeros(r.dim());
    QuatMatrix::from_planes(zero, r, g, b).expect("planes share a shape")
}

/// Drops the real part, clamps to [0, 255] and rounds to 8-bit levels.
pub fn quat_to_image(q: &QuatMatrix) -> ColorImage {
    let level = |p: &Array2<f64>| p.mapv(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 255.0).round() });
    ColorImage::new(level(q.plane(1)), level(q.plane(2)), level(q.plane(3))).expect("planes share a shape")
}

/// Cursor over a netpbm header: whitespace-separated tokens, `#` comments to end of line.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::malformed(self.format, "unexpected end of header"));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|c| c.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::malformed(self.format, format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
    }

    /// Parses `magic w h maxval` plus the single whitespace byte before the raster.
    fn parse(bytes: &'a [u8], magic: &[u8], format: &'static str) -> Result<(usize, usize, &'a [u8])> {
        let mut h = Header { bytes, pos: 0, format };
        if !bytes.starts_with(magic) {
            return Err(Error::malformed(format, format!("missing {} magic", String::from_utf8_lossy(magic))));
        }
        h.pos = magic.len();
        if !bytes.get(h.pos).is_some_and(|c| c.is_ascii_whitespace() || *c == b'#') {
            return Err(Error::malformed(format, "bad magic"));
        }
        let width = h.number("width")?;
        let height = h.number("height")?;
        let maxval = h.number("maxval")?;
        if width == 0 || height == 0 {
            return Err(Error::malformed(format, "zero dimension"));
        }
        if maxval != 255 {
            return Err(Error::Unsupported {
                format,
                reason: format!("maxval {maxval} (only 255 is supported)"),
            });
        }
        if !h.bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(Error::malformed(format, "missing separator after maxval"));
        }
        Ok((width, height, &bytes[h.pos + 1..]))
    }
}

fn raster<'a>(data: &'a [u8], expected: usize, format: &'static str) -> Result<&'a [u8]> {
    if data.len() < expected {
        return Err(Error::malformed(
            format,
            format!("truncated pixel data: {} of {expected} bytes", data.len()),
        ));
    }
    Ok(&data[..expected])
}

/// Decodes a binary P6 PPM with maxval 255.
pub fn decode_ppm(bytes: &[u8]) -> Result<ColorImage> {
    let (w, h, data) = Header::parse(bytes, b"P6", "PPM")?;
    let px = raster(data, w * h * 3, "PPM")?;
    Ok(ColorImage::from_fn(w, h, |x, y| {
        let o = 3 * (y * w + x);
        [px[o] as f64, px[o + 1] as f64, px[o + 2] as f64]
    }))
}

/// Encodes as `P6\n<w> <h>\n255\n` plus RGB triples; samples are rounded.
pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            out.extend(img.pixel(x, y).map(|v| v.round() as u8));
        }
    }
    out
}

pub fn load_ppm(path: impl AsRef<Path>) -> Result<ColorImage> {
    decode_ppm(&fs::read(path)?)
}

pub fn save_ppm(img: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    fs::File::create(path)?.write_all(&encode_ppm(img))?;
    Ok(())
}

/// Decodes a binary P5 PGM mask: 255 = observed, 0 = missing.
pub fn decode_mask_pgm(bytes: &[u8]) -> Result<Mask> {
    let (w, h, data) = Header::parse(bytes, b"P5", "PGM")?;
    let px = raster(data, w * h, "PGM")?;
    if let Some(bad) = px.iter().find(|&&b| b != 0 && b != 255) {
        return Err(Error::malformed("PGM", format!("mask byte {bad} is neither 0 nor 255")));
    }
    Ok(Mask::from_fn(h, w, |m, n| px[m * w + n] == 255))
}

pub fn encode_mask_pgm(mask: &Mask) -> Vec<u8> {
    let (h, w) = mask.shape();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(mask.as_array().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn load_mask_pgm(path: impl AsRef<Path>) -> Result<Mask> {
    decode_mask_pgm(&fs::read(path)?)
}

pub fn save_mask_pgm(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    fs::File::create(path)?.write_all(&encode_mask_pgm(mask))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion;

    fn gradient(w: usize, h: usize) -> ColorImage {
        ColorImage::from_fn(w, h, |x, y| [(x * 37 % 256) as f64, (y * 11 % 256) as f64, ((x + y) % 256) as f64])
    }

    #[test]
    fn construction_clamps() {
        let img = ColorImage::from_fn(2, 1, |x, _| [300.0 * x as f64, -4.0, f64::NAN]);
        assert_eq!(img.pixel(1, 0), [255.0, 0.0, 0.0]);
        assert!(ColorImage::new(Array2::zeros((2, 2)), Array2::zeros((2, 3)), Array2::zeros((2, 2))).is_err());
    }

    #[test]
    fn quaternion_encoding() {
        let black = ColorImage::from_fn(3, 2, |_, _| [0.0; 3]);
        assert_eq!(image_to_quat(&black), QuatMatrix::zeros(2, 3));
        let red = ColorImage::from_fn(1, 1, |_, _| [255.0, 0.0, 0.0]);
        assert_eq!(image_to_quat(&red).get(0, 0), Quaternion::pure(255.0, 0.0, 0.0));

        let img = gradient(7, 5);
        assert_eq!(quat_to_image(&image_to_quat(&img)), img);
    }

    #[test]
    fn quat_to_image_clamps_and_drops_real() {
        let q = QuatMatrix::from_fn(1, 3, |_, n| match n {
            0 => Quaternion::pure(300.0, 0.0, 0.0),
            1 => Quaternion::pure(0.0, -5.0, 0.0),
            _ => Quaternion::new(0.4, 10.0, 0.0, 0.0),
        });
        let img = quat_to_image(&q);
        assert_eq!(img.pixel(0, 0), [255.0, 0.0, 0.0]);
        assert_eq!(img.pixel(1, 0), [0.0, 0.0, 0.0]);
        assert_eq!(img.pixel(2, 0), [10.0, 0.0, 0.0]);
    }

    #[test]
    fn ppm_literal_encoding() {
        let red = ColorImage::from_fn(1, 1, |_, _| [255.0, 0.0, 0.0]);
        let bytes = encode_ppm(&red);
        assert_eq!(bytes, b"P6\n1 1\n255\n\xff\x00\x00");
        assert_eq!(bytes.len(), 11 + 3);
        assert_eq!(decode_ppm(&bytes).unwrap(), red);
    }

    #[test]
    fn ppm_round_trip_and_comments() {
        let img = gradient(13, 9);
        assert_eq!(decode_ppm(&encode_ppm(&img)).unwrap(), img);

        let mut commented = b"P6 # magic\n# a comment line\n2 # w\n1\n# before maxval\n255\n".to_vec();
        commented.extend([1, 2, 3, 4, 5, 6]);
        let img = decode_ppm(&commented).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixel(1, 0), [4.0, 5.0, 6.0]);
    }

    #[test]
    fn ppm_errors() {
        assert!(matches!(decode_ppm(b"P6\n1 1\n65535\n\0\0\0\0\0\0"), Err(Error::Unsupported { .. })));
        assert!(matches!(decode_ppm(b"P6\n2 2\n255\n\0\0\0"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_ppm(b"P3\n1 1\n255\n0 0 0"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_ppm(b"P6\n1 x\n255\n\0\0\0"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_ppm(b"P6\n1"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_ppm(b"P6\n0 1\n255\n"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn pgm_masks() {
        let mut all = b"P5\n3 2\n255\n".to_vec();
        all.extend([255; 6]);
        assert_eq!(decode_mask_pgm(&all).unwrap(), Mask::full(2, 3));

        let mask = Mask::from_fn(4, 5, |m, n| (m * 5 + n) % 3 != 0);
        let bytes = encode_mask_pgm(&mask);
        assert_eq!(decode_mask_pgm(&bytes).unwrap(), mask);
        assert_eq!(encode_mask_pgm(&decode_mask_pgm(&bytes).unwrap()), bytes);

        let mut grey = b"P5\n2 1\n255\n".to_vec();
        grey.extend([255, 128]);
        assert!(matches!(decode_mask_pgm(&grey), Err(Error::Malformed { .. })));
        assert!(decode_mask_pgm(b"P5\n2 2\n255\n\xff").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = gradient(6, 4);
        let p = dir.path().join("x.ppm");
        save_ppm(&img, &p).unwrap();
        assert_eq!(load_ppm(&p).unwrap(), img);
        let mask = Mask::from_fn(4, 6, |m, n| m != n);
        let q = dir.path().join("m.pgm");
        save_mask_pgm(&mask, &q).unwrap();
        assert_eq!(load_mask_pgm(&q).unwrap(), mask);
        assert!(matches!(load_ppm(dir.path().join("missing.ppm")), Err(Error::Io(_))));
    }
}
