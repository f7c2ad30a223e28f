//! Amplitude encoding of grayscale images into statevectors.
//!
//! Three layouts are supported: packing horizontally adjacent pixel pairs
//! into the real and imaginary parts of one amplitude, the same with
//! vertically adjacent pairs (column-major traversal), and the
//! conventional one-real-amplitude-per-pixel layout. Pixel sequences are
//! zero-padded to the next power of two and normalized, so a 28x28 image
//! needs 9 qubits in either pair layout and 10 conventionally.

use num_complex::Complex64;
use rand::Rng;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{CoreError, CoreResult};
use crate::state::Statevector;

/// Grayscale image with row-major `f64` pixels, nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> CoreResult<Self> {
        if pixels.len() != width * height {
            return Err(CoreError::DimensionMismatch {
                left: pixels.len(),
                right: width * height,
            });
        }
        if width == 0 || height == 0 {
            return Err(CoreError::Encoding(
                "image dimensions must be nonzero".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    /// Writes the image as a binary (P5) PGM file, quantizing pixels to
    /// 8 bits with values clamped to `[0, 1]`.
    pub fn write_pgm<P: AsRef<Path>>(&self, path: P) -> CoreResult<()> {
        let mut file = std::fs::File::create(path)?;
        write!(file, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        file.write_all(&bytes)?;
        Ok(())
    }

    /// Reads a binary (P5) PGM file with a maxval of at most 255.
    pub fn read_pgm<P: AsRef<Path>>(path: P) -> CoreResult<Self> {
        let file = std::fs::File::open(path)?;
        let mut reader = BufReader::new(file);
        let magic = read_pgm_token(&mut reader)?;
        if magic != "P5" {
            return Err(CoreError::DatasetFormat(format!(
                "expected PGM magic P5, got {magic:?}"
            )));
        }
        let width: usize = parse_pgm_number(&read_pgm_token(&mut reader)?)?;
        let height: usize = parse_pgm_number(&read_pgm_token(&mut reader)?)?;
        let maxval: usize = parse_pgm_number(&read_pgm_token(&mut reader)?)?;
        if maxval == 0 || maxval > 255 {
            return Err(CoreError::DatasetFormat(format!(
                "unsupported PGM maxval {maxval}"
            )));
        }
        let mut bytes = vec![0u8; width * height];
        reader.read_exact(&mut bytes)?;
        let pixels = bytes
            .into_iter()
            .map(|b| b as f64 / maxval as f64)
            .collect();
        Image::new(width, height, pixels)
    }
}

fn read_pgm_token<R: BufRead>(reader: &mut R) -> CoreResult<String> {
    // Tokens are separated by whitespace; '#' starts a comment to EOL.
    let mut token = String::new();
    let mut in_comment = false;
    loop {
        let mut byte = [0u8; 1];
        match reader.read(&mut byte)? {
            0 => break,
            _ => {}
        }
        let ch = byte[0] as char;
        if in_comment {
            if ch == '\n' {
                in_comment = false;
            }
            continue;
        }
        if ch == '#' {
            in_comment = true;
            continue;
        }
        if ch.is_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(ch);
    }
    if token.is_empty() {
        return Err(CoreError::DatasetFormat("truncated PGM header".into()));
    }
    Ok(token)
}

fn parse_pgm_number(token: &str) -> CoreResult<usize> {
    token
        .parse()
        .map_err(|_| CoreError::DatasetFormat(format!("bad PGM header field {token:?}")))
}

/// Pixel-to-amplitude layout used by [`amplitude_encode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    /// Horizontally adjacent pixel pairs become (re, im) of one amplitude.
    HorizontalPair,
    /// Vertically adjacent pixel pairs become (re, im) of one amplitude.
    VerticalPair,
    /// One real amplitude per pixel.
    Conventional,
}

impl EncodingMode {
    /// Qubits needed to encode a `width x height` image in this layout.
    pub fn qubits_for(&self, width: usize, height: usize) -> usize {
        let npix = width * height;
        let values = match self {
            EncodingMode::Conventional => npix,
            _ => npix.div_ceil(2),
        };
        let dim = values.next_power_of_two().max(2);
        dim.trailing_zeros() as usize
    }
}

fn pixel_sequence(image: &Image, mode: EncodingMode) -> Vec<f64> {
    match mode {
        EncodingMode::VerticalPair => {
            let mut seq = Vec::with_capacity(image.pixels.len());
            for col in 0..image.width {
                for row in 0..image.height {
                    seq.push(image.get(row, col));
                }
            }
            seq
        }
        _ => image.pixels.clone(),
    }
}

/// Encodes an image as a normalized statevector in the given layout.
/// Fails on an all-zero image, which has no direction to normalize.
pub fn amplitude_encode(image: &Image, mode: EncodingMode) -> CoreResult<Statevector> {
    let seq = pixel_sequence(image, mode);
    let mut values: Vec<Complex64> = match mode {
        EncodingMode::Conventional => seq.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        _ => seq
            .chunks(2)
            .map(|pair| Complex64::new(pair[0], pair.get(1).copied().unwrap_or(0.0)))
            .collect(),
    };
    let dim = values.len().next_power_of_two().max(2);
    values.resize(dim, Complex64::new(0.0, 0.0));
    let norm_sqr: f64 = values.iter().map(|z| z.norm_sqr()).sum();
    if norm_sqr <= f64::MIN_POSITIVE {
        return Err(CoreError::Encoding(
            "cannot encode an all-zero image".into(),
        ));
    }
    let norm = norm_sqr.sqrt();
    for v in &mut values {
        *v /= norm;
    }
    Statevector::from_amplitudes(values)
}

/// Extracts the raw pixel sequence a state encodes: real/imaginary parts
/// in the layout's traversal order, without clipping or rescaling. The
/// values carry the `1/norm` factor introduced by encoding.
pub fn decode_raw(
    state: &Statevector,
    mode: EncodingMode,
    width: usize,
    height: usize,
) -> CoreResult<Vec<f64>> {
    let npix = width * height;
    let needed = match mode {
        EncodingMode::Conventional => npix,
        _ => npix.div_ceil(2),
    };
    if state.dim() < needed {
        return Err(CoreError::Encoding(format!(
            "state of dimension {} cannot hold a {width}x{height} image",
            state.dim()
        )));
    }
    let amps = state.amplitudes();
    let mut seq = Vec::with_capacity(npix);
    match mode {
        EncodingMode::Conventional => {
            seq.extend(amps[..npix].iter().map(|z| z.re));
        }
        _ => {
            for z in amps[..needed].iter() {
                seq.push(z.re);
                if seq.len() < npix {
                    seq.push(z.im);
                }
            }
        }
    }
    // Undo the traversal order for the column-major layout.
    let pixels = match mode {
        EncodingMode::VerticalPair => {
            let mut out = vec![0.0; npix];
            let mut k = 0;
            for col in 0..width {
                for row in 0..height {
                    out[row * width + col] = seq[k];
                    k += 1;
                }
            }
            out
        }
        _ => seq,
    };
    Ok(pixels)
}

/// Decodes a state back into a displayable image: negative values are
/// clipped to zero and the result is rescaled so the brightest pixel is 1.
pub fn decode_image(
    state: &Statevector,
    mode: EncodingMode,
    width: usize,
    height: usize,
) -> CoreResult<Image> {
    let mut pixels = decode_raw(state, mode, width, height)?;
    for p in &mut pixels {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let max = pixels.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        for p in &mut pixels {
            *p /= max;
        }
    }
    Image::new(width, height, pixels)
}

/// Adds independent uniform noise in `[-epsilon, epsilon]` to every pixel.
/// Values are left unclipped; downstream encoding renormalizes anyway.
pub fn add_uniform_noise<R: Rng>(image: &Image, epsilon: f64, rng: &mut R) -> CoreResult<Image> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(CoreError::InvalidProbability { value: epsilon });
    }
    let pixels = image
        .pixels
        .iter()
        .map(|&p| {
            if epsilon == 0.0 {
                p
            } else {
                p + rng.gen_range(-epsilon..epsilon)
            }
        })
        .collect();
    Image::new(image.width, image.height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_image(width: usize, height: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels = (0..width * height)
            .map(|_| rng.gen_range(0.0..1.0))
            .collect();
        Image::new(width, height, pixels).unwrap()
    }

    #[test]
    fn qubit_counts_for_standard_shapes() {
        assert_eq!(EncodingMode::HorizontalPair.qubits_for(28, 28), 9);
        assert_eq!(EncodingMode::VerticalPair.qubits_for(28, 28), 9);
        assert_eq!(EncodingMode::Conventional.qubits_for(28, 28), 10);
        assert_eq!(EncodingMode::HorizontalPair.qubits_for(8, 8), 5);
        assert_eq!(EncodingMode::Conventional.qubits_for(8, 8), 6);
    }

    #[test]
    fn encode_dimensions_match_qubit_counts() {
        let img = random_image(28, 28, 1);
        for mode in [
            EncodingMode::HorizontalPair,
            EncodingMode::VerticalPair,
            EncodingMode::Conventional,
        ] {
            let state = amplitude_encode(&img, mode).unwrap();
            assert_eq!(state.n_qubits(), mode.qubits_for(28, 28));
        }
    }

    #[test]
    fn decode_raw_inverts_encode_up_to_norm() {
        let img = random_image(8, 8, 2);
        let norm: f64 = img.pixels().iter().map(|p| p * p).sum::<f64>().sqrt();
        for mode in [
            EncodingMode::HorizontalPair,
            EncodingMode::VerticalPair,
            EncodingMode::Conventional,
        ] {
            let state = amplitude_encode(&img, mode).unwrap();
            let raw = decode_raw(&state, mode, 8, 8).unwrap();
            for (got, want) in raw.iter().zip(img.pixels()) {
                assert!(
                    (got * norm - want).abs() < 1e-12,
                    "mode {mode:?}: {} vs {}",
                    got * norm,
                    want
                );
            }
        }
    }

    #[test]
    fn decode_image_rescales_to_unit_max() {
        let img = random_image(8, 8, 3);
        let state = amplitude_encode(&img, EncodingMode::HorizontalPair).unwrap();
        let decoded = decode_image(&state, EncodingMode::HorizontalPair, 8, 8).unwrap();
        let max = decoded.pixels().iter().cloned().fold(0.0f64, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        assert!(decoded.pixels().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn vertical_layout_transposes_traversal() {
        // A 2x2 image distinguishes the traversal orders.
        let img = Image::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let h = amplitude_encode(&img, EncodingMode::HorizontalPair).unwrap();
        let v = amplitude_encode(&img, EncodingMode::VerticalPair).unwrap();
        // Horizontal pairs: (0.1, 0.2), (0.3, 0.4); vertical: (0.1, 0.3), (0.2, 0.4).
        let nh = (0.1f64 * 0.1 + 0.2 * 0.2 + 0.3 * 0.3 + 0.4 * 0.4).sqrt();
        assert!((h.amplitudes()[0] - Complex64::new(0.1, 0.2) / nh).norm() < 1e-12);
        assert!((v.amplitudes()[0] - Complex64::new(0.1, 0.3) / nh).norm() < 1e-12);
    }

    #[test]
    fn scale_invariance() {
        let img = random_image(7, 5, 4);
        let base = amplitude_encode(&img, EncodingMode::HorizontalPair).unwrap();
        for c in [2.0, 4.0, 0.5] {
            let scaled = Image::new(7, 5, img.pixels().iter().map(|&p| p * c).collect()).unwrap();
            let state = amplitude_encode(&scaled, EncodingMode::HorizontalPair).unwrap();
            // Powers of two rescale mantissas exactly.
            assert_eq!(state.amplitudes(), base.amplitudes());
        }
        let scaled = Image::new(7, 5, img.pixels().iter().map(|&p| p * 1.7).collect()).unwrap();
        let state = amplitude_encode(&scaled, EncodingMode::HorizontalPair).unwrap();
        let diff = state
            .amplitudes()
            .iter()
            .zip(base.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn odd_pixel_count_pads() {
        let img = random_image(3, 3, 5);
        // 9 pixels -> 5 complex values -> dimension 8 (3 qubits).
        let state = amplitude_encode(&img, EncodingMode::HorizontalPair).unwrap();
        assert_eq!(state.n_qubits(), 3);
        let raw = decode_raw(&state, EncodingMode::HorizontalPair, 3, 3).unwrap();
        assert_eq!(raw.len(), 9);
    }

    #[test]
    fn zero_image_rejected() {
        let img = Image::new(4, 4, vec![0.0; 16]).unwrap();
        assert!(amplitude_encode(&img, EncodingMode::Conventional).is_err());
    }

    #[test]
    fn pgm_round_trip_quantized() {
        let img = random_image(9, 4, 6);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        img.write_pgm(&path).unwrap();
        let back = Image::read_pgm(&path).unwrap();
        assert_eq!(back.width(), 9);
        assert_eq!(back.height(), 4);
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            let quantized = (b.clamp(0.0, 1.0) * 255.0).round() / 255.0;
            assert!((a - quantized).abs() < 1e-12);
        }
    }

    #[test]
    fn pgm_rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        std::fs::write(&path, b"P2\n2 2\n255\n0 0 0 0\n").unwrap();
        assert!(Image::read_pgm(&path).is_err());
    }

    #[test]
    fn uniform_noise_bounded_and_reproducible() {
        let img = random_image(6, 6, 7);
        let eps = 0.25;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let noisy = add_uniform_noise(&img, eps, &mut rng).unwrap();
        for (a, b) in noisy.pixels().iter().zip(img.pixels()) {
            assert!((a - b).abs() <= eps);
        }
        let mut rng2 = ChaCha8Rng::seed_from_u64(99);
        let noisy2 = add_uniform_noise(&img, eps, &mut rng2).unwrap();
        assert_eq!(noisy.pixels(), noisy2.pixels());

        let same = add_uniform_noise(&img, 0.0, &mut rng).unwrap();
        assert_eq!(same.pixels(), img.pixels());
        assert!(add_uniform_noise(&img, -1.0, &mut rng).is_err());
    }
}
