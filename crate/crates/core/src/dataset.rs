//! Labeled image datasets: IDX file I/O, synthetic generators, splitting.
//!
//! The IDX reader/writer handles the classic big-endian u8 tensor format
//! used for handwritten-digit archives. Two synthetic generators are
//! provided: a crisp 8x8 two-class shapes set (hollow square vs. fat
//! plus, both 12 pixels, at random offsets) for fast end-to-end runs, and
//! a smooth stroke generator producing larger images whose two classes
//! differ in stroke direction.

use rand::Rng;
use std::path::Path;

use crate::encoding::Image;
use crate::error::{CoreError, CoreResult};
use crate::rng::substream;

/// Images with integer class labels and human-readable class names.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub images: Vec<Image>,
    pub labels: Vec<u8>,
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(images: Vec<Image>, labels: Vec<u8>, class_names: Vec<String>) -> CoreResult<Self> {
        if images.len() != labels.len() {
            return Err(CoreError::DimensionMismatch {
                left: images.len(),
                right: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= class_names.len()) {
            return Err(CoreError::DatasetFormat(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self {
            images,
            labels,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// New dataset holding the rows at `indices`, in order.
    pub fn subset(&self, indices: &[usize]) -> CoreResult<Self> {
        let mut images = Vec::with_capacity(indices.len());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(CoreError::DatasetFormat(format!(
                    "index {i} out of range for dataset of {}",
                    self.len()
                )));
            }
            images.push(self.images[i].clone());
            labels.push(self.labels[i]);
        }
        LabeledDataset::new(images, labels, self.class_names.clone())
    }
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32_be(bytes: &[u8], offset: usize) -> CoreResult<u32> {
    let slice = bytes
        .get(offset..offset + 4)
        .ok_or_else(|| CoreError::DatasetFormat("truncated IDX header".into()))?;
    Ok(u32::from_be_bytes([slice[0], slice[1], slice[2], slice[3]]))
}

/// Loads an image/label pair of IDX files (u8 payloads, big-endian
/// headers). Pixels are scaled to `[0, 1]` by dividing by 255. Class
/// names default to the stringified label values present.
pub fn load_idx<P: AsRef<Path>, Q: AsRef<Path>>(
    images_path: P,
    labels_path: Q,
) -> CoreResult<LabeledDataset> {
    let image_bytes = std::fs::read(images_path)?;
    let label_bytes = std::fs::read(labels_path)?;

    if read_u32_be(&image_bytes, 0)? != IDX_IMAGES_MAGIC {
        return Err(CoreError::DatasetFormat(
            "bad IDX image magic (expected 0x00000803)".into(),
        ));
    }
    let count = read_u32_be(&image_bytes, 4)? as usize;
    let height = read_u32_be(&image_bytes, 8)? as usize;
    let width = read_u32_be(&image_bytes, 12)? as usize;
    let expected = 16 + count * height * width;
    if image_bytes.len() != expected {
        return Err(CoreError::DatasetFormat(format!(
            "IDX image payload is {} bytes, expected {expected}",
            image_bytes.len()
        )));
    }

    if read_u32_be(&label_bytes, 0)? != IDX_LABELS_MAGIC {
        return Err(CoreError::DatasetFormat(
            "bad IDX label magic (expected 0x00000801)".into(),
        ));
    }
    let label_count = read_u32_be(&label_bytes, 4)? as usize;
    if label_count != count {
        return Err(CoreError::DatasetFormat(format!(
            "IDX pair mismatch: {count} images vs {label_count} labels"
        )));
    }
    if label_bytes.len() != 8 + count {
        return Err(CoreError::DatasetFormat(format!(
            "IDX label payload is {} bytes, expected {}",
            label_bytes.len(),
            8 + count
        )));
    }

    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let start = 16 + i * width * height;
        let pixels = image_bytes[start..start + width * height]
            .iter()
            .map(|&b| b as f64 / 255.0)
            .collect();
        images.push(Image::new(width, height, pixels)?);
    }
    let labels: Vec<u8> = label_bytes[8..].to_vec();
    let max_label = labels.iter().copied().max().unwrap_or(0);
    let class_names = (0..=max_label).map(|l| l.to_string()).collect();
    LabeledDataset::new(images, labels, class_names)
}

/// Writes a dataset as an IDX image/label file pair, quantizing pixels to
/// 8 bits. Reading the files back reproduces the quantized values exactly.
pub fn write_idx<P: AsRef<Path>, Q: AsRef<Path>>(
    dataset: &LabeledDataset,
    images_path: P,
    labels_path: Q,
) -> CoreResult<()> {
    if dataset.is_empty() {
        return Err(CoreError::DatasetFormat(
            "refusing to write an empty IDX dataset".into(),
        ));
    }
    let width = dataset.images[0].width();
    let height = dataset.images[0].height();
    if dataset
        .images
        .iter()
        .any(|im| im.width() != width || im.height() != height)
    {
        return Err(CoreError::DatasetFormat(
            "IDX requires uniform image dimensions".into(),
        ));
    }

    let mut image_bytes = Vec::with_capacity(16 + dataset.len() * width * height);
    image_bytes.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    image_bytes.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    image_bytes.extend_from_slice(&(height as u32).to_be_bytes());
    image_bytes.extend_from_slice(&(width as u32).to_be_bytes());
    for image in &dataset.images {
        image_bytes.extend(
            image
                .pixels()
                .iter()
                .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8),
        );
    }
    std::fs::write(images_path, image_bytes)?;

    let mut label_bytes = Vec::with_capacity(8 + dataset.len());
    label_bytes.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    label_bytes.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    label_bytes.extend_from_slice(&dataset.labels);
    std::fs::write(labels_path, label_bytes)?;
    Ok(())
}

/// Stamps a 4x4 hollow square outline (12 pixels) at `(row, col)`.
fn stamp_square(image: &mut Image, row: usize, col: usize) {
    for dr in 0..4 {
        for dc in 0..4 {
            if dr == 0 || dr == 3 || dc == 0 || dc == 3 {
                image.set(row + dr, col + dc, 1.0);
            }
        }
    }
}

/// Stamps a 4x4 fat plus (12 pixels) at `(row, col)`.
fn stamp_cross(image: &mut Image, row: usize, col: usize) {
    for dc in 0..4 {
        image.set(row + 1, col + dc, 1.0);
        image.set(row + 2, col + dc, 1.0);
    }
    for dc in 1..3 {
        image.set(row, col + dc, 1.0);
        image.set(row + 3, col + dc, 1.0);
    }
}

/// Softens hard stamp edges with one antialiasing pass (every dark pixel
/// lights up at 45% of its brightest neighbor), then rescales so every
/// image carries the same total intensity. Low resolution sensor images
/// never have knife-edge silhouettes, and the dense pixel support keeps
/// the encoded statevectors generic instead of degenerately sparse.
fn soften(image: &mut Image) {
    let (w, h) = (image.width(), image.height());
    let snapshot = image.pixels().to_vec();
    for r in 0..h {
        for c in 0..w {
            if snapshot[r * w + c] > 0.0 {
                continue;
            }
            let mut brightest = 0.0f64;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let rr = r as i64 + dr;
                    let cc = c as i64 + dc;
                    if rr >= 0 && rr < h as i64 && cc >= 0 && cc < w as i64 {
                        brightest = brightest.max(snapshot[rr as usize * w + cc as usize]);
                    }
                }
            }
            image.set(r, c, 0.45 * brightest);
        }
    }
    let total: f64 = image.pixels().iter().sum();
    for p in image.pixels_mut() {
        *p *= 12.0 / total;
    }
}

/// Generates `n` 8x8 images alternating between a hollow square and a fat
/// plus, each stamped from a 12-pixel core at a random offset in `0..=4`
/// on both axes and given soft antialiased edges. Every image is rescaled
/// to the same total intensity, so brightness alone carries no class
/// signal.
pub fn generate_shapes(n: usize, seed: u64) -> CoreResult<LabeledDataset> {
    let mut rng = substream(seed, "shapes", 0);
    let mut images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut image = Image::new(8, 8, vec![0.0; 64])?;
        let row = rng.gen_range(0..=4usize);
        let col = rng.gen_range(0..=4usize);
        let label = (i % 2) as u8;
        if label == 0 {
            stamp_square(&mut image, row, col);
        } else {
            stamp_cross(&mut image, row, col);
        }
        soften(&mut image);
        images.push(image);
        labels.push(label);
    }
    LabeledDataset::new(
        images,
        labels,
        vec!["square".to_string(), "cross".to_string()],
    )
}

/// Generates `n` smooth stroke images of the given size. Class 0 strokes
/// drift horizontally, class 1 vertically; a box blur softens the path so
/// the resulting statevectors are dense and entangled.
pub fn generate_strokes(
    n: usize,
    width: usize,
    height: usize,
    seed: u64,
) -> CoreResult<LabeledDataset> {
    if width < 4 || height < 4 {
        return Err(CoreError::DatasetFormat(
            "stroke images need at least 4x4 pixels".into(),
        ));
    }
    let mut images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = substream(seed, "strokes", i as u64);
        let label = (i % 2) as u8;
        let mut canvas = vec![0.0f64; width * height];
        let mut row = rng.gen_range(1..height - 1) as f64;
        let mut col = rng.gen_range(1..width - 1) as f64;
        // Class-dependent drift axis with jitter on the other axis.
        let steps = 2 * (width + height);
        let drift = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        for _ in 0..steps {
            let (dr, dc) = if label == 0 {
                (rng.gen_range(-0.6..0.6), drift * rng.gen_range(0.3..1.0))
            } else {
                (drift * rng.gen_range(0.3..1.0), rng.gen_range(-0.6..0.6))
            };
            row = (row + dr).clamp(0.0, (height - 1) as f64);
            col = (col + dc).clamp(0.0, (width - 1) as f64);
            let r = row.round() as usize;
            let c = col.round() as usize;
            canvas[r * width + c] = (canvas[r * width + c] + 0.5f64).min(1.0);
        }
        // One pass of 3x3 box blur.
        let mut blurred = vec![0.0f64; width * height];
        for r in 0..height {
            for c in 0..width {
                let mut acc = 0.0;
                let mut count = 0.0;
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let rr = r as i64 + dr;
                        let cc = c as i64 + dc;
                        if rr >= 0 && rr < height as i64 && cc >= 0 && cc < width as i64 {
                            acc += canvas[rr as usize * width + cc as usize];
                            count += 1.0;
                        }
                    }
                }
                blurred[r * width + c] = acc / count;
            }
        }
        let max = blurred.iter().cloned().fold(0.0f64, f64::max);
        if max > 0.0 {
            for p in &mut blurred {
                *p /= max;
            }
        }
        images.push(Image::new(width, height, blurred)?);
        labels.push(label);
    }
    LabeledDataset::new(
        images,
        labels,
        vec!["horizontal".to_string(), "vertical".to_string()],
    )
}

/// Splits a dataset by shuffling with a seeded generator and carving off
/// `round(fraction * n)` rows per requested fraction, in order. Fractions
/// must be nonnegative and sum to at most 1.
pub fn split(
    dataset: &LabeledDataset,
    fractions: &[f64],
    seed: u64,
) -> CoreResult<Vec<LabeledDataset>> {
    if fractions.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
        return Err(CoreError::InvalidProbability {
            value: *fractions
                .iter()
                .find(|&&f| !(0.0..=1.0).contains(&f))
                .expect("checked"),
        });
    }
    let total: f64 = fractions.iter().sum();
    if total > 1.0 + 1e-9 {
        return Err(CoreError::InvalidProbability { value: total });
    }
    let n = dataset.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = substream(seed, "split", 0);
    // Fisher-Yates shuffle.
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    let mut out = Vec::with_capacity(fractions.len());
    let mut cursor = 0usize;
    for &f in fractions {
        let take = ((f * n as f64).round() as usize).min(n - cursor);
        out.push(dataset.subset(&indices[cursor..cursor + take])?);
        cursor += take;
    }
    Ok(out)
}
