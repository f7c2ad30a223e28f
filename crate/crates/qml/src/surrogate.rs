//! Classical surrogate classifier used as the adversarial attack source.
//!
//! A deliberately small two-layer dense network with tanh nonlinearity:
//! big enough to fit the shape and stroke datasets, small enough that
//! its input gradients — the quantity attacks are built from — stay
//! cheap and exactly differentiable. Weights live in one flat parameter
//! vector so the optimizer and serialization stay trivial.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QmlError, QmlResult};
use crate::qvc::TrainConfig;
use qprep_core::adam::Adam;
use qprep_core::encoding::Image;
use qprep_core::gradient::softmax;
use qprep_core::rng::substream;
use qprep_core::LabeledDataset;

/// Dense `input → tanh(hidden) → logits` classifier. Parameters are laid
/// out flat as `[w1 | b1 | w2 | b2]` with row-major weight matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub n_classes: usize,
    pub params: Vec<f64>,
}

struct Layers<'a> {
    w1: &'a [f64],
    b1: &'a [f64],
    w2: &'a [f64],
    b2: &'a [f64],
}

impl SurrogateModel {
    fn param_count(input_dim: usize, hidden_dim: usize, n_classes: usize) -> usize {
        hidden_dim * input_dim + hidden_dim + n_classes * hidden_dim + n_classes
    }

    /// A model with all weights and biases at zero.
    pub fn zeroed(input_dim: usize, hidden_dim: usize, n_classes: usize) -> QmlResult<Self> {
        if input_dim == 0 || hidden_dim == 0 || n_classes == 0 {
            return Err(QmlError::BadConfig(
                "surrogate dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            n_classes,
            params: vec![0.0; Self::param_count(input_dim, hidden_dim, n_classes)],
        })
    }

    /// Xavier-uniform initialization from a seeded stream.
    pub fn random_init(
        input_dim: usize,
        hidden_dim: usize,
        n_classes: usize,
        seed: u64,
    ) -> QmlResult<Self> {
        let mut model = Self::zeroed(input_dim, hidden_dim, n_classes)?;
        let mut rng = substream(seed, "surrogate-init", 0);
        let w1_end = hidden_dim * input_dim;
        let s1 = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        for p in &mut model.params[..w1_end] {
            *p = rng.gen_range(-s1..s1);
        }
        let w2_start = w1_end + hidden_dim;
        let w2_end = w2_start + n_classes * hidden_dim;
        let s2 = (6.0 / (hidden_dim + n_classes) as f64).sqrt();
        for p in &mut model.params[w2_start..w2_end] {
            *p = rng.gen_range(-s2..s2);
        }
        Ok(model)
    }

    fn layers(&self) -> Layers<'_> {
        let (h, d, k) = (self.hidden_dim, self.input_dim, self.n_classes);
        let (w1, rest) = self.params.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(k * h);
        Layers { w1, b1, w2, b2 }
    }

    fn check_input(&self, x: &[f64]) -> QmlResult<()> {
        if x.len() != self.input_dim {
            return Err(QmlError::Dimension(format!(
                "input has {} values, model takes {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    fn check_label(&self, label: usize) -> QmlResult<()> {
        if label >= self.n_classes {
            return Err(QmlError::BadLabel {
                label,
                n_classes: self.n_classes,
            });
        }
        Ok(())
    }

    /// Forward pass: tanh activations and output logits.
    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let l = self.layers();
        let hidden: Vec<f64> = (0..self.hidden_dim)
            .map(|i| {
                let row = &l.w1[i * self.input_dim..(i + 1) * self.input_dim];
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + l.b1[i];
                z.tanh()
            })
            .collect();
        let logits: Vec<f64> = (0..self.n_classes)
            .map(|j| {
                let row = &l.w2[j * self.hidden_dim..(j + 1) * self.hidden_dim];
                row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + l.b2[j]
            })
            .collect();
        (hidden, logits)
    }

    /// Softmax class probabilities for a pixel vector.
    pub fn class_probabilities(&self, x: &[f64]) -> QmlResult<Vec<f64>> {
        self.check_input(x)?;
        Ok(softmax(&self.forward(x).1))
    }

    /// Most probable class, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> QmlResult<usize> {
        let probs = self.class_probabilities(x)?;
        let mut best = 0;
        for (j, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = j;
            }
        }
        Ok(best)
    }

    /// −log p(label | x).
    pub fn loss(&self, x: &[f64], label: usize) -> QmlResult<f64> {
        self.check_label(label)?;
        Ok(-self.class_probabilities(x)?[label].ln())
    }

    /// Loss together with its gradient over the flat parameter vector.
    pub fn loss_and_param_gradient(&self, x: &[f64], label: usize) -> QmlResult<(f64, Vec<f64>)> {
        self.check_input(x)?;
        self.check_label(label)?;
        let (hidden, logits) = self.forward(x);
        let probs = softmax(&logits);
        let loss = -probs[label].ln();
        let l = self.layers();

        // dL/dz2 = p − e_y, then standard backprop through tanh.
        let dz2: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(j, &p)| p - ((j == label) as usize as f64))
            .collect();
        let dh: Vec<f64> = (0..self.hidden_dim)
            .map(|i| {
                (0..self.n_classes)
                    .map(|j| l.w2[j * self.hidden_dim + i] * dz2[j])
                    .sum()
            })
            .collect();
        let dz1: Vec<f64> = dh
            .iter()
            .zip(&hidden)
            .map(|(d, h)| d * (1.0 - h * h))
            .collect();

        let mut grad = vec![0.0; self.params.len()];
        let (h, d, k) = (self.hidden_dim, self.input_dim, self.n_classes);
        for i in 0..h {
            for m in 0..d {
                grad[i * d + m] = dz1[i] * x[m];
            }
            grad[h * d + i] = dz1[i];
        }
        let w2_start = h * d + h;
        for j in 0..k {
            for i in 0..h {
                grad[w2_start + j * h + i] = dz2[j] * hidden[i];
            }
            grad[w2_start + k * h + j] = dz2[j];
        }
        Ok((loss, grad))
    }

    /// Fraction of a dataset predicted correctly.
    pub fn accuracy(&self, dataset: &LabeledDataset) -> QmlResult<f64> {
        if dataset.is_empty() {
            return Err(QmlError::EmptyDataset);
        }
        let hits: usize = dataset
            .images
            .par_iter()
            .zip(&dataset.labels)
            .map(|(image, &label)| -> QmlResult<usize> {
                Ok((self.predict(image.pixels())? == label as usize) as usize)
            })
            .collect::<QmlResult<Vec<usize>>>()?
            .into_iter()
            .sum();
        Ok(hits as f64 / dataset.len() as f64)
    }
}

/// Gradient of −log p(label | image) with respect to the raw pixels:
/// `dx = W1ᵀ·((W2ᵀ·(p − e_y)) ⊙ (1 − h²))`, all analytic.
pub fn surrogate_gradient(
    model: &SurrogateModel,
    image: &Image,
    label: usize,
) -> QmlResult<Vec<f64>> {
    let x = image.pixels();
    model.check_input(x)?;
    model.check_label(label)?;
    let (hidden, logits) = model.forward(x);
    let probs = softmax(&logits);
    let l = model.layers();

    let dz2: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(j, &p)| p - ((j == label) as usize as f64))
        .collect();
    let dz1: Vec<f64> = (0..model.hidden_dim)
        .map(|i| {
            let dh: f64 = (0..model.n_classes)
                .map(|j| l.w2[j * model.hidden_dim + i] * dz2[j])
                .sum();
            dh * (1.0 - hidden[i] * hidden[i])
        })
        .collect();
    Ok((0..model.input_dim)
        .map(|m| {
            (0..model.hidden_dim)
                .map(|i| l.w1[i * model.input_dim + m] * dz1[i])
                .sum()
        })
        .collect())
}

/// Trains a fresh surrogate on a labeled image dataset with Adam over
/// shuffled minibatches; fixed seeds reproduce the run bit-exactly.
pub fn train_surrogate(
    dataset: &LabeledDataset,
    hidden_dim: usize,
    config: &TrainConfig,
) -> QmlResult<SurrogateModel> {
    if dataset.is_empty() {
        return Err(QmlError::EmptyDataset);
    }
    let input_dim = dataset.images[0].pixels().len();
    let mut model = SurrogateModel::random_init(
        input_dim,
        hidden_dim,
        dataset.n_classes(),
        config.seed,
    )?;
    let mut adam = Adam::new(model.params.len(), config.learning_rate);

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        order.shuffle(&mut substream(config.seed, "surrogate-shuffle", epoch as u64));
        for chunk in order.chunks(config.batch_size) {
            let per_item: Vec<Vec<f64>> = chunk
                .par_iter()
                .map(|&i| -> QmlResult<Vec<f64>> {
                    let (_, grad) = model.loss_and_param_gradient(
                        dataset.images[i].pixels(),
                        dataset.labels[i] as usize,
                    )?;
                    Ok(grad)
                })
                .collect::<QmlResult<_>>()?;
            let mut mean = vec![0.0; model.params.len()];
            for grad in &per_item {
                for (m, g) in mean.iter_mut().zip(grad) {
                    *m += g;
                }
            }
            let scale = 1.0 / chunk.len() as f64;
            for m in &mut mean {
                *m *= scale;
            }
            adam.step(&mut model.params, &mean);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qprep_core::dataset::{generate_shapes, split};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_surrogate(d: usize, h: usize, k: usize, seed: u64) -> SurrogateModel {
        SurrogateModel::random_init(d, h, k, seed).unwrap()
    }

    fn random_image(d: usize, rng: &mut impl Rng) -> Image {
        Image::new(d, 1, (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let model = SurrogateModel::zeroed(6, 4, 3).unwrap();
        let probs = model.class_probabilities(&[0.5; 6]).unwrap();
        for &p in &probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((model.loss(&[0.5; 6], 1).unwrap() - 3f64.ln()).abs() < 1e-12);
        // With uniform probabilities the logit gradient p − e_y treats
        // every wrong class identically.
        let (_, grad) = model.loss_and_param_gradient(&[0.5; 6], 1).unwrap();
        let b2 = &grad[grad.len() - 3..];
        assert!((b2[0] - b2[2]).abs() < 1e-15);
        assert!((b2[1] - (1.0 / 3.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = random_surrogate(10, 7, 3, 9);
        let image = random_image(10, &mut rng);
        let analytic = surrogate_gradient(&model, &image, 2).unwrap();
        let h = 1e-6;
        for m in 0..10 {
            let mut plus = image.clone();
            plus.pixels_mut()[m] += h;
            let mut minus = image.clone();
            minus.pixels_mut()[m] -= h;
            let fd = (model.loss(plus.pixels(), 2).unwrap()
                - model.loss(minus.pixels(), 2).unwrap())
                / (2.0 * h);
            let a = analytic[m];
            let tol = 1e-5 * a.abs().max(fd.abs()) + 1e-9;
            assert!((a - fd).abs() <= tol, "pixel {m}: {a} vs {fd}");
        }
    }

    #[test]
    fn parameter_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let model = random_surrogate(5, 4, 2, 11);
        let image = random_image(5, &mut rng);
        let (_, analytic) = model
            .loss_and_param_gradient(image.pixels(), 1)
            .unwrap();
        let h = 1e-6;
        for slot in 0..model.params.len() {
            let mut plus = model.clone();
            plus.params[slot] += h;
            let mut minus = model.clone();
            minus.params[slot] -= h;
            let fd = (plus.loss(image.pixels(), 1).unwrap()
                - minus.loss(image.pixels(), 1).unwrap())
                / (2.0 * h);
            let a = analytic[slot];
            let tol = 1e-5 * a.abs().max(fd.abs()) + 1e-9;
            assert!((a - fd).abs() <= tol, "slot {slot}: {a} vs {fd}");
        }
    }

    #[test]
    fn shapes_surrogate_reaches_high_accuracy() {
        let dataset = generate_shapes(700, 13).unwrap();
        let parts = split(&dataset, &[5.0 / 7.0, 2.0 / 7.0], 14).unwrap();
        let config = TrainConfig {
            learning_rate: 1e-3,
            epochs: 150,
            batch_size: 32,
            seed: 15,
            eval_every: 100,
        };
        let model = train_surrogate(&parts[0], 32, &config).unwrap();
        let accuracy = model.accuracy(&parts[1]).unwrap();
        assert!(accuracy >= 0.95, "test accuracy {accuracy}");
    }

    #[test]
    fn training_is_bit_reproducible() {
        let dataset = generate_shapes(60, 16).unwrap();
        let config = TrainConfig {
            epochs: 3,
            batch_size: 16,
            seed: 17,
            ..Default::default()
        };
        let a = train_surrogate(&dataset, 8, &config).unwrap();
        let b = train_surrogate(&dataset, 8, &config).unwrap();
        assert!(a
            .params
            .iter()
            .zip(&b.params)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn dimension_mismatches_error() {
        let model = SurrogateModel::zeroed(4, 3, 2).unwrap();
        assert!(matches!(
            model.predict(&[0.0; 5]),
            Err(QmlError::Dimension(_))
        ));
        assert!(matches!(
            model.loss(&[0.0; 4], 7),
            Err(QmlError::BadLabel { .. })
        ));
        let image = Image::new(5, 1, vec![0.1; 5]).unwrap();
        assert!(surrogate_gradient(&model, &image, 0).is_err());
    }
}
