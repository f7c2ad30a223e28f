//! Projected-gradient-descent attacks and cross-model transfer studies.
//!
//! An attack searches the l∞ ball of radius ε for pixel perturbations
//! that make the source classifier confident in the wrong answer:
//! starting from a uniformly random point of the ball, each step ascends
//! the source's loss gradient and re-projects onto the ball, so the
//! budget holds after every iterate — not just at return. Perturbed
//! pixels are deliberately *not* clipped to [0, 1]: the perturbation set
//! is defined purely by the norm ball, and the amplitude encoder
//! renormalizes whatever it receives.
//!
//! Transfer evaluation builds perturbations once against a source model
//! and scores every target on the same perturbed images, which makes
//! "evaluating the source on its own attack" exactly the white-box
//! result.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{DifferentiableClassifier, ImageClassifier};
use crate::error::{QmlError, QmlResult};
use qprep_core::encoding::Image;
use qprep_core::rng::substream;
use qprep_core::LabeledDataset;

/// Budget and schedule of one PGD attack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    /// l∞ radius of the perturbation ball.
    pub epsilon: f64,
    /// PGD iterations.
    pub steps: usize,
    /// Step size; `None` uses `epsilon / steps`.
    pub alpha: Option<f64>,
    pub seed: u64,
}

impl AttackConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        Self {
            epsilon,
            steps: 3,
            alpha: None,
            seed,
        }
    }

    /// The per-iterate step size.
    pub fn step_size(&self) -> f64 {
        self.alpha.unwrap_or(self.epsilon / self.steps as f64)
    }

    fn validate(&self) -> QmlResult<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(QmlError::BadConfig(format!(
                "epsilon {} must be finite and nonnegative",
                self.epsilon
            )));
        }
        if self.steps == 0 {
            return Err(QmlError::BadConfig("steps must be positive".into()));
        }
        if self.epsilon > 0.0 && !(self.step_size() > 0.0) {
            return Err(QmlError::BadConfig(
                "step size must be positive when epsilon > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Adds a pixel perturbation to an image (no range clipping).
pub fn perturb(image: &Image, delta: &[f64]) -> QmlResult<Image> {
    if delta.len() != image.pixels().len() {
        return Err(QmlError::Dimension(format!(
            "perturbation has {} entries, image has {} pixels",
            delta.len(),
            image.pixels().len()
        )));
    }
    let mut out = image.clone();
    for (p, d) in out.pixels_mut().iter_mut().zip(delta) {
        *p += d;
    }
    Ok(out)
}

/// Runs an untargeted PGD attack against `source` and returns the
/// perturbation. The l∞ bound ‖δ‖∞ ≤ ε holds after every iterate; a
/// zero budget returns the zero perturbation exactly.
pub fn pgd_attack(
    source: &dyn DifferentiableClassifier,
    image: &Image,
    label: usize,
    config: &AttackConfig,
) -> QmlResult<Vec<f64>> {
    config.validate()?;
    let d = image.pixels().len();
    if config.epsilon == 0.0 {
        return Ok(vec![0.0; d]);
    }
    let eps = config.epsilon;
    let alpha = config.step_size();
    let mut rng = substream(config.seed, "pgd-init", 0);
    let mut delta: Vec<f64> = (0..d).map(|_| rng.gen_range(-eps..eps)).collect();

    for _ in 0..config.steps {
        // Ascend −log p(label | x + δ): gradient steps increase the loss.
        let grad = source.input_loss_gradient(&perturb(image, &delta)?, label)?;
        for (dl, g) in delta.iter_mut().zip(&grad) {
            *dl = (*dl + alpha * g).clamp(-eps, eps);
        }
    }
    Ok(delta)
}

/// Deterministic per-example attack seed within a transfer run, so
/// examples parallelize without sharing one stream.
pub fn example_attack_seed(base_seed: u64, eps_index: usize, example_index: usize) -> u64 {
    substream(
        base_seed,
        "transfer-example",
        (eps_index as u64) << 32 | example_index as u64,
    )
    .gen()
}

/// One accuracy measurement of a transfer study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub source: String,
    pub target: String,
    pub epsilon: f64,
    pub accuracy: f64,
    pub n_examples: usize,
}

/// Accuracy of every target model against perturbations crafted on one
/// source, across an epsilon grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub rows: Vec<TransferRow>,
}

impl TransferReport {
    /// Renders `source,target,epsilon,accuracy,n` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,target,epsilon,accuracy,n\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.source, r.target, r.epsilon, r.accuracy, r.n_examples
            ));
        }
        out
    }

    /// The accuracy recorded for a (target, epsilon) pair, if present.
    pub fn accuracy_of(&self, target: &str, epsilon: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.target == target && r.epsilon == epsilon)
            .map(|r| r.accuracy)
    }
}

fn dataset_accuracy(
    model: &dyn ImageClassifier,
    images: &[Image],
    labels: &[u8],
) -> QmlResult<f64> {
    let hits: usize = images
        .par_iter()
        .zip(labels)
        .map(|(image, &label)| -> QmlResult<usize> {
            Ok((model.predict_image(image)? == label as usize) as usize)
        })
        .collect::<QmlResult<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(hits as f64 / images.len() as f64)
}

/// Crafts perturbations against `source` for every epsilon in the grid
/// and scores every target on the same perturbed images. The ε = 0 rows
/// equal each model's clean accuracy bit-exactly (original images are
/// evaluated untouched); per-example seed substreams keep the run
/// reproducible and parallel.
pub fn transfer_evaluate(
    source: &dyn DifferentiableClassifier,
    targets: &[&dyn ImageClassifier],
    dataset: &LabeledDataset,
    epsilon_grid: &[f64],
    config: &AttackConfig,
) -> QmlResult<TransferReport> {
    if dataset.is_empty() {
        return Err(QmlError::EmptyDataset);
    }
    if targets.is_empty() {
        return Err(QmlError::BadConfig("no target models given".into()));
    }
    let mut grid: Vec<f64> = epsilon_grid.to_vec();
    if grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(QmlError::BadConfig(
            "epsilon grid entries must be finite and nonnegative".into(),
        ));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut rows = Vec::with_capacity(grid.len() * targets.len());
    for (ei, &eps) in grid.iter().enumerate() {
        let perturbed: Vec<Image> = if eps == 0.0 {
            dataset.images.clone()
        } else {
            dataset
                .images
                .par_iter()
                .zip(&dataset.labels)
                .enumerate()
                .map(|(i, (image, &label))| -> QmlResult<Image> {
                    let attack = AttackConfig {
                        epsilon: eps,
                        seed: example_attack_seed(config.seed, ei, i),
                        ..config.clone()
                    };
                    let delta = pgd_attack(source, image, label as usize, &attack)?;
                    perturb(image, &delta)
                })
                .collect::<QmlResult<_>>()?
        };
        for target in targets {
            rows.push(TransferRow {
                source: source.name().to_string(),
                target: target.name().to_string(),
                epsilon: eps,
                accuracy: dataset_accuracy(*target, &perturbed, &dataset.labels)?,
                n_examples: dataset.len(),
            });
        }
    }
    Ok(TransferReport { rows })
}
