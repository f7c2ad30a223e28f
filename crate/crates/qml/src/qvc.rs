//! Variational quantum classifier on amplitude-encoded inputs.
//!
//! The classifier runs a layered ansatz over an encoded input state and
//! reads out ⟨Z_j⟩ on the first `n_classes` qubits. Class probabilities
//! are the softmax of those expectations; prediction takes the argmax
//! (ties break toward the lowest index so results are deterministic).
//! Training minimizes mean cross-entropy with Adam over adjoint
//! gradients: batch items evaluate in parallel, the optimizer step is a
//! sequential barrier.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QmlError, QmlResult};
use qprep_core::adam::Adam;
use qprep_core::encoding::{amplitude_encode, EncodingMode, Image};
use qprep_core::gradient::{adjoint_gradient, circuit_gradient, softmax, CrossEntropyLoss};
use qprep_core::rng::substream;
use qprep_core::{layered_ansatz, Circuit, LabeledDataset, Statevector};

/// Layered-ansatz classifier: `params` holds 3·n_qubits·n_layers angles
/// and the readout observables are Z on qubits `0..n_classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QvcModel {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_classes: usize,
    pub params: Vec<f64>,
}

/// One labeled, already-encoded example.
pub type EncodedSample = (Statevector, u8);

impl QvcModel {
    /// A model with all angles at zero.
    pub fn new(n_qubits: usize, n_layers: usize, n_classes: usize) -> QmlResult<Self> {
        let model = Self {
            n_qubits,
            n_layers,
            n_classes,
            params: vec![0.0; 3 * n_qubits * n_layers],
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> QmlResult<()> {
        if self.n_classes == 0 || self.n_classes > self.n_qubits {
            return Err(QmlError::BadConfig(format!(
                "n_classes {} must lie in 1..={}",
                self.n_classes, self.n_qubits
            )));
        }
        let expected = 3 * self.n_qubits * self.n_layers;
        if self.params.len() != expected {
            return Err(QmlError::Dimension(format!(
                "{} parameters given, ansatz takes {expected}",
                self.params.len()
            )));
        }
        Ok(())
    }

    /// The unbound ansatz this model parameterizes.
    pub fn circuit(&self) -> Circuit {
        layered_ansatz(self.n_qubits, self.n_layers)
    }

    fn check_state(&self, state: &Statevector) -> QmlResult<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(QmlError::Dimension(format!(
                "state has {} qubits, model takes {}",
                state.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// ⟨Z_j⟩ for each class qubit after running the ansatz on `state`.
    pub fn expectations(&self, state: &Statevector) -> QmlResult<Vec<f64>> {
        self.check_state(state)?;
        let out = self.circuit().bind_parameters(&self.params)?.apply(state)?;
        Ok((0..self.n_classes)
            .map(|q| out.expectation_z(q))
            .collect::<Result<_, _>>()?)
    }

    /// Softmax of the class expectations; entries sum to 1.
    pub fn class_probabilities(&self, state: &Statevector) -> QmlResult<Vec<f64>> {
        Ok(softmax(&self.expectations(state)?))
    }

    /// The class with the largest expectation, lowest index on ties.
    pub fn predict(&self, state: &Statevector) -> QmlResult<usize> {
        let exps = self.expectations(state)?;
        let mut best = 0;
        for (j, &e) in exps.iter().enumerate() {
            if e > exps[best] {
                best = j;
            }
        }
        Ok(best)
    }

    /// Mean cross-entropy −log p(y|x) over a labeled batch.
    pub fn batch_loss(&self, batch: &[EncodedSample]) -> QmlResult<f64> {
        if batch.is_empty() {
            return Err(QmlError::EmptyDataset);
        }
        let total: f64 = batch
            .par_iter()
            .map(|(state, label)| -> QmlResult<f64> {
                let label = *label as usize;
                if label >= self.n_classes {
                    return Err(QmlError::BadLabel {
                        label,
                        n_classes: self.n_classes,
                    });
                }
                Ok(-self.class_probabilities(state)?[label].ln())
            })
            .collect::<QmlResult<Vec<f64>>>()?
            .into_iter()
            .sum();
        Ok(total / batch.len() as f64)
    }

    /// Fraction of the batch predicted correctly.
    pub fn accuracy(&self, batch: &[EncodedSample]) -> QmlResult<f64> {
        if batch.is_empty() {
            return Err(QmlError::EmptyDataset);
        }
        let hits: usize = batch
            .par_iter()
            .map(|(state, label)| -> QmlResult<usize> {
                Ok((self.predict(state)? == *label as usize) as usize)
            })
            .collect::<QmlResult<Vec<usize>>>()?
            .into_iter()
            .sum();
        Ok(hits as f64 / batch.len() as f64)
    }

    /// Serializes dims and parameters as a JSON checkpoint.
    pub fn to_json(&self) -> QmlResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Restores a checkpoint, re-validating the invariants.
    pub fn from_json(json: &str) -> QmlResult<Self> {
        let model: QvcModel = serde_json::from_str(json)?;
        model.validate()?;
        Ok(model)
    }
}

/// Knobs for [`train`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Validation cadence, in optimizer steps.
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 1,
            batch_size: 32,
            seed: 1,
            eval_every: 50,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> QmlResult<()> {
        if !(self.learning_rate > 0.0) || self.batch_size == 0 || self.eval_every == 0 {
            return Err(QmlError::BadConfig(
                "learning_rate, batch_size and eval_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One validation measurement taken during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub accuracy: f64,
    pub loss: f64,
}

/// Renders a validation trace as `step,accuracy,loss` CSV.
pub fn trace_to_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("step,accuracy,loss\n");
    for p in trace {
        out.push_str(&format!("{},{},{}\n", p.step, p.accuracy, p.loss));
    }
    out
}

fn check_labels(model: &QvcModel, set: &[EncodedSample]) -> QmlResult<()> {
    for (state, label) in set {
        if *label as usize >= model.n_classes {
            return Err(QmlError::BadLabel {
                label: *label as usize,
                n_classes: model.n_classes,
            });
        }
        model.check_state(state)?;
    }
    Ok(())
}

/// Mean cross-entropy gradient over a batch: items run in parallel, the
/// accumulation is an ordered sequential sum so results are reproducible.
fn batch_gradient(
    ansatz: &Circuit,
    params: &[f64],
    n_classes: usize,
    batch: &[&EncodedSample],
) -> QmlResult<Vec<f64>> {
    let per_item: Vec<Vec<f64>> = batch
        .par_iter()
        .map(|(state, label)| -> QmlResult<Vec<f64>> {
            let loss = CrossEntropyLoss {
                label: *label as usize,
                n_classes,
            };
            let (_, grads) = circuit_gradient(ansatz, params, state, &loss)?;
            Ok(grads)
        })
        .collect::<QmlResult<_>>()?;
    let mut mean = vec![0.0; params.len()];
    for grads in &per_item {
        for (m, g) in mean.iter_mut().zip(grads) {
            *m += g;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    for m in &mut mean {
        *m *= scale;
    }
    Ok(mean)
}

/// Trains `model`'s parameters by Adam on mean cross-entropy over
/// shuffled minibatches. Returns the trained parameters and a validation
/// trace sampled every `eval_every` optimizer steps (empty when `val`
/// is empty). Fixed seeds reproduce the run bit-exactly.
pub fn train(
    model: &QvcModel,
    training: &[EncodedSample],
    val: &[EncodedSample],
    config: &TrainConfig,
) -> QmlResult<(Vec<f64>, Vec<TracePoint>)> {
    model.validate()?;
    config.validate()?;
    if training.is_empty() {
        return Err(QmlError::EmptyDataset);
    }
    check_labels(model, training)?;
    check_labels(model, val)?;

    let ansatz = model.circuit();
    let mut params = model.params.clone();
    let mut adam = Adam::new(params.len(), config.learning_rate);
    let mut trace = Vec::new();
    let mut step = 0usize;

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..training.len()).collect();
        order.shuffle(&mut substream(config.seed, "qvc-shuffle", epoch as u64));
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&EncodedSample> = chunk.iter().map(|&i| &training[i]).collect();
            let grads = batch_gradient(&ansatz, &params, model.n_classes, &batch)?;
            adam.step(&mut params, &grads);
            step += 1;
            if step % config.eval_every == 0 && !val.is_empty() {
                let snapshot = QvcModel {
                    params: params.clone(),
                    ..model.clone()
                };
                trace.push(TracePoint {
                    step,
                    accuracy: snapshot.accuracy(val)?,
                    loss: snapshot.batch_loss(val)?,
                });
            }
        }
    }
    Ok((params, trace))
}

/// Encodes every image of a dataset, pairing each state with its label.
pub fn encode_dataset(dataset: &LabeledDataset, mode: EncodingMode) -> QmlResult<Vec<EncodedSample>> {
    dataset
        .images
        .iter()
        .zip(&dataset.labels)
        .map(|(image, &label)| Ok((amplitude_encode(image, mode)?, label)))
        .collect()
}

/// Sequence position of each row-major pixel under the encoding's
/// traversal order.
fn sequence_position(m: usize, width: usize, height: usize, mode: EncodingMode) -> usize {
    match mode {
        EncodingMode::VerticalPair => {
            let row = m / width;
            let col = m % width;
            col * height + row
        }
        _ => m,
    }
}

/// Gradient of −log p(label | image) with respect to raw pixels, chained
/// analytically through the amplitude encoding's normalization. Because
/// encoding is scale-invariant, the directional derivative along the
/// image itself is exactly zero.
pub fn input_gradient(
    model: &QvcModel,
    image: &Image,
    label: usize,
    mode: EncodingMode,
) -> QmlResult<Vec<f64>> {
    if label >= model.n_classes {
        return Err(QmlError::BadLabel {
            label,
            n_classes: model.n_classes,
        });
    }
    let encoded = amplitude_encode(image, mode)?;
    model.check_state(&encoded)?;

    let bound = model.circuit().bind_parameters(&model.params)?;
    let loss = CrossEntropyLoss {
        label,
        n_classes: model.n_classes,
    };
    let res = adjoint_gradient(&bound, &encoded, &loss)?;
    let lam = &res.input_cotangent;
    let psi = encoded.amplitudes();

    // With ψ_k = v_k/r, v linear in pixels and r = ‖x‖: a pixel feeding
    // slot k with coefficient c (1 for real parts, i for imaginary)
    // contributes dL/dx = 2·Re(λ_k·conj(c))/r − (x/r²)·2·Re(Σ λ·conj(ψ)).
    let pixels = image.pixels();
    let r = pixels.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radial: f64 = 2.0
        * lam
            .iter()
            .zip(psi)
            .map(|(l, p)| (l * p.conj()).re)
            .sum::<f64>();

    let grad = pixels
        .iter()
        .enumerate()
        .map(|(m, &x)| {
            let s = sequence_position(m, image.width(), image.height(), mode);
            let direct = match mode {
                EncodingMode::Conventional => 2.0 * lam[s].re,
                _ if s % 2 == 0 => 2.0 * lam[s / 2].re,
                _ => 2.0 * lam[s / 2].im,
            };
            direct / r - x / (r * r) * radial
        })
        .collect();
    Ok(grad)
}
