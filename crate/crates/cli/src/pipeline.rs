//! Shared pipeline stages: dataset encoding, model training, the
//! classifier roster, and circuit synthesis dispatch.
//!
//! Every stage seeds its randomness from a named substream of the
//! master seed, so any subcommand can rebuild any upstream artifact
//! bit-for-bit instead of depending on execution order.

use std::time::Instant;

use rand::Rng;

use qprep_core::dataset::LabeledDataset;
use qprep_core::report::PrepReport;
use qprep_core::synthesis::{exact_prepare, simplify, transpile_to_basis};
use qprep_core::{fidelity, Circuit, Statevector};
use qprep_methods::{gasp_prepare, mps_prepare, variational_prepare};
use qprep_qml::qvc::EncodedSample;
use qprep_qml::{
    encode_dataset, train, train_surrogate, Preparation, PreparedQvc, QvcModel, SurrogateModel,
    TracePoint, TrainConfig,
};

use crate::config::{ExperimentConfig, MethodName};
use crate::error::{CliError, CliResult};
use crate::util::derived_seed;

/// Train/test datasets with their encoded counterparts.
pub struct EncodedSplit {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub train_encoded: Vec<EncodedSample>,
    pub test_encoded: Vec<EncodedSample>,
    pub n_qubits: usize,
}

/// Resolves the configured dataset and amplitude-encodes both halves.
pub fn resolve_and_encode(config: &ExperimentConfig) -> CliResult<EncodedSplit> {
    let (train, test) = config.dataset.resolve(config.seed)?;
    let train_encoded = encode_dataset(&train, config.encoding)?;
    let test_encoded = encode_dataset(&test, config.encoding)?;
    let n_qubits = train_encoded
        .first()
        .map(|(state, _)| state.n_qubits())
        .ok_or_else(|| CliError::Config("training split is empty".into()))?;
    Ok(EncodedSplit {
        train,
        test,
        train_encoded,
        test_encoded,
        n_qubits,
    })
}

/// Uniform random angles in ±init_scale for a fresh classifier.
fn initial_model(config: &ExperimentConfig, n_qubits: usize) -> CliResult<QvcModel> {
    let mut model = QvcModel::new(
        n_qubits,
        config.model.layers_for(n_qubits),
        config.model.n_classes,
    )?;
    let scale = config.model.init_scale;
    let mut rng = qprep_core::rng::substream(config.seed, "qvc-init", 0);
    for p in &mut model.params {
        *p = rng.gen_range(-scale..scale);
    }
    Ok(model)
}

/// Trains the quantum classifier on the encoded split.
pub fn train_classifier(
    config: &ExperimentConfig,
    split: &EncodedSplit,
) -> CliResult<(QvcModel, Vec<TracePoint>)> {
    let mut model = initial_model(config, split.n_qubits)?;
    let train_config = TrainConfig {
        learning_rate: config.training.learning_rate,
        epochs: config.training.epochs,
        batch_size: config.training.batch_size,
        seed: derived_seed(config.seed, "qvc-train", 0),
        eval_every: config.training.eval_every,
    };
    let (params, trace) = train(
        &model,
        &split.train_encoded,
        &split.test_encoded,
        &train_config,
    )?;
    model.params = params;
    Ok((model, trace))
}

/// Trains the dense pixel-space surrogate on the raw training images.
pub fn train_pixel_surrogate(
    config: &ExperimentConfig,
    train_set: &LabeledDataset,
) -> CliResult<SurrogateModel> {
    let train_config = TrainConfig {
        learning_rate: config.surrogate.learning_rate,
        epochs: config.surrogate.epochs,
        batch_size: config.surrogate.batch_size,
        seed: derived_seed(config.seed, "surrogate-train", 0),
        // The surrogate keeps no validation trace.
        eval_every: usize::MAX,
    };
    Ok(train_surrogate(
        train_set,
        config.surrogate.hidden,
        &train_config,
    )?)
}

/// The preparation pipeline a method runs inside a classifier roster.
pub fn method_preparation(config: &ExperimentConfig, method: MethodName) -> Preparation {
    let seed = derived_seed(config.seed, "prep-roster", method as u64);
    match method {
        MethodName::Mps => Preparation::Mps(config.preparation.mps_config()),
        MethodName::Genetic => Preparation::Gasp(config.preparation.gasp_config(seed)),
        MethodName::Variational => {
            Preparation::Variational(config.preparation.variational_config(seed))
        }
    }
}

/// The classifier behind each preparation pipeline: the exact encoding
/// first, then one entry per configured method, all sharing the trained
/// model. Roster names are `qvc-exact`, `qvc-mps`, `qvc-genetic`,
/// `qvc-variational`.
pub fn classifier_roster(config: &ExperimentConfig, model: &QvcModel) -> Vec<PreparedQvc> {
    let mut roster = vec![PreparedQvc::exact(
        "qvc-exact",
        model.clone(),
        config.encoding,
    )];
    for &method in &config.preparation.methods {
        roster.push(PreparedQvc {
            name: format!("qvc-{}", method.label()),
            model: model.clone(),
            mode: config.encoding,
            preparation: method_preparation(config, method),
        });
    }
    roster
}

/// Synthesizes an exact preparation circuit and reports it in the same
/// shape the approximate methods use. `target_fidelity` records the
/// target the approximate methods were given, so rows stay comparable.
pub fn exact_baseline(target: &Statevector, target_fidelity: f64) -> CliResult<(Circuit, PrepReport)> {
    let started = Instant::now();
    let lowered = simplify(&transpile_to_basis(&exact_prepare(target)?)?);
    let achieved = fidelity(&lowered.simulate()?, target)?;
    let report = PrepReport {
        method: "exact".into(),
        n_qubits: target.n_qubits(),
        target_fidelity,
        achieved_fidelity: achieved,
        met_target: achieved >= target_fidelity,
        cnot_count: lowered.raw_cnot_count(),
        total_gates: lowered.gate_count(),
        depth: lowered.depth(),
        iterations: 0,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((lowered, report))
}

/// Runs one method (or the exact baseline for `None`) against one
/// target state. `image_index` salts the per-image search seed. The
/// report's method field always carries the roster label, so CSV rows
/// match the configuration vocabulary.
pub fn prepare_with(
    config: &ExperimentConfig,
    method: Option<MethodName>,
    target: &Statevector,
    image_index: usize,
) -> CliResult<(Circuit, PrepReport)> {
    let Some(method) = method else {
        return exact_baseline(target, config.preparation.fidelity_target);
    };
    let seed = derived_seed(config.seed, "prep-image", pack(method as u64, image_index));
    let (circuit, mut report) = match method {
        MethodName::Mps => mps_prepare(target, &config.preparation.mps_config())?,
        MethodName::Genetic => gasp_prepare(target, &config.preparation.gasp_config(seed))?,
        MethodName::Variational => {
            variational_prepare(target, &config.preparation.variational_config(seed))?
        }
    };
    report.method = method.label().to_string();
    Ok((circuit, report))
}

/// One benchmark column per roster entry: `None` is the exact baseline.
pub fn benchmark_methods(config: &ExperimentConfig) -> Vec<Option<MethodName>> {
    let mut methods = vec![None];
    methods.extend(config.preparation.methods.iter().copied().map(Some));
    methods
}

fn pack(method: u64, image_index: usize) -> u64 {
    (method << 48) | image_index as u64
}
