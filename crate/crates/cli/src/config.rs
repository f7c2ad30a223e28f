//! Experiment configuration: one JSON file drives every subcommand.
//!
//! Each section carries desk-scale defaults, so a config containing only
//! `{"seed": 7}` is complete. Unknown fields are rejected to catch typos.
//! The master `seed` is the only entropy source: every randomized stage
//! derives its own named substream from it, so two runs with equal
//! configs are bit-identical.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use qprep_core::dataset::LabeledDataset;
use qprep_core::encoding::EncodingMode;
use qprep_methods::{GaspConfig, MpsConfig, SweepSchedule, VariationalConfig};

use crate::error::{CliError, CliResult};
use crate::util::derived_seed;

/// Where the images come from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Synthetic 8x8 two-class shapes (soft-edged square vs plus).
    Shapes,
    /// Synthetic smooth stroke images of the given size; 32x32 strokes
    /// pair-encode into 9 qubits.
    Strokes { width: usize, height: usize },
    /// IDX image/label files on disk (the MNIST container format).
    Idx { images: PathBuf, labels: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    pub source: DatasetSource,
    /// Rows carved off for training.
    pub n_train: usize,
    /// Rows carved off for held-out evaluation.
    pub n_test: usize,
    /// Optional class filter: keep only these labels and renumber them
    /// by their position in this list.
    pub classes: Option<Vec<u8>>,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            source: DatasetSource::Shapes,
            n_train: 1500,
            n_test: 500,
            classes: None,
        }
    }
}

impl DatasetSpec {
    /// Materializes the (train, test) pair. Synthetic sources draw
    /// `n_train + n_test` rows (oversampling when a class filter thins
    /// the pool); file sources are split by a seeded shuffle. Rows never
    /// overlap between the parts.
    pub fn resolve(&self, seed: u64) -> CliResult<(LabeledDataset, LabeledDataset)> {
        let total = self.n_train + self.n_test;
        let gen_seed = derived_seed(seed, "dataset-gen", 0);
        let generate = |count: usize| -> CliResult<LabeledDataset> {
            Ok(match &self.source {
                DatasetSource::Shapes => qprep_core::dataset::generate_shapes(count, gen_seed)?,
                DatasetSource::Strokes { width, height } => {
                    qprep_core::dataset::generate_strokes(count, *width, *height, gen_seed)?
                }
                DatasetSource::Idx { images, labels } => {
                    qprep_core::dataset::load_idx(images, labels)?
                }
            })
        };
        let mut full = generate(total)?;
        if let Some(keep) = &self.classes {
            full = filter_classes(&full, keep)?;
            if !matches!(self.source, DatasetSource::Idx { .. }) {
                // Filtering thins a synthetic pool; regrow it until the
                // requested row count survives the filter.
                let mut factor = 2;
                while full.len() < total && factor <= 8 {
                    full = filter_classes(&generate(total * factor)?, keep)?;
                    factor *= 2;
                }
            }
        }
        if full.len() < total {
            return Err(CliError::Config(format!(
                "dataset provides {} rows but n_train + n_test = {total}",
                full.len()
            )));
        }
        let mut order: Vec<usize> = (0..full.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut qprep_core::rng::substream(seed, "dataset-split", 0));
        let train = full.subset(&order[..self.n_train])?;
        let test = full.subset(&order[self.n_train..total])?;
        Ok((train, test))
    }
}

/// Keeps only the listed labels and renumbers them by list position.
fn filter_classes(dataset: &LabeledDataset, keep: &[u8]) -> CliResult<LabeledDataset> {
    if keep.is_empty() {
        return Err(CliError::Config("class filter is empty".into()));
    }
    let indices: Vec<usize> = dataset
        .labels
        .iter()
        .enumerate()
        .filter(|(_, label)| keep.contains(label))
        .map(|(i, _)| i)
        .collect();
    let subset = dataset.subset(&indices)?;
    let labels = subset
        .labels
        .iter()
        .map(|l| keep.iter().position(|k| k == l).unwrap() as u8)
        .collect();
    let class_names = keep
        .iter()
        .map(|&k| {
            dataset
                .class_names
                .get(k as usize)
                .cloned()
                .unwrap_or_else(|| format!("class{k}"))
        })
        .collect();
    Ok(LabeledDataset::new(subset.images, labels, class_names)?)
}

/// Which approximate synthesis strategies a run compares. The exact
/// synthesizer is always included as the baseline and is not listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Mps,
    Genetic,
    Variational,
}

impl MethodName {
    pub fn label(self) -> &'static str {
        match self {
            MethodName::Mps => "mps",
            MethodName::Genetic => "genetic",
            MethodName::Variational => "variational",
        }
    }
}

/// MPS disentangling knobs (the shared fidelity target is supplied by
/// [`PreparationSpec`]).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MpsTuning {
    pub schedule: SweepSchedule,
    pub max_sweeps: usize,
    pub max_bond: Option<usize>,
}

impl Default for MpsTuning {
    fn default() -> Self {
        Self {
            schedule: SweepSchedule::Sequential,
            max_sweeps: 16,
            max_bond: None,
        }
    }
}

/// Genetic-synthesis knobs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GaspTuning {
    pub population: usize,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub max_stale: usize,
    pub max_generations: usize,
    pub opt_steps: usize,
    pub opt_learning_rate: f64,
    pub initial_genes: usize,
}

impl Default for GaspTuning {
    fn default() -> Self {
        Self {
            population: 24,
            mutation_rate: 0.08,
            elite_count: 2,
            max_stale: 12,
            max_generations: 50,
            opt_steps: 20,
            opt_learning_rate: 0.1,
            initial_genes: 12,
        }
    }
}

/// Variational-synthesis knobs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct VariationalTuning {
    pub max_layers: usize,
    pub steps_per_round: usize,
    pub learning_rate: f64,
    pub init_scale: f64,
}

impl Default for VariationalTuning {
    fn default() -> Self {
        Self {
            max_layers: 8,
            steps_per_round: 300,
            learning_rate: 0.1,
            init_scale: 0.1,
        }
    }
}

/// State-preparation strategy roster and shared fidelity target.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PreparationSpec {
    /// Fidelity every approximate method aims for.
    pub fidelity_target: f64,
    pub methods: Vec<MethodName>,
    /// How many test images the depth benchmark synthesizes circuits for.
    pub n_states: usize,
    pub mps: MpsTuning,
    pub genetic: GaspTuning,
    pub variational: VariationalTuning,
}

impl Default for PreparationSpec {
    fn default() -> Self {
        Self {
            fidelity_target: 0.7,
            methods: vec![MethodName::Mps, MethodName::Genetic, MethodName::Variational],
            n_states: 100,
            mps: MpsTuning::default(),
            genetic: GaspTuning::default(),
            variational: VariationalTuning::default(),
        }
    }
}

impl PreparationSpec {
    pub fn mps_config(&self) -> MpsConfig {
        MpsConfig {
            target_fidelity: self.fidelity_target,
            schedule: self.mps.schedule,
            max_sweeps: self.mps.max_sweeps,
            max_bond: self.mps.max_bond,
        }
    }

    pub fn gasp_config(&self, seed: u64) -> GaspConfig {
        GaspConfig {
            target_fidelity: self.fidelity_target,
            population: self.genetic.population,
            mutation_rate: self.genetic.mutation_rate,
            elite_count: self.genetic.elite_count,
            max_stale: self.genetic.max_stale,
            max_generations: self.genetic.max_generations,
            opt_steps: self.genetic.opt_steps,
            opt_learning_rate: self.genetic.opt_learning_rate,
            initial_genes: self.genetic.initial_genes,
            seed,
        }
    }

    pub fn variational_config(&self, seed: u64) -> VariationalConfig {
        VariationalConfig {
            target_fidelity: self.fidelity_target,
            max_layers: self.variational.max_layers,
            steps_per_round: self.variational.steps_per_round,
            learning_rate: self.variational.learning_rate,
            init_scale: self.variational.init_scale,
            seed,
        }
    }
}

/// Classifier architecture.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSpec {
    /// Ansatz depth; `None` picks 20 layers for 9-qubit encodings and 4
    /// otherwise.
    pub n_layers: Option<usize>,
    pub n_classes: usize,
    /// Half-width of the uniform parameter initialization.
    pub init_scale: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            n_layers: None,
            n_classes: 2,
            init_scale: 1.5,
        }
    }
}

impl ModelSpec {
    pub fn layers_for(&self, n_qubits: usize) -> usize {
        self.n_layers.unwrap_or(if n_qubits >= 9 { 20 } else { 8 })
    }
}

/// Classifier training schedule (also used for the pixel surrogate,
/// which carries its own copy under [`SurrogateSpec`]).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSpec {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Optimizer steps between validation-trace points.
    pub eval_every: usize,
}

impl Default for TrainingSpec {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            epochs: 300,
            batch_size: 32,
            eval_every: 200,
        }
    }
}

/// Pixel-space surrogate network.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateSpec {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        Self {
            hidden: 32,
            learning_rate: 1e-3,
            epochs: 150,
            batch_size: 32,
        }
    }
}

/// Gradient sources for transfer attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackSource {
    /// The dense pixel surrogate.
    Surrogate,
    /// The exactly-prepared classifier itself.
    Qvc,
}

/// Transfer-attack sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSpec {
    pub epsilon_grid: Vec<f64>,
    pub steps: usize,
    /// Step size; `None` means epsilon / steps. Saturated surrogates
    /// need a much larger value so the box projection turns each update
    /// into a sign-style step.
    pub alpha: Option<f64>,
    /// How many held-out images each attack is evaluated on.
    pub n_eval: usize,
    pub sources: Vec<AttackSource>,
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self {
            epsilon_grid: vec![0.0, 0.05, 0.1],
            steps: 3,
            alpha: None,
            n_eval: 100,
            sources: vec![AttackSource::Surrogate, AttackSource::Qvc],
        }
    }
}

/// Noise studies: uniform pixel noise on the encoder inputs and
/// depolarizing noise on the preparation circuits.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    /// Sweep of uniform pixel-noise half-widths.
    pub uniform_grid: Vec<f64>,
    /// Held-out images per uniform-noise grid point.
    pub n_eval: usize,
    /// Sweep of per-two-qubit-gate depolarizing probabilities.
    pub depol_grid: Vec<f64>,
    /// Monte-Carlo trajectories per (image, probability).
    pub trajectories: usize,
    /// Held-out images per depolarizing grid point.
    pub depol_n_eval: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            uniform_grid: vec![0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0, 1.25, 1.5],
            n_eval: 200,
            depol_grid: vec![0.0, 1e-3, 1e-2, 1e-1],
            trajectories: 200,
            depol_n_eval: 40,
        }
    }
}

/// The `prepare` subcommand: how many test images get their circuits
/// written out, and in which formats.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PrepareSpec {
    pub n_images: usize,
    pub emit_qasm: bool,
}

impl Default for PrepareSpec {
    fn default() -> Self {
        Self {
            n_images: 4,
            emit_qasm: true,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Everything one experiment needs, in one JSON document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; reproducibility is mandatory, so there is no default.
    pub seed: u64,
    #[serde(default)]
    pub dataset: DatasetSpec,
    #[serde(default = "default_encoding")]
    pub encoding: EncodingMode,
    #[serde(default)]
    pub preparation: PreparationSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub training: TrainingSpec,
    #[serde(default)]
    pub surrogate: SurrogateSpec,
    #[serde(default)]
    pub attack: AttackSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub prepare: PrepareSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_encoding() -> EncodingMode {
    EncodingMode::HorizontalPair
}

impl ExperimentConfig {
    /// A complete desk-scale configuration for the given seed.
    pub fn with_seed(seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "seed": seed }))
            .expect("the default config is complete")
    }

    pub fn from_json(json: &str) -> CliResult<Self> {
        let config: Self = serde_json::from_str(json)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::MissingInput(format!("config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.dataset.n_train == 0 || self.dataset.n_test == 0 {
            return bad("n_train and n_test must be positive".into());
        }
        if !(self.preparation.fidelity_target > 0.0 && self.preparation.fidelity_target <= 1.0) {
            return bad(format!(
                "fidelity_target {} outside (0, 1]",
                self.preparation.fidelity_target
            ));
        }
        if self.preparation.n_states == 0 {
            return bad("preparation.n_states must be positive".into());
        }
        if self.attack.epsilon_grid.is_empty() {
            return bad("attack.epsilon_grid is empty".into());
        }
        if self.attack.sources.is_empty() {
            return bad("attack.sources is empty".into());
        }
        if self.attack.epsilon_grid.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return bad("attack.epsilon_grid entries must be finite and nonnegative".into());
        }
        if self.attack.steps == 0 {
            return bad("attack.steps must be positive".into());
        }
        if self.attack.n_eval == 0 || self.noise.n_eval == 0 || self.noise.depol_n_eval == 0 {
            return bad("evaluation counts must be positive".into());
        }
        if self.noise.uniform_grid.is_empty() || self.noise.depol_grid.is_empty() {
            return bad("noise grids must be nonempty".into());
        }
        if self.noise.uniform_grid.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return bad("noise.uniform_grid entries must be finite and nonnegative".into());
        }
        if self.noise.depol_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("noise.depol_grid entries must lie in [0, 1]".into());
        }
        if self.noise.trajectories == 0 {
            return bad("noise.trajectories must be positive".into());
        }
        if self.training.batch_size == 0 || self.surrogate.batch_size == 0 {
            return bad("batch sizes must be positive".into());
        }
        if self.prepare.n_images == 0 {
            return bad("prepare.n_images must be positive".into());
        }
        Ok(())
    }

    /// Canonical JSON rendering used for the manifest hash.
    pub fn canonical_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string(self)?)
    }
}
