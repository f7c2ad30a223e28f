//! The experiment runners behind each subcommand.
//!
//! Every runner writes the run manifest plus its own CSV/JSON artifacts
//! under the output directory and returns a typed outcome for callers
//! that want the numbers programmatically. Result rows are sorted
//! before writing and rendered with round-trip float formatting, so a
//! rerun with the same configuration reproduces every byte.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qprep_core::encoding::amplitude_encode;
use qprep_core::noise::sample_depolarizing_with_rng;
use qprep_core::report::{csv_field, PrepReport};
use qprep_core::{fidelity, Circuit, Statevector};
use qprep_qml::{
    transfer_evaluate, AttackConfig, DifferentiableClassifier, ImageClassifier, QvcModel,
    SurrogateModel, TransferRow,
};

use crate::config::{AttackSource, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::pipeline::{
    benchmark_methods, classifier_roster, prepare_with, resolve_and_encode, train_classifier,
    train_pixel_surrogate, EncodedSplit,
};
use crate::util::{derived_seed, write_file};

/// Writes (or verifies) the run manifest. A directory that already
/// holds results for a different configuration is rejected rather than
/// silently mixed.
pub fn establish_run(config: &ExperimentConfig, out: &Path) -> CliResult<RunManifest> {
    let manifest = RunManifest::for_config(config)?;
    if out.join(crate::manifest::MANIFEST_FILE).exists() {
        let existing = RunManifest::load(out)?;
        if existing != manifest {
            return Err(CliError::Config(format!(
                "{} holds results for a different configuration; use a fresh --out",
                out.display()
            )));
        }
    }
    manifest.write(out, config)?;
    Ok(manifest)
}

fn float_cell(x: f64) -> String {
    format!("{x}")
}

// ---------------------------------------------------------------- train

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub surrogate_test_accuracy: f64,
}

/// Trains the quantum classifier and the pixel surrogate, then persists
/// both models with their accuracy summary.
pub fn run_train(config: &ExperimentConfig, out: &Path) -> CliResult<TrainOutcome> {
    establish_run(config, out)?;
    let split = resolve_and_encode(config)?;
    let (model, trace) = train_classifier(config, &split)?;
    let surrogate = train_pixel_surrogate(config, &split.train)?;

    let outcome = TrainOutcome {
        train_accuracy: model.accuracy(&split.train_encoded)?,
        test_accuracy: model.accuracy(&split.test_encoded)?,
        surrogate_test_accuracy: surrogate.accuracy(&split.test)?,
    };

    let dir = out.join("train");
    write_file(
        &dir.join("model.json"),
        &format!("{}\n", serde_json::to_string_pretty(&model)?),
    )?;
    write_file(
        &dir.join("surrogate.json"),
        &format!("{}\n", serde_json::to_string_pretty(&surrogate)?),
    )?;
    write_file(&dir.join("trace.csv"), &qprep_qml::trace_to_csv(&trace))?;
    let mut summary = String::from("model,split,accuracy,n\n");
    summary.push_str(&format!(
        "qvc,train,{},{}\n",
        float_cell(outcome.train_accuracy),
        split.train.len()
    ));
    summary.push_str(&format!(
        "qvc,test,{},{}\n",
        float_cell(outcome.test_accuracy),
        split.test.len()
    ));
    summary.push_str(&format!(
        "surrogate,test,{},{}\n",
        float_cell(outcome.surrogate_test_accuracy),
        split.test.len()
    ));
    write_file(&dir.join("summary.csv"), &summary)?;
    Ok(outcome)
}

/// Loads the persisted classifier, or retrains it (bit-identically)
/// when the output directory has no `train/` artifacts yet.
fn load_or_train_classifier(
    config: &ExperimentConfig,
    out: &Path,
    split: &EncodedSplit,
) -> CliResult<QvcModel> {
    let path = out.join("train/model.json");
    if path.exists() {
        return Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?);
    }
    Ok(train_classifier(config, split)?.0)
}

fn load_or_train_surrogate(
    config: &ExperimentConfig,
    out: &Path,
    split: &EncodedSplit,
) -> CliResult<SurrogateModel> {
    let path = out.join("train/surrogate.json");
    if path.exists() {
        return Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?);
    }
    train_pixel_surrogate(config, &split.train)
}

// -------------------------------------------------------------- prepare

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepareOutcome {
    /// One report per (image, method), sorted by image then method.
    pub rows: Vec<(usize, PrepReport)>,
}

/// Synthesizes circuits for the first few test images with every method
/// and writes them out as JSON (and optionally OpenQASM).
pub fn run_prepare(config: &ExperimentConfig, out: &Path) -> CliResult<PrepareOutcome> {
    establish_run(config, out)?;
    let split = resolve_and_encode(config)?;
    let n_images = config.prepare.n_images;
    if split.test.len() < n_images {
        return Err(CliError::Config(format!(
            "prepare.n_images {} exceeds the {} test images",
            n_images,
            split.test.len()
        )));
    }
    let dir = out.join("prepare");
    let mut rows = Vec::new();
    for i in 0..n_images {
        let target = &split.test_encoded[i].0;
        for method in benchmark_methods(config) {
            let (circuit, report) = prepare_with(config, method, target, i)?;
            let stem = format!("img{i:02}-{}", report.method);
            write_file(&dir.join(format!("{stem}.json")), &circuit.to_json()?)?;
            if config.prepare.emit_qasm {
                write_file(&dir.join(format!("{stem}.qasm")), &circuit.to_qasm()?)?;
            }
            rows.push((i, report));
        }
    }
    rows.sort_by(|a, b| (a.0, &a.1.method).cmp(&(b.0, &b.1.method)));
    write_file(&dir.join("reports.csv"), &indexed_reports_csv(&rows))?;
    Ok(PrepareOutcome { rows })
}

/// `image,` column in front of the standard preparation-report CSV.
fn indexed_reports_csv(rows: &[(usize, PrepReport)]) -> String {
    let mut doc = format!("image,{}\n", PrepReport::csv_header());
    for (image, report) in rows {
        doc.push_str(&format!("{image},{}\n", report.csv_row()));
    }
    doc
}

// ---------------------------------------------------------- bench-depth

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthOutcome {
    pub rows: Vec<(usize, PrepReport)>,
    /// Method label → median CNOT count, sorted by label.
    pub medians: Vec<(String, f64)>,
}

impl DepthOutcome {
    pub fn median_of(&self, method: &str) -> Option<f64> {
        self.medians
            .iter()
            .find(|(name, _)| name == method)
            .map(|(_, m)| *m)
    }
}

/// Synthesizes every configured method (plus the exact baseline)
/// against the first `preparation.n_states` test images and reports
/// per-method CNOT medians.
pub fn run_depth_benchmark(config: &ExperimentConfig, out: &Path) -> CliResult<DepthOutcome> {
    establish_run(config, out)?;
    let split = resolve_and_encode(config)?;
    let n_states = config.preparation.n_states;
    if split.test.len() < n_states {
        return Err(CliError::Config(format!(
            "preparation.n_states {} exceeds the {} test images",
            n_states,
            split.test.len()
        )));
    }
    let tasks: Vec<(usize, Option<crate::config::MethodName>)> = (0..n_states)
        .flat_map(|i| benchmark_methods(config).into_iter().map(move |m| (i, m)))
        .collect();
    let mut rows: Vec<(usize, PrepReport)> = tasks
        .par_iter()
        .map(|&(i, method)| -> CliResult<(usize, PrepReport)> {
            let target = &split.test_encoded[i].0;
            let (_, report) = prepare_with(config, method, target, i)?;
            Ok((i, report))
        })
        .collect::<CliResult<_>>()?;
    rows.sort_by(|a, b| (a.0, &a.1.method).cmp(&(b.0, &b.1.method)));

    let mut methods: Vec<String> = rows.iter().map(|(_, r)| r.method.clone()).collect();
    methods.sort();
    methods.dedup();
    let medians: Vec<(String, f64)> = methods
        .into_iter()
        .map(|name| {
            let counts: Vec<usize> = rows
                .iter()
                .filter(|(_, r)| r.method == name)
                .map(|(_, r)| r.cnot_count)
                .collect();
            (name, median(&counts))
        })
        .collect();

    let dir = out.join("depth");
    write_file(&dir.join("rows.csv"), &indexed_reports_csv(&rows))?;
    let mut summary = String::from("method,median_cnots,n_images\n");
    for (name, m) in &medians {
        summary.push_str(&format!("{},{},{n_states}\n", csv_field(name), float_cell(*m)));
    }
    write_file(&dir.join("summary.csv"), &summary)?;
    Ok(DepthOutcome { rows, medians })
}

/// Median of a nonempty list; even lengths average the middle pair.
fn median(values: &[usize]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

// ---------------------------------------------------------- bench-noise

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseRow {
    pub strength: f64,
    pub mean_fidelity: f64,
    pub accuracy: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseOutcome {
    pub rows: Vec<NoiseRow>,
}

/// Sweeps uniform pixel noise on the encoder inputs: per strength, the
/// mean fidelity of the noisy encoded state against the clean one and
/// the exact-encoding classifier's accuracy on the noisy states.
pub fn run_noise_robustness(config: &ExperimentConfig, out: &Path) -> CliResult<NoiseOutcome> {
    establish_run(config, out)?;
    let split = resolve_and_encode(config)?;
    let n = config.noise.n_eval.min(split.test.len());
    let model = load_or_train_classifier(config, out, &split)?;

    let mut strengths = config.noise.uniform_grid.clone();
    strengths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    strengths.dedup();

    let mut rows = Vec::with_capacity(strengths.len());
    for (k, &strength) in strengths.iter().enumerate() {
        let per_image: Vec<(f64, bool)> = (0..n)
            .into_par_iter()
            .map(|i| -> CliResult<(f64, bool)> {
                let image = &split.test.images[i];
                let label = split.test.labels[i] as usize;
                let mut rng = qprep_core::rng::substream(
                    config.seed,
                    "encode-noise",
                    ((k as u64) << 32) | i as u64,
                );
                let noisy =
                    qprep_core::encoding::add_uniform_noise(image, strength, &mut rng)?;
                let state = amplitude_encode(&noisy, config.encoding)?;
                // Zero noise leaves the pixels untouched, so the state is
                // the clean encoding by construction.
                let fid = if strength == 0.0 {
                    1.0
                } else {
                    fidelity(&state, &split.test_encoded[i].0)?
                };
                Ok((fid, model.predict(&state)? == label))
            })
            .collect::<CliResult<_>>()?;
        let mean_fidelity = per_image.iter().map(|(f, _)| f).sum::<f64>() / n as f64;
        let hits = per_image.iter().filter(|(_, hit)| *hit).count();
        rows.push(NoiseRow {
            strength,
            mean_fidelity,
            accuracy: hits as f64 / n as f64,
            n,
        });
    }

    let mut doc = String::from("strength,mean_fidelity,accuracy,n\n");
    for row in &rows {
        doc.push_str(&format!(
            "{},{},{},{}\n",
            float_cell(row.strength),
            float_cell(row.mean_fidelity),
            float_cell(row.accuracy),
            row.n
        ));
    }
    write_file(&out.join("noise/noise.csv"), &doc)?;
    Ok(NoiseOutcome { rows })
}

// --------------------------------------------------------------- attack

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub rows: Vec<TransferRow>,
}

impl AttackOutcome {
    pub fn accuracy_of(&self, source: &str, target: &str, epsilon: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.source == source && r.target == target && r.epsilon == epsilon)
            .map(|r| r.accuracy)
    }
}

/// Crafts PGD perturbations on each configured source and scores the
/// surrogate plus the whole classifier roster on the same images.
pub fn run_transfer_attack(config: &ExperimentConfig, out: &Path) -> CliResult<AttackOutcome> {
    establish_run(config, out)?;
    let split = resolve_and_encode(config)?;
    let n = config.attack.n_eval.min(split.test.len());
    let eval_set = split.test.subset(&(0..n).collect::<Vec<_>>())?;
    let model = load_or_train_classifier(config, out, &split)?;
    let surrogate = load_or_train_surrogate(config, out, &split)?;
    let roster = classifier_roster(config, &model);

    let mut targets: Vec<&dyn ImageClassifier> = vec![&surrogate];
    for qvc in &roster {
        targets.push(qvc);
    }

    let mut rows = Vec::new();
    for (s_idx, source_kind) in config.attack.sources.iter().enumerate() {
        let source: &dyn DifferentiableClassifier = match source_kind {
            AttackSource::Surrogate => &surrogate,
            AttackSource::Qvc => &roster[0],
        };
        let attack = AttackConfig {
            epsilon: 0.0,
            steps: config.attack.steps,
            alpha: config.attack.alpha,
            seed: derived_seed(config.seed, "attack", s_idx as u64),
        };
        let report = transfer_evaluate(
            source,
            &targets,
            &eval_set,
            &config.attack.epsilon_grid,
            &attack,
        )?;
        rows.extend(report.rows);
    }
    rows.sort_by(|a, b| {
        (&a.source, a.epsilon, &a.target)
            .partial_cmp(&(&b.source, b.epsilon, &b.target))
            .expect("finite epsilons")
    });

    let mut doc = String::from("source,target,epsilon,accuracy,n\n");
    for r in &rows {
        doc.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&r.source),
            csv_field(&r.target),
            float_cell(r.epsilon),
            float_cell(r.accuracy),
            r.n_examples
        ));
    }
    write_file(&out.join("attack/transfer.csv"), &doc)?;
    Ok(AttackOutcome { rows })
}

// ---------------------------------------------------------- bench-depol

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepolRow {
    pub p: f64,
    pub method: String,
    pub accuracy: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepolOutcome {
    pub rows: Vec<DepolRow>,
}

impl DepolOutcome {
    pub fn accuracy_of(&self, method: &str, p: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.p == p)
            .map(|r| r.accuracy)
    }
}

/// Depolarizing-noise sweep. Noise acts on the preparation circuit only
/// (probability `p` of a uniform two-qubit Pauli after every two-qubit
/// gate); the classifier itself runs ideally, so the comparison
/// isolates how each method's circuit depth translates into decoherence.
/// Predictions average ⟨Z⟩ per class qubit over seeded trajectories.
pub fn run_depolarizing_sweep(config: &ExperimentConfig, out: &Path) -> CliResult<DepolOutcome> {
    establish_run(config, out)?;
    let split = resolve_and_encode(config)?;
    let n = config.noise.depol_n_eval.min(split.test.len());
    let model = load_or_train_classifier(config, out, &split)?;
    let classifier = model.circuit().bind_parameters(&model.params)?;

    // Synthesize each preparation circuit once, with the same per-image
    // seeds the depth benchmark uses.
    let methods = benchmark_methods(config);
    let mut circuits: Vec<(String, Vec<Circuit>)> = Vec::new();
    for &method in &methods {
        let per_image: Vec<(String, Circuit)> = (0..n)
            .into_par_iter()
            .map(|i| -> CliResult<(String, Circuit)> {
                let target = &split.test_encoded[i].0;
                let (circuit, report) = prepare_with(config, method, target, i)?;
                Ok((report.method, circuit))
            })
            .collect::<CliResult<_>>()?;
        let label = per_image[0].0.clone();
        circuits.push((label, per_image.into_iter().map(|(_, c)| c).collect()));
    }

    let mut grid = config.noise.depol_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let mut rows = Vec::new();
    for (p_idx, &p) in grid.iter().enumerate() {
        for (m_idx, (label, prep_circuits)) in circuits.iter().enumerate() {
            let hits: usize = (0..n)
                .into_par_iter()
                .map(|i| -> CliResult<usize> {
                    let prep = &prep_circuits[i];
                    let input = Statevector::zero(prep.n_qubits);
                    let base = derived_seed(
                        config.seed,
                        "depol",
                        ((m_idx as u64) << 48) | ((p_idx as u64) << 32) | i as u64,
                    );
                    let mut sums = vec![0.0; model.n_classes];
                    for t in 0..config.noise.trajectories {
                        let mut rng = ChaCha8Rng::seed_from_u64(base);
                        rng.set_stream(t as u64);
                        let noisy = sample_depolarizing_with_rng(prep, &input, p, &mut rng)?;
                        let read = classifier.apply(&noisy)?;
                        for (q, sum) in sums.iter_mut().enumerate() {
                            *sum += read.expectation_z(q)?;
                        }
                    }
                    let mut best = 0;
                    for (q, &s) in sums.iter().enumerate() {
                        if s > sums[best] {
                            best = q;
                        }
                    }
                    Ok((best == split.test.labels[i] as usize) as usize)
                })
                .collect::<CliResult<Vec<usize>>>()?
                .into_iter()
                .sum();
            rows.push(DepolRow {
                p,
                method: label.clone(),
                accuracy: hits as f64 / n as f64,
                n,
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.p, &a.method)
            .partial_cmp(&(b.p, &b.method))
            .expect("finite probabilities")
    });

    let mut doc = String::from("p,method,accuracy,n\n");
    for r in &rows {
        doc.push_str(&format!(
            "{},{},{},{}\n",
            float_cell(r.p),
            csv_field(&r.method),
            float_cell(r.accuracy),
            r.n
        ));
    }
    write_file(&out.join("depol/depol.csv"), &doc)?;
    Ok(DepolOutcome { rows })
}

// --------------------------------------------------------------- report

/// Collects the headline numbers already on disk into one text digest.
pub fn run_report(out: &Path) -> CliResult<String> {
    let manifest = RunManifest::load(out).map_err(|_| {
        CliError::MissingInput(format!("no manifest under {}", out.display()))
    })?;
    let mut digest = format!(
        "run {} (seed {})\n",
        &manifest.config_sha256[..12],
        manifest.seed
    );
    for (file, title) in [
        ("train/summary.csv", "accuracy"),
        ("depth/summary.csv", "median CNOT counts"),
        ("noise/noise.csv", "uniform pixel noise"),
        ("attack/transfer.csv", "transfer attacks"),
        ("depol/depol.csv", "depolarizing noise"),
    ] {
        let path = out.join(file);
        if let Ok(text) = std::fs::read_to_string(&path) {
            digest.push_str(&format!("\n[{title}] {file}\n"));
            digest.push_str(&text);
        }
    }
    Ok(digest)
}
