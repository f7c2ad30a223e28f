//! Genetic gate synthesis.
//!
//! A genome is a fixed-length list of genes, each naming one native gate
//! (single-qubit gates on any wire, CNOTs on nearest-neighbor edges in
//! either direction). Fitness is the squared overlap between the state
//! the genome prepares from |0...0> and the target. Evolution combines
//! roulette-wheel parent selection, midpoint crossover, per-gene
//! mutation, elitism, and a gradient polish (Adam on the rotation angles
//! of the incumbent) each generation. An outer binary search then finds
//! the smallest genome length that still reaches the target fidelity, so
//! looser targets buy shorter circuits.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

use crate::error::{MethodError, MethodResult};
use qprep_core::adam::Adam;
use qprep_core::gradient::{circuit_gradient, InfidelityLoss};
use qprep_core::report::PrepReport;
use qprep_core::rng::substream;
use qprep_core::synthesis::transpile_to_basis;
use qprep_core::{fidelity, Circuit, Gate, Statevector};

/// One gate slot in a genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gene {
    X {
        qubit: usize,
    },
    Sx {
        qubit: usize,
    },
    Rx {
        qubit: usize,
        angle: f64,
    },
    Ry {
        qubit: usize,
        angle: f64,
    },
    Rz {
        qubit: usize,
        angle: f64,
    },
    /// Nearest-neighbor CNOT. Edges `0..n-1` point down the chain
    /// (control `e`, target `e+1`); edges `n-1..2(n-1)` point back up.
    Cnot {
        edge: usize,
    },
}

impl Gene {
    /// Draws a uniformly random gene for an `n_qubits`-wide chain:
    /// uniform over the gate set, uniform angles in [0, 2π), uniform
    /// placement over valid wires/edges.
    pub fn random(n_qubits: usize, rng: &mut impl Rng) -> Self {
        let kinds = if n_qubits > 1 { 6 } else { 5 };
        match rng.gen_range(0..kinds) {
            0 => Gene::X {
                qubit: rng.gen_range(0..n_qubits),
            },
            1 => Gene::Sx {
                qubit: rng.gen_range(0..n_qubits),
            },
            2 => Gene::Rx {
                qubit: rng.gen_range(0..n_qubits),
                angle: rng.gen_range(0.0..2.0 * PI),
            },
            3 => Gene::Ry {
                qubit: rng.gen_range(0..n_qubits),
                angle: rng.gen_range(0.0..2.0 * PI),
            },
            4 => Gene::Rz {
                qubit: rng.gen_range(0..n_qubits),
                angle: rng.gen_range(0.0..2.0 * PI),
            },
            _ => Gene::Cnot {
                edge: rng.gen_range(0..2 * (n_qubits - 1)),
            },
        }
    }

    fn to_gate(self, n_qubits: usize) -> MethodResult<Gate> {
        Ok(match self {
            Gene::X { qubit } => Gate::X { qubit },
            Gene::Sx { qubit } => Gate::Sx { qubit },
            Gene::Rx { qubit, angle } => Gate::Rx {
                qubit,
                theta: angle,
            },
            Gene::Ry { qubit, angle } => Gate::Ry {
                qubit,
                theta: angle,
            },
            Gene::Rz { qubit, angle } => Gate::Rz {
                qubit,
                theta: angle,
            },
            Gene::Cnot { edge } => {
                let n_edges = 2 * n_qubits.saturating_sub(1);
                if edge >= n_edges {
                    return Err(MethodError::BadConfig(format!(
                        "edge {edge} out of range for {n_qubits} qubits"
                    )));
                }
                if edge < n_qubits - 1 {
                    Gate::Cnot {
                        control: edge,
                        target: edge + 1,
                    }
                } else {
                    let k = edge - (n_qubits - 1);
                    Gate::Cnot {
                        control: k + 1,
                        target: k,
                    }
                }
            }
        })
    }
}

/// Materializes a genome as a circuit.
pub fn genome_to_circuit(n_qubits: usize, genome: &[Gene]) -> MethodResult<Circuit> {
    let mut circuit = Circuit::new(n_qubits);
    for gene in genome {
        circuit.push(gene.to_gate(n_qubits)?)?;
    }
    Ok(circuit)
}

fn random_genome(n_qubits: usize, length: usize, rng: &mut impl Rng) -> Vec<Gene> {
    (0..length).map(|_| Gene::random(n_qubits, rng)).collect()
}

/// Squared overlap between the genome's output on |0...0> and `target`.
pub fn genome_fitness(n_qubits: usize, genome: &[Gene], target: &Statevector) -> MethodResult<f64> {
    let circuit = genome_to_circuit(n_qubits, genome)?;
    Ok(fidelity(&circuit.simulate()?, target)?)
}

/// Midpoint crossover: the child takes the first half (rounded up) from
/// `a` and the remainder from `b`.
pub fn crossover(a: &[Gene], b: &[Gene]) -> Vec<Gene> {
    assert_eq!(a.len(), b.len(), "genome lengths must match");
    let cut = (a.len() + 1) / 2;
    a[..cut].iter().chain(b[cut..].iter()).copied().collect()
}

/// Replaces each gene independently with probability `rate`.
pub fn mutate(genome: &mut [Gene], n_qubits: usize, rate: f64, rng: &mut impl Rng) {
    for gene in genome {
        if rng.gen::<f64>() < rate {
            *gene = Gene::random(n_qubits, rng);
        }
    }
}

/// Fitness-proportional parent selection. Falls back to a uniform draw
/// when total fitness is effectively zero.
pub fn roulette_select(fitnesses: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = fitnesses.iter().sum();
    if !(total > 1e-12) {
        return rng.gen_range(0..fitnesses.len());
    }
    let draw = rng.gen_range(0.0..total);
    let mut acc = 0.0;
    for (i, f) in fitnesses.iter().enumerate() {
        acc += f;
        if draw < acc {
            return i;
        }
    }
    fitnesses.len() - 1
}

/// Polishes a genome's rotation angles with Adam on the infidelity,
/// holding the gate structure fixed. Fitness is non-decreasing: if the
/// optimizer ends up somewhere worse, the input genome is returned
/// unchanged with its own fitness.
pub fn optimize_parameters(
    n_qubits: usize,
    genome: &[Gene],
    target: &Statevector,
    steps: usize,
    learning_rate: f64,
) -> MethodResult<(Vec<Gene>, f64)> {
    let circuit = genome_to_circuit(n_qubits, genome)?;
    let before = fidelity(&circuit.simulate()?, target)?;
    let mut params = circuit.parameters();
    if params.is_empty() || steps == 0 {
        return Ok((genome.to_vec(), before));
    }
    let zero = Statevector::zero(n_qubits);
    let loss = InfidelityLoss {
        target: target.clone(),
    };
    let mut adam = Adam::new(params.len(), learning_rate);
    for _ in 0..steps {
        let (_, grads) = circuit_gradient(&circuit, &params, &zero, &loss)?;
        adam.step(&mut params, &grads);
    }
    let bound = circuit.bind_parameters(&params)?;
    let after = fidelity(&bound.simulate()?, target)?;
    if after <= before {
        return Ok((genome.to_vec(), before));
    }
    let mut updated = genome.to_vec();
    let mut angles = params.into_iter();
    for gene in &mut updated {
        match gene {
            Gene::Rx { angle, .. } | Gene::Ry { angle, .. } | Gene::Rz { angle, .. } => {
                *angle = angles.next().expect("angle count matches parameters");
            }
            _ => {}
        }
    }
    Ok((updated, after))
}

/// Knobs for [`gasp_prepare`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaspConfig {
    pub target_fidelity: f64,
    pub population: usize,
    pub mutation_rate: f64,
    /// Number of incumbents copied unchanged into the next generation.
    pub elite_count: usize,
    /// Abort a probe after this many generations without improvement.
    pub max_stale: usize,
    /// Hard cap on generations per probe.
    pub max_generations: usize,
    /// Adam steps applied to each generation's best genome.
    pub opt_steps: usize,
    pub opt_learning_rate: f64,
    /// Genome length of the first probe; the search caps out at four
    /// times this.
    pub initial_genes: usize,
    pub seed: u64,
}

impl Default for GaspConfig {
    fn default() -> Self {
        Self {
            target_fidelity: 0.9,
            population: 50,
            mutation_rate: 0.05,
            elite_count: 1,
            max_stale: 200,
            max_generations: 1000,
            opt_steps: 30,
            opt_learning_rate: 0.1,
            initial_genes: 64,
            seed: 1,
        }
    }
}

struct ProbeOutcome {
    genome: Vec<Gene>,
    fitness: f64,
    generations: usize,
    success: bool,
}

/// Evolves a population of fixed-length genomes until the target
/// fidelity is reached or progress stalls.
fn probe(
    target: &Statevector,
    length: usize,
    config: &GaspConfig,
    rng: &mut ChaCha8Rng,
) -> MethodResult<ProbeOutcome> {
    let n = target.n_qubits();
    let mut population: Vec<Vec<Gene>> = (0..config.population)
        .map(|_| random_genome(n, length, rng))
        .collect();
    let mut best_genome = population[0].clone();
    let mut best_fitness = -1.0f64;
    let mut stale = 0usize;
    let mut generations = 0usize;

    while generations < config.max_generations {
        generations += 1;
        let fitnesses: Vec<f64> = population
            .par_iter()
            .map(|g| genome_fitness(n, g, target))
            .collect::<MethodResult<_>>()?;
        let gen_best = fitnesses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite fitness"))
            .map(|(i, _)| i)
            .expect("non-empty population");

        let (cand_genome, cand_fit) = optimize_parameters(
            n,
            &population[gen_best],
            target,
            config.opt_steps,
            config.opt_learning_rate,
        )?;
        if cand_fit > best_fitness + 1e-12 {
            best_genome = cand_genome;
            best_fitness = cand_fit;
            stale = 0;
        } else {
            stale += 1;
        }
        if best_fitness >= config.target_fidelity {
            return Ok(ProbeOutcome {
                genome: best_genome,
                fitness: best_fitness,
                generations,
                success: true,
            });
        }
        if stale >= config.max_stale {
            break;
        }

        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&i, &j| {
            fitnesses[j]
                .partial_cmp(&fitnesses[i])
                .expect("finite fitness")
        });
        let mut next = Vec::with_capacity(config.population);
        next.push(best_genome.clone());
        for &idx in ranked.iter().take(config.elite_count.saturating_sub(1)) {
            if next.len() >= config.population {
                break;
            }
            next.push(population[idx].clone());
        }
        while next.len() < config.population {
            let pa = roulette_select(&fitnesses, rng);
            let pb = roulette_select(&fitnesses, rng);
            let mut child = crossover(&population[pa], &population[pb]);
            mutate(&mut child, n, config.mutation_rate, rng);
            next.push(child);
        }
        population = next;
    }

    Ok(ProbeOutcome {
        genome: best_genome,
        fitness: best_fitness,
        generations,
        success: false,
    })
}

/// Synthesizes a preparation circuit by genetic search, then verifies the
/// achieved fidelity densely. The genome length is minimized by binary
/// search: the first probe runs at `initial_genes`; on failure the length
/// doubles (up to `4 * initial_genes`), on success the search narrows to
/// the smallest length that still reaches the target.
pub fn gasp_prepare(
    target: &Statevector,
    config: &GaspConfig,
) -> MethodResult<(Circuit, PrepReport)> {
    if !(config.target_fidelity > 0.0 && config.target_fidelity <= 1.0) {
        return Err(MethodError::BadTargetFidelity(config.target_fidelity));
    }
    if config.population == 0 || config.initial_genes == 0 {
        return Err(MethodError::BadConfig(
            "population and initial_genes must be positive".into(),
        ));
    }
    let started = Instant::now();
    let n = target.n_qubits();
    let mut probe_index = 0u64;
    let mut total_generations = 0usize;
    let run = |length: usize, probe_index: &mut u64, total: &mut usize| {
        let mut rng = substream(config.seed, "gasp-probe", *probe_index);
        *probe_index += 1;
        let outcome = probe(target, length, config, &mut rng)?;
        *total += outcome.generations;
        MethodResult::Ok(outcome)
    };

    // Highest-fitness genome seen anywhere, the fallback when no probe
    // reaches the target.
    let mut fallback: Option<(Vec<Gene>, f64)> = None;
    let note = |outcome: &ProbeOutcome, fallback: &mut Option<(Vec<Gene>, f64)>| {
        if fallback.as_ref().map_or(true, |f| outcome.fitness > f.1) {
            *fallback = Some((outcome.genome.clone(), outcome.fitness));
        }
    };

    let initial = config.initial_genes;
    let cap = initial * 4;
    let first = run(initial, &mut probe_index, &mut total_generations)?;
    note(&first, &mut fallback);

    let mut bracket: Option<(usize, usize, Vec<Gene>)> = None; // (lo, hi, genome@hi)
    if first.success {
        bracket = Some((1, initial, first.genome));
    } else {
        let mut last_fail = initial;
        let mut length = initial * 2;
        while length <= cap {
            let out = run(length, &mut probe_index, &mut total_generations)?;
            note(&out, &mut fallback);
            if out.success {
                bracket = Some((last_fail + 1, length, out.genome));
                break;
            }
            last_fail = length;
            length *= 2;
        }
    }

    let chosen = match bracket {
        Some((mut lo, mut hi, mut genome)) => {
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                let out = run(mid, &mut probe_index, &mut total_generations)?;
                note(&out, &mut fallback);
                if out.success {
                    hi = mid;
                    genome = out.genome;
                } else {
                    lo = mid + 1;
                }
            }
            genome
        }
        None => fallback.expect("at least one probe ran").0,
    };

    let circuit = genome_to_circuit(n, &chosen)?;
    let lowered = transpile_to_basis(&circuit)?;
    let prepared = lowered.simulate()?;
    let achieved = fidelity(&prepared, target)?;
    let report = PrepReport {
        method: "gasp".into(),
        n_qubits: n,
        target_fidelity: config.target_fidelity,
        achieved_fidelity: achieved,
        met_target: achieved >= config.target_fidelity,
        cnot_count: lowered.raw_cnot_count(),
        total_gates: lowered.gate_count(),
        depth: lowered.depth(),
        iterations: total_generations,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((lowered, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand_chacha::rand_core::SeedableRng;

    fn bell_state() -> Statevector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Statevector::from_amplitudes(vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
        ])
        .unwrap()
    }

    fn small_config(seed: u64) -> GaspConfig {
        GaspConfig {
            target_fidelity: 0.98,
            population: 30,
            max_stale: 40,
            max_generations: 80,
            opt_steps: 40,
            initial_genes: 12,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn edge_indexing_covers_both_directions() {
        assert_eq!(
            Gene::Cnot { edge: 0 }.to_gate(3).unwrap(),
            Gate::Cnot {
                control: 0,
                target: 1
            }
        );
        assert_eq!(
            Gene::Cnot { edge: 1 }.to_gate(3).unwrap(),
            Gate::Cnot {
                control: 1,
                target: 2
            }
        );
        assert_eq!(
            Gene::Cnot { edge: 2 }.to_gate(3).unwrap(),
            Gate::Cnot {
                control: 1,
                target: 0
            }
        );
        assert_eq!(
            Gene::Cnot { edge: 3 }.to_gate(3).unwrap(),
            Gate::Cnot {
                control: 2,
                target: 1
            }
        );
        assert!(Gene::Cnot { edge: 4 }.to_gate(3).is_err());
    }

    #[test]
    fn random_genes_stay_on_the_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let gene = Gene::random(4, &mut rng);
            assert!(gene.to_gate(4).is_ok());
        }
        // Single-qubit chains never draw CNOTs.
        for _ in 0..200 {
            let gene = Gene::random(1, &mut rng);
            assert!(!matches!(gene, Gene::Cnot { .. }));
        }
    }

    #[test]
    fn crossover_takes_left_half_rounded_up() {
        let a = vec![Gene::X { qubit: 0 }; 5];
        let b = vec![Gene::Sx { qubit: 1 }; 5];
        let child = crossover(&a, &b);
        assert_eq!(child.len(), 5);
        assert!(child[..3].iter().all(|g| *g == Gene::X { qubit: 0 }));
        assert!(child[3..].iter().all(|g| *g == Gene::Sx { qubit: 1 }));
    }

    #[test]
    fn mutation_rate_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let original = vec![
            Gene::Rz {
                qubit: 0,
                angle: 1.0
            };
            20
        ];

        let mut untouched = original.clone();
        mutate(&mut untouched, 3, 0.0, &mut rng);
        assert_eq!(untouched, original);

        let mut scrambled = original.clone();
        mutate(&mut scrambled, 3, 1.0, &mut rng);
        // With 20 fresh draws over a rich gene space, at least one slot
        // must differ.
        assert_ne!(scrambled, original);
    }

    #[test]
    fn mutation_hits_the_configured_rate() {
        // A genome of pure rotations: any resample lands on the original
        // gene with probability zero (continuous angle), so the changed
        // fraction estimates the resample rate directly.
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let original: Vec<Gene> = (0..10_000)
            .map(|i| Gene::Rz {
                qubit: i % 3,
                angle: 2.5,
            })
            .collect();
        let mut mutated = original.clone();
        mutate(&mut mutated, 3, 0.05, &mut rng);
        let changed = mutated
            .iter()
            .zip(&original)
            .filter(|(a, b)| a != b)
            .count() as f64;
        let n = original.len() as f64;
        let sigma = (n * 0.05 * 0.95).sqrt();
        assert!(
            (changed - 0.05 * n).abs() <= 3.0 * sigma,
            "changed {changed} of {n}"
        );
    }

    #[test]
    fn roulette_matches_fitness_proportions() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let fitnesses = [0.75, 0.25];
        let draws = 10_000;
        let firsts = (0..draws)
            .filter(|_| roulette_select(&fitnesses, &mut rng) == 0)
            .count() as f64;
        let sigma = (draws as f64 * 0.75 * 0.25).sqrt();
        assert!(
            (firsts - 0.75 * draws as f64).abs() <= 3.0 * sigma,
            "first index drawn {firsts} times"
        );

        // Certain selection when one fitness is all the mass.
        let certain = [1.0, 0.0];
        assert!((0..100).all(|_| roulette_select(&certain, &mut rng) == 0));
    }

    #[test]
    fn polish_never_decreases_fitness() {
        // A diverging learning rate must not be able to hand back a worse
        // genome than it was given.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let target = Statevector::random(2, &mut rng);
        for _ in 0..10 {
            let genome = random_genome(2, 8, &mut rng);
            let before = genome_fitness(2, &genome, &target).unwrap();
            let (_, after) = optimize_parameters(2, &genome, &target, 5, 50.0).unwrap();
            assert!(after >= before, "polish went {before} -> {after}");
        }
    }

    #[test]
    fn roulette_prefers_heavy_weights_and_survives_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fitnesses = [0.01, 0.01, 0.95, 0.01];
        let mut hits = [0usize; 4];
        for _ in 0..2000 {
            hits[roulette_select(&fitnesses, &mut rng)] += 1;
        }
        assert!(hits[2] > 1500, "heavy index drawn {} times", hits[2]);

        let zeros = [0.0, 0.0, 0.0];
        let mut seen = [false; 3];
        for _ in 0..200 {
            seen[roulette_select(&zeros, &mut rng)] = true;
        }
        assert!(seen.iter().all(|&s| s), "uniform fallback covers all");
    }

    #[test]
    fn gradient_polish_improves_a_fixed_skeleton() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let target = Statevector::random(2, &mut rng);
        // Expressive enough skeleton for an arbitrary two-qubit state.
        let genome = vec![
            Gene::Ry {
                qubit: 0,
                angle: 0.3,
            },
            Gene::Rz {
                qubit: 0,
                angle: 0.1,
            },
            Gene::Ry {
                qubit: 1,
                angle: -0.2,
            },
            Gene::Rz {
                qubit: 1,
                angle: 0.2,
            },
            Gene::Cnot { edge: 0 },
            Gene::Ry {
                qubit: 0,
                angle: 0.1,
            },
            Gene::Rz {
                qubit: 0,
                angle: -0.1,
            },
            Gene::Ry {
                qubit: 1,
                angle: 0.4,
            },
            Gene::Rz {
                qubit: 1,
                angle: 0.3,
            },
            Gene::Cnot { edge: 1 },
            Gene::Ry {
                qubit: 0,
                angle: 0.2,
            },
            Gene::Rz {
                qubit: 0,
                angle: 0.1,
            },
            Gene::Ry {
                qubit: 1,
                angle: -0.3,
            },
            Gene::Rz {
                qubit: 1,
                angle: 0.1,
            },
        ];
        let before = genome_fitness(2, &genome, &target).unwrap();
        let (updated, after) = optimize_parameters(2, &genome, &target, 200, 0.1).unwrap();
        assert!(after > before, "polish went {before} -> {after}");
        assert!(after > 0.9, "polish only reached {after}");
        // Structure is preserved: same gate kinds in the same slots.
        assert_eq!(updated.len(), genome.len());
        assert!(matches!(updated[4], Gene::Cnot { edge: 0 }));
    }

    #[test]
    fn prepares_bell_state_with_few_cnots() {
        let target = bell_state();
        let (circuit, report) = gasp_prepare(&target, &small_config(21)).unwrap();
        assert!(report.met_target, "achieved {}", report.achieved_fidelity);
        assert!(report.achieved_fidelity >= 0.98);
        assert!(
            report.cnot_count <= 3,
            "bell state took {} CNOTs",
            report.cnot_count
        );
        let f = fidelity(&circuit.simulate().unwrap(), &target).unwrap();
        assert!((f - report.achieved_fidelity).abs() < 1e-12);
    }

    #[test]
    fn prepares_random_two_qubit_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let target = Statevector::random(2, &mut rng);
        let (_, report) = gasp_prepare(&target, &small_config(29)).unwrap();
        assert!(report.met_target, "achieved {}", report.achieved_fidelity);
        assert!(report.iterations > 0);
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let target = Statevector::random(2, &mut rng);
        let config = small_config(37);
        let (c1, r1) = gasp_prepare(&target, &config).unwrap();
        let (c2, r2) = gasp_prepare(&target, &config).unwrap();
        assert_eq!(
            r1.achieved_fidelity.to_bits(),
            r2.achieved_fidelity.to_bits()
        );
        assert_eq!(r1.cnot_count, r2.cnot_count);
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(c1.to_json().unwrap(), c2.to_json().unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        let target = bell_state();
        let mut config = small_config(1);
        config.target_fidelity = 0.0;
        assert!(gasp_prepare(&target, &config).is_err());
        let mut config = small_config(1);
        config.population = 0;
        assert!(gasp_prepare(&target, &config).is_err());
    }

    #[test]
    fn hopeless_target_reports_honestly() {
        // One gene cannot reach a GHZ-entangled 3-qubit state at 0.999.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0] = Complex64::new(h, 0.0);
        amps[7] = Complex64::new(h, 0.0);
        let target = Statevector::from_amplitudes(amps).unwrap();
        let config = GaspConfig {
            target_fidelity: 0.999,
            population: 8,
            max_stale: 3,
            max_generations: 4,
            opt_steps: 2,
            initial_genes: 1,
            seed: 3,
            ..Default::default()
        };
        let (_, report) = gasp_prepare(&target, &config).unwrap();
        // Probes at lengths 1, 2, and 4 all fail; the report must say so.
        assert!(!report.met_target);
        assert!(report.achieved_fidelity < 0.999);
    }
}
