// Copyright 2026 The fragshadow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

mod common;

use std::collections::BTreeMap;

use fragshadow::bounds::{lemma2_monte_carlo, lemma2_sum_monte_carlo};
use fragshadow::experiment::{median_errors, run_experiment, unobserved_stats, ExperimentConfig};
use fragshadow::shadows::{collect_choi_shadow, estimate, sample_shadow, unobserved_probability, Provenance};
use fragshadow::sim::exact_expectation;
use fragshadow::{
    cut_circuit, partition_for_observable, recombine_estimate, reduce, Axis, Observable, PauliString, SeedStream,
    Statevector,
};

use common::ghz3_cut;

fn provenance() -> Provenance {
    Provenance { circuit_hash: String::new(), fragment: None, seed: 0 }
}

fn ghz_errors(shots: usize, runs: u64, seed: u64) -> Vec<f64> {
    let (circuit, cuts) = ghz3_cut();
    let graph = cut_circuit(&circuit, &cuts).unwrap();
    let obs: Observable = "X1 X2 X3".parse().unwrap();
    let reduced = reduce(&graph, &partition_for_observable(&graph, &obs.support_qubits()).unwrap());
    (0..runs)
        .map(|run| {
            let ensembles = reduced
                .fragments
                .iter()
                .map(|f| {
                    let s = SeedStream::new(seed).derive(&[run, f.id as u64]);
                    (f.id, collect_choi_shadow(f, shots, s).unwrap().0)
                })
                .collect::<BTreeMap<_, _>>();
            (recombine_estimate(&reduced, &ensembles, &obs).unwrap().estimate - 1.0).abs()
        })
        .collect()
}

#[test]
fn ghz_cut_estimate_is_consistent() {
    let errors = ghz_errors(100_000, 100, 41);
    let good = errors.iter().filter(|&&e| e <= 0.1).count();
    assert!(good >= 95, "{good}/100");
}

#[test]
fn recombined_error_shrinks_with_shots() {
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let few = mean(ghz_errors(1_000, 30, 5));
    let many = mean(ghz_errors(100_000, 30, 5));
    assert!(many < few / 3.0, "{few} -> {many}");
}

#[test]
fn matched_average_is_unbiased_on_low_weight_paulis() {
    let state = Statevector::random(3, SeedStream::new(77)).unwrap();
    let mut paulis = Vec::new();
    for q in 0..3 {
        for a in Axis::ALL {
            paulis.push(PauliString::single(q, a));
        }
    }
    for q in 0..3 {
        for r in q + 1..3 {
            for a in Axis::ALL {
                for b in Axis::ALL {
                    paulis.push(PauliString::new([(q, a), (r, b)], 1.0).unwrap());
                }
            }
        }
    }
    assert_eq!(paulis.len(), 36);
    let (mut inside, mut total) = (0, 0);
    for rep in 0..100 {
        let ens = sample_shadow(&state, 10_000, SeedStream::new(rep), provenance()).unwrap();
        for p in &paulis {
            let e = estimate(&ens, p).unwrap();
            let exact = exact_expectation(&state, p).unwrap();
            total += 1;
            inside += usize::from((e.value - exact).abs() <= 5.0 / (e.n_matched as f64).sqrt());
        }
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside}/{total}");
}

#[test]
fn unobserved_rate_matches_analytic_at_a_thousand_shots() {
    let state = Statevector::random(9, SeedStream::new(3)).unwrap();
    let root = SeedStream::new(1000);
    let mut unobserved = 0;
    for t in 0..200 {
        let p = fragshadow::experiment::random_pauli_observable(9, 9, root.derive(&[t, 0])).unwrap();
        let ens = sample_shadow(&state, 1_000, root.derive(&[t, 1]), provenance()).unwrap();
        unobserved += usize::from(estimate(&ens, &p).unwrap().n_matched == 0);
    }
    let empirical = unobserved as f64 / 200.0;
    let analytic = unobserved_probability(9, 1_000);
    assert!((empirical - analytic).abs() <= 0.05, "{empirical} vs {analytic}");
}

#[test]
fn small_observables_are_always_observed() {
    let config = ExperimentConfig {
        fragment_counts: vec![1],
        obs_sizes: vec![1],
        shot_grid: vec![1_000],
        trials: 20,
        ..ExperimentConfig::default()
    };
    let stats = unobserved_stats(&run_experiment(&config).unwrap());
    assert_eq!(stats.len(), 1);
    assert_eq!(stats[0].empirical, 0.0);
    assert!(stats[0].analytic < 1e-170);
}

#[test]
fn error_sum_std_scales_with_root_n() {
    for n in [1usize, 4, 9] {
        let s = lemma2_sum_monte_carlo(n, 0.01, 100_000, SeedStream::new(n as u64));
        let want = (n as f64).sqrt() * 0.01;
        assert!((s - want).abs() / want <= 0.05, "n={n}: {s}");
        let p = lemma2_monte_carlo(n, 0.01, 100_000, SeedStream::new(100 + n as u64));
        assert!((p - want).abs() / want <= 0.1, "n={n}: {p}");
    }
}

#[test]
fn median_error_falls_with_shots_for_most_seeds() {
    let (mut monotone, mut groups) = (0, 0);
    for seed in 0..10 {
        let config = ExperimentConfig {
            clusters: 2,
            cluster_size: 2,
            fragment_counts: vec![1, 2],
            obs_sizes: vec![1, 4],
            shot_grid: vec![100, 1_000, 10_000],
            trials: 30,
            penalty_mode: false,
            base_seed: seed,
        };
        let med = median_errors(&run_experiment(&config).unwrap());
        for f in [1, 2] {
            for s in [1, 4] {
                let curve: Vec<f64> = [100, 1_000, 10_000].iter().map(|&n| med[&(f, n, s)]).collect();
                groups += 1;
                monotone += usize::from(curve.windows(2).all(|w| w[1] <= w[0]));
            }
        }
    }
    assert!(monotone as f64 >= 0.9 * groups as f64, "{monotone}/{groups}");
}
