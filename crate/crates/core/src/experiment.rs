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

//! Experiment driver: clustered Haar ansatz, random Pauli observables, and
//! the fragmented-versus-unfragmented comparison grid.
//!
//! The shot budget of a grid point is the total over all sampled fragments,
//! split equally with any remainder going to the lowest fragment ids.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::cutter::{cut_circuit, partition_for_observable, reduce, CutSpec, ReducedGraph};
use crate::error::{Error, Result};
use crate::oracle::exact_observable;
use crate::pauli::{Axis, Observable, PauliString};
use crate::recombine::recombine_estimate;
use crate::rng::SeedStream;
use crate::shadows::{collect_choi_shadow, unobserved_probability, ShadowEnsemble};
use crate::sim::{MAX_HAAR_QUBITS, MAX_STATE_QUBITS};

/// Clustered circuit and the cut lists that split it into 1, 2, … fragments.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredAnsatz {
    pub circuit: Circuit,
    pub clusters: usize,
    pub cluster_size: usize,
    /// `cut_sets[k]` produces `k + 1` fragments.
    pub cut_sets: Vec<Vec<CutSpec>>,
}

impl ClusteredAnsatz {
    pub fn cuts_for(&self, n_fragments: usize) -> Result<&[CutSpec]> {
        n_fragments.checked_sub(1).and_then(|k| self.cut_sets.get(k)).map(Vec::as_slice).ok_or_else(|| {
            Error::InvalidArgument(format!("{n_fragments} fragments requested from a {}-cluster ansatz", self.clusters))
        })
    }
}

/// Haar block on every cluster, a 2-qubit Haar connector between neighbouring
/// clusters (last qubit of one, first qubit of the next), then a second Haar
/// block on every cluster.
///
/// Each connector is absorbed into the left cluster's fragment by cutting the
/// right cluster's first wire just before and just after it.
pub fn gen_clustered_ansatz(clusters: usize, cluster_size: usize, stream: SeedStream) -> Result<ClusteredAnsatz> {
    if clusters == 0 || cluster_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "ansatz needs at least one cluster of two qubits, got {clusters}×{cluster_size}"
        )));
    }
    if cluster_size > MAX_HAAR_QUBITS {
        return Err(Error::SizeLimit { what: "Haar-random gates", requested: cluster_size, limit: MAX_HAAR_QUBITS });
    }
    let width = clusters * cluster_size;
    if width > MAX_STATE_QUBITS {
        return Err(Error::SizeLimit { what: "statevectors", requested: width, limit: MAX_STATE_QUBITS });
    }
    let block = |c: usize| (c * cluster_size..(c + 1) * cluster_size).collect::<Vec<_>>();
    let mut circuit = Circuit::new(width);
    let mut gate_seed = 0u64;
    let mut next_seed = || {
        gate_seed += 1;
        stream.child(gate_seed).seed()
    };
    for c in 0..clusters {
        circuit.push(Gate::haar(&block(c), next_seed())?)?;
    }
    for c in 0..clusters - 1 {
        let pair = [(c + 1) * cluster_size - 1, (c + 1) * cluster_size];
        circuit.push(Gate::haar(&pair, next_seed())?)?;
    }
    for c in 0..clusters {
        circuit.push(Gate::haar(&block(c), next_seed())?)?;
    }
    let mut cut_sets = vec![Vec::new()];
    for c in 0..clusters - 1 {
        let wire = (c + 1) * cluster_size;
        let connector = clusters + c;
        let mut cuts = cut_sets[c].clone();
        cuts.push(CutSpec::new(wire, c + 1));
        cuts.push(CutSpec::new(wire, connector));
        cut_sets.push(cuts);
    }
    Ok(ClusteredAnsatz { circuit, clusters, cluster_size, cut_sets })
}

/// Uniformly random support of `size` qubits out of `width`, uniform axis on each.
pub fn random_pauli_observable(width: usize, size: usize, stream: SeedStream) -> Result<PauliString> {
    if size > width {
        return Err(Error::InvalidArgument(format!("observable of size {size} on {width} qubits")));
    }
    let mut rng = stream.rng();
    let qubits = sample(&mut rng, width, size).into_vec();
    let factors: Vec<(usize, Axis)> = qubits.into_iter().map(|q| (q, Axis::ALL[rng.random_range(0..3usize)])).collect();
    PauliString::new(factors, 1.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub clusters: usize,
    pub cluster_size: usize,
    pub fragment_counts: Vec<usize>,
    pub obs_sizes: Vec<usize>,
    /// Total shots per grid point, summed over fragments.
    pub shot_grid: Vec<usize>,
    pub trials: usize,
    pub penalty_mode: bool,
    pub base_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            clusters: 3,
            cluster_size: 3,
            fragment_counts: vec![1, 2, 3],
            obs_sizes: vec![1, 5, 9],
            shot_grid: vec![100, 1_000, 10_000],
            trials: 50,
            penalty_mode: false,
            base_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn width(&self) -> usize {
        self.clusters * self.cluster_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if let Some(&s) = self.obs_sizes.iter().find(|&&s| s > self.width()) {
            return Err(Error::InvalidArgument(format!("observable size {s} exceeds circuit width {}", self.width())));
        }
        if let Some(&f) = self.fragment_counts.iter().find(|&&f| f == 0 || f > self.clusters) {
            return Err(Error::InvalidArgument(format!("{f} fragments requested from {} clusters", self.clusters)));
        }
        Ok(())
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n_fragments: usize,
    pub shots: usize,
    pub obs_size: usize,
    pub estimate: f64,
    pub exact: f64,
    pub abs_error: f64,
    pub unobserved: bool,
    pub seed: u64,
}

/// Splits `total` shots over `n` fragments; the first `total % n` get one extra.
pub fn split_shots(total: usize, n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    (0..n).map(|i| total / n + usize::from(i < total % n)).collect()
}

/// Choi shadows of every fragment in κ ∪ Γ, sharing `total_shots` equally.
///
/// Each fragment samples from a stream keyed by its first wire segment rather
/// than its id, so adding unrelated wires or gates leaves its shots unchanged.
pub fn collect_fragment_shadows(
    reduced: &ReducedGraph,
    total_shots: usize,
    stream: SeedStream,
) -> Result<BTreeMap<usize, ShadowEnsemble>> {
    let budget = split_shots(total_shots, reduced.fragments.len());
    reduced
        .fragments
        .iter()
        .zip(budget)
        .map(|(f, n)| {
            let anchor = f.local_wires[0];
            let s = stream.derive(&[anchor.wire as u64, anchor.segment as u64]);
            Ok((f.id, collect_choi_shadow(f, n, s)?.0))
        })
        .collect()
}

fn trial_stream(config: &ExperimentConfig, trial: usize) -> SeedStream {
    SeedStream::new(config.base_seed).child(trial as u64)
}

/// All grid rows for one trial, ordered by (fragment count, shots, observable size).
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<Vec<TrialRecord>> {
    let stream = trial_stream(config, trial);
    let ansatz = gen_clustered_ansatz(config.clusters, config.cluster_size, stream.child(0))?;
    let observables = config
        .obs_sizes
        .iter()
        .map(|&s| {
            let p = random_pauli_observable(config.width(), s, stream.derive(&[1, s as u64]))?;
            let o = Observable::from(p);
            let exact = exact_observable(&ansatz.circuit, &o)?;
            Ok((s, o, exact))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for &nf in &config.fragment_counts {
        let graph = cut_circuit(&ansatz.circuit, ansatz.cuts_for(nf)?)?;
        for &shots in &config.shot_grid {
            for (size, obs, exact) in &observables {
                let partition = partition_for_observable(&graph, &obs.support_qubits())?;
                let reduced = reduce(&graph, &partition);
                let s = stream.derive(&[2, nf as u64, shots as u64, *size as u64]);
                let ensembles = collect_fragment_shadows(&reduced, shots, s)?;
                let report = recombine_estimate(&reduced, &ensembles, obs)?;
                let mut abs_error = (report.estimate - exact).abs();
                if config.penalty_mode && report.any_unobserved {
                    abs_error = 1.0;
                }
                rows.push(TrialRecord {
                    trial,
                    n_fragments: nf,
                    shots,
                    obs_size: *size,
                    estimate: report.estimate,
                    exact: *exact,
                    abs_error,
                    unobserved: report.any_unobserved,
                    seed: stream.seed(),
                });
            }
        }
    }
    Ok(rows)
}

/// Runs every trial (in parallel) and returns the rows of all trials preceding
/// the first failure, together with that failure if any.
pub fn run_experiment_partial(config: &ExperimentConfig) -> (Vec<TrialRecord>, Option<Error>) {
    if let Err(e) = config.validate() {
        return (Vec::new(), Some(e));
    }
    let results: Vec<Result<Vec<TrialRecord>>> =
        (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect();
    let mut rows = Vec::new();
    for r in results {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(e) => return (rows, Some(e)),
        }
    }
    (rows, None)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    match run_experiment_partial(config) {
        (rows, None) => Ok(rows),
        (_, Some(e)) => Err(e),
    }
}

pub fn write_csv<W: Write>(w: W, records: &[TrialRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<TrialRecord>> {
    csv::Reader::from_reader(r).deserialize().map(|row| row.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Settings recorded next to a results table.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentMetadata {
    pub config: ExperimentConfig,
    pub columns: &'static str,
    pub shot_budget: &'static str,
    pub estimator: &'static str,
    pub unobserved_definition: &'static str,
    pub penalty: &'static str,
}

impl ExperimentMetadata {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentMetadata {
            config: config.clone(),
            columns: "trial,n_fragments,shots,obs_size,estimate,exact,abs_error,unobserved,seed",
            shot_budget: "total across sampled fragments, equal split, remainder to lowest fragment id",
            estimator: "matched-average mean (no median-of-means)",
            unobserved_definition: "some fragment factor of the recombination had no matching shot",
            penalty: if config.penalty_mode { "abs_error set to 1 on unobserved rows" } else { "off" },
        }
    }
}

/// Empirical versus analytic probability that the observable pattern was never measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnobservedRow {
    pub shots: usize,
    pub obs_size: usize,
    pub trials: usize,
    pub empirical: f64,
    pub analytic: f64,
}

/// Groups single-fragment rows by (shots, obs_size).
pub fn unobserved_stats(records: &[TrialRecord]) -> Vec<UnobservedRow> {
    let mut groups: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.n_fragments == 1) {
        let e = groups.entry((r.shots, r.obs_size)).or_default();
        e.0 += 1;
        e.1 += usize::from(r.unobserved);
    }
    groups
        .into_iter()
        .map(|((shots, obs_size), (n, unobs))| UnobservedRow {
            shots,
            obs_size,
            trials: n,
            empirical: unobs as f64 / n as f64,
            analytic: if obs_size == 0 { 0.0 } else { unobserved_probability(obs_size, shots as u64) },
        })
        .collect()
}

/// Median of `abs_error` per (n_fragments, shots, obs_size).
pub fn median_errors(records: &[TrialRecord]) -> BTreeMap<(usize, usize, usize), f64> {
    let mut groups: BTreeMap<(usize, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.n_fragments, r.shots, r.obs_size)).or_default().push(r.abs_error);
    }
    groups
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            let m = v.len() / 2;
            let med = if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) };
            (k, med)
        })
        .collect()
}

/// Qubits each fragment contributes as circuit outputs; handy for reports.
pub fn fragment_outputs(ansatz: &ClusteredAnsatz, n_fragments: usize) -> Result<Vec<BTreeSet<usize>>> {
    let g = cut_circuit(&ansatz.circuit, ansatz.cuts_for(n_fragments)?)?;
    Ok(g.fragments.iter().map(|f| f.c_out.iter().map(|s| s.wire).collect()).collect())
}
