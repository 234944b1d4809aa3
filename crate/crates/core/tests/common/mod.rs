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

//! Instance generators shared by the integration tests.

#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;

use fragshadow::cutter::Fragment;
use fragshadow::experiment::random_pauli_observable;
use fragshadow::shadows::Provenance;
use fragshadow::{cut_circuit, Axis, Circuit, CutSpec, Gate, Observable, SeedStream, ShadowEnsemble};

/// Random circuit of 1- to 3-qubit Haar gates with at most `max_cuts` valid cuts
/// and a random Pauli observable (sometimes two terms).
pub fn random_instance(stream: SeedStream, max_qubits: usize, max_cuts: usize) -> (Circuit, Vec<CutSpec>, Observable) {
    let mut rng = stream.rng();
    let n = rng.random_range(2..=max_qubits);
    let n_gates = rng.random_range(n..=n + n / 2 + 2);
    let mut circuit = Circuit::new(n);
    for g in 0..n_gates {
        let k = match rng.random_range(0..20) {
            0..=7 => 1,
            8..=16 => 2,
            _ => 3,
        }
        .min(n);
        let qubits = sample(&mut rng, n, k).into_vec();
        circuit.push(Gate::haar(&qubits, stream.derive(&[1, g as u64]).seed()).unwrap()).unwrap();
    }
    let mut candidates = Vec::new();
    for w in 0..n {
        let on_wire: Vec<usize> = (0..n_gates).filter(|&g| circuit.gates()[g].qubits().contains(&w)).collect();
        for pair in on_wire.windows(2) {
            candidates.push(CutSpec::new(w, pair[0]));
        }
    }
    // greedy: keep each candidate that still leaves a valid cut set
    let target = rng.random_range(1..=max_cuts.max(1)).min(max_cuts);
    let order = sample(&mut rng, candidates.len(), candidates.len()).into_vec();
    let mut cuts: Vec<CutSpec> = Vec::new();
    for i in order {
        if cuts.len() == target {
            break;
        }
        cuts.push(candidates[i]);
        if cut_circuit(&circuit, &cuts).is_err() {
            cuts.pop();
        }
    }
    let size = rng.random_range(1..=n);
    let mut terms = vec![random_pauli_observable(n, size, stream.child(2)).unwrap()];
    if rng.random_bool(0.3) {
        let second = random_pauli_observable(n, rng.random_range(1..=n), stream.child(3)).unwrap();
        terms.push(second.with_coeff(rng.random_range(-1.0..1.0)));
    }
    (circuit, cuts, Observable::new(terms))
}

/// H, CNOT(0,1), CNOT(1,2) with wire 1 cut between the two CNOTs.
pub fn ghz3_cut() -> (Circuit, Vec<CutSpec>) {
    let c = Circuit::new(3)
        .with(Gate::named("h", &[0]).unwrap())
        .unwrap()
        .with(Gate::named("cnot", &[0, 1]).unwrap())
        .unwrap()
        .with(Gate::named("cnot", &[1, 2]).unwrap())
        .unwrap();
    (c, vec![CutSpec::new(1, 1)])
}

pub fn axes(s: &str) -> Vec<Axis> {
    s.chars().map(|c| Axis::from_char(c).unwrap()).collect()
}

/// The five-shot, three-qubit ensemble of the worked matched-average example.
pub fn worked_example_ensemble() -> ShadowEnsemble {
    let mut e = ShadowEnsemble::new(3, Provenance { circuit_hash: String::new(), fragment: None, seed: 0 }).unwrap();
    for (b, m) in
        [("XYX", [1, 1, -1]), ("ZYY", [-1, -1, 1]), ("XZY", [-1, 1, -1]), ("XYZ", [-1, 1, 1]), ("XXX", [1, -1, 1])]
    {
        e.push(&axes(b), &m).unwrap();
    }
    e
}

/// Single-wire identity channel: one quantum input, one quantum output.
pub fn identity_fragment() -> Fragment {
    Fragment::from_channel(0, &Circuit::new(1), &[0], &[0], &[]).unwrap()
}
