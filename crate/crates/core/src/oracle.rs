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

//! Brute-force ground truth for cutting: exact Choi states, spectral
//! decompositions of the cut basis, and the uncut-versus-recombined check.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::Circuit;
use crate::cutter::{cut_circuit, partition_for_observable, reduce, CutSpec, Fragment};
use crate::error::{Error, Result};
use crate::pauli::{BasisOp, Observable, PauliString};
use crate::recombine::recombine_exact;
use crate::shadows::choi_state;
use crate::sim::{DensityMatrix, Statevector, C64, MAX_DENSITY_QUBITS};

/// Eigenvalue with its normalised eigenvector and rank-1 projector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    pub vector: Statevector,
    pub projector: DensityMatrix,
}

/// `M = Σ λ_i |v_i⟩⟨v_i|` for a single-qubit basis operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenExpansion {
    pub pairs: Vec<EigenPair>,
}

impl EigenExpansion {
    pub fn reconstruct(&self) -> crate::sim::ComplexMatrix {
        self.pairs
            .iter()
            .map(|p| p.projector.matrix().scale(C64::new(p.eigenvalue, 0.0)))
            .reduce(|a, b| a.add(&b).expect("2x2"))
            .expect("two pairs")
    }
}

/// Spectral pairs of I, X, Y or Z. The identity expands to two +1 projectors.
pub fn eigen_expand(m: BasisOp) -> EigenExpansion {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    let vecs: [(f64, [C64; 2]); 2] = match m {
        BasisOp::I => [(1.0, [c(1., 0.), c(0., 0.)]), (1.0, [c(0., 0.), c(1., 0.)])],
        BasisOp::Z => [(1.0, [c(1., 0.), c(0., 0.)]), (-1.0, [c(0., 0.), c(1., 0.)])],
        BasisOp::X => [(1.0, [c(s, 0.), c(s, 0.)]), (-1.0, [c(s, 0.), c(-s, 0.)])],
        BasisOp::Y => [(1.0, [c(s, 0.), c(0., s)]), (-1.0, [c(s, 0.), c(0., -s)])],
    };
    EigenExpansion {
        pairs: vecs
            .iter()
            .map(|(l, v)| {
                let vector = Statevector::from_amplitudes(v.to_vec()).expect("2 amplitudes");
                let projector = DensityMatrix::from_pure(&vector).expect("1 qubit");
                EigenPair { eigenvalue: *l, vector, projector }
            })
            .collect(),
    }
}

/// Unit-trace Choi matrix of a fragment, register order `[ancillas | q_out | c_out]`.
pub fn exact_choi(fragment: &Fragment) -> Result<DensityMatrix> {
    if fragment.choi_width() > MAX_DENSITY_QUBITS {
        return Err(Error::SizeLimit {
            what: "density matrices",
            requested: fragment.choi_width(),
            limit: MAX_DENSITY_QUBITS,
        });
    }
    DensityMatrix::from_pure(&choi_state(fragment)?)
}

/// `tr((⊗_k M_kᵀ ⊗ N) Λ_f)` computed without ancillas: each quantum input is
/// prepared in the eigenstates of its `M_k`, the fragment runs on the product
/// state, `N` is measured on the local register, and the results are weighted
/// by the eigenvalues and 1/2 per input.
pub fn prepare_and_measure_trace(fragment: &Fragment, inputs: &[BasisOp], output: &PauliString) -> Result<f64> {
    if inputs.len() != fragment.q_in.len() {
        return Err(Error::Dimension(format!(
            "{} input operators for {} quantum inputs",
            inputs.len(),
            fragment.q_in.len()
        )));
    }
    let n = fragment.n_local();
    let expansions: Vec<EigenExpansion> = inputs.iter().map(|&m| eigen_expand(m)).collect();
    let zero = eigen_expand(BasisOp::Z).pairs[0].vector.clone();
    let mut total = 0.0;
    for choice in 0..1usize << inputs.len() {
        let mut weight = 1.0;
        let mut wire_state: Vec<&Statevector> = vec![&zero; n];
        for (k, exp) in expansions.iter().enumerate() {
            let pair = &exp.pairs[(choice >> k) & 1];
            weight *= pair.eigenvalue * 0.5;
            wire_state[fragment.q_in[k].local] = &pair.vector;
        }
        let mut amps = vec![C64::new(1.0, 0.0)];
        for v in wire_state {
            let a = v.amplitudes();
            amps = amps.iter().flat_map(|x| [x * a[0], x * a[1]]).collect();
        }
        let out = fragment.subcircuit.run_on(Statevector::from_amplitudes(amps)?)?;
        total += weight * out.expectation(output)?;
    }
    Ok(total)
}

/// Uncut value, recombined value and their absolute difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutIdentityCheck {
    pub uncut: f64,
    pub recombined: f64,
    pub delta: f64,
}

/// `tr(Oρ)` of the uncut circuit.
pub fn exact_observable(circuit: &Circuit, observable: &Observable) -> Result<f64> {
    let state = circuit.simulate()?;
    observable.terms().iter().map(|t| state.expectation(t)).sum()
}

/// Compares the uncut expectation with the cut-and-recombined value from exact Choi states.
pub fn exact_cut_identity_check(
    circuit: &Circuit,
    cuts: &[CutSpec],
    observable: &Observable,
) -> Result<CutIdentityCheck> {
    let uncut = exact_observable(circuit, observable)?;
    let graph = cut_circuit(circuit, cuts)?;
    let partition = partition_for_observable(&graph, &observable.support_qubits())?;
    let reduced = reduce(&graph, &partition);
    let choi = reduced
        .fragments
        .iter()
        .map(|f| Ok((f.id, choi_state(f)?)))
        .collect::<Result<BTreeMap<usize, Statevector>>>()?;
    let recombined = recombine_exact(&reduced, &choi, observable)?;
    Ok(CutIdentityCheck { uncut, recombined, delta: (uncut - recombined).abs() })
}
