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

//! Recombination of per-fragment Choi-state traces into `tr(Oρ)`.
//!
//! For every Pauli term `P` of the observable and every assignment `M` of a
//! basis operator from {I, X, Y, Z} to the free edges,
//!
//! ```text
//! tr(Oρ) = Σ_P α_P Σ_M Π_f tr((M_in(f)ᵀ ⊗ M_out(f) ⊗ P|c_out(f)) Λ_f)
//! ```
//!
//! where `Λ_f` is the unit-trace Choi state of fragment `f`. With unit-trace
//! Choi states the per-edge factor 1/2 of the identity-channel decomposition is
//! cancelled by the Choi normalisation, so no prefactor appears. Transposes at
//! quantum inputs only flip the sign of `Y` factors and are applied as a scalar.
//!
//! Evaluation is a direct sum, but each fragment's factor depends only on the
//! edges incident to it, so factors are tabulated per fragment first.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::cutter::{Fragment, ReducedGraph};
use crate::error::{Error, Result};
use crate::pauli::{BasisOp, Observable, PauliString};
use crate::shadows::{Pattern, ShadowEnsemble};
use crate::sim::{DensityMatrix, Statevector};

/// One basis operator per free edge, in free-edge order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MAssignment {
    pub ops: Vec<BasisOp>,
}

impl MAssignment {
    /// Assignment number `index` in lexicographic order (first edge most significant, I < X < Y < Z).
    pub fn from_index(index: usize, n_edges: usize) -> Self {
        MAssignment { ops: (0..n_edges).map(|e| BasisOp::ALL[(index >> (2 * (n_edges - 1 - e))) & 3]).collect() }
    }
}

/// All `4^n_edges` assignments in lexicographic order.
pub fn enumerate_assignments(n_edges: usize) -> impl Iterator<Item = MAssignment> {
    (0..1usize << (2 * n_edges)).map(move |i| MAssignment::from_index(i, n_edges))
}

/// Pauli string on one fragment's Choi register. The coefficient carries the transpose sign.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentObservablePlacement {
    pub fragment: usize,
    pub pauli: PauliString,
}

fn check_term(reduced: &ReducedGraph, term: &PauliString) -> Result<()> {
    for &q in term.support().keys() {
        let owner = reduced.fragments.iter().find(|f| f.c_out_slot(q).is_some()).map(|f| f.id);
        match owner {
            Some(id) if reduced.kappa.contains(&id) => {}
            _ => {
                return Err(Error::Partition(format!(
                    "observable qubit {} is not a circuit output of a κ fragment",
                    q + 1
                )))
            }
        }
    }
    Ok(())
}

/// Free-edge positions touching each of the fragment's q_in and q_out slots.
struct IncidentEdges {
    /// Distinct free-edge positions, in the order used to index the fragment's table.
    edges: Vec<usize>,
    q_in: Vec<usize>,
    /// `None` for outputs fixed to identity.
    q_out: Vec<Option<usize>>,
}

fn incident_edges(reduced: &ReducedGraph, f: &Fragment) -> Result<IncidentEdges> {
    let free = |edge: Option<usize>| edge.and_then(|e| reduced.free_position(e));
    let q_in = f
        .q_in
        .iter()
        .map(|s| {
            free(s.edge).ok_or_else(|| {
                Error::Partition(format!("quantum input on wire {} of fragment {} has no free edge", s.wire, f.id))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let q_out = f
        .q_out
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let pos = free(s.edge);
            let fixed = reduced.identity_outputs.iter().any(|a| a.fragment == f.id && a.q_out_slot == j);
            match (pos, fixed) {
                (Some(p), false) => Ok(Some(p)),
                (None, true) => Ok(None),
                _ => Err(Error::Partition(format!(
                    "quantum output {j} of fragment {} is neither free nor fixed to identity",
                    f.id
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut edges: Vec<usize> = q_in.iter().copied().chain(q_out.iter().flatten().copied()).collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(IncidentEdges { edges, q_in, q_out })
}

/// Builds the placement of `term` and free-edge operators `op_of(edge)` on fragment `f`.
fn placement(
    f: &Fragment,
    inc: &IncidentEdges,
    op_of: impl Fn(usize) -> BasisOp,
    term: &PauliString,
) -> FragmentObservablePlacement {
    let qi = f.q_in.len();
    let qo = f.q_out.len();
    let mut sign = 1.0;
    let mut factors = Vec::new();
    for (k, &e) in inc.q_in.iter().enumerate() {
        let op = op_of(e);
        sign *= op.transpose_sign();
        if let Some(a) = op.axis() {
            factors.push((k, a));
        }
    }
    for (j, e) in inc.q_out.iter().enumerate() {
        if let Some(a) = e.and_then(|e| op_of(e).axis()) {
            factors.push((qi + j, a));
        }
    }
    for (i, slot) in f.c_out.iter().enumerate() {
        if let Some(a) = term.axis_at(slot.wire) {
            factors.push((qi + qo + i, a));
        }
    }
    FragmentObservablePlacement { fragment: f.id, pauli: PauliString::new(factors, sign).expect("slots are distinct") }
}

/// Per-fragment operator placements for one Pauli term and one assignment.
pub fn place_operators(
    reduced: &ReducedGraph,
    m: &MAssignment,
    term: &PauliString,
) -> Result<Vec<FragmentObservablePlacement>> {
    if m.ops.len() != reduced.n_free_edges() {
        return Err(Error::Dimension(format!(
            "assignment of {} operators for {} free edges",
            m.ops.len(),
            reduced.n_free_edges()
        )));
    }
    check_term(reduced, term)?;
    reduced
        .fragments
        .iter()
        .map(|f| {
            let inc = incident_edges(reduced, f)?;
            Ok(placement(f, &inc, |e| m.ops[e], term))
        })
        .collect()
}

/// Diagnostics for one distinct (term, fragment, local placement).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementDiagnostic {
    pub term: usize,
    pub fragment: usize,
    /// Placement in 1-based text form over the Choi register.
    pub operator: String,
    pub value: f64,
    pub n_matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragmentDiagnostic {
    pub fragment: usize,
    pub register_size: usize,
    pub shots: usize,
    pub seed: u64,
    /// Distinct placements evaluated on this fragment.
    pub placements: usize,
    /// Distinct placements with no matching shot.
    pub unobserved_placements: usize,
    pub min_matched: usize,
}

/// Result of recombining shadow estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate: f64,
    /// Number of Pauli terms in the observable.
    pub terms: usize,
    /// Number of M-assignments summed per term (4^|E_¬Δ|).
    pub m_assignments: usize,
    /// Number of (term, assignment, fragment) factors estimated from zero matching shots.
    pub unobserved_count: usize,
    pub any_unobserved: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    pub per_fragment: Vec<FragmentDiagnostic>,
    pub placements: Vec<PlacementDiagnostic>,
    pub seed_manifest: BTreeMap<String, u64>,
}

struct Contraction {
    value: f64,
    unobserved_count: usize,
    /// (term, fragment, placement, value, n_matched) per distinct placement.
    evaluated: Vec<(usize, usize, PauliString, f64, usize)>,
}

/// Sums the recombination formula with per-fragment factors supplied by `factor`,
/// which returns `(tr(PΛ_f) estimate without coefficient, n_matched)`.
fn contract(
    reduced: &ReducedGraph,
    observable: &Observable,
    mut factor: impl FnMut(&Fragment, &PauliString) -> Result<(f64, usize)>,
) -> Result<Contraction> {
    let n_edges = reduced.n_free_edges();
    let n_assign = 1usize << (2 * n_edges);
    let incident = reduced.fragments.iter().map(|f| incident_edges(reduced, f)).collect::<Result<Vec<_>>>()?;
    let mut out = Contraction { value: 0.0, unobserved_count: 0, evaluated: Vec::new() };
    for (t, term) in observable.terms().iter().enumerate() {
        check_term(reduced, term)?;
        // tables[f][local] = (signed value, n_matched)
        let mut tables: Vec<Vec<(f64, usize)>> = Vec::with_capacity(reduced.fragments.len());
        for (f, inc) in reduced.fragments.iter().zip(&incident) {
            let k = inc.edges.len();
            let mut table = Vec::with_capacity(1 << (2 * k));
            for local in 0..1usize << (2 * k) {
                let op_of = |e: usize| {
                    let pos = inc.edges.iter().position(|&x| x == e).expect("incident edge");
                    BasisOp::ALL[(local >> (2 * (k - 1 - pos))) & 3]
                };
                let pl = placement(f, inc, op_of, term);
                let sign = pl.pauli.coeff();
                let unit = pl.pauli.clone().with_coeff(1.0);
                let (v, n) = factor(f, &unit)?;
                out.evaluated.push((t, f.id, pl.pauli, sign * v, n));
                table.push((sign * v, n));
            }
            tables.push(table);
        }
        let mut sum = 0.0;
        for idx in 0..n_assign {
            let mut prod = 1.0;
            for (table, inc) in tables.iter().zip(&incident) {
                let k = inc.edges.len();
                let local = inc.edges.iter().enumerate().fold(0usize, |acc, (pos, &e)| {
                    let digit = (idx >> (2 * (n_edges - 1 - e))) & 3;
                    acc | digit << (2 * (k - 1 - pos))
                });
                let (v, n) = table[local];
                if n == 0 {
                    out.unobserved_count += 1;
                }
                prod *= v;
            }
            sum += prod;
        }
        out.value += term.coeff() * sum;
    }
    Ok(out)
}

/// Recombines per-fragment shadows into an estimate of `tr(Oρ)`.
///
/// `ensembles` must hold a Choi-state ensemble for every fragment in κ ∪ Γ,
/// keyed by fragment id.
pub fn recombine_estimate(
    reduced: &ReducedGraph,
    ensembles: &BTreeMap<usize, ShadowEnsemble>,
    observable: &Observable,
) -> Result<EstimateReport> {
    for f in &reduced.fragments {
        let ens = ensembles.get(&f.id).ok_or(Error::MissingEnsemble(f.id))?;
        if ens.register_size() != f.choi_width() {
            return Err(Error::Dimension(format!(
                "ensemble for fragment {} has {} qubits, Choi register has {}",
                f.id,
                ens.register_size(),
                f.choi_width()
            )));
        }
    }
    let mut memo: HashMap<(usize, Pattern), (f64, usize)> = HashMap::new();
    let c = contract(reduced, observable, |f, p| {
        let ens = &ensembles[&f.id];
        let pat = Pattern::new(p, ens.register_size())?;
        Ok(*memo.entry((f.id, pat)).or_insert_with(|| {
            let e = ens.estimate_pattern(&pat);
            (e.value, e.n_matched)
        }))
    })?;

    let per_fragment = reduced
        .fragments
        .iter()
        .map(|f| {
            let ens = &ensembles[&f.id];
            let mine: Vec<_> = c.evaluated.iter().filter(|r| r.1 == f.id).collect();
            FragmentDiagnostic {
                fragment: f.id,
                register_size: ens.register_size(),
                shots: ens.len(),
                seed: ens.provenance().seed,
                placements: mine.len(),
                unobserved_placements: mine.iter().filter(|r| r.4 == 0).count(),
                min_matched: mine.iter().map(|r| r.4).min().unwrap_or(0),
            }
        })
        .collect();
    let seed_manifest =
        reduced.fragments.iter().map(|f| (format!("fragment_{}", f.id), ensembles[&f.id].provenance().seed)).collect();
    Ok(EstimateReport {
        estimate: c.value,
        terms: observable.terms().len(),
        m_assignments: 1 << (2 * reduced.n_free_edges()),
        unobserved_count: c.unobserved_count,
        any_unobserved: c.unobserved_count > 0,
        exact: None,
        per_fragment,
        placements: c
            .evaluated
            .into_iter()
            .map(|(term, fragment, p, value, n_matched)| PlacementDiagnostic {
                term,
                fragment,
                operator: p.to_string(),
                value,
                n_matched,
            })
            .collect(),
        seed_manifest,
    })
}

/// Exact `tr(PΛ)` for a Choi state given in some representation.
pub trait PauliTrace {
    fn width(&self) -> usize;
    fn pauli_trace(&self, p: &PauliString) -> Result<f64>;
}

impl PauliTrace for DensityMatrix {
    fn width(&self) -> usize {
        self.n_qubits()
    }
    fn pauli_trace(&self, p: &PauliString) -> Result<f64> {
        self.expectation(p)
    }
}

impl PauliTrace for Statevector {
    fn width(&self) -> usize {
        self.n_qubits()
    }
    fn pauli_trace(&self, p: &PauliString) -> Result<f64> {
        self.expectation(p)
    }
}

/// Evaluates the recombination formula with exact Choi states.
pub fn recombine_exact<T: PauliTrace>(
    reduced: &ReducedGraph,
    choi: &BTreeMap<usize, T>,
    observable: &Observable,
) -> Result<f64> {
    for f in &reduced.fragments {
        let c = choi.get(&f.id).ok_or(Error::MissingEnsemble(f.id))?;
        if c.width() != f.choi_width() {
            return Err(Error::Dimension(format!(
                "Choi state for fragment {} has {} qubits, layout needs {}",
                f.id,
                c.width(),
                f.choi_width()
            )));
        }
    }
    Ok(contract(reduced, observable, |f, p| Ok((choi[&f.id].pauli_trace(p)?, usize::MAX)))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::cutter::{cut_circuit, partition_for_observable, reduce, CutSpec};
    use crate::pauli::Axis;
    use crate::rng::SeedStream;
    use crate::shadows::{choi_state, collect_choi_shadow};

    fn pair() -> (Circuit, ReducedGraph) {
        let c = Circuit::new(3)
            .with(Gate::haar(&[0, 1], 11).unwrap())
            .unwrap()
            .with(Gate::haar(&[1, 2], 12).unwrap())
            .unwrap();
        let g = cut_circuit(&c, &[CutSpec::new(1, 0)]).unwrap();
        let p = partition_for_observable(&g, &[0, 1, 2].into()).unwrap();
        (c, reduce(&g, &p))
    }

    #[test]
    fn lexicographic_assignments() {
        let all: Vec<_> = enumerate_assignments(2).collect();
        assert_eq!(all.len(), 16);
        assert_eq!(all[0].ops, vec![BasisOp::I, BasisOp::I]);
        assert_eq!(all[1].ops, vec![BasisOp::I, BasisOp::X]);
        assert_eq!(all[4].ops, vec![BasisOp::X, BasisOp::I]);
        assert_eq!(all[15].ops, vec![BasisOp::Z, BasisOp::Z]);
        assert_eq!(enumerate_assignments(0).count(), 1);
    }

    #[test]
    fn pair_placements() {
        let (_, r) = pair();
        let term: PauliString = "Z1 X2 Y3".parse().unwrap();
        let m = MAssignment { ops: vec![BasisOp::X] };
        let pl = place_operators(&r, &m, &term).unwrap();
        // f0 register: [q_out wire 1 | c_out wire 0]; f1 register: [ancilla | c_out wires 1, 2]
        assert_eq!(pl[0].pauli.to_string(), "X1 Z2");
        assert_eq!(pl[1].pauli.to_string(), "X1 X2 Y3");
        let m = MAssignment { ops: vec![BasisOp::Y] };
        let pl = place_operators(&r, &m, &term).unwrap();
        assert_eq!(pl[0].pauli.to_string(), "Y1 Z2");
        assert_eq!(pl[1].pauli.to_string(), "-1*Y1 X2 Y3");
        let m = MAssignment { ops: vec![BasisOp::I] };
        let pl = place_operators(&r, &m, &term).unwrap();
        assert_eq!(pl[0].pauli.to_string(), "Z2");
        assert_eq!(pl[1].pauli.to_string(), "X2 Y3");
        assert!(place_operators(&r, &MAssignment { ops: vec![] }, &term).is_err());
    }

    #[test]
    fn exact_recombination_matches_uncut() {
        let (c, r) = pair();
        let state = c.simulate().unwrap();
        let choi: BTreeMap<usize, Statevector> = r.fragments.iter().map(|f| (f.id, choi_state(f).unwrap())).collect();
        for text in ["Z1 X2 Y3", "Y2", "X1 Z3", "Y1 Y2 Y3", "I"] {
            let o: Observable = text.parse().unwrap();
            let exact = state.expectation(&o.terms()[0]).unwrap();
            let rec = recombine_exact(&r, &choi, &o).unwrap();
            assert!((exact - rec).abs() <= 1e-10, "{text}: {exact} vs {rec}");
        }
    }

    #[test]
    fn table_contraction_matches_literal_sum() {
        let (_, r) = pair();
        let choi: BTreeMap<usize, Statevector> = r.fragments.iter().map(|f| (f.id, choi_state(f).unwrap())).collect();
        let term: PauliString = "X1 Y2 Z3".parse().unwrap();
        let mut literal = 0.0;
        for m in enumerate_assignments(r.n_free_edges()) {
            let mut prod = 1.0;
            for pl in place_operators(&r, &m, &term).unwrap() {
                prod *= choi[&pl.fragment].expectation(&pl.pauli).unwrap();
            }
            literal += prod;
        }
        let table = recombine_exact(&r, &choi, &term.into()).unwrap();
        assert!((literal - table).abs() <= 1e-12);
    }

    #[test]
    fn single_fragment_reduces_to_plain_estimation() {
        let c = Circuit::new(2).with(Gate::haar(&[0, 1], 4).unwrap()).unwrap();
        let g = cut_circuit(&c, &[]).unwrap();
        let o: Observable = "X1 Z2".parse().unwrap();
        let r = reduce(&g, &partition_for_observable(&g, &o.support_qubits()).unwrap());
        let (ens, _) = collect_choi_shadow(&g.fragments[0], 500, SeedStream::new(1)).unwrap();
        let direct = crate::shadows::estimate(&ens, &o.terms()[0]).unwrap();
        let report = recombine_estimate(&r, &BTreeMap::from([(0, ens)]), &o).unwrap();
        assert_eq!(report.estimate, direct.value);
        assert_eq!(report.m_assignments, 1);
        assert_eq!(report.any_unobserved, direct.n_matched == 0);
    }

    #[test]
    fn linearity_in_observable() {
        let (_, r) = pair();
        let ensembles: BTreeMap<usize, ShadowEnsemble> = r
            .fragments
            .iter()
            .map(|f| (f.id, collect_choi_shadow(f, 2000, SeedStream::new(f.id as u64)).unwrap().0))
            .collect();
        let o: Observable = "X1 Y2; 0.5*Z3".parse().unwrap();
        let a = recombine_estimate(&r, &ensembles, &o).unwrap().estimate;
        let b = recombine_estimate(&r, &ensembles, &o.scaled(-2.5)).unwrap().estimate;
        assert!((b - -2.5 * a).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn missing_ensemble_and_bad_term() {
        let c = Circuit::new(3)
            .with(Gate::haar(&[0, 1], 1).unwrap())
            .unwrap()
            .with(Gate::haar(&[1, 2], 2).unwrap())
            .unwrap();
        let g = cut_circuit(&c, &[CutSpec::new(1, 0)]).unwrap();
        let p = partition_for_observable(&g, &[0].into()).unwrap();
        let r = reduce(&g, &p);
        let o: Observable = "Z1".parse().unwrap();
        assert!(matches!(recombine_estimate(&r, &BTreeMap::new(), &o), Err(Error::MissingEnsemble(0))));
        // wire 2 belongs to a Δ fragment under this partition
        let bad = PauliString::single(2, Axis::Z);
        assert!(matches!(place_operators(&r, &MAssignment { ops: vec![] }, &bad), Err(Error::Partition(_))));
    }
}
