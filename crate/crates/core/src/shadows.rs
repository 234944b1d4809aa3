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

//! Classical shadows from random single-qubit Pauli measurements.
//!
//! Each shot draws a basis uniformly from {X, Y, Z} for every qubit, measures,
//! and stores the pair (basis string, ±1 outcome string). A Pauli string is
//! estimated by averaging the product of outcomes over the shots whose basis
//! agrees with it on its support. Shots that never match leave the estimate at
//! zero, with the match count reported so callers can tell the two apart.
//!
//! Fragment Choi states are sampled with one ancilla per quantum input: the
//! ancilla and the input wire are prepared in a Bell pair before the fragment
//! runs, then ancillas and outputs are measured together. The measured register
//! is ordered `[ancillas | quantum outputs | circuit outputs]`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::cutter::Fragment;
use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString};
use crate::rng::SeedStream;
use crate::sim::{cumulative, draw_outcome, Statevector, MAX_STATE_QUBITS};

/// Registers up to this width cache one outcome distribution per basis string.
const DISTRIBUTION_CACHE_QUBITS: usize = 8;

/// Where an ensemble came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Hash of the circuit (or fragment subcircuit) that was sampled.
    pub circuit_hash: String,
    /// Fragment id, or `None` for an uncut circuit.
    pub fragment: Option<usize>,
    pub seed: u64,
}

/// One recorded shot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowSample {
    pub basis: Vec<Axis>,
    pub outcome: Vec<i8>,
}

/// Bit-packed shot: bit `q` of each mask refers to qubit `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PackedShot {
    x: u64,
    y: u64,
    z: u64,
    minus: u64,
}

/// Estimate together with the number of shots it was averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub n_matched: usize,
}

/// Pauli string compiled against a register for fast matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pattern {
    x: u64,
    y: u64,
    z: u64,
}

impl Pattern {
    pub fn new(p: &PauliString, register_size: usize) -> Result<Self> {
        let mut pat = Pattern { x: 0, y: 0, z: 0 };
        for (&q, &a) in p.support() {
            if q >= register_size {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: register_size });
            }
            match a {
                Axis::X => pat.x |= 1 << q,
                Axis::Y => pat.y |= 1 << q,
                Axis::Z => pat.z |= 1 << q,
            }
        }
        Ok(pat)
    }

    fn support(&self) -> u64 {
        self.x | self.y | self.z
    }

    #[inline]
    fn sign_if_matched(&self, s: &PackedShot) -> Option<f64> {
        let matched = s.x & self.x == self.x && s.y & self.y == self.y && s.z & self.z == self.z;
        matched.then(|| if (s.minus & self.support()).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 })
    }
}

/// Ordered collection of shots over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowEnsemble {
    register_size: usize,
    shots: Vec<PackedShot>,
    provenance: Provenance,
}

impl ShadowEnsemble {
    pub fn new(register_size: usize, provenance: Provenance) -> Result<Self> {
        if register_size > 64 {
            return Err(Error::SizeLimit { what: "shadow registers", requested: register_size, limit: 64 });
        }
        Ok(ShadowEnsemble { register_size, shots: Vec::new(), provenance })
    }

    pub fn push(&mut self, basis: &[Axis], outcome: &[i8]) -> Result<()> {
        if basis.len() != self.register_size || outcome.len() != self.register_size {
            return Err(Error::Dimension(format!(
                "shot of length {}/{} for a {}-qubit register",
                basis.len(),
                outcome.len(),
                self.register_size
            )));
        }
        let mut s = PackedShot { x: 0, y: 0, z: 0, minus: 0 };
        for (q, (&b, &m)) in basis.iter().zip(outcome).enumerate() {
            match b {
                Axis::X => s.x |= 1 << q,
                Axis::Y => s.y |= 1 << q,
                Axis::Z => s.z |= 1 << q,
            }
            match m {
                1 => {}
                -1 => s.minus |= 1 << q,
                other => return Err(Error::InvalidArgument(format!("outcome {other} is not ±1"))),
            }
        }
        self.shots.push(s);
        Ok(())
    }

    pub fn register_size(&self) -> usize {
        self.register_size
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn sample(&self, i: usize) -> ShadowSample {
        let s = &self.shots[i];
        let basis = (0..self.register_size)
            .map(|q| {
                if s.x >> q & 1 == 1 {
                    Axis::X
                } else if s.y >> q & 1 == 1 {
                    Axis::Y
                } else {
                    Axis::Z
                }
            })
            .collect();
        let outcome = (0..self.register_size).map(|q| if s.minus >> q & 1 == 1 { -1 } else { 1 }).collect();
        ShadowSample { basis, outcome }
    }

    pub fn samples(&self) -> impl Iterator<Item = ShadowSample> + '_ {
        (0..self.len()).map(|i| self.sample(i))
    }

    /// Matched-average estimate over a range of shots, without the coefficient.
    fn estimate_range(&self, pat: &Pattern, range: std::ops::Range<usize>) -> Estimate {
        let (mut sum, mut n) = (0.0, 0usize);
        for s in &self.shots[range] {
            if let Some(v) = pat.sign_if_matched(s) {
                sum += v;
                n += 1;
            }
        }
        Estimate { value: if n == 0 { 0.0 } else { sum / n as f64 }, n_matched: n }
    }

    /// Matched-average estimate of a compiled pattern (unit coefficient).
    pub fn estimate_pattern(&self, pat: &Pattern) -> Estimate {
        self.estimate_range(pat, 0..self.len())
    }
}

/// Mean of outcome products over shots matching `p`, times `p`'s coefficient.
///
/// With no matching shot the value is 0 and `n_matched` is 0.
pub fn estimate(ensemble: &ShadowEnsemble, p: &PauliString) -> Result<Estimate> {
    let pat = Pattern::new(p, ensemble.register_size)?;
    let e = ensemble.estimate_pattern(&pat);
    Ok(Estimate { value: e.value * p.coeff(), n_matched: e.n_matched })
}

/// Median over `groups` contiguous groups of shots of the per-group matched average.
///
/// Group sizes differ by at most one; earlier groups take the remainder.
pub fn estimate_mom(ensemble: &ShadowEnsemble, p: &PauliString, groups: usize) -> Result<f64> {
    if groups == 0 || groups > ensemble.len() {
        return Err(Error::InvalidArgument(format!("{groups} groups for an ensemble of {} shots", ensemble.len())));
    }
    let pat = Pattern::new(p, ensemble.register_size)?;
    let (base, extra) = (ensemble.len() / groups, ensemble.len() % groups);
    let mut start = 0;
    let mut means: Vec<f64> = (0..groups)
        .map(|g| {
            let len = base + usize::from(g < extra);
            let e = ensemble.estimate_range(&pat, start..start + len);
            start += len;
            e.value
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let mid = groups / 2;
    let median = if groups % 2 == 1 { means[mid] } else { 0.5 * (means[mid - 1] + means[mid]) };
    Ok(median * p.coeff())
}

/// Probability that a fixed weight-`weight` pattern never appears in `shots` uniformly random basis strings.
pub fn unobserved_probability(weight: usize, shots: u64) -> f64 {
    let p_match = 3f64.powi(-(weight as i32));
    (shots as f64 * (-p_match).ln_1p()).exp()
}

/// Draws `shots` random-basis measurements of `state`.
pub fn sample_shadow(
    state: &Statevector,
    shots: usize,
    stream: SeedStream,
    provenance: Provenance,
) -> Result<ShadowEnsemble> {
    let n = state.n_qubits();
    let mut ens = ShadowEnsemble::new(n, provenance)?;
    ens.shots.reserve(shots);
    let mut rng = stream.rng();
    let mut cache: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut basis = vec![Axis::Z; n];
    for _ in 0..shots {
        let mut key = 0u32;
        for b in basis.iter_mut() {
            let t = rng.random_range(0..3usize);
            *b = Axis::ALL[t];
            key = key * 3 + t as u32;
        }
        let u: f64 = rng.random();
        let outcome = if n <= DISTRIBUTION_CACHE_QUBITS {
            let cdf = match cache.get(&key) {
                Some(c) => c,
                None => cache.entry(key).or_insert(cumulative(&state.rotated_probabilities(&basis)?)),
            };
            draw_outcome(cdf, n, u)
        } else {
            draw_outcome(&cumulative(&state.rotated_probabilities(&basis)?), n, u)
        };
        ens.push(&basis, &outcome)?;
    }
    Ok(ens)
}

/// Shadow of the output state of an uncut circuit.
pub fn collect_state_shadow(circuit: &Circuit, shots: usize, stream: SeedStream) -> Result<ShadowEnsemble> {
    let state = circuit.simulate()?;
    sample_shadow(
        &state,
        shots,
        stream,
        Provenance { circuit_hash: circuit.content_hash(), fragment: None, seed: stream.seed() },
    )
}

/// Positions of each part of a fragment's Choi register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiRegisterLayout {
    /// One ancilla per quantum input, in q_in slot order.
    pub ancilla_slots: Vec<usize>,
    pub q_out_slots: Vec<usize>,
    pub c_out_slots: Vec<usize>,
}

impl ChoiRegisterLayout {
    pub fn for_fragment(f: &Fragment) -> Self {
        let qi = f.q_in.len();
        let qo = f.q_out.len();
        ChoiRegisterLayout {
            ancilla_slots: (0..qi).collect(),
            q_out_slots: (qi..qi + qo).collect(),
            c_out_slots: (qi + qo..qi + qo + f.c_out.len()).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.ancilla_slots.len() + self.q_out_slots.len() + self.c_out_slots.len()
    }
}

/// Circuit whose output state is the unit-trace Choi state of `fragment`.
///
/// Ancilla `k` is entangled with quantum input `k` by H on the ancilla and a
/// CNOT from ancilla to input; remaining inputs start in |0⟩. The fragment's
/// gates then run on qubits shifted past the ancillas.
pub fn choi_circuit(fragment: &Fragment) -> Result<Circuit> {
    let qi = fragment.q_in.len();
    let width = fragment.choi_width();
    let mut c = Circuit::new(width);
    for (k, slot) in fragment.q_in.iter().enumerate() {
        c.push(Gate::named("h", &[k])?)?;
        c.push(Gate::named("cnot", &[k, qi + slot.local])?)?;
    }
    for g in fragment.subcircuit.gates() {
        c.push(g.relabelled(|q| q + qi))?;
    }
    Ok(c)
}

/// Statevector of a fragment's Choi state.
pub fn choi_state(fragment: &Fragment) -> Result<Statevector> {
    if fragment.choi_width() > MAX_STATE_QUBITS {
        return Err(Error::SizeLimit {
            what: "fragment Choi registers",
            requested: fragment.choi_width(),
            limit: MAX_STATE_QUBITS,
        });
    }
    choi_circuit(fragment)?.simulate()
}

/// Shadow of a fragment's Choi state.
pub fn collect_choi_shadow(
    fragment: &Fragment,
    shots: usize,
    stream: SeedStream,
) -> Result<(ShadowEnsemble, ChoiRegisterLayout)> {
    let state = choi_state(fragment)?;
    let ens = sample_shadow(
        &state,
        shots,
        stream,
        Provenance {
            circuit_hash: fragment.subcircuit.content_hash(),
            fragment: Some(fragment.id),
            seed: stream.seed(),
        },
    )?;
    Ok((ens, ChoiRegisterLayout::for_fragment(fragment)))
}

/// Header line of a shadow file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowHeader {
    pub provenance: Provenance,
    pub register_size: usize,
    pub shots: usize,
    pub layout: Option<ChoiRegisterLayout>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: ShadowHeader,
}

#[derive(Serialize, Deserialize)]
struct ShotLine {
    b: String,
    m: Vec<i8>,
}

/// Writes one ensemble as JSON lines: a header followed by one `{"b":..,"m":[..]}` record per shot.
pub fn write_jsonl<W: Write>(mut w: W, ens: &ShadowEnsemble, layout: Option<&ChoiRegisterLayout>) -> Result<()> {
    let header = HeaderLine {
        header: ShadowHeader {
            provenance: ens.provenance.clone(),
            register_size: ens.register_size,
            shots: ens.len(),
            layout: layout.cloned(),
        },
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for s in ens.samples() {
        let line = ShotLine { b: s.basis.iter().map(|a| a.as_char()).collect(), m: s.outcome };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Reads every ensemble from a JSON-lines stream written by [`write_jsonl`].
pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<(ShadowHeader, ShadowEnsemble)>> {
    let mut out: Vec<(ShadowHeader, ShadowEnsemble)> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if line.trim_start().starts_with("{\"header\"") {
            let h: HeaderLine = serde_json::from_str(&line)?;
            let ens = ShadowEnsemble::new(h.header.register_size, h.header.provenance.clone())?;
            out.push((h.header, ens));
            continue;
        }
        let shot: ShotLine = serde_json::from_str(&line)?;
        let (_, ens) = out
            .last_mut()
            .ok_or_else(|| Error::Parse(format!("line {}: shot record before any header", lineno + 1)))?;
        let basis = shot
            .b
            .chars()
            .map(|c| Axis::from_char(c).ok_or_else(|| Error::Parse(format!("line {}: bad basis {c:?}", lineno + 1))))
            .collect::<Result<Vec<_>>>()?;
        ens.push(&basis, &shot.m)?;
    }
    for (h, e) in &out {
        if h.shots != e.len() {
            return Err(Error::Parse(format!("header announces {} shots but {} were read", h.shots, e.len())));
        }
    }
    Ok(out)
}
