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

//! Sparse Pauli strings and observables.
//!
//! A [`PauliString`] stores only its non-identity factors, keyed by 0-based
//! qubit index. The text form used on the command line is 1-based:
//! `"X1 Y4 Z7"`, optionally prefixed by a coefficient as in `"0.5*X1 Z2"`.
//! Multi-term observables join strings with `;`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{ComplexMatrix, C64};

/// Non-identity single-qubit Pauli; also a measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c.to_ascii_uppercase() {
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }

    /// Index in `ALL`.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Single-qubit basis operator from {I, X, Y, Z}, ordered I < X < Y < Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BasisOp {
    I,
    X,
    Y,
    Z,
}

impl BasisOp {
    pub const ALL: [BasisOp; 4] = [BasisOp::I, BasisOp::X, BasisOp::Y, BasisOp::Z];

    pub fn axis(self) -> Option<Axis> {
        match self {
            BasisOp::I => None,
            BasisOp::X => Some(Axis::X),
            BasisOp::Y => Some(Axis::Y),
            BasisOp::Z => Some(Axis::Z),
        }
    }

    /// Scalar `s` with `opᵀ = s·op`.
    pub fn transpose_sign(self) -> f64 {
        if self == BasisOp::Y {
            -1.0
        } else {
            1.0
        }
    }
}

impl From<Axis> for BasisOp {
    fn from(a: Axis) -> Self {
        match a {
            Axis::X => BasisOp::X,
            Axis::Y => BasisOp::Y,
            Axis::Z => BasisOp::Z,
        }
    }
}

/// Bit masks describing the action of a Pauli string on computational basis states.
///
/// `P|j⟩ = i^{n_y} (−1)^{popcount(j & phase)} |j ^ flip⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip: usize,
    pub phase: usize,
    pub n_y: u32,
}

impl PauliMasks {
    pub fn i_power(&self) -> C64 {
        match self.n_y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }
}

/// Tensor product of single-qubit Paulis with a real coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    support: BTreeMap<usize, Axis>,
    coeff: f64,
}

impl PauliString {
    pub fn identity() -> Self {
        PauliString { support: BTreeMap::new(), coeff: 1.0 }
    }

    pub fn single(qubit: usize, axis: Axis) -> Self {
        PauliString { support: BTreeMap::from([(qubit, axis)]), coeff: 1.0 }
    }

    /// Fails if a qubit is listed twice.
    pub fn new(factors: impl IntoIterator<Item = (usize, Axis)>, coeff: f64) -> Result<Self> {
        let mut support = BTreeMap::new();
        for (q, a) in factors {
            if support.insert(q, a).is_some() {
                return Err(Error::Parse(format!("qubit {} listed twice", q + 1)));
            }
        }
        Ok(PauliString { support, coeff })
    }

    pub fn with_coeff(mut self, coeff: f64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn support(&self) -> &BTreeMap<usize, Axis> {
        &self.support
    }

    pub fn axis_at(&self, qubit: usize) -> Option<Axis> {
        self.support.get(&qubit).copied()
    }

    pub fn is_identity(&self) -> bool {
        self.support.is_empty()
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    /// `(−1)^{#Y}`: the scalar relating Pᵀ to P.
    pub fn transpose_sign(&self) -> f64 {
        if self.support.values().filter(|&&a| a == Axis::Y).count() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// True iff every support qubit is measured along the same axis in `basis`.
    pub fn matches(&self, basis: &[Axis]) -> bool {
        self.support.iter().all(|(&q, &a)| basis.get(q).is_some_and(|&b| b == a))
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.support.keys().next_back().copied()
    }

    pub fn masks(&self, n_qubits: usize) -> Result<PauliMasks> {
        let mut m = PauliMasks { flip: 0, phase: 0, n_y: 0 };
        for (&q, &a) in &self.support {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            let bit = 1usize << (n_qubits - 1 - q);
            match a {
                Axis::X => m.flip |= bit,
                Axis::Y => {
                    m.flip |= bit;
                    m.phase |= bit;
                    m.n_y += 1;
                }
                Axis::Z => m.phase |= bit,
            }
        }
        Ok(m)
    }

    /// tr(P·op) without the coefficient.
    pub fn trace_with(&self, op: &ComplexMatrix) -> Result<C64> {
        let n = op.n_qubits().ok_or_else(|| Error::Dimension("operator is not a square power-of-two matrix".into()))?;
        let m = self.masks(n)?;
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..(1usize << n) {
            let v = op.get(j, j ^ m.flip);
            if (j & m.phase).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        Ok(acc * m.i_power())
    }

    /// Dense `2^n × 2^n` matrix including the coefficient.
    pub fn to_dense(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        let m = self.masks(n_qubits)?;
        let dim = 1usize << n_qubits;
        let ip = m.i_power() * self.coeff;
        let mut out = ComplexMatrix::zeros(dim, dim);
        for k in 0..dim {
            let s = if (k & m.phase).count_ones() % 2 == 0 { ip } else { -ip };
            out.set(k ^ m.flip, k, s);
        }
        Ok(out)
    }

    /// Factors on the given qubits only, with unit coefficient.
    pub fn restricted_to(&self, qubits: impl Fn(usize) -> bool) -> PauliString {
        PauliString {
            support: self.support.iter().filter(|(&q, _)| qubits(q)).map(|(&q, &a)| (q, a)).collect(),
            coeff: 1.0,
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff != 1.0 {
            write!(f, "{}*", self.coeff)?;
        }
        if self.support.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for (&q, a) in &self.support {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}{}", a, q + 1)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (coeff, body) = match s.split_once('*') {
            Some((c, rest)) => {
                (c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad coefficient {c:?}")))?, rest)
            }
            None => (1.0, s),
        };
        let mut factors = Vec::new();
        for tok in body.split_whitespace() {
            if tok.eq_ignore_ascii_case("I") {
                continue;
            }
            let mut chars = tok.chars();
            let axis = chars
                .next()
                .and_then(Axis::from_char)
                .ok_or_else(|| Error::Parse(format!("bad Pauli factor {tok:?}")))?;
            let idx: usize = chars.as_str().parse().map_err(|_| Error::Parse(format!("bad qubit index in {tok:?}")))?;
            if idx == 0 {
                return Err(Error::Parse(format!("qubit indices are 1-based: {tok:?}")));
            }
            factors.push((idx - 1, axis));
        }
        PauliString::new(factors, coeff)
    }
}

/// Real linear combination of Pauli strings with distinct supports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observable {
    terms: Vec<PauliString>,
}

impl Observable {
    /// Terms with equal support pattern are merged by summing coefficients.
    pub fn new(terms: impl IntoIterator<Item = PauliString>) -> Self {
        let mut merged: Vec<PauliString> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.support == t.support) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        Observable { terms: merged }
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Σ|α_P|, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Observable {
        Observable { terms: self.terms.iter().map(|t| t.clone().with_coeff(t.coeff * s)).collect() }
    }

    /// Union of all term supports.
    pub fn support_qubits(&self) -> std::collections::BTreeSet<usize> {
        self.terms.iter().flat_map(|t| t.support.keys().copied()).collect()
    }

    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(PauliString::weight).max().unwrap_or(0)
    }

    pub fn to_dense(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        let dim = 1usize << n_qubits;
        self.terms.iter().try_fold(ComplexMatrix::zeros(dim, dim), |acc, t| acc.add(&t.to_dense(n_qubits)?))
    }
}

impl From<PauliString> for Observable {
    fn from(p: PauliString) -> Self {
        Observable { terms: vec![p] }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let terms =
            s.split(';').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<Vec<PauliString>>>()?;
        if terms.is_empty() {
            return Err(Error::Parse("empty observable".into()));
        }
        Ok(Observable::new(terms))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: f64,
    ops: BTreeMap<String, Axis>,
}

#[derive(Serialize, Deserialize)]
struct ObservableJson {
    terms: Vec<TermJson>,
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ObservableJson {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: t.coeff,
                    ops: t.support.iter().map(|(&q, &a)| ((q + 1).to_string(), a)).collect(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ObservableJson::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let mut factors = Vec::new();
            for (k, a) in t.ops {
                let q: usize = k.parse().map_err(|_| D::Error::custom(format!("bad qubit key {k:?}")))?;
                if q == 0 {
                    return Err(D::Error::custom("qubit keys are 1-based"));
                }
                factors.push((q - 1, a));
            }
            terms.push(PauliString::new(factors, t.coeff).map_err(D::Error::custom)?);
        }
        Ok(Observable::new(terms))
    }
}

/// Largest operator accepted by [`pauli_expand`].
pub const MAX_EXPAND_QUBITS: usize = 4;

/// All `4^n` Pauli strings on `n` qubits, in lexicographic I<X<Y<Z order with qubit 0 most significant.
pub fn all_strings(n_qubits: usize) -> impl Iterator<Item = PauliString> {
    (0..(1usize << (2 * n_qubits))).map(move |code| {
        let support = (0..n_qubits)
            .filter_map(|q| {
                let digit = (code >> (2 * (n_qubits - 1 - q))) & 3;
                BasisOp::ALL[digit].axis().map(|a| (q, a))
            })
            .collect();
        PauliString { support, coeff: 1.0 }
    })
}

/// Pauli expansion `op = Σ_P α_P P` with `α_P = tr(P·op)/2^n`.
///
/// Coefficients of magnitude below 1e-14 are dropped.
pub fn pauli_expand(op: &ComplexMatrix, n_qubits: usize) -> Result<Observable> {
    if n_qubits > MAX_EXPAND_QUBITS {
        return Err(Error::SizeLimit { what: "Pauli expansion", requested: n_qubits, limit: MAX_EXPAND_QUBITS });
    }
    if op.rows() != 1 << n_qubits || op.cols() != 1 << n_qubits {
        return Err(Error::Dimension(format!("{}x{} operator on {} qubits", op.rows(), op.cols(), n_qubits)));
    }
    let norm = (1usize << n_qubits) as f64;
    let mut terms = Vec::new();
    for p in all_strings(n_qubits) {
        let alpha = p.trace_with(op)? / norm;
        if alpha.im.abs() > 1e-10 {
            return Err(Error::NotHermitian(alpha.im));
        }
        if alpha.re.abs() > 1e-14 {
            terms.push(p.with_coeff(alpha.re));
        }
    }
    Ok(Observable { terms })
}
