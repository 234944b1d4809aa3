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

//! Gate-list circuits and their JSON form.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::sim::{gates, haar_random_unitary, ComplexMatrix, Statevector};

/// Serialisable description of a gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GateSpec {
    /// Haar-random unitary regenerated from `seed`.
    Haar {
        qubits: Vec<usize>,
        seed: u64,
    },
    Named {
        name: String,
        qubits: Vec<usize>,
    },
    Matrix {
        qubits: Vec<usize>,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

impl GateSpec {
    pub fn qubits(&self) -> &[usize] {
        match self {
            GateSpec::Haar { qubits, .. } | GateSpec::Named { qubits, .. } | GateSpec::Matrix { qubits, .. } => qubits,
        }
    }

    fn qubits_mut(&mut self) -> &mut Vec<usize> {
        match self {
            GateSpec::Haar { qubits, .. } | GateSpec::Named { qubits, .. } | GateSpec::Matrix { qubits, .. } => qubits,
        }
    }

    fn resolve(&self) -> Result<ComplexMatrix> {
        match self {
            GateSpec::Haar { qubits, seed } => haar_random_unitary(qubits.len(), SeedStream::new(*seed)),
            GateSpec::Named { name, .. } => named_gate(name),
            GateSpec::Matrix { re, im, .. } => {
                let m = ComplexMatrix::from_parts(re, im)?;
                let err = m.unitarity_error();
                if err > 1e-10 {
                    return Err(Error::InvalidArgument(format!(
                        "matrix gate is not unitary (max |U†U − I| = {err:e})"
                    )));
                }
                Ok(m)
            }
        }
    }
}

fn named_gate(name: &str) -> Result<ComplexMatrix> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "i" | "id" => gates::i(),
        "h" => gates::h(),
        "x" => gates::x(),
        "y" => gates::y(),
        "z" => gates::z(),
        "s" => gates::s(),
        "sdg" => gates::sdg(),
        "t" => gates::t(),
        "tdg" => gates::tdg(),
        "cnot" | "cx" => gates::cnot(),
        "cz" => gates::cz(),
        "swap" => gates::swap(),
        other => return Err(Error::Parse(format!("unknown gate name {other:?}"))),
    })
}

/// A gate with its matrix resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    spec: GateSpec,
    matrix: ComplexMatrix,
}

impl Gate {
    pub fn from_spec(spec: GateSpec) -> Result<Self> {
        let matrix = spec.resolve()?;
        let k = spec.qubits().len();
        if matrix.rows() != 1 << k {
            return Err(Error::Dimension(format!("{}x{} gate listed on {} qubits", matrix.rows(), matrix.cols(), k)));
        }
        Ok(Gate { spec, matrix })
    }

    pub fn named(name: &str, qubits: &[usize]) -> Result<Self> {
        Self::from_spec(GateSpec::Named { name: name.to_string(), qubits: qubits.to_vec() })
    }

    pub fn haar(qubits: &[usize], seed: u64) -> Result<Self> {
        Self::from_spec(GateSpec::Haar { qubits: qubits.to_vec(), seed })
    }

    /// Arbitrary unitary; stored in the JSON as explicit real/imaginary parts.
    pub fn matrix(qubits: &[usize], matrix: ComplexMatrix) -> Result<Self> {
        let re = (0..matrix.rows()).map(|r| (0..matrix.cols()).map(|c| matrix.get(r, c).re).collect()).collect();
        let im = (0..matrix.rows()).map(|r| (0..matrix.cols()).map(|c| matrix.get(r, c).im).collect()).collect();
        Self::from_spec(GateSpec::Matrix { qubits: qubits.to_vec(), re, im })
    }

    pub fn spec(&self) -> &GateSpec {
        &self.spec
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn qubits(&self) -> &[usize] {
        self.spec.qubits()
    }

    /// Same gate acting on relabelled wires.
    pub fn relabelled(&self, map: impl Fn(usize) -> usize) -> Gate {
        let mut spec = self.spec.clone();
        for q in spec.qubits_mut() {
            *q = map(*q);
        }
        Gate { spec, matrix: self.matrix.clone() }
    }
}

/// Ordered list of unitary gates on `n_qubits` wires, starting from |0…0⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        let qs = gate.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
            }
            if qs[..i].contains(&q) {
                return Err(Error::DuplicateWire(q));
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    /// Final state from |0…0⟩.
    pub fn simulate(&self) -> Result<Statevector> {
        self.run_on(Statevector::zero(self.n_qubits)?)
    }

    /// Applies every gate to `state`, which must have `n_qubits` qubits.
    pub fn run_on(&self, mut state: Statevector) -> Result<Statevector> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "{}-qubit state for a {}-qubit circuit",
                state.n_qubits(),
                self.n_qubits
            )));
        }
        for g in &self.gates {
            state.apply_gate_mut(g.unitary(), g.qubits())?;
        }
        Ok(state)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CircuitJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CircuitJson = serde_json::from_str(text)?;
        raw.try_into()
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn content_hash(&self) -> String {
        let json = self.to_json().expect("circuit serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n_qubits: usize,
    gates: Vec<GateSpec>,
}

impl From<&Circuit> for CircuitJson {
    fn from(c: &Circuit) -> Self {
        CircuitJson { n_qubits: c.n_qubits, gates: c.gates.iter().map(|g| g.spec.clone()).collect() }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(raw: CircuitJson) -> Result<Self> {
        let mut c = Circuit::new(raw.n_qubits);
        for spec in raw.gates {
            c.push(Gate::from_spec(spec)?)?;
        }
        Ok(c)
    }
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircuitJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CircuitJson::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}
