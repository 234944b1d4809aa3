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

use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants split into two families: validation failures (bad indices, malformed
/// input, inconsistent structures) and size-limit refusals. The CLI maps the
/// former to exit code 2 and the latter to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {requested} qubits exceeds the {limit}-qubit limit for {what}")]
    SizeLimit { what: &'static str, requested: usize, limit: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("duplicate wire {0} in gate")]
    DuplicateWire(usize),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operator is not Hermitian: imaginary Pauli coefficient {0:e}")]
    NotHermitian(f64),
    #[error("missing shadow ensemble for fragment {0}")]
    MissingEnsemble(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_size_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
