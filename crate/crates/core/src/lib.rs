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

//! Shadow tomography on cut circuits.
//!
//! A circuit is cut into fragments along chosen wires, each fragment's Choi
//! state is sampled with random single-qubit Pauli measurements, and Pauli
//! observables of the full circuit are recovered by contracting per-fragment
//! shadow estimates over the cut edges.

pub mod bounds;
pub mod circuit;
pub mod cutter;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod pauli;
pub mod recombine;
pub mod rng;
pub mod shadows;
pub mod sim;

pub use circuit::{Circuit, Gate, GateSpec};
pub use cutter::{
    cut_circuit, partition_for_observable, reduce, CutSpec, Fragment, FragmentGraph, Partition, ReducedGraph,
};
pub use error::{Error, Result};
pub use pauli::{Axis, BasisOp, Observable, PauliString};
pub use recombine::{recombine_estimate, recombine_exact, EstimateReport};
pub use rng::SeedStream;
pub use shadows::{Estimate, ShadowEnsemble};
pub use sim::{ComplexMatrix, DensityMatrix, Statevector};
