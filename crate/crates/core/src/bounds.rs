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

//! Sample-complexity quotes for fragmented shadow estimation and the error
//! propagation rule for products of independent estimates.
//!
//! Logarithms are natural. Quotes are reported, never enforced.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::cutter::{Fragment, ReducedGraph};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

/// Graph-level and fragment-level inputs to a quote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuoteInputs {
    pub epsilon: f64,
    pub delta: f64,
    /// |F|
    pub n_fragments: usize,
    /// |E|
    pub n_edges: usize,
    /// |K|, the number of qubits the observable acts on.
    pub k_size: usize,
    /// |κ| + |Γ|
    pub kappa_gamma: usize,
    pub deg: usize,
    pub qdeg: usize,
    /// ‖O‖_∞
    pub o_norm: f64,
}

/// Shots needed for one fragment: `groups` batches of `per_group` shots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityQuote {
    pub inputs: QuoteInputs,
    /// K = 2^{qdeg+1} ln(2|F|/δ)
    pub groups: f64,
    /// K as it appears in the proof: 2 ln(2|F|·4^{qdeg}/δ)
    pub groups_proof_form: f64,
    /// N = 34 (|E|+|K|)(|κ|+|Γ|) 4^{deg} ‖O‖²_∞ / ε²
    pub per_group: f64,
    /// N·K
    pub total_shots: f64,
    pub log_base: &'static str,
}

pub fn quote(inputs: QuoteInputs) -> Result<ComplexityQuote> {
    let QuoteInputs { epsilon, delta, .. } = inputs;
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("ε and δ must lie in (0, 1); got ε = {epsilon}, δ = {delta}")));
    }
    if inputs.n_fragments == 0 {
        return Err(Error::InvalidArgument("quote needs at least one fragment".into()));
    }
    let f = inputs.n_fragments as f64;
    let groups = 2f64.powi(inputs.qdeg as i32 + 1) * (2.0 * f / delta).ln();
    let groups_proof_form = 2.0 * (2.0 * f * 4f64.powi(inputs.qdeg as i32) / delta).ln();
    // dividing by ε twice keeps integer-valued quotes exact for decimal ε
    let per_group = 34.0
        * (inputs.n_edges + inputs.k_size) as f64
        * inputs.kappa_gamma as f64
        * 4f64.powi(inputs.deg as i32)
        * inputs.o_norm
        * inputs.o_norm
        / epsilon
        / epsilon;
    Ok(ComplexityQuote { inputs, groups, groups_proof_form, per_group, total_shots: groups * per_group, log_base: "e" })
}

/// Quote for `fragment` of a reduced graph (|F| and |E| count survivors and free edges).
pub fn theorem2_quote(
    reduced: &ReducedGraph,
    fragment: &Fragment,
    epsilon: f64,
    delta: f64,
    o_norm: f64,
    k_size: usize,
) -> Result<ComplexityQuote> {
    if reduced.fragment(fragment.id).is_none() {
        return Err(Error::Partition(format!("fragment {} is not in κ ∪ Γ", fragment.id)));
    }
    quote(QuoteInputs {
        epsilon,
        delta,
        n_fragments: reduced.fragments.len(),
        n_edges: reduced.n_free_edges(),
        k_size,
        kappa_gamma: reduced.kappa.len() + reduced.gamma.len(),
        deg: fragment.deg(),
        qdeg: fragment.qdeg(),
        o_norm,
    })
}

/// Leading-order standard deviation √n·ε of a product of `values.len()` estimates,
/// each perturbed by independent noise of standard deviation ε.
pub fn lemma2_product_std(values: &[f64], epsilon: f64) -> f64 {
    (values.len() as f64).sqrt() * epsilon
}

/// Exact standard deviation of the same product: √(Π(ε² + a_i²) − Π a_i²).
pub fn lemma2_product_std_exact(values: &[f64], epsilon: f64) -> f64 {
    let e2 = epsilon * epsilon;
    let with: f64 = values.iter().map(|a| e2 + a * a).product();
    let without: f64 = values.iter().map(|a| a * a).product();
    (with - without).sqrt()
}

fn empirical_std(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn perturbed_trials(n: usize, epsilon: f64, trials: usize, stream: SeedStream, combine: impl Fn(&[f64]) -> f64) -> f64 {
    let mut rng = stream.rng();
    let mut buf = vec![0.0; n];
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            for b in buf.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *b = 1.0 + epsilon * z;
            }
            combine(&buf)
        })
        .collect();
    empirical_std(&samples)
}

/// Empirical std of `Π â_i − 1` with `â_i = 1 + ε·z_i`, z_i standard normal.
pub fn lemma2_monte_carlo(n: usize, epsilon: f64, trials: usize, stream: SeedStream) -> f64 {
    perturbed_trials(n, epsilon, trials, stream, |a| a.iter().product::<f64>() - 1.0)
}

/// Empirical std of `Σ (â_i − 1)` under the same perturbation.
pub fn lemma2_sum_monte_carlo(n: usize, epsilon: f64, trials: usize, stream: SeedStream) -> f64 {
    perturbed_trials(n, epsilon, trials, stream, |a| a.iter().map(|x| x - 1.0).sum())
}
