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

//! Dense statevector and density-matrix simulation for desk-scale circuits.
//!
//! Qubit `q` of an `n`-qubit register is stored at bit `n - 1 - q` of the
//! amplitude index, so qubit 0 is the most significant factor of the tensor
//! product. Multi-qubit gate matrices follow the same convention over the
//! listed wires: the first wire is the most significant bit of the gate index.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString};
use crate::rng::SeedStream;

pub type C64 = Complex64;

/// Largest register a [`Statevector`] may hold.
pub const MAX_STATE_QUBITS: usize = 14;
/// Largest register a [`DensityMatrix`] may hold.
pub const MAX_DENSITY_QUBITS: usize = 8;
/// Largest gate produced by [`haar_random_unitary`].
pub const MAX_HAAR_QUBITS: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(ComplexMatrix { rows: rows.len(), cols, data: rows.iter().flatten().copied().collect() })
    }

    /// Builds a matrix from separate real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() || re.iter().zip(im).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::Dimension("real and imaginary parts differ in shape".into()));
        }
        let rows: Vec<Vec<C64>> =
            re.iter().zip(im).map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| C64::new(x, y)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Number of qubits a square power-of-two matrix acts on.
    pub fn n_qubits(&self) -> Option<usize> {
        (self.is_square() && self.rows.is_power_of_two()).then(|| self.rows.trailing_zeros() as usize)
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            self.get(r / other.rows, c / other.cols) * other.get(r % other.rows, c % other.cols)
        })
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("cannot add matrices of different shape".into()));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// max |U†U − I| entry.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.adjoint().matmul(self).expect("square");
        prod.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }
}

/// Fixed gate matrices used by named gates and basis rotations.
pub mod gates {
    use super::{ComplexMatrix, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn m(rows: &[&[(f64, f64)]]) -> ComplexMatrix {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&(a, b)| C64::new(a, b)).collect()).collect();
        ComplexMatrix::from_rows(&rows).expect("static gate")
    }

    pub fn i() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }
    pub fn h() -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        m(&[&[(s, 0.), (s, 0.)], &[(s, 0.), (-s, 0.)]])
    }
    pub fn x() -> ComplexMatrix {
        m(&[&[(0., 0.), (1., 0.)], &[(1., 0.), (0., 0.)]])
    }
    pub fn y() -> ComplexMatrix {
        m(&[&[(0., 0.), (0., -1.)], &[(0., 1.), (0., 0.)]])
    }
    pub fn z() -> ComplexMatrix {
        m(&[&[(1., 0.), (0., 0.)], &[(0., 0.), (-1., 0.)]])
    }
    pub fn s() -> ComplexMatrix {
        m(&[&[(1., 0.), (0., 0.)], &[(0., 0.), (0., 1.)]])
    }
    pub fn sdg() -> ComplexMatrix {
        m(&[&[(1., 0.), (0., 0.)], &[(0., 0.), (0., -1.)]])
    }
    pub fn t() -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        m(&[&[(1., 0.), (0., 0.)], &[(0., 0.), (s, s)]])
    }
    pub fn tdg() -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        m(&[&[(1., 0.), (0., 0.)], &[(0., 0.), (s, -s)]])
    }
    /// Control is the first wire.
    pub fn cnot() -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            g.set(r, c, C64::new(1.0, 0.0));
        }
        g
    }
    pub fn cz() -> ComplexMatrix {
        let mut g = ComplexMatrix::identity(4);
        g.set(3, 3, C64::new(-1.0, 0.0));
        g
    }
    pub fn swap() -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            g.set(r, c, C64::new(1.0, 0.0));
        }
        g
    }
}

/// Haar-random unitary on `n_qubits` qubits.
///
/// Draws a complex Ginibre matrix and orthonormalises its columns with
/// Gram-Schmidt (two passes). The resulting `R` factor has a positive real
/// diagonal, which is the phase fix that makes `Q` Haar distributed.
pub fn haar_random_unitary(n_qubits: usize, stream: SeedStream) -> Result<ComplexMatrix> {
    if n_qubits == 0 || n_qubits > MAX_HAAR_QUBITS {
        return Err(Error::SizeLimit { what: "Haar-random gates", requested: n_qubits, limit: MAX_HAAR_QUBITS });
    }
    let dim = 1usize << n_qubits;
    let mut rng = stream.rng();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // column-major working copy
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    for j in 0..dim {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: C64 = cols[k].iter().zip(&cols[j]).map(|(q, v)| q.conj() * v).sum();
                let (done, rest) = cols.split_at_mut(j);
                for (v, q) in rest[0].iter_mut().zip(&done[k]) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r]))
}

fn check_wires(n_qubits: usize, wires: &[usize]) -> Result<()> {
    for (i, &w) in wires.iter().enumerate() {
        if w >= n_qubits {
            return Err(Error::QubitOutOfRange { index: w, n_qubits });
        }
        if wires[..i].contains(&w) {
            return Err(Error::DuplicateWire(w));
        }
    }
    Ok(())
}

/// Pure state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_STATE_QUBITS {
            return Err(Error::SizeLimit { what: "statevectors", requested: n_qubits, limit: MAX_STATE_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No normalisation is applied.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Dimension(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        if n_qubits > MAX_STATE_QUBITS {
            return Err(Error::SizeLimit { what: "statevectors", requested: n_qubits, limit: MAX_STATE_QUBITS });
        }
        Ok(Statevector { n_qubits, amps })
    }

    /// Normalised random state with i.i.d. Gaussian amplitudes (uniform on the sphere).
    pub fn random(n_qubits: usize, stream: SeedStream) -> Result<Self> {
        let mut sv = Self::zero(n_qubits)?;
        let mut rng = stream.rng();
        for a in sv.amps.iter_mut() {
            *a = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        let norm = sv.norm();
        for a in sv.amps.iter_mut() {
            *a /= norm;
        }
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Returns `gate` applied to `wires`, identity elsewhere.
    pub fn apply_gate(&self, gate: &ComplexMatrix, wires: &[usize]) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, wires)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &ComplexMatrix, wires: &[usize]) -> Result<()> {
        check_wires(self.n_qubits, wires)?;
        let k = wires.len();
        if gate.rows() != 1 << k || gate.cols() != 1 << k {
            return Err(Error::Dimension(format!("{}x{} gate on {} wires", gate.rows(), gate.cols(), k)));
        }
        if k == 1 {
            self.apply_single(gate, wires[0]);
            return Ok(());
        }
        let n = self.n_qubits;
        let bits: Vec<usize> = wires.iter().map(|&w| 1usize << (n - 1 - w)).collect();
        let wire_mask: usize = bits.iter().sum();
        let dim = 1usize << k;
        let offsets: Vec<usize> =
            (0..dim).map(|j| (0..k).filter(|&t| j & (1 << (k - 1 - t)) != 0).map(|t| bits[t]).sum()).collect();
        let mut buf = vec![ZERO; dim];
        for base in 0..self.amps.len() {
            if base & wire_mask != 0 {
                continue;
            }
            for (b, &o) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base | o];
            }
            for (r, &o) in offsets.iter().enumerate() {
                let row = &gate.data()[r * dim..(r + 1) * dim];
                self.amps[base | o] = row.iter().zip(&buf).map(|(g, v)| g * v).sum();
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, gate: &ComplexMatrix, wire: usize) {
        let bit = 1usize << (self.n_qubits - 1 - wire);
        let (g00, g01, g10, g11) = (gate.get(0, 0), gate.get(0, 1), gate.get(1, 0), gate.get(1, 1));
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let a0 = self.amps[i];
            let a1 = self.amps[i | bit];
            self.amps[i] = g00 * a0 + g01 * a1;
            self.amps[i | bit] = g10 * a0 + g11 * a1;
        }
    }

    /// Born probabilities after rotating every qubit into its requested Pauli eigenbasis.
    ///
    /// Index `i` of the result is the computational-basis outcome with the usual bit order;
    /// bit value 0 corresponds to the +1 eigenvector of the measured axis.
    pub fn rotated_probabilities(&self, bases: &[Axis]) -> Result<Vec<f64>> {
        if bases.len() != self.n_qubits {
            return Err(Error::Dimension(format!("{} bases for a {}-qubit register", bases.len(), self.n_qubits)));
        }
        let mut rotated = self.clone();
        let h = gates::h();
        let hsdg = gates::h().matmul(&gates::sdg()).expect("2x2");
        for (q, axis) in bases.iter().enumerate() {
            match axis {
                Axis::X => rotated.apply_single(&h, q),
                Axis::Y => rotated.apply_single(&hsdg, q),
                Axis::Z => {}
            }
        }
        Ok(rotated.amps.iter().map(C64::norm_sqr).collect())
    }

    /// ⟨ψ|P|ψ⟩ including the string's coefficient.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        let masks = p.masks(self.n_qubits)?;
        let mut acc = ZERO;
        for (j, &a) in self.amps.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let sign = if (j & masks.phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[j ^ masks.flip].conj() * a * sign;
        }
        Ok((acc * masks.i_power()).re * p.coeff())
    }
}

/// Splits `n` shots into outcome draws from a cumulative distribution.
fn sample_index(cdf: &[f64], u: f64) -> usize {
    let target = u * cdf.last().copied().unwrap_or(1.0);
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

/// Cumulative distribution of a probability vector.
pub(crate) fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// Draws one ±1 outcome string from a cumulative distribution over a register.
pub(crate) fn draw_outcome(cdf: &[f64], n_qubits: usize, u: f64) -> Vec<i8> {
    let idx = sample_index(cdf, u);
    (0..n_qubits).map(|q| if idx & (1 << (n_qubits - 1 - q)) == 0 { 1 } else { -1 }).collect()
}

/// Measures every qubit in the given Pauli bases, `shots` times.
///
/// Outcome `+1` means the qubit was found in the +1 eigenstate (computational `|0⟩` after rotation).
pub fn sample_in_bases(state: &Statevector, bases: &[Axis], shots: usize, stream: SeedStream) -> Result<Vec<Vec<i8>>> {
    let cdf = cumulative(&state.rotated_probabilities(bases)?);
    let mut rng = stream.rng();
    Ok((0..shots).map(|_| draw_outcome(&cdf, state.n_qubits, rng.random::<f64>())).collect())
}

/// ⟨ψ|P|ψ⟩ for a single Pauli string.
pub fn exact_expectation(state: &Statevector, observable: &PauliString) -> Result<f64> {
    state.expectation(observable)
}

/// Mixed state (or unit-trace Choi matrix) of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = matrix
            .n_qubits()
            .ok_or_else(|| Error::Dimension("density matrix must be square with power-of-two size".into()))?;
        if n_qubits > MAX_DENSITY_QUBITS {
            return Err(Error::SizeLimit { what: "density matrices", requested: n_qubits, limit: MAX_DENSITY_QUBITS });
        }
        Ok(DensityMatrix { n_qubits, matrix })
    }

    /// |ψ⟩⟨ψ|.
    pub fn from_pure(state: &Statevector) -> Result<Self> {
        if state.n_qubits() > MAX_DENSITY_QUBITS {
            return Err(Error::SizeLimit {
                what: "density matrices",
                requested: state.n_qubits(),
                limit: MAX_DENSITY_QUBITS,
            });
        }
        let a = state.amplitudes();
        let dim = a.len();
        Self::from_matrix(ComplexMatrix::from_fn(dim, dim, |r, c| a[r] * a[c].conj()))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.data().iter().map(C64::norm_sqr).sum()
    }

    /// tr(Pρ) including the string's coefficient.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        let masks = p.masks(self.n_qubits)?;
        let dim = 1usize << self.n_qubits;
        let mut acc = ZERO;
        for k in 0..dim {
            let sign = if (k & masks.phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.matrix.get(k, k ^ masks.flip) * sign;
        }
        Ok((acc * masks.i_power()).re * p.coeff())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn approx_state(a: &Statevector, b: &[C64], tol: f64) -> bool {
        a.amplitudes().iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn hadamard_on_first_wire() {
        let s = Statevector::zero(2).unwrap().apply_gate(&gates::h(), &[0]).unwrap();
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(approx_state(&s, &[r, ZERO, r, ZERO], 1e-12));
    }

    #[test]
    fn bell_preparation() {
        let s = Statevector::zero(2)
            .unwrap()
            .apply_gate(&gates::h(), &[0])
            .unwrap()
            .apply_gate(&gates::cnot(), &[0, 1])
            .unwrap();
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(approx_state(&s, &[r, ZERO, ZERO, r], 1e-12));
    }

    #[test]
    fn identity_gate_leaves_state_unchanged() {
        let s = Statevector::random(3, SeedStream::new(5)).unwrap();
        let out = s.apply_gate(&ComplexMatrix::identity(4), &[2, 0]).unwrap();
        assert!(approx_state(&out, s.amplitudes(), 1e-12));
    }

    #[test]
    fn reversed_wire_order_matches_swapped_gate() {
        // CNOT with control on wire 1 equals SWAP·CNOT·SWAP
        let s = Statevector::random(2, SeedStream::new(1)).unwrap();
        let a = s.apply_gate(&gates::cnot(), &[1, 0]).unwrap();
        let b = s
            .apply_gate(&gates::swap(), &[0, 1])
            .unwrap()
            .apply_gate(&gates::cnot(), &[0, 1])
            .unwrap()
            .apply_gate(&gates::swap(), &[0, 1])
            .unwrap();
        assert!(approx_state(&a, b.amplitudes(), 1e-12));
    }

    #[test]
    fn gate_errors() {
        let s = Statevector::zero(2).unwrap();
        assert!(matches!(s.apply_gate(&gates::cnot(), &[0, 0]), Err(Error::DuplicateWire(0))));
        assert!(matches!(s.apply_gate(&gates::cnot(), &[0]), Err(Error::Dimension(_))));
        assert!(matches!(s.apply_gate(&gates::h(), &[2]), Err(Error::QubitOutOfRange { index: 2, .. })));
        assert!(Statevector::zero(MAX_STATE_QUBITS + 1).unwrap_err().is_size_limit());
    }

    #[test]
    fn haar_is_unitary_and_deterministic() {
        let u = haar_random_unitary(1, SeedStream::new(7)).unwrap();
        assert!(u.unitarity_error() <= 1e-10);
        let a = haar_random_unitary(2, SeedStream::new(7)).unwrap();
        let b = haar_random_unitary(2, SeedStream::new(7)).unwrap();
        assert_eq!(a, b);
        for seed in 0..100 {
            let n = 1 + (seed as usize % 4);
            let u = haar_random_unitary(n, SeedStream::new(seed)).unwrap();
            assert!(u.unitarity_error() <= 1e-10, "seed {seed}");
        }
        assert!(haar_random_unitary(0, SeedStream::new(0)).unwrap_err().is_size_limit());
        assert!(haar_random_unitary(5, SeedStream::new(0)).unwrap_err().is_size_limit());
    }

    #[test]
    fn haar_marginal_mean() {
        // E|U_00|^2 = 1/2 for 2x2 Haar unitaries
        let root = SeedStream::new(2024);
        let mean =
            (0..10_000).map(|i| haar_random_unitary(1, root.child(i)).unwrap().get(0, 0).norm_sqr()).sum::<f64>()
                / 10_000.0;
        assert!((mean - 0.5).abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn norm_preserved_over_random_gates() {
        let root = SeedStream::new(99);
        for i in 0..1000u64 {
            let s = Statevector::random(4, root.derive(&[i, 0])).unwrap();
            let k = 1 + (i as usize % 3);
            let u = haar_random_unitary(k, root.derive(&[i, 1])).unwrap();
            let wires: Vec<usize> = (0..k).map(|t| (t + i as usize) % 4).collect();
            let out = s.apply_gate(&u, &wires).unwrap();
            assert!((out.norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn eigenstates_sample_deterministically() {
        let zero = Statevector::zero(1).unwrap();
        let out = sample_in_bases(&zero, &[Axis::Z], 100, SeedStream::new(1)).unwrap();
        assert!(out.iter().all(|o| o == &[1]));
        let plus = zero.apply_gate(&gates::h(), &[0]).unwrap();
        let out = sample_in_bases(&plus, &[Axis::X], 100, SeedStream::new(1)).unwrap();
        assert!(out.iter().all(|o| o == &[1]));
        let plus_i = plus.apply_gate(&gates::s(), &[0]).unwrap();
        let out = sample_in_bases(&plus_i, &[Axis::Y], 100, SeedStream::new(1)).unwrap();
        assert!(out.iter().all(|o| o == &[1]));
    }

    #[test]
    fn x_on_zero_is_unbiased() {
        let zero = Statevector::zero(1).unwrap();
        let out = sample_in_bases(&zero, &[Axis::X], 10_000, SeedStream::new(3)).unwrap();
        let mean = out.iter().map(|o| o[0] as f64).sum::<f64>() / 10_000.0;
        assert!(mean.abs() <= 0.05, "mean {mean}");
    }

    #[test]
    fn sampling_matches_exact_expectation() {
        let s = Statevector::random(3, SeedStream::new(11)).unwrap();
        let shots = 100_000;
        for (q, axis) in [(0, Axis::X), (1, Axis::Y), (2, Axis::Z)] {
            let mut bases = vec![Axis::Z; 3];
            bases[q] = axis;
            let out = sample_in_bases(&s, &bases, shots, SeedStream::new(q as u64)).unwrap();
            let mean = out.iter().map(|o| o[q] as f64).sum::<f64>() / shots as f64;
            let exact = s.expectation(&PauliString::single(q, axis)).unwrap();
            assert!((mean - exact).abs() <= 5.0 / (shots as f64).sqrt(), "{axis:?}: {mean} vs {exact}");
        }
    }

    #[test]
    fn ghz_expectations() {
        let ghz = Statevector::zero(3)
            .unwrap()
            .apply_gate(&gates::h(), &[0])
            .unwrap()
            .apply_gate(&gates::cnot(), &[0, 1])
            .unwrap()
            .apply_gate(&gates::cnot(), &[1, 2])
            .unwrap();
        let xxx: PauliString = "X1 X2 X3".parse().unwrap();
        let zzz: PauliString = "Z1 Z2 Z3".parse().unwrap();
        assert!((exact_expectation(&ghz, &xxx).unwrap() - 1.0).abs() <= 1e-10);
        assert!(exact_expectation(&ghz, &zzz).unwrap().abs() <= 1e-10);
        let id = PauliString::identity();
        let r = Statevector::random(5, SeedStream::new(8)).unwrap();
        assert!((exact_expectation(&r, &id).unwrap() - 1.0).abs() <= 1e-10);
        let bad: PauliString = "X4".parse().unwrap();
        assert!(exact_expectation(&ghz, &bad).is_err());
    }

    #[test]
    fn density_matrix_agrees_with_statevector() {
        let s = Statevector::random(3, SeedStream::new(21)).unwrap();
        let rho = DensityMatrix::from_pure(&s).unwrap();
        assert!((rho.trace() - 1.0).abs() <= 1e-10);
        assert!(rho.matrix().hermiticity_error() <= 1e-10);
        assert!((rho.purity() - 1.0).abs() <= 1e-10);
        for text in ["X1 Y2", "Y1 Y2 Z3", "Z2", "Y3", "X1 X2 X3"] {
            let p: PauliString = text.parse().unwrap();
            let a = s.expectation(&p).unwrap();
            let b = rho.expectation(&p).unwrap();
            let dense = p.to_dense(3).unwrap();
            let c = dense.matmul(rho.matrix()).unwrap().trace();
            assert!((a - b).abs() <= 1e-12 && (b - c.re).abs() <= 1e-12, "{text}");
            assert!(c.im.abs() <= 1e-12);
        }
    }
}
