//! Dense complex matrices and state vectors tagged with the basis they are
//! expressed in, plus the unitary Fourier transform linking the two bases.
//!
//! The Fourier kernel is `⟨p|q⟩ = e^{+2iπpq/N} / √N`; `W` maps position
//! amplitudes to momentum amplitudes.

use std::fmt;
use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    let (s, c) = theta.sin_cos();
    C64::new(c, s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    Momentum,
    Position,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Momentum => "p",
            Representation::Position => "q",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub(crate) fn check_power_of_two(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

fn check_same_repr(expected: Representation, found: Representation) -> Result<()> {
    if expected != found {
        return Err(Error::RepresentationMismatch { expected, found });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    repr: Representation,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, repr: Representation) -> Self {
        StateVector { amps, repr }
    }

    pub fn basis(dim: usize, index: usize, repr: Representation) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        StateVector { amps, repr }
    }

    pub fn uniform(dim: usize, repr: Representation) -> Self {
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector {
            amps: vec![a; dim],
            repr,
        }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// Number of qubits when the length is a power of two.
    pub fn n_qubits(&self) -> Result<u32> {
        check_power_of_two(self.amps.len())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_same_repr(self.repr, other.repr)?;
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Re-express in the other basis via `W` or `W†`.
    pub fn to_representation(&self, target: Representation) -> Result<StateVector> {
        if target == self.repr {
            return Ok(self.clone());
        }
        let fourier = Fourier::new(self.len())?;
        let mut amps = self.amps.clone();
        match target {
            Representation::Momentum => fourier.to_momentum(&mut amps),
            Representation::Position => fourier.to_position(&mut amps),
        }
        Ok(StateVector { amps, repr: target })
    }
}

/// Square complex matrix with a basis tag.
#[derive(Clone, Debug)]
pub struct ComplexMatrix {
    mat: Mat<C64>,
    repr: Representation,
}

impl PartialEq for ComplexMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr
            && self.dim() == other.dim()
            && (0..self.dim()).all(|j| self.mat.col_as_slice(j) == other.mat.col_as_slice(j))
    }
}

impl ComplexMatrix {
    pub fn from_mat(mat: Mat<C64>, repr: Representation) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        Ok(ComplexMatrix { mat, repr })
    }

    pub fn from_fn(dim: usize, repr: Representation, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix {
            mat: Mat::from_fn(dim, dim, f),
            repr,
        }
    }

    pub fn zeros(dim: usize, repr: Representation) -> Self {
        ComplexMatrix {
            mat: Mat::zeros(dim, dim),
            repr,
        }
    }

    pub fn identity(dim: usize, repr: Representation) -> Self {
        Self::from_fn(dim, repr, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diagonal(diag: &[C64], repr: Representation) -> Self {
        Self::from_fn(diag.len(), repr, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn as_mat_mut(&mut self) -> &mut Mat<C64> {
        &mut self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.mat[(row, col)] = value;
    }

    pub fn column(&self, col: usize) -> StateVector {
        StateVector::new(self.mat.col_as_slice(col).to_vec(), self.repr)
    }

    pub fn column_slice(&self, col: usize) -> &[C64] {
        self.mat.col_as_slice(col)
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix {
            mat: self.mat.adjoint().to_owned(),
            repr: self.repr,
        }
    }

    /// `self · rhs`, both in the same representation.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_same_repr(self.repr, rhs.repr)?;
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rhs.dim(),
            });
        }
        let n = self.dim();
        let mut out = Mat::<C64>::zeros(n, n);
        matmul(
            out.as_mut(),
            Accum::Replace,
            self.mat.as_ref(),
            rhs.mat.as_ref(),
            ONE,
            Par::Seq,
        );
        Ok(ComplexMatrix {
            mat: out,
            repr: self.repr,
        })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_same_repr(self.repr, psi.repr)?;
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let n = self.dim();
        let mut out = vec![ZERO; n];
        for (j, &x) in psi.amps.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.mat.col_as_slice(j)) {
                *o += m * x;
            }
        }
        Ok(StateVector::new(out, self.repr))
    }

    /// `max |U†U − I|` over all entries.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        let mut g = Mat::<C64>::zeros(n, n);
        matmul(
            g.as_mut(),
            Accum::Replace,
            self.mat.adjoint(),
            self.mat.as_ref(),
            ONE,
            Par::Seq,
        );
        let mut worst = 0.0f64;
        for j in 0..n {
            for (i, &v) in g.col_as_slice(j).iter().enumerate() {
                let d = if i == j { v - ONE } else { v };
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim().min(other.dim()) {
            for (a, b) in self.mat.col_as_slice(j).iter().zip(other.mat.col_as_slice(j)) {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation after removing the best global phase,
    /// aligned on the largest-modulus entry of `self`.
    pub fn max_abs_diff_up_to_phase(&self, other: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let (mut bi, mut bj, mut best) = (0, 0, -1.0);
        for j in 0..n {
            for (i, a) in self.mat.col_as_slice(j).iter().enumerate() {
                if a.norm() > best {
                    best = a.norm();
                    bi = i;
                    bj = j;
                }
            }
        }
        let a = self.get(bi, bj);
        let b = other.get(bi, bj);
        let phase = if b.norm() == 0.0 { ONE } else { (a / b) / (a / b).norm() };
        let mut worst = 0.0f64;
        for j in 0..n {
            for (x, y) in self.mat.col_as_slice(j).iter().zip(other.mat.col_as_slice(j)) {
                worst = worst.max((x - y * phase).norm());
            }
        }
        worst
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }

    pub fn from_row_major(dim: usize, data: &[C64], repr: Representation) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self::from_fn(dim, repr, |i, j| data[i * dim + j]))
    }

    /// Re-express the operator in the other basis: `U_q = W† U_p W`,
    /// `U_p = W U_q W†`. Uses FFTs along columns and rows.
    pub fn to_representation(&self, target: Representation) -> Result<ComplexMatrix> {
        if target == self.repr {
            return Ok(self.clone());
        }
        let n = self.dim();
        let fourier = Fourier::new(n)?;
        let mut mat = self.mat.clone();
        // Left factor acts on columns, right factor on rows.
        for j in 0..n {
            let col = mat.col_as_slice_mut(j);
            match target {
                Representation::Position => fourier.to_position(col),
                Representation::Momentum => fourier.to_momentum(col),
            }
        }
        let mut row = vec![ZERO; n];
        for i in 0..n {
            for (j, r) in row.iter_mut().enumerate() {
                *r = mat[(i, j)];
            }
            // (X W)_ij = Σ_k X_ik W_kj, and W is symmetric, so row·W = W·row.
            match target {
                Representation::Position => fourier.to_momentum(&mut row),
                Representation::Momentum => fourier.to_position(&mut row),
            }
            for (j, r) in row.iter().enumerate() {
                mat[(i, j)] = *r;
            }
        }
        Ok(ComplexMatrix { mat, repr: target })
    }
}

/// Cached FFT plans for the unitary DFT `W` of one size.
#[derive(Clone)]
pub struct Fourier {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl Fourier {
    pub fn new(len: usize) -> Result<Self> {
        check_power_of_two(len)?;
        let mut planner = FftPlanner::new();
        Ok(Fourier {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: 1.0 / (len as f64).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In place `ψ ← W ψ` (position amplitudes to momentum amplitudes).
    pub fn to_momentum(&self, buf: &mut [C64]) {
        // rustfft's inverse transform carries the e^{+2iπkn/N} kernel.
        self.inverse.process(buf);
        for x in buf.iter_mut() {
            *x *= self.scale;
        }
    }

    /// In place `ψ ← W† ψ`.
    pub fn to_position(&self, buf: &mut [C64]) {
        self.forward.process(buf);
        for x in buf.iter_mut() {
            *x *= self.scale;
        }
    }
}

/// Dense `W` with entries `e^{+2iπpq/N}/√N`, for oracles and small sizes.
pub fn dense_fourier(dim: usize) -> ComplexMatrix {
    let scale = 1.0 / (dim as f64).sqrt();
    ComplexMatrix::from_fn(dim, Representation::Momentum, |p, q| {
        let k = (p * q) % dim;
        cis(2.0 * std::f64::consts::PI * k as f64 / dim as f64) * scale
    })
}
