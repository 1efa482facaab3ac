//! Truncated bosonic Fock space `⊕_{n ≤ N_max} ∨ⁿ C^d` used as a brute-force
//! oracle for the symbol-level engines.
//!
//! Operators are stored as blocks between particle-number sectors, in the
//! same occupation bases as [`crate::poly::SymTensor`].

mod estimates;
mod oracle;
mod quantum;
mod wick;

use std::collections::BTreeMap;
use std::ops::Range;

pub use estimates::{check_estimates, check_growth, EstimateReport, GrowthReport};
pub use oracle::{conjugation_oracle, trusted_block, OracleOutcome};
pub use quantum::{conjugate_observable, quantum_flow, QuantumFlow, QuantumFlowConfig};
pub use wick::{
    field_and_weyl, gamma_u, symmetrized_extension, symmetrized_extension_reference, wick_block_factor, wick_quantize,
};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, op_norm};
use crate::multi_index::sector_dim;
use crate::scalar::{CMatrix, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace<T: Real> {
    dim: usize,
    n_max: usize,
    epsilon: T,
    sector_dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl<T: Real> FockSpace<T> {
    pub fn new(dim: usize, n_max: usize, epsilon: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFockSpace("dim must be positive".into()));
        }
        if !(epsilon > T::zero()) {
            return Err(Error::InvalidFockSpace(format!("ε = {} must be positive", epsilon.to_f64_lossy())));
        }
        let sector_dims: Vec<usize> = (0..=n_max).map(|n| sector_dim(dim, n)).collect();
        let mut offsets = Vec::with_capacity(n_max + 2);
        offsets.push(0);
        for s in &sector_dims {
            offsets.push(offsets.last().expect("non-empty") + s);
        }
        Ok(Self { dim, n_max, epsilon, sector_dims, offsets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn sector_dims(&self) -> &[usize] {
        &self.sector_dims
    }

    pub fn total_dim(&self) -> usize {
        self.offsets[self.n_max + 1]
    }

    /// Dimension of the sectors `0..=n`.
    pub fn dim_up_to(&self, n: usize) -> usize {
        self.offsets[n.min(self.n_max) + 1]
    }

    /// Row range of sector `n` in the dense representation.
    pub fn range(&self, n: usize) -> Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    /// The same space cut at a lower `n_max`.
    pub fn truncated(&self, n_max: usize) -> Self {
        Self::new(self.dim, n_max.min(self.n_max), self.epsilon).expect("already validated")
    }

    /// Particle number `n` of every dense index.
    pub fn sector_of_index(&self) -> Vec<usize> {
        (0..=self.n_max).flat_map(|n| std::iter::repeat_n(n, self.sector_dims[n])).collect()
    }
}

/// Operator on a truncated Fock space as a map `(n_out, n_in) → block`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T: Real> {
    space: FockSpace<T>,
    blocks: BTreeMap<(usize, usize), CMatrix<T>>,
}

impl<T: Real> FockOperator<T> {
    pub fn zero(space: &FockSpace<T>) -> Self {
        Self { space: space.clone(), blocks: BTreeMap::new() }
    }

    pub fn identity(space: &FockSpace<T>) -> Self {
        let mut op = Self::zero(space);
        for n in 0..=space.n_max {
            let s = space.sector_dims[n];
            op.blocks.insert((n, n), CMatrix::identity(s, s));
        }
        op
    }

    /// Splits a dense matrix into sector blocks, dropping exact-zero blocks.
    pub fn from_dense(space: &FockSpace<T>, m: &CMatrix<T>) -> Result<Self> {
        let d = space.total_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
        }
        let mut op = Self::zero(space);
        for no in 0..=space.n_max {
            for ni in 0..=space.n_max {
                let (ro, ri) = (space.range(no), space.range(ni));
                let block = m.view((ro.start, ri.start), (ro.len(), ri.len())).into_owned();
                if block.iter().any(|z| z.re != T::zero() || z.im != T::zero()) {
                    op.blocks.insert((no, ni), block);
                }
            }
        }
        Ok(op)
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let d = self.space.total_dim();
        let mut m = CMatrix::zeros(d, d);
        for (&(no, ni), b) in &self.blocks {
            let (ro, ri) = (self.space.range(no), self.space.range(ni));
            m.view_mut((ro.start, ri.start), (ro.len(), ri.len())).copy_from(b);
        }
        m
    }

    pub fn space(&self) -> &FockSpace<T> {
        &self.space
    }

    pub fn block(&self, n_out: usize, n_in: usize) -> Option<&CMatrix<T>> {
        self.blocks.get(&(n_out, n_in))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &CMatrix<T>)> {
        self.blocks.iter()
    }

    /// `block(n_out, n_in) += m`.
    pub fn add_block(&mut self, n_out: usize, n_in: usize, m: &CMatrix<T>) {
        match self.blocks.get_mut(&(n_out, n_in)) {
            Some(b) => *b += m,
            None => {
                self.blocks.insert((n_out, n_in), m.clone());
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(no, ni), b) in &other.blocks {
            out.add_block(no, ni, b);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C::new(-T::one(), T::zero())))
    }

    pub fn scaled(&self, s: C<T>) -> Self {
        let mut out = self.clone();
        for b in out.blocks.values_mut() {
            *b *= s;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let blocks = self.blocks.iter().map(|(&(no, ni), b)| ((ni, no), b.adjoint())).collect();
        Self { space: self.space.clone(), blocks }
    }

    /// Truncated product `self · other` (sectors above `N_max` are lost).
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.space);
        for (&(no, k), a) in &self.blocks {
            for (&(k2, ni), b) in other.blocks.range((k, 0)..=(k, usize::MAX)) {
                debug_assert_eq!(k, k2);
                out.add_block(no, ni, &(a * b));
            }
        }
        out
    }

    /// `self · X` for a dense block of columns `X` with `total_dim` rows.
    pub fn apply(&self, x: &CMatrix<T>) -> CMatrix<T> {
        let mut y = CMatrix::zeros(x.nrows(), x.ncols());
        for (&(no, ni), b) in &self.blocks {
            let (ro, ri) = (self.space.range(no), self.space.range(ni));
            let src = x.rows(ri.start, ri.len());
            let mut dst = y.rows_mut(ro.start, ro.len());
            dst.gemm(C::new(T::one(), T::zero()), b, &src, C::new(T::one(), T::zero()));
        }
        y
    }

    /// Restriction to the sectors `0..=n` (an operator on the smaller space).
    pub fn restricted(&self, n: usize) -> Self {
        let space = self.space.truncated(n);
        let blocks =
            self.blocks.iter().filter(|(&(no, ni), _)| no <= n && ni <= n).map(|(k, b)| (*k, b.clone())).collect();
        Self { space, blocks }
    }

    /// Largest matrix-element modulus.
    pub fn max_abs(&self) -> T {
        self.blocks.values().fold(T::zero(), |acc, b| acc.max(max_abs(b)))
    }

    /// Largest matrix-element difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.sub(other).max_abs()
    }

    pub fn op_norm(&self) -> T {
        op_norm(&self.to_dense())
    }
}
