//! Wick polynomials on `C^d`: finite sums of `(p, q)` monomials
//! `⟨z^∨q, b̃ z^∨p⟩`.
//!
//! A symbol is stored as its tensor coefficients. Algebra (products,
//! derivatives, substitution) goes through [`Monomials`], using that the
//! coefficient of `z̄^J z^I` is `sqrt(M(J) M(I)) · b̃_{J,I}` with `M` the
//! multinomial of an occupation vector.

mod json;
mod monomials;
mod tensor;

use std::collections::BTreeMap;

pub use json::{SymbolJson, TermJson};
pub use monomials::{Exponents, Monomials, SecondOrderOp};
pub use tensor::SymTensor;

use crate::error::{Error, Result};
use crate::multi_index::sector;
use crate::scalar::{c_real, CVector, Real, C};
use crate::symplectic::RLinearMap;

#[derive(Debug, Clone, PartialEq)]
pub struct PolySymbol<T: Real> {
    dim: usize,
    terms: BTreeMap<(usize, usize), SymTensor<T>>,
}

impl<T: Real> PolySymbol<T> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C<T>) -> Self {
        let mut t = SymTensor::zeros(dim, 0, 0);
        t.coeffs_mut()[(0, 0)] = c;
        Self::from_tensor(t)
    }

    pub fn from_tensor(t: SymTensor<T>) -> Self {
        let mut s = Self::zero(t.dim());
        s.terms.insert((t.in_degree(), t.out_degree()), t);
        s
    }

    /// Sum of tensors; tensors of equal type are added.
    pub fn from_tensors(dim: usize, tensors: impl IntoIterator<Item = SymTensor<T>>) -> Result<Self> {
        let mut s = Self::zero(dim);
        for t in tensors {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: t.dim() });
            }
            s = s.add(&Self::from_tensor(t));
        }
        Ok(s)
    }

    /// `|z|² = ⟨z, z⟩`.
    pub fn number(dim: usize) -> Self {
        Self::from_tensor(SymTensor::identity(dim, 1))
    }

    /// `⟨ξ, z⟩ = Σ conj(ξ_i) z_i`, a `(1, 0)` monomial.
    pub fn annihilation(xi: &CVector<T>) -> Self {
        let d = xi.len();
        let conj: Vec<C<T>> = xi.iter().map(|z| z.conj()).collect();
        let coeffs = crate::scalar::CMatrix::from_row_slice(1, d, &conj);
        Self::from_tensor(SymTensor::from_matrix(d, 1, 0, coeffs).expect("shape"))
    }

    /// `⟨z, ξ⟩ = Σ ξ_i conj(z_i)`, a `(0, 1)` monomial.
    pub fn creation(xi: &CVector<T>) -> Self {
        let d = xi.len();
        Self::from_tensor(
            SymTensor::from_matrix(d, 0, 1, crate::scalar::CMatrix::from_column_slice(d, 1, xi.as_slice()))
                .expect("shape"),
        )
    }

    /// `√2 Re⟨z, ξ⟩`.
    pub fn field(xi: &CVector<T>) -> Self {
        let s = c_real(T::lit(std::f64::consts::FRAC_1_SQRT_2));
        Self::creation(xi).add(&Self::annihilation(xi)).scaled(s)
    }

    /// `Im⟨β, z^∨2⟩` for `β` of type `(0 → 2)`.
    pub fn quadratic_im(beta: &SymTensor<T>) -> Result<Self> {
        if beta.in_degree() != 0 || beta.out_degree() != 2 {
            return Err(Error::MalformedSymbol("β must be a (0, 2) tensor".into()));
        }
        // Im w = (w − w̄)/(2i); ⟨β, z^∨2⟩ is the (2, 0) monomial with coefficient β*
        let w = Self::from_tensor(beta.adjoint());
        let half_i = C::new(T::zero(), T::lit(-0.5));
        Ok(w.sub(&w.conj()).scaled(half_i))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = &SymTensor<T>> {
        self.terms.values()
    }

    /// Set of `(p, q)` types present.
    pub fn types(&self) -> Vec<(usize, usize)> {
        self.terms.keys().copied().collect()
    }

    pub fn tensor(&self, p: usize, q: usize) -> Option<&SymTensor<T>> {
        self.terms.get(&(p, q))
    }

    /// `m = max(p + q)`, zero for the zero symbol.
    pub fn order(&self) -> usize {
        self.terms.keys().map(|&(p, q)| p + q).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ ‖b̃_{p,q}‖_op`.
    pub fn norm(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, t| acc + t.op_norm())
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, t| acc.max(crate::linalg::max_abs(t.coeffs())))
    }

    /// `‖self − other‖_P`.
    pub fn distance(&self, other: &Self) -> T {
        self.sub(other).norm()
    }

    pub fn evaluate(&self, z: &CVector<T>) -> Result<C<T>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut acc = C::new(T::zero(), T::zero());
        for t in self.terms.values() {
            acc += t.evaluate(z)?;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (key, t) in &other.terms {
            match out.terms.get_mut(key) {
                Some(existing) => *existing.coeffs_mut() += t.coeffs(),
                None => {
                    out.terms.insert(*key, t.clone());
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(c_real(-T::one())))
    }

    pub fn scaled(&self, s: C<T>) -> Self {
        let mut out = self.clone();
        for t in out.terms.values_mut() {
            *t.coeffs_mut() *= s;
        }
        out
    }

    /// The conjugate symbol `b̄`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for t in self.terms.values() {
            let a = t.adjoint();
            out.terms.insert((a.in_degree(), a.out_degree()), a);
        }
        out
    }

    /// Pointwise product `b1(z)·b2(z)`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Ok(Self::from_monomials(&self.to_monomials().product(&other.to_monomials())))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: d });
        }
        Ok(())
    }

    pub fn to_monomials(&self) -> Monomials<T> {
        let d = self.dim;
        let mut m = Monomials::zero(d);
        for t in self.terms.values() {
            let in_basis = sector(d, t.in_degree());
            let out_basis = sector(d, t.out_degree());
            for r in 0..out_basis.len() {
                for c in 0..in_basis.len() {
                    let v = t.coeffs()[(r, c)];
                    if v == C::new(T::zero(), T::zero()) {
                        continue;
                    }
                    let w = in_basis.sqrt_multinomial(c) * out_basis.sqrt_multinomial(r);
                    let mut key = in_basis.occupation(c).clone();
                    key.extend_from_slice(out_basis.occupation(r));
                    m.add_term(key, v * c_real(T::lit(w)));
                }
            }
        }
        m
    }

    pub fn from_monomials(m: &Monomials<T>) -> Self {
        let d = m.dim();
        let mut s = Self::zero(d);
        for (key, &v) in m.iter() {
            let (i, j) = key.split_at(d);
            let p = i.iter().map(|&e| e as usize).sum();
            let q = j.iter().map(|&e| e as usize).sum();
            let in_basis = sector(d, p);
            let out_basis = sector(d, q);
            let c = in_basis.index_of(i).expect("occupation in sector");
            let r = out_basis.index_of(j).expect("occupation in sector");
            let w = in_basis.sqrt_multinomial(c) * out_basis.sqrt_multinomial(r);
            let t = s.terms.entry((p, q)).or_insert_with(|| SymTensor::zeros(d, p, q));
            t.coeffs_mut()[(r, c)] += v / c_real(T::lit(w));
        }
        s
    }

    /// `∂_z̄^j ∂_z^k b(z)` as an operator `∨^k → ∨^j`: the entry at
    /// `(β, α)` is `sqrt(M(β) M(α)) ∂_z̄^β ∂_z^α b(z)`, so that pairing with
    /// `h^∨j` and `h'^∨k` gives the directional derivative.
    pub fn derivative(&self, j: usize, k: usize, z: &CVector<T>) -> Result<SymTensor<T>> {
        self.check_dim(z.len())?;
        let d = self.dim;
        let m = self.to_monomials();
        let out_basis = sector(d, j);
        let in_basis = sector(d, k);
        let mut t = SymTensor::zeros(d, k, j);
        for r in 0..out_basis.len() {
            for c in 0..in_basis.len() {
                let mut a = in_basis.occupation(c).clone();
                a.extend_from_slice(out_basis.occupation(r));
                let v = m.multi_derivative(&a).evaluate(z)?;
                let w = in_basis.sqrt_multinomial(c) * out_basis.sqrt_multinomial(r);
                t.coeffs_mut()[(r, c)] = v * c_real(T::lit(w));
            }
        }
        Ok(t)
    }

    /// `∂_z^k b1 · ∂_z̄^k b2 = Σ_{|a| = k} (k!/a!) ∂_z^a b1 ∂_z̄^a b2`.
    pub fn contract(&self, other: &Self, k: usize) -> Result<Self> {
        self.check_dim(other.dim)?;
        Ok(Self::from_monomials(&contract_monomials(&self.to_monomials(), &other.to_monomials(), k)))
    }

    /// `{b1, b2}^(k) = ∂_z^k b1 · ∂_z̄^k b2 − ∂_z^k b2 · ∂_z̄^k b1`.
    pub fn poisson_bracket(&self, other: &Self, k: usize) -> Result<Self> {
        self.check_dim(other.dim)?;
        let m1 = self.to_monomials();
        let m2 = other.to_monomials();
        let mut out = contract_monomials(&m1, &m2, k);
        out.add_scaled(&contract_monomials(&m2, &m1, k), c_real(-T::one()));
        Ok(Self::from_monomials(&out))
    }

    /// Numeric value of the bracket at `z`.
    pub fn poisson_bracket_at(&self, other: &Self, k: usize, z: &CVector<T>) -> Result<C<T>> {
        self.poisson_bracket(other, k)?.evaluate(z)
    }

    /// Symbol of `b1^Wick b2^Wick`: `Σ_k ε^k/k! ∂_z^k b1 · ∂_z̄^k b2`.
    pub fn wick_product(&self, other: &Self, epsilon: T) -> Result<Self> {
        self.check_dim(other.dim)?;
        let m1 = self.to_monomials();
        let m2 = other.to_monomials();
        let kmax = m1.total_degree().min(m2.total_degree());
        let mut out = Monomials::zero(self.dim);
        let mut weight = T::one();
        for k in 0..=kmax {
            if k > 0 {
                weight = weight * epsilon / T::of_usize(k);
            }
            out.add_scaled(&contract_monomials(&m1, &m2, k), c_real(weight));
        }
        Ok(Self::from_monomials(&out))
    }

    /// `b ∘ T`, obtained by substituting `z ↦ M_L z + M_A z̄` into every monomial.
    pub fn compose_rlinear(&self, t: &RLinearMap<T>) -> Result<Self> {
        self.check_dim(t.dim())?;
        Ok(Self::from_monomials(&self.to_monomials().substitute(&substitution_images(t))))
    }

    /// `z ↦ b(z₀ + z)`.
    pub fn translate(&self, z0: &CVector<T>) -> Result<Self> {
        self.check_dim(z0.len())?;
        let d = self.dim;
        let mut images: Vec<Monomials<T>> = Vec::with_capacity(2 * d);
        for x in 0..2 * d {
            let shift = if x < d { z0[x] } else { z0[x - d].conj() };
            let mut m = Monomials::variable(d, x);
            m.add_term(vec![0; 2 * d], shift);
            images.push(m);
        }
        Ok(Self::from_monomials(&self.to_monomials().substitute(&images)))
    }

    pub fn apply_second_order(&self, op: &SecondOrderOp<T>) -> Result<Self> {
        self.check_dim(op.dim())?;
        Ok(Self::from_monomials(&op.apply(&self.to_monomials())))
    }

    /// Drops tensors whose coefficients are all below `tol` in modulus.
    pub fn pruned(&self, tol: T) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, t| crate::linalg::max_abs(t.coeffs()) > tol);
        out
    }
}

/// Images of the `2d` variables under `z ↦ M_L z + M_A z̄`.
pub fn substitution_images<T: Real>(t: &RLinearMap<T>) -> Vec<Monomials<T>> {
    let d = t.dim();
    let (l, a) = (t.linear(), t.antilinear());
    let mut images = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut m = Monomials::zero(d);
        for j in 0..d {
            m.add_scaled(&Monomials::variable(d, j), l[(i, j)]);
            m.add_scaled(&Monomials::variable(d, d + j), a[(i, j)]);
        }
        images.push(m);
    }
    for i in 0..d {
        let m = images[i].conj();
        images.push(m);
    }
    images
}

pub(crate) fn contract_monomials<T: Real>(m1: &Monomials<T>, m2: &Monomials<T>, k: usize) -> Monomials<T> {
    let d = m1.dim();
    let mut out = Monomials::zero(d);
    if k == 0 {
        return m1.product(m2);
    }
    for (za, w) in monomials::weighted_z_multi_indices(d, k) {
        let d1 = m1.multi_derivative(&za);
        if d1.is_empty() {
            continue;
        }
        // same multi-index on the z̄ side
        let mut zb = vec![0u8; d];
        zb.extend_from_slice(&za[..d]);
        let d2 = m2.multi_derivative(&zb);
        if d2.is_empty() {
            continue;
        }
        out.add_scaled(&d1.product(&d2), c_real(T::lit(w)));
    }
    out
}
