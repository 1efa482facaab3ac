//! Polynomials in `(z, z̄)` in the plain monomial basis `z^I z̄^J`.
//!
//! This is the working representation for products, derivatives and
//! substitutions; [`super::PolySymbol`] converts to and from it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::multi_index::factorial;
use crate::scalar::{c_real, CMatrix, CVector, Real, C};

/// Exponent key of length `2d`: `z` exponents first, then `z̄` exponents.
pub type Exponents = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomials<T: Real> {
    dim: usize,
    terms: BTreeMap<Exponents, C<T>>,
}

impl<T: Real> Monomials<T> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C<T>) -> Self {
        let mut m = Self::zero(dim);
        m.add_term(vec![0; 2 * dim], c);
        m
    }

    /// The single variable `z_i` (`x < d`) or `z̄_{i}` (`x = d + i`).
    pub fn variable(dim: usize, x: usize) -> Self {
        let mut key = vec![0; 2 * dim];
        key[x] = 1;
        let mut m = Self::zero(dim);
        m.add_term(key, c_real(T::one()));
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exponents, &C<T>)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, key: Exponents, c: C<T>) {
        if c == C::new(T::zero(), T::zero()) {
            return;
        }
        let slot = self.terms.entry(key).or_insert(C::new(T::zero(), T::zero()));
        *slot += c;
    }

    /// `self += s·other`.
    pub fn add_scaled(&mut self, other: &Self, s: C<T>) {
        for (k, &v) in &other.terms {
            self.add_term(k.clone(), v * s);
        }
    }

    pub fn scaled(&self, s: C<T>) -> Self {
        let mut out = Self::zero(self.dim);
        out.add_scaled(self, s);
        out
    }

    pub fn total_degree(&self) -> usize {
        self.terms.keys().map(|k| k.iter().map(|&e| e as usize).sum()).max().unwrap_or(0)
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (k1, &v1) in &self.terms {
            for (k2, &v2) in &other.terms {
                let key: Exponents = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                out.add_term(key, v1 * v2);
            }
        }
        out
    }

    /// `∂/∂x` for the variable index `x` as in [`Monomials::variable`].
    pub fn derivative(&self, x: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, &v) in &self.terms {
            if k[x] > 0 {
                let mut key = k.clone();
                key[x] -= 1;
                out.add_term(key, v * c_real(T::of_usize(k[x] as usize)));
            }
        }
        out
    }

    /// Multi-derivative `∂^a` with `a` a full `2d` exponent vector.
    pub fn multi_derivative(&self, a: &[u8]) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, &v) in &self.terms {
            if k.iter().zip(a).any(|(e, d)| e < d) {
                continue;
            }
            let mut factor = 1.0;
            let mut key = k.clone();
            for (x, &d) in a.iter().enumerate() {
                for j in 0..d {
                    factor *= (k[x] - j) as f64;
                }
                key[x] -= d;
            }
            out.add_term(key, v * c_real(T::lit(factor)));
        }
        out
    }

    /// Complex conjugate polynomial: swaps `z ↔ z̄` and conjugates coefficients.
    pub fn conj(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zero(d);
        for (k, v) in &self.terms {
            let mut key = k[d..].to_vec();
            key.extend_from_slice(&k[..d]);
            out.add_term(key, v.conj());
        }
        out
    }

    pub fn evaluate(&self, z: &CVector<T>) -> Result<C<T>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let d = self.dim;
        let mut acc = C::new(T::zero(), T::zero());
        for (k, &v) in &self.terms {
            let mut term = v;
            for i in 0..d {
                term *= z[i].powu(k[i] as u32) * z[i].conj().powu(k[d + i] as u32);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Substitutes variable `x` by `images[x]` everywhere.
    pub fn substitute(&self, images: &[Monomials<T>]) -> Self {
        let mut powers: Vec<Vec<Monomials<T>>> =
            images.iter().map(|img| vec![Monomials::constant(img.dim, c_real(T::one())), img.clone()]).collect();
        let target_dim = images.first().map_or(self.dim, |m| m.dim);
        let mut out = Self::zero(target_dim);
        for (k, &v) in &self.terms {
            let mut term = Monomials::constant(target_dim, v);
            for (x, &e) in k.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[x].len() <= e as usize {
                    let next = powers[x].last().expect("non-empty").product(&images[x]);
                    powers[x].push(next);
                }
                term = term.product(&powers[x][e as usize]);
            }
            out.add_scaled(&term, c_real(T::one()));
        }
        out
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut diff = self.clone();
        diff.add_scaled(other, c_real(-T::one()));
        diff.terms.values().fold(T::zero(), |acc, v| acc.max(v.norm_sqr().sqrt()))
    }
}

/// Constant-coefficient second-order operator `Σ_{x,y} C_xy ∂_x ∂_y` over the
/// `2d` variables `(z, z̄)`. `C` is kept symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderOp<T: Real> {
    dim: usize,
    coeffs: CMatrix<T>,
}

impl<T: Real> SecondOrderOp<T> {
    pub fn new(dim: usize, coeffs: CMatrix<T>) -> Result<Self> {
        if coeffs.nrows() != 2 * dim || coeffs.ncols() != 2 * dim {
            return Err(Error::DimensionMismatch { expected: 2 * dim, got: coeffs.nrows() });
        }
        let sym = (&coeffs + coeffs.transpose()).map(|z| z * c_real(T::lit(0.5)));
        Ok(Self { dim, coeffs: sym })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: CMatrix::zeros(2 * dim, 2 * dim) }
    }

    /// `Σ_i ∂_{z_i} ∂_{z̄_i}`.
    pub fn trace_laplacian(dim: usize) -> Self {
        let mut c = CMatrix::zeros(2 * dim, 2 * dim);
        for i in 0..dim {
            c[(i, dim + i)] = c_real(T::lit(0.5));
            c[(dim + i, i)] = c_real(T::lit(0.5));
        }
        Self { dim, coeffs: c }
    }

    /// Builds the operator from its three blocks:
    /// `Σ zz_ij ∂_i∂_j + Σ mixed_ij ∂_i ∂̄_j + Σ bb_ij ∂̄_i∂̄_j`.
    pub fn from_blocks(zz: &CMatrix<T>, mixed: &CMatrix<T>, bb: &CMatrix<T>) -> Self {
        let d = zz.nrows();
        let half = c_real(T::lit(0.5));
        let mut c = CMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                c[(i, j)] = zz[(i, j)];
                c[(d + i, d + j)] = bb[(i, j)];
                c[(i, d + j)] = mixed[(i, j)] * half;
                c[(d + j, i)] = mixed[(i, j)] * half;
            }
        }
        Self::new(d, c).expect("square blocks")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &CMatrix<T> {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { dim: self.dim, coeffs: &self.coeffs + &other.coeffs }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { dim: self.dim, coeffs: self.coeffs.map(|z| z * c_real(s)) }
    }

    pub fn apply(&self, m: &Monomials<T>) -> Monomials<T> {
        let n = 2 * self.dim;
        let mut out = Monomials::zero(m.dim);
        for (k, &v) in &m.terms {
            for x in 0..n {
                if k[x] == 0 {
                    continue;
                }
                for y in x..n {
                    let c = if x == y { self.coeffs[(x, x)] } else { self.coeffs[(x, y)] + self.coeffs[(y, x)] };
                    if c == C::new(T::zero(), T::zero()) {
                        continue;
                    }
                    let factor = if x == y {
                        if k[x] < 2 {
                            continue;
                        }
                        (k[x] as usize) * (k[x] as usize - 1)
                    } else {
                        if k[y] == 0 {
                            continue;
                        }
                        (k[x] as usize) * (k[y] as usize)
                    };
                    let mut key = k.clone();
                    key[x] -= 1;
                    key[y] -= 1;
                    out.add_term(key, v * c * c_real(T::of_usize(factor)));
                }
            }
        }
        out
    }

    /// `e^{s·self} m`, a finite sum since every application lowers the degree by two.
    pub fn exp_apply(&self, m: &Monomials<T>, s: T) -> Monomials<T> {
        let mut out = m.clone();
        let mut term = m.clone();
        let mut k = 0usize;
        while !term.is_empty() {
            k += 1;
            term = self.apply(&term).scaled(c_real(s / T::of_usize(k)));
            out.add_scaled(&term, c_real(T::one()));
        }
        out
    }
}

/// All `2d` exponent vectors with `z` part `a` of size `k` and zero `z̄` part,
/// paired with the weight `k!/a!`.
pub(crate) fn weighted_z_multi_indices(dim: usize, k: usize) -> Vec<(Exponents, f64)> {
    crate::multi_index::all_occupations(dim, k)
        .into_iter()
        .map(|occ| {
            let w = occ.iter().fold(factorial(k), |acc, &e| acc / factorial(e as usize));
            let mut key = occ.clone();
            key.extend(std::iter::repeat_n(0, dim));
            (key, w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c_lit;

    #[test]
    fn derivative_of_power() {
        // z̄ z³ in d = 1
        let mut m = Monomials::<f64>::zero(1);
        m.add_term(vec![3, 1], c_lit(2.0, 0.0));
        let dz = m.derivative(0);
        assert_eq!(dz.iter().next().unwrap(), (&vec![2, 1], &c_lit(6.0, 0.0)));
        let d2 = m.multi_derivative(&[2, 1]);
        assert_eq!(d2.iter().next().unwrap(), (&vec![1, 0], &c_lit(12.0, 0.0)));
    }

    #[test]
    fn second_order_matches_repeated_derivatives() {
        let mut m = Monomials::<f64>::zero(1);
        m.add_term(vec![2, 2], c_lit(1.0, 0.0));
        m.add_term(vec![3, 1], c_lit(0.0, 1.0));
        let op = SecondOrderOp::trace_laplacian(1);
        let expect = m.derivative(0).derivative(1);
        assert!(op.apply(&m).max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn substitution_of_identity_is_identity() {
        let mut m = Monomials::<f64>::zero(2);
        m.add_term(vec![1, 0, 2, 1], c_lit(1.5, -0.5));
        let images: Vec<_> = (0..4).map(|x| Monomials::variable(2, x)).collect();
        assert_eq!(m.substitute(&images), m);
    }
}
