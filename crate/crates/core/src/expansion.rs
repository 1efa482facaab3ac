//! The two ε-expansions of `U(0,t) b^Wick U(t,0)`.
//!
//! Both `λ^s` and `Λ^t` are constant-coefficient second-order operators in
//! `(∂_z, ∂_z̄)`, so they are carried as [`SecondOrderOp`]s. The Dyson engine
//! integrates iterated `λ^{s_k} ⋯ λ^{s_1}(b∘φ(t,0))` over the time-ordered
//! simplex `0 ≤ s_k ≤ … ≤ s_1 ≤ t`; the exponential engine applies
//! `(1/k!)(Λ^t)^k` to `b∘φ(t,0)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowResult, QuadraticHamiltonian};
use crate::linalg::conj;
use crate::poly::{Monomials, PolySymbol, SecondOrderOp, SymTensor};
use crate::scalar::{c_i, c_real, CMatrix, Real};
use crate::symplectic::RLinearMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dyson,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Gauss–Legendre nodes per simplex axis.
    pub nodes: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { nodes: 16 }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 || self.nodes > 128 {
            return Err(Error::InvalidQuadrature(format!("nodes = {} must lie in 2..=128", self.nodes)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExpansionResult<T: Real> {
    pub method: Method,
    pub t: T,
    pub epsilon: T,
    /// `(k, term_k)` for `k = 0..=⌊m/2⌋`.
    pub terms: Vec<(usize, PolySymbol<T>)>,
    /// Per-order quadrature error estimate (zero for the exponential engine).
    pub error_estimates: Vec<T>,
    pub assembled: PolySymbol<T>,
}

impl<T: Real> ExpansionResult<T> {
    fn new(method: Method, t: T, epsilon: T, terms: Vec<(usize, PolySymbol<T>)>, error_estimates: Vec<T>) -> Self {
        let assembled = assemble(&terms, epsilon);
        Self { method, t, epsilon, terms, error_estimates, assembled }
    }

    /// `Σ_k (ε/2)^k term_k` at another `ε`.
    pub fn assemble(&self, epsilon: T) -> PolySymbol<T> {
        assemble(&self.terms, epsilon)
    }

    pub fn term(&self, k: usize) -> Option<&PolySymbol<T>> {
        self.terms.iter().find(|(j, _)| *j == k).map(|(_, s)| s)
    }
}

fn assemble<T: Real>(terms: &[(usize, PolySymbol<T>)], epsilon: T) -> PolySymbol<T> {
    let dim = terms.first().map_or(1, |(_, s)| s.dim());
    let half = epsilon * T::lit(0.5);
    terms.iter().fold(PolySymbol::zero(dim), |acc, (k, s)| acc.add(&s.scaled(c_real(half.powi(*k as i32)))))
}

/// `Σ B_ij ∂_i∂_j + Σ conj(B_ij) ∂̄_i∂̄_j` pulled back through `φ = φ(s,0)`:
/// the operator `c ↦ [Σ B_ij ∂_i∂_j (c∘φ⁻¹) + c.c.]∘φ`.
pub fn lambda_op_for<T: Real>(phi: &RLinearMap<T>, b: &CMatrix<T>) -> SecondOrderOp<T> {
    let d = phi.dim();
    // φ⁻¹ = P z + R z̄ with P = M_L^H, R = −M_A^T
    let p = phi.linear().adjoint();
    let r = -phi.antilinear().transpose();
    let mut k = CMatrix::zeros(2 * d, d);
    let mut kb = CMatrix::zeros(2 * d, d);
    k.view_mut((0, 0), (d, d)).copy_from(&p);
    k.view_mut((d, 0), (d, d)).copy_from(&conj(&r));
    kb.view_mut((0, 0), (d, d)).copy_from(&r);
    kb.view_mut((d, 0), (d, d)).copy_from(&conj(&p));
    let coeffs = &k * b * k.transpose() + &kb * conj(b) * kb.transpose();
    SecondOrderOp::new(d, coeffs).expect("2d × 2d")
}

/// `λ^s` as an operator, at any `s ∈ [0, t_end]` (dense output off the grid).
pub fn lambda_op<T: Real>(s: T, flow: &FlowResult<T>, h: &QuadraticHamiltonian<T>) -> Result<SecondOrderOp<T>> {
    let phi = flow.phi_interp(s)?;
    Ok(lambda_op_for(&phi, &h.beta_matrix(s)))
}

/// `Λ[T]` from the Gram matrix `G = A*A` and `V = L*A`:
/// `−2 Σ G_ij ∂_i ∂̄_j + Σ V_ij ∂_i∂_j + Σ conj(V_ij) ∂̄_i∂̄_j`.
pub fn lambda_from_parts<T: Real>(g: &CMatrix<T>, v: &CMatrix<T>) -> SecondOrderOp<T> {
    let mixed = g.map(|z| z * c_real(T::lit(-2.0)));
    SecondOrderOp::from_blocks(v, &mixed, &conj(v))
}

/// `Λ` built from `φ = φ(t,0)`: `G = A*A`, `V = L*A`.
pub fn big_lambda_op_for<T: Real>(phi: &RLinearMap<T>) -> SecondOrderOp<T> {
    let g = phi.antilinear().transpose() * conj(phi.antilinear());
    let v = phi.linear().adjoint() * phi.antilinear();
    lambda_from_parts(&g, &v)
}

/// `Λ^t` as an operator, at any `t ∈ [0, t_end]`.
pub fn big_lambda_op<T: Real>(t: T, flow: &FlowResult<T>) -> Result<SecondOrderOp<T>> {
    Ok(big_lambda_op_for(&flow.phi_interp(t)?))
}

/// `λ^s c` by the explicit route: compose with `φ(0,s)`, contract second
/// derivatives against `β_s`, compose back with `φ(s,0)`. `s` must be a grid time.
pub fn lambda_s<T: Real>(
    c: &PolySymbol<T>,
    s: T,
    flow: &FlowResult<T>,
    h: &QuadraticHamiltonian<T>,
) -> Result<PolySymbol<T>> {
    let phi = flow.phi(s)?;
    let pulled = c.compose_rlinear(&phi.symplectic_inverse())?;
    let b = h.beta_matrix(s);
    let d = c.dim();
    let op = SecondOrderOp::from_blocks(&b, &CMatrix::zeros(d, d), &conj(&b));
    pulled.apply_second_order(&op)?.compose_rlinear(phi)
}

/// `λ^s c = −i{c∘φ(0,s), Q_s}^(2) ∘ φ(s,0)` through the order-two bracket.
pub fn lambda_s_poisson<T: Real>(
    c: &PolySymbol<T>,
    s: T,
    flow: &FlowResult<T>,
    h: &QuadraticHamiltonian<T>,
) -> Result<PolySymbol<T>> {
    let phi = flow.phi(s)?;
    let q = hamiltonian_symbol(h, s)?;
    let pulled = c.compose_rlinear(&phi.symplectic_inverse())?;
    pulled.poisson_bracket(&q, 2)?.scaled(-c_i::<T>()).compose_rlinear(phi)
}

/// The symbol `Q_s(z) = ⟨z, α_s z⟩ + Im⟨β_s, z^∨2⟩`.
pub fn hamiltonian_symbol<T: Real>(h: &QuadraticHamiltonian<T>, s: T) -> Result<PolySymbol<T>> {
    let d = h.dim();
    let quad = PolySymbol::quadratic_im(&h.beta(s))?;
    let alpha = SymTensor::from_matrix(d, 1, 1, h.alpha(s)?)?;
    Ok(quad.add(&PolySymbol::from_tensor(alpha)))
}

/// Constant `K_m` with `‖Λ[T]c‖ ≤ K_m ‖c‖` for `c` homogeneous of order `m`:
/// `K_m = m(m−1)‖T‖_X‖A‖_HS`. Each `∂` pair on a `(p, q)` block carries the
/// falling factorial of the degrees it hits, and `p(p−1) + q(q−1) + 2pq = m(m−1)`.
pub fn big_lambda_bound<T: Real>(t: &RLinearMap<T>, m: usize) -> T {
    if m < 2 {
        return T::zero();
    }
    T::of_usize(m * (m - 1)) * t.norm_x() * t.antilinear_hs_norm()
}

/// Bound on `‖e^{(ε/2)Λ^t}(b∘φ)‖_P` for `b` of order `≤ m`:
/// `‖b‖‖φ‖_X^m Σ_k m!/(k!(m−2k)!2^k) (ε‖φ‖_X‖A‖_HS)^k`.
pub fn assembled_bound<T: Real>(b_norm: T, phi: &RLinearMap<T>, m: usize, epsilon: T) -> T {
    let (nx, na) = (phi.norm_x(), phi.antilinear_hs_norm());
    let x = epsilon * nx * na;
    let mut sum = T::zero();
    let mut coeff = T::one();
    for k in 0..=m / 2 {
        if k > 0 {
            // m!/(k!(m−2k)!2^k) from its value at k − 1
            let num = T::of_usize((m - 2 * k + 2) * (m - 2 * k + 1));
            coeff = coeff * num / T::of_usize(2 * k);
        }
        sum += coeff * x.powi(k as i32);
    }
    b_norm * nx.powi(m as i32) * sum
}

/// `Λ^t c` at a grid time `t`.
#[allow(non_snake_case)]
pub fn Lambda_t<T: Real>(c: &PolySymbol<T>, t: T, flow: &FlowResult<T>) -> Result<PolySymbol<T>> {
    c.apply_second_order(&big_lambda_op_for(flow.phi(t)?))
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// `∫_{0 ≤ s_k ≤ … ≤ s_1 ≤ t} λ^{s_k} ⋯ λ^{s_1} b0 ds`, with the map
/// `s_1 = t u_1`, `s_{j+1} = s_j u_{j+1}` and Jacobian `t·s_1⋯s_{k−1}`.
fn simplex_term<T: Real>(
    b0: &Monomials<T>,
    k: usize,
    t: T,
    nodes: &[(f64, f64)],
    flow: &FlowResult<T>,
    h: &QuadraticHamiltonian<T>,
) -> Result<Monomials<T>> {
    fn descend<T: Real>(
        c: &Monomials<T>,
        level: usize,
        upper: T,
        k: usize,
        nodes: &[(f64, f64)],
        flow: &FlowResult<T>,
        h: &QuadraticHamiltonian<T>,
    ) -> Result<Monomials<T>> {
        let mut acc = Monomials::zero(c.dim());
        for &(u, w) in nodes {
            let s = upper * T::lit(u);
            let next = lambda_op(s, flow, h)?.apply(c);
            let weight = upper * T::lit(w);
            let inner = if level + 1 == k { next } else { descend(&next, level + 1, s, k, nodes, flow, h)? };
            acc.add_scaled(&inner, c_real(weight));
        }
        Ok(acc)
    }
    if k == 0 {
        return Ok(b0.clone());
    }
    // first axis in parallel; partial sums are reduced in node order
    let parts: Vec<Result<Monomials<T>>> = nodes
        .par_iter()
        .map(|&(u, w)| {
            let s = t * T::lit(u);
            let next = lambda_op(s, flow, h)?.apply(b0);
            let inner = if k == 1 { next } else { descend(&next, 1, s, k, nodes, flow, h)? };
            Ok(inner.scaled(c_real(t * T::lit(w))))
        })
        .collect();
    let mut acc = Monomials::zero(b0.dim());
    for p in parts {
        acc.add_scaled(&p?, c_real(T::one()));
    }
    Ok(acc)
}

/// Dyson-integral expansion. Each order is also computed with half the
/// nodes; the difference is reported as the quadrature error estimate.
pub fn dyson_expand<T: Real>(
    b: &PolySymbol<T>,
    t: T,
    flow: &FlowResult<T>,
    h: &QuadraticHamiltonian<T>,
    quad: QuadSpec,
    epsilon: T,
) -> Result<ExpansionResult<T>> {
    quad.validate()?;
    let b0 = b.compose_rlinear(flow.phi(t)?)?;
    let kmax = b.order() / 2;
    let fine = gauss_legendre_unit(quad.nodes);
    let coarse = gauss_legendre_unit((quad.nodes / 2).max(1));
    let m0 = b0.to_monomials();
    let mut terms = vec![(0, b0)];
    let mut errors = vec![T::zero()];
    for k in 1..=kmax {
        let f = PolySymbol::from_monomials(&simplex_term(&m0, k, t, &fine, flow, h)?);
        let c = PolySymbol::from_monomials(&simplex_term(&m0, k, t, &coarse, flow, h)?);
        errors.push(f.distance(&c));
        terms.push((k, f));
    }
    Ok(ExpansionResult::new(Method::Dyson, t, epsilon, terms, errors))
}

/// Exponential expansion `e^{(ε/2)Λ^t}(b∘φ(t,0))`, truncated at `⌊m/2⌋`.
pub fn exp_expand<T: Real>(b: &PolySymbol<T>, t: T, flow: &FlowResult<T>, epsilon: T) -> Result<ExpansionResult<T>> {
    let phi = flow.phi(t)?;
    let b0 = b.compose_rlinear(phi)?;
    let op = big_lambda_op_for(phi);
    let kmax = b.order() / 2;
    let mut current = b0.to_monomials();
    let mut terms = vec![(0, b0)];
    for k in 1..=kmax {
        current = op.apply(&current).scaled(c_real(T::one() / T::of_usize(k)));
        terms.push((k, PolySymbol::from_monomials(&current)));
    }
    let errors = vec![T::zero(); terms.len()];
    Ok(ExpansionResult::new(Method::Exponential, t, epsilon, terms, errors))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeDefect<T> {
    pub h: T,
    pub defect: T,
}

/// `‖(Λ^{t+h}c − Λ^{t−h}c)/(2h) − λ^t c‖_P`; one-sided `Λ^h c / h` at `t = 0`.
#[allow(non_snake_case)]
pub fn check_lambda_is_derivative_of_Lambda<T: Real>(
    flow: &FlowResult<T>,
    ham: &QuadraticHamiltonian<T>,
    t: T,
    c: &PolySymbol<T>,
    h: T,
) -> Result<DerivativeDefect<T>> {
    let t_end = flow.t_end();
    let at_zero = t == T::zero();
    if !(h > T::zero()) || t + h > t_end || (!at_zero && t - h < T::zero()) {
        return Err(Error::StepTooLarge { h: h.to_f64_lossy(), t: t.to_f64_lossy() });
    }
    let fd = if at_zero {
        c.apply_second_order(&big_lambda_op(h, flow)?)?.scaled(c_real(T::one() / h))
    } else {
        let plus = c.apply_second_order(&big_lambda_op(t + h, flow)?)?;
        let minus = c.apply_second_order(&big_lambda_op(t - h, flow)?)?;
        plus.sub(&minus).scaled(c_real(T::one() / (h + h)))
    };
    let exact = c.apply_second_order(&lambda_op(t, flow, ham)?)?;
    Ok(DerivativeDefect { h, defect: fd.distance(&exact) })
}
