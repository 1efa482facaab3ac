//! Weyl ↔ Wick symbols through the deconvolution exponential
//! `e^{±(ε/2)∂_z·∂_z̄}`, and the action of Bogoliubov implementers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::lambda_from_parts;
use crate::fock::{gamma_u, trusted_block, wick_quantize, FockOperator, FockSpace, QuantumFlowConfig};
use crate::linalg::expm;
use crate::poly::{PolySymbol, SecondOrderOp, SymTensor};
use crate::scalar::{c_i, c_real, Real};
use crate::symplectic::{decompose, RLinearMap};


fn deconvolve<T: Real>(b: &PolySymbol<T>, s: T) -> PolySymbol<T> {
    let op = SecondOrderOp::trace_laplacian(b.dim());
    PolySymbol::from_monomials(&op.exp_apply(&b.to_monomials(), s))
}

/// `b̆ = e^{−(ε/2)∂_z·∂_z̄} b`.
pub fn weyl_from_wick<T: Real>(b: &PolySymbol<T>, epsilon: T) -> PolySymbol<T> {
    deconvolve(b, -epsilon / T::lit(2.0))
}

/// `b = e^{(ε/2)∂_z·∂_z̄} b̆`.
pub fn wick_from_weyl<T: Real>(b: &PolySymbol<T>, epsilon: T) -> PolySymbol<T> {
    deconvolve(b, epsilon / T::lit(2.0))
}

/// `Λ[T]c = Tr[−2AA* ∂_z̄∂_z c] + ⟨v|∂_z̄²c + ∂_z²c|v⟩` with `⟨z₁⊗z₂, v⟩ = ⟨z₁, LA*z₂⟩`.
pub fn big_lambda_for_symplecto<T: Real>(t: &RLinearMap<T>) -> SecondOrderOp<T> {
    let a = t.antilinear();
    let g = a * a.adjoint();
    let v = t.linear() * a.transpose();
    lambda_from_parts(&g, &v)
}

/// `e^{(ε/2)Λ[T]}[b(T*·)]`, the Wick symbol of `U* b^Wick U`.
pub fn conjugated_symbol<T: Real>(t: &RLinearMap<T>, b: &PolySymbol<T>, epsilon: T) -> Result<PolySymbol<T>> {
    let pulled = b.compose_rlinear(&t.adjoint())?;
    let op = big_lambda_for_symplecto(t);
    Ok(PolySymbol::from_monomials(&op.exp_apply(&pulled.to_monomials(), epsilon / T::lit(2.0))))
}

/// The same symbol through the Weyl side: `b ↦ b̆ ↦ b̆(T*·) ↦` Wick.
pub fn conjugated_symbol_via_weyl<T: Real>(t: &RLinearMap<T>, b: &PolySymbol<T>, epsilon: T) -> Result<PolySymbol<T>> {
    let weyl = weyl_from_wick(b, epsilon).compose_rlinear(&t.adjoint())?;
    Ok(wick_from_weyl(&weyl, epsilon))
}

/// `U = e^{−iQ_ρ^Wick/ε} Γ(u*)` for `T = u e^{cρ}`, with `Q_ρ(z) = Im⟨cρz, z⟩`,
/// exponentiated on the truncated space. `U* W(ξ) U = W(Tξ)` below the cutoff.
pub fn bogoliubov_implementer<T: Real>(t: &RLinearMap<T>, space: &FockSpace<T>) -> Result<FockOperator<T>> {
    let dec = decompose(t)?;
    let q = PolySymbol::quadratic_im(&SymTensor::from_symmetric_matrix(&dec.c_rho())?)?;
    let gen = wick_quantize(&q, space)?.to_dense() * (-c_i::<T>() / c_real(space.epsilon()));
    let squeeze = FockOperator::from_dense(space, &expm(&gen))?;
    Ok(squeeze.compose(&gamma_u(&dec.unitary.adjoint(), space)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylConjugationReport {
    /// Largest sector on which the `N_max` and `N_max − 4` implementers agree.
    pub trusted_block: usize,
    /// `max |U* b^Wick U − (e^{(ε/2)Λ[T]}[b(T*·)])^Wick|` on the trusted block.
    pub operator_defect: f64,
    /// Coefficient distance between the `Λ[T]` and Weyl-side symbols.
    pub symbol_defect: f64,
    pub cutoff_discrepancy: f64,
    /// Top-two-sector norm of `U Ω`.
    pub leakage: f64,
}

fn conjugate_dense<T: Real>(
    t: &RLinearMap<T>,
    b: &PolySymbol<T>,
    space: &FockSpace<T>,
) -> Result<(FockOperator<T>, T)> {
    let u = bogoliubov_implementer(t, space)?;
    let conj_op = u.adjoint().compose(&wick_quantize(b, space)?).compose(&u);
    let top = space.n_max().saturating_sub(1);
    let mut leak = T::zero();
    for n in top..=space.n_max() {
        if let Some(block) = u.block(n, 0) {
            leak += block.norm_squared();
        }
    }
    Ok((conj_op, leak.sqrt()))
}

/// Compares `U* b^Wick U` with the Wick quantization of `e^{(ε/2)Λ[T]}[b(T*·)]`
/// on the sectors where two cutoffs agree to `agreement` (relative).
pub fn check_weyl_conjugation<T: Real>(
    t: &RLinearMap<T>,
    b: &PolySymbol<T>,
    space: &FockSpace<T>,
    agreement: T,
) -> Result<WeylConjugationReport> {
    let eps = space.epsilon();
    let cap = trusted_block(space.n_max(), b.order())
        .ok_or(Error::DegreeExceedsCutoff { degree: b.order() + 4, n_max: space.n_max() })?;
    let (fine, leak) = conjugate_dense(t, b, space)?;
    let threshold = QuantumFlowConfig::default().leakage_threshold;
    if leak.to_f64_lossy() > threshold {
        return Err(Error::Leakage { leakage: leak.to_f64_lossy(), threshold });
    }
    let (coarse, _) = conjugate_dense(t, b, &space.truncated(space.n_max() - 4))?;
    let scale = fine.restricted(cap).max_abs().max(T::one());
    let mut trusted = 0;
    let mut discrepancy = T::zero();
    for n in 0..=cap {
        let diff = fine.restricted(n).max_abs_diff(&coarse.restricted(n));
        if diff > agreement * scale {
            break;
        }
        trusted = n;
        discrepancy = diff;
    }
    let symbol = conjugated_symbol(t, b, eps)?;
    let via_weyl = conjugated_symbol_via_weyl(t, b, eps)?;
    let expect = wick_quantize(&symbol, &space.truncated(trusted.max(symbol.order())))?.restricted(trusted);
    Ok(WeylConjugationReport {
        trusted_block: trusted,
        operator_defect: fine.restricted(trusted).max_abs_diff(&expect).to_f64_lossy(),
        symbol_defect: symbol.distance(&via_weyl).to_f64_lossy(),
        cutoff_discrepancy: discrepancy.to_f64_lossy(),
        leakage: leak.to_f64_lossy(),
    })
}
