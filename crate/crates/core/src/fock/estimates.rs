use serde::{Deserialize, Serialize};

use super::{quantum_flow, wick_quantize, FockSpace, QuantumFlowConfig};
use crate::error::{Error, Result};
use crate::flow::QuadraticHamiltonian;
use crate::linalg::frobenius;
use crate::poly::{PolySymbol, SymTensor};
use crate::random::Rng;
use crate::scalar::{c_real, CMatrix, CVector, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub samples: usize,
    pub k: usize,
    /// `max ‖Q^Wick/ε Ψ‖ / (1.5‖β‖‖(N/ε+1)Ψ‖)`.
    pub max_ratio_qwick: f64,
    /// `max 2|Im⟨Q^Wick/ε Ψ, (N/ε+1)^k Ψ⟩| / (3^k √2 ‖β‖ ⟨Ψ, (N/ε+1)^k Ψ⟩)`.
    pub max_ratio_commutator: f64,
    /// `β = 0`: both sides vanish and the ratios are 0/0.
    pub vacuous: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub samples: usize,
    pub k: usize,
    pub t: f64,
    /// `e^{3^k √2 ‖β‖ t}` with `‖β‖` the largest value on the grid.
    pub bound: f64,
    /// `max ‖(N/ε+1)^{k/2} U Ψ‖ / ‖(N/ε+1)^{k/2} Ψ‖`.
    pub max_growth: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Random state on the sectors `0..=n_top`, each sector scaled by a
/// log-normal weight so samples range from low- to high-number dominated.
pub(crate) fn random_state<T: Real>(space: &FockSpace<T>, n_top: usize, rng: &mut Rng) -> CVector<T> {
    let mut psi = CVector::zeros(space.total_dim());
    for n in 0..=n_top.min(space.n_max()) {
        let w = c_real(T::lit((1.5 * rng.normal()).exp()));
        for r in space.range(n) {
            psi[r] = rng.complex_normal::<T>() * w;
        }
    }
    let norm = psi.norm();
    psi / c_real(norm)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Monte-Carlo check of `‖Q^Wick/ε Ψ‖ ≤ (3/2)‖β‖‖(N/ε+1)Ψ‖` and of the
/// quadratic-form commutator bound with `3^k √2 ‖β‖`, on states supported
/// below `N_max − 2` (where `Q^Wick Ψ` is not truncated).
pub fn check_estimates<T: Real>(
    beta: &SymTensor<T>,
    space: &FockSpace<T>,
    k: usize,
    samples: usize,
    rng: &mut Rng,
) -> Result<EstimateReport> {
    if space.n_max() < 2 {
        return Err(Error::DegreeExceedsCutoff { degree: 2, n_max: space.n_max() });
    }
    let eps = c_real(space.epsilon());
    let q = wick_quantize(&PolySymbol::quadratic_im(beta)?, space)?;
    let beta_norm = frobenius(&beta.to_symmetric_matrix()?).to_f64_lossy();
    let numbers = space.sector_of_index();
    let mut max_q = 0.0f64;
    let mut max_c = 0.0f64;
    for _ in 0..samples {
        let psi = random_state(space, space.n_max() - 2, rng);
        let x = CMatrix::from_column_slice(psi.len(), 1, psi.as_slice());
        let qpsi = q.apply(&x).column(0) / eps;
        let n1 = CVector::from_fn(psi.len(), |r, _| psi[r] * c_real(T::of_usize(numbers[r] + 1)));
        let mk = CVector::from_fn(psi.len(), |r, _| psi[r] * c_real(T::of_usize(numbers[r] + 1).powi(k as i32)));
        let lhs_q = qpsi.norm().to_f64_lossy();
        let rhs_q = 1.5 * beta_norm * n1.norm().to_f64_lossy();
        max_q = max_q.max(ratio(lhs_q, rhs_q));
        let lhs_c = 2.0 * qpsi.dotc(&mk).im.to_f64_lossy().abs();
        let rhs_c = 3f64.powi(k as i32) * std::f64::consts::SQRT_2 * beta_norm * psi.dotc(&mk).re.to_f64_lossy();
        max_c = max_c.max(ratio(lhs_c, rhs_c));
    }
    Ok(EstimateReport {
        samples,
        k,
        max_ratio_qwick: max_q,
        max_ratio_commutator: max_c,
        vacuous: beta_norm == 0.0,
        holds: max_q <= 1.0 && max_c <= 1.0,
    })
}

/// Soft check of `‖(N/ε+1)^{k/2} U(t,0)Ψ‖ ≤ e^{3^k √2 ‖β‖ t}‖(N/ε+1)^{k/2}Ψ‖`
/// for random `Ψ` on the sectors `0..=input_sectors`, with relative `slack`
/// for truncation.
pub fn check_growth<T: Real>(
    h: &QuadraticHamiltonian<T>,
    space: &FockSpace<T>,
    k: usize,
    input_sectors: usize,
    samples: usize,
    slack: f64,
    rng: &mut Rng,
) -> Result<GrowthReport> {
    let config = QuantumFlowConfig {
        input_sectors: Some(input_sectors),
        leakage_threshold: f64::INFINITY,
        ..QuantumFlowConfig::default()
    };
    let flow = quantum_flow(h, space, &config)?;
    let t = h.grid().t_end;
    let u = flow.at(t)?;
    let numbers = space.sector_of_index();
    let weight = |r: usize| T::of_usize(numbers[r] + 1).powf(T::lit(k as f64 / 2.0));
    let beta_max = h
        .grid()
        .times()
        .into_iter()
        .map(|s| frobenius(&h.beta_matrix(s)))
        .fold(T::zero(), |a, b| a.max(b))
        .to_f64_lossy();
    let bound = (3f64.powi(k as i32) * std::f64::consts::SQRT_2 * beta_max * t.to_f64_lossy()).exp();
    let cols = u.ncols();
    let mut max_growth = 0.0f64;
    for _ in 0..samples {
        let full = random_state(space, input_sectors, rng);
        let psi = full.rows(0, cols).into_owned();
        let evolved = u * &psi;
        let before = CVector::from_fn(cols, |r, _| psi[r] * c_real(weight(r))).norm();
        let after = CVector::from_fn(evolved.len(), |r, _| evolved[r] * c_real(weight(r))).norm();
        max_growth = max_growth.max((after / before).to_f64_lossy());
    }
    Ok(GrowthReport {
        samples,
        k,
        t: t.to_f64_lossy(),
        bound,
        max_growth,
        slack,
        holds: max_growth <= bound * (1.0 + slack),
    })
}
