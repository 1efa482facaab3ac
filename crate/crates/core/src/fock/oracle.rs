use super::{conjugate_observable, quantum_flow, FockOperator, FockSpace, QuantumFlowConfig};
use crate::error::{Error, Result};
use crate::flow::QuadraticHamiltonian;
use crate::poly::PolySymbol;
use crate::scalar::Real;

/// Static trusted block `n ≤ N_max − m − 4`: `Q^Wick` couples `n ↔ n ± 2`,
/// so cutoff errors creep downward from `N_max`.
pub fn trusted_block(n_max: usize, order: usize) -> Option<usize> {
    n_max.checked_sub(order + 4)
}

#[derive(Debug, Clone)]
pub struct OracleOutcome<T: Real> {
    /// Largest sector on which the two cutoffs agree, capped by [`trusted_block`].
    pub trusted_block: usize,
    /// `U(0,t) b^Wick U(t,0)` restricted to the sectors `0..=trusted_block`.
    pub conjugated: FockOperator<T>,
    /// Largest element difference between the `N_max` and `N_max − 4` runs on the trusted block.
    pub cutoff_discrepancy: T,
    pub unitarity_defect: T,
    pub leakage: T,
}

/// Runs the quantum flow at `N_max` and `N_max − 4` and keeps the sectors
/// on which both agree to `agreement` (relative to the largest element).
pub fn conjugation_oracle<T: Real>(
    h: &QuadraticHamiltonian<T>,
    b: &PolySymbol<T>,
    t: T,
    space: &FockSpace<T>,
    config: &QuantumFlowConfig,
    agreement: T,
) -> Result<OracleOutcome<T>> {
    let cap = trusted_block(space.n_max(), b.order())
        .ok_or(Error::DegreeExceedsCutoff { degree: b.order() + 4, n_max: space.n_max() })?;
    let t_end = h.grid().t_end;
    let mut cfg = config.clone();
    cfg.input_sectors = Some(cap);
    if (t - t_end).abs() > T::lit(1e-12) {
        cfg.record_times.push(t.to_f64_lossy());
    }
    let fine_flow = quantum_flow(h, space, &cfg)?;
    let fine = conjugate_observable(&fine_flow, b, t)?;

    let coarse_space = space.truncated(space.n_max() - 4);
    let mut trusted = cap;
    let mut discrepancy = T::zero();
    if coarse_space.n_max() >= b.order() && coarse_space.n_max() >= cap {
        // the smaller cutoff is a diagnostic, so it may leak freely
        let coarse_cfg = QuantumFlowConfig { leakage_threshold: f64::INFINITY, ..cfg.clone() };
        let coarse = conjugate_observable(&quantum_flow(h, &coarse_space, &coarse_cfg)?, b, t)?;
        let scale = fine.max_abs().max(T::one());
        trusted = 0;
        for n in 0..=cap {
            let diff = fine.restricted(n).max_abs_diff(&coarse.restricted(n));
            if diff > agreement * scale {
                break;
            }
            trusted = n;
            discrepancy = diff;
        }
        log::debug!("oracle: cutoffs {} / {} agree up to sector {trusted}", space.n_max(), coarse_space.n_max());
    }
    Ok(OracleOutcome {
        trusted_block: trusted,
        conjugated: fine.restricted(trusted),
        cutoff_discrepancy: discrepancy,
        unitarity_defect: fine_flow.max_unitarity_defect(),
        leakage: fine_flow.max_leakage(),
    })
}
