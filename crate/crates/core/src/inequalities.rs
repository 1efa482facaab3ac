//! Monte-Carlo sweep over the norm inequalities used by the expansion and
//! the quantum flow, reported as worst-case ratios `lhs / rhs`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expansion::{assembled_bound, big_lambda_bound, big_lambda_op_for};
use crate::flow::{FlowResult, QuadraticHamiltonian};
use crate::fock::{check_estimates, check_growth, FockSpace};
use crate::poly::PolySymbol;
use crate::random::{random_homogeneous_symbol, random_symbol, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub name: String,
    pub samples: usize,
    /// Worst `lhs / rhs`; the inequality holds when this is `≤ allowed`.
    pub max_ratio: f64,
    pub allowed: f64,
    /// Every sample had `rhs = 0` (and `lhs = 0`).
    pub vacuous: bool,
    pub holds: bool,
}

impl InequalityRow {
    fn new(name: &str, samples: usize, max_ratio: f64, allowed: f64, vacuous: bool) -> Self {
        Self { name: name.into(), samples, max_ratio, allowed, vacuous, holds: max_ratio <= allowed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub samples: usize,
    /// Largest symbol order drawn for the symbol-level checks.
    pub max_order: usize,
    /// Relative slack for the truncated growth check.
    pub growth_slack: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { samples: 1000, max_order: 6, growth_slack: 0.1 }
    }
}

/// Tracks `max lhs/rhs`, counting `0/0` as vacuous and `x/0` as a failure.
#[derive(Default)]
struct Worst {
    ratio: f64,
    informative: usize,
}

impl Worst {
    fn push(&mut self, lhs: f64, rhs: f64) {
        if rhs > 0.0 {
            self.ratio = self.ratio.max(lhs / rhs);
            self.informative += 1;
        } else if lhs > 1e-14 {
            self.ratio = f64::INFINITY;
            self.informative += 1;
        }
    }

    fn row(&self, name: &str, samples: usize) -> InequalityRow {
        InequalityRow::new(name, samples, self.ratio, 1.0 + 1e-12, self.informative == 0)
    }
}

fn random_time(flow: &FlowResult<f64>, rng: &mut Rng) -> f64 {
    let grid = flow.grid();
    grid.time(rng.below(grid.steps + 1))
}

/// Runs every check against the scenario's Hamiltonian: the `Q^Wick` norm and
/// commutator bounds (`k = 1, 2`) with `β` taken at random grid times, the
/// composition estimate `‖b∘φ‖ ≤ ‖φ‖_X^m‖b‖`, the `Λ[T]` bound, the assembled
/// symbol bound, and the number-growth bound of the quantum flow (`k = 1, 2`).
pub fn inequality_suite(
    h: &QuadraticHamiltonian<f64>,
    flow: &FlowResult<f64>,
    space: &FockSpace<f64>,
    config: &SweepConfig,
    rng: &mut Rng,
) -> Result<Vec<InequalityRow>> {
    let d = h.dim();
    let n = config.samples;
    let eps = space.epsilon();
    let mut rows = Vec::new();

    // β at ten random grid times, n/10 states each
    let batches = 10.min(n.max(1));
    for k in [1usize, 2] {
        let (mut q, mut c, mut vacuous, mut total) = (0.0f64, 0.0f64, true, 0);
        for j in 0..batches {
            let per = n / batches + usize::from(j < n % batches);
            let beta = h.beta(random_time(flow, rng));
            let r = check_estimates(&beta, space, k, per, rng)?;
            q = q.max(r.max_ratio_qwick);
            c = c.max(r.max_ratio_commutator);
            vacuous &= r.vacuous;
            total += per;
        }
        if k == 1 {
            rows.push(InequalityRow::new("qwick-norm", total, q, 1.0, vacuous));
        }
        rows.push(InequalityRow::new(&format!("qwick-commutator-k{k}"), total, c, 1.0, vacuous));
    }

    let mut comp = Worst::default();
    let mut lam = Worst::default();
    let mut asm = Worst::default();
    for _ in 0..n {
        let phi = flow.phi(random_time(flow, rng))?;
        let m = 1 + rng.below(config.max_order.max(1));
        let b = random_homogeneous_symbol::<f64>(rng, d, m, 1.0);
        comp.push(b.compose_rlinear(phi)?.norm(), phi.norm_x().powi(m as i32) * b.norm());

        let t = phi.adjoint();
        let m2 = 2 + rng.below(config.max_order.max(2) - 1);
        let c2 = random_homogeneous_symbol::<f64>(rng, d, m2, 1.0);
        lam.push(c2.apply_second_order(&big_lambda_op_for(phi))?.norm(), big_lambda_bound(&t, m2) * c2.norm());

        let mb = rng.below(config.max_order + 1);
        let bb: PolySymbol<f64> = random_symbol(rng, d, mb, 1.0);
        let op = big_lambda_op_for(phi);
        let pulled = bb.compose_rlinear(phi)?;
        let assembled = PolySymbol::from_monomials(&op.exp_apply(&pulled.to_monomials(), eps / 2.0));
        asm.push(assembled.norm(), assembled_bound(bb.norm(), phi, bb.order(), eps));
    }
    rows.push(comp.row("flow-composition", n));
    rows.push(lam.row("lambda-norm", n));
    rows.push(asm.row("assembled-norm", n));

    let input = space.n_max() / 2;
    for k in [1usize, 2] {
        let g = check_growth(h, space, k, input, n, config.growth_slack, rng)?;
        let ratio = if g.bound > 0.0 { g.max_growth / g.bound } else { f64::INFINITY };
        rows.push(InequalityRow::new(&format!("number-growth-k{k}"), n, ratio, 1.0 + config.growth_slack, false));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate_flow, TimeGrid};
    use crate::poly::SymTensor;
    use crate::random::random_complex_symmetric;

    #[test]
    fn sweep_holds_on_a_random_two_mode_scenario() {
        let mut rng = Rng::seeded(300);
        let b = random_complex_symmetric::<f64>(&mut rng, 2, 0.5);
        let h = QuadraticHamiltonian::constant(
            None,
            SymTensor::from_symmetric_matrix(&b).unwrap(),
            TimeGrid::new(0.5, 1e-2).unwrap(),
        )
        .unwrap();
        let flow = integrate_flow(&h).unwrap();
        let space = FockSpace::new(2, 14, 0.5).unwrap();
        let rows =
            inequality_suite(&h, &flow, &space, &SweepConfig { samples: 200, ..Default::default() }, &mut rng).unwrap();
        assert_eq!(rows.len(), 8);
        for r in &rows {
            assert!(r.holds && !r.vacuous, "{r:?}");
            assert!(r.max_ratio > 0.0, "{r:?}");
        }
    }

    #[test]
    fn zero_beta_rows_are_vacuous() {
        let h = QuadraticHamiltonian::<f64>::free(1, TimeGrid::new(0.2, 1e-1).unwrap());
        let flow = integrate_flow(&h).unwrap();
        let space = FockSpace::new(1, 8, 0.5).unwrap();
        let mut rng = Rng::seeded(301);
        let rows =
            inequality_suite(&h, &flow, &space, &SweepConfig { samples: 20, ..Default::default() }, &mut rng).unwrap();
        let vac: Vec<&str> = rows.iter().filter(|r| r.vacuous).map(|r| r.name.as_str()).collect();
        assert_eq!(vac, ["qwick-norm", "qwick-commutator-k1", "qwick-commutator-k2", "lambda-norm"]);
        assert!(rows.iter().all(|r| r.holds));
    }

    #[test]
    fn sweep_is_reproducible() {
        let h = QuadraticHamiltonian::<f64>::free(1, TimeGrid::new(0.2, 1e-1).unwrap());
        let flow = integrate_flow(&h).unwrap();
        let space = FockSpace::new(1, 8, 0.5).unwrap();
        let run = |seed| {
            inequality_suite(
                &h,
                &flow,
                &space,
                &SweepConfig { samples: 30, ..Default::default() },
                &mut Rng::seeded(seed),
            )
            .unwrap()
        };
        assert_eq!(run(5), run(5));
    }
}
