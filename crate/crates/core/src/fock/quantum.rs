use serde::{Deserialize, Serialize};

use super::{wick_quantize, FockOperator, FockSpace};
use crate::error::{Error, Result};
use crate::flow::QuadraticHamiltonian;
use crate::linalg::{conj, frobenius, identity};
use crate::poly::{PolySymbol, SymTensor};
use crate::scalar::{c_i, c_real, CMatrix, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumFlowConfig {
    /// Abort when the vacuum column puts more than this norm in the top two sectors.
    pub leakage_threshold: f64,
    /// RK4 substeps are chosen so that `dt · 1.5‖β‖(N_max+1)` stays below this.
    pub max_phase_per_step: f64,
    /// Propagate only the columns of sectors `0..=input_sectors` (default: all).
    pub input_sectors: Option<usize>,
    /// Grid times at which `U(t,0)` is kept besides `0` and `t_end`.
    pub record_times: Vec<f64>,
}

impl Default for QuantumFlowConfig {
    fn default() -> Self {
        Self { leakage_threshold: 1e-6, max_phase_per_step: 0.05, input_sectors: None, record_times: Vec::new() }
    }
}

/// Columns of `U(t,0) = Γ(u_α(t,0)) Û(t,0)` for the propagated input sectors.
#[derive(Debug, Clone)]
pub struct QuantumFlow<T: Real> {
    space: FockSpace<T>,
    input_sectors: usize,
    snapshots: Vec<(T, CMatrix<T>)>,
    u_alpha: CMatrix<T>,
    max_unitarity_defect: T,
    max_leakage: T,
    substeps: usize,
}

impl<T: Real> QuantumFlow<T> {
    pub fn space(&self) -> &FockSpace<T> {
        &self.space
    }

    pub fn input_sectors(&self) -> usize {
        self.input_sectors
    }

    /// Recorded `U(t,0)` columns (`total_dim × dim_up_to(input_sectors)`).
    pub fn at(&self, t: T) -> Result<&CMatrix<T>> {
        let tol = T::lit(1e-9) * T::one().max(t.abs());
        self.snapshots
            .iter()
            .find(|(s, _)| (*s - t).abs() <= tol)
            .map(|(_, m)| m)
            .ok_or(Error::OffGrid { t: t.to_f64_lossy() })
    }

    pub fn recorded_times(&self) -> Vec<T> {
        self.snapshots.iter().map(|(t, _)| *t).collect()
    }

    /// `u_α(t_end, 0)`.
    pub fn u_alpha(&self) -> &CMatrix<T> {
        &self.u_alpha
    }

    /// `max_t ‖X*X − I‖_F` over the propagated columns.
    pub fn max_unitarity_defect(&self) -> T {
        self.max_unitarity_defect
    }

    /// Largest top-two-sector norm of the evolved vacuum.
    pub fn max_leakage(&self) -> T {
        self.max_leakage
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }
}

/// `Q^Wick` is real-linear in `β`, so the blocks for the real and imaginary
/// unit in each coefficient of `β` are built once and recombined per stage.
struct Generator<T: Real> {
    units: Vec<(FockOperator<T>, FockOperator<T>)>,
}

impl<T: Real> Generator<T> {
    fn new(space: &FockSpace<T>) -> Result<Self> {
        let len = SymTensor::<T>::zeros(space.dim(), 0, 2).coeffs().len();
        let unit = |k: usize, v| -> Result<FockOperator<T>> {
            let mut beta = SymTensor::zeros(space.dim(), 0, 2);
            beta.coeffs_mut()[k] = v;
            wick_quantize(&PolySymbol::quadratic_im(&beta)?, space)
        };
        let units = (0..len).map(|k| Ok((unit(k, c_real(T::one()))?, unit(k, c_i())?))).collect::<Result<_>>()?;
        Ok(Self { units })
    }

    fn assemble(&self, beta: &SymTensor<T>) -> FockOperator<T> {
        let mut out = FockOperator::zero(self.units[0].0.space());
        for (z, (re, im)) in beta.coeffs().iter().zip(&self.units) {
            if z.re != T::zero() {
                out = out.add(&re.scaled(c_real(z.re)));
            }
            if z.im != T::zero() {
                out = out.add(&im.scaled(c_real(z.im)));
            }
        }
        out
    }
}

/// `Û' = −(i/ε) Q̂_t^Wick Û` with `Q̂_t = Im⟨β̂_t, z^∨2⟩`, `B̂ = u_α^H B conj(u_α)`,
/// integrated jointly with `u_α' = −iα u_α`.
fn rhs<T: Real>(
    h: &QuadraticHamiltonian<T>,
    gen: &Generator<T>,
    eps: T,
    t: T,
    u: &CMatrix<T>,
    x: &CMatrix<T>,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let du = if h.has_alpha() { h.alpha(t)? * u * (-c_i::<T>()) } else { CMatrix::zeros(u.nrows(), u.ncols()) };
    let b_hat = u.adjoint() * h.beta_matrix(t) * conj(u);
    let q = gen.assemble(&SymTensor::from_symmetric_matrix(&b_hat)?);
    let dx = q.apply(x) * (-c_i::<T>() / c_real(eps));
    Ok((du, dx))
}

fn leakage<T: Real>(space: &FockSpace<T>, x: &CMatrix<T>) -> T {
    let n = space.n_max();
    let start = space.range(n.saturating_sub(1)).start;
    let mut s = T::zero();
    for r in start..space.total_dim() {
        s += x[(r, 0)].norm_sqr();
    }
    s.sqrt()
}

fn unitarity<T: Real>(x: &CMatrix<T>) -> T {
    let k = x.ncols();
    frobenius(&(x.adjoint() * x - identity::<T>(k)))
}

/// Integrates `iε ∂_t U = Q_t^Wick U` on the truncated space over the
/// Hamiltonian's grid.
pub fn quantum_flow<T: Real>(
    h: &QuadraticHamiltonian<T>,
    space: &FockSpace<T>,
    config: &QuantumFlowConfig,
) -> Result<QuantumFlow<T>> {
    if h.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: h.dim() });
    }
    let grid = h.grid();
    let input_sectors = config.input_sectors.unwrap_or(space.n_max()).min(space.n_max());
    let cols = space.dim_up_to(input_sectors);
    let d = space.dim();
    let mut x = CMatrix::zeros(space.total_dim(), cols);
    for c in 0..cols {
        x[(c, c)] = c_real(T::one());
    }
    let mut u = identity::<T>(d);
    let record: Vec<usize> = config.record_times.iter().map(|&t| grid.index_of(T::lit(t))).collect::<Result<_>>()?;

    // substeps from the largest ‖β‖ seen on the grid
    let beta_max = grid.times().into_iter().map(|t| frobenius(&h.beta_matrix(t))).fold(T::zero(), |a, b| a.max(b));
    let rate = T::lit(1.5) * beta_max * T::of_usize(space.n_max() + 1);
    let substeps = ((grid.step() * rate).to_f64_lossy() / config.max_phase_per_step).ceil().max(1.0) as usize;
    let dt = grid.step() / T::of_usize(substeps);
    let half = T::lit(0.5);
    let gen = Generator::new(space)?;
    let eps = space.epsilon();
    let threshold = T::lit(config.leakage_threshold);

    let mut snapshots = vec![(T::zero(), x.clone())];
    let mut max_defect = T::zero();
    let mut max_leak = T::zero();
    for i in 0..grid.steps {
        for j in 0..substeps {
            let t = grid.time(i) + dt * T::of_usize(j);
            let (ku1, kx1) = rhs(h, &gen, eps, t, &u, &x)?;
            let (ku2, kx2) =
                rhs(h, &gen, eps, t + dt * half, &(&u + &ku1 * c_real(dt * half)), &(&x + &kx1 * c_real(dt * half)))?;
            let (ku3, kx3) =
                rhs(h, &gen, eps, t + dt * half, &(&u + &ku2 * c_real(dt * half)), &(&x + &kx2 * c_real(dt * half)))?;
            let (ku4, kx4) = rhs(h, &gen, eps, t + dt, &(&u + &ku3 * c_real(dt)), &(&x + &kx3 * c_real(dt)))?;
            let w = c_real(dt / T::of_usize(6));
            let two = c_real(T::lit(2.0));
            u += (ku1 + ku2 * two + ku3 * two + ku4) * w;
            x += (kx1 + kx2 * two + kx3 * two + kx4) * w;
        }
        let leak = leakage(space, &x);
        max_leak = max_leak.max(leak);
        if leak > threshold {
            return Err(Error::Leakage { leakage: leak.to_f64_lossy(), threshold: config.leakage_threshold });
        }
        max_defect = max_defect.max(unitarity(&x));
        let step = i + 1;
        if step == grid.steps || record.contains(&step) {
            let full = super::gamma_u(&polish_unitary(&u), space)?.apply(&x);
            snapshots.push((grid.time(step), full));
        }
    }
    log::debug!(
        "quantum flow: {} grid steps × {} substeps, leakage {:e}, unitarity defect {:e}",
        grid.steps,
        substeps,
        max_leak.to_f64_lossy(),
        max_defect.to_f64_lossy()
    );
    Ok(QuantumFlow {
        space: space.clone(),
        input_sectors,
        snapshots,
        u_alpha: u,
        max_unitarity_defect: max_defect,
        max_leakage: max_leak,
        substeps,
    })
}

/// RK4 keeps `u_α` unitary only to truncation accuracy; `Γ` wants it exact.
fn polish_unitary<T: Real>(u: &CMatrix<T>) -> CMatrix<T> {
    crate::linalg::polar_unitary(u).unwrap_or_else(|_| u.clone())
}

/// `U(0,t) b^Wick U(t,0)` on the propagated sectors, as an operator on the
/// space cut at `input_sectors`.
pub fn conjugate_observable<T: Real>(flow: &QuantumFlow<T>, b: &PolySymbol<T>, t: T) -> Result<FockOperator<T>> {
    let x = flow.at(t)?;
    let op = wick_quantize(b, &flow.space)?;
    let m = x.adjoint() * op.apply(x);
    FockOperator::from_dense(&flow.space.truncated(flow.input_sectors), &m)
}
