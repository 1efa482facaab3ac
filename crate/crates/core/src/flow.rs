//! Classical flow of `Q_t(z) = ⟨z, α_t z⟩ + Im⟨β_t, z^∨2⟩`.
//!
//! With `(I∨⟨z|)β_t = B_t·conj(z)` the flow solves
//! `∂_t φ = −iα_t φ + B_t conj(φ)`. It is integrated in the factorised form
//! `φ(t,0) = u_α(t,0) ∘ φ̂(t,0)` where `i∂_t u_α = α_t u_α` and `φ̂` is driven by
//! `B̂_t = u_α* B_t conj(u_α)` alone. Both factors advance together under one
//! fixed-step RK4 so the half-step values of `u_α` are consistent.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{conj, hermitian_defect, identity, zeros};
use crate::poly::SymTensor;
use crate::scalar::{c_i, c_real, CMatrix, Real};
use crate::symplectic::RLinearMap;

/// `t ↦ α_t`, a Hermitian matrix.
pub type MatrixSampler<T> = Arc<dyn Fn(T) -> CMatrix<T> + Send + Sync>;
/// `t ↦ β_t`, a `(0 → 2)` tensor.
pub type TensorSampler<T> = Arc<dyn Fn(T) -> SymTensor<T> + Send + Sync>;

/// Uniform grid `0 = t_0 < … < t_n = t_end`; the requested step is shrunk so
/// that it divides `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T: Real> {
    pub t_end: T,
    pub steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_end: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::NonPositiveStep(dt.to_f64_lossy()));
        }
        if t_end < T::zero() || !t_end.is_finite() {
            return Err(Error::InvalidGrid(format!("t_end = {} must be finite and ≥ 0", t_end.to_f64_lossy())));
        }
        let ratio = (t_end / dt).to_f64_lossy();
        let steps = ((ratio - 1e-9).ceil().max(0.0)) as usize;
        Ok(Self { t_end, steps })
    }

    pub fn step(&self) -> T {
        if self.steps == 0 {
            T::zero()
        } else {
            self.t_end / T::of_usize(self.steps)
        }
    }

    pub fn time(&self, i: usize) -> T {
        self.step() * T::of_usize(i)
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }

    /// Index of `t` if it is a grid point up to roundoff.
    pub fn index_of(&self, t: T) -> Result<usize> {
        if self.steps == 0 {
            return if t.abs() <= T::lit(1e-12) { Ok(0) } else { Err(Error::OffGrid { t: t.to_f64_lossy() }) };
        }
        let x = (t / self.step()).to_f64_lossy();
        let i = x.round();
        if i < 0.0 || i as usize > self.steps || (x - i).abs() > 1e-7 {
            return Err(Error::OffGrid { t: t.to_f64_lossy() });
        }
        Ok(i as usize)
    }
}

#[derive(Clone)]
pub struct QuadraticHamiltonian<T: Real> {
    dim: usize,
    alpha: Option<MatrixSampler<T>>,
    beta: TensorSampler<T>,
    grid: TimeGrid<T>,
}

impl<T: Real> std::fmt::Debug for QuadraticHamiltonian<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadraticHamiltonian")
            .field("dim", &self.dim)
            .field("has_alpha", &self.alpha.is_some())
            .field("grid", &self.grid)
            .finish()
    }
}

impl<T: Real> QuadraticHamiltonian<T> {
    /// `α ≡ 0`, `β ≡ 0`.
    pub fn free(dim: usize, grid: TimeGrid<T>) -> Self {
        Self { dim, alpha: None, beta: Arc::new(move |_| SymTensor::zeros(dim, 0, 2)), grid }
    }

    pub fn constant(alpha: Option<CMatrix<T>>, beta: SymTensor<T>, grid: TimeGrid<T>) -> Result<Self> {
        let dim = beta.dim();
        let mut h = Self::free(dim, grid).with_beta(Arc::new(move |_| beta.clone()))?;
        if let Some(a) = alpha {
            h = h.with_alpha(Arc::new(move |_| a.clone()))?;
        }
        Ok(h)
    }

    pub fn with_alpha(mut self, alpha: MatrixSampler<T>) -> Result<Self> {
        let a0 = alpha(T::zero());
        if a0.nrows() != self.dim || a0.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a0.nrows() });
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    pub fn with_beta(mut self, beta: TensorSampler<T>) -> Result<Self> {
        let b0 = beta(T::zero());
        if b0.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: b0.dim() });
        }
        if b0.in_degree() != 0 || b0.out_degree() != 2 {
            return Err(Error::MalformedSymbol("β must be a (0, 2) tensor".into()));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    pub fn has_alpha(&self) -> bool {
        self.alpha.is_some()
    }

    /// `α_t`, checked to be Hermitian.
    pub fn alpha(&self, t: T) -> Result<CMatrix<T>> {
        match &self.alpha {
            None => Ok(zeros(self.dim, self.dim)),
            Some(f) => {
                let a = f(t);
                let defect = hermitian_defect(&a);
                if defect > T::lit(1e-12) * T::one().max(crate::linalg::max_abs(&a)) {
                    return Err(Error::NotHermitian { t: t.to_f64_lossy(), defect: defect.to_f64_lossy() });
                }
                Ok(a)
            }
        }
    }

    pub fn beta(&self, t: T) -> SymTensor<T> {
        (self.beta)(t)
    }

    /// The matrix `B_t` of the antilinear map `z ↦ (I∨⟨z|)β_t`.
    pub fn beta_matrix(&self, t: T) -> CMatrix<T> {
        self.beta(t).to_symmetric_matrix().expect("β sampler returns (0, 2) tensors")
    }

    /// The same Hamiltonian with `α` removed.
    pub fn without_alpha(&self) -> Self {
        Self { dim: self.dim, alpha: None, beta: self.beta.clone(), grid: self.grid }
    }
}

/// `φ(t,0)`, `u_α(t,0)` and `φ̂(t,0)` on the grid, with time derivatives of
/// `φ` kept for cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct FlowResult<T: Real> {
    grid: TimeGrid<T>,
    phi: Vec<RLinearMap<T>>,
    u_alpha: Vec<CMatrix<T>>,
    phi_hat: Vec<RLinearMap<T>>,
    dphi: Vec<(CMatrix<T>, CMatrix<T>)>,
    max_defect: T,
}

/// RK4 state: `(u_α, L̂, Â)`.
type State<T> = (CMatrix<T>, CMatrix<T>, CMatrix<T>);

fn rhs<T: Real>(h: &QuadraticHamiltonian<T>, t: T, s: &State<T>) -> Result<State<T>> {
    let minus_i = -c_i::<T>();
    let alpha = h.alpha(t)?;
    let b = h.beta_matrix(t);
    let du = (&alpha * &s.0).map(|z| z * minus_i);
    let b_hat = s.0.adjoint() * b * conj(&s.0);
    let dl = &b_hat * conj(&s.2);
    let da = &b_hat * conj(&s.1);
    Ok((du, dl, da))
}

fn axpy<T: Real>(s: &State<T>, k: &State<T>, a: T) -> State<T> {
    let f = c_real(a);
    (&s.0 + k.0.map(|z| z * f), &s.1 + k.1.map(|z| z * f), &s.2 + k.2.map(|z| z * f))
}

/// Derivative of the full `φ = u_α φ̂`: `(−iαL + B conj(A), −iαA + B conj(L))`.
fn phi_derivative<T: Real>(h: &QuadraticHamiltonian<T>, t: T, phi: &RLinearMap<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let minus_i = -c_i::<T>();
    let alpha = h.alpha(t)?;
    let b = h.beta_matrix(t);
    let dl = (&alpha * phi.linear()).map(|z| z * minus_i) + &b * conj(phi.antilinear());
    let da = (&alpha * phi.antilinear()).map(|z| z * minus_i) + &b * conj(phi.linear());
    Ok((dl, da))
}

/// Solves `i∂_t u = α_t u`, `u(0) = I` on the Hamiltonian's grid.
pub fn integrate_u_alpha<T: Real>(h: &QuadraticHamiltonian<T>) -> Result<Vec<CMatrix<T>>> {
    let free = QuadraticHamiltonian { beta: QuadraticHamiltonian::free(h.dim, h.grid).beta, ..h.clone() };
    Ok(integrate_flow(&free)?.u_alpha)
}

/// Integrates `φ(t,0)` over the grid; fails if the terminal symplecticity
/// defect exceeds `1e-6` (or `√ε_mach` in single precision).
pub fn integrate_flow<T: Real>(h: &QuadraticHamiltonian<T>) -> Result<FlowResult<T>> {
    let d = h.dim;
    let grid = h.grid;
    let dt = grid.step();
    let half = T::lit(0.5);
    let sixth = T::one() / T::of_usize(6);

    let mut state: State<T> = (identity(d), identity(d), zeros(d, d));
    let mut u_alpha = Vec::with_capacity(grid.steps + 1);
    let mut phi_hat = Vec::with_capacity(grid.steps + 1);
    let mut phi = Vec::with_capacity(grid.steps + 1);
    let mut dphi = Vec::with_capacity(grid.steps + 1);
    let mut max_defect = T::zero();

    let mut record = |state: &State<T>, t: T| -> Result<()> {
        let hat = RLinearMap::new(state.1.clone(), state.2.clone())?;
        let full = RLinearMap::new(&state.0 * &state.1, &state.0 * &state.2)?;
        let check = full.is_symplectomorphism(T::one());
        max_defect = max_defect.max(check.linear_defect.max(check.cross_defect));
        dphi.push(phi_derivative(h, t, &full)?);
        u_alpha.push(state.0.clone());
        phi_hat.push(hat);
        phi.push(full);
        Ok(())
    };

    record(&state, T::zero())?;
    for i in 0..grid.steps {
        let t = grid.time(i);
        let k1 = rhs(h, t, &state)?;
        let k2 = rhs(h, t + dt * half, &axpy(&state, &k1, dt * half))?;
        let k3 = rhs(h, t + dt * half, &axpy(&state, &k2, dt * half))?;
        let k4 = rhs(h, t + dt, &axpy(&state, &k3, dt))?;
        let incr = axpy(&axpy(&axpy(&k1, &k2, T::lit(2.0)), &k3, T::lit(2.0)), &k4, T::one());
        state = axpy(&state, &incr, dt * sixth);
        record(&state, grid.time(i + 1))?;
    }

    let limit = T::lit(1e-6).max(T::default_epsilon().sqrt());
    let terminal = phi.last().expect("at least t = 0").is_symplectomorphism(limit);
    let terminal_defect = terminal.linear_defect.max(terminal.cross_defect);
    if !terminal.holds {
        return Err(Error::SymplecticDrift {
            t: grid.t_end.to_f64_lossy(),
            defect: terminal_defect.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    log::debug!(
        "flow integrated: {} steps of {:e}, max symplecticity defect {:e}",
        grid.steps,
        dt.to_f64_lossy(),
        max_defect.to_f64_lossy()
    );
    Ok(FlowResult { grid, phi, u_alpha, phi_hat, dphi, max_defect })
}

impl<T: Real> FlowResult<T> {
    pub fn dim(&self) -> usize {
        self.phi[0].dim()
    }

    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    pub fn times(&self) -> Vec<T> {
        self.grid.times()
    }

    pub fn t_end(&self) -> T {
        self.grid.t_end
    }

    pub fn max_symplectic_defect(&self) -> T {
        self.max_defect
    }

    pub fn phis(&self) -> &[RLinearMap<T>] {
        &self.phi
    }

    /// `φ(t,0)` at a grid time.
    pub fn phi(&self, t: T) -> Result<&RLinearMap<T>> {
        Ok(&self.phi[self.grid.index_of(t)?])
    }

    pub fn phi_hat(&self, t: T) -> Result<&RLinearMap<T>> {
        Ok(&self.phi_hat[self.grid.index_of(t)?])
    }

    pub fn u_alpha(&self, t: T) -> Result<&CMatrix<T>> {
        Ok(&self.u_alpha[self.grid.index_of(t)?])
    }

    /// `φ(0,t) = φ(t,0)⁻¹ = L* − A*`.
    pub fn phi_inverse(&self, t: T) -> Result<RLinearMap<T>> {
        Ok(self.phi(t)?.symplectic_inverse())
    }

    /// `φ(t,s) = φ(t,0) ∘ φ(s,0)⁻¹` at grid times.
    pub fn phi_between(&self, t: T, s: T) -> Result<RLinearMap<T>> {
        self.phi(t)?.compose(&self.phi(s)?.symplectic_inverse())
    }

    /// `φ(s,0)` at any `s ∈ [0, t_end]` by cubic Hermite interpolation.
    pub fn phi_interp(&self, s: T) -> Result<RLinearMap<T>> {
        let t_end = self.grid.t_end;
        let slack = T::lit(1e-12) * T::one().max(t_end);
        if s < -slack || s > t_end + slack {
            return Err(Error::OutOfRange { t: s.to_f64_lossy(), t_end: t_end.to_f64_lossy() });
        }
        if self.grid.steps == 0 {
            return Ok(self.phi[0].clone());
        }
        let h = self.grid.step();
        let x = (s / h).to_f64_lossy().max(0.0);
        let i = (x.floor() as usize).min(self.grid.steps - 1);
        let tau = (s - self.grid.time(i)) / h;
        let (tau2, tau3) = (tau * tau, tau * tau * tau);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * tau3 - three * tau2 + T::one();
        let h10 = (tau3 - two * tau2 + tau) * h;
        let h01 = -two * tau3 + three * tau2;
        let h11 = (tau3 - tau2) * h;
        let blend = |a: &CMatrix<T>, da: &CMatrix<T>, b: &CMatrix<T>, db: &CMatrix<T>| {
            a.map(|z| z * c_real(h00))
                + da.map(|z| z * c_real(h10))
                + b.map(|z| z * c_real(h01))
                + db.map(|z| z * c_real(h11))
        };
        let (p0, p1) = (&self.phi[i], &self.phi[i + 1]);
        let (d0, d1) = (&self.dphi[i], &self.dphi[i + 1]);
        RLinearMap::new(
            blend(p0.linear(), &d0.0, p1.linear(), &d1.0),
            blend(p0.antilinear(), &d0.1, p1.antilinear(), &d1.1),
        )
    }

    /// Matrix `V = M_L^H M_A` of `L*(t,0)A(t,0)`.
    pub fn v_matrix(&self, t: T) -> Result<CMatrix<T>> {
        let phi = self.phi(t)?;
        Ok(phi.linear().adjoint() * phi.antilinear())
    }

    /// `v_t` with `⟨z1⊗z2, v_t⟩ = ⟨z1, L*(t,0)A(t,0) z2⟩`.
    pub fn v_vector(&self, t: T) -> Result<SymTensor<T>> {
        SymTensor::from_symmetric_matrix(&self.v_matrix(t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, op_norm};
    use crate::random::{random_complex_symmetric, random_hermitian, random_vector, Rng};
    use crate::scalar::{c_lit, C};

    fn c(re: f64, im: f64) -> C<f64> {
        c_lit(re, im)
    }

    fn im_z2(t_end: f64, dt: f64) -> QuadraticHamiltonian<f64> {
        let beta = SymTensor::from_symmetric_matrix(&CMatrix::from_element(1, 1, c(1.0, 0.0))).unwrap();
        QuadraticHamiltonian::constant(None, beta, TimeGrid::new(t_end, dt).unwrap()).unwrap()
    }

    #[test]
    fn grid_shrinks_step_to_divide_interval() {
        let g = TimeGrid::new(1.0f64, 0.3).unwrap();
        assert_eq!(g.steps, 4);
        assert!((g.step() - 0.25).abs() < 1e-15);
        assert_eq!(g.index_of(0.75).unwrap(), 3);
        assert!(g.index_of(0.3).is_err());
        assert!(matches!(TimeGrid::new(1.0f64, 0.0), Err(Error::NonPositiveStep(_))));
        assert_eq!(TimeGrid::new(1.0f64, 1e-3).unwrap().steps, 1000);
    }

    #[test]
    fn free_flow_is_identity() {
        let h = QuadraticHamiltonian::<f64>::free(2, TimeGrid::new(1.0, 0.1).unwrap());
        let f = integrate_flow(&h).unwrap();
        for phi in f.phis() {
            assert_eq!(*phi, RLinearMap::identity(2));
        }
        assert_eq!(integrate_u_alpha(&h).unwrap()[10], identity::<f64>(2));
    }

    #[test]
    fn worked_example_flow() {
        let f = integrate_flow(&im_z2(1.0, 1e-3)).unwrap();
        for &t in &[0.3, 0.7, 1.0f64] {
            let phi = f.phi(t).unwrap();
            assert!((phi.linear()[(0, 0)] - c(t.cosh(), 0.0)).norm() < 1e-8);
            assert!((phi.antilinear()[(0, 0)] - c(t.sinh(), 0.0)).norm() < 1e-8);
            let v = f.v_vector(t).unwrap();
            assert!((v.coeffs()[(0, 0)] - c(t.cosh() * t.sinh(), 0.0)).norm() < 1e-8);
        }
        assert_eq!(*f.phi(0.0).unwrap(), RLinearMap::identity(1));
        assert_eq!(f.v_vector(0.0).unwrap().op_norm(), 0.0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |dt: f64| {
            let f = integrate_flow(&im_z2(1.0, dt)).unwrap();
            (f.phi(1.0).unwrap().linear()[(0, 0)] - c(1.0f64.cosh(), 0.0)).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn constant_alpha_gives_matrix_exponential() {
        let mut rng = Rng::seeded(50);
        let a = random_hermitian::<f64>(&mut rng, 3, 1.0);
        let grid = TimeGrid::new(1.0, 1e-3).unwrap();
        let h = QuadraticHamiltonian::free(3, grid).with_alpha(Arc::new(move |_| a.clone())).unwrap();
        let a = h.alpha(0.0).unwrap();
        let u = integrate_u_alpha(&h).unwrap();
        let expect = expm(&a.map(|z| z * c(0.0, -1.0)));
        assert!(op_norm(&(&u[grid.steps] - expect)) < 1e-8);
        assert!(crate::linalg::unitarity_defect(&u[grid.steps]) < 1e-8);
    }

    #[test]
    fn time_dependent_diagonal_alpha() {
        let grid = TimeGrid::new(1.0, 1e-3).unwrap();
        let h = QuadraticHamiltonian::free(2, grid)
            .with_alpha(Arc::new(|t: f64| {
                let mut m = CMatrix::zeros(2, 2);
                m[(0, 0)] = c(t.cos(), 0.0);
                m[(1, 1)] = c(2.0 * t, 0.0);
                m
            }))
            .unwrap();
        let u = integrate_u_alpha(&h).unwrap();
        let last = &u[grid.steps];
        let w0 = 1.0f64.sin();
        assert!((last[(0, 0)] - c(w0.cos(), -w0.sin())).norm() < 1e-8);
        assert!((last[(1, 1)] - c(1.0f64.cos(), -1.0f64.sin())).norm() < 1e-8);
    }

    #[test]
    fn non_hermitian_alpha_is_rejected() {
        let grid = TimeGrid::new(0.1, 0.05).unwrap();
        let h = QuadraticHamiltonian::free(1, grid)
            .with_alpha(Arc::new(|_| CMatrix::from_element(1, 1, c(0.0, 1.0))))
            .unwrap();
        assert!(matches!(integrate_flow(&h), Err(Error::NotHermitian { .. })));
    }

    fn random_autonomous(seed: u64, d: usize, dt: f64) -> QuadraticHamiltonian<f64> {
        let mut rng = Rng::seeded(seed);
        let a = random_hermitian::<f64>(&mut rng, d, 1.0);
        let b = random_complex_symmetric::<f64>(&mut rng, d, 0.6);
        QuadraticHamiltonian::constant(
            Some(a),
            SymTensor::from_symmetric_matrix(&b).unwrap(),
            TimeGrid::new(1.0, dt).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn group_law_for_autonomous_flow() {
        let f = integrate_flow(&random_autonomous(51, 2, 1e-3)).unwrap();
        let half = f.phi(0.5).unwrap();
        let twice = half.compose(half).unwrap();
        assert!(twice.distance(f.phi(1.0).unwrap()) < 1e-8);
        // φ(t,s) depends only on t − s
        let between = f.phi_between(0.8, 0.3).unwrap();
        assert!(between.distance(f.phi(0.5).unwrap()) < 1e-8);
    }

    #[test]
    fn flow_preserves_symplectic_form_and_factorises() {
        let h = random_autonomous(52, 2, 1e-3);
        let f = integrate_flow(&h).unwrap();
        let mut rng = Rng::seeded(53);
        for &t in &[0.25, 1.0] {
            let phi = f.phi(t).unwrap();
            for _ in 0..5 {
                let z1 = random_vector::<f64>(&mut rng, 2);
                let z2 = random_vector::<f64>(&mut rng, 2);
                let before = z1.dotc(&z2).im;
                let after = phi.apply(&z1).unwrap().dotc(&phi.apply(&z2).unwrap()).im;
                assert!((before - after).abs() < 1e-8);
                // v_t is symmetric
                let v = f.v_matrix(t).unwrap();
                assert!(op_norm(&(&v - v.transpose())) < 1e-8);
            }
            let u = RLinearMap::from_linear(f.u_alpha(t).unwrap().clone()).unwrap();
            assert!(u.compose(f.phi_hat(t).unwrap()).unwrap().distance(phi) < 1e-12);
            assert!(phi.norm_x() >= 1.0);
        }
        assert!(f.max_symplectic_defect() < 1e-8);
    }

    #[test]
    fn dense_output_is_accurate_between_nodes() {
        let f = integrate_flow(&im_z2(1.0, 1e-2)).unwrap();
        for &s in &[0.0, 0.123, 0.5051, 0.999, 1.0] {
            let phi = f.phi_interp(s).unwrap();
            assert!((phi.linear()[(0, 0)] - c(f64::cosh(s), 0.0)).norm() < 1e-9);
            assert!((phi.antilinear()[(0, 0)] - c(f64::sinh(s), 0.0)).norm() < 1e-9);
        }
        assert!(matches!(f.phi_interp(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(f.phi(0.123), Err(Error::OffGrid { .. })));
    }
}
