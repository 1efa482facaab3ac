//! Seeded random generators for test fixtures, cross-checks and sweeps.
//!
//! Everything draws from a ChaCha8 stream so results are reproducible for a
//! given seed; [`Rng::split`] hands out independent streams for parallel work.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::poly::{PolySymbol, SymTensor};
use crate::scalar::{c_real, CMatrix, CVector, Real, C};
use crate::symplectic::{exp_antilinear, RLinearMap};

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    seed: u64,
}

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed), seed }
    }

    /// Independent stream `k` derived from the original seed.
    pub fn split(&self, k: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(k.wrapping_add(1));
        Self { inner, seed: self.seed }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn complex_normal<T: Real>(&mut self) -> C<T> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C::new(T::lit(s * self.normal()), T::lit(s * self.normal()))
    }
}

pub fn random_vector<T: Real>(rng: &mut Rng, d: usize) -> CVector<T> {
    CVector::from_fn(d, |_, _| rng.complex_normal())
}

pub fn random_matrix<T: Real>(rng: &mut Rng, d: usize) -> CMatrix<T> {
    CMatrix::from_fn(d, d, |_, _| rng.complex_normal())
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag R` absorbed into `Q`.
pub fn random_unitary<T: Real>(rng: &mut Rng, d: usize) -> CMatrix<T> {
    let qr = random_matrix::<T>(rng, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let z = r[(j, j)];
        let m = crate::scalar::modulus(z);
        if m > T::zero() {
            let phase = z / c_real(m);
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn random_hermitian<T: Real>(rng: &mut Rng, d: usize, scale: f64) -> CMatrix<T> {
    let g = random_matrix::<T>(rng, d);
    (&g + g.adjoint()).map(|z| z * c_real(T::lit(0.5 * scale)))
}

pub fn random_complex_symmetric<T: Real>(rng: &mut Rng, d: usize, scale: f64) -> CMatrix<T> {
    let g = random_matrix::<T>(rng, d);
    (&g + g.transpose()).map(|z| z * c_real(T::lit(0.5 * scale)))
}

/// Arbitrary (generally non-symplectic) real-linear map.
pub fn random_rlinear<T: Real>(rng: &mut Rng, d: usize) -> RLinearMap<T> {
    RLinearMap::new(random_matrix(rng, d), random_matrix(rng, d)).expect("square")
}

/// `u·e^{cρ}` with Haar `u`, a Haar conjugation basis and `ρ_j` uniform on
/// `[0, rho_max]`.
pub fn random_symplectomorphism<T: Real>(rng: &mut Rng, d: usize, rho_max: f64) -> RLinearMap<T> {
    let u = random_unitary::<T>(rng, d);
    let basis = random_unitary::<T>(rng, d);
    let rho: Vec<T> = (0..d).map(|_| T::lit(rng.uniform(0.0, rho_max))).collect();
    RLinearMap::from_linear(u).expect("square").compose(&exp_antilinear(&basis, &rho)).expect("dim")
}

/// Random unitary near the identity, `exp(i·H)` with `‖H‖` of order `scale`.
pub fn random_unitary_near_identity<T: Real>(rng: &mut Rng, d: usize, scale: f64) -> CMatrix<T> {
    let h = random_hermitian::<T>(rng, d, scale);
    let ih = h.map(|z| z * crate::scalar::c_i());
    crate::linalg::expm(&ih)
}

/// Random symbol with every `(p, q)` type of order `≤ max_order` present and
/// standard complex Gaussian coefficients times `scale`.
pub fn random_symbol<T: Real>(rng: &mut Rng, d: usize, max_order: usize, scale: f64) -> PolySymbol<T> {
    let mut tensors = Vec::new();
    for m in 0..=max_order {
        for p in 0..=m {
            let mut t = SymTensor::zeros(d, p, m - p);
            let s = c_real(T::lit(scale));
            for z in t.coeffs_mut().iter_mut() {
                *z = rng.complex_normal::<T>() * s;
            }
            tensors.push(t);
        }
    }
    PolySymbol::from_tensors(d, tensors).expect("consistent dims")
}

/// Random symbol of exact order `m` with only the top-order types present.
pub fn random_homogeneous_symbol<T: Real>(rng: &mut Rng, d: usize, m: usize, scale: f64) -> PolySymbol<T> {
    let mut tensors = Vec::new();
    for p in 0..=m {
        let mut t = SymTensor::zeros(d, p, m - p);
        for z in t.coeffs_mut().iter_mut() {
            *z = rng.complex_normal::<T>() * c_real(T::lit(scale));
        }
        tensors.push(t);
    }
    PolySymbol::from_tensors(d, tensors).expect("consistent dims")
}
