//! Real-linear maps on `C^d` split into complex-linear and complex-antilinear
//! parts, their adjoints, symplectomorphism tests and the reduction
//! `T = u·e^{cρ}`.
//!
//! A map is stored as the pair `(M_L, M_A)` acting by `z ↦ M_L z + M_A conj(z)`.
//! Under this convention the adjoint of the antilinear part is the plain
//! transpose of `M_A`.
//!
//! In finite dimension every symplectomorphism has a Hilbert-Schmidt
//! antilinear part, so every one of them is implementable on Fock space; no
//! separate check is needed.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, conj, frobenius, identity, op_norm, zeros};
use crate::scalar::{c_i, c_real, CMatrix, CVector, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct RLinearMap<T: Real> {
    linear: CMatrix<T>,
    antilinear: CMatrix<T>,
}

impl<T: Real> RLinearMap<T> {
    pub fn new(linear: CMatrix<T>, antilinear: CMatrix<T>) -> Result<Self> {
        let d = linear.nrows();
        for m in [&linear, &antilinear] {
            if m.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
            }
            if m.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, got: m.ncols() });
            }
        }
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(Self { linear, antilinear })
    }

    pub fn identity(dim: usize) -> Self {
        Self { linear: identity(dim), antilinear: zeros(dim, dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { linear: zeros(dim, dim), antilinear: zeros(dim, dim) }
    }

    pub fn from_linear(linear: CMatrix<T>) -> Result<Self> {
        let d = linear.nrows();
        Self::new(linear, zeros(d, d))
    }

    pub fn from_antilinear(antilinear: CMatrix<T>) -> Result<Self> {
        let d = antilinear.nrows();
        Self::new(zeros(d, d), antilinear)
    }

    /// Multiplication by a complex scalar on the left, `z ↦ s·T(z)`.
    pub fn scaled(&self, s: C<T>) -> Self {
        Self { linear: self.linear.map(|z| z * s), antilinear: self.antilinear.map(|z| z * s) }
    }

    pub fn dim(&self) -> usize {
        self.linear.nrows()
    }

    pub fn linear(&self) -> &CMatrix<T> {
        &self.linear
    }

    pub fn antilinear(&self) -> &CMatrix<T> {
        &self.antilinear
    }

    pub fn linear_part(&self) -> Self {
        Self { linear: self.linear.clone(), antilinear: zeros(self.dim(), self.dim()) }
    }

    pub fn antilinear_part(&self) -> Self {
        Self { linear: zeros(self.dim(), self.dim()), antilinear: self.antilinear.clone() }
    }

    pub fn apply(&self, z: &CVector<T>) -> Result<CVector<T>> {
        self.check_vec(z)?;
        Ok(&self.linear * z + &self.antilinear * linalg::conj_vec(z))
    }

    fn check_vec(&self, z: &CVector<T>) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        Ok(())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        // S(T_L z + T_A z̄) = (S_L T_L + S_A conj(T_A)) z + (S_L T_A + S_A conj(T_L)) z̄
        let linear = &self.linear * &other.linear + &self.antilinear * conj(&other.antilinear);
        let antilinear = &self.linear * &other.antilinear + &self.antilinear * conj(&other.linear);
        Ok(Self { linear, antilinear })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { linear: &self.linear + &other.linear, antilinear: &self.antilinear + &other.antilinear })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { linear: &self.linear - &other.linear, antilinear: &self.antilinear - &other.antilinear })
    }

    /// `L* + A*`, the antilinear adjoint being the plain transpose.
    pub fn adjoint(&self) -> Self {
        Self { linear: self.linear.adjoint(), antilinear: self.antilinear.transpose() }
    }

    /// `L - A`, i.e. `-i T i`.
    pub fn flip_antilinear(&self) -> Self {
        Self { linear: self.linear.clone(), antilinear: -self.antilinear.clone() }
    }

    /// Inverse of a symplectomorphism, `L* - A*`.
    pub fn symplectic_inverse(&self) -> Self {
        self.adjoint().flip_antilinear()
    }

    /// Re-derives the split from the real-linear action alone via
    /// `L = (T - iTi)/2`, `A = (T + iTi)/2`.
    pub fn resplit(&self) -> Self {
        let d = self.dim();
        let i_map = Self::from_linear(identity::<T>(d).map(|z| z * c_i())).expect("square");
        let iti = i_map.compose(&self.compose(&i_map).expect("dim")).expect("dim");
        let half = c_real(T::lit(0.5));
        let lin = self.sub(&iti).expect("dim").scaled(half);
        let anti = self.add(&iti).expect("dim").scaled(half);
        Self { linear: lin.linear, antilinear: anti.antilinear }
    }

    /// `‖M_L‖_op + ‖M_A‖_HS`.
    pub fn norm_x(&self) -> T {
        op_norm(&self.linear) + frobenius(&self.antilinear)
    }

    /// Hilbert-Schmidt norm of the antilinear part.
    pub fn antilinear_hs_norm(&self) -> T {
        frobenius(&self.antilinear)
    }

    /// Real `2d×2d` matrix acting on `(Re z, Im z)`.
    pub fn to_real(&self) -> DMatrix<T> {
        linalg::realify_linear(&self.linear) + linalg::realify_antilinear(&self.antilinear)
    }

    /// Inverse of [`RLinearMap::to_real`].
    pub fn from_real(r: &DMatrix<T>) -> Result<Self> {
        let n2 = r.nrows();
        if !n2.is_multiple_of(2) || r.ncols() != n2 || n2 == 0 {
            return Err(Error::DimensionMismatch { expected: 2, got: n2 });
        }
        let d = n2 / 2;
        let half = T::lit(0.5);
        let mut lin = zeros::<T>(d, d);
        let mut anti = zeros::<T>(d, d);
        for i in 0..d {
            for j in 0..d {
                let a = r[(i, j)];
                let g = r[(i, j + d)];
                let b = r[(i + d, j)];
                let dd = r[(i + d, j + d)];
                lin[(i, j)] = C::new((a + dd) * half, (b - g) * half);
                anti[(i, j)] = C::new((a - dd) * half, (b + g) * half);
            }
        }
        Self::new(lin, anti)
    }

    /// `‖T_Rᵀ J T_R - J‖_op` for the standard symplectic form `Im⟨z1, z2⟩`.
    pub fn symplectic_form_defect(&self) -> T {
        let r = self.to_real();
        let j = standard_symplectic_form::<T>(self.dim());
        let diff = r.transpose() * &j * &r - j;
        real_op_norm(&diff)
    }

    /// Condition `L*L - A*A = I` and `L*A = A*L`, with both defects reported.
    pub fn is_symplectomorphism(&self, tol: T) -> SymplecticCheck<T> {
        let d = self.dim();
        // A*A is linear with matrix M_Aᵀ conj(M_A); L*A is antilinear with M_L^H M_A.
        let first = self.linear.adjoint() * &self.linear
            - self.antilinear.transpose() * conj(&self.antilinear)
            - identity::<T>(d);
        let second = self.linear.adjoint() * &self.antilinear - self.antilinear.transpose() * conj(&self.linear);
        let linear_defect = op_norm(&first);
        let cross_defect = op_norm(&second);
        SymplecticCheck { holds: linear_defect <= tol && cross_defect <= tol, linear_defect, cross_defect }
    }

    /// Defects of the seven equivalent symplectomorphism conditions, in order.
    pub fn condition_defects(&self) -> [T; 7] {
        let d = self.dim();
        let id = Self::identity(d);
        let l = self.linear_part();
        let a = self.antilinear_part();
        let ls = l.adjoint();
        let as_ = a.adjoint();
        let dist = |x: &Self, y: &Self| {
            let diff = x.sub(y).expect("dim");
            op_norm(&diff.linear) + op_norm(&diff.antilinear)
        };
        let c1 = self.symplectic_form_defect();
        let c2 = dist(&ls.sub(&as_).unwrap().compose(self).unwrap(), &id);
        let c3 = dist(&ls.add(&as_).unwrap().compose(&self.flip_antilinear()).unwrap(), &id);
        let c4 = {
            let first = ls.compose(&l).unwrap().sub(&as_.compose(&a).unwrap()).unwrap();
            let second = ls.compose(&a).unwrap();
            let third = as_.compose(&l).unwrap();
            dist(&first, &id).max(dist(&second, &third))
        };
        let c5 = ls.sub(&as_).unwrap().symplectic_form_defect();
        let c6 = self.flip_antilinear().symplectic_form_defect();
        let c7 = {
            let first = l.compose(&ls).unwrap().sub(&a.compose(&as_).unwrap()).unwrap();
            let second = as_.compose(&l).unwrap();
            let third = ls.compose(&a).unwrap();
            dist(&first, &id).max(dist(&second, &third))
        };
        [c1, c2, c3, c4, c5, c6, c7]
    }

    pub fn distance(&self, other: &Self) -> T {
        op_norm(&(&self.linear - &other.linear)) + op_norm(&(&self.antilinear - &other.antilinear))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticCheck<T> {
    pub holds: bool,
    pub linear_defect: T,
    pub cross_defect: T,
}

pub fn standard_symplectic_form<T: Real>(dim: usize) -> DMatrix<T> {
    let mut j = DMatrix::<T>::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        j[(i, i + dim)] = T::one();
        j[(i + dim, i)] = -T::one();
    }
    j
}

fn real_op_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.clone().singular_values().iter().fold(T::zero(), |acc, &s| if s > acc { s } else { acc })
}

/// `T = u·(cosh ρ + c·sinh ρ)`, with `c` the conjugation fixing the columns of
/// `conj_basis` and `ρ` diagonal in that basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplectoDecomposition<T: Real> {
    pub unitary: CMatrix<T>,
    pub conj_basis: CMatrix<T>,
    pub rho: Vec<T>,
}

impl<T: Real> SymplectoDecomposition<T> {
    pub fn reconstruct(&self) -> RLinearMap<T> {
        let u = RLinearMap::from_linear(self.unitary.clone()).expect("square");
        u.compose(&exp_antilinear(&self.conj_basis, &self.rho)).expect("dim")
    }

    /// The conjugation `c` as an antilinear matrix in the standard basis.
    pub fn conjugation(&self) -> CMatrix<T> {
        &self.conj_basis * self.conj_basis.transpose()
    }

    /// `cρ` as an antilinear matrix: `z ↦ Σ ρ_j conj(⟨e_j, z⟩) e_j`.
    pub fn c_rho(&self) -> CMatrix<T> {
        let d = self.rho.len();
        let mut diag = zeros::<T>(d, d);
        for (j, &r) in self.rho.iter().enumerate() {
            diag[(j, j)] = c_real(r);
        }
        &self.conj_basis * diag * self.conj_basis.transpose()
    }
}

/// `cosh ρ + c·sinh ρ` in the standard basis.
pub fn exp_antilinear<T: Real>(conj_basis: &CMatrix<T>, rho: &[T]) -> RLinearMap<T> {
    let d = rho.len();
    let mut ch = zeros::<T>(d, d);
    let mut sh = zeros::<T>(d, d);
    for (j, &r) in rho.iter().enumerate() {
        ch[(j, j)] = c_real(r.cosh());
        sh[(j, j)] = c_real(r.sinh());
    }
    RLinearMap { linear: conj_basis * ch * conj_basis.adjoint(), antilinear: conj_basis * sh * conj_basis.transpose() }
}

/// `arccosh μ = log(μ + sqrt(μ² - 1))` with `μ` clamped to `≥ 1`.
pub fn arccosh_clamped<T: Real>(mu: T) -> T {
    let mu = if mu < T::one() { T::one() } else { mu };
    (mu + (mu * mu - T::one()).sqrt()).ln()
}

fn arcsinh<T: Real>(x: T) -> T {
    (x + (x * x + T::one()).sqrt()).ln()
}

/// Reduces a symplectomorphism to `u·e^{cρ}`.
///
/// `L = u|L|` is the polar decomposition; `u*A` is then a self-adjoint
/// antilinear map with non-negative eigenvalues `λ_j = sinh ρ_j` on an
/// orthonormal basis, and `|L| = cosh ρ` on the same basis. Working from
/// `u*A` alone avoids grouping nearly equal singular values of `L`, and
/// `arcsinh λ_j` stays accurate near `ρ = 0` where `arccosh` does not.
pub fn decompose<T: Real>(t: &RLinearMap<T>) -> Result<SymplectoDecomposition<T>> {
    let scale = T::one().max(t.norm_x() * t.norm_x());
    let check = t.is_symplectomorphism(T::lit(1e-8) * scale);
    if !check.holds {
        return Err(Error::NotSymplectic {
            linear_defect: check.linear_defect.to_f64_lossy(),
            cross_defect: check.cross_defect.to_f64_lossy(),
        });
    }

    let u = linalg::polar_unitary(&t.linear)?;
    // u*A is a self-adjoint antilinear map; its matrix is complex symmetric
    // and its Takagi basis is the conjugation basis.
    let s_mat = u.adjoint() * &t.antilinear;
    let (basis, lambdas) = reduce_self_adjoint_antilinear(&s_mat)?;
    let rho = lambdas.into_iter().map(arcsinh).collect();
    Ok(SymplectoDecomposition { unitary: u, conj_basis: basis, rho })
}

/// Orthonormal basis `w_j` with `F conj(w_j) = λ_j w_j`, `λ_j ≥ 0`, for a
/// complex-symmetric `F` (the matrix of a self-adjoint antilinear map).
///
/// Uses the real form `[[P, Q], [Q, -P]]` of `F = P + iQ`: its eigenvalues come
/// in pairs `±λ_j`, and the eigenvectors of the non-negative half give the
/// basis. The kernel, being stable under multiplication by `i`, is handled by
/// a complex Gram-Schmidt pass.
pub fn reduce_self_adjoint_antilinear<T: Real>(f: &CMatrix<T>) -> Result<(CMatrix<T>, Vec<T>)> {
    let k = f.nrows();
    let sym = (f + f.transpose()).map(|z| z * c_real(T::lit(0.5)));
    let scale = T::one().max(linalg::max_abs(&sym));
    let zero_tol = T::lit(1e-12) * scale;
    let r = linalg::realify_antilinear(&sym);
    let (vals, vecs) = linalg::real_symmetric_eigen(&r);

    let mut out = zeros::<T>(k, k);
    let mut lambdas = Vec::with_capacity(k);
    // descending eigenvalues: strictly positive ones first
    let mut taken = 0;
    for idx in (0..2 * k).rev() {
        if taken == k || vals[idx] <= zero_tol {
            break;
        }
        let col = real_col_to_complex(&vecs, idx, k);
        out.set_column(taken, &col);
        lambdas.push(vals[idx]);
        taken += 1;
    }
    if taken < k {
        // kernel: collect candidate vectors and orthonormalise against everything so far
        let candidates: Vec<CVector<T>> = (0..2 * k)
            .filter(|&idx| vals[idx].abs() <= zero_tol)
            .map(|idx| real_col_to_complex(&vecs, idx, k))
            .chain((0..k).map(|i| {
                let mut e = CVector::<T>::zeros(k);
                e[i] = c_real(T::one());
                e
            }))
            .collect();
        for cand in candidates {
            if taken == k {
                break;
            }
            let mut w = cand;
            for j in 0..taken {
                let col = out.column(j).clone_owned();
                let proj = col.dotc(&w);
                w -= col * proj;
            }
            let n = linalg::vec_norm(&w);
            if n > T::lit(1e-6) {
                out.set_column(taken, &(w / c_real(n)));
                lambdas.push(T::zero());
                taken += 1;
            }
        }
    }
    if taken < k {
        return Err(Error::Eigensolver("could not complete the antilinear eigenbasis".into()));
    }
    Ok((out, lambdas))
}

fn real_col_to_complex<T: Real>(vecs: &DMatrix<T>, idx: usize, k: usize) -> CVector<T> {
    let mut col = CVector::<T>::zeros(k);
    let mut norm = T::zero();
    for i in 0..k {
        col[i] = C::new(vecs[(i, idx)], vecs[(i + k, idx)]);
        norm += col[i].norm_sqr();
    }
    col / c_real(norm.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_symplectomorphism, random_unitary, Rng};
    use crate::scalar::c_lit;

    fn example_flow(t: f64) -> RLinearMap<f64> {
        RLinearMap::new(
            CMatrix::from_element(1, 1, c_lit(t.cosh(), 0.0)),
            CMatrix::from_element(1, 1, c_lit(t.sinh(), 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn identity_is_neutral_for_composition() {
        let mut rng = Rng::seeded(1);
        let t = random_symplectomorphism::<f64>(&mut rng, 3, 0.8);
        let id = RLinearMap::identity(3);
        assert!(id.compose(&t).unwrap().distance(&t) < 1e-14);
        assert!(t.compose(&id).unwrap().distance(&t) < 1e-14);
    }

    #[test]
    fn hyperbolic_addition_law() {
        let (s, t) = (0.4, 0.9);
        let st = example_flow(s).compose(&example_flow(t)).unwrap();
        assert!(st.distance(&example_flow(s + t)) < 1e-13);
    }

    #[test]
    fn i_times_i_is_minus_identity() {
        let i = RLinearMap::from_linear(
            CMatrix::from_element(2, 2, c_lit(0.0, 0.0)) + linalg::identity::<f64>(2).map(|z| z * c_lit(0.0, 1.0)),
        )
        .unwrap();
        let ii = i.compose(&i).unwrap();
        assert!((ii.linear() + linalg::identity::<f64>(2)).norm() < 1e-15);
        assert_eq!(linalg::max_abs(ii.antilinear()), 0.0);
    }

    #[test]
    fn compose_matches_pointwise_application() {
        let mut rng = Rng::seeded(2);
        let s = crate::random::random_rlinear::<f64>(&mut rng, 3);
        let t = crate::random::random_rlinear::<f64>(&mut rng, 3);
        let z = crate::random::random_vector::<f64>(&mut rng, 3);
        let lhs = s.compose(&t).unwrap().apply(&z).unwrap();
        let rhs = s.apply(&t.apply(&z).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = RLinearMap::<f64>::identity(2);
        let b = RLinearMap::<f64>::identity(3);
        assert!(matches!(a.compose(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn real_antilinear_scalar_is_self_adjoint() {
        let a = RLinearMap::from_antilinear(CMatrix::from_element(1, 1, c_lit::<f64>(0.7, 0.0))).unwrap();
        assert_eq!(a.adjoint(), a);
    }

    #[test]
    fn antilinear_adjoint_identity() {
        let mut rng = Rng::seeded(3);
        let a = crate::random::random_rlinear::<f64>(&mut rng, 3).antilinear_part();
        let adj = a.adjoint();
        for _ in 0..5 {
            let z1 = crate::random::random_vector::<f64>(&mut rng, 3);
            let z2 = crate::random::random_vector::<f64>(&mut rng, 3);
            let lhs = z1.dotc(&a.apply(&z2).unwrap());
            let rhs = z2.dotc(&adj.apply(&z1).unwrap());
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_involutive_and_reverses_order() {
        let mut rng = Rng::seeded(4);
        let s = crate::random::random_rlinear::<f64>(&mut rng, 3);
        let t = crate::random::random_rlinear::<f64>(&mut rng, 3);
        assert_eq!(s.adjoint().adjoint(), s);
        let lhs = s.compose(&t).unwrap().adjoint();
        let rhs = t.adjoint().compose(&s.adjoint()).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn symplectic_predicate_examples() {
        let id = RLinearMap::<f64>::identity(2).is_symplectomorphism(1e-12);
        assert!(id.holds);
        assert_eq!(id.linear_defect, 0.0);
        let flow = example_flow(0.7).is_symplectomorphism(1e-12);
        assert!(flow.holds);
        let two = RLinearMap::<f64>::identity(1).scaled(c_lit(2.0, 0.0)).is_symplectomorphism(1e-6);
        assert!(!two.holds);
        assert!((two.linear_defect - 3.0).abs() < 1e-12);
    }

    #[test]
    fn resplit_recovers_the_pair() {
        let mut rng = Rng::seeded(5);
        let t = crate::random::random_rlinear::<f64>(&mut rng, 3);
        assert!(t.resplit().distance(&t) < 1e-13);
        let back = RLinearMap::from_real(&t.to_real()).unwrap();
        assert!(back.distance(&t) < 1e-13);
    }

    #[test]
    fn decompose_identity() {
        let dec = decompose(&RLinearMap::<f64>::identity(3)).unwrap();
        assert!((dec.unitary.clone() - linalg::identity::<f64>(3)).norm() < 1e-12);
        assert!(dec.rho.iter().all(|&r| r.abs() < 1e-12));
    }

    #[test]
    fn decompose_example_flow() {
        let dec = decompose(&example_flow(1.3)).unwrap();
        assert!((dec.unitary[(0, 0)] - c_lit(1.0, 0.0)).norm() < 1e-12);
        assert!((dec.rho[0] - 1.3).abs() < 1e-12);
        // c is complex conjugation up to the phase freedom of e_1: c = e e^T must be 1
        assert!((dec.conjugation()[(0, 0)] - c_lit(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn decompose_random_reconstructs() {
        let mut rng = Rng::seeded(6);
        for _ in 0..10 {
            let t = random_symplectomorphism::<f64>(&mut rng, 3, 1.0);
            let dec = decompose(&t).unwrap();
            assert!(dec.rho.iter().all(|&r| r >= 0.0));
            assert!(dec.reconstruct().distance(&t) < 1e-10);
            let u = &dec.unitary;
            assert!(linalg::unitarity_defect(u) < 1e-12);
        }
    }

    #[test]
    fn decompose_degenerate_spectrum() {
        // same ρ on a 2-dimensional block plus a trivial direction
        let mut rng = Rng::seeded(7);
        let u0 = random_unitary::<f64>(&mut rng, 3);
        let basis = random_unitary::<f64>(&mut rng, 3);
        let t = RLinearMap::from_linear(u0).unwrap().compose(&exp_antilinear(&basis, &[0.6, 0.6, 0.0])).unwrap();
        let dec = decompose(&t).unwrap();
        assert!(dec.reconstruct().distance(&t) < 1e-10);
    }

    #[test]
    fn exp_antilinear_examples() {
        let mut rng = Rng::seeded(8);
        let basis = random_unitary::<f64>(&mut rng, 2);
        assert!(exp_antilinear(&basis, &[0.0, 0.0]).distance(&RLinearMap::identity(2)) < 1e-14);
        let one = exp_antilinear(&CMatrix::from_element(1, 1, c_lit(1.0, 0.0)), &[0.5]);
        assert!(one.distance(&example_flow(0.5)) < 1e-15);
        let a = exp_antilinear(&basis, &[0.3, 1.1]);
        let b = exp_antilinear(&basis, &[0.4, 0.2]);
        let ab = a.compose(&b).unwrap();
        assert!(ab.distance(&exp_antilinear(&basis, &[0.7, 1.3])) < 1e-12);
    }

    #[test]
    fn clamped_arccosh() {
        assert_eq!(arccosh_clamped(0.999_999_9f64), 0.0);
        assert!((arccosh_clamped(1.3f64.cosh()) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn seven_conditions_agree_on_symplectomorphisms() {
        let mut rng = Rng::seeded(9);
        for _ in 0..5 {
            let t = random_symplectomorphism::<f64>(&mut rng, 3, 0.9);
            for (k, defect) in t.condition_defects().iter().enumerate() {
                assert!(*defect < 1e-10, "condition {} defect {}", k + 1, defect);
            }
            let inv = t.symplectic_inverse();
            assert!(t.compose(&inv).unwrap().distance(&RLinearMap::identity(3)) < 1e-10);
            assert!(op_norm(t.linear()) >= 1.0 - 1e-12);
        }
        let not = RLinearMap::<f64>::identity(2).scaled(c_lit(1.5, 0.0));
        assert!(not.condition_defects().iter().all(|&c| c > 1e-3));
    }
}
