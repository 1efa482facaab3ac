//! Small dense linear algebra helpers on complex matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{c_real, CMatrix, CVector, Real, C};

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

pub fn zeros<T: Real>(r: usize, c: usize) -> CMatrix<T> {
    CMatrix::zeros(r, c)
}

/// Entrywise complex conjugate (no transpose).
pub fn conj<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.map(|z| z.conj())
}

pub fn conj_vec<T: Real>(v: &CVector<T>) -> CVector<T> {
    v.map(|z| z.conj())
}

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn vec_norm<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Largest singular value (spectral norm).
pub fn op_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.nrows() == 0 || m.ncols() == 0 {
        return T::zero();
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return frobenius(m);
    }
    let sv = m.clone().singular_values();
    sv.iter().fold(T::zero(), |acc, &s| if s > acc { s } else { acc })
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let a = z.norm_sqr().sqrt();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

pub fn scale<T: Real>(m: &CMatrix<T>, s: C<T>) -> CMatrix<T> {
    m.map(|z| z * s)
}

pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()).map(|z| z * c_real(T::lit(0.5)))
}

pub fn hermitian_defect<T: Real>(m: &CMatrix<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    op_norm(&(m.adjoint() * m - identity::<T>(n)))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    sort_eigen(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn real_symmetric_eigen<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let sym = (m + m.transpose()) * T::lit(0.5);
    let eig = SymmetricEigen::new(sym);
    sort_eigen(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn sort_eigen<N: nalgebra::Scalar + num_traits::Zero, T: Real>(vals: Vec<T>, vecs: DMatrix<N>) -> (Vec<T>, DMatrix<N>) {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = DMatrix::<N>::zeros(vecs.nrows(), vecs.ncols());
    for (j, &i) in order.iter().enumerate() {
        sorted_vecs.set_column(j, &vecs.column(i));
    }
    (sorted_vals, sorted_vecs)
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn expm<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.exp()
}

/// Unitary factor of the polar decomposition of an invertible matrix.
///
/// Newton iteration `X ← (X + X^{-H})/2`, with the usual Frobenius-norm
/// scaling while far from convergence. The complex SVD loses accuracy on
/// clustered singular values, this does not.
pub fn polar_unitary<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = m.nrows();
    let mut x = m.clone();
    let tol = T::lit(64.0) * T::default_epsilon() * T::of_usize(n.max(1));
    for _ in 0..100 {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Eigensolver("singular matrix in polar decomposition".into()))?;
        let inv_h = inv.adjoint();
        let gamma = (frobenius(&inv_h) / frobenius(&x)).sqrt();
        let far = frobenius(&(x.adjoint() * &x - identity::<T>(n))) > T::lit(1e-2);
        let next = if far {
            (x.map(|z| z * c_real(gamma)) + inv_h.map(|z| z / c_real(gamma))).map(|z| z * c_real(T::lit(0.5)))
        } else {
            (&x + inv_h).map(|z| z * c_real(T::lit(0.5)))
        };
        let step = frobenius(&(&next - &x));
        x = next;
        if step <= tol {
            return Ok(x);
        }
    }
    Err(Error::Eigensolver("polar iteration did not converge".into()))
}

/// Matrix function `f` of a Hermitian matrix through its eigenbasis.
pub fn hermitian_function<T: Real>(m: &CMatrix<T>, f: impl Fn(T) -> C<T>) -> CMatrix<T> {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut d = zeros::<T>(n, n);
    for (i, v) in vals.into_iter().enumerate() {
        d[(i, i)] = f(v);
    }
    &vecs * d * vecs.adjoint()
}

/// Real `2n×2n` block form `[[Re, -Im], [Im, Re]]` of a complex-linear matrix.
pub fn realify_linear<T: Real>(m: &CMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let k = m.ncols();
    let mut r = DMatrix::<T>::zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            let z = m[(i, j)];
            r[(i, j)] = z.re;
            r[(i, j + k)] = -z.im;
            r[(i + n, j)] = z.im;
            r[(i + n, j + k)] = z.re;
        }
    }
    r
}

/// Real block form `[[Re, Im], [Im, -Re]]` of `z ↦ M·conj(z)`.
pub fn realify_antilinear<T: Real>(m: &CMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let k = m.ncols();
    let mut r = DMatrix::<T>::zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            let z = m[(i, j)];
            r[(i, j)] = z.re;
            r[(i, j + k)] = z.im;
            r[(i + n, j)] = z.im;
            r[(i + n, j + k)] = -z.re;
        }
    }
    r
}
