use crate::error::{Error, Result};
use crate::linalg::{op_norm, zeros};
use crate::multi_index::{occupation_to_tuple, sector};
use crate::scalar::{c_real, CMatrix, CVector, Real, C};

/// Coefficient `b̃ ∈ L(∨^p C^d, ∨^q C^d)` of a `(p, q)` monomial
/// `b(z) = ⟨z^∨q, b̃ z^∨p⟩`, stored in the orthonormal occupation bases:
/// rows index the `q`-sector, columns the `p`-sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T: Real> {
    dim: usize,
    p: usize,
    q: usize,
    coeffs: CMatrix<T>,
}

impl<T: Real> SymTensor<T> {
    pub fn zeros(dim: usize, p: usize, q: usize) -> Self {
        let rows = sector(dim, q).len();
        let cols = sector(dim, p).len();
        Self { dim, p, q, coeffs: zeros(rows, cols) }
    }

    pub fn from_matrix(dim: usize, p: usize, q: usize, coeffs: CMatrix<T>) -> Result<Self> {
        let rows = sector(dim, q).len();
        let cols = sector(dim, p).len();
        if coeffs.nrows() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: coeffs.nrows() });
        }
        if coeffs.ncols() != cols {
            return Err(Error::DimensionMismatch { expected: cols, got: coeffs.ncols() });
        }
        Ok(Self { dim, p, q, coeffs })
    }

    /// The identity of `∨^n`, which is the coefficient of `|z|^{2n}`.
    pub fn identity(dim: usize, n: usize) -> Self {
        let len = sector(dim, n).len();
        Self { dim, p: n, q: n, coeffs: CMatrix::identity(len, len) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn in_degree(&self) -> usize {
        self.p
    }

    pub fn out_degree(&self) -> usize {
        self.q
    }

    pub fn coeffs(&self) -> &CMatrix<T> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut CMatrix<T> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> CMatrix<T> {
        self.coeffs
    }

    pub fn op_norm(&self) -> T {
        op_norm(&self.coeffs)
    }

    /// `b̃*`, the coefficient of the conjugate monomial.
    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, p: self.q, q: self.p, coeffs: self.coeffs.adjoint() }
    }

    /// Components of `z^∨n` in the occupation basis: `sqrt(M(I)) z^I`.
    pub fn power_vector(z: &CVector<T>, n: usize) -> CVector<T> {
        let basis = sector(z.len(), n);
        CVector::from_fn(basis.len(), |idx, _| {
            let occ = basis.occupation(idx);
            let mut v = c_real(T::lit(basis.sqrt_multinomial(idx)));
            for (i, &e) in occ.iter().enumerate() {
                v *= z[i].powu(e as u32);
            }
            v
        })
    }

    pub fn evaluate(&self, z: &CVector<T>) -> Result<C<T>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let zp = Self::power_vector(z, self.p);
        let zq = Self::power_vector(z, self.q);
        Ok(zq.dotc(&(&self.coeffs * zp)))
    }

    /// For a `(0 → 2)` tensor `β`, the complex-symmetric `B` with
    /// `(I∨⟨z|)β = B·conj(z)` and `⟨β, z^∨2⟩ = Σ conj(B_ij) z_i z_j`.
    pub fn to_symmetric_matrix(&self) -> Result<CMatrix<T>> {
        if self.p != 0 || self.q != 2 {
            return Err(Error::MalformedSymbol(format!("expected a (0, 2) tensor, got ({}, {})", self.p, self.q)));
        }
        let d = self.dim;
        let basis = sector(d, 2);
        let inv_sqrt2 = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let mut b = zeros::<T>(d, d);
        for (idx, occ) in basis.occupations().iter().enumerate() {
            let t = occupation_to_tuple(occ);
            let v = self.coeffs[(idx, 0)];
            if t[0] == t[1] {
                b[(t[0], t[0])] = v;
            } else {
                b[(t[0], t[1])] = v * c_real(inv_sqrt2);
                b[(t[1], t[0])] = v * c_real(inv_sqrt2);
            }
        }
        Ok(b)
    }

    /// Inverse of [`SymTensor::to_symmetric_matrix`]; the input is
    /// symmetrised first.
    pub fn from_symmetric_matrix(b: &CMatrix<T>) -> Result<Self> {
        let d = b.nrows();
        if b.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: b.ncols() });
        }
        let basis = sector(d, 2);
        let sqrt2 = T::lit(std::f64::consts::SQRT_2);
        let half = c_real(T::lit(0.5));
        let mut coeffs = zeros::<T>(basis.len(), 1);
        for (idx, occ) in basis.occupations().iter().enumerate() {
            let t = occupation_to_tuple(occ);
            coeffs[(idx, 0)] =
                if t[0] == t[1] { b[(t[0], t[0])] } else { (b[(t[0], t[1])] + b[(t[1], t[0])]) * half * c_real(sqrt2) };
        }
        Ok(Self { dim: d, p: 0, q: 2, coeffs })
    }
}
