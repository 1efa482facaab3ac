use super::{FockOperator, FockSpace};
use crate::error::{Error, Result};
use crate::linalg::{expm, unitarity_defect};
use crate::multi_index::{add_occ, falling, occupation_factorial, sector, sub_occ, sub_occupations};
use crate::poly::{Monomials, PolySymbol, SymTensor};
use crate::scalar::{c_i, c_real, CMatrix, CVector, Real};

/// `sqrt(n!(n+q−p)!)/(n−p)! · ε^{(p+q)/2}`, zero for `n < p`.
pub fn wick_block_factor<T: Real>(p: usize, q: usize, n: usize, epsilon: T) -> T {
    if n < p {
        return T::zero();
    }
    let comb = (falling(n, p) * falling(n - p + q, q)).sqrt();
    T::lit(comb) * epsilon.powf(T::lit((p + q) as f64 / 2.0))
}

/// `b̃ ∨ I_{∨^{n−p}}` from `∨ⁿ` to `∨^{n−p+q}` in the occupation bases.
///
/// With `e_I = Σ_{I₁+I₂=I} sqrt(M(I₁)M(I₂)/M(I)) e_{I₁} ⊗ e_{I₂}` and the
/// mirror identity `S(e_J ⊗ e_{I₂}) = sqrt(M(J)M(I₂)/M(J+I₂)) e_{J+I₂}`.
pub fn symmetrized_extension<T: Real>(t: &SymTensor<T>, n: usize) -> CMatrix<T> {
    let (d, p, q) = (t.dim(), t.in_degree(), t.out_degree());
    let in_basis = sector(d, n);
    if n < p {
        return CMatrix::zeros(0, in_basis.len());
    }
    let rest = sector(d, n - p);
    let out_basis = sector(d, n - p + q);
    let p_basis = sector(d, p);
    let q_basis = sector(d, q);
    let mut m = CMatrix::zeros(out_basis.len(), in_basis.len());
    for (col, occ) in in_basis.occupations().iter().enumerate() {
        let m_i = in_basis.sqrt_multinomial(col);
        for i1 in sub_occupations(occ, p) {
            let i2 = sub_occ(occ, &i1).expect("sub-occupation");
            let ip = p_basis.index_of(&i1).expect("in sector p");
            let ir = rest.index_of(&i2).expect("in sector n − p");
            let m_i1 = p_basis.sqrt_multinomial(ip);
            let m_i2 = rest.sqrt_multinomial(ir);
            let split = m_i1 * m_i2 / m_i;
            for (jq, j) in q_basis.occupations().iter().enumerate() {
                let coeff = t.coeffs()[(jq, ip)];
                if coeff.re == T::zero() && coeff.im == T::zero() {
                    continue;
                }
                let k = add_occ(j, &i2);
                let row = out_basis.index_of(&k).expect("in output sector");
                let merge = q_basis.sqrt_multinomial(jq) * m_i2 / out_basis.sqrt_multinomial(row);
                m[(row, col)] += coeff * c_real(T::lit(split * merge));
            }
        }
    }
    m
}

/// Isometry `∨ⁿ → ⊗ⁿ` whose columns are the `e_I` written in the product basis.
fn symmetric_embedding<T: Real>(d: usize, n: usize) -> CMatrix<T> {
    let basis = sector(d, n);
    let full = d.pow(n as u32);
    let mut e = CMatrix::zeros(full, basis.len());
    for flat in 0..full {
        let mut occ = vec![0u8; d];
        let mut r = flat;
        for _ in 0..n {
            occ[r % d] += 1;
            r /= d;
        }
        let col = basis.index_of(&occ).expect("occupation of a tuple");
        // S_n e_tuple has norm 1/sqrt(M), so each tuple carries 1/sqrt(M)
        e[(flat, col)] = c_real(T::lit(1.0 / basis.sqrt_multinomial(col)));
    }
    e
}

/// Slow reference for [`symmetrized_extension`] through the explicit
/// symmetrizer on `⊗ⁿ C^d`. Only for tiny `dⁿ`.
pub fn symmetrized_extension_reference<T: Real>(t: &SymTensor<T>, n: usize) -> CMatrix<T> {
    let (d, p, q) = (t.dim(), t.in_degree(), t.out_degree());
    if n < p {
        return CMatrix::zeros(0, sector(d, n).len());
    }
    let (ep, eq) = (symmetric_embedding::<T>(d, p), symmetric_embedding::<T>(d, q));
    let full_b = &eq * t.coeffs() * ep.adjoint();
    let rest = d.pow((n - p) as u32);
    let tensor = full_b.kronecker(&CMatrix::identity(rest, rest));
    symmetric_embedding::<T>(d, n - p + q).adjoint() * tensor * symmetric_embedding::<T>(d, n)
}

/// `b^Wick` on the truncated space; a `(p, q)` block from sector `n` lands in
/// sector `n + q − p` and is dropped if that exceeds `N_max`.
pub fn wick_quantize<T: Real>(b: &PolySymbol<T>, space: &FockSpace<T>) -> Result<FockOperator<T>> {
    if b.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: b.dim() });
    }
    if b.order() > space.n_max() {
        return Err(Error::DegreeExceedsCutoff { degree: b.order(), n_max: space.n_max() });
    }
    let eps = space.epsilon();
    let mut op = FockOperator::zero(space);
    for t in b.terms() {
        let (p, q) = (t.in_degree(), t.out_degree());
        for n in p..=space.n_max() {
            let out = n - p + q;
            if out > space.n_max() {
                break;
            }
            let f = wick_block_factor(p, q, n, eps);
            op.add_block(out, n, &(symmetrized_extension(t, n) * c_real(f)));
        }
    }
    Ok(op)
}

/// `(Φ(ξ), W(ξ))` with `Φ(ξ) = (√2 Re⟨z, ξ⟩)^Wick` and `W(ξ) = e^{iΦ(ξ)}`
/// exponentiated on the truncated space.
pub fn field_and_weyl<T: Real>(xi: &CVector<T>, space: &FockSpace<T>) -> Result<(FockOperator<T>, FockOperator<T>)> {
    let phi = wick_quantize(&PolySymbol::field(xi), space)?;
    let w = expm(&(phi.to_dense() * c_i::<T>()));
    Ok((phi.clone(), FockOperator::from_dense(space, &w)?))
}

/// Second quantization `Γ(u)`: `u^⊗n` restricted to each symmetric sector.
///
/// Column `e_I` is read off the Bargmann polynomial `Π_i (uᵀx)_i^{I_i}/sqrt(I!)`,
/// with `e_K ↔ x^K/sqrt(K!)`.
pub fn gamma_u<T: Real>(u: &CMatrix<T>, space: &FockSpace<T>) -> Result<FockOperator<T>> {
    let d = space.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
    }
    let defect = unitarity_defect(u);
    let tol = T::lit(1e-10).max(T::default_epsilon() * T::lit(100.0));
    if defect > tol {
        return Err(Error::NotUnitary(defect.to_f64_lossy()));
    }
    // linear forms (uᵀx)_i in the z-variables of a monomial ring
    let forms: Vec<Monomials<T>> = (0..d)
        .map(|i| {
            let mut m = Monomials::zero(d);
            for k in 0..d {
                m.add_scaled(&Monomials::variable(d, k), u[(k, i)]);
            }
            m
        })
        .collect();
    let mut powers: Vec<Vec<Monomials<T>>> =
        forms.iter().map(|f| vec![Monomials::constant(d, c_real(T::one())), f.clone()]).collect();
    let mut op = FockOperator::zero(space);
    for n in 0..=space.n_max() {
        let basis = sector(d, n);
        for (i, f) in forms.iter().enumerate() {
            while powers[i].len() <= n {
                let next = powers[i].last().expect("non-empty").product(f);
                powers[i].push(next);
            }
        }
        let mut block = CMatrix::zeros(basis.len(), basis.len());
        for (col, occ) in basis.occupations().iter().enumerate() {
            let mut poly = Monomials::constant(d, c_real(T::one()));
            for (i, &e) in occ.iter().enumerate() {
                if e > 0 {
                    poly = poly.product(&powers[i][e as usize]);
                }
            }
            let norm_in = occupation_factorial(occ).sqrt();
            for (key, &v) in poly.iter() {
                let k = &key[..d];
                let row = basis.index_of(k).expect("degree preserved");
                block[(row, col)] += v * c_real(T::lit(occupation_factorial(k).sqrt() / norm_in));
            }
        }
        op.add_block(n, n, &block);
    }
    Ok(op)
}
