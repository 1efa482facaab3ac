//! Occupation-number bases of the symmetric tensor powers of `C^d`.
//!
//! The sector `∨ⁿ C^d` is spanned by the orthonormal vectors
//! `e_I = sqrt(n!/Π I_j!) · S_n(e_{i_1} ⊗ … ⊗ e_{i_n})`, indexed by
//! occupation vectors `I` (exponent vectors with `|I| = n`). They are
//! enumerated in lexicographic order of the non-decreasing index tuple
//! `i_1 ≤ … ≤ i_n`. Both the symbol algebra and the Fock oracle use this
//! order, so a coefficient index means the same thing everywhere.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Exponent vector `(I_1, …, I_d)`.
pub type Occupation = Vec<u8>;

#[derive(Debug, Clone)]
pub struct SectorBasis {
    dim: usize,
    degree: usize,
    occupations: Vec<Occupation>,
    sqrt_multinomials: Vec<f64>,
    lookup: HashMap<Occupation, usize>,
}

impl SectorBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut occupations = Vec::with_capacity(sector_dim(dim, degree));
        let mut tuple = vec![0usize; degree];
        if dim > 0 || degree == 0 {
            loop {
                occupations.push(tuple_to_occupation(&tuple, dim));
                // advance to the next non-decreasing tuple
                let mut pos = degree;
                while pos > 0 && tuple[pos - 1] == dim - 1 {
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                let v = tuple[pos - 1] + 1;
                for x in &mut tuple[pos - 1..] {
                    *x = v;
                }
            }
        }
        let lookup = occupations.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        let sqrt_multinomials = occupations.iter().map(|o| multinomial(o).sqrt()).collect();
        Self { dim, degree, occupations, sqrt_multinomials, lookup }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.occupations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn occupation(&self, idx: usize) -> &Occupation {
        &self.occupations[idx]
    }

    pub fn occupations(&self) -> &[Occupation] {
        &self.occupations
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.lookup.get(occ).copied()
    }

    /// `sqrt(|I|!/Π I_j!)` for the basis vector at `idx`; the coefficient of
    /// `z^I` in the component of `z^∨n` along `e_I`.
    pub fn sqrt_multinomial(&self, idx: usize) -> f64 {
        self.sqrt_multinomials[idx]
    }
}

type SectorCache = Mutex<HashMap<(usize, usize), Arc<SectorBasis>>>;

/// Shared, lazily built basis of `∨^degree C^dim`.
pub fn sector(dim: usize, degree: usize) -> Arc<SectorBasis> {
    static CACHE: OnceLock<SectorCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry((dim, degree)).or_insert_with(|| Arc::new(SectorBasis::new(dim, degree))).clone()
}

/// `C(n + d - 1, d - 1)`.
pub fn sector_dim(dim: usize, degree: usize) -> usize {
    if dim == 0 {
        return usize::from(degree == 0);
    }
    binomial(degree + dim - 1, dim - 1)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Falling factorial `n!/(n-k)!`, zero when `k > n`.
pub fn falling(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    ((n - k + 1)..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// Multinomial `|I|! / Π I_j!`.
pub fn multinomial(occ: &[u8]) -> f64 {
    let n: usize = occ.iter().map(|&x| x as usize).sum();
    occ.iter().fold(factorial(n), |acc, &x| acc / factorial(x as usize))
}

/// `Π I_j!`.
pub fn occupation_factorial(occ: &[u8]) -> f64 {
    occ.iter().map(|&x| factorial(x as usize)).product()
}

pub fn degree(occ: &[u8]) -> usize {
    occ.iter().map(|&x| x as usize).sum()
}

pub fn tuple_to_occupation(tuple: &[usize], dim: usize) -> Occupation {
    let mut occ = vec![0u8; dim];
    for &i in tuple {
        occ[i] += 1;
    }
    occ
}

/// Non-decreasing index tuple of an occupation vector.
pub fn occupation_to_tuple(occ: &[u8]) -> Vec<usize> {
    occ.iter().enumerate().flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize)).collect()
}

pub fn add_occ(a: &[u8], b: &[u8]) -> Occupation {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `a - b`, or `None` if some component would go negative.
pub fn sub_occ(a: &[u8], b: &[u8]) -> Option<Occupation> {
    a.iter().zip(b).map(|(&x, &y)| x.checked_sub(y)).collect()
}

/// All occupation vectors `J ≤ I` componentwise with `|J| = k`.
pub fn sub_occupations(occ: &[u8], k: usize) -> Vec<Occupation> {
    fn rec(occ: &[u8], pos: usize, left: usize, cur: &mut Occupation, out: &mut Vec<Occupation>) {
        if pos == occ.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let max = (occ[pos] as usize).min(left);
        for take in 0..=max {
            cur[pos] = take as u8;
            rec(occ, pos + 1, left - take, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u8; occ.len()];
    rec(occ, 0, k, &mut cur, &mut out);
    out
}

/// Every occupation vector of total degree `k` over `dim` modes.
pub fn all_occupations(dim: usize, k: usize) -> Vec<Occupation> {
    SectorBasis::new(dim, k).occupations
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes_match_binomials() {
        for d in 1..4 {
            for n in 0..7 {
                assert_eq!(SectorBasis::new(d, n).len(), sector_dim(d, n));
            }
        }
        assert_eq!(sector_dim(2, 24), 25);
        assert_eq!(sector_dim(3, 6), 28);
    }

    #[test]
    fn ordering_is_lexicographic_on_tuples() {
        let b = SectorBasis::new(2, 2);
        let tuples: Vec<_> = b.occupations().iter().map(|o| occupation_to_tuple(o)).collect();
        assert_eq!(tuples, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(b.index_of(&[1, 1]), Some(1));
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[1, 1]), 2.0);
        assert_eq!(multinomial(&[2, 1, 0]), 3.0);
        assert_eq!(multinomial(&[]), 1.0);
        assert_eq!(falling(5, 2), 20.0);
        assert_eq!(falling(1, 2), 0.0);
    }

    #[test]
    fn sub_occupations_enumerates_all() {
        let subs = sub_occupations(&[2, 1], 2);
        assert_eq!(subs, vec![vec![1, 1], vec![2, 0]]);
        assert_eq!(sub_occupations(&[1, 0], 2).len(), 0);
    }
}
