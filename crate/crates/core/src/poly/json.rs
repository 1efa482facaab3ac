//! JSON form of a symbol:
//! `{dim, terms: [{p, q, entries: [[q-index], [p-index], re, im]}]}` where the
//! indices are non-decreasing tuples over `1..=dim`.

use serde::{Deserialize, Serialize};

use super::{PolySymbol, SymTensor};
use crate::error::{Error, Result};
use crate::multi_index::{occupation_to_tuple, sector, tuple_to_occupation};
use crate::scalar::{Real, C};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolJson {
    pub dim: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub p: usize,
    pub q: usize,
    pub entries: Vec<(Vec<usize>, Vec<usize>, f64, f64)>,
}

fn to_occupation(tuple: &[usize], dim: usize, len: usize) -> Result<Vec<u8>> {
    if tuple.len() != len {
        return Err(Error::MalformedSymbol(format!("multi-index {tuple:?} should have length {len}")));
    }
    if tuple.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::MalformedSymbol(format!("multi-index {tuple:?} is not non-decreasing")));
    }
    if tuple.iter().any(|&i| i == 0 || i > dim) {
        return Err(Error::MalformedSymbol(format!("multi-index {tuple:?} out of range 1..={dim}")));
    }
    let zero_based: Vec<usize> = tuple.iter().map(|&i| i - 1).collect();
    Ok(tuple_to_occupation(&zero_based, dim))
}

fn to_tuple(occ: &[u8]) -> Vec<usize> {
    occupation_to_tuple(occ).into_iter().map(|i| i + 1).collect()
}

impl<T: Real> PolySymbol<T> {
    pub fn to_json(&self) -> SymbolJson {
        let d = self.dim();
        let terms = self
            .terms()
            .map(|t| {
                let out_basis = sector(d, t.out_degree());
                let in_basis = sector(d, t.in_degree());
                let mut entries = Vec::new();
                for r in 0..out_basis.len() {
                    for c in 0..in_basis.len() {
                        let v = t.coeffs()[(r, c)];
                        if v.re == T::zero() && v.im == T::zero() {
                            continue;
                        }
                        entries.push((
                            to_tuple(out_basis.occupation(r)),
                            to_tuple(in_basis.occupation(c)),
                            v.re.to_f64_lossy(),
                            v.im.to_f64_lossy(),
                        ));
                    }
                }
                TermJson { p: t.in_degree(), q: t.out_degree(), entries }
            })
            .collect();
        SymbolJson { dim: d, terms }
    }

    pub fn from_json(json: &SymbolJson) -> Result<Self> {
        let d = json.dim;
        if d == 0 {
            return Err(Error::MalformedSymbol("dim must be positive".into()));
        }
        let mut tensors = Vec::with_capacity(json.terms.len());
        for term in &json.terms {
            let out_basis = sector(d, term.q);
            let in_basis = sector(d, term.p);
            let mut t = SymTensor::zeros(d, term.p, term.q);
            for (qi, pi, re, im) in &term.entries {
                let r = out_basis.index_of(&to_occupation(qi, d, term.q)?).expect("valid occupation");
                let c = in_basis.index_of(&to_occupation(pi, d, term.p)?).expect("valid occupation");
                t.coeffs_mut()[(r, c)] += C::new(T::lit(*re), T::lit(*im));
            }
            tensors.push(t);
        }
        Self::from_tensors(d, tensors)
    }
}

impl<T: Real> Serialize for PolySymbol<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for PolySymbol<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = SymbolJson::deserialize(deserializer)?;
        PolySymbol::from_json(&json).map_err(serde::de::Error::custom)
    }
}
