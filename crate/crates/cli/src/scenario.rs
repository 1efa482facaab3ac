//! Scenario files. Complex numbers are `[re, im]` pairs, matrices are lists
//! of rows, and mode indices in symbol JSON start at 1.

use std::sync::Arc;

use hepp_core::flow::{MatrixSampler, TensorSampler};
use hepp_core::poly::{Monomials, SymbolJson};
use hepp_core::scalar::c_lit;
use hepp_core::{CMatrix, CVector, PolySymbol, QuadSpec, QuadraticHamiltonian, SymTensor, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub type ComplexMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedMatrix {
    pub t: f64,
    pub matrix: ComplexMatrix,
}

/// A constant matrix, or samples interpolated linearly in time (held
/// constant outside the sampled range).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSeries {
    Constant(ComplexMatrix),
    Samples(Vec<TimedMatrix>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    #[serde(default)]
    pub alpha: Option<MatrixSeries>,
    /// `⟨β, z^∨2⟩ = Σ conj(B_ij) z_i z_j`; omitted means `β ≡ 0`.
    #[serde(default)]
    pub beta: Option<MatrixSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Preset {
        preset: String,
        #[serde(default)]
        xi: Option<Vec<[f64; 2]>>,
    },
    Symbol(SymbolJson),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    pub n_max: usize,
}

impl Default for FockSpec {
    fn default() -> Self {
        Self { n_max: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted symplecticity defect of `φ(t,0)` on the grid.
    pub symplectic: f64,
    /// Floor for the per-order engine distance (raised to the quadrature estimate).
    pub engines: f64,
    /// Largest accepted trusted-block matrix-element error.
    pub oracle: f64,
    /// Relative agreement between the two cutoffs that defines the trusted block.
    pub cutoff_agreement: f64,
    /// Vacuum weight in the top two sectors that aborts the quantum flow.
    pub leakage: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { symplectic: 1e-8, engines: 1e-6, oracle: 1e-5, cutoff_agreement: 1e-6, leakage: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub dim: usize,
    pub epsilon: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Evaluation time for `expand` and `oracle`; defaults to `t_end`.
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub fock: FockSpec,
    #[serde(default)]
    pub quad: QuadSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: Option<usize>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn to_matrix(rows: &ComplexMatrix, dim: usize, what: &str) -> Result<CMatrix<f64>, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(invalid(format!("{what} must be a {dim}×{dim} matrix")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(format!("{what} has non-finite entries")));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| c_lit(rows[i][j][0], rows[i][j][1])))
}

/// Linear interpolation between sorted samples.
fn sampler(
    series: &MatrixSeries,
    dim: usize,
    what: &str,
) -> Result<Arc<dyn Fn(f64) -> CMatrix<f64> + Send + Sync>, CliError> {
    match series {
        MatrixSeries::Constant(rows) => {
            let m = to_matrix(rows, dim, what)?;
            Ok(Arc::new(move |_| m.clone()))
        }
        MatrixSeries::Samples(samples) => {
            if samples.is_empty() {
                return Err(invalid(format!("{what} has no samples")));
            }
            let mut pts = samples
                .iter()
                .map(|s| Ok((s.t, to_matrix(&s.matrix, dim, what)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pts.windows(2).any(|w| w[0].0 == w[1].0) || pts.iter().any(|p| !p.0.is_finite()) {
                return Err(invalid(format!("{what} sample times must be finite and distinct")));
            }
            Ok(Arc::new(move |t| {
                let k = pts.partition_point(|p| p.0 <= t);
                if k == 0 {
                    return pts[0].1.clone();
                }
                if k == pts.len() {
                    return pts[k - 1].1.clone();
                }
                let ((t0, m0), (t1, m1)) = (&pts[k - 1], &pts[k]);
                let w = (t - t0) / (t1 - t0);
                m0 * c_lit(1.0 - w, 0.0) + m1 * c_lit(w, 0.0)
            }))
        }
    }
}

fn check_symmetric(series: &MatrixSeries, dim: usize) -> Result<(), CliError> {
    let mats: Vec<&ComplexMatrix> = match series {
        MatrixSeries::Constant(m) => vec![m],
        MatrixSeries::Samples(s) => s.iter().map(|x| &x.matrix).collect(),
    };
    for m in mats {
        let b = to_matrix(m, dim, "beta")?;
        let scale = b.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        if (&b - b.transpose()).iter().any(|z| z.norm() > 1e-12 * scale) {
            return Err(invalid("beta must be a symmetric matrix"));
        }
    }
    Ok(())
}

fn check_hermitian(series: &MatrixSeries, dim: usize) -> Result<(), CliError> {
    let mats: Vec<&ComplexMatrix> = match series {
        MatrixSeries::Constant(m) => vec![m],
        MatrixSeries::Samples(s) => s.iter().map(|x| &x.matrix).collect(),
    };
    for m in mats {
        let a = to_matrix(m, dim, "alpha")?;
        let scale = a.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        if (&a - a.adjoint()).iter().any(|z| z.norm() > 1e-12 * scale) {
            return Err(invalid("alpha must be a Hermitian matrix"));
        }
    }
    Ok(())
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end must be non-negative"));
        }
        if let Some(t) = self.t {
            if !(0.0..=self.t_end).contains(&t) {
                return Err(invalid(format!("t = {t} lies outside [0, t_end]")));
            }
        }
        self.quad.validate()?;
        Ok(())
    }

    pub fn eval_time(&self) -> f64 {
        self.t.unwrap_or(self.t_end)
    }

    pub fn grid(&self) -> Result<TimeGrid<f64>, CliError> {
        Ok(TimeGrid::new(self.t_end, self.dt)?)
    }

    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian<f64>, CliError> {
        let d = self.dim;
        let mut h = QuadraticHamiltonian::free(d, self.grid()?);
        if let Some(beta) = &self.hamiltonian.beta {
            check_symmetric(beta, d)?;
            let f = sampler(beta, d, "beta")?;
            let tensor: TensorSampler<f64> =
                Arc::new(move |t| SymTensor::from_symmetric_matrix(&f(t)).expect("square by construction"));
            h = h.with_beta(tensor)?;
        }
        if let Some(alpha) = &self.hamiltonian.alpha {
            check_hermitian(alpha, d)?;
            let f: MatrixSampler<f64> = sampler(alpha, d, "alpha")?;
            h = h.with_alpha(f)?;
        }
        Ok(h)
    }

    pub fn observable(&self) -> Result<PolySymbol<f64>, CliError> {
        let obs = self.observable.as_ref().ok_or_else(|| invalid("this command needs an observable"))?;
        let d = self.dim;
        let b = match obs {
            ObservableSpec::Symbol(json) => {
                if json.dim != d {
                    return Err(invalid(format!("observable has dim {}, scenario has {d}", json.dim)));
                }
                PolySymbol::from_json(json)?
            }
            ObservableSpec::Preset { preset, xi } => preset_symbol(preset, xi.as_deref(), d)?,
        };
        Ok(b)
    }
}

/// Named observables: `number` (|z|²), `n-squared` (|z|⁴), `field`
/// (√2 Re⟨z, ξ⟩) and `quartic-cross` (|z₁|²|z₂|², two modes only).
pub fn preset_symbol(name: &str, xi: Option<&[[f64; 2]]>, d: usize) -> Result<PolySymbol<f64>, CliError> {
    match name {
        "number" => Ok(PolySymbol::number(d)),
        "n-squared" => Ok(PolySymbol::number(d).product(&PolySymbol::number(d))?),
        "field" => {
            let xi = xi.ok_or_else(|| invalid("preset \"field\" needs xi"))?;
            if xi.len() != d {
                return Err(invalid(format!("xi must have {d} entries")));
            }
            Ok(PolySymbol::field(&CVector::from_fn(d, |i, _| c_lit(xi[i][0], xi[i][1]))))
        }
        "quartic-cross" => {
            if d != 2 {
                return Err(invalid("preset \"quartic-cross\" needs dim = 2"));
            }
            let mut m = Monomials::zero(2);
            m.add_term(vec![1, 1, 1, 1], c_lit(1.0, 0.0));
            Ok(PolySymbol::from_monomials(&m))
        }
        other => Err(invalid(format!("unknown observable preset {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({ "dim": 1, "epsilon": 0.5, "t_end": 1.0, "dt": 0.25 })
    }

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::from_json(&base().to_string()).unwrap();
        assert_eq!(s.schema_version, SCHEMA_VERSION);
        assert_eq!(s.fock.n_max, 24);
        assert_eq!(s.quad.nodes, 16);
        assert_eq!(s.eval_time(), 1.0);
        assert_eq!(s.tolerances, Tolerances::default());
    }

    #[test]
    fn rejects_bad_headers() {
        let cases = [
            ("schema_version", serde_json::json!(2)),
            ("epsilon", serde_json::json!(0.0)),
            ("dim", serde_json::json!(0)),
            ("t", serde_json::json!(2.0)),
        ];
        for (key, value) in cases {
            let mut v = base();
            v[key] = value;
            assert!(matches!(Scenario::from_json(&v.to_string()), Err(CliError::Invalid(_))), "{key}");
        }
        let mut v = base();
        v["unknown"] = serde_json::json!(1);
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(CliError::Parse(_))));
    }

    #[test]
    fn samples_are_interpolated_linearly() {
        let mut v = base();
        v["hamiltonian"] = serde_json::json!({ "beta": [
            { "t": 1.0, "matrix": [[[3.0, 0.0]]] },
            { "t": 0.0, "matrix": [[[1.0, 2.0]]] }
        ]});
        let h = Scenario::from_json(&v.to_string()).unwrap().hamiltonian().unwrap();
        let b = h.beta_matrix(0.25)[(0, 0)];
        assert!((b.re - 1.5).abs() < 1e-15 && (b.im - 1.5).abs() < 1e-15);
        assert_eq!(h.beta_matrix(5.0)[(0, 0)], c_lit(3.0, 0.0));
    }

    #[test]
    fn alpha_must_be_hermitian() {
        let mut v = base();
        v["hamiltonian"] = serde_json::json!({ "alpha": [[[0.0, 1.0]]] });
        let s = Scenario::from_json(&v.to_string()).unwrap();
        assert!(matches!(s.hamiltonian(), Err(CliError::Invalid(_))));
    }

    #[test]
    fn presets() {
        let n2 = preset_symbol("n-squared", None, 1).unwrap();
        assert_eq!(n2.types(), vec![(2, 2)]);
        let cross = preset_symbol("quartic-cross", None, 2).unwrap();
        assert_eq!(cross.order(), 4);
        let field = preset_symbol("field", Some(&[[1.0, 0.0]]), 1).unwrap();
        assert_eq!(field.order(), 1);
        assert!(preset_symbol("field", None, 1).is_err());
        assert!(preset_symbol("energy", None, 1).is_err());
    }

    #[test]
    fn observable_dimension_must_match() {
        let mut v = base();
        v["observable"] = serde_json::json!({ "dim": 2, "terms": [] });
        let s = Scenario::from_json(&v.to_string()).unwrap();
        assert!(matches!(s.observable(), Err(CliError::Invalid(_))));
    }
}
