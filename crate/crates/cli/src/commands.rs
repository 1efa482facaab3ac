use hepp_core::fock::{conjugation_oracle, QuantumFlowConfig};
use hepp_core::poly::SymbolJson;
use hepp_core::random::Rng;
use hepp_core::{
    dyson_expand, exp_expand, inequality_suite, integrate_flow, wick_quantize, ExpansionResult, FockSpace,
    InequalityRow, Method, SweepConfig,
};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::{ComplexMatrix, Scenario, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    ToleranceFail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::ToleranceFail => 1,
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::ToleranceFail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Flow,
    Expand,
    Oracle,
    Estimates,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::Expand => "expand",
            Command::Oracle => "oracle",
            Command::Estimates => "estimates",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    Dyson,
    Exp,
    #[default]
    Both,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub method: MethodChoice,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub report: serde_json::Value,
}

#[derive(Serialize)]
struct Report<B: Serialize> {
    schema_version: u32,
    command: &'static str,
    status: Status,
    #[serde(flatten)]
    body: B,
}

fn finish<B: Serialize>(command: Command, status: Status, body: B) -> Result<Outcome, CliError> {
    let report =
        serde_json::to_value(Report { schema_version: SCHEMA_VERSION, command: command.name(), status, body })?;
    Ok(Outcome { status, report })
}

pub fn run(command: Command, scenario: &Scenario, opts: &Options) -> Result<Outcome, CliError> {
    log::info!("running {} on a d = {} scenario", command.name(), scenario.dim);
    match command {
        Command::Flow => flow(scenario),
        Command::Expand => expand(scenario, opts.method),
        Command::Oracle => oracle(scenario),
        Command::Estimates => estimates(scenario, opts),
    }
}

fn matrix_json(m: &hepp_core::CMatrix<f64>) -> ComplexMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Serialize)]
struct PhiSample {
    t: f64,
    linear: ComplexMatrix,
    antilinear: ComplexMatrix,
    symplectic_defect: f64,
}

#[derive(Serialize)]
struct FlowBody {
    max_symplectic_defect: f64,
    tolerance: f64,
    samples: Vec<PhiSample>,
}

/// At most 11 evenly spaced grid times, always including both ends.
fn sample_indices(steps: usize) -> Vec<usize> {
    let n = steps.min(10);
    let mut idx: Vec<usize> = (0..=n).map(|k| (k * steps).checked_div(n).unwrap_or(0)).collect();
    idx.dedup();
    idx
}

fn flow(s: &Scenario) -> Result<Outcome, CliError> {
    let h = s.hamiltonian()?;
    let f = integrate_flow(&h)?;
    let grid = f.grid();
    let samples = sample_indices(grid.steps)
        .into_iter()
        .map(|i| {
            let phi = &f.phis()[i];
            PhiSample {
                t: grid.time(i),
                linear: matrix_json(phi.linear()),
                antilinear: matrix_json(phi.antilinear()),
                symplectic_defect: phi.symplectic_form_defect(),
            }
        })
        .collect();
    let defect = f.max_symplectic_defect();
    let tol = s.tolerances.symplectic;
    finish(
        Command::Flow,
        Status::from_ok(defect <= tol),
        FlowBody { max_symplectic_defect: defect, tolerance: tol, samples },
    )
}

#[derive(Serialize)]
struct TermRow {
    k: usize,
    symbol: SymbolJson,
    error_estimate: f64,
}

#[derive(Serialize)]
struct EngineReport {
    method: Method,
    terms: Vec<TermRow>,
    assembled: SymbolJson,
}

impl EngineReport {
    fn new(r: &ExpansionResult<f64>) -> Self {
        let terms = r
            .terms
            .iter()
            .zip(&r.error_estimates)
            .map(|((k, t), e)| TermRow { k: *k, symbol: t.to_json(), error_estimate: *e })
            .collect();
        Self { method: r.method, terms, assembled: r.assembled.to_json() }
    }
}

#[derive(Serialize)]
struct DistanceRow {
    k: usize,
    distance: f64,
    allowed: f64,
}

#[derive(Serialize)]
struct ExpandBody {
    t: f64,
    epsilon: f64,
    engines: Vec<EngineReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    distances: Vec<DistanceRow>,
}

fn expand(s: &Scenario, method: MethodChoice) -> Result<Outcome, CliError> {
    let h = s.hamiltonian()?;
    let b = s.observable()?;
    let f = integrate_flow(&h)?;
    let t = s.eval_time();
    let eps = s.epsilon;
    let dyson = match method {
        MethodChoice::Exp => None,
        _ => Some(dyson_expand(&b, t, &f, &h, s.quad, eps)?),
    };
    let exp = match method {
        MethodChoice::Dyson => None,
        _ => Some(exp_expand(&b, t, &f, eps)?),
    };
    let mut distances = Vec::new();
    if let (Some(d), Some(e)) = (&dyson, &exp) {
        for ((k, td), ((_, te), est)) in d.terms.iter().zip(e.terms.iter().zip(&d.error_estimates)) {
            let allowed = s.tolerances.engines.max(*est);
            distances.push(DistanceRow { k: *k, distance: td.distance(te), allowed });
        }
    }
    let ok = distances.iter().all(|r| r.distance <= r.allowed);
    let engines = dyson.iter().chain(exp.iter()).map(EngineReport::new).collect();
    finish(Command::Expand, Status::from_ok(ok), ExpandBody { t, epsilon: eps, engines, distances })
}

#[derive(Serialize)]
struct OracleBody {
    t: f64,
    n_max: usize,
    trusted_block: usize,
    error_exp: f64,
    error_dyson: f64,
    tolerance: f64,
    cutoff_discrepancy: f64,
    unitarity_defect: f64,
    leakage: f64,
}

fn oracle(s: &Scenario) -> Result<Outcome, CliError> {
    let h = s.hamiltonian()?;
    let b = s.observable()?;
    let t = s.eval_time();
    let space = FockSpace::new(s.dim, s.fock.n_max, s.epsilon)?;
    let config = QuantumFlowConfig { leakage_threshold: s.tolerances.leakage, ..QuantumFlowConfig::default() };
    let out = conjugation_oracle(&h, &b, t, &space, &config, s.tolerances.cutoff_agreement)?;
    let f = integrate_flow(&h)?;
    let block = out.conjugated.space();
    let error_of = |r: ExpansionResult<f64>| -> Result<f64, CliError> {
        // the assembled symbol may exceed the trusted block's cutoff; its
        // higher blocks fall outside the block anyway
        let cut = block.n_max().max(r.assembled.order());
        let full = wick_quantize(&r.assembled, &FockSpace::new(block.dim(), cut, block.epsilon())?)?;
        Ok(out.conjugated.max_abs_diff(&full.restricted(block.n_max())))
    };
    let error_exp = error_of(exp_expand(&b, t, &f, s.epsilon)?)?;
    let error_dyson = error_of(dyson_expand(&b, t, &f, &h, s.quad, s.epsilon)?)?;
    let tol = s.tolerances.oracle;
    let body = OracleBody {
        t,
        n_max: s.fock.n_max,
        trusted_block: out.trusted_block,
        error_exp,
        error_dyson,
        tolerance: tol,
        cutoff_discrepancy: out.cutoff_discrepancy,
        unitarity_defect: out.unitarity_defect,
        leakage: out.leakage,
    };
    finish(Command::Oracle, Status::from_ok(error_exp <= tol && error_dyson <= tol), body)
}

#[derive(Serialize)]
struct EstimatesBody {
    seed: u64,
    samples: usize,
    n_max: usize,
    rows: Vec<InequalityRow>,
}

fn estimates(s: &Scenario, opts: &Options) -> Result<Outcome, CliError> {
    let h = s.hamiltonian()?;
    let f = integrate_flow(&h)?;
    let space = FockSpace::new(s.dim, s.fock.n_max, s.epsilon)?;
    let seed = opts.seed.unwrap_or(s.seed);
    let samples = opts.samples.or(s.samples).unwrap_or(1000);
    let config = SweepConfig { samples, ..SweepConfig::default() };
    let rows = inequality_suite(&h, &f, &space, &config, &mut Rng::seeded(seed))?;
    let ok = rows.iter().all(|r| r.holds);
    finish(Command::Estimates, Status::from_ok(ok), EstimatesBody { seed, samples, n_max: s.fock.n_max, rows })
}
