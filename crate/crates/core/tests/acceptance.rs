//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test -p hepp-core --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hepp_core::expansion::{check_lambda_is_derivative_of_Lambda, Lambda_t};
use hepp_core::fock::{conjugation_oracle, field_and_weyl, quantum_flow, QuantumFlowConfig};
use hepp_core::poly::SecondOrderOp;
use hepp_core::random::{
    random_complex_symmetric, random_hermitian, random_symbol, random_symplectomorphism, random_vector, Rng,
};
use hepp_core::symplectic::decompose;
use hepp_core::{
    dyson_expand, exp_expand, inequality_suite, integrate_flow, weyl_from_wick, wick_from_weyl, wick_quantize, CMatrix,
    FockOperator, FockSpace, PolySymbol, QuadSpec, QuadraticHamiltonian, SweepConfig, SymTensor, TimeGrid, C,
};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn c(re: f64, im: f64) -> C<f64> {
    C::new(re, im)
}

fn one(x: f64) -> CMatrix<f64> {
    CMatrix::from_element(1, 1, c(x, 0.0))
}

fn im_z2(t_end: f64, dt: f64) -> QuadraticHamiltonian<f64> {
    let beta = SymTensor::from_symmetric_matrix(&one(1.0)).unwrap();
    QuadraticHamiltonian::constant(None, beta, TimeGrid::new(t_end, dt).unwrap()).unwrap()
}

/// `z̄²z²`.
fn quartic() -> PolySymbol<f64> {
    let mut t = SymTensor::zeros(1, 2, 2);
    t.coeffs_mut()[(0, 0)] = c(1.0, 0.0);
    PolySymbol::from_tensor(t)
}

fn within(what: &str, value: f64, tol: f64) -> Result<(), String> {
    if value <= tol {
        Ok(())
    } else {
        Err(format!("{what} = {value:.3e} > {tol:.0e}"))
    }
}

/// Im z², d = 1: closed forms for φ, v_t, Λ^t and the first Dyson term.
fn closed_forms() -> Check {
    let tol = 1e-8;
    let h = im_z2(1.0, 1e-3);
    let flow = integrate_flow(&h).map_err(|e| e.to_string())?;
    let b = quartic();
    let mut worst = 0.0f64;
    for t in [0.3, 0.7, 1.0f64] {
        let phi = flow.phi(t).map_err(|e| e.to_string())?;
        let e_phi =
            (phi.linear()[(0, 0)] - c(t.cosh(), 0.0)).norm().max((phi.antilinear()[(0, 0)] - c(t.sinh(), 0.0)).norm());
        within(&format!("φ defect at t = {t}"), e_phi, tol)?;
        let v = flow.v_matrix(t).map_err(|e| e.to_string())?[(0, 0)];
        let e_v = (v - c(t.cosh() * t.sinh(), 0.0)).norm();
        within(&format!("v_t defect at t = {t}"), e_v, tol)?;
        let half = 0.5 * (2.0 * t).sinh();
        let expect = SecondOrderOp::from_blocks(&one(half), &one(1.0 - (2.0 * t).cosh()), &one(half));
        let op = hepp_core::expansion::big_lambda_op(t, &flow).map_err(|e| e.to_string())?;
        let e_op = (op.coeffs() - expect.coeffs()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        within(&format!("Λ^t defect at t = {t}"), e_op, tol)?;
        let dy = dyson_expand(&b, t, &flow, &h, QuadSpec::default(), 0.5).map_err(|e| e.to_string())?;
        let b_phi = b.compose_rlinear(phi).map_err(|e| e.to_string())?;
        let direct = Lambda_t(&b_phi, t, &flow).map_err(|e| e.to_string())?;
        let e_dy = dy.term(1).ok_or("missing Dyson term 1")?.distance(&direct);
        within(&format!("Dyson term 1 defect at t = {t}"), e_dy, tol)?;
        worst = worst.max(e_phi).max(e_v).max(e_op).max(e_dy);
    }
    Ok(format!("max defect {worst:.2e} ≤ {tol:.0e}"))
}

/// `α_t = α₀ + α₁ sin t`, `β_t = β₀ cos t + β₁ sin 2t`.
fn random_driven(rng: &mut Rng, d: usize, t_end: f64) -> QuadraticHamiltonian<f64> {
    let a0 = random_hermitian::<f64>(rng, d, 1.0);
    let a1 = random_hermitian::<f64>(rng, d, 0.5);
    let b0 = random_complex_symmetric::<f64>(rng, d, 0.5);
    let b1 = random_complex_symmetric::<f64>(rng, d, 0.5);
    QuadraticHamiltonian::free(d, TimeGrid::new(t_end, 1e-2).unwrap())
        .with_alpha(Arc::new(move |t: f64| &a0 + &a1 * c(t.sin(), 0.0)))
        .unwrap()
        .with_beta(Arc::new(move |t: f64| {
            SymTensor::from_symmetric_matrix(&(&b0 * c(t.cos(), 0.0) + &b1 * c((2.0 * t).sin(), 0.0))).unwrap()
        }))
        .unwrap()
}

/// Dyson and exponential engines agree order by order on random scenarios.
fn engines_agree() -> Check {
    let mut rng = Rng::seeded(2024);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let d = 1 + rng.below(2);
        let t = rng.uniform(0.1, 1.0);
        let m = 2 + rng.below(5);
        let h = random_driven(&mut rng, d, t);
        let b = random_symbol::<f64>(&mut rng, d, m, 1.0);
        let flow = integrate_flow(&h).map_err(|e| e.to_string())?;
        let dy = dyson_expand(&b, t, &flow, &h, QuadSpec::default(), 0.5).map_err(|e| e.to_string())?;
        let ex = exp_expand(&b, t, &flow, 0.5).map_err(|e| e.to_string())?;
        for ((k, a), ((_, e), est)) in dy.terms.iter().zip(ex.terms.iter().zip(&dy.error_estimates)) {
            let dist = a.distance(e);
            let allowed = 1e-6f64.max(*est);
            within(&format!("case {case} (d = {d}, m = {m}, t = {t:.3}) order {k}"), dist, allowed)?;
            worst = worst.max(dist);
        }
    }
    Ok(format!("20 scenarios, max per-order distance {worst:.2e} ≤ max(1e-6, estimate)"))
}

/// Largest element difference between `conjugated` and the Wick quantization
/// of `symbol` on the conjugated operator's sectors.
fn oracle_error(conjugated: &FockOperator<f64>, symbol: &PolySymbol<f64>) -> Result<f64, String> {
    let block = conjugated.space();
    let space =
        FockSpace::new(block.dim(), block.n_max().max(symbol.order()), block.epsilon()).map_err(|e| e.to_string())?;
    let full = wick_quantize(symbol, &space).map_err(|e| e.to_string())?;
    Ok(conjugated.max_abs_diff(&full.restricted(block.n_max())))
}

fn both_engines_vs_oracle(
    h: &QuadraticHamiltonian<f64>,
    b: &PolySymbol<f64>,
    t: f64,
    space: &FockSpace<f64>,
    tol: f64,
) -> Result<(usize, f64), String> {
    let out = conjugation_oracle(h, b, t, space, &QuantumFlowConfig::default(), 1e-6).map_err(|e| e.to_string())?;
    let flow = integrate_flow(h).map_err(|e| e.to_string())?;
    let eps = space.epsilon();
    let ex = exp_expand(b, t, &flow, eps).map_err(|e| e.to_string())?;
    let dy = dyson_expand(b, t, &flow, h, QuadSpec::default(), eps).map_err(|e| e.to_string())?;
    let e_exp = oracle_error(&out.conjugated, &ex.assembled)?;
    let e_dy = oracle_error(&out.conjugated, &dy.assembled)?;
    within("exponential vs oracle", e_exp, tol)?;
    within("Dyson vs oracle", e_dy, tol)?;
    Ok((out.trusted_block, e_exp.max(e_dy)))
}

/// Im z², d = 1, ε = 0.5, N_max = 24: assembled symbols against the Fock oracle.
fn fock_oracle() -> Check {
    let tol = 1e-5;
    let space = FockSpace::new(1, 24, 0.5).map_err(|e| e.to_string())?;
    let h = im_z2(0.3, 1e-3);
    let mut lines = Vec::new();
    for (name, b) in [("|z|²", PolySymbol::number(1)), ("z̄²z²", quartic())] {
        for t in [0.1, 0.3] {
            let (trusted, err) =
                both_engines_vs_oracle(&h, &b, t, &space, tol).map_err(|e| format!("{name}, t = {t}: {e}"))?;
            if trusted < 2 {
                return Err(format!("{name}, t = {t}: trusted block {trusted} < 2"));
            }
            lines.push(format!("{name}@{t}: {err:.1e} (n ≤ {trusted})"));
        }
    }
    Ok(format!("{} ≤ {tol:.0e}", lines.join(", ")))
}

/// Constant α with β in two modes: the flow includes the α rotation and the
/// oracle propagates with it.
fn alpha_removal() -> Check {
    let tol = 1e-5;
    let mut rng = Rng::seeded(31);
    let a = random_hermitian::<f64>(&mut rng, 2, 1.0);
    let beta = SymTensor::from_symmetric_matrix(&random_complex_symmetric::<f64>(&mut rng, 2, 0.2)).unwrap();
    let h =
        QuadraticHamiltonian::constant(Some(a), beta, TimeGrid::new(0.3, 1e-2).unwrap()).map_err(|e| e.to_string())?;
    let b = random_symbol::<f64>(&mut rng, 2, 4, 0.5);
    let space = FockSpace::new(2, 20, 0.5).map_err(|e| e.to_string())?;
    let (trusted, err) = both_engines_vs_oracle(&h, &b, 0.3, &space, tol)?;
    Ok(format!("error {err:.2e} ≤ {tol:.0e} on n ≤ {trusted}"))
}

/// `U(t,0)* W(ξ) U(t,0) = W(φ(t,0)*ξ)` below the cutoff.
fn bogoliubov() -> Check {
    let tol = 1e-5;
    let keep = 6;
    let t = 0.3;
    let h = im_z2(t, 1e-3);
    let flow = integrate_flow(&h).map_err(|e| e.to_string())?;
    let space = FockSpace::new(1, 70, 0.5).map_err(|e| e.to_string())?;
    let config = QuantumFlowConfig { record_times: vec![0.1], ..QuantumFlowConfig::default() };
    let q = quantum_flow(&h, &space, &config).map_err(|e| e.to_string())?;
    let mut rng = Rng::seeded(5);
    let mut worst = 0.0f64;
    for s in [0.1, t] {
        let u = FockOperator::from_dense(&space, q.at(s).map_err(|e| e.to_string())?);
        let u = u.map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let mut xi = random_vector::<f64>(&mut rng, 1);
            xi /= c(xi.norm() / rng.uniform(0.2, 1.0), 0.0);
            let txi = flow.phi(s).unwrap().adjoint().apply(&xi).unwrap();
            let (_, w) = field_and_weyl(&xi, &space).map_err(|e| e.to_string())?;
            let (_, wt) = field_and_weyl(&txi, &space).map_err(|e| e.to_string())?;
            let lhs = u.adjoint().compose(&w).compose(&u);
            let err = lhs.restricted(keep).max_abs_diff(&wt.restricted(keep));
            within(&format!("|ξ| = {:.2}, t = {s}", xi.norm()), err, tol)?;
            worst = worst.max(err);
        }
    }
    Ok(format!("max defect {worst:.2e} ≤ {tol:.0e} on n ≤ {keep}"))
}

fn inequalities() -> Check {
    let mut rng = Rng::seeded(77);
    let h = random_driven(&mut rng, 2, 0.5);
    let flow = integrate_flow(&h).map_err(|e| e.to_string())?;
    let space = FockSpace::new(2, 20, 0.5).map_err(|e| e.to_string())?;
    let rows = inequality_suite(&h, &flow, &space, &SweepConfig::default(), &mut rng).map_err(|e| e.to_string())?;
    let summary: Vec<String> = rows.iter().map(|r| format!("{} {:.3}/{:.2}", r.name, r.max_ratio, r.allowed)).collect();
    match rows.iter().find(|r| !r.holds || r.vacuous) {
        Some(r) => Err(format!("{} fails: {r:?}", r.name)),
        None => Ok(format!("1000 samples; {}", summary.join(", "))),
    }
}

fn structural() -> Check {
    let mut rng = Rng::seeded(9);
    // equivalent symplectomorphism conditions and polar decomposition
    let mut cond = 0.0f64;
    let mut recon = 0.0f64;
    for i in 0..50 {
        let t = random_symplectomorphism::<f64>(&mut rng, 1 + i % 3, 1.0);
        cond = t.condition_defects().iter().fold(cond, |a, &b| a.max(b));
        recon = recon.max(decompose(&t).map_err(|e| e.to_string())?.reconstruct().distance(&t));
    }
    within("condition defects", cond, 1e-10)?;
    within("decompose/reconstruct", recon, 1e-10)?;

    let mut round = 0.0f64;
    for d in 1..=2 {
        let b = random_symbol::<f64>(&mut rng, d, 6, 1.0);
        round = round.max(weyl_from_wick(&wick_from_weyl(&b, 0.8), 0.8).distance(&b) / b.norm().max(1.0));
    }
    within("Weyl ↔ Wick roundtrip", round, 1e-14)?;

    let space = FockSpace::new(2, 9, 0.7).map_err(|e| e.to_string())?;
    let b1 = random_symbol::<f64>(&mut rng, 2, 3, 1.0);
    let b2 = random_symbol::<f64>(&mut rng, 2, 2, 1.0);
    let q1 = wick_quantize(&b1, &space).map_err(|e| e.to_string())?;
    let adj = q1.adjoint().max_abs_diff(&wick_quantize(&b1.conj(), &space).map_err(|e| e.to_string())?);
    within("adjoint rule", adj, 1e-13)?;
    let lhs = q1.compose(&wick_quantize(&b2, &space).map_err(|e| e.to_string())?);
    let rhs =
        wick_quantize(&b1.wick_product(&b2, 0.7).map_err(|e| e.to_string())?, &space).map_err(|e| e.to_string())?;
    let prod = lhs.restricted(7).max_abs_diff(&rhs.restricted(7));
    within("product rule", prod, 1e-11)?;

    let h = random_driven(&mut rng, 2, 1.0);
    let flow = integrate_flow(&h).map_err(|e| e.to_string())?;
    let cs = random_symbol::<f64>(&mut rng, 2, 4, 1.0);
    let d1 = check_lambda_is_derivative_of_Lambda(&flow, &h, 0.5, &cs, 0.1).map_err(|e| e.to_string())?;
    let d2 = check_lambda_is_derivative_of_Lambda(&flow, &h, 0.5, &cs, 0.05).map_err(|e| e.to_string())?;
    let order = (d1.defect / d2.defect).log2();
    if (order - 2.0).abs() > 0.2 {
        return Err(format!("d/ds Λ = λ difference quotient converges with order {order:.2}, expected 2"));
    }
    Ok(format!(
        "conditions {cond:.1e}, reconstruct {recon:.1e}, roundtrip {round:.1e}, adjoint {adj:.1e}, product {prod:.1e}, Λ' order {order:.2}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("closed-form-im-z2", Duration::from_secs(5), closed_forms),
        ("engines-agree-random", Duration::from_secs(120), engines_agree),
        ("fock-oracle-1d", Duration::from_secs(120), fock_oracle),
        ("alpha-removal", Duration::from_secs(120), alpha_removal),
        ("bogoliubov-weyl", Duration::from_secs(120), bogoliubov),
        ("inequality-sweep", Duration::from_secs(300), inequalities),
        ("structural", Duration::from_secs(60), structural),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed > limit {
                Err(format!("{msg}; took {elapsed:.1?} > {limit:?}"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => println!("PASS {name:<22} {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name:<22} {msg} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
