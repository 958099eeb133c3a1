//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use betatherm_core::involution::{check_duality, check_marginals, random_bilateral_pairs};
use betatherm_core::oracle::max_orbit_mean;
use betatherm_core::zerotemp::{maximizing_value as max_value, run, sweep, ZeroTempReport};
use betatherm_core::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn golden() -> BetaSpec {
    BetaSpec::from_digits_str("(10)").unwrap()
}

fn potential(spec: &BetaSpec, depth: usize, values: &[f64]) -> Potential {
    let lang = Arc::new(Language::build(spec, Side::Forward, depth).unwrap());
    Potential::from_values(lang, values.to_vec(), 1.0).unwrap()
}

fn grid(s: &str) -> TemperatureGrid {
    s.parse().unwrap()
}

fn report(spec: &BetaSpec, a: &Potential, depth: usize, g: &str) -> std::result::Result<(ZeroTempReport, OracleResult), String> {
    let oracle = max_orbit_mean(a, 10, spec).map_err(err)?;
    let pl = Arc::new(Pipeline::new(spec, a, depth).map_err(err)?);
    let r = run(pl, &grid(g), &ZeroTempOptions::default(), Some(&oracle)).map_err(err)?;
    Ok((r, oracle))
}

/// Largest real root of `x^n = x^{n-1} + ... + 1` by Newton from 2.
fn multinacci(n: i32) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..100 {
        let f = x.powi(n) - (0..n).map(|k| x.powi(k)).sum::<f64>();
        let df = n as f64 * x.powi(n - 1) - (1..n).map(|k| k as f64 * x.powi(k - 1)).sum::<f64>();
        x -= f / df;
    }
    x
}

/// Mixed depth-2 golden-mean test potentials, tables over 00, 01, 10.
const GOLDEN_DEPTH2: [[f64; 3]; 2] = [[0.3, -0.2, 0.1], [-1.0, 0.25, 0.0]];
const GOLDEN_DEPTH1: [[f64; 2]; 2] = [[0.0, -1.0], [-1.0, 0.0]];

fn entropy() -> Outcome {
    let cases = [("(10)", (1.0 + 5f64.sqrt()) / 2.0), ("(1)", 2.0), ("(110)", multinacci(3))];
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for (digits, beta) in cases {
        let spec = BetaSpec::from_digits_str(digits).map_err(err)?;
        let start = Instant::now();
        let a = Potential::zero(&spec, Side::Forward, 1).map_err(err)?;
        let op = TransferOperator::new(&a, &spec, 8).map_err(err)?;
        let st = op.power_iteration(1.0, PowerOptions::default()).map_err(err)?;
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let gap = (st.lambda - beta).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-9, format!("{digits}: lambda {} vs beta {beta}", st.lambda))?;
        ensure(elapsed < Duration::from_secs(1), format!("{digits}: took {elapsed:?}"))?;
    }
    Ok(format!("max |lambda - beta| = {worst:.1e} (tol 1e-9), slowest run {slowest:.2?} (< 1 s)"))
}

fn bernoulli() -> Outcome {
    let start = Instant::now();
    let spec = BetaSpec::from_digits_str("(1)").map_err(err)?;
    let a = potential(&spec, 1, &[0.0, -1.0]);
    let (r, oracle) = report(&spec, &a, 1, "2:256:geometric")?;
    let mut worst: f64 = 0.0;
    for row in &r.rows {
        worst = worst.max((row.lambda - (1.0 + (-row.t).exp())).abs());
    }
    ensure(worst <= 1e-12, format!("lambda_t off closed form by {worst:e}"))?;
    let one = r.ldp_cylinder_limit(&"1".parse().unwrap(), &oracle).map_err(err)?;
    let zero = r.ldp_cylinder_limit(&"0".parse().unwrap(), &oracle).map_err(err)?;
    let elapsed = start.elapsed();
    ensure(one.gap <= 5e-2, format!("[1] gap {}", one.gap))?;
    ensure(zero.gap <= 1e-6, format!("[0] gap {}", zero.gap))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!(
        "lambda err {worst:.1e} (tol 1e-12), [1] gap {:.1e} (tol 5e-2), [0] gap {:.1e} (tol 1e-6), {elapsed:.2?} (< 10 s)",
        one.gap, zero.gap
    ))
}

fn golden_ldp() -> Outcome {
    let spec = golden();
    let a = potential(&spec, 1, &[0.0, -1.0]);
    let (r, oracle) = report(&spec, &a, 6, "2:256:geometric")?;
    let l = r.ldp_cylinder_limit(&"1".parse().unwrap(), &oracle).map_err(err)?;
    let witness = l.witness.as_ref().map(|x| x.to_string()).unwrap_or_default();
    ensure((l.sup_i + 1.0).abs() <= 1e-9, format!("sup I = {}", l.sup_i))?;
    ensure((l.empirical_limit - l.sup_i).abs() <= 5e-2, format!("empirical {} vs sup I {}", l.empirical_limit, l.sup_i))?;
    ensure(witness == "1(0)", format!("witness {witness}"))?;
    let dm = (r.m.m - oracle.m).abs();
    ensure(oracle.m == 0.0 && dm <= 1e-8, format!("m {} vs oracle {}", r.m.m, oracle.m))?;
    Ok(format!(
        "empirical [1] limit {:.4} vs sup I -1 (tol 5e-2), witness {witness}, |m - oracle| {dm:.1e} (tol 1e-8)",
        l.empirical_limit
    ))
}

fn maximizing_value() -> Outcome {
    let spec = golden();
    let mut worst_m: f64 = 0.0;
    let mut worst_side: f64 = 0.0;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = potential(&spec, 2, &vals);
        let oracle = max_orbit_mean(&a, 10, &spec).map_err(err)?;
        let pl = Arc::new(Pipeline::new(&spec, &a, 4).map_err(err)?);
        let sw = sweep(pl, &grid("2:4096:geometric"), PowerOptions::default()).map_err(err)?;
        let m = max_value(&sw, ZeroTempOptions::default().fit_bound).map_err(err)?;
        let dm = (m.m - oracle.m).abs();
        worst_m = worst_m.max(dm);
        ensure(dm <= 1e-6, format!("seed {seed}: m {} vs oracle {}", m.m, oracle.m))?;
        for row in &sw.rows {
            let d = (row.log_lambda - row.transpose_log_lambda_over_t * row.t).abs();
            worst_side = worst_side.max(d);
            ensure(d <= 1e-8, format!("seed {seed}, t {}: log lambda sides differ by {d:e}", row.t))?;
        }
    }
    Ok(format!(
        "max |m_eig - m_oracle| {worst_m:.1e} (tol 1e-6), max forward/transpose log-lambda gap {worst_side:.1e} (tol 1e-8)"
    ))
}

fn depth2_pipeline(k: usize) -> std::result::Result<Pipeline, String> {
    let spec = golden();
    Pipeline::new(&spec, &potential(&spec, 2, &GOLDEN_DEPTH2[0]), k).map_err(err)
}

fn duality() -> Outcome {
    let pl = depth2_pipeline(2)?;
    let mut worst: f64 = 0.0;
    for p in random_bilateral_pairs(pl.spec(), 100, 4, 2024).map_err(err)? {
        let r = check_duality(pl.potential(), pl.transpose_potential(), &p.past, &p.future, pl.kernel_spec(), pl.spec())
            .map_err(err)?;
        worst = worst.max(r);
    }
    ensure(worst <= 1e-12, format!("duality residual {worst:e}"))?;
    Ok(format!("max residual over 100 pairs {worst:.1e} (tol 1e-12)"))
}

fn marginals() -> Outcome {
    let pl = depth2_pipeline(4)?;
    let mut worst: f64 = 0.0;
    for t in [1.0, 8.0, 64.0] {
        let st = pl.state(t, PowerOptions::default()).map_err(err)?;
        let (dp, df) = check_marginals(&pl.coupling(&st), &st.transpose.gibbs(), &st.forward.gibbs());
        worst = worst.max(dp).max(df);
        ensure(dp <= 1e-9 && df <= 1e-9, format!("t {t}: defects {dp:e}, {df:e}"))?;
    }
    Ok(format!("max marginal defect {worst:.1e} (tol 1e-9)"))
}

fn eigenfunction() -> Outcome {
    let pl = depth2_pipeline(4)?;
    let mut worst_shape: f64 = 0.0;
    let mut worst_int: f64 = 0.0;
    for t in [1.0, 8.0, 64.0] {
        let st = pl.state(t, PowerOptions::default()).map_err(err)?;
        let kernel: Vec<f64> = pl.log_kernel_eigenfunction(&st).iter().map(|v| v.exp()).collect();
        let power = st.forward.psi().values;
        let rho = st.forward.rho().masses;
        let norm = |psi: &[f64]| psi.iter().zip(&rho).map(|(p, r)| p * r).sum::<f64>();
        let (nk, np) = (norm(&kernel), norm(&power));
        let shape = kernel
            .iter()
            .zip(&power)
            .map(|(k, p)| ((k / nk) / (p / np) - 1.0).abs())
            .fold(0.0, f64::max);
        worst_shape = worst_shape.max(shape);
        worst_int = worst_int.max((nk - 1.0).abs());
        ensure(shape <= 1e-8, format!("t {t}: relative sup gap {shape:e}"))?;
        ensure((nk - 1.0).abs() <= 1e-10, format!("t {t}: integral {nk}"))?;
    }
    Ok(format!(
        "relative sup gap {worst_shape:.1e} (tol 1e-8), |int psi drho - 1| {worst_int:.1e} (tol 1e-10)"
    ))
}

fn golden_suites() -> Vec<(usize, Vec<f64>)> {
    GOLDEN_DEPTH1
        .iter()
        .map(|v| (1, v.to_vec()))
        .chain(GOLDEN_DEPTH2.iter().map(|v| (2, v.to_vec())))
        .collect()
}

fn calibration() -> Outcome {
    let spec = golden();
    let mut worst: f64 = 0.0;
    for (d, vals) in golden_suites() {
        let (r, _) = report(&spec, &potential(&spec, d, &vals), 6, "2:4096:geometric")?;
        worst = worst.max(r.calibration_defect).max(r.transpose_calibration_defect);
        ensure(
            r.calibration_defect <= 1e-6 && r.transpose_calibration_defect <= 1e-6,
            format!("{vals:?}: defects {:e}, {:e}", r.calibration_defect, r.transpose_calibration_defect),
        )?;
    }
    Ok(format!("max calibration defect at depth 6, both sides, {worst:.1e} (tol 1e-6)"))
}

fn gamma() -> Outcome {
    let spec = golden();
    let mut worst: f64 = 0.0;
    let mut least_mass = f64::INFINITY;
    for (d, vals) in golden_suites() {
        let (r, _) = report(&spec, &potential(&spec, d, &vals), 4, "2:4096:geometric")?;
        let g = &r.gamma;
        let gap = (g.via_constant - g.via_sup).abs();
        worst = worst.max(gap);
        least_mass = least_mass.min(g.argmax_mass);
        ensure(gap <= 1e-3, format!("{vals:?}: c/t {} vs sup {}", g.via_constant, g.via_sup))?;
        ensure(g.argmax_mass >= 1e-3, format!("{vals:?}: argmax mass {}", g.argmax_mass))?;
    }
    Ok(format!("max |c_t/t - sup| {worst:.1e} (tol 1e-3), min argmax mass {least_mass:.3} (floor 1e-3)"))
}

fn rate_function() -> Outcome {
    let spec = golden();
    let a = potential(&spec, 2, &GOLDEN_DEPTH2[0]);
    let (r, oracle) = report(&spec, &a, 4, "2:4096:geometric")?;
    ensure(oracle.unique, "maximizing orbit is not unique")?;
    let cycle = oracle.argmax[0].word.digits().to_vec();
    let orbit = EventuallyPeriodicSeq::periodic(cycle.clone()).map_err(err)?;
    let on_orbit = r.rate(&orbit).map_err(err)?;
    ensure(on_orbit.is_finite() && on_orbit.value().abs() < 1e-9, format!("I on maximizing orbit {on_orbit:?}"))?;

    let pairs = random_bilateral_pairs(&spec, 100, 4, 99).map_err(err)?;
    let mut tested = 1;
    let mut worst_mono = f64::NEG_INFINITY;
    for p in &pairs {
        let i = r.rate(&p.future).map_err(err)?;
        tested += 1;
        ensure(i.value() <= 0.0, format!("I({}) = {}", p.future, i.value()))?;
        let mut prev = r.evaluate_f_k(p, 0).map_err(err)?;
        for k in 1..12 {
            let f = r.evaluate_f_k(p, k).map_err(err)?;
            worst_mono = worst_mono.max(f - prev);
            ensure(f <= prev + 1e-9, format!("F_{k} rises by {:e} on {}|{}", f - prev, p.past, p.future))?;
            prev = f;
        }
    }

    let mut finite = 0;
    let mut worst_hat: f64 = 0.0;
    'outer: for p in &pairs {
        for rot in 0..cycle.len() {
            let c: Vec<Digit> = cycle[rot..].iter().chain(&cycle[..rot]).copied().collect();
            let x = EventuallyPeriodicSeq::new(p.future.prefix(4).into_digits(), c).map_err(err)?;
            if !spec.is_bilateral(&p.past, &x).map_err(err)? {
                continue;
            }
            let b = r.rate_function_bilateral(&BilateralPair::new(p.past.clone(), x.clone()), 64).map_err(err)?;
            tested += 1;
            ensure(b.rate.value() <= 0.0, format!("I({x}) = {}", b.rate.value()))?;
            if let Some(gap) = b.consistency_gap {
                worst_hat = worst_hat.max(gap);
                ensure(gap <= 1e-6, format!("|I_hat - I| = {gap:e} at {}|{x}", p.past))?;
                finite += 1;
                if finite == 50 {
                    break 'outer;
                }
            }
        }
    }
    ensure(finite == 50, format!("only {finite} pairs with finite I"))?;
    Ok(format!(
        "I <= 0 on {tested} points, |I(orbit)| {:.1e} (tol 1e-9), max F_(k+1) - F_k {worst_mono:.1e} (tol 1e-9), max |I_hat - I| {worst_hat:.1e} on 50 pairs (tol 1e-6)",
        on_orbit.value().abs()
    ))
}

/// Parry automaton of a purely periodic quasi-greedy expansion: state i has
/// matched i digits of it.
fn presentation(period: &[u64]) -> DMatrix<u64> {
    let p = period.len();
    DMatrix::from_fn(p, p, |i, j| {
        let d = period[i];
        let to_start = if j == 0 { d } else { 0 };
        let advance = u64::from(j == (i + 1) % p);
        to_start + advance
    })
}

fn admissibility() -> Outcome {
    let mut checked = 0;
    for (digits, period) in [("(10)", vec![1u64, 0]), ("(110)", vec![1, 1, 0])] {
        let spec = BetaSpec::from_digits_str(digits).map_err(err)?;
        let m = presentation(&period);
        let mut power = DMatrix::<u64>::identity(m.nrows(), m.nrows());
        for n in 1..=12 {
            power = &power * &m;
            let paths: u64 = power.row(0).iter().sum();
            for side in [Side::Forward, Side::Transpose] {
                let count = spec.enumerate_language(n, side).map_err(err)?.len() as u64;
                ensure(count == paths, format!("{digits} n={n} {side:?}: {count} words vs {paths} paths"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} counts equal matrix-power path counts exactly"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("entropy of the beta-shift", entropy),
        ("Bernoulli closed form", bernoulli),
        ("golden-mean LDP", golden_ldp),
        ("maximizing value cross-validation", maximizing_value),
        ("duality identity", duality),
        ("coupling marginals", marginals),
        ("eigenfunction reconstruction", eigenfunction),
        ("calibration", calibration),
        ("gamma consistency", gamma),
        ("rate-function properties", rate_function),
        ("admissibility oracle equivalence", admissibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
