//! The t → ∞ sweep: maximizing value, calibrated sub-actions, the constant
//! γ, rate functions and the cylinder large-deviation limits.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::beta::{BetaSpec, Language, Side, SpecGap};
use crate::error::{Error, Result};
use crate::involution::{involution_kernel, Pipeline, TemperatureState};
use crate::oracle::OracleResult;
use crate::symbolic::{tau_concat, BilateralPair, Digit, EventuallyPeriodicSeq, Word};
use crate::transfer::{log_sum_exp, CylinderFunction, Potential, PowerOptions, TransferOperator};

pub const TOL_ZERO: f64 = 1e-9;
pub const MAX_BRIDGE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperatureGrid {
    values: Vec<f64>,
}

impl TemperatureGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let ok = !values.is_empty()
            && values.iter().all(|t| t.is_finite())
            && values[0] > 1.0
            && values.windows(2).all(|w| w[1] > w[0]);
        if !ok {
            return Err(Error::Parse(
                "temperature grid must be strictly increasing and start above 1".into(),
            ));
        }
        Ok(TemperatureGrid { values })
    }

    /// `lo, 2lo, 4lo, …` up to `hi`.
    pub fn geometric(lo: f64, hi: f64) -> Result<Self> {
        let mut values = Vec::new();
        let mut t = lo;
        while t <= hi * (1.0 + 1e-12) && values.len() < 64 {
            values.push(t);
            t *= 2.0;
        }
        Self::new(values)
    }

    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Self::new(vec![lo]);
        }
        let step = (hi - lo) / (n - 1) as f64;
        Self::new((0..n).map(|i| lo + step * i as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

impl Default for TemperatureGrid {
    fn default() -> Self {
        Self::geometric(2.0, 256.0).unwrap()
    }
}

/// `lo:hi:geometric`, `lo:hi:linear:n` or an explicit comma list.
impl FromStr for TemperatureGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("cannot parse temperature grid {s:?}"));
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, "geometric"] => Self::geometric(num(lo)?, num(hi)?),
            [lo, hi, "linear", n] => {
                Self::linear(num(lo)?, num(hi)?, n.trim().parse().map_err(|_| bad())?)
            }
            [list] => Self::new(list.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for TemperatureGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTempOptions {
    pub power: PowerOptions,
    /// Largest accepted residual of the affine-in-1/t fits.
    pub fit_bound: f64,
    pub gamma_tol: f64,
    pub tol_zero: f64,
    pub mass_floor: f64,
    pub boundary_tol: f64,
    pub oracle_tol: f64,
}

impl Default for ZeroTempOptions {
    fn default() -> Self {
        ZeroTempOptions {
            power: PowerOptions::default(),
            fit_bound: 1e-6,
            gamma_tol: 1e-3,
            tol_zero: TOL_ZERO,
            mass_floor: 1e-3,
            boundary_tol: 1e-3,
            oracle_tol: 1e-6,
        }
    }
}

/// Everything recorded at one inverse temperature.
#[derive(Clone, Debug, Serialize)]
pub struct TemperatureRow {
    pub t: f64,
    pub lambda: f64,
    pub log_lambda: f64,
    pub log_lambda_over_t: f64,
    pub transpose_log_lambda_over_t: f64,
    pub c_over_t: f64,
    /// `(1/t) log ψ_t` per forward cylinder.
    pub v: Vec<f64>,
    /// `(1/t) log ψ^⊺_t` per transpose cylinder.
    pub v_transpose: Vec<f64>,
    pub log_gibbs: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub pipeline: Arc<Pipeline>,
    pub grid: TemperatureGrid,
    pub rows: Vec<TemperatureRow>,
    pub final_state: TemperatureState,
}

pub fn sweep(pipeline: Arc<Pipeline>, grid: &TemperatureGrid, opts: PowerOptions) -> Result<Sweep> {
    let states = grid
        .values()
        .par_iter()
        .map(|&t| {
            pipeline.state(t, opts).map_err(|e| Error::AtTemperature {
                t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = states
        .iter()
        .map(|st| {
            let t = st.t;
            TemperatureRow {
                t,
                lambda: st.forward.lambda,
                log_lambda: st.forward.log_lambda,
                log_lambda_over_t: st.forward.log_lambda / t,
                transpose_log_lambda_over_t: st.transpose.log_lambda / t,
                c_over_t: st.log_c / t,
                v: st.forward.log_psi.iter().map(|p| p / t).collect(),
                v_transpose: st.transpose.log_psi.iter().map(|p| p / t).collect(),
                log_gibbs: st.forward.log_gibbs.clone(),
                iterations: st.forward.iterations.max(st.transpose.iterations),
            }
        })
        .collect();
    Ok(Sweep {
        pipeline,
        grid: grid.clone(),
        rows,
        final_state: states.into_iter().last().unwrap(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Limit {
    pub limit: f64,
    pub slope: f64,
    pub residual: f64,
}

/// Least-squares fit of `limit + slope/t` over the last half of the samples.
pub fn extrapolate_limit(samples: &[(f64, f64)], bound: f64) -> Result<Limit> {
    if samples.len() < 3 {
        return Err(Error::Parse("extrapolation needs at least three samples".into()));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Parse("extrapolation samples must have increasing t".into()));
    }
    let n = samples.len();
    let used = &samples[n - n.div_ceil(2).max(3)..];
    let m = used.len() as f64;
    let (su, sv) = used
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, v)| (a + 1.0 / t, b + v));
    let (mu, mv) = (su / m, sv / m);
    let (mut suu, mut suv) = (0.0, 0.0);
    for &(t, v) in used {
        let du = 1.0 / t - mu;
        suu += du * du;
        suv += du * (v - mv);
    }
    let slope = if suu > 0.0 { suv / suu } else { 0.0 };
    let limit = mv - slope * mu;
    let residual = used
        .iter()
        .map(|&(t, v)| (v - limit - slope / t).abs())
        .fold(0.0, f64::max);
    if !(residual <= bound) {
        return Err(Error::IllConditioned { residual, bound });
    }
    Ok(Limit {
        limit,
        slope,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxValue {
    pub m: f64,
    pub m_transpose: f64,
    pub residual: f64,
}

pub fn maximizing_value(sw: &Sweep, bound: f64) -> Result<MaxValue> {
    let fwd = extrapolate_limit(
        &sw.rows.iter().map(|r| (r.t, r.log_lambda_over_t)).collect::<Vec<_>>(),
        bound,
    )?;
    let tr = extrapolate_limit(
        &sw.rows
            .iter()
            .map(|r| (r.t, r.transpose_log_lambda_over_t))
            .collect::<Vec<_>>(),
        bound,
    )?;
    if (fwd.limit - tr.limit).abs() > 1e-8 {
        return Err(Error::EigenMismatch(format!(
            "forward m = {}, transpose m = {}",
            fwd.limit, tr.limit
        )));
    }
    Ok(MaxValue {
        m: fwd.limit,
        m_transpose: tr.limit,
        residual: fwd.residual.max(tr.residual),
    })
}

fn extrapolate_each(sw: &Sweep, pick: impl Fn(&TemperatureRow) -> &[f64], bound: f64) -> Result<(Vec<f64>, f64)> {
    let n = pick(&sw.rows[0]).len();
    let mut out = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let samples: Vec<(f64, f64)> = sw.rows.iter().map(|r| (r.t, pick(r)[i])).collect();
        let l = extrapolate_limit(&samples, bound)?;
        worst = worst.max(l.residual);
        out.push(l.limit);
    }
    Ok((out, worst))
}

/// Extrapolated `V` and `V^⊺`, with the worst fit residual.
pub fn calibrated_subactions(sw: &Sweep, bound: f64) -> Result<(CylinderFunction, CylinderFunction, f64)> {
    let (v, r1) = extrapolate_each(sw, |r| &r.v, bound)?;
    let (vt, r2) = extrapolate_each(sw, |r| &r.v_transpose, bound)?;
    Ok((
        CylinderFunction {
            language: sw.pipeline.future_language().clone(),
            values: v,
        },
        CylinderFunction {
            language: sw.pipeline.past_language().clone(),
            values: vt,
        },
        r1.max(r2),
    ))
}

/// `max_w |m − (max_a {A(a·w) + V(a·w)} − V(w))|` over the operator's cylinders.
pub fn calibration_defect(op: &TransferOperator, v: &CylinderFunction, m: f64) -> f64 {
    (0..op.dim())
        .map(|w| {
            let best = op
                .branches(w)
                .map(|(_, target, e)| e + v.values[target])
                .fold(f64::NEG_INFINITY, f64::max);
            (m - (best - v.values[w])).abs()
        })
        .fold(0.0, f64::max)
}

pub fn check_calibration(v: &CylinderFunction, a: &Potential, m: f64, spec: &BetaSpec) -> Result<f64> {
    let op = TransferOperator::new(a, spec, v.depth())?;
    if op.language().words() != v.language.words() {
        return Err(Error::Parse("sub-action and potential live on different languages".into()));
    }
    Ok(calibration_defect(&op, v, m))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaEstimate {
    pub gamma: f64,
    pub via_constant: f64,
    pub via_constant_residual: f64,
    pub via_sup: f64,
    pub argmax_past: Word,
    pub argmax_future: Word,
    /// Coupling mass of the argmax pair at the largest grid temperature.
    pub argmax_mass: f64,
}

pub fn gamma_estimate(
    sw: &Sweep,
    v: &CylinderFunction,
    vt: &CylinderFunction,
    opts: &ZeroTempOptions,
) -> Result<GammaEstimate> {
    let pl = &sw.pipeline;
    let via_c = extrapolate_limit(
        &sw.rows.iter().map(|r| (r.t, r.c_over_t)).collect::<Vec<_>>(),
        opts.fit_bound,
    )?;
    let coupling = pl.coupling(&sw.final_state);
    let scores: Vec<f64> = pl
        .pairs()
        .iter()
        .map(|p| p.w - v.values[p.future] - vt.values[p.past])
        .collect();
    let via_sup = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // among near-ties, report the pair the coupling actually charges
    let best = (0..scores.len())
        .filter(|&i| scores[i] >= via_sup - 1e-9)
        .max_by(|&i, &j| coupling.log_masses[i].total_cmp(&coupling.log_masses[j]))
        .unwrap();
    let pair = pl.pairs()[best];
    if (via_c.limit - via_sup).abs() > opts.gamma_tol {
        return Err(Error::EstimateDivergence {
            via_constant: via_c.limit,
            via_sup,
        });
    }
    Ok(GammaEstimate {
        gamma: via_sup,
        via_constant: via_c.limit,
        via_constant_residual: via_c.residual,
        via_sup,
        argmax_past: pl.past_language().word(pair.past).clone(),
        argmax_future: pl.future_language().word(pair.future).clone(),
        argmax_mass: coupling.masses[best],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateValue {
    Finite { value: f64 },
    /// The periodic tail loses `per_period_defect < 0` every period.
    NegInfinity { per_period_defect: f64 },
}

impl RateValue {
    pub fn value(&self) -> f64 {
        match self {
            RateValue::Finite { value } => *value,
            RateValue::NegInfinity { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, RateValue::Finite { .. })
    }
}

impl fmt::Display for RateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateValue::Finite { value } => write!(f, "{value}"),
            RateValue::NegInfinity { .. } => write!(f, "-inf"),
        }
    }
}

fn lookup(f: &CylinderFunction, w: &[Digit]) -> Result<f64> {
    f.get(w).ok_or_else(|| Error::Inadmissible(Word::from(w)))
}

/// `g(σ^j x) = V(σ^{j+1}x) − V(σ^j x) − A(σ^j x) + m` for `j < n`.
fn defect_terms(
    x: &EventuallyPeriodicSeq,
    v: &CylinderFunction,
    a: &Potential,
    m: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let k = v.depth();
    let d = a.depth();
    let digits = x.prefix(n + k.max(d) + 1).into_digits();
    (0..n)
        .map(|j| {
            Ok(lookup(v, &digits[j + 1..j + 1 + k])? - lookup(v, &digits[j..j + k])?
                - a.eval(&digits[j..j + d])?
                + m)
        })
        .collect()
}

/// `I(x) = lim −Σ_{j<n} (V∘σ − V − A + m)(σ^j x)`, exact for eventually
/// periodic `x`.
pub fn rate_function(
    x: &EventuallyPeriodicSeq,
    v: &CylinderFunction,
    a: &Potential,
    m: f64,
    spec: &BetaSpec,
    tol_zero: f64,
) -> Result<RateValue> {
    if !spec.is_admissible_sequence(x)? {
        return Err(Error::Inadmissible(x.prefix(x.presentation_len().max(1))));
    }
    let pre = x.pre().len();
    let p = x.period().len();
    let d = a.depth();
    let digits = x.prefix(pre + p + d).into_digits();
    let mut tail = 0.0;
    for j in pre..pre + p {
        tail += a.eval(&digits[j..j + d])?;
    }
    let delta = p as f64 * m - tail;
    if delta > tol_zero {
        return Ok(RateValue::NegInfinity {
            per_period_defect: -delta,
        });
    }
    let head: f64 = defect_terms(x, v, a, m, pre)?.iter().sum();
    Ok(RateValue::Finite { value: -head })
}

/// The first `n` partial sums `−Σ_{j<i} g(σ^j x)`, `i = 1..=n`.
pub fn rate_partial_sums(
    x: &EventuallyPeriodicSeq,
    v: &CylinderFunction,
    a: &Potential,
    m: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    Ok(defect_terms(x, v, a, m, n)?
        .into_iter()
        .map(|g| {
            acc -= g;
            acc
        })
        .collect())
}

/// Î through `k` steps, with the boundary term that must settle to γ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BilateralRate {
    pub value: f64,
    pub rate: RateValue,
    pub boundary: f64,
    pub boundary_gap: f64,
    /// `|Î(y,x) − I(x)|` when `I(x)` is finite.
    pub consistency_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdpResult {
    pub cylinder: Word,
    pub series: Vec<(f64, f64)>,
    pub empirical_limit: f64,
    pub fit_residual: f64,
    pub sup_i: f64,
    pub witness: Option<EventuallyPeriodicSeq>,
    pub gap: f64,
    pub unique: bool,
    pub candidates: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroTempSummary {
    pub depth: usize,
    pub t_max: f64,
    pub m: f64,
    pub m_transpose: f64,
    pub m_fit_residual: f64,
    pub gamma: f64,
    pub gamma_via_constant: f64,
    pub gamma_via_sup: f64,
    pub gamma_argmax: String,
    pub gamma_argmax_mass: f64,
    pub calibration_defect: f64,
    pub transpose_calibration_defect: f64,
    pub subaction_fit_residual: f64,
    pub oracle_m: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ZeroTempReport {
    pub pipeline: Arc<Pipeline>,
    pub rows: Vec<TemperatureRow>,
    pub m: MaxValue,
    pub v: CylinderFunction,
    pub v_transpose: CylinderFunction,
    pub subaction_residual: f64,
    pub calibration_defect: f64,
    pub transpose_calibration_defect: f64,
    pub gamma: GammaEstimate,
    pub oracle_m: Option<f64>,
    pub options: ZeroTempOptions,
}

/// Extrapolate a finished sweep; the oracle, when given, must agree on `m`.
pub fn analyze(sw: &Sweep, opts: &ZeroTempOptions, oracle: Option<&OracleResult>) -> Result<ZeroTempReport> {
    let m = maximizing_value(sw, opts.fit_bound)?;
    if let Some(o) = oracle {
        if (o.m - m.m).abs() > opts.oracle_tol {
            return Err(Error::OracleMismatch {
                eigen: m.m,
                oracle: o.m,
            });
        }
    }
    let (v, vt, subaction_residual) = calibrated_subactions(sw, opts.fit_bound)?;
    let forward_defect = calibration_defect(sw.pipeline.forward_op(), &v, m.m);
    let transpose_defect = calibration_defect(sw.pipeline.transpose_op(), &vt, m.m);
    let gamma = gamma_estimate(sw, &v, &vt, opts)?;
    Ok(ZeroTempReport {
        pipeline: sw.pipeline.clone(),
        rows: sw.rows.clone(),
        m,
        v,
        v_transpose: vt,
        subaction_residual,
        calibration_defect: forward_defect,
        transpose_calibration_defect: transpose_defect,
        gamma,
        oracle_m: oracle.map(|o| o.m),
        options: *opts,
    })
}

pub fn run(
    pipeline: Arc<Pipeline>,
    grid: &TemperatureGrid,
    opts: &ZeroTempOptions,
    oracle: Option<&OracleResult>,
) -> Result<ZeroTempReport> {
    let sw = sweep(pipeline, grid, opts.power)?;
    analyze(&sw, opts, oracle)
}

impl ZeroTempReport {
    pub fn summary(&self) -> ZeroTempSummary {
        ZeroTempSummary {
            depth: self.pipeline.depth(),
            t_max: self.rows.last().map_or(f64::NAN, |r| r.t),
            m: self.m.m,
            m_transpose: self.m.m_transpose,
            m_fit_residual: self.m.residual,
            gamma: self.gamma.gamma,
            gamma_via_constant: self.gamma.via_constant,
            gamma_via_sup: self.gamma.via_sup,
            gamma_argmax: format!("{}|{}", self.gamma.argmax_past, self.gamma.argmax_future),
            gamma_argmax_mass: self.gamma.argmax_mass,
            calibration_defect: self.calibration_defect,
            transpose_calibration_defect: self.transpose_calibration_defect,
            subaction_fit_residual: self.subaction_residual,
            oracle_m: self.oracle_m,
        }
    }

    fn spec(&self) -> &BetaSpec {
        self.pipeline.spec()
    }

    pub fn rate(&self, x: &EventuallyPeriodicSeq) -> Result<RateValue> {
        rate_function(
            x,
            &self.v,
            self.pipeline.potential(),
            self.m.m,
            self.spec(),
            self.options.tol_zero,
        )
    }

    fn kernel(&self, y: &EventuallyPeriodicSeq, x: &EventuallyPeriodicSeq) -> Result<f64> {
        involution_kernel(
            self.pipeline.potential(),
            y,
            x,
            self.pipeline.kernel_spec(),
            self.spec(),
        )
    }

    /// `(W − V − V^⊺)(y, x)`.
    fn excess(&self, y: &EventuallyPeriodicSeq, x: &EventuallyPeriodicSeq) -> Result<f64> {
        let k = self.pipeline.depth();
        Ok(self.kernel(y, x)?
            - lookup(&self.v, x.prefix(k).digits())?
            - lookup(&self.v_transpose, y.prefix(k).digits())?)
    }

    /// `Σ_{j<k} h(τ_{x,j+1} y)` with `h = V^⊺∘σ − V^⊺ − A^⊺ + m`.
    fn transpose_defect_sum(&self, pair: &BilateralPair, k: usize) -> Result<f64> {
        let kv = self.pipeline.depth();
        let at = self.pipeline.transpose_potential();
        let d = at.depth();
        // past after j steps starts at index k − j
        let mut past: Vec<Digit> = pair.future.prefix(k).into_digits();
        past.reverse();
        past.extend_from_slice(pair.past.prefix(kv.max(d) + 1).digits());
        let mut sum = 0.0;
        for j in 0..k {
            let z1 = &past[k - j - 1..];
            let z0 = &past[k - j..];
            sum += lookup(&self.v_transpose, &z0[..kv])? - lookup(&self.v_transpose, &z1[..kv])?
                - at.eval(&z1[..d])?
                + self.m.m;
        }
        Ok(sum)
    }

    /// `F_k(y,x) = −γ + (W − V − V^⊺)(y,x) − Σ_{j<k} h(τ_{x,j+1} y)`.
    pub fn evaluate_f_k(&self, pair: &BilateralPair, k: usize) -> Result<f64> {
        if !self.spec().is_bilateral(&pair.past, &pair.future)? {
            return Err(Error::NotBilateral {
                resolution: self.spec().bilateral_resolution(&pair.past, &pair.future),
            });
        }
        Ok(-self.gamma.gamma + self.excess(&pair.past, &pair.future)? - self.transpose_defect_sum(pair, k)?)
    }

    /// `Î_k(y,x) = (W − V − V^⊺)(σ̂^k(y,x)) − (W − V − V^⊺)(y,x) − Σ_{j<k} h(τ_{x,j+1} y)`.
    pub fn rate_function_bilateral(&self, pair: &BilateralPair, k: usize) -> Result<BilateralRate> {
        if !self.spec().is_bilateral(&pair.past, &pair.future)? {
            return Err(Error::NotBilateral {
                resolution: self.spec().bilateral_resolution(&pair.past, &pair.future),
            });
        }
        let rate = self.rate(&pair.future)?;
        let shifted_past = tau_concat(&pair.future, k, &pair.past);
        let shifted_future = pair.future.shift_by(k);
        let boundary = self.excess(&shifted_past, &shifted_future)?;
        let value = boundary - self.excess(&pair.past, &pair.future)? - self.transpose_defect_sum(pair, k)?;
        let boundary_gap = (boundary - self.gamma.gamma).abs();
        if rate.is_finite() && boundary_gap > self.options.boundary_tol {
            return Err(Error::BoundaryDivergence { gap: boundary_gap });
        }
        Ok(BilateralRate {
            value,
            rate,
            boundary,
            boundary_gap,
            consistency_gap: rate.is_finite().then(|| (value - rate.value()).abs()),
        })
    }

    /// `(t, (1/t) log μ_t([w]))` along the grid.
    pub fn cylinder_series(&self, w: &Word) -> Result<Vec<(f64, f64)>> {
        let lang = self.pipeline.future_language();
        if w.len() > lang.depth() {
            return Err(Error::Parse(format!(
                "cylinder {w} is longer than the depth {}",
                lang.depth()
            )));
        }
        if !self.spec().is_admissible_word(w.digits())? {
            return Err(Error::Inadmissible(w.clone()));
        }
        Ok(self
            .rows
            .iter()
            .map(|r| {
                let lm = log_sum_exp(
                    lang.words()
                        .iter()
                        .zip(&r.log_gibbs)
                        .filter(|(u, _)| u.digits().starts_with(w.digits()))
                        .map(|(_, m)| *m)
                        .collect::<Vec<_>>(),
                );
                (r.t, lm / r.t)
            })
            .collect())
    }

    /// Empirical decay rate of `μ_t([w])` against the supremum of `I` over
    /// the candidates `w·b·(c)^∞`.
    pub fn ldp_cylinder_limit(&self, w: &Word, oracle: &OracleResult) -> Result<LdpResult> {
        if !oracle.unique {
            log::warn!("maximizing orbit is not unique; the cylinder limit is reported without guarantee");
        }
        let series = self.cylinder_series(w)?;
        let fit = extrapolate_limit(&series, self.options.fit_bound)?;
        let spec = self.spec();
        let n0 = match spec.specification_gap() {
            SpecGap::Exact(n) => n,
            SpecGap::AtLeast { bound, .. } => bound,
        };
        let period = oracle.argmax.iter().map(|o| o.period).max().unwrap_or(1);
        let bridge = (2 * (n0 + period)).min(MAX_BRIDGE);
        let mut cycles: Vec<Vec<Digit>> = vec![vec![0]];
        for o in &oracle.argmax {
            let c = o.word.digits();
            for r in 0..c.len() {
                let mut rot = c[r..].to_vec();
                rot.extend_from_slice(&c[..r]);
                if !cycles.contains(&rot) {
                    cycles.push(rot);
                }
            }
        }
        let mut best: Option<(f64, EventuallyPeriodicSeq)> = None;
        let mut candidates = 0;
        for len in 0..=bridge {
            let bridges = if len == 0 {
                vec![Word::empty()]
            } else {
                Language::build(spec, Side::Forward, len)?.words().to_vec()
            };
            for b in &bridges {
                for c in &cycles {
                    let x = EventuallyPeriodicSeq::new(w.concat(b).into_digits(), c.clone())?;
                    if !spec.is_admissible_sequence(&x)? {
                        continue;
                    }
                    candidates += 1;
                    if let RateValue::Finite { value } = self.rate(&x)? {
                        if best.as_ref().is_none_or(|(v, _)| value > *v) {
                            best = Some((value, x));
                        }
                    }
                }
            }
        }
        let sup_i = best.as_ref().map_or(f64::NEG_INFINITY, |(v, _)| *v);
        Ok(LdpResult {
            cylinder: w.clone(),
            series,
            empirical_limit: fit.limit,
            fit_residual: fit.residual,
            sup_i,
            witness: best.map(|(_, x)| x),
            gap: (fit.limit - sup_i).abs(),
            unique: oracle.unique,
            candidates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::max_orbit_mean;
    use proptest::prelude::*;

    fn spec(s: &str) -> BetaSpec {
        BetaSpec::from_digits_str(s).unwrap()
    }

    fn depth1(spec: &BetaSpec, v0: f64, v1: f64) -> Potential {
        Potential::from_fn(spec, Side::Forward, 1, 1.0, |w| if w.digits()[0] == 0 { v0 } else { v1 }).unwrap()
    }

    fn report_on(spec: &BetaSpec, a: &Potential, k: usize, grid: &str) -> ZeroTempReport {
        let pl = Arc::new(Pipeline::new(spec, a, k).unwrap());
        let oracle = max_orbit_mean(a, 10, spec).unwrap();
        run(pl, &grid.parse().unwrap(), &ZeroTempOptions::default(), Some(&oracle)).unwrap()
    }

    fn report(spec: &BetaSpec, a: &Potential, k: usize) -> ZeroTempReport {
        report_on(spec, a, k, "2:256:geometric")
    }

    fn mixed(g: &BetaSpec) -> Potential {
        Potential::from_fn(g, Side::Forward, 2, 1.0, |w| {
            [0.3, -0.2, 0.1][(w.digits()[0] * 2 + w.digits()[1]) as usize]
        })
        .unwrap()
    }

    fn seq(s: &str) -> EventuallyPeriodicSeq {
        s.parse().unwrap()
    }

    #[test]
    fn grid_parsing() {
        let g: TemperatureGrid = "2:256:geometric".parse().unwrap();
        assert_eq!(g.values(), &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0]);
        let g: TemperatureGrid = "2:10:linear:5".parse().unwrap();
        assert_eq!(g.values(), &[2.0, 4.0, 6.0, 8.0, 10.0]);
        let g: TemperatureGrid = "3,5,9".parse().unwrap();
        assert_eq!(g.to_string().parse::<TemperatureGrid>().unwrap(), g);
        assert!("1,2".parse::<TemperatureGrid>().is_err());
        assert!("4,3".parse::<TemperatureGrid>().is_err());
        assert!("2:8".parse::<TemperatureGrid>().is_err());
    }

    #[test]
    fn extrapolation_examples() {
        let ts = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
        let exact: Vec<_> = ts.iter().map(|&t| (t, 5.0 + 3.0 / t)).collect();
        let l = extrapolate_limit(&exact, 1e-12).unwrap();
        assert!((l.limit - 5.0).abs() < 1e-12 && l.residual <= 1e-12);
        let soft: Vec<_> = ts.iter().map(|&t: &f64| (t, (-t).exp().ln_1p() / t)).collect();
        assert!(extrapolate_limit(&soft, 1e-6).unwrap().limit.abs() < 1e-8);
        let flat: Vec<_> = ts.iter().map(|&t| (t, 0.25)).collect();
        let l = extrapolate_limit(&flat, 0.0).unwrap();
        assert_eq!((l.limit, l.residual), (0.25, 0.0));
        let noisy: Vec<_> = ts.iter().enumerate().map(|(i, &t)| (t, (i % 2) as f64)).collect();
        assert!(matches!(extrapolate_limit(&noisy, 1e-3), Err(Error::IllConditioned { .. })));
        assert!(extrapolate_limit(&exact[..2], 1.0).is_err());
    }

    #[test]
    fn bernoulli_sweep() {
        let two = spec("(1)");
        let a = depth1(&two, 0.0, -1.0);
        let r = report(&two, &a, 1);
        for row in &r.rows {
            assert!((row.lambda - (1.0 + (-row.t).exp())).abs() < 1e-12);
        }
        assert!(r.m.m.abs() < 1e-8);
        assert!(r.v.values.iter().all(|v| v.abs() < 1e-12));
        assert!(r.gamma.gamma.abs() < 1e-12 && r.gamma.via_constant.abs() < 1e-8);
        assert!((r.rate(&seq("1(0)")).unwrap().value() + 1.0).abs() < 1e-12);
        assert_eq!(r.rate(&seq("(0)")).unwrap(), RateValue::Finite { value: 0.0 });
        match r.rate(&seq("(01)")).unwrap() {
            RateValue::NegInfinity { per_period_defect } => assert!((per_period_defect + 1.0).abs() < 1e-8),
            other => panic!("{other:?}"),
        }
        let pair = BilateralPair::new(seq("(0)"), seq("1(0)"));
        assert!((r.evaluate_f_k(&pair, 3).unwrap() + 1.0).abs() < 1e-8);
        let b = r.rate_function_bilateral(&pair, 16).unwrap();
        assert!((b.value + 1.0).abs() < 1e-8 && b.consistency_gap.unwrap() < 1e-8);
        let oracle = max_orbit_mean(&a, 6, &two).unwrap();
        let l1 = r.ldp_cylinder_limit(&"1".parse().unwrap(), &oracle).unwrap();
        assert!((l1.sup_i + 1.0).abs() < 1e-8 && l1.gap < 5e-2);
        let l0 = r.ldp_cylinder_limit(&"0".parse().unwrap(), &oracle).unwrap();
        assert!(l0.gap < 1e-6);
    }

    #[test]
    fn golden_examples() {
        let g = spec("(10)");
        let r = report(&g, &depth1(&g, 0.0, -1.0), 1);
        let spread = r.v.values.iter().fold(0.0f64, |s, v| s.max((v - r.v.values[0]).abs()));
        assert!(spread < 1e-6);
        assert!(r.gamma.via_constant.abs() < 1e-6);

        let a = depth1(&g, -1.0, 0.0);
        let r = report(&g, &a, 6);
        assert!((r.m.m + 0.5).abs() < 1e-8);
        assert!(r.calibration_defect < 1e-6 && r.transpose_calibration_defect < 1e-6);
        let spread = r.v.values.iter().fold(0.0f64, |s, v| s.max((v - r.v.values[0]).abs()));
        assert!(spread > 1e-3);
        assert!(check_calibration(&r.v, &a, r.m.m, &g).unwrap() < 1e-6);
        let mut bent = r.v.clone();
        bent.values[3] += 0.1;
        assert!(check_calibration(&bent, &a, r.m.m, &g).unwrap() >= 0.05);
        for x in ["(01)", "(10)"] {
            assert_eq!(r.rate(&seq(x)).unwrap(), RateValue::Finite { value: 0.0 });
        }
    }

    #[test]
    fn constant_shift_moves_m_only() {
        let g = spec("(10)");
        let a = mixed(&g);
        // transients of order e^{-0.3t} need the longer grid
        assert!(matches!(
            run(
                Arc::new(Pipeline::new(&g, &a, 3).unwrap()),
                &TemperatureGrid::default(),
                &ZeroTempOptions::default(),
                None
            ),
            Err(Error::IllConditioned { .. })
        ));
        let r0 = report_on(&g, &a, 3, "2:4096:geometric");
        let r1 = report_on(&g, &a.shifted(0.75), 3, "2:4096:geometric");
        assert!((r1.m.m - r0.m.m - 0.75).abs() < 1e-8);
        for x in ["1(0)", "010(0)", "(01)", "0010(01)"] {
            let (i0, i1) = (r0.rate(&seq(x)).unwrap(), r1.rate(&seq(x)).unwrap());
            assert!((i0.value() - i1.value()).abs() < 1e-6 || i0.value() == i1.value());
        }
    }

    #[test]
    fn rate_rejects_inadmissible() {
        let g = spec("(10)");
        let r = report(&g, &depth1(&g, 0.0, -1.0), 1);
        assert!(matches!(r.rate(&seq("11(0)")), Err(Error::Inadmissible(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn partial_sums_nonincreasing(pre in proptest::collection::vec(0u8..2, 0..6), tail in 0usize..3) {
            let g = spec("(10)");
            let a = mixed(&g);
            let r = report_on(&g, &a, 3, "2:4096:geometric");
            let period = [vec![0u8], vec![0, 1], vec![0, 0, 1]][tail].clone();
            let x = EventuallyPeriodicSeq::new(pre, period).unwrap();
            prop_assume!(g.is_admissible_sequence(&x).unwrap());
            let sums = rate_partial_sums(&x, &r.v, &a, r.m.m, 24).unwrap();
            for w in sums.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
            prop_assert!(sums.iter().all(|s| *s <= 1e-9));
        }
    }
}
