//! Involution kernel, transpose potential, the coupling `e^{W−c}ρ^⊺×ρ` and
//! the per-temperature pipeline that ties both sides together.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::beta::{BetaSpec, Language, Side};
use crate::error::{Error, Result};
use crate::symbolic::{BilateralPair, Digit, EventuallyPeriodicSeq, Word};
use crate::transfer::{
    log_sum_exp, CylinderFunction, CylinderMeasure, Potential, PowerOptions, SpectralTriple,
    TransferOperator,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSpec {
    pub reference: EventuallyPeriodicSeq,
    pub truncation: usize,
    pub tail_bound: f64,
    pub exact: bool,
}

impl KernelSpec {
    /// Reference `0^∞` and the shortest exact truncation.
    pub fn for_potential(a: &Potential) -> Self {
        Self::with_truncation(a, a.depth().saturating_sub(1))
    }

    pub fn with_truncation(a: &Potential, n: usize) -> Self {
        let exact = n + 1 >= a.depth();
        let r = 0.5f64.powf(a.theta());
        let tail_bound = if exact {
            0.0
        } else {
            a.holder_const() * r.powi(n as i32 + 1) / (1.0 - r)
        };
        KernelSpec {
            reference: EventuallyPeriodicSeq::zero(),
            truncation: n,
            tail_bound,
            exact,
        }
    }
}

/// `Σ_{n=1}^{N} A(τ_{y,n}x) − A(τ_{y,n}x')` with digit accessors.
fn kernel_sum(
    a: &Potential,
    y: &dyn Fn(usize) -> Digit,
    x: &dyn Fn(usize) -> Digit,
    xref: &dyn Fn(usize) -> Digit,
    n_terms: usize,
) -> Result<f64> {
    let d = a.depth();
    let mut buf = vec![0; d];
    let mut total = 0.0;
    for n in 1..=n_terms {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < n { y(n - 1 - i) } else { x(i - n) };
        }
        let lhs = a.eval(&buf)?;
        for (i, slot) in buf.iter_mut().enumerate().skip(n) {
            *slot = xref(i - n);
        }
        total += lhs - a.eval(&buf)?;
    }
    Ok(total)
}

fn word_digit(w: &[Digit]) -> impl Fn(usize) -> Digit + '_ {
    move |i| w.get(i).copied().unwrap_or(0)
}

/// `W(u·0^∞, w·0^∞)` against the reference `0^∞`, without admissibility checks.
pub fn kernel_on_words(a: &Potential, u: &[Digit], w: &[Digit], n_terms: usize) -> Result<f64> {
    kernel_sum(a, &word_digit(u), &word_digit(w), &|_| 0, n_terms)
}

pub fn involution_kernel(
    a: &Potential,
    y: &EventuallyPeriodicSeq,
    x: &EventuallyPeriodicSeq,
    ks: &KernelSpec,
    spec: &BetaSpec,
) -> Result<f64> {
    if !spec.is_bilateral(y, x)? {
        return Err(Error::NotBilateral {
            resolution: spec.bilateral_resolution(y, x),
        });
    }
    kernel_sum(
        a,
        &|i| y.digit(i),
        &|i| x.digit(i),
        &|i| ks.reference.digit(i),
        ks.truncation,
    )
}

/// `A^⊺(a·y) = A(a·x) + W(y, a·x) − W(a·y, x)` tabulated on the transpose
/// language, with the filler `x` ranging over every compatible word.
pub fn transpose_potential(a: &Potential, spec: &BetaSpec, ks: &KernelSpec) -> Result<Potential> {
    if a.side() != Side::Forward {
        return Err(Error::Parse("transpose_potential expects a forward potential".into()));
    }
    let d = a.depth();
    let lang = Arc::new(Language::build(spec, Side::Transpose, d)?);
    let fillers = Language::build(spec, Side::Forward, d)?;
    let reference: Vec<Digit> = ks.reference.prefix(d + ks.truncation).into_digits();
    let n = ks.truncation;
    let mut values = Vec::with_capacity(lang.len());
    for z in lang.words() {
        let z = z.digits();
        let (head, y) = (z[0], &z[1..]);
        let value_with = |f: &[Digit]| -> Result<f64> {
            let mut af = Vec::with_capacity(f.len() + 1);
            af.push(head);
            af.extend_from_slice(f);
            let fd = word_digit(f);
            let afd = word_digit(&af);
            let yd = word_digit(y);
            let zd = word_digit(z);
            let refd = word_digit(&reference);
            Ok(a.eval(&af)?
                + kernel_sum(a, &yd, &afd, &refd, n)?
                - kernel_sum(a, &zd, &fd, &refd, n)?)
        };
        let base = value_with(&reference)?;
        let (mut lo, mut hi) = (base, base);
        let mut window = z.to_vec();
        window.reverse();
        let split = window.len();
        for f in fillers.words() {
            window.truncate(split);
            window.extend_from_slice(f.digits());
            if !spec.is_admissible_word(&window)? {
                continue;
            }
            let v = value_with(f.digits())?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > 2.0 * ks.tail_bound + 1e-12 {
            return Err(Error::FillerDependence {
                word: Word::from(z),
                spread: hi - lo,
            });
        }
        values.push(base);
    }
    Potential::from_values(lang, values, a.theta())
}

/// `|L_{A^⊺}(e^{W(·,x)})(y) − L_A(e^{W(y,·)})(x)|`
pub fn check_duality(
    a: &Potential,
    at: &Potential,
    y: &EventuallyPeriodicSeq,
    x: &EventuallyPeriodicSeq,
    ks: &KernelSpec,
    spec: &BetaSpec,
) -> Result<f64> {
    if !spec.is_bilateral(y, x)? {
        return Err(Error::NotBilateral {
            resolution: spec.bilateral_resolution(y, x),
        });
    }
    let dt = at.depth();
    let d = a.depth();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for c in spec.alphabet() {
        let ay = y.prepend(&[c]);
        if spec.is_bilateral(&ay, x)? {
            let w = involution_kernel(a, &ay, x, ks, spec)?;
            lhs += (at.eval(ay.prefix(dt).digits())? + w).exp();
        }
        let ax = x.prepend(&[c]);
        if spec.is_bilateral(y, &ax)? {
            let w = involution_kernel(a, y, &ax, ks, spec)?;
            rhs += (a.eval(ax.prefix(d).digits())? + w).exp();
        }
    }
    Ok((lhs - rhs).abs())
}

/// A jointly admissible pair of depth-k words with its kernel value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPair {
    pub past: usize,
    pub future: usize,
    pub w: f64,
}

/// Both sides of the problem at one cylinder depth, ready to be evaluated
/// at any inverse temperature.
#[derive(Clone, Debug)]
pub struct Pipeline {
    spec: BetaSpec,
    potential: Potential,
    transpose: Potential,
    kernel_spec: KernelSpec,
    forward_op: TransferOperator,
    transpose_op: TransferOperator,
    pairs: Vec<KernelPair>,
}

/// Perron data on both sides plus `log c` of the kernel normalization.
#[derive(Clone, Debug)]
pub struct TemperatureState {
    pub t: f64,
    pub forward: SpectralTriple,
    pub transpose: SpectralTriple,
    pub log_c: f64,
}

impl Pipeline {
    pub fn new(spec: &BetaSpec, potential: &Potential, k: usize) -> Result<Self> {
        let ks = KernelSpec::for_potential(potential);
        let transpose = transpose_potential(potential, spec, &ks)?;
        let forward_op = TransferOperator::new(potential, spec, k)?;
        let transpose_op = TransferOperator::new(&transpose, spec, k)?;
        let past = transpose_op.language().clone();
        let future = forward_op.language().clone();
        let mut pairs = Vec::new();
        let mut window = Vec::with_capacity(2 * k);
        for (i, u) in past.words().iter().enumerate() {
            for (j, w) in future.words().iter().enumerate() {
                window.clear();
                window.extend(u.digits().iter().rev());
                window.extend_from_slice(w.digits());
                if spec.is_admissible_word(&window)? {
                    let wv = kernel_on_words(potential, u.digits(), w.digits(), ks.truncation)?;
                    pairs.push(KernelPair {
                        past: i,
                        future: j,
                        w: wv,
                    });
                }
            }
        }
        Ok(Pipeline {
            spec: spec.clone(),
            potential: potential.clone(),
            transpose,
            kernel_spec: ks,
            forward_op,
            transpose_op,
            pairs,
        })
    }

    pub fn spec(&self) -> &BetaSpec {
        &self.spec
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn transpose_potential(&self) -> &Potential {
        &self.transpose
    }

    pub fn kernel_spec(&self) -> &KernelSpec {
        &self.kernel_spec
    }

    pub fn forward_op(&self) -> &TransferOperator {
        &self.forward_op
    }

    pub fn transpose_op(&self) -> &TransferOperator {
        &self.transpose_op
    }

    pub fn depth(&self) -> usize {
        self.forward_op.depth()
    }

    pub fn future_language(&self) -> &Arc<Language> {
        self.forward_op.language()
    }

    pub fn past_language(&self) -> &Arc<Language> {
        self.transpose_op.language()
    }

    pub fn pairs(&self) -> &[KernelPair] {
        &self.pairs
    }

    pub fn state(&self, t: f64, opts: PowerOptions) -> Result<TemperatureState> {
        let forward = self.forward_op.power_iteration(t, opts)?;
        let transpose = self.transpose_op.power_iteration(t, opts)?;
        let log_c = self.normalization_constant(t, &forward, &transpose);
        Ok(TemperatureState {
            t,
            forward,
            transpose,
            log_c,
        })
    }

    /// `c = log Σ e^{tW} ρ^⊺(u) ρ(w)` over jointly admissible pairs.
    pub fn normalization_constant(&self, t: f64, fwd: &SpectralTriple, tr: &SpectralTriple) -> f64 {
        log_sum_exp(
            self.pairs
                .iter()
                .map(|p| t * p.w + tr.log_rho[p.past] + fwd.log_rho[p.future])
                .collect::<Vec<_>>(),
        )
    }

    /// `log ψ(w) = log Σ_u e^{tW(u,w) − c} ρ^⊺(u)`.
    pub fn log_kernel_eigenfunction(&self, st: &TemperatureState) -> Vec<f64> {
        self.kernel_marginal(st, true)
    }

    /// `log ψ^⊺(u) = log Σ_w e^{tW(u,w) − c} ρ(w)`.
    pub fn log_kernel_transpose_eigenfunction(&self, st: &TemperatureState) -> Vec<f64> {
        self.kernel_marginal(st, false)
    }

    fn kernel_marginal(&self, st: &TemperatureState, future: bool) -> Vec<f64> {
        let n = if future {
            self.future_language().len()
        } else {
            self.past_language().len()
        };
        let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); n];
        for p in &self.pairs {
            if future {
                buckets[p.future].push(st.t * p.w + st.transpose.log_rho[p.past] - st.log_c);
            } else {
                buckets[p.past].push(st.t * p.w + st.forward.log_rho[p.future] - st.log_c);
            }
        }
        buckets.into_iter().map(log_sum_exp).collect()
    }

    /// The kernel eigenfunction, verified against `L_A ψ = λ ψ` and `∫ψ dρ = 1`.
    pub fn eigenfunction_from_kernel(&self, st: &TemperatureState, tol: f64) -> Result<CylinderFunction> {
        let log_psi = self.log_kernel_eigenfunction(st);
        let mut image = vec![0.0; log_psi.len()];
        self.forward_op.apply_log(st.t, &log_psi, &mut image);
        let residual = image
            .iter()
            .zip(&log_psi)
            .map(|(l, p)| (l - p - st.forward.log_lambda).exp_m1().abs())
            .fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::EigenMismatch(format!(
                "eigen-equation residual {residual:e} exceeds {tol:e}"
            )));
        }
        let integral: f64 = log_psi
            .iter()
            .zip(&st.forward.log_rho)
            .map(|(p, r)| (p + r).exp())
            .sum();
        if (integral - 1.0).abs() > 1e-10 {
            return Err(Error::EigenMismatch(format!("integral against rho is {integral}")));
        }
        Ok(CylinderFunction {
            language: self.future_language().clone(),
            values: log_psi.iter().map(|v| v.exp()).collect(),
        })
    }

    pub fn coupling(&self, st: &TemperatureState) -> CouplingMeasure {
        let log_masses: Vec<f64> = self
            .pairs
            .iter()
            .map(|p| st.t * p.w + st.transpose.log_rho[p.past] + st.forward.log_rho[p.future] - st.log_c)
            .collect();
        CouplingMeasure {
            past_language: self.past_language().clone(),
            future_language: self.future_language().clone(),
            pairs: self.pairs.iter().map(|p| (p.past, p.future)).collect(),
            masses: log_masses.iter().map(|v| v.exp()).collect(),
            log_masses,
            log_c: st.log_c,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CouplingMeasure {
    pub past_language: Arc<Language>,
    pub future_language: Arc<Language>,
    pub pairs: Vec<(usize, usize)>,
    pub masses: Vec<f64>,
    pub log_masses: Vec<f64>,
    pub log_c: f64,
}

impl CouplingMeasure {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn past_marginal(&self) -> CylinderMeasure {
        let mut m = vec![0.0; self.past_language.len()];
        for (&(u, _), mass) in self.pairs.iter().zip(&self.masses) {
            m[u] += mass;
        }
        CylinderMeasure {
            language: self.past_language.clone(),
            masses: m,
        }
    }

    pub fn future_marginal(&self) -> CylinderMeasure {
        let mut m = vec![0.0; self.future_language.len()];
        for (&(_, w), mass) in self.pairs.iter().zip(&self.masses) {
            m[w] += mass;
        }
        CylinderMeasure {
            language: self.future_language.clone(),
            masses: m,
        }
    }

    pub fn log_mass_of(&self, past: usize, future: usize) -> Option<f64> {
        self.pairs
            .iter()
            .position(|&p| p == (past, future))
            .map(|i| self.log_masses[i])
    }
}

/// Sup-distance of each marginal from its reference measure.
pub fn check_marginals(cm: &CouplingMeasure, mu_t: &CylinderMeasure, mu: &CylinderMeasure) -> (f64, f64) {
    let sup = |a: &CylinderMeasure, b: &CylinderMeasure| {
        a.masses
            .iter()
            .zip(&b.masses)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    (sup(&cm.past_marginal(), mu_t), sup(&cm.future_marginal(), mu))
}

/// Seeded random bilateral pairs: a random admissible core word split into
/// past and future, with zero or periodic tails on either side.
pub fn random_bilateral_pairs(
    spec: &BetaSpec,
    count: usize,
    core_len: usize,
    seed: u64,
) -> Result<Vec<BilateralPair>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tails: Vec<Vec<Digit>> = [vec![0], vec![1, 0], vec![1, 0, 0], vec![1], vec![1, 1, 0]]
        .into_iter()
        .filter(|c| c.iter().all(|&d| d <= spec.alphabet_top()))
        .collect();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut core: Vec<Digit> = Vec::with_capacity(2 * core_len);
        while core.len() < 2 * core_len {
            let c = rng.gen_range(0..=spec.alphabet_top());
            core.push(c);
            if !spec.is_admissible_word(&core)? {
                core.pop();
                core.push(0);
            }
        }
        let mut past: Vec<Digit> = core[..core_len].to_vec();
        past.reverse();
        let future = core[core_len..].to_vec();
        let pick = |rng: &mut ChaCha8Rng| tails[rng.gen_range(0..tails.len())].clone();
        let mut y = EventuallyPeriodicSeq::new(past.clone(), pick(&mut rng))?;
        let mut x = EventuallyPeriodicSeq::new(future.clone(), pick(&mut rng))?;
        if !spec.is_bilateral(&y, &x)? {
            y = EventuallyPeriodicSeq::new(past, vec![0])?;
            if !spec.is_bilateral(&y, &x)? {
                x = EventuallyPeriodicSeq::new(future, vec![0])?;
            }
        }
        if spec.is_bilateral(&y, &x)? {
            out.push(BilateralPair::new(y, x));
        }
    }
    Ok(out)
}
