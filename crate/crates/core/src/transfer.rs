//! Cylinder discretization of the Ruelle operator and its Perron data.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::beta::{BetaSpec, Language, Side, SpecGap};
use crate::error::{Error, Result};
use crate::symbolic::{Digit, Word};

/// `log(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.into_iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// A locally constant potential given by its values on the words of one depth.
#[derive(Clone, Debug)]
pub struct Potential {
    language: Arc<Language>,
    values: Vec<f64>,
    theta: f64,
    holder_const: f64,
}

impl Potential {
    pub fn from_values(language: Arc<Language>, values: Vec<f64>, theta: f64) -> Result<Self> {
        if values.len() != language.len() {
            return Err(Error::Parse(format!(
                "expected {} values, got {}",
                language.len(),
                values.len()
            )));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Parse(format!("theta must lie in (0,1], got {theta}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite potential value {v}")));
        }
        let holder_const = holder_constant(&language, &values, theta);
        Ok(Potential {
            language,
            values,
            theta,
            holder_const,
        })
    }

    pub fn from_table(
        spec: &BetaSpec,
        side: Side,
        depth: usize,
        table: &BTreeMap<Word, f64>,
        theta: f64,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Parse("potential depth must be at least 1".into()));
        }
        let language = Arc::new(Language::build(spec, side, depth)?);
        for key in table.keys() {
            if key.len() != depth || language.index_of(key.digits()).is_none() {
                return Err(Error::InadmissibleTableKey(key.to_string()));
            }
        }
        let values = language
            .words()
            .iter()
            .map(|w| table.get(w).copied().ok_or_else(|| Error::MissingTableKey(w.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(language, values, theta)
    }

    pub fn from_fn(
        spec: &BetaSpec,
        side: Side,
        depth: usize,
        theta: f64,
        mut f: impl FnMut(&Word) -> f64,
    ) -> Result<Self> {
        let language = Arc::new(Language::build(spec, side, depth)?);
        let values = language.words().iter().map(&mut f).collect();
        Self::from_values(language, values, theta)
    }

    pub fn zero(spec: &BetaSpec, side: Side, depth: usize) -> Result<Self> {
        Self::from_fn(spec, side, depth, 1.0, |_| 0.0)
    }

    pub fn depth(&self) -> usize {
        self.language.depth()
    }

    pub fn side(&self) -> Side {
        self.language.side()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn holder_const(&self) -> f64 {
        self.holder_const
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn table(&self) -> BTreeMap<Word, f64> {
        self.language
            .words()
            .iter()
            .cloned()
            .zip(self.values.iter().copied())
            .collect()
    }

    /// Value at the cylinder of `w·0^∞`; `w` is truncated or padded to the depth.
    pub fn eval(&self, w: &[Digit]) -> Result<f64> {
        let d = self.depth();
        let idx = if w.len() >= d {
            self.language.index_of(&w[..d])
        } else {
            let mut p = w.to_vec();
            p.resize(d, 0);
            self.language.index_of(&p)
        };
        idx.map(|i| self.values[i])
            .ok_or_else(|| Error::Inadmissible(Word::from(&w[..w.len().min(d)])))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn shifted(&self, c: f64) -> Potential {
        Potential {
            language: self.language.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
            theta: self.theta,
            holder_const: self.holder_const,
        }
    }
}

/// `max |A(u) − A(v)| / d(u·0^∞, v·0^∞)^θ` over pairs of depth-d words.
fn holder_constant(language: &Language, values: &[f64], theta: f64) -> f64 {
    let words = language.words();
    let mut best: f64 = 0.0;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let n = words[i]
                .digits()
                .iter()
                .zip(words[j].digits())
                .position(|(a, b)| a != b)
                .map(|p| p + 1)
                .unwrap_or(words[i].len() + 1);
            let dist = 0.5f64.powi(n as i32 - 1);
            best = best.max((values[i] - values[j]).abs() / dist.powf(theta));
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct CylinderFunction {
    pub language: Arc<Language>,
    pub values: Vec<f64>,
}

impl CylinderFunction {
    pub fn constant(language: Arc<Language>, c: f64) -> Self {
        let n = language.len();
        CylinderFunction {
            language,
            values: vec![c; n],
        }
    }

    pub fn depth(&self) -> usize {
        self.language.depth()
    }

    pub fn get(&self, w: &[Digit]) -> Option<f64> {
        self.language.index_of(w).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.language.words().iter().zip(self.values.iter().copied())
    }
}

#[derive(Clone, Debug)]
pub struct CylinderMeasure {
    pub language: Arc<Language>,
    pub masses: Vec<f64>,
}

impl CylinderMeasure {
    pub fn depth(&self) -> usize {
        self.language.depth()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn normalized(&self) -> Self {
        let s = self.total();
        CylinderMeasure {
            language: self.language.clone(),
            masses: self.masses.iter().map(|m| m / s).collect(),
        }
    }

    pub fn get(&self, w: &[Digit]) -> Option<f64> {
        self.language.index_of(w).map(|i| self.masses[i])
    }

    /// Mass of the cylinder `[w]` for `|w| ≤ depth`.
    pub fn cylinder_mass(&self, w: &[Digit]) -> f64 {
        self.language
            .words()
            .iter()
            .zip(&self.masses)
            .filter(|(v, _)| v.digits().starts_with(w))
            .map(|(_, m)| m)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.language.words().iter().zip(self.masses.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

/// Perron data at one inverse temperature. The `log_*` vectors are the
/// primary representation; linear values are derived from them.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralTriple {
    pub t: f64,
    pub lambda: f64,
    pub log_lambda: f64,
    #[serde(skip)]
    pub language: Arc<Language>,
    pub log_psi: Vec<f64>,
    pub log_rho: Vec<f64>,
    pub log_gibbs: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl SpectralTriple {
    pub fn psi(&self) -> CylinderFunction {
        CylinderFunction {
            language: self.language.clone(),
            values: self.log_psi.iter().map(|v| v.exp()).collect(),
        }
    }

    pub fn rho(&self) -> CylinderMeasure {
        CylinderMeasure {
            language: self.language.clone(),
            masses: self.log_rho.iter().map(|v| v.exp()).collect(),
        }
    }

    pub fn gibbs(&self) -> CylinderMeasure {
        CylinderMeasure {
            language: self.language.clone(),
            masses: self.log_gibbs.iter().map(|v| v.exp()).collect(),
        }
    }

    /// `log μ([w])` for `|w| ≤ depth`.
    pub fn log_cylinder_mass(&self, w: &[Digit]) -> f64 {
        log_sum_exp(
            self.language
                .words()
                .iter()
                .zip(&self.log_gibbs)
                .filter(|(v, _)| v.digits().starts_with(w))
                .map(|(_, m)| *m)
                .collect::<Vec<_>>(),
        )
    }
}

/// Branch structure of the operator at depth `k`, with `A(a·w)` per branch.
#[derive(Clone, Debug)]
pub struct TransferOperator {
    language: Arc<Language>,
    row_start: Vec<usize>,
    digit: Vec<Digit>,
    target: Vec<usize>,
    energy: Vec<f64>,
    // incoming branches grouped by target, as indices into the arrays above
    in_start: Vec<usize>,
    in_branch: Vec<usize>,
    in_source: Vec<usize>,
    primitive: bool,
}

impl TransferOperator {
    pub fn new(potential: &Potential, spec: &BetaSpec, k: usize) -> Result<Self> {
        let d = potential.depth();
        if k < d {
            return Err(Error::DepthMismatch {
                depth: k,
                potential_depth: d,
            });
        }
        if let SpecGap::AtLeast { bound, depth } = spec.specification_gap() {
            log::warn!(
                "specification gap unknown (at least {bound} from {depth} digits); Perron data not guaranteed"
            );
        }
        let side = potential.side();
        let language = if k == d {
            potential.language().clone()
        } else {
            Arc::new(Language::build(spec, side, k)?)
        };
        let n = language.len();
        let mut row_start = Vec::with_capacity(n + 1);
        let (mut digit, mut target, mut energy) = (Vec::new(), Vec::new(), Vec::new());
        let mut buf = Vec::with_capacity(k + 1);
        for w in language.words() {
            row_start.push(digit.len());
            for a in spec.alphabet() {
                buf.clear();
                buf.push(a);
                buf.extend_from_slice(w.digits());
                if !spec.is_admissible(&buf, side)? {
                    continue;
                }
                let tgt = language
                    .index_of(&buf[..k])
                    .expect("prefix of an admissible word is admissible");
                digit.push(a);
                target.push(tgt);
                energy.push(potential.eval(&buf)?);
            }
        }
        row_start.push(digit.len());
        let mut in_lists = vec![Vec::new(); n];
        for w in 0..n {
            for b in row_start[w]..row_start[w + 1] {
                in_lists[target[b]].push((b, w));
            }
        }
        let mut in_start = Vec::with_capacity(n + 1);
        let (mut in_branch, mut in_source) = (Vec::new(), Vec::new());
        for list in in_lists {
            in_start.push(in_branch.len());
            for (b, w) in list {
                in_branch.push(b);
                in_source.push(w);
            }
        }
        in_start.push(in_branch.len());
        let mut op = TransferOperator {
            language,
            row_start,
            digit,
            target,
            energy,
            in_start,
            in_branch,
            in_source,
            primitive: false,
        };
        op.primitive = op.check_primitive();
        Ok(op)
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    pub fn depth(&self) -> usize {
        self.language.depth()
    }

    pub fn dim(&self) -> usize {
        self.language.len()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// `(digit, target index, A(a·w))` for every branch over word `w`.
    pub fn branches(&self, w: usize) -> impl Iterator<Item = (Digit, usize, f64)> + '_ {
        (self.row_start[w]..self.row_start[w + 1])
            .map(move |b| (self.digit[b], self.target[b], self.energy[b]))
    }

    /// Irreducible and aperiodic transition graph.
    fn check_primitive(&self) -> bool {
        let n = self.dim();
        if n == 0 {
            return false;
        }
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(w) = queue.pop_front() {
            for b in self.row_start[w]..self.row_start[w + 1] {
                let v = self.target[b];
                if level[v] == usize::MAX {
                    level[v] = level[w] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level.iter().any(|&l| l == usize::MAX) {
            return false;
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for i in self.in_start[v]..self.in_start[v + 1] {
                let w = self.in_source[i];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return false;
        }
        let mut g = 0usize;
        for w in 0..n {
            for b in self.row_start[w]..self.row_start[w + 1] {
                let v = self.target[b];
                let diff = (level[w] + 1).abs_diff(level[v]);
                g = g.gcd(&diff);
            }
        }
        g == 1
    }

    /// `(L_{tA} φ)(w) = Σ_a e^{tA(a·w)} φ(a·w)`.
    pub fn apply(&self, t: f64, phi: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|w| {
                (self.row_start[w]..self.row_start[w + 1])
                    .map(|b| (t * self.energy[b]).exp() * phi[self.target[b]])
                    .sum()
            })
            .collect()
    }

    pub fn apply_adjoint(&self, t: f64, m: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|v| {
                (self.in_start[v]..self.in_start[v + 1])
                    .map(|i| (t * self.energy[self.in_branch[i]]).exp() * m[self.in_source[i]])
                    .sum()
            })
            .collect()
    }

    pub fn apply_log(&self, t: f64, log_phi: &[f64], out: &mut [f64]) {
        for (w, o) in out.iter_mut().enumerate() {
            let range = self.row_start[w]..self.row_start[w + 1];
            let mut m = f64::NEG_INFINITY;
            for b in range.clone() {
                m = m.max(t * self.energy[b] + log_phi[self.target[b]]);
            }
            if m == f64::NEG_INFINITY {
                *o = m;
                continue;
            }
            let s: f64 = range
                .map(|b| (t * self.energy[b] + log_phi[self.target[b]] - m).exp())
                .sum();
            *o = m + s.ln();
        }
    }

    pub fn apply_adjoint_log(&self, t: f64, log_m: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            let range = self.in_start[v]..self.in_start[v + 1];
            let term = |i: usize| t * self.energy[self.in_branch[i]] + log_m[self.in_source[i]];
            let m = range.clone().map(term).fold(f64::NEG_INFINITY, f64::max);
            if m == f64::NEG_INFINITY {
                *o = m;
                continue;
            }
            let s: f64 = range.map(|i| (term(i) - m).exp()).sum();
            *o = m + s.ln();
        }
    }

    /// Shifted power iteration `(L + λ̃ I)` in the log domain. Returns the
    /// log eigenvector (max 0), log λ, iterations and the final
    /// Collatz–Wielandt half-width.
    fn perron_log(
        &self,
        t: f64,
        opts: PowerOptions,
        adjoint: bool,
    ) -> Result<(Vec<f64>, f64, usize, f64)> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut prev = f64::NAN;
        let mut half = f64::INFINITY;
        for it in 1..=opts.max_iter {
            if adjoint {
                self.apply_adjoint_log(t, &x, &mut s);
            } else {
                self.apply_log(t, &x, &mut s);
            }
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (si, xi) in s.iter().zip(&x) {
                let r = si - xi;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            let log_lambda = 0.5 * (lo + hi);
            half = 0.5 * (hi - lo);
            if !half.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: half,
                });
            }
            // rounding floor of log entries of size ~ t·|A|
            let scale = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let tol = opts.tol.max(16.0 * f64::EPSILON * scale);
            if half <= tol && (log_lambda - prev).abs() <= tol {
                return Ok((x, log_lambda, it, half));
            }
            prev = log_lambda;
            let mut top = f64::NEG_INFINITY;
            for (xi, si) in x.iter_mut().zip(&s) {
                *xi = log_add_exp(*si, log_lambda + *xi);
                top = top.max(*xi);
            }
            for xi in x.iter_mut() {
                *xi -= top;
            }
        }
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            residual: half,
        })
    }

    pub fn power_iteration(&self, t: f64, opts: PowerOptions) -> Result<SpectralTriple> {
        if !self.primitive {
            return Err(Error::NonPrimitive { depth: self.depth() });
        }
        let (mut log_psi, log_lambda, it_f, res_f) = self.perron_log(t, opts, false)?;
        let (mut log_rho, _, it_a, _) = self.perron_log(t, opts, true)?;
        let z = log_sum_exp(log_rho.iter().copied());
        log_rho.iter_mut().for_each(|v| *v -= z);
        let z = log_sum_exp(log_psi.iter().zip(&log_rho).map(|(a, b)| a + b).collect::<Vec<_>>());
        log_psi.iter_mut().for_each(|v| *v -= z);
        let log_gibbs: Vec<f64> = log_psi.iter().zip(&log_rho).map(|(a, b)| a + b).collect();
        let mut s = vec![0.0; self.dim()];
        self.apply_log(t, &log_psi, &mut s);
        let residual = s
            .iter()
            .zip(&log_psi)
            .map(|(si, pi)| (si - pi - log_lambda).exp_m1().abs())
            .fold(0.0, f64::max);
        debug_assert!(residual <= 2.0 * res_f.exp_m1().abs() + 1e-12);
        Ok(SpectralTriple {
            t,
            lambda: log_lambda.exp(),
            log_lambda,
            language: self.language.clone(),
            log_psi,
            log_rho,
            log_gibbs,
            iterations: it_f.max(it_a),
            residual,
        })
    }
}

/// One application of `L_A` to `phi`.
pub fn apply_transfer(a: &Potential, phi: &CylinderFunction, spec: &BetaSpec) -> Result<CylinderFunction> {
    let op = TransferOperator::new(a, spec, phi.depth())?;
    Ok(CylinderFunction {
        language: op.language().clone(),
        values: op.apply(1.0, &phi.values),
    })
}

/// One application of the dual operator, without normalization.
pub fn adjoint_apply(a: &Potential, m: &CylinderMeasure, spec: &BetaSpec) -> Result<CylinderMeasure> {
    let op = TransferOperator::new(a, spec, m.depth())?;
    Ok(CylinderMeasure {
        language: op.language().clone(),
        masses: op.apply_adjoint(1.0, &m.masses),
    })
}

pub fn power_iteration(
    a: &Potential,
    k: usize,
    spec: &BetaSpec,
    t: f64,
    opts: PowerOptions,
) -> Result<SpectralTriple> {
    TransferOperator::new(a, spec, k)?.power_iteration(t, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeCheck {
    pub member: bool,
    /// Largest `φ(w)/φ(v) · e^{−K d^θ}` over comparable pairs.
    pub worst_ratio: f64,
}

/// Membership of `φ` in the cone `Λ_K` at cylinder resolution.
pub fn cone_membership(phi: &CylinderFunction, k_const: f64, theta: f64, spec: &BetaSpec) -> Result<ConeCheck> {
    if let Some(v) = phi.values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Parse(format!("cone check needs a positive function, got {v}")));
    }
    let lang = &phi.language;
    let side = lang.side();
    let mut groups: HashMap<Vec<Digit>, Vec<usize>> = HashMap::new();
    let mut buf = Vec::new();
    for (i, w) in lang.words().iter().enumerate() {
        let mut key = Vec::new();
        for a in spec.alphabet() {
            buf.clear();
            buf.push(a);
            buf.extend_from_slice(w.digits());
            if spec.is_admissible(&buf, side)? {
                key.push(a);
            }
        }
        groups.entry(key).or_default().push(i);
    }
    let mut worst: f64 = 1.0;
    for members in groups.values() {
        for &i in members {
            for &j in members {
                if i == j {
                    continue;
                }
                let (u, v) = (lang.word(i).digits(), lang.word(j).digits());
                let n = u.iter().zip(v).position(|(a, b)| a != b).unwrap_or(u.len()) + 1;
                let dist = 0.5f64.powi(n as i32 - 1);
                let log_ratio = (phi.values[i] / phi.values[j]).ln() - k_const * dist.powf(theta);
                worst = worst.max(log_ratio.exp());
            }
        }
    }
    Ok(ConeCheck {
        member: worst <= 1.0 + 1e-12,
        worst_ratio: worst,
    })
}

/// `max_w |μ(σ^{-1}[w]) − μ([w])|` over words one shorter than the measure depth.
pub fn invariance_check(mu: &CylinderMeasure) -> f64 {
    let mut direct: HashMap<&[Digit], f64> = HashMap::new();
    let mut pre: HashMap<&[Digit], f64> = HashMap::new();
    for (w, m) in mu.language.words().iter().zip(&mu.masses) {
        let d = w.digits();
        *direct.entry(&d[..d.len() - 1]).or_default() += m;
        *pre.entry(&d[1..]).or_default() += m;
    }
    let mut defect: f64 = 0.0;
    for (k, v) in &direct {
        defect = defect.max((v - pre.get(k).copied().unwrap_or(0.0)).abs());
    }
    for (k, v) in &pre {
        if !direct.contains_key(k) {
            defect = defect.max(v.abs());
        }
    }
    defect
}
