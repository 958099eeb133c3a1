//! Greedy and quasi-greedy β-expansions, Parry admissibility and languages.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{Digit, EventuallyPeriodicSeq, Word};

pub const DEFAULT_TIE_GUARD: f64 = 1e-12;
pub const DEFAULT_LANGUAGE_CAP: usize = 2_000_000;

/// Knobs for the greedy digit computation. `input_rel_uncertainty` is the
/// relative error assumed on the floating-point inputs.
#[derive(Clone, Copy, Debug)]
pub struct GreedyOptions {
    pub tie_guard: f64,
    pub input_rel_uncertainty: f64,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            tie_guard: DEFAULT_TIE_GUARD,
            input_rel_uncertainty: f64::EPSILON,
        }
    }
}

struct GreedyRun {
    digits: Vec<Digit>,
    /// Position after which the remainder became exactly zero.
    terminated_at: Option<usize>,
    breach: Option<Error>,
    remainder: f64,
}

fn greedy_run(alpha: f64, beta: f64, n: usize, opts: GreedyOptions) -> Result<GreedyRun> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    let top = beta.floor();
    let upper = top / (beta - 1.0);
    if !(alpha >= 0.0) || alpha > upper * (1.0 + 1e-15) {
        return Err(Error::OutOfRange { alpha, upper });
    }
    let bq = BigRational::from_float(beta).expect("finite beta");
    let mut r = BigRational::from_float(alpha).expect("finite alpha");
    let top_i = top as i64;
    let delta_beta = beta * opts.input_rel_uncertainty;
    // absolute uncertainty of the current remainder
    let mut unc = alpha * opts.input_rel_uncertainty;
    let mut digits = Vec::with_capacity(n);
    let mut terminated_at = None;
    for pos in 0..n {
        if r.is_zero() {
            terminated_at.get_or_insert(pos);
            digits.push(0);
            continue;
        }
        let v = &bq * &r;
        let vf = v.to_f64().unwrap_or(f64::INFINITY);
        let v_unc = beta * unc + r.to_f64().unwrap_or(0.0) * delta_beta;
        let fl = v.floor().to_integer().to_i64().unwrap_or(i64::MAX);
        let j = fl.min(top_i);
        // nearest digit boundary among 1..=top
        let (boundary, dist) = {
            let mut best = (1i64, f64::INFINITY);
            for b in [j, j + 1] {
                if b >= 1 && b <= top_i {
                    let d = (vf - b as f64).abs();
                    if d < best.1 {
                        best = (b, d);
                    }
                }
            }
            best
        };
        if dist <= opts.tie_guard {
            digits.push(boundary as Digit);
            r = BigRational::zero();
            unc = 0.0;
            terminated_at = Some(pos + 1);
            continue;
        }
        if dist <= v_unc {
            return Ok(GreedyRun {
                digits,
                terminated_at: None,
                breach: Some(Error::PrecisionBreach {
                    position: pos + 1,
                    distance: dist,
                    uncertainty: v_unc,
                }),
                remainder: r.to_f64().unwrap_or(0.0),
            });
        }
        digits.push(j as Digit);
        r = v - BigRational::from_integer(BigInt::from(j));
        unc = v_unc;
    }
    Ok(GreedyRun {
        digits,
        terminated_at,
        breach: None,
        remainder: r.to_f64().unwrap_or(0.0),
    })
}

/// First `n` digits of the greedy β-expansion of `alpha`.
pub fn greedy_expansion(alpha: f64, beta: f64, n: usize) -> Result<Word> {
    greedy_expansion_with(alpha, beta, n, GreedyOptions::default()).map(|(w, _)| w)
}

/// As [`greedy_expansion`], also returning the remainder after `n` digits.
pub fn greedy_expansion_with(
    alpha: f64,
    beta: f64,
    n: usize,
    opts: GreedyOptions,
) -> Result<(Word, f64)> {
    let run = greedy_run(alpha, beta, n, opts)?;
    match run.breach {
        Some(e) => Err(e),
        None => Ok((Word::new(run.digits), run.remainder)),
    }
}

/// The expansion of 1 in base β, either as an exact eventually periodic
/// presentation or as a finite run of known digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expansion {
    Periodic(EventuallyPeriodicSeq),
    Truncated(Word),
}

impl Expansion {
    pub fn digit(&self, i: usize) -> Option<Digit> {
        match self {
            Expansion::Periodic(s) => Some(s.digit(i)),
            Expansion::Truncated(w) => w.digits().get(i).copied(),
        }
    }

    /// Number of known digits; `None` when every digit is known.
    pub fn known_len(&self) -> Option<usize> {
        match self {
            Expansion::Periodic(_) => None,
            Expansion::Truncated(w) => Some(w.len()),
        }
    }

    pub fn presentation_len(&self) -> usize {
        match self {
            Expansion::Periodic(s) => s.presentation_len(),
            Expansion::Truncated(w) => w.len(),
        }
    }
}

impl fmt::Display for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expansion::Periodic(s) => write!(f, "{s}"),
            Expansion::Truncated(w) => write!(f, "{w}..."),
        }
    }
}

fn quasi_greedy_run(beta: f64, n: usize, opts: GreedyOptions) -> Result<(Expansion, Option<Error>)> {
    let run = greedy_run(1.0, beta, n, opts)?;
    if let Some(m) = run.terminated_at {
        let mut period = run.digits[..m].to_vec();
        while period.last() == Some(&0) {
            period.pop();
        }
        let last = period.last_mut().expect("greedy expansion of 1 is nonzero");
        *last -= 1;
        if period.iter().all(|&d| d == 0) {
            return Err(Error::InvalidBeta(beta));
        }
        return Ok((Expansion::Periodic(EventuallyPeriodicSeq::periodic(period)?), None));
    }
    Ok((Expansion::Truncated(Word::new(run.digits)), run.breach))
}

/// Quasi-greedy expansion of 1, searched over the first `n` greedy digits.
pub fn quasi_greedy_of_one(beta: f64, n: usize) -> Result<Expansion> {
    match quasi_greedy_run(beta, n, GreedyOptions::default())? {
        (x, None) => Ok(x),
        (_, Some(e)) => Err(e),
    }
}

/// `Σ x_n β^{-n}` in closed form.
pub fn evaluate_beta_x(x: &EventuallyPeriodicSeq, beta: f64) -> f64 {
    let inv = 1.0 / beta;
    let mut acc = 0.0;
    let mut scale = inv;
    for &d in x.pre() {
        acc += d as f64 * scale;
        scale *= inv;
    }
    let mut per = 0.0;
    let mut s = 1.0;
    for &d in x.period() {
        per += d as f64 * s;
        s *= inv;
    }
    // s = β^{-p}
    acc + scale * per / (1.0 - s)
}

fn is_self_admissible(d: &EventuallyPeriodicSeq) -> bool {
    (1..d.presentation_len()).all(|k| d.shift_by(k).compare(d) != Ordering::Greater)
}

/// The β whose quasi-greedy expansion of 1 is `d`.
pub fn beta_from_digits(d: &EventuallyPeriodicSeq) -> Result<f64> {
    if d.period().iter().all(|&x| x == 0) {
        return Err(Error::NotQuasiGreedy(format!(
            "{d} has finitely many nonzero digits"
        )));
    }
    if !is_self_admissible(d) {
        return Err(Error::NotQuasiGreedy(format!("{d} is not self-admissible")));
    }
    let d1 = d.digit(0);
    if d.is_purely_periodic() && d.period().len() == 1 {
        return Ok(d1 as f64 + 1.0);
    }
    let (mut lo, mut hi) = (1.0f64, d1 as f64 + 1.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-16 * hi {
            break;
        }
        if evaluate_beta_x(d, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = if (evaluate_beta_x(d, lo) - 1.0).abs() < (evaluate_beta_x(d, hi) - 1.0).abs() {
        lo
    } else {
        hi
    };
    let check = (d.presentation_len() + d.period().len()).min(64);
    let (back, _) = quasi_greedy_run(beta, check, GreedyOptions::default())?;
    let consistent = match &back {
        Expansion::Periodic(s) => s == d,
        Expansion::Truncated(w) => d.prefix(w.len()) == *w,
    };
    if !consistent {
        return Err(Error::NotQuasiGreedy(format!(
            "{d} does not round-trip (numeric expansion {back})"
        )));
    }
    Ok(beta)
}

/// Maximal run of zeros in the expansion of 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecGap {
    Exact(usize),
    /// Lower bound read off the first `depth` digits.
    AtLeast { bound: usize, depth: usize },
}

fn max_zero_run(digits: impl Iterator<Item = Digit>) -> usize {
    let (mut best, mut cur) = (0, 0);
    for d in digits {
        if d == 0 {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Forward,
    Transpose,
}

#[derive(Clone, Debug)]
pub struct BetaSpec {
    beta: f64,
    xbeta: Expansion,
    alphabet_top: Digit,
}

impl BetaSpec {
    /// Reference mode: β recovered from an exact presentation of x^β.
    pub fn from_digits(d: &EventuallyPeriodicSeq) -> Result<Self> {
        let beta = beta_from_digits(d)?;
        let top = if d.is_purely_periodic() && d.period().len() == 1 {
            d.digit(0) + 1
        } else {
            d.digit(0)
        };
        Ok(BetaSpec {
            beta,
            xbeta: Expansion::Periodic(d.clone()),
            alphabet_top: top,
        })
    }

    pub fn from_digits_str(s: &str) -> Result<Self> {
        Self::from_digits(&s.parse()?)
    }

    /// Numeric mode: digits of x^β computed from `beta` up to `max_digits`.
    /// Digits past a precision breach are dropped, leaving a truncated stream.
    pub fn from_value(beta: f64, max_digits: usize) -> Result<Self> {
        let (xbeta, breach) = quasi_greedy_run(beta, max_digits, GreedyOptions::default())?;
        if let Some(e) = breach {
            log::warn!("expansion of 1 truncated: {e}");
        }
        if let Expansion::Truncated(w) = &xbeta {
            if w.is_empty() {
                return Err(Error::PrecisionBreach {
                    position: 1,
                    distance: 0.0,
                    uncertainty: 0.0,
                });
            }
        }
        Ok(BetaSpec {
            beta,
            xbeta,
            alphabet_top: beta.floor() as Digit,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn xbeta(&self) -> &Expansion {
        &self.xbeta
    }

    pub fn alphabet_top(&self) -> Digit {
        self.alphabet_top
    }

    pub fn alphabet(&self) -> std::ops::RangeInclusive<Digit> {
        0..=self.alphabet_top
    }

    pub fn xbeta_prefix(&self, n: usize) -> Result<Word> {
        (0..n)
            .map(|i| {
                self.xbeta
                    .digit(i)
                    .ok_or(Error::UnknownAtDepth { depth: i })
            })
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }

    /// Compares a block with the prefix of x^β of the same length.
    pub fn compare_block(&self, block: &[Digit]) -> Result<Ordering> {
        for (i, &b) in block.iter().enumerate() {
            let x = self
                .xbeta
                .digit(i)
                .ok_or(Error::UnknownAtDepth { depth: i })?;
            match b.cmp(&x) {
                Ordering::Equal => continue,
                o => return Ok(o),
            }
        }
        Ok(Ordering::Equal)
    }

    pub fn is_admissible_word(&self, w: &[Digit]) -> Result<bool> {
        for k in 0..w.len() {
            if self.compare_block(&w[k..])? == Ordering::Greater {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_admissible_transpose(&self, w: &[Digit]) -> Result<bool> {
        let mut r = w.to_vec();
        r.reverse();
        self.is_admissible_word(&r)
    }

    pub fn is_admissible(&self, w: &[Digit], side: Side) -> Result<bool> {
        match side {
            Side::Forward => self.is_admissible_word(w),
            Side::Transpose => self.is_admissible_transpose(w),
        }
    }

    /// Whether `x ∈ Σ_β`.
    pub fn is_admissible_sequence(&self, x: &EventuallyPeriodicSeq) -> Result<bool> {
        match &self.xbeta {
            Expansion::Periodic(xb) => Ok((0..x.presentation_len())
                .all(|k| x.shift_by(k).compare(xb) != Ordering::Greater)),
            Expansion::Truncated(w) => {
                let n = x.presentation_len() + w.len();
                match self.is_admissible_word(x.prefix(n).digits()) {
                    Ok(b) => Ok(b),
                    Err(e) => Err(e),
                }
            }
        }
    }

    /// Window half-width large enough to decide bilateral admissibility of
    /// a pair built from the two sequences.
    pub fn bilateral_resolution(&self, y: &EventuallyPeriodicSeq, x: &EventuallyPeriodicSeq) -> usize {
        let (pre_b, per_b) = match &self.xbeta {
            Expansion::Periodic(s) => (s.pre().len(), s.period().len()),
            Expansion::Truncated(w) => (w.len(), 1),
        };
        let l = y.period().len().lcm(&x.period().len()).lcm(&per_b);
        y.pre().len().max(x.pre().len()) + pre_b + 2 * l + 1
    }

    /// Every window `y_R … y_1 x_1 … x_R` admissible.
    pub fn is_bilateral(&self, y: &EventuallyPeriodicSeq, x: &EventuallyPeriodicSeq) -> Result<bool> {
        let r = self.bilateral_resolution(y, x);
        let window = y.prefix(r).transpose().concat(&x.prefix(r));
        self.is_admissible_word(window.digits())
    }

    pub fn specification_gap(&self) -> SpecGap {
        match &self.xbeta {
            Expansion::Periodic(s) => {
                let n = s.pre().len() + 2 * s.period().len();
                SpecGap::Exact(max_zero_run((0..n).map(|i| s.digit(i))))
            }
            Expansion::Truncated(w) => SpecGap::AtLeast {
                bound: max_zero_run(w.digits().iter().copied()),
                depth: w.len(),
            },
        }
    }

    pub fn evaluate(&self, x: &EventuallyPeriodicSeq) -> f64 {
        evaluate_beta_x(x, self.beta)
    }

    pub fn enumerate_language(&self, n: usize, side: Side) -> Result<Vec<Word>> {
        Ok(Language::build(self, side, n)?.words)
    }
}

/// Admissible words of one depth, sorted, with a reverse index.
#[derive(Clone, Debug)]
pub struct Language {
    side: Side,
    depth: usize,
    words: Vec<Word>,
    index: HashMap<Vec<Digit>, usize>,
}

impl Language {
    pub fn build(spec: &BetaSpec, side: Side, depth: usize) -> Result<Self> {
        Self::build_capped(spec, side, depth, DEFAULT_LANGUAGE_CAP)
    }

    pub fn build_capped(spec: &BetaSpec, side: Side, depth: usize, cap: usize) -> Result<Self> {
        let mut layer: Vec<Vec<Digit>> = vec![Vec::new()];
        for j in 1..=depth {
            let mut next = Vec::new();
            for w in &layer {
                for a in spec.alphabet() {
                    let mut aw = Vec::with_capacity(j);
                    aw.push(a);
                    aw.extend_from_slice(w);
                    // suffixes of a·w were checked when w was built
                    if spec.compare_block(&aw)? != Ordering::Greater {
                        next.push(aw);
                    }
                }
            }
            if next.len() > cap {
                return Err(Error::LanguageCap { depth: j, cap });
            }
            layer = next;
        }
        if side == Side::Transpose {
            for w in layer.iter_mut() {
                w.reverse();
            }
        }
        layer.sort();
        let words: Vec<Word> = layer.into_iter().map(Word::new).collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.digits().to_vec(), i))
            .collect();
        Ok(Language {
            side,
            depth,
            words,
            index,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn index_of(&self, w: &[Digit]) -> Option<usize> {
        self.index.get(w).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    fn seq(s: &str) -> EventuallyPeriodicSeq {
        s.parse().unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn words(v: &[Word]) -> Vec<String> {
        v.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn greedy_examples() {
        let e = greedy_expansion(1.0, 2.0, 4).unwrap();
        assert_eq!(e, w("2000"));
        let e = greedy_expansion(1.0, GOLDEN, 4).unwrap();
        assert_eq!(e, w("1100"));
        assert_eq!(greedy_expansion(0.0, 1.7, 5).unwrap(), w("00000"));
        assert!(matches!(
            greedy_expansion(3.0, 1.7, 5),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn greedy_remainder_bound() {
        for &(alpha, beta) in &[(0.3, 1.7), (0.9, 2.5), (1.2, 3.3), (0.77, 1.3)] {
            let n = 12;
            let (digits, rem) =
                greedy_expansion_with(alpha, beta, n, GreedyOptions::default()).unwrap();
            let top = beta.floor();
            assert!(rem >= 0.0 && rem < top / (beta - 1.0));
            let mut recon = 0.0;
            for (i, &d) in digits.digits().iter().enumerate() {
                recon += d as f64 * beta.powi(-(i as i32 + 1));
            }
            recon += rem * beta.powi(-(n as i32));
            assert!((recon - alpha).abs() < 1e-12, "{alpha} {beta} {recon}");
        }
    }

    #[test]
    fn precision_breach_is_reported() {
        // long runs amplify the input uncertainty until digits are undecidable
        let r = greedy_expansion(0.1, 1.1, 2000);
        assert!(matches!(r, Err(Error::PrecisionBreach { .. })));
    }

    #[test]
    fn quasi_greedy_examples() {
        assert_eq!(quasi_greedy_of_one(2.0, 8).unwrap(), Expansion::Periodic(seq("(1)")));
        assert_eq!(
            quasi_greedy_of_one(GOLDEN, 8).unwrap(),
            Expansion::Periodic(seq("(10)"))
        );
        assert_eq!(quasi_greedy_of_one(3.0, 8).unwrap(), Expansion::Periodic(seq("(2)")));
    }

    #[test]
    fn beta_from_digits_examples() {
        assert_eq!(beta_from_digits(&seq("(1)")).unwrap(), 2.0);
        assert!((beta_from_digits(&seq("(10)")).unwrap() - GOLDEN).abs() < 1e-14);
        assert!(matches!(
            beta_from_digits(&seq("2(0)")),
            Err(Error::NotQuasiGreedy(_))
        ));
        assert!(matches!(
            beta_from_digits(&seq("(01)")),
            Err(Error::NotQuasiGreedy(_))
        ));
    }

    #[test]
    fn tribonacci_like() {
        // β³ = β² + β + 1 has greedy expansion 111, quasi-greedy (110)
        let b = beta_from_digits(&seq("(110)")).unwrap();
        assert!((b.powi(3) - b * b - b - 1.0).abs() < 1e-13);
        let q = quasi_greedy_of_one(b, 10).unwrap();
        assert_eq!(q, Expansion::Periodic(seq("(110)")));
    }

    #[test]
    fn roundtrip_family() {
        for s in ["(10)", "(110)", "(1)", "(2)", "(210)", "1(100)", "(1110)", "(21)", "2(01)", "(100)"] {
            let d = seq(s);
            let b = beta_from_digits(&d).unwrap();
            let q = quasi_greedy_of_one(b, 20);
            match q {
                Ok(Expansion::Periodic(p)) => assert_eq!(p, d, "{s}"),
                Ok(Expansion::Truncated(t)) => assert_eq!(d.prefix(t.len()), t, "{s}"),
                Err(Error::PrecisionBreach { position, .. }) => assert!(position > 6, "{s}"),
                Err(e) => panic!("{s}: {e}"),
            }
            assert!((evaluate_beta_x(&d, b) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn admissibility_examples() {
        let g = BetaSpec::from_digits_str("(10)").unwrap();
        assert!(g.is_admissible_word(w("10").digits()).unwrap());
        assert!(!g.is_admissible_word(w("11").digits()).unwrap());
        assert!(g.is_admissible_word(&[]).unwrap());
        assert!(!g.is_admissible_transpose(w("11").digits()).unwrap());
        assert!(g.is_admissible_transpose(w("01").digits()).unwrap());
        assert!(g.is_admissible_transpose(&[]).unwrap());
        // prefixes of x^β are admissible under the non-strict criterion
        assert!(g.is_admissible_word(w("1010101").digits()).unwrap());
    }

    #[test]
    fn truncated_stream_reports_unknown() {
        let spec = BetaSpec {
            beta: 1.7,
            xbeta: Expansion::Truncated(w("1011")),
            alphabet_top: 1,
        };
        assert!(!spec.is_admissible_word(w("11").digits()).unwrap());
        assert!(spec.is_admissible_word(w("1010").digits()).unwrap());
        assert_eq!(
            spec.is_admissible_word(w("10110").digits()),
            Err(Error::UnknownAtDepth { depth: 4 })
        );
    }

    #[test]
    fn language_examples() {
        let g = BetaSpec::from_digits_str("(10)").unwrap();
        let l2 = g.enumerate_language(2, Side::Forward).unwrap();
        assert_eq!(words(&l2), ["00", "01", "10"]);
        assert_eq!(g.enumerate_language(3, Side::Forward).unwrap().len(), 5);
        let two = BetaSpec::from_digits_str("(1)").unwrap();
        assert_eq!(two.alphabet_top(), 2);
        assert_eq!(
            words(&two.enumerate_language(2, Side::Forward).unwrap()),
            ["00", "01", "10", "11"]
        );
        let cap = Language::build_capped(&g, Side::Forward, 10, 50);
        assert!(matches!(cap, Err(Error::LanguageCap { .. })));
    }

    #[test]
    fn language_matches_brute_force() {
        for s in ["(10)", "(110)", "(21)", "1(100)"] {
            let spec = BetaSpec::from_digits_str(s).unwrap();
            for n in 1..=7 {
                let lang = spec.enumerate_language(n, Side::Forward).unwrap();
                let q = spec.alphabet_top() as usize + 1;
                let mut brute = Vec::new();
                for mut code in 0..q.pow(n as u32) {
                    let mut v = vec![0u8; n];
                    for d in v.iter_mut().rev() {
                        *d = (code % q) as u8;
                        code /= q;
                    }
                    if spec.is_admissible_word(&v).unwrap() {
                        brute.push(Word::new(v));
                    }
                }
                assert_eq!(lang, brute, "{s} n={n}");
            }
        }
    }

    #[test]
    fn spec_gap_examples() {
        let gap = |s: &str| BetaSpec::from_digits_str(s).unwrap().specification_gap();
        assert_eq!(gap("(10)"), SpecGap::Exact(1));
        assert_eq!(gap("(1)"), SpecGap::Exact(0));
        assert_eq!(gap("1(100)"), SpecGap::Exact(2));
        assert_eq!(gap("(1100)"), SpecGap::Exact(2));
    }

    #[test]
    fn evaluate_examples() {
        let g = BetaSpec::from_digits_str("(10)").unwrap();
        assert_eq!(g.evaluate(&seq("(0)")), 0.0);
        assert!((g.evaluate(&seq("1(0)")) - 1.0 / GOLDEN).abs() < 1e-15);
        assert!((g.evaluate(&seq("(10)")) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn numeric_mode_golden() {
        let g = BetaSpec::from_value(GOLDEN, 40).unwrap();
        assert_eq!(g.xbeta(), &Expansion::Periodic(seq("(10)")));
        assert_eq!(g.alphabet_top(), 1);
        let t = BetaSpec::from_value(std::f64::consts::E, 200).unwrap();
        match t.xbeta() {
            Expansion::Truncated(w) => assert!(w.len() > 10 && w.len() < 200),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growth_rate() {
        let g = BetaSpec::from_digits_str("(10)").unwrap();
        let n = 16;
        let count = g.enumerate_language(n, Side::Forward).unwrap().len() as f64;
        assert!((count.ln() / n as f64 - g.beta().ln()).abs() < 0.05);
    }

    #[test]
    fn transpose_specification_bridge() {
        let g = BetaSpec::from_digits_str("(10)").unwrap();
        let n0 = match g.specification_gap() {
            SpecGap::Exact(n) => n,
            _ => unreachable!(),
        };
        let mut all = Vec::new();
        for n in 1..=6 {
            all.extend(g.enumerate_language(n, Side::Transpose).unwrap());
        }
        let mut bridges = vec![Word::empty()];
        for n in 1..=n0 + 1 {
            bridges.extend(g.enumerate_language(n, Side::Transpose).unwrap());
        }
        for u in &all {
            for v in &all {
                let ok = bridges.iter().any(|b| {
                    g.is_admissible_transpose(u.concat(b).concat(v).digits()).unwrap()
                });
                assert!(ok, "{u} {v}");
            }
        }
    }

    proptest! {
        #[test]
        fn factor_closure(s in prop::sample::select(vec!["(10)", "(110)", "(21)", "1(100)"]),
                          v in prop::collection::vec(0u8..3, 1..10), i in 0usize..10, j in 0usize..10) {
            let spec = BetaSpec::from_digits_str(s).unwrap();
            let v: Vec<u8> = v.into_iter().map(|d| d.min(spec.alphabet_top())).collect();
            if spec.is_admissible_word(&v).unwrap() {
                let (a, b) = (i.min(v.len()), j.min(v.len()));
                let (a, b) = (a.min(b), a.max(b));
                prop_assert!(spec.is_admissible_word(&v[a..b]).unwrap());
            }
        }

        #[test]
        fn transpose_duality(v in prop::collection::vec(0u8..2, 0..=10)) {
            let spec = BetaSpec::from_digits_str("(110)").unwrap();
            let w = Word::new(v);
            prop_assert_eq!(
                spec.is_admissible_word(w.digits()).unwrap(),
                spec.is_admissible_transpose(w.transpose().digits()).unwrap()
            );
        }
    }

    #[test]
    fn counts_monotone() {
        for s in ["(10)", "(110)", "1(100)"] {
            let spec = BetaSpec::from_digits_str(s).unwrap();
            let mut prev = 1;
            for n in 1..=10 {
                let c = spec.enumerate_language(n, Side::Forward).unwrap().len();
                assert!(c >= prev);
                prev = c;
            }
        }
    }
}
