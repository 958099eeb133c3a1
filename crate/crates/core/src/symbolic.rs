//! Words, eventually periodic sequences, bilateral pairs and the shift metric.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Digit = u8;

/// A finite word over the digit alphabet. The derived order is lexicographic
/// with a proper prefix sorting before its extensions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Digit>);

impl Word {
    pub fn new(digits: Vec<Digit>) -> Self {
        Word(digits)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn zeros(n: usize) -> Self {
        Word(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn digits(&self) -> &[Digit] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<Digit> {
        self.0
    }

    pub fn max_digit(&self) -> Option<Digit> {
        self.0.iter().copied().max()
    }

    /// `a·w`
    pub fn prepend(&self, a: Digit) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// `w·a`
    pub fn append(&self, a: Digit) -> Word {
        let mut v = self.0.clone();
        v.push(a);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// First `n` digits, or the whole word when it is shorter.
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The word with its first `n` digits removed.
    pub fn drop_front(&self, n: usize) -> Word {
        Word(self.0[n.min(self.0.len())..].to_vec())
    }

    /// First `n` digits of `w·0^∞`.
    pub fn padded(&self, n: usize) -> Word {
        let mut v: Vec<Digit> = self.0.iter().copied().take(n).collect();
        v.resize(n, 0);
        Word(v)
    }

    pub fn transpose(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }
}

impl From<Vec<Digit>> for Word {
    fn from(v: Vec<Digit>) -> Self {
        Word(v)
    }
}

impl From<&[Digit]> for Word {
    fn from(v: &[Digit]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_digits(f, &self.0)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

fn write_digits(f: &mut fmt::Formatter<'_>, digits: &[Digit]) -> fmt::Result {
    if digits.iter().all(|&d| d <= 9) {
        for d in digits {
            write!(f, "{d}")?;
        }
    } else {
        for (i, d) in digits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
    }
    Ok(())
}

fn parse_digits(s: &str) -> Result<Vec<Digit>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.contains(',') {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<Digit>()
                    .map_err(|_| Error::Parse(format!("bad digit {p:?} in {s:?}")))
            })
            .collect()
    } else {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as Digit)
                    .ok_or_else(|| Error::Parse(format!("bad digit {c:?} in {s:?}")))
            })
            .collect()
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_digits(s).map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn lex_compare(u: &[Digit], v: &[Digit]) -> Ordering {
    u.cmp(v)
}

/// A one-sided sequence `pre·period^∞`, kept in canonical form: the period
/// is primitive and the preperiod is as short as possible.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicSeq {
    pre: Vec<Digit>,
    period: Vec<Digit>,
}

impl EventuallyPeriodicSeq {
    pub fn new(pre: Vec<Digit>, period: Vec<Digit>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Parse("period must be nonempty".into()));
        }
        let mut pre = pre;
        let mut period = primitive_root(&period).to_vec();
        while let (Some(&a), Some(&b)) = (pre.last(), period.last()) {
            if a != b {
                break;
            }
            pre.pop();
            period.rotate_right(1);
        }
        Ok(EventuallyPeriodicSeq { pre, period })
    }

    pub fn periodic(period: Vec<Digit>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    pub fn zero() -> Self {
        EventuallyPeriodicSeq {
            pre: Vec::new(),
            period: vec![0],
        }
    }

    /// `w·0^∞`
    pub fn zero_tail(w: &Word) -> Self {
        Self::new(w.digits().to_vec(), vec![0]).expect("nonempty period")
    }

    pub fn pre(&self) -> &[Digit] {
        &self.pre
    }

    pub fn period(&self) -> &[Digit] {
        &self.period
    }

    /// Length of the presentation, `|pre| + |period|`.
    pub fn presentation_len(&self) -> usize {
        self.pre.len() + self.period.len()
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.pre.is_empty()
    }

    /// Digit at 0-based position `i`.
    pub fn digit(&self, i: usize) -> Digit {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.digit(i)).collect())
    }

    pub fn max_digit(&self) -> Digit {
        self.pre
            .iter()
            .chain(self.period.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn shift(&self) -> Self {
        self.shift_by(1)
    }

    pub fn shift_by(&self, n: usize) -> Self {
        if n <= self.pre.len() {
            return EventuallyPeriodicSeq {
                pre: self.pre[n..].to_vec(),
                period: self.period.clone(),
            };
        }
        let r = (n - self.pre.len()) % self.period.len();
        let mut period = self.period.clone();
        period.rotate_left(r);
        EventuallyPeriodicSeq {
            pre: Vec::new(),
            period,
        }
    }

    pub fn prepend(&self, w: &[Digit]) -> Self {
        let mut pre = w.to_vec();
        pre.extend_from_slice(&self.pre);
        Self::new(pre, self.period.clone()).expect("nonempty period")
    }

    /// Number of leading digits after which two sequences either differ or
    /// are known to be identical.
    pub fn decision_len(&self, other: &Self) -> usize {
        self.pre.len().max(other.pre.len()) + self.period.len().lcm(&other.period.len())
    }

    /// Lexicographic comparison of the infinite sequences.
    pub fn compare(&self, other: &Self) -> Ordering {
        let n = self.decision_len(other);
        for i in 0..n {
            match self.digit(i).cmp(&other.digit(i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// Index (1-based) of the first disagreement, `None` if equal.
    pub fn first_disagreement(&self, other: &Self) -> Option<usize> {
        let n = self.decision_len(other);
        (0..n).find(|&i| self.digit(i) != other.digit(i)).map(|i| i + 1)
    }
}

fn primitive_root(p: &[Digit]) -> &[Digit] {
    let n = p.len();
    for d in 1..n {
        if n % d == 0 && (d..n).all(|i| p[i] == p[i - d]) {
            return &p[..d];
        }
    }
    p
}

impl fmt::Display for EventuallyPeriodicSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.max_digit() > 9;
        write_digits(f, &self.pre)?;
        if wide && !self.pre.is_empty() {
            f.write_str(",")?;
        }
        f.write_str("(")?;
        write_digits(f, &self.period)?;
        f.write_str(")")
    }
}

impl fmt::Debug for EventuallyPeriodicSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seq(\"{self}\")")
    }
}

impl FromStr for EventuallyPeriodicSeq {
    type Err = Error;

    /// Accepts `pre(period)`; a bare word `w` means `w(0)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.find('(') {
            None => Ok(Self::zero_tail(&s.parse()?)),
            Some(open) => {
                let close = s
                    .rfind(')')
                    .filter(|&c| c == s.len() - 1 && c > open)
                    .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in {s:?}")))?;
                let pre = parse_digits(s[..open].trim_end_matches(','))?;
                let period = parse_digits(&s[open + 1..close])?;
                if period.is_empty() {
                    return Err(Error::Parse(format!("empty period in {s:?}")));
                }
                Self::new(pre, period)
            }
        }
    }
}

impl Serialize for EventuallyPeriodicSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EventuallyPeriodicSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `τ_{y,m}(x) = y_m … y_1 x_1 x_2 …`
pub fn tau_concat(y: &EventuallyPeriodicSeq, m: usize, x: &EventuallyPeriodicSeq) -> EventuallyPeriodicSeq {
    x.prepend(y.prefix(m).transpose().digits())
}

pub fn transpose_word(w: &Word) -> Word {
    w.transpose()
}

/// `d(x,y) = 2^{-(n-1)}` where `n` is the first index of disagreement.
pub fn shift_metric(x: &EventuallyPeriodicSeq, y: &EventuallyPeriodicSeq) -> f64 {
    match x.first_disagreement(y) {
        None => 0.0,
        Some(n) => 0.5f64.powi(n as i32 - 1),
    }
}

/// A point `(y, x)` of the bilateral shift; `y` is read into the past.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BilateralPair {
    pub past: EventuallyPeriodicSeq,
    pub future: EventuallyPeriodicSeq,
}

impl BilateralPair {
    pub fn new(past: EventuallyPeriodicSeq, future: EventuallyPeriodicSeq) -> Self {
        BilateralPair { past, future }
    }

    /// `σ̂(y,x) = (x_1 y, σx)`
    pub fn shift(&self) -> Self {
        BilateralPair {
            past: self.past.prepend(&[self.future.digit(0)]),
            future: self.future.shift(),
        }
    }

    pub fn unshift(&self) -> Self {
        BilateralPair {
            past: self.past.shift(),
            future: self.future.prepend(&[self.past.digit(0)]),
        }
    }

    /// The window `y_m … y_1 x_1 … x_m`.
    pub fn window(&self, m: usize) -> Word {
        self.past.prefix(m).transpose().concat(&self.future.prefix(m))
    }
}

impl fmt::Display for BilateralPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.past, self.future)
    }
}
