//! Brute-force periodic-orbit oracle for the maximizing value.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::beta::{BetaSpec, Language};
use crate::error::{Error, Result};
use crate::symbolic::{Digit, EventuallyPeriodicSeq, Word};
use crate::transfer::{CylinderMeasure, Potential};

pub const TIE_TOL: f64 = 1e-12;
pub const DEFAULT_CYCLE_CAP: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    /// Primitive cycle in its lexicographically least rotation.
    pub word: Word,
    pub period: usize,
    pub birkhoff_mean: f64,
}

/// Lyndon words of length ≤ `n` over `0..=top`, in lexicographic order.
pub fn lyndon_words(top: Digit, n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut w: Vec<Digit> = vec![0];
    loop {
        out.push(Word::new(w.clone()));
        let m = w.len();
        while w.len() < n {
            let c = w[w.len() - m];
            w.push(c);
        }
        while w.last() == Some(&top) {
            w.pop();
        }
        match w.last_mut() {
            None => break,
            Some(last) => *last += 1,
        }
    }
    out
}

/// Whether `(w)^∞` and all its rotations lie in the β-shift.
pub fn is_admissible_cycle(spec: &BetaSpec, w: &Word) -> Result<bool> {
    spec.is_admissible_sequence(&EventuallyPeriodicSeq::periodic(w.digits().to_vec())?)
}

pub fn enumerate_cycles(p_max: usize, spec: &BetaSpec) -> Result<Vec<Word>> {
    let q = spec.alphabet_top() as f64 + 1.0;
    if q.powi(p_max as i32) / p_max.max(1) as f64 > DEFAULT_CYCLE_CAP as f64 {
        return Err(Error::LanguageCap {
            depth: p_max,
            cap: DEFAULT_CYCLE_CAP,
        });
    }
    let words = lyndon_words(spec.alphabet_top(), p_max);
    let keep = words
        .par_iter()
        .map(|w| is_admissible_cycle(spec, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(words
        .into_iter()
        .zip(keep)
        .filter_map(|(w, k)| k.then_some(w))
        .collect())
}

/// Mean of `A` along one period of `(w)^∞`.
pub fn birkhoff_average(a: &Potential, w: &Word) -> Result<f64> {
    let p = w.len();
    let d = a.depth();
    let seq = w.repeat(1 + d.div_ceil(p).max(1));
    let mut sum = 0.0;
    for j in 0..p {
        sum += a.eval(&seq.digits()[j..j + d])?;
    }
    Ok(sum / p as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub m: f64,
    pub argmax: Vec<PeriodicOrbit>,
    pub unique: bool,
    pub cycles_examined: usize,
}

pub fn max_orbit_mean(a: &Potential, p_max: usize, spec: &BetaSpec) -> Result<OracleResult> {
    let cycles = enumerate_cycles(p_max, spec)?;
    let orbits = cycles
        .into_iter()
        .map(|w| {
            Ok(PeriodicOrbit {
                period: w.len(),
                birkhoff_mean: birkhoff_average(a, &w)?,
                word: w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = orbits
        .iter()
        .map(|o| o.birkhoff_mean)
        .fold(f64::NEG_INFINITY, f64::max);
    let argmax: Vec<PeriodicOrbit> = orbits
        .iter()
        .filter(|o| o.birkhoff_mean >= m - TIE_TOL)
        .cloned()
        .collect();
    Ok(OracleResult {
        m,
        unique: argmax.len() == 1,
        argmax,
        cycles_examined: orbits.len(),
    })
}

/// Frequencies of the depth-k factors along one period of `(w)^∞`.
pub fn empirical_orbit_measure(w: &Word, language: &Arc<Language>) -> Result<CylinderMeasure> {
    let k = language.depth();
    let p = w.len();
    let seq = w.repeat(1 + k.div_ceil(p).max(1));
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for j in 0..p {
        let f = &seq.digits()[j..j + k];
        let i = language
            .index_of(f)
            .ok_or_else(|| Error::Inadmissible(Word::from(f)))?;
        *counts.entry(i).or_default() += 1.0 / p as f64;
    }
    let mut masses = vec![0.0; language.len()];
    for (i, c) in counts {
        masses[i] = c;
    }
    Ok(CylinderMeasure {
        language: language.clone(),
        masses,
    })
}
