//! Event-placement scoring against a set of reference speakers.
//!
//! For word `i` the agreement `alpha_i` is the fraction of references whose
//! event decision equals the candidate's. The candidate is correct at `i`
//! when `alpha_i >= c`. Losses, precision, recall and F1 all derive from
//! that rule; the smoothed loss replaces the hard indicator with
//! `exp(-(4 pi alpha)^2)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-word agreement between a candidate and `m` references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementVector {
    pub alpha: Vec<f64>,
    pub m: usize,
}

/// Metrics for one candidate series. Precision, recall and F1 are `None`
/// when their denominators vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryScore {
    pub zero_one_loss: f64,
    pub smoothed_loss: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub threshold: f64,
}

fn check_threshold(c: f64) -> Result<()> {
    if c > 0.0 && c <= 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("threshold c must lie in (0, 1], got {c}")))
    }
}

fn check_lengths<S: AsRef<[bool]>>(p: &[bool], refs: &[S]) -> Result<()> {
    if refs.is_empty() {
        return Err(Error::Precondition("at least one reference series is required".into()));
    }
    for s in refs {
        if s.as_ref().len() != p.len() {
            return Err(Error::LengthMismatch {
                expected: p.len(),
                found: s.as_ref().len(),
            });
        }
    }
    Ok(())
}

pub fn agreement<S: AsRef<[bool]>>(p: &[bool], refs: &[S]) -> Result<AgreementVector> {
    check_lengths(p, refs)?;
    let m = refs.len();
    let alpha = p
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            let agree = refs.iter().filter(|s| s.as_ref()[i] == pi).count();
            agree as f64 / m as f64
        })
        .collect();
    Ok(AgreementVector { alpha, m })
}

/// Smoothed correctness, 1 at zero agreement and decaying rapidly.
pub fn epsilon(alpha: f64) -> f64 {
    (-(4.0 * PI * alpha).powi(2)).exp()
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

pub fn zero_one_loss(alpha: &AgreementVector, c: f64) -> f64 {
    mean(
        alpha.alpha.iter().map(|&a| if a < c { 1.0 } else { 0.0 }),
        alpha.alpha.len(),
    )
}

pub fn smoothed_loss(alpha: &AgreementVector) -> f64 {
    mean(alpha.alpha.iter().map(|&a| epsilon(a)), alpha.alpha.len())
}

/// Precision, recall and F1, as `(precision, recall, f1)`.
pub fn precision_recall_f1<S: AsRef<[bool]>>(
    p: &[bool],
    refs: &[S],
    c: f64,
) -> Result<(Option<f64>, Option<f64>, Option<f64>)> {
    check_threshold(c)?;
    let alpha = agreement(p, refs)?;
    Ok(prf_from_alpha(p, refs, &alpha, c))
}

fn prf_from_alpha<S: AsRef<[bool]>>(
    p: &[bool],
    refs: &[S],
    alpha: &AgreementVector,
    c: f64,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let m = refs.len() as f64;
    let mut predicted = 0usize;
    let mut hits = 0usize;
    let mut majority = 0usize;
    for (i, &pi) in p.iter().enumerate() {
        if pi {
            predicted += 1;
            if alpha.alpha[i] >= c {
                hits += 1;
            }
        }
        let share = refs.iter().filter(|s| s.as_ref()[i]).count() as f64 / m;
        if share >= c {
            majority += 1;
        }
    }
    let precision = (predicted > 0).then(|| hits as f64 / predicted as f64);
    let recall = (majority > 0).then(|| hits as f64 / majority as f64);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    (precision, recall, f1)
}

/// All binary metrics for one candidate series.
pub fn binary_score<S: AsRef<[bool]>>(p: &[bool], refs: &[S], c: f64) -> Result<BinaryScore> {
    check_threshold(c)?;
    let alpha = agreement(p, refs)?;
    let (precision, recall, f1) = prf_from_alpha(p, refs, &alpha, c);
    Ok(BinaryScore {
        zero_one_loss: zero_one_loss(&alpha, c),
        smoothed_loss: smoothed_loss(&alpha),
        precision,
        recall,
        f1,
        threshold: c,
    })
}

/// Min-max scaling across speakers; a degenerate range maps everything to 0.5.
pub fn minmax_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
        .collect()
}

/// [`minmax_normalize`] over the defined entries; `None` stays `None`.
pub fn minmax_normalize_opt(values: &[Option<f64>]) -> Vec<Option<f64>> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    let mut scaled = minmax_normalize(&defined).into_iter();
    values.iter().map(|v| v.and_then(|_| scaled.next())).collect()
}
