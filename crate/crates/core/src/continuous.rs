//! Normalized error of a continuous word-level signal against the spread of
//! the reference speakers at each word.

use serde::{Deserialize, Serialize};

use crate::dsp::Signal;
use crate::error::{Error, Result};
use crate::normalize::{StdKind, MIN_SPREAD};

/// Per-word statistics of the reference speakers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub count: Vec<usize>,
}

impl ReferenceDistribution {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// A word is scorable with at least two valid references and non-zero spread.
    pub fn scorable(&self, i: usize) -> bool {
        self.count[i] >= 2 && self.std[i] >= MIN_SPREAD
    }

    pub fn n_scorable(&self) -> usize {
        (0..self.len()).filter(|&i| self.scorable(i)).count()
    }
}

pub fn build_reference<S: AsRef<Signal>>(signals: &[S], std: StdKind) -> Result<ReferenceDistribution> {
    if signals.len() < 2 {
        return Err(Error::Precondition(format!(
            "a reference distribution needs at least 2 speakers, got {}",
            signals.len()
        )));
    }
    let n = signals[0].as_ref().len();
    for s in signals {
        if s.as_ref().len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: s.as_ref().len(),
            });
        }
    }
    let mut dist = ReferenceDistribution {
        mean: Vec::with_capacity(n),
        std: Vec::with_capacity(n),
        count: Vec::with_capacity(n),
    };
    let mut column = Vec::with_capacity(signals.len());
    for i in 0..n {
        column.clear();
        column.extend(
            signals
                .iter()
                .map(AsRef::as_ref)
                .filter(|s| s.valid[i])
                .map(|s| s.values[i]),
        );
        let (m, sd) = if column.len() >= 2 {
            std.mean_std(&column).unwrap_or((0.0, 0.0))
        } else {
            (column.first().copied().unwrap_or(0.0), 0.0)
        };
        dist.mean.push(m);
        dist.std.push(sd);
        dist.count.push(column.len());
    }
    Ok(dist)
}

/// Result of scoring one candidate signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousScore {
    /// `None` when no word could be scored.
    pub error: Option<f64>,
    pub n_scored: usize,
}

/// Mean squared z-score of the candidate over words that are both valid in
/// the candidate and scorable in the reference.
pub fn normalized_error(p: &Signal, reference: &ReferenceDistribution) -> Result<ContinuousScore> {
    if p.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            found: p.len(),
        });
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..p.len() {
        if p.valid[i] && reference.scorable(i) {
            let z = (p.values[i] - reference.mean[i]) / reference.std[i];
            sum += z * z;
            n += 1;
        }
    }
    Ok(ContinuousScore {
        error: (n > 0).then(|| sum / n as f64),
        n_scored: n,
    })
}
