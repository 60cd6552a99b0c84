//! Bradley-Terry strengths fitted by minorization-maximization.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::PairwiseRecord;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Bound applied to log-strengths when the likelihood has no finite maximum.
pub const SCORE_CLAMP: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtmResult {
    /// Log-strengths summing to zero.
    pub scores: BTreeMap<String, f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl BtmResult {
    /// Speakers ordered from strongest to weakest.
    pub fn ranking(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.scores.iter().map(|(k, s)| (k.as_str(), *s)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }
}

/// Pairwise win counts: `wins[i][j]` is how often `speakers[i]` beat `speakers[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WinCounts {
    pub speakers: Vec<String>,
    pub wins: Vec<Vec<f64>>,
}

impl WinCounts {
    pub fn from_records(records: &[PairwiseRecord]) -> Self {
        let speakers: Vec<String> = records
            .iter()
            .flat_map(|r| [r.speaker_a.clone(), r.speaker_b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&str, usize> = speakers.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let n = speakers.len();
        let mut wins = vec![vec![0.0; n]; n];
        for r in records {
            let loser = if r.winner == r.speaker_a { &r.speaker_b } else { &r.speaker_a };
            wins[index[r.winner.as_str()]][index[loser.as_str()]] += 1.0;
        }
        Self { speakers, wins }
    }

    fn games(&self, i: usize, j: usize) -> f64 {
        self.wins[i][j] + self.wins[j][i]
    }

    /// Connected components of the undirected comparison graph.
    pub fn components(&self) -> Vec<Vec<String>> {
        let n = self.speakers.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(i) = queue.pop_front() {
                comp.push(self.speakers[i].clone());
                for j in 0..n {
                    if !seen[j] && self.games(i, j) > 0.0 {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    fn reaches_all(&self, forward: bool) -> bool {
        let n = self.speakers.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let edge = if forward { self.wins[i][j] } else { self.wins[j][i] };
                if !seen[j] && edge > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// A finite maximum-likelihood estimate exists iff every speaker can be
    /// reached from every other through chains of wins.
    pub fn strongly_connected(&self) -> bool {
        self.speakers.is_empty() || (self.reaches_all(true) && self.reaches_all(false))
    }
}

pub fn fit_btm(records: &[PairwiseRecord], tol: f64, max_iter: usize) -> Result<BtmResult> {
    fit_btm_counts(&WinCounts::from_records(records), tol, max_iter)
}

pub fn fit_btm_counts(counts: &WinCounts, tol: f64, max_iter: usize) -> Result<BtmResult> {
    let n = counts.speakers.len();
    if n == 0 {
        return Err(Error::Precondition("no pairwise comparisons to fit".into()));
    }
    let components = counts.components();
    if components.len() > 1 {
        return Err(Error::Disconnected(components));
    }
    let finite = counts.strongly_connected();
    let total_wins: Vec<f64> = counts.wins.iter().map(|row| row.iter().sum()).collect();

    // Iterate on log-strengths, recentred every step. Without a finite
    // optimum some strengths drift towards 0 or infinity; the inner bound
    // keeps the arithmetic finite until the final clamp.
    const INNER_BOUND: f64 = 50.0;
    let mut log_s = vec![0.0f64; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let s: Vec<f64> = log_s.iter().map(|l| l.exp()).collect();
        let mut next = vec![0.0; n];
        for i in 0..n {
            let denom: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let g = counts.games(i, j);
                    if g > 0.0 {
                        g / (s[i] + s[j])
                    } else {
                        0.0
                    }
                })
                .sum();
            next[i] = if total_wins[i] > 0.0 {
                (total_wins[i] / denom).ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        let finite_mean = next.iter().filter(|l| l.is_finite()).sum::<f64>()
            / next.iter().filter(|l| l.is_finite()).count().max(1) as f64;
        for l in next.iter_mut() {
            *l = (*l - finite_mean).clamp(-INNER_BOUND, INNER_BOUND);
        }
        let centre = next.iter().sum::<f64>() / n as f64;
        next.iter_mut().for_each(|l| *l -= centre);
        let delta = next.iter().zip(&log_s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        log_s = next;
        if delta < tol {
            converged = finite;
            break;
        }
    }
    if !finite {
        for l in log_s.iter_mut() {
            *l = l.clamp(-SCORE_CLAMP, SCORE_CLAMP);
        }
        let centre = log_s.iter().sum::<f64>() / n as f64;
        log_s.iter_mut().for_each(|l| *l -= centre);
    }
    Ok(BtmResult {
        scores: counts.speakers.iter().cloned().zip(log_s).collect(),
        converged,
        iterations,
    })
}

/// Log-likelihood of log-strengths under the given counts.
pub fn log_likelihood(counts: &WinCounts, log_s: &[f64]) -> f64 {
    let n = counts.speakers.len();
    let mut ll = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = counts.wins[i][j];
            if w > 0.0 {
                let d = log_s[j] - log_s[i];
                // -ln(1 + e^d), stable for large |d|
                ll -= w * if d > 0.0 { d + (-d).exp().ln_1p() } else { d.exp().ln_1p() };
            }
        }
    }
    ll
}
