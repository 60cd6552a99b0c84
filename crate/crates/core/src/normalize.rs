//! Per-speaker, per-sentence z-scoring of word-level feature columns.

use serde::{Deserialize, Serialize};

use crate::dsp::{Signal, WordFeatureMatrix};
use crate::feature::Column;

/// Spread below this is treated as zero.
pub const MIN_SPREAD: f64 = 1e-9;

/// Which standard deviation to divide by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdKind {
    /// Divide by the count.
    #[default]
    Population,
    /// Divide by count - 1.
    Sample,
}

impl StdKind {
    /// Mean and standard deviation of `values`; `None` when the sample form
    /// is requested for fewer than two values or `values` is empty.
    pub fn mean_std(self, values: &[f64]) -> Option<(f64, f64)> {
        let n = values.len();
        let dof = match self {
            StdKind::Population => n,
            StdKind::Sample => n.checked_sub(1)?,
        };
        if n == 0 || dof == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        Some((mean, (ss / dof as f64).sqrt()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizeConfig {
    pub std: StdKind,
    /// Columns passed through unchanged.
    pub skip: Vec<Column>,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            std: StdKind::Population,
            skip: Vec::new(),
        }
    }
}

/// A [`WordFeatureMatrix`] whose columns have been z-scored within the
/// utterance. Validity masks are inherited unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMatrix(pub WordFeatureMatrix);

impl NormalizedMatrix {
    pub fn column(&self, c: Column) -> &Signal {
        self.0.column(c)
    }

    pub fn n_words(&self) -> usize {
        self.0.n_words()
    }

    pub fn into_inner(self) -> WordFeatureMatrix {
        self.0
    }
}

/// z-scores one signal over its valid entries.
///
/// With fewer than two valid entries or a spread below [`MIN_SPREAD`] every
/// entry becomes 0. Masked entries are set to 0 and never enter the
/// statistics.
pub fn znorm_signal(signal: &Signal, std: StdKind) -> Signal {
    let valid: Vec<f64> = signal.valid_values().collect();
    let stats = if valid.len() >= 2 {
        std.mean_std(&valid).filter(|(_, s)| *s >= MIN_SPREAD)
    } else {
        None
    };
    let values = signal
        .values
        .iter()
        .zip(&signal.valid)
        .map(|(x, ok)| match (ok, stats) {
            (true, Some((m, s))) => (x - m) / s,
            _ => 0.0,
        })
        .collect();
    Signal {
        values,
        valid: signal.valid.clone(),
    }
}

pub fn znorm(matrix: &WordFeatureMatrix, cfg: &NormalizeConfig) -> NormalizedMatrix {
    let mut out = matrix.clone();
    for c in Column::ALL {
        if !cfg.skip.contains(&c) {
            *out.column_mut(c) = znorm_signal(matrix.column(c), cfg.std);
        }
    }
    NormalizedMatrix(out)
}
