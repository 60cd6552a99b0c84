//! Report documents and their CSV and text projections.
//!
//! JSON is the full record; `report.csv` and `radar.csv` are flat views of
//! it. Null metrics become empty CSV cells.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::binary::minmax_normalize_opt;
use crate::error::Result;
use crate::feature::Feature;
use crate::perception::{BtmResult, MosSummary, WinMatrix};
use crate::pipeline::{ComparisonRow, PipelineConfig, TierReport};

pub const REPORT_CSV_HEADER: [&str; 8] = [
    "speaker",
    "feature",
    "zero_one_loss",
    "smoothed_loss",
    "recall",
    "precision",
    "f1",
    "error",
];

pub const RADAR_CSV_HEADER: [&str; 5] = ["feature", "speaker", "f1", "f1_minmax", "one_minus_error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Evaluation,
    SelfValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub kind: ReportKind,
    pub config: PipelineConfig,
    pub reports: Vec<TierReport>,
}

impl EvaluationReport {
    pub fn new(kind: ReportKind, config: &PipelineConfig, reports: Vec<TierReport>) -> Self {
        let mut config = config.clone();
        config.jobs = None;
        Self { kind, config, reports }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Reports grouped by feature in canonical feature order, speakers in
    /// their original order.
    pub fn by_feature(&self) -> Vec<(Feature, Vec<&TierReport>)> {
        Feature::ALL
            .into_iter()
            .map(|f| (f, self.reports.iter().filter(|r| r.feature == f).collect::<Vec<_>>()))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_CSV_HEADER)?;
        for (f, reports) in self.by_feature() {
            for r in reports {
                let row = [r.zero_one_loss, r.smoothed_loss, r.recall, r.precision, r.f1, r.normalized_error];
                let mut rec = vec![r.speaker_id.clone(), f.name().to_string()];
                rec.extend(row.iter().map(|v| cell(*v)));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| crate::Error::io("report.csv", e))?;
        Ok(())
    }

    pub fn write_radar_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RADAR_CSV_HEADER)?;
        for (f, reports) in self.by_feature() {
            let f1: Vec<Option<f64>> = reports.iter().map(|r| r.f1).collect();
            let scaled = minmax_normalize_opt(&f1);
            for (r, s) in reports.iter().zip(scaled) {
                let complement = r.normalized_error.map(|e| (1.0 - e).clamp(0.0, 1.0));
                w.write_record([
                    f.name().to_string(),
                    r.speaker_id.clone(),
                    cell(r.f1),
                    cell(s),
                    cell(complement),
                ])?;
            }
        }
        w.flush().map_err(|e| crate::Error::io("radar.csv", e))?;
        Ok(())
    }

    /// Fixed-width text table, one block per feature, three decimals.
    pub fn to_table(&self) -> String {
        let width = self
            .reports
            .iter()
            .map(|r| r.speaker_id.chars().count())
            .max()
            .unwrap_or(7)
            .max(7);
        let mut s = String::new();
        for (f, reports) in self.by_feature() {
            let _ = writeln!(s, "{}", f.label());
            let _ = writeln!(
                s,
                "  {:<width$} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
                "speaker", "l0/1", "l*", "Rec.", "Prec.", "F1", "Err."
            );
            for r in reports {
                let _ = write!(s, "  {:<width$}", r.speaker_id);
                for v in [r.zero_one_loss, r.smoothed_loss, r.recall, r.precision, r.f1, r.normalized_error] {
                    let _ = write!(s, " {:>7}", v.map_or("-".to_string(), |v| format!("{v:.3}")));
                }
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

/// Text rendering of t-test rows, e.g. `Duration l*: t=8.521, p=1.13e-16, Winner Human`.
pub fn comparison_lines(rows: &[ComparisonRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let _ = write!(s, "{} {}: ", r.feature.label(), r.metric.symbol());
        match r.test {
            Some(t) => {
                let _ = write!(s, "t={:.3}, p={:.3e}, Winner {}", t.t, t.p, r.winner);
            }
            None => {
                let _ = write!(s, "t=-, p=-, Winner {}", r.winner);
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumannessRow {
    pub speaker: String,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosRow {
    pub speaker: String,
    #[serde(flatten)]
    pub summary: MosSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtmRow {
    pub speaker: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtmTable {
    pub scores: Vec<BtmRow>,
    pub converged: bool,
    pub iterations: usize,
}

/// Humanness proportions, highest first.
pub fn humanness_table(props: &BTreeMap<String, f64>) -> Vec<HumannessRow> {
    let mut rows: Vec<HumannessRow> = props
        .iter()
        .map(|(k, v)| HumannessRow {
            speaker: k.clone(),
            proportion: *v,
        })
        .collect();
    rows.sort_by(|a, b| b.proportion.total_cmp(&a.proportion).then(a.speaker.cmp(&b.speaker)));
    rows
}

/// MOS summaries, highest mean first.
pub fn mos_table(summary: &BTreeMap<String, MosSummary>) -> Vec<MosRow> {
    let mut rows: Vec<MosRow> = summary
        .iter()
        .map(|(k, v)| MosRow {
            speaker: k.clone(),
            summary: *v,
        })
        .collect();
    rows.sort_by(|a, b| b.summary.mean.total_cmp(&a.summary.mean).then(a.speaker.cmp(&b.speaker)));
    rows
}

pub fn btm_table(result: &BtmResult) -> BtmTable {
    BtmTable {
        scores: result
            .ranking()
            .into_iter()
            .map(|(s, v)| BtmRow {
                speaker: s.to_string(),
                score: v,
            })
            .collect(),
        converged: result.converged,
        iterations: result.iterations,
    }
}

/// `OpenAI 3.55 ±0.05` style lines.
pub fn mos_lines(rows: &[MosRow]) -> String {
    rows.iter()
        .map(|r| match r.summary.stderr {
            Some(se) => format!("{} {:.2} ±{:.2}\n", r.speaker, r.summary.mean, se),
            None => format!("{} {:.2}\n", r.speaker, r.summary.mean),
        })
        .collect()
}

pub fn humanness_lines(rows: &[HumannessRow]) -> String {
    rows.iter().map(|r| format!("{} {:.3}\n", r.speaker, r.proportion)).collect()
}

pub fn btm_lines(table: &BtmTable) -> String {
    table.scores.iter().map(|r| format!("{} {:.3}\n", r.speaker, r.score)).collect()
}

/// Serializable form of a [`WinMatrix`] keyed by speaker names.
pub fn win_matrix_json(w: &WinMatrix) -> serde_json::Value {
    let mut rows = serde_json::Map::new();
    for (i, a) in w.speakers.iter().enumerate() {
        let mut row = serde_json::Map::new();
        for (j, b) in w.speakers.iter().enumerate() {
            if i != j {
                row.insert(b.clone(), serde_json::json!(w.proportion[i][j]));
            }
        }
        rows.insert(a.clone(), serde_json::Value::Object(row));
    }
    serde_json::json!({ "speakers": w.speakers, "proportion": rows, "comparisons": w.comparisons })
}
