//! Listening-test statistics: MOS, humanness judgements, pairwise
//! preferences and significance tests.

mod btm;
mod special;
mod welch;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

pub use btm::{fit_btm, fit_btm_counts, log_likelihood, BtmResult, WinCounts, DEFAULT_MAX_ITER, DEFAULT_TOL, SCORE_CLAMP};
pub use special::{inc_beta, ln_gamma, student_t_two_sided};
pub use welch::{welch_t_test, WelchResult};

use crate::error::{Error, Result};

pub const RATINGS_HEADER: [&str; 5] = ["listener", "speaker", "sentence", "mos", "judged_human"];
pub const PAIRS_HEADER: [&str; 5] = ["listener", "sentence", "speaker_a", "speaker_b", "winner"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub listener_id: String,
    pub speaker_id: String,
    pub sentence_id: String,
    pub mos: u8,
    pub judged_human: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseRecord {
    pub listener_id: String,
    pub sentence_id: String,
    pub speaker_a: String,
    pub speaker_b: String,
    pub winner: String,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

fn check_header(what: &'static str, r: &mut csv::Reader<impl Read>, want: &[&str]) -> Result<()> {
    let got: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if got != want {
        return Err(Error::Parse {
            what,
            line: 1,
            column: 1,
            message: format!("expected header `{}`, found `{}`", want.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn rows<R: Read>(
    what: &'static str,
    input: R,
    header: &[&str],
    mut each: impl FnMut(&csv::StringRecord, &dyn Fn(usize, String) -> Error) -> Result<()>,
) -> Result<()> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(what, &mut r, header)?;
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                what,
                line,
                column: 1,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let err = |column: usize, message: String| Error::Parse {
            what,
            line,
            column,
            message,
        };
        for (c, field) in rec.iter().enumerate() {
            if field.is_empty() {
                return Err(err(c + 1, format!("empty `{}`", header[c])));
            }
        }
        each(&rec, &err)?;
    }
    Ok(())
}

/// Reads `listener,speaker,sentence,mos,judged_human` rows.
pub fn parse_ratings<R: Read>(input: R) -> Result<Vec<RatingRecord>> {
    let mut out = Vec::new();
    rows("ratings", input, &RATINGS_HEADER, |rec, err| {
        let mos = match rec[3].parse::<u8>() {
            Ok(v @ 1..=5) => v,
            _ => return Err(err(4, format!("mos must be an integer 1-5, got `{}`", &rec[3]))),
        };
        let judged_human =
            parse_bool(&rec[4]).ok_or_else(|| err(5, format!("judged_human must be a boolean, got `{}`", &rec[4])))?;
        out.push(RatingRecord {
            listener_id: rec[0].to_string(),
            speaker_id: rec[1].to_string(),
            sentence_id: rec[2].to_string(),
            mos,
            judged_human,
        });
        Ok(())
    })?;
    Ok(out)
}

/// Reads `listener,sentence,speaker_a,speaker_b,winner` rows.
pub fn parse_pairs<R: Read>(input: R) -> Result<Vec<PairwiseRecord>> {
    let mut out = Vec::new();
    rows("pairs", input, &PAIRS_HEADER, |rec, err| {
        if rec[2] == rec[3] {
            return Err(err(4, format!("speaker compared with itself: `{}`", &rec[2])));
        }
        if rec[4] != rec[2] && rec[4] != rec[3] {
            return Err(err(5, format!("winner `{}` is neither `{}` nor `{}`", &rec[4], &rec[2], &rec[3])));
        }
        out.push(PairwiseRecord {
            listener_id: rec[0].to_string(),
            sentence_id: rec[1].to_string(),
            speaker_a: rec[2].to_string(),
            speaker_b: rec[3].to_string(),
            winner: rec[4].to_string(),
        });
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MosSummary {
    pub mean: f64,
    /// Sample standard deviation over root n; `None` for a single rating.
    pub stderr: Option<f64>,
    pub n: usize,
}

pub fn mos_summary(records: &[RatingRecord]) -> Result<BTreeMap<String, MosSummary>> {
    if records.is_empty() {
        return Err(Error::Precondition("no ratings to summarise".into()));
    }
    let mut by_speaker: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_speaker.entry(r.speaker_id.clone()).or_default().push(r.mos as f64);
    }
    Ok(by_speaker
        .into_iter()
        .map(|(k, mut v)| {
            // Sorting makes the floating-point sums independent of record order.
            v.sort_by(f64::total_cmp);
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let stderr = (n >= 2).then(|| {
                let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            });
            (k, MosSummary { mean, stderr, n })
        })
        .collect())
}

pub fn humanness_proportion(records: &[RatingRecord]) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = counts.entry(r.speaker_id.clone()).or_default();
        e.0 += r.judged_human as usize;
        e.1 += 1;
    }
    counts
        .into_iter()
        .map(|(k, (yes, n))| (k, yes as f64 / n as f64))
        .collect()
}

/// Directed preference proportions between every pair of speakers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinMatrix {
    pub speakers: Vec<String>,
    /// `proportion[a][b]`: share of a-b comparisons won by `a`; `None` on
    /// the diagonal and for pairs never compared.
    pub proportion: Vec<Vec<Option<f64>>>,
    pub comparisons: Vec<Vec<usize>>,
}

impl WinMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.speakers.iter().position(|s| s == a)?;
        let j = self.speakers.iter().position(|s| s == b)?;
        self.proportion[i][j]
    }
}

pub fn win_matrix(records: &[PairwiseRecord]) -> WinMatrix {
    let counts = WinCounts::from_records(records);
    let n = counts.speakers.len();
    let mut proportion = vec![vec![None; n]; n];
    let mut comparisons = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let games = counts.wins[i][j] + counts.wins[j][i];
            comparisons[i][j] = games as usize;
            if i != j && games > 0.0 {
                proportion[i][j] = Some(counts.wins[i][j] / games);
            }
        }
    }
    WinMatrix {
        speakers: counts.speakers,
        proportion,
        comparisons,
    }
}

/// Speakers named in the records, sorted.
pub fn rated_speakers(records: &[RatingRecord]) -> BTreeSet<&str> {
    records.iter().map(|r| r.speaker_id.as_str()).collect()
}
