//! Word-level prosody evaluation of synthetic speech against a reference
//! set of human recordings.
//!
//! The flow is: [`corpus`] loads manifests, alignments and audio; [`dsp`]
//! turns audio into per-word measurements; [`normalize`] z-scores them per
//! utterance; [`events`] marks prominent words; [`binary`] and
//! [`continuous`] score a candidate against the references; [`pipeline`]
//! runs all of it and [`report`] writes the results. [`perception`] covers
//! listening-test statistics.

pub mod binary;
pub mod continuous;
pub mod corpus;
pub mod dsp;
pub mod error;
pub mod events;
pub mod feature;
pub mod fixture;
pub mod normalize;
pub mod perception;
pub mod pipeline;
pub mod report;

pub use binary::BinaryScore;
pub use continuous::{ContinuousScore, ReferenceDistribution};
pub use corpus::{AlignedUtterance, AudioBuffer, Corpus, CorpusManifest, SpeakerKind};
pub use dsp::{AnalysisConfig, Signal, WordFeatureMatrix};
pub use error::{Error, Result};
pub use events::{DurationTier, EventConfig, EventSeries, PeakConfig};
pub use feature::{Column, Feature};
pub use normalize::{NormalizeConfig, NormalizedMatrix, StdKind};
pub use pipeline::{Aggregation, FeatureStore, Metric, PipelineConfig, TierReport};
pub use report::{EvaluationReport, ReportKind};
