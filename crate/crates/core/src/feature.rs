//! Feature and column registries.
//!
//! A [`Column`] is one measured quantity stored per word in a
//! [`WordFeatureMatrix`](crate::dsp::WordFeatureMatrix). A [`Feature`] is one
//! evaluated prosodic dimension; each maps onto the column that supplies its
//! continuous signal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    DurationMs,
    PauseMs,
    F0Hz,
    IntensityDb,
    AlphaRatioDb,
    L1L0Db,
    CppsDb,
}

impl Column {
    /// Storage order, which is also the order of the `valid_flags` bitstring.
    pub const ALL: [Column; 7] = [
        Column::DurationMs,
        Column::PauseMs,
        Column::F0Hz,
        Column::IntensityDb,
        Column::AlphaRatioDb,
        Column::L1L0Db,
        Column::CppsDb,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn header(self) -> &'static str {
        match self {
            Column::DurationMs => "duration_ms",
            Column::PauseMs => "pause_ms",
            Column::F0Hz => "f0_hz",
            Column::IntensityDb => "intensity_db",
            Column::AlphaRatioDb => "alpha_ratio_db",
            Column::L1L0Db => "l1_l0_db",
            Column::CppsDb => "cpps_db",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Duration,
    Pitch,
    Intensity,
    AlphaRatio,
    L1L0,
    Cpps,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::Duration,
        Feature::Pitch,
        Feature::Intensity,
        Feature::AlphaRatio,
        Feature::L1L0,
        Feature::Cpps,
    ];

    /// Column carrying the continuous signal for this feature.
    pub fn column(self) -> Column {
        match self {
            Feature::Duration => Column::DurationMs,
            Feature::Pitch => Column::F0Hz,
            Feature::Intensity => Column::IntensityDb,
            Feature::AlphaRatio => Column::AlphaRatioDb,
            Feature::L1L0 => Column::L1L0Db,
            Feature::Cpps => Column::CppsDb,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Duration => "duration",
            Feature::Pitch => "pitch",
            Feature::Intensity => "intensity",
            Feature::AlphaRatio => "alpha_ratio",
            Feature::L1L0 => "l1_l0",
            Feature::Cpps => "cpps",
        }
    }

    /// Human-readable label used in printed tables.
    pub fn label(self) -> &'static str {
        match self {
            Feature::Duration => "Duration",
            Feature::Pitch => "Pitch",
            Feature::Intensity => "Intensity",
            Feature::AlphaRatio => "Alpha ratio",
            Feature::L1L0 => "L1-L0",
            Feature::Cpps => "CPPS",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match key.as_str() {
            "duration" => Feature::Duration,
            "pitch" | "f0" => Feature::Pitch,
            "intensity" => Feature::Intensity,
            "alpha_ratio" | "alpha" => Feature::AlphaRatio,
            "l1_l0" | "l1l0" => Feature::L1L0,
            "cpps" => Feature::Cpps,
            _ => return Err(format!("unknown feature `{s}`")),
        })
    }
}
