//! Statistical elite selection.
//!
//! Each iteration the tour lengths are reduced to a single boundary value
//! (mid-range, mean or median). Ants on the good side of the boundary form
//! the performing class and earn the second reinforcement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::colony::TourRecord;
use crate::error::{Error, Result};
use crate::tsplib::Length;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    /// Mid-range tour selection.
    Mrts,
    /// Mean tour selection.
    Mts,
    /// Median tour selection.
    Mets,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Mrts, ClassifierKind::Mts, ClassifierKind::Mets];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Mrts => "mrts",
            ClassifierKind::Mts => "mts",
            ClassifierKind::Mets => "mets",
        }
    }

    /// Suffix used in report labels (`DEAMR`, `DEAM`, `DEAMed`).
    pub fn label_suffix(self) -> &'static str {
        match self {
            ClassifierKind::Mrts => "MR",
            ClassifierKind::Mts => "M",
            ClassifierKind::Mets => "Med",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown classifier `{s}`")))
    }
}

/// How a tour sitting exactly on the boundary is classified.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// `length < threshold` is performing.
    #[default]
    Strict,
    /// `length <= threshold` is performing.
    Inclusive,
}

/// Which element the median statistic reports for an even sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MedianRule {
    /// The sorted element at 1-based position `n/2` (odd `n`: `ceil(n/2)`).
    #[default]
    Lower,
    /// Average of the two middle elements for even `n`.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub kind: ClassifierKind,
    pub value: f64,
}

fn non_empty(lengths: &[Length]) -> Result<()> {
    if lengths.is_empty() {
        Err(Error::Empty("tour lengths"))
    } else {
        Ok(())
    }
}

pub fn mid_range(lengths: &[Length]) -> Result<Threshold> {
    non_empty(lengths)?;
    let lo = *lengths.iter().min().unwrap();
    let hi = *lengths.iter().max().unwrap();
    Ok(Threshold {
        kind: ClassifierKind::Mrts,
        value: (lo as f64 + hi as f64) / 2.0,
    })
}

pub fn mean(lengths: &[Length]) -> Result<Threshold> {
    non_empty(lengths)?;
    // integer sum keeps the result exact up to the final division
    let sum: u128 = lengths.iter().map(|&l| l as u128).sum();
    Ok(Threshold {
        kind: ClassifierKind::Mts,
        value: sum as f64 / lengths.len() as f64,
    })
}

pub fn median(lengths: &[Length]) -> Result<Threshold> {
    median_with(lengths, MedianRule::Lower)
}

pub fn median_with(lengths: &[Length], rule: MedianRule) -> Result<Threshold> {
    non_empty(lengths)?;
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let value = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        match rule {
            MedianRule::Lower => sorted[n / 2 - 1] as f64,
            MedianRule::Average => (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0,
        }
    };
    Ok(Threshold {
        kind: ClassifierKind::Mets,
        value,
    })
}

pub fn threshold(kind: ClassifierKind, lengths: &[Length], rule: MedianRule) -> Result<Threshold> {
    match kind {
        ClassifierKind::Mrts => mid_range(lengths),
        ClassifierKind::Mts => mean(lengths),
        ClassifierKind::Mets => median_with(lengths, rule),
    }
}

/// Ant indices split into the performing and non-performing classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Partition {
    pub elite: Vec<usize>,
    pub non_elite: Vec<usize>,
}

impl Partition {
    pub fn elite_count(&self) -> usize {
        self.elite.len()
    }
}

/// Splits `tours` by `threshold` and writes the elite flags.
///
/// If nobody qualifies the iteration-best ant (lowest index on ties) is
/// promoted so the second reinforcement always has a recipient.
pub fn classify(tours: &mut [TourRecord], threshold: &Threshold, boundary: Boundary) -> Partition {
    let mut partition = Partition::default();
    for (k, tour) in tours.iter_mut().enumerate() {
        let l = tour.length as f64;
        tour.elite = match boundary {
            Boundary::Strict => l < threshold.value,
            Boundary::Inclusive => l <= threshold.value,
        };
        if tour.elite {
            partition.elite.push(k);
        } else {
            partition.non_elite.push(k);
        }
    }
    if partition.elite.is_empty() && !tours.is_empty() {
        let best = (0..tours.len())
            .min_by_key(|&k| (tours[k].length, k))
            .unwrap();
        tours[best].elite = true;
        partition.elite.push(best);
        partition.non_elite.retain(|&k| k != best);
    }
    partition
}
