//! Split statistics and the reference counts of the two Twitter benchmarks.

use std::collections::HashSet;

use serde::Serialize;

use super::clean::normalize_noise;
use super::sample::{DatasetSplit, SplitName, TARGET_PLACEHOLDER};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitStats {
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
    pub total: usize,
    /// Distinct tweets (after filling the placeholder) per split.
    pub sentences: usize,
    pub targets_per_sentence: f64,
    /// Mean whitespace-token length of the filled tweets.
    pub mean_length: f64,
}

pub fn split_stats(split: &DatasetSplit) -> SplitStats {
    let [negative, neutral, positive] = split.class_counts();
    let mut sentences = HashSet::new();
    let mut length_sum = 0usize;
    for s in &split.samples {
        let filled = normalize_noise(&s.tweet.replace(TARGET_PLACEHOLDER, &s.target));
        length_sum += filled.split_whitespace().count();
        sentences.insert((s.image_id.clone(), filled));
    }
    let total = split.len();
    SplitStats {
        positive,
        neutral,
        negative,
        total,
        sentences: sentences.len(),
        targets_per_sentence: if sentences.is_empty() {
            0.0
        } else {
            total as f64 / sentences.len() as f64
        },
        mean_length: if total == 0 {
            0.0
        } else {
            length_sum as f64 / total as f64
        },
    }
}

/// Published label counts of one benchmark split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceCounts {
    pub benchmark: &'static str,
    pub split: SplitName,
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
    pub total: usize,
    pub sentences: usize,
}

pub const REFERENCE_COUNTS: [ReferenceCounts; 6] = [
    ReferenceCounts {
        benchmark: "twitter2015",
        split: SplitName::Train,
        positive: 928,
        neutral: 1883,
        negative: 368,
        total: 3179,
        sentences: 2101,
    },
    ReferenceCounts {
        benchmark: "twitter2015",
        split: SplitName::Dev,
        positive: 303,
        neutral: 670,
        negative: 149,
        total: 1122,
        sentences: 727,
    },
    ReferenceCounts {
        benchmark: "twitter2015",
        split: SplitName::Test,
        positive: 317,
        neutral: 607,
        negative: 113,
        total: 1037,
        sentences: 674,
    },
    ReferenceCounts {
        benchmark: "twitter2017",
        split: SplitName::Train,
        positive: 1508,
        neutral: 1638,
        negative: 416,
        total: 3562,
        sentences: 1746,
    },
    ReferenceCounts {
        benchmark: "twitter2017",
        split: SplitName::Dev,
        positive: 515,
        neutral: 517,
        negative: 144,
        total: 1176,
        sentences: 577,
    },
    ReferenceCounts {
        benchmark: "twitter2017",
        split: SplitName::Test,
        positive: 493,
        neutral: 573,
        negative: 168,
        total: 1234,
        sentences: 587,
    },
];

pub fn reference_counts(benchmark: &str, split: SplitName) -> Option<ReferenceCounts> {
    REFERENCE_COUNTS
        .iter()
        .copied()
        .find(|r| r.benchmark == benchmark && r.split == split)
}

impl ReferenceCounts {
    /// Label-count mismatches between `stats` and the published numbers.
    pub fn mismatches(&self, stats: &SplitStats) -> Vec<String> {
        let mut out = Vec::new();
        for (name, want, got) in [
            ("positive", self.positive, stats.positive),
            ("neutral", self.neutral, stats.neutral),
            ("negative", self.negative, stats.negative),
            ("total", self.total, stats.total),
        ] {
            if want != got {
                out.push(format!(
                    "{} {} {name}: expected {want}, found {got}",
                    self.benchmark, self.split
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_totals_are_consistent() {
        for r in REFERENCE_COUNTS {
            assert_eq!(r.positive + r.neutral + r.negative, r.total, "{r:?}");
        }
        assert_eq!(reference_counts("twitter2015", SplitName::Train).unwrap().total, 3179);
    }
}
