//! Phase distribution and trace-level markers.

use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::model::{Phase, StructuredTrace, Subcategory};

/// An exact fraction of the trace's steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Share(Ratio<u64>);

impl Share {
    pub fn new(count: u64, total: u64) -> Self {
        if total == 0 {
            return Share(Ratio::from_integer(0));
        }
        Share(Ratio::new(count, total))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Tenths of a percent, rounded half-up.
    pub fn permille(self) -> u64 {
        let (n, d) = (*self.0.numer() as u128, *self.0.denom() as u128);
        ((2 * 1000 * n + d) / (2 * d)) as u64
    }

    /// One-decimal percentage such as `65.3%`.
    pub fn percent_label(self) -> String {
        let p = self.permille();
        format!("{}.{}%", p / 10, p % 10)
    }
}

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.percent_label())
    }
}

impl Serialize for Share {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStats {
    pub step_shares: [Share; 4],
    pub subphase_counts: [usize; 4],
    pub step_counts: [usize; 4],
    pub verification_share: Share,
    /// First step of the final decision: its earliest stating-confidence
    /// subphase if there is one, else the group's first step.
    pub confidence_step: Option<usize>,
}

pub fn compute_stats(structured: &StructuredTrace) -> TraceStats {
    let step_counts = structured.groups.clone().map(|g| g.step_count());
    let subphase_counts = structured.groups.clone().map(|g| g.subphases.len());
    let total = structured.step_count as u64;
    let step_shares = step_counts.map(|c| Share::new(c as u64, total));

    let decision = structured.group(Phase::FinalDecision);
    let confidence_step = decision
        .subphases
        .iter()
        .filter(|s| s.subcategory == Subcategory::StatingConfidence)
        .filter_map(|s| s.first_step())
        .min()
        .or_else(|| decision.step_range().map(|(first, _)| first));

    TraceStats {
        step_shares,
        subphase_counts,
        step_counts,
        verification_share: step_shares[Phase::IterativeRefinementVerification.ordinal()],
        confidence_step,
    }
}

impl TraceStats {
    pub fn share_sum(&self) -> Ratio<u64> {
        self.step_shares.iter().map(|s| s.ratio()).sum()
    }

    pub fn percent_labels(&self) -> [String; 4] {
        self.step_shares.map(Share::percent_label)
    }
}
