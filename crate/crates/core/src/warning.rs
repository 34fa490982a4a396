use std::fmt;

use serde::Serialize;

use crate::relation::ExternalId;

/// Non-fatal conditions recorded while running a pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// Every entry of this user landed in the test side of a split.
    EmptyTrainingProfile { user: ExternalId },
    /// Fewer than `k` users had positive proximity to `user`.
    ShortNeighborhood {
        user: ExternalId,
        found: usize,
        k: usize,
    },
    /// The power-law fit was not possible; a percentile threshold was used.
    ThresholdFallback { reason: String, percentile: f64 },
    /// The graph is already metric, so enhancement inserted nothing.
    NoSemiMetricPairs,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::EmptyTrainingProfile { user } => {
                write!(f, "user {user} has no training entries and is skipped")
            }
            Warning::ShortNeighborhood { user, found, k } => write!(
                f,
                "user {user}: only {found} of {k} neighbours have positive proximity"
            ),
            Warning::ThresholdFallback { reason, percentile } => write!(
                f,
                "power-law cutoff unavailable ({reason}); using upper {percentile} percentile"
            ),
            Warning::NoSemiMetricPairs => {
                write!(
                    f,
                    "graph has no semi-metric pairs; enhancement leaves it unchanged"
                )
            }
        }
    }
}
