//! Four-way measurement selection from per-source Mahalanobis distances.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Acceptance thresholds, both in the same units as the distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    /// Below this every source is already good enough on its own.
    pub epsilon: f64,
    /// Above this a source is not used at all.
    pub delta: f64,
}

impl GateParams {
    /// Values used on race day.
    pub const RACE: GateParams = GateParams {
        epsilon: 0.2,
        delta: 5.0,
    };

    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        let p = Self { epsilon, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.delta.is_finite()) {
            return Err(Error::NonFinite("GateParams"));
        }
        if !(0.0 < self.epsilon && self.epsilon < self.delta) {
            return Err(invalid(
                "GateParams",
                format!(
                    "requires 0 < epsilon < delta, got epsilon={} delta={}",
                    self.epsilon, self.delta
                ),
            ));
        }
        Ok(())
    }
}

impl Default for GateParams {
    fn default() -> Self {
        Self::RACE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    /// Every source is within epsilon; the first one is used as is.
    AllQualified { chosen: usize },
    /// Distance-weighted blend of the feasible sources. Weights are indexed by
    /// source and are zero for sources beyond delta.
    WeightedFuse { weights: Vec<f64> },
    /// Exactly one source is within delta.
    SingleFeasible { chosen: usize },
    /// Nothing is within delta; the filter coasts on the process model.
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub kind: GateKind,
    pub distances: Vec<f64>,
}

impl GateDecision {
    pub fn is_reject(&self) -> bool {
        matches!(self.kind, GateKind::Reject)
    }

    /// Short label used in traces.
    pub fn label(&self) -> &'static str {
        match self.kind {
            GateKind::AllQualified { .. } => "all_qualified",
            GateKind::WeightedFuse { .. } => "weighted",
            GateKind::SingleFeasible { .. } => "single",
            GateKind::Reject => "reject",
        }
    }

    /// Decision used when gating is switched off: every source is blended
    /// with equal weight.
    pub fn accept_all(distances: Vec<f64>) -> Result<Self> {
        let n = distances.len();
        if n == 0 {
            return Err(Error::Empty("distances"));
        }
        let kind = if n == 1 {
            GateKind::SingleFeasible { chosen: 0 }
        } else {
            GateKind::WeightedFuse {
                weights: vec![1.0 / n as f64; n],
            }
        };
        Ok(Self { kind, distances })
    }

    /// A rejection with no distances, used when a sampling instant delivered
    /// no measurements at all.
    pub fn missing() -> Self {
        Self {
            kind: GateKind::Reject,
            distances: Vec::new(),
        }
    }
}

/// Selects how the measurements enter the correction step.
///
/// Boundaries belong to the `<=` side. Infinite distances are allowed and mark
/// sources whose innovation covariance could not be inverted.
pub fn gate(distances: &[f64], p: &GateParams) -> Result<GateDecision> {
    if distances.is_empty() {
        return Err(Error::Empty("distances"));
    }
    if distances.iter().any(|d| d.is_nan() || *d < 0.0) {
        return Err(invalid("distances", "must be non-negative"));
    }
    let feasible: Vec<usize> = (0..distances.len())
        .filter(|&k| distances[k] <= p.delta)
        .collect();

    let kind = if distances.iter().all(|&d| d <= p.epsilon) {
        GateKind::AllQualified { chosen: 0 }
    } else if feasible.is_empty() {
        GateKind::Reject
    } else if feasible.len() == 1 {
        GateKind::SingleFeasible {
            chosen: feasible[0],
        }
    } else {
        GateKind::WeightedFuse {
            weights: fuse_weights(distances, &feasible),
        }
    };
    Ok(GateDecision {
        kind,
        distances: distances.to_vec(),
    })
}

// λ_k ∝ 1 - Δ_k / ΣΔ over the feasible subset. The raw weights sum to n-1, so
// dividing by that sum normalizes them.
fn fuse_weights(distances: &[f64], feasible: &[usize]) -> Vec<f64> {
    let mut w = vec![0.0; distances.len()];
    let total: f64 = feasible.iter().map(|&k| distances[k]).sum();
    if total <= 0.0 {
        let share = 1.0 / feasible.len() as f64;
        for &k in feasible {
            w[k] = share;
        }
        return w;
    }
    let raw: Vec<f64> = feasible
        .iter()
        .map(|&k| 1.0 - distances[k] / total)
        .collect();
    let norm: f64 = raw.iter().sum();
    for (&k, r) in feasible.iter().zip(raw) {
        w[k] = r / norm;
    }
    w
}
