//! Navigation status manager driven by gate outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fusion::gate::GateDecision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavLevel {
    Nominal,
    Warning,
    Emergency,
}

impl NavLevel {
    pub fn label(self) -> &'static str {
        match self {
            NavLevel::Nominal => "nominal",
            NavLevel::Warning => "warning",
            NavLevel::Emergency => "emergency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavStatus {
    pub level: NavLevel,
    pub consecutive_rejects: u32,
    pub consecutive_accepts: u32,
}

impl Default for NavStatus {
    fn default() -> Self {
        Self {
            level: NavLevel::Nominal,
            consecutive_rejects: 0,
            consecutive_accepts: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatusThresholds {
    pub warn: u32,
    pub emergency: u32,
    pub recover: u32,
}

impl Default for StatusThresholds {
    fn default() -> Self {
        Self {
            warn: 1,
            emergency: 3,
            recover: 5,
        }
    }
}

impl StatusThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.warn == 0 || self.recover == 0 {
            return Err(invalid("StatusThresholds", "thresholds must be >= 1"));
        }
        if self.warn > self.emergency {
            return Err(invalid(
                "StatusThresholds",
                format!(
                    "warn ({}) must not exceed emergency ({})",
                    self.warn, self.emergency
                ),
            ));
        }
        Ok(())
    }
}

/// Advances the status machine by one gate outcome.
///
/// At most one level change happens per call, so Emergency is only ever
/// reached through Warning. Warning drops back to Nominal on the first accept;
/// Emergency needs `recover` consecutive accepts.
pub fn step_status(s: NavStatus, d: &GateDecision, cfg: &StatusThresholds) -> NavStatus {
    let mut n = s;
    if d.is_reject() {
        n.consecutive_rejects = n.consecutive_rejects.saturating_add(1);
        n.consecutive_accepts = 0;
        n.level = match s.level {
            NavLevel::Nominal if n.consecutive_rejects >= cfg.warn => NavLevel::Warning,
            NavLevel::Warning if n.consecutive_rejects >= cfg.emergency => NavLevel::Emergency,
            other => other,
        };
    } else {
        n.consecutive_accepts = n.consecutive_accepts.saturating_add(1);
        n.consecutive_rejects = 0;
        n.level = match s.level {
            NavLevel::Warning => NavLevel::Nominal,
            NavLevel::Emergency if n.consecutive_accepts >= cfg.recover => NavLevel::Nominal,
            other => other,
        };
    }
    n
}
