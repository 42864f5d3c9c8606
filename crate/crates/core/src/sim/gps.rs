use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fusion::Measurement;
use crate::geometry::VehicleState;
use crate::linalg::Covariance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultMode {
    /// Constant world-frame offset in meters.
    Bias([f64; 2]),
    /// Multiplies the noise standard deviation.
    NoiseInflation(f64),
    /// The receiver reports nothing.
    Dropout,
    /// Drift with the given intensity in m/√s, restarted per episode.
    RandomWalk(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEpisode {
    pub source: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub mode: FaultMode,
}

impl FaultEpisode {
    pub fn active(&self, t: f64) -> bool {
        self.t_start <= t && t < self.t_end
    }
}

/// Scripted receiver faults. Episodes of one source never overlap.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultProfile {
    pub episodes: Vec<FaultEpisode>,
}

impl FaultProfile {
    /// Checks each episode; on failure returns the offending index with the
    /// error.
    pub fn validate(&self, n_sources: usize) -> std::result::Result<(), (usize, Error)> {
        for (i, e) in self.episodes.iter().enumerate() {
            if e.source >= n_sources {
                return Err((i, invalid("source", format!("{} but only {n_sources} receivers", e.source))));
            }
            if !(e.t_start.is_finite() && e.t_end.is_finite() && e.t_start < e.t_end) {
                return Err((i, invalid("t_start", "requires finite t_start < t_end")));
            }
            let mode_ok = match e.mode {
                FaultMode::Bias(b) => b.iter().all(|v| v.is_finite()),
                FaultMode::NoiseInflation(f) => f.is_finite() && f > 0.0,
                FaultMode::Dropout => true,
                FaultMode::RandomWalk(s) => s.is_finite() && s >= 0.0,
            };
            if !mode_ok {
                return Err((i, invalid("mode", "parameter out of range")));
            }
            for (k, o) in self.episodes.iter().enumerate().take(i) {
                if o.source == e.source && o.t_start < e.t_end && e.t_start < o.t_end {
                    return Err((i, invalid("t_start", format!("overlaps episode {k} of source {}", e.source))));
                }
            }
        }
        Ok(())
    }

    pub fn active(&self, source: usize, t: f64) -> Option<&FaultEpisode> {
        self.episodes.iter().find(|e| e.source == source && e.active(t))
    }
}

/// Receivers sharing one seeded noise stream. Every source draws its noise
/// at every sample, faulted or not, so a fault on one receiver never shifts
/// the noise sequence of another.
#[derive(Debug, Clone)]
pub struct GpsSimulator {
    pub sigma: f64,
    pub n_sources: usize,
    pub profile: FaultProfile,
    rng: ChaCha8Rng,
    walk: Vec<Vector2<f64>>,
    walk_episode: Vec<Option<usize>>,
    last_t: Option<f64>,
}

impl GpsSimulator {
    pub fn new(sigma: f64, n_sources: usize, profile: FaultProfile, rng: ChaCha8Rng) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(invalid("gps_sigma", format!("must be >= 0, got {sigma}")));
        }
        profile.validate(n_sources).map_err(|(_, e)| e)?;
        Ok(Self {
            sigma,
            n_sources,
            profile,
            rng,
            walk: vec![Vector2::zeros(); n_sources],
            walk_episode: vec![None; n_sources],
            last_t: None,
        })
    }

    /// Nominal covariance every receiver reports, faulted or not. A floor
    /// keeps it positive definite in the noiseless limit.
    pub fn reported_cov(&self) -> Covariance {
        let v = (self.sigma * self.sigma).max(1e-12);
        Covariance::from_diagonal(&[v, v]).expect("positive diagonal")
    }

    /// Fixes at time `t` for the true state. Withheld fixes are simply absent.
    pub fn sample(&mut self, truth: &VehicleState, t: f64) -> Vec<Measurement> {
        let dt = self.last_t.map_or(0.0, |p| (t - p).max(0.0));
        self.last_t = Some(t);
        let mut out = Vec::with_capacity(self.n_sources);
        for k in 0..self.n_sources {
            let n = Vector2::new(
                self.rng.sample::<f64, _>(StandardNormal),
                self.rng.sample::<f64, _>(StandardNormal),
            );
            let w = Vector2::new(
                self.rng.sample::<f64, _>(StandardNormal),
                self.rng.sample::<f64, _>(StandardNormal),
            );
            let truth_xy = Vector2::new(truth.pose.x, truth.pose.y);
            let episode = self
                .profile
                .episodes
                .iter()
                .position(|e| e.source == k && e.active(t));
            if self.walk_episode[k] != episode {
                self.walk[k] = Vector2::zeros();
                self.walk_episode[k] = episode;
            }
            let z = match episode.map(|i| self.profile.episodes[i].mode) {
                None => truth_xy + n * self.sigma,
                Some(FaultMode::Bias(b)) => truth_xy + n * self.sigma + Vector2::new(b[0], b[1]),
                Some(FaultMode::NoiseInflation(f)) => truth_xy + n * (self.sigma * f),
                Some(FaultMode::Dropout) => continue,
                Some(FaultMode::RandomWalk(s)) => {
                    self.walk[k] += w * (s * dt.sqrt());
                    truth_xy + n * self.sigma + self.walk[k]
                }
            };
            out.push(Measurement {
                source_id: k,
                z,
                r: self.reported_cov(),
                timestamp: t,
            });
        }
        out
    }
}
