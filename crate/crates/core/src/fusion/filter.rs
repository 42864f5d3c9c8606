use std::sync::Arc;

use nalgebra::{SMatrix, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fusion::gate::{gate, GateDecision, GateKind, GateParams};
use crate::fusion::status::{step_status, NavStatus, StatusThresholds};
use crate::geometry::{ControlInput, StateVector, VehicleState, MEAS_DIM, STATE_DIM};
use crate::kinematics::{bicycle_jacobian, bicycle_step};
use crate::linalg::{not_pd, symmetrize_fixed, Covariance};

pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type ControlMatrix = SMatrix<f64, STATE_DIM, 2>;
pub type ObsMatrix = SMatrix<f64, MEAS_DIM, STATE_DIM>;

/// A GPS position fix from one receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub source_id: usize,
    pub z: Vector2<f64>,
    pub r: Covariance,
    pub timestamp: f64,
}

impl Measurement {
    pub fn new(source_id: usize, z: Vector2<f64>, r: Covariance, timestamp: f64) -> Result<Self> {
        ensure_finite("measurement", &[z.x, z.y, timestamp])?;
        if r.dim() != MEAS_DIM {
            return Err(Error::Dimension(format!(
                "measurement covariance must be 2x2, got {0}x{0}",
                r.dim()
            )));
        }
        Ok(Self {
            source_id,
            z,
            r,
            timestamp,
        })
    }
}

// Built once per filter, so the size gap between variants does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum MotionModel {
    /// Constant per-step transition `x' = F x + B u` with `u = (steer, accel)`.
    Linear { f: StateMatrix, b: ControlMatrix },
    /// Kinematic bicycle, linearized each step for the covariance.
    Bicycle { wheelbase: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pub h: ObsMatrix,
    pub r: Covariance,
}

impl SourceModel {
    /// Position-only receiver with isotropic noise.
    pub fn gps(sigma: f64) -> Result<Self> {
        Ok(Self {
            h: position_observation(),
            r: Covariance::from_diagonal(&[sigma * sigma, sigma * sigma])?,
        })
    }
}

pub fn position_observation() -> ObsMatrix {
    let mut h = ObsMatrix::zeros();
    h[(0, 0)] = 1.0;
    h[(1, 1)] = 1.0;
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterModel {
    pub motion: MotionModel,
    /// Per-step process noise.
    pub q: Covariance,
    pub sources: Vec<SourceModel>,
}

impl FilterModel {
    pub fn validate(&self) -> Result<()> {
        if self.q.dim() != STATE_DIM {
            return Err(Error::Dimension(format!("Q must be {STATE_DIM}x{STATE_DIM}")));
        }
        if self.sources.is_empty() {
            return Err(Error::Empty("measurement sources"));
        }
        for s in &self.sources {
            if s.r.dim() != MEAS_DIM {
                return Err(Error::Dimension("R_k must be 2x2".into()));
            }
            ensure_finite("H_k", s.h.as_slice())?;
        }
        match &self.motion {
            MotionModel::Linear { f, b } => {
                ensure_finite("F", f.as_slice())?;
                ensure_finite("B", b.as_slice())?;
            }
            MotionModel::Bicycle { wheelbase } => {
                if !(wheelbase.is_finite() && *wheelbase > 0.0) {
                    return Err(invalid("wheelbase", "must be > 0"));
                }
            }
        }
        Ok(())
    }

    fn source(&self, id: usize) -> Result<&SourceModel> {
        self.sources
            .get(id)
            .ok_or_else(|| Error::DecisionMismatch(format!("unknown source id {id}")))
    }
}

/// Posterior estimate plus everything needed to advance it.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub estimate: VehicleState,
    pub cov: Covariance,
    pub model: Arc<FilterModel>,
    pub gate: GateParams,
    pub thresholds: StatusThresholds,
    pub status: NavStatus,
}

impl FilterState {
    pub fn new(
        estimate: VehicleState,
        cov: Covariance,
        model: FilterModel,
        gate: GateParams,
        thresholds: StatusThresholds,
    ) -> Result<Self> {
        model.validate()?;
        gate.validate()?;
        thresholds.validate()?;
        if cov.dim() != STATE_DIM {
            return Err(Error::Dimension(format!("covariance must be {STATE_DIM}x{STATE_DIM}")));
        }
        Ok(Self {
            estimate,
            cov,
            model: Arc::new(model),
            gate,
            thresholds,
            status: NavStatus::default(),
        })
    }

    /// Mahalanobis distance of every measurement; sources whose innovation
    /// covariance cannot be inverted get `+∞` so the gate rejects them.
    pub fn distances(&self, ms: &[Measurement]) -> Vec<f64> {
        ms.iter()
            .map(|m| mahalanobis(self, m).unwrap_or(f64::INFINITY))
            .collect()
    }

    /// Gates and applies a batch of simultaneous measurements. With
    /// `gating == false` every measurement is blended with equal weight.
    pub fn correct(&self, ms: &[Measurement], gating: bool) -> Result<(FilterState, GateDecision)> {
        let d = self.distances(ms);
        let decision = if gating {
            gate(&d, &self.gate)?
        } else {
            GateDecision::accept_all(d)?
        };
        let next = update(self, ms, &decision)?;
        Ok((next, decision))
    }

    /// Records a sampling instant at which no receiver reported anything.
    pub fn missing_measurements(&self) -> FilterState {
        let mut n = self.clone();
        n.status = step_status(self.status, &GateDecision::missing(), &self.thresholds);
        n
    }

    pub fn position_cov(&self) -> SMatrix<f64, 2, 2> {
        self.cov.matrix().fixed_view::<2, 2>(0, 0).into_owned()
    }
}

/// Propagates the estimate through the process model and grows the covariance:
/// `P ← F P Fᵀ + Q`.
pub fn predict(fs: &FilterState, u: &ControlInput, dt: f64) -> Result<FilterState> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    ensure_finite("control input", &[u.steer, u.accel])?;
    let x = fs.estimate.to_vector();
    let p: StateMatrix = fs.cov.to_fixed()?;
    let (x_next, f) = match &fs.model.motion {
        MotionModel::Linear { f, b } => (f * x + b * Vector2::new(u.steer, u.accel), *f),
        MotionModel::Bicycle { wheelbase } => (
            bicycle_step(&x, u, dt, *wheelbase),
            bicycle_jacobian(&x, u, dt, *wheelbase),
        ),
    };
    let q: StateMatrix = fs.model.q.to_fixed()?;
    let p_next = symmetrize_fixed(&(f * p * f.transpose() + q));
    let mut n = fs.clone();
    n.estimate = VehicleState::from_vector(&x_next, fs.estimate.timestamp + dt)?;
    n.cov = Covariance::from_fixed(&p_next)?;
    Ok(n)
}

fn innovation(
    x: &StateVector,
    p: &StateMatrix,
    h: &ObsMatrix,
    z: &Vector2<f64>,
    r: &SMatrix<f64, 2, 2>,
) -> (Vector2<f64>, SMatrix<f64, 2, 2>) {
    let nu = z - h * x;
    let s = symmetrize_fixed(&(h * p * h.transpose() + r));
    (nu, s)
}

/// `sqrt(νᵀ S⁻¹ ν)` with `S = H P Hᵀ + R` the innovation covariance.
pub fn mahalanobis(fs: &FilterState, m: &Measurement) -> Result<f64> {
    let src = fs.model.source(m.source_id)?;
    let x = fs.estimate.to_vector();
    let p: StateMatrix = fs.cov.to_fixed()?;
    let r: SMatrix<f64, 2, 2> = m.r.to_fixed()?;
    let (nu, s) = innovation(&x, &p, &src.h, &m.z, &r);
    let chol = s.cholesky().ok_or_else(|| not_pd_fixed(&s))?;
    let q = nu.dot(&chol.solve(&nu));
    if !q.is_finite() {
        return Err(not_pd_fixed(&s));
    }
    Ok(q.max(0.0).sqrt())
}

fn not_pd_fixed(s: &SMatrix<f64, 2, 2>) -> Error {
    not_pd(&nalgebra::DMatrix::from_column_slice(2, 2, s.as_slice()))
}

/// Applies a gate decision. Accept branches run a Joseph-form Kalman
/// correction; the reject branch leaves estimate and covariance untouched.
/// The status machine is advanced in every branch.
pub fn update(fs: &FilterState, ms: &[Measurement], d: &GateDecision) -> Result<FilterState> {
    if d.distances.len() != ms.len() {
        return Err(Error::DecisionMismatch(format!(
            "{} distances for {} measurements",
            d.distances.len(),
            ms.len()
        )));
    }
    let mut n = fs.clone();
    n.status = step_status(fs.status, d, &fs.thresholds);

    let (z, h, r) = match &d.kind {
        GateKind::Reject => return Ok(n),
        GateKind::AllQualified { chosen } | GateKind::SingleFeasible { chosen } => {
            let m = ms.get(*chosen).ok_or_else(|| {
                Error::DecisionMismatch(format!("chosen index {chosen} out of range"))
            })?;
            (m.z, fs.model.source(m.source_id)?.h, m.r.to_fixed::<2>()?)
        }
        GateKind::WeightedFuse { weights } => {
            if weights.len() != ms.len() {
                return Err(Error::DecisionMismatch(format!(
                    "{} weights for {} measurements",
                    weights.len(),
                    ms.len()
                )));
            }
            let mut z = Vector2::zeros();
            let mut h = ObsMatrix::zeros();
            let mut r = SMatrix::<f64, 2, 2>::zeros();
            for (m, &w) in ms.iter().zip(weights) {
                if w == 0.0 {
                    continue;
                }
                z += m.z * w;
                h += fs.model.source(m.source_id)?.h * w;
                r += m.r.to_fixed::<2>()? * (w * w);
            }
            (z, h, r)
        }
    };

    let x = fs.estimate.to_vector();
    let p: StateMatrix = fs.cov.to_fixed()?;
    let (nu, s) = innovation(&x, &p, &h, &z, &r);
    let s_inv = s
        .cholesky()
        .ok_or_else(|| not_pd_fixed(&s))?
        .inverse();
    let k = p * h.transpose() * s_inv;
    let x_post = x + k * nu;
    let ikh = StateMatrix::identity() - k * h;
    let p_post = symmetrize_fixed(&(ikh * p * ikh.transpose() + k * r * k.transpose()));

    n.estimate = VehicleState::from_vector(&x_post, fs.estimate.timestamp)?;
    n.cov = Covariance::from_fixed(&p_post)?;
    Ok(n)
}
