use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_spd_matrix;
use crate::perception::{Cluster, PointCloud, WallSide};

/// Polynomial wall `y(x) = Σ coeffs[k] x^k` in the body frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallModel {
    pub coeffs: Vec<f64>,
    /// Signed lateral offset `y(0)`: negative for a wall on the right.
    pub d_w: f64,
    pub support: usize,
    pub side: WallSide,
    pub rms: f64,
}

impl WallModel {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
    }

    /// Unsigned distance from the vehicle to the wall at x = 0.
    pub fn distance(&self) -> f64 {
        self.d_w.abs()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(Error::Empty("wall coefficients"));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) || !self.d_w.is_finite() {
            return Err(Error::NonFinite("wall model"));
        }
        if self.support < self.coeffs.len() {
            return Err(Error::RankDeficient(format!(
                "support {} below {} coefficients",
                self.support,
                self.coeffs.len()
            )));
        }
        Ok(())
    }
}

/// Least-squares polynomial of `order` through the xy projection of the
/// cluster members. The side is taken from the sign of the cluster centroid.
pub fn fit_wall(w: &Cluster, c: &PointCloud, order: usize) -> Result<WallModel> {
    let n_coef = order + 1;
    let pts: Vec<(f64, f64)> = w
        .point_indices
        .iter()
        .map(|&i| {
            c.points
                .get(i)
                .map(|p| (p.x, p.y))
                .ok_or_else(|| Error::Dimension(format!("cluster index {i} out of range")))
        })
        .collect::<Result<_>>()?;
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < n_coef {
        return Err(Error::RankDeficient(format!(
            "{} distinct x values for {} coefficients",
            xs.len(),
            n_coef
        )));
    }

    // Scaling x to [-1, 1] keeps the normal matrix well conditioned.
    let s = pts.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let s = if s > 0.0 { s } else { 1.0 };
    let mut ata = DMatrix::<f64>::zeros(n_coef, n_coef);
    let mut aty = DVector::<f64>::zeros(n_coef);
    let mut row = vec![0.0; n_coef];
    for &(x, y) in &pts {
        let t = x / s;
        let mut v = 1.0;
        for r in row.iter_mut() {
            *r = v;
            v *= t;
        }
        for i in 0..n_coef {
            aty[i] += row[i] * y;
            for j in 0..n_coef {
                ata[(i, j)] += row[i] * row[j];
            }
        }
    }
    let gamma = solve_spd_matrix(&ata, &aty)
        .map_err(|e| Error::RankDeficient(format!("normal matrix: {e}")))?;
    let coeffs: Vec<f64> = gamma
        .iter()
        .enumerate()
        .map(|(k, g)| g / s.powi(k as i32))
        .collect();

    let mut model = WallModel {
        d_w: coeffs[0],
        coeffs,
        support: pts.len(),
        side: if w.centroid.y < 0.0 {
            WallSide::Right
        } else {
            WallSide::Left
        },
        rms: 0.0,
    };
    let sse: f64 = pts.iter().map(|&(x, y)| (model.eval(x) - y).powi(2)).sum();
    model.rms = (sse / pts.len() as f64).sqrt();
    model.validate()?;
    Ok(model)
}
