//! Covariance wrapper and a symmetric positive-definite solver.

use nalgebra::{DMatrix, DVector, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYM_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-9;

/// A symmetric positive semi-definite matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Covariance(DMatrix<f64>);

impl Covariance {
    /// Validates symmetry (to 1e-9, scaled by the largest entry) and
    /// semi-definiteness, then stores the symmetrized matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidCovariance(format!(
                "not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCovariance("non-finite entry".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYM_TOL * scale {
            return Err(Error::InvalidCovariance(format!(
                "asymmetry {asym:.3e} exceeds tolerance"
            )));
        }
        let sym = symmetrize(&m);
        if sym.nrows() > 0 {
            let min_eig = sym.clone().symmetric_eigen().eigenvalues.min();
            if min_eig < -PSD_TOL * scale {
                return Err(Error::InvalidCovariance(format!(
                    "negative eigenvalue {min_eig:.3e}"
                )));
            }
        }
        Ok(Self(sym))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fixed<const N: usize>(m: &SMatrix<f64, N, N>) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(N, N, m.as_slice()))
    }

    /// Copies into a fixed-size matrix.
    pub fn to_fixed<const N: usize>(&self) -> Result<SMatrix<f64, N, N>> {
        if self.dim() != N {
            return Err(Error::Dimension(format!(
                "expected {N}x{N} covariance, got {0}x{0}",
                self.dim()
            )));
        }
        Ok(SMatrix::from_column_slice(self.0.as_slice()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

impl TryFrom<Vec<Vec<f64>>> for Covariance {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCovariance("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

impl From<Covariance> for Vec<Vec<f64>> {
    fn from(c: Covariance) -> Self {
        c.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn symmetrize_fixed<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

/// Solves `A x = b` for symmetric positive-definite `A` via Cholesky.
pub fn solve_spd(a: &Covariance, b: &DVector<f64>) -> Result<DVector<f64>> {
    solve_spd_matrix(a.matrix(), b)
}

/// Same as [`solve_spd`] for a matrix that has not been wrapped as a
/// [`Covariance`] (e.g. normal-equation matrices).
pub fn solve_spd_matrix(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "A is {}x{}, b has {} rows",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let chol = symmetrize(a)
        .cholesky()
        .ok_or_else(|| not_pd(a))?;
    let x = chol.solve(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(not_pd(a));
    }
    Ok(x)
}

pub(crate) fn not_pd(a: &DMatrix<f64>) -> Error {
    let sym = symmetrize(a);
    let (min_eig, max_eig) = if sym.iter().all(|v| v.is_finite()) && sym.nrows() > 0 {
        let e = sym.symmetric_eigen().eigenvalues;
        (e.min(), e.max())
    } else {
        (f64::NAN, f64::NAN)
    };
    Error::NotPositiveDefinite {
        dim: a.nrows(),
        min_eig,
        max_eig,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal() {
        let x = solve_spd(&Covariance::identity(2), &DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(x.as_slice(), &[3.0, 4.0]);
        let a = Covariance::from_diagonal(&[2.0, 4.0]).unwrap();
        let x = solve_spd(&a, &DVector::from_vec(vec![2.0, 4.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_reports_eigen_range() {
        let a = Covariance::from_diagonal(&[1.0, 0.0]).unwrap();
        match solve_spd(&a, &DVector::from_vec(vec![1.0, 1.0])) {
            Err(Error::NotPositiveDefinite { dim, min_eig, max_eig }) => {
                assert_eq!(dim, 2);
                assert_eq!(min_eig, 0.0);
                assert_eq!(max_eig, 1.0);
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(Covariance::new(m).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(Covariance::new(m).is_err());
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(n, n) * 0.1
    }

    #[test]
    fn residual_bound_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let n = 2 + trial % 5;
            let a = Covariance::new(random_spd(&mut rng, n)).unwrap();
            let b = DVector::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
            let x = solve_spd(&a, &b).unwrap();
            let r = (a.matrix() * &x - &b).norm();
            assert!(r <= 1e-9 * b.norm(), "trial {trial}: residual {r:e}");
        }
    }

    proptest! {
        #[test]
        fn symmetrization_keeps_eigen_signs(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = random_spd(&mut rng, n);
            // Perturb by an antisymmetric part well below tolerance.
            let skew = DMatrix::from_fn(n, n, |i, j| if i < j { 1e-12 } else if i > j { -1e-12 } else { 0.0 });
            let sorted = |m: DMatrix<f64>| {
                let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
                v.sort_by(f64::total_cmp);
                v
            };
            let before = sorted(symmetrize(&base));
            let c = Covariance::new(&base + skew).unwrap();
            let after = sorted(c.matrix().clone());
            for (a, b) in before.iter().zip(after.iter()) {
                prop_assert!(*b >= -1e-9);
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
