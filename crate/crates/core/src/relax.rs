//! Relaxation matrix and propagation of the longitudinal modes.
//!
//! The modes obey `dM/dt = -Gamma (M - M_inf)` with the symmetric rate
//! matrix
//!
//! ```text
//!          | rho1    sigma12  delta1 |
//! Gamma =  | sigma12 rho2     delta2 |
//!          | delta1  delta2   rho12  |
//! ```
//!
//! acting on `(I1z, I2z, 2 I1z I2z)`. The cross-correlation rates `delta`
//! are the only entries coupling single-spin order to two-spin order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{self, EigenError, Mat3, SymmetricEigen};
use crate::spin::ModeVector;

/// RK4 default step, seconds.
pub const DEFAULT_DT: f64 = 1e-3;
/// Largest accepted `dt * lambda_max` for the RK4 integrator.
pub const MAX_STEP_STIFFNESS: f64 = 0.1;
/// `tau * lambda_max` above which the initial-rate linearization is flagged.
pub const LINEAR_REGIME_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxError {
    #[error("eigensolver failure: {0}")]
    EigSolverFailure(#[from] EigenError),
    #[error("rate {field} is not finite ({value})")]
    NonFiniteRate { field: &'static str, value: f64 },
    #[error("time must be non-negative and finite, got {0}")]
    InvalidTime(f64),
    #[error("step dt = {dt} is too large: dt * lambda_max = {stiffness:.4} exceeds {limit}")]
    StepTooLarge { dt: f64, stiffness: f64, limit: f64 },
    #[error("invalid integration window: t_end = {t_end}, dt = {dt}")]
    InvalidWindow { t_end: f64, dt: f64 },
    #[error("sample times must be non-empty, finite, non-negative and strictly increasing")]
    InvalidTimes,
}

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    NotPositiveDefinite { min_eigenvalue: f64 },
    OutsideLinearRegime { tau: f64, stiffness: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "relaxation matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}); \
                 the state will not relax to equilibrium"
            ),
            Warning::OutsideLinearRegime { tau, stiffness } => write!(
                f,
                "tau = {tau} s gives tau * lambda_max = {stiffness:.3} > {LINEAR_REGIME_LIMIT}; \
                 initial-rate values are outside the linear regime"
            ),
        }
    }
}

/// Relaxation rates in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationRates {
    pub rho1: f64,
    pub rho2: f64,
    pub rho12: f64,
    pub sigma12: f64,
    #[serde(default)]
    pub delta1: f64,
    #[serde(default)]
    pub delta2: f64,
}

impl RelaxationRates {
    /// The published simulation matrix with the given cross-correlation
    /// rates: `rho1 = 0.3125`, `rho2 = rho12 = 0.33`, `sigma12 = 0.02`.
    pub fn reference(delta1: f64, delta2: f64) -> Self {
        RelaxationRates {
            rho1: 0.3125,
            rho2: 0.33,
            rho12: 0.33,
            sigma12: 0.02,
            delta1,
            delta2,
        }
    }

    /// Same rates with both cross-correlation terms removed.
    pub fn auto_only(&self) -> Self {
        RelaxationRates {
            delta1: 0.0,
            delta2: 0.0,
            ..*self
        }
    }

    /// Only the cross-correlation terms; every auto-correlation rate is zero.
    pub fn cross_only(&self) -> Self {
        RelaxationRates {
            rho1: 0.0,
            rho2: 0.0,
            rho12: 0.0,
            sigma12: 0.0,
            ..*self
        }
    }

    /// Cross-correlation rates multiplied by `s`.
    pub fn with_delta_scale(&self, s: f64) -> Self {
        RelaxationRates {
            delta1: self.delta1 * s,
            delta2: self.delta2 * s,
            ..*self
        }
    }

    pub fn matrix_entries(&self) -> Mat3 {
        [
            [self.rho1, self.sigma12, self.delta1],
            [self.sigma12, self.rho2, self.delta2],
            [self.delta1, self.delta2, self.rho12],
        ]
    }

    fn check_finite(&self) -> Result<(), RelaxError> {
        for (field, value) in [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho12", self.rho12),
            ("sigma12", self.sigma12),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
        ] {
            if !value.is_finite() {
                return Err(RelaxError::NonFiniteRate { field, value });
            }
        }
        Ok(())
    }
}

/// Symmetric rate matrix together with its spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationMatrix {
    rates: RelaxationRates,
    entries: Mat3,
    eigen: SymmetricEigen,
}

impl RelaxationMatrix {
    pub fn build(rates: RelaxationRates) -> Result<Self, RelaxError> {
        Self::build_with_budget(rates, eigen::MAX_SWEEPS)
    }

    pub fn build_with_budget(
        rates: RelaxationRates,
        max_sweeps: usize,
    ) -> Result<Self, RelaxError> {
        rates.check_finite()?;
        let entries = rates.matrix_entries();
        let eigen = eigen::jacobi_eigen(&entries, max_sweeps)?;
        Ok(RelaxationMatrix {
            rates,
            entries,
            eigen,
        })
    }

    pub fn rates(&self) -> &RelaxationRates {
        &self.rates
    }

    pub fn entries(&self) -> &Mat3 {
        &self.entries
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> [f64; 3] {
        self.eigen.values
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &Mat3 {
        &self.eigen.vectors
    }

    pub fn spectral(&self) -> &SymmetricEigen {
        &self.eigen
    }

    /// Largest eigenvalue magnitude.
    pub fn lambda_max(&self) -> f64 {
        self.eigen.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigen.values[0] > 0.0
    }

    pub fn warnings(&self) -> Vec<Warning> {
        if self.is_positive_definite() {
            Vec::new()
        } else {
            vec![Warning::NotPositiveDefinite {
                min_eigenvalue: self.eigen.values[0],
            }]
        }
    }

    /// `Gamma x`.
    pub fn apply(&self, x: ModeVector) -> ModeVector {
        ModeVector::from_array(eigen::mat_vec(&self.entries, x.to_array()))
    }

    /// Deviation from equilibrium expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, x: ModeVector) -> [f64; 3] {
        eigen::vec_mat(x.to_array(), &self.eigen.vectors)
    }

    /// `M_inf + exp(-Gamma t) (M0 - M_inf)` through the eigenbasis.
    pub fn evolve_exact(
        &self,
        m0: ModeVector,
        m_inf: ModeVector,
        t: f64,
    ) -> Result<ModeVector, RelaxError> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(RelaxError::InvalidTime(t));
        }
        if t == 0.0 {
            return Ok(m0);
        }
        let mut y = self.to_eigenbasis(m0 - m_inf);
        for (yi, lambda) in y.iter_mut().zip(self.eigen.values) {
            *yi *= (-lambda * t).exp();
        }
        let back = eigen::mat_vec(&self.eigen.vectors, y);
        Ok(m_inf + ModeVector::from_array(back))
    }

    /// [`Self::evolve_exact`] at every entry of `times`.
    pub fn trajectory(
        &self,
        m0: ModeVector,
        m_inf: ModeVector,
        times: &[f64],
    ) -> Result<Trajectory, RelaxError> {
        check_times(times)?;
        let states = times
            .iter()
            .map(|&t| self.evolve_exact(m0, m_inf, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trajectory {
            times: times.to_vec(),
            states,
            meta: String::new(),
        })
    }

    /// Classical fourth-order Runge-Kutta integration on a uniform grid.
    ///
    /// The last step is shortened when `t_end` is not a multiple of `dt`.
    pub fn evolve_ode(
        &self,
        m0: ModeVector,
        m_inf: ModeVector,
        t_end: f64,
        dt: f64,
    ) -> Result<Trajectory, RelaxError> {
        if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end >= dt) {
            return Err(RelaxError::InvalidWindow { t_end, dt });
        }
        let stiffness = dt * self.lambda_max();
        if stiffness > MAX_STEP_STIFFNESS {
            return Err(RelaxError::StepTooLarge {
                dt,
                stiffness,
                limit: MAX_STEP_STIFFNESS,
            });
        }

        let rhs = |m: ModeVector| -self.apply(m - m_inf);
        let steps = (t_end / dt - 1e-9).ceil() as usize;
        let mut times = Vec::with_capacity(steps + 1);
        let mut states = Vec::with_capacity(steps + 1);
        let mut m = m0;
        times.push(0.0);
        states.push(m);
        for n in 0..steps {
            let t = n as f64 * dt;
            let t_next = if n + 1 == steps {
                t_end
            } else {
                (n + 1) as f64 * dt
            };
            let h = t_next - t;
            let k1 = rhs(m);
            let k2 = rhs(m + k1 * (h / 2.0));
            let k3 = rhs(m + k2 * (h / 2.0));
            let k4 = rhs(m + k3 * h);
            m = m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            times.push(t_next);
            states.push(m);
        }
        Ok(Trajectory {
            times,
            states,
            meta: "rk4".to_string(),
        })
    }

    /// `M0 - Gamma tau (M0 - M_inf)`, the first-order expansion of the exact
    /// solution. Use [`Self::linear_regime_warning`] to check `tau`.
    pub fn initial_rate(
        &self,
        m0: ModeVector,
        m_inf: ModeVector,
        tau: f64,
    ) -> Result<ModeVector, RelaxError> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(RelaxError::InvalidTime(tau));
        }
        Ok(m0 - self.apply(m0 - m_inf) * tau)
    }

    pub fn linear_regime_warning(&self, tau: f64) -> Option<Warning> {
        let stiffness = tau * self.lambda_max();
        (stiffness > LINEAR_REGIME_LIMIT).then_some(Warning::OutsideLinearRegime { tau, stiffness })
    }
}

fn check_times(times: &[f64]) -> Result<(), RelaxError> {
    let ok = !times.is_empty()
        && times.iter().all(|t| t.is_finite() && *t >= 0.0)
        && times.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(RelaxError::InvalidTimes)
    }
}

/// Mode vectors sampled at strictly increasing times (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModeVector>,
    pub meta: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, ModeVector)> + '_ {
        self.times.iter().copied().zip(self.states.iter().copied())
    }

    pub fn last(&self) -> Option<(f64, ModeVector)> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}
