//! The Rabi model layer: `f_n(x)`, recurrence coefficients, the spectral
//! function `F0(x) = f0(x) - r0(x)` and the baseline poles `x = n omega`.
//!
//! In the Bargmann representation the expansion coefficients of the
//! eigenfunction obey `y[n+1] + a(n) y[n] + b(n) y[n-1] = 0` with
//! `a(n) = -f_n(x) / (n + 1)` and `b(n) = 1 / (n + 1)`, where
//!
//! ```text
//! f_n(x) = 2g + (n omega - x + delta^2 / (x - n omega)) / (2g)
//! ```
//!
//! At `n = 0` the recurrence collapses to `c1 = f0(x) c0`, so `x` is in the
//! regular spectrum exactly when the minimal ratio `r0` of the `n >= 1`
//! recurrence equals `f0(x)`. Energies follow from `E = x - g^2 / omega`.

use serde::Serialize;
use thiserror::Error;

use crate::ratio::{ContinuedFraction, RatioMethod};
use crate::recurrence::{
    backward_sweep, CoefficientError, MinimalRatioResult, Recurrence, RecurrenceError,
    ToleranceConfig,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RabiError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("x = {x} lies within {distance:e} of the pole of f_{n} at x = n omega")]
    Pole { n: usize, x: f64, distance: f64 },
    #[error("minimal ratio did not converge at x = {x} (est. error {:e} after {} terms)", .ratio.est_error, .ratio.terms_used)]
    NotConverged { x: f64, ratio: MinimalRatioResult },
    #[error("series did not converge at x = {x} after {terms} terms")]
    SeriesDiverged { x: f64, terms: usize },
    #[error(transparent)]
    Recurrence(RecurrenceError),
}

impl RabiError {
    fn from_recurrence(err: RecurrenceError, x: f64) -> Self {
        match err {
            RecurrenceError::Coefficient(CoefficientError::Pole { index, distance }) => {
                RabiError::Pole {
                    n: index,
                    x,
                    distance,
                }
            }
            other => RabiError::Recurrence(other),
        }
    }
}

/// Coupling `g`, level splitting `delta` and mode frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiParams {
    pub g: f64,
    pub delta: f64,
    pub omega: f64,
}

impl RabiParams {
    pub fn new(g: f64, delta: f64, omega: f64) -> Result<Self, RabiError> {
        let p = Self { g, delta, omega };
        p.validate()?;
        Ok(p)
    }

    /// `g > 0`, `delta >= 0`, `omega > 0`, all finite.
    pub fn validate(&self) -> Result<(), RabiError> {
        if !(self.g.is_finite() && self.delta.is_finite() && self.omega.is_finite()) {
            return Err(RabiError::InvalidParams(format!(
                "non-finite parameters {self:?}"
            )));
        }
        if self.g <= 0.0 {
            return Err(RabiError::InvalidParams(format!(
                "g must be positive, got {}",
                self.g
            )));
        }
        if self.delta < 0.0 {
            return Err(RabiError::InvalidParams(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        if self.omega <= 0.0 {
            return Err(RabiError::InvalidParams(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    /// Displaced-oscillator shift `g^2 / omega` between `x` and `E`.
    pub fn shift(&self) -> f64 {
        self.g * self.g / self.omega
    }

    pub fn energy(&self, x: f64) -> f64 {
        x - self.shift()
    }

    pub fn default_pole_margin(&self) -> f64 {
        1e-6 * self.omega
    }
}

/// One regular eigenvalue in both conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub x: f64,
    pub energy: f64,
    /// `|F(x)|` of the scanned function at the returned point.
    pub residual: f64,
    pub bracket: (f64, f64),
}

/// Baselines `n omega` inside a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleSet {
    pub poles: Vec<f64>,
    pub margin: f64,
}

impl PoleSet {
    pub fn min_distance(&self, x: f64) -> f64 {
        self.poles
            .iter()
            .map(|p| (x - p).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Validated parameters plus the pole-exclusion half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiModel {
    pub params: RabiParams,
    pub pole_margin: f64,
}

impl RabiModel {
    pub fn new(params: RabiParams) -> Result<Self, RabiError> {
        params.validate()?;
        Ok(Self {
            params,
            pole_margin: params.default_pole_margin(),
        })
    }

    pub fn with_pole_margin(mut self, margin: f64) -> Result<Self, RabiError> {
        if !(margin > 0.0 && margin.is_finite()) {
            return Err(RabiError::InvalidParams(format!(
                "pole margin must be positive, got {margin}"
            )));
        }
        self.pole_margin = margin;
        Ok(self)
    }

    /// Distance from `x` to the baseline `n omega`, or a pole error when it is
    /// inside the margin.
    pub fn check_pole(&self, n: usize, x: f64) -> Result<f64, RabiError> {
        let offset = x - n as f64 * self.params.omega;
        if offset.abs() <= self.pole_margin {
            Err(RabiError::Pole {
                n,
                x,
                distance: offset.abs(),
            })
        } else {
            Ok(offset)
        }
    }

    /// Index of the baseline closest to `x`, if `x` is inside its margin.
    pub fn nearby_pole(&self, x: f64) -> Option<usize> {
        let n = (x / self.params.omega).round();
        if n < 0.0 {
            return None;
        }
        let n = n as usize;
        self.check_pole(n, x).err().map(|_| n)
    }

    pub fn f_n(&self, n: usize, x: f64) -> Result<f64, RabiError> {
        let offset = self.check_pole(n, x)?;
        let RabiParams { g, delta, .. } = self.params;
        let detuning = if delta == 0.0 {
            0.0
        } else {
            delta * delta / offset
        };
        Ok(2.0 * g + (-offset + detuning) / (2.0 * g))
    }

    pub fn coefficients(&self, x: f64) -> RabiCoefficients {
        RabiCoefficients { model: *self, x }
    }

    /// `F0(x)` with the continued-fraction ratio.
    pub fn f0(
        &self,
        x: f64,
        tol: &ToleranceConfig,
    ) -> Result<(f64, MinimalRatioResult), RabiError> {
        self.f0_with(x, tol, &ContinuedFraction)
            .map(|s| (s.value, s.ratio))
    }

    /// `F0(x)` with an arbitrary ratio method, plus the leading-sign
    /// orientation of the minimal solution.
    pub fn f0_with(
        &self,
        x: f64,
        tol: &ToleranceConfig,
        method: &dyn RatioMethod,
    ) -> Result<F0Sample, RabiError> {
        let head = self.f_n(0, x)?;
        let coeffs = self.coefficients(x);
        let ratio = method
            .ratio(&coeffs, tol)
            .map_err(|e| RabiError::from_recurrence(e, x))?;
        if !ratio.converged || !ratio.value.is_finite() {
            return Err(RabiError::NotConverged { x, ratio });
        }
        let depth = ratio.terms_used.max(tol.n_start);
        let sweep = backward_sweep(&coeffs, depth, tol.tiny_floor)
            .map_err(|e| RabiError::from_recurrence(e, x))?;
        Ok(F0Sample {
            value: head - ratio.value,
            orientation: sweep.leading_sign,
            ratio,
        })
    }

    /// Baselines `n omega`, `n >= 0`, inside `[xmin, xmax]`.
    pub fn poles_in(&self, xmin: f64, xmax: f64) -> PoleSet {
        let omega = self.params.omega;
        let first = (xmin / omega).ceil().max(0.0) as usize;
        let mut poles = Vec::new();
        if xmax >= 0.0 {
            let mut n = first;
            loop {
                let p = n as f64 * omega;
                if p > xmax {
                    break;
                }
                if p >= xmin {
                    poles.push(p);
                }
                n += 1;
            }
        }
        PoleSet {
            poles,
            margin: self.pole_margin,
        }
    }
}

/// `F0` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F0Sample {
    pub value: f64,
    /// Sign of the unnormalized `c0` from the backward sweep; `value *
    /// orientation` has no jumps where `r0` diverges.
    pub orientation: f64,
    pub ratio: MinimalRatioResult,
}

/// `a(n) = -f_n(x) / (n + 1)`, `b(n) = 1 / (n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiCoefficients {
    model: RabiModel,
    x: f64,
}

impl RabiCoefficients {
    pub fn x(&self) -> f64 {
        self.x
    }
}

impl Recurrence for RabiCoefficients {
    fn a(&self, n: usize) -> Result<f64, CoefficientError> {
        match self.model.f_n(n, self.x) {
            Ok(f) => Ok(-f / (n as f64 + 1.0)),
            Err(RabiError::Pole { distance, .. }) => {
                Err(CoefficientError::Pole { index: n, distance })
            }
            Err(_) => Err(CoefficientError::NonFinite {
                index: n,
                value: f64::NAN,
            }),
        }
    }

    fn b(&self, n: usize) -> Result<f64, CoefficientError> {
        Ok(1.0 / (n as f64 + 1.0))
    }

    fn description(&self) -> String {
        let p = self.model.params;
        format!(
            "Rabi g = {}, delta = {}, omega = {} at x = {}",
            p.g, p.delta, p.omega, self.x
        )
    }
}

pub fn f_n(params: &RabiParams, n: usize, x: f64) -> Result<f64, RabiError> {
    RabiModel::new(*params)?.f_n(n, x)
}

pub fn rabi_coefficients(params: &RabiParams, x: f64) -> Result<RabiCoefficients, RabiError> {
    Ok(RabiModel::new(*params)?.coefficients(x))
}

pub fn f0_function(
    params: &RabiParams,
    x: f64,
    tol: &ToleranceConfig,
) -> Result<(f64, MinimalRatioResult), RabiError> {
    RabiModel::new(*params)?.f0(x, tol)
}

pub fn poles_in(params: &RabiParams, xmin: f64, xmax: f64) -> Result<PoleSet, RabiError> {
    Ok(RabiModel::new(*params)?.poles_in(xmin, xmax))
}
