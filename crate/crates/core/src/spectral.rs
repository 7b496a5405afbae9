//! Functions whose sign changes mark regular eigenvalues.

use crate::rabi::{RabiError, RabiModel};
use crate::ratio::{ContinuedFraction, RatioMethod};
use crate::recurrence::ToleranceConfig;

/// One evaluation of a scanned function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: f64,
    /// `±1`. Sign changes are detected on `value * orientation`, which must
    /// be continuous between consecutive baselines.
    pub orientation: f64,
}

impl Sample {
    pub fn plain(value: f64) -> Self {
        Self {
            value,
            orientation: 1.0,
        }
    }

    pub fn oriented(&self) -> f64 {
        self.value * self.orientation
    }
}

/// A spectral function on the baseline-free intervals of a Rabi model.
pub trait SpectralFunction: Sync {
    fn model(&self) -> &RabiModel;
    fn sample(&self, x: f64) -> Result<Sample, RabiError>;
    /// Short tag carried into results, e.g. `"F0"`.
    fn method(&self) -> &'static str;
}

/// `F0(x) = f0(x) - r0(x)`.
#[derive(Clone, Copy)]
pub struct F0Function<'a> {
    model: RabiModel,
    tol: ToleranceConfig,
    ratio: &'a dyn RatioMethod,
}

impl F0Function<'static> {
    pub fn new(model: RabiModel, tol: ToleranceConfig) -> Self {
        Self {
            model,
            tol,
            ratio: &ContinuedFraction,
        }
    }
}

impl<'a> F0Function<'a> {
    pub fn with_ratio(model: RabiModel, tol: ToleranceConfig, ratio: &'a dyn RatioMethod) -> Self {
        Self { model, tol, ratio }
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }
}

impl SpectralFunction for F0Function<'_> {
    fn model(&self) -> &RabiModel {
        &self.model
    }

    fn sample(&self, x: f64) -> Result<Sample, RabiError> {
        let s = self.model.f0_with(x, &self.tol, self.ratio)?;
        Ok(Sample {
            value: s.value,
            orientation: s.orientation,
        })
    }

    fn method(&self) -> &'static str {
        "F0"
    }
}
