//! Minimal-ratio strategies behind a common trait.

use crate::recurrence::{
    euler_series_ratio, minimal_ratio, MinimalRatioResult, Recurrence, RecurrenceError,
    ToleranceConfig,
};
use crate::registry::{Named, Registry};

/// A way of computing the minimal-solution ratio `r0 = c1 / c0`.
pub trait RatioMethod: Named + Send + Sync {
    fn ratio(
        &self,
        coeffs: &dyn Recurrence,
        tol: &ToleranceConfig,
    ) -> Result<MinimalRatioResult, RecurrenceError>;
}

/// Adaptive backward evaluation of the continued fraction.
#[derive(Debug, Clone, Copy, Default)]
pub struct ContinuedFraction;

/// Euler series of convergent differences.
#[derive(Debug, Clone, Copy, Default)]
pub struct EulerSeries;

impl Named for ContinuedFraction {
    fn name(&self) -> &'static str {
        "cf"
    }
}

impl RatioMethod for ContinuedFraction {
    fn ratio(
        &self,
        coeffs: &dyn Recurrence,
        tol: &ToleranceConfig,
    ) -> Result<MinimalRatioResult, RecurrenceError> {
        minimal_ratio(coeffs, tol)
    }
}

impl Named for EulerSeries {
    fn name(&self) -> &'static str {
        "euler"
    }
}

impl RatioMethod for EulerSeries {
    fn ratio(
        &self,
        coeffs: &dyn Recurrence,
        tol: &ToleranceConfig,
    ) -> Result<MinimalRatioResult, RecurrenceError> {
        euler_series_ratio(coeffs, tol)
    }
}

/// Registry holding `cf` and `euler`.
pub fn ratio_methods() -> Registry<dyn RatioMethod> {
    let mut reg: Registry<dyn RatioMethod> = Registry::new();
    reg.register(Box::new(ContinuedFraction))
        .register(Box::new(EulerSeries));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::ConstantCoefficients;

    #[test]
    fn both_methods_registered_and_agree() {
        let reg = ratio_methods();
        assert_eq!(reg.names(), vec!["cf", "euler"]);
        let c = ConstantCoefficients { a: -2.5, b: 1.0 };
        for m in reg.iter() {
            let r = m.ratio(&c, &ToleranceConfig::default()).unwrap();
            assert!((r.value - 0.5).abs() < 1e-12, "{}", m.name());
        }
    }
}
