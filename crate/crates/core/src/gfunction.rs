//! Parity-resolved spectral functions
//!
//! ```text
//! G±(x) = sum_n K_n(x) (1 ∓ delta / (x - n omega)) g^n
//! K_0 = 1, K_1 = f0(x), (n + 1) K_{n+1} = f_n(x) K_n - K_{n-1}
//! ```
//!
//! The zeros of `G+` and `G-` together make up the regular spectrum; they are
//! used here to cross-check the parity-free `F0` scan.

use serde::Serialize;

use crate::rabi::{RabiError, RabiModel};
use crate::spectral::{Sample, SpectralFunction};
use crate::spectrum::{scan_spectrum, ScanConfig, ScanError, SpectrumResult};

pub const DEFAULT_TRUNCATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GFunctionSeries {
    pub parity: Parity,
    /// Number of terms summed.
    pub truncation: usize,
    pub value: f64,
}

/// Partial sum of `G±(x)` with at most `n_trunc` terms.
///
/// Stops early once three consecutive terms fall below
/// `1e-14 * (1 + |sum|)`. Reaching `n_trunc` while the terms still grow is
/// reported as [`RabiError::SeriesDiverged`].
pub fn g_pm(
    model: &RabiModel,
    parity: Parity,
    x: f64,
    n_trunc: usize,
) -> Result<GFunctionSeries, RabiError> {
    if n_trunc < 2 {
        return Err(RabiError::InvalidParams(format!(
            "G-function truncation must be at least 2, got {n_trunc}"
        )));
    }
    let g = model.params.g;
    let delta = model.params.delta;
    let s = parity.sign();
    let mut k_prev = 0.0;
    let mut k = 1.0;
    let mut g_pow = 1.0;
    let mut sum = 0.0;
    let mut last_term = f64::INFINITY;
    let mut growing = false;
    let mut small = 0;
    for n in 0..n_trunc {
        let offset = model.check_pole(n, x)?;
        let term = k * (1.0 - s * delta / offset) * g_pow;
        sum += term;
        if !sum.is_finite() {
            return Err(RabiError::SeriesDiverged { x, terms: n + 1 });
        }
        growing = term.abs() > last_term;
        last_term = term.abs();
        if term.abs() < 1e-14 * (1.0 + sum.abs()) {
            small += 1;
            if small == 3 {
                return Ok(GFunctionSeries {
                    parity,
                    truncation: n + 1,
                    value: sum,
                });
            }
        } else {
            small = 0;
        }
        let f = model.f_n(n, x)?;
        let k_next = (f * k - k_prev) / (n as f64 + 1.0);
        k_prev = k;
        k = k_next;
        g_pow *= g;
    }
    if growing {
        return Err(RabiError::SeriesDiverged { x, terms: n_trunc });
    }
    Ok(GFunctionSeries {
        parity,
        truncation: n_trunc,
        value: sum,
    })
}

/// `G+` or `G-` as a scannable function.
#[derive(Debug, Clone, Copy)]
pub struct GFunction {
    pub model: RabiModel,
    pub parity: Parity,
    pub n_trunc: usize,
}

impl GFunction {
    pub fn new(model: RabiModel, parity: Parity) -> Self {
        Self {
            model,
            parity,
            n_trunc: DEFAULT_TRUNCATION,
        }
    }
}

impl SpectralFunction for GFunction {
    fn model(&self) -> &RabiModel {
        &self.model
    }

    fn sample(&self, x: f64) -> Result<Sample, RabiError> {
        g_pm(&self.model, self.parity, x, self.n_trunc).map(|s| Sample::plain(s.value))
    }

    fn method(&self) -> &'static str {
        "Gpm"
    }
}

/// Zeros of one parity sector.
pub fn g_spectrum(
    model: &RabiModel,
    cfg: &ScanConfig,
    parity: Parity,
) -> Result<SpectrumResult, ScanError> {
    let model = model.with_pole_margin(cfg.pole_margin)?;
    scan_spectrum(&GFunction::new(model, parity), cfg)
}

/// Zeros of both sectors merged in ascending order.
pub fn g_union_spectrum(model: &RabiModel, cfg: &ScanConfig) -> Result<SpectrumResult, ScanError> {
    let mut plus = g_spectrum(model, cfg, Parity::Plus)?;
    let minus = g_spectrum(model, cfg, Parity::Minus)?;
    plus.zeros.extend(minus.zeros);
    plus.zeros.sort_by(|a, b| a.x.total_cmp(&b.x));
    plus.nonconverged.extend(minus.nonconverged);
    plus.nonconverged.sort_by(f64::total_cmp);
    plus.failures.extend(minus.failures);
    Ok(plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rabi::RabiParams;

    fn model(g: f64, delta: f64) -> RabiModel {
        RabiModel::new(RabiParams::new(g, delta, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn parities_coincide_without_splitting() {
        let m = model(0.7, 0.0);
        for x in [-0.3, 0.2, 0.7, 1.6] {
            let p = g_pm(&m, Parity::Plus, x, 64).unwrap().value;
            let q = g_pm(&m, Parity::Minus, x, 64).unwrap().value;
            assert_eq!(p, q);
        }
    }

    #[test]
    fn truncation_difference_is_third_term() {
        let m = model(0.05, 0.4);
        let x = 0.5;
        for parity in [Parity::Plus, Parity::Minus] {
            let two = g_pm(&m, parity, x, 2).unwrap().value;
            let three = g_pm(&m, parity, x, 3).unwrap().value;
            let f0 = m.f_n(0, x).unwrap();
            let f1 = m.f_n(1, x).unwrap();
            let k2 = (f1 * f0 - 1.0) / 2.0;
            let term = k2 * (1.0 - parity.sign() * 0.4 / (x - 2.0)) * 0.05 * 0.05;
            assert!(((three - two) - term).abs() <= 1e-15 * (1.0 + term.abs()));
        }
    }

    #[test]
    fn early_stop() {
        let s = g_pm(&model(0.7, 0.4), Parity::Plus, 0.5, 1000).unwrap();
        assert!(s.truncation < 1000);
    }

    #[test]
    fn growing_terms_rejected() {
        // omega = 4: K_{n+1} g / K_n tends to omega / 2 = 2
        let m = RabiModel::new(RabiParams::new(0.7, 0.4, 4.0).unwrap()).unwrap();
        assert!(matches!(
            g_pm(&m, Parity::Plus, 0.5, 64),
            Err(RabiError::SeriesDiverged { .. })
        ));
    }

    #[test]
    fn pole_and_truncation_errors() {
        let m = model(0.7, 0.4);
        assert!(matches!(
            g_pm(&m, Parity::Plus, 1.0, 64),
            Err(RabiError::Pole { n: 1, .. })
        ));
        assert!(g_pm(&m, Parity::Plus, 0.5, 1).is_err());
    }

    #[test]
    fn empty_window() {
        let m = model(0.7, 0.4);
        let cfg = ScanConfig::new(&m.params, 0.3, 0.3 + 1e-9);
        assert!(g_spectrum(&m, &cfg, Parity::Minus)
            .unwrap()
            .zeros
            .is_empty());
    }
}
