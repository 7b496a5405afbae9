//! Spectrum methods selectable by name: `F0`, `Gpm` and `oracle`.

use thiserror::Error;

use crate::oracle::{self, OracleError};
use crate::rabi::{RabiModel, SpectralPoint};
use crate::ratio::{ContinuedFraction, RatioMethod};
use crate::recurrence::ToleranceConfig;
use crate::registry::{Named, Registry};
use crate::spectral::F0Function;
use crate::spectrum::{scan_spectrum, ScanConfig, ScanError, SpectrumResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MethodError {
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A complete route from parameters and a window to the regular spectrum.
pub trait SpectrumMethod: Named + Send + Sync {
    fn spectrum(
        &self,
        model: &RabiModel,
        cfg: &ScanConfig,
        tol: &ToleranceConfig,
    ) -> Result<SpectrumResult, MethodError>;
}

/// Zeros of `F0` with a pluggable ratio method.
pub struct F0Scan {
    pub ratio: Box<dyn RatioMethod>,
}

impl Default for F0Scan {
    fn default() -> Self {
        Self {
            ratio: Box::new(ContinuedFraction),
        }
    }
}

impl Named for F0Scan {
    fn name(&self) -> &'static str {
        "F0"
    }
}

impl SpectrumMethod for F0Scan {
    fn spectrum(
        &self,
        model: &RabiModel,
        cfg: &ScanConfig,
        tol: &ToleranceConfig,
    ) -> Result<SpectrumResult, MethodError> {
        tol.validate()
            .map_err(|e| ScanError::InvalidConfig(e.to_string()))?;
        let model = model
            .with_pole_margin(cfg.pole_margin)
            .map_err(ScanError::from)?;
        let f0 = F0Function::with_ratio(model, *tol, self.ratio.as_ref());
        Ok(scan_spectrum(&f0, cfg)?)
    }
}

/// Union of the `G+` and `G-` zeros.
#[cfg(feature = "gfunction")]
#[derive(Debug, Clone, Copy, Default)]
pub struct GpmScan;

#[cfg(feature = "gfunction")]
impl Named for GpmScan {
    fn name(&self) -> &'static str {
        "Gpm"
    }
}

#[cfg(feature = "gfunction")]
impl SpectrumMethod for GpmScan {
    fn spectrum(
        &self,
        model: &RabiModel,
        cfg: &ScanConfig,
        _tol: &ToleranceConfig,
    ) -> Result<SpectrumResult, MethodError> {
        Ok(crate::gfunction::g_union_spectrum(model, cfg)?)
    }
}

/// Truncated-basis diagonalization, filtered to the window and away from
/// the baselines.
#[derive(Debug, Clone, Copy)]
pub struct OracleScan {
    pub n_fock: usize,
}

impl Default for OracleScan {
    fn default() -> Self {
        Self { n_fock: 256 }
    }
}

impl Named for OracleScan {
    fn name(&self) -> &'static str {
        "oracle"
    }
}

impl SpectrumMethod for OracleScan {
    fn spectrum(
        &self,
        model: &RabiModel,
        cfg: &ScanConfig,
        _tol: &ToleranceConfig,
    ) -> Result<SpectrumResult, MethodError> {
        cfg.validate()?;
        let model = model
            .with_pole_margin(cfg.pole_margin)
            .map_err(ScanError::from)?;
        let levels = oracle::spectrum_at(&model.params, self.n_fock)?;
        let mut result = SpectrumResult {
            method: "oracle".into(),
            zeros: Vec::new(),
            skipped_intervals: Vec::new(),
            nonconverged: Vec::new(),
            pseudo_poles: Vec::new(),
            failures: Vec::new(),
        };
        for (&x, &energy) in levels.x_values.iter().zip(&levels.energies) {
            if x < cfg.xmin || x > cfg.xmax {
                continue;
            }
            if model.nearby_pole(x).is_some() {
                result.skipped_intervals.push((x, x));
                continue;
            }
            result.zeros.push(SpectralPoint {
                x,
                energy,
                residual: 0.0,
                bracket: (x, x),
            });
        }
        Ok(result)
    }
}

/// Registry with every built-in spectrum method.
pub fn spectrum_methods() -> Registry<dyn SpectrumMethod> {
    let mut reg: Registry<dyn SpectrumMethod> = Registry::new();
    reg.register(Box::new(F0Scan::default()));
    #[cfg(feature = "gfunction")]
    reg.register(Box::new(GpmScan));
    reg.register(Box::new(OracleScan::default()));
    reg
}
