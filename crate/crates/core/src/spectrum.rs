//! Pole-aware root scanning.
//!
//! The window is split at the baselines `n omega` into open intervals, each
//! shrunk by the pole margin. Every interval is sampled on a uniform grid
//! and adjacent samples whose *oriented* values differ in sign form a
//! bracket, which bisection then narrows to `root_tol`.
//!
//! For `F0` the orientation is the sign of the unnormalized `c0`. This keeps
//! the scanned quantity continuous across the points where `r0 = c1 / c0`
//! diverges; those show up only as sign flips of the raw value and are
//! reported as `pseudo_poles`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rabi::{RabiError, RabiModel, RabiParams, SpectralPoint};
use crate::recurrence::ToleranceConfig;
use crate::spectral::{F0Function, Sample, SpectralFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("invalid scan configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] RabiError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub xmin: f64,
    pub xmax: f64,
    /// Samples per unit of `omega`.
    pub grid_per_unit: usize,
    pub root_tol: f64,
    pub pole_margin: f64,
    pub max_bisections: usize,
}

impl ScanConfig {
    pub fn new(params: &RabiParams, xmin: f64, xmax: f64) -> Self {
        Self {
            xmin,
            xmax,
            grid_per_unit: 200,
            root_tol: 1e-10,
            pole_margin: params.default_pole_margin(),
            max_bisections: 200,
        }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        let bad = |m: String| Err(ScanError::InvalidConfig(m));
        if !(self.xmin.is_finite() && self.xmax.is_finite()) || self.xmin >= self.xmax {
            return bad(format!(
                "need xmin < xmax, got [{}, {}]",
                self.xmin, self.xmax
            ));
        }
        if self.grid_per_unit < 2 {
            return bad(format!(
                "grid_per_unit must be >= 2, got {}",
                self.grid_per_unit
            ));
        }
        if self.root_tol.is_nan() || self.root_tol <= 0.0 {
            return bad(format!("root_tol must be positive, got {}", self.root_tol));
        }
        if !(self.pole_margin > 0.0 && self.pole_margin.is_finite()) {
            return bad(format!(
                "pole_margin must be positive, got {}",
                self.pole_margin
            ));
        }
        Ok(())
    }
}

/// A bracket that bisection could not finish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefineFailure {
    pub bracket: (f64, f64),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub method: String,
    pub zeros: Vec<SpectralPoint>,
    /// Sub-ranges excluded around baselines.
    pub skipped_intervals: Vec<(f64, f64)>,
    /// Grid points where the function could not be evaluated.
    pub nonconverged: Vec<f64>,
    /// Grid cells where the raw value flips sign through a divergence.
    pub pseudo_poles: Vec<(f64, f64)>,
    pub failures: Vec<RefineFailure>,
}

impl SpectrumResult {
    fn empty(method: &str) -> Self {
        Self {
            method: method.to_string(),
            zeros: Vec::new(),
            skipped_intervals: Vec::new(),
            nonconverged: Vec::new(),
            pseudo_poles: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.x).collect()
    }
}

type Span = (f64, f64);

/// Pole-free sub-intervals of the window plus the excluded pieces.
pub fn scan_intervals(model: &RabiModel, cfg: &ScanConfig) -> (Vec<Span>, Vec<Span>) {
    let margin = cfg.pole_margin;
    let omega = model.params.omega;
    let extended = model.poles_in(cfg.xmin - margin, cfg.xmax + margin);
    let mut intervals = Vec::new();
    let mut skipped = Vec::new();
    let mut lo = cfg.xmin;
    for &p in &extended.poles {
        let hi = (p - margin).min(cfg.xmax);
        if lo < hi {
            intervals.push((lo, hi));
        }
        let gap = ((p - margin).max(cfg.xmin), (p + margin).min(cfg.xmax));
        if gap.0 <= gap.1 {
            skipped.push(gap);
        }
        lo = lo.max(p + margin);
    }
    if lo < cfg.xmax {
        intervals.push((lo, cfg.xmax));
    }
    debug_assert!(omega > 0.0);
    (intervals, skipped)
}

fn grid(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let cells = ((hi - lo) / spacing).ceil().max(1.0) as usize;
    let step = (hi - lo) / cells as f64;
    let mut xs: Vec<f64> = (0..cells).map(|i| lo + i as f64 * step).collect();
    xs.push(hi);
    xs
}

/// Brackets plus the diagnostics collected while sampling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bracketing {
    pub brackets: Vec<(f64, f64)>,
    pub skipped_intervals: Vec<(f64, f64)>,
    pub nonconverged: Vec<f64>,
    pub pseudo_poles: Vec<(f64, f64)>,
}

/// Samples `func` on every pole-free interval of the window and collects
/// adjacent pairs whose oriented values change sign strictly.
pub fn bracket_with(
    func: &dyn SpectralFunction,
    cfg: &ScanConfig,
) -> Result<Bracketing, ScanError> {
    cfg.validate()?;
    let model = func.model().with_pole_margin(cfg.pole_margin)?;
    let (intervals, skipped) = scan_intervals(&model, cfg);
    let spacing = model.params.omega / cfg.grid_per_unit as f64;
    let mut out = Bracketing {
        skipped_intervals: skipped,
        ..Bracketing::default()
    };
    for (lo, hi) in intervals {
        let xs = grid(lo, hi, spacing);
        let samples: Vec<Result<Sample, RabiError>> =
            xs.par_iter().map(|&x| func.sample(x)).collect();
        for (x, s) in xs.iter().zip(&samples) {
            match s {
                Ok(s) if s.value.is_finite() => {
                    if s.value == 0.0 {
                        out.brackets.push((*x, *x));
                    }
                }
                // interval ends sit on the margin itself; rounding may put them inside
                Err(RabiError::Pole { .. }) => {}
                _ => out.nonconverged.push(*x),
            }
        }
        for i in 0..xs.len().saturating_sub(1) {
            let (Ok(left), Ok(right)) = (&samples[i], &samples[i + 1]) else {
                continue;
            };
            if !(left.value.is_finite() && right.value.is_finite()) {
                continue;
            }
            if left.oriented() * right.oriented() < 0.0 {
                out.brackets.push((xs[i], xs[i + 1]));
            } else if left.value * right.value < 0.0 {
                out.pseudo_poles.push((xs[i], xs[i + 1]));
            }
        }
    }
    out.brackets.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Brackets of `F0` with default ratio tolerances.
pub fn bracket_roots(params: &RabiParams, cfg: &ScanConfig) -> Result<Vec<(f64, f64)>, ScanError> {
    let model = RabiModel::new(*params)?.with_pole_margin(cfg.pole_margin)?;
    let f0 = F0Function::new(model, ToleranceConfig::default());
    bracket_with(&f0, cfg).map(|b| b.brackets)
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("refinement of [{}, {}] failed: {source}", .bracket.0, .bracket.1)]
pub struct RefineError {
    pub bracket: (f64, f64),
    pub source: RabiError,
}

/// Bisects a bracket of `func` down to `root_tol`.
pub fn refine_with(
    func: &dyn SpectralFunction,
    lo: f64,
    hi: f64,
    cfg: &ScanConfig,
) -> Result<SpectralPoint, RefineError> {
    let fail = |source| RefineError {
        bracket: (lo, hi),
        source,
    };
    let params = func.model().params;
    if lo == hi {
        let s = func.sample(lo).map_err(fail)?;
        return Ok(SpectralPoint {
            x: lo,
            energy: params.energy(lo),
            residual: s.value.abs(),
            bracket: (lo, hi),
        });
    }
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let left = func.sample(a).map_err(fail)?.oriented();
    let right = func.sample(b).map_err(fail)?.oriented();
    if left * right >= 0.0 || (left * right).is_nan() {
        return Err(fail(RabiError::InvalidParams(format!(
            "no sign change on [{a}, {b}]"
        ))));
    }
    let mut steps = 0;
    while b - a > cfg.root_tol {
        if steps == cfg.max_bisections {
            return Err(fail(RabiError::InvalidParams(format!(
                "bisection budget of {} steps exhausted at width {:e}",
                cfg.max_bisections,
                b - a
            ))));
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let m = func.sample(mid).map_err(fail)?.oriented();
        if m == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if (m < 0.0) == (left < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
        steps += 1;
    }
    let x = 0.5 * (a + b);
    let residual = func.sample(x).map_err(fail)?.value.abs();
    Ok(SpectralPoint {
        x,
        energy: params.energy(x),
        residual,
        bracket: (a, b),
    })
}

/// Refines one `F0` bracket with default ratio tolerances.
pub fn refine_root(
    params: &RabiParams,
    lo: f64,
    hi: f64,
    cfg: &ScanConfig,
) -> Result<SpectralPoint, RefineError> {
    let model = RabiModel::new(*params)
        .and_then(|m| m.with_pole_margin(cfg.pole_margin))
        .map_err(|source| RefineError {
            bracket: (lo, hi),
            source,
        })?;
    refine_with(
        &F0Function::new(model, ToleranceConfig::default()),
        lo,
        hi,
        cfg,
    )
}

/// Full scan of `func`: brackets, refinement, sorted zeros.
pub fn scan_spectrum(
    func: &dyn SpectralFunction,
    cfg: &ScanConfig,
) -> Result<SpectrumResult, ScanError> {
    let bracketing = bracket_with(func, cfg)?;
    let refined: Vec<Result<SpectralPoint, RefineError>> = bracketing
        .brackets
        .par_iter()
        .map(|&(lo, hi)| refine_with(func, lo, hi, cfg))
        .collect();
    let mut result = SpectrumResult::empty(func.method());
    result.skipped_intervals = bracketing.skipped_intervals;
    result.nonconverged = bracketing.nonconverged;
    result.pseudo_poles = bracketing.pseudo_poles;
    for r in refined {
        match r {
            Ok(p) => result.zeros.push(p),
            Err(e) => result.failures.push(RefineFailure {
                bracket: e.bracket,
                reason: e.source.to_string(),
            }),
        }
    }
    result.zeros.sort_by(|a, b| a.x.total_cmp(&b.x));
    // a grid point that is itself a zero also borders sign-change cells
    result
        .zeros
        .dedup_by(|a, b| (a.x - b.x).abs() <= cfg.root_tol);
    Ok(result)
}

/// Regular spectrum from the zeros of `F0` on `[xmin, xmax]`.
pub fn find_spectrum(params: &RabiParams, cfg: &ScanConfig) -> Result<SpectrumResult, ScanError> {
    find_spectrum_with(params, cfg, &ToleranceConfig::default())
}

pub fn find_spectrum_with(
    params: &RabiParams,
    cfg: &ScanConfig,
    tol: &ToleranceConfig,
) -> Result<SpectrumResult, ScanError> {
    let model = RabiModel::new(*params)?.with_pole_margin(cfg.pole_margin)?;
    scan_spectrum(&F0Function::new(model, *tol), cfg)
}
