//! Three-term recurrences `y[n+1] + a(n) y[n] + b(n) y[n-1] = 0` and their
//! minimal solutions.
//!
//! The minimal solution is the one (unique up to scale) with
//! `y[n+1] / y[n] -> 0`. Its leading ratio `r0 = c1 / c0` is the value of the
//! continued fraction
//!
//! ```text
//! r0 = -b(1) / (a(1) - b(2) / (a(2) - b(3) / (a(3) - ...)))
//! ```
//!
//! which this module evaluates in two independent ways: backward truncation
//! of the fraction ([`cf_truncated_ratio`], [`minimal_ratio`]) and the Euler
//! series of convergent differences ([`euler_series_ratio`]). Coefficient
//! sequences are reconstructed by normalized backward recursion
//! ([`minimal_sequence`]).

use serde::Serialize;
use thiserror::Error;

/// Failure reported by a coefficient provider for a single index.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoefficientError {
    #[error("coefficient at index {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("coefficient at index {index} is evaluated within {distance:e} of its pole")]
    Pole { index: usize, distance: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecurrenceError {
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error("b({index}) vanishes, the recurrence degenerates")]
    VanishingB { index: usize },
    #[error("a(1) = 0: the first convergent has no denominator")]
    DegenerateHead,
    #[error("backward recursion produced c0 = 0 up to depth {depth}; cannot normalize")]
    DegenerateNormalization { depth: usize },
    #[error("leading entries still moving at depth {depth}")]
    SequenceNotStable { depth: usize },
    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Coefficients `a(n)`, `b(n)` for `n >= 1`.
///
/// Providers are evaluated lazily, index by index, so a provider that is
/// singular at some index only fails if that index is actually reached.
pub trait Recurrence: Sync {
    fn a(&self, n: usize) -> Result<f64, CoefficientError>;
    fn b(&self, n: usize) -> Result<f64, CoefficientError>;

    fn description(&self) -> String {
        String::from("three-term recurrence")
    }
}

impl<R: Recurrence + ?Sized> Recurrence for &R {
    fn a(&self, n: usize) -> Result<f64, CoefficientError> {
        (**self).a(n)
    }
    fn b(&self, n: usize) -> Result<f64, CoefficientError> {
        (**self).b(n)
    }
    fn description(&self) -> String {
        (**self).description()
    }
}

/// `a(n) = a`, `b(n) = b` for every `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCoefficients {
    pub a: f64,
    pub b: f64,
}

impl Recurrence for ConstantCoefficients {
    fn a(&self, _n: usize) -> Result<f64, CoefficientError> {
        Ok(self.a)
    }
    fn b(&self, _n: usize) -> Result<f64, CoefficientError> {
        Ok(self.b)
    }
    fn description(&self) -> String {
        format!("constant coefficients a = {}, b = {}", self.a, self.b)
    }
}

/// Coefficients given by two closures.
pub struct FnCoefficients<A, B> {
    a: A,
    b: B,
    label: String,
}

impl<A, B> FnCoefficients<A, B>
where
    A: Fn(usize) -> f64 + Sync,
    B: Fn(usize) -> f64 + Sync,
{
    pub fn new(label: impl Into<String>, a: A, b: B) -> Self {
        Self {
            a,
            b,
            label: label.into(),
        }
    }
}

impl<A, B> Recurrence for FnCoefficients<A, B>
where
    A: Fn(usize) -> f64 + Sync,
    B: Fn(usize) -> f64 + Sync,
{
    fn a(&self, n: usize) -> Result<f64, CoefficientError> {
        Ok((self.a)(n))
    }
    fn b(&self, n: usize) -> Result<f64, CoefficientError> {
        Ok((self.b)(n))
    }
    fn description(&self) -> String {
        self.label.clone()
    }
}

/// Index-shifted view: `a'(n) = a(n + shift)`, `b'(n) = b(n + shift)`.
///
/// The minimal ratio of the shifted recurrence is `r[shift]` of the original.
#[derive(Debug, Clone, Copy)]
pub struct Shifted<R> {
    pub inner: R,
    pub shift: usize,
}

impl<R: Recurrence> Recurrence for Shifted<R> {
    fn a(&self, n: usize) -> Result<f64, CoefficientError> {
        self.inner.a(n + self.shift)
    }
    fn b(&self, n: usize) -> Result<f64, CoefficientError> {
        self.inner.b(n + self.shift)
    }
    fn description(&self) -> String {
        format!("{} shifted by {}", self.inner.description(), self.shift)
    }
}

/// Truncation and convergence controls shared by the ratio methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub n_start: usize,
    pub n_max: usize,
    pub tiny_floor: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            n_start: 128,
            n_max: 1 << 20,
            tiny_floor: 1e-300,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), RecurrenceError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(RecurrenceError::InvalidTolerance(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.n_start < 1 || self.n_start > self.n_max {
            return Err(RecurrenceError::InvalidTolerance(format!(
                "need 1 <= n_start <= n_max, got n_start = {}, n_max = {}",
                self.n_start, self.n_max
            )));
        }
        if self.tiny_floor.is_nan() || self.tiny_floor <= 0.0 {
            return Err(RecurrenceError::InvalidTolerance(format!(
                "tiny_floor must be positive, got {}",
                self.tiny_floor
            )));
        }
        Ok(())
    }

    fn accepts(&self, delta: f64, value: f64) -> bool {
        delta <= self.rel_tol * (1.0 + value.abs())
    }
}

/// A minimal-solution ratio together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalRatioResult {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
    pub est_error: f64,
    /// Denominators replaced by the sign-preserving floor.
    pub floor_events: usize,
}

/// Normalized minimal solution `c[0] = 1, c[1], ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalSequence {
    pub c: Vec<f64>,
    pub normalization: &'static str,
    pub depth: usize,
    /// Cancellation factor of the final downward step that produced `c[0]`.
    /// Entries are reproducible only to about `condition * EPSILON`.
    pub condition: f64,
}

impl MinimalSequence {
    /// Largest interior residual `|c[n+1] + a(n) c[n] + b(n) c[n-1]|`, each
    /// scaled by the magnitude of its largest term.
    pub fn max_scaled_residual<R: Recurrence + ?Sized>(
        &self,
        coeffs: &R,
    ) -> Result<f64, RecurrenceError> {
        let mut worst = 0.0f64;
        for n in 1..self.c.len().saturating_sub(1) {
            let next = self.c[n + 1];
            let mid = checked(n, coeffs.a(n)?)? * self.c[n];
            let prev = checked(n, coeffs.b(n)?)? * self.c[n - 1];
            let scale = next.abs().max(mid.abs()).max(prev.abs());
            if scale > 0.0 {
                worst = worst.max((next + mid + prev).abs() / scale);
            }
        }
        Ok(worst)
    }
}

fn checked(index: usize, value: f64) -> Result<f64, CoefficientError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CoefficientError::NonFinite { index, value })
    }
}

fn floored(value: f64, tiny: f64, events: &mut usize) -> f64 {
    if value.abs() < tiny {
        *events += 1;
        if value.is_sign_negative() {
            -tiny
        } else {
            tiny
        }
    } else {
        value
    }
}

/// One backward pass through the truncated continued fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardSweep {
    /// Truncated ratio `r0` at the requested depth.
    pub value: f64,
    /// Sign of `y[0]` for the trial solution `y[N+1] = 0`, `y[N] = 1`.
    ///
    /// `y[0]` is a continuous function of the coefficients at fixed depth,
    /// so the product `sign * (f - r0)` stays continuous across the points
    /// where `r0` blows up.
    pub leading_sign: f64,
    pub floor_events: usize,
}

/// Backward evaluation `r[k-1] = -b(k) / (a(k) + r[k])` from `r[N] = 0`.
pub fn backward_sweep<R: Recurrence + ?Sized>(
    coeffs: &R,
    n_trunc: usize,
    tiny_floor: f64,
) -> Result<BackwardSweep, RecurrenceError> {
    if n_trunc < 1 {
        return Err(RecurrenceError::InvalidArgument(
            "truncation depth must be at least 1".into(),
        ));
    }
    let mut r = 0.0;
    let mut sign = 1.0;
    let mut events = 0;
    for k in (1..=n_trunc).rev() {
        let a = checked(k, coeffs.a(k)?)?;
        let b = checked(k, coeffs.b(k)?)?;
        if b == 0.0 {
            return Err(RecurrenceError::VanishingB { index: k });
        }
        let denom = floored(a + r, tiny_floor, &mut events);
        r = -b / denom;
        if r < 0.0 {
            sign = -sign;
        }
    }
    Ok(BackwardSweep {
        value: r,
        leading_sign: sign,
        floor_events: events,
    })
}

/// The `n_trunc`-term truncation of the continued fraction for `r0`.
pub fn cf_truncated_ratio<R: Recurrence + ?Sized>(
    coeffs: &R,
    n_trunc: usize,
    tiny_floor: f64,
) -> Result<f64, RecurrenceError> {
    backward_sweep(coeffs, n_trunc, tiny_floor).map(|s| s.value)
}

/// All ratios `r[0], ..., r[n_trunc - 1]` of one backward pass from depth
/// `n_trunc`.
pub fn downward_ratios<R: Recurrence + ?Sized>(
    coeffs: &R,
    n_trunc: usize,
    tiny_floor: f64,
) -> Result<Vec<f64>, RecurrenceError> {
    if n_trunc < 1 {
        return Err(RecurrenceError::InvalidArgument(
            "truncation depth must be at least 1".into(),
        ));
    }
    let mut ratios = vec![0.0; n_trunc];
    let mut r = 0.0;
    let mut events = 0;
    for k in (1..=n_trunc).rev() {
        let a = checked(k, coeffs.a(k)?)?;
        let b = checked(k, coeffs.b(k)?)?;
        if b == 0.0 {
            return Err(RecurrenceError::VanishingB { index: k });
        }
        r = -b / floored(a + r, tiny_floor, &mut events);
        ratios[k - 1] = r;
    }
    Ok(ratios)
}

/// Adaptive continued-fraction evaluation of the minimal ratio `r0`.
///
/// The depth doubles from `n_start`; convergence needs two consecutive
/// doublings that each move the value by at most `rel_tol * (1 + |r0|)`.
/// Running out of depth is reported through `converged = false`.
pub fn minimal_ratio<R: Recurrence + ?Sized>(
    coeffs: &R,
    tol: &ToleranceConfig,
) -> Result<MinimalRatioResult, RecurrenceError> {
    minimal_ratio_sweep(coeffs, tol).map(|(result, _)| result)
}

/// [`minimal_ratio`] that also returns the final backward sweep.
pub fn minimal_ratio_sweep<R: Recurrence + ?Sized>(
    coeffs: &R,
    tol: &ToleranceConfig,
) -> Result<(MinimalRatioResult, BackwardSweep), RecurrenceError> {
    tol.validate()?;
    let mut depth = tol.n_start;
    let mut sweep = backward_sweep(coeffs, depth, tol.tiny_floor)?;
    let mut events = sweep.floor_events;
    let mut est_error = f64::INFINITY;
    let mut small_deltas = 0;
    while depth <= tol.n_max / 2 {
        depth *= 2;
        let next = backward_sweep(coeffs, depth, tol.tiny_floor)?;
        events += next.floor_events;
        est_error = (next.value - sweep.value).abs();
        sweep = next;
        if tol.accepts(est_error, sweep.value) {
            small_deltas += 1;
            if small_deltas == 2 {
                let result = MinimalRatioResult {
                    value: sweep.value,
                    terms_used: depth,
                    converged: true,
                    est_error,
                    floor_events: events,
                };
                return Ok((result, sweep));
            }
        } else {
            small_deltas = 0;
        }
    }
    let result = MinimalRatioResult {
        value: sweep.value,
        terms_used: depth,
        converged: false,
        est_error,
        floor_events: events,
    };
    Ok((result, sweep))
}

/// Minimal ratio `r0` as the Euler series of convergent differences.
///
/// With `s[1] = a(1)`, `s[k+1] = a(k+1) - b(k+1) / s[k]`,
/// `p[1] = -b(1) / a(1)` and `p[k+1] = b(k+1) / (s[k] s[k+1])`, the value is
/// `r0 = p[1] + p[1] p[2] + p[1] p[2] p[3] + ...`. Summation stops after two
/// consecutive terms below `rel_tol * (1 + |sum|)`.
pub fn euler_series_ratio<R: Recurrence + ?Sized>(
    coeffs: &R,
    tol: &ToleranceConfig,
) -> Result<MinimalRatioResult, RecurrenceError> {
    tol.validate()?;
    let a1 = checked(1, coeffs.a(1)?)?;
    let b1 = checked(1, coeffs.b(1)?)?;
    if b1 == 0.0 {
        return Err(RecurrenceError::VanishingB { index: 1 });
    }
    if a1 == 0.0 {
        return Err(RecurrenceError::DegenerateHead);
    }
    let mut events = 0;
    let mut sigma = floored(a1, tol.tiny_floor, &mut events);
    let mut term = -b1 / sigma;
    let mut sum = term;
    let mut small_terms = usize::from(tol.accepts(term.abs(), sum));
    let mut k = 1;
    while k < tol.n_max {
        let a = checked(k + 1, coeffs.a(k + 1)?)?;
        let b = checked(k + 1, coeffs.b(k + 1)?)?;
        if b == 0.0 {
            return Err(RecurrenceError::VanishingB { index: k + 1 });
        }
        let next_sigma = floored(a - b / sigma, tol.tiny_floor, &mut events);
        term *= b / (sigma * next_sigma);
        sigma = next_sigma;
        sum += term;
        k += 1;
        if tol.accepts(term.abs(), sum) {
            small_terms += 1;
            if small_terms == 2 {
                return Ok(MinimalRatioResult {
                    value: sum,
                    terms_used: k,
                    converged: true,
                    est_error: term.abs(),
                    floor_events: events,
                });
            }
        } else {
            small_terms = 0;
        }
    }
    Ok(MinimalRatioResult {
        value: sum,
        terms_used: k,
        converged: false,
        est_error: term.abs(),
        floor_events: events,
    })
}

// Trial values are rescaled by this factor whenever they exceed its inverse.
const RESCALE: f64 = 1e-200;

fn miller_pass<R: Recurrence + ?Sized>(
    coeffs: &R,
    n_len: usize,
    depth: usize,
) -> Result<Option<(Vec<f64>, f64)>, RecurrenceError> {
    let mut head = vec![0.0; n_len];
    let mut condition = 1.0;
    // y[depth + 1] = 0, y[depth] = 1
    let mut upper = 0.0;
    let mut current = 1.0;
    if depth < n_len {
        head[depth] = current;
    }
    for n in (1..=depth).rev() {
        let a = checked(n, coeffs.a(n)?)?;
        let b = checked(n, coeffs.b(n)?)?;
        if b == 0.0 {
            return Err(RecurrenceError::VanishingB { index: n });
        }
        let lower = -(upper + a * current) / b;
        if n == 1 {
            condition = (upper.abs() + (a * current).abs()) / (upper + a * current).abs();
        }
        upper = current;
        current = lower;
        if n - 1 < n_len {
            head[n - 1] = current;
        }
        if current.abs() > 1.0 / RESCALE {
            upper *= RESCALE;
            current *= RESCALE;
            for v in head.iter_mut().skip(n - 1) {
                *v *= RESCALE;
            }
        }
    }
    let c0 = head[0];
    if c0 == 0.0 || !c0.is_finite() {
        return Ok(None);
    }
    for v in &mut head {
        *v /= c0;
    }
    Ok(Some((head, condition)))
}

/// The first `n_len` coefficients of the minimal solution, normalized to
/// `c[0] = 1`, by backward (Miller) recursion from an adaptively doubled
/// depth.
pub fn minimal_sequence<R: Recurrence + ?Sized>(
    coeffs: &R,
    n_len: usize,
    tol: &ToleranceConfig,
) -> Result<MinimalSequence, RecurrenceError> {
    tol.validate()?;
    if n_len < 2 {
        return Err(RecurrenceError::InvalidArgument(format!(
            "sequence length must be at least 2, got {n_len}"
        )));
    }
    let mut depth = tol.n_start.max(2 * n_len);
    let mut previous: Option<Vec<f64>> = None;
    let mut last_degenerate = None;
    while depth <= tol.n_max {
        match miller_pass(coeffs, n_len, depth)? {
            None => {
                last_degenerate = Some(depth);
                previous = None;
            }
            Some((current, condition)) => {
                if let Some(prev) = &previous {
                    // rel_tol cannot beat the rounding floor of the last step
                    let rel = tol.rel_tol.max(8.0 * f64::EPSILON * condition);
                    let stable = prev
                        .iter()
                        .zip(&current)
                        .all(|(p, c)| (p - c).abs() <= rel * c.abs().max(tol.tiny_floor));
                    if stable {
                        return Ok(MinimalSequence {
                            c: current,
                            normalization: "c0=1",
                            depth,
                            condition,
                        });
                    }
                }
                previous = Some(current);
            }
        }
        depth *= 2;
    }
    Err(match last_degenerate {
        Some(depth) => RecurrenceError::DegenerateNormalization { depth },
        None => RecurrenceError::SequenceNotStable { depth: depth / 2 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric() -> ConstantCoefficients {
        // roots of t^2 - 5/2 t + 1: 2 and 1/2
        ConstantCoefficients { a: -2.5, b: 1.0 }
    }

    #[test]
    fn constant_coefficients_truncated() {
        let r = cf_truncated_ratio(&geometric(), 60, 1e-300).unwrap();
        assert!((r - 0.5).abs() < 1e-12, "{r}");
    }

    #[test]
    fn depth_one_is_a_single_quotient() {
        let c = FnCoefficients::new("t", |n| n as f64 + 1.5, |_| 3.0);
        let r = cf_truncated_ratio(&c, 1, 1e-300).unwrap();
        assert_eq!(r, -3.0 / 2.5);
    }

    #[test]
    fn zero_depth_rejected() {
        assert!(matches!(
            cf_truncated_ratio(&geometric(), 0, 1e-300),
            Err(RecurrenceError::InvalidArgument(_))
        ));
    }

    #[test]
    fn non_finite_coefficient_names_index() {
        let c = FnCoefficients::new("bad", |n| if n == 7 { f64::NAN } else { -3.0 }, |_| 1.0);
        match cf_truncated_ratio(&c, 20, 1e-300).unwrap_err() {
            RecurrenceError::Coefficient(CoefficientError::NonFinite { index, .. }) => {
                assert_eq!(index, 7)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vanishing_b_rejected() {
        let c = FnCoefficients::new("b0", |_| -3.0, |n| if n == 4 { 0.0 } else { 1.0 });
        assert_eq!(
            cf_truncated_ratio(&c, 10, 1e-300),
            Err(RecurrenceError::VanishingB { index: 4 })
        );
    }

    #[test]
    fn tiny_floor_counts_events_and_keeps_sign() {
        // a(1) + r1 = 0 exactly at depth 1 when a(1) = 0.
        let c = FnCoefficients::new("pseudo-pole", |n| if n == 1 { 0.0 } else { -3.0 }, |_| 1.0);
        let s = backward_sweep(&c, 1, 1e-300).unwrap();
        assert_eq!(s.floor_events, 1);
        assert!((s.value / -1e300 - 1.0).abs() < 1e-15, "{}", s.value);
    }

    #[test]
    fn minimal_ratio_constant() {
        let res = minimal_ratio(&geometric(), &ToleranceConfig::default()).unwrap();
        assert!(res.converged);
        assert!((res.value - 0.5).abs() < 1e-12);
        assert!(res.est_error <= 1e-12 * 1.5);
    }

    #[test]
    fn minimal_ratio_flags_exhausted_depth() {
        // a(n) = -2, b(n) = 1 has a double root: no minimal solution, the
        // truncated fraction creeps towards 1 like 1 - 1/N.
        let c = ConstantCoefficients { a: -2.0, b: 1.0 };
        let tol = ToleranceConfig {
            n_max: 1 << 12,
            ..ToleranceConfig::default()
        };
        let res = minimal_ratio(&c, &tol).unwrap();
        assert!(!res.converged);
        assert!(res.terms_used <= tol.n_max);
        assert!(res.est_error > 0.0);
    }

    #[test]
    fn euler_first_terms_constant() {
        // p1 = 0.4, s2 = -2.1, p2 = 1 / (2.5 * 2.1)
        let tol = ToleranceConfig {
            n_start: 1,
            n_max: 2,
            ..ToleranceConfig::default()
        };
        let res = euler_series_ratio(&geometric(), &tol).unwrap();
        let expected = 0.4 + 0.4 / (2.5 * 2.1);
        assert!((res.value - expected).abs() < 1e-15);
        assert!(!res.converged);
        let full = euler_series_ratio(&geometric(), &ToleranceConfig::default()).unwrap();
        assert!(full.converged);
        assert!((full.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn euler_degenerate_head() {
        let c = FnCoefficients::new("head", |n| if n == 1 { 0.0 } else { -3.0 }, |_| 1.0);
        assert_eq!(
            euler_series_ratio(&c, &ToleranceConfig::default()),
            Err(RecurrenceError::DegenerateHead)
        );
    }

    #[test]
    fn geometric_sequence() {
        let seq = minimal_sequence(&geometric(), 5, &ToleranceConfig::default()).unwrap();
        for (n, c) in seq.c.iter().enumerate() {
            assert!((c - 0.5f64.powi(n as i32)).abs() < 1e-10, "c[{n}] = {c}");
        }
        assert_eq!(seq.normalization, "c0=1");
    }

    #[test]
    fn sequence_length_checked() {
        assert!(minimal_sequence(&geometric(), 1, &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn miller_survives_overflowing_trial_values() {
        // Bessel-type growth: y[0] ~ N! when started from y[N] = 1.
        let c = FnCoefficients::new("bessel z=1", |n| -2.0 * n as f64, |_| 1.0);
        let seq = minimal_sequence(&c, 4, &ToleranceConfig::default()).unwrap();
        assert!(seq.depth >= 256);
        assert!(seq.c.iter().all(|v| v.is_finite()));
        assert!(seq.max_scaled_residual(&c).unwrap() < 1e-13);
    }

    #[test]
    fn shifted_view() {
        let c = FnCoefficients::new("lin", |n| n as f64, |n| 2.0 * n as f64);
        let s = Shifted {
            inner: &c,
            shift: 3,
        };
        assert_eq!(s.a(1).unwrap(), 4.0);
        assert_eq!(s.b(2).unwrap(), 10.0);
    }

    #[test]
    fn tolerance_validation() {
        let bad = [
            ToleranceConfig {
                rel_tol: 0.0,
                ..Default::default()
            },
            ToleranceConfig {
                rel_tol: 1.0,
                ..Default::default()
            },
            ToleranceConfig {
                n_start: 0,
                ..Default::default()
            },
            ToleranceConfig {
                n_start: 10,
                n_max: 5,
                ..Default::default()
            },
            ToleranceConfig {
                tiny_floor: 0.0,
                ..Default::default()
            },
        ];
        for t in bad {
            assert!(t.validate().is_err(), "{t:?}");
        }
        ToleranceConfig::default().validate().unwrap();
    }
}
