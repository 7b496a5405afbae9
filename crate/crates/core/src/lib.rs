//! Regular spectrum of the quantum Rabi model as the zeros of
//! `F0(x) = f0(x) - r0(x)`, where `r0` is the leading ratio of the minimal
//! solution of the Bargmann-space three-term recurrence.
//!
//! The crate is layered bottom-up:
//!
//! - [`recurrence`]: generic minimal-solution machinery (continued fraction,
//!   Euler series, Miller recursion)
//! - [`rabi`]: the model-specific coefficients and `F0`
//! - [`spectrum`]: the pole-aware bracketing scanner
//! - [`oracle`]: truncated Fock-space diagonalization used as an independent
//!   reference
//! - `gfunction` (feature `gfunction`): the parity-resolved `G±` functions
//!
//! Interchangeable algorithms sit behind traits with name-keyed registries:
//! [`ratio::ratio_methods`] and [`method::spectrum_methods`].

pub mod eigen;
#[cfg(feature = "gfunction")]
pub mod gfunction;
pub mod method;
pub mod oracle;
pub mod rabi;
pub mod ratio;
pub mod recurrence;
pub mod registry;
pub mod spectral;
pub mod spectrum;

pub use rabi::{
    f0_function, f_n, poles_in, rabi_coefficients, PoleSet, RabiError, RabiModel, RabiParams,
    SpectralPoint,
};
pub use recurrence::{
    cf_truncated_ratio, euler_series_ratio, minimal_ratio, minimal_sequence, MinimalRatioResult,
    MinimalSequence, Recurrence, RecurrenceError, ToleranceConfig,
};
pub use spectrum::{bracket_roots, find_spectrum, refine_root, ScanConfig, SpectrumResult};
