//! Brute-force reference spectrum from a truncated Fock basis.
//!
//! `H = omega a^dag a + delta sigma_z + g sigma_x (a + a^dag)` on
//! `|n> (x) |s>`, `n = 0..=N`, `s = ±1`, with the basis interleaved as
//! `index = 2n + (0 for s = +1, 1 for s = -1)`. The coupling only links
//! `|n, s>` and `|n + 1, -s>`, so the matrix has bandwidth three.

use serde::Serialize;
use thiserror::Error;

use crate::eigen::{symmetric_eigenvalues, EigenError};
use crate::rabi::RabiParams;

/// Largest cutoff tried by [`converged_levels`].
pub const MAX_N_FOCK: usize = 4096;
/// First cutoff tried by [`converged_levels`].
pub const START_N_FOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
    #[error("lowest {k} levels not stable to {tol:e} below the cutoff cap of {cap} bosons")]
    Truncation { k: usize, tol: f64, cap: usize },
    #[error("eigensolver failure: {0}")]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedHamiltonian {
    pub params: RabiParams,
    pub n_fock: usize,
    pub dim: usize,
    /// Row-major `dim x dim`.
    pub entries: Vec<f64>,
}

impl TruncatedHamiltonian {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Max absolute row sum.
    pub fn norm(&self) -> f64 {
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpectrum {
    pub energies: Vec<f64>,
    /// `E + g^2 / omega`.
    pub x_values: Vec<f64>,
    pub n_fock: usize,
    /// Leading levels stable under the last cutoff doubling.
    pub converged_count: usize,
}

pub fn basis_index(n: usize, spin_up: bool) -> usize {
    2 * n + usize::from(!spin_up)
}

pub fn build_hamiltonian(
    params: &RabiParams,
    n_fock: usize,
) -> Result<TruncatedHamiltonian, OracleError> {
    let RabiParams { g, delta, omega } = *params;
    if n_fock < 1 {
        return Err(OracleError::InvalidInput(
            "n_fock must be at least 1".into(),
        ));
    }
    if !(g.is_finite() && delta.is_finite() && omega.is_finite()) || g < 0.0 {
        return Err(OracleError::InvalidInput(format!(
            "bad parameters {params:?}"
        )));
    }
    let dim = 2 * (n_fock + 1);
    let mut entries = vec![0.0; dim * dim];
    for n in 0..=n_fock {
        for up in [true, false] {
            let i = basis_index(n, up);
            let s = if up { 1.0 } else { -1.0 };
            entries[i * dim + i] = n as f64 * omega + s * delta;
            if n < n_fock {
                let j = basis_index(n + 1, !up);
                let c = g * ((n + 1) as f64).sqrt();
                entries[i * dim + j] = c;
                entries[j * dim + i] = c;
            }
        }
    }
    Ok(TruncatedHamiltonian {
        params: *params,
        n_fock,
        dim,
        entries,
    })
}

pub fn eigenvalues(h: &TruncatedHamiltonian) -> Result<OracleSpectrum, OracleError> {
    let energies = symmetric_eigenvalues(&h.entries, h.dim)?;
    let shift = h.params.g * h.params.g / h.params.omega;
    let x_values = energies.iter().map(|e| e + shift).collect();
    Ok(OracleSpectrum {
        energies,
        x_values,
        n_fock: h.n_fock,
        converged_count: 0,
    })
}

pub fn spectrum_at(params: &RabiParams, n_fock: usize) -> Result<OracleSpectrum, OracleError> {
    eigenvalues(&build_hamiltonian(params, n_fock)?)
}

/// Doubles the cutoff from [`START_N_FOCK`] until the lowest `k`
/// eigenvalues move by at most `tol`.
pub fn converged_levels(
    params: &RabiParams,
    k: usize,
    tol: f64,
) -> Result<OracleSpectrum, OracleError> {
    if k < 1 {
        return Err(OracleError::InvalidInput("need at least one level".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(OracleError::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let truncation = OracleError::Truncation {
        k,
        tol,
        cap: MAX_N_FOCK,
    };
    if k > 2 * (MAX_N_FOCK + 1) {
        return Err(truncation);
    }
    let mut n_fock = START_N_FOCK;
    let mut previous = spectrum_at(params, n_fock)?;
    while n_fock < MAX_N_FOCK {
        n_fock *= 2;
        let mut current = spectrum_at(params, n_fock)?;
        if previous.energies.len() >= k {
            let stable = current
                .energies
                .iter()
                .zip(&previous.energies)
                .take_while(|(c, p)| (*c - *p).abs() <= tol)
                .count();
            if stable >= k {
                current.converged_count = stable;
                return Ok(current);
            }
        }
        previous = current;
    }
    Err(truncation)
}
