//! Flag definitions and their resolution into a [`RunManifest`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use rabi_core::method::spectrum_methods;
use rabi_core::oracle::MAX_N_FOCK;
use rabi_core::ratio::ratio_methods;
use rabi_core::{RabiParams, ScanConfig, ToleranceConfig};

use crate::error::CliError;
use crate::manifest::{Extras, Format, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "rabi",
    version,
    about = "Regular spectrum of the quantum Rabi model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate the regular spectrum inside [xmin, xmax].
    Spectrum(SpectrumArgs),
    /// Tabulate F0 on a uniform grid.
    Evaluate(EvaluateArgs),
    /// Diagonalize the truncated Hamiltonian.
    Oracle(OracleArgs),
    /// Compare the F0 zeros with the oracle (and optionally G+/G-).
    Compare(CompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Evaluate(_) => "evaluate",
            Command::Oracle(_) => "oracle",
            Command::Compare(_) => "compare",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Coupling strength.
    #[arg(long, default_value_t = 0.7, allow_negative_numbers = true)]
    pub g: f64,
    /// Level splitting.
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub delta: f64,
    /// Mode frequency.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub xmin: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub xmax: f64,
    /// Scan samples per unit of omega.
    #[arg(long, default_value_t = 200)]
    pub grid_per_unit: usize,
    /// Exclusion radius around each baseline; defaults to 1e-6 * omega.
    #[arg(long)]
    pub pole_margin: Option<f64>,
    /// Bisection stops once the bracket is narrower than this.
    #[arg(long, default_value_t = 1e-10)]
    pub root_tol: f64,
    /// Relative tolerance of the continued-fraction ratio.
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Progress messages on standard error.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// F0, Gpm or oracle.
    #[arg(long, default_value = "F0")]
    pub method: String,
    /// Ratio method used by F0: cf or euler.
    #[arg(long, default_value = "cf")]
    pub ratio_method: String,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 501)]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fixed photon cutoff; adaptive doubling when absent.
    #[arg(long)]
    pub n_fock: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub levels: usize,
    /// Stability required of each level under adaptive doubling.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest acceptable deviation.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long)]
    pub with_gfunction: bool,
    #[arg(long, default_value_t = 256)]
    pub n_fock: usize,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl CommonArgs {
    /// Validates everything shared by the subcommands. The oracle accepts
    /// `g = 0`; the recurrence needs `g > 0`.
    fn resolve(
        &self,
        subcommand: &str,
        allow_zero_g: bool,
        extras: Extras,
    ) -> Result<RunManifest, CliError> {
        let params = RabiParams {
            g: self.g,
            delta: self.delta,
            omega: self.omega,
        };
        // g = 0 is the decoupled limit; check the rest with a stand-in coupling
        let checked = if allow_zero_g && self.g == 0.0 {
            RabiParams { g: 1.0, ..params }
        } else {
            params
        };
        checked.validate().map_err(|e| usage(e.to_string()))?;
        let mut cfg = ScanConfig::new(&params, self.xmin, self.xmax);
        cfg.grid_per_unit = self.grid_per_unit;
        cfg.root_tol = self.root_tol;
        if let Some(m) = self.pole_margin {
            cfg.pole_margin = m;
        }
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        if cfg.pole_margin >= 0.5 * self.omega {
            return Err(usage(format!(
                "pole margin {} must be below omega / 2",
                cfg.pole_margin
            )));
        }
        let tolerances = ToleranceConfig {
            rel_tol: self.rel_tol,
            ..ToleranceConfig::default()
        };
        tolerances.validate().map_err(|e| usage(e.to_string()))?;
        let output_path = match &self.output {
            Some(p) => p.to_string_lossy().into_owned(),
            None => "-".to_string(),
        };
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            params,
            cfg,
            tolerances,
            output_path,
            format: self.format,
            extras,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

impl SpectrumArgs {
    pub fn resolve(&self) -> Result<RunManifest, CliError> {
        let methods = spectrum_methods();
        let method = methods
            .get(&self.method)
            .ok_or_else(|| {
                usage(format!(
                    "unknown method {:?}; expected one of {:?}",
                    self.method,
                    methods.names()
                ))
            })?
            .name();
        let ratios = ratio_methods();
        let ratio = ratios
            .get(&self.ratio_method)
            .ok_or_else(|| {
                usage(format!(
                    "unknown ratio method {:?}; expected one of {:?}",
                    self.ratio_method,
                    ratios.names()
                ))
            })?
            .name();
        let extras = Extras {
            method: Some(method.to_string()),
            ratio_method: Some(ratio.to_string()),
            ..Extras::default()
        };
        self.common.resolve("spectrum", false, extras)
    }
}

impl EvaluateArgs {
    pub fn resolve(&self) -> Result<RunManifest, CliError> {
        if self.grid_points < 2 {
            return Err(usage(format!(
                "--grid-points must be >= 2, got {}",
                self.grid_points
            )));
        }
        let extras = Extras {
            grid_points: Some(self.grid_points),
            ..Extras::default()
        };
        self.common.resolve("evaluate", false, extras)
    }
}

impl OracleArgs {
    pub fn resolve(&self) -> Result<RunManifest, CliError> {
        if self.levels < 1 {
            return Err(usage("--levels must be at least 1"));
        }
        if self.n_fock == Some(0) {
            return Err(usage("--n-fock must be at least 1"));
        }
        let extras = Extras {
            n_fock: self.n_fock,
            levels: Some(self.levels),
            tol: Some(positive("tol", self.tol)?),
            ..Extras::default()
        };
        self.common.resolve("oracle", true, extras)
    }
}

impl CompareArgs {
    pub fn resolve(&self) -> Result<RunManifest, CliError> {
        if self.n_fock < 1 || self.n_fock > MAX_N_FOCK {
            return Err(usage(format!("--n-fock must lie in [1, {MAX_N_FOCK}]")));
        }
        let extras = Extras {
            n_fock: Some(self.n_fock),
            tol: Some(positive("tol", self.tol)?),
            with_gfunction: Some(self.with_gfunction),
            ..Extras::default()
        };
        self.common.resolve("compare", false, extras)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("rabi").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn defaults_resolve() {
        let Command::Spectrum(a) = parse(&["spectrum"]) else {
            panic!()
        };
        let m = a.resolve().unwrap();
        assert_eq!(m.params, RabiParams::new(0.7, 0.4, 1.0).unwrap());
        assert_eq!((m.cfg.xmin, m.cfg.xmax), (-0.5, 2.0));
        assert_eq!(m.output_path, "-");
        assert_eq!(m.extras.method.as_deref(), Some("F0"));
    }

    #[test]
    fn method_names_are_canonicalized() {
        let Command::Spectrum(a) =
            parse(&["spectrum", "--method", "GPM", "--ratio-method", "Euler"])
        else {
            panic!()
        };
        let m = a.resolve().unwrap();
        assert_eq!(m.extras.method.as_deref(), Some("Gpm"));
        assert_eq!(m.extras.ratio_method.as_deref(), Some("euler"));
    }

    #[test]
    fn zero_coupling_only_for_oracle() {
        let Command::Oracle(a) = parse(&["oracle", "--g", "0"]) else {
            panic!()
        };
        assert_eq!(a.resolve().unwrap().params.g, 0.0);
        let Command::Spectrum(a) = parse(&["spectrum", "--g", "0"]) else {
            panic!()
        };
        assert!(matches!(a.resolve(), Err(CliError::Usage(_))));
        let Command::Oracle(a) = parse(&["oracle", "--g", "-0.1"]) else {
            panic!()
        };
        assert!(a.resolve().is_err());
    }

    #[test]
    fn negative_values_parse() {
        let Command::Evaluate(a) = parse(&["evaluate", "--xmin", "-3", "--xmax", "-1"]) else {
            panic!()
        };
        assert_eq!(a.resolve().unwrap().cfg.xmin, -3.0);
    }

    #[test]
    fn compare_cutoff_bounds() {
        let Command::Compare(a) = parse(&["compare", "--n-fock", "0"]) else {
            panic!()
        };
        assert!(a.resolve().is_err());
    }
}
