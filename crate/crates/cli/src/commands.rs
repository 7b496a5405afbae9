use serde::Serialize;

use rabi_core::method::{spectrum_methods, F0Scan, OracleScan, SpectrumMethod};
use rabi_core::oracle::{self, OracleError, OracleSpectrum, MAX_N_FOCK};
use rabi_core::ratio::{ratio_methods, ContinuedFraction};
use rabi_core::{RabiModel, SpectrumResult};

use crate::error::CliError;
use crate::manifest::{Format, RunManifest};
use crate::output::{num, opt, Sink};

fn note(verbose: bool, msg: impl AsRef<str>) {
    if verbose {
        eprintln!("rabi: {}", msg.as_ref());
    }
}

fn model_for(m: &RunManifest) -> Result<RabiModel, CliError> {
    RabiModel::new(m.params)
        .and_then(|model| model.with_pole_margin(m.cfg.pole_margin))
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run_method(
    m: &RunManifest,
    model: &RabiModel,
    method: &dyn SpectrumMethod,
) -> Result<SpectrumResult, CliError> {
    method
        .spectrum(model, &m.cfg, &m.tolerances)
        .map_err(|e| CliError::Numerical(format!("{} scan failed: {e}", method.name())))
}

#[derive(Serialize)]
struct SpectrumDiagnostics {
    poles: Vec<f64>,
    zero_count: usize,
    failure_count: usize,
    pseudo_pole_count: usize,
    nonconverged_count: usize,
}

pub fn spectrum(m: &RunManifest, verbose: bool) -> Result<(), CliError> {
    let sink = Sink::open(m)?;
    let model = model_for(m)?;
    let name = m.extras.method.as_deref().unwrap_or("F0");
    let mut methods = spectrum_methods();
    if let Some(ratio) = m
        .extras
        .ratio_method
        .as_deref()
        .and_then(|r| ratio_methods().take(r))
    {
        methods.register(Box::new(F0Scan { ratio }));
    }
    let method = methods
        .get(name)
        .ok_or_else(|| CliError::Usage(format!("unknown method {name:?}")))?;
    note(
        verbose,
        format!(
            "scanning [{}, {}] with {}",
            m.cfg.xmin,
            m.cfg.xmax,
            method.name()
        ),
    );
    let result = run_method(m, &model, method)?;
    note(
        verbose,
        format!(
            "{} zeros, {} failed brackets",
            result.zeros.len(),
            result.failures.len()
        ),
    );

    let failed = result.failures.len();
    match m.format {
        Format::Json => {
            let diagnostics = SpectrumDiagnostics {
                poles: model.poles_in(m.cfg.xmin, m.cfg.xmax).poles,
                zero_count: result.zeros.len(),
                failure_count: failed,
                pseudo_pole_count: result.pseudo_poles.len(),
                nonconverged_count: result.nonconverged.len(),
            };
            sink.json(m, &result, diagnostics)?;
        }
        Format::Csv => {
            let rows = result.zeros.iter().map(|z| {
                vec![
                    num(z.x),
                    num(z.energy),
                    num(z.residual),
                    num(z.bracket.0),
                    num(z.bracket.1),
                ]
            });
            sink.csv(m, &["x", "energy", "residual", "lo", "hi"], rows)?;
        }
    }
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} brackets failed to refine"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct GridRow {
    x: f64,
    /// Absent inside a pole margin or where the ratio did not converge.
    f0: Option<f64>,
    orientation: Option<f64>,
}

#[derive(Serialize)]
struct EvaluateDiagnostics {
    poles: Vec<f64>,
    gap_count: usize,
    nonconverged: Vec<f64>,
    /// Neighbouring samples where the oriented value changes sign.
    sign_changes: Vec<(f64, f64)>,
    /// Neighbouring samples where only the raw value flips, through a
    /// divergence of the ratio.
    pseudo_poles: Vec<(f64, f64)>,
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    let mut xs: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    xs[n - 1] = hi;
    xs
}

pub fn evaluate(m: &RunManifest, verbose: bool) -> Result<(), CliError> {
    let sink = Sink::open(m)?;
    let model = model_for(m)?;
    let n = m.extras.grid_points.unwrap_or(2);
    note(verbose, format!("evaluating F0 at {n} points"));

    let mut nonconverged = Vec::new();
    let rows: Vec<GridRow> = uniform(m.cfg.xmin, m.cfg.xmax, n)
        .into_iter()
        .map(|x| {
            if model.nearby_pole(x).is_some() {
                return GridRow {
                    x,
                    f0: None,
                    orientation: None,
                };
            }
            match model.f0_with(x, &m.tolerances, &ContinuedFraction) {
                Ok(s) => GridRow {
                    x,
                    f0: Some(s.value),
                    orientation: Some(s.orientation),
                },
                Err(e) => {
                    note(verbose, format!("x = {x}: {e}"));
                    nonconverged.push(x);
                    GridRow {
                        x,
                        f0: None,
                        orientation: None,
                    }
                }
            }
        })
        .collect();

    let mut sign_changes = Vec::new();
    let mut pseudo_poles = Vec::new();
    for w in rows.windows(2) {
        let (l, r) = (&w[0], &w[1]);
        let (Some(fl), Some(fr), Some(ol), Some(or)) = (l.f0, r.f0, l.orientation, r.orientation)
        else {
            continue;
        };
        if !model.poles_in(l.x, r.x).poles.is_empty() {
            continue;
        }
        if fl * ol * fr * or < 0.0 {
            sign_changes.push((l.x, r.x));
        } else if fl * fr < 0.0 {
            pseudo_poles.push((l.x, r.x));
        }
    }

    let gaps = rows.iter().filter(|r| r.f0.is_none()).count() - nonconverged.len();
    let missed = nonconverged.len();
    match m.format {
        Format::Json => {
            let diagnostics = EvaluateDiagnostics {
                poles: model.poles_in(m.cfg.xmin, m.cfg.xmax).poles,
                gap_count: gaps,
                nonconverged,
                sign_changes,
                pseudo_poles,
            };
            sink.json(m, &rows, diagnostics)?;
        }
        Format::Csv => {
            let body = rows.iter().map(|r| vec![num(r.x), opt(r.f0)]);
            sink.csv(m, &["x", "F0"], body)?;
        }
    }
    if missed > 0 {
        return Err(CliError::Numerical(format!(
            "F0 did not converge at {missed} points"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct Level {
    index: usize,
    energy: f64,
    x: f64,
}

#[derive(Serialize)]
struct OracleResult {
    n_fock: usize,
    dimension: usize,
    /// Leading levels that met `tol` under doubling; equals the level count
    /// for a fixed cutoff.
    converged_count: usize,
    levels: Vec<Level>,
}

#[derive(Serialize)]
struct OracleDiagnostics {
    adaptive: bool,
    cap: usize,
}

pub fn oracle(m: &RunManifest, verbose: bool) -> Result<(), CliError> {
    let levels = m.extras.levels.unwrap_or(10);
    let tol = m.extras.tol.unwrap_or(1e-8);
    if let Some(n) = m.extras.n_fock {
        if n > MAX_N_FOCK {
            return Err(CliError::Numerical(format!(
                "n_fock {n} exceeds the cap {MAX_N_FOCK}"
            )));
        }
    }
    let sink = Sink::open(m)?;
    let to_cli = |e: OracleError| match e {
        OracleError::InvalidInput(msg) => CliError::Usage(msg),
        other => CliError::Numerical(other.to_string()),
    };
    let (spec, converged): (OracleSpectrum, usize) = match m.extras.n_fock {
        Some(n) => {
            note(verbose, format!("diagonalizing at n_fock = {n}"));
            let spec = oracle::spectrum_at(&m.params, n).map_err(to_cli)?;
            let k = levels.min(spec.energies.len());
            (spec, k)
        }
        None => {
            note(
                verbose,
                format!("doubling n_fock until {levels} levels agree to {tol}"),
            );
            let spec = oracle::converged_levels(&m.params, levels, tol).map_err(to_cli)?;
            let k = spec.converged_count;
            (spec, k)
        }
    };
    note(verbose, format!("n_fock = {}", spec.n_fock));
    let result = OracleResult {
        n_fock: spec.n_fock,
        dimension: spec.energies.len(),
        converged_count: converged,
        levels: spec
            .energies
            .iter()
            .zip(&spec.x_values)
            .take(levels)
            .enumerate()
            .map(|(index, (&energy, &x))| Level { index, energy, x })
            .collect(),
    };
    match m.format {
        Format::Json => sink.json(
            m,
            &result,
            OracleDiagnostics {
                adaptive: m.extras.n_fock.is_none(),
                cap: MAX_N_FOCK,
            },
        ),
        Format::Csv => {
            let rows = result
                .levels
                .iter()
                .map(|l| vec![l.index.to_string(), num(l.energy), num(l.x)]);
            sink.csv(m, &["index", "energy", "x"], rows)
        }
    }
}

#[derive(Serialize)]
struct CompareRow {
    index: usize,
    x_f0: Option<f64>,
    x_oracle: Option<f64>,
    dev_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_g: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dev_g: Option<Option<f64>>,
}

#[derive(Serialize)]
struct CompareResult {
    rows: Vec<CompareRow>,
    /// `null` when the level counts differ.
    max_deviation: Option<f64>,
    tol: f64,
    within_tol: bool,
}

#[derive(Serialize)]
struct CompareDiagnostics {
    f0_count: usize,
    oracle_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_count: Option<usize>,
    f0_failures: usize,
}

fn deviation(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some((a? - b?).abs())
}

pub fn compare(m: &RunManifest, verbose: bool) -> Result<(), CliError> {
    let sink = Sink::open(m)?;
    let model = model_for(m)?;
    let tol = m.extras.tol.unwrap_or(1e-5);
    let with_g = m.extras.with_gfunction.unwrap_or(false);
    let mut methods = spectrum_methods();
    methods.register(Box::new(OracleScan {
        n_fock: m.extras.n_fock.unwrap_or(256),
    }));
    let scan = |name: &str| -> Result<SpectrumResult, CliError> {
        let method = methods
            .get(name)
            .ok_or_else(|| CliError::Usage(format!("method {name:?} is not available")))?;
        note(verbose, format!("running {name}"));
        run_method(m, &model, method)
    };
    let f0 = scan("F0")?;
    let reference = scan("oracle")?;
    let g = if with_g { Some(scan("Gpm")?) } else { None };

    let xf = f0.xs();
    let xo = reference.xs();
    let xg = g.as_ref().map(|r| r.xs());
    let len = xf.len().max(xo.len()).max(xg.as_ref().map_or(0, Vec::len));
    let rows: Vec<CompareRow> = (0..len)
        .map(|i| {
            let x_f0 = xf.get(i).copied();
            let x_oracle = xo.get(i).copied();
            let x_g = xg.as_ref().map(|v| v.get(i).copied());
            CompareRow {
                index: i,
                x_f0,
                x_oracle,
                dev_oracle: deviation(x_f0, x_oracle),
                x_g,
                dev_g: x_g.map(|x| deviation(x_f0, x)),
            }
        })
        .collect();

    let complete = rows
        .iter()
        .all(|r| r.dev_oracle.is_some() && r.dev_g.is_none_or(|d| d.is_some()));
    let max_deviation = complete.then(|| {
        rows.iter()
            .flat_map(|r| [r.dev_oracle, r.dev_g.flatten()])
            .flatten()
            .fold(0.0, f64::max)
    });
    let within_tol = f0.failures.is_empty() && max_deviation.is_some_and(|d| d <= tol);
    note(
        verbose,
        format!("max deviation {max_deviation:?}, tol {tol}"),
    );

    let diagnostics = CompareDiagnostics {
        f0_count: xf.len(),
        oracle_count: xo.len(),
        g_count: xg.as_ref().map(Vec::len),
        f0_failures: f0.failures.len(),
    };
    let result = CompareResult {
        rows,
        max_deviation,
        tol,
        within_tol,
    };
    match m.format {
        Format::Json => sink.json(m, &result, &diagnostics)?,
        Format::Csv => {
            let mut header = vec!["index", "x_f0", "x_oracle", "dev_oracle"];
            if with_g {
                header.extend(["x_g", "dev_g"]);
            }
            let body = result.rows.iter().map(|r| {
                let mut row = vec![
                    r.index.to_string(),
                    opt(r.x_f0),
                    opt(r.x_oracle),
                    opt(r.dev_oracle),
                ];
                if let (Some(x), Some(d)) = (r.x_g, r.dev_g) {
                    row.extend([opt(x), opt(d)]);
                }
                row
            });
            sink.csv(m, &header, body)?;
        }
    }
    if !within_tol {
        return Err(CliError::Numerical(match max_deviation {
            Some(d) => format!("max deviation {d:e} exceeds tol {tol:e}"),
            None => format!(
                "level counts differ: F0 {}, oracle {}",
                diagnostics.f0_count, diagnostics.oracle_count
            ),
        }));
    }
    Ok(())
}
