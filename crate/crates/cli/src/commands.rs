use ces_core::coherent::{
    coherent_coeffs, eigenvalue_residual, f_functional, normalization_c0, uncertainty_product,
};
use ces_core::fock::ladder_params;
use ces_core::measure::{radial_density_profile, sigma_normalization, DensityProfile};
use ces_core::model::{ModelParams, Realization};
use ces_core::quad::Grid;
use ces_core::specfun::{hyper_0f3, Accuracy};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::output::{float, floats, fmt_float, to_canonical_json, Csv};
use crate::verify::{run_suite, Suite};
use crate::{Cli, CliError, Command, Format, RunConfig, SectorArg};

/// Highest level accepted by `wavefunction`; Laguerre and Kummer
/// cancellation grows with `n` in double precision.
pub const LEVEL_CAP: usize = 24;

/// Relative tolerance for the uncertainty equality flag.
pub const EQUALITY_TOL: f64 = 1e-8;

/// Rendered output of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    /// Set when a verification found a violated invariant.
    pub failed: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Self { text, failed: false }
    }
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    match &cli.command {
        Command::Spectrum { levels } => cmd_spectrum(&cfg, *levels),
        Command::Wavefunction { sector, n, points } => cmd_wavefunction(&cfg, *sector, *n, *points),
        Command::Coherent { mu_re, mu_im, rel_tail } => cmd_coherent(&cfg, *mu_re, *mu_im, *rel_tail),
        Command::Density { x_max, samples, sweep } => cmd_density(&cfg, *x_max, *samples, sweep.as_deref()),
        Command::Verify { suite } => cmd_verify(&cfg, *suite),
    }
}

fn header_fields(p: &ModelParams) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("phase".into(), json!(p.phase().as_str()));
    m.insert("gamma".into(), float(p.gamma()));
    m.insert("epsilon".into(), float(p.epsilon()));
    m
}

fn params_comment(p: &ModelParams) -> String {
    format!("phase={} gamma={} epsilon={}", p.phase(), fmt_float(p.gamma()), fmt_float(p.epsilon()))
}

fn json_report(mut fields: Map<String, Value>, p: &ModelParams) -> String {
    fields.extend(header_fields(p));
    let mut s = to_canonical_json(&Value::Object(fields));
    s.push('\n');
    s
}

pub fn cmd_spectrum(cfg: &RunConfig, levels: usize) -> Result<Report, CliError> {
    let p = &cfg.params;
    let energies: Vec<f64> = (0..levels).map(|n| p.energy(n)).collect();
    Ok(Report::ok(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(["n", "energy"]);
            for (n, e) in energies.iter().enumerate() {
                csv.row(vec![n.to_string(), fmt_float(*e)]);
            }
            csv.comment(params_comment(p));
            csv.render()
        }
        Format::Json => {
            let rows = energies.iter().enumerate().map(|(n, &e)| json!({"n": n, "energy": float(e)})).collect();
            let mut m = Map::new();
            m.insert("levels".into(), Value::Array(rows));
            json_report(m, p)
        }
    }))
}

pub fn cmd_wavefunction(cfg: &RunConfig, sector: SectorArg, n: usize, points: Option<usize>) -> Result<Report, CliError> {
    if n > LEVEL_CAP {
        return Err(CliError::Parameter(format!("level n = {n} exceeds the cap {LEVEL_CAP}")));
    }
    let p = cfg.params;
    let mut grid = Grid::for_energy(p.energy(n + 1));
    if let Some(points) = points {
        grid = Grid::new(grid.x_min(), grid.x_max(), points)?;
    }
    let r = Realization::new(p, grid)?;
    let (psi, energy, closed_gap) = match sector {
        SectorArg::Plus => (r.eigenfunction_plus(n), p.energy_plus(n), None),
        SectorArg::Minus => {
            let psi = r.eigenfunction_minus(n)?;
            let closed = r.eigenfunction_minus_closed_form(n)?;
            let gap = psi.interior_distance(&closed)?;
            (psi, p.energy(n), Some(gap))
        }
    };
    let label = match sector {
        SectorArg::Plus => "plus",
        SectorArg::Minus => "minus",
    };
    let norm = psi.norm();
    Ok(Report::ok(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(["x", "psi"]);
            for (x, v) in grid.points().zip(psi.values()) {
                csv.row(vec![fmt_float(x), fmt_float(*v)]);
            }
            csv.comment(params_comment(&p));
            csv.comment(format!("sector={label} n={n} energy={}", fmt_float(energy)));
            csv.comment(format!("norm={}", fmt_float(norm)));
            if let Some(gap) = closed_gap {
                csv.comment(format!("closed_form_distance={}", fmt_float(gap)));
            }
            csv.render()
        }
        Format::Json => {
            let mut m = Map::new();
            m.insert("sector".into(), json!(label));
            m.insert("n".into(), json!(n));
            m.insert("energy".into(), float(energy));
            m.insert("norm".into(), float(norm));
            m.insert("x".into(), floats(&grid.points().collect::<Vec<_>>()));
            m.insert("psi".into(), floats(psi.values()));
            if let Some(gap) = closed_gap {
                m.insert("closed_form_distance".into(), float(gap));
            }
            json_report(m, &p)
        }
    }))
}

pub fn cmd_coherent(cfg: &RunConfig, mu_re: f64, mu_im: f64, rel_tail: f64) -> Result<Report, CliError> {
    let p = cfg.params;
    let mu = Complex64::new(mu_re, mu_im);
    let state = coherent_coeffs(&p, mu, rel_tail)?;
    let residual = eigenvalue_residual(&state)?;
    let unc = uncertainty_product(&state)?;
    let f = f_functional(&state)?;
    let series = hyper_0f3(ladder_params(&p), mu.norm_sqr() / 16.0)?;
    debug_assert_eq!(normalization_c0(&p, mu.norm())?, state.c0());
    let equal = unc.relative_gap() < EQUALITY_TOL;
    Ok(Report::ok(match cfg.format.unwrap_or(Format::Json) {
        Format::Json => {
            let coeffs = state.coeffs().iter().map(|c| json!([float(c.re), float(c.im)])).collect();
            let mut m = Map::new();
            m.insert("mu".into(), json!([float(mu.re), float(mu.im)]));
            m.insert("dim".into(), json!(state.dim()));
            m.insert("coeffs".into(), Value::Array(coeffs));
            m.insert("c0".into(), float(state.c0()));
            m.insert("hyper_0f3".into(), float(series));
            m.insert("truncation_tail".into(), float(state.truncation_tail()));
            m.insert("residual".into(), float(residual));
            m.insert("uncertainty_lhs".into(), float(unc.lhs));
            m.insert("uncertainty_rhs".into(), float(unc.rhs));
            m.insert("uncertainty_equal".into(), json!(equal));
            m.insert("phi_mean".into(), float(unc.phi_mean));
            m.insert("F".into(), float(f));
            json_report(m, &p)
        }
        Format::Csv => {
            let mut csv = Csv::new(["n", "re", "im"]);
            for (n, c) in state.coeffs().iter().enumerate() {
                csv.row(vec![n.to_string(), fmt_float(c.re), fmt_float(c.im)]);
            }
            csv.comment(params_comment(&p));
            csv.comment(format!("mu={} {}", fmt_float(mu.re), fmt_float(mu.im)));
            csv.comment(format!("c0={} hyper_0f3={}", fmt_float(state.c0()), fmt_float(series)));
            csv.comment(format!("residual={}", fmt_float(residual)));
            csv.comment(format!(
                "uncertainty_lhs={} uncertainty_rhs={} equal={equal}",
                fmt_float(unc.lhs),
                fmt_float(unc.rhs)
            ));
            csv.comment(format!("F={}", fmt_float(f)));
            csv.render()
        }
    }))
}

/// Parsed `--sweep` value: which parameter varies and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: &'static str,
    pub values: Vec<f64>,
}

pub fn parse_sweep(spec: &str) -> Result<Sweep, CliError> {
    let (name, list) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Parameter(format!("sweep must look like epsilon=a,b,c (got '{spec}')")))?;
    let parameter = match name.trim() {
        "epsilon" => "epsilon",
        "gamma" => "gamma",
        other => return Err(CliError::Parameter(format!("cannot sweep '{other}'; use epsilon or gamma"))),
    };
    let values = list
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Parameter(format!("bad sweep value '{v}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Parameter("empty sweep".into()));
    }
    Ok(Sweep { parameter, values })
}

struct Series {
    label: String,
    profile: DensityProfile,
    integral: f64,
}

pub fn cmd_density(cfg: &RunConfig, x_max: f64, samples: usize, sweep: Option<&str>) -> Result<Report, CliError> {
    let base = cfg.params;
    let variants: Vec<(String, ModelParams)> = match sweep {
        None => vec![(String::new(), base)],
        Some(spec) => {
            let sweep = parse_sweep(spec)?;
            sweep
                .values
                .iter()
                .map(|&v| {
                    let (g, e) = if sweep.parameter == "gamma" { (v, base.epsilon()) } else { (base.gamma(), v) };
                    Ok((format!("[{}={v}]", sweep.parameter), ModelParams::new(g, e, base.phase())?))
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
    };
    let acc = Accuracy::default();
    let series = variants
        .into_iter()
        .map(|(label, p)| {
            Ok(Series { label, profile: radial_density_profile(&p, x_max, samples, &acc)?, integral: sigma_normalization(&p, &acc)? })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let x = &series[0].profile.x;

    Ok(Report::ok(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut header = vec!["x".to_string()];
            for s in &series {
                header.push(format!("sigma{}", s.label));
                header.push(format!("radial_f{}", s.label));
            }
            let mut csv = Csv::new(header);
            for (i, xi) in x.iter().enumerate() {
                let mut row = vec![fmt_float(*xi)];
                for s in &series {
                    row.push(fmt_float(s.profile.sigma[i]));
                    row.push(fmt_float(s.profile.radial[i]));
                }
                csv.row(row);
            }
            csv.comment(params_comment(&base));
            for s in &series {
                csv.comment(format!("integral_sigma{}={}", s.label, fmt_float(s.integral)));
            }
            csv.render()
        }
        Format::Json => {
            let entries = series
                .iter()
                .map(|s| {
                    json!({
                        "label": s.label,
                        "sigma": floats(&s.profile.sigma),
                        "radial_f": floats(&s.profile.radial),
                        "integral_sigma": float(s.integral),
                    })
                })
                .collect();
            let mut m = Map::new();
            m.insert("x".into(), floats(x));
            m.insert("series".into(), Value::Array(entries));
            json_report(m, &base)
        }
    }))
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite) -> Result<Report, CliError> {
    let p = cfg.params;
    let checks = run_suite(&p, suite)?;
    let failures = checks.iter().filter(|c| !c.passed()).count();
    let text = match cfg.format {
        None => {
            let mut out = format!("# {}\n", params_comment(&p));
            for c in &checks {
                out.push_str(&format!(
                    "{} {:<13} {} (value {}, tolerance {})\n",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.suite,
                    c.name,
                    fmt_float(c.value),
                    fmt_float(c.tolerance)
                ));
            }
            out.push_str(&format!("{} of {} checks passed\n", checks.len() - failures, checks.len()));
            out
        }
        Some(Format::Json) => {
            let mut m = Map::new();
            m.insert("checks".into(), Value::Array(checks.iter().map(|c| c.to_json()).collect()));
            m.insert("passed".into(), json!(failures == 0));
            json_report(m, &p)
        }
        Some(Format::Csv) => {
            let mut csv = Csv::new(["suite", "name", "value", "tolerance", "passed"]);
            for c in &checks {
                csv.row(vec![
                    c.suite.to_string(),
                    format!("\"{}\"", c.name.replace('"', "\"\"")),
                    fmt_float(c.value),
                    fmt_float(c.tolerance),
                    c.passed().to_string(),
                ]);
            }
            csv.comment(params_comment(&p));
            csv.render()
        }
    };
    Ok(Report { text, failed: failures > 0 })
}
