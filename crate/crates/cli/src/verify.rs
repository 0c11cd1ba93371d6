//! Invariant suites run by `ces verify`.

use ces_core::coherent::{coherent_coeffs, eigenvalue_residual, overlap, overlap_closed_form, uncertainty_product};
use ces_core::fock::{closure_report, ladder_constant, ladder_offset, phi_poly, psi_poly};
use ces_core::measure::{resolution_of_unity_check, verify_moments};
use ces_core::model::{ModelParams, Phase, Realization};
use ces_core::quad::{inner, Sector};
use ces_core::specfun::Accuracy;
use ces_core::Result;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::output::float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Algebra,
    Wavefunction,
    Moments,
    Uncertainty,
}

/// One checked inequality `value < tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { suite, name: name.into(), value, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.value < self.tolerance
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "name": self.name,
            "value": float(self.value),
            "tolerance": float(self.tolerance),
            "passed": self.passed(),
        })
    }
}

pub fn run_suite(params: &ModelParams, suite: Suite) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::All | Suite::Algebra) {
        checks.extend(algebra(params)?);
    }
    if matches!(suite, Suite::All | Suite::Wavefunction) {
        checks.extend(wavefunction(params)?);
    }
    if matches!(suite, Suite::All | Suite::Moments) {
        checks.extend(moments(params)?);
    }
    if matches!(suite, Suite::All | Suite::Uncertainty) {
        checks.extend(uncertainty(params)?);
    }
    Ok(checks)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn algebra(p: &ModelParams) -> Result<Vec<Check>> {
    let report = closure_report(p, 64)?;
    let diff = psi_poly(p).sub(&psi_poly(p).shifted(2.0));
    let phi = phi_poly(p);
    let coeff_gap = (0..5)
        .map(|i| {
            let a = diff.0.get(i).copied().unwrap_or(0.0);
            let b = phi.0.get(i).copied().unwrap_or(0.0);
            (a - b).abs() / (1.0 + b.abs())
        })
        .fold(0.0, f64::max);
    let s = ladder_offset(p);
    let mut psi_gap: f64 = 0.0;
    for j in 0..=50 {
        let lam = ladder_constant(p, j + 1)?;
        psi_gap = psi_gap.max(rel(psi_poly(p).eval(p.energy(j + s)), lam * lam));
    }
    Ok(vec![
        Check::new("algebra", "[H,D] = -2D", report.h_d.relative(), 1e-12),
        Check::new("algebra", "[H,D+] = 2D+", report.h_ddag.relative(), 1e-12),
        Check::new("algebra", "[D,D+] = Phi(H)", report.d_ddag.relative(), 1e-12),
        Check::new("algebra", "[X1,X2] = (i/2) Phi(H)", report.x1_x2.relative(), 1e-12),
        Check::new("algebra", "DD+ = Psi(H)", report.casimir.relative(), 1e-9),
        Check::new("algebra", "Psi(H) - Psi(H-2) = Phi(H)", coeff_gap, 1e-12),
        Check::new("algebra", "Psi(E_n) = lambda_{n+1}^2, n <= 50", psi_gap, 1e-12),
    ])
}

fn wavefunction(p: &ModelParams) -> Result<Vec<Check>> {
    let levels = 8;
    let r = Realization::with_default_grid(*p, levels)?;
    let states = (0..=levels).map(|n| r.eigenfunction_minus(n)).collect::<Result<Vec<_>>>()?;
    let mut ortho: f64 = 0.0;
    for m in 0..=levels {
        for n in 0..=m {
            let target = if m == n { 1.0 } else { 0.0 };
            ortho = ortho.max((inner(&states[m], &states[n])? - target).abs());
        }
    }
    let mut residual: f64 = 0.0;
    for (n, psi) in states.iter().enumerate().skip(ladder_offset(p)) {
        residual = residual.max(r.eigen_residual(psi, Sector::Minus, p.energy(n))?);
    }
    let s = ladder_offset(p);
    let mut ladder: f64 = 0.0;
    for n in s..=6 {
        let elem = inner(&states[n + 1], &r.apply_d(&states[n], true)?)?;
        ladder = ladder.max(rel(elem, ladder_constant(p, n + 1 - s)?));
    }
    let mut checks = vec![
        Check::new("wavefunction", "orthonormality of psi-_n, n <= 8", ortho, 1e-6),
        Check::new("wavefunction", "H- psi-_n = E_n psi-_n residual", residual, 1e-4),
        Check::new("wavefunction", "<n+1|D+|n> = structure constant", ladder, 1e-4),
    ];
    if p.phase() == Phase::Unbroken {
        let a0 = r.apply_a(&states[0], false)?.norm();
        checks.push(Check::new("wavefunction", "A psi-_0 = 0", a0, 1e-5));
    }
    Ok(checks)
}

fn moments(p: &ModelParams) -> Result<Vec<Check>> {
    let acc = Accuracy::default();
    let report = verify_moments(p, 4, &acc)?;
    let mut checks: Vec<Check> = report
        .checks
        .iter()
        .map(|c| Check::new("moments", format!("int x^{} sigma dx = M_{}", c.n, c.n), c.rel_err, if c.n == 0 { 1e-6 } else { 1e-5 }))
        .collect();
    let res = resolution_of_unity_check(p, 4 + ladder_offset(p), &acc)?;
    checks.push(Check::new("moments", "resolution of unity diagonal", res.max_deviation(), 1e-5));
    Ok(checks)
}

fn uncertainty(p: &ModelParams) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut resid: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for r in [0.0, 0.1, 1.0, 5.0, 20.0] {
        let state = coherent_coeffs(p, Complex64::from_polar(r, 0.3), 1e-15)?;
        resid = resid.max(eigenvalue_residual(&state)?);
        gap = gap.max(uncertainty_product(&state)?.relative_gap());
    }
    checks.push(Check::new("uncertainty", "|D mu - mu mu|, |mu| <= 20", resid, 1e-10));
    checks.push(Check::new("uncertainty", "(dX1)^2 (dX2)^2 = |<Phi(H)>|^2/16", gap, 1e-8));
    let a = coherent_coeffs(p, Complex64::new(2.0, 0.0), 1e-16)?;
    let b = coherent_coeffs(p, Complex64::new(6.0, 1.0), 1e-16)?;
    let direct = overlap(&a, &b)?;
    let closed = overlap_closed_form(&a, &b)?;
    checks.push(Check::new("uncertainty", "overlap sum = closed form", (direct - closed).norm() / closed.norm(), 1e-10));
    Ok(checks)
}
