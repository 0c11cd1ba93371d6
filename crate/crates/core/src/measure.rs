//! Resolution of unity for the coherent states.
//!
//! With `dρ(μ) = σ(|μ|²) d²μ / π`, the angular integral leaves the Stieltjes
//! moment problem `∫₀^∞ xⁿ σ(x) dx = M_n = 16ⁿ n! (b₁)_n (b₂)_n (b₃)_n`,
//! solved by
//!
//! `σ(x) = G^{4,0}_{0,4}(x/16 | 0, b₁−1, b₂−1, b₃−1) / (16 Γ(b₁) Γ(b₂) Γ(b₃))`.

use rayon::prelude::*;

use crate::error::{CesError, Result};
use crate::fock::{ladder_constant, ladder_offset, ladder_params};
use crate::model::ModelParams;
use crate::quad::simpson;
use crate::specfun::{hyper_0f3, ln_gamma, meijer_g40_04, Accuracy};

/// Largest moment order accepted by the quadrature checks.
pub const MAX_QUADRATURE_MOMENT: usize = 8;

/// Left end of sampled density profiles.
pub const PROFILE_X_MIN: f64 = 1e-6;

/// Steps in `ln x` of the moment quadrature, above and below `LOG_SPLIT`.
const LOG_STEP: f64 = 1.0 / 64.0;
const LOG_STEP_COARSE: f64 = 1.0 / 16.0;
const LOG_SPLIT: f64 = 1e-3;

/// `M_n = 16ⁿ n! (b₁)_n (b₂)_n (b₃)_n`.
pub fn moment(params: &ModelParams, n: usize) -> f64 {
    let b = ladder_params(params);
    (0..n)
        .map(|i| {
            let i = i as f64;
            16.0 * (i + 1.0) * (b[0] + i) * (b[1] + i) * (b[2] + i)
        })
        .product()
}

/// `λ₁² ⋯ λ_n²`, which must equal [`moment`].
pub fn structure_product(params: &ModelParams, n: usize) -> Result<f64> {
    (1..=n).try_fold(1.0, |acc, i| {
        let lam = ladder_constant(params, i)?;
        Ok(acc * lam * lam)
    })
}

/// Lower parameters of the Meijer G-function in `σ`.
pub fn meijer_params(params: &ModelParams) -> [f64; 4] {
    let b = ladder_params(params);
    [0.0, b[0] - 1.0, b[1] - 1.0, b[2] - 1.0]
}

/// `1 / (16 Γ(b₁) Γ(b₂) Γ(b₃))`.
pub fn sigma_prefactor(params: &ModelParams) -> f64 {
    let b = ladder_params(params);
    (-(16f64.ln() + b.iter().map(|&v| ln_gamma(v)).sum::<f64>())).exp()
}

pub fn sigma_density(params: &ModelParams, x: f64, acc: &Accuracy) -> Result<f64> {
    Ok(meijer_g40_04(meijer_params(params), x / 16.0, acc)?.value * sigma_prefactor(params))
}

fn sample_sigma(params: &ModelParams, xs: &[f64], acc: &Accuracy) -> Result<Vec<f64>> {
    xs.par_iter().map(|&x| sigma_density(params, x, acc)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub n: usize,
    pub quadrature: f64,
    pub exact: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub checks: Vec<MomentCheck>,
    pub x_lo: f64,
    pub x_hi: f64,
    pub nodes: usize,
}

impl MomentReport {
    pub fn max_rel_err(&self) -> f64 {
        self.checks.iter().map(|c| c.rel_err).fold(0.0, f64::max)
    }
}

/// `∫ xⁿ σ(x) dx` for `n ≤ n_max` against [`moment`].
///
/// The integral is taken in `u = ln x` with Simpson's rule on
/// `[x_lo, X*]`. `X*` is doubled until `x^{n+1} σ` drops below `1e-16 M_n`
/// for every `n`. Near the origin `σ ~ x^{b_min}`, so `x_lo` is pushed down
/// until `x_lo^{1+b_min} ≤ 1e-12` and the remaining piece is added as
/// `x_lo^{n+1} σ(x_lo) / (n+1+b_min)`. Below `x = 1e-3` the integrand is a
/// near power law in `x` and a coarser step is used.
pub fn verify_moments(params: &ModelParams, n_max: usize, acc: &Accuracy) -> Result<MomentReport> {
    if n_max > MAX_QUADRATURE_MOMENT {
        return Err(CesError::InvalidParameter(format!(
            "moment quadrature is limited to n ≤ {MAX_QUADRATURE_MOMENT} (got {n_max})"
        )));
    }
    let b_min = meijer_params(params).iter().copied().fold(f64::INFINITY, f64::min);
    let x_lo = PROFILE_X_MIN.min(10f64.powf(-12.0 / (1.0 + b_min)));
    let mut x_hi: f64 = 16.0;
    loop {
        let s = sigma_density(params, x_hi, acc)?;
        let worst = (0..=n_max)
            .map(|n| x_hi.powi(n as i32 + 1) * s / moment(params, n))
            .fold(0.0, f64::max);
        if worst < 1e-16 {
            break;
        }
        x_hi *= 2.0;
        if x_hi > 1e12 {
            return Err(CesError::Truncation { estimate: worst, tolerance: 1e-16 });
        }
    }

    let u_mid = LOG_SPLIT.ln().max(x_lo.ln());
    let left = LogPanel::new(x_lo.ln(), u_mid, LOG_STEP_COARSE);
    let right = LogPanel::new(u_mid, x_hi.ln(), LOG_STEP);
    let left_sigma = sample_sigma(params, &left.xs, acc)?;
    let right_sigma = sample_sigma(params, &right.xs, acc)?;

    let checks = (0..=n_max)
        .map(|n| {
            let p = n as i32 + 1;
            let below = x_lo.powi(p) * left_sigma[0] / (p as f64 + b_min);
            let quadrature = below + left.integrate(&left_sigma, p) + right.integrate(&right_sigma, p);
            let exact = moment(params, n);
            MomentCheck { n, quadrature, exact, rel_err: (quadrature - exact).abs() / exact }
        })
        .collect();
    Ok(MomentReport { checks, x_lo, x_hi, nodes: left.xs.len() + right.xs.len() })
}

/// Uniform grid in `u = ln x` with an even number of intervals.
struct LogPanel {
    xs: Vec<f64>,
    du: f64,
}

impl LogPanel {
    fn new(u_lo: f64, u_hi: f64, step: f64) -> Self {
        let mut intervals = (((u_hi - u_lo) / step).ceil() as usize).max(2);
        intervals += intervals % 2;
        let du = (u_hi - u_lo) / intervals as f64;
        Self { xs: (0..=intervals).map(|i| (u_lo + i as f64 * du).exp()).collect(), du }
    }

    /// `∫ x^{p-1} σ dx = ∫ x^p σ du`.
    fn integrate(&self, sigma: &[f64], p: i32) -> f64 {
        let integrand: Vec<f64> = self.xs.iter().zip(sigma).map(|(x, s)| x.powi(p) * s).collect();
        simpson(&integrand, self.du)
    }
}

/// `∫₀^∞ σ(x) dx`.
pub fn sigma_normalization(params: &ModelParams, acc: &Accuracy) -> Result<f64> {
    Ok(verify_moments(params, 0, acc)?.checks[0].quadrature)
}

/// Diagonal of `∫ dρ |μ⟩⟨μ|` on `{|0⟩, …, |N-1⟩}` and its target (the
/// identity, or the identity minus `|0⟩⟨0|` in the unbroken phase). The
/// off-diagonal entries vanish identically through the angular integral.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionReport {
    pub diagonal: Vec<f64>,
    pub target: Vec<f64>,
}

impl ResolutionReport {
    pub fn max_deviation(&self) -> f64 {
        self.diagonal.iter().zip(&self.target).map(|(d, t)| (d - t).abs()).fold(0.0, f64::max)
    }
}

pub fn resolution_of_unity_check(params: &ModelParams, n_basis: usize, acc: &Accuracy) -> Result<ResolutionReport> {
    let s = ladder_offset(params);
    if n_basis == 0 || n_basis > MAX_QUADRATURE_MOMENT + s {
        return Err(CesError::InvalidParameter(format!(
            "resolution check needs 1 ≤ N ≤ {} (got {n_basis})",
            MAX_QUADRATURE_MOMENT + s
        )));
    }
    let n_max = n_basis.saturating_sub(s + 1);
    let report = verify_moments(params, n_max, acc)?;
    let mut diagonal = vec![0.0; s.min(n_basis)];
    let mut target = vec![0.0; s.min(n_basis)];
    for j in 0..n_basis - diagonal.len() {
        diagonal.push(report.checks[j].quadrature / structure_product(params, j)?);
        target.push(1.0);
    }
    Ok(ResolutionReport { diagonal, target })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub x: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `f(x) = σ(x) / c₀²(√x) = σ(x) 0F3(b; x/16)`
    pub radial: Vec<f64>,
}

impl DensityProfile {
    pub fn min_radial(&self) -> f64 {
        self.radial.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when `f` rises to a single maximum and then falls, allowing
    /// relative wiggles of size `tol` from the Meijer evaluation.
    pub fn is_single_peaked(&self, tol: f64) -> bool {
        is_unimodal(&self.radial, tol)
    }
}

/// Non-decreasing then non-increasing, up to relative noise `tol`.
pub fn is_unimodal(values: &[f64], tol: f64) -> bool {
    let Some(peak) = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])) else {
        return false;
    };
    let ok = |lo: f64, hi: f64| hi >= lo - tol * lo.abs().max(hi.abs());
    values[..=peak].windows(2).all(|w| ok(w[0], w[1])) && values[peak..].windows(2).all(|w| ok(w[1], w[0]))
}

/// Samples on `PROFILE_X_MIN ..= x_max`, uniformly spaced.
pub fn radial_density_profile(params: &ModelParams, x_max: f64, n_samples: usize, acc: &Accuracy) -> Result<DensityProfile> {
    if !(x_max > PROFILE_X_MIN) || n_samples < 2 {
        return Err(CesError::InvalidParameter(format!(
            "density profile needs x_max > {PROFILE_X_MIN} and at least 2 samples"
        )));
    }
    let step = (x_max - PROFILE_X_MIN) / (n_samples - 1) as f64;
    let x: Vec<f64> = (0..n_samples).map(|i| PROFILE_X_MIN + i as f64 * step).collect();
    let sigma = sample_sigma(params, &x, acc)?;
    let b = ladder_params(params);
    let radial = x
        .iter()
        .zip(&sigma)
        .map(|(&xi, &s)| Ok(s * hyper_0f3(b, xi / 16.0)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityProfile { x, sigma, radial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;

    fn broken(g: f64, e: f64) -> ModelParams {
        ModelParams::broken(g, e).unwrap()
    }

    fn unbroken(g: f64, e: f64) -> ModelParams {
        ModelParams::unbroken(g, e).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn moment_examples() {
        let p = broken(1.0, 1.0);
        assert_eq!(moment(&p, 0), 1.0);
        assert_eq!(moment(&p, 1), 350.0);
        assert_eq!(moment(&p, 2), 617_400.0);
        assert_eq!(moment(&unbroken(1.0, 1.0), 1), 112.0);
    }

    #[test]
    fn moments_equal_structure_products() {
        for p in [broken(1.0, 1.0), broken(0.0, -1.5), broken(2.5, 4.0), unbroken(1.0, 1.0), unbroken(2.0, 0.5)] {
            for n in 0..=12 {
                assert!(rel(moment(&p, n), structure_product(&p, n).unwrap()) < 1e-12, "{p:?} n={n}");
            }
        }
    }

    #[test]
    fn meijer_parameters_and_prefactor() {
        assert_eq!(meijer_params(&broken(1.0, 1.0)), [0.0, 1.5, 1.5, 2.5]);
        assert_eq!(meijer_params(&unbroken(1.0, 1.0)), [0.0, 2.5, 0.0, 1.0]);
        let pre = sigma_prefactor(&broken(1.0, 1.0));
        assert!(rel(pre, 1.0 / (16.0 * gamma(2.5) * gamma(2.5) * gamma(3.5))) < 1e-14);
    }

    #[test]
    fn change_of_variables_reproduces_prefactor() {
        // ∫ G(z) dz = Π Γ(b_j + 1); with x = 16 z the 16 cancels against the prefactor
        let p = broken(1.0, 1.0);
        let b = meijer_params(&p);
        let acc = Accuracy::default();
        let x = 3.7;
        let g = meijer_g40_04(b, x / 16.0, &acc).unwrap().value;
        let mass: f64 = b.iter().map(|&v| gamma(v + 1.0)).product();
        let sigma = sigma_density(&p, x, &acc).unwrap();
        assert!(rel(sigma, g * sigma_prefactor(&p)) < 1e-15);
        assert!(rel(16.0 * sigma_prefactor(&p) * mass, 1.0) < 1e-13);
    }

    #[test]
    fn sigma_moments_broken() {
        let p = broken(1.0, 1.0);
        let report = verify_moments(&p, 6, &Accuracy::default()).unwrap();
        for c in &report.checks {
            let tol = if c.n <= 4 { 1e-5 } else { 1e-4 };
            assert!(c.rel_err < tol, "{c:?}");
        }
        assert!(report.checks[0].rel_err < 1e-6);
        assert!(rel(report.checks[1].quadrature, 350.0) < 1e-6);
    }

    #[test]
    fn sigma_moments_with_singular_origin() {
        // b_min = γ + ε/2 = -0.75: σ ~ x^{-3/4}
        let p = broken(1.0, -3.5);
        let report = verify_moments(&p, 3, &Accuracy::default()).unwrap();
        assert!(report.x_lo < 1e-40);
        assert!(report.max_rel_err() < 1e-5, "{report:?}");
    }

    #[test]
    fn sigma_moments_unbroken() {
        let p = unbroken(1.0, 1.0);
        let report = verify_moments(&p, 2, &Accuracy::default()).unwrap();
        assert!(report.max_rel_err() < 1e-5, "{report:?}");
        assert!(rel(report.checks[1].quadrature, 112.0) < 1e-5);
    }

    #[test]
    fn quadrature_order_is_capped() {
        assert!(verify_moments(&broken(1.0, 1.0), 9, &Accuracy::default()).is_err());
    }

    #[test]
    fn resolution_of_unity() {
        let acc = Accuracy::default();
        let r = resolution_of_unity_check(&broken(1.0, 1.0), 5, &acc).unwrap();
        assert_eq!(r.target, vec![1.0; 5]);
        assert!(r.max_deviation() < 1e-5, "{r:?}");
        let u = resolution_of_unity_check(&unbroken(1.0, 1.0), 4, &acc).unwrap();
        assert_eq!(u.diagonal[0], 0.0);
        assert_eq!(u.target, vec![0.0, 1.0, 1.0, 1.0]);
        assert!(u.max_deviation() < 1e-5, "{u:?}");
    }

    #[test]
    fn radial_profiles_are_positive_and_single_peaked() {
        let acc = Accuracy::default();
        for p in [broken(1.0, -3.5), broken(1.0, 0.0), broken(1.0, 4.0), broken(0.0, 1.0), unbroken(2.0, 0.5)] {
            let prof = radial_density_profile(&p, 40.0, 81, &acc).unwrap();
            assert!(prof.sigma.iter().all(|&s| s > 0.0), "{p:?}");
            assert!(prof.min_radial() > 0.0);
            assert!(prof.is_single_peaked(1e-8), "{p:?}");
        }
    }

    #[test]
    fn unimodality_helper() {
        assert!(is_unimodal(&[1.0, 2.0, 3.0, 2.0, 1.0], 0.0));
        assert!(is_unimodal(&[3.0, 2.0, 1.0], 0.0));
        assert!(!is_unimodal(&[3.0, 1.0, 2.0, 1.0], 0.0));
        assert!(!is_unimodal(&[], 0.0));
    }
}
