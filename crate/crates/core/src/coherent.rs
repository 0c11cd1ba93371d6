//! Non-linear coherent states `D|μ⟩ = μ|μ⟩`.
//!
//! Broken phase: `|μ⟩ = c₀ Σ_n μⁿ/(f₁⋯f_n) |n⟩` with
//! `c₀⁻² = 0F3(γ+3/2, γ+1+ε/2, γ+2+ε/2; |μ|²/16)`. Unbroken phase: the same
//! with `g_n` and the sum shifted to start at `|1⟩`, so `⟨0|η⟩ = 0`.

use num_complex::Complex64;

use crate::error::{CesError, Result};
use crate::fock::{build_fock_op, ladder_constant, ladder_offset, ladder_params, phi, FockOp, OpKind};
use crate::model::ModelParams;
use crate::specfun::{hyper_0f3, hyper_0f3_complex};

/// Largest number of ladder levels a state may occupy.
pub const DEFAULT_LEVEL_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    params: ModelParams,
    mu: Complex64,
    coeffs: Vec<Complex64>,
    c0: f64,
    truncation_tail: f64,
}

impl CoherentState {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    /// Amplitudes on `|0⟩, …, |N-1⟩`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Bound on the probability carried by the dropped levels.
    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Amplitudes zero-padded by `extra` levels.
    pub fn padded(&self, extra: usize) -> Vec<Complex64> {
        let mut v = self.coeffs.clone();
        v.resize(self.coeffs.len() + extra, Complex64::new(0.0, 0.0));
        v
    }
}

/// `c₀(μ) = 0F3(b; |μ|²/16)^{-1/2}`.
pub fn normalization_c0(params: &ModelParams, mu_abs: f64) -> Result<f64> {
    Ok(hyper_0f3(ladder_params(params), mu_abs * mu_abs / 16.0)?.powf(-0.5))
}

pub fn coherent_coeffs(params: &ModelParams, mu: Complex64, rel_tail: f64) -> Result<CoherentState> {
    coherent_coeffs_with_cap(params, mu, rel_tail, DEFAULT_LEVEL_CAP)
}

/// Builds `|μ⟩`, truncating once both the dropped probability and the
/// dropped `Ψ(H)`-weighted probability (which controls second moments of
/// `X₁`, `X₂`) fall below `rel_tail`.
pub fn coherent_coeffs_with_cap(params: &ModelParams, mu: Complex64, rel_tail: f64, cap: usize) -> Result<CoherentState> {
    if !(rel_tail > 0.0) {
        return Err(CesError::InvalidParameter(format!("rel_tail must be positive (got {rel_tail})")));
    }
    if !mu.re.is_finite() || !mu.im.is_finite() {
        return Err(CesError::InvalidParameter("μ must be finite".into()));
    }
    let s = ladder_offset(params);
    let c0 = normalization_c0(params, mu.norm())?;
    let ln_c0_sq = 2.0 * c0.ln();
    let ln_mu_sq = 2.0 * mu.norm().ln();
    let weight = |j: usize| -> Result<f64> {
        let lam = ladder_constant(params, j + 1)?;
        Ok(1.0 + lam * lam + phi(params, params.energy(j + s)).abs())
    };

    // ln t_j, t_j = |amplitude of level j+s|², and the sign of λ₁⋯λ_j
    let mut ln_t = vec![ln_c0_sq];
    let mut signs = vec![1.0];
    let mut weighted_sum = weight(0)? * ln_c0_sq.exp();
    let tail = loop {
        let j = ln_t.len() - 1;
        if j >= cap {
            return Err(CesError::TruncationFailure { cap });
        }
        if mu.norm() == 0.0 {
            break 0.0;
        }
        let lam = ladder_constant(params, j + 1)?;
        let ln_next = ln_t[j] + ln_mu_sq - 2.0 * lam.abs().ln();
        let lam2 = ladder_constant(params, j + 2)?;
        let ratio = (ln_mu_sq - 2.0 * lam2.abs().ln()).exp();
        let w_next = weight(j + 1)?;
        let w_ratio = ratio * weight(j + 2)? / w_next;
        if ratio < 0.5 && w_ratio < 0.5 {
            let t_next = ln_next.exp();
            let tail = t_next / (1.0 - ratio);
            let weighted_tail = t_next * w_next / (1.0 - w_ratio);
            if tail <= rel_tail && weighted_tail <= rel_tail * weighted_sum {
                break tail;
            }
        }
        weighted_sum += w_next * ln_next.exp();
        signs.push(signs[j] * lam.signum());
        ln_t.push(ln_next);
    };

    let phase = if mu.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { mu / mu.norm() };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); s];
    let mut rot = Complex64::new(1.0, 0.0);
    for (j, (&lt, &sign)) in ln_t.iter().zip(&signs).enumerate() {
        if j > 0 {
            rot *= phase;
        }
        coeffs.push(rot * (sign * (0.5 * lt).exp()));
    }
    coeffs.resize(coeffs.len().max(s + 2), Complex64::new(0.0, 0.0));
    Ok(CoherentState { params: *params, mu, coeffs, c0, truncation_tail: tail })
}

/// `‖D|μ⟩ − μ|μ⟩‖` over all but the last truncation slot.
pub fn eigenvalue_residual(state: &CoherentState) -> Result<f64> {
    let d = build_fock_op(&state.params, OpKind::D, state.dim())?;
    let dv = d.apply(&state.coeffs)?;
    Ok(dv[..state.dim() - 1]
        .iter()
        .zip(&state.coeffs)
        .map(|(a, v)| (a - state.mu * v).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

fn same_model(a: &CoherentState, b: &CoherentState) -> Result<()> {
    if a.params != b.params {
        return Err(CesError::InvalidParameter("overlap of states from different models".into()));
    }
    Ok(())
}

/// `⟨a|b⟩` from the amplitudes.
pub fn overlap(a: &CoherentState, b: &CoherentState) -> Result<Complex64> {
    same_model(a, b)?;
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x.conj() * y).sum())
}

/// `⟨μ|ν⟩ = c₀(μ) c₀(ν) 0F3(b; μ̄ν/16)`.
pub fn overlap_closed_form(a: &CoherentState, b: &CoherentState) -> Result<Complex64> {
    same_model(a, b)?;
    let z = a.mu.conj() * b.mu / 16.0;
    Ok(hyper_0f3_complex(ladder_params(&a.params), z)? * (a.c0 * b.c0))
}

/// `⟨state|op|state⟩`.
pub fn expectation(state: &CoherentState, op: &FockOp) -> Result<Complex64> {
    if op.dim() != state.dim() {
        return Err(CesError::DimensionMismatch { op: op.dim(), state: state.dim() });
    }
    let ov = op.apply(&state.coeffs)?;
    Ok(state.coeffs.iter().zip(&ov).map(|(v, w)| v.conj() * w).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertainty {
    pub var_x1: f64,
    pub var_x2: f64,
    /// `(ΔX₁)² (ΔX₂)²`
    pub lhs: f64,
    /// `|⟨[X₁, X₂]⟩|² / 4`
    pub rhs: f64,
    /// `⟨Φ(H)⟩`
    pub phi_mean: f64,
}

impl Uncertainty {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs().max(f64::MIN_POSITIVE)
    }
}

/// Moments of `X₁`, `X₂` for an arbitrary amplitude vector, computed with
/// operators two levels larger than the vector so the truncation edge never
/// touches it.
pub fn uncertainty_of(params: &ModelParams, amplitudes: &[Complex64]) -> Result<Uncertainty> {
    let mut v = amplitudes.to_vec();
    v.resize(amplitudes.len() + 2, Complex64::new(0.0, 0.0));
    let dim = v.len();
    let x1 = build_fock_op(params, OpKind::X1, dim)?;
    let x2 = build_fock_op(params, OpKind::X2, dim)?;
    let phi_op = build_fock_op(params, OpKind::Phi, dim)?;
    let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let x1v = x1.apply(&v)?;
    let x2v = x2.apply(&v)?;
    let variance = |xv: &[Complex64]| {
        let mean = dot(&v, xv).re / norm2;
        dot(xv, xv).re / norm2 - mean * mean
    };
    let var_x1 = variance(&x1v);
    let var_x2 = variance(&x2v);
    // ⟨[X₁, X₂]⟩ = ⟨X₁v|X₂v⟩ − ⟨X₂v|X₁v⟩ for Hermitian X
    let comm = (dot(&x1v, &x2v) - dot(&x2v, &x1v)) / norm2;
    let phi_mean = dot(&v, &phi_op.apply(&v)?).re / norm2;
    Ok(Uncertainty { var_x1, var_x2, lhs: var_x1 * var_x2, rhs: comm.norm_sqr() / 4.0, phi_mean })
}

pub fn uncertainty_product(state: &CoherentState) -> Result<Uncertainty> {
    uncertainty_of(&state.params, &state.coeffs)
}

/// `F(μ) = ⟨μ|DD†|μ⟩ − |μ|²`.
pub fn f_functional(state: &CoherentState) -> Result<f64> {
    let v = state.padded(1);
    let ddag = build_fock_op(&state.params, OpKind::Ddag, v.len())?;
    let w = ddag.apply(&v)?;
    let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    Ok(w.iter().map(|c| c.norm_sqr()).sum::<f64>() / norm2 - state.mu.norm_sqr())
}

const SCAN_TAIL: f64 = 1e-14;

fn f_at(params: &ModelParams, mu: f64) -> Result<f64> {
    f_functional(&coherent_coeffs(params, Complex64::new(mu, 0.0), SCAN_TAIL)?)
}

/// A maximal run of scan points along which `F` moves in one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneSegment {
    pub mu_start: f64,
    pub mu_end: f64,
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinUncertainty {
    pub mu0: f64,
    pub f_min: f64,
    /// Whether the minimum lies strictly inside `(0, mu_max)`.
    pub interior: bool,
    pub samples: Vec<(f64, f64)>,
    pub segments: Vec<MonotoneSegment>,
}

/// Minimizes `F` over `|μ| ∈ [0, mu_max]`: uniform scan, then golden-section
/// refinement between the neighbours of the best scan point.
pub fn min_uncertainty_scan(params: &ModelParams, mu_max: f64, steps: usize) -> Result<MinUncertainty> {
    if !(mu_max > 0.0) || steps < 2 {
        return Err(CesError::InvalidParameter(format!("scan needs mu_max > 0 and steps ≥ 2 (got {mu_max}, {steps})")));
    }
    let samples = (0..=steps)
        .map(|i| {
            let mu = mu_max * i as f64 / steps as f64;
            f_at(params, mu).map(|f| (mu, f))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut segments: Vec<MonotoneSegment> = Vec::new();
    for w in samples.windows(2) {
        let increasing = w[1].1 > w[0].1;
        match segments.last_mut() {
            Some(seg) if seg.increasing == increasing => seg.mu_end = w[1].0,
            _ => segments.push(MonotoneSegment { mu_start: w[0].0, mu_end: w[1].0, increasing }),
        }
    }

    let best = (0..samples.len()).min_by(|&a, &b| samples[a].1.total_cmp(&samples[b].1)).unwrap_or(0);
    let (mut mu0, mut f_min) = samples[best];
    if best > 0 && best < steps {
        let (m, f) = golden_section(|x| f_at(params, x), samples[best - 1].0, samples[best + 1].0)?;
        if f < f_min {
            mu0 = m;
            f_min = f;
        }
    }
    let interior = best > 0 && best < steps;
    Ok(MinUncertainty { mu0, f_min, interior, samples, segments })
}

fn golden_section(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if (b - a).abs() <= 1e-10 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::hyper_0f3_terms;

    fn broken(g: f64, e: f64) -> ModelParams {
        ModelParams::broken(g, e).unwrap()
    }

    fn unbroken(g: f64, e: f64) -> ModelParams {
        ModelParams::unbroken(g, e).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_limits() {
        let s = coherent_coeffs(&broken(1.0, 1.0), c(0.0, 0.0), 1e-14).unwrap();
        assert_eq!(s.c0(), 1.0);
        assert_eq!(s.coeffs()[0], c(1.0, 0.0));
        assert!(s.coeffs()[1..].iter().all(|v| *v == c(0.0, 0.0)));
        assert_eq!(eigenvalue_residual(&s).unwrap(), 0.0);

        let u = coherent_coeffs(&unbroken(1.0, 1.0), c(0.0, 0.0), 1e-14).unwrap();
        assert_eq!(u.coeffs()[0], c(0.0, 0.0));
        assert_eq!(u.coeffs()[1], c(1.0, 0.0));
        let small = coherent_coeffs(&unbroken(1.0, 1.0), c(1e-6, 0.0), 1e-14).unwrap();
        assert!((small.coeffs()[1].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_ratio_follows_the_recurrence() {
        let s = coherent_coeffs(&broken(1.0, 1.0), c(4.0, 0.0), 1e-14).unwrap();
        let ratio = s.coeffs()[1] / (s.coeffs()[0] * 4.0);
        assert!((ratio.re + 1.0 / 350f64.sqrt()).abs() < 1e-15);
        assert!(ratio.im.abs() < 1e-15);
    }

    #[test]
    fn normalization_partial_sums_match_series() {
        let p = broken(1.0, 1.0);
        let mu = c(3.0, -4.0);
        let s = coherent_coeffs(&p, mu, 1e-16).unwrap();
        let z = mu.norm_sqr() / 16.0;
        let mut series = 0.0;
        let mut direct = 0.0;
        for (term, amp) in hyper_0f3_terms(ladder_params(&p), z).zip(s.coeffs()) {
            series += term;
            direct += amp.norm_sqr() / (s.c0() * s.c0());
            assert!((series - direct).abs() <= 1e-12 * series);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_residuals() {
        for p in [broken(1.0, 1.0), broken(0.0, 0.5), broken(2.5, -1.0), unbroken(2.0, 0.5), unbroken(0.0, 1.0)] {
            for r in [0.1, 1.0, 5.0, 20.0] {
                let mu = Complex64::from_polar(r, 0.7);
                let s = coherent_coeffs(&p, mu, 1e-14).unwrap();
                let res = eigenvalue_residual(&s).unwrap();
                assert!(res < 1e-10, "{p:?} |μ|={r}: {res}");
                assert!(s.truncation_tail() < 1e-14);
            }
        }
        let u = coherent_coeffs(&unbroken(1.0, 1.0), c(5.0, 0.0), 1e-14).unwrap();
        assert_eq!(u.coeffs()[0], c(0.0, 0.0));
        assert!(eigenvalue_residual(&u).unwrap() < 1e-10);
    }

    #[test]
    fn overlaps() {
        let p = broken(1.0, 1.0);
        let a = coherent_coeffs(&p, c(2.0, 0.0), 1e-16).unwrap();
        let b = coherent_coeffs(&p, c(6.0, 0.0), 1e-16).unwrap();
        let direct = overlap(&a, &b).unwrap();
        let closed = overlap_closed_form(&a, &b).unwrap();
        assert!((direct - closed).norm() < 1e-10 * closed.norm());
        assert!(direct.re > 0.0 && direct.re < 1.0 && direct.im.abs() < 1e-15);
        assert!((overlap(&a, &a).unwrap().re - 1.0).abs() < 1e-13);

        let x = coherent_coeffs(&p, c(1.0, 2.5), 1e-16).unwrap();
        let y = coherent_coeffs(&p, c(-3.0, 0.5), 1e-16).unwrap();
        let xy = overlap(&x, &y).unwrap();
        assert!((xy - overlap(&y, &x).unwrap().conj()).norm() < 1e-15);
        assert!((xy - overlap_closed_form(&x, &y).unwrap()).norm() < 1e-10 * xy.norm());

        let q = coherent_coeffs(&broken(0.0, 1.0), c(1.0, 0.0), 1e-14).unwrap();
        assert!(overlap(&a, &q).is_err());
    }

    #[test]
    fn expectations() {
        let p = broken(1.0, 1.0);
        let mu = Complex64::from_polar(3.0, 1.1);
        let s = coherent_coeffs(&p, mu, 1e-16).unwrap();
        let n = s.dim();
        let d = build_fock_op(&p, OpKind::D, n).unwrap();
        assert!((expectation(&s, &d).unwrap() - mu).norm() < 1e-12);
        let x1 = build_fock_op(&p, OpKind::X1, n).unwrap();
        assert!((expectation(&s, &x1).unwrap().re - mu.re).abs() < 1e-12);
        let x2 = build_fock_op(&p, OpKind::X2, n).unwrap();
        assert!((expectation(&s, &x2).unwrap().re - mu.im).abs() < 1e-12);
        let vac = coherent_coeffs(&p, c(0.0, 0.0), 1e-14).unwrap();
        let h = build_fock_op(&p, OpKind::H, vac.dim()).unwrap();
        assert_eq!(expectation(&vac, &h).unwrap().re, 5.0);
        assert!(expectation(&s, &h).is_err());
    }

    #[test]
    fn uncertainty_equality() {
        let p = broken(1.0, 1.0);
        let vac = uncertainty_product(&coherent_coeffs(&p, c(0.0, 0.0), 1e-14).unwrap()).unwrap();
        assert!((vac.var_x1 - 87.5).abs() < 1e-12 && (vac.var_x2 - 87.5).abs() < 1e-12);
        assert!((vac.lhs - 7656.25).abs() < 1e-9 && (vac.rhs - 7656.25).abs() < 1e-9);

        for q in [p, broken(0.0, 0.5), unbroken(2.0, 0.5)] {
            for mu in [c(0.5, 0.0), c(2.0, -1.0), c(0.0, 7.0), c(15.0, 9.0)] {
                let u = uncertainty_product(&coherent_coeffs(&q, mu, 1e-15).unwrap()).unwrap();
                assert!(u.relative_gap() < 1e-8, "{q:?} μ={mu}: {u:?}");
                assert!((u.var_x1 - u.phi_mean / 4.0).abs() < 1e-8 * u.var_x1);
            }
        }

        let g1 = crate::fock::g_n(&unbroken(1.0, 1.0), 1).unwrap();
        let first = uncertainty_product(&coherent_coeffs(&unbroken(1.0, 1.0), c(0.0, 0.0), 1e-14).unwrap()).unwrap();
        assert!((first.var_x1 - g1 * g1 / 4.0).abs() < 1e-12);
        assert!(first.relative_gap() < 1e-12);
    }

    #[test]
    fn perturbed_state_is_not_intelligent() {
        let p = broken(1.0, 1.0);
        let s = coherent_coeffs(&p, c(2.0, 0.0), 1e-15).unwrap();
        let mut v = s.coeffs().to_vec();
        v[2] += c(0.3, 0.0);
        let u = uncertainty_of(&p, &v).unwrap();
        assert!(u.lhs > u.rhs * (1.0 + 1e-3), "{u:?}");
    }

    #[test]
    fn f_functional_values() {
        let p = broken(1.0, 1.0);
        let vac = coherent_coeffs(&p, c(0.0, 0.0), 1e-14).unwrap();
        assert!((f_functional(&vac).unwrap() - 350.0).abs() < 1e-10);
        let a = f_functional(&coherent_coeffs(&p, c(3.0, 0.0), 1e-15).unwrap()).unwrap();
        let b = f_functional(&coherent_coeffs(&p, Complex64::from_polar(3.0, 2.0), 1e-15).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs());
        let u = uncertainty_product(&coherent_coeffs(&p, c(3.0, 0.0), 1e-15).unwrap()).unwrap();
        assert!((a - u.phi_mean).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn scan_reports_minimum_and_segments() {
        let p = broken(1.0, 1.0);
        let scan = min_uncertainty_scan(&p, 5.0, 20).unwrap();
        assert_eq!(scan.samples.len(), 21);
        assert!(scan.samples.iter().all(|&(_, f)| f >= scan.f_min - 1e-9));
        assert_eq!(scan.segments.first().unwrap().mu_start, 0.0);
        assert_eq!(scan.segments.last().unwrap().mu_end, 5.0);
        assert!(min_uncertainty_scan(&p, 0.0, 10).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x| Ok((x - 1.3) * (x - 1.3) + 2.0), 0.0, 3.0).unwrap();
        assert!((x - 1.3).abs() < 1e-6 && (fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_cap_and_guards() {
        let p = broken(1.0, 1.0);
        assert_eq!(
            coherent_coeffs_with_cap(&p, c(1e6, 0.0), 1e-14, 8).unwrap_err(),
            CesError::TruncationFailure { cap: 8 }
        );
        assert!(coherent_coeffs(&p, c(1.0, 0.0), 0.0).is_err());
    }
}
