//! The two CES partner models of the radial harmonic oscillator.
//!
//! Both phases share one parametrisation of the SUSY potential,
//!
//! `W(x) = x + k/x + u'(x)/u(x)`, `u(x) = 1F1((1-ε)/2; k + 1/2; -x²)`,
//!
//! with pole strength `k = γ + 1` (broken SUSY) or `k = -(γ + 1)` (unbroken
//! SUSY). `H+ = A A†` is then a radial oscillator with centrifugal term
//! `k(k-1)/2x²` and `H- = A† A` is the conditionally solvable partner.

use std::fmt;
use std::str::FromStr;

use crate::error::{CesError, Result};
use crate::quad::{derivative, inner, Grid, Label, Sector, WaveFunction};
use crate::specfun::{kummer_1f1, kummer_log_derivative, laguerre, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Broken,
    Unbroken,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Broken => "broken",
            Phase::Unbroken => "unbroken",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = CesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "broken" => Ok(Phase::Broken),
            "unbroken" => Ok(Phase::Unbroken),
            other => Err(CesError::InvalidParameter(format!("unknown phase '{other}'"))),
        }
    }
}

/// Range over which `u` is scanned for nodes when parameters are built.
const NODE_SCAN_MAX: f64 = 25.0;
const NODE_SCAN_POINTS: usize = 2500;

/// Validated model parameters `(γ, ε, phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    epsilon: f64,
    phase: Phase,
}

impl ModelParams {
    pub fn new(gamma: f64, epsilon: f64, phase: Phase) -> Result<Self> {
        if !gamma.is_finite() || !epsilon.is_finite() {
            return Err(CesError::InvalidParameter("γ and ε must be finite".into()));
        }
        if gamma < 0.0 {
            return Err(CesError::InvalidParameter(format!("γ ≥ 0 required (got γ={gamma})")));
        }
        match phase {
            Phase::Broken => {
                if epsilon <= -2.0 * gamma - 2.0 {
                    return Err(CesError::InvalidParameter(format!(
                        "broken SUSY requires ε > −2γ−2 (got γ={gamma}, ε={epsilon})"
                    )));
                }
            }
            Phase::Unbroken => {
                if epsilon <= -1.0 {
                    return Err(CesError::InvalidParameter(format!(
                        "unbroken SUSY requires ε > −1 (got γ={gamma}, ε={epsilon})"
                    )));
                }
            }
        }
        let params = Self { gamma, epsilon, phase };
        let (a, b) = params.kummer_params();
        if b <= 0.0 && (b - b.round()).abs() < 1e-12 && !(a <= 0.0 && (a - a.round()).abs() < 1e-12 && a > b) {
            return Err(CesError::InvalidParameter(format!(
                "u(x) = 1F1({a}; {b}; -x²) is undefined for γ = {gamma}"
            )));
        }
        params.scan_for_nodes(
            (1..=NODE_SCAN_POINTS).map(|i| NODE_SCAN_MAX * i as f64 / NODE_SCAN_POINTS as f64),
        )?;
        Ok(params)
    }

    pub fn broken(gamma: f64, epsilon: f64) -> Result<Self> {
        Self::new(gamma, epsilon, Phase::Broken)
    }

    pub fn unbroken(gamma: f64, epsilon: f64) -> Result<Self> {
        Self::new(gamma, epsilon, Phase::Unbroken)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Coefficient `k` of the `1/x` term in `W`.
    pub fn pole_strength(&self) -> f64 {
        match self.phase {
            Phase::Broken => self.gamma + 1.0,
            Phase::Unbroken => -(self.gamma + 1.0),
        }
    }

    /// The value of γ entering the broken-phase closed forms; the unbroken
    /// phase is reached by `γ → −γ−2`.
    pub fn effective_gamma(&self) -> f64 {
        match self.phase {
            Phase::Broken => self.gamma,
            Phase::Unbroken => -self.gamma - 2.0,
        }
    }

    /// `(a, b)` of `u(x) = 1F1(a; b; -x²)`.
    pub fn kummer_params(&self) -> (f64, f64) {
        (0.5 * (1.0 - self.epsilon), self.pole_strength() + 0.5)
    }

    /// Angular momentum `l` of the normalizable `H+` oscillator states,
    /// `ψ+ ~ x^{l+1}` at the origin.
    pub fn plus_angular(&self) -> f64 {
        match self.phase {
            Phase::Broken => self.gamma,
            Phase::Unbroken => self.gamma + 1.0,
        }
    }

    /// Energy of the `n`-th eigenstate of `H-`.
    pub fn energy(&self, n: usize) -> f64 {
        energy(self, n)
    }

    /// Energy of the `n`-th eigenstate of `H+`.
    pub fn energy_plus(&self, n: usize) -> f64 {
        match self.phase {
            Phase::Broken => energy(self, n),
            Phase::Unbroken => energy(self, n + 1),
        }
    }

    fn scan_for_nodes(&self, xs: impl Iterator<Item = f64>) -> Result<()> {
        let (a, b) = self.kummer_params();
        let mut prev: Option<(f64, f64)> = None;
        for x in xs {
            let u = kummer_1f1(a, b, -x * x)?;
            if u == 0.0 || !u.is_finite() {
                return Err(CesError::NodeOfU { x });
            }
            if let Some((px, pu)) = prev {
                if pu.signum() != u.signum() {
                    return Err(CesError::NodeOfU { x: 0.5 * (px + x) });
                }
            }
            prev = Some((x, u));
        }
        Ok(())
    }
}

/// `u(x) = 1F1(a; b; -x²)`.
pub fn u(params: &ModelParams, x: f64) -> Result<f64> {
    let (a, b) = params.kummer_params();
    kummer_1f1(a, b, -x * x)
}

/// `u'(x) / u(x)`.
pub fn u_log_derivative(params: &ModelParams, x: f64) -> Result<f64> {
    let (a, b) = params.kummer_params();
    let ld = -2.0 * x * kummer_log_derivative(a, b, -x * x)?;
    if !ld.is_finite() {
        return Err(CesError::NodeOfU { x });
    }
    Ok(ld)
}

/// SUSY potential `W(x)`.
pub fn susy_potential(params: &ModelParams, x: f64) -> Result<f64> {
    Ok(x + params.pole_strength() / x + u_log_derivative(params, x)?)
}

/// `V+(x) = x²/2 + γ(γ+1)/2x² + ε + γ + 1/2`, with `γ → −γ−2` in the
/// unbroken phase.
pub fn potential_plus(params: &ModelParams, x: f64) -> f64 {
    let g = params.effective_gamma();
    0.5 * x * x + g * (g + 1.0) / (2.0 * x * x) + params.epsilon + g + 0.5
}

/// The CES partner potential `V-(x)`.
pub fn potential_minus(params: &ModelParams, x: f64) -> Result<f64> {
    let g = params.effective_gamma();
    let v = u_log_derivative(params, x)?;
    Ok(0.5 * x * x + (g + 1.0) * (g + 2.0) / (2.0 * x * x) + g - params.epsilon
        + 1.5
        + v * (2.0 * x + 2.0 * (g + 1.0) / x + v))
}

/// Spectrum of `H-`: `2n + 2γ + 2 + ε` (broken); `0, 1 + ε, 3 + ε, …`
/// (unbroken).
pub fn energy(params: &ModelParams, n: usize) -> f64 {
    let n = n as f64;
    match params.phase {
        Phase::Broken => 2.0 * n + 2.0 * params.gamma + 2.0 + params.epsilon,
        Phase::Unbroken => {
            if n == 0.0 {
                0.0
            } else {
                2.0 * (n - 1.0) + 1.0 + params.epsilon
            }
        }
    }
}

/// Normalized radial-oscillator state `[2 n!/Γ(n+l+3/2)]^{1/2} x^{l+1}
/// e^{-x²/2} L_n^{l+1/2}(x²)`.
pub fn oscillator_state(l: f64, n: usize, x: f64) -> f64 {
    let ln_norm = 0.5 * (2f64.ln() + ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + l + 1.5));
    let y = x * x;
    (ln_norm + (l + 1.0) * x.ln() - 0.5 * y).exp() * laguerre(n, l + 0.5, y)
}

/// A model realised on a grid: caches `W`, `V+` and `V-` and applies the
/// SUSY and ladder operators by finite differences.
#[derive(Debug, Clone)]
pub struct Realization {
    params: ModelParams,
    grid: Grid,
    w: Vec<f64>,
    v_plus: Vec<f64>,
    v_minus: Vec<f64>,
}

impl Realization {
    pub fn new(params: ModelParams, grid: Grid) -> Result<Self> {
        params.scan_for_nodes(grid.points())?;
        let w = grid.points().map(|x| susy_potential(&params, x)).collect::<Result<Vec<_>>>()?;
        let v_plus = grid.sample(|x| potential_plus(&params, x));
        let v_minus = grid.points().map(|x| potential_minus(&params, x)).collect::<Result<Vec<_>>>()?;
        Ok(Self { params, grid, w, v_plus, v_minus })
    }

    /// Realization on the default grid sized for levels `0..=max_level`.
    pub fn with_default_grid(params: ModelParams, max_level: usize) -> Result<Self> {
        Self::new(params, Grid::for_energy(params.energy(max_level + 1)))
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn potential(&self, sector: Sector) -> &[f64] {
        match sector {
            Sector::Plus => &self.v_plus,
            Sector::Minus => &self.v_minus,
        }
    }

    fn label(&self, sector: Sector, n: usize) -> Label {
        Label { phase: self.params.phase, sector, n }
    }

    fn check_grid(&self, psi: &WaveFunction) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(CesError::GridMismatch);
        }
        Ok(())
    }

    /// `ψ+_n` in closed form (Laguerre representation).
    pub fn eigenfunction_plus(&self, n: usize) -> WaveFunction {
        let l = self.params.plus_angular();
        WaveFunction::from_fn(self.grid, |x| oscillator_state(l, n, x)).with_label(self.label(Sector::Plus, n))
    }

    /// `ψ-_n` obtained from `ψ+` through the intertwining relation
    /// `ψ-_n = E_n^{-1/2} A† ψ+`, with `A†` applied by finite differences.
    /// The unbroken ground state is the zero mode `x^{γ+1} e^{-x²/2} / u(x)`.
    pub fn eigenfunction_minus(&self, n: usize) -> Result<WaveFunction> {
        let plus_index = match (self.params.phase, n) {
            (Phase::Broken, n) => n,
            (Phase::Unbroken, 0) => return self.zero_mode(),
            (Phase::Unbroken, n) => n - 1,
        };
        let e = self.params.energy(n);
        let raised = self.apply_a(&self.eigenfunction_plus(plus_index), true)?;
        let norm = raised.norm();
        let expected = e.sqrt();
        if ((norm - expected) / expected).abs() > 1e-3 {
            return Err(CesError::NormalizationDrift { found: norm, expected });
        }
        Ok(raised.scaled(1.0 / norm).with_label(self.label(Sector::Minus, n)))
    }

    fn zero_mode(&self) -> Result<WaveFunction> {
        let g = self.params.gamma;
        let values = self
            .grid
            .points()
            .map(|x| Ok((-0.5 * x * x).exp() * x.powf(g + 1.0) / u(&self.params, x)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(WaveFunction::new(self.grid, values)?.normalized().with_label(self.label(Sector::Minus, 0)))
    }

    /// Closed form of `E^{-1/2} A† ψ+_m`:
    ///
    /// `N/√(2E) x^{l+1} e^{-x²/2} [2x L_m^{l+3/2}(x²) + (u'/u + (k-l-1)/x) L_m^{l+1/2}(x²)]`.
    ///
    /// In the broken phase `k = l + 1` and this is
    /// `∝ x^{γ+2} e^{-x²/2} [L_n^{γ+3/2}(x²) + u'/(2xu) L_n^{γ+1/2}(x²)]`.
    pub fn eigenfunction_minus_closed_form(&self, n: usize) -> Result<WaveFunction> {
        let plus_index = match (self.params.phase, n) {
            (Phase::Broken, n) => n,
            (Phase::Unbroken, 0) => return self.zero_mode(),
            (Phase::Unbroken, n) => n - 1,
        };
        let l = self.params.plus_angular();
        let k = self.params.pole_strength();
        let e = self.params.energy(n);
        let m = plus_index as f64;
        let ln_norm = 0.5 * (2f64.ln() + ln_gamma(m + 1.0) - ln_gamma(m + l + 1.5)) - 0.5 * (2.0 * e).ln();
        let values = self
            .grid
            .points()
            .map(|x| {
                let y = x * x;
                let v = u_log_derivative(&self.params, x)?;
                let bracket = 2.0 * x * laguerre(plus_index, l + 1.5, y)
                    + (v + (k - l - 1.0) / x) * laguerre(plus_index, l + 0.5, y);
                Ok((ln_norm + (l + 1.0) * x.ln() - 0.5 * y).exp() * bracket)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WaveFunction::new(self.grid, values)?.with_label(self.label(Sector::Minus, n)))
    }

    /// `A ψ = (ψ' + Wψ)/√2`, or `A† ψ = (-ψ' + Wψ)/√2`.
    pub fn apply_a(&self, psi: &WaveFunction, dagger: bool) -> Result<WaveFunction> {
        self.check_grid(psi)?;
        let d = derivative(psi, 1)?;
        let sign = if dagger { -1.0 } else { 1.0 };
        let values = (0..self.grid.n_points())
            .map(|i| (sign * d.values()[i] + self.w[i] * psi.values()[i]) / std::f64::consts::SQRT_2)
            .collect();
        WaveFunction::new(self.grid, values)
    }

    /// Ladder operator of `H+`: `c = (d/dx + x)²/2 − l(l+1)/2x²` and its
    /// adjoint with `−d/dx`, where `l(l+1)/2x²` is the centrifugal term of
    /// `V+` (`γ(γ+1)` broken, `(γ+1)(γ+2)` unbroken).
    pub fn apply_c(&self, psi: &WaveFunction, dagger: bool) -> Result<WaveFunction> {
        self.check_grid(psi)?;
        let l = self.params.plus_angular();
        let sign = if dagger { -1.0 } else { 1.0 };
        let half_step = |f: &WaveFunction| -> Result<WaveFunction> {
            let d = derivative(f, 1)?;
            d.zip_with(&f.mul_fn(|x| x), |a, b| sign * a + b)
        };
        let twice = half_step(&half_step(psi)?)?;
        let centrifugal = psi.mul_fn(|x| l * (l + 1.0) / (x * x));
        twice.zip_with(&centrifugal, |a, b| 0.5 * (a - b))
    }

    /// `D = A† c A` or `D† = A† c† A`.
    pub fn apply_d(&self, psi: &WaveFunction, dagger: bool) -> Result<WaveFunction> {
        let a = self.apply_a(psi, false)?;
        let c = self.apply_c(&a, dagger)?;
        self.apply_a(&c, true)
    }

    /// `H± ψ = -ψ''/2 + V± ψ`.
    pub fn apply_h(&self, psi: &WaveFunction, sector: Sector) -> Result<WaveFunction> {
        self.check_grid(psi)?;
        let d2 = derivative(psi, 2)?;
        let v = self.potential(sector);
        let values = (0..self.grid.n_points()).map(|i| -0.5 * d2.values()[i] + v[i] * psi.values()[i]).collect();
        WaveFunction::new(self.grid, values)
    }

    /// `‖(H − E)ψ‖ / (E ‖ψ‖)` over the interior 90% of the grid.
    pub fn eigen_residual(&self, psi: &WaveFunction, sector: Sector, energy: f64) -> Result<f64> {
        let h = self.apply_h(psi, sector)?;
        let target = psi.scaled(energy);
        let num = h.interior_distance(&target)?;
        let zero = psi.scaled(0.0);
        let den = psi.interior_distance(&zero)? * energy.abs().max(1.0);
        Ok(num / den)
    }

    /// Projection `⟨φ, Op ψ⟩`.
    pub fn matrix_element(&self, phi: &WaveFunction, op_psi: &WaveFunction) -> Result<f64> {
        inner(phi, op_psi)
    }
}
