//! Special functions: complex log-gamma, Kummer's confluent function,
//! generalized Laguerre polynomials, the `0F3` series and the Meijer
//! `G^{4,0}_{0,4}` function via Mellin–Barnes quadrature.
//!
//! Everything works in double precision. Series are summed with Kahan
//! compensation and carry an explicit exponent scale so that the large
//! intermediate sums met at `|z| ~ 10^2` neither overflow nor cancel.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{CesError, Result};

/// Numerical controls shared by the series and contour routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub rel_tol: f64,
    pub max_terms: usize,
    /// Initial half-width `T` of the Mellin–Barnes line segment; doubled
    /// until the integrand tail is negligible.
    pub contour_half_width: f64,
    /// Real part `c` of the vertical contour. `None` places the contour at
    /// the saddle point of the integrand, never closer than 1/4 to the
    /// rightmost pole.
    pub contour_abscissa: Option<f64>,
}

impl Default for Accuracy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_terms: 100_000,
            contour_half_width: 4.0,
            contour_abscissa: None,
        }
    }
}

impl Accuracy {
    pub fn new(
        rel_tol: f64,
        max_terms: usize,
        contour_half_width: f64,
        contour_abscissa: Option<f64>,
    ) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(CesError::InvalidParameter(format!("rel_tol must be > 0, got {rel_tol}")));
        }
        if max_terms < 1 {
            return Err(CesError::InvalidParameter("max_terms must be >= 1".into()));
        }
        if !(contour_half_width > 0.0) {
            return Err(CesError::InvalidParameter(format!(
                "contour_half_width must be > 0, got {contour_half_width}"
            )));
        }
        Ok(Self { rel_tol, max_terms, contour_half_width, contour_abscissa })
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < 1e-12
}

// ---------------------------------------------------------------------------
// Gamma family
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    // valid for Re z >= 1/2
    let w = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (k, &coef) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += coef / (w + k as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (w + 0.5) * t.ln() - t + series.ln()
}

/// Principal branch of `ln Γ(z)`.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(CesError::GammaPole(z.re));
    }
    if z.re >= 0.5 {
        return Ok(lanczos_ln_gamma(z));
    }
    if z.re > 0.0 {
        // one upward step keeps us on the principal branch
        return Ok(lanczos_ln_gamma(z + 1.0) - z.ln());
    }
    // reflection with the branch correction that keeps the result continuous
    // away from the negative real axis
    let sign = if z.im < 0.0 { -1.0 } else { 1.0 };
    let shift = Complex64::new(PI.ln(), sign * 2.0 * PI * (0.5 * z.re + 0.25).floor());
    let reflected = log_gamma_complex(1.0 - z)?;
    Ok(shift - (PI * z).sin().ln() - reflected)
}

/// `ln |Γ(x)|` for real `x` (not a pole).
pub fn ln_gamma(x: f64) -> f64 {
    if x >= 0.5 {
        lanczos_ln_gamma(Complex64::new(x, 0.0)).re
    } else {
        (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x)
    }
}

/// `Γ(x)` for real `x`.
pub fn gamma(x: f64) -> f64 {
    if x >= 0.5 {
        ln_gamma(x).exp()
    } else {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    }
}

/// Digamma for `x > 0`.
pub fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    acc + x.ln() - 0.5 / x
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

/// Rising factorial `(a)_n`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

// ---------------------------------------------------------------------------
// Summation helpers
// ---------------------------------------------------------------------------

const RESCALE: f64 = 1e200;

/// Kahan-compensated sum carried as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
struct ScaledSum {
    sum: f64,
    comp: f64,
    log_scale: f64,
}

impl ScaledSum {
    fn new() -> Self {
        Self { sum: 0.0, comp: 0.0, log_scale: 0.0 }
    }

    fn add(&mut self, term: f64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn rescale(&mut self) {
        self.sum /= RESCALE;
        self.comp /= RESCALE;
        self.log_scale += RESCALE.ln();
    }

    fn value(&self) -> f64 {
        self.sum * self.log_scale.exp()
    }
}

/// Sums `Σ_k (p)_k y^k / ((q)_k k!)` with rescaling. Returns the scaled sum.
fn confluent_series(p: f64, q: f64, y: f64, acc: &Accuracy) -> Result<ScaledSum> {
    let mut s = ScaledSum::new();
    let mut term = 1.0;
    // index beyond which every ratio has a fixed sign and the terms eventually shrink
    let settle = (-q).max(-p).max(0.0).ceil() as usize + 1;
    for k in 0..acc.max_terms {
        s.add(term);
        let kf = k as f64;
        let ratio = (p + kf) * y / ((q + kf) * (kf + 1.0));
        term *= ratio;
        if term == 0.0 {
            return Ok(s);
        }
        if k >= settle && ratio.abs() < 1.0 {
            let tail = term.abs() / (1.0 - ratio.abs());
            if tail <= 0.5 * f64::EPSILON * s.sum.abs() {
                return Ok(s);
            }
        }
        if term.abs() > RESCALE {
            term /= RESCALE;
            s.rescale();
        }
    }
    Err(CesError::NonConvergence { what: "1F1 series", max_terms: acc.max_terms })
}

fn check_kummer_b(b: f64) -> Result<()> {
    if is_nonpositive_integer(b) {
        return Err(CesError::InvalidParameter(format!(
            "1F1 lower parameter b = {b} is a non-positive integer"
        )));
    }
    Ok(())
}

/// Kummer's confluent hypergeometric function `1F1(a; b; z)`.
///
/// Terminating polynomials (`a` a non-positive integer) are summed directly.
/// For `z < 0` Kummer's transformation `1F1(a;b;z) = e^z 1F1(b-a;b;-z)` is
/// applied, which turns the alternating series into one whose terms carry
/// a single sign for large index, so no catastrophic cancellation occurs.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    kummer_1f1_with(a, b, z, &Accuracy::default())
}

pub fn kummer_1f1_with(a: f64, b: f64, z: f64, acc: &Accuracy) -> Result<f64> {
    check_kummer_b(b)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || z > 0.0 {
        return Ok(confluent_series(a, b, z, acc)?.value());
    }
    let s = confluent_series(b - a, b, -z, acc)?;
    Ok(s.sum * (s.log_scale + z).exp())
}

/// `d/dz 1F1(a; b; z) = (a/b) 1F1(a+1; b+1; z)`.
pub fn kummer_1f1_deriv(a: f64, b: f64, z: f64) -> Result<f64> {
    check_kummer_b(b)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(a / b * kummer_1f1(a + 1.0, b + 1.0, z)?)
}

/// Logarithmic derivative `1F1'(a;b;z) / 1F1(a;b;z)`, computed without ever
/// forming the (possibly overflowing) individual factors for `z < 0`.
pub fn kummer_log_derivative(a: f64, b: f64, z: f64) -> Result<f64> {
    check_kummer_b(b)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    let acc = Accuracy::default();
    let (num, den) = if is_nonpositive_integer(a) || z >= 0.0 {
        (confluent_series(a + 1.0, b + 1.0, z, &acc)?, confluent_series(a, b, z, &acc)?)
    } else {
        (
            confluent_series(b - a, b + 1.0, -z, &acc)?,
            confluent_series(b - a, b, -z, &acc)?,
        )
    };
    if den.sum == 0.0 {
        return Err(CesError::InvalidParameter(format!("1F1({a};{b};{z}) vanishes")));
    }
    Ok(a / b * num.sum / den.sum * (num.log_scale - den.log_scale).exp())
}

// ---------------------------------------------------------------------------
// Laguerre
// ---------------------------------------------------------------------------

/// Generalized Laguerre polynomial `L_n^ν(y)` by the three-term recurrence
/// in `n`. Any real `ν` evaluates; the polynomials are only orthogonal for
/// `ν > -1`.
pub fn laguerre(n: usize, nu: f64, y: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + nu - y;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + nu - y) * cur - (kf + nu) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

// ---------------------------------------------------------------------------
// 0F3
// ---------------------------------------------------------------------------

fn check_0f3_params(b: &[f64; 3]) -> Result<()> {
    if let Some(bad) = b.iter().find(|&&bi| is_nonpositive_integer(bi)) {
        return Err(CesError::InvalidParameter(format!(
            "0F3 lower parameter {bad} is a non-positive integer"
        )));
    }
    Ok(())
}

/// Ratio `t_{k+1}/t_k / z` of consecutive `0F3` terms.
#[inline]
pub(crate) fn hyper_0f3_ratio(b: &[f64; 3], k: usize) -> f64 {
    let kf = k as f64;
    1.0 / ((b[0] + kf) * (b[1] + kf) * (b[2] + kf) * (kf + 1.0))
}

/// Individual terms `z^k / (k! (b1)_k (b2)_k (b3)_k)` of the `0F3` series.
pub fn hyper_0f3_terms(b: [f64; 3], z: f64) -> impl Iterator<Item = f64> {
    let mut term = 1.0;
    (0usize..).map(move |k| {
        let out = term;
        term *= z * hyper_0f3_ratio(&b, k);
        out
    })
}

/// `0F3(; b1, b2, b3; z)` with default accuracy.
pub fn hyper_0f3(b: [f64; 3], z: f64) -> Result<f64> {
    hyper_0f3_with(b, z, &Accuracy::default())
}

pub fn hyper_0f3_with(b: [f64; 3], z: f64, acc: &Accuracy) -> Result<f64> {
    check_0f3_params(&b)?;
    let settle = b.iter().fold(0.0f64, |m, &bi| m.max(-bi)).ceil() as usize + 1;
    let mut s = ScaledSum::new();
    let mut term = 1.0;
    for k in 0..acc.max_terms {
        s.add(term);
        let ratio = z * hyper_0f3_ratio(&b, k);
        term *= ratio;
        if term == 0.0 {
            return Ok(s.value());
        }
        if k >= settle && ratio.abs() < 1.0 {
            let tail = term.abs() / (1.0 - ratio.abs());
            if tail <= (acc.rel_tol * 1e-6).max(0.5 * f64::EPSILON) * s.sum.abs() {
                return Ok(s.value());
            }
        }
        if term.abs() > RESCALE {
            term /= RESCALE;
            s.rescale();
        }
    }
    Err(CesError::NonConvergence { what: "0F3 series", max_terms: acc.max_terms })
}

/// `0F3` at a complex argument (needed for overlaps of coherent states
/// with complex labels).
pub fn hyper_0f3_complex(b: [f64; 3], z: Complex64) -> Result<Complex64> {
    check_0f3_params(&b)?;
    let acc = Accuracy::default();
    let settle = b.iter().fold(0.0f64, |m, &bi| m.max(-bi)).ceil() as usize + 1;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..acc.max_terms {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let ratio = z * hyper_0f3_ratio(&b, k);
        term *= ratio;
        if k >= settle && ratio.norm() < 1.0 {
            let tail = term.norm() / (1.0 - ratio.norm());
            if tail <= 0.5 * f64::EPSILON * sum.norm() {
                return Ok(sum);
            }
        }
    }
    Err(CesError::NonConvergence { what: "complex 0F3 series", max_terms: acc.max_terms })
}

// ---------------------------------------------------------------------------
// Meijer G^{4,0}_{0,4}
// ---------------------------------------------------------------------------

/// Result of a Mellin–Barnes evaluation, with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerG {
    pub value: f64,
    /// `|Im I| / |Re I|` of the contour integral; zero in exact arithmetic.
    pub imag_residual: f64,
    /// Change of the trapezoid value under the last step halving.
    pub error_estimate: f64,
    pub abscissa: f64,
    pub half_width: f64,
    pub nodes: usize,
}

fn sum_digamma(b: &[f64; 4], c: f64) -> f64 {
    b.iter().map(|&bj| digamma(bj + c)).sum()
}

/// Contour position where `|z^{-s} Π Γ(b_j + s)|` is stationary on the real
/// axis, i.e. `Σ ψ(b_j + c) = ln z`.
fn saddle_abscissa(b: &[f64; 4], ln_z: f64, bound: f64) -> f64 {
    let mut lo = bound + 1e-12;
    let mut hi = bound + 1.0;
    while sum_digamma(b, hi) < ln_z {
        lo = hi;
        hi = bound + 2.0 * (hi - bound);
    }
    if sum_digamma(b, lo) > ln_z {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum_digamma(b, mid) < ln_z {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `G^{4,0}_{0,4}(z | b1..b4)` by direct quadrature of the Mellin–Barnes
/// integral
///
/// `G = (1/2π) ∫ Π_j Γ(b_j + c + it) z^{-c-it} dt`
///
/// along the vertical line `Re s = c` to the right of every pole. The line
/// segment `[-T, T]` is doubled until the integrand at its ends falls below
/// `rel_tol` of the peak, and the trapezoid step is halved until two
/// successive values agree. Degenerate parameter sets (integer-spaced `b`)
/// need no special treatment.
pub fn meijer_g40_04(b: [f64; 4], z: f64, acc: &Accuracy) -> Result<MeijerG> {
    if !(z > 0.0) {
        return Err(CesError::InvalidParameter(format!("Meijer G argument must be > 0, got {z}")));
    }
    let mut b = b;
    b.sort_by(|x, y| x.total_cmp(y));
    let bound = -b[0];
    let ln_z = z.ln();
    let c = match acc.contour_abscissa {
        Some(c) => c,
        None => saddle_abscissa(&b, ln_z, bound).max(bound + 0.25),
    };
    if !(c > bound) {
        return Err(CesError::ContourPlacement { c, bound });
    }

    let exponent = |t: f64| -> Complex64 {
        let s = Complex64::new(c, t);
        let mut acc = -s * ln_z;
        for &bj in &b {
            // b_j + c > 0, so never a pole
            acc += lanczos_or_shift(s + bj);
        }
        acc
    };
    let peak_log = exponent(0.0).re;
    let integrand = |t: f64| -> Complex64 { (exponent(t) - peak_log).exp() };

    let mut half_width = acc.contour_half_width;
    let tail_tol = acc.rel_tol * 1e-3;
    let mut grow = 0;
    while integrand(half_width).norm() > tail_tol || integrand(-half_width).norm() > tail_tol {
        half_width *= 2.0;
        grow += 1;
        if grow > 12 {
            return Err(CesError::Truncation { estimate: integrand(half_width).norm(), tolerance: tail_tol });
        }
    }

    // initial step resolves the nearest pole and the residual oscillation
    let detune = (sum_digamma(&b, c) - ln_z).abs();
    let h0 = 0.25f64.min(0.5 * (c - bound)).min(1.0 / (1.0 + detune));
    let mut n = ((2.0 * half_width / h0).ceil() as usize).max(32);
    let mut h = 2.0 * half_width / n as f64;
    let mut sum = 0.5 * (integrand(-half_width) + integrand(half_width));
    let mut l1 = 0.5 * (integrand(-half_width).norm() + integrand(half_width).norm());
    for i in 1..n {
        let f = integrand(-half_width + i as f64 * h);
        sum += f;
        l1 += f.norm();
    }
    let mut value = sum * h;
    let mut estimate = f64::INFINITY;
    const MAX_LEVELS: usize = 14;
    for level in 0..MAX_LEVELS {
        let mut mid = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let f = integrand(-half_width + (i as f64 + 0.5) * h);
            mid += f;
            l1 += f.norm();
        }
        sum += mid;
        n *= 2;
        h *= 0.5;
        let refined = sum * h;
        estimate = (refined - value).norm();
        value = refined;
        let floor = 64.0 * f64::EPSILON * l1 * h;
        if level >= 1 && (estimate <= acc.rel_tol * value.re.abs() || estimate <= floor) {
            let scale = peak_log.exp() / (2.0 * PI);
            return Ok(MeijerG {
                value: value.re * scale,
                imag_residual: if value.re != 0.0 { (value.im / value.re).abs() } else { value.im.abs() },
                error_estimate: estimate * scale,
                abscissa: c,
                half_width,
                nodes: n + 1,
            });
        }
    }
    Err(CesError::Truncation { estimate: estimate / value.re.abs(), tolerance: acc.rel_tol })
}

#[inline]
fn lanczos_or_shift(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        lanczos_ln_gamma(z)
    } else {
        lanczos_ln_gamma(z + 1.0) - z.ln()
    }
}
