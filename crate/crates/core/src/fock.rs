//! Fock-space realization of the cubic algebra
//!
//! `[H, D] = -2D`, `[H, D†] = 2D†`, `[D, D†] = Φ(H)`, `DD† = Ψ(H)`
//!
//! on the `H-` eigenbasis `{|0⟩, …, |N-1⟩}`.
//!
//! Both phases are described by one ladder: `D` lowers `|j+s⟩ → |j+s-1⟩`
//! with constant `λ_j`, where `s = 0, λ = f` (broken) or `s = 1, λ = g`
//! (unbroken, whose ground state `|0⟩` is isolated).

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{CesError, Result};
use crate::model::{ModelParams, Phase};

/// `f_n = -2 sqrt(n (n+γ+1/2) (2n+2γ+2+ε) (2n+2γ+ε))`.
pub fn f_n(params: &ModelParams, n: usize) -> Result<f64> {
    if params.phase() != Phase::Broken {
        return Err(CesError::WrongPhase { expected: "broken" });
    }
    let (g, e, m) = (params.gamma(), params.epsilon(), n as f64);
    signed_root(n, m * (m + g + 0.5) * (2.0 * m + 2.0 * g + 2.0 + e) * (2.0 * m + 2.0 * g + e))
}

/// `g_n = -2 sqrt(n (n+γ+3/2) (2n-1+ε) (2n+1+ε))`.
pub fn g_n(params: &ModelParams, n: usize) -> Result<f64> {
    if params.phase() != Phase::Unbroken {
        return Err(CesError::WrongPhase { expected: "unbroken" });
    }
    let (g, e, m) = (params.gamma(), params.epsilon(), n as f64);
    signed_root(n, m * (m + g + 1.5) * (2.0 * m - 1.0 + e) * (2.0 * m + 1.0 + e))
}

fn signed_root(n: usize, radicand: f64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if radicand < 0.0 {
        return Err(CesError::NegativeRadicand { n, radicand });
    }
    Ok(-2.0 * radicand.sqrt())
}

/// `f_n` or `g_n` according to the phase.
pub fn ladder_constant(params: &ModelParams, n: usize) -> Result<f64> {
    match params.phase() {
        Phase::Broken => f_n(params, n),
        Phase::Unbroken => g_n(params, n),
    }
}

/// Index of the lowest state reached by the ladder: 0 (broken) or 1
/// (unbroken).
pub fn ladder_offset(params: &ModelParams) -> usize {
    match params.phase() {
        Phase::Broken => 0,
        Phase::Unbroken => 1,
    }
}

/// Lower parameters `b` of `λ_1² ⋯ λ_n² = 16ⁿ n! (b₁)_n (b₂)_n (b₃)_n`.
pub fn ladder_params(params: &ModelParams) -> [f64; 3] {
    let (g, e) = (params.gamma(), params.epsilon());
    match params.phase() {
        Phase::Broken => [g + 1.5, g + 1.0 + 0.5 * e, g + 2.0 + 0.5 * e],
        Phase::Unbroken => [g + 2.5, 0.5 * e + 0.5, 0.5 * e + 1.5],
    }
}

/// The sequence `λ_0 = 0, λ_1, …, λ_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureSeq {
    params: ModelParams,
    values: Vec<f64>,
}

impl StructureSeq {
    pub fn new(params: ModelParams, n_max: usize) -> Result<Self> {
        let values = (0..=n_max).map(|n| ladder_constant(&params, n)).collect::<Result<Vec<_>>>()?;
        Ok(Self { params, values })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|i| self.0.get(i).unwrap_or(&0.0) - other.0.get(i).unwrap_or(&0.0)).collect())
    }

    /// `p(x - s)`.
    pub fn shifted(&self, s: f64) -> Poly {
        let mut out = Poly(vec![0.0]);
        for &c in self.0.iter().rev() {
            out = out.mul(&Poly(vec![-s, 1.0]));
            out.0[0] += c;
        }
        out.0.truncate(self.0.len().max(1));
        out
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }
}

/// `Φ(H) = 8H³ − 12(γ+ε+1/2)H² + 4(2εγ+ε²+ε+1)H`, `γ → −γ−2` when unbroken.
pub fn phi_poly(params: &ModelParams) -> Poly {
    let (g, e) = (params.effective_gamma(), params.epsilon());
    Poly(vec![0.0, 4.0 * (2.0 * e * g + e * e + e + 1.0), -12.0 * (g + e + 0.5), 8.0])
}

/// `Ψ(H) = (H−2γ−ε)(H+1−ε)(H+2)H`, `γ → −γ−2` when unbroken.
pub fn psi_poly(params: &ModelParams) -> Poly {
    let (g, e) = (params.effective_gamma(), params.epsilon());
    linear_product(&[-2.0 * g - e, 1.0 - e, 2.0, 0.0])
}

/// `Ψ` with the factor `(H+1+ε)` in place of `(H+1−ε)`. It violates
/// `Ψ(E_n) = f²_{n+1}` and is kept only to demonstrate that.
pub fn psi_poly_printed(params: &ModelParams) -> Poly {
    let (g, e) = (params.effective_gamma(), params.epsilon());
    linear_product(&[-2.0 * g - e, 1.0 + e, 2.0, 0.0])
}

fn linear_product(roots_shift: &[f64]) -> Poly {
    roots_shift.iter().fold(Poly(vec![1.0]), |p, &a| p.mul(&Poly(vec![a, 1.0])))
}

pub fn phi(params: &ModelParams, h: f64) -> f64 {
    phi_poly(params).eval(h)
}

pub fn psi(params: &ModelParams, h: f64) -> f64 {
    psi_poly(params).eval(h)
}

pub fn psi_printed(params: &ModelParams, h: f64) -> f64 {
    psi_poly_printed(params).eval(h)
}

/// Square matrix stored by diagonals: `offset = col − row`, entry index
/// `min(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    dim: usize,
    diagonals: BTreeMap<isize, Vec<Complex64>>,
}

impl BandMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, diagonals: BTreeMap::new() }
    }

    pub fn diagonal(values: Vec<Complex64>) -> Self {
        let mut m = Self::zeros(values.len());
        m.diagonals.insert(0, values);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn diag_len(&self, offset: isize) -> usize {
        self.dim.saturating_sub(offset.unsigned_abs())
    }

    pub fn set_diagonal(&mut self, offset: isize, values: Vec<Complex64>) -> Result<()> {
        let len = self.diag_len(offset);
        if values.len() != len {
            return Err(CesError::LengthMismatch { left: values.len(), right: len });
        }
        self.diagonals.insert(offset, values);
        Ok(())
    }

    pub fn offsets(&self) -> impl Iterator<Item = isize> + '_ {
        self.diagonals.keys().copied()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let offset = col as isize - row as isize;
        self.diagonals.get(&offset).map_or(Complex64::new(0.0, 0.0), |d| d[row.min(col)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let diagonals = self.diagonals.iter().map(|(&k, d)| (k, d.iter().map(|v| v * s).collect())).collect();
        Self { dim: self.dim, diagonals }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, s: Complex64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(CesError::DimensionMismatch { op: self.dim, state: other.dim });
        }
        let mut out = self.clone();
        for (&k, d) in &other.diagonals {
            let entry = out.diagonals.entry(k).or_insert_with(|| vec![Complex64::new(0.0, 0.0); d.len()]);
            for (a, b) in entry.iter_mut().zip(d) {
                *a += s * b;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(CesError::DimensionMismatch { op: self.dim, state: other.dim });
        }
        let mut out = Self::zeros(self.dim);
        for (&ka, da) in &self.diagonals {
            for (&kb, db) in &other.diagonals {
                let k = ka + kb;
                let len = out.diag_len(k);
                if len == 0 {
                    continue;
                }
                let entry = out.diagonals.entry(k).or_insert_with(|| vec![Complex64::new(0.0, 0.0); len]);
                // (AB)[r][r+k] = A[r][r+ka] B[r+ka][r+k]
                for r in 0..self.dim {
                    let mid = r as isize + ka;
                    let col = r as isize + k;
                    if mid < 0 || col < 0 || mid >= self.dim as isize || col >= self.dim as isize {
                        continue;
                    }
                    let (mid, col) = (mid as usize, col as usize);
                    entry[r.min(col)] += da[r.min(mid)] * db[mid.min(col)];
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn adjoint(&self) -> Self {
        let diagonals = self.diagonals.iter().map(|(&k, d)| (-k, d.iter().map(|v| v.conj()).collect())).collect();
        Self { dim: self.dim, diagonals }
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(CesError::DimensionMismatch { op: self.dim, state: v.len() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (&k, d) in &self.diagonals {
            for (i, &entry) in d.iter().enumerate() {
                let (row, col) = if k >= 0 { (i, i + k as usize) } else { (i + k.unsigned_abs(), i) };
                out[row] += entry * v[col];
            }
        }
        Ok(out)
    }

    /// Largest `|entry|` over rows and columns `< limit`.
    pub fn max_abs_within(&self, limit: usize) -> f64 {
        let mut best: f64 = 0.0;
        for (&k, d) in &self.diagonals {
            for (i, v) in d.iter().enumerate() {
                let (row, col) = if k >= 0 { (i, i + k as usize) } else { (i + k.unsigned_abs(), i) };
                if row < limit && col < limit {
                    best = best.max(v.norm());
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    D,
    Ddag,
    H,
    X1,
    X2,
    Phi,
    Psi,
    Casimir,
}

/// A truncated operator on `{|0⟩, …, |N-1⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOp {
    pub kind: OpKind,
    pub params: ModelParams,
    pub matrix: BandMatrix,
}

impl FockOp {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.apply(v)
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn lowering(params: &ModelParams, dim: usize) -> Result<BandMatrix> {
    let s = ladder_offset(params);
    // D[r][r+1] = λ_{r+1-s}, with λ_j = 0 for the isolated ground state
    let upper = (0..dim - 1)
        .map(|r| if r + 1 < s { Ok(0.0) } else { ladder_constant(params, r + 1 - s) })
        .map(|v| v.map(real))
        .collect::<Result<Vec<_>>>()?;
    let mut m = BandMatrix::zeros(dim);
    m.set_diagonal(1, upper)?;
    Ok(m)
}

fn diagonal_of(params: &ModelParams, dim: usize, f: impl Fn(f64) -> f64) -> BandMatrix {
    BandMatrix::diagonal((0..dim).map(|n| real(f(params.energy(n)))).collect())
}

pub fn build_fock_op(params: &ModelParams, kind: OpKind, dim: usize) -> Result<FockOp> {
    if dim < 2 {
        return Err(CesError::InvalidParameter(format!("Fock truncation N ≥ 2 required (got {dim})")));
    }
    let matrix = match kind {
        OpKind::D => lowering(params, dim)?,
        OpKind::Ddag => lowering(params, dim)?.adjoint(),
        OpKind::H => diagonal_of(params, dim, |e| e),
        OpKind::X1 => {
            let d = lowering(params, dim)?;
            d.add(&d.adjoint())?.scale(real(0.5))
        }
        OpKind::X2 => {
            let d = lowering(params, dim)?;
            d.sub(&d.adjoint())?.scale(Complex64::new(0.0, -0.5))
        }
        OpKind::Phi => {
            let p = phi_poly(params);
            diagonal_of(params, dim, |e| p.eval(e))
        }
        OpKind::Psi => {
            let p = psi_poly(params);
            diagonal_of(params, dim, |e| p.eval(e))
        }
        OpKind::Casimir => {
            let d = lowering(params, dim)?;
            let p = psi_poly(params);
            d.mul(&d.adjoint())?.sub(&diagonal_of(params, dim, |e| p.eval(e)))?
        }
    };
    Ok(FockOp { kind, params: *params, matrix })
}

/// Maximal violation of an operator identity and the scale it is measured
/// against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub max_abs: f64,
    pub scale: f64,
}

impl Residual {
    fn of(lhs: &BandMatrix, rhs: &BandMatrix, limit: usize) -> Result<Self> {
        let diff = lhs.sub(rhs)?;
        let scale = lhs.max_abs_within(limit).max(rhs.max_abs_within(limit));
        Ok(Self { max_abs: diff.max_abs_within(limit), scale })
    }

    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.max_abs
        } else {
            self.max_abs / self.scale
        }
    }
}

/// `DD† − Ψ(H)` on rows and columns `< N−1`.
pub fn casimir_residual(params: &ModelParams, dim: usize) -> Result<Residual> {
    if dim < 3 {
        return Err(CesError::InvalidParameter(format!("Casimir check needs N ≥ 3 (got {dim})")));
    }
    let d = lowering(params, dim)?;
    let psi = build_fock_op(params, OpKind::Psi, dim)?.matrix;
    Residual::of(&d.mul(&d.adjoint())?, &psi, dim - 1)
}

/// Residuals of the defining relations on the truncation interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureReport {
    /// `[H, D] = −2D`
    pub h_d: Residual,
    /// `[H, D†] = 2D†`
    pub h_ddag: Residual,
    /// `[D, D†] = Φ(H)`
    pub d_ddag: Residual,
    /// `[X₁, X₂] = (i/2) Φ(H)`
    pub x1_x2: Residual,
    /// `DD† = Ψ(H)`
    pub casimir: Residual,
}

impl ClosureReport {
    pub fn max_relative(&self) -> f64 {
        [self.h_d, self.h_ddag, self.d_ddag, self.x1_x2, self.casimir]
            .iter()
            .map(Residual::relative)
            .fold(0.0, f64::max)
    }
}

pub fn closure_report(params: &ModelParams, dim: usize) -> Result<ClosureReport> {
    if dim < 3 {
        return Err(CesError::InvalidParameter(format!("closure check needs N ≥ 3 (got {dim})")));
    }
    let op = |k| build_fock_op(params, k, dim).map(|o| o.matrix);
    let (d, dd, h, x1, x2, phi) = (op(OpKind::D)?, op(OpKind::Ddag)?, op(OpKind::H)?, op(OpKind::X1)?, op(OpKind::X2)?, op(OpKind::Phi)?);
    let interior = dim - 1;
    Ok(ClosureReport {
        h_d: Residual::of(&h.commutator(&d)?, &d.scale(real(-2.0)), interior)?,
        h_ddag: Residual::of(&h.commutator(&dd)?, &dd.scale(real(2.0)), interior)?,
        d_ddag: Residual::of(&d.commutator(&dd)?, &phi, interior)?,
        x1_x2: Residual::of(&x1.commutator(&x2)?, &phi.scale(Complex64::new(0.0, 0.5)), interior)?,
        casimir: casimir_residual(params, dim)?,
    })
}

/// `(λ₁ λ₂ ⋯ λ_n)^{-1}`.
pub fn normalized_state_coeff(params: &ModelParams, n: usize) -> Result<f64> {
    (1..=n).try_fold(1.0, |acc, i| Ok(acc / ladder_constant(params, i)?))
}

/// `(−1/4)ⁿ [n! (b₁)_n (b₂)_n (b₃)_n]^{-1/2}` with `b` from [`ladder_params`].
pub fn normalized_state_coeff_closed_form(params: &ModelParams, n: usize) -> f64 {
    let b = ladder_params(params);
    let log_poch: f64 = (0..n).map(|i| {
        let i = i as f64;
        ((i + 1.0) * (b[0] + i) * (b[1] + i) * (b[2] + i)).ln()
    }).sum();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * (-(n as f64) * 4f64.ln() - 0.5 * log_poch).exp()
}
