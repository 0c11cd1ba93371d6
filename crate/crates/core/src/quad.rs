//! Uniform radial grids, composite Simpson quadrature and fourth-order
//! finite differences.

use crate::error::{CesError, Result};
use crate::model::Phase;

/// Uniform grid on `[x_min, x_max]`, `x_min > 0` standing in for the
/// Dirichlet point at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub const DEFAULT_X_MIN: f64 = 1e-4;
    pub const DEFAULT_POINTS: usize = 8001;

    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_max > x_min) {
            return Err(CesError::InvalidParameter(format!(
                "grid needs 0 < x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 16 {
            return Err(CesError::InvalidParameter(format!("grid needs >= 16 points, got {n_points}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid wide enough for every eigenstate with energy up to `e_max`.
    pub fn for_energy(e_max: f64) -> Self {
        Self {
            x_min: Self::DEFAULT_X_MIN,
            x_max: 12.0 + (2.0 * e_max.max(0.0)).sqrt(),
            n_points: Self::DEFAULT_POINTS,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points().map(f).collect()
    }

    /// Index range covering the central 90% of the grid.
    pub fn interior(&self) -> std::ops::Range<usize> {
        let skip = self.n_points / 20;
        skip..self.n_points - skip
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label {
    pub phase: Phase,
    pub sector: Sector,
    pub n: usize,
}

/// Real wavefunction sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<f64>,
    label: Option<Label>,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(CesError::LengthMismatch { left: values.len(), right: grid.n_points() });
        }
        Ok(Self { grid, values, label: None })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self { values: grid.sample(f), grid, label: None }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).map(f64::sqrt).unwrap_or(f64::NAN)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map_values(|v| v * factor)
    }

    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.norm())
    }

    /// Pointwise combination of two wavefunctions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(CesError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values, label: None })
    }

    /// Multiplies pointwise by `f(x)`.
    pub fn mul_fn(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().enumerate().map(|(i, &v)| v * f(self.grid.x(i))).collect();
        Self { grid: self.grid, values, label: None }
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect(), label: self.label }
    }

    /// L2 norm of the difference restricted to the interior 90% of the grid.
    pub fn interior_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.zip_with(other, |a, b| a - b)?;
        let range = self.grid.interior();
        let sq: Vec<f64> = diff.values[range.clone()].iter().map(|v| v * v).collect();
        Ok(simpson_or_trapezoid(&sq, self.grid.spacing()).sqrt())
    }
}

fn simpson_or_trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    if n % 2 == 1 {
        let mut odd = 0.0;
        let mut even = 0.0;
        for (i, &v) in f.iter().enumerate().take(n - 1).skip(1) {
            if i % 2 == 1 {
                odd += v;
            } else {
                even += v;
            }
        }
        h / 3.0 * (f[0] + f[n - 1] + 4.0 * odd + 2.0 * even)
    } else {
        h * (0.5 * (f[0] + f[n - 1]) + f[1..n - 1].iter().sum::<f64>())
    }
}

/// `∫ f dx` over the grid: composite Simpson for an odd number of points,
/// trapezoid otherwise.
pub fn integrate(f: &[f64], grid: &Grid) -> Result<f64> {
    if f.len() != grid.n_points() {
        return Err(CesError::LengthMismatch { left: f.len(), right: grid.n_points() });
    }
    Ok(simpson_or_trapezoid(f, grid.spacing()))
}

/// Composite Simpson on an arbitrary uniform spacing (odd length).
pub(crate) fn simpson(f: &[f64], h: f64) -> f64 {
    simpson_or_trapezoid(f, h)
}

/// `∫ ψ φ dx`.
pub fn inner(psi: &WaveFunction, phi: &WaveFunction) -> Result<f64> {
    if psi.grid != phi.grid {
        return Err(CesError::GridMismatch);
    }
    let prod: Vec<f64> = psi.values.iter().zip(&phi.values).map(|(a, b)| a * b).collect();
    integrate(&prod, &psi.grid)
}

/// First or second derivative: central fourth-order stencils in the
/// interior, one-sided fourth-order stencils on the two outermost points
/// at each end.
pub fn derivative(psi: &WaveFunction, order: u8) -> Result<WaveFunction> {
    let f = &psi.values;
    let n = f.len();
    if n < 6 {
        return Err(CesError::InvalidParameter("derivative needs at least 6 points".into()));
    }
    let h = psi.grid.spacing();
    let mut out = vec![0.0; n];
    match order {
        1 => {
            let s = 1.0 / (12.0 * h);
            for i in 2..n - 2 {
                out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
            }
            out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
            out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
            let m = n - 1;
            out[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) * s;
            out[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) * s;
        }
        2 => {
            let s = 1.0 / (12.0 * h * h);
            for i in 2..n - 2 {
                out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * s;
            }
            out[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) * s;
            out[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * s;
            let m = n - 1;
            out[m] = (45.0 * f[m] - 154.0 * f[m - 1] + 214.0 * f[m - 2] - 156.0 * f[m - 3] + 61.0 * f[m - 4]
                - 10.0 * f[m - 5])
                * s;
            out[m - 1] =
                (10.0 * f[m] - 15.0 * f[m - 1] - 4.0 * f[m - 2] + 14.0 * f[m - 3] - 6.0 * f[m - 4] + f[m - 5]) * s;
        }
        other => {
            return Err(CesError::InvalidParameter(format!("derivative order must be 1 or 2, got {other}")));
        }
    }
    Ok(WaveFunction { grid: psi.grid, values: out, label: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_interior_error(a: &WaveFunction, exact: impl Fn(f64) -> f64) -> f64 {
        let g = a.grid();
        g.interior().map(|i| (a.values()[i] - exact(g.x(i))).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 100).is_err());
        assert!(Grid::new(1.0, 0.5, 100).is_err());
        assert!(Grid::new(0.1, 1.0, 15).is_err());
        let g = Grid::new(1.0, 3.0, 21).unwrap();
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.x(20), 3.0);
    }

    #[test]
    fn integrate_simple_functions() {
        let g = Grid::new(1.0, 3.0, 101).unwrap();
        assert!((integrate(&g.sample(|_| 1.0), &g).unwrap() - 2.0).abs() < 1e-14);
        let g = Grid::new(0.5, 1.5, 17).unwrap();
        assert!((integrate(&g.sample(|x| x), &g).unwrap() - 1.0).abs() < 1e-14);
        assert!(integrate(&[1.0, 2.0], &g).is_err());
    }

    #[test]
    fn integrate_gaussian_against_erf() {
        // sqrt(pi)/2 * (erf(12) - erf(1e-4)) from mpmath
        let g = Grid::new(1e-4, 12.0, 8001).unwrap();
        let v = integrate(&g.sample(|x| (-x * x).exp()), &g).unwrap();
        assert!((v - 0.886_126_925_453_091_35).abs() < 1e-9, "{v}");
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        for &(a, b, n) in &[(0.3, 2.9, 17usize), (1e-4, 12.0, 101), (2.0, 2.5, 33)] {
            let g = Grid::new(a, b, n).unwrap();
            let f = |x: f64| 1.5 - 2.0 * x + 0.7 * x * x - 0.3 * x * x * x;
            let anti = |x: f64| 1.5 * x - x * x + 0.7 / 3.0 * x.powi(3) - 0.075 * x.powi(4);
            let v = integrate(&g.sample(f), &g).unwrap();
            let exact = anti(b) - anti(a);
            assert!((v - exact).abs() < 1e-12 * (1.0 + exact.abs()), "{v} vs {exact}");
        }
    }

    #[test]
    fn inner_products() {
        let g = Grid::new(0.1, 2.0, 65).unwrap();
        let zero = WaveFunction::from_fn(g, |_| 0.0);
        let phi = WaveFunction::from_fn(g, f64::sin);
        assert_eq!(inner(&zero, &phi).unwrap(), 0.0);
        let other = WaveFunction::from_fn(Grid::new(0.1, 2.5, 65).unwrap(), f64::sin);
        assert_eq!(inner(&phi, &other), Err(CesError::GridMismatch));
    }

    #[test]
    fn derivatives_of_polynomials_and_constants() {
        let g = Grid::new(0.5, 3.0, 201).unwrap();
        let sq = WaveFunction::from_fn(g, |x| x * x);
        let d = derivative(&sq, 1).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            assert!((v - 2.0 * g.x(i)).abs() < 1e-10);
        }
        let c = WaveFunction::from_fn(g, |_| 4.2);
        for order in [1, 2] {
            assert!(derivative(&c, order).unwrap().values().iter().all(|v| v.abs() < 1e-9));
        }
        assert!(derivative(&c, 3).is_err());
    }

    #[test]
    fn second_derivative_converges_at_fourth_order() {
        let mut errors = Vec::new();
        for n in [101, 201, 401] {
            let g = Grid::new(0.1, 3.0, n).unwrap();
            let d2 = derivative(&WaveFunction::from_fn(g, f64::sin), 2).unwrap();
            errors.push(max_interior_error(&d2, |x| -x.sin()));
        }
        // halving h cuts the error by ~16
        assert!(errors[0] / errors[1] > 12.0 && errors[1] / errors[2] > 12.0, "{errors:?}");
        let h = Grid::new(0.1, 3.0, 101).unwrap().spacing();
        assert!(errors[0] < 0.1 * h.powi(4));
    }

    #[test]
    fn edge_stencils_are_accurate() {
        let g = Grid::new(0.2, 1.8, 161).unwrap();
        let psi = WaveFunction::from_fn(g, |x| (1.3 * x).exp());
        let d1 = derivative(&psi, 1).unwrap();
        let d2 = derivative(&psi, 2).unwrap();
        for i in [0, 1, 159, 160] {
            let x = g.x(i);
            assert!((d1.values()[i] - 1.3 * (1.3 * x).exp()).abs() < 1e-7);
            assert!((d2.values()[i] - 1.69 * (1.3 * x).exp()).abs() < 1e-5);
        }
    }

    #[test]
    fn repeated_first_derivative_matches_second() {
        let g = Grid::new(0.5, 4.0, 401).unwrap();
        let psi = WaveFunction::from_fn(g, |x| x * (-x * x / 2.0).exp());
        let dd = derivative(&derivative(&psi, 1).unwrap(), 1).unwrap();
        let d2 = derivative(&psi, 2).unwrap();
        let h = g.spacing();
        let err = g.interior().map(|i| (dd.values()[i] - d2.values()[i]).abs()).fold(0.0, f64::max);
        assert!(err < 10.0 * h * h, "{err}");
    }
}
