//! Periodic grids on S¹ = [-π, π) and T² = [-π, π)², and the discrete
//! calculus used everywhere else: fourth-order central differences,
//! rectangle-rule quadrature (spectrally accurate for smooth periodic
//! integrands), L² and W^{1,2} norms, and the Hölder-1/2 seminorm.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid size {0} must be a power of two with at least 16 nodes per axis")]
    UnsupportedSize(usize),
    #[error("derivative order {0} is not supported (orders 1 and 2 only)")]
    UnsupportedOrder(u32),
    #[error("non-finite field value at flat index {0}")]
    NonFinite(usize),
    #[error("{got} values supplied for a grid with {want} nodes")]
    LengthMismatch { got: usize, want: usize },
    #[error("operands live on different grids")]
    GridMismatch,
}

fn supported_axis(n: usize) -> bool {
    n >= 16 && n.is_power_of_two()
}

/// Uniform periodic grid on S¹ with nodes z_i = -π + i·h, h = 2π/n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGrid1D {
    n: usize,
}

impl PeriodicGrid1D {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if supported_axis(n) {
            Ok(Self { n })
        } else {
            Err(GridError::UnsupportedSize(n))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -std::f64::consts::PI + i as f64 * self.h()
    }

    /// Grid with every other node kept. Valid because supported sizes are
    /// powers of two well above the minimum.
    fn halved(&self) -> PeriodicGrid1D {
        PeriodicGrid1D { n: self.n / 2 }
    }
}

/// Uniform periodic grid on T², x fastest: flat index = iy·nx + ix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGrid2D {
    nx: usize,
    ny: usize,
}

impl PeriodicGrid2D {
    pub fn new(nx: usize, ny: usize) -> Result<Self, GridError> {
        if !supported_axis(nx) {
            return Err(GridError::UnsupportedSize(nx));
        }
        if !supported_axis(ny) {
            return Err(GridError::UnsupportedSize(ny));
        }
        Ok(Self { nx, ny })
    }

    pub fn square(n: usize) -> Result<Self, GridError> {
        Self::new(n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        TWO_PI / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        TWO_PI / self.ny as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node_x(&self, ix: usize) -> f64 {
        -std::f64::consts::PI + ix as f64 * self.hx()
    }

    pub fn node_y(&self, iy: usize) -> f64 {
        -std::f64::consts::PI + iy as f64 * self.hy()
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Cell area hx·hy of the rectangle rule.
    pub fn cell(&self) -> f64 {
        self.hx() * self.hy()
    }
}

fn check_values(values: &[f64]) -> Result<(), GridError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(GridError::NonFinite(i)),
        None => Ok(()),
    }
}

/// Real scalar field sampled on a [`PeriodicGrid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: PeriodicGrid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: PeriodicGrid1D, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.n() {
            return Err(GridError::LengthMismatch { got: values.len(), want: grid.n() });
        }
        check_values(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PeriodicGrid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: PeriodicGrid1D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.n()] }
    }

    pub fn grid(&self) -> PeriodicGrid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field1D {
        Field1D { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &Field1D, f: impl Fn(f64, f64) -> f64) -> Result<Field1D, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&u, &v)| f(u, v)).collect();
        Ok(Field1D { grid: self.grid, values })
    }

    /// Rectangle rule h·Σu. On a periodic grid this coincides with the
    /// trapezoid rule and converges spectrally for smooth integrands.
    pub fn integrate(&self) -> f64 {
        self.grid.h() * self.values.iter().sum::<f64>()
    }

    /// Integral together with a refinement-based error estimate
    /// |I(n) - I(n/2)| from subsampling every other node.
    pub fn integrate_refined(&self) -> (f64, f64) {
        let full = self.integrate();
        let half: f64 = self.values.iter().step_by(2).sum::<f64>() * self.grid.halved().h();
        (full, (full - half).abs())
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / TWO_PI
    }

    /// Fourth-order periodic central difference, orders 1 and 2.
    pub fn derivative(&self, order: u32) -> Result<Field1D, GridError> {
        let n = self.grid.n();
        let h = self.grid.h();
        let u = &self.values;
        let at = |i: usize, k: isize| u[((i + n) as isize + k) as usize % n];
        let values: Vec<f64> = match order {
            1 => (0..n)
                .map(|i| (-at(i, 2) + 8.0 * at(i, 1) - 8.0 * at(i, -1) + at(i, -2)) / (12.0 * h))
                .collect(),
            2 => (0..n)
                .map(|i| {
                    (-at(i, 2) + 16.0 * at(i, 1) - 30.0 * u[i] + 16.0 * at(i, -1) - at(i, -2))
                        / (12.0 * h * h)
                })
                .collect(),
            _ => return Err(GridError::UnsupportedOrder(order)),
        };
        Ok(Field1D { grid: self.grid, values })
    }

    pub fn norm_l2(&self) -> f64 {
        self.map(|v| v * v).integrate().max(0.0).sqrt()
    }

    /// W^{1,2} norm sqrt(‖u‖² + ‖u'‖²) with the discrete derivative.
    pub fn norm_w12(&self) -> f64 {
        let du = self.derivative(1).expect("order 1 is always supported");
        (self.map(|v| v * v).integrate() + du.map(|v| v * v).integrate()).max(0.0).sqrt()
    }

    /// Hölder-1/2 seminorm max over node pairs of |u_i - u_j| / d(z_i, z_j)^{1/2}
    /// with the wrapped circle distance.
    pub fn holder_half_seminorm(&self) -> f64 {
        let n = self.grid.n();
        let h = self.grid.h();
        let mut best = 0.0f64;
        for lag in 1..=n / 2 {
            let d = (lag.min(n - lag)) as f64 * h;
            let inv_sqrt = 1.0 / d.sqrt();
            for i in 0..n {
                let j = (i + lag) % n;
                let diff = (self.values[i] - self.values[j]).abs();
                best = best.max(diff * inv_sqrt);
            }
        }
        best
    }

    /// Periodic linear interpolation at an arbitrary coordinate.
    pub fn interp(&self, z: f64) -> f64 {
        let n = self.grid.n();
        let t = (z + std::f64::consts::PI) / self.grid.h();
        let base = t.floor();
        let frac = t - base;
        let i0 = (base.rem_euclid(n as f64)) as usize % n;
        let i1 = (i0 + 1) % n;
        self.values[i0] * (1.0 - frac) + self.values[i1] * frac
    }

    /// Restriction to every other node, for refinement comparisons.
    pub fn subsample(&self) -> Field1D {
        Field1D {
            grid: self.grid.halved(),
            values: self.values.iter().step_by(2).copied().collect(),
        }
    }
}

/// Real scalar field sampled on a [`PeriodicGrid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: PeriodicGrid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: PeriodicGrid2D, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch { got: values.len(), want: grid.len() });
        }
        check_values(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PeriodicGrid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny() {
            let y = grid.node_y(iy);
            for ix in 0..grid.nx() {
                values.push(f(grid.node_x(ix), y));
            }
        }
        Self { grid, values }
    }

    pub fn constant(grid: PeriodicGrid2D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> PeriodicGrid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.idx(ix, iy)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2D {
        Field2D { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Result<Field2D, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&u, &v)| f(u, v)).collect();
        Ok(Field2D { grid: self.grid, values })
    }

    pub fn integrate(&self) -> f64 {
        self.grid.cell() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / (TWO_PI * TWO_PI)
    }

    fn axis_derivative(&self, order: u32, along_x: bool) -> Result<Field2D, GridError> {
        if order != 1 && order != 2 {
            return Err(GridError::UnsupportedOrder(order));
        }
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let (n, h) = if along_x { (nx, self.grid.hx()) } else { (ny, self.grid.hy()) };
        let mut values = vec![0.0; self.values.len()];
        for iy in 0..ny {
            for ix in 0..nx {
                let at = |k: isize| {
                    let (jx, jy) = if along_x {
                        ((((ix + n) as isize + k) as usize) % n, iy)
                    } else {
                        (ix, (((iy + n) as isize + k) as usize) % n)
                    };
                    self.values[self.grid.idx(jx, jy)]
                };
                let c = self.values[self.grid.idx(ix, iy)];
                values[self.grid.idx(ix, iy)] = if order == 1 {
                    (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
                } else {
                    (-at(2) + 16.0 * at(1) - 30.0 * c + 16.0 * at(-1) - at(-2)) / (12.0 * h * h)
                };
            }
        }
        Ok(Field2D { grid: self.grid, values })
    }

    /// Gradient components (∂u/∂x, ∂u/∂y), fourth-order per axis.
    pub fn gradient(&self) -> (Field2D, Field2D) {
        let gx = self.axis_derivative(1, true).expect("order 1 supported");
        let gy = self.axis_derivative(1, false).expect("order 1 supported");
        (gx, gy)
    }

    /// Laplacian ∂²u/∂x² + ∂²u/∂y², fourth-order per axis.
    pub fn laplacian(&self) -> Field2D {
        let dxx = self.axis_derivative(2, true).expect("order 2 supported");
        let dyy = self.axis_derivative(2, false).expect("order 2 supported");
        dxx.zip(&dyy, |a, b| a + b).expect("same grid")
    }

    /// Squared gradient magnitude |∇u|².
    pub fn grad_sq(&self) -> Field2D {
        let (gx, gy) = self.gradient();
        gx.zip(&gy, |a, b| a * a + b * b).expect("same grid")
    }

    pub fn norm_l2(&self) -> f64 {
        self.map(|v| v * v).integrate().max(0.0).sqrt()
    }

    pub fn norm_w12(&self) -> f64 {
        (self.map(|v| v * v).integrate() + self.grad_sq().integrate()).max(0.0).sqrt()
    }

    /// Row iy as a 1-D field of x (a circle slice at fixed y).
    pub fn row(&self, iy: usize) -> Field1D {
        let nx = self.grid.nx();
        let grid = PeriodicGrid1D { n: nx };
        let values = self.values[iy * nx..(iy + 1) * nx].to_vec();
        Field1D { grid, values }
    }

    /// Column ix as a 1-D field of y.
    pub fn column(&self, ix: usize) -> Field1D {
        let grid = PeriodicGrid1D { n: self.grid.ny() };
        let values = (0..self.grid.ny()).map(|iy| self.at(ix, iy)).collect();
        Field1D { grid, values }
    }

    /// Periodic bilinear interpolation at an arbitrary point.
    pub fn interp(&self, x: f64, y: f64) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let tx = (x + std::f64::consts::PI) / self.grid.hx();
        let ty = (y + std::f64::consts::PI) / self.grid.hy();
        let bx = tx.floor();
        let by = ty.floor();
        let fx = tx - bx;
        let fy = ty - by;
        let ix0 = (bx.rem_euclid(nx as f64)) as usize % nx;
        let iy0 = (by.rem_euclid(ny as f64)) as usize % ny;
        let ix1 = (ix0 + 1) % nx;
        let iy1 = (iy0 + 1) % ny;
        let v00 = self.at(ix0, iy0);
        let v10 = self.at(ix1, iy0);
        let v01 = self.at(ix0, iy1);
        let v11 = self.at(ix1, iy1);
        v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy
    }
}

/// Constants of the functional inequalities used by the convergence checks.
/// Defaults: Poincaré-Wirtinger constant 1 on S¹ and T² (sharp for period
/// 2π), Sobolev constant C_{8/7} = 4/3.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConstants {
    pub poincare_1d: f64,
    pub poincare_2d: f64,
    pub sobolev_8_7: f64,
}

impl Default for AnalysisConstants {
    fn default() -> Self {
        Self { poincare_1d: 1.0, poincare_2d: 1.0, sobolev_8_7: 4.0 / 3.0 }
    }
}

impl AnalysisConstants {
    pub fn validate(&self) -> Result<(), GridError> {
        let ok = self.poincare_1d > 0.0 && self.poincare_2d > 0.0 && self.sobolev_8_7 > 0.0;
        if ok && self.poincare_1d.is_finite() && self.poincare_2d.is_finite() && self.sobolev_8_7.is_finite() {
            Ok(())
        } else {
            Err(GridError::NonFinite(0))
        }
    }
}
