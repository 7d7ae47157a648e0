//! The two warped-product metric families on T³ and their curvature.
//!
//! Doubly warped: g = a²(z)dx² + b²(z)dy² + dz², warps positive and
//! periodic in z. Singly warped: g = dx² + dy² + f²(x, y)dz². Scalar
//! curvature, Ricci eigenvalues (doubly), and the log-form residuals
//! whose sign encodes the curvature bound R ≥ -1/j live here.

use crate::grid::{Field1D, Field2D, GridError, PeriodicGrid1D, PeriodicGrid2D};
use thiserror::Error;

/// Warp factors must stay strictly above this floor so logs and
/// reciprocals are well conditioned.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("warp factor must exceed {POSITIVITY_FLOOR:e} everywhere; min value {0:e}")]
    NonPositiveWarp(f64),
    #[error("warp factors a and b must live on the same grid")]
    MismatchedWarps,
}

fn check_positive_1d(w: &Field1D) -> Result<(), MetricError> {
    let m = w.min();
    if m > POSITIVITY_FLOOR {
        Ok(())
    } else {
        Err(MetricError::NonPositiveWarp(m))
    }
}

fn check_positive_2d(w: &Field2D) -> Result<(), MetricError> {
    let m = w.min();
    if m > POSITIVITY_FLOOR {
        Ok(())
    } else {
        Err(MetricError::NonPositiveWarp(m))
    }
}

/// Outcome of testing the pointwise residual of a log-warp against the
/// curvature bound. `residual ≤ 1/(2j)` is equivalent to R ≥ -1/j.
#[derive(Debug, Clone)]
pub struct ResidualCheck1D {
    pub residual: Field1D,
    pub max_residual: f64,
    /// 1/(2j), the admissible ceiling.
    pub bound: f64,
    /// Discretization allowance: the embedded stencils are fourth order,
    /// so their truncation error scales like h⁴ times the field scale.
    pub fd_tolerance: f64,
    /// Max gap between the residual computed from logs and -R/2 computed
    /// from the warps directly; a cross-check of the two code paths.
    pub consistency_defect: f64,
    pub pass: bool,
}

/// Same as [`ResidualCheck1D`] for the two-variable log-warp.
#[derive(Debug, Clone)]
pub struct ResidualCheck2D {
    pub residual: Field2D,
    pub max_residual: f64,
    pub bound: f64,
    pub fd_tolerance: f64,
    pub consistency_defect: f64,
    pub pass: bool,
}

fn fd_allowance(h: f64, scale: f64) -> f64 {
    10.0 * h.powi(4) * scale
}

/// g = a²(z)dx² + b²(z)dy² + dz² on T³.
#[derive(Debug, Clone)]
pub struct DoublyWarpedMetric {
    a: Field1D,
    b: Field1D,
}

impl DoublyWarpedMetric {
    pub fn new(a: Field1D, b: Field1D) -> Result<Self, MetricError> {
        if a.grid() != b.grid() {
            return Err(MetricError::MismatchedWarps);
        }
        check_positive_1d(&a)?;
        check_positive_1d(&b)?;
        Ok(Self { a, b })
    }

    /// Build from log-warps α = ln a, β = ln b.
    pub fn from_logs(alpha: &Field1D, beta: &Field1D) -> Result<Self, MetricError> {
        Self::new(alpha.map(f64::exp), beta.map(f64::exp))
    }

    /// The flat torus: a = b = 1.
    pub fn flat(grid: PeriodicGrid1D) -> Self {
        Self { a: Field1D::constant(grid, 1.0), b: Field1D::constant(grid, 1.0) }
    }

    pub fn a(&self) -> &Field1D {
        &self.a
    }

    pub fn b(&self) -> &Field1D {
        &self.b
    }

    pub fn grid(&self) -> PeriodicGrid1D {
        self.a.grid()
    }

    pub fn log_a(&self) -> Field1D {
        self.a.map(f64::ln)
    }

    pub fn log_b(&self) -> Field1D {
        self.b.map(f64::ln)
    }

    fn curvature_parts(&self) -> (Field1D, Field1D, Field1D) {
        let app = self.a.derivative(2).expect("order 2 supported");
        let bpp = self.b.derivative(2).expect("order 2 supported");
        let ap = self.a.derivative(1).expect("order 1 supported");
        let bp = self.b.derivative(1).expect("order 1 supported");
        let aa = app.zip(&self.a, |d, w| d / w).expect("same grid");
        let bb = bpp.zip(&self.b, |d, w| d / w).expect("same grid");
        let cross_num = ap.zip(&bp, |u, v| u * v).expect("same grid");
        let cross_den = self.a.zip(&self.b, |u, v| u * v).expect("same grid");
        let cross = cross_num.zip(&cross_den, |n, d| n / d).expect("same grid");
        (aa, bb, cross)
    }

    /// Scalar curvature R = -2(a''/a + b''/b + a'b'/(ab)).
    pub fn scalar_curvature(&self) -> Field1D {
        let (aa, bb, cross) = self.curvature_parts();
        aa.zip(&bb, |u, v| u + v)
            .and_then(|s| s.zip(&cross, |u, v| -2.0 * (u + v)))
            .expect("same grid")
    }

    /// Ricci eigenvalues in the ∂x, ∂y, ∂z frame:
    /// (-a''/a - a'b'/(ab), -b''/b - a'b'/(ab), -a''/a - b''/b).
    /// Their sum is the scalar curvature.
    pub fn ricci_eigenvalues(&self) -> [Field1D; 3] {
        let (aa, bb, cross) = self.curvature_parts();
        let ex = aa.zip(&cross, |u, c| -u - c).expect("same grid");
        let ey = bb.zip(&cross, |u, c| -u - c).expect("same grid");
        let ez = aa.zip(&bb, |u, v| -u - v).expect("same grid");
        [ex, ey, ez]
    }

    /// Residual α'' + β'' + α'² + β'² + α'β' of the log-warps, which
    /// equals -R/2. The curvature hypothesis R ≥ -1/j holds iff the
    /// residual stays below 1/(2j) everywhere.
    pub fn log_residual(&self, j: u32) -> ResidualCheck1D {
        let alpha = self.log_a();
        let beta = self.log_b();
        let ap = alpha.derivative(1).expect("order 1 supported");
        let bp = beta.derivative(1).expect("order 1 supported");
        let app = alpha.derivative(2).expect("order 2 supported");
        let bpp = beta.derivative(2).expect("order 2 supported");
        let n = self.grid().n();
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let (da, db) = (ap.values()[i], bp.values()[i]);
            values.push(app.values()[i] + bpp.values()[i] + da * da + db * db + da * db);
        }
        let residual = Field1D::new(self.grid(), values).expect("finite by construction");
        let neg_half_r = self.scalar_curvature().map(|r| -0.5 * r);
        let consistency_defect =
            residual.zip(&neg_half_r, |u, v| (u - v).abs()).expect("same grid").max();
        let max_residual = residual.max();
        let bound = 0.5 / f64::from(j);
        let fd_tolerance = fd_allowance(self.grid().h(), residual.max_abs());
        ResidualCheck1D {
            max_residual,
            bound,
            fd_tolerance,
            consistency_defect,
            pass: max_residual <= bound + fd_tolerance,
            residual,
        }
    }
}

/// g = dx² + dy² + f²(x, y)dz² on T³.
#[derive(Debug, Clone)]
pub struct SinglyWarpedMetric {
    f: Field2D,
}

impl SinglyWarpedMetric {
    pub fn new(f: Field2D) -> Result<Self, MetricError> {
        check_positive_2d(&f)?;
        Ok(Self { f })
    }

    /// Build from the log-warp h = ln f.
    pub fn from_log(h: &Field2D) -> Result<Self, MetricError> {
        Self::new(h.map(f64::exp))
    }

    pub fn flat(grid: PeriodicGrid2D) -> Self {
        Self { f: Field2D::constant(grid, 1.0) }
    }

    pub fn f(&self) -> &Field2D {
        &self.f
    }

    pub fn grid(&self) -> PeriodicGrid2D {
        self.f.grid()
    }

    pub fn log_f(&self) -> Field2D {
        self.f.map(f64::ln)
    }

    /// Scalar curvature R = -2Δf/f.
    pub fn scalar_curvature(&self) -> Field1D2D {
        let lap = self.f.laplacian();
        Field1D2D(lap.zip(&self.f, |d, w| -2.0 * d / w).expect("same grid"))
    }

    /// Residual Δh + |∇h|² of h = ln f, equal to -R/2; the curvature
    /// hypothesis R ≥ -1/j holds iff it stays below 1/(2j).
    pub fn elliptic_residual(&self, j: u32) -> ResidualCheck2D {
        let h = self.log_f();
        let lap = h.laplacian();
        let gsq = h.grad_sq();
        let residual = lap.zip(&gsq, |l, g| l + g).expect("same grid");
        let neg_half_r = self.scalar_curvature().0.map(|r| -0.5 * r);
        let consistency_defect =
            residual.zip(&neg_half_r, |u, v| (u - v).abs()).expect("same grid").max();
        let max_residual = residual.max();
        let bound = 0.5 / f64::from(j);
        let hmax = self.grid().hx().max(self.grid().hy());
        let fd_tolerance = fd_allowance(hmax, residual.max_abs());
        ResidualCheck2D {
            max_residual,
            bound,
            fd_tolerance,
            consistency_defect,
            pass: max_residual <= bound + fd_tolerance,
            residual,
        }
    }
}

/// Newtype so the singly scalar curvature (a 2-D field) reads distinctly
/// from the doubly one at call sites while deref-ing to the raw field.
#[derive(Debug, Clone)]
pub struct Field1D2D(pub Field2D);

impl std::ops::Deref for Field1D2D {
    type Target = Field2D;

    fn deref(&self) -> &Field2D {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1(n: usize) -> PeriodicGrid1D {
        PeriodicGrid1D::new(n).unwrap()
    }

    fn exp_warp(n: usize, amp: f64, phase: f64) -> Field1D {
        Field1D::from_fn(grid1(n), move |z| (amp * (z + phase).sin()).exp())
    }

    #[test]
    fn flat_metric_has_zero_curvature_exactly() {
        let m = DoublyWarpedMetric::flat(grid1(32));
        assert_eq!(m.scalar_curvature().max_abs(), 0.0);
        for eig in m.ricci_eigenvalues() {
            assert_eq!(eig.max_abs(), 0.0);
        }
        let check = m.log_residual(1);
        assert_eq!(check.max_residual, 0.0);
        assert!(check.pass);

        let s = SinglyWarpedMetric::flat(PeriodicGrid2D::square(16).unwrap());
        assert_eq!(s.scalar_curvature().max_abs(), 0.0);
        assert!(s.elliptic_residual(1).pass);
    }

    #[test]
    fn doubly_scalar_curvature_matches_closed_form() {
        // a = exp(ε sin z), b = 1: R = -2(α'' + α'²) = 2ε sin z - 2ε²cos²z.
        let eps = 0.1;
        let n = 256;
        let a = exp_warp(n, eps, 0.0);
        let b = Field1D::constant(grid1(n), 1.0);
        let m = DoublyWarpedMetric::new(a, b).unwrap();
        let r = m.scalar_curvature();
        for i in 0..n {
            let z = grid1(n).node(i);
            let want = 2.0 * eps * z.sin() - 2.0 * eps * eps * z.cos() * z.cos();
            assert!((r.values()[i] - want).abs() < 1e-8, "at z = {z}");
        }
    }

    #[test]
    fn ricci_trace_equals_scalar_curvature() {
        let a = exp_warp(256, 0.3, 0.0);
        let b = exp_warp(256, 0.2, std::f64::consts::FRAC_PI_2);
        let m = DoublyWarpedMetric::new(a, b).unwrap();
        let r = m.scalar_curvature();
        let [ex, ey, ez] = m.ricci_eigenvalues();
        for i in 0..256 {
            let trace = ex.values()[i] + ey.values()[i] + ez.values()[i];
            assert!((trace - r.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn doubly_residual_agrees_with_curvature_path() {
        let a = exp_warp(512, 0.1, 0.0);
        let b = exp_warp(512, 0.1, std::f64::consts::FRAC_PI_2);
        let m = DoublyWarpedMetric::new(a, b).unwrap();
        let check = m.log_residual(100);
        assert!(check.consistency_defect < 1e-8, "defect {}", check.consistency_defect);
    }

    #[test]
    fn residual_bound_decides_pass() {
        // Amplitude 0.1 makes max residual ≈ 0.1, far above 1/(2·100).
        let m = DoublyWarpedMetric::new(
            exp_warp(128, 0.1, 0.0),
            Field1D::constant(grid1(128), 1.0),
        )
        .unwrap();
        let fail = m.log_residual(100);
        assert!(!fail.pass);
        assert!(fail.max_residual > fail.bound);
        // Amplitude 1e-3 stays below the same bound.
        let m2 = DoublyWarpedMetric::new(
            exp_warp(128, 1e-3, 0.0),
            Field1D::constant(grid1(128), 1.0),
        )
        .unwrap();
        let ok = m2.log_residual(100);
        assert!(ok.pass, "max {} bound {}", ok.max_residual, ok.bound);
    }

    #[test]
    fn curvature_is_invariant_under_constant_rescaling() {
        let a = exp_warp(128, 0.2, 0.4);
        let b = exp_warp(128, 0.15, 1.1);
        let m = DoublyWarpedMetric::new(a.clone(), b.clone()).unwrap();
        let scaled =
            DoublyWarpedMetric::new(a.map(|v| 3.0 * v), b.map(|v| 0.5 * v)).unwrap();
        let diff = m
            .scalar_curvature()
            .zip(&scaled.scalar_curvature(), |u, v| (u - v).abs())
            .unwrap()
            .max();
        assert!(diff < 1e-10, "diff {diff}");
    }

    #[test]
    fn constructors_reject_degenerate_warps() {
        let g = grid1(16);
        let zeroed = Field1D::from_fn(g, |z| if z < 0.0 { 1.0 } else { 0.0 });
        assert!(matches!(
            DoublyWarpedMetric::new(zeroed, Field1D::constant(g, 1.0)),
            Err(MetricError::NonPositiveWarp(_))
        ));
        let a16 = Field1D::constant(g, 1.0);
        let b32 = Field1D::constant(grid1(32), 1.0);
        assert!(matches!(
            DoublyWarpedMetric::new(a16, b32),
            Err(MetricError::MismatchedWarps)
        ));
        // Logs that underflow the positivity floor are rejected too.
        let deep = Field1D::constant(g, -30.0);
        assert!(matches!(
            DoublyWarpedMetric::from_logs(&deep, &Field1D::constant(g, 0.0)),
            Err(MetricError::NonPositiveWarp(_))
        ));

        let g2 = PeriodicGrid2D::square(16).unwrap();
        let negf = Field2D::constant(g2, -1.0);
        assert!(matches!(SinglyWarpedMetric::new(negf), Err(MetricError::NonPositiveWarp(_))));
    }

    #[test]
    fn singly_scalar_curvature_matches_closed_form() {
        // f = exp(ε sin x): R = -2(ε²cos²x - ε sin x).
        let eps = 0.05;
        let g2 = PeriodicGrid2D::square(128).unwrap();
        let f = Field2D::from_fn(g2, |x, _| (eps * x.sin()).exp());
        let m = SinglyWarpedMetric::new(f).unwrap();
        let r = m.scalar_curvature();
        let want = Field2D::from_fn(g2, |x, _| {
            -2.0 * (eps * eps * x.cos() * x.cos() - eps * x.sin())
        });
        let err = r.zip(&want, |u, v| (u - v).abs()).unwrap().max();
        assert!(err < 1e-7, "max error {err}");
    }

    #[test]
    fn singly_residual_agrees_with_curvature_path() {
        let eps = 0.05;
        let g2 = PeriodicGrid2D::square(128).unwrap();
        let f = Field2D::from_fn(g2, |x, y| (eps * (x.sin() + y.cos())).exp());
        let m = SinglyWarpedMetric::new(f).unwrap();
        let check = m.elliptic_residual(64);
        assert!(check.consistency_defect < 1e-7, "defect {}", check.consistency_defect);
    }

    #[test]
    fn singly_residual_decides_pass() {
        let g2 = PeriodicGrid2D::square(64).unwrap();
        let strong = Field2D::from_fn(g2, |x, y| (0.2 * (x.sin() + y.sin())).exp());
        let m = SinglyWarpedMetric::new(strong).unwrap();
        assert!(!m.elliptic_residual(256).pass);
        let weak = Field2D::from_fn(g2, |x, y| (2e-4 * (x.sin() + y.sin())).exp());
        let m2 = SinglyWarpedMetric::new(weak).unwrap();
        let check = m2.elliptic_residual(256);
        assert!(check.pass, "max {} bound {}", check.max_residual, check.bound);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // Random small trig warps: the log-residual path and the direct
        // curvature path must agree, and the Ricci trace identity holds.
        #[test]
        fn residual_and_trace_identities_hold(
            amp_a in 0.01f64..0.2,
            amp_b in 0.01f64..0.2,
            ka in 1u32..3,
            kb in 1u32..3,
            phase in 0.0f64..std::f64::consts::PI,
        ) {
            let g = grid1(256);
            let a = Field1D::from_fn(g, |z| (amp_a * (f64::from(ka) * z).sin()).exp());
            let b = Field1D::from_fn(g, |z| (amp_b * (f64::from(kb) * z + phase).cos()).exp());
            let m = DoublyWarpedMetric::new(a, b).unwrap();
            let check = m.log_residual(10);
            prop_assert!(check.consistency_defect < 1e-6);
            let r = m.scalar_curvature();
            let [ex, ey, ez] = m.ricci_eigenvalues();
            for i in 0..256 {
                let trace = ex.values()[i] + ey.values()[i] + ez.values()[i];
                prop_assert!((trace - r.values()[i]).abs() < 1e-11);
            }
        }
    }
}
