//! Warp-factor families and amplitude selection.
//!
//! A sequence spec fixes a profile shape (either explicit Fourier modes
//! or seeded draws) and an amplitude law; `make_doubly` / `make_singly`
//! then produce the metric for a given curvature index j. Profiles are
//! normalized to unit sup-norm so the scale s is the actual log-warp
//! amplitude, and seeded draws never consume j, so the profile is the
//! same function across the whole schedule.

use crate::grid::{Field1D, Field2D, PeriodicGrid1D, PeriodicGrid2D, TWO_PI};
use crate::metric::{DoublyWarpedMetric, MetricError, SinglyWarpedMetric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),
    #[error("family {0:?} cannot be built on this grid dimension")]
    WrongFamily(FamilyKind),
    #[error(
        "curvature floor: even amplitude 1e-12 drives min R = {min_r:.3e} below -1/{j}"
    )]
    CurvatureFloor { j: u32, min_r: f64 },
    #[error(
        "amplitude {scale:.6e} rejected: min R = {min_r:.6e} violates the bound {bound:.6e}"
    )]
    AmplitudeRejected { scale: f64, min_r: f64, bound: f64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Warp families. The two "sin" kinds are fixed single-mode profiles
/// with closed-form curvature, the "multimode" kinds use the mode list
/// in `SequenceSpec` (or seeded draws when empty), and the well is a
/// localized non-compliant dip used for negative testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    #[serde(rename = "doubly-sin")]
    DoublySin,
    #[serde(rename = "doubly-multimode")]
    DoublyMultimode,
    #[serde(rename = "singly-sin")]
    SinglySin,
    #[serde(rename = "singly-multimode")]
    SinglyMultimode,
    #[serde(rename = "singly-well")]
    SinglyWell,
}

impl FamilyKind {
    pub fn is_doubly(self) -> bool {
        matches!(self, FamilyKind::DoublySin | FamilyKind::DoublyMultimode)
    }
}

/// How the log-warp amplitude s depends on j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AmplitudeLaw {
    /// Largest s ≤ base with min R ≥ -1/j, found by bisection.
    #[serde(rename = "bisect")]
    #[default]
    Bisect,
    /// s = base / √j, then validated against min R ≥ -1/j.
    #[serde(rename = "inverse-sqrt")]
    InverseSqrt,
    /// s = base regardless of j; rejected if the curvature bound fails.
    #[serde(rename = "forced")]
    Forced,
}

/// One Fourier mode of a log-warp profile: weight · sin(kx·x + ky·y + phase).
/// 1-D profiles use kx against the z coordinate and require ky = 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Mode {
    pub kx: i32,
    #[serde(default)]
    pub ky: i32,
    pub phase: f64,
    pub weight: f64,
}

impl Mode {
    pub fn eval_1d(&self, z: f64) -> f64 {
        self.weight * (self.kx as f64 * z + self.phase).sin()
    }

    pub fn d1_1d(&self, z: f64) -> f64 {
        let k = self.kx as f64;
        self.weight * k * (k * z + self.phase).cos()
    }

    pub fn d2_1d(&self, z: f64) -> f64 {
        let k = self.kx as f64;
        -self.weight * k * k * (k * z + self.phase).sin()
    }

    pub fn eval_2d(&self, x: f64, y: f64) -> f64 {
        self.weight * (self.kx as f64 * x + self.ky as f64 * y + self.phase).sin()
    }

    pub fn dx_2d(&self, x: f64, y: f64) -> f64 {
        let k = self.kx as f64;
        self.weight * k * (k * x + self.ky as f64 * y + self.phase).cos()
    }

    pub fn dy_2d(&self, x: f64, y: f64) -> f64 {
        let k = self.ky as f64;
        self.weight * k * (self.kx as f64 * x + k * y + self.phase).cos()
    }

    pub fn laplacian_2d(&self, x: f64, y: f64) -> f64 {
        let (kx, ky) = (self.kx as f64, self.ky as f64);
        -(kx * kx + ky * ky) * self.eval_2d(x, y)
    }
}

/// Band-limited 1-D profile normalized to unit sup-norm, with analytic
/// derivatives (used both for generation and as an oracle in tests).
#[derive(Debug, Clone)]
pub struct Profile1D {
    modes: Vec<Mode>,
    norm: f64,
}

/// 2-D counterpart of [`Profile1D`].
#[derive(Debug, Clone)]
pub struct Profile2D {
    modes: Vec<Mode>,
    norm: f64,
}

// Sup-norms are estimated on fixed fine probe grids so normalization is
// independent of the working resolution.
const PROBE_1D: usize = 4096;
const PROBE_2D: usize = 512;

impl Profile1D {
    fn new(modes: Vec<Mode>) -> Result<Self, GenerateError> {
        let mut sup: f64 = 0.0;
        for i in 0..PROBE_1D {
            let z = -std::f64::consts::PI + TWO_PI * i as f64 / PROBE_1D as f64;
            let v: f64 = modes.iter().map(|m| m.eval_1d(z)).sum();
            sup = sup.max(v.abs());
        }
        if !(sup > 0.0) || !sup.is_finite() {
            return Err(GenerateError::InvalidSpec(
                "1-D profile is identically zero or non-finite".into(),
            ));
        }
        Ok(Self { modes, norm: sup })
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.modes.iter().map(|m| m.eval_1d(z)).sum::<f64>() / self.norm
    }

    pub fn d1(&self, z: f64) -> f64 {
        self.modes.iter().map(|m| m.d1_1d(z)).sum::<f64>() / self.norm
    }

    pub fn d2(&self, z: f64) -> f64 {
        self.modes.iter().map(|m| m.d2_1d(z)).sum::<f64>() / self.norm
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

impl Profile2D {
    fn new(modes: Vec<Mode>) -> Result<Self, GenerateError> {
        let mut sup: f64 = 0.0;
        for iy in 0..PROBE_2D {
            let y = -std::f64::consts::PI + TWO_PI * iy as f64 / PROBE_2D as f64;
            for ix in 0..PROBE_2D {
                let x = -std::f64::consts::PI + TWO_PI * ix as f64 / PROBE_2D as f64;
                let v: f64 = modes.iter().map(|m| m.eval_2d(x, y)).sum();
                sup = sup.max(v.abs());
            }
        }
        if !(sup > 0.0) || !sup.is_finite() {
            return Err(GenerateError::InvalidSpec(
                "2-D profile is identically zero or non-finite".into(),
            ));
        }
        Ok(Self { modes, norm: sup })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.modes.iter().map(|m| m.eval_2d(x, y)).sum::<f64>() / self.norm
    }

    pub fn dx(&self, x: f64, y: f64) -> f64 {
        self.modes.iter().map(|m| m.dx_2d(x, y)).sum::<f64>() / self.norm
    }

    pub fn dy(&self, x: f64, y: f64) -> f64 {
        self.modes.iter().map(|m| m.dy_2d(x, y)).sum::<f64>() / self.norm
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        self.modes.iter().map(|m| m.laplacian_2d(x, y)).sum::<f64>() / self.norm
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Declarative description of a metric sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub kind: FamilyKind,
    pub base_amplitude: f64,
    #[serde(default)]
    pub amplitude_law: AmplitudeLaw,
    /// Explicit modes; empty means seeded draws (three modes per profile).
    #[serde(default)]
    pub modes: Vec<Mode>,
    pub j_schedule: Vec<u32>,
    #[serde(default)]
    pub seed: u64,
    /// Only read by the singly-well family.
    #[serde(default = "default_well_depth")]
    pub well_depth: f64,
    #[serde(default = "default_well_radius")]
    pub well_radius: f64,
}

fn default_well_depth() -> f64 {
    0.9
}

fn default_well_radius() -> f64 {
    0.1
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.j_schedule.is_empty() {
            return Err(GenerateError::InvalidSpec("empty j schedule".into()));
        }
        if self.j_schedule.iter().any(|&j| j == 0) {
            return Err(GenerateError::InvalidSpec("j must be at least 1".into()));
        }
        if !self.j_schedule.windows(2).all(|w| w[0] < w[1]) {
            return Err(GenerateError::InvalidSpec(
                "j schedule must be strictly increasing".into(),
            ));
        }
        if !self.base_amplitude.is_finite() || self.base_amplitude < 0.0 {
            return Err(GenerateError::InvalidSpec(
                "base amplitude must be finite and non-negative".into(),
            ));
        }
        for m in &self.modes {
            if !m.phase.is_finite() || !m.weight.is_finite() {
                return Err(GenerateError::InvalidSpec("non-finite mode".into()));
            }
            if self.kind.is_doubly() && m.ky != 0 {
                return Err(GenerateError::InvalidSpec(
                    "1-D profiles require ky = 0 in every mode".into(),
                ));
            }
            if m.kx == 0 && m.ky == 0 {
                return Err(GenerateError::InvalidSpec(
                    "constant modes (kx = ky = 0) are not allowed".into(),
                ));
            }
        }
        if self.kind == FamilyKind::SinglyWell {
            if !(self.well_depth > 0.0 && self.well_depth < 1.0) {
                return Err(GenerateError::InvalidSpec(
                    "well depth must lie in (0, 1)".into(),
                ));
            }
            if !(self.well_radius > 0.0 && self.well_radius < std::f64::consts::FRAC_PI_4) {
                return Err(GenerateError::InvalidSpec(
                    "well radius must lie in (0, pi/4)".into(),
                ));
            }
        }
        Ok(())
    }

    /// The profile pair (alpha, beta) of a doubly spec. Stable across j.
    pub fn doubly_profiles(&self) -> Result<(Profile1D, Profile1D), GenerateError> {
        match self.kind {
            FamilyKind::DoublySin => {
                let a = vec![Mode { kx: 1, ky: 0, phase: 0.0, weight: 1.0 }];
                // cos z written as a phase-shifted sine.
                let b = vec![Mode {
                    kx: 1,
                    ky: 0,
                    phase: std::f64::consts::FRAC_PI_2,
                    weight: 1.0,
                }];
                Ok((Profile1D::new(a)?, Profile1D::new(b)?))
            }
            FamilyKind::DoublyMultimode => {
                if self.modes.is_empty() {
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    let a = draw_modes_1d(&mut rng);
                    let b = draw_modes_1d(&mut rng);
                    Ok((Profile1D::new(a)?, Profile1D::new(b)?))
                } else {
                    let a = self.modes.clone();
                    // The companion warp reuses the modes a quarter period out
                    // of phase, so the two warps stay genuinely distinct.
                    let b = self
                        .modes
                        .iter()
                        .map(|m| Mode { phase: m.phase + std::f64::consts::FRAC_PI_2, ..*m })
                        .collect();
                    Ok((Profile1D::new(a)?, Profile1D::new(b)?))
                }
            }
            other => Err(GenerateError::WrongFamily(other)),
        }
    }

    /// The 2-D log-warp profile of a singly spec (not the well family).
    pub fn singly_profile(&self) -> Result<Profile2D, GenerateError> {
        match self.kind {
            FamilyKind::SinglySin => {
                Profile2D::new(vec![Mode { kx: 1, ky: 0, phase: 0.0, weight: 1.0 }])
            }
            FamilyKind::SinglyMultimode => {
                if self.modes.is_empty() {
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    Profile2D::new(draw_modes_2d(&mut rng))
                } else {
                    Profile2D::new(self.modes.clone())
                }
            }
            other => Err(GenerateError::WrongFamily(other)),
        }
    }
}

fn draw_modes_1d(rng: &mut ChaCha8Rng) -> Vec<Mode> {
    (0..3)
        .map(|_| Mode {
            kx: rng.gen_range(1..=3),
            ky: 0,
            phase: rng.gen_range(0.0..TWO_PI),
            weight: rng.gen_range(0.3..1.0),
        })
        .collect()
}

fn draw_modes_2d(rng: &mut ChaCha8Rng) -> Vec<Mode> {
    (0..3)
        .map(|_| {
            let (kx, ky) = loop {
                let kx = rng.gen_range(-2..=2);
                let ky = rng.gen_range(-2..=2);
                if kx != 0 || ky != 0 {
                    break (kx, ky);
                }
            };
            Mode {
                kx,
                ky,
                phase: rng.gen_range(0.0..TWO_PI),
                weight: rng.gen_range(0.3..1.0),
            }
        })
        .collect()
}

/// A doubly warped metric produced for one j, with the amplitude that
/// was actually used and the analytic profiles behind the log-warps.
#[derive(Debug, Clone)]
pub struct GeneratedDoubly {
    pub metric: DoublyWarpedMetric,
    pub scale: f64,
    pub alpha: Profile1D,
    pub beta: Profile1D,
}

/// Singly warped counterpart. The profile is absent for the well family,
/// whose log-warp is not band-limited.
#[derive(Debug, Clone)]
pub struct GeneratedSingly {
    pub metric: SinglyWarpedMetric,
    pub scale: f64,
    pub profile: Option<Profile2D>,
}

const FLOOR_SCALE: f64 = 1e-12;
const BISECT_ITERS: usize = 60;

/// Smallest scalar curvature over the grid at log-amplitude s.
fn min_r_doubly(
    alpha: &Profile1D,
    beta: &Profile1D,
    grid: PeriodicGrid1D,
    s: f64,
) -> Result<f64, MetricError> {
    let m = build_doubly(alpha, beta, grid, s)?;
    Ok(m.scalar_curvature().min())
}

fn min_r_singly(profile: &Profile2D, grid: PeriodicGrid2D, s: f64) -> Result<f64, MetricError> {
    let m = build_singly(profile, grid, s)?;
    Ok(m.scalar_curvature().min())
}

fn build_doubly(
    alpha: &Profile1D,
    beta: &Profile1D,
    grid: PeriodicGrid1D,
    s: f64,
) -> Result<DoublyWarpedMetric, MetricError> {
    let la = Field1D::from_fn(grid, |z| s * alpha.eval(z));
    let lb = Field1D::from_fn(grid, |z| s * beta.eval(z));
    DoublyWarpedMetric::from_logs(&la, &lb)
}

fn build_singly(
    profile: &Profile2D,
    grid: PeriodicGrid2D,
    s: f64,
) -> Result<SinglyWarpedMetric, MetricError> {
    let lf = Field2D::from_fn(grid, |x, y| s * profile.eval(x, y));
    SinglyWarpedMetric::from_log(&lf)
}

/// Amplitude selection shared by both families. `min_r` evaluates the
/// curvature minimum at a trial amplitude.
fn select_amplitude(
    law: AmplitudeLaw,
    base: f64,
    j: u32,
    mut min_r: impl FnMut(f64) -> Result<f64, MetricError>,
) -> Result<f64, GenerateError> {
    let bound = -1.0 / j as f64;
    if base == 0.0 {
        return Ok(0.0);
    }
    match law {
        AmplitudeLaw::Forced | AmplitudeLaw::InverseSqrt => {
            let s = match law {
                AmplitudeLaw::Forced => base,
                _ => base / (j as f64).sqrt(),
            };
            let r = min_r(s)?;
            if r < bound {
                return Err(GenerateError::AmplitudeRejected { scale: s, min_r: r, bound });
            }
            Ok(s)
        }
        AmplitudeLaw::Bisect => {
            if min_r(base)? >= bound {
                return Ok(base);
            }
            if min_r(FLOOR_SCALE)? < bound {
                return Err(GenerateError::CurvatureFloor { j, min_r: min_r(FLOOR_SCALE)? });
            }
            // Invariant: lo satisfies the bound, hi does not.
            let (mut lo, mut hi) = (FLOOR_SCALE, base);
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                if min_r(mid)? >= bound {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        }
    }
}

/// Builds the doubly warped metric of `spec` at curvature index j.
pub fn make_doubly(
    spec: &SequenceSpec,
    j: u32,
    grid: PeriodicGrid1D,
) -> Result<GeneratedDoubly, GenerateError> {
    spec.validate()?;
    if !spec.kind.is_doubly() {
        return Err(GenerateError::WrongFamily(spec.kind));
    }
    let (alpha, beta) = spec.doubly_profiles()?;
    let scale = select_amplitude(spec.amplitude_law, spec.base_amplitude, j, |s| {
        min_r_doubly(&alpha, &beta, grid, s)
    })?;
    let metric = build_doubly(&alpha, &beta, grid, scale)?;
    Ok(GeneratedDoubly { metric, scale, alpha, beta })
}

/// Builds the singly warped metric of `spec` at curvature index j. The
/// well family ignores the amplitude law and curvature bound entirely;
/// its hypothesis violations are the point.
pub fn make_singly(
    spec: &SequenceSpec,
    j: u32,
    grid: PeriodicGrid2D,
) -> Result<GeneratedSingly, GenerateError> {
    spec.validate()?;
    match spec.kind {
        FamilyKind::SinglyWell => {
            let metric = make_adversarial_well(spec.well_depth, spec.well_radius, grid)?;
            Ok(GeneratedSingly { metric, scale: spec.well_depth, profile: None })
        }
        FamilyKind::SinglySin | FamilyKind::SinglyMultimode => {
            let profile = spec.singly_profile()?;
            let scale = select_amplitude(spec.amplitude_law, spec.base_amplitude, j, |s| {
                min_r_singly(&profile, grid, s)
            })?;
            let metric = build_singly(&profile, grid, scale)?;
            Ok(GeneratedSingly { metric, scale, profile: Some(profile) })
        }
        other => Err(GenerateError::WrongFamily(other)),
    }
}

/// Smooth compactly supported bump: e^{1 - 1/(1-q)} on [0, 1), zero after.
/// Peaks at 1 when q = 0.
pub fn bump(q: f64) -> f64 {
    if q >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - q)).exp()
    }
}

/// Localized warp dip f = exp(-depth · bump(r²/radius²)) centered at the
/// origin. Smooth and periodic (the bump support stays inside one cell),
/// but its curvature spike scales like depth/radius², so the elliptic
/// residual bound fails for every reasonable j: this is the adversarial
/// input for hypothesis-failure paths.
pub fn make_adversarial_well(
    depth: f64,
    radius: f64,
    grid: PeriodicGrid2D,
) -> Result<SinglyWarpedMetric, GenerateError> {
    if !(depth > 0.0 && depth < 1.0) {
        return Err(GenerateError::InvalidSpec("well depth must lie in (0, 1)".into()));
    }
    if !(radius > 0.0 && radius < std::f64::consts::FRAC_PI_4) {
        return Err(GenerateError::InvalidSpec("well radius must lie in (0, pi/4)".into()));
    }
    let r2 = radius * radius;
    let lf = Field2D::from_fn(grid, |x, y| -depth * bump((x * x + y * y) / r2));
    Ok(SinglyWarpedMetric::from_log(&lf)?)
}
