//! Verification pipeline for doubly warped metrics
//! g = a²(z)dx² + b²(z)dy² + dz².
//!
//! Per j the pipeline checks the hypothesis layer (curvature residual,
//! foliation-area floor, diameter ceiling) and then the quantities those
//! hypotheses are supposed to control: log-gradient energies, the
//! pointwise warp envelope, and the oscillation-vs-energy chain. The
//! sequence converges when every hypothesis holds, every controlled
//! quantity stays inside its bound, and the distance columns to the
//! constant-warp limit actually decay.

use crate::functional::{
    foliation_areas_doubly, lattice_report_doubly, volume_doubly, DiameterEstimate, FlatTorus3,
    LatticeReport,
};
use crate::generate::{make_doubly, GeneratedDoubly, SequenceSpec};
use crate::grid::{AnalysisConstants, Field1D, PeriodicGrid1D, TWO_PI};
use crate::metric::DoublyWarpedMetric;
use crate::report::{
    fit_power_law, CheckEntry, ConvergenceReport, LimitSummary, PipelineError, ReportRow,
    Verdict, SCHEMA_VERSION,
};
use serde::{Deserialize, Serialize};

const PI: f64 = std::f64::consts::PI;

/// Family-level hypothesis constants; `at` instantiates them for one j.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisBounds {
    /// Foliation-area floor.
    pub a0: f64,
    /// Diameter ceiling.
    pub d0: f64,
    /// Volume ceiling (used by the singly warped pipeline).
    pub v0: f64,
}

impl HypothesisBounds {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.a0 > 0.0 && self.d0 > 0.0 && self.v0 > 0.0)
            || !(self.a0.is_finite() && self.d0.is_finite() && self.v0.is_finite())
        {
            return Err(PipelineError::InvalidConfig(
                "hypothesis bounds must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn at(&self, j: u32) -> HypothesisSet {
        HypothesisSet { j, a0: self.a0, d0: self.d0, v0: self.v0 }
    }
}

impl Default for HypothesisBounds {
    fn default() -> Self {
        Self { a0: 30.0, d0: 6.0, v0: 50.0 }
    }
}

/// The hypothesis package at one curvature index: R ≥ -1/j together with
/// the area floor, diameter ceiling, and volume ceiling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HypothesisSet {
    pub j: u32,
    pub a0: f64,
    pub d0: f64,
    pub v0: f64,
}

/// Constant-warp limit candidate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LimitCandidate1D {
    pub a_inf: f64,
    pub b_inf: f64,
}

impl LimitCandidate1D {
    /// Geometric mean of the warps of the final metric: exp of the mean
    /// log-warp, so a flat input reproduces itself exactly.
    pub fn from_final(m: &DoublyWarpedMetric) -> Self {
        Self { a_inf: m.log_a().mean().exp(), b_inf: m.log_b().mean().exp() }
    }

    pub fn flat_torus(&self) -> FlatTorus3 {
        FlatTorus3::doubly_limit(self.a_inf, self.b_inf)
    }
}

/// Checks whose failure invalidates the hypothesis layer rather than the
/// implication under test.
pub const DOUBLY_HYPOTHESIS_CHECKS: [&str; 5] =
    ["residual", "area-z-class", "area-x-class", "area-y-class", "diameter-bound"];

fn quad_tol(measured: f64) -> f64 {
    1e-8 + 1e-12 * measured.abs()
}

/// Area floor A0 on all three foliation classes, then the pointwise and
/// integrated warp floors that the floor is supposed to force. The
/// derived entries go vacuous when the area hypothesis itself fails.
pub fn check_min_area_bounds(m: &DoublyWarpedMetric, a0: f64) -> Vec<CheckEntry> {
    let areas = foliation_areas_doubly(m);
    let given = vec![
        CheckEntry::lower("area-z-class", areas[0], a0, quad_tol(areas[0])),
        CheckEntry::lower("area-x-class", areas[1], a0, quad_tol(areas[1])),
        CheckEntry::lower("area-y-class", areas[2], a0, quad_tol(areas[2])),
    ];
    let hyp_ok = given.iter().all(|e| e.pass);
    let ab_min = m.a().zip(m.b(), |x, y| x * y).expect("warps share a grid").min();
    let four_pi2 = TWO_PI * TWO_PI;
    let mut derived = vec![
        CheckEntry::lower("min-warp-product", ab_min, a0 / four_pi2, quad_tol(ab_min)),
        CheckEntry::lower(
            "mean-warp-a",
            m.a().integrate(),
            a0 / TWO_PI,
            quad_tol(m.a().integrate()),
        ),
        CheckEntry::lower(
            "mean-warp-b",
            m.b().integrate(),
            a0 / TWO_PI,
            quad_tol(m.b().integrate()),
        ),
    ];
    if !hyp_ok {
        derived = derived.into_iter().map(CheckEntry::vacuous).collect();
    }
    let mut out = given;
    out.extend(derived);
    out
}

/// Diameter ceiling D0, then the warp minima it controls: a warp that
/// stays above the diameter would make its own circle factor longer than
/// any geodesic loop, so min a and min b cannot exceed the diameter.
/// The lattice overshoots distances, which only makes the hypothesis
/// test stricter and the conclusion test safer.
pub fn check_diameter_minima(
    m: &DoublyWarpedMetric,
    d0: f64,
    diam: &DiameterEstimate,
) -> Vec<CheckEntry> {
    let slack = diam.error_estimate + 1e-8;
    let hyp = CheckEntry::upper("diameter-bound", diam.value, d0, slack);
    let hyp_ok = hyp.pass;
    let mut concl = vec![
        CheckEntry::upper("min-warp-a-vs-diameter", m.a().min(), diam.value, slack + 1e-6),
        CheckEntry::upper("min-warp-b-vs-diameter", m.b().min(), diam.value, slack + 1e-6),
    ];
    if !hyp_ok {
        concl = concl.into_iter().map(CheckEntry::vacuous).collect();
    }
    let mut out = vec![hyp];
    out.extend(concl);
    out
}

fn fd_tol(grid: PeriodicGrid1D, measured: f64) -> f64 {
    let h4 = grid.h().powi(4);
    1e-8 + 10.0 * h4 * (1.0 + measured.abs())
}

/// Log-gradient energies controlled by the curvature residual:
/// ∫α'² ≤ 2π/j, ∫β'² ≤ 2π/j, and the cross term ∫α'β' ≥ -π/j.
/// Vacuous unless the residual hypothesis holds at this j.
pub fn check_log_gradient(m: &DoublyWarpedMetric, j: u32, residual_ok: bool) -> Vec<CheckEntry> {
    let grid = m.grid();
    let alpha = m.log_a();
    let beta = m.log_b();
    let da = alpha.derivative(1).expect("order 1 supported");
    let db = beta.derivative(1).expect("order 1 supported");
    let ea = da.map(|v| v * v).integrate();
    let eb = db.map(|v| v * v).integrate();
    let cross = da.zip(&db, |x, y| x * y).expect("same grid").integrate();
    let jf = j as f64;
    let mut entries = vec![
        CheckEntry::upper("log-gradient-a", ea, TWO_PI / jf, fd_tol(grid, ea)),
        CheckEntry::upper("log-gradient-b", eb, TWO_PI / jf, fd_tol(grid, eb)),
        CheckEntry::lower("log-gradient-cross", cross, -PI / jf, fd_tol(grid, cross)),
    ];
    if !residual_ok {
        entries = entries.into_iter().map(CheckEntry::vacuous).collect();
    }
    entries
}

/// Two-sided pointwise envelope for both warps,
/// A0/(4π²D0)·e^{-2π/√j} ≤ a, b ≤ D0·e^{2π/√j},
/// which is what the area floor, diameter ceiling and residual bound
/// jointly force. Vacuous unless all three of those hypotheses held.
pub fn check_uniform_bounds(
    m: &DoublyWarpedMetric,
    j: u32,
    a0: f64,
    d0: f64,
    preconditions_ok: bool,
) -> (Vec<CheckEntry>, f64, f64) {
    let jf = j as f64;
    let spread = (TWO_PI / jf.sqrt()).exp();
    let lower = a0 / (TWO_PI * TWO_PI * d0) / spread;
    let upper = d0 * spread;
    let mut entries = vec![
        CheckEntry::lower("warp-a-lower-envelope", m.a().min(), lower, 1e-8),
        CheckEntry::upper("warp-a-upper-envelope", m.a().max(), upper, 1e-8),
        CheckEntry::lower("warp-b-lower-envelope", m.b().min(), lower, 1e-8),
        CheckEntry::upper("warp-b-upper-envelope", m.b().max(), upper, 1e-8),
    ];
    if !preconditions_ok {
        entries = entries.into_iter().map(CheckEntry::vacuous).collect();
    }
    (entries, lower, upper)
}

/// Oscillation-vs-energy chain for a log-warp: the total variation of a
/// periodic function is at most √(2π) times its gradient L² norm, so
/// max α - min α ≤ √(2π)‖α'‖. Pure analysis, applicable at every j.
pub fn oscillation_entry(name: &str, log_warp: &Field1D) -> CheckEntry {
    let osc = log_warp.max() - log_warp.min();
    let grad = log_warp.derivative(1).expect("order 1 supported").norm_l2();
    let bound = TWO_PI.sqrt() * grad;
    CheckEntry::upper(name, osc, bound, fd_tol(log_warp.grid(), osc + bound))
}

/// Distance columns of one metric against the limit candidate.
#[derive(Debug, Clone, Copy)]
pub struct DistanceSample {
    /// Worst centered log-warp L² norm over the two warps.
    pub l2_centered_log: f64,
    /// ‖a - a∞‖ in W^{1,2}.
    pub w12_a: f64,
    /// ‖b - b∞‖ in W^{1,2}.
    pub w12_b: f64,
    /// Worst sup + Hölder-1/2 distance over the two warps.
    pub c0_holder: f64,
}

pub fn distance_sample(m: &DoublyWarpedMetric, limit: &LimitCandidate1D) -> DistanceSample {
    let alpha = m.log_a();
    let beta = m.log_b();
    let ca = alpha.map(|v| v - alpha.mean());
    let cb = beta.map(|v| v - beta.mean());
    let da = m.a().map(|v| v - limit.a_inf);
    let db = m.b().map(|v| v - limit.b_inf);
    DistanceSample {
        l2_centered_log: ca.norm_l2().max(cb.norm_l2()),
        w12_a: da.norm_w12(),
        w12_b: db.norm_w12(),
        c0_holder: (da.max_abs() + da.holder_half_seminorm())
            .max(db.max_abs() + db.holder_half_seminorm()),
    }
}

/// Sequence-level decay verdict on one distance column: the final value
/// must at least halve the initial one (or sit at roundoff zero). A
/// single-point schedule therefore never counts as decay evidence unless
/// the distance already vanishes.
pub fn decay_entry(name: &str, series: &[f64]) -> CheckEntry {
    let first = series.first().copied().unwrap_or(0.0);
    let last = series.last().copied().unwrap_or(0.0);
    CheckEntry::upper(name, last, 0.5 * first, 1e-12)
}

/// Configuration of a full doubly warped run.
#[derive(Debug, Clone)]
pub struct DoublyPipelineConfig {
    pub spec: SequenceSpec,
    pub bounds: HypothesisBounds,
    /// 1-D sampling resolution for the warps.
    pub grid_n: usize,
    /// Lattice resolution for diameter and uniform-distance columns.
    pub lattice_n: usize,
    /// Skip the lattice stage entirely (diameter columns become None and
    /// diameter-dependent checks go vacuous).
    pub with_lattice: bool,
    pub constants: AnalysisConstants,
}

/// Runs generation, per-j checks, convergence measurement and verdict.
pub fn run_pipeline(cfg: &DoublyPipelineConfig) -> Result<ConvergenceReport, PipelineError> {
    cfg.spec.validate()?;
    cfg.bounds.validate()?;
    cfg.constants.validate().map_err(PipelineError::Grid)?;
    if !cfg.spec.kind.is_doubly() {
        return Err(PipelineError::InvalidConfig(format!(
            "family {:?} is not doubly warped",
            cfg.spec.kind
        )));
    }
    let grid = PeriodicGrid1D::new(cfg.grid_n)?;

    let gens: Vec<GeneratedDoubly> = cfg
        .spec
        .j_schedule
        .iter()
        .map(|&j| make_doubly(&cfg.spec, j, grid))
        .collect::<Result<_, _>>()?;

    let limit = LimitCandidate1D::from_final(&gens.last().expect("nonempty schedule").metric);
    let flat = limit.flat_torus();

    let mut rows = Vec::with_capacity(gens.len());
    let mut samples = Vec::with_capacity(gens.len());
    let mut dunif_lat = Vec::new();
    for (&j, g) in cfg.spec.j_schedule.iter().zip(&gens) {
        let m = &g.metric;
        let hyp = cfg.bounds.at(j);
        let residual = m.log_residual(j);
        let mut checks = vec![CheckEntry::upper(
            "residual",
            residual.max_residual,
            residual.bound,
            residual.fd_tolerance,
        )];
        let residual_ok = checks[0].pass;

        let area_entries = check_min_area_bounds(m, hyp.a0);
        let areas_ok = area_entries[..3].iter().all(|e| e.pass);
        checks.extend(area_entries);

        let lattice: Option<LatticeReport> = if cfg.with_lattice {
            Some(lattice_report_doubly(m, &flat, cfg.lattice_n)?)
        } else {
            None
        };
        let diam_ok = match &lattice {
            Some(rep) => {
                let entries = check_diameter_minima(m, hyp.d0, &rep.diameter);
                let ok = entries[0].pass;
                checks.extend(entries);
                ok
            }
            None => {
                // Unverifiable without the lattice stage; recorded vacuous.
                checks.push(CheckEntry::upper("diameter-bound", 0.0, hyp.d0, 0.0).vacuous());
                false
            }
        };

        checks.extend(check_log_gradient(m, j, residual_ok));
        let (envelope, _, _) =
            check_uniform_bounds(m, j, hyp.a0, hyp.d0, residual_ok && areas_ok && diam_ok);
        checks.extend(envelope);
        checks.push(oscillation_entry("oscillation-a", &m.log_a()));
        checks.push(oscillation_entry("oscillation-b", &m.log_b()));

        let sample = distance_sample(m, &limit);
        samples.push(sample);
        if let Some(rep) = &lattice {
            dunif_lat.push(rep.uniform.vs_lattice_flat);
        }

        rows.push(ReportRow {
            j,
            r_min: m.scalar_curvature().min(),
            volume: volume_doubly(m),
            diameter: lattice.as_ref().map(|r| r.diameter.value),
            diameter_error: lattice.as_ref().map(|r| r.diameter.error_estimate),
            foliation_areas: foliation_areas_doubly(m),
            l2_centered_log: sample.l2_centered_log,
            w12_primary: sample.w12_a,
            w12_secondary: sample.w12_b,
            c0_primary: sample.c0_holder,
            d_unif: lattice.as_ref().map(|r| r.uniform.vs_closed_form),
            d_unif_lattice: lattice.as_ref().map(|r| r.uniform.vs_lattice_flat),
            checks,
        });
    }

    let js: Vec<f64> = cfg.spec.j_schedule.iter().map(|&j| j as f64).collect();
    let w12_a: Vec<f64> = samples.iter().map(|s| s.w12_a).collect();
    let w12_b: Vec<f64> = samples.iter().map(|s| s.w12_b).collect();
    let l2: Vec<f64> = samples.iter().map(|s| s.l2_centered_log).collect();
    let c0: Vec<f64> = samples.iter().map(|s| s.c0_holder).collect();

    let mut sequence_checks = vec![
        decay_entry("w12-warp-a-decay", &w12_a),
        decay_entry("w12-warp-b-decay", &w12_b),
        decay_entry("l2-centered-log-decay", &l2),
        decay_entry("c0-warp-decay", &c0),
        CheckEntry::lower("limit-warp-positive", limit.a_inf.min(limit.b_inf), 0.0, 0.0),
    ];
    if !dunif_lat.is_empty() {
        sequence_checks.push(decay_entry("uniform-distance-decay", &dunif_lat));
    }

    let mut rates = Vec::new();
    for (name, series) in [
        ("w12-warp-a", &w12_a),
        ("w12-warp-b", &w12_b),
        ("l2-centered-log", &l2),
        ("c0-warp", &c0),
    ] {
        if let Some(fit) = fit_power_law(name, &js, series) {
            rates.push(fit);
        }
    }

    let (verdict, verdict_reasons) = assess(&rows, &sequence_checks, &DOUBLY_HYPOTHESIS_CHECKS);

    Ok(ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        family: "doubly".into(),
        rows,
        sequence_checks,
        rates,
        limit: LimitSummary::Doubly { a_inf: limit.a_inf, b_inf: limit.b_inf },
        verdict,
        verdict_reasons,
    })
}

/// Shared verdict logic: hypothesis-layer failures dominate, then any
/// applicable conclusion or sequence check failure, then convergence.
pub(crate) fn assess(
    rows: &[ReportRow],
    sequence_checks: &[CheckEntry],
    hypothesis_names: &[&str],
) -> (Verdict, Vec<String>) {
    let mut hyp_failures = Vec::new();
    let mut concl_failures = Vec::new();
    for row in rows {
        for c in &row.checks {
            if c.failed() {
                let msg = format!("{} at j = {}", c.name, row.j);
                if hypothesis_names.contains(&c.name.as_str()) {
                    hyp_failures.push(msg);
                } else {
                    concl_failures.push(msg);
                }
            }
        }
    }
    for c in sequence_checks {
        if c.failed() {
            concl_failures.push(format!("{} over the schedule", c.name));
        }
    }
    if !hyp_failures.is_empty() {
        let mut reasons = vec!["hypothesis layer failed".to_string()];
        reasons.extend(hyp_failures);
        return (Verdict::HypothesisFailure, reasons);
    }
    if !concl_failures.is_empty() {
        let mut reasons = vec!["hypotheses hold but a controlled quantity escaped".to_string()];
        reasons.extend(concl_failures);
        return (Verdict::Inconclusive, reasons);
    }
    (
        Verdict::Converges,
        vec![
            "all hypothesis checks passed".into(),
            "all controlled quantities stayed inside their bounds".into(),
            "distance columns to the limit decay across the schedule".into(),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{AmplitudeLaw, FamilyKind};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(kind: FamilyKind, law: AmplitudeLaw, base: f64, schedule: Vec<u32>) -> SequenceSpec {
        SequenceSpec {
            kind,
            base_amplitude: base,
            amplitude_law: law,
            modes: vec![],
            j_schedule: schedule,
            seed: 11,
            well_depth: 0.9,
            well_radius: 0.1,
        }
    }

    fn quick_cfg(s: SequenceSpec) -> DoublyPipelineConfig {
        DoublyPipelineConfig {
            spec: s,
            bounds: HypothesisBounds::default(),
            grid_n: 64,
            lattice_n: 16,
            with_lattice: false,
            constants: AnalysisConstants::default(),
        }
    }

    #[test]
    fn bounds_validation() {
        assert!(HypothesisBounds::default().validate().is_ok());
        assert!(HypothesisBounds { a0: 0.0, d0: 6.0, v0: 50.0 }.validate().is_err());
        assert!(HypothesisBounds { a0: 30.0, d0: -1.0, v0: 50.0 }.validate().is_err());
        let h = HypothesisBounds::default().at(100);
        assert_eq!(h.j, 100);
        assert_eq!(h.a0, 30.0);
    }

    #[test]
    fn flat_metric_passes_area_checks_and_fails_tight_floor() {
        let m = DoublyWarpedMetric::flat(PeriodicGrid1D::new(64).unwrap());
        let ok = check_min_area_bounds(&m, 30.0);
        assert_eq!(ok.len(), 6);
        assert!(ok.iter().all(|e| e.pass && e.applicable));
        // 4π² ≈ 39.48 < 45: the given clause fails, derived go vacuous.
        let tight = check_min_area_bounds(&m, 45.0);
        assert!(tight[..3].iter().all(|e| e.failed()));
        assert!(tight[3..].iter().all(|e| !e.applicable));
    }

    #[test]
    fn log_gradient_entries_match_closed_forms() {
        let grid = PeriodicGrid1D::new(256).unwrap();
        let a = Field1D::from_fn(grid, |z| (0.01 * z.sin()).exp());
        let b = Field1D::from_fn(grid, |z| (0.01 * z.cos()).exp());
        let m = DoublyWarpedMetric::new(a, b).unwrap();
        let entries = check_log_gradient(&m, 100, true);
        // ∫(0.01 cos z)² dz = π · 1e-4.
        assert_relative_eq!(entries[0].measured, PI * 1e-4, epsilon = 1e-10);
        assert_relative_eq!(entries[1].measured, PI * 1e-4, epsilon = 1e-10);
        // ∫ α'β' = -1e-4 ∫ sin z cos z = 0.
        assert!(entries[2].measured.abs() < 1e-12);
        assert!(entries.iter().all(|e| e.pass), "j = 100 bound 2π/100 is loose here");
        // At j = 10^5 the bound 2π/j ≈ 6.3e-5 is tighter than π·1e-4.
        let tight = check_log_gradient(&m, 100_000, true);
        assert!(tight[0].failed() && tight[1].failed());
        // Failed residual gates the whole block.
        let gated = check_log_gradient(&m, 100, false);
        assert!(gated.iter().all(|e| !e.applicable));
    }

    #[test]
    fn envelope_and_oscillation_hold_on_mild_warps() {
        let grid = PeriodicGrid1D::new(128).unwrap();
        let a = Field1D::from_fn(grid, |z| (0.1 * z.sin()).exp());
        let m = DoublyWarpedMetric::new(a, Field1D::constant(grid, 1.0)).unwrap();
        let (entries, lower, upper) = check_uniform_bounds(&m, 100, 30.0, 6.0, true);
        assert!(lower > 0.0 && lower < 1.0 && upper > 6.0);
        assert!(entries.iter().all(|e| e.pass));
        let osc = oscillation_entry("oscillation-a", &m.log_a());
        // Oscillation 0.2 vs √(2π)·0.1·√π ≈ 0.443.
        assert_relative_eq!(osc.measured, 0.2, epsilon = 1e-9);
        assert!(osc.pass);
        let (gated, _, _) = check_uniform_bounds(&m, 100, 30.0, 6.0, false);
        assert!(gated.iter().all(|e| !e.applicable));
    }

    #[test]
    fn decay_entry_requires_halving_or_zero() {
        assert!(decay_entry("d", &[0.4, 0.1, 0.01]).pass);
        assert!(decay_entry("d", &[0.0, 0.0]).pass);
        assert!(decay_entry("d", &[0.4, 0.3]).failed());
        assert!(decay_entry("d", &[0.4]).failed(), "one point is no decay evidence");
        assert!(decay_entry("d", &[1e-13]).pass, "roundoff zero is fine");
    }

    #[test]
    fn pipeline_converges_for_inverse_sqrt_sin_family() {
        let cfg = quick_cfg(spec(
            FamilyKind::DoublySin,
            AmplitudeLaw::InverseSqrt,
            0.0034,
            vec![10, 100, 1000],
        ));
        let report = run_pipeline(&cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Converges);
        assert_eq!(report.family, "doubly");
        assert_eq!(report.rows.len(), 3);
        // Lattice stage skipped: no diameter columns, vacuous diameter check.
        assert!(report.rows[0].diameter.is_none());
        assert!(!report.check("diameter-bound").unwrap().applicable);
        assert!(report.check("residual").unwrap().pass);
        // W^{1,2} distances decay like j^{-1/2} for this family.
        let rate = report.rate("w12-warp-a").unwrap();
        assert_relative_eq!(rate.rate, 0.5, epsilon = 0.05);
        match report.limit {
            LimitSummary::Doubly { a_inf, b_inf } => {
                assert_relative_eq!(a_inf, 1.0, epsilon = 1e-4);
                assert_relative_eq!(b_inf, 1.0, epsilon = 1e-4);
            }
            _ => panic!("doubly limit expected"),
        }
    }

    #[test]
    fn pipeline_with_lattice_reports_diameter() {
        let mut cfg = quick_cfg(spec(
            FamilyKind::DoublySin,
            AmplitudeLaw::InverseSqrt,
            0.0034,
            vec![10],
        ));
        cfg.with_lattice = true;
        cfg.grid_n = 32;
        let report = run_pipeline(&cfg).unwrap();
        let row = &report.rows[0];
        let d = row.diameter.unwrap();
        assert!((d - PI * 3f64.sqrt()).abs() < 0.05, "near-flat diameter, got {d}");
        assert!(row.d_unif.unwrap() > 0.0, "closed-form column keeps the stencil bias");
        assert!(row.d_unif_lattice.unwrap() < 1e-2);
        assert!(report.check("diameter-bound").unwrap().pass);
        assert!(report.check("min-warp-a-vs-diameter").unwrap().pass);
    }

    #[test]
    fn tight_area_floor_is_a_hypothesis_failure() {
        let mut cfg = quick_cfg(spec(
            FamilyKind::DoublySin,
            AmplitudeLaw::InverseSqrt,
            0.0034,
            vec![10, 100],
        ));
        cfg.bounds.a0 = 45.0;
        let report = run_pipeline(&cfg).unwrap();
        assert_eq!(report.verdict, Verdict::HypothesisFailure);
        assert_eq!(report.verdict.exit_code(), 3);
        assert!(report.verdict_reasons.iter().any(|r| r.contains("area-")));
    }

    #[test]
    fn stalled_distances_are_inconclusive() {
        // Forced constant amplitude: compliant at small j, but the metric
        // never approaches its limit candidate, so decay checks fail.
        let cfg = quick_cfg(spec(
            FamilyKind::DoublySin,
            AmplitudeLaw::Forced,
            0.01,
            vec![10, 20],
        ));
        let report = run_pipeline(&cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
        assert!(report
            .verdict_reasons
            .iter()
            .any(|r| r.contains("decay")), "reasons: {:?}", report.verdict_reasons);
    }

    #[test]
    fn wrong_family_is_rejected_up_front() {
        let cfg = quick_cfg(spec(
            FamilyKind::SinglySin,
            AmplitudeLaw::Bisect,
            0.01,
            vec![10],
        ));
        assert!(matches!(run_pipeline(&cfg), Err(PipelineError::InvalidConfig(_))));
    }

    #[test]
    fn flat_sequence_converges_with_zero_distances() {
        let cfg = quick_cfg(spec(FamilyKind::DoublySin, AmplitudeLaw::Bisect, 0.0, vec![10, 100]));
        let report = run_pipeline(&cfg).unwrap();
        assert_eq!(report.verdict, Verdict::Converges);
        assert_eq!(report.rows[0].w12_primary, 0.0);
        assert!(report.rates.is_empty(), "zero distances admit no power-law fit");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        // Soundness of the implication on random compliant inputs: when a
        // bisected multimode family satisfies the residual hypothesis by
        // construction, every gradient, envelope and oscillation check
        // must pass.
        #[test]
        fn compliant_metrics_pass_all_conclusions(seed in 0u64..1000, j in 10u32..5000) {
            let mut s = spec(FamilyKind::DoublyMultimode, AmplitudeLaw::Bisect, 0.15, vec![j]);
            s.seed = seed;
            let grid = PeriodicGrid1D::new(64).unwrap();
            let g = make_doubly(&s, j, grid).unwrap();
            let residual = g.metric.log_residual(j);
            prop_assert!(residual.pass);
            for e in check_log_gradient(&g.metric, j, true) {
                prop_assert!(e.pass, "{} failed: {} vs {}", e.name, e.measured, e.bound);
            }
            let (env, _, _) = check_uniform_bounds(&g.metric, j, 30.0, 6.0, true);
            for e in env {
                prop_assert!(e.pass, "{} failed", e.name);
            }
            prop_assert!(oscillation_entry("osc-a", &g.metric.log_a()).pass);
            prop_assert!(oscillation_entry("osc-b", &g.metric.log_b()).pass);
        }
    }
}
