//! Report plumbing shared by both verification pipelines: inequality
//! check entries with explicit margins, power-law rate fits, verdicts
//! with their process exit codes, and the serializable run report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Outcome of a pipeline run. Serialized names are stable and map to
/// process exit codes 0 / 2 / 3 (1 is reserved for execution errors).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "CONVERGES")]
    Converges,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
    #[serde(rename = "HYPOTHESIS-FAILURE")]
    HypothesisFailure,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Converges => 0,
            Verdict::Inconclusive => 2,
            Verdict::HypothesisFailure => 3,
        }
    }

    /// Severity order for sweep aggregation: failure > inconclusive > converges.
    pub fn worst(self, other: Verdict) -> Verdict {
        let rank = |v: Verdict| match v {
            Verdict::Converges => 0,
            Verdict::Inconclusive => 1,
            Verdict::HypothesisFailure => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Converges => "CONVERGES",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::HypothesisFailure => "HYPOTHESIS-FAILURE",
        }
    }
}

/// One verified inequality: the measured value, the bound it is tested
/// against, the discretization tolerance granted, and the signed margin
/// (how far inside the bound the measurement lies, before tolerance).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    /// False when a precondition failed and the check is vacuous.
    pub applicable: bool,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub tolerance: f64,
}

impl CheckEntry {
    /// measured ≤ bound (+ tolerance).
    pub fn upper(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            applicable: true,
            pass: measured <= bound + tolerance,
            measured,
            bound,
            margin: bound - measured,
            tolerance,
        }
    }

    /// measured ≥ bound (− tolerance).
    pub fn lower(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            applicable: true,
            pass: measured >= bound - tolerance,
            measured,
            bound,
            margin: measured - bound,
            tolerance,
        }
    }

    /// A check whose precondition failed; recorded but vacuous.
    pub fn vacuous(mut self) -> Self {
        self.applicable = false;
        self.pass = true;
        self
    }

    /// True only for applicable failures.
    pub fn failed(&self) -> bool {
        self.applicable && !self.pass
    }
}

/// Fitted decay exponent: y ≈ c · x^(-rate), least squares in log-log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateFit {
    pub name: String,
    /// Positive for decaying data.
    pub rate: f64,
    /// ln c of the fit.
    pub log_intercept: f64,
    /// Number of (x, y) pairs used (positive, finite entries only).
    pub points: usize,
}

/// Least-squares power-law fit on the pairs with x > 0 and y > 0.
/// Returns `None` when fewer than two usable pairs remain (e.g. a
/// constant sequence with exactly zero distances).
pub fn fit_power_law(name: &str, xs: &[f64], ys: &[f64]) -> Option<RateFit> {
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 1e-300 && x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(RateFit {
        name: name.to_string(),
        rate: -slope,
        log_intercept: my - slope * mx,
        points: pairs.len(),
    })
}

/// Limit candidate recorded in the report footer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum LimitSummary {
    #[serde(rename = "doubly")]
    Doubly { a_inf: f64, b_inf: f64 },
    #[serde(rename = "singly")]
    Singly { f_inf: f64, h_inf: f64 },
}

/// One row per j: scalar hypothesis quantities, the per-j inequality
/// checks, and the measured distances to the limit candidate.
///
/// Distance column semantics per family:
/// doubly: w12_primary = ‖a - a∞‖ in W^{1,2}, w12_secondary = same for b,
/// c0_primary = worst of sup|a - a∞| + Hölder-1/2 seminorm over both warps,
/// l2_centered_log = worst of ‖α - ᾱ‖, ‖β - β̄‖ in L².
/// singly: w12_primary = ‖f - f∞‖, w12_secondary = ‖h - h∞‖,
/// c0_primary = sup|f - f∞|, l2_centered_log = ‖h - h̄‖.
///
/// `d_unif` compares lattice distances of g_j with the closed-form
/// distances of the flat limit (carries the stencil metrication bias);
/// `d_unif_lattice` compares against lattice distances of the flat limit
/// computed with the same stencil (bias cancels). Lattice-dependent
/// columns are `None` when the lattice stage is skipped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub j: u32,
    pub r_min: f64,
    pub volume: f64,
    pub diameter: Option<f64>,
    pub diameter_error: Option<f64>,
    pub foliation_areas: [f64; 3],
    pub l2_centered_log: f64,
    pub w12_primary: f64,
    pub w12_secondary: f64,
    pub c0_primary: f64,
    pub d_unif: Option<f64>,
    pub d_unif_lattice: Option<f64>,
    pub checks: Vec<CheckEntry>,
}

/// Full result of a pipeline run over a j-schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    /// "doubly" or "singly".
    pub family: String,
    pub rows: Vec<ReportRow>,
    /// Sequence-level checks (decay of distance columns, verdict conditions).
    pub sequence_checks: Vec<CheckEntry>,
    pub rates: Vec<RateFit>,
    pub limit: LimitSummary,
    pub verdict: Verdict,
    pub verdict_reasons: Vec<String>,
}

pub const SCHEMA_VERSION: u32 = 1;

impl ConvergenceReport {
    /// All checks, per-row then sequence-level.
    pub fn all_checks(&self) -> impl Iterator<Item = &CheckEntry> {
        self.rows.iter().flat_map(|r| r.checks.iter()).chain(self.sequence_checks.iter())
    }

    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.all_checks().find(|c| c.name == name)
    }

    pub fn rate(&self, name: &str) -> Option<&RateFit> {
        self.rates.iter().find(|r| r.name == name)
    }
}

/// Errors that abort a pipeline run (as opposed to failed checks, which
/// are regular report entries).
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Generate(#[from] crate::generate::GenerateError),
    #[error(transparent)]
    Functional(#[from] crate::functional::FunctionalError),
    #[error(transparent)]
    Metric(#[from] crate::metric::MetricError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn verdict_exit_codes_and_order() {
        assert_eq!(Verdict::Converges.exit_code(), 0);
        assert_eq!(Verdict::Inconclusive.exit_code(), 2);
        assert_eq!(Verdict::HypothesisFailure.exit_code(), 3);
        assert_eq!(Verdict::Converges.worst(Verdict::Inconclusive), Verdict::Inconclusive);
        assert_eq!(
            Verdict::HypothesisFailure.worst(Verdict::Converges),
            Verdict::HypothesisFailure
        );
        assert_eq!(Verdict::Inconclusive.worst(Verdict::Inconclusive), Verdict::Inconclusive);
    }

    #[test]
    fn verdict_serializes_to_stable_names() {
        assert_eq!(serde_json::to_string(&Verdict::Converges).unwrap(), "\"CONVERGES\"");
        assert_eq!(
            serde_json::to_string(&Verdict::HypothesisFailure).unwrap(),
            "\"HYPOTHESIS-FAILURE\""
        );
        let v: Verdict = serde_json::from_str("\"INCONCLUSIVE\"").unwrap();
        assert_eq!(v, Verdict::Inconclusive);
    }

    #[test]
    fn check_entries_carry_margins() {
        let up = CheckEntry::upper("residual", 0.3, 0.5, 1e-8);
        assert!(up.pass);
        assert_relative_eq!(up.margin, 0.2);
        let up_fail = CheckEntry::upper("residual", 0.6, 0.5, 1e-8);
        assert!(up_fail.failed());
        assert_relative_eq!(up_fail.margin, -0.1, epsilon = 1e-15);

        let lo = CheckEntry::lower("area", 40.0, 30.0, 0.0);
        assert!(lo.pass && lo.margin == 10.0);
        // Tolerance rescues a borderline measurement.
        let edge = CheckEntry::upper("edge", 0.5 + 5e-9, 0.5, 1e-8);
        assert!(edge.pass && edge.margin < 0.0);

        let vac = CheckEntry::upper("skipped", 9.0, 1.0, 0.0).vacuous();
        assert!(!vac.applicable && vac.pass && !vac.failed());
    }

    #[test]
    fn power_law_fit_recovers_exact_exponents() {
        let xs: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.5)).collect();
        let fit = fit_power_law("w12", &xs, &ys).unwrap();
        assert_relative_eq!(fit.rate, 0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.log_intercept, 3.0f64.ln(), epsilon = 1e-10);
        assert_eq!(fit.points, 4);

        let grow: Vec<f64> = xs.iter().map(|x| 0.1 * x).collect();
        let fit2 = fit_power_law("grow", &xs, &grow).unwrap();
        assert_relative_eq!(fit2.rate, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn power_law_fit_skips_degenerate_data() {
        // Exact zeros are dropped; fewer than two survivors → None.
        assert!(fit_power_law("zeros", &[10.0, 100.0], &[0.0, 0.0]).is_none());
        assert!(fit_power_law("one", &[10.0, 100.0], &[0.5, 0.0]).is_none());
        // Identical x values give no slope information.
        assert!(fit_power_law("flat-x", &[10.0, 10.0], &[0.5, 0.25]).is_none());
        // Mixed: zeros dropped, remaining pairs fitted.
        let fit =
            fit_power_law("mixed", &[10.0, 100.0, 1000.0], &[0.1, 0.0, 0.001]).unwrap();
        assert_eq!(fit.points, 2);
        assert_relative_eq!(fit.rate, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn report_lookup_helpers() {
        let report = ConvergenceReport {
            schema_version: SCHEMA_VERSION,
            family: "doubly".into(),
            rows: vec![ReportRow {
                j: 10,
                r_min: -0.05,
                volume: 248.0,
                diameter: Some(5.44),
                diameter_error: Some(0.001),
                foliation_areas: [39.4, 39.4, 39.4],
                l2_centered_log: 0.01,
                w12_primary: 0.02,
                w12_secondary: 0.02,
                c0_primary: 0.03,
                d_unif: Some(0.16),
                d_unif_lattice: Some(0.001),
                checks: vec![CheckEntry::upper("residual", 0.01, 0.05, 0.0)],
            }],
            sequence_checks: vec![CheckEntry::upper("w12-a-decay", 0.0, 0.1, 0.0)],
            rates: vec![RateFit {
                name: "w12_a".into(),
                rate: 0.5,
                log_intercept: 0.0,
                points: 4,
            }],
            limit: LimitSummary::Doubly { a_inf: 1.0, b_inf: 1.0 },
            verdict: Verdict::Converges,
            verdict_reasons: vec![],
        };
        assert!(report.check("residual").unwrap().pass);
        assert!(report.check("w12-a-decay").is_some());
        assert!(report.check("missing").is_none());
        assert_relative_eq!(report.rate("w12_a").unwrap().rate, 0.5);
        // Round-trips through JSON with the tagged limit.
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"family\":\"doubly\""));
        let back: ConvergenceReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.rows.len(), 1);
        assert_eq!(back.verdict, Verdict::Converges);
    }
}
