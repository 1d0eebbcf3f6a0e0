//! Trend and ordering checks over sweep and lift reports.

use std::collections::BTreeMap;

use tacmm::strategies::Strategy;

use crate::config::SweepMode;
use crate::lift::LiftSuiteReport;
use crate::sweep::SweepReport;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Average ranks, 1-based; ties share the mean of their positions.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson over average ranks). NaN when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// MAEs pooled over `±angle`, keyed by `|angle|` in millidegrees.
fn pooled_by_magnitude(report: &SweepReport, mode: &str, strategy: &str) -> BTreeMap<i64, (f64, f64, usize)> {
    let mut acc: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
    for r in report.rows.iter().filter(|r| r.mode == mode && r.strategy == strategy) {
        let e = acc.entry((r.initial_angle_deg.abs() * 1000.0).round() as i64).or_default();
        e.0 += r.final_angle_err_deg;
        e.1 += r.distance_err_mm;
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(k, (a, d, n))| (k, (a / n as f64, d / n as f64, n)))
        .collect()
}

/// Bumper-mode trend for one strategy: angle and distance MAE rise with
/// `|initial angle|` (Spearman >= `min_rho`) and stay within the ceilings at
/// the largest magnitude on both sides.
pub fn sweep_trend_checks(
    report: &SweepReport,
    strategy: Strategy,
    min_rho: f64,
    max_angle_mae: f64,
    max_distance_mae: f64,
) -> Vec<Check> {
    let mode = SweepMode::Bumper.as_str();
    let pooled = pooled_by_magnitude(report, mode, strategy.as_str());
    let s = strategy.as_str();
    if pooled.len() < 2 {
        return vec![Check::new(format!("{s} trend"), false, "fewer than two angle magnitudes")];
    }
    let levels: Vec<f64> = pooled.keys().map(|&k| k as f64 / 1000.0).collect();
    let angle: Vec<f64> = pooled.values().map(|v| v.0).collect();
    let dist: Vec<f64> = pooled.values().map(|v| v.1).collect();
    let (rho_a, rho_d) = (spearman(&levels, &angle), spearman(&levels, &dist));
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    let mut checks = vec![
        Check::new(
            format!("{s} angle MAE trend"),
            rho_a >= min_rho,
            format!("spearman {rho_a:.3} over |angle| {levels:?}: {}", fmt(&angle)),
        ),
        Check::new(
            format!("{s} distance MAE trend"),
            rho_d >= min_rho,
            format!("spearman {rho_d:.3}: {}", fmt(&dist)),
        ),
    ];
    let extreme = levels.last().copied().unwrap_or(0.0);
    for sign in [-1.0, 1.0] {
        let a = sign * extreme;
        let cell = report
            .series(mode, s)
            .into_iter()
            .find(|c| (c.initial_angle_deg - a).abs() < 1e-9);
        let (ok, detail) = match cell {
            Some(c) => (
                c.mae_angle_deg <= max_angle_mae && c.mae_distance_mm <= max_distance_mae,
                format!("{:.3} deg, {:.3} mm", c.mae_angle_deg, c.mae_distance_mm),
            ),
            None => (false, "missing".to_string()),
        };
        checks.push(Check::new(format!("{s} ceiling at {a:+}"), ok, detail));
    }
    checks
}

/// Regressor mode: multi-contact angle MAE below each single-contact
/// strategy's at every initial angle with magnitude >= `min_angle`.
pub fn strategy_ordering_checks(report: &SweepReport, min_angle: f64) -> Vec<Check> {
    let mode = SweepMode::Regressor.as_str();
    let multi = report.series(mode, Strategy::MultiContact.as_str());
    let mut checks = Vec::new();
    for single in Strategy::ALL.into_iter().filter(|s| s.is_single_contact()) {
        let cells = report.series(mode, single.as_str());
        for m in multi.iter().filter(|c| c.initial_angle_deg.abs() >= min_angle - 1e-9) {
            let other = cells.iter().find(|c| c.initial_angle_deg == m.initial_angle_deg);
            let (ok, detail) = match other {
                Some(o) => (
                    m.mae_angle_deg < o.mae_angle_deg,
                    format!("{:.3} < {:.3}", m.mae_angle_deg, o.mae_angle_deg),
                ),
                None => (false, "missing".to_string()),
            };
            checks.push(Check::new(
                format!("multi vs {} at {:+}", single.as_str(), m.initial_angle_deg),
                ok,
                detail,
            ));
        }
    }
    if checks.is_empty() {
        checks.push(Check::new("strategy ordering", false, "no regressor cells"));
    }
    checks
}

/// Tactile >= vision per scenario, aggregate gap >= `min_gap`, and the
/// largest gap on `hardest`.
pub fn lift_checks(report: &LiftSuiteReport, min_gap: f64, hardest: &str) -> Vec<Check> {
    let rates = report.rates();
    let mut checks: Vec<Check> = rates
        .iter()
        .map(|r| match (r.tactile, r.vision) {
            (Some(t), Some(v)) => Check::new(format!("{} tactile >= vision", r.scenario), t >= v, format!("{t:.2} vs {v:.2}")),
            _ => Check::new(format!("{} tactile >= vision", r.scenario), false, "missing mode"),
        })
        .collect();
    match report.aggregate() {
        (Some(t), Some(v)) => checks.push(Check::new(
            "aggregate gap",
            t - v >= min_gap,
            format!("{t:.3} - {v:.3} = {:.3}", t - v),
        )),
        _ => checks.push(Check::new("aggregate gap", false, "missing mode")),
    }
    let gap_of = |name: &str| rates.iter().find(|r| r.scenario == name).and_then(|r| r.gap());
    let best = rates.iter().filter_map(|r| r.gap()).fold(f64::NEG_INFINITY, f64::max);
    checks.push(match gap_of(hardest) {
        Some(g) => Check::new(
            format!("largest gap on {hardest}"),
            g >= best,
            format!("{g:.2} vs max {best:.2}"),
        ),
        None => Check::new(format!("largest gap on {hardest}"), false, "scenario missing"),
    });
    checks
}
