//! Thresholds, scenario rankings, region classification and parameter
//! sweeps.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::loss::{apply_loss, LossSetting, Roles, Scenario, ScenarioId};
use crate::measures::closed_form::{checked_formula, Context};
use crate::measures::{build_report, CorrelationReport, MeasureId, MeasureKind, Target};
use crate::measures::{gaussian_steering_detail, log_negativity_detail};
use crate::symplectic::{CovarianceMatrix, ModePartition};
use crate::tritter::{check_lambda, ideal_output_cm, Mode};

/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-12;

/// Default search interval for thresholds. The lower end stays off `T = 0`,
/// where every measure vanishes trivially.
pub const DEFAULT_BRACKET: (f64, f64) = (1e-3, 1.0);

const SCAN_STEPS: usize = 400;

/// Values closer than this rank as equal.
const RANK_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionLabel {
    /// Steering and entanglement both present.
    I,
    /// No steering; `E^{k|ij}` present together with pairwise entanglement
    /// of `k`.
    II,
    /// Only the collective `E^{k|ij}` is left.
    III,
    Separable,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionLabel::I => "I",
            RegionLabel::II => "II",
            RegionLabel::III => "III",
            RegionLabel::Separable => "separable",
        })
    }
}

fn part(a: &[Mode], b: &[Mode]) -> Result<ModePartition> {
    ModePartition::new(
        3,
        a.iter().map(|m| m.index()).collect(),
        b.iter().map(|m| m.index()).collect(),
    )
}

/// Region of a three-mode state with respect to the single mode `roles.k()`.
pub fn classify_cm(v: &CovarianceMatrix, roles: &Roles) -> Result<RegionLabel> {
    let k = roles.k();
    let [i, j] = k.others();
    let split = log_negativity_detail(v, &part(&[k], &[i, j])?)?.value;
    if split <= 0.0 {
        return Ok(RegionLabel::Separable);
    }
    let steer = gaussian_steering_detail(v, &part(&[k], &[i, j])?)?.value
        + gaussian_steering_detail(v, &part(&[i, j], &[k])?)?.value;
    if steer > 0.0 {
        return Ok(RegionLabel::I);
    }
    let pairwise =
        log_negativity_detail(v, &part(&[k], &[i])?)?.value + log_negativity_detail(v, &part(&[k], &[j])?)?.value;
    Ok(if pairwise > 0.0 {
        RegionLabel::II
    } else {
        RegionLabel::III
    })
}

pub fn classify_region(lambda: f64, scenario: &Scenario) -> Result<RegionLabel> {
    let v = apply_loss(&ideal_output_cm(lambda)?, &LossSetting::Scenario(*scenario).config())?;
    classify_cm(&v, &scenario.roles)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdResult {
    /// Present above this transmissivity, absent below.
    At(f64),
    /// Present over the whole bracket.
    AlwaysPresent,
    /// Absent over the whole bracket.
    NeverPresent,
}

impl ThresholdResult {
    /// Transmissivity at which the measure vanishes as `T` decreases: 0 when
    /// it never does, 1 when it is never present.
    pub fn vanishing_t(&self) -> f64 {
        match self {
            ThresholdResult::At(t) => *t,
            ThresholdResult::AlwaysPresent => 0.0,
            ThresholdResult::NeverPresent => 1.0,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            ThresholdResult::At(t) => Some(*t),
            _ => None,
        }
    }
}

impl fmt::Display for ThresholdResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdResult::At(t) => write!(f, "{t}"),
            ThresholdResult::AlwaysPresent => f.write_str("always"),
            ThresholdResult::NeverPresent => f.write_str("never"),
        }
    }
}

/// Signed presence of `measure` at transmissivity `t`: positive iff the
/// measure is nonzero. Uses the unclamped closed form when a trusted one
/// exists and the numeric eigenvalue margin otherwise.
fn presence(measure: &MeasureId, ideal: &CovarianceMatrix, lambda: f64, scenario: &Scenario, t: f64) -> Result<f64> {
    let s = scenario.at(t)?;
    let ctx = measure.context.unwrap_or(Context::Scenario(s.id));
    let setting = match ctx {
        Context::Ideal => LossSetting::Ideal,
        Context::Scenario(id) => LossSetting::Scenario(Scenario::new(id, t, s.roles)?),
    };
    if let Some(f) = measure.formula(&s.roles, ctx) {
        if let Some(v) = checked_formula(f, lambda, t).transpose()? {
            if v.domain_ok {
                return Ok(v.value);
            }
        }
    }
    let v = apply_loss(ideal, &setting.config())?;
    Ok(measure.evaluate(&v, &s.roles)?.margin())
}

/// Transmissivity below which `measure` vanishes in `scenario` (its own
/// transmissivity is ignored). Scans down from the top of the bracket and
/// bisects the first change from present to absent.
pub fn find_threshold(
    measure: &MeasureId,
    lambda: f64,
    scenario: &Scenario,
    bracket: (f64, f64),
) -> Result<ThresholdResult> {
    let (lo, hi) = bracket;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::Domain(format!("bad transmissivity bracket ({lo}, {hi})")));
    }
    let ideal = ideal_output_cm(lambda)?;
    let f = |t: f64| presence(measure, &ideal, lambda, scenario, t);

    let top = f(hi)? > 0.0;
    let mut prev = hi;
    let mut seen_present = top;
    for n in 1..=SCAN_STEPS {
        let t = hi - (hi - lo) * n as f64 / SCAN_STEPS as f64;
        let present = f(t)? > 0.0;
        if seen_present && !present {
            let (mut a, mut b) = (t, prev);
            while b - a > BISECTION_TOL {
                let mid = 0.5 * (a + b);
                if f(mid)? > 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(ThresholdResult::At(0.5 * (a + b)));
        }
        seen_present |= present;
        prev = t;
    }
    Ok(if seen_present {
        ThresholdResult::AlwaysPresent
    } else {
        ThresholdResult::NeverPresent
    })
}

/// Threshold quoted for a scenario and steering direction. `None` means the
/// steering is quoted to persist for every `T > 0` (or, for Scenario 3
/// `k→ij`, to carry no condition).
pub fn stated_threshold(scenario: ScenarioId, target: &Target) -> Option<f64> {
    let into_k = match target {
        Target::PairToSingle => true,
        Target::SingleToPair => false,
        _ => return None,
    };
    match (scenario.get(), into_k) {
        (1, _) => Some(0.5),
        (2, _) => None,
        (3, true) => Some(0.5),
        (3, false) => None,
        (4, true) => Some(2.0 / 3.0),
        (4, false) => Some(0.5),
        (_, true) => Some(0.75),
        (_, false) => Some(0.6),
    }
}

/// Scenarios ordered from strongest to weakest: by `E^{k|ij}` for
/// entanglement, by `S^{k→ij} + S^{ij→k}` for steering.
pub fn scenario_ranking(lambda: f64, t: f64, kind: MeasureKind, roles: Roles) -> Result<Vec<ScenarioId>> {
    let ideal = ideal_output_cm(lambda)?;
    let ids = match kind {
        MeasureKind::Entanglement => vec![MeasureId::entanglement(Target::OneVsTwo)],
        MeasureKind::Steering => vec![
            MeasureId::steering(Target::SingleToPair),
            MeasureId::steering(Target::PairToSingle),
        ],
    };
    let mut scored = Vec::with_capacity(5);
    for id in ScenarioId::ALL {
        let v = apply_loss(&ideal, &LossSetting::Scenario(Scenario::new(id, t, roles)?).config())?;
        let mut total = 0.0;
        for m in &ids {
            total += m.evaluate(&v, &roles)?.value;
        }
        scored.push(((total / RANK_TIE).round() as i64, id));
    }
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().map(|(_, id)| id).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Transmissivity,
    Lambda,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::Transmissivity => "T",
            SweepVariable::Lambda => "lambda",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// λ for a T sweep, T for a λ sweep.
    pub fixed: f64,
    /// `None` sweeps the lossless state.
    pub scenario: Option<ScenarioId>,
    pub roles: Roles,
    pub measures: Vec<MeasureId>,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::Domain(format!("sweep step must be positive, got {}", self.step)));
        }
        if self.start.is_nan() || self.stop.is_nan() || self.start > self.stop {
            return Err(Error::Domain(format!(
                "sweep start {} exceeds stop {}",
                self.start, self.stop
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n)
            .map(|i| (self.start + i as f64 * self.step).min(self.stop))
            .collect())
    }

    fn point(&self, x: f64) -> (f64, f64) {
        match self.variable {
            SweepVariable::Transmissivity => (self.fixed, x),
            SweepVariable::Lambda => (x, self.fixed),
        }
    }

    fn validate(&self, grid: &[f64]) -> Result<()> {
        if self.variable == SweepVariable::Transmissivity && self.scenario.is_none() {
            return Err(Error::Domain("a transmissivity sweep needs a scenario".into()));
        }
        for &x in grid {
            let (l, t) = self.point(x);
            check_lambda(l)?;
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Domain(format!("transmissivity must lie in [0, 1], got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub t: f64,
    pub report: CorrelationReport,
}

impl SweepRow {
    pub fn mismatch(&self) -> bool {
        self.report.any_mismatch()
    }
}

/// Evaluates every grid point, in parallel, returning rows in grid order.
/// An empty measure list gives an empty table.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let grid = spec.grid()?;
    spec.validate(&grid)?;
    if spec.measures.is_empty() {
        return Ok(Vec::new());
    }
    grid.par_iter()
        .map(|&x| {
            let (lambda, t) = spec.point(x);
            let setting = match spec.scenario {
                Some(id) => LossSetting::Scenario(Scenario::new(id, t, spec.roles)?),
                None => LossSetting::Ideal,
            };
            let report = build_report(&ideal_output_cm(lambda)?, lambda, &setting, spec.roles, &spec.measures)?;
            Ok(SweepRow { lambda, t, report })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub scenario: ScenarioId,
    pub lambda: f64,
    pub measure: MeasureId,
    pub found: ThresholdResult,
    pub stated: Option<f64>,
}

/// Both collective steering directions and `E^{k|ij}` for every
/// `(scenario, λ)` pair, in input order.
pub fn threshold_table(lambdas: &[f64], scenarios: &[ScenarioId], roles: Roles) -> Result<Vec<ThresholdRow>> {
    let measures = [
        MeasureId::entanglement(Target::OneVsTwo),
        MeasureId::steering(Target::PairToSingle),
        MeasureId::steering(Target::SingleToPair),
    ];
    let mut jobs = Vec::new();
    for &s in scenarios {
        for &l in lambdas {
            for m in &measures {
                jobs.push((s, l, m.clone()));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(s, lambda, measure)| {
            let sc = Scenario::new(s, 1.0, roles)?;
            let found = find_threshold(&measure, lambda, &sc, DEFAULT_BRACKET)?;
            let stated = match measure.kind {
                MeasureKind::Steering => stated_threshold(s, &measure.target),
                MeasureKind::Entanglement => None,
            };
            Ok(ThresholdRow {
                scenario: s,
                lambda,
                measure,
                found,
                stated,
            })
        })
        .collect()
}
