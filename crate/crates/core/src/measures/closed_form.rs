//! Closed-form expressions for entanglement and steering of the tritter
//! state, ideal and under each loss scenario.
//!
//! [`reference_formula`] evaluates each expression exactly as transcribed,
//! returning the logarithm before the `max[0, ·]` clamp. A few transcribed
//! expressions disagree with the covariance-matrix pipeline; those are listed
//! by [`erratum`], and [`checked_formula`] substitutes a corrected form when
//! one is known.

use std::fmt;

use crate::error::{Error, Result};
use crate::loss::ScenarioId;
use crate::tritter::check_lambda;

/// How many modes of an `i|j` pair see the shared transmissivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairLoss {
    None,
    One,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Context {
    Ideal,
    Scenario(ScenarioId),
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Context::Ideal => write!(f, "ideal"),
            Context::Scenario(s) => write!(f, "s{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `E^{i|j}` between two single modes.
    PairEntanglement(PairLoss),
    /// `E^{k|ij}`.
    SplitEntanglement(Context),
    /// `S^{k→ij}`.
    SteeringFromSingle(Context),
    /// `S^{ij→k}`.
    SteeringFromPair(Context),
    /// `S^{i→j}`, from the pairwise conditional eigenvalue.
    PairSteering { steering_lossy: bool, steered_lossy: bool },
}

impl Formula {
    /// Every expression with a closed form.
    pub fn catalogue() -> Vec<Formula> {
        let mut out = vec![
            Formula::PairEntanglement(PairLoss::None),
            Formula::PairEntanglement(PairLoss::One),
            Formula::PairEntanglement(PairLoss::Both),
        ];
        let ctx = std::iter::once(Context::Ideal).chain(ScenarioId::ALL.iter().map(|&s| Context::Scenario(s)));
        for c in ctx {
            out.push(Formula::SplitEntanglement(c));
            out.push(Formula::SteeringFromSingle(c));
            out.push(Formula::SteeringFromPair(c));
        }
        for steering_lossy in [false, true] {
            for steered_lossy in [false, true] {
                out.push(Formula::PairSteering {
                    steering_lossy,
                    steered_lossy,
                });
            }
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |c: &Context| match c {
            Context::Ideal => String::new(),
            Context::Scenario(s) => format!("_{s}"),
        };
        match self {
            Formula::PairEntanglement(PairLoss::None) => write!(f, "E^{{i|j}}"),
            Formula::PairEntanglement(PairLoss::One) => write!(f, "E_1^{{i|j}}"),
            Formula::PairEntanglement(PairLoss::Both) => write!(f, "E_2^{{i|j}}"),
            Formula::SplitEntanglement(c) => write!(f, "E{}^{{k|ij}}", sub(c)),
            Formula::SteeringFromSingle(c) => write!(f, "S{}^{{k->ij}}", sub(c)),
            Formula::SteeringFromPair(c) => write!(f, "S{}^{{ij->k}}", sub(c)),
            Formula::PairSteering {
                steering_lossy,
                steered_lossy,
            } => write!(
                f,
                "S^{{i->j}}(T_i={}, T_j={})",
                if *steering_lossy { "T" } else { "1" },
                if *steered_lossy { "T" } else { "1" }
            ),
        }
    }
}

/// A closed-form value before clamping. `domain_ok` is false when a square
/// root or logarithm argument went negative; `value` is then NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormulaValue {
    pub value: f64,
    pub domain_ok: bool,
}

impl FormulaValue {
    pub fn clamped(&self) -> f64 {
        if self.domain_ok {
            self.value.max(0.0)
        } else {
            f64::NAN
        }
    }
}

/// Tracks whether any intermediate left the real domain.
#[derive(Default)]
struct Eval {
    bad: bool,
}

impl Eval {
    fn sqrt(&mut self, x: f64) -> f64 {
        if x < 0.0 {
            self.bad = true;
            f64::NAN
        } else {
            x.sqrt()
        }
    }

    fn ln_ratio(&mut self, num: f64, den: f64) -> f64 {
        if !(num > 0.0 && den > 0.0) {
            self.bad = true;
            return f64::NAN;
        }
        (num / den).ln()
    }

    fn finish(self, value: f64) -> FormulaValue {
        if self.bad || !value.is_finite() {
            FormulaValue {
                value: f64::NAN,
                domain_ok: false,
            }
        } else {
            FormulaValue { value, domain_ok: true }
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("transmissivity must lie in [0, 1], got {t}")));
    }
    Ok(())
}

/// Evaluates `formula` as transcribed. `t` is ignored for ideal expressions.
pub fn reference_formula(formula: Formula, lambda: f64, t: f64) -> Result<FormulaValue> {
    check_lambda(lambda)?;
    check_t(t)?;
    let l = lambda;
    let l2 = l * l;
    let l4 = l2 * l2;
    let mut ev = Eval::default();

    let value = match formula {
        Formula::PairEntanglement(PairLoss::None) => ev.ln_ratio(3.0 * (1.0 + l), 3.0 - l),
        Formula::PairEntanglement(PairLoss::One) => {
            let d1 = 5.0 - 16.0 * t + 8.0 * t * t;
            let d2 = (1.0 - t).powi(2) * (1.0 - 8.0 * t + 4.0 * t * t);
            let root = ev.sqrt(d2 * l2 + 9.0 * t);
            ev.ln_ratio(9.0 * (1.0 - l2), 9.0 - d1 * l2 - 4.0 * l * root)
        }
        Formula::PairEntanglement(PairLoss::Both) => ev.ln_ratio(
            3.0 * (1.0 - l2),
            (3.0 - 3.0 * l + 2.0 * t * l) * (1.0 + l + 2.0 * t * l),
        ),
        Formula::SplitEntanglement(Context::Ideal) => {
            let root = ev.sqrt(9.0 - l2);
            ev.ln_ratio(9.0 * (1.0 - l2), (root - 8f64.sqrt() * l).powi(2))
        }
        Formula::SplitEntanglement(Context::Scenario(s)) => {
            let den = match s.get() {
                1 => {
                    let e1 = 5.0 - 20.0 * t + 8.0 * t * t;
                    let e2 = (1.0 - 4.0 * t + t * t) * (1.0 - 2.0 * t).powi(2);
                    9.0 - e1 * l2 - 4.0 * l * ev.sqrt(18.0 * t + e2 * l2)
                }
                2 => {
                    let z1 = 5.0 - 12.0 * t + 4.0 * t * t;
                    let z2 = (1.0 - 2.0 * t).powi(2) * (1.0 - 4.0 * t + t * t);
                    9.0 - z1 * l2 - 2.0 * l * ev.sqrt(36.0 * t + z2 * l2)
                }
                3 => {
                    let e3 = 5.0 - 14.0 * t + 2.0 * t * t;
                    let e4 = (1.0 - 10.0 * t + t * t) * (2.0 - t).powi(2);
                    9.0 - e3 * l2 - 2.0 * l * ev.sqrt(72.0 * t + e4 * l2)
                }
                4 => {
                    let h1 = 5.0 - 16.0 * t + 8.0 * t * t;
                    let h2 = (1.0 - 4.0 * t + t * t).powi(2);
                    let h3 = 8.0 * t * (1.0 - t).powi(2);
                    9.0 - h1 * l2 - 2.0 * l * ev.sqrt(36.0 * t + h2 * l2 + h3 * t * t)
                }
                _ => {
                    let e5 = 9.0 - 18.0 * t + 2.0 * t * t;
                    let e6 = 9.0 - 18.0 * t + t * t;
                    9.0 - e5 * l2 - 2.0 * t * l * ev.sqrt(72.0 + e6 * l2)
                }
            };
            ev.ln_ratio(9.0 * (1.0 - l2), den)
        }
        Formula::SteeringFromSingle(Context::Ideal) | Formula::SteeringFromPair(Context::Ideal) => {
            ev.ln_ratio(9.0 - l2, 9.0 * (1.0 - l2))
        }
        Formula::SteeringFromPair(Context::Scenario(s)) => match s.get() {
            1 => ev.ln_ratio(9.0 - l2, 9.0 - (1.0 - 4.0 * t).powi(2) * l2),
            2 => ev.ln_ratio(
                9.0 - 2.0 * (5.0 - 8.0 * t + 8.0 * t * t) * l2 + l4,
                (1.0 - l2) * (9.0 - (1.0 - 4.0 * t).powi(2) * l2),
            ),
            3 => ev.ln_ratio(9.0 - (3.0 - 2.0 * t).powi(2) * l2, 9.0 - (1.0 + 2.0 * t).powi(2) * l2),
            4 => ev.ln_ratio(
                9.0 - 2.0 * (5.0 - 8.0 * t + 8.0 * t * t) * l2 + l4,
                9.0 - 2.0 * (5.0 - 16.0 * t + 20.0 * t * t) * l2 + (1.0 - 4.0 * t * t).powi(2) * l4,
            ),
            _ => ev.ln_ratio(9.0 - (3.0 - 2.0 * t).powi(2) * l2, 9.0 - (3.0 - 6.0 * t).powi(2) * l2),
        },
        Formula::SteeringFromSingle(Context::Scenario(s)) => match s.get() {
            1 => ev.ln_ratio(9.0 - (3.0 - 4.0 * t).powi(2) * l2, 9.0 - (1.0 - 4.0 * t).powi(2) * l2),
            2 => {
                let base = (1.0 - l2) * (9.0 - l2);
                let chi1 = 4.0 * t * l2 * (1.0 + l2 - 2.0 * t);
                let chi2 = base + 4.0 * t.powi(3) - 4.0 * t * t * (1.0 + l2) - 4.0 * t * (2.0 - 3.0 * l2);
                let root = ev.sqrt(t * chi2);
                ev.ln_ratio(base, base + chi1 - 4.0 * l2 * root)
            }
            3 => ev.ln_ratio(9.0 - l2, 9.0 - (1.0 + 2.0 * t).powi(2) * l2),
            4 => {
                let th0 = 5.0 - 50.0 * t + 28.0 * t.powi(2) + 16.0 * t.powi(3) + 8.0 * t.powi(4);
                let th1 = 7.0 - 14.0 * t + 14.0 * t * t;
                let th2 = 4.0 * t.powi(8) * l4 - 16.0 * t.powi(7) * l4;
                let th3 =
                    (1.0 - l2).powi(2) - 4.0 * t.powi(6) * l2 * (3.0 - 7.0 * l2) + t.powi(5) * l2 * (60.0 - 52.0 * l2);
                let th4 = t * (-7.0 + 18.0 * l2 - 11.0 * l4) - 4.0 * t.powi(3) * (6.0 - 29.0 * l2 + 23.0 * l4);
                let th5 = t * t * (22.0 - 64.0 * l2 + 46.0 * l4) + t.powi(4) * (9.0 - 118.0 * l2 + 93.0 * l4);
                let root = ev.sqrt(th2 + th3 + th4 + th5);
                ev.ln_ratio(
                    (1.0 - l2) * (9.0 - (3.0 - 4.0 * t).powi(2) * l2),
                    9.0 + th0 * l4 - 2.0 * l2 * (th1 + 2.0 * root),
                )
            }
            _ => ev.ln_ratio(9.0 - (3.0 - 4.0 * t).powi(2) * l2, 9.0 - (3.0 - 6.0 * t).powi(2) * l2),
        },
        Formula::PairSteering {
            steering_lossy,
            steered_lossy,
        } => {
            let ti = if steering_lossy { t } else { 1.0 };
            let tj = if steered_lossy { t } else { 1.0 };
            let nu = pairwise_conditional_eigenvalue(lambda, ti, tj)?;
            if nu.domain_ok {
                -2.0 * (2.0 * nu.value).ln()
            } else {
                ev.bad = true;
                f64::NAN
            }
        }
    };
    Ok(ev.finish(value))
}

fn pairwise_eigenvalue(lambda: f64, ti: f64, tj: f64, den_coeff: f64) -> Result<FormulaValue> {
    check_lambda(lambda)?;
    check_t(ti)?;
    check_t(tj)?;
    let l2 = lambda * lambda;
    let xi1 = 9.0 + 8.0 * (ti * ti + tj * tj) - 12.0 * (ti + tj) + 4.0 * ti * tj;
    let xi2 = 3.0 - 4.0 * (ti + tj - ti * tj);
    let num = 9.0 - 2.0 * xi1 * l2 + xi2 * xi2 * l2 * l2;
    let den = 4.0 * (1.0 - l2) * (9.0 - (3.0 - den_coeff * ti).powi(2) * l2);
    let mut ev = Eval::default();
    let v = if den > 0.0 { ev.sqrt(num / den) } else { ev.sqrt(-1.0) };
    Ok(ev.finish(v))
}

/// Symplectic eigenvalue of mode `j` conditioned on mode `i` (both members of
/// the ± pair coincide), as transcribed, with `(3 − T_i)²` in the
/// denominator.
pub fn pairwise_conditional_eigenvalue(lambda: f64, t_steering: f64, t_steered: f64) -> Result<FormulaValue> {
    pairwise_eigenvalue(lambda, t_steering, t_steered, 1.0)
}

/// Pairwise conditional eigenvalue with the denominator factor
/// `(3 − 4T_i)²`, which is what `det V_ij / det V_i` reduces to.
pub fn pairwise_conditional_eigenvalue_corrected(lambda: f64, t_steering: f64, t_steered: f64) -> Result<FormulaValue> {
    pairwise_eigenvalue(lambda, t_steering, t_steered, 4.0)
}

/// A transcribed expression known to disagree with the covariance-matrix
/// pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Erratum {
    pub formula: Formula,
    pub note: &'static str,
    pub corrected: bool,
}

pub fn erratum(formula: Formula) -> Option<Erratum> {
    let (note, corrected) = match formula {
        Formula::PairEntanglement(PairLoss::Both) => (
            "second denominator factor must read (1 + lambda - 2 T lambda); as printed the value is negative even at T = 1",
            true,
        ),
        Formula::PairSteering { .. } => (
            "eigenvalue denominator factor must read (3 - 4 T_i)^2; the clamped steering value (0) is unaffected",
            true,
        ),
        Formula::SplitEntanglement(Context::Scenario(s)) if s.get() == 2 => (
            "zeta form does not reduce to the ideal E^{k|ij} at T = 1; numeric pipeline is authoritative",
            false,
        ),
        Formula::SplitEntanglement(Context::Scenario(s)) if s.get() == 4 => (
            "eta form does not reduce to the ideal E^{k|ij} at T = 1; numeric pipeline is authoritative",
            false,
        ),
        Formula::SteeringFromSingle(Context::Scenario(s)) if s.get() == 4 => (
            "vartheta form does not reduce to the ideal S^{k->ij} at T = 1 and its radicand goes negative at large lambda; numeric pipeline is authoritative",
            false,
        ),
        _ => return None,
    };
    Some(Erratum {
        formula,
        note,
        corrected,
    })
}

/// The closed form that may be used as an oracle: the transcription when it
/// is sound, its correction when one is known, or `None` when only the
/// numeric pipeline can be trusted.
pub fn checked_formula(formula: Formula, lambda: f64, t: f64) -> Option<Result<FormulaValue>> {
    match erratum(formula) {
        None => Some(reference_formula(formula, lambda, t)),
        Some(e) if !e.corrected => None,
        Some(_) => Some(corrected_formula(formula, lambda, t)),
    }
}

fn corrected_formula(formula: Formula, lambda: f64, t: f64) -> Result<FormulaValue> {
    check_lambda(lambda)?;
    check_t(t)?;
    let l = lambda;
    let mut ev = Eval::default();
    let value = match formula {
        Formula::PairEntanglement(PairLoss::Both) => ev.ln_ratio(
            3.0 * (1.0 - l * l),
            (3.0 - 3.0 * l + 2.0 * t * l) * (1.0 + l - 2.0 * t * l),
        ),
        Formula::PairSteering {
            steering_lossy,
            steered_lossy,
        } => {
            let ti = if steering_lossy { t } else { 1.0 };
            let tj = if steered_lossy { t } else { 1.0 };
            let nu = pairwise_conditional_eigenvalue_corrected(lambda, ti, tj)?;
            if nu.domain_ok {
                -2.0 * (2.0 * nu.value).ln()
            } else {
                ev.bad = true;
                f64::NAN
            }
        }
        other => return reference_formula(other, lambda, t),
    };
    Ok(ev.finish(value))
}
