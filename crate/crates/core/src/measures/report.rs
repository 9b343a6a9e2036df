use super::closed_form::{checked_formula, erratum, reference_formula, Context, Erratum, Formula, FormulaValue};
use super::{monogamy_residuals, MeasureId, NumericDetail};
use crate::analysis::{classify_cm, RegionLabel};
use crate::error::{Error, Result};
use crate::loss::{apply_loss, LossSetting, Roles, Scenario};
use crate::symplectic::CovarianceMatrix;

/// Agreement tolerance between a closed form and the numeric pipeline.
pub const ORACLE_TOL: f64 = 1e-9;

/// Pre-clamp values closer to zero than this are on the clip boundary and
/// skip the present/absent comparison.
const BOUNDARY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormEntry {
    pub formula: Formula,
    /// As transcribed, before clamping.
    pub printed: FormulaValue,
    /// The trusted form (printed or corrected), absent for uncorrected errata.
    pub checked: Option<FormulaValue>,
    pub erratum: Option<Erratum>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agreement {
    Match {
        diff: f64,
    },
    Mismatch {
        diff: f64,
    },
    /// Known erratum with no corrected form; the numeric value stands.
    Erratum,
    NoClosedForm,
}

impl Agreement {
    pub fn is_mismatch(&self) -> bool {
        matches!(self, Agreement::Mismatch { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Agreement::Match { .. } => "match",
            Agreement::Mismatch { .. } => "MISMATCH",
            Agreement::Erratum => "erratum",
            Agreement::NoClosedForm => "none",
        }
    }
}

/// Compares a trusted closed form against the numeric value: clamped values
/// within [`ORACLE_TOL`], and both sides agreeing on whether any symplectic
/// eigenvalue sits below 1/2.
pub fn compare(numeric: &NumericDetail, closed: &FormulaValue) -> Agreement {
    if !closed.domain_ok {
        return Agreement::Mismatch { diff: f64::NAN };
    }
    let diff = (closed.clamped() - numeric.value).abs();
    let present_closed = closed.value > 0.0;
    let present_numeric = numeric.violations > 0;
    let count_ok = closed.value.abs() < BOUNDARY || present_closed == present_numeric;
    if diff <= ORACLE_TOL && count_ok {
        Agreement::Match { diff }
    } else {
        Agreement::Mismatch { diff }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureEntry {
    pub id: MeasureId,
    pub numeric: NumericDetail,
    pub closed: Option<ClosedFormEntry>,
}

impl MeasureEntry {
    pub fn agreement(&self) -> Agreement {
        match &self.closed {
            None => Agreement::NoClosedForm,
            Some(ClosedFormEntry { checked: None, .. }) => Agreement::Erratum,
            Some(ClosedFormEntry { checked: Some(c), .. }) => compare(&self.numeric, c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub lambda: f64,
    pub setting: LossSetting,
    pub roles: Roles,
    pub entries: Vec<MeasureEntry>,
    /// `(S^{ij→k} − S^{i→k} − S^{j→k}, S^{k→ij} − S^{k→i} − S^{k→j})`.
    pub monogamy: (f64, f64),
    pub region: RegionLabel,
}

impl CorrelationReport {
    pub fn any_mismatch(&self) -> bool {
        self.entries.iter().any(|e| e.agreement().is_mismatch())
    }

    pub fn get(&self, id: &str) -> Option<&MeasureEntry> {
        self.entries.iter().find(|e| e.id.to_string() == id)
    }
}

/// Setting used for a measure: its own `@` context when present, otherwise
/// the report's.
pub(crate) fn effective_setting(id: &MeasureId, base: &LossSetting, roles: Roles) -> Result<LossSetting> {
    match id.context {
        None => Ok(*base),
        Some(Context::Ideal) => Ok(LossSetting::Ideal),
        Some(Context::Scenario(sid)) => {
            let t = base.shared_t().ok_or_else(|| {
                Error::Domain(format!(
                    "measure {id} names a scenario but the loss setting has no shared T"
                ))
            })?;
            Ok(LossSetting::Scenario(Scenario::new(sid, t, roles)?))
        }
    }
}

pub(crate) fn closed_entry(
    id: &MeasureId,
    setting: &LossSetting,
    roles: &Roles,
    lambda: f64,
) -> Result<Option<ClosedFormEntry>> {
    let Some(ctx) = setting.context() else {
        return Ok(None);
    };
    let Some(formula) = id.formula(roles, ctx) else {
        return Ok(None);
    };
    let t = setting.shared_t().unwrap_or(1.0);
    Ok(Some(ClosedFormEntry {
        formula,
        printed: reference_formula(formula, lambda, t)?,
        checked: checked_formula(formula, lambda, t).transpose()?,
        erratum: erratum(formula),
    }))
}

/// Evaluates `measures` on the state obtained from the lossless output
/// `ideal` under `setting`. Entries come back in lexical id order.
pub fn build_report(
    ideal: &CovarianceMatrix,
    lambda: f64,
    setting: &LossSetting,
    roles: Roles,
    measures: &[MeasureId],
) -> Result<CorrelationReport> {
    let v = apply_loss(ideal, &setting.config())?;
    let mut ids: Vec<MeasureId> = measures.to_vec();
    ids.sort_by_key(|m| m.to_string());
    ids.dedup();

    let mut entries = Vec::with_capacity(ids.len());
    for id in ids {
        let eff = effective_setting(&id, setting, roles)?;
        let numeric = if eff == *setting {
            id.evaluate(&v, &roles)?
        } else {
            id.evaluate(&apply_loss(ideal, &eff.config())?, &roles)?
        };
        let closed = closed_entry(&id, &eff, &roles, lambda)?;
        entries.push(MeasureEntry { id, numeric, closed });
    }
    Ok(CorrelationReport {
        lambda,
        setting: *setting,
        roles,
        entries,
        monogamy: monogamy_residuals(&v, roles.k())?,
        region: classify_cm(&v, &roles)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::ScenarioId;
    use crate::tritter::ideal_output_cm;

    #[test]
    fn ideal_report_matches_closed_forms() {
        let v = ideal_output_cm(0.5).unwrap();
        let r = build_report(&v, 0.5, &LossSetting::Ideal, Roles::default(), &MeasureId::defaults()).unwrap();
        assert!(!r.any_mismatch());
        assert_eq!(r.region, RegionLabel::I);
        let s = r.get("S:k->ij").unwrap().numeric.value;
        assert!(s > 0.0);
        assert_eq!(r.get("S:a->b").unwrap().numeric.value, 0.0);
        let names: Vec<String> = r.entries.iter().map(|e| e.id.to_string()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn erratum_entries_are_not_mismatches() {
        let v = ideal_output_cm(0.6).unwrap();
        let s = Scenario::new(ScenarioId::new(4).unwrap(), 0.7, Roles::default()).unwrap();
        let r = build_report(
            &v,
            0.6,
            &LossSetting::Scenario(s),
            Roles::default(),
            &MeasureId::defaults(),
        )
        .unwrap();
        assert_eq!(r.get("S:k->ij").unwrap().agreement(), Agreement::Erratum);
        assert!(!r.any_mismatch());
    }

    #[test]
    fn scenario_qualifier_needs_shared_t() {
        let v = ideal_output_cm(0.6).unwrap();
        let custom = LossSetting::Custom(crate::loss::LossConfig::new([0.5, 1.0, 1.0]).unwrap());
        let ids = vec!["E:1v2@s1".parse().unwrap()];
        assert!(build_report(&v, 0.6, &custom, Roles::default(), &ids).is_err());
    }
}
