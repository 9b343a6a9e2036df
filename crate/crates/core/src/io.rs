//! CSV and JSON serialization of covariance matrices, reports, sweeps,
//! threshold tables and verification results.
//!
//! CSV floats carry 12 significant digits. JSON floats use the shortest
//! representation that parses back to the same `f64`, so a matrix written
//! as JSON reads back exactly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{SweepRow, SweepSpec, SweepVariable, ThresholdResult, ThresholdRow};
use crate::error::{Error, Result};
use crate::loss::LossSetting;
use crate::measures::{CorrelationReport, MeasureEntry};
use crate::symplectic::CovarianceMatrix;
use crate::tritter::{Mode, Quadrature};
use crate::verify::CheckOutcome;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Cm,
    Report,
    Sweep,
    Thresholds,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: u32,
    pub kind: RecordKind,
    pub body: Value,
}

impl OutputRecord {
    pub fn new(kind: RecordKind, body: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: OutputRecord = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {}",
                rec.schema_version
            )));
        }
        Ok(rec)
    }
}

/// Parses a complex number written `re+imi`, e.g. `2+3i`, `-1.5i`, `0.3`.
pub fn parse_complex(s: &str) -> Result<nalgebra::Complex<f64>> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot read complex number '{s}' (expected re+imi)"));
    let num = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(nalgebra::Complex::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&n| (bytes[n] == b'+' || bytes[n] == b'-') && !matches!(bytes[n - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(n) => (body[..n].parse::<f64>().map_err(|_| bad())?, num(&body[n..])?),
        None => (0.0, num(body)?),
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(nalgebra::Complex::new(re, im))
}

/// `x` rounded to 12 significant digits, printed without trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("own output parses");
    if rounded == 0.0 {
        return "0".into();
    }
    if (1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn quadrature_labels(n_modes: usize) -> Vec<String> {
    (0..2 * n_modes)
        .map(|q| match Mode::from_index(q / 2) {
            Some(m) if n_modes == 3 => {
                if q % 2 == 0 {
                    Quadrature::x(m).to_string()
                } else {
                    Quadrature::p(m).to_string()
                }
            }
            _ => format!("{}{}", if q % 2 == 0 { "x" } else { "p" }, q / 2),
        })
        .collect()
}

fn setting_json(setting: &LossSetting) -> Value {
    json!({
        "label": setting.label(),
        "shared_T": setting.shared_t(),
        "T": setting.config().transmissivities(),
    })
}

pub fn cm_record(v: &CovarianceMatrix, lambda: f64, setting: &LossSetting, via: &str) -> OutputRecord {
    let rows: Vec<Vec<f64>> = (0..v.dim())
        .map(|r| (0..v.dim()).map(|c| v.get(r, c)).collect())
        .collect();
    OutputRecord::new(
        RecordKind::Cm,
        json!({
            "lambda": lambda,
            "loss": setting_json(setting),
            "via": via,
            "quadratures": quadrature_labels(v.n_modes()),
            "matrix": rows,
        }),
    )
}

/// Reads the matrix back out of a `cm` record.
pub fn parse_cm_json(s: &str) -> Result<CovarianceMatrix> {
    let rec = OutputRecord::from_json(s)?;
    if rec.kind != RecordKind::Cm {
        return Err(Error::Parse(format!("expected a cm record, got {:?}", rec.kind)));
    }
    let rows: Vec<Vec<f64>> =
        serde_json::from_value(rec.body["matrix"].clone()).map_err(|e| Error::Parse(format!("matrix: {e}")))?;
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Parse("matrix rows have unequal lengths".into()));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    CovarianceMatrix::from_row_slice(dim, &flat)
}

pub fn cm_csv(v: &CovarianceMatrix) -> String {
    let labels = quadrature_labels(v.n_modes());
    let mut out = format!("quadrature,{}\n", labels.join(","));
    for (r, label) in labels.iter().enumerate() {
        let cells: Vec<String> = (0..v.dim()).map(|c| fmt_sig(v.get(r, c))).collect();
        let _ = writeln!(out, "{label},{}", cells.join(","));
    }
    out
}

fn entry_json(e: &MeasureEntry) -> Value {
    let agreement = e.agreement();
    let diff = match agreement {
        crate::measures::Agreement::Match { diff } | crate::measures::Agreement::Mismatch { diff } => Some(diff),
        _ => None,
    };
    json!({
        "id": e.id.to_string(),
        "numeric": e.numeric.value,
        "violations": e.numeric.violations,
        "min_eigenvalue": e.numeric.min_eigenvalue,
        "closed_form": e.closed.as_ref().map(|c| json!({
            "formula": c.formula.to_string(),
            "printed": c.printed.value,
            "checked": c.checked.map(|v| v.clamped()),
            "erratum": c.erratum.map(|x| x.note),
        })),
        "diff": diff,
        "agreement": agreement.label(),
    })
}

fn checked_value(e: &MeasureEntry) -> Option<f64> {
    e.closed.as_ref().and_then(|c| c.checked).map(|v| v.clamped())
}

pub fn report_record(r: &CorrelationReport) -> OutputRecord {
    OutputRecord::new(
        RecordKind::Report,
        json!({
            "lambda": r.lambda,
            "loss": setting_json(&r.setting),
            "k": r.roles.k().to_string(),
            "lossy_member": r.roles.lossy_member().to_string(),
            "measures": r.entries.iter().map(entry_json).collect::<Vec<_>>(),
            "monogamy": { "ij->k": r.monogamy.0, "k->ij": r.monogamy.1 },
            "region": r.region.to_string(),
            "mismatch": r.any_mismatch(),
        }),
    )
}

pub fn report_csv(r: &CorrelationReport) -> String {
    let mut out = String::from("measure,numeric,closed_form,diff,agreement,formula\n");
    for e in &r.entries {
        let closed = checked_value(e);
        let diff = closed.map(|c| (c - e.numeric.value).abs());
        let formula = e.closed.as_ref().map(|c| c.formula.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            e.id,
            fmt_sig(e.numeric.value),
            opt_sig(closed),
            opt_sig(diff),
            e.agreement().label(),
            formula
        );
    }
    let _ = writeln!(out, "monogamy:ij->k,{},,,,", fmt_sig(r.monogamy.0));
    let _ = writeln!(out, "monogamy:k->ij,{},,,,", fmt_sig(r.monogamy.1));
    let _ = writeln!(out, "region,,,,{},", r.region);
    out
}

fn sweep_columns(spec: &SweepSpec) -> (&'static str, &'static str) {
    match spec.variable {
        SweepVariable::Transmissivity => ("T", "lambda"),
        SweepVariable::Lambda => ("lambda", "T"),
    }
}

/// Independent variable, then measures in id order, then diagnostics.
pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let (var, fixed) = sweep_columns(spec);
    let ids: Vec<String> = rows
        .first()
        .map(|r| r.report.entries.iter().map(|e| e.id.to_string()).collect())
        .unwrap_or_default();
    let mut header = vec![var.to_string()];
    header.extend(ids.iter().cloned());
    header.push(fixed.to_string());
    header.push("1-T".to_string());
    header.extend(ids.iter().map(|id| format!("closed:{id}")));
    header.extend(["monogamy:ij->k", "monogamy:k->ij", "region", "mismatch"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let (x, y) = match spec.variable {
            SweepVariable::Transmissivity => (row.t, row.lambda),
            SweepVariable::Lambda => (row.lambda, row.t),
        };
        let mut cells = vec![fmt_sig(x)];
        cells.extend(row.report.entries.iter().map(|e| fmt_sig(e.numeric.value)));
        cells.push(fmt_sig(y));
        cells.push(fmt_sig(1.0 - row.t));
        cells.extend(row.report.entries.iter().map(|e| opt_sig(checked_value(e))));
        cells.push(fmt_sig(row.report.monogamy.0));
        cells.push(fmt_sig(row.report.monogamy.1));
        cells.push(row.report.region.to_string());
        cells.push(row.mismatch().to_string());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn sweep_record(spec: &SweepSpec, rows: &[SweepRow]) -> OutputRecord {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "lambda": r.lambda,
                "T": r.t,
                "1-T": 1.0 - r.t,
                "measures": r.report.entries.iter().map(entry_json).collect::<Vec<_>>(),
                "monogamy": { "ij->k": r.report.monogamy.0, "k->ij": r.report.monogamy.1 },
                "region": r.report.region.to_string(),
                "mismatch": r.mismatch(),
            })
        })
        .collect();
    OutputRecord::new(
        RecordKind::Sweep,
        json!({
            "variable": spec.variable.to_string(),
            "start": spec.start,
            "stop": spec.stop,
            "step": spec.step,
            "fixed": spec.fixed,
            "scenario": spec.scenario.map(|s| s.get()),
            "k": spec.roles.k().to_string(),
            "rows": rows,
        }),
    )
}

fn threshold_cell(r: &ThresholdResult) -> String {
    match r {
        ThresholdResult::At(t) => fmt_sig(*t),
        other => other.to_string(),
    }
}

pub fn thresholds_csv(rows: &[ThresholdRow]) -> String {
    let mut out = String::from("scenario,lambda,measure,threshold,stated,diff\n");
    for r in rows {
        let diff = match (r.found.value(), r.stated) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scenario,
            fmt_sig(r.lambda),
            r.measure,
            threshold_cell(&r.found),
            opt_sig(r.stated),
            opt_sig(diff)
        );
    }
    out
}

pub fn thresholds_record(rows: &[ThresholdRow]) -> OutputRecord {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "scenario": r.scenario.get(),
                "lambda": r.lambda,
                "measure": r.measure.to_string(),
                "threshold": r.found.value(),
                "status": match r.found {
                    ThresholdResult::At(_) => "at",
                    ThresholdResult::AlwaysPresent => "always",
                    ThresholdResult::NeverPresent => "never",
                },
                "stated": r.stated,
            })
        })
        .collect();
    OutputRecord::new(RecordKind::Thresholds, json!({ "rows": rows }))
}

pub fn verify_record(checks: &[CheckOutcome]) -> OutputRecord {
    let passed = checks.iter().all(|c| c.passed);
    OutputRecord::new(
        RecordKind::Verify,
        json!({
            "passed": passed,
            "checks": checks.iter().map(|c| json!({
                "id": c.id,
                "name": c.name,
                "passed": c.passed,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        }),
    )
}

pub fn verify_text(checks: &[CheckOutcome]) -> String {
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(
            out,
            "[{}] {:>2} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
    }
    let n = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(out, "{n}/{} checks passed", checks.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::Roles;
    use crate::measures::{build_report, MeasureId};
    use crate::tritter::ideal_output_cm;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_sig(123456.7890123456), "123456.789012");
        assert_eq!(fmt_sig(1e-20 / 3.0), "3.33333333333e-21");
        assert_eq!(fmt_sig(-2.5e-15), "-2.5e-15");
        assert_eq!(fmt_sig(1e20), "1e20");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn complex_syntax() {
        let c = |re, im| nalgebra::Complex::new(re, im);
        assert_eq!(parse_complex("2+3i").unwrap(), c(2.0, 3.0));
        assert_eq!(parse_complex("2-3i").unwrap(), c(2.0, -3.0));
        assert_eq!(parse_complex("-1.5i").unwrap(), c(0.0, -1.5));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("0").unwrap(), c(0.0, 0.0));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c(1e-3, 20.0));
        assert_eq!(parse_complex(" 1 + i ").unwrap(), c(1.0, 1.0));
        for s in ["", "2+3j", "a+bi", "2+3", "1++2i"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn cm_json_round_trip_is_exact() {
        let v = ideal_output_cm(0.73).unwrap();
        let s = cm_record(&v, 0.73, &LossSetting::Ideal, "closed-form").to_json();
        let back = parse_cm_json(&s).unwrap();
        assert_eq!(back.max_abs_diff(&v), 0.0);
    }

    #[test]
    fn cm_csv_layout() {
        let s = cm_csv(&CovarianceMatrix::vacuum(3));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "quadrature,x_a,p_a,x_b,p_b,x_c,p_c");
        assert_eq!(lines[1], "x_a,0.5,0,0,0,0,0");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn wrong_kind_or_version() {
        let rec = OutputRecord::new(RecordKind::Report, json!({}));
        assert!(parse_cm_json(&rec.to_json()).is_err());
        let mut rec = OutputRecord::new(RecordKind::Cm, json!({}));
        rec.schema_version = 2;
        assert!(OutputRecord::from_json(&rec.to_json()).is_err());
    }

    #[test]
    fn report_outputs() {
        let v = ideal_output_cm(0.5).unwrap();
        let r = build_report(&v, 0.5, &LossSetting::Ideal, Roles::default(), &MeasureId::defaults()).unwrap();
        let csv = report_csv(&r);
        assert!(csv.starts_with("measure,numeric,closed_form,diff,agreement,formula\n"));
        assert!(csv.contains("\nregion,,,,I,\n"));
        let rec = report_record(&r);
        assert_eq!(rec.body["region"], "I");
        assert_eq!(rec.body["measures"].as_array().unwrap().len(), r.entries.len());
    }
}
