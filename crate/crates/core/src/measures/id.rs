//! Textual measure identifiers.
//!
//! ```text
//! id      := kind ':' target [ '@' context ]
//! kind    := 'E' | 'S'
//! target  := 'pair' | '1v2'            (E only; roles decide the modes)
//!          | 'k->ij' | 'ij->k'          (S only)
//!          | modes '|' modes            (E, explicit)
//!          | modes '->' modes           (S, explicit)
//! modes   := one or more of 'a' 'b' 'c'
//! context := 'ideal' | 's1' .. 's5'
//! ```
//!
//! `pair` is the two modes other than `k`, `1v2` is `k|ij`.

use std::fmt;
use std::str::FromStr;

use super::closed_form::{Context, Formula, PairLoss};
use super::{gaussian_steering_detail, log_negativity_detail, NumericDetail};
use crate::error::{Error, Result};
use crate::loss::{Roles, Scenario, ScenarioId};
use crate::symplectic::{CovarianceMatrix, ModePartition};
use crate::tritter::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    Entanglement,
    Steering,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Pair,
    OneVsTwo,
    SingleToPair,
    PairToSingle,
    Explicit(Vec<Mode>, Vec<Mode>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasureId {
    pub kind: MeasureKind,
    pub target: Target,
    pub context: Option<Context>,
}

impl MeasureId {
    pub fn entanglement(target: Target) -> Self {
        Self {
            kind: MeasureKind::Entanglement,
            target,
            context: None,
        }
    }

    pub fn steering(target: Target) -> Self {
        Self {
            kind: MeasureKind::Steering,
            target,
            context: None,
        }
    }

    pub fn with_context(mut self, ctx: Context) -> Self {
        self.context = Some(ctx);
        self
    }

    /// The standard measure set of a report.
    pub fn defaults() -> Vec<MeasureId> {
        let mut out = vec![
            MeasureId::entanglement(Target::Pair),
            MeasureId::entanglement(Target::OneVsTwo),
            MeasureId::steering(Target::SingleToPair),
            MeasureId::steering(Target::PairToSingle),
        ];
        for from in Mode::ALL {
            for to in Mode::ALL {
                if from != to {
                    out.push(MeasureId::steering(Target::Explicit(vec![from], vec![to])));
                }
            }
        }
        out
    }

    /// Parties `(A, B)` in mode labels.
    pub fn parties(&self, roles: &Roles) -> (Vec<Mode>, Vec<Mode>) {
        let k = roles.k();
        let [x, y] = k.others();
        match &self.target {
            Target::Pair => (vec![x], vec![y]),
            Target::OneVsTwo | Target::SingleToPair => (vec![k], vec![x, y]),
            Target::PairToSingle => (vec![x, y], vec![k]),
            Target::Explicit(a, b) => (a.clone(), b.clone()),
        }
    }

    pub fn partition(&self, roles: &Roles) -> Result<ModePartition> {
        let (a, b) = self.parties(roles);
        ModePartition::new(
            3,
            a.iter().map(|m| m.index()).collect(),
            b.iter().map(|m| m.index()).collect(),
        )
    }

    pub fn evaluate(&self, v: &CovarianceMatrix, roles: &Roles) -> Result<NumericDetail> {
        let p = self.partition(roles)?;
        match self.kind {
            MeasureKind::Entanglement => log_negativity_detail(v, &p),
            MeasureKind::Steering => gaussian_steering_detail(v, &p),
        }
    }

    /// Closed form describing this measure in `ctx` (the id's own context
    /// wins over `ctx`), if one exists.
    pub fn formula(&self, roles: &Roles, ctx: Context) -> Option<Formula> {
        let ctx = self.context.unwrap_or(ctx);
        let lossy: Vec<Mode> = match ctx {
            Context::Ideal => vec![],
            Context::Scenario(id) => Scenario::new(id, 1.0, *roles).ok()?.lossy_modes(),
        };
        let (a, b) = self.parties(roles);
        let k_ok = |single: Mode| ctx == Context::Ideal || single == roles.k();
        match (self.kind, a.len(), b.len()) {
            (MeasureKind::Entanglement, 1, 1) => {
                let n = [a[0], b[0]].iter().filter(|m| lossy.contains(m)).count();
                Some(Formula::PairEntanglement(match n {
                    0 => PairLoss::None,
                    1 => PairLoss::One,
                    _ => PairLoss::Both,
                }))
            }
            (MeasureKind::Entanglement, 1, 2) if k_ok(a[0]) => Some(Formula::SplitEntanglement(ctx)),
            (MeasureKind::Entanglement, 2, 1) if k_ok(b[0]) => Some(Formula::SplitEntanglement(ctx)),
            (MeasureKind::Steering, 1, 1) => Some(Formula::PairSteering {
                steering_lossy: lossy.contains(&a[0]),
                steered_lossy: lossy.contains(&b[0]),
            }),
            (MeasureKind::Steering, 1, 2) if k_ok(a[0]) => Some(Formula::SteeringFromSingle(ctx)),
            (MeasureKind::Steering, 2, 1) if k_ok(b[0]) => Some(Formula::SteeringFromPair(ctx)),
            _ => None,
        }
    }
}

fn modes_str(ms: &[Mode]) -> String {
    ms.iter().map(|m| m.label()).collect()
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MeasureKind::Entanglement => 'E',
            MeasureKind::Steering => 'S',
        };
        let target = match (&self.target, self.kind) {
            (Target::Pair, _) => "pair".to_string(),
            (Target::OneVsTwo, _) => "1v2".to_string(),
            (Target::SingleToPair, _) => "k->ij".to_string(),
            (Target::PairToSingle, _) => "ij->k".to_string(),
            (Target::Explicit(a, b), MeasureKind::Entanglement) => format!("{}|{}", modes_str(a), modes_str(b)),
            (Target::Explicit(a, b), MeasureKind::Steering) => format!("{}->{}", modes_str(a), modes_str(b)),
        };
        write!(f, "{kind}:{target}")?;
        if let Some(ctx) = self.context {
            write!(f, "@{ctx}")?;
        }
        Ok(())
    }
}

fn parse_modes(s: &str, full: &str) -> Result<Vec<Mode>> {
    let ms: Vec<Mode> = s
        .chars()
        .map(|c| Mode::from_label(c).ok_or_else(|| Error::Parse(format!("bad mode '{c}' in measure '{full}'"))))
        .collect::<Result<_>>()?;
    if ms.is_empty() {
        return Err(Error::Parse(format!("empty party in measure '{full}'")));
    }
    Ok(ms)
}

pub(crate) fn parse_context(s: &str) -> Result<Context> {
    let s = s.trim().to_ascii_lowercase();
    if s == "ideal" {
        return Ok(Context::Ideal);
    }
    let id = s
        .strip_prefix('s')
        .and_then(|d| d.parse::<u8>().ok())
        .ok_or_else(|| Error::Parse(format!("bad scenario qualifier '{s}'")))?;
    Ok(Context::Scenario(
        ScenarioId::new(id).map_err(|e| Error::Parse(e.to_string()))?,
    ))
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let full = s.trim();
        let (body, context) = match full.split_once('@') {
            Some((b, c)) => (b, Some(parse_context(c)?)),
            None => (full, None),
        };
        let (kind, target) = body
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("measure '{full}' must look like KIND:TARGET")))?;
        let kind = match kind.trim() {
            "E" | "e" => MeasureKind::Entanglement,
            "S" | "s" => MeasureKind::Steering,
            other => return Err(Error::Parse(format!("unknown measure kind '{other}' in '{full}'"))),
        };
        let target = match (kind, target.trim()) {
            (MeasureKind::Entanglement, "pair") => Target::Pair,
            (MeasureKind::Entanglement, "1v2") => Target::OneVsTwo,
            (MeasureKind::Steering, "k->ij") => Target::SingleToPair,
            (MeasureKind::Steering, "ij->k") => Target::PairToSingle,
            (MeasureKind::Entanglement, t) => {
                let (a, b) = t
                    .split_once('|')
                    .ok_or_else(|| Error::Parse(format!("entanglement target in '{full}' needs '|'")))?;
                Target::Explicit(parse_modes(a, full)?, parse_modes(b, full)?)
            }
            (MeasureKind::Steering, t) => {
                let (a, b) = t
                    .split_once("->")
                    .ok_or_else(|| Error::Parse(format!("steering target in '{full}' needs '->'")))?;
                Target::Explicit(parse_modes(a, full)?, parse_modes(b, full)?)
            }
        };
        if let Target::Explicit(a, b) = &target {
            if a.iter().any(|m| b.contains(m)) {
                return Err(Error::Parse(format!("parties overlap in '{full}'")));
            }
            let mut all: Vec<Mode> = a.iter().chain(b).copied().collect();
            all.sort();
            all.dedup();
            if all.len() != a.len() + b.len() {
                return Err(Error::Parse(format!("repeated mode in '{full}'")));
            }
        }
        Ok(MeasureId { kind, target, context })
    }
}

/// Parses a comma-separated list; `all` expands to [`MeasureId::defaults`].
pub fn parse_list(s: &str) -> Result<Vec<MeasureId>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if item == "all" {
            out.extend(MeasureId::defaults());
        } else {
            out.push(item.parse()?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in [
            "E:pair",
            "E:1v2",
            "S:k->ij",
            "S:ij->k",
            "E:a|bc",
            "S:c->ab",
            "S:a->b@s3",
            "E:1v2@ideal",
        ] {
            let id: MeasureId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
    }

    #[test]
    fn parse_errors() {
        for s in [
            "X:pair",
            "E:a->b",
            "S:a|b",
            "E:a|a",
            "S:->b",
            "E:ab|bc",
            "E:pair@s9",
            "pair",
            "E:a|d",
        ] {
            assert!(s.parse::<MeasureId>().is_err(), "{s} should not parse");
        }
    }

    #[test]
    fn list_expands_all() {
        let v = parse_list("all, E:a|b").unwrap();
        assert_eq!(v.len(), MeasureId::defaults().len() + 1);
    }

    #[test]
    fn roles_resolve_targets() {
        let roles = Roles::default();
        let id: MeasureId = "S:ij->k".parse().unwrap();
        let (a, b) = id.parties(&roles);
        assert_eq!(a, vec![Mode::A, Mode::B]);
        assert_eq!(b, vec![Mode::C]);
    }

    #[test]
    fn formula_lookup() {
        let roles = Roles::default();
        let s3 = Context::Scenario(ScenarioId::new(3).unwrap());
        let pair: MeasureId = "E:pair".parse().unwrap();
        assert_eq!(
            pair.formula(&roles, s3),
            Some(Formula::PairEntanglement(PairLoss::Both))
        );
        let ac: MeasureId = "E:a|c".parse().unwrap();
        assert_eq!(ac.formula(&roles, s3), Some(Formula::PairEntanglement(PairLoss::One)));
        // `a` is not the single mode k under scenario roles.
        let a_bc: MeasureId = "E:a|bc".parse().unwrap();
        assert_eq!(a_bc.formula(&roles, s3), None);
        assert_eq!(
            a_bc.formula(&roles, Context::Ideal),
            Some(Formula::SplitEntanglement(Context::Ideal))
        );
        let q: MeasureId = "S:c->ab@ideal".parse().unwrap();
        assert_eq!(q.formula(&roles, s3), Some(Formula::SteeringFromSingle(Context::Ideal)));
    }
}
