//! The self-describing JSON system file: weights, group, both actions,
//! Følner schedules, and named observables in one document, validated
//! jointly because the commuting-pair invariants span all of them.

use std::collections::BTreeMap;
use std::sync::Arc;

use ergavg::{
    Action, AxisSchedule, CommutingPair, FiniteGroupTable, FiniteSpace, FolnerSchedule,
    FolnerSequence, GroupSpec, Observable, Permutation, Scalar, SpaceRef,
};
use num::bigint::BigInt;
use num::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Errors surfaced to the shell: `code` is the process exit code
/// (2 = validation/parse/IO failure, 3 = a falsified bound — a defect).
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    pub fn defect(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 3,
        }
    }
}

impl From<ergavg::Error> for CliError {
    fn from(e: ergavg::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

/// Attaches a field path to an inner validation failure.
pub fn at(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("{context}: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub space: SpaceSection,
    pub group: GroupSection,
    pub t: ActionSection,
    pub s: ActionSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folner_t: Option<FolnerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub folner_s: Option<FolnerSection>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    /// Strictly positive weights summing to one; numbers, `"p/q"`, or
    /// decimal strings.
    pub weights: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_abelian: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_table: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSection {
    /// One permutation per group generator (free abelian) or per group
    /// element (finite table), as images of `0..n`.
    pub generators: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FolnerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_group: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<AxisSection>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub lo_coef: i64,
    pub lo_off: i64,
    pub hi_coef: i64,
    pub hi_off: i64,
}

impl From<AxisSchedule> for AxisSection {
    fn from(a: AxisSchedule) -> Self {
        Self {
            lo_coef: a.lo_coef,
            lo_off: a.lo_off,
            hi_coef: a.hi_coef,
            hi_off: a.hi_off,
        }
    }
}

impl From<&AxisSection> for AxisSchedule {
    fn from(a: &AxisSection) -> Self {
        Self {
            lo_coef: a.lo_coef,
            lo_off: a.lo_off,
            hi_coef: a.hi_coef,
            hi_off: a.hi_off,
        }
    }
}

/// A fully validated system: the commuting pair, both Følner sequences,
/// and the named observables, in one scalar mode.
pub struct LoadedSystem<S: Scalar> {
    pub pair: CommutingPair<S>,
    pub seq_t: FolnerSequence,
    pub seq_s: FolnerSequence,
    pub observables: BTreeMap<String, Observable<S>>,
}

impl<S: Scalar> LoadedSystem<S> {
    pub fn observable(&self, name: &str) -> Result<&Observable<S>, CliError> {
        self.observables
            .get(name)
            .ok_or_else(|| CliError::validation(format!("unknown observable '{name}'")))
    }
}

/// Scalar modes the CLI can run in: numeric leaves are parsed per mode,
/// reported back through `Scalar::repr`.
pub trait ReportScalar: Scalar {
    const MODE: &'static str;
    fn parse_value(v: &Value, context: &str) -> Result<Self, CliError>;
}

/// `"p/q"`, a decimal string, or a plain integer string, as an exact
/// rational.
fn parse_rational_str(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some((p, q)) = body.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q == BigInt::from(0) {
            return None;
        }
        BigRational::new(p, q)
    } else if let Some((int, frac)) = body.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return None;
        }
        let int_part: BigInt = if int.is_empty() { BigInt::from(0) } else { int.parse().ok()? };
        let frac_part: BigInt = frac.parse().ok()?;
        let scale = BigInt::from(10).pow(frac.len() as u32);
        BigRational::new(int_part * &scale + frac_part, scale)
    } else {
        BigRational::from_integer(body.parse().ok()?)
    };
    Some(if negative { -value } else { value })
}

impl ReportScalar for f64 {
    const MODE: &'static str = "float";

    fn parse_value(v: &Value, context: &str) -> Result<Self, CliError> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| at(context, "number out of range")),
            Value::String(s) => parse_rational_str(s)
                .and_then(|r| num::ToPrimitive::to_f64(&r))
                .ok_or_else(|| at(context, format!("cannot parse '{s}' as a number"))),
            other => Err(at(context, format!("expected a number, got {other}"))),
        }
    }
}

impl ReportScalar for BigRational {
    const MODE: &'static str = "exact";

    fn parse_value(v: &Value, context: &str) -> Result<Self, CliError> {
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(|k| BigRational::from_integer(BigInt::from(k)))
                .ok_or_else(|| {
                    at(
                        context,
                        "exact mode needs integers or strings (write 0.25 as \"0.25\" or \"1/4\")",
                    )
                }),
            Value::String(s) => parse_rational_str(s)
                .ok_or_else(|| at(context, format!("cannot parse '{s}' as a rational"))),
            other => Err(at(context, format!("expected a number, got {other}"))),
        }
    }
}

fn parse_values<S: ReportScalar>(values: &[Value], context: &str) -> Result<Vec<S>, CliError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| S::parse_value(v, &format!("{context}[{i}]")))
        .collect()
}

fn folner_from(
    section: &Option<FolnerSection>,
    group: &GroupSpec,
    context: &str,
) -> Result<FolnerSequence, CliError> {
    let Some(section) = section else {
        return Ok(FolnerSequence::default_for(group));
    };
    let schedule = match (&section.full_group, &section.boxes) {
        (Some(true), None) => FolnerSchedule::FullGroup,
        (None, Some(axes)) => {
            FolnerSchedule::Boxes(axes.iter().map(AxisSchedule::from).collect())
        }
        _ => {
            return Err(at(
                context,
                "set exactly one of `full_group: true` and `boxes`",
            ))
        }
    };
    FolnerSequence::new(group.clone(), schedule).map_err(|e| at(context, e))
}

/// Validates the whole document into live objects. Every error names the
/// field it arose from.
pub fn load_system<S: ReportScalar>(file: &SystemFile) -> Result<LoadedSystem<S>, CliError> {
    let weights = parse_values::<S>(&file.space.weights, "space.weights")?;
    let space: SpaceRef<S> =
        Arc::new(FiniteSpace::new(weights).map_err(|e| at("space.weights", e))?);

    let group = match (&file.group.free_abelian, &file.group.finite_table) {
        (Some(rank), None) => GroupSpec::free_abelian(*rank).map_err(|e| at("group.free_abelian", e))?,
        (None, Some(rows)) => GroupSpec::FiniteTable(
            FiniteGroupTable::new(rows.clone()).map_err(|e| at("group.finite_table", e))?,
        ),
        _ => {
            return Err(CliError::validation(
                "group: set exactly one of `free_abelian` and `finite_table`",
            ))
        }
    };

    let parse_action = |section: &ActionSection, name: &str| -> Result<Action<S>, CliError> {
        let gens = section
            .generators
            .iter()
            .enumerate()
            .map(|(i, map)| {
                Permutation::new(map.clone()).map_err(|e| at(&format!("{name}.generators[{i}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Action::from_generators(group.clone(), space.clone(), gens).map_err(|e| at(name, e))
    };
    let t = parse_action(&file.t, "t")?;
    let s = parse_action(&file.s, "s")?;
    let pair = CommutingPair::new(t, s).map_err(|e| at("system", e))?;

    let seq_t = folner_from(&file.folner_t, pair.group(), "folner_t")?;
    let seq_s = folner_from(&file.folner_s, pair.group(), "folner_s")?;

    let n = pair.space().n();
    let mut observables = BTreeMap::new();
    for (name, values) in &file.observables {
        if values.len() != n {
            return Err(CliError::validation(format!(
                "observables.{name}: expected {n} entries, got {}",
                values.len()
            )));
        }
        let parsed = parse_values::<S>(values, &format!("observables.{name}"))?;
        observables.insert(name.clone(), Observable::new(parsed));
    }

    Ok(LoadedSystem {
        pair,
        seq_t,
        seq_s,
        observables,
    })
}

pub fn parse_system_bytes(bytes: &[u8]) -> Result<SystemFile, CliError> {
    serde_json::from_slice(bytes)
        .map_err(|e| CliError::validation(format!("system file: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_cover_all_forms() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(parse_rational_str("1/2"), Some(half.clone()));
        assert_eq!(parse_rational_str("0.5"), Some(half.clone()));
        assert_eq!(parse_rational_str(".5"), Some(half.clone()));
        assert_eq!(parse_rational_str("-0.5"), Some(-half.clone()));
        assert_eq!(parse_rational_str("-1/2"), Some(-half));
        assert_eq!(
            parse_rational_str("3"),
            Some(BigRational::from_integer(BigInt::from(3)))
        );
        assert_eq!(parse_rational_str("1/0"), None);
        assert_eq!(parse_rational_str("0.5.1"), None);
        assert_eq!(parse_rational_str("abc"), None);
    }

    #[test]
    fn float_mode_accepts_numbers_and_strings() {
        assert_eq!(
            f64::parse_value(&Value::from(0.25), "w").unwrap(),
            0.25
        );
        assert_eq!(
            f64::parse_value(&Value::from("1/4"), "w").unwrap(),
            0.25
        );
        assert!(f64::parse_value(&Value::from("x"), "w").is_err());
    }

    #[test]
    fn exact_mode_rejects_float_literals() {
        assert!(BigRational::parse_value(&Value::from(0.25), "w").is_err());
        assert!(BigRational::parse_value(&Value::from(3), "w").is_ok());
        assert!(BigRational::parse_value(&Value::from("0.25"), "w").is_ok());
    }
}
