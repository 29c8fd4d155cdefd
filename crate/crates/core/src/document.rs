//! JSON plan documents and execution reports.
//!
//! Fractions are written as `{"num": <int>, "den": <int>}` with
//! arbitrary-precision integers so no exactness is lost in transit.
//! Decimal renderings exist only for human-readable text.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Number, Value};
use thiserror::Error;

use crate::combinatorics::Rational;
use crate::protocol::{
    gen_exact_plan, gen_exponential_plan, gen_incremental_plan, ExecutionReport, PlanError, ProtocolPlan,
    StateRef, Target,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Exact rational with a `{num, den}` JSON encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fraction(pub Rational);

fn big_number(n: &BigInt) -> Number {
    Number::from_str(&n.to_string()).expect("integers are valid JSON numbers")
}

impl Fraction {
    pub fn to_json(&self) -> Value {
        json!({ "num": big_number(self.0.numer()), "den": big_number(self.0.denom()) })
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            num: Number,
            den: Number,
        }
        let raw = Raw::deserialize(deserializer)?;
        let parse = |n: &Number| {
            BigInt::from_str(&n.to_string()).map_err(|_| D::Error::custom(format!("`{n}` is not an integer")))
        };
        let den = parse(&raw.den)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Fraction(Rational::new(parse(&raw.num)?, den)))
    }
}

/// Decimal rendering with `digits` significant digits, rounding half to
/// even. Display only.
pub fn decimal_approx(value: &Rational, digits: usize) -> String {
    assert!(digits >= 1);
    if value.is_zero() {
        return "0".into();
    }
    let sign = if value.is_negative() { "-" } else { "" };
    let x = value.abs();
    let pow10 = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from_integer(BigInt::from(10).pow(e as u32))
        } else {
            Rational::from_integer(BigInt::from(10).pow((-e) as u32)).recip()
        }
    };
    // exponent e with 10^e <= x < 10^(e+1)
    let mut e = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    while pow10(e) > x {
        e -= 1;
    }
    while pow10(e + 1) <= x {
        e += 1;
    }
    let scaled = &x * pow10(digits as i64 - 1 - e);
    let floor = scaled.floor().to_integer();
    let frac = &scaled - Rational::from_integer(floor.clone());
    let half = Rational::new(1.into(), 2.into());
    let mut q = if frac > half || (frac == half && floor.is_odd()) { floor + 1 } else { floor };
    if q == BigInt::from(10).pow(digits as u32) {
        q /= 10;
        e += 1;
    }
    let s = q.to_string();
    if (0..digits as i64).contains(&e) {
        let (int_part, frac_part) = s.split_at(e as usize + 1);
        if frac_part.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    } else if (-6..0).contains(&e) {
        format!("{sign}0.{}{s}", "0".repeat((-e - 1) as usize))
    } else {
        let (head, tail) = s.split_at(1);
        let mantissa = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
        format!("{sign}{mantissa}e{e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Explicit,
    Exact,
    Incremental,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verification {
    #[serde(default)]
    pub verify_with_oracle: bool,
}

/// On-disk plan description.
///
/// Generator modes carry their parameters and, optionally, the generated
/// plan; when present it must match what the generator produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    pub schema_version: u32,
    pub k: usize,
    pub target_n: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ProtocolPlan>,
    #[serde(default)]
    pub verification: Verification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("malformed plan document: {0}")]
    Malformed(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("generator rejected parameters: {0}")]
    Generator(#[from] PlanError),
    #[error("inconsistent plan: {0}")]
    Inconsistent(String),
}

impl DocumentError {
    /// True for errors that describe the plan rather than the document.
    pub fn is_invalid_plan(&self) -> bool {
        matches!(self, DocumentError::Inconsistent(_))
    }
}

impl PlanDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let doc: PlanDocument =
            serde_json::from_str(text).map_err(|e| DocumentError::Malformed(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(DocumentError::Schema(doc.schema_version));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan documents always serialize")
    }

    /// Document for an explicit plan.
    pub fn explicit(plan: ProtocolPlan) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            k: plan.k,
            target_n: plan.target.n,
            mode: Mode::Explicit,
            n1: None,
            n2: None,
            plan: Some(plan),
            verification: Verification::default(),
            dense_cap: None,
        }
    }

    /// Runs a generator and embeds its plan.
    pub fn generate(
        mode: Mode,
        k: usize,
        target_n: usize,
        n1: Option<usize>,
        n2: Option<usize>,
    ) -> Result<Self, DocumentError> {
        let mut doc = Self {
            schema_version: SCHEMA_VERSION,
            k,
            target_n,
            mode,
            n1,
            n2,
            plan: None,
            verification: Verification::default(),
            dense_cap: None,
        };
        doc.plan = Some(doc.resolve()?);
        Ok(doc)
    }

    /// The plan this document describes.
    pub fn resolve(&self) -> Result<ProtocolPlan, DocumentError> {
        let generated = match self.mode {
            Mode::Explicit => {
                if self.n1.is_some() || self.n2.is_some() {
                    return Err(DocumentError::Malformed("n1/n2 only apply to exact mode".into()));
                }
                let plan = self
                    .plan
                    .clone()
                    .ok_or_else(|| DocumentError::Malformed("explicit mode requires `plan`".into()))?;
                if plan.k != self.k || plan.target != (Target { k: self.k, n: self.target_n }) {
                    return Err(DocumentError::Inconsistent(format!(
                        "document declares Z_{}({}) but the plan targets Z_{}({}) with k={}",
                        self.k, self.target_n, plan.target.k, plan.target.n, plan.k
                    )));
                }
                return Ok(plan);
            }
            Mode::Exact => {
                let (Some(n1), Some(n2)) = (self.n1, self.n2) else {
                    return Err(DocumentError::Malformed("exact mode requires n1 and n2".into()));
                };
                if n1 + n2 != self.target_n {
                    return Err(DocumentError::Malformed(format!(
                        "exact mode delivers n1 + n2 = {} but target_n is {}",
                        n1 + n2,
                        self.target_n
                    )));
                }
                gen_exact_plan(self.k, n1, n2)?
            }
            Mode::Incremental | Mode::Exponential => {
                if self.n1.is_some() || self.n2.is_some() {
                    return Err(DocumentError::Malformed("n1/n2 only apply to exact mode".into()));
                }
                if self.mode == Mode::Incremental {
                    gen_incremental_plan(self.k, self.target_n)?
                } else {
                    gen_exponential_plan(self.k, self.target_n)?
                }
            }
        };
        if let Some(given) = &self.plan {
            if *given != generated {
                return Err(DocumentError::Inconsistent(
                    "embedded plan differs from the generator output".into(),
                ));
            }
        }
        Ok(generated)
    }
}

fn state_json(s: &StateRef) -> Value {
    serde_json::to_value(s).expect("state refs serialize")
}

/// Machine-readable execution report. Probabilities are exact fractions
/// only.
pub fn report_json(report: &ExecutionReport) -> Value {
    let cycles: Vec<Value> = report
        .cycles
        .iter()
        .map(|c| {
            json!({
                "index": c.index,
                "left": state_json(&c.left),
                "right": state_json(&c.right),
                "produced": state_json(&c.produced),
                "descriptor": c.produced.descriptor(),
                "probability": Fraction(c.probability.clone()).to_json(),
                "oracle_checked": c.oracle_checked,
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "cycles": cycles,
        "final_state": state_json(&report.final_state),
        "final_descriptor": report.final_state.descriptor(),
        "cumulative_probability": Fraction(report.cumulative_success.clone()).to_json(),
        "ledger": serde_json::to_value(&report.ledger).expect("ledger serializes"),
        "critical_path": report.critical_path.iter().map(StateRef::descriptor).collect::<Vec<_>>(),
    })
}

fn prob_text(p: &Rational) -> String {
    format!("{p} (approx. {})", decimal_approx(p, 6))
}

/// Human-readable report; the last line names the delivered state.
pub fn report_text(report: &ExecutionReport) -> String {
    let mut out = String::new();
    for c in &report.cycles {
        let check = if c.oracle_checked { " [oracle ok]" } else { "" };
        let _ = writeln!(
            out,
            "cycle {}: {} + {} -> {}  p = {}{}",
            c.index,
            c.left,
            c.right,
            c.produced,
            prob_text(&c.probability),
            check
        );
    }
    let l = &report.ledger;
    let _ = writeln!(
        out,
        "ledger: input {} qubits ({} states), ancilla {}, consumed {}, output {}, cycles {}, depth {}",
        l.input_qubits,
        l.input_states,
        l.ancilla_qubits,
        l.consumed_qubits,
        l.output_qubits,
        l.cycles,
        l.depth
    );
    let path: Vec<String> = report.critical_path.iter().map(StateRef::descriptor).collect();
    let _ = writeln!(out, "critical path: {}", path.join(" -> "));
    let _ = writeln!(out, "cumulative success probability: {}", prob_text(&report.cumulative_success));
    let _ = write!(out, "final state: {}", report.final_state.descriptor());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ratio;
    use crate::protocol::{execute_plan, ExecuteOptions};

    #[test]
    fn decimals() {
        assert_eq!(decimal_approx(&ratio(2, 9), 6), "0.222222");
        assert_eq!(decimal_approx(&ratio(1, 15), 6), "0.0666667");
        assert_eq!(decimal_approx(&ratio(1, 1), 6), "1.00000");
        assert_eq!(decimal_approx(&ratio(5, 24), 6), "0.208333");
        assert_eq!(decimal_approx(&ratio(123456789, 1), 6), "1.23457e8");
        assert_eq!(decimal_approx(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(decimal_approx(&ratio(1, 3_000_000_000), 6), "3.33333e-10");
        // ties go to even
        assert_eq!(decimal_approx(&ratio(1_000_005, 1_000_000), 6), "1.00000");
        assert_eq!(decimal_approx(&ratio(1_000_015, 1_000_000), 6), "1.00002");
        assert_eq!(decimal_approx(&ratio(9_999_995, 1_000_000), 6), "10.0000");
        assert_eq!(decimal_approx(&ratio(0, 1), 6), "0");
    }

    #[test]
    fn fraction_json() {
        let f = Fraction(ratio(2, 9));
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"den":9,"num":2}"#);
        let big = r#"{"num": 123456789012345678901234567891, "den": 2}"#;
        let back: Fraction = serde_json::from_str(big).unwrap();
        assert_eq!(back.0.numer().to_string(), "123456789012345678901234567891");
        assert!(serde_json::from_str::<Fraction>(r#"{"num": 1, "den": 0}"#).is_err());
        assert!(serde_json::from_str::<Fraction>(r#"{"num": 0.5, "den": 1}"#).is_err());
    }

    #[test]
    fn document_round_trip() {
        for doc in [
            PlanDocument::generate(Mode::Exact, 2, 11, Some(5), Some(6)).unwrap(),
            PlanDocument::generate(Mode::Incremental, 1, 6, None, None).unwrap(),
            PlanDocument::generate(Mode::Exponential, 1, 10, None, None).unwrap(),
        ] {
            let back = PlanDocument::from_json(&doc.to_json()).unwrap();
            assert_eq!(back, doc);
            assert_eq!(back.resolve().unwrap(), doc.plan.clone().unwrap());
        }
    }

    #[test]
    fn document_rejections() {
        assert!(matches!(
            PlanDocument::from_json(
                r#"{"schema_version":1,"k":1,"target_n":4,"mode":"incremental","extra":1}"#
            ),
            Err(DocumentError::Malformed(_))
        ));
        assert_eq!(
            PlanDocument::from_json(r#"{"schema_version":2,"k":1,"target_n":4,"mode":"incremental"}"#),
            Err(DocumentError::Schema(2))
        );
        let doc =
            PlanDocument::from_json(r#"{"schema_version":1,"k":1,"target_n":4,"mode":"exact"}"#).unwrap();
        assert!(matches!(doc.resolve(), Err(DocumentError::Malformed(_))));
        let doc = PlanDocument::from_json(r#"{"schema_version":1,"k":1,"target_n":2,"mode":"incremental"}"#)
            .unwrap();
        assert!(matches!(doc.resolve(), Err(DocumentError::Generator(_))));

        let mut doc = PlanDocument::generate(Mode::Incremental, 1, 6, None, None).unwrap();
        doc.plan.as_mut().unwrap().cycles.pop();
        assert!(doc.resolve().unwrap_err().is_invalid_plan());
    }

    #[test]
    fn text_report_ends_with_final_state() {
        let plan = gen_exact_plan(1, 3, 3).unwrap();
        let report = execute_plan(&plan, &ExecuteOptions::default()).unwrap();
        let text = report_text(&report);
        assert!(text.ends_with("final state: Z_1(6)"), "{text}");
        let json = report_json(&report);
        assert_eq!(json["final_descriptor"], "Z_1(6)");
        let p: Fraction = serde_json::from_value(json["cumulative_probability"].clone()).unwrap();
        assert_eq!(p.0, report.cumulative_success);
        assert!(!json.to_string().contains("approx"));
    }
}
