//! Bound reports and the fixed text formats they serialize to.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// Outcome of checking one inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    HypothesisNotMet,
    /// Only the right-hand side was evaluated.
    NotEvaluated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::HypothesisNotMet => "hypothesis-not-met",
            Verdict::NotEvaluated => "not-evaluated",
        })
    }
}

/// Direction of the checked inequality, read as `lhs REL rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    /// Floating comparison with an absolute slack.
    pub fn check(self, lhs: f64, rhs: f64, slack: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + slack,
            Relation::Ge => lhs + slack >= rhs,
            Relation::Eq => (lhs - rhs).abs() <= slack,
        }
    }

    pub fn check_exact<T: Ord>(self, lhs: T, rhs: T) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

/// One evaluated inequality: measured left side, bound, verdict, and the
/// inputs it was evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub n: u32,
    /// Serialized as a decimal string: it can exceed 64 bits.
    #[serde(serialize_with = "decimal_string")]
    pub m: u128,
    pub lhs: Option<f64>,
    pub rhs: f64,
    pub relation: Relation,
    pub verdict: Verdict,
    /// Extra inputs and recorded hypotheses (ε, δ, thresholds, ...).
    pub params: BTreeMap<String, String>,
    /// Rows documenting a known gap; they never fail a run.
    pub advisory: bool,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, n: u32, m: u128, rhs: f64, relation: Relation) -> Self {
        BoundReport {
            name: name.into(),
            n,
            m,
            lhs: None,
            rhs,
            relation,
            verdict: Verdict::NotEvaluated,
            params: BTreeMap::new(),
            advisory: false,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }

    /// Compares with slack `rel_tol * scale`, where `scale` is at least
    /// `max(1, |lhs|, |rhs|)`.
    pub fn measured(mut self, lhs: f64, rel_tol: f64, scale: f64) -> Self {
        let scale = scale.max(1.0).max(lhs.abs()).max(self.rhs.abs());
        self.lhs = Some(lhs);
        self.verdict = if self.relation.check(lhs, self.rhs, rel_tol * scale) {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        self
    }

    /// Integer comparison, no slack.
    pub fn measured_exact(mut self, lhs: u128, rhs: u128) -> Self {
        self.lhs = Some(lhs as f64);
        self.rhs = rhs as f64;
        self.verdict = if self.relation.check_exact(lhs, rhs) {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        self
    }

    pub fn hypothesis_not_met(mut self, why: &str) -> Self {
        self.verdict = Verdict::HypothesisNotMet;
        self.params.insert("hypothesis".into(), why.into());
        self
    }

    /// A violated, non-advisory row.
    pub fn is_failure(&self) -> bool {
        self.verdict == Verdict::Violated && !self.advisory
    }

    pub const CSV_HEADER: &'static str = "name,n,m,lhs,rhs,verdict";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.name,
            self.n,
            self.m,
            self.lhs.map(format_real).unwrap_or_default(),
            format_real(self.rhs),
            self.verdict
        )
    }
}

fn decimal_string<S: serde::Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Formats a real with 12 significant digits; scientific notation outside
/// `[1e-4, 1e12)`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs();
    if !(1e-4..1e12).contains(&mag) {
        return format!("{x:.11e}");
    }
    let int_digits = mag.log10().floor() as i32 + 1;
    let decimals = (12 - int_digits).max(0) as usize;
    format!("{x:.decimals$}")
}
