use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entropy::ExtendedReal;

/// Direction of a checked relation between `lhs` and `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs >= rhs`
    Geq,
    /// `lhs <= rhs`
    Leq,
    /// `lhs == rhs`
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The relation is undefined for this input (e.g. `+inf` on the lesser
    /// side); excluded from pass-rate statistics.
    Inapplicable,
}

/// Outcome of checking one relation on one input.
///
/// `slack` is oriented so that a nonnegative value means the relation holds:
/// greater side minus lesser side for inequalities, `-|lhs - rhs|` for
/// equalities. `pass` holds exactly when `slack >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub relation: Relation,
    pub lhs: ExtendedReal,
    pub rhs: ExtendedReal,
    pub slack: Option<ExtendedReal>,
    pub tolerance: f64,
    pub pass: bool,
    pub status: Status,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    /// Intermediate relations whose composition yields this one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<InequalityReport>,
}

impl InequalityReport {
    pub fn new(
        name: impl Into<String>,
        relation: Relation,
        lhs: impl Into<ExtendedReal>,
        rhs: impl Into<ExtendedReal>,
        tolerance: f64,
    ) -> Self {
        let (lhs, rhs) = (lhs.into(), rhs.into());
        let slack = match relation {
            Relation::Geq => oriented_slack(lhs, rhs),
            Relation::Leq => oriented_slack(rhs, lhs),
            Relation::Eq => match (lhs, rhs) {
                (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
                    Some(ExtendedReal::Finite(-(a - b).abs()))
                }
                _ => None,
            },
        };
        let (pass, status) = match slack {
            None => (false, Status::Inapplicable),
            Some(ExtendedReal::PosInfinity) => (true, Status::Pass),
            // NaN compares false and so fails
            Some(ExtendedReal::Finite(s)) if s >= -tolerance => (true, Status::Pass),
            Some(ExtendedReal::Finite(_)) => (false, Status::Fail),
        };
        Self {
            name: name.into(),
            relation,
            lhs,
            rhs,
            slack,
            tolerance,
            pass,
            status,
            metadata: BTreeMap::new(),
            links: Vec::new(),
        }
    }

    /// `lhs >= rhs - tolerance`.
    pub fn geq(
        name: impl Into<String>,
        lhs: impl Into<ExtendedReal>,
        rhs: impl Into<ExtendedReal>,
        tolerance: f64,
    ) -> Self {
        Self::new(name, Relation::Geq, lhs, rhs, tolerance)
    }

    /// `lhs <= rhs + tolerance`.
    pub fn leq(
        name: impl Into<String>,
        lhs: impl Into<ExtendedReal>,
        rhs: impl Into<ExtendedReal>,
        tolerance: f64,
    ) -> Self {
        Self::new(name, Relation::Leq, lhs, rhs, tolerance)
    }

    /// `|lhs - rhs| <= tolerance`.
    pub fn eq(
        name: impl Into<String>,
        lhs: impl Into<ExtendedReal>,
        rhs: impl Into<ExtendedReal>,
        tolerance: f64,
    ) -> Self {
        Self::new(name, Relation::Eq, lhs, rhs, tolerance)
    }

    /// A report whose hypotheses do not hold; `reason` goes to metadata.
    pub fn inapplicable(
        name: impl Into<String>,
        relation: Relation,
        lhs: impl Into<ExtendedReal>,
        rhs: impl Into<ExtendedReal>,
        tolerance: f64,
        reason: impl Into<String>,
    ) -> Self {
        let mut r = Self::new(name, relation, lhs, rhs, tolerance);
        r.slack = None;
        r.pass = false;
        r.status = Status::Inapplicable;
        r.metadata.insert("inapplicable".into(), reason.into());
        r
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    pub fn with_links(mut self, links: Vec<InequalityReport>) -> Self {
        self.links = links;
        self
    }

    pub fn is_applicable(&self) -> bool {
        self.status != Status::Inapplicable
    }

    /// True when this report or any link (recursively) failed.
    pub fn any_failure(&self) -> bool {
        self.status == Status::Fail || self.links.iter().any(InequalityReport::any_failure)
    }

    /// Depth-first walk yielding `(qualified name, report)`; link names are
    /// prefixed by their parents as `parent/link`.
    pub fn flatten(&self) -> Vec<(String, &InequalityReport)> {
        let mut out = Vec::new();
        self.flatten_into(None, &mut out);
        out
    }

    fn flatten_into<'a>(&'a self, prefix: Option<&str>, out: &mut Vec<(String, &'a InequalityReport)>) {
        let name = match prefix {
            Some(p) => format!("{p}/{}", self.name),
            None => self.name.clone(),
        };
        out.push((name.clone(), self));
        for link in &self.links {
            link.flatten_into(Some(&name), out);
        }
    }

    /// Slack as an `f64` (`+inf` for infinite slack, NaN when inapplicable).
    pub fn slack_f64(&self) -> f64 {
        self.slack.map(|s| s.to_f64()).unwrap_or(f64::NAN)
    }
}

fn oriented_slack(greater: ExtendedReal, lesser: ExtendedReal) -> Option<ExtendedReal> {
    match (greater, lesser) {
        (_, ExtendedReal::PosInfinity) => None,
        (ExtendedReal::PosInfinity, _) => Some(ExtendedReal::PosInfinity),
        (ExtendedReal::Finite(g), ExtendedReal::Finite(l)) => Some(ExtendedReal::Finite(g - l)),
    }
}
