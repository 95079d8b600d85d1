//! Values, variables and partial assignments shared by every module.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single domain value: an integer or a labelled symbol.
///
/// Symbols that parse as decimals (`"0.5"`) still carry a numeric reading,
/// which is how non-binary utilities in `[0, 1]` are expressed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Sym(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Sym(s) => s.trim().parse::<f64>().ok().filter(|x| x.is_finite()),
        }
    }

    /// Parses a token the way CSV cells and CLI flags are read: integers
    /// become [`Value::Int`], anything else a symbol.
    pub fn parse(token: &str) -> Value {
        let t = token.trim();
        match t.parse::<i64>() {
            Ok(i) => Value::Int(i),
            Err(_) => Value::Sym(t.to_string()),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<i32> for Value {
    fn from(v: i32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Sym(v.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

/// A named variable with an ordered, finite domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<Value>,
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: Vec<Value>) -> Result<Self> {
        let var = Variable {
            name: name.into(),
            domain,
        };
        var.validate()?;
        Ok(var)
    }

    /// Convenience constructor for `{0, 1}` variables.
    pub fn binary(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            domain: vec![Value::Int(0), Value::Int(1)],
        }
    }

    pub fn range(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        Variable {
            name: name.into(),
            domain: (lo..=hi).map(Value::Int).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::input("variable with empty name"));
        }
        if self.domain.is_empty() {
            return Err(Error::input(format!("variable {} has an empty domain", self.name)));
        }
        let mut seen = self.domain.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.domain.len() {
            return Err(Error::input(format!(
                "variable {} has repeated domain values",
                self.name
            )));
        }
        Ok(())
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.domain.contains(v)
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.domain.iter().position(|x| x == v)
    }

    pub fn is_binary(&self) -> bool {
        self.domain.len() == 2
    }

    /// Numeric readings of the domain, or an error naming the first
    /// non-numeric value.
    pub fn numeric_domain(&self) -> Result<Vec<f64>> {
        self.domain
            .iter()
            .map(|v| {
                v.as_f64().ok_or_else(|| {
                    Error::input(format!("variable {} has non-numeric value {v}", self.name))
                })
            })
            .collect()
    }

    /// Domain value with the largest numeric reading.
    pub fn numeric_max(&self) -> Result<Value> {
        let nums = self.numeric_domain()?;
        let (i, _) = nums
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        Ok(self.domain[i].clone())
    }

    pub fn numeric_min(&self) -> Result<Value> {
        let nums = self.numeric_domain()?;
        let (i, _) = nums
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc });
        Ok(self.domain[i].clone())
    }
}

/// Partial assignment of values to named variables, ordered by name.
pub type Assignment = BTreeMap<String, Value>;

/// Builds an assignment from `(name, value)` pairs.
pub fn assign<V: Into<Value>, I: IntoIterator<Item = (&'static str, V)>>(pairs: I) -> Assignment {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.into()))
        .collect()
}

/// Single-variable assignment.
pub fn assign_one(name: &str, v: Value) -> Assignment {
    let mut a = Assignment::new();
    a.insert(name.to_string(), v);
    a
}

/// Union of two assignments; conflicting values on a shared variable are an
/// input error.
pub fn merge(a: &Assignment, b: &Assignment) -> Result<Assignment> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(existing) if existing != v => {
                return Err(Error::input(format!(
                    "conflicting values for {k}: {existing} and {v}"
                )))
            }
            _ => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(out)
}

/// `a` restricted to variables not named in `drop`.
pub fn without(a: &Assignment, drop: &Assignment) -> Assignment {
    a.iter()
        .filter(|(k, _)| !drop.contains_key(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

pub fn display_assignment(a: &Assignment) -> String {
    let inner: Vec<String> = a.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", inner.join(","))
}

/// Parses `Z=1,W=0` into an assignment. Empty input gives the empty
/// assignment.
pub fn parse_assignment(text: &str) -> Result<Assignment> {
    let mut out = Assignment::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::input(format!("expected NAME=VALUE, got {part:?}")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::input(format!("missing variable name in {part:?}")));
        }
        if out.insert(k.to_string(), Value::parse(v)).is_some() {
            return Err(Error::input(format!("variable {k} assigned twice")));
        }
    }
    Ok(out)
}

/// Iterates every joint value of `vars` in row-major order (last variable
/// fastest).
pub fn product<'a>(vars: &'a [Variable]) -> impl Iterator<Item = Vec<Value>> + 'a {
    let total: usize = vars.iter().map(|v| v.domain.len()).product();
    (0..total).map(move |mut idx| {
        let mut row = vec![Value::Int(0); vars.len()];
        for (slot, var) in row.iter_mut().zip(vars).rev() {
            let n = var.domain.len();
            *slot = var.domain[idx % n].clone();
            idx /= n;
        }
        row
    })
}
