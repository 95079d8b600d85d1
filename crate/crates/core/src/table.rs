//! Finite joint probability tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::{display_assignment, Assignment, Value, Variable};

/// Mass tolerance for accepting a table before renormalizing.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Joint distribution over a scope of variables sorted by name.
///
/// Cells are keyed by the value vector in scope order. Missing cells have
/// probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DistTable {
    scope: Vec<Variable>,
    cells: BTreeMap<Vec<Value>, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub assignment: Assignment,
    pub p: f64,
}

/// On-disk layout: `{scope, entries: [{assignment, p}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableFile {
    pub scope: Vec<Variable>,
    pub entries: Vec<TableEntry>,
}

impl DistTable {
    /// Builds a table from full assignments over `scope`. Entries for the
    /// same cell accumulate.
    pub fn new<I>(mut scope: Vec<Variable>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Assignment, f64)>,
    {
        scope.sort_by(|a, b| a.name.cmp(&b.name));
        for w in scope.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::input(format!("variable {} repeated in scope", w[0].name)));
            }
        }
        for v in &scope {
            v.validate()?;
        }
        let mut cells: BTreeMap<Vec<Value>, f64> = BTreeMap::new();
        for (a, p) in entries {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::input(format!(
                    "probability {p} for {} is not a finite non-negative number",
                    display_assignment(&a)
                )));
            }
            if a.len() != scope.len() {
                return Err(Error::input(format!(
                    "entry {} does not cover the table scope",
                    display_assignment(&a)
                )));
            }
            let mut key = Vec::with_capacity(scope.len());
            for var in &scope {
                let v = a.get(&var.name).ok_or_else(|| {
                    Error::input(format!(
                        "entry {} is missing variable {}",
                        display_assignment(&a),
                        var.name
                    ))
                })?;
                if !var.contains(v) {
                    return Err(Error::input(format!(
                        "value {v} outside the domain of {}",
                        var.name
                    )));
                }
                key.push(v.clone());
            }
            if p > 0.0 {
                *cells.entry(key).or_insert(0.0) += p;
            }
        }
        let total: f64 = cells.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::input(format!("table mass is {total}, expected 1")));
        }
        for p in cells.values_mut() {
            *p /= total;
        }
        Ok(DistTable { scope, cells })
    }

    pub fn point_mass(scope: Vec<Variable>, at: Assignment) -> Result<Self> {
        DistTable::new(scope, [(at, 1.0)])
    }

    pub fn from_file(file: TableFile) -> Result<Self> {
        DistTable::new(file.scope, file.entries.into_iter().map(|e| (e.assignment, e.p)))
    }

    pub fn to_file(&self) -> TableFile {
        TableFile {
            scope: self.scope.clone(),
            entries: self
                .iter()
                .map(|(assignment, p)| TableEntry { assignment, p })
                .collect(),
        }
    }

    pub fn scope(&self) -> &[Variable] {
        &self.scope
    }

    pub fn scope_names(&self) -> Vec<String> {
        self.scope.iter().map(|v| v.name.clone()).collect()
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.scope
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::input(format!("variable {name} not in table scope")))
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.scope.iter().any(|v| v.name == name)
    }

    /// Non-zero cells as full assignments.
    pub fn iter(&self) -> impl Iterator<Item = (Assignment, f64)> + '_ {
        self.cells.iter().map(move |(key, &p)| (self.to_assignment(key), p))
    }

    fn to_assignment(&self, key: &[Value]) -> Assignment {
        self.scope
            .iter()
            .zip(key)
            .map(|(var, v)| (var.name.clone(), v.clone()))
            .collect()
    }

    /// Resolves a partial assignment to `(scope index, value)` pairs.
    fn resolve(&self, event: &Assignment) -> Result<Vec<(usize, Value)>> {
        event
            .iter()
            .map(|(k, v)| {
                let i = self
                    .scope
                    .iter()
                    .position(|var| &var.name == k)
                    .ok_or_else(|| Error::input(format!("variable {k} not in table scope")))?;
                if !self.scope[i].contains(v) {
                    return Err(Error::input(format!("value {v} outside the domain of {k}")));
                }
                Ok((i, v.clone()))
            })
            .collect()
    }

    fn matching<'a>(
        &'a self,
        pins: &'a [(usize, Value)],
    ) -> impl Iterator<Item = (&'a Vec<Value>, f64)> + 'a {
        self.cells
            .iter()
            .filter(move |(key, _)| pins.iter().all(|(i, v)| &key[*i] == v))
            .map(|(k, &p)| (k, p))
    }

    /// Probability of a partial assignment (an event).
    pub fn prob(&self, event: &Assignment) -> Result<f64> {
        let pins = self.resolve(event)?;
        Ok(self.matching(&pins).map(|(_, p)| p).sum())
    }

    /// Marginal table over the named variables.
    pub fn marginal(&self, names: &[&str]) -> Result<DistTable> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.scope
                    .iter()
                    .position(|v| v.name == *n)
                    .ok_or_else(|| Error::input(format!("variable {n} not in table scope")))
            })
            .collect::<Result<_>>()?;
        let scope: Vec<Variable> = idx.iter().map(|&i| self.scope[i].clone()).collect();
        let entries = self.cells.iter().map(|(key, &p)| {
            let a: Assignment = idx
                .iter()
                .map(|&i| (self.scope[i].name.clone(), key[i].clone()))
                .collect();
            (a, p)
        });
        DistTable::new(scope, entries)
    }

    /// Conditional table over `target` given the event `given`.
    pub fn query(&self, target: &[&str], given: &Assignment) -> Result<DistTable> {
        let mass = self.prob(given)?;
        if mass <= 0.0 {
            return Err(Error::domain(format!(
                "conditioning event {} has zero probability",
                display_assignment(given)
            )));
        }
        let pins = self.resolve(given)?;
        let idx: Vec<usize> = target
            .iter()
            .map(|n| {
                self.scope
                    .iter()
                    .position(|v| v.name == *n)
                    .ok_or_else(|| Error::input(format!("variable {n} not in table scope")))
            })
            .collect::<Result<_>>()?;
        let scope: Vec<Variable> = idx.iter().map(|&i| self.scope[i].clone()).collect();
        let entries: Vec<(Assignment, f64)> = self
            .matching(&pins)
            .map(|(key, p)| {
                let a: Assignment = idx
                    .iter()
                    .map(|&i| (self.scope[i].name.clone(), key[i].clone()))
                    .collect();
                (a, p / mass)
            })
            .collect();
        DistTable::new(scope, entries)
    }

    /// `E[of * 1{event}]`, the unnormalized expectation over an event.
    pub fn expect_indicator(&self, of: &str, event: &Assignment) -> Result<f64> {
        let var = self.variable(of)?;
        let nums = var.numeric_domain()?;
        let i = self.scope.iter().position(|v| v.name == of).unwrap_or(0);
        let pins = self.resolve(event)?;
        Ok(self
            .matching(&pins)
            .map(|(key, p)| {
                let j = var.index_of(&key[i]).unwrap_or(0);
                nums[j] * p
            })
            .sum())
    }

    /// Conditional mean `E[of | given]`.
    pub fn expectation(&self, of: &str, given: &Assignment) -> Result<f64> {
        let nums = self.variable(of)?.numeric_domain()?;
        let q = self.query(&[of], given)?;
        let var = &q.scope[0];
        Ok(q.iter()
            .map(|(a, p)| nums[var.index_of(&a[of]).unwrap_or(0)] * p)
            .sum())
    }

    /// Half the L1 distance between two tables on the same scope.
    pub fn total_variation(&self, other: &DistTable) -> Result<f64> {
        if self.scope != other.scope {
            return Err(Error::input("total variation needs identical scopes"));
        }
        let mut sum = 0.0;
        for (k, &p) in &self.cells {
            sum += (p - other.cells.get(k).copied().unwrap_or(0.0)).abs();
        }
        for (k, &q) in &other.cells {
            if !self.cells.contains_key(k) {
                sum += q;
            }
        }
        Ok((0.5 * sum).min(1.0))
    }

    /// Largest per-cell absolute difference; scopes must match.
    pub fn max_abs_diff(&self, other: &DistTable) -> Result<f64> {
        if self.scope != other.scope {
            return Err(Error::input("tables have different scopes"));
        }
        let mut worst: f64 = 0.0;
        for (k, &p) in &self.cells {
            worst = worst.max((p - other.cells.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, &q) in &other.cells {
            if !self.cells.contains_key(k) {
                worst = worst.max(q);
            }
        }
        Ok(worst)
    }

    /// Every cell of the scope product, including zero-probability ones.
    pub fn dense(&self) -> Vec<(Assignment, f64)> {
        crate::value::product(&self.scope)
            .map(|key| {
                let p = self.cells.get(&key).copied().unwrap_or(0.0);
                (self.to_assignment(&key), p)
            })
            .collect()
    }
}

/// Builds a table from weighted rows, reading each variable's domain off the
/// observed values.
pub fn estimate_from_samples(rows: &[(Assignment, f64)]) -> Result<DistTable> {
    let first = rows
        .first()
        .ok_or_else(|| Error::input("cannot estimate a table from zero rows"))?;
    let names: Vec<String> = first.0.keys().cloned().collect();
    let mut domains: BTreeMap<String, Vec<Value>> =
        names.iter().map(|n| (n.clone(), Vec::new())).collect();
    let mut total = 0.0;
    for (a, w) in rows {
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::input(format!("row weight {w} is not a non-negative number")));
        }
        if a.len() != names.len() || !a.keys().zip(&names).all(|(k, n)| k == n) {
            return Err(Error::input("rows do not share a common set of variables"));
        }
        for (k, v) in a {
            let dom = domains.get_mut(k).expect("names checked above");
            if !dom.contains(v) {
                dom.push(v.clone());
            }
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::input("row weights sum to zero"));
    }
    let scope = domains
        .into_iter()
        .map(|(name, mut domain)| {
            domain.sort();
            Variable { name, domain }
        })
        .collect();
    DistTable::new(scope, rows.iter().map(|(a, w)| (a.clone(), w / total)))
}
