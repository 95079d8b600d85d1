//! Finite structural causal models with tabled mechanisms.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::CheckedMul;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::DistTable;
use crate::value::{display_assignment, product, Assignment, Value, Variable};

/// Tolerance on the exogenous distribution's total mass.
pub const EXO_TOLERANCE: f64 = 1e-12;

/// An intervention `do(x)`: endogenous variables pinned to values.
pub type Intervention = Assignment;

/// Structural assignment `target := f(parents, exo_parents)` stored as a
/// total lookup table.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub target: String,
    pub parents: Vec<String>,
    pub exo_parents: Vec<String>,
    /// Keyed by parent values followed by exogenous-parent values.
    pub table: BTreeMap<Vec<Value>, Value>,
}

impl Mechanism {
    /// Tabulates `f` over every joint value of the parents.
    pub fn tabulate<F>(target: &str, parents: &[Variable], exo_parents: &[Variable], f: F) -> Self
    where
        F: Fn(&Assignment) -> Value,
    {
        let all: Vec<Variable> = parents.iter().chain(exo_parents).cloned().collect();
        let table = product(&all)
            .map(|row| {
                let a: Assignment = all
                    .iter()
                    .zip(&row)
                    .map(|(v, x)| (v.name.clone(), x.clone()))
                    .collect();
                let out = f(&a);
                (row, out)
            })
            .collect();
        Mechanism {
            target: target.to_string(),
            parents: parents.iter().map(|v| v.name.clone()).collect(),
            exo_parents: exo_parents.iter().map(|v| v.name.clone()).collect(),
            table,
        }
    }

    pub fn constant(target: &str, value: Value) -> Self {
        let mut table = BTreeMap::new();
        table.insert(Vec::new(), value);
        Mechanism {
            target: target.to_string(),
            parents: Vec::new(),
            exo_parents: Vec::new(),
            table,
        }
    }

    pub fn apply(&self, endo: &Assignment, exo: &Assignment) -> Result<Value> {
        let mut key = Vec::with_capacity(self.parents.len() + self.exo_parents.len());
        for p in &self.parents {
            key.push(
                endo.get(p)
                    .ok_or_else(|| Error::input(format!("{} needs parent {p}", self.target)))?
                    .clone(),
            );
        }
        for p in &self.exo_parents {
            key.push(
                exo.get(p)
                    .ok_or_else(|| Error::input(format!("missing exogenous value for {p}")))?
                    .clone(),
            );
        }
        self.table.get(&key).cloned().ok_or_else(|| {
            Error::input(format!(
                "mechanism for {} has no entry for inputs {:?}",
                self.target, key
            ))
        })
    }
}

/// Distribution over full exogenous assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoDistribution {
    pub atoms: Vec<(Assignment, f64)>,
    /// Exact probabilities, present when every atom was given as a decimal
    /// string or built from rationals.
    pub exact: Option<Vec<Ratio<i64>>>,
}

impl ExoDistribution {
    pub fn new(atoms: Vec<(Assignment, f64)>) -> Self {
        ExoDistribution { atoms, exact: None }
    }

    pub fn exact(atoms: Vec<(Assignment, Ratio<i64>)>) -> Self {
        let exact = atoms.iter().map(|(_, r)| *r).collect();
        ExoDistribution {
            atoms: atoms.into_iter().map(|(a, r)| (a, ratio_to_f64(r))).collect(),
            exact: Some(exact),
        }
    }

    /// Uniform distribution over the values of a single variable.
    pub fn uniform(var: &Variable) -> Self {
        let n = var.domain.len() as i64;
        ExoDistribution::exact(
            var.domain
                .iter()
                .map(|v| {
                    let mut a = Assignment::new();
                    a.insert(var.name.clone(), v.clone());
                    (a, Ratio::new(1, n))
                })
                .collect(),
        )
    }

    /// Independent product of two distributions over disjoint variables.
    pub fn product(&self, other: &ExoDistribution) -> Self {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        let mut exact = match (&self.exact, &other.exact) {
            (Some(_), Some(_)) => Some(Vec::new()),
            _ => None,
        };
        for (i, (a, p)) in self.atoms.iter().enumerate() {
            for (j, (b, q)) in other.atoms.iter().enumerate() {
                let mut ab = a.clone();
                ab.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
                atoms.push((ab, p * q));
                if let (Some(out), Some(x), Some(y)) = (&mut exact, &self.exact, &other.exact) {
                    match x[i].checked_mul(&y[j]) {
                        Some(r) => out.push(r),
                        None => exact = None,
                    }
                }
            }
        }
        ExoDistribution { atoms, exact }
    }

    fn validate(&self, exogenous: &[Variable]) -> Result<()> {
        let mut seen = BTreeSet::new();
        let mut total = 0.0;
        for (a, p) in &self.atoms {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::input(format!(
                    "exogenous atom {} has invalid probability {p}",
                    display_assignment(a)
                )));
            }
            if a.len() != exogenous.len() {
                return Err(Error::input(format!(
                    "exogenous atom {} must assign every exogenous variable",
                    display_assignment(a)
                )));
            }
            for var in exogenous {
                match a.get(&var.name) {
                    Some(v) if var.contains(v) => {}
                    Some(v) => {
                        return Err(Error::input(format!(
                            "exogenous value {v} outside the domain of {}",
                            var.name
                        )))
                    }
                    None => {
                        return Err(Error::input(format!(
                            "exogenous atom {} misses {}",
                            display_assignment(a),
                            var.name
                        )))
                    }
                }
            }
            if !seen.insert(a.clone()) {
                return Err(Error::input(format!(
                    "exogenous atom {} listed twice",
                    display_assignment(a)
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > EXO_TOLERANCE {
            return Err(Error::input(format!("exogenous probabilities sum to {total}")));
        }
        if let Some(exact) = &self.exact {
            let sum = exact.iter().fold(Ratio::new(0, 1), |acc, r| acc + r);
            if sum != Ratio::new(1, 1) {
                return Err(Error::input(format!("exact exogenous probabilities sum to {sum}")));
            }
        }
        Ok(())
    }
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses a plain decimal such as `0.2` or `1` into an exact ratio.
pub fn parse_decimal(text: &str) -> Option<Ratio<i64>> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if frac.len() > 15 {
        return None;
    }
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let int_v: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_v: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let num = int_v.checked_mul(den)?.checked_add(frac_v)?;
    Some(Ratio::new(if neg { -num } else { num }, den))
}

/// Mechanism and exogenous replacement for a set of target variables.
#[derive(Debug, Clone, Default)]
pub struct Shift {
    pub targets: BTreeSet<String>,
    pub mechanisms: BTreeMap<String, Mechanism>,
    /// Fresh exogenous variables, independent of the existing ones.
    pub exogenous: Option<(Vec<Variable>, ExoDistribution)>,
}

impl Shift {
    /// Atomic shift `target <- value`, equivalent to an intervention.
    pub fn constant(target: &str, value: Value) -> Self {
        Shift {
            targets: [target.to_string()].into_iter().collect(),
            mechanisms: [(target.to_string(), Mechanism::constant(target, value))]
                .into_iter()
                .collect(),
            exogenous: None,
        }
    }

    /// Replaces `target` by a draw from `dist` through one fresh exogenous
    /// variable named `U_<target>_shift`.
    pub fn stochastic(target: &Variable, dist: &[(Value, f64)]) -> Result<Self> {
        let name = format!("U_{}_shift", target.name);
        let values: Vec<Value> = dist.iter().map(|(v, _)| v.clone()).collect();
        let exo_var = Variable::new(name.clone(), values)?;
        let atoms = dist
            .iter()
            .map(|(v, p)| {
                let mut a = Assignment::new();
                a.insert(name.clone(), v.clone());
                (a, *p)
            })
            .collect();
        let mech = Mechanism::tabulate(&target.name, &[], std::slice::from_ref(&exo_var), |a| {
            a[&name].clone()
        });
        Ok(Shift {
            targets: [target.name.clone()].into_iter().collect(),
            mechanisms: [(target.name.clone(), mech)].into_iter().collect(),
            exogenous: Some((vec![exo_var], ExoDistribution::new(atoms))),
        })
    }
}

/// A recursive structural causal model over finite domains.
#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    endogenous: Vec<Variable>,
    exogenous: Vec<Variable>,
    mechanisms: BTreeMap<String, Mechanism>,
    exo: ExoDistribution,
    order: Vec<String>,
}

impl Scm {
    pub fn new(
        endogenous: Vec<Variable>,
        exogenous: Vec<Variable>,
        mechanisms: Vec<Mechanism>,
        exo: ExoDistribution,
    ) -> Result<Self> {
        let mut names = BTreeSet::new();
        for v in endogenous.iter().chain(&exogenous) {
            v.validate()?;
            if !names.insert(v.name.clone()) {
                return Err(Error::model(format!("variable {} declared twice", v.name)));
            }
        }
        let mut by_target = BTreeMap::new();
        for m in mechanisms {
            if by_target.contains_key(&m.target) {
                return Err(Error::model(format!("two mechanisms for {}", m.target)));
            }
            by_target.insert(m.target.clone(), m);
        }
        for v in &endogenous {
            let m = by_target
                .get(&v.name)
                .ok_or_else(|| Error::model(format!("no mechanism for {}", v.name)))?;
            check_mechanism(m, v, &endogenous, &exogenous)?;
        }
        if let Some(extra) = by_target.keys().find(|k| !endogenous.iter().any(|v| &v.name == *k)) {
            return Err(Error::model(format!("mechanism for undeclared variable {extra}")));
        }
        exo.validate(&exogenous)?;
        let order = topological_order(&endogenous, &by_target)?;
        Ok(Scm {
            endogenous,
            exogenous,
            mechanisms: by_target,
            exo,
            order,
        })
    }

    pub fn endogenous(&self) -> &[Variable] {
        &self.endogenous
    }

    pub fn exogenous(&self) -> &[Variable] {
        &self.exogenous
    }

    pub fn exo_distribution(&self) -> &ExoDistribution {
        &self.exo
    }

    pub fn mechanism(&self, name: &str) -> Option<&Mechanism> {
        self.mechanisms.get(name)
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.endogenous
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::input(format!("unknown endogenous variable {name}")))
    }

    /// Potential response `V(u)`.
    pub fn evaluate(&self, u: &Assignment) -> Result<Assignment> {
        for var in &self.exogenous {
            match u.get(&var.name) {
                None => return Err(Error::input(format!("missing exogenous value for {}", var.name))),
                Some(v) if !var.contains(v) => {
                    return Err(Error::input(format!(
                        "exogenous value {v} outside the domain of {}",
                        var.name
                    )))
                }
                _ => {}
            }
        }
        let mut out = Assignment::new();
        for name in &self.order {
            let v = self.mechanisms[name].apply(&out, u)?;
            out.insert(name.clone(), v);
        }
        Ok(out)
    }

    /// Sub-model `M_x` with the intervened mechanisms replaced by constants.
    pub fn submodel(&self, iv: &Intervention) -> Result<Scm> {
        let mut out = self.clone();
        for (k, v) in iv {
            let var = self.variable(k)?;
            if !var.contains(v) {
                return Err(Error::input(format!("value {v} outside the domain of {k}")));
            }
            out.mechanisms.insert(k.clone(), Mechanism::constant(k, v.clone()));
        }
        out.order = topological_order(&out.endogenous, &out.mechanisms)?;
        Ok(out)
    }

    /// Shifted model `M_sigma`.
    pub fn apply_shift(&self, sh: &Shift) -> Result<Scm> {
        if sh.targets.is_empty() && sh.exogenous.is_none() {
            return Ok(self.clone());
        }
        let mut mechanisms: Vec<Mechanism> = Vec::new();
        for v in &self.endogenous {
            if sh.targets.contains(&v.name) {
                let m = sh.mechanisms.get(&v.name).ok_or_else(|| {
                    Error::Unsupported(format!(
                        "shift on {} has no replacement mechanism; use the symbolic bounds instead",
                        v.name
                    ))
                })?;
                mechanisms.push(m.clone());
            } else {
                mechanisms.push(self.mechanisms[&v.name].clone());
            }
        }
        for t in &sh.targets {
            self.variable(t)?;
        }
        let (exogenous, exo) = match &sh.exogenous {
            None => (self.exogenous.clone(), self.exo.clone()),
            Some((vars, dist)) => {
                let mut all = self.exogenous.clone();
                all.extend(vars.iter().cloned());
                (all, self.exo.product(dist))
            }
        };
        Scm::new(self.endogenous.clone(), exogenous, mechanisms, exo)
    }

    /// Replaces the exogenous distribution, keeping everything else.
    pub fn with_exo_distribution(&self, exo: ExoDistribution) -> Result<Scm> {
        exo.validate(&self.exogenous)?;
        let mut out = self.clone();
        out.exo = exo;
        Ok(out)
    }

    /// Distribution of the endogenous variables.
    pub fn joint_distribution(&self) -> Result<DistTable> {
        let mut acc: BTreeMap<Assignment, f64> = BTreeMap::new();
        for (u, p) in &self.exo.atoms {
            if *p == 0.0 {
                continue;
            }
            let v = self.evaluate(u)?;
            *acc.entry(v).or_insert(0.0) += p;
        }
        DistTable::new(self.endogenous.clone(), acc)
    }

    /// Exact joint distribution when the exogenous probabilities are exact.
    pub fn joint_distribution_exact(&self) -> Result<Option<BTreeMap<Assignment, Ratio<i64>>>> {
        let Some(exact) = &self.exo.exact else {
            return Ok(None);
        };
        let mut acc: BTreeMap<Assignment, Ratio<i64>> = BTreeMap::new();
        for ((u, _), r) in self.exo.atoms.iter().zip(exact) {
            let v = self.evaluate(u)?;
            let slot = acc.entry(v).or_insert(Ratio::new(0, 1));
            *slot += r;
        }
        Ok(Some(acc))
    }

    /// Interventional distribution `P_x(V)`.
    pub fn interventional(&self, iv: &Intervention) -> Result<DistTable> {
        self.submodel(iv)?.joint_distribution()
    }

    /// Mass of exogenous atoms under which every `(do(x), event)` pair holds
    /// in its sub-model.
    pub fn counterfactual_probability(&self, events: &[(Intervention, Assignment)]) -> Result<f64> {
        let subs: Vec<Scm> = events
            .iter()
            .map(|(iv, _)| self.submodel(iv))
            .collect::<Result<_>>()?;
        for (_, ev) in events {
            for k in ev.keys() {
                self.variable(k)?;
            }
        }
        let mut holds = Vec::with_capacity(self.exo.atoms.len());
        'atoms: for (u, _) in &self.exo.atoms {
            for (sub, (_, ev)) in subs.iter().zip(events) {
                let v = sub.evaluate(u)?;
                if ev.iter().any(|(k, x)| &v[k] != x) {
                    holds.push(false);
                    continue 'atoms;
                }
            }
            holds.push(true);
        }
        // Atoms are validated to sum to one, so all-or-nothing is exact.
        if holds.iter().all(|h| *h) {
            return Ok(1.0);
        }
        if let Some(exact) = &self.exo.exact {
            let mut total = Ratio::new(0, 1);
            for (r, h) in exact.iter().zip(&holds) {
                if *h {
                    total += r;
                }
            }
            return Ok(ratio_to_f64(total));
        }
        Ok(self
            .exo
            .atoms
            .iter()
            .zip(&holds)
            .filter(|(_, h)| **h)
            .map(|((_, p), _)| p)
            .sum())
    }
}

fn check_mechanism(
    m: &Mechanism,
    target: &Variable,
    endogenous: &[Variable],
    exogenous: &[Variable],
) -> Result<()> {
    let mut inputs = Vec::new();
    for p in &m.parents {
        let v = endogenous
            .iter()
            .find(|v| &v.name == p)
            .ok_or_else(|| Error::model(format!("{} has unknown parent {p}", m.target)))?;
        inputs.push(v.clone());
    }
    for p in &m.exo_parents {
        let v = exogenous
            .iter()
            .find(|v| &v.name == p)
            .ok_or_else(|| Error::model(format!("{} has unknown exogenous parent {p}", m.target)))?;
        inputs.push(v.clone());
    }
    let expected: usize = inputs.iter().map(|v| v.domain.len()).product();
    if m.table.len() != expected {
        return Err(Error::model(format!(
            "mechanism for {} has {} rows, expected {expected}",
            m.target,
            m.table.len()
        )));
    }
    for (key, out) in &m.table {
        if key.len() != inputs.len() || !key.iter().zip(&inputs).all(|(x, v)| v.contains(x)) {
            return Err(Error::model(format!(
                "mechanism for {} has an entry outside its parent domains",
                m.target
            )));
        }
        if !target.contains(out) {
            return Err(Error::model(format!(
                "mechanism for {} outputs {out}, outside its domain",
                m.target
            )));
        }
    }
    Ok(())
}

fn topological_order(
    endogenous: &[Variable],
    mechanisms: &BTreeMap<String, Mechanism>,
) -> Result<Vec<String>> {
    let mut order = Vec::with_capacity(endogenous.len());
    let mut placed = BTreeSet::new();
    while order.len() < endogenous.len() {
        let next = endogenous.iter().find(|v| {
            !placed.contains(&v.name)
                && mechanisms[&v.name].parents.iter().all(|p| placed.contains(p))
        });
        match next {
            Some(v) => {
                placed.insert(v.name.clone());
                order.push(v.name.clone());
            }
            None => return Err(Error::model("mechanisms form a cycle")),
        }
    }
    Ok(order)
}

// ---------------------------------------------------------------------------
// JSON description

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub domain: Vec<Value>,
    #[serde(default)]
    pub parents: Vec<String>,
    #[serde(default)]
    pub exo_parents: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomSpec {
    pub assignment: Assignment,
    pub p: Prob,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowSpec {
    #[serde(default)]
    pub given: Assignment,
    pub value: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScmFile {
    pub variables: Vec<VariableSpec>,
    pub exogenous: Vec<Variable>,
    pub exogenous_distribution: Vec<AtomSpec>,
    pub mechanisms: BTreeMap<String, Vec<RowSpec>>,
}

impl Scm {
    pub fn from_file(file: &ScmFile) -> Result<Scm> {
        let endogenous: Vec<Variable> = file
            .variables
            .iter()
            .map(|v| Variable::new(v.name.clone(), v.domain.clone()))
            .collect::<Result<_>>()?;
        let mut mechanisms = Vec::new();
        for spec in &file.variables {
            let rows = file
                .mechanisms
                .get(&spec.name)
                .ok_or_else(|| Error::model(format!("no mechanism rows for {}", spec.name)))?;
            let mut table = BTreeMap::new();
            for row in rows {
                let mut key = Vec::new();
                for p in spec.parents.iter().chain(&spec.exo_parents) {
                    key.push(
                        row.given
                            .get(p)
                            .ok_or_else(|| {
                                Error::model(format!("row for {} does not give {p}", spec.name))
                            })?
                            .clone(),
                    );
                }
                if row.given.len() != key.len() {
                    return Err(Error::model(format!(
                        "row for {} names variables outside its parents",
                        spec.name
                    )));
                }
                if table.insert(key, row.value.clone()).is_some() {
                    return Err(Error::model(format!("duplicate row in mechanism for {}", spec.name)));
                }
            }
            mechanisms.push(Mechanism {
                target: spec.name.clone(),
                parents: spec.parents.clone(),
                exo_parents: spec.exo_parents.clone(),
                table,
            });
        }
        let mut floats = Vec::new();
        let mut exact = Some(Vec::new());
        for atom in &file.exogenous_distribution {
            match &atom.p {
                Prob::Num(x) => {
                    floats.push((atom.assignment.clone(), *x));
                    exact = None;
                }
                Prob::Text(s) => {
                    let x: f64 = s
                        .trim()
                        .parse()
                        .map_err(|_| Error::input(format!("cannot read probability {s:?}")))?;
                    floats.push((atom.assignment.clone(), x));
                    match (parse_decimal(s), exact.as_mut()) {
                        (Some(r), Some(list)) => list.push(r),
                        _ => exact = None,
                    }
                }
            }
        }
        let exo = ExoDistribution {
            atoms: floats,
            exact,
        };
        Scm::new(endogenous, file.exogenous.clone(), mechanisms, exo)
    }

    pub fn to_file(&self) -> ScmFile {
        let variables = self
            .endogenous
            .iter()
            .map(|v| {
                let m = &self.mechanisms[&v.name];
                VariableSpec {
                    name: v.name.clone(),
                    domain: v.domain.clone(),
                    parents: m.parents.clone(),
                    exo_parents: m.exo_parents.clone(),
                }
            })
            .collect();
        let exogenous_distribution = self
            .exo
            .atoms
            .iter()
            .enumerate()
            .map(|(i, (a, p))| AtomSpec {
                assignment: a.clone(),
                p: match &self.exo.exact {
                    Some(ex) => Prob::Text(format_ratio(ex[i]).unwrap_or_else(|| p.to_string())),
                    None => Prob::Num(*p),
                },
            })
            .collect();
        let mechanisms = self
            .mechanisms
            .iter()
            .map(|(name, m)| {
                let keys: Vec<&String> = m.parents.iter().chain(&m.exo_parents).collect();
                let rows = m
                    .table
                    .iter()
                    .map(|(key, value)| RowSpec {
                        given: keys
                            .iter()
                            .zip(key)
                            .map(|(k, v)| ((*k).clone(), v.clone()))
                            .collect(),
                        value: value.clone(),
                    })
                    .collect();
                (name.clone(), rows)
            })
            .collect();
        ScmFile {
            variables,
            exogenous: self.exogenous.clone(),
            exogenous_distribution,
            mechanisms,
        }
    }

    pub fn from_json(text: &str) -> Result<Scm> {
        let file: ScmFile = serde_json::from_str(text)?;
        Scm::from_file(&file)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// Writes a ratio as a terminating decimal when its denominator allows it.
fn format_ratio(r: Ratio<i64>) -> Option<String> {
    let mut den = *r.denom();
    let mut scale = 0u32;
    for f in [2, 5] {
        while den % f == 0 {
            den /= f;
        }
    }
    if den != 1 {
        return None;
    }
    let mut d = *r.denom();
    while d != 1 {
        scale += 1;
        if d % 10 == 0 {
            d /= 10;
        } else if d % 2 == 0 {
            d /= 2;
        } else {
            d /= 5;
        }
    }
    let scale = scale.min(18);
    let factor = 10i64.checked_pow(scale)?;
    let scaled = i64::checked_mul(*r.numer(), factor / r.denom())?;
    if scale == 0 {
        return Some(scaled.to_string());
    }
    let neg = scaled < 0;
    let digits = format!("{:0>width$}", scaled.abs(), width = scale as usize + 1);
    let (i, f) = digits.split_at(digits.len() - scale as usize);
    let f = f.trim_end_matches('0');
    let body = if f.is_empty() { i.to_string() } else { format!("{i}.{f}") };
    Some(if neg { format!("-{body}") } else { body })
}
