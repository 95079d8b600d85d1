//! Behavioural data: per-decision tables, experimental domains, policies and
//! log ingestion.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scm::Scm;
use crate::table::{estimate_from_samples, DistTable, TableFile};
use crate::value::{display_assignment, merge, product, Assignment, Value, Variable};

/// Per-decision tables collected while some variables were held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub label: String,
    /// The intervened set `R` together with its values.
    pub intervened: Assignment,
    pub per_decision: BTreeMap<Value, DistTable>,
}

/// What is known about an agent's behaviour: `P_d(V)` for every decision,
/// optionally under extra experimental regimes.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviouralDataset {
    pub decision: Variable,
    pub utility: String,
    pub per_decision: BTreeMap<Value, DistTable>,
    pub experiments: Vec<Domain>,
    /// Table over all variables including the decision, as logged under the
    /// training policy.
    pub observational: Option<DistTable>,
}

impl BehaviouralDataset {
    pub fn new(
        decision: Variable,
        utility: &str,
        per_decision: BTreeMap<Value, DistTable>,
    ) -> Result<Self> {
        let ds = BehaviouralDataset {
            decision,
            utility: utility.to_string(),
            per_decision,
            experiments: Vec::new(),
            observational: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        self.decision.validate()?;
        check_tables(&self.decision, &self.utility, &self.per_decision, "observed")?;
        let scope = self.scope_names();
        for dom in &self.experiments {
            check_tables(&self.decision, &self.utility, &dom.per_decision, &dom.label)?;
            let first = dom.per_decision.values().next().map(|t| t.scope_names());
            if first.as_ref() != Some(&scope) {
                return Err(Error::input(format!(
                    "domain {} does not share the observed scope",
                    dom.label
                )));
            }
            for k in dom.intervened.keys() {
                if !scope.contains(k) {
                    return Err(Error::input(format!(
                        "domain {} intervenes on unknown variable {k}",
                        dom.label
                    )));
                }
            }
        }
        if let Some(obs) = &self.observational {
            if !obs.has_variable(&self.decision.name) {
                return Err(Error::input("observational table lacks the decision variable"));
            }
        }
        Ok(())
    }

    /// Variable names shared by all per-decision tables.
    pub fn scope_names(&self) -> Vec<String> {
        self.per_decision
            .values()
            .next()
            .map(|t| t.scope_names())
            .unwrap_or_default()
    }

    pub fn decisions(&self) -> Vec<Value> {
        self.decision.domain.clone()
    }

    pub fn table(&self, d: &Value) -> Result<&DistTable> {
        self.per_decision
            .get(d)
            .ok_or_else(|| Error::input(format!("no data for decision {}={d}", self.decision.name)))
    }

    pub fn utility_variable(&self) -> Result<&Variable> {
        self.table(&self.decision.domain[0])?.variable(&self.utility)
    }

    pub fn with_experiment(mut self, dom: Domain) -> Result<Self> {
        self.experiments.push(dom);
        self.validate()?;
        Ok(self)
    }

    /// Reads `P_d(V \ {D})` for every decision off a model.
    pub fn from_scm(scm: &Scm, decision: &str, utility: &str) -> Result<Self> {
        let dvar = scm.variable(decision)?.clone();
        let per_decision = interventional_tables(scm, &dvar, &Assignment::new())?;
        BehaviouralDataset::new(dvar, utility, per_decision)
    }

    /// Tables of `scm` under `do(d, r)` for every decision `d`.
    pub fn experiment_from_scm(
        scm: &Scm,
        decision: &str,
        label: &str,
        intervened: &Assignment,
    ) -> Result<Domain> {
        let dvar = scm.variable(decision)?.clone();
        Ok(Domain {
            label: label.to_string(),
            intervened: intervened.clone(),
            per_decision: interventional_tables(scm, &dvar, intervened)?,
        })
    }

    pub fn to_file(&self) -> DatasetFile {
        DatasetFile {
            decision: self.decision.clone(),
            utility: self.utility.clone(),
            per_decision: tables_to_file(&self.per_decision),
            domains: self
                .experiments
                .iter()
                .map(|d| DomainFile {
                    label: d.label.clone(),
                    intervened: d.intervened.clone(),
                    per_decision: tables_to_file(&d.per_decision),
                })
                .collect(),
            observational: self.observational.as_ref().map(|t| t.to_file()),
        }
    }

    pub fn from_file(file: DatasetFile) -> Result<Self> {
        let ds = BehaviouralDataset {
            decision: file.decision,
            utility: file.utility,
            per_decision: tables_from_file(file.per_decision)?,
            experiments: file
                .domains
                .into_iter()
                .map(|d| {
                    Ok(Domain {
                        label: d.label,
                        intervened: d.intervened,
                        per_decision: tables_from_file(d.per_decision)?,
                    })
                })
                .collect::<Result<_>>()?,
            observational: file.observational.map(DistTable::from_file).transpose()?,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        BehaviouralDataset::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

fn interventional_tables(
    scm: &Scm,
    dvar: &Variable,
    extra: &Assignment,
) -> Result<BTreeMap<Value, DistTable>> {
    let keep: Vec<String> = scm
        .endogenous()
        .iter()
        .filter(|v| v.name != dvar.name)
        .map(|v| v.name.clone())
        .collect();
    let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
    let mut out = BTreeMap::new();
    for d in &dvar.domain {
        let mut iv = extra.clone();
        iv.insert(dvar.name.clone(), d.clone());
        let t = scm.interventional(&iv)?.marginal(&keep)?;
        out.insert(d.clone(), t);
    }
    Ok(out)
}

fn check_tables(
    decision: &Variable,
    utility: &str,
    tables: &BTreeMap<Value, DistTable>,
    label: &str,
) -> Result<()> {
    let mut scope: Option<Vec<Variable>> = None;
    for d in &decision.domain {
        let t = tables.get(d).ok_or_else(|| {
            Error::input(format!("{label} data has no table for {}={d}", decision.name))
        })?;
        if t.has_variable(&decision.name) {
            return Err(Error::input(format!(
                "{label} table for {}={d} must not include the decision variable",
                decision.name
            )));
        }
        match &scope {
            None => scope = Some(t.scope().to_vec()),
            Some(s) if s.as_slice() != t.scope() => {
                return Err(Error::input(format!("{label} tables do not share a scope")))
            }
            _ => {}
        }
    }
    if tables.keys().any(|k| !decision.contains(k)) {
        return Err(Error::input(format!("{label} data has a table for an unknown decision")));
    }
    let y = tables
        .values()
        .next()
        .ok_or_else(|| Error::input("dataset has no tables"))?
        .variable(utility)?;
    for x in y.numeric_domain()? {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::input(format!(
                "utility {utility} takes value {x}, outside [0, 1]"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionTable {
    pub decision: Value,
    pub table: TableFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainFile {
    pub label: String,
    pub intervened: Assignment,
    pub per_decision: Vec<DecisionTable>,
}

/// On-disk layout of a dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub decision: Variable,
    pub utility: String,
    pub per_decision: Vec<DecisionTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domains: Vec<DomainFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observational: Option<TableFile>,
}

fn tables_to_file(tables: &BTreeMap<Value, DistTable>) -> Vec<DecisionTable> {
    tables
        .iter()
        .map(|(d, t)| DecisionTable {
            decision: d.clone(),
            table: t.to_file(),
        })
        .collect()
}

fn tables_from_file(rows: Vec<DecisionTable>) -> Result<BTreeMap<Value, DistTable>> {
    let mut out = BTreeMap::new();
    for row in rows {
        let d = row.decision.clone();
        if out.insert(row.decision, DistTable::from_file(row.table)?).is_some() {
            return Err(Error::input(format!("decision {d} listed twice")));
        }
    }
    Ok(out)
}

/// Reads a weighted sample log: a header of variable names plus an optional
/// `weight` column.
pub fn read_log<R: Read>(reader: R) -> Result<Vec<(Assignment, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() {
        return Err(Error::input("log has no columns"));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut a = Assignment::new();
        let mut w = 1.0;
        for (h, cell) in headers.iter().zip(rec.iter()) {
            if h == "weight" {
                w = cell.parse::<f64>().map_err(|_| {
                    Error::input(format!("row {}: weight {cell:?} is not a number", line + 2))
                })?;
            } else {
                a.insert(h.clone(), Value::parse(cell));
            }
        }
        rows.push((a, w));
    }
    if rows.is_empty() {
        return Err(Error::input("log has no rows"));
    }
    Ok(rows)
}

/// Splits a sample log by decision and estimates every `P_d(V)`.
///
/// Domains are read off the whole log so all per-decision tables share one
/// scope.
pub fn dataset_from_log(
    rows: &[(Assignment, f64)],
    decision: &str,
    utility: &str,
) -> Result<BehaviouralDataset> {
    let all = estimate_from_samples(rows)?;
    let dvar = all.variable(decision)?.clone();
    let rest: Vec<Variable> = all
        .scope()
        .iter()
        .filter(|v| v.name != decision)
        .cloned()
        .collect();
    let mut per_decision = BTreeMap::new();
    for d in &dvar.domain {
        let sel: Vec<(Assignment, f64)> = rows
            .iter()
            .filter(|(a, _)| a.get(decision) == Some(d))
            .map(|(a, w)| {
                let mut a = a.clone();
                a.remove(decision);
                (a, *w)
            })
            .collect();
        let total: f64 = sel.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(Error::Data(format!("log has no weight for {decision}={d}")));
        }
        let t = DistTable::new(rest.clone(), sel.into_iter().map(|(a, w)| (a, w / total)))?;
        per_decision.insert(d.clone(), t);
    }
    let mut ds = BehaviouralDataset::new(dvar, utility, per_decision)?;
    ds.observational = Some(all);
    Ok(ds)
}

/// A stochastic policy `pi(d | c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub context: Vec<Variable>,
    pub decision: Variable,
    /// Keyed by context values in `context` order.
    pub rows: BTreeMap<Vec<Value>, BTreeMap<Value, f64>>,
}

impl Policy {
    pub fn new(
        context: Vec<Variable>,
        decision: Variable,
        rows: BTreeMap<Vec<Value>, BTreeMap<Value, f64>>,
    ) -> Result<Self> {
        for key in product(&context) {
            let row = rows.get(&key).ok_or_else(|| {
                Error::input(format!("policy has no row for context {key:?}"))
            })?;
            let total: f64 = row.values().sum();
            if (total - 1.0).abs() > 1e-12 || row.values().any(|p| *p < 0.0) {
                return Err(Error::input(format!(
                    "policy row for context {key:?} is not a distribution"
                )));
            }
            if row.keys().any(|d| !decision.contains(d)) {
                return Err(Error::input("policy assigns mass to an unknown decision"));
            }
        }
        Ok(Policy {
            context,
            decision,
            rows,
        })
    }

    /// The same distribution over decisions in every context.
    pub fn uniform(context: Vec<Variable>, decision: Variable) -> Result<Self> {
        let n = decision.domain.len() as f64;
        let row: BTreeMap<Value, f64> = decision.domain.iter().map(|d| (d.clone(), 1.0 / n)).collect();
        let rows = product(&context).map(|k| (k, row.clone())).collect();
        Policy::new(context, decision, rows)
    }

    pub fn prob(&self, context: &Assignment, d: &Value) -> Result<f64> {
        let key: Vec<Value> = self
            .context
            .iter()
            .map(|v| {
                context
                    .get(&v.name)
                    .cloned()
                    .ok_or_else(|| Error::input(format!("context misses {}", v.name)))
            })
            .collect::<Result<_>>()?;
        Ok(self.rows[&key].get(d).copied().unwrap_or(0.0))
    }
}

/// Converts data logged under a policy into the atomic-intervention table
/// `P_d(v) = P_pi(rest | d, c) P_pi(c)`, where `c` are the policy's inputs.
///
/// Valid when the policy's inputs are the only parents of the decision. The
/// result ranges over every variable except the decision.
pub fn policy_to_atomic(p_pi: &DistTable, pi: &Policy, d: &Value) -> Result<DistTable> {
    let dname = pi.decision.name.as_str();
    p_pi.variable(dname)?;
    let cnames: Vec<&str> = pi.context.iter().map(|v| v.name.as_str()).collect();
    let p_c = p_pi.marginal(&cnames)?;
    for (c, mass) in p_c.iter() {
        if mass <= 0.0 {
            continue;
        }
        let mut cd = c.clone();
        cd.insert(dname.to_string(), d.clone());
        if pi.prob(&c, d)? <= 0.0 || p_pi.prob(&cd)? <= 0.0 {
            return Err(Error::domain(format!(
                "decision {dname}={d} never taken in context {}",
                display_assignment(&c)
            )));
        }
    }
    let scope: Vec<Variable> = p_pi
        .scope()
        .iter()
        .filter(|v| v.name != dname)
        .cloned()
        .collect();
    let mut entries = Vec::new();
    for (c, pc) in p_c.iter() {
        let mut cd = c.clone();
        cd.insert(dname.to_string(), d.clone());
        let p_cd = p_pi.prob(&cd)?;
        for (v, p) in p_pi.iter() {
            if &v[dname] != d || !c.iter().all(|(k, x)| &v[k] == x) {
                continue;
            }
            let mut rest = v.clone();
            rest.remove(dname);
            entries.push((merge(&rest, &c)?, p / p_cd * pc));
        }
    }
    DistTable::new(scope, entries)
}
