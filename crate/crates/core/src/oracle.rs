//! Exact bounds by optimisation over canonical response-type models, and the
//! witness models that attain the closed-form bounds.
//!
//! A canonical model gives every non-decision variable a response function
//! from its parents' values to its own domain. A joint distribution over
//! response-function profiles (an *atom* distribution) is a point of a
//! polytope cut out by the observed tables. Gap bounds are then linear or
//! linear-fractional programs over that polytope.

use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::BehaviouralDataset;
use crate::error::{Error, Result};
use crate::lp::{Cmp, Lp, LpError, Sense};
use crate::scm::{ExoDistribution, Mechanism, Scm};
use crate::table::DistTable;
use crate::value::{display_assignment, merge, product, Assignment, Value, Variable};

pub const DEFAULT_ATOM_LIMIT: u128 = 1_000_000;
pub const ATOM_LIMIT_ENV: &str = "BELIEFBOUND_ATOM_LIMIT";

/// Atom limit from the environment, falling back to the default.
pub fn atom_limit() -> u128 {
    std::env::var(ATOM_LIMIT_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_ATOM_LIMIT)
}

/// Parent declaration for every non-decision variable, e.g. `Z<-;Y<-D,Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub decision: String,
    /// `(variable, parents)` in a topological order.
    pub nodes: Vec<(String, Vec<String>)>,
}

impl Skeleton {
    pub fn parse(decision: &str, text: &str) -> Result<Skeleton> {
        let mut nodes = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, parents) = part
                .split_once("<-")
                .ok_or_else(|| Error::input(format!("expected VAR<-PARENTS, got {part:?}")))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::input(format!("missing variable name in {part:?}")));
            }
            let parents: Vec<String> = parents
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(str::to_string)
                .collect();
            nodes.push((name.to_string(), parents));
        }
        Skeleton::new(decision, nodes)
    }

    pub fn new(decision: &str, nodes: Vec<(String, Vec<String>)>) -> Result<Skeleton> {
        let names: BTreeSet<&str> = nodes.iter().map(|(n, _)| n.as_str()).collect();
        if names.len() != nodes.len() {
            return Err(Error::input("skeleton declares a variable twice"));
        }
        if names.contains(decision) {
            return Err(Error::input("the decision has no response function; do not declare it"));
        }
        for (n, ps) in &nodes {
            for p in ps {
                if p != decision && !names.contains(p.as_str()) {
                    return Err(Error::input(format!("{n} has undeclared parent {p}")));
                }
            }
        }
        let mut ordered: Vec<(String, Vec<String>)> = Vec::new();
        let mut placed: BTreeSet<String> = BTreeSet::new();
        while ordered.len() < nodes.len() {
            let next = nodes.iter().find(|(n, ps)| {
                !placed.contains(n) && ps.iter().all(|p| p == decision || placed.contains(p))
            });
            match next {
                Some(node) => {
                    placed.insert(node.0.clone());
                    ordered.push(node.clone());
                }
                None => return Err(Error::model("skeleton is cyclic")),
            }
        }
        Ok(Skeleton {
            decision: decision.to_string(),
            nodes: ordered,
        })
    }
}

#[derive(Debug, Clone)]
struct Node {
    var: Variable,
    /// Parent positions: `None` is the decision, `Some(i)` the i-th node.
    parents: Vec<Option<usize>>,
    n_responses: usize,
    stride: usize,
}

/// Product space of response functions.
#[derive(Debug, Clone)]
pub struct CanonicalSpace {
    pub decision: Variable,
    nodes: Vec<Node>,
    pub atoms: usize,
}

/// Response-function count and total atom count, saturating on overflow.
fn count(domains: &[(usize, usize)]) -> (Vec<u128>, u128) {
    let mut per = Vec::new();
    let mut total: u128 = 1;
    for &(nd, configs) in domains {
        let mut r: u128 = 1;
        for _ in 0..configs {
            r = r.saturating_mul(nd as u128);
        }
        per.push(r);
        total = total.saturating_mul(r);
    }
    (per, total)
}

impl CanonicalSpace {
    pub fn new(decision: &Variable, vars: &[Variable], skel: &Skeleton) -> Result<Self> {
        Self::with_limit(decision, vars, skel, atom_limit())
    }

    pub fn with_limit(
        decision: &Variable,
        vars: &[Variable],
        skel: &Skeleton,
        limit: u128,
    ) -> Result<Self> {
        if skel.decision != decision.name {
            return Err(Error::input(format!(
                "skeleton decision {} differs from data decision {}",
                skel.decision, decision.name
            )));
        }
        let declared: BTreeSet<&str> = skel.nodes.iter().map(|(n, _)| n.as_str()).collect();
        let given: BTreeSet<&str> = vars.iter().map(|v| v.name.as_str()).collect();
        if declared != given {
            return Err(Error::input(format!(
                "skeleton variables {declared:?} differ from data variables {given:?}"
            )));
        }
        let mut nodes: Vec<Node> = Vec::new();
        let mut shape = Vec::new();
        for (name, parents) in &skel.nodes {
            let var = vars.iter().find(|v| &v.name == name).expect("checked above").clone();
            let mut idx = Vec::new();
            let mut configs = 1usize;
            for p in parents {
                if p == &decision.name {
                    idx.push(None);
                    configs = configs.saturating_mul(decision.domain.len());
                } else {
                    let i = nodes.iter().position(|n| &n.var.name == p).expect("topological");
                    configs = configs.saturating_mul(nodes[i].var.domain.len());
                    idx.push(Some(i));
                }
            }
            shape.push((var.domain.len(), configs));
            nodes.push(Node {
                var,
                parents: idx,
                n_responses: 0,
                stride: 0,
            });
        }
        let (per, total) = count(&shape);
        if total > limit {
            return Err(Error::AtomLimit {
                atoms: total,
                limit,
            });
        }
        let mut stride = 1usize;
        for (node, r) in nodes.iter_mut().zip(per).rev() {
            node.n_responses = r as usize;
            node.stride = stride;
            stride *= r as usize;
        }
        Ok(CanonicalSpace {
            decision: decision.clone(),
            nodes,
            atoms: total as usize,
        })
    }

    pub fn variables(&self) -> Vec<Variable> {
        self.nodes.iter().map(|n| n.var.clone()).collect()
    }

    /// Response-function index of node `i` in atom `a`.
    fn response(&self, a: usize, i: usize) -> usize {
        (a / self.nodes[i].stride) % self.nodes[i].n_responses
    }

    /// Output index of response function `r` of node `i` at parent config `k`.
    fn output(&self, i: usize, r: usize, k: usize) -> usize {
        let nd = self.nodes[i].var.domain.len();
        let mut r = r;
        for _ in 0..k {
            r /= nd;
        }
        r % nd
    }

    fn config(&self, i: usize, d: usize, vals: &[usize]) -> usize {
        let mut k = 0;
        for p in &self.nodes[i].parents {
            let (v, n) = match p {
                None => (d, self.decision.domain.len()),
                Some(j) => (vals[*j], self.nodes[*j].var.domain.len()),
            };
            k = k * n + v;
        }
        k
    }

    /// Value indices of every node for atom `a` under `do(d)` plus the
    /// optional per-node pins.
    fn evaluate(&self, a: usize, d: usize, pins: &[Option<usize>]) -> Vec<usize> {
        let mut vals = vec![0usize; self.nodes.len()];
        for i in 0..self.nodes.len() {
            vals[i] = match pins[i] {
                Some(v) => v,
                None => {
                    let k = self.config(i, d, &vals);
                    self.output(i, self.response(a, i), k)
                }
            };
        }
        vals
    }

    fn pins(&self, iv: &Assignment) -> Result<Vec<Option<usize>>> {
        let mut pins = vec![None; self.nodes.len()];
        for (k, v) in iv {
            let i = self
                .nodes
                .iter()
                .position(|n| &n.var.name == k)
                .ok_or_else(|| Error::input(format!("cannot intervene on unknown variable {k}")))?;
            pins[i] = Some(
                self.nodes[i]
                    .var
                    .index_of(v)
                    .ok_or_else(|| Error::input(format!("value {v} outside the domain of {k}")))?,
            );
        }
        Ok(pins)
    }

    fn decision_index(&self, d: &Value) -> Result<usize> {
        self.decision
            .index_of(d)
            .ok_or_else(|| Error::input(format!("unknown decision {d}")))
    }

    fn matches(&self, vals: &[usize], event: &[(usize, usize)]) -> bool {
        event.iter().all(|&(i, v)| vals[i] == v)
    }

    fn event(&self, a: &Assignment) -> Result<Vec<(usize, usize)>> {
        let pins = self.pins(a)?;
        Ok(pins
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|v| (i, v)))
            .collect())
    }

    fn numeric(&self, name: &str) -> Result<(usize, Vec<f64>)> {
        let i = self
            .nodes
            .iter()
            .position(|n| n.var.name == name)
            .ok_or_else(|| Error::input(format!("unknown variable {name}")))?;
        Ok((i, self.nodes[i].var.numeric_domain()?))
    }
}

/// Atom distributions compatible with the observed tables.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub space: CanonicalSpace,
    pub utility: String,
    /// Equality rows `A p = b`; the last row is the simplex constraint.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub data_rows: usize,
}

impl Polytope {
    pub fn atoms(&self) -> usize {
        self.space.atoms
    }

    fn add_rows(&self, lp: &mut Lp, offset_t: Option<usize>) {
        let n = self.atoms();
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            let mut r = row.clone();
            match offset_t {
                Some(t) => {
                    r.resize(t + 1, 0.0);
                    r[t] = -b;
                    lp.add(r, Cmp::Eq, 0.0);
                }
                None => {
                    r.resize(n, 0.0);
                    lp.add(r, Cmp::Eq, *b);
                }
            }
        }
    }
}

fn lp_error(e: LpError) -> Error {
    match e {
        LpError::Infeasible => {
            Error::Data("infeasible polytope: no model reproduces these tables".into())
        }
        other => Error::Internal(other.to_string()),
    }
}

/// One equality per observed cell for every decision and domain, plus the
/// simplex row. Fails with a data error if no atom distribution fits.
pub fn build_polytope(data: &BehaviouralDataset, skel: &Skeleton) -> Result<Polytope> {
    let first = data.table(&data.decision.domain[0])?;
    let vars = first.scope().to_vec();
    let space = CanonicalSpace::new(&data.decision, &vars, skel)?;
    let n = space.atoms;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut regimes: Vec<(&Assignment, &std::collections::BTreeMap<Value, DistTable>)> = Vec::new();
    let empty = Assignment::new();
    regimes.push((&empty, &data.per_decision));
    for dom in &data.experiments {
        regimes.push((&dom.intervened, &dom.per_decision));
    }
    // Table scope order is by name; map it to node order.
    let order: Vec<usize> = vars
        .iter()
        .map(|v| space.nodes.iter().position(|n| n.var.name == v.name).expect("same set"))
        .collect();
    let cells: Vec<Vec<Value>> = product(&vars).collect();
    for (iv, tables) in regimes {
        let pins = space.pins(iv)?;
        for d in &data.decision.domain {
            let di = space.decision_index(d)?;
            let t = tables
                .get(d)
                .ok_or_else(|| Error::input(format!("missing table for decision {d}")))?;
            let mut block = vec![vec![0.0; n]; cells.len()];
            for a in 0..n {
                let vals = space.evaluate(a, di, &pins);
                let mut cell = 0usize;
                for (k, &i) in order.iter().enumerate() {
                    cell = cell * vars[k].domain.len() + vals[i];
                }
                block[cell][a] = 1.0;
            }
            for (cell, row) in cells.iter().zip(block) {
                let a: Assignment = vars
                    .iter()
                    .zip(cell)
                    .map(|(v, x)| (v.name.clone(), x.clone()))
                    .collect();
                rhs.push(t.prob(&a)?);
                rows.push(row);
            }
        }
    }
    let data_rows = rows.len();
    rows.push(vec![1.0; n]);
    rhs.push(1.0);
    let poly = Polytope {
        space,
        utility: data.utility.clone(),
        rows,
        rhs,
        data_rows,
    };
    feasible_point(&poly, None)?;
    Ok(poly)
}

/// A point of the polytope; optimises `objective` (minimising) if given.
pub fn feasible_point(p: &Polytope, objective: Option<&[f64]>) -> Result<Vec<f64>> {
    let n = p.atoms();
    let obj = objective.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut lp = Lp::new(n, Sense::Min, obj);
    p.add_rows(&mut lp, None);
    let sol = lp.solve().map_err(lp_error)?;
    Ok(sol.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// Per-atom objective pieces for `Delta(d over d_star)` under `do(z)` given `c`.
fn gap_terms(
    p: &Polytope,
    z: &Assignment,
    c: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<(Vec<f64>, Vec<f64>)> {
    merge(c, z)?;
    let s = &p.space;
    let pins = s.pins(z)?;
    let ev = s.event(c)?;
    let (yi, ynum) = s.numeric(&p.utility)?;
    let (di, si) = (s.decision_index(d)?, s.decision_index(d_star)?);
    let mut obj = Vec::with_capacity(s.atoms);
    let mut den = Vec::with_capacity(s.atoms);
    for a in 0..s.atoms {
        let vd = s.evaluate(a, di, &pins);
        let vs = s.evaluate(a, si, &pins);
        let (cd, cs) = (s.matches(&vd, &ev), s.matches(&vs, &ev));
        if cd != cs {
            return Err(Error::Unsupported(format!(
                "context {} depends on the decision; the gap is not a single linear-fractional program",
                display_assignment(c)
            )));
        }
        let ind = if cd { 1.0 } else { 0.0 };
        obj.push(ind * (ynum[vd[yi]] - ynum[vs[yi]]));
        den.push(ind);
    }
    Ok((obj, den))
}

/// Exact optimum of the preference gap over every canonical model that
/// reproduces the data.
pub fn optimize_gap(
    p: &Polytope,
    z: &Assignment,
    c: &Assignment,
    d: &Value,
    d_star: &Value,
    direction: Direction,
) -> Result<f64> {
    optimize_gap_point(p, z, c, d, d_star, direction).map(|(v, _)| v)
}

/// As [`optimize_gap`], also returning an optimal atom distribution.
pub fn optimize_gap_point(
    p: &Polytope,
    z: &Assignment,
    c: &Assignment,
    d: &Value,
    d_star: &Value,
    direction: Direction,
) -> Result<(f64, Vec<f64>)> {
    let (obj, den) = gap_terms(p, z, c, d, d_star)?;
    let n = p.atoms();
    let sense = match direction {
        Direction::Min => Sense::Min,
        Direction::Max => Sense::Max,
    };
    if den.iter().all(|&x| x == 1.0) {
        let mut lp = Lp::new(n, sense, obj);
        p.add_rows(&mut lp, None);
        let sol = lp.solve().map_err(lp_error)?;
        return Ok((sol.value, sol.x));
    }
    // The context must keep positive mass for every compatible model.
    let mut lp = Lp::new(n, Sense::Min, den.clone());
    p.add_rows(&mut lp, None);
    let min_mass = lp.solve().map_err(lp_error)?.value;
    if min_mass <= 1e-12 {
        return Err(Error::domain(format!(
            "context {} can have zero probability after the shift",
            display_assignment(c)
        )));
    }
    // Charnes-Cooper: q = p / P(c), t = 1 / P(c).
    let t = n;
    let mut cc_obj = obj;
    cc_obj.push(0.0);
    let mut lp = Lp::new(n + 1, sense, cc_obj);
    p.add_rows(&mut lp, Some(t));
    let mut norm = den;
    norm.push(0.0);
    lp.add(norm, Cmp::Eq, 1.0);
    let sol = lp.solve().map_err(lp_error)?;
    let scale = sol.x[t];
    if scale <= 0.0 {
        return Err(Error::Internal("fractional program returned a zero scale".into()));
    }
    let q: Vec<f64> = sol.x[..n].iter().map(|x| x / scale).collect();
    Ok((sol.value, q))
}

/// Concrete model whose single exogenous variable `R` picks an atom with
/// the given probabilities.
pub fn scm_from_point(p: &Polytope, q: &[f64]) -> Result<Scm> {
    let s = &p.space;
    if q.len() != s.atoms {
        return Err(Error::input("atom vector has the wrong length"));
    }
    let support: Vec<usize> = (0..s.atoms).filter(|&a| q[a] > 1e-15).collect();
    let total: f64 = support.iter().map(|&a| q[a]).sum();
    if support.is_empty() || total <= 0.0 {
        return Err(Error::Data("atom vector has no mass".into()));
    }
    let r = Variable::new("R", support.iter().map(|&a| Value::Int(a as i64)).collect())?;
    let atoms = support
        .iter()
        .map(|&a| {
            let mut u = Assignment::new();
            u.insert("R".into(), Value::Int(a as i64));
            (u, q[a] / total)
        })
        .collect();
    let mut endo = vec![s.decision.clone()];
    let mut mechs = vec![Mechanism::constant(&s.decision.name, s.decision.domain[0].clone())];
    for (i, node) in s.nodes.iter().enumerate() {
        let parent_vars: Vec<Variable> = node
            .parents
            .iter()
            .map(|p| match p {
                None => s.decision.clone(),
                Some(j) => s.nodes[*j].var.clone(),
            })
            .collect();
        let mech = Mechanism::tabulate(&node.var.name, &parent_vars, std::slice::from_ref(&r), |a| {
            let atom = match &a["R"] {
                Value::Int(x) => *x as usize,
                Value::Sym(_) => 0,
            };
            let mut k = 0;
            for pv in &parent_vars {
                k = k * pv.domain.len() + pv.index_of(&a[&pv.name]).unwrap_or(0);
            }
            node.var.domain[s.output(i, s.response(atom, i), k)].clone()
        });
        endo.push(node.var.clone());
        mechs.push(mech);
    }
    Scm::new(endo, vec![r], mechs, ExoDistribution::new(atoms))
}

/// Some model reproducing the data.
pub fn feasible_scm(p: &Polytope) -> Result<Scm> {
    let q = feasible_point(p, None)?;
    scm_from_point(p, &q)
}

/// `E[Y | c]` under `do(d, z)` minus the same under `do(d_star, z)`.
pub fn scm_preference_gap(
    scm: &Scm,
    decision: &str,
    utility: &str,
    z: &Assignment,
    c: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<f64> {
    let mean = |dv: &Value| -> Result<f64> {
        let mut iv = z.clone();
        iv.insert(decision.to_string(), dv.clone());
        scm.interventional(&iv)?.expectation(utility, c)
    };
    Ok(mean(d)? - mean(d_star)?)
}

/// Model reproducing `base`'s behaviour whose gap `Delta(d over d_star)`
/// under `do(z)` given `c` equals the closed-form lower bound.
///
/// Units whose natural `Z` differs from `z` are the ones the data say
/// nothing about after the shift. The witness sends them into context `c`
/// and gives them the worst outcome under `d` and the best under `d_star`.
pub fn witness_intervention_scm(
    base: &Scm,
    decision: &str,
    utility: &str,
    z: &Assignment,
    c: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<Scm> {
    merge(c, z)?;
    let dvar = base.variable(decision)?.clone();
    let yvar = base.variable(utility)?.clone();
    if z.contains_key(utility) || c.contains_key(utility) || z.contains_key(decision) {
        return Err(Error::input("shift and context must not pin the utility or decision"));
    }
    let y_lo = yvar.numeric_min()?;
    let y_hi = yvar.numeric_max()?;
    // Natural Z per exogenous atom; must not depend on the decision.
    let mut natural: BTreeMap<Assignment, Assignment> = BTreeMap::new();
    for (u, _) in &base.exo_distribution().atoms {
        let mut seen: Option<Assignment> = None;
        for dv in &dvar.domain {
            let mut iv = Assignment::new();
            iv.insert(decision.to_string(), dv.clone());
            let vals = base.submodel(&iv)?.evaluate(u)?;
            let zs: Assignment = z.keys().map(|k| (k.clone(), vals[k].clone())).collect();
            match &seen {
                Some(prev) if prev != &zs => {
                    return Err(Error::Unsupported(
                        "shifted variables depend on the decision".into(),
                    ))
                }
                _ => seen = Some(zs),
            }
        }
        natural.insert(u.clone(), seen.unwrap_or_default());
    }
    let exo = base.exogenous().to_vec();
    let mut mechs = Vec::new();
    for v in base.endogenous() {
        let m = base.mechanism(&v.name).expect("complete model");
        let clamp_c = c.contains_key(&v.name) && !z.contains_key(&v.name);
        let is_y = v.name == utility;
        if !clamp_c && !is_y {
            mechs.push(m.clone());
            continue;
        }
        let mut parent_names: Vec<String> = m.parents.clone();
        for k in z.keys() {
            if !parent_names.contains(k) {
                parent_names.push(k.clone());
            }
        }
        if is_y && !parent_names.iter().any(|p| p == decision) {
            parent_names.push(decision.to_string());
        }
        let parent_vars: Vec<Variable> = parent_names
            .iter()
            .map(|n| base.variable(n).cloned())
            .collect::<Result<_>>()?;
        let target = v.name.clone();
        let table_fn = |a: &Assignment| -> Value {
            let u: Assignment = exo.iter().map(|x| (x.name.clone(), a[&x.name].clone())).collect();
            let nat = &natural[&u];
            let actual_is_natural = nat.iter().all(|(k, x)| &a[k] == x);
            if actual_is_natural {
                return m.apply(a, a).expect("base mechanism is total");
            }
            if clamp_c {
                return c[&target].clone();
            }
            let dv = &a[decision];
            if dv == d {
                y_lo.clone()
            } else if dv == d_star {
                y_hi.clone()
            } else {
                m.apply(a, a).expect("base mechanism is total")
            }
        };
        mechs.push(Mechanism::tabulate(&v.name, &parent_vars, &exo, table_fn));
    }
    Scm::new(
        base.endogenous().to_vec(),
        exo.clone(),
        mechs,
        base.exo_distribution().clone(),
    )
}

/// Joint law of the response types `(r_z, r_y)` for binary `Z` and `Y`.
///
/// `p[a][b]` is the mass with `r_z = a` (so `Z = a`) and `r_y = b`, where
/// `r_y` maps `z` to `0`, `z`, `1 - z` and `1` for `b = 0, 1, 2, 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseTable {
    pub p: [[f64; 4]; 2],
}

fn response_y(b: usize, z: usize) -> usize {
    match b {
        0 => 0,
        1 => z,
        2 => 1 - z,
        _ => 1,
    }
}

fn zy_masses(t: &DistTable) -> Result<[[f64; 2]; 2]> {
    let mut m = [[0.0; 2]; 2];
    if t.scope().len() != 2 {
        return Err(Error::input("response tables need a table over exactly Z and Y"));
    }
    for (a, p) in t.iter() {
        let mut idx = [0usize; 2];
        for (slot, var) in idx.iter_mut().zip(t.scope()) {
            let x = a[&var.name].as_f64().unwrap_or(-1.0);
            *slot = match x {
                x if x == 0.0 => 0,
                x if x == 1.0 => 1,
                _ => return Err(Error::input(format!("{} must take values 0 and 1", var.name))),
            };
        }
        // Scope is sorted by name; callers pass (Y, Z).
        m[idx[1]][idx[0]] += p;
    }
    Ok(m)
}

impl ResponseTable {
    /// Law with no `r_y = 3` mass reproducing `P(z, y)` from a table over
    /// `Y` and `Z`.
    pub fn canonical_low(t: &DistTable) -> Result<Self> {
        let m = zy_masses(t)?;
        let mut p = [[0.0; 4]; 2];
        p[0][0] = m[0][0];
        p[1][0] = m[1][0];
        p[1][1] = m[1][1];
        p[0][2] = m[0][1];
        Ok(ResponseTable { p })
    }

    /// Law with no `r_y = 0` mass reproducing `P(z, y)`.
    pub fn canonical_high(t: &DistTable) -> Result<Self> {
        let m = zy_masses(t)?;
        let mut p = [[0.0; 4]; 2];
        p[0][3] = m[0][1];
        p[1][3] = m[1][1];
        p[1][2] = m[1][0];
        p[0][1] = m[0][0];
        Ok(ResponseTable { p })
    }

    pub fn row_sums(&self) -> [f64; 4] {
        let mut s = [0.0; 4];
        for (b, slot) in s.iter_mut().enumerate() {
            *slot = self.p[0][b] + self.p[1][b];
        }
        s
    }

    /// `P(Z = z, Y = y)` as `[z][y]`.
    pub fn observed(&self) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..4 {
                m[a][response_y(b, a)] += self.p[a][b];
            }
        }
        m
    }

    /// Moves the `r_y = 1` row to `Z = 0` and the `r_y = 2` row to `Z = 1`,
    /// where both yield `Y = 0`. Rows 0 and 3 are untouched.
    pub fn shift_low(&self) -> Self {
        let mut p = self.p;
        p[0][1] = self.p[0][1] + self.p[1][1];
        p[1][1] = 0.0;
        p[1][2] = self.p[0][2] + self.p[1][2];
        p[0][2] = 0.0;
        ResponseTable { p }
    }

    /// Mirror of [`shift_low`](Self::shift_low): the moved rows now yield
    /// `Y = 1`.
    pub fn shift_high(&self) -> Self {
        let mut p = self.p;
        p[1][1] = self.p[0][1] + self.p[1][1];
        p[0][1] = 0.0;
        p[0][2] = self.p[0][2] + self.p[1][2];
        p[1][2] = 0.0;
        ResponseTable { p }
    }
}

/// Canonical model with one response-type variable `R_<i>` per decision.
/// `Z` and `Y` read the block belonging to the chosen decision.
pub fn response_scm(decision: &Variable, tables: &[ResponseTable]) -> Result<Scm> {
    if tables.len() != decision.domain.len() {
        return Err(Error::input("need one response table per decision"));
    }
    let rvars: Vec<Variable> = (0..tables.len())
        .map(|i| Variable::range(format!("R_{i}"), 0, 7))
        .collect();
    let mut dist: Option<ExoDistribution> = None;
    for (i, t) in tables.iter().enumerate() {
        let atoms = (0..8)
            .map(|k| {
                let mut u = Assignment::new();
                u.insert(format!("R_{i}"), Value::Int(k as i64));
                (u, t.p[k / 4][k % 4])
            })
            .collect();
        let block = ExoDistribution::new(atoms);
        dist = Some(match dist {
            None => block,
            Some(prev) => prev.product(&block),
        });
    }
    let dist = dist.ok_or_else(|| Error::input("no decisions"))?;
    let zvar = Variable::binary("Z");
    let yvar = Variable::binary("Y");
    let dname = decision.name.clone();
    let pick = |a: &Assignment| -> usize {
        let i = decision.index_of(&a[&dname]).unwrap_or(0);
        match &a[&format!("R_{i}")] {
            Value::Int(k) => *k as usize,
            Value::Sym(_) => 0,
        }
    };
    let mz = Mechanism::tabulate("Z", std::slice::from_ref(decision), &rvars, |a| {
        Value::Int((pick(a) / 4) as i64)
    });
    let my = Mechanism::tabulate("Y", &[decision.clone(), zvar.clone()], &rvars, |a| {
        let z = match &a["Z"] {
            Value::Int(z) => *z as usize,
            Value::Sym(_) => 0,
        };
        Value::Int(response_y(pick(a) % 4, z) as i64)
    });
    Scm::new(
        vec![decision.clone(), zvar, yvar],
        rvars,
        vec![
            Mechanism::constant(&decision.name, decision.domain[0].clone()),
            mz,
            my,
        ],
        dist,
    )
}

/// Unshifted and shifted canonical models for the unknown-shift bound.
#[derive(Debug, Clone)]
pub struct ShiftWitness {
    pub base: Scm,
    pub shifted: Scm,
    pub base_tables: Vec<ResponseTable>,
    pub shifted_tables: Vec<ResponseTable>,
}

/// Two shifted models, both compatible with the data, whose gaps
/// `Delta(d over d_star)` are `-1` and `+1`. Each shift changes only the
/// response-type law of `Z` and keeps the `r_y` marginal of every decision.
pub fn unknown_shift_witnesses(
    data: &BehaviouralDataset,
    d: &Value,
    d_star: &Value,
) -> Result<(ShiftWitness, ShiftWitness)> {
    let build = |d_low: &Value| -> Result<ShiftWitness> {
        let mut base_tables = Vec::new();
        let mut shifted_tables = Vec::new();
        for dv in &data.decision.domain {
            let t = data.table(dv)?;
            let (b, s) = if dv == d_low {
                let b = ResponseTable::canonical_low(t)?;
                (b, b.shift_low())
            } else {
                let b = ResponseTable::canonical_high(t)?;
                (b, b.shift_high())
            };
            base_tables.push(b);
            shifted_tables.push(s);
        }
        Ok(ShiftWitness {
            base: response_scm(&data.decision, &base_tables)?,
            shifted: response_scm(&data.decision, &shifted_tables)?,
            base_tables,
            shifted_tables,
        })
    };
    if d == d_star {
        return Err(Error::input("need two different decisions"));
    }
    Ok((build(d)?, build(d_star)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::intervention_gap_interval;
    use crate::fixtures;
    use crate::value::assign;

    fn v(i: i64) -> Value {
        Value::Int(i)
    }

    fn skel() -> Skeleton {
        Skeleton::parse("D", "Z<-;Y<-D,Z").unwrap()
    }

    #[test]
    fn skeleton_parsing() {
        let s = Skeleton::parse("D", "Y<-D,Z; Z<-").unwrap();
        assert_eq!(s.nodes[0].0, "Z");
        assert!(Skeleton::parse("D", "Y<-X").is_err());
        assert!(Skeleton::parse("D", "Y<-Z;Z<-Y").is_err());
        assert!(Skeleton::parse("D", "D<-").is_err());
        assert!(Skeleton::parse("D", "Y").is_err());
    }

    #[test]
    fn medai_polytope_shape() {
        let p = build_polytope(&fixtures::medai_dataset().unwrap(), &skel()).unwrap();
        assert_eq!(p.atoms(), 32);
        assert_eq!(p.data_rows, 8);
        assert_eq!(p.rows.len(), 9);
    }

    #[test]
    fn single_variable_space() {
        let t = DistTable::new(
            vec![Variable::binary("Y")],
            [(assign([("Y", 1)]), 0.3), (assign([("Y", 0)]), 0.7)],
        )
        .unwrap();
        let per = [(v(0), t.clone()), (v(1), t)].into_iter().collect();
        let ds = BehaviouralDataset::new(Variable::binary("D"), "Y", per).unwrap();
        let p = build_polytope(&ds, &Skeleton::parse("D", "Y<-").unwrap()).unwrap();
        assert_eq!(p.atoms(), 2);
        let q = feasible_point(&p, None).unwrap();
        assert!((q[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn medai_gap_optimum() {
        let ds = fixtures::medai_dataset().unwrap();
        let p = build_polytope(&ds, &skel()).unwrap();
        let z = assign([("Z", 1)]);
        let lo = optimize_gap(&p, &z, &z, &v(1), &v(0), Direction::Min).unwrap();
        assert!((lo + 0.4).abs() < 1e-9);
        let lo = optimize_gap(&p, &z, &z, &v(0), &v(1), Direction::Min).unwrap();
        assert!((lo + 0.8).abs() < 1e-9);
        let hi = optimize_gap(&p, &z, &z, &v(1), &v(0), Direction::Max).unwrap();
        assert!((hi - 0.8).abs() < 1e-9);
    }

    #[test]
    fn uniform_gap_optimum() {
        let rows = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let t = DistTable::new(
            vec![Variable::binary("Z"), Variable::binary("Y")],
            rows.iter().map(|&(z, y)| (assign([("Z", z), ("Y", y)]), 0.25)),
        )
        .unwrap();
        let per = [(v(0), t.clone()), (v(1), t)].into_iter().collect();
        let ds = BehaviouralDataset::new(Variable::binary("D"), "Y", per).unwrap();
        let p = build_polytope(&ds, &skel()).unwrap();
        let z = assign([("Z", 1)]);
        let lo = optimize_gap(&p, &z, &z, &v(1), &v(0), Direction::Min).unwrap();
        assert!((lo + 0.5).abs() < 1e-9);
    }

    #[test]
    fn inconsistent_tables_are_infeasible() {
        let bad = fixtures::medai_dataset().unwrap();
        let t = DistTable::new(
            vec![Variable::binary("Y"), Variable::binary("Z")],
            [(assign([("Z", 1), ("Y", 1)]), 1.0)],
        )
        .unwrap();
        let exp = crate::dataset::Domain {
            label: "bad".into(),
            intervened: assign([("Z", 0)]),
            per_decision: [(v(0), t.clone()), (v(1), t)].into_iter().collect(),
        };
        let bad = bad.with_experiment(exp).unwrap();
        let err = build_polytope(&bad, &skel()).unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("infeasible polytope")));
    }

    #[test]
    fn experiment_point_identifies() {
        let ds = fixtures::medai_with_experiment().unwrap();
        let p = build_polytope(&ds, &skel()).unwrap();
        let z = assign([("Z", 1)]);
        let lo = optimize_gap(&p, &z, &z, &v(1), &v(0), Direction::Min).unwrap();
        let hi = optimize_gap(&p, &z, &z, &v(1), &v(0), Direction::Max).unwrap();
        assert!((lo - 0.6).abs() < 1e-9 && (hi - 0.6).abs() < 1e-9);
    }

    #[test]
    fn feasible_scm_reproduces_data() {
        let ds = fixtures::medai_dataset().unwrap();
        let p = build_polytope(&ds, &skel()).unwrap();
        let scm = feasible_scm(&p).unwrap();
        let back = BehaviouralDataset::from_scm(&scm, "D", "Y").unwrap();
        for d in [0, 1] {
            let a = back.table(&v(d)).unwrap();
            assert!(a.max_abs_diff(ds.table(&v(d)).unwrap()).unwrap() < 1e-9);
        }
    }

    #[test]
    fn atom_limit_guard() {
        let ds = fixtures::medai_dataset().unwrap();
        let first = ds.table(&v(0)).unwrap().scope().to_vec();
        let err = CanonicalSpace::with_limit(&ds.decision, &first, &skel(), 10).unwrap_err();
        assert!(matches!(err, Error::AtomLimit { atoms: 32, limit: 10 }));
    }

    /// Data from `Z <- U; C <- Z, U; Y <- D, C, U` with a skewed `U`.
    fn chain_dataset() -> BehaviouralDataset {
        let d = Variable::binary("D");
        let (z, c, y) = (Variable::binary("Z"), Variable::binary("C"), Variable::binary("Y"));
        let u = Variable::range("U", 0, 7);
        let bit = |a: &Assignment, k: i64| match a["U"] {
            Value::Int(x) => (x >> k) & 1,
            _ => 0,
        };
        let mechs = vec![
            Mechanism::constant("D", v(0)),
            Mechanism::tabulate("Z", &[], std::slice::from_ref(&u), |a| v(bit(a, 0))),
            Mechanism::tabulate("C", std::slice::from_ref(&z), std::slice::from_ref(&u), |a| {
                v(if a["Z"] == v(1) { 1 - bit(a, 1) * bit(a, 2) } else { bit(a, 1) })
            }),
            Mechanism::tabulate("Y", &[d.clone(), c.clone()], std::slice::from_ref(&u), |a| {
                let dv = if a["D"] == v(1) { 1 } else { 0 };
                let cv = if a["C"] == v(1) { 1 } else { 0 };
                v((bit(a, 2) ^ (dv & cv)) | (bit(a, 0) & (1 - dv)))
            }),
        ];
        let weights = [0.05, 0.2, 0.1, 0.15, 0.1, 0.05, 0.25, 0.1];
        let atoms = (0..8)
            .map(|k| (assign([("U", k)]), weights[k as usize]))
            .collect();
        let scm = Scm::new(vec![d, z, c, y], vec![u], mechs, ExoDistribution::new(atoms)).unwrap();
        BehaviouralDataset::from_scm(&scm, "D", "Y").unwrap()
    }

    #[test]
    fn conditional_context_uses_fractional_program() {
        // C responds to Z; context {C=1} is not pinned by the shift.
        let skel = Skeleton::parse("D", "Z<-;C<-Z;Y<-D,Z,C").unwrap();
        let ds = chain_dataset();
        let p = build_polytope(&ds, &skel).unwrap();
        let z = assign([("Z", 1)]);
        let c = assign([("C", 1)]);
        let g = intervention_gap_interval(&ds, &c, &z, &v(1), &v(0)).unwrap();
        let lo = optimize_gap(&p, &z, &c, &v(1), &v(0), Direction::Min).unwrap();
        let hi = optimize_gap(&p, &z, &c, &v(1), &v(0), Direction::Max).unwrap();
        assert!((lo - g.lower).abs() < 1e-9, "{lo} vs {}", g.lower);
        assert!((hi - g.upper).abs() < 1e-9, "{hi} vs {}", g.upper);
    }

    #[test]
    fn exclusion_restriction_tightens() {
        // Y ignoring Z given C exposes Y at C=1 for units outside the shift.
        let ds = chain_dataset();
        let p = build_polytope(&ds, &Skeleton::parse("D", "Z<-;C<-Z;Y<-D,C").unwrap()).unwrap();
        let z = assign([("Z", 1)]);
        let c = assign([("C", 1)]);
        let g = intervention_gap_interval(&ds, &c, &z, &v(1), &v(0)).unwrap();
        let lo = optimize_gap(&p, &z, &c, &v(1), &v(0), Direction::Min).unwrap();
        assert!(lo > g.lower + 1e-3);
    }

    #[test]
    fn decision_dependent_context_is_refused() {
        let skel = Skeleton::parse("D", "Z<-;C<-D;Y<-D,C,Z").unwrap();
        let vars = [Variable::binary("C"), Variable::binary("Y"), Variable::binary("Z")];
        let cells: Vec<_> = product(&vars)
            .map(|row| {
                let a: Assignment = vars
                    .iter()
                    .zip(row)
                    .map(|(v, x)| (v.name.clone(), x))
                    .collect();
                (a, 0.125)
            })
            .collect();
        let t = DistTable::new(vars.to_vec(), cells).unwrap();
        let per = [(v(0), t.clone()), (v(1), t)].into_iter().collect();
        let ds = BehaviouralDataset::new(Variable::binary("D"), "Y", per).unwrap();
        let p = build_polytope(&ds, &skel).unwrap();
        let err = optimize_gap(&p, &assign([("Z", 1)]), &assign([("C", 1)]), &v(1), &v(0), Direction::Min);
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn witness_attains_lower_bound() {
        let ds = fixtures::medai_dataset().unwrap();
        let p = build_polytope(&ds, &skel()).unwrap();
        let base = feasible_scm(&p).unwrap();
        let z = assign([("Z", 1)]);
        for (d, s, want) in [(1, 0, -0.4), (0, 1, -0.8)] {
            let w = witness_intervention_scm(&base, "D", "Y", &z, &z, &v(d), &v(s)).unwrap();
            let gap = scm_preference_gap(&w, "D", "Y", &z, &z, &v(d), &v(s)).unwrap();
            assert!((gap - want).abs() < 1e-9);
            let back = BehaviouralDataset::from_scm(&w, "D", "Y").unwrap();
            let orig = BehaviouralDataset::from_scm(&base, "D", "Y").unwrap();
            for dv in [0, 1] {
                let diff = back.table(&v(dv)).unwrap().max_abs_diff(orig.table(&v(dv)).unwrap());
                assert!(diff.unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn witness_on_environment_model() {
        let m1 = fixtures::medai_env().unwrap();
        let z = assign([("Z", 1)]);
        let w = witness_intervention_scm(&m1, "D", "Y", &z, &z, &v(1), &v(0)).unwrap();
        let gap = scm_preference_gap(&w, "D", "Y", &z, &z, &v(1), &v(0)).unwrap();
        assert!((gap + 0.4).abs() < 1e-12);
    }

    #[test]
    fn unknown_shift_witnesses_reach_both_ends() {
        let ds = fixtures::medai_dataset().unwrap();
        let none = Assignment::new();
        let (low, high) = unknown_shift_witnesses(&ds, &v(1), &v(0)).unwrap();
        let g = scm_preference_gap(&low.shifted, "D", "Y", &none, &none, &v(1), &v(0)).unwrap();
        assert!((g + 1.0).abs() < 1e-12);
        let g = scm_preference_gap(&high.shifted, "D", "Y", &none, &none, &v(1), &v(0)).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        for w in [&low, &high] {
            for (b, s) in w.base_tables.iter().zip(&w.shifted_tables) {
                assert_eq!(b.row_sums(), s.row_sums());
            }
            let back = BehaviouralDataset::from_scm(&w.base, "D", "Y").unwrap();
            for dv in [0, 1] {
                let diff = back.table(&v(dv)).unwrap().max_abs_diff(ds.table(&v(dv)).unwrap());
                assert!(diff.unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_response_table() {
        let t = DistTable::new(
            vec![Variable::binary("Y"), Variable::binary("Z")],
            [(assign([("Z", 1), ("Y", 1)]), 0.5), (assign([("Z", 0), ("Y", 1)]), 0.5)],
        )
        .unwrap();
        let r = ResponseTable::canonical_high(&t).unwrap();
        for s in [r.shift_low(), r.shift_high()] {
            let m = s.observed();
            assert!((m[0][1] + m[1][1] - 1.0).abs() < 1e-15);
        }
    }
}
