//! The medical-assistant example models and their derived tables.
//!
//! Both models share `U` uniform on `{1..5}` and `Z = 1{U in {1,4}}`. They
//! disagree on how `Y` responds to `Z` yet produce the same `P_d(Z, Y)` for
//! both decisions, so behavioural data cannot tell them apart.

use std::collections::BTreeMap;

use crate::dataset::{BehaviouralDataset, Domain, Policy};
use crate::error::Result;
use crate::scm::{ExoDistribution, Mechanism, Scm};
use crate::value::{assign, product, Value, Variable};

fn int(a: &crate::value::Assignment, k: &str) -> i64 {
    match &a[k] {
        Value::Int(i) => *i,
        Value::Sym(s) => s.parse().unwrap_or(0),
    }
}

fn build(y: fn(i64, i64, i64) -> bool, with_w: bool) -> Result<Scm> {
    let d = Variable::binary("D");
    let z = Variable::binary("Z");
    let yv = Variable::binary("Y");
    let u = Variable::range("U", 1, 5);
    let mut endo = vec![d.clone(), z.clone(), yv];
    let mut mechs = vec![
        Mechanism::constant("D", Value::Int(0)),
        Mechanism::tabulate("Z", &[], std::slice::from_ref(&u), |a| {
            Value::Int(matches!(int(a, "U"), 1 | 4) as i64)
        }),
        Mechanism::tabulate("Y", &[d, z], std::slice::from_ref(&u), move |a| {
            Value::Int(y(int(a, "D"), int(a, "Z"), int(a, "U")) as i64)
        }),
    ];
    if with_w {
        endo.push(Variable::binary("W"));
        mechs.push(Mechanism::tabulate("W", &[], std::slice::from_ref(&u), |a| {
            Value::Int(matches!(int(a, "U"), 1 | 2) as i64)
        }));
    }
    Scm::new(endo, vec![u.clone()], mechs, ExoDistribution::uniform(&u))
}

fn env_y(d: i64, z: i64, u: i64) -> bool {
    match (d, z) {
        (0, 1) => u == 4,
        (0, _) => matches!(u, 1 | 3 | 4),
        (_, 1) => u != 2,
        (_, _) => matches!(u, 2 | 4),
    }
}

fn alt_y(d: i64, z: i64, u: i64) -> bool {
    match (d, z) {
        (0, 1) => u != 1,
        (0, _) => matches!(u, 3 | 4),
        (_, 1) => matches!(u, 1 | 4),
        (_, _) => matches!(u, 1 | 2),
    }
}

/// The environment model.
pub fn medai_env() -> Result<Scm> {
    build(env_y, false)
}

/// An alternative internal model with the same observable behaviour.
pub fn medai_alt() -> Result<Scm> {
    build(alt_y, false)
}

/// The environment model with an extra covariate `W = 1{U in {1,2}}`.
pub fn medai_env_with_w() -> Result<Scm> {
    build(env_y, true)
}

/// `P_d(Z, Y)` for both decisions of the environment model.
pub fn medai_dataset() -> Result<BehaviouralDataset> {
    BehaviouralDataset::from_scm(&medai_env()?, "D", "Y")
}

/// The experiment run under `do(Z = 1)`.
pub fn medai_experiment() -> Result<Domain> {
    BehaviouralDataset::experiment_from_scm(&medai_env()?, "D", "do(Z=1)", &assign([("Z", 1)]))
}

pub fn medai_with_experiment() -> Result<BehaviouralDataset> {
    medai_dataset()?.with_experiment(medai_experiment()?)
}

/// Replaces the decision's mechanism by a draw from `pi` given its context.
///
/// Each context value gets its own independent exogenous draw, so the
/// decision depends on nothing but the context and fresh noise.
pub fn with_policy(scm: &Scm, pi: &Policy) -> Result<Scm> {
    let dname = pi.decision.name.clone();
    let contexts: Vec<Vec<Value>> = product(&pi.context).collect();
    let mut exo_vars = Vec::new();
    let mut dist = scm.exo_distribution().clone();
    for (i, key) in contexts.iter().enumerate() {
        let var = Variable::new(format!("U_pi_{i}"), pi.decision.domain.clone())?;
        let atoms = pi
            .decision
            .domain
            .iter()
            .map(|d| {
                let mut a = crate::value::Assignment::new();
                a.insert(var.name.clone(), d.clone());
                (a, pi.rows[key].get(d).copied().unwrap_or(0.0))
            })
            .collect();
        dist = dist.product(&ExoDistribution::new(atoms));
        exo_vars.push(var);
    }
    let index: BTreeMap<Vec<Value>, usize> =
        contexts.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let ctx_names: Vec<String> = pi.context.iter().map(|v| v.name.clone()).collect();
    let mech = Mechanism::tabulate(&dname, &pi.context, &exo_vars, |a| {
        let key: Vec<Value> = ctx_names.iter().map(|n| a[n].clone()).collect();
        a[&format!("U_pi_{}", index[&key])].clone()
    });
    let mut exogenous = scm.exogenous().to_vec();
    exogenous.extend(exo_vars);
    let mechanisms = scm
        .endogenous()
        .iter()
        .map(|v| {
            if v.name == dname {
                mech.clone()
            } else {
                scm.mechanism(&v.name).expect("every variable has a mechanism").clone()
            }
        })
        .collect();
    Scm::new(scm.endogenous().to_vec(), exogenous, mechanisms, dist)
}
