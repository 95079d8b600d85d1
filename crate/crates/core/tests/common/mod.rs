#![allow(dead_code)]

use beliefbound::{Assignment, ExoDistribution, Mechanism, Scm, Value, Variable};
use std::collections::BTreeMap;

use beliefbound::value::product;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(i: i64) -> Value {
    Value::Int(i)
}

/// Strictly positive weights summing to one.
pub fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn exo(rng: &mut ChaCha8Rng, atoms: i64) -> (Variable, ExoDistribution) {
    let u = Variable::range("U", 0, atoms - 1);
    let w = simplex(rng, atoms as usize);
    let dist = (0..atoms)
        .map(|k| {
            let mut a = Assignment::new();
            a.insert("U".into(), v(k));
            (a, w[k as usize])
        })
        .collect();
    (u, ExoDistribution::new(dist))
}

/// Binary mechanism with a random table over its parents and `U`.
fn random_mech(rng: &mut ChaCha8Rng, target: &str, parents: &[Variable], u: &Variable) -> Mechanism {
    let all: Vec<Variable> = parents.iter().chain(std::iter::once(u)).cloned().collect();
    let table: BTreeMap<Vec<Value>, Value> = product(&all)
        .map(|row| (row, v(rng.random_range(0..2))))
        .collect();
    Mechanism::tabulate(target, parents, std::slice::from_ref(u), |a| {
        let key: Vec<Value> = all.iter().map(|x| a[&x.name].clone()).collect();
        table[&key].clone()
    })
}

/// `D` constant; `Z <- U`; `Y <- D, Z, U`. Z and Y are confounded via `U`.
pub fn random_zy(seed: u64) -> Scm {
    let mut r = rng(seed);
    let atoms = r.random_range(4..=16);
    let (u, dist) = exo(&mut r, atoms);
    let (d, z) = (Variable::binary("D"), Variable::binary("Z"));
    let mz = random_mech(&mut r, "Z", &[], &u);
    let my = random_mech(&mut r, "Y", &[d.clone(), z.clone()], &u);
    Scm::new(
        vec![d, z, Variable::binary("Y")],
        vec![u],
        vec![Mechanism::constant("D", v(0)), mz, my],
        dist,
    )
    .unwrap()
}

/// `D` constant; `Z <- U`; `C <- Z, U`; `Y <- D, Z, C, U`.
pub fn random_zcy(seed: u64) -> Scm {
    let mut r = rng(seed);
    let atoms = r.random_range(4..=16);
    let (u, dist) = exo(&mut r, atoms);
    let (d, z, c) = (Variable::binary("D"), Variable::binary("Z"), Variable::binary("C"));
    let mz = random_mech(&mut r, "Z", &[], &u);
    let mc = random_mech(&mut r, "C", std::slice::from_ref(&z), &u);
    let my = random_mech(&mut r, "Y", &[d.clone(), z.clone(), c.clone()], &u);
    Scm::new(
        vec![d, z, c, Variable::binary("Y")],
        vec![u],
        vec![Mechanism::constant("D", v(0)), mz, mc, my],
        dist,
    )
    .unwrap()
}

/// Up to four binary variables `X0..`, each with a random subset of earlier
/// variables as parents, all reading `U`.
pub fn random_dag(seed: u64) -> Scm {
    let mut r = rng(seed);
    let n = r.random_range(2..=4);
    let atoms = r.random_range(2..=16);
    let (u, dist) = exo(&mut r, atoms);
    let vars: Vec<Variable> = (0..n).map(|i| Variable::binary(format!("X{i}"))).collect();
    let mut mechs = Vec::new();
    for i in 0..n {
        let parents: Vec<Variable> = vars[..i]
            .iter()
            .filter(|_| r.random_bool(0.6))
            .cloned()
            .collect();
        mechs.push(random_mech(&mut r, &vars[i].name, &parents, &u));
    }
    Scm::new(vars, vec![u], mechs, dist).unwrap()
}
