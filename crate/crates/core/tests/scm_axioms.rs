mod common;

use beliefbound::{Assignment, Shift};
use common::{random_dag, rng, v};
use proptest::prelude::*;
use rand::Rng;

fn random_intervention(seed: u64, names: &[String]) -> Assignment {
    let mut r = rng(seed ^ 0x5eed);
    let mut x = Assignment::new();
    for n in names {
        if r.random_bool(0.4) {
            x.insert(n.clone(), v(r.random_range(0..2)));
        }
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_is_normalised(seed in any::<u64>()) {
        let scm = random_dag(seed);
        let total: f64 = scm.joint_distribution().unwrap().iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composition(seed in any::<u64>()) {
        let scm = random_dag(seed);
        let names = scm.order().to_vec();
        let x = random_intervention(seed, &names);
        let sub = scm.submodel(&x).unwrap();
        for (u, _) in &scm.exo_distribution().atoms {
            let vals = sub.evaluate(u).unwrap();
            for w in names.iter().filter(|n| !x.contains_key(*n)) {
                let mut xw = x.clone();
                xw.insert(w.clone(), vals[w].clone());
                let again = scm.submodel(&xw).unwrap().evaluate(u).unwrap();
                prop_assert_eq!(&again, &vals);
            }
        }
    }

    #[test]
    fn effectiveness(seed in any::<u64>()) {
        let scm = random_dag(seed);
        let x = random_intervention(seed, scm.order());
        let p = scm.counterfactual_probability(&[(x.clone(), x)]).unwrap();
        prop_assert_eq!(p, 1.0);
    }

    #[test]
    fn constant_shift_is_intervention(seed in any::<u64>()) {
        let scm = random_dag(seed);
        let x = random_intervention(seed, scm.order());
        let mut shift = Shift::default();
        for (k, val) in &x {
            let one = Shift::constant(k, val.clone());
            shift.targets.extend(one.targets);
            shift.mechanisms.extend(one.mechanisms);
        }
        let shifted = scm.apply_shift(&shift).unwrap().joint_distribution().unwrap();
        let intervened = scm.interventional(&x).unwrap();
        prop_assert_eq!(shifted, intervened);
    }
}
