mod common;

use beliefbound::bounds::{intervention_gap_interval, multidomain_gap_interval};
use beliefbound::predict::{strong_verdict, weak_verdict};
use beliefbound::value::assign;
use beliefbound::{Assignment, BehaviouralDataset, BoundSource, GapInterval, GapKind, Value};
use common::{random_zcy, v};
use proptest::prelude::*;

fn interval(lower: f64) -> GapInterval {
    GapInterval {
        lower,
        upper: 1.0,
        kind: GapKind::Preference,
        source: BoundSource::Intervention,
        tight: false,
        raw_lower: lower,
        raw_upper: 1.0,
        notes: Vec::new(),
        digest: String::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn larger_margin_rules_out_less(
        lowers in prop::collection::vec(-1.0f64..=1.0, 12),
        k in 2usize..=4,
        l1 in 0.0f64..=1.0,
        l2 in 0.0f64..=1.0,
    ) {
        let decisions: Vec<Value> = (0..k as i64).map(v).collect();
        let bound = |d: &Value, s: &Value| {
            let (i, j) = (decisions.iter().position(|x| x == d).unwrap(), decisions.iter().position(|x| x == s).unwrap());
            Ok(interval(lowers[i * 3 + j % 3]))
        };
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let loose = weak_verdict(bound, &decisions, lo).unwrap();
        let tight = weak_verdict(bound, &decisions, hi).unwrap();
        for d in &tight.ruled_out {
            prop_assert!(loose.ruled_out.contains(d));
        }
        let strong = strong_verdict(bound, &decisions, lo).unwrap();
        if let Some(w) = &strong.strong_winner {
            let mut rest: Vec<Value> = decisions.iter().filter(|d| *d != w).cloned().collect();
            rest.sort();
            let mut out = strong.ruled_out.clone();
            out.sort();
            prop_assert_eq!(out, rest);
        }
    }
}

/// `E[Y | c]` under `do(d, z)` in the hidden model.
fn true_value(scm: &beliefbound::Scm, d: &Value, z: &Assignment, c: &Assignment) -> Option<f64> {
    let mut iv = z.clone();
    iv.insert("D".into(), d.clone());
    scm.interventional(&iv).unwrap().expectation("Y", c).ok()
}

#[test]
fn true_optimum_is_never_ruled_out() {
    let decisions = [v(0), v(1)];
    let cases = [
        (assign([("Z", 1)]), assign([("Z", 1)])),
        (assign([("Z", 0)]), assign([("Z", 0), ("C", 1)])),
    ];
    let mut ruled = 0;
    for seed in 0..100u64 {
        let hidden = random_zcy(seed);
        let exp = BehaviouralDataset::experiment_from_scm(&hidden, "D", "do(Z=1)", &assign([("Z", 1)]))
            .unwrap();
        let data = BehaviouralDataset::from_scm(&hidden, "D", "Y")
            .unwrap()
            .with_experiment(exp)
            .unwrap();
        for (z, c) in &cases {
            let Some(t0) = true_value(&hidden, &v(0), z, c) else { continue };
            let Some(t1) = true_value(&hidden, &v(1), z, c) else { continue };
            let single = |d: &Value, s: &Value| intervention_gap_interval(&data, c, z, d, s);
            let multi = |d: &Value, s: &Value| multidomain_gap_interval(&data, c, z, d, s);
            let verdicts = [weak_verdict(single, &decisions, 0.0), weak_verdict(multi, &decisions, 0.0)];
            for verdict in verdicts {
                let Ok(verdict) = verdict else { continue };
                for d in &verdict.ruled_out {
                    ruled += 1;
                    let (mine, other) = if *d == v(0) { (t0, t1) } else { (t1, t0) };
                    assert!(mine < other, "seed {seed}: optimal decision {d} ruled out");
                }
            }
        }
    }
    // The suite must exercise the ruling-out path.
    assert!(ruled > 0);
}
