mod common;

use beliefbound::bounds::intervention_gap_interval;
use beliefbound::fixtures;
use beliefbound::relax::{
    approx_grounding_lower, partial_unconfoundedness_interval, proxy_alignment_lower,
    GroundingBall, Method, DEFAULT_CONCENTRATION,
};
use beliefbound::value::{assign, product};
use beliefbound::{Assignment, BehaviouralDataset, ExoDistribution, Mechanism, Scm, Value, Variable};
use common::{rng, simplex, v};
use rand::Rng;

fn z1() -> Assignment {
    assign([("Z", 1)])
}

#[test]
fn ball_bound_shrinks_with_radius() {
    let data = fixtures::medai_dataset().unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..=10 {
        let ball = GroundingBall::total_variation(k as f64 * 0.05).unwrap();
        let x = approx_grounding_lower(&data, &ball, &z1(), &z1(), &v(1), &v(0), Method::ExactLp)
            .unwrap();
        assert!(x <= prev + 1e-12);
        prev = x;
    }
}

#[test]
fn sampled_minimum_never_beats_exact() {
    let data = fixtures::medai_dataset().unwrap();
    for seed in 0..20u64 {
        for (d, s) in [(v(1), v(0)), (v(0), v(1))] {
            let ball = GroundingBall::total_variation(0.1).unwrap();
            let exact =
                approx_grounding_lower(&data, &ball, &z1(), &z1(), &d, &s, Method::ExactLp).unwrap();
            let m = Method::Sample { n: 500, seed, concentration: DEFAULT_CONCENTRATION };
            let sampled = approx_grounding_lower(&data, &ball, &z1(), &z1(), &d, &s, m).unwrap();
            assert!(sampled >= exact - 1e-12);
        }
    }
}

#[test]
fn proxy_endpoints() {
    let data = fixtures::medai_dataset().unwrap();
    for d in [v(0), v(1)] {
        let s = if d == v(0) { v(1) } else { v(0) };
        let full = proxy_alignment_lower(&data, 1.0, &z1(), &d, &s).unwrap();
        let p = data.table(&d).unwrap().prob(&assign([("Z", 1), ("Y", 1)])).unwrap();
        assert_eq!(full, p - 1.0);
        assert_eq!(proxy_alignment_lower(&data, 0.0, &z1(), &d, &s).unwrap(), -1.0);
    }
}

/// `W <- U_W`; `Z <- W, U_Z`; `Y <- D, Z, W, U_Y` with independent exogenous
/// blocks, so `Y` is unconfounded given `W`.
fn unconfounded(seed: u64) -> Scm {
    let mut r = rng(seed);
    let (d, z, w, y) = (
        Variable::binary("D"),
        Variable::binary("Z"),
        Variable::binary("W"),
        Variable::binary("Y"),
    );
    let blocks = [("U_W", 2i64), ("U_Z", 4), ("U_Y", 8)];
    let exo: Vec<Variable> = blocks.iter().map(|(n, k)| Variable::range(*n, 0, k - 1)).collect();
    let mut dist: Option<ExoDistribution> = None;
    for (var, (_, k)) in exo.iter().zip(blocks) {
        let p = simplex(&mut r, k as usize);
        let atoms = (0..k)
            .map(|i| {
                let mut a = Assignment::new();
                a.insert(var.name.clone(), v(i));
                (a, p[i as usize])
            })
            .collect();
        let block = ExoDistribution::new(atoms);
        dist = Some(match dist {
            None => block,
            Some(prev) => prev.product(&block),
        });
    }
    let mut random = |parents: &[Variable], u: &Variable| {
        let all: Vec<Variable> = parents.iter().chain(std::iter::once(u)).cloned().collect();
        let table: std::collections::BTreeMap<Vec<Value>, Value> =
            product(&all).map(|row| (row, v(r.random_range(0..2)))).collect();
        move |a: &Assignment| {
            let key: Vec<Value> = all.iter().map(|x| a[&x.name].clone()).collect();
            table[&key].clone()
        }
    };
    let fw = random(&[], &exo[0]);
    let fz = random(std::slice::from_ref(&w), &exo[1]);
    let fy = random(&[d.clone(), z.clone(), w.clone()], &exo[2]);
    let mechs = vec![
        Mechanism::constant("D", v(0)),
        Mechanism::tabulate("W", &[], std::slice::from_ref(&exo[0]), fw),
        Mechanism::tabulate("Z", std::slice::from_ref(&w), std::slice::from_ref(&exo[1]), fz),
        Mechanism::tabulate("Y", &[d.clone(), z.clone(), w.clone()], std::slice::from_ref(&exo[2]), fy),
    ];
    Scm::new(vec![d, w, z, y], exo, mechs, dist.unwrap()).unwrap()
}

#[test]
fn covariate_bounds_dominate_and_cover_truth() {
    let mut checked = 0;
    for seed in 0..300u64 {
        if checked == 50 {
            break;
        }
        let hidden = unconfounded(seed);
        let data = BehaviouralDataset::from_scm(&hidden, "D", "Y").unwrap();
        let Ok(g) = partial_unconfoundedness_interval(&data, "W", &z1(), &v(0), &v(1), &v(1), &v(0))
        else {
            continue;
        };
        checked += 1;
        let base = intervention_gap_interval(&data, &z1(), &z1(), &v(1), &v(0)).unwrap();
        assert!(g.lower >= base.lower - 1e-12 && g.upper <= base.upper + 1e-12);
        let mean = |d: Value| {
            let iv = assign([("Z", 1)]).into_iter().chain([("D".to_string(), d)]).collect();
            hidden.interventional(&iv).unwrap().expectation("Y", &Assignment::new()).unwrap()
        };
        let truth = mean(v(1)) - mean(v(0));
        assert!(g.contains(truth, 1e-12), "seed {seed}: {truth} outside {g:?}");
    }
    assert_eq!(checked, 50);
}
