//! Bounds when the agent is only approximately grounded, when its utility is
//! a proxy, and when a covariate makes the outcome partly unconfounded.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::bounds::{digest_of, finish, table_text, BoundSource, GapInterval, GapKind};
use crate::dataset::BehaviouralDataset;
use crate::error::{Error, Result};
use crate::lp::{Cmp, Lp, LpError, Sense};
use crate::table::DistTable;
use crate::value::{assign_one, display_assignment, merge, Assignment, Value};

pub const DEFAULT_CONCENTRATION: f64 = 400.0;
pub const DEFAULT_PROPOSALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discrepancy {
    TotalVariation,
}

/// Tables the agent's internal model may hold: within `delta` of the
/// observed per-decision tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundingBall {
    pub discrepancy: Discrepancy,
    pub delta: f64,
}

impl GroundingBall {
    pub fn total_variation(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::input(format!("radius {delta} must lie in [0, 1]")));
        }
        Ok(GroundingBall {
            discrepancy: Discrepancy::TotalVariation,
            delta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactLp,
    Sample {
        n: usize,
        seed: u64,
        concentration: f64,
    },
}

/// Per-cell objective weights for one decision: the cell's contribution to
/// the shifted-mean lower (`worst = ymin`) or upper (`worst = ymax`) bound.
fn weights(t: &DistTable, utility: &str, z: &Assignment, worst: f64) -> Result<Vec<f64>> {
    let yvar = t.variable(utility)?;
    let ynum = yvar.numeric_domain()?;
    t.dense()
        .iter()
        .map(|(a, _)| {
            let in_z = z.iter().all(|(k, v)| a.get(k) == Some(v));
            let y = ynum[yvar.index_of(&a[utility]).expect("dense cell in domain")];
            Ok(if in_z { y } else { worst })
        })
        .collect()
}

fn centre(t: &DistTable) -> Vec<f64> {
    t.dense().into_iter().map(|(_, p)| p).collect()
}

fn check_context(c: &Assignment, z: &Assignment) -> Result<()> {
    let cz = merge(c, z)?;
    if &cz != z {
        return Err(Error::Unsupported(format!(
            "context {} is not fixed by the shift {}; only the linear case is bounded",
            display_assignment(c),
            display_assignment(z)
        )));
    }
    Ok(())
}

/// Smallest preference-gap lower bound over every pair of tables within the
/// ball around the observed ones.
pub fn approx_grounding_lower(
    data: &BehaviouralDataset,
    ball: &GroundingBall,
    c: &Assignment,
    z: &Assignment,
    d: &Value,
    d_star: &Value,
    method: Method,
) -> Result<f64> {
    if !(ball.delta >= 0.0) {
        return Err(Error::input("radius must be non-negative"));
    }
    check_context(c, z)?;
    let y = data.utility_variable()?;
    let (ymin, ymax) = (y.numeric_min()?, y.numeric_max()?);
    let (ymin, ymax) = (ymin.as_f64().unwrap_or(0.0), ymax.as_f64().unwrap_or(1.0));
    let (td, ts) = (data.table(d)?, data.table(d_star)?);
    let wd = weights(td, &data.utility, z, ymin)?;
    let ws: Vec<f64> = weights(ts, &data.utility, z, ymax)?
        .into_iter()
        .map(|w| -w)
        .collect();
    let (cd, cs) = (centre(td), centre(ts));
    match method {
        Method::ExactLp => ball_lp(&[(&wd, &cd), (&ws, &cs)], ball.delta),
        Method::Sample {
            n,
            seed,
            concentration,
        } => {
            if n == 0 {
                return Err(Error::input("need at least one proposal"));
            }
            if !(concentration > 0.0) {
                return Err(Error::input("concentration must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = f64::INFINITY;
            for _ in 0..n {
                let pd = dirichlet(&cd, concentration, &mut rng)?;
                let ps = dirichlet(&cs, concentration, &mut rng)?;
                if tv(&pd, &cd) <= ball.delta && tv(&ps, &cs) <= ball.delta {
                    best = best.min(dot(&wd, &pd) + dot(&ws, &ps));
                }
            }
            if best.is_infinite() {
                return Err(Error::Sampling(format!(
                    "no proposal out of {n} landed within radius {}; raise the proposal count or the concentration",
                    ball.delta
                )));
            }
            Ok(best)
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Dirichlet draw with parameters `concentration * centre`; cells with no
/// mass stay empty.
fn dirichlet(centre: &[f64], concentration: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut draw = Vec::with_capacity(centre.len());
    for &p in centre {
        let alpha = concentration * p;
        if alpha <= 0.0 {
            draw.push(0.0);
            continue;
        }
        let g = Gamma::new(alpha, 1.0).map_err(|e| Error::Sampling(e.to_string()))?;
        draw.push(g.sample(rng));
    }
    let s: f64 = draw.iter().sum();
    if s <= 0.0 {
        return Err(Error::Sampling("degenerate draw".into()));
    }
    Ok(draw.into_iter().map(|x| x / s).collect())
}

/// `min sum_k w_k . p_k` with each `p_k` a distribution within total
/// variation `delta` of `c_k`.
fn ball_lp(blocks: &[(&[f64], &[f64])], delta: f64) -> Result<f64> {
    // Per block: p (m vars) then t (m vars) with t >= |p - c|.
    let n: usize = blocks.iter().map(|(w, _)| 2 * w.len()).sum();
    let mut obj = vec![0.0; n];
    let mut off = 0;
    for (w, _) in blocks {
        obj[off..off + w.len()].copy_from_slice(w);
        off += 2 * w.len();
    }
    let mut lp = Lp::new(n, Sense::Min, obj);
    let mut off = 0;
    for (w, c) in blocks {
        let m = w.len();
        let mut sum = vec![0.0; n];
        sum[off..off + m].iter_mut().for_each(|x| *x = 1.0);
        lp.add(sum, Cmp::Eq, 1.0);
        let mut budget = vec![0.0; n];
        budget[off + m..off + 2 * m].iter_mut().for_each(|x| *x = 1.0);
        lp.add(budget, Cmp::Le, 2.0 * delta);
        for i in 0..m {
            let mut up = vec![0.0; n];
            up[off + i] = 1.0;
            up[off + m + i] = -1.0;
            lp.add(up, Cmp::Le, c[i]);
            let mut down = vec![0.0; n];
            down[off + i] = -1.0;
            down[off + m + i] = -1.0;
            lp.add(down, Cmp::Le, -c[i]);
        }
        off += 2 * m;
    }
    lp.solve().map(|s| s.value).map_err(|e| match e {
        LpError::Infeasible => Error::Internal("ball program has no feasible point".into()),
        other => Error::Internal(other.to_string()),
    })
}

fn require_binary(data: &BehaviouralDataset, name: &str) -> Result<()> {
    let v = data.table(&data.decision.domain[0])?.variable(name)?;
    let mut nums = v.numeric_domain()?;
    nums.sort_by(f64::total_cmp);
    if nums != [0.0, 1.0] {
        return Err(Error::input(format!("{name} must be binary with values 0 and 1")));
    }
    Ok(())
}

/// Lower bound on the gap when the agent's utility agrees with the true one
/// with probability at least `alpha`: `alpha P_d(z, Y=1) - 1`.
pub fn proxy_alignment_lower(
    data: &BehaviouralDataset,
    alpha: f64,
    z: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::input(format!("alignment {alpha} must lie in [0, 1]")));
    }
    require_binary(data, &data.utility)?;
    data.table(d_star)?;
    let event = merge(z, &assign_one(&data.utility, Value::Int(1)))?;
    Ok(alpha * data.table(d)?.prob(&event)? - 1.0)
}

struct Slices {
    /// `E[Y 1{z}]`, `P(z)`.
    joint: f64,
    pz: f64,
    /// `(P(z, w), E[Y | z, w])` for the better and the worse `w`.
    best: (f64, f64),
    other: (f64, f64),
}

fn slices(
    t: &DistTable,
    utility: &str,
    w_name: &str,
    z: &Assignment,
    w0: &Value,
    w1: &Value,
) -> Result<Slices> {
    let slice = |w: &Value| -> Result<(f64, f64)> {
        let zw = merge(z, &assign_one(w_name, w.clone()))?;
        let p = t.prob(&zw)?;
        if p <= 0.0 {
            return Err(Error::domain(format!(
                "slice {} has zero probability",
                display_assignment(&zw)
            )));
        }
        Ok((p, t.expectation(utility, &zw)?))
    };
    let (s0, s1) = (slice(w0)?, slice(w1)?);
    let (best, other) = if s1.1 >= s0.1 { (s1, s0) } else { (s0, s1) };
    Ok(Slices {
        joint: t.expect_indicator(utility, z)?,
        pz: t.prob(z)?,
        best,
        other,
    })
}

impl Slices {
    /// Units outside `z` behave like the worse slice at best-slice units'
    /// expense at worst, and like the better slice at best.
    fn lower(&self) -> f64 {
        let (pb, eb) = self.best;
        let (_, eo) = self.other;
        eb * pb + (1.0 - pb) * eo
    }

    fn upper(&self) -> f64 {
        self.joint + (1.0 - self.pz) * self.best.1
    }
}

/// Gap interval when `Y` is unconfounded given a binary covariate `W`, so
/// the shifted population's mean lies between the two `W`-slice means.
pub fn partial_unconfoundedness_interval(
    data: &BehaviouralDataset,
    w_name: &str,
    z: &Assignment,
    w0: &Value,
    w1: &Value,
    d: &Value,
    d_star: &Value,
) -> Result<GapInterval> {
    if z.contains_key(w_name) {
        return Err(Error::input(format!("{w_name} cannot be part of the shift")));
    }
    if w0 == w1 {
        return Err(Error::input("the two covariate values must differ"));
    }
    let (td, ts) = (data.table(d)?, data.table(d_star)?);
    let wv = td.variable(w_name)?;
    if wv.domain.len() != 2 || !wv.contains(w0) || !wv.contains(w1) {
        return Err(Error::input(format!("{w_name} must be binary with values {w0} and {w1}")));
    }
    let sd = slices(td, &data.utility, w_name, z, w0, w1)?;
    let ss = slices(ts, &data.utility, w_name, z, w0, w1)?;
    let digest = digest_of(&[
        "partial-unconfoundedness".into(),
        table_text(td),
        table_text(ts),
        w_name.to_string(),
        display_assignment(z),
    ]);
    finish(
        sd.lower() - ss.upper(),
        sd.upper() - ss.lower(),
        GapKind::Preference,
        BoundSource::PartialUnconfoundedness,
        false,
        Vec::new(),
        digest,
    )
}
