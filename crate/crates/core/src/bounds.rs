//! Closed-form partial-identification bounds on preference, fairness and
//! harm gaps.
//!
//! Every function is a pure formula over the observed tables. Results carry
//! the raw (pre-clamp) endpoints, notes about clamps and caveats, and a
//! digest of the inputs.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::BehaviouralDataset;
use crate::error::{Error, Result};
use crate::table::DistTable;
use crate::value::{display_assignment, merge, without, Assignment, Value};

/// Slack below which an out-of-range endpoint is treated as rounding.
const CLAMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapKind {
    Preference,
    Fairness,
    Harm,
    DirectDiscrimination,
    CausalHarm,
}

impl GapKind {
    pub fn range(self) -> (f64, f64) {
        match self {
            GapKind::Harm | GapKind::CausalHarm => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }
}

/// Which bound produced an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    Intervention,
    MultiDomain,
    UnknownShift,
    CovariateShift,
    Fairness,
    Harm,
    DirectDiscrimination,
    CausalHarm,
    ApproxGrounding,
    ProxyAlignment,
    PartialUnconfoundedness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapInterval {
    pub lower: f64,
    pub upper: f64,
    pub kind: GapKind,
    pub source: BoundSource,
    /// Both endpoints are attained by models compatible with the data.
    pub tight: bool,
    pub raw_lower: f64,
    pub raw_upper: f64,
    pub notes: Vec<String>,
    pub digest: String,
}

impl GapInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lower - tol && x <= self.upper + tol
    }

    /// True when any endpoint was clamped into the kind's range.
    pub fn clamped(&self) -> bool {
        self.raw_lower != self.lower || self.raw_upper != self.upper
    }
}

/// Builds an interval, clamping into the kind's range and recording a note
/// whenever the clamp moves an endpoint by more than rounding.
pub(crate) fn finish(
    raw_lower: f64,
    raw_upper: f64,
    kind: GapKind,
    source: BoundSource,
    tight: bool,
    mut notes: Vec<String>,
    digest: String,
) -> Result<GapInterval> {
    if !raw_lower.is_finite() || !raw_upper.is_finite() {
        return Err(Error::domain("bound evaluated to a non-finite number"));
    }
    let (lo_r, hi_r) = kind.range();
    let clamp = |x: f64, which: &str, notes: &mut Vec<String>| {
        let y = x.clamp(lo_r, hi_r);
        if (x - y).abs() > CLAMP_SLACK {
            notes.push(format!("{which} bound clamped from {x:.6} to {y}"));
        }
        y
    };
    let lower = clamp(raw_lower, "lower", &mut notes);
    let mut upper = clamp(raw_upper, "upper", &mut notes);
    if lower > upper {
        if lower - upper <= 1e-9 {
            upper = lower;
        } else {
            return Err(Error::Data(format!(
                "bound is empty (lower {lower} > upper {upper}); the tables are mutually inconsistent"
            )));
        }
    }
    Ok(GapInterval {
        lower,
        upper,
        kind,
        source,
        tight,
        raw_lower,
        raw_upper,
        notes,
        digest,
    })
}

pub(crate) fn digest_of(parts: &[String]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn table_text(t: &DistTable) -> String {
    serde_json::to_string(&t.to_file()).unwrap_or_default()
}

fn pair_digest(
    tag: &str,
    data: &BehaviouralDataset,
    d: &Value,
    d_star: &Value,
    extra: &[String],
) -> Result<String> {
    let mut parts = vec![tag.to_string(), d.to_string(), d_star.to_string()];
    parts.extend(extra.iter().cloned());
    parts.push(table_text(data.table(d)?));
    parts.push(table_text(data.table(d_star)?));
    Ok(digest_of(&parts))
}

/// How the deployment environment differs from training.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftSpec {
    /// `Z` is set to `z` by an atomic shift.
    Atomic(Assignment),
    /// Mechanisms of the named variables change in an unknown way.
    Unknown(Vec<String>),
    /// Atomic shift on `z` plus the deployment law of the context.
    CovariateInformed { z: Assignment, p_sigma_c: DistTable },
}

/// Bounds on the mean of `Y` in context `c` after an atomic shift to `z`,
/// from one decision's table.
///
/// The unobserved part of the shifted population (units whose natural `Z`
/// differs from `z`) may land in or out of context `c` and may have any
/// outcome, which gives
/// `[N / den, (N + 1 - P(z)) / den]` with `N = E[Y 1{c, z}]` and
/// `den = P(c, z) + 1 - P(z)`.
pub fn shifted_mean_bounds(
    t: &DistTable,
    utility: &str,
    c: &Assignment,
    z: &Assignment,
) -> Result<(f64, f64)> {
    let cz = merge(c, z)?;
    let n = t.expect_indicator(utility, &cz)?;
    let p_cz = t.prob(&cz)?;
    let p_z = t.prob(z)?;
    let den = p_cz + 1.0 - p_z;
    if den <= 0.0 {
        return Err(Error::domain(format!(
            "context {} has zero mass under the shift to {}",
            display_assignment(c),
            display_assignment(z)
        )));
    }
    let y = t.variable(utility)?;
    let ymin = y.numeric_domain()?.into_iter().fold(f64::INFINITY, f64::min);
    let ymax = y.numeric_domain()?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let rest = 1.0 - p_z;
    Ok(((n + rest * ymin) / den, (n + rest * ymax) / den))
}

/// Preference gap `E[Y_{d,z} | c] - E[Y_{d*,z} | c]` after an atomic shift.
/// Both endpoints are attained.
pub fn intervention_gap_interval(
    data: &BehaviouralDataset,
    c: &Assignment,
    z: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<GapInterval> {
    let y = &data.utility;
    let (lo_d, hi_d) = shifted_mean_bounds(data.table(d)?, y, c, z)?;
    let (lo_s, hi_s) = shifted_mean_bounds(data.table(d_star)?, y, c, z)?;
    let digest = pair_digest(
        "intervention",
        data,
        d,
        d_star,
        &[display_assignment(c), display_assignment(z)],
    )?;
    finish(
        lo_d - hi_s,
        hi_d - lo_s,
        GapKind::Preference,
        BoundSource::Intervention,
        true,
        Vec::new(),
        digest,
    )
}

/// Per-domain bounds on the shifted mean: the experimental domain with
/// intervened set `R` sees only the residual shift `z \ r`.
fn domain_bounds(
    table: &DistTable,
    utility: &str,
    intervened: &Assignment,
    c: &Assignment,
    z: &Assignment,
) -> Result<(f64, f64)> {
    for (k, v) in intervened {
        match z.get(k) {
            Some(zv) if zv == v => {}
            _ => {
                return Err(Error::input(format!(
                    "experimental intervention {} is not part of the shift {}",
                    display_assignment(intervened),
                    display_assignment(z)
                )))
            }
        }
    }
    let residual = without(z, intervened);
    shifted_mean_bounds(table, utility, c, &residual)
}

/// Preference gap bounds combining the observed domain with experimental
/// domains whose interventions are sub-shifts of `z`.
///
/// The lower bound is the largest per-domain lower bound for `d` minus the
/// smallest per-domain upper bound for `d*`; the upper bound mirrors it.
pub fn multidomain_gap_interval(
    data: &BehaviouralDataset,
    c: &Assignment,
    z: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<GapInterval> {
    let y = &data.utility;
    let mut doms: Vec<(&Assignment, &DistTable, &DistTable)> = Vec::new();
    let empty = Assignment::new();
    doms.push((&empty, data.table(d)?, data.table(d_star)?));
    for dom in &data.experiments {
        let td = dom.per_decision.get(d).ok_or_else(|| {
            Error::input(format!("domain {} has no table for decision {d}", dom.label))
        })?;
        let ts = dom.per_decision.get(d_star).ok_or_else(|| {
            Error::input(format!("domain {} has no table for decision {d_star}", dom.label))
        })?;
        doms.push((&dom.intervened, td, ts));
    }
    let (mut lo_d, mut hi_d) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut lo_s, mut hi_s) = (f64::NEG_INFINITY, f64::INFINITY);
    for (r, td, ts) in &doms {
        let (a, b) = domain_bounds(td, y, r, c, z)?;
        lo_d = lo_d.max(a);
        hi_d = hi_d.min(b);
        let (a, b) = domain_bounds(ts, y, r, c, z)?;
        lo_s = lo_s.max(a);
        hi_s = hi_s.min(b);
    }
    if lo_d > hi_d + 1e-9 || lo_s > hi_s + 1e-9 {
        return Err(Error::Data(
            "experimental domains disagree with the observed tables".into(),
        ));
    }
    let mut notes = Vec::new();
    let k = doms.len();
    if k > 2 {
        notes.push(format!(
            "tightness is only established for two domains; {k} were combined"
        ));
    }
    let mut extra = vec![display_assignment(c), display_assignment(z)];
    for dom in &data.experiments {
        extra.push(display_assignment(&dom.intervened));
        for t in dom.per_decision.values() {
            extra.push(table_text(t));
        }
    }
    let digest = pair_digest("multidomain", data, d, d_star, &extra)?;
    finish(
        lo_d - hi_s,
        hi_d - lo_s,
        GapKind::Preference,
        BoundSource::MultiDomain,
        k <= 2,
        notes,
        digest,
    )
}

/// With an unknown shift on a non-empty set of variables the gap can be
/// anything in `[-1, 1]`.
pub fn unknown_shift_interval(targets: &[String]) -> Result<GapInterval> {
    if targets.is_empty() {
        return Err(Error::input("an unknown shift needs at least one target variable"));
    }
    let mut parts = vec!["unknown-shift".to_string()];
    parts.extend(targets.iter().cloned());
    finish(
        -1.0,
        1.0,
        GapKind::Preference,
        BoundSource::UnknownShift,
        true,
        Vec::new(),
        digest_of(&parts),
    )
}

fn covariate_lower(
    data: &BehaviouralDataset,
    p_sigma: f64,
    c: &Assignment,
    z: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<f64> {
    let y = &data.utility;
    let td = data.table(d)?;
    let ts = data.table(d_star)?;
    let numer = 2.0 + ts.expect_indicator(y, c)? - td.expect_indicator(y, c)?
        - td.prob(z)?
        - ts.prob(z)?
        + td.prob(c)?;
    Ok(1.0 - numer / p_sigma)
}

/// Preference gap bound when the deployment law of the context `P_sigma(C)`
/// is known. The context must pin every shifted variable.
///
/// Only the lower bound is established directly; the upper bound is the
/// negated lower bound of the reversed pair. Not tight in general.
pub fn covariate_shift_gap_interval(
    data: &BehaviouralDataset,
    p_sigma_c: &DistTable,
    c: &Assignment,
    z: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<GapInterval> {
    for (k, v) in z {
        if c.get(k) != Some(v) {
            return Err(Error::input(format!(
                "context {} must include the shifted value {k}={v}",
                display_assignment(c)
            )));
        }
    }
    let c_sigma: Assignment = c
        .iter()
        .filter(|(k, _)| p_sigma_c.has_variable(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if c_sigma.len() != c.len() {
        return Err(Error::input(
            "deployment context law must cover every context variable",
        ));
    }
    let p_sigma = p_sigma_c.prob(&c_sigma)?;
    if p_sigma <= 0.0 {
        return Err(Error::domain(format!(
            "context {} has zero mass under the deployment law",
            display_assignment(c)
        )));
    }
    let lower = covariate_lower(data, p_sigma, c, z, d, d_star)?;
    let upper = -covariate_lower(data, p_sigma, c, z, d_star, d)?;
    let notes = vec![
        "upper bound is the mirror of the reversed pair's lower bound".to_string(),
    ];
    let digest = pair_digest(
        "covariate-shift",
        data,
        d,
        d_star,
        &[display_assignment(c), display_assignment(z), table_text(p_sigma_c)],
    )?;
    finish(
        lower,
        upper,
        GapKind::Preference,
        BoundSource::CovariateShift,
        false,
        notes,
        digest,
    )
}

/// Dispatches a preference-gap bound on a shift description.
pub fn preference_interval(
    data: &BehaviouralDataset,
    shift: &ShiftSpec,
    c: &Assignment,
    d: &Value,
    d_star: &Value,
) -> Result<GapInterval> {
    match shift {
        ShiftSpec::Atomic(z) if data.experiments.is_empty() => {
            intervention_gap_interval(data, c, z, d, d_star)
        }
        ShiftSpec::Atomic(z) => multidomain_gap_interval(data, c, z, d, d_star),
        ShiftSpec::Unknown(targets) => unknown_shift_interval(targets),
        ShiftSpec::CovariateInformed { z, p_sigma_c } => {
            covariate_shift_gap_interval(data, p_sigma_c, c, z, d, d_star)
        }
    }
}

/// Reads a binary attribute assignment `{Z = z0}` and returns `(name, value)`.
fn single_binary(data: &BehaviouralDataset, d: &Value, a: &Assignment) -> Result<(String, Value)> {
    if a.len() != 1 {
        return Err(Error::input("the protected attribute must be a single variable"));
    }
    let (k, v) = a.iter().next().expect("one entry");
    let var = data.table(d)?.variable(k)?;
    if !var.is_binary() {
        return Err(Error::input(format!("protected attribute {k} must be binary")));
    }
    if !var.contains(v) {
        return Err(Error::input(format!("value {v} outside the domain of {k}")));
    }
    Ok((k.clone(), v.clone()))
}

/// Counterfactual fairness gap of decision `d`: the change in expected
/// utility if the protected attribute had been flipped away from `z0`.
/// The interval always has width one.
pub fn fairness_gap_interval(
    data: &BehaviouralDataset,
    d: &Value,
    z0: &Assignment,
    c: &Assignment,
) -> Result<GapInterval> {
    let (zname, _) = single_binary(data, d, z0)?;
    if c.contains_key(&zname) {
        return Err(Error::input(format!(
            "context must not contain the protected attribute {zname}"
        )));
    }
    let t = data.table(d)?;
    let e = t.expectation(&data.utility, &merge(z0, c)?)?;
    let lower = -e;
    let upper = lower + 1.0;
    let digest = digest_of(&[
        "fairness".into(),
        d.to_string(),
        display_assignment(z0),
        display_assignment(c),
        table_text(t),
    ]);
    finish(
        lower,
        upper,
        GapKind::Fairness,
        BoundSource::Fairness,
        true,
        Vec::new(),
        digest,
    )
}

fn require_zero_one(t: &DistTable, utility: &str) -> Result<()> {
    let var = t.variable(utility)?;
    let mut nums = var.numeric_domain()?;
    nums.sort_by(f64::total_cmp);
    if nums != [0.0, 1.0] {
        return Err(Error::input(format!("utility {utility} must take values 0 and 1")));
    }
    Ok(())
}

/// Expected counterfactual harm of `d` relative to the baseline `d0`:
/// the probability that the baseline would have succeeded while `d` fails,
/// `P(Y_{d0} = 1, Y_d = 0 | c)`.
///
/// With `a = E_d[Y | c]` and `b = E_{d0}[Y | c]` the Fréchet limits give
/// `[max(0, b - a), min(b, 1 - a)]`, both attained by couplings.
pub fn harm_gap_interval(
    data: &BehaviouralDataset,
    d: &Value,
    d0: &Value,
    c: &Assignment,
) -> Result<GapInterval> {
    let td = data.table(d)?;
    let t0 = data.table(d0)?;
    require_zero_one(td, &data.utility)?;
    let a = td.expectation(&data.utility, c)?;
    let b = t0.expectation(&data.utility, c)?;
    let (lower, upper) = harm_frechet(a, b);
    let digest = pair_digest("harm", data, d, d0, &[display_assignment(c)])?;
    finish(
        lower,
        upper,
        GapKind::Harm,
        BoundSource::Harm,
        true,
        Vec::new(),
        digest,
    )
}

/// Fréchet range of `P(B = 1, A = 0)` for Bernoulli margins `P(A=1) = a`,
/// `P(B=1) = b`.
pub fn harm_frechet(a: f64, b: f64) -> (f64, f64) {
    ((b - a).max(0.0), b.min(1.0 - a))
}

/// Direct discrimination gap `E[Y_{d,z1,c}] - E[Y_{d,z0,c}]` for a binary
/// attribute with values `z0` and `z1`.
pub fn direct_discrimination_interval(
    data: &BehaviouralDataset,
    d: &Value,
    z0: &Assignment,
    z1: &Assignment,
    c: &Assignment,
) -> Result<GapInterval> {
    let (n0, v0) = single_binary(data, d, z0)?;
    let (n1, v1) = single_binary(data, d, z1)?;
    if n0 != n1 || v0 == v1 {
        return Err(Error::input("z0 and z1 must be the two values of one attribute"));
    }
    if c.contains_key(&n0) {
        return Err(Error::input(format!(
            "context must not contain the protected attribute {n0}"
        )));
    }
    let t = data.table(d)?;
    let y = &data.utility;
    let e0 = merge(z0, c)?;
    let e1 = merge(z1, c)?;
    let diff = t.expect_indicator(y, &e1)? - t.expect_indicator(y, &e0)?;
    let lower = diff + t.prob(&e0)? - 1.0;
    let upper = diff + 1.0 - t.prob(&e1)?;
    let digest = digest_of(&[
        "direct-discrimination".into(),
        d.to_string(),
        display_assignment(z0),
        display_assignment(z1),
        display_assignment(c),
        table_text(t),
    ]);
    finish(
        lower,
        upper,
        GapKind::DirectDiscrimination,
        BoundSource::DirectDiscrimination,
        true,
        Vec::new(),
        digest,
    )
}

/// Expected causal harm `P(Y_{d1} = y1 | y0, d0, c)` from a table logged
/// under the training policy, where `y1` is the harmful outcome.
///
/// The lower bound as derived cancels to zero; the upper bound is
/// `(p - p P(d1|c)) / (P(y0 | d0, c) P(d0 | c))` with `p = P(y1 | d1, c)`.
pub fn causal_harm_interval(
    p: &DistTable,
    decision: &str,
    utility: &str,
    d1: &Value,
    d0: &Value,
    c: &Assignment,
    harmful: Option<&Value>,
) -> Result<GapInterval> {
    let yvar = p.variable(utility)?;
    if !yvar.is_binary() {
        return Err(Error::input(format!("utility {utility} must be binary")));
    }
    let y1 = match harmful {
        Some(v) if yvar.contains(v) => v.clone(),
        Some(v) => return Err(Error::input(format!("value {v} outside the domain of {utility}"))),
        None => yvar.numeric_max()?,
    };
    let y0 = yvar
        .domain
        .iter()
        .find(|v| **v != y1)
        .cloned()
        .expect("binary domain");
    let with = |extra: &[(&str, &Value)]| -> Result<Assignment> {
        let mut a = c.clone();
        for (k, v) in extra {
            if let Some(old) = a.insert(k.to_string(), (*v).clone()) {
                if &old != *v {
                    return Err(Error::input(format!("context conflicts on {k}")));
                }
            }
        }
        Ok(a)
    };
    let p_c = p.prob(c)?;
    let p_d1c = p.prob(&with(&[(decision, d1)])?)?;
    let p_d0c = p.prob(&with(&[(decision, d0)])?)?;
    if p_c <= 0.0 || p_d1c <= 0.0 {
        return Err(Error::domain(format!(
            "decision {d1} never observed in context {}",
            display_assignment(c)
        )));
    }
    let p_y1_d1 = p.prob(&with(&[(decision, d1), (utility, &y1)])?)? / p_d1c;
    let p_y0d0_c = p.prob(&with(&[(decision, d0), (utility, &y0)])?)? / p_c;
    if p_y0d0_c <= 0.0 || p_d0c <= 0.0 {
        return Err(Error::domain(format!(
            "baseline outcome {utility}={y0} under {decision}={d0} has zero mass in context {}",
            display_assignment(c)
        )));
    }
    let p_d1 = p_d1c / p_c;
    let raw_lower = (p_y1_d1 - p_y1_d1) / p_y0d0_c;
    let raw_upper = (p_y1_d1 - p_y1_d1 * p_d1) / p_y0d0_c;
    let notes = vec![
        "lower bound numerator cancels to zero as derived; reported lower is trivially 0".into(),
    ];
    let digest = digest_of(&[
        "causal-harm".into(),
        decision.into(),
        utility.into(),
        d1.to_string(),
        d0.to_string(),
        y1.to_string(),
        display_assignment(c),
        table_text(p),
    ]);
    finish(
        raw_lower,
        raw_upper,
        GapKind::CausalHarm,
        BoundSource::CausalHarm,
        false,
        notes,
        digest,
    )
}
