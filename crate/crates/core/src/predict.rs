//! Weak and strong predictability verdicts from pairwise gap bounds.

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundSource, GapInterval};
use crate::error::{Error, Result};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Weak,
    Strong,
}

/// Evidence that `d_star` is sub-optimal: every compatible model prefers
/// `d` over it by more than the margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub d: Value,
    pub d_star: Value,
    pub lower: f64,
    pub source: BoundSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub mode: Mode,
    pub lambda: f64,
    pub ruled_out: Vec<Value>,
    pub surviving: Vec<Value>,
    /// The only decision left standing, if any.
    pub strong_winner: Option<Value>,
    pub certificates: Vec<Certificate>,
}

impl Verdict {
    pub fn is_ruled_out(&self, d: &Value) -> bool {
        self.ruled_out.contains(d)
    }
}

fn check_inputs(decisions: &[Value], lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::input(format!("margin {lambda} must be a non-negative number")));
    }
    let mut sorted = decisions.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != decisions.len() || decisions.len() < 2 {
        return Err(Error::input("need at least two distinct decisions"));
    }
    Ok(())
}

/// `d_star` is ruled out when some `d` has a gap lower bound strictly above
/// `lambda`. Ties do not rule out.
///
/// `bound` returns the interval for `Delta(d over d_star)`; its failures
/// are reported with the pair that triggered them.
pub fn weak_verdict<F>(bound: F, decisions: &[Value], lambda: f64) -> Result<Verdict>
where
    F: Fn(&Value, &Value) -> Result<GapInterval>,
{
    check_inputs(decisions, lambda)?;
    let mut ruled_out = Vec::new();
    let mut surviving = Vec::new();
    let mut certificates = Vec::new();
    for d_star in decisions {
        let mut best: Option<Certificate> = None;
        for d in decisions.iter().filter(|d| *d != d_star) {
            let g = bound(d, d_star).map_err(|e| Error::Pair {
                d: d.to_string(),
                d_star: d_star.to_string(),
                source: Box::new(e),
            })?;
            if g.lower > lambda && best.as_ref().is_none_or(|b| g.lower > b.lower) {
                best = Some(Certificate {
                    d: d.clone(),
                    d_star: d_star.clone(),
                    lower: g.lower,
                    source: g.source,
                });
            }
        }
        match best {
            Some(c) => {
                ruled_out.push(d_star.clone());
                certificates.push(c);
            }
            None => surviving.push(d_star.clone()),
        }
    }
    let strong_winner = match surviving.as_slice() {
        [only] => Some(only.clone()),
        _ => None,
    };
    Ok(Verdict {
        mode: Mode::Weak,
        lambda,
        ruled_out,
        surviving,
        strong_winner,
        certificates,
    })
}

/// A decision wins when every other decision is ruled out, so the optimum
/// is the same for every compatible model.
pub fn strong_verdict<F>(bound: F, decisions: &[Value], lambda: f64) -> Result<Verdict>
where
    F: Fn(&Value, &Value) -> Result<GapInterval>,
{
    let mut v = weak_verdict(bound, decisions, lambda)?;
    v.mode = Mode::Strong;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{
        intervention_gap_interval, multidomain_gap_interval, unknown_shift_interval,
    };
    use crate::fixtures;
    use crate::value::assign;

    fn ds() -> Vec<Value> {
        vec![Value::Int(0), Value::Int(1)]
    }

    #[test]
    fn medai_nothing_ruled_out() {
        let data = fixtures::medai_dataset().unwrap();
        let z = assign([("Z", 1)]);
        let f = |d: &Value, s: &Value| intervention_gap_interval(&data, &z, &z, d, s);
        let v = weak_verdict(f, &ds(), 0.0).unwrap();
        assert!(v.ruled_out.is_empty());
        let v = strong_verdict(f, &ds(), 0.0).unwrap();
        assert_eq!(v.strong_winner, None);
    }

    #[test]
    fn experiment_rules_out_d0() {
        let data = fixtures::medai_with_experiment().unwrap();
        let z = assign([("Z", 1)]);
        let f = |d: &Value, s: &Value| multidomain_gap_interval(&data, &z, &z, d, s);
        let v = weak_verdict(f, &ds(), 0.0).unwrap();
        assert_eq!(v.ruled_out, vec![Value::Int(0)]);
        assert_eq!(v.certificates.len(), 1);
        assert!((v.certificates[0].lower - 0.6).abs() < 1e-12);
        let v = strong_verdict(f, &ds(), 0.0).unwrap();
        assert_eq!(v.strong_winner, Some(Value::Int(1)));
        let v = weak_verdict(f, &ds(), 0.7).unwrap();
        assert!(v.ruled_out.is_empty());
    }

    #[test]
    fn unknown_shift_never_wins() {
        let f = |_: &Value, _: &Value| unknown_shift_interval(&["Z".into()]);
        assert_eq!(strong_verdict(f, &ds(), 0.0).unwrap().strong_winner, None);
    }

    #[test]
    fn ties_do_not_rule_out() {
        let f = |_: &Value, _: &Value| {
            crate::bounds::finish(
                0.0,
                0.0,
                crate::GapKind::Preference,
                BoundSource::Intervention,
                true,
                vec![],
                String::new(),
            )
        };
        assert!(weak_verdict(f, &ds(), 0.0).unwrap().ruled_out.is_empty());
    }

    #[test]
    fn provider_errors_name_the_pair() {
        let f = |_: &Value, _: &Value| -> Result<GapInterval> { Err(Error::domain("boom")) };
        let err = weak_verdict(f, &ds(), 0.0).unwrap_err();
        assert!(matches!(err, Error::Pair { .. }));
        assert!(matches!(err.root(), Error::Domain(_)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = |_: &Value, _: &Value| unknown_shift_interval(&["Z".into()]);
        assert!(weak_verdict(f, &[Value::Int(0)], 0.0).is_err());
        assert!(weak_verdict(f, &ds(), -0.1).is_err());
    }
}
