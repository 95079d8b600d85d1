use std::collections::BTreeMap;
use std::fmt::Write as _;

use beliefbound::predict::Verdict;
use beliefbound::{GapInterval, Value};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct PairInterval {
    pub d: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_star: Option<Value>,
    pub interval: GapInterval,
}

#[derive(Debug, Serialize)]
pub struct OracleCheck {
    pub d: Value,
    pub d_star: Value,
    pub direction: &'static str,
    pub lp: f64,
    pub closed_form: f64,
    pub delta: f64,
    pub tight: bool,
}

#[derive(Debug, Serialize)]
pub struct RelaxResult {
    pub d: Value,
    pub d_star: Value,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<GapInterval>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub request: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub intervals: Vec<PairInterval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oracle: Vec<OracleCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub relax: Vec<RelaxResult>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            tool: "beliefbound",
            version: env!("CARGO_PKG_VERSION"),
            command,
            request: BTreeMap::new(),
            seed: None,
            intervals: Vec::new(),
            verdict: None,
            oracle: Vec::new(),
            relax: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn echo(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        if !v.is_null() {
            self.request.insert(key.to_string(), v);
        }
    }

    pub fn push_interval(&mut self, d: Value, d_star: Option<Value>, interval: GapInterval) {
        let label = match &d_star {
            Some(s) => format!("{d} over {s}"),
            None => d.to_string(),
        };
        for note in &interval.notes {
            self.warnings.push(format!("{label}: {note}"));
        }
        self.intervals.push(PairInterval {
            d,
            d_star,
            interval,
        });
    }

    /// Every number in the report, for the finiteness check.
    fn numbers(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in &self.intervals {
            let g = &p.interval;
            out.extend([g.lower, g.upper, g.raw_lower, g.raw_upper]);
        }
        if let Some(v) = &self.verdict {
            out.push(v.lambda);
            out.extend(v.certificates.iter().map(|c| c.lower));
        }
        for o in &self.oracle {
            out.extend([o.lp, o.closed_form, o.delta]);
        }
        for r in &self.relax {
            out.extend(r.lower);
            if let Some(g) = &r.interval {
                out.extend([g.lower, g.upper]);
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.numbers().iter().all(|x| x.is_finite())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.tool, self.version, self.command);
        for p in &self.intervals {
            let g = &p.interval;
            let pair = match &p.d_star {
                Some(ds) => format!("{} over {}", p.d, ds),
                None => p.d.to_string(),
            };
            let _ = writeln!(
                s,
                "{pair:<14} [{:>9.6}, {:>9.6}]  {:?}{}",
                g.lower,
                g.upper,
                g.source,
                if g.tight { "  tight" } else { "" }
            );
        }
        if let Some(v) = &self.verdict {
            let list = |xs: &[Value]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
            let _ = writeln!(s, "ruled out: [{}]", list(&v.ruled_out));
            let _ = writeln!(s, "surviving: [{}]", list(&v.surviving));
            if let Some(w) = &v.strong_winner {
                let _ = writeln!(s, "winner: {w}");
            }
        }
        for o in &self.oracle {
            let _ = writeln!(
                s,
                "{} over {} {:<3} lp {:>9.6}  closed form {:>9.6}  delta {:.2e}{}",
                o.d,
                o.d_star,
                o.direction,
                o.lp,
                o.closed_form,
                o.delta,
                if o.tight { "  tight" } else { "" }
            );
        }
        for r in &self.relax {
            match (&r.lower, &r.interval) {
                (Some(x), _) => {
                    let _ = writeln!(s, "{} over {} {}: lower {x:.6}", r.d, r.d_star, r.kind);
                }
                (None, Some(g)) => {
                    let _ = writeln!(
                        s,
                        "{} over {} {}: [{:.6}, {:.6}]",
                        r.d, r.d_star, r.kind, g.lower, g.upper
                    );
                }
                _ => {}
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}
