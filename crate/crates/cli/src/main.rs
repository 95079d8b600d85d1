mod report;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beliefbound::bounds::{
    causal_harm_interval, covariate_shift_gap_interval, direct_discrimination_interval,
    fairness_gap_interval, harm_gap_interval, intervention_gap_interval, multidomain_gap_interval,
    unknown_shift_interval,
};
use beliefbound::dataset::{dataset_from_log, read_log};
use beliefbound::oracle::{build_polytope, optimize_gap, Direction, Skeleton};
use beliefbound::predict::{strong_verdict, weak_verdict, Mode};
use beliefbound::relax::{
    approx_grounding_lower, partial_unconfoundedness_interval, proxy_alignment_lower,
    GroundingBall, Method, DEFAULT_CONCENTRATION, DEFAULT_PROPOSALS,
};
use beliefbound::value::{display_assignment, parse_assignment, product};
use beliefbound::{
    Assignment, BehaviouralDataset, DistTable, Error, GapInterval, Result, Scm, Value, Variable,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{OracleCheck, RelaxResult, Report};

const EXIT_INPUT: u8 = 2;
const EXIT_NO_VERDICT: u8 = 3;
const EXIT_NOT_TIGHT: u8 = 4;
const EXIT_ATOM_LIMIT: u8 = 5;

#[derive(Parser)]
#[command(name = "beliefbound", version, about = "Bounds on an agent's preferences under distribution shift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gap intervals for every requested decision pair.
    Bounds(BoundsArgs),
    /// Which decisions can be ruled out.
    Predict(PredictArgs),
    /// Compare closed-form bounds with exact optimisation over canonical models.
    Oracle(OracleArgs),
    /// Bounds under approximate grounding, proxy utilities or a covariate.
    Relax(RelaxArgs),
    /// Behavioural tables generated by a causal model file.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DataArgs {
    /// JSON tables file, or a CSV log with one column per variable.
    #[arg(long)]
    data: PathBuf,
    /// Decision column when reading a CSV log.
    #[arg(long, default_value = "D")]
    decision_var: String,
    /// Utility column when reading a CSV log.
    #[arg(long, default_value = "Y")]
    utility: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct PairArgs {
    /// Preferred decision; `d1` and `1` are both accepted.
    #[arg(long)]
    decision: Option<String>,
    /// Decision compared against.
    #[arg(long)]
    baseline: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    Intervention,
    Multidomain,
    UnknownShift,
    CovariateShift,
    Fairness,
    Harm,
    DirectDiscrimination,
    CausalHarm,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, value_enum)]
    theorem: Theorem,
    /// Atomic shift, e.g. `Z=1`.
    #[arg(long)]
    shift: Option<String>,
    /// Conditioning context, e.g. `Z=1`.
    #[arg(long)]
    context: Option<String>,
    /// Deployment law of the context, e.g. `Z=1:0.9`; cells separated by `;`.
    #[arg(long)]
    sigma_context: Option<String>,
    /// Protected attribute value for fairness bounds, e.g. `Z=0`.
    #[arg(long)]
    z0: Option<String>,
    /// Second protected attribute value for direct discrimination.
    #[arg(long)]
    z1: Option<String>,
    /// Harmful outcome value for causal harm; defaults to the largest.
    #[arg(long)]
    harmful: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Weak,
    Strong,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Weak)]
    mode: ModeArg,
    /// Margin a gap lower bound must exceed.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Bound used; defaults to multidomain when experiments are present.
    #[arg(long, value_enum)]
    theorem: Option<Theorem>,
    #[arg(long)]
    shift: Option<String>,
    #[arg(long)]
    context: Option<String>,
    #[arg(long)]
    sigma_context: Option<String>,
    /// Exit with status 3 when nothing is ruled out.
    #[arg(long)]
    require_verdict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Min,
    Max,
    Both,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pair: PairArgs,
    /// Parents of every non-decision variable, e.g. `Z<-;Y<-D,Z`.
    /// Defaults to every variable depending on all earlier ones.
    #[arg(long)]
    skeleton: Option<String>,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    direction: DirectionArg,
    #[arg(long)]
    shift: Option<String>,
    #[arg(long)]
    context: Option<String>,
    /// Largest accepted gap between optimum and closed form.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelaxKind {
    Grounding,
    Proxy,
    Unconfounded,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    ExactLp,
    Sample,
}

#[derive(Args)]
struct RelaxArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, value_enum)]
    kind: RelaxKind,
    #[arg(long)]
    shift: Option<String>,
    /// Defaults to the shift.
    #[arg(long)]
    context: Option<String>,
    /// Total-variation radius.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::ExactLp)]
    method: MethodArg,
    /// Required for sampling.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PROPOSALS)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_CONCENTRATION)]
    concentration: f64,
    /// Probability that proxy and true utility agree.
    #[arg(long)]
    alpha: Option<f64>,
    /// Covariate that makes the outcome unconfounded.
    #[arg(long, default_value = "W")]
    covariate: String,
    #[arg(long, default_value = "0")]
    w0: String,
    #[arg(long, default_value = "1")]
    w1: String,
}

#[derive(Args)]
struct EvalArgs {
    /// Causal model JSON file.
    #[arg(long)]
    scm: PathBuf,
    #[arg(long, default_value = "D")]
    decision_var: String,
    #[arg(long, default_value = "Y")]
    utility: String,
    /// Experimental domain to add, e.g. `Z=1`; repeatable.
    #[arg(long)]
    experiment: Vec<String>,
}

/// Failure carrying the process exit status.
struct Exit {
    code: u8,
    message: String,
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::AtomLimit { .. } => EXIT_ATOM_LIMIT,
            _ => EXIT_INPUT,
        };
        Exit {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(String, u8), Exit>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Relax(a) => cmd_relax(&a),
        Command::Eval(a) => cmd_eval(&a),
    };
    match result {
        Ok((out, code)) => {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message.replace('\n', " "));
            ExitCode::from(e.code)
        }
    }
}

fn load(args: &DataArgs) -> Result<BehaviouralDataset> {
    let is_csv = args
        .data
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let rows = read_log(File::open(&args.data)?)?;
        dataset_from_log(&rows, &args.decision_var, &args.utility)
    } else {
        BehaviouralDataset::from_json(&std::fs::read_to_string(&args.data)?)
    }
}

fn assignment(text: &Option<String>) -> Result<Assignment> {
    match text {
        Some(t) => parse_assignment(t),
        None => Ok(Assignment::new()),
    }
}

fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

/// Accepts a domain value directly, or with a leading `d` (`d1` for `1`).
fn parse_decision(text: &str, var: &Variable) -> Result<Value> {
    let v = Value::parse(text);
    if var.contains(&v) {
        return Ok(v);
    }
    if let Some(rest) = text.strip_prefix(['d', 'D']) {
        let v = Value::parse(rest);
        if var.contains(&v) {
            return Ok(v);
        }
    }
    Err(input(format!("{text} is not a value of {}", var.name)))
}

/// Requested ordered pairs; all of them when neither side is given.
fn pairs(data: &BehaviouralDataset, p: &PairArgs) -> Result<Vec<(Value, Value)>> {
    let var = &data.decision;
    let d = p.decision.as_deref().map(|t| parse_decision(t, var)).transpose()?;
    let s = p.baseline.as_deref().map(|t| parse_decision(t, var)).transpose()?;
    let mut out = Vec::new();
    for a in &var.domain {
        for b in &var.domain {
            if a != b && d.as_ref().is_none_or(|x| x == a) && s.as_ref().is_none_or(|x| x == b) {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    if out.is_empty() {
        return Err(input("no decision pair matches the request"));
    }
    Ok(out)
}

/// `Z=1:0.9;Z=0:0.1`. Mass left over is spread evenly over unlisted cells
/// of the same variables.
fn sigma_table(text: &str, data: &BehaviouralDataset) -> Result<(Assignment, DistTable)> {
    let mut cells = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (a, p) = part
            .rsplit_once(':')
            .ok_or_else(|| input(format!("expected ASSIGNMENT:PROB, got {part:?}")))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| input(format!("{p:?} is not a probability")))?;
        cells.push((parse_assignment(a)?, p));
    }
    let first = cells.first().ok_or_else(|| input("empty context law"))?.0.clone();
    let names: Vec<&String> = first.keys().collect();
    if cells.iter().any(|(a, _)| a.keys().collect::<Vec<_>>() != names) {
        return Err(input("every cell of the context law must name the same variables"));
    }
    let table = data.table(&data.decision.domain[0])?;
    let scope: Vec<Variable> = names
        .iter()
        .map(|n| table.variable(n).cloned())
        .collect::<Result<_>>()?;
    let listed: f64 = cells.iter().map(|(_, p)| p).sum();
    let rest: Vec<Assignment> = product(&scope)
        .map(|row| {
            scope
                .iter()
                .zip(row)
                .map(|(v, x)| (v.name.clone(), x))
                .collect::<Assignment>()
        })
        .filter(|a| cells.iter().all(|(c, _)| c != a))
        .collect();
    let leftover = 1.0 - listed;
    if leftover < -1e-9 || (rest.is_empty() && leftover.abs() > 1e-9) {
        return Err(input("context law does not sum to one"));
    }
    let share = if rest.is_empty() { 0.0 } else { leftover.max(0.0) / rest.len() as f64 };
    let entries = cells
        .into_iter()
        .chain(rest.into_iter().map(|a| (a, share)));
    Ok((first, DistTable::new(scope, entries)?))
}

fn render(report: &Report, format: Format) -> Result<String> {
    if !report.all_finite() {
        return Err(Error::Internal("report contains a non-finite number".into()));
    }
    Ok(match format {
        Format::Json => report.to_json(),
        Format::Table => report.to_table(),
    })
}

fn echo_data(report: &mut Report, args: &DataArgs) {
    report.echo("data", args.data.display().to_string());
}

/// Preference-gap provider for the shift theorems.
struct Preference {
    theorem: Theorem,
    shift: Assignment,
    context: Assignment,
    sigma: Option<DistTable>,
}

impl Preference {
    fn new(
        theorem: Theorem,
        data: &BehaviouralDataset,
        shift: &Option<String>,
        context: &Option<String>,
        sigma: &Option<String>,
    ) -> Result<Self> {
        let mut z = assignment(shift)?;
        let mut c = assignment(context)?;
        let mut table = None;
        match theorem {
            Theorem::Intervention | Theorem::Multidomain => {
                if shift.is_none() {
                    return Err(input("--shift is required for this bound"));
                }
            }
            Theorem::CovariateShift => {
                let text = sigma
                    .as_ref()
                    .ok_or_else(|| input("--sigma-context is required for covariate-shift"))?;
                let (first, t) = sigma_table(text, data)?;
                if context.is_none() {
                    c = first;
                }
                if shift.is_none() {
                    z = c.clone();
                }
                table = Some(t);
            }
            Theorem::UnknownShift => {}
            _ => return Err(input("not a preference-gap bound")),
        }
        Ok(Preference {
            theorem,
            shift: z,
            context: c,
            sigma: table,
        })
    }

    fn interval(&self, data: &BehaviouralDataset, d: &Value, s: &Value) -> Result<GapInterval> {
        match self.theorem {
            Theorem::Intervention => intervention_gap_interval(data, &self.context, &self.shift, d, s),
            Theorem::Multidomain => multidomain_gap_interval(data, &self.context, &self.shift, d, s),
            Theorem::CovariateShift => covariate_shift_gap_interval(
                data,
                self.sigma.as_ref().expect("set in new"),
                &self.context,
                &self.shift,
                d,
                s,
            ),
            Theorem::UnknownShift => {
                let targets: Vec<String> = if self.shift.is_empty() {
                    data.scope_names()
                        .into_iter()
                        .filter(|n| n != &data.utility)
                        .collect()
                } else {
                    self.shift.keys().cloned().collect()
                };
                unknown_shift_interval(&targets)
            }
            _ => unreachable!("checked in new"),
        }
    }

    fn echo(&self, report: &mut Report) {
        report.echo("shift", display_assignment(&self.shift));
        report.echo("context", display_assignment(&self.context));
        if let Some(t) = &self.sigma {
            report.echo("sigma_context", t.to_file());
        }
    }
}

fn theorem_name(t: Theorem) -> String {
    t.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn cmd_bounds(a: &BoundsArgs) -> Outcome {
    let data = load(&a.data)?;
    let mut report = Report::new("bounds");
    echo_data(&mut report, &a.data);
    report.echo("theorem", theorem_name(a.theorem));
    let c = assignment(&a.context)?;
    match a.theorem {
        Theorem::Intervention | Theorem::Multidomain | Theorem::UnknownShift | Theorem::CovariateShift => {
            let pref = Preference::new(a.theorem, &data, &a.shift, &a.context, &a.sigma_context)?;
            pref.echo(&mut report);
            for (d, s) in pairs(&data, &a.pair)? {
                let g = pref.interval(&data, &d, &s)?;
                report.push_interval(d, Some(s), g);
            }
        }
        Theorem::Harm => {
            report.echo("context", display_assignment(&c));
            for (d, s) in pairs(&data, &a.pair)? {
                let g = harm_gap_interval(&data, &d, &s, &c)?;
                report.push_interval(d, Some(s), g);
            }
        }
        Theorem::CausalHarm => {
            report.echo("context", display_assignment(&c));
            let obs = data
                .observational
                .as_ref()
                .ok_or_else(|| input("causal-harm needs the observational table; pass a CSV log"))?;
            let harmful = a
                .harmful
                .as_deref()
                .map(|t| Value::parse(t));
            for (d, s) in pairs(&data, &a.pair)? {
                let g = causal_harm_interval(
                    obs,
                    &data.decision.name,
                    &data.utility,
                    &d,
                    &s,
                    &c,
                    harmful.as_ref(),
                )?;
                report.push_interval(d, Some(s), g);
            }
        }
        Theorem::Fairness | Theorem::DirectDiscrimination => {
            report.echo("context", display_assignment(&c));
            let z0 = parse_assignment(a.z0.as_deref().ok_or_else(|| input("--z0 is required"))?)?;
            report.echo("z0", display_assignment(&z0));
            let decisions = match &a.pair.decision {
                Some(t) => vec![parse_decision(t, &data.decision)?],
                None => data.decisions(),
            };
            let z1 = match a.theorem {
                Theorem::DirectDiscrimination => {
                    let z1 = parse_assignment(a.z1.as_deref().ok_or_else(|| input("--z1 is required"))?)?;
                    report.echo("z1", display_assignment(&z1));
                    Some(z1)
                }
                _ => None,
            };
            for d in decisions {
                let g = match &z1 {
                    Some(z1) => direct_discrimination_interval(&data, &d, &z0, z1, &c)?,
                    None => fairness_gap_interval(&data, &d, &z0, &c)?,
                };
                report.push_interval(d, None, g);
            }
        }
    }
    Ok((render(&report, a.data.format)?, 0))
}

fn cmd_predict(a: &PredictArgs) -> Outcome {
    let data = load(&a.data)?;
    let theorem = a.theorem.unwrap_or(if data.experiments.is_empty() {
        Theorem::Intervention
    } else {
        Theorem::Multidomain
    });
    let pref = Preference::new(theorem, &data, &a.shift, &a.context, &a.sigma_context)?;
    let mut report = Report::new("predict");
    echo_data(&mut report, &a.data);
    report.echo("theorem", theorem_name(theorem));
    report.echo("mode", match a.mode {
        ModeArg::Weak => Mode::Weak,
        ModeArg::Strong => Mode::Strong,
    });
    report.echo("lambda", a.lambda);
    pref.echo(&mut report);
    let bound = |d: &Value, s: &Value| pref.interval(&data, d, s);
    let decisions = data.decisions();
    let verdict = match a.mode {
        ModeArg::Weak => weak_verdict(bound, &decisions, a.lambda)?,
        ModeArg::Strong => strong_verdict(bound, &decisions, a.lambda)?,
    };
    for (d, s) in pairs(&data, &PairArgs { decision: None, baseline: None })? {
        let g = pref.interval(&data, &d, &s)?;
        report.push_interval(d, Some(s), g);
    }
    let code = if a.require_verdict && verdict.ruled_out.is_empty() {
        EXIT_NO_VERDICT
    } else {
        0
    };
    report.verdict = Some(verdict);
    Ok((render(&report, a.data.format)?, code))
}

/// Every variable depends on the decision and on all variables before it,
/// with the utility last.
fn saturated_skeleton(data: &BehaviouralDataset) -> Result<Skeleton> {
    let mut names: Vec<String> = data
        .scope_names()
        .into_iter()
        .filter(|n| n != &data.utility)
        .collect();
    names.push(data.utility.clone());
    let mut nodes = Vec::new();
    for (i, n) in names.iter().enumerate() {
        let mut parents = vec![data.decision.name.clone()];
        parents.extend(names[..i].iter().cloned());
        nodes.push((n.clone(), parents));
    }
    Skeleton::new(&data.decision.name, nodes)
}

fn cmd_oracle(a: &OracleArgs) -> Outcome {
    let data = load(&a.data)?;
    if a.shift.is_none() {
        return Err(input("--shift is required").into());
    }
    let z = assignment(&a.shift)?;
    let c = assignment(&a.context)?;
    let skel = match &a.skeleton {
        Some(t) => Skeleton::parse(&data.decision.name, t)?,
        None => saturated_skeleton(&data)?,
    };
    let mut report = Report::new("oracle");
    echo_data(&mut report, &a.data);
    report.echo(
        "skeleton",
        skel.nodes
            .iter()
            .map(|(n, ps)| format!("{n}<-{}", ps.join(",")))
            .collect::<Vec<_>>()
            .join(";"),
    );
    report.echo("shift", display_assignment(&z));
    report.echo("context", display_assignment(&c));
    report.echo("tol", a.tol);
    let poly = build_polytope(&data, &skel)?;
    let directions: &[(Direction, &'static str)] = match a.direction {
        DirectionArg::Min => &[(Direction::Min, "min")],
        DirectionArg::Max => &[(Direction::Max, "max")],
        DirectionArg::Both => &[(Direction::Min, "min"), (Direction::Max, "max")],
    };
    let mut worst = 0.0f64;
    for (d, s) in pairs(&data, &a.pair)? {
        let g = if data.experiments.is_empty() {
            intervention_gap_interval(&data, &c, &z, &d, &s)?
        } else {
            multidomain_gap_interval(&data, &c, &z, &d, &s)?
        };
        for &(dir, name) in directions {
            let lp = optimize_gap(&poly, &z, &c, &d, &s, dir)?;
            let closed = match dir {
                Direction::Min => g.lower,
                Direction::Max => g.upper,
            };
            let delta = (lp - closed).abs();
            worst = worst.max(delta);
            report.oracle.push(OracleCheck {
                d: d.clone(),
                d_star: s.clone(),
                direction: name,
                lp,
                closed_form: closed,
                delta,
                tight: delta <= a.tol,
            });
        }
        report.push_interval(d, Some(s), g);
    }
    let code = if worst > a.tol { EXIT_NOT_TIGHT } else { 0 };
    Ok((render(&report, a.data.format)?, code))
}

fn cmd_relax(a: &RelaxArgs) -> Outcome {
    let data = load(&a.data)?;
    let z = match &a.shift {
        Some(t) => parse_assignment(t)?,
        None => return Err(input("--shift is required").into()),
    };
    let c = match &a.context {
        Some(t) => parse_assignment(t)?,
        None => z.clone(),
    };
    let mut report = Report::new("relax");
    echo_data(&mut report, &a.data);
    report.echo("shift", display_assignment(&z));
    report.echo("context", display_assignment(&c));
    let ps = pairs(&data, &a.pair)?;
    match a.kind {
        RelaxKind::Grounding => {
            let ball = GroundingBall::total_variation(a.delta)?;
            report.echo("kind", "grounding");
            report.echo("delta", a.delta);
            let method = match a.method {
                MethodArg::ExactLp => Method::ExactLp,
                MethodArg::Sample => {
                    let seed = a
                        .seed
                        .ok_or_else(|| input("--seed is required for sampling"))?;
                    report.seed = Some(seed);
                    report.echo("samples", a.samples);
                    report.echo("concentration", a.concentration);
                    Method::Sample {
                        n: a.samples,
                        seed,
                        concentration: a.concentration,
                    }
                }
            };
            report.echo("method", match method {
                Method::ExactLp => "exact-lp",
                Method::Sample { .. } => "sample",
            });
            for (d, s) in ps {
                let x = approx_grounding_lower(&data, &ball, &c, &z, &d, &s, method)?;
                report.relax.push(RelaxResult {
                    d,
                    d_star: s,
                    kind: "grounding",
                    lower: Some(x),
                    interval: None,
                });
            }
        }
        RelaxKind::Proxy => {
            let alpha = a.alpha.ok_or_else(|| input("--alpha is required"))?;
            report.echo("kind", "proxy");
            report.echo("alpha", alpha);
            if c != z {
                return Err(input("proxy bounds take the context equal to the shift").into());
            }
            for (d, s) in ps {
                let x = proxy_alignment_lower(&data, alpha, &z, &d, &s)?;
                report.relax.push(RelaxResult {
                    d,
                    d_star: s,
                    kind: "proxy",
                    lower: Some(x),
                    interval: None,
                });
            }
        }
        RelaxKind::Unconfounded => {
            report.echo("kind", "unconfounded");
            report.echo("covariate", &a.covariate);
            if c != z {
                return Err(input("covariate bounds take the context equal to the shift").into());
            }
            let (w0, w1) = (Value::parse(&a.w0), Value::parse(&a.w1));
            for (d, s) in ps {
                let g = partial_unconfoundedness_interval(&data, &a.covariate, &z, &w0, &w1, &d, &s)?;
                for note in &g.notes {
                    report.warnings.push(format!("{d} over {s}: {note}"));
                }
                report.relax.push(RelaxResult {
                    d,
                    d_star: s,
                    kind: "unconfounded",
                    lower: None,
                    interval: Some(g),
                });
            }
        }
    }
    Ok((render(&report, a.data.format)?, 0))
}

fn cmd_eval(a: &EvalArgs) -> Outcome {
    let scm = read_scm(&a.scm)?;
    let mut data = BehaviouralDataset::from_scm(&scm, &a.decision_var, &a.utility)?;
    for e in &a.experiment {
        let iv = parse_assignment(e)?;
        let label = format!("do({})", e.trim());
        let dom = BehaviouralDataset::experiment_from_scm(&scm, &a.decision_var, &label, &iv)?;
        data = data.with_experiment(dom)?;
    }
    Ok((data.to_json()?, 0))
}

fn read_scm(path: &Path) -> Result<Scm> {
    Scm::from_json(&std::fs::read_to_string(path)?)
}
