//! `uisbench`: run the MaxEnt reference, the approximate engines, sweeps and
//! benchmarks from the command line.
//!
//! Data and tables go to stdout (or `--out`); diagnostics go to stderr.
//! Exit codes: 0 success, 1 input or validation error, 2 infeasible
//! constraints, 3 solver did not converge.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use uisbench_core::belief::{default_betas, parse_belief, pathology_csv, pathology_sweep, Subset};
use uisbench_core::engines::{propagate, EngineKind, MycinAttenuation, PropagationOptions, PropagationTrace, Verdict};
use uisbench_core::harness::{
    figure, maxent_prior, reactor_experiment, run_pipeline, sweep, Case, Experiment, Grid, HarnessError,
    PipelineOptions, PipelineResult, PriorSource, SweepOp, SweepSpec, SweepVar,
};
use uisbench_core::joint::{JointError, SolverOptions};
use uisbench_core::metrics::{baseline, monte_carlo_baseline, GuessDomain};
use uisbench_core::rules::{parse_evidence, parse_probability_map, parse_ruleset, RuleError, RuleSet};

#[derive(Parser)]
#[command(
    name = "uisbench",
    version,
    about = "Compare uncertain inference engines against a maximum-entropy reference"
)]
struct Cli {
    /// Directory for output files when `--out` is not given.
    #[arg(long, global = true, env = "UISBENCH_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-entropy joint distribution of a rule set, as CSV.
    Maxent {
        rules: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Propagate one evidence file through the selected engines.
    Infer {
        rules: PathBuf,
        evidence: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = TraceFormat::Table)]
        format: TraceFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-stage reference plus engine comparison over evidence cases.
    Compare {
        rules: PathBuf,
        #[arg(required = true)]
        evidence: Vec<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Also write the pooled report as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-rule sensitivity curves as CSV.
    Sweep(SweepArgs),
    /// The bundled reactor-diagnosis benchmark.
    Reactor {
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Beliefs in the icy-streets example as the careful-but-icy mass shrinks.
    DstPathology {
        /// Comma-separated beta values; defaults to 1e-1 ... 1e-9.
        #[arg(long, value_delimiter = ',')]
        betas: Vec<f64>,
        /// Append the beta = 0 row.
        #[arg(long)]
        include_zero: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare closed-form random-guess baselines with Monte-Carlo estimates.
    VerifyBaselines {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Support and plausibility of every subset in a belief file.
    Belief { file: PathBuf },
}

#[derive(Args)]
struct SolverArgs {
    /// Constraint residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_iter: self.max_iter, ..SolverOptions::default() }
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Comma-separated engines: maxc, fst, minc, ind, mycin, dst.
    #[arg(long, value_delimiter = ',', default_value = "fst,mycin,ind,dst")]
    engines: Vec<EngineKind>,
    /// `maxent` or a file of `name = p` lines.
    #[arg(long, default_value = "maxent")]
    priors: String,
    #[arg(long, value_enum, default_value_t = Attenuation::Clipped)]
    attenuation: Attenuation,
}

impl EngineArgs {
    fn prior_source(&self) -> Result<PriorSource> {
        if self.priors == "maxent" {
            return Ok(PriorSource::MaxEnt);
        }
        let text = read(Path::new(&self.priors))?;
        Ok(PriorSource::Fixed(parse_probability_map(&text).with_context(|| format!("in {}", self.priors))?))
    }

    fn propagation(&self) -> PropagationOptions {
        PropagationOptions { attenuation: self.attenuation.into(), ..Default::default() }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Attenuation {
    Signed,
    Clipped,
}

impl From<Attenuation> for MycinAttenuation {
    fn from(a: Attenuation) -> Self {
        match a {
            Attenuation::Signed => MycinAttenuation::Signed,
            Attenuation::Clipped => MycinAttenuation::Clipped,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TraceFormat {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Conj,
    Disj,
    Mp,
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum Var {
    #[value(name = "pA")]
    PA,
    #[value(name = "pB")]
    PB,
    #[value(name = "p")]
    Strength,
}

#[derive(Args)]
struct SweepArgs {
    /// Preset for one of the seven single-rule figures.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=7), conflicts_with = "op")]
    figure: Option<u8>,
    #[arg(long, value_enum)]
    op: Option<Op>,
    /// Swept variable; defaults to pA, or p for `--op two`.
    #[arg(long, value_enum)]
    var: Option<Var>,
    #[arg(long = "pA")]
    p_a: Option<f64>,
    #[arg(long = "pB")]
    p_b: Option<f64>,
    #[arg(long)]
    strength: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long, value_enum, default_value_t = Attenuation::Clipped)]
    attenuation: Attenuation,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn spec(&self) -> Result<SweepSpec> {
        let mut spec = match (self.figure, self.op) {
            (Some(n), _) => figure(n)?,
            (None, Some(op)) => {
                let op = match op {
                    Op::Conj => SweepOp::Conj,
                    Op::Disj => SweepOp::Disj,
                    Op::Mp => SweepOp::ModusPonens,
                    Op::Two => SweepOp::TwoAntecedent,
                };
                let var = if op == SweepOp::TwoAntecedent { SweepVar::Strength } else { SweepVar::PA };
                SweepSpec::new(op, var)
            }
            (None, None) => bail!("sweep needs --figure N or --op"),
        };
        if let Some(v) = self.var {
            spec.var = match v {
                Var::PA => SweepVar::PA,
                Var::PB => SweepVar::PB,
                Var::Strength => SweepVar::Strength,
            };
        }
        if let Some(v) = self.p_a {
            spec.p_a = v;
        }
        if let Some(v) = self.p_b {
            spec.p_b = v;
        }
        if let Some(v) = self.strength {
            spec.strength = v;
        }
        spec.grid = Grid {
            start: self.start.unwrap_or(spec.grid.start),
            stop: self.stop.unwrap_or(spec.grid.stop),
            step: self.grid_step.unwrap_or(spec.grid.step),
        };
        spec.attenuation = self.attenuation.into();
        Ok(spec)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_rules(path: &Path) -> Result<RuleSet> {
    parse_ruleset(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// Write to `out`, else to `out_dir/default_name`, else to stdout.
fn emit(out: Option<&Path>, out_dir: Option<&Path>, default_name: &str, data: &str) -> Result<()> {
    let path = match (out, out_dir) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(dir)) => Some(dir.join(default_name)),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
            }
            fs::write(&p, data).with_context(|| format!("cannot write {}", p.display()))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{data}"),
    }
    Ok(())
}

fn print_notices(r: &PipelineResult) {
    for n in &r.notices {
        eprintln!("note: {n}");
    }
}

fn render_pipeline(r: &PipelineResult, format: Format) -> String {
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("case,engine,class,metric,value\n");
        for c in &r.cases {
            for line in c.report.to_csv().lines().skip(1) {
                out.push_str(&format!("{},{line}\n", c.name));
            }
        }
        for line in r.pooled.to_csv().lines().skip(1) {
            out.push_str(&format!("pooled,{line}\n"));
        }
        return out;
    }
    for c in &r.cases {
        out.push_str(&format!("case {} (residual {:.2e})\n", c.name, c.solver.max_residual));
        out.push_str(&c.report.to_table());
        out.push('\n');
    }
    if r.cases.len() > 1 {
        out.push_str(&format!("pooled over {} cases\n", r.cases.len()));
        out.push_str(&r.pooled.to_table());
    }
    out
}

fn maxent_cmd(rules: &Path, solver: &SolverArgs, out: Option<&Path>, out_dir: Option<&Path>) -> Result<()> {
    let rs = load_rules(rules)?;
    let (jd, report) = maxent_prior(&rs, &solver.options())?;
    eprintln!(
        "converged: {} iterations, max residual {:.3e}, entropy {:.6}, support {}/{}",
        report.iterations,
        report.max_residual,
        jd.entropy(),
        report.support,
        jd.len()
    );
    for (name, p) in jd.marginals() {
        eprintln!("P({name}) = {p:.6}");
    }
    for rule in rs.rules.iter().filter(|r| r.antecedent.is_some()) {
        if let Some(v) = jd.conditional(&rule.consequent, rule.antecedent.as_ref().expect("filtered"))? {
            eprintln!("{} -> {v:.6}", rule);
        }
    }
    emit(out, out_dir, "maxent.csv", &jd.to_csv())
}

fn trace_table(traces: &[PropagationTrace]) -> String {
    let mut out = format!("{:<28}", "node");
    for t in traces {
        out.push_str(&format!("{:>18}", t.engine.label()));
    }
    out.push('\n');
    let Some(first) = traces.first() else { return out };
    for n in &first.nodes {
        out.push_str(&format!("{:<28}", n.node));
        for t in traces {
            let cell = match t.verdict(&n.node) {
                Some(Verdict::Point(p)) => format!("{p:.4}"),
                Some(Verdict::Interval(i)) => format!("[{:.3}, {:.3}]", i.support, i.plausibility),
                None => "-".into(),
            };
            out.push_str(&format!("{cell:>18}"));
        }
        out.push('\n');
    }
    out
}

fn infer_cmd(
    rules: &Path,
    evidence: &Path,
    engine: &EngineArgs,
    solver: &SolverArgs,
    format: TraceFormat,
    out: Option<&Path>,
    out_dir: Option<&Path>,
) -> Result<()> {
    let rs = load_rules(rules)?;
    let ev = parse_evidence(&read(evidence)?, &rs).with_context(|| format!("in {}", evidence.display()))?;
    let needs_prior = engine.engines.iter().any(|&e| e != EngineKind::Dst);
    let mut priors = BTreeMap::new();
    if needs_prior {
        priors = maxent_prior(&rs, &solver.options())?.0.marginals();
    }
    if let PriorSource::Fixed(fixed) = engine.prior_source()? {
        priors.extend(fixed);
    }
    let traces = engine
        .engines
        .iter()
        .map(|&e| propagate(e, &rs, &ev, &priors, &engine.propagation()))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(t) = traces.first() {
        for n in &t.notices {
            eprintln!("note: {n}");
        }
    }
    let data = match format {
        TraceFormat::Table => trace_table(&traces),
        TraceFormat::Csv => {
            let mut s = String::new();
            for (i, t) in traces.iter().enumerate() {
                s.extend(t.to_csv().lines().skip(usize::from(i > 0)).map(|l| format!("{l}\n")));
            }
            s
        }
        TraceFormat::Json => {
            let items: Vec<String> = traces.iter().map(PropagationTrace::to_json).collect();
            format!("[\n{}\n]\n", items.join(",\n"))
        }
    };
    emit(out, out_dir, "infer.txt", &data)
}

fn compare_cmd(
    rules: &Path,
    evidence: &[PathBuf],
    engine: &EngineArgs,
    solver: &SolverArgs,
    format: Format,
    out: Option<&Path>,
    out_dir: Option<&Path>,
) -> Result<()> {
    let rs = load_rules(rules)?;
    let cases = evidence
        .iter()
        .map(|p| {
            let ev = parse_evidence(&read(p)?, &rs).with_context(|| format!("in {}", p.display()))?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(Case { name, evidence: ev })
        })
        .collect::<Result<Vec<_>>>()?;
    let options =
        PipelineOptions { solver: solver.options(), propagation: engine.propagation(), priors: engine.prior_source()? };
    let exp = Experiment { rules: rs, cases, engines: engine.engines.clone(), options };
    let result = run_pipeline(&exp)?;
    print_notices(&result);
    print!("{}", render_pipeline(&result, format));
    if out.is_some() || out_dir.is_some() {
        emit(out, out_dir, "compare.csv", &result.pooled.to_csv())?;
    }
    Ok(())
}

fn reactor_cmd(
    engine: &EngineArgs,
    solver: &SolverArgs,
    format: Format,
    out: Option<&Path>,
    out_dir: Option<&Path>,
) -> Result<()> {
    let options =
        PipelineOptions { solver: solver.options(), propagation: engine.propagation(), priors: engine.prior_source()? };
    let result = run_pipeline(&reactor_experiment(engine.engines.clone(), options))?;
    eprintln!(
        "prior: {} iterations, residual {:.2e}, {} events",
        result.prior_solver.iterations,
        result.prior_solver.max_residual,
        result.prior.len()
    );
    print_notices(&result);
    emit(out, out_dir, "reactor.txt", &render_pipeline(&result, format))
}

fn pathology_cmd(betas: &[f64], include_zero: bool, out: Option<&Path>, out_dir: Option<&Path>) -> Result<()> {
    let mut betas = if betas.is_empty() { default_betas() } else { betas.to_vec() };
    if include_zero {
        betas.push(0.0);
    }
    let rows = pathology_sweep(&betas)?;
    emit(out, out_dir, "dst_pathology.csv", &pathology_csv(&rows))
}

fn verify_cmd(samples: usize, seed: u64, out: Option<&Path>, out_dir: Option<&Path>) -> Result<()> {
    if samples == 0 {
        bail!("--samples must be positive");
    }
    let mut domains = vec![("FST", GuessDomain::Unit)];
    for q in [0.1, 0.3, 0.5] {
        domains.push(("MYCIN", GuessDomain::CertaintyFactor { prior: q }));
    }
    domains.push(("DST", GuessDomain::Triangle));
    let mut csv = String::from("domain,prior,p,abs_closed,abs_mc,abs_diff,sq_closed,sq_mc,sq_diff\n");
    for (name, d) in &domains {
        for p in [0.05, 0.3, 0.5, 0.7, 0.95] {
            let (ca, cs) = baseline(*d, p)?;
            let (ma, ms) = monte_carlo_baseline(*d, p, samples, seed)?;
            let prior = match d {
                GuessDomain::CertaintyFactor { prior } => prior.to_string(),
                _ => String::new(),
            };
            csv.push_str(&format!("{name},{prior},{p},{ca},{ma},{:e},{cs},{ms},{:e}\n", ca - ma, cs - ms));
        }
    }
    emit(out, out_dir, "baselines.csv", &csv)
}

fn belief_cmd(file: &Path) -> Result<()> {
    let doc = parse_belief(&read(file)?).with_context(|| format!("in {}", file.display()))?;
    println!("subset,source,support,plausibility");
    let frame = &doc.target;
    let subsets: Vec<Subset> = frame.subsets().filter(|s| !s.is_empty()).collect();
    if let Some(m) = &doc.masses {
        for &s in &subsets {
            let iv = m.interval(s)?;
            println!("\"{}\",mass,{},{}", frame.render(s), iv.support, iv.plausibility);
        }
    }
    if let Some(src) = &doc.source {
        for &s in &subsets {
            let iv = uisbench_core::belief::interval(&src.probabilities, &src.relation, s)?;
            println!("\"{}\",compatibility,{},{}", frame.render(s), iv.support, iv.plausibility);
        }
    }
    if doc.masses.is_none() && doc.source.is_none() {
        bail!("{} has no mass or source statements", file.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out_dir = cli.out_dir.as_deref();
    match &cli.command {
        Command::Maxent { rules, solver, out } => maxent_cmd(rules, solver, out.as_deref(), out_dir),
        Command::Infer { rules, evidence, engine, solver, format, out } => {
            infer_cmd(rules, evidence, engine, solver, *format, out.as_deref(), out_dir)
        }
        Command::Compare { rules, evidence, engine, solver, format, out } => {
            compare_cmd(rules, evidence, engine, solver, *format, out.as_deref(), out_dir)
        }
        Command::Sweep(args) => {
            let table = sweep(&args.spec()?)?;
            emit(args.out.as_deref(), out_dir, "sweep.csv", &table.to_csv())
        }
        Command::Reactor { engine, solver, format, out } => {
            reactor_cmd(engine, solver, *format, out.as_deref(), out_dir)
        }
        Command::DstPathology { betas, include_zero, out } => {
            pathology_cmd(betas, *include_zero, out.as_deref(), out_dir)
        }
        Command::VerifyBaselines { samples, seed, out } => verify_cmd(*samples, *seed, out.as_deref(), out_dir),
        Command::Belief { file } => belief_cmd(file),
    }
}

fn joint_code(e: &JointError) -> u8 {
    match e {
        JointError::Infeasible { .. } | JointError::SupportConflict { .. } => 2,
        JointError::NonConvergence { .. } => 3,
        _ => 1,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<JointError>() {
            return joint_code(e);
        }
        if let Some(HarnessError::Joint(e)) = cause.downcast_ref::<HarnessError>() {
            return joint_code(e);
        }
        if cause.downcast_ref::<RuleError>().is_some() {
            return 1;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
