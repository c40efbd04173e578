use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permspread::error::Error;
use permspread::exactmath::{
    a1_size_closed, ak_size_exact, ak_size_upper, crossover_sign, BoundParams, ExactRatio,
};
use permspread::families::{build_ak, Family, FamilySpec, FullPermutation};
use permspread::montecarlo::containment_mc;
use permspread::oracle::{classify_extremal, max_t_intersecting_with, stability_gap, OracleOptions};
use permspread::peeling::{audit_key_reduction, peel, AuditOptions};
use permspread::spread::{refine_approximation, spread_approximate, spread_core, spread_violation, ApproximationResult};
use permspread::suite::{run_suite, Level, Status};
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "permspread", version, about = "Spread approximations and exact oracles for t-intersecting permutation families")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for Monte Carlo sampling.
    #[arg(long, default_value_t = 1, global = true)]
    threads: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact |A_k| and its counting upper bound; sweeps k when --k is absent.
    AkSize(AkSizeArgs),
    /// Sign of |A_0| - |A_1|; sweeps t when --t is absent.
    Crossover(CrossoverArgs),
    /// Writes σ A_k τ in the family text format.
    Build(BuildArgs),
    /// Searches for a set X with |F(X)| r^|X| > |F|.
    SpreadTest(SpreadTestArgs),
    /// Inclusion-maximal spread core.
    Core(CoreArgs),
    /// Greedy spread approximation.
    Approximate(ApproximateArgs),
    /// Dense-piece refinement of the approximation.
    Refine(RefineArgs),
    /// Peeling trace of a t-intersecting family.
    Peel(PeelArgs),
    /// Peeling trace plus the key-reduction audit.
    Audit(AuditArgs),
    /// Monte Carlo estimate of random containment.
    McContainment(McArgs),
    /// Maximum t-intersecting families of Σ_n.
    Oracle(OracleArgs),
    /// Finds σ, τ, k with F ⊆ σ A_k τ.
    Classify(ClassifyArgs),
    /// Largest family contained in no σ A_k τ.
    Stability(StabilityArgs),
    /// Runs the acceptance suite.
    VerifySuite(SuiteArgs),
}

#[derive(Args, Debug, Serialize)]
struct AkSizeArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    t: u64,
    #[arg(long)]
    k: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct CrossoverArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    t: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// Left factor as space- or comma-separated images.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    tau: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SpreadTestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    r: ExactRatio,
    /// Largest |X| searched; defaults to the largest member size.
    #[arg(long)]
    depth_cap: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct CoreArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: ExactRatio,
}

#[derive(Args, Debug, Serialize)]
struct ApproximateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    epsilon: ExactRatio,
    #[arg(long)]
    r: ExactRatio,
}

#[derive(Args, Debug, Serialize)]
struct RefineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    t: u64,
    #[arg(long)]
    epsilon: ExactRatio,
    #[arg(long)]
    r: ExactRatio,
    #[arg(long)]
    r2: ExactRatio,
    #[arg(long)]
    t_prime: Option<u64>,
    #[arg(long, default_value_t = 0)]
    x: u64,
    #[arg(long, default_value_t = 16)]
    rounds: usize,
    /// Stop once the residual has at most this many members.
    #[arg(long, default_value_t = 0)]
    floor: usize,
}

#[derive(Args, Debug, Serialize)]
struct PeelArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    t: usize,
    /// Defaults to the largest member size.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 0)]
    stop_k: usize,
    /// Include layer members in the report.
    #[arg(long)]
    members: bool,
}

#[derive(Args, Debug, Serialize)]
struct AuditArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 0)]
    stop_k: usize,
    /// Permutation family for the coverage clause; Σ_n when absent.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Sets X examined per layer before sampling.
    #[arg(long, default_value_t = 50_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct McArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    beta: ExactRatio,
    #[arg(long)]
    delta: ExactRatio,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    /// Search-tree nodes.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    /// Only look for a family beating max_k |A_k|.
    #[arg(long)]
    improve_only: bool,
}

#[derive(Args, Debug, Serialize)]
struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    t: usize,
}

#[derive(Args, Debug, Serialize)]
struct StabilityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
}

#[derive(Args, Debug, Serialize)]
struct SuiteArgs {
    #[arg(long, value_enum, default_value_t = SuiteLevel::Quick)]
    level: SuiteLevel,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SuiteLevel {
    Quick,
    Full,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Report {
    params: Value,
    result: Value,
    text: String,
    csv: Option<String>,
    code: u8,
}

impl Report {
    fn new(params: impl Serialize, result: impl Serialize, text: String) -> Outcome<Self> {
        Ok(Report { params: to_value(params)?, result: to_value(result)?, text, csv: None, code: EXIT_OK })
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn with_code(mut self, code: u8) -> Self {
        self.code = self.code.max(code);
        self
    }
}

fn to_value(v: impl Serialize) -> Outcome<Value> {
    serde_json::to_value(v).map_err(|e| Failure::Validation(e.to_string()))
}

fn read_family(path: &Path) -> Outcome<Family> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
    };
    Ok(Family::from_text(&text)?)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::AkSize(_) => "ak-size",
        Command::Crossover(_) => "crossover",
        Command::Build(_) => "build",
        Command::SpreadTest(_) => "spread-test",
        Command::Core(_) => "core",
        Command::Approximate(_) => "approximate",
        Command::Refine(_) => "refine",
        Command::Peel(_) => "peel",
        Command::Audit(_) => "audit",
        Command::McContainment(_) => "mc-containment",
        Command::Oracle(_) => "oracle",
        Command::Classify(_) => "classify",
        Command::Stability(_) => "stability",
        Command::VerifySuite(_) => "verify-suite",
    }
}

fn ak_size(a: &AkSizeArgs) -> Outcome<Report> {
    if a.t == 0 || a.t > a.n {
        return Err(Failure::Validation(format!("need 1 <= t <= n, got n = {}, t = {}", a.n, a.t)));
    }
    let ks: Vec<u64> = match a.k {
        Some(k) => vec![k],
        None => (0..=(a.n - a.t) / 2).collect(),
    };
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut csv = String::from("n,t,k,exact,upper\n");
    for k in ks {
        let exact = ak_size_exact(a.n, a.t, k)?;
        let upper = ak_size_upper(a.n, a.t, k)?;
        let _ = writeln!(text, "n={} t={} k={k} exact={exact} upper={upper}", a.n, a.t);
        let _ = writeln!(csv, "{},{},{k},{exact},{upper}", a.n, a.t);
        rows.push(json!({"k": k, "exact": exact.to_string(), "upper": upper.to_string()}));
    }
    Ok(Report::new(a, rows, text)?.with_csv(csv))
}

fn crossover(a: &CrossoverArgs) -> Outcome<Report> {
    let ts: Vec<u64> = match a.t {
        Some(t) => vec![t],
        None => (1..=a.n.saturating_sub(2)).collect(),
    };
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut csv = String::from("n,t,sign,a0,a1\n");
    for t in ts {
        let sign = crossover_sign(a.n, t)?;
        let a0 = ak_size_exact(a.n, t, 0)?;
        let a1 = ak_size_exact(a.n, t, 1)?;
        let closed = a1_size_closed(a.n, t)?;
        let _ = writeln!(text, "n={} t={t} sign={sign} a0={a0} a1={a1}", a.n);
        let _ = writeln!(csv, "{},{t},{sign},{a0},{a1}", a.n);
        rows.push(json!({
            "t": t,
            "sign": sign,
            "a0": a0.to_string(),
            "a1": a1.to_string(),
            "a1_closed_form": closed.to_string(),
        }));
    }
    Ok(Report::new(a, rows, text)?.with_csv(csv))
}

fn parse_perm(s: &Option<String>, n: usize) -> Outcome<FullPermutation> {
    match s {
        Some(s) => {
            let p: FullPermutation = s.parse()?;
            if p.n() != n {
                return Err(Failure::Validation(format!("permutation {s:?} is not on {n} points")));
            }
            Ok(p)
        }
        None => Ok(FullPermutation::identity(n)),
    }
}

fn build(a: &BuildArgs) -> Outcome<Report> {
    let spec = FamilySpec::new(a.n, a.t, a.k, parse_perm(&a.sigma, a.n)?, parse_perm(&a.tau, a.n)?)?;
    let family = build_ak(&spec)?;
    let text = family.to_text();
    Report::new(a, &family, text)
}

fn spread_test(a: &SpreadTestArgs) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let depth = a.depth_cap.unwrap_or_else(|| f.max_member_size());
    let report = spread_violation(&f, &a.r, depth)?;
    let text = match &report.witness {
        Some(x) => format!("violation at X = {x} (|X| = {})\n", x.len()),
        None if report.certifies(&f) => format!("{}-spread (certified to depth {})\n", a.r, report.checked_depth),
        None => format!("clean to depth {}\n", report.checked_depth),
    };
    Report::new(a, &report, text)
}

fn core(a: &CoreArgs) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let core = spread_core(&f, &a.alpha)?;
    let certified = spread_violation(&core.core, &a.alpha, core.core.max_member_size())?.certifies(&core.core);
    let text = format!("X = {} core size {} certified {certified}\n", core.set, core.core.len());
    let code = if certified { EXIT_OK } else { EXIT_INVARIANT };
    Ok(Report::new(a, json!({"core": to_value(&core)?, "certified": certified}), text)?.with_code(code))
}

fn approximation_report(params: impl Serialize, f: &Family, res: &ApproximationResult) -> Outcome<Report> {
    let coverage = res.coverage_holds(f);
    let certified = res.cores_certified()?;
    let mut text = String::new();
    for s in res.cover.iter() {
        let _ = writeln!(text, "cover {s}");
    }
    let _ = writeln!(text, "cores {} remainder {} coverage {coverage} certified {certified}", res.cores.len(), res.remainder.len());
    let code = if coverage && certified { EXIT_OK } else { EXIT_INVARIANT };
    Ok(Report::new(params, json!({"approximation": to_value(res)?, "coverage": coverage, "certified": certified}), text)?
        .with_code(code))
}

fn approximate(a: &ApproximateArgs) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let res = spread_approximate(&f, a.t, &a.epsilon, &a.r)?;
    approximation_report(a, &f, &res)
}

fn refine(a: &RefineArgs) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let mut params = BoundParams::desk(f.n() as u64, a.t, a.epsilon.clone(), a.r.clone())?.with_x(a.x);
    if let Some(tp) = a.t_prime {
        params = params.with_t_prime(tp)?;
    }
    let res = refine_approximation(&f, &params, &a.r2, a.rounds, a.floor)?;
    approximation_report(a, &f, &res)
}

fn peel_text(trace: &permspread::peeling::PeelingTrace) -> String {
    let mut text = String::new();
    for l in &trace.layers {
        let _ = writeln!(text, "k={} |T_k|={} |W_k|={}", l.k, l.family.len(), l.top.len());
    }
    text
}

fn peel_cmd(a: &PeelArgs) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let q = a.q.unwrap_or_else(|| f.max_member_size());
    let trace = peel(&f, a.t, q, a.stop_k)?;
    let text = peel_text(&trace);
    Report::new(a, trace.summary(a.members), text)
}

fn audit(a: &AuditArgs) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let q = a.q.unwrap_or_else(|| f.max_member_size());
    let trace = peel(&f, a.t, q, a.stop_k)?;
    let host = match &a.family {
        Some(p) => read_family(p)?,
        None => Family::symmetric_group(f.n())?,
    };
    let audit = audit_key_reduction(&trace, &host, AuditOptions { budget: a.budget, seed: a.seed })?;
    let mut text = peel_text(&trace);
    for l in &audit.layers {
        let _ = writeln!(text, "k={} sizes={} coverage={:?} spread={}", l.k, l.sizes, l.coverage, l.spread.passed());
    }
    let _ = writeln!(text, "audit {}", if audit.passed { "passed" } else { "failed" });
    let code = if audit.passed { EXIT_OK } else { EXIT_INVARIANT };
    let trace = trace.with_audit(audit);
    Ok(Report::new(a, trace.summary(false), text)?.with_code(code))
}

fn mc(a: &McArgs, threads: usize) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let est = containment_mc(&f, &a.beta, &a.delta, a.trials, a.seed, threads)?;
    let bound = est.bound.map_or_else(|| "vacuous".to_string(), |b| format!("{b:.6}"));
    let text = format!("estimate {} ({}/{}) sigma {:.6} bound {bound}\n", est.estimate_f64, est.successes, est.trials, est.sigma);
    let code = if est.holds_with_margin == Some(false) { EXIT_INVARIANT } else { EXIT_OK };
    Ok(Report::new(a, &est, text)?.with_code(code))
}

fn oracle(a: &OracleArgs) -> Outcome<Report> {
    let options = OracleOptions { budget: a.budget, enumerate: !a.improve_only };
    let r = max_t_intersecting_with(a.n, a.t, options)?;
    let mut text = format!(
        "max_size {} (max_k |A_k| = {})\nwitness classes {}, {}\n",
        r.max_size,
        r.conjectured,
        r.witness_count,
        if r.all_classified() { "all classified" } else { "some unclassified" }
    );
    let code = if r.budget_exhausted {
        text.push_str("budget exhausted: max_size is a lower bound\n");
        EXIT_BUDGET
    } else if !r.matches_conjecture() || !r.all_classified() {
        text.push_str("MISMATCH with max_k |A_k|\n");
        EXIT_INVARIANT
    } else {
        EXIT_OK
    };
    Ok(Report::new(a, &r, text)?.with_code(code))
}

fn classify(a: &ClassifyArgs) -> Outcome<Report> {
    let f = read_family(&a.input)?;
    let c = classify_extremal(&f, a.t)?;
    let text = match &c {
        Some(c) => format!("k={} sigma=[{}] tau=[{}] window {}\n", c.k, c.sigma, c.tau, c.window),
        None => "not contained in any sigma A_k tau\n".to_string(),
    };
    Report::new(a, json!({"classification": to_value(&c)?}), text)
}

fn stability(a: &StabilityArgs) -> Outcome<Report> {
    let s = stability_gap(a.n, a.t, a.budget)?;
    let text = format!(
        "max_size {} best_unclassified {} ratio {} maximal cliques {}\n",
        s.max_size, s.best_unclassified_size, s.ratio, s.maximal_cliques
    );
    let code = if s.budget_exhausted { EXIT_BUDGET } else { EXIT_OK };
    Ok(Report::new(a, &s, text)?.with_code(code))
}

fn verify_suite(a: &SuiteArgs) -> Outcome<Report> {
    let level = match a.level {
        SuiteLevel::Quick => Level::Quick,
        SuiteLevel::Full => Level::Full,
    };
    let report = run_suite(level);
    let mut text = String::new();
    for c in &report.criteria {
        let _ = writeln!(text, "{}", c.line());
    }
    let failed = report.criteria.iter().filter(|c| c.status == Status::Fail).count();
    let _ = writeln!(text, "{} criteria, {failed} failed", report.criteria.len());
    let code = if report.passed { EXIT_OK } else { EXIT_INVARIANT };
    Ok(Report::new(a, &report, text)?.with_code(code))
}

fn dispatch(cli: &Cli) -> Outcome<Report> {
    match &cli.command {
        Command::AkSize(a) => ak_size(a),
        Command::Crossover(a) => crossover(a),
        Command::Build(a) => build(a),
        Command::SpreadTest(a) => spread_test(a),
        Command::Core(a) => core(a),
        Command::Approximate(a) => approximate(a),
        Command::Refine(a) => refine(a),
        Command::Peel(a) => peel_cmd(a),
        Command::Audit(a) => audit(a),
        Command::McContainment(a) => mc(a, cli.threads),
        Command::Oracle(a) => oracle(a),
        Command::Classify(a) => classify(a),
        Command::Stability(a) => stability(a),
        Command::VerifySuite(a) => verify_suite(a),
    }
}

fn render(cli: &Cli, report: &Report) -> Outcome<String> {
    match cli.format {
        Format::Text => Ok(report.text.clone()),
        Format::Csv => report
            .csv
            .clone()
            .ok_or_else(|| Failure::Validation(format!("{} has no tabular output; use json or text", command_name(&cli.command)))),
        Format::Json => {
            let envelope = json!({
                "tool": "permspread",
                "version": env!("CARGO_PKG_VERSION"),
                "library_version": permspread::VERSION,
                "command": command_name(&cli.command),
                "params": report.params,
                "result": report.result,
            });
            let mut s = serde_json::to_string_pretty(&envelope).map_err(|e| Failure::Validation(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(&cli).and_then(|report| {
        let body = render(&cli, &report)?;
        match &cli.out {
            Some(path) => fs::write(path, body)?,
            None => print!("{body}"),
        }
        Ok(report.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
