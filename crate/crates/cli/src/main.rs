mod config;
mod output;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cycleguess::confusion::{gn_beta_report, ReportOptions, SideInfoGraph};
use cycleguess::entropy::{audit_lemmas, AuditOptions};
use cycleguess::funclass::{compute_constants, LocalFunction};
use cycleguess::indexcode::{self, Broadcast};
use cycleguess::protocol::{round_down_bound, RoundDownSpec};
use cycleguess::{build_fcp, enumerate_fixed_set, fcp_fixed_count, restrict, ColourSpace, Colouring, Error, Protocol};

use config::{GlobalArgs, OutputFormat, RunConfig};
use output::{document, fmt_f, to_value};

const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "cycleguess", version, about = "Guessing games on cycles and index coding with side information")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the fractional-clique-partition protocol and count its fixed set
    Fcp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: u32,
        /// Restrict the protocol to this many colours (guesses out of range become 0)
        #[arg(long)]
        restrict: Option<u32>,
        /// Write the protocol file here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit the entropy inequalities on a protocol's fixed set
    Entropy {
        /// Protocol file; omit to use the fcp protocol given by --n and --s
        file: Option<PathBuf>,
        #[arg(long, requires = "s", conflicts_with = "file")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        s: Option<u32>,
        /// Print every inequality, not only failures
        #[arg(long)]
        all: bool,
    },
    /// Classify a local function Z_s x Z_s -> Z_s
    Classify {
        #[arg(long)]
        s: u32,
        #[arg(long, value_enum, conflicts_with = "file")]
        builtin: Option<Builtin>,
        /// Function file: s rows of s values, row x holds f(x, 0..s)
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Compute the entropy-gap constants for small s
    Constants {
        #[arg(long)]
        s: u32,
    },
    /// Exact guessing number and information defect via the confusion graph
    Confusion {
        /// Edge-list file: vertex count, then one `u v` pair per line
        #[arg(long, conflicts_with_all = ["cycle", "complete"])]
        graph: Option<PathBuf>,
        #[arg(long, conflicts_with = "complete")]
        cycle: Option<usize>,
        #[arg(long)]
        complete: Option<usize>,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        alpha: bool,
        #[arg(long)]
        chi: bool,
    },
    /// Broadcast index code on odd cycles
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    /// x + y mod s
    Xor,
    /// (x, y) -> x
    Proj,
    /// (x, y) -> pi(phi(x), psi(y))
    Pi,
}

#[derive(Subcommand)]
enum IndexAction {
    Encode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: u32,
        /// Comma-separated colours c_1..c_n
        #[arg(long)]
        colouring: String,
        /// Print the broadcast as a single integer
        #[arg(long)]
        packed: bool,
    },
    Decode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: u32,
        /// Receiving vertex, 1-based
        #[arg(long)]
        vertex: usize,
        #[arg(long)]
        left: u32,
        #[arg(long)]
        right: u32,
        /// Residue list, e.g. "phi=1,0 psi=0,0 seam=2"
        #[arg(long, conflicts_with = "packed", required_unless_present = "packed")]
        broadcast: Option<String>,
        #[arg(long)]
        packed: Option<u128>,
    },
    Roundtrip {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: u32,
    },
}

struct Outcome {
    command: &'static str,
    text: String,
    result: Value,
    exit: u8,
}

impl Outcome {
    fn ok(command: &'static str, text: String, result: Value) -> Self {
        Outcome { command, text, result, exit: 0 }
    }
}

struct Failure {
    exit: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            Error::Infeasible(_) | Error::TrivialProtocol => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        };
        Failure { exit, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { exit: EXIT_USAGE, message: message.into() }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn status_of(exit: u8) -> &'static str {
    match exit {
        0 => "ok",
        EXIT_USAGE => "usage",
        EXIT_BUDGET => "budget",
        _ => "infeasible",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::from_args(&cli.global) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if cfg.threads > 0 {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let name = command_name(&cli.command);
    match run(cli.command, &cfg) {
        Ok(out) => {
            match cfg.output_format {
                OutputFormat::Text => print!("{}", out.text),
                OutputFormat::Structured => println!("{}", document(out.command, &cfg, status_of(out.exit), out.result)),
            }
            ExitCode::from(out.exit)
        }
        Err(f) => {
            if cfg.output_format == OutputFormat::Structured {
                let result = json!({ "error": f.message });
                println!("{}", document(name, &cfg, status_of(f.exit), result));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fcp { .. } => "fcp",
        Command::Entropy { .. } => "entropy",
        Command::Classify { .. } => "classify",
        Command::Constants { .. } => "constants",
        Command::Confusion { .. } => "confusion",
        Command::Index { action } => match action {
            IndexAction::Encode { .. } => "index encode",
            IndexAction::Decode { .. } => "index decode",
            IndexAction::Roundtrip { .. } => "index roundtrip",
        },
    }
}

fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, Failure> {
    match command {
        Command::Fcp { n, s, restrict, out } => cmd_fcp(n, s, restrict, out, cfg),
        Command::Entropy { file, n, s, all } => cmd_entropy(file, n.zip(s), all, cfg),
        Command::Classify { s, builtin, file } => cmd_classify(s, builtin, file),
        Command::Constants { s } => cmd_constants(s),
        Command::Confusion { graph, cycle, complete, s, alpha, chi } => {
            cmd_confusion(graph, cycle, complete, s, alpha, chi, cfg)
        }
        Command::Index { action } => cmd_index(action, cfg),
    }
}

fn cmd_fcp(n: usize, s: u32, restrict_to: Option<u32>, out: Option<PathBuf>, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let base = build_fcp(n, s)?;
    let space = base.space();
    let p = match restrict_to {
        Some(sp) => restrict(&base, sp)?,
        None => base,
    };
    if let Some(path) = &out {
        std::fs::write(path, p.to_text()).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let fixed = enumerate_fixed_set(&p, cfg.enumeration_budget)?;
    let fix = fixed.count() as u128;
    let mut text = String::new();
    let mut result = json!({
        "n": n,
        "s": s,
        "a": space.a(),
        "b": space.b(),
        "fix": fix,
    });
    match restrict_to {
        None => {
            let expected = fcp_fixed_count(n, &space);
            let pass = fix == expected;
            let _ = writeln!(text, "fcp protocol on C_{n} with s={s} (a={}, b={})", space.a(), space.b());
            let _ = writeln!(
                text,
                "fix={fix} expected a*s^((n-1)/2)={expected} formula check {}",
                if pass { "PASS" } else { "FAIL" }
            );
            if space.is_perfect_square() {
                let _ = writeln!(text, "perfect square: optimal, fix = s^(n/2)");
            }
            result["expected"] = json!(expected);
            result["formula_check"] = json!(pass);
            result["perfect_square"] = json!(space.is_perfect_square());
        }
        Some(sp) => {
            let _ = writeln!(text, "fcp protocol on C_{n} with s={s} restricted to {sp} colours");
            let _ = writeln!(text, "fix={fix}");
            result["restricted_to"] = json!(sp);
            if space.is_perfect_square() && sp <= s {
                let spec = RoundDownSpec::new(space.a(), s - sp)?;
                let bound = round_down_bound(&spec, n)?;
                let ceil = bound.ceil().max(0.0);
                let pass = fix as f64 >= ceil;
                let _ = writeln!(
                    text,
                    "round-down bound s'^(n/2)(1 - t n / s') = {} (t={}), fix >= {} {}",
                    fmt_f(bound),
                    spec.t,
                    ceil,
                    if pass { "PASS" } else { "FAIL" }
                );
                result["round_down_bound"] = json!(bound);
                result["round_down_check"] = json!(pass);
            }
        }
    }
    if let Some(path) = out {
        let _ = writeln!(text, "protocol written to {}", path.display());
    }
    Ok(Outcome::ok("fcp", text, result))
}

fn cmd_entropy(file: Option<PathBuf>, fcp: Option<(usize, u32)>, all: bool, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let p = match (file, fcp) {
        (Some(path), _) => Protocol::from_text(&read_file(&path)?)?,
        (None, Some((n, s))) => build_fcp(n, s)?,
        (None, None) => return Err(usage("give a protocol file or --n and --s")),
    };
    let opts = AuditOptions {
        tolerance: cfg.tolerance,
        enumeration_budget: cfg.enumeration_budget,
        seed: cfg.seed,
    };
    let r = audit_lemmas(&p, &opts)?;
    let mut text = String::new();
    let _ = writeln!(text, "n={} s={} fix={} H(X)={} log_s fix={}", r.n, r.s, r.fix, fmt_f(r.total_entropy), fmt_f(r.log_fix));
    let per: Vec<String> = r.per_index.iter().map(|&h| fmt_f(h)).collect();
    let _ = writeln!(text, "h(i): {}", per.join(" "));
    let _ = writeln!(
        text,
        "windows: {}",
        if r.exhaustive { "exhaustive" } else { "sampled" }
    );
    for f in &r.families {
        let _ = writeln!(
            text,
            "  {:<18} checked {:>6}  failed {:>4}  min slack {}",
            f.family,
            f.checked,
            f.failed,
            fmt_f(f.min_slack)
        );
    }
    for rec in r.records.iter().filter(|rec| all || rec.verdict == cycleguess::entropy::Verdict::Fail) {
        let _ = writeln!(text, "  {:?} {}: lhs {} rhs {} slack {}", rec.verdict, rec.name, fmt_f(rec.lhs), fmt_f(rec.rhs), fmt_f(rec.slack));
    }
    let _ = writeln!(text, "{}", if r.all_pass() { "all inequalities hold" } else { "some inequalities FAIL" });
    Ok(Outcome::ok("entropy", text, to_value(&r)))
}

fn parse_function(text: &str, space: ColourSpace) -> Result<LocalFunction, Failure> {
    let mut table = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            table.push(tok.parse::<u32>().map_err(|e| usage(format!("line {}: bad value {tok:?}: {e}", k + 1)))?);
        }
    }
    Ok(LocalFunction::new(space, table)?)
}

fn cmd_classify(s: u32, builtin: Option<Builtin>, file: Option<PathBuf>) -> Result<Outcome, Failure> {
    let space = ColourSpace::new(s)?;
    let f = match (builtin, file) {
        (Some(Builtin::Xor), _) => LocalFunction::sum_mod(space),
        (Some(Builtin::Proj), _) => LocalFunction::left_projection(space),
        (Some(Builtin::Pi), _) => LocalFunction::coordinate_merge(space),
        (None, Some(path)) => parse_function(&read_file(&path)?, space)?,
        (None, None) => return Err(usage("give --builtin or --file")),
    };
    let c = f.classify();
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut text = String::new();
    let _ = writeln!(text, "s={s} (a={}, b={})", space.a(), space.b());
    let _ = writeln!(text, "flat: {}", yes(c.is_flat));
    let _ = writeln!(text, "semi-perfect: {}", yes(c.is_semi_perfect));
    let _ = writeln!(text, "perfect: {}", yes(c.is_perfect));
    let _ = writeln!(text, "I(U1;U2|f(U)) = {}", fmt_f(c.cond_mi));
    let _ = writeln!(text, "preimage sizes: {:?}", c.preimage_sizes);
    let _ = writeln!(text, "|L(z)|: {:?}", c.l_sizes);
    let _ = writeln!(text, "|R(z)|: {:?}", c.r_sizes);
    let mut result = to_value(&c);
    result["s"] = json!(s);
    result["table"] = json!(f.table());
    Ok(Outcome::ok("classify", text, result))
}

fn cmd_constants(s: u32) -> Result<Outcome, Failure> {
    let r = compute_constants(s)?;
    let mut text = String::new();
    let _ = writeln!(text, "s={} functions={} flat={} semi-perfect={}", r.s, r.function_count, r.flat_count, r.semi_perfect_count);
    let _ = writeln!(text, "flat but not semi-perfect: {}", r.flat_non_semi_perfect_count);
    let _ = writeln!(text, "min conditional MI = {} (table {:?})", fmt_f(r.min_cond_mi), r.argmin_table);
    let _ = writeln!(text, "delta1 = {}", fmt_f(r.delta1));
    let _ = writeln!(text, "epsilon = {} (cap {}, continuity {})", fmt_f(r.epsilon), fmt_f(r.epsilon_cap), fmt_f(r.epsilon_cont));
    let _ = writeln!(text, "7 s^2 epsilon < 1: {}", r.small_radius_ok);
    let _ = writeln!(text, "delta2 = {} (alternative log reading {})", fmt_f(r.delta2), fmt_f(r.delta2_alt));
    let _ = writeln!(text, "delta = {}", fmt_f(r.delta));
    let _ = writeln!(text, "N = {}", r.n_threshold);
    Ok(Outcome::ok("constants", text, to_value(&r)))
}

fn cmd_confusion(
    graph: Option<PathBuf>,
    cycle: Option<usize>,
    complete: Option<usize>,
    s: u32,
    alpha: bool,
    chi: bool,
    cfg: &RunConfig,
) -> Result<Outcome, Failure> {
    let g = match (graph, cycle, complete) {
        (Some(path), _, _) => SideInfoGraph::from_text(&read_file(&path)?)?,
        (None, Some(n), _) => SideInfoGraph::cycle(n)?,
        (None, None, Some(n)) => SideInfoGraph::complete(n)?,
        _ => return Err(usage("give --graph, --cycle or --complete")),
    };
    let (want_alpha, want_chi) = if alpha || chi { (alpha, chi) } else { (true, true) };
    let opts = ReportOptions {
        want_alpha,
        want_chi,
        timeout: cfg.timeout(),
        tolerance: cfg.tolerance,
        explicit_budget: ReportOptions::default().explicit_budget.min(cfg.enumeration_budget),
        ..ReportOptions::default()
    };
    let st = gn_beta_report(&g, s, &opts)?;
    let mut text = String::new();
    let mut exit = 0;
    let _ = writeln!(text, "graph on {} vertices, {} edges, s={s}, confusion graph on {} vertices", st.n, st.edges.len(), st.vertex_count);
    if let Some(a) = &st.alpha {
        if a.exact {
            let _ = writeln!(text, "alpha={} gn={}", a.alpha, fmt_f(st.gn.unwrap_or(f64::NAN)));
        } else {
            exit = EXIT_INFEASIBLE;
            let _ = writeln!(text, "alpha>={} (timeout, not exact)", a.alpha);
        }
    }
    if let Some(c) = &st.chi {
        if c.exact {
            let _ = writeln!(text, "chi={} beta={}", c.upper, fmt_f(st.beta.unwrap_or(f64::NAN)));
        } else {
            exit = EXIT_INFEASIBLE;
            let (lo, hi) = st.beta_interval.unwrap_or((f64::NAN, f64::NAN));
            let _ = writeln!(text, "chi in [{}, {}] (not exact), beta in [{}, {}]", c.lower, c.upper, fmt_f(lo), fmt_f(hi));
        }
    }
    let check = |name: &str, v: Option<bool>, text: &mut String| {
        if let Some(v) = v {
            let _ = writeln!(text, "{name}: {}", if v { "PASS" } else { "FAIL" });
        }
    };
    check("alpha * chi >= s^n", st.product_check, &mut text);
    check("gn + beta >= n", st.identity_check, &mut text);
    check("alpha^2 <= s^n", st.half_bound_check, &mut text);
    check("witness codeable", st.witness_codeable, &mut text);
    if let Some(f) = &st.fcp {
        let _ = writeln!(text, "fcp fix={} vs alpha={}: {}", f.fix, f.alpha, f.relation);
    }
    let mut result = to_value(&st);
    if let Some(a) = &st.alpha {
        let witness: Vec<String> = a.witness.iter().map(Colouring::to_string).collect();
        result["alpha"]["witness"] = json!(witness);
    }
    Ok(Outcome { command: "confusion", text, result, exit })
}

fn cmd_index(action: IndexAction, cfg: &RunConfig) -> Result<Outcome, Failure> {
    match action {
        IndexAction::Encode { n, s, colouring, packed } => {
            let space = ColourSpace::new(s)?;
            let c: Colouring = colouring.parse()?;
            let msg = indexcode::encode(&c, &space, n)?;
            let p = msg.pack(&space);
            let text = if packed { format!("{p}\n") } else { format!("{msg}\n") };
            let mut result = to_value(&msg);
            result["packed"] = json!(p);
            result["message_space_size"] = json!(indexcode::message_space_size(n, &space)?);
            Ok(Outcome::ok("index encode", text, result))
        }
        IndexAction::Decode { n, s, vertex, left, right, broadcast, packed } => {
            let space = ColourSpace::new(s)?;
            let msg = match (broadcast, packed) {
                (Some(b), _) => b.parse::<Broadcast>()?,
                (None, Some(p)) => Broadcast::unpack(p, n, &space)?,
                (None, None) => return Err(usage("give --broadcast or --packed")),
            };
            let colour = indexcode::decode(vertex, left, right, &msg, &space, n)?;
            Ok(Outcome::ok("index decode", format!("{colour}\n"), json!({ "vertex": vertex, "colour": colour })))
        }
        IndexAction::Roundtrip { n, s } => {
            let space = ColourSpace::new(s)?;
            let r = indexcode::exhaustive_roundtrip(n, &space, cfg.enumeration_budget as u128)?;
            let beta = (r.distinct_messages as f64).ln() / (s as f64).ln();
            let text = format!("{r}\nmessage space b*s^((n-1)/2) = {}, log_s = {}\n", r.message_space_size, fmt_f(beta));
            let mut result = to_value(&r);
            result["log_s_messages"] = json!(beta);
            let exit = if r.failures == 0 { 0 } else { EXIT_INFEASIBLE };
            Ok(Outcome { command: "index roundtrip", text, result, exit })
        }
    }
}
