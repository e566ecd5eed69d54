use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qdyn::dynamics::MapParams;
use qdyn::ffield::Ext;
use qdyn::graph::{DotOptions, FunctionalGraph, GraphSignature};
use qdyn::theory::{self, Prediction};
use qdyn::verify::{self, ASelector, CSelector, SweepConfig, FORMAT_VERSION};
use qdyn::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_INTERRUPTED: u8 = 130;

static CANCEL: AtomicBool = AtomicBool::new(false);

#[derive(Parser)]
#[command(name = "qdyn", version, about = "Functional graphs of X ↦ c(X^(q+1) + aX²) over F_{q²}")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "QDYN_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph and print its census and components.
    Analyze(Instance),
    /// Closed-form decomposition, without building the graph.
    Predict(Instance),
    /// Reconcile prediction and brute force for one instance.
    Verify(Instance),
    /// Verify every instance in a range of primes.
    Sweep(SweepArgs),
    /// Graphviz export.
    Dot(DotArgs),
    /// Predicted and brute-force preimage counts.
    Preimage(PreimageArgs),
}

#[derive(Args, Clone)]
struct Instance {
    #[arg(long)]
    q: u64,
    /// Negative values are reduced mod q.
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    c: i64,
    /// Non-square defining β² = b (default: smallest).
    #[arg(long)]
    b: Option<i64>,
}

impl Instance {
    fn params(&self) -> qdyn::Result<MapParams> {
        MapParams::from_ints(self.q, self.a, self.c, self.b)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 3)]
    qmin: u64,
    #[arg(long)]
    qmax: u64,
    /// minus-one, plus-one, both, general or all.
    #[arg(long, value_enum, default_value_t = ASel::Both)]
    a: ASel,
    /// "all", "one", or a number of seeded samples per q.
    #[arg(long, default_value = "all")]
    c: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also rebuild over a second non-square b and compare.
    #[arg(long)]
    b_independence: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ASel {
    MinusOne,
    PlusOne,
    Both,
    General,
    All,
}

#[derive(Args)]
struct DotArgs {
    #[command(flatten)]
    instance: Instance,
    /// Only the component containing this state, as "x,y".
    #[arg(long, value_parser = parse_pair)]
    component: Option<(i64, i64)>,
    #[arg(long)]
    beta_labels: bool,
}

#[derive(Args)]
struct PreimageArgs {
    #[command(flatten)]
    instance: Instance,
    /// Target as "x,y"; repeatable. Without it every state is checked.
    #[arg(long, value_parser = parse_pair)]
    alpha: Vec<(i64, i64)>,
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"x,y\", got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(x)?, parse(y)?))
}

/// Output plus exit status.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => EXIT_RESOURCE,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }

    let result = match &cli.command {
        Command::Analyze(i) => analyze(i, cli.format),
        Command::Predict(i) => predict(i, cli.format),
        Command::Verify(i) => verify_cmd(i, cli.format),
        Command::Sweep(s) => sweep(s, cli.format),
        Command::Dot(d) => dot(d),
        Command::Preimage(p) => preimage(p, cli.format),
    };

    match result {
        Ok(out) => {
            let mut text = out.text;
            if !text.ends_with('\n') {
                text.push('\n');
            }
            match &cli.output {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: writing {}: {e}", path.display());
                        return ExitCode::from(EXIT_RESOURCE);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn to_json(v: &serde_json::Value, format: Format) -> String {
    match format {
        Format::Jsonl => v.to_string(),
        _ => serde_json::to_string_pretty(v).expect("json"),
    }
}

fn analyze(inst: &Instance, format: Format) -> qdyn::Result<Outcome> {
    let p = inst.params()?;
    let graph = FunctionalGraph::build(&p)?;
    let dec = graph.decompose();
    let sig = &dec.signature;

    if format != Format::Text {
        let v = json!({
            "format_version": FORMAT_VERSION,
            "q": p.q(),
            "a": p.a().signed(),
            "c": p.c().value(),
            "b": p.b().value(),
            "case": p.case(),
            "notation": sig.notation(),
            "node_count": sig.node_count(),
            "component_count": sig.component_count(),
            "periodic_count": sig.periodic_count(),
            "max_tail": dec.max_tail(),
            "cycle_census": sig.cycle_census(),
            "signature": sig,
        });
        return Ok(Outcome::ok(to_json(&v, format)));
    }

    let mut out = vec![
        format!("instance: {p} ({})", p.case()),
        format!(
            "nodes: {}, components: {}, periodic points: {}, max tail: {}",
            sig.node_count(),
            sig.component_count(),
            sig.periodic_count(),
            dec.max_tail()
        ),
        format!("cycle census (length: count): {}", census_text(sig)),
        "components:".to_owned(),
    ];
    for (shape, m) in sig.iter() {
        out.push(format!(
            "  {m} × {} [cycle {}, {} nodes]",
            shape.notation(),
            shape.cycle_length(),
            shape.size()
        ));
    }
    out.push(format!("decomposition: {}", sig.notation()));
    Ok(Outcome::ok(out.join("\n")))
}

fn census_text(sig: &GraphSignature) -> String {
    sig.cycle_census()
        .iter()
        .map(|(len, n)| format!("{len}: {n}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn predict(inst: &Instance, format: Format) -> qdyn::Result<Outcome> {
    let p = inst.params()?;
    let pred = match theory::predict(&p)? {
        Prediction::Partial(facts) => {
            let text = if format == Format::Text {
                facts.describe()
            } else {
                let mut v = serde_json::to_value(&facts).expect("json");
                v["format_version"] = json!(FORMAT_VERSION);
                to_json(&v, format)
            };
            return Ok(Outcome::ok(text));
        }
        Prediction::Full(pred) => pred,
    };

    let q = p.q();
    let nodes = pred.node_count();
    let sig = pred.signature();
    let claims: Vec<_> = theory::reference_claims_for(&p)
        .into_iter()
        .map(|claim| {
            let claimed = GraphSignature::from_notation(claim.notation)?;
            let agrees = claimed == sig;
            let mut note = String::new();
            if claimed.node_count() != q * q {
                note = format!("node count {} != q² = {}; ", claimed.node_count(), q * q);
            }
            note.push_str(if agrees {
                "agrees with prediction"
            } else {
                "erratum: disagrees with prediction"
            });
            Ok((claim.notation, agrees, note))
        })
        .collect::<qdyn::Result<_>>()?;

    if format != Format::Text {
        let v = json!({
            "format_version": FORMAT_VERSION,
            "q": q,
            "a": p.a().signed(),
            "c": p.c().value(),
            "prediction": pred,
            "notation": pred.notation(),
            "node_count": nodes,
            "node_count_ok": nodes == q * q,
            "cycle_census": pred.cycle_census(),
            "reference_claims": claims
                .iter()
                .map(|(n, agrees, note)| json!({"claim": n, "erratum": !agrees, "note": note}))
                .collect::<Vec<_>>(),
        });
        return Ok(Outcome::ok(to_json(&v, format)));
    }

    let mut out = vec![
        format!("instance: q={q} a={} c={} ({})", p.a().signed(), p.c(), p.case()),
        format!("q - 1 = 2^{} · {}", pred.s, pred.r),
    ];
    for t in &pred.terms {
        out.push(format!(
            "  d={}: {} × (Cyc({}),T({}))",
            t.divisor, t.multiplicity, t.cycle_length, t.tree_depth
        ));
    }
    out.push(format!(
        "node count: {nodes} ({})",
        if nodes == q * q { "= q²" } else { "!= q²" }
    ));
    out.push(format!("decomposition: {}", pred.notation()));
    for (notation, _, note) in &claims {
        out.push(format!("reference claim {notation}: {note}"));
    }
    let code = if nodes == q * q { 0 } else { EXIT_MISMATCH };
    Ok(Outcome {
        text: out.join("\n"),
        code,
    })
}

fn verify_cmd(inst: &Instance, format: Format) -> qdyn::Result<Outcome> {
    let mut report = verify::verify_params(&inst.params()?)?;
    report.timing = None;
    let text = match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Jsonl => report.to_json_line(),
    };
    if !report.passed {
        eprintln!("reproduce: {}", report.repro);
    }
    Ok(Outcome {
        text,
        code: if report.passed { 0 } else { EXIT_MISMATCH },
    })
}

fn sweep(args: &SweepArgs, format: Format) -> qdyn::Result<Outcome> {
    let c = match args.c.as_str() {
        "all" => CSelector::All,
        "one" => CSelector::One,
        n => CSelector::Sample(n.parse().map_err(|_| {
            Error::Notation(format!("--c expects all, one or a count, got {n:?}"))
        })?),
    };
    let cfg = SweepConfig {
        q_min: args.qmin,
        q_max: args.qmax,
        a: match args.a {
            ASel::MinusOne => ASelector::MinusOne,
            ASel::PlusOne => ASelector::PlusOne,
            ASel::Both => ASelector::Both,
            ASel::General => ASelector::General,
            ASel::All => ASelector::All,
        },
        c,
        seed: args.seed,
        check_b_independence: args.b_independence,
    };
    // first ctrl-c drains the running instances, a second one exits at once
    let _ = ctrlc::set_handler(|| {
        if CANCEL.swap(true, Ordering::SeqCst) {
            std::process::exit(EXIT_INTERRUPTED as i32);
        }
        eprintln!("interrupted: finishing running instances");
    });
    let summary = verify::sweep_with_cancel(&cfg, &CANCEL)?;
    let text = match format {
        Format::Text => summary.to_text(),
        Format::Json => summary.to_json(),
        Format::Jsonl => summary.to_json_lines(),
    };
    if let Some(f) = &summary.first_failure {
        eprintln!("reproduce: {}", f.repro);
    }
    let code = if summary.interrupted {
        EXIT_INTERRUPTED
    } else if summary.failed > 0 {
        EXIT_MISMATCH
    } else {
        0
    };
    Ok(Outcome { text, code })
}

fn dot(args: &DotArgs) -> qdyn::Result<Outcome> {
    let p = args.instance.params()?;
    let graph = FunctionalGraph::build(&p)?;
    let component_of: Option<Ext> = args.component.map(|(x, y)| p.ext().elem(x, y));
    let opts = DotOptions {
        component_of,
        beta_labels: args.beta_labels,
    };
    Ok(Outcome::ok(graph.to_dot(&opts)))
}

fn preimage(args: &PreimageArgs, format: Format) -> qdyn::Result<Outcome> {
    let p = args.instance.params()?;
    let q = p.q();
    let ext = p.ext();

    let rows: Vec<(Ext, Option<u64>, u64)> = if args.alpha.is_empty() {
        let table = p.preimage_counts_bruteforce();
        ext.elements()
            .map(|alpha| {
                let observed = table[ext.encode(alpha)] as u64;
                (alpha, p.preimage_count_predicted(alpha), observed)
            })
            .collect()
    } else {
        args.alpha
            .iter()
            .map(|&(x, y)| {
                let alpha = ext.elem(x, y);
                let observed = p.preimages_bruteforce(alpha).len() as u64;
                (alpha, p.preimage_count_predicted(alpha), observed)
            })
            .collect()
    };

    let repro = |alpha: Ext| {
        format!(
            "qdyn preimage --q {q} --a {} --c {} --b {} --alpha {},{}",
            p.a().signed(),
            p.c(),
            p.b(),
            alpha.x,
            alpha.y
        )
    };
    let mismatches: Vec<Ext> = rows
        .iter()
        .filter(|(_, pred, obs)| pred.is_some_and(|n| n != *obs))
        .map(|r| r.0)
        .collect();
    for &alpha in &mismatches {
        eprintln!("reproduce: {}", repro(alpha));
    }
    let code = if mismatches.is_empty() { 0 } else { EXIT_MISMATCH };

    let text = if format == Format::Text {
        let mut out = vec![format!("instance: {p} ({})", p.case())];
        for (alpha, pred, obs) in &rows {
            let pred_s = pred.map_or("n/a".to_owned(), |n| n.to_string());
            let status = match pred {
                None => "uncovered",
                Some(n) if n == obs => "ok",
                Some(_) => "MISMATCH",
            };
            out.push(format!("alpha {alpha}: predicted {pred_s}, observed {obs} [{status}]"));
        }
        if args.alpha.is_empty() {
            let covered = rows.iter().filter(|r| r.1.is_some()).count();
            out.push(format!(
                "{} targets, {covered} with a prediction, {} mismatches",
                rows.len(),
                mismatches.len()
            ));
        }
        out.join("\n")
    } else {
        let items: Vec<serde_json::Value> = rows
            .iter()
            .map(|(alpha, pred, obs)| {
                let mut v = json!({
                    "alpha": alpha,
                    "predicted": pred,
                    "observed": obs,
                    "agree": pred.map(|n| n == *obs),
                });
                if pred.is_some_and(|n| n != *obs) {
                    v["repro"] = json!(repro(*alpha));
                }
                v
            })
            .collect();
        if format == Format::Jsonl {
            items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n")
        } else {
            to_json(
                &json!({
                    "format_version": FORMAT_VERSION,
                    "q": q,
                    "a": p.a().signed(),
                    "c": p.c().value(),
                    "b": p.b().value(),
                    "case": p.case(),
                    "mismatches": mismatches.len(),
                    "targets": items,
                }),
                format,
            )
        }
    };
    Ok(Outcome { text, code })
}
