//! Command dispatch for the `adjust` binary.
//!
//! Exit codes: 0 success (or positive verdict), 1 negative verdict,
//! 2 input error, 3 no admissible adjustment set exists.

pub mod bn_format;
pub mod format;

use adjust_core::adjustment::{
    exists_adjustment, forbidden_set, graphical_compare, is_adjustment_set, Comparison, Query,
    Violation,
};
use adjust_core::cuts::{find_opt, find_opt_minimal, find_opt_minimum, CutResult};
use adjust_core::graph::{Dag, VertexSet};
use adjust_core::oracle::{
    enumerate_adjustment_sets, influence_variance, DiscreteBn, EnumerationMode, Policy,
    VarianceReport,
};
use adjust_core::random::{random_bn, random_policy};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_ADMISSIBLE: i32 = 3;

/// Tolerance for flagging a variance ordering that contradicts a graphical
/// certificate.
const ORDER_SLACK: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "adjust",
    version,
    about = "Covariate adjustment sets on causal DAGs: validation, optimal sets, enumeration, exact variances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a candidate adjustment set
    Check {
        #[command(flatten)]
        query: QueryArgs,
        /// Candidate set as comma-separated labels; empty string for the empty set
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long)]
        json: bool,
    },
    /// Compute the optimal adjustment sets
    Optimal {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        /// Write the efficiency graph to this file (undirected text format)
        #[arg(long, value_name = "FILE")]
        dump_h1: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// List valid adjustment sets by exhaustive search
    Enumerate {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Exact policy value and estimator variance per candidate set
    Variance {
        #[command(flatten)]
        query: QueryArgs,
        /// Discrete-model file; mutually exclusive with --random
        #[arg(long, conflicts_with = "random")]
        bn: Option<PathBuf>,
        /// Generate a random model (and policy) from this seed
        #[arg(long)]
        random: Option<u64>,
        /// States per vertex for --random
        #[arg(long, default_value_t = 2)]
        cardinality: usize,
        /// Probability floor for --random, keeping treatment probabilities positive
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Candidate sets; repeat the flag once per set
        #[arg(long = "set", allow_hyphen_values = true)]
        sets: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// Graph file (text or JSON)
    #[arg(long)]
    graph: PathBuf,
    /// Treatment vertex label
    #[arg(long)]
    exposure: String,
    /// Outcome vertex label
    #[arg(long)]
    outcome: String,
    /// Policy covariate labels, comma-separated
    #[arg(long)]
    policy: Option<String>,
    /// Observable labels, comma-separated; defaults to all non-hidden nodes
    #[arg(long)]
    observed: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    O,
    OMin,
    OM,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    All,
    Minimal,
    Minimum,
}

struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: EXIT_INPUT,
        }
    }
}

impl From<adjust_core::Error> for CliError {
    fn from(e: adjust_core::Error) -> CliError {
        CliError::input(e.to_string())
    }
}

/// Runs the CLI against explicit argument and output streams; returns the
/// exit code. `main` is a thin wrapper over this.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_INPUT,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Check { query, set, json } => cmd_check(&query, &set, json, out),
        Command::Optimal {
            query,
            which,
            dump_h1,
            json,
        } => cmd_optimal(&query, which, dump_h1.as_deref(), json, out),
        Command::Enumerate { query, mode, json } => cmd_enumerate(&query, mode, json, out),
        Command::Variance {
            query,
            bn,
            random,
            cardinality,
            epsilon,
            sets,
            json,
        } => cmd_variance(
            &query,
            bn.as_deref(),
            random,
            cardinality,
            epsilon,
            &sets,
            json,
            out,
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn load_graph(path: &std::path::Path) -> Result<Dag, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    format::parse_graph(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn resolve_label(g: &Dag, label: &str) -> Result<usize, CliError> {
    g.index_of(label)
        .ok_or_else(|| CliError::input(format!("unknown node `{label}`")))
}

fn resolve_list(g: &Dag, spec: &str) -> Result<VertexSet, CliError> {
    let mut out = VertexSet::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.insert(resolve_label(g, part)?);
    }
    Ok(out)
}

fn build_query(g: &Dag, args: &QueryArgs) -> Result<Query, CliError> {
    if args.exposure.contains(',') {
        return Err(CliError::input("a single treatment vertex is required"));
    }
    let a = resolve_label(g, &args.exposure)?;
    let y = resolve_label(g, &args.outcome)?;
    let l = match &args.policy {
        Some(spec) => resolve_list(g, spec)?,
        None => VertexSet::new(),
    };
    let n = match &args.observed {
        Some(spec) => Some(resolve_list(g, spec)?),
        None => None,
    };
    Query::new(g, a, y, l, n).map_err(CliError::from)
}

fn set_labels(g: &Dag, s: &VertexSet) -> Vec<String> {
    s.iter().map(|v| g.label(v).to_string()).collect()
}

fn violation_text(g: &Dag, q: &Query, v: Violation) -> String {
    match v {
        Violation::NotBetweenLandN => {
            "not between the policy covariates and the observable set".to_string()
        }
        Violation::IntersectsForbidden => {
            format!(
                "intersects the forbidden set {}",
                g.format_set(&forbidden_set(g, q))
            )
        }
        Violation::SeparationFails => "fails the back-door separation".to_string(),
    }
}

fn violation_slug(v: Violation) -> &'static str {
    match v {
        Violation::NotBetweenLandN => "not-between-l-and-n",
        Violation::IntersectsForbidden => "intersects-forbidden",
        Violation::SeparationFails => "separation-fails",
    }
}

fn cmd_check(
    args: &QueryArgs,
    set: &str,
    as_json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(&args.graph)?;
    let q = build_query(&g, args)?;
    let z = resolve_list(&g, set)?;
    let cert = is_adjustment_set(&g, &q, &z)?;
    if as_json {
        let payload = json!({
            "set": set_labels(&g, &z),
            "valid": cert.valid(),
            "violated_clause": cert.violation().map(violation_slug),
        });
        let _ = writeln!(out, "{payload}");
    } else {
        let _ = writeln!(out, "candidate: {}", g.format_set(&z));
        match cert.violation() {
            None => {
                let _ = writeln!(out, "verdict: VALID");
            }
            Some(v) => {
                let _ = writeln!(out, "verdict: INVALID ({})", violation_text(&g, &q, v));
            }
        }
    }
    Ok(if cert.valid() { EXIT_OK } else { EXIT_NEGATIVE })
}

fn guarantee_text(g: &Dag, q: &Query) -> (bool, String) {
    let an = adjust_core::efficiency::ancestral_closure(g, q);
    let ancestral = q.n().is_subset(&an);
    let full = *q.n() == g.all_vertices();
    let text = if ancestral || full {
        let mut reasons = Vec::new();
        if ancestral {
            reasons.push("N is contained in an({A,Y} u L)");
        }
        if full {
            reasons.push("N covers every vertex");
        }
        format!("guaranteed ({})", reasons.join("; "))
    } else {
        "not guaranteed: requires N within an({A,Y} u L) or N = V; \
         the set is still a valid adjustment set, but some other valid set \
         may yield a smaller variance on some laws"
            .to_string()
    };
    (ancestral || full, text)
}

fn cmd_optimal(
    args: &QueryArgs,
    which: Which,
    dump_h1: Option<&std::path::Path>,
    as_json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(&args.graph)?;
    let q = build_query(&g, args)?;
    if let Some(path) = dump_h1 {
        let eg = adjust_core::build_h1(&g, &q);
        std::fs::write(path, format::serialize_ugraph(eg.h1()))
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    }
    if !exists_adjustment(&g, &q) {
        if as_json {
            let _ = writeln!(out, "{}", json!({"admissible": false}));
        } else {
            let _ = writeln!(out, "NO-ADMISSIBLE-SET");
        }
        return Ok(EXIT_NO_ADMISSIBLE);
    }
    let wanted: &[Which] = match which {
        Which::All => &[Which::O, Which::OMin, Which::OM],
        _ => std::slice::from_ref(&which),
    };
    let mut payload = json!({"admissible": true});
    if !as_json {
        let _ = writeln!(out, "admissible: yes");
    }
    for w in wanted {
        let (name, key, result): (&str, &str, CutResult) = match w {
            Which::O => ("O", "o", find_opt(&g, &q)),
            Which::OMin => ("O_min", "o_min", find_opt_minimal(&g, &q)),
            Which::OM => ("O_m", "o_m", find_opt_minimum(&g, &q)),
            Which::All => unreachable!(),
        };
        let set = result.set.expect("admissibility was checked");
        if as_json {
            let mut entry = json!({"set": set_labels(&g, &set)});
            if let Some(guaranteed) = result.global_guaranteed {
                let (_, text) = guarantee_text(&g, &q);
                entry["global_guaranteed"] = json!(guaranteed);
                entry["guarantee"] = json!(text);
            }
            payload[key] = entry;
        } else {
            let mut line = format!("{name}: {}", g.format_set(&set));
            if result.global_guaranteed.is_some() {
                let (_, text) = guarantee_text(&g, &q);
                line.push_str(&format!("   [globally optimal: {text}]"));
            }
            let _ = writeln!(out, "{line}");
        }
    }
    if as_json {
        let _ = writeln!(out, "{payload}");
    }
    Ok(EXIT_OK)
}

fn cmd_enumerate(
    args: &QueryArgs,
    mode: Mode,
    as_json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(&args.graph)?;
    let q = build_query(&g, args)?;
    let mode_core = match mode {
        Mode::All => EnumerationMode::All,
        Mode::Minimal => EnumerationMode::Minimal,
        Mode::Minimum => EnumerationMode::Minimum,
    };
    let sets = enumerate_adjustment_sets(&g, &q, mode_core)?;
    if as_json {
        let mode_name = match mode {
            Mode::All => "all",
            Mode::Minimal => "minimal",
            Mode::Minimum => "minimum",
        };
        let payload = json!({
            "mode": mode_name,
            "sets": sets.iter().map(|z| set_labels(&g, z)).collect::<Vec<_>>(),
        });
        let _ = writeln!(out, "{payload}");
    } else {
        for z in &sets {
            let _ = writeln!(out, "{}", g.format_set(z));
        }
        if sets.is_empty() {
            let _ = writeln!(out, "(none)");
        }
    }
    Ok(EXIT_OK)
}

enum Row {
    Ok {
        set: VertexSet,
        report: VarianceReport,
    },
    Failed {
        set: VertexSet,
        reason: String,
    },
}

#[allow(clippy::too_many_arguments)]
fn cmd_variance(
    args: &QueryArgs,
    bn_path: Option<&std::path::Path>,
    random: Option<u64>,
    cardinality: usize,
    epsilon: f64,
    sets: &[String],
    as_json: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(&args.graph)?;
    let q = build_query(&g, args)?;
    if sets.is_empty() {
        return Err(CliError::input("pass at least one --set"));
    }
    let (bn, policy, policy_desc): (DiscreteBn, Policy, String) = match (bn_path, random) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            let bn = bn_format::parse_bn(&text, &g, q.y())
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let pi = Policy::uniform(&bn, &q);
            (bn, pi, "uniform over treatment states".to_string())
        }
        (None, Some(seed)) => {
            if cardinality < 2 {
                return Err(CliError::input("--cardinality must be at least 2"));
            }
            if epsilon <= 0.0 || epsilon >= 1.0 / cardinality as f64 {
                return Err(CliError::input("--epsilon must lie in (0, 1/cardinality)"));
            }
            let bn = random_bn(&g, seed, cardinality, epsilon);
            let pi = random_policy(&bn, &q, seed.wrapping_add(1));
            (bn, pi, format!("seeded stochastic policy (seed {seed})"))
        }
        (None, None) => return Err(CliError::input("pass either --bn FILE or --random SEED")),
        (Some(_), Some(_)) => unreachable!("clap forbids the combination"),
    };

    let mut rows = Vec::new();
    for spec in sets {
        let z = match resolve_list(&g, spec) {
            Ok(z) => z,
            Err(e) => {
                rows.push(Row::Failed {
                    set: VertexSet::new(),
                    reason: e.message,
                });
                continue;
            }
        };
        match influence_variance(&bn, &q, &policy, &z) {
            Ok(report) => rows.push(Row::Ok { set: z, report }),
            Err(e) => rows.push(Row::Failed {
                set: z,
                reason: e.to_string(),
            }),
        }
    }

    // Pairwise graphical certificates among the sets that produced numbers,
    // cross-checked against the exact variances.
    let mut comparisons = Vec::new();
    let mut internal_error = false;
    let ok_rows: Vec<(&VertexSet, &VarianceReport)> = rows
        .iter()
        .filter_map(|r| match r {
            Row::Ok { set, report } => Some((set, report)),
            Row::Failed { .. } => None,
        })
        .collect();
    for (i, &(zi, ri)) in ok_rows.iter().enumerate() {
        for &(zj, rj) in ok_rows.iter().skip(i + 1) {
            for (za, ra, zb, rb) in [(zi, ri, zj, rj), (zj, rj, zi, ri)] {
                let verdict = graphical_compare(&g, &q, za, zb)?;
                if verdict == Comparison::GNotWorse {
                    let numeric_ok = ra.sigma2 <= rb.sigma2 + ORDER_SLACK;
                    internal_error |= !numeric_ok;
                    comparisons.push((za.clone(), zb.clone(), numeric_ok));
                }
            }
        }
    }

    if as_json {
        let payload = json!({
            "policy": policy_desc,
            "rows": rows.iter().map(|r| match r {
                Row::Ok { set, report } => json!({
                    "set": set_labels(&g, set),
                    "chi": report.chi,
                    "sigma2": report.sigma2,
                    "arm_variances": report.components.iter()
                        .map(|c| json!({"treatment_state": c.a_state, "variance": c.variance}))
                        .collect::<Vec<_>>(),
                }),
                Row::Failed { set, reason } => json!({
                    "set": set_labels(&g, set),
                    "error": reason,
                }),
            }).collect::<Vec<_>>(),
            "comparisons": comparisons.iter().map(|(za, zb, ok)| json!({
                "not_worse": set_labels(&g, za),
                "than": set_labels(&g, zb),
                "numeric_confirmed": ok,
            })).collect::<Vec<_>>(),
        });
        let _ = writeln!(out, "{payload}");
    } else {
        let _ = writeln!(out, "policy: {policy_desc}");
        let _ = writeln!(out, "{:<24} {:>18} {:>18}", "set", "chi", "sigma2");
        for r in &rows {
            match r {
                Row::Ok { set, report } => {
                    let _ = writeln!(
                        out,
                        "{:<24} {:>18.12} {:>18.12}",
                        g.format_set(set),
                        report.chi,
                        report.sigma2
                    );
                }
                Row::Failed { set, reason } => {
                    let _ = writeln!(out, "{:<24} ERROR: {reason}", g.format_set(set));
                }
            }
        }
        for (za, zb, ok) in &comparisons {
            let status = if *ok {
                "numeric: confirmed"
            } else {
                "INTERNAL-ERROR: exact variances contradict the certificate"
            };
            let _ = writeln!(
                out,
                "compare {} <= {}: graphically not worse; {status}",
                g.format_set(za),
                g.format_set(zb)
            );
        }
    }
    Ok(if internal_error {
        EXIT_NEGATIVE
    } else {
        EXIT_OK
    })
}
