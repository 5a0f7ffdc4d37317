use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ellischub::ellclasses::{self, check_routes, check_word_independence, diff_tables, load_golden};
use ellischub::hecke::{check_limits, verify_relations, RelationFamily};
use ellischub::report::{CheckResult, Report, Status};
use ellischub::theta::{blowup_sides, check_delta_expansion, compare_exprs, fay_residual, four_term_sides};
use ellischub::{transforms, weightfn, CheckConfig, Error, FactoredExpr, RootDatum};

#[derive(Parser)]
#[command(name = "ellischub", version, about = "Elliptic classes of Schubert varieties, verified exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in datum (a1..a4, c2) or path to a JSON root datum.
    #[arg(long, global = true, default_value = "a2")]
    group: String,
    /// q-truncation order.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    /// Number of random evaluation points per check.
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    points: u64,
    #[arg(long, global = true, env = "ELLISCHUB_SEED", default_value_t = ellischub::theta::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Golden table to diff against (`table` only).
    #[arg(long, global = true)]
    golden: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Compute E_σ(X_ω) for all pairs, cross-check the routes, optionally diff a golden file.
    Table {
        /// Write the table as JSON with its checksum.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Route agreement and reduced-word independence of the classes.
    CheckRecursions,
    /// Relations of the elliptic and degenerate Hecke operators.
    CheckHecke {
        /// Random tuples per relation.
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Weight-function identification, recursions and axioms (type A).
    CheckWeightfn {
        /// Also report whether lexicographic-word Bott–Samelson classes share normal forms with weight functions.
        #[arg(long)]
        lex_experiment: bool,
    },
    /// Transformation quadratic forms.
    CheckTransforms,
    /// Fay, blow-up, four-term and δ-expansion identities.
    CheckIdentities,
    /// q → 0 limits of the classes.
    Limits,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            print(&report, cli.run.format);
            if report.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::InvalidDatum(_) | Error::Golden(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn config(run: &RunArgs) -> CheckConfig {
    CheckConfig::new(run.points as usize, run.order as usize, run.seed)
}

fn run(cli: &Cli) -> ellischub::Result<Report> {
    let cfg = config(&cli.run);
    let datum = || RootDatum::load(&cli.run.group);
    if cli.run.golden.is_some() && !matches!(cli.command, Command::Table { .. }) {
        return Err(Error::Usage("--golden applies to `table` only".into()));
    }
    match &cli.command {
        Command::Table { emit } => table(&datum()?, &cfg, cli.run.golden.as_ref(), emit.as_ref(), cli.run.format),
        Command::CheckRecursions => {
            let d = datum()?;
            let mut checks = check_routes(&d, &cfg)?;
            checks.extend(check_word_independence(&d, &cfg)?);
            Ok(Report::new("recursions", checks))
        }
        Command::CheckHecke { trials } => {
            let d = datum()?;
            let mut checks: Vec<CheckResult> = Vec::new();
            for family in [RelationFamily::Elliptic, RelationFamily::Degenerate] {
                checks.extend(verify_relations(family, &d, *trials, &cfg).iter().map(CheckResult::from));
            }
            Ok(Report::new("hecke", checks))
        }
        Command::CheckWeightfn { lex_experiment } => weight_functions(&datum()?, &cfg, *lex_experiment),
        Command::CheckTransforms => Ok(Report::new("transforms", transforms::check_transform_theorems(&datum()?)?)),
        Command::CheckIdentities => identities(&cfg),
        Command::Limits => Ok(Report::new("limits", check_limits(&datum()?, &cfg)?)),
    }
}

fn table(
    datum: &RootDatum,
    cfg: &CheckConfig,
    golden: Option<&PathBuf>,
    emit: Option<&PathBuf>,
    format: Format,
) -> ellischub::Result<Report> {
    let t = ellclasses::table(datum)?;
    if format == Format::Text {
        for ((o, s), e) in &t.entries {
            println!("E_{s}(X_{o}) = {e}");
        }
    }
    if let Some(path) = emit {
        let json = serde_json::to_string_pretty(&t.to_file()?).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    }
    let mut checks = check_routes(datum, cfg)?;
    if let Some(path) = golden {
        let g = load_golden(path, datum)?;
        let diff = diff_tables(&t, &g, cfg)?;
        for key in t.entries.keys() {
            let (o, s) = key;
            let id = format!("golden {} ω={o} σ={s}", datum.name);
            let detail = if diff.missing.contains(key) {
                Some("missing from golden file".to_string())
            } else {
                diff.mismatches
                    .iter()
                    .find(|(mo, ms, _)| mo == o && ms == s)
                    .map(|(_, _, m)| m.to_string())
            };
            checks.push(CheckResult::from_outcome(id, Ok(detail)));
        }
        for (o, s) in g.entries.keys().filter(|k| !t.entries.contains_key(k)) {
            checks.push(CheckResult::from_outcome(
                format!("golden {} ω={o} σ={s}", datum.name),
                Ok(Some("golden entry has no computed counterpart".into())),
            ));
        }
    }
    Ok(Report::new("table", checks))
}

fn weight_functions(datum: &RootDatum, cfg: &CheckConfig, lex: bool) -> ellischub::Result<Report> {
    if !datum.is_type_a() {
        return Err(Error::Usage(format!("weight functions need a type A datum, got {}", datum.name)));
    }
    let n = datum.ambient_dim;
    if n > weightfn::WEIGHT_CAP {
        return Err(Error::Usage(format!("weight functions are expanded for n ≤ {}", weightfn::WEIGHT_CAP)));
    }
    let mut checks = weightfn::check_identification(n, &weightfn::all_perms(n), cfg);
    checks.extend(weightfn::check_normalized_identification(n, cfg));
    checks.extend(weightfn::check_rmatrix(n, cfg));
    checks.extend(weightfn::check_upgoing(n, cfg));
    checks.extend(weightfn::check_uni_rw(n, cfg));
    checks.extend(weightfn::check_uni_bsw(n, cfg));
    if n == 2 {
        checks.push(weightfn::check_uni_bsw_unrestricted_fails(cfg));
    }
    checks.extend(weightfn::check_symmetry(n, cfg)?);
    checks.extend(weightfn::check_axioms(n, cfg)?);
    if lex {
        for c in weightfn::lex_word_experiment(n)? {
            let label = |w: &[usize]| w.iter().map(|v| v.to_string()).collect::<String>();
            checks.push(CheckResult {
                id: format!("lex-word normal form n={n} ω={} σ={}", label(&c.omega), label(&c.sigma)),
                status: Status::Pass,
                detail: Some(if c.coincide { "coincide" } else { "differ" }.into()),
            });
        }
    }
    Ok(Report::new("weightfn", checks))
}

fn identities(cfg: &CheckConfig) -> ellischub::Result<Report> {
    let against = |id: &str, l: &FactoredExpr, r: &FactoredExpr| {
        CheckResult::from_outcome(id, compare_exprs(l, r, cfg).map(|m| m.map(|m| m.to_string())))
    };
    let (b1, b2) = blowup_sides();
    let (f1, f2) = four_term_sides();
    let checks = vec![
        against("fay trisecant", &fay_residual(), &FactoredExpr::zero()),
        against("blow-up", &b1, &b2),
        against("four-term", &f1, &f2),
        CheckResult::from_outcome(
            "delta expansion",
            check_delta_expansion(cfg).map(|m| m.map(|m| m.to_string())),
        ),
    ];
    Ok(Report::new("identities", checks))
}

fn print(report: &Report, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(report).expect("reports serialize")),
        Format::Text => {
            for c in &report.checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Error => "ERROR",
                    Status::Skipped => "SKIP",
                };
                match &c.detail {
                    Some(d) => println!("{tag:5} {}: {d}", c.id),
                    None => println!("{tag:5} {}", c.id),
                }
            }
            let failed = report.failures().count();
            println!("{}: {} checks, {} failed", report.suite, report.checks.len(), failed);
        }
    }
}
