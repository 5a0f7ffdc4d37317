//! End-to-end acceptance run: one line per criterion, non-zero exit on any failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ellischub::ellclasses::{check_routes, check_word_independence, diff_tables, load_golden, table};
use ellischub::hecke::{verify_relations, RelationFamily};
use ellischub::report::{CheckResult, Status};
use ellischub::theta::{blowup_sides, check_delta_expansion, compare_exprs, fay_residual, DEFAULT_SEED};
use ellischub::transforms::check_transform_theorems;
use ellischub::weightfn::{self, all_perms};
use ellischub::{CheckConfig, FactoredExpr, Result, RootDatum};

/// `None` passes; `Some(detail)` fails.
type Outcome = Result<Option<String>>;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn cfg(points: usize, order: usize) -> CheckConfig {
    CheckConfig::new(points, order, DEFAULT_SEED)
}

/// Summarizes a batch of checks: the count and the first few failures.
fn summarize(checks: &[CheckResult]) -> Option<String> {
    let bad: Vec<&CheckResult> = checks.iter().filter(|c| !c.is_ok()).collect();
    if bad.is_empty() {
        return None;
    }
    let shown: Vec<String> = bad
        .iter()
        .take(3)
        .map(|c| format!("{} ({:?}: {})", c.id, c.status, c.detail.clone().unwrap_or_default()))
        .collect();
    Some(format!("{} of {} checks failed; first: {}", bad.len(), checks.len(), shown.join("; ")))
}

fn golden(datum: RootDatum, file: &str, order: usize) -> Outcome {
    let c = cfg(3, order);
    let computed = table(&datum)?;
    let g = load_golden(&data(file), &datum)?;
    let diff = diff_tables(&computed, &g, &c)?;
    if diff.is_clean() {
        return Ok(None);
    }
    let first = diff.mismatches.first().map(|(o, s, m)| format!("; ({o}, {s}): {m}")).unwrap_or_default();
    Ok(Some(format!(
        "{}/{} matched, {} missing{first}",
        diff.matched,
        diff.total,
        diff.missing.len()
    )))
}

fn routes() -> Outcome {
    let mut all = Vec::new();
    for d in [RootDatum::gl(3), RootDatum::gl(4), RootDatum::sp2()] {
        all.extend(check_routes(&d, &cfg(3, 3))?);
    }
    Ok(summarize(&all))
}

fn words() -> Outcome {
    Ok(summarize(&check_word_independence(&RootDatum::gl(4), &cfg(3, 3))?))
}

fn identities() -> Outcome {
    let c = cfg(5, 6);
    if let Some(m) = compare_exprs(&fay_residual(), &FactoredExpr::zero(), &c)? {
        return Ok(Some(format!("Fay: {m}")));
    }
    let (l, r) = blowup_sides();
    Ok(compare_exprs(&l, &r, &c)?.map(|m| format!("blow-up: {m}")))
}

fn hecke() -> Outcome {
    let c = cfg(3, 4);
    let mut all: Vec<CheckResult> = Vec::new();
    let mut run = |family, d: &RootDatum, trials| {
        all.extend(verify_relations(family, d, trials, &c).iter().map(CheckResult::from));
    };
    run(RelationFamily::Elliptic, &RootDatum::gl(3), 10);
    run(RelationFamily::Elliptic, &RootDatum::sp2(), 10);
    // A3 is here for the commutation of C1 and C3.
    run(RelationFamily::Elliptic, &RootDatum::gl(4), 1);
    run(RelationFamily::Degenerate, &RootDatum::gl(3), 10);
    run(RelationFamily::Degenerate, &RootDatum::sp2(), 10);
    let commutation = all.iter().any(|c| c.id.starts_with("C1C3 = C3C1"));
    if !commutation {
        return Ok(Some("no commutation check for distant generators was generated".into()));
    }
    Ok(summarize(&all))
}

fn identification() -> Outcome {
    let mut all = Vec::new();
    for n in [2, 3] {
        all.extend(weightfn::check_identification(n, &all_perms(n), &cfg(3, 3)));
    }
    let id = vec![1, 2, 3, 4];
    let s1 = vec![2, 1, 3, 4];
    let w0 = vec![4, 3, 2, 1];
    all.extend(weightfn::check_identification(4, &[id, s1, w0], &cfg(3, 2)));
    Ok(summarize(&all))
}

fn recursions() -> Outcome {
    let c = cfg(3, 4);
    let mut all = Vec::new();
    for n in [2, 3] {
        all.extend(weightfn::check_rmatrix(n, &c));
        all.extend(weightfn::check_uni_rw(n, &c));
        all.extend(weightfn::check_uni_bsw(n, &c));
    }
    all.push(weightfn::check_uni_bsw_unrestricted_fails(&c));
    Ok(summarize(&all))
}

fn axioms() -> Outcome {
    let all = weightfn::check_axioms(3, &cfg(3, 4))?;
    let evaluated = all.iter().filter(|c| c.status != Status::Skipped).count();
    if evaluated == 0 {
        return Ok(Some("no axiom was evaluated".into()));
    }
    Ok(summarize(&all))
}

fn transforms() -> Outcome {
    let mut all = Vec::new();
    for d in [RootDatum::gl(2), RootDatum::gl(3), RootDatum::gl(4), RootDatum::sp2()] {
        all.extend(check_transform_theorems(&d)?);
    }
    // One restriction check per Bruhat pair: 3 for n = 2, 19 for n = 3.
    for (group, pairs) in [("a1", 3), ("a2", 19)] {
        let found = all.iter().filter(|c| c.id.starts_with(&format!("Q restricted {group} "))).count();
        if found != pairs {
            return Ok(Some(format!("expected {pairs} restriction checks on {group}, found {found}")));
        }
    }
    Ok(summarize(&all))
}

fn delta_kernel() -> Outcome {
    Ok(check_delta_expansion(&cfg(5, 2))?.map(|m| m.to_string()))
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "GL3 golden table",
            budget: Some(Duration::from_secs(10)),
            run: || golden(RootDatum::gl(3), "gl3.json", 4),
        },
        Criterion {
            name: "Sp2 golden table",
            budget: Some(Duration::from_secs(60)),
            run: || golden(RootDatum::sp2(), "sp2.json", 3),
        },
        Criterion {
            name: "route agreement on A2, A3, C2",
            budget: Some(Duration::from_secs(180)),
            run: routes,
        },
        Criterion {
            name: "reduced-word independence on A3",
            budget: None,
            run: words,
        },
        Criterion {
            name: "Fay and blow-up identities",
            budget: Some(Duration::from_secs(5)),
            run: identities,
        },
        Criterion {
            name: "Hecke relations",
            budget: None,
            run: hecke,
        },
        Criterion {
            name: "weight functions are local elliptic classes",
            budget: Some(Duration::from_secs(120)),
            run: identification,
        },
        Criterion {
            name: "weight-function recursions",
            budget: None,
            run: recursions,
        },
        Criterion {
            name: "axioms for n = 3",
            budget: None,
            run: axioms,
        },
        Criterion {
            name: "transformation calculus",
            budget: None,
            run: transforms,
        },
        Criterion {
            name: "δ kernel regression",
            budget: None,
            run: delta_kernel,
        },
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let detail = match outcome {
            Ok(None) => match c.budget {
                Some(b) if elapsed > b => Some(format!("exceeded the {}s budget", b.as_secs())),
                _ => None,
            },
            Ok(Some(d)) => Some(d),
            Err(e) => Some(format!("error: {e}")),
        };
        let secs = elapsed.as_secs_f64();
        match detail {
            None => println!("criterion {:>2} PASS ({secs:.1}s) {}", i + 1, c.name),
            Some(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL ({secs:.1}s) {}: {d}", i + 1, c.name);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        total.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
