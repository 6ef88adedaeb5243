use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use edd_core::digestgraph::{build_graph, DigestGraph};
use edd_core::generator::{
    instance_from_cuts, random_cuts, random_instance_with_duplicates, CutModel, GenError,
};
use edd_core::instance::{
    label_distinct, label_duplicates, parse_instance, serialize_instance, validate_consistency,
    ConsistencyReport, EddInstance, LabelError,
};
use edd_core::reduction::{extract_path, parse_graph, reduce};
use edd_core::solver::{
    expand_report, solve as run_solve, LabelingStrategy, SolveConfig, SolveError,
};
use edd_core::verifier::{
    brute_force_solve, label_pieces, verify_permutation, OracleError, Solution,
};

use crate::{GenArgs, SolveArgs};

const OK: u8 = 0;
const NO: u8 = 1;
const USAGE: u8 = 2;
const CAP: u8 = 3;

pub struct Output {
    pub code: u8,
    pub text: String,
    pub json: Value,
}

pub struct Failure {
    pub code: u8,
    pub message: String,
}

type Outcome = Result<Output, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<EddInstance, Failure> {
    parse_instance(&read(path)?).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

fn joined<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn one_based(order: &[usize]) -> Vec<usize> {
    order.iter().map(|i| i + 1).collect()
}

fn violations_json(report: &ConsistencyReport) -> Value {
    report
        .violations
        .iter()
        .map(|v| json!({"rule": v.rule.id(), "index": v.index.map(|i| i + 1), "detail": v.detail}))
        .collect()
}

fn violations_text(report: &ConsistencyReport) -> String {
    report
        .violations
        .iter()
        .map(|v| format!("{} {}\n", v.rule, v.detail))
        .collect()
}

fn solution_text(out: &mut String, inst: &EddInstance, s: &Solution) {
    let _ = writeln!(out, "piA: {}", joined(s.a_values(inst)));
    let _ = writeln!(out, "piB: {}", joined(s.b_values(inst)));
    let _ = writeln!(out, "piC: {}", joined(s.c_values()));
    let _ = writeln!(out, "PA: {}", joined(one_based(&s.pi_a)));
    let _ = writeln!(out, "PB: {}", joined(one_based(&s.pi_b)));
}

fn solution_json(inst: &EddInstance, s: &Solution) -> Value {
    json!({
        "piA": s.a_values(inst),
        "piB": s.b_values(inst),
        "piC": s.c_values(),
        "PA": one_based(&s.pi_a),
        "PB": one_based(&s.pi_b),
    })
}

pub fn check(file: &Path) -> Outcome {
    let inst = load(file)?;
    let report = validate_consistency(&inst);
    let (p, q, n) = (inst.p(), inst.q(), inst.c_len());
    let text = if report.is_consistent() {
        format!("consistent: p={p} q={q} n={n}\n")
    } else {
        violations_text(&report)
    };
    Ok(Output {
        code: if report.is_consistent() { OK } else { NO },
        text,
        json: json!({
            "consistent": report.is_consistent(),
            "p": p, "q": q, "n": n,
            "violations": violations_json(&report),
        }),
    })
}

fn cap_failure(e: LabelError) -> Failure {
    match e {
        LabelError::AssignmentCapExceeded { .. } => {
            fail(CAP, format!("{e}; raise --max-assignments"))
        }
        LabelError::Inconsistent { .. } => fail(NO, e.to_string()),
    }
}

/// Graph of the `id`-th labeling, in the order `solve` tried them.
fn assignment_graph(
    inst: &EddInstance,
    cfg: &SolveConfig,
    id: usize,
) -> Result<DigestGraph, Failure> {
    let labeled = match cfg.labeling {
        LabelingStrategy::Distinct => label_distinct(inst, cfg.max_assignments),
        LabelingStrategy::Exhaustive => label_duplicates(inst, cfg.max_assignments),
    }
    .map_err(cap_failure)?
    .nth(id)
    .expect("solve reported this assignment");
    Ok(build_graph(&labeled))
}

pub fn solve(a: &SolveArgs) -> Outcome {
    let inst = load(&a.file)?;
    let labeling = if a.exhaustive_labeling {
        LabelingStrategy::Exhaustive
    } else {
        LabelingStrategy::Distinct
    };
    let cfg = SolveConfig {
        max_assignments: a.max_assignments,
        max_expansions: a.max_solutions,
        labeling,
    };
    let report = match run_solve(&inst, &cfg) {
        Ok(r) => r,
        Err(SolveError::Inconsistent(report)) => {
            return Ok(Output {
                code: NO,
                text: format!(
                    "no solution: inconsistent instance\n{}",
                    violations_text(&report)
                ),
                json: json!({
                    "solvable": false,
                    "reason": "INCONSISTENT",
                    "violations": violations_json(&report),
                }),
            });
        }
        Err(SolveError::Labeling(e)) => return Err(cap_failure(e)),
    };

    let mut text = format!(
        "assignments: {} tried, {} rejected\n",
        report.assignments, report.rejected
    );
    let mut json = json!({
        "solvable": report.is_solvable(),
        "assignments": report.assignments.to_string(),
        "rejected": report.rejected,
    });

    if a.dump_graph {
        let graph = match report.families.first() {
            Some(f) => build_graph(&f.labeled).edge_list(),
            None => {
                let id = report.first_rejection.as_ref().map_or(0, |r| r.0);
                assignment_graph(&inst, &cfg, id)?.edge_list()
            }
        };
        text.push_str("graph:\n");
        text.push_str(&graph);
        if !graph.ends_with('\n') {
            text.push('\n');
        }
        json["graph"] = graph.lines().collect::<Vec<_>>().into();
    }

    if !report.is_solvable() {
        let (id, why) = report
            .first_rejection
            .expect("an unsolvable report has a rejection");
        let detail = why.describe(&assignment_graph(&inst, &cfg, id)?);
        let _ = writeln!(text, "no solution: {} (assignment {})", detail, id + 1);
        json["reason"] = why.code().into();
        json["detail"] = detail.into();
        json["assignment"] = (id + 1).into();
        return Ok(Output {
            code: NO,
            text,
            json,
        });
    }

    let families: Vec<Value> = report
        .families
        .iter()
        .map(|f| {
            json!({
                "assignment": f.assignment_id + 1,
                "family": f.family.to_string(),
                "orders": f.family.expansion_count().to_string(),
            })
        })
        .collect();
    json["families"] = families.into();
    if a.emit_families {
        for f in &report.families {
            let _ = writeln!(
                text,
                "family (assignment {}, {} orders): {}",
                f.assignment_id + 1,
                f.family.expansion_count(),
                f.family
            );
        }
    }

    let wanted = if a.all { a.max_solutions } else { 1 };
    let set = expand_report(&report, &inst, wanted);
    let truncated = a.all && set.truncated;

    let mut sols = Vec::new();
    for (i, f) in set.solutions.iter().enumerate() {
        let _ = writeln!(
            text,
            "solution {} (assignment {})",
            i + 1,
            f.assignment_id + 1
        );
        if !a.emit_families {
            let family = report
                .families
                .iter()
                .find(|x| x.assignment_id == f.assignment_id)
                .expect("every map comes from a family");
            let _ = writeln!(text, "family: {}", family.family);
        }
        solution_text(&mut text, &inst, &f.solution);
        let mut js = solution_json(&inst, &f.solution);
        js["assignment"] = (f.assignment_id + 1).into();
        sols.push(js);
    }
    json["solutions"] = sols.into();
    json["truncated"] = truncated.into();
    let code = if truncated {
        let _ = writeln!(
            text,
            "truncated: stopped after {} maps",
            set.solutions.len()
        );
        CAP
    } else {
        OK
    };
    Ok(Output { code, text, json })
}

fn parse_order(s: &str, which: &str) -> Result<Vec<usize>, Failure> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(fail(
                USAGE,
                format!("{which}: `{t}` is not a 1-based index"),
            )),
        })
        .collect()
}

pub fn verify(file: &Path, pa: &str, pb: &str) -> Outcome {
    let inst = load(file)?;
    let pa = parse_order(pa, "--pa")?;
    let pb = parse_order(pb, "--pb")?;
    Ok(match verify_permutation(&inst, &pa, &pb) {
        Ok(layout) => {
            let s = Solution {
                pi_c: label_pieces(&layout.pieces),
                pi_a: pa,
                pi_b: pb,
            };
            let mut text = String::from("valid\n");
            solution_text(&mut text, &inst, &s);
            let mut js = solution_json(&inst, &s);
            js["valid"] = true.into();
            Output {
                code: OK,
                text,
                json: js,
            }
        }
        Err(r) => Output {
            code: NO,
            text: format!("invalid: {}: {r}\n", r.code()),
            json: json!({"valid": false, "code": r.code(), "detail": r.to_string()}),
        },
    })
}

pub fn oracle(file: &Path, limit: usize) -> Outcome {
    let inst = load(file)?;
    let sols = brute_force_solve(&inst, limit).map_err(|e| match e {
        OracleError::CapExceeded { .. } => fail(CAP, format!("{e}; raise --limit")),
    })?;
    let mut text = format!("solutions: {}\n", sols.len());
    let mut js = Vec::new();
    for (i, s) in sols.iter().enumerate() {
        let _ = writeln!(text, "solution {}", i + 1);
        solution_text(&mut text, &inst, s);
        js.push(solution_json(&inst, s));
    }
    Ok(Output {
        code: if sols.is_empty() { NO } else { OK },
        text,
        json: json!({"count": sols.len(), "solutions": js}),
    })
}

fn parse_positions(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| fail(USAGE, format!("`{t}` is not a cut position")))
        })
        .collect()
}

fn gen_failure(e: GenError) -> Failure {
    match e {
        GenError::RetriesExhausted { .. } => fail(CAP, format!("{e}; raise --max-attempts")),
        _ => fail(USAGE, e.to_string()),
    }
}

pub fn gen(a: &GenArgs) -> Outcome {
    let cuts = match (&a.cuts_a, &a.cuts_b) {
        (Some(ca), Some(cb)) => CutModel::new(a.length, parse_positions(ca)?, parse_positions(cb)?)
            .map_err(gen_failure)?,
        (None, None) => match a.min_duplicates {
            Some(k) => {
                random_instance_with_duplicates(a.seed, a.p, a.q, a.length, k, a.max_attempts)
                    .map_err(gen_failure)?
                    .2
            }
            None => random_cuts(a.seed, a.p, a.q, a.length).map_err(gen_failure)?,
        },
        _ => return Err(fail(USAGE, "--cuts-a and --cuts-b go together")),
    };
    let (inst, _) = instance_from_cuts(&cuts);
    let edd = serialize_instance(&inst);
    if let Some(path) = &a.truth {
        write(path, &cuts.truth_text())?;
    }
    let json = json!({
        "p": inst.p(), "q": inst.q(), "n": inst.c_len(),
        "total_length": cuts.total_length,
        "cuts_a": cuts.cuts_a,
        "cuts_b": cuts.cuts_b,
        "instance": edd,
    });
    let text = match &a.output {
        Some(path) => {
            write(path, &edd)?;
            format!(
                "wrote {} (p={} q={} n={})\n",
                path.display(),
                inst.p(),
                inst.q(),
                inst.c_len()
            )
        }
        None => edd,
    };
    Ok(Output {
        code: OK,
        text,
        json,
    })
}

fn load_graph(path: &Path) -> Result<edd_core::reduction::SimpleGraph, Failure> {
    parse_graph(&read(path)?).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

pub fn reduce_hp(graph: &Path, output: Option<&Path>) -> Outcome {
    let h = load_graph(graph)?;
    let reduced = reduce(&h);
    let edd = reduced.to_text();
    let inst = &reduced.instance;
    let json = json!({
        "p": inst.p(), "q": inst.q(), "n": inst.c_len(),
        "t": reduced.augmented.t(),
        "z": reduced.augmented.z(),
        "instance": edd,
    });
    let text = match output {
        Some(path) => {
            write(path, &edd)?;
            format!(
                "wrote {} (p={} q={} n={})\n",
                path.display(),
                inst.p(),
                inst.q(),
                inst.c_len()
            )
        }
        None => edd,
    };
    Ok(Output {
        code: OK,
        text,
        json,
    })
}

/// First `PA:` and `PB:` lines of a solution file.
fn read_solution_lines(path: &Path) -> Result<(Vec<usize>, Vec<usize>), Failure> {
    let text = read(path)?;
    let find = |tag: &str| {
        text.lines()
            .find_map(|l| l.trim().strip_prefix(tag))
            .ok_or_else(|| fail(USAGE, format!("{}: no `{tag}` line", path.display())))
    };
    Ok((
        parse_order(find("PA:")?, "PA")?,
        parse_order(find("PB:")?, "PB")?,
    ))
}

pub fn extract_hp(graph: &Path, solution: &Path) -> Outcome {
    let h = load_graph(graph)?;
    let (pa, pb) = read_solution_lines(solution)?;
    let reduced = reduce(&h);
    let layout = match verify_permutation(&reduced.instance, &pa, &pb) {
        Ok(l) => l,
        Err(r) => {
            return Ok(Output {
                code: NO,
                text: format!("invalid: {}: {r}\n", r.code()),
                json: json!({"valid": false, "code": r.code(), "detail": r.to_string()}),
            })
        }
    };
    let s = Solution {
        pi_c: label_pieces(&layout.pieces),
        pi_a: pa,
        pi_b: pb,
    };
    Ok(match extract_path(&s, &reduced) {
        Ok(path) => Output {
            code: OK,
            text: format!("path: {}\n", joined(&path)),
            json: json!({"valid": true, "path": path}),
        },
        Err(e) => Output {
            code: NO,
            text: format!("invalid: {e}\n"),
            json: json!({"valid": false, "code": "MALFORMED_SOLUTION", "detail": e.to_string()}),
        },
    })
}
