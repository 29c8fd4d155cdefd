//! Acceptance suite. Every check is exact; one line per criterion.
//!
//! Runs without the libtest harness so the summary is always printed.

use std::path::Path;
use std::process::{Command, ExitCode, Output};

use zdistill_core::combinatorics::ratio;
use zdistill_core::distillation::{distill_with, oracle_distill};
use zdistill_core::verify::{
    bit_flip_sweep, composition_sweep, distillation_sweep, norm_sweep, permutation_sweep, selection_sweep,
    AlphaMode, DistillRange, SweepResult,
};
use zdistill_core::{
    distill_step, execute_plan, gen_exact_plan, gen_exponential_plan, gen_incremental_plan, BlockSum,
    DenseOracle, DistillError, ExecuteOptions, Selection, X0Spec,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const SEED: u64 = 2012;

/// Criterion 3's range: k <= 3, 2k <= N1, N2 <= 8, N1 + N2 <= 14.
const DISTILL_RANGE: DistillRange = DistillRange { max_k: 3, max_operand: 8, max_total: 14 };

fn sweeps(results: &[SweepResult]) -> Check {
    let summary: Vec<String> =
        results.iter().map(|r| format!("{} {}/{}", r.name, r.checked - r.failed, r.checked)).collect();
    match results.iter().find(|r| !r.passed()) {
        None => Ok(summary.join(", ")),
        Some(r) => Err(r.to_string()),
    }
}

fn composition() -> Check {
    sweeps(&[composition_sweep(12, &DenseOracle::default())])
}

fn norm_law() -> Check {
    sweeps(&[norm_sweep(16, 14, &DenseOracle::default())])
}

fn distillation() -> Check {
    sweeps(&[distillation_sweep(DISTILL_RANGE, AlphaMode::Collecting, &DenseOracle::default())])
}

fn w_example_numbers() -> Check {
    let oracle = DenseOracle::default();
    for (k, n, expected) in [(1, 3, ratio(2, 9)), (2, 5, ratio(1, 15))] {
        let a = BlockSum::z_state(k, n, "A").unwrap();
        let b = BlockSum::z_state(k, n, "B").unwrap();
        let step = distill_step(&a, &b, &Selection::first(k), "C").map_err(|e| e.to_string())?;
        let out = 2 * n - 2 * k;
        if step.post_state != BlockSum::z_state(k, out, "C").unwrap() {
            return Err(format!("k={k} {n}+{n}: post-state is {}", step.post_state));
        }
        let spec = X0Spec::collecting(k).unwrap();
        let dense =
            oracle_distill(&oracle, k, n, n, &Selection::first(k), &spec).map_err(|e| e.to_string())?;
        if step.success_probability != expected || dense.probability != expected {
            return Err(format!(
                "k={k} {n}+{n}: symbolic {} oracle {} expected {expected}",
                step.success_probability, dense.probability
            ));
        }
    }
    Ok("W(3)+W(3) -> W(4) p=2/9, Z_2(5)+Z_2(5) -> Z_2(6) p=1/15".into())
}

fn exact_plans() -> Check {
    let mut count = 0;
    for k in 1..=3 {
        for n1 in 2 * k..=8 {
            for n2 in 2 * k..=8 {
                let plan = gen_exact_plan(k, n1, n2).map_err(|e| e.to_string())?;
                let report = execute_plan(&plan, &ExecuteOptions::default()).map_err(|e| e.to_string())?;
                let want = BlockSum::z_state(k, n1 + n2, report.final_state.id.clone()).unwrap();
                let l = &report.ledger;
                if report.final_block != want || l.ancilla_qubits != 4 * k || l.consumed_qubits != 4 * k {
                    return Err(format!(
                        "k={k} n1={n1} n2={n2}: final {} ancilla {} consumed {}",
                        report.final_state, l.ancilla_qubits, l.consumed_qubits
                    ));
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} plans reach Z_k(n1+n2) with ancilla = consumed = 4k"))
}

fn incremental_schedule() -> Check {
    for n in 4..=12 {
        let plan = gen_incremental_plan(1, n).map_err(|e| e.to_string())?;
        let report = execute_plan(&plan, &ExecuteOptions::default()).map_err(|e| e.to_string())?;
        let want = BlockSum::z_state(1, n, report.final_state.id.clone()).unwrap();
        if report.cycles.len() != n - 3 || report.final_block != want {
            return Err(format!("N={n}: {} cycles, final {}", report.cycles.len(), report.final_block));
        }
    }
    Ok("W(N) in N-3 cycles for 4 <= N <= 12".into())
}

fn exponential_schedule() -> Check {
    let plan = gen_exponential_plan(1, 10).map_err(|e| e.to_string())?;
    let path: Vec<String> = plan.critical_path().iter().map(|s| s.descriptor()).collect();
    if path != ["Z_1(3)", "Z_1(4)", "Z_1(6)", "Z_1(10)"] || plan.depth() != 3 {
        return Err(format!("(1,10): path {path:?}, depth {}", plan.depth()));
    }
    let mut checked = 0;
    for k in 1..=3 {
        for m in 0..=5u32 {
            let n = 2 * k + (1 << m);
            let plan = gen_exponential_plan(k, n).map_err(|e| e.to_string())?;
            // ceil(log2(2^m)) = m
            if plan.depth() != m as usize {
                return Err(format!("k={k} n={n}: depth {} expected {m}", plan.depth()));
            }
            let report = execute_plan(&plan, &ExecuteOptions::default()).map_err(|e| e.to_string())?;
            if report.final_block != BlockSum::z_state(k, n, report.final_state.id.clone()).unwrap() {
                return Err(format!("k={k} n={n}: final {}", report.final_block));
            }
            checked += 1;
        }
    }
    Ok(format!("W(3)->W(4)->W(6)->W(10) depth 3; {checked} power-of-two targets at depth log2(n-2k)"))
}

fn symmetry() -> Check {
    let oracle = DenseOracle::default();
    sweeps(&[
        bit_flip_sweep(12, &oracle),
        permutation_sweep(10, 50, SEED, &oracle),
        selection_sweep(DISTILL_RANGE, 10, SEED, &oracle),
    ])
}

/// Passes when unit weights fail to collect somewhere in criterion 3's range.
fn negative_control() -> Check {
    let mut not_collected = Vec::new();
    let mut total = 0;
    for (k, n1, n2) in DISTILL_RANGE.cells() {
        total += 1;
        let a = BlockSum::z_state(k, n1, "A").unwrap();
        let b = BlockSum::z_state(k, n2, "B").unwrap();
        let spec = AlphaMode::Unit.spec(k);
        match distill_with(&a, &b, &Selection::first(k), &spec, "C") {
            Err(DistillError::NotCollectible { .. }) => not_collected.push((k, n1, n2)),
            Ok(_) => {}
            Err(e) => return Err(format!("k={k} N1={n1} N2={n2}: unexpected error {e}")),
        }
    }
    let swept = distillation_sweep(DISTILL_RANGE, AlphaMode::Unit, &DenseOracle::default());
    match not_collected.first() {
        Some(&(k, n1, n2)) if !swept.passed() => Ok(format!(
            "alpha_j = 1 fails to collect in {}/{total} cells, first k={k} N1={n1} N2={n2}",
            not_collected.len()
        )),
        _ => Err(format!("unit weights collected everywhere ({total} cells); sweep: {swept}")),
    }
}

fn zdistill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zdistill")).args(args).output().expect("spawn zdistill")
}

fn cli_ok(args: &[&str]) -> Result<String, String> {
    let out = zdistill(args);
    if out.status.code() != Some(0) {
        return Err(format!(
            "`zdistill {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8(out.stdout).expect("utf-8 output"))
}

fn round_trip(dir: &Path, mode: &str, k: usize, sizes: &[&str]) -> Result<(), String> {
    let mut args = vec!["plan", mode, "--k"];
    let k_text = k.to_string();
    args.push(&k_text);
    args.extend_from_slice(sizes);
    let doc = cli_ok(&args)?;
    let parsed: serde_json::Value = serde_json::from_str(&doc).map_err(|e| e.to_string())?;
    let target_n = parsed["target_n"].as_u64().ok_or("plan document has no target_n")?;
    let cycles = parsed["plan"]["cycles"].as_array().map_or(0, Vec::len);
    let sources = parsed["plan"]["inputs"].as_array().map_or(0, Vec::len)
        + parsed["plan"]["ancillas"].as_array().map_or(0, Vec::len);

    let path = dir.join(format!("{mode}_{k}_{}.json", sizes.join("_").replace("--", "")));
    std::fs::write(&path, &doc).map_err(|e| e.to_string())?;
    let path = path.to_str().expect("utf-8 path");

    let text = cli_ok(&["run", path, "--verify-with-oracle"])?;
    let last = format!("final state: Z_{k}({target_n})");
    if text.lines().last() != Some(last.as_str()) {
        return Err(format!("{mode} k={k} {sizes:?}: report ends with {:?}", text.lines().last()));
    }
    let report: serde_json::Value =
        serde_json::from_str(&cli_ok(&["run", path, "--report", "json"])?).map_err(|e| e.to_string())?;
    if report["cycles"].as_array().map_or(0, Vec::len) != cycles {
        return Err(format!("{mode} k={k} {sizes:?}: JSON report cycle count differs"));
    }

    let dot = cli_ok(&["graph", path])?;
    let boxes = dot.matches("shape=box").count();
    let arrows = dot.matches("shape=rarrow").count();
    if boxes != sources + cycles || arrows != cycles || cli_ok(&["graph", path])? != dot {
        return Err(format!("{mode} k={k} {sizes:?}: graph has {boxes} states, {arrows} projections"));
    }
    Ok(())
}

fn end_to_end_cli() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trips = 0;
    for k in 1..=2usize {
        for (n1, n2) in [(2 * k, 2 * k), (2 * k + 1, 2 * k + 3), (6, 7)] {
            let (n1, n2) = (n1.to_string(), n2.to_string());
            round_trip(dir.path(), "exact", k, &["--n1", &n1, "--n2", &n2])?;
            trips += 1;
        }
        for n in [2 * k + 1, 2 * k + 2, 9, 12] {
            let n = n.to_string();
            for mode in ["incremental", "exponential"] {
                round_trip(dir.path(), mode, k, &["--n", &n])?;
                trips += 1;
            }
        }
    }
    let verify = cli_ok(&["verify"])?;
    let sweeps = verify.lines().filter(|l| l.starts_with("PASS")).count();
    Ok(format!("{trips} plan -> run -> graph round trips; verify at defaults passed {sweeps} sweeps"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("composition identity, N <= 12", composition),
        ("norm law, N <= 16 symbolic, N <= 14 dense", norm_law),
        ("distillation collects and matches the oracle", distillation),
        ("W-example probabilities", w_example_numbers),
        ("exact lossless plans", exact_plans),
        ("incremental schedule", incremental_schedule),
        ("exponential schedule", exponential_schedule),
        ("symmetry suite", symmetry),
        ("negative control with unit weights", negative_control),
        ("end-to-end CLI", end_to_end_cli),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
