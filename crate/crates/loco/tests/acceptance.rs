//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use loco::schema::validate_solution;
use loco_core::testkit::random_spec;
use loco_core::{
    admissibility, binary_bound_step, brute_force_solve, check_model, ground, parse, propagate, propagate_with, solve,
    Bound, Code, Document, Limit, Outcome, PropagateOptions, Severity, SolveOptions, SolveOutcome, WorklistOrder,
};

type Verdict = Result<String, String>;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn load(path: &Path) -> Document {
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn admissible(doc: &Document) -> bool {
    !admissibility(&doc.problem, Some(&doc.instance)).iter().any(|d| d.severity == Severity::Error)
}

fn loco(args: &[&str]) -> (i32, String, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_loco")).args(args).env("LOCO_COLOR", "0").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), start.elapsed())
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn bin_packing_bounds() -> Verdict {
    let file = corpus("bin_packing.loco");
    let (code, out, took) = loco(&["bounds", file.to_str().unwrap()]);
    ensure(code == 0, || format!("exit {code}"))?;
    let line = out.lines().find(|l| l.starts_with("Bin ")).ok_or("no Bin line")?;
    ensure(line == "Bin [10, 40] generated", || format!("got `{line}`"))?;
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!("{line} in {took:?}"))
}

fn per_connection_contributions() -> Verdict {
    let doc = load(&corpus("bin_packing.loco"));
    let mut lbs = Vec::new();
    for name in ["ThingA2Bin", "ThingB2Bin"] {
        let conn = doc.problem.connection(name).ok_or_else(|| format!("no {name}"))?;
        let (fwd, bwd) = (conn.forward.as_ref().unwrap().card, conn.backward.as_ref().unwrap().card);
        lbs.push(binary_bound_step(fwd, bwd, Bound::exactly(20)).lb);
    }
    ensure(lbs == [4, 10], || format!("got {lbs:?}"))?;
    Ok("ThingA2Bin gives 4, ThingB2Bin gives 10".into())
}

fn finiteness() -> Verdict {
    let start = Instant::now();
    let (mut accepted, mut rejected, mut invalid) = (0, 0, 0);
    let mut seed = 0;
    while accepted + rejected < 200 {
        let doc = parse(&random_spec(seed)).map_err(|_| format!("seed {seed} does not parse"))?;
        if !admissible(&doc) {
            invalid += 1;
        } else {
            match propagate(&doc.problem, &doc.instance).map_err(|e| format!("seed {seed}: {e}"))?.outcome {
                Outcome::Accept(map) => {
                    if let Some(kb) = map.generated().find(|kb| !kb.bound.ub.is_finite()) {
                        return Err(format!("seed {seed}: `{}` is unbounded", kb.kind));
                    }
                    accepted += 1;
                }
                Outcome::Reject(_) => rejected += 1,
            }
        }
        seed += 1;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!("{accepted} finite, {rejected} inconsistent, {invalid} refused by validation in {took:?}"))
}

fn confluence() -> Verdict {
    let (mut specs, mut seed) = (0, 0);
    while specs < 100 {
        let doc = parse(&random_spec(seed)).unwrap();
        seed += 1;
        if !admissible(&doc) {
            continue;
        }
        let reference = propagate(&doc.problem, &doc.instance).unwrap().outcome;
        for order in 0..10 {
            let opts = PropagateOptions { order: WorklistOrder::Random(order), ..PropagateOptions::default() };
            let outcome = propagate_with(&doc.problem, &doc.instance, &opts).unwrap().outcome;
            let same = match (&reference, &outcome) {
                (Outcome::Accept(a), Outcome::Accept(b)) => a == b,
                (Outcome::Reject(_), Outcome::Reject(_)) => true,
                _ => false,
            };
            ensure(same, || format!("seed {}: order {order} gives {outcome:?}, stack gives {reference:?}", seed - 1))?;
        }
        specs += 1;
    }
    Ok("100 specs x 10 random orders agree".into())
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let (mut compared, mut sat, mut seed) = (0, 0, 0);
    while compared < 50 {
        let text = random_spec(seed);
        seed += 1;
        let doc = parse(&text).unwrap();
        if !admissible(&doc) {
            continue;
        }
        let Outcome::Accept(map) = propagate(&doc.problem, &doc.instance).unwrap().outcome else { continue };
        if map.generated().any(|kb| kb.bound.ub > Limit::Finite(12)) {
            continue;
        }
        let feasible = brute_force_solve(&doc.problem, &doc.instance, 12).map_err(|e| e.to_string())?;
        let generated: Vec<_> = map.generated().collect();
        for v in &feasible {
            let inside = v.iter().zip(&generated).all(|(n, kb)| kb.bound.contains(*n));
            ensure(inside, || format!("seed {}: {v:?} lies outside the bounds", seed - 1))?;
        }
        let gp = ground(&doc.problem, &doc.instance, &map).map_err(|e| e.to_string())?;
        let found = match solve(&gp, &SolveOptions::default()).map_err(|e| e.to_string())? {
            SolveOutcome::Solutions(_) => true,
            SolveOutcome::Unsat => false,
            SolveOutcome::FuelExhausted => return Err(format!("seed {}: fuel exhausted", seed - 1)),
        };
        ensure(found == !feasible.is_empty(), || format!("seed {}: solve {found}, oracle {feasible:?}", seed - 1))?;
        sat += usize::from(found);
        compared += 1;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!("{compared} specs ({sat} SAT, {} UNSAT) agree in {took:?}", compared - sat))
}

fn self_audit() -> Verdict {
    let mut files: Vec<_> = std::fs::read_dir(corpus("")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut checked = 0;
    for file in &files {
        let doc = load(file);
        let name = file.file_name().unwrap().to_string_lossy();
        if admissible(&doc) {
            if let Outcome::Accept(map) = propagate(&doc.problem, &doc.instance).unwrap().outcome {
                let gp = ground(&doc.problem, &doc.instance, &map).map_err(|e| format!("{name}: {e}"))?;
                let opts = SolveOptions { max_solutions: 5, fuel: 200_000, ..SolveOptions::default() };
                if let SolveOutcome::Solutions(configs) = solve(&gp, &opts).map_err(|e| format!("{name}: {e}"))? {
                    for config in &configs {
                        let verdict = check_model(&doc.problem, &doc.instance, config);
                        ensure(verdict.accepted(), || format!("{name}: {:?}", verdict.violations))?;
                        checked += 1;
                    }
                }
            }
        }
        let (code, out, _) = loco(&["solve", file.to_str().unwrap(), "--max", "5", "--fuel", "200000"]);
        ensure(code != 6, || format!("{name}: the command's own audit failed"))?;
        if code == 0 {
            validate_solution(&out).map_err(|e| format!("{name}: {e}"))?;
        }
    }
    Ok(format!("{checked} configurations from {} corpus files pass the model check", files.len()))
}

fn admissibility_checks() -> Verdict {
    let mut seen = Vec::new();
    for name in ["infinite.loco", "bin_packing_no_otm.loco"] {
        let doc = load(&corpus(name));
        let diags = admissibility(&doc.problem, Some(&doc.instance));
        let codes: Vec<Code> = diags.iter().filter(|d| d.severity == Severity::Error).map(|d| d.code).collect();
        ensure(codes.iter().any(|c| matches!(c, Code::ZeroLbRule | Code::Unleveled)), || {
            format!("{name}: {codes:?}")
        })?;
        let (code, _, _) = loco(&["check", corpus(name).to_str().unwrap()]);
        ensure(code == 1, || format!("{name}: check exits {code}"))?;
        seen.push(format!("{name} refused"));
    }
    Ok(seen.join(", "))
}

fn minimum_bins() -> Verdict {
    let mut seen = Vec::new();
    for (name, bins) in [("bin_packing_4a2b.loco", 1), ("bin_packing_3b.loco", 2)] {
        let file = corpus(name);
        let (code, out, took) = loco(&["solve", file.to_str().unwrap(), "--max", "1"]);
        ensure(code == 0, || format!("{name}: exit {code}"))?;
        let doc = validate_solution(&out).map_err(|e| e.to_string())?;
        let got = doc.configurations[0].instances.get("Bin").map_or(0, Vec::len);
        ensure(got == bins, || format!("{name}: {got} bins"))?;
        ensure(took < Duration::from_secs(1), || format!("{name}: took {took:?}"))?;
        let spec = load(&file);
        let least = brute_force_solve(&spec.problem, &spec.instance, 6).unwrap().into_iter().next();
        ensure(least == Some(vec![bins as u64]), || format!("{name}: oracle minimum {least:?}"))?;
        seen.push(format!("{name}: {got} in {took:?}"));
    }
    Ok(seen.join(", "))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("bin-packing bounds", bin_packing_bounds),
        ("per-connection contributions", per_connection_contributions),
        ("finiteness", finiteness),
        ("confluence", confluence),
        ("oracle containment and equivalence", oracle_equivalence),
        ("solver self-audit", self_audit),
        ("admissibility checks", admissibility_checks),
        ("minimum bins", minimum_bins),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} {name}: {reason}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
