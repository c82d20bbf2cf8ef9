//! The search and the brute-force oracle agree on small random problems.

use std::time::Instant;

use loco_core::testkit::random_spec;
use loco_core::{
    admissibility, brute_force_solve, check_model, ground, parse, propagate, solve, Limit, Outcome, Severity,
    SolveOptions, SolveOutcome,
};

#[test]
fn search_matches_oracle() {
    let start = Instant::now();
    let mut compared = 0;
    let mut sat = 0;
    for seed in 0..200 {
        let text = random_spec(seed);
        let doc = parse(&text).unwrap();
        if admissibility(&doc.problem, Some(&doc.instance)).iter().any(|d| d.severity == Severity::Error) {
            continue;
        }
        let prop = propagate(&doc.problem, &doc.instance).unwrap();
        let t = Instant::now();
        let feasible = brute_force_solve(&doc.problem, &doc.instance, 12).unwrap();
        let oracle_ms = t.elapsed().as_millis();
        let bounds = match prop.outcome {
            Outcome::Reject(_) => {
                assert!(feasible.is_empty(), "seed {seed}: rejected but oracle found {feasible:?}\n{text}");
                compared += 1;
                continue;
            }
            Outcome::Accept(b) => b,
        };
        let generated: Vec<_> = bounds.generated().collect();
        for v in &feasible {
            for (n, kb) in v.iter().zip(&generated) {
                assert!(kb.bound.contains(*n), "seed {seed}: {v:?} outside {}\n{text}", kb.bound);
            }
        }
        if generated.iter().any(|kb| kb.bound.ub > Limit::Finite(12)) {
            continue;
        }
        let gp = ground(&doc.problem, &doc.instance, &bounds).unwrap();
        let t = Instant::now();
        let out = solve(&gp, &SolveOptions::default()).unwrap();
        let solve_ms = t.elapsed().as_millis();
        assert!(oracle_ms + solve_ms < 20_000, "seed {seed}: oracle {oracle_ms} ms, solve {solve_ms} ms");
        match &out {
            SolveOutcome::Solutions(c) => {
                assert!(!feasible.is_empty(), "seed {seed}: solver found a model the oracle missed\n{text}");
                assert!(check_model(&doc.problem, &doc.instance, &c[0]).accepted());
                sat += 1;
            }
            SolveOutcome::Unsat => assert!(feasible.is_empty(), "seed {seed}: oracle {feasible:?} but solver unsat\n{text}"),
            SolveOutcome::FuelExhausted => panic!("seed {seed}: fuel\n{text}"),
        }
        compared += 1;
    }
    eprintln!("compared {compared}, sat {sat}, {:?}", start.elapsed());
    assert!(compared >= 100 && sat >= 50);
}
