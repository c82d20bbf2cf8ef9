//! Output determinism and document round trips over random specs.

use std::io::Write;

use loco::commands::{bounds, solve_file, BoundsFormat, ExitStatus, Io, SolveArgs};
use loco::schema::{validate_report, validate_solution};
use loco_core::testkit::random_spec;
use proptest::prelude::*;

fn run(command: impl FnOnce(&mut Io<'_>) -> ExitStatus) -> (ExitStatus, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let status = command(&mut Io { out: &mut out, err: &mut err, color: false });
    (status, out)
}

fn spec_file(seed: u64) -> tempfile::NamedTempFile {
    let mut file = tempfile::Builder::new().suffix(".loco").tempfile().unwrap();
    file.write_all(random_spec(seed).as_bytes()).unwrap();
    file
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_output_is_deterministic(seed in 0u64..10_000, solver_seed in 0u64..4) {
        let file = spec_file(seed);
        let args = SolveArgs { max: 3, fuel: 100_000, seed: solver_seed, ..SolveArgs::default() };
        let first = run(|io| solve_file(file.path(), &args, io));
        let second = run(|io| solve_file(file.path(), &args, io));
        prop_assert_eq!(&first, &second);
        prop_assert_ne!(first.0, ExitStatus::Internal);
        if first.0 == ExitStatus::Success {
            let text = String::from_utf8(first.1).unwrap();
            let doc = validate_solution(&text).unwrap();
            prop_assert!(!doc.configurations.is_empty());
            let again = serde_json::to_string_pretty(&doc).unwrap() + "\n";
            prop_assert_eq!(again, text);
        }
    }

    #[test]
    fn bounds_reports_round_trip(seed in 0u64..10_000) {
        let file = spec_file(seed);
        let (status, out) = run(|io| bounds(file.path(), BoundsFormat::Report, io));
        if matches!(status, ExitStatus::Success | ExitStatus::Rejected) {
            let text = String::from_utf8(out).unwrap();
            let report = validate_report(&text).unwrap();
            prop_assert_eq!(report.certificate.is_some(), status == ExitStatus::Rejected);
            let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
            prop_assert_eq!(again, text);
        } else {
            prop_assert_eq!(status, ExitStatus::Invalid);
        }
    }
}
