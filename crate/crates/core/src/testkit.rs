//! Fixtures shared by the unit, property and acceptance tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bin packing with 20 things of each kind.
pub const BIN_PACKING: &str = "type Size = {1,2,3,4,5}
component ThingA class input attributes (size: Size)
component ThingB class input attributes (size: Size)
component Bin class generated
connect ThingA - Bin forward [1,1] backward [0,5] where sum(left.size) <= 5
connect ThingB - Bin forward [1,1] backward [0,2] where sum(left.size) <= 2
connect-one-to-many Bin -> {ThingA, ThingB} [1,*] inclusive
instance { input ThingA = 20  input ThingB = 20 }
";

struct Kind {
    name: String,
    input: bool,
    /// Count for input kinds.
    size: usize,
    /// Integer attribute `v` over `{0,1,2}`.
    int_attr: bool,
}

/// A small random spec text, deterministic in `seed`. Most of them are
/// admissible; some violate the zero-lower-bound rule or have no level
/// mapping, which is what the finiteness checks are for.
pub fn random_spec(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let _ = writeln!(out, "type V = {{0,1,2}}");
    let mut kinds: Vec<Kind> = Vec::new();
    let inputs = rng.random_range(1..=2);
    for i in 0..inputs {
        kinds.push(Kind { name: format!("In{i}"), input: true, size: rng.random_range(0..=3), int_attr: rng.random_bool(0.5) });
    }
    if kinds.iter().all(|k| k.size == 0) {
        kinds[0].size = rng.random_range(1..=3);
    }
    let both = rng.random_bool(0.25);
    let both_input = rng.random_bool(0.5);
    if both {
        kinds.push(Kind { name: "Mid".into(), input: both_input, size: rng.random_range(0..=2), int_attr: rng.random_bool(0.3) });
    }
    let generated = rng.random_range(1..=2);
    for i in 0..generated {
        kinds.push(Kind { name: format!("Gen{i}"), input: false, size: 0, int_attr: rng.random_bool(0.5) });
    }

    for k in &kinds {
        let class = if k.name == "Mid" {
            "both"
        } else if k.input {
            "input"
        } else {
            "generated"
        };
        let attrs = if k.int_attr { " attributes (v: V)" } else { "" };
        let _ = writeln!(out, "component {} class {class}{attrs}", k.name);
        if k.int_attr && rng.random_bool(0.4) {
            let rows: Vec<String> = (0..=2).filter(|_| rng.random_bool(0.6)).map(|v| format!("({v})")).collect();
            if !rows.is_empty() {
                let _ = writeln!(out, "catalogue {} {{{}}}", k.name, rows.join("; "));
            }
        }
    }

    let card = |rng: &mut ChaCha8Rng, positive: bool| -> String {
        let lower = if positive { rng.random_range(1..=2) } else { rng.random_range(0..=1) };
        format!("[{lower},{}]", rng.random_range(lower.max(1)..=3))
    };

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (g, kind) in kinds.iter().enumerate() {
        // Tie each non-input kind to an earlier kind.
        if (kind.input && kind.name != "Mid") || g == 0 {
            continue;
        }
        let p = rng.random_range(0..g);
        pairs.push(if rng.random_bool(0.5) { (p, g) } else { (g, p) });
    }
    for _ in 0..rng.random_range(0..=2) {
        let a = rng.random_range(0..kinds.len());
        let b = rng.random_range(0..kinds.len());
        if a != b && !pairs.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)) {
            pairs.push((a, b));
        }
    }

    let mut connections = Vec::new();
    for &(l, r) in &pairs {
        // The side counting partners per generated component gets a
        // positive lower bound most of the time.
        let left_positive = !kinds[l].input && rng.random_bool(0.8);
        let right_positive = !kinds[r].input && rng.random_bool(0.8);
        let mut fwd = format!("forward {}", card(&mut rng, left_positive));
        let mut bwd = format!("backward {}", card(&mut rng, right_positive));
        if kinds[r].int_attr && rng.random_bool(0.4) {
            let _ = write!(fwd, " where sum(right.v) <= {}", rng.random_range(1..=4));
        }
        if kinds[l].int_attr && rng.random_bool(0.4) {
            if kinds[r].int_attr && rng.random_bool(0.5) {
                let _ = write!(bwd, " where left.v <= right.v");
            } else {
                let _ = write!(bwd, " where sum(left.v) <= {}", rng.random_range(1..=4));
            }
        }
        let _ = writeln!(out, "connect {} - {} {fwd} {bwd}", kinds[l].name, kinds[r].name);
        connections.push((l, r));
    }
    if rng.random_bool(0.2) {
        let g = kinds.len() - 1;
        let _ = writeln!(out, "connect {0} - {0} forward [0,{1}]", kinds[g].name, rng.random_range(1..=2));
    }
    for g in 0..kinds.len() {
        if kinds[g].input {
            continue;
        }
        let partners: Vec<usize> = connections
            .iter()
            .filter_map(|&(l, r)| if l == g { Some(r) } else if r == g { Some(l) } else { None })
            .collect();
        if partners.len() >= 2 && rng.random_bool(0.6) {
            let take = rng.random_range(2..=partners.len());
            let names: Vec<&str> = partners[..take].iter().map(|p| kinds[*p].name.as_str()).collect();
            let upper = if rng.random_bool(0.5) { String::from("*") } else { format!("{}", rng.random_range(1..=3)) };
            let mode = if rng.random_bool(0.3) { "exclusive" } else { "inclusive" };
            let _ = writeln!(out, "connect-one-to-many {} -> {{{}}} [1,{upper}] {mode}", kinds[g].name, names.join(", "));
        }
    }

    let _ = write!(out, "instance {{");
    for k in &kinds {
        if k.name == "Mid" && !k.input {
            let _ = write!(out, " generated Mid");
        } else if k.input {
            let _ = write!(out, " input {} = {}", k.name, k.size);
        }
    }
    let gens: Vec<&Kind> = kinds.iter().filter(|k| !k.input).collect();
    if rng.random_bool(0.2) {
        let g = gens[rng.random_range(0..gens.len())];
        let _ = write!(out, " require {}(r1{})", g.name, if g.int_attr { ", _" } else { "" });
    }
    if rng.random_bool(0.2) {
        if let Some(&(l, r)) = connections.iter().find(|&&(l, r)| kinds[l].input && kinds[l].size > 0 && !kinds[r].input) {
            let verb = if rng.random_bool(0.5) { "assert" } else { "deny" };
            let _ = write!(out, " {verb} {}2{}({}_1, r1)", kinds[l].name, kinds[r].name, kinds[l].name);
        }
    }
    let _ = writeln!(out, " }}");
    out
}
