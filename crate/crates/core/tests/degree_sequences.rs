//! Bound steps against an exhaustive degree-sequence oracle.
//!
//! A bipartite structure with per-node degree ranges exists iff some pair of
//! degree sequences with equal sums passes the Gale–Ryser test. The oracle
//! enumerates all such sequences and reports every feasible node count.

use loco_core::{
    binary_bound_step, one_to_many_bound_step, propagate, Bound, Cardinality, OneToManyConnectionDef, Outcome,
};

/// Node groups: (count, lowest degree, highest degree).
type Groups = [(usize, usize, usize)];

/// All degree sequences of one group, as multisets (sorted descending).
fn sequences(count: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, max: usize, lo: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for d in (lo..=max).rev() {
            prefix.push(d);
            go(left - 1, d, lo, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(count, hi, lo, &mut Vec::new(), &mut out);
    out
}

fn combined(groups: &Groups) -> Vec<Vec<usize>> {
    let mut acc = vec![Vec::new()];
    for &(n, lo, hi) in groups {
        let seqs = sequences(n, lo, hi);
        acc = acc
            .iter()
            .flat_map(|a| {
                seqs.iter().map(move |s| {
                    let mut v: Vec<usize> = a.iter().chain(s).copied().collect();
                    v.sort_unstable_by(|x, y| y.cmp(x));
                    v
                })
            })
            .collect();
        acc.sort();
        acc.dedup();
    }
    acc
}

fn gale_ryser(a: &[usize], b: &[usize]) -> bool {
    if a.iter().sum::<usize>() != b.iter().sum::<usize>() {
        return false;
    }
    let mut prefix = 0;
    for (k, ai) in a.iter().enumerate() {
        prefix += ai;
        if prefix > b.iter().map(|bj| (*bj).min(k + 1)).sum() {
            return false;
        }
    }
    true
}

fn realizable(left: &Groups, right: &Groups) -> bool {
    let rights = combined(right);
    combined(left).iter().any(|a| rights.iter().any(|b| gale_ryser(a, b)))
}

/// Feasible sizes of a node group of unknown count against fixed groups.
fn feasible_counts(fixed: &Groups, lo: usize, hi: usize, max: usize) -> Vec<usize> {
    (0..=max).filter(|m| realizable(fixed, &[(*m, lo, hi)])).collect()
}

fn bounds_of(counts: &[usize]) -> Bound {
    Bound::new(*counts.first().unwrap() as u64, *counts.last().unwrap() as u64)
}

#[test]
fn binary_step_matches_degree_oracle() {
    // Ten sources with 2..3 targets each, targets with 1..4 sources each.
    let counts = feasible_counts(&[(10, 2, 3)], 1, 4, 40);
    assert_eq!(bounds_of(&counts), Bound::new(5, 30));
    assert_eq!((5..=30).collect::<Vec<_>>(), counts);
    let step = binary_bound_step(Cardinality::new(2, 3), Cardinality::new(1, 4), Bound::exactly(10));
    assert_eq!(step, bounds_of(&counts));
}

#[test]
fn bin_packing_contributions() {
    let a = binary_bound_step(Cardinality::new(1, 1), Cardinality::new(0, 5), Bound::exactly(20));
    let b = binary_bound_step(Cardinality::new(1, 1), Cardinality::new(0, 2), Bound::exactly(20));
    assert_eq!((a.lb, b.lb), (4, 10));
    assert!(!a.ub.is_finite() && !b.ub.is_finite());
}

#[test]
fn one_to_many_step_matches_degree_oracle() {
    // Each C has 2..3 partners among 4 C1 (one C each) and 6 C2 (1..2 C each).
    let counts = feasible_counts(&[(4, 1, 1), (6, 1, 2)], 2, 3, 20);
    assert_eq!(bounds_of(&counts), Bound::new(4, 8));
    let otm = OneToManyConnectionDef {
        left: "C".into(),
        rights: vec!["C1".into(), "C2".into()],
        card: Cardinality::new(2, 3),
        exclusive: false,
    };
    let step = one_to_many_bound_step(
        &otm,
        &[Cardinality::new(1, 1), Cardinality::new(1, 2)],
        &[Bound::exactly(4), Bound::exactly(6)],
    );
    assert_eq!(step, bounds_of(&counts));
}

#[test]
fn conflict_has_no_common_count() {
    let from_c1 = feasible_counts(&[(10, 1, 1)], 1, 2, 20);
    let from_c3 = feasible_counts(&[(6, 2, 2)], 3, 3, 20);
    assert_eq!((bounds_of(&from_c1), bounds_of(&from_c3)), (Bound::new(5, 10), Bound::exactly(4)));
    assert!(from_c1.iter().all(|m| !from_c3.contains(m)));

    let doc = loco_core::parse(
        "component C1 class input\ncomponent C2 class generated\ncomponent C3 class input\n\
         connect C1 - C2 forward [1,1] backward [1,2]\nconnect C3 - C2 forward [2,2] backward [3,3]\n\
         instance { input C1 = 10 input C3 = 6 }",
    )
    .unwrap();
    let Outcome::Reject(cert) = propagate(&doc.problem, &doc.instance).unwrap().outcome else {
        panic!("conflict accepted")
    };
    assert_eq!((cert.kind.as_str(), cert.lb, cert.ub), ("C2", 5, 4));
}
