//! Exhaustive reference solver for tiny problems.
//!
//! Shares nothing with bound propagation or the search: it tries every
//! count vector up to a cap, every row assignment and every edge set, and
//! lets `check_model` decide. Only symmetries among untouched synthesized
//! components are cut.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::check::check_model;
use crate::diag::Diagnostic;
use crate::expr::{eval_constraint, Binding, Side};
use crate::model::{
    BinaryConnectionDef, CatalogueRow, ComponentInstance, Configuration, DirectionRule, EffectiveClass,
    InstanceSpec, Limit, Polarity, ProblemSpec,
};
use crate::validate::effective_classes;

/// Largest per-kind count the oracle accepts.
pub const ORACLE_MAX_CAP: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle cap {0} exceeds the limit of {ORACLE_MAX_CAP}")]
    CapTooLarge(u64),
    #[error("instance knowledge is incomplete")]
    Classes(Vec<Diagnostic>),
    #[error("input kind `{0}` has no input domain")]
    MissingDomain(String),
}

/// Count vectors (generated kinds in declaration order) with at least one
/// model, each count ranging over `0..=cap`.
pub fn brute_force_solve(spec: &ProblemSpec, inst: &InstanceSpec, cap: u64) -> Result<BTreeSet<Vec<u64>>, OracleError> {
    if cap > ORACLE_MAX_CAP {
        return Err(OracleError::CapTooLarge(cap));
    }
    let classes = effective_classes(spec, Some(inst)).map_err(OracleError::Classes)?;
    let mut generated = Vec::new();
    for (k, kind) in spec.kinds.iter().enumerate() {
        if classes[&kind.name] == EffectiveClass::Generated {
            generated.push(k);
        } else if inst.domain(&kind.name).is_none() {
            return Err(OracleError::MissingDomain(kind.name.clone()));
        }
    }
    let mut feasible = BTreeSet::new();
    let mut vector = vec![0u64; generated.len()];
    loop {
        // An edge structure ignoring rows and formulas must exist first.
        let structure =
            World::build(spec, inst, &generated, &vector, true).is_some_and(|mut w| w.degrees_admit() && w.edges(0, 0));
        if structure && World::build(spec, inst, &generated, &vector, false).is_some_and(|mut w| w.rows(0, 0)) {
            feasible.insert(vector.clone());
        }
        // Odometer over 0..=cap per generated kind.
        let Some(i) = (0..vector.len()).rev().find(|i| vector[*i] < cap) else { break };
        vector[i] += 1;
        for v in &mut vector[i + 1..] {
            *v = 0;
        }
    }
    Ok(feasible)
}

struct Comp {
    id: String,
    synthesized: bool,
    rows: Vec<usize>,
}

struct Conn<'a> {
    def: &'a BinaryConnectionDef,
    left: usize,
    right: usize,
    forced: BTreeSet<(usize, usize)>,
    denied: BTreeSet<(usize, usize)>,
}

struct World<'a> {
    spec: &'a ProblemSpec,
    inst: &'a InstanceSpec,
    catalogue: Vec<Vec<CatalogueRow>>,
    comps: Vec<Vec<Comp>>,
    conns: Vec<Conn<'a>>,
    row: Vec<Vec<usize>>,
    /// Per connection, the right partners of each left component.
    adj: Vec<Vec<Vec<usize>>>,
    in_deg: Vec<Vec<u64>>,
    touched: Vec<Vec<u32>>,
    /// Ignore rows, formulas and one-to-many connections.
    structural: bool,
}

fn range(rule: Option<&DirectionRule>) -> (u64, u64) {
    rule.map_or((0, u64::MAX), |r| (r.card.lower, match r.card.upper {
        Limit::Finite(u) => u,
        Limit::Unbounded => u64::MAX,
    }))
}

impl<'a> World<'a> {
    /// Components for one count vector; `None` if the named ids do not fit.
    fn build(
        spec: &'a ProblemSpec,
        inst: &'a InstanceSpec,
        generated: &[usize],
        counts: &[u64],
        structural: bool,
    ) -> Option<Self> {
        let count_of: BTreeMap<usize, u64> = generated.iter().copied().zip(counts.iter().copied()).collect();
        let mut catalogue = Vec::new();
        let mut comps = Vec::new();
        for (k, kind) in spec.kinds.iter().enumerate() {
            let rows = spec.catalogue_rows(kind);
            // Rows only matter to formulas; elsewhere any allowed row will do.
            let read = spec.binary_connections.iter().any(|c| {
                c.touches(&kind.name) && [&c.forward, &c.backward].iter().any(|r| r.as_ref().is_some_and(|r| r.constraint.is_some()))
            });
            let allowed = |id: Option<&str>| -> Vec<usize> {
                (0..rows.len())
                    .filter(|r| {
                        inst.required.iter().filter(|a| a.kind == kind.name && Some(a.id.as_str()) == id).all(|a| {
                            a.bindings.iter().zip(&rows[*r].0).all(|(b, v)| b.as_ref().is_none_or(|b| b == v))
                        })
                    })
                    .take(if read { usize::MAX } else { 1 })
                    .collect()
            };
            let mut list: Vec<Comp> = Vec::new();
            let add = |list: &mut Vec<Comp>, id: &str| {
                if !list.iter().any(|c| c.id == id) {
                    list.push(Comp { id: id.into(), synthesized: false, rows: allowed(Some(id)) });
                }
            };
            match count_of.get(&k) {
                None => {
                    for id in &inst.domain(&kind.name)?.ids {
                        add(&mut list, id);
                    }
                }
                Some(&n) => {
                    for atom in inst.required.iter().filter(|a| a.kind == kind.name) {
                        add(&mut list, &atom.id);
                    }
                    for lit in inst.literals.iter().filter(|l| l.polarity == Polarity::Positive) {
                        let def = spec.connection(&lit.connection)?;
                        if def.left == kind.name {
                            add(&mut list, &lit.left_id);
                        }
                        if def.right == kind.name {
                            add(&mut list, &lit.right_id);
                        }
                    }
                    if list.len() as u64 > n {
                        return None;
                    }
                    let mut i = 0;
                    while (list.len() as u64) < n {
                        i += 1;
                        let id = format!("{}#{i}", kind.name);
                        if !list.iter().any(|c| c.id == id) {
                            list.push(Comp { id, synthesized: true, rows: allowed(None) });
                        }
                    }
                }
            }
            catalogue.push(rows);
            comps.push(list);
        }
        let mut conns = Vec::new();
        for def in &spec.binary_connections {
            let (left, right) = (spec.kind_index(&def.left)?, spec.kind_index(&def.right)?);
            let mut forced = BTreeSet::new();
            let mut denied = BTreeSet::new();
            for lit in inst.literals.iter().filter(|l| l.connection == def.name) {
                let l = comps[left].iter().position(|c| c.id == lit.left_id);
                let r = comps[right].iter().position(|c| c.id == lit.right_id);
                match (lit.polarity, l, r) {
                    (Polarity::Positive, Some(l), Some(r)) => {
                        forced.insert((l, r));
                    }
                    (Polarity::Negative, Some(l), Some(r)) => {
                        denied.insert((l, r));
                    }
                    _ => {}
                }
            }
            conns.push(Conn { def, left, right, forced, denied });
        }
        let row = comps.iter().map(|c| vec![0; c.len()]).collect();
        let adj = conns.iter().map(|c| vec![Vec::new(); comps[c.left].len()]).collect();
        let in_deg = conns.iter().map(|c| vec![0; comps[c.right].len()]).collect();
        let touched = comps.iter().map(|c| vec![0; c.len()]).collect();
        Some(World { spec, inst, catalogue, comps, conns, row, adj, in_deg, touched, structural })
    }

    /// Degree sums per connection: every left needs `l1` distinct rights,
    /// every right `l2` distinct lefts, and both sides count the same edges.
    fn degrees_admit(&self) -> bool {
        self.conns.iter().all(|c| {
            let (nl, nr) = (self.comps[c.left].len() as u64, self.comps[c.right].len() as u64);
            let (avail_r, avail_l) = if c.left == c.right { (nr.saturating_sub(1), nl.saturating_sub(1)) } else { (nr, nl) };
            let (l1, u1) = range(c.def.forward.as_ref());
            let (l2, u2) = range(c.def.backward.as_ref());
            (nl == 0 || l1 <= avail_r)
                && (nr == 0 || l2 <= avail_l)
                && nl.saturating_mul(l1) <= nr.saturating_mul(u2)
                && nr.saturating_mul(l2) <= nl.saturating_mul(u1)
        })
    }

    /// Partner counts so far stay under every one-to-many upper bound and
    /// respect exclusivity; once `complete`, they also reach the lower bound.
    fn one_to_many_admits(&self, complete: bool) -> bool {
        self.spec.one_to_many.iter().all(|otm| {
            let Some(k) = self.spec.kind_index(&otm.left) else { return true };
            (0..self.comps[k].len()).all(|i| {
                let per_right: Vec<u64> = otm
                    .rights
                    .iter()
                    .map(|r| {
                        self.conns
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| c.left != c.right)
                            .map(|(ci, c)| {
                                if self.spec.kinds[c.left].name == otm.left && self.spec.kinds[c.right].name == *r {
                                    self.adj[ci][i].len() as u64
                                } else if self.spec.kinds[c.right].name == otm.left && self.spec.kinds[c.left].name == *r {
                                    self.adj[ci].iter().filter(|ys| ys.contains(&i)).count() as u64
                                } else {
                                    0
                                }
                            })
                            .sum()
                    })
                    .collect();
                let total: u64 = per_right.iter().sum();
                let upper_ok = match otm.card.upper {
                    Limit::Finite(u) => total <= u,
                    Limit::Unbounded => true,
                };
                upper_ok && (!complete || total >= otm.card.lower) && !(otm.exclusive && per_right.iter().filter(|n| **n > 0).count() > 1)
            })
        })
    }

    /// Assigns rows kind by kind; synthesized rows never decrease.
    fn rows(&mut self, k: usize, i: usize) -> bool {
        if k == self.comps.len() {
            return self.edges(0, 0);
        }
        if i == self.comps[k].len() {
            return self.rows(k + 1, 0);
        }
        let floor = if i > 0 && self.comps[k][i].synthesized && self.comps[k][i - 1].synthesized {
            self.row[k][i - 1]
        } else {
            0
        };
        let options: Vec<usize> = self.comps[k][i].rows.iter().copied().filter(|r| *r >= floor).collect();
        for r in options {
            self.row[k][i] = r;
            if self.rows(k, i + 1) {
                return true;
            }
        }
        false
    }

    fn binding(&self, kind: usize, i: usize) -> Binding<'_> {
        Binding::new(&self.spec.kinds[kind], &self.catalogue[kind][self.row[kind][i]])
    }

    fn formula_holds(&self, rule: Option<&DirectionRule>, own_side: Side, own: (usize, usize), partner_kind: usize, partners: &[usize]) -> bool {
        let Some(expr) = rule.and_then(|r| r.constraint.as_ref()) else { return true };
        if self.structural {
            return true;
        }
        let this = self.binding(own.0, own.1);
        let others: Vec<Binding<'_>> = partners.iter().map(|p| self.binding(partner_kind, *p)).collect();
        eval_constraint(expr, own_side, &this, &others).unwrap_or(false)
    }

    fn edges(&mut self, c: usize, x: usize) -> bool {
        if c == self.conns.len() {
            return self.verdict();
        }
        let (lk, rk) = (self.conns[c].left, self.conns[c].right);
        if x == self.comps[lk].len() {
            let bwd = self.conns[c].def.backward.as_ref();
            let (l2, _) = range(bwd);
            for y in 0..self.comps[rk].len() {
                if self.in_deg[c][y] < l2 {
                    return false;
                }
                let partners: Vec<usize> = (0..self.comps[lk].len()).filter(|l| self.adj[c][*l].contains(&y)).collect();
                if !self.formula_holds(bwd, Side::Right, (rk, y), lk, &partners) {
                    return false;
                }
            }
            return self.edges(c + 1, 0);
        }
        let (_, u1) = range(self.conns[c].def.forward.as_ref());
        let (l2, u2) = range(self.conns[c].def.backward.as_ref());
        // Rights still short of their lower bound must be reachable by the remaining lefts.
        let remaining = (self.comps[lk].len() - x) as u64;
        let missing: u64 = self.in_deg[c].iter().map(|d| l2.saturating_sub(*d)).sum();
        if missing > remaining.saturating_mul(u1) {
            return false;
        }
        let cands: Vec<usize> = (0..self.comps[rk].len())
            .filter(|y| !(lk == rk && *y == x) && !self.conns[c].denied.contains(&(x, *y)) && self.in_deg[c][*y] < u2)
            .collect();
        self.pick(c, x, &cands, 0, &mut Vec::new())
    }

    fn pick(&mut self, c: usize, x: usize, cands: &[usize], i: usize, chosen: &mut Vec<usize>) -> bool {
        let fwd = self.conns[c].def.forward.as_ref();
        let (l1, u1) = range(fwd);
        if (chosen.len() + cands.len() - i) < l1 as usize {
            return false;
        }
        if i == cands.len() {
            return self.take(c, x, chosen);
        }
        let y = cands[i];
        if (chosen.len() as u64) < u1 {
            chosen.push(y);
            if self.pick(c, x, cands, i + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
        !self.conns[c].forced.contains(&(x, y)) && self.pick(c, x, cands, i + 1, chosen)
    }

    /// Untouched synthesized partners with equal rows are interchangeable:
    /// the chosen ones must come first among them.
    fn canonical(&self, c: usize, x: usize, chosen: &[usize]) -> bool {
        let (lk, rk) = (self.conns[c].left, self.conns[c].right);
        let mut skipped: BTreeSet<usize> = BTreeSet::new();
        for y in 0..self.comps[rk].len() {
            let fresh = self.comps[rk][y].synthesized
                && self.touched[rk][y] == 0
                && !(lk == rk && y <= x);
            if !fresh {
                continue;
            }
            let row = self.row[rk][y];
            if chosen.contains(&y) {
                if skipped.contains(&row) {
                    return false;
                }
            } else {
                skipped.insert(row);
            }
        }
        true
    }

    fn take(&mut self, c: usize, x: usize, chosen: &[usize]) -> bool {
        let (lk, rk) = (self.conns[c].left, self.conns[c].right);
        if !self.canonical(c, x, chosen) {
            return false;
        }
        let forced_ok = self.conns[c].forced.iter().filter(|(l, _)| *l == x).all(|(_, r)| chosen.contains(r));
        if !forced_ok || !self.formula_holds(self.conns[c].def.forward.as_ref(), Side::Left, (lk, x), rk, chosen) {
            return false;
        }
        for y in chosen {
            self.in_deg[c][*y] += 1;
            self.touched[rk][*y] += 1;
        }
        self.touched[lk][x] += chosen.len() as u32;
        self.adj[c][x] = chosen.to_vec();
        let found = self.one_to_many_admits(false) && self.edges(c, x + 1);
        self.adj[c][x].clear();
        self.touched[lk][x] -= chosen.len() as u32;
        for y in chosen {
            self.in_deg[c][*y] -= 1;
            self.touched[rk][*y] -= 1;
        }
        found
    }

    fn verdict(&self) -> bool {
        if self.structural {
            return self.one_to_many_admits(true);
        }
        let mut config = Configuration::default();
        for (k, kind) in self.spec.kinds.iter().enumerate() {
            let comps = self.comps[k]
                .iter()
                .enumerate()
                .map(|(i, c)| ComponentInstance { id: c.id.clone(), row: self.catalogue[k][self.row[k][i]].clone() })
                .collect();
            config.instances.insert(kind.name.clone(), comps);
        }
        for (c, conn) in self.conns.iter().enumerate() {
            let mut edges = Vec::new();
            for (x, ys) in self.adj[c].iter().enumerate() {
                for y in ys {
                    edges.push((self.comps[conn.left][x].id.clone(), self.comps[conn.right][*y].id.clone()));
                }
            }
            config.edges.insert(conn.def.name.clone(), edges);
        }
        check_model(self.spec, self.inst, &config).accepted()
    }
}
