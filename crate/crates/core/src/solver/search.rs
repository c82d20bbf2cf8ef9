//! Backtracking search over a ground problem.
//!
//! Count vectors for the generated kinds are tried smallest total first. For
//! each vector the connections are filled one at a time: every component on
//! the driving side picks its partner subset, candidate by candidate, with
//! forward checks on degrees, one-to-many totals, per-edge conjuncts and
//! partial capacity sums. Rows are chosen when a component is first needed
//! by a constraint. Synthesized components nobody has touched yet are
//! interchangeable, so a driver may only take a prefix of them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::formula::Formula;
use super::ground::GroundProblem;
use super::{CountStrategy, SolveError, SolveOptions, SolveOutcome};
use crate::expr::Side;
use crate::model::{
    CatalogueRow, ComponentInstance, Configuration, DirectionRule, EffectiveClass, Limit,
};

enum Halt {
    Done,
    Fuel,
}

type Step = Result<(), Halt>;

struct Rule {
    lower: u64,
    upper: Option<u64>,
    formula: Option<Formula>,
}

impl Rule {
    fn allows(&self, degree: usize) -> bool {
        self.upper.is_none_or(|u| (degree as u64) < u)
    }
}

struct Conn {
    left: usize,
    right: usize,
    self_loop: bool,
    driver_left: bool,
    driver: Rule,
    partner: Rule,
    needs_rows: bool,
    /// One-to-many connections counting this connection: (otm, right index,
    /// whether the otm's left kind is this connection's left kind).
    otms: Vec<(usize, usize, bool)>,
}

impl Conn {
    fn driver_kind(&self) -> usize {
        if self.driver_left {
            self.left
        } else {
            self.right
        }
    }

    fn partner_kind(&self) -> usize {
        if self.driver_left {
            self.right
        } else {
            self.left
        }
    }

    /// (left, right) candidate pair of a driver/partner edge.
    fn oriented(&self, x: usize, y: usize) -> (usize, usize) {
        if self.driver_left {
            (x, y)
        } else {
            (y, x)
        }
    }
}

struct Otm {
    left: usize,
    rights: usize,
    lower: u64,
    upper: Option<u64>,
    exclusive: bool,
    last_conn: usize,
    /// Per right: the kind and the (lower, upper) count of left partners per right component.
    per_right: Vec<(usize, u64, Option<u64>)>,
}

fn upper_of(limit: Limit) -> Option<u64> {
    limit.finite()
}

fn nonnegative(gp: &GroundProblem, kind: usize) -> Vec<bool> {
    let k = &gp.kinds[kind];
    let arity = gp.spec.kinds[kind].attributes.len();
    (0..arity)
        .map(|a| k.rows.iter().all(|r| r.0.get(a).and_then(|v| v.as_int()).is_some_and(|v| v >= 0)))
        .collect()
}

fn compile_rule(
    gp: &GroundProblem,
    name: &str,
    rule: Option<&DirectionRule>,
    own_side: Side,
    own: usize,
    partner: usize,
) -> Result<Rule, SolveError> {
    let Some(rule) = rule else {
        return Ok(Rule { lower: 0, upper: None, formula: None });
    };
    let formula = match &rule.constraint {
        None => None,
        Some(expr) => Some(
            Formula::compile(expr, own_side, &gp.spec.kinds[own], &gp.spec.kinds[partner], &nonnegative(gp, partner))
                .ok_or_else(|| SolveError::BadConstraint(name.into()))?,
        ),
    };
    Ok(Rule { lower: rule.card.lower, upper: upper_of(rule.card.upper), formula })
}

struct Search<'g> {
    gp: &'g GroundProblem,
    conns: Vec<Conn>,
    otms: Vec<Otm>,
    max_solutions: usize,
    fuel: u64,
    used: u64,
    /// Try order of the named partner candidates, per connection.
    named_order: Vec<Vec<usize>>,
    counts: Vec<usize>,
    row: Vec<Vec<Option<usize>>>,
    edges: Vec<Vec<u32>>,
    drv_adj: Vec<Vec<Vec<usize>>>,
    par_adj: Vec<Vec<Vec<usize>>>,
    otm_count: Vec<Vec<Vec<u32>>>,
    solutions: Vec<Configuration>,
}

/// Searches `gp` for configurations.
pub fn solve(gp: &GroundProblem, opts: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    let ranges = count_ranges(gp, &opts.count)?;
    if gp.infeasible.is_some() || ranges.iter().any(|(lo, hi)| lo > hi) {
        return Ok(SolveOutcome::Unsat);
    }
    let mut search = Search::new(gp, opts)?;
    let generated: Vec<usize> =
        (0..gp.kinds.len()).filter(|k| gp.kinds[*k].class == EffectiveClass::Generated).collect();
    let lo: usize = ranges.iter().map(|r| r.0).sum();
    let hi: usize = ranges.iter().map(|r| r.1).sum();
    for total in lo..=hi {
        for vector in vectors_with_total(&ranges, total) {
            let mut counts: Vec<usize> = gp.kinds.iter().map(|k| k.pool.len()).collect();
            for (g, n) in generated.iter().zip(&vector) {
                counts[*g] = *n;
            }
            match search.run(counts) {
                Ok(()) => {}
                Err(Halt::Done) => return Ok(SolveOutcome::Solutions(search.solutions)),
                Err(Halt::Fuel) if search.solutions.is_empty() => return Ok(SolveOutcome::FuelExhausted),
                Err(Halt::Fuel) => return Ok(SolveOutcome::Solutions(search.solutions)),
            }
        }
    }
    if search.solutions.is_empty() {
        Ok(SolveOutcome::Unsat)
    } else {
        Ok(SolveOutcome::Solutions(search.solutions))
    }
}

/// Allowed count range per generated kind, in kind order.
fn count_ranges(gp: &GroundProblem, strategy: &CountStrategy) -> Result<Vec<(usize, usize)>, SolveError> {
    if let CountStrategy::Fixed(fixed) = strategy {
        for name in fixed.keys() {
            if gp.kind(name).is_none_or(|k| k.class != EffectiveClass::Generated) {
                return Err(SolveError::UnknownKind(name.clone()));
            }
        }
    }
    let mut ranges = Vec::new();
    for kind in gp.kinds.iter().filter(|k| k.class == EffectiveClass::Generated) {
        let named = kind.named();
        let lo = (kind.bound.lb as usize).max(named);
        let hi = kind.pool.len();
        let fixed = match strategy {
            CountStrategy::SweepUp => None,
            CountStrategy::Uniform(n) => Some(*n),
            CountStrategy::Fixed(map) => map.get(&kind.name).copied(),
        };
        match fixed {
            None => ranges.push((lo, hi)),
            Some(n) if kind.bound.contains(n) => {
                let n = n as usize;
                ranges.push(if n >= named { (n, n) } else { (1, 0) });
            }
            Some(n) => return Err(SolveError::CountOutOfBounds { kind: kind.name.clone(), count: n, bound: kind.bound }),
        }
    }
    Ok(ranges)
}

/// All vectors inside `ranges` summing to `total`, lexicographically.
fn vectors_with_total(ranges: &[(usize, usize)], total: usize) -> Vec<Vec<usize>> {
    fn go(ranges: &[(usize, usize)], rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(((lo, hi), tail)) = ranges.split_first() else {
            if rest == 0 {
                out.push(prefix.clone());
            }
            return;
        };
        let tail_lo: usize = tail.iter().map(|r| r.0).sum();
        let tail_hi: usize = tail.iter().map(|r| r.1).sum();
        for n in *lo..=(*hi).min(rest) {
            if rest - n < tail_lo || rest - n > tail_hi {
                continue;
            }
            prefix.push(n);
            go(tail, rest - n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(ranges, total, &mut Vec::new(), &mut out);
    out
}

impl<'g> Search<'g> {
    fn new(gp: &'g GroundProblem, opts: &SolveOptions) -> Result<Self, SolveError> {
        let spec = &gp.spec;
        let mut conns = Vec::new();
        for (ci, (def, g)) in spec.binary_connections.iter().zip(&gp.connections).enumerate() {
            let (left, right) = (g.left, g.right);
            let driver_left = !(gp.kinds[left].class == EffectiveClass::Generated
                && gp.kinds[right].class == EffectiveClass::Input);
            let fwd = compile_rule(gp, &def.name, def.forward.as_ref(), Side::Left, left, right)?;
            let bwd = compile_rule(gp, &def.name, def.backward.as_ref(), Side::Right, right, left)?;
            let (driver, partner) = if driver_left { (fwd, bwd) } else { (bwd, fwd) };
            let needs_rows = driver.formula.is_some() || partner.formula.is_some();
            let mut otms = Vec::new();
            for (oi, otm) in spec.one_to_many.iter().enumerate() {
                for (ri, r) in otm.rights.iter().enumerate() {
                    if otm.left == def.left && *r == def.right {
                        otms.push((oi, ri, true));
                    } else if otm.left == def.right && *r == def.left {
                        otms.push((oi, ri, false));
                    }
                }
            }
            conns.push(Conn { left, right, self_loop: left == right, driver_left, driver, partner, needs_rows, otms });
            let _ = ci;
        }
        let mut otms = Vec::new();
        for (oi, otm) in spec.one_to_many.iter().enumerate() {
            let left = spec.kind_index(&otm.left).ok_or_else(|| SolveError::MissingBounds(otm.left.clone()))?;
            let mut per_right = Vec::new();
            let mut last_conn = 0;
            for (ri, r) in otm.rights.iter().enumerate() {
                let kind = spec.kind_index(r).ok_or_else(|| SolveError::MissingBounds(r.clone()))?;
                let ci = conns
                    .iter()
                    .position(|c| c.otms.iter().any(|(o, i, _)| *o == oi && *i == ri))
                    .ok_or_else(|| SolveError::MissingBounds(r.clone()))?;
                last_conn = last_conn.max(ci);
                let def = &spec.binary_connections[ci];
                let rule = if def.left == otm.left { def.backward.as_ref() } else { def.forward.as_ref() };
                let (l, u) = rule.map_or((0, None), |r| (r.card.lower, upper_of(r.card.upper)));
                per_right.push((kind, l, u));
            }
            otms.push(Otm {
                left,
                rights: otm.rights.len(),
                lower: otm.card.lower,
                upper: upper_of(otm.card.upper),
                exclusive: otm.exclusive,
                last_conn,
                per_right,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let named_order = conns
            .iter()
            .map(|c| {
                let pool = &gp.kinds[c.partner_kind()].pool;
                let mut named: Vec<usize> = (0..pool.len()).filter(|i| pool[*i].named).collect();
                if opts.seed != 0 {
                    named.shuffle(&mut rng);
                }
                named
            })
            .collect();
        Ok(Search {
            gp,
            conns,
            otms,
            max_solutions: opts.max_solutions.max(1),
            fuel: opts.fuel,
            used: 0,
            named_order,
            counts: Vec::new(),
            row: Vec::new(),
            edges: Vec::new(),
            drv_adj: Vec::new(),
            par_adj: Vec::new(),
            otm_count: Vec::new(),
            solutions: Vec::new(),
        })
    }

    fn tick(&mut self) -> Step {
        self.used += 1;
        if self.used > self.fuel {
            Err(Halt::Fuel)
        } else {
            Ok(())
        }
    }

    fn run(&mut self, counts: Vec<usize>) -> Step {
        self.tick()?;
        let pools: Vec<usize> = self.gp.kinds.iter().map(|k| k.pool.len()).collect();
        self.row = pools.iter().map(|n| vec![None; *n]).collect();
        self.edges = pools.iter().map(|n| vec![0; *n]).collect();
        self.drv_adj = self.conns.iter().map(|c| vec![Vec::new(); pools[c.driver_kind()]]).collect();
        self.par_adj = self.conns.iter().map(|c| vec![Vec::new(); pools[c.partner_kind()]]).collect();
        self.otm_count = self.otms.iter().map(|o| vec![vec![0; o.rights]; pools[o.left]]).collect();
        self.counts = counts;
        if !self.statically_feasible() {
            return Ok(());
        }
        self.connection(0)
    }

    fn statically_feasible(&self) -> bool {
        let n = |k: usize| self.counts[k] as u64;
        for c in &self.conns {
            let (nd, np) = (n(c.driver_kind()), n(c.partner_kind()));
            let avail_p = if c.self_loop { np.saturating_sub(1) } else { np };
            let avail_d = if c.self_loop { nd.saturating_sub(1) } else { nd };
            if (nd > 0 && c.driver.lower > avail_p) || (np > 0 && c.partner.lower > avail_d) {
                return false;
            }
            let min_edges = (nd * c.driver.lower).max(np * c.partner.lower);
            let mut max_edges = nd * avail_p;
            if let Some(u) = c.driver.upper {
                max_edges = max_edges.min(nd * u);
            }
            if let Some(u) = c.partner.upper {
                max_edges = max_edges.min(np * u);
            }
            if min_edges > max_edges {
                return false;
            }
        }
        for o in &self.otms {
            let nc = n(o.left);
            let most: u64 = o.per_right.iter().map(|(k, _, u)| n(*k) * u.unwrap_or(nc).min(nc)).sum();
            let least: u64 = o.per_right.iter().map(|(k, l, _)| n(*k) * l).sum();
            if nc * o.lower > most || o.upper.is_some_and(|u| least > nc * u) {
                return false;
            }
        }
        true
    }

    fn connection(&mut self, c: usize) -> Step {
        if c == self.conns.len() {
            return self.complete();
        }
        self.driver_step(c, 0)
    }

    fn counting_ok(&self, c: usize, remaining: usize) -> bool {
        let conn = &self.conns[c];
        let pk = conn.partner_kind();
        let degs = || self.par_adj[c][..self.counts[pk]].iter().map(Vec::len);
        if let Some(u) = conn.driver.upper {
            let missing: u64 = degs().map(|d| conn.partner.lower.saturating_sub(d as u64)).sum();
            if missing > remaining as u64 * u {
                return false;
            }
        }
        if let Some(u) = conn.partner.upper {
            let room: u64 = degs().map(|d| u.saturating_sub(d as u64)).sum();
            if remaining as u64 * conn.driver.lower > room {
                return false;
            }
        }
        true
    }

    fn driver_step(&mut self, c: usize, x: usize) -> Step {
        self.tick()?;
        let dk = self.conns[c].driver_kind();
        if x == self.counts[dk] {
            return self.end_connection(c);
        }
        if !self.counting_ok(c, self.counts[dk] - x) {
            return Ok(());
        }
        if self.conns[c].needs_rows && self.row[dk][x].is_none() {
            let rows = self.gp.kinds[dk].pool[x].rows.clone();
            for r in rows {
                self.row[dk][x] = Some(r);
                let res = self.start_choice(c, x);
                if res.is_err() {
                    self.row[dk][x] = None;
                    return res;
                }
            }
            self.row[dk][x] = None;
            return Ok(());
        }
        self.start_choice(c, x)
    }

    fn start_choice(&mut self, c: usize, x: usize) -> Step {
        let pk = self.conns[c].partner_kind();
        let pool = &self.gp.kinds[pk].pool;
        let mut order: Vec<usize> = self.named_order[c].clone();
        order.extend((0..self.counts[pk]).filter(|i| !pool[*i].named));
        if self.conns[c].self_loop {
            order.retain(|y| *y != x);
        }
        let fresh: Vec<bool> =
            order.iter().map(|y| !pool[*y].named && self.row[pk][*y].is_none() && self.edges[pk][*y] == 0).collect();
        self.choose(c, x, &order, &fresh, 0, false, None)
    }

    fn is_forced(&self, c: usize, x: usize, y: usize) -> bool {
        self.gp.connections[c].forced.contains(&self.conns[c].oriented(x, y))
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        &mut self,
        c: usize,
        x: usize,
        order: &[usize],
        fresh: &[bool],
        pos: usize,
        closed: bool,
        last_fresh_row: Option<usize>,
    ) -> Step {
        self.tick()?;
        let (dk, pk) = (self.conns[c].driver_kind(), self.conns[c].partner_kind());
        let deg = self.drv_adj[c][x].len();
        let saturated = !self.conns[c].driver.allows(deg);
        if pos == order.len() || saturated {
            if order[pos.min(order.len())..].iter().any(|y| self.is_forced(c, x, *y)) {
                return Ok(());
            }
            if (deg as u64) < self.conns[c].driver.lower {
                return Ok(());
            }
            if let Some(f) = &self.conns[c].driver.formula {
                let own = self.row_of(dk, x);
                let partners: Vec<&CatalogueRow> = self.drv_adj[c][x].iter().map(|y| self.row_of(pk, *y)).collect();
                if !f.holds(own, &partners) {
                    return Ok(());
                }
            }
            return self.driver_step(c, x + 1);
        }
        if deg as u64 + ((order.len() - pos) as u64) < self.conns[c].driver.lower {
            return Ok(());
        }
        let y = order[pos];
        let forced = self.is_forced(c, x, y);
        let denied = self.gp.connections[c].denied.contains(&self.conns[c].oriented(x, y));
        if !denied && !(fresh[pos] && closed) && self.can_link(c, x, y) {
            if self.conns[c].needs_rows && self.row[pk][y].is_none() {
                let rows = self.gp.kinds[pk].pool[y].rows.clone();
                for r in rows {
                    if fresh[pos] && last_fresh_row.is_some_and(|l| r < l) {
                        continue;
                    }
                    self.row[pk][y] = Some(r);
                    let res = self.try_link(c, x, y, order, fresh, pos, closed, if fresh[pos] { Some(r) } else { last_fresh_row });
                    self.row[pk][y] = None;
                    res?;
                }
            } else {
                self.try_link(c, x, y, order, fresh, pos, closed, last_fresh_row)?;
            }
        }
        if !forced {
            self.choose(c, x, order, fresh, pos + 1, closed || fresh[pos], last_fresh_row)?;
        }
        Ok(())
    }

    fn row_of(&self, kind: usize, cand: usize) -> &'g CatalogueRow {
        let r = self.row[kind][cand].unwrap_or(0);
        &self.gp.kinds[kind].rows[r]
    }

    /// Degree and one-to-many checks for a new edge.
    fn can_link(&self, c: usize, x: usize, y: usize) -> bool {
        let conn = &self.conns[c];
        if !conn.partner.allows(self.par_adj[c][y].len()) {
            return false;
        }
        let (l, r) = conn.oriented(x, y);
        conn.otms.iter().all(|&(o, ri, otm_is_left)| {
            let cand = if otm_is_left { l } else { r };
            let counts = &self.otm_count[o][cand];
            let total: u32 = counts.iter().sum();
            let otm = &self.otms[o];
            otm.upper.is_none_or(|u| u64::from(total) < u)
                && !(otm.exclusive && counts.iter().enumerate().any(|(i, n)| i != ri && *n > 0))
        })
    }

    fn link(&mut self, c: usize, x: usize, y: usize, add: bool) {
        let conn = &self.conns[c];
        let (dk, pk) = (conn.driver_kind(), conn.partner_kind());
        let (l, r) = conn.oriented(x, y);
        if add {
            self.drv_adj[c][x].push(y);
            self.par_adj[c][y].push(x);
            self.edges[dk][x] += 1;
            self.edges[pk][y] += 1;
        } else {
            self.drv_adj[c][x].pop();
            self.par_adj[c][y].pop();
            self.edges[dk][x] -= 1;
            self.edges[pk][y] -= 1;
        }
        for &(o, ri, otm_is_left) in &self.conns[c].otms {
            let cand = if otm_is_left { l } else { r };
            let n = &mut self.otm_count[o][cand][ri];
            if add {
                *n += 1;
            } else {
                *n -= 1;
            }
        }
    }

    fn formulas_ok(&self, c: usize, x: usize, y: usize) -> bool {
        let conn = &self.conns[c];
        let (dk, pk) = (conn.driver_kind(), conn.partner_kind());
        if let Some(f) = &conn.driver.formula {
            let own = self.row_of(dk, x);
            if !f.edge_ok(own, self.row_of(pk, y)) {
                return false;
            }
            let partners: Vec<&CatalogueRow> = self.drv_adj[c][x].iter().map(|p| self.row_of(pk, *p)).collect();
            if !f.caps_ok(own, &partners) {
                return false;
            }
        }
        if let Some(f) = &conn.partner.formula {
            let own = self.row_of(pk, y);
            if !f.edge_ok(own, self.row_of(dk, x)) {
                return false;
            }
            let partners: Vec<&CatalogueRow> = self.par_adj[c][y].iter().map(|p| self.row_of(dk, *p)).collect();
            if !f.caps_ok(own, &partners) {
                return false;
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn try_link(
        &mut self,
        c: usize,
        x: usize,
        y: usize,
        order: &[usize],
        fresh: &[bool],
        pos: usize,
        closed: bool,
        last_fresh_row: Option<usize>,
    ) -> Step {
        self.link(c, x, y, true);
        let res = if self.formulas_ok(c, x, y) {
            self.choose(c, x, order, fresh, pos + 1, closed, last_fresh_row)
        } else {
            Ok(())
        };
        self.link(c, x, y, false);
        res
    }

    fn end_connection(&mut self, c: usize) -> Step {
        let conn = &self.conns[c];
        let (dk, pk) = (conn.driver_kind(), conn.partner_kind());
        for y in 0..self.counts[pk] {
            let partners = &self.par_adj[c][y];
            if (partners.len() as u64) < conn.partner.lower {
                return Ok(());
            }
            if let (Some(f), Some(_)) = (&conn.partner.formula, self.row[pk][y]) {
                let rows: Vec<&CatalogueRow> = partners.iter().map(|p| self.row_of(dk, *p)).collect();
                if !f.holds(self.row_of(pk, y), &rows) {
                    return Ok(());
                }
            }
        }
        for (o, otm) in self.otms.iter().enumerate() {
            if otm.last_conn == c
                && (0..self.counts[otm.left]).any(|i| u64::from(self.otm_count[o][i].iter().sum::<u32>()) < otm.lower)
            {
                return Ok(());
            }
        }
        self.connection(c + 1)
    }

    /// Rows that only matter to a component itself: one without edges in
    /// any constrained connection. The first row that passes is as good as
    /// any other.
    fn own_row_ok(&self, kind: usize, cand: usize, row: &CatalogueRow) -> bool {
        self.conns.iter().enumerate().all(|(c, conn)| {
            let mut ok = true;
            if conn.driver_kind() == kind && cand < self.drv_adj[c].len() {
                if let Some(f) = &conn.driver.formula {
                    let ps: Vec<&CatalogueRow> = self.drv_adj[c][cand].iter().map(|p| self.row_of(conn.partner_kind(), *p)).collect();
                    ok &= f.holds(row, &ps);
                }
            }
            if conn.partner_kind() == kind && cand < self.par_adj[c].len() {
                if let Some(f) = &conn.partner.formula {
                    let ps: Vec<&CatalogueRow> = self.par_adj[c][cand].iter().map(|p| self.row_of(conn.driver_kind(), *p)).collect();
                    ok &= f.holds(row, &ps);
                }
            }
            ok
        })
    }

    fn complete(&mut self) -> Step {
        self.tick()?;
        let mut assigned = Vec::new();
        let mut ok = true;
        'kinds: for k in 0..self.gp.kinds.len() {
            for i in 0..self.counts[k] {
                if self.row[k][i].is_some() {
                    continue;
                }
                let rows = &self.gp.kinds[k].pool[i].rows;
                match rows.iter().copied().find(|r| self.own_row_ok(k, i, &self.gp.kinds[k].rows[*r])) {
                    Some(r) => {
                        self.row[k][i] = Some(r);
                        assigned.push((k, i));
                    }
                    None => {
                        ok = false;
                        break 'kinds;
                    }
                }
            }
        }
        let res = if ok && self.verify() {
            self.solutions.push(self.configuration());
            if self.solutions.len() >= self.max_solutions {
                Err(Halt::Done)
            } else {
                Ok(())
            }
        } else {
            Ok(())
        };
        for (k, i) in assigned {
            self.row[k][i] = None;
        }
        res
    }

    /// Full re-check of the finished assignment with the compiled formulas.
    fn verify(&self) -> bool {
        let gp = self.gp;
        for k in 0..gp.kinds.len() {
            for i in 0..self.counts[k] {
                match self.row[k][i] {
                    Some(r) if gp.kinds[k].pool[i].rows.contains(&r) => {}
                    _ => return false,
                }
            }
        }
        let mut totals: Vec<Vec<Vec<u32>>> =
            self.otms.iter().map(|o| vec![vec![0; o.rights]; self.counts[o.left]]).collect();
        for (c, conn) in self.conns.iter().enumerate() {
            let (dk, pk) = (conn.driver_kind(), conn.partner_kind());
            let mut in_deg = vec![Vec::new(); self.counts[pk]];
            for x in 0..self.counts[dk] {
                let ys = &self.drv_adj[c][x];
                if !conn.driver.lower.le(&(ys.len() as u64)) || conn.driver.upper.is_some_and(|u| ys.len() as u64 > u) {
                    return false;
                }
                for (n, y) in ys.iter().enumerate() {
                    if *y >= self.counts[pk] || (conn.self_loop && *y == x) || ys[..n].contains(y) {
                        return false;
                    }
                    let pair = conn.oriented(x, *y);
                    if gp.connections[c].denied.contains(&pair) {
                        return false;
                    }
                    in_deg[*y].push(x);
                    for &(o, ri, otm_is_left) in &conn.otms {
                        totals[o][if otm_is_left { pair.0 } else { pair.1 }][ri] += 1;
                    }
                }
                if let Some(f) = &conn.driver.formula {
                    let ps: Vec<&CatalogueRow> = ys.iter().map(|y| self.row_of(pk, *y)).collect();
                    if !f.holds(self.row_of(dk, x), &ps) {
                        return false;
                    }
                }
            }
            for (y, xs) in in_deg.iter().enumerate() {
                if (xs.len() as u64) < conn.partner.lower || conn.partner.upper.is_some_and(|u| xs.len() as u64 > u) {
                    return false;
                }
                if let Some(f) = &conn.partner.formula {
                    let ps: Vec<&CatalogueRow> = xs.iter().map(|x| self.row_of(dk, *x)).collect();
                    if !f.holds(self.row_of(pk, y), &ps) {
                        return false;
                    }
                }
            }
            for &(l, r) in &gp.connections[c].forced {
                let (x, y) = if conn.driver_left { (l, r) } else { (r, l) };
                if !self.drv_adj[c][x].contains(&y) {
                    return false;
                }
            }
        }
        self.otms.iter().zip(&totals).all(|(o, per_comp)| {
            per_comp.iter().all(|counts| {
                let total = u64::from(counts.iter().sum::<u32>());
                total >= o.lower
                    && o.upper.is_none_or(|u| total <= u)
                    && !(o.exclusive && counts.iter().filter(|n| **n > 0).count() > 1)
            })
        })
    }

    fn configuration(&self) -> Configuration {
        let gp = self.gp;
        let mut instances = BTreeMap::new();
        for (k, kind) in gp.kinds.iter().enumerate() {
            let comps = (0..self.counts[k])
                .map(|i| ComponentInstance { id: kind.pool[i].id.clone(), row: self.row_of(k, i).clone() })
                .collect();
            instances.insert(kind.name.clone(), comps);
        }
        let mut edges: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        for (c, conn) in self.conns.iter().enumerate() {
            let (dk, pk) = (conn.driver_kind(), conn.partner_kind());
            let mut list: Vec<(String, String)> = Vec::new();
            for x in 0..self.counts[dk] {
                for y in &self.drv_adj[c][x] {
                    let (a, b) = (gp.kinds[dk].pool[x].id.clone(), gp.kinds[pk].pool[*y].id.clone());
                    list.push(if conn.driver_left { (a, b) } else { (b, a) });
                }
            }
            list.sort();
            edges.insert(gp.connections[c].name.clone(), list);
        }
        Configuration { instances, edges }
    }
}
