use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::SolveError;
use crate::bounds::BoundsMap;
use crate::model::{
    Bound, CatalogueRow, EffectiveClass, InstanceSpec, Limit, Polarity, ProblemSpec,
};

/// One id a component of a kind may take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub id: String,
    /// Named by the instance (input domain, required atom or asserted edge);
    /// named candidates are active in every configuration.
    pub named: bool,
    /// Indices into the kind's rows compatible with every required binding.
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundKind {
    pub name: String,
    pub class: EffectiveClass,
    pub bound: Bound,
    pub rows: Vec<CatalogueRow>,
    /// Named candidates first, then synthesized `Kind#k`, up to the upper bound.
    pub pool: Vec<Candidate>,
}

impl GroundKind {
    pub fn named(&self) -> usize {
        self.pool.iter().filter(|c| c.named).count()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.pool.iter().position(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundConnection {
    pub name: String,
    pub left: usize,
    pub right: usize,
    /// Asserted edges, as candidate indices.
    pub forced: BTreeSet<(usize, usize)>,
    /// Denied edges, as candidate indices.
    pub denied: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundProblem {
    pub spec: ProblemSpec,
    pub instance: InstanceSpec,
    pub kinds: Vec<GroundKind>,
    pub connections: Vec<GroundConnection>,
    /// Set when the instance cannot fit the pools at all.
    pub infeasible: Option<String>,
}

impl GroundProblem {
    pub fn kind(&self, name: &str) -> Option<&GroundKind> {
        self.kinds.iter().find(|k| k.name == name)
    }

    pub fn connection(&self, name: &str) -> Option<&GroundConnection> {
        self.connections.iter().find(|c| c.name == name)
    }

    /// Number of free edge variables of a connection: every candidate pair
    /// except denied and reflexive ones.
    pub fn edge_variables(&self, conn: &GroundConnection) -> usize {
        let (l, r) = (self.kinds[conn.left].pool.len(), self.kinds[conn.right].pool.len());
        let reflexive = if conn.left == conn.right { l } else { 0 };
        l * r - reflexive - conn.denied.iter().filter(|(a, b)| conn.left != conn.right || a != b).count()
    }

    pub fn variable_count(&self) -> usize {
        let pools: usize = self.kinds.iter().filter(|k| k.class == EffectiveClass::Generated).map(|k| k.pool.len()).sum();
        pools + self.connections.iter().map(|c| self.edge_variables(c)).sum::<usize>()
    }
}

fn add_named(names: &mut Vec<String>, id: &str) {
    if !names.iter().any(|n| n == id) {
        names.push(id.to_string());
    }
}

/// Builds the finite search space from accepted bounds.
pub fn ground(spec: &ProblemSpec, inst: &InstanceSpec, bounds: &BoundsMap) -> Result<GroundProblem, SolveError> {
    let mut infeasible = None;
    let mut kinds = Vec::with_capacity(spec.kinds.len());
    for kind in &spec.kinds {
        let entry = bounds.iter().find(|e| e.kind == kind.name).ok_or_else(|| SolveError::MissingBounds(kind.name.clone()))?;
        let rows = spec.catalogue_rows(kind);
        let mut names = Vec::new();
        let ub = match entry.class {
            EffectiveClass::Input => {
                names = inst.domain(&kind.name).map(|d| d.ids.clone()).unwrap_or_default();
                names.len()
            }
            EffectiveClass::Generated => {
                let Limit::Finite(ub) = entry.bound.ub else {
                    return Err(SolveError::UnboundedKind(kind.name.clone()));
                };
                for atom in inst.required.iter().filter(|a| a.kind == kind.name) {
                    add_named(&mut names, &atom.id);
                }
                for lit in inst.literals.iter().filter(|l| l.polarity == Polarity::Positive) {
                    let Some(conn) = spec.connection(&lit.connection) else { continue };
                    if conn.left == kind.name {
                        add_named(&mut names, &lit.left_id);
                    }
                    if conn.right == kind.name {
                        add_named(&mut names, &lit.right_id);
                    }
                }
                if names.len() as u64 > ub {
                    infeasible.get_or_insert(format!(
                        "{} named `{}` components exceed the upper bound {}",
                        names.len(),
                        kind.name,
                        ub
                    ));
                }
                usize::try_from(ub).unwrap_or(usize::MAX).max(names.len())
            }
        };
        let mut pool: Vec<Candidate> = names
            .iter()
            .map(|id| {
                let allowed = (0..rows.len())
                    .filter(|&r| {
                        inst.required.iter().filter(|a| a.kind == kind.name && a.id == *id).all(|a| {
                            a.bindings.iter().zip(&rows[r].0).all(|(b, v)| b.as_ref().is_none_or(|b| b == v))
                        })
                    })
                    .collect();
                Candidate { id: id.clone(), named: true, rows: allowed }
            })
            .collect();
        let mut k = 0;
        while pool.len() < ub {
            k += 1;
            let id = format!("{}#{k}", kind.name);
            if !names.contains(&id) {
                pool.push(Candidate { id, named: false, rows: (0..rows.len()).collect() });
            }
        }
        for atom in inst.required.iter().filter(|a| a.kind == kind.name) {
            if !pool.iter().any(|c| c.id == atom.id) {
                infeasible.get_or_insert(format!("required `{}({})` is not in the input domain", atom.kind, atom.id));
            }
        }
        kinds.push(GroundKind { name: kind.name.clone(), class: entry.class, bound: entry.bound, rows, pool });
    }

    let mut connections = Vec::with_capacity(spec.binary_connections.len());
    for conn in &spec.binary_connections {
        let left = spec.kind_index(&conn.left).ok_or_else(|| SolveError::MissingBounds(conn.left.clone()))?;
        let right = spec.kind_index(&conn.right).ok_or_else(|| SolveError::MissingBounds(conn.right.clone()))?;
        let mut forced = BTreeSet::new();
        let mut denied = BTreeSet::new();
        for lit in inst.literals.iter().filter(|l| l.connection == conn.name) {
            let ends = (kinds[left].index_of(&lit.left_id), kinds[right].index_of(&lit.right_id));
            match (lit.polarity, ends) {
                (Polarity::Positive, (Some(a), Some(b))) if !(left == right && a == b) => {
                    forced.insert((a, b));
                }
                (Polarity::Positive, _) => {
                    infeasible.get_or_insert(format!(
                        "asserted edge {}({}, {}) cannot exist",
                        conn.name, lit.left_id, lit.right_id
                    ));
                }
                (Polarity::Negative, (Some(a), Some(b))) => {
                    denied.insert((a, b));
                }
                (Polarity::Negative, _) => {}
            }
        }
        if !forced.is_disjoint(&denied) {
            infeasible.get_or_insert(format!("an edge of {} is both asserted and denied", conn.name));
        }
        connections.push(GroundConnection { name: conn.name.clone(), left, right, forced, denied });
    }
    Ok(GroundProblem { spec: spec.clone(), instance: inst.clone(), kinds, connections, infeasible })
}
