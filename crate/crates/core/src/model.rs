//! Domain types: attribute types, component kinds, connections, instance
//! knowledge, bounds and configurations.
//!
//! All types are plain immutable data once built. Collections are kept in
//! declaration order and looked up by name; specs are small enough that a
//! linear scan is the simplest correct index.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::ConstraintExpr;

/// A ground attribute value: an integer or a symbolic constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Sym(String),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Sym(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

/// A closed attribute type: the finite ordered set of values it admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeTypeDef {
    pub name: String,
    pub values: Vec<Value>,
}

impl AttributeTypeDef {
    pub fn contains(&self, value: &Value) -> bool {
        self.values.contains(value)
    }

    /// True when every value is an integer (an empty type counts as integer).
    pub fn is_integer(&self) -> bool {
        self.values.iter().all(|v| matches!(v, Value::Int(_)))
    }

    pub fn min_int(&self) -> Option<i64> {
        self.values.iter().filter_map(Value::as_int).min()
    }
}

/// Declared class of a component kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentClass {
    Input,
    Generated,
    Both,
}

impl ComponentClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentClass::Input => "input",
            ComponentClass::Generated => "generated",
            ComponentClass::Both => "both",
        }
    }
}

/// Class of a kind after the `both` kinds have been split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectiveClass {
    Input,
    Generated,
}

impl EffectiveClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectiveClass::Input => "input",
            EffectiveClass::Generated => "generated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDecl {
    pub name: String,
    pub type_name: String,
}

/// One manufacturable attribute tuple, in attribute declaration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CatalogueRow(pub Vec<Value>);

impl CatalogueRow {
    pub fn empty() -> Self {
        CatalogueRow(Vec::new())
    }
}

/// The catalogue of a kind. `Unrestricted` stands for the full product of the
/// attribute types, which for a kind without attributes is the single empty row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Catalogue {
    Unrestricted,
    Rows(Vec<CatalogueRow>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentKindDef {
    pub name: String,
    pub class: ComponentClass,
    pub attributes: Vec<AttributeDecl>,
    pub catalogue: Catalogue,
}

impl ComponentKindDef {
    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }
}

/// Upper end of a cardinality or bound.
///
/// The derived ordering puts every finite value below `Unbounded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Limit {
    Finite(u64),
    Unbounded,
}

impl Limit {
    pub fn finite(self) -> Option<u64> {
        match self {
            Limit::Finite(n) => Some(n),
            Limit::Unbounded => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Limit::Finite(_))
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(n) => write!(f, "{n}"),
            Limit::Unbounded => f.write_str("*"),
        }
    }
}

/// The `[l, u]` range of a counting quantifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cardinality {
    pub lower: u64,
    pub upper: Limit,
}

impl Cardinality {
    pub const fn new(lower: u64, upper: u64) -> Self {
        Cardinality { lower, upper: Limit::Finite(upper) }
    }

    pub const fn at_least(lower: u64) -> Self {
        Cardinality { lower, upper: Limit::Unbounded }
    }

    pub fn admits(&self, n: u64) -> bool {
        n >= self.lower && Limit::Finite(n) <= self.upper
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// Which of the two formulas of a binary connection a rule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// Counts right-hand partners per left-hand component.
    Forward,
    /// Counts left-hand partners per right-hand component.
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// A cardinality together with the optional constraint formula attached to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionRule {
    pub card: Cardinality,
    pub constraint: Option<ConstraintExpr>,
}

impl DirectionRule {
    pub fn new(card: Cardinality) -> Self {
        DirectionRule { card, constraint: None }
    }

    pub fn with_constraint(card: Cardinality, constraint: ConstraintExpr) -> Self {
        DirectionRule { card, constraint: Some(constraint) }
    }
}

/// A binary connection predicate `Left2Right` with its two counting formulas.
///
/// Both rules are present for a connection between distinct kinds; a
/// self-loop carries exactly one of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryConnectionDef {
    pub name: String,
    pub left: String,
    pub right: String,
    pub forward: Option<DirectionRule>,
    pub backward: Option<DirectionRule>,
}

impl BinaryConnectionDef {
    pub fn connection_name(left: &str, right: &str) -> String {
        format!("{left}2{right}")
    }

    pub fn new(left: &str, right: &str, forward: DirectionRule, backward: DirectionRule) -> Self {
        BinaryConnectionDef {
            name: Self::connection_name(left, right),
            left: left.to_string(),
            right: right.to_string(),
            forward: Some(forward),
            backward: Some(backward),
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.left == self.right
    }

    pub fn rule(&self, direction: Direction) -> Option<&DirectionRule> {
        match direction {
            Direction::Forward => self.forward.as_ref(),
            Direction::Backward => self.backward.as_ref(),
        }
    }

    pub fn touches(&self, kind: &str) -> bool {
        self.left == kind || self.right == kind
    }
}

/// A one-to-many connection from `left` to the set `rights`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneToManyConnectionDef {
    pub left: String,
    pub rights: Vec<String>,
    pub card: Cardinality,
    pub exclusive: bool,
}

impl OneToManyConnectionDef {
    /// Display name, e.g. `Bin->{ThingA,ThingB}`.
    pub fn name(&self) -> String {
        format!("{}->{{{}}}", self.left, self.rights.join(","))
    }
}

/// How a kind participates in a binary connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    Left,
    Right,
    SelfLoop,
}

/// A binary connection seen from one of its kinds.
#[derive(Debug, Clone, Copy)]
pub struct Incidence<'a> {
    pub connection: &'a BinaryConnectionDef,
    pub orientation: Orientation,
}

impl<'a> Incidence<'a> {
    pub fn partner(&self) -> &'a str {
        match self.orientation {
            Orientation::Left => &self.connection.right,
            Orientation::Right | Orientation::SelfLoop => &self.connection.left,
        }
    }

    /// Rule counting partners per component of this kind.
    pub fn per_self(&self) -> Option<&'a DirectionRule> {
        match self.orientation {
            Orientation::Left => self.connection.forward.as_ref(),
            Orientation::Right => self.connection.backward.as_ref(),
            Orientation::SelfLoop => None,
        }
    }

    /// Rule counting components of this kind per partner.
    pub fn per_partner(&self) -> Option<&'a DirectionRule> {
        match self.orientation {
            Orientation::Left => self.connection.backward.as_ref(),
            Orientation::Right => self.connection.forward.as_ref(),
            Orientation::SelfLoop => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("UNKNOWN_KIND: no component kind named `{0}`")]
    UnknownKind(String),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::UnknownKind(_) => "UNKNOWN_KIND",
        }
    }
}

/// Domain knowledge of a configuration problem.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProblemSpec {
    pub attribute_types: Vec<AttributeTypeDef>,
    pub kinds: Vec<ComponentKindDef>,
    pub binary_connections: Vec<BinaryConnectionDef>,
    pub one_to_many: Vec<OneToManyConnectionDef>,
}

impl ProblemSpec {
    pub fn attribute_type(&self, name: &str) -> Option<&AttributeTypeDef> {
        self.attribute_types.iter().find(|t| t.name == name)
    }

    pub fn kind(&self, name: &str) -> Option<&ComponentKindDef> {
        self.kinds.iter().find(|k| k.name == name)
    }

    pub fn kind_index(&self, name: &str) -> Option<usize> {
        self.kinds.iter().position(|k| k.name == name)
    }

    pub fn connection(&self, name: &str) -> Option<&BinaryConnectionDef> {
        self.binary_connections.iter().find(|c| c.name == name)
    }

    /// The binary connection between two kinds, in either orientation.
    pub fn connection_between(&self, a: &str, b: &str) -> Option<&BinaryConnectionDef> {
        self.binary_connections
            .iter()
            .find(|c| (c.left == a && c.right == b) || (c.left == b && c.right == a))
    }

    /// All binary connections touching `kind`, tagged with the side it occupies.
    /// Self-loops are reported once.
    pub fn incident_connections(&self, kind: &str) -> Result<Vec<Incidence<'_>>, ModelError> {
        if self.kind(kind).is_none() {
            return Err(ModelError::UnknownKind(kind.to_string()));
        }
        Ok(self
            .binary_connections
            .iter()
            .filter_map(|c| {
                let orientation = if c.is_self_loop() && c.left == kind {
                    Orientation::SelfLoop
                } else if c.left == kind {
                    Orientation::Left
                } else if c.right == kind {
                    Orientation::Right
                } else {
                    return None;
                };
                Some(Incidence { connection: c, orientation })
            })
            .collect())
    }

    /// The attribute type of every attribute of `kind`, `None` where it does not resolve.
    pub fn attribute_types_of(&self, kind: &ComponentKindDef) -> Vec<Option<&AttributeTypeDef>> {
        kind.attributes.iter().map(|a| self.attribute_type(&a.type_name)).collect()
    }

    /// Enumerates the catalogue of `kind`. An unrestricted catalogue expands to
    /// the product of the attribute types in declaration order.
    pub fn catalogue_rows(&self, kind: &ComponentKindDef) -> Vec<CatalogueRow> {
        match &kind.catalogue {
            Catalogue::Rows(rows) => rows.clone(),
            Catalogue::Unrestricted => {
                let mut rows = vec![Vec::new()];
                for ty in self.attribute_types_of(kind) {
                    let Some(ty) = ty else { return Vec::new() };
                    let mut next = Vec::with_capacity(rows.len() * ty.values.len());
                    for prefix in &rows {
                        for v in &ty.values {
                            let mut row = prefix.clone();
                            row.push(v.clone());
                            next.push(row);
                        }
                    }
                    rows = next;
                }
                rows.into_iter().map(CatalogueRow).collect()
            }
        }
    }

    /// Catalogue membership as a finite-set lookup.
    pub fn catalogue_contains(&self, kind: &ComponentKindDef, row: &CatalogueRow) -> bool {
        if row.0.len() != kind.attributes.len() {
            return false;
        }
        match &kind.catalogue {
            Catalogue::Rows(rows) => rows.contains(row),
            Catalogue::Unrestricted => self
                .attribute_types_of(kind)
                .iter()
                .zip(&row.0)
                .all(|(ty, v)| ty.is_some_and(|t| t.contains(v))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

/// A component that must be part of every configuration. `bindings` has one
/// entry per attribute; `None` leaves the position existentially open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiredAtom {
    pub kind: String,
    pub id: String,
    pub bindings: Vec<Option<Value>>,
}

/// A ground connection literal such as `ThingA2Bin(a1, b1)` or its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionLiteral {
    pub connection: String,
    pub left_id: String,
    pub right_id: String,
    pub polarity: Polarity,
}

/// Domain closure of an input kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDomain {
    pub kind: String,
    pub ids: Vec<String>,
}

impl InputDomain {
    /// Domain written with the count shorthand `input K = n`.
    pub fn counted(kind: &str, n: usize) -> Self {
        InputDomain { kind: kind.to_string(), ids: auto_ids(kind, n) }
    }

    /// True when the ids are exactly the auto-named `K_1..K_n`.
    pub fn is_counted(&self) -> bool {
        self.ids == auto_ids(&self.kind, self.ids.len())
    }
}

/// Ids `K_1..K_n` used by the count shorthand.
pub fn auto_ids(kind: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{kind}_{i}")).collect()
}

/// Instance knowledge of a configuration problem.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InstanceSpec {
    pub both_assignments: Vec<(String, EffectiveClass)>,
    pub input_domains: Vec<InputDomain>,
    pub required: Vec<RequiredAtom>,
    pub literals: Vec<ConnectionLiteral>,
}

impl InstanceSpec {
    pub fn domain(&self, kind: &str) -> Option<&InputDomain> {
        self.input_domains.iter().find(|d| d.kind == kind)
    }

    pub fn both_assignment(&self, kind: &str) -> Option<EffectiveClass> {
        self.both_assignments.iter().find(|(k, _)| k == kind).map(|(_, c)| *c)
    }

    pub fn is_empty(&self) -> bool {
        self.both_assignments.is_empty()
            && self.input_domains.is_empty()
            && self.required.is_empty()
            && self.literals.is_empty()
    }
}

/// Integer interval `[lb, ub]` on the number of components of a kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bound {
    pub lb: u64,
    pub ub: Limit,
}

impl Bound {
    pub const UNCONSTRAINED: Bound = Bound { lb: 0, ub: Limit::Unbounded };

    pub const fn new(lb: u64, ub: u64) -> Self {
        Bound { lb, ub: Limit::Finite(ub) }
    }

    pub const fn exactly(n: u64) -> Self {
        Bound::new(n, n)
    }

    pub const fn at_least(lb: u64) -> Self {
        Bound { lb, ub: Limit::Unbounded }
    }

    pub fn is_consistent(&self) -> bool {
        Limit::Finite(self.lb) <= self.ub
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lb && Limit::Finite(n) <= self.ub
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ub {
            Limit::Finite(ub) => write!(f, "[{}, {}]", self.lb, ub),
            Limit::Unbounded => write!(f, "[{}, unbounded]", self.lb),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentInstance {
    pub id: String,
    pub row: CatalogueRow,
}

/// A finite model: the components of each kind and the edges of each binary
/// connection. Unused names simply do not appear.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Configuration {
    pub instances: BTreeMap<String, Vec<ComponentInstance>>,
    pub edges: BTreeMap<String, Vec<(String, String)>>,
}

impl Configuration {
    pub fn count(&self, kind: &str) -> usize {
        self.instances.get(kind).map_or(0, Vec::len)
    }

    pub fn instance(&self, kind: &str, id: &str) -> Option<&ComponentInstance> {
        self.instances.get(kind)?.iter().find(|c| c.id == id)
    }
}
