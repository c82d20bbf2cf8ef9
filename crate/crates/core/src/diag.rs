//! Diagnostics shared by the parser, the structural checks and the validator.

use alloc::string::String;
use core::fmt;

use crate::model::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        }
    }
}

/// The closed set of diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    // lexing and parsing
    LexError,
    Syntax,
    SyntaxEmpty,
    UnresolvedRef,
    DuplicateName,
    // structural well-formedness
    CardOrder,
    CardZeroUpper,
    CardUnbounded,
    SelfLoopDirections,
    MissingDirection,
    DuplicateConnection,
    OtmMissingBinary,
    OtmSelf,
    OtmLower,
    OtmRights,
    EmptyType,
    DuplicateValue,
    DuplicateAttribute,
    CatalogueArity,
    CatalogueValue,
    DuplicateRow,
    EmptyCatalogue,
    NoInputKind,
    ExprAggregate,
    ExprType,
    // admissibility and instance knowledge
    MissingBothAssignment,
    ZeroLbRule,
    Unleveled,
    NoInput,
    LiteralConflict,
    UnknownRef,
    MissingDomain,
    DuplicateId,
    BadBinding,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::LexError => "LEX_ERROR",
            Code::Syntax => "SYNTAX",
            Code::SyntaxEmpty => "SYNTAX_EMPTY",
            Code::UnresolvedRef => "UNRESOLVED_REF",
            Code::DuplicateName => "DUPLICATE_NAME",
            Code::CardOrder => "CARD_ORDER",
            Code::CardZeroUpper => "CARD_ZERO_UPPER",
            Code::CardUnbounded => "CARD_UNBOUNDED",
            Code::SelfLoopDirections => "SELF_LOOP_DIRECTIONS",
            Code::MissingDirection => "MISSING_DIRECTION",
            Code::DuplicateConnection => "DUPLICATE_CONNECTION",
            Code::OtmMissingBinary => "OTM_MISSING_BINARY",
            Code::OtmSelf => "OTM_SELF",
            Code::OtmLower => "OTM_LOWER",
            Code::OtmRights => "OTM_RIGHTS",
            Code::EmptyType => "EMPTY_TYPE",
            Code::DuplicateValue => "DUPLICATE_VALUE",
            Code::DuplicateAttribute => "DUPLICATE_ATTRIBUTE",
            Code::CatalogueArity => "CATALOGUE_ARITY",
            Code::CatalogueValue => "CATALOGUE_VALUE",
            Code::DuplicateRow => "DUPLICATE_ROW",
            Code::EmptyCatalogue => "EMPTY_CATALOGUE",
            Code::NoInputKind => "NO_INPUT_KIND",
            Code::ExprAggregate => "EXPR_AGGREGATE",
            Code::ExprType => "EXPR_TYPE",
            Code::MissingBothAssignment => "MISSING_BOTH_ASSIGNMENT",
            Code::ZeroLbRule => "ZERO_LB_RULE",
            Code::Unleveled => "UNLEVELED",
            Code::NoInput => "NO_INPUT",
            Code::LiteralConflict => "LITERAL_CONFLICT",
            Code::UnknownRef => "UNKNOWN_REF",
            Code::MissingDomain => "MISSING_DOMAIN",
            Code::DuplicateId => "DUPLICATE_ID",
            Code::BadBinding => "BAD_BINDING",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Location of a diagnostic in a source file. Line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// The spec entity a diagnostic is about. The parser maps entities back to
/// the source spans of their declarations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entity {
    AttributeType(String),
    Kind(String),
    CatalogueRow { kind: String, row: usize },
    Connection(String),
    Cardinality { connection: String, direction: Direction },
    Constraint { connection: String, direction: Direction },
    OneToMany(String),
    Domain(String),
    BothAssignment(String),
    Required(usize),
    Literal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub entity: Option<Entity>,
    pub span: Option<SourceSpan>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: Code, entity: Option<Entity>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code, entity, span: None, message: message.into() }
    }

    pub fn at(code: Code, span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            entity: None,
            span: Some(span),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Renders `SEVERITY CODE file:line:col message`.
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.severity.as_str(), self.code)?;
        match &self.span {
            Some(span) => write!(f, "{span} ")?,
            None => f.write_str("-:0:0 ")?,
        }
        f.write_str(&self.message)
    }
}
