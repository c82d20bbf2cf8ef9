//! Validator for the output documents.
//!
//! Shape is enforced by deserializing into the document types, which reject
//! unknown and missing fields. The checks below cover what the types cannot
//! express.

use std::collections::BTreeSet;

use crate::document::{BoundsReport, SolutionDocument, VerdictDoc};

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("malformed document: {0}")]
    Shape(#[from] serde_json::Error),
    #[error("spec_hash must be 64 lowercase hex digits")]
    Hash,
    #[error("bounds of `{0}` are inverted")]
    Inverted(String),
    #[error("kind `{0}` is listed twice")]
    DuplicateKind(String),
    #[error("unknown class `{class}` for `{kind}`")]
    Class { kind: String, class: String },
    #[error("{0}")]
    Verdict(&'static str),
    #[error("configuration {index}: {message}")]
    Configuration { index: usize, message: String },
}

fn check_hash(hash: &str) -> Result<(), SchemaError> {
    if hash.len() == 64 && hash.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        Ok(())
    } else {
        Err(SchemaError::Hash)
    }
}

fn check_bounds<'a>(entries: impl Iterator<Item = (&'a str, u64, Option<u64>)>) -> Result<(), SchemaError> {
    let mut seen = BTreeSet::new();
    for (kind, lb, ub) in entries {
        if !seen.insert(kind) {
            return Err(SchemaError::DuplicateKind(kind.into()));
        }
        if ub.is_some_and(|ub| lb > ub) {
            return Err(SchemaError::Inverted(kind.into()));
        }
    }
    Ok(())
}

pub fn validate_report(text: &str) -> Result<BoundsReport, SchemaError> {
    let report: BoundsReport = serde_json::from_str(text)?;
    check_hash(&report.spec_hash)?;
    check_bounds(report.bounds.iter().map(|e| (e.kind.as_str(), e.lb, e.ub)))?;
    for e in &report.bounds {
        if e.class != "input" && e.class != "generated" {
            return Err(SchemaError::Class { kind: e.kind.clone(), class: e.class.clone() });
        }
    }
    match (&report.verdict, &report.certificate) {
        (VerdictDoc::Accept, None) => {}
        (VerdictDoc::Reject, Some(c)) if c.lb > c.ub && report.bounds.is_empty() => {}
        (VerdictDoc::Accept, Some(_)) => return Err(SchemaError::Verdict("an accepted report carries no certificate")),
        (VerdictDoc::Reject, _) => {
            return Err(SchemaError::Verdict("a rejected report needs a certificate with lb > ub and no bounds"))
        }
    }
    Ok(report)
}

pub fn validate_solution(text: &str) -> Result<SolutionDocument, SchemaError> {
    let doc: SolutionDocument = serde_json::from_str(text)?;
    check_hash(&doc.spec_hash)?;
    check_bounds(doc.bounds.iter().map(|e| (e.kind.as_str(), e.lb, e.ub)))?;
    for (index, config) in doc.configurations.iter().enumerate() {
        let err = |message: String| SchemaError::Configuration { index, message };
        let mut ids = BTreeSet::new();
        for (kind, comps) in &config.instances {
            let mut own = BTreeSet::new();
            for c in comps {
                ids.insert(c.id.as_str());
                if !own.insert(c.id.as_str()) {
                    return Err(err(format!("id `{}` of `{kind}` is used twice", c.id)));
                }
            }
        }
        for (conn, edges) in &config.edges {
            let mut seen = BTreeSet::new();
            for [l, r] in edges {
                if !ids.contains(l.as_str()) || !ids.contains(r.as_str()) {
                    return Err(err(format!("edge {conn}({l}, {r}) names an unknown component")));
                }
                if !seen.insert((l, r)) {
                    return Err(err(format!("edge {conn}({l}, {r}) is listed twice")));
                }
            }
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HASH: &str = "0123456789abcdef0123456789abcdef0123456789abcdef0123456789abcdef";

    fn solution(body: &str) -> String {
        format!(r#"{{"spec_hash":"{HASH}","bounds":[{{"kind":"Bin","lb":1,"ub":2}}],"configurations":[{body}]}}"#)
    }

    #[test]
    fn accepts_a_minimal_solution() {
        let ok = solution(r#"{"instances":{"Bin":[{"id":"b","attrs":{}}],"T":[{"id":"t","attrs":{"size":1}}]},"edges":{"T2Bin":[["t","b"]]}}"#);
        assert!(validate_solution(&ok).is_ok());
    }

    #[test]
    fn rejects_unknown_fields_and_dangling_edges() {
        let extra = solution(r#"{"instances":{},"edges":{},"extra":1}"#);
        assert!(matches!(validate_solution(&extra), Err(SchemaError::Shape(_))));
        let dangling = solution(r#"{"instances":{},"edges":{"T2Bin":[["t","b"]]}}"#);
        assert!(matches!(validate_solution(&dangling), Err(SchemaError::Configuration { .. })));
        let bad_hash = r#"{"spec_hash":"xyz","bounds":[],"configurations":[]}"#;
        assert!(matches!(validate_solution(bad_hash), Err(SchemaError::Hash)));
    }

    #[test]
    fn report_verdicts() {
        let accept = format!(r#"{{"spec_hash":"{HASH}","verdict":"accept","bounds":[{{"kind":"Bin","class":"generated","lb":10,"ub":40}}]}}"#);
        assert!(validate_report(&accept).is_ok());
        let inverted = accept.replace("\"lb\":10", "\"lb\":41");
        assert!(matches!(validate_report(&inverted), Err(SchemaError::Inverted(_))));
        let reject = format!(
            r#"{{"spec_hash":"{HASH}","verdict":"reject","bounds":[],"certificate":{{"kind":"C2","lb":5,"ub":4,"provenance":[]}}}}"#
        );
        assert!(validate_report(&reject).is_ok());
        assert!(validate_report(&reject.replace("\"lb\":5", "\"lb\":3")).is_err());
    }
}
