//! Machine-readable output documents.
//!
//! Both documents are JSON. Maps are ordered, so identical inputs give
//! byte-identical output.

use std::collections::BTreeMap;

use loco_core::{
    serialize, Bound, BoundsMap, Configuration, InstanceSpec, Limit, ProblemSpec, RejectCertificate, Value,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the canonical text of a spec.
pub fn spec_hash(problem: &ProblemSpec, instance: &InstanceSpec) -> String {
    let digest = Sha256::digest(serialize(problem, instance).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn upper(limit: Limit) -> Option<u64> {
    limit.finite()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundEntry {
    pub kind: String,
    pub lb: u64,
    /// `null` when unbounded.
    pub ub: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportEntry {
    pub kind: String,
    pub class: String,
    pub lb: u64,
    pub ub: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundDoc {
    pub lb: u64,
    pub ub: Option<u64>,
}

impl From<Bound> for BoundDoc {
    fn from(b: Bound) -> Self {
        BoundDoc { lb: b.lb, ub: upper(b.ub) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub connection: String,
    pub target: String,
    pub contributed: BoundDoc,
    pub result: BoundDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub kind: String,
    pub lb: u64,
    pub ub: u64,
    pub provenance: Vec<StepDoc>,
}

impl From<&RejectCertificate> for CertificateDoc {
    fn from(c: &RejectCertificate) -> Self {
        CertificateDoc {
            kind: c.kind.clone(),
            lb: c.lb,
            ub: c.ub,
            provenance: c
                .provenance
                .iter()
                .map(|s| StepDoc {
                    connection: s.connection.clone(),
                    target: s.target.clone(),
                    contributed: s.contributed.into(),
                    result: s.result.into(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictDoc {
    Accept,
    Reject,
}

/// Output of `bounds --format report`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsReport {
    pub spec_hash: String,
    pub verdict: VerdictDoc,
    pub bounds: Vec<ReportEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
}

impl BoundsReport {
    pub fn accepted(spec_hash: String, bounds: &BoundsMap) -> Self {
        let bounds = bounds
            .iter()
            .map(|e| ReportEntry {
                kind: e.kind.clone(),
                class: e.class.as_str().to_string(),
                lb: e.bound.lb,
                ub: upper(e.bound.ub),
            })
            .collect();
        BoundsReport { spec_hash, verdict: VerdictDoc::Accept, bounds, certificate: None }
    }

    pub fn rejected(spec_hash: String, certificate: &RejectCertificate) -> Self {
        BoundsReport {
            spec_hash,
            verdict: VerdictDoc::Reject,
            bounds: Vec::new(),
            certificate: Some(certificate.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Int(i64),
    Sym(String),
}

impl From<&Value> for AttrValue {
    fn from(v: &Value) -> Self {
        match v {
            Value::Int(i) => AttrValue::Int(*i),
            Value::Sym(s) => AttrValue::Sym(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub id: String,
    pub attrs: BTreeMap<String, AttrValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationDoc {
    pub instances: BTreeMap<String, Vec<InstanceDoc>>,
    pub edges: BTreeMap<String, Vec<[String; 2]>>,
}

impl ConfigurationDoc {
    pub fn new(problem: &ProblemSpec, config: &Configuration) -> Self {
        let mut instances = BTreeMap::new();
        for (kind, comps) in &config.instances {
            let attrs = problem.kind(kind).map(|k| k.attributes.as_slice()).unwrap_or_default();
            let docs = comps
                .iter()
                .map(|c| InstanceDoc {
                    id: c.id.clone(),
                    attrs: attrs.iter().zip(&c.row.0).map(|(a, v)| (a.name.clone(), v.into())).collect(),
                })
                .collect();
            instances.insert(kind.clone(), docs);
        }
        let edges = config
            .edges
            .iter()
            .map(|(conn, es)| (conn.clone(), es.iter().map(|(l, r)| [l.clone(), r.clone()]).collect()))
            .collect();
        ConfigurationDoc { instances, edges }
    }
}

/// Output of `solve`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub spec_hash: String,
    pub bounds: Vec<BoundEntry>,
    pub configurations: Vec<ConfigurationDoc>,
}

impl SolutionDocument {
    pub fn new(spec_hash: String, problem: &ProblemSpec, bounds: &BoundsMap, configs: &[Configuration]) -> Self {
        SolutionDocument {
            spec_hash,
            bounds: bounds
                .iter()
                .map(|e| BoundEntry { kind: e.kind.clone(), lb: e.bound.lb, ub: upper(e.bound.ub) })
                .collect(),
            configurations: configs.iter().map(|c| ConfigurationDoc::new(problem, c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use loco_core::parse;
    use loco_core::testkit::BIN_PACKING;

    #[test]
    fn hash_is_stable_under_formatting() {
        let a = parse(BIN_PACKING).unwrap();
        let b = parse(&BIN_PACKING.replace("  ", " ").replace('\n', "\n\n")).unwrap();
        let h = spec_hash(&a.problem, &a.instance);
        assert_eq!(h.len(), 64);
        assert_eq!(h, spec_hash(&b.problem, &b.instance));
    }

    #[test]
    fn attribute_values_keep_their_type() {
        let json = serde_json::to_string(&[AttrValue::Int(3), AttrValue::Sym("red".into())]).unwrap();
        assert_eq!(json, r#"[3,"red"]"#);
    }
}
