//! JSON report assembly. Maps are `serde_json::Map`, which keeps keys sorted.

use cainfer::bitset::BitSet;
use cainfer::dag::{Dag, MarkovCheckResult, MarkovViolation, ModelCondition};
use cainfer::inference::{Conclusion, InferenceReport, MultiplicityResult};
use serde_json::{json, Map, Value};

pub struct Report {
    pub mode: String,
    pub quantities: Map<String, Value>,
    pub conclusions: Vec<Value>,
    pub slacks: Map<String, Value>,
    pub assumptions: Vec<String>,
    pub tolerance_bits: f64,
    pub seed: Option<u64>,
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn new(mode: &str, tolerance_bits: f64) -> Self {
        Self {
            mode: mode.to_owned(),
            quantities: Map::new(),
            conclusions: Vec::new(),
            slacks: Map::new(),
            assumptions: Vec::new(),
            tolerance_bits,
            seed: None,
            extra: Map::new(),
        }
    }

    pub fn quantity(&mut self, key: impl Into<String>, bits: f64) {
        self.quantities.insert(key.into(), json!(bits));
    }

    pub fn slack(&mut self, key: impl Into<String>, bits: f64) {
        self.slacks.insert(key.into(), json!(bits));
    }

    pub fn extra(&mut self, key: &str, v: Value) {
        self.extra.insert(key.to_owned(), v);
    }

    /// Copies an inference report's numbers and claims.
    pub fn absorb(&mut self, r: &InferenceReport) {
        for (k, v) in &r.quantities {
            self.quantity(k.clone(), *v);
        }
        for (k, v) in &r.slacks {
            self.slack(k.clone(), *v);
        }
        self.conclusions.extend(r.results.iter().map(conclusion_json));
        for a in &r.assumptions {
            if !self.assumptions.contains(a) {
                self.assumptions.push(a.clone());
            }
        }
        self.extra("criterion", json!(r.criterion));
        self.extra("decision_tolerance_bits", json!(r.decision_tol_bits));
        self.extra("n", json!(r.n));
    }

    pub fn into_value(self) -> Value {
        let mut m = self.extra;
        m.insert("mode".into(), json!(self.mode));
        m.insert("quantities".into(), Value::Object(self.quantities));
        m.insert("conclusions".into(), Value::Array(self.conclusions));
        m.insert("slacks".into(), Value::Object(self.slacks));
        m.insert("assumptions".into(), json!(self.assumptions));
        m.insert("tolerance_bits".into(), json!(self.tolerance_bits));
        m.insert("seed".into(), json!(self.seed));
        Value::Object(m)
    }
}

pub fn claim_json(c: &Conclusion) -> Map<String, Value> {
    let mut m = Map::new();
    match *c {
        Conclusion::CommonAncestorGe { k, unobserved } => {
            m.insert("claim".into(), json!("common_ancestor_ge"));
            m.insert("k".into(), json!(k));
            m.insert("unobserved".into(), json!(unobserved));
        }
        Conclusion::NoConclusion => {
            m.insert("claim".into(), json!("no_conclusion"));
        }
    }
    m
}

pub fn conclusion_json(r: &MultiplicityResult) -> Value {
    let mut m = claim_json(&r.conclusion);
    m.insert("c".into(), json!(r.c));
    m.insert("criterion_bits".into(), json!(r.criterion_bits));
    m.insert("bound_bits".into(), json!(r.bound_bits));
    Value::Object(m)
}

pub fn is_positive(conclusion: &Value) -> bool {
    conclusion["claim"] == "common_ancestor_ge"
}

fn names(dag: &Dag, s: BitSet) -> Value {
    json!(s.iter().map(|v| dag.name(v)).collect::<Vec<_>>())
}

/// Markov check with node indices replaced by names.
pub fn markov_json(dag: &Dag, r: &MarkovCheckResult) -> Value {
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| match v {
            MarkovViolation::Local { node, cmi_bits } => json!({
                "kind": "local",
                "node": dag.name(*node),
                "cmi_bits": cmi_bits,
            }),
            MarkovViolation::Global { a, b, c, cmi_bits } => json!({
                "kind": "global",
                "a": names(dag, *a),
                "b": names(dag, *b),
                "c": names(dag, *c),
                "cmi_bits": cmi_bits,
            }),
            MarkovViolation::Model {
                condition,
                subject,
                magnitude_bits,
            } => {
                // Leaf violations name nodes and count edges; the rest name
                // 1-based groups.
                if *condition == ModelCondition::LeafReference {
                    json!({
                        "kind": "model",
                        "condition": condition,
                        "subject": names(dag, *subject),
                        "outgoing_edges": *magnitude_bits as usize,
                    })
                } else {
                    json!({
                        "kind": "model",
                        "condition": condition,
                        "subject": subject.iter().map(|i| i + 1).collect::<Vec<_>>(),
                        "magnitude_bits": magnitude_bits,
                    })
                }
            }
        })
        .collect();
    json!({
        "holds": r.holds,
        "violations": violations,
        "not_applicable": r.not_applicable,
        "worst_bits": r.worst_bits(),
    })
}
