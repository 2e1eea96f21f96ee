//! Confirmed rules deployed as integrity checks over incoming records.
//!
//! Rule ids are positional: `A1, A2, ...` for association rules and
//! `C1, C2, ...` for classification rules, both 1-based in the order the
//! miner produced them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::apriori::AssociationRule;
use crate::dataset::{Item, CLASS_ATTRIBUTE};
use crate::error::{Error, Result};
use crate::id3::ClassificationRule;

pub fn association_rule_id(index: usize) -> String {
    format!("A{}", index + 1)
}

pub fn classification_rule_id(index: usize) -> String {
    format!("C{}", index + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TriggerSource {
    AssociationRule { rule: String, confidence: f64 },
    TreeRule { rule: String, probability: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerRule {
    pub id: String,
    pub antecedent: Vec<Item>,
    pub expected: Item,
    pub source: TriggerSource,
}

impl fmt::Display for TriggerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conds: Vec<String> = self.antecedent.iter().map(ToString::to_string).collect();
        write!(f, "{}: if {} then {}", self.id, conds.join(" & "), self.expected)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub trigger: String,
    pub record: String,
    pub message: String,
}

/// A candidate row: attribute name to value, class included.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub values: BTreeMap<String, String>,
}

impl Record {
    pub fn new(id: impl Into<String>, items: impl IntoIterator<Item = Item>) -> Self {
        Self { id: id.into(), values: items.into_iter().map(|i| (i.attribute, i.value)).collect() }
    }
}

/// One trigger per confirmed rule id.
///
/// Association rules compile only with confidence 1 and a single-item
/// consequent. A tree rule's weight is leaf coverage, not confidence, so
/// confirming one asserts that its leaf is pure. Rules with an empty
/// antecedent are refused.
pub fn compile_triggers(
    assoc: &[AssociationRule],
    class_rules: &[ClassificationRule],
    confirmed: &BTreeSet<String>,
) -> Result<Vec<TriggerRule>> {
    let mut triggers = Vec::new();
    for id in confirmed {
        let not_compilable = |reason: &str| Error::NotCompilable { id: id.clone(), reason: reason.to_string() };
        let index = |prefix: char| -> Option<usize> { id.strip_prefix(prefix)?.parse::<usize>().ok()?.checked_sub(1) };
        if let Some(rule) = index('A').and_then(|i| assoc.get(i)) {
            if rule.confidence < 1.0 {
                return Err(not_compilable(&format!("confidence {} is below 1", rule.confidence)));
            }
            let [expected] = rule.consequent.as_slice() else {
                return Err(not_compilable("consequent must be a single item"));
            };
            if rule.antecedent.is_empty() {
                return Err(not_compilable("antecedent is empty"));
            }
            triggers.push(TriggerRule {
                id: id.clone(),
                antecedent: rule.antecedent.clone(),
                expected: expected.clone(),
                source: TriggerSource::AssociationRule { rule: id.clone(), confidence: rule.confidence },
            });
        } else if let Some(rule) = index('C').and_then(|i| class_rules.get(i)) {
            if rule.antecedent.is_empty() {
                return Err(not_compilable("antecedent is empty"));
            }
            triggers.push(TriggerRule {
                id: id.clone(),
                antecedent: rule.antecedent.clone(),
                expected: Item::new(CLASS_ATTRIBUTE, rule.consequent.as_str()),
                source: TriggerSource::TreeRule { rule: id.clone(), probability: rule.probability },
            });
        } else {
            return Err(Error::UnknownRule(id.clone()));
        }
    }
    Ok(triggers)
}

/// Reports every trigger whose conditions all hold in `record` but whose
/// expected item does not. Triggers that mention an attribute the record
/// lacks are skipped.
pub fn check_record(record: &Record, triggers: &[TriggerRule]) -> Vec<ViolationReport> {
    let mut out = Vec::new();
    for t in triggers {
        let mentioned = t.antecedent.iter().chain(std::iter::once(&t.expected));
        if mentioned.clone().any(|i| !record.values.contains_key(&i.attribute)) {
            log::debug!("skipped trigger {} for record {}: missing attributes", t.id, record.id);
            continue;
        }
        let holds = |i: &Item| record.values.get(&i.attribute) == Some(&i.value);
        if t.antecedent.iter().all(holds) && !holds(&t.expected) {
            out.push(ViolationReport {
                trigger: t.id.clone(),
                record: record.id.clone(),
                message: format!(
                    "{} expects {} but record has {}={}",
                    t, t.expected, t.expected.attribute, record.values[&t.expected.attribute]
                ),
            });
        }
    }
    out
}

/// Reads records, one per non-blank line as comma-separated `attr=value`
/// pairs. Each record's id is its 1-based line number.
pub fn parse_records(text: &str) -> Result<Vec<Record>, String> {
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let items = line
            .split(',')
            .map(|p| p.trim().parse::<Item>().map_err(|e| format!("line {}: {e}", n + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(Record::new((n + 1).to_string(), items));
    }
    Ok(records)
}
