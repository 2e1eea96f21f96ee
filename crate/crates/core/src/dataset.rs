//! Categorical datasets in clausal form, their validation, and the
//! transaction view used by pattern mining.
//!
//! A dataset file is a sequence of `attribute/2` and `instance/3` clauses:
//!
//! ```text
//! attribute( fever, [yes, no]).
//! attribute( class, [yes, no]).
//! instance(1, class=no, [fever=yes]).
//! ```
//!
//! Attribute declaration order is significant: the tree builder breaks ties
//! between equally good attributes by taking the one declared first.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::lexer::{is_atom, Cursor, Tok};

pub const CLASS_ATTRIBUTE: &str = "class";

/// Binary class label. `Yes` marks a positive case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Yes,
    No,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Yes => "yes",
            ClassLabel::No => "no",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "yes" => Ok(ClassLabel::Yes),
            "no" => Ok(ClassLabel::No),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub values: Vec<String>,
}

impl AttributeSchema {
    pub fn new<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self { name: name.into(), values: values.into_iter().map(Into::into).collect() }
    }

    pub fn class() -> Self {
        Self::new(CLASS_ATTRIBUTE, ["yes", "no"])
    }

    pub fn contains(&self, value: &str) -> bool {
        self.values.iter().any(|v| v == value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: u32,
    pub class_label: ClassLabel,
    pub assignments: BTreeMap<String, String>,
}

impl Instance {
    pub fn value(&self, attribute: &str) -> Option<&str> {
        if attribute == CLASS_ATTRIBUTE {
            return Some(self.class_label.as_str());
        }
        self.assignments.get(attribute).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    /// Non-class attributes in declaration order.
    pub schemas: Vec<AttributeSchema>,
    pub class_schema: AttributeSchema,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn schema(&self, name: &str) -> Option<&AttributeSchema> {
        if name == CLASS_ATTRIBUTE {
            return Some(&self.class_schema);
        }
        self.schemas.iter().find(|s| s.name == name)
    }

    /// All schemas including the class attribute, which comes last.
    pub fn all_schemas(&self) -> Vec<AttributeSchema> {
        let mut all = self.schemas.clone();
        all.push(self.class_schema.clone());
        all
    }

    pub fn instance(&self, id: u32) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.instances.iter().map(|i| i.id).collect()
    }

    pub fn positives(&self) -> Vec<u32> {
        self.ids_with(ClassLabel::Yes)
    }

    pub fn negatives(&self) -> Vec<u32> {
        self.ids_with(ClassLabel::No)
    }

    fn ids_with(&self, label: ClassLabel) -> Vec<u32> {
        self.instances.iter().filter(|i| i.class_label == label).map(|i| i.id).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }
}

impl fmt::Display for Dataset {
    /// Clausal text that parses back to an equal dataset.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.all_schemas() {
            writeln!(f, "attribute({}, [{}]).", s.name, s.values.join(", "))?;
        }
        for inst in &self.instances {
            let assigns: Vec<String> = self
                .schemas
                .iter()
                .filter_map(|s| inst.assignments.get(&s.name).map(|v| format!("{}={}", s.name, v)))
                .collect();
            writeln!(f, "instance({}, class={}, [{}]).", inst.id, inst.class_label, assigns.join(", "))?;
        }
        Ok(())
    }
}

/// One broken invariant found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyAttributeName,
    EmptyDomain(String),
    DuplicateDomainValue { attribute: String, value: String },
    DuplicateAttribute(String),
    InvalidClassSchema,
    ZeroInstanceId,
    DuplicateInstanceId(u32),
    MissingAssignment { instance: u32, attribute: String },
    UnknownAttribute { instance: u32, attribute: String },
    ValueOutsideDomain { instance: u32, attribute: String, value: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyAttributeName => write!(f, "attribute with empty name"),
            EmptyDomain(a) => write!(f, "attribute `{a}` has an empty domain"),
            DuplicateDomainValue { attribute, value } => {
                write!(f, "attribute `{attribute}` lists value `{value}` twice")
            }
            DuplicateAttribute(a) => write!(f, "attribute `{a}` declared twice"),
            InvalidClassSchema => write!(f, "class attribute must be `class` with domain [yes, no]"),
            ZeroInstanceId => write!(f, "instance id 0 is not positive"),
            DuplicateInstanceId(id) => write!(f, "instance id {id} used more than once"),
            MissingAssignment { instance, attribute } => {
                write!(f, "instance {instance} does not assign `{attribute}`")
            }
            UnknownAttribute { instance, attribute } => {
                write!(f, "instance {instance} assigns undeclared attribute `{attribute}`")
            }
            ValueOutsideDomain { instance, attribute, value } => {
                write!(f, "instance {instance}: `{value}` is not a value of `{attribute}`")
            }
        }
    }
}

/// Lists every invariant violation; an empty report means the dataset is valid.
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut report = Vec::new();

    if d.class_schema != AttributeSchema::class() {
        report.push(Violation::InvalidClassSchema);
    }
    let mut names = HashSet::new();
    for s in &d.schemas {
        if s.name.is_empty() {
            report.push(Violation::EmptyAttributeName);
        }
        if s.name == CLASS_ATTRIBUTE || !names.insert(s.name.as_str()) {
            report.push(Violation::DuplicateAttribute(s.name.clone()));
        }
        if s.values.is_empty() {
            report.push(Violation::EmptyDomain(s.name.clone()));
        }
        let mut seen = HashSet::new();
        for v in &s.values {
            if !seen.insert(v.as_str()) {
                report.push(Violation::DuplicateDomainValue { attribute: s.name.clone(), value: v.clone() });
            }
        }
    }

    let mut ids = HashSet::new();
    for inst in &d.instances {
        if inst.id == 0 {
            report.push(Violation::ZeroInstanceId);
        }
        if !ids.insert(inst.id) {
            report.push(Violation::DuplicateInstanceId(inst.id));
        }
        for s in &d.schemas {
            match inst.assignments.get(&s.name) {
                None => report.push(Violation::MissingAssignment { instance: inst.id, attribute: s.name.clone() }),
                Some(v) if !s.contains(v) => report.push(Violation::ValueOutsideDomain {
                    instance: inst.id,
                    attribute: s.name.clone(),
                    value: v.clone(),
                }),
                Some(_) => {}
            }
        }
        for attr in inst.assignments.keys() {
            if !d.schemas.iter().any(|s| &s.name == attr) {
                report.push(Violation::UnknownAttribute { instance: inst.id, attribute: attr.clone() });
            }
        }
    }
    report
}

pub(crate) fn ensure_valid(d: &Dataset) -> Result<()> {
    let report = validate_dataset(d);
    if report.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidDataset(report))
    }
}

struct RawInstance {
    id: u32,
    class: String,
    assigns: Vec<(String, String, (usize, usize))>,
    at: (usize, usize),
}

/// Parses clausal dataset text.
///
/// Errors carry the line and column of the offending token. Attribute and
/// instance clauses may appear in any order.
pub fn parse_dataset(text: &str) -> Result<Dataset, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut schemas: Vec<(AttributeSchema, (usize, usize))> = Vec::new();
    let mut raw = Vec::new();

    while !cur.at_end() {
        let at = cur.here();
        let head = cur.name()?;
        match head.as_str() {
            "attribute" => {
                cur.expect(Tok::LParen)?;
                let name_at = cur.here();
                let name = cur.name()?;
                cur.expect(Tok::Comma)?;
                cur.expect(Tok::LBracket)?;
                let mut values = vec![cur.name()?];
                while cur.eat(&Tok::Comma) {
                    let v_at = cur.here();
                    let v = cur.name()?;
                    if values.contains(&v) {
                        return Err(ParseError::new(
                            v_at.0,
                            v_at.1,
                            ParseErrorKind::InvalidSchema(format!("value `{v}` repeated in `{name}`")),
                        ));
                    }
                    values.push(v);
                }
                cur.expect(Tok::RBracket)?;
                cur.expect(Tok::RParen)?;
                cur.expect(Tok::Dot)?;
                if schemas.iter().any(|(s, _)| s.name == name) {
                    return Err(ParseError::new(name_at.0, name_at.1, ParseErrorKind::DuplicateAttribute(name)));
                }
                schemas.push((AttributeSchema { name, values }, name_at));
            }
            "instance" => {
                cur.expect(Tok::LParen)?;
                let id_at = cur.here();
                let id: u32 = cur.number()?.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                    ParseError::new(
                        id_at.0,
                        id_at.1,
                        ParseErrorKind::Syntax("instance id must be a positive integer".into()),
                    )
                })?;
                cur.expect(Tok::Comma)?;
                cur.keyword(CLASS_ATTRIBUTE)?;
                cur.expect(Tok::Eq)?;
                let class_at = cur.here();
                let class = cur.name()?;
                cur.expect(Tok::Comma)?;
                cur.expect(Tok::LBracket)?;
                let mut assigns = Vec::new();
                loop {
                    let a_at = cur.here();
                    let attr = cur.name()?;
                    cur.expect(Tok::Eq)?;
                    let value = cur.name()?;
                    assigns.push((attr, value, a_at));
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                cur.expect(Tok::RBracket)?;
                cur.expect(Tok::RParen)?;
                cur.expect(Tok::Dot)?;
                if raw.iter().any(|r: &RawInstance| r.id == id) {
                    return Err(ParseError::new(id_at.0, id_at.1, ParseErrorKind::DuplicateInstance(id)));
                }
                raw.push(RawInstance { id, class, assigns, at: class_at });
            }
            other => {
                return Err(ParseError::new(
                    at.0,
                    at.1,
                    ParseErrorKind::Syntax(format!("unknown clause `{other}`; expected attribute or instance")),
                ))
            }
        }
    }

    let class_pos = schemas.iter().position(|(s, _)| s.name == CLASS_ATTRIBUTE);
    let class_schema = match class_pos {
        Some(i) => {
            let (s, at) = schemas.remove(i);
            if s != AttributeSchema::class() {
                return Err(ParseError::new(at.0, at.1, ParseErrorKind::InvalidClassDomain));
            }
            s
        }
        None => return Err(cur.error(ParseErrorKind::MissingClassAttribute)),
    };
    let schemas: Vec<AttributeSchema> = schemas.into_iter().map(|(s, _)| s).collect();
    let by_name: HashMap<&str, &AttributeSchema> = schemas.iter().map(|s| (s.name.as_str(), s)).collect();

    let mut instances = Vec::with_capacity(raw.len());
    for r in raw {
        let class_label = r.class.parse::<ClassLabel>().map_err(|value| {
            ParseError::new(
                r.at.0,
                r.at.1,
                ParseErrorKind::ValueOutsideDomain { attribute: CLASS_ATTRIBUTE.into(), value },
            )
        })?;
        let mut assignments = BTreeMap::new();
        for (attr, value, at) in r.assigns {
            let Some(schema) = by_name.get(attr.as_str()) else {
                return Err(ParseError::new(at.0, at.1, ParseErrorKind::UnknownAttribute(attr)));
            };
            if !schema.contains(&value) {
                return Err(ParseError::new(at.0, at.1, ParseErrorKind::ValueOutsideDomain { attribute: attr, value }));
            }
            if assignments.insert(attr.clone(), value).is_some() {
                return Err(ParseError::new(
                    at.0,
                    at.1,
                    ParseErrorKind::DuplicateAssignment { instance: r.id, attribute: attr },
                ));
            }
        }
        if let Some(missing) = schemas.iter().find(|s| !assignments.contains_key(&s.name)) {
            return Err(ParseError::new(
                r.at.0,
                r.at.1,
                ParseErrorKind::MissingAssignment { instance: r.id, attribute: missing.name.clone() },
            ));
        }
        instances.push(Instance { id: r.id, class_label, assignments });
    }

    Ok(Dataset { schemas, class_schema, instances })
}

/// An `attribute=value` pair. Ordered by attribute name, then value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Item {
    pub attribute: String,
    pub value: String,
}

impl Item {
    pub fn new(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Self { attribute: attribute.into(), value: value.into() }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.value)
    }
}

impl FromStr for Item {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (a, v) = s.split_once('=').ok_or_else(|| format!("`{s}` is not of the form attr=value"))?;
        let (a, v) = (a.trim(), v.trim());
        if !is_atom(a) || !is_atom(v) {
            return Err(format!("`{s}` is not of the form attr=value"));
        }
        Ok(Item::new(a, v))
    }
}

impl From<Item> for String {
    fn from(item: Item) -> Self {
        item.to_string()
    }
}

impl TryFrom<String> for Item {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

pub type Transaction = BTreeSet<Item>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransactionDb {
    transactions: Vec<Transaction>,
}

impl TransactionDb {
    pub fn new(transactions: Vec<Transaction>) -> Self {
        Self { transactions }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transaction> {
        self.transactions.iter()
    }

    /// Distinct items occurring in at least one transaction, in canonical order.
    pub fn item_universe(&self) -> Vec<Item> {
        let all: BTreeSet<&Item> = self.transactions.iter().flatten().collect();
        all.into_iter().cloned().collect()
    }
}

impl<'a> IntoIterator for &'a TransactionDb {
    type Item = &'a Transaction;
    type IntoIter = std::slice::Iter<'a, Transaction>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// One transaction per instance, ordered by instance id, each holding every
/// attribute assignment plus the class item.
pub fn to_transactions(d: &Dataset) -> Result<TransactionDb> {
    ensure_valid(d)?;
    let mut instances: Vec<&Instance> = d.instances.iter().collect();
    instances.sort_by_key(|i| i.id);
    let transactions = instances
        .into_iter()
        .map(|inst| {
            inst.assignments
                .iter()
                .map(|(a, v)| Item::new(a.clone(), v.clone()))
                .chain(std::iter::once(Item::new(CLASS_ATTRIBUTE, inst.class_label.as_str())))
                .collect()
        })
        .collect();
    Ok(TransactionDb::new(transactions))
}
