//! Interactive consultation over an ordered rule list.
//!
//! After every new fact the rules are scanned again from the first one. A
//! rule drops out once a known fact contradicts one of its conditions; the
//! first unknown condition of the earliest surviving rule becomes the next
//! question, and a rule whose conditions are all known to hold concludes the
//! session. Each attribute is asked at most once.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Item};
use crate::error::{Error, Result};
use crate::knowledge_base::KnowledgeBase;

/// Menu number that leaves the shell.
pub const EXIT_CODE: u32 = 99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    #[serde(rename = "class")]
    pub class_value: ClassLabel,
    pub probability: f64,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "The answer is __{}__ with probability {}", self.class_value, self.probability)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Status {
    AwaitingAnswer { attribute: String, menu: Vec<String> },
    Concluded(Conclusion),
    Failed,
    Aborted,
}

/// A reply to the current question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Value(String),
    Exit,
}

impl Answer {
    /// Maps a 1-based menu choice, or [`EXIT_CODE`], onto an answer.
    pub fn from_choice(choice: u32, menu: &[String]) -> Option<Self> {
        if choice == EXIT_CODE {
            return Some(Answer::Exit);
        }
        let idx = usize::try_from(choice).ok()?.checked_sub(1)?;
        menu.get(idx).map(|v| Answer::Value(v.clone()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub conclusion: Option<Conclusion>,
    /// Known facts, most recent first.
    pub known: Vec<Item>,
}

impl Explanation {
    pub fn known_list(&self) -> String {
        let facts: Vec<String> = self.known.iter().map(|i| format!("{}({})", i.attribute, i.value)).collect();
        format!("[{}]", facts.join(", "))
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.conclusion {
            Some(c) => writeln!(f, "The answer is __{}__ with probability = {}.", c.class_value, c.probability)?,
            None => writeln!(f, "No rule could be satisfied.")?,
        }
        writeln!(f, "The known storage are")?;
        write!(f, "{}", self.known_list())
    }
}

#[derive(Debug, Clone)]
pub struct ConsultationSession {
    kb: Arc<KnowledgeBase>,
    known: Vec<Item>,
    status: Status,
}

impl ConsultationSession {
    pub fn start(kb: impl Into<Arc<KnowledgeBase>>) -> Result<Self> {
        let kb = kb.into();
        kb.validate()?;
        let mut session = Self { kb, known: Vec::new(), status: Status::Failed };
        session.status = session.evaluate();
        Ok(session)
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    /// Known facts, most recent first.
    pub fn known(&self) -> &[Item] {
        &self.known
    }

    pub fn knowledge_base(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn is_finished(&self) -> bool {
        !matches!(self.status, Status::AwaitingAnswer { .. })
    }

    fn known_value(&self, attribute: &str) -> Option<&str> {
        self.known.iter().find(|i| i.attribute == attribute).map(|i| i.value.as_str())
    }

    fn evaluate(&self) -> Status {
        'rules: for rule in &self.kb.rules {
            let mut unknown = None;
            for cond in &rule.antecedent {
                match self.known_value(&cond.attribute) {
                    Some(v) if v == cond.value => {}
                    Some(_) => continue 'rules,
                    None => {
                        unknown.get_or_insert(cond);
                    }
                }
            }
            // A rule contradicted by any known fact is skipped even when an
            // earlier condition is still unknown.
            return match unknown {
                Some(cond) => Status::AwaitingAnswer {
                    attribute: cond.attribute.clone(),
                    menu: self.kb.menu(&cond.attribute).map(|m| m.values.clone()).unwrap_or_default(),
                },
                None => Status::Concluded(Conclusion { class_value: rule.consequent, probability: rule.probability }),
            };
        }
        Status::Failed
    }

    pub fn submit_answer(&mut self, attribute: &str, answer: Answer) -> Result<&Status> {
        let Status::AwaitingAnswer { attribute: asked, menu } = &self.status else {
            return Err(Error::NotAwaiting);
        };
        if asked != attribute {
            return Err(Error::NotAsked(attribute.to_string()));
        }
        match answer {
            Answer::Exit => self.status = Status::Aborted,
            Answer::Value(value) => {
                if !menu.contains(&value) {
                    return Err(Error::NotOnMenu { attribute: attribute.to_string(), value });
                }
                self.known.insert(0, Item::new(attribute, value));
                self.status = self.evaluate();
            }
        }
        Ok(&self.status)
    }

    pub fn conclusion(&self) -> Result<Conclusion> {
        match &self.status {
            Status::Concluded(c) => Ok(*c),
            _ => Err(Error::NoConclusion),
        }
    }

    pub fn explain(&self) -> Result<Explanation> {
        match &self.status {
            Status::Concluded(c) => Ok(Explanation { conclusion: Some(*c), known: self.known.clone() }),
            Status::Failed => Ok(Explanation { conclusion: None, known: self.known.clone() }),
            Status::AwaitingAnswer { .. } => Err(Error::StillAwaiting),
            Status::Aborted => Err(Error::Aborted),
        }
    }
}
