//! Knowledge-base text (`.knb`) for the consultation shell.
//!
//! ```text
//! top_goal(X,V) :- type(X,V).
//!
//! type(no,0.5):-fever(yes). % generated rule
//! fever(X):-menuask(fever,X,[yes,no]).%generated menu
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSchema, ClassLabel, Item};
use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::id3::ClassificationRule;
use crate::lexer::{Cursor, Tok};

pub const GOAL_NAME: &str = "type";

/// Choice list offered when the shell asks for an attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Menu {
    pub attribute: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub rules: Vec<ClassificationRule>,
    pub menus: Vec<Menu>,
    pub goal_name: String,
}

impl KnowledgeBase {
    /// Pairs extracted rules with one menu per schema, in schema order.
    pub fn new(rules: Vec<ClassificationRule>, schemas: &[AttributeSchema]) -> Result<Self> {
        let menus = schemas.iter().map(|s| Menu { attribute: s.name.clone(), values: s.values.clone() }).collect();
        let kb = Self { rules, menus, goal_name: GOAL_NAME.to_string() };
        kb.validate()?;
        Ok(kb)
    }

    pub fn menu(&self, attribute: &str) -> Option<&Menu> {
        self.menus.iter().find(|m| m.attribute == attribute)
    }

    /// Checks that every rule condition names a menu attribute and one of
    /// its values, and that probabilities lie in (0, 1].
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for m in &self.menus {
            if !seen.insert(m.attribute.as_str()) {
                return Err(Error::InvalidKnowledgeBase(format!("duplicate menu for `{}`", m.attribute)));
            }
        }
        for rule in &self.rules {
            if !(rule.probability > 0.0 && rule.probability <= 1.0) {
                return Err(Error::InvalidKnowledgeBase(format!("probability {} is outside (0, 1]", rule.probability)));
            }
            let mut attrs = HashSet::new();
            for cond in &rule.antecedent {
                let menu = self.menu(&cond.attribute).ok_or_else(|| {
                    Error::InvalidKnowledgeBase(format!("no menu for attribute `{}`", cond.attribute))
                })?;
                if !menu.values.contains(&cond.value) {
                    return Err(Error::InvalidKnowledgeBase(format!(
                        "`{}` is not on the menu for `{}`",
                        cond.value, cond.attribute
                    )));
                }
                if !attrs.insert(cond.attribute.as_str()) {
                    return Err(Error::InvalidKnowledgeBase(format!("rule tests `{}` more than once", cond.attribute)));
                }
            }
        }
        Ok(())
    }

    pub fn to_knb(&self) -> String {
        let mut out = String::new();
        out.push_str("% knowledge base\n");
        out.push_str("% for expert shell. --- written by ruleforge\n");
        out.push_str("% top_goal where the inference starts.\n\n");
        let _ = writeln!(out, "top_goal(X,V) :- {}(X,V).\n", self.goal_name);
        for rule in &self.rules {
            let conds: Vec<String> = if rule.antecedent.is_empty() {
                vec!["true".to_string()]
            } else {
                rule.antecedent.iter().map(|c| format!("{}({})", c.attribute, c.value)).collect()
            };
            let _ = writeln!(
                out,
                "{}({},{}):-{}. % generated rule",
                self.goal_name,
                rule.consequent,
                rule.probability,
                conds.join(",")
            );
        }
        out.push('\n');
        for m in &self.menus {
            let _ = writeln!(out, "{a}(X):-menuask({a},X,[{}]).%generated menu", m.values.join(","), a = m.attribute);
        }
        out.push_str("\n%end of automatic post process\n");
        out
    }
}

/// Renders rules and one menu per schema as `.knb` text.
pub fn emit_knb(rules: &[ClassificationRule], schemas: &[AttributeSchema]) -> Result<String> {
    Ok(KnowledgeBase::new(rules.to_vec(), schemas)?.to_knb())
}

/// Reads `.knb` text. Rules keep file order.
pub fn parse_knb(text: &str) -> Result<KnowledgeBase, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut goal_name: Option<String> = None;
    let mut rules = Vec::new();
    let mut menus: Vec<Menu> = Vec::new();
    let mut pending_checks = Vec::new();

    while !cur.at_end() {
        let at = cur.here();
        let head = cur.name()?;
        cur.expect(Tok::LParen)?;

        if head == "top_goal" {
            let x = cur.ident()?;
            cur.expect(Tok::Comma)?;
            let v = cur.ident()?;
            cur.expect(Tok::RParen)?;
            cur.expect(Tok::Neck)?;
            let goal = cur.name()?;
            cur.expect(Tok::LParen)?;
            let (bx, bv) = (cur.ident()?, {
                cur.expect(Tok::Comma)?;
                cur.ident()?
            });
            cur.expect(Tok::RParen)?;
            cur.expect(Tok::Dot)?;
            if bx != x || bv != v {
                return Err(ParseError::new(
                    at.0,
                    at.1,
                    ParseErrorKind::Syntax("top_goal body must pass its arguments through".into()),
                ));
            }
            goal_name = Some(goal);
            continue;
        }

        // `attr(X):-menuask(attr,X,[...]).` has a variable as its only argument.
        let is_menu = matches!(cur.peek(), Some(t) if matches!(&t.tok, Tok::Ident(s) if !crate::lexer::is_atom(s)))
            && matches!(cur.peek_at(1), Some(t) if t.tok == Tok::RParen);
        if is_menu {
            let var = cur.ident()?;
            cur.expect(Tok::RParen)?;
            cur.expect(Tok::Neck)?;
            cur.keyword("menuask")?;
            cur.expect(Tok::LParen)?;
            let attr_at = cur.here();
            let attr = cur.name()?;
            cur.expect(Tok::Comma)?;
            let var2 = cur.ident()?;
            cur.expect(Tok::Comma)?;
            cur.expect(Tok::LBracket)?;
            let mut values = vec![cur.name()?];
            while cur.eat(&Tok::Comma) {
                values.push(cur.name()?);
            }
            cur.expect(Tok::RBracket)?;
            cur.expect(Tok::RParen)?;
            cur.expect(Tok::Dot)?;
            if attr != head || var != var2 {
                return Err(ParseError::new(
                    attr_at.0,
                    attr_at.1,
                    ParseErrorKind::Syntax(format!("menu for `{head}` must ask `{head}` into `{var}`")),
                ));
            }
            if menus.iter().any(|m| m.attribute == attr) {
                return Err(ParseError::new(at.0, at.1, ParseErrorKind::DuplicateMenu(attr)));
            }
            menus.push(Menu { attribute: attr, values });
            continue;
        }

        let expected_goal = goal_name.as_deref().unwrap_or(GOAL_NAME);
        if head != expected_goal {
            return Err(ParseError::new(
                at.0,
                at.1,
                ParseErrorKind::Syntax(format!("expected a `{expected_goal}` rule or a menu, found `{head}`")),
            ));
        }
        let class_at = cur.here();
        let class = cur.name()?;
        let consequent: ClassLabel =
            class.parse().map_err(|c| ParseError::new(class_at.0, class_at.1, ParseErrorKind::UnknownClass(c)))?;
        cur.expect(Tok::Comma)?;
        let prob_at = cur.here();
        let probability: f64 = cur.number()?.parse().map_err(|_| {
            ParseError::new(prob_at.0, prob_at.1, ParseErrorKind::Syntax("malformed probability".into()))
        })?;
        if !(probability > 0.0 && probability <= 1.0) {
            return Err(ParseError::new(prob_at.0, prob_at.1, ParseErrorKind::ProbabilityOutOfRange(probability)));
        }
        cur.expect(Tok::RParen)?;
        cur.expect(Tok::Neck)?;
        let mut antecedent = Vec::new();
        loop {
            let cond_at = cur.here();
            let attr = cur.name()?;
            if attr == "true" && antecedent.is_empty() && !matches!(cur.peek(), Some(t) if t.tok == Tok::LParen) {
                break;
            }
            cur.expect(Tok::LParen)?;
            let value = cur.name()?;
            cur.expect(Tok::RParen)?;
            pending_checks.push((attr.clone(), cond_at));
            antecedent.push(Item::new(attr, value));
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.expect(Tok::Dot)?;
        rules.push(ClassificationRule { consequent, probability, antecedent });
    }

    for (attr, at) in pending_checks {
        if !menus.iter().any(|m| m.attribute == attr) {
            return Err(ParseError::new(at.0, at.1, ParseErrorKind::MissingMenu(attr)));
        }
    }
    Ok(KnowledgeBase { rules, menus, goal_name: goal_name.unwrap_or_else(|| GOAL_NAME.to_string()) })
}
