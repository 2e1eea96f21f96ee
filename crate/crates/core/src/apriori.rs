//! Level-wise frequent pattern mining and association rules.
//!
//! Level 1 holds the frequent single items observed in the database. Each
//! further level is built from candidates formed out of the previous level
//! and kept when its support reaches `min_support_percent / 100 * |db|`.
//! Mining stops once a level holds at most one itemset or no candidates can
//! be formed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Item, TransactionDb};
use crate::error::{Error, Result};

/// A canonically sorted set of items and the number of cases containing it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Itemset {
    pub items: Vec<Item>,
    pub support: usize,
}

impl Itemset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", join_items(&self.items, " & "))
    }
}

fn join_items(items: &[Item], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

/// How candidates of length k are formed from the frequent (k-1)-itemsets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStrategy {
    /// Every pairwise union of previous itemsets that has length k.
    #[default]
    UnionCombine,
    /// Join on a shared (k-2)-prefix, then drop candidates with an
    /// infrequent (k-1)-subset.
    JoinPrune,
}

impl FromStr for CandidateStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "union-combine" => Ok(Self::UnionCombine),
            "join-prune" => Ok(Self::JoinPrune),
            other => Err(format!("unknown strategy `{other}` (expected union-combine or join-prune)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub min_support_percent: f64,
    pub min_confidence: f64,
    #[serde(default)]
    pub strategy: CandidateStrategy,
}

impl MiningConfig {
    pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;

    pub fn new(min_support_percent: f64) -> Result<Self> {
        let cfg = Self {
            min_support_percent,
            min_confidence: Self::DEFAULT_MIN_CONFIDENCE,
            strategy: CandidateStrategy::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_min_confidence(mut self, min_confidence: f64) -> Result<Self> {
        self.min_confidence = min_confidence;
        self.validate()?;
        Ok(self)
    }

    pub fn with_strategy(mut self, strategy: CandidateStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_support_percent > 0.0 && self.min_support_percent <= 100.0) {
            return Err(Error::InvalidConfig(format!(
                "minimum support {}% is outside (0, 100]",
                self.min_support_percent
            )));
        }
        if !(self.min_confidence > 0.0 && self.min_confidence <= 1.0) {
            return Err(Error::InvalidConfig(format!("minimum confidence {} is outside (0, 1]", self.min_confidence)));
        }
        Ok(())
    }

    /// Support count a pattern must reach, as a real number.
    pub fn threshold(&self, db_size: usize) -> f64 {
        self.min_support_percent / 100.0 * db_size as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequentPatternSet {
    /// Non-empty levels keyed by itemset length.
    pub levels: BTreeMap<usize, Vec<Itemset>>,
    pub db_size: usize,
}

impl FrequentPatternSet {
    pub fn iter(&self) -> impl Iterator<Item = &Itemset> {
        self.levels.values().flatten()
    }

    /// Itemsets of at least `min_length` items, shortest first.
    pub fn with_min_length(&self, min_length: usize) -> impl Iterator<Item = &Itemset> {
        self.levels.range(min_length..).flat_map(|(_, v)| v)
    }

    pub fn support_of(&self, items: &[Item]) -> Option<usize> {
        self.levels.get(&items.len())?.iter().find(|s| s.items == items).map(|s| s.support)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    pub antecedent: Vec<Item>,
    pub consequent: Vec<Item>,
    pub support: usize,
    pub confidence: f64,
}

impl fmt::Display for AssociationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} => {} (support {}, confidence {})",
            join_items(&self.antecedent, " & "),
            join_items(&self.consequent, " & "),
            self.support,
            self.confidence
        )
    }
}

/// Number of transactions containing every item of `pattern`.
pub fn support_count(pattern: &[Item], db: &TransactionDb) -> usize {
    db.iter().filter(|t| pattern.iter().all(|item| t.contains(item))).count()
}

/// All `k`-element sublists of `pool`, preserving pool order, without
/// duplicates. Empty when `k` exceeds the pool size.
pub fn all_combinations<T: Clone + PartialEq>(k: usize, pool: &[T]) -> Vec<Vec<T>> {
    fn go<T: Clone + PartialEq>(k: usize, pool: &[T], prefix: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if k == 0 {
            if !out.contains(prefix) {
                out.push(prefix.clone());
            }
            return;
        }
        for i in 0..pool.len() {
            if pool.len() - i < k {
                break;
            }
            prefix.push(pool[i].clone());
            go(k - 1, &pool[i + 1..], prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k <= pool.len() {
        go(k, pool, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn normalized(mut items: Vec<Item>) -> Vec<Item> {
    items.sort();
    items.dedup();
    items
}

/// Candidate `k`-itemsets from the frequent `(k-1)`-itemsets, sorted
/// canonically.
pub fn generate_candidates(k: usize, prev_large: &[Itemset], strategy: CandidateStrategy) -> Result<Vec<Vec<Item>>> {
    if k < 2 {
        return Err(Error::CandidateLength(k));
    }
    let prev: Vec<Vec<Item>> = prev_large.iter().map(|s| normalized(s.items.clone())).collect();
    let mut cands: Vec<Vec<Item>> = match strategy {
        CandidateStrategy::UnionCombine => all_combinations(2, &prev)
            .into_iter()
            .map(|pair| normalized(pair.concat()))
            .filter(|c| c.len() == k)
            .collect(),
        CandidateStrategy::JoinPrune => {
            let frequent: HashSet<&[Item]> = prev.iter().map(Vec::as_slice).collect();
            let mut out = Vec::new();
            for (i, a) in prev.iter().enumerate() {
                for b in &prev[i + 1..] {
                    if a.len() != k - 1 || b.len() != k - 1 || a[..k - 2] != b[..k - 2] {
                        continue;
                    }
                    let cand = normalized([a.as_slice(), b.as_slice()].concat());
                    if cand.len() != k {
                        continue;
                    }
                    let all_frequent = (0..k).all(|skip| {
                        let sub: Vec<Item> =
                            cand.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, it)| it.clone()).collect();
                        frequent.contains(sub.as_slice())
                    });
                    if all_frequent {
                        out.push(cand);
                    }
                }
            }
            out
        }
    };
    cands.sort();
    cands.dedup();
    Ok(cands)
}

/// Keeps candidates whose support reaches the configured threshold. A
/// candidate that occurs in no case is never kept.
pub fn filter_frequent(cands: &[Vec<Item>], db: &TransactionDb, cfg: &MiningConfig) -> Vec<Itemset> {
    let threshold = cfg.threshold(db.len());
    cands
        .iter()
        .filter_map(|c| {
            let support = support_count(c, db);
            (support >= 1 && support as f64 >= threshold).then(|| Itemset { items: c.clone(), support })
        })
        .collect()
}

pub fn mine_frequent(db: &TransactionDb, cfg: &MiningConfig) -> Result<FrequentPatternSet> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let singles: Vec<Vec<Item>> = db.item_universe().into_iter().map(|i| vec![i]).collect();
    let mut level = filter_frequent(&singles, db, cfg);
    let mut levels = BTreeMap::new();
    let mut k = 1;
    while !level.is_empty() {
        let stop = level.len() <= 1;
        levels.insert(k, level);
        if stop {
            break;
        }
        let cands = generate_candidates(k + 1, &levels[&k], cfg.strategy)?;
        if cands.is_empty() {
            break;
        }
        level = filter_frequent(&cands, db, cfg);
        k += 1;
    }
    Ok(FrequentPatternSet { levels, db_size: db.len() })
}

/// Rules `X => P \ X` for every stored pattern `P` of length two or more
/// and every non-empty proper subset `X`, kept when their confidence
/// reaches the configured minimum.
pub fn derive_rules(fps: &FrequentPatternSet, cfg: &MiningConfig) -> Vec<AssociationRule> {
    let lookup: HashMap<&[Item], usize> = fps.iter().map(|s| (s.items.as_slice(), s.support)).collect();
    let mut rules = Vec::new();
    for pattern in fps.with_min_length(2) {
        let mut antecedents: Vec<Vec<Item>> =
            (1..pattern.len()).flat_map(|n| all_combinations(n, &pattern.items)).collect();
        antecedents.sort();
        for ante in antecedents {
            let Some(&ante_support) = lookup.get(ante.as_slice()) else {
                continue;
            };
            let confidence = pattern.support as f64 / ante_support as f64;
            if confidence >= cfg.min_confidence {
                let consequent = pattern.items.iter().filter(|i| !ante.contains(i)).cloned().collect();
                rules.push(AssociationRule { antecedent: ante, consequent, support: pattern.support, confidence });
            }
        }
    }
    rules
}

/// JSON result document for a mining run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningReport {
    pub db_size: usize,
    pub min_support_percent: f64,
    pub levels: Vec<ReportLevel>,
    pub rules: Vec<AssociationRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportLevel {
    pub length: usize,
    pub itemsets: Vec<Itemset>,
}

impl MiningReport {
    pub fn new(fps: &FrequentPatternSet, rules: Vec<AssociationRule>, cfg: &MiningConfig) -> Self {
        Self {
            db_size: fps.db_size,
            min_support_percent: cfg.min_support_percent,
            levels: fps
                .levels
                .iter()
                .map(|(&length, itemsets)| ReportLevel { length, itemsets: itemsets.clone() })
                .collect(),
            rules,
        }
    }

    /// Mines `db` and derives rules in one step.
    pub fn run(db: &TransactionDb, cfg: &MiningConfig) -> Result<Self> {
        let fps = mine_frequent(db, cfg)?;
        let rules = derive_rules(&fps, cfg);
        Ok(Self::new(&fps, rules, cfg))
    }
}
