//! ID3 tree induction over binary-class categorical data, and extraction of
//! weighted classification rules from the induced tree.
//!
//! Nodes are numbered in creation order during a depth-first expansion: each
//! child is expanded completely before its next sibling is created. Node 0 is
//! virtual; the single root edge `0 -> 1` carries every training instance.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{ensure_valid, ClassLabel, Dataset, Item};
use crate::entropy::count_info;
use crate::error::{Error, Result};

/// Weighted info assigned to a split with an empty value group under
/// [`EmptyBranchPolicy::Disqualify`].
pub const DISQUALIFIED_INFO: f64 = 999.0;

/// How a value group with no instances contributes to a split's weighted info.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EmptyBranchPolicy {
    /// The group's weight is zero, so it contributes nothing.
    #[default]
    Vanish,
    /// Any empty group scores the whole split as [`DISQUALIFIED_INFO`].
    Disqualify,
}

impl FromStr for EmptyBranchPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vanish" => Ok(Self::Vanish),
            "disqualify" => Ok(Self::Disqualify),
            other => Err(format!("unknown empty-branch policy `{other}` (expected vanish or disqualify)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: u32,
    #[serde(rename = "pos")]
    pub positives: Vec<u32>,
    #[serde(rename = "neg")]
    pub negatives: Vec<u32>,
}

impl TreeNode {
    pub fn size(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_pure(&self) -> bool {
        self.positives.is_empty() || self.negatives.is_empty()
    }

    /// Majority class; an even split resolves to `no`.
    pub fn majority(&self) -> ClassLabel {
        if self.positives.len() > self.negatives.len() {
            ClassLabel::Yes
        } else {
            ClassLabel::No
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EdgeTest {
    Root,
    Split(Item),
}

impl fmt::Display for EdgeTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeTest::Root => f.write_str("root-nil"),
            EdgeTest::Split(item) => item.fmt(f),
        }
    }
}

impl From<EdgeTest> for String {
    fn from(t: EdgeTest) -> Self {
        t.to_string()
    }
}

impl TryFrom<String> for EdgeTest {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        if s == "root-nil" {
            Ok(EdgeTest::Root)
        } else {
            s.parse().map(EdgeTest::Split)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub parent: u32,
    pub test: EdgeTest,
    pub child: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TreeDocument", try_from = "TreeDocument")]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
    edges: Vec<TreeEdge>,
    counter: u32,
}

/// JSON shape of a tree: `{nodes: [{id, pos, neg}], edges: [{parent, test, child}]}`.
#[derive(Serialize, Deserialize)]
struct TreeDocument {
    nodes: Vec<TreeNode>,
    edges: Vec<TreeEdge>,
}

impl From<DecisionTree> for TreeDocument {
    fn from(t: DecisionTree) -> Self {
        Self { nodes: t.nodes, edges: t.edges }
    }
}

impl TryFrom<TreeDocument> for DecisionTree {
    type Error = String;

    fn try_from(doc: TreeDocument) -> std::result::Result<Self, Self::Error> {
        let counter = doc.nodes.iter().map(|n| n.id).max().unwrap_or(0) + 1;
        let tree = DecisionTree { nodes: doc.nodes, edges: doc.edges, counter };
        tree.check_structure()?;
        Ok(tree)
    }
}

impl DecisionTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    /// Next node id that would be assigned.
    pub fn counter(&self) -> u32 {
        self.counter
    }

    pub fn node(&self, id: u32) -> Option<&TreeNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn children(&self, id: u32) -> impl Iterator<Item = &TreeEdge> {
        self.edges.iter().filter(move |e| e.parent == id)
    }

    pub fn is_leaf(&self, id: u32) -> bool {
        self.children(id).next().is_none()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| self.is_leaf(n.id))
    }

    /// Edge tests from the root down to `id`, excluding the root marker.
    pub fn path_to(&self, id: u32) -> Vec<Item> {
        let parents: HashMap<u32, &TreeEdge> = self.edges.iter().map(|e| (e.child, e)).collect();
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(edge) = parents.get(&cur) {
            if let EdgeTest::Split(item) = &edge.test {
                path.push(item.clone());
            }
            cur = edge.parent;
        }
        path.reverse();
        path
    }

    fn check_structure(&self) -> std::result::Result<(), String> {
        let ids: HashSet<u32> = self.nodes.iter().map(|n| n.id).collect();
        if ids.len() != self.nodes.len() {
            return Err("duplicate node id".into());
        }
        let roots: Vec<_> = self.edges.iter().filter(|e| e.test == EdgeTest::Root).collect();
        if roots.len() != 1 || roots[0].parent != 0 || roots[0].child != 1 {
            return Err("expected exactly one root edge 0 -> 1".into());
        }
        let mut children = HashSet::new();
        for e in &self.edges {
            if !children.insert(e.child) {
                return Err(format!("node {} has more than one parent", e.child));
            }
            if !ids.contains(&e.child) || (e.parent != 0 && !ids.contains(&e.parent)) {
                return Err(format!("edge {} -> {} references a missing node", e.parent, e.child));
            }
        }
        if children != ids {
            return Err("every node needs exactly one incoming edge".into());
        }
        Ok(())
    }
}

/// One value group of a candidate split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub value: String,
    pub positives: Vec<u32>,
    pub negatives: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub attribute: String,
    /// Instance-weighted info of the value groups, in bits.
    pub weighted_info: f64,
    /// One entry per declared value, in declaration order.
    pub branches: Vec<Branch>,
}

fn subset_instances<'a>(subset: &[u32], d: &'a Dataset) -> Result<Vec<&'a crate::dataset::Instance>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let wanted: HashSet<u32> = subset.iter().copied().collect();
    let picked: Vec<_> = d.instances.iter().filter(|i| wanted.contains(&i.id)).collect();
    if picked.len() != wanted.len() {
        let known: HashSet<u32> = picked.iter().map(|i| i.id).collect();
        let missing = subset.iter().find(|id| !known.contains(id)).copied().unwrap_or_default();
        return Err(Error::UnknownInstance(missing));
    }
    Ok(picked)
}

fn split_attribute<'a>(attr: &str, d: &'a Dataset) -> Result<&'a crate::dataset::AttributeSchema> {
    d.schemas.iter().find(|s| s.name == attr).ok_or_else(|| Error::UnknownAttribute(attr.to_string()))
}

/// Partitions `subset` by the values of `attr` and scores the partition.
pub fn split_evaluation(attr: &str, subset: &[u32], d: &Dataset) -> Result<SplitEvaluation> {
    split_evaluation_with(attr, subset, d, EmptyBranchPolicy::default())
}

pub fn split_evaluation_with(
    attr: &str,
    subset: &[u32],
    d: &Dataset,
    policy: EmptyBranchPolicy,
) -> Result<SplitEvaluation> {
    let schema = split_attribute(attr, d)?;
    let instances = subset_instances(subset, d)?;
    let total = instances.len() as f64;

    let mut branches = Vec::with_capacity(schema.values.len());
    let mut weighted_info = 0.0;
    let mut has_empty = false;
    for value in &schema.values {
        let mut branch = Branch { value: value.clone(), positives: Vec::new(), negatives: Vec::new() };
        for inst in instances.iter().filter(|i| i.assignments.get(attr) == Some(value)) {
            match inst.class_label {
                ClassLabel::Yes => branch.positives.push(inst.id),
                ClassLabel::No => branch.negatives.push(inst.id),
            }
        }
        let size = branch.positives.len() + branch.negatives.len();
        if size == 0 {
            has_empty = true;
        } else {
            weighted_info += size as f64 / total * count_info(branch.positives.len(), branch.negatives.len());
        }
        branches.push(branch);
    }
    if has_empty && policy == EmptyBranchPolicy::Disqualify {
        weighted_info = DISQUALIFIED_INFO;
    }
    Ok(SplitEvaluation { attribute: attr.to_string(), weighted_info, branches })
}

/// Gain of splitting `subset` on `attr`: the subset's own info minus the
/// weighted info of the groups, summed directly from class counts.
pub fn information_gain(attr: &str, subset: &[u32], d: &Dataset) -> Result<f64> {
    let schema = split_attribute(attr, d)?;
    let instances = subset_instances(subset, d)?;
    let count = |pred: &dyn Fn(&&crate::dataset::Instance) -> bool| instances.iter().filter(|i| pred(i)).count();

    let p = count(&|i| i.class_label == ClassLabel::Yes);
    let n = instances.len() - p;
    let total = (p + n) as f64;
    let mut remainder = 0.0;
    for value in &schema.values {
        let has = |i: &&crate::dataset::Instance| i.assignments.get(attr) == Some(value);
        let pi = count(&|i| has(i) && i.class_label == ClassLabel::Yes);
        let ni = count(&|i| has(i) && i.class_label == ClassLabel::No);
        if pi + ni > 0 {
            remainder += (pi + ni) as f64 / total * count_info(pi, ni);
        }
    }
    Ok(count_info(p, n) - remainder)
}

/// The candidate with the smallest weighted info. Ties go to the earliest
/// candidate (strict `<` scan).
pub fn choose_best_attribute(cands: &[SplitEvaluation]) -> Result<&SplitEvaluation> {
    let (first, rest) = cands.split_first().ok_or(Error::NoCandidates)?;
    Ok(rest.iter().fold(first, |best, c| if c.weighted_info < best.weighted_info { c } else { best }))
}

pub fn build_tree(d: &Dataset) -> Result<DecisionTree> {
    build_tree_with(d, EmptyBranchPolicy::default())
}

pub fn build_tree_with(d: &Dataset, policy: EmptyBranchPolicy) -> Result<DecisionTree> {
    ensure_valid(d)?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut builder = Builder { d, policy, tree: DecisionTree { nodes: vec![], edges: vec![], counter: 0 } };
    // Node 0 is the virtual parent of the root.
    builder.tree.counter = 1;
    let attrs: Vec<&str> = d.schemas.iter().map(|s| s.name.as_str()).collect();
    builder.create_node(0, EdgeTest::Root, d.positives(), d.negatives(), &attrs)?;
    Ok(builder.tree)
}

struct Builder<'a> {
    d: &'a Dataset,
    policy: EmptyBranchPolicy,
    tree: DecisionTree,
}

impl Builder<'_> {
    fn create_node(
        &mut self,
        parent: u32,
        test: EdgeTest,
        positives: Vec<u32>,
        negatives: Vec<u32>,
        attrs: &[&str],
    ) -> Result<()> {
        let id = self.tree.counter;
        self.tree.counter += 1;
        self.tree.edges.push(TreeEdge { parent, test, child: id });
        let mixed = !positives.is_empty() && !negatives.is_empty();
        let subset: Vec<u32> = positives.iter().chain(&negatives).copied().collect();
        self.tree.nodes.push(TreeNode { id, positives, negatives });

        if !mixed || attrs.is_empty() {
            return Ok(());
        }
        let cands =
            attrs.iter().map(|a| split_evaluation_with(a, &subset, self.d, self.policy)).collect::<Result<Vec<_>>>()?;
        let best = choose_best_attribute(&cands)?.clone();
        let remaining: Vec<&str> = attrs.iter().copied().filter(|a| *a != best.attribute).collect();
        for branch in best.branches {
            let test = EdgeTest::Split(Item::new(best.attribute.clone(), branch.value));
            self.create_node(id, test, branch.positives, branch.negatives, &remaining)?;
        }
        Ok(())
    }
}

fn id_list(ids: &[u32]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Node facts by ascending id, then edge facts in creation order.
pub fn render_tree_listing(t: &DecisionTree) -> String {
    let mut nodes: Vec<&TreeNode> = t.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    let mut out = String::new();
    for n in nodes {
        out.push_str(&format!("node({}, [{}]-[{}]).\n", n.id, id_list(&n.positives), id_list(&n.negatives)));
    }
    for e in &t.edges {
        out.push_str(&format!("edge({}, {}, {}).\n", e.parent, e.test, e.child));
    }
    out
}

impl fmt::Display for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_tree_listing(self))
    }
}

/// A root-to-leaf path read as `consequent with probability if antecedent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRule {
    pub consequent: ClassLabel,
    /// Share of the training set that reaches the rule's leaf.
    pub probability: f64,
    pub antecedent: Vec<Item>,
}

impl ClassificationRule {
    pub fn matches(&self, lookup: impl Fn(&str) -> Option<String>) -> bool {
        self.antecedent.iter().all(|item| lookup(&item.attribute).as_deref() == Some(item.value.as_str()))
    }
}

impl fmt::Display for ClassificationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conds: Vec<String> = self.antecedent.iter().map(ToString::to_string).collect();
        let conds = if conds.is_empty() { "true".to_string() } else { conds.join(" & ") };
        write!(f, "class={} <- {} (p={})", self.consequent, conds, self.probability)
    }
}

/// One rule per non-empty leaf, heaviest first; equal weights keep leaf
/// creation order.
pub fn extract_rules(t: &DecisionTree, d: &Dataset) -> Result<Vec<ClassificationRule>> {
    let root = t.node(1).ok_or_else(|| Error::TreeMismatch("tree has no root node".into()))?;
    let mut root_ids: Vec<u32> = root.positives.iter().chain(&root.negatives).copied().collect();
    let mut data_ids = d.ids();
    root_ids.sort_unstable();
    data_ids.sort_unstable();
    if root_ids != data_ids {
        return Err(Error::TreeMismatch("root node does not cover exactly the dataset's instances".into()));
    }
    let total = d.len() as f64;

    let mut weighted: Vec<(usize, ClassificationRule)> = Vec::new();
    let mut leaves: Vec<&TreeNode> = t.leaves().filter(|n| n.size() > 0).collect();
    leaves.sort_by_key(|n| n.id);
    for leaf in leaves {
        let consequent = if leaf.negatives.is_empty() {
            ClassLabel::Yes
        } else if leaf.positives.is_empty() {
            ClassLabel::No
        } else {
            leaf.majority()
        };
        let size = leaf.size();
        let rule = ClassificationRule { consequent, probability: size as f64 / total, antecedent: t.path_to(leaf.id) };
        weighted.push((size, rule));
    }
    // Stable sort on integer coverage keeps creation order among equals.
    weighted.sort_by_key(|w| std::cmp::Reverse(w.0));
    Ok(weighted.into_iter().map(|(_, r)| r).collect())
}
