//! Test support: random categorical datasets and oracles that recompute
//! mining results without going through the miner's code paths.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruleforge::dataset::{parse_dataset, Dataset, TransactionDb};
use ruleforge::id3::{information_gain, split_evaluation, DecisionTree, EdgeTest};

/// Binary-valued dataset: `rows[i] = (attribute values, is_positive)`.
pub fn dataset_from_rows(n_attrs: usize, rows: &[(Vec<bool>, bool)]) -> Dataset {
    let mut text = String::new();
    for a in 0..n_attrs {
        text.push_str(&format!("attribute(a{a}, [t, f]).\n"));
    }
    text.push_str("attribute(class, [yes, no]).\n");
    for (i, (values, positive)) in rows.iter().enumerate() {
        let assigns: Vec<String> =
            values.iter().enumerate().map(|(a, v)| format!("a{a}={}", if *v { "t" } else { "f" })).collect();
        let class = if *positive { "yes" } else { "no" };
        text.push_str(&format!("instance({}, class={class}, [{}]).\n", i + 1, assigns.join(", ")));
    }
    parse_dataset(&text).expect("generated dataset parses")
}

/// Datasets with 1..=`max_attrs` binary attributes and 1..=`max_instances` rows.
pub fn dataset_strategy(max_attrs: usize, max_instances: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_attrs).prop_flat_map(move |n_attrs| {
        prop::collection::vec((prop::collection::vec(any::<bool>(), n_attrs), any::<bool>()), 1..=max_instances)
            .prop_map(move |rows| dataset_from_rows(n_attrs, &rows))
    })
}

/// A reproducible corpus drawn from a seeded generator.
pub fn seeded_corpus(seed: u64, count: usize, max_attrs: usize, max_instances: usize) -> Vec<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n_attrs = rng.random_range(1..=max_attrs);
            let n_rows = rng.random_range(1..=max_instances);
            // Skew some datasets so that high thresholds still find patterns.
            let bias: f64 = rng.random_range(0.1..0.9);
            let rows: Vec<(Vec<bool>, bool)> = (0..n_rows)
                .map(|_| ((0..n_attrs).map(|_| rng.random_bool(bias)).collect(), rng.random_bool(bias)))
                .collect();
            dataset_from_rows(n_attrs, &rows)
        })
        .collect()
}

/// Frequent patterns by exhaustive enumeration, as `length -> {(items, support)}`
/// with items rendered `attr=value` and sorted.
///
/// Every non-empty subset of the observed item universe is counted directly.
/// Levels are then truncated like the level-wise miner: a level with at most
/// one pattern is the last one reported.
pub fn brute_force_frequent(
    db: &TransactionDb,
    min_support_percent: f64,
) -> BTreeMap<usize, BTreeSet<(Vec<String>, usize)>> {
    let rows: Vec<HashSet<String>> = db.iter().map(|t| t.iter().map(|i| i.to_string()).collect()).collect();
    let mut universe: Vec<String> = rows.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    universe.sort();
    assert!(universe.len() <= 20, "universe too large for enumeration");
    let threshold = min_support_percent / 100.0 * rows.len() as f64;

    let mut by_len: BTreeMap<usize, BTreeSet<(Vec<String>, usize)>> = BTreeMap::new();
    for mask in 1u32..(1u32 << universe.len()) {
        let subset: Vec<String> =
            (0..universe.len()).filter(|b| mask & (1 << b) != 0).map(|b| universe[b].clone()).collect();
        let support = rows.iter().filter(|r| subset.iter().all(|i| r.contains(i))).count();
        if support >= 1 && support as f64 >= threshold {
            by_len.entry(subset.len()).or_default().insert((subset, support));
        }
    }

    let mut out = BTreeMap::new();
    for k in 1.. {
        match by_len.remove(&k) {
            Some(level) => {
                let last = level.len() <= 1;
                out.insert(k, level);
                if last {
                    break;
                }
            }
            None => break,
        }
    }
    out
}

/// Same shape as [`brute_force_frequent`], read off a miner result.
pub fn levels_as_strings(
    fps: &ruleforge::apriori::FrequentPatternSet,
) -> BTreeMap<usize, BTreeSet<(Vec<String>, usize)>> {
    fps.levels
        .iter()
        .map(|(&k, sets)| {
            let level =
                sets.iter().map(|s| (s.items.iter().map(ToString::to_string).collect::<Vec<_>>(), s.support)).collect();
            (k, level)
        })
        .collect()
}

/// Structural and selection invariants of an induced tree. Returns a
/// description of each broken invariant.
pub fn tree_invariant_violations(t: &DecisionTree, d: &Dataset) -> Vec<String> {
    let mut bad = Vec::new();

    let ids: BTreeSet<u32> = t.nodes().iter().map(|n| n.id).collect();
    let expected: BTreeSet<u32> = (1..t.counter()).collect();
    if ids != expected || ids.len() != t.nodes().len() {
        bad.push(format!("node ids {ids:?} are not 1..{}", t.counter() - 1));
    }
    for n in t.nodes() {
        let parents = t.edges().iter().filter(|e| e.child == n.id).count();
        if parents != 1 {
            bad.push(format!("node {} has {parents} parent edges", n.id));
        }
        let pos: BTreeSet<u32> = n.positives.iter().copied().collect();
        if n.negatives.iter().any(|id| pos.contains(id)) {
            bad.push(format!("node {} lists an instance as both classes", n.id));
        }
    }
    let roots: Vec<_> = t.edges().iter().filter(|e| e.test == EdgeTest::Root).collect();
    if roots.len() != 1 || roots[0].parent != 0 || roots[0].child != 1 {
        bad.push("root edge is not the single edge 0 -> 1".into());
    }

    for n in t.nodes() {
        let members: BTreeSet<u32> = n.positives.iter().chain(&n.negatives).copied().collect();
        let children: Vec<_> = t.children(n.id).collect();
        if children.is_empty() {
            let used: BTreeSet<String> = t.path_to(n.id).into_iter().map(|i| i.attribute).collect();
            if !n.is_pure() && used.len() != d.schemas.len() {
                bad.push(format!("leaf {} is mixed with attributes left", n.id));
            }
            continue;
        }
        let mut union = BTreeSet::new();
        let mut total = 0;
        for e in &children {
            let c = t.node(e.child).unwrap();
            total += c.size();
            union.extend(c.positives.iter().chain(&c.negatives).copied());
        }
        if union != members || total != members.len() {
            bad.push(format!("children of node {} do not partition it", n.id));
        }

        // The split attribute minimises weighted info, first in declaration
        // order among ties, and equally maximises gain.
        let EdgeTest::Split(first) = &children[0].test else {
            bad.push(format!("node {} has a root-marked child edge", n.id));
            continue;
        };
        let used: BTreeSet<String> = t.path_to(n.id).into_iter().map(|i| i.attribute).collect();
        let subset: Vec<u32> = members.iter().copied().collect();
        let avail: Vec<&str> = d.schemas.iter().map(|s| s.name.as_str()).filter(|a| !used.contains(*a)).collect();
        let scores: Vec<f64> = avail.iter().map(|a| split_evaluation(a, &subset, d).unwrap().weighted_info).collect();
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let argmin = avail[scores.iter().position(|&s| s == min).unwrap()];
        if argmin != first.attribute {
            bad.push(format!("node {} split on {} but {argmin} scores lowest", n.id, first.attribute));
        }
        let gains: Vec<f64> = avail.iter().map(|a| information_gain(a, &subset, d).unwrap()).collect();
        let max_gain = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let chosen_gain = gains[avail.iter().position(|a| *a == first.attribute).unwrap()];
        if chosen_gain < max_gain - 1e-12 {
            bad.push(format!("node {} split on {} without maximal gain", n.id, first.attribute));
        }
    }
    bad
}
