//! Golden outputs on the 10-case allergy dataset.

use std::collections::BTreeSet;

use ruleforge::apriori::{
    derive_rules, filter_frequent, generate_candidates, mine_frequent, support_count, CandidateStrategy, MiningConfig,
};
use ruleforge::dataset::{parse_dataset, to_transactions, validate_dataset, ClassLabel, Dataset, Item};
use ruleforge::guard::{check_record, compile_triggers, Record};
use ruleforge::id3::{
    build_tree, build_tree_with, choose_best_attribute, extract_rules, information_gain, render_tree_listing,
    split_evaluation, EmptyBranchPolicy,
};
use ruleforge::inference::{Answer, ConsultationSession, Status};
use ruleforge::knowledge_base::{emit_knb, parse_knb};

const ALLERGY: &str = include_str!("../../../fixtures/allergy.data");

const LISTING: &str = "\
node(1, [2, 6, 8]-[1, 3, 4, 5, 7, 9, 10]).
node(2, []-[1, 3, 5, 9, 10]).
node(3, [2, 6, 8]-[4, 7]).
node(4, []-[4, 7]).
node(5, [2, 6, 8]-[]).
edge(0, root-nil, 1).
edge(1, fever=yes, 2).
edge(1, fever=no, 3).
edge(3, swollenGlands=yes, 4).
edge(3, swollenGlands=no, 5).
";

fn allergy() -> Dataset {
    parse_dataset(ALLERGY).unwrap()
}

fn items(s: &[&str]) -> Vec<Item> {
    let mut v: Vec<Item> = s.iter().map(|x| x.parse().unwrap()).collect();
    v.sort();
    v
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn fixture_is_valid() {
    let d = allergy();
    assert!(validate_dataset(&d).is_empty());
    assert_eq!(d.positives(), [2, 6, 8]);
    assert_eq!(d.negatives(), [1, 3, 4, 5, 7, 9, 10]);
    let db = to_transactions(&d).unwrap();
    assert_eq!(db.len(), 10);
    assert!(db.iter().all(|t| t.len() == 6));
}

#[test]
fn rendered_dataset_reparses_identically() {
    let d = allergy();
    assert_eq!(parse_dataset(&d.to_string()).unwrap(), d);
}

#[test]
fn root_split_scores() {
    let d = allergy();
    let all = d.ids();
    let fever = split_evaluation("fever", &all, &d).unwrap();
    assert!(close(fever.weighted_info, 0.485_475_297_2));
    assert_eq!(fever.branches[0].positives, Vec::<u32>::new());
    assert_eq!(fever.branches[0].negatives, [1, 3, 5, 9, 10]);
    assert_eq!(fever.branches[1].positives, [2, 6, 8]);
    assert_eq!(fever.branches[1].negatives, [4, 7]);
    assert!(close(information_gain("fever", &all, &d).unwrap(), 0.395_815_602_0));

    // Weighted info of every root candidate, from a high-precision evaluation.
    let expected = [
        ("soreThroat", 0.846_439_344_7),
        ("fever", 0.485_475_297_2),
        ("swollenGlands", 0.689_659_695_2),
        ("congestion", 0.763_547_202_3),
        ("headache", 0.846_439_344_7),
    ];
    let cands: Vec<_> = d.schemas.iter().map(|s| split_evaluation(&s.name, &all, &d).unwrap()).collect();
    for (c, (name, w)) in cands.iter().zip(expected) {
        assert_eq!(c.attribute, name);
        assert!(close(c.weighted_info, w), "{name}: {}", c.weighted_info);
    }
    assert_eq!(choose_best_attribute(&cands).unwrap().attribute, "fever");
}

#[test]
fn second_level_tie_goes_to_swollen_glands() {
    let d = allergy();
    let subset = [2, 4, 6, 7, 8];
    let sg = split_evaluation("swollenGlands", &subset, &d).unwrap();
    assert_eq!(sg.weighted_info, 0.0);
    assert_eq!(sg.branches[0].negatives, [4, 7]);
    assert_eq!(sg.branches[1].positives, [2, 6, 8]);
    assert!(close(information_gain("swollenGlands", &subset, &d).unwrap(), 0.970_950_594_5));

    let cands: Vec<_> = ["soreThroat", "swollenGlands", "congestion", "headache"]
        .iter()
        .map(|a| split_evaluation(a, &subset, &d).unwrap())
        .collect();
    assert_eq!(cands[2].weighted_info, 0.0);
    assert_eq!(choose_best_attribute(&cands).unwrap().attribute, "swollenGlands");
}

#[test]
fn tree_listing_matches() {
    let d = allergy();
    let t = build_tree(&d).unwrap();
    assert_eq!(render_tree_listing(&t), LISTING);
    assert_eq!(t.counter(), 6);
    assert_eq!(render_tree_listing(&build_tree_with(&d, EmptyBranchPolicy::Disqualify).unwrap()), LISTING);
}

#[test]
fn extracted_rules_match_knowledge_base_weights() {
    let d = allergy();
    let rules = extract_rules(&build_tree(&d).unwrap(), &d).unwrap();
    let view: Vec<_> = rules
        .iter()
        .map(|r| (r.consequent, r.probability, r.antecedent.iter().map(ToString::to_string).collect::<Vec<_>>()))
        .collect();
    assert_eq!(
        view,
        [
            (ClassLabel::No, 0.5, vec!["fever=yes".to_string()]),
            (ClassLabel::Yes, 0.3, vec!["fever=no".into(), "swollenGlands=no".into()]),
            (ClassLabel::No, 0.2, vec!["fever=no".into(), "swollenGlands=yes".into()]),
        ]
    );
}

#[test]
fn knowledge_base_text() {
    let d = allergy();
    let rules = extract_rules(&build_tree(&d).unwrap(), &d).unwrap();
    let text = emit_knb(&rules, &d.all_schemas()).unwrap();
    let rule_lines: Vec<&str> = text.lines().filter(|l| l.starts_with("type(")).collect();
    assert_eq!(
        rule_lines,
        [
            "type(no,0.5):-fever(yes). % generated rule",
            "type(yes,0.3):-fever(no),swollenGlands(no). % generated rule",
            "type(no,0.2):-fever(no),swollenGlands(yes). % generated rule",
        ]
    );
    let menu_lines: Vec<&str> = text.lines().filter(|l| l.contains("menuask")).collect();
    assert_eq!(menu_lines.len(), 6);
    assert_eq!(menu_lines[0], "soreThroat(X):-menuask(soreThroat,X,[yes,no]).%generated menu");
    assert_eq!(menu_lines[5], "class(X):-menuask(class,X,[yes,no]).%generated menu");

    let kb = parse_knb(&text).unwrap();
    assert_eq!(kb.rules, rules);
    assert_eq!(kb.menus.len(), 6);
}

#[test]
fn consultation_transcript() {
    let d = allergy();
    let rules = extract_rules(&build_tree(&d).unwrap(), &d).unwrap();
    let kb = parse_knb(&emit_knb(&rules, &d.all_schemas()).unwrap()).unwrap();
    let mut s = ConsultationSession::start(kb).unwrap();
    let Status::AwaitingAnswer { attribute, menu } = s.status().clone() else { panic!() };
    assert_eq!(attribute, "fever");
    let a = Answer::from_choice(2, &menu).unwrap();
    s.submit_answer("fever", a).unwrap();
    let a = Answer::from_choice(2, &menu).unwrap();
    s.submit_answer("swollenGlands", a).unwrap();
    assert_eq!(s.conclusion().unwrap().to_string(), "The answer is __yes__ with probability 0.3");
    let why = s.explain().unwrap().to_string();
    assert_eq!(
        why,
        "The answer is __yes__ with probability = 0.3.\nThe known storage are\n[swollenGlands(no), fever(no)]"
    );
}

#[test]
fn support_counts() {
    let db = to_transactions(&allergy()).unwrap();
    assert_eq!(support_count(&items(&["fever=yes", "class=no"]), &db), 5);
    assert_eq!(support_count(&[], &db), 10);
    assert_eq!(support_count(&items(&["congestion=yes"]), &db), 8);
}

#[test]
fn frequent_patterns_at_half_support() {
    let db = to_transactions(&allergy()).unwrap();
    let cfg = MiningConfig::new(50.0).unwrap();
    let fps = mine_frequent(&db, &cfg).unwrap();

    let level1: BTreeSet<(String, usize)> =
        fps.levels[&1].iter().map(|s| (s.items[0].to_string(), s.support)).collect();
    let expected1: BTreeSet<(String, usize)> = [
        ("fever=yes", 5),
        ("fever=no", 5),
        ("swollenGlands=no", 7),
        ("congestion=yes", 8),
        ("headache=yes", 5),
        ("headache=no", 5),
        ("soreThroat=yes", 5),
        ("soreThroat=no", 5),
        ("class=no", 7),
    ]
    .iter()
    .map(|(s, n)| (s.to_string(), *n))
    .collect();
    assert_eq!(level1, expected1);

    let longer: BTreeSet<(Vec<Item>, usize)> = fps.with_min_length(2).map(|s| (s.items.clone(), s.support)).collect();
    let expected: BTreeSet<(Vec<Item>, usize)> = [
        (items(&["fever=yes", "class=no"]), 5),
        (items(&["fever=yes", "congestion=yes"]), 5),
        (items(&["swollenGlands=no", "congestion=yes"]), 7),
        (items(&["congestion=yes", "headache=yes"]), 5),
        (items(&["congestion=yes", "class=no"]), 5),
        (items(&["fever=yes", "congestion=yes", "class=no"]), 5),
    ]
    .into_iter()
    .collect();
    assert_eq!(longer, expected);

    let joined = mine_frequent(&db, &cfg.with_strategy(CandidateStrategy::JoinPrune)).unwrap();
    assert_eq!(joined, fps);
}

#[test]
fn candidate_and_filter_examples() {
    let db = to_transactions(&allergy()).unwrap();
    let cfg = MiningConfig::new(50.0).unwrap();
    let fps = mine_frequent(&db, &cfg).unwrap();
    let cands = generate_candidates(3, &fps.levels[&2], CandidateStrategy::UnionCombine).unwrap();
    assert!(cands.contains(&items(&["fever=yes", "congestion=yes", "class=no"])));

    let kept = filter_frequent(
        &[items(&["congestion=yes", "headache=yes"]), items(&["swollenGlands=no", "class=no"])],
        &db,
        &cfg,
    );
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].support, 5);
}

#[test]
fn association_rule_confidences() {
    let db = to_transactions(&allergy()).unwrap();
    let cfg = MiningConfig::new(50.0).unwrap();
    let fps = mine_frequent(&db, &cfg).unwrap();
    let rules = derive_rules(&fps, &cfg);
    let find = |a: &[&str], c: &[&str]| {
        rules.iter().find(|r| r.antecedent == items(a) && r.consequent == items(c)).map(|r| r.confidence)
    };
    assert_eq!(find(&["fever=yes"], &["class=no"]), Some(1.0));
    assert_eq!(find(&["congestion=yes"], &["class=no"]), Some(0.625));
    for r in &rules {
        let all: Vec<Item> = {
            let mut v = [r.antecedent.clone(), r.consequent.clone()].concat();
            v.sort();
            v
        };
        let recomputed = support_count(&all, &db) as f64 / support_count(&r.antecedent, &db) as f64;
        assert!((recomputed - r.confidence).abs() < 1e-12);
    }

    let strict = cfg.with_min_confidence(1.0).unwrap();
    assert!(derive_rules(&fps, &strict).iter().all(|r| r.confidence == 1.0));
}

#[test]
fn guard_on_training_data() {
    let d = allergy();
    let db = to_transactions(&d).unwrap();
    let cfg = MiningConfig::new(50.0).unwrap().with_min_confidence(1.0).unwrap();
    let assoc = derive_rules(&mine_frequent(&db, &cfg).unwrap(), &cfg);
    let tree_rules = extract_rules(&build_tree(&d).unwrap(), &d).unwrap();

    let mut confirmed: BTreeSet<String> = (0..assoc.len())
        .filter(|&i| assoc[i].consequent.len() == 1)
        .map(ruleforge::guard::association_rule_id)
        .collect();
    confirmed.extend((0..tree_rules.len()).map(ruleforge::guard::classification_rule_id));
    let triggers = compile_triggers(&assoc, &tree_rules, &confirmed).unwrap();
    assert!(triggers.iter().any(|t| t.antecedent == items(&["fever=yes"]) && t.expected.to_string() == "class=no"));

    for inst in &d.instances {
        let record = Record::new(
            inst.id.to_string(),
            inst.assignments
                .iter()
                .map(|(a, v)| Item::new(a.clone(), v.clone()))
                .chain([Item::new("class", inst.class_label.as_str())]),
        );
        assert!(check_record(&record, &triggers).is_empty(), "instance {}", inst.id);
    }

    let fever_only = compile_triggers(&assoc, &[], &BTreeSet::from([fever_rule_id(&assoc)])).unwrap();
    let bad = Record::new("x", items(&["fever=yes", "class=yes", "headache=no"]));
    assert_eq!(check_record(&bad, &fever_only).len(), 1);
}

fn fever_rule_id(assoc: &[ruleforge::apriori::AssociationRule]) -> String {
    let i = assoc
        .iter()
        .position(|r| r.antecedent == items(&["fever=yes"]) && r.consequent == items(&["class=no"]))
        .unwrap();
    ruleforge::guard::association_rule_id(i)
}
