//! Acceptance gate: one PASS/FAIL line per criterion, all must pass.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ruleforge::apriori::{derive_rules, mine_frequent, CandidateStrategy, MiningConfig, MiningReport};
use ruleforge::dataset::{parse_dataset, to_transactions, Dataset, Item};
use ruleforge::entropy::binary_info;
use ruleforge::guard::{association_rule_id, check_record, compile_triggers, Record};
use ruleforge::id3::{build_tree, extract_rules, information_gain, render_tree_listing, DecisionTree};
use ruleforge::inference::{Answer, ConsultationSession, Status};
use ruleforge::knowledge_base::{emit_knb, parse_knb};
use ruleforge_service::{router, AppState, ArtifactStore, SessionStore};
use ruleforge_testkit::{brute_force_frequent, levels_as_strings, seeded_corpus, tree_invariant_violations};
use serde_json::{json, Value};
use tower::ServiceExt;

const ALLERGY: &str = include_str!("../../../fixtures/allergy.data");

/// Reference listing for the allergy fixture.
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

const EXPECTED_PATTERNS: [&[&str]; 6] = [
    &["fever=yes", "class=no"],
    &["fever=yes", "congestion=yes"],
    &["swollenGlands=no", "congestion=yes"],
    &["congestion=yes", "headache=yes"],
    &["congestion=yes", "class=no"],
    &["fever=yes", "congestion=yes", "class=no"],
];
const EXPECTED_SUPPORTS: [usize; 6] = [5, 5, 7, 5, 5, 5];

const RULE_LINES: [&str; 3] = [
    "type(no,0.5):-fever(yes). % generated rule",
    "type(yes,0.3):-fever(no),swollenGlands(no). % generated rule",
    "type(no,0.2):-fever(no),swollenGlands(yes). % generated rule",
];

const CORPUS_SEED: u64 = 0x5eed_1d3a;
const CORPUS_SIZE: usize = 240;
const THRESHOLDS: [f64; 3] = [30.0, 50.0, 80.0];

fn allergy() -> Dataset {
    parse_dataset(ALLERGY).unwrap()
}

fn sorted_items(s: &[&str]) -> Vec<Item> {
    let mut v: Vec<Item> = s.iter().map(|x| x.parse().unwrap()).collect();
    v.sort();
    v
}

fn allergy_kb_text() -> String {
    let d = allergy();
    let rules = extract_rules(&build_tree(&d).unwrap(), &d).unwrap();
    emit_knb(&rules, &d.all_schemas()).unwrap()
}

fn corpus() -> Vec<Dataset> {
    seeded_corpus(CORPUS_SEED, CORPUS_SIZE, 5, 12)
}

fn criterion_1() {
    let start = Instant::now();
    let listing = render_tree_listing(&build_tree(&allergy()).unwrap());
    let elapsed = start.elapsed();
    assert_eq!(listing, LISTING);
    assert_eq!(listing.lines().filter(|l| l.starts_with("node(")).count(), 5);
    assert_eq!(listing.lines().filter(|l| l.starts_with("edge(")).count(), 5);
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
}

fn criterion_2() {
    let start = Instant::now();
    let db = to_transactions(&allergy()).unwrap();
    let fps = mine_frequent(&db, &MiningConfig::new(50.0).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let mined: BTreeSet<(Vec<Item>, usize)> = fps.with_min_length(2).map(|s| (s.items.clone(), s.support)).collect();

    let oracle = brute_force_frequent(&db, 50.0);
    let mut expected = BTreeSet::new();
    for (pattern, &support) in EXPECTED_PATTERNS.iter().zip(&EXPECTED_SUPPORTS) {
        let items = sorted_items(pattern);
        let key: Vec<String> = items.iter().map(ToString::to_string).collect();
        assert!(oracle[&items.len()].contains(&(key, support)), "oracle disagrees on {pattern:?}");
        expected.insert((items, support));
    }
    assert_eq!(mined, expected);
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
}

fn criterion_3() {
    let text = allergy_kb_text();
    let lines: Vec<&str> = text.lines().collect();
    let rules: Vec<&str> = lines.iter().copied().filter(|l| l.ends_with("% generated rule")).collect();
    assert_eq!(rules, RULE_LINES);
    let menus: Vec<&str> = lines.iter().copied().filter(|l| l.contains("menuask(")).collect();
    assert_eq!(
        menus,
        [
            "soreThroat(X):-menuask(soreThroat,X,[yes,no]).%generated menu",
            "fever(X):-menuask(fever,X,[yes,no]).%generated menu",
            "swollenGlands(X):-menuask(swollenGlands,X,[yes,no]).%generated menu",
            "congestion(X):-menuask(congestion,X,[yes,no]).%generated menu",
            "headache(X):-menuask(headache,X,[yes,no]).%generated menu",
            "class(X):-menuask(class,X,[yes,no]).%generated menu",
        ]
    );
}

fn criterion_4() {
    let kb = parse_knb(&allergy_kb_text()).unwrap();
    let mut s = ConsultationSession::start(kb.clone()).unwrap();
    let Status::AwaitingAnswer { attribute, menu } = s.status().clone() else { panic!("no first question") };
    assert_eq!(attribute, "fever");
    s.submit_answer("fever", Answer::from_choice(2, &menu).unwrap()).unwrap();
    let Status::AwaitingAnswer { attribute, menu } = s.status().clone() else { panic!("no second question") };
    assert_eq!(attribute, "swollenGlands");
    s.submit_answer("swollenGlands", Answer::from_choice(2, &menu).unwrap()).unwrap();
    let c = s.conclusion().unwrap();
    assert_eq!((c.class_value.as_str(), c.probability), ("yes", 0.3));
    assert_eq!(c.to_string(), "The answer is __yes__ with probability 0.3");
    assert_eq!(s.explain().unwrap().known_list(), "[swollenGlands(no), fever(no)]");

    let mut quit = ConsultationSession::start(kb).unwrap();
    let Status::AwaitingAnswer { menu, .. } = quit.status().clone() else { panic!() };
    let exit = Answer::from_choice(99, &menu).unwrap();
    assert_eq!(quit.submit_answer("fever", exit).unwrap(), &Status::Aborted);

    // The same exchange through the shell.
    let dir = tempfile::tempdir().unwrap();
    let kb_path = dir.path().join("allergy.knb");
    std::fs::write(&kb_path, allergy_kb_text()).unwrap();
    let script = format!("load.\n'{}'.\nsolve.\n2.\n2.\nwhy.\nquit.\n", kb_path.display());
    let mut out = Vec::new();
    let code = ruleforge_cli::run(["ruleforge", "consult"], script.as_bytes(), &mut out, &mut Vec::new());
    let transcript = String::from_utf8(out).unwrap();
    assert_eq!(code, 0);
    let expected = concat!(
        "expert-shell> \n",
        "What is the value for fever?\n",
        "[1=yes, 2=no, 99=exitShell]\n",
        "Enter the choice> \n",
        "What is the value for swollenGlands?\n",
        "[1=yes, 2=no, 99=exitShell]\n",
        "Enter the choice> The answer is __yes__ with probability 0.3\n",
        "expert-shell> \n",
        "The answer is __yes__ with probability = 0.3.\n",
        "The known storage are\n",
        "[swollenGlands(no), fever(no)]\n",
        "expert-shell> ",
    );
    assert!(transcript.contains(expected), "{transcript}");
}

fn criterion_5() {
    assert!((binary_info(0.3, 0.7).unwrap() - 0.881_290_899_2).abs() <= 1e-9);
    let d = allergy();
    assert!((information_gain("fever", &d.ids(), &d).unwrap() - 0.395_815_602_0).abs() <= 1e-9);
    assert_eq!(binary_info(1.0, 0.0).unwrap(), 0.0);
    assert_eq!(binary_info(0.0, 1.0).unwrap(), 0.0);
    assert_eq!(binary_info(0.5, 0.5).unwrap(), 1.0);
}

fn criterion_6() {
    let start = Instant::now();
    let corpus = corpus();
    assert!(corpus.len() >= 200);
    for (i, d) in corpus.iter().enumerate() {
        assert!(d.len() <= 12 && d.schemas.len() <= 5);
        let db = to_transactions(d).unwrap();
        for minsup in THRESHOLDS {
            let fps = mine_frequent(&db, &MiningConfig::new(minsup).unwrap()).unwrap();
            assert_eq!(levels_as_strings(&fps), brute_force_frequent(&db, minsup), "dataset {i} at {minsup}%");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
}

fn criterion_7() {
    for (i, d) in corpus().iter().enumerate() {
        let db = to_transactions(d).unwrap();
        for minsup in THRESHOLDS {
            let cfg = MiningConfig::new(minsup).unwrap();
            let union = mine_frequent(&db, &cfg.with_strategy(CandidateStrategy::UnionCombine)).unwrap();
            let joined = mine_frequent(&db, &cfg.with_strategy(CandidateStrategy::JoinPrune)).unwrap();
            assert_eq!(union, joined, "dataset {i} at {minsup}%");
        }
    }
}

fn criterion_8() {
    for (i, d) in corpus().iter().enumerate() {
        let tree = build_tree(d).unwrap();
        let violations = tree_invariant_violations(&tree, d);
        assert!(violations.is_empty(), "dataset {i}: {violations:?}");
        let total: f64 = extract_rules(&tree, d).unwrap().iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() <= 1e-12, "dataset {i}: probabilities sum to {total}");
    }
}

fn criterion_9() {
    let d = allergy();
    let db = to_transactions(&d).unwrap();
    let cfg = MiningConfig::new(50.0).unwrap().with_min_confidence(1.0).unwrap();
    let rules = derive_rules(&mine_frequent(&db, &cfg).unwrap(), &cfg);
    let confirmed: BTreeSet<String> = rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.confidence == 1.0 && r.consequent.len() == 1)
        .map(|(i, _)| association_rule_id(i))
        .collect();
    assert!(!confirmed.is_empty());
    let triggers = compile_triggers(&rules, &[], &confirmed).unwrap();

    for inst in &d.instances {
        let record = Record::new(
            inst.id.to_string(),
            inst.assignments
                .iter()
                .map(|(a, v)| Item::new(a.clone(), v.clone()))
                .chain([Item::new("class", inst.class_label.as_str())]),
        );
        assert!(check_record(&record, &triggers).is_empty(), "training record {} flagged", inst.id);
    }

    let synthetic = Record::new("synthetic", sorted_items(&["fever=yes", "class=yes"]));
    let reports = check_record(&synthetic, &triggers);
    assert_eq!(reports.len(), 1, "{reports:?}");
    let fired = triggers.iter().find(|t| t.id == reports[0].trigger).unwrap();
    assert_eq!(fired.antecedent, sorted_items(&["fever=yes"]));
    assert_eq!(fired.expected.to_string(), "class=no");

    // The fever trigger alone flags the record whatever the other symptoms are.
    let fever: Vec<_> = triggers.iter().filter(|t| t.id == fired.id).cloned().collect();
    let others = ["soreThroat", "swollenGlands", "congestion", "headache"];
    for mask in 0..(1u32 << others.len()) {
        let mut items = sorted_items(&["fever=yes", "class=yes"]);
        for (bit, attr) in others.iter().enumerate() {
            items.push(Item::new(*attr, if mask >> bit & 1 == 1 { "yes" } else { "no" }));
        }
        assert_eq!(check_record(&Record::new("synthetic", items), &fever).len(), 1);
    }
}

struct Client {
    app: Router,
}

impl Client {
    async fn call(&self, method: &str, uri: &str, body: String, json: bool) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        if json {
            req = req.header("content-type", "application/json");
        }
        let resp = self.app.clone().oneshot(req.body(Body::from(body)).unwrap()).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
    }

    async fn post(&self, uri: &str, body: Value) -> Value {
        let (status, value) = self.call("POST", uri, body.to_string(), true).await;
        assert!(status.is_success(), "{uri}: {status} {value}");
        value
    }

    async fn upload(&self, uri: &str, text: String) -> String {
        let (status, value) = self.call("POST", uri, text, false).await;
        assert_eq!(status, StatusCode::CREATED, "{value}");
        value["id"].as_str().unwrap().to_string()
    }

    async fn explanation(&self, session: &str) -> Value {
        let (status, value) = self.call("GET", &format!("/sessions/{session}/explanation"), String::new(), false).await;
        assert_eq!(status, StatusCode::OK, "{value}");
        value
    }
}

/// Drives one consultation step by step, answering by menu position.
async fn answer(client: &Client, session: &str, choice: u32, last: &Value) -> Value {
    let menu: Vec<String> = serde_json::from_value(last["question"]["menu"].clone()).unwrap();
    let value = match Answer::from_choice(choice, &menu).unwrap() {
        Answer::Value(v) => v,
        Answer::Exit => "exit".to_string(),
    };
    client.post(&format!("/sessions/{session}/answer"), json!({ "value": value })).await
}

fn criterion_10() {
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    runtime.block_on(async {
        let dir = tempfile::tempdir().unwrap();
        let store = ArtifactStore::open(dir.path()).unwrap();
        let client = Client { app: router(AppState::new(store, SessionStore::default())) };
        let d = allergy();

        let id = client.upload("/datasets", ALLERGY.to_string()).await;
        let tree = client.post(&format!("/datasets/{id}/mine"), json!({"kind": "tree"})).await;
        let library_tree = build_tree(&d).unwrap();
        assert_eq!(tree["result"], serde_json::to_value(&library_tree).unwrap());
        let served: DecisionTree = serde_json::from_value(tree["result"].clone()).unwrap();
        assert_eq!(render_tree_listing(&served), LISTING);

        let assoc = client.post(&format!("/datasets/{id}/mine"), json!({"kind": "assoc", "min_support": 50})).await;
        let cfg = MiningConfig::new(50.0).unwrap();
        let library_report = MiningReport::run(&to_transactions(&d).unwrap(), &cfg).unwrap();
        assert_eq!(assoc["result"], serde_json::to_value(&library_report).unwrap());
        let served: MiningReport = serde_json::from_value(assoc["result"].clone()).unwrap();
        let long: usize = served.levels.iter().filter(|l| l.length >= 2).map(|l| l.itemsets.len()).sum();
        assert_eq!(long, 6);

        let kb = client.upload("/kbs", allergy_kb_text()).await;
        let start = client.post("/sessions", json!({ "kb": kb })).await;
        assert_eq!(start["question"]["attribute"], "fever");
        let sid = start["session"].as_str().unwrap().to_string();
        let second = answer(&client, &sid, 2, &start).await;
        assert_eq!(second["question"]["attribute"], "swollenGlands");
        let done = answer(&client, &sid, 2, &second).await;
        assert_eq!(done["conclusion"], json!({"class": "yes", "probability": 0.3}));
        let why = client.explanation(&sid).await;
        assert_eq!(why["known"], json!(["swollenGlands=no", "fever=no"]));

        let fresh = client.post("/sessions", json!({ "kb": kb })).await;
        let aborted = answer(&client, fresh["session"].as_str().unwrap(), 99, &fresh).await;
        assert_eq!(aborted["status"], "aborted");

        // Every answer path, solo, as the reference for interleaved runs.
        let scripts: [&[u32]; 3] = [&[1], &[2, 1], &[2, 2]];
        let mut solo = BTreeMap::new();
        for script in scripts {
            let mut state = client.post("/sessions", json!({ "kb": kb })).await;
            let sid = state["session"].as_str().unwrap().to_string();
            for &choice in script {
                state = answer(&client, &sid, choice, &state).await;
            }
            state["session"] = Value::Null;
            let mut why = client.explanation(&sid).await;
            why["session"] = Value::Null;
            solo.insert(script.to_vec(), (state, why));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
        for _ in 0..50 {
            let a = *scripts.choose(&mut rng).unwrap();
            let b = *scripts.choose(&mut rng).unwrap();
            let mut order: Vec<bool> = [vec![true; a.len()], vec![false; b.len()]].concat();
            order.shuffle(&mut rng);

            let mut sa = client.post("/sessions", json!({ "kb": kb })).await;
            let mut sb = client.post("/sessions", json!({ "kb": kb })).await;
            let (ida, idb) = (sa["session"].as_str().unwrap().to_string(), sb["session"].as_str().unwrap().to_string());
            let (mut ia, mut ib) = (0, 0);
            for first in order {
                if first {
                    sa = answer(&client, &ida, a[ia], &sa).await;
                    ia += 1;
                } else {
                    sb = answer(&client, &idb, b[ib], &sb).await;
                    ib += 1;
                }
            }
            for (state, sid, script) in [(sa, &ida, a), (sb, &idb, b)] {
                let mut state = state;
                assert_eq!(state["session"].as_str(), Some(sid.as_str()));
                state["session"] = Value::Null;
                let mut why = client.explanation(sid).await;
                why["session"] = Value::Null;
                assert_eq!((state, why), solo[script].clone(), "script {script:?}");
            }
        }
    });
}

fn check(number: u32, name: &str, f: fn()) -> bool {
    let start = Instant::now();
    let ok = catch_unwind(AssertUnwindSafe(f)).is_ok();
    // Written to the raw handle so the line survives libtest's output capture.
    let _ =
        writeln!(std::io::stderr(), "[{}] {number} {name} ({:.2?})", if ok { "PASS" } else { "FAIL" }, start.elapsed());
    ok
}

#[test]
fn acceptance() {
    let results = [
        check(1, "tree reproduction", criterion_1),
        check(2, "pattern reproduction", criterion_2),
        check(3, "knowledge-base reproduction", criterion_3),
        check(4, "consultation transcript", criterion_4),
        check(5, "entropy numerics", criterion_5),
        check(6, "miner matches exhaustive oracle", criterion_6),
        check(7, "candidate strategies agree", criterion_7),
        check(8, "tree invariants", criterion_8),
        check(9, "guard behaviour", criterion_9),
        check(10, "service differential", criterion_10),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
