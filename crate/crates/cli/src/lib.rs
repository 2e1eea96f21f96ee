//! The `ruleforge` command line.
//!
//! [`run`] takes arguments and streams explicitly so the whole command
//! surface can be driven in-process. Exit codes: 0 success, 1 violations
//! found by `validate`, 2 usage errors, 3 parse, validation or I/O failures.

pub mod shell;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ruleforge::apriori::{derive_rules, mine_frequent, AssociationRule, CandidateStrategy, MiningConfig, MiningReport};
use ruleforge::dataset::{parse_dataset, to_transactions, Dataset, Item};
use ruleforge::guard::{
    association_rule_id, check_record, classification_rule_id, compile_triggers, parse_records, TriggerRule,
};
use ruleforge::id3::{build_tree_with, extract_rules, render_tree_listing, ClassificationRule, EmptyBranchPolicy};
use ruleforge::knowledge_base::emit_knb;
use ruleforge::ParseError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ruleforge", version, about = "Mine decision trees and association rules, then put them to work")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Induce an ID3 tree, print its node/edge listing and write it as JSON.
    MineTree(MineTreeArgs),
    /// Mine frequent patterns and association rules.
    MineAssoc(MineAssocArgs),
    /// Turn a dataset's tree rules into a .knb knowledge base.
    EmitKnb(EmitKnbArgs),
    /// Interactive expert shell.
    Consult(ConsultArgs),
    /// Check records against compiled triggers.
    Validate(ValidateArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TriggerArgs {
    /// Rule ids to compile into triggers (C1.. for tree rules, A1.. for association rules).
    #[arg(long, value_delimiter = ',')]
    pub confirm: Vec<String>,
    /// Where to write compiled triggers as JSON.
    #[arg(long, requires = "confirm")]
    pub triggers_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MineTreeArgs {
    pub input: PathBuf,
    /// Tree JSON destination. Defaults to the input path with a `.tree.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "vanish")]
    pub empty_branch: EmptyBranchPolicy,
    /// Also print the extracted classification rules.
    #[arg(long)]
    pub rules: bool,
    #[command(flatten)]
    pub triggers: TriggerArgs,
}

#[derive(Debug, Args)]
pub struct MineAssocArgs {
    pub input: PathBuf,
    /// Minimum support, in percent of the transactions.
    #[arg(long)]
    pub min_support: f64,
    #[arg(long, default_value_t = MiningConfig::DEFAULT_MIN_CONFIDENCE)]
    pub min_confidence: f64,
    #[arg(long, default_value = "union-combine")]
    pub strategy: CandidateStrategy,
    /// Shortest pattern printed.
    #[arg(long, default_value_t = 2)]
    pub min_length: usize,
    /// Report JSON destination. Defaults to the input path with a `.patterns.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also print the association rules.
    #[arg(long)]
    pub rules: bool,
    #[command(flatten)]
    pub triggers: TriggerArgs,
}

#[derive(Debug, Args)]
pub struct EmitKnbArgs {
    pub input: PathBuf,
    /// Destination. Defaults to the input path with a `.knb` extension.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConsultArgs {
    /// Knowledge base to load before the first prompt.
    #[arg(long)]
    pub kb: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// JSON trigger file as written by `--triggers-out`. Repeatable.
    #[arg(long, required = true)]
    pub triggers: Vec<PathBuf>,
    /// One record per line: comma-separated attr=value pairs.
    pub records: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = ruleforge_service::DEFAULT_HOST)]
    pub host: String,
    #[arg(long, default_value_t = ruleforge_service::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, env = ruleforge_service::DATA_DIR_ENV, default_value = "ruleforge-data")]
    pub data_dir: PathBuf,
}

type Outcome = Result<i32, String>;

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T, R, W, E>(args: I, input: R, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    R: BufRead,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ =
                if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, input, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_FAILURE
        }
    }
}

fn execute<R: BufRead, W: Write>(command: Command, input: R, out: &mut W) -> Outcome {
    match command {
        Command::MineTree(a) => mine_tree(a, out),
        Command::MineAssoc(a) => mine_assoc(a, out),
        Command::EmitKnb(a) => emit(a, out),
        Command::Consult(a) => consult(a, input, out),
        Command::Validate(a) => validate(a, out),
        Command::Serve(a) => serve(a),
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn io(e: std::io::Error) -> String {
    e.to_string()
}

/// `file:line:column: message`.
pub fn located(path: &Path, e: &ParseError) -> String {
    format!("{}:{}:{}: {}", path.display(), e.line, e.column, e.kind)
}

fn load_dataset(path: &Path) -> Result<Dataset, String> {
    parse_dataset(&read(path)?).map_err(|e| located(path, &e))
}

fn default_output(input: &Path, extension: &str) -> PathBuf {
    input.with_extension(extension)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    text
}

/// Sort key placing items in schema declaration order, class last.
fn item_key(d: &Dataset, item: &Item) -> (usize, usize) {
    let schemas = d.all_schemas();
    let a = schemas.iter().position(|s| s.name == item.attribute).unwrap_or(usize::MAX);
    let v = schemas.get(a).and_then(|s| s.values.iter().position(|v| *v == item.value)).unwrap_or(usize::MAX);
    (a, v)
}

fn declared_order(d: &Dataset, items: &[Item]) -> Vec<Item> {
    let mut items = items.to_vec();
    items.sort_by_key(|i| item_key(d, i));
    items
}

fn join(items: &[Item]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" & ")
}

fn write_triggers(
    args: &TriggerArgs,
    assoc: &[AssociationRule],
    class_rules: &[ClassificationRule],
    out: &mut impl Write,
) -> Result<(), String> {
    if args.confirm.is_empty() {
        return Ok(());
    }
    let confirmed: BTreeSet<String> = args.confirm.iter().cloned().collect();
    let triggers = compile_triggers(assoc, class_rules, &confirmed).map_err(|e| e.to_string())?;
    match &args.triggers_out {
        Some(path) => write(path, &to_json(&triggers)),
        None => {
            for t in &triggers {
                writeln!(out, "trigger {t}").map_err(io)?;
            }
            Ok(())
        }
    }
}

fn mine_tree(a: MineTreeArgs, out: &mut impl Write) -> Outcome {
    let d = load_dataset(&a.input)?;
    let tree = build_tree_with(&d, a.empty_branch).map_err(|e| e.to_string())?;
    out.write_all(render_tree_listing(&tree).as_bytes()).map_err(io)?;
    let rules = extract_rules(&tree, &d).map_err(|e| e.to_string())?;
    if a.rules {
        for (i, r) in rules.iter().enumerate() {
            writeln!(out, "{}: {r}", classification_rule_id(i)).map_err(io)?;
        }
    }
    write_triggers(&a.triggers, &[], &rules, out)?;
    let path = a.out.unwrap_or_else(|| default_output(&a.input, "tree.json"));
    write(&path, &to_json(&tree))?;
    Ok(EXIT_OK)
}

fn mine_assoc(a: MineAssocArgs, out: &mut impl Write) -> Outcome {
    let d = load_dataset(&a.input)?;
    let cfg = MiningConfig::new(a.min_support)
        .and_then(|c| c.with_min_confidence(a.min_confidence))
        .map(|c| c.with_strategy(a.strategy))
        .map_err(|e| e.to_string())?;
    let db = to_transactions(&d).map_err(|e| e.to_string())?;
    let fps = mine_frequent(&db, &cfg).map_err(|e| e.to_string())?;
    let rules = derive_rules(&fps, &cfg);

    let mut patterns: Vec<(Vec<Item>, usize)> =
        fps.with_min_length(a.min_length).map(|s| (declared_order(&d, &s.items), s.support)).collect();
    patterns.sort_by_cached_key(|(items, _)| (items.len(), items.iter().map(|i| item_key(&d, i)).collect::<Vec<_>>()));
    for (items, support) in &patterns {
        writeln!(out, "{{{}}} support {support}", join(items)).map_err(io)?;
    }
    if a.rules {
        for (i, r) in rules.iter().enumerate() {
            writeln!(
                out,
                "{}: {} => {} (support {}, confidence {})",
                association_rule_id(i),
                join(&declared_order(&d, &r.antecedent)),
                join(&declared_order(&d, &r.consequent)),
                r.support,
                r.confidence
            )
            .map_err(io)?;
        }
    }
    write_triggers(&a.triggers, &rules, &[], out)?;
    let report = MiningReport::new(&fps, rules, &cfg);
    let path = a.out.unwrap_or_else(|| default_output(&a.input, "patterns.json"));
    write(&path, &to_json(&report))?;
    Ok(EXIT_OK)
}

fn emit(a: EmitKnbArgs, out: &mut impl Write) -> Outcome {
    let d = load_dataset(&a.input)?;
    let tree = build_tree_with(&d, EmptyBranchPolicy::default()).map_err(|e| e.to_string())?;
    let rules = extract_rules(&tree, &d).map_err(|e| e.to_string())?;
    let knb = emit_knb(&rules, &d.all_schemas()).map_err(|e| e.to_string())?;
    let path = a.out.unwrap_or_else(|| default_output(&a.input, "knb"));
    write(&path, &knb)?;
    writeln!(out, "wrote {}", path.display()).map_err(io)?;
    Ok(EXIT_OK)
}

fn consult<R: BufRead>(a: ConsultArgs, input: R, out: &mut impl Write) -> Outcome {
    let mut shell = shell::Shell::new(input, out);
    if let Some(path) = &a.kb {
        shell.load(path)?;
    }
    shell.run().map_err(io)?;
    Ok(EXIT_OK)
}

fn load_triggers(path: &Path) -> Result<Vec<TriggerRule>, String> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn validate(a: ValidateArgs, out: &mut impl Write) -> Outcome {
    let mut triggers = Vec::new();
    for path in &a.triggers {
        triggers.extend(load_triggers(path)?);
    }
    let records = parse_records(&read(&a.records)?).map_err(|e| format!("{}: {e}", a.records.display()))?;
    let mut found = false;
    for record in &records {
        for v in check_record(record, &triggers) {
            found = true;
            writeln!(out, "{}", serde_json::to_string(&v).expect("report serializes")).map_err(io)?;
        }
    }
    Ok(if found { EXIT_VIOLATIONS } else { EXIT_OK })
}

fn serve(a: ServeArgs) -> Outcome {
    let runtime = tokio::runtime::Runtime::new().map_err(io)?;
    let config = ruleforge_service::ServeConfig { host: a.host, port: a.port, data_dir: a.data_dir };
    runtime.block_on(ruleforge_service::serve(config)).map_err(io)?;
    Ok(EXIT_OK)
}
