use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chipfire::bounds::{self, BigNat, BoundPair, BoundsError};
use chipfire::enumeration::{
    self, CheckpointError, EnumerationError, Enumerator, LevelStats, Mode, Outcome, StableSet,
};
use chipfire::labeled::{self, Chip, LabeledConfig, PenultimateMode, Policy, Property};
use chipfire::tree::VertexId;
use chipfire::unlabeled::{self, SequenceName, Strategy, UnlabeledProfile};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Chip-firing on the binary tree with a self-loop at the root.
#[derive(Parser)]
#[command(name = "chipfire", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stable chip counts and fire counts for N unlabeled chips.
    Fires {
        #[arg(long)]
        chips: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run a game to stability.
    Simulate(SimulateArgs),
    /// Fire chosen triples by hand, starting from N labeled chips at the root.
    Play {
        #[arg(long)]
        chips: u32,
        /// `VERTEX:A,B,C`; repeat for each firing, applied in order.
        #[arg(long = "fire", value_name = "VERTEX:A,B,C")]
        fires: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Every stable configuration reachable from 2^L - 1 chips.
    Enumerate(EnumerateArgs),
    /// Distinct relative orders on bottom subtrees of a stable set.
    ExtractOrders {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        json: bool,
    },
    /// Check structural properties on every configuration of a corpus.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = PropertyArg::All)]
        property: PropertyArg,
        #[arg(long, value_enum, default_value_t = PenultimateArg::Strict)]
        penultimate_mode: PenultimateArg,
        #[arg(long)]
        json: bool,
    },
    /// Upper bounds on the number of stable configurations.
    Bounds(BoundsArgs),
    /// Integer sequences of root and total fire counts.
    Sequence {
        #[arg(long, value_enum)]
        name: SequenceArg,
        #[arg(long)]
        count: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    chips: u64,
    #[arg(long, value_enum, default_value_t = StrategyArg::LowestIndex)]
    strategy: StrategyArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Play the labeled game instead.
    #[arg(long)]
    labeled: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::MinTriple)]
    policy: PolicyArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    /// Write the stable set as a JSON-lines corpus.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue from a frontier checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Where frontier checkpoints go (defaults to the resume path).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Save a checkpoint after every K levels.
    #[arg(long, value_name = "K")]
    checkpoint_every: Option<u32>,
    /// Stop with a checkpoint once a frontier exceeds this many states.
    #[arg(long)]
    max_frontier: Option<usize>,
    /// Stop with a checkpoint after this many levels.
    #[arg(long)]
    stop_after_depth: Option<u32>,
    #[arg(long)]
    workers: Option<usize>,
    /// Skip the per-state depth and fire-budget assertions.
    #[arg(long)]
    no_verify: bool,
    /// Full-mode corpus to compare a scheduled run against.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// No progress lines on stderr.
    #[arg(long)]
    quiet: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Corpus file to read.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Enumerate this many layers on the fly instead.
    #[arg(long)]
    ell: Option<u32>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, conflicts_with = "table", required_unless_present = "table")]
    ell: Option<u32>,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Inclusive range of layers, such as `4..7`.
    #[arg(long, value_name = "A..B")]
    table: Option<String>,
    /// Print every value in full instead of abbreviating long ones.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    LowestIndex,
    Random,
    HighestLayer,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    MinTriple,
    MaxTriple,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Scheduled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Anchors,
    Extremes,
    Zigzag,
    Penultimate,
    Ballot,
    Forbidden,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum PenultimateArg {
    Strict,
    Lenient,
    Descendant,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Naive,
    Zigzag,
    Ballot,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum SequenceArg {
    #[value(name = "f0")]
    F0,
    #[value(name = "F")]
    Total,
    #[value(name = "diff-f0")]
    DiffF0,
    #[value(name = "diff-F")]
    DiffTotal,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::LowestIndex => Strategy::LowestIndexFirst,
            StrategyArg::Random => Strategy::Random,
            StrategyArg::HighestLayer => Strategy::HighestLayerFirst,
        }
    }
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::MinTriple => Policy::MinTriple,
            PolicyArg::MaxTriple => Policy::MaxTriple,
            PolicyArg::Random => Policy::Random,
        }
    }
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::Scheduled => Mode::Scheduled,
        }
    }
}

impl From<PenultimateArg> for PenultimateMode {
    fn from(m: PenultimateArg) -> Self {
        match m {
            PenultimateArg::Strict => PenultimateMode::Strict,
            PenultimateArg::Lenient => PenultimateMode::Lenient,
            PenultimateArg::Descendant => PenultimateMode::Descendant,
        }
    }
}

impl From<SequenceArg> for SequenceName {
    fn from(s: SequenceArg) -> Self {
        match s {
            SequenceArg::F0 => SequenceName::RootFires,
            SequenceArg::Total => SequenceName::TotalFires,
            SequenceArg::DiffF0 => SequenceName::RootFiresDiff,
            SequenceArg::DiffTotal => SequenceName::TotalFiresDiff,
        }
    }
}

const EXIT_PROPERTY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CHECKPOINT: u8 = 3;
const EXIT_STOPPED: u8 = 4;

/// Values with more digits than this are abbreviated unless `--exact`.
const FULL_DIGITS: usize = 12;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e)
    }
}

impl From<EnumerationError> for Failure {
    fn from(e: EnumerationError) -> Self {
        let code = match e {
            EnumerationError::Checkpoint(_) => EXIT_CHECKPOINT,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<CheckpointError> for Failure {
    fn from(e: CheckpointError) -> Self {
        Failure { code: EXIT_CHECKPOINT, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Fires { chips, json } => fires(&mut out, chips, json),
        Command::Simulate(args) => simulate(&mut out, &args),
        Command::Play { chips, fires, json } => play(&mut out, chips, &fires, json),
        Command::Enumerate(args) => enumerate(&mut out, &args),
        Command::ExtractOrders { source, depth, json } => extract_orders(&mut out, &source, depth, json),
        Command::Check { input, property, penultimate_mode, json } => {
            check(&mut out, &input, property, penultimate_mode.into(), json)
        }
        Command::Bounds(args) => bounds_cmd(&mut out, &args),
        Command::Sequence { name, count, json } => sequence(&mut out, name.into(), count, json),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn print_json(out: &mut impl Write, value: &Value) -> io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(value).expect("JSON value serializes"))
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn fires(out: &mut impl Write, chips: u64, json: bool) -> CmdResult {
    let p = UnlabeledProfile::new(chips).map_err(Failure::usage)?;
    if json {
        print_json(
            out,
            &json!({
                "n_chips": p.n_chips,
                "layers": p.layers(),
                "digits": p.digits,
                "chip_counts": p.chip_counts,
                "fire_counts": p.fire_counts,
                "root_fires": p.root_fires,
                "total_fires": p.total_fires,
            }),
        )?;
    } else {
        writeln!(out, "chips: {}", p.n_chips)?;
        writeln!(out, "layers: {}", p.layers())?;
        writeln!(out, "chip_counts: [{}]", join(&p.chip_counts))?;
        writeln!(out, "fire_counts: [{}]", join(&p.fire_counts))?;
        writeln!(out, "root_fires: {}", p.root_fires)?;
        writeln!(out, "total_fires: {}", p.total_fires)?;
    }
    Ok(0)
}

fn tallies(map: &std::collections::BTreeMap<VertexId, u64>, field: &str) -> Value {
    Value::Array(map.iter().filter(|(_, &n)| n > 0).map(|(v, &n)| json!({"v": v.index(), field: n})).collect())
}

fn tally_text(map: &std::collections::BTreeMap<VertexId, u64>) -> String {
    map.iter().filter(|(_, &n)| n > 0).map(|(v, n)| format!("{v}:{n}")).collect::<Vec<_>>().join(" ")
}

fn simulate(out: &mut impl Write, args: &SimulateArgs) -> CmdResult {
    if args.labeled {
        let chips = u32::try_from(args.chips).map_err(|_| Failure::usage("too many chips for a labeled game"))?;
        let run = labeled::run_policy(chips, args.policy.into(), args.seed).map_err(Failure::usage)?;
        if args.json {
            let config: Value = serde_json::to_value(&run.config).expect("config serializes");
            print_json(
                out,
                &json!({"config": config, "fired": tallies(&run.fired, "times"), "total_fires": run.total_fires()}),
            )?;
        } else {
            writeln!(out, "{}", run.config)?;
        }
        return Ok(0);
    }
    let state = unlabeled::simulate(args.chips, args.strategy.into(), args.seed).map_err(Failure::usage)?;
    if args.json {
        print_json(
            out,
            &json!({
                "n_chips": args.chips,
                "cells": tallies(&state.cells, "chips"),
                "fired": tallies(&state.fired, "times"),
                "total_fires": state.total_fires(),
            }),
        )?;
    } else {
        writeln!(out, "cells: {}", tally_text(&state.cells))?;
        writeln!(out, "fired: {}", tally_text(&state.fired))?;
        writeln!(out, "total_fires: {}", state.total_fires())?;
    }
    Ok(0)
}

fn parse_fire(text: &str) -> Result<(VertexId, [Chip; 3]), Failure> {
    let bad = || Failure::usage(format!("bad --fire {text:?}; expected VERTEX:A,B,C"));
    let (vertex, chips) = text.split_once(':').ok_or_else(bad)?;
    let vertex = vertex.trim().parse().map_err(|_| bad())?;
    let vertex = VertexId::new(vertex).map_err(Failure::usage)?;
    let mut labels = chips.split(',').map(|c| c.trim().parse::<Chip>());
    let mut triple = [0; 3];
    for slot in &mut triple {
        *slot = labels.next().ok_or_else(bad)?.map_err(|_| bad())?;
    }
    if labels.next().is_some() {
        return Err(bad());
    }
    triple.sort_unstable();
    Ok((vertex, triple))
}

fn play(out: &mut impl Write, chips: u32, fires: &[String], json: bool) -> CmdResult {
    let mut config = LabeledConfig::initial(chips).map_err(Failure::usage)?;
    for (i, text) in fires.iter().enumerate() {
        let (v, triple) = parse_fire(text)?;
        config = config
            .fire(v, triple)
            .map_err(|e| Failure::usage(format!("firing {} ({text}): {e}", i + 1)))?;
    }
    if json {
        let value: Value = serde_json::to_value(&config).expect("config serializes");
        print_json(out, &json!({"config": value, "fires": fires.len(), "stable": config.is_stable()}))?;
    } else {
        writeln!(out, "{config}")?;
        writeln!(out, "stable: {}", if config.is_stable() { "yes" } else { "no" })?;
    }
    Ok(0)
}

fn enumerate(out: &mut impl Write, args: &EnumerateArgs) -> CmdResult {
    let mode = Mode::from(args.mode);
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut search = Enumerator::new(args.ell, mode)?.workers(workers).verify(!args.no_verify);
    if let Some(path) = args.checkpoint.as_ref().or(args.resume.as_ref()) {
        search = search.checkpoint_path(path);
    }
    if let Some(k) = args.checkpoint_every {
        search = search.checkpoint_every(k);
    }
    if let Some(budget) = args.max_frontier {
        search = search.frontier_budget(budget);
    }
    if let Some(depth) = args.stop_after_depth {
        search = search.stop_after_depth(depth);
    }
    if !args.quiet {
        search = search.on_level(|s: &LevelStats| {
            eprintln!(
                "depth {}/{}: {} states (explored {})",
                s.depth, s.final_depth, s.frontier, s.explored_states
            );
        });
    }
    let outcome = match &args.resume {
        Some(path) => search.resume(path)?,
        None => search.run()?,
    };
    let set = match outcome {
        Outcome::Completed(set) => set,
        Outcome::Checkpointed { path, depth, frontier } => {
            if args.json {
                print_json(
                    out,
                    &json!({"status": "checkpointed", "depth": depth, "frontier": frontier, "checkpoint": path.display().to_string()}),
                )?;
            } else {
                writeln!(out, "stopped at depth {depth}; {frontier} frontier states saved to {}", path.display())?;
            }
            return Ok(EXIT_STOPPED);
        }
    };
    if let Some(path) = &args.out {
        enumeration::save(&set, path).map_err(Failure::usage)?;
    }
    let agreement = agreement(args, &set)?;
    let code = match &agreement {
        Some((_, false)) => EXIT_PROPERTY,
        _ => 0,
    };
    if args.json {
        print_json(
            out,
            &json!({
                "status": "completed",
                "ell": set.ell,
                "mode": mode.as_str(),
                "count": set.count(),
                "explored_states": set.meta.explored_states,
                "max_frontier": set.meta.max_frontier,
                "agreement": agreement.as_ref().map(|(note, same)| json!({"matches_full": same, "note": note})),
            }),
        )?;
    } else {
        writeln!(out, "Z_{} = {}", set.ell, set.count())?;
        if let Some((note, _)) = &agreement {
            writeln!(out, "{note}")?;
        }
    }
    Ok(code)
}

/// For a scheduled run, compares against a full enumeration: recomputed for
/// small trees, read from `--compare` otherwise.
fn agreement(args: &EnumerateArgs, set: &StableSet) -> Result<Option<(String, bool)>, Failure> {
    if set.meta.mode != Mode::Scheduled {
        return Ok(None);
    }
    let full = if let Some(path) = &args.compare {
        enumeration::load(path).map_err(Failure::usage)?
    } else if set.ell <= 3 {
        match Enumerator::new(set.ell, Mode::Full)?.run()? {
            Outcome::Completed(full) => full,
            Outcome::Checkpointed { .. } => unreachable!("no stopping condition was set"),
        }
    } else {
        let note = format!("agreement with full mode not checked at ell={}; pass --compare with a full corpus", set.ell);
        return Ok(Some((note, true)));
    };
    if full.ell != set.ell {
        return Err(Failure::usage(format!("comparison corpus has {} layers, not {}", full.ell, set.ell)));
    }
    let same = full.keys() == set.keys();
    let note = if same {
        format!("agreement: scheduled mode reaches the same {} configurations as full mode", full.count())
    } else {
        format!("DISAGREEMENT: scheduled mode found {}, full mode {}", set.count(), full.count())
    };
    Ok(Some((note, same)))
}

fn load_source(source: &SourceArgs) -> Result<StableSet, Failure> {
    match (&source.input, source.ell) {
        (Some(path), _) => enumeration::load(path).map_err(Failure::usage),
        (None, Some(ell)) => Ok(enumeration::enumerate(ell, Mode::Full)?),
        (None, None) => Err(Failure::usage("pass --input or --ell")),
    }
}

fn extract_orders(out: &mut impl Write, source: &SourceArgs, depth: u32, json: bool) -> CmdResult {
    let set = load_source(source)?;
    let orders = enumeration::extract_subtree_orders(&set, depth)?;
    let signatures: Vec<String> = orders.iter().map(ToString::to_string).collect();
    if json {
        print_json(
            out,
            &json!({"ell": set.ell, "depth": depth, "count": orders.len(), "signatures": signatures}),
        )?;
    } else {
        writeln!(out, "observed T_{depth} at ell={}: {}", set.ell, orders.len())?;
        for s in &signatures {
            writeln!(out, "{s}")?;
        }
    }
    Ok(0)
}

fn selected_properties(arg: PropertyArg) -> Vec<Property> {
    match arg {
        PropertyArg::All => vec![
            Property::Anchors,
            Property::Extremes,
            Property::Zigzag,
            Property::Forbidden,
            Property::Ballot,
        ],
        PropertyArg::Anchors => vec![Property::Anchors],
        PropertyArg::Extremes => vec![Property::Extremes],
        PropertyArg::Zigzag => vec![Property::Zigzag],
        PropertyArg::Penultimate => vec![Property::Penultimate],
        PropertyArg::Ballot => vec![Property::Ballot],
        PropertyArg::Forbidden => vec![Property::Forbidden],
    }
}

fn check(out: &mut impl Write, input: &Path, arg: PropertyArg, mode: PenultimateMode, json: bool) -> CmdResult {
    let set = enumeration::load(input).map_err(Failure::usage)?;
    let (properties, skipped): (Vec<Property>, Vec<Property>) =
        selected_properties(arg).into_iter().partition(|p| set.ell >= p.min_layers());
    let mut failed = vec![0usize; properties.len()];
    let mut failed_configs = 0usize;
    let mut rows = Vec::new();
    for (i, config) in set.configs().iter().enumerate() {
        let mut failures = Vec::new();
        for (k, &p) in properties.iter().enumerate() {
            let report = labeled::check(config, p, mode).map_err(Failure::usage)?;
            if !report.passed {
                failed[k] += 1;
                failures.push(report);
            }
        }
        if !failures.is_empty() {
            failed_configs += 1;
        }
        if json {
            rows.push(json!({
                "index": i + 1,
                "passed": failures.is_empty(),
                "failures": serde_json::to_value(&failures).expect("reports serialize"),
            }));
        } else if failures.is_empty() {
            writeln!(out, "#{} pass", i + 1)?;
        } else {
            for report in &failures {
                let w = &report.violations[0];
                let related: Vec<String> = w.related.iter().map(ToString::to_string).collect();
                writeln!(
                    out,
                    "#{} FAIL {}: vertex {} vs [{}], labels [{}], expected {} ({} violations) in {}",
                    i + 1,
                    report.property,
                    w.vertex,
                    related.join(","),
                    join(&w.labels),
                    w.expected,
                    report.violations.len(),
                    config
                )?;
            }
        }
    }
    let summary: Vec<Value> = properties
        .iter()
        .zip(&failed)
        .map(|(p, &f)| json!({"property": p.as_str(), "passed": set.count() - f, "failed": f}))
        .collect();
    if json {
        print_json(
            out,
            &json!({
                "ell": set.ell,
                "count": set.count(),
                "penultimate_mode": serde_json::to_value(mode).expect("mode serializes"),
                "summary": summary,
                "skipped": skipped.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
                "failed_configs": failed_configs,
                "configs": rows,
            }),
        )?;
    } else {
        for (p, &f) in properties.iter().zip(&failed) {
            writeln!(out, "{p}: {} pass, {f} fail", set.count() - f)?;
        }
        for p in &skipped {
            writeln!(out, "{p}: skipped (needs at least {} layers)", p.min_layers())?;
        }
        if failed_configs == 0 {
            writeln!(out, "all {} configurations pass", set.count())?;
        } else {
            writeln!(out, "{failed_configs} of {} configurations fail", set.count())?;
        }
    }
    Ok(if failed_configs == 0 { 0 } else { EXIT_PROPERTY })
}

fn show(value: &BigNat, exact: bool) -> String {
    let text = value.to_str_radix(10);
    if exact || text.len() <= FULL_DIGITS {
        text
    } else {
        format!("~{}", bounds::format_sci(value, 2))
    }
}

fn pair_json(pair: &BoundPair) -> Value {
    json!({"t": pair.t.to_str_radix(10), "z": pair.z.to_str_radix(10)})
}

fn parse_table(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::usage(format!("bad --table {text:?}; expected A..B"));
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (text, text),
    };
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn bounds_cmd(out: &mut impl Write, args: &BoundsArgs) -> CmdResult {
    let fail = |e: BoundsError| Failure::usage(e);
    if let Some(text) = &args.table {
        let (a, b) = parse_table(text)?;
        let rows = bounds::compare_table(a..=b).map_err(fail)?;
        if args.json {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "ell": r.ell,
                        "naive": pair_json(&r.naive),
                        "zigzag": pair_json(&r.zigzag),
                        "ballot": pair_json(&r.ballot),
                        "ballot_conditional": true,
                        "zigzag_z_below_t": r.zigzag_z_below_t,
                        "ballot_z_below_t": r.ballot_z_below_t,
                        "z_below_root_factorial": r.z_below_root_factorial,
                    })
                })
                .collect();
            print_json(out, &json!({"rows": rows}))?;
            return Ok(0);
        }
        writeln!(out, "ell | naive Z | zigzag Z | ballot Z (conditional)")?;
        for r in &rows {
            writeln!(
                out,
                "{} | {} | {} | {}",
                r.ell,
                show(&r.naive.z, args.exact),
                show(&r.zigzag.z, args.exact),
                show(&r.ballot.z, args.exact)
            )?;
        }
        for r in &rows {
            let yes = |b: bool| if b { "yes" } else { "NO" };
            let factorial = r.z_below_root_factorial.map_or("n/a", yes);
            writeln!(
                out,
                "ell={}: Z_zz<T_zz {}, Z_b<T_b {}, both Z below (2^ell-7)! {}",
                r.ell,
                yes(r.zigzag_z_below_t),
                yes(r.ballot_z_below_t),
                factorial
            )?;
        }
        return Ok(0);
    }

    let ell = args.ell.expect("clap requires --ell without --table");
    let wanted = |m: MethodArg| args.method == m || args.method == MethodArg::All;
    let mut results: Vec<(&str, BoundPair, bool)> = Vec::new();
    if wanted(MethodArg::Naive) {
        results.push(("naive", bounds::naive_bounds(ell).map_err(fail)?, false));
    }
    if wanted(MethodArg::Zigzag) {
        match bounds::zigzag_bound(ell) {
            Ok(pair) => results.push(("zigzag", pair, false)),
            Err(BoundsError::EllTooSmall { .. }) if args.method == MethodArg::All => {}
            Err(e) => return Err(fail(e)),
        }
    }
    if wanted(MethodArg::Ballot) {
        results.push(("ballot", bounds::ballot_bound(ell).map_err(fail)?, true));
    }
    if args.json {
        let mut map = serde_json::Map::new();
        map.insert("ell".into(), json!(ell));
        for (name, pair, conditional) in &results {
            let mut entry = pair_json(pair);
            entry["conditional"] = json!(conditional);
            map.insert((*name).into(), entry);
        }
        print_json(out, &Value::Object(map))?;
    } else {
        for (name, pair, conditional) in &results {
            let tag = if *conditional { " (conditional)" } else { "" };
            writeln!(
                out,
                "{name}: T={}{tag}, Z={}{tag}",
                show(&pair.t, args.exact),
                show(&pair.z, args.exact)
            )?;
        }
    }
    Ok(0)
}

fn sequence(out: &mut impl Write, name: SequenceName, count: u64, json: bool) -> CmdResult {
    if count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    let terms = unlabeled::sequence(name, count).map_err(Failure::usage)?;
    if json {
        print_json(out, &json!({"name": name.as_str(), "count": count, "terms": terms}))?;
    } else {
        writeln!(out, "{}", join(&terms))?;
    }
    Ok(0)
}
