//! `aqd`: build construction trees, evaluate properties and formulas, solve
//! and play games, and run the verification pipelines.

mod play;

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use aqd_core::game::{solve_minimax, Board, GameInstance, GameVariant, SolverConfig, Transcript, Winner};
use aqd_core::harness::{
    construction_pair, describe_instance, exhaustive_spoiler_sweep, generate_formula_pool, lower_bound_pipeline,
    random_spoiler_sweep, recursive_strategy, theorem1_spotcheck, verify_construction, PipelineConfig, SweepLimits,
};
use aqd_core::logic::{eval_p_direct, parse_formula, Formula};
use aqd_core::{build_construction, NodeId, Role, Tree};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "aqd", version, about = "Trees, properties and Ehrenfeucht games for alternating quantifier depth")]
struct Cli {
    /// Emit reports as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construction trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// The recursive properties P_i.
    #[command(subcommand)]
    Prop(PropCmd),
    /// Formula metrics and evaluation.
    Formula(FormulaArgs),
    /// Solve, play and replay games.
    #[command(subcommand)]
    Game(GameCmd),
    /// Verification pipelines.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Build T1 or T2 with parameters (s, k, m).
    Build {
        #[arg(long, value_parser = parse_role)]
        role: Role,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Write the tree as JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a Graphviz rendering.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PropCmd {
    /// Evaluate P_i at a vertex (the root by default).
    Eval {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        vertex: Option<NodeId>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaOp {
    Qd,
    Aqd,
    Eval,
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(value_enum)]
    op: FormulaOp,
    #[arg(long)]
    formula: String,
    /// Tree to evaluate a sentence on (required by `eval`).
    #[arg(long)]
    tree: Option<PathBuf>,
}

#[derive(Args)]
struct GameArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// `switch:s,r`, `batch:s,k` or `sizes:i1,i2,...`
    #[arg(long, value_parser = parse_variant)]
    variant: GameVariant,
    /// JSON list of `[left, right]` vertex pairs fixed before round one.
    #[arg(long)]
    designated: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Disable symmetry pruning.
    #[arg(long)]
    no_prune: bool,
    #[arg(long, default_value_t = 200)]
    max_nodes: usize,
    #[arg(long, default_value_t = 6)]
    max_rounds: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            prune_symmetry: !self.no_prune,
            max_nodes: self.max_nodes,
            max_rounds: self.max_rounds,
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expect {
    Spoiler,
    Duplicator,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Human {
    Spoiler,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Recursive strategy if it applies, else the solver.
    Auto,
    Recursive,
    Minimax,
}

#[derive(Subcommand)]
enum GameCmd {
    /// Decide the winner exactly.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Exit with status 1 unless this player wins.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Play Spoiler against the engine from stdin.
    Play {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value = "spoiler")]
        human: Human,
        #[arg(long, value_enum, default_value = "auto")]
        engine: Engine,
        /// Where to save the transcript.
        #[arg(long, default_value = "transcript.txt")]
        transcript: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Replay a saved transcript and check its recorded result.
    Replay {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
    },
}

#[derive(Args)]
struct Params {
    #[arg(long)]
    s: usize,
    #[arg(long)]
    k: usize,
    /// Defaults to s * k.
    #[arg(long)]
    m: Option<usize>,
}

impl Params {
    fn m(&self) -> usize {
        self.m.unwrap_or(self.s * self.k)
    }
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// T1 satisfies KEIN_s and T2 does not.
    Construction {
        #[command(flatten)]
        params: Params,
    },
    /// Run every (or many random) Spoiler lines against a Duplicator strategy.
    Sweep {
        #[command(flatten)]
        params: Params,
        /// Defaults to `batch:s,k`.
        #[arg(long, value_parser = parse_variant)]
        variant: Option<GameVariant>,
        #[arg(long)]
        designated: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        engine: Engine,
        /// Sample this many random lines instead of sweeping exhaustively.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20_000_000)]
        max_lines: u128,
        /// Only openings on this board (`left` or `right`).
        #[arg(long, value_parser = parse_board)]
        start: Option<Board>,
        /// Skip the per-round strategy self-check.
        #[arg(long)]
        no_selfcheck: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Compare a switch-budget game with a seeded pool of sentences.
    Theorem1 {
        /// Tree files; the construction pair (s, k, m) is used otherwise.
        #[arg(long, requires = "right")]
        left: Option<PathBuf>,
        #[arg(long, requires = "left")]
        right: Option<PathBuf>,
        #[arg(long, requires = "k")]
        s: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        switches: usize,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 240)]
        pool_size: usize,
        #[arg(long, default_value_t = 2)]
        qd_max: usize,
        #[arg(long, default_value_t = 2)]
        aqd_max: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// The full lower-bound argument for KEIN_s with m = s * k.
    LowerBound {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2_000_000)]
        max_lines: u128,
        #[arg(long, default_value_t = 10_000)]
        random_lines: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn parse_role(text: &str) -> Result<Role, String> {
    text.parse().map_err(|e: aqd_core::TreeError| e.to_string())
}

fn parse_variant(text: &str) -> Result<GameVariant, String> {
    GameVariant::parse(text).map_err(|e| e.to_string())
}

fn parse_board(text: &str) -> Result<Board, String> {
    match text {
        "left" | "L" | "l" => Ok(Board::Left),
        "right" | "R" | "r" => Ok(Board::Right),
        _ => Err(format!("unknown board `{text}`, expected left or right")),
    }
}

/// What a finished command reports back to `main`.
enum Status {
    Pass,
    Fail,
}

impl From<bool> for Status {
    fn from(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Tree(TreeCmd::Build { role, s, k, m, out, dot }) => tree_build(cli.json, *role, *s, *k, *m, out, dot),
        Command::Prop(PropCmd::Eval { tree, i, vertex }) => prop_eval(cli.json, tree, *i, *vertex),
        Command::Formula(args) => formula(cli.json, args),
        Command::Game(GameCmd::Solve { game, solver, expect }) => game_solve(cli.json, game, solver, *expect),
        Command::Game(GameCmd::Play { game, human: Human::Spoiler, engine, transcript, solver }) => {
            let instance = load_game(game)?;
            let stdin = std::io::stdin();
            let mut out: Box<dyn std::io::Write> =
                if cli.json { Box::new(std::io::stderr()) } else { Box::new(std::io::stdout()) };
            let report = play::play(&instance, *engine, &solver.config(), stdin.lock(), &mut *out)?;
            drop(out);
            fs::write(transcript, report.transcript.to_string())
                .with_context(|| format!("writing {}", transcript.display()))?;
            if cli.json {
                say(&serde_json::to_string_pretty(&report.to_json(transcript))?)?;
            } else {
                say(&format!("transcript saved to {}", transcript.display()))?;
            }
            Ok(Status::Pass)
        }
        Command::Game(GameCmd::Replay { left, right, transcript }) => game_replay(cli.json, left, right, transcript),
        Command::Verify(v) => verify(cli.json, v),
    }
}

fn say(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_tree(path: &Path) -> Result<Arc<Tree>> {
    Ok(Arc::new(Tree::from_json(&read(path)?).with_context(|| format!("loading tree {}", path.display()))?))
}

fn load_pairs(path: &Path) -> Result<Vec<(NodeId, NodeId)>> {
    serde_json::from_str(&read(path)?)
        .with_context(|| format!("{}: expected a JSON list of [left, right] pairs", path.display()))
}

fn load_game(args: &GameArgs) -> Result<GameInstance> {
    let designated = match &args.designated {
        Some(p) => load_pairs(p)?,
        None => Vec::new(),
    };
    Ok(GameInstance::new(load_tree(&args.left)?, load_tree(&args.right)?, args.variant.clone(), designated)?)
}

fn emit(json: bool, value: serde_json::Value, text: impl FnOnce() -> String) -> Result<()> {
    if json {
        say(&serde_json::to_string_pretty(&value)?)?;
    } else {
        say(&text())?;
    }
    Ok(())
}

fn tree_build(
    json: bool,
    role: Role,
    s: usize,
    k: usize,
    m: usize,
    out: &Option<PathBuf>,
    dot: &Option<PathBuf>,
) -> Result<Status> {
    let tree = build_construction(role, s, k, m)?;
    if let Some(path) = dot {
        fs::write(path, tree.to_dot()).with_context(|| format!("writing {}", path.display()))?;
    }
    match out {
        Some(path) => {
            fs::write(path, tree.to_json_pretty()).with_context(|| format!("writing {}", path.display()))?;
            emit(
                json,
                json!({ "role": role.to_string(), "s": s, "k": k, "m": m, "nodes": tree.len(), "out": path }),
                || format!("{role}({s},{k},{m}): {} nodes written to {}", tree.len(), path.display()),
            )?;
        }
        None => say(&tree.to_json_pretty())?,
    }
    Ok(Status::Pass)
}

fn prop_eval(json: bool, path: &Path, i: usize, vertex: Option<NodeId>) -> Result<Status> {
    let tree = load_tree(path)?;
    let v = vertex.unwrap_or(tree.root());
    tree.check_node(v)?;
    let value = eval_p_direct(&tree, i, v);
    emit(json, json!({ "i": i, "vertex": v, "value": value }), || value.to_string())?;
    Ok(Status::Pass)
}

fn formula(json: bool, args: &FormulaArgs) -> Result<Status> {
    let f: Formula = parse_formula(&args.formula)?;
    match args.op {
        FormulaOp::Qd => emit(json, json!({ "formula": f.to_string(), "qd": f.qd() }), || f.qd().to_string())?,
        FormulaOp::Aqd => {
            let aqd = f.aqd_syntactic();
            emit(json, json!({ "formula": f.to_string(), "aqd": aqd }), || aqd.to_string())?
        }
        FormulaOp::Eval => {
            let Some(path) = &args.tree else { bail!("`formula eval` needs --tree") };
            if !f.is_sentence() {
                let free: Vec<String> = f.free_vars().into_iter().collect();
                bail!("formula has free variables: {}", free.join(", "));
            }
            let value = f.holds(&*load_tree(path)?)?;
            emit(json, json!({ "formula": f.to_string(), "value": value }), || value.to_string())?
        }
    }
    Ok(Status::Pass)
}

fn winner_name(w: Winner) -> &'static str {
    match w {
        Winner::Spoiler => "spoiler",
        Winner::Duplicator => "duplicator",
    }
}

fn game_solve(json: bool, game: &GameArgs, solver: &SolverArgs, expect: Option<Expect>) -> Result<Status> {
    let instance = load_game(game)?;
    let outcome = solve_minimax(&instance, &solver.config())?;
    let line: Option<Vec<String>> = outcome
        .spoiler_line
        .as_ref()
        .map(|l| l.iter().map(|(mv, reply)| format!("{mv} {}:{reply}", mv.board.other().letter())).collect());
    emit(
        json,
        json!({
            "instance": describe_instance(&instance),
            "winner": winner_name(outcome.winner),
            "states_explored": outcome.states_explored,
            "spoiler_line": line,
        }),
        || {
            let mut text = format!("{}: {} wins", describe_instance(&instance), winner_name(outcome.winner));
            if let Some(l) = &line {
                text.push_str(&format!("\nspoiler line: {}", l.join(", ")));
            }
            text
        },
    )?;
    let ok = match expect {
        None => true,
        Some(Expect::Spoiler) => outcome.winner == Winner::Spoiler,
        Some(Expect::Duplicator) => outcome.winner == Winner::Duplicator,
    };
    Ok(ok.into())
}

fn game_replay(json: bool, left: &Path, right: &Path, path: &Path) -> Result<Status> {
    let transcript = Transcript::parse(&read(path)?)?;
    let instance = GameInstance::new(
        load_tree(left)?,
        load_tree(right)?,
        transcript.variant.clone(),
        transcript.designated.clone(),
    )?;
    let (state, check) = transcript.replay(&instance)?;
    let result = aqd_core::game::transcript::describe_result(&check);
    let matches = transcript.result.as_ref().is_none_or(|r| *r == result);
    emit(
        json,
        json!({
            "instance": describe_instance(&instance),
            "rounds": state.round_index,
            "result": result,
            "recorded": transcript.result,
            "matches": matches,
        }),
        || {
            let mut text = format!("{} rounds replayed: {result}", state.round_index);
            if !matches {
                text.push_str(&format!(" (transcript recorded {})", transcript.result.as_deref().unwrap_or("")));
            }
            text
        },
    )?;
    Ok(matches.into())
}

/// `None` when the solver finds a Spoiler win, so nothing can be swept.
fn sweep_strategy(
    instance: &GameInstance,
    engine: Engine,
    solver: &SolverConfig,
) -> Result<Option<Box<dyn aqd_core::game::Strategy>>> {
    if engine != Engine::Minimax {
        match recursive_strategy(instance) {
            Ok(s) => return Ok(Some(s)),
            Err(e) if engine == Engine::Recursive => return Err(e.into()),
            Err(_) => {}
        }
    }
    let outcome = solve_minimax(instance, solver)?;
    Ok(outcome.duplicator_strategy().map(|s| Box::new(s) as Box<dyn aqd_core::game::Strategy>))
}

fn verify(json: bool, cmd: &VerifyCmd) -> Result<Status> {
    match cmd {
        VerifyCmd::Construction { params } => {
            let r = verify_construction(params.s, params.k, params.m())?;
            emit(json, serde_json::to_value(&r)?, || {
                format!(
                    "T1({s},{k},{m}) [{} nodes] KEIN_{s}: {} / {}; T2 [{} nodes]: {} / {} (property table / formula) -> {}",
                    r.t1_nodes,
                    r.direct.0,
                    r.formula.0,
                    r.t2_nodes,
                    r.direct.1,
                    r.formula.1,
                    if r.passed { "PASS" } else { "FAIL" },
                    s = r.s,
                    k = r.k,
                    m = r.m
                )
            })?;
            Ok(r.passed.into())
        }
        VerifyCmd::Sweep {
            params,
            variant,
            designated,
            engine,
            random,
            seed,
            max_lines,
            start,
            no_selfcheck,
            solver,
        } => {
            let (left, right) = construction_pair(params.s, params.k, params.m())?;
            let variant =
                variant.clone().unwrap_or(GameVariant::FixedBatches { batches: params.s, batch_len: params.k });
            let designated = match designated {
                Some(p) => load_pairs(p)?,
                None => Vec::new(),
            };
            let instance = GameInstance::new(left, right, variant, designated)?;
            let Some(strategy) = sweep_strategy(&instance, *engine, &solver.config())? else {
                let what = describe_instance(&instance);
                emit(json, json!({ "instance": what, "winner": "spoiler", "passed": false }), || {
                    format!("{what}: Spoiler wins, so Duplicator has no strategy to sweep -> FAIL")
                })?;
                return Ok(Status::Fail);
            };
            let limits = SweepLimits { max_lines: *max_lines, start_board: *start, selfcheck: !no_selfcheck };
            let report = match random {
                Some(n) => random_spoiler_sweep(&instance, &strategy, *n, *seed, &limits)?,
                None => exhaustive_spoiler_sweep(&instance, &strategy, &limits)?,
            };
            emit(json, serde_json::to_value(&report)?, || {
                let mut text = format!(
                    "{} [{}] {} sweep: {} lines, {} losses, {} self-check failures, {} ms -> {}",
                    report.instance,
                    report.strategy,
                    report.mode,
                    report.lines,
                    report.losses,
                    report.selfcheck_failures,
                    report.wall_ms,
                    if report.passed() { "PASS" } else { "FAIL" }
                );
                for (label, t) in &report.selfcheck {
                    text.push_str(&format!("\n  {label}: {} passed, {} failed", t.passed, t.failed));
                }
                if let Some(loss) = &report.first_loss {
                    text.push_str(&format!("\nfirst loss: {} ({})", loss.moves.join(" "), loss.reason));
                }
                text
            })?;
            Ok(report.passed().into())
        }
        VerifyCmd::Theorem1 { left, right, s, k, m, switches, rounds, seed, pool_size, qd_max, aqd_max, solver } => {
            let (l, r) = match (left, right, s, k) {
                (Some(l), Some(r), _, _) => (load_tree(l)?, load_tree(r)?),
                (None, None, Some(s), Some(k)) => construction_pair(*s, *k, m.unwrap_or(s * k))?,
                _ => bail!("give either --left and --right or --s and --k"),
            };
            let pool = generate_formula_pool(*seed, *qd_max, *aqd_max, *pool_size);
            let report = theorem1_spotcheck(l, r, *switches, *rounds, &pool, &solver.config())?;
            emit(json, serde_json::to_value(&report)?, || {
                let mut text = format!(
                    "switch:{},{}: {} wins; {} of {} pooled sentences eligible, {} disagree",
                    report.switches,
                    report.rounds,
                    winner_name(report.winner),
                    report.checked,
                    pool.sentences.len(),
                    report.disagreeing.len()
                );
                if let Some(w) = &report.witness {
                    text.push_str(&format!("\nwitness: {w}"));
                }
                if report.counterexample {
                    text.push_str(&format!("\nCOUNTEREXAMPLE: {}", report.disagreeing[0]));
                }
                text
            })?;
            Ok((!report.counterexample).into())
        }
        VerifyCmd::LowerBound { s, k, max_lines, random_lines, seed } => {
            let config = PipelineConfig {
                sweep: SweepLimits { max_lines: *max_lines, ..SweepLimits::default() },
                random_lines: *random_lines,
                seed: *seed,
                ..PipelineConfig::default()
            };
            let report = lower_bound_pipeline(*s, *k, &config)?;
            emit(json, serde_json::to_value(&report)?, || {
                let mut text = String::new();
                for step in &report.steps {
                    text.push_str(&format!(
                        "[{}] {}: {} ({})\n",
                        if step.passed { "PASS" } else { "FAIL" },
                        step.step,
                        step.detail,
                        step.method
                    ));
                }
                match &report.verdict {
                    Some(v) => text.push_str(&format!("verdict: {v}")),
                    None => text.push_str("no verdict"),
                }
                text
            })?;
            Ok(report.passed().into())
        }
    }
}
