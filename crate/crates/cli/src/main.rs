use std::fs::File;
use std::io::{self, BufRead, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use timed_tester::distance::timed_edit_distance;
use timed_tester::harness::{
    run_experiment, stream_test, write_csv, ExperimentConfig, FarMode,
};
use timed_tester::model::{membership_exact, parse_word_record, validate_automaton, AutomatonSpec};
use timed_tester::region::build_region_automaton;
use timed_tester::sampling::{sample_factors, ReservoirSampler, SampleSet, DEFAULT_RETRY_CAP};
use timed_tester::structure::{components_document, condense};
use timed_tester::tester::{word_tester, Prepared, TesterParams, Verdict};
use timed_tester::{Letter, TimeValue, TimedAutomaton, TimedWord};

const SEED_ENV: &str = "TIMED_TESTER_SEED";

#[derive(Parser)]
#[command(name = "timed-tester", version, about = "Timed edit distance and a property tester for timed automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an automaton file and list every problem found.
    Validate { automaton: PathBuf },
    /// Print the region automaton as JSON, or as DOT with --dot.
    Regions {
        automaton: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Print the component graph with a thickness verdict per component.
    Components { automaton: PathBuf },
    /// Timed edit distance between two word files.
    Distance { first: PathBuf, second: PathBuf },
    /// Exact membership of a word, with a witness run when accepted.
    Membership {
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long)]
        word: PathBuf,
    },
    /// Draw weighted factors from a word file or from stdin.
    Sample(SampleArgs),
    /// Run the tester on one word.
    Test(TestArgs),
    /// Accuracy experiment on generated accepted and far words; writes CSV.
    Experiment(ExperimentArgs),
    /// Run the tester in one pass over a JSON-lines stream.
    Stream(StreamArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, conflicts_with = "stdin_stream")]
    word: Option<PathBuf>,
    #[arg(long)]
    stdin_stream: bool,
    #[arg(long)]
    l: usize,
    #[arg(long)]
    k: TimeValue,
    #[arg(long)]
    seed: Option<u64>,
    /// Extra reservoir slots used as replacement draws in stream mode.
    #[arg(long, default_value_t = 4)]
    spare: usize,
}

#[derive(Args)]
struct TesterArgs {
    #[arg(long)]
    automaton: PathBuf,
    #[arg(long)]
    epsilon: TimeValue,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k_override: Option<TimeValue>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    sample_weight_multiplier: u32,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    tester: TesterArgs,
    #[arg(long, conflicts_with = "stdin_stream", required_unless_present = "stdin_stream")]
    word: Option<PathBuf>,
    #[arg(long)]
    stdin_stream: bool,
    #[arg(long)]
    emit_witness: bool,
    #[arg(long, default_value_t = 4)]
    spare: usize,
}

#[derive(Args)]
struct StreamArgs {
    #[command(flatten)]
    tester: TesterArgs,
    /// Read from this file instead of stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    spare: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Heavy,
    Spread,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    automaton: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<TimeValue>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    target_weight: Option<TimeValue>,
    /// Relative farness aimed for by the perturbation; defaults to epsilon.
    #[arg(long)]
    budget: Option<TimeValue>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    sample_weight_multiplier: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    k_override: Option<TimeValue>,
    /// Fill the wall_time_us column.
    #[arg(long)]
    timing: bool,
    /// CSV destination; stdout when absent or `-`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    format: Option<String>,
    automaton: Option<PathBuf>,
    epsilon: Option<TimeValue>,
    trials: Option<usize>,
    seed: Option<u64>,
    target_weight: Option<TimeValue>,
    budget: Option<TimeValue>,
    sample_weight_multiplier: Option<u32>,
    mode: Option<FarMode>,
    k_override: Option<TimeValue>,
    timing: Option<bool>,
    output: Option<PathBuf>,
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{} is not an unsigned integer: {:?}", SEED_ENV, v)),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}

fn load_automaton(path: &Path) -> Result<TimedAutomaton> {
    TimedAutomaton::from_path(path).with_context(|| format!("reading automaton {}", path.display()))
}

fn load_word(path: &Path) -> Result<TimedWord> {
    TimedWord::from_path(path).with_context(|| format!("reading word {}", path.display()))
}

fn letters_from<R: BufRead>(reader: R) -> impl Iterator<Item = timed_tester::Result<Letter>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(line) => parse_word_record(&line, i + 1).transpose(),
        Err(e) => Some(Err(e.into())),
    })
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn verdict_json(v: &Verdict) -> Value {
    let mut out = json!({
        "verdict": v.label(),
        "pi_tried": v.pi_tried,
        "samples": v.samples,
        "fallback_used": v.fallback_used,
        "k_used": v.k_used,
        "samples_drawn": v.samples_drawn,
        "warnings": v.warnings,
    });
    if let Some(w) = &v.witness {
        out["witness"] = serde_json::to_value(w).expect("witness serializes");
    }
    out
}

fn tester_setup(args: &TesterArgs) -> Result<(Prepared, TesterParams, u64)> {
    let prepared = Prepared::new(load_automaton(&args.automaton)?)?;
    let mut params = prepared.params(args.epsilon.clone(), args.sample_weight_multiplier)?;
    if let Some(k) = &args.k_override {
        params = params.with_k(k.clone());
    }
    Ok((prepared, params, resolve_seed(args.seed)?))
}

fn emit_samples(set: &SampleSet) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if set.degenerate {
        writeln!(out, "{}", json!({ "degenerate": true }))?;
    }
    for f in &set.factors {
        writeln!(out, "{}", serde_json::to_string(f)?)?;
    }
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = AutomatonSpec::from_json(&text)?;
    let report = validate_automaton(&spec);
    print_json(&json!({ "valid": report.is_ok(), "violations": report.violations }))?;
    Ok(if report.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let file: ConfigFile = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => ConfigFile::default(),
    };
    if let Some(tag) = &file.format {
        if tag != "timed-tester/1" {
            bail!("unsupported config format {:?}", tag);
        }
    }
    let automaton = args.automaton.or(file.automaton).context("an automaton is required")?;
    let epsilon = args.epsilon.or(file.epsilon).context("epsilon is required")?;
    let trials = args.trials.or(file.trials).unwrap_or(100);
    let seed = resolve_seed(args.seed.or(file.seed))?;
    let target = args.target_weight.or(file.target_weight).unwrap_or_else(|| TimeValue::from_integer(100));
    let mut config = ExperimentConfig::new(epsilon, trials, seed, target);
    config.budget = args.budget.or(file.budget);
    config.sample_weight_multiplier = args.sample_weight_multiplier.or(file.sample_weight_multiplier).unwrap_or(1);
    config.mode = match args.mode {
        Some(ModeArg::Heavy) => FarMode::HeavyLetter,
        Some(ModeArg::Spread) => FarMode::Spread,
        None => file.mode.unwrap_or(FarMode::HeavyLetter),
    };
    config.k_override = args.k_override.or(file.k_override);
    config.timing = args.timing || file.timing.unwrap_or(false);
    let prepared = Prepared::new(load_automaton(&automaton)?)?;
    let (rows, summary) = run_experiment(&prepared, &config)?;
    match args.output.or(file.output).filter(|p| p.as_os_str() != "-") {
        Some(p) => {
            let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(BufWriter::new(f), &rows, &summary, seed)?;
        }
        None => write_csv(io::stdout().lock(), &rows, &summary, seed)?,
    }
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { automaton } => return cmd_validate(&automaton),
        Command::Regions { automaton, dot } => {
            let a = load_automaton(&automaton)?;
            let ra = build_region_automaton(&a)?;
            if dot {
                print!("{}", ra.to_dot(&a));
            } else {
                print_json(&ra.to_document(&a))?;
            }
        }
        Command::Components { automaton } => {
            let a = load_automaton(&automaton)?;
            let ra = build_region_automaton(&a)?;
            let graph = condense(&ra);
            print_json(&components_document(&graph, &ra, &a))?;
        }
        Command::Distance { first, second } => {
            let result = timed_edit_distance(&load_word(&first)?, &load_word(&second)?);
            print_json(&result)?;
        }
        Command::Membership { automaton, word } => {
            let a = load_automaton(&automaton)?;
            let m = membership_exact(&a, &load_word(&word)?)?;
            print_json(&json!({ "accepted": m.accepted, "witness": m.witness }))?;
        }
        Command::Sample(args) => {
            if args.l == 0 {
                bail!("--l must be at least 1");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(resolve_seed(args.seed)?);
            let set = match &args.word {
                Some(p) => sample_factors(&load_word(p)?, args.l, &args.k, &mut rng, DEFAULT_RETRY_CAP),
                None => {
                    if !args.stdin_stream {
                        bail!("give --word or --stdin-stream");
                    }
                    let mut sampler = ReservoirSampler::new(args.l, args.spare, args.k.clone());
                    for letter in letters_from(io::stdin().lock()) {
                        sampler.push(&letter?, &mut rng);
                    }
                    sampler.finish()
                }
            };
            emit_samples(&set)?;
        }
        Command::Test(args) => {
            let (prepared, params, seed) = tester_setup(&args.tester)?;
            let verdict = match &args.word {
                Some(p) => {
                    let w = load_word(p)?;
                    word_tester(&w, &prepared, &params, &mut ChaCha8Rng::seed_from_u64(seed), args.emit_witness)
                }
                None => stream_test(letters_from(io::stdin().lock()), &prepared, &params, seed, args.spare)?.0,
            };
            print_json(&verdict_json(&verdict))?;
        }
        Command::Stream(args) => {
            let (prepared, params, seed) = tester_setup(&args.tester)?;
            let reader: Box<dyn Read> = match &args.input {
                Some(p) => Box::new(File::open(p).with_context(|| format!("opening {}", p.display()))?),
                None => Box::new(io::stdin()),
            };
            let (verdict, stats) = stream_test(letters_from(io::BufReader::new(reader)), &prepared, &params, seed, args.spare)?;
            let mut out = verdict_json(&verdict);
            out["stream"] = serde_json::to_value(&stats)?;
            print_json(&out)?;
        }
        Command::Experiment(args) => cmd_experiment(args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) if e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
