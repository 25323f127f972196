//! `ema`: run, translate, check and compare evolving multialgebras.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ema_core::doc::{ChoicesDoc, DocKind, Document, InputDoc};
use ema_core::engine::{reachable_words, run, ChoiceSource, Ema, Input, Outcome, DEFAULT_EXTERNAL_BOUND};
use ema_core::translate::{
    check_class, compare_grammar, compare_tm, compare_tram, ema_to_grammar, ema_to_tm, ema_to_tram, gra_shape,
    grammar_to_ema, tm_to_ema, tram_to_ema, ClassId, Lockstep, TranslateError,
};

const EXIT_REJECTED: u8 = 1;
const EXIT_STUCK: u8 = 2;
const EXIT_STEP_LIMIT: u8 = 3;
const EXIT_CLASS: u8 = 4;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "ema", version, about = "Run, translate, check and compare evolving multialgebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an EMA (machine documents are compiled first) and print its trace.
    Run {
        file: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Scripted branches and external values.
        #[arg(long, conflicts_with = "seed")]
        choices: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Seeded external naturals and integers are drawn from `[0, bound)`.
        #[arg(long, requires = "seed", default_value_t = DEFAULT_EXTERNAL_BOUND)]
        external_bound: u64,
        /// Also write the trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the words reachable within this many steps instead of a trace.
        #[arg(long, conflicts_with_all = ["choices", "seed", "trace"])]
        reachable_depth: Option<usize>,
    },
    /// Translate between a machine document and an EMA document.
    Translate {
        #[arg(long, value_enum)]
        from: Kind,
        #[arg(long, value_enum)]
        to: Kind,
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check class membership and print the report.
    Check {
        #[arg(long, value_enum)]
        class: Class,
        file: PathBuf,
    },
    /// Run a machine and an EMA side by side.
    Compare {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        ema: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Derivation steps, for grammars.
        #[arg(long)]
        choices: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Ema,
    Tm,
    Tram,
    Grammar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Wt,
    Tram,
    Gra,
}

impl From<Class> for ClassId {
    fn from(c: Class) -> Self {
        match c {
            Class::Wt => ClassId::Wt,
            Class::Tram => ClassId::Tram,
            Class::Gra => ClassId::Gra,
        }
    }
}

/// A failed command: exit code and message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure { code, message: message.to_string() }
    }
}

impl From<TranslateError> for Failure {
    fn from(e: TranslateError) -> Self {
        Failure::new(EXIT_CLASS, e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_NO_INPUT, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_NO_INPUT, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Document, Failure> {
    Document::parse(&read(path)?).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn load_as(path: &Path, kind: DocKind) -> Result<Document, Failure> {
    Document::parse_as(&read(path)?, kind).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn load_ema(path: &Path) -> Result<Ema, Failure> {
    Ok(match load(path)? {
        Document::Ema(e) => *e,
        Document::Tm(m) => tm_to_ema(&m)?,
        Document::Tram(t) => tram_to_ema(&t)?,
        Document::Grammar(g) => grammar_to_ema(&g)?,
        other => {
            return Err(Failure::new(EXIT_DATA, format!("{}: cannot run a {} document", path.display(), other.kind())))
        }
    })
}

fn load_input(path: &Path) -> Result<InputDoc, Failure> {
    match load_as(path, DocKind::Input)? {
        Document::Input(i) => Ok(i),
        _ => unreachable!("kind checked"),
    }
}

fn load_choices(path: &Path) -> Result<ChoicesDoc, Failure> {
    match load_as(path, DocKind::Choices)? {
        Document::Choices(c) => Ok(c),
        _ => unreachable!("kind checked"),
    }
}

fn data<T, E: ToString>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| Failure::new(EXIT_DATA, e))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    file: &Path,
    input: Option<&Path>,
    max_steps: usize,
    choices: Option<&Path>,
    seed: Option<u64>,
    external_bound: u64,
    trace_out: Option<&Path>,
    reachable_depth: Option<usize>,
) -> Result<u8, Failure> {
    let ema = load_ema(file)?;
    let input = match input {
        Some(p) => data(load_input(p)?.to_input(&ema))?,
        None => Input::new(),
    };
    if let Some(depth) = reachable_depth {
        if let Err(report) = gra_shape(&ema) {
            return Err(Failure::new(EXIT_USAGE, format!("--reachable-depth needs a gra-class EMA\n{report}")));
        }
        for w in data(reachable_words(&ema, &input, depth))? {
            println!("{w}");
        }
        return Ok(0);
    }
    let source = match (choices, seed) {
        (Some(p), _) => data(load_choices(p)?.to_source(&ema))?,
        (None, Some(seed)) => ChoiceSource::Seeded { seed, external_bound },
        (None, None) => ChoiceSource::none(),
    };
    let trace = data(run(&ema, &input, &source, max_steps))?;
    let text = trace.render();
    print!("{text}");
    if let Some(p) = trace_out {
        write(p, &text)?;
    }
    Ok(match trace.outcome {
        Outcome::Accepted => 0,
        Outcome::Rejected => EXIT_REJECTED,
        Outcome::Stuck(_) => EXIT_STUCK,
        Outcome::StepLimit => EXIT_STEP_LIMIT,
    })
}

fn cmd_translate(from: Kind, to: Kind, file: &Path, output: Option<&Path>) -> Result<u8, Failure> {
    let want = |k: Kind| match k {
        Kind::Ema => DocKind::Ema,
        Kind::Tm => DocKind::Tm,
        Kind::Tram => DocKind::Tram,
        Kind::Grammar => DocKind::Grammar,
    };
    if (from == Kind::Ema) == (to == Kind::Ema) {
        return Err(Failure::new(EXIT_USAGE, "exactly one of --from and --to must be `ema`"));
    }
    let out = match (load_as(file, want(from))?, to) {
        (Document::Tm(m), _) => Document::Ema(Box::new(tm_to_ema(&m)?)),
        (Document::Tram(t), _) => Document::Ema(Box::new(tram_to_ema(&t)?)),
        (Document::Grammar(g), _) => Document::Ema(Box::new(grammar_to_ema(&g)?)),
        (Document::Ema(e), Kind::Tm) => Document::Tm(ema_to_tm(&e)?),
        (Document::Ema(e), Kind::Tram) => Document::Tram(ema_to_tram(&e)?),
        (Document::Ema(e), _) => Document::Grammar(ema_to_grammar(&e)?),
        _ => unreachable!("kind checked"),
    };
    let text = out.to_json();
    match output {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_check(class: Class, file: &Path) -> Result<u8, Failure> {
    let Document::Ema(ema) = load_as(file, DocKind::Ema)? else { unreachable!("kind checked") };
    let report = check_class(&ema, class.into());
    println!("{report}");
    Ok(if report.ok() { 0 } else { EXIT_CLASS })
}

fn cmd_compare(
    machine: &Path,
    ema: &Path,
    input: &Path,
    choices: Option<&Path>,
    max_steps: usize,
) -> Result<u8, Failure> {
    let Document::Ema(e) = load_as(ema, DocKind::Ema)? else { unreachable!("kind checked") };
    let input = load_input(input)?;
    let result = match load(machine)? {
        Document::Tm(m) => compare_tm(&m, &e, &data(input.tm_word(&m))?, max_steps)?,
        Document::Tram(t) => compare_tram(&t, &e, data(input.memory())?, max_steps)?,
        Document::Grammar(g) => {
            let Some(p) = choices else {
                return Err(Failure::new(EXIT_USAGE, "comparing a grammar needs --choices"));
            };
            let mut moves = data(load_choices(p)?.moves())?;
            moves.truncate(max_steps);
            compare_grammar(&g, &e, &data(input.grammar_word(&g))?, &moves)?
        }
        other => return Err(Failure::new(EXIT_DATA, format!("--machine: expected a machine, found {}", other.kind()))),
    };
    match result {
        Lockstep::Agree { steps, outcome } => {
            println!("equivalent for {steps} steps");
            println!("outcome={outcome}");
            Ok(0)
        }
        diverge => {
            println!("{diverge}");
            Ok(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { file, input, max_steps, choices, seed, external_bound, trace, reachable_depth } => cmd_run(
            file,
            input.as_deref(),
            *max_steps,
            choices.as_deref(),
            *seed,
            *external_bound,
            trace.as_deref(),
            *reachable_depth,
        ),
        Command::Translate { from, to, file, output } => cmd_translate(*from, *to, file, output.as_deref()),
        Command::Check { class, file } => cmd_check(*class, file),
        Command::Compare { machine, ema, input, choices, max_steps } => {
            cmd_compare(machine, ema, input, choices.as_deref(), *max_steps)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
