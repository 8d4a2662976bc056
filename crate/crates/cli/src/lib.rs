//! Command-line front end. [`run`] is the whole program; `main` only wires
//! it to the process streams.
//!
//! Exit codes: 0 success or "yes", 1 a domain "no", 2 usage or parse error,
//! 3 precondition violation.

pub mod generators;

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use ces_pcl::dsl::{self, ParseOptions};
use ces_pcl::game::{self, Game, GameVerdict};
use ces_pcl::logic::{self, HornTheory, Trace};
use ces_pcl::model::{ContractSpec, Diagnostic, EventId, EventSet, ParticipantId, Play};
use ces_pcl::{oracle, Error};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use generators::CircularCells;

pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ces-pcl",
    version,
    about = "Contracts with circular causality and Horn contract logic"
)]
struct Cli {
    /// Machine-readable output with sorted keys.
    #[arg(long, global = true)]
    json: bool,
    /// Accept the tagged atoms `!a`, `R$a`, `U$a` in input files.
    #[arg(long, global = true)]
    allow_tagged: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report diagnostics; exit 0 iff the file is clean.
    Validate { file: PathBuf },
    /// Provable atoms, one per line.
    Prove { file: PathBuf },
    /// Proof traces in shortlex order.
    Traces {
        file: PathBuf,
        #[arg(long)]
        max: Option<usize>,
    },
    /// Whether a sequence is a proof trace.
    CheckTrace {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        trace: String,
    },
    /// Urgent atoms after a set of established atoms.
    Urgent {
        file: PathBuf,
        #[arg(long, default_value = "")]
        past: String,
    },
    /// Prudent events after a set of fired events.
    Prudent {
        file: PathBuf,
        #[arg(long, default_value = "")]
        past: String,
    },
    /// Events reachable on credit from a set of fired events.
    Reachable {
        file: PathBuf,
        #[arg(long, default_value = "")]
        past: String,
    },
    /// Credit set after every prefix of a play.
    Credits {
        file: PathBuf,
        #[arg(long)]
        play: String,
    },
    /// Innocence, credit-freedom and winning per participant.
    Verdict {
        file: PathBuf,
        #[arg(long)]
        play: String,
    },
    /// Whether the contract admits an agreement; exit 0 iff it does.
    Agree { file: PathBuf },
    /// Events the synthesized strategy of a participant offers after a play.
    Strategy {
        file: PathBuf,
        #[arg(long)]
        participant: String,
        #[arg(long, default_value = "")]
        past: String,
    },
    /// Fair run of all synthesized strategies.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The urgency encoding of the theory, as a contract file.
    Encode { file: PathBuf },
    /// Generate a contract family.
    #[command(subcommand)]
    Gen(Generator),
    /// Brute-force reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand, Debug)]
enum Generator {
    /// Dancers on an n×n grid.
    ShyDancers {
        #[arg(long)]
        n: usize,
        /// `all`, `none`, or cells like `1:2,3:3` that use circular enabling.
        #[arg(long, default_value = "none")]
        circular: String,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Provable atoms by natural-deduction search.
    Prove { file: PathBuf },
    /// Proof traces by saturating the trace rules.
    Traces { file: PathBuf },
    /// Prudent events by solving the play tree.
    Prudence {
        file: PathBuf,
        #[arg(long, default_value = "")]
        past: String,
    },
}

/// A failed command: exit code plus message for stderr.
struct Failure {
    code: i32,
    lines: Vec<String>,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            lines: vec![msg.into()],
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownEvent(_) | Error::UnknownParticipant(_) | Error::Invalid(_) => EXIT_USAGE,
            _ => EXIT_PRECONDITION,
        };
        Failure {
            code,
            lines: vec![format!("error: {e}")],
        }
    }
}

struct Output {
    text: String,
    json: Value,
    code: i32,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output {
            text,
            json,
            code: 0,
        }
    }
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let options = ParseOptions {
        allow_tagged: cli.allow_tagged,
    };
    match execute(&cli.command, options, stdin) {
        Ok(output) => {
            let rendered = if cli.json {
                let mut s =
                    serde_json::to_string_pretty(&output.json).expect("json values serialize");
                s.push('\n');
                s
            } else {
                output.text
            };
            let _ = out.write_all(rendered.as_bytes());
            output.code
        }
        Err(failure) => {
            for line in failure.lines {
                let _ = writeln!(err, "{line}");
            }
            failure.code
        }
    }
}

fn read_source(path: &PathBuf, stdin: &mut dyn Read) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        stdin
            .read_to_string(&mut text)
            .map_err(|e| Failure::usage(format!("error: reading stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("error: {}: {e}", path.display())))
    }
}

fn load(
    path: &PathBuf,
    options: ParseOptions,
    stdin: &mut dyn Read,
) -> Result<ContractSpec, Failure> {
    let text = read_source(path, stdin)?;
    dsl::parse_with(&text, options).map_err(|diags| Failure {
        code: EXIT_USAGE,
        lines: diags
            .iter()
            .map(|d| format!("{}:{d}", path.display()))
            .collect(),
    })
}

/// Splits `a,b,c` (or whitespace separated names); `(empty)` and `` mean ε.
fn names(list: &str) -> Vec<EventId> {
    let list = list.trim();
    if list == "(empty)" {
        return Vec::new();
    }
    list.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(EventId::new)
        .collect()
}

fn known_set(spec: &ContractSpec, list: &str) -> Result<EventSet, Failure> {
    let set: EventSet = names(list).into_iter().collect();
    if let Some(e) = set.iter().find(|e| !spec.events.contains(*e)) {
        return Err(Error::UnknownEvent(e.clone()).into());
    }
    Ok(set)
}

fn play_arg(spec: &ContractSpec, list: &str) -> Result<Play, Failure> {
    let events = names(list);
    if let Some(e) = events.iter().find(|e| !spec.events.contains(*e)) {
        return Err(Error::UnknownEvent(e.clone()).into());
    }
    Ok(Play::new(spec, events)?)
}

fn participant_arg(spec: &ContractSpec, name: &str) -> Result<ParticipantId, Failure> {
    let p = ParticipantId::new(name);
    if !spec.participants.contains(&p) {
        return Err(Error::UnknownParticipant(p).into());
    }
    Ok(p)
}

fn list(set: &EventSet) -> Value {
    json!(set.iter().map(EventId::as_str).collect::<Vec<_>>())
}

fn seq(events: &[EventId]) -> Value {
    json!(events.iter().map(EventId::as_str).collect::<Vec<_>>())
}

/// One event per line.
fn lines(set: &EventSet) -> String {
    set.iter().map(|e| format!("{e}\n")).collect()
}

/// `{a b}` rendering used inside tables.
fn braces(set: &EventSet) -> String {
    let inner: Vec<&str> = set.iter().map(EventId::as_str).collect();
    format!("{{{}}}", inner.join(" "))
}

fn diagnostic_json(d: &Diagnostic) -> Value {
    json!({
        "code": d.code.as_str(),
        "message": d.message,
        "line": d.line,
        "column": d.column,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict_output(v: &GameVerdict) -> (String, Value) {
    let mut text = format!("play: {}\n", v.play);
    let width = v
        .participants
        .keys()
        .map(|p| p.as_str().len())
        .max()
        .unwrap_or(0)
        .max("participant".len());
    text.push_str(&format!(
        "{:<width$}  innocent  credit-free  wins\n",
        "participant"
    ));
    let mut table = serde_json::Map::new();
    for (p, pv) in &v.participants {
        let wins = pv.wins.map_or("-", yes_no);
        text.push_str(&format!(
            "{:<width$}  {:<8}  {:<11}  {}\n",
            p.as_str(),
            yes_no(pv.innocent),
            yes_no(pv.credit_free),
            wins
        ));
        table.insert(
            p.as_str().to_string(),
            json!({"innocent": pv.innocent, "credit_free": pv.credit_free, "wins": pv.wins}),
        );
    }
    let value = json!({
        "play": seq(v.play.events()),
        "participants": Value::Object(table),
        "everyone_wins": v.everyone_wins(),
    });
    (text, value)
}

fn trace_lines(traces: &[Trace]) -> (String, Value) {
    let text = traces.iter().map(|t| format!("{t}\n")).collect();
    let value = json!({"traces": traces.iter().map(|t| seq(t.events())).collect::<Vec<_>>()});
    (text, value)
}

fn execute(
    command: &Command,
    options: ParseOptions,
    stdin: &mut dyn Read,
) -> Result<Output, Failure> {
    match command {
        Command::Validate { file } => {
            let text = read_source(file, stdin)?;
            let diags = match dsl::parse_with(&text, options) {
                Ok(_) => Vec::new(),
                Err(d) => d,
            };
            let rendered: String = if diags.is_empty() {
                "ok\n".to_string()
            } else {
                diags
                    .iter()
                    .map(|d| format!("{}:{d}\n", file.display()))
                    .collect()
            };
            Ok(Output {
                text: rendered,
                json: json!({
                    "valid": diags.is_empty(),
                    "diagnostics": diags.iter().map(diagnostic_json).collect::<Vec<_>>(),
                }),
                code: if diags.is_empty() { 0 } else { EXIT_NO },
            })
        }
        Command::Prove { file } => {
            let spec = load(file, options, stdin)?;
            let provable = logic::provable_atoms(&HornTheory::from_spec(&spec)?);
            Ok(Output::ok(
                lines(&provable),
                json!({"provable": list(&provable)}),
            ))
        }
        Command::Traces { file, max } => {
            let spec = load(file, options, stdin)?;
            let traces = logic::proof_traces(&HornTheory::from_spec(&spec)?, *max);
            let (text, value) = trace_lines(&traces);
            Ok(Output::ok(text, value))
        }
        Command::CheckTrace { file, trace } => {
            let spec = load(file, options, stdin)?;
            let theory = HornTheory::from_spec(&spec)?;
            let t = Trace::new(names(trace));
            if let Some(e) = t.events().iter().find(|e| !spec.events.contains(*e)) {
                return Err(Error::UnknownEvent(e.clone()).into());
            }
            let ok = logic::is_proof_trace(&theory, &t);
            Ok(Output {
                text: format!("{}\n", yes_no(ok)),
                json: json!({"trace": seq(t.events()), "proof_trace": ok}),
                code: if ok { 0 } else { EXIT_NO },
            })
        }
        Command::Urgent { file, past } => {
            let spec = load(file, options, stdin)?;
            let x = known_set(&spec, past)?;
            let urgent = logic::urgent_atoms(&HornTheory::from_spec(&spec)?, &x)?;
            Ok(Output::ok(
                lines(&urgent),
                json!({"past": list(&x), "urgent": list(&urgent)}),
            ))
        }
        Command::Prudent { file, past } => {
            let spec = load(file, options, stdin)?;
            let x = known_set(&spec, past)?;
            let prudent = game::prudent_events(&spec, &x)?;
            Ok(Output::ok(
                lines(&prudent),
                json!({"past": list(&x), "prudent": list(&prudent)}),
            ))
        }
        Command::Reachable { file, past } => {
            let spec = load(file, options, stdin)?;
            let x = known_set(&spec, past)?;
            let reach = game::reachable(&spec, &x)?;
            Ok(Output::ok(
                lines(&reach),
                json!({"past": list(&x), "reachable": list(&reach)}),
            ))
        }
        Command::Credits { file, play } => {
            let spec = load(file, options, stdin)?;
            let play = play_arg(&spec, play)?;
            let ledger = game::credits(&spec, &play)?;
            let mut text = String::new();
            let mut rows = Vec::new();
            for (i, credits) in ledger.per_prefix.iter().enumerate() {
                let prefix = play.prefix(i);
                text.push_str(&format!("{prefix}: {}\n", braces(credits)));
                rows.push(json!({"prefix": seq(prefix.events()), "credits": list(credits)}));
            }
            text.push_str(&format!("final: {}\n", braces(&ledger.final_credits)));
            Ok(Output::ok(
                text,
                json!({"play": seq(play.events()), "per_prefix": rows, "final": list(&ledger.final_credits)}),
            ))
        }
        Command::Verdict { file, play } => {
            let spec = load(file, options, stdin)?;
            let play = play_arg(&spec, play)?;
            let (text, value) = verdict_output(&game::verdict(&spec, &play)?);
            Ok(Output::ok(text, value))
        }
        Command::Agree { file } => {
            let spec = load(file, options, stdin)?;
            let report = Game::new(&spec)?.agreement_report()?;
            let mut text = format!(
                "{}\nprovable:{}\n",
                if report.agreement {
                    "agreement"
                } else {
                    "no agreement"
                },
                report
                    .provable
                    .iter()
                    .map(|e| format!(" {e}"))
                    .collect::<String>()
            );
            if !report.failing.is_empty() {
                let failing: Vec<&str> = report.failing.iter().map(ParticipantId::as_str).collect();
                text.push_str(&format!("unsatisfied: {}\n", failing.join(" ")));
            }
            Ok(Output {
                text,
                json: json!({
                    "agreement": report.agreement,
                    "provable": list(&report.provable),
                    "unsatisfied": report.failing.iter().map(ParticipantId::as_str).collect::<Vec<_>>(),
                }),
                code: if report.agreement { 0 } else { EXIT_NO },
            })
        }
        Command::Strategy {
            file,
            participant,
            past,
        } => {
            use ces_pcl::model::Strategy as _;
            let spec = load(file, options, stdin)?;
            let p = participant_arg(&spec, participant)?;
            let play = play_arg(&spec, past)?;
            let offers = game::synthesize_strategy(&spec, &p)?.choose(&play);
            Ok(Output::ok(
                lines(&offers),
                json!({"participant": p.as_str(), "past": seq(play.events()), "offers": list(&offers)}),
            ))
        }
        Command::Simulate { file, seed } => {
            let spec = load(file, options, stdin)?;
            let run = game::simulate_synthesized(&spec, *seed)?;
            let (text, mut value) = verdict_output(&run.verdict);
            value["seed"] = json!(seed);
            Ok(Output::ok(text, value))
        }
        Command::Encode { file } => {
            let spec = load(file, options, stdin)?;
            let encoded = logic::encode_u_spec(&spec)?;
            let text = dsl::print(&encoded);
            let clauses: Vec<Value> = encoded
                .clauses
                .iter()
                .map(|c| json!({"head": c.head.as_str(), "kind": c.kind.arrow(), "body": list(&c.body)}))
                .collect();
            Ok(Output::ok(
                text.clone(),
                json!({"clauses": clauses, "text": text}),
            ))
        }
        Command::Gen(Generator::ShyDancers { n, circular }) => {
            if *n == 0 {
                return Err(Failure::usage("error: --n must be positive"));
            }
            let cells = CircularCells::parse(circular, *n)
                .map_err(|m| Failure::usage(format!("error: {m}")))?;
            let text = dsl::print(&generators::shy_dancers(*n, &cells));
            Ok(Output::ok(text.clone(), json!({"text": text})))
        }
        Command::Oracle(OracleCommand::Prove { file }) => {
            let spec = load(file, options, stdin)?;
            let provable = oracle::nd_provable_atoms(&HornTheory::from_spec(&spec)?);
            Ok(Output::ok(
                lines(&provable),
                json!({"provable": list(&provable)}),
            ))
        }
        Command::Oracle(OracleCommand::Traces { file }) => {
            let spec = load(file, options, stdin)?;
            let traces: Vec<Trace> = oracle::traces_bruteforce(&HornTheory::from_spec(&spec)?)?
                .into_iter()
                .collect();
            let (text, value) = trace_lines(&traces);
            Ok(Output::ok(text, value))
        }
        Command::Oracle(OracleCommand::Prudence { file, past }) => {
            let spec = load(file, options, stdin)?;
            let play = play_arg(&spec, past)?;
            let prudent = oracle::prudence_bruteforce(&spec, &play)?;
            Ok(Output::ok(
                lines(&prudent),
                json!({"past": seq(play.events()), "prudent": list(&prudent)}),
            ))
        }
    }
}
