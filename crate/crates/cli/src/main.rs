//! `errcomm`: encode, corrupt, decode and sweep from the command line.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use errcomm::channel::{ChannelError, SignalFrame, TrialRng};
use errcomm::codespace::{CodespaceError, SignalVector};
use errcomm::framing::FramingError;
use errcomm::harness::{
    run_config, run_scenario, trial_message, write_artifacts, Artifact, FeedbackRunConfig, HarnessError,
    ScenarioConfig,
};
use errcomm::stack::{Stack, StackError, Symbol};
use serde_json::json;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "errcomm", version, about = "Simulate layered error-correcting channels")]
struct Cli {
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config's trial count.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Directory for report files; without it reports go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a message through the configured stack into a frame.
    Encode {
        /// Comma-separated top-level symbols.
        #[arg(long)]
        message: String,
    },
    /// Decode a frame (one vector per line) back to top-level symbols.
    Decode {
        /// Frame file; stdin if absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Pass a frame through the configured error model.
    Channel {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Trial index for the channel's random stream.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Send one message through stack and channel and report every layer.
    StackRun {
        /// Comma-separated top-level symbols; random from the seed if absent.
        #[arg(long)]
        message: Option<String>,
    },
    /// Run a feedback session config.
    FeedbackRun,
    /// Monte Carlo run, or a sweep if the config has a grid.
    Sweep,
    /// Run a named preset: case1, driver-driven, ram-monitor, contextual
    /// or feedback-affine.
    Scenario { name: String },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Stack(#[from] StackError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("{0}")]
    Input(#[from] CodespaceError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Stack(StackError::Aborted { .. } | StackError::Framing(FramingError::Unrepairable { .. }))
            | CliError::Harness(HarnessError::Stack(
                StackError::Aborted { .. } | StackError::Framing(FramingError::Unrepairable { .. }),
            )) => 2,
            _ => 1,
        }
    }
}

/// What a command produced: a CSV table and a JSON summary.
struct Output {
    csv: String,
    json: serde_json::Value,
    extra: Vec<Artifact>,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let path = cli.config.as_deref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut config = ScenarioConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    config.validate()?;
    Ok(config)
}

fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    let mut text = String::new();
    match path {
        Some(p) => {
            text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        }
        None => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn parse_frame(text: &str, dimension: Option<usize>) -> Result<SignalFrame, CliError> {
    let vectors = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::parse::<SignalVector>)
        .collect::<Result<Vec<_>, _>>()?;
    let dimension = vectors
        .first()
        .map(SignalVector::dimension)
        .or(dimension)
        .ok_or_else(|| CliError::Usage("empty frame".into()))?;
    Ok(SignalFrame::new(dimension, vectors)?)
}

fn parse_message(stack: &Stack, text: &str) -> Result<Vec<Symbol>, CliError> {
    Ok(text.split(',').map(|s| stack.parse_symbol(s.trim())).collect::<Result<_, _>>()?)
}

fn frame_lines(frame: &SignalFrame) -> Vec<String> {
    frame.vectors().iter().map(ToString::to_string).collect()
}

fn frame_output(frame: &SignalFrame) -> Output {
    let lines = frame_lines(frame);
    let csv = lines.iter().map(|l| format!("{l}\n")).collect();
    Output { csv, json: json!({ "dimension": frame.dimension(), "vectors": lines }), extra: Vec::new() }
}

fn symbol_strings(symbols: &[Symbol]) -> Vec<String> {
    symbols.iter().map(ToString::to_string).collect()
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Encode { message } => {
            let config = load_config(cli)?;
            let stack = Stack::from_spec(&config.stack)?;
            let (_, frame) = stack.encode(&parse_message(&stack, message)?)?;
            Ok(frame_output(&frame))
        }
        Command::Decode { input } => {
            let config = load_config(cli)?;
            let stack = Stack::from_spec(&config.stack)?;
            let frame = parse_frame(&read_input(input.as_deref())?, None)?;
            let symbols = symbol_strings(&stack.receive(&frame)?);
            let csv = symbols.iter().map(|s| format!("{s}\n")).collect();
            Ok(Output { csv, json: json!({ "symbols": symbols }), extra: Vec::new() })
        }
        Command::Channel { input, trial } => {
            let config = load_config(cli)?;
            let frame = parse_frame(&read_input(input.as_deref())?, None)?;
            Ok(frame_output(&config.model.apply(&frame, &TrialRng::new(config.seed, *trial))?))
        }
        Command::StackRun { message } => {
            let config = load_config(cli)?;
            let stack = Stack::from_spec(&config.stack)?;
            let message = match message {
                Some(m) => parse_message(&stack, m)?,
                None => trial_message(&stack, config.message_len, config.seed, 0),
            };
            let channel = TrialRng::new(config.seed, 0).fork(1);
            let t = stack.deliver(&message, |clean| Ok(config.model.apply(clean, &channel)?))?;
            let summary = json!({
                "seed": config.seed,
                "sent": symbol_strings(&message),
                "received": symbol_strings(&t.received),
                "reference": symbol_strings(&t.reference),
                "channel_uses": t.channel_uses,
                "aborted": t.aborted,
                "layers": t.report.layers,
            });
            let out = Output { csv: t.report.to_csv(), json: summary, extra: Vec::new() };
            if let Some(a) = t.aborted {
                emit(cli, &out)?;
                return Err(StackError::Aborted { layer: a.layer, position: a.position }.into());
            }
            Ok(out)
        }
        Command::FeedbackRun => {
            let path = cli.config.as_deref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
            let run = FeedbackRunConfig::from_json(&text)?;
            let session = run.run()?;
            let summary = json!({
                "config": run,
                "inverse": session.inverse(),
                "final_plant": session.plant().map_err(HarnessError::from)?,
                "total_fill_bits": session.log().iter().map(|r| r.fill_bits).sum::<usize>(),
                "log": session.log(),
            });
            Ok(Output { csv: session.log_csv(), json: summary, extra: Vec::new() })
        }
        Command::Sweep => {
            let config = load_config(cli)?;
            let report = run_config(&config)?;
            let json = serde_json::to_value(&report).expect("plain data serializes");
            Ok(Output { csv: report.to_csv(), json, extra: Vec::new() })
        }
        Command::Scenario { name } => {
            let out = run_scenario(name, cli.seed)?;
            let mut artifacts = out.artifacts.into_iter();
            let csv = artifacts.next().map(|a| a.contents).unwrap_or_default();
            let json = json!({ "scenario": out.name, "ok": out.ok, "summary": out.summary });
            Ok(Output { csv, json, extra: artifacts.collect() })
        }
    }
}

fn out_dir(cli: &Cli) -> Option<PathBuf> {
    cli.out.clone().or_else(|| {
        let path = cli.config.as_deref()?;
        ScenarioConfig::load(path).ok()?.out
    })
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let summary = serde_json::to_string_pretty(&out.json).expect("plain data serializes") + "\n";
    match out_dir(cli) {
        Some(dir) => {
            let stem = match &cli.command {
                Command::Scenario { name } => name.as_str(),
                _ => "report",
            };
            let mut files = vec![
                Artifact { name: format!("{stem}.csv"), contents: out.csv.clone() },
                Artifact { name: format!("{stem}.json"), contents: summary },
            ];
            files.extend(out.extra.iter().filter(|a| !a.name.ends_with(".json")).cloned());
            write_artifacts(&dir, &files)?;
            eprintln!("wrote {} files to {}", files.len(), dir.display());
        }
        None => match cli.format {
            Format::Csv => print!("{}", out.csv),
            Format::Json => print!("{summary}"),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for failed transmissions
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match run(&cli).and_then(|out| emit(&cli, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
