//! `evac` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::harness::{self, replay::ReplayFile, stats::corpus_stats, Policy, TracePolicy};
use crate::scenario::{check_errors, parse_scenario, validate_scenario, ScenarioSpec};

pub const GRAMMAR: &str = "\
usage:
  evac validate <scenario>
  evac run <scenario> --policy {omniscient|naive|informed|replay} [--record <file>] [--max-ticks N] [--trace <replay>]
  evac replay <file>... [--scenario <scenario>] [--digests]
  evac solve <scenario>
  evac stats <dir> --out <report.json>
";

#[derive(Debug, Parser)]
#[command(name = "evac", about = "Headless harness for the evacuation game", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Omniscient,
    Naive,
    Informed,
    Replay,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file and print the findings.
    Validate { scenario: PathBuf },
    /// Play a scenario with a bot.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        policy: PolicyArg,
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long)]
        max_ticks: Option<u64>,
        /// Replay file whose inputs drive `--policy replay`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Re-run recordings and verify their final digests.
    Replay {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Print the digest after every tick.
        #[arg(long)]
        digests: bool,
    },
    /// Decide whether a scenario can be won.
    Solve { scenario: PathBuf },
    /// Analyze every scenario in a directory.
    Stats {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Self(e.to_string())
    }
}

fn load(path: &Path) -> Result<ScenarioSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Finds the scenario a replay refers to: `<id>.json`, or any scenario with
/// that id, next to the replay and then under `fixtures/`.
fn locate_scenario(replay_path: &Path, file: &ReplayFile) -> Option<ScenarioSpec> {
    let mut dirs = vec![replay_path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)];
    dirs.push(PathBuf::from("fixtures"));
    for dir in dirs {
        let direct = dir.join(format!("{}.json", file.scenario_id));
        if let Ok(spec) = load(&direct) {
            if spec.content_digest() == file.scenario_digest {
                return Some(spec);
            }
        }
        let Ok(entries) = std::fs::read_dir(&dir) else { continue };
        let mut paths: Vec<PathBuf> = entries.filter_map(Result::ok).map(|e| e.path()).collect();
        paths.sort();
        for path in paths.iter().filter(|p| p.extension().is_some_and(|e| e == "json")) {
            if let Ok(spec) = load(path) {
                if spec.id.as_str() == file.scenario_id && spec.content_digest() == file.scenario_digest {
                    return Some(spec);
                }
            }
        }
    }
    None
}

fn run(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { scenario } => {
            let spec = load(&scenario)?;
            let report = validate_scenario(&spec);
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(if report.is_accepted() { 0 } else { 1 })
        }
        Command::Run { scenario, policy, record, max_ticks, trace } => {
            let spec = load(&scenario)?;
            let mut bot: Box<dyn Policy> = match policy {
                PolicyArg::Replay => {
                    let path = trace.ok_or_else(|| Failure("--policy replay needs --trace <file>".into()))?;
                    let file = ReplayFile::parse(&std::fs::read_to_string(&path)?)?;
                    Box::new(TracePolicy::new(file.inputs))
                }
                PolicyArg::Omniscient => harness::policy_by_name("omniscient", &spec).expect("known"),
                PolicyArg::Naive => harness::policy_by_name("naive", &spec).expect("known"),
                PolicyArg::Informed => harness::policy_by_name("informed", &spec).expect("known"),
            };
            let cap = max_ticks.unwrap_or_else(|| spec.tick_bound());
            let result = harness::run_policy(&spec, bot.as_mut(), cap)?;
            if let Some(path) = record {
                std::fs::write(&path, ReplayFile::from_run(&spec, &result).to_text())?;
            }
            let timeout = if result.timed_out { " timeout" } else { "" };
            writeln!(
                out,
                "outcome={} ticks={} digest={}{timeout}",
                result.outcome, result.final_tick, result.final_digest
            )?;
            Ok(0)
        }
        Command::Replay { files, scenario, digests } => {
            let pinned = scenario.as_deref().map(load).transpose()?;
            let many = files.len() > 1;
            for path in &files {
                let file = ReplayFile::parse(&std::fs::read_to_string(path)?)?;
                let spec = match &pinned {
                    Some(spec) => spec.clone(),
                    None => locate_scenario(path, &file).ok_or_else(|| {
                        Failure(format!("{}: scenario `{}` not found", path.display(), file.scenario_id))
                    })?,
                };
                if many {
                    writeln!(out, "file={}", path.display())?;
                }
                let result = harness::replay(&file, &spec).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                if digests {
                    for (tick, d) in result.digests.iter().enumerate() {
                        writeln!(out, "t={tick} {d}")?;
                    }
                }
                writeln!(out, "digest OK outcome={} ticks={} digest={}", result.outcome, result.final_tick, result.final_digest)?;
            }
            Ok(0)
        }
        Command::Solve { scenario } => {
            let spec = load(&scenario)?;
            let errors = check_errors(&spec);
            if !errors.is_empty() {
                return Err(Failure(format!("scenario failed validation with {} error(s)", errors.len())));
            }
            match harness::solve(&spec) {
                Ok(Some(trace)) => writeln!(out, "solvable witness_ticks={}", trace.len())?,
                Ok(None) => writeln!(out, "unsolvable")?,
                Err(e) => writeln!(out, "unknown: {e}")?,
            }
            Ok(0)
        }
        Command::Stats { dir, out: report_path } => {
            let report = corpus_stats(&dir)?;
            std::fs::write(&report_path, report.to_json())?;
            let s = &report.summary;
            writeln!(out, "scenarios={} accepted={} solvable={}", s.scenarios, s.accepted, s.solvable)?;
            Ok(0)
        }
    }
}

/// Runs the CLI. Exit codes: 0 success, 1 failure or validation errors, 2 usage.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}\n{GRAMMAR}");
            return 2;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
