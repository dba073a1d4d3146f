//! Command line: `psv verify FILE [flags]` and `psv --daemon`.

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};

use super::{analyze, load, render_table, report_json, solve, theory, Options, Overall};
use crate::emitter::render_equation;
use crate::prover::{DEFAULT_INDUCT_DEPTH, DEFAULT_MAX_STEPS, DEFAULT_TIMEOUT_MS};
use crate::termination::render_result;

pub const EXIT_UNSAT: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "psv", version, about = "Verifier for a small functional language with inline contracts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Serve newline-delimited JSON requests on stdin/stdout.
    #[arg(long)]
    pub daemon: bool,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify every contract in FILE.
    Verify { file: PathBuf },
}

#[derive(Debug, Clone, clap::Args)]
pub struct Flags {
    /// Write the theory document to PATH (conventionally `*.thy.txt`).
    #[arg(long, value_name = "PATH", global = true)]
    pub emit_theory: Option<PathBuf>,
    /// Assert library mappings as axioms instead of proving them.
    #[arg(long, global = true)]
    pub assume_mappings: bool,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_TIMEOUT_MS, global = true)]
    pub timeout_ms: u64,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_STEPS, global = true)]
    pub max_steps: u64,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_INDUCT_DEPTH, global = true)]
    pub induct_depth: u32,
    /// Evaluator fuel for the equation cross-check.
    #[arg(long, value_name = "N", default_value_t = super::DEFAULT_FUEL, global = true)]
    pub fuel: u64,
    #[arg(long, value_name = "N", default_value_t = super::DEFAULT_SEED, global = true)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub dump_depgraph: bool,
    #[arg(long, global = true)]
    pub dump_equations: bool,
    #[arg(long, global = true)]
    pub dump_termination: bool,
    #[arg(long, global = true)]
    pub dump_vcs: bool,
    #[arg(long, value_name = "PATH", global = true)]
    pub json_report: Option<PathBuf>,
    /// Record wall-clock milliseconds in the JSON report.
    #[arg(long, global = true)]
    pub report_timings: bool,
    /// Only prove the VC with this id (repeatable).
    #[arg(long = "vc", value_name = "ID", global = true)]
    pub vcs: Vec<String>,
}

impl Flags {
    pub fn options(&self) -> Options {
        Options {
            timeout: Duration::from_millis(self.timeout_ms),
            max_steps: self.max_steps,
            induct_depth: self.induct_depth,
            assume_mappings: self.assume_mappings,
            fuel: self.fuel,
            seed: self.seed,
            vc_ids: (!self.vcs.is_empty()).then(|| self.vcs.iter().cloned().collect::<BTreeSet<_>>()),
            cancel: None,
            report_timings: self.report_timings,
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    if cli.daemon {
        let stdin = io::stdin();
        super::daemon::serve(stdin.lock(), io::stdout(), cli.flags.options());
        return 0;
    }
    match cli.command {
        Some(Command::Verify { file }) => verify(&file, &cli.flags, out, err),
        None => {
            let _ = writeln!(err, "nothing to do: use `psv verify FILE` or `psv --daemon`");
            EXIT_INPUT
        }
    }
}

fn write_file(path: &Path, text: &str, err: &mut dyn Write) -> bool {
    match std::fs::write(path, text) {
        Ok(()) => true,
        Err(e) => {
            let _ = writeln!(err, "cannot write {}: {e}", path.display());
            false
        }
    }
}

fn verify(file: &Path, flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let source = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "cannot read {}: {e}", file.display());
            return EXIT_INPUT;
        }
    };
    let name = file.display().to_string();
    let program = match load(&name, &source) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    if flags.dump_depgraph || flags.dump_equations || flags.dump_termination || flags.dump_vcs {
        let a = analyze(&program);
        if flags.dump_depgraph {
            let _ = write!(out, "{}", a.order.render());
        }
        if flags.dump_equations {
            for f in &program.functions {
                for eq in a.equations(&f.name) {
                    let _ = writeln!(out, "{}", render_equation(&program, eq));
                }
            }
        }
        if flags.dump_termination {
            for t in &a.termination {
                let _ = write!(out, "{}", render_result(t));
            }
        }
        if flags.dump_vcs {
            for vc in &a.vcs {
                let _ = writeln!(out, "{vc}");
            }
        }
    }
    let options = flags.options();
    let (analysis, verdict) = solve(&program, &options);
    for f in &verdict.oracle_failures {
        let _ = writeln!(err, "internal error: equations of {f} disagree with its body");
    }
    let _ = write!(out, "{}", render_table(&verdict));
    let mut ok = true;
    if let Some(path) = &flags.emit_theory {
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("Theory");
        ok &= write_file(path, &theory(stem, &program, &analysis, &verdict), err);
    }
    if let Some(path) = &flags.json_report {
        ok &= write_file(path, &report_json(&source, &verdict, options.report_timings), err);
    }
    if !ok {
        return EXIT_INPUT;
    }
    match verdict.overall {
        Overall::Unsat => EXIT_UNSAT,
        Overall::Unknown => EXIT_UNKNOWN,
    }
}
