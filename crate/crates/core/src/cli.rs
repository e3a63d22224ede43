//! Command-line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cost::bounded_sum;
use crate::format::{parse_wcsp, write_wcsp};
use crate::generate::{random_instance, GenParams};
use crate::model::{Instantiation, Wcn};
use crate::muc::MucStrategy;
use crate::output::{emit_result, Verbosity};
use crate::search::{
    brute_force_optimum, NoObserver, Outcome, SearchConfig, Searcher, Status,
    DEFAULT_ENUMERATION_CAP,
};

pub const EXIT_SOLUTION: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 10;
pub const EXIT_UNKNOWN: i32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Complete,
    CompleteNomuc,
    Greedy,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MucArg {
    Deletion,
    Dichotomic,
}

impl From<MucArg> for MucStrategy {
    fn from(m: MucArg) -> Self {
        match m {
            MucArg::Deletion => MucStrategy::Deletion,
            MucArg::Dichotomic => MucStrategy::Dichotomic,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wcsp",
    about = "Weighted CSP solver based on core-guided layer relaxation"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a wcsp file.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "complete")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "deletion")]
        muc: MucArg,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Total number of search nodes allowed over all CN solves.
        #[arg(long)]
        node_budget: Option<u64>,
        /// -v prints statistics, -vv adds timing.
        #[arg(short, long, action = clap::ArgAction::Count)]
        verbose: u8,
    },
    /// Exhaustive enumeration of all instantiations.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u128,
    },
    /// Print the cost of one complete instantiation.
    Check {
        file: PathBuf,
        /// Space-separated value indices, one per variable.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Print a random instance in wcsp format.
    Gen {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        domain: usize,
        #[arg(long)]
        constraints: usize,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        /// Comma-separated tuple costs; `k` stands for the top cost.
        #[arg(long, default_value = "0,1,2,5,10")]
        costs: String,
        /// Comma-separated default costs; `k` stands for the top cost.
        #[arg(long, default_value = "0,10,k")]
        defaults: String,
        #[arg(long, default_value_t = 100)]
        top: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Everything a solve run needs besides the instance.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub search: SearchConfig,
    pub verbosity: Verbosity,
}

/// Runs one solve according to `cfg`.
pub fn run_mode(w: &Wcn, cfg: &RunConfig) -> Result<Outcome, String> {
    let mut obs = NoObserver;
    let mut s = Searcher::new(&cfg.search, &mut obs);
    Ok(match cfg.mode {
        Mode::Complete => s.complete(w, true),
        Mode::CompleteNomuc => s.complete(w, false),
        Mode::Greedy => s.greedy(w),
        Mode::Oracle => {
            brute_force_optimum(w, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?
        }
    })
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Optimum | Status::UpperBound => EXIT_SOLUTION,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::Unknown => EXIT_UNKNOWN,
    }
}

fn load(file: &PathBuf) -> Result<Wcn, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    parse_wcsp(&text).map_err(|e| format!("{}: {e}", file.display()))
}

fn menu(s: &str, top: u64) -> Result<Vec<u64>, String> {
    s.split(',')
        .map(|t| match t.trim() {
            "k" => Ok(top),
            v => v.parse().map_err(|_| format!("bad cost `{v}`")),
        })
        .collect()
}

/// Warns when the top cost is reachable by the sum of the largest finite
/// layer costs, i.e. when it does not act as an infinite cost.
fn top_warning(w: &Wcn) -> Option<String> {
    let top = w.top();
    let sum = bounded_sum(
        w.constraints()
            .iter()
            .filter_map(|c| c.max_finite_cost(top)),
        top,
    );
    (sum >= top).then(|| {
        format!(
            "c warning: top {top} is reachable by summing finite costs; sums are saturated at top"
        )
    })
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_SOLUTION
            };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match execute(args.command, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match cmd {
        Command::Solve {
            file,
            mode,
            muc,
            timeout,
            node_budget,
            verbose,
        } => {
            let w = load(&file)?;
            if let Some(msg) = top_warning(&w) {
                writeln!(err, "{msg}").map_err(io)?;
            }
            let time_limit = match timeout {
                Some(t) if t.is_finite() && t >= 0.0 => Some(Duration::from_secs_f64(t)),
                Some(t) => return Err(format!("bad timeout {t}")),
                None => None,
            };
            let cfg = RunConfig {
                mode,
                search: SearchConfig {
                    muc: muc.into(),
                    node_budget,
                    time_limit,
                },
                verbosity: match verbose {
                    0 => Verbosity::Quiet,
                    1 => Verbosity::Stats,
                    _ => Verbosity::Timing,
                },
            };
            let o = run_mode(&w, &cfg)?;
            write!(out, "{}", emit_result(&o, cfg.verbosity)).map_err(io)?;
            Ok(exit_code(o.status))
        }
        Command::Oracle { file, cap } => {
            let w = load(&file)?;
            let o = brute_force_optimum(&w, cap).map_err(|e| e.to_string())?;
            write!(out, "{}", emit_result(&o, Verbosity::Quiet)).map_err(io)?;
            Ok(exit_code(o.status))
        }
        Command::Check { file, values } => {
            let w = load(&file)?;
            let vals: Vec<usize> = values
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| format!("bad value `{v}`")))
                .collect::<Result<_, _>>()?;
            if vals.len() != w.num_vars() {
                return Err(format!(
                    "expected {} values, got {}",
                    w.num_vars(),
                    vals.len()
                ));
            }
            for (x, (&v, var)) in vals.iter().zip(w.variables()).enumerate() {
                if v >= var.domain_size {
                    return Err(format!("value {v} outside the domain of variable {x}"));
                }
            }
            writeln!(out, "{}", w.evaluate(&Instantiation::new(vals))).map_err(io)?;
            Ok(EXIT_SOLUTION)
        }
        Command::Gen {
            vars,
            domain,
            constraints,
            arity,
            costs,
            defaults,
            top,
            seed,
        } => {
            let p = GenParams {
                vars,
                domain,
                constraints,
                arity,
                costs: menu(&costs, top)?,
                defaults: menu(&defaults, top)?,
                top,
                seed,
            };
            let w = random_instance(&p).map_err(|e| e.to_string())?;
            write!(out, "{}", write_wcsp(&w)).map_err(io)?;
            Ok(EXIT_SOLUTION)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warning_on_reachable_top() {
        let w = parse_wcsp("p 1 2 2 10\n2\n1 0 0 1\n1 6\n1 0 0 1\n1 6\n").unwrap();
        assert!(top_warning(&w).is_some());
        let w = parse_wcsp("p 1 2 1 10\n2\n1 0 0 1\n1 6\n").unwrap();
        assert!(top_warning(&w).is_none());
    }

    #[test]
    fn menus() {
        assert_eq!(menu("0,5,k", 9), Ok(vec![0, 5, 9]));
        assert!(menu("0,x", 9).is_err());
    }
}
