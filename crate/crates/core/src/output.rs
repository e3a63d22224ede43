//! Line-oriented result protocol: `s` status, `o` cost, `v` values and `c`
//! comment lines.

use std::fmt::Write as _;

use crate::search::{Outcome, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum Verbosity {
    /// Status, cost and values only.
    #[default]
    Quiet,
    /// Adds deterministic statistics counters.
    Stats,
    /// Adds wall-clock time, which makes the output run-dependent.
    Timing,
}

pub fn status_line(status: Status) -> &'static str {
    match status {
        Status::Optimum => "s OPTIMUM FOUND",
        Status::UpperBound => "s UPPER BOUND",
        Status::Infeasible => "s INFEASIBLE",
        Status::Unknown => "s UNKNOWN",
    }
}

pub fn emit_result(outcome: &Outcome, verbosity: Verbosity) -> String {
    let mut out = String::new();
    out.push_str(status_line(outcome.status));
    out.push('\n');
    if let Some(sol) = &outcome.solution {
        writeln!(out, "o {}", outcome.cost).unwrap();
        let values: Vec<String> = sol.values().iter().map(|v| v.to_string()).collect();
        writeln!(out, "v {}", values.join(" ")).unwrap();
    }
    if verbosity >= Verbosity::Stats {
        let s = &outcome.stats;
        for (k, v) in [
            ("fronts", s.fronts_popped),
            ("cns", s.cns_solved),
            ("mucs", s.mucs_extracted),
            ("muc_constraints", s.muc_constraints),
            ("max_muc", s.max_muc),
            ("relax_calls", s.relax_calls),
            ("nodes", s.nodes),
        ] {
            writeln!(out, "c {k}={v}").unwrap();
        }
    }
    if verbosity >= Verbosity::Timing {
        writeln!(out, "c time={:.3}", outcome.stats.elapsed.as_secs_f64()).unwrap();
    }
    out
}
