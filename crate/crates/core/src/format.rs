//! Reader and writer for the `wcsp` text format.
//!
//! ```text
//! name n maxDomSize e k
//! d_0 d_1 ... d_{n-1}
//! arity v_1 ... v_arity defaultCost t     (e blocks)
//! a_1 ... a_arity cost                    (t lines per block)
//! ```
//!
//! Tokens are separated by arbitrary whitespace. Costs at or above `k` are
//! read as `k`.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cost::Cost;
use crate::model::{ModelError, SoftConstraint, Tuple, Wcn};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: bad header: {msg}")]
    BadHeader {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: arity mismatch: {msg}")]
    ArityMismatch {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: variable {var} is not declared")]
    UnknownVariable { line: usize, col: usize, var: u64 },
    #[error("{line}:{col}: value {value} is outside the domain of variable {var} (size {size})")]
    ValueOutOfDomain {
        line: usize,
        col: usize,
        var: usize,
        value: u64,
        size: usize,
    },
    #[error("{line}:{col}: tuple {tuple:?} listed twice")]
    DuplicateTuple {
        line: usize,
        col: usize,
        tuple: Tuple,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

struct Tokens<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut toks = Vec::new();
        let mut end = (1, 1);
        for (li, line) in text.lines().enumerate() {
            let mut rest = line;
            let mut col = 1;
            loop {
                let trimmed = rest.trim_start();
                col += rest.len() - trimmed.len();
                if trimmed.is_empty() {
                    break;
                }
                let len = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
                toks.push(Token {
                    text: &trimmed[..len],
                    line: li + 1,
                    col,
                });
                col += len;
                rest = &trimmed[len..];
            }
            end = (li + 1, col);
        }
        Tokens { toks, pos: 0, end }
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>, ParseError> {
        match self.toks.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(ParseError::BadHeader {
                line: self.end.0,
                col: self.end.1,
                msg: format!("input ends before {what}; declared counts exceed the contents"),
            }),
        }
    }

    fn number(&mut self, what: &str) -> Result<(u64, Token<'a>), ParseError> {
        let t = self.next(what)?;
        let v = t.text.parse::<u64>().map_err(|_| ParseError::Syntax {
            line: t.line,
            col: t.col,
            msg: format!("expected {what} (non-negative integer), found `{}`", t.text),
        })?;
        Ok((v, t))
    }
}

fn bad_header(t: Token<'_>, msg: impl Into<String>) -> ParseError {
    ParseError::BadHeader {
        line: t.line,
        col: t.col,
        msg: msg.into(),
    }
}

/// Parses a network in `wcsp` format.
pub fn parse_wcsp(text: &str) -> Result<Wcn, ParseError> {
    let mut tk = Tokens::new(text);
    let name = tk.next("the problem name")?.text.to_string();
    let (n, nt) = tk.number("the number of variables")?;
    let (max_dom, mt) = tk.number("the maximal domain size")?;
    let (e, _) = tk.number("the number of constraints")?;
    let (k, kt) = tk.number("the top cost")?;
    if n == 0 {
        return Err(bad_header(nt, "the number of variables must be positive"));
    }
    if max_dom == 0 {
        return Err(bad_header(mt, "the maximal domain size must be positive"));
    }
    if k == 0 {
        return Err(bad_header(kt, "the top cost must be positive"));
    }
    let top = Cost(k);
    let n = n as usize;

    let mut domains = Vec::with_capacity(n);
    for x in 0..n {
        let (d, t) = tk.number("a domain size")?;
        if d == 0 || d > max_dom {
            return Err(bad_header(
                t,
                format!("domain size {d} of variable {x} is not in 1..={max_dom}"),
            ));
        }
        domains.push(d as usize);
    }

    let mut constraints = Vec::new();
    for _ in 0..e {
        let (arity, at) = tk.number("a constraint arity")?;
        if arity == 0 || arity as usize > n {
            return Err(ParseError::ArityMismatch {
                line: at.line,
                col: at.col,
                msg: format!("arity {arity} is not in 1..={n}"),
            });
        }
        let arity = arity as usize;
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let (v, t) = tk.number("a scope variable")?;
            if v >= n as u64 {
                return Err(ParseError::UnknownVariable {
                    line: t.line,
                    col: t.col,
                    var: v,
                });
            }
            if scope.contains(&(v as usize)) {
                return Err(ParseError::ArityMismatch {
                    line: t.line,
                    col: t.col,
                    msg: format!("variable {v} occurs twice in the scope"),
                });
            }
            scope.push(v as usize);
        }
        let (default, _) = tk.number("a default cost")?;
        let (count, _) = tk.number("a tuple count")?;
        let mut raw = Vec::new();
        let mut seen = HashSet::new();
        for _ in 0..count {
            let mut tuple = Vec::with_capacity(arity);
            let mut first = None;
            for &x in &scope {
                let (v, t) = tk.number("a tuple value")?;
                first.get_or_insert(t);
                if v >= domains[x] as u64 {
                    return Err(ParseError::ValueOutOfDomain {
                        line: t.line,
                        col: t.col,
                        var: x,
                        value: v,
                        size: domains[x],
                    });
                }
                tuple.push(v as usize);
            }
            let (c, _) = tk.number("a tuple cost")?;
            let first = first.unwrap();
            if !seen.insert(tuple.clone()) {
                return Err(ParseError::DuplicateTuple {
                    line: first.line,
                    col: first.col,
                    tuple,
                });
            }
            raw.push((tuple, Cost(c.min(k))));
        }
        constraints.push(SoftConstraint::new(
            scope,
            raw,
            Cost(default.min(k)),
            &domains,
            top,
        )?);
    }
    if let Some(t) = tk.toks.get(tk.pos) {
        return Err(bad_header(
            *t,
            format!(
                "unexpected token `{}` after the {e} declared constraints",
                t.text
            ),
        ));
    }
    Ok(Wcn::new(name, domains, constraints, top)?)
}

/// Writes `w` in `wcsp` format. Tuples are listed layer by layer.
pub fn write_wcsp(w: &Wcn) -> String {
    let domains = w.domain_sizes();
    let max_dom = domains.iter().copied().max().unwrap_or(1);
    let mut out = String::new();
    let name = if w.name().is_empty() {
        "wcsp"
    } else {
        w.name()
    };
    writeln!(
        out,
        "{} {} {} {} {}",
        name,
        w.num_vars(),
        max_dom,
        w.constraints().len(),
        w.top()
    )
    .unwrap();
    out.push_str(&join(&domains));
    out.push('\n');
    for c in w.constraints() {
        writeln!(
            out,
            "{} {} {} {}",
            c.arity(),
            join(c.scope()),
            c.default_cost(),
            c.explicit_len()
        )
        .unwrap();
        for (t, cost) in c.explicit_tuples() {
            writeln!(out, "{} {}", join(t), cost).unwrap();
        }
    }
    out
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::fig3;

    pub(crate) const FIG3: &str = "fig3 2 3 3 1000
3 3
1 0 0 2
1 10
2 100
2 0 1 100 2
0 1 0
2 0 5
1 1 0 2
1 10
2 100
";

    #[test]
    fn parses_fig3() {
        let w = parse_wcsp(FIG3).unwrap();
        assert_eq!(w, fig3());
    }

    #[test]
    fn writes_fig3_in_layer_order() {
        let text = write_wcsp(&parse_wcsp(FIG3).unwrap());
        assert_eq!(parse_wcsp(&text).unwrap(), fig3());
        assert!(text.starts_with("fig3 2 3 3 1000\n3 3\n"));
    }

    #[test]
    fn whitespace_insensitive() {
        let squashed = FIG3.split_whitespace().collect::<Vec<_>>().join("  ");
        assert_eq!(parse_wcsp(&squashed).unwrap(), fig3());
    }

    #[test]
    fn zero_constraints() {
        let w = parse_wcsp("e 2 2 0 10\n2 2\n").unwrap();
        assert!(w.constraints().is_empty());
    }

    #[test]
    fn value_out_of_domain_reports_position() {
        let err = parse_wcsp("p 1 2 1 10\n2\n1 0 0 1\n  5 3\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::ValueOutOfDomain {
                line: 4,
                col: 3,
                var: 0,
                value: 5,
                size: 2
            }
        );
    }

    #[test]
    fn costs_clamped_to_top() {
        let w = parse_wcsp("p 1 2 1 10\n2\n1 0 50 1\n0 99\n").unwrap();
        let c = &w.constraints()[0];
        assert_eq!(c.nb_layers(), 1);
        assert_eq!(c.default_cost(), Cost(10));
    }
}
