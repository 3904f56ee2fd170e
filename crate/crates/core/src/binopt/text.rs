//! Plain-text fixtures for QUBO and HUBO models.
//!
//! One term per line: `i coeff`, `i j coeff`, or for HUBO any number of
//! indices followed by the coefficient. `c0 coeff` sets the constant and an
//! optional `n count` line declares the variable count (otherwise it is one
//! past the largest index). `#` starts a comment. Repeated terms accumulate.
//!
//! ```text
//! # x0 + 2 x0 x1 - 0.5
//! n 3
//! 0 1.0
//! 0 1 2.0
//! c0 -0.5
//! ```

use std::fmt::Write;

use super::{HuboModel, QuboModel};
use crate::error::{Error, Result};

enum Line {
    Count(usize),
    Constant(f64),
    Term(Vec<usize>, f64),
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_lines(src: &str) -> Result<Vec<(usize, Line)>> {
    let mut out = Vec::new();
    for (no, raw) in src.lines().enumerate() {
        let line_no = no + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parsed = match fields[0] {
            "n" => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "expected `n <count>`"));
                }
                let n = fields[1]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad variable count `{}`", fields[1])))?;
                Line::Count(n)
            }
            "c0" => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "expected `c0 <coeff>`"));
                }
                Line::Constant(parse_coeff(fields[1], line_no)?)
            }
            _ => {
                if fields.len() < 2 {
                    return Err(parse_err(line_no, "expected indices followed by a coefficient"));
                }
                let (idx, coeff) = fields.split_at(fields.len() - 1);
                let indices = idx
                    .iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| parse_err(line_no, format!("bad index `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Line::Term(indices, parse_coeff(coeff[0], line_no)?)
            }
        };
        out.push((line_no, parsed));
    }
    Ok(out)
}

fn parse_coeff(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(line, format!("bad coefficient `{s}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite coefficient `{s}`")));
    }
    Ok(v)
}

fn variable_count(lines: &[(usize, Line)]) -> Result<usize> {
    let inferred = lines
        .iter()
        .filter_map(|(_, l)| match l {
            Line::Term(idx, _) => idx.iter().max().map(|m| m + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let mut declared = None;
    for (no, l) in lines {
        if let Line::Count(n) = l {
            if declared.is_some() {
                return Err(parse_err(*no, "variable count declared twice"));
            }
            if *n < inferred {
                return Err(parse_err(
                    *no,
                    format!("declared {n} variables but index {} used", inferred - 1),
                ));
            }
            declared = Some(*n);
        }
    }
    Ok(declared.unwrap_or(inferred))
}

pub fn parse_qubo(src: &str) -> Result<QuboModel> {
    let lines = parse_lines(src)?;
    let mut q = QuboModel::new(variable_count(&lines)?);
    for (no, line) in lines {
        match line {
            Line::Count(_) => {}
            Line::Constant(c) => q.add_constant(c),
            Line::Term(idx, c) => match idx.as_slice() {
                [i] => q.add_linear(*i, c)?,
                [i, j] => q.add_quadratic(*i, *j, c)?,
                _ => return Err(parse_err(no, "QUBO terms take one or two indices")),
            },
        }
    }
    Ok(q)
}

pub fn parse_hubo(src: &str) -> Result<HuboModel> {
    let lines = parse_lines(src)?;
    let mut h = HuboModel::new(variable_count(&lines)?);
    for (_, line) in lines {
        match line {
            Line::Count(_) => {}
            Line::Constant(c) => h.add_constant(c),
            Line::Term(idx, c) => h.add_term(&idx, c)?,
        }
    }
    Ok(h)
}

pub fn write_qubo(q: &QuboModel) -> String {
    let mut s = String::new();
    writeln!(s, "n {}", q.n_vars()).unwrap();
    if q.constant() != 0.0 {
        writeln!(s, "c0 {:?}", q.constant()).unwrap();
    }
    for (i, c) in q.linear() {
        writeln!(s, "{i} {c:?}").unwrap();
    }
    for ((i, j), c) in q.quadratic() {
        writeln!(s, "{i} {j} {c:?}").unwrap();
    }
    s
}

pub fn write_hubo(h: &HuboModel) -> String {
    let mut s = String::new();
    writeln!(s, "n {}", h.n_vars()).unwrap();
    if h.constant() != 0.0 {
        writeln!(s, "c0 {:?}", h.constant()).unwrap();
    }
    for (set, c) in h.terms() {
        for i in set {
            write!(s, "{i} ").unwrap();
        }
        writeln!(s, "{c:?}").unwrap();
    }
    s
}
