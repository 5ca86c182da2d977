//! CPLEX-style `.lp` text export, readable by common external solvers.
//!
//! Identifiers are the variable/row names with every character outside
//! `[A-Za-z0-9_.]` replaced by `_`; coefficients use shortest round-trip
//! formatting so re-reading loses no precision.

use std::fmt::Write as _;
use std::io::{self, Write};

use super::LpProblem;

fn ident(raw: &str) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.starts_with(|c: char| c.is_ascii_digit() || c == '.') || s.is_empty() {
        s.insert(0, '_');
    }
    s
}

fn term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    if *first {
        if coef < 0.0 {
            let _ = write!(out, " - {} {}", -coef, name);
        } else {
            let _ = write!(out, " {coef} {name}");
        }
        *first = false;
    } else if coef < 0.0 {
        let _ = write!(out, " - {} {}", -coef, name);
    } else {
        let _ = write!(out, " + {coef} {name}");
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Writes `lp` in LP text format.
pub fn write_lp<W: Write>(lp: &LpProblem, mut w: W) -> io::Result<()> {
    let names: Vec<String> = lp.vars.iter().map(|k| ident(&k.to_string())).collect();

    writeln!(w, "\\ {} columns, {} rows", lp.num_vars(), lp.num_rows())?;
    writeln!(w, "Minimize")?;
    let mut line = String::from(" obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut line, &mut first, c, &names[j]);
        }
    }
    if first {
        line.push_str(" 0");
    }
    writeln!(w, "{line}")?;

    writeln!(w, "Subject To")?;
    for (i, row) in lp.rows.iter().enumerate() {
        let mut line = format!(" r{i}_{}:", ident(&row.name));
        let mut first = true;
        for &(c, v) in &row.coeffs {
            term(&mut line, &mut first, v, &names[c]);
        }
        if first {
            // Empty rows still need a term to be parseable.
            line.push_str(" 0 ");
            line.push_str(names.first().map(String::as_str).unwrap_or("_zero"));
        }
        let _ = write!(line, " {} {}", row.relation.symbol(), row.rhs);
        writeln!(w, "{line}")?;
    }

    writeln!(w, "Bounds")?;
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let n = &names[j];
        match (lo, hi) {
            (l, h) if l == f64::NEG_INFINITY && h == f64::INFINITY => writeln!(w, " {n} free")?,
            (l, h) if l == h => writeln!(w, " {n} = {l}")?,
            (l, h) if l == 0.0 && h == f64::INFINITY => {}
            (l, h) => writeln!(w, " {} <= {n} <= {}", fmt_bound(l), fmt_bound(h))?,
        }
    }
    writeln!(w, "End")
}
