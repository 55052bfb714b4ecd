use std::fmt::Write as _;
use std::io;

use super::{MilpModel, Sense};

/// `%.12g`: twelve significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 ..= 1e12`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the model in fixed-column MPS. Fields are whitespace separated, so
/// names longer than eight characters are kept intact; integer columns sit
/// between INTORG/INTEND markers and carry an explicit upper bound of 1.
pub fn write_mps(model: &MilpModel, name: &str) -> String {
    let mut out = String::new();
    let rows = model.rows();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    out.push_str(" N  obj\n");
    for r in rows {
        let tag = match r.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {tag}  {}", r.name);
    }

    // column-major view, objective first, then rows in emission order
    let vars = model.variables();
    let mut by_col: Vec<Vec<(&str, f64)>> = vec![Vec::new(); vars.len()];
    for &(j, c) in model.objective_terms() {
        by_col[j].push(("obj", c));
    }
    for r in rows {
        for &(j, c) in &r.terms {
            by_col[j].push((r.name.as_str(), c));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (j, v) in vars.iter().enumerate() {
        if v.binary != in_int {
            let marker = if v.binary { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER                 'MARKER'                 '{marker}'");
            in_int = v.binary;
        }
        if by_col[j].is_empty() {
            let _ = writeln!(out, "    {:<8}  {:<8}  {}", v.name, "obj", 0);
        }
        for &(row, c) in &by_col[j] {
            let _ = writeln!(out, "    {:<8}  {:<8}  {}", v.name, row, format_number(c));
        }
    }
    if in_int {
        out.push_str("    MARKER                 'MARKER'                 'INTEND'\n");
    }

    out.push_str("RHS\n");
    if model.objective_offset() != 0.0 {
        // the objective row's right-hand side is the negated constant
        let _ = writeln!(out, "    {:<8}  {:<8}  {}", "RHS", "obj", format_number(-model.objective_offset()));
    }
    for r in rows.iter().filter(|r| r.rhs != 0.0) {
        let _ = writeln!(out, "    {:<8}  {:<8}  {}", "RHS", r.name, format_number(r.rhs));
    }

    out.push_str("BOUNDS\n");
    for v in vars {
        if v.binary {
            let _ = writeln!(out, " UP BND       {:<8}  1", v.name);
            continue;
        }
        if v.lower != 0.0 {
            if v.lower.is_finite() {
                let _ = writeln!(out, " LO BND       {:<8}  {}", v.name, format_number(v.lower));
            } else {
                let _ = writeln!(out, " MI BND       {}", v.name);
            }
        }
        if v.upper.is_finite() {
            let _ = writeln!(out, " UP BND       {:<8}  {}", v.name, format_number(v.upper));
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn write_mps_to<W: io::Write>(model: &MilpModel, name: &str, mut w: W) -> io::Result<()> {
    w.write_all(write_mps(model, name).as_bytes())
}

fn push_expr(out: &mut String, terms: impl Iterator<Item = (String, f64)>) {
    let mut line_len = 0;
    let mut first = true;
    for (name, c) in terms {
        let piece = match (first, c < 0.0) {
            (true, false) => format!("{} {name}", format_number(c)),
            (true, true) => format!("- {} {name}", format_number(-c)),
            (false, false) => format!(" + {} {name}", format_number(c)),
            (false, true) => format!(" - {} {name}", format_number(-c)),
        };
        if line_len + piece.len() > 200 {
            out.push_str("\n  ");
            line_len = 2;
        }
        line_len += piece.len();
        out.push_str(&piece);
        first = false;
    }
    if first {
        out.push_str("0 ");
        out.push_str("x0");
    }
}

/// CPLEX-style LP text of the same model.
pub fn write_lp(model: &MilpModel, name: &str) -> String {
    let vars = model.variables();
    let col = |j: usize| vars[j].name.clone();
    let mut out = format!("\\ {name}\nMinimize\n obj: ");
    push_expr(&mut out, model.objective_terms().iter().map(|&(j, c)| (col(j), c)));
    let offset = model.objective_offset();
    if offset > 0.0 {
        let _ = write!(out, " + {}", format_number(offset));
    } else if offset < 0.0 {
        let _ = write!(out, " - {}", format_number(-offset));
    }
    out.push_str("\nSubject To\n");
    for r in model.rows() {
        let _ = write!(out, " {}: ", r.name);
        push_expr(&mut out, r.terms.iter().map(|&(j, c)| (col(j), c)));
        let op = match r.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", format_number(r.rhs));
    }
    out.push_str("Bounds\n");
    for v in vars {
        let lo = if v.lower.is_finite() { format_number(v.lower) } else { "-inf".into() };
        if v.upper.is_finite() {
            let _ = writeln!(out, " {lo} <= {} <= {}", v.name, format_number(v.upper));
        } else {
            let _ = writeln!(out, " {} >= {lo}", v.name);
        }
    }
    out.push_str("Binaries\n");
    for v in vars.iter().filter(|v| v.binary) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("End\n");
    out
}

pub fn write_lp_to<W: io::Write>(model: &MilpModel, name: &str, mut w: W) -> io::Result<()> {
    w.write_all(write_lp(model, name).as_bytes())
}
