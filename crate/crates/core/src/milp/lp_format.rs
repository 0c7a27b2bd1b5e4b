//! CPLEX LP text export, for inspecting models with external tools.

use std::fmt::Write as _;

use super::{MilpProblem, Sense};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", -coef, name);
    } else if first {
        let _ = write!(out, " {coef} {name}");
    } else {
        let _ = write!(out, " + {coef} {name}");
    }
}

/// Renders `problem` in CPLEX LP format.
pub fn write_lp(problem: &MilpProblem) -> String {
    let names: Vec<String> = problem
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| format!("{}_{j}", sanitize(&v.name)))
        .collect();
    let mut out = String::from("Minimize\n obj:");
    let mut first = true;
    for (j, v) in problem.variables.iter().enumerate() {
        if v.cost != 0.0 {
            term(&mut out, first, v.cost, &names[j]);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, c) in problem.constraints.iter().enumerate() {
        let _ = write!(out, " c{i}:");
        let mut first = true;
        for &(j, a) in &c.coefs {
            term(&mut out, first, a, &names[j]);
            first = false;
        }
        if first {
            out.push_str(" 0 x_dummy");
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in problem.variables.iter().enumerate() {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, names[j], v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", names[j], v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", names[j], v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {} free", names[j]);
            }
        }
    }
    let ints: Vec<&str> = problem
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer)
        .map(|(_, n)| n.as_str())
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
