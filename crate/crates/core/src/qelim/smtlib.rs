//! SMT-LIB 2 export and the external-solver process bridge.
//!
//! The exported script targets quantifier-free nonlinear real arithmetic:
//! one real constant per quantified variable, one assertion per atom for a
//! single-clause body (a single disjunctive assertion otherwise), then
//! `(check-sat)`. The text is byte-deterministic for a given query.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Duration;

use num_traits::{One, Signed};

use crate::formula::{Guard, Relation};
use crate::poly::{Poly, Rat, VariableId};

use super::ExistentialQuery;

/// Export is only defined for pure satisfiability queries.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("query has free variables; only pure satisfiability queries can be exported")]
    FreeVariables,
}

/// Verdict read back from the external process.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ExternalVerdict {
    Sat,
    Unsat,
    Unknown(String),
}

/// SMT-LIB-safe symbol for a variable. Derivatives map to `name_dK`.
fn smt_name(v: &VariableId) -> String {
    match v {
        VariableId::Time => "t".to_string(),
        VariableId::Dependent { order: 0, name, .. } => name.to_string(),
        VariableId::Dependent { order, name, .. } => format!("{name}_d{order}"),
        VariableId::Parameter { name } => name.to_string(),
    }
}

fn rat_sexpr(c: &Rat) -> String {
    let abs = c.abs();
    let body = if abs.denom().is_one() {
        format!("{}", abs.numer())
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if c.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn poly_sexpr(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let terms: Vec<String> = p
        .terms()
        .rev()
        .map(|(m, c)| {
            let mut factors: Vec<String> = Vec::new();
            let coeff_is_one = c.is_one();
            if !coeff_is_one || m.is_one() {
                factors.push(rat_sexpr(c));
            }
            for (v, e) in m.powers() {
                for _ in 0..e {
                    factors.push(smt_name(v));
                }
            }
            if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                format!("(* {})", factors.join(" "))
            }
        })
        .collect();
    if terms.len() == 1 {
        terms.into_iter().next().unwrap()
    } else {
        format!("(+ {})", terms.join(" "))
    }
}

fn atom_sexpr(p: &Poly, rel: Relation) -> String {
    let lhs = poly_sexpr(p);
    match rel {
        Relation::Eq => format!("(= {lhs} 0)"),
        Relation::Ne => format!("(not (= {lhs} 0))"),
        Relation::Lt => format!("(< {lhs} 0)"),
        Relation::Le => format!("(<= {lhs} 0)"),
        Relation::Gt => format!("(> {lhs} 0)"),
        Relation::Ge => format!("(>= {lhs} 0)"),
    }
}

fn clause_sexpr(clause: &Guard) -> String {
    let atoms: Vec<String> =
        clause.atoms().iter().map(|a| atom_sexpr(a.poly(), a.relation())).collect();
    match atoms.len() {
        0 => "true".to_string(),
        1 => atoms.into_iter().next().unwrap(),
        _ => format!("(and {})", atoms.join(" ")),
    }
}

/// Renders the query as a complete SMT-LIB 2 script.
///
/// # Errors
/// Queries with free variables are unsupported.
pub fn export_smtlib(query: &ExistentialQuery) -> Result<String, ExportError> {
    if !query.free_vars().is_empty() {
        return Err(ExportError::FreeVariables);
    }
    let mut out = String::new();
    writeln!(out, "(set-logic QF_NRA)").unwrap();
    for v in &query.quantified {
        writeln!(out, "(declare-const {} Real)", smt_name(v)).unwrap();
    }
    let clauses = query.body.clauses();
    match clauses.len() {
        0 => writeln!(out, "(assert false)").unwrap(),
        1 => {
            for a in clauses[0].atoms() {
                writeln!(out, "(assert {})", atom_sexpr(a.poly(), a.relation())).unwrap();
            }
        }
        _ => {
            let parts: Vec<String> = clauses.iter().map(clause_sexpr).collect();
            writeln!(out, "(assert (or {}))", parts.join(" ")).unwrap();
        }
    }
    writeln!(out, "(check-sat)").unwrap();
    Ok(out)
}

/// Runs the solver binary on the script with a hard timeout; the first
/// line of standard output is the verdict. Timeouts and unreadable output
/// yield `Unknown`.
pub fn run_external(script: &str, solver: &Path, timeout: Duration) -> ExternalVerdict {
    let mut file = match tempfile::Builder::new().suffix(".smt2").tempfile() {
        Ok(f) => f,
        Err(e) => return ExternalVerdict::Unknown(format!("tempfile: {e}")),
    };
    if let Err(e) = file.write_all(script.as_bytes()) {
        return ExternalVerdict::Unknown(format!("write: {e}"));
    }
    let child = std::process::Command::new(solver)
        .arg(file.path())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::null())
        .spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => return ExternalVerdict::Unknown(format!("spawn {}: {e}", solver.display())),
    };
    let deadline = std::time::Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if std::time::Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return ExternalVerdict::Unknown("timeout".to_string());
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return ExternalVerdict::Unknown(format!("wait: {e}")),
        }
    }
    let mut output = String::new();
    if let Some(mut stdout) = child.stdout.take() {
        use std::io::Read;
        let _ = stdout.read_to_string(&mut output);
    }
    match output.lines().next().map(str::trim) {
        Some("sat") => ExternalVerdict::Sat,
        Some("unsat") => ExternalVerdict::Unsat,
        Some(other) => ExternalVerdict::Unknown(format!("solver said `{other}`")),
        None => ExternalVerdict::Unknown("empty solver output".to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{simplify, Atom, AtomValue, DnfFormula};
    use std::collections::BTreeSet;

    fn t() -> Poly {
        Poly::var(VariableId::time())
    }
    fn u(order: u32) -> Poly {
        Poly::var(VariableId::dependent(0, order, "u"))
    }

    #[test]
    fn export_declares_and_asserts() {
        let g = Guard::of_atoms(vec![
            Atom::new(t(), Relation::Eq),
            Atom::new(&(&u(0).pow(2) + &u(0)) - &Poly::one(), Relation::Eq),
        ]);
        let q = ExistentialQuery::new(
            [VariableId::time(), VariableId::dependent(0, 0, "u")].into_iter().collect(),
            simplify(&g),
        );
        let script = export_smtlib(&q).unwrap();
        assert!(script.starts_with("(set-logic QF_NRA)\n"));
        assert!(script.contains("(declare-const t Real)"));
        assert!(script.contains("(declare-const u Real)"));
        assert!(script.contains("(assert (= t 0))"));
        assert!(script.contains("(assert (= (+ (* u u) u (- 1)) 0))"));
        assert!(script.ends_with("(check-sat)\n"));
        // Byte-deterministic.
        assert_eq!(script, export_smtlib(&q).unwrap());
    }

    #[test]
    fn export_factored_disjunction_as_single_assert() {
        let g = Guard::of_atoms(vec![
            Atom::new(t(), Relation::Eq),
            Atom::new(&u(0).pow(2) - &Poly::one(), Relation::Eq),
        ]);
        let q = ExistentialQuery::new(
            [VariableId::time(), VariableId::dependent(0, 0, "u")].into_iter().collect(),
            simplify(&g),
        );
        let script = export_smtlib(&q).unwrap();
        assert!(script.contains("(assert (or "));
        assert!(script.contains("(= t 0)"));
    }

    #[test]
    fn export_empty_body_has_no_assertions() {
        let q = ExistentialQuery::new(BTreeSet::new(), DnfFormula::truth());
        let script = export_smtlib(&q).unwrap();
        assert!(!script.contains("(assert"));
        assert!(script.contains("(check-sat)"));
    }

    #[test]
    fn export_rejects_free_variables() {
        let g = Guard::of_atoms(vec![Atom::new(
            Poly::var(VariableId::parameter("chi")),
            Relation::Gt,
        )]);
        let q = ExistentialQuery::new(BTreeSet::new(), simplify(&g));
        assert_eq!(export_smtlib(&q), Err(ExportError::FreeVariables));
    }

    #[test]
    fn derivative_names_are_mangled() {
        let g = Guard::of_atoms(vec![Atom::new(u(2), Relation::Eq)]);
        let q = ExistentialQuery::new(
            [VariableId::dependent(0, 2, "u")].into_iter().collect(),
            simplify(&g),
        );
        let script = export_smtlib(&q).unwrap();
        assert!(script.contains("(declare-const u_d2 Real)"));
        assert!(script.contains("(assert (= u_d2 0))"));
    }

    #[test]
    fn missing_solver_reports_unknown() {
        let verdict = run_external(
            "(set-logic QF_NRA)\n(check-sat)\n",
            Path::new("/nonexistent/solver-binary"),
            Duration::from_secs(1),
        );
        assert!(matches!(verdict, ExternalVerdict::Unknown(_)));
    }
}
