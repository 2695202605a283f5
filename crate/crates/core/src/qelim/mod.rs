//! Real satisfiability and one-block existential quantifier elimination.
//!
//! The internal engine eliminates quantified variables by virtual
//! substitution for atoms of degree at most two. Queries that exceed the
//! degree cap fall back to an external SMT solver over a text bridge when
//! one is configured; otherwise the verdict is `Unknown`, which is a value,
//! not an error — unverified cases are kept and flagged downstream rather
//! than silently dropped.

mod smtlib;
mod vsubst;

pub use smtlib::{export_smtlib, run_external, ExportError, ExternalVerdict};
pub use vsubst::NotEliminable;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use crate::formula::{to_dnf, DnfFormula, Formula, Guard};
use crate::poly::VariableId;

use vsubst::{root_points, substitute_clause, TestPoint};

/// One existential block over a quantifier-free DNF body; every variable of
/// the body not listed in `quantified` is free.
#[derive(Clone, Debug)]
pub struct ExistentialQuery {
    pub quantified: BTreeSet<VariableId>,
    pub body: DnfFormula,
}

impl ExistentialQuery {
    pub fn new(quantified: BTreeSet<VariableId>, body: DnfFormula) -> Self {
        ExistentialQuery { quantified, body }
    }

    pub fn free_vars(&self) -> BTreeSet<VariableId> {
        self.body.vars().difference(&self.quantified).cloned().collect()
    }
}

/// Verdict of [`decide`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum QueryResult {
    Unsat,
    Sat,
    /// Satisfiable exactly where the condition over the free variables
    /// holds.
    Conditional(DnfFormula),
    /// No verdict; the reason and any partial residual are reported.
    Unknown { reason: String, partial: Option<DnfFormula> },
}

/// Which decision backend drives pure satisfiability queries.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Backend {
    #[default]
    Internal,
    External,
}

/// External-solver configuration; the bridge is used as a fallback for the
/// internal engine or as the primary backend when selected.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub backend: Backend,
    pub solver_path: Option<PathBuf>,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Internal,
            solver_path: std::env::var_os("ODESING_SOLVER").map(PathBuf::from),
            timeout: Duration::from_secs(10),
        }
    }
}

impl SolverConfig {
    pub fn internal_only() -> Self {
        SolverConfig {
            backend: Backend::Internal,
            solver_path: None,
            timeout: Duration::from_secs(10),
        }
    }
}

/// Eliminates one variable from a conjunction by virtual substitution.
/// Every atom must have degree at most two in `v`; the result is an
/// equivalent formula not containing `v`, passed through the simplifier.
///
/// # Errors
/// Degree three or higher in `v` is signalled as [`NotEliminable`]; the
/// caller falls back to another variable order or the external bridge.
pub fn eliminate_var(v: &VariableId, clause: &Guard) -> Result<DnfFormula, NotEliminable> {
    let mut disjuncts = vec![substitute_clause(clause, v, &TestPoint::NegInf)];
    for atom in clause.atoms() {
        let deg = atom.poly().degree_in(v);
        if deg == 0 {
            continue;
        }
        let strict = matches!(
            atom.relation(),
            crate::formula::Relation::Lt
                | crate::formula::Relation::Gt
                | crate::formula::Relation::Ne
        );
        for (guard_formula, root) in root_points(atom.poly(), v)? {
            let point = if strict { TestPoint::JustAbove(root) } else { TestPoint::At(root) };
            disjuncts.push(Formula::and(vec![
                guard_formula,
                substitute_clause(clause, v, &point),
            ]));
        }
    }
    Ok(to_dnf(&Formula::or(disjuncts)))
}

struct Blocked {
    inner: NotEliminable,
}

fn eliminate_clause(
    clause: &Guard,
    quantified: &BTreeSet<VariableId>,
) -> Result<Vec<Guard>, Blocked> {
    let vars = clause.vars();
    // Heuristic order: lowest maximal degree first, ties by variable order.
    let next = quantified
        .iter()
        .filter(|v| vars.contains(*v))
        .map(|v| {
            let deg = clause.atoms().iter().map(|a| a.poly().degree_in(v)).max().unwrap_or(0);
            (deg, v.clone())
        })
        .min();
    let Some((_, v)) = next else {
        return Ok(vec![clause.clone()]);
    };
    let dnf = eliminate_var(&v, clause).map_err(|inner| Blocked { inner })?;
    let mut out = Vec::new();
    for c in dnf.clauses() {
        out.extend(eliminate_clause(c, quantified)?);
    }
    Ok(out)
}

/// Decides the existential query.
///
/// Quantified variables are eliminated clause-wise. When everything
/// eliminates: with no free variables the verdict is `Sat`/`Unsat`, otherwise
/// the residual formula over the free variables is returned as
/// `Conditional` (or folded to `Sat`/`Unsat` when constant). When the degree
/// cap blocks elimination: pure satisfiability queries are delegated to the
/// external bridge if configured, otherwise the result is `Unknown`.
pub fn decide(query: &ExistentialQuery, config: &SolverConfig) -> QueryResult {
    let free = query.free_vars();

    if config.backend == Backend::External && free.is_empty() {
        if let Some(path) = &config.solver_path {
            return match bridge(query, path, config.timeout) {
                Ok(verdict) => verdict,
                Err(reason) => QueryResult::Unknown { reason, partial: None },
            };
        }
    }

    let mut residual = Vec::new();
    for clause in query.body.clauses() {
        match eliminate_clause(clause, &query.quantified) {
            Ok(clauses) => residual.extend(clauses),
            Err(blocked) => {
                let reason = format!("virtual substitution blocked: {}", blocked.inner);
                if free.is_empty() {
                    if let Some(path) = &config.solver_path {
                        return match bridge(query, path, config.timeout) {
                            Ok(verdict) => verdict,
                            Err(reason) => QueryResult::Unknown { reason, partial: None },
                        };
                    }
                }
                let partial = DnfFormula::from_clauses(residual);
                return QueryResult::Unknown { reason, partial: Some(partial) };
            }
        }
    }
    let residual = DnfFormula::from_clauses(residual);
    debug_assert!(
        residual.vars().iter().all(|v| free.contains(v)),
        "residual must only mention free variables"
    );
    if residual.is_false() {
        QueryResult::Unsat
    } else if free.is_empty() || residual.is_true() {
        QueryResult::Sat
    } else {
        QueryResult::Conditional(residual)
    }
}

fn bridge(
    query: &ExistentialQuery,
    path: &std::path::Path,
    timeout: Duration,
) -> Result<QueryResult, String> {
    let script = export_smtlib(query).map_err(|e| e.to_string())?;
    match run_external(&script, path, timeout) {
        ExternalVerdict::Sat => Ok(QueryResult::Sat),
        ExternalVerdict::Unsat => Ok(QueryResult::Unsat),
        ExternalVerdict::Unknown(reason) => Err(format!("external solver: {reason}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{simplify, Atom, AtomValue, Relation, SignSet};
    use crate::poly::{rat, Poly};

    fn t() -> Poly {
        Poly::var(VariableId::time())
    }
    fn u(order: u32) -> Poly {
        Poly::var(VariableId::dependent(0, order, "u"))
    }
    fn uvar(order: u32) -> VariableId {
        VariableId::dependent(0, order, "u")
    }
    fn chi() -> Poly {
        Poly::var(VariableId::parameter("chi"))
    }

    fn clause(atoms: Vec<AtomValue>) -> Guard {
        let g = Guard::of_atoms(atoms);
        assert!(!g.is_trivially_false());
        g
    }

    #[test]
    fn eliminate_solvability_of_quadratic_equation() {
        // exists u': chi*u'^2 - 1 = 0  <=>  chi > 0
        let g = clause(vec![Atom::new(&(&chi() * &u(1).pow(2)) - &Poly::one(), Relation::Eq)]);
        let dnf = eliminate_var(&uvar(1), &g).unwrap();
        assert_eq!(dnf.clauses().len(), 1);
        assert_eq!(dnf.clauses()[0].sign_of(&chi()), Some(SignSet::POS));
        assert_eq!(dnf.clauses()[0].len(), 1);
    }

    #[test]
    fn eliminate_negative_discriminant_is_false() {
        // exists x: x^2 + 1 = 0 is false
        let g = clause(vec![Atom::new(&u(0).pow(2) + &Poly::one(), Relation::Eq)]);
        let dnf = eliminate_var(&uvar(0), &g).unwrap();
        assert!(dnf.is_false());
    }

    #[test]
    fn eliminate_linear_equation_is_true() {
        // exists x: x - t = 0 is true
        let g = clause(vec![Atom::new(&u(0) - &t(), Relation::Eq)]);
        let dnf = eliminate_var(&uvar(0), &g).unwrap();
        assert!(dnf.is_true());
    }

    #[test]
    fn eliminate_rejects_cubic() {
        let g = clause(vec![Atom::new(&u(1).pow(3) - &t(), Relation::Eq)]);
        assert!(eliminate_var(&uvar(1), &g).is_err());
    }

    #[test]
    fn eliminate_strict_inequality_band() {
        // exists x: x > 0 and x^2 < 1 is true (x slightly above zero)
        let g = clause(vec![
            Atom::new(u(0), Relation::Gt),
            Atom::new(&u(0).pow(2) - &Poly::one(), Relation::Lt),
        ]);
        let dnf = eliminate_var(&uvar(0), &g).unwrap();
        assert!(dnf.is_true(), "got {dnf}");
    }

    #[test]
    fn eliminate_empty_band_is_false() {
        // exists x: x - 1 > 0 and x + 1 < 0 is false
        let g = clause(vec![
            Atom::new(&u(0) - &Poly::one(), Relation::Gt),
            Atom::new(&u(0) + &Poly::one(), Relation::Lt),
        ]);
        let dnf = eliminate_var(&uvar(0), &g).unwrap();
        assert!(dnf.is_false(), "got {dnf}");
    }

    fn internal() -> SolverConfig {
        SolverConfig::internal_only()
    }

    #[test]
    fn decide_sphere_irregular_body_is_sat() {
        // exists t, u, u': t = 0 and u^2 - 1 = 0 and u' = 0
        let g = clause(vec![
            Atom::new(t(), Relation::Eq),
            Atom::new(&u(0).pow(2) - &Poly::one(), Relation::Eq),
            Atom::new(u(1), Relation::Eq),
        ]);
        let q = ExistentialQuery::new(
            [VariableId::time(), uvar(0), uvar(1)].into_iter().collect(),
            simplify(&g),
        );
        assert_eq!(decide(&q, &internal()), QueryResult::Sat);
    }

    #[test]
    fn decide_gather_irregular_case_is_conditional() {
        // exists t, u, u': u'^3 + chi*u*u' - t = 0 and 3u'^2 + chi*u = 0
        //                  and chi*u'^2 - 1 = 0   yields chi > 0.
        let p = &(&u(1).pow(3) + &(&(&chi() * &u(0)) * &u(1))) - &t();
        let symbol = &u(1).pow(2).scale(&rat(3)) + &(&chi() * &u(0));
        let trans = &(&chi() * &u(1).pow(2)) - &Poly::one();
        let g = clause(vec![
            Atom::new(p, Relation::Eq),
            Atom::new(symbol, Relation::Eq),
            Atom::new(trans, Relation::Eq),
        ]);
        let q = ExistentialQuery::new(
            [VariableId::time(), uvar(0), uvar(1)].into_iter().collect(),
            simplify(&g),
        );
        match decide(&q, &internal()) {
            QueryResult::Conditional(cond) => {
                assert_eq!(cond.clauses().len(), 1);
                assert_eq!(cond.clauses()[0].sign_of(&chi()), Some(SignSet::POS));
                assert_eq!(cond.clauses()[0].len(), 1);
            }
            other => panic!("expected conditional, got {other:?}"),
        }
    }

    #[test]
    fn decide_contradiction_is_unsat() {
        let g = clause(vec![
            Atom::new(&u(0).pow(2) + &Poly::one(), Relation::Eq),
            Atom::new(t(), Relation::Eq),
        ]);
        let q = ExistentialQuery::new(
            [VariableId::time(), uvar(0)].into_iter().collect(),
            simplify(&g),
        );
        assert_eq!(decide(&q, &internal()), QueryResult::Unsat);
    }

    #[test]
    fn decide_conditional_contradiction_is_unsat() {
        // gather irregular guard conjoined with chi < 0: unsatisfiable.
        let symbol = &u(1).pow(2).scale(&rat(3)) + &(&chi() * &u(0));
        let trans = &(&chi() * &u(1).pow(2)) - &Poly::one();
        let g = clause(vec![
            Atom::new(symbol, Relation::Eq),
            Atom::new(trans, Relation::Eq),
            Atom::new(chi(), Relation::Lt),
        ]);
        let q = ExistentialQuery::new([uvar(0), uvar(1)].into_iter().collect(), simplify(&g));
        assert_eq!(decide(&q, &internal()), QueryResult::Unsat);
    }

    #[test]
    fn decide_blocked_without_solver_is_unknown() {
        // Quartic in every variable, no solver configured.
        let g = clause(vec![Atom::new(
            &(&u(0).pow(4) + &t().pow(4)) - &Poly::one(),
            Relation::Eq,
        )]);
        let q = ExistentialQuery::new(
            [VariableId::time(), uvar(0)].into_iter().collect(),
            simplify(&g),
        );
        match decide(&q, &internal()) {
            QueryResult::Unknown { .. } => {}
            other => panic!("expected unknown, got {other:?}"),
        }
    }

    #[test]
    fn decide_true_body_is_sat() {
        let q = ExistentialQuery::new(BTreeSet::new(), DnfFormula::truth());
        assert_eq!(decide(&q, &internal()), QueryResult::Sat);
    }
}
