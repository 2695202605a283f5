//! End-to-end detection and classification of real geometric singularities,
//! plus a point-wise rank oracle used for cross-checking.
//!
//! The analysis builds the Vessiot linear system of the input, runs the
//! parametric elimination with the unknowns ordered `(b_1, .., b_m, a)` and
//! the transversal coefficient `a` deferred, prunes cases through the real
//! satisfiability check, and classifies each surviving case from the shape
//! of its parametric solution: one free unknown with `a` independent is
//! regular, one free unknown with `a = 0` forced is regular singular, two or
//! more free unknowns is irregular singular.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::formula::{to_dnf, DnfFormula, Formula, Guard, Relation};
use crate::jet::{vessiot_matrix, DifferentialSystem, RowSelection};
use crate::pgauss::{parametric_gauss, Assignment, EliminationTask, ParamSolution};
use crate::poly::{Poly, Rat, VariableId};
use crate::qelim::{decide, ExistentialQuery, QueryResult, SolverConfig};

/// Classification of a point (or a uniform case) of the equation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SingularityClass {
    Regular,
    RegularSingular,
    IrregularSingular,
    /// Zero-dimensional Vessiot space; cannot occur for well-prepared,
    /// not underdetermined input and is reported with a warning.
    Degenerate,
}

impl fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityClass::Regular => write!(f, "regular"),
            SingularityClass::RegularSingular => write!(f, "regular singular"),
            SingularityClass::IrregularSingular => write!(f, "irregular singular"),
            SingularityClass::Degenerate => write!(f, "degenerate"),
        }
    }
}

/// Whether the satisfiability check reached a verdict for a case.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verification {
    Verified,
    Unverified(String),
}

/// One case of the analysis: a semialgebraic subset of the equation with a
/// uniform description of its Vessiot spaces.
#[derive(Clone, Debug)]
pub struct CaseReport {
    /// DNF over jet variables and parameters; every clause contains the
    /// system's equations.
    pub guard: DnfFormula,
    pub solution: ParamSolution,
    pub class: SingularityClass,
    pub vessiot_dim: usize,
    /// Satisfiability condition over the parameters, when one was derived.
    pub parameter_condition: Option<DnfFormula>,
    pub verification: Verification,
}

/// Result of [`real_singularities`].
#[derive(Clone, Debug)]
pub struct Analysis {
    pub reports: Vec<CaseReport>,
    pub warnings: Vec<String>,
}

/// Errors of the analysis entry points.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SingularError {
    #[error("internal defect: {0}")]
    InternalDefect(String),
    #[error("point does not satisfy the system: {0} evaluates to a nonzero value")]
    PointOffVariety(String),
    #[error("point does not satisfy inequality {0}")]
    PointViolatesInequality(String),
    #[error("point leaves variable {0} unbound")]
    UnboundVariable(String),
}

/// Classifies a parametric solution produced with the `a`-column deferred.
///
/// # Errors
/// A dependent `a` with a nonzero assignment violates the pivot-deferral
/// invariant and is reported as an internal defect.
pub fn classify(solution: &ParamSolution, m: usize) -> Result<SingularityClass, SingularError> {
    let a_index = m;
    let free = solution.free_count();
    let a_free = solution.is_free(a_index);
    if !a_free {
        match solution.assignment(a_index) {
            Assignment::Dependent(form) if !form.is_zero() => {
                return Err(SingularError::InternalDefect(
                    "dependent transversal coefficient with a nonzero assignment".to_string(),
                ));
            }
            _ => {}
        }
    }
    Ok(match free {
        0 => SingularityClass::Degenerate,
        1 if a_free => SingularityClass::Regular,
        1 => SingularityClass::RegularSingular,
        _ => SingularityClass::IrregularSingular,
    })
}

/// Options of the end-to-end analysis.
#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub rows: RowSelection,
    /// Rewrite matrix entries modulo equations linear in their highest jet
    /// variable (reproduces the usual simplified systems).
    pub reduce: bool,
    pub solver: SolverConfig,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            rows: RowSelection::TopOrderOnly,
            reduce: true,
            solver: SolverConfig::default(),
        }
    }
}

impl AnalysisOptions {
    pub fn internal_only() -> Self {
        AnalysisOptions { solver: SolverConfig::internal_only(), ..Default::default() }
    }
}

/// Names for the linear unknowns: `b` per unknown function, then `a`.
fn ansatz_names(sys: &DifferentialSystem) -> Vec<Arc<str>> {
    let mut names: Vec<Arc<str>> = if sys.num_unknowns() == 1 {
        vec![Arc::from("b")]
    } else {
        sys.unknowns().iter().map(|u| Arc::from(format!("b_{u}").as_str())).collect()
    };
    names.push(Arc::from("a"));
    names
}

/// The full conjunction of the system: equations and inequalities.
fn system_formula(sys: &DifferentialSystem) -> Formula {
    let mut parts: Vec<Formula> = sys
        .equations()
        .iter()
        .map(|p| Formula::atom(p.clone(), Relation::Eq))
        .collect();
    for (q, rel) in sys.inequalities() {
        parts.push(Formula::atom(q.clone(), *rel));
    }
    Formula::and(parts)
}

/// Detects and classifies all real geometric singularities of a
/// well-prepared, not underdetermined system.
///
/// Every case report is satisfiable (or flagged unverified); the guards are
/// pairwise disjoint and jointly cover the satisfiable part of the equation.
pub fn real_singularities(
    sys: &DifferentialSystem,
    options: &AnalysisOptions,
) -> Result<Analysis, SingularError> {
    let m = sys.num_unknowns();
    let matrix = vessiot_matrix(sys, options.rows, options.reduce);
    let task = EliminationTask {
        matrix: matrix.rows().to_vec(),
        unknowns: ansatz_names(sys),
        y: vec![m],
    };
    let elimination = parametric_gauss(&task);

    let sigma = system_formula(sys);
    let jet_vars: Vec<VariableId> = sys.jet_variables();
    let mut reports = Vec::new();
    let mut warnings = Vec::new();

    for case in elimination.cases {
        let combined = Formula::and(vec![case.guard.to_formula(), sigma.clone()]);
        let guard_dnf = to_dnf(&combined);
        if guard_dnf.is_false() {
            continue;
        }
        let query = ExistentialQuery::new(
            jet_vars.iter().cloned().collect(),
            guard_dnf.clone(),
        );
        let (guard_dnf, parameter_condition, verification) =
            match decide(&query, &options.solver) {
                QueryResult::Unsat => continue,
                QueryResult::Sat => (guard_dnf, None, Verification::Verified),
                QueryResult::Conditional(condition) => {
                    let augmented = guard_dnf.and(&condition);
                    if augmented.is_false() {
                        continue;
                    }
                    (augmented, Some(condition), Verification::Verified)
                }
                QueryResult::Unknown { reason, .. } => {
                    (guard_dnf, None, Verification::Unverified(reason))
                }
            };
        let class = classify(&case.solution, m)?;
        if class == SingularityClass::Degenerate {
            warnings.push(
                "a case with a zero-dimensional Vessiot space was found; \
                 the input is likely not well prepared or overdetermined"
                    .to_string(),
            );
        }
        reports.push(CaseReport {
            guard: guard_dnf,
            solution: case.solution,
            vessiot_dim: 0,
            class,
            parameter_condition,
            verification,
        });
    }
    for r in &mut reports {
        r.vessiot_dim = r.solution.free_count();
    }

    let verified_classes: Vec<SingularityClass> =
        reports.iter().map(|r| r.class).collect();
    if !verified_classes.is_empty()
        && verified_classes.iter().all(|c| *c == SingularityClass::IrregularSingular)
    {
        warnings.push(
            "every case is irregular singular; the system looks underdetermined".to_string(),
        );
    }

    Ok(Analysis { reports, warnings })
}

/// Exact rank computations over the rationals.
pub mod linalg {
    use super::Rat;
    use num_traits::Zero;

    /// Rank by fraction-free Gaussian elimination.
    pub fn rank(mut m: Vec<Vec<Rat>>) -> usize {
        let rows = m.len();
        if rows == 0 {
            return 0;
        }
        let cols = m[0].len();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..cols {
            let Some(pivot) = (row..rows).find(|&r| !m[r][col].is_zero()) else { continue };
            m.swap(row, pivot);
            let pivot_value = m[row][col].clone();
            for r in (row + 1)..rows {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &pivot_value;
                for c in col..cols {
                    let sub = &factor * &m[row][c];
                    m[r][c] = &m[r][c] - &sub;
                }
            }
            rank += 1;
            row += 1;
            if row == rows {
                break;
            }
        }
        rank
    }

    /// `A * x` for a rational matrix and vector.
    pub fn matvec(a: &[Vec<Rat>], x: &[Rat]) -> Vec<Rat> {
        a.iter()
            .map(|row| {
                let mut sum = Rat::zero();
                for (c, v) in row.iter().zip(x) {
                    sum += c * v;
                }
                sum
            })
            .collect()
    }
}

/// Classifies a single rational point of the equation by evaluating the
/// Vessiot matrix and comparing ranks: full symbol rank is regular, full
/// augmented rank with a symbol rank drop is regular singular, an augmented
/// rank drop is irregular singular.
///
/// # Errors
/// The point must satisfy every equation and inequality exactly and bind
/// every variable.
pub fn rank_classify_at_point(
    sys: &DifferentialSystem,
    point: &BTreeMap<VariableId, Rat>,
    options: &AnalysisOptions,
) -> Result<SingularityClass, SingularError> {
    for p in sys.equations() {
        let value = p
            .eval(point)
            .ok_or_else(|| SingularError::UnboundVariable(free_var_name(p, point)))?;
        if !value.is_zero() {
            return Err(SingularError::PointOffVariety(p.to_string()));
        }
    }
    for (q, rel) in sys.inequalities() {
        let value = q
            .eval(point)
            .ok_or_else(|| SingularError::UnboundVariable(free_var_name(q, point)))?;
        if !rel.holds(&value) {
            return Err(SingularError::PointViolatesInequality(format!("{q} {rel} 0")));
        }
    }
    let m = sys.num_unknowns();
    let matrix = vessiot_matrix(sys, options.rows, options.reduce);
    let mut symbol_rows = Vec::new();
    let mut augmented_rows = Vec::new();
    for row in matrix.rows() {
        let values: Vec<Rat> = row
            .iter()
            .map(|e| {
                e.eval(point)
                    .ok_or_else(|| SingularError::UnboundVariable(free_var_name(e, point)))
            })
            .collect::<Result<_, _>>()?;
        symbol_rows.push(values[..m].to_vec());
        augmented_rows.push(values);
    }
    let rank_symbol = linalg::rank(symbol_rows);
    let rank_augmented = linalg::rank(augmented_rows);
    Ok(if rank_symbol == m && rank_augmented == m {
        SingularityClass::Regular
    } else if rank_augmented == m {
        SingularityClass::RegularSingular
    } else if rank_augmented < m {
        SingularityClass::IrregularSingular
    } else {
        SingularityClass::Degenerate
    })
}

fn free_var_name(p: &Poly, point: &BTreeMap<VariableId, Rat>) -> String {
    p.vars()
        .into_iter()
        .find(|v| !point.contains_key(v))
        .map(|v| v.to_string())
        .unwrap_or_else(|| "?".to_string())
}
