//! Jet-variable bookkeeping: differential systems, contact vector fields,
//! formal derivatives, prolongation and the Vessiot coefficient matrix.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Signed;

use crate::formula::Relation;
use crate::poly::{Poly, Rat, VariableId};

/// A basic semialgebraic differential system: equations `p_i = 0` and
/// inequalities `q_j <> 0` in the jet variables of `m` unknown functions up
/// to order `l`, possibly involving real parameters.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DifferentialSystem {
    unknowns: Vec<Arc<str>>,
    order: u32,
    equations: Vec<Poly>,
    inequalities: Vec<(Poly, Relation)>,
    parameters: Vec<Arc<str>>,
}

/// Errors raised when assembling or prolonging a system.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("polynomial of order {found} exceeds the declared order {declared}")]
    OrderExceeded { declared: u32, found: u32 },
    #[error("prolongation target {target} is below the system order {order}")]
    TargetBelowOrder { target: u32, order: u32 },
    #[error("a differential system needs at least one equation")]
    NoEquations,
    #[error("unknown index {alpha} out of range for {m} unknown functions")]
    UnknownOutOfRange { alpha: u32, m: u32 },
    #[error("undeclared parameter `{0}`")]
    UndeclaredParameter(String),
    #[error("relation `{0}` is not allowed in an inequality")]
    BadInequalityRelation(Relation),
}

impl DifferentialSystem {
    pub fn new(
        unknowns: Vec<Arc<str>>,
        order: u32,
        equations: Vec<Poly>,
        inequalities: Vec<(Poly, Relation)>,
        parameters: Vec<Arc<str>>,
    ) -> Result<DifferentialSystem, JetError> {
        if equations.is_empty() {
            return Err(JetError::NoEquations);
        }
        let m = unknowns.len() as u32;
        for p in equations.iter().chain(inequalities.iter().map(|(p, _)| p)) {
            if p.max_order() > order {
                return Err(JetError::OrderExceeded { declared: order, found: p.max_order() });
            }
            for v in p.vars() {
                match v {
                    VariableId::Dependent { alpha, .. } if alpha >= m => {
                        return Err(JetError::UnknownOutOfRange { alpha, m });
                    }
                    VariableId::Parameter { name } => {
                        if !parameters.iter().any(|q| **q == *name) {
                            return Err(JetError::UndeclaredParameter(name.to_string()));
                        }
                    }
                    _ => {}
                }
            }
        }
        for (_, rel) in &inequalities {
            if *rel == Relation::Eq {
                return Err(JetError::BadInequalityRelation(*rel));
            }
        }
        Ok(DifferentialSystem { unknowns, order, equations, inequalities, parameters })
    }

    pub fn unknowns(&self) -> &[Arc<str>] {
        &self.unknowns
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn equations(&self) -> &[Poly] {
        &self.equations
    }

    pub fn inequalities(&self) -> &[(Poly, Relation)] {
        &self.inequalities
    }

    pub fn parameters(&self) -> &[Arc<str>] {
        &self.parameters
    }

    /// All jet variables of the ambient space `J_l`: `t` and every
    /// `u_alpha^(i)` with `i <= l`.
    pub fn jet_variables(&self) -> Vec<VariableId> {
        let mut out = vec![VariableId::Time];
        for i in 0..=self.order {
            for (alpha, name) in self.unknowns.iter().enumerate() {
                out.push(VariableId::Dependent {
                    alpha: alpha as u32,
                    order: i,
                    name: name.clone(),
                });
            }
        }
        out
    }

    pub fn parameter_variables(&self) -> Vec<VariableId> {
        self.parameters
            .iter()
            .map(|name| VariableId::Parameter { name: name.clone() })
            .collect()
    }

    /// Substitution rules read off equations that are linear in their highest
    /// jet variable with a rational coefficient (for lh-style systems these
    /// are rewrites like `v' -> w`, `w' -> 0`). The map is fully normalized.
    pub fn reduction_rules(&self) -> BTreeMap<VariableId, Poly> {
        let mut rules: BTreeMap<VariableId, Poly> = BTreeMap::new();
        for p in &self.equations {
            add_reduction_rule(&mut rules, p);
        }
        rules
    }
}

/// Extends a normalized rewrite map by the rule solved from `p = 0`, if `p`
/// is linear in its greatest variable with a rational coefficient.
fn add_reduction_rule(rules: &mut BTreeMap<VariableId, Poly>, p: &Poly) {
    let reduced = p.substitute(rules);
    let Some(leader) = reduced.vars().into_iter().next_back() else { return };
    if reduced.degree_in(&leader) != 1 {
        return;
    }
    let coeffs = reduced.coeffs_in(&leader);
    let Some(c) = coeffs[1].as_constant() else { return };
    if rules.contains_key(&leader) {
        return;
    }
    let rhs = coeffs[0].scale(&(-c.recip()));
    let mut next: BTreeMap<VariableId, Poly> = BTreeMap::new();
    for (v, q) in rules.iter() {
        next.insert(v.clone(), q.substitute_var(&leader, &rhs));
    }
    next.insert(leader, rhs);
    *rules = next;
}

/// Applies the transversal contact field of order `l`:
/// `C_trans(p) = dp/dt + sum_{i=1..l} sum_alpha u_alpha^(i) * dp/du_alpha^(i-1)`.
///
/// # Errors
/// Rejects polynomials of order above `l`.
pub fn contact_trans(p: &Poly, l: u32) -> Result<Poly, JetError> {
    if p.max_order() > l {
        return Err(JetError::OrderExceeded { declared: l, found: p.max_order() });
    }
    let mut out = p.partial_derivative(&VariableId::Time);
    for v in p.vars() {
        if let VariableId::Dependent { alpha, order, name } = v {
            if order >= l {
                continue;
            }
            let next = VariableId::Dependent { alpha, order: order + 1, name: name.clone() };
            let d = p.partial_derivative(&VariableId::Dependent { alpha, order, name });
            out = &out + &(&Poly::var(next) * &d);
        }
    }
    Ok(out)
}

/// Formal (total) derivative: `D(p) = C_trans(p)` one order up.
pub fn formal_derivative(p: &Poly) -> Poly {
    contact_trans(p, p.max_order() + 1).expect("order bound holds by construction")
}

/// Prolongs the system to the given order by adjoining formal derivatives of
/// every equation. Inequalities carry over unchanged. With `reduce` set, each
/// new equation is rewritten modulo the accumulated equations that are linear
/// in their highest jet variable.
///
/// # Errors
/// The target order must not be below the system order.
pub fn prolong(
    sys: &DifferentialSystem,
    target: u32,
    reduce: bool,
) -> Result<DifferentialSystem, JetError> {
    if target < sys.order {
        return Err(JetError::TargetBelowOrder { target, order: sys.order });
    }
    if target == sys.order {
        return Ok(sys.clone());
    }
    let mut equations = sys.equations.clone();
    let mut rules: BTreeMap<VariableId, Poly> = BTreeMap::new();
    if reduce {
        for p in &equations {
            add_reduction_rule(&mut rules, p);
        }
    }
    // Latest derivative per original equation; differentiating the reduced
    // form reproduces the simplified prolonged systems.
    let mut frontier = sys.equations.clone();
    for _step in 0..(target - sys.order) {
        let mut next_frontier = Vec::with_capacity(frontier.len());
        for p in &frontier {
            let mut d = formal_derivative(p);
            if reduce {
                d = d.substitute(&rules);
            }
            let d = d.primitive();
            if !d.is_zero() && !equations.contains(&d) {
                equations.push(d.clone());
            }
            if reduce {
                add_reduction_rule(&mut rules, &d);
            }
            next_frontier.push(d);
        }
        frontier = next_frontier;
    }
    DifferentialSystem::new(
        sys.unknowns.clone(),
        target,
        equations,
        sys.inequalities.clone(),
        sys.parameters.clone(),
    )
}

/// Which equations contribute rows to the Vessiot matrix.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum RowSelection {
    /// Only equations of the system's top order; for well-prepared systems
    /// the remaining equations contribute only zero rows.
    #[default]
    TopOrderOnly,
    All,
}

/// Coefficient matrix of the homogeneous linear system cutting out the
/// Vessiot spaces. Columns `1..m` carry the vertical coefficients
/// `dp/du_alpha^(l)` for the unknowns `b_alpha`; the last column carries the
/// transversal coefficient `C_trans(p)` for the unknown `a`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VessiotMatrix {
    entries: Vec<Vec<Poly>>,
    /// Index of the source equation per row.
    source: Vec<usize>,
    m: usize,
}

impl VessiotMatrix {
    pub fn rows(&self) -> &[Vec<Poly>] {
        &self.entries
    }

    pub fn num_rows(&self) -> usize {
        self.entries.len()
    }

    /// Column count, always `m + 1`.
    pub fn num_cols(&self) -> usize {
        self.m + 1
    }

    pub fn source_equation(&self, row: usize) -> usize {
        self.source[row]
    }

    pub fn into_entries(self) -> Vec<Vec<Poly>> {
        self.entries
    }
}

/// Builds the Vessiot coefficient matrix of the system. Entries are
/// canonicalized, rewritten modulo the system's linear reduction rules when
/// `reduce` is set, and each row has its integer content removed.
pub fn vessiot_matrix(sys: &DifferentialSystem, rows: RowSelection, reduce: bool) -> VessiotMatrix {
    let l = sys.order;
    let m = sys.num_unknowns();
    let rules = if reduce { sys.reduction_rules() } else { BTreeMap::new() };
    let mut entries = Vec::new();
    let mut source = Vec::new();
    for (i, p) in sys.equations.iter().enumerate() {
        if rows == RowSelection::TopOrderOnly && p.max_order() != l {
            continue;
        }
        let mut row = Vec::with_capacity(m + 1);
        for (alpha, name) in sys.unknowns.iter().enumerate() {
            let v = VariableId::Dependent { alpha: alpha as u32, order: l, name: name.clone() };
            row.push(p.partial_derivative(&v));
        }
        row.push(contact_trans(p, l).expect("system invariant bounds the order"));
        if reduce {
            for e in &mut row {
                *e = e.substitute(&rules);
            }
        }
        normalize_row(&mut row);
        entries.push(row);
        source.push(i);
    }
    VessiotMatrix { entries, source, m }
}

/// Removes the common rational content of a row and normalizes its sign so
/// the first nonzero entry has a positive leading coefficient. Sound for
/// rows of a homogeneous system.
fn normalize_row(row: &mut [Poly]) {
    let mut content: Option<Rat> = None;
    for e in row.iter() {
        if e.is_zero() {
            continue;
        }
        let (c, _) = e.canonicalize();
        content = Some(match content {
            None => c,
            Some(prev) => {
                let num = prev.numer().gcd(c.numer());
                let den = prev.denom().lcm(c.denom());
                Rat::new(num, den)
            }
        });
    }
    let Some(mut content) = content else { return };
    if content.is_negative() {
        content = -content;
    }
    // Sign: first nonzero entry gets a positive leading coefficient.
    let first = row.iter().find(|e| !e.is_zero()).expect("nonzero entry exists");
    if first.leading_term().map(|(_, c)| c.is_negative()).unwrap_or(false) {
        content = -content;
    }
    let inv = content.recip();
    for e in row.iter_mut() {
        *e = e.scale(&inv);
    }
}

use num_integer::Integer;
