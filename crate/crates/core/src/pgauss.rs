//! Parametric Gaussian elimination.
//!
//! Given a matrix of polynomials in some parameters, the elimination produces
//! a list of guarded cases. The guards are conjunctions of equations and
//! inequations on the parameters, pairwise disjoint and jointly exhaustive;
//! each case carries a parametric solution of the homogeneous system valid on
//! the whole guard region, and the dimension of the solution space's
//! intersection with the subspace where the designated `y`-unknowns vanish.
//!
//! The pivot search scans non-`y` columns first and `y` columns only when
//! nothing else is available, so rows pivoting in `y`-columns sink to the
//! bottom of the echelon form; with `y = (a)` this forces a dependent `a` to
//! be identically zero. Entries of undecided sign cause a case split on
//! `entry != 0` / `entry = 0`; the entry is zeroed in the latter branch.
//! There is no Bareiss division, only fraction-free row operations with a
//! rational-function back-substitution at the end.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::formula::{
    deduce_saturated, is_false_saturated, Atom, Deduction, Guard, Relation,
    SaturatedGuard,
};
use crate::poly::{Poly, Rat, VariableId};

/// A rational function `num/den`; the zero function has `num = 0, den = 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn zero() -> Self {
        RationalFn { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RationalFn { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFn { num: p, den: Poly::one() }
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RationalFn::zero();
        }
        if num == den {
            return RationalFn::one();
        }
        // Fold rational contents together; polynomial factors stay.
        let (cn, pn) = num.canonicalize();
        let (cd, pd) = den.canonicalize();
        RationalFn { num: pn.scale(&(cn / cd)), den: pd }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        if self.den == other.den {
            return RationalFn::normalized(&self.num + &other.num, self.den.clone());
        }
        RationalFn::normalized(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn mul(&self, other: &RationalFn) -> RationalFn {
        RationalFn::normalized(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn neg(&self) -> RationalFn {
        RationalFn { num: -&self.num, den: self.den.clone() }
    }

    pub fn div_poly(&self, p: &Poly) -> RationalFn {
        debug_assert!(!p.is_zero());
        RationalFn::normalized(self.num.clone(), &self.den * p)
    }

    pub fn mul_poly(&self, p: &Poly) -> RationalFn {
        RationalFn::normalized(&self.num * p, self.den.clone())
    }

    /// Exact evaluation; `None` if a variable is unbound or the denominator
    /// vanishes.
    pub fn eval(&self, point: &BTreeMap<VariableId, Rat>) -> Option<Rat> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point)? / d)
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den_is_one = self.den.as_constant().map(|c| c.is_one()).unwrap_or(false);
        if den_is_one {
            if self.num.num_terms() > 1 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// A linear combination of the fresh indeterminates `r_k` with
/// rational-function coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LinearForm {
    terms: BTreeMap<usize, RationalFn>,
}

impl LinearForm {
    pub fn zero() -> Self {
        LinearForm::default()
    }

    pub fn indeterminate(k: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(k, RationalFn::one());
        LinearForm { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &RationalFn)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coefficient(&self, k: usize) -> Option<&RationalFn> {
        self.terms.get(&k)
    }

    fn add_scaled(&mut self, other: &LinearForm, factor: &RationalFn) {
        for (k, c) in &other.terms {
            let add = c.mul(factor);
            match self.terms.entry(*k) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    if !add.is_zero() {
                        e.insert(add);
                    }
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(&add);
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
    }

    /// Value at a parameter point for a given assignment of the `r_k`.
    pub fn eval(
        &self,
        point: &BTreeMap<VariableId, Rat>,
        r_values: &BTreeMap<usize, Rat>,
    ) -> Option<Rat> {
        let mut sum = Rat::from_integer(0.into());
        for (k, c) in &self.terms {
            let r = r_values.get(k)?;
            sum += c.eval(point)? * r;
        }
        Some(sum)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c == &RationalFn::one() {
                write!(f, "r{k}")?;
            } else {
                write!(f, "{c}*r{k}")?;
            }
        }
        Ok(())
    }
}

/// Assignment of one unknown in a parametric solution.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Assignment {
    /// Dependent unknown, a linear combination of the fresh indeterminates.
    Dependent(LinearForm),
    /// Independent unknown bound to a fresh indeterminate `r_k`.
    Free(usize),
}

/// A parametric solution of the homogeneous system, suitable for every
/// parameter point of its guard: a permutation of the unknowns into
/// dependent ones with rational-function assignments and independent ones
/// bound to fresh indeterminates `r_1, r_2, ...`.
///
/// The indeterminates are numbered from the last column of the echelon form
/// upwards, so with the call order `(b, a)` a free `a` is always `r_1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParamSolution {
    unknowns: Vec<Arc<str>>,
    /// Assignment per unknown, in the original unknown order.
    assignments: Vec<Assignment>,
    /// Column permutation: position in the echelon form -> original index.
    perm: Vec<usize>,
    dependent_count: usize,
}

impl ParamSolution {
    pub fn unknowns(&self) -> &[Arc<str>] {
        &self.unknowns
    }

    pub fn assignment(&self, original_index: usize) -> &Assignment {
        &self.assignments[original_index]
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn dependent_count(&self) -> usize {
        self.dependent_count
    }

    /// Column permutation of the echelon form: position to original index.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn free_count(&self) -> usize {
        self.assignments.len() - self.dependent_count
    }

    pub fn is_free(&self, original_index: usize) -> bool {
        matches!(self.assignments[original_index], Assignment::Free(_))
    }

    /// Kernel basis at a parameter point: one vector per fresh indeterminate,
    /// set to one with the others zero. `None` if a denominator vanishes,
    /// which cannot happen on the guard region.
    pub fn basis_at(&self, point: &BTreeMap<VariableId, Rat>) -> Option<Vec<Vec<Rat>>> {
        let free: Vec<usize> = self
            .assignments
            .iter()
            .filter_map(|a| match a {
                Assignment::Free(k) => Some(*k),
                _ => None,
            })
            .collect();
        let mut basis = Vec::with_capacity(free.len());
        for k in &free {
            let r_values: BTreeMap<usize, Rat> = free
                .iter()
                .map(|j| {
                    (*j, if j == k { Rat::from_integer(1.into()) } else { Rat::from_integer(0.into()) })
                })
                .collect();
            let mut vec = Vec::with_capacity(self.assignments.len());
            for a in &self.assignments {
                match a {
                    Assignment::Free(j) => vec.push(r_values[j].clone()),
                    Assignment::Dependent(form) => vec.push(form.eval(point, &r_values)?),
                }
            }
            basis.push(vec);
        }
        Some(basis)
    }

    /// Formal equations `x = ...` in the original unknown order.
    pub fn equations(&self) -> Vec<(Arc<str>, String)> {
        self.unknowns
            .iter()
            .zip(&self.assignments)
            .map(|(name, a)| {
                let rhs = match a {
                    Assignment::Free(k) => format!("r{k}"),
                    Assignment::Dependent(form) => form.to_string(),
                };
                (name.clone(), rhs)
            })
            .collect()
    }
}

impl fmt::Display for ParamSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (name, rhs)) in self.equations().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name} = {rhs}")?;
        }
        write!(f, "}}")
    }
}

/// Input of the elimination: an `M x N` polynomial matrix, the unknown
/// names, and the sublist of unknowns whose columns are deferred.
#[derive(Clone, Debug)]
pub struct EliminationTask {
    pub matrix: Vec<Vec<Poly>>,
    pub unknowns: Vec<Arc<str>>,
    /// Original indices of the deferred (`y`) unknowns.
    pub y: Vec<usize>,
}

/// One output case of the elimination.
#[derive(Clone, Debug)]
pub struct EliminationCase {
    pub guard: Guard,
    pub solution: ParamSolution,
    /// `dim(S intersect Pi_y)`, constant on the guard region.
    pub intersection_dim: usize,
}

/// Output of [`parametric_gauss`]: guards are pairwise disjoint and jointly
/// exhaustive over the parameter space.
#[derive(Clone, Debug)]
pub struct EliminationOutput {
    pub cases: Vec<EliminationCase>,
}

/// Lexicographic termination measure `(min(M,N) - p, #undecided entries)` of
/// a stack frame, tracked when instrumentation is on.
pub type Measure = (i64, usize);

/// Records every stack transition of a run for the termination argument.
#[derive(Clone, Debug, Default)]
pub struct TraceStats {
    pub pops: usize,
    pub pushes: usize,
    pub emitted: usize,
    /// Pushes whose measure did not lexicographically decrease.
    pub violations: Vec<(Measure, Measure)>,
}

struct Frame {
    guard: Guard,
    matrix: Vec<Vec<Poly>>,
    /// 1-based pivot index.
    p: usize,
    /// Current column position -> original unknown index.
    cols: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum EntryStatus {
    Zero,
    NonZero,
    Unknown,
}

fn entry_status(sat: &SaturatedGuard, e: &Poly) -> EntryStatus {
    if e.is_zero() {
        return EntryStatus::Zero;
    }
    if let Some(c) = e.as_constant() {
        return if c.is_zero() { EntryStatus::Zero } else { EntryStatus::NonZero };
    }
    if deduce_saturated(sat, &Atom::new(e.clone(), Relation::Ne)) == Deduction::Derivable {
        return EntryStatus::NonZero;
    }
    if deduce_saturated(sat, &Atom::new(e.clone(), Relation::Eq)) == Deduction::Derivable {
        return EntryStatus::Zero;
    }
    EntryStatus::Unknown
}

/// Runs the elimination. Cases come out in a deterministic order (stack
/// order, then stably sorted by guard text).
pub fn parametric_gauss(task: &EliminationTask) -> EliminationOutput {
    parametric_gauss_traced(task, false).0
}

/// Like [`parametric_gauss`], optionally recording the termination measure of
/// every stack transition.
pub fn parametric_gauss_traced(
    task: &EliminationTask,
    instrument: bool,
) -> (EliminationOutput, TraceStats) {
    let n = task.unknowns.len();
    let rows = task.matrix.len();
    assert!(n >= 1, "at least one unknown is required");
    assert!(task.matrix.iter().all(|r| r.len() == n), "ragged matrix");

    let is_y: Vec<bool> = (0..n).map(|i| task.y.contains(&i)).collect();
    let mut stats = TraceStats::default();
    let mut stack: Vec<Frame> = Vec::new();
    let mut cases: Vec<EliminationCase> = Vec::new();

    stack.push(Frame {
        guard: Guard::truth(),
        matrix: task.matrix.clone(),
        p: 1,
        cols: (0..n).collect(),
    });

    while let Some(frame) = stack.pop() {
        stats.pops += 1;
        let sat = SaturatedGuard::new(&frame.guard);
        if is_false_saturated(&sat) {
            continue;
        }
        let popped_measure =
            instrument.then(|| measure(&sat, &frame, rows, n));

        let in_y = |frame: &Frame, col: usize| is_y[frame.cols[col - 1]];

        // Phase 1/3: a derivably nonzero pivot, non-y columns first.
        // Phase 2/4: an undecided entry to branch on, non-y columns first.
        let mut action = None;
        for y_phase in [false, true] {
            // Pivot tie-break: derivably nonzero constants first, then lowest
            // total degree, then lowest (row, column).
            let mut best_pivot: Option<(bool, u32, usize, usize)> = None;
            let mut best_branch: Option<(u32, usize, usize)> = None;
            for mm in frame.p..=rows {
                for nn in frame.p..=n {
                    if in_y(&frame, nn) != y_phase {
                        continue;
                    }
                    let e = &frame.matrix[mm - 1][nn - 1];
                    match entry_status(&sat, e) {
                        EntryStatus::Zero => {}
                        EntryStatus::NonZero => {
                            let key = (!e.is_constant(), e.total_degree(), mm, nn);
                            if best_pivot.map(|b| key < b).unwrap_or(true) {
                                best_pivot = Some(key);
                            }
                        }
                        EntryStatus::Unknown => {
                            let key = (e.total_degree(), mm, nn);
                            if best_branch.map(|b| key < b).unwrap_or(true) {
                                best_branch = Some(key);
                            }
                        }
                    }
                }
            }
            if let Some((_, _, mm, nn)) = best_pivot {
                action = Some(Action::Pivot(mm, nn));
                break;
            }
            if let Some((_, mm, nn)) = best_branch {
                action = Some(Action::Branch(mm, nn));
                break;
            }
        }

        match action {
            Some(Action::Pivot(mm, nn)) => {
                let mut frame = frame;
                frame.matrix.swap(mm - 1, frame.p - 1);
                if nn != frame.p {
                    for row in &mut frame.matrix {
                        row.swap(nn - 1, frame.p - 1);
                    }
                    frame.cols.swap(nn - 1, frame.p - 1);
                }
                eliminate_below(&mut frame.matrix, frame.p);
                frame.p += 1;
                push_frame(&mut stack, frame, popped_measure, rows, n, &mut stats);
            }
            Some(Action::Branch(mm, nn)) => {
                let entry = frame.matrix[mm - 1][nn - 1].clone();
                let prim = entry.primitive();
                let ne_frame = Frame {
                    guard: frame.guard.and_atom(Atom::new(prim.clone(), Relation::Ne)),
                    matrix: frame.matrix.clone(),
                    p: frame.p,
                    cols: frame.cols.clone(),
                };
                push_frame(&mut stack, ne_frame, popped_measure.clone(), rows, n, &mut stats);
                let mut eq_frame = frame;
                // Sound because the pushed guard contains entry = 0.
                eq_frame.matrix[mm - 1][nn - 1] = Poly::zero();
                eq_frame.guard = eq_frame.guard.and_atom(Atom::new(prim, Relation::Eq));
                push_frame(&mut stack, eq_frame, popped_measure, rows, n, &mut stats);
            }
            None => {
                // Echelon form modulo the guard: emit the case.
                stats.emitted += 1;
                let solution = construct_solution(&frame, &task.unknowns, &sat);
                let intersection_dim = intersection_dim(&solution, &task.y);
                cases.push(EliminationCase { guard: frame.guard, solution, intersection_dim });
            }
        }
    }

    cases.sort_by_key(|c| c.guard.to_string());
    (EliminationOutput { cases }, stats)
}

enum Action {
    Pivot(usize, usize),
    Branch(usize, usize),
}

fn push_frame(
    stack: &mut Vec<Frame>,
    frame: Frame,
    popped_measure: Option<Measure>,
    rows: usize,
    n: usize,
    stats: &mut TraceStats,
) {
    if let Some(popped) = popped_measure {
        let sat = SaturatedGuard::new(&frame.guard);
        let pushed = measure(&sat, &frame, rows, n);
        if pushed >= popped {
            stats.violations.push((popped, pushed));
        }
    }
    stats.pushes += 1;
    stack.push(frame);
}

/// `(min(M,N) - p, #entries of undecided status in the active block)`.
fn measure(sat: &SaturatedGuard, frame: &Frame, rows: usize, n: usize) -> Measure {
    let mu1 = rows.min(n) as i64 - frame.p as i64;
    let mut mu2 = 0usize;
    for mm in frame.p..=rows {
        for nn in frame.p..=n {
            if entry_status(sat, &frame.matrix[mm - 1][nn - 1]) == EntryStatus::Unknown {
                mu2 += 1;
            }
        }
    }
    (mu1, mu2)
}

/// Fraction-free elimination below the pivot at `(p, p)` (1-based).
fn eliminate_below(matrix: &mut [Vec<Poly>], p: usize) {
    let pivot_row = matrix[p - 1].clone();
    let pivot = pivot_row[p - 1].clone();
    for i in p..matrix.len() {
        let factor = matrix[i][p - 1].clone();
        if factor.is_zero() {
            continue;
        }
        for j in 0..matrix[i].len() {
            matrix[i][j] = &(&pivot * &matrix[i][j]) - &(&factor * &pivot_row[j]);
        }
        matrix[i][p - 1] = Poly::zero();
        normalize_matrix_row(&mut matrix[i]);
    }
}

/// Integer content removal to keep entries small; sound for a homogeneous
/// system.
fn normalize_matrix_row(row: &mut [Poly]) {
    use num_integer::Integer;
    let mut content: Option<Rat> = None;
    for e in row.iter() {
        if e.is_zero() {
            continue;
        }
        let (c, _) = e.canonicalize();
        content = Some(match content {
            None => c,
            Some(prev) => Rat::new(prev.numer().gcd(c.numer()), prev.denom().lcm(c.denom())),
        });
    }
    let Some(mut content) = content else { return };
    if content.is_negative() {
        content = -content;
    }
    let first = row.iter().find(|e| !e.is_zero()).expect("nonzero entry");
    if first.leading_term().map(|(_, c)| c.is_negative()).unwrap_or(false) {
        content = -content;
    }
    let inv = content.recip();
    for e in row.iter_mut() {
        *e = e.scale(&inv);
    }
}

/// Builds the parametric solution from an emitted echelon frame by full
/// back-substitution: every dependent assignment is a rational function of
/// the parameters and the fresh indeterminates only. Entries that are
/// derivable as zero under the guard are treated as zero.
fn construct_solution(frame: &Frame, unknowns: &[Arc<str>], sat: &SaturatedGuard) -> ParamSolution {
    let n = unknowns.len();
    let dependent_count = frame.p - 1;
    // Values per column position, free columns first.
    let mut values: Vec<Option<LinearForm>> = vec![None; n];
    for (pos0, value) in values.iter_mut().enumerate().skip(dependent_count) {
        // Position j (1-based) gets r_{N - j + 1}: the last column is r_1.
        let r_index = n - pos0;
        *value = Some(LinearForm::indeterminate(r_index));
    }
    for i in (0..dependent_count).rev() {
        let row = &frame.matrix[i];
        let pivot = &row[i];
        debug_assert!(!pivot.is_zero());
        let mut sum = LinearForm::zero();
        for (j, entry) in row.iter().enumerate().skip(i + 1) {
            if entry.is_zero() {
                continue;
            }
            if entry_status(sat, entry) == EntryStatus::Zero {
                continue;
            }
            let coeff = RationalFn::from_poly(entry.clone());
            sum.add_scaled(values[j].as_ref().expect("back-substitution order"), &coeff);
        }
        // pivot * x_i + sum = 0
        let mut form = LinearForm::zero();
        form.add_scaled(&sum, &RationalFn::from_poly(Poly::from_int(-1)).div_poly(pivot));
        values[i] = Some(form);
    }

    let mut assignments: Vec<Option<Assignment>> = vec![None; n];
    for (pos0, value) in values.into_iter().enumerate() {
        let original = frame.cols[pos0];
        let assignment = if pos0 < dependent_count {
            Assignment::Dependent(value.expect("dependent value computed"))
        } else {
            Assignment::Free(n - pos0)
        };
        assignments[original] = Some(assignment);
    }
    ParamSolution {
        unknowns: unknowns.to_vec(),
        assignments: assignments.into_iter().map(|a| a.expect("every unknown assigned")).collect(),
        perm: frame.cols.clone(),
        dependent_count,
    }
}

/// Dimension of the intersection of the solution space with the subspace
/// where the `y`-unknowns vanish: the number of free indeterminates remaining
/// after setting all `y`-unknowns to zero and propagating linearly.
pub fn intersection_dim(solution: &ParamSolution, y: &[usize]) -> usize {
    let free = solution.free_count();
    // Constraint rows over the indeterminates r_k.
    let mut rows: Vec<BTreeMap<usize, RationalFn>> = Vec::new();
    for &idx in y {
        match &solution.assignments[idx] {
            Assignment::Free(k) => {
                let mut row = BTreeMap::new();
                row.insert(*k, RationalFn::one());
                rows.push(row);
            }
            Assignment::Dependent(form) => {
                if !form.is_zero() {
                    rows.push(form.terms().map(|(k, c)| (k, c.clone())).collect());
                }
            }
        }
    }
    // Rank over the rational-function field; coefficients are nonzero
    // rational functions on the guard region.
    let mut rank = 0usize;
    let mut rows = rows;
    while let Some(pos) = rows.iter().position(|r| !r.is_empty()) {
        let row = rows.swap_remove(pos);
        let (&k, c) = row.iter().next().expect("nonempty row");
        let c = c.clone();
        rank += 1;
        for other in &mut rows {
            if let Some(ck) = other.remove(&k) {
                let factor = ck.mul(&RationalFn::from_poly(Poly::from_int(-1))).mul(&c.clone().recip_unchecked());
                let row_terms: Vec<(usize, RationalFn)> =
                    row.iter().map(|(j, cj)| (*j, cj.clone())).collect();
                for (j, cj) in row_terms {
                    if j == k {
                        continue;
                    }
                    let add = cj.mul(&factor);
                    match other.entry(j) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            if !add.is_zero() {
                                e.insert(add);
                            }
                        }
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            let sum = e.get().add(&add);
                            if sum.is_zero() {
                                e.remove();
                            } else {
                                *e.get_mut() = sum;
                            }
                        }
                    }
                }
            }
        }
    }
    free - rank
}

impl RationalFn {
    fn recip_unchecked(self) -> RationalFn {
        debug_assert!(!self.num.is_zero());
        RationalFn { num: self.den, den: self.num }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VariableId;

    fn t() -> Poly {
        Poly::var(VariableId::time())
    }
    fn u(order: u32) -> Poly {
        Poly::var(VariableId::dependent(0, order, "u"))
    }

    fn names(list: &[&str]) -> Vec<Arc<str>> {
        list.iter().map(|s| Arc::from(*s)).collect()
    }

    fn sphere_task() -> EliminationTask {
        // [u' | t + u*u'], x = (b, a), y = (a)
        EliminationTask {
            matrix: vec![vec![u(1), &t() + &(&u(0) * &u(1))]],
            unknowns: names(&["b", "a"]),
            y: vec![1],
        }
    }

    #[test]
    fn sphere_elimination_yields_three_cases() {
        let out = parametric_gauss(&sphere_task());
        assert_eq!(out.cases.len(), 3);

        let udot = u(1);
        let taut = &t() + &(&u(0) * &u(1));

        let regular = out
            .cases
            .iter()
            .find(|c| c.solution.free_count() == 1 && c.solution.is_free(1))
            .expect("case with free a");
        assert_eq!(
            regular.guard.sign_of(&udot),
            Some(crate::formula::SignSet::NEG.union(crate::formula::SignSet::POS))
        );
        assert_eq!(regular.intersection_dim, 0);
        // b = -(t + u*u')/u' * r1
        match regular.solution.assignment(0) {
            Assignment::Dependent(form) => {
                let c = form.coefficient(1).expect("depends on r1");
                assert_eq!(c.num(), &-&taut);
                assert_eq!(c.den(), &udot);
            }
            other => panic!("unexpected {other:?}"),
        }

        let singular = out
            .cases
            .iter()
            .find(|c| c.solution.free_count() == 1 && c.solution.is_free(0))
            .expect("case with a = 0");
        match singular.solution.assignment(1) {
            Assignment::Dependent(form) => assert!(form.is_zero(), "a must be identically zero"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(singular.intersection_dim, 1);

        let irregular = out
            .cases
            .iter()
            .find(|c| c.solution.free_count() == 2)
            .expect("fully free case");
        assert_eq!(irregular.intersection_dim, 1);
        // a = r1, b = r2 per the numbering from the last column.
        assert_eq!(irregular.solution.assignment(1), &Assignment::Free(1));
        assert_eq!(irregular.solution.assignment(0), &Assignment::Free(2));
    }

    #[test]
    fn zero_matrix_single_case_all_free() {
        let task = EliminationTask {
            matrix: vec![vec![Poly::zero()]],
            unknowns: names(&["x"]),
            y: vec![],
        };
        let out = parametric_gauss(&task);
        assert_eq!(out.cases.len(), 1);
        assert!(out.cases[0].guard.is_truth());
        assert_eq!(out.cases[0].solution.free_count(), 1);
    }

    #[test]
    fn identity_matrix_has_no_free_unknowns() {
        let task = EliminationTask {
            matrix: vec![
                vec![Poly::one(), Poly::zero()],
                vec![Poly::zero(), Poly::one()],
            ],
            unknowns: names(&["x1", "x2"]),
            y: vec![],
        };
        let out = parametric_gauss(&task);
        assert_eq!(out.cases.len(), 1);
        let sol = &out.cases[0].solution;
        assert_eq!(sol.free_count(), 0);
        for a in sol.assignments() {
            match a {
                Assignment::Dependent(form) => assert!(form.is_zero()),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn all_zero_two_unknowns_intersection_dim() {
        let task = EliminationTask {
            matrix: vec![vec![Poly::zero(), Poly::zero()]],
            unknowns: names(&["b", "a"]),
            y: vec![1],
        };
        let out = parametric_gauss(&task);
        assert_eq!(out.cases.len(), 1);
        assert_eq!(out.cases[0].intersection_dim, 1);
    }

    #[test]
    fn gather_case_solution_shape() {
        // [3u'^2 + chi*u | chi*u'^2 - 1]
        let chi = Poly::var(VariableId::parameter("chi"));
        let symbol = &u(1).pow(2).scale(&Rat::from_integer(3.into())) + &(&chi * &u(0));
        let trans = &(&chi * &u(1).pow(2)) - &Poly::one();
        let task = EliminationTask {
            matrix: vec![vec![symbol.clone(), trans.clone()]],
            unknowns: names(&["b", "a"]),
            y: vec![1],
        };
        let out = parametric_gauss(&task);
        assert_eq!(out.cases.len(), 3);
        let regular = out
            .cases
            .iter()
            .find(|c| c.solution.free_count() == 1 && c.solution.is_free(1))
            .unwrap();
        // b = (1 - chi*u'^2)/(3u'^2 + chi*u) * r1
        match regular.solution.assignment(0) {
            Assignment::Dependent(form) => {
                let c = form.coefficient(1).unwrap();
                assert_eq!(c.num(), &-&trans);
                assert_eq!(c.den(), &symbol);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn termination_measure_never_increases() {
        let (out, stats) = parametric_gauss_traced(&sphere_task(), true);
        assert_eq!(out.cases.len(), 3);
        assert!(stats.violations.is_empty(), "violations: {:?}", stats.violations);
        assert!(stats.pushes > 0 && stats.pops > stats.pushes / 2);
    }

    #[test]
    fn y_pivot_rows_sink_below() {
        // Matrix where a y-column pivot is available early but must wait:
        // [[0, 1], [t, 0]] with y = second unknown.
        let task = EliminationTask {
            matrix: vec![vec![Poly::zero(), Poly::one()], vec![t(), Poly::zero()]],
            unknowns: names(&["b", "a"]),
            y: vec![1],
        };
        let out = parametric_gauss(&task);
        for case in &out.cases {
            // Whenever a is dependent its assignment is identically zero.
            if !case.solution.is_free(1) {
                match case.solution.assignment(1) {
                    Assignment::Dependent(form) => assert!(form.is_zero()),
                    _ => unreachable!(),
                }
            }
        }
    }
}
