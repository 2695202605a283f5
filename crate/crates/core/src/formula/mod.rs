//! Quantifier-free formulas over polynomial atoms.
//!
//! A [`Guard`] is a conjunction of sign conditions on primitive polynomials,
//! a [`DnfFormula`] a disjunction of guards. Guards store one sign set per
//! polynomial, so duplicate atoms merge and complementary atoms are detected
//! at insertion time.

mod deduce;
mod simplify;

pub use deduce::{deduce, deduce_saturated, is_false, is_false_saturated, Deduction, SaturatedGuard};
pub use simplify::{provably_negative, provably_positive, simplify};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Signed;

use crate::poly::{Poly, Rat, VariableId};

/// Relation of a polynomial against zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Relation {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    /// Signs of the polynomial for which the relation holds.
    pub fn sign_set(self) -> SignSet {
        match self {
            Relation::Eq => SignSet::ZERO,
            Relation::Ne => SignSet::NEG.union(SignSet::POS),
            Relation::Lt => SignSet::NEG,
            Relation::Le => SignSet::NEG.union(SignSet::ZERO),
            Relation::Gt => SignSet::POS,
            Relation::Ge => SignSet::ZERO.union(SignSet::POS),
        }
    }

    /// The relation after multiplying the polynomial by a negative constant.
    pub fn flip(self) -> Relation {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Gt => Relation::Lt,
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            other => other,
        }
    }

    /// Logical negation.
    pub fn negate(self) -> Relation {
        match self {
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
            Relation::Lt => Relation::Ge,
            Relation::Ge => Relation::Lt,
            Relation::Gt => Relation::Le,
            Relation::Le => Relation::Gt,
        }
    }

    pub fn holds(self, value: &Rat) -> bool {
        let sign = if value.is_negative() {
            SignSet::NEG
        } else if value.is_positive() {
            SignSet::POS
        } else {
            SignSet::ZERO
        };
        !self.sign_set().intersect(sign).is_empty()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }

    pub fn is_strict_order(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Subset of the possible signs {negative, zero, positive} of a polynomial.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SignSet(u8);

impl SignSet {
    pub const EMPTY: SignSet = SignSet(0);
    pub const NEG: SignSet = SignSet(1);
    pub const ZERO: SignSet = SignSet(2);
    pub const POS: SignSet = SignSet(4);
    pub const ALL: SignSet = SignSet(7);

    pub fn union(self, other: SignSet) -> SignSet {
        SignSet(self.0 | other.0)
    }

    pub fn intersect(self, other: SignSet) -> SignSet {
        SignSet(self.0 & other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: SignSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, other: SignSet) -> bool {
        other.is_subset(self)
    }

    /// The relation expressing exactly this sign set, if it is a proper
    /// nonempty constraint.
    pub fn relation(self) -> Option<Relation> {
        match self.0 {
            1 => Some(Relation::Lt),
            2 => Some(Relation::Eq),
            3 => Some(Relation::Le),
            4 => Some(Relation::Gt),
            5 => Some(Relation::Ne),
            6 => Some(Relation::Ge),
            _ => None,
        }
    }

    pub fn of_value(value: &Rat) -> SignSet {
        if value.is_negative() {
            SignSet::NEG
        } else if value.is_positive() {
            SignSet::POS
        } else {
            SignSet::ZERO
        }
    }
}

/// A sign condition on a primitive polynomial.
///
/// The stored polynomial is the primitive part of the input; the rational
/// content is folded into the relation (a negative content flips order
/// relations). Constant inputs fold to `True`/`False` at construction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    poly: Poly,
    rel: Relation,
}

/// Result of building an atom: constants evaluate away.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AtomValue {
    True,
    False,
    Atom(Atom),
}

impl Atom {
    pub fn new(poly: Poly, rel: Relation) -> AtomValue {
        if let Some(c) = poly.as_constant() {
            return if rel.holds(&c) { AtomValue::True } else { AtomValue::False };
        }
        let (content, prim) = poly.canonicalize();
        let rel = if content.is_negative() { rel.flip() } else { rel };
        AtomValue::Atom(Atom { poly: prim, rel })
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn relation(&self) -> Relation {
        self.rel
    }

    pub fn negate(&self) -> Atom {
        Atom { poly: self.poly.clone(), rel: self.rel.negate() }
    }

    pub fn eval(&self, point: &BTreeMap<VariableId, Rat>) -> Option<bool> {
        Some(self.rel.holds(&self.poly.eval(point)?))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.poly, self.rel)
    }
}

/// A conjunction of atoms, stored as one sign set per primitive polynomial.
///
/// Inserting both `p = 0` and `p != 0` empties the sign set and flags the
/// guard as trivially false.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Guard {
    signs: BTreeMap<Poly, SignSet>,
    contradictory: bool,
}

impl Guard {
    pub fn truth() -> Guard {
        Guard::default()
    }

    pub fn falsity() -> Guard {
        Guard { signs: BTreeMap::new(), contradictory: true }
    }

    pub fn of_atoms<I: IntoIterator<Item = AtomValue>>(atoms: I) -> Guard {
        let mut g = Guard::truth();
        for a in atoms {
            g.insert(a);
        }
        g
    }

    pub fn insert(&mut self, atom: AtomValue) {
        match atom {
            AtomValue::True => {}
            AtomValue::False => self.contradictory = true,
            AtomValue::Atom(a) => self.insert_atom(a),
        }
    }

    pub fn insert_atom(&mut self, atom: Atom) {
        let Atom { poly, rel } = atom;
        let entry = self.signs.entry(poly).or_insert(SignSet::ALL);
        *entry = entry.intersect(rel.sign_set());
        if entry.is_empty() {
            self.contradictory = true;
        }
    }

    /// New guard extended by one atom.
    pub fn and_atom(&self, atom: AtomValue) -> Guard {
        let mut g = self.clone();
        g.insert(atom);
        g
    }

    pub fn and(&self, other: &Guard) -> Guard {
        let mut g = self.clone();
        for a in other.atoms() {
            g.insert_atom(a);
        }
        if other.contradictory {
            g.contradictory = true;
        }
        g
    }

    pub fn is_trivially_false(&self) -> bool {
        self.contradictory
    }

    /// True guard: no constraints at all.
    pub fn is_truth(&self) -> bool {
        !self.contradictory && self.signs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn sign_of(&self, poly: &Poly) -> Option<SignSet> {
        self.signs.get(poly).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Poly, SignSet)> {
        self.signs.iter().map(|(p, s)| (p, *s))
    }

    /// The atoms of the conjunction in canonical order.
    pub fn atoms(&self) -> Vec<Atom> {
        self.signs
            .iter()
            .filter_map(|(p, s)| s.relation().map(|rel| Atom { poly: p.clone(), rel }))
            .collect()
    }

    pub fn vars(&self) -> BTreeSet<VariableId> {
        self.signs.keys().flat_map(|p| p.vars()).collect()
    }

    pub fn eval(&self, point: &BTreeMap<VariableId, Rat>) -> Option<bool> {
        if self.contradictory {
            return Some(false);
        }
        for (p, s) in &self.signs {
            let value = p.eval(point)?;
            if s.intersect(SignSet::of_value(&value)).is_empty() {
                return Some(false);
            }
        }
        Some(true)
    }

    /// Structural entailment: every constraint of `other` is implied by a
    /// constraint of `self` on the same polynomial.
    pub fn subsumes(&self, other: &Guard) -> bool {
        other.signs.iter().all(|(p, s_other)| {
            self.signs.get(p).map(|s| s.is_subset(*s_other)).unwrap_or(false)
        })
    }

    pub fn to_formula(&self) -> Formula {
        if self.contradictory {
            return Formula::False;
        }
        Formula::And(self.atoms().into_iter().map(Formula::Leaf).collect())
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.contradictory {
            return write!(f, "false");
        }
        if self.signs.is_empty() {
            return write!(f, "true");
        }
        let mut first = true;
        for (p, s) in &self.signs {
            let rel = s.relation().expect("guard invariant: proper sign sets");
            if !first {
                write!(f, " and ")?;
            }
            first = false;
            write!(f, "{p} {rel} 0")?;
        }
        Ok(())
    }
}

/// Disjunctive normal form: a disjunction of guards.
///
/// The empty clause list is `false`; a list containing a constraint-free
/// guard collapses to `true`. Clauses are deduplicated, absorbed and kept in
/// a deterministic order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DnfFormula {
    clauses: Vec<Guard>,
}

impl DnfFormula {
    pub fn truth() -> DnfFormula {
        DnfFormula { clauses: vec![Guard::truth()] }
    }

    pub fn falsity() -> DnfFormula {
        DnfFormula { clauses: Vec::new() }
    }

    /// Builds a DNF, dropping false clauses, deduplicating and removing
    /// clauses absorbed by weaker ones.
    pub fn from_clauses<I: IntoIterator<Item = Guard>>(clauses: I) -> DnfFormula {
        let mut list: Vec<Guard> = clauses
            .into_iter()
            .filter(|c| !c.is_trivially_false())
            .collect();
        if list.iter().any(|c| c.is_truth()) {
            return DnfFormula::truth();
        }
        list.sort();
        list.dedup();
        // Absorption: drop a clause when another clause is entailed by it.
        let keep: Vec<bool> = list
            .iter()
            .enumerate()
            .map(|(i, c)| {
                !list
                    .iter()
                    .enumerate()
                    .any(|(j, other)| i != j && c.subsumes(other) && (!other.subsumes(c) || j < i))
            })
            .collect();
        let list = list
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
        DnfFormula { clauses: list }
    }

    pub fn is_true(&self) -> bool {
        self.clauses.len() == 1 && self.clauses[0].is_truth()
    }

    pub fn is_false(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Guard] {
        &self.clauses
    }

    pub fn vars(&self) -> BTreeSet<VariableId> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    pub fn eval(&self, point: &BTreeMap<VariableId, Rat>) -> Option<bool> {
        for c in &self.clauses {
            if c.eval(point)? {
                return Some(true);
            }
        }
        Some(false)
    }

    pub fn or(&self, other: &DnfFormula) -> DnfFormula {
        DnfFormula::from_clauses(self.clauses.iter().chain(other.clauses.iter()).cloned())
    }

    /// Conjunction by clause-wise merging, re-simplified.
    pub fn and(&self, other: &DnfFormula) -> DnfFormula {
        let mut out = Vec::new();
        for a in &self.clauses {
            for b in &other.clauses {
                let merged = a.and(b);
                if !merged.is_trivially_false() {
                    out.extend(simplify(&merged).clauses);
                }
            }
        }
        DnfFormula::from_clauses(out)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::Or(
            self.clauses
                .iter()
                .map(|c| {
                    Formula::And(c.atoms().into_iter().map(Formula::Leaf).collect())
                })
                .collect(),
        )
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "false");
        }
        if self.is_true() {
            return write!(f, "true");
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " or ")?;
            }
            if self.clauses.len() > 1 && c.len() > 1 {
                write!(f, "({c})")?;
            } else {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// Boolean combination of atoms, used as input to [`to_dnf`] and for the
/// negations needed by implication checks.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    True,
    False,
    Leaf(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn atom(poly: Poly, rel: Relation) -> Formula {
        match Atom::new(poly, rel) {
            AtomValue::True => Formula::True,
            AtomValue::False => Formula::False,
            AtomValue::Atom(a) => Formula::Leaf(a),
        }
    }

    pub fn and(items: Vec<Formula>) -> Formula {
        Formula::And(items)
    }

    pub fn or(items: Vec<Formula>) -> Formula {
        Formula::Or(items)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    fn to_nnf(&self, negated: bool) -> Formula {
        match self {
            Formula::True => {
                if negated {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            Formula::False => {
                if negated {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Formula::Leaf(a) => Formula::Leaf(if negated { a.negate() } else { a.clone() }),
            Formula::And(xs) => {
                let inner = xs.iter().map(|x| x.to_nnf(negated)).collect();
                if negated {
                    Formula::Or(inner)
                } else {
                    Formula::And(inner)
                }
            }
            Formula::Or(xs) => {
                let inner = xs.iter().map(|x| x.to_nnf(negated)).collect();
                if negated {
                    Formula::And(inner)
                } else {
                    Formula::Or(inner)
                }
            }
            Formula::Not(x) => x.to_nnf(!negated),
        }
    }
}

/// Converts a boolean combination of atoms to disjunctive normal form; every
/// clause is passed through [`simplify`] and trivially false clauses are
/// dropped.
pub fn to_dnf(f: &Formula) -> DnfFormula {
    fn clauses(f: &Formula) -> Vec<Guard> {
        match f {
            Formula::True => vec![Guard::truth()],
            Formula::False => Vec::new(),
            Formula::Leaf(a) => {
                vec![Guard::of_atoms([AtomValue::Atom(a.clone())])]
            }
            Formula::Or(xs) => xs.iter().flat_map(clauses).collect(),
            Formula::And(xs) => {
                let mut acc = vec![Guard::truth()];
                for x in xs {
                    let rhs = clauses(x);
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &rhs {
                            let merged = a.and(b);
                            if !merged.is_trivially_false() {
                                next.push(merged);
                            }
                        }
                    }
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            Formula::Not(_) => unreachable!("negations are pushed to atoms first"),
        }
    }
    let nnf = f.to_nnf(false);
    let mut out = Vec::new();
    for clause in clauses(&nnf) {
        out.extend(simplify(&clause).clauses);
    }
    DnfFormula::from_clauses(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VariableId;

    fn t() -> Poly {
        Poly::var(VariableId::time())
    }
    fn u() -> Poly {
        Poly::var(VariableId::dependent(0, 0, "u"))
    }
    fn udot() -> Poly {
        Poly::var(VariableId::dependent(0, 1, "u"))
    }

    #[test]
    fn atom_canonicalizes_content_and_relation() {
        // -2t > 0 becomes t < 0
        let a = Atom::new(t().scale(&Rat::from_integer((-2).into())), Relation::Gt);
        match a {
            AtomValue::Atom(a) => {
                assert_eq!(a.poly(), &t());
                assert_eq!(a.relation(), Relation::Lt);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_atoms_evaluate_away() {
        assert_eq!(Atom::new(Poly::from_int(1), Relation::Gt), AtomValue::True);
        assert_eq!(Atom::new(Poly::from_int(1), Relation::Eq), AtomValue::False);
        assert_eq!(Atom::new(Poly::zero(), Relation::Eq), AtomValue::True);
    }

    #[test]
    fn complementary_atoms_flag_the_guard() {
        let mut g = Guard::truth();
        g.insert(Atom::new(udot(), Relation::Eq));
        assert!(!g.is_trivially_false());
        g.insert(Atom::new(udot(), Relation::Ne));
        assert!(g.is_trivially_false());
    }

    #[test]
    fn sign_sets_merge_to_sharper_relations() {
        let mut g = Guard::truth();
        g.insert(Atom::new(u(), Relation::Ge));
        g.insert(Atom::new(u(), Relation::Ne));
        let atoms = g.atoms();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].relation(), Relation::Gt);
    }

    #[test]
    fn dnf_distribution() {
        // (a or b) and c -> [{a,c},{b,c}]
        let a = Formula::atom(t(), Relation::Eq);
        let b = Formula::atom(u(), Relation::Eq);
        let c = Formula::atom(udot(), Relation::Ne);
        let f = Formula::and(vec![Formula::or(vec![a, b]), c]);
        let dnf = to_dnf(&f);
        assert_eq!(dnf.clauses().len(), 2);
        for clause in dnf.clauses() {
            assert_eq!(clause.len(), 2);
        }
    }

    #[test]
    fn dnf_true_conjunct_is_identity() {
        let g = Formula::atom(u(), Relation::Gt);
        let f = Formula::and(vec![Formula::True, g.clone()]);
        assert_eq!(to_dnf(&f), to_dnf(&g));
    }

    #[test]
    fn dnf_absorption() {
        // a or (a and b) == a
        let a = Formula::atom(t(), Relation::Ne);
        let b = Formula::atom(u(), Relation::Eq);
        let f = Formula::or(vec![a.clone(), Formula::and(vec![a.clone(), b])]);
        let dnf = to_dnf(&f);
        assert_eq!(dnf.clauses().len(), 1);
        assert_eq!(dnf.clauses()[0].len(), 1);
    }

    #[test]
    fn negation_pushes_to_atoms() {
        let f = Formula::not(Formula::and(vec![
            Formula::atom(t(), Relation::Eq),
            Formula::atom(u(), Relation::Lt),
        ]));
        let dnf = to_dnf(&f);
        // t != 0 or u >= 0
        assert_eq!(dnf.clauses().len(), 2);
    }
}
