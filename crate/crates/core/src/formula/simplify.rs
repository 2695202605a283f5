//! Guard simplification over ordered fields.
//!
//! The rule set is a documented lower bound; every rule is sound over the
//! reals, so the solution set of the input is preserved exactly:
//!
//! - constant atoms evaluate away, duplicates and contradictions are handled
//!   by the sign-set representation;
//! - equations `x - c = 0` with `x` a variable and `c` rational are
//!   substituted into the remaining atoms;
//! - products split: `p*q = 0` into `p = 0 or q = 0` and `p*q != 0` into
//!   `p != 0 and q != 0`, using basic factorization;
//! - a polynomial that is a sum of monomials with positive coefficients and
//!   even exponents plus a positive constant is derived positive (and the
//!   mirrored rule for negative).

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::poly::factor::factor_basic;
use crate::poly::{Poly, Rat, VariableId};

use super::{Atom, AtomValue, DnfFormula, Guard, Relation, SignSet};

/// `p > 0` for every real assignment: all coefficients positive, all
/// exponents even, and a positive constant term present.
pub fn provably_positive(p: &Poly) -> bool {
    let mut has_constant = false;
    if p.is_zero() {
        return false;
    }
    for (m, c) in p.terms() {
        if !c.is_positive() {
            return false;
        }
        if m.is_one() {
            has_constant = true;
        } else if m.powers().any(|(_, e)| e % 2 != 0) {
            return false;
        }
    }
    has_constant
}

/// `p < 0` everywhere.
pub fn provably_negative(p: &Poly) -> bool {
    provably_positive(&-p)
}

/// Sign knowledge derivable from the polynomial's shape alone.
fn structural_sign(p: &Poly) -> Option<SignSet> {
    if provably_positive(p) {
        Some(SignSet::POS)
    } else if provably_negative(p) {
        Some(SignSet::NEG)
    } else {
        None
    }
}

/// Simplifies a guard into an equivalent disjunctive normal form.
pub fn simplify(g: &Guard) -> DnfFormula {
    let mut out: Vec<Guard> = Vec::new();
    let mut work = vec![g.clone()];
    while let Some(clause) = work.pop() {
        match step(&clause) {
            StepResult::False => {}
            StepResult::Done(c) => out.push(c),
            StepResult::Rewritten(c) => work.push(c),
            StepResult::Split(cs) => work.extend(cs),
        }
    }
    DnfFormula::from_clauses(out)
}

enum StepResult {
    False,
    Done(Guard),
    Rewritten(Guard),
    Split(Vec<Guard>),
}

/// Map from variables to rational constants read off the guard's
/// `a*x + b = 0` atoms.
fn constant_bindings(g: &Guard) -> BTreeMap<VariableId, (Poly, Rat)> {
    let mut map = BTreeMap::new();
    for (p, s) in g.entries() {
        if s != SignSet::ZERO {
            continue;
        }
        if let Some((x, value)) = linear_constant_solution(p) {
            map.entry(x).or_insert((p.clone(), value));
        }
    }
    map
}

/// Recognizes `a*x + b` with rational `a != 0`, `b`, returning `(x, -b/a)`.
fn linear_constant_solution(p: &Poly) -> Option<(VariableId, Rat)> {
    let mut var: Option<(VariableId, Rat)> = None;
    let mut constant = Rat::from_integer(0.into());
    for (m, c) in p.terms() {
        if m.is_one() {
            constant = c.clone();
            continue;
        }
        let mut powers = m.powers();
        let (v, e) = powers.next()?;
        if e != 1 || powers.next().is_some() || var.is_some() {
            return None;
        }
        var = Some((v.clone(), c.clone()));
    }
    let (x, a) = var?;
    Some((x, -constant / a))
}

fn step(g: &Guard) -> StepResult {
    if g.is_trivially_false() {
        return StepResult::False;
    }

    // Substitution of variable = constant equations into the other atoms.
    let bindings = constant_bindings(g);
    if !bindings.is_empty() {
        let subst: BTreeMap<VariableId, Poly> = bindings
            .iter()
            .map(|(x, (_, v))| (x.clone(), Poly::constant(v.clone())))
            .collect();
        let defining: Vec<&Poly> = bindings.values().map(|(p, _)| p).collect();
        let mut changed = false;
        let mut next = Guard::truth();
        for (p, s) in g.entries() {
            if defining.contains(&&*p) {
                if let Some(rel) = s.relation() {
                    next.insert_atom(Atom { poly: p.clone(), rel });
                }
                continue;
            }
            let substituted = p.substitute(&subst);
            if &substituted != p {
                changed = true;
            }
            if let Some(rel) = s.relation() {
                next.insert(Atom::new(substituted, rel));
            }
        }
        if changed {
            return StepResult::Rewritten(next);
        }
    }

    // Positivity shortcut.
    for (p, s) in g.entries() {
        if let Some(known) = structural_sign(p) {
            if s.intersect(known).is_empty() {
                return StepResult::False;
            }
            // The atom carries no information; drop it.
            let mut next = Guard::truth();
            for (q, sq) in g.entries() {
                if q != p {
                    if let Some(rel) = sq.relation() {
                        next.insert_atom(Atom { poly: q.clone(), rel });
                    }
                }
            }
            return StepResult::Rewritten(next);
        }
    }

    // Factor splitting for equations and inequations.
    for (p, s) in g.entries() {
        if s != SignSet::ZERO && s != SignSet::NEG.union(SignSet::POS) {
            continue;
        }
        let Ok((_, factors)) = factor_basic(p) else { continue };
        let nontrivial = factors.len() > 1 || factors.iter().any(|(f, m)| *m > 1 || f != p);
        if !nontrivial {
            continue;
        }
        let rest: Vec<Atom> = g
            .entries()
            .filter(|(q, _)| *q != p)
            .filter_map(|(q, sq)| sq.relation().map(|rel| Atom { poly: q.clone(), rel }))
            .collect();
        if s == SignSet::ZERO {
            // p = 0 splits into one clause per factor.
            let mut clauses = Vec::new();
            for (f, _) in &factors {
                let mut clause = Guard::of_atoms(rest.iter().cloned().map(AtomValue::Atom));
                clause.insert(Atom::new(f.clone(), Relation::Eq));
                clauses.push(clause);
            }
            return StepResult::Split(clauses);
        } else {
            // p != 0 is equivalent to all factors being nonzero.
            let mut clause = Guard::of_atoms(rest.into_iter().map(AtomValue::Atom));
            for (f, _) in &factors {
                clause.insert(Atom::new(f.clone(), Relation::Ne));
            }
            return StepResult::Rewritten(clause);
        }
    }

    StepResult::Done(g.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::to_dnf;
    use crate::formula::Formula;
    use crate::poly::VariableId;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn t() -> Poly {
        Poly::var(VariableId::time())
    }
    fn u() -> Poly {
        Poly::var(VariableId::dependent(0, 0, "u"))
    }
    fn udot() -> Poly {
        Poly::var(VariableId::dependent(0, 1, "u"))
    }
    fn v() -> Poly {
        Poly::var(VariableId::dependent(1, 0, "v"))
    }

    fn guard(atoms: Vec<AtomValue>) -> Guard {
        Guard::of_atoms(atoms)
    }

    #[test]
    fn product_inequation_splits_conjunctively() {
        let g = guard(vec![Atom::new(&t() * &v(), Relation::Ne)]);
        let dnf = simplify(&g);
        assert_eq!(dnf.clauses().len(), 1);
        let clause = &dnf.clauses()[0];
        assert_eq!(clause.sign_of(&t()), Some(SignSet::NEG.union(SignSet::POS)));
        assert_eq!(clause.sign_of(&v()), Some(SignSet::NEG.union(SignSet::POS)));
    }

    #[test]
    fn product_equation_splits_disjunctively() {
        let g = guard(vec![Atom::new(&t() * &v(), Relation::Eq)]);
        let dnf = simplify(&g);
        assert_eq!(dnf.clauses().len(), 2);
    }

    #[test]
    fn sphere_substitution_produces_reduced_clause() {
        // u' = 0 and u'^2 + u^2 + t^2 - 1 = 0 and t + u*u' != 0
        let sphere = &(&udot().pow(2) + &u().pow(2)) + &(&t().pow(2) - &Poly::one());
        let g = guard(vec![
            Atom::new(udot(), Relation::Eq),
            Atom::new(sphere, Relation::Eq),
            Atom::new(&t() + &(&u() * &udot()), Relation::Ne),
        ]);
        let dnf = simplify(&g);
        assert_eq!(dnf.clauses().len(), 1);
        let clause = &dnf.clauses()[0];
        let circle = &(&u().pow(2) + &t().pow(2)) - &Poly::one();
        assert_eq!(clause.sign_of(&circle), Some(SignSet::ZERO));
        assert_eq!(clause.sign_of(&udot()), Some(SignSet::ZERO));
        assert_eq!(clause.sign_of(&t()), Some(SignSet::NEG.union(SignSet::POS)));
    }

    #[test]
    fn contradictory_constant_clause_is_false() {
        let g = guard(vec![Atom::new(Poly::one(), Relation::Eq)]);
        assert!(simplify(&g).is_false());
    }

    #[test]
    fn positivity_shortcut_refutes() {
        // u'^2 + 1 = 0 is false everywhere.
        let g = guard(vec![Atom::new(&udot().pow(2) + &Poly::one(), Relation::Eq)]);
        assert!(simplify(&g).is_false());
        // u'^2 + 1 > 0 is trivially true.
        let g = guard(vec![Atom::new(&udot().pow(2) + &Poly::one(), Relation::Gt)]);
        assert!(simplify(&g).is_true());
    }

    #[test]
    fn chained_substitution_reaches_fixpoint() {
        // u' = 0 and t + u*u' = 0 and u^2 + t^2 - 1 = 0
        // substituting u' gives t = 0, substituting t gives u^2 - 1 = 0,
        // which then splits into u = 1 and u = -1.
        let g = guard(vec![
            Atom::new(udot(), Relation::Eq),
            Atom::new(&t() + &(&u() * &udot()), Relation::Eq),
            Atom::new(&(&u().pow(2) + &t().pow(2)) - &Poly::one(), Relation::Eq),
        ]);
        let dnf = simplify(&g);
        assert_eq!(dnf.clauses().len(), 2);
        for clause in dnf.clauses() {
            assert_eq!(clause.sign_of(&t()), Some(SignSet::ZERO));
            assert_eq!(clause.sign_of(&udot()), Some(SignSet::ZERO));
            assert!(
                clause.sign_of(&(&u() - &Poly::one())) == Some(SignSet::ZERO)
                    || clause.sign_of(&(&u() + &Poly::one())) == Some(SignSet::ZERO)
            );
        }
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn arb_guard() -> impl Strategy<Value = Guard> {
        let var = prop_oneof![Just(t()), Just(u()), Just(udot())];
        let poly = proptest::collection::vec((var, 0u32..=2, -3i64..=3), 1..3).prop_map(|ts| {
            let mut p = Poly::zero();
            for (v, e, c) in ts {
                p = &p + &v.pow(e).scale(&rat(c, 1));
            }
            p
        });
        let rel = prop_oneof![
            Just(Relation::Eq),
            Just(Relation::Ne),
            Just(Relation::Lt),
            Just(Relation::Ge)
        ];
        proptest::collection::vec((poly, rel), 0..4)
            .prop_map(|atoms| Guard::of_atoms(atoms.into_iter().map(|(p, r)| Atom::new(p, r))))
    }

    proptest! {
        // Solution-set preservation at rational sample points.
        #[test]
        fn simplify_preserves_solutions(
            g in arb_guard(),
            pts in proptest::collection::vec((-4i64..=4, -4i64..=4, -4i64..=4), 8)
        ) {
            let dnf = simplify(&g);
            for (a, b, c) in pts {
                let mut point = BTreeMap::new();
                point.insert(VariableId::time(), rat(a, 2));
                point.insert(VariableId::dependent(0, 0, "u"), rat(b, 2));
                point.insert(VariableId::dependent(0, 1, "u"), rat(c, 2));
                let before = g.eval(&point).unwrap();
                let after = dnf.eval(&point).unwrap();
                prop_assert_eq!(before, after);
            }
        }

        #[test]
        fn to_dnf_matches_direct_evaluation(
            g in arb_guard(),
            h in arb_guard(),
            pts in proptest::collection::vec((-4i64..=4, -4i64..=4, -4i64..=4), 8)
        ) {
            let f = Formula::or(vec![g.to_formula(), h.to_formula()]);
            let dnf = to_dnf(&f);
            for (a, b, c) in pts {
                let mut point = BTreeMap::new();
                point.insert(VariableId::time(), rat(a, 2));
                point.insert(VariableId::dependent(0, 0, "u"), rat(b, 2));
                point.insert(VariableId::dependent(0, 1, "u"), rat(c, 2));
                let direct = g.eval(&point).unwrap() || h.eval(&point).unwrap();
                prop_assert_eq!(dnf.eval(&point).unwrap(), direct);
            }
        }
    }
}
