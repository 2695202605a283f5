//! The deduction procedure used by the parametric elimination.
//!
//! `deduce` answers whether a guard entails an atom; `is_false` whether a
//! guard is unsatisfiable. Both are sound and one-sided: `Unknown` carries no
//! information. Any constraint occurring literally in the guard is derivable,
//! and entailment survives substituting the guard's equations that are linear
//! in one variable, constant evaluation, factor-based nonvanishing and the
//! positivity shortcut.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::poly::factor::factor_basic;
use crate::poly::{Poly, VariableId};

use super::simplify::{provably_negative, provably_positive};
use super::{AtomValue, Guard, SignSet};

/// Verdict of [`deduce`]: the algorithm only ever branches on derivability.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Deduction {
    Derivable,
    Unknown,
}

impl Deduction {
    pub fn is_derivable(self) -> bool {
        self == Deduction::Derivable
    }
}

/// A guard closed under its own variable-eliminating equations, cached for
/// repeated queries.
#[derive(Clone, Debug)]
pub struct SaturatedGuard {
    /// Original plus substituted sign conditions, merged.
    signs: BTreeMap<Poly, SignSet>,
    /// Rewrites `x -> p` read off equations linear in `x` with a rational
    /// coefficient; rewriting is strictly descending in the variable order.
    subst: BTreeMap<VariableId, Poly>,
    contradictory: bool,
}

impl SaturatedGuard {
    pub fn new(g: &Guard) -> SaturatedGuard {
        let mut signs: BTreeMap<Poly, SignSet> = g.entries().map(|(p, s)| (p.clone(), s)).collect();
        let mut contradictory = g.is_trivially_false();
        let mut subst: BTreeMap<VariableId, Poly> = BTreeMap::new();

        // Build the rewrite system; every round eliminates at least one
        // variable from the equation set, so this terminates.
        loop {
            let mut new_rule = None;
            for (p, s) in &signs {
                if *s != SignSet::ZERO {
                    continue;
                }
                if let Some((x, rhs)) = solve_linear(p) {
                    if !subst.contains_key(&x) {
                        new_rule = Some((x, rhs));
                        break;
                    }
                }
            }
            let Some((x, rhs)) = new_rule else { break };
            // Keep the rewrite system fully normalized: the new right-hand
            // side is reduced by the existing rules and the existing ones by
            // the new rule, so a single substitution pass is complete.
            let rhs = rhs.substitute(&subst);
            let mut next: BTreeMap<VariableId, Poly> = BTreeMap::new();
            for (v, p) in &subst {
                next.insert(v.clone(), p.substitute_var(&x, &rhs));
            }
            next.insert(x.clone(), rhs);
            subst = next;

            let mut rebuilt: BTreeMap<Poly, SignSet> = BTreeMap::new();
            for (p, s) in &signs {
                let q = p.substitute(&subst);
                insert_sign(&mut rebuilt, q, *s, &mut contradictory);
                // Keep the original so literal queries still match.
                insert_sign(&mut rebuilt, p.clone(), *s, &mut contradictory);
            }
            signs = rebuilt;
            if contradictory {
                break;
            }
        }

        SaturatedGuard { signs, subst, contradictory }
    }

    fn sign_of(&self, p: &Poly) -> Option<SignSet> {
        self.signs.get(p).copied()
    }

    /// Normal form of a polynomial under the guard's rewrites.
    pub fn reduce(&self, p: &Poly) -> Poly {
        p.substitute(&self.subst)
    }
}

/// Inserts a sign condition after canonicalization; constants fold.
fn insert_sign(map: &mut BTreeMap<Poly, SignSet>, p: Poly, s: SignSet, contradictory: &mut bool) {
    if let Some(c) = p.as_constant() {
        if s.intersect(SignSet::of_value(&c)).is_empty() {
            *contradictory = true;
        }
        return;
    }
    let (content, prim) = p.canonicalize();
    let s = if content.is_negative() { flip_set(s) } else { s };
    let entry = map.entry(prim).or_insert(SignSet::ALL);
    *entry = entry.intersect(s);
    if entry.is_empty() {
        *contradictory = true;
    }
}

fn flip_set(s: SignSet) -> SignSet {
    let mut out = SignSet::EMPTY;
    if s.contains(SignSet::NEG) {
        out = out.union(SignSet::POS);
    }
    if s.contains(SignSet::ZERO) {
        out = out.union(SignSet::ZERO);
    }
    if s.contains(SignSet::POS) {
        out = out.union(SignSet::NEG);
    }
    out
}

/// Solves `p = 0` for its greatest variable occurring linearly with a
/// rational coefficient and absent from the rest, as `x -> -(rest)/c`.
fn solve_linear(p: &Poly) -> Option<(VariableId, Poly)> {
    let mut vars: Vec<VariableId> = p.vars().into_iter().collect();
    vars.reverse();
    for x in vars {
        if p.degree_in(&x) != 1 {
            continue;
        }
        let coeffs = p.coeffs_in(&x);
        let Some(c) = coeffs[1].as_constant() else { continue };
        debug_assert!(!c.is_zero());
        let rest = &coeffs[0];
        let rhs = rest.scale(&(-c.recip()));
        return Some((x, rhs));
    }
    None
}

/// Structural sign of a polynomial: the positivity shortcut.
fn structural_signs(p: &Poly) -> SignSet {
    if provably_positive(p) {
        SignSet::POS
    } else if provably_negative(p) {
        SignSet::NEG
    } else {
        SignSet::ALL
    }
}

/// Best known sign set for `p` under the saturated guard: literal knowledge,
/// knowledge about the reduced form and the positivity shortcut, intersected.
fn known_signs(sat: &SaturatedGuard, p: &Poly) -> SignSet {
    let mut known = structural_signs(p);
    if let Some(s) = sat.sign_of(p) {
        known = known.intersect(s);
    }
    let reduced = sat.reduce(p);
    if let Some(c) = reduced.as_constant() {
        return known.intersect(SignSet::of_value(&c));
    }
    let (content, prim) = reduced.canonicalize();
    let mut red_known = structural_signs(&prim);
    if let Some(s) = sat.sign_of(&prim) {
        red_known = red_known.intersect(s);
    }
    // Factor-based nonvanishing: all factors nonzero means the product is.
    if red_known.contains(SignSet::ZERO) {
        if let Ok((_, factors)) = factor_basic(&prim) {
            if factors.len() > 1
                && factors.iter().all(|(f, _)| !known_sign_simple(sat, f).contains(SignSet::ZERO))
            {
                red_known = red_known.intersect(SignSet::NEG.union(SignSet::POS));
            }
        }
    }
    if content.is_negative() {
        red_known = flip_set(red_known);
    }
    known.intersect(red_known)
}

/// Non-recursive sign lookup used for factors.
fn known_sign_simple(sat: &SaturatedGuard, p: &Poly) -> SignSet {
    let mut known = structural_signs(p);
    if let Some(s) = sat.sign_of(p) {
        known = known.intersect(s);
    }
    known
}

/// Whether the guard entails the atom over the reals. Sound, one-sided.
pub fn deduce(g: &Guard, atom: &AtomValue) -> Deduction {
    deduce_saturated(&SaturatedGuard::new(g), atom)
}

/// [`deduce`] against a pre-saturated guard.
pub fn deduce_saturated(sat: &SaturatedGuard, atom: &AtomValue) -> Deduction {
    let atom = match atom {
        AtomValue::True => return Deduction::Derivable,
        AtomValue::False => {
            // Only a contradictory guard entails falsity.
            return if sat.contradictory { Deduction::Derivable } else { Deduction::Unknown };
        }
        AtomValue::Atom(a) => a,
    };
    if sat.contradictory {
        return Deduction::Derivable;
    }
    let known = known_signs(sat, atom.poly());
    if known.is_subset(atom.relation().sign_set()) {
        Deduction::Derivable
    } else {
        Deduction::Unknown
    }
}

/// Whether the guard is derivably unsatisfiable over the reals. Sound,
/// one-sided: `false` means unknown.
pub fn is_false(g: &Guard) -> bool {
    is_false_saturated(&SaturatedGuard::new(g))
}

pub fn is_false_saturated(sat: &SaturatedGuard) -> bool {
    if sat.contradictory {
        return true;
    }
    for (p, s) in &sat.signs {
        if known_signs(sat, p).intersect(*s).is_empty() {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Atom, Relation};
    use crate::poly::{Poly, Rat};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

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
    fn chi() -> Poly {
        Poly::var(VariableId::parameter("chi"))
    }

    fn g(atoms: Vec<AtomValue>) -> Guard {
        Guard::of_atoms(atoms)
    }

    #[test]
    fn literal_atoms_are_derivable() {
        let guard = g(vec![
            Atom::new(udot(), Relation::Ne),
            Atom::new(&t() + &u(), Relation::Eq),
        ]);
        assert!(deduce(&guard, &Atom::new(udot(), Relation::Ne)).is_derivable());
    }

    #[test]
    fn substitution_derives_entry_zero() {
        // {u' = 0} |- t*u' = 0 via rewriting
        let guard = g(vec![Atom::new(udot(), Relation::Eq)]);
        assert!(deduce(&guard, &Atom::new(&t() * &udot(), Relation::Eq)).is_derivable());
    }

    #[test]
    fn order_axiom_chi_positive_implies_nonzero() {
        let guard = g(vec![Atom::new(chi(), Relation::Gt)]);
        assert!(deduce(&guard, &Atom::new(chi(), Relation::Ne)).is_derivable());
        assert!(deduce(&guard, &Atom::new(chi(), Relation::Ge)).is_derivable());
        assert!(!deduce(&guard, &Atom::new(chi(), Relation::Eq)).is_derivable());
    }

    #[test]
    fn factor_based_nonvanishing() {
        let guard = g(vec![
            Atom::new(t(), Relation::Ne),
            Atom::new(v(), Relation::Ne),
        ]);
        assert!(deduce(&guard, &Atom::new(&t() * &v(), Relation::Ne)).is_derivable());
    }

    #[test]
    fn positivity_shortcut_derives_nonzero() {
        let guard = Guard::truth();
        let p = &udot().pow(2) + &Poly::one();
        assert!(deduce(&guard, &Atom::new(p.clone(), Relation::Ne)).is_derivable());
        assert!(deduce(&guard, &Atom::new(p, Relation::Gt)).is_derivable());
    }

    #[test]
    fn complementary_pair_is_false() {
        let mut guard = g(vec![Atom::new(t(), Relation::Eq)]);
        guard.insert(Atom::new(t(), Relation::Ne));
        assert!(is_false(&guard));
    }

    #[test]
    fn positivity_vs_equation_is_false() {
        let guard = g(vec![Atom::new(&udot().pow(2) + &Poly::one(), Relation::Eq)]);
        assert!(is_false(&guard));
    }

    #[test]
    fn satisfiable_equation_stays_unknown() {
        let guard = g(vec![Atom::new(
            &(&u().pow(2) + &t().pow(2)) - &Poly::one(),
            Relation::Eq,
        )]);
        assert!(!is_false(&guard));
    }

    #[test]
    fn opposite_strict_inequalities_are_false() {
        let mut guard = g(vec![Atom::new(chi(), Relation::Gt)]);
        guard.insert(Atom::new(chi(), Relation::Lt));
        assert!(is_false(&guard));
    }

    #[test]
    fn variable_to_variable_rewrite() {
        // {v' - w = 0, w = 0} |- v' = 0
        let vdot = Poly::var(VariableId::dependent(1, 1, "v"));
        let w = Poly::var(VariableId::dependent(2, 0, "w"));
        let guard = g(vec![
            Atom::new(&vdot - &w, Relation::Eq),
            Atom::new(w.clone(), Relation::Eq),
        ]);
        assert!(deduce(&guard, &Atom::new(vdot, Relation::Eq)).is_derivable());
    }

    // D2 syntactically: inserting any atom into any guard makes it derivable.
    proptest! {
        #[test]
        fn d2_holds_syntactically(
            coeffs in proptest::collection::vec((-3i64..=3, 0u32..=2, 0u32..=2), 1..3),
            rel in prop_oneof![
                Just(Relation::Eq), Just(Relation::Ne),
                Just(Relation::Lt), Just(Relation::Ge)
            ],
            base in proptest::collection::vec((-3i64..=3, 0u32..=2), 0..3),
        ) {
            let mut p = Poly::zero();
            for (c, e1, e2) in coeffs {
                p = &p + &(&t().pow(e1) * &u().pow(e2)).scale(&Rat::from_integer(c.into()));
            }
            let mut guard = Guard::truth();
            for (c, e) in base {
                guard.insert(Atom::new(
                    u().pow(e).scale(&Rat::from_integer(c.into())),
                    Relation::Ge,
                ));
            }
            let atom = Atom::new(p, rel);
            guard.insert(atom.clone());
            if !guard.is_trivially_false() {
                prop_assert!(deduce(&guard, &atom).is_derivable());
            }
        }
    }

    // Soundness harness: derivable verdicts are never contradicted by
    // exhaustive rational grid sampling.
    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn soundness_on_grid(
            guard_atoms in proptest::collection::vec(
                (
                    proptest::collection::vec((-2i64..=2, 0u32..=2, 0u32..=2), 1..3),
                    prop_oneof![Just(Relation::Eq), Just(Relation::Ne), Just(Relation::Gt)],
                ),
                0..3
            ),
            query in (
                proptest::collection::vec((-2i64..=2, 0u32..=2, 0u32..=2), 1..3),
                prop_oneof![Just(Relation::Eq), Just(Relation::Ne), Just(Relation::Gt)],
            ),
        ) {
            let build = |spec: &Vec<(i64, u32, u32)>| {
                let mut p = Poly::zero();
                for (c, e1, e2) in spec {
                    p = &p + &(&t().pow(*e1) * &u().pow(*e2)).scale(&Rat::from_integer((*c).into()));
                }
                p
            };
            let mut guard = Guard::truth();
            for (spec, rel) in &guard_atoms {
                guard.insert(Atom::new(build(spec), *rel));
            }
            let (qspec, qrel) = &query;
            let qatom = Atom::new(build(qspec), *qrel);

            let derivable = deduce(&guard, &qatom).is_derivable();
            let refuted = is_false(&guard);

            // Grid scan in halves from -3 to 3.
            for a in -6i64..=6 {
                for b in -6i64..=6 {
                    let mut point = BTreeMap::new();
                    point.insert(VariableId::time(), Rat::new(a.into(), 2.into()));
                    point.insert(VariableId::dependent(0, 0, "u"), Rat::new(b.into(), 2.into()));
                    let guard_holds = guard.eval(&point).unwrap();
                    if refuted {
                        prop_assert!(!guard_holds, "refuted guard has a witness at ({a}/2,{b}/2)");
                    }
                    if derivable && guard_holds {
                        if let AtomValue::Atom(ref qa) = qatom {
                            prop_assert!(
                                qa.eval(&point).unwrap(),
                                "derivable atom fails at ({a}/2,{b}/2)"
                            );
                        }
                    }
                }
            }
        }
    }
}
