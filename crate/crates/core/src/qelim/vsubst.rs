//! Virtual substitution of symbolic test points for one quantified variable.
//!
//! For atoms of degree at most two in the eliminated variable, the standard
//! test-point set consists of minus infinity, the roots of the atoms (linear
//! roots guarded by a nonzero coefficient, quadratic roots guarded by a
//! nonzero leading coefficient and a nonnegative discriminant), and, for
//! strict constraints, the same roots shifted by a positive infinitesimal.
//! All substitutions are handled symbolically; no numeric approximation is
//! made anywhere.

use crate::formula::{Formula, Guard, Relation};
use crate::poly::{rat, Poly, VariableId};

/// A symbolic root of an atom in the eliminated variable.
#[derive(Clone, Debug)]
pub(crate) enum RootExpr {
    /// `num/den`, valid where `den != 0`.
    Frac { num: Poly, den: Poly },
    /// `(f + sign*sqrt(delta))/g`, valid where `g != 0` and `delta >= 0`.
    Surd { f: Poly, g: Poly, delta: Poly, positive: bool },
}

/// A test point of the elimination set.
#[derive(Clone, Debug)]
pub(crate) enum TestPoint {
    NegInf,
    At(RootExpr),
    /// Root shifted by a positive infinitesimal.
    JustAbove(RootExpr),
}

/// Signals an atom of degree above two in the eliminated variable.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("atom has degree {degree} > 2 in `{var}`")]
pub struct NotEliminable {
    pub var: String,
    pub degree: u32,
}

/// The candidate roots contributed by one atom polynomial, each with the
/// side condition under which it is a root.
pub(crate) fn root_points(p: &Poly, v: &VariableId) -> Result<Vec<(Formula, RootExpr)>, NotEliminable> {
    let deg = p.degree_in(v);
    let cs = p.coeffs_in(v);
    match deg {
        0 => Ok(Vec::new()),
        1 => {
            let c1 = cs[1].clone();
            let c0 = cs[0].clone();
            Ok(vec![(
                Formula::atom(c1.clone(), Relation::Ne),
                RootExpr::Frac { num: -&c0, den: c1 },
            )])
        }
        2 => {
            let c2 = cs[2].clone();
            let c1 = cs[1].clone();
            let c0 = cs[0].clone();
            let delta = &(&c1 * &c1) - &(&c2 * &c0).scale(&rat(4));
            let quad_guard = Formula::and(vec![
                Formula::atom(c2.clone(), Relation::Ne),
                Formula::atom(delta.clone(), Relation::Ge),
            ]);
            let g = c2.scale(&rat(2));
            let mut out = vec![
                (
                    quad_guard.clone(),
                    RootExpr::Surd {
                        f: -&c1,
                        g: g.clone(),
                        delta: delta.clone(),
                        positive: false,
                    },
                ),
                (
                    quad_guard,
                    RootExpr::Surd { f: -&c1, g, delta, positive: true },
                ),
            ];
            if !c1.is_zero() {
                // Degenerate case: leading coefficient vanishes.
                out.push((
                    Formula::and(vec![
                        Formula::atom(c2, Relation::Eq),
                        Formula::atom(c1.clone(), Relation::Ne),
                    ]),
                    RootExpr::Frac { num: -&c0, den: c1 },
                ));
            }
            Ok(out)
        }
        d => Err(NotEliminable { var: v.to_string(), degree: d }),
    }
}

/// `p <> 0` at the test point, as a formula over the remaining variables.
/// `coeffs[i]` is the coefficient of `v^i` in `p`.
pub(crate) fn substitute_atom(coeffs: &[Poly], rel: Relation, point: &TestPoint) -> Formula {
    match point {
        TestPoint::NegInf => neg_inf(coeffs, rel),
        TestPoint::At(root) => at_root(coeffs, rel, root),
        TestPoint::JustAbove(root) => eps_cascade(coeffs, rel, root),
    }
}

/// Sign of a polynomial at minus infinity: the first nonvanishing
/// coefficient from the top decides, with parity of its index flipping the
/// sign.
fn neg_inf(coeffs: &[Poly], rel: Relation) -> Formula {
    match rel {
        Relation::Eq => Formula::and(
            coeffs.iter().map(|c| Formula::atom(c.clone(), Relation::Eq)).collect(),
        ),
        Relation::Ne => Formula::or(
            coeffs.iter().map(|c| Formula::atom(c.clone(), Relation::Ne)).collect(),
        ),
        Relation::Lt | Relation::Gt | Relation::Le | Relation::Ge => {
            let strict = if rel.is_strict_order() { rel } else if rel == Relation::Le {
                Relation::Lt
            } else {
                Relation::Gt
            };
            let mut disjuncts = Vec::new();
            for i in (0..coeffs.len()).rev() {
                let mut parts: Vec<Formula> = coeffs[i + 1..]
                    .iter()
                    .map(|c| Formula::atom(c.clone(), Relation::Eq))
                    .collect();
                let adjusted = if i % 2 == 1 { strict.flip() } else { strict };
                parts.push(Formula::atom(coeffs[i].clone(), adjusted));
                disjuncts.push(Formula::and(parts));
            }
            if !rel.is_strict_order() {
                disjuncts.push(Formula::and(
                    coeffs.iter().map(|c| Formula::atom(c.clone(), Relation::Eq)).collect(),
                ));
            }
            Formula::or(disjuncts)
        }
    }
}

fn at_root(coeffs: &[Poly], rel: Relation, root: &RootExpr) -> Formula {
    match root {
        RootExpr::Frac { num, den } => {
            // p(num/den) * den^d = sum c_i num^i den^(d-i); an even power of
            // the denominator does not change the sign.
            let d = coeffs.len() - 1;
            let mut n = Poly::zero();
            for (i, c) in coeffs.iter().enumerate() {
                n = &n + &(&(c * &num.pow(i as u32)) * &den.pow((d - i) as u32));
            }
            let value = if d % 2 == 1 { &n * den } else { n };
            Formula::atom(value, rel)
        }
        RootExpr::Surd { f, g, delta, positive } => {
            // p((f + e*sqrt(delta))/g) has the sign of A + B*sqrt(delta).
            let mut cs = coeffs.to_vec();
            while cs.len() < 3 {
                cs.push(Poly::zero());
            }
            let f2_plus_delta = &(f * f) + delta;
            let a = &(&(&cs[2] * &f2_plus_delta) + &(&(&cs[1] * g) * f)) + &(&cs[0] * &(g * g));
            let b0 = &(&cs[2] * f).scale(&rat(2)) + &(&cs[1] * g);
            let b = if *positive { b0 } else { -&b0 };
            let s = &(&a * &a) - &(&(&b * &b) * delta);
            sign_of_surd(&a, &b, &s, rel)
        }
    }
}

/// Encodes `A + B*sqrt(delta) <> 0` with `delta >= 0` guaranteed by the
/// point guard, using `s = A^2 - B^2*delta`.
fn sign_of_surd(a: &Poly, b: &Poly, s: &Poly, rel: Relation) -> Formula {
    let atom = |p: &Poly, r| Formula::atom(p.clone(), r);
    match rel {
        Relation::Eq => Formula::and(vec![
            atom(&(a * b), Relation::Le),
            atom(s, Relation::Eq),
        ]),
        Relation::Ne => Formula::or(vec![
            atom(&(a * b), Relation::Gt),
            atom(s, Relation::Ne),
        ]),
        Relation::Gt => Formula::or(vec![
            Formula::and(vec![atom(a, Relation::Gt), atom(s, Relation::Gt)]),
            Formula::and(vec![atom(b, Relation::Gt), atom(s, Relation::Lt)]),
            Formula::and(vec![atom(a, Relation::Gt), atom(b, Relation::Gt)]),
        ]),
        Relation::Lt => Formula::or(vec![
            Formula::and(vec![atom(a, Relation::Lt), atom(s, Relation::Gt)]),
            Formula::and(vec![atom(b, Relation::Lt), atom(s, Relation::Lt)]),
            Formula::and(vec![atom(a, Relation::Lt), atom(b, Relation::Lt)]),
        ]),
        Relation::Ge => Formula::or(vec![
            Formula::and(vec![atom(a, Relation::Ge), atom(s, Relation::Ge)]),
            Formula::and(vec![atom(b, Relation::Ge), atom(s, Relation::Le)]),
            Formula::and(vec![atom(a, Relation::Ge), atom(b, Relation::Ge)]),
        ]),
        Relation::Le => Formula::or(vec![
            Formula::and(vec![atom(a, Relation::Le), atom(s, Relation::Ge)]),
            Formula::and(vec![atom(b, Relation::Le), atom(s, Relation::Le)]),
            Formula::and(vec![atom(a, Relation::Le), atom(b, Relation::Le)]),
        ]),
    }
}

/// `p(x + eps) <> 0` for an infinitesimal positive `eps`: the first
/// nonvanishing derivative at `x` decides.
fn eps_cascade(coeffs: &[Poly], rel: Relation, root: &RootExpr) -> Formula {
    let at = |cs: &[Poly], r| at_root(cs, r, root);
    match rel {
        Relation::Eq | Relation::Ne => {
            // Zero (or not) in a whole right neighbourhood: all derivatives.
            let mut all = Vec::new();
            let mut cs = coeffs.to_vec();
            loop {
                all.push(at(&cs, Relation::Eq));
                if cs.len() <= 1 {
                    break;
                }
                cs = derivative_coeffs(&cs);
            }
            if rel == Relation::Eq {
                Formula::and(all)
            } else {
                Formula::not(Formula::and(all))
            }
        }
        Relation::Lt | Relation::Gt | Relation::Le | Relation::Ge => {
            let strict = match rel {
                Relation::Le => Relation::Lt,
                Relation::Ge => Relation::Gt,
                other => other,
            };
            let last = coeffs.len() <= 1;
            if last {
                // Constant in v: the shift changes nothing.
                let final_rel = if rel.is_strict_order() { strict } else { rel };
                return at(coeffs, final_rel);
            }
            let next = derivative_coeffs(coeffs);
            Formula::or(vec![
                at(coeffs, strict),
                Formula::and(vec![
                    at(coeffs, Relation::Eq),
                    eps_cascade(&next, rel, root),
                ]),
            ])
        }
    }
}

fn derivative_coeffs(coeffs: &[Poly]) -> Vec<Poly> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale(&rat(i as i64)))
        .collect()
}

/// Substitutes the test point into every atom of the clause; atoms free of
/// the variable pass through unchanged.
pub(crate) fn substitute_clause(clause: &Guard, v: &VariableId, point: &TestPoint) -> Formula {
    let mut parts = Vec::new();
    for atom in clause.atoms() {
        if atom.poly().degree_in(v) == 0 {
            parts.push(Formula::Leaf(atom));
        } else {
            let coeffs = atom.poly().coeffs_in(v);
            parts.push(substitute_atom(&coeffs, atom.relation(), point));
        }
    }
    Formula::and(parts)
}
