//! Exact sparse multivariate polynomial arithmetic over jet variables and
//! parameters.
//!
//! Coefficients are arbitrary-precision rationals; there is no floating point
//! anywhere in this crate, since the decision procedures downstream need exact
//! sign determinations.
//!
//! The term order is degree-lexicographic over the [`VariableId`] order: terms
//! of higher total degree are greater, ties are broken by comparing exponents
//! on the smallest variables first (a higher exponent on a smaller variable
//! wins). The order is fixed and documented here because guard printing and
//! sign normalization depend on it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar used for every coefficient in the crate.
pub type Rat = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// One coordinate of the ambient space: the independent variable `t`, a jet
/// variable `u_alpha^(order)`, or a real parameter.
///
/// The total order is orderly: `t` first, then jet variables sorted by
/// derivative order and then by the index of the unknown, parameters last by
/// name. It is strict and stable for the lifetime of a run.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum VariableId {
    /// The independent variable `t`.
    Time,
    /// Derivative of order `order` of the `alpha`-th unknown function.
    Dependent { alpha: u32, order: u32, name: Arc<str> },
    /// A real parameter of the system.
    Parameter { name: Arc<str> },
}

impl VariableId {
    pub fn time() -> Self {
        VariableId::Time
    }

    pub fn dependent(alpha: u32, order: u32, name: &str) -> Self {
        VariableId::Dependent { alpha, order, name: Arc::from(name) }
    }

    pub fn parameter(name: &str) -> Self {
        VariableId::Parameter { name: Arc::from(name) }
    }

    /// Derivative order contributed by this variable (`t` and parameters
    /// count as order zero).
    pub fn order(&self) -> u32 {
        match self {
            VariableId::Dependent { order, .. } => *order,
            _ => 0,
        }
    }

    pub fn is_parameter(&self) -> bool {
        matches!(self, VariableId::Parameter { .. })
    }

    pub fn is_jet(&self) -> bool {
        !self.is_parameter()
    }

    fn rank(&self) -> u8 {
        match self {
            VariableId::Time => 0,
            VariableId::Dependent { .. } => 1,
            VariableId::Parameter { .. } => 2,
        }
    }
}

impl Ord for VariableId {
    fn cmp(&self, other: &Self) -> Ordering {
        use VariableId::*;
        match (self, other) {
            (Time, Time) => Ordering::Equal,
            (
                Dependent { alpha, order, name },
                Dependent { alpha: a2, order: o2, name: n2 },
            ) => (order, alpha, name).cmp(&(o2, a2, n2)),
            (Parameter { name }, Parameter { name: n2 }) => name.cmp(n2),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for VariableId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableId::Time => write!(f, "t"),
            VariableId::Dependent { order, name, .. } => match order {
                0 => write!(f, "{name}"),
                1..=3 => write!(f, "{name}{}", "'".repeat(*order as usize)),
                _ => write!(f, "D({name},{order})"),
            },
            VariableId::Parameter { name } => write!(f, "{name}"),
        }
    }
}

/// A power product of variables; exponents are strictly positive.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(BTreeMap<VariableId, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(v: VariableId) -> Self {
        let mut m = BTreeMap::new();
        m.insert(v, 1);
        Monomial(m)
    }

    pub fn from_powers<I: IntoIterator<Item = (VariableId, u32)>>(iter: I) -> Self {
        let mut m = BTreeMap::new();
        for (v, e) in iter {
            if e > 0 {
                *m.entry(v).or_insert(0) += e;
            }
        }
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn exponent(&self, v: &VariableId) -> u32 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = &VariableId> {
        self.0.keys()
    }

    pub fn powers(&self) -> impl Iterator<Item = (&VariableId, u32)> {
        self.0.iter().map(|(v, e)| (v, *e))
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (v, e) in &other.0 {
            *m.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(m)
    }

    /// Removes `v` entirely, returning its exponent.
    fn without(&self, v: &VariableId) -> (Monomial, u32) {
        let mut m = self.0.clone();
        let e = m.remove(v).unwrap_or(0);
        (Monomial(m), e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Lexicographic tie-break: walk the union of variables in ascending
        // order; the monomial with the higher exponent on the first
        // differing variable is the greater one.
        let mut a = self.0.iter();
        let mut b = other.0.iter();
        let (mut na, mut nb) = (a.next(), b.next());
        loop {
            match (na, nb) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    // `self` has a positive exponent on a smaller variable.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            na = a.next();
                            nb = b.next();
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Invariants: no zero coefficient is stored, terms are kept in the canonical
/// order of the key map, and the zero polynomial is the empty map. Values are
/// immutable after construction and safe to share across threads.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(Rat::from_integer(BigInt::from(n)))
    }

    pub fn var(v: VariableId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(v), Rat::one());
        Poly { terms }
    }

    pub fn monomial(coeff: Rat, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    /// The value of a constant polynomial, if it is one.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    /// Greatest term under the degree-lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &VariableId) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Highest derivative order occurring in the polynomial.
    pub fn max_order(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.vars())
            .map(|v| v.order())
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<VariableId> {
        self.terms.keys().flat_map(|m| m.vars().cloned()).collect()
    }

    pub fn contains_var(&self, v: &VariableId) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    fn insert_term(terms: &mut BTreeMap<Monomial, Rat>, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Exact simultaneous substitution. Variables not bound stay as they are;
    /// bindings must not use variables they replace in their own values.
    pub fn substitute(&self, bindings: &BTreeMap<VariableId, Poly>) -> Poly {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut factor = Poly::constant(c.clone());
            for (v, e) in m.powers() {
                let base = match bindings.get(v) {
                    Some(p) => p.pow(e),
                    None => Poly::monomial(Rat::one(), Monomial::from_powers([(v.clone(), e)])),
                };
                factor = &factor * &base;
            }
            out = &out + &factor;
        }
        out
    }

    /// Substitutes a single variable by a polynomial.
    pub fn substitute_var(&self, v: &VariableId, value: &Poly) -> Poly {
        let mut b = BTreeMap::new();
        b.insert(v.clone(), value.clone());
        self.substitute(&b)
    }

    /// Exact partial derivative with respect to `v`.
    pub fn partial_derivative(&self, v: &VariableId) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, e) = m.without(v);
            if e == 0 {
                continue;
            }
            let m2 = if e == 1 {
                rest
            } else {
                rest.mul(&Monomial::from_powers([(v.clone(), e - 1)]))
            };
            Self::insert_term(&mut terms, m2, c * Rat::from_integer(BigInt::from(e)));
        }
        Poly { terms }
    }

    /// Evaluates at a rational point. Returns `None` when a variable of the
    /// polynomial is unbound.
    pub fn eval(&self, point: &BTreeMap<VariableId, Rat>) -> Option<Rat> {
        let mut sum = Rat::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for (v, e) in m.powers() {
                let x = point.get(v)?;
                let mut p = Rat::one();
                for _ in 0..e {
                    p *= x;
                }
                prod *= p;
            }
            sum += prod;
        }
        Some(sum)
    }

    /// Splits the polynomial into a rational content and a primitive part with
    /// coprime integer coefficients and a positive coefficient on the greatest
    /// term. `content * primitive == self`; the zero polynomial yields
    /// `(0, 0)`.
    pub fn canonicalize(&self) -> (Rat, Poly) {
        if self.is_zero() {
            return (Rat::zero(), Poly::zero());
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        let leading = self.leading_term().unwrap().1;
        if (leading / &content).is_negative() {
            content = -content;
        }
        let inv = content.recip();
        (content, self.scale(&inv))
    }

    /// The primitive part alone.
    pub fn primitive(&self) -> Poly {
        self.canonicalize().1
    }

    /// Coefficients of the polynomial viewed as univariate in `v`; index `i`
    /// holds the coefficient of `v^i`.
    pub fn coeffs_in(&self, v: &VariableId) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.without(v);
            out[e as usize] = &out[e as usize] + &Poly::monomial(c.clone(), rest);
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            Poly::insert_term(&mut terms, m.clone(), c.clone());
        }
        Poly { terms }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            Poly::insert_term(&mut terms, m.clone(), -c.clone());
        }
        Poly { terms }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                Poly::insert_term(&mut terms, ma.mul(mb), ca * cb);
            }
        }
        Poly { terms }
    }
}

fn fmt_coeff_abs(c: &Rat) -> String {
    let c = c.abs();
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    /// Canonical text form, greatest term first; parseable by the CLI
    /// expression grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_is_unit = c.abs().is_one();
            if m.is_one() {
                write!(f, "{}", fmt_coeff_abs(c))?;
                continue;
            }
            let mut first_factor = true;
            if !coeff_is_unit {
                write!(f, "{}", fmt_coeff_abs(c))?;
                first_factor = false;
            }
            for (v, e) in m.powers() {
                if !first_factor {
                    write!(f, "*")?;
                }
                first_factor = false;
                if e == 1 {
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Basic factorization: monomial content split, square-free decomposition and
/// full factorization of univariate quadratics. Anything beyond that is
/// returned unfactored.
pub mod factor {
    use super::*;

    /// Factors `p` into `(content, [(factor, multiplicity)...])` with
    /// `content * prod(factor_i^mult_i) == p` exactly. Factors are primitive.
    ///
    /// Guaranteed capability: variable content is split off, the remainder is
    /// square-free decomposed and fully factored when it is univariate of
    /// degree at most two. Multivariate remainders come back whole.
    ///
    /// # Errors
    /// The zero polynomial is rejected.
    pub fn factor_basic(p: &Poly) -> Result<(Rat, Vec<(Poly, u32)>), ZeroFactorization> {
        if p.is_zero() {
            return Err(ZeroFactorization);
        }
        let (content, prim) = p.canonicalize();
        let mut factors: Vec<(Poly, u32)> = Vec::new();

        // (a) split off the variable content: x^k dividing every term.
        let mut rest = prim;
        let common: Vec<(VariableId, u32)> = {
            let mut iter = rest.terms();
            let (first, _) = iter.next().unwrap();
            let mut common: BTreeMap<VariableId, u32> =
                first.powers().map(|(v, e)| (v.clone(), e)).collect();
            for (m, _) in rest.terms().skip(1) {
                common.retain(|v, e| {
                    let e2 = m.exponent(v);
                    if e2 == 0 {
                        return false;
                    }
                    *e = (*e).min(e2);
                    true
                });
            }
            common.into_iter().collect()
        };
        if !common.is_empty() {
            let mut terms = BTreeMap::new();
            for (m, c) in rest.terms() {
                let mut reduced = m.clone();
                for (v, e) in &common {
                    let (r, old) = reduced.without(v);
                    reduced = if old > *e {
                        r.mul(&Monomial::from_powers([(v.clone(), old - e)]))
                    } else {
                        r
                    };
                }
                terms.insert(reduced, c.clone());
            }
            rest = Poly { terms };
            for (v, e) in common {
                factors.push((Poly::var(v), e));
            }
        }

        if rest.is_constant() {
            // Only possible when the primitive part was a pure monomial.
            debug_assert!(rest.as_constant().map(|c| c.is_one()).unwrap_or(false));
            return Ok((content, factors));
        }

        let vars = rest.vars();
        if vars.len() == 1 {
            let v = vars.into_iter().next().unwrap();
            for (f, mult) in univariate_squarefree(&rest, &v) {
                for (g, inner) in univariate_small_factors(&f, &v) {
                    factors.push((g, inner * mult));
                }
            }
        } else {
            factors.push((rest, 1));
        }
        Ok((content, factors))
    }

    /// Error for a zero input to [`factor_basic`].
    #[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
    #[error("cannot factor the zero polynomial")]
    pub struct ZeroFactorization;

    /// Yun's square-free decomposition for a primitive univariate polynomial.
    fn univariate_squarefree(p: &Poly, v: &VariableId) -> Vec<(Poly, u32)> {
        let dp = p.partial_derivative(v);
        if dp.is_zero() {
            return vec![(p.clone(), 1)];
        }
        let g = univariate_gcd(p, &dp, v);
        if g.total_degree() == 0 {
            return vec![(p.clone(), 1)];
        }
        let mut out = Vec::new();
        let mut w = univariate_div_exact(p, &g, v);
        let mut y = univariate_div_exact(&dp, &g, v);
        let mut i = 1u32;
        loop {
            let z = &y - &w.partial_derivative(v);
            if z.is_zero() {
                if w.total_degree() > 0 {
                    out.push((w.primitive(), i));
                }
                break;
            }
            let f = univariate_gcd(&w, &z, v);
            if f.total_degree() > 0 {
                out.push((f.primitive(), i));
            }
            w = univariate_div_exact(&w, &f, v);
            y = univariate_div_exact(&z, &f, v);
            i += 1;
            if w.total_degree() == 0 {
                break;
            }
        }
        if out.is_empty() {
            vec![(p.clone(), 1)]
        } else {
            out
        }
    }

    /// Fully factors a square-free univariate polynomial of degree <= 2;
    /// higher degrees come back whole.
    fn univariate_small_factors(p: &Poly, v: &VariableId) -> Vec<(Poly, u32)> {
        let d = p.degree_in(v);
        if d != 2 {
            return vec![(p.primitive(), 1)];
        }
        let cs = p.coeffs_in(v);
        let a = cs[2].as_constant().unwrap();
        let b = cs[1].as_constant().unwrap();
        let c = cs[0].as_constant().unwrap();
        let disc = &b * &b - Rat::from_integer(BigInt::from(4)) * &a * &c;
        if let Some(s) = rational_sqrt(&disc) {
            let two_a = Rat::from_integer(BigInt::from(2)) * &a;
            let r1 = (-&b + &s) / &two_a;
            let r2 = (-&b - &s) / &two_a;
            let lin = |r: Rat| (&Poly::var(v.clone()) - &Poly::constant(r)).primitive();
            if r1 == r2 {
                vec![(lin(r1), 2)]
            } else {
                vec![(lin(r1), 1), (lin(r2), 1)]
            }
        } else {
            vec![(p.primitive(), 1)]
        }
    }

    /// Exact square root of a nonnegative rational, if it is rational.
    pub fn rational_sqrt(x: &Rat) -> Option<Rat> {
        if x.is_negative() {
            return None;
        }
        let n = x.numer().sqrt();
        let d = x.denom().sqrt();
        if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
            Some(Rat::new(n, d))
        } else {
            None
        }
    }

    /// Euclidean gcd of univariate polynomials over the rationals, returned
    /// primitive.
    fn univariate_gcd(a: &Poly, b: &Poly, v: &VariableId) -> Poly {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let r = univariate_rem(&a, &b, v);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.primitive()
        }
    }

    fn univariate_rem(a: &Poly, b: &Poly, v: &VariableId) -> Poly {
        let db = b.degree_in(v);
        let lb = b.coeffs_in(v)[db as usize].as_constant().unwrap();
        let mut r = a.clone();
        while !r.is_zero() && r.degree_in(v) >= db {
            let dr = r.degree_in(v);
            let lr = r.coeffs_in(v)[dr as usize].as_constant().unwrap();
            let q = Poly::monomial(
                &lr / &lb,
                if dr == db {
                    Monomial::one()
                } else {
                    Monomial::from_powers([(v.clone(), dr - db)])
                },
            );
            r = &r - &(&q * b);
            debug_assert!(r.is_zero() || r.degree_in(v) < dr || dr == 0);
            if dr == 0 {
                break;
            }
        }
        r
    }

    /// Exact division for univariate polynomials (the divisor must divide).
    fn univariate_div_exact(a: &Poly, b: &Poly, v: &VariableId) -> Poly {
        let db = b.degree_in(v);
        let lb = b.coeffs_in(v)[db as usize].as_constant().unwrap();
        let mut r = a.clone();
        let mut q = Poly::zero();
        while !r.is_zero() && r.degree_in(v) >= db {
            let dr = r.degree_in(v);
            let lr = r.coeffs_in(v)[dr as usize].as_constant().unwrap();
            let term = Poly::monomial(
                &lr / &lb,
                if dr == db {
                    Monomial::one()
                } else {
                    Monomial::from_powers([(v.clone(), dr - db)])
                },
            );
            r = &r - &(&term * b);
            q = &q + &term;
        }
        debug_assert!(r.is_zero(), "exact division left a remainder");
        q
    }
}

#[cfg(test)]
mod tests {
    use super::factor::{factor_basic, rational_sqrt};
    use super::*;
    use proptest::prelude::*;

    fn t() -> VariableId {
        VariableId::time()
    }
    fn u(order: u32) -> VariableId {
        VariableId::dependent(0, order, "u")
    }
    fn v(order: u32) -> VariableId {
        VariableId::dependent(1, order, "v")
    }
    fn chi() -> VariableId {
        VariableId::parameter("chi")
    }

    fn pvar(x: VariableId) -> Poly {
        Poly::var(x)
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn variable_order_is_orderly() {
        let mut vars = vec![chi(), u(1), v(0), u(0), t(), v(1)];
        vars.sort();
        assert_eq!(vars, vec![t(), u(0), v(0), u(1), v(1), chi()]);
    }

    #[test]
    fn difference_of_squares() {
        let p = &(&pvar(u(0)) + &Poly::one()) * &(&pvar(u(0)) - &Poly::one());
        let expected = &(&pvar(u(0)) * &pvar(u(0))) - &Poly::one();
        assert_eq!(p, expected);
    }

    #[test]
    fn add_zero_is_identity() {
        let p = &(&pvar(t()) * &pvar(u(1))) - &Poly::from_int(3);
        assert_eq!(&p + &Poly::zero(), p);
    }

    #[test]
    fn lh1_left_hand_side_builds() {
        // t*v*u' - t*u + 1
        let p = &(&(&pvar(t()) * &pvar(v(0))) * &pvar(u(1)))
            - &(&(&pvar(t()) * &pvar(u(0))) - &Poly::one());
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.total_degree(), 3);
        assert_eq!(p.max_order(), 1);
    }

    #[test]
    fn substitute_sphere_at_irregular_point() {
        // u'^2 + u^2 + t^2 - 1 at (t,u,u') = (0,1,0) -> 0
        let p = &(&(&pvar(u(1)) * &pvar(u(1))) + &(&pvar(u(0)) * &pvar(u(0))))
            + &(&(&pvar(t()) * &pvar(t())) - &Poly::one());
        let mut b = BTreeMap::new();
        b.insert(t(), Poly::zero());
        b.insert(u(0), Poly::one());
        b.insert(u(1), Poly::zero());
        assert!(p.substitute(&b).is_zero());
    }

    #[test]
    fn substitute_empty_is_identity() {
        let p = &pvar(u(1)) * &pvar(t());
        assert_eq!(p.substitute(&BTreeMap::new()), p);
    }

    #[test]
    fn substitute_v_zero_matches_guard_atom() {
        // (t*w + v - t)*u' - u at v=0 -> t*(w-1)*u' - u
        let w = VariableId::dependent(2, 0, "w");
        let e = &(&(&(&pvar(t()) * &pvar(w.clone())) + &(&pvar(v(0)) - &pvar(t())))
            * &pvar(u(1)))
            - &pvar(u(0));
        let reduced = e.substitute_var(&v(0), &Poly::zero());
        let expected = &(&(&pvar(t()) * &(&pvar(w) - &Poly::one())) * &pvar(u(1))) - &pvar(u(0));
        assert_eq!(reduced, expected);
    }

    #[test]
    fn derivative_of_sphere() {
        let p = &(&(&pvar(u(1)) * &pvar(u(1))) + &(&pvar(u(0)) * &pvar(u(0))))
            + &(&(&pvar(t()) * &pvar(t())) - &Poly::one());
        assert_eq!(p.partial_derivative(&u(1)), pvar(u(1)).scale(&rat(2, 1)));
        assert_eq!(Poly::from_int(7).partial_derivative(&t()), Poly::zero());
    }

    #[test]
    fn derivative_of_gather() {
        // d/du' (u'^3 + chi*u*u' - t) = 3u'^2 + chi*u
        let p = &(&pvar(u(1)).pow(3) + &(&(&pvar(chi()) * &pvar(u(0))) * &pvar(u(1))))
            - &pvar(t());
        let d = p.partial_derivative(&u(1));
        let expected = &pvar(u(1)).pow(2).scale(&rat(3, 1)) + &(&pvar(chi()) * &pvar(u(0)));
        assert_eq!(d, expected);
    }

    #[test]
    fn canonicalize_basics() {
        let (c, p) = pvar(u(1)).scale(&rat(2, 1)).canonicalize();
        assert_eq!(c, rat(2, 1));
        assert_eq!(p, pvar(u(1)));

        // -3t^2 + 3 -> content -3, primitive t^2 - 1
        let q = &pvar(t()).pow(2).scale(&rat(-3, 1)) + &Poly::from_int(3);
        let (c, p) = q.canonicalize();
        assert_eq!(c, rat(-3, 1));
        assert_eq!(p, &pvar(t()).pow(2) - &Poly::one());

        let (c, p) = Poly::zero().canonicalize();
        assert!(c.is_zero());
        assert!(p.is_zero());
    }

    #[test]
    fn canonicalize_is_idempotent_on_primitive() {
        let q = &pvar(t()).pow(2).scale(&rat(-3, 4)) + &pvar(u(0)).scale(&rat(5, 6));
        let (_, p) = q.canonicalize();
        let (c2, p2) = p.canonicalize();
        assert!(c2.is_one());
        assert_eq!(p2, p);
    }

    #[test]
    fn factor_monomial_split() {
        let p = &pvar(t()) * &pvar(v(0));
        let (c, fs) = factor_basic(&p).unwrap();
        assert!(c.is_one());
        assert_eq!(fs, vec![(pvar(t()), 1), (pvar(v(0)), 1)]);
    }

    #[test]
    fn factor_u_squared_minus_one() {
        let p = &pvar(u(0)).pow(2) - &Poly::one();
        let (_, fs) = factor_basic(&p).unwrap();
        let set: Vec<Poly> = fs.iter().map(|(f, _)| f.clone()).collect();
        assert!(set.contains(&(&pvar(u(0)) - &Poly::one())));
        assert!(set.contains(&(&pvar(u(0)) + &Poly::one())));
    }

    #[test]
    fn factor_irreducible_stays_whole() {
        let p = &(&pvar(u(0)).pow(2) + &pvar(t()).pow(2)) - &Poly::one();
        let (c, fs) = factor_basic(&p).unwrap();
        assert!(c.is_one());
        assert_eq!(fs, vec![(p.clone(), 1)]);
    }

    #[test]
    fn factor_rejects_zero() {
        assert!(factor_basic(&Poly::zero()).is_err());
    }

    #[test]
    fn factor_squarefree_decomposition() {
        // (u-1)^2 * (u+2)
        let f1 = &pvar(u(0)) - &Poly::one();
        let f2 = &pvar(u(0)) + &Poly::from_int(2);
        let p = &f1.pow(2) * &f2;
        let (c, fs) = factor_basic(&p).unwrap();
        let mut rebuilt = Poly::constant(c);
        for (f, m) in &fs {
            rebuilt = &rebuilt * &f.pow(*m);
        }
        assert_eq!(rebuilt, p);
        assert!(fs.contains(&(f1, 2)));
        assert!(fs.contains(&(f2, 1)));
    }

    #[test]
    fn rational_sqrt_exact_only() {
        assert_eq!(rational_sqrt(&rat(16, 25)), Some(rat(4, 5)));
        assert_eq!(rational_sqrt(&rat(2, 1)), None);
        assert_eq!(rational_sqrt(&rat(-4, 1)), None);
    }

    #[test]
    fn display_round_shapes() {
        let p = &(&pvar(t()) * &pvar(u(1)).pow(2)).scale(&rat(-2, 1)) + &Poly::constant(rat(1, 2));
        assert_eq!(p.to_string(), "-2*t*u'^2 + 1/2");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    // Random polynomial strategy: up to 4 terms over {t, u, u', chi},
    // exponents <= 2, small rational coefficients.
    fn arb_poly() -> impl Strategy<Value = Poly> {
        let var = prop_oneof![Just(t()), Just(u(0)), Just(u(1)), Just(chi())];
        let term = (
            -6i64..=6,
            1i64..=3,
            proptest::collection::vec((var, 0u32..=2), 0..3),
        );
        proptest::collection::vec(term, 0..4).prop_map(|terms| {
            let mut p = Poly::zero();
            for (n, d, powers) in terms {
                let m = Monomial::from_powers(powers);
                p = &p + &Poly::monomial(rat(n, d), m);
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_laws(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
            prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert!((&p + &(-&p)).is_zero());
        }

        #[test]
        fn substitution_is_a_homomorphism(p in arb_poly(), q in arb_poly()) {
            let mut b = BTreeMap::new();
            b.insert(u(0), &pvar(t()) + &Poly::one());
            b.insert(u(1), pvar(chi()).scale(&rat(3, 2)));
            prop_assert_eq!(
                (&p * &q).substitute(&b),
                &p.substitute(&b) * &q.substitute(&b)
            );
        }

        #[test]
        fn leibniz_rule(p in arb_poly(), q in arb_poly()) {
            let x = u(1);
            let lhs = (&p * &q).partial_derivative(&x);
            let rhs = &(&p.partial_derivative(&x) * &q) + &(&p * &q.partial_derivative(&x));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn factor_product_reconstructs(p in arb_poly()) {
            prop_assume!(!p.is_zero());
            let (c, fs) = factor_basic(&p).unwrap();
            let mut rebuilt = Poly::constant(c);
            for (f, m) in fs {
                rebuilt = &rebuilt * &f.pow(m);
            }
            prop_assert_eq!(rebuilt, p);
        }

        #[test]
        fn canonicalize_reconstructs(p in arb_poly()) {
            let (c, prim) = p.canonicalize();
            prop_assert_eq!(prim.scale(&c), p);
        }
    }
}
