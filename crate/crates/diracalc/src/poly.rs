//! Sparse multivariate polynomials over ℚ(i) in canonical graded-lex form.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is
//! graded-lexicographic, so structural equality is canonical equality and
//! display order is deterministic.

use crate::error::{Error, Result};
use crate::scalar::{FieldMode, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector of fixed length `n`, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise quotient when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in `n` variables; no zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Polynomial::constant(n, Scalar::one())
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::constant(n), c);
        }
        Polynomial { n, terms }
    }

    /// The coordinate polynomial `x_{i+1}` (zero-based index).
    pub fn var(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(n, i), Scalar::one());
        Polynomial { n, terms }
    }

    pub fn from_terms(n: usize, it: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = Polynomial::zero(n);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn var_count(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn constant_value(&self) -> Scalar {
        self.terms
            .get(&Monomial::constant(self.n))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Leading (graded-lex greatest) term, if any.
    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = &*e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_arity(&self, other: &Polynomial) -> Result<()> {
        if self.n != other.n {
            return Err(Error::VarCountMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut out = Polynomial::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.n);
        }
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one(self.n);
        for _ in 0..e {
            out = out.mul(self).expect("same arity");
        }
        out
    }

    /// Formal partial derivative with respect to `x_{i+1}` (zero-based `i`).
    pub fn partial(&self, i: usize) -> Result<Polynomial> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i + 1,
                dim: self.n,
            });
        }
        let mut out = Polynomial::zero(self.n);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut em = m.clone();
            em.0[i] = e - 1;
            out.add_term(em, c * &Scalar::from_int(e as i64));
        }
        Ok(out)
    }

    /// Exact composition: replaces `x_{i+1}` by `assignment[i]` where present.
    pub fn substitute(&self, assignment: &BTreeMap<usize, Polynomial>) -> Result<Polynomial> {
        for p in assignment.values() {
            self.check_arity(p)?;
        }
        let mut out = Polynomial::zero(self.n);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(self.n, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = match assignment.get(&i) {
                    Some(p) => p.pow(e),
                    None => Polynomial::from_terms(
                        self.n,
                        [(
                            {
                                let mut em = Monomial::constant(self.n);
                                em.0[i] = e;
                                em
                            },
                            Scalar::one(),
                        )],
                    ),
                };
                term = term.mul(&base)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Exact evaluation at a point.
    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar> {
        if point.len() != self.n {
            return Err(Error::VarCountMismatch(self.n, point.len()));
        }
        let mut total = Scalar::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    v = &v * &point[i];
                }
            }
            total = &total + &v;
        }
        Ok(total)
    }

    pub fn conj(&self) -> Polynomial {
        Polynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.conj()))
                .collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    pub fn check_mode(&self, mode: FieldMode) -> Result<()> {
        for c in self.terms.values() {
            c.check_mode(mode)?;
        }
        Ok(())
    }

    /// Re-index variables into a space of `new_n` variables; `var_map[i]`
    /// gives the target index of `x_{i+1}`, and must be `Some` wherever the
    /// polynomial actually uses the variable.
    pub fn map_vars(&self, new_n: usize, var_map: &[Option<usize>]) -> Result<Polynomial> {
        assert_eq!(var_map.len(), self.n);
        let mut out = Polynomial::zero(new_n);
        for (m, c) in &self.terms {
            let mut em = Monomial::constant(new_n);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match var_map[i] {
                    Some(j) => em.0[j] += e,
                    None => {
                        return Err(Error::IndexOutOfRange {
                            index: i + 1,
                            dim: new_n,
                        })
                    }
                }
            }
            out.add_term(em, c.clone());
        }
        Ok(out)
    }

    /// Exact polynomial quotient; panics if the division is not exact.
    /// Used only where exactness is guaranteed (fraction-free elimination).
    pub fn exact_div(&self, divisor: &Polynomial) -> Polynomial {
        assert!(!divisor.is_zero(), "exact_div by zero polynomial");
        let mut rem = self.clone();
        let mut quot = Polynomial::zero(self.n);
        let (dm, dc) = {
            let (m, c) = divisor.leading().unwrap();
            (m.clone(), c.clone())
        };
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            let qm = rm
                .div(&dm)
                .expect("inexact polynomial division in fraction-free elimination");
            let qc = rc.div(&dc).expect("nonzero divisor");
            let t = Polynomial::from_terms(self.n, [(qm, qc)]);
            quot = quot.add(&t).unwrap();
            rem = rem.sub(&t.mul(divisor).unwrap()).unwrap();
        }
        quot
    }

    /// All rational components of all coefficients (re then im parts).
    pub fn rational_components(&self) -> impl Iterator<Item = &BigRational> {
        self.terms
            .values()
            .flat_map(|c| [&c.re, &c.im].into_iter())
    }
}

// ---------------------------------------------------------------------------
// Multivariate gcd (primitive pseudo-remainder sequence)
// ---------------------------------------------------------------------------

impl Polynomial {
    fn max_var(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|m| {
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, _)| i)
            })
            .max()
    }

    /// Coefficients of `self` as a univariate polynomial in `x_{var+1}`,
    /// lowest degree first; coefficients still live in the full ring but do
    /// not use the main variable.
    fn univariate_in(&self, var: usize) -> Vec<Polynomial> {
        let deg = self
            .terms
            .keys()
            .map(|m| m.0[var])
            .max()
            .unwrap_or(0) as usize;
        let mut coeffs = vec![Polynomial::zero(self.n); deg + 1];
        for (m, c) in &self.terms {
            let k = m.0[var] as usize;
            let mut em = m.clone();
            em.0[var] = 0;
            coeffs[k].add_term(em, c.clone());
        }
        coeffs
    }

    fn from_univariate(n: usize, var: usize, coeffs: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::zero(n);
        for (k, c) in coeffs.iter().enumerate() {
            for (m, s) in &c.terms {
                let mut em = m.clone();
                em.0[var] += k as u32;
                out.add_term(em, s.clone());
            }
        }
        out
    }

    /// Unit-normalized: integer content removed, leading coefficient
    /// sign-positive. Every associate maps to the same polynomial.
    pub fn unit_normal(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let content = rational_content(self.rational_components());
        let mut p = self.scale(&Scalar::from_rational(content.recip()));
        if !p.leading().unwrap().1.is_sign_positive() {
            p = p.neg();
        }
        p
    }
}

fn uni_degree(u: &[Polynomial]) -> Option<usize> {
    u.iter().rposition(|c| !c.is_zero())
}

/// Pseudo-remainder of `u` by `v` as univariate polynomials with ring
/// coefficients, primitive-PRS style (we re-normalize after each step, so
/// the extra leading-coefficient factors are harmless).
fn uni_prem(u: &[Polynomial], v: &[Polynomial]) -> Vec<Polynomial> {
    let dv = uni_degree(v).expect("pseudo-division by zero");
    let lv = v[dv].clone();
    let mut r = u.to_vec();
    while let Some(dr) = uni_degree(&r) {
        if dr < dv {
            break;
        }
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c = c.mul(&lv).unwrap();
        }
        for j in 0..=dv {
            let t = lr.mul(&v[j]).unwrap();
            r[dr - dv + j] = r[dr - dv + j].sub(&t).unwrap();
        }
        debug_assert!(r[dr].is_zero());
    }
    r
}

/// Gcd of two polynomials, unit-normalized; `gcd(0, b) = b` up to unit.
/// Primitive pseudo-remainder sequence, recursing on the coefficient ring.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.unit_normal();
    }
    if b.is_zero() {
        return a.unit_normal();
    }
    let var = match a.max_var().into_iter().chain(b.max_var()).max() {
        Some(v) => v,
        None => return Polynomial::one(a.n).unit_normal(),
    };
    let gcd_fold = |coeffs: &[Polynomial]| -> Polynomial {
        coeffs
            .iter()
            .fold(Polynomial::zero(a.n), |g, c| poly_gcd(&g, c))
    };
    let primitive = |u: &[Polynomial]| -> (Vec<Polynomial>, Polynomial) {
        let content = gcd_fold(u);
        let parts = u
            .iter()
            .map(|c| {
                if c.is_zero() {
                    c.clone()
                } else {
                    c.exact_div(&content)
                }
            })
            .collect();
        (parts, content)
    };
    let ua = a.univariate_in(var);
    let ub = b.univariate_in(var);
    let (mut u, ca) = primitive(&ua);
    let (mut v, cb) = primitive(&ub);
    if uni_degree(&u) < uni_degree(&v) {
        std::mem::swap(&mut u, &mut v);
    }
    while uni_degree(&v).is_some() {
        let r = uni_prem(&u, &v);
        u = v;
        v = if uni_degree(&r).is_some() {
            primitive(&r).0
        } else {
            r
        };
    }
    let content_gcd = poly_gcd(&ca, &cb);
    Polynomial::from_univariate(a.n, var, &u)
        .mul(&content_gcd)
        .unwrap()
        .unit_normal()
}

/// gcd-of-numerators over lcm-of-denominators for a set of rationals;
/// zero when the set is all-zero.
pub fn rational_content<'a>(it: impl Iterator<Item = &'a BigRational>) -> BigRational {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for q in it {
        if q.is_zero() {
            continue;
        }
        num_gcd = num_gcd.gcd(q.numer());
        den_lcm = den_lcm.lcm(q.denom());
    }
    if num_gcd.is_zero() {
        BigRational::zero()
    } else {
        BigRational::new(num_gcd, den_lcm)
    }
}

// ---------------------------------------------------------------------------
// Text grammar
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
    mode: FieldMode,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected integer literal");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    /// rational literal `a` or `a/b`, `i`, or `xK`; each optionally `^e`.
    fn factor(&mut self) -> Result<Polynomial> {
        let base = match self.peek() {
            Some(b'i') => {
                self.bump();
                if self.mode == FieldMode::Rational {
                    return Err(Error::RationalModeViolation);
                }
                Polynomial::constant(self.n, Scalar::i())
            }
            Some(b'x') => {
                self.bump();
                let idx = self.integer()?;
                let idx: usize = match idx.try_into() {
                    Ok(v) => v,
                    Err(_) => return self.err("variable index too large"),
                };
                if idx == 0 || idx > self.n {
                    return Err(Error::IndexOutOfRange {
                        index: idx,
                        dim: self.n,
                    });
                }
                Polynomial::var(self.n, idx - 1)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.integer()?;
                let den = if self.peek() == Some(b'/') {
                    self.bump();
                    let d = self.integer()?;
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    d
                } else {
                    BigInt::one()
                };
                Polynomial::constant(self.n, Scalar::from_rational(BigRational::new(num, den)))
            }
            _ => return self.err("expected coefficient, 'i', or variable"),
        };
        if self.peek() == Some(b'^') {
            self.bump();
            let e = self.integer()?;
            let e: u32 = match e.try_into() {
                Ok(v) => v,
                Err(_) => return self.err("exponent too large"),
            };
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut p = self.factor()?;
        while self.peek() == Some(b'*') {
            self.bump();
            p = p.mul(&self.factor()?)?;
        }
        Ok(p)
    }

    fn expression(&mut self) -> Result<Polynomial> {
        let mut negate = false;
        match self.peek() {
            Some(b'-') => {
                self.bump();
                negate = true;
            }
            Some(b'+') => {
                self.bump();
            }
            _ => {}
        }
        let mut p = self.term()?;
        if negate {
            p = p.neg();
        }
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    p = p.add(&self.term()?)?;
                }
                Some(b'-') => {
                    self.bump();
                    p = p.sub(&self.term()?)?;
                }
                Some(_) => return self.err("unexpected character"),
                None => return Ok(p),
            }
        }
    }
}

impl Polynomial {
    /// Parses the polynomial text grammar: signed rational coefficients `a`
    /// or `a/b`, imaginary unit `i` (Gaussian mode only), variables
    /// `x1..xn`, operators `+ - * ^`, explicit `*` between factors.
    /// `"0"` parses to the zero polynomial.
    pub fn parse(src: &str, n: usize, mode: FieldMode) -> Result<Polynomial> {
        let mut parser = Parser {
            src: src.as_bytes(),
            pos: 0,
            n,
            mode,
        };
        let p = parser.expression()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return parser.err("trailing input");
        }
        Ok(p)
    }
}

fn fmt_coeff_and_mono(
    f: &mut fmt::Formatter<'_>,
    q: &BigRational,
    imaginary: bool,
    m: &Monomial,
    first: bool,
) -> fmt::Result {
    let mag = q.abs();
    if q.is_negative() {
        write!(f, "{}", if first { "-" } else { " - " })?;
    } else if !first {
        write!(f, " + ")?;
    }
    let const_mono = m.degree() == 0;
    let mut lead = true;
    if !mag.is_one() || (const_mono && !imaginary) {
        if mag.denom().is_one() {
            write!(f, "{}", mag.numer())?;
        } else {
            write!(f, "{}/{}", mag.numer(), mag.denom())?;
        }
        lead = false;
    }
    if imaginary {
        if !lead {
            write!(f, "*")?;
        }
        write!(f, "i")?;
        lead = false;
    }
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !lead {
            write!(f, "*")?;
        }
        write!(f, "x{}", i + 1)?;
        if e > 1 {
            write!(f, "^{}", e)?;
        }
        lead = false;
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    /// Canonical form in the input grammar: descending graded-lex, the real
    /// part of each coefficient before the imaginary part. Round-trips
    /// through [`Polynomial::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !c.re.is_zero() {
                fmt_coeff_and_mono(f, &c.re, false, m, first)?;
                first = false;
            }
            if !c.im.is_zero() {
                fmt_coeff_and_mono(f, &c.im, true, m, first)?;
                first = false;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n, FieldMode::Rational).unwrap()
    }

    #[test]
    fn ring_identities() {
        let a = p("x1+1", 3);
        let b = p("x1-1", 3);
        assert_eq!(a.mul(&b).unwrap(), p("x1^2-1", 3));
        assert_eq!(a.add(&Polynomial::zero(3)).unwrap(), a);
    }

    #[test]
    fn product_checked_at_random_points() {
        // (2/3·x1x2) * (3·x2) = 2·x1x2²; oracle: evaluate both sides at
        // 20 random rational points.
        use rand::{Rng, SeedableRng};
        let lhs_a = p("2/3*x1*x2", 2);
        let lhs_b = p("3*x2", 2);
        let product = lhs_a.mul(&lhs_b).unwrap();
        assert_eq!(product, p("2*x1*x2^2", 2));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pt: Vec<Scalar> = (0..2)
                .map(|_| Scalar::from_ratio(rng.gen_range(-50..50), rng.gen_range(1..9)))
                .collect();
            let lhs = &lhs_a.eval(&pt).unwrap() * &lhs_b.eval(&pt).unwrap();
            assert_eq!(lhs, product.eval(&pt).unwrap());
        }
    }

    #[test]
    fn partial_derivatives() {
        assert_eq!(p("x1^2*x3", 3).partial(0).unwrap(), p("2*x1*x3", 3));
        assert_eq!(p("5", 3).partial(1).unwrap(), Polynomial::zero(3));
        assert_eq!(
            p("x1*x2+x2^3", 3).partial(1).unwrap(),
            p("x1+3*x2^2", 3)
        );
        assert!(p("x1", 3).partial(3).is_err());
    }

    #[test]
    fn partial_matches_difference_quotient() {
        // Finite-difference oracle with a formal step: ∂p/∂x2 equals the
        // exact symbolic quotient (p(x2+h) − p(x2)) / h with h a fresh
        // variable, evaluated at h = 0.
        let n = 3; // x1, x2, h
        let q = p("x1*x2+x2^3", n);
        let shifted = q
            .substitute(&BTreeMap::from([(1usize, p("x2+x3", n))]))
            .unwrap();
        let quotient = shifted.sub(&q).unwrap().exact_div(&p("x3", n));
        let at_zero = quotient
            .substitute(&BTreeMap::from([(2usize, Polynomial::zero(n))]))
            .unwrap();
        assert_eq!(at_zero, q.partial(1).unwrap());
    }

    #[test]
    fn substitution() {
        let q = p("x1*x4", 4);
        let r = q
            .substitute(&BTreeMap::from([(3usize, Polynomial::zero(4))]))
            .unwrap();
        assert!(r.is_zero());

        let graph = p("x3-x1^2", 3);
        let r = graph
            .substitute(&BTreeMap::from([(2usize, p("x1^2", 3))]))
            .unwrap();
        assert!(r.is_zero());

        let square = p("x1+x2", 2).pow(2);
        let r = square
            .substitute(&BTreeMap::from([(1usize, p("x1", 2))]))
            .unwrap();
        assert_eq!(r, p("4*x1^2", 2));
    }

    #[test]
    fn substitute_then_evaluate_commutes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let q = p("x1^2*x2 - 3*x2*x3 + 1/2*x1", 3);
        let sub = BTreeMap::from([(0usize, p("x2+x3^2", 3)), (2usize, p("2*x1-x2", 3))]);
        let composed = q.substitute(&sub).unwrap();
        for _ in 0..12 {
            let pt: Vec<Scalar> = (0..3)
                .map(|_| Scalar::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=3)))
                .collect();
            let mut moved = pt.clone();
            for (&i, g) in &sub {
                moved[i] = g.eval(&pt).unwrap();
            }
            assert_eq!(q.eval(&moved).unwrap(), composed.eval(&pt).unwrap());
        }
    }

    #[test]
    fn display_round_trip() {
        let q = Polynomial::parse("x1^2*x3 - 2/3*x2 + i*x1", 3, FieldMode::Gaussian).unwrap();
        let text = q.to_string();
        let back = Polynomial::parse(&text, 3, FieldMode::Gaussian).unwrap();
        assert_eq!(q, back);
        assert!(Polynomial::parse("i*x1", 2, FieldMode::Rational).is_err());
        assert!(Polynomial::parse("x1 x2", 2, FieldMode::Rational).is_err());
    }

    #[test]
    fn exact_division() {
        let a = p("x1^2-x2^2", 2);
        let b = p("x1-x2", 2);
        assert_eq!(a.exact_div(&b), p("x1+x2", 2));
    }
}
