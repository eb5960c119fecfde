//! Exact multivariate truncated power series with a Laurent variable `z`.
//!
//! Every operation truncates eagerly to the series' [`TruncationPolicy`];
//! binary operations require both operands to carry the same policy.

mod json;
mod monomial;
mod rational;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use json::SeriesTerm;
pub use monomial::{Gen, GeneratorSet, Monomial};
pub use rational::{
    factorial, floor, fmt_rational, frac, int, is_integer, parse_rational, rat, sign_pow, to_i64,
    Rational,
};

/// Degree bounds applied to every stored term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Bound on total degree in the `t` generators.
    pub max_t_degree: u32,
    /// Bound on total degree in the `u` generators.
    pub max_u_degree: u32,
    pub z_min: i32,
    pub z_max: i32,
    pub max_lambda_degree: u32,
    /// Bound on the exponent of each `psi` generator.
    pub max_psi_degree: u32,
}

impl TruncationPolicy {
    /// Policy with `psi` powers bounded by `z_max`.
    pub fn new(max_t_degree: u32, max_u_degree: u32, z_min: i32, z_max: i32, max_lambda_degree: u32) -> Self {
        Self {
            max_t_degree,
            max_u_degree,
            z_min,
            z_max,
            max_lambda_degree,
            max_psi_degree: z_max.max(0) as u32,
        }
    }

    pub fn with_psi_degree(mut self, max_psi_degree: u32) -> Self {
        self.max_psi_degree = max_psi_degree;
        self
    }

    pub fn admits(&self, m: &Monomial) -> bool {
        let z = m.exponent(Gen::Z);
        m.t_degree() <= self.max_t_degree as i32
            && m.u_degree() <= self.max_u_degree as i32
            && m.lambda_degree() <= self.max_lambda_degree as i32
            && m.max_psi_exponent() <= self.max_psi_degree as i32
            && z >= self.z_min
            && z <= self.z_max
            && m.factors().all(|(g, e)| *e > 0 || g.allows_negative())
    }

    /// The same bounds without any restriction on the `z` exponent. Used for
    /// intermediate products whose `z` powers may later cancel.
    fn without_z_bounds(&self) -> Self {
        Self { z_min: i32::MIN / 4, z_max: i32::MAX / 4, ..*self }
    }
}

/// A finite sum of monomials with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    terms: BTreeMap<Monomial, Rational>,
    policy: TruncationPolicy,
}

impl TruncatedSeries {
    pub fn zero(policy: TruncationPolicy) -> Self {
        Self { terms: BTreeMap::new(), policy }
    }

    pub fn one(policy: TruncationPolicy) -> Self {
        Self::constant(Rational::one(), policy)
    }

    pub fn constant(c: Rational, policy: TruncationPolicy) -> Self {
        Self::term(Monomial::one(), c, policy)
    }

    pub fn var(g: Gen, policy: TruncationPolicy) -> Self {
        Self::term(Monomial::var(g), Rational::one(), policy)
    }

    /// A single term, or zero if the monomial lies outside the policy.
    pub fn term(m: Monomial, c: Rational, policy: TruncationPolicy) -> Self {
        let mut s = Self::zero(policy);
        s.add_term(m, c);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I, policy: TruncationPolicy) -> Self {
        let mut s = Self::zero(policy);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (graded lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    /// Adds `c * m` in place, dropping it if outside the policy.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || !self.policy.admits(&m) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_policy(&self, other: &Self) -> Result<()> {
        if self.policy == other.policy {
            Ok(())
        } else {
            Err(Error::IncompatiblePolicy)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_policy(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// In-place addition; panics on incompatible policies.
    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.policy, other.policy, "incompatible truncation policies");
        self.add_assign_unchecked(other);
    }

    fn add_assign_unchecked(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.policy);
        }
        Self {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
            policy: self.policy,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_policy(other)?;
        Ok(self.mul_under(other, &self.policy))
    }

    fn mul_under(&self, other: &Self, policy: &TruncationPolicy) -> Self {
        let mut out = Self::zero(*policy);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Multiplies every term by a monomial.
    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(x, y)| (x.mul(m), y * c)), self.policy)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.policy);
        for _ in 0..n {
            out = out.mul_under(self, &self.policy);
        }
        out
    }

    /// Rebuilds the series under another policy, dropping terms it excludes.
    pub fn retruncate(&self, policy: TruncationPolicy) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c.clone())), policy)
    }

    /// Keeps only the terms matching `pred`.
    pub fn filter(&self, pred: impl Fn(&Monomial) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(m, _)| pred(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
            policy: self.policy,
        }
    }

    /// Terms with non-negative `z` exponent.
    pub fn laurent_truncate_plus(&self) -> Self {
        self.filter(|m| m.exponent(Gen::Z) >= 0)
    }

    /// Terms with strictly negative `z` exponent.
    pub fn laurent_truncate_minus(&self) -> Self {
        self.filter(|m| m.exponent(Gen::Z) < 0)
    }

    /// Coefficient of `g^e`, as a series in the remaining generators.
    pub fn coefficient_of(&self, g: Gen, e: i32) -> Self {
        let mut out = Self::zero(self.policy);
        for (m, c) in &self.terms {
            let (rest, k) = m.split_off(g);
            if k == e {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Formal substitution `g -> value`.
    ///
    /// A negative power of `g` is only allowed when `value` is a single term
    /// whose monomial may be inverted (a pure power of `z`).
    pub fn substitute(&self, g: Gen, value: &TruncatedSeries) -> Result<Self> {
        self.check_policy(value)?;
        let wide = self.policy.without_z_bounds();
        let value_wide = value.retruncate(wide);
        let mut powers: BTreeMap<i32, TruncatedSeries> = BTreeMap::new();
        let mut out = Self::zero(self.policy);
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(g);
            if e == 0 {
                out.add_term(rest, c.clone());
                continue;
            }
            if let std::collections::btree_map::Entry::Vacant(slot) = powers.entry(e) {
                let p = if e > 0 {
                    let mut p = TruncatedSeries::one(wide);
                    for _ in 0..e {
                        p = p.mul_under(&value_wide, &wide);
                    }
                    p
                } else {
                    let inv = value_wide.monomial_inverse().ok_or_else(|| {
                        Error::NonInvertibleSubstitution(g.name())
                    })?;
                    let mut p = TruncatedSeries::one(wide);
                    for _ in 0..(-e) {
                        p = p.mul_under(&inv, &wide);
                    }
                    p
                };
                slot.insert(p);
            }
            for (pm, pc) in &powers[&e].terms {
                out.add_term(rest.mul(pm), c * pc);
            }
        }
        Ok(out)
    }

    fn monomial_inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        if !m.factors().all(|(g, _)| g.allows_negative()) {
            return None;
        }
        Some(Self::term(m.pow(-1), c.recip(), self.policy))
    }

    fn require_zero_constant(&self) -> Result<()> {
        let c = self.constant_term();
        if c.is_zero() {
            Ok(())
        } else {
            Err(Error::NonzeroConstantTerm(fmt_rational(&c)))
        }
    }

    /// Sums `coeffs(m) * s^m` for `m >= 1` until the powers truncate to zero.
    fn power_sum(&self, coeff: impl Fn(u32) -> Rational) -> Self {
        let mut out = Self::zero(self.policy);
        let mut p = self.clone();
        let mut m = 1u32;
        while !p.is_zero() {
            out.add_assign_unchecked(&p.scale(&coeff(m)));
            p = p.mul_under(self, &self.policy);
            m += 1;
        }
        out
    }

    /// `log(1 + s)` for `s` with zero constant term.
    pub fn log1p(&self) -> Result<Self> {
        self.require_zero_constant()?;
        Ok(self.power_sum(|m| sign_pow(m as i64 + 1) * rat(1, m as i64)))
    }

    /// `exp(s)` for `s` with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        self.require_zero_constant()?;
        let mut out = Self::one(self.policy);
        out.add_assign_unchecked(&self.power_sum(|m| Rational::from_integer(factorial(m)).recip()));
        Ok(out)
    }

    /// Multiplicative inverse of a series with invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(Error::NotInvertible);
        }
        let cinv = c.recip();
        // 1/(c + s) = c^{-1} * sum_k (-s/c)^k
        let mut x = self.clone();
        x.add_term(Monomial::one(), -c);
        let x = x.scale(&-cinv.clone());
        let mut out = Self::one(self.policy);
        out.add_assign_unchecked(&x.power_sum(|_| Rational::one()));
        Ok(out.scale(&cinv))
    }

    /// `s^n` for any integer `n` (negative powers require an invertible constant term).
    pub fn powi(&self, n: i64) -> Result<Self> {
        if n >= 0 {
            Ok(self.pow(n as u32))
        } else {
            Ok(self.inverse()?.pow((-n) as u32))
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json::to_json(self)
    }

    pub fn from_json(value: &serde_json::Value, policy: TruncationPolicy) -> Result<Self> {
        json::from_json(value, policy)
    }
}

impl fmt::Display for TruncatedSeries {
    /// Terms in canonical order, highest first; rationals as `num/den`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                if m.is_one() {
                    fmt_rational(c)
                } else if c.is_one() {
                    m.to_string()
                } else {
                    format!("({})*{}", fmt_rational(c), m)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::new(4, 2, -6, 6, 2)
    }

    fn t2() -> TruncatedSeries {
        TruncatedSeries::var(Gen::T(2), pol())
    }

    fn z_pow(e: i32) -> TruncatedSeries {
        TruncatedSeries::term(Monomial::pow_of(Gen::Z, e), int(1), pol())
    }

    #[test]
    fn additive_inverse() {
        let a = TruncatedSeries::one(pol()).add(&t2()).unwrap();
        let b = TruncatedSeries::constant(int(-1), pol());
        assert_eq!(a.add(&b).unwrap(), t2());
    }

    #[test]
    fn zero_is_additive_identity() {
        let s = t2().add(&z_pow(-2)).unwrap();
        assert_eq!(TruncatedSeries::zero(pol()).add(&s).unwrap(), s);
    }

    #[test]
    fn exact_rational_addition() {
        let a = t2().scale(&rat(1, 2));
        let b = t2().scale(&rat(1, 3));
        assert_eq!(a.add(&b).unwrap(), t2().scale(&rat(5, 6)));
    }

    #[test]
    fn difference_of_squares() {
        let one = TruncatedSeries::one(pol());
        let a = one.add(&t2()).unwrap();
        let b = one.sub(&t2()).unwrap();
        let expected = one.sub(&t2().mul(&t2()).unwrap()).unwrap();
        assert_eq!(a.mul(&b).unwrap(), expected);
    }

    #[test]
    fn laurent_cancellation() {
        assert_eq!(z_pow(-1).mul(&z_pow(1)).unwrap(), TruncatedSeries::one(pol()));
    }

    #[test]
    fn truncation_discards_products() {
        let p = TruncationPolicy::new(1, 0, 0, 0, 0);
        let t = TruncatedSeries::var(Gen::T(2), p);
        assert!(t.mul(&t).unwrap().is_zero());
    }

    #[test]
    fn incompatible_policies_are_rejected() {
        let other = TruncatedSeries::var(Gen::T(2), TruncationPolicy::new(1, 0, 0, 0, 0));
        assert_eq!(t2().add(&other), Err(Error::IncompatiblePolicy));
        assert_eq!(t2().mul(&other), Err(Error::IncompatiblePolicy));
    }

    #[test]
    fn plus_minus_split() {
        let s = z_pow(-1).add(&TruncatedSeries::constant(int(3), pol())).unwrap().add(&z_pow(1).scale(&int(2))).unwrap();
        let plus = s.laurent_truncate_plus();
        assert_eq!(plus, TruncatedSeries::constant(int(3), pol()).add(&z_pow(1).scale(&int(2))).unwrap());
        assert!(z_pow(-1).laurent_truncate_plus().is_zero());
        assert_eq!(plus.add(&s.laurent_truncate_minus()).unwrap(), s);
    }

    #[test]
    fn substitute_z_to_minus_z() {
        let minus_z = z_pow(1).neg();
        let s = z_pow(1).add(&z_pow(2)).unwrap();
        let expected = z_pow(1).neg().add(&z_pow(2)).unwrap();
        assert_eq!(s.substitute(Gen::Z, &minus_z).unwrap(), expected);
        assert_eq!(z_pow(-1).substitute(Gen::Z, &minus_z).unwrap(), z_pow(-1).neg());
    }

    #[test]
    fn substitute_rejects_non_invertible_values() {
        let value = z_pow(1).add(&t2()).unwrap();
        assert!(matches!(
            z_pow(-1).substitute(Gen::Z, &value),
            Err(Error::NonInvertibleSubstitution(_))
        ));
        // A non-negative power is fine.
        assert!(z_pow(2).substitute(Gen::Z, &value).is_ok());
    }

    #[test]
    fn substitute_keeps_cancelling_z_powers() {
        // (z^3)^4 = z^12 exceeds z_max, but the z^-6 factor brings it back to z^6.
        let s = TruncatedSeries::term(Monomial::from_pairs([(Gen::Z, -6), (Gen::T(2), 4)]), int(1), pol());
        let out = s.substitute(Gen::T(2), &z_pow(3)).unwrap();
        assert_eq!(out, z_pow(6));
    }

    #[test]
    fn log1p_textbook() {
        assert!(TruncatedSeries::zero(pol()).log1p().unwrap().is_zero());
        let l = t2().log1p().unwrap();
        let m = |e| Monomial::pow_of(Gen::T(2), e);
        assert_eq!(l.coeff(&m(1)), int(1));
        assert_eq!(l.coeff(&m(2)), rat(-1, 2));
        assert_eq!(l.coeff(&m(3)), rat(1, 3));
        assert_eq!(l.coeff(&m(4)), rat(-1, 4));
        assert_eq!(l.len(), 4);
        assert!(matches!(TruncatedSeries::one(pol()).log1p(), Err(Error::NonzeroConstantTerm(_))));
    }

    #[test]
    fn inverse_and_negative_powers() {
        let one = TruncatedSeries::one(pol());
        let a = one.add(&t2().scale(&int(3))).unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), one);
        assert_eq!(a.powi(-2).unwrap().mul(&a.pow(2)).unwrap(), one);
        assert_eq!(t2().inverse(), Err(Error::NotInvertible));
    }
}
