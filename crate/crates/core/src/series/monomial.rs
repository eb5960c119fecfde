use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A series generator.
///
/// The derived order (`t` before `u` before `z` before `lambda` before `psi`,
/// then by index) is the fixed enumeration used for canonical term order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    /// `t_b`, coefficient of the light insertion `phi_b`.
    T(u8),
    /// `u_{c,b}`, coefficient of the heavy insertion `psi^c phi_b`.
    U(u8, u8),
    /// The equivariant (Laurent) parameter.
    Z,
    /// Twisting parameter `lambda_alpha` (1-based).
    Lambda(u8),
    /// A cotangent-line class at a numbered marking.
    Psi(u8),
}

impl Gen {
    pub fn name(&self) -> String {
        match self {
            Gen::T(b) => format!("t{b}"),
            Gen::U(c, b) => format!("u{c}_{b}"),
            Gen::Z => "z".to_string(),
            Gen::Lambda(a) => format!("lambda{a}"),
            Gen::Psi(i) => format!("psi{i}"),
        }
    }

    pub fn parse(s: &str) -> Result<Gen> {
        let bad = || Error::Parse(format!("unknown generator `{s}`"));
        let num = |x: &str| x.parse::<u8>().map_err(|_| bad());
        if s == "z" {
            Ok(Gen::Z)
        } else if let Some(rest) = s.strip_prefix("lambda") {
            Ok(Gen::Lambda(num(rest)?))
        } else if let Some(rest) = s.strip_prefix("psi") {
            Ok(Gen::Psi(num(rest)?))
        } else if let Some(rest) = s.strip_prefix('t') {
            Ok(Gen::T(num(rest)?))
        } else if let Some(rest) = s.strip_prefix('u') {
            let (c, b) = rest.split_once('_').ok_or_else(bad)?;
            Ok(Gen::U(num(c)?, num(b)?))
        } else {
            Err(bad())
        }
    }

    /// Only `z` may carry a negative exponent.
    pub fn allows_negative(&self) -> bool {
        matches!(self, Gen::Z)
    }
}

/// The declared generator set of a computation session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    pub r: u8,
    pub max_psi_power: u8,
    pub lambdas: u8,
    pub psi_markings: u8,
}

impl GeneratorSet {
    pub fn new(r: u8, max_psi_power: u8, lambdas: u8, psi_markings: u8) -> Self {
        Self { r, max_psi_power, lambdas, psi_markings }
    }

    pub fn contains(&self, g: Gen) -> bool {
        match g {
            Gen::T(b) => (1..=self.r).contains(&b),
            Gen::U(c, b) => c <= self.max_psi_power && (1..=self.r).contains(&b),
            Gen::Z => true,
            Gen::Lambda(a) => (1..=self.lambdas).contains(&a),
            Gen::Psi(i) => i < self.psi_markings,
        }
    }

    /// Every generator in canonical order.
    pub fn generators(&self) -> Vec<Gen> {
        let mut out: Vec<Gen> = (1..=self.r).map(Gen::T).collect();
        for c in 0..=self.max_psi_power {
            out.extend((1..=self.r).map(|b| Gen::U(c, b)));
        }
        out.push(Gen::Z);
        out.extend((1..=self.lambdas).map(Gen::Lambda));
        out.extend((0..self.psi_markings).map(Gen::Psi));
        out
    }
}

/// A product of generator powers. Zero exponents are never stored and the
/// factors are kept sorted by generator.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(SmallVec<[(Gen, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(g: Gen) -> Self {
        Self::pow_of(g, 1)
    }

    pub fn pow_of(g: Gen, e: i32) -> Self {
        let mut v = SmallVec::new();
        if e != 0 {
            v.push((g, e));
        }
        Monomial(v)
    }

    pub fn from_pairs<I: IntoIterator<Item = (Gen, i32)>>(pairs: I) -> Self {
        let mut m = Monomial::one();
        for (g, e) in pairs {
            m = m.mul(&Monomial::pow_of(g, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = &(Gen, i32)> {
        self.0.iter()
    }

    pub fn exponent(&self, g: Gen) -> i32 {
        self.0.iter().find(|(h, _)| *h == g).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, n: i32) -> Monomial {
        if n == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(g, e)| (g, e * n)).collect())
    }

    /// Removes `g` and returns its exponent.
    pub fn split_off(&self, g: Gen) -> (Monomial, i32) {
        let e = self.exponent(g);
        (Monomial(self.0.iter().copied().filter(|(h, _)| *h != g).collect()), e)
    }

    pub fn t_degree(&self) -> i32 {
        self.class_degree(|g| matches!(g, Gen::T(_)))
    }

    pub fn u_degree(&self) -> i32 {
        self.class_degree(|g| matches!(g, Gen::U(..)))
    }

    pub fn lambda_degree(&self) -> i32 {
        self.class_degree(|g| matches!(g, Gen::Lambda(_)))
    }

    pub fn max_psi_exponent(&self) -> i32 {
        self.0
            .iter()
            .filter(|(g, _)| matches!(g, Gen::Psi(_)))
            .map(|(_, e)| *e)
            .max()
            .unwrap_or(0)
    }

    fn class_degree(&self, pred: impl Fn(&Gen) -> bool) -> i32 {
        self.0.iter().filter(|(g, _)| pred(g)).map(|(_, e)| e).sum()
    }

    pub fn total_degree(&self) -> i32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Monomial of exponents restricted to the generators matching `pred`.
    pub fn restrict(&self, pred: impl Fn(&Gen) -> bool) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(g, _)| pred(g)).collect())
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then the exponent of the
    /// earliest generator where the two differ (larger exponent is larger).
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            let (ga, ea) = match a.get(i) {
                Some(&(g, e)) => (Some(g), e),
                None => (None, 0),
            };
            let (gb, eb) = match b.get(j) {
                Some(&(g, e)) => (Some(g), e),
                None => (None, 0),
            };
            let (lhs, rhs) = match (ga, gb) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => {
                    i += 1;
                    (ea, 0)
                }
                (None, Some(_)) => {
                    j += 1;
                    (0, eb)
                }
                (Some(x), Some(y)) => match x.cmp(&y) {
                    Ordering::Less => {
                        i += 1;
                        (ea, 0)
                    }
                    Ordering::Greater => {
                        j += 1;
                        (0, eb)
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (ea, eb)
                    }
                },
            };
            match lhs.cmp(&rhs) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(g, e)| if *e == 1 { g.name() } else { format!("{}^{}", g.name(), e) })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}
