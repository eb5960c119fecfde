//! Abstract correlator algebra for the infinity theory.
//!
//! A [`CorrelatorSymbol`] is an opaque generator `<psi^c1 phi_a1, ...>_{g,m}`;
//! no relation between distinct symbols is ever assumed. Generating functions
//! are [`CorrelatorExpr`]s, finite linear combinations of symbols with series
//! coefficients.

mod dilaton;
mod expand;
mod wallcross;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_state, ModelSpec, StateKind};
use crate::series::{Monomial, Rational, TruncatedSeries, TruncationPolicy};

pub use dilaton::{check_dilaton_invariance, dilaton_reduce, DilatonCheckOptions};
pub use expand::{
    add_insertions, expand_f_infinity, expand_f_zero_many, expand_f_zero_via_wallcrossing, expand_light_partitions,
    expand_with_fixed, expand_with_fixed_many, expand_zero_correlator, generic_u, mu_plus_insertions, InsertionSeries, LightSetup,
};
pub use wallcross::{check_wallcrossing_identity, compare_exprs, WallCrossOptions};

/// One insertion `psi^c phi_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InsertionSymbol {
    pub psi: u32,
    pub state: u32,
}

impl InsertionSymbol {
    pub fn new(psi: u32, state: u32) -> Self {
        Self { psi, state }
    }

    pub fn primary(state: u32) -> Self {
        Self { psi: 0, state }
    }
}

impl fmt::Display for InsertionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.psi {
            0 => write!(f, "phi{}", self.state),
            1 => write!(f, "psi*phi{}", self.state),
            c => write!(f, "psi^{}*phi{}", c, self.state),
        }
    }
}

/// `2g - 2 + m > 0`.
pub fn is_stable(genus: u32, m: usize) -> bool {
    2 * genus as i64 - 2 + m as i64 > 0
}

/// A correlator in canonical form: insertions sorted by `(psi, state)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CorrelatorSymbol {
    genus: u32,
    insertions: Vec<InsertionSymbol>,
}

impl CorrelatorSymbol {
    /// The canonical symbol, or `None` when its moduli space is empty.
    pub fn new(genus: u32, mut insertions: Vec<InsertionSymbol>) -> Option<Self> {
        if !is_stable(genus, insertions.len()) {
            return None;
        }
        insertions.sort_unstable();
        Some(Self { genus, insertions })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn insertions(&self) -> &[InsertionSymbol] {
        &self.insertions
    }

    pub fn m(&self) -> usize {
        self.insertions.len()
    }

    pub fn max_psi(&self) -> u32 {
        self.insertions.iter().map(|i| i.psi).max().unwrap_or(0)
    }

    /// Whether every insertion is a narrow state.
    pub fn is_narrow(&self, model: &ModelSpec) -> bool {
        self.insertions.iter().all(|i| classify_state(model, i.state) == StateKind::Narrow)
    }
}

impl fmt::Display for CorrelatorSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.insertions.iter().map(|i| i.to_string()).collect();
        write!(f, "<{}>_{{{},{}}}", parts.join(", "), self.genus, self.m())
    }
}

/// A finite linear combination of correlator symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelatorExpr {
    terms: BTreeMap<CorrelatorSymbol, TruncatedSeries>,
    policy: TruncationPolicy,
}

impl CorrelatorExpr {
    pub fn zero(policy: TruncationPolicy) -> Self {
        Self { terms: BTreeMap::new(), policy }
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CorrelatorSymbol, &TruncatedSeries)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, symbol: &CorrelatorSymbol) -> TruncatedSeries {
        self.terms.get(symbol).cloned().unwrap_or_else(|| TruncatedSeries::zero(self.policy))
    }

    /// Adds `coeff * symbol`; panics on a foreign policy.
    pub fn add_term(&mut self, symbol: CorrelatorSymbol, coeff: &TruncatedSeries) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(symbol) {
            Entry::Vacant(v) => {
                assert_eq!(coeff.policy(), &self.policy, "incompatible truncation policies");
                v.insert(coeff.clone());
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign(coeff);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Adds `c * m` to the coefficient of `symbol`.
    pub fn add_monomial(&mut self, symbol: CorrelatorSymbol, m: Monomial, c: Rational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(symbol) {
            Entry::Vacant(v) => {
                let s = TruncatedSeries::term(m, c, self.policy);
                if !s.is_zero() {
                    v.insert(s);
                }
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_term(m, c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Adds `c * symbol` for a scalar `c`.
    pub fn add_scalar(&mut self, symbol: CorrelatorSymbol, c: &Rational) {
        let s = TruncatedSeries::constant(c.clone(), self.policy);
        self.add_term(symbol, &s);
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.policy != other.policy {
            return Err(Error::IncompatiblePolicy);
        }
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c);
        }
        Ok(out)
    }

    /// Adds `other` in place, consuming it.
    pub fn absorb(&mut self, other: Self) -> Result<()> {
        if self.policy != other.policy {
            return Err(Error::IncompatiblePolicy);
        }
        if self.terms.is_empty() {
            self.terms = other.terms;
        } else {
            for (s, c) in other.terms {
                self.add_term(s, &c);
            }
        }
        Ok(())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.policy);
        for (s, x) in &self.terms {
            out.add_term(s.clone(), &x.scale(c));
        }
        out
    }

    /// Multiplies every coefficient by a series.
    pub fn mul_series(&self, s: &TruncatedSeries) -> Result<Self> {
        let mut out = Self::zero(self.policy);
        for (sym, x) in &self.terms {
            out.add_term(sym.clone(), &x.mul(s)?);
        }
        Ok(out)
    }

    /// Keeps the symbols matching `pred`.
    pub fn filter_symbols(&self, pred: impl Fn(&CorrelatorSymbol) -> bool) -> Self {
        Self {
            terms: self.terms.iter().filter(|(s, _)| pred(s)).map(|(s, c)| (s.clone(), c.clone())).collect(),
            policy: self.policy,
        }
    }

    /// Applies `f` to every coefficient, dropping those that become zero.
    pub fn map_coefficients(&self, f: impl Fn(&TruncatedSeries) -> TruncatedSeries) -> Self {
        let mut out = Self::zero(self.policy);
        for (s, c) in &self.terms {
            out.add_term(s.clone(), &f(c));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(s, c)| serde_json::json!({ "symbol": s.to_string(), "coefficient": c.to_json() }))
                .collect(),
        )
    }
}

impl fmt::Display for CorrelatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (s, c) in &self.terms {
            writeln!(f, "({c}) {s}")?;
        }
        Ok(())
    }
}
