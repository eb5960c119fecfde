//! JSON form of a series: an array of
//! `{"monomial": {"gen": exponent, ...}, "num": "...", "den": "..."}`
//! in canonical term order, with exact decimal strings.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Gen, Monomial, Rational, TruncatedSeries, TruncationPolicy};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub monomial: BTreeMap<String, i32>,
    pub num: String,
    pub den: String,
}

pub(super) fn to_json(s: &TruncatedSeries) -> serde_json::Value {
    let terms: Vec<SeriesTerm> = s
        .terms()
        .map(|(m, c)| SeriesTerm {
            monomial: m.factors().map(|(g, e)| (g.name(), *e)).collect(),
            num: c.numer().to_string(),
            den: c.denom().to_string(),
        })
        .collect();
    serde_json::to_value(terms).expect("series terms serialize")
}

pub(super) fn from_json(value: &serde_json::Value, policy: TruncationPolicy) -> Result<TruncatedSeries> {
    let terms: Vec<SeriesTerm> =
        serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = TruncatedSeries::zero(policy);
    for t in terms {
        let num: BigInt = t.num.parse().map_err(|_| Error::Parse(format!("bad numerator `{}`", t.num)))?;
        let den: BigInt = t.den.parse().map_err(|_| Error::Parse(format!("bad denominator `{}`", t.den)))?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        let mut m = Monomial::one();
        for (name, e) in &t.monomial {
            m = m.mul(&Monomial::pow_of(Gen::parse(name)?, *e));
        }
        out.add_term(m, Rational::new(num, den));
    }
    Ok(out)
}
