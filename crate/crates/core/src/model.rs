//! Fermat model data, insertion profiles and the closed-form scalar invariants
//! attached to them.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{fmt_rational, frac, int, rat, sign_pow, to_i64, Rational};

/// Data of a Fermat polynomial `sum_alpha X_alpha^{r / w_alpha}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct ModelSpec {
    r: u32,
    weights: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawModel {
    r: u32,
    weights: Vec<u32>,
}

impl TryFrom<RawModel> for ModelSpec {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        ModelSpec::new(raw.r, raw.weights)
    }
}

impl From<ModelSpec> for RawModel {
    fn from(m: ModelSpec) -> Self {
        RawModel { r: m.r, weights: m.weights }
    }
}

impl ModelSpec {
    pub fn new(r: u32, weights: Vec<u32>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidModel(format!("r = {r} must be at least 2")));
        }
        if r > 255 {
            return Err(Error::InvalidModel(format!("r = {r} is too large")));
        }
        if weights.is_empty() {
            return Err(Error::InvalidModel("at least one weight is required".into()));
        }
        for &w in &weights {
            if w == 0 || !r.is_multiple_of(w) || r / w < 2 {
                return Err(Error::InvalidModel(format!(
                    "r / w = {r} / {w} must be an integer at least 2"
                )));
            }
        }
        let g = weights.iter().fold(r, |acc, &w| acc.gcd(&w));
        if g != 1 {
            return Err(Error::InvalidModel(format!("gcd(r, weights) = {g}, expected 1")));
        }
        Ok(Self { r, weights })
    }

    /// The quintic `X_1^5 + ... + X_5^5`.
    pub fn quintic() -> Self {
        Self::new(5, vec![1; 5]).expect("quintic is valid")
    }

    /// The `r`-spin model `X^r`.
    pub fn r_spin(r: u32) -> Result<Self> {
        Self::new(r, vec![1])
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Number of variables `s`.
    pub fn s(&self) -> usize {
        self.weights.len()
    }

    pub fn charges(&self) -> Vec<Rational> {
        self.weights.iter().map(|&w| rat(w as i64, self.r as i64)).collect()
    }

    pub fn total_charge(&self) -> Rational {
        self.charges().into_iter().fold(Rational::zero(), |a, q| a + q)
    }

    pub fn is_calabi_yau(&self) -> bool {
        self.total_charge().is_one()
    }

    /// Canonical representative of `a mod r` in `1..=r`.
    pub fn normalize_state(&self, a: i64) -> u32 {
        let r = self.r as i64;
        let x = a.rem_euclid(r);
        if x == 0 {
            self.r
        } else {
            x as u32
        }
    }

    /// The state `a'` with `a + a' = 0 mod r`.
    pub fn dual_state(&self, a: u32) -> u32 {
        self.normalize_state(-(a as i64))
    }

    /// Sum over `alpha` of the fractional parts `<q_alpha (x - 1)>`.
    pub fn fractional_sum(&self, x: u32) -> Rational {
        self.charges()
            .iter()
            .map(|q| frac(&(q * int(x as i64 - 1))))
            .fold(Rational::zero(), |a, b| a + b)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "r={} weights=[{}]", self.r, w.join(","))
    }
}

/// An insertion profile `(a_1..a_m | b_1..b_n)` in genus `g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaType {
    pub genus: u32,
    pub heavy: Vec<u32>,
    pub light: Vec<u32>,
}

impl GammaType {
    /// Builds a profile with entries normalized into `1..=r`.
    pub fn new(model: &ModelSpec, genus: u32, heavy: &[i64], light: &[i64]) -> Self {
        Self {
            genus,
            heavy: heavy.iter().map(|&a| model.normalize_state(a)).collect(),
            light: light.iter().map(|&b| model.normalize_state(b)).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.heavy.len()
    }

    pub fn n(&self) -> usize {
        self.light.len()
    }

    /// `2g - 2 + m`.
    pub fn heavy_euler(&self) -> i64 {
        2 * self.genus as i64 - 2 + self.m() as i64
    }

    /// Whether `2g - 2 + m >= 0`.
    pub fn heavy_nonnegative(&self) -> bool {
        self.heavy_euler() >= 0
    }

    /// False when the moduli space is empty and every invariant is zero.
    pub fn is_stable(&self) -> bool {
        self.heavy_nonnegative() && !(self.heavy_euler() == 0 && self.light.is_empty())
    }

    /// Parses `g=G;a1,a2|b1,b2`; the `g=` prefix is optional (default 0) and
    /// either side may be empty.
    pub fn parse(model: &ModelSpec, s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidGamma(format!("`{s}`: {msg}"));
        let s_trim = s.trim();
        let (genus, body) = match s_trim.strip_prefix("g=") {
            Some(rest) => {
                let (g, body) = rest.split_once(';').ok_or_else(|| bad("missing `;` after genus"))?;
                (g.trim().parse::<u32>().map_err(|_| bad("bad genus"))?, body)
            }
            None => (0, s_trim),
        };
        let (h, l) = body.split_once('|').ok_or_else(|| bad("missing `|`"))?;
        let parse_side = |side: &str| -> Result<Vec<i64>> {
            side.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<i64>().map_err(|_| bad("bad entry")))
                .collect()
        };
        let heavy = parse_side(h)?;
        let light = parse_side(l)?;
        Ok(GammaType::new(model, genus, &heavy, &light))
    }
}

impl fmt::Display for GammaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "g={};{}|{}", self.genus, join(&self.heavy), join(&self.light))
    }
}

impl FromStr for StateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "narrow" => Ok(StateKind::Narrow),
            "broad" => Ok(StateKind::Broad),
            _ => Err(Error::Parse(format!("unknown state kind `{s}`"))),
        }
    }
}

/// `2g - 2 + sum_i (1 - a_i) + sum_j (1 - b_j) = 0 mod r`.
pub fn selection_rule(model: &ModelSpec, gamma: &GammaType) -> bool {
    let total: i64 = 2 * gamma.genus as i64 - 2
        + gamma.heavy.iter().map(|&a| 1 - a as i64).sum::<i64>()
        + gamma.light.iter().map(|&b| 1 - b as i64).sum::<i64>();
    total.rem_euclid(model.r() as i64) == 0
}

fn insertion_fractional_sum(model: &ModelSpec, gamma: &GammaType) -> Rational {
    gamma
        .heavy
        .iter()
        .chain(gamma.light.iter())
        .map(|&x| model.fractional_sum(x))
        .fold(Rational::zero(), |a, b| a + b)
}

/// Virtual dimension of the moduli of `gamma`; `master` adds the extra
/// dimension of the master space.
pub fn virtual_dimension(model: &ModelSpec, gamma: &GammaType, master: bool) -> Result<Rational> {
    let s = int(model.s() as i64);
    let g1 = int(gamma.genus as i64 - 1);
    let mut d = (int(3) - s + int(2) * model.total_charge()) * g1
        + int((gamma.m() + gamma.n()) as i64)
        - insertion_fractional_sum(model, gamma);
    if master {
        d += int(1);
    }
    if !d.denom().is_one() {
        return Err(Error::NonInteger("virtual dimension".into(), fmt_rational(&d)));
    }
    Ok(d)
}

/// The sign exponent `(2q - s)(g - 1) - sum_alpha (...)` of `epsilon_gamma`.
pub fn epsilon_exponent(model: &ModelSpec, gamma: &GammaType) -> Rational {
    let s = int(model.s() as i64);
    let g1 = int(gamma.genus as i64 - 1);
    (int(2) * model.total_charge() - s) * g1 - insertion_fractional_sum(model, gamma)
}

/// `r^{1-g} (-1)^{exponent}`.
pub fn epsilon_gamma(model: &ModelSpec, gamma: &GammaType) -> Result<Rational> {
    let e = epsilon_exponent(model, gamma);
    let e = to_i64(&e).ok_or_else(|| Error::NonInteger("epsilon sign exponent".into(), fmt_rational(&e)))?;
    let r = int(model.r() as i64);
    let power = if gamma.genus == 0 {
        r
    } else {
        let mut p = Rational::one();
        for _ in 1..gamma.genus {
            p *= &r;
        }
        p.recip()
    };
    Ok(power * sign_pow(e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Narrow,
    Broad,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateKind::Narrow => "narrow",
            StateKind::Broad => "broad",
        })
    }
}

/// `phi_a` is narrow iff `a q_alpha` is never an integer.
pub fn classify_state(model: &ModelSpec, a: u32) -> StateKind {
    let integral = model.charges().iter().any(|q| (q * int(a as i64)).denom().is_one());
    if integral {
        StateKind::Broad
    } else {
        StateKind::Narrow
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin5() -> ModelSpec {
        ModelSpec::r_spin(5).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(ModelSpec::new(5, vec![1, 1, 1, 1, 1]).is_ok());
        assert!(ModelSpec::new(6, vec![1, 2, 3]).is_ok());
        assert!(ModelSpec::new(6, vec![2, 2]).is_err(), "gcd 2");
        assert!(ModelSpec::new(6, vec![4]).is_err(), "6/4 not integral");
        assert!(ModelSpec::new(4, vec![4]).is_err(), "r/w = 1");
        assert!(ModelSpec::new(1, vec![1]).is_err());
        let json: ModelSpec = serde_json::from_str(r#"{"r": 5, "weights": [1,1,1,1,1]}"#).unwrap();
        assert_eq!(json, ModelSpec::quintic());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"r": 6, "weights": [2,2]}"#).is_err());
    }

    #[test]
    fn selection_rule_examples() {
        let q = ModelSpec::quintic();
        assert!(!selection_rule(&q, &GammaType::new(&q, 1, &[], &[2])));
        assert!(selection_rule(&q, &GammaType::new(&q, 0, &[2], &[2, 2])));
        assert!(selection_rule(&q, &GammaType::new(&q, 1, &[1, 1], &[1, 1, 1])));
    }

    #[test]
    fn virtual_dimension_examples() {
        let q = ModelSpec::quintic();
        let gamma = GammaType::new(&q, 1, &[], &[2, 2, 2, 2, 2]);
        assert_eq!(virtual_dimension(&q, &gamma, false).unwrap(), int(0));
        assert_eq!(virtual_dimension(&q, &gamma, true).unwrap(), int(1));
        let ones = GammaType::new(&q, 1, &[1, 1, 1], &[]);
        assert_eq!(virtual_dimension(&q, &ones, false).unwrap(), int(3));
    }

    #[test]
    fn epsilon_examples() {
        let q = ModelSpec::quintic();
        let gamma = GammaType::new(&q, 1, &[], &[2, 2, 2, 2, 2]);
        assert_eq!(epsilon_exponent(&q, &gamma), int(-5));
        assert_eq!(epsilon_gamma(&q, &gamma).unwrap(), int(-1));
        let ones = GammaType::new(&q, 1, &[1, 1], &[1]);
        assert_eq!(epsilon_gamma(&q, &ones).unwrap(), int(1));
        let bad = GammaType::new(&spin5(), 0, &[2, 2, 4], &[]);
        assert_eq!(epsilon_exponent(&spin5(), &bad), rat(-2, 5));
        assert!(matches!(epsilon_gamma(&spin5(), &bad), Err(Error::NonInteger(..))));
    }

    #[test]
    fn classify_examples() {
        let q = ModelSpec::quintic();
        assert_eq!(classify_state(&q, 5), StateKind::Broad);
        assert_eq!(classify_state(&q, 2), StateKind::Narrow);
        let m = ModelSpec::new(6, vec![1, 2, 3]).unwrap();
        assert_eq!(classify_state(&m, 6), StateKind::Broad);
        assert_eq!(classify_state(&m, 2), StateKind::Broad, "2 * 1/2 is integral");
        assert_eq!(classify_state(&m, 1), StateKind::Narrow);
    }

    #[test]
    fn normalization_uses_r_for_zero() {
        let q = ModelSpec::quintic();
        let g = GammaType::new(&q, 0, &[0, 7], &[-1]);
        assert_eq!(g.heavy, vec![5, 2]);
        assert_eq!(g.light, vec![4]);
        assert_eq!(q.dual_state(5), 5);
        assert_eq!(q.dual_state(2), 3);
    }

    #[test]
    fn gamma_parsing() {
        let q = ModelSpec::quintic();
        let g = GammaType::parse(&q, "g=1;|2,2,2,2,2").unwrap();
        assert_eq!(g, GammaType::new(&q, 1, &[], &[2, 2, 2, 2, 2]));
        let g = GammaType::parse(&q, "3,4|").unwrap();
        assert_eq!((g.genus, g.heavy.clone(), g.light.len()), (0, vec![3, 4], 0));
        assert_eq!(g.to_string(), "g=0;3,4|");
        assert!(GammaType::parse(&q, "g=1;2,2").is_err());
        assert!(GammaType::parse(&q, "g=x;|2").is_err());
    }

    #[test]
    fn stability_flags() {
        let q = ModelSpec::quintic();
        assert!(!GammaType::new(&q, 1, &[], &[]).is_stable());
        assert!(GammaType::new(&q, 1, &[], &[2]).is_stable());
        assert!(!GammaType::new(&q, 0, &[2], &[2, 2]).is_stable());
        assert!(GammaType::new(&q, 0, &[2, 2], &[2]).is_stable());
    }
}
