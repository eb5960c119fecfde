//! The mu-series of a Fermat model.
//!
//! For a sequence `B = (b_1..b_n)` of light states the Laurent monomial
//! `mu_B(z) = prod_alpha [k_{alpha,B}]_{ell_{alpha,B}} z^{1 - n + sum ell}`
//! is attached to the state `phi_{k_B}`; summing `t_{b_1}..t_{b_n} / n!`
//! times it over all sequences gives `mu(t, z)`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{classify_state, ModelSpec, StateKind};
use crate::partition::{for_each_multiset, for_each_sequence, inverse_automorphism_order};
use crate::report::{CheckReport, Mismatch};
use crate::series::{factorial, floor, fmt_rational, frac, int, Gen, Monomial, Rational, TruncatedSeries, TruncationPolicy};

/// Rising factorial `x (x+1) ... (x+n-1)`; the empty product is 1.
pub fn pochhammer(x: &Rational, n: u32) -> Rational {
    (0..n).fold(Rational::one(), |acc, i| acc * (x + int(i as i64)))
}

/// How `k_{alpha,B}` is defined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BroadMode {
    /// `k_{alpha,B} = q_alpha + <q_alpha (k_B - 1)>`.
    #[default]
    AsWritten,
    /// `k_{alpha,B} = <q_alpha k_B>`, with broad `phi_{k_B}` coefficients set to zero.
    NarrowRedefined,
}

impl FromStr for BroadMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(BroadMode::AsWritten),
            "narrow" | "narrow-redefined" => Ok(BroadMode::NarrowRedefined),
            _ => Err(Error::Parse(format!("unknown broad mode `{s}`"))),
        }
    }
}

impl fmt::Display for BroadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BroadMode::AsWritten => "as-written",
            BroadMode::NarrowRedefined => "narrow",
        })
    }
}

/// Per-sequence data `k_B`, `ell_{alpha,B}`, `k_{alpha,B}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceData {
    pub entries: Vec<u32>,
    pub k: u32,
    pub ell: Vec<u32>,
    pub k_alpha: Vec<Rational>,
}

impl SequenceData {
    pub fn ell_sum(&self) -> i64 {
        self.ell.iter().map(|&l| l as i64).sum()
    }

    /// Exponent `1 - n + sum_alpha ell_alpha` of `z` in `mu_B`.
    pub fn z_exponent(&self) -> i32 {
        1 - self.entries.len() as i32 + self.ell_sum() as i32
    }
}

pub fn sequence_data(model: &ModelSpec, entries: &[u32]) -> SequenceData {
    let shift: i64 = entries.iter().map(|&b| b as i64 - 1).sum();
    let k = model.normalize_state(shift + 1);
    let charges = model.charges();
    let ell = charges
        .iter()
        .map(|q| {
            let total = entries
                .iter()
                .map(|&b| frac(&(q * int(b as i64 - 1))))
                .fold(Rational::zero(), |a, x| a + x);
            u32::try_from(floor(&total)).expect("floor of a sum of fractional parts is non-negative")
        })
        .collect();
    let k_alpha = charges.iter().map(|q| q + frac(&(q * int(k as i64 - 1)))).collect();
    SequenceData { entries: entries.to_vec(), k, ell, k_alpha }
}

/// `k_alpha` values under the given convention.
fn effective_k_alpha(model: &ModelSpec, data: &SequenceData, mode: BroadMode) -> Vec<Rational> {
    match mode {
        BroadMode::AsWritten => data.k_alpha.clone(),
        BroadMode::NarrowRedefined => {
            model.charges().iter().map(|q| frac(&(q * int(data.k as i64)))).collect()
        }
    }
}

/// The untwisted `mu_B` as (coefficient, z-exponent). The coefficient is zero
/// for a broad `phi_{k_B}` in narrow-redefined mode.
pub fn mu_monomial(model: &ModelSpec, entries: &[u32], mode: BroadMode) -> (Rational, i32) {
    let data = sequence_data(model, entries);
    let coeff = if mode == BroadMode::NarrowRedefined && classify_state(model, data.k) == StateKind::Broad {
        Rational::zero()
    } else {
        effective_k_alpha(model, &data, mode)
            .iter()
            .zip(&data.ell)
            .fold(Rational::one(), |acc, (k, &l)| acc * pochhammer(k, l))
    };
    (coeff, data.z_exponent())
}

/// `mu_B(z)` as a series in `z` (and `lambda_alpha` when twisted).
///
/// The twisted form is `z^{1-n} prod_alpha prod_{i < ell_alpha} ((k_alpha + i) z + w_alpha lambda_alpha)`.
pub fn mu_coefficient(
    model: &ModelSpec,
    entries: &[u32],
    twisted: bool,
    mode: BroadMode,
    policy: TruncationPolicy,
) -> TruncatedSeries {
    if !twisted {
        let (c, e) = mu_monomial(model, entries, mode);
        return TruncatedSeries::term(Monomial::pow_of(Gen::Z, e), c, policy);
    }
    let data = sequence_data(model, entries);
    if mode == BroadMode::NarrowRedefined && classify_state(model, data.k) == StateKind::Broad {
        return TruncatedSeries::zero(policy);
    }
    // Build the polynomial without z bounds, then shift by z^{1-n}.
    let wide = TruncationPolicy { z_min: -(1 << 20), z_max: 1 << 20, ..policy };
    let mut acc = TruncatedSeries::one(wide);
    for (alpha, (k, &l)) in effective_k_alpha(model, &data, mode).iter().zip(&data.ell).enumerate() {
        let w = int(model.weights()[alpha] as i64);
        for i in 0..l {
            let factor = TruncatedSeries::from_terms(
                [
                    (Monomial::var(Gen::Z), k + int(i as i64)),
                    (Monomial::var(Gen::Lambda(alpha as u8 + 1)), w.clone()),
                ],
                wide,
            );
            acc = acc.mul(&factor).expect("same policy");
        }
    }
    let shift = Monomial::pow_of(Gen::Z, 1 - entries.len() as i32);
    acc.mul_monomial(&shift, &Rational::one()).retruncate(policy)
}

/// An element of the state space: one series per basis vector `phi_1..phi_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVector {
    components: Vec<TruncatedSeries>,
}

impl StateVector {
    pub fn zero(r: u32, policy: TruncationPolicy) -> Self {
        Self { components: vec![TruncatedSeries::zero(policy); r as usize] }
    }

    pub fn from_components(components: Vec<TruncatedSeries>) -> Result<Self> {
        if let Some(first) = components.first() {
            if components.iter().any(|c| c.policy() != first.policy()) {
                return Err(Error::IncompatiblePolicy);
            }
        }
        Ok(Self { components })
    }

    pub fn r(&self) -> u32 {
        self.components.len() as u32
    }

    /// Component along `phi_k` (1-based).
    pub fn component(&self, k: u32) -> &TruncatedSeries {
        &self.components[k as usize - 1]
    }

    pub fn component_mut(&mut self, k: u32) -> &mut TruncatedSeries {
        &mut self.components[k as usize - 1]
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TruncatedSeries::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.r() != other.r() {
            return Err(Error::Structure("state vectors of different rank".into()));
        }
        let components =
            self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Self { components })
    }

    pub fn map(&self, f: impl Fn(&TruncatedSeries) -> TruncatedSeries) -> Self {
        Self { components: self.components.iter().map(f).collect() }
    }

    pub fn laurent_truncate_plus(&self) -> Self {
        self.map(TruncatedSeries::laurent_truncate_plus)
    }

    pub fn laurent_truncate_minus(&self) -> Self {
        self.map(TruncatedSeries::laurent_truncate_minus)
    }

    pub fn substitute(&self, g: Gen, value: &TruncatedSeries) -> Result<Self> {
        let components = self.components.iter().map(|c| c.substitute(g, value)).collect::<Result<_>>()?;
        Ok(Self { components })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.components
                .iter()
                .enumerate()
                .map(|(i, c)| serde_json::json!({ "state": i + 1, "series": c.to_json() }))
                .collect(),
        )
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            writeln!(f, "phi{}: {}", i + 1, c)?;
        }
        Ok(())
    }
}

/// Compares two state vectors monomial by monomial.
pub fn compare_state_vectors(check: &str, lhs: &StateVector, rhs: &StateVector) -> CheckReport {
    let mut report = CheckReport::new(check);
    for k in 1..=lhs.r() {
        let (a, b) = (lhs.component(k), rhs.component(k));
        let mut monos: Vec<&Monomial> = a.terms().map(|(m, _)| m).chain(b.terms().map(|(m, _)| m)).collect();
        monos.sort();
        monos.dedup();
        for m in monos {
            report.compared += 1;
            let (x, y) = (a.coeff(m), b.coeff(m));
            if x != y {
                report.record(Mismatch {
                    symbol: format!("phi{k}"),
                    monomial: m.to_string(),
                    left: fmt_rational(&x),
                    right: fmt_rational(&y),
                });
            }
        }
    }
    report
}

/// Which light variables enter `t` and how `mu` is evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuOptions {
    /// States `b` whose `t_b` is a variable; the others are set to zero.
    pub vars: Vec<u32>,
    pub twisted: bool,
    pub broad_mode: BroadMode,
}

impl MuOptions {
    pub fn all_vars(model: &ModelSpec) -> Self {
        Self { vars: (1..=model.r()).collect(), twisted: false, broad_mode: BroadMode::AsWritten }
    }

    pub fn single_var(b: u32) -> Self {
        Self { vars: vec![b], twisted: false, broad_mode: BroadMode::AsWritten }
    }

    fn sorted_vars(&self) -> Vec<u32> {
        let mut v = self.vars.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn t_monomial(entries: &[u32]) -> Monomial {
    Monomial::from_pairs(entries.iter().map(|&b| (Gen::T(b as u8), 1)))
}

/// `mu(t, z)` up to the policy's `t`-degree, aggregated over multisets of
/// light states: each multiset `M` contributes `t^M / Aut(M) * mu_M(z) phi_{k_M}`.
pub fn mu_series(model: &ModelSpec, opts: &MuOptions, policy: TruncationPolicy) -> StateVector {
    let mut out = StateVector::zero(model.r(), policy);
    let vars = opts.sorted_vars();
    for_each_multiset(&vars, 1, policy.max_t_degree as usize, |ms| {
        let k = sequence_data(model, ms).k;
        let mu = mu_coefficient(model, ms, opts.twisted, opts.broad_mode, policy);
        let weighted = mu.mul_monomial(&t_monomial(ms), &inverse_automorphism_order(ms));
        out.component_mut(k).add_assign(&weighted);
    });
    out
}

/// Oracle for [`mu_series`]: sums `t_{b_1}..t_{b_n} / n! * mu_B(z) phi_{k_B}`
/// over every ordered sequence.
pub fn mu_series_by_sequences(model: &ModelSpec, opts: &MuOptions, policy: TruncationPolicy) -> StateVector {
    let mut out = StateVector::zero(model.r(), policy);
    let vars = opts.sorted_vars();
    for n in 1..=policy.max_t_degree as usize {
        let inv_fact = Rational::from_integer(factorial(n as u32)).recip();
        for_each_sequence(&vars, n, |seq| {
            let k = sequence_data(model, seq).k;
            let mu = mu_coefficient(model, seq, opts.twisted, opts.broad_mode, policy);
            out.component_mut(k).add_assign(&mu.mul_monomial(&t_monomial(seq), &inv_fact));
        });
    }
    out
}

/// Non-negative `z` powers of `mu(t, z)`.
pub fn mu_plus(model: &ModelSpec, opts: &MuOptions, policy: TruncationPolicy) -> StateVector {
    mu_series(model, opts, policy).laurent_truncate_plus()
}

/// Negative `z` powers of `mu(t, z)`.
pub fn mu_minus(model: &ModelSpec, opts: &MuOptions, policy: TruncationPolicy) -> StateVector {
    mu_series(model, opts, policy).laurent_truncate_minus()
}

/// The pair `(I_0, I_1)` defined by `mu^+(t phi_2, z) = (I_0 - 1) z phi_1 + I_1 phi_2`
/// for a Calabi-Yau model. Both are series in `t_2`.
pub fn extract_i_functions(model: &ModelSpec, policy: TruncationPolicy) -> Result<(TruncatedSeries, TruncatedSeries)> {
    if !model.is_calabi_yau() {
        return Err(Error::NotCalabiYau(crate::series::fmt_rational(&model.total_charge())));
    }
    let plus = mu_plus(model, &MuOptions::single_var(2), policy);
    for k in 1..=model.r() {
        if k != 1 && k != 2 && !plus.component(k).is_zero() {
            return Err(Error::Structure(format!("mu^+(t phi_2) has a nonzero phi_{k} component")));
        }
    }
    let phi1 = plus.component(1);
    let phi2 = plus.component(2);
    if let Some((m, _)) = phi1.terms().find(|(m, _)| m.exponent(Gen::Z) != 1) {
        return Err(Error::Structure(format!("phi_1 component has a term {m} outside z^1")));
    }
    if let Some((m, _)) = phi2.terms().find(|(m, _)| m.exponent(Gen::Z) != 0) {
        return Err(Error::Structure(format!("phi_2 component has a term {m} outside z^0")));
    }
    let mut i0 = phi1.coefficient_of(Gen::Z, 1);
    i0.add_term(Monomial::one(), Rational::one());
    let i1 = phi2.coefficient_of(Gen::Z, 0);
    Ok((i0, i1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn spin5() -> ModelSpec {
        ModelSpec::r_spin(5).unwrap()
    }

    fn pol(n: u32) -> TruncationPolicy {
        TruncationPolicy::new(n, 0, -(n as i32) - 1, 8, 4)
    }

    fn zmono(e: i32) -> Monomial {
        Monomial::pow_of(Gen::Z, e)
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(&rat(7, 3), 0), int(1));
        assert_eq!(pochhammer(&rat(1, 5), 1), rat(1, 5));
        assert_eq!(pochhammer(&rat(1, 5), 3), rat(66, 125));
    }

    #[test]
    fn sequence_data_examples() {
        let q = ModelSpec::quintic();
        let d = sequence_data(&q, &[2, 2, 2, 2, 2]);
        assert_eq!(d.k, 1);
        assert_eq!(d.ell, vec![1; 5]);
        assert_eq!(d.k_alpha, vec![rat(1, 5); 5]);

        let d = sequence_data(&spin5(), &[2, 2]);
        assert_eq!((d.k, d.ell.clone(), d.k_alpha.clone()), (3, vec![0], vec![rat(3, 5)]));

        let m = ModelSpec::new(6, vec![1, 2, 3]).unwrap();
        let d = sequence_data(&m, &[1]);
        assert_eq!(d.k, 1);
        assert_eq!(d.ell, vec![0, 0, 0]);
        assert_eq!(d.k_alpha, m.charges());
    }

    #[test]
    fn mu_coefficient_examples() {
        let q = ModelSpec::quintic();
        let p = pol(5);
        for b in 1..=5 {
            assert_eq!(mu_coefficient(&q, &[b], false, BroadMode::AsWritten, p), TruncatedSeries::one(p));
        }
        assert_eq!(
            mu_coefficient(&q, &[2; 5], false, BroadMode::AsWritten, p),
            TruncatedSeries::term(zmono(1), rat(1, 3125), p)
        );
        assert_eq!(
            mu_coefficient(&spin5(), &[2, 2], false, BroadMode::AsWritten, p),
            TruncatedSeries::term(zmono(-1), int(1), p)
        );
    }

    #[test]
    fn mu_of_minus_z_has_no_plus_part() {
        let p = pol(5);
        let mu = mu_coefficient(&spin5(), &[2, 2], false, BroadMode::AsWritten, p);
        let minus_z = TruncatedSeries::term(zmono(1), int(-1), p);
        let flipped = mu.substitute(Gen::Z, &minus_z).unwrap();
        assert_eq!(flipped, TruncatedSeries::term(zmono(-1), int(-1), p));
        assert!(flipped.laurent_truncate_plus().is_zero());
    }

    #[test]
    fn degree_one_part_is_identity() {
        let q = ModelSpec::quintic();
        let mu = mu_series(&q, &MuOptions::all_vars(&q), pol(1));
        for b in 1..=5u32 {
            let expected = TruncatedSeries::var(Gen::T(b as u8), pol(1));
            assert_eq!(mu.component(b), &expected);
        }
    }

    #[test]
    fn quintic_degree_five_coefficient() {
        let q = ModelSpec::quintic();
        let mu = mu_series(&q, &MuOptions::single_var(2), pol(5));
        let m = Monomial::from_pairs([(Gen::T(2), 5), (Gen::Z, 1)]);
        assert_eq!(mu.component(1).coeff(&m), rat(1, 375000));
    }

    #[test]
    fn setting_t_to_zero_kills_mu() {
        let q = ModelSpec::quintic();
        let p = pol(3);
        let mu = mu_series(&q, &MuOptions::all_vars(&q), p);
        let mut out = mu.clone();
        for b in 1..=5u8 {
            out = out.substitute(Gen::T(b), &TruncatedSeries::zero(p)).unwrap();
        }
        assert!(out.is_zero());
    }

    #[test]
    fn spin5_mu_minus_contains_expected_term() {
        let p = pol(4);
        let minus = mu_minus(&spin5(), &MuOptions::single_var(2), p);
        let m = Monomial::from_pairs([(Gen::T(2), 2), (Gen::Z, -1)]);
        assert_eq!(minus.component(3).coeff(&m), rat(1, 2));
        let mu = mu_series(&spin5(), &MuOptions::single_var(2), p);
        let plus = mu_plus(&spin5(), &MuOptions::single_var(2), p);
        assert_eq!(plus.add(&minus).unwrap(), mu);
    }

    #[test]
    fn quintic_mu_minus_avoids_phi1_and_phi2() {
        let minus = mu_minus(&ModelSpec::quintic(), &MuOptions::single_var(2), pol(7));
        assert!(minus.component(1).is_zero() && minus.component(2).is_zero());
        let m = Monomial::from_pairs([(Gen::T(2), 2), (Gen::Z, -1)]);
        assert_eq!(minus.component(3).coeff(&m), rat(1, 2));
    }

    #[test]
    fn i_functions_of_quintic() {
        let q = ModelSpec::quintic();
        let p = pol(10);
        let (i0, i1) = extract_i_functions(&q, p).unwrap();
        assert_eq!(i0.constant_term(), int(1));
        assert!(i1.constant_term().is_zero());
        assert_eq!(i0.coeff(&Monomial::pow_of(Gen::T(2), 5)), rat(1, 375000));
        assert_eq!(i1.coeff(&Monomial::var(Gen::T(2))), int(1));
        assert!(matches!(extract_i_functions(&spin5(), p), Err(Error::NotCalabiYau(_))));
    }

    #[test]
    fn narrow_mode_zeroes_broad_components() {
        let q = ModelSpec::quintic();
        // k = 5 is broad; ell = 0 so the redefined Pochhammer alone would not vanish.
        let (c, e) = mu_monomial(&q, &[2, 2, 2, 2], BroadMode::NarrowRedefined);
        assert!(c.is_zero());
        assert_eq!(e, -3);
        let (c, _) = mu_monomial(&q, &[2, 2, 2, 2], BroadMode::AsWritten);
        assert_eq!(c, int(1));
        // Narrow k keeps its value.
        assert_eq!(
            mu_monomial(&q, &[3, 4, 4], BroadMode::NarrowRedefined),
            mu_monomial(&q, &[3, 4, 4], BroadMode::AsWritten)
        );
    }

    #[test]
    fn twisted_matches_untwisted_at_lambda_zero() {
        let m = ModelSpec::new(6, vec![1, 2, 3]).unwrap();
        let p = pol(4);
        let twisted = mu_coefficient(&m, &[4, 5, 6], true, BroadMode::AsWritten, p);
        assert!(twisted.terms().any(|(m, _)| m.lambda_degree() > 0));
        let untwisted_at_zero = twisted.filter(|m| m.lambda_degree() == 0);
        assert_eq!(untwisted_at_zero, mu_coefficient(&m, &[4, 5, 6], false, BroadMode::AsWritten, p));
    }
}
