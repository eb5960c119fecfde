//! Fixed loci of the master space and their localization contributions.
//!
//! Nothing geometric is computed here. A fixed component is described by its
//! node data, and its contribution is the Laurent series in `z` that the
//! Euler-class formulas produce, with `psi` classes as bounded generators:
//! `Psi(0)` is the node marking `x_J` and `Psi(j)` the light marking `y_j`.

mod genus0;
mod residue;

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GammaType, ModelSpec};
use crate::mu::{mu_coefficient, sequence_data, BroadMode};
use crate::series::{int, sign_pow, Gen, Monomial, Rational, TruncatedSeries, TruncationPolicy};

pub use genus0::{
    assemble_j_function, check_genus0_resummation, Genus0Options, JFunction, JFunctionCheck,
};
pub use residue::{
    check_residue_relation, expected_relation, genus0_point_value, residue_policy, residue_relation,
    truncation_by_residue, truncation_direct, ModuliLabel, RelationTerm, ResidueOptions, ResidueRelation,
};

/// The generator for the cotangent line at the node marking `x_J`.
pub const NODE_PSI: Gen = Gen::Psi(0);

/// The generator for the cotangent line at light marking `y_j` (1-based).
pub fn light_psi(j: usize) -> Gen {
    Gen::Psi(u8::try_from(j).expect("at most 255 light markings"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FixedPointKind {
    F0,
    Finf,
    FJ,
}

impl fmt::Display for FixedPointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixedPointKind::F0 => "F0",
            FixedPointKind::Finf => "Finf",
            FixedPointKind::FJ => "FJ",
        })
    }
}

/// A fixed component together with the node data of its light subset.
///
/// For `F0` and `Finf` the subset is empty and the node fields are those of
/// the empty subset (`k = 1`, `ell = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointDatum {
    pub kind: FixedPointKind,
    /// 1-based light indices in `J`.
    pub j: Vec<usize>,
    /// The states `b_j` for `j` in `J`, in the order of `j`.
    pub values: Vec<u32>,
    pub node_k: u32,
    pub node_ell: u32,
    pub a_infinity: u32,
    pub r_prime: u32,
    pub bundle_shift: i64,
    /// Genus-0 component where `J` is every light marking; it has no node.
    pub covers_all: bool,
}

impl FixedPointDatum {
    /// `(-1)^{sum_alpha ell_{alpha,J}}`.
    pub fn sign(&self, model: &ModelSpec) -> Rational {
        sign_pow(sequence_data(model, &self.values).ell_sum())
    }
}

impl fmt::Display for FixedPointDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j: Vec<String> = self.j.iter().map(|x| x.to_string()).collect();
        write!(
            f,
            "{} J={{{}}} k={} ell={} a_inf={} r'={} c={}",
            self.kind,
            j.join(","),
            self.node_k,
            self.node_ell,
            self.a_infinity,
            self.r_prime,
            self.bundle_shift
        )?;
        if self.covers_all {
            write!(f, " (all light markings)")?;
        }
        Ok(())
    }
}

/// Node data of a subset with light states `values`:
/// `r ell + k = 1 + sum (b_j - 1)` with `k` in `1..=r`, `a_inf = -k mod r`,
/// `r' = r / gcd(r, k)` and `c = ell - #{b_j = r} + [k = r]`.
pub fn node_data(model: &ModelSpec, values: &[u32]) -> FixedPointDatum {
    let r = model.r() as i64;
    let total = 1 + values.iter().map(|&b| b as i64 - 1).sum::<i64>();
    let k = model.normalize_state(total);
    let ell = (total - k as i64) / r;
    let at_r = values.iter().filter(|&&b| b == model.r()).count() as i64;
    FixedPointDatum {
        kind: FixedPointKind::FJ,
        j: (1..=values.len()).collect(),
        values: values.to_vec(),
        node_k: k,
        node_ell: u32::try_from(ell).expect("total is at least 1"),
        a_infinity: model.dual_state(k),
        r_prime: model.r() / model.r().gcd(&k),
        bundle_shift: ell - at_r + i64::from(k == model.r()),
        covers_all: false,
    }
}

fn with_kind(model: &ModelSpec, gamma: &GammaType, kind: FixedPointKind, j: Vec<usize>) -> FixedPointDatum {
    let values: Vec<u32> = j.iter().map(|&i| gamma.light[i - 1]).collect();
    FixedPointDatum { kind, j, ..node_data(model, &values) }
}

/// Fixed components of the master space of `gamma`.
///
/// The standard variant gives `F0`, `Finf` and `F_J` for `{1} < J <= [n]`.
/// The genus-0 variant (`g = 0`, one heavy marking) has no `Finf` and
/// includes `J = [n]`, which then carries no node.
pub fn enumerate_fixed_points(
    model: &ModelSpec,
    gamma: &GammaType,
    genus_zero_variant: bool,
) -> Result<Vec<FixedPointDatum>> {
    let n = gamma.n();
    if n == 0 {
        return Err(Error::InvalidVariant("at least one light marking is needed".into()));
    }
    if n > 16 {
        return Err(Error::InvalidVariant(format!("{n} light markings is beyond the enumeration limit")));
    }
    if genus_zero_variant {
        if gamma.genus != 0 || gamma.m() != 1 || n < 2 {
            return Err(Error::InvalidVariant(format!("genus-0 variant needs g=0, m=1, n>=2; got {gamma}")));
        }
    } else if !gamma.heavy_nonnegative() {
        return Err(Error::InvalidVariant(format!("2g-2+m < 0 for {gamma}")));
    }
    let mut out = vec![with_kind(model, gamma, FixedPointKind::F0, Vec::new())];
    if !genus_zero_variant {
        out.push(with_kind(model, gamma, FixedPointKind::Finf, Vec::new()));
    }
    // Subsets containing 1 with at least one more element, by bitmask over 2..=n.
    for mask in 1u32..(1 << (n - 1)) {
        let j: Vec<usize> = std::iter::once(1).chain((2..=n).filter(|i| mask & (1 << (i - 2)) != 0)).collect();
        let mut d = with_kind(model, gamma, FixedPointKind::FJ, j);
        d.covers_all = genus_zero_variant && d.j.len() == n;
        out.push(d);
    }
    Ok(out)
}

/// `1/(z - psi) = sum_k psi^k z^{-k-1}` up to the policy's bounds.
pub fn geometric_kernel(psi: Gen, policy: TruncationPolicy) -> TruncatedSeries {
    let top = (policy.max_psi_degree as i32).min(-1 - policy.z_min);
    TruncatedSeries::from_terms(
        (0..=top.max(-1)).map(|k| (Monomial::from_pairs([(psi, k), (Gen::Z, -k - 1)]), int(1))),
        policy,
    )
}

/// `mu_J(-z)` for the datum's states.
pub fn mu_at_minus_z(model: &ModelSpec, values: &[u32], twisted: bool, policy: TruncationPolicy) -> TruncatedSeries {
    let mu = mu_coefficient(model, values, twisted, BroadMode::AsWritten, policy);
    mu.substitute(Gen::Z, &TruncatedSeries::term(Monomial::var(Gen::Z), int(-1), policy))
        .expect("z -> -z is invertible")
}

/// The contribution of one fixed component:
/// `1/(z - psi_{y_1})` for `F0`, its negative for `Finf`,
/// `(-1)^{sum ell} r' mu_J(-z) / (z - psi_{x_J})` for `F_J`, and
/// `(-1)^{sum ell} mu_J(-z)` for the genus-0 component with `J = [n]`.
pub fn localization_contribution(
    model: &ModelSpec,
    datum: &FixedPointDatum,
    twisted: bool,
    policy: TruncationPolicy,
) -> TruncatedSeries {
    match datum.kind {
        FixedPointKind::F0 => geometric_kernel(light_psi(1), policy),
        FixedPointKind::Finf => geometric_kernel(light_psi(1), policy).neg(),
        FixedPointKind::FJ => {
            let mu = mu_at_minus_z(model, &datum.values, twisted, policy).scale(&datum.sign(model));
            if datum.covers_all {
                mu
            } else {
                mu.scale(&int(datum.r_prime as i64))
                    .mul(&geometric_kernel(NODE_PSI, policy))
                    .expect("same policy")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn datum(model: &ModelSpec, values: &[u32]) -> (u32, u32, u32, u32, i64) {
        let d = node_data(model, values);
        (d.node_ell, d.node_k, d.a_infinity, d.r_prime, d.bundle_shift)
    }

    #[test]
    fn node_data_examples() {
        let m5 = ModelSpec::r_spin(5).unwrap();
        assert_eq!(datum(&m5, &[2, 2, 2]), (0, 4, 1, 5, 0));
        assert_eq!(datum(&m5, &[1]), (0, 1, 4, 5, 0));
        let m3 = ModelSpec::r_spin(3).unwrap();
        assert_eq!(datum(&m3, &[3, 3]), (1, 2, 1, 3, -1));
        assert_eq!(datum(&m3, &[2, 3]), (1, 1, 2, 3, 0));
        // k = r branch: 3 ell + k = 3 gives ell = 0, k = 3 and c = 0 - 0 + 1.
        assert_eq!(datum(&m3, &[2, 2]), (0, 3, 3, 1, 1));
        let m6 = ModelSpec::r_spin(6).unwrap();
        assert_eq!(datum(&m6, &[3, 2]).3, 3);
    }

    #[test]
    fn enumeration_counts() {
        let m = ModelSpec::r_spin(5).unwrap();
        let g = GammaType::new(&m, 1, &[2], &[2, 3]);
        let fp = enumerate_fixed_points(&m, &g, false).unwrap();
        let kinds: Vec<_> = fp.iter().map(|d| d.kind).collect();
        assert_eq!(kinds, [FixedPointKind::F0, FixedPointKind::Finf, FixedPointKind::FJ]);
        assert_eq!(fp[2].j, [1, 2]);

        let g = GammaType::new(&m, 2, &[], &[2, 3, 4]);
        let js: Vec<Vec<usize>> = enumerate_fixed_points(&m, &g, false).unwrap()[2..].iter().map(|d| d.j.clone()).collect();
        assert_eq!(js, [vec![1, 2], vec![1, 3], vec![1, 2, 3]]);

        let g = GammaType::new(&m, 0, &[3], &[2, 2]);
        let fp = enumerate_fixed_points(&m, &g, true).unwrap();
        assert_eq!(fp.len(), 2);
        assert_eq!(fp[0].kind, FixedPointKind::F0);
        assert!(fp[1].covers_all);
        for n in 2..7 {
            let g = GammaType::new(&m, 0, &[3], &vec![2; n]);
            assert_eq!(enumerate_fixed_points(&m, &g, true).unwrap().len(), 1 << (n - 1));
        }
    }

    #[test]
    fn enumeration_preconditions() {
        let m = ModelSpec::r_spin(5).unwrap();
        assert!(enumerate_fixed_points(&m, &GammaType::new(&m, 1, &[1], &[]), false).is_err());
        assert!(enumerate_fixed_points(&m, &GammaType::new(&m, 0, &[1], &[2]), false).is_err());
        assert!(enumerate_fixed_points(&m, &GammaType::new(&m, 1, &[1], &[2, 2]), true).is_err());
        assert!(enumerate_fixed_points(&m, &GammaType::new(&m, 0, &[1, 2], &[2, 2]), true).is_err());
        assert!(enumerate_fixed_points(&m, &GammaType::new(&m, 0, &[1], &[2]), true).is_err());
    }

    #[test]
    fn contributions() {
        let m = ModelSpec::r_spin(5).unwrap();
        let p = TruncationPolicy::new(0, 0, -4, 4, 0).with_psi_degree(3);
        let g = GammaType::new(&m, 1, &[1], &[2, 2]);
        let fp = enumerate_fixed_points(&m, &g, false).unwrap();
        let f0 = localization_contribution(&m, &fp[0], false, p);
        let psi = |k: i32| Monomial::from_pairs([(light_psi(1), k), (Gen::Z, -k - 1)]);
        assert_eq!(f0.len(), 4);
        assert_eq!(f0.coeff(&psi(2)), int(1));
        assert_eq!(localization_contribution(&m, &fp[1], false, p), f0.neg());
        // mu_{(2,2)}(-z) = -z^{-1}; times 5 / (z - psi).
        let fj = localization_contribution(&m, &fp[2], false, p);
        let node = |k: i32| Monomial::from_pairs([(NODE_PSI, k), (Gen::Z, -k - 2)]);
        assert_eq!(fj.coeff(&node(0)), int(-5));
        assert_eq!(fj.coeff(&node(1)), int(-5));
        assert_eq!(fj.len(), 3);
        let mu = mu_at_minus_z(&m, &[2, 2], false, p);
        assert_eq!(mu, TruncatedSeries::term(Monomial::pow_of(Gen::Z, -1), rat(-1, 1), p));
    }
}
