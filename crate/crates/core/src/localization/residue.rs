//! The `z^{-1}` extraction that turns fixed-point contributions into a
//! relation among moduli classes.

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{enumerate_fixed_points, geometric_kernel, light_psi, localization_contribution, mu_at_minus_z, node_data};
use super::{FixedPointDatum, FixedPointKind, NODE_PSI};
use crate::error::{Error, Result};
use crate::model::{GammaType, ModelSpec};
use crate::mu::{mu_coefficient, BroadMode};
use crate::report::{CheckReport, Mismatch};
use crate::series::{int, sign_pow, Gen, Monomial, Rational, TruncatedSeries, TruncationPolicy};

/// Opaque tag for the moduli space a relation term lives on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModuliLabel {
    /// The 0-side moduli of `gamma`.
    Gamma,
    /// The infinity-side moduli of `gamma`.
    GammaPrime,
    /// Light markings in `J` merged into one heavy marking `x_J`.
    GammaJ(Vec<usize>),
    /// A point (genus 0, all light markings on the rational tail).
    Point,
}

impl fmt::Display for ModuliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuliLabel::Gamma => f.write_str("gamma"),
            ModuliLabel::GammaPrime => f.write_str("gamma'"),
            ModuliLabel::GammaJ(j) => {
                let j: Vec<String> = j.iter().map(|x| x.to_string()).collect();
                write!(f, "gamma_{{{}}}", j.join(","))
            }
            ModuliLabel::Point => f.write_str("pt"),
        }
    }
}

fn label_of(d: &FixedPointDatum) -> ModuliLabel {
    match d.kind {
        FixedPointKind::F0 => ModuliLabel::Gamma,
        FixedPointKind::Finf => ModuliLabel::GammaPrime,
        FixedPointKind::FJ if d.covers_all => ModuliLabel::Point,
        FixedPointKind::FJ => ModuliLabel::GammaJ(d.j.clone()),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueOptions {
    pub genus_zero_variant: bool,
    pub twisted: bool,
    /// Power `c` of `psi` at the heavy marking (genus-0 variant only).
    pub heavy_psi: u32,
}

/// One term `coefficient * [label]` of a relation `sum = 0`. The coefficient
/// is a polynomial in the `psi` generators (and `lambda` when twisted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationTerm {
    pub label: ModuliLabel,
    pub datum: FixedPointDatum,
    pub coefficient: TruncatedSeries,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueRelation {
    pub gamma: GammaType,
    pub d_powers: Vec<u32>,
    pub options: ResidueOptions,
    pub terms: Vec<RelationTerm>,
}

impl ResidueRelation {
    pub fn term(&self, label: &ModuliLabel) -> Option<&RelationTerm> {
        self.terms.iter().find(|t| &t.label == label)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "gamma": self.gamma.to_string(),
            "d": self.d_powers,
            "heavy_psi": self.options.heavy_psi,
            "genus_zero_variant": self.options.genus_zero_variant,
            "twisted": self.options.twisted,
            "terms": self.terms.iter().map(|t| serde_json::json!({
                "label": t.label.to_string(),
                "fixed_point": t.datum,
                "coefficient": t.coefficient.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for ResidueRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "relation for {} with d = {:?} (sum of terms = 0):", self.gamma, self.d_powers)?;
        for t in &self.terms {
            writeln!(f, "  ({}) [{}]", t.coefficient, t.label)?;
        }
        Ok(())
    }
}

/// Bounds wide enough that no term reaching `z^{-1}` is lost: `mu_J` has
/// `z`-degree at most `s (n - 1) + 1`.
pub fn residue_policy(model: &ModelSpec, n: usize, total_d: u32, twisted: bool) -> TruncationPolicy {
    let top = (model.s() * n.saturating_sub(1)) as i32 + 1 + total_d as i32 + 1;
    let lambda = if twisted { (model.s() * n) as u32 } else { 0 };
    TruncationPolicy::new(0, 0, -top - 2, top, lambda).with_psi_degree(top as u32 + 1)
}

fn psi_product(d_powers: &[u32], skip: &[usize]) -> Monomial {
    Monomial::from_pairs(
        d_powers
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(&(i + 1)))
            .map(|(i, &d)| (light_psi(i + 1), d as i32)),
    )
}

fn d_on(d_powers: &[u32], j: &[usize]) -> u32 {
    j.iter().map(|&i| d_powers[i - 1]).sum()
}

/// Extracts `z^{-1}` of every fixed-point contribution weighted by
/// `prod psi_{y_j}^{d_j}` restricted to the component.
///
/// On `F_J` the classes `psi_{y_j}`, `j` in `J`, restrict to `z`; on the
/// genus-0 component with `J = [n]` the heavy class restricts to `-z`. The
/// factor `r'` of the contribution is cancelled against the covering degree
/// `1/r'` and the sign `(-1)^{sum ell}` against the orientation, both
/// explicitly.
pub fn residue_relation(
    model: &ModelSpec,
    gamma: &GammaType,
    d_powers: &[u32],
    opts: ResidueOptions,
) -> Result<ResidueRelation> {
    if d_powers.len() != gamma.n() {
        return Err(Error::InvalidVariant(format!("{} psi powers for {} light markings", d_powers.len(), gamma.n())));
    }
    if opts.heavy_psi > 0 && !opts.genus_zero_variant {
        return Err(Error::InvalidVariant("a heavy psi power needs the genus-0 variant".into()));
    }
    let fixed = enumerate_fixed_points(model, gamma, opts.genus_zero_variant)?;
    let total_d = d_powers.iter().sum::<u32>() + opts.heavy_psi;
    let policy = residue_policy(model, gamma.n(), total_d, opts.twisted);
    let mut terms = Vec::with_capacity(fixed.len());
    for datum in fixed {
        let contribution = localization_contribution(model, &datum, opts.twisted, policy);
        let (weight, norm) = match datum.kind {
            FixedPointKind::F0 | FixedPointKind::Finf => (psi_product(d_powers, &[]), Rational::one()),
            FixedPointKind::FJ => {
                let mut z = d_on(d_powers, &datum.j) as i32;
                let mut norm = datum.sign(model);
                if datum.covers_all {
                    z += opts.heavy_psi as i32;
                    norm *= sign_pow(opts.heavy_psi as i64);
                } else {
                    norm /= int(datum.r_prime as i64);
                }
                (psi_product(d_powers, &datum.j).mul(&Monomial::pow_of(Gen::Z, z)), norm)
            }
        };
        let coefficient = contribution.mul_monomial(&weight, &norm).coefficient_of(Gen::Z, -1);
        terms.push(RelationTerm { label: label_of(&datum), datum, coefficient });
    }
    Ok(ResidueRelation { gamma: gamma.clone(), d_powers: d_powers.to_vec(), options: opts, terms })
}

/// `[z^{-1}] z^d mu_J(-z) / (z - psi)` with `psi` the node generator.
pub fn truncation_by_residue(
    model: &ModelSpec,
    values: &[u32],
    d: u32,
    twisted: bool,
    policy: TruncationPolicy,
) -> TruncatedSeries {
    mu_at_minus_z(model, values, twisted, policy)
        .mul_monomial(&Monomial::pow_of(Gen::Z, d as i32), &Rational::one())
        .mul(&geometric_kernel(NODE_PSI, policy))
        .expect("same policy")
        .coefficient_of(Gen::Z, -1)
}

/// `[z^d mu_J(-z)]_+ |_{z = psi}` with `psi` the node generator.
pub fn truncation_direct(
    model: &ModelSpec,
    values: &[u32],
    d: u32,
    twisted: bool,
    policy: TruncationPolicy,
) -> TruncatedSeries {
    mu_at_minus_z(model, values, twisted, policy)
        .mul_monomial(&Monomial::pow_of(Gen::Z, d as i32), &Rational::one())
        .laurent_truncate_plus()
        .substitute(Gen::Z, &TruncatedSeries::var(NODE_PSI, policy))
        .expect("non-negative powers only")
}

/// The closed form of each relation term, in the order of
/// [`residue_relation`]: `+prod psi^d` on `gamma`, `-prod psi^d` on `gamma'`,
/// the truncation `[z^{d_J} mu_J(-z)]_+` at `x_J` on `gamma_J`, and
/// `(-1)^{D+1} {mu_B(z)}_{z^{-c-D-1}}` on the genus-0 point.
pub fn expected_relation(
    model: &ModelSpec,
    gamma: &GammaType,
    d_powers: &[u32],
    opts: ResidueOptions,
) -> Result<Vec<(ModuliLabel, TruncatedSeries)>> {
    let fixed = enumerate_fixed_points(model, gamma, opts.genus_zero_variant)?;
    let total_d = d_powers.iter().sum::<u32>() + opts.heavy_psi;
    let policy = residue_policy(model, gamma.n(), total_d, opts.twisted);
    let plain = TruncatedSeries::term(psi_product(d_powers, &[]), Rational::one(), policy);
    Ok(fixed
        .iter()
        .map(|datum| {
            let value = match datum.kind {
                FixedPointKind::F0 => plain.clone(),
                FixedPointKind::Finf => plain.neg(),
                FixedPointKind::FJ if datum.covers_all => {
                    let d = d_on(d_powers, &datum.j) as i32;
                    let e = -(opts.heavy_psi as i32) - d - 1;
                    mu_coefficient(model, &datum.values, opts.twisted, BroadMode::AsWritten, policy)
                        .coefficient_of(Gen::Z, e)
                        .scale(&sign_pow(d as i64 + 1))
                }
                FixedPointKind::FJ => {
                    let t = truncation_direct(model, &datum.values, d_on(d_powers, &datum.j), opts.twisted, policy);
                    t.mul_monomial(&psi_product(d_powers, &datum.j), &Rational::one())
                }
            };
            (label_of(datum), value)
        })
        .collect())
}

/// Compares [`residue_relation`] with [`expected_relation`] term by term.
pub fn check_residue_relation(
    model: &ModelSpec,
    gamma: &GammaType,
    d_powers: &[u32],
    opts: ResidueOptions,
) -> Result<CheckReport> {
    let rel = residue_relation(model, gamma, d_powers, opts)?;
    let expected = expected_relation(model, gamma, d_powers, opts)?;
    let mut report = CheckReport::new(format!("residue {gamma} d={d_powers:?}"));
    for (term, (label, want)) in rel.terms.iter().zip(&expected) {
        report.compared += 1;
        if term.label != *label || term.coefficient != *want {
            report.record(Mismatch {
                symbol: label.to_string(),
                monomial: "*".into(),
                left: term.coefficient.to_string(),
                right: want.to_string(),
            });
        }
    }
    Ok(report)
}

/// The scalar `{mu_B(z)}_{z^{-c-1}}` read off the genus-0 relation as minus
/// the residue of the point component, for light states `values` (n >= 2).
pub fn genus0_point_value(model: &ModelSpec, values: &[u32], c: u32, twisted: bool) -> TruncatedSeries {
    let policy = residue_policy(model, values.len(), c, twisted);
    let datum = FixedPointDatum { covers_all: true, ..node_data(model, values) };
    localization_contribution(model, &datum, twisted, policy)
        .mul_monomial(&Monomial::pow_of(Gen::Z, c as i32), &(datum.sign(model) * sign_pow(c as i64)))
        .coefficient_of(Gen::Z, -1)
        .neg()
}
