//! Genus-0 resummation of the relation and the two forms of the J-function.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::residue::{genus0_point_value, residue_relation, ResidueOptions};
use super::{light_psi, FixedPointKind, NODE_PSI};
use crate::correlator::{
    add_insertions, compare_exprs, expand_f_zero_many, expand_light_partitions, expand_with_fixed_many,
    expand_zero_correlator, generic_u, mu_plus_insertions, CorrelatorExpr, CorrelatorSymbol, InsertionSymbol,
    LightSetup,
};
use crate::error::Result;
use crate::model::{selection_rule, GammaType, ModelSpec};
use crate::mu::{compare_state_vectors, mu_minus, mu_series, sequence_data, BroadMode, MuOptions, StateVector};
use crate::partition::{for_each_multiset, inverse_automorphism_order};
use crate::report::{CheckReport, Mismatch};
use crate::series::{fmt_rational, int, sign_pow, Gen, Monomial, Rational, TruncatedSeries, TruncationPolicy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Genus0Options {
    /// Light states `b` with a variable `t_b`.
    pub vars: Vec<u32>,
    pub max_t_degree: u32,
    /// Only used by the J-function.
    pub max_u_degree: u32,
    /// Bound on psi powers of the inserted `u` and `mu^+(t, -psi)`.
    pub max_psi_degree: u32,
    /// Add 1 to one evaluated `{mu_B}` value.
    pub perturb: bool,
}

impl Genus0Options {
    pub fn new(model: &ModelSpec, max_t_degree: u32) -> Self {
        Self { vars: (1..=model.r()).collect(), max_t_degree, max_u_degree: 0, max_psi_degree: 2, perturb: false }
    }

    fn mu_options(&self) -> MuOptions {
        MuOptions { vars: self.vars.clone(), twisted: false, broad_mode: BroadMode::AsWritten }
    }

    /// Largest distinguished psi power `c`: `mu_B` reaches `z^{1-n}`.
    fn max_distinguished(&self) -> u32 {
        self.max_psi_degree.max(self.max_t_degree.saturating_sub(2))
    }

    fn policy(&self) -> TruncationPolicy {
        let c = self.max_distinguished() as i32;
        TruncationPolicy::new(self.max_t_degree, self.max_u_degree, -c - 1, self.max_psi_degree.max(1) as i32, 0)
            .with_psi_degree(self.max_psi_degree)
    }
}

fn z_pow(e: i32, policy: TruncationPolicy) -> TruncatedSeries {
    TruncatedSeries::term(Monomial::pow_of(Gen::Z, e), Rational::one(), policy)
}

/// `(psi^c phi_a, z^{-c-1})` for every state `a` and `c <= max_c`.
fn distinguished_targets(
    model: &ModelSpec,
    max_c: u32,
    policy: TruncationPolicy,
) -> Vec<(Vec<InsertionSymbol>, TruncatedSeries)> {
    (1..=model.r())
        .flat_map(|a| (0..=max_c).map(move |c| (a, c)))
        .map(|(a, c)| (vec![InsertionSymbol::new(c, a)], z_pow(-(c as i32) - 1, policy)))
        .collect()
}

fn t_monomial(states: &[u32]) -> Monomial {
    Monomial::from_pairs(states.iter().map(|&b| (Gen::T(b as u8), 1)))
}

type SymbolMap = BTreeMap<CorrelatorSymbol, Rational>;

fn compare_maps(report: &mut CheckReport, what: &str, lhs: &SymbolMap, rhs: &SymbolMap) {
    let zero = Rational::zero();
    let keys: std::collections::BTreeSet<&CorrelatorSymbol> = lhs.keys().chain(rhs.keys()).collect();
    for k in keys {
        report.compared += 1;
        let (x, y) = (lhs.get(k).unwrap_or(&zero), rhs.get(k).unwrap_or(&zero));
        if x != y {
            report.record(Mismatch {
                symbol: k.to_string(),
                monomial: what.to_string(),
                left: fmt_rational(x),
                right: fmt_rational(y),
            });
        }
    }
}

/// Intermediate results of the genus-0 resummation.
struct Genus0Parts {
    /// `sum_a phi^a sum_n 1/n! <phi_a/(z - psi), w^n>_{0,1+n}` per component.
    direct: Vec<CorrelatorExpr>,
    /// The value of `direct` once each partition sum is replaced by the
    /// point residue of its relation.
    evaluated: StateVector,
    report: CheckReport,
}

/// The relation side `sum_{1 in J < [n]} <psi^c phi_a, [mu_J(-z)]_+ phi_{k_J} | rest>^0`
/// read off the genus-0 residue relation and expanded into infinity symbols.
fn relation_side(model: &ModelSpec, a: u32, c: u32, light: &[u32], setup: &LightSetup) -> Result<SymbolMap> {
    let gamma = GammaType { genus: 0, heavy: vec![a], light: light.to_vec() };
    let opts = ResidueOptions { genus_zero_variant: true, twisted: false, heavy_psi: c };
    let rel = residue_relation(model, &gamma, &vec![0; light.len()], opts)?;
    let mut out = SymbolMap::new();
    for term in rel.terms.iter().filter(|t| !t.datum.covers_all) {
        let (gen, state, rest): (Gen, u32, Vec<u32>) = match term.datum.kind {
            FixedPointKind::F0 => (light_psi(1), light[0], light[1..].to_vec()),
            _ => (
                NODE_PSI,
                term.datum.node_k,
                (1..=light.len()).filter(|j| !term.datum.j.contains(j)).map(|j| light[j - 1]).collect(),
            ),
        };
        for (m, coef) in term.coefficient.terms() {
            let p = m.exponent(gen) as u32;
            if p > setup.max_psi {
                continue;
            }
            let heavy = [InsertionSymbol::new(c, a), InsertionSymbol::new(p, state)];
            for (sym, x) in expand_zero_correlator(model, 0, &heavy, &rest, &[], setup) {
                *out.entry(sym).or_insert_with(Rational::zero) += coef * x;
            }
        }
    }
    out.retain(|_, x| !x.is_zero());
    Ok(out)
}

fn genus0_parts(model: &ModelSpec, opts: &Genus0Options, policy: TruncationPolicy) -> Result<Genus0Parts> {
    let mu_opts = opts.mu_options();
    let setup = LightSetup { max_psi: opts.max_psi_degree, broad_mode: BroadMode::AsWritten };
    let max_c = opts.max_distinguished();
    let r = model.r();
    let mut report = CheckReport::new("genus-0 resummation");

    // Route 1: the generating function itself.
    let w = mu_plus_insertions(model, &mu_opts, policy);
    let targets = distinguished_targets(model, max_c, policy);
    let mut direct = vec![CorrelatorExpr::zero(policy); r as usize];
    for ((fixed, _), e) in targets.iter().zip(expand_with_fixed_many(0, &targets, &w, 0)?) {
        direct[model.dual_state(fixed[0].state) as usize - 1].absorb(e)?;
    }

    // Route 2: sum over light multisets B and set partitions with >= 2 blocks.
    let mut partition = vec![CorrelatorExpr::zero(policy); r as usize];
    let mut evaluated = StateVector::zero(r, policy);
    let mut vars = opts.vars.clone();
    vars.sort_unstable();
    vars.dedup();
    let mut sets: Vec<Vec<u32>> = Vec::new();
    for_each_multiset(&vars, 2, opts.max_t_degree as usize, |b| sets.push(b.to_vec()));
    let mut perturbed = !opts.perturb;
    let (mut relations, mut selection_zero) = (0usize, 0usize);
    for b in &sets {
        let blocks: Vec<(Vec<InsertionSymbol>, Rational)> =
            expand_light_partitions(model, b, &[], &setup).into_iter().filter(|(ins, _)| ins.len() >= 2).collect();
        let weight = inverse_automorphism_order(b);
        let tm = t_monomial(b);
        let k_b = sequence_data(model, b).k;
        for a in 1..=r {
            let gamma = GammaType { genus: 0, heavy: vec![a], light: b.clone() };
            let selected = selection_rule(model, &gamma);
            for c in 0..=max_c {
                let head = InsertionSymbol::new(c, a);
                let mut p_map = SymbolMap::new();
                for (ins, x) in &blocks {
                    let all: Vec<InsertionSymbol> = std::iter::once(head).chain(ins.iter().copied()).collect();
                    let sym = CorrelatorSymbol::new(0, all).expect("three or more points");
                    *p_map.entry(sym).or_insert_with(Rational::zero) += x;
                }
                p_map.retain(|_, x| !x.is_zero());
                let mono = tm.mul(&Monomial::pow_of(Gen::Z, -(c as i32) - 1));
                for (sym, x) in &p_map {
                    partition[model.dual_state(a) as usize - 1].add_monomial(sym.clone(), mono.clone(), x * &weight);
                }
                if !selected {
                    // Every symbol in the sum then violates the selection rule.
                    selection_zero += p_map.len();
                    continue;
                }
                relations += 1;
                compare_maps(&mut report, &format!("relation c={c}"), &relation_side(model, a, c, b, &setup)?, &p_map);
                let mut value = genus0_point_value(model, b, c, false).constant_term();
                if !perturbed && !value.is_zero() {
                    value += int(1);
                    perturbed = true;
                    report.note(format!("perturbed {{mu_B}} for B={b:?}, c={c} by +1"));
                }
                if !value.is_zero() {
                    evaluated.component_mut(k_b).add_term(mono.clone(), value * &weight);
                }
            }
        }
    }
    for k in 1..=r {
        let i = k as usize - 1;
        report.absorb(compare_exprs(&format!("partition route phi{k}"), &partition[i], &direct[i], |_| true));
    }
    report.absorb(compare_state_vectors("mu^-", &evaluated, &mu_minus(model, &mu_opts, policy)));
    report.note(format!(
        "{} light multisets, {relations} relations, {selection_zero} symbols vanish by selection",
        sets.len()
    ));
    Ok(Genus0Parts { direct, evaluated, report })
}

/// Verifies that `sum_a phi^a sum_n 1/n! <phi_a/(z - psi), mu^+(t, -psi)^n>_{0,1+n}`
/// resums to `mu^-(t, z)`.
///
/// Each generating-function coefficient is regrouped by set partitions of
/// the light states; every group is matched against the relation read off
/// the genus-0 localization and then replaced by its point residue.
pub fn check_genus0_resummation(model: &ModelSpec, opts: &Genus0Options) -> Result<CheckReport> {
    let opts = Genus0Options { max_u_degree: 0, ..opts.clone() };
    Ok(genus0_parts(model, &opts, opts.policy())?.report)
}

/// A state-space valued J-function: explicit series plus abstract genus-0
/// correlators, one expression per component `phi_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JFunction {
    pub explicit: StateVector,
    pub correlators: Vec<CorrelatorExpr>,
}

impl JFunction {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "explicit": self.explicit.to_json(),
            "correlators": self.correlators.iter().enumerate().map(|(i, e)| serde_json::json!({
                "state": i + 1,
                "terms": e.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct JFunctionCheck {
    pub definitional: JFunction,
    pub resummed: JFunction,
    pub report: CheckReport,
}

/// `u(-z) = sum u_{c,b} (-z)^c phi_b`.
fn u_at_minus_z(model: &ModelSpec, policy: TruncationPolicy) -> StateVector {
    let mut out = StateVector::zero(model.r(), policy);
    for c in 0..=policy.max_psi_degree {
        for b in 1..=model.r() {
            let m = Monomial::from_pairs([(Gen::U(c as u8, b as u8), 1), (Gen::Z, c as i32)]);
            out.component_mut(b).add_term(m, sign_pow(c as i64));
        }
    }
    out
}

/// Builds the genus-0 J-function in its definitional form
/// `u(-z) + z phi_1 + mu(t, z) + sum phi^a <phi_a/(z - psi), u.. | t..>^0`
/// and in the resummed form
/// `u(-z) + z phi_1 + mu^+(t, z) + sum phi^a <phi_a/(z - psi), (u + mu^+(t, -psi))^n>^infty`,
/// and checks that they agree.
///
/// The correlators of `u`-degree >= 1 must match symbol by symbol; the
/// `u`-degree 0 part of the resummed form is evaluated by the genus-0
/// resummation and must account for `mu - mu^+`.
pub fn assemble_j_function(model: &ModelSpec, opts: &Genus0Options) -> Result<JFunctionCheck> {
    let policy = opts.policy();
    let mu_opts = opts.mu_options();
    let r = model.r();
    let max_c = opts.max_distinguished();
    let mut z_phi1 = StateVector::zero(r, policy);
    z_phi1.component_mut(1).add_term(Monomial::var(Gen::Z), Rational::one());
    let u = u_at_minus_z(model, policy);
    let mu = mu_series(model, &mu_opts, policy);

    let def_explicit = u.add(&z_phi1)?.add(&mu)?;
    let res_explicit = u.add(&z_phi1)?.add(&mu.laurent_truncate_plus())?;

    let v = add_insertions(&generic_u(model, policy), &mu_plus_insertions(model, &mu_opts, policy))?;
    let targets = distinguished_targets(model, max_c, policy);
    let mut def_corr = vec![CorrelatorExpr::zero(policy); r as usize];
    let mut res_corr = vec![CorrelatorExpr::zero(policy); r as usize];
    let def = expand_f_zero_many(model, 0, &targets, &mu_opts, 1);
    let res = expand_with_fixed_many(0, &targets, &v, 0)?;
    for (((fixed, _), d), e) in targets.iter().zip(def).zip(res) {
        let i = model.dual_state(fixed[0].state) as usize - 1;
        def_corr[i].absorb(d)?;
        res_corr[i].absorb(e)?;
    }

    let mut report = CheckReport::new(format!("J-function t<={} u<={}", opts.max_t_degree, opts.max_u_degree));
    for k in 1..=r {
        let i = k as usize - 1;
        report.absorb(compare_exprs(&format!("u-dependent correlators phi{k}"), &def_corr[i], &res_corr[i], |m| {
            m.u_degree() >= 1
        }));
    }
    let parts = genus0_parts(model, opts, policy)?;
    for k in 1..=r {
        let i = k as usize - 1;
        let u_free = res_corr[i].map_coefficients(|s| s.filter(|m| m.u_degree() == 0));
        report.absorb(compare_exprs(&format!("u-free correlators phi{k}"), &u_free, &parts.direct[i], |_| true));
    }
    report.absorb(parts.report);
    report.absorb(compare_state_vectors("explicit part", &def_explicit, &res_explicit.add(&parts.evaluated)?));

    Ok(JFunctionCheck {
        definitional: JFunction { explicit: def_explicit, correlators: def_corr },
        resummed: JFunction { explicit: res_explicit, correlators: res_corr },
        report,
    })
}
