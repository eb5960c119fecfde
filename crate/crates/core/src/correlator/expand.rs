//! Multilinear expansion of the generating functions into correlator symbols.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::{CorrelatorExpr, CorrelatorSymbol, InsertionSymbol};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::mu::{mu_monomial, mu_series, sequence_data, BroadMode, MuOptions};
use crate::partition::{for_each_multiset, for_each_set_partition_pruned, inverse_automorphism_order};
use crate::series::{fmt_rational, rat, sign_pow, Gen, Monomial, Rational, TruncatedSeries, TruncationPolicy};

/// A formal insertion `sum_X v_X X`, one series per insertion symbol.
pub type InsertionSeries = BTreeMap<InsertionSymbol, TruncatedSeries>;

/// The generic heavy insertion `u = sum_{c,b} u_{c,b} psi^c phi_b` with
/// `c` bounded by the policy's psi degree.
pub fn generic_u(model: &ModelSpec, policy: TruncationPolicy) -> InsertionSeries {
    let mut out = InsertionSeries::new();
    for c in 0..=policy.max_psi_degree {
        for b in 1..=model.r() {
            out.insert(InsertionSymbol::new(c, b), TruncatedSeries::var(Gen::U(c as u8, b as u8), policy));
        }
    }
    out
}

/// `mu^+(t, -psi)` as an insertion: the coefficient of `psi^c phi_b` is
/// `(-1)^c [z^c] mu^+_b(t, z)`.
pub fn mu_plus_insertions(model: &ModelSpec, opts: &MuOptions, policy: TruncationPolicy) -> InsertionSeries {
    let inner = TruncationPolicy {
        z_min: -(policy.max_t_degree as i32) - 1,
        z_max: policy.max_psi_degree as i32,
        ..policy
    };
    let mu = mu_series(model, opts, inner);
    let mut out = InsertionSeries::new();
    for b in 1..=model.r() {
        let comp = mu.component(b);
        for c in 0..=policy.max_psi_degree {
            let coeff = comp.coefficient_of(Gen::Z, c as i32).retruncate(policy).scale(&sign_pow(c as i64));
            if !coeff.is_zero() {
                out.insert(InsertionSymbol::new(c, b), coeff);
            }
        }
    }
    out
}

pub fn add_insertions(a: &InsertionSeries, b: &InsertionSeries) -> Result<InsertionSeries> {
    let mut out = a.clone();
    for (k, v) in b {
        let sum = match out.get(k) {
            Some(x) => x.add(v)?,
            None => v.clone(),
        };
        if sum.is_zero() {
            out.remove(k);
        } else {
            out.insert(*k, sum);
        }
    }
    Ok(out)
}

struct MultisetExpansion<'a> {
    genus: u32,
    targets: &'a [(Vec<InsertionSymbol>, TruncatedSeries)],
    kinds: Vec<(InsertionSymbol, &'a TruncatedSeries)>,
    min_count: usize,
    outs: Vec<CorrelatorExpr>,
}

impl MultisetExpansion<'_> {
    fn run(&mut self, idx: usize, chosen: &mut Vec<InsertionSymbol>, product: &TruncatedSeries) -> Result<()> {
        if idx == self.kinds.len() {
            if chosen.len() >= self.min_count {
                for ((fixed, prefactor), out) in self.targets.iter().zip(self.outs.iter_mut()) {
                    let all: Vec<InsertionSymbol> = fixed.iter().chain(chosen.iter()).copied().collect();
                    if let Some(sym) = CorrelatorSymbol::new(self.genus, all) {
                        out.add_term(sym, &product.mul(prefactor)?);
                    }
                }
            }
            return Ok(());
        }
        self.run(idx + 1, chosen, product)?;
        let (sym, v) = self.kinds[idx];
        let depth = chosen.len();
        let mut p = product.clone();
        let mut n = 0i64;
        loop {
            n += 1;
            p = p.mul(v)?.scale(&rat(1, n));
            if p.is_zero() {
                break;
            }
            chosen.push(sym);
            self.run(idx + 1, chosen, &p)?;
        }
        chosen.truncate(depth);
        Ok(())
    }
}

/// `prefactor * sum_{S} prod_X v_X^{n_X} / n_X! <fixed, S>_g` over multisets `S`
/// of insertion symbols with `|S| >= min_count`; unstable symbols are dropped.
///
/// Every `v_X` must have zero constant term so that the sum is finite.
pub fn expand_with_fixed(
    genus: u32,
    fixed: &[InsertionSymbol],
    prefactor: &TruncatedSeries,
    insertions: &InsertionSeries,
    min_count: usize,
) -> Result<CorrelatorExpr> {
    let targets = [(fixed.to_vec(), prefactor.clone())];
    Ok(expand_with_fixed_many(genus, &targets, insertions, min_count)?.remove(0))
}

/// [`expand_with_fixed`] for several `(fixed, prefactor)` pairs sharing one
/// pass over the multisets. All prefactors must share a policy.
pub fn expand_with_fixed_many(
    genus: u32,
    targets: &[(Vec<InsertionSymbol>, TruncatedSeries)],
    insertions: &InsertionSeries,
    min_count: usize,
) -> Result<Vec<CorrelatorExpr>> {
    let Some((_, first)) = targets.first() else { return Ok(Vec::new()) };
    let policy = *first.policy();
    if targets.iter().any(|(_, p)| p.policy() != &policy) {
        return Err(Error::IncompatiblePolicy);
    }
    for (x, v) in insertions {
        if v.policy() != &policy {
            return Err(Error::IncompatiblePolicy);
        }
        let c = v.constant_term();
        if !c.is_zero() {
            return Err(Error::NonzeroConstantTerm(format!("{} at {x}", fmt_rational(&c))));
        }
    }
    let mut exp = MultisetExpansion {
        genus,
        targets,
        kinds: insertions.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v)).collect(),
        min_count,
        outs: vec![CorrelatorExpr::zero(policy); targets.len()],
    };
    exp.run(0, &mut Vec::new(), &TruncatedSeries::one(policy))?;
    Ok(exp.outs)
}

/// `F^infty_g(v) = sum_m (1/m!) <v^m>_{g,m}` expanded multilinearly.
pub fn expand_f_infinity(genus: u32, insertions: &InsertionSeries, policy: TruncationPolicy) -> Result<CorrelatorExpr> {
    expand_with_fixed(genus, &[], &TruncatedSeries::one(policy), insertions, 0)
}

/// How light blocks are turned into heavy insertions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LightSetup {
    /// Insertions with a larger psi power are dropped.
    pub max_psi: u32,
    pub broad_mode: BroadMode,
}

type BlockValue = Option<(InsertionSymbol, Rational)>;

/// Sum over set partitions `{J_1..J_h}` of the light markings of the heavy
/// insertions `[z^{sum d_J} mu_J(-z)]_+ |_{z=psi} phi_{k_J}`. Returns each sorted
/// list of resulting insertions with its scalar coefficient.
pub fn expand_light_partitions(
    model: &ModelSpec,
    light: &[u32],
    d_powers: &[u32],
    setup: &LightSetup,
) -> BTreeMap<Vec<InsertionSymbol>, Rational> {
    assert!(d_powers.is_empty() || d_powers.len() == light.len(), "one psi power per light marking");
    let d = |j: usize| d_powers.get(j).copied().unwrap_or(0);
    let memo: RefCell<HashMap<(Vec<u32>, u32), BlockValue>> = RefCell::new(HashMap::new());
    let value = |block: &[usize]| -> BlockValue {
        let mut states: Vec<u32> = block.iter().map(|&j| light[j]).collect();
        states.sort_unstable();
        let dsum: u32 = block.iter().map(|&j| d(j)).sum();
        let key = (states, dsum);
        if let Some(v) = memo.borrow().get(&key) {
            return v.clone();
        }
        let (coef, e) = mu_monomial(model, &key.0, setup.broad_mode);
        let c = e + dsum as i32;
        let v = if coef.is_zero() || c < 0 || c as u32 > setup.max_psi {
            None
        } else {
            let k = sequence_data(model, &key.0).k;
            Some((InsertionSymbol::new(c as u32, k), coef * sign_pow(e as i64)))
        };
        memo.borrow_mut().insert(key, v.clone());
        v
    };
    let mut out: BTreeMap<Vec<InsertionSymbol>, Rational> = BTreeMap::new();
    let items: Vec<usize> = (0..light.len()).collect();
    for_each_set_partition_pruned(
        &items,
        |block| value(block).is_some(),
        |blocks| {
            let mut ins = Vec::with_capacity(blocks.len());
            let mut coef = Rational::one();
            for b in blocks {
                let (x, c) = value(b).expect("pruned blocks are nonzero");
                ins.push(x);
                coef *= c;
            }
            ins.sort_unstable();
            let e = out.entry(ins).or_insert_with(Rational::zero);
            *e += coef;
        },
    );
    out.retain(|_, c| !c.is_zero());
    out
}

/// Whether `<heavy | light>^0_{g,m|n}` can be nonzero: `2g - 2 + m >= 0` and
/// `(2g - 2 + m, n) != (0, 0)`.
pub fn zero_theory_defined(genus: u32, m: usize, n: usize) -> bool {
    let e = 2 * genus as i64 - 2 + m as i64;
    e >= 0 && !(e == 0 && n == 0)
}

/// A single zero-theory correlator `<heavy | psi^{d_j} phi_{b_j}>^0_g` as a
/// combination of infinity-theory symbols.
pub fn expand_zero_correlator(
    model: &ModelSpec,
    genus: u32,
    heavy: &[InsertionSymbol],
    light: &[u32],
    d_powers: &[u32],
    setup: &LightSetup,
) -> BTreeMap<CorrelatorSymbol, Rational> {
    let mut out = BTreeMap::new();
    if !zero_theory_defined(genus, heavy.len(), light.len()) {
        return out;
    }
    for (ins, c) in expand_light_partitions(model, light, d_powers, setup) {
        let all: Vec<InsertionSymbol> = heavy.iter().chain(ins.iter()).copied().collect();
        if let Some(sym) = CorrelatorSymbol::new(genus, all) {
            let e: &mut Rational = out.entry(sym).or_insert_with(Rational::zero);
            *e += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn t_monomial(states: &[u32]) -> Monomial {
    Monomial::from_pairs(states.iter().map(|&b| (Gen::T(b as u8), 1)))
}

fn u_monomial(ins: &[InsertionSymbol]) -> Monomial {
    Monomial::from_pairs(ins.iter().map(|x| (Gen::U(x.psi as u8, x.state as u8), 1)))
}

/// `F^0_g(u, t) = sum 1/(m! n!) <u^m | t^n>^0_g` with generic `u` and
/// `t = sum_{b in vars} t_b phi_b`, each zero-theory correlator expanded over
/// light partitions.
///
/// `fixed` insertions (if any) are prepended to every heavy list and carry
/// no variable; they count towards `m`.
pub fn expand_f_zero_via_wallcrossing(
    model: &ModelSpec,
    genus: u32,
    fixed: &[InsertionSymbol],
    prefactor: &TruncatedSeries,
    opts: &MuOptions,
    min_u_count: usize,
) -> CorrelatorExpr {
    let targets = [(fixed.to_vec(), prefactor.clone())];
    expand_f_zero_many(model, genus, &targets, opts, min_u_count).remove(0)
}

/// [`expand_f_zero_via_wallcrossing`] for several `(fixed, prefactor)` pairs
/// sharing the light-partition expansion. All prefactors must share a policy.
pub fn expand_f_zero_many(
    model: &ModelSpec,
    genus: u32,
    targets: &[(Vec<InsertionSymbol>, TruncatedSeries)],
    opts: &MuOptions,
    min_u_count: usize,
) -> Vec<CorrelatorExpr> {
    let Some((_, first)) = targets.first() else { return Vec::new() };
    let policy = *first.policy();
    assert!(targets.iter().all(|(_, p)| p.policy() == &policy), "incompatible truncation policies");
    let setup = LightSetup { max_psi: policy.max_psi_degree, broad_mode: opts.broad_mode };
    let u_kinds: Vec<InsertionSymbol> = generic_u(model, policy).into_keys().collect();
    let mut u_sets: Vec<(Vec<InsertionSymbol>, Monomial, Rational)> = Vec::new();
    for_each_multiset(&u_kinds, min_u_count, policy.max_u_degree as usize, |us| {
        u_sets.push((us.to_vec(), u_monomial(us), inverse_automorphism_order(us)));
    });
    let mut vars = opts.vars.clone();
    vars.sort_unstable();
    vars.dedup();
    let mut outs = vec![CorrelatorExpr::zero(policy); targets.len()];
    let mut t_sets: Vec<Vec<u32>> = Vec::new();
    for_each_multiset(&vars, 0, policy.max_t_degree as usize, |ts| t_sets.push(ts.to_vec()));
    for ts in &t_sets {
        let light = expand_light_partitions(model, ts, &[], &setup);
        let tm = t_monomial(ts);
        let t_weight = inverse_automorphism_order(ts);
        for (us, um, u_weight) in u_sets.iter() {
            let mono = tm.mul(um);
            let weight = &t_weight * u_weight;
            for ((fixed, prefactor), out) in targets.iter().zip(outs.iter_mut()) {
                if !zero_theory_defined(genus, fixed.len() + us.len(), ts.len()) {
                    continue;
                }
                for (ins, c) in &light {
                    let all: Vec<InsertionSymbol> = fixed.iter().chain(us.iter()).chain(ins.iter()).copied().collect();
                    let Some(sym) = CorrelatorSymbol::new(genus, all) else { continue };
                    for (pm, pc) in prefactor.terms() {
                        out.add_monomial(sym.clone(), mono.mul(pm), pc * c * &weight);
                    }
                }
            }
        }
    }
    outs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::ordered_set_partitions;
    use crate::series::int;

    fn quintic_setup() -> LightSetup {
        LightSetup { max_psi: 3, broad_mode: BroadMode::AsWritten }
    }

    #[test]
    fn single_light_marking_becomes_heavy() {
        let q = ModelSpec::quintic();
        let x = InsertionSymbol::primary(3);
        for b in 1..=5 {
            let out = expand_zero_correlator(&q, 1, &[x], &[b], &[], &quintic_setup());
            let sym = CorrelatorSymbol::new(1, vec![x, InsertionSymbol::primary(b)]).unwrap();
            assert_eq!(out, BTreeMap::from([(sym, int(1))]));
        }
    }

    #[test]
    fn two_light_markings() {
        // Spin-5 with b = (2, 3): the joint block has k = 4 and z^{-1}, so only
        // the split partition survives.
        let m = ModelSpec::r_spin(5).unwrap();
        let x = InsertionSymbol::primary(2);
        let out = expand_zero_correlator(&m, 1, &[x], &[2, 3], &[], &quintic_setup());
        let sym = CorrelatorSymbol::new(1, vec![x, InsertionSymbol::primary(2), InsertionSymbol::primary(3)]).unwrap();
        assert_eq!(out, BTreeMap::from([(sym, int(1))]));
        // With a descendant d = 1 on the first light marking the joint block
        // becomes [z mu(-z)]_+ = -1 at psi^0.
        let out = expand_zero_correlator(&m, 1, &[x], &[2, 3], &[1, 0], &quintic_setup());
        let split = CorrelatorSymbol::new(1, vec![x, InsertionSymbol::new(1, 2), InsertionSymbol::primary(3)]).unwrap();
        let joint = CorrelatorSymbol::new(1, vec![x, InsertionSymbol::primary(4)]).unwrap();
        assert_eq!(out, BTreeMap::from([(split, int(1)), (joint, int(-1))]));
    }

    #[test]
    fn ordered_partitions_with_weight_agree_with_unordered() {
        // Oracle: sum over ordered partitions with 1/h!.
        let q = ModelSpec::quintic();
        let light = [2, 2, 2, 2, 2, 3];
        let setup = LightSetup { max_psi: 4, broad_mode: BroadMode::AsWritten };
        let mut oracle: BTreeMap<Vec<InsertionSymbol>, Rational> = BTreeMap::new();
        for seq in ordered_set_partitions(light.len()) {
            let h = seq.len() as u32;
            let mut coef = Rational::from_integer(crate::series::factorial(h)).recip();
            let mut ins = Vec::new();
            let mut ok = true;
            for block in &seq {
                let states: Vec<u32> = block.iter().map(|&j| light[j]).collect();
                let (c, e) = mu_monomial(&q, &states, BroadMode::AsWritten);
                if c.is_zero() || !(0..=4).contains(&e) {
                    ok = false;
                    break;
                }
                coef *= c * sign_pow(e as i64);
                ins.push(InsertionSymbol::new(e as u32, sequence_data(&q, &states).k));
            }
            if ok {
                ins.sort_unstable();
                *oracle.entry(ins).or_insert_with(Rational::zero) += coef;
            }
        }
        oracle.retain(|_, c| !c.is_zero());
        assert_eq!(expand_light_partitions(&q, &light, &[], &setup), oracle);
    }

    #[test]
    fn f_infinity_degree_terms() {
        let p = TruncationPolicy::new(0, 2, 0, 0, 0).with_psi_degree(0);
        let mut u = InsertionSeries::new();
        u.insert(InsertionSymbol::primary(2), TruncatedSeries::var(Gen::U(0, 2), p));
        let f = expand_f_infinity(2, &u, p).unwrap();
        let phi2 = InsertionSymbol::primary(2);
        assert_eq!(f.coefficient(&CorrelatorSymbol::new(2, vec![]).unwrap()), TruncatedSeries::one(p));
        assert_eq!(f.coefficient(&CorrelatorSymbol::new(2, vec![phi2]).unwrap()), u[&phi2]);
        let sq = u[&phi2].pow(2).scale(&rat(1, 2));
        assert_eq!(f.coefficient(&CorrelatorSymbol::new(2, vec![phi2, phi2]).unwrap()), sq);
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn f_infinity_of_zero_is_the_constant_term() {
        let p = TruncationPolicy::new(2, 2, 0, 0, 0);
        assert_eq!(expand_f_infinity(2, &InsertionSeries::new(), p).unwrap().len(), 1);
        assert!(expand_f_infinity(1, &InsertionSeries::new(), p).unwrap().is_empty());
    }

    #[test]
    fn f_infinity_rejects_constant_terms() {
        let p = TruncationPolicy::new(2, 2, 0, 0, 0);
        let mut u = InsertionSeries::new();
        u.insert(InsertionSymbol::primary(1), TruncatedSeries::one(p));
        assert!(matches!(expand_f_infinity(2, &u, p), Err(Error::NonzeroConstantTerm(_))));
    }

    #[test]
    fn f_zero_at_t_zero_is_f_infinity_of_u() {
        let q = ModelSpec::quintic();
        let p = TruncationPolicy::new(0, 2, 0, 0, 0).with_psi_degree(1);
        let opts = MuOptions::all_vars(&q);
        for g in 0..3 {
            let lhs = expand_f_zero_via_wallcrossing(&q, g, &[], &TruncatedSeries::one(p), &opts, 0);
            let rhs = expand_f_infinity(g, &generic_u(&q, p), p).unwrap();
            assert_eq!(lhs, rhs, "genus {g}");
        }
    }

    #[test]
    fn mu_plus_insertion_signs() {
        let q = ModelSpec::quintic();
        let p = TruncationPolicy::new(5, 0, 0, 0, 0).with_psi_degree(1);
        let w = mu_plus_insertions(&q, &MuOptions::single_var(2), p);
        let c = w[&InsertionSymbol::new(1, 1)].coeff(&Monomial::pow_of(Gen::T(2), 5));
        assert_eq!(c, rat(-1, 375000));
        assert_eq!(w[&InsertionSymbol::primary(2)], TruncatedSeries::var(Gen::T(2), p));
    }
}
