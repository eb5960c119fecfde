//! The dilaton rewrite and the closed forms it produces for Calabi-Yau models.

use std::collections::HashMap;

use num_traits::One;

use super::expand::{expand_f_infinity, expand_f_zero_via_wallcrossing, mu_plus_insertions};
use super::wallcross::{compare_exprs, perturb_insertions};
use super::{CorrelatorExpr, CorrelatorSymbol, InsertionSymbol};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::mu::{extract_i_functions, MuOptions};
use crate::report::{CheckReport, Mismatch};
use crate::series::{factorial, fmt_rational, int, Rational, TruncatedSeries, TruncationPolicy};

const DILATON: InsertionSymbol = InsertionSymbol { psi: 1, state: 1 };

/// Fully reduces one symbol: `(factor, symbol)`, or `None` if the factor is 0.
fn reduce_symbol(sym: &CorrelatorSymbol) -> Option<(Rational, CorrelatorSymbol)> {
    let mut factor = Rational::one();
    let mut current = sym.clone();
    loop {
        if current.genus() == 1 && current.insertions() == [DILATON] {
            return Some((factor, current));
        }
        let Some(pos) = current.insertions().iter().position(|x| *x == DILATON) else {
            return Some((factor, current));
        };
        let mut rest = current.insertions().to_vec();
        rest.remove(pos);
        let k = 2 * current.genus() as i64 - 2 + rest.len() as i64;
        if k <= 0 {
            return None;
        }
        factor *= int(k);
        current = CorrelatorSymbol::new(current.genus(), rest).expect("positive Euler characteristic is stable");
    }
}

/// Rewrites `<psi phi_1, X>_{g,m+1} -> (2g - 2 + m) <X>_{g,m}` until no
/// `psi phi_1` insertion is left other than in `<psi phi_1>_{1,1}`.
pub fn dilaton_reduce(expr: &CorrelatorExpr) -> CorrelatorExpr {
    let mut memo: HashMap<CorrelatorSymbol, Option<(Rational, CorrelatorSymbol)>> = HashMap::new();
    let mut out = CorrelatorExpr::zero(*expr.policy());
    for (sym, coeff) in expr.terms() {
        let red = memo.entry(sym.clone()).or_insert_with(|| reduce_symbol(sym));
        if let Some((factor, target)) = red {
            out.add_term(target.clone(), &coeff.scale(factor));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DilatonCheckOptions {
    pub max_t_degree: u32,
    /// Perturb one coefficient of `mu^+` on the wall-crossing side only.
    pub perturb: bool,
}

fn phi2_symbol(genus: u32, n: usize) -> Option<CorrelatorSymbol> {
    CorrelatorSymbol::new(genus, vec![InsertionSymbol::primary(2); n])
}

/// The common constant `lambda` with `a = lambda * b` for every pair, if any.
fn uniform_ratio(pairs: &[(TruncatedSeries, TruncatedSeries)]) -> Option<Rational> {
    let mut lambda: Option<Rational> = None;
    for (a, b) in pairs {
        let (m, cb) = b.terms().next()?;
        let l = a.coeff(m) / cb;
        if b.scale(&l) != *a {
            return None;
        }
        match &lambda {
            Some(x) if *x != l => return None,
            _ => lambda = Some(l),
        }
    }
    lambda
}

/// Verifies the dilaton-reduced closed forms of `F^infty_g(mu^+(t phi_2, -psi))`
/// for a Calabi-Yau model at genus `g >= 1`.
///
/// Three routes are compared: the wall-crossing side reduced by dilaton, the closed
/// form in `I_0`, `I_1`, and the partition expansion of `F^0_g(0, t phi_2)`
/// reduced by dilaton.
pub fn check_dilaton_invariance(model: &ModelSpec, genus: u32, opts: &DilatonCheckOptions) -> Result<CheckReport> {
    if !model.is_calabi_yau() {
        return Err(Error::NotCalabiYau(fmt_rational(&model.total_charge())));
    }
    if genus == 0 {
        return Err(Error::Structure("the closed forms need genus >= 1".into()));
    }
    let n_max = opts.max_t_degree;
    let policy = TruncationPolicy::new(n_max, 0, 0, 0, 0).with_psi_degree(1);
    let i_policy = TruncationPolicy::new(n_max, 0, -(n_max as i32) - 1, 2, 0);
    let (i0, i1) = extract_i_functions(model, i_policy)?;
    let (i0, i1) = (i0.retruncate(policy), i1.retruncate(policy));
    let mu_opts = MuOptions::single_var(2);
    let mut report = CheckReport::new(format!("dilaton g={genus}"));

    let mut w = mu_plus_insertions(model, &mu_opts, policy);
    if opts.perturb {
        if let Some(p) = perturb_insertions(&mut w) {
            report.note(p);
        }
    }
    let wc_side = dilaton_reduce(&expand_f_infinity(genus, &w, policy)?);

    // Scalar identity behind the closed form.
    let one = TruncatedSeries::one(policy);
    let x_series = one.sub(&i0)?;
    for n in 0..=n_max as i64 {
        let x = 2 * genus as i64 - 2 + n;
        if x <= 0 {
            continue;
        }
        let mut lhs = TruncatedSeries::zero(policy);
        let mut term = one.clone();
        let mut m = 0i64;
        while !term.is_zero() {
            lhs = lhs.add(&term)?;
            term = term.mul(&x_series)?.scale(&Rational::new((x + m).into(), (m + 1).into()));
            m += 1;
        }
        let rhs = i0.powi(-x)?;
        report.compared += 1;
        if lhs != rhs {
            report.record(Mismatch {
                symbol: format!("sum_m (1-I0)^m/m! [{x}]_m"),
                monomial: "*".into(),
                left: lhs.to_string(),
                right: rhs.to_string(),
            });
        }
    }

    // Closed form.
    let ratio = i1.mul(&i0.inverse()?)?;
    let weight = i0.powi(2 * genus as i64 - 2)?;
    let mut closed = CorrelatorExpr::zero(policy);
    let mut scaled = CorrelatorExpr::zero(policy);
    for n in 0..=n_max as usize {
        let Some(sym) = phi2_symbol(genus, n) else { continue };
        let c = ratio.pow(n as u32).scale(&Rational::from_integer(factorial(n as u32)).recip());
        closed.add_term(sym.clone(), &c);
        scaled.add_term(sym.clone(), &wc_side.coefficient(&sym).mul(&weight)?);
    }
    if genus == 1 {
        let leftover = CorrelatorSymbol::new(1, vec![DILATON]).expect("stable");
        closed.add_term(leftover.clone(), &i0.sub(&one)?.log1p()?.neg());
        scaled.add_term(leftover.clone(), &wc_side.coefficient(&leftover));
    }
    // Any other symbol surviving the reduction has closed-form coefficient 0.
    for (sym, c) in wc_side.terms() {
        if closed.coefficient(sym).is_zero() && scaled.coefficient(sym).is_zero() {
            scaled.add_term(sym.clone(), c);
        }
    }
    let closed_report = compare_exprs("closed form", &scaled, &closed, |_| true);
    if !closed_report.passed {
        let pairs: Vec<(TruncatedSeries, TruncatedSeries)> = closed
            .terms()
            .map(|(s, c)| (scaled.coefficient(s), c.clone()))
            .filter(|(a, b)| a != b)
            .collect();
        if let Some(l) = uniform_ratio(&pairs) {
            report.note(format!(
                "closed-form mismatch is a uniform factor {}: dilaton normalization issue",
                fmt_rational(&l)
            ));
        }
    }
    report.absorb(closed_report);

    // Partition route.
    let partition_side = dilaton_reduce(&expand_f_zero_via_wallcrossing(model, genus, &[], &one, &mu_opts, 0));
    report.absorb(compare_exprs("partition route", &partition_side, &wc_side, |_| true));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Gen;

    fn pol() -> TruncationPolicy {
        TruncationPolicy::new(2, 0, 0, 0, 0)
    }

    fn sym(g: u32, ins: &[(u32, u32)]) -> CorrelatorSymbol {
        CorrelatorSymbol::new(g, ins.iter().map(|&(c, b)| InsertionSymbol::new(c, b)).collect()).unwrap()
    }

    #[test]
    fn one_step() {
        let mut e = CorrelatorExpr::zero(pol());
        e.add_scalar(sym(2, &[(1, 1), (0, 2)]), &int(1));
        let r = dilaton_reduce(&e);
        assert_eq!(r.terms().count(), 1);
        assert_eq!(r.coefficient(&sym(2, &[(0, 2)])), TruncatedSeries::constant(int(3), pol()));
    }

    #[test]
    fn reduces_to_the_terminal_symbol() {
        let mut e = CorrelatorExpr::zero(pol());
        e.add_scalar(sym(1, &[(1, 1), (1, 1)]), &int(1));
        let r = dilaton_reduce(&e);
        assert_eq!(r.coefficient(&sym(1, &[(1, 1)])), TruncatedSeries::one(pol()));
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn untouched_without_dilaton_insertions() {
        let mut e = CorrelatorExpr::zero(pol());
        e.add_term(sym(0, &[(0, 2), (0, 2), (2, 1)]), &TruncatedSeries::var(Gen::T(2), pol()));
        assert_eq!(dilaton_reduce(&e), e);
    }

    #[test]
    fn genus_zero_three_point_dilaton_vanishes() {
        let mut e = CorrelatorExpr::zero(pol());
        e.add_scalar(sym(0, &[(1, 1), (0, 2), (0, 3)]), &int(1));
        assert!(dilaton_reduce(&e).is_empty());
        let mut e = CorrelatorExpr::zero(pol());
        e.add_scalar(sym(0, &[(1, 1), (0, 2), (0, 3), (0, 4)]), &int(1));
        assert_eq!(dilaton_reduce(&e).coefficient(&sym(0, &[(0, 2), (0, 3), (0, 4)])), TruncatedSeries::one(pol()));
    }

    #[test]
    fn idempotent() {
        let mut e = CorrelatorExpr::zero(pol());
        e.add_scalar(sym(3, &[(1, 1), (1, 1), (1, 1), (0, 2)]), &int(2));
        e.add_scalar(sym(1, &[(1, 1), (0, 5)]), &int(-1));
        let once = dilaton_reduce(&e);
        assert_eq!(dilaton_reduce(&once), once);
        // (2*3-2+1)(2*3-2+2)(2*3-2+3) * 2 = 5*6*7*2
        assert_eq!(once.coefficient(&sym(3, &[(0, 2)])), TruncatedSeries::constant(int(420), pol()));
    }

    #[test]
    fn dilaton_invariance_small_truncation() {
        let q = ModelSpec::quintic();
        for g in 1..=2 {
            let r = check_dilaton_invariance(&q, g, &DilatonCheckOptions { max_t_degree: 6, perturb: false }).unwrap();
            assert!(r.passed, "{r}");
        }
        let r = check_dilaton_invariance(&q, 2, &DilatonCheckOptions { max_t_degree: 6, perturb: true }).unwrap();
        assert!(!r.passed);
        assert!(check_dilaton_invariance(&ModelSpec::r_spin(5).unwrap(), 2, &DilatonCheckOptions { max_t_degree: 3, perturb: false }).is_err());
    }
}
