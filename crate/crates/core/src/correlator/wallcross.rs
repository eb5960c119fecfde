//! Coefficientwise comparison of the two sides of the wall-crossing formula.

use num_traits::One;

use super::expand::{add_insertions, expand_f_infinity, expand_f_zero_via_wallcrossing, generic_u, mu_plus_insertions, InsertionSeries};
use super::CorrelatorExpr;
use crate::error::Result;
use crate::model::ModelSpec;
use crate::mu::MuOptions;
use crate::report::{CheckReport, Mismatch};
use crate::series::{fmt_rational, Monomial, Rational, TruncatedSeries, TruncationPolicy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallCrossOptions {
    pub mu: MuOptions,
    /// In genus 0, ignore coefficients of `u`-degree at most one.
    pub g0_mask: bool,
    /// Drop symbols with a broad insertion on both sides.
    pub narrow_only: bool,
    /// Add 1 to one coefficient of `mu^+` on the right-hand side only.
    pub perturb: bool,
}

impl WallCrossOptions {
    pub fn new(model: &ModelSpec) -> Self {
        Self { mu: MuOptions::all_vars(model), g0_mask: true, narrow_only: false, perturb: false }
    }
}

/// Compares two expressions symbol by symbol on the monomials accepted by
/// `mask`. Symbols are never identified with each other.
pub fn compare_exprs(
    check: &str,
    lhs: &CorrelatorExpr,
    rhs: &CorrelatorExpr,
    mask: impl Fn(&Monomial) -> bool,
) -> CheckReport {
    let mut report = CheckReport::new(check);
    let zero = TruncatedSeries::zero(*lhs.policy());
    let mut compare = |sym: String, a: &TruncatedSeries, b: &TruncatedSeries| {
        let mut monos: Vec<&Monomial> = a.terms().map(|(m, _)| m).chain(b.terms().map(|(m, _)| m)).collect();
        monos.sort();
        monos.dedup();
        for m in monos.into_iter().filter(|m| mask(m)) {
            report.compared += 1;
            let (x, y) = (a.coeff(m), b.coeff(m));
            if x != y {
                report.record(Mismatch {
                    symbol: sym.clone(),
                    monomial: m.to_string(),
                    left: fmt_rational(&x),
                    right: fmt_rational(&y),
                });
            }
        }
    };
    for (s, a) in lhs.terms() {
        compare(s.to_string(), a, &rhs.coefficient(s));
    }
    for (s, b) in rhs.terms() {
        if lhs.coefficient(s).is_zero() {
            compare(s.to_string(), &zero, b);
        }
    }
    report
}

/// Adds 1 to the first coefficient of `w` of `t`-degree at least 2 (or to
/// the first coefficient at all). Returns a description of the change.
pub(crate) fn perturb_insertions(w: &mut InsertionSeries) -> Option<String> {
    let pick = w
        .iter()
        .flat_map(|(x, s)| s.terms().map(move |(m, _)| (*x, m.clone())))
        .find(|(_, m)| m.t_degree() >= 2)
        .or_else(|| w.iter().find_map(|(x, s)| s.terms().next().map(|(m, _)| (*x, m.clone()))))?;
    let (x, m) = pick;
    let s = w.get_mut(&x)?;
    s.add_term(m.clone(), Rational::one());
    Some(format!("perturbed coefficient of {m} at {x} by +1"))
}

/// Checks `F^0_g(u, t) = F^infty_g(u + mu^+(t, -psi))` coefficientwise.
pub fn check_wallcrossing_identity(
    model: &ModelSpec,
    genus: u32,
    policy: TruncationPolicy,
    opts: &WallCrossOptions,
) -> Result<CheckReport> {
    let lhs = expand_f_zero_via_wallcrossing(model, genus, &[], &TruncatedSeries::one(policy), &opts.mu, 0);
    let mut w = mu_plus_insertions(model, &opts.mu, policy);
    let perturbed = if opts.perturb { perturb_insertions(&mut w) } else { None };
    let v = add_insertions(&generic_u(model, policy), &w)?;
    let rhs = expand_f_infinity(genus, &v, policy)?;
    let (lhs, rhs) = if opts.narrow_only {
        (lhs.filter_symbols(|s| s.is_narrow(model)), rhs.filter_symbols(|s| s.is_narrow(model)))
    } else {
        (lhs, rhs)
    };
    let masked = genus == 0 && opts.g0_mask;
    let mut report = compare_exprs(&format!("wallcross g={genus}"), &lhs, &rhs, |m| !masked || m.u_degree() >= 2);
    report.note(format!("{} symbols on the left, {} on the right", lhs.len(), rhs.len()));
    if masked {
        report.note("coefficients of u-degree <= 1 excluded");
    }
    if let Some(p) = perturbed {
        report.note(p);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_policy() -> TruncationPolicy {
        TruncationPolicy::new(4, 1, 0, 0, 0).with_psi_degree(1)
    }

    #[test]
    fn spin5_small_truncation_all_genera() {
        let m = ModelSpec::r_spin(5).unwrap();
        for g in 0..3 {
            let mut opts = WallCrossOptions::new(&m);
            let policy = if g == 0 { TruncationPolicy::new(4, 2, 0, 0, 0).with_psi_degree(1) } else { small_policy() };
            let report = check_wallcrossing_identity(&m, g, policy, &opts).unwrap();
            assert!(report.passed, "{report}");
            assert!(report.compared > 0);
            opts.perturb = true;
            let report = check_wallcrossing_identity(&m, g, policy, &opts).unwrap();
            assert!(!report.passed, "negative control at genus {g}");
        }
    }

    #[test]
    fn genus_zero_needs_the_mask() {
        let m = ModelSpec::r_spin(5).unwrap();
        let mut opts = WallCrossOptions::new(&m);
        opts.g0_mask = false;
        let policy = TruncationPolicy::new(4, 2, 0, 0, 0).with_psi_degree(1);
        let report = check_wallcrossing_identity(&m, 0, policy, &opts).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn narrow_filter_keeps_the_identity() {
        let m = ModelSpec::new(6, vec![1, 2, 3]).unwrap();
        let mut opts = WallCrossOptions::new(&m);
        opts.narrow_only = true;
        let report = check_wallcrossing_identity(&m, 1, small_policy(), &opts).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn compare_reports_identical_symbols_only() {
        let p = small_policy();
        let a = CorrelatorExpr::zero(p);
        let mut b = CorrelatorExpr::zero(p);
        let s = super::super::CorrelatorSymbol::new(2, vec![]).unwrap();
        b.add_scalar(s.clone(), &Rational::from_integer(2.into()));
        let r = compare_exprs("demo", &a, &b, |_| true);
        assert!(!r.passed);
        assert_eq!(r.first_mismatch().unwrap().symbol, s.to_string());
    }
}
