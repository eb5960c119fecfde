use wallcross_core::correlator::*;
use wallcross_core::localization::{check_genus0_resummation, Genus0Options};
use wallcross_core::model::ModelSpec;
use wallcross_core::mu::*;
use wallcross_core::series::{rat, Gen, Monomial, TruncationPolicy};

#[test]
fn wallcrossing_across_models() {
    let models = [ModelSpec::r_spin(3).unwrap(), ModelSpec::new(4, vec![1, 2]).unwrap(), ModelSpec::quintic()];
    for m in &models {
        for g in 0..=2 {
            let policy = TruncationPolicy::new(3, 2, 0, 0, 0).with_psi_degree(1);
            let r = check_wallcrossing_identity(m, g, policy, &WallCrossOptions::new(m)).unwrap();
            assert!(r.passed, "{m} {r}");
        }
    }
}

#[test]
fn narrow_redefined_mode_keeps_the_identity() {
    let m = ModelSpec::new(6, vec![1, 2, 3]).unwrap();
    let mut opts = WallCrossOptions::new(&m);
    opts.mu.broad_mode = BroadMode::NarrowRedefined;
    opts.narrow_only = true;
    let policy = TruncationPolicy::new(3, 1, 0, 0, 0).with_psi_degree(1);
    let r = check_wallcrossing_identity(&m, 1, policy, &opts).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn quintic_i_functions_leading_terms() {
    // t^5: B = (2^5) has k = 1, ell_alpha = 1, z^1 and (1/5)^5 / 5!.
    // t^6: B = (2^6) has k = 2, ell_alpha = 1, z^0 and (2/5)^5 / 6!.
    let q = ModelSpec::quintic();
    let (i0, i1) = extract_i_functions(&q, TruncationPolicy::new(6, 0, -7, 2, 0)).unwrap();
    assert_eq!(i0.constant_term(), rat(1, 1));
    assert_eq!(i0.coeff(&Monomial::pow_of(Gen::T(2), 5)), rat(1, 375000));
    assert_eq!(i1.coeff(&Monomial::var(Gen::T(2))), rat(1, 1));
    assert_eq!(i1.coeff(&Monomial::pow_of(Gen::T(2), 6)), rat(2, 140625));
    for e in 2..=4 {
        assert_eq!(i1.coeff(&Monomial::pow_of(Gen::T(2), e)), rat(0, 1));
    }
}

#[test]
fn genus_zero_resummation_small_models() {
    for m in [ModelSpec::r_spin(2).unwrap(), ModelSpec::new(3, vec![1, 1, 1]).unwrap()] {
        let r = check_genus0_resummation(&m, &Genus0Options::new(&m, 5)).unwrap();
        assert!(r.passed, "{r}");
    }
}
