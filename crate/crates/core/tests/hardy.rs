use proptest::prelude::*;
use std::f64::consts::PI;
use vlab_core::hardy::*;

#[test]
fn hardy_constants() {
    assert_eq!(hardy_constant(3).unwrap(), 0.25);
    assert_eq!(hardy_constant(4).unwrap(), 1.0);
    assert_eq!(hardy_constant(9).unwrap(), 12.25);
    assert!(hardy_constant(2).is_err());
}

#[test]
fn n_body_weight_is_the_hardy_exponent_of_the_relative_space() {
    for n in 3..=5u32 {
        for particles in 3..=7u32 {
            let b = decay_bound(DecayQuery::NBody { n, particles, beta: None }).unwrap();
            let alpha = b.alpha_sup.unwrap();
            assert_eq!(alpha * alpha, hardy_constant(n * (particles - 1)).unwrap());
            assert!(b.kappa.is_none());
        }
    }
    let b = decay_bound(DecayQuery::NBody { n: 3, particles: 3, beta: Some(1.5) }).unwrap();
    assert_eq!(b.kappa, Some(0.25));
    assert!(decay_bound(DecayQuery::NBody { n: 3, particles: 3, beta: Some(2.0) }).is_err());
    assert!(decay_bound(DecayQuery::NBody { n: 2, particles: 3, beta: None }).is_err());
}

#[test]
fn one_body_modes() {
    let b = decay_bound(DecayQuery::OneBodyShortRange { d: 5 }).unwrap();
    assert_eq!(b.alpha_sup, Some(1.5));
    let b = decay_bound(DecayQuery::OneBodyLongRangeCritical { d: 3, beta1: 0.75 }).unwrap();
    assert_eq!(b.alpha_sup, Some(1.0));
    let b = decay_bound(DecayQuery::OneBodyLongRangeSubcritical { d: 3, beta1: 1.0, beta2: 1.0 }).unwrap();
    assert_eq!(b.kappa, Some(0.5));
    assert!(decay_bound(DecayQuery::OneBodyLongRangeSubcritical { d: 3, beta1: 1.0, beta2: 2.0 }).is_err());
    assert!(decay_bound(DecayQuery::OneBodyLongRangeCritical { d: 3, beta1: 0.0 }).is_err());
}

#[test]
fn classification_thresholds() {
    assert_eq!(eigenvalue_or_resonance(3, 1.0), Classification::Resonance);
    assert_eq!(eigenvalue_or_resonance(3, 2.0), Classification::Eigenvalue);
    assert_eq!(eigenvalue_or_resonance(3, 1.5), Classification::Marginal);
    assert_eq!(classify_decay(3, 1.52, 0.05), Classification::Marginal);
    assert_eq!(classify_decay(3, 1.6, 0.05), Classification::Eigenvalue);
    assert_eq!(Classification::Resonance.as_str(), "RESONANCE");
    assert_eq!(serde_json::to_string(&Classification::Eigenvalue).unwrap(), "\"EIGENVALUE\"");
}

fn rank(c: Classification) -> u8 {
    match c {
        Classification::Resonance => 0,
        Classification::Marginal => 1,
        Classification::Eigenvalue => 2,
    }
}

proptest! {
    #[test]
    fn classification_is_monotone_in_s(d in 3u32..12, s1 in 0.0f64..10.0, s2 in 0.0f64..10.0, band in 0.0f64..0.2) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(rank(classify_decay(d, lo, band)) <= rank(classify_decay(d, hi, band)));
    }
}

fn annulus(rho1: f64, points: usize, ends: AnnulusEnds) -> AnnulusGrid {
    AnnulusGrid { rho0: 1.0, rho1, points, ends }
}

#[test]
fn free_annulus_attains_nine_in_the_first_mode() {
    let rep = fermion1d_constant_check(&annulus(10.0, 400, AnnulusEnds::Free), 4).unwrap();
    assert_eq!(rep.minimizing_mode, 1);
    assert!((rep.min_rayleigh - 9.0).abs() <= 1e-9, "{rep:?}");
    assert!(rep.per_mode[1] >= 36.0 * (1.0 - 1e-12));
    for (n, q) in rep.per_mode.iter().enumerate() {
        let floor = 9.0 * ((n + 1) * (n + 1)) as f64;
        assert!(*q >= floor * (1.0 - 1e-12) && *q <= floor * (1.0 + 1e-9));
    }
}

#[test]
fn dirichlet_annulus_approaches_nine_from_above() {
    let mut last = f64::INFINITY;
    for k in 1..=6 {
        let ratio = 2f64.powi(k);
        let rep = fermion1d_constant_check(&annulus(ratio, 800, AnnulusEnds::Dirichlet), 2).unwrap();
        let exact = 9.0 + (PI / ratio.ln()).powi(2);
        assert!(rep.min_rayleigh > 9.0);
        assert!(rep.min_rayleigh < last);
        // P1 elements overestimate the eigenvalue
        assert!(rep.min_rayleigh >= exact * (1.0 - 1e-12));
        assert!((rep.min_rayleigh - exact).abs() <= 1e-4 * exact, "ratio {ratio}: {} vs {exact}", rep.min_rayleigh);
        last = rep.min_rayleigh;
    }
}

#[test]
fn degenerate_annuli_are_rejected() {
    assert!(fermion1d_constant_check(&annulus(1.0, 100, AnnulusEnds::Free), 1).is_err());
    assert!(fermion1d_constant_check(&annulus(2.0, 2, AnnulusEnds::Dirichlet), 1).is_err());
    assert!(fermion1d_constant_check(&annulus(2.0, 100, AnnulusEnds::Free), 0).is_err());
}
