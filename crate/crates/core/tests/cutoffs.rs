use vlab_core::cutoffs::*;
use vlab_core::geometry::{MassSystem, Partition};
use vlab_core::hardy::hardy_constant;

const EPSILONS: [f64; 3] = [0.1, 0.01, 0.001];

fn uniform(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

#[test]
fn radial_pair_is_a_partition_of_unity() {
    for eps in EPSILONS {
        let p = build_radial_cutoff(eps, 2.0, 3).unwrap();
        for ln_r in uniform(p.ln_b() - 1.0, p.ln_b_tilde() + 1.0, 5001) {
            let (a, b) = p.chi_at_log(ln_r);
            assert!((a * a + b * b - 1.0).abs() <= 1e-14, "ln r = {ln_r}");
            assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        }
        assert_eq!(p.chi(0.5 * p.b()), (1.0, 0.0));
        assert_eq!(p.chi_at_log(p.ln_b_tilde() + 0.5), (0.0, 1.0));
    }
}

#[test]
fn radial_derivatives_match_finite_differences() {
    for eps in EPSILONS {
        let p = build_radial_cutoff(eps, 1.0, 3).unwrap();
        let interior = uniform(p.ln_b(), p.ln_b_tilde(), 400)
            .filter(|l| (l - p.ln_b()).abs() > 1e-3 && (l - p.ln_b_prime()).abs() > 1e-3 && (l - p.ln_b_tilde()).abs() > 1e-3);
        for ln_r in interior {
            let h = 1e-6;
            let (a1, b1) = p.chi_at_log(ln_r + h);
            let (a0, b0) = p.chi_at_log(ln_r - h);
            let (da, db) = p.scaled_derivs_at_log(ln_r);
            let scale = da.abs().max(db.abs()).max(1e-3);
            assert!(((a1 - a0) / (2.0 * h) - da).abs() <= 1e-5 * scale, "ε={eps} ln r={ln_r}");
            assert!(((b1 - b0) / (2.0 * h) - db).abs() <= 1e-5 * scale, "ε={eps} ln r={ln_r}");
        }
    }
}

#[test]
fn radial_bound_holds_and_fails_when_the_tail_is_cut_short() {
    for eps in EPSILONS {
        let p = build_radial_cutoff(eps, 1.0, 3).unwrap();
        let good = verify_radial_bound(&p, 20_000).unwrap();
        assert!(good.max_ratio <= 1.0 + BOUND_TOL, "ε={eps}: {good:?}");
        let bad = verify_radial_bound(&p.with_b_tilde_scaled(0.5), 20_000).unwrap();
        // halving b̃ shortens the log window by ln 2; for small ε that is a
        // small relative change, so only the ratio's growth is guaranteed
        assert!(bad.max_ratio > good.max_ratio, "ε={eps}");
    }
    let p = build_radial_cutoff(0.1, 1.0, 3).unwrap();
    let bad = p.with_b_tilde_scaled((-(p.ln_b_tilde() - p.ln_b_prime()) * 0.9).exp());
    assert!(verify_radial_bound(&bad, 20_000).unwrap().max_ratio > 1.0 + BOUND_TOL);
}

#[test]
fn inside_the_ball_the_gradient_vanishes() {
    let p = build_radial_cutoff(0.01, 3.0, 4).unwrap();
    let rep = verify_radial_bound_on(&p, -20.0, p.ln_b(), 1000).unwrap();
    assert_eq!(rep.max_ratio, 0.0);
}

#[test]
fn smaller_epsilon_pushes_the_outer_radius_out() {
    let mut last = f64::NEG_INFINITY;
    for k in 0..12 {
        let eps = 0.5f64.powi(k);
        let p = build_radial_cutoff(eps, 1.0, 3).unwrap();
        assert!(p.ln_b_tilde() > last);
        assert!(p.ln_b() < p.ln_b_prime() && p.ln_b_prime() < p.ln_b_tilde());
        last = p.ln_b_tilde();
    }
}

#[test]
fn radial_construction_rejects_bad_input() {
    assert!(build_radial_cutoff(0.0, 1.0, 3).is_err());
    assert!(build_radial_cutoff(0.1, -1.0, 3).is_err());
    assert!(build_radial_cutoff(0.1, 1.0, 2).is_err());
    let p = build_radial_cutoff(0.1, 1.0, 3).unwrap();
    assert!(verify_radial_bound(&p, 99).is_err());
}

/// `∫|∇χ₁|²+|∇χ₂|² f² ≤ ε∫|x|⁻²f² ≤ (ε/C_H)∫|∇f|²` for radial Gaussians in ℝ³.
#[test]
fn hardy_bound_for_gaussians() {
    let ch = hardy_constant(3).unwrap();
    for eps in EPSILONS {
        let p = build_radial_cutoff(eps, 1.0, 3).unwrap();
        for sigma in [0.3, 1.0, 4.0, 30.0, 500.0] {
            let f = |r: f64| (-(r * r) / (2.0 * sigma * sigma)).exp();
            let df = |r: f64| -r / (sigma * sigma) * f(r);
            // radial integrals in t = ln r: ∫ g(r) r² dr = ∫ g r³ dt
            let (lo, hi) = (p.ln_b() - 30.0, (sigma.ln() + 4.0).max(p.ln_b() + 1.0));
            let n = 200_000;
            let dt = (hi - lo) / n as f64;
            let (mut lhs, mut grad) = (0.0, 0.0);
            for k in 0..=n {
                let t = lo + k as f64 * dt;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                let r = t.exp();
                let (du, dv) = p.scaled_derivs_at_log(t);
                lhs += w * (du * du + dv * dv) * f(r).powi(2) * r;
                grad += w * df(r).powi(2) * r.powi(3);
            }
            lhs *= dt;
            grad *= dt;
            assert!(lhs <= eps / ch * grad * (1.0 + 1e-9), "ε={eps} σ={sigma}: {lhs} vs {}", eps / ch * grad);
        }
    }
}

fn cone_pair(eps: f64) -> (MassSystem, ConeCutoffPair) {
    let sys = MassSystem::new(3, vec![1.0, 2.0, 5.0, 0.5]).unwrap();
    let z = Partition::from_one_based(4, &[vec![1, 2], vec![3, 4]]).unwrap();
    let p = build_cone_cutoff(&sys, &z, eps, 0.8).unwrap();
    (sys, p)
}

#[test]
fn cone_profile_is_a_partition_of_unity_with_plateaus() {
    for eps in EPSILONS {
        let (_, p) = cone_pair(eps);
        assert_eq!(p.profile(0.0), (1.0, 0.0));
        assert_eq!(p.profile(0.5 * p.kappa_prime()), (1.0, 0.0));
        assert_eq!(p.profile(p.kappa()), (0.0, 1.0));
        assert_eq!(p.profile(2.0 * p.kappa()), (0.0, 1.0));
        for ln_t in uniform(p.ln_kappa_prime() - 1.0, p.kappa().ln() + 1.0, 5001) {
            let q = p.profile_at_log(ln_t);
            assert!((q.u * q.u + q.v * q.v - 1.0).abs() <= 1e-14);
        }
    }
}

#[test]
fn cone_derivatives_match_finite_differences() {
    for eps in EPSILONS {
        let (_, p) = cone_pair(eps);
        let (l0, l2, l1) = (p.ln_kappa_prime(), p.kappa_second().ln(), p.kappa().ln());
        for ln_t in uniform(l0, l1, 400).filter(|l| [l0, l2, l1].iter().all(|j| (l - j).abs() > 1e-3)) {
            let h = 1e-6;
            let (a, b) = (p.profile_at_log(ln_t + h), p.profile_at_log(ln_t - h));
            let q = p.profile_at_log(ln_t);
            let scale = q.t_du.abs().max(q.t_dv.abs()).max(1e-3);
            assert!(((a.u - b.u) / (2.0 * h) - q.t_du).abs() <= 1e-5 * scale, "ε={eps} ln t={ln_t}");
            assert!(((a.v - b.v) / (2.0 * h) - q.t_dv).abs() <= 1e-5 * scale, "ε={eps} ln t={ln_t}");
        }
    }
}

#[test]
fn cone_bound_holds_and_fails_for_a_narrow_log_window() {
    for eps in EPSILONS {
        let (sys, p) = cone_pair(eps);
        let rep = verify_cone_bound(&sys, &p, 4000, 11).unwrap();
        assert!(rep.max_defect <= 1.0 + BOUND_TOL, "ε={eps}: {rep:?}");
        assert!(rep.configuration_samples > 0);
        let bad = verify_cone_bound(&sys, &p.with_log_window_scaled(1e-3), 4000, 11).unwrap();
        assert!(bad.max_defect > 1.0 + BOUND_TOL, "ε={eps}: {bad:?}");
    }
}

#[test]
fn cone_bound_is_reproducible() {
    let (sys, p) = cone_pair(0.01);
    assert_eq!(verify_cone_bound(&sys, &p, 2000, 3).unwrap(), verify_cone_bound(&sys, &p, 2000, 3).unwrap());
}
