use std::f64::consts::{FRAC_PI_2, PI};

use vlab_core::hardy::Classification;
use vlab_core::spectral::*;

const WELL: Shape = Shape::SquareWell { depth: 1.0, radius: 1.0 };
const GAUSS: Shape = Shape::Gaussian { depth: 1.0, width: 1.0 };

fn problem(shape: Shape, d: u32, lambda: f64, r_max: f64, points: usize) -> RadialProblem {
    RadialProblem::new(d, PotentialSpec::new(shape, lambda).unwrap(), 0.0, RadialGrid { r_max, points }).unwrap()
}

/// Ground energy of the three-dimensional square well from `q cot q = −κ`.
fn well_ground_energy(lambda: f64) -> f64 {
    let f = |e: f64| {
        let q = (lambda + e).sqrt();
        q / q.tan() + (-e).sqrt()
    };
    // the ground state has q ∈ (π/2, π)
    let (mut lo, mut hi) = (-lambda + (FRAC_PI_2 * FRAC_PI_2) + 1e-12, (-lambda + PI * PI - 1e-9).min(-1e-14));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn square_well_matches_the_transcendental_equation() {
    for lambda in [4.0, 10.0, 20.0] {
        let exact = well_ground_energy(lambda);
        let got = solve(&problem(WELL, 3, lambda, 30.0, 30_000)).unwrap().ground_energy;
        assert!((got - exact).abs() <= 1e-4 * exact.abs().max(1.0), "λ={lambda}: {got} vs {exact}");
    }
}

#[test]
fn richardson_order_is_two() {
    let e = |points: usize| solve(&problem(GAUSS, 3, 5.0, 20.0, points)).unwrap().ground_energy;
    // Dirichlet box with n interior points: h = r_max/(n+1)
    let (e1, e2, e3) = (e(399), e(799), e(1599));
    let order = ((e1 - e2) / (e2 - e3)).log2();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn sturm_counts_agree_with_eigenvalues() {
    let op = discretize(&problem(WELL, 3, 60.0, 15.0, 3000)).unwrap();
    let evs = op.lowest_eigenvalues(6).unwrap();
    for w in evs.windows(2) {
        assert!(w[0] < w[1]);
    }
    for (k, &ev) in evs.iter().enumerate() {
        assert_eq!(op.count_below(ev - 1e-9), k);
        assert_eq!(op.count_below(ev + 1e-9), k + 1);
    }
    let rep = solve(&problem(WELL, 3, 60.0, 15.0, 3000)).unwrap();
    assert_eq!(rep.negative_count, rep.eigenvalues.len());
    // q cot q = −κ has two roots with q < √60 < 3π
    assert_eq!(rep.negative_count, 2);
}

#[test]
fn ground_energy_is_monotone_in_coupling_and_epsilon() {
    let base = problem(GAUSS, 3, 0.0, 25.0, 2000);
    let mut last = f64::INFINITY;
    for k in 0..10 {
        let e = solve(&base.with_coupling(1.0 + k as f64)).unwrap().ground_energy;
        assert!(e <= last);
        last = e;
    }
    let eps: Vec<f64> = (2..=16).map(|n| 1.0 / n as f64).collect();
    let reps = epsilon_sweep(&base, 4.0, &eps).unwrap();
    for w in reps.windows(2) {
        assert!(w[1].ground_energy >= w[0].ground_energy);
    }
    assert!(epsilon_sweep(&base, 4.0, &[0.1, 0.2]).is_err());
}

#[test]
fn critical_coupling_of_the_square_well() {
    let grid = RadialGrid { r_max: 2.0, points: 4000 };
    for (d, exact) in [(3, FRAC_PI_2 * FRAC_PI_2), (5, PI * PI)] {
        let cc = critical_coupling(WELL, d, grid, OuterBoundary::ZeroEnergyMatched).unwrap();
        assert!((cc.lambda_star - exact).abs() <= 1e-4 * exact, "d={d}: {cc:?}");
        assert!(cc.bracket.0 < cc.bracket.1);
        assert!(cc.witness_energy < 0.0);
        let below = solve(&problem(WELL, d, 0.99 * cc.lambda_star, 2.0, 4000).with_boundary(OuterBoundary::ZeroEnergyMatched)).unwrap();
        assert_eq!(below.negative_count, 0);
        let refined = refine_critical_coupling(WELL, d, cc.lambda_star, 0.01).unwrap();
        assert!((refined - exact).abs() <= 1e-7 * exact, "d={d}: {refined}");
    }
}

#[test]
fn no_bound_states_without_coupling() {
    for shape in [WELL, GAUSS] {
        for d in [3, 4, 7] {
            let rep = solve(&problem(shape, d, 0.0, 20.0, 1000)).unwrap();
            assert_eq!(rep.negative_count, 0);
            assert!(rep.ground_energy > 0.0);
        }
    }
}

fn fit_at_threshold(shape: Shape, d: u32, guess: f64) -> DecayFit {
    let lambda = refine_critical_coupling(shape, d, guess, 0.05).unwrap();
    let sol = zero_energy_solution(shape, d, lambda, 2000.0).unwrap();
    fit_decay_exponent(&sol, (10.0, 1000.0)).unwrap()
}

#[test]
fn decay_exponents_at_threshold() {
    let cases = [
        (WELL, 3, 2.47, 1.0, Classification::Resonance),
        (WELL, 5, 9.87, 3.0, Classification::Eigenvalue),
        (Shape::InverseSquareTail { beta1: 0.75, inner_radius: 1.0 }, 3, 3.37, 1.5, Classification::Marginal),
        (Shape::InverseSquareTail { beta1: 2.0, inner_radius: 1.0 }, 3, 4.12, 2.0, Classification::Eigenvalue),
    ];
    for (shape, d, guess, s, class) in cases {
        let fit = fit_at_threshold(shape, d, guess);
        assert!((fit.s - s).abs() <= 1e-3, "{shape:?} d={d}: {fit:?}");
        assert_eq!(fit.classification, class);
        assert!(fit.accepted && fit.warning.is_none());
    }
}

#[test]
fn decay_fit_is_stable_when_the_span_doubles() {
    let lambda = refine_critical_coupling(WELL, 3, 2.47, 0.05).unwrap();
    let a = fit_decay_exponent(&zero_energy_solution(WELL, 3, lambda, 2000.0).unwrap(), (10.0, 1000.0)).unwrap();
    let b = fit_decay_exponent(&zero_energy_solution(WELL, 3, lambda, 4000.0).unwrap(), (10.0, 1000.0)).unwrap();
    assert!((a.s - b.s).abs() <= 1e-6);
}

fn r_list() -> Vec<f64> {
    (8..=96).map(|k| 10f64.powf(k as f64 / 4.0)).collect()
}

#[test]
fn efimov_counts_saturate_below_the_hardy_threshold() {
    let rs = r_list();
    for c in [0.0, 0.1, 0.2, 0.24] {
        let counts = count_negative_eigenvalues_critical_model(c, &rs).unwrap();
        assert!(counts.iter().all(|e| e.count == 0), "c={c}");
        assert!(is_saturated(&counts));
    }
}

#[test]
fn efimov_counts_grow_logarithmically_above_it() {
    let rs = r_list();
    for c in [0.5, 1.0, 2.0] {
        let counts = count_negative_eigenvalues_critical_model(c, &rs).unwrap();
        assert!(!is_saturated(&counts));
        for e in &counts {
            let exact = exact_critical_model_count(c, e.r) as i64;
            assert!((e.count as i64 - exact).abs() <= 1, "c={c} R={}: {} vs {exact}", e.r, e.count);
        }
        let slope = count_slope(&counts).unwrap();
        let predicted = (c - 0.25f64).sqrt() / PI;
        assert!((slope - predicted).abs() <= 0.05 * predicted, "c={c}: {slope} vs {predicted}");
    }
}

#[test]
fn efimov_threshold_is_bracketed() {
    let b = saturation_threshold(0.2, 0.3, &r_list()).unwrap().expect("bracket");
    assert!(b.lo <= b.estimate && b.estimate <= b.hi);
    assert!((0.25..=0.27).contains(&b.estimate), "{b:?}");
}
