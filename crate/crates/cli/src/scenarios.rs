//! Dispatch from scenario parameters to the core routines, plus the
//! contract assertions each kind is judged by.

use serde_json::{json, Value};
use vlab_core::cutoffs::{
    build_cone_cutoff, build_radial_cutoff, check_cone_profile, check_radial_profile, verify_cone_bound,
    verify_radial_bound, BOUND_TOL,
};
use vlab_core::geometry::{
    azs_ladder, check_cone_separation, check_internal_lower_bound, identity_suite, random_masses, Cluster,
    MassSystem, Partition,
};
use vlab_core::hardy::{fermion1d_constant_check, AnnulusGrid};
use vlab_core::rng::{derive_seed, substream};
use vlab_core::spectral::{
    count_negative_eigenvalues_critical_model, count_slope, critical_coupling, epsilon_sweep, fit_decay_exponent,
    is_saturated, refine_critical_coupling, saturation_threshold, solve, zero_energy_solution, EfimovCount,
    OuterBoundary, SpectralReport,
};
use vlab_core::{PotentialSpec, RadialProblem, Result};

use crate::config::{
    ConeSeparationParams, DecayFitParams, EfimovParams, FermionHardyParams, GeometryIdentitiesParams,
    ImsVerifyParams, Parameters, Scenario, VirtualLevelParams,
};
use crate::report::{Assertion, CsvRow, Evaluation, PlotData, Series};

/// Partition-of-unity tolerance for both cutoff profiles.
pub const UNITY_TOL: f64 = 1e-14;
/// Relative analytic-vs-difference derivative tolerance.
pub const DERIVATIVE_TOL: f64 = 1e-5;

/// Evaluate a scenario. The seed is required by the sampling kinds; config
/// validation guarantees it is present for them.
pub fn evaluate(scenario: &Scenario) -> Result<Evaluation> {
    let seed = scenario.seed.unwrap_or(0);
    match &scenario.parameters {
        Parameters::GeometryIdentities(p) => geometry_identities(p, seed),
        Parameters::ConeSeparation(p) => cone_separation(p, seed),
        Parameters::ImsVerify(p) => ims_verify(p, seed),
        Parameters::FermionHardy(p) => fermion_hardy(p),
        Parameters::VirtualLevel(p) => virtual_level(p),
        Parameters::DecayFit(p) => decay_fit(p),
        Parameters::EfimovCount(p) => efimov_count(p),
    }
}

fn evaluation(assertions: Vec<Assertion>, result: Value) -> Evaluation {
    Evaluation {
        assertions,
        result,
        rows: Vec::new(),
        plot: None,
    }
}

fn geometry_identities(p: &GeometryIdentitiesParams, seed: u64) -> Result<Evaluation> {
    let mut systems = Vec::new();
    let mut assertions = Vec::new();
    let mut index = 0u64;
    for &n in &p.dims {
        for &particles in &p.particles {
            let masses = random_masses(particles, p.mass_range.0, p.mass_range.1, &mut substream(seed, index));
            let sys = MassSystem::new(n, masses.clone())?;
            let rep = identity_suite(&sys, p.draws, derive_seed(seed, index))?;
            assertions.push(Assertion::new(
                format!("identities n={n} N={particles}"),
                rep.failures == 0 && rep.max_error() <= p.tolerance,
                format!("max error {:.3e} over {} draws, {} failures", rep.max_error(), rep.draws, rep.failures),
            ));
            systems.push(json!({ "n": n, "particles": particles, "masses": masses, "report": rep }));
            index += 1;
        }
    }
    Ok(evaluation(assertions, json!({ "tolerance": p.tolerance, "systems": systems })))
}

/// The first `k` clusters (by size, then lexicographically) not contained in a cluster of `z`.
fn lower_bound_clusters(z: &Partition, k: usize) -> Result<Vec<Cluster>> {
    let n = z.particles();
    let mut masks: Vec<u32> = (1u32..(1 << n)).filter(|m| m.count_ones() >= 2).collect();
    masks.sort_by_key(|m| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
    let mut out = Vec::new();
    for m in masks {
        let c = Cluster::new((0..n).filter(|i| m & (1 << i) != 0).collect())?;
        if !z.refines_cluster(&c) {
            out.push(c);
            if out.len() == k {
                break;
            }
        }
    }
    Ok(out)
}

fn cone_separation(p: &ConeSeparationParams, seed: u64) -> Result<Evaluation> {
    let sys = MassSystem::new(p.n, p.masses.clone())?;
    let particles = sys.particles();
    let l_max = particles - 1;
    let clean = azs_ladder(&sys, l_max, p.kappa1, p.kappa1_prime)?;
    let mut assertions = Vec::new();
    let ladder = match p.kappa_inflation {
        Some(f) => clean.with_inflated_kappa(f),
        None => {
            let valid = clean.validate();
            assertions.push(Assertion::new(
                "ladder conditions",
                valid.is_ok(),
                valid.err().map_or_else(|| "all rungs satisfy both inequalities".into(), |e| e.to_string()),
            ));
            clean
        }
    };
    let orders = p.orders.clone().unwrap_or_else(|| (2..=l_max).collect());
    let mut checks = Vec::new();
    let mut stream = 0u64;
    for &l in &orders {
        let parts = Partition::of_order(particles, l);
        let mut pairs = Vec::new();
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                pairs.push((i, j));
            }
        }
        pairs.truncate(p.max_pairs.unwrap_or(usize::MAX));
        if p.samples > 0 && !pairs.is_empty() {
            let (mut samples, mut hits, mut violations) = (0, 0, 0);
            let mut absorbed = vec![0usize; l - 1];
            let mut worst: Option<f64> = None;
            for &(i, j) in &pairs {
                let rep = check_cone_separation(&sys, &parts[i], &parts[j], &ladder, p.samples, derive_seed(seed, stream))?;
                stream += 1;
                samples += rep.samples;
                hits += rep.in_intersection;
                violations += rep.violations;
                for (a, b) in absorbed.iter_mut().zip(&rep.absorbed_by_order) {
                    *a += b;
                }
                if let Some(m) = rep.worst_margin {
                    worst = Some(worst.map_or(m, |w: f64| w.min(m)));
                }
            }
            assertions.push(Assertion::new(
                format!("separation l={l}"),
                violations == 0,
                format!("{violations} violations in {hits} intersection points ({} pairs, {samples} samples)", pairs.len()),
            ));
            checks.push(json!({
                "name": format!("separation_l{l}"),
                "pairs": pairs.len(),
                "samples": samples,
                "in_intersection": hits,
                "violations": violations,
                "absorbed_by_order": absorbed,
                "worst_margin": worst,
            }));
        }
        if p.lower_bound_samples > 0 && l < particles {
            let (mut samples, mut violations, mut runs) = (0, 0, 0);
            let mut worst = f64::INFINITY;
            for z in &parts {
                for c in lower_bound_clusters(z, p.lower_bound_clusters)? {
                    let rep = check_internal_lower_bound(&sys, z, &c, &ladder, p.lower_bound_samples, derive_seed(seed, stream))?;
                    stream += 1;
                    runs += 1;
                    samples += rep.samples;
                    violations += rep.violations;
                    worst = worst.min(rep.worst_ratio);
                }
            }
            assertions.push(Assertion::new(
                format!("lower bound l={l}"),
                violations == 0,
                format!("{violations} violations in {samples} shell samples ({runs} partition/cluster pairs), worst ratio {worst:.6}"),
            ));
            checks.push(json!({
                "name": format!("lower_bound_l{l}"),
                "runs": runs,
                "samples": samples,
                "violations": violations,
                "worst_margin": worst - 1.0,
            }));
        }
    }
    let ladder_rows: Vec<Value> = ladder
        .rungs()
        .iter()
        .map(|r| json!({ "l": r.l, "kappa": r.kappa, "kappa_prime": r.kappa_prime, "d": r.d() }))
        .collect();
    Ok(evaluation(
        assertions,
        json!({
            "system": { "n": p.n, "masses": p.masses },
            "kappa_inflation": p.kappa_inflation,
            "ladder": ladder_rows,
            "checks": checks,
        }),
    ))
}

fn ims_verify(p: &ImsVerifyParams, seed: u64) -> Result<Evaluation> {
    let sys = MassSystem::new(p.cone.n, p.cone.masses.clone())?;
    let z = Partition::from_one_based(sys.particles(), &p.cone.partition)?;
    let corrupt = p.corrupt.clone().unwrap_or(crate::config::CutoffCorruption {
        b_tilde_scale: None,
        log_window_scale: None,
    });
    let mut assertions = Vec::new();
    let mut per_eps = Vec::new();
    for (k, &eps) in p.epsilons.iter().enumerate() {
        let mut radial = build_radial_cutoff(eps, p.radial.b, p.radial.d)?;
        if let Some(f) = corrupt.b_tilde_scale {
            radial = radial.with_b_tilde_scaled(f);
        }
        let rb = verify_radial_bound(&radial, p.radial.grid_points)?;
        let rc = check_radial_profile(&radial, p.profile_points)?;
        let mut cone = build_cone_cutoff(&sys, &z, eps, p.cone.kappa)?;
        if let Some(f) = corrupt.log_window_scale {
            cone = cone.with_log_window_scaled(f);
        }
        let cb = verify_cone_bound(&sys, &cone, p.cone.samples, derive_seed(seed, k as u64))?;
        let cc = check_cone_profile(&cone, p.profile_points)?;
        assertions.push(Assertion::new(
            format!("radial bound eps={eps}"),
            rb.max_ratio <= 1.0 + BOUND_TOL,
            format!("max ratio {:.12} at ln r = {:.6}", rb.max_ratio, rb.argmax_ln_radius),
        ));
        assertions.push(Assertion::new(
            format!("cone bound eps={eps}"),
            cb.max_defect <= 1.0 + BOUND_TOL,
            format!("max defect {:.12} at ln t = {:.6}", cb.max_defect, cb.argmax_ln_t),
        ));
        assertions.push(Assertion::new(
            format!("partition of unity eps={eps}"),
            rc.unity_defect <= UNITY_TOL && cc.unity_defect <= UNITY_TOL,
            format!("radial {:.3e}, cone {:.3e}", rc.unity_defect, cc.unity_defect),
        ));
        assertions.push(Assertion::new(
            format!("derivatives eps={eps}"),
            rc.derivative_error <= DERIVATIVE_TOL && cc.derivative_error <= DERIVATIVE_TOL,
            format!("radial {:.3e}, cone {:.3e}", rc.derivative_error, cc.derivative_error),
        ));
        per_eps.push(json!({
            "epsilon": eps,
            "radial": {
                "b": radial.b(),
                "b_prime": radial.b_prime(),
                "ln_b_tilde": radial.ln_b_tilde(),
                "theta0": radial.theta0(),
                "bound": rb,
                "profile": rc,
            },
            "cone": {
                "kappa": cone.kappa(),
                "kappa_second": cone.kappa_second(),
                "ln_kappa_prime": cone.ln_kappa_prime(),
                "phi0": cone.phi0(),
                "bound": cb,
                "profile": cc,
            },
        }));
    }
    Ok(evaluation(
        assertions,
        json!({ "partition": z.to_string(), "corrupt": p.corrupt, "epsilons": per_eps }),
    ))
}

fn fermion_hardy(p: &FermionHardyParams) -> Result<Evaluation> {
    let grid = AnnulusGrid {
        rho0: p.rho0,
        rho1: p.rho1,
        points: p.points,
        ends: p.ends,
    };
    let rep = fermion1d_constant_check(&grid, p.modes)?;
    let (lo, hi) = (p.target * (1.0 - p.rel_tol), p.target * (1.0 + p.rel_tol));
    let monotone = rep.per_mode.windows(2).all(|w| w[1] >= w[0]);
    let assertions = vec![
        Assertion::new(
            "minimum near target",
            (lo..=hi).contains(&rep.min_rayleigh),
            format!("min Rayleigh quotient {:.10} vs [{lo}, {hi}]", rep.min_rayleigh),
        ),
        Assertion::new(
            "minimizing mode",
            rep.minimizing_mode == 1,
            format!("attained at n = {}", rep.minimizing_mode),
        ),
        Assertion::new("per-mode minima increase", monotone, format!("{:?}", rep.per_mode)),
    ];
    let mut ev = evaluation(assertions, json!({ "grid": grid, "report": rep }));
    ev.plot = Some(PlotData {
        title: "per-mode Rayleigh minimum".into(),
        x_label: "mode n".into(),
        y_label: "min quotient".into(),
        series: vec![Series {
            label: "annulus".into(),
            points: rep.per_mode.iter().enumerate().map(|(k, q)| ((k + 1) as f64, *q)).collect(),
            markers: true,
        }],
    });
    Ok(ev)
}

fn spectral_row(d: u32, shape: &str, lambda: f64, rep: &SpectralReport) -> CsvRow {
    CsvRow {
        d: Some(d),
        shape: Some(shape.to_string()),
        lambda: Some(lambda),
        epsilon: Some(rep.metadata.epsilon),
        ground_energy: Some(rep.ground_energy),
        negative_count: Some(rep.negative_count),
        ..CsvRow::default()
    }
}

fn virtual_level(p: &VirtualLevelParams) -> Result<Evaluation> {
    let shape_name = p.shape.name();
    let cc = critical_coupling(p.shape, p.d, p.grid, p.boundary)?;
    let base = RadialProblem::new(p.d, PotentialSpec::new(p.shape, cc.lambda_star)?, 0.0, p.grid)?.with_boundary(p.boundary);
    let at = solve(&base)?;
    let below_lambda = p.subcritical_factor * cc.lambda_star;
    let below = solve(&base.with_coupling(below_lambda))?;
    let mut assertions = vec![
        Assertion::new(
            "ground energy at critical coupling",
            at.ground_energy <= 0.0 && at.ground_energy >= -p.ground_tol,
            format!("E0 = {:.3e} at lambda* = {:.10}", at.ground_energy, cc.lambda_star),
        ),
        Assertion::new(
            "epsilon witness",
            cc.witness_energy < 0.0,
            format!("E0(eps = 1e-3) = {:.6e}", cc.witness_energy),
        ),
        Assertion::new(
            "no bound state below",
            below.negative_count == 0,
            format!("{} negative eigenvalues at lambda = {below_lambda:.10}", below.negative_count),
        ),
    ];
    if let Some(expected) = p.expected_lambda {
        let rel = (cc.lambda_star / expected - 1.0).abs();
        assertions.push(Assertion::new(
            "critical coupling",
            rel <= p.rel_tol,
            format!("lambda* = {:.10}, reference {expected}, relative deviation {rel:.3e}", cc.lambda_star),
        ));
    }
    let mut rows = vec![spectral_row(p.d, shape_name, cc.lambda_star, &at)];
    let mut sweep_json = Value::Null;
    let mut plot = None;
    if let Some(sw) = p.epsilon_sweep {
        let eps: Vec<f64> = (sw.k_min..=sw.k_max).map(|k| 1.0 / k as f64).collect();
        let reps = epsilon_sweep(&base, cc.lambda_star, &eps)?;
        let negative = reps.iter().all(|r| r.ground_energy < 0.0);
        let increasing = reps.windows(2).all(|w| w[1].ground_energy > w[0].ground_energy);
        assertions.push(Assertion::new(
            "sweep energies negative",
            negative,
            format!(
                "E0 from {:.6e} (eps = {}) to {:.6e} (eps = {})",
                reps[0].ground_energy,
                eps[0],
                reps[reps.len() - 1].ground_energy,
                eps[eps.len() - 1]
            ),
        ));
        assertions.push(Assertion::new(
            "sweep energies increase as eps decreases",
            increasing,
            format!("{} values", reps.len()),
        ));
        rows.extend(reps.iter().map(|r| spectral_row(p.d, shape_name, cc.lambda_star, r)));
        sweep_json = json!(reps
            .iter()
            .map(|r| json!({ "epsilon": r.metadata.epsilon, "ground_energy": r.ground_energy, "negative_count": r.negative_count }))
            .collect::<Vec<_>>());
        plot = Some(PlotData {
            title: format!("{shape_name}, d = {}: ground energy along the epsilon sweep", p.d),
            x_label: "log10 eps".into(),
            y_label: "E0".into(),
            series: vec![Series {
                label: "h_eps".into(),
                points: reps.iter().map(|r| (r.metadata.epsilon.log10(), r.ground_energy)).collect(),
                markers: true,
            }],
        });
    }
    let result = json!({
        "critical": cc,
        "at_critical": at,
        "below": { "lambda": below_lambda, "negative_count": below.negative_count, "ground_energy": below.ground_energy },
        "sweep": sweep_json,
    });
    Ok(Evaluation {
        assertions,
        result,
        rows,
        plot,
    })
}

fn decay_fit(p: &DecayFitParams) -> Result<Evaluation> {
    let cc = critical_coupling(p.shape, p.d, p.grid, OuterBoundary::ZeroEnergyMatched)?;
    let lambda = refine_critical_coupling(p.shape, p.d, cc.lambda_star, p.refine_window)?;
    let sol = zero_energy_solution(p.shape, p.d, lambda, p.r_end)?;
    let fit = fit_decay_exponent(&sol, p.window)?;
    let long = zero_energy_solution(p.shape, p.d, lambda, 2.0 * p.r_end)?;
    let wide = fit_decay_exponent(&long, (p.window.0, 2.0 * p.window.1))?;
    let shift = (wide.s - fit.s).abs();
    let mut assertions = vec![
        Assertion::new(
            "fit accepted",
            fit.accepted,
            format!("max residual {:.3e}", fit.max_residual),
        ),
        Assertion::new(
            "no growing branch",
            !sol.growth_flagged,
            format!("growing fraction {:.3e}", sol.growing_fraction),
        ),
        Assertion::new(
            "stable under doubled span",
            shift <= fit.stderr + p.stability_tol,
            format!("s = {:.8} vs {:.8} with r_end doubled (stderr {:.3e})", fit.s, wide.s, fit.stderr),
        ),
    ];
    if let Some(s) = p.expected_s {
        assertions.push(Assertion::new(
            "decay exponent",
            (fit.s - s).abs() <= p.s_tol,
            format!("s = {:.6} vs {s} +/- {}", fit.s, p.s_tol),
        ));
    }
    if let Some(c) = p.expected_classification {
        assertions.push(Assertion::new(
            "classification",
            fit.classification == c,
            format!("{} vs {}", fit.classification.as_str(), c.as_str()),
        ));
    }
    let rows = vec![CsvRow {
        d: Some(p.d),
        shape: Some(p.shape.name().to_string()),
        lambda: Some(lambda),
        epsilon: Some(0.0),
        fitted_s: Some(fit.s),
        classification: Some(fit.classification.as_str().to_string()),
        ..CsvRow::default()
    }];
    let in_window: Vec<(f64, f64)> = sol
        .r
        .iter()
        .zip(&sol.ln_abs_psi)
        .filter(|(r, _)| **r >= p.window.0 * 0.1)
        .map(|(r, l)| (r.log10(), l / std::f64::consts::LN_10))
        .collect();
    let anchor = in_window
        .iter()
        .find(|(x, _)| *x >= p.window.0.log10())
        .copied()
        .unwrap_or((0.0, 0.0));
    let fit_line = [p.window.0.log10(), p.window.1.log10()]
        .iter()
        .map(|&x| (x, anchor.1 - fit.s * (x - anchor.0)))
        .collect();
    let plot = Some(PlotData {
        title: format!("{}, d = {}: zero-energy solution, s = {:.4}", p.shape.name(), p.d, fit.s),
        x_label: "log10 r".into(),
        y_label: "log10 |psi|".into(),
        series: vec![
            Series {
                label: "psi".into(),
                points: in_window,
                markers: false,
            },
            Series {
                label: "fit".into(),
                points: fit_line,
                markers: false,
            },
        ],
    });
    Ok(Evaluation {
        assertions,
        result: json!({
            "matrix_lambda_star": cc.lambda_star,
            "lambda": lambda,
            "growing_fraction": sol.growing_fraction,
            "fit": fit,
            "doubled_span_fit": wide,
        }),
        rows,
        plot,
    })
}

fn count_plot(title: String, c: f64, counts: &[EfimovCount]) -> PlotData {
    PlotData {
        title,
        x_label: "ln R".into(),
        y_label: "negative eigenvalues".into(),
        series: vec![Series {
            label: format!("c = {c}"),
            points: counts.iter().map(|e| (e.r.ln(), e.count as f64)).collect(),
            markers: true,
        }],
    }
}

fn count_row(c: f64, count: Option<usize>) -> CsvRow {
    CsvRow {
        shape: Some("inverse_square_model".into()),
        lambda: Some(c),
        negative_count: count,
        ..CsvRow::default()
    }
}

fn efimov_count(p: &EfimovParams) -> Result<Evaluation> {
    match p {
        EfimovParams::Saturation { c, r } => {
            let counts = count_negative_eigenvalues_critical_model(*c, &r.values())?;
            let last = counts.last().map(|e| e.count);
            let mut ev = evaluation(
                vec![Assertion::new(
                    "counts saturate",
                    is_saturated(&counts),
                    format!("{:?}", counts.iter().map(|e| e.count).collect::<Vec<_>>()),
                )],
                json!({ "c": c, "counts": counts }),
            );
            ev.rows = vec![count_row(*c, last)];
            ev.plot = Some(count_plot(format!("-u'' - {c}/r^2 on [1, R]"), *c, &counts));
            Ok(ev)
        }
        EfimovParams::Growth {
            c,
            r,
            expected_slope,
            rel_tol,
        } => {
            let counts = count_negative_eigenvalues_critical_model(*c, &r.values())?;
            let slope = count_slope(&counts);
            let rel = slope.map(|s| (s / expected_slope - 1.0).abs());
            let mut ev = evaluation(
                vec![
                    Assertion::new(
                        "counts keep growing",
                        !is_saturated(&counts),
                        format!("last count {}", counts.last().map_or(0, |e| e.count)),
                    ),
                    Assertion::new(
                        "growth rate",
                        rel.is_some_and(|r| r <= *rel_tol),
                        format!("slope {slope:?} vs {expected_slope}, relative deviation {rel:?}"),
                    ),
                ],
                json!({ "c": c, "counts": counts, "slope": slope }),
            );
            ev.rows = vec![count_row(*c, counts.last().map(|e| e.count))];
            ev.plot = Some(count_plot(format!("-u'' - {c}/r^2 on [1, R]"), *c, &counts));
            Ok(ev)
        }
        EfimovParams::Threshold { c_lo, c_hi, r, bracket } => {
            let found = saturation_threshold(*c_lo, *c_hi, &r.values())?;
            let inside = found.is_some_and(|b| bracket.0 <= b.estimate && b.estimate <= bracket.1);
            let mut ev = evaluation(
                vec![Assertion::new(
                    "threshold bracketed",
                    inside,
                    match found {
                        Some(b) => format!("estimate {:.6} in [{}, {}]", b.estimate, bracket.0, bracket.1),
                        None => format!("saturation does not change between c = {c_lo} and c = {c_hi}"),
                    },
                )],
                json!({ "c_lo": c_lo, "c_hi": c_hi, "threshold": found }),
            );
            ev.rows = vec![count_row(found.map_or(f64::NAN, |b| b.estimate), None)];
            Ok(ev)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_clusters_skip_refined_ones() {
        let z = Partition::from_one_based(4, &[vec![1, 2], vec![3, 4]]).unwrap();
        let cs = lower_bound_clusters(&z, 3).unwrap();
        assert_eq!(cs.len(), 3);
        for c in &cs {
            assert!(!z.refines_cluster(c));
            assert!(c.len() >= 2);
        }
        assert_eq!(cs[0].members(), &[0, 2]);
    }
}
