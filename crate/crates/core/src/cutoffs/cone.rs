//! Cone pair `u_Z = u₁(t)`, `v_Z = v₁(t)` in the ratio `t = |q(Z)|_m/|ξ(Z)|_m`.
//!
//! `v₁ = 0` for `t ≤ κ′`, `v₁ = v₀·ln(t/κ′)/ln(κ″/κ′)` on `[κ′, κ″]`,
//! `v₁ = cos(φ₀(1 − s(τ)))` on `[κ″, κ]` and `v₁ = 1` beyond, with
//! `u₁ = √(1 − v₁²)`. Since `|∇t|²_m = (1+t²)/|ξ|²_m`, the localization
//! error relative to `ε[v²|x|⁻² + u²|q|⁻²]` depends on `t` alone.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{smoothstep, smoothstep_deriv};
use crate::error::{arg, Result};
use crate::geometry::cones::{gaussian_relative, norm};
use crate::geometry::projections::split;
use crate::geometry::{MassSystem, Partition};
use crate::rng;

/// Below this `ln t` the verifier evaluates the defect from `t` alone
/// instead of building a configuration.
const LN_T_CONFIGURATION_FLOOR: f64 = -200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeCutoffPair {
    partition: Partition,
    epsilon: f64,
    kappa: f64,
    kappa_second: f64,
    ln_kappa_prime: f64,
    /// `v₁(κ″) = cos φ₀`.
    phi0: f64,
}

/// Profile values with `t`-scaled derivatives `t·u₁′`, `t·v₁′`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeProfilePoint {
    pub u: f64,
    pub v: f64,
    pub t_du: f64,
    pub t_dv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeBoundReport {
    pub max_defect: f64,
    pub argmax_ln_t: f64,
    /// Samples evaluated on explicit configurations with vector gradients.
    pub configuration_samples: usize,
    /// Samples so deep in the log window that only the ratio form is used.
    pub ratio_samples: usize,
}

/// Build the cone pair for `Z` with outer aperture `κ` and error level `ε`.
pub fn build_cone_cutoff(sys: &MassSystem, z: &Partition, epsilon: f64, kappa: f64) -> Result<ConeCutoffPair> {
    sys.check_partition(z)?;
    if z.order() <= 1 || z.order() >= sys.particles() {
        return arg(format!("cone cutoff needs 1 < |Z| < N, got |Z| = {}", z.order()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite() && kappa > 0.0 && kappa.is_finite()) {
        return arg(format!("ε and κ must be positive, got ε={epsilon}, κ={kappa}"));
    }
    let kappa_second = 0.5 * kappa;
    let width = kappa - kappa_second;
    // s′ ≤ 3/2 and 1+t² ≤ 1+κ² give the |x|⁻² regime bound
    let phi0 = epsilon.min(1.0).sqrt() * width / (1.5 * (1.0 + kappa * kappa));
    let (sin, cos) = phi0.sin_cos();
    let window = cos * (1.0 + kappa_second * kappa_second).sqrt() / (epsilon.sqrt() * sin * sin);
    Ok(ConeCutoffPair {
        partition: z.clone(),
        epsilon,
        kappa,
        kappa_second,
        ln_kappa_prime: kappa_second.ln() - window,
        phi0,
    })
}

impl ConeCutoffPair {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_second(&self) -> f64 {
        self.kappa_second
    }

    /// `κ′`; underflows to zero for small `ε`.
    pub fn kappa_prime(&self) -> f64 {
        self.ln_kappa_prime.exp()
    }

    pub fn ln_kappa_prime(&self) -> f64 {
        self.ln_kappa_prime
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// `ln(κ″/κ′)`.
    pub fn log_window(&self) -> f64 {
        self.kappa_second.ln() - self.ln_kappa_prime
    }

    /// Copy with the log window `ln(κ″/κ′)` multiplied by `factor`, moving
    /// `κ′` toward `κ″` when `factor < 1`.
    pub fn with_log_window_scaled(&self, factor: f64) -> Self {
        Self {
            ln_kappa_prime: self.kappa_second.ln() - factor * self.log_window(),
            ..self.clone()
        }
    }

    pub fn profile_at_log(&self, ln_t: f64) -> ConeProfilePoint {
        if ln_t <= self.ln_kappa_prime {
            return ConeProfilePoint {
                u: 1.0,
                v: 0.0,
                t_du: 0.0,
                t_dv: 0.0,
            };
        }
        let t = ln_t.exp();
        if t >= self.kappa {
            return ConeProfilePoint {
                u: 0.0,
                v: 1.0,
                t_du: 0.0,
                t_dv: 0.0,
            };
        }
        if t >= self.kappa_second {
            let width = self.kappa - self.kappa_second;
            let tau = ((t - self.kappa_second) / width).clamp(0.0, 1.0);
            let angle = self.phi0 * (1.0 - smoothstep(tau));
            let rate = t * self.phi0 * smoothstep_deriv(tau) / width;
            let (sin, cos) = angle.sin_cos();
            return ConeProfilePoint {
                u: sin,
                v: cos,
                t_du: -rate * cos,
                t_dv: rate * sin,
            };
        }
        let v0 = self.phi0.cos();
        let window = self.log_window();
        let v = v0 * (ln_t - self.ln_kappa_prime) / window;
        let u = (1.0 - v * v).sqrt();
        let t_dv = v0 / window;
        ConeProfilePoint {
            u,
            v,
            t_du: -v * t_dv / u,
            t_dv,
        }
    }

    /// `(u_Z, v_Z)` at ratio `t ≥ 0`.
    pub fn profile(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (1.0, 0.0);
        }
        let p = self.profile_at_log(t.ln());
        (p.u, p.v)
    }

    /// `(u₁′(t), v₁′(t))` at ratio `t > 0`.
    pub fn profile_derivs(&self, t: f64) -> (f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        let p = self.profile_at_log(t.ln());
        (p.t_du / t, p.t_dv / t)
    }

    /// `(|∇u|² + |∇v|²)/(ε[v²|x|⁻² + u²|q|⁻²])` as a function of `ln t`.
    pub fn defect_at_log(&self, ln_t: f64) -> f64 {
        let p = self.profile_at_log(ln_t);
        let grad = p.t_du * p.t_du + p.t_dv * p.t_dv;
        if grad == 0.0 {
            return 0.0;
        }
        let t2 = (2.0 * ln_t).exp();
        let one_t2 = 1.0 + t2;
        grad * one_t2 / (self.epsilon * (p.v * p.v * t2 / one_t2 + p.u * p.u))
    }

    /// Left side of the closed-form `|q|⁻²` regime condition at `t = κ″`:
    /// `v₁(κ″)²(ln(κ″/κ′))⁻²(1+κ″²)/(1−v₁(κ″)²)²`, which must not exceed `ε`.
    pub fn log_regime_condition(&self) -> f64 {
        let v0 = self.phi0.cos();
        let s2 = self.phi0.sin().powi(2);
        v0 * v0 * (1.0 + self.kappa_second * self.kappa_second) / (self.log_window().powi(2) * s2 * s2)
    }
}

/// Sample ratios in `[κ′, κ]` and report the worst localization defect.
///
/// Half of the samples are uniform in `t ∈ [κ″, κ]`, half uniform in
/// `ln t ∈ [ln κ′, ln κ″]`. Where `t` is representable the point is realised
/// as a configuration `ξ̂ + t·q̂` and the gradients are built from
/// `∇t = t(q/|q|² − ξ/|ξ|²)`.
pub fn verify_cone_bound(
    sys: &MassSystem,
    pair: &ConeCutoffPair,
    samples: usize,
    seed: u64,
) -> Result<ConeBoundReport> {
    if samples < 1000 {
        return arg(format!("samples must be at least 1000, got {samples}"));
    }
    let z = &pair.partition;
    sys.check_partition(z)?;
    let mut rng = rng::seeded(seed);
    let mut report = ConeBoundReport {
        max_defect: 0.0,
        argmax_ln_t: pair.ln_kappa_prime,
        configuration_samples: 0,
        ratio_samples: 0,
    };
    let ln_k2 = pair.kappa_second.ln();
    for k in 0..samples {
        let w: f64 = rng.random();
        let ln_t = if k % 2 == 0 {
            (pair.kappa_second + w * (pair.kappa - pair.kappa_second)).ln()
        } else {
            pair.ln_kappa_prime + w * (ln_k2 - pair.ln_kappa_prime)
        };
        let defect = if ln_t > LN_T_CONFIGURATION_FLOOR {
            report.configuration_samples += 1;
            configuration_defect(sys, pair, ln_t.exp(), &mut rng)
        } else {
            report.ratio_samples += 1;
            pair.defect_at_log(ln_t)
        };
        if defect > report.max_defect {
            report.max_defect = defect;
            report.argmax_ln_t = ln_t;
        }
    }
    Ok(report)
}

fn configuration_defect(sys: &MassSystem, pair: &ConeCutoffPair, t: f64, rng: &mut rng::Rng) -> f64 {
    let z = &pair.partition;
    let (q_dir, xi_dir) = loop {
        let (q, xi) = split(sys, z, &gaussian_relative(sys, rng));
        let (nq, nxi) = (norm(sys, &q), norm(sys, &xi));
        if nq > 0.0 && nxi > 0.0 {
            break (q.scaled(nq.recip()), xi.scaled(nxi.recip()));
        }
    };
    let x = xi_dir.add(&q_dir.scaled(t));
    let (q, xi) = split(sys, z, &x);
    let (nq, nxi) = (norm(sys, &q), norm(sys, &xi));
    let t = nq / nxi;
    let grad_t = q.scaled(t / (nq * nq)).sub(&xi.scaled(t / (nxi * nxi)));
    let grad_t2 = norm(sys, &grad_t).powi(2);
    let (du, dv) = pair.profile_derivs(t);
    let (u, v) = pair.profile(t);
    let lhs = (du * du + dv * dv) * grad_t2;
    if lhs == 0.0 {
        return 0.0;
    }
    let nx2 = norm(sys, &x).powi(2);
    lhs / (pair.epsilon * (v * v / nx2 + u * u / (nq * nq)))
}
