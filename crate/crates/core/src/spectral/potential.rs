use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

/// Radial potential shapes. The attractive part is multiplied by the
/// coupling `λ`; the repulsive tails of the tail shapes are not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `−depth` for `r < radius`.
    SquareWell { depth: f64, radius: f64 },
    /// `−depth·exp(−r²/width²)`.
    Gaussian { depth: f64, width: f64 },
    /// `−1` for `r < inner_radius`, `+β₁/r²` beyond.
    InverseSquareTail { beta1: f64, inner_radius: f64 },
    /// `−1` for `r < inner_radius`, `+β₁/r^{β₂}` beyond.
    InversePowerTail { beta1: f64, beta2: f64, inner_radius: f64 },
}

/// Gaussian wells are treated as vanishing beyond this many widths.
const GAUSSIAN_SUPPORT_WIDTHS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub shape: Shape,
    pub coupling: f64,
}

impl PotentialSpec {
    pub fn new(shape: Shape, coupling: f64) -> Result<Self> {
        shape.validate()?;
        if !coupling.is_finite() {
            return arg(format!("coupling must be finite, got {coupling}"));
        }
        Ok(Self { shape, coupling })
    }

    pub fn value(&self, r: f64) -> f64 {
        self.shape.value(r, self.coupling)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        arg(format!("{name} must be positive and finite, got {v}"))
    }
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Shape::SquareWell { depth, radius } => {
                positive("depth", depth)?;
                positive("radius", radius)
            }
            Shape::Gaussian { depth, width } => {
                positive("depth", depth)?;
                positive("width", width)
            }
            Shape::InverseSquareTail { beta1, inner_radius } => {
                if !(beta1 >= 0.0 && beta1.is_finite()) {
                    return arg(format!("beta1 must be non-negative, got {beta1}"));
                }
                positive("inner_radius", inner_radius)
            }
            Shape::InversePowerTail {
                beta1,
                beta2,
                inner_radius,
            } => {
                if !(beta1 >= 0.0 && beta1.is_finite()) {
                    return arg(format!("beta1 must be non-negative, got {beta1}"));
                }
                if !(beta2 > 0.0 && beta2 <= 2.0) {
                    return arg(format!("beta2 must lie in (0, 2], got {beta2}"));
                }
                positive("inner_radius", inner_radius)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::SquareWell { .. } => "square_well",
            Shape::Gaussian { .. } => "gaussian",
            Shape::InverseSquareTail { .. } => "inverse_square_tail",
            Shape::InversePowerTail { .. } => "inverse_power_tail",
        }
    }

    /// Length that the grid must resolve with at least ten points.
    pub fn length_scale(&self) -> f64 {
        match *self {
            Shape::SquareWell { radius, .. } => radius,
            Shape::Gaussian { width, .. } => width,
            Shape::InverseSquareTail { inner_radius, .. } | Shape::InversePowerTail { inner_radius, .. } => {
                inner_radius
            }
        }
    }

    /// Radius beyond which the potential is zero or an exact power tail.
    pub fn support_radius(&self) -> f64 {
        match *self {
            Shape::Gaussian { width, .. } => GAUSSIAN_SUPPORT_WIDTHS * width,
            _ => self.length_scale(),
        }
    }

    /// `(β₁, β₂)` of the repulsive tail, if any.
    fn tail(&self) -> Option<(f64, f64)> {
        match *self {
            Shape::InverseSquareTail { beta1, .. } => Some((beta1, 2.0)),
            Shape::InversePowerTail { beta1, beta2, .. } => Some((beta1, beta2)),
            _ => None,
        }
    }

    /// Coefficient `β` of an exact `β/r²` behaviour beyond the support
    /// radius; `None` for slower tails.
    pub fn far_inverse_square(&self) -> Option<f64> {
        match self.tail() {
            None => Some(0.0),
            Some((b1, b2)) if b2 == 2.0 || b1 == 0.0 => Some(b1),
            Some(_) => None,
        }
    }

    /// Exponents `s₋ ≤ s₊` of the zero-energy solutions `ψ = r^{−s}` beyond
    /// the support radius in angular sector `l`, from
    /// `s(s − (d−2)) = l(l+d−2) + β`.
    pub fn far_exponents(&self, d: u32, l: u32) -> Option<(f64, f64)> {
        let beta = self.far_inverse_square()?;
        let half = (d as f64 - 2.0) / 2.0;
        let root = (half * half + (l * (l + d - 2)) as f64 + beta).sqrt();
        Some((half - root, half + root))
    }

    pub fn value(&self, r: f64, coupling: f64) -> f64 {
        match *self {
            Shape::SquareWell { depth, radius } => {
                if r < radius {
                    -coupling * depth
                } else {
                    0.0
                }
            }
            Shape::Gaussian { depth, width } => -coupling * depth * (-(r / width).powi(2)).exp(),
            _ => {
                let r0 = self.length_scale();
                let (b1, b2) = self.tail().unwrap_or((0.0, 2.0));
                if r < r0 {
                    -coupling
                } else {
                    b1 * r.powf(-b2)
                }
            }
        }
    }

    /// `∫ₐᵇ V dr` (exact for piecewise shapes, composite Simpson for the Gaussian).
    pub fn integral(&self, a: f64, b: f64, coupling: f64) -> f64 {
        let overlap = |lo: f64, hi: f64| (b.min(hi) - a.max(lo)).max(0.0);
        match *self {
            Shape::SquareWell { depth, radius } => -coupling * depth * overlap(0.0, radius),
            Shape::Gaussian { .. } => {
                const PANELS: usize = 8;
                let h = (b - a) / PANELS as f64;
                let mut sum = self.value(a, coupling) + self.value(b, coupling);
                for k in 1..PANELS {
                    let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                    sum += w * self.value(a + k as f64 * h, coupling);
                }
                sum * h / 3.0
            }
            _ => {
                let r0 = self.length_scale();
                let (b1, b2) = self.tail().unwrap_or((0.0, 2.0));
                let core = -coupling * overlap(0.0, r0);
                let lo = a.max(r0);
                let tail = if b > lo && b1 != 0.0 {
                    if b2 == 1.0 {
                        b1 * (b / lo).ln()
                    } else {
                        b1 * (b.powf(1.0 - b2) - lo.powf(1.0 - b2)) / (1.0 - b2)
                    }
                } else {
                    0.0
                };
                core + tail
            }
        }
    }
}
