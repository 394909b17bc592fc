//! Weight functions for the weighted bilinear form and norms.
//!
//! The energy weight is the constant 1.  The balanced weight
//! `β_b(x) = 1 + (1/ε)(e^{-αx/ε} + e^{-α|x-1|/ε} + e^{-α(2-x)/ε})`
//! mirrors the three layers of the solution so that layer components carry
//! O(1) triple-norm.  Admissibility requires β ≥ 1, |β'| ≤ (α/ε)β a.e. and a
//! uniformly bounded integral.

use std::sync::Arc;

use crate::quadrature::{gauss_rule, graded_partition};

pub const LAYER_ANCHORS: [f64; 3] = [0.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Energy,
    Balanced,
    Custom,
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::Energy => "energy",
            WeightKind::Balanced => "balanced",
            WeightKind::Custom => "custom",
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A weight β with its derivative.
#[derive(Clone)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub epsilon: f64,
    pub alpha: f64,
    custom_value: Option<ScalarFn>,
    custom_derivative: Option<ScalarFn>,
}

impl std::fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightSpec")
            .field("kind", &self.kind)
            .field("epsilon", &self.epsilon)
            .field("alpha", &self.alpha)
            .finish()
    }
}

/// Construct the energy or balanced weight.
pub fn make_weight(kind: WeightKind, epsilon: f64, alpha: f64) -> WeightSpec {
    WeightSpec { kind, epsilon, alpha, custom_value: None, custom_derivative: None }
}

impl WeightSpec {
    /// A user-supplied weight, used by the validator tests.
    pub fn custom<V, D>(epsilon: f64, alpha: f64, value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        WeightSpec {
            kind: WeightKind::Custom,
            epsilon,
            alpha,
            custom_value: Some(Arc::new(value)),
            custom_derivative: Some(Arc::new(derivative)),
        }
    }

    pub fn is_energy(&self) -> bool {
        matches!(self.kind, WeightKind::Energy)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Energy => 1.0,
            WeightKind::Balanced => {
                let r = self.alpha / self.epsilon;
                1.0 + (( -r * x).exp() + (-r * (x - 1.0).abs()).exp() + (-r * (2.0 - x)).exp())
                    / self.epsilon
            }
            WeightKind::Custom => (self.custom_value.as_ref().unwrap())(x),
        }
    }

    /// dβ/dx; the kink of the balanced weight at x = 1 takes the left limit.
    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Energy => 0.0,
            WeightKind::Balanced => {
                let r = self.alpha / self.epsilon;
                // left limit at the kink: sign(x - 1) with sign(0) := -1
                let s = if x > 1.0 { 1.0 } else { -1.0 };
                (-r * (-r * x).exp() - s * r * (-r * (x - 1.0).abs()).exp()
                    + r * (-r * (2.0 - x)).exp())
                    / self.epsilon
            }
            WeightKind::Custom => (self.custom_derivative.as_ref().unwrap())(x),
        }
    }
}

/// Outcome of the admissibility check of a weight.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub min_value: f64,
    /// max over samples of |β'| / ((α/ε) β); admissible iff ≤ 1.
    pub max_derivative_ratio: f64,
    pub integral: f64,
    pub pass: bool,
}

/// Check β ≥ 1, the derivative bound and the integral bound by layer-refined
/// sampling; uniform sampling misses the ε-scale structure entirely.
pub fn validate_weight(w: &WeightSpec, n_samples: usize) -> ValidationReport {
    let n_samples = n_samples.max(2);
    let scale = (w.epsilon / 4.0).min(0.05);
    // Sample grid: uniform backbone plus geometric refinement toward layers.
    let mut pts: Vec<f64> = Vec::new();
    for i in 0..n_samples {
        pts.push(2.0 * i as f64 / (n_samples - 1) as f64);
    }
    for seg in [(0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0)] {
        let sub = graded_partition(seg.0, seg.1, &LAYER_ANCHORS, scale);
        pts.extend(sub);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    let rate = w.alpha / w.epsilon;
    let mut min_value = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    for &x in &pts {
        let v = w.value(x);
        min_value = min_value.min(v);
        max_ratio = max_ratio.max(w.derivative(x).abs() / (rate * v));
    }

    let rule = gauss_rule(6).unwrap();
    let mut integral = 0.0;
    for seg in pts.windows(2) {
        integral += rule.integrate(seg[0], seg[1], |x| w.value(x));
    }

    let pass = min_value >= 1.0 - 1e-12 && max_ratio <= 1.0 + 1e-12 && integral <= 10.0;
    ValidationReport { min_value, max_derivative_ratio: max_ratio, integral, pass }
}
