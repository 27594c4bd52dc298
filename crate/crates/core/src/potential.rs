//! External trapping potentials.

use serde::{Deserialize, Serialize};

/// `V(x) = coef * |x|^p`, or identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Potential {
    Zero,
    Harmonic { coef: f64 },
    Power { coef: f64, p: f64 },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Harmonic { coef: 1.0 }
    }
}

impl Potential {
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Harmonic { coef } => coef * (x * x + y * y),
            Potential::Power { coef, p } => coef * (x * x + y * y).powf(0.5 * p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Potential::Zero => true,
            Potential::Harmonic { coef } | Potential::Power { coef, .. } => coef == 0.0,
        }
    }
}
