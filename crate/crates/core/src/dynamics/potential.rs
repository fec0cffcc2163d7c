use std::fmt;
use std::str::FromStr;

use crate::error::{PuError, Result};
use crate::model::PhaseState;

/// Which phase-space coordinate the potential depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialArg {
    /// `V(q)`, added to `H₁`.
    Q,
    /// `W(q̈)`, added to `H₂`.
    Qdd,
}

impl PotentialArg {
    pub fn index(self) -> usize {
        match self {
            PotentialArg::Q => 0,
            PotentialArg::Qdd => 2,
        }
    }

    fn label(self) -> &'static str {
        match self {
            PotentialArg::Q => "q",
            PotentialArg::Qdd => "qdd",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PotentialShape {
    Zero,
    /// `λx⁴/4`
    Quartic { lambda: f64 },
    /// `λx³/3`
    Cubic { lambda: f64 },
    /// `λ(1 − cos x)`
    Cosine { lambda: f64 },
    Custom { value: fn(f64) -> f64, derivative: fn(f64) -> f64 },
}

#[derive(Debug, Clone)]
pub struct Potential {
    pub name: String,
    pub arg: PotentialArg,
    pub shape: PotentialShape,
}

impl Potential {
    pub fn zero() -> Self {
        Self { name: "zero".into(), arg: PotentialArg::Q, shape: PotentialShape::Zero }
    }

    pub fn quartic(lambda: f64, arg: PotentialArg) -> Self {
        Self { name: "quartic".into(), arg, shape: PotentialShape::Quartic { lambda } }
    }

    pub fn cubic(lambda: f64, arg: PotentialArg) -> Self {
        Self { name: "cubic".into(), arg, shape: PotentialShape::Cubic { lambda } }
    }

    pub fn cosine(lambda: f64, arg: PotentialArg) -> Self {
        Self { name: "cosine".into(), arg, shape: PotentialShape::Cosine { lambda } }
    }

    pub fn custom(
        name: &str,
        arg: PotentialArg,
        value: fn(f64) -> f64,
        derivative: fn(f64) -> f64,
    ) -> Self {
        Self { name: name.into(), arg, shape: PotentialShape::Custom { value, derivative } }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.shape {
            PotentialShape::Zero => 0.0,
            PotentialShape::Quartic { lambda } => lambda * x.powi(4) / 4.0,
            PotentialShape::Cubic { lambda } => lambda * x.powi(3) / 3.0,
            PotentialShape::Cosine { lambda } => lambda * (1.0 - x.cos()),
            PotentialShape::Custom { value, .. } => value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.shape {
            PotentialShape::Zero => 0.0,
            PotentialShape::Quartic { lambda } => lambda * x.powi(3),
            PotentialShape::Cubic { lambda } => lambda * x * x,
            PotentialShape::Cosine { lambda } => lambda * x.sin(),
            PotentialShape::Custom { derivative, .. } => derivative(x),
        }
    }

    pub fn argument(&self, v: &PhaseState) -> f64 {
        v.to_array()[self.arg.index()]
    }

    pub fn value_at(&self, v: &PhaseState) -> f64 {
        self.value(self.argument(v))
    }

    pub fn derivative_at(&self, v: &PhaseState) -> f64 {
        self.derivative(self.argument(v))
    }

    /// Largest relative mismatch between `derivative` and a central
    /// difference of `value` over the given points.
    pub fn derivative_mismatch(&self, points: &[f64]) -> f64 {
        points
            .iter()
            .map(|&x| {
                let h = 1e-5 * (1.0 + x.abs());
                let fd = (self.value(x + h) - self.value(x - h)) / (2.0 * h);
                let d = self.derivative(x);
                (fd - d).abs() / (1.0 + d.abs())
            })
            .fold(0.0, f64::max)
    }

    /// True when the derivative is constant on `points`.
    pub fn has_constant_derivative(&self, points: &[f64]) -> bool {
        let Some(&first) = points.first() else { return true };
        let d0 = self.derivative(first);
        points.iter().all(|&x| (self.derivative(x) - d0).abs() <= 1e-12 * (1.0 + d0.abs()))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            PotentialShape::Zero => write!(f, "zero"),
            PotentialShape::Quartic { lambda }
            | PotentialShape::Cubic { lambda }
            | PotentialShape::Cosine { lambda } => {
                write!(f, "{}:lambda={},arg={}", self.name, lambda, self.arg.label())
            }
            PotentialShape::Custom { .. } => write!(f, "{}:arg={}", self.name, self.arg.label()),
        }
    }
}

/// `name[:key=value,...]` with keys `lambda` (default 1) and `arg`
/// (`q` or `qdd`, default `q`).
impl FromStr for Potential {
    type Err = PuError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, rest)) => (n.trim(), rest),
            None => (s.trim(), ""),
        };
        let mut lambda = 1.0;
        let mut arg = PotentialArg::Q;
        for kv in params.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| PuError::InvalidInput(format!("expected key=value, got '{kv}'")))?;
            match k.trim() {
                "lambda" => {
                    lambda = v.trim().parse().map_err(|_| {
                        PuError::InvalidInput(format!("lambda must be a number, got '{v}'"))
                    })?;
                    if !f64::is_finite(lambda) {
                        return Err(PuError::InvalidInput("lambda must be finite".into()));
                    }
                }
                "arg" => {
                    arg = match v.trim() {
                        "q" => PotentialArg::Q,
                        "qdd" => PotentialArg::Qdd,
                        other => {
                            return Err(PuError::InvalidInput(format!(
                                "arg must be q or qdd, got '{other}'"
                            )))
                        }
                    }
                }
                other => return Err(PuError::InvalidInput(format!("unknown potential key '{other}'"))),
            }
        }
        match name {
            "zero" => Ok(Potential { arg, ..Potential::zero() }),
            "quartic" => Ok(Potential::quartic(lambda, arg)),
            "cubic" => Ok(Potential::cubic(lambda, arg)),
            "cosine" => Ok(Potential::cosine(lambda, arg)),
            other => Err(PuError::InvalidInput(format!(
                "unknown potential '{other}' (expected zero, quartic, cubic or cosine)"
            ))),
        }
    }
}
