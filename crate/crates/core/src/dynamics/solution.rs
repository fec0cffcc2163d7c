use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PuError, Result};
use crate::model::{PhaseState, PuParams, DEGENERACY_TOL};

/// `(c₀ + c₁ t)·sin(ω t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineTerm {
    pub c0: f64,
    pub c1: f64,
    pub omega: f64,
    pub phase: f64,
}

impl SineTerm {
    pub fn sin(amp: f64, omega: f64) -> Self {
        Self { c0: amp, c1: 0.0, omega, phase: 0.0 }
    }

    pub fn cos(amp: f64, omega: f64) -> Self {
        Self { c0: amp, c1: 0.0, omega, phase: FRAC_PI_2 }
    }

    /// n-th time derivative.
    pub fn derivative(&self, n: u32, t: f64) -> f64 {
        let arg = self.omega * t + self.phase;
        let w = self.omega;
        let main = (self.c0 + self.c1 * t) * w.powi(n as i32) * (arg + n as f64 * FRAC_PI_2).sin();
        if n == 0 || self.c1 == 0.0 {
            return main;
        }
        main + n as f64
            * self.c1
            * w.powi(n as i32 - 1)
            * (arg + (n as f64 - 1.0) * FRAC_PI_2).sin()
    }

    pub fn scaled(self, k: f64) -> Self {
        Self { c0: self.c0 * k, c1: self.c1 * k, ..self }
    }
}

/// State `(f, ḟ, f̈, f⃛)` of a finite sum of sine terms.
pub fn state_of_terms(terms: &[SineTerm], t: f64) -> PhaseState {
    let d = |n| terms.iter().map(|term| term.derivative(n, t)).sum::<f64>();
    PhaseState::new(d(0), d(1), d(2), d(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Nondegenerate,
    Degenerate,
}

impl Regime {
    pub fn of(p: &PuParams) -> Self {
        if p.is_degenerate(DEGENERACY_TOL) {
            Regime::Degenerate
        } else {
            Regime::Nondegenerate
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Nondegenerate => "nondegenerate",
            Regime::Degenerate => "degenerate",
        })
    }
}

impl FromStr for Regime {
    type Err = PuError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nondegenerate" => Ok(Regime::Nondegenerate),
            "degenerate" => Ok(Regime::Degenerate),
            other => Err(PuError::InvalidInput(format!("unknown regime '{other}'"))),
        }
    }
}

/// `(A₁, A₂, B₁, B₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Amplitudes {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Amplitudes {
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Self {
        Self { a1, a2, b1, b2 }
    }

    pub fn is_zero(&self) -> bool {
        [self.a1, self.a2, self.b1, self.b2].iter().all(|x| *x == 0.0)
    }
}

/// Frequencies checked against the requested regime: `(ω₁, ω₂)`, equal in
/// the degenerate case.
pub fn regime_frequencies(p: &PuParams, regime: Regime) -> Result<(f64, f64)> {
    let (w1, w2) = p.frequencies().map_err(|e| PuError::InvalidRegime(e.to_string()))?;
    let actual = Regime::of(p);
    if actual != regime {
        return Err(PuError::InvalidRegime(format!(
            "requested {regime} regime but the parameters are {actual}"
        )));
    }
    match regime {
        Regime::Nondegenerate => Ok((w1, w2)),
        Regime::Degenerate => Ok((w1, w1)),
    }
}

/// Real solution `A₁ sin ω₁t + A₂ cos ω₁t + B₁ sin ω₂t + B₂ cos ω₂t`, or
/// `(A₁ + B₁t) sin ωt + (A₂ + B₂t) cos ωt` when the frequencies coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalSolution {
    pub p: PuParams,
    pub amplitudes: Amplitudes,
    pub regime: Regime,
    omega1: f64,
    omega2: f64,
}

impl ClassicalSolution {
    pub fn new(p: PuParams, amplitudes: Amplitudes) -> Result<Self> {
        let regime = Regime::of(&p);
        Self::with_regime(p, amplitudes, regime)
    }

    pub fn with_regime(p: PuParams, amplitudes: Amplitudes, regime: Regime) -> Result<Self> {
        let (omega1, omega2) = regime_frequencies(&p, regime)?;
        Ok(Self { p, amplitudes, regime, omega1, omega2 })
    }

    pub fn frequencies(&self) -> (f64, f64) {
        (self.omega1, self.omega2)
    }

    pub fn terms(&self) -> Vec<SineTerm> {
        let Amplitudes { a1, a2, b1, b2 } = self.amplitudes;
        match self.regime {
            Regime::Nondegenerate => vec![
                SineTerm::sin(a1, self.omega1),
                SineTerm::cos(a2, self.omega1),
                SineTerm::sin(b1, self.omega2),
                SineTerm::cos(b2, self.omega2),
            ],
            Regime::Degenerate => {
                let w = self.omega1;
                vec![
                    SineTerm { c0: a1, c1: b1, omega: w, phase: 0.0 },
                    SineTerm { c0: a2, c1: b2, omega: w, phase: FRAC_PI_2 },
                ]
            }
        }
    }

    pub fn eval(&self, t: f64) -> PhaseState {
        state_of_terms(&self.terms(), t)
    }

    /// `q⁗ + αq̈ + βq` at `t`, using the analytic fourth derivative.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let terms = self.terms();
        let d = |n| terms.iter().map(|term| term.derivative(n, t)).sum::<f64>();
        d(4) + self.p.alpha * d(2) + self.p.beta * d(0)
    }
}

pub fn eval_solution(sol: &ClassicalSolution, t: f64) -> PhaseState {
    sol.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_formula_matches_finite_differences() {
        let term = SineTerm { c0: 0.7, c1: -0.4, omega: 1.3, phase: 0.2 };
        let h = 1e-4;
        for n in 0..4 {
            let t = 0.9;
            let fd = (term.derivative(n, t + h) - term.derivative(n, t - h)) / (2.0 * h);
            assert!((fd - term.derivative(n + 1, t)).abs() < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn eval_examples() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        let zero = ClassicalSolution::new(p, Amplitudes::default()).unwrap();
        assert_eq!(zero.eval(1.7), PhaseState::default());

        let s = ClassicalSolution::new(p, Amplitudes::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let v = s.eval(0.0);
        assert!(v.max_abs_diff(&PhaseState::new(1.0, 0.0, -4.0, 0.0)) < 1e-14);

        let pd = PuParams::from_frequencies(1.0, 1.0).unwrap();
        let s = ClassicalSolution::new(pd, Amplitudes::new(0.0, 0.0, 1.0, 0.0)).unwrap();
        let v = s.eval(PI);
        assert!(v.q.abs() < 1e-14);
        assert!((v.qd + PI).abs() < 1e-14);
    }

    #[test]
    fn ode_residual_vanishes() {
        for p in [PuParams::from_frequencies(2.0, 1.0).unwrap(), PuParams::from_frequencies(1.3, 1.3).unwrap()] {
            let s = ClassicalSolution::new(p, Amplitudes::new(0.3, -0.8, 0.5, 0.9)).unwrap();
            for t in [0.0, 1.0, 7.5] {
                assert!(s.ode_residual(t).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn regime_mismatch_is_rejected() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        assert!(matches!(
            ClassicalSolution::with_regime(p, Amplitudes::default(), Regime::Degenerate),
            Err(PuError::InvalidRegime(_))
        ));
    }
}
