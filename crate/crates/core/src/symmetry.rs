//! Linear point symmetries of the flow. For a linear field `v̇ = Mv` the
//! symmetry condition on a linear generator `X = (Av)·∂ᵥ` reduces to
//! `MA − AM = 0`, which is solved here as a 16-dimensional nullspace
//! problem.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::solution::{
    regime_frequencies, state_of_terms, Amplitudes, ClassicalSolution, Regime, SineTerm,
};
use crate::error::{PuError, Result};
use crate::model::{companion_field, PhaseState, PuParams, QuadHamiltonian};
use crate::numkit::{expm, least_squares, nullspace, projection_residual, Mat};

/// Nullspace threshold for the commutant solver.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub a: Mat,
}

impl Generator {
    pub fn new(a: Mat) -> Result<Self> {
        if a.rows() != 4 || a.cols() != 4 {
            return Err(PuError::InvalidInput("generators act on the 4-dimensional phase space".into()));
        }
        a.check_finite()?;
        Ok(Self { a })
    }

    pub fn zero() -> Self {
        Self { a: Mat::zeros(4, 4) }
    }

    /// `X(v) = A v`.
    pub fn field(&self, v: &PhaseState) -> PhaseState {
        let w = self.a.mul_vec(&v.to_array());
        PhaseState::new(w[0], w[1], w[2], w[3])
    }

    /// `‖MA − AM‖`.
    pub fn symmetry_defect(&self, p: &PuParams) -> f64 {
        companion_field(p).commutator(&self.a).norm()
    }
}

/// `[X, Y]` for `X = (Av)·∂`, `Y = (Bv)·∂` is `((BA − AB)v)·∂`.
pub fn commutator(x: &Generator, y: &Generator) -> Generator {
    Generator { a: &(&y.a * &x.a) - &(&x.a * &y.a) }
}

/// Matrix of `A ↦ MA − AM` on row-major vectorised `A`.
pub fn sylvester_operator(m: &Mat) -> Mat {
    let n = m.rows();
    Mat::from_fn(n * n, n * n, |row, col| {
        let (i, j) = (row / n, row % n);
        let (k, l) = (col / n, col % n);
        let mut v = 0.0;
        if j == l {
            v += m[(i, k)];
        }
        if i == k {
            v -= m[(l, j)];
        }
        v
    })
}

/// Orthonormal basis (in the Frobenius inner product) of the commutant of
/// the companion matrix.
#[derive(Debug, Clone)]
pub struct SymmetryBasis {
    pub generators: Vec<Generator>,
    vectors: Vec<Vec<f64>>,
}

impl SymmetryBasis {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Distance of `a` from the span, relative to `1 + ‖a‖`.
    pub fn projection_residual(&self, a: &Mat) -> f64 {
        projection_residual(&self.vectors, a.as_slice()) / (1.0 + a.norm())
    }
}

pub fn solve_symmetries(p: &PuParams) -> Result<SymmetryBasis> {
    let op = sylvester_operator(&companion_field(p));
    let vectors = nullspace(&op, SYMMETRY_TOL)?;
    let generators = vectors
        .iter()
        .map(|v| Generator { a: Mat::from_row_slice(4, 4, v).expect("finite nullspace vector") })
        .collect();
    Ok(SymmetryBasis { generators, vectors })
}

/// Coordinates of `a` on `{I, M, M², M³}` and the relative fit residual.
pub fn polynomial_coordinates(p: &PuParams, a: &Mat) -> Result<([f64; 4], f64)> {
    let m = companion_field(p);
    let powers = [Mat::identity(4), m.clone(), m.powi(2), m.powi(3)];
    let basis: Vec<&[f64]> = powers.iter().map(|x| x.as_slice()).collect();
    let (c, res) = least_squares(&basis, a.as_slice())?;
    Ok(([c[0], c[1], c[2], c[3]], res / (1.0 + a.norm())))
}

#[derive(Debug, Clone)]
pub struct PaperBasis {
    pub x1: Generator,
    pub x2: Generator,
    pub x3: Generator,
    pub x4: Generator,
}

impl PaperBasis {
    pub fn all(&self) -> [&Generator; 4] {
        [&self.x1, &self.x2, &self.x3, &self.x4]
    }

    pub fn get(&self, id: GeneratorId) -> &Generator {
        match id {
            GeneratorId::X1 => &self.x1,
            GeneratorId::X2 => &self.x2,
            GeneratorId::X3 => &self.x3,
            GeneratorId::X4 => &self.x4,
        }
    }
}

/// The four generators written out component by component.
pub fn paper_basis(p: &PuParams) -> PaperBasis {
    let (a, b) = (p.alpha, p.beta);
    let x1 = Mat::from_rows([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-b, 0.0, -a, 0.0],
    ]);
    let x2 = Mat::identity(4).scale(0.5);
    let x3 = Mat::from_rows([
        [0.0, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.5],
        [-0.5 * b, 0.0, -0.5 * a, 0.0],
        [0.0, -0.5 * b, 0.0, -0.5 * a],
    ]);
    let x4 = Mat::from_rows([
        [0.0, a, 0.0, 1.0],
        [-b, 0.0, 0.0, 0.0],
        [0.0, -b, 0.0, 0.0],
        [0.0, 0.0, -b, 0.0],
    ]);
    PaperBasis {
        x1: Generator { a: x1 },
        x2: Generator { a: x2 },
        x3: Generator { a: x3 },
        x4: Generator { a: x4 },
    }
}

/// `X(H)(v) = ∇H·(Av)`, the form with matrix `SA + AᵀS`.
pub fn act_on_hamiltonian(x: &Generator, h: &QuadHamiltonian) -> QuadHamiltonian {
    let sa = h.matrix() * &x.a;
    QuadHamiltonian::from_nearly_symmetric(&sa + &sa.transpose())
}

/// `exp(sA) v₀`.
pub fn group_flow(x: &Generator, s: f64, v0: &PhaseState) -> Result<PhaseState> {
    let e = expm(&x.a.scale(s))?;
    let w = e.mul_vec(&v0.to_array());
    Ok(PhaseState::new(w[0], w[1], w[2], w[3]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GeneratorId {
    X1,
    X2,
    X3,
    X4,
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorId::X1 => "X1",
            GeneratorId::X2 => "X2",
            GeneratorId::X3 => "X3",
            GeneratorId::X4 => "X4",
        })
    }
}

impl FromStr for GeneratorId {
    type Err = PuError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "X1" | "1" => Ok(GeneratorId::X1),
            "X2" | "2" => Ok(GeneratorId::X2),
            "X3" | "3" => Ok(GeneratorId::X3),
            "X4" | "4" => Ok(GeneratorId::X4),
            _ => Err(PuError::InvalidInput(format!("unknown generator '{s}' (expected X1..X4)"))),
        }
    }
}

/// Sine-term expansion of the flowed solution `φ_s(t)`.
fn closed_form_terms(
    which: GeneratorId,
    regime: Regime,
    amps: Amplitudes,
    p: &PuParams,
    s: f64,
) -> Result<Vec<SineTerm>> {
    let (w1, w2) = regime_frequencies(p, regime)?;
    let Amplitudes { a1, a2, b1, b2 } = amps;
    let terms = match (which, regime) {
        (GeneratorId::X1, _) => {
            return Err(PuError::InvalidInput(
                "X1 is the time translation; its flow is the solution at t + s".into(),
            ))
        }
        (GeneratorId::X2, _) => {
            let base = ClassicalSolution::with_regime(*p, amps, regime)?;
            base.terms().into_iter().map(|t| t.scaled((s / 2.0).exp())).collect()
        }
        (GeneratorId::X3, Regime::Nondegenerate) => {
            let e1 = (-s * w1 * w1 / 2.0).exp();
            let e2 = (-s * w2 * w2 / 2.0).exp();
            vec![
                SineTerm::sin(e1 * a1, w1),
                SineTerm::cos(e1 * a2, w1),
                SineTerm::sin(e2 * b1, w2),
                SineTerm::cos(e2 * b2, w2),
            ]
        }
        (GeneratorId::X3, Regime::Degenerate) => {
            let w = w1;
            let e = (-s * w * w / 2.0).exp();
            vec![
                SineTerm { c0: e * (a1 - b2 * s * w), c1: e * b1, omega: w, phase: 0.0 },
                SineTerm {
                    c0: e * (a2 + b1 * s * w),
                    c1: e * b2,
                    omega: w,
                    phase: std::f64::consts::FRAC_PI_2,
                },
            ]
        }
        (GeneratorId::X4, Regime::Nondegenerate) => {
            let ph1 = w1 * s * w2 * w2;
            let ph2 = w2 * s * w1 * w1;
            let half = std::f64::consts::FRAC_PI_2;
            vec![
                SineTerm { c0: a1, c1: 0.0, omega: w1, phase: ph1 },
                SineTerm { c0: a2, c1: 0.0, omega: w1, phase: ph1 + half },
                SineTerm { c0: b1, c1: 0.0, omega: w2, phase: ph2 },
                SineTerm { c0: b2, c1: 0.0, omega: w2, phase: ph2 + half },
            ]
        }
        (GeneratorId::X4, Regime::Degenerate) => {
            let w = w1;
            let shift = s * w * w;
            let ph = w * shift;
            vec![
                SineTerm { c0: a1 - b1 * shift, c1: b1, omega: w, phase: ph },
                SineTerm {
                    c0: a2 - b2 * shift,
                    c1: b2,
                    omega: w,
                    phase: ph + std::f64::consts::FRAC_PI_2,
                },
            ]
        }
    };
    Ok(terms)
}

/// Closed-form group flow of X₂, X₃ or X₄ applied to the classical
/// solution; the components are `φ₁` and its first three t-derivatives.
pub fn closed_form_flow(
    which: GeneratorId,
    regime: Regime,
    amps: Amplitudes,
    p: &PuParams,
    t: f64,
    s: f64,
) -> Result<PhaseState> {
    Ok(state_of_terms(&closed_form_terms(which, regime, amps, p, s)?, t))
}

/// Samples of `φ_s` along a classical solution.
#[derive(Debug, Clone)]
pub struct FlowCurve {
    pub generator: Generator,
    pub s: f64,
    pub samples: Vec<(f64, PhaseState)>,
}

impl FlowCurve {
    pub fn sample(generator: &Generator, s: f64, sol: &ClassicalSolution, times: &[f64]) -> Result<Self> {
        let e = expm(&generator.a.scale(s))?;
        let samples = times
            .iter()
            .map(|&t| {
                let w = e.mul_vec(&sol.eval(t).to_array());
                (t, PhaseState::new(w[0], w[1], w[2], w[3]))
            })
            .collect();
        Ok(Self { generator: generator.clone(), s, samples })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hamiltonian_h1, hamiltonian_h2};

    fn p54() -> PuParams {
        PuParams::new(5.0, 4.0).unwrap()
    }

    #[test]
    fn commutator_examples() {
        let p = p54();
        let b = paper_basis(&p);
        assert_eq!(commutator(&b.x2, &b.x3).a.max_abs(), 0.0);
        assert_eq!(commutator(&b.x4, &b.x4).a.max_abs(), 0.0);
        let shift = Generator::new(Mat::from_fn(4, 4, |i, j| if j == i + 1 { 1.0 } else { 0.0 })).unwrap();
        let d = Generator::new(Mat::diag(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let c = commutator(&shift, &d);
        // (BA − AB)[0][1] = d₀·1 − 1·d₁ = −1.
        assert_eq!(c.a[(0, 1)], -1.0);
        assert_eq!(c.a[(1, 2)], -1.0);
        assert_eq!(c.a[(0, 0)], 0.0);
    }

    #[test]
    fn commutant_dimension_and_span() {
        for p in [p54(), PuParams::new(0.0, 0.0).unwrap(), PuParams::new(-1.5, 0.2).unwrap()] {
            let basis = solve_symmetries(&p).unwrap();
            assert_eq!(basis.dim(), 4);
            for g in &basis.generators {
                assert!(g.symmetry_defect(&p) < 1e-10);
                assert!(polynomial_coordinates(&p, &g.a).unwrap().1 < 1e-9);
            }
            for x in paper_basis(&p).all() {
                assert!(basis.projection_residual(&x.a) < 1e-10);
            }
        }
    }

    #[test]
    fn paper_basis_entries() {
        let p = p54();
        let b = paper_basis(&p);
        assert_eq!(b.x2.a, Mat::identity(4).scale(0.5));
        assert_eq!(b.x4.a.row(0), &[0.0, 5.0, 0.0, 1.0]);
        assert_eq!(b.x3.a.row(2), &[-2.0, 0.0, -2.5, 0.0]);
        let m = companion_field(&p);
        assert!(b.x1.a.distance(&m) == 0.0);
        assert!(b.x3.a.distance(&m.powi(2).scale(0.5)) < 1e-14);
        assert!(b.x4.a.distance(&(&m.powi(3) + &m.scale(p.alpha))) < 1e-14);
    }

    #[test]
    fn action_on_hamiltonians() {
        let p = p54();
        let b = paper_basis(&p);
        let (h1, h2) = (hamiltonian_h1(&p), hamiltonian_h2(&p));
        assert!(act_on_hamiltonian(&b.x1, &h1).matrix().max_abs() < 1e-14);
        assert!(act_on_hamiltonian(&b.x2, &h2).distance(&h2) < 1e-14);
        assert!(act_on_hamiltonian(&b.x3, &h1).distance(&h2) < 1e-14);
        assert!(act_on_hamiltonian(&b.x4, &h2).matrix().max_abs() < 1e-12);
        // Pointwise meaning: ∇H·(Av).
        let v = [0.3, -0.2, 1.1, 0.5];
        let direct: f64 =
            h1.gradient(&v).iter().zip(b.x3.a.mul_vec(&v)).map(|(g, x)| g * x).sum();
        assert!((act_on_hamiltonian(&b.x3, &h1).value(&v) - direct).abs() < 1e-12);
    }

    #[test]
    fn flows_examples() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        let b = paper_basis(&p);
        let v0 = PhaseState::new(1.0, -0.5, 0.25, 2.0);
        assert_eq!(group_flow(&b.x4, 0.0, &v0).unwrap(), v0);
        let scaled = group_flow(&b.x2, 0.8, &v0).unwrap();
        let k = 0.4f64.exp();
        assert!(scaled.max_abs_diff(&PhaseState::new(k, -0.5 * k, 0.25 * k, 2.0 * k)) < 1e-13);

        let amps = Amplitudes::new(1.0, 0.0, 0.0, 0.0);
        let phi = closed_form_flow(GeneratorId::X3, Regime::Nondegenerate, amps, &p, 0.0, 1.0).unwrap();
        assert!(phi.q.abs() < 1e-15);
        assert!((phi.qd - 2.0 * (-2.0f64).exp()).abs() < 1e-15);

        let amps = Amplitudes::new(0.3, -0.7, 0.5, 0.9);
        let sol = ClassicalSolution::new(p, amps).unwrap();
        let expm_route = group_flow(&b.x4, 0.3, &sol.eval(1.0)).unwrap();
        let closed = closed_form_flow(GeneratorId::X4, Regime::Nondegenerate, amps, &p, 1.0, 0.3).unwrap();
        assert!(expm_route.max_abs_diff(&closed) < 1e-10);
    }

    #[test]
    fn closed_forms_start_at_the_solution() {
        for (p, regime) in [
            (PuParams::from_frequencies(2.0, 1.0).unwrap(), Regime::Nondegenerate),
            (PuParams::from_frequencies(1.2, 1.2).unwrap(), Regime::Degenerate),
        ] {
            let amps = Amplitudes::new(0.3, -0.7, 0.5, 0.9);
            let sol = ClassicalSolution::with_regime(p, amps, regime).unwrap();
            for id in [GeneratorId::X2, GeneratorId::X3, GeneratorId::X4] {
                let phi = closed_form_flow(id, regime, amps, &p, 2.3, 0.0).unwrap();
                assert!(phi.max_abs_diff(&sol.eval(2.3)) < 1e-13);
            }
        }
    }

    #[test]
    fn regime_mismatch() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        let r = closed_form_flow(GeneratorId::X3, Regime::Degenerate, Amplitudes::default(), &p, 0.0, 0.0);
        assert!(matches!(r, Err(PuError::InvalidRegime(_))));
    }
}
