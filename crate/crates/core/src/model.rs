//! Model parameters, phase states, the dynamical vector field and the two
//! Hamiltonian/Poisson pairs of the Pais-Uhlenbeck oscillator
//! `q⁗ + α q̈ + β q = 0`.
//!
//! Phase states are always ordered `(q, q̇, q̈, q⃛)`. Hamiltonians are
//! quadratic forms `H(v) = ½ vᵀ S v` stored through their symmetric matrix,
//! and Poisson tensors are constant antisymmetric matrices, so every bracket
//! identity below is a matrix identity.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{PuError, Result};
use crate::numkit::{inverse, Mat};

/// Threshold on `|ω₁² − ω₂²|` below which the frequencies count as equal.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Coefficients of `q⁗ + α q̈ + β q = 0`, optionally remembering the
/// frequencies they were built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuParams {
    pub alpha: f64,
    pub beta: f64,
    frequencies: Option<(f64, f64)>,
}

impl PuParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(PuError::InvalidInput("alpha and beta must be finite".into()));
        }
        Ok(Self { alpha, beta, frequencies: None })
    }

    /// `α = ω₁² + ω₂²`, `β = ω₁² ω₂²`.
    pub fn from_frequencies(omega1: f64, omega2: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega2.is_finite()) {
            return Err(PuError::InvalidInput("frequencies must be finite".into()));
        }
        let (w1, w2) = (omega1 * omega1, omega2 * omega2);
        Ok(Self { alpha: w1 + w2, beta: w1 * w2, frequencies: Some((omega1, omega2)) })
    }

    /// `(ω₁, ω₂)`. Frequencies given at construction are returned as is;
    /// otherwise they are the non-negative roots with `ω₁² ≥ ω₂²`.
    pub fn frequencies(&self) -> Result<(f64, f64)> {
        if let Some(f) = self.frequencies {
            return Ok(f);
        }
        let (w1, w2) = self.omega_squared()?;
        if w2 < 0.0 {
            return Err(PuError::ParameterDomain(format!(
                "alpha = {}, beta = {} has a negative squared frequency",
                self.alpha, self.beta
            )));
        }
        Ok((w1.sqrt(), w2.sqrt()))
    }

    /// `(ω₁², ω₂²)`, real roots of `x² − α x + β = 0`.
    pub fn omega_squared(&self) -> Result<(f64, f64)> {
        if let Some((o1, o2)) = self.frequencies {
            return Ok((o1 * o1, o2 * o2));
        }
        let disc = self.discriminant();
        if disc < 0.0 {
            return Err(PuError::ParameterDomain(format!(
                "alpha^2 - 4 beta = {disc} < 0: squared frequencies are complex"
            )));
        }
        let root = disc.sqrt();
        Ok(((self.alpha + root) / 2.0, (self.alpha - root) / 2.0))
    }

    /// `α² − 4β`, which equals `(ω₁² − ω₂²)²` for real frequencies.
    pub fn discriminant(&self) -> f64 {
        self.alpha * self.alpha - 4.0 * self.beta
    }

    pub fn is_degenerate(&self, tol: f64) -> bool {
        match self.omega_squared() {
            Ok((w1, w2)) => (w1 - w2).abs() <= tol,
            Err(_) => false,
        }
    }
}

/// `(q, q̇, q̈, q⃛)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: f64,
    pub qd: f64,
    pub qdd: f64,
    pub qddd: f64,
}

impl PhaseState {
    pub fn new(q: f64, qd: f64, qdd: f64, qddd: f64) -> Self {
        Self { q, qd, qdd, qddd }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q, self.qd, self.qdd, self.qddd]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &PhaseState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Quadratic form `H(v) = ½ vᵀ S v`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadHamiltonian {
    s: Mat,
}

impl QuadHamiltonian {
    pub fn new(s: Mat) -> Result<Self> {
        if !s.is_square() {
            return Err(PuError::InvalidInput("quadratic form needs a square matrix".into()));
        }
        s.check_finite()?;
        if s.asymmetry() > 1e-12 * s.norm() {
            return Err(PuError::InvalidInput(format!(
                "quadratic form matrix is not symmetric (asymmetry {:e})",
                s.asymmetry()
            )));
        }
        Ok(Self { s })
    }

    /// Symmetrises `s`; callers must have established symmetry to their own
    /// tolerance.
    pub(crate) fn from_nearly_symmetric(s: Mat) -> Self {
        Self { s: s.symmetric_part() }
    }

    pub fn zero(n: usize) -> Self {
        Self { s: Mat::zeros(n, n) }
    }

    /// `coef · (u·v)²` as a quadratic form.
    pub fn square_of_linear(u: &[f64], coef: f64) -> Self {
        Self { s: Mat::outer(u, u).scale(2.0 * coef) }
    }

    pub fn matrix(&self) -> &Mat {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.s.rows()
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        0.5 * self.s.bilinear(v, v)
    }

    pub fn value_at(&self, v: &PhaseState) -> f64 {
        self.value(&v.to_array())
    }

    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        self.s.mul_vec(v)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { s: self.s.scale(k) }
    }

    /// Form pulled back through the linear map `v = T w`: `Tᵀ S T`.
    pub fn pullback(&self, t: &Mat) -> Self {
        Self::from_nearly_symmetric(&(&t.transpose() * &self.s) * t)
    }

    pub fn distance(&self, other: &QuadHamiltonian) -> f64 {
        self.s.distance(&other.s)
    }
}

impl Add for &QuadHamiltonian {
    type Output = QuadHamiltonian;
    fn add(self, rhs: &QuadHamiltonian) -> QuadHamiltonian {
        QuadHamiltonian { s: &self.s + &rhs.s }
    }
}

impl Sub for &QuadHamiltonian {
    type Output = QuadHamiltonian;
    fn sub(self, rhs: &QuadHamiltonian) -> QuadHamiltonian {
        QuadHamiltonian { s: &self.s - &rhs.s }
    }
}

impl Mul<&QuadHamiltonian> for f64 {
    type Output = QuadHamiltonian;
    fn mul(self, rhs: &QuadHamiltonian) -> QuadHamiltonian {
        rhs.scaled(self)
    }
}

/// Constant Poisson tensor; `{F, G} = ∇F · J ∇G`. Jacobi holds trivially.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonTensor {
    j: Mat,
}

impl PoissonTensor {
    pub fn new(j: Mat) -> Result<Self> {
        if !j.is_square() {
            return Err(PuError::InvalidInput("Poisson tensor must be square".into()));
        }
        j.check_finite()?;
        let sym = (&j + &j.transpose()).norm();
        if sym > 1e-12 * j.norm() {
            return Err(PuError::InvalidInput(format!("Poisson tensor is not antisymmetric ({sym:e})")));
        }
        Ok(Self { j })
    }

    pub(crate) fn from_nearly_antisymmetric(j: Mat) -> Self {
        let jt = j.transpose();
        Self { j: (&j - &jt).scale(0.5) }
    }

    pub fn matrix(&self) -> &Mat {
        &self.j
    }

    /// Bracket of two coordinate functions, `{vᵢ, vⱼ} = J[i][j]`.
    pub fn coordinate_bracket(&self, i: usize, j: usize) -> f64 {
        self.j[(i, j)]
    }

    /// `{F, G}` from gradients at a point.
    pub fn bracket(&self, grad_f: &[f64], grad_g: &[f64]) -> f64 {
        self.j.bilinear(grad_f, grad_g)
    }

    /// `J ∇H` at `v`.
    pub fn hamiltonian_field(&self, h: &QuadHamiltonian, v: &[f64]) -> Vec<f64> {
        self.j.mul_vec(&h.gradient(v))
    }

    /// `a·J_a + b·J_b`.
    pub fn combine(a: f64, ja: &PoissonTensor, b: f64, jb: &PoissonTensor) -> Self {
        Self { j: &ja.j.scale(a) + &jb.j.scale(b) }
    }

    pub fn distance(&self, other: &PoissonTensor) -> f64 {
        self.j.distance(&other.j)
    }
}

/// The generator `M` of the flow: `v̇ = M v`, rows `(q̇, q̈, q⃛, −α q̈ − β q)`.
pub fn companion_field(p: &PuParams) -> Mat {
    Mat::from_rows([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-p.beta, 0.0, -p.alpha, 0.0],
    ])
}

/// `H₁ = ½ q̈² − ½ α q̇² − ½ β q² − q̇ q⃛`.
pub fn hamiltonian_h1(p: &PuParams) -> QuadHamiltonian {
    QuadHamiltonian {
        s: Mat::from_rows([
            [-p.beta, 0.0, 0.0, 0.0],
            [0.0, -p.alpha, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ]),
    }
}

/// `H₂ = ½ β q̇² − ½ α q̈² − ½ q⃛² − β q q̈`.
pub fn hamiltonian_h2(p: &PuParams) -> QuadHamiltonian {
    QuadHamiltonian {
        s: Mat::from_rows([
            [0.0, 0.0, -p.beta, 0.0],
            [0.0, p.beta, 0.0, 0.0],
            [-p.beta, 0.0, -p.alpha, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ]),
    }
}

/// `c₁ H₁ + c₂ H₂`.
pub fn h_combination(p: &PuParams, c1: f64, c2: f64) -> QuadHamiltonian {
    &hamiltonian_h1(p).scaled(c1) + &hamiltonian_h2(p).scaled(c2)
}

/// Standard tensor: `{q̇,q̈} = 1`, `{q⃛,q} = 1`, `{q̈,q⃛} = α`.
pub fn poisson_j1(p: &PuParams) -> PoissonTensor {
    PoissonTensor {
        j: Mat::from_rows([
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, p.alpha],
            [1.0, 0.0, -p.alpha, 0.0],
        ]),
    }
}

/// Second tensor: `{q,q̇} = 1/β`, `{q̈,q⃛} = −1`. Requires `β ≠ 0`.
pub fn poisson_j2(p: &PuParams) -> Result<PoissonTensor> {
    if p.beta == 0.0 {
        return Err(PuError::ParameterDomain("J2 requires beta != 0".into()));
    }
    let b = 1.0 / p.beta;
    Ok(PoissonTensor {
        j: Mat::from_rows([
            [0.0, b, 0.0, 0.0],
            [-b, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ]),
    })
}

/// `‖J S − M‖ / (1 + ‖M‖)`: zero exactly when `(J, H)` generates the flow.
pub fn flow_residual(j: &PoissonTensor, h: &QuadHamiltonian, p: &PuParams) -> f64 {
    let m = companion_field(p);
    (&(j.matrix() * h.matrix()) - &m).norm() / (1.0 + m.norm())
}

/// `{F, G}` under `J` as a quadratic form: matrix `S_F J S_G − S_G J S_F`.
pub fn quad_bracket(j: &PoissonTensor, f: &QuadHamiltonian, g: &QuadHamiltonian) -> QuadHamiltonian {
    let fg = &(f.matrix() * j.matrix()) * g.matrix();
    let gf = &(g.matrix() * j.matrix()) * f.matrix();
    QuadHamiltonian { s: &fg - &gf }
}

/// Canonical variables `(q₁, q₂, π₁, π₂)` of the second-order Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OstrogradskyState {
    pub q1: f64,
    pub q2: f64,
    pub pi1: f64,
    pub pi2: f64,
}

impl OstrogradskyState {
    pub fn to_array(self) -> [f64; 4] {
        [self.q1, self.q2, self.pi1, self.pi2]
    }
}

/// Matrix `T` with `(q₁, q₂, π₁, π₂) = T (q, q̇, q̈, q⃛)`:
/// `q₁ = q`, `q₂ = q̇`, `π₁ = −q⃛ − α q̇`, `π₂ = q̈`.
pub fn ostrogradsky_matrix(p: &PuParams) -> Mat {
    Mat::from_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, -p.alpha, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
}

pub fn ostrogradsky_map(p: &PuParams, v: &PhaseState) -> OstrogradskyState {
    let w = ostrogradsky_matrix(p).mul_vec(&v.to_array());
    OstrogradskyState { q1: w[0], q2: w[1], pi1: w[2], pi2: w[3] }
}

/// `H_PU = π₁ q₂ + ½ π₂² + ½ α q₂² − ½ β q₁²` over `(q₁, q₂, π₁, π₂)`.
pub fn ostrogradsky_hamiltonian(p: &PuParams) -> QuadHamiltonian {
    QuadHamiltonian {
        s: Mat::from_rows([
            [-p.beta, 0.0, 0.0, 0.0],
            [0.0, p.alpha, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]),
    }
}

/// The canonical tensor `{qᵢ, πⱼ} = δᵢⱼ` on `(q₁, q₂, π₁, π₂)`.
pub fn canonical_tensor() -> PoissonTensor {
    PoissonTensor {
        j: Mat::from_rows([
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ]),
    }
}

/// `H_PU` expressed in `(q, q̇, q̈, q⃛)`.
pub fn ostrogradsky_pullback(p: &PuParams) -> QuadHamiltonian {
    ostrogradsky_hamiltonian(p).pullback(&ostrogradsky_matrix(p))
}

/// The canonical bracket transported to `(q, q̇, q̈, q⃛)`:
/// `T⁻¹ J_c T⁻ᵀ`.
pub fn canonical_tensor_in_pu_variables(p: &PuParams) -> Result<PoissonTensor> {
    let tinv = inverse(&ostrogradsky_matrix(p))?;
    let j = &(&tinv * canonical_tensor().matrix()) * &tinv.transpose();
    Ok(PoissonTensor::from_nearly_antisymmetric(j))
}
