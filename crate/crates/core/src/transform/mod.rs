//! Linear maps `x = μ·(q, q̇, q̈)`, `y = ν·(q, q̇, q̈)` from the fourth-order
//! oscillator onto the two-dimensional Lagrangian
//! `L = ½aₓẋ² + ½a_yẏ² − ½bₓx² − ½b_yy² − gxy`.

pub mod brackets;
pub mod catalog;
pub mod positivity;
pub mod sm;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{PuError, Result};
use crate::model::QuadHamiltonian;
use crate::numkit::{is_positive_definite, leading_minors, Mat};

pub use brackets::{
    catalog_tensor, closed_form_brackets, flow_preserving_tensor, j1_special_choice, j2_special_choice,
    pushforward_brackets, tb1_j2_choice, transform_tensor, BracketTable,
};
pub use catalog::{
    build, catalog_pullback, defining_residual, energy_form, forward, forward_matrix, inverse, inverse_matrix,
    legendre, pullback_hamiltonian, DefiningResidual, PullbackFit,
};
pub use positivity::{
    closed_form_x_piece, ghost_form, ghost_variants, positivity_decompose, positivity_window, GhostKinetic,
    PositivityCase, PositivityDecomposition,
};
pub use sm::{sm_embedding, SmEmbedding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s < 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Ta1,
    Ta2,
    Tb1,
    Tb2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransformKind {
    Ta1(Branch),
    Ta2(Branch),
    Tb1,
    Tb2(Branch),
}

impl TransformKind {
    pub const ALL: [TransformKind; 7] = [
        TransformKind::Ta1(Branch::Plus),
        TransformKind::Ta1(Branch::Minus),
        TransformKind::Ta2(Branch::Plus),
        TransformKind::Ta2(Branch::Minus),
        TransformKind::Tb1,
        TransformKind::Tb2(Branch::Plus),
        TransformKind::Tb2(Branch::Minus),
    ];

    pub fn family(self) -> Family {
        match self {
            TransformKind::Ta1(_) => Family::Ta1,
            TransformKind::Ta2(_) => Family::Ta2,
            TransformKind::Tb1 => Family::Tb1,
            TransformKind::Tb2(_) => Family::Tb2,
        }
    }

    pub fn branch(self) -> Branch {
        match self {
            TransformKind::Ta1(b) | TransformKind::Ta2(b) | TransformKind::Tb2(b) => b,
            TransformKind::Tb1 => Branch::Plus,
        }
    }

    /// Both equations of motion map onto the fourth-order equation.
    pub fn maps_both_equations(self) -> bool {
        matches!(self.family(), Family::Ta1 | Family::Ta2)
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |b: &Branch| if *b == Branch::Plus { '+' } else { '-' };
        match self {
            TransformKind::Ta1(b) => write!(f, "Ta1{}", sign(b)),
            TransformKind::Ta2(b) => write!(f, "Ta2{}", sign(b)),
            TransformKind::Tb1 => write!(f, "Tb1"),
            TransformKind::Tb2(b) => write!(f, "Tb2{}", sign(b)),
        }
    }
}

impl FromStr for TransformKind {
    type Err = PuError;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('−', "-");
        let kind = match norm.as_str() {
            "ta1+" => TransformKind::Ta1(Branch::Plus),
            "ta1-" => TransformKind::Ta1(Branch::Minus),
            "ta2+" => TransformKind::Ta2(Branch::Plus),
            "ta2-" => TransformKind::Ta2(Branch::Minus),
            "tb1" => TransformKind::Tb1,
            "tb2+" => TransformKind::Tb2(Branch::Plus),
            "tb2-" => TransformKind::Tb2(Branch::Minus),
            _ => {
                return Err(PuError::InvalidInput(format!(
                    "unknown transformation '{s}' (expected Ta1±, Ta2±, Tb1 or Tb2±)"
                )))
            }
        };
        Ok(kind)
    }
}

impl Serialize for TransformKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parameters left free by each family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FreeParams {
    /// Ta1± and Ta2±.
    Ta { a_x: f64, a_y: f64, g: f64 },
    Tb1 { a_x: f64, b_x: f64, g: f64 },
    Tb2 { a_x: f64, b_y: f64, g: f64 },
}

/// Coefficients of the two-dimensional Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagParams {
    pub a_x: f64,
    pub a_y: f64,
    pub b_x: f64,
    pub b_y: f64,
    pub g: f64,
}

/// `ρ_g = √(α² − 4β − 4g²/(aₓa_y))`, `ρ₀ = √(α² − 4β)` and
/// `τ = bₓ² − aₓbₓα + aₓ²β`. Roots are stored non-negative; `None` when the
/// radicand is negative or undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoContext {
    pub rho_g_plus: Option<f64>,
    pub rho0_plus: Option<f64>,
    pub tau: f64,
}

impl RhoContext {
    pub fn rho_g(&self, b: Branch) -> Option<f64> {
        self.rho_g_plus.map(|r| b.sign() * r)
    }

    pub fn rho_g_minus(&self) -> Option<f64> {
        self.rho_g(Branch::Minus)
    }

    pub fn rho0(&self, b: Branch) -> Option<f64> {
        self.rho0_plus.map(|r| b.sign() * r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub mu: [f64; 3],
    pub nu: [f64; 3],
    pub lag: LagParams,
    pub rho: RhoContext,
}

impl TransformSpec {
    /// `μ₂ν₀ − μ₀ν₂`.
    pub fn determinant(&self) -> f64 {
        self.mu[2] * self.nu[0] - self.mu[0] * self.nu[2]
    }
}

/// `(x, y, pₓ, p_y)` with `pₓ = aₓẋ`, `p_y = a_yẏ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct XYState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl XYState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self { x, y, px, py }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }
}

/// Quadratic form over `(x, y, pₓ, p_y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quad4 {
    form: QuadHamiltonian,
}

impl Quad4 {
    pub fn new(s: Mat) -> Result<Self> {
        if s.rows() != 4 {
            return Err(PuError::InvalidInput("Quad4 needs a 4x4 matrix".into()));
        }
        Ok(Self { form: QuadHamiltonian::new(s)? })
    }

    pub(crate) fn from_form(form: QuadHamiltonian) -> Self {
        Self { form }
    }

    pub fn as_form(&self) -> &QuadHamiltonian {
        &self.form
    }

    pub fn matrix(&self) -> &Mat {
        self.form.matrix()
    }

    pub fn value(&self, w: &XYState) -> f64 {
        self.form.value(&w.to_array())
    }

    pub fn minors(&self) -> Result<Vec<f64>> {
        leading_minors(self.matrix())
    }

    pub fn is_positive_definite(&self) -> Result<bool> {
        is_positive_definite(self.matrix())
    }

    pub fn distance(&self, other: &Quad4) -> f64 {
        self.form.distance(&other.form)
    }

    /// Form in PU variables obtained by substituting `w = F v`.
    pub fn pullback(&self, f: &Mat) -> QuadHamiltonian {
        self.form.pullback(f)
    }
}
