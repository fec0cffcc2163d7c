//! Positive-definite splittings of the transformed Hamiltonians and the
//! two ghost-like two-dimensional variants.

use serde::Serialize;

use super::catalog::{build, forward_matrix, legendre};
use super::{Branch, FreeParams, Quad4, TransformKind, TransformSpec};
use crate::error::{PuError, Result};
use crate::hierarchy::square_pair;
use crate::model::{h_combination, PuParams, QuadHamiltonian};
use crate::model::DEGENERACY_TOL;
use crate::numkit::inverse;

/// Sign of the `p_y²` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GhostKinetic {
    /// `½(pₓ² − p_y²)`
    Lorentzian,
    /// `½(pₓ² + p_y²)`
    Euclidean,
}

impl GhostKinetic {
    fn a_y(self) -> f64 {
        match self {
            GhostKinetic::Lorentzian => -1.0,
            GhostKinetic::Euclidean => 1.0,
        }
    }
}

/// Ta2 at `aₓ = 1`, `a_y = ∓1` together with its Legendre transform.
pub fn ghost_variants(
    p: &PuParams,
    kinetic: GhostKinetic,
    g: f64,
    branch: Branch,
) -> Result<(TransformSpec, Quad4)> {
    let spec = build(TransformKind::Ta2(branch), FreeParams::Ta { a_x: 1.0, a_y: kinetic.a_y(), g }, p)?;
    let h = legendre(&spec)?;
    Ok((spec, h))
}

/// Closed forms of the two variants:
/// Lorentzian `½(pₓ² − p_y²) + ¼(ρ + α)x² + ¼(ρ − α)y² + gxy`, `ρ = ±√(α² − 4β + 4g²)`;
/// Euclidean `½(pₓ² + p_y²) + ¼(α + ρ)x² + ¼(α − ρ)y² + gxy`, `ρ = ±√(α² − 4β − 4g²)`.
pub fn ghost_form(p: &PuParams, kinetic: GhostKinetic, g: f64, branch: Branch) -> Result<Quad4> {
    let a = p.alpha;
    let radicand = match kinetic {
        GhostKinetic::Lorentzian => p.discriminant() + 4.0 * g * g,
        GhostKinetic::Euclidean => p.discriminant() - 4.0 * g * g,
    };
    if radicand < 0.0 {
        return Err(PuError::ComplexBranch(format!("rho^2 = {radicand} is negative")));
    }
    let rho = branch.sign() * radicand.sqrt();
    let (bx, by, ky) = match kinetic {
        GhostKinetic::Lorentzian => ((rho + a) / 2.0, (rho - a) / 2.0, -1.0),
        GhostKinetic::Euclidean => ((a + rho) / 2.0, (a - rho) / 2.0, 1.0),
    };
    Quad4::new(crate::numkit::Mat::from_rows([
        [bx, g, 0.0, 0.0],
        [g, by, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, ky],
    ]))
}

/// Cases with a two-square splitting: Ta2 at `aₓ = a_y = 1`, Tb1 at `aₓ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PositivityCase {
    Ta2 { g: f64, branch: Branch },
    Tb1 { b_x: f64, g: f64 },
}

impl PositivityCase {
    pub fn spec(&self, p: &PuParams) -> Result<TransformSpec> {
        match *self {
            PositivityCase::Ta2 { g, branch } => {
                build(TransformKind::Ta2(branch), FreeParams::Ta { a_x: 1.0, a_y: 1.0, g }, p)
            }
            PositivityCase::Tb1 { b_x, g } => build(TransformKind::Tb1, FreeParams::Tb1 { a_x: 1.0, b_x, g }, p),
        }
    }

    /// `(c_{H₁}, c_{H₂})` of the pulled-back Hamiltonian; defined even where
    /// the map itself has no real branch.
    pub fn pulled_back_coefficients(&self, p: &PuParams) -> (f64, f64) {
        match *self {
            PositivityCase::Ta2 { g, .. } => (2.0 * g - p.alpha, -2.0),
            PositivityCase::Tb1 { b_x, .. } => (b_x - p.alpha, -1.0),
        }
    }

    /// Prefactor of the `(i, j)` square pair.
    fn prefactor(&self, wi: f64, wj: f64) -> f64 {
        match *self {
            PositivityCase::Ta2 { g, .. } => (2.0 * g + wi - wj) / (2.0 * (wi - wj)),
            PositivityCase::Tb1 { b_x, .. } => (b_x - wj) / (2.0 * (wi - wj)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PositivityDecomposition {
    /// `None` when the case has no real transformation.
    pub spec: Option<TransformSpec>,
    /// Pulled-back Hamiltonian `c_{H₁}H₁ + c_{H₂}H₂`.
    pub c_h1: f64,
    pub c_h2: f64,
    pub h12: QuadHamiltonian,
    pub h21: QuadHamiltonian,
    pub prefactor12: f64,
    pub prefactor21: f64,
    /// The two pieces in `(x, y, pₓ, p_y)`; present when the map exists and
    /// inverts.
    pub x_pieces: Option<(Quad4, Quad4)>,
}

impl PositivityDecomposition {
    pub fn total(&self) -> QuadHamiltonian {
        &self.h12 + &self.h21
    }

    pub fn pulled_back(&self, p: &PuParams) -> QuadHamiltonian {
        h_combination(p, self.c_h1, self.c_h2)
    }
}

fn distinct_squares(p: &PuParams) -> Result<(f64, f64)> {
    let (w1, w2) = p
        .omega_squared()
        .map_err(|e| PuError::DecompositionUndefined(e.to_string()))?;
    if (w1 - w2).abs() <= DEGENERACY_TOL {
        return Err(PuError::DecompositionUndefined("frequencies are degenerate".into()));
    }
    Ok((w1, w2))
}

pub fn positivity_decompose(p: &PuParams, case: PositivityCase) -> Result<PositivityDecomposition> {
    let (w1, w2) = distinct_squares(p)?;
    let spec = case.spec(p).ok();
    let (c_h1, c_h2) = case.pulled_back_coefficients(p);
    let (k12, k21) = (case.prefactor(w1, w2), case.prefactor(w2, w1));
    let h12 = square_pair(k12, w1, w2);
    let h21 = square_pair(k21, w2, w1);
    let x_pieces = spec
        .as_ref()
        .and_then(|s| inverse(&forward_matrix(s)).ok())
        .map(|finv| (Quad4::from_form(h12.pullback(&finv)), Quad4::from_form(h21.pullback(&finv))));
    Ok(PositivityDecomposition { spec, c_h1, c_h2, h12, h21, prefactor12: k12, prefactor21: k21, x_pieces })
}

/// Both prefactors positive: `|2g| < |ω₁² − ω₂²|` for Ta2, `bₓ` strictly
/// between `ω₁²` and `ω₂²` for Tb1.
pub fn positivity_window(p: &PuParams, case: PositivityCase) -> Result<bool> {
    let (w1, w2) = distinct_squares(p)?;
    Ok(case.prefactor(w1, w2) > 0.0 && case.prefactor(w2, w1) > 0.0)
}

/// `k [(ℓ₁·w)² + ωᵢ²(ℓ₂·w)²]` on `(x, y, pₓ, p_y)`.
fn square_pair_xy(k: f64, wi: f64, l1: [f64; 4], l2: [f64; 4]) -> Quad4 {
    let a = QuadHamiltonian::square_of_linear(&l1, k);
    let b = QuadHamiltonian::square_of_linear(&l2, k * wi);
    Quad4::from_form(&a + &b)
}

/// Closed form of the `(i, j)` piece in `(x, y, pₓ, p_y)`.
/// Ta2: `[(pₓκ₊ + p_yκ₋)² + ωᵢ²(xκ₊ + yκ₋)²]` with
/// `κ₊ = ½ + ρ/(4g + 2ωᵢ² − 2ωⱼ²)`, `κ₋ = 1 − κ₊`.
/// Tb1: `[(pₓλ_ν + p_y τ λ_μ)² + ωᵢ²(xλ_ν − yλ_μ)²]` with
/// `λ_μ = (μ₀ − μ₂ωⱼ²)/d`, `λ_ν = (ν₀ − ν₂ωⱼ²)/d`, `τ = −1/a_y`.
pub fn closed_form_x_piece(p: &PuParams, case: PositivityCase, wi: f64, wj: f64) -> Result<Quad4> {
    let spec = case.spec(p)?;
    let k = case.prefactor(wi, wj);
    match case {
        PositivityCase::Ta2 { g, branch } => {
            let rho = spec
                .rho
                .rho_g(branch)
                .ok_or_else(|| PuError::ComplexBranch("rho_g is not real".into()))?;
            let kp = 0.5 + rho / (4.0 * g + 2.0 * wi - 2.0 * wj);
            let km = 1.0 - kp;
            Ok(square_pair_xy(k, wi, [0.0, 0.0, kp, km], [kp, km, 0.0, 0.0]))
        }
        PositivityCase::Tb1 { .. } => {
            let d = spec.determinant();
            let ([m0, _, m2], [n0, _, n2]) = (spec.mu, spec.nu);
            let lm = (m0 - m2 * wj) / d;
            let ln = (n0 - n2 * wj) / d;
            let tau = -1.0 / spec.lag.a_y;
            Ok(square_pair_xy(k, wi, [0.0, 0.0, ln, tau * lm], [ln, -lm, 0.0, 0.0]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::catalog::catalog_pullback;

    fn p21() -> PuParams {
        PuParams::from_frequencies(2.0, 1.0).unwrap()
    }

    #[test]
    fn ghost_closed_forms_match_legendre() {
        let p = p21();
        for kinetic in [GhostKinetic::Lorentzian, GhostKinetic::Euclidean] {
            for branch in [Branch::Plus, Branch::Minus] {
                let (_, h) = ghost_variants(&p, kinetic, 0.4, branch).unwrap();
                assert!(h.distance(&ghost_form(&p, kinetic, 0.4, branch).unwrap()) < 1e-14);
            }
        }
    }

    #[test]
    fn lorentzian_at_zero_coupling() {
        let p = p21();
        let (spec, _) = ghost_variants(&p, GhostKinetic::Lorentzian, 0.0, Branch::Plus).unwrap();
        let (c1, c2) = catalog_pullback(&spec, &p).unwrap();
        assert!((c1 - 3.0).abs() < 1e-12 && c2.abs() < 1e-15);
    }

    #[test]
    fn pieces_sum_to_pullback() {
        let p = p21();
        for case in [
            PositivityCase::Ta2 { g: 0.7, branch: Branch::Plus },
            PositivityCase::Ta2 { g: -1.2, branch: Branch::Minus },
            PositivityCase::Tb1 { b_x: 2.5, g: 0.8 },
            PositivityCase::Tb1 { b_x: 7.0, g: -0.5 },
        ] {
            let d = positivity_decompose(&p, case).unwrap();
            assert!(d.total().distance(&d.pulled_back(&p)) < 1e-12, "{case:?}");
            let (c1, c2) = catalog_pullback(d.spec.as_ref().unwrap(), &p).unwrap();
            assert!((c1 - d.c_h1).abs() < 1e-12 && (c2 - d.c_h2).abs() < 1e-12);
        }
    }

    #[test]
    fn windows() {
        let p = p21();
        assert!(positivity_window(&p, PositivityCase::Ta2 { g: 1.4, branch: Branch::Plus }).unwrap());
        assert!(!positivity_window(&p, PositivityCase::Ta2 { g: 1.6, branch: Branch::Plus }).unwrap());
        assert!(positivity_window(&p, PositivityCase::Tb1 { b_x: 2.0, g: 1.0 }).unwrap());
        assert!(!positivity_window(&p, PositivityCase::Tb1 { b_x: 4.5, g: 1.0 }).unwrap());
    }

    #[test]
    fn window_agrees_with_minors() {
        let p = p21();
        for (g, pd) in [(1.0, true), (2.0, false)] {
            let case = PositivityCase::Ta2 { g, branch: Branch::Plus };
            let d = positivity_decompose(&p, case).unwrap();
            assert_eq!(crate::numkit::is_positive_definite(d.total().matrix()).unwrap(), pd);
            assert_eq!(positivity_window(&p, case).unwrap(), pd);
        }
        assert!(positivity_decompose(&p, PositivityCase::Ta2 { g: 2.0, branch: Branch::Plus }).unwrap().spec.is_none());
    }

    #[test]
    fn x_pieces_match_closed_forms() {
        let p = p21();
        let (w1, w2) = p.omega_squared().unwrap();
        for case in [
            PositivityCase::Ta2 { g: 0.7, branch: Branch::Plus },
            PositivityCase::Ta2 { g: 0.7, branch: Branch::Minus },
            PositivityCase::Tb1 { b_x: 2.5, g: 0.8 },
            PositivityCase::Tb1 { b_x: 3.0, g: -0.5 },
        ] {
            let d = positivity_decompose(&p, case).unwrap();
            let (x12, x21) = d.x_pieces.unwrap();
            assert!(x12.distance(&closed_form_x_piece(&p, case, w1, w2).unwrap()) < 1e-10, "{case:?}");
            assert!(x21.distance(&closed_form_x_piece(&p, case, w2, w1).unwrap()) < 1e-10, "{case:?}");
        }
    }
}
