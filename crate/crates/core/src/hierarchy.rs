//! Conserved-charge ladder generated by the recursion
//! `J₂ ∇H_{n+1} = J₁ ∇H_n`, the polynomials `Pₙ`, the Hamiltonian pair of
//! the fourth symmetry and flow-preserving combinations `c₁J₁ + c₂J₂`.

use serde::Serialize;

use crate::error::{PuError, Result};
use crate::model::{
    h_combination, hamiltonian_h1, hamiltonian_h2, poisson_j1, poisson_j2, PoissonTensor, PuParams,
    QuadHamiltonian, DEGENERACY_TOL,
};
use crate::numkit::{inverse, is_positive_definite, least_squares, Mat};
use crate::symmetry;

/// Default ladder depth.
pub const DEFAULT_DEPTH: usize = 8;

const RECURSION_SYMMETRY_TOL: f64 = 1e-10;
const PLANE_FIT_TOL: f64 = 1e-10;
const COMBINATION_TOL: f64 = 1e-10;

/// Coordinates of a charge in the `(H₁, H₂)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneCoordinates {
    pub h1: f64,
    pub h2: f64,
    /// Relative least-squares residual of the fit.
    pub residual: f64,
}

/// Least-squares coordinates of `h` on `(H₁, H₂)`. Fails when `h` is not in
/// the plane to within `1e-10` relative.
pub fn plane_coordinates(p: &PuParams, h: &QuadHamiltonian) -> Result<PlaneCoordinates> {
    let c = plane_fit(p, h)?;
    if c.residual > PLANE_FIT_TOL {
        return Err(PuError::InvalidInput(format!(
            "form is not a combination of H1 and H2 (relative residual {:e})",
            c.residual
        )));
    }
    Ok(c)
}

/// Same fit without the residual assertion.
pub fn plane_fit(p: &PuParams, h: &QuadHamiltonian) -> Result<PlaneCoordinates> {
    let s1 = hamiltonian_h1(p);
    let s2 = hamiltonian_h2(p);
    let basis = [s1.matrix().as_slice(), s2.matrix().as_slice()];
    let target = h.matrix().as_slice();
    let (c, res) = least_squares(&basis, target)?;
    let scale = 1.0 + h.matrix().norm();
    Ok(PlaneCoordinates { h1: c[0], h2: c[1], residual: res / scale })
}

/// `S_{n+1} = J₂⁻¹ J₁ Sₙ`.
pub fn next_charge(p: &PuParams, h: &QuadHamiltonian) -> Result<QuadHamiltonian> {
    let j2 = poisson_j2(p)?;
    let j1 = poisson_j1(p);
    let product = &(&inverse(j2.matrix())? * j1.matrix()) * h.matrix();
    let asymmetry = product.asymmetry();
    if asymmetry > RECURSION_SYMMETRY_TOL * (1.0 + product.norm()) {
        return Err(PuError::RecursionBreakdown { asymmetry });
    }
    Ok(QuadHamiltonian::from_nearly_symmetric(product))
}

/// `H₁, H₂, …, H_depth` built by the recursion.
#[derive(Debug, Clone)]
pub struct ChargeLadder {
    pub charges: Vec<QuadHamiltonian>,
    pub coordinates: Vec<PlaneCoordinates>,
}

impl ChargeLadder {
    pub fn build(p: &PuParams, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(PuError::InvalidInput("ladder depth must be at least 1".into()));
        }
        let mut charges = vec![hamiltonian_h1(p)];
        if depth > 1 {
            charges.push(hamiltonian_h2(p));
        }
        while charges.len() < depth {
            let next = next_charge(p, charges.last().expect("non-empty"))?;
            charges.push(next);
        }
        let coordinates =
            charges.iter().map(|h| plane_coordinates(p, h)).collect::<Result<Vec<_>>>()?;
        Ok(Self { charges, coordinates })
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    /// `Hₙ`, one-based.
    pub fn charge(&self, n: usize) -> Option<&QuadHamiltonian> {
        n.checked_sub(1).and_then(|i| self.charges.get(i))
    }

    /// Largest `‖J₂ Sₙ₊₁ − J₁ Sₙ‖` over consecutive pairs.
    pub fn recursion_residual(&self, p: &PuParams) -> Result<f64> {
        let j1 = poisson_j1(p);
        let j2 = poisson_j2(p)?;
        Ok(self
            .charges
            .windows(2)
            .map(|w| {
                let lhs = j2.matrix() * w[1].matrix();
                let rhs = j1.matrix() * w[0].matrix();
                lhs.distance(&rhs) / (1.0 + rhs.norm())
            })
            .fold(0.0, f64::max))
    }
}

/// `Pₙ = Σ_{k=1}^{⌊(n−1)/2+1⌋} cₖⁿ α^{n+1−2k} β^{k−1}` with
/// `cₖⁿ = (−1)^{n+k+1}/(k−1)! · ∏_{ℓ=k}^{2k−2} (n−ℓ)`.
pub fn pu_polynomial(n: usize, p: &PuParams) -> f64 {
    let upper = n.div_ceil(2);
    let mut total = 0.0;
    for k in 1..=upper {
        let sign = if (n + k + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut prod = 1.0;
        for l in k..=(2 * k).saturating_sub(2) {
            prod *= n as f64 - l as f64;
        }
        let fact: f64 = (1..k).map(|i| i as f64).product();
        let coef = sign * prod / fact;
        total += coef * p.alpha.powi((n + 1 - 2 * k) as i32) * p.beta.powi((k - 1) as i32);
    }
    total
}

/// `Pₙ` via `P₀ = 0`, `P₁ = −1`, `Pₙ₊₁ = −α Pₙ − β Pₙ₋₁`.
pub fn pu_polynomial_recursive(n: usize, p: &PuParams) -> f64 {
    let (mut a, mut b) = (0.0, -1.0);
    if n == 0 {
        return a;
    }
    for _ in 1..n {
        let c = -p.alpha * b - p.beta * a;
        a = b;
        b = c;
    }
    b
}

/// `H_{k+1} = β P_{k−1} H₁ + (P_{k+1} + β P_{k−1})/α · H₂`.
pub fn ladder_via_x3(p: &PuParams, k: usize) -> Result<QuadHamiltonian> {
    if k == 0 {
        return Err(PuError::InvalidInput("k must be at least 1".into()));
    }
    if p.alpha == 0.0 {
        return Err(PuError::ParameterDomain("closed-form ladder requires alpha != 0".into()));
    }
    let pkm1 = pu_polynomial(k - 1, p);
    let pkp1 = pu_polynomial(k + 1, p);
    let c1 = p.beta * pkm1;
    let c2 = (pkp1 + p.beta * pkm1) / p.alpha;
    Ok(h_combination(p, c1, c2))
}

/// `X₃ᵏ(H₁)` by repeated action of the generator `½M²`.
pub fn ladder_via_x3_action(p: &PuParams, k: usize) -> QuadHamiltonian {
    let x3 = symmetry::paper_basis(p).x3;
    let mut h = hamiltonian_h1(p);
    for _ in 0..k {
        h = symmetry::act_on_hamiltonian(&x3, &h);
    }
    h
}

/// `(H̄₁, H̄₂) = (αH₁ + H₂, −βH₁)`.
pub fn x4_pair(p: &PuParams) -> (QuadHamiltonian, QuadHamiltonian) {
    (h_combination(p, p.alpha, 1.0), h_combination(p, -p.beta, 0.0))
}

/// `max(‖J₁S̄₁ − A₄‖, ‖J₂S̄₂ − A₄‖)` relative to `1 + ‖A₄‖`.
pub fn x4_pair_residual(p: &PuParams) -> Result<f64> {
    let (hb1, hb2) = x4_pair(p);
    let a4 = symmetry::paper_basis(p).x4.a;
    let r1 = (poisson_j1(p).matrix() * hb1.matrix()).distance(&a4);
    let r2 = (poisson_j2(p)?.matrix() * hb2.matrix()).distance(&a4);
    Ok(r1.max(r2) / (1.0 + a4.norm()))
}

/// Which numerator was used for `c₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumeratorReading {
    /// `c₁ω₁⁴`.
    OmegaOneFourth,
    /// `c₁ω₁²ω₂² = c₁β`.
    OmegaProduct,
}

impl NumeratorReading {
    pub fn formula(self) -> &'static str {
        match self {
            NumeratorReading::OmegaOneFourth => "c1*w1^2*w1^2",
            NumeratorReading::OmegaProduct => "c1*w1^2*w2^2",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CombinedStructure {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub jbar: PoissonTensor,
    pub hbar: QuadHamiltonian,
    pub reading: NumeratorReading,
    pub residual: f64,
}

/// `(c₂ − c₁ω₁²)(c₂ − c₁ω₂²) = c₂² − αc₁c₂ + βc₁²`, with a scale for
/// relative comparisons.
fn combination_denominator(p: &PuParams, c1: f64, c2: f64) -> (f64, f64) {
    let d = c2 * c2 - p.alpha * c1 * c2 + p.beta * c1 * c1;
    let scale = c2 * c2 + (p.alpha * c1 * c2).abs() + (p.beta * c1 * c1).abs();
    (d, scale)
}

/// `J̄ = c₁J₁ + c₂J₂` with `H̄ = c₃H₁ + c₄H₂` chosen so that `J̄∇H̄` is the
/// flow. Both candidate numerators for `c₃` are tried; the first one whose
/// flow residual is below `1e-10` wins.
pub fn combine(p: &PuParams, c1: f64, c2: f64) -> Result<CombinedStructure> {
    if !(c1.is_finite() && c2.is_finite()) {
        return Err(PuError::InvalidInput("c1 and c2 must be finite".into()));
    }
    let (d, scale) = combination_denominator(p, c1, c2);
    if scale == 0.0 || d.abs() <= COMBINATION_TOL * scale {
        return Err(PuError::DegenerateCombination(format!(
            "(c2 - c1 w1^2)(c2 - c1 w2^2) = {d:e} vanishes for c1 = {c1}, c2 = {c2}"
        )));
    }
    let j2 = poisson_j2(p)?;
    let jbar = PoissonTensor::combine(c1, &poisson_j1(p), c2, &j2);
    let c4 = c2 / d;

    let mut candidates = Vec::with_capacity(2);
    if let Ok((w1sq, _)) = p.omega_squared() {
        candidates.push((NumeratorReading::OmegaOneFourth, c1 * w1sq * w1sq / d));
    }
    candidates.push((NumeratorReading::OmegaProduct, c1 * p.beta / d));

    let mut best: Option<CombinedStructure> = None;
    for (reading, c3) in candidates {
        let hbar = h_combination(p, c3, c4);
        let residual = crate::model::flow_residual(&jbar, &hbar, p);
        let candidate =
            CombinedStructure { c1, c2, c3, c4, jbar: jbar.clone(), hbar, reading, residual };
        if residual <= COMBINATION_TOL {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(candidate);
        }
    }
    let best = best.expect("at least one candidate");
    Err(PuError::DegenerateCombination(format!(
        "no numerator reading reproduces the flow (best residual {:e})",
        best.residual
    )))
}

/// The two positive-square pieces of `H̄`.
#[derive(Debug, Clone)]
pub struct PdDecomposition {
    pub h12: QuadHamiltonian,
    pub h21: QuadHamiltonian,
    pub prefactor12: f64,
    pub prefactor21: f64,
}

impl PdDecomposition {
    pub fn total(&self) -> QuadHamiltonian {
        &self.h12 + &self.h21
    }
}

/// `κ · [(q⃛ + ω_j²q̇)² + ω_i²(q̈ + ω_j²q)²]` as a quadratic form.
pub fn square_pair(kappa: f64, wi_sq: f64, wj_sq: f64) -> QuadHamiltonian {
    let a = QuadHamiltonian::square_of_linear(&[0.0, wj_sq, 0.0, 1.0], kappa);
    let b = QuadHamiltonian::square_of_linear(&[wj_sq, 0.0, 1.0, 0.0], kappa * wi_sq);
    &a + &b
}

fn nondegenerate_squares(p: &PuParams) -> Result<(f64, f64)> {
    let (w1, w2) = p
        .omega_squared()
        .map_err(|e| PuError::DecompositionUndefined(e.to_string()))?;
    if (w1 - w2).abs() <= DEGENERACY_TOL {
        return Err(PuError::DecompositionUndefined("frequencies are degenerate".into()));
    }
    if w1 == 0.0 || w2 == 0.0 {
        return Err(PuError::DecompositionUndefined("a frequency vanishes".into()));
    }
    Ok((w1, w2))
}

/// `H̄ = H₁₂ + H₂₁` with
/// `Hᵢⱼ = ωᵢ²/(2(c₁ωᵢ² − c₂)(ωᵢ² − ωⱼ²)) · [(q⃛+ωⱼ²q̇)² + ωᵢ²(q̈+ωⱼ²q)²]`.
pub fn pd_decompose(p: &PuParams, c1: f64, c2: f64) -> Result<PdDecomposition> {
    let (w1, w2) = nondegenerate_squares(p)?;
    let (d, scale) = combination_denominator(p, c1, c2);
    if scale == 0.0 || d.abs() <= COMBINATION_TOL * scale {
        return Err(PuError::DegenerateCombination(format!(
            "c2 coincides with c1 * omega^2 (c1 = {c1}, c2 = {c2})"
        )));
    }
    let pref = |wi: f64, wj: f64| wi / (2.0 * (c1 * wi - c2) * (wi - wj));
    let (k12, k21) = (pref(w1, w2), pref(w2, w1));
    Ok(PdDecomposition {
        h12: square_pair(k12, w1, w2),
        h21: square_pair(k21, w2, w1),
        prefactor12: k12,
        prefactor21: k21,
    })
}

/// `(c₁ω₁² − c₂)(ω₁² − ω₂²) > 0 ∧ (c₁ω₂² − c₂)(ω₂² − ω₁²) > 0`.
pub fn pd_window(p: &PuParams, c1: f64, c2: f64) -> Result<bool> {
    let (w1, w2) = nondegenerate_squares(p)?;
    Ok((c1 * w1 - c2) * (w1 - w2) > 0.0 && (c1 * w2 - c2) * (w2 - w1) > 0.0)
}

/// Sylvester test on `H̄` itself.
pub fn pd_by_minors(p: &PuParams, c1: f64, c2: f64) -> Result<bool> {
    let combined = combine(p, c1, c2)?;
    is_positive_definite(combined.hbar.matrix())
}

/// `J₂⁻¹J₁` as a matrix, the recursion operator.
pub fn recursion_operator(p: &PuParams) -> Result<Mat> {
    Ok(&inverse(poisson_j2(p)?.matrix())? * poisson_j1(p).matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{flow_residual, quad_bracket};

    fn p54() -> PuParams {
        PuParams::new(5.0, 4.0).unwrap()
    }

    fn coords(p: &PuParams, h: &QuadHamiltonian) -> (f64, f64) {
        let c = plane_coordinates(p, h).unwrap();
        (c.h1, c.h2)
    }

    fn close(a: (f64, f64), b: (f64, f64), tol: f64) -> bool {
        (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol
    }

    #[test]
    fn next_charge_examples() {
        let p = p54();
        let h3 = next_charge(&p, &hamiltonian_h2(&p)).unwrap();
        assert!(close(coords(&p, &h3), (-4.0, -5.0), 1e-10));
        let h4 = next_charge(&p, &h3).unwrap();
        assert!(close(coords(&p, &h4), (20.0, 21.0), 1e-10));
        assert!(matches!(
            next_charge(&PuParams::new(1.0, 0.0).unwrap(), &hamiltonian_h1(&p)),
            Err(PuError::ParameterDomain(_))
        ));
    }

    #[test]
    fn next_charge_rejects_non_integrable_forms() {
        let p = p54();
        let f = QuadHamiltonian::square_of_linear(&[1.0, 0.0, 0.0, 0.0], 0.5);
        assert!(matches!(next_charge(&p, &f), Err(PuError::RecursionBreakdown { .. })));
    }

    #[test]
    fn polynomial_examples() {
        let p = p54();
        assert_eq!(pu_polynomial(0, &p), 0.0);
        assert_eq!(pu_polynomial(1, &p), -1.0);
        assert_eq!(pu_polynomial(2, &p), 5.0);
        assert_eq!(pu_polynomial(3, &p), -21.0);
        assert_eq!(pu_polynomial(5, &PuParams::new(1.0, 1.0).unwrap()), 1.0);
        // α³ − 2αβ = 125 − 40.
        assert_eq!(pu_polynomial(4, &p), 85.0);
        for n in 0..12 {
            let a = pu_polynomial(n, &p);
            let b = pu_polynomial_recursive(n, &p);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn ladder_routes_agree() {
        let p = p54();
        assert!(ladder_via_x3(&p, 1).unwrap().distance(&hamiltonian_h2(&p)) < 1e-12);
        assert!(close(coords(&p, &ladder_via_x3(&p, 2).unwrap()), (-4.0, -5.0), 1e-10));
        assert!(close(coords(&p, &ladder_via_x3(&p, 3).unwrap()), (20.0, 21.0), 1e-10));
        let ladder = ChargeLadder::build(&p, 7).unwrap();
        for k in 1..=6 {
            let closed = ladder_via_x3(&p, k).unwrap();
            let action = ladder_via_x3_action(&p, k);
            let scale = 1.0 + closed.matrix().norm();
            assert!(closed.distance(ladder.charge(k + 1).unwrap()) <= 1e-9 * scale);
            assert!(closed.distance(&action) <= 1e-9 * scale);
        }
        assert!(ladder.recursion_residual(&p).unwrap() < 1e-12);
        assert!(matches!(
            ladder_via_x3(&PuParams::new(0.0, 1.0).unwrap(), 2),
            Err(PuError::ParameterDomain(_))
        ));
    }

    #[test]
    fn ladder_is_in_involution() {
        let p = p54();
        let ladder = ChargeLadder::build(&p, 6).unwrap();
        let j1 = poisson_j1(&p);
        let j2 = poisson_j2(&p).unwrap();
        for a in &ladder.charges {
            for b in &ladder.charges {
                let scale = 1.0 + a.matrix().norm() * b.matrix().norm();
                assert!(quad_bracket(&j1, a, b).matrix().max_abs() <= 1e-12 * scale);
                assert!(quad_bracket(&j2, a, b).matrix().max_abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn x4_pair_examples() {
        let p = p54();
        let (hb1, _) = x4_pair(&p);
        assert!(close(coords(&p, &hb1), (5.0, 1.0), 1e-12));
        assert!(x4_pair_residual(&p).unwrap() < 1e-12);
        let p0 = PuParams::new(2.0, 0.0).unwrap();
        assert_eq!(x4_pair(&p0).1.matrix().max_abs(), 0.0);
    }

    #[test]
    fn combine_examples() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        let pure_j1 = combine(&p, 1.0, 0.0).unwrap();
        assert!((pure_j1.c3 - 1.0).abs() < 1e-12 && pure_j1.c4 == 0.0);
        assert!(pure_j1.hbar.distance(&hamiltonian_h1(&p)) < 1e-12);

        let pure_j2 = combine(&p, 0.0, 1.0).unwrap();
        assert!(pure_j2.jbar.distance(&poisson_j2(&p).unwrap()) == 0.0);
        assert_eq!(pure_j2.c3, 0.0);
        assert!(flow_residual(&pure_j2.jbar, &pure_j2.hbar, &p) < 1e-12);

        let generic = combine(&p, 1.0, 10.0).unwrap();
        assert!(generic.residual <= 1e-10);
        assert_eq!(generic.reading, NumeratorReading::OmegaProduct);

        assert!(matches!(combine(&p, 1.0, 4.0), Err(PuError::DegenerateCombination(_))));
        assert!(matches!(combine(&p, 1.0, 1.0), Err(PuError::DegenerateCombination(_))));
    }

    #[test]
    fn combine_degenerate_frequencies_accept_both_readings() {
        let p = PuParams::from_frequencies(1.5, 1.5).unwrap();
        let c = combine(&p, 1.0, 3.0).unwrap();
        assert_eq!(c.reading, NumeratorReading::OmegaOneFourth);
        assert!(c.residual <= 1e-10);
    }

    #[test]
    fn decomposition_examples() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        assert!(pd_window(&p, 1.0, 2.0).unwrap());
        assert!(pd_by_minors(&p, 1.0, 2.0).unwrap());
        let d = pd_decompose(&p, 1.0, 2.0).unwrap();
        let hbar = combine(&p, 1.0, 2.0).unwrap().hbar;
        assert!(d.total().distance(&hbar) < 1e-10);
        assert!(d.prefactor12 > 0.0 && d.prefactor21 > 0.0);
        assert!(!pd_window(&p, 0.0, 2.0).unwrap());
        assert!(!pd_window(&p, 1.0, 0.0).unwrap());
        assert!(matches!(
            pd_decompose(&PuParams::from_frequencies(1.0, 1.0).unwrap(), 1.0, 2.0),
            Err(PuError::DecompositionUndefined(_))
        ));
    }
}
