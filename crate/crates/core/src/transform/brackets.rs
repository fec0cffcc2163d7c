use serde::Serialize;

use super::catalog::{build, catalog_pullback, forward_matrix};
use super::{Branch, FreeParams, TransformKind, TransformSpec};
use crate::error::{PuError, Result};
use crate::model::{poisson_j1, PoissonTensor, PuParams};
use crate::numkit::Mat;

const STRUCTURE_TOL: f64 = 1e-10;

/// `β J₂`, written without dividing by `β`.
fn beta_j2(p: &PuParams) -> Mat {
    let b = p.beta;
    Mat::from_rows([
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -b],
        [0.0, 0.0, b, 0.0],
    ])
}

/// Tensor `J` with `J ∇(c₃H₁ + c₄H₂)` equal to the flow:
/// `J = (c₃J₁ + c₄βJ₂)/(c₃² − αc₃c₄ + βc₄²)`.
pub fn flow_preserving_tensor(p: &PuParams, c3: f64, c4: f64) -> Result<PoissonTensor> {
    let e = c3 * c3 - p.alpha * c3 * c4 + p.beta * c4 * c4;
    let scale = c3 * c3 + (p.alpha * c3 * c4).abs() + (p.beta * c4 * c4).abs();
    if scale == 0.0 || e.abs() <= STRUCTURE_TOL * scale {
        return Err(PuError::SingularStructure(format!(
            "c3 H1 + c4 H2 with c3 = {c3}, c4 = {c4} is degenerate; no tensor reproduces the flow"
        )));
    }
    let j = &poisson_j1(p).matrix().scale(c3) + &beta_j2(p).scale(c4);
    Ok(PoissonTensor::from_nearly_antisymmetric(j.scale(1.0 / e)))
}

/// Flow-preserving tensor for the pulled-back Hamiltonian of `spec`.
pub fn transform_tensor(spec: &TransformSpec, p: &PuParams) -> Result<PoissonTensor> {
    let (c3, c4) = catalog_pullback(spec, p)?;
    flow_preserving_tensor(p, c3, c4).map_err(|e| match e {
        PuError::SingularStructure(msg) => PuError::SingularStructure(format!("{}: {msg}", spec.kind)),
        other => other,
    })
}

/// Closed forms for Ta2 and Tb1:
/// `J_Ta2 = aₓ²a_y² {[aₓ(α+ρ) + a_y(α−ρ) − 4g]J₁ + 2β(aₓ+a_y)J₂} / (2[a_y g − aₓ(g + a_yρ)]²)`,
/// `J_Tb1 = aₓ²[(bₓ − αaₓ)J₁ − βaₓJ₂]/τ`.
pub fn catalog_tensor(spec: &TransformSpec, p: &PuParams) -> Result<PoissonTensor> {
    let l = &spec.lag;
    let (a, j1, bj2) = (p.alpha, poisson_j1(p), beta_j2(p));
    let (k1, k2, pref) = match spec.kind {
        TransformKind::Ta2(b) => {
            let rho = spec
                .rho
                .rho_g(b)
                .ok_or_else(|| PuError::ComplexBranch("rho_g is not real".into()))?;
            let den = l.a_y * l.g - l.a_x * (l.g + l.a_y * rho);
            if den.abs() <= STRUCTURE_TOL * (l.a_y * l.g).abs().max((l.a_x * l.a_y * rho).abs()).max(f64::MIN_POSITIVE) {
                return Err(PuError::SingularStructure(format!("{}: pulled-back Hamiltonian is degenerate", spec.kind)));
            }
            let pref = (l.a_x * l.a_y).powi(2) / (2.0 * den * den);
            (l.a_x * (a + rho) + l.a_y * (a - rho) - 4.0 * l.g, 2.0 * (l.a_x + l.a_y), pref)
        }
        TransformKind::Tb1 => (l.b_x - a * l.a_x, -l.a_x, l.a_x * l.a_x / spec.rho.tau),
        other => {
            return Err(PuError::SingularStructure(format!(
                "{other}: pulled-back Hamiltonian is degenerate"
            )))
        }
    };
    let j = &j1.matrix().scale(k1) + &bj2.scale(k2);
    Ok(PoissonTensor::from_nearly_antisymmetric(j.scale(pref)))
}

/// Brackets among `(x, y, pₓ, p_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketTable {
    pub x_y: f64,
    pub x_px: f64,
    pub x_py: f64,
    pub y_px: f64,
    pub y_py: f64,
    pub px_py: f64,
}

impl BracketTable {
    pub fn from_matrix(b: &Mat) -> Self {
        Self {
            x_y: b[(0, 1)],
            x_px: b[(0, 2)],
            x_py: b[(0, 3)],
            y_px: b[(1, 2)],
            y_py: b[(1, 3)],
            px_py: b[(2, 3)],
        }
    }

    pub fn to_matrix(&self) -> Mat {
        let u = [
            [0.0, self.x_y, self.x_px, self.x_py],
            [0.0, 0.0, self.y_px, self.y_py],
            [0.0, 0.0, 0.0, self.px_py],
            [0.0, 0.0, 0.0, 0.0],
        ];
        Mat::from_fn(4, 4, |i, j| if i < j { u[i][j] } else if i > j { -u[j][i] } else { 0.0 })
    }

    /// `{x, pₓ} = {y, p_y} = 1`, all others zero.
    pub fn canonical() -> Self {
        Self { x_y: 0.0, x_px: 1.0, x_py: 0.0, y_px: 0.0, y_py: 1.0, px_py: 0.0 }
    }

    pub fn max_abs_diff(&self, other: &BracketTable) -> f64 {
        self.to_matrix().distance(&other.to_matrix())
    }
}

/// `F J Fᵀ`: the bracket induced on `(x, y, pₓ, p_y)` by `J`.
pub fn pushforward_brackets(spec: &TransformSpec, j: &PoissonTensor) -> BracketTable {
    let f = forward_matrix(spec);
    BracketTable::from_matrix(&(&(&f * j.matrix()) * &f.transpose()))
}

/// Brackets induced by `c₁J₁ + c₂J₂` in closed form (`μ₁ = ν₁ = 0`).
pub fn closed_form_brackets(spec: &TransformSpec, p: &PuParams, c1: f64, c2: f64) -> Result<BracketTable> {
    if p.beta == 0.0 {
        return Err(PuError::ParameterDomain("J2 requires beta != 0".into()));
    }
    if spec.mu[1] != 0.0 || spec.nu[1] != 0.0 {
        return Err(PuError::InvalidInput("closed form needs mu_1 = nu_1 = 0".into()));
    }
    let (a, b) = (p.alpha, p.beta);
    let ([m0, _, m2], [n0, _, n2]) = (spec.mu, spec.nu);
    let (ax, ay) = (spec.lag.a_x, spec.lag.a_y);
    let cross = m2 * (n2 * (a * c1 - c2) - c1 * n0) + m0 * (c2 * n0 / b - c1 * n2);
    Ok(BracketTable {
        x_y: 0.0,
        x_px: ax * (m2 * m2 * (a * c1 - c2) + c2 * m0 * m0 / b - 2.0 * c1 * m2 * m0),
        x_py: ay * cross,
        y_px: ax * cross,
        y_py: ay * (c2 * n0 * n0 / b - n2 * n2 * (c2 - a * c1) - 2.0 * c1 * n2 * n0),
        px_py: 0.0,
    })
}

/// Ta2 with `aₓ = −a_y = s√(α² − 4β − 4g)`; its tensor is `J₁`.
pub fn j1_special_choice(p: &PuParams, sign: Branch, g: f64) -> Result<TransformSpec> {
    let r = p.discriminant() - 4.0 * g;
    if r < 0.0 {
        return Err(PuError::ComplexBranch(format!("alpha^2 - 4 beta - 4 g = {r} is negative")));
    }
    if r == 0.0 {
        return Err(PuError::Construction("alpha^2 - 4 beta - 4 g vanishes".into()));
    }
    let ax = sign.sign() * r.sqrt();
    let branch = Branch::from_sign(ax + 2.0 * g / ax);
    build(TransformKind::Ta2(branch), FreeParams::Ta { a_x: ax, a_y: -ax, g }, p)
}

/// Ta2 with `aₓ = 1`, `a_y = −½`, `g = −α + 3s√(β/2)`; its tensor is `J₂`.
pub fn j2_special_choice(p: &PuParams, sign: Branch) -> Result<TransformSpec> {
    if p.beta <= 0.0 {
        return Err(PuError::ParameterDomain("this choice needs beta > 0".into()));
    }
    let g = -p.alpha + sign.sign() * 3.0 * (p.beta / 2.0).sqrt();
    let rho = (8.0 * g - p.alpha) / 3.0;
    build(TransformKind::Ta2(Branch::from_sign(rho)), FreeParams::Ta { a_x: 1.0, a_y: -0.5, g }, p)
}

/// Tb1 with `aₓ = −1`, `bₓ = −α`; its tensor is `J₂` for every `g ≠ 0`.
pub fn tb1_j2_choice(p: &PuParams, g: f64) -> Result<TransformSpec> {
    build(TransformKind::Tb1, FreeParams::Tb1 { a_x: -1.0, b_x: -p.alpha, g }, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{flow_residual, h_combination, poisson_j2};

    fn p21() -> PuParams {
        PuParams::from_frequencies(2.0, 1.0).unwrap()
    }

    #[test]
    fn flow_tensor_reproduces_flow() {
        let p = PuParams::new(5.0, 4.0).unwrap();
        let j = flow_preserving_tensor(&p, 0.7, -1.3).unwrap();
        assert!(flow_residual(&j, &h_combination(&p, 0.7, -1.3), &p) < 1e-12);
        assert!(matches!(flow_preserving_tensor(&p, 1.0, 1.0), Err(PuError::SingularStructure(_))));
    }

    #[test]
    fn degenerate_families_have_no_tensor() {
        let p = p21();
        let ta1 = build(TransformKind::Ta1(Branch::Plus), FreeParams::Ta { a_x: 1.0, a_y: 2.0, g: 0.1 }, &p).unwrap();
        assert!(matches!(transform_tensor(&ta1, &p), Err(PuError::SingularStructure(_))));
        let tb2 = build(TransformKind::Tb2(Branch::Minus), FreeParams::Tb2 { a_x: 1.0, b_y: 0.5, g: 0.3 }, &p).unwrap();
        assert!(matches!(transform_tensor(&tb2, &p), Err(PuError::SingularStructure(_))));
    }

    #[test]
    fn special_choices() {
        let p = PuParams::new(5.0, 4.0).unwrap();
        let j1 = j1_special_choice(&p, Branch::Plus, 0.5).unwrap();
        assert!(transform_tensor(&j1, &p).unwrap().distance(&poisson_j1(&p)) < 1e-12);
        let j2 = j2_special_choice(&p, Branch::Plus).unwrap();
        assert_eq!(j2.kind, TransformKind::Ta2(Branch::Minus));
        assert!(transform_tensor(&j2, &p).unwrap().distance(&poisson_j2(&p).unwrap()) < 1e-12);
        let tb = tb1_j2_choice(&p, 0.8).unwrap();
        assert!(transform_tensor(&tb, &p).unwrap().distance(&poisson_j2(&p).unwrap()) < 1e-12);
    }

    #[test]
    fn pushforward_is_canonical() {
        let p = p21();
        let spec = build(TransformKind::Tb1, FreeParams::Tb1 { a_x: 1.0, b_x: 2.5, g: 0.8 }, &p).unwrap();
        let j = transform_tensor(&spec, &p).unwrap();
        assert!(pushforward_brackets(&spec, &j).max_abs_diff(&BracketTable::canonical()) < 1e-12);
        assert!(catalog_tensor(&spec, &p).unwrap().distance(&j) < 1e-12);
    }

    #[test]
    fn closed_form_matches_pushforward() {
        let p = p21();
        let spec = build(TransformKind::Ta2(Branch::Plus), FreeParams::Ta { a_x: 1.3, a_y: 0.7, g: 0.4 }, &p).unwrap();
        let j = PoissonTensor::combine(0.3, &poisson_j1(&p), -1.2, &poisson_j2(&p).unwrap());
        let closed = closed_form_brackets(&spec, &p, 0.3, -1.2).unwrap();
        assert!(closed.max_abs_diff(&pushforward_brackets(&spec, &j)) < 1e-12);
    }
}
