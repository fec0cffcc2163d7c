use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::dynamics::integrate::{integrate, integrate_system, time_grid, Field};
use crate::dynamics::potential::{Potential, PotentialArg};
use crate::error::{PuError, Result};
use crate::model::{poisson_j1, poisson_j2, PhaseState, PoissonTensor, PuParams};
use crate::sampling::{sample_state, uniform};
use crate::transform::{build, forward, inverse, Branch, FreeParams, TransformKind, TransformSpec, XYState};

use super::integrate::interacting_charge;

pub const COMPAT_DIRECTIONS: usize = 32;
pub const COMPAT_STATES: usize = 50;
pub const COMPATIBLE_TOL: f64 = 1e-9;
pub const INCOMPATIBLE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionResidual {
    pub index: usize,
    pub c1: f64,
    pub c2: f64,
    /// `max ‖J∇Hⁱⁿᵗ − vⁱⁿᵗ‖ / max ‖vⁱⁿᵗ‖` at unit scale.
    pub residual: f64,
    /// Same with `J` rescaled by the least-squares factor.
    pub ray_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub potential: String,
    pub directions: Vec<DirectionResidual>,
    /// Indices with residual ≤ `COMPATIBLE_TOL`.
    pub compatible: Vec<usize>,
    /// Smallest residual among the remaining directions.
    pub min_incompatible: f64,
    pub samples: usize,
}

impl CompatibilityReport {
    /// Exactly one compatible direction and every other one at or above the
    /// floor.
    pub fn is_unique(&self) -> bool {
        self.compatible.len() == 1 && self.min_incompatible >= INCOMPATIBLE_FLOOR
    }

    pub fn compatible_direction(&self) -> Option<(f64, f64)> {
        match self.compatible.as_slice() {
            [k] => Some((self.directions[*k].c1, self.directions[*k].c2)),
            _ => None,
        }
    }
}

/// Scans `J = cos θ J₁ + sin θ J₂` at `θₖ = 2πk/32` against the interacting
/// field, with `Hⁱⁿᵗ = H₁ + V(q)` or `H₂ + W(q̈)`.
pub fn interaction_compatibility(p: &PuParams, pot: &Potential, rng: &mut impl Rng) -> Result<CompatibilityReport> {
    let states: Vec<PhaseState> = (0..COMPAT_STATES).map(|_| sample_state(rng, 1.0)).collect();
    let args: Vec<f64> = states.iter().map(|v| pot.argument(v)).collect();
    if pot.has_constant_derivative(&args) {
        return Err(PuError::Inconclusive(format!(
            "potential '{pot}' has a constant derivative on the sample; every direction behaves alike"
        )));
    }
    let (j1, j2) = (poisson_j1(p), poisson_j2(p)?);
    let h = interacting_charge(p, pot);
    let field = Field::WithPotential(*p, pot.clone());
    let targets: Vec<[f64; 4]> = states.iter().map(|v| field.eval(v).to_array()).collect();
    let grads: Vec<Vec<f64>> = states
        .iter()
        .map(|v| {
            let mut g = h.gradient(&v.to_array());
            g[pot.arg.index()] += pot.derivative_at(v);
            g
        })
        .collect();
    let scale = targets.iter().map(|t| norm(t)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let mut directions = Vec::with_capacity(COMPAT_DIRECTIONS);
    for k in 0..COMPAT_DIRECTIONS {
        let theta = 2.0 * PI * k as f64 / COMPAT_DIRECTIONS as f64;
        let (c1, c2) = snap(theta);
        let j = PoissonTensor::combine(c1, &j1, c2, &j2);
        let images: Vec<Vec<f64>> = grads.iter().map(|g| j.matrix().mul_vec(g)).collect();
        let residual = max_miss(&images, &targets, 1.0) / scale;
        let (num, den) = images.iter().zip(&targets).fold((0.0, 0.0), |(n, d), (a, b)| {
            (n + a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>(), d + a.iter().map(|x| x * x).sum::<f64>())
        });
        let lambda = if den > 0.0 { num / den } else { 0.0 };
        let ray_residual = max_miss(&images, &targets, lambda) / scale;
        directions.push(DirectionResidual { index: k, c1, c2, residual, ray_residual });
    }
    let compatible: Vec<usize> =
        directions.iter().filter(|d| d.residual <= COMPATIBLE_TOL).map(|d| d.index).collect();
    let min_incompatible = directions
        .iter()
        .filter(|d| d.residual > COMPATIBLE_TOL)
        .map(|d| d.residual)
        .fold(f64::INFINITY, f64::min);
    Ok(CompatibilityReport { potential: pot.to_string(), directions, compatible, min_incompatible, samples: COMPAT_STATES })
}

/// `(cos θ, sin θ)` with round-off below 1e-15 set to zero.
fn snap(theta: f64) -> (f64, f64) {
    let clean = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    (clean(theta.cos()), clean(theta.sin()))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_miss(images: &[Vec<f64>], targets: &[[f64; 4]], lambda: f64) -> f64 {
    images
        .iter()
        .zip(targets)
        .map(|(a, b)| norm(&a.iter().zip(b).map(|(x, y)| lambda * x - y).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstrainedBranch {
    pub a_x: f64,
    pub a_y: f64,
    pub spec: TransformSpec,
    /// `max(|∂q/∂x + 1|, |∂q/∂y + 1|)` through the inverse map.
    pub constraint_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionTransform {
    pub g: f64,
    pub branches: Vec<ConstrainedBranch>,
    /// Ta1± cannot satisfy the constraints: `x` and `y` are proportional.
    pub ta1_singular: bool,
}

/// `∂q/∂x = −ν₂/d`, `∂q/∂y = μ₂/d` with `d = μ₂ν₀ − μ₀ν₂`.
pub fn constraint_residual(spec: &TransformSpec) -> f64 {
    let d = spec.determinant();
    let scale = (spec.mu[2] * spec.nu[0]).abs() + (spec.mu[0] * spec.nu[2]).abs();
    if d.abs() <= 1e-12 * scale {
        return f64::INFINITY;
    }
    let dqdx = -spec.nu[2] / d;
    let dqdy = spec.mu[2] / d;
    (dqdx + 1.0).abs().max((dqdy + 1.0).abs())
}

/// Ta2 maps with `q = −x − y`, forcing `aₓ = −a_y = ±√(α² − 4β − 4g)`.
pub fn interaction_transform_constraint(p: &PuParams, g: f64) -> Result<InteractionTransform> {
    let r = p.discriminant() - 4.0 * g;
    let scale = p.alpha * p.alpha + 4.0 * p.beta.abs() + 4.0 * g.abs();
    if r < 0.0 && r.abs() > 1e-12 * scale {
        return Err(PuError::ComplexBranch(format!("alpha^2 - 4 beta - 4 g = {r} is negative")));
    }
    if r.abs() <= 1e-12 * scale {
        return Err(PuError::Construction("alpha^2 - 4 beta - 4 g vanishes, so a_x = 0".into()));
    }
    let mut branches = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let a_x = sign * r.sqrt();
        let branch = Branch::from_sign(a_x + 2.0 * g / a_x);
        let spec = build(TransformKind::Ta2(branch), FreeParams::Ta { a_x, a_y: -a_x, g }, p)?;
        let constraint_residual = constraint_residual(&spec);
        branches.push(ConstrainedBranch { a_x, a_y: -a_x, spec, constraint_residual });
    }
    let ta1_singular = [Branch::Plus, Branch::Minus].iter().all(|&b| {
        build(TransformKind::Ta1(b), FreeParams::Ta { a_x: branches[0].a_x, a_y: -branches[0].a_x, g }, p)
            .map_or(true, |s| {
                let scale = (s.mu[2] * s.nu[0]).abs() + (s.mu[0] * s.nu[2]).abs();
                s.determinant().abs() <= 1e-12 * scale
            })
    });
    Ok(InteractionTransform { g, branches, ta1_singular })
}

/// Integrates `aₓẍ = −bₓx − gy + V′(−x−y)`, `a_yÿ = −b_yy − gx + V′(−x−y)`,
/// maps back to PU variables and compares with the direct PU integration.
/// Returns the maximum component error over the grid.
pub fn two_route_error(
    spec: &TransformSpec,
    p: &PuParams,
    pot: &Potential,
    v0: &PhaseState,
    h: f64,
    t_end: f64,
) -> Result<f64> {
    if pot.arg != PotentialArg::Q {
        return Err(PuError::InvalidInput("the two-dimensional route needs a potential on q".into()));
    }
    if constraint_residual(spec) > 1e-10 {
        return Err(PuError::InvalidInput(format!("{} does not satisfy q = -x - y", spec.kind)));
    }
    let direct = integrate(&Field::WithPotential(*p, pot.clone()), v0, h, t_end)?;
    let l = spec.lag;
    let w0 = forward(spec, v0);
    let z0 = [w0.x, w0.y, w0.px / l.a_x, w0.py / l.a_y];
    let rhs = |z: &[f64; 4]| {
        let dv = pot.derivative(-z[0] - z[1]);
        [
            z[2],
            z[3],
            (-l.b_x * z[0] - l.g * z[1] + dv) / l.a_x,
            (-l.b_y * z[1] - l.g * z[0] + dv) / l.a_y,
        ]
    };
    let (n, h_used) = time_grid(h, t_end)?;
    let states = integrate_system(rhs, z0, h_used, n)?;
    let mut err: f64 = 0.0;
    for (z, (_, v)) in states.iter().zip(&direct.samples) {
        let back = inverse(spec, &XYState::new(z[0], z[1], l.a_x * z[2], l.a_y * z[3]))?;
        err = err.max(back.max_abs_diff(v));
    }
    Ok(err)
}

/// Random initial state of moderate size for the two-route check.
pub fn two_route_initial_state(rng: &mut impl Rng) -> PhaseState {
    PhaseState::new(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng;

    #[test]
    fn quartic_v_selects_j1() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        let rep = interaction_compatibility(&p, &Potential::quartic(1.0, PotentialArg::Q), &mut rng(1)).unwrap();
        assert_eq!(rep.compatible, vec![0]);
        assert!(rep.is_unique(), "{}", rep.min_incompatible);
        assert_eq!(rep.compatible_direction(), Some((1.0, 0.0)));
        // The antipodal direction lies on the same ray.
        assert!(rep.directions[16].ray_residual < 1e-12);
    }

    #[test]
    fn quartic_w_selects_j2() {
        let p = PuParams::new(5.0, 4.0).unwrap();
        let rep = interaction_compatibility(&p, &Potential::quartic(1.0, PotentialArg::Qdd), &mut rng(2)).unwrap();
        assert_eq!(rep.compatible, vec![8]);
        assert!(rep.is_unique());
    }

    #[test]
    fn trivial_potential_is_inconclusive() {
        let p = PuParams::new(5.0, 4.0).unwrap();
        let r = interaction_compatibility(&p, &Potential::zero(), &mut rng(3));
        assert!(matches!(r, Err(PuError::Inconclusive(_))));
    }

    #[test]
    fn constraint_examples() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        let t = interaction_transform_constraint(&p, 0.0).unwrap();
        assert_eq!(t.branches.len(), 2);
        assert!((t.branches[0].a_x - 3.0).abs() < 1e-14 && (t.branches[1].a_x + 3.0).abs() < 1e-14);
        assert!(t.branches.iter().all(|b| b.constraint_residual < 1e-10));
        assert!(t.ta1_singular);
        assert!(matches!(interaction_transform_constraint(&p, 9.0 / 4.0), Err(PuError::Construction(_))));
        assert!(matches!(interaction_transform_constraint(&p, 3.0), Err(PuError::ComplexBranch(_))));
    }

    #[test]
    fn two_routes_agree() {
        let p = PuParams::from_frequencies(2.0, 1.0).unwrap();
        let pot = Potential::quartic(0.25, PotentialArg::Q);
        let t = interaction_transform_constraint(&p, 0.3).unwrap();
        let v0 = PhaseState::new(0.3, -0.2, 0.1, 0.4);
        for b in &t.branches {
            let err = two_route_error(&b.spec, &p, &pot, &v0, 1e-3, 10.0).unwrap();
            assert!(err < 1e-6, "{err}");
        }
    }
}
