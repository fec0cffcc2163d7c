//! Two-field embedding `(w, z)` with positive kinetic terms, realised as a
//! Tb1 map with `ν₀ = 1`.

use super::catalog::build;
use super::{Branch, FreeParams, Quad4, TransformKind, TransformSpec, XYState};
use crate::error::{PuError, Result};
use crate::model::{PhaseState, PuParams};
use crate::numkit::Mat;

#[derive(Debug, Clone)]
pub struct SmEmbedding {
    pub spec: TransformSpec,
    pub mu_w: f64,
    pub mu_z: f64,
    pub tau: f64,
    /// `Ω = (4μ_z/μ_w)^{1/4}/τ`
    pub omega: f64,
    /// `δ = α² − 4β − Ω⁴`
    pub delta: f64,
    /// `λ = (α ± √δ)/2`
    pub lambda: f64,
    pub nu_w: f64,
    pub nu_z: f64,
    /// Hamiltonian over `(w, z, p_w, p_z)`.
    pub hamiltonian: Quad4,
    /// `(w, z, p_w, p_z) = G (q, q̇, q̈, q⃛)`.
    pub map: Mat,
    /// `H(G v) = scale · E(v)` with `E` the Tb1 energy form; `scale = μ_wτ²`.
    pub scale: f64,
}

impl SmEmbedding {
    /// `w = λτ²q + τ²q̈`, `z = q`, `p_w = μ_w ẇ`, `p_z = μ_z ż`.
    pub fn apply(&self, v: &PhaseState) -> XYState {
        let w = self.map.mul_vec(&v.to_array());
        XYState::new(w[0], w[1], w[2], w[3])
    }
}

pub fn sm_embedding(p: &PuParams, mu_w: f64, mu_z: f64, tau: f64, branch: Branch) -> Result<SmEmbedding> {
    if !(mu_w > 0.0 && mu_z > 0.0 && mu_w.is_finite() && mu_z.is_finite()) {
        return Err(PuError::InvalidInput("mu_w and mu_z must be positive".into()));
    }
    if !(tau.is_finite() && tau != 0.0) {
        return Err(PuError::InvalidInput("tau must be finite and nonzero".into()));
    }
    let a = p.alpha;
    let omega = (4.0 * mu_z / mu_w).powf(0.25) / tau.abs();
    let om4 = omega.powi(4);
    let delta = p.discriminant() - om4;
    if delta < 0.0 {
        return Err(PuError::ComplexBranch(format!("delta = {delta} is negative")));
    }
    let s = branch.sign();
    let root = delta.sqrt();
    let lambda = (a + s * root) / 2.0;
    let (rw, rz) = (a - s * root, a + s * root);
    if rw < 0.0 || rz < 0.0 {
        return Err(PuError::ComplexBranch("alpha -/+ sqrt(delta) is negative".into()));
    }
    let nu_w = (mu_w * rw).sqrt() / 2.0;
    let nu_z = (mu_z * rz).sqrt() / 2.0;
    let a2d = a * a - delta;
    if a2d <= 0.0 {
        return Err(PuError::ParameterDomain("alpha^2 - delta must be positive".into()));
    }

    let t2 = tau * tau;
    let spec = build(TransformKind::Tb1, FreeParams::Tb1 { a_x: 1.0 / t2, b_x: (a - lambda) / t2, g: -om4 / 4.0 }, p)?;

    let cz = -nu_z * omega * omega / a2d.sqrt();
    let u = [nu_w, cz, 0.0, 0.0];
    let mut s_mat = Mat::outer(&u, &u).scale(2.0);
    s_mat[(1, 1)] += 8.0 * p.beta * nu_z * nu_z / a2d;
    s_mat[(2, 2)] += 1.0 / mu_w;
    s_mat[(3, 3)] += 1.0 / mu_z;
    let hamiltonian = Quad4::new(s_mat)?;

    let map = Mat::from_rows([
        [lambda * t2, 0.0, t2, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, mu_w * lambda * t2, 0.0, mu_w * t2],
        [0.0, mu_z, 0.0, 0.0],
    ]);
    Ok(SmEmbedding { spec, mu_w, mu_z, tau, omega, delta, lambda, nu_w, nu_z, hamiltonian, map, scale: mu_w * t2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::plane_fit;
    use crate::transform::catalog::energy_form;

    #[test]
    fn embedding_reproduces_tb1_energy() {
        let p = PuParams::new(5.0, 4.0).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let e = sm_embedding(&p, 1.3, 0.4, 1.7, branch).unwrap();
            let l = &e.spec.lag;
            let t2 = e.tau * e.tau;
            assert!((e.spec.mu[0] - e.lambda * t2).abs() < 1e-12);
            assert!((e.spec.mu[2] - t2).abs() < 1e-12);
            assert!((e.spec.nu[0] - 1.0).abs() < 1e-12);
            assert!((l.a_y - e.mu_z / (e.mu_w * t2)).abs() < 1e-12);
            assert!((l.b_y - e.mu_z * e.lambda / (e.mu_w * t2)).abs() < 1e-12);
            let pulled = e.hamiltonian.pullback(&e.map);
            assert!(pulled.distance(&energy_form(&e.spec).scaled(e.scale)) < 1e-10, "{branch:?}");
            let fit = plane_fit(&p, &pulled).unwrap();
            let t4 = t2 * t2;
            assert!((fit.h1 + e.mu_w * t4 * e.lambda).abs() < 1e-9);
            assert!((fit.h2 + e.mu_w * t4).abs() < 1e-9);
        }
    }

    #[test]
    fn kinetic_terms_are_positive() {
        let p = PuParams::new(5.0, 4.0).unwrap();
        let e = sm_embedding(&p, 1.0, 1.0, 2.0, Branch::Plus).unwrap();
        assert!(e.hamiltonian.matrix()[(2, 2)] > 0.0 && e.hamiltonian.matrix()[(3, 3)] > 0.0);
        assert!(matches!(sm_embedding(&p, 1.0, 1.0, 0.5, Branch::Plus), Err(PuError::ComplexBranch(_))));
        assert!(sm_embedding(&p, -1.0, 1.0, 2.0, Branch::Plus).is_err());
    }
}
