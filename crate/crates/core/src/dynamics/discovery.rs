use serde::Serialize;

use crate::error::{PuError, Result};
use crate::model::{companion_field, flow_residual, PoissonTensor, PuParams, QuadHamiltonian};
use crate::numkit::{condition_number, inverse, nullspace, projection_residual, Mat};

pub const DISCOVERY_TOL: f64 = 1e-10;
pub const MAX_CONDITION: f64 = 1e8;

/// Upper-triangle index pairs of a 4×4 antisymmetric matrix.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn antisymmetric(coeffs: &[f64]) -> Mat {
    let mut k = Mat::zeros(4, 4);
    for (&(i, j), &c) in PAIRS.iter().zip(coeffs) {
        k[(i, j)] = c;
        k[(j, i)] = -c;
    }
    k
}

fn coordinates(k: &Mat) -> Vec<f64> {
    PAIRS.iter().map(|&(i, j)| k[(i, j)]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscoveredStructure {
    /// Coordinates of `K` on the upper triangle `(01, 02, 03, 12, 13, 23)`.
    pub k: Vec<f64>,
    pub condition: f64,
    /// `J = K⁻¹`; absent when `K` is too ill-conditioned.
    #[serde(skip)]
    pub tensor: Option<PoissonTensor>,
    /// `S = K M`.
    #[serde(skip)]
    pub hamiltonian: QuadHamiltonian,
    pub symmetry_residual: f64,
    pub flow_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Discovery {
    pub dimension: usize,
    pub structures: Vec<DiscoveredStructure>,
    /// Orthonormal basis of the solution space in upper-triangle coordinates.
    pub basis: Vec<Vec<f64>>,
}

impl Discovery {
    /// Relative distance of an antisymmetric matrix from the solution space.
    pub fn projection_residual(&self, k: &Mat) -> f64 {
        let c = coordinates(k);
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        projection_residual(&self.basis, &c) / n
    }

    pub fn invertible(&self) -> impl Iterator<Item = (&PoissonTensor, &QuadHamiltonian)> {
        self.structures.iter().filter_map(|s| s.tensor.as_ref().map(|t| (t, &s.hamiltonian)))
    }
}

/// All antisymmetric `K` with `K M + Mᵀ K = 0`; each invertible one gives a
/// pair `J = K⁻¹`, `S = K M` with `J S = M`.
pub fn structure_discovery(p: &PuParams) -> Result<Discovery> {
    if p.beta == 0.0 {
        return Err(PuError::ParameterDomain("structure discovery needs beta != 0".into()));
    }
    let m = companion_field(p);
    let mt = m.transpose();
    let mut a = Mat::zeros(16, 6);
    for (col, _) in PAIRS.iter().enumerate() {
        let mut e = [0.0; 6];
        e[col] = 1.0;
        let k = antisymmetric(&e);
        let image = &(&k * &m) + &(&mt * &k);
        for (row, v) in image.as_slice().iter().enumerate() {
            a[(row, col)] = *v;
        }
    }
    let basis = nullspace(&a, DISCOVERY_TOL)?;
    let mut structures = Vec::with_capacity(basis.len());
    for b in &basis {
        let k = antisymmetric(b);
        let s = &k * &m;
        let symmetry_residual = s.asymmetry();
        let hamiltonian = QuadHamiltonian::from_nearly_symmetric(s);
        let condition = condition_number(&k)?;
        let (tensor, flow) = if condition < MAX_CONDITION {
            let j = PoissonTensor::from_nearly_antisymmetric(inverse(&k)?);
            let r = flow_residual(&j, &hamiltonian, p);
            (Some(j), Some(r))
        } else {
            (None, None)
        };
        structures.push(DiscoveredStructure {
            k: b.clone(),
            condition,
            tensor,
            hamiltonian,
            symmetry_residual,
            flow_residual: flow,
        });
    }
    Ok(Discovery { dimension: basis.len(), structures, basis })
}
