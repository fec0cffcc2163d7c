use crate::dynamics::potential::{Potential, PotentialArg};
use crate::error::{PuError, Result};
use crate::model::{companion_field, PhaseState, PuParams, QuadHamiltonian};
use crate::numkit::Mat;

/// Right-hand side of `v̇ = f(v)`.
#[derive(Debug, Clone)]
pub enum Field {
    Linear(PuParams),
    /// `q⁗ = −αq̈ − βq + V′(arg)`.
    WithPotential(PuParams, Potential),
}

impl Field {
    pub fn params(&self) -> &PuParams {
        match self {
            Field::Linear(p) | Field::WithPotential(p, _) => p,
        }
    }

    pub fn potential(&self) -> Option<&Potential> {
        match self {
            Field::Linear(_) => None,
            Field::WithPotential(_, pot) => Some(pot),
        }
    }

    fn evaluator(&self) -> impl Fn(&[f64; 4]) -> [f64; 4] + '_ {
        let m = companion_field(self.params());
        move |v: &[f64; 4]| {
            let mut out = linear_rhs(&m, v);
            if let Some(pot) = self.potential() {
                out[3] += pot.derivative(v[pot.arg.index()]);
            }
            out
        }
    }

    pub fn eval(&self, v: &PhaseState) -> PhaseState {
        PhaseState::from_array((self.evaluator())(&v.to_array()))
    }
}

fn linear_rhs(m: &Mat, v: &[f64; 4]) -> [f64; 4] {
    let w = m.mul_vec(v);
    [w[0], w[1], w[2], w[3]]
}

/// One classical Runge–Kutta step.
pub fn rk4_step<const N: usize>(f: &impl Fn(&[f64; N]) -> [f64; N], v: &[f64; N], h: f64) -> [f64; N] {
    let axpy = |a: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(v);
    let k2 = f(&axpy(v, &k1, h / 2.0));
    let k3 = f(&axpy(v, &k2, h / 2.0));
    let k4 = f(&axpy(v, &k3, h));
    let mut out = *v;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Uniform grid `t_k = k·h` with `n·h = t_end`; `h` is adjusted slightly
/// when `t_end` is not a multiple of the requested step.
pub fn time_grid(h: f64, t_end: f64) -> Result<(usize, f64)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(PuError::InvalidInput(format!("step h must be positive, got {h}")));
    }
    if !(t_end.is_finite() && t_end >= h) {
        return Err(PuError::InvalidInput(format!("t_end must be at least h, got {t_end}")));
    }
    let n = (t_end / h).round().max(1.0) as usize;
    Ok((n, t_end / n as f64))
}

const BLOWUP: f64 = 1e150;

/// Fixed-step RK4 over `n` steps, returning all `n + 1` states.
pub fn integrate_system<const N: usize>(
    f: impl Fn(&[f64; N]) -> [f64; N],
    v0: [f64; N],
    h: f64,
    n: usize,
) -> Result<Vec<[f64; N]>> {
    let mut states = Vec::with_capacity(n + 1);
    states.push(v0);
    let mut v = v0;
    for k in 1..=n {
        v = rk4_step(&f, &v, h);
        if v.iter().any(|x| !x.is_finite() || x.abs() > BLOWUP) {
            return Err(PuError::Divergence { t: k as f64 * h });
        }
        states.push(v);
    }
    Ok(states)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub h: f64,
    pub samples: Vec<(f64, PhaseState)>,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        &self.samples.last().expect("trajectories are non-empty").1
    }

    /// `H(v(t)) [+ V(arg(t))]` at every sample.
    pub fn charge_series(&self, h: &QuadHamiltonian, augment: Option<&Potential>) -> Vec<f64> {
        self.samples
            .iter()
            .map(|(_, v)| h.value_at(v) + augment.map_or(0.0, |pot| pot.value_at(v)))
            .collect()
    }

    pub fn max_abs_q(&self, t_max: f64) -> f64 {
        self.samples
            .iter()
            .take_while(|(t, _)| *t <= t_max + 1e-12)
            .fold(0.0, |m, (_, v)| m.max(v.q.abs()))
    }
}

pub fn integrate(field: &Field, v0: &PhaseState, h: f64, t_end: f64) -> Result<Trajectory> {
    if !v0.is_finite() {
        return Err(PuError::InvalidInput("initial state must be finite".into()));
    }
    let (n, h) = time_grid(h, t_end)?;
    let states = integrate_system(field.evaluator(), v0.to_array(), h, n)?;
    let samples = states
        .into_iter()
        .enumerate()
        .map(|(k, v)| (k as f64 * h, PhaseState::from_array(v)))
        .collect();
    Ok(Trajectory { h, samples })
}

/// `max_t |H(t) − H(0)| / (1 + |H(0)|)` per charge.
pub fn conservation_report(
    traj: &Trajectory,
    charges: &[QuadHamiltonian],
    augment: Option<&Potential>,
) -> Vec<f64> {
    charges
        .iter()
        .map(|h| {
            let series = traj.charge_series(h, augment);
            let h0 = series[0];
            series.iter().fold(0.0_f64, |m, x| m.max((x - h0).abs())) / (1.0 + h0.abs())
        })
        .collect()
}

/// The conserved charge of an interacting field: `H₁ + V(q)` or
/// `H₂ + W(q̈)`.
pub fn interacting_charge(p: &PuParams, pot: &Potential) -> QuadHamiltonian {
    match pot.arg {
        PotentialArg::Q => crate::model::hamiltonian_h1(p),
        PotentialArg::Qdd => crate::model::hamiltonian_h2(p),
    }
}
