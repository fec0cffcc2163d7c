use serde::Serialize;

use super::{Branch, Family, FreeParams, LagParams, Quad4, RhoContext, TransformKind, TransformSpec, XYState};
use crate::error::{PuError, Result};
use crate::hierarchy::{plane_fit, PlaneCoordinates};
use crate::model::{PhaseState, PuParams, QuadHamiltonian};
use crate::numkit::Mat;

const ZERO_TOL: f64 = 1e-12;
const SPEC_TOL: f64 = 1e-9;

fn require_nonzero(value: f64, name: &str) -> Result<()> {
    if !value.is_finite() {
        return Err(PuError::Construction(format!("{name} must be finite")));
    }
    if value.abs() <= ZERO_TOL {
        return Err(PuError::Construction(format!("{name} must be nonzero")));
    }
    Ok(())
}

fn real_root(radicand: f64, what: &str) -> Result<f64> {
    if radicand < 0.0 {
        return Err(PuError::ComplexBranch(format!("{what} = {radicand} is negative")));
    }
    Ok(radicand.sqrt())
}

fn tau_of(p: &PuParams, a_x: f64, b_x: f64) -> f64 {
    b_x * b_x - a_x * b_x * p.alpha + a_x * a_x * p.beta
}

fn rho_context(p: &PuParams, lag: &LagParams) -> RhoContext {
    let disc = p.discriminant();
    let rho0_plus = (disc >= 0.0).then(|| disc.sqrt());
    let rho_g_plus = if lag.a_x * lag.a_y != 0.0 {
        let r = disc - 4.0 * lag.g * lag.g / (lag.a_x * lag.a_y);
        (r >= 0.0).then(|| r.sqrt())
    } else {
        None
    };
    RhoContext { rho_g_plus, rho0_plus, tau: tau_of(p, lag.a_x, lag.b_x) }
}

/// Catalog entry for `kind` at the given free parameters.
pub fn build(kind: TransformKind, free: FreeParams, p: &PuParams) -> Result<TransformSpec> {
    let (a, b) = (p.alpha, p.beta);
    let s = kind.branch().sign();
    let (mu, nu, lag) = match (kind.family(), free) {
        (Family::Ta1, FreeParams::Ta { a_x, a_y, g }) => {
            require_nonzero(a_x, "a_x")?;
            require_nonzero(a_y, "a_y")?;
            let r0 = real_root(p.discriminant(), "alpha^2 - 4 beta")?;
            let rho = s * r0;
            let lag = LagParams {
                a_x,
                a_y,
                b_x: a_x / 2.0 * (a - 2.0 * g / a_y + rho),
                b_y: a_y / 2.0 * (a - 2.0 * g / a_x + rho),
                g,
            };
            ([(a - rho) / (2.0 * a_x), 0.0, 1.0 / a_x], [(a - rho) / (2.0 * a_y), 0.0, 1.0 / a_y], lag)
        }
        (Family::Ta2, FreeParams::Ta { a_x, a_y, g }) => {
            require_nonzero(a_x, "a_x")?;
            require_nonzero(a_y, "a_y")?;
            let r = real_root(
                p.discriminant() - 4.0 * g * g / (a_x * a_y),
                "alpha^2 - 4 beta - 4 g^2/(a_x a_y)",
            )?;
            let rho = s * r;
            let lag = LagParams { a_x, a_y, b_x: a_x / 2.0 * (a + rho), b_y: a_y / 2.0 * (a - rho), g };
            (
                [(a - rho - 2.0 * g / a_y) / (2.0 * a_x), 0.0, 1.0 / a_x],
                [(a + rho - 2.0 * g / a_x) / (2.0 * a_y), 0.0, 1.0 / a_y],
                lag,
            )
        }
        (Family::Tb1, FreeParams::Tb1 { a_x, b_x, g }) => {
            require_nonzero(a_x, "a_x")?;
            require_nonzero(g, "g")?;
            let tau = tau_of(p, a_x, b_x);
            let scale = b_x * b_x + (a_x * b_x * a).abs() + (a_x * a_x * b).abs();
            if tau.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
                return Err(PuError::Construction(format!(
                    "b_x = {b_x} equals a_x (alpha + rho_0)/2, so tau vanishes"
                )));
            }
            let lag = LagParams {
                a_x,
                a_y: -a_x * g * g / tau,
                b_x,
                b_y: g * g * (b_x - a_x * a) / tau,
                g,
            };
            ([(a - b_x / a_x) / a_x, 0.0, 1.0 / a_x], [tau / (g * a_x * a_x), 0.0, 0.0], lag)
        }
        (Family::Tb2, FreeParams::Tb2 { a_x, b_y, g }) => {
            require_nonzero(a_x, "a_x")?;
            require_nonzero(b_y, "b_y")?;
            let r0 = real_root(p.discriminant(), "alpha^2 - 4 beta")?;
            let apr = a + s * r0;
            if apr.abs() <= ZERO_TOL * (1.0 + a.abs()) {
                return Err(PuError::Construction("alpha + rho_0 vanishes on this branch".into()));
            }
            let lag = LagParams { a_x, a_y: 0.0, b_x: g * g / b_y + a_x / 2.0 * apr, b_y, g };
            let mu0 = 2.0 * b / (a_x * apr);
            // Second equation vanishes only with ν₀ = −g μ₀ / b_y.
            let nu0 = -2.0 * b * g / (a_x * b_y * apr);
            ([mu0, 0.0, 1.0 / a_x], [nu0, 0.0, -g / (a_x * b_y)], lag)
        }
        (family, free) => {
            return Err(PuError::InvalidInput(format!(
                "free parameters {free:?} do not belong to the {family:?} family"
            )))
        }
    };
    let rho = rho_context(p, &lag);
    let spec = TransformSpec { kind, mu, nu, lag, rho };
    let res = defining_residual(&spec, p);
    if res.max() > SPEC_TOL {
        return Err(PuError::Construction(format!(
            "{kind} does not map onto the fourth-order equation here (residual {:e})",
            res.max()
        )));
    }
    Ok(spec)
}

/// How well the two equations of motion reproduce `q⁗ + αq̈ + βq = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefiningResidual {
    /// First equation against a nonzero multiple of the PU operator.
    pub first: f64,
    /// Second equation: against a multiple of the PU operator (Ta) or
    /// against zero (Tb).
    pub second: f64,
}

impl DefiningResidual {
    pub fn max(&self) -> f64 {
        self.first.max(self.second)
    }
}

/// Coefficients of `a ẍ + b x + g y` on `(q, q̇, q̈, q⃛, q⁗)`.
fn equation_coefficients(a: f64, b: f64, g: f64, own: &[f64; 3], other: &[f64; 3]) -> [f64; 5] {
    [
        b * own[0] + g * other[0],
        b * own[1] + g * other[1],
        a * own[0] + b * own[2] + g * other[2],
        a * own[1],
        a * own[2],
    ]
}

fn proportional_residual(e: &[f64; 5], p: &PuParams) -> f64 {
    let k = e[4];
    if k == 0.0 || !k.is_finite() {
        return f64::INFINITY;
    }
    let target = [p.beta, 0.0, p.alpha, 0.0, 1.0];
    let dev: f64 = e.iter().zip(target).map(|(x, t)| (x - k * t).powi(2)).sum::<f64>().sqrt();
    dev / (k.abs() * (1.0 + p.alpha.abs() + p.beta.abs()))
}

pub fn defining_residual(spec: &TransformSpec, p: &PuParams) -> DefiningResidual {
    let l = &spec.lag;
    let e1 = equation_coefficients(l.a_x, l.b_x, l.g, &spec.mu, &spec.nu);
    let e2 = equation_coefficients(l.a_y, l.b_y, l.g, &spec.nu, &spec.mu);
    let first = proportional_residual(&e1, p);
    let second = if spec.kind.maps_both_equations() {
        proportional_residual(&e2, p)
    } else {
        let norm: f64 = e2.iter().map(|x| x * x).sum::<f64>().sqrt();
        norm / (e1[4].abs() * (1.0 + p.alpha.abs() + p.beta.abs()))
    };
    DefiningResidual { first, second }
}

/// `F` with `(x, y, pₓ, p_y) = F (q, q̇, q̈, q⃛)`.
pub fn forward_matrix(spec: &TransformSpec) -> Mat {
    let ([m0, m1, m2], [n0, n1, n2]) = (spec.mu, spec.nu);
    let (ax, ay) = (spec.lag.a_x, spec.lag.a_y);
    Mat::from_rows([
        [m0, m1, m2, 0.0],
        [n0, n1, n2, 0.0],
        [0.0, ax * m0, ax * m1, ax * m2],
        [0.0, ay * n0, ay * n1, ay * n2],
    ])
}

pub fn forward(spec: &TransformSpec, v: &PhaseState) -> XYState {
    let w = forward_matrix(spec).mul_vec(&v.to_array());
    XYState::new(w[0], w[1], w[2], w[3])
}

fn check_invertible(spec: &TransformSpec) -> Result<f64> {
    if spec.mu[1] != 0.0 || spec.nu[1] != 0.0 {
        return Err(PuError::NonInvertibleTransform("mu_1 and nu_1 must vanish".into()));
    }
    let det = spec.determinant();
    let scale = (spec.mu[2] * spec.nu[0]).abs() + (spec.mu[0] * spec.nu[2]).abs();
    if det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(PuError::NonInvertibleTransform(format!(
            "{}: mu_2 nu_0 = mu_0 nu_2, so x and y are proportional",
            spec.kind
        )));
    }
    if spec.lag.a_x == 0.0 || spec.lag.a_y == 0.0 {
        return Err(PuError::NonInvertibleTransform(format!(
            "{}: a_y = 0 leaves p_y without a velocity",
            spec.kind
        )));
    }
    Ok(det)
}

/// Inverse map: `q = (μ₂y − ν₂x)/d`, `q̈ = (ν₀x − μ₀y)/d`,
/// `q̇ = (aₓμ₂p_y − a_yν₂pₓ)/(aₓa_y d)`, `q⃛ = (a_yν₀pₓ − aₓμ₀p_y)/(aₓa_y d)`
/// with `d = μ₂ν₀ − μ₀ν₂`.
pub fn inverse_matrix(spec: &TransformSpec) -> Result<Mat> {
    let d = check_invertible(spec)?;
    let ([m0, _, m2], [n0, _, n2]) = (spec.mu, spec.nu);
    let (ax, ay) = (spec.lag.a_x, spec.lag.a_y);
    let k = ax * ay * d;
    Ok(Mat::from_rows([
        [-n2 / d, m2 / d, 0.0, 0.0],
        [0.0, 0.0, -ay * n2 / k, ax * m2 / k],
        [n0 / d, -m0 / d, 0.0, 0.0],
        [0.0, 0.0, ay * n0 / k, -ax * m0 / k],
    ]))
}

pub fn inverse(spec: &TransformSpec, w: &XYState) -> Result<PhaseState> {
    let v = inverse_matrix(spec)?.mul_vec(&w.to_array());
    Ok(PhaseState::new(v[0], v[1], v[2], v[3]))
}

/// `H = pₓ²/(2aₓ) + p_y²/(2a_y) + ½bₓx² + ½b_yy² + gxy`.
pub fn legendre(spec: &TransformSpec) -> Result<Quad4> {
    let l = &spec.lag;
    if l.a_x == 0.0 || l.a_y == 0.0 {
        return Err(PuError::DegenerateLegendre(format!(
            "{}: a kinetic coefficient vanishes (a_x = {}, a_y = {})",
            spec.kind, l.a_x, l.a_y
        )));
    }
    let s = Mat::from_rows([
        [l.b_x, l.g, 0.0, 0.0],
        [l.g, l.b_y, 0.0, 0.0],
        [0.0, 0.0, 1.0 / l.a_x, 0.0],
        [0.0, 0.0, 0.0, 1.0 / l.a_y],
    ]);
    Quad4::new(s)
}

/// Energy `½aₓẋ² + ½a_yẏ² + ½bₓx² + ½b_yy² + gxy` written on PU states.
/// Equals the Legendre transform composed with the forward map and stays
/// defined when `a_y = 0`.
pub fn energy_form(spec: &TransformSpec) -> QuadHamiltonian {
    let ([m0, m1, m2], [n0, n1, n2]) = (spec.mu, spec.nu);
    let l = &spec.lag;
    let x = [m0, m1, m2, 0.0];
    let y = [n0, n1, n2, 0.0];
    let xd = [0.0, m0, m1, m2];
    let yd = [0.0, n0, n1, n2];
    let cross = &Mat::outer(&x, &y) + &Mat::outer(&y, &x);
    let s = &(&(&Mat::outer(&xd, &xd).scale(l.a_x) + &Mat::outer(&yd, &yd).scale(l.a_y))
        + &(&Mat::outer(&x, &x).scale(l.b_x) + &Mat::outer(&y, &y).scale(l.b_y)))
        + &cross.scale(l.g);
    QuadHamiltonian::from_nearly_symmetric(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackFit {
    pub c_h1: f64,
    pub c_h2: f64,
    pub residual: f64,
}

impl From<PlaneCoordinates> for PullbackFit {
    fn from(c: PlaneCoordinates) -> Self {
        Self { c_h1: c.h1, c_h2: c.h2, residual: c.residual }
    }
}

/// Transformed Hamiltonian expressed in PU variables and fitted onto
/// `(H₁, H₂)`.
pub fn pullback_hamiltonian(spec: &TransformSpec, p: &PuParams) -> Result<PullbackFit> {
    Ok(plane_fit(p, &energy_form(spec))?.into())
}

/// Closed-form `(H₁, H₂)` coefficients of each family, with
/// `M⁺ = min(ω₁², ω₂²)` and `M⁻ = max(ω₁², ω₂²)`.
pub fn catalog_pullback(spec: &TransformSpec, p: &PuParams) -> Result<(f64, f64)> {
    let l = &spec.lag;
    let m_pm = |b: Branch| -> Result<f64> {
        let (w1, w2) = p.omega_squared()?;
        Ok(match b {
            Branch::Plus => w1.min(w2),
            Branch::Minus => w1.max(w2),
        })
    };
    Ok(match spec.kind {
        TransformKind::Ta1(b) => {
            let pref = -(l.a_x + l.a_y) / (l.a_x * l.a_y);
            (pref * m_pm(b)?, pref)
        }
        TransformKind::Ta2(b) => {
            let rho = spec
                .rho
                .rho_g(b)
                .ok_or_else(|| PuError::ComplexBranch("rho_g is not real".into()))?;
            let k = 1.0 / (2.0 * l.a_x * l.a_y);
            (
                k * (4.0 * l.g - rho * (l.a_x - l.a_y) - p.alpha * (l.a_x + l.a_y)),
                -k * 2.0 * (l.a_x + l.a_y),
            )
        }
        TransformKind::Tb1 => ((l.b_x / l.a_x - p.alpha) / l.a_x, -1.0 / l.a_x),
        TransformKind::Tb2(b) => (-m_pm(b)? / l.a_x, -1.0 / l.a_x),
    })
}
