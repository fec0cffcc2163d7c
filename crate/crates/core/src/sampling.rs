//! Seeded draws for randomized identity checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::Amplitudes;
use crate::model::{PhaseState, PuParams};

/// Smallest `|β|` and `|ω₁² − ω₂²|` accepted by the default draws.
pub const EXCLUSION: f64 = 0.1;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// `α ∈ [−5, 5]`, `β ∈ [−5, 5]` with `|β| ≥ 0.1`.
pub fn sample_params(rng: &mut impl Rng) -> PuParams {
    loop {
        let alpha = uniform(rng, -5.0, 5.0);
        let beta = uniform(rng, -5.0, 5.0);
        if beta.abs() >= EXCLUSION {
            return PuParams::new(alpha, beta).expect("finite draws");
        }
    }
}

/// `ω₁, ω₂ ∈ [0.3, 3]` with `ω₁ > ω₂` and `ω₁² − ω₂² ≥ 0.1`.
pub fn sample_frequency_params(rng: &mut impl Rng) -> PuParams {
    loop {
        let a = uniform(rng, 0.3, 3.0);
        let b = uniform(rng, 0.3, 3.0);
        let (w1, w2) = if a >= b { (a, b) } else { (b, a) };
        if w1 * w1 - w2 * w2 >= EXCLUSION && (w1 * w2).powi(2) >= EXCLUSION {
            return PuParams::from_frequencies(w1, w2).expect("positive frequencies");
        }
    }
}

/// Components uniform in `[−scale, scale]`.
pub fn sample_state(rng: &mut impl Rng, scale: f64) -> PhaseState {
    PhaseState::new(
        uniform(rng, -scale, scale),
        uniform(rng, -scale, scale),
        uniform(rng, -scale, scale),
        uniform(rng, -scale, scale),
    )
}

pub fn sample_amplitudes(rng: &mut impl Rng) -> Amplitudes {
    Amplitudes::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_respect_exclusions_and_seed() {
        let mut r = rng(7);
        for _ in 0..200 {
            assert!(sample_params(&mut r).beta.abs() >= EXCLUSION);
            let p = sample_frequency_params(&mut r);
            let (w1, w2) = p.omega_squared().unwrap();
            assert!(w1 - w2 >= EXCLUSION * (1.0 - 1e-12));
        }
        let a: Vec<f64> = (0..5).map(|_| uniform(&mut rng(3), 0.0, 1.0)).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
    }
}
