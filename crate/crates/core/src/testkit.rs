//! Random fixtures for unit tests. Deliberately simpler than the harness
//! generators so that unit tests do not depend on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, CMatrix, HermMatrix, C64};
use crate::qstate::{DensityMatrix, Effect, Projector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, |_, _| c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> HermMatrix {
    HermMatrix::hermitize(random_matrix(n, rng))
}

pub fn random_psd(n: usize, rng: &mut impl Rng) -> HermMatrix {
    let g = random_matrix(n, rng);
    HermMatrix::hermitize(&g * &g.adjoint())
}

pub fn random_state(n: usize, seed: u64) -> DensityMatrix {
    DensityMatrix::normalized(random_psd(n, &mut rng(seed))).unwrap()
}

pub fn random_projector(n: usize, k: usize, seed: u64) -> Projector {
    let mut r = rng(seed);
    let vs: Vec<Vec<C64>> = (0..k).map(|_| random_matrix(n, &mut r).column(0)).collect();
    Projector::onto_span(n, &vs).unwrap()
}

/// `B / (λ_max(B) · 1.01)` for a random PSD `B`.
pub fn random_effect(n: usize, seed: u64) -> Effect {
    let b = random_psd(n, &mut rng(seed));
    let top = b.eig().unwrap().values[0];
    Effect::new(HermMatrix::hermitize(b.matrix().scale(1.0 / (top * 1.01)))).unwrap()
}
