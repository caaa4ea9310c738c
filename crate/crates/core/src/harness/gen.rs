//! Seeded random instance generators.
//!
//! Every instance is drawn from its own ChaCha8 stream whose key is a hash of
//! the campaign seed and the instance coordinates, so the instance does not
//! depend on which thread produced it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{c, eig_hermitian, mat_sqrt_psd, CMatrix, HermMatrix, C64};
use crate::qstate::{DensityMatrix, Effect, MeasurementOp, Projector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    /// Substream key for the given coordinates.
    pub fn derive(self, parts: &[u64]) -> Seed {
        Seed(parts.iter().fold(splitmix64(self.0), |h, &p| splitmix64(h ^ splitmix64(p))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Standard normal pair by Box–Muller on two uniforms from the stream.
pub fn normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    // 1 − U keeps the log argument in (0, 1]
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, co) = (std::f64::consts::TAU * u2).sin_cos();
    (r * co, r * s)
}

/// Complex Gaussian with independent standard normal real and imaginary parts.
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let (re, im) = normal_pair(rng);
    c(re, im)
}

fn gaussian_vector(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..d).map(|_| complex_gaussian(rng)).collect()
}

/// `d × k` Gaussian matrix stored as `k` columns.
fn gaussian_columns(d: usize, k: usize, rng: &mut impl Rng) -> Vec<Vec<C64>> {
    (0..k).map(|_| gaussian_vector(d, rng)).collect()
}

fn columns_gram(cols: &[Vec<C64>], d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d);
    for v in cols {
        m = &m + &CMatrix::outer(v, v);
    }
    m
}

/// `|ψ⟩⟨ψ|` with `ψ` a normalized complex Gaussian vector.
pub fn haar_pure_state(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let v = gaussian_vector(d, rng);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi: Vec<C64> = v.into_iter().map(|z| z / norm).collect();
    DensityMatrix::pure(&psi).expect("normalized Gaussian vector")
}

/// `GG†/tr(GG†)` with `G` a `d × k` complex Gaussian matrix.
pub fn ginibre_density(d: usize, k: usize, rng: &mut impl Rng) -> DensityMatrix {
    assert!((1..=d).contains(&k), "rank {k} outside 1..={d}");
    let gram = HermMatrix::hermitize(columns_gram(&gaussian_columns(d, k, rng), d));
    DensityMatrix::normalized(gram).expect("Gaussian Gram matrix is a valid state")
}

/// Haar unitary from Gram–Schmidt on Gaussian columns.
///
/// Gram–Schmidt produces the QR factor whose `R` has a positive real diagonal,
/// which is exactly the phase correction that makes `Q` Haar distributed.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let cols = orthonormalize(gaussian_columns(d, d, rng));
    CMatrix::from_fn(d, |i, j| cols[j][i])
}

fn orthonormalize(mut cols: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let w = &mut rest[0];
        for _ in 0..2 {
            for b in done.iter() {
                let ov: C64 = b.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= ov * bi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in w.iter_mut() {
            *z /= norm;
        }
    }
    cols
}

/// `VV†` for `V` the first `k` columns of a Haar unitary.
pub fn haar_projector(d: usize, k: usize, rng: &mut impl Rng) -> Projector {
    assert!((1..=d).contains(&k), "rank {k} outside 1..={d}");
    let u = haar_unitary(d, rng);
    let cols: Vec<Vec<C64>> = (0..k).map(|j| u.column(j)).collect();
    Projector::new(HermMatrix::hermitize(columns_gram(&cols, d))).expect("orthonormal columns")
}

/// `u·B/λ_max(B)` with `B` a random PSD matrix and `u ∈ [0.05, 1]`.
pub fn random_effect(d: usize, rng: &mut impl Rng) -> Effect {
    let b = HermMatrix::hermitize(columns_gram(&gaussian_columns(d, d, rng), d));
    let top = eig_hermitian(&b).expect("Hermitian input").values[0];
    let u = 0.05 + 0.95 * rng.random::<f64>();
    let a = HermMatrix::hermitize(b.matrix().scale(u / top));
    Effect::new(a).expect("scaled PSD matrix with top eigenvalue ≤ 1")
}

/// `M = W√A` for a Haar unitary `W`, so that `M†M = A`. Returns `(M, A)`.
pub fn random_measurement_op(d: usize, rng: &mut impl Rng) -> (MeasurementOp, Effect) {
    let a = random_effect(d, rng);
    let w = haar_unitary(d, rng);
    let root = mat_sqrt_psd(a.herm()).expect("effects are PSD");
    let m = MeasurementOp::new(&w * root.matrix()).expect("M†M = A ≤ Id");
    (m, a)
}

/// Projector onto the top-`k` eigenvectors of `rho` after a Gaussian kick of
/// size `eta`: keeps most of the state's weight, so `ε` is small and the
/// bounds are near their tight regime.
pub fn near_support_projector(rho: &DensityMatrix, k: usize, eta: f64, rng: &mut impl Rng) -> Result<Projector> {
    let d = rho.dim();
    let ed = eig_hermitian(rho.herm())?;
    let cols: Vec<Vec<C64>> = (0..k)
        .map(|j| ed.vectors.column(j).into_iter().map(|z| z + complex_gaussian(rng) * eta).collect())
        .collect();
    let cols = orthonormalize(cols);
    Projector::new(HermMatrix::hermitize(columns_gram(&cols, d)))
}
