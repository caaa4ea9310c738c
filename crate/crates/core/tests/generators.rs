//! Generator validity at scale and Monte-Carlo checks of the sampled laws.

use qunion::harness::gen::*;
use qunion::linalg::{CMatrix, HermMatrix};
use qunion::qstate::{DensityMatrix, Effect, Projector};
use rand::Rng;

const COUNT: usize = 100_000;

fn check_state(rho: &DensityMatrix) {
    assert!((rho.herm().trace() - 1.0).abs() <= 1e-12);
    assert!(*rho.spectrum().last().unwrap() >= -1e-10);
}

#[test]
fn states_are_valid() {
    let mut r = Seed(11).rng();
    for i in 0..COUNT {
        let d = r.random_range(1..=8);
        if i % 2 == 0 {
            let rho = haar_pure_state(d, &mut r);
            check_state(&rho);
            if d > 1 {
                assert!(rho.spectrum()[1] <= 1e-12);
            }
        } else {
            let k = r.random_range(1..=d);
            let rho = ginibre_density(d, k, &mut r);
            check_state(&rho);
            if k < d {
                assert!(rho.spectrum()[k] <= 1e-12, "rank exceeds {k}");
            }
        }
    }
}

#[test]
fn projectors_are_valid() {
    let mut r = Seed(12).rng();
    for _ in 0..COUNT {
        let d = r.random_range(1..=8);
        let k = r.random_range(1..=d);
        let p = haar_projector(d, k, &mut r);
        let a = p.herm().matrix();
        assert!((a * a).max_abs_diff(a) <= 1e-10);
        assert!((p.herm().trace() - k as f64).abs() <= 1e-10);
    }
}

#[test]
fn effects_and_measurements_are_valid() {
    let mut r = Seed(13).rng();
    for i in 0..COUNT {
        let d = r.random_range(1..=8);
        if i % 2 == 0 {
            let a = random_effect(d, &mut r);
            assert!(a.herm().min_eigenvalue().unwrap() >= -1e-10);
            assert!(a.herm().complement().min_eigenvalue().unwrap() >= -1e-10);
        } else {
            let (m, a) = random_measurement_op(d, &mut r);
            let gram = &m.matrix().adjoint() * m.matrix();
            assert!(gram.max_abs_diff(a.herm().matrix()) <= 1e-10);
        }
    }
}

#[test]
fn unitaries_are_unitary() {
    let mut r = Seed(14).rng();
    for _ in 0..COUNT / 10 {
        let d = r.random_range(1..=8);
        let u = haar_unitary(d, &mut r);
        assert!((&u.adjoint() * &u).max_abs_diff(&CMatrix::identity(d)) <= 1e-12);
    }
}

/// Mean and standard error of `f` over `n` draws.
fn mean_se(n: usize, mut f: impl FnMut() -> f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..n).map(|_| f()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[test]
fn pure_state_weight_on_fixed_projector() {
    let mut r = Seed(15).rng();
    let a = Projector::coordinate(5, &[0, 2]);
    let (mean, se) = mean_se(10_000, || a.probability(&haar_pure_state(5, &mut r)));
    assert!((mean - 0.4).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn mixed_state_mean_eigenvalue() {
    let mut r = Seed(16).rng();
    // one eigenvalue at a uniformly random position per draw
    let (mean, se) = mean_se(10_000, || {
        let idx = r.random_range(0..4);
        ginibre_density(4, 4, &mut r).spectrum()[idx]
    });
    assert!((mean - 0.25).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn rank_one_projector_mean_weight() {
    let mut r = Seed(17).rng();
    let rho = DensityMatrix::diagonal(&[0.7, 0.2, 0.1]).unwrap();
    let (mean, se) = mean_se(10_000, || haar_projector(3, 1, &mut r).probability(&rho));
    assert!((mean - 1.0 / 3.0).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn rank_one_mixed_state_is_pure() {
    let mut r = Seed(18).rng();
    for _ in 0..100 {
        let rho = ginibre_density(4, 1, &mut r);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn effect_scale_stays_in_range() {
    let mut r = Seed(19).rng();
    for _ in 0..1000 {
        let a: Effect = random_effect(3, &mut r);
        let top = HermMatrix::eig(a.herm()).unwrap().values[0];
        assert!((0.05 - 1e-12..=1.0 + 1e-12).contains(&top), "{top}");
    }
}

#[test]
fn same_seed_same_instance() {
    let a = haar_projector(6, 3, &mut Seed(20).rng());
    let b = haar_projector(6, 3, &mut Seed(20).rng());
    assert_eq!(a.herm().matrix().max_abs_diff(b.herm().matrix()), 0.0);
}
