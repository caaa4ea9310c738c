//! Both sides of every inequality we verify, reported as signed margins.
//!
//! A [`Margin`] compares `lhs ≤ rhs` and stores `margin = rhs − lhs`; a
//! negative margin is a violation once it drops below `−tolerance`. Equalities
//! are expressed as `|a − b| ≤ 0` so the same pass rule applies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{
    condition, infidelity, root_fidelity, trace_distance, DensityMatrix, Effect, Projector, PROB_FLOOR,
    outcome_probability,
};
use crate::seqmeas::{step_decrements, Trajectory};

/// Slack for inequality checks; anything below `−VIOLATION_TOLERANCE` is a
/// genuine violation rather than rounding.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Margin {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
}

impl Margin {
    /// `lhs ≤ rhs`
    pub fn upper(name: &'static str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Margin { name, lhs, rhs, margin: rhs - lhs, tolerance }
    }

    /// `lhs ≤ rhs` at the default violation tolerance.
    pub fn inequality(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self::upper(name, lhs, rhs, VIOLATION_TOLERANCE)
    }

    /// `a = b`, recorded as `|a − b| ≤ 0`.
    pub fn equality(name: &'static str, a: f64, b: f64, tolerance: f64) -> Self {
        Self::upper(name, (a - b).abs(), 0.0, tolerance)
    }

    pub fn passes(&self) -> bool {
        self.margin >= -self.tolerance
    }
}

/// `1 ≤ √Succ·√F(ρ, ρ_m) + √Fail·√Loss`
pub fn check_theorem1(traj: &Trajectory) -> Result<Margin> {
    let rho_m = traj.final_state()?;
    let f = root_fidelity(&traj.rho0, rho_m)?;
    let rhs = traj.succ.sqrt() * f + traj.fail.sqrt() * traj.loss.sqrt();
    Ok(Margin::inequality("theorem1", 1.0, rhs))
}

/// `Fail ≤ 4L/(1+L)²` (only meaningful for `L ≤ 1`, otherwise `None`) and
/// `Fail ≤ 4L`.
pub fn check_union_bound(traj: &Trajectory) -> (Option<Margin>, Margin) {
    let l = traj.loss;
    let sharp = (l <= 1.0).then(|| Margin::inequality("union_bound_sharp", traj.fail, 4.0 * l / (1.0 + l).powi(2)));
    (sharp, Margin::inequality("union_bound", traj.fail, 4.0 * l))
}

/// `1 − F(ρ, ρ_m) ≤ Loss` and `D_tr(ρ, ρ_m) ≤ √Loss`.
pub fn check_gentle(traj: &Trajectory) -> Result<(Margin, Margin)> {
    let rho_m = traj.final_state()?;
    let infid = infidelity(&traj.rho0, rho_m)?;
    let td = trace_distance(&traj.rho0, rho_m)?;
    Ok((
        Margin::inequality("gentle_infidelity", infid, traj.loss),
        Margin::inequality("gentle_trace_distance", td, traj.loss.sqrt()),
    ))
}

/// One-step fidelity decomposition for an effect `A`:
/// `√F(ρ,σ) ≤ √E_σ[A†A]·√F(ρ, σ|A) + √E_σ[Ā]·√E_ρ[Ā]`.
pub fn check_lemma2b(rho: &DensityMatrix, sigma: &DensityMatrix, a: &Effect) -> Result<Margin> {
    let kept = outcome_probability(sigma, a);
    if kept <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob: kept });
    }
    let bad = a.complement();
    let lhs = root_fidelity(rho, sigma)?;
    let rhs = kept.sqrt() * root_fidelity(rho, &condition(sigma, a)?)?
        + bad.probability(sigma).sqrt() * bad.probability(rho).sqrt();
    Ok(Margin::inequality("lemma2b", lhs, rhs))
}

/// Gentle step for a projector: `1 − F(ρ, σ|A) ≤ 1 − F(ρ, σ) + E_ρ[Ā]`.
pub fn check_gentle_step(rho: &DensityMatrix, sigma: &DensityMatrix, a: &Projector) -> Result<Margin> {
    let kept = a.probability(sigma);
    if kept <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob: kept });
    }
    let lhs = infidelity(rho, &condition(sigma, a)?)?;
    let rhs = infidelity(rho, sigma)? + a.complement().probability(rho);
    Ok(Margin::inequality("gentle_step", lhs, rhs))
}

/// Gentle steps along a trajectory, `σ = ρ_{t−1}`, `A = A_t`, for every live step.
pub fn check_gentle_chain(traj: &Trajectory) -> Result<Vec<Margin>> {
    (1..=traj.live_steps())
        .map(|t| {
            let prev = traj.states[t - 1].as_ref().expect("live step");
            check_gentle_step(&traj.rho0, prev, &traj.projectors[t - 1])
        })
        .collect()
}

/// Refined union bound with conjugate exponents `1/p + 1/p′ = 1`:
/// `Fail − ε_1 ≤ p′ε_1 + (p+p′)Σ_{1<t<m} ε_t + p·ε_m`.
pub fn check_kmw(traj: &Trajectory, p: f64) -> Result<Margin> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must exceed 1")));
    }
    let m = traj.m();
    if m < 2 {
        return Err(Error::InvalidParameter("refined union bound needs m ≥ 2".into()));
    }
    let pp = p / (p - 1.0);
    let eps = &traj.eps;
    let middle: f64 = eps[1..m - 1].iter().sum();
    let rhs = pp * eps[0] + (p + pp) * middle + p * eps[m - 1];
    Ok(Margin::inequality("kmw", traj.fail - eps[0], rhs))
}

/// `r_{t−1} − r_t ≤ √q_t·√ε_t` for each live step.
pub fn check_step_decrements(traj: &Trajectory) -> Vec<Margin> {
    step_decrements(traj)
        .into_iter()
        .map(|(lhs, rhs)| Margin::inequality("step_decrement", lhs, rhs))
        .collect()
}

/// The telescoped sum and the Cauchy–Schwarz step after it:
/// `r_0 − r_m ≤ Σ_t √q_t√ε_t ≤ √Fail·√Loss`.
pub fn check_telescoping(traj: &Trajectory) -> Result<(Margin, Margin)> {
    traj.final_state()?;
    let m = traj.m();
    let sum: f64 = traj.q.iter().zip(&traj.eps).map(|(q, e)| q.sqrt() * e.sqrt()).sum();
    Ok((
        Margin::inequality("telescoping_sum", traj.r[0] - traj.r[m], sum),
        Margin::inequality("telescoping_cauchy_schwarz", sum, traj.fail.sqrt() * traj.loss.sqrt()),
    ))
}

/// `Σ_t q_t + Succ = 1`.
pub fn check_conservation(traj: &Trajectory) -> Margin {
    Margin::equality("probability_conservation", traj.q.iter().sum::<f64>() + traj.succ, 1.0, 1e-9)
}

/// `q_1 = ε_1`: the first bad outcome is judged against `ρ` itself.
pub fn check_first_step(traj: &Trajectory) -> Margin {
    Margin::equality("first_step", traj.q[0], traj.eps[0], 1e-10)
}

/// `F(ρ, ρ_m) ≤ 1 − ε_m`.
pub fn check_final_fidelity(traj: &Trajectory) -> Result<Margin> {
    let rho_m = traj.final_state()?;
    let f = root_fidelity(&traj.rho0, rho_m)?.powi(2);
    let eps_m = traj.eps[traj.m() - 1];
    Ok(Margin::inequality("final_fidelity", f, 1.0 - eps_m))
}

/// Margins that follow from [`check_theorem1`] by algebra alone: the
/// quadratic bound on Fail (for `Loss ≤ 1`) and the infidelity bound.
/// Computed from the same trajectory so the implication can be tested.
pub fn derived_from_theorem1(traj: &Trajectory) -> Result<Vec<Margin>> {
    let mut out = Vec::new();
    let (sharp, plain) = check_union_bound(traj);
    out.extend(sharp);
    out.push(plain);
    out.push(check_gentle(traj)?.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermMatrix;
    use crate::seqmeas::run_sequence;
    use crate::testkit::*;

    fn line(theta: f64) -> Projector {
        Projector::onto_real_span(2, &[&[theta.cos(), theta.sin()]]).unwrap()
    }

    fn zigzag(m: usize, delta: f64) -> Trajectory {
        let ps: Vec<Projector> = (1..=m).map(|t| line(if t % 2 == 0 { delta } else { -delta })).collect();
        run_sequence(&DensityMatrix::basis(2, 0), &ps).unwrap()
    }

    fn random_traj(d: usize, m: usize, seed: u64) -> Trajectory {
        let rho = random_state(d, seed);
        let ps: Vec<Projector> = (0..m as u64).map(|i| random_projector(d, 1 + (seed + i) as usize % d, seed * 31 + i)).collect();
        run_sequence(&rho, &ps).unwrap()
    }

    #[test]
    fn margin_pass_rule() {
        assert!(Margin::inequality("x", 1.0, 1.0 - 5e-10).passes());
        assert!(!Margin::inequality("x", 1.0, 1.0 - 5e-9).passes());
        let e = Margin::equality("x", 0.3, 0.3 + 1e-11, 1e-10);
        assert!(e.passes());
        assert_eq!(e.rhs, 0.0);
    }

    #[test]
    fn theorem1_is_tight_without_loss() {
        let rho = DensityMatrix::diagonal(&[0.6, 0.4, 0.0]).unwrap();
        let traj = run_sequence(&rho, &[Projector::coordinate(3, &[0, 1]), Projector::coordinate(3, &[0, 1])]).unwrap();
        let m = check_theorem1(&traj).unwrap();
        assert!(m.margin.abs() < 1e-12);
        let (sharp, plain) = check_union_bound(&traj);
        assert!(sharp.unwrap().margin.abs() < 1e-12 && plain.margin.abs() < 1e-12);
        let (g1, g2) = check_gentle(&traj).unwrap();
        assert!(g1.margin.abs() < 1e-9 && g2.margin.abs() < 1e-9);
        assert!(check_kmw(&traj, 2.0).unwrap().margin.abs() < 1e-12);
    }

    #[test]
    fn theorem1_on_qubit_zigzag() {
        let m = check_theorem1(&zigzag(2, 0.1)).unwrap();
        assert!(m.margin >= 0.0);
    }

    #[test]
    fn theorem1_on_random_instances() {
        for seed in 0..200 {
            let traj = random_traj(2 + seed as usize % 7, 1 + seed as usize % 6, seed);
            if traj.is_dead() {
                continue;
            }
            assert!(check_theorem1(&traj).unwrap().passes(), "seed {seed}");
            for margin in derived_from_theorem1(&traj).unwrap() {
                assert!(margin.passes(), "seed {seed}: {margin:?}");
            }
        }
    }

    #[test]
    fn union_bound_ratio_on_long_zigzag() {
        let traj = zigzag(50, 1e-3);
        let ratio = traj.fail / traj.loss;
        assert!((ratio - 3.94).abs() < 0.0394, "ratio {ratio}");
        let (_, plain) = check_union_bound(&traj);
        assert!(plain.margin > 0.0);
    }

    #[test]
    fn sharp_union_bound_skipped_above_unit_loss() {
        let ps = [Projector::coordinate(2, &[1]), Projector::coordinate(2, &[0]), Projector::coordinate(2, &[1])];
        let traj = run_sequence(&DensityMatrix::maximally_mixed(2), &ps).unwrap();
        assert!((traj.loss - 1.5).abs() < 1e-12);
        let (sharp, plain) = check_union_bound(&traj);
        assert!(sharp.is_none());
        assert!(plain.passes());
    }

    #[test]
    fn gentle_errors_on_dead_trajectory() {
        let rho = DensityMatrix::basis(2, 0);
        let traj = run_sequence(&rho, &[Projector::coordinate(2, &[1])]).unwrap();
        assert!(matches!(check_gentle(&traj), Err(Error::DeadTrajectory { step: 1 })));
        assert!(matches!(check_theorem1(&traj), Err(Error::DeadTrajectory { .. })));
    }

    #[test]
    fn lemma2b_examples() {
        let rho = random_state(3, 1);
        let sigma = random_state(3, 2);
        let m = check_lemma2b(&rho, &sigma, &Effect::identity(3)).unwrap();
        assert!(m.margin.abs() < 1e-12);

        let a = random_projector(3, 2, 3);
        let m = check_lemma2b(&rho, &rho, &a.to_effect()).unwrap();
        assert!((m.rhs - 1.0).abs() < 1e-8 && (m.lhs - 1.0).abs() < 1e-10);

        for seed in 0..50 {
            let m = check_lemma2b(&random_state(4, seed), &random_state(4, seed + 99), &random_effect(4, seed + 7)).unwrap();
            assert!(m.passes(), "{m:?}");
        }
    }

    #[test]
    fn lemma2b_zero_branch() {
        let rho = DensityMatrix::basis(2, 0);
        let a = Projector::coordinate(2, &[1]).to_effect();
        assert!(matches!(check_lemma2b(&rho, &rho, &a), Err(Error::ZeroProbabilityBranch { .. })));
    }

    #[test]
    fn gentle_step_examples() {
        let rho = DensityMatrix::diagonal(&[0.5, 0.5, 0.0]).unwrap();
        let m = check_gentle_step(&rho, &rho, &Projector::coordinate(3, &[0, 1])).unwrap();
        assert!(m.lhs.abs() < 1e-12 && m.rhs.abs() < 1e-12);

        let rho = random_state(4, 5);
        let a = random_projector(4, 2, 6);
        let m = check_gentle_step(&rho, &rho, &a).unwrap();
        assert!(m.margin.abs() < 1e-8);

        for seed in 0..50 {
            let m = check_gentle_step(&random_state(3, seed), &random_state(3, seed + 1), &random_projector(3, 2, seed + 2));
            assert!(m.unwrap().passes());
        }
    }

    #[test]
    fn gentle_chain_iterates_to_loss() {
        let traj = random_traj(5, 5, 17);
        let steps = check_gentle_chain(&traj).unwrap();
        assert_eq!(steps.len(), 5);
        assert!(steps.iter().all(Margin::passes));
        let (g, _) = check_gentle(&traj).unwrap();
        assert!(g.passes());
    }

    #[test]
    fn kmw_parameter_validation() {
        let traj = zigzag(3, 0.1);
        assert!(matches!(check_kmw(&traj, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(check_kmw(&traj, f64::NAN), Err(Error::InvalidParameter(_))));
        assert!(matches!(check_kmw(&zigzag(1, 0.1), 2.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn kmw_at_two_implies_union_bound() {
        for seed in 0..100 {
            let traj = random_traj(4, 2 + seed as usize % 5, seed);
            let k = check_kmw(&traj, 2.0).unwrap();
            assert!(k.passes());
            // p = p′ = 2: fail ≤ 3ε_1 + 4Σ_mid + 2ε_m ≤ 4·loss
            assert!(k.rhs + traj.eps[0] <= 4.0 * traj.loss + 1e-12);
            for p in [1.1, 5.0] {
                assert!(check_kmw(&traj, p).unwrap().passes());
            }
        }
    }

    #[test]
    fn kmw_is_nearly_tight_on_geometric_zigzag() {
        // p = p′ = 2 ⇒ equal angles
        let delta = 1e-3;
        let traj = zigzag(2, delta);
        let k = check_kmw(&traj, 2.0).unwrap();
        assert!(k.margin.abs() / (delta * delta) < 1e-3);
    }

    #[test]
    fn trajectory_side_checks() {
        for seed in 0..50 {
            let traj = random_traj(3 + seed as usize % 4, 1 + seed as usize % 6, seed + 500);
            if traj.is_dead() {
                continue;
            }
            assert!(check_step_decrements(&traj).iter().all(Margin::passes));
            let (a, b) = check_telescoping(&traj).unwrap();
            assert!(a.passes() && b.passes());
            assert!(check_conservation(&traj).passes());
            assert!(check_first_step(&traj).passes());
            assert!(check_final_fidelity(&traj).unwrap().passes());
        }
    }

    #[test]
    fn effect_lemma_with_nonprojective_effect() {
        let e = Effect::new(HermMatrix::diag(&[0.9, 0.2])).unwrap();
        let rho = DensityMatrix::pure_real(&[0.8, 0.6]).unwrap();
        let sigma = DensityMatrix::pure_real(&[0.6, -0.8]).unwrap();
        assert!(check_lemma2b(&rho, &sigma, &e).unwrap().passes());
    }
}
