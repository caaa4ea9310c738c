//! Sequential two-outcome projective measurement.
//!
//! A state `ρ` is measured with `(Ā_1, A_1), …, (Ā_m, A_m)` in order and we
//! follow the branch where every good outcome `A_t` occurs. Alongside the
//! conditioned states the trajectory records the quantities used by the
//! telescoping argument: `p_t` (all of `A_1..A_t` occur), `q_t` (`Ā_t` is the
//! first bad outcome), `ε_t = E_ρ[Ā_t]` and `r_t = √p_t · √F(ρ, ρ_t)`.
//!
//! Note that `ε_t` is always taken against the *original* state `ρ`, never
//! against `ρ_{t−1}`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::CMatrix;
use crate::qstate::{condition, root_fidelity, DensityMatrix, Projector, PROB_FLOOR};

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rho0: DensityMatrix,
    pub projectors: Vec<Projector>,
    /// `p_0..p_m`, with `p_0 = 1`.
    pub p: Vec<f64>,
    /// `ρ_0..ρ_m`; `None` past a dead branch.
    pub states: Vec<Option<DensityMatrix>>,
    /// `ε_1..ε_m` (index `t − 1`).
    pub eps: Vec<f64>,
    /// `q_1..q_m` (index `t − 1`).
    pub q: Vec<f64>,
    /// `r_0..r_m`.
    pub r: Vec<f64>,
    pub succ: f64,
    pub fail: f64,
    pub loss: f64,
    /// First step whose success probability fell to the floor, if any.
    pub dead_from: Option<usize>,
}

impl Trajectory {
    pub fn m(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_dead(&self) -> bool {
        self.dead_from.is_some()
    }

    /// `ρ_m`, the state after all good outcomes.
    pub fn final_state(&self) -> Result<&DensityMatrix> {
        match (&self.states[self.m()], self.dead_from) {
            (Some(s), _) => Ok(s),
            (None, Some(step)) => Err(Error::DeadTrajectory { step }),
            (None, None) => unreachable!("live trajectory always has a final state"),
        }
    }

    /// `F(ρ, ρ_t)` recovered from `r_t`; `None` once the branch is dead.
    pub fn fidelity_at(&self, t: usize) -> Option<f64> {
        self.states[t].as_ref().map(|_| (self.r[t] * self.r[t] / self.p[t]).min(1.0))
    }

    /// Number of steps `t ≥ 1` whose state `ρ_t` exists.
    pub fn live_steps(&self) -> usize {
        self.dead_from.map_or(self.m(), |d| d - 1)
    }
}

/// Runs the sequential measurement of `rho` against `projectors`.
pub fn run_sequence(rho: &DensityMatrix, projectors: &[Projector]) -> Result<Trajectory> {
    let m = projectors.len();
    if m == 0 {
        return Err(Error::InvalidParameter("at least one projector is required".into()));
    }
    for a in projectors {
        check_dim(rho.dim(), a.dim())?;
    }

    let mut p = vec![0.0; m + 1];
    let mut r = vec![0.0; m + 1];
    let mut q = vec![0.0; m];
    let mut eps = Vec::with_capacity(m);
    let mut states: Vec<Option<DensityMatrix>> = vec![None; m + 1];
    let mut dead_from = None;

    p[0] = 1.0;
    r[0] = root_fidelity(rho, rho)?;
    states[0] = Some(rho.clone());

    for (idx, a) in projectors.iter().enumerate() {
        let t = idx + 1;
        let bad = a.complement();
        eps.push(bad.probability(rho));

        let Some(prev) = states[t - 1].as_ref() else {
            continue;
        };
        let good_prob = a.probability(prev);
        let bad_prob = bad.probability(prev);
        let pt = p[t - 1] * good_prob;
        if pt <= PROB_FLOOR {
            q[idx] = p[t - 1];
            dead_from = Some(t);
            continue;
        }
        q[idx] = p[t - 1] * bad_prob;
        let next = condition(prev, a)?;
        p[t] = pt;
        r[t] = pt.sqrt() * root_fidelity(rho, &next)?;
        states[t] = Some(next);
    }

    let succ = p[m];
    let fail = if dead_from.is_some() { 1.0 } else { q.iter().sum::<f64>().min(1.0) };
    let loss = eps.iter().sum();
    Ok(Trajectory {
        rho0: rho.clone(),
        projectors: projectors.to_vec(),
        p,
        states,
        eps,
        q,
        r,
        succ,
        fail,
        loss,
        dead_from,
    })
}

/// `(r_{t−1} − r_t, √q_t·√ε_t)` for every step whose state exists.
pub fn step_decrements(traj: &Trajectory) -> Vec<(f64, f64)> {
    (1..=traj.live_steps())
        .map(|t| (traj.r[t - 1] - traj.r[t], traj.q[t - 1].sqrt() * traj.eps[t - 1].sqrt()))
        .collect()
}

/// Success probability `tr(K ρ K†)` for the branch operator
/// `K = A_m ⋯ A_1`, computed without any intermediate conditioning.
pub fn branch_probability(rho: &DensityMatrix, projectors: &[Projector]) -> f64 {
    let mut k = CMatrix::identity(rho.dim());
    for a in projectors {
        k = a.herm().matrix() * &k;
    }
    rho.herm().congruence(&k).trace()
}
