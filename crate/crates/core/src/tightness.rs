//! Extremal instances on which the union and gentle-measurement bounds are
//! tight, plus the spherical form of the one-step inequality.

use serde::Serialize;

use crate::bounds::{check_gentle, check_lemma2b, Margin};
use crate::error::{check_dim, Error, Result};
use crate::qstate::{trace_distance, infidelity, DensityMatrix, Projector, PROB_FLOOR};
use crate::seqmeas::{run_sequence, Trajectory};

const UNIT_TOLERANCE: f64 = 1e-12;

/// Largest residual the qutrit construction may leave before it is rejected.
pub const CONSTRUCTION_TOLERANCE: f64 = 1e-8;

/// Unit vector in `R^d`, `2 ≤ d ≤ 4`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPureState(Vec<f64>);

impl RealPureState {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if !(2..=4).contains(&v.len()) {
            return Err(Error::ParameterOutOfRange(format!("real pure states live in R^2..R^4, got R^{}", v.len())));
        }
        let norm = dot(&v, &v).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidState(format!("vector norm {norm} is not 1")));
        }
        Ok(RealPureState(v))
    }

    pub fn normalized(v: Vec<f64>) -> Result<Self> {
        let norm = dot(&v, &v).sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(v.into_iter().map(|x| x / norm).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::pure_real(&self.0).expect("unit vector")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Qubit,
    Club,
    Qutrit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TightnessReport {
    pub kind: FamilyKind,
    pub m: usize,
    pub delta: f64,
    /// Closed-form Fail.
    pub fail_exact: f64,
    /// Fail from running the constructed projectors.
    pub fail_simulated: f64,
    pub loss_exact: f64,
    /// The bound being approached: `4·Loss` for the qubit walk, the refined
    /// bound for weighted walks, `Loss` (on infidelity) for the qutrit.
    pub bound_value: f64,
    /// `fail_exact / loss_exact`
    pub ratio: f64,
    /// `lim_{δ→0} ratio`
    pub limit_ratio: f64,
    /// `(fail_exact − bound_value) / δ²`
    pub normalized_gap: f64,
}

fn line(theta: f64) -> Projector {
    Projector::onto_real_span(2, &[&[theta.cos(), theta.sin()]]).expect("unit vector spans a line")
}

/// Walk starting at `|0⟩` through lines at angles `(−1)^t·δ_t`. Returns the
/// closed-form Fail and the simulated trajectory.
fn alternating_walk(deltas: &[f64]) -> Result<(f64, f64, Trajectory)> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("need at least one measurement".into()));
    }
    if let Some(bad) = deltas.iter().find(|d| !d.is_finite() || **d <= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("angle {bad} must be positive")));
    }
    let loss: f64 = deltas.iter().map(|d| d.sin().powi(2)).sum();
    if loss > 1.0 {
        return Err(Error::ParameterOutOfRange(format!("loss {loss} exceeds 1")));
    }
    // Angle between consecutive measurement lines: δ_1 from |0⟩, then δ_t + δ_{t+1}.
    let log_succ: f64 = std::iter::once(deltas[0])
        .chain(deltas.windows(2).map(|w| w[0] + w[1]))
        .map(|x| (-x.sin().powi(2)).ln_1p())
        .sum();
    let fail = -log_succ.exp_m1();
    let ps: Vec<Projector> = deltas
        .iter()
        .enumerate()
        .map(|(i, d)| line(if (i + 1) % 2 == 0 { *d } else { -*d }))
        .collect();
    let traj = run_sequence(&DensityMatrix::basis(2, 0), &ps)?;
    Ok((fail, loss, traj))
}

/// Qubit walk with every angle `δ`: Fail ~ (4m−3)δ² while Loss ~ mδ².
pub fn qubit_family(m: usize, delta: f64) -> Result<TightnessReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let (fail, loss, traj) = alternating_walk(&vec![delta; m])?;
    let bound = 4.0 * loss;
    Ok(TightnessReport {
        kind: FamilyKind::Qubit,
        m,
        delta,
        fail_exact: fail,
        fail_simulated: traj.fail,
        loss_exact: loss,
        bound_value: bound,
        ratio: fail / loss,
        limit_ratio: (4 * m - 3) as f64 / m as f64,
        normalized_gap: (fail - bound) / (delta * delta),
    })
}

/// `a_1 = 1`, `a_{t+1}/a_t = p′/p`: the weights making every term of the
/// refined bound tight to leading order.
pub fn geometric_weights(m: usize, p: f64) -> Result<Vec<f64>> {
    let pp = conjugate(p)?;
    Ok((0..m).map(|t| (pp / p).powi(t as i32)).collect())
}

fn conjugate(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::ParameterOutOfRange(format!("exponent p = {p} must exceed 1")));
    }
    Ok(p / (p - 1.0))
}

/// Exponent `p` whose geometric weights have ratio `r = p′/p`.
pub fn exponent_for_ratio(r: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("weight ratio {r} must be positive")));
    }
    Ok(1.0 + 1.0 / r)
}

/// Weighted qubit walk with angles `δ_t = a_t·δ`, compared against the
/// refined bound at exponent `p`.
pub fn club_family(delta: f64, weights: &[f64], p: f64) -> Result<TightnessReport> {
    let m = weights.len();
    if m < 2 {
        return Err(Error::ParameterOutOfRange("refined bound needs m ≥ 2".into()));
    }
    if let Some(bad) = weights.iter().find(|a| !a.is_finite() || **a <= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("weight {bad} must be positive")));
    }
    let pp = conjugate(p)?;
    let deltas: Vec<f64> = weights.iter().map(|a| a * delta).collect();
    let (fail, loss, traj) = alternating_walk(&deltas)?;
    let eps: Vec<f64> = deltas.iter().map(|d| d.sin().powi(2)).collect();
    let middle: f64 = eps[1..m - 1].iter().sum();
    let bound = eps[0] + pp * eps[0] + (p + pp) * middle + p * eps[m - 1];

    let a2: f64 = weights.iter().map(|a| a * a).sum();
    let fail_coeff = weights[0].powi(2) + weights.windows(2).map(|w| (w[0] + w[1]).powi(2)).sum::<f64>();
    Ok(TightnessReport {
        kind: FamilyKind::Club,
        m,
        delta,
        fail_exact: fail,
        fail_simulated: traj.fail,
        loss_exact: loss,
        bound_value: bound,
        ratio: fail / loss,
        limit_ratio: fail_coeff / a2,
        normalized_gap: (fail - bound) / (delta * delta),
    })
}

#[derive(Clone, Debug)]
pub struct QutritInstance {
    pub traj: Trajectory,
    /// `1 − F(ρ_0, ρ_m) ≤ Loss`; tight by construction.
    pub margin: Margin,
    pub infidelity: f64,
    pub loss: f64,
    pub trace_distance: f64,
    /// Largest deviation of the simulated `ε_t` and `sin²Δ_t` from their
    /// targets.
    pub residual: f64,
}

/// Real qutrit walk where each measurement plane sits at angle `δ_t` from
/// `ψ_0` and pushes the state so that `sin²Δ_{t+1} = sin²Δ_t + sin²δ_{t+1}`.
///
/// With `ψ_t` at angle Δ from `ψ_0` and `w` the unit normal of their plane,
/// the plane's normal is `n = α·ψ_t + β·w` with `α = sin δ / cos Δ`. Then
/// `|⟨n, ψ_0⟩| = sin δ`, and the projected state moves along `w`, orthogonal
/// to the arc from `ψ_0`, landing at `cos²Δ' = cos²Δ − sin²δ`.
pub fn qutrit_gentle_family(deltas: &[f64]) -> Result<QutritInstance> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("need at least one measurement".into()));
    }
    if let Some(bad) = deltas.iter().find(|d| d.is_nan() || **d <= 0.0 || **d >= std::f64::consts::FRAC_PI_2) {
        return Err(Error::ParameterOutOfRange(format!("angle {bad} must lie in (0, π/2)")));
    }
    let loss: f64 = deltas.iter().map(|d| d.sin().powi(2)).sum();
    if loss > 1.0 {
        return Err(Error::ParameterOutOfRange(format!("loss {loss} exceeds 1")));
    }

    let psi0 = [0.0, 0.0, 1.0];
    let mut psi = psi0;
    let mut projectors = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let cos_big = dot(&psi0, &psi);
        let mut w = cross(&psi0, &psi);
        if norm(&w) < 1e-12 {
            w = [0.0, 1.0, 0.0];
        }
        let wn = norm(&w);
        let w = w.map(|x| x / wn);
        let alpha = delta.sin() / cos_big;
        if alpha >= 1.0 {
            return Err(Error::ConstructionFailure(format!(
                "step with sin δ = {} cannot reach a state at cos Δ = {cos_big}",
                delta.sin()
            )));
        }
        let beta = (1.0 - alpha * alpha).sqrt();
        let n: [f64; 3] = std::array::from_fn(|i| alpha * psi[i] + beta * w[i]);
        let (u, v) = plane_basis(&n);
        projectors.push(Projector::onto_real_span(3, &[&u, &v])?);

        let next: [f64; 3] = std::array::from_fn(|i| psi[i] - alpha * n[i]);
        let len = norm(&next);
        psi = next.map(|x| x / len);
    }

    let rho0 = DensityMatrix::pure_real(&psi0)?;
    let traj = run_sequence(&rho0, &projectors)?;
    if traj.is_dead() {
        return Err(Error::ConstructionFailure("constructed walk has a zero-probability step".into()));
    }
    let mut residual = 0.0_f64;
    let mut target = 0.0;
    for (t, d) in deltas.iter().enumerate() {
        let s2 = d.sin().powi(2);
        target += s2;
        let infid_t = 1.0 - traj.fidelity_at(t + 1).expect("live trajectory");
        residual = residual.max((traj.eps[t] - s2).abs()).max((infid_t - target).abs());
    }
    if residual > CONSTRUCTION_TOLERANCE {
        return Err(Error::ConstructionFailure(format!("construction residual {residual}")));
    }
    let rho_m = traj.final_state()?;
    let infid = infidelity(&rho0, rho_m)?;
    let td = trace_distance(&rho0, rho_m)?;
    let margin = check_gentle(&traj)?.0;
    Ok(QutritInstance { traj, margin, infidelity: infid, loss, trace_distance: td, residual })
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Orthonormal basis of the plane orthogonal to the unit vector `n`.
fn plane_basis(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pivot = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross(n, &pivot);
    let un = norm(&u);
    let u = u.map(|x| x / un);
    (u, cross(n, &u))
}

/// Spherical form of the one-step decomposition for real pure states.
#[derive(Clone, Debug)]
pub struct SphericalCheck {
    /// `cos Δ_t ≤ cos φ_t·cos Δ_{t+1} + sin φ_t·sin φ_0`, magnitudes only.
    pub margin: Margin,
    /// Margin of the operator form of the same inequality.
    pub lemma_margin: f64,
    /// For a codimension-1 `H`, signed latitudes turn the inequality into an
    /// equality; this is the residual of that equality.
    pub signed_gap: Option<f64>,
}

pub fn spherical_step_check(psi0: &RealPureState, psit: &RealPureState, h: &Projector) -> Result<SphericalCheck> {
    let d = psi0.dim();
    check_dim(d, psit.dim())?;
    check_dim(d, h.dim())?;
    let hm = h.herm().matrix();
    let mut real = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let z = hm[(i, j)];
            if z.im.abs() > UNIT_TOLERANCE {
                return Err(Error::InvalidProjector("projector has complex entries".into()));
            }
            real[i * d + j] = z.re;
        }
    }
    let project = |v: &[f64]| -> Vec<f64> { (0..d).map(|i| dot(&real[i * d..(i + 1) * d], v)).collect() };
    let (a0, at) = (psi0.as_slice(), psit.as_slice());
    let (h0, ht) = (project(a0), project(at));
    let perp = |v: &[f64], hv: &[f64]| -> Vec<f64> { v.iter().zip(hv).map(|(x, y)| x - y).collect() };
    let (b0, bt) = (perp(a0, &h0), perp(at, &ht));

    let kept = dot(&ht, &ht);
    if kept <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob: kept });
    }
    let next: Vec<f64> = ht.iter().map(|x| x / kept.sqrt()).collect();

    let cos_t = dot(a0, at).abs().min(1.0);
    let cos_next = dot(a0, &next).abs().min(1.0);
    let (cos_phi_t, sin_phi_t, sin_phi_0) = (kept.sqrt(), norm(&bt), norm(&b0));
    let margin = Margin::inequality("spherical_step", cos_t, cos_phi_t * cos_next + sin_phi_t * sin_phi_0);

    let lemma = check_lemma2b(&psi0.to_density(), &psit.to_density(), &h.to_effect())?;
    let signed_gap = (h.rank() + 1 == d).then(|| dot(a0, at) - cos_phi_t * dot(a0, &next) - dot(&b0, &bt));
    Ok(SphericalCheck { margin, lemma_margin: lemma.margin, signed_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::check_kmw;
    use crate::testkit::rng;
    use rand::Rng;

    #[test]
    fn single_measurement_is_exact() {
        let r = qubit_family(1, 0.2).unwrap();
        assert!((r.fail_exact - 0.2_f64.sin().powi(2)).abs() < 1e-15);
        assert!((r.ratio - 1.0).abs() < 1e-12);
        assert!((r.fail_simulated - r.fail_exact).abs() < 1e-12);
    }

    #[test]
    fn two_step_walk_matches_hand_evaluation() {
        // 1 − cos²(0.1)·cos²(0.2) and 2·sin²(0.1)
        let r = qubit_family(2, 0.1).unwrap();
        assert!((r.fail_exact - 0.049_043).abs() < 1e-6, "{}", r.fail_exact);
        assert!((r.loss_exact - 0.019_933_4).abs() < 1e-7);
        assert!((r.ratio - 2.4603).abs() < 1e-4);
        assert_eq!(r.limit_ratio, 2.5);
    }

    #[test]
    fn simulation_agrees_with_closed_form() {
        for m in [1, 2, 3, 7, 20, 64, 200] {
            for delta in [1e-4_f64, 1e-3, 0.01, 0.05] {
                if m as f64 * delta.sin().powi(2) > 1.0 {
                    continue;
                }
                let r = qubit_family(m, delta).unwrap();
                assert!((r.fail_simulated - r.fail_exact).abs() <= 1e-10, "m={m} δ={delta}");
            }
        }
    }

    #[test]
    fn ratio_approaches_four_m_minus_three_over_m() {
        for m in [2, 5, 50] {
            let r = qubit_family(m, 1e-3).unwrap();
            assert!((r.ratio / r.limit_ratio - 1.0).abs() < 0.01, "m={m}: {}", r.ratio);
        }
        let r = qubit_family(1000, 1e-4).unwrap();
        assert!(r.ratio >= 3.98, "{}", r.ratio);
    }

    #[test]
    fn guards() {
        assert!(matches!(qubit_family(10, 0.5), Err(Error::ParameterOutOfRange(_))));
        assert!(matches!(qubit_family(0, 0.1), Err(Error::InvalidParameter(_))));
        assert!(matches!(qubit_family(2, -0.1), Err(Error::ParameterOutOfRange(_))));
        assert!(club_family(0.1, &[1.0], 2.0).is_err());
        assert!(club_family(0.1, &[1.0, 1.0], 1.0).is_err());
        assert!(geometric_weights(3, 0.5).is_err());
    }

    #[test]
    fn geometric_weights_have_ratio_p_prime_over_p() {
        assert_eq!(geometric_weights(3, 1.5).unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(geometric_weights(2, 2.0).unwrap(), vec![1.0, 1.0]);
        let p = exponent_for_ratio(2.0).unwrap();
        assert!((p - 1.5).abs() < 1e-15);
    }

    #[test]
    fn unit_weights_reduce_to_qubit_walk() {
        let q = qubit_family(4, 0.01).unwrap();
        let c = club_family(0.01, &[1.0; 4], 2.0).unwrap();
        assert_eq!(q.fail_exact, c.fail_exact);
        assert_eq!(q.loss_exact, c.loss_exact);
        // at p = 2 the refined bound is 4·Loss − ε_1 − 2ε_m
        assert!((c.bound_value - (4.0 * c.loss_exact - 3.0 * 0.01_f64.sin().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn refined_bound_tight_with_geometric_weights() {
        for (m, p) in [(2, 2.0), (3, 1.5), (4, 3.0)] {
            let a = geometric_weights(m, p).unwrap();
            let coarse = club_family(1e-2, &a, p).unwrap();
            let fine = club_family(1e-3, &a, p).unwrap();
            assert!(fine.normalized_gap.abs() <= 0.02, "m={m} p={p}: {}", fine.normalized_gap);
            // O(δ⁴) remainder: the normalized gap shrinks ~100× per decade
            assert!(fine.normalized_gap.abs() < coarse.normalized_gap.abs() / 50.0);
            assert!((fine.fail_simulated - fine.fail_exact).abs() < 1e-10);
            assert!((fine.ratio / fine.limit_ratio - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn weighted_walk_satisfies_refined_bound() {
        for (m, p) in [(2, 2.0), (3, 1.5), (4, 3.0), (5, 1.1)] {
            let a = geometric_weights(m, p).unwrap();
            let delta = 0.05 / a.iter().cloned().fold(0.0, f64::max);
            let deltas: Vec<f64> = a.iter().map(|x| x * delta).collect();
            let (_, _, traj) = alternating_walk(&deltas).unwrap();
            assert!(check_kmw(&traj, p).unwrap().passes());
        }
    }

    #[test]
    fn qutrit_walk_is_exactly_tight() {
        for m in [1, 2, 5, 8] {
            for delta in [0.2_f64, 0.3] {
                let q = qutrit_gentle_family(&vec![delta; m]).unwrap();
                let loss = m as f64 * delta.sin().powi(2);
                assert!((q.infidelity - loss).abs() <= 1e-7, "m={m} δ={delta}");
                assert!((q.trace_distance - q.infidelity.sqrt()).abs() <= 1e-8);
                assert!(q.margin.passes() && q.margin.margin.abs() <= 1e-7);
                assert!(q.residual <= 1e-8);
            }
        }
    }

    #[test]
    fn qutrit_examples() {
        let q = qutrit_gentle_family(&[0.3, 0.3]).unwrap();
        assert!((q.infidelity - 0.174_664).abs() < 1e-6);
        let q = qutrit_gentle_family(&[0.2; 5]).unwrap();
        assert!((q.infidelity - 0.197_347).abs() < 1e-6);
        let q = qutrit_gentle_family(&[0.1, 0.4, 0.25]).unwrap();
        let loss: f64 = [0.1_f64, 0.4, 0.25].iter().map(|d| d.sin().powi(2)).sum();
        assert!((q.infidelity - loss).abs() < 1e-8);
        assert!(matches!(qutrit_gentle_family(&[0.9; 3]), Err(Error::ParameterOutOfRange(_))));
    }

    fn real_unit(d: usize, r: &mut impl Rng) -> RealPureState {
        RealPureState::normalized((0..d).map(|_| r.random::<f64>() * 2.0 - 1.0).collect()).unwrap()
    }

    fn real_plane(r: &mut impl Rng) -> Projector {
        let u = real_unit(3, r);
        let v = real_unit(3, r);
        Projector::onto_real_span(3, &[u.as_slice(), v.as_slice()]).unwrap()
    }

    #[test]
    fn spherical_trivial_cases() {
        let h = Projector::coordinate(3, &[0, 1]);
        let psit = RealPureState::normalized(vec![1.0, 1.0, 0.0]).unwrap();
        let psi0 = RealPureState::normalized(vec![0.0, 1.0, 1.0]).unwrap();
        let c = spherical_step_check(&psi0, &psit, &h).unwrap();
        assert!(c.margin.margin.abs() < 1e-12);

        let psi = RealPureState::normalized(vec![0.3, 0.5, 0.8]).unwrap();
        let c = spherical_step_check(&psi, &psi, &h).unwrap();
        assert!(c.margin.margin.abs() < 1e-12);

        let off = RealPureState::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(spherical_step_check(&psi, &off, &h), Err(Error::ZeroProbabilityBranch { .. })));
        assert!(RealPureState::new(vec![1.0, 1.0]).is_err());
        assert!(RealPureState::new(vec![1.0; 5]).is_err());
    }

    #[test]
    fn spherical_matches_operator_form() {
        let mut r = rng(8);
        for _ in 0..300 {
            let (psi0, psit, h) = (real_unit(3, &mut r), real_unit(3, &mut r), real_plane(&mut r));
            let c = spherical_step_check(&psi0, &psit, &h).unwrap();
            assert!(c.margin.passes(), "{:?}", c.margin);
            assert!((c.margin.margin - c.lemma_margin).abs() <= 1e-8);
            assert!(c.signed_gap.unwrap().abs() < 1e-12);
        }
        for _ in 0..100 {
            let (psi0, psit) = (real_unit(4, &mut r), real_unit(4, &mut r));
            let (u, v) = (real_unit(4, &mut r), real_unit(4, &mut r));
            let h = Projector::onto_real_span(4, &[u.as_slice(), v.as_slice()]).unwrap();
            let c = spherical_step_check(&psi0, &psit, &h).unwrap();
            assert!(c.margin.passes());
            assert!((c.margin.margin - c.lemma_margin).abs() <= 1e-8);
            assert!(c.signed_gap.is_none());
        }
    }
}
