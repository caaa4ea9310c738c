//! Classical counterparts: distributions on `[d]`, events, the
//! Bhattacharyya coefficient and total variation distance.
//!
//! A distribution `p` embeds as the diagonal state `diag(p)` and an event
//! `A ⊆ [d]` as the coordinate projector onto `A`; under this embedding the
//! Bhattacharyya coefficient is the root fidelity.

use crate::bounds::Margin;
use crate::error::{check_dim, Error, Result};
use crate::qstate::{DensityMatrix, Projector};

/// Entries at or below this are treated as exact zeros for support questions.
pub const SUPPORT_EPS: f64 = 1e-15;

pub const SUM_TOLERANCE: f64 = 1e-12;

/// Largest ground set for exhaustive event enumeration.
pub const MAX_ENUM_DIM: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Dist {
    probs: Vec<f64>,
}

impl Dist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty ground set".into()));
        }
        if let Some(bad) = probs.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {bad} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Dist { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(d: usize) -> Self {
        Dist { probs: vec![1.0 / d as f64; d] }
    }

    pub fn d(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p(A)`
    pub fn prob(&self, event: &Event) -> f64 {
        assert_eq!(self.d(), event.d());
        self.probs
            .iter()
            .zip(&event.members)
            .filter(|(x, &inside)| inside && **x > SUPPORT_EPS)
            .map(|(x, _)| x)
            .sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::diagonal(&self.probs).expect("a distribution embeds as a valid diagonal state")
    }
}

/// A subset of the ground set `{0, …, d−1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    members: Vec<bool>,
}

impl Event {
    pub fn new(d: usize, indices: &[usize]) -> Result<Self> {
        let mut members = vec![false; d];
        for &i in indices {
            if i >= d {
                return Err(Error::InvalidParameter(format!("index {i} outside ground set of size {d}")));
            }
            members[i] = true;
        }
        Ok(Event { members })
    }

    pub fn full(d: usize) -> Self {
        Event { members: vec![true; d] }
    }

    /// Event whose members are the set bits of `mask`.
    pub fn from_mask(d: usize, mask: u64) -> Self {
        assert!(d <= 64);
        Event { members: (0..d).map(|i| mask >> i & 1 == 1).collect() }
    }

    /// Every event over a ground set of size `d ≤ 16`.
    pub fn all(d: usize) -> Result<impl Iterator<Item = Event>> {
        if d > MAX_ENUM_DIM {
            return Err(Error::ParameterOutOfRange(format!(
                "event enumeration is capped at d ≤ {MAX_ENUM_DIM}"
            )));
        }
        Ok((0..1u64 << d).map(move |mask| Event::from_mask(d, mask)))
    }

    pub fn d(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn complement(&self) -> Event {
        Event { members: self.members.iter().map(|x| !x).collect() }
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.d()).filter(|&i| self.members[i]).collect()
    }

    pub fn to_projector(&self) -> Projector {
        Projector::coordinate(self.d(), &self.indices())
    }
}

/// Bhattacharyya coefficient `Σ √p_i √q_i`.
pub fn bc(p: &Dist, q: &Dist) -> Result<f64> {
    check_dim(p.d(), q.d())?;
    Ok(bc_terms(p, q, |_| true).clamp(0.0, 1.0))
}

fn bc_terms(p: &Dist, q: &Dist, keep: impl Fn(usize) -> bool) -> f64 {
    p.probs
        .iter()
        .zip(&q.probs)
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (a, b))| a.sqrt() * b.sqrt())
        .sum()
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tv(p: &Dist, q: &Dist) -> Result<f64> {
    check_dim(p.d(), q.d())?;
    Ok(0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `d_TV(p, q) ≤ √(1 − BC(p,q)²)`.
pub fn classical_fvdg_margin(p: &Dist, q: &Dist) -> Result<Margin> {
    let b = bc(p, q)?;
    Ok(Margin::upper("classical_fvdg", tv(p, q)?, (1.0 - b * b).max(0.0).sqrt(), 1e-12))
}

/// `p|A`: zero outside `A`, renormalized inside.
pub fn condition_dist(p: &Dist, event: &Event) -> Result<Dist> {
    check_dim(p.d(), event.d())?;
    let mass = p.prob(event);
    if mass <= 0.0 {
        return Err(Error::ZeroProbabilityBranch { prob: mass });
    }
    let probs = p
        .probs
        .iter()
        .enumerate()
        .map(|(i, &x)| if event.contains(i) && x > SUPPORT_EPS { x / mass } else { 0.0 })
        .collect();
    Ok(Dist { probs })
}

/// The three quantities in the classical one-step decomposition:
/// `lhs = BC(p,q)`, the exact split
/// `mid = √q(A)·BC(p, q|A) + Σ_{i∉A} √p_i√q_i`, and the Cauchy–Schwarz bound
/// `rhs = √q(A)·BC(p, q|A) + √q(Ā)·√p(Ā)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalSplit {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
}

pub fn lemma2b_classical(p: &Dist, q: &Dist, event: &Event) -> Result<ClassicalSplit> {
    check_dim(p.d(), q.d())?;
    let q_a = q.prob(event);
    let cond = condition_dist(q, event)?;
    let bar = event.complement();
    let head = q_a.sqrt() * bc_terms(p, &cond, |_| true);
    let tail = bc_terms(p, q, |i| bar.contains(i));
    Ok(ClassicalSplit {
        lhs: bc_terms(p, q, |_| true),
        mid: head + tail,
        rhs: head + q.prob(&bar).sqrt() * p.prob(&bar).sqrt(),
    })
}

/// Classical sequential events: `(succ, loss)` with `succ = p(∩ A_t)` and
/// `loss = Σ_t p(Ā_t)`.
pub fn classical_union(p: &Dist, events: &[Event]) -> Result<(f64, f64)> {
    let mut all = Event::full(p.d());
    let mut loss = 0.0;
    for e in events {
        check_dim(p.d(), e.d())?;
        loss += p.prob(&e.complement());
        for i in 0..p.d() {
            all.members[i] &= e.contains(i);
        }
    }
    Ok((p.prob(&all), loss))
}
