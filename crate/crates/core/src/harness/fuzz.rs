//! Fuzz campaigns: every requested check over seeded random instances,
//! aggregated to a per-check minimum margin.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::gen::{
    ginibre_density, haar_projector, near_support_projector, random_effect, random_measurement_op, Seed,
};
use crate::bounds::*;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qstate::{outcome_probability, DensityMatrix, Effect, MeasurementOp, Projector, PROB_FLOOR};
use crate::seqmeas::{run_sequence, Trajectory};

/// Dumps kept in a report; later violations are only counted.
pub const MAX_DUMPS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Theorem1,
    UnionBound,
    Gentle,
    Lemma2b,
    GentleStep,
    Kmw,
    Telescoping,
    Implication,
}

impl CheckId {
    pub const ALL: [CheckId; 8] = [
        CheckId::Theorem1,
        CheckId::UnionBound,
        CheckId::Gentle,
        CheckId::Lemma2b,
        CheckId::GentleStep,
        CheckId::Kmw,
        CheckId::Telescoping,
        CheckId::Implication,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Theorem1 => "theorem1",
            CheckId::UnionBound => "union_bound",
            CheckId::Gentle => "gentle",
            CheckId::Lemma2b => "lemma2b",
            CheckId::GentleStep => "gentle_step",
            CheckId::Kmw => "kmw",
            CheckId::Telescoping => "telescoping",
            CheckId::Implication => "implication",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FuzzConfig {
    pub dims: Vec<usize>,
    pub m_min: usize,
    pub m_max: usize,
    /// Trials per `(d, m)` pair.
    pub trials: usize,
    pub checks: Vec<CheckId>,
    pub kmw_p_values: Vec<f64>,
    pub seed: Seed,
    /// Inequality margins below this count as violations.
    pub violation_threshold: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            dims: vec![2, 3, 4, 6, 8],
            m_min: 1,
            m_max: 6,
            trials: 1000,
            checks: CheckId::ALL.to_vec(),
            kmw_p_values: vec![1.1, 2.0, 5.0],
            seed: Seed(0),
            violation_threshold: -VIOLATION_TOLERANCE,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return bad(format!("dimensions must all be at least 2, got {:?}", self.dims));
        }
        if self.m_min == 0 || self.m_min > self.m_max {
            return bad(format!("empty measurement range {}..={}", self.m_min, self.m_max));
        }
        if self.checks.is_empty() {
            return bad("no checks selected".into());
        }
        if let Some(p) = self.kmw_p_values.iter().find(|p| !p.is_finite() || **p <= 1.0) {
            return bad(format!("exponent p = {p} must exceed 1"));
        }
        if self.violation_threshold.is_nan() || self.violation_threshold > 0.0 {
            return bad("violation threshold must be ≤ 0".into());
        }
        Ok(())
    }

    fn keys(&self) -> Vec<InstanceKey> {
        let mut keys = Vec::with_capacity(self.dims.len() * (self.m_max - self.m_min + 1) * self.trials);
        for &d in &self.dims {
            for m in self.m_min..=self.m_max {
                keys.extend((0..self.trials).map(|trial| InstanceKey { d, m, trial }));
            }
        }
        keys
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Execution {
    Serial,
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceKey {
    pub d: usize,
    pub m: usize,
    pub trial: usize,
}

/// One generated instance: a trajectory plus an unrelated `(σ, A)` pair for
/// the one-step checks.
pub struct Instance {
    pub key: InstanceKey,
    pub seed: Seed,
    pub rho: DensityMatrix,
    pub projectors: Vec<Projector>,
    pub sigma: DensityMatrix,
    pub effect: Effect,
    pub measurement: MeasurementOp,
    pub projector: Projector,
}

pub fn generate_instance(seed: Seed, key: InstanceKey) -> Result<Instance> {
    let sub = seed.derive(&[key.d as u64, key.m as u64, key.trial as u64]);
    let mut r = sub.rng();
    let d = key.d;
    let rho = ginibre_density(d, r.random_range(1..=d), &mut r);
    let mut projectors = Vec::with_capacity(key.m);
    for _ in 0..key.m {
        let k = r.random_range(1..=d);
        let p = if r.random_bool(0.5) {
            haar_projector(d, k, &mut r)
        } else {
            let eta = 10f64.powf(-r.random_range(1.0..4.0));
            near_support_projector(&rho, k, eta, &mut r)?
        };
        projectors.push(p);
    }
    let sigma = ginibre_density(d, r.random_range(1..=d), &mut r);
    let effect = random_effect(d, &mut r);
    let (measurement, _) = random_measurement_op(d, &mut r);
    let projector = haar_projector(d, r.random_range(1..=d), &mut r);
    Ok(Instance { key, seed: sub, rho, projectors, sigma, effect, measurement, projector })
}

/// Margins of one trial, reduced to the minimum per check name.
#[derive(Default)]
struct TrialMargins(Vec<(String, f64, f64)>);

impl TrialMargins {
    fn push(&mut self, name: &str, m: &Margin, threshold: f64) {
        // inequality margins use the campaign threshold, equalities keep their own
        let tol = if m.tolerance == VIOLATION_TOLERANCE { -threshold } else { m.tolerance };
        let value = if m.margin.is_nan() { f64::NEG_INFINITY } else { m.margin };
        match self.0.iter_mut().find(|(n, _, _)| n == name) {
            Some(slot) => slot.1 = slot.1.min(value),
            None => self.0.push((name.to_string(), value, tol)),
        }
    }

    fn add(&mut self, m: &Margin, threshold: f64) {
        self.push(m.name, m, threshold);
    }
}

struct TrialOutcome {
    key: InstanceKey,
    seed: Seed,
    margins: Vec<(String, f64, f64)>,
    error: Option<String>,
}

fn run_trial(cfg: &FuzzConfig, key: InstanceKey) -> TrialOutcome {
    let seed = cfg.seed.derive(&[key.d as u64, key.m as u64, key.trial as u64]);
    let mut out = TrialMargins::default();
    let error = evaluate(cfg, key, &mut out).err().map(|e| e.to_string());
    TrialOutcome { key, seed, margins: out.0, error }
}

fn evaluate(cfg: &FuzzConfig, key: InstanceKey, out: &mut TrialMargins) -> Result<()> {
    let inst = generate_instance(cfg.seed, key)?;
    let traj = run_sequence(&inst.rho, &inst.projectors)?;
    let th = cfg.violation_threshold;
    for &check in &cfg.checks {
        match check {
            CheckId::Theorem1 => out.add(&check_theorem1(&traj)?, th),
            CheckId::UnionBound => {
                let (sharp, plain) = check_union_bound(&traj);
                if let Some(s) = sharp {
                    out.add(&s, th);
                }
                out.add(&plain, th);
            }
            CheckId::Gentle => {
                let (a, b) = check_gentle(&traj)?;
                out.add(&a, th);
                out.add(&b, th);
            }
            CheckId::Lemma2b => {
                out.add(&check_lemma2b(&inst.rho, &inst.sigma, &inst.effect)?, th);
                out.add(&check_lemma2b(&inst.rho, &inst.sigma, &inst.projector.to_effect())?, th);
                for t in 1..=traj.live_steps() {
                    let sigma = traj.states[t - 1].as_ref().expect("live step");
                    let a = traj.projectors[t - 1].to_effect();
                    if outcome_probability(sigma, &a) > PROB_FLOOR {
                        out.add(&check_lemma2b(&traj.rho0, sigma, &a)?, th);
                    }
                }
            }
            CheckId::GentleStep => {
                out.add(&check_gentle_step(&inst.rho, &inst.sigma, &inst.projector)?, th);
                for m in check_gentle_chain(&traj)? {
                    out.add(&m, th);
                }
            }
            CheckId::Kmw => {
                if traj.m() >= 2 {
                    for &p in &cfg.kmw_p_values {
                        out.push(&format!("kmw[p={p}]"), &check_kmw(&traj, p)?, th);
                    }
                }
            }
            CheckId::Telescoping => {
                for m in check_step_decrements(&traj) {
                    out.add(&m, th);
                }
                let (sum, cs) = check_telescoping(&traj)?;
                out.add(&sum, th);
                out.add(&cs, th);
                out.add(&check_conservation(&traj), th);
                out.add(&check_first_step(&traj), th);
                out.add(&check_final_fidelity(&traj)?, th);
            }
            CheckId::Implication => {
                // derived bounds must pass whenever the main inequality does
                if check_theorem1(&traj)?.passes() {
                    let worst = derived_from_theorem1(&traj)?
                        .into_iter()
                        .min_by(|a, b| a.margin.total_cmp(&b.margin))
                        .expect("at least one derived margin");
                    out.push("theorem1_implies", &worst, th);
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckSummary {
    pub name: String,
    pub min_margin: f64,
    pub worst_seed: Seed,
    pub worst_instance: InstanceKey,
    pub trials: usize,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialError {
    pub seed: Seed,
    pub instance: InstanceKey,
    pub error: String,
}

type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn matrix_json(m: &CMatrix) -> JsonMatrix {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Full instance behind a violation, enough to replay it without the
/// generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ViolationDump {
    pub check: String,
    pub margin: f64,
    pub seed: Seed,
    pub instance: InstanceKey,
    pub rho: JsonMatrix,
    pub projectors: Vec<JsonMatrix>,
    pub sigma: JsonMatrix,
    pub effect: JsonMatrix,
    pub projector: JsonMatrix,
}

impl ViolationDump {
    fn new(cfg: &FuzzConfig, check: &str, margin: f64, key: InstanceKey) -> Option<Self> {
        let inst = generate_instance(cfg.seed, key).ok()?;
        Some(ViolationDump {
            check: check.to_string(),
            margin,
            seed: inst.seed,
            instance: key,
            rho: matrix_json(inst.rho.matrix()),
            projectors: inst.projectors.iter().map(|p| matrix_json(p.herm().matrix())).collect(),
            sigma: matrix_json(inst.sigma.matrix()),
            effect: matrix_json(inst.effect.herm().matrix()),
            projector: matrix_json(inst.projector.herm().matrix()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub per_check: Vec<CheckSummary>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<TrialError>,
    #[serde(skip_serializing_if = "is_zero")]
    pub violation_count: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<ViolationDump>,
    /// Unix seconds; left unset by [`fuzz`] so reports are reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl FuzzReport {
    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.per_check.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `name,minMargin,worstSeed,d,m,trial,trials,tolerance,pass`
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "minMargin", "worstSeed", "d", "m", "trial", "trials", "tolerance", "pass"])
            .expect("in-memory write");
        for c in &self.per_check {
            w.write_record([
                c.name.clone(),
                format!("{:.16e}", c.min_margin),
                c.worst_seed.0.to_string(),
                c.worst_instance.d.to_string(),
                c.worst_instance.m.to_string(),
                c.worst_instance.trial.to_string(),
                c.trials.to_string(),
                format!("{:.16e}", c.tolerance),
                c.pass.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("ASCII output")
    }
}

/// Runs the campaign. Serial and parallel execution give identical reports:
/// trial outcomes are collected in key order and folded serially, ties going
/// to the earliest instance.
pub fn fuzz(cfg: &FuzzConfig, exec: Execution) -> Result<FuzzReport> {
    cfg.validate()?;
    let keys = cfg.keys();
    let outcomes: Vec<TrialOutcome> = match exec {
        Execution::Serial => keys.iter().map(|&k| run_trial(cfg, k)).collect(),
        Execution::Parallel => keys.par_iter().map(|&k| run_trial(cfg, k)).collect(),
    };

    let mut per_check: Vec<CheckSummary> = Vec::new();
    let mut errors = Vec::new();
    let mut violations = Vec::new();
    let mut violation_count = 0;
    for o in &outcomes {
        if let Some(e) = &o.error {
            errors.push(TrialError { seed: o.seed, instance: o.key, error: e.clone() });
        }
        for (name, margin, tol) in &o.margins {
            if *margin < -tol {
                violation_count += 1;
                if violations.len() < MAX_DUMPS {
                    violations.extend(ViolationDump::new(cfg, name, *margin, o.key));
                }
            }
            match per_check.iter_mut().find(|c| &c.name == name) {
                Some(s) => {
                    s.trials += 1;
                    if *margin < s.min_margin {
                        s.min_margin = *margin;
                        s.worst_seed = o.seed;
                        s.worst_instance = o.key;
                    }
                }
                None => per_check.push(CheckSummary {
                    name: name.clone(),
                    min_margin: *margin,
                    worst_seed: o.seed,
                    worst_instance: o.key,
                    trials: 1,
                    tolerance: *tol,
                    pass: true,
                }),
            }
        }
    }
    for s in &mut per_check {
        s.pass = s.min_margin >= -s.tolerance;
    }
    let pass = errors.is_empty() && per_check.iter().all(|c| c.pass);
    Ok(FuzzReport { config: cfg.clone(), per_check, pass, errors, violation_count, violations, timestamp: None })
}

/// Generates a trajectory exactly as the campaign does, for replaying a
/// reported instance.
pub fn replay_trajectory(seed: Seed, key: InstanceKey) -> Result<Trajectory> {
    let inst = generate_instance(seed, key)?;
    run_sequence(&inst.rho, &inst.projectors)
}
