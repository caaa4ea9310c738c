//! Parameter sweeps over the extremal families, written as CSV.

use serde::Serialize;

use crate::error::Result;
use crate::tightness::{club_family, exponent_for_ratio, geometric_weights, qubit_family, qutrit_gentle_family};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Qubit,
    Club,
    Qutrit,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Qubit => "qubit",
            SweepKind::Club => "club",
            SweepKind::Qutrit => "qutrit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub ms: Vec<usize>,
    pub deltas: Vec<f64>,
    /// Weight ratio `a_{t+1}/a_t` for the weighted walk.
    pub a_ratio: f64,
}

impl SweepGrid {
    /// The grid each family is usually examined on.
    pub fn standard(kind: SweepKind) -> Self {
        let (ms, deltas) = match kind {
            SweepKind::Qubit => (vec![1, 2, 5, 50], vec![1e-2, 1e-3]),
            SweepKind::Club => (vec![2, 3, 4], vec![1e-2, 1e-3]),
            SweepKind::Qutrit => (vec![1, 2, 5, 8], vec![0.2, 0.3]),
        };
        SweepGrid { ms, deltas, a_ratio: 1.0 }
    }
}

/// One grid point. Fields that do not apply to a family, or that could not
/// be computed because the point is out of range, are `None`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SweepRow {
    pub kind: &'static str,
    pub m: usize,
    pub delta: f64,
    pub p: Option<f64>,
    pub fail_exact: Option<f64>,
    pub fail_simulated: Option<f64>,
    pub loss: Option<f64>,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub limit_ratio: Option<f64>,
    pub normalized_gap: Option<f64>,
    pub infidelity: Option<f64>,
    pub trace_distance: Option<f64>,
    /// `|ratio − limit_ratio| / limit_ratio`
    pub limit_error: Option<f64>,
    /// Whether `limit_error` did not grow from the previous, larger `δ` at the same `m`.
    pub converging: Option<bool>,
    pub status: String,
}

pub const HEADER: [&str; 16] = [
    "kind",
    "m",
    "delta",
    "p",
    "fail_exact",
    "fail_simulated",
    "loss",
    "bound",
    "ratio",
    "limit_ratio",
    "normalized_gap",
    "infidelity",
    "trace_distance",
    "limit_error",
    "converging",
    "status",
];

fn evaluate(kind: SweepKind, m: usize, delta: f64, a_ratio: f64) -> Result<SweepRow> {
    let mut row = SweepRow { kind: kind.name(), m, delta, status: "ok".into(), ..SweepRow::default() };
    match kind {
        SweepKind::Qubit | SweepKind::Club => {
            let r = if kind == SweepKind::Qubit {
                qubit_family(m, delta)?
            } else {
                let p = exponent_for_ratio(a_ratio)?;
                row.p = Some(p);
                club_family(delta, &geometric_weights(m, p)?, p)?
            };
            row.fail_exact = Some(r.fail_exact);
            row.fail_simulated = Some(r.fail_simulated);
            row.loss = Some(r.loss_exact);
            row.bound = Some(r.bound_value);
            row.ratio = Some(r.ratio);
            row.limit_ratio = Some(r.limit_ratio);
            row.normalized_gap = Some(r.normalized_gap);
        }
        SweepKind::Qutrit => {
            let q = qutrit_gentle_family(&vec![delta; m])?;
            row.fail_simulated = Some(q.traj.fail);
            row.loss = Some(q.loss);
            row.bound = Some(q.loss);
            row.ratio = Some(q.infidelity / q.loss);
            row.limit_ratio = Some(1.0);
            row.normalized_gap = Some((q.infidelity - q.loss) / (delta * delta));
            row.infidelity = Some(q.infidelity);
            row.trace_distance = Some(q.trace_distance);
        }
    }
    row.limit_error = row.ratio.zip(row.limit_ratio).map(|(r, l)| (r - l).abs() / l);
    Ok(row)
}

/// Every `(m, δ)` pair of the grid, `δ` in decreasing order within each `m`.
/// Out-of-range points become rows with an error status.
pub fn tightness_sweep(kind: SweepKind, grid: &SweepGrid) -> Vec<SweepRow> {
    let mut deltas = grid.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    for &m in &grid.ms {
        let mut prev: Option<f64> = None;
        for &delta in &deltas {
            let mut row = evaluate(kind, m, delta, grid.a_ratio).unwrap_or_else(|e| SweepRow {
                kind: kind.name(),
                m,
                delta,
                status: e.to_string(),
                ..SweepRow::default()
            });
            row.converging = prev.zip(row.limit_error).map(|(p, e)| e <= p);
            prev = row.limit_error;
            rows.push(row);
        }
    }
    rows
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.kind.to_string(),
            r.m.to_string(),
            format!("{:.16e}", r.delta),
            num(r.p),
            num(r.fail_exact),
            num(r.fail_simulated),
            num(r.loss),
            num(r.bound),
            num(r.ratio),
            num(r.limit_ratio),
            num(r.normalized_gap),
            num(r.infidelity),
            num(r.trace_distance),
            num(r.limit_error),
            r.converging.map(|b| b.to_string()).unwrap_or_default(),
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("UTF-8 output")
}
