//! Density matrices, projectors, effects and measurement operators, with
//! conditioning and the fidelity family.
//!
//! Conditioning follows the nondestructive-measurement convention: for an
//! operator `M` with `M†M ≤ Id`, outcome `M` occurs with probability
//! `tr(ρ M†M)` and leaves the state `M ρ M† / tr(ρ M†M)`. Projectors and
//! effects act as their own measurement operator, so `σ|A` always means
//! `A σ A / tr(σ A²)`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    c, eig_hermitian, mat_abs, mat_sqrt_psd, schatten1, schatten1_hermitian, sqrt_from_eig, trace_sqrt_psd, CMatrix, HermMatrix, C64,
    PSD_TOLERANCE,
};

/// Branches whose probability is at or below this value cannot be conditioned on.
pub const PROB_FLOOR: f64 = 1e-12;

pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const PROJECTOR_TOLERANCE: f64 = 1e-9;
pub const MEASUREMENT_TOLERANCE: f64 = 1e-9;

/// A mixed state: Hermitian, PSD and trace one. The principal square root is
/// computed once on construction since every fidelity evaluation needs it.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    rho: HermMatrix,
    sqrt: HermMatrix,
    spectrum: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(rho: HermMatrix) -> Result<Self> {
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Self::from_psd(rho)
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermMatrix::new(m)?)
    }

    /// Normalizes a PSD matrix with positive trace into a state.
    pub fn normalized(m: HermMatrix) -> Result<Self> {
        let tr = m.trace();
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize trace {tr}")));
        }
        Self::from_psd(HermMatrix::hermitize(m.matrix().scale(1.0 / tr)))
    }

    fn from_psd(rho: HermMatrix) -> Result<Self> {
        let ed = eig_hermitian(&rho)?;
        let min = *ed.values.last().expect("dim >= 1");
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd { eigenvalue: min });
        }
        let sqrt = sqrt_from_eig(&ed)?;
        Ok(DensityMatrix { rho, sqrt, spectrum: ed.values })
    }

    /// `|ψ⟩⟨ψ|` for the normalization of `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(HermMatrix::hermitize(CMatrix::outer(&v, &v)))
    }

    pub fn pure_real(psi: &[f64]) -> Result<Self> {
        Self::pure(&psi.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut probs = vec![0.0; dim];
        probs[index] = 1.0;
        Self::diagonal(&probs).expect("basis state is valid")
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::diagonal(&vec![1.0 / dim as f64; dim]).expect("Id/d is a valid state")
    }

    /// `diag(p)` for a probability vector `p`.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermMatrix::diag(probs))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn herm(&self) -> &HermMatrix {
        &self.rho
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    /// `√ρ`
    pub fn sqrt(&self) -> &HermMatrix {
        &self.sqrt
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn purity(&self) -> f64 {
        self.matrix().trace_product(self.matrix()).re
    }
}

/// Anything that acts as a nondestructive measurement operator `M` with
/// `M†M ≤ Id`.
pub trait Operator {
    fn operator(&self) -> &CMatrix;

    fn op_dim(&self) -> usize {
        self.operator().dim()
    }

    /// `M†M`
    fn effect_matrix(&self) -> HermMatrix {
        let m = self.operator();
        HermMatrix::hermitize(&m.adjoint() * m)
    }
}

/// An orthogonal projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector(HermMatrix);

impl Projector {
    pub fn new(a: HermMatrix) -> Result<Self> {
        let sq = a.matrix() * a.matrix();
        let dev = sq.max_abs_diff(a.matrix());
        if dev > PROJECTOR_TOLERANCE {
            return Err(Error::InvalidProjector(format!("max |A² − A| = {dev:e}")));
        }
        let ed = eig_hermitian(&a)?;
        if let Some(bad) = ed
            .values
            .iter()
            .find(|&&x| x.abs() > PROJECTOR_TOLERANCE && (x - 1.0).abs() > PROJECTOR_TOLERANCE)
        {
            return Err(Error::InvalidProjector(format!("eigenvalue {bad} not in {{0, 1}}")));
        }
        Ok(Projector(a))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermMatrix::new(m).map_err(|e| Error::InvalidProjector(e.to_string()))?)
    }

    pub fn identity(dim: usize) -> Self {
        Projector(HermMatrix::identity(dim))
    }

    /// Projector onto the span of the given vectors (orthonormalized here).
    pub fn onto_span(dim: usize, vectors: &[Vec<C64>]) -> Result<Self> {
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for v in vectors {
            check_dim(dim, v.len())?;
            let mut w = v.clone();
            // two passes of Gram–Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let ov: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= ov * bi;
                    }
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::InvalidProjector("spanning vectors are linearly dependent".into()));
            }
            basis.push(w.into_iter().map(|z| z / norm).collect());
        }
        let mut m = CMatrix::zeros(dim);
        for b in &basis {
            m = &m + &CMatrix::outer(b, b);
        }
        Self::new(HermMatrix::hermitize(m))
    }

    pub fn onto_real_span(dim: usize, vectors: &[&[f64]]) -> Result<Self> {
        let vs: Vec<Vec<C64>> = vectors.iter().map(|v| v.iter().map(|&x| c(x, 0.0)).collect()).collect();
        Self::onto_span(dim, &vs)
    }

    /// Coordinate projector onto the basis vectors in `indices`.
    pub fn coordinate(dim: usize, indices: &[usize]) -> Self {
        let mut d = vec![0.0; dim];
        for &i in indices {
            d[i] = 1.0;
        }
        Projector(HermMatrix::diag(&d))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn herm(&self) -> &HermMatrix {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.trace().round() as usize
    }

    /// `Ā = Id − A`.
    pub fn complement(&self) -> Projector {
        Projector(self.0.complement())
    }

    /// `E_ρ[A]`, clamped to `[0, 1]`.
    pub fn probability(&self, rho: &DensityMatrix) -> f64 {
        expectation(rho, &self.0).clamp(0.0, 1.0)
    }

    pub fn to_effect(&self) -> Effect {
        Effect(self.0.clone())
    }
}

impl Operator for Projector {
    fn operator(&self) -> &CMatrix {
        self.0.matrix()
    }
}

/// A POVM element: `0 ≤ A ≤ Id`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect(HermMatrix);

impl Effect {
    pub fn new(a: HermMatrix) -> Result<Self> {
        let ed = eig_hermitian(&a)?;
        let max = ed.values[0];
        let min = *ed.values.last().expect("dim >= 1");
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidEffect(format!("eigenvalue {min} below 0")));
        }
        if max > 1.0 + PSD_TOLERANCE {
            return Err(Error::InvalidEffect(format!("eigenvalue {max} above 1")));
        }
        Ok(Effect(a))
    }

    pub fn identity(dim: usize) -> Self {
        Effect(HermMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn herm(&self) -> &HermMatrix {
        &self.0
    }

    pub fn complement(&self) -> Effect {
        Effect(self.0.complement())
    }

    /// `E_ρ[A]`, clamped to `[0, 1]`.
    pub fn probability(&self, rho: &DensityMatrix) -> f64 {
        expectation(rho, &self.0).clamp(0.0, 1.0)
    }

    /// `√A` as a measurement operator; its effect is `A` itself.
    pub fn sqrt_operator(&self) -> Result<MeasurementOp> {
        Ok(MeasurementOp(mat_sqrt_psd(&self.0)?.into_matrix()))
    }
}

impl Operator for Effect {
    fn operator(&self) -> &CMatrix {
        self.0.matrix()
    }
}

/// A general measurement operator `M` with `M†M ≤ Id`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOp(CMatrix);

impl MeasurementOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        let gram = HermMatrix::hermitize(&m.adjoint() * &m);
        let max = eig_hermitian(&gram)?.values[0];
        if max > 1.0 + MEASUREMENT_TOLERANCE {
            return Err(Error::InvalidMeasurement(format!("M†M has eigenvalue {max} above 1")));
        }
        Ok(MeasurementOp(m))
    }

    pub fn identity(dim: usize) -> Self {
        MeasurementOp(CMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

impl Operator for MeasurementOp {
    fn operator(&self) -> &CMatrix {
        &self.0
    }
}

impl From<&Projector> for MeasurementOp {
    fn from(p: &Projector) -> Self {
        MeasurementOp(p.operator().clone())
    }
}

impl From<&Effect> for MeasurementOp {
    fn from(e: &Effect) -> Self {
        MeasurementOp(e.operator().clone())
    }
}

/// `tr(ρA)`.
pub fn expectation(rho: &DensityMatrix, a: &HermMatrix) -> f64 {
    rho.matrix().trace_product(a.matrix()).re
}

/// `E_ρ[M†M]`, the probability that `M` occurs.
pub fn outcome_probability(rho: &DensityMatrix, m: &impl Operator) -> f64 {
    expectation(rho, &m.effect_matrix()).clamp(0.0, 1.0)
}

/// `ρ|M = MρM† / E_ρ[M†M]`.
pub fn condition(rho: &DensityMatrix, m: &impl Operator) -> Result<DensityMatrix> {
    check_dim(rho.dim(), m.op_dim())?;
    let post = rho.herm().congruence(m.operator());
    let prob = post.trace();
    if prob <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob });
    }
    DensityMatrix::normalized(post)
}

/// `‖A‖_ρ = √E_ρ[A†A]`.
pub fn rho_norm(a: &CMatrix, rho: &DensityMatrix) -> f64 {
    let gram = HermMatrix::hermitize(&a.adjoint() * a);
    expectation(rho, &gram).max(0.0).sqrt()
}

/// Root fidelity `tr √(√ρ σ √ρ)`.
pub fn root_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    let inner = sigma.herm().congruence(rho.sqrt().matrix());
    Ok(trace_sqrt_psd(&inner)?.clamp(0.0, 1.0))
}

/// Root fidelity through the trace norm, `‖√ρ √σ‖₁`; kept as a second,
/// independent route for cross-checks.
pub fn root_fidelity_trace_norm(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    Ok(schatten1(&(rho.sqrt().matrix() * sigma.sqrt().matrix()))?.clamp(0.0, 1.0))
}

/// `F(ρ, σ) = ‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(root_fidelity(rho, sigma)?.powi(2))
}

/// `1 − F(ρ, σ)`.
pub fn infidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(1.0 - fidelity(rho, sigma)?)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    let diff = HermMatrix::hermitize(rho.matrix() - sigma.matrix());
    Ok((0.5 * schatten1_hermitian(&diff)?).clamp(0.0, 1.0))
}

/// Root fidelity of two conditioned states without conditioning explicitly:
/// `‖√ρ M†N √σ‖₁ / (‖M‖_ρ ‖N‖_σ)`.
pub fn fid_conditioned(
    rho: &DensityMatrix,
    m: &impl Operator,
    sigma: &DensityMatrix,
    n: &impl Operator,
) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    check_dim(rho.dim(), m.op_dim())?;
    check_dim(rho.dim(), n.op_dim())?;
    let norm_m = rho_norm(m.operator(), rho);
    let norm_n = rho_norm(n.operator(), sigma);
    for norm in [norm_m, norm_n] {
        if norm * norm <= PROB_FLOOR {
            return Err(Error::ZeroProbabilityBranch { prob: norm * norm });
        }
    }
    let prod = &(&(rho.sqrt().matrix() * &m.operator().adjoint()) * n.operator()) * sigma.sqrt().matrix();
    Ok(schatten1(&prod)? / (norm_m * norm_n))
}

/// `√(ρ|M)` written as `|√ρ M†| / ‖M‖_ρ`.
pub fn sqrt_conditioned(rho: &DensityMatrix, m: &impl Operator) -> Result<HermMatrix> {
    let norm = rho_norm(m.operator(), rho);
    if norm * norm <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob: norm * norm });
    }
    let abs = mat_abs(&(rho.sqrt().matrix() * &m.operator().adjoint()))?;
    Ok(HermMatrix::hermitize(abs.matrix().scale(1.0 / norm)))
}

/// Both sides of `F(ρ, ρ|A) = E_ρ[A]` for a projector `A`, as `(lhs, rhs)`.
pub fn gentle_fact(rho: &DensityMatrix, a: &Projector) -> Result<(f64, f64)> {
    let cond = condition(rho, a)?;
    Ok((fidelity(rho, &cond)?, a.probability(rho)))
}

/// Both sides of `√F(ρ, σ|A) ≤ √E_ρ[A] √E_σ[A] / ‖A‖_σ` for an effect `A`.
/// For projectors the right side reduces to `√E_ρ[A]`.
pub fn cor_best_bound(rho: &DensityMatrix, sigma: &DensityMatrix, a: &Effect) -> Result<(f64, f64)> {
    check_dim(rho.dim(), sigma.dim())?;
    check_dim(rho.dim(), a.dim())?;
    let norm = rho_norm(a.operator(), sigma);
    if norm * norm <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob: norm * norm });
    }
    let lhs = root_fidelity(rho, &condition(sigma, a)?)?;
    let rhs = a.probability(rho).sqrt() * a.probability(sigma).sqrt() / norm;
    Ok((lhs, rhs))
}
