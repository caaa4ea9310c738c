//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here works on square `d × d` matrices stored row-major. The
//! eigensolver is a cyclic complex Jacobi method, which is accurate to a few
//! ulps at the sizes this crate targets (`d ≤ 64`). Singular values come from
//! a one-sided (Hestenes) Jacobi iteration applied to the matrix itself, so
//! small singular values keep absolute accuracy `~ eps·‖M‖` instead of the
//! `~ sqrt(eps)·‖M‖` one would get from the eigenvalues of `M†M`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in `[-PSD_TOLERANCE, 0)` are clipped to zero by
/// [`mat_sqrt_psd`]; anything more negative is rejected.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Tolerance used when checking that a matrix is Hermitian on construction.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        CMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from its rows. Fails unless the rows form a square.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix must have at least one row".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimMismatch { expected: dim, found: row.len() });
            }
            data.extend(row);
        }
        Ok(CMatrix { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
    }

    /// `|v⟩⟨w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        assert_eq!(v.len(), w.len());
        Self::from_fn(v.len(), |i, j| v[i] * w[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation between two matrices of equal size.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = c(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A Hermitian matrix. The stored entries are exactly Hermitian: the
/// constructors symmetrize via `(H + H†)/2` and force a real diagonal.
#[derive(Clone, PartialEq, Debug)]
pub struct HermMatrix(CMatrix);

impl HermMatrix {
    /// Checked constructor; rejects inputs further than
    /// [`HERMITIAN_TOLERANCE`] from Hermitian.
    pub fn new(m: CMatrix) -> Result<Self> {
        let deviation = m.hermitian_deviation();
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::hermitize(m))
    }

    /// Projects onto the Hermitian part, `(M + M†)/2`.
    pub fn hermitize(mut m: CMatrix) -> Self {
        let n = m.dim;
        for i in 0..n {
            m[(i, i)] = c(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        HermMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        HermMatrix(CMatrix::identity(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        HermMatrix(CMatrix::diag(values))
    }

    /// `V diag(λ) V†`.
    pub fn from_spectrum(values: &[f64], vectors: &CMatrix) -> Self {
        let n = vectors.dim();
        assert_eq!(values.len(), n);
        let mut m = CMatrix::zeros(n);
        for (k, &lam) in values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = vectors[(i, k)] * lam;
                for j in 0..n {
                    m[(i, j)] += vik * vectors[(j, k)].conj();
                }
            }
        }
        Self::hermitize(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Id − H`.
    pub fn complement(&self) -> HermMatrix {
        Self::hermitize(&CMatrix::identity(self.dim()) - &self.0)
    }

    /// `X H X†`, symmetrized.
    pub fn congruence(&self, x: &CMatrix) -> HermMatrix {
        Self::hermitize(&(x * &self.0) * &x.adjoint())
    }

    pub fn eig(&self) -> Result<EigenDecomp> {
        eig_hermitian(self)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eig()?.values.last().expect("dim >= 1"))
    }
}

/// Eigenvalues in descending order with orthonormal eigenvectors as the
/// columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomp {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomp {
    pub fn reconstruct(&self) -> HermMatrix {
        HermMatrix::from_spectrum(&self.values, &self.vectors)
    }
}

fn off_diagonal_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the classical real Jacobi rotation, so the combined
/// 2×2 unitary is `G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]`.
pub fn eig_hermitian(h: &HermMatrix) -> Result<EigenDecomp> {
    let n = h.dim();
    let mut a = h.matrix().as_slice().to_vec();
    let mut v = CMatrix::identity(n);
    let fro = h.matrix().frobenius();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= f64::EPSILON * fro || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[p * n + q];
                let r = b.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = b / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;

                let g00 = c(cs, 0.0);
                let g01 = c(sn, 0.0);
                let g10 = phase.conj() * (-sn);
                let g11 = phase.conj() * cs;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * g00 + akq * g10;
                    a[k * n + q] = akp * g01 + akq * g11;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = g00.conj() * apk + g10.conj() * aqk;
                    a[q * n + k] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[p * n + q] = c(0.0, 0.0);
                a[q * n + p] = c(0.0, 0.0);
                a[p * n + p] = c(app - t * r, 0.0);
                a[q * n + q] = c(aqq + t * r, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g00 + vkq * g10;
                    v[(k, q)] = vkp * g01 + vkq * g11;
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a, n);
        if off > f64::EPSILON * fro {
            return Err(Error::NumericalFailure { residual: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = CMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(EigenDecomp { values, vectors })
}

/// Eigenvalues at or below this level (relative to the spectral radius) are
/// rounding residue from a rank-deficient input and are treated as zero.
fn dust_floor(n: usize, scale: f64) -> f64 {
    16.0 * n as f64 * f64::EPSILON * scale
}

/// Applies `f` to the spectrum of a PSD matrix after clipping tolerated
/// negative dust.
fn psd_spectral_map(ed: &EigenDecomp, f: impl Fn(f64) -> f64) -> Result<HermMatrix> {
    let scale = ed.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = dust_floor(ed.values.len(), scale);
    let mut mapped = Vec::with_capacity(ed.values.len());
    for &lam in &ed.values {
        if lam < -PSD_TOLERANCE {
            return Err(Error::NotPsd { eigenvalue: lam });
        }
        mapped.push(if lam <= floor { 0.0 } else { f(lam) });
    }
    Ok(HermMatrix::from_spectrum(&mapped, &ed.vectors))
}

/// Principal square root of a positive semidefinite matrix.
pub fn mat_sqrt_psd(p: &HermMatrix) -> Result<HermMatrix> {
    psd_spectral_map(&eig_hermitian(p)?, f64::sqrt)
}

/// [`mat_sqrt_psd`] from an already computed eigendecomposition.
pub fn sqrt_from_eig(ed: &EigenDecomp) -> Result<HermMatrix> {
    psd_spectral_map(ed, f64::sqrt)
}

/// `tr √P` for PSD `P`, with the same clipping rules as [`mat_sqrt_psd`].
pub fn trace_sqrt_psd(p: &HermMatrix) -> Result<f64> {
    let ed = eig_hermitian(p)?;
    let scale = ed.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = dust_floor(p.dim(), scale);
    let mut acc = 0.0;
    for &lam in &ed.values {
        if lam < -PSD_TOLERANCE {
            return Err(Error::NotPsd { eigenvalue: lam });
        }
        if lam > floor {
            acc += lam.sqrt();
        }
    }
    Ok(acc)
}

/// `|M| = √(M†M)`.
pub fn mat_abs(m: &CMatrix) -> Result<HermMatrix> {
    let gram = HermMatrix::hermitize(&m.adjoint() * m);
    mat_sqrt_psd(&gram)
}

/// Singular values in descending order, by one-sided Jacobi on the columns.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    // column-major working copy
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| m.column(j)).collect();
    let scale = m.frobenius();
    let mut converged = scale == 0.0;
    let mut worst = 0.0_f64;

    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        worst = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha: f64 = cols[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g == 0.0 {
                    continue;
                }
                let rel = g / (alpha * beta).sqrt();
                worst = worst.max(rel);
                if rel <= f64::EPSILON {
                    continue;
                }
                rotated = true;
                // rotate column j by the pivot phase so the pair is real
                let phase = gamma / g;
                for z in cols[j].iter_mut() {
                    *z *= phase.conj();
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (lo, hi) = cols.split_at_mut(j);
                for (ui, uj) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                    (*ui, *uj) = (*ui * cs - *uj * sn, *ui * sn + *uj * cs);
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure { residual: worst });
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Schatten 1-norm (trace norm), the sum of singular values.
pub fn schatten1(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Trace norm of a Hermitian matrix, `Σ|λ_i|`.
pub fn schatten1_hermitian(h: &HermMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.values.iter().map(|x| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::*;

    fn pauli_x() -> HermMatrix {
        HermMatrix::new(CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()).unwrap()
    }

    #[test]
    fn eig_of_diagonal() {
        let ed = eig_hermitian(&HermMatrix::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(ed.values, vec![3.0, 1.0]);
        assert!((ed.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((ed.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_of_pauli_x() {
        let ed = eig_hermitian(&pauli_x()).unwrap();
        assert!((ed.values[0] - 1.0).abs() < 1e-14);
        assert!((ed.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut r = rng(7);
        for n in [1, 2, 3, 6, 9, 16] {
            let h = random_hermitian(n, &mut r);
            let ed = eig_hermitian(&h).unwrap();
            let vv = &ed.vectors.adjoint() * &ed.vectors;
            assert!(vv.max_abs_diff(&CMatrix::identity(n)) < 1e-10, "n={n}");
            assert!(ed.reconstruct().matrix().max_abs_diff(h.matrix()) < 1e-10, "n={n}");
            assert!(ed.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetry() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(HermMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_examples() {
        let s = mat_sqrt_psd(&HermMatrix::diag(&[4.0, 1.0])).unwrap();
        assert!(s.matrix().max_abs_diff(&CMatrix::diag(&[2.0, 1.0])) < 1e-14);

        let half = HermMatrix::diag(&[0.5, 0.5, 0.5]);
        let s = mat_sqrt_psd(&half).unwrap();
        let expect = CMatrix::identity(3).scale(0.5_f64.sqrt());
        assert!(s.matrix().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn sqrt_squares_back_and_commutes() {
        let mut r = rng(11);
        for n in [2, 4, 7] {
            let p = random_psd(n, &mut r);
            let s = mat_sqrt_psd(&p).unwrap();
            let ss = s.matrix() * s.matrix();
            assert!(ss.max_abs_diff(p.matrix()) < 1e-9);
            let comm = &(s.matrix() * p.matrix()) - &(p.matrix() * s.matrix());
            assert!(comm.max_abs() < 1e-9);
            assert!(s.min_eigenvalue().unwrap() >= 0.0);
        }
    }

    #[test]
    fn sqrt_rejects_negative_eigenvalue() {
        let err = mat_sqrt_psd(&HermMatrix::diag(&[1.0, -1e-6])).unwrap_err();
        assert_eq!(err, Error::NotPsd { eigenvalue: -1e-6 });
        // tolerated dust is clipped
        let s = mat_sqrt_psd(&HermMatrix::diag(&[1.0, -1e-11])).unwrap();
        assert_eq!(s.matrix()[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn abs_examples() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let a = mat_abs(&m).unwrap();
        assert!(a.matrix().max_abs_diff(&CMatrix::diag(&[0.0, 1.0])) < 1e-15);

        // a unitary: Hadamard times a phase gate
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_rows(vec![vec![c(h, 0.0), c(0.0, h)], vec![c(h, 0.0), c(0.0, -h)]]).unwrap();
        let a = mat_abs(&u).unwrap();
        assert!(a.matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn abs_of_product_ignores_left_polar_factor() {
        // |M·N| = | |M|·N |
        let mut r = rng(3);
        for _ in 0..20 {
            let m = random_matrix(4, &mut r);
            let n = random_matrix(4, &mut r);
            let lhs = mat_abs(&(&m * &n)).unwrap();
            let rhs = mat_abs(&(mat_abs(&m).unwrap().matrix() * &n)).unwrap();
            assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-9);
        }
    }

    #[test]
    fn schatten1_examples() {
        assert!((schatten1(pauli_x().matrix()).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(schatten1(&CMatrix::zeros(3)).unwrap(), 0.0);
        let rank_one = CMatrix::outer(&[c(3.0, 0.0), c(0.0, 4.0)], &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((schatten1(&rank_one).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn schatten1_of_product_matches_abs_form() {
        let mut r = rng(5);
        for _ in 0..20 {
            let m = random_matrix(4, &mut r);
            let n = random_matrix(4, &mut r);
            let lhs = schatten1(&(&m * &n)).unwrap();
            let abs_m = mat_abs(&m).unwrap();
            let abs_nd = mat_abs(&n.adjoint()).unwrap();
            let rhs = schatten1(&(abs_m.matrix() * abs_nd.matrix())).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn schatten1_agrees_with_trace_of_abs_and_adjoint() {
        let mut r = rng(9);
        for n in [2, 3, 5, 8] {
            let m = random_matrix(n, &mut r);
            let s = schatten1(&m).unwrap();
            assert!((s - mat_abs(&m).unwrap().trace()).abs() < 1e-9);
            assert!((s - schatten1(&m.adjoint()).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_values_keep_small_values_accurate() {
        // diag(1, 1e-12) rotated by a unitary; sqrt of eigenvalues of M†M
        // could not resolve the second value.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_rows(vec![vec![c(h, 0.0), c(0.0, h)], vec![c(h, 0.0), c(0.0, -h)]]).unwrap();
        let m = &u * &CMatrix::diag(&[1.0, 1e-12]);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-15);
        assert!((sv[1] - 1e-12).abs() < 1e-15);
    }

    #[test]
    fn hermitian_trace_norm_matches_general() {
        let mut r = rng(13);
        let h = random_hermitian(6, &mut r);
        let a = schatten1_hermitian(&h).unwrap();
        let b = schatten1(h.matrix()).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn eig_residual_small(seed in any::<u64>(), n in 1usize..=16) {
                let h = random_hermitian(n, &mut rng(seed));
                let ed = eig_hermitian(&h).unwrap();
                prop_assert!(ed.reconstruct().matrix().max_abs_diff(h.matrix()) <= 1e-10);
            }

            #[test]
            fn trace_norm_triangle(seed in any::<u64>(), n in 1usize..=6) {
                let mut r = rng(seed);
                let a = random_matrix(n, &mut r);
                let b = random_matrix(n, &mut r);
                let lhs = schatten1(&(&a + &b)).unwrap();
                let rhs = schatten1(&a).unwrap() + schatten1(&b).unwrap();
                prop_assert!(lhs <= rhs + 1e-9);
            }

            #[test]
            fn matrix_cauchy_schwarz(seed in any::<u64>(), n in 1usize..=6) {
                let mut r = rng(seed);
                let a = random_matrix(n, &mut r);
                let b = random_matrix(n, &mut r);
                let lhs = schatten1(&(&a * &b)).unwrap().powi(2);
                let rhs = a.frobenius().powi(2) * b.frobenius().powi(2);
                prop_assert!(lhs <= rhs + 1e-9);
            }
        }
    }
}
