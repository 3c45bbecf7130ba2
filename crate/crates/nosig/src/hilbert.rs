//! Dense complex linear algebra over small finite-dimensional Hilbert spaces.
//!
//! Everything is stored densely in row-major order. Target dimensions stay
//! at desk scale (≤ 64), so the Hermitian eigensolver is a cyclic Jacobi
//! iteration: slow in the asymptotic sense, but fully deterministic and
//! accurate to near machine precision, which the reproducibility contract
//! of this crate depends on.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex number with `f64` components.
pub type C64 = Complex<f64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Components below this magnitude count as zero when fixing eigenvector
/// phases.
const PHASE_EPS: f64 = 1e-12;

/// Eigenvalue gap below which two eigenvalues belong to one degenerate
/// cluster and their eigenvectors are re-orthonormalized together.
const DEGENERACY_GAP: f64 = 1e-9;

/// Complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    data: Vec<C64>,
}

impl CVector {
    /// Build a vector from its amplitudes.
    pub fn new(data: Vec<C64>) -> Self {
        assert!(!data.is_empty(), "vector dimension must be at least 1");
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![ZERO; dim])
    }

    /// Standard basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut data = vec![ZERO; dim];
        data[index] = ONE;
        Self { data }
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize) -> C64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, value: C64) {
        self.data[i] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Outer product |self⟩⟨other|.
    pub fn outer(&self, other: &CVector) -> CMatrix {
        let rows = self.dim();
        let cols = other.dim();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(self.data[i] * other.data[j].conj());
            }
        }
        CMatrix::new(rows, cols, data)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::new(self.data.iter().map(|c| c * factor).collect())
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    pub fn conjugated(&self) -> Self {
        Self::new(self.data.iter().map(|c| c.conj()).collect())
    }

    /// Multiply by the phase making the first component of magnitude above
    /// `1e-12` real positive. Leaves (near-)zero vectors untouched.
    pub fn phase_fixed(&self) -> Self {
        for c in &self.data {
            if c.norm() > PHASE_EPS {
                return self.scaled(c.conj() / c.norm());
            }
        }
        self.clone()
    }

    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim(), "vector addition dimension mismatch");
        CVector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, other: &CVector) -> CVector {
        assert_eq!(self.dim(), other.dim(), "vector subtraction dimension mismatch");
        CVector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "entry count must equal rows × cols");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ONE);
        }
        m
    }

    /// Row-major matrix from real entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&r| C64::new(r, 0.0)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn column(&self, col: usize) -> CVector {
        CVector::new((0..self.rows).map(|i| self.get(i, col)).collect())
    }

    pub fn row(&self, row: usize) -> CVector {
        CVector::new(self.data[row * self.cols..(row + 1) * self.cols].to_vec())
    }

    /// Square matrix with the given columns.
    pub fn from_columns(columns: &[CVector]) -> Self {
        assert!(!columns.is_empty());
        let rows = columns[0].dim();
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.dim(), rows, "column length mismatch");
            for i in 0..rows {
                m.set(i, j, col.get(i));
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().map(|c| c * factor).collect(),
        )
    }

    pub fn matvec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matvec dimension mismatch");
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut sum = ZERO;
            for j in 0..self.cols {
                sum += self.get(i, j) * v.get(j);
            }
            out.push(sum);
        }
        CVector::new(out)
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |a_ij − (a†)_ij| over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..=i {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    /// (a + a†)/2, exactly Hermitian.
    pub fn hermitized(&self) -> Self {
        assert!(self.is_square());
        let adj = self.adjoint();
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, (self.get(i, j) + adj.get(i, j)).scale(0.5));
            }
        }
        // force an exactly real diagonal and conjugate-symmetric pairs
        for i in 0..self.rows {
            let d = out.get(i, i);
            out.set(i, i, C64::new(d.re, 0.0));
            for j in 0..i {
                let v = out.get(i, j);
                out.set(j, i, v.conj());
            }
        }
        out
    }

    /// max |(u†u − I)_ij|.
    pub fn unitarity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let gram = self.adjoint().matmul(self);
        gram.max_abs_diff(&CMatrix::identity(self.rows))
    }

    /// Partial trace over the second tensor factor, with the row-major
    /// Kronecker index convention `(i·dim_b + k)` used throughout.
    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> CMatrix {
        assert!(self.is_square());
        assert_eq!(self.rows, dim_a * dim_b, "partial trace dimension mismatch");
        let mut out = CMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let mut sum = ZERO;
                for k in 0..dim_b {
                    sum += self.get(i * dim_b + k, j * dim_b + k);
                }
                out.set(i, j, sum);
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, other: &CMatrix) -> CMatrix {
        self.matmul(other)
    }
}

/// Kronecker product of two vectors: entry `i·dim(b) + j` is `aᵢ·bⱼ`.
///
/// This index order is fixed for the whole crate; the partial trace and all
/// bipartite constructions assume it.
pub fn tensor_product(a: &CVector, b: &CVector) -> CVector {
    let mut data = Vec::with_capacity(a.dim() * b.dim());
    for x in a.entries() {
        for y in b.entries() {
            data.push(x * y);
        }
    }
    CVector::new(data)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenResult {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose column `k` is the eigenvector for
    /// `eigenvalues[k]`, phase-fixed so its first component of magnitude
    /// above `1e-12` is real positive.
    pub eigenvectors: CMatrix,
}

impl HermitianEigenResult {
    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k)
    }

    /// Σₖ λₖ |vₖ⟩⟨vₖ|.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            let v = self.eigenvector(k);
            let proj = v.outer(&v).scaled(C64::new(self.eigenvalues[k], 0.0));
            out = &out + &proj;
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Deterministic for a fixed input: sweeps run in a fixed order, ascending
/// eigenvalue sort ties are broken by the pre-sort position, eigenvectors
/// inside a degenerate cluster (gap < 1e-9) are re-orthonormalized by a
/// Gram–Schmidt pass in sorted order, and every eigenvector gets the fixed
/// phase convention.
pub fn hermitian_eig(h: &CMatrix) -> Result<HermitianEigenResult> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            left: h.rows(),
            right: h.cols(),
        });
    }
    let dev = h.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = h.rows();
    let mut a = h.hermitized();
    let mut v = CMatrix::identity(n);

    let scale = a.max_abs();
    if scale > 0.0 {
        let off_tol = scale * 1e-15;
        let skip_tol = scale * 1e-18;
        for _sweep in 0..60 {
            let mut off_max: f64 = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off_max = off_max.max(a.get(p, q).norm());
                }
            }
            if off_max <= off_tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b = a.get(p, q);
                    let mag = b.norm();
                    if mag <= skip_tol {
                        continue;
                    }
                    let phase = b / mag;
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let tau = (aqq - app) / (2.0 * mag);
                    let t = if tau == 0.0 {
                        1.0
                    } else {
                        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // plane rotation U: U_pp = c·phase, U_pq = s·phase,
                    // U_qp = −s, U_qq = c; a ← U†aU, v ← vU
                    let upp = phase.scale(c);
                    let upq = phase.scale(s);
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let aip = a.get(i, p);
                        let aiq = a.get(i, q);
                        let new_p = aip * upp - aiq.scale(s);
                        let new_q = aip * upq + aiq.scale(c);
                        a.set(i, p, new_p);
                        a.set(i, q, new_q);
                        a.set(p, i, new_p.conj());
                        a.set(q, i, new_q.conj());
                    }
                    a.set(p, p, C64::new(app - t * mag, 0.0));
                    a.set(q, q, C64::new(aqq + t * mag, 0.0));
                    a.set(p, q, ZERO);
                    a.set(q, p, ZERO);
                    for i in 0..n {
                        let vip = v.get(i, p);
                        let viq = v.get(i, q);
                        v.set(i, p, vip * upp - viq.scale(s));
                        v.set(i, q, vip * upq + viq.scale(c));
                    }
                }
            }
        }
    }

    // ascending sort, stable in the pre-sort column order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut columns: Vec<CVector> = order.iter().map(|&i| v.column(i)).collect();

    // re-orthonormalize degenerate clusters in sorted order
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            for k in start..end {
                let mut w = columns[k].clone();
                for prev in &columns[start..k] {
                    let coeff = prev.inner(&w);
                    w = &w - &prev.scaled(coeff);
                }
                columns[k] = w.normalized();
            }
        }
        start = end;
    }

    for col in &mut columns {
        *col = col.phase_fixed();
    }

    Ok(HermitianEigenResult {
        eigenvalues,
        eigenvectors: CMatrix::from_columns(&columns),
    })
}

/// Residual norm below which a Gram–Schmidt candidate is considered
/// dependent and skipped during unitary completion.
const COMPLETION_RESIDUAL: f64 = 1e-8;

/// max deviation of the Gram matrix from the identity.
pub fn orthonormality_deviation(vectors: &[CVector]) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((a.inner(b) - C64::new(expected, 0.0)).norm());
        }
    }
    dev
}

pub(crate) fn complete_columns(
    columns: &[CVector],
    target_dim: usize,
    ortho_tol: f64,
) -> Result<CMatrix> {
    if columns.len() > target_dim {
        return Err(Error::TooManyColumns {
            given: columns.len(),
            target: target_dim,
        });
    }
    for a in columns {
        if a.dim() != target_dim {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: target_dim,
            });
        }
    }
    let dev = orthonormality_deviation(columns);
    if dev > ortho_tol {
        return Err(Error::NotOrthonormal { deviation: dev });
    }

    let mut out: Vec<CVector> = columns.to_vec();
    for k in 0..target_dim {
        if out.len() == target_dim {
            break;
        }
        let candidate = CVector::basis(target_dim, k);
        let mut w = candidate.clone();
        for col in &out {
            let coeff = col.inner(&w);
            w = &w - &col.scaled(coeff);
        }
        if w.norm() < COMPLETION_RESIDUAL {
            continue;
        }
        // second pass removes the rounding left by the first
        for col in &out {
            let coeff = col.inner(&w);
            w = &w - &col.scaled(coeff);
        }
        out.push(w.normalized());
    }
    debug_assert_eq!(out.len(), target_dim);
    Ok(CMatrix::from_columns(&out))
}

/// Extend pairwise-orthonormal columns to a full unitary whose first
/// `columns.len()` columns are the inputs, filling the rest by a
/// deterministic Gram–Schmidt sweep over the standard basis.
pub fn complete_to_unitary(columns: &[CVector], target_dim: usize) -> Result<CMatrix> {
    complete_columns(columns, target_dim, 1e-10)
}

/// Trace distance ½·Σ|eig(r1 − r2)| between two Hermitian matrices.
///
/// The difference is sign-canonicalized before diagonalizing, so swapping
/// the arguments runs the identical floating-point path and symmetry
/// holds bit for bit.
pub fn trace_distance(r1: &CMatrix, r2: &CMatrix) -> Result<f64> {
    if !r1.is_square() || !r2.is_square() || r1.rows() != r2.rows() {
        return Err(Error::DimensionMismatch {
            left: r1.rows(),
            right: r2.rows(),
        });
    }
    let diff = r1 - r2;
    let dev = diff.hermiticity_deviation();
    if dev > 2e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let mut diff = diff.hermitized();
    for entry in diff.entries() {
        if entry.re != 0.0 || entry.im != 0.0 {
            if entry.re < 0.0 || (entry.re == 0.0 && entry.im < 0.0) {
                diff = diff.scaled(C64::new(-1.0, 0.0));
            }
            break;
        }
    }
    let eig = hermitian_eig(&diff)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Haar-distributed random unitary: QR of a complex Gaussian matrix with
/// the R-diagonal phase fix.
///
/// The QR step is modified Gram–Schmidt, which makes the R diagonal real
/// positive, so the phase fix is the identity by construction; it is kept
/// explicit to pin the convention.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    assert!(dim > 0);
    loop {
        let mut cols: Vec<CVector> = (0..dim)
            .map(|_| {
                CVector::new(
                    (0..dim)
                        .map(|_| {
                            let re: f64 = rng.sample(StandardNormal);
                            let im: f64 = rng.sample(StandardNormal);
                            C64::new(re, im).scale(std::f64::consts::FRAC_1_SQRT_2)
                        })
                        .collect(),
                )
            })
            .collect();
        let mut ok = true;
        let mut r_diag = Vec::with_capacity(dim);
        for j in 0..dim {
            for i in 0..j {
                let coeff = cols[i].inner(&cols[j]);
                cols[j] = &cols[j] - &cols[i].scaled(coeff);
            }
            let r = cols[j].norm();
            if r < 1e-12 {
                ok = false; // almost-singular draw; take a fresh one
                break;
            }
            r_diag.push(r);
            cols[j] = cols[j].scaled(C64::new(1.0 / r, 0.0));
        }
        if !ok {
            continue;
        }
        for (j, r) in r_diag.iter().enumerate() {
            let phase = C64::new(r / r.abs(), 0.0);
            cols[j] = cols[j].scaled(phase);
        }
        return CMatrix::from_columns(&cols);
    }
}

/// Qubit basis states and Pauli matrices in the convention
/// `x± = (z+ ± z−)/√2`.
pub mod qubit {
    use super::{C64, CMatrix, CVector};

    pub fn z_plus() -> CVector {
        CVector::from_real(&[1.0, 0.0])
    }

    pub fn z_minus() -> CVector {
        CVector::from_real(&[0.0, 1.0])
    }

    pub fn x_plus() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVector::from_real(&[s, s])
    }

    pub fn x_minus() -> CVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVector::from_real(&[s, -s])
    }

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::new(
            2,
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }
}
