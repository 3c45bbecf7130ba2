//! Ensembles of unnormalized state vectors and their density matrices.
//!
//! The unnormalized convention is used throughout: a state's squared norm
//! is its probability in the mixture, so an ensemble is just a list of
//! vectors whose squared norms sum to one. Two ensembles are equivalent
//! when they build the same density matrix, and the mixing matrix encodes
//! how any ensemble relates to the spectral one.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{
    complete_columns, haar_unitary, hermitian_eig, C64, CMatrix, CVector,
};

/// Squared norm below which a state counts as null and is dropped.
pub const NULL_WEIGHT: f64 = 1e-14;

/// Eigenvalues at or below this cutoff are treated as zero rank.
pub const RANK_CUTOFF: f64 = 1e-12;

/// One unnormalized member of an ensemble; its squared norm is its
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedState {
    vector: CVector,
}

impl WeightedState {
    pub fn new(vector: CVector) -> Result<Self> {
        let w = vector.norm_sqr();
        if w < NULL_WEIGHT {
            return Err(Error::EmptyEnsemble);
        }
        if w > 1.0 + 1e-10 {
            return Err(Error::BadTotalWeight { total: w });
        }
        Ok(Self { vector })
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn weight(&self) -> f64 {
        self.vector.norm_sqr()
    }

    /// The normalized state carried by this member.
    pub fn unit(&self) -> CVector {
        self.vector.normalized()
    }
}

/// A finite mixture of states over one Hilbert space, total probability 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    states: Vec<WeightedState>,
}

impl Ensemble {
    /// Build from unnormalized vectors whose squared norms sum to 1
    /// within 1e-10.
    pub fn from_unnormalized(vectors: Vec<CVector>) -> Result<Self> {
        Self::with_weight_tolerance(vectors, 1e-10)
    }

    /// Converter from the (probability, unit vector) convention; stores
    /// `√dᵢ·|ψᵢ⟩`.
    pub fn from_normalized(pairs: Vec<(f64, CVector)>) -> Result<Self> {
        let vectors = pairs
            .into_iter()
            .map(|(d, v)| {
                if d <= 0.0 {
                    return Err(Error::EmptyEnsemble);
                }
                Ok(v.normalized().scaled(C64::new(d.sqrt(), 0.0)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_unnormalized(vectors)
    }

    pub(crate) fn with_weight_tolerance(vectors: Vec<CVector>, tol: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let dim = vectors[0].dim();
        let mut states = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: v.dim(),
                    right: dim,
                });
            }
            states.push(WeightedState::new(v)?);
        }
        let total: f64 = states.iter().map(|s| s.weight()).sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::BadTotalWeight { total });
        }
        Ok(Self { dim, states })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[WeightedState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &WeightedState {
        &self.states[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.states.iter().map(|s| s.weight()).sum()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validate and store; the matrix is Hermitized exactly so downstream
    /// eigendecompositions never fail.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::checked(matrix, 1e-10, 1e-10)
    }

    /// Looser validation for numerically produced matrices (integrators,
    /// trajectory averages): trace within 1e-8, eigenvalues ≥ −1e-8.
    pub(crate) fn relaxed(matrix: CMatrix) -> Result<Self> {
        Self::checked(matrix, 1e-8, 1e-8)
    }

    fn checked(matrix: CMatrix, trace_tol: f64, positivity_floor: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::BadDensity {
                reason: format!("matrix is {}x{}, not square", matrix.rows(), matrix.cols()),
            });
        }
        let dev = matrix.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let matrix = matrix.hermitized();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > trace_tol {
            return Err(Error::BadDensity {
                reason: format!("trace is {tr}, not 1"),
            });
        }
        let eig = hermitian_eig(&matrix).expect("hermitized matrix");
        let min = eig.eigenvalues[0];
        if min < -positivity_floor {
            return Err(Error::BadDensity {
                reason: format!("minimum eigenvalue {min:.3e} is negative"),
            });
        }
        Ok(Self { matrix })
    }

    /// Projector onto the ray of `v` (normalized first).
    pub fn from_pure(v: &CVector) -> Self {
        let u = v.normalized();
        Self { matrix: u.outer(&u).hermitized() }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// ρ = Σᵢ |ψᵢ⟩⟨ψᵢ| over the ensemble's unnormalized states.
pub fn density_of(e: &Ensemble) -> DensityMatrix {
    let mut m = CMatrix::zeros(e.dim(), e.dim());
    for s in e.states() {
        m = &m + &s.vector().outer(s.vector());
    }
    DensityMatrix::relaxed(m).expect("ensemble density is Hermitian, unit-trace and PSD")
}

/// True when the two ensembles build the same density matrix within
/// `tol` in max-abs entry difference.
pub fn equivalent(e1: &Ensemble, e2: &Ensemble, tol: f64) -> Result<bool> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            left: e1.dim(),
            right: e2.dim(),
        });
    }
    let d1 = density_of(e1);
    let d2 = density_of(e2);
    Ok(d1.matrix().max_abs_diff(d2.matrix()) <= tol)
}

/// The orthogonal decomposition ρ = Σᵢ |χᵢ⟩⟨χᵢ| with ⟨χᵢ|χⱼ⟩ = λᵢδᵢⱼ.
#[derive(Debug, Clone)]
pub struct SpectralEnsemble {
    dim: usize,
    chis: Vec<CVector>,
    lambdas: Vec<f64>,
}

impl SpectralEnsemble {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of retained (nonzero) eigenvalues.
    pub fn rank(&self) -> usize {
        self.chis.len()
    }

    pub fn chis(&self) -> &[CVector] {
        &self.chis
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Σᵢ |χᵢ⟩⟨χᵢ|.
    pub fn density(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for chi in &self.chis {
            m = &m + &chi.outer(chi);
        }
        m
    }

    /// The spectral decomposition viewed as an ordinary ensemble.
    pub fn to_ensemble(&self) -> Ensemble {
        Ensemble::with_weight_tolerance(self.chis.clone(), 1e-8)
            .expect("spectral weights sum to the trace")
    }
}

/// Spectral decomposition of a density matrix with the crate's fixed
/// ordering and phase conventions; eigenvalues at or below 1e-12 are
/// dropped.
pub fn spectral_ensemble(rho: &DensityMatrix) -> SpectralEnsemble {
    let eig = hermitian_eig(rho.matrix()).expect("density matrices are Hermitian");
    let mut chis = Vec::new();
    let mut lambdas = Vec::new();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > RANK_CUTOFF {
            chis.push(eig.eigenvector(k).scaled(C64::new(l.sqrt(), 0.0)));
            lambdas.push(l);
        }
    }
    SpectralEnsemble {
        dim: rho.dim(),
        chis,
        lambdas,
    }
}

/// The coefficient matrix `m` relating an ensemble to the spectral one,
/// plus its completion `M` to a square unitary.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    /// `nψ × n`: entry (i, k) is ⟨χₖ|ψᵢ⟩/λₖ.
    pub m: CMatrix,
    /// `nψ × nψ` unitary whose first n columns equal the columns of `m`.
    pub padded_unitary: CMatrix,
}

/// Coefficients of each ensemble member over the spectral vectors.
///
/// The columns of `m` come out orthonormal exactly when the ensemble
/// reproduces the spectral density matrix, which is checked within 1e-9
/// before anything else.
pub fn mixing_matrix(e: &Ensemble, s: &SpectralEnsemble) -> Result<MixingMatrix> {
    if e.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: s.dim(),
        });
    }
    let deviation = density_of(e).matrix().max_abs_diff(&s.density());
    if deviation > 1e-9 {
        return Err(Error::NotSameDensity { deviation });
    }
    let m = coefficients_over(&states_of(e), s);
    let cols: Vec<CVector> = (0..m.cols()).map(|k| m.column(k)).collect();
    let padded_unitary = complete_columns(&cols, e.len(), 1e-8)?;
    Ok(MixingMatrix { m, padded_unitary })
}

fn states_of(e: &Ensemble) -> Vec<CVector> {
    e.states().iter().map(|s| s.vector().clone()).collect()
}

/// mᵢₖ = ⟨χₖ|ψᵢ⟩/λₖ for an arbitrary list of vectors (zero rows allowed,
/// which is what the null padding in the purification construction uses).
pub(crate) fn coefficients_over(states: &[CVector], s: &SpectralEnsemble) -> CMatrix {
    let mut m = CMatrix::zeros(states.len(), s.rank());
    for (i, psi) in states.iter().enumerate() {
        for (k, chi) in s.chis().iter().enumerate() {
            m.set(i, k, chi.inner(psi) / Complex::new(s.lambdas()[k], 0.0));
        }
    }
    m
}

/// ψᵢ = Σⱼ uᵢⱼ χⱼ with the spectral list padded by null vectors up to the
/// size of `u`; outputs with squared norm below 1e-14 are dropped.
pub fn apply_mixing(s: &SpectralEnsemble, u: &CMatrix) -> Result<Ensemble> {
    if !u.is_square() || u.rows() < s.rank() {
        return Err(Error::DimensionMismatch {
            left: u.rows(),
            right: s.rank(),
        });
    }
    let deviation = u.unitarity_deviation();
    if deviation > 1e-9 {
        return Err(Error::NotUnitary { deviation });
    }
    let n = u.rows();
    let mut out = Vec::new();
    for i in 0..n {
        let mut psi = CVector::zeros(s.dim());
        for (j, chi) in s.chis().iter().enumerate() {
            psi = &psi + &chi.scaled(u.get(i, j));
        }
        if psi.norm_sqr() >= NULL_WEIGHT {
            out.push(psi);
        }
    }
    Ensemble::with_weight_tolerance(out, 1e-8)
}

/// A fresh equivalent decomposition of `rho` with `size` members, built
/// by pushing the spectral ensemble through a Haar-random unitary.
pub fn random_equivalent_ensemble<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    size: usize,
    rng: &mut R,
) -> Result<Ensemble> {
    let s = spectral_ensemble(rho);
    if size < s.rank() {
        return Err(Error::SizeTooSmall {
            size,
            rank: s.rank(),
        });
    }
    let u = haar_unitary(size, rng);
    apply_mixing(&s, &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::qubit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn z_halves() -> Ensemble {
        Ensemble::from_unnormalized(vec![
            qubit::z_plus().scaled(C64::new(INV_SQRT_2, 0.0)),
            qubit::z_minus().scaled(C64::new(INV_SQRT_2, 0.0)),
        ])
        .unwrap()
    }

    fn x_halves() -> Ensemble {
        Ensemble::from_unnormalized(vec![
            qubit::x_plus().scaled(C64::new(INV_SQRT_2, 0.0)),
            qubit::x_minus().scaled(C64::new(INV_SQRT_2, 0.0)),
        ])
        .unwrap()
    }

    fn half_identity() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5])
    }

    #[test]
    fn density_of_pure_state() {
        let e = Ensemble::from_unnormalized(vec![qubit::z_plus()]).unwrap();
        let rho = density_of(&e);
        assert!(rho.matrix().max_abs_diff(&CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn density_of_z_and_x_halves_is_half_identity() {
        assert!(density_of(&z_halves()).matrix().max_abs_diff(&half_identity()) < 1e-15);
        assert!(density_of(&x_halves()).matrix().max_abs_diff(&half_identity()) < 1e-15);
    }

    #[test]
    fn equivalence_of_z_and_x_halves() {
        assert!(equivalent(&z_halves(), &x_halves(), 1e-12).unwrap());
        assert!(equivalent(&z_halves(), &z_halves(), 0.0).unwrap());
        let zp = Ensemble::from_unnormalized(vec![qubit::z_plus()]).unwrap();
        let xp = Ensemble::from_unnormalized(vec![qubit::x_plus()]).unwrap();
        assert!(!equivalent(&zp, &xp, 1e-9).unwrap());
    }

    #[test]
    fn ensemble_rejects_bad_total_weight() {
        let r = Ensemble::from_unnormalized(vec![qubit::z_plus(), qubit::z_minus()]);
        assert!(matches!(r, Err(Error::BadTotalWeight { .. })));
        assert!(matches!(
            Ensemble::from_unnormalized(vec![]),
            Err(Error::EmptyEnsemble)
        ));
        assert!(matches!(
            Ensemble::from_unnormalized(vec![CVector::zeros(2)]),
            Err(Error::EmptyEnsemble)
        ));
    }

    #[test]
    fn normalized_converter_stores_scaled_vectors() {
        let e = Ensemble::from_normalized(vec![
            (0.5, qubit::z_plus()),
            (0.5, qubit::z_minus()),
        ])
        .unwrap();
        assert!((e.state(0).weight() - 0.5).abs() < 1e-15);
        assert!(equivalent(&e, &z_halves(), 1e-12).unwrap());
    }

    #[test]
    fn spectral_of_half_identity() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let s = spectral_ensemble(&rho);
        assert_eq!(s.rank(), 2);
        assert!((s.lambdas()[0] - 0.5).abs() < 1e-14);
        assert!(s.chis()[0].max_abs_diff(&CVector::from_real(&[INV_SQRT_2, 0.0])) < 1e-12);
        assert!(s.chis()[1].max_abs_diff(&CVector::from_real(&[0.0, INV_SQRT_2])) < 1e-12);
    }

    #[test]
    fn spectral_of_pure_state_has_rank_one() {
        let rho = DensityMatrix::from_pure(&qubit::z_plus());
        let s = spectral_ensemble(&rho);
        assert_eq!(s.rank(), 1);
        assert!((s.lambdas()[0] - 1.0).abs() < 1e-12);
        assert!(s.chis()[0].max_abs_diff(&qubit::z_plus()) < 1e-12);
    }

    #[test]
    fn spectral_of_figure_three_final_density() {
        // eigenvalues from the 2×2 closed form (tr ± sqrt(tr²−4det))/2
        let rho = DensityMatrix::new(CMatrix::from_real(2, 2, &[0.75, 0.25, 0.25, 0.25])).unwrap();
        let s = spectral_ensemble(&rho);
        assert_eq!(s.rank(), 2);
        assert!((s.lambdas()[0] - 0.14644660940672624).abs() < 1e-13);
        assert!((s.lambdas()[1] - 0.8535533905932737).abs() < 1e-13);
        for (k, chi) in s.chis().iter().enumerate() {
            assert!((chi.norm_sqr() - s.lambdas()[k]).abs() < 1e-13);
        }
        assert!(s.density().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn mixing_matrix_of_x_halves_over_z_spectral() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let s = spectral_ensemble(&rho);
        let mm = mixing_matrix(&x_halves(), &s).unwrap();
        let expected = CMatrix::from_real(
            2,
            2,
            &[INV_SQRT_2, INV_SQRT_2, INV_SQRT_2, -INV_SQRT_2],
        );
        assert!(mm.m.max_abs_diff(&expected) < 1e-12);
        assert!(mm.padded_unitary.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn mixing_matrix_of_spectral_is_identity() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let s = spectral_ensemble(&rho);
        let mm = mixing_matrix(&s.to_ensemble(), &s).unwrap();
        assert!(mm.m.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        let mm = mixing_matrix(&z_halves(), &s).unwrap();
        assert!(mm.m.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn mixing_matrix_rejects_different_density() {
        let rho = DensityMatrix::from_pure(&qubit::z_plus());
        let s = spectral_ensemble(&rho);
        assert!(matches!(
            mixing_matrix(&x_halves(), &s),
            Err(Error::NotSameDensity { .. })
        ));
    }

    #[test]
    fn apply_mixing_round_trips_the_hadamard_example() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let s = spectral_ensemble(&rho);
        let id = apply_mixing(&s, &CMatrix::identity(2)).unwrap();
        for (a, b) in id.states().iter().zip(s.chis()) {
            assert!(a.vector().max_abs_diff(b) < 1e-15);
        }
        let u = CMatrix::from_real(
            2,
            2,
            &[INV_SQRT_2, INV_SQRT_2, INV_SQRT_2, -INV_SQRT_2],
        );
        let e = apply_mixing(&s, &u).unwrap();
        assert!(e.state(0).vector().max_abs_diff(&qubit::x_plus().scaled(C64::new(INV_SQRT_2, 0.0))) < 1e-12);
        assert!(e.state(1).vector().max_abs_diff(&qubit::x_minus().scaled(C64::new(INV_SQRT_2, 0.0))) < 1e-12);
    }

    #[test]
    fn apply_mixing_on_rank_one_gives_collinear_states() {
        let rho = DensityMatrix::from_pure(&qubit::z_plus());
        let s = spectral_ensemble(&rho);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let u = haar_unitary(2, &mut rng);
        let e = apply_mixing(&s, &u).unwrap();
        assert!(e.len() <= 2);
        assert!((e.total_weight() - 1.0).abs() < 1e-12);
        for st in e.states() {
            let u = st.unit();
            // collinear with z+ up to phase
            assert!((u.get(0).norm() - 1.0).abs() < 1e-12);
            assert!(u.get(1).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_mixing_rejects_non_unitary() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let s = spectral_ensemble(&rho);
        let u = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(apply_mixing(&s, &u), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn random_equivalent_ensemble_reproduces_density() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let e = random_equivalent_ensemble(&rho, 5, &mut rng).unwrap();
        assert_eq!(e.len(), 5);
        assert!(density_of(&e).matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn random_equivalent_ensemble_is_seed_deterministic() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let a = random_equivalent_ensemble(&rho, 5, &mut ChaCha12Rng::seed_from_u64(9)).unwrap();
        let b = random_equivalent_ensemble(&rho, 5, &mut ChaCha12Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_equivalent_ensemble_rejects_small_size() {
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(matches!(
            random_equivalent_ensemble(&rho, 1, &mut rng),
            Err(Error::SizeTooSmall { .. })
        ));
    }

    #[test]
    fn pure_rho_size_one_returns_the_eigenvector() {
        let rho = DensityMatrix::from_pure(&qubit::x_plus());
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let e = random_equivalent_ensemble(&rho, 1, &mut rng).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e.state(0).weight() - 1.0).abs() < 1e-12);
        assert!(e.state(0).unit().phase_fixed().max_abs_diff(&qubit::x_plus()) < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let not_psd = CMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]);
        assert!(DensityMatrix::new(not_psd).is_err());
        let skew = CMatrix::new(
            2,
            2,
            vec![
                C64::new(0.5, 0.0),
                C64::new(0.1, 0.1),
                C64::new(0.1, 0.1),
                C64::new(0.5, 0.0),
            ],
        );
        assert!(matches!(DensityMatrix::new(skew), Err(Error::NotHermitian { .. })));
    }
}
