//! Shared entangled states carrying equivalent ensembles.
//!
//! A purification is a unit vector |V⟩ in ℋ⊗𝒦 together with up to two
//! orthonormal bases of 𝒦. Measuring the first basis on the 𝒦 side
//! remotely prepares one ensemble on the ℋ side, measuring the second
//! prepares the other; both leave the reduced density matrix untouched.

use crate::ensemble::{
    coefficients_over, density_of, equivalent, spectral_ensemble, Ensemble, NULL_WEIGHT,
};
use crate::error::{Error, Result};
use crate::hilbert::{
    complete_columns, orthonormality_deviation, tensor_product, trace_distance, CMatrix, CVector,
};

/// A shared state |V⟩ ∈ ℋ⊗𝒦 with its measurement bases on 𝒦.
#[derive(Debug, Clone)]
pub struct Purification {
    v: CVector,
    alice_dim: usize,
    bob_dim: usize,
    alpha: Vec<CVector>,
    beta: Vec<CVector>,
}

impl Purification {
    /// Assemble a purification from parts, validating normalization and
    /// basis orthonormality (both bases may also be empty).
    pub fn new(
        v: CVector,
        alice_dim: usize,
        bob_dim: usize,
        alpha: Vec<CVector>,
        beta: Vec<CVector>,
    ) -> Result<Self> {
        if v.dim() != alice_dim * bob_dim {
            return Err(Error::DimensionMismatch {
                left: v.dim(),
                right: alice_dim * bob_dim,
            });
        }
        let norm = v.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::BadDensity {
                reason: format!("shared state has squared norm {norm}, not 1"),
            });
        }
        for basis in [&alpha, &beta] {
            if basis.is_empty() {
                continue;
            }
            if basis.iter().any(|b| b.dim() != bob_dim) {
                return Err(Error::BadBasis {
                    reason: "basis vector dimension differs from dim(K)".into(),
                });
            }
            let dev = orthonormality_deviation(basis);
            if dev > 1e-9 {
                return Err(Error::BadBasis {
                    reason: format!("basis is not orthonormal (deviation {dev:.3e})"),
                });
            }
        }
        Ok(Self {
            v,
            alice_dim,
            bob_dim,
            alpha,
            beta,
        })
    }

    pub fn vector(&self) -> &CVector {
        &self.v
    }

    pub fn alice_dim(&self) -> usize {
        self.alice_dim
    }

    pub fn bob_dim(&self) -> usize {
        self.bob_dim
    }

    pub fn alpha(&self) -> &[CVector] {
        &self.alpha
    }

    pub fn beta(&self) -> &[CVector] {
        &self.beta
    }

    /// Alice's reduced density matrix, the partial trace of |V⟩⟨V| over 𝒦.
    pub fn reduced_alice(&self) -> CMatrix {
        self.v
            .outer(&self.v)
            .partial_trace_second(self.alice_dim, self.bob_dim)
    }

    /// ‖V − Σᵢ ψᵢ⊗bᵢ‖ for a claimed expansion of the shared state.
    pub fn expansion_residual(&self, states: &[CVector], basis: &[CVector]) -> f64 {
        let mut rebuilt = CVector::zeros(self.v.dim());
        for (psi, b) in states.iter().zip(basis) {
            rebuilt = &rebuilt + &tensor_product(psi, b);
        }
        (&self.v - &rebuilt).norm()
    }
}

/// Zero-padded copy of the ensemble's vectors, length `n`.
fn padded_states(e: &Ensemble, n: usize) -> Vec<CVector> {
    let mut out: Vec<CVector> = e.states().iter().map(|s| s.vector().clone()).collect();
    while out.len() < n {
        out.push(CVector::zeros(e.dim()));
    }
    out
}

/// Core of the construction: V = Σₖ χₖ⊗aₖ over the spectral vectors of the
/// common density matrix, and one conjugated-row basis per ensemble.
fn build_purification(e1: &Ensemble, e2: Option<&Ensemble>) -> Result<Purification> {
    let bob_dim = e2.map_or(e1.len(), |e| e1.len().max(e.len()));
    let rho = density_of(e1);
    let s = spectral_ensemble(&rho);

    let mut v = CVector::zeros(e1.dim() * bob_dim);
    for (k, chi) in s.chis().iter().enumerate() {
        v = &v + &tensor_product(chi, &CVector::basis(bob_dim, k));
    }

    let basis_for = |e: &Ensemble| -> Result<Vec<CVector>> {
        let m = coefficients_over(&padded_states(e, bob_dim), &s);
        let cols: Vec<CVector> = (0..m.cols()).map(|k| m.column(k)).collect();
        let big_m = complete_columns(&cols, bob_dim, 1e-8)?;
        // |α_j⟩ = Σᵢ M†ᵢⱼ |aᵢ⟩, i.e. the conjugated j-th row of M
        Ok((0..bob_dim).map(|j| big_m.row(j).conjugated()).collect())
    };

    let alpha = basis_for(e1)?;
    let beta = match e2 {
        Some(e) => basis_for(e)?,
        None => Vec::new(),
    };
    Purification::new(v, e1.dim(), bob_dim, alpha, beta)
}

/// Purify a single ensemble: 𝒦 = ℂ^{nψ}, V = Σₖ χₖ⊗aₖ, and the α basis
/// satisfying V = Σⱼ ψⱼ⊗αⱼ. The β basis is left empty.
pub fn purify(e: &Ensemble) -> Purification {
    build_purification(e, None).expect("purification of a valid ensemble cannot fail")
}

/// One shared state expanding over both ensembles at once:
/// V = Σᵢ ψᵢ⊗αᵢ = Σᵢ φᵢ⊗βᵢ, with the shorter ensemble null-padded.
pub fn joint_purification(e1: &Ensemble, e2: &Ensemble) -> Result<Purification> {
    if !equivalent(e1, e2, 1e-9)? {
        let distance =
            trace_distance(density_of(e1).matrix(), density_of(e2).matrix())?;
        return Err(Error::NotEquivalent { distance });
    }
    build_purification(e1, Some(e2))
}

/// Alice's conditional ensemble after a measurement of `basis` on the 𝒦
/// side: ψᵢ = (I⊗⟨bᵢ|)|V⟩ with the Born-rule weight ⟨ψᵢ|ψᵢ⟩; zero-weight
/// outcomes are dropped.
pub fn remote_prepare(p: &Purification, basis: &[CVector]) -> Result<Ensemble> {
    if basis.len() != p.bob_dim() {
        return Err(Error::BadBasis {
            reason: format!(
                "basis has {} vectors but dim(K) = {}",
                basis.len(),
                p.bob_dim()
            ),
        });
    }
    if basis.iter().any(|b| b.dim() != p.bob_dim()) {
        return Err(Error::BadBasis {
            reason: "basis vector dimension differs from dim(K)".into(),
        });
    }
    let dev = orthonormality_deviation(basis);
    if dev > 1e-9 {
        return Err(Error::BadBasis {
            reason: format!("basis is not orthonormal (deviation {dev:.3e})"),
        });
    }

    let (da, db) = (p.alice_dim(), p.bob_dim());
    let mut prepared = Vec::new();
    for b in basis {
        let mut psi = CVector::zeros(da);
        for a in 0..da {
            let mut sum = num_complex::Complex::new(0.0, 0.0);
            for k in 0..db {
                sum += b.get(k).conj() * p.vector().get(a * db + k);
            }
            psi.set(a, sum);
        }
        if psi.norm_sqr() >= NULL_WEIGHT {
            prepared.push(psi);
        }
    }
    Ensemble::with_weight_tolerance(prepared, 1e-8)
}

/// A Hermitian observable written in its eigenbasis.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: CMatrix,
    basis: Vec<CVector>,
    labels: Vec<f64>,
}

impl Observable {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> &[CVector] {
        &self.basis
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// O = Σᵢ labelᵢ |bᵢ⟩⟨bᵢ| over an orthonormal basis with distinct outcome
/// labels.
pub fn bob_observable(basis: &[CVector], labels: &[f64]) -> Result<Observable> {
    if basis.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            left: basis.len(),
            right: labels.len(),
        });
    }
    if basis.is_empty() {
        return Err(Error::BadBasis {
            reason: "basis is empty".into(),
        });
    }
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            if labels[i] == labels[j] {
                return Err(Error::DuplicateLabels);
            }
        }
    }
    let dim = basis[0].dim();
    if basis.iter().any(|b| b.dim() != dim) {
        return Err(Error::BadBasis {
            reason: "basis vectors have mixed dimensions".into(),
        });
    }
    let dev = orthonormality_deviation(basis);
    if dev > 1e-9 {
        return Err(Error::BadBasis {
            reason: format!("basis is not orthonormal (deviation {dev:.3e})"),
        });
    }
    let mut matrix = CMatrix::zeros(dim, dim);
    for (b, &label) in basis.iter().zip(labels) {
        matrix = &matrix + &b.outer(b).scaled(num_complex::Complex::new(label, 0.0));
    }
    Ok(Observable {
        matrix,
        basis: basis.to_vec(),
        labels: labels.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{random_equivalent_ensemble, DensityMatrix};
    use crate::hilbert::{qubit, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn halves(a: CVector, b: CVector) -> Ensemble {
        Ensemble::from_unnormalized(vec![
            a.scaled(C64::new(INV_SQRT_2, 0.0)),
            b.scaled(C64::new(INV_SQRT_2, 0.0)),
        ])
        .unwrap()
    }

    fn z_halves() -> Ensemble {
        halves(qubit::z_plus(), qubit::z_minus())
    }

    fn x_halves() -> Ensemble {
        halves(qubit::x_plus(), qubit::x_minus())
    }

    fn state_vectors(e: &Ensemble) -> Vec<CVector> {
        e.states().iter().map(|s| s.vector().clone()).collect()
    }

    fn half_identity() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5])
    }

    #[test]
    fn purify_x_halves() {
        let e = x_halves();
        let p = purify(&e);
        assert_eq!(p.bob_dim(), 2);
        assert!((p.vector().norm_sqr() - 1.0).abs() < 1e-12);
        assert!(orthonormality_deviation(p.alpha()) < 1e-12);
        assert!(p.expansion_residual(&state_vectors(&e), p.alpha()) < 1e-12);
        assert!(p.reduced_alice().max_abs_diff(&half_identity()) < 1e-12);
    }

    #[test]
    fn purify_pure_state_is_a_product() {
        let e = Ensemble::from_unnormalized(vec![qubit::z_plus()]).unwrap();
        let p = purify(&e);
        assert_eq!(p.bob_dim(), 1);
        let product = tensor_product(&qubit::z_plus(), &CVector::basis(1, 0));
        assert!(p.vector().max_abs_diff(&product) < 1e-12);
    }

    #[test]
    fn purify_spectral_ensemble_gives_standard_basis() {
        let p = purify(&z_halves());
        for (j, a) in p.alpha().iter().enumerate() {
            assert!(a.max_abs_diff(&CVector::basis(2, j)) < 1e-12);
        }
    }

    #[test]
    fn joint_purification_of_the_z_and_x_mixtures() {
        let e1 = z_halves();
        let e2 = x_halves();
        let p = joint_purification(&e1, &e2).unwrap();
        assert_eq!(p.bob_dim(), 2);
        assert!(p.expansion_residual(&state_vectors(&e1), p.alpha()) < 1e-10);
        assert!(p.expansion_residual(&state_vectors(&e2), p.beta()) < 1e-10);
        assert!(p.reduced_alice().max_abs_diff(&half_identity()) < 1e-12);
        // α comes out as the standard basis and β as the x basis of K
        for (j, a) in p.alpha().iter().enumerate() {
            assert!(a.max_abs_diff(&CVector::basis(2, j)) < 1e-12);
        }
        assert!(p.beta()[0].phase_fixed().max_abs_diff(&qubit::x_plus()) < 1e-12);
        assert!(p.beta()[1].phase_fixed().max_abs_diff(&qubit::x_minus()) < 1e-12);
    }

    #[test]
    fn joint_purification_of_identical_ensembles_has_equal_bases() {
        let e = x_halves();
        let p = joint_purification(&e, &e).unwrap();
        for (a, b) in p.alpha().iter().zip(p.beta()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
    }

    #[test]
    fn joint_purification_pads_to_the_larger_ensemble() {
        let e1 = z_halves();
        let rho = DensityMatrix::new(half_identity()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let e2 = random_equivalent_ensemble(&rho, 5, &mut rng).unwrap();
        let p = joint_purification(&e1, &e2).unwrap();
        assert_eq!(p.bob_dim(), 5);
        assert!(p.expansion_residual(&state_vectors(&e1), p.alpha()) < 1e-9);
        assert!(p.expansion_residual(&state_vectors(&e2), p.beta()) < 1e-9);
        assert!(p.reduced_alice().max_abs_diff(&half_identity()) < 1e-10);
    }

    #[test]
    fn joint_purification_rejects_inequivalent_pairs() {
        let e1 = Ensemble::from_unnormalized(vec![qubit::z_plus()]).unwrap();
        let e2 = Ensemble::from_unnormalized(vec![qubit::x_plus()]).unwrap();
        match joint_purification(&e1, &e2) {
            Err(Error::NotEquivalent { distance }) => {
                assert!((distance - INV_SQRT_2).abs() < 1e-12);
            }
            other => panic!("expected NotEquivalent, got {other:?}"),
        }
    }

    /// A maximally entangled state pairing the x mixture with the z basis,
    /// V = (x+⊗z+ + x−⊗z−)/√2.
    fn cross_paired_shared_state() -> Purification {
        let v = &tensor_product(&qubit::x_plus(), &qubit::z_plus())
            + &tensor_product(&qubit::x_minus(), &qubit::z_minus());
        Purification::new(v.scaled(C64::new(INV_SQRT_2, 0.0)), 2, 2, vec![], vec![]).unwrap()
    }

    #[test]
    fn remote_prepare_steers_between_x_and_z_mixtures() {
        let p = cross_paired_shared_state();
        let in_z = remote_prepare(&p, &[qubit::z_plus(), qubit::z_minus()]).unwrap();
        assert_eq!(in_z.len(), 2);
        for (st, expected) in in_z.states().iter().zip([qubit::x_plus(), qubit::x_minus()]) {
            assert!((st.weight() - 0.5).abs() < 1e-12);
            assert!(st.unit().phase_fixed().max_abs_diff(&expected) < 1e-12);
        }
        let in_x = remote_prepare(&p, &[qubit::x_plus(), qubit::x_minus()]).unwrap();
        for (st, expected) in in_x.states().iter().zip([qubit::z_plus(), qubit::z_minus()]) {
            assert!((st.weight() - 0.5).abs() < 1e-12);
            assert!(st.unit().phase_fixed().max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn remote_prepare_on_a_product_state() {
        let e = Ensemble::from_unnormalized(vec![qubit::z_plus()]).unwrap();
        let p = purify(&e);
        let prepared = remote_prepare(&p, &[CVector::basis(1, 0)]).unwrap();
        assert_eq!(prepared.len(), 1);
        assert!(prepared.state(0).unit().max_abs_diff(&qubit::z_plus()) < 1e-12);
    }

    #[test]
    fn remote_prepare_density_is_basis_independent() {
        let p = joint_purification(&z_halves(), &x_halves()).unwrap();
        let rho_alpha = density_of(&remote_prepare(&p, p.alpha()).unwrap());
        let rho_beta = density_of(&remote_prepare(&p, p.beta()).unwrap());
        let rotated = [
            CVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]),
            CVector::new(vec![C64::new(0.8, 0.0), C64::new(0.0, -0.6)]),
        ];
        let rho_rot = density_of(&remote_prepare(&p, &rotated).unwrap());
        assert!(rho_alpha.matrix().max_abs_diff(rho_beta.matrix()) < 1e-12);
        assert!(rho_alpha.matrix().max_abs_diff(rho_rot.matrix()) < 1e-12);
    }

    #[test]
    fn remote_prepare_rejects_bad_bases() {
        let p = cross_paired_shared_state();
        let not_orthonormal = [qubit::z_plus(), qubit::x_plus()];
        assert!(matches!(
            remote_prepare(&p, &not_orthonormal),
            Err(Error::BadBasis { .. })
        ));
        let incomplete = [qubit::z_plus()];
        assert!(matches!(
            remote_prepare(&p, &incomplete),
            Err(Error::BadBasis { .. })
        ));
    }

    #[test]
    fn observable_from_z_and_x_bases() {
        let o = bob_observable(&[qubit::z_plus(), qubit::z_minus()], &[1.0, -1.0]).unwrap();
        assert!(o.matrix().max_abs_diff(&qubit::pauli_z()) < 1e-12);
        let o = bob_observable(&[qubit::x_plus(), qubit::x_minus()], &[1.0, -1.0]).unwrap();
        assert!(o.matrix().max_abs_diff(&qubit::pauli_x()) < 1e-12);
        let basis: Vec<CVector> = (0..3).map(|k| CVector::basis(3, k)).collect();
        let o = bob_observable(&basis, &[1.0, 2.0, 3.0]).unwrap();
        let expected = CMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        assert!(o.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn observable_rejects_duplicate_labels() {
        assert!(matches!(
            bob_observable(&[qubit::z_plus(), qubit::z_minus()], &[1.0, 1.0]),
            Err(Error::DuplicateLabels)
        ));
    }
}
