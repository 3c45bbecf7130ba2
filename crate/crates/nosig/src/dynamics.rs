//! Pluggable state-vector evolutions and the density-matrix maps they
//! induce.
//!
//! Supported: unitary Schrödinger evolution, a norm-preserving but
//! genuinely nonlinear map (a state-dependent Hamiltonian g⟨σz⟩σz), a
//! four-state lookup table acting only on z±/x± (the toy nonlinear
//! evolution used as a signaling witness), a Lindblad master equation
//! integrated by fixed-step RK4, and its quantum-jump unraveling.
//!
//! Everything stochastic is driven by explicit `u64` seeds. Trajectory k
//! of a run with seed s uses the ChaCha stream k of the generator keyed by
//! s, and nested runs derive fresh seeds with a SplitMix64 counter hash,
//! so results are reproducible bit for bit and independent of the number
//! of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::ensemble::{DensityMatrix, Ensemble};
use crate::error::{Error, Result};
use crate::hilbert::{hermitian_eig, qubit, C64, CMatrix, CVector};

/// One dynamics 𝒯 acting on state vectors (or, for the master equation,
/// directly on density matrices).
#[derive(Debug, Clone)]
pub enum EvolutionSpec {
    /// |ψ⟩ ↦ exp(−iHt)|ψ⟩.
    Unitary { hamiltonian: CMatrix },
    /// |ψ⟩ ↦ exp(−i g t ⟨σz⟩_ψ σz)|ψ⟩ with the normalized expectation
    /// ⟨σz⟩_ψ = ⟨ψ|σz|ψ⟩/⟨ψ|ψ⟩; norm-preserving but nonlinear.
    NonlinearWeinberg { strength: f64 },
    /// The four-state table z+↦x+, z−↦x−, x+↦z+, x−↦x− (dim 2 only);
    /// any other input is rejected.
    FigureThreeTable,
    /// dρ/dt = −i[H,ρ] + Σₖ(LₖρLₖ† − ½Lₖ†Lₖρ − ½ρLₖ†Lₖ), integrated
    /// with fixed-step RK4.
    LindbladMaster {
        hamiltonian: CMatrix,
        ops: Vec<CMatrix>,
        dt: f64,
    },
    /// Quantum-jump unraveling of the same master equation.
    JumpUnraveling {
        hamiltonian: CMatrix,
        ops: Vec<CMatrix>,
        dt: f64,
        trajectories: usize,
    },
}

impl EvolutionSpec {
    /// Check the spec against a Hilbert-space dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_h = |h: &CMatrix| -> Result<()> {
            if !h.is_square() || h.rows() != dim {
                return Err(Error::DimensionMismatch {
                    left: h.rows(),
                    right: dim,
                });
            }
            let dev = h.hermiticity_deviation();
            if dev > 1e-10 {
                return Err(Error::NotHermitian { deviation: dev });
            }
            Ok(())
        };
        let check_ops = |ops: &[CMatrix]| -> Result<()> {
            for l in ops {
                if !l.is_square() || l.rows() != dim {
                    return Err(Error::DimensionMismatch {
                        left: l.rows(),
                        right: dim,
                    });
                }
            }
            Ok(())
        };
        match self {
            Self::Unitary { hamiltonian } => check_h(hamiltonian),
            Self::NonlinearWeinberg { .. } | Self::FigureThreeTable => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch { left: dim, right: 2 });
                }
                Ok(())
            }
            Self::LindbladMaster {
                hamiltonian,
                ops,
                dt,
            } => {
                check_h(hamiltonian)?;
                check_ops(ops)?;
                if *dt <= 0.0 {
                    return Err(Error::BadStep { t: f64::NAN, dt: *dt });
                }
                Ok(())
            }
            Self::JumpUnraveling {
                hamiltonian,
                ops,
                dt,
                trajectories,
            } => {
                check_h(hamiltonian)?;
                check_ops(ops)?;
                if *dt <= 0.0 {
                    return Err(Error::BadStep { t: f64::NAN, dt: *dt });
                }
                if *trajectories == 0 {
                    return Err(Error::ZeroTrajectories);
                }
                Ok(())
            }
        }
    }

    /// Short human-readable tag for reports.
    pub fn summary(&self) -> String {
        match self {
            Self::Unitary { hamiltonian } => format!("unitary(dim {})", hamiltonian.rows()),
            Self::NonlinearWeinberg { strength } => format!("weinberg(g = {strength})"),
            Self::FigureThreeTable => "figure-three-table".to_string(),
            Self::LindbladMaster { ops, dt, .. } => {
                format!("lindblad({} ops, dt = {dt})", ops.len())
            }
            Self::JumpUnraveling {
                ops,
                dt,
                trajectories,
                ..
            } => format!("jump({} ops, dt = {dt}, N = {trajectories})", ops.len()),
        }
    }

    /// Whether evolving twice with the same input can differ.
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Self::JumpUnraveling { .. })
    }
}

/// SplitMix64 finalizer over a counter; the fixed scheme for deriving
/// independent sub-seeds from a master seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha generator keyed by `seed` on the given stream; the fixed
/// counter scheme behind every reproducible batch in this crate.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// exp(−iHt) via the Hermitian eigendecomposition; exact at these scales.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(h)?;
    let n = h.rows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let v = eig.eigenvector(k);
        let phase = C64::new(0.0, -eig.eigenvalues[k] * t).exp();
        out = &out + &v.outer(&v).scaled(phase);
    }
    Ok(out)
}

const TABLE_TOL: f64 = 1e-9;

fn figure_three_image(psi: &CVector) -> Result<CVector> {
    let pairs = [
        (qubit::z_plus(), qubit::x_plus()),
        (qubit::z_minus(), qubit::x_minus()),
        (qubit::x_plus(), qubit::z_plus()),
        (qubit::x_minus(), qubit::x_minus()),
    ];
    let norm = psi.norm();
    for (state, image) in pairs {
        let overlap = state.inner(psi);
        let residual = (psi - &state.scaled(overlap)).norm();
        if residual <= TABLE_TOL * norm {
            return Ok(image.scaled(C64::new(norm, 0.0)));
        }
    }
    Err(Error::NotInTable)
}

/// Evolve a single (possibly unnormalized) state vector for time `t`.
///
/// The output norm equals the input norm, so ensemble weights ride along
/// unchanged. For the jump unraveling this runs one stochastic trajectory.
pub fn evolve_state(spec: &EvolutionSpec, psi: &CVector, t: f64, seed: u64) -> Result<CVector> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime { t });
    }
    let norm = psi.norm();
    if norm * norm < crate::ensemble::NULL_WEIGHT {
        return Err(Error::ZeroState);
    }
    spec.validate(psi.dim())?;

    let raw = match spec {
        EvolutionSpec::Unitary { hamiltonian } => unitary_propagator(hamiltonian, t)?.matvec(psi),
        EvolutionSpec::NonlinearWeinberg { strength } => {
            let z = (psi.get(0).norm_sqr() - psi.get(1).norm_sqr()) / (norm * norm);
            let theta = strength * t * z;
            CVector::new(vec![
                psi.get(0) * C64::new(0.0, -theta).exp(),
                psi.get(1) * C64::new(0.0, theta).exp(),
            ])
        }
        EvolutionSpec::FigureThreeTable => figure_three_image(psi)?,
        EvolutionSpec::LindbladMaster { .. } => return Err(Error::NotVectorEvolution),
        EvolutionSpec::JumpUnraveling {
            hamiltonian,
            ops,
            dt,
            ..
        } => {
            let result = unravel(&psi.normalized(), hamiltonian, ops, t, *dt, 1, seed)?;
            result.final_states[0].clone()
        }
    };
    // pin the output norm to the input norm exactly
    Ok(raw.scaled(C64::new(norm / raw.norm(), 0.0)))
}

/// Evolve a rank-1 density matrix: deterministic specs conjugate the
/// underlying state, the master equation integrates directly, and the
/// jump unraveling averages |ψₜ⟩⟨ψₜ| over its trajectory set.
pub fn evolve_pure_density(
    spec: &EvolutionSpec,
    rho: &DensityMatrix,
    t: f64,
    seed: u64,
) -> Result<DensityMatrix> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime { t });
    }
    let eig = hermitian_eig(rho.matrix()).expect("density matrices are Hermitian");
    let n = rho.dim();
    if n >= 2 {
        let second = eig.eigenvalues[n - 2].abs();
        if second > 1e-9 {
            return Err(Error::NotPure { residual: second });
        }
    }
    let psi = eig.eigenvector(n - 1);

    match spec {
        EvolutionSpec::LindbladMaster {
            hamiltonian,
            ops,
            dt,
        } => integrate_lindblad(rho, hamiltonian, ops, t, *dt),
        EvolutionSpec::JumpUnraveling {
            hamiltonian,
            ops,
            dt,
            trajectories,
        } => {
            let result = unravel(&psi, hamiltonian, ops, t, *dt, *trajectories, seed)?;
            DensityMatrix::relaxed(result.average_projector())
        }
        _ => {
            let out = evolve_state(spec, &psi, t, seed)?;
            Ok(DensityMatrix::from_pure(&out))
        }
    }
}

/// Evolve every member of an ensemble independently, weights untouched.
///
/// For the jump unraveling each member spawns its full trajectory set and
/// the returned ensemble holds all weighted endpoints (weight dᵢ/N each).
/// The master-equation spec has no state-vector action and is rejected.
pub fn evolve_ensemble(
    spec: &EvolutionSpec,
    e: &Ensemble,
    t: f64,
    seed: u64,
) -> Result<Ensemble> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime { t });
    }
    spec.validate(e.dim())?;
    match spec {
        EvolutionSpec::LindbladMaster { .. } => Err(Error::NotVectorEvolution),
        EvolutionSpec::JumpUnraveling {
            hamiltonian,
            ops,
            dt,
            trajectories,
        } => {
            let mut out = Vec::with_capacity(e.len() * trajectories);
            for (i, st) in e.states().iter().enumerate() {
                let result = unravel(
                    &st.unit(),
                    hamiltonian,
                    ops,
                    t,
                    *dt,
                    *trajectories,
                    derive_seed(seed, i as u64),
                )?;
                let amp = C64::new((st.weight() / *trajectories as f64).sqrt(), 0.0);
                out.extend(result.final_states.into_iter().map(|f| f.scaled(amp)));
            }
            Ensemble::with_weight_tolerance(out, 1e-8)
        }
        _ => {
            let evolved = e
                .states()
                .iter()
                .enumerate()
                .map(|(i, st)| evolve_state(spec, st.vector(), t, derive_seed(seed, i as u64)))
                .collect::<Result<Vec<_>>>()?;
            Ensemble::with_weight_tolerance(evolved, 1e-8)
        }
    }
}

/// Right-hand side of the master equation,
/// −i[H,ρ] + Σₖ(LₖρLₖ† − ½Lₖ†Lₖρ − ½ρLₖ†Lₖ).
pub fn lindblad_rhs(rho: &CMatrix, h: &CMatrix, ops: &[CMatrix]) -> Result<CMatrix> {
    let n = rho.rows();
    if !rho.is_square() || !h.is_square() || h.rows() != n {
        return Err(Error::DimensionMismatch {
            left: h.rows(),
            right: n,
        });
    }
    for l in ops {
        if !l.is_square() || l.rows() != n {
            return Err(Error::DimensionMismatch {
                left: l.rows(),
                right: n,
            });
        }
    }
    let commutator = &h.matmul(rho) - &rho.matmul(h);
    let mut out = commutator.scaled(C64::new(0.0, -1.0));
    for l in ops {
        let l_dag = l.adjoint();
        let l_dag_l = l_dag.matmul(l);
        let sandwich = l.matmul(rho).matmul(&l_dag);
        let anti = &l_dag_l.matmul(rho) + &rho.matmul(&l_dag_l);
        out = &out + &(&sandwich - &anti.scaled(C64::new(0.5, 0.0)));
    }
    Ok(out)
}

/// Integrate the master equation with classical fixed-step RK4,
/// re-Hermitizing after every step; a final partial step covers any
/// remainder of `t` that is not a multiple of `dt`.
pub fn integrate_lindblad(
    rho0: &DensityMatrix,
    h: &CMatrix,
    ops: &[CMatrix],
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(Error::BadStep { t, dt });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    if dt <= 0.0 || dt > t {
        return Err(Error::BadStep { t, dt });
    }
    let dev = h.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }

    let mut rho = rho0.matrix().clone();
    let n_full = (t / dt + 1e-9).floor() as usize;
    let remainder = t - n_full as f64 * dt;
    let step = |rho: &CMatrix, hstep: f64| -> Result<CMatrix> {
        let half = hstep / 2.0;
        let k1 = lindblad_rhs(rho, h, ops)?;
        let k2 = lindblad_rhs(&(rho + &k1.scaled(C64::new(half, 0.0))), h, ops)?;
        let k3 = lindblad_rhs(&(rho + &k2.scaled(C64::new(half, 0.0))), h, ops)?;
        let k4 = lindblad_rhs(&(rho + &k3.scaled(C64::new(hstep, 0.0))), h, ops)?;
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scaled(C64::new(2.0, 0.0));
        Ok((rho + &incr.scaled(C64::new(hstep / 6.0, 0.0))).hermitized())
    };
    for _ in 0..n_full {
        rho = step(&rho, dt)?;
    }
    if remainder > 1e-12 {
        rho = step(&rho, remainder)?;
    }
    DensityMatrix::relaxed(rho)
}

/// Final states of a batch of quantum-jump trajectories.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    /// One unit-norm state per trajectory, in trajectory order.
    pub final_states: Vec<CVector>,
    /// Master seed the batch was run with.
    pub seed: u64,
}

impl TrajectoryResult {
    /// (1/N)·Σ |ψₜ⟩⟨ψₜ|, accumulated in trajectory order so the result
    /// does not depend on how the trajectories were scheduled.
    pub fn average_projector(&self) -> CMatrix {
        let dim = self.final_states[0].dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for psi in &self.final_states {
            sum = &sum + &psi.outer(psi);
        }
        sum.scaled(C64::new(1.0 / self.final_states.len() as f64, 0.0))
    }
}

/// Standard quantum-jump (Monte-Carlo wave function) unraveling.
///
/// Per step of size h: jump probability pₖ = h·⟨ψ|Lₖ†Lₖ|ψ⟩; with
/// probability Σpₖ one jump Lₖψ/‖Lₖψ‖ is applied (k chosen ∝ pₖ),
/// otherwise the state drifts under the effective non-Hermitian generator
/// H − (i/2)ΣLₖ†Lₖ and is renormalized. Any pₖ > 0.1 aborts with
/// `StepTooLarge`. Trajectory k runs on ChaCha stream k of `seed`;
/// trajectories execute in parallel but reduce in index order, so the
/// result is bit-identical to a sequential run.
pub fn unravel(
    psi0: &CVector,
    h: &CMatrix,
    ops: &[CMatrix],
    t: f64,
    dt: f64,
    n_traj: usize,
    seed: u64,
) -> Result<TrajectoryResult> {
    if n_traj == 0 {
        return Err(Error::ZeroTrajectories);
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    if t < 0.0 || dt <= 0.0 || (t > 0.0 && dt > t) {
        return Err(Error::BadStep { t, dt });
    }
    let dev = h.hermiticity_deviation();
    if dev > 1e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let dim = psi0.dim();
    for l in ops {
        if !l.is_square() || l.rows() != dim {
            return Err(Error::DimensionMismatch {
                left: l.rows(),
                right: dim,
            });
        }
    }

    // G = Σ Lₖ†Lₖ drives the no-jump drift
    let mut g = CMatrix::zeros(dim, dim);
    for l in ops {
        g = &g + &l.adjoint().matmul(l);
    }
    let n_full = (t / dt + 1e-9).floor() as usize;
    let remainder = t - n_full as f64 * dt;

    let run_one = |traj: usize| -> Result<CVector> {
        let mut rng = stream_rng(seed, traj as u64);
        let mut psi = psi0.normalized();
        let advance = |psi: &mut CVector, hstep: f64, rng: &mut ChaCha12Rng| -> Result<()> {
            let jumped: Vec<CVector> = ops.iter().map(|l| l.matvec(psi)).collect();
            let probs: Vec<f64> = jumped.iter().map(|w| hstep * w.norm_sqr()).collect();
            for &p in &probs {
                if p > 0.1 {
                    return Err(Error::StepTooLarge { p });
                }
            }
            let total: f64 = probs.iter().sum();
            let u: f64 = rng.gen();
            if u < total {
                let mut target = rng.gen::<f64>() * total;
                let mut chosen = probs.len() - 1;
                for (k, &p) in probs.iter().enumerate() {
                    if target < p {
                        chosen = k;
                        break;
                    }
                    target -= p;
                }
                *psi = jumped[chosen].normalized();
            } else {
                let drift = &h.matvec(psi).scaled(C64::new(0.0, -hstep))
                    - &g.matvec(psi).scaled(C64::new(hstep / 2.0, 0.0));
                *psi = (&*psi + &drift).normalized();
            }
            Ok(())
        };
        for _ in 0..n_full {
            advance(&mut psi, dt, &mut rng)?;
        }
        if remainder > 1e-12 {
            advance(&mut psi, remainder, &mut rng)?;
        }
        Ok(psi)
    };

    let final_states: Vec<CVector> = if n_traj > 1 {
        (0..n_traj)
            .into_par_iter()
            .map(run_one)
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![run_one(0)?]
    };
    Ok(TrajectoryResult { final_states, seed })
}
