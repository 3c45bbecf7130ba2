//! Executable no-signaling checks.
//!
//! The theorem under test: equivalent ensembles must stay equivalent
//! under any physical dynamics, or distant parties could communicate by
//! choosing which decomposition to remotely prepare. The audits here
//! falsify rather than prove — they evolve many decompositions of one
//! density matrix and measure how far apart the results drift, check
//! convex-linearity of the induced density map against its spectral
//! route, verify that jump unravelings average back to the master
//! equation, and run the whole Alice/Bob protocol end to end with a
//! Helstrom decision rule.

use rand::Rng;

use crate::dynamics::{
    derive_seed, evolve_ensemble, evolve_state, integrate_lindblad, unravel, EvolutionSpec,
};
use crate::ensemble::{
    density_of, equivalent, random_equivalent_ensemble, spectral_ensemble, DensityMatrix,
    Ensemble,
};
use crate::error::{Error, Result};
use crate::hilbert::{hermitian_eig, trace_distance, C64, CMatrix, CVector};
use crate::purification::{joint_purification, remote_prepare};

/// Outcome of a no-signaling audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoSignalingConsistent,
    SignalingDetected,
}

/// The decomposition pair and probe time achieving the maximal distance.
#[derive(Debug, Clone)]
pub struct Witness {
    pub first_label: String,
    pub second_label: String,
    pub first: Ensemble,
    pub second: Ensemble,
    pub time: f64,
}

/// One evolved-pair comparison inside an audit.
#[derive(Debug, Clone)]
pub struct DistanceRecord {
    pub time: f64,
    pub first_label: String,
    pub second_label: String,
    pub trace_distance: f64,
}

/// Full result of [`audit_no_signaling`].
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub spec_summary: String,
    pub times: Vec<f64>,
    pub threshold: f64,
    pub max_trace_distance: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// ½(1 + max distance): Alice's best single-shot guessing accuracy.
    pub helstrom_success: f64,
    pub distances: Vec<DistanceRecord>,
}

/// The density matrix an ensemble evolves into under a spec.
///
/// Vector dynamics evolve each member and rebuild the density; the master
/// equation integrates each member's pure projector and mixes the results
/// with the ensemble weights (its state-vector action is undefined).
pub fn evolved_density(
    spec: &EvolutionSpec,
    e: &Ensemble,
    t: f64,
    seed: u64,
) -> Result<DensityMatrix> {
    match spec {
        EvolutionSpec::LindbladMaster {
            hamiltonian,
            ops,
            dt,
        } => {
            let mut sum = CMatrix::zeros(e.dim(), e.dim());
            for st in e.states() {
                let pure = DensityMatrix::from_pure(&st.unit());
                let evolved = integrate_lindblad(&pure, hamiltonian, ops, t, *dt)?;
                sum = &sum + &evolved.matrix().scaled(C64::new(st.weight(), 0.0));
            }
            DensityMatrix::relaxed(sum)
        }
        _ => Ok(density_of(&evolve_ensemble(spec, e, t, seed)?)),
    }
}

/// Evolve many equivalent decompositions of `rho0` and report the largest
/// pairwise trace distance ever reached on the probe-time grid.
///
/// The decompositions are the spectral ensemble, the caller-supplied
/// `explicit` ones (each checked to reproduce `rho0`), and `n_random`
/// Haar-random ones with sizes cycled from `sizes`. Deterministic given
/// `seed`.
#[allow(clippy::too_many_arguments)]
pub fn audit_no_signaling(
    spec: &EvolutionSpec,
    rho0: &DensityMatrix,
    explicit: &[Ensemble],
    n_random: usize,
    sizes: &[usize],
    times: &[f64],
    threshold: f64,
    seed: u64,
) -> Result<AuditReport> {
    if threshold <= 0.0 {
        return Err(Error::BadThreshold { threshold });
    }
    let total = 1 + explicit.len() + n_random;
    if total < 2 {
        return Err(Error::NotEnoughDecompositions { total });
    }
    spec.validate(rho0.dim())?;

    let s = spectral_ensemble(rho0);
    let mut ensembles: Vec<(String, Ensemble)> = vec![("spectral".to_string(), s.to_ensemble())];
    for (k, e) in explicit.iter().enumerate() {
        let deviation = density_of(e).matrix().max_abs_diff(rho0.matrix());
        if deviation > 1e-9 {
            return Err(Error::NotSameDensity { deviation });
        }
        ensembles.push((format!("given-{k}"), e.clone()));
    }
    let mut decomp_rng = crate::dynamics::stream_rng(derive_seed(seed, 0xDEC0), 0);
    for k in 0..n_random {
        let size = if sizes.is_empty() {
            s.rank()
        } else {
            sizes[k % sizes.len()]
        };
        let e = random_equivalent_ensemble(rho0, size, &mut decomp_rng)?;
        ensembles.push((format!("random-{k}(size {size})"), e));
    }

    let mut distances = Vec::new();
    let mut max_distance: f64 = -1.0;
    let mut witness = None;
    for (ti, &t) in times.iter().enumerate() {
        let evolved: Vec<DensityMatrix> = ensembles
            .iter()
            .enumerate()
            .map(|(ei, (_, e))| {
                evolved_density(spec, e, t, derive_seed(derive_seed(seed, 1 + ei as u64), ti as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..evolved.len() {
            for j in (i + 1)..evolved.len() {
                let d = trace_distance(evolved[i].matrix(), evolved[j].matrix())?;
                distances.push(DistanceRecord {
                    time: t,
                    first_label: ensembles[i].0.clone(),
                    second_label: ensembles[j].0.clone(),
                    trace_distance: d,
                });
                if d > max_distance {
                    max_distance = d;
                    witness = Some(Witness {
                        first_label: ensembles[i].0.clone(),
                        second_label: ensembles[j].0.clone(),
                        first: ensembles[i].1.clone(),
                        second: ensembles[j].1.clone(),
                        time: t,
                    });
                }
            }
        }
    }
    let max_trace_distance = max_distance.max(0.0);
    Ok(AuditReport {
        spec_summary: spec.summary(),
        times: times.to_vec(),
        threshold,
        max_trace_distance,
        verdict: if max_trace_distance > threshold {
            Verdict::SignalingDetected
        } else {
            Verdict::NoSignalingConsistent
        },
        witness,
        helstrom_success: 0.5 * (1.0 + max_trace_distance),
        distances,
    })
}

/// Result of one convex-linearity probe.
#[derive(Debug, Clone)]
pub struct LinearityReport {
    pub lambda: f64,
    /// Trace distance between ℰ(λρ₁+(1−λ)ρ₂) taken along the spectral
    /// route and λℰ(ρ₁)+(1−λ)ℰ(ρ₂) taken through the concatenated
    /// ensemble.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check convex-linearity of the induced density map at one λ.
///
/// The map applied to the mixture uses the mixture's own spectral
/// decomposition; the right-hand side evolves the concatenated ensemble
/// {√λ·aᵢ, √(1−λ)·bᵢ} built from the spectral decompositions of ρ₁ and
/// ρ₂, which per-state evolution makes equal to λℰ(ρ₁)+(1−λ)ℰ(ρ₂). A
/// nonlinear dynamics shows up as a gap between the two routes.
pub fn audit_linearity(
    spec: &EvolutionSpec,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    lambda: f64,
    t: f64,
    tol: f64,
    seed: u64,
) -> Result<LinearityReport> {
    if !(0.0 < lambda && lambda < 1.0) {
        return Err(Error::LambdaOutOfRange { lambda });
    }
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            left: rho1.dim(),
            right: rho2.dim(),
        });
    }
    let mixed = DensityMatrix::new(
        &rho1.matrix().scaled(C64::new(lambda, 0.0))
            + &rho2.matrix().scaled(C64::new(1.0 - lambda, 0.0)),
    )?;
    let lhs = evolved_density(
        spec,
        &spectral_ensemble(&mixed).to_ensemble(),
        t,
        derive_seed(seed, 1),
    )?;

    let mut concat: Vec<CVector> = Vec::new();
    for chi in spectral_ensemble(rho1).chis() {
        concat.push(chi.scaled(C64::new(lambda.sqrt(), 0.0)));
    }
    for chi in spectral_ensemble(rho2).chis() {
        concat.push(chi.scaled(C64::new((1.0 - lambda).sqrt(), 0.0)));
    }
    let concat = Ensemble::with_weight_tolerance(concat, 1e-8)?;
    let rhs = evolved_density(spec, &concat, t, derive_seed(seed, 2))?;

    let residual = trace_distance(lhs.matrix(), rhs.matrix())?;
    Ok(LinearityReport {
        lambda,
        residual,
        tolerance: tol,
        pass: residual <= tol,
    })
}

/// Result of the stochastic-average consistency check.
#[derive(Debug, Clone)]
pub struct UnravelingReport {
    pub trace_distance: f64,
    /// 5/√N, the Monte-Carlo agreement bound.
    pub bound: f64,
    pub trajectories: usize,
    pub pass: bool,
}

/// Compare the trajectory-averaged jump unraveling against the RK4 master
/// equation, mixing over the spectral ensemble of `rho0`.
pub fn unraveling_consistency(
    h: &CMatrix,
    ops: &[CMatrix],
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
    n_traj: usize,
    seed: u64,
) -> Result<UnravelingReport> {
    let s = spectral_ensemble(rho0);
    let mut averaged = CMatrix::zeros(rho0.dim(), rho0.dim());
    for (i, chi) in s.chis().iter().enumerate() {
        let result = unravel(
            &chi.normalized(),
            h,
            ops,
            t,
            dt,
            n_traj,
            derive_seed(seed, i as u64),
        )?;
        averaged = &averaged
            + &result
                .average_projector()
                .scaled(C64::new(s.lambdas()[i], 0.0));
    }
    let averaged = DensityMatrix::relaxed(averaged)?;
    let exact = integrate_lindblad(rho0, h, ops, t, dt)?;
    let distance = trace_distance(averaged.matrix(), exact.matrix())?;
    let bound = 5.0 / (n_traj as f64).sqrt();
    Ok(UnravelingReport {
        trace_distance: distance,
        bound,
        trajectories: n_traj,
        pass: distance <= bound,
    })
}

/// One round of the signaling protocol.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub index: usize,
    /// Bob's random bit: 0 measures O_α, 1 measures O_β.
    pub bob_bit: u8,
    /// Which basis outcome Bob got (index into the prepared ensemble).
    pub outcome: usize,
    /// Which Helstrom eigenvector Alice's measurement landed on.
    pub measured: usize,
    pub guess: u8,
    pub correct: bool,
}

/// End-to-end protocol transcript.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub trials: Vec<TrialRecord>,
    pub accuracy: f64,
    /// ½(1 + D) for the evolved pair — what the accuracy converges to.
    pub theoretical_accuracy: f64,
    pub trace_distance: f64,
    pub spec_summary: String,
}

/// Alice's state after one trial: a single stochastic trajectory for the
/// jump unraveling, the integrated master equation for Lindblad, and the
/// evolved projector for deterministic specs.
fn evolve_pure_once(
    spec: &EvolutionSpec,
    psi: &CVector,
    t: f64,
    seed: u64,
) -> Result<DensityMatrix> {
    match spec {
        EvolutionSpec::LindbladMaster {
            hamiltonian,
            ops,
            dt,
        } => integrate_lindblad(&DensityMatrix::from_pure(psi), hamiltonian, ops, t, *dt),
        _ => {
            let out = evolve_state(spec, psi, t, seed)?;
            Ok(DensityMatrix::from_pure(&out))
        }
    }
}

/// Simulate the whole superluminal-communication attempt.
///
/// Bob encodes a uniformly random bit per trial by measuring the α or β
/// basis of the shared purification; Alice's conditional state evolves
/// under the spec, and she decodes by measuring the eigenbasis of
/// ρ̄₁ₜ − ρ̄₂ₜ, guessing 0 on positive eigenvalues. Her accuracy converges
/// to ½(1 + D): exactly ½ when the dynamics keeps the mixtures
/// equivalent, and above ½ precisely when a signal gets through.
pub fn demo_signaling_protocol(
    e1: &Ensemble,
    e2: &Ensemble,
    spec: &EvolutionSpec,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<Transcript> {
    if !equivalent(e1, e2, 1e-9)? {
        let distance = trace_distance(density_of(e1).matrix(), density_of(e2).matrix())?;
        return Err(Error::NotEquivalent { distance });
    }
    spec.validate(e1.dim())?;

    let p = joint_purification(e1, e2)?;
    let prepared = [
        remote_prepare(&p, p.alpha())?,
        remote_prepare(&p, p.beta())?,
    ];

    let rho1 = evolved_density(spec, e1, t, derive_seed(seed, 1))?;
    let rho2 = evolved_density(spec, e2, t, derive_seed(seed, 2))?;
    let delta = rho1.matrix() - rho2.matrix();
    let eig = hermitian_eig(&delta.hermitized())?;
    let distance = 0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    let basis: Vec<CVector> = (0..rho1.dim()).map(|k| eig.eigenvector(k)).collect();

    let mut rng = crate::dynamics::stream_rng(derive_seed(seed, 0xB0B), 0);
    let mut trials_log = Vec::with_capacity(trials);
    let mut correct_count = 0usize;
    for index in 0..trials {
        let bob_bit = u8::from(rng.gen::<bool>());
        let ens = &prepared[bob_bit as usize];
        let outcome = sample_index(&mut rng, ens.states().iter().map(|s| s.weight()));
        let psi = ens.state(outcome).unit();

        let rho_trial = evolve_pure_once(spec, &psi, t, derive_seed(seed, 0xA11CE + index as u64))?;
        let probs = basis
            .iter()
            .map(|v| v.inner(&rho_trial.matrix().matvec(v)).re.max(0.0));
        let measured = sample_index(&mut rng, probs);
        let guess = u8::from(eig.eigenvalues[measured] <= 0.0);
        let correct = guess == bob_bit;
        correct_count += usize::from(correct);
        trials_log.push(TrialRecord {
            index,
            bob_bit,
            outcome,
            measured,
            guess,
            correct,
        });
    }

    Ok(Transcript {
        accuracy: correct_count as f64 / trials as f64,
        theoretical_accuracy: 0.5 * (1.0 + distance),
        trace_distance: distance,
        trials: trials_log,
        spec_summary: spec.summary(),
    })
}

/// Draw an index with probability proportional to the given weights.
fn sample_index<R: Rng, I: IntoIterator<Item = f64>>(rng: &mut R, weights: I) -> usize {
    let weights: Vec<f64> = weights.into_iter().collect();
    let total: f64 = weights.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if target < w {
            return k;
        }
        target -= w;
    }
    weights.len() - 1
}
