//! The five subcommands. Each reads one scenario file, writes CSV tables
//! and a JSON summary into the output directory, prints a short human
//! report to stdout, and returns the process exit code: 0 for a clean
//! pass, 3 when an audit or consistency check flags a failure.

use serde::Serialize;

use nosig::auditor::{
    audit_linearity, audit_no_signaling, demo_signaling_protocol, evolved_density,
    unraveling_consistency, Verdict,
};
use nosig::dynamics::{derive_seed, evolve_ensemble, EvolutionSpec};
use nosig::ensemble::{density_of, spectral_ensemble, DensityMatrix, Ensemble};
use nosig::hilbert::complete_to_unitary;
use nosig::purification::joint_purification;

use crate::config::{self, ScenarioConfig};
use crate::output::{fmt_f64, matrix_rows, vector_rows, OutDir};
use crate::CliError;

pub struct Context {
    pub config: ScenarioConfig,
    pub out: OutDir,
    pub seed: u64,
}

impl Context {
    fn dim(&self) -> usize {
        self.config.hilbert_dim
    }

    fn ensembles(&self) -> Result<Vec<Ensemble>, CliError> {
        self.config
            .ensembles
            .iter()
            .map(|e| config::build_ensemble(e, self.dim()))
            .collect()
    }

    fn evolution(&self) -> Result<EvolutionSpec, CliError> {
        let cfg = self
            .config
            .evolution
            .as_ref()
            .ok_or_else(|| CliError::Config("an [evolution] table is required".into()))?;
        config::build_evolution(cfg, self.dim())
    }

    /// ρ₀ from the [density] table, or from the first ensemble.
    fn initial_density(&self) -> Result<DensityMatrix, CliError> {
        if let Some(d) = &self.config.density {
            return config::build_density(d, self.dim());
        }
        if let Some(e) = self.config.ensembles.first() {
            return Ok(density_of(&config::build_ensemble(e, self.dim())?));
        }
        Err(CliError::Config(
            "either a [density] table or at least one [[ensembles]] entry is required".into(),
        ))
    }

    fn times(&self) -> Result<&[f64], CliError> {
        if self.config.times.is_empty() {
            return Err(CliError::Config("times must not be empty".into()));
        }
        Ok(&self.config.times)
    }
}

#[derive(Serialize)]
struct PurifySummary {
    command: &'static str,
    seed: u64,
    alice_dim: usize,
    bob_dim: usize,
    expansion_residual_alpha: f64,
    expansion_residual_beta: f64,
    reduced_density_deviation: f64,
}

pub fn cmd_purify(ctx: &Context) -> Result<u8, CliError> {
    let ensembles = ctx.ensembles()?;
    let [e1, e2]: &[Ensemble; 2] = ensembles
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Config("purify needs exactly two [[ensembles]]".into()))?;

    let p = joint_purification(e1, e2).map_err(CliError::Domain)?;

    let mut rows = vector_rows("V", p.vector());
    for (j, a) in p.alpha().iter().enumerate() {
        rows.extend(vector_rows(&format!("alpha-{j}"), a));
    }
    for (j, b) in p.beta().iter().enumerate() {
        rows.extend(vector_rows(&format!("beta-{j}"), b));
    }
    ctx.out
        .write_csv("purification.csv", &["vector", "component", "re", "im"], &rows)?;

    let vec1: Vec<_> = e1.states().iter().map(|s| s.vector().clone()).collect();
    let vec2: Vec<_> = e2.states().iter().map(|s| s.vector().clone()).collect();
    let summary = PurifySummary {
        command: "purify",
        seed: ctx.seed,
        alice_dim: p.alice_dim(),
        bob_dim: p.bob_dim(),
        expansion_residual_alpha: p.expansion_residual(&vec1, p.alpha()),
        expansion_residual_beta: p.expansion_residual(&vec2, p.beta()),
        reduced_density_deviation: p
            .reduced_alice()
            .max_abs_diff(density_of(e1).matrix()),
    };
    ctx.out.write_json("summary.json", &summary)?;

    println!("purify: shared state over H({}) ⊗ K({})", p.alice_dim(), p.bob_dim());
    println!(
        "  expansion residuals: alpha {:.3e}, beta {:.3e}",
        summary.expansion_residual_alpha, summary.expansion_residual_beta
    );
    println!(
        "  reduced density deviation from input: {:.3e}",
        summary.reduced_density_deviation
    );
    Ok(0)
}

#[derive(Serialize)]
struct WitnessSummary {
    first: String,
    second: String,
    time: f64,
}

#[derive(Serialize)]
struct AuditSummary {
    command: &'static str,
    seed: u64,
    spec: String,
    verdict: String,
    threshold: f64,
    max_trace_distance: f64,
    helstrom_success: f64,
    witness: Option<WitnessSummary>,
    linearity_pass: bool,
    max_linearity_residual: f64,
}

fn default_threshold(spec: &EvolutionSpec) -> f64 {
    match spec {
        EvolutionSpec::JumpUnraveling { trajectories, .. } => {
            5.0 / (*trajectories as f64).sqrt()
        }
        _ => 1e-8,
    }
}

/// Unit vectors for the linearity probe: configured explicitly, or the
/// top two spectral eigenvectors of ρ₀ (completed arbitrarily when ρ₀ is
/// pure).
fn linearity_states(
    ctx: &Context,
    rho0: &DensityMatrix,
) -> Result<(DensityMatrix, DensityMatrix), CliError> {
    if let Some(cfg) = ctx
        .config
        .audit
        .as_ref()
        .and_then(|a| a.linearity_states.as_ref())
    {
        if cfg.len() != 2 {
            return Err(CliError::Config(
                "audit.linearity_states needs exactly two vectors".into(),
            ));
        }
        let v1 = config::parse_vector(&cfg[0], ctx.dim())?;
        let v2 = config::parse_vector(&cfg[1], ctx.dim())?;
        return Ok((DensityMatrix::from_pure(&v1), DensityMatrix::from_pure(&v2)));
    }
    let s = spectral_ensemble(rho0);
    let top = s.chis()[s.rank() - 1].normalized();
    let second = if s.rank() >= 2 {
        s.chis()[s.rank() - 2].normalized()
    } else {
        let u = complete_to_unitary(std::slice::from_ref(&top), rho0.dim())
            .map_err(CliError::Domain)?;
        u.column(1)
    };
    Ok((DensityMatrix::from_pure(&top), DensityMatrix::from_pure(&second)))
}

pub fn cmd_audit(ctx: &Context) -> Result<u8, CliError> {
    let spec = ctx.evolution()?;
    let rho0 = ctx.initial_density()?;
    let explicit = ctx.ensembles()?;
    let times = ctx.times()?;
    let audit_cfg = ctx.config.audit.clone().unwrap_or_default();
    let threshold = audit_cfg.threshold.unwrap_or_else(|| default_threshold(&spec));

    let report = audit_no_signaling(
        &spec,
        &rho0,
        &explicit,
        audit_cfg.n_decomp,
        &audit_cfg.sizes,
        times,
        threshold,
        ctx.seed,
    )
    .map_err(CliError::Domain)?;

    let rows: Vec<Vec<String>> = report
        .distances
        .iter()
        .map(|d| {
            vec![
                fmt_f64(d.time),
                d.first_label.clone(),
                d.second_label.clone(),
                fmt_f64(d.trace_distance),
            ]
        })
        .collect();
    ctx.out.write_csv(
        "no_signaling.csv",
        &["time", "first", "second", "trace_distance"],
        &rows,
    )?;

    let (rho1, rho2) = linearity_states(ctx, &rho0)?;
    let mut linearity_rows = Vec::new();
    let mut linearity_pass = true;
    let mut max_residual: f64 = 0.0;
    for (k, &lambda) in audit_cfg.linearity_lambdas.iter().enumerate() {
        let probe = audit_linearity(
            &spec,
            &rho1,
            &rho2,
            lambda,
            times[0],
            audit_cfg.linearity_tolerance,
            derive_seed(ctx.seed, 0x11EA4 + k as u64),
        )
        .map_err(CliError::Domain)?;
        linearity_pass &= probe.pass;
        max_residual = max_residual.max(probe.residual);
        linearity_rows.push(vec![
            fmt_f64(probe.lambda),
            fmt_f64(probe.residual),
            fmt_f64(probe.tolerance),
            probe.pass.to_string(),
        ]);
    }
    ctx.out.write_csv(
        "linearity.csv",
        &["lambda", "residual", "tolerance", "pass"],
        &linearity_rows,
    )?;

    let signaling = report.verdict == Verdict::SignalingDetected;
    let summary = AuditSummary {
        command: "audit",
        seed: ctx.seed,
        spec: report.spec_summary.clone(),
        verdict: if signaling {
            "SignalingDetected".into()
        } else {
            "NoSignalingConsistent".into()
        },
        threshold,
        max_trace_distance: report.max_trace_distance,
        helstrom_success: report.helstrom_success,
        witness: report.witness.as_ref().map(|w| WitnessSummary {
            first: w.first_label.clone(),
            second: w.second_label.clone(),
            time: w.time,
        }),
        linearity_pass,
        max_linearity_residual: max_residual,
    };
    ctx.out.write_json("summary.json", &summary)?;

    println!("audit: {} under {}", summary.verdict, summary.spec);
    println!(
        "  max trace distance {:.6e} (threshold {:.3e}); Helstrom success {:.6}",
        summary.max_trace_distance, threshold, summary.helstrom_success
    );
    if let Some(w) = &summary.witness {
        println!("  witness: {} vs {} at t = {}", w.first, w.second, w.time);
    }
    println!(
        "  linearity grid: {} (max residual {:.6e})",
        if linearity_pass { "pass" } else { "FAIL" },
        max_residual
    );
    println!("  note: only the configured time grid is probed; slower separations stay invisible");
    Ok(if signaling || !linearity_pass { 3 } else { 0 })
}

#[derive(Serialize)]
struct EvolveTimeEntry {
    time: f64,
    density_file: String,
    ensemble_file: Option<String>,
    scenario_file: Option<String>,
}

#[derive(Serialize)]
struct EvolveSummary {
    command: &'static str,
    seed: u64,
    spec: String,
    entries: Vec<EvolveTimeEntry>,
}

pub fn cmd_evolve(ctx: &Context) -> Result<u8, CliError> {
    let spec = ctx.evolution()?;
    let ensembles = ctx.ensembles()?;
    let [e]: &[Ensemble; 1] = ensembles
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Config("evolve needs exactly one [[ensembles]] entry".into()))?;
    let times = ctx.times()?;

    let mut entries = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let seed_t = derive_seed(ctx.seed, i as u64);
        let density_file = format!("density_t{i}.csv");
        let rho = evolved_density(&spec, e, t, seed_t).map_err(CliError::Domain)?;
        ctx.out.write_csv(
            &density_file,
            &["row", "col", "re", "im"],
            &matrix_rows("rho", rho.matrix())
                .into_iter()
                .map(|mut row| {
                    row.remove(0);
                    row
                })
                .collect::<Vec<_>>(),
        )?;

        let (ensemble_file, scenario_file) = if matches!(spec, EvolutionSpec::LindbladMaster { .. })
        {
            (None, None)
        } else {
            let evolved = evolve_ensemble(&spec, e, t, seed_t).map_err(CliError::Domain)?;
            let ensemble_file = format!("ensemble_t{i}.csv");
            let mut rows = Vec::new();
            for (k, st) in evolved.states().iter().enumerate() {
                for (c, amp) in st.vector().entries().iter().enumerate() {
                    rows.push(vec![
                        k.to_string(),
                        c.to_string(),
                        fmt_f64(amp.re),
                        fmt_f64(amp.im),
                    ]);
                }
            }
            ctx.out
                .write_csv(&ensemble_file, &["state", "component", "re", "im"], &rows)?;

            // a reusable scenario fragment so evolved ensembles feed back in
            let scenario_file = format!("evolved_t{i}.toml");
            let fragment = ScenarioConfig {
                hilbert_dim: ctx.dim(),
                seed: ctx.seed,
                times: vec![t],
                ensembles: vec![config::EnsembleConfig {
                    label: Some(format!("evolved at t = {t}")),
                    states: evolved
                        .states()
                        .iter()
                        .map(|s| config::vector_entries(s.vector()))
                        .collect(),
                    weights: None,
                }],
                density: None,
                evolution: None,
                audit: None,
            };
            let text = toml::to_string(&fragment)
                .map_err(|e| CliError::Config(format!("cannot serialize fragment: {e}")))?;
            ctx.out.write_text(&scenario_file, &text)?;
            (Some(ensemble_file), Some(scenario_file))
        };

        entries.push(EvolveTimeEntry {
            time: t,
            density_file,
            ensemble_file,
            scenario_file,
        });
    }

    let summary = EvolveSummary {
        command: "evolve",
        seed: ctx.seed,
        spec: spec.summary(),
        entries,
    };
    ctx.out.write_json("summary.json", &summary)?;
    println!(
        "evolve: {} probe times under {}, outputs in place",
        times.len(),
        summary.spec
    );
    Ok(0)
}

#[derive(Serialize)]
struct DemoSummary {
    command: &'static str,
    seed: u64,
    spec: String,
    trials: usize,
    accuracy: f64,
    theoretical_accuracy: f64,
    trace_distance: f64,
}

pub fn cmd_demo(ctx: &Context) -> Result<u8, CliError> {
    let spec = ctx.evolution()?;
    let ensembles = ctx.ensembles()?;
    let [e1, e2]: &[Ensemble; 2] = ensembles
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Config("demo needs exactly two [[ensembles]]".into()))?;
    let t = ctx.times()?[0];
    let trials = ctx.config.audit.clone().unwrap_or_default().trials;

    let transcript =
        demo_signaling_protocol(e1, e2, &spec, t, trials, ctx.seed).map_err(CliError::Domain)?;

    let rows: Vec<Vec<String>> = transcript
        .trials
        .iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                r.bob_bit.to_string(),
                r.outcome.to_string(),
                r.measured.to_string(),
                r.guess.to_string(),
                (r.correct as u8).to_string(),
            ]
        })
        .collect();
    ctx.out.write_csv(
        "trials.csv",
        &["trial", "bob_bit", "outcome", "measured", "guess", "correct"],
        &rows,
    )?;

    let summary = DemoSummary {
        command: "demo",
        seed: ctx.seed,
        spec: transcript.spec_summary.clone(),
        trials,
        accuracy: transcript.accuracy,
        theoretical_accuracy: transcript.theoretical_accuracy,
        trace_distance: transcript.trace_distance,
    };
    ctx.out.write_json("summary.json", &summary)?;

    println!(
        "demo: {} trials under {}; Alice guessed Bob's bit with accuracy {:.4}",
        trials, summary.spec, summary.accuracy
    );
    println!(
        "  evolved trace distance {:.6}; Helstrom prediction {:.6}",
        summary.trace_distance, summary.theoretical_accuracy
    );
    Ok(0)
}

#[derive(Serialize)]
struct UnravelSummary {
    command: &'static str,
    seed: u64,
    trajectories: usize,
    time: f64,
    dt: f64,
    trace_distance: f64,
    bound: f64,
    pass: bool,
}

pub fn cmd_unravel_check(ctx: &Context) -> Result<u8, CliError> {
    let spec = ctx.evolution()?;
    let EvolutionSpec::JumpUnraveling {
        hamiltonian,
        ops,
        dt,
        trajectories,
    } = spec
    else {
        return Err(CliError::Config(
            "unravel-check needs an evolution of kind \"jump\"".into(),
        ));
    };
    let rho0 = ctx.initial_density()?;
    let t = ctx.times()?[0];

    let report = unraveling_consistency(&hamiltonian, &ops, &rho0, t, dt, trajectories, ctx.seed)
        .map_err(CliError::Domain)?;

    ctx.out.write_csv(
        "unravel.csv",
        &["trace_distance", "bound", "trajectories", "pass"],
        &[vec![
            fmt_f64(report.trace_distance),
            fmt_f64(report.bound),
            report.trajectories.to_string(),
            report.pass.to_string(),
        ]],
    )?;
    let summary = UnravelSummary {
        command: "unravel-check",
        seed: ctx.seed,
        trajectories,
        time: t,
        dt,
        trace_distance: report.trace_distance,
        bound: report.bound,
        pass: report.pass,
    };
    ctx.out.write_json("summary.json", &summary)?;

    println!(
        "unravel-check: {} trajectories vs RK4 master equation: distance {:.5} (bound {:.5}) -> {}",
        trajectories,
        report.trace_distance,
        report.bound,
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(if report.pass { 0 } else { 3 })
}
