//! Faithfulness audit and stability of fine-tuned independences.
//!
//! An audit compares the independences a graph implies with those its
//! distribution actually exhibits. Independences that hold without being
//! implied are unfaithful. The stability tester then asks whether those
//! unfaithful independences survive random perturbation, either of the
//! conditional tables themselves (`cpd_level`) or of the physical parameters
//! of an amplitude kernel from which the tables are derived (`physics_level`).

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{AmplitudeKernel, Intermediary};
use crate::eprb::{model_chsh, signalling_measure};
use crate::error::{Error, Result};
use crate::graph::{contains_statement, CiStatement};
use crate::prob::{CausalModel, Cpd};

/// Default comparison tolerance for exact tables.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A CHSH value counts as a violation only above `2 + CHSH_MARGIN`.
pub const CHSH_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    /// `None` means the full closure, `|V| - 2`.
    pub max_conditioning_size: Option<usize>,
    pub tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            max_conditioning_size: None,
            tol: DEFAULT_TOL,
        }
    }
}

/// The three mutually inconsistent assumptions, evaluated on one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadFlags {
    /// No signalling, independent settings and a CHSH violation.
    pub quantum_predictions_ok: bool,
    /// Every graph-implied independence holds in the distribution.
    pub causal_explanation_markov_ok: bool,
    /// No independence holds that the graph does not imply.
    pub no_fine_tuning_ok: bool,
    pub chsh: f64,
    pub signalling: f64,
    pub settings_independent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub implied: Vec<CiStatement>,
    pub observed: Vec<CiStatement>,
    /// Observed but not implied.
    pub unfaithful: Vec<CiStatement>,
    /// Implied but not observed (Markov failures).
    pub faithful_violations: Vec<CiStatement>,
    pub triad_flags: Option<TriadFlags>,
}

impl AuditReport {
    pub fn is_unfaithful(&self, stmt: &CiStatement) -> bool {
        contains_statement(&self.unfaithful, stmt)
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut line = format!(
            "implied={} observed={} unfaithful={} markov_violations={}",
            self.implied.len(),
            self.observed.len(),
            self.unfaithful.len(),
            self.faithful_violations.len()
        );
        match &self.triad_flags {
            Some(t) => {
                line.push_str(&format!(
                    " | quantum_predictions_ok={} causal_explanation_markov_ok={} no_fine_tuning_ok={} chsh={:.12} signalling={:.3e}",
                    t.quantum_predictions_ok, t.causal_explanation_markov_ok, t.no_fine_tuning_ok, t.chsh, t.signalling
                ));
                if t.quantum_predictions_ok && t.causal_explanation_markov_ok && !t.no_fine_tuning_ok {
                    line.push_str(" | fine-tuned");
                }
            }
            None => line.push_str(if self.unfaithful.is_empty() { " | faithful" } else { " | fine-tuned" }),
        }
        line
    }
}

/// Audits `model`: graph-implied versus observed independences and, when the
/// model carries EPRB roles, the triad flags.
pub fn audit(model: &CausalModel, max_conditioning_size: usize, tol: f64) -> Result<AuditReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let implied = model.dag().implied_independences(max_conditioning_size);
    let joint = model.factorize();
    let observed = joint.independences(max_conditioning_size, tol);
    let unfaithful: Vec<CiStatement> = observed
        .iter()
        .filter(|s| !contains_statement(&implied, s))
        .cloned()
        .collect();
    let faithful_violations: Vec<CiStatement> = implied
        .iter()
        .filter(|s| !contains_statement(&observed, s))
        .cloned()
        .collect();

    let triad_flags = match model.roles() {
        Some(roles) => {
            let signalling = signalling_measure(model)?;
            let chsh = model_chsh(model)?;
            let settings = CiStatement::single(&roles.alpha, &roles.beta, &[])?;
            let settings_independent = joint.holds_ci(&settings, tol)?;
            Some(TriadFlags {
                quantum_predictions_ok: signalling <= tol && chsh > 2.0 + CHSH_MARGIN && settings_independent,
                causal_explanation_markov_ok: faithful_violations.is_empty(),
                no_fine_tuning_ok: unfaithful.is_empty(),
                chsh,
                signalling,
                settings_independent,
            })
        }
        None => None,
    };

    Ok(AuditReport {
        implied,
        observed,
        unfaithful,
        faithful_violations,
        triad_flags,
    })
}

/// Audit with library defaults (full closure).
pub fn audit_with(model: &CausalModel, opts: &AuditOptions) -> Result<AuditReport> {
    let max = opts
        .max_conditioning_size
        .unwrap_or_else(|| model.dag().default_max_conditioning());
    audit(model, max, opts.tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationTarget {
    CpdLevel,
    PhysicsLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub target: PerturbationTarget,
    /// Also perturb exogenous priors and deterministic rows (cpd level only).
    #[serde(default)]
    pub perturb_exempt: bool,
}

impl PerturbationSpec {
    pub fn new(target: PerturbationTarget, delta: f64, trials: usize, seed: u64) -> Result<Self> {
        let spec = PerturbationSpec {
            delta,
            trials,
            seed,
            target,
            perturb_exempt: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!("delta {} outside [0, 0.5]", self.delta)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        Ok(())
    }

    fn expect(&self, target: PerturbationTarget) -> Result<()> {
        self.validate()?;
        if self.target != target {
            return Err(Error::TargetMismatch(format!(
                "perturbation targets {:?}, subject needs {:?}",
                self.target, target
            )));
        }
        Ok(())
    }
}

/// Generator for one trial: the ChaCha stream `trial` of the key `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn noise<R: Rng + ?Sized>(rng: &mut R, delta: f64) -> f64 {
    if delta == 0.0 {
        0.0
    } else {
        rng.gen_range(-delta..=delta)
    }
}

fn jitter_row<R: Rng + ?Sized>(rng: &mut R, row: &[f64], delta: f64) -> Vec<f64> {
    loop {
        let noisy: Vec<f64> = row.iter().map(|p| (p + noise(rng, delta)).max(0.0)).collect();
        let s: f64 = noisy.iter().sum();
        if s > 0.0 {
            return noisy.iter().map(|p| p / s).collect();
        }
    }
}

/// Adds uniform `[-δ, δ]` noise to every non-exempt table entry, clamps at
/// zero and renormalizes. Priors of exogenous vertices and deterministic rows
/// are exempt unless `spec.perturb_exempt` is set.
pub fn perturb_cpd_with<R: Rng + ?Sized>(model: &CausalModel, spec: &PerturbationSpec, rng: &mut R) -> Result<CausalModel> {
    spec.expect(PerturbationTarget::CpdLevel)?;
    if spec.delta == 0.0 {
        return Ok(model.clone());
    }
    let mut out = model.clone();
    for cpd in model.cpds() {
        if cpd.parents.is_empty() && !spec.perturb_exempt {
            continue;
        }
        let rows = cpd
            .rows
            .iter()
            .map(|row| {
                if Cpd::is_deterministic_row(row) && !spec.perturb_exempt {
                    row.clone()
                } else {
                    jitter_row(rng, row, spec.delta)
                }
            })
            .collect();
        out = out.with_rows(&cpd.child, rows)?;
    }
    Ok(out)
}

/// [`perturb_cpd_with`] on trial 0 of the perturbation seed.
pub fn perturb_cpd(model: &CausalModel, spec: &PerturbationSpec) -> Result<CausalModel> {
    perturb_cpd_with(model, spec, &mut trial_rng(spec.seed, 0))
}

/// Adds uniform `[-δ, δ]` radians to every setting angle, to fixed
/// intermediary angles and to η (clamped to `[0, π/2]`). Kappa is unchanged.
pub fn perturb_physics_with<R: Rng + ?Sized>(
    kernel: &AmplitudeKernel,
    spec: &PerturbationSpec,
    rng: &mut R,
) -> Result<AmplitudeKernel> {
    spec.expect(PerturbationTarget::PhysicsLevel)?;
    if spec.delta == 0.0 {
        return Ok(*kernel);
    }
    let d = spec.delta;
    let mut k = *kernel;
    for a in k.geom.alpha.iter_mut().chain(k.geom.beta.iter_mut()) {
        *a += noise(rng, d);
    }
    if let Intermediary::Fixed { alpha, beta } = &mut k.intermediary {
        *alpha += noise(rng, d);
        *beta += noise(rng, d);
    }
    k.geom.eta = (k.geom.eta + noise(rng, d)).clamp(0.0, FRAC_PI_2);
    k.validate()?;
    Ok(k)
}

/// [`perturb_physics_with`] on trial 0 of the perturbation seed.
pub fn perturb_physics(kernel: &AmplitudeKernel, spec: &PerturbationSpec) -> Result<AmplitudeKernel> {
    perturb_physics_with(kernel, spec, &mut trial_rng(spec.seed, 0))
}

/// What a stability run perturbs.
#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    Model(&'a CausalModel),
    Kernel(&'a AmplitudeKernel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementSurvival {
    pub statement: CiStatement,
    /// Fraction of trials in which the statement still held.
    pub survival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Fraction of trials in which every tracked independence still held.
    pub profile: f64,
    pub trials: usize,
    pub tracked: Vec<StatementSurvival>,
    /// Largest per-trial signalling measure, when the subject has EPRB roles.
    pub max_signalling: Option<f64>,
    /// Fraction of trials with signalling measure above the tolerance.
    pub signalling_fraction: Option<f64>,
}

impl StabilityReport {
    /// Survival fraction of one tracked statement, if it is tracked.
    pub fn survival_of(&self, stmt: &CiStatement) -> Option<f64> {
        self.tracked
            .iter()
            .find(|s| s.statement.matches(stmt))
            .map(|s| s.survival)
    }
}

struct Trial {
    held: Vec<bool>,
    signalling: Option<f64>,
}

/// Perturbs the subject `spec.trials` times and records which of its
/// unperturbed unfaithful independences survive.
///
/// Trials are independent and seeded by [`trial_rng`], so the report does not
/// depend on evaluation order.
pub fn stability_profile(subject: Subject<'_>, spec: &PerturbationSpec, opts: &AuditOptions) -> Result<StabilityReport> {
    let base_model = match subject {
        Subject::Model(m) => {
            spec.expect(PerturbationTarget::CpdLevel)?;
            m.clone()
        }
        Subject::Kernel(k) => {
            spec.expect(PerturbationTarget::PhysicsLevel)?;
            k.induced_model()?
        }
    };
    let tracked = audit_with(&base_model, opts)?.unfaithful;

    let run = |trial: usize| -> Result<Trial> {
        let mut rng = trial_rng(spec.seed, trial as u64);
        let (model, kernel_signalling) = match subject {
            Subject::Model(m) => (perturb_cpd_with(m, spec, &mut rng)?, None),
            Subject::Kernel(k) => {
                let pk = perturb_physics_with(k, spec, &mut rng)?;
                (pk.induced_model()?, Some(pk.no_signalling()))
            }
        };
        let joint = model.factorize();
        let held = tracked
            .iter()
            .map(|s| joint.holds_ci(s, opts.tol))
            .collect::<Result<Vec<_>>>()?;
        let signalling = match kernel_signalling {
            Some(s) => Some(s),
            None if model.roles().is_some() => Some(signalling_measure(&model)?),
            None => None,
        };
        Ok(Trial { held, signalling })
    };
    let results = (0..spec.trials)
        .into_par_iter()
        .map(run)
        .collect::<Result<Vec<_>>>()?;

    let n = spec.trials as f64;
    let all_held = results.iter().filter(|t| t.held.iter().all(|&h| h)).count();
    let tracked = tracked
        .into_iter()
        .enumerate()
        .map(|(k, statement)| StatementSurvival {
            statement,
            survival: results.iter().filter(|t| t.held[k]).count() as f64 / n,
        })
        .collect();
    let signals: Vec<f64> = results.iter().filter_map(|t| t.signalling).collect();
    let (max_signalling, signalling_fraction) = if signals.len() == results.len() {
        (
            Some(signals.iter().copied().fold(0.0, f64::max)),
            Some(signals.iter().filter(|&&s| s > opts.tol).count() as f64 / n),
        )
    } else {
        (None, None)
    };

    Ok(StabilityReport {
        profile: all_held as f64 / n,
        trials: spec.trials,
        tracked,
        max_signalling,
        signalling_fraction,
    })
}
