//! EPRB setups as causal models: the singlet statistics, the retrocausal
//! λ-model in which both settings feed the hidden variable, the common-cause
//! (local) model, CHSH values and the no-signalling measure.
//!
//! Outcome tuples are always ordered `(+,+), (+,-), (-,+), (-,-)` and setting
//! indices are `0` for the first setting of a wing and `1` for the second.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::amplitude::entangled_amplitude;
use crate::error::{Error, Result};
use crate::graph::{Dag, Variable};
use crate::prob::{total_variation, CausalModel, Cpd, DiscreteDistribution, NORMALIZATION_TOL};

pub const PREPARATION: &str = "P";
pub const ALPHA: &str = "α";
pub const BETA: &str = "β";
pub const LAMBDA: &str = "λ";
pub const OUTCOME_A: &str = "A";
pub const OUTCOME_B: &str = "B";

/// Entanglement parameter of the singlet-symmetric state.
pub const SINGLET_ETA: f64 = FRAC_PI_4;

/// Binary measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// Setting angles of both wings and the entanglement parameter η of the state
/// `cos η |+-⟩ - sin η |-+⟩`. All angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprbGeometry {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub eta: f64,
}

impl Default for EprbGeometry {
    fn default() -> Self {
        EprbGeometry::standard()
    }
}

impl EprbGeometry {
    /// α = (0, π/2), β = (π/4, 3π/4), singlet state.
    pub fn standard() -> Self {
        EprbGeometry {
            alpha: [0.0, FRAC_PI_2],
            beta: [FRAC_PI_4, 3.0 * FRAC_PI_4],
            eta: SINGLET_ETA,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.iter().chain(&self.beta).all(|a| a.is_finite()) {
            return Err(Error::InvalidParameter("setting angles must be finite".into()));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta {} outside [0, π/2]", self.eta)));
        }
        Ok(())
    }

    /// Angle between setting `i` of the α wing and setting `j` of the β wing.
    pub fn theta(&self, i: usize, j: usize) -> f64 {
        self.alpha[i] - self.beta[j]
    }

    /// All four setting angles shifted by a common offset.
    pub fn rotated(&self, offset: f64) -> Self {
        EprbGeometry {
            alpha: self.alpha.map(|a| a + offset),
            beta: self.beta.map(|b| b + offset),
            eta: self.eta,
        }
    }

    /// Born probabilities of the four outcome pairs for setting pair `(i, j)`.
    pub fn born_joint(&self, i: usize, j: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for a in Sign::BOTH {
            for b in Sign::BOTH {
                let amp = entangled_amplitude(self.eta, a, b, (self.alpha[i], self.beta[j]));
                out[outcome_slot(a, b)] = amp.norm_sqr();
            }
        }
        out
    }
}

pub(crate) fn outcome_slot(a: Sign, b: Sign) -> usize {
    2 * a.index() + b.index()
}

/// Singlet outcome probabilities at relative angle `theta`:
/// `½sin²(θ/2)` for equal outcomes and `½cos²(θ/2)` for opposite ones.
pub fn singlet_joint(theta: f64) -> [f64; 4] {
    let same = 0.5 * (theta / 2.0).sin().powi(2);
    let diff = 0.5 * (theta / 2.0).cos().powi(2);
    [same, diff, diff, same]
}

/// `P(same) - P(different)` for a four-outcome joint.
pub fn correlator(joint: &[f64; 4]) -> f64 {
    joint[0] - joint[1] - joint[2] + joint[3]
}

/// Anything that yields `P(A,B | α_i, β_j)` for the four setting pairs.
pub trait SettingJoints {
    fn setting_joint(&self, i: usize, j: usize) -> Result<[f64; 4]>;

    fn all_joints(&self) -> Result<[[[f64; 4]; 2]; 2]> {
        Ok([
            [self.setting_joint(0, 0)?, self.setting_joint(0, 1)?],
            [self.setting_joint(1, 0)?, self.setting_joint(1, 1)?],
        ])
    }
}

/// Quantum predictions for the state and settings of the geometry.
impl SettingJoints for EprbGeometry {
    fn setting_joint(&self, i: usize, j: usize) -> Result<[f64; 4]> {
        Ok(self.born_joint(i, j))
    }
}

/// CHSH value `|E₁₁ - E₁₂ + E₂₁ + E₂₂|`.
pub fn chsh(provider: &impl SettingJoints) -> Result<f64> {
    let e = provider.all_joints()?.map(|row| row.map(|j| correlator(&j)));
    Ok((e[0][0] - e[0][1] + e[1][0] + e[1][1]).abs())
}

/// Largest total-variation change of one wing's outcome distribution when the
/// other wing's setting changes, with the own setting held fixed. Zero means
/// no signalling.
pub fn signalling(provider: &impl SettingJoints) -> Result<f64> {
    let joints = provider.all_joints()?;
    let a_marginal = |j: &[f64; 4]| [j[0] + j[1], j[2] + j[3]];
    let b_marginal = |j: &[f64; 4]| [j[0] + j[2], j[1] + j[3]];
    let mut worst: f64 = 0.0;
    for own in [0, 1] {
        let a = total_variation(&a_marginal(&joints[own][0]), &a_marginal(&joints[own][1]))?;
        let b = total_variation(&b_marginal(&joints[0][own]), &b_marginal(&joints[1][own]))?;
        worst = worst.max(a).max(b);
    }
    Ok(worst)
}

/// Which vertices of a model play the EPRB roles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EprbRoles {
    pub alpha: String,
    pub beta: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    pub preparation: Option<String>,
}

impl Default for EprbRoles {
    fn default() -> Self {
        EprbRoles {
            alpha: ALPHA.into(),
            beta: BETA.into(),
            a: OUTCOME_A.into(),
            b: OUTCOME_B.into(),
            lambda: Some(LAMBDA.into()),
            preparation: Some(PREPARATION.into()),
        }
    }
}

impl EprbRoles {
    /// Settings and outcomes must be binary vertices; λ and P must exist when named.
    pub fn validate(&self, dag: &Dag) -> Result<()> {
        for name in [&self.alpha, &self.beta, &self.a, &self.b] {
            let card = dag.variable(name)?.cardinality();
            if card != 2 {
                return Err(Error::Structure(format!(
                    "EPRB role `{name}` needs two outcomes, has {card}"
                )));
            }
        }
        for name in self.lambda.iter().chain(&self.preparation) {
            dag.index_of(name)?;
        }
        Ok(())
    }
}

/// Setting statistics `P(A,B | α, β)` read off a model's factorized joint.
pub struct ModelJoints<'a> {
    roles: &'a EprbRoles,
    alpha: &'a Variable,
    beta: &'a Variable,
    joint: DiscreteDistribution,
}

impl<'a> ModelJoints<'a> {
    pub fn new(model: &'a CausalModel) -> Result<Self> {
        let roles = model.roles().ok_or(Error::MissingDesignations)?;
        Ok(ModelJoints {
            roles,
            alpha: model.dag().variable(&roles.alpha)?,
            beta: model.dag().variable(&roles.beta)?,
            joint: model
                .factorize()
                .marginalize(&[&roles.alpha, &roles.beta, &roles.a, &roles.b])?,
        })
    }

    pub fn joint(&self) -> &DiscreteDistribution {
        &self.joint
    }
}

impl SettingJoints for ModelJoints<'_> {
    fn setting_joint(&self, i: usize, j: usize) -> Result<[f64; 4]> {
        let evidence = [
            (self.roles.alpha.as_str(), self.alpha.domain[i].as_str()),
            (self.roles.beta.as_str(), self.beta.domain[j].as_str()),
        ];
        let cond = self.joint.condition(&evidence)?;
        // Remaining variables keep declaration order; the outcome table must be A-major.
        let a_first = cond.variables()[0].name == self.roles.a;
        let t = cond.table();
        Ok(if a_first {
            [t[0], t[1], t[2], t[3]]
        } else {
            [t[0], t[2], t[1], t[3]]
        })
    }
}

/// CHSH value of a model carrying EPRB role designations.
pub fn model_chsh(model: &CausalModel) -> Result<f64> {
    chsh(&ModelJoints::new(model)?)
}

/// No-signalling measure of a model carrying EPRB role designations.
pub fn signalling_measure(model: &CausalModel) -> Result<f64> {
    signalling(&ModelJoints::new(model)?)
}

/// Prior probabilities of the two settings on each wing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingPriors {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl Default for SettingPriors {
    fn default() -> Self {
        SettingPriors {
            alpha: [0.5, 0.5],
            beta: [0.5, 0.5],
        }
    }
}

fn setting_variables() -> (Variable, Variable) {
    (
        Variable::new(ALPHA, &["α1", "α2"]),
        Variable::new(BETA, &["β1", "β2"]),
    )
}

/// λ outcome labels: one beable sign per wing.
pub const LAMBDA_BEABLES: [&str; 4] = ["++", "+-", "-+", "--"];

/// Graph in which both settings and the preparation are parents of λ, and
/// λ is the only parent of each outcome.
pub fn retrocausal_dag() -> Dag {
    let (alpha, beta) = setting_variables();
    Dag::new(
        vec![
            Variable::new(PREPARATION, &["ψ"]),
            alpha,
            beta,
            Variable::new(LAMBDA, &LAMBDA_BEABLES),
            Variable::binary(OUTCOME_A),
            Variable::binary(OUTCOME_B),
        ],
        &[
            (PREPARATION, LAMBDA),
            (ALPHA, LAMBDA),
            (BETA, LAMBDA),
            (LAMBDA, OUTCOME_A),
            (LAMBDA, OUTCOME_B),
        ],
    )
    .expect("static graph")
}

/// Graph in which λ is a common cause and each outcome depends only on its
/// own setting and λ.
pub fn common_cause_dag(lambda_cardinality: usize) -> Result<Dag> {
    if lambda_cardinality == 0 {
        return Err(Error::InvalidParameter("λ needs at least one value".into()));
    }
    let labels: Vec<String> = (1..=lambda_cardinality).map(|k| format!("λ{k}")).collect();
    let (alpha, beta) = setting_variables();
    Dag::new(
        vec![
            Variable::new(PREPARATION, &["ψ"]),
            alpha,
            beta,
            Variable::new(LAMBDA, &labels),
            Variable::binary(OUTCOME_A),
            Variable::binary(OUTCOME_B),
        ],
        &[
            (PREPARATION, LAMBDA),
            (ALPHA, OUTCOME_A),
            (LAMBDA, OUTCOME_A),
            (BETA, OUTCOME_B),
            (LAMBDA, OUTCOME_B),
        ],
    )
}

fn check_prior(name: &str, p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidParameter(format!("{name} prior is not a probability vector")));
    }
    Ok(())
}

/// Retrocausal model whose λ table carries the given per-setting joints:
/// λ = (s, t) is drawn with probability `joints[i][j][(s,t)]` and the
/// outcomes read λ's components directly.
pub fn retrocausal_from_joints(joints: &[[[f64; 4]; 2]; 2], priors: SettingPriors) -> Result<CausalModel> {
    check_prior("α", &priors.alpha)?;
    check_prior("β", &priors.beta)?;
    let lambda_rows = (0..2)
        .flat_map(|i| (0..2).map(move |j| joints[i][j].to_vec()))
        .collect();
    let plus = vec![1.0, 0.0];
    let minus = vec![0.0, 1.0];
    let cpds = vec![
        Cpd::root(PREPARATION, vec![1.0]),
        Cpd::root(ALPHA, priors.alpha.to_vec()),
        Cpd::root(BETA, priors.beta.to_vec()),
        Cpd::new(LAMBDA, &[PREPARATION, ALPHA, BETA], lambda_rows),
        Cpd::new(
            OUTCOME_A,
            &[LAMBDA],
            vec![plus.clone(), plus.clone(), minus.clone(), minus.clone()],
        ),
        Cpd::new(OUTCOME_B, &[LAMBDA], vec![plus.clone(), minus.clone(), plus, minus]),
    ];
    CausalModel::new(retrocausal_dag(), cpds)?.with_roles(EprbRoles::default())
}

/// Retrocausal λ-model reproducing the Born statistics of the geometry's state.
/// At η = π/4 the λ rows are exactly [`singlet_joint`] of each θᵢⱼ.
pub fn retrocausal_model(geom: &EprbGeometry, priors: SettingPriors) -> Result<CausalModel> {
    geom.validate()?;
    let joints = if geom.eta == SINGLET_ETA {
        [0, 1].map(|i| [0, 1].map(|j| singlet_joint(geom.theta(i, j))))
    } else {
        geom.all_joints()?
    };
    retrocausal_from_joints(&joints, priors)
}

/// Retrocausal model at the standard geometry with hand-tuned λ rows so that
/// `P(A=+)` is 3/5 under β₁ and 2/5 under β₂, for either α setting. The
/// β-wing marginals are untouched, so the signalling measure is exactly 0.2.
pub fn fragile_signalling_model() -> Result<CausalModel> {
    let shift = 0.05;
    let geom = EprbGeometry::standard();
    let joints = [0, 1].map(|i| {
        [0, 1].map(|j| {
            let [pp, pm, mp, mm] = singlet_joint(geom.theta(i, j));
            let s = if j == 0 { shift } else { -shift };
            [pp + s, pm + s, mp - s, mm - s]
        })
    });
    retrocausal_from_joints(&joints, SettingPriors::default())
}

/// Response tables of a local common-cause model.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonCauseParams {
    /// Distribution of λ.
    pub lambda: Vec<f64>,
    /// `a_plus[i][k] = P(A=+ | α_i, λ_k)`.
    pub a_plus: [Vec<f64>; 2],
    /// `b_plus[j][k] = P(B=+ | β_j, λ_k)`.
    pub b_plus: [Vec<f64>; 2],
    pub priors: SettingPriors,
}

impl CommonCauseParams {
    /// λ uniform over two values, A = λ and B = ¬λ regardless of settings.
    pub fn bertlmann_socks() -> Self {
        CommonCauseParams {
            lambda: vec![0.5, 0.5],
            a_plus: [vec![1.0, 0.0], vec![1.0, 0.0]],
            b_plus: [vec![0.0, 1.0], vec![0.0, 1.0]],
            priors: SettingPriors::default(),
        }
    }

    /// Random λ distribution and response probabilities.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, lambda_cardinality: usize) -> Self {
        let mut resp = || [0, 1].map(|_| (0..lambda_cardinality).map(|_| rng.gen::<f64>()).collect());
        let a_plus = resp();
        let b_plus = resp();
        CommonCauseParams {
            lambda: crate::prob::random_row(rng, lambda_cardinality, None),
            a_plus,
            b_plus,
            priors: SettingPriors::default(),
        }
    }
}

/// Local common-cause model: λ depends only on the preparation, each outcome
/// only on its own setting and λ.
pub fn common_cause_model(lambda_cardinality: usize, params: &CommonCauseParams) -> Result<CausalModel> {
    let dag = common_cause_dag(lambda_cardinality)?;
    let k = lambda_cardinality;
    let wrong = |what: &str| Error::Structure(format!("{what} must have {k} entries per setting"));
    if params.lambda.len() != k {
        return Err(Error::Structure(format!("λ distribution must have {k} entries")));
    }
    if params.a_plus.iter().any(|r| r.len() != k) {
        return Err(wrong("P(A=+|α,λ)"));
    }
    if params.b_plus.iter().any(|r| r.len() != k) {
        return Err(wrong("P(B=+|β,λ)"));
    }
    check_prior("α", &params.priors.alpha)?;
    check_prior("β", &params.priors.beta)?;
    let response = |table: &[Vec<f64>; 2]| -> Vec<Vec<f64>> {
        table
            .iter()
            .flat_map(|row| row.iter().map(|&p| vec![p, 1.0 - p]))
            .collect()
    };
    let cpds = vec![
        Cpd::root(PREPARATION, vec![1.0]),
        Cpd::root(ALPHA, params.priors.alpha.to_vec()),
        Cpd::root(BETA, params.priors.beta.to_vec()),
        Cpd::new(LAMBDA, &[PREPARATION], vec![params.lambda.clone()]),
        Cpd::new(OUTCOME_A, &[ALPHA, LAMBDA], response(&params.a_plus)),
        Cpd::new(OUTCOME_B, &[BETA, LAMBDA], response(&params.b_plus)),
    ];
    CausalModel::new(dag, cpds)?.with_roles(EprbRoles::default())
}
