//! Two-wing amplitude composition through an intermediary measurement.
//!
//! The amplitude for final outcomes `(a, b)` at settings `(α_i, β_j)` is
//! written as a sum over the four intermediary outcomes `(μ, ν)` at angles
//! `(α', β')`:
//!
//! ```text
//! A(a,b) = Σ_{μ,ν} w(α'→α_i)(a|μ) · w(β'→β_j)(b|ν) · A_{α'β'}(μ,ν|ψ)
//! ```
//!
//! Each wing factor is a real spin-½ basis change. Partial observation of the
//! intermediary record is modelled by dephasing it: the cross terms between
//! different intermediary outcomes are weighted by `kappa`, so `kappa = 1`
//! recovers the coherent sum and `kappa = 0` an incoherent mixture of paths.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eprb::{outcome_slot, retrocausal_from_joints, signalling, EprbGeometry, SettingJoints, SettingPriors, Sign};
use crate::error::{Error, Result};
use crate::prob::CausalModel;

pub type ComplexAmplitude = Complex64;

/// `⟨a at to_angle | μ at from_angle⟩` in the real rotation convention:
/// equal signs give `cos(Δ/2)`, `⟨+|-⟩ = sin(Δ/2)`, `⟨-|+⟩ = -sin(Δ/2)`.
pub fn wing_amplitude(from_angle: f64, mu: Sign, to_angle: f64, a: Sign) -> ComplexAmplitude {
    let half = (to_angle - from_angle) / 2.0;
    let re = match (a, mu) {
        (Sign::Plus, Sign::Plus) | (Sign::Minus, Sign::Minus) => half.cos(),
        (Sign::Plus, Sign::Minus) => half.sin(),
        (Sign::Minus, Sign::Plus) => -half.sin(),
    };
    Complex64::new(re, 0.0)
}

/// Preparation-basis components of `cos η |+-⟩ - sin η |-+⟩`, indexed `[s][t]`.
fn prepared_state(eta: f64) -> [[ComplexAmplitude; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    [
        [zero, Complex64::new(eta.cos(), 0.0)],
        [Complex64::new(-eta.sin(), 0.0), zero],
    ]
}

/// `⟨μ at angles.0, ν at angles.1 | ψ(η)⟩`, by basis change of the prepared state.
pub fn entangled_amplitude(eta: f64, mu: Sign, nu: Sign, angles: (f64, f64)) -> ComplexAmplitude {
    let psi = prepared_state(eta);
    let mut amp = Complex64::new(0.0, 0.0);
    for s in Sign::BOTH {
        for t in Sign::BOTH {
            amp += wing_amplitude(0.0, s, angles.0, mu)
                * wing_amplitude(0.0, t, angles.1, nu)
                * psi[s.index()][t.index()];
        }
    }
    amp
}

/// Where the intermediary measurement of each wing is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intermediary {
    /// The setting not being measured on each wing.
    Unmeasured,
    /// The same angles for every setting pair.
    Fixed { alpha: f64, beta: f64 },
}

/// Amplitude model of a two-wing experiment with an intermediary measurement
/// of coherence `kappa` (1 = unobserved, 0 = projective).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeKernel {
    pub geom: EprbGeometry,
    pub intermediary: Intermediary,
    pub kappa: f64,
}

impl Default for AmplitudeKernel {
    fn default() -> Self {
        AmplitudeKernel {
            geom: EprbGeometry::standard(),
            intermediary: Intermediary::Unmeasured,
            kappa: 1.0,
        }
    }
}

impl AmplitudeKernel {
    pub fn new(geom: EprbGeometry, intermediary: Intermediary, kappa: f64) -> Result<Self> {
        let k = AmplitudeKernel {
            geom,
            intermediary,
            kappa,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.geom.validate()?;
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::InvalidParameter(format!("kappa {} outside [0, 1]", self.kappa)));
        }
        if let Intermediary::Fixed { alpha, beta } = self.intermediary {
            if !(alpha.is_finite() && beta.is_finite()) {
                return Err(Error::InvalidParameter("intermediary angles must be finite".into()));
            }
        }
        Ok(())
    }

    /// Intermediary angles `(α', β')` used for setting pair `(i, j)`.
    pub fn intermediary_angles(&self, i: usize, j: usize) -> (f64, f64) {
        match self.intermediary {
            Intermediary::Unmeasured => (self.geom.alpha[1 - i], self.geom.beta[1 - j]),
            Intermediary::Fixed { alpha, beta } => (alpha, beta),
        }
    }

    /// The four summands of the composed amplitude, indexed `[μ][ν]`.
    pub fn path_terms(&self, i: usize, j: usize, a: Sign, b: Sign) -> [[ComplexAmplitude; 2]; 2] {
        let (ia, ib) = self.intermediary_angles(i, j);
        let (fa, fb) = (self.geom.alpha[i], self.geom.beta[j]);
        Sign::BOTH.map(|mu| {
            Sign::BOTH.map(|nu| {
                wing_amplitude(ia, mu, fa, a)
                    * wing_amplitude(ib, nu, fb, b)
                    * entangled_amplitude(self.geom.eta, mu, nu, (ia, ib))
            })
        })
    }

    /// Coherent sum over the intermediary outcomes; only defined at `kappa = 1`.
    pub fn composed_amplitude(&self, i: usize, j: usize, a: Sign, b: Sign) -> Result<ComplexAmplitude> {
        if self.kappa != 1.0 {
            return Err(Error::KappaMismatch(self.kappa));
        }
        Ok(self.path_terms(i, j, a, b).iter().flatten().sum())
    }

    /// `Σ D(μ,μ') D(ν,ν') t(μ,ν) t*(μ',ν')` with `D = 1` on the diagonal and `kappa` off it.
    pub fn joint_probability(&self, i: usize, j: usize, a: Sign, b: Sign) -> f64 {
        let t = self.path_terms(i, j, a, b);
        let weight = |x: usize, y: usize| if x == y { 1.0 } else { self.kappa };
        let mut p = 0.0;
        for mu in 0..2 {
            for nu in 0..2 {
                for mu2 in 0..2 {
                    for nu2 in 0..2 {
                        let w = weight(mu, mu2) * weight(nu, nu2);
                        p += w * (t[mu][nu] * t[mu2][nu2].conj()).re;
                    }
                }
            }
        }
        // Rounding can leave a -1e-17 where the exact value is zero.
        p.max(0.0)
    }

    /// Joint outcome distribution at setting pair `(i, j)`.
    pub fn joint(&self, i: usize, j: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for a in Sign::BOTH {
            for b in Sign::BOTH {
                out[outcome_slot(a, b)] = self.joint_probability(i, j, a, b);
            }
        }
        out
    }

    /// Signalling measure of the kernel's statistics; zero when no-signalling holds.
    pub fn no_signalling(&self) -> f64 {
        signalling(self).expect("kernel joints are always available")
    }

    /// Retrocausal λ-model whose λ rows are this kernel's joints, with uniform settings.
    pub fn induced_model(&self) -> Result<CausalModel> {
        let joints = self.all_joints()?;
        retrocausal_from_joints(&joints, SettingPriors::default())
    }
}

impl SettingJoints for AmplitudeKernel {
    fn setting_joint(&self, i: usize, j: usize) -> Result<[f64; 4]> {
        Ok(self.joint(i, j))
    }
}

/// `n` evenly spaced points covering `[0, 1]`, endpoints included exactly.
pub fn uniform_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid needs at least 2 points, got {n}")));
    }
    let last = (n - 1) as f64;
    Ok((0..n).map(|k| k as f64 / last).collect())
}

/// CHSH value at each kappa of the grid.
pub fn chsh_sweep(geom: EprbGeometry, intermediary: Intermediary, kappa_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    kappa_grid
        .iter()
        .map(|&kappa| {
            let kernel = AmplitudeKernel::new(geom, intermediary, kappa)?;
            Ok((kappa, crate::eprb::chsh(&kernel)?))
        })
        .collect()
}
