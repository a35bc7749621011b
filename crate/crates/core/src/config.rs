//! Run configuration shared by both solver formulations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::GridField;

/// Family parameter of the b-equation m_t = -(m_x u + b m u_x).
/// b = 2 is Camassa-Holm, b = 3 is Degasperis-Procesi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BParam(pub f64);

impl BParam {
    pub const CAMASSA_HOLM: BParam = BParam(2.0);
    pub const DEGASPERIS_PROCESI: BParam = BParam(3.0);

    pub fn validate(&self) -> Result<()> {
        if self.0.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("b must be finite, got {}", self.0)))
        }
    }
}

/// Which realization of the conjugated operator P_φ the geodesic solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PStrategy {
    /// u = v ∘ φ⁻¹, apply P spectrally, compose back (spectral accuracy).
    InverseComposition,
    /// Conjugated-derivative recursion with centered finite differences and a
    /// cyclic tridiagonal solve of the conjugated Helmholtz operator; never
    /// needs φ⁻¹ (second-order cross-check path).
    ConjugatedOperator,
}

impl PStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            PStrategy::InverseComposition => "inverse-composition",
            PStrategy::ConjugatedOperator => "conjugated-operator",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "inverse-composition" => Ok(PStrategy::InverseComposition),
            "conjugated-operator" => Ok(PStrategy::ConjugatedOperator),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy '{other}' (expected inverse-composition or conjugated-operator)"
            ))),
        }
    }
}

/// Termination guards watched once per time step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Guards {
    /// Blow-up bound on sup|u| (or sup|v| for the geodesic system).
    pub max_amp: f64,
    /// Breaking threshold on min φₓ for the geodesic system.
    pub min_slope: f64,
    /// Resolution guard: halt once the outer band of the resolved spectrum
    /// (modes N/4 < |k| <= N/3) rises above this fraction of the peak
    /// coefficient. For this family the spectral width collapsing onto the
    /// grid cutoff is the numerical signature of approaching wave breaking;
    /// past that point the collocation representation is no longer faithful
    /// and every conservation diagnostic measures junk.
    pub spectral_tail: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_amp: 1e3,
            min_slope: 1e-3,
            spectral_tail: 1e-9,
        }
    }
}

/// One Fourier mode of the initial condition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Mode {
    pub k: usize,
    pub cos: f64,
    pub sin: f64,
}

/// Initial condition as a short cosine/sine table plus a constant.
#[derive(Debug, Clone, Default, Serialize)]
pub struct InitialCondition {
    pub constant: f64,
    pub modes: Vec<Mode>,
}

impl InitialCondition {
    pub fn single_mode(k: usize, cos: f64, sin: f64) -> Self {
        Self {
            constant: 0.0,
            modes: vec![Mode { k, cos, sin }],
        }
    }

    pub fn to_field(&self, n: usize) -> Result<GridField> {
        GridField::from_fn(n, |x| {
            self.constant
                + self
                    .modes
                    .iter()
                    .map(|m| {
                        let th = 2.0 * std::f64::consts::PI * m.k as f64 * x;
                        m.cos * th.cos() + m.sin * th.sin()
                    })
                    .sum::<f64>()
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub b: BParam,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub strategy: PStrategy,
    pub dealias: bool,
    pub sample_every: usize,
    pub guards: Guards,
    pub u0: InitialCondition,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            b: BParam::DEGASPERIS_PROCESI,
            n: 256,
            dt: 1e-3,
            t_end: 1.0,
            strategy: PStrategy::InverseComposition,
            dealias: true,
            sample_every: 10,
            guards: Guards::default(),
            u0: InitialCondition::single_mode(1, 0.0, 0.2),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.b.validate()?;
        if self.n < GridField::MIN_POINTS || self.n % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "n = {} must be even and >= {}",
                self.n,
                GridField::MIN_POINTS
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt = {} must be > 0", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be > 0",
                self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidConfig("sample_every must be >= 1".into()));
        }
        if !(self.guards.max_amp > 0.0)
            || !(self.guards.min_slope > 0.0)
            || !(self.guards.spectral_tail > 0.0)
        {
            return Err(Error::InvalidConfig(
                "guards must be strictly positive".into(),
            ));
        }
        for m in &self.u0.modes {
            if m.k > self.n / 3 {
                return Err(Error::InvalidConfig(format!(
                    "initial mode k = {} exceeds the dealiasing band n/3 = {}",
                    m.k,
                    self.n / 3
                )));
            }
            if !m.cos.is_finite() || !m.sin.is_finite() {
                return Err(Error::InvalidConfig("non-finite mode coefficient".into()));
            }
        }
        if !self.u0.constant.is_finite() {
            return Err(Error::InvalidConfig("non-finite constant term".into()));
        }
        Ok(())
    }

    /// Number of fixed RK4 steps covering [0, t_end].
    pub fn num_steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }

    pub fn initial_field(&self) -> Result<GridField> {
        self.u0.to_field(self.n)
    }
}

/// How a trajectory integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TerminationStatus {
    Completed,
    BreakingDetected,
    BlowUp,
}

impl TerminationStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            TerminationStatus::Completed => "completed",
            TerminationStatus::BreakingDetected => "breaking-detected",
            TerminationStatus::BlowUp => "blow-up",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut cfg = SolverConfig::default();
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = SolverConfig::default();
        cfg.n = 31;
        assert!(cfg.validate().is_err());

        let mut cfg = SolverConfig::default();
        cfg.u0 = InitialCondition::single_mode(100, 1.0, 0.0);
        assert!(cfg.validate().is_err());

        let mut cfg = SolverConfig::default();
        cfg.sample_every = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn initial_field_realizes_the_mode_table() {
        let cfg = SolverConfig::default();
        let u0 = cfg.initial_field().unwrap();
        let expect = GridField::from_fn(cfg.n, |x| {
            0.2 * (2.0 * std::f64::consts::PI * x).sin()
        })
        .unwrap();
        assert!(u0.sup_distance(&expect) < 1e-14);
    }
}
