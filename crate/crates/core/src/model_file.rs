//! TOML model description: flight condition, dimensionless derivatives,
//! inner-loop gains and the outer-loop controller.
//!
//! Tables other than the four known ones are ignored, so a model dump that
//! appends computed matrices can be read back as a model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::aircraft::{AxisDerivatives, DimensionlessDerivatives, FlightCondition};
use crate::error::{Error, Result};
use crate::lti::TransferFunction;

/// Bundled example aircraft.
pub const BUNDLED_MODEL: &str = include_str!("../data/aircraft.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub flight_condition: FlightCondition,
    pub derivatives: DerivativeTable,
    #[serde(default)]
    pub inner_loop: InnerLoop,
    #[serde(default)]
    pub controller: ControllerConfig,
}

impl Default for ModelFile {
    fn default() -> Self {
        Self {
            flight_condition: FlightCondition::default(),
            derivatives: DimensionlessDerivatives::example_aircraft().into(),
            inner_loop: InnerLoop::default(),
            controller: ControllerConfig::default(),
        }
    }
}

impl ModelFile {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_MODEL).expect("bundled model parses")
    }

    /// Parses and validates; errors carry the TOML line and field name.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| Error::ModelFile(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ModelFile(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::ModelFile(msg) => Error::ModelFile(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.flight_condition.validate()?;
        self.derivatives().validate()?;
        self.inner_loop.validate()?;
        self.controller.transfer_function().map(|_| ())
    }

    pub fn derivatives(&self) -> DimensionlessDerivatives {
        self.derivatives.into()
    }
}

/// Flat `X_u … M_eta` keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeTable {
    #[serde(rename = "X_u")]
    pub x_u: f64,
    #[serde(rename = "X_w")]
    pub x_w: f64,
    #[serde(rename = "X_wdot")]
    pub x_wdot: f64,
    #[serde(rename = "X_q")]
    pub x_q: f64,
    #[serde(rename = "X_eta")]
    pub x_eta: f64,
    #[serde(rename = "Z_u")]
    pub z_u: f64,
    #[serde(rename = "Z_w")]
    pub z_w: f64,
    #[serde(rename = "Z_wdot")]
    pub z_wdot: f64,
    #[serde(rename = "Z_q")]
    pub z_q: f64,
    #[serde(rename = "Z_eta")]
    pub z_eta: f64,
    #[serde(rename = "M_u")]
    pub m_u: f64,
    #[serde(rename = "M_w")]
    pub m_w: f64,
    #[serde(rename = "M_wdot")]
    pub m_wdot: f64,
    #[serde(rename = "M_q")]
    pub m_q: f64,
    #[serde(rename = "M_eta")]
    pub m_eta: f64,
}

impl From<DerivativeTable> for DimensionlessDerivatives {
    fn from(t: DerivativeTable) -> Self {
        Self {
            x: AxisDerivatives { u: t.x_u, w: t.x_w, w_dot: t.x_wdot, q: t.x_q, eta: t.x_eta },
            z: AxisDerivatives { u: t.z_u, w: t.z_w, w_dot: t.z_wdot, q: t.z_q, eta: t.z_eta },
            m: AxisDerivatives { u: t.m_u, w: t.m_w, w_dot: t.m_wdot, q: t.m_q, eta: t.m_eta },
        }
    }
}

impl From<DimensionlessDerivatives> for DerivativeTable {
    fn from(d: DimensionlessDerivatives) -> Self {
        Self {
            x_u: d.x.u,
            x_w: d.x.w,
            x_wdot: d.x.w_dot,
            x_q: d.x.q,
            x_eta: d.x.eta,
            z_u: d.z.u,
            z_w: d.z.w,
            z_wdot: d.z.w_dot,
            z_q: d.z.q,
            z_eta: d.z.eta,
            m_u: d.m.u,
            m_w: d.m.w,
            m_wdot: d.m.w_dot,
            m_q: d.m.q,
            m_eta: d.m.eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerLoop {
    pub kq: f64,
    pub kalpha: f64,
}

impl Default for InnerLoop {
    fn default() -> Self {
        Self { kq: 1.6, kalpha: 1.72 }
    }
}

impl InnerLoop {
    pub fn validate(&self) -> Result<()> {
        if self.kq.is_finite() && self.kalpha.is_finite() {
            Ok(())
        } else {
            Err(Error::Invalid("inner-loop gains must be finite".into()))
        }
    }
}

/// `gain · Π(s - zᵢ) Π(s² + aⱼs + bⱼ) / Π(s - pᵢ) Π(s² + aₖs + bₖ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub gain: f64,
    #[serde(default)]
    pub zeros: Vec<f64>,
    #[serde(default)]
    pub zero_quadratics: Vec<[f64; 2]>,
    #[serde(default)]
    pub poles: Vec<f64>,
    #[serde(default)]
    pub pole_quadratics: Vec<[f64; 2]>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gain: 3.14,
            zeros: vec![-5.14, -0.615, -0.0171],
            zero_quadratics: Vec::new(),
            poles: vec![-0.356, -0.0175],
            pole_quadratics: vec![[7.22, 13.6]],
        }
    }
}

impl ControllerConfig {
    pub fn transfer_function(&self) -> Result<TransferFunction> {
        let zeros = roots_of(&self.zeros, &self.zero_quadratics);
        let poles = roots_of(&self.poles, &self.pole_quadratics);
        TransferFunction::from_zpk(zeros, poles, self.gain)
    }
}

fn roots_of(real: &[f64], quadratics: &[[f64; 2]]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = real.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    for &[a, b] in quadratics {
        let disc = 0.25 * a * a - b;
        if disc >= 0.0 {
            let s = disc.sqrt();
            out.push(Complex64::new(-0.5 * a + s, 0.0));
            out.push(Complex64::new(-0.5 * a - s, 0.0));
        } else {
            let s = (-disc).sqrt();
            out.push(Complex64::new(-0.5 * a, s));
            out.push(Complex64::new(-0.5 * a, -s));
        }
    }
    out
}
