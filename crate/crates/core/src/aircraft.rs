//! Linear longitudinal aircraft model with an uncertain centre-of-gravity
//! position.
//!
//! State vector `x = [u, w, q, θ]`, input elevator `η`, outputs `[θ, q, α]`
//! with `α = w / V0`. A rearward c.g. shift `Δ` (metres) moves the pitching
//! moment derivatives by `-Z̊_• Δ`, which turns into affine perturbations
//! `A + Δ Q_A`, `B + Δ Q_B` of the state-space model.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::StateSpace;

pub const STATE_NAMES: [&str; 4] = ["u", "w", "q", "theta"];
pub const OUTPUT_NAMES: [&str; 3] = ["theta", "q", "alpha"];
pub const INPUT_NAMES: [&str; 1] = ["eta"];

/// Row of the pitch-acceleration equation in the state vector.
pub const PITCH_ROW: usize = 2;

/// Default gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightCondition {
    /// Airspeed, m/s.
    #[serde(rename = "V0")]
    pub v0: f64,
    /// Mass, kg.
    #[serde(rename = "m")]
    pub mass: f64,
    /// Pitch inertia, kg m².
    #[serde(rename = "Iy")]
    pub iy: f64,
    /// Air density, kg/m³.
    pub rho: f64,
    /// Wing area, m².
    #[serde(rename = "S")]
    pub wing_area: f64,
    /// Mean aerodynamic chord, m.
    #[serde(rename = "c")]
    pub chord: f64,
    #[serde(default = "default_gravity")]
    pub g: f64,
    /// Equilibrium flight path angle, rad.
    #[serde(default)]
    pub gamma_e: f64,
    /// Equilibrium angle of attack, rad.
    #[serde(default)]
    pub alpha_e: f64,
}

fn default_gravity() -> f64 {
    GRAVITY
}

impl Default for FlightCondition {
    /// Sea-level condition of the canard-configured combat aircraft example.
    fn default() -> Self {
        Self {
            v0: 100.0,
            mass: 12_500.0,
            iy: 105_592.0,
            rho: 1.225,
            wing_area: 50.0,
            chord: 5.7,
            g: GRAVITY,
            gamma_e: 0.0,
            alpha_e: 0.0,
        }
    }
}

impl FlightCondition {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("V0", self.v0),
            ("m", self.mass),
            ("Iy", self.iy),
            ("rho", self.rho),
            ("S", self.wing_area),
            ("c", self.chord),
            ("g", self.g),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("flight condition {name} = {v} must be positive")));
            }
        }
        for (name, v) in [("gamma_e", self.gamma_e), ("alpha_e", self.alpha_e)] {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("flight condition {name} is not finite")));
            }
        }
        Ok(())
    }
}

/// Derivatives of one force or moment with respect to `u, w, ẇ, q, η`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AxisDerivatives {
    pub u: f64,
    pub w: f64,
    pub w_dot: f64,
    pub q: f64,
    pub eta: f64,
}

impl AxisDerivatives {
    fn all_finite(&self) -> bool {
        [self.u, self.w, self.w_dot, self.q, self.eta].iter().all(|v| v.is_finite())
    }
}

/// Dimensionless stability and control derivatives (`η` is the elevator, rad).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DimensionlessDerivatives {
    pub x: AxisDerivatives,
    pub z: AxisDerivatives,
    pub m: AxisDerivatives,
}

impl DimensionlessDerivatives {
    pub fn example_aircraft() -> Self {
        Self {
            x: AxisDerivatives { u: 0.050, w: 0.260, w_dot: 0.0, q: 0.0, eta: 0.0 },
            z: AxisDerivatives { u: -1.200, w: -2.800, w_dot: -0.700, q: -1.200, eta: -0.04 },
            m: AxisDerivatives { u: 0.003, w: 0.280, w_dot: 0.380, q: -0.500, eta: 0.160 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.all_finite() && self.z.all_finite() && self.m.all_finite() {
            Ok(())
        } else {
            Err(Error::Invalid("dimensionless derivatives must be finite".into()))
        }
    }
}

/// SI-unit derivatives (X̊_u = ∂X/∂u and so on).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DimensionalDerivatives {
    pub x: AxisDerivatives,
    pub z: AxisDerivatives,
    pub m: AxisDerivatives,
}

/// Standard normalisation of longitudinal derivatives.
///
/// With `k = ½ρV0S`: force derivatives in `u, w` scale by `k`, in `q` by `kc`,
/// in `ẇ` by `kc/V0`, in `η` by `kV0`. Moment derivatives carry one more `c`.
pub fn dimensionalize(fc: &FlightCondition, d: &DimensionlessDerivatives) -> DimensionalDerivatives {
    let k = 0.5 * fc.rho * fc.v0 * fc.wing_area;
    let c = fc.chord;
    let force = |a: AxisDerivatives, extra: f64| AxisDerivatives {
        u: k * extra * a.u,
        w: k * extra * a.w,
        w_dot: k * c / fc.v0 * extra * a.w_dot,
        q: k * c * extra * a.q,
        eta: k * fc.v0 * extra * a.eta,
    };
    DimensionalDerivatives { x: force(d.x, 1.0), z: force(d.z, 1.0), m: force(d.m, c) }
}

/// Coefficient matrices of `Mass ẋ = A_t x + B_t η`.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalMatrices {
    pub mass: DMatrix<f64>,
    pub a_t: DMatrix<f64>,
    pub b_t: DMatrix<f64>,
}

pub fn assemble_longitudinal(fc: &FlightCondition, dd: &DimensionalDerivatives) -> Result<LongitudinalMatrices> {
    let m = fc.mass;
    let heave = m - dd.z.w_dot;
    if !(heave > 0.0) {
        return Err(Error::SingularMass(heave));
    }
    #[rustfmt::skip]
    let mass = DMatrix::from_row_slice(4, 4, &[
        m,   -dd.x.w_dot, 0.0,   0.0,
        0.0, heave,       0.0,   0.0,
        0.0, -dd.m.w_dot, fc.iy, 0.0,
        0.0, 0.0,         0.0,   1.0,
    ]);
    let mg = m * fc.g;
    #[rustfmt::skip]
    let a_t = DMatrix::from_row_slice(4, 4, &[
        dd.x.u, dd.x.w, dd.x.q,             -mg * fc.gamma_e.cos(),
        dd.z.u, dd.z.w, dd.z.q + m * fc.v0, -mg * fc.gamma_e.sin(),
        dd.m.u, dd.m.w, dd.m.q,             0.0,
        0.0,    0.0,    1.0,                0.0,
    ]);
    let b_t = DMatrix::from_column_slice(4, 1, &[dd.x.eta, dd.z.eta, dd.m.eta, 0.0]);
    Ok(LongitudinalMatrices { mass, a_t, b_t })
}

/// Closed-form inverse of the structured mass matrix.
pub fn mass_inverse(fc: &FlightCondition, dd: &DimensionalDerivatives) -> Result<DMatrix<f64>> {
    let m = fc.mass;
    let heave = m - dd.z.w_dot;
    if !(heave > 0.0) {
        return Err(Error::SingularMass(heave));
    }
    #[rustfmt::skip]
    let inv = DMatrix::from_row_slice(4, 4, &[
        1.0 / m, dd.x.w_dot / (m * heave),     0.0,          0.0,
        0.0,     1.0 / heave,                  0.0,          0.0,
        0.0,     dd.m.w_dot / (fc.iy * heave), 1.0 / fc.iy,  0.0,
        0.0,     0.0,                          0.0,          1.0,
    ]);
    Ok(inv)
}

/// Output map `[θ, q, α]`.
pub fn output_matrix(v0: f64) -> DMatrix<f64> {
    #[rustfmt::skip]
    let c = DMatrix::from_row_slice(3, 4, &[
        0.0, 0.0,      0.0, 1.0,
        0.0, 0.0,      1.0, 0.0,
        0.0, 1.0 / v0, 0.0, 0.0,
    ]);
    c
}

/// `A = Mass⁻¹ A_t`, `B = Mass⁻¹ B_t`, outputs `[θ, q, α]`, `D = 0`.
pub fn to_state_space(lm: &LongitudinalMatrices, v0: f64) -> Result<StateSpace> {
    let lu = lm.mass.clone().lu();
    let a = lu.solve(&lm.a_t).ok_or(Error::SingularMass(f64::NAN))?;
    let b = lu.solve(&lm.b_t).ok_or(Error::SingularMass(f64::NAN))?;
    StateSpace::new(a, b, output_matrix(v0), DMatrix::zeros(3, 1))?.with_names(
        &STATE_NAMES,
        &INPUT_NAMES,
        &OUTPUT_NAMES,
    )
}

/// Static output feedback row `[0, Kq, Kα]` acting on `[θ, q, α]`.
pub fn inner_loop_gain(kq: f64, kalpha: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, 3, &[0.0, kq, kalpha])
}

/// Closes `η = η_cmd - Kq q - Kα α` and keeps only the attitude output θ.
pub fn inner_loop_stabilize(plant: &StateSpace, kq: f64, kalpha: f64) -> Result<StateSpace> {
    if plant.n_outputs() != 3 || plant.n_inputs() != 1 {
        return Err(Error::Dimension("inner loop expects outputs [theta, q, alpha] and one input".into()));
    }
    let k = inner_loop_gain(kq, kalpha);
    let a = plant.a() - plant.b() * &k * plant.c();
    let augmented = StateSpace::new(a, plant.b().clone(), plant.c().clone(), plant.d().clone())?;
    let mut out = augmented.select_outputs(&[0])?;
    out.state_names = plant.state_names.clone();
    out.input_names = plant.input_names.clone();
    out.output_names = vec![plant.output_names[0].clone()];
    Ok(out)
}

/// Pitching-moment derivatives about a c.g. moved rearward by `delta` metres.
pub fn uncertain_derivatives(dd: &DimensionalDerivatives, delta: f64) -> DimensionalDerivatives {
    let z = dd.z;
    let m = dd.m;
    DimensionalDerivatives {
        x: dd.x,
        z: dd.z,
        m: AxisDerivatives {
            u: m.u - z.u * delta,
            w: m.w - z.w * delta,
            w_dot: m.w_dot - z.w_dot * delta,
            q: m.q - z.q * delta,
            eta: m.eta - z.eta * delta,
        },
    }
}

/// Rank-1 perturbation matrices of the open-loop model.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub q_a: DMatrix<f64>,
    pub q_b: DMatrix<f64>,
    /// `m / [Iy (m - Z̊_ẇ)]`.
    pub mu: f64,
}

pub fn perturbation_matrices(fc: &FlightCondition, dd: &DimensionalDerivatives) -> Result<Perturbation> {
    let heave = fc.mass - dd.z.w_dot;
    if !(heave > 0.0) {
        return Err(Error::SingularMass(heave));
    }
    let mu = fc.mass / (fc.iy * heave);
    let z = dd.z;
    let mut q_a = DMatrix::zeros(4, 4);
    q_a[(PITCH_ROW, 0)] = -mu * z.u;
    q_a[(PITCH_ROW, 1)] = -mu * z.w;
    q_a[(PITCH_ROW, 2)] = -mu * (z.q + z.w_dot * fc.v0);
    let mut q_b = DMatrix::zeros(4, 1);
    q_b[(PITCH_ROW, 0)] = -mu * z.eta;
    Ok(Perturbation { q_a, q_b, mu })
}

/// Exact model at c.g. shift `delta`, rebuilt from perturbed derivatives.
pub fn rebuild(fc: &FlightCondition, dd: &DimensionalDerivatives, delta: f64) -> Result<StateSpace> {
    let shifted = uncertain_derivatives(dd, delta);
    to_state_space(&assemble_longitudinal(fc, &shifted)?, fc.v0)
}

/// State-space model with affine uncertainty `A + Δ Q_A`, `B + Δ Q_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainPlant {
    pub nominal: StateSpace,
    pub q_a: DMatrix<f64>,
    pub q_b: DMatrix<f64>,
    pub mu: f64,
}

impl UncertainPlant {
    /// Open-loop aircraft with outputs `[θ, q, α]`.
    pub fn from_aircraft(fc: &FlightCondition, d: &DimensionlessDerivatives) -> Result<Self> {
        fc.validate()?;
        d.validate()?;
        let dd = dimensionalize(fc, d);
        let nominal = to_state_space(&assemble_longitudinal(fc, &dd)?, fc.v0)?;
        let Perturbation { q_a, q_b, mu } = perturbation_matrices(fc, &dd)?;
        Ok(Self { nominal, q_a, q_b, mu })
    }

    /// Applies the pitch-rate / angle-of-attack inner loop.
    ///
    /// The loop acts through the uncertain input matrix, so the augmented
    /// perturbations are `Q_A - Q_B K C` and `Q_B`.
    pub fn stabilized(&self, kq: f64, kalpha: f64) -> Result<Self> {
        let nominal = inner_loop_stabilize(&self.nominal, kq, kalpha)?;
        let q_a = &self.q_a - &self.q_b * inner_loop_gain(kq, kalpha) * self.nominal.c();
        Ok(Self { nominal, q_a, q_b: self.q_b.clone(), mu: self.mu })
    }

    /// Plant at a given uncertainty value.
    pub fn at(&self, delta: f64) -> Result<StateSpace> {
        let n = &self.nominal;
        let mut out =
            StateSpace::new(n.a() + &self.q_a * delta, n.b() + &self.q_b * delta, n.c().clone(), n.d().clone())?;
        out.state_names = n.state_names.clone();
        out.input_names = n.input_names.clone();
        out.output_names = n.output_names.clone();
        Ok(out)
    }
}
