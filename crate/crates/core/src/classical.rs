//! Classical motion near the pole in the gauge A_θ = 0, A_φ = brθ:
//!
//! ```text
//! H = p_θ²/(2μr²) + (p_φ − ebrθ)²/(2μr² cos²θ)
//! ```
//!
//! φ is cyclic, so p_φ is a constant of motion.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Distance from ±π/2 at which the chart is abandoned.
pub const CHART_MARGIN: f64 = 1e-6;

const SQRT3_6: f64 = 0.288_675_134_594_812_9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassicalState {
    pub theta: f64,
    pub phi: f64,
    pub p_theta: f64,
    pub p_phi: f64,
}

impl ClassicalState {
    pub fn new(theta: f64, phi: f64, p_theta: f64, p_phi: f64) -> Self {
        ClassicalState {
            theta,
            phi,
            p_theta,
            p_phi,
        }
    }

    fn to_array(self) -> [f64; 4] {
        [self.theta, self.phi, self.p_theta, self.p_phi]
    }

    fn from_array(a: [f64; 4]) -> Self {
        ClassicalState::new(a[0], a[1], a[2], a[3])
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "state has non-finite components".into(),
            ));
        }
        check_chart(self.theta)
    }
}

fn check_chart(theta: f64) -> Result<()> {
    if theta.abs() >= FRAC_PI_2 - CHART_MARGIN || !theta.is_finite() {
        return Err(Error::ChartBoundary(theta));
    }
    Ok(())
}

pub fn hamiltonian(params: &PhysicalParams, b: f64, s: &ClassicalState) -> Result<f64> {
    check_chart(s.theta)?;
    let inertia = params.mu * params.r * params.r;
    let q = s.p_phi - params.e * b * params.r * s.theta;
    let c = s.theta.cos();
    Ok(s.p_theta * s.p_theta / (2.0 * inertia) + q * q / (2.0 * inertia * c * c))
}

/// Canonical vector field (θ', φ', p_θ', p_φ').
fn flow(params: &PhysicalParams, b: f64, y: &[f64; 4]) -> [f64; 4] {
    let inertia = params.mu * params.r * params.r;
    let ebr = params.e * b * params.r;
    let q = y[3] - ebr * y[0];
    let (s, c) = y[0].sin_cos();
    let c2 = c * c;
    [
        y[2] / inertia,
        q / (inertia * c2),
        q * ebr / (inertia * c2) - q * q * s / (inertia * c2 * c),
        0.0,
    ]
}

fn axpy(y: &[f64; 4], h: f64, k: &[f64; 4]) -> [f64; 4] {
    [
        y[0] + h * k[0],
        y[1] + h * k[1],
        y[2] + h * k[2],
        y[3] + h * k[3],
    ]
}

/// Fixed-step scheme used by [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Two-stage Gauss–Legendre, order 4, symplectic and symmetric.
    #[default]
    GaussLegendre4,
    /// Classical explicit Runge–Kutta, order 4.
    Rk4,
}

impl Integrator {
    /// One step of size `dt` (negative steps run backwards).
    pub fn step(
        self,
        params: &PhysicalParams,
        b: f64,
        s: &ClassicalState,
        dt: f64,
    ) -> ClassicalState {
        let y = s.to_array();
        let out = match self {
            Integrator::Rk4 => {
                let k1 = flow(params, b, &y);
                let k2 = flow(params, b, &axpy(&y, 0.5 * dt, &k1));
                let k3 = flow(params, b, &axpy(&y, 0.5 * dt, &k2));
                let k4 = flow(params, b, &axpy(&y, dt, &k3));
                std::array::from_fn(|i| {
                    y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                })
            }
            Integrator::GaussLegendre4 => {
                let a = [[0.25, 0.25 - SQRT3_6], [0.25 + SQRT3_6, 0.25]];
                let mut k1 = flow(params, b, &y);
                let mut k2 = k1;
                for _ in 0..100 {
                    let y1: [f64; 4] =
                        std::array::from_fn(|i| y[i] + dt * (a[0][0] * k1[i] + a[0][1] * k2[i]));
                    let y2: [f64; 4] =
                        std::array::from_fn(|i| y[i] + dt * (a[1][0] * k1[i] + a[1][1] * k2[i]));
                    let n1 = flow(params, b, &y1);
                    let n2 = flow(params, b, &y2);
                    let scale = n1.iter().chain(&n2).fold(0.0f64, |m, v| m.max(v.abs()));
                    let change = (0..4).fold(0.0f64, |m, i| {
                        m.max((n1[i] - k1[i]).abs()).max((n2[i] - k2[i]).abs())
                    });
                    k1 = n1;
                    k2 = n2;
                    if change <= 2.0 * f64::EPSILON * scale {
                        break;
                    }
                }
                std::array::from_fn(|i| y[i] + dt * (0.5 * k1[i] + 0.5 * k2[i]))
            }
        };
        ClassicalState::from_array(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    pub energy: Vec<f64>,
    /// max |p_φ(t) − p_φ(0)|.
    pub p_phi_drift: f64,
}

impl Trajectory {
    /// max |H(t) − H(0)| / |H(0)|, or the absolute drift when H(0) = 0.
    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.energy[0];
        let drift = self
            .energy
            .iter()
            .fold(0.0f64, |m, h| m.max((h - h0).abs()));
        if h0 == 0.0 {
            drift
        } else {
            drift / h0.abs()
        }
    }

    pub fn max_abs_theta(&self) -> f64 {
        self.states.iter().fold(0.0f64, |m, s| m.max(s.theta.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,theta,phi,p_theta,p_phi,energy\n");
        for ((t, s), h) in self.times.iter().zip(&self.states).zip(&self.energy) {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e}",
                t, s.theta, s.phi, s.p_theta, s.p_phi, h
            );
        }
        out
    }
}

/// Fixed-step integration, recording every step.
///
/// Leaving the chart aborts with [`Error::ChartExit`] carrying the
/// trajectory up to the last admissible state.
pub fn integrate(
    params: &PhysicalParams,
    b: f64,
    s0: ClassicalState,
    dt: f64,
    steps: usize,
    integrator: Integrator,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositiveParameter("dt"));
    }
    s0.validate()?;
    let h0 = hamiltonian(params, b, &s0)?;
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        p_phi_drift: 0.0,
    };
    traj.times.push(0.0);
    traj.states.push(s0);
    traj.energy.push(h0);
    let mut s = s0;
    for i in 1..=steps {
        s = integrator.step(params, b, &s, dt);
        let h = match s.validate().and_then(|_| hamiltonian(params, b, &s)) {
            Ok(h) => h,
            Err(_) => return Err(Error::ChartExit(Box::new(traj))),
        };
        traj.times.push(i as f64 * dt);
        traj.states.push(s);
        traj.energy.push(h);
        traj.p_phi_drift = traj.p_phi_drift.max((s.p_phi - s0.p_phi).abs());
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Confinement {
    pub max_theta: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compare the largest |θ| reached with (|p_φ(0)| + √(2μr²H(0)))/(ebr).
pub fn check_confinement(traj: &Trajectory, params: &PhysicalParams, b: f64) -> Confinement {
    let s0 = traj.states[0];
    let energy = params.r * params.r * traj.energy[0];
    let bound =
        (s0.p_phi.abs() + (2.0 * params.mu * energy.max(0.0)).sqrt()) / (params.e * b * params.r);
    let max_theta = traj.max_abs_theta();
    Confinement {
        max_theta,
        bound,
        holds: max_theta < bound || max_theta == 0.0,
    }
}
