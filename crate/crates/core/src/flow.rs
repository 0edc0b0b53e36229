//! Numerical integration of the cubic beta functions in `t = ln a`:
//!
//! `dγ/dt = -(δ²/n²)(1-γ)`, `dδ/dt = δ³/(3n²)`.
//!
//! `δ` is complex but restricted to the real or imaginary axis, so that `δ²`
//! and hence `γ` stay real along the flow.

use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("coupling blows up at t = {t_blowup}")]
    BlowupReached { t_blowup: f64 },
    #[error("local error estimate {estimate:e} at t = {t} exceeds {bound:e}")]
    StepTooLarge { t: f64, estimate: f64, bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingState {
    pub gamma: f64,
    pub delta: Complex64,
    pub n: u32,
}

impl CouplingState {
    pub fn new(gamma: f64, delta: Complex64, n: u32) -> Result<Self, FlowError> {
        if n == 0 {
            return Err(FlowError::InvalidParameter("level n must be at least 1"));
        }
        if !gamma.is_finite() || !delta.re.is_finite() || !delta.im.is_finite() {
            return Err(FlowError::InvalidParameter("couplings must be finite"));
        }
        if delta.re != 0.0 && delta.im != 0.0 {
            return Err(FlowError::InvalidParameter("delta must be real or purely imaginary"));
        }
        Ok(Self { gamma, delta, n })
    }

    pub fn real(gamma: f64, delta: f64, n: u32) -> Result<Self, FlowError> {
        Self::new(gamma, Complex64::new(delta, 0.0), n)
    }

    pub fn imaginary(gamma: f64, delta: f64, n: u32) -> Result<Self, FlowError> {
        Self::new(gamma, Complex64::new(0.0, delta), n)
    }

    /// Euclidean distance to the fixed point `(γ, δ) = (1, 0)`.
    pub fn distance_to_fixed_point(&self) -> f64 {
        libm::hypot(1.0 - self.gamma, self.delta.norm())
    }

    /// `δ²`, real by construction.
    fn delta_sq(&self) -> f64 {
        (self.delta * self.delta).re
    }

    /// Finite-time singularity `3n²/(2δ₀²)` for real `δ₀ ≠ 0`.
    pub fn t_blowup(&self) -> Option<f64> {
        let d2 = self.delta_sq();
        (d2 > 0.0).then(|| 3.0 * level_sq(self.n) / (2.0 * d2))
    }
}

fn level_sq(n: u32) -> f64 {
    let n = n as f64;
    n * n
}

/// `(dγ/dt, dδ/dt)`.
pub fn beta_eval(s: &CouplingState) -> (f64, Complex64) {
    let n2 = level_sq(s.n);
    let d2 = s.delta * s.delta;
    (-(d2.re / n2) * (1.0 - s.gamma), d2 * s.delta / (3.0 * n2))
}

/// Exact solution: `δ(t) = δ₀ (1 - 2δ₀²t/3n²)^{-1/2}` and
/// `1 - γ(t) = (1 - γ₀)(1 - 2δ₀²t/3n²)^{-3/2}`.
pub fn closed_form(s0: &CouplingState, t: f64) -> Result<CouplingState, FlowError> {
    if let Some(tb) = s0.t_blowup() {
        if t >= tb {
            return Err(FlowError::BlowupReached { t_blowup: tb });
        }
    }
    let x = 1.0 - 2.0 * s0.delta_sq() * t / (3.0 * level_sq(s0.n));
    let root = libm::sqrt(x);
    Ok(CouplingState {
        gamma: s0.gamma + (1.0 - s0.gamma) * (1.0 - 1.0 / (x * root)),
        delta: s0.delta / root,
        n: s0.n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Bound on the step-doubling estimate of the local error, relative to
    /// `max(1, |state|)`.
    pub local_error_bound: f64,
    /// Refuse to integrate past this fraction of the blowup time.
    pub blowup_fraction: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { local_error_bound: 1e-6, blowup_fraction: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub samples: Vec<(f64, CouplingState)>,
    pub dt: f64,
    pub integrator: &'static str,
}

impl FlowTrajectory {
    pub fn endpoint(&self) -> &CouplingState {
        &self.samples.last().expect("trajectories are never empty").1
    }
}

type Vector = (f64, Complex64);

fn rhs(n: u32, y: Vector) -> Vector {
    beta_eval(&CouplingState { gamma: y.0, delta: y.1, n })
}

fn axpy(y: Vector, h: f64, k: Vector) -> Vector {
    (y.0 + h * k.0, y.1 + k.1 * h)
}

fn rk4_step(n: u32, y: Vector, h: f64) -> Vector {
    let k1 = rhs(n, y);
    let k2 = rhs(n, axpy(y, h / 2.0, k1));
    let k3 = rhs(n, axpy(y, h / 2.0, k2));
    let k4 = rhs(n, axpy(y, h, k3));
    (
        y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
    )
}

fn norm(y: Vector) -> f64 {
    libm::hypot(y.0, y.1.norm())
}

/// Classical fourth-order Runge-Kutta with fixed step `dt` from `t = 0` to
/// `t_end`; the final step is shortened to land on `t_end`.
pub fn integrate(s0: &CouplingState, t_end: f64, dt: f64) -> Result<FlowTrajectory, FlowError> {
    integrate_with(s0, t_end, dt, &IntegratorConfig::default())
}

pub fn integrate_with(
    s0: &CouplingState,
    t_end: f64,
    dt: f64,
    config: &IntegratorConfig,
) -> Result<FlowTrajectory, FlowError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FlowError::InvalidParameter("dt must be positive"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(FlowError::InvalidParameter("t_end must be non-negative"));
    }
    if let Some(tb) = s0.t_blowup() {
        if t_end >= config.blowup_fraction * tb {
            return Err(FlowError::BlowupReached { t_blowup: tb });
        }
    }
    let steps = libm::ceil(t_end / dt - 1e-9).max(0.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut y = (s0.gamma, s0.delta);
    samples.push((0.0, *s0));
    for i in 0..steps {
        let t = i as f64 * dt;
        let h = if i + 1 == steps { t_end - t } else { dt };
        let full = rk4_step(s0.n, y, h);
        let halves = rk4_step(s0.n, rk4_step(s0.n, y, h / 2.0), h / 2.0);
        let estimate = norm((full.0 - halves.0, full.1 - halves.1)) / 15.0;
        let bound = config.local_error_bound * norm(full).max(1.0);
        if !(estimate <= bound) {
            return Err(FlowError::StepTooLarge { t, estimate, bound });
        }
        y = full;
        samples.push((t + h, CouplingState { gamma: y.0, delta: y.1, n: s0.n }));
    }
    Ok(FlowTrajectory { samples, dt, integrator: "rk4" })
}

/// Relative endpoint error of [`integrate`] against [`closed_form`].
pub fn endpoint_error(s0: &CouplingState, t_end: f64, dt: f64) -> Result<f64, FlowError> {
    let num = *integrate(s0, t_end, dt)?.endpoint();
    let exact = closed_form(s0, t_end)?;
    let diff = (num.gamma - exact.gamma, num.delta - exact.delta);
    Ok(norm(diff) / norm((exact.gamma, exact.delta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

const STABILITY_SAMPLES: usize = 1000;

/// Track the distance to `(1, 0)` along the flow up to `horizon`, clipped to
/// the blowup guard for real `δ₀`.
pub fn classify_stability(s0: &CouplingState, horizon: f64) -> Result<Stability, FlowError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FlowError::InvalidParameter("horizon must be positive"));
    }
    let config = IntegratorConfig::default();
    let horizon = match s0.t_blowup() {
        Some(tb) => horizon.min(0.9 * config.blowup_fraction * tb),
        None => horizon,
    };
    let traj = integrate_with(s0, horizon, horizon / STABILITY_SAMPLES as f64, &config)?;
    let d: Vec<f64> = traj.samples.iter().map(|(_, s)| s.distance_to_fixed_point()).collect();
    let pairs = || d.windows(2);
    Ok(if pairs().all(|w| w[1] > w[0]) {
        Stability::Unstable
    } else if pairs().all(|w| w[1] < w[0]) {
        Stability::Stable
    } else {
        Stability::Marginal
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn beta_examples() {
        let s = CouplingState::real(1.0, 0.3, 4).unwrap();
        let (g, d) = beta_eval(&s);
        assert_eq!(g, 0.0);
        assert_relative_eq!(d.re, 0.027 / 48.0, max_relative = 1e-14);
        assert_eq!(beta_eval(&CouplingState::real(0.0, 0.0, 4).unwrap()), (0.0, Complex64::new(0.0, 0.0)));
        let (g, d) = beta_eval(&CouplingState::imaginary(0.0, 0.1, 4).unwrap());
        assert_relative_eq!(g, 6.25e-4, max_relative = 1e-12);
        assert_relative_eq!(d.im, -0.001 / 48.0, max_relative = 1e-12);
        assert_eq!(d.re, 0.0);
    }

    #[test]
    fn off_axis_delta_is_rejected() {
        assert!(CouplingState::new(0.0, Complex64::new(0.1, 0.1), 4).is_err());
        assert!(CouplingState::real(0.0, 0.1, 0).is_err());
    }

    #[test]
    fn closed_form_values() {
        let s0 = CouplingState::real(0.2, 0.1, 4).unwrap();
        assert_eq!(closed_form(&s0, 0.0).unwrap(), s0);
        let s = closed_form(&s0, 100.0).unwrap();
        assert_relative_eq!(s.delta.re, (100.0f64 - 200.0 / 48.0).powf(-0.5), max_relative = 1e-14);
        assert_relative_eq!(s.delta.re, 0.10217, epsilon = 5e-5);
        assert!(matches!(closed_form(&s0, 2400.0), Err(FlowError::BlowupReached { .. })));
    }

    #[test]
    fn closed_form_solves_the_flow() {
        // centered difference of the closed form against beta_eval
        for s0 in [CouplingState::real(0.3, 0.2, 3).unwrap(), CouplingState::imaginary(0.7, 0.4, 2).unwrap()] {
            for t in [0.5, 3.0, 10.0] {
                let h = 1e-4;
                let (a, b) = (closed_form(&s0, t + h).unwrap(), closed_form(&s0, t - h).unwrap());
                let (g, d) = beta_eval(&closed_form(&s0, t).unwrap());
                assert_relative_eq!((a.gamma - b.gamma) / (2.0 * h), g, max_relative = 1e-6);
                assert!(((a.delta - b.delta) / (2.0 * h) - d).norm() < 1e-6 * d.norm());
            }
        }
    }

    #[test]
    fn fixed_point_is_constant() {
        let s0 = CouplingState::real(1.0, 0.0, 4).unwrap();
        let traj = integrate(&s0, 5.0, 0.1).unwrap();
        assert!(traj.samples.iter().all(|(_, s)| *s == s0));
        assert_eq!(traj.samples.len(), 51);
        assert_eq!(traj.samples.last().unwrap().0, 5.0);
    }

    #[test]
    fn rk4_matches_closed_form() {
        let s0 = CouplingState::real(0.0, 0.1, 4).unwrap();
        assert!(endpoint_error(&s0, 50.0, 0.01).unwrap() < 1e-8);
    }

    #[test]
    fn blowup_guard_and_sentinel() {
        let s0 = CouplingState::real(0.0, 0.1, 4).unwrap();
        assert!(matches!(integrate(&s0, 2300.0, 0.1), Err(FlowError::BlowupReached { .. })));
        let s0 = CouplingState::real(0.0, 3.0, 1).unwrap();
        assert!(matches!(integrate(&s0, 0.1, 0.05), Err(FlowError::StepTooLarge { .. })));
    }

    #[test]
    fn stability_examples() {
        let real = CouplingState::real(1.0, 0.05, 4).unwrap();
        assert_eq!(classify_stability(&real, 1000.0).unwrap(), Stability::Unstable);
        let imag = CouplingState::imaginary(0.95, 0.05, 4).unwrap();
        assert_eq!(classify_stability(&imag, 1000.0).unwrap(), Stability::Stable);
        let frozen = CouplingState::real(0.5, 0.0, 4).unwrap();
        assert_eq!(classify_stability(&frozen, 100.0).unwrap(), Stability::Marginal);
    }

    #[test]
    fn imaginary_delta_flows_to_the_fixed_point() {
        let s0 = CouplingState::imaginary(0.9, 0.5, 1).unwrap();
        let traj = integrate(&s0, 200.0, 0.05).unwrap();
        let end = traj.endpoint();
        assert!(end.delta.norm() < 0.1);
        assert!(traj.samples.windows(2).all(|w| w[1].1.delta.norm() < w[0].1.delta.norm()));
        assert!((1.0 - end.gamma).abs() < 1e-3);
    }
}
