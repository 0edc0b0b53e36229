//! Closed-form critical observables: mean conductance of a cylinder,
//! fixed-point conductivity, vortex energetics.

use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ObservableError {
    #[error("aspect parameter tau must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("cutoff ratio must exceed one, got {0}")]
    RatioNotGreaterThanOne(f64),
}

pub const DEFAULT_TOL: f64 = 1e-16;
const MIN_TERMS: usize = 8;
const MAX_TERMS: usize = 1_000_000;

/// Cylinder of length `l` and circumference `w` at level `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConductanceQuery {
    pub l: f64,
    pub w: f64,
    pub n: u32,
    pub tau: f64,
    pub tol: f64,
}

impl ConductanceQuery {
    pub fn new(l: f64, w: f64, n: u32) -> Result<Self, ObservableError> {
        if !(l > 0.0 && w > 0.0 && l.is_finite() && w.is_finite()) {
            return Err(ObservableError::InvalidParameter("L and W must be positive"));
        }
        if n == 0 {
            return Err(ObservableError::InvalidParameter("level n must be at least 1"));
        }
        Ok(Self { l, w, n, tau: 2.0 * PI * l / (n as f64 * w), tol: DEFAULT_TOL })
    }

    /// A query fixed by `τ` alone; `L/W` is reconstructed as `nτ/2π` with
    /// `W = 1`.
    pub fn from_tau(tau: f64, n: u32) -> Result<Self, ObservableError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(ObservableError::NonPositiveTau(tau));
        }
        if n == 0 {
            return Err(ObservableError::InvalidParameter("level n must be at least 1"));
        }
        Ok(Self { l: n as f64 * tau / (2.0 * PI), w: 1.0, n, tau, tol: DEFAULT_TOL })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn checked_tau(&self) -> Result<f64, ObservableError> {
        if self.tau > 0.0 && self.tau.is_finite() {
            Ok(self.tau)
        } else {
            Err(ObservableError::NonPositiveTau(self.tau))
        }
    }
}

/// The two Poisson-dual forms of the mean conductance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesForm {
    /// `(1/√(πτ)) Σ_{l ∈ ℤ+1/2} e^{-l²τ}`, pairing `l` with `-l`.
    HalfInteger,
    /// `(1/τ) Σ_{m ∈ ℤ} (-1)^m e^{-π²m²/τ}`, pairing `m` with `-m`.
    Dual,
}

impl SeriesForm {
    fn term(self, tau: f64, k: usize) -> f64 {
        match self {
            SeriesForm::HalfInteger => {
                let l = k as f64 + 0.5;
                2.0 * libm::exp(-l * l * tau)
            }
            SeriesForm::Dual if k == 0 => 1.0,
            SeriesForm::Dual => {
                let m = k as f64;
                let sign = if k % 2 == 0 { 2.0 } else { -2.0 };
                sign * libm::exp(-PI * PI * m * m / tau)
            }
        }
    }

    fn normalization(self, tau: f64) -> f64 {
        match self {
            SeriesForm::HalfInteger => 1.0 / libm::sqrt(PI * tau),
            SeriesForm::Dual => 1.0 / tau,
        }
    }
}

/// Sum until the next term drops below `tol · max(1, |sum|)`, after at
/// least `MIN_TERMS` terms. Returns the value and the number of terms used.
pub fn g_star_series(q: &ConductanceQuery, form: SeriesForm) -> Result<(f64, usize), ObservableError> {
    let tau = q.checked_tau()?;
    let mut sum: f64 = 0.0;
    let mut used = MAX_TERMS;
    for k in 0..MAX_TERMS {
        let t = form.term(tau, k);
        if k >= MIN_TERMS && t.abs() < q.tol * sum.abs().max(1.0) {
            used = k;
            break;
        }
        sum += t;
    }
    Ok((sum * form.normalization(tau), used))
}

/// The same series cut off after exactly `terms` terms.
pub fn g_star_truncated(q: &ConductanceQuery, form: SeriesForm, terms: usize) -> Result<f64, ObservableError> {
    let tau = q.checked_tau()?;
    let sum: f64 = (0..terms).map(|k| form.term(tau, k)).sum();
    Ok(sum * form.normalization(tau))
}

pub fn g_star_half_integer(q: &ConductanceQuery) -> Result<f64, ObservableError> {
    Ok(g_star_series(q, SeriesForm::HalfInteger)?.0)
}

pub fn g_star_dual(q: &ConductanceQuery) -> Result<f64, ObservableError> {
    Ok(g_star_series(q, SeriesForm::Dual)?.0)
}

/// Whichever of the two forms converges faster at this `τ`.
pub fn g_star(q: &ConductanceQuery) -> Result<f64, ObservableError> {
    if q.checked_tau()? < PI {
        g_star_dual(q)
    } else {
        g_star_half_integer(q)
    }
}

/// `σ*_xx = n/2π`.
pub fn sigma_xx_star(n: u32) -> f64 {
    n as f64 / (2.0 * PI)
}

/// Conductance of the square at level 4 measured against the network-model
/// value `0.57 ± 0.02`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SquareReport {
    pub g_star: f64,
    pub reference: f64,
    pub reference_error: f64,
    pub gap: f64,
    /// `1 - 2e^{-2π}`, the leading correction to `2/π`.
    pub correction_factor: f64,
    pub standard_intervals: f64,
    pub gap_exceeds_error: bool,
}

pub fn square_deviation_check() -> SquareReport {
    let q = ConductanceQuery::new(1.0, 1.0, 4).expect("unit square is valid");
    let g_star = g_star_dual(&q).expect("tau = pi/2");
    let (reference, reference_error) = (0.57, 0.02);
    let gap = g_star - reference;
    SquareReport {
        g_star,
        reference,
        reference_error,
        gap,
        correction_factor: 1.0 - 2.0 * libm::exp(-2.0 * PI),
        standard_intervals: gap.abs() / reference_error,
        gap_exceeds_error: gap.abs() > reference_error,
    }
}

/// Isolated-vortex free energy `f = ((n-4)/2) ln(a_IR/a_UV)` together with
/// its energy part `ΔE = (n/2) ln(a_IR/a_UV)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KtEnergetics {
    pub free_energy: f64,
    pub energy: f64,
    pub entropy: f64,
}

pub fn kt_energetics(n: u32, ratio: f64) -> Result<KtEnergetics, ObservableError> {
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(ObservableError::RatioNotGreaterThanOne(ratio));
    }
    let log = libm::log(ratio);
    let energy = n as f64 / 2.0 * log;
    let entropy = 2.0 * log;
    let free_energy = if n == 4 { 0.0 } else { (n as f64 - 4.0) / 2.0 * log };
    Ok(KtEnergetics { free_energy, energy, entropy })
}

pub fn kt_free_energy(n: u32, ratio: f64) -> Result<f64, ObservableError> {
    Ok(kt_energetics(n, ratio)?.free_energy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vortex {
    pub position: (f64, f64),
    /// `+1` is the singularity `(z - z_p)^{-1}` in the fermion-boson
    /// correlated sector.
    pub charge: i32,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VortexConfiguration {
    pub vortices: Vec<Vortex>,
    pub a_uv: f64,
    pub a_ir: f64,
}

impl VortexConfiguration {
    pub fn new(vortices: Vec<Vortex>, a_uv: f64, a_ir: f64) -> Result<Self, ObservableError> {
        if !(a_uv > 0.0 && a_ir > a_uv) {
            return Err(ObservableError::InvalidParameter("cutoffs must satisfy a_IR > a_UV > 0"));
        }
        if vortices.iter().any(|v| v.charge == 0) {
            return Err(ObservableError::InvalidParameter("vortex charges must be nonzero"));
        }
        Ok(Self { vortices, a_uv, a_ir })
    }

    pub fn net_charge(&self) -> i64 {
        self.vortices.iter().map(|v| v.charge as i64).sum()
    }

    /// Disjoint union, keeping the cutoffs of `self`.
    pub fn union(&self, other: &VortexConfiguration) -> VortexConfiguration {
        let mut vortices = self.vortices.clone();
        vortices.extend_from_slice(&other.vortices);
        VortexConfiguration { vortices, ..*self }
    }
}

/// `δ₊ × (algebraic vortex number)`.
pub fn vortex_count_action(v: &VortexConfiguration, delta_plus: f64) -> f64 {
    delta_plus * v.net_charge() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn at(tau: f64) -> ConductanceQuery {
        ConductanceQuery::from_tau(tau, 4).unwrap()
    }

    #[test]
    fn square_value() {
        let q = ConductanceQuery::new(1.0, 1.0, 4).unwrap();
        assert_relative_eq!(q.tau, PI / 2.0, max_relative = 1e-15);
        let g = g_star_half_integer(&q).unwrap();
        assert!((g - 0.6342384).abs() < 5e-6, "{g}");
        let series = 2.0 / PI * (1.0 - 2.0 * (-2.0 * PI).exp() + 2.0 * (-8.0 * PI).exp());
        assert!((g_star_dual(&q).unwrap() - series).abs() < 1e-10);
    }

    #[test]
    fn long_cylinder_is_dominated_by_lowest_mode() {
        let g = g_star_half_integer(&at(4.0 * PI)).unwrap();
        let lead = 2.0 / (4.0 * PI * PI).sqrt() * (-PI).exp();
        assert_relative_eq!(g, lead, max_relative = 1e-10);
        assert!(g_star_half_integer(&at(200.0)).unwrap() < 1e-20);
        assert!(g_star_dual(&at(200.0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ohmic_limit() {
        let tau = 0.01;
        assert!((tau * g_star_half_integer(&at(tau)).unwrap() - 1.0).abs() < 1e-8);
        assert!((tau * g_star_dual(&at(tau)).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_tau() {
        let mut q = at(1.0);
        q.tau = -1.0;
        assert_eq!(g_star_dual(&q), Err(ObservableError::NonPositiveTau(-1.0)));
        assert_eq!(g_star_half_integer(&q), Err(ObservableError::NonPositiveTau(-1.0)));
        assert!(ConductanceQuery::from_tau(0.0, 4).is_err());
    }

    #[test]
    fn conductivity() {
        assert_eq!(sigma_xx_star(4), 2.0 / PI);
        // the commonly quoted four-digit value 0.6367 is off by 8e-5
        assert!((sigma_xx_star(4) - 0.6366).abs() < 5e-5);
        assert_eq!(sigma_xx_star(1), 1.0 / (2.0 * PI));
    }

    #[test]
    fn square_report() {
        let r = square_deviation_check();
        assert!(r.gap_exceeds_error);
        assert!((r.gap - 0.064).abs() < 1e-3);
        assert!((r.correction_factor - 0.99626).abs() < 1e-5);
        assert!((r.standard_intervals - 3.2).abs() < 0.05);
    }

    #[test]
    fn kt_examples() {
        for r in [2.0, 10.0, 1e6] {
            assert_eq!(kt_free_energy(4, r).unwrap(), 0.0);
        }
        assert_relative_eq!(kt_free_energy(6, core::f64::consts::E).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(kt_free_energy(2, core::f64::consts::E.powi(2)).unwrap(), -2.0, max_relative = 1e-15);
        let e = kt_energetics(4, 10.0).unwrap();
        assert_relative_eq!(e.energy, 2.0 * 10f64.ln(), max_relative = 1e-15);
        assert_eq!(kt_free_energy(4, 1.0), Err(ObservableError::RatioNotGreaterThanOne(1.0)));
    }

    #[test]
    fn vortex_counting() {
        let v = |charge| Vortex { position: (0.0, 0.0), charge };
        let empty = VortexConfiguration::new(Vec::new(), 0.1, 10.0).unwrap();
        assert_eq!(vortex_count_action(&empty, 0.3), 0.0);
        let one = VortexConfiguration::new(alloc::vec![v(1)], 0.1, 10.0).unwrap();
        assert_eq!(vortex_count_action(&one, 0.3), 0.3);
        let pair = VortexConfiguration::new(alloc::vec![v(1), v(-1)], 0.1, 10.0).unwrap();
        assert_eq!(vortex_count_action(&pair, 0.7), 0.0);
        assert!(VortexConfiguration::new(alloc::vec![v(0)], 0.1, 10.0).is_err());
        assert!(VortexConfiguration::new(Vec::new(), 1.0, 0.5).is_err());
    }
}
