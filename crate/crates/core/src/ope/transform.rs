//! Post-processing of expansions: linked-cluster filtering, angular
//! averaging, radial integration and the parity map.

use alloc::vec::Vec;

use super::expansion::{Expansion, OperatorTerm};
use super::expr::{Point, TraceChain};
use super::OpeError;
use crate::coeff::{rat, Coeff, Rational};

/// Drop disconnected terms; they cancel upon re-exponentiation.
pub fn connected_part(e: &Expansion) -> Expansion {
    e.filter(|t| t.connected)
}

/// Keep only terms whose poles are all of the form `|p|^{-2k}`.
pub fn angular_average(e: &Expansion) -> Expansion {
    e.filter(|t| t.pole.is_rotation_invariant())
}

/// `∂ ↔ ∂̄, M ↔ M⁻¹` applied to every letter and pole.
pub fn parity_transform(e: &Expansion) -> Expansion {
    let terms = e
        .terms
        .iter()
        .map(|t| OperatorTerm {
            coeff: t.coeff.clone(),
            pole: t.pole.parity(),
            chains: t
                .chains
                .iter()
                .map(|c| TraceChain::new(c.word.iter().map(|a| a.parity()).collect()))
                .collect(),
            connected: t.connected,
            links: t.links.clone(),
        })
        .collect();
    Expansion::with_origins(terms, e.origins).normalize()
}

/// Integration domain for one separation variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    /// `|var| > |inner|` over the whole exterior.
    Exterior { var: Point, inner: Point },
    /// `a < |var| < a'` with exact radii.
    Annulus { var: Point, inner: Rational, outer: Rational },
}

/// Integrate `d²var` over a region, term by term. The input must already be
/// angular-averaged in `var`.
///
/// Closed forms: `∫_{|u|>|v|} d²u |u|^{-2k} = π/(k-1) |v|^{-2(k-1)}` for
/// `k ≥ 2`; over an annulus `|z|^{-2}` gives `2π ln(a'/a)`, `|z|^{-2k}` gives
/// `π/(k-1) (a^{-2(k-1)} - a'^{-2(k-1)})` and a finite term gives the area.
pub fn radial_integrate(e: &Expansion, region: &Region) -> Result<Expansion, OpeError> {
    let var = match region {
        Region::Exterior { var, inner } => {
            if var == inner {
                return Err(OpeError::InvalidRegion);
            }
            *var
        }
        Region::Annulus { var, inner, outer } => {
            if *inner < Rational::from_integer(0) || outer <= inner {
                return Err(OpeError::InvalidRegion);
            }
            *var
        }
    };
    let mut terms = Vec::with_capacity(e.terms.len());
    for t in &e.terms {
        let mut pole = t.pole.clone();
        let (a, b) = pole.remove(var);
        if a != b {
            return Err(OpeError::NotAngularAveraged(var, a, b));
        }
        let k = a;
        let factor = match region {
            Region::Exterior { inner, .. } => {
                if k < 2 {
                    return Err(OpeError::DivergentIntegral(k));
                }
                pole.multiply(*inner, k - 1, k - 1);
                Coeff::pi_pow(1).scale(rat(1, (k - 1) as i128))
            }
            Region::Annulus { inner, outer, .. } => {
                let zero = Rational::from_integer(0);
                match k {
                    0 => Coeff::pi_pow(1).scale(outer * outer - inner * inner),
                    _ if *inner == zero => return Err(OpeError::DivergentIntegral(k)),
                    1 => &Coeff::pi_pow(1).scale(rat(2, 1)) * &Coeff::log_ratio(),
                    _ => {
                        let p = 2 * (k as i32 - 1);
                        let diff = inner.pow(-p) - outer.pow(-p);
                        Coeff::pi_pow(1).scale(diff / Rational::from_integer((k - 1) as i128))
                    }
                }
            }
        };
        terms.push(OperatorTerm { coeff: &t.coeff * &factor, pole, ..t.clone() });
    }
    Ok(Expansion::with_origins(terms, e.origins).normalize())
}
