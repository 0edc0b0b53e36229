//! Beta functions and scaling dimensions assembled from engine output.
//!
//! The perturbation is `S = (1/2πn²) ∫ d²z (γ O_A + δ O_I)`. Expanding
//! `e^{-S}` and keeping the logarithmically divergent pieces, every product
//! contributes `C_k · ∫d²v/|v|² · ∫d²z O_k`. Raising the cutoff `a → a + da`
//! changes `∫_{|v|>a} d²v/|v|²` by `-2π d ln a`, so re-exponentiation gives
//! `dg_k/d ln a = -4π² n² C_k`.

use alloc::string::String;
use alloc::vec::Vec;

use super::contract::ope;
use super::expansion::{Expansion, PoleMonomial};
use super::expr::{ParamMatrix, Point};
use super::transform::{angular_average, connected_part, radial_integrate, Region};
use super::vocab::{ope_with_t, ope_with_tbar, Operator};
use super::OpeError;
use crate::coeff::{rat, Coeff, Rational};

const Z: Point = Point('z');
const U: Point = Point('u');
const V: Point = Point('v');
const T: Point = Point('t');

/// `-g / (2π n²)`: weight of one insertion of `∫ O` in `e^{-S}`.
fn insertion_weight(coupling: &Coeff) -> Coeff {
    -(&(coupling * &Coeff::level_pow(-2)) * &Coeff::pi_pow(-1)).scale(rat(1, 2))
}

/// One operator product feeding a beta function.
#[derive(Clone, Debug)]
pub struct ProductContribution {
    pub label: String,
    /// Engine coefficient of `∫d²v/|v|² · O_k` for the bare product,
    /// summed over radial orderings.
    pub log_coefficient: Coeff,
    /// Per-ordering values of `log_coefficient`, for the exchange check.
    pub orderings: Vec<Coeff>,
    /// Taylor and coupling prefactor from `e^{-S}`.
    pub prefactor: Coeff,
}

impl ProductContribution {
    /// `C_k` of the module docs.
    pub fn weight(&self) -> Coeff {
        &self.prefactor * &self.log_coefficient
    }

    pub fn orderings_agree(&self) -> bool {
        self.orderings.windows(2).all(|w| w[0] == w[1])
    }
}

/// `dg/d ln a = -4π² n² C`.
pub fn flow_contribution(weight: &Coeff) -> Coeff {
    -(&(&Coeff::pi_pow(2) * &Coeff::level_pow(2)) * weight).scale(rat(4, 1))
}

/// Symbolic beta functions plus the intermediate engine results they were
/// assembled from.
#[derive(Clone, Debug)]
pub struct BetaSystem {
    pub gamma_flow: Coeff,
    pub delta_flow: Coeff,
    /// Flow of `γ` driven by the kinetic perturbation `λ ∫ O`.
    pub gamma_flow_lambda: Coeff,
    pub oi_oi: Expansion,
    pub oi_oi_oa: ProductContribution,
    pub oi_oi_two_point: ProductContribution,
    pub oi_oi_oi: ProductContribution,
    /// Connected `|u|^{-4}` coefficient of `O_I(u) · :O_I O_I:(0)` on `O_I`.
    pub triple_oi_quartic: Coeff,
    /// Same for `O_I(u) · :O_I O_A:(0)` on `O_A`.
    pub triple_oa_quartic: Coeff,
    /// `T(z) · O(0)` singular part.
    pub t_times_o: Expansion,
    /// No connected `O_I` survives the angular average of
    /// `O_I × O_I × O_I × O_A`.
    pub no_oi_from_quadruple: bool,
}

fn at0(op: Operator) -> Expansion {
    op.at(Point::ORIGIN)
}

/// Connected, angular-averaged product `op(outer) · [op(inner) · base(0)]`.
fn nested(outer: Point, inner: Point, base: Operator) -> Result<Expansion, OpeError> {
    let first = ope(&Operator::OI.at(inner), &at0(base))?;
    let second = ope(&Operator::OI.at(outer), &first)?;
    Ok(angular_average(&connected_part(&second)))
}

fn log_coefficient_on(e: &Expansion, var: Point, target: Operator) -> Coeff {
    e.coefficient_of(&PoleMonomial::single(var, 1, 1), &at0(target))
}

/// Sum over both radial orderings of `∫d²u ∫d²v O_I(u) O_I(v) base(0)`,
/// returning per-ordering log coefficients on `target`.
///
/// Only poles of order two or more in the outer separation are integrated;
/// `|u|^{-2}` and finite terms belong to products of lower-order logarithms.
fn triple(base: Operator, target: Operator) -> Result<Vec<Coeff>, OpeError> {
    let mut out = Vec::new();
    for (outer, inner) in [(U, V), (V, U)] {
        let e = nested(outer, inner, base.clone())?.filter(|t| t.pole.orders(outer).0 >= 2);
        let integrated = radial_integrate(&e, &Region::Exterior { var: outer, inner })?;
        out.push(log_coefficient_on(&integrated, inner, target.clone()));
    }
    Ok(out)
}

/// Run the full orchestration.
pub fn beta_system() -> Result<BetaSystem, OpeError> {
    let gamma = Coeff::gamma();
    let delta = Coeff::delta();
    let wd = insertion_weight(&delta);
    let wg = insertion_weight(&gamma);

    // O_I × O_I: the relative coordinate runs over the whole plane.
    let oi_oi = ope(&Operator::OI.at(Z), &at0(Operator::OI))?;
    let two_point = log_coefficient_on(&angular_average(&connected_part(&oi_oi)), Z, Operator::OA);
    let oi_oi_two_point = ProductContribution {
        label: "O_I x O_I".into(),
        log_coefficient: two_point.clone(),
        orderings: alloc::vec![two_point],
        prefactor: wd.pow(2).scale(rat(1, 2)),
    };

    // O_I × O_I × O_A: Taylor coefficient 3/3! of the δ²γ monomial.
    let orderings = triple(Operator::OA, Operator::OA)?;
    let oi_oi_oa = ProductContribution {
        label: "O_I x O_I x O_A".into(),
        log_coefficient: orderings.iter().fold(Coeff::zero(), |acc, c| &acc + c),
        orderings,
        prefactor: (&wd.pow(2) * &wg).scale(rat(1, 2)),
    };

    // O_I × O_I × O_I: Taylor coefficient 1/3!.
    let orderings = triple(Operator::OI, Operator::OI)?;
    let oi_oi_oi = ProductContribution {
        label: "O_I x O_I x O_I".into(),
        log_coefficient: orderings.iter().fold(Coeff::zero(), |acc, c| &acc + c),
        orderings,
        prefactor: wd.pow(3).scale(rat(1, 6)),
    };

    let quartic = PoleMonomial::single(U, 2, 2);
    let triple_oi_quartic = nested(U, V, Operator::OI)?.coefficient_of(&quartic, &at0(Operator::OI));
    let triple_oa_quartic = nested(U, V, Operator::OA)?.coefficient_of(&quartic, &at0(Operator::OA));

    let gamma_flow = flow_contribution(&(&oi_oi_two_point.weight() + &oi_oi_oa.weight()));
    let delta_flow = flow_contribution(&oi_oi_oi.weight());

    // kinetic perturbation: mixing of O into O_A under both Virasoro halves
    let o = at0(Operator::O);
    let t_times_o = ope_with_t(&o)?;
    let tb_times_o = ope_with_tbar(&o)?;
    let oa = at0(Operator::OA);
    let mixing = &t_times_o.coefficient_of(&PoleMonomial::single(Z, 2, 0), &oa)
        + &tb_times_o.coefficient_of(&PoleMonomial::single(Z, 0, 2), &oa);
    // S ⊃ λ ∫O and (γ/2πn²) ∫O_A, so dγ = -2πn² · mixing · λ
    let gamma_flow_lambda =
        -(&(&(&Coeff::pi_pow(1) * &Coeff::level_pow(2)) * &mixing) * &Coeff::lambda()).scale(rat(2, 1));

    Ok(BetaSystem {
        gamma_flow,
        delta_flow,
        gamma_flow_lambda,
        oi_oi,
        oi_oi_oa,
        oi_oi_two_point,
        oi_oi_oi,
        triple_oi_quartic,
        triple_oa_quartic,
        t_times_o,
        no_oi_from_quadruple: no_single_trace_from_quadruple()?,
    })
}

/// Expand `O_I(t) · [O_I(u) · [O_I(v) · O_A(0)]]` and look for a connected,
/// rotation-invariant `O_I` term.
fn no_single_trace_from_quadruple() -> Result<bool, OpeError> {
    let first = ope(&Operator::OI.at(V), &at0(Operator::OA))?;
    let second = ope(&Operator::OI.at(U), &first)?;
    let third = ope(&Operator::OI.at(T), &second)?;
    let survivors = angular_average(&connected_part(&third)).canonical();
    let shape = at0(Operator::OI).canonical().terms[0].chains.clone();
    Ok(!survivors.terms.iter().any(|t| t.chains == shape))
}

/// Conformal weight `h = h̄` of `M` as a symbolic function of `γ` and `n`.
///
/// The undeformed weight comes from `T(z) M(0)`; the deformation adds the
/// logarithm produced by `-S_γ · M(0)` over an annulus, which rescales `M`
/// by `(a'/a)^{κ}` and so shifts each weight by `-κ/2`.
pub fn scaling_dimension_m_symbolic() -> Result<(Coeff, Coeff), OpeError> {
    let b = ParamMatrix::named("B");
    let m = at0(Operator::Fundamental(b));
    let h0 = ope_with_t(&m)?.coefficient_of(&PoleMonomial::single(Z, 2, 0), &m);
    let hb0 = ope_with_tbar(&m)?.coefficient_of(&PoleMonomial::single(Z, 0, 2), &m);

    let oa_m = angular_average(&ope(&Operator::OA.at(Z), &m)?.singular_part());
    let weighted = oa_m.scale(&insertion_weight(&Coeff::gamma()));
    let region = Region::Annulus {
        var: Z,
        inner: Rational::from_integer(1),
        outer: Rational::from_integer(2),
    };
    let integrated = radial_integrate(&weighted, &region)?;
    let kappa = integrated.coefficient_of(&PoleMonomial::finite(), &m).log_part();
    let shift = kappa.scale(rat(-1, 2));
    Ok((&h0 + &shift, &hb0 + &shift))
}

/// `(h, h̄)` of `M` at a given coupling and level.
pub fn scaling_dimension_m(gamma: Rational, n: i128) -> Result<(Rational, Rational), OpeError> {
    let (h, hb) = scaling_dimension_m_symbolic()?;
    let zero = Rational::from_integer(0);
    let eval = |c: &Coeff| c.eval_exact(n, gamma, zero, zero).expect("weights are rational in n, γ");
    Ok((eval(&h), eval(&hb)))
}

/// Multifractal exponent `Δ_q = q(1-q)/n`.
pub fn delta_q(q: f64, n: u32) -> f64 {
    q * (1.0 - q) / n as f64
}

pub fn delta_q_exact(q: Rational, n: i128) -> Rational {
    q * (Rational::from_integer(1) - q) / Rational::from_integer(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(i128, i128, i32, u32, u32)]) -> Coeff {
        // (num, den, n-power, gamma-power, delta-power)
        terms.iter().fold(Coeff::zero(), |acc, &(p, q, lv, g, d)| {
            &acc + &(&(&Coeff::level_pow(lv) * &Coeff::gamma().pow(g)) * &Coeff::delta().pow(d)).scale(rat(p, q))
        })
    }

    #[test]
    fn flows_match_hand_assembly() {
        let b = beta_system().unwrap();
        assert_eq!(b.gamma_flow, poly(&[(-1, 1, -2, 0, 2), (1, 1, -2, 1, 2)]));
        assert_eq!(b.delta_flow, poly(&[(1, 3, -2, 0, 3)]));
        let expected = (&(&Coeff::level_pow(1) * &Coeff::pi_pow(1)) * &Coeff::lambda()).scale(rat(4, 1));
        assert_eq!(b.gamma_flow_lambda, expected);
        assert!(b.no_oi_from_quadruple);
    }

    #[test]
    fn intermediate_coefficients() {
        let b = beta_system().unwrap();
        assert_eq!(b.oi_oi_two_point.log_coefficient, Coeff::from_int(2));
        let two_n2 = Coeff::level_pow(2).scale(rat(2, 1));
        assert_eq!(b.triple_oi_quartic, two_n2);
        assert_eq!(b.triple_oa_quartic, two_n2);
        // ∫_{|u|>|v|} d²u 2n²/|u|⁴ = 2πn²/|v|², the same for either ordering
        let per_ordering = &two_n2 * &Coeff::pi_pow(1);
        for c in [&b.oi_oi_oa, &b.oi_oi_oi] {
            assert!(c.orderings_agree());
            assert_eq!(c.orderings[0], per_ordering);
        }
    }

    #[test]
    fn level_four_and_fixed_point() {
        let b = beta_system().unwrap();
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        let d = rat(3, 10);
        assert_eq!(b.delta_flow.eval_exact(4, zero, d, zero), Some(d * d * d / 48));
        assert_eq!(b.gamma_flow.eval_exact(4, one, d, zero), Some(zero));
        assert_eq!(b.gamma_flow.eval_exact(4, one, zero, zero), Some(zero));
        assert_eq!(b.delta_flow.eval_exact(4, one, zero, zero), Some(zero));
        // λ sector carries no γ
        assert!(b.gamma_flow_lambda.iter().all(|(m, _)| m.gamma == 0));
    }

    #[test]
    fn m_dimension() {
        for n in 1..=10 {
            assert_eq!(scaling_dimension_m(Rational::from_integer(0), n).unwrap(), (rat(1, 2 * n * n), rat(1, 2 * n * n)));
            assert_eq!(scaling_dimension_m(Rational::from_integer(1), n).unwrap(), (rat(0, 1), rat(0, 1)));
        }
        assert_eq!(scaling_dimension_m(rat(1, 2), 4).unwrap(), (rat(1, 64), rat(1, 64)));
    }

    #[test]
    fn multifractal_exponent() {
        assert_eq!(delta_q(0.0, 4), 0.0);
        assert_eq!(delta_q(1.0, 4), 0.0);
        assert_eq!(delta_q(2.0, 4), -0.5);
        assert_eq!(delta_q_exact(rat(2, 1), 4), rat(-1, 2));
    }
}
