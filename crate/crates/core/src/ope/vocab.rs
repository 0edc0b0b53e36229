//! The closed operator vocabulary and the elementary contractions built
//! from it.

use alloc::vec;
use alloc::vec::Vec;

use super::contract::ope;
use super::expansion::{Expansion, OperatorTerm, PoleMonomial};
use super::expr::{Atom, FieldKind, ParamMatrix, Point, TraceChain};
use super::transform::parity_transform;
use super::OpeError;
use crate::coeff::{rat, Coeff};

/// Local operators understood by the engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operator {
    /// `J^A = STr(A J)`.
    Current(ParamMatrix),
    /// `J̄^A = STr(A J̄)`.
    AntiCurrent(ParamMatrix),
    /// `STr(M B)`.
    Fundamental(ParamMatrix),
    /// `STr(M⁻¹ B)`.
    InverseFundamental(ParamMatrix),
    /// Two-trace Abelian deformation `STr J · STr J̄`.
    OA,
    /// Single-trace perturbation `STr(J I J̄ I⁻¹)`.
    OI,
    /// `STr(J M J̄ M⁻¹)`, the integrand of the kinetic perturbation.
    O,
    /// Holomorphic Sugawara stress tensor.
    T,
    /// Antiholomorphic Sugawara stress tensor.
    TBar,
}

fn field(kind: FieldKind, p: Point) -> Atom {
    Atom::field(kind, p)
}

fn chain(atoms: Vec<Atom>) -> TraceChain {
    TraceChain::new(atoms)
}

impl Operator {
    /// The operator inserted at `p`, as a one-factor expansion.
    pub fn at(&self, p: Point) -> Expansion {
        use FieldKind::*;
        let one = |chains: Vec<TraceChain>| vec![OperatorTerm::new(Coeff::one(), PoleMonomial::finite(), chains)];
        let terms = match self {
            Operator::Current(a) => one(vec![chain(vec![Atom::param(a.clone()), field(J, p)])]),
            Operator::AntiCurrent(a) => one(vec![chain(vec![Atom::param(a.clone()), field(Jb, p)])]),
            Operator::Fundamental(b) => one(vec![chain(vec![field(M, p), Atom::param(b.clone())])]),
            Operator::InverseFundamental(b) => {
                one(vec![chain(vec![field(Minv, p), Atom::param(b.clone())])])
            }
            Operator::OA => one(vec![chain(vec![field(J, p)]), chain(vec![field(Jb, p)])]),
            Operator::OI => one(vec![chain(vec![
                field(J, p),
                Atom::param(ParamMatrix::I),
                field(Jb, p),
                Atom::param(ParamMatrix::IInverse),
            ])]),
            Operator::O => one(vec![chain(vec![field(J, p), field(M, p), field(Jb, p), field(Minv, p)])]),
            Operator::T => sugawara(J, p),
            Operator::TBar => sugawara(Jb, p),
        };
        let terms = terms.into_iter().map(|t| t.with_links(vec![0])).collect();
        Expansion::with_origins(terms, 1).normalize()
    }
}

/// `T = -(1/2n) STr(J J) + (1/2n²) STr J STr J`.
fn sugawara(kind: FieldKind, p: Point) -> Vec<OperatorTerm> {
    vec![
        OperatorTerm::new(
            Coeff::level_pow(-1).scale(rat(-1, 2)),
            PoleMonomial::finite(),
            vec![chain(vec![field(kind, p), field(kind, p)])],
        ),
        OperatorTerm::new(
            Coeff::level_pow(-2).scale(rat(1, 2)),
            PoleMonomial::finite(),
            vec![chain(vec![field(kind, p)]), chain(vec![field(kind, p)])],
        ),
    ]
}

/// `J^A(z) J^B(w)`: `-n STr(AB)/(z-w)² + J^{[A,B]}(w)/(z-w)` plus the
/// normal-ordered remainder. Coefficients stay symbolic in `n`.
pub fn contract_current_current(a: &ParamMatrix, b: &ParamMatrix) -> Expansion {
    ope(&Operator::Current(a.clone()).at(Point('z')), &Operator::Current(b.clone()).at(Point('w')))
        .expect("currents always contract")
}

/// Which current acts on `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `J^A(z) · STr(M B)(w)`.
    Left,
    /// `J̄^A(z̄) · STr(B M)(w)`.
    Right,
}

pub fn contract_current_m(a: &ParamMatrix, b: &ParamMatrix, side: Side) -> Expansion {
    let m = Operator::Fundamental(b.clone()).at(Point('w'));
    let current = match side {
        Side::Left => Operator::Current(a.clone()),
        Side::Right => Operator::AntiCurrent(a.clone()),
    };
    ope(&current.at(Point('z')), &m).expect("currents always act on M")
}

/// Singular part of `T(z) · target(0)` with `T` in Sugawara form.
pub fn ope_with_t(target: &Expansion) -> Result<Expansion, OpeError> {
    Ok(ope(&Operator::T.at(Point('z')), target)?.singular_part())
}

/// Antiholomorphic counterpart, computed through the parity map.
pub fn ope_with_tbar(target: &Expansion) -> Result<Expansion, OpeError> {
    Ok(parity_transform(&ope_with_t(&parity_transform(target))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ope::expansion::PoleMonomial;

    fn z(a: u32, b: u32) -> PoleMonomial {
        PoleMonomial::single(Point('z'), a, b)
    }

    fn at_w(chains: Vec<Vec<Atom>>) -> Expansion {
        Expansion::from_terms(vec![OperatorTerm::new(
            Coeff::one(),
            PoleMonomial::finite(),
            chains.into_iter().map(TraceChain::new).collect(),
        )])
    }

    #[test]
    fn identity_currents_have_no_singular_part() {
        let e = contract_current_current(&ParamMatrix::Identity, &ParamMatrix::Identity);
        assert!(e.singular_part().is_zero(), "{e}");
        assert_eq!(e.finite_part().len(), 1);
    }

    #[test]
    fn generic_currents_reproduce_level_and_commutator() {
        let a = ParamMatrix::named("A");
        let b = ParamMatrix::named("B");
        let e = contract_current_current(&a, &b).singular_part().canonical();
        let w = Point('w');
        let pa = Atom::param(a.clone());
        let pb = Atom::param(b.clone());
        let jw = Atom::field(FieldKind::J, w);
        let expected = Expansion::from_terms(vec![
            OperatorTerm::new(-Coeff::level_pow(1), z(2, 0), vec![TraceChain::new(vec![pa.clone(), pb.clone()])]),
            OperatorTerm::new(Coeff::one(), z(1, 0), vec![TraceChain::new(vec![pa.clone(), pb.clone(), jw.clone()])]),
            OperatorTerm::new(-Coeff::one(), z(1, 0), vec![TraceChain::new(vec![pb, pa, jw])]),
        ]);
        assert!(e.equivalent(&expected), "got\n{e}");
    }

    #[test]
    fn equal_parameters_kill_the_simple_pole() {
        let a = ParamMatrix::named("A");
        let e = contract_current_current(&a, &a).singular_part();
        assert_eq!(e.len(), 1);
        assert_eq!(e.terms[0].pole, z(2, 0));
        assert_eq!(e.terms[0].coeff, -Coeff::level_pow(1));
    }

    #[test]
    fn left_and_right_action_on_m() {
        let a = Atom::param(ParamMatrix::named("A"));
        let b = Atom::param(ParamMatrix::named("B"));
        let m = Atom::field(FieldKind::M, Point('w'));
        let left = contract_current_m(&ParamMatrix::named("A"), &ParamMatrix::named("B"), Side::Left)
            .singular_part();
        let expected = at_w(vec![vec![a.clone(), m.clone(), b.clone()]]);
        assert_eq!(left.len(), 1);
        assert_eq!(left.terms[0].pole, z(1, 0));
        assert_eq!(left.terms[0].coeff, -Coeff::one());
        assert_eq!(left.canonical().terms[0].chains, expected.terms[0].chains);

        let right = contract_current_m(&ParamMatrix::named("A"), &ParamMatrix::named("B"), Side::Right)
            .singular_part();
        let expected = at_w(vec![vec![b.clone(), m.clone(), a.clone()]]);
        assert_eq!(right.terms[0].pole, z(0, 1));
        assert_eq!(right.terms[0].coeff, Coeff::one());
        assert_eq!(right.canonical().terms[0].chains, expected.terms[0].chains);

        let ident = contract_current_m(&ParamMatrix::Identity, &ParamMatrix::named("B"), Side::Left)
            .singular_part();
        let expected = at_w(vec![vec![m, b]]);
        assert_eq!(ident.terms[0].coeff, -Coeff::one());
        assert_eq!(ident.canonical().terms[0].chains, expected.terms[0].chains);
    }

    #[test]
    fn fundamental_products_have_no_rule() {
        let m = Operator::Fundamental(ParamMatrix::named("B"));
        let err = ope(&m.at(Point('z')), &m.at(Point::ORIGIN)).unwrap_err();
        assert!(matches!(err, OpeError::UnknownVocabulary(FieldKind::M, FieldKind::M)));
    }
}
