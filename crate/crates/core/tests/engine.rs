use iqht_core::ope::*;
use iqht_core::{rat, Coeff};

const Z: Point = Point('z');
const O: Point = Point::ORIGIN;

fn pole(a: u32, b: u32) -> PoleMonomial {
    PoleMonomial::single(Z, a, b)
}

fn chain(atoms: Vec<Atom>) -> TraceChain {
    TraceChain::new(atoms)
}

fn j(p: Point) -> Atom {
    Atom::field(FieldKind::J, p)
}

fn jb(p: Point) -> Atom {
    Atom::field(FieldKind::Jb, p)
}

fn term(c: Coeff, p: PoleMonomial, chains: Vec<TraceChain>) -> OperatorTerm {
    OperatorTerm::new(c, p, chains)
}

#[test]
fn oi_times_oi_singular_part() {
    let e = ope(&Operator::OI.at(Z), &Operator::OI.at(O)).unwrap();
    let expected = Expansion::from_terms(vec![
        term(-Coeff::level_pow(1), pole(2, 0), vec![chain(vec![jb(O), jb(O)])]),
        term(-Coeff::level_pow(1), pole(0, 2), vec![chain(vec![j(O), j(O)])]),
        term(Coeff::from_int(2), pole(1, 1), vec![chain(vec![j(O)]), chain(vec![jb(O)])]),
    ]);
    assert!(e.singular_part().equivalent(&expected), "{e}");
}

#[test]
fn oi_times_oi_keeps_the_normal_ordered_product_until_filtered() {
    let e = ope(&Operator::OI.at(Z), &Operator::OI.at(O)).unwrap();
    let finite = e.finite_part();
    let disconnected: Vec<_> = finite.terms.iter().filter(|t| !t.connected).collect();
    assert_eq!(disconnected.len(), 1);
    assert_eq!(disconnected[0].chains.len(), 2);
    assert!(connected_part(&finite).terms.iter().all(|t| t.connected));
}

#[test]
fn oa_times_oa_is_regular() {
    let e = ope(&Operator::OA.at(Z), &Operator::OA.at(O)).unwrap();
    assert!(e.singular_part().is_zero(), "{e}");
    assert!(!e.finite_part().is_zero());
}

#[test]
fn oa_times_m_has_minus_m_over_modulus_squared() {
    let m = Operator::Fundamental(ParamMatrix::named("B")).at(O);
    let e = angular_average(&ope(&Operator::OA.at(Z), &m).unwrap().singular_part());
    assert_eq!(e.len(), 1);
    assert_eq!(e.coefficient_of(&pole(1, 1), &m), -Coeff::one());
}

#[test]
fn stress_tensor_weights() {
    let b = ParamMatrix::named("B");
    let m = Operator::Fundamental(b.clone()).at(O);
    let tm = ope_with_t(&m).unwrap();
    assert_eq!(tm.coefficient_of(&pole(2, 0), &m), Coeff::level_pow(-2).scale(rat(1, 2)));
    // first-order pole carries the (1/n) STr(J M B) piece of ∂M
    let jmb = Expansion::from_terms(vec![term(
        Coeff::one(),
        PoleMonomial::finite(),
        vec![chain(vec![j(O), Atom::field(FieldKind::M, O), Atom::param(b)])],
    )]);
    assert_eq!(tm.coefficient_of(&pole(1, 0), &jmb), Coeff::level_pow(-1));

    let oa = Operator::OA.at(O);
    let t_oa = ope_with_t(&oa).unwrap();
    let expected = Expansion::from_terms(vec![term(
        Coeff::one(),
        pole(2, 0),
        vec![chain(vec![j(O)]), chain(vec![jb(O)])],
    )]);
    assert!(t_oa.equivalent(&expected), "{t_oa}");
    assert_eq!(t_oa.coefficient_of(&pole(2, 0), &oa), Coeff::one());
}

#[test]
fn stress_tensor_on_kinetic_operator() {
    let o = Operator::O.at(O);
    let t_o = ope_with_t(&o).unwrap();
    let oa = Operator::OA.at(O);
    assert_eq!(t_o.coefficient_of(&pole(2, 0), &o), Coeff::one());
    assert_eq!(t_o.coefficient_of(&pole(2, 0), &oa), -Coeff::level_pow(-1));
    assert_eq!(t_o.len(), 2, "{t_o}");
    let tb_o = ope_with_tbar(&o).unwrap();
    assert_eq!(tb_o.coefficient_of(&pole(0, 2), &o), Coeff::one());
    assert_eq!(tb_o.coefficient_of(&pole(0, 2), &oa), -Coeff::level_pow(-1));
}

#[test]
fn parity_maps_current_products_onto_barred_products() {
    let a = ParamMatrix::named("A");
    let b = ParamMatrix::named("B");
    let holo = contract_current_current(&a, &b).singular_part();
    let anti = ope(&Operator::AntiCurrent(a).at(Z), &Operator::AntiCurrent(b).at(Point('w')))
        .unwrap()
        .singular_part();
    assert!(parity_transform(&holo).equivalent(&anti), "{holo}\n{anti}");
}

#[test]
fn unknown_vocabulary_is_reported() {
    let m = Operator::InverseFundamental(ParamMatrix::named("B"));
    let err = ope(&m.at(Z), &Operator::Fundamental(ParamMatrix::named("B")).at(O)).unwrap_err();
    assert!(matches!(err, OpeError::UnknownVocabulary(..)));
}
