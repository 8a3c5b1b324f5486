use pforms::forms::*;
use pforms::mesh::CellKind;
use pforms::{Rational, Scalar};

type Q = Rational;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn form(dim: usize, degree: usize, terms: &[(&[usize], &[u8], Q)]) -> PolyForm<Q> {
    PolyForm::from_terms(dim, degree, terms.iter().map(|(a, e, c)| (*a, *e, c.clone()))).unwrap()
}

#[test]
fn wedge_examples() {
    let dx = PolyForm::<Q>::dx(2, &[0]);
    let dy = PolyForm::<Q>::dx(2, &[1]);
    assert_eq!(wedge(&dx, &dy).unwrap(), PolyForm::dx(2, &[0, 1]));
    assert!(wedge(&dx, &dx).unwrap().is_zero());
    let u = form(2, 1, &[(&[1], &[1, 0], q(1, 1))]);
    let v = form(2, 1, &[(&[0], &[0, 1], q(1, 1))]);
    let expected = form(2, 2, &[(&[0, 1], &[1, 1], q(-1, 1))]);
    assert_eq!(wedge(&u, &v).unwrap(), expected);
}

#[test]
fn wedge_errors() {
    let a = PolyForm::<Q>::dx(2, &[0]);
    let b = PolyForm::<Q>::dx(3, &[0]);
    assert!(wedge(&a, &b).is_err());
    let c = PolyForm::<Q>::dx(2, &[0, 1]);
    assert!(wedge(&c, &a).is_err());
}

#[test]
fn exterior_derivative_examples() {
    assert!(exterior_derivative(&PolyForm::constant(2, q(3, 1))).unwrap().is_zero());
    let u = form(2, 1, &[(&[1], &[1, 0], q(1, 1))]);
    assert_eq!(exterior_derivative(&u).unwrap(), PolyForm::dx(2, &[0, 1]));
    assert!(exterior_derivative(&PolyForm::<Q>::dx(2, &[0, 1])).is_err());
}

#[test]
fn interior_product_examples() {
    let zero = vec![q(0, 1); 2];
    let r = interior_product(&zero, &PolyForm::dx(2, &[0, 1])).unwrap();
    let expected = form(2, 1, &[(&[1], &[1, 0], q(1, 1)), (&[0], &[0, 1], q(-1, 1))]);
    assert_eq!(r, expected);
    let r = interior_product(&zero, &PolyForm::dx(2, &[1])).unwrap();
    assert_eq!(r, PolyForm::coordinate(2, 1));
    assert!(interior_product(&zero, &PolyForm::constant(2, q(1, 1))).is_err());
}

#[test]
fn poincare_point_examples() {
    let zero = vec![q(0, 1); 2];
    let dy = PolyForm::<Q>::dx(2, &[1]);
    let r = poincare_point(&zero, &dy).unwrap();
    assert_eq!(r, PolyForm::coordinate(2, 1));
    assert_eq!(exterior_derivative(&r).unwrap(), dy);

    let area = PolyForm::<Q>::dx(2, &[0, 1]);
    let r = poincare_point(&zero, &area).unwrap();
    let expected = form(2, 1, &[(&[1], &[1, 0], q(1, 2)), (&[0], &[0, 1], q(-1, 2))]);
    assert_eq!(r, expected);
    assert_eq!(exterior_derivative(&r).unwrap(), area);

    let xdx = form(2, 1, &[(&[0], &[1, 0], q(1, 1))]);
    let r = poincare_point(&zero, &xdx).unwrap();
    assert_eq!(r, form(2, 0, &[(&[], &[2, 0], q(1, 2))]));
}

fn unit_weight(dim: usize) -> BumpWeight<Q> {
    BumpWeight::new(vec![q(1, 3); dim], vec![q(1, 8); dim], 2).unwrap()
}

#[test]
fn regularized_lifting_examples() {
    let w = unit_weight(2);
    let dy = PolyForm::<Q>::dx(2, &[1]);
    let phi = poincare_regularized(&w, &dy).unwrap();
    assert_eq!(exterior_derivative(&phi).unwrap(), dy);
    let area = PolyForm::<Q>::dx(2, &[0, 1]);
    let rho = poincare_regularized(&w, &area).unwrap();
    assert_eq!(exterior_derivative(&rho).unwrap(), area);
}

#[test]
fn bump_weight_is_normalized_and_vanishes_on_the_boundary() {
    let w = unit_weight(3);
    assert_eq!(w.mean(&PolyForm::constant(3, q(1, 1))), q(1, 1));
    let edge = vec![q(1, 3) + q(1, 8), q(1, 3), q(1, 3)];
    assert_eq!(w.eval(&edge), q(0, 1));
    assert!(w.eval(&[q(1, 3), q(1, 3), q(1, 3)]) > q(0, 1));
    assert!(BumpWeight::with_normalization(vec![q(0, 1)], vec![q(1, 1)], 2, q(1, 1)).is_err());
    assert!(BumpWeight::with_normalization(vec![q(0, 1)], vec![q(1, 1)], 2, q(15, 16)).is_ok());
}

#[test]
fn homotopy_examples() {
    let w = Lifting::Regularized(unit_weight(2));
    assert!(check_homotopy(&PolyForm::constant(2, q(1, 1)), &w).is_zero());
    let ydx = form(2, 1, &[(&[0], &[0, 1], q(1, 1))]);
    assert!(check_homotopy(&ydx, &w).is_zero());
    assert!(check_homotopy(&PolyForm::dx(2, &[0, 1]), &w).is_zero());
    let p = Lifting::Point(vec![q(1, 5), q(-2, 7)]);
    assert!(check_homotopy(&ydx, &p).is_zero());
}

#[test]
fn homotopy_three_dim_degree_four_one_form() {
    // Fixed pseudo-random coefficients; the identity must hold exactly.
    let mut u = PolyForm::<Q>::zero(3, 1);
    let mut seed = 7i64;
    for idx in FormIndex::all(3, 1) {
        for m in Monomial::all_up_to(3, 4) {
            seed = (seed * 48271) % 2147483647;
            u.add_term(idx, m, q(seed % 11 - 5, 1 + seed % 7));
        }
    }
    let w = BumpWeight::new(vec![q(1, 4), q(1, 4), q(1, 4)], vec![q(1, 16); 3], 2).unwrap();
    assert!(check_homotopy(&u, &Lifting::Regularized(w)).is_zero());
}

#[test]
fn pullback_examples() {
    let u = form(2, 1, &[(&[0], &[2, 1], q(3, 1)), (&[1], &[0, 3], q(-1, 2))]);
    assert_eq!(pullback(&AffineMap::identity(2), &u).unwrap(), u);
    let t = AffineMap::translation(vec![q(2, 1), q(5, 1)]);
    let x = PolyForm::<Q>::coordinate(2, 0);
    let expected = &x + &PolyForm::constant(2, q(2, 1));
    assert_eq!(pullback(&t, &x).unwrap(), expected);
    let phi = AffineMap::new(vec![vec![q(1, 2), q(1, 1)], vec![q(-1, 3), q(2, 1)]], vec![q(1, 1), q(0, 1)]).unwrap();
    let lhs = pullback(&phi, &exterior_derivative(&u).unwrap()).unwrap();
    let rhs = exterior_derivative(&pullback(&phi, &u).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
    assert!(AffineMap::new(vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]], vec![q(0, 1); 2]).is_err());
    assert!(pullback(&AffineMap::identity(3), &u).is_err());
}

#[test]
fn l2_inner_examples() {
    let tri = CellGeometry::<Q>::unit(CellKind::Simplex, 2);
    let dx = PolyForm::<Q>::dx(2, &[0]);
    let dy = PolyForm::<Q>::dx(2, &[1]);
    assert_eq!(l2_inner(&dx, &dx, &tri).unwrap(), q(1, 2));
    assert_eq!(l2_inner(&dx, &dy, &tri).unwrap(), q(0, 1));
    let sq = CellGeometry::<Q>::unit(CellKind::Cube, 2);
    let x = PolyForm::<Q>::coordinate(2, 0);
    assert_eq!(l2_inner(&x, &x, &sq).unwrap(), q(1, 3));
    let flat = CellGeometry::<Q>::simplex(&[vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]]);
    assert!(l2_inner(&x, &x, &flat).is_err());
}

#[test]
fn l2_inner_on_a_mapped_simplex() {
    // ∫ x² over the triangle (0,0),(2,0),(0,1): ∫₀² x²(1 − x/2) dx = 8/3 − 2 = 2/3.
    let tri = CellGeometry::<Q>::simplex(&[vec![q(0, 1), q(0, 1)], vec![q(2, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]);
    let x = PolyForm::<Q>::coordinate(2, 0);
    assert_eq!(l2_inner(&x, &x, &tri).unwrap(), q(2, 3));
}

#[test]
fn display_is_readable() {
    let u = form(2, 1, &[(&[0], &[1, 2], q(-3, 2))]);
    assert_eq!(u.to_string(), "(-3/2)*x*y^2 dx");
}
