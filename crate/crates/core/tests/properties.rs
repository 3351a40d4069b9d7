//! Property tests: ring axioms across the scalar tower, Frobenius as a ring
//! endomorphism, valuation laws, twist composition, normalization
//! invariance, determinant multiplicativity, and stuffle conservation laws.

use std::rc::Rc;

use proptest::prelude::*;

use carlitz_core::bivar::{FactoredRational, MatrixFR};
use carlitz_core::field::{field_create, FieldSpec, Fq};
use carlitz_core::polylog::{stuffle_expand, Index, PointTuple};
use carlitz_core::scalar::{PerfectedScalar, RationalScalar};
use carlitz_core::spoly::SPoly;

fn f3() -> Rc<FieldSpec> {
    field_create(3, 1, None).unwrap()
}

fn f4() -> Rc<FieldSpec> {
    field_create(2, 2, None).unwrap()
}

prop_compose! {
    fn arb_poly()(coeffs in prop::collection::vec((0u64..8, 0u16..3), 0..5)) -> SPoly {
        let field = f3();
        let mut p = SPoly::zero(&field);
        for (e, c) in coeffs {
            p.add_term(e, Fq(c));
        }
        p
    }
}

prop_compose! {
    fn arb_rational()(num in arb_poly(), den in arb_poly()) -> RationalScalar {
        if den.is_zero() {
            RationalScalar::from_poly(num)
        } else {
            RationalScalar::new(num, den).unwrap()
        }
    }
}

prop_compose! {
    fn arb_fr()(num in arb_poly(), i in 0u32..4, e in 0u64..3) -> FactoredRational {
        let field = f3();
        let mut den = std::collections::BTreeMap::new();
        if e > 0 {
            den.insert(i, e);
        }
        let base = FactoredRational::bracket_product_den(&field, 0, &den);
        let scalar = PerfectedScalar { depth: 0, num: num.clone(), den: SPoly::one(&field) };
        if num.is_zero() {
            base
        } else {
            base.scalar_mul(&scalar).add(&FactoredRational::bracket(&field, 0, i + 1))
        }
    }
}

proptest! {
    #[test]
    fn fq_field_axioms(a in 0u16..4, b in 0u16..4, c in 0u16..4) {
        let f = f4();
        let (a, b, c) = (Fq(a), Fq(b), Fq(c));
        prop_assert_eq!(f.add(a, f.add(b, c)), f.add(f.add(a, b), c));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a)), Fq::ONE);
        }
    }

    #[test]
    fn rational_ring_axioms(x in arb_rational(), y in arb_rational(), z in arb_rational()) {
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.add(&y), y.add(&x));
    }

    #[test]
    fn perfected_ring_axioms(x in arb_rational(), y in arb_rational(), z in arb_rational()) {
        let (x, y, z) = (x.embed(1), y.embed(0), z.embed(2));
        prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
    }

    #[test]
    fn frobenius_is_ring_endomorphism(x in arb_rational(), y in arb_rational(), n in 1i32..3) {
        let (x, y) = (x.embed(0), y.embed(0));
        let fx = x.frobenius_power(n).unwrap();
        let fy = y.frobenius_power(n).unwrap();
        prop_assert_eq!(x.add(&y).frobenius_power(n).unwrap(), fx.add(&fy));
        prop_assert_eq!(x.mul(&y).frobenius_power(n).unwrap(), fx.mul(&fy));
    }

    #[test]
    fn frobenius_roundtrip(x in arb_rational(), n in 1i32..3) {
        let x = x.embed(0);
        let fwd = x.frobenius_power(n).unwrap();
        let back = fwd.frobenius_power(-n).unwrap();
        prop_assert_eq!(back, x);
    }

    // valuation multiplicativity and the ultrametric inequality
    #[test]
    fn valuation_laws(x in arb_rational(), y in arb_rational()) {
        let vx = x.valuation();
        let vy = y.valuation();
        prop_assert_eq!(x.mul(&y).valuation(), vx.add(&vy));
        let vsum = x.add(&y).valuation();
        prop_assert!(vsum.ge(&vx.min(&vy)));
        if vx != vy {
            prop_assert_eq!(vsum, vx.min(&vy));
        }
    }

    #[test]
    fn depth_change_roundtrip(x in arb_rational(), m in 0u32..3) {
        let at_m = x.embed(m);
        let deeper = at_m.deepen(m + 2);
        prop_assert_eq!(&deeper, &at_m);
        prop_assert_eq!(deeper, x.embed(m + 2));
    }

    #[test]
    fn twist_composition(x in arb_fr()) {
        prop_assert!(x.twist_forward(1).twist_forward(1).eq_value(&x.twist_forward(2)));
    }

    #[test]
    fn arithmetic_invariant_under_normalization(x in arb_fr(), y in arb_fr()) {
        let plain = x.add(&y);
        let normalized = x.normalize().add(&y.normalize());
        prop_assert!(plain.eq_value(&normalized));
        prop_assert!(x.mul(&y).eq_value(&x.normalize().mul(&y.normalize())));
    }

    #[test]
    fn determinant_multiplicative(a in arb_fr(), b in arb_fr(), c in arb_fr(), d in arb_fr(),
                                  e in arb_fr(), g in arb_fr(), h in arb_fr(), k in arb_fr()) {
        let m1 = MatrixFR::new(2, 2, vec![a, b, c, d]);
        let m2 = MatrixFR::new(2, 2, vec![e, g, h, k]);
        let lhs = m1.mul(&m2).det();
        let rhs = m1.det().mul(&m2.det());
        prop_assert!(lhs.eq_value(&rhs));
    }

    #[test]
    fn stuffle_conservation(p1 in prop::collection::vec(1u64..3, 1..3),
                            p2 in prop::collection::vec(1u64..3, 1..3)) {
        let field = f3();
        let s1 = Index::new(p1.clone());
        let s2 = Index::new(p2.clone());
        // distinct small points so multiplicativity is visible
        let z = |k: u64| RationalScalar::one(&field)
            .div(&RationalScalar::from_poly(SPoly::monomial(&field, Fq::ONE, k + 1)))
            .unwrap();
        let z1 = PointTuple::new((0..s1.depth()).map(|i| z(i as u64)).collect());
        let z2 = PointTuple::new((0..s2.depth()).map(|i| z(i as u64 + 3)).collect());
        let product_of = |pt: &PointTuple| {
            pt.entries.iter().fold(RationalScalar::one(&field), |acc, v| acc.mul(v))
        };
        let total_weight = s1.weight() + s2.weight();
        let total_point = product_of(&z1).mul(&product_of(&z2));
        for term in stuffle_expand(&s1, &s2, &z1, &z2) {
            prop_assert_eq!(term.index.weight(), total_weight);
            prop_assert!(term.index.depth() >= s1.depth().max(s2.depth()));
            prop_assert!(term.index.depth() <= s1.depth() + s2.depth());
            prop_assert_eq!(product_of(&term.point), total_point.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // bulk run of the valuation laws (~10^3 random pairs)
    #[test]
    fn valuation_laws_bulk(x in arb_rational(), y in arb_rational()) {
        prop_assert_eq!(x.mul(&y).valuation(), x.valuation().add(&y.valuation()));
        prop_assert!(x.add(&y).valuation().ge(&x.valuation().min(&y.valuation())));
    }
}
