//! Scalar tower: F_q[θ], F_q(θ), and the perfected extension F_q(u) with
//! θ := -u^{(q-1)q^M}, together with the ∞-adic valuation.
//!
//! Depth M controls which roots exist exactly: u^{q^M} is the fixed (q-1)-th
//! root of -θ, and θ^{1/q^i} exists for i <= M. Deepening M -> M' rewrites
//! u -> u^{q^{M'-M}}; it preserves equality and is applied automatically (up to
//! the field's configured cap) when an operation needs more roots.

use std::rc::Rc;

use num_rational::Ratio;

use crate::field::{FieldSpec, Fq};
use crate::spoly::SPoly;

/// ∞-adic valuation, normalized so v(θ) = -1; None encodes v(0) = +∞.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Valuation(pub Option<Ratio<i64>>);

impl Valuation {
    pub fn infinite() -> Self {
        Valuation(None)
    }

    pub fn finite(r: Ratio<i64>) -> Self {
        Valuation(Some(r))
    }

    pub fn from_int(n: i64) -> Self {
        Valuation(Some(Ratio::from_integer(n)))
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_none()
    }

    pub fn add(&self, other: &Valuation) -> Valuation {
        match (self.0, other.0) {
            (Some(a), Some(b)) => Valuation(Some(a + b)),
            _ => Valuation(None),
        }
    }

    pub fn min(&self, other: &Valuation) -> Valuation {
        match (self.0, other.0) {
            (Some(a), Some(b)) => Valuation(Some(a.min(b))),
            (Some(a), None) => Valuation(Some(a)),
            (None, b) => Valuation(b),
        }
    }

    /// true when self >= other (with +∞ the top element).
    pub fn ge(&self, other: &Valuation) -> bool {
        match (self.0, other.0) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a >= b,
        }
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            None => write!(f, "+inf"),
            Some(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalarError {
    DivisionByZero,
    /// Deepening past the configured cap was required.
    DepthCapExceeded { needed: u32, cap: u32 },
    /// A q^n-th root was requested for an element that has none at any depth
    /// within the cap.
    NotAQthPower,
    /// A value expected to lie in F_q(θ) had fractional u-exponents.
    NotRational,
}

impl std::fmt::Display for ScalarError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarError::DivisionByZero => write!(f, "division by zero"),
            ScalarError::DepthCapExceeded { needed, cap } => {
                write!(f, "depth {} exceeds the configured cap {}", needed, cap)
            }
            ScalarError::NotAQthPower => write!(f, "not a q-th power at maximal allowed depth"),
            ScalarError::NotRational => write!(f, "value does not lie in F_q(theta)"),
        }
    }
}

impl std::error::Error for ScalarError {}

/// An element of F_q(θ): num/den with den monic and gcd(num, den) = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalScalar {
    pub num: SPoly,
    pub den: SPoly,
}

impl RationalScalar {
    pub fn field(&self) -> &Rc<FieldSpec> {
        &self.num.field
    }

    pub fn from_poly(num: SPoly) -> Self {
        let den = SPoly::one(&num.field);
        RationalScalar { num, den }
    }

    pub fn new(num: SPoly, den: SPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: SPoly, den: SPoly) -> Self {
        let field = num.field.clone();
        if num.is_zero() {
            return RationalScalar { num, den: SPoly::one(&field) };
        }
        let (mut num, mut den) = (num, den);
        // Monomial content first, then full gcd when sizes permit.
        let shift = num.order().unwrap_or(0).min(den.order().unwrap_or(0));
        if shift > 0 {
            num = num.try_div_exact(&SPoly::monomial(&field, Fq::ONE, shift)).unwrap();
            den = den.try_div_exact(&SPoly::monomial(&field, Fq::ONE, shift)).unwrap();
        }
        if let Some(g) = num.gcd(&den) {
            if !g.is_one() {
                num = num.try_div_exact(&g).expect("gcd divides");
                den = den.try_div_exact(&g).expect("gcd divides");
            }
        }
        let (den, lc) = den.make_monic();
        if lc != Fq::ONE {
            num = num.scale(field.inv(lc));
        }
        RationalScalar { num, den }
    }

    pub fn zero(field: &Rc<FieldSpec>) -> Self {
        Self::from_poly(SPoly::zero(field))
    }

    pub fn one(field: &Rc<FieldSpec>) -> Self {
        Self::from_poly(SPoly::one(field))
    }

    pub fn theta(field: &Rc<FieldSpec>) -> Self {
        Self::from_poly(SPoly::monomial(field, Fq::ONE, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Self::reduced(num, self.den.mul(&other.den))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RationalScalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::reduced(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduced(self.num.mul(&other.den), self.den.mul(&other.num)))
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            return Valuation::infinite();
        }
        let dn = self.num.degree().unwrap_or(0) as i64;
        let dd = self.den.degree().unwrap_or(0) as i64;
        Valuation::from_int(dd - dn)
    }

    /// Embed into F_q(u) at the given depth: θ -> -u^{(q-1)q^M}.
    pub fn embed(&self, depth: u32) -> PerfectedScalar {
        let field = self.field().clone();
        let step = theta_u_exponent(&field, depth);
        let map = |p: &SPoly| -> SPoly {
            let mut out = SPoly::zero(&field);
            for (&e, &c) in &p.terms {
                let sign = field.sign_pow(e);
                out.add_term(e.checked_mul(step).expect("exponent overflow"), field.mul(c, sign));
            }
            out
        };
        PerfectedScalar::normalized(depth, map(&self.num), map(&self.den))
    }
}

/// u-exponent of θ at a given depth: θ = -u^{(q-1)q^M}.
pub fn theta_u_exponent(field: &FieldSpec, depth: u32) -> u64 {
    (field.q as u64 - 1) * (field.q as u64).pow(depth)
}

/// An element of F_q(u) at perfection depth M.
///
/// Canonical form keeps the denominator monic with no common monomial content;
/// a full gcd reduction is applied when degrees are small enough for dense
/// arithmetic. Equality is cross-multiplied and therefore exact either way.
#[derive(Clone, Debug)]
pub struct PerfectedScalar {
    pub depth: u32,
    pub num: SPoly,
    pub den: SPoly,
}

impl PerfectedScalar {
    pub fn field(&self) -> &Rc<FieldSpec> {
        &self.num.field
    }

    fn normalized(depth: u32, num: SPoly, den: SPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let field = num.field.clone();
        if num.is_zero() {
            return PerfectedScalar { depth, num, den: SPoly::one(&field) };
        }
        let (mut num, mut den) = (num, den);
        let shift = num.order().unwrap_or(0).min(den.order().unwrap_or(0));
        if shift > 0 {
            num = num.try_div_exact(&SPoly::monomial(&field, Fq::ONE, shift)).unwrap();
            den = den.try_div_exact(&SPoly::monomial(&field, Fq::ONE, shift)).unwrap();
        }
        if !den.is_one() {
            if let Some(g) = num.gcd(&den) {
                if !g.is_one() {
                    num = num.try_div_exact(&g).expect("gcd divides");
                    den = den.try_div_exact(&g).expect("gcd divides");
                }
            }
        }
        let (den, lc) = den.make_monic();
        if lc != Fq::ONE {
            num = num.scale(field.inv(lc));
        }
        PerfectedScalar { depth, num, den }
    }

    pub fn zero(field: &Rc<FieldSpec>, depth: u32) -> Self {
        PerfectedScalar { depth, num: SPoly::zero(field), den: SPoly::one(field) }
    }

    pub fn one(field: &Rc<FieldSpec>, depth: u32) -> Self {
        PerfectedScalar { depth, num: SPoly::one(field), den: SPoly::one(field) }
    }

    pub fn u(field: &Rc<FieldSpec>, depth: u32) -> Self {
        PerfectedScalar { depth, num: SPoly::monomial(field, Fq::ONE, 1), den: SPoly::one(field) }
    }

    pub fn theta(field: &Rc<FieldSpec>, depth: u32) -> Self {
        RationalScalar::theta(field).embed(depth)
    }

    /// θ^(q^k) as a u-monomial at this value's depth.
    pub fn theta_qpow(field: &Rc<FieldSpec>, depth: u32, k: u32) -> Self {
        let exp = theta_u_exponent(field, depth)
            .checked_mul((field.q as u64).pow(k))
            .expect("exponent overflow");
        PerfectedScalar {
            depth,
            num: SPoly::monomial(field, field.minus_one(), exp),
            den: SPoly::one(field),
        }
    }

    pub fn from_parts(depth: u32, num: SPoly, den: SPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::normalized(depth, num, den))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Rewrite u -> u^{q^{M'-M}}; equality-preserving.
    pub fn deepen(&self, new_depth: u32) -> Self {
        assert!(new_depth >= self.depth, "deepen only increases M");
        let n = new_depth - self.depth;
        if n == 0 {
            return self.clone();
        }
        PerfectedScalar {
            depth: new_depth,
            num: self.num.frobenius_scale(n),
            den: self.den.frobenius_scale(n),
        }
    }

    fn unify(&self, other: &Self) -> (Self, Self) {
        let d = self.depth.max(other.depth);
        (self.deepen(d), other.deepen(d))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.unify(other);
        let num = a.num.mul(&b.den).add(&b.num.mul(&a.den));
        Self::normalized(a.depth, num, a.den.mul(&b.den))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PerfectedScalar { depth: self.depth, num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.unify(other);
        Self::normalized(a.depth, a.num.mul(&b.num), a.den.mul(&b.den))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let (a, b) = self.unify(other);
        Ok(Self::normalized(a.depth, a.num.mul(&b.den), a.den.mul(&b.num)))
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        Self::one(self.field(), self.depth).div(self)
    }

    pub fn pow(&self, e: u64) -> Self {
        Self::normalized(self.depth, self.num.pow(e), self.den.pow(e))
    }

    pub fn eq_value(&self, other: &Self) -> bool {
        let (a, b) = self.unify(other);
        a.num.mul(&b.den) == b.num.mul(&a.den)
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            return Valuation::infinite();
        }
        let unit = theta_u_exponent(self.field(), self.depth) as i64;
        let dn = self.num.degree().unwrap_or(0) as i64;
        let dd = self.den.degree().unwrap_or(0) as i64;
        Valuation::finite(Ratio::new(dd - dn, unit))
    }

    /// x^{q^n}. Forward twists (n >= 0) are total; n < 0 takes q^{-n}-th roots,
    /// deepening automatically up to the field's cap.
    pub fn frobenius_power(&self, n: i32) -> Result<Self, ScalarError> {
        if n >= 0 {
            return Ok(PerfectedScalar {
                depth: self.depth,
                num: self.num.frobenius_scale(n as u32),
                den: self.den.frobenius_scale(n as u32),
            });
        }
        let k = (-n) as u32;
        let have = self.num.root_order(k).min(self.den.root_order(k));
        let extra = k - have;
        let cap = self.field().depth_cap;
        if self.depth + extra > cap {
            return Err(ScalarError::DepthCapExceeded { needed: self.depth + extra, cap });
        }
        let deepened = self.deepen(self.depth + extra);
        let num = deepened.num.try_root(k).ok_or(ScalarError::NotAQthPower)?;
        let den = deepened.den.try_root(k).ok_or(ScalarError::NotAQthPower)?;
        Ok(PerfectedScalar { depth: deepened.depth, num, den })
    }

    /// View in F_q(θ) when all u-exponents are multiples of (q-1)q^M.
    pub fn to_rational(&self) -> Result<RationalScalar, ScalarError> {
        let field = self.field().clone();
        let step = theta_u_exponent(&field, self.depth);
        let map = |p: &SPoly| -> Result<SPoly, ScalarError> {
            let mut out = SPoly::zero(&field);
            for (&e, &c) in &p.terms {
                if e % step != 0 {
                    return Err(ScalarError::NotRational);
                }
                let k = e / step;
                out.add_term(k, field.mul(c, field.sign_pow(k)));
            }
            Ok(out)
        };
        RationalScalar::new(map(&self.num)?, map(&self.den)?)
    }
}

impl PartialEq for PerfectedScalar {
    fn eq(&self, other: &Self) -> bool {
        self.eq_value(other)
    }
}
impl Eq for PerfectedScalar {}

/// v of a θ-polynomial presented sparsely: -degree.
pub fn theta_poly_valuation(p: &SPoly) -> Valuation {
    match p.degree() {
        None => Valuation::infinite(),
        Some(d) => Valuation::from_int(-(d as i64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_create;

    fn f3() -> Rc<FieldSpec> {
        field_create(3, 1, None).unwrap()
    }

    fn theta_pow_plus(field: &Rc<FieldSpec>, terms: &[(u64, i64)]) -> RationalScalar {
        let mut p = SPoly::zero(field);
        for &(e, c) in terms {
            p.add_term(e, field.from_int(c));
        }
        RationalScalar::from_poly(p)
    }

    #[test]
    fn valuation_basics() {
        let f = f3();
        // v(θ^2 + 1) = -2
        let x = theta_pow_plus(&f, &[(2, 1), (0, 1)]);
        assert_eq!(x.valuation(), Valuation::from_int(-2));
        // v(1/θ) = 1
        let inv_theta = RationalScalar::one(&f).div(&RationalScalar::theta(&f)).unwrap();
        assert_eq!(inv_theta.valuation(), Valuation::from_int(1));
        assert!(RationalScalar::zero(&f).valuation().is_infinite());
    }

    #[test]
    fn embedding_is_ring_compatible() {
        let f = f3();
        let x = theta_pow_plus(&f, &[(2, 1), (1, 2)]);
        let y = theta_pow_plus(&f, &[(0, 1), (3, 1)]);
        for depth in [0u32, 1, 2] {
            let ex = x.embed(depth);
            let ey = y.embed(depth);
            assert_eq!(x.add(&y).embed(depth), ex.add(&ey));
            assert_eq!(x.mul(&y).embed(depth), ex.mul(&ey));
        }
    }

    #[test]
    fn theta_is_minus_u_power() {
        let f = f3();
        let th = PerfectedScalar::theta(&f, 1);
        // θ = -u^6 at q=3, M=1.
        assert_eq!(th.num, SPoly::monomial(&f, f.minus_one(), 6));
        assert_eq!(th.valuation(), Valuation::from_int(-1));
        let u = PerfectedScalar::u(&f, 1);
        assert_eq!(u.valuation(), Valuation::finite(Ratio::new(-1, 6)));
    }

    #[test]
    fn frobenius_roundtrip() {
        let f = f3();
        let th = PerfectedScalar::theta(&f, 1);
        let r = th.frobenius_power(-1).unwrap();
        // θ^{1/3} = -u^2 at M=1.
        assert_eq!(r.num, SPoly::monomial(&f, f.minus_one(), 2));
        assert_eq!(r.frobenius_power(1).unwrap(), th);
    }

    #[test]
    fn frobenius_deepens_automatically() {
        let f2 = field_create(2, 1, None).unwrap();
        // θ+1 at depth 0 (q=2: θ = u): sqrt needs depth 1.
        let x = RationalScalar::theta(&f2).add(&RationalScalar::one(&f2)).embed(0);
        let r = x.frobenius_power(-1).unwrap();
        assert_eq!(r.depth, 1);
        assert_eq!(r.frobenius_power(1).unwrap(), x.deepen(1));
    }

    #[test]
    fn depth_cap_is_an_error() {
        let f2 = crate::field::field_create_with_cap(2, 1, None, 1).unwrap();
        let x = RationalScalar::theta(&f2).add(&RationalScalar::one(&f2)).embed(0);
        assert!(matches!(
            x.frobenius_power(-2),
            Err(ScalarError::DepthCapExceeded { needed: 2, cap: 1 })
        ));
    }

    #[test]
    fn deepen_roundtrip_equality() {
        let f = f3();
        let x = theta_pow_plus(&f, &[(4, 2), (1, 1)])
            .div(&theta_pow_plus(&f, &[(2, 1), (0, 1)]))
            .unwrap();
        let e0 = x.embed(0);
        let e2 = x.embed(2);
        assert_eq!(e0.deepen(2), e2);
        assert_eq!(e0, e2); // eq unifies depths
    }

    #[test]
    fn d2_valuation_is_minus_i_q_i() {
        // D_2 = (θ^9-θ)(θ^3-θ)^3 for q=3; v = -18.
        let f = f3();
        let b1 = theta_pow_plus(&f, &[(3, 1), (1, -1)]);
        let b2 = theta_pow_plus(&f, &[(9, 1), (1, -1)]);
        let d2 = b2.mul(&b1.mul(&b1).mul(&b1));
        assert_eq!(d2.valuation(), Valuation::from_int(-18));
    }
}
