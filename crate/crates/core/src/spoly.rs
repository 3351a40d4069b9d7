//! Sparse univariate polynomials over F_q, keyed by exponent.
//!
//! Exponents routinely reach q^{N+d} in the cutoff identities, so polynomials
//! are exponent maps rather than dense vectors. Powers are taken through the
//! base-q digits of the exponent: p^(q^j) only rescales exponents (F_q is fixed
//! by x -> x^q), so p^e costs a product of at most (q-1)*log_q(e) small factors
//! instead of a binomial expansion.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::field::{FieldSpec, Fq};

/// Degree bound under which dense division/gcd is attempted.
const DENSE_LIMIT: u64 = 8192;

/// A sparse polynomial over F_q in one variable.
#[derive(Clone, Debug)]
pub struct SPoly {
    pub field: Rc<FieldSpec>,
    /// exponent -> nonzero coefficient
    pub terms: BTreeMap<u64, Fq>,
}

impl PartialEq for SPoly {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.terms == other.terms
    }
}
impl Eq for SPoly {}

impl SPoly {
    pub fn zero(field: &Rc<FieldSpec>) -> Self {
        SPoly { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn one(field: &Rc<FieldSpec>) -> Self {
        Self::monomial(field, Fq::ONE, 0)
    }

    pub fn monomial(field: &Rc<FieldSpec>, c: Fq, exp: u64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        SPoly { field: field.clone(), terms }
    }

    pub fn constant(field: &Rc<FieldSpec>, c: Fq) -> Self {
        Self::monomial(field, c, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0) == Some(&Fq::ONE)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() <= 1
    }

    /// Degree; the zero polynomial reports None.
    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn order(&self) -> Option<u64> {
        self.terms.keys().next().copied()
    }

    pub fn leading_coeff(&self) -> Fq {
        self.terms.values().next_back().copied().unwrap_or(Fq::ZERO)
    }

    pub fn coeff(&self, exp: u64) -> Fq {
        self.terms.get(&exp).copied().unwrap_or(Fq::ZERO)
    }

    pub fn add_term(&mut self, exp: u64, c: Fq) {
        if c.is_zero() {
            return;
        }
        let f = self.field.clone();
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = f.add(*o.get(), c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &SPoly) -> SPoly {
        let mut out = self.clone();
        for (&e, &c) in &other.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn neg(&self) -> SPoly {
        let f = &self.field;
        SPoly {
            field: f.clone(),
            terms: self.terms.iter().map(|(&e, &c)| (e, f.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &SPoly) -> SPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Fq) -> SPoly {
        if c.is_zero() {
            return SPoly::zero(&self.field);
        }
        let f = &self.field;
        SPoly {
            field: f.clone(),
            terms: self.terms.iter().map(|(&e, &a)| (e, f.mul(a, c))).collect(),
        }
    }

    /// Multiply by c * x^exp.
    pub fn mul_monomial(&self, c: Fq, exp: u64) -> SPoly {
        if c.is_zero() {
            return SPoly::zero(&self.field);
        }
        let f = &self.field;
        SPoly {
            field: f.clone(),
            terms: self
                .terms
                .iter()
                .map(|(&e, &a)| (e.checked_add(exp).expect("exponent overflow"), f.mul(a, c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SPoly) -> SPoly {
        let mut out = SPoly::zero(&self.field);
        // Iterate over the smaller operand.
        let (small, big) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (&e, &c) in &small.terms {
            for (&e2, &c2) in &big.terms {
                out.add_term(
                    e.checked_add(e2).expect("exponent overflow"),
                    self.field.mul(c, c2),
                );
            }
        }
        out
    }

    /// Raise every exponent by the factor q^n (the coefficientwise q^n-power;
    /// F_q itself is fixed by Frobenius).
    pub fn frobenius_scale(&self, n: u32) -> SPoly {
        let factor = (self.field.q as u64).checked_pow(n).expect("q^n overflow");
        SPoly {
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .map(|(&e, &c)| (e.checked_mul(factor).expect("exponent overflow"), c))
                .collect(),
        }
    }

    /// q^n-th root: defined when every exponent is divisible by q^n.
    pub fn try_root(&self, n: u32) -> Option<SPoly> {
        let factor = (self.field.q as u64).pow(n);
        let mut terms = BTreeMap::new();
        for (&e, &c) in &self.terms {
            if e % factor != 0 {
                return None;
            }
            terms.insert(e / factor, c);
        }
        Some(SPoly { field: self.field.clone(), terms })
    }

    /// Largest n <= cap such that q^n divides every exponent.
    pub fn root_order(&self, cap: u32) -> u32 {
        let q = self.field.q as u64;
        let mut n = 0u32;
        'outer: while n < cap {
            let factor = match q.checked_pow(n + 1) {
                Some(f) => f,
                None => break,
            };
            for &e in self.terms.keys() {
                if e % factor != 0 {
                    break 'outer;
                }
            }
            n += 1;
        }
        n
    }

    /// p^e through the base-q digits of e.
    pub fn pow(&self, e: u64) -> SPoly {
        if e == 0 {
            return SPoly::one(&self.field);
        }
        if self.is_zero() {
            return SPoly::zero(&self.field);
        }
        let q = self.field.q as u64;
        let mut acc = SPoly::one(&self.field);
        let mut base = self.clone(); // self^(q^j)
        let mut rest = e;
        while rest > 0 {
            let digit = rest % q;
            if digit > 0 {
                let mut piece = base.clone();
                for _ in 1..digit {
                    piece = piece.mul(&base);
                }
                acc = acc.mul(&piece);
            }
            rest /= q;
            if rest > 0 {
                base = base.frobenius_scale(1);
            }
        }
        acc
    }

    /// Substitute x -> c * x^k.
    pub fn subst_monomial(&self, c: Fq, k: u64) -> SPoly {
        let f = &self.field;
        let mut out = SPoly::zero(f);
        for (&e, &a) in &self.terms {
            let coeff = f.mul(a, pow_fq(f, c, e));
            out.add_term(e.checked_mul(k).expect("exponent overflow"), coeff);
        }
        out
    }

    pub fn make_monic(&self) -> (SPoly, Fq) {
        let lc = self.leading_coeff();
        if lc.is_zero() || lc == Fq::ONE {
            return (self.clone(), Fq::ONE);
        }
        let inv = self.field.inv(lc);
        (self.scale(inv), lc)
    }

    /// Exact division; None when the divisor does not divide self or the
    /// degrees exceed the dense-arithmetic limit.
    pub fn try_div_exact(&self, d: &SPoly) -> Option<SPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(SPoly::zero(&self.field));
        }
        if d.is_monomial() {
            let (&de, &dc) = d.terms.iter().next().unwrap();
            let dcinv = self.field.inv(dc);
            let mut terms = BTreeMap::new();
            for (&e, &c) in &self.terms {
                if e < de {
                    return None;
                }
                terms.insert(e - de, self.field.mul(c, dcinv));
            }
            return Some(SPoly { field: self.field.clone(), terms });
        }
        let (qt, r) = self.divrem_dense(d)?;
        if r.is_zero() {
            Some(qt)
        } else {
            None
        }
    }

    fn to_dense(&self) -> Option<Vec<Fq>> {
        let deg = self.degree()?;
        if deg > DENSE_LIMIT {
            return None;
        }
        let mut v = vec![Fq::ZERO; (deg + 1) as usize];
        for (&e, &c) in &self.terms {
            v[e as usize] = c;
        }
        Some(v)
    }

    fn from_dense(field: &Rc<FieldSpec>, v: &[Fq]) -> SPoly {
        let mut terms = BTreeMap::new();
        for (e, &c) in v.iter().enumerate() {
            if !c.is_zero() {
                terms.insert(e as u64, c);
            }
        }
        SPoly { field: field.clone(), terms }
    }

    /// Dense division with remainder; None above the size limit.
    pub fn divrem_dense(&self, d: &SPoly) -> Option<(SPoly, SPoly)> {
        let f = &self.field;
        let dd = d.degree()?;
        if self.degree().unwrap_or(0) > DENSE_LIMIT || dd > DENSE_LIMIT {
            return None;
        }
        let mut r = self.to_dense()?;
        let dv = d.to_dense()?;
        let lead_inv = f.inv(dv[dd as usize]);
        let mut qv = vec![Fq::ZERO; r.len()];
        while r.len() > dd as usize && !r.iter().all(|c| c.is_zero()) {
            let dr = match r.iter().rposition(|c| !c.is_zero()) {
                Some(i) => i,
                None => break,
            };
            if (dr as u64) < dd {
                break;
            }
            let c = f.mul(r[dr], lead_inv);
            let shift = dr - dd as usize;
            qv[shift] = c;
            for (k, &mc) in dv.iter().enumerate() {
                r[shift + k] = f.sub(r[shift + k], f.mul(c, mc));
            }
        }
        Some((SPoly::from_dense(f, &qv), SPoly::from_dense(f, &r)))
    }

    /// Monic gcd via dense Euclid; None above the size limit.
    pub fn gcd(&self, other: &SPoly) -> Option<SPoly> {
        if self.is_zero() {
            return Some(other.make_monic().0);
        }
        if other.is_zero() {
            return Some(self.make_monic().0);
        }
        if self.degree().unwrap_or(0) > DENSE_LIMIT || other.degree().unwrap_or(0) > DENSE_LIMIT {
            return None;
        }
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem_dense(&b)?;
            a = b;
            b = r;
        }
        Some(a.make_monic().0)
    }

    /// Evaluate at a field element (variable -> c).
    pub fn eval_fq(&self, c: Fq) -> Fq {
        let f = &self.field;
        let mut acc = Fq::ZERO;
        for (&e, &a) in &self.terms {
            acc = f.add(acc, f.mul(a, pow_fq(f, c, e)));
        }
        acc
    }
}

/// c^e in F_q for possibly huge e, through the group order q-1.
pub fn pow_fq(f: &FieldSpec, c: Fq, e: u64) -> Fq {
    if e == 0 {
        return Fq::ONE;
    }
    if c.is_zero() {
        return Fq::ZERO;
    }
    // The multiplicative group has order q-1.
    f.pow(c, e % (f.q as u64 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_create;

    fn poly(field: &Rc<FieldSpec>, terms: &[(u64, i64)]) -> SPoly {
        let mut p = SPoly::zero(field);
        for &(e, c) in terms {
            p.add_term(e, field.from_int(c));
        }
        p
    }

    #[test]
    fn mul_and_pow_agree() {
        let f = field_create(3, 1, None).unwrap();
        let p = poly(&f, &[(0, 1), (1, 2), (5, 1)]);
        let mut by_mul = SPoly::one(&f);
        for _ in 0..7 {
            by_mul = by_mul.mul(&p);
        }
        assert_eq!(by_mul, p.pow(7));
    }

    #[test]
    fn freshman_dream() {
        let f = field_create(3, 1, None).unwrap();
        let p = poly(&f, &[(0, 2), (3, 1), (4, 1)]);
        assert_eq!(p.pow(3), p.frobenius_scale(1));
        assert_eq!(p.pow(9), p.frobenius_scale(2));
    }

    #[test]
    fn root_inverts_scale() {
        let f = field_create(2, 2, None).unwrap();
        let p = poly(&f, &[(1, 1), (7, 1)]);
        let scaled = p.frobenius_scale(3);
        assert_eq!(scaled.try_root(3).unwrap(), p);
        assert_eq!(p.try_root(1), None);
    }

    #[test]
    fn divrem_roundtrip() {
        let f = field_create(5, 1, None).unwrap();
        let a = poly(&f, &[(0, 3), (2, 1), (6, 4)]);
        let d = poly(&f, &[(0, 1), (2, 2)]);
        let (q, r) = a.divrem_dense(&d).unwrap();
        assert_eq!(q.mul(&d).add(&r), a);
        assert!(r.degree().unwrap_or(0) < d.degree().unwrap());
    }

    #[test]
    fn gcd_of_common_factor() {
        let f = field_create(3, 1, None).unwrap();
        let g = poly(&f, &[(0, 1), (1, 1)]);
        let a = g.mul(&poly(&f, &[(0, 2), (2, 1)]));
        let b = g.mul(&poly(&f, &[(1, 1), (3, 1)]));
        let d = a.gcd(&b).unwrap();
        assert_eq!(d, g.make_monic().0);
    }
}
