//! Finite field arithmetic for F_q with q = p^e.
//!
//! Elements are polynomials in a generator `g` over F_p, reduced modulo a fixed
//! irreducible modulus of degree e, and encoded as an index `sum c_i p^i < q`.
//! All binary operations go through precomputed tables, so a [`FieldSpec`] is
//! built once and shared behind an `Rc` by every scalar that lives over it.

use std::fmt;
use std::rc::Rc;

/// Hard upper bound on q; keeps the q-by-q multiplication table tiny.
pub const MAX_Q: u32 = 256;

/// Default cap on the perfection depth M (see `scalar`); exceeding it is an
/// error, never silent precision loss.
pub const DEFAULT_DEPTH_CAP: u32 = 6;

/// An element of F_q, encoded as an index into the field tables.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Fq(pub u16);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Errors raised while constructing a field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldError {
    NotPrime(u64),
    BadExtensionDegree(u32),
    QTooLarge(u32),
    /// The supplied modulus is not irreducible over F_p.
    ReducibleModulus,
    /// Modulus degree does not match e, or it is not monic.
    MalformedModulus,
    /// e > 1 with no modulus given and no built-in table for this q.
    NoBuiltinModulus(u32),
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "{} is not prime", p),
            FieldError::BadExtensionDegree(e) => write!(f, "bad extension degree {}", e),
            FieldError::QTooLarge(q) => write!(f, "q = {} exceeds the supported bound {}", q, MAX_Q),
            FieldError::ReducibleModulus => write!(f, "modulus is reducible over F_p"),
            FieldError::MalformedModulus => write!(f, "modulus must be monic of degree e"),
            FieldError::NoBuiltinModulus(q) => {
                write!(f, "no built-in modulus for q = {}; supply one", q)
            }
        }
    }
}

impl std::error::Error for FieldError {}

/// Specification of F_q = F_p[g]/(modulus), with arithmetic tables.
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    pub q: u32,
    /// Monic modulus coefficients over F_p, low degree first, length e+1.
    /// `None` exactly when e = 1.
    pub modulus: Option<Vec<u32>>,
    /// Configurable cap on the perfection depth M.
    pub depth_cap: u32,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldSpec(q = {}^{})", self.p, self.e)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}
impl Eq for FieldSpec {}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Polynomials over F_p as coefficient vectors, low degree first.
mod fp_poly {
    pub fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r: Vec<u32> = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let dr = r.len() - 1;
            let c = (r[dr] * lead_inv) % p;
            for (k, &mc) in m.iter().enumerate() {
                let idx = dr - dm + k;
                r[idx] = ((r[idx] + p * p) - (c * mc) % p) % p;
            }
            trim(&mut r);
            if r.is_empty() {
                break;
            }
        }
        r
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        // p is small and prime; brute force is fine.
        (1..p).find(|&x| (a * x) % p == 1).expect("nonzero element mod prime")
    }

    /// Trial-division irreducibility test; the degrees in play are tiny.
    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let d = m.len() - 1;
        if d == 0 {
            return false;
        }
        if d == 1 {
            return true;
        }
        // Enumerate monic divisors of degree 1..=d/2.
        let mut degs = vec![];
        for k in 1..=d / 2 {
            degs.push(k);
        }
        for k in degs {
            let count = p.pow(k as u32);
            for idx in 0..count {
                let mut cand = Vec::with_capacity(k + 1);
                let mut n = idx;
                for _ in 0..k {
                    cand.push(n % p);
                    n /= p;
                }
                cand.push(1); // monic
                if rem(m, &cand, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// Built-in moduli for the common small extension fields, low degree first.
fn builtin_modulus(p: u32, e: u32) -> Option<Vec<u32>> {
    match (p, e) {
        (2, 2) => Some(vec![1, 1, 1]),    // g^2+g+1
        (2, 3) => Some(vec![1, 1, 0, 1]), // g^3+g+1
        (2, 4) => Some(vec![1, 1, 0, 0, 1]),
        (3, 2) => Some(vec![1, 0, 1]), // g^2+1
        (3, 3) => Some(vec![1, 2, 0, 1]),
        (5, 2) => Some(vec![2, 1, 1]),
        _ => None,
    }
}

/// Build a field specification. When `modulus` is absent and e > 1, a built-in
/// table is used for q in {4, 8, 9, 16, 25, 27}.
pub fn field_create(p: u64, e: u32, modulus: Option<Vec<u32>>) -> Result<Rc<FieldSpec>, FieldError> {
    field_create_with_cap(p, e, modulus, DEFAULT_DEPTH_CAP)
}

/// Same as [`field_create`] with an explicit perfection-depth cap.
pub fn field_create_with_cap(
    p: u64,
    e: u32,
    modulus: Option<Vec<u32>>,
    depth_cap: u32,
) -> Result<Rc<FieldSpec>, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    let p = p as u32;
    if e == 0 {
        return Err(FieldError::BadExtensionDegree(e));
    }
    let q = p.checked_pow(e).filter(|&q| q <= MAX_Q).ok_or(FieldError::QTooLarge(p.saturating_pow(e)))?;

    let modulus = if e == 1 {
        None
    } else {
        let m = match modulus {
            Some(mut m) => {
                for c in m.iter_mut() {
                    *c %= p;
                }
                fp_poly::trim(&mut m);
                if m.len() != (e + 1) as usize || m[e as usize] != 1 {
                    return Err(FieldError::MalformedModulus);
                }
                if !fp_poly::is_irreducible(&m, p) {
                    return Err(FieldError::ReducibleModulus);
                }
                m
            }
            None => builtin_modulus(p, e).ok_or(FieldError::NoBuiltinModulus(q))?,
        };
        Some(m)
    };

    // Element index <-> coefficient vector.
    let decode = |n: u32| -> Vec<u32> {
        let mut v = Vec::with_capacity(e as usize);
        let mut n = n;
        for _ in 0..e {
            v.push(n % p);
            n /= p;
        }
        v
    };
    let encode = |v: &[u32]| -> u16 {
        let mut n = 0u32;
        for (i, &c) in v.iter().enumerate() {
            n += c * p.pow(i as u32);
        }
        n as u16
    };

    let qu = q as usize;
    let mut add = vec![0u16; qu * qu];
    let mut mul = vec![0u16; qu * qu];
    let mut neg = vec![0u16; qu];
    let mut inv = vec![0u16; qu];

    for a in 0..q {
        let va = decode(a);
        let vneg: Vec<u32> = va.iter().map(|&c| (p - c) % p).collect();
        neg[a as usize] = encode(&vneg);
        for b in 0..q {
            let vb = decode(b);
            let vsum: Vec<u32> = va.iter().zip(&vb).map(|(&x, &y)| (x + y) % p).collect();
            add[(a * q + b) as usize] = encode(&vsum);
            let mut prod = fp_poly::mul(&va, &vb, p);
            if let Some(m) = &modulus {
                prod = fp_poly::rem(&prod, m, p);
            }
            prod.resize(e as usize, 0);
            mul[(a * q + b) as usize] = encode(&prod);
        }
    }
    for a in 1..q {
        let b = (1..q)
            .find(|&b| mul[(a * q + b) as usize] == 1)
            .expect("every nonzero element of a finite field is invertible");
        inv[a as usize] = b as u16;
    }

    Ok(Rc::new(FieldSpec { p, e, q, modulus, depth_cap, add, mul, neg, inv }))
}

impl FieldSpec {
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.add[a.0 as usize * self.q as usize + b.0 as usize])
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.mul[a.0 as usize * self.q as usize + b.0 as usize])
    }

    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.neg[a.0 as usize])
    }

    pub fn inv(&self, a: Fq) -> Fq {
        assert!(!a.is_zero(), "division by zero in F_q");
        Fq(self.inv[a.0 as usize])
    }

    pub fn minus_one(&self) -> Fq {
        self.neg(Fq::ONE)
    }

    /// Reduce an integer into the prime field F_p inside F_q.
    pub fn from_int(&self, n: i64) -> Fq {
        let p = self.p as i64;
        Fq(n.rem_euclid(p) as u16)
    }

    /// The generator symbol g; only meaningful when e > 1.
    pub fn gen(&self) -> Fq {
        Fq(self.p as u16)
    }

    pub fn pow(&self, a: Fq, n: u64) -> Fq {
        let mut acc = Fq::ONE;
        let mut base = a;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    /// sign^k for sign = -1: (-1)^k as an element of F_q.
    pub fn sign_pow(&self, k: u64) -> Fq {
        if k % 2 == 0 || self.p == 2 {
            Fq::ONE
        } else {
            self.minus_one()
        }
    }

    /// Nonzero elements, in index order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (1..self.q).map(|i| Fq(i as u16))
    }

    /// Format an element as a scalar literal: an integer for prime fields,
    /// a polynomial in `g` otherwise.
    pub fn format_elem(&self, a: Fq) -> String {
        if self.e == 1 {
            return format!("{}", a.0);
        }
        let mut n = a.0 as u32;
        let mut parts = vec![];
        let mut deg = 0u32;
        while n > 0 {
            let c = n % self.p;
            if c != 0 {
                let part = match (deg, c) {
                    (0, c) => format!("{}", c),
                    (1, 1) => "g".to_string(),
                    (1, c) => format!("{}*g", c),
                    (d, 1) => format!("g^{}", d),
                    (d, c) => format!("{}*g^{}", c, d),
                };
                parts.push(part);
            }
            n /= self.p;
            deg += 1;
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.reverse();
            parts.join("+")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field() {
        let f = field_create(3, 1, None).unwrap();
        assert_eq!(f.q, 3);
        assert_eq!(f.add(Fq(2), Fq(2)), Fq(1));
        assert_eq!(f.mul(Fq(2), Fq(2)), Fq(1));
        assert_eq!(f.inv(Fq(2)), Fq(2));
    }

    #[test]
    fn f4_standard_modulus() {
        let f = field_create(2, 2, Some(vec![1, 1, 1])).unwrap();
        assert_eq!(f.q, 4);
        let g = f.gen();
        // g^2 = g + 1 under g^2+g+1 = 0.
        assert_eq!(f.mul(g, g), f.add(g, Fq::ONE));
    }

    #[test]
    fn f9_modulus_irreducible() {
        // g^2+1 has no roots mod 3: 0^2+1=1, 1^2+1=2, 2^2+1=2.
        let f = field_create(3, 2, Some(vec![1, 0, 1])).unwrap();
        assert_eq!(f.q, 9);
    }

    #[test]
    fn reducible_modulus_rejected() {
        // g^2+2 = (g+1)(g+2) mod 3.
        assert_eq!(
            field_create(3, 2, Some(vec![2, 0, 1])).unwrap_err(),
            FieldError::ReducibleModulus
        );
    }

    #[test]
    fn unsupported_q_without_modulus() {
        assert!(matches!(
            field_create(7, 2, None).unwrap_err(),
            FieldError::NoBuiltinModulus(49)
        ));
    }

    #[test]
    fn multiplicative_group_order() {
        for (p, e) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2), (2, 3), (5, 1), (3, 3)] {
            let f = field_create(p, e, None).unwrap();
            for x in f.nonzero_elements() {
                assert_eq!(f.pow(x, (f.q - 1) as u64), Fq::ONE, "x^(q-1) = 1 in F_{}", f.q);
            }
        }
    }

    #[test]
    fn frobenius_fixes_fq() {
        let f = field_create(2, 2, None).unwrap();
        for i in 0..f.q {
            let x = Fq(i as u16);
            assert_eq!(f.pow(x, f.q as u64), x);
        }
    }
}
