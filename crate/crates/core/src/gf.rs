//! Finite fields GF(p^e).
//!
//! Elements are identified with integers in `[0, q)` by evaluating their
//! coefficient vector in base `p` (coefficient of `x^j` is base-`p` digit `j`).
//! This bijection also fixes the digit alphabet of the digital nets built on
//! top of a field: digit `v` of a coordinate is the field element with index `v`.
//!
//! The defining polynomial is the monic irreducible polynomial of degree `e`
//! whose non-leading coefficients have the smallest integer encoding, so every
//! build produces the same field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order supported; irreducibility is checked by trial division.
pub const MAX_ORDER: u64 = 1 << 16;

/// Fields up to this order use precomputed addition/multiplication tables.
const TABLE_ORDER: u32 = 256;

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

/// Polynomials over Z_p, coefficients lowest degree first, no trailing zeros.
/// The zero polynomial is the empty vector.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn degree(a: &[u32]) -> Option<usize> {
        a.iter().rposition(|&c| c != 0)
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        // p is prime and small; Fermat.
        pow_mod(a, p - 2, p)
    }

    pub fn pow_mod(mut a: u32, mut e: u32, p: u32) -> u32 {
        let p = p as u64;
        let mut acc = 1u64 % p;
        let mut base = a as u64 % p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        a = acc as u32;
        a
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p64 = p as u64;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p64;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut out);
        out
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out.push((x + p - y) % p);
        }
        trim(&mut out);
        out
    }

    /// Returns (quotient, remainder). `b` must be nonzero.
    pub fn divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
        let db = degree(b).expect("division by zero polynomial");
        let lead_inv = inv_mod(b[db], p) as u64;
        let p64 = p as u64;
        let mut rem: Vec<u32> = a.to_vec();
        trim(&mut rem);
        if rem.len() <= db {
            return (Vec::new(), rem);
        }
        let mut quot = vec![0u32; rem.len() - db];
        while let Some(dr) = degree(&rem) {
            if dr < db {
                break;
            }
            let shift = dr - db;
            let factor = (rem[dr] as u64 * lead_inv % p64) as u32;
            quot[shift] = factor;
            for (j, &c) in b[..=db].iter().enumerate() {
                let t = (factor as u64 * c as u64 % p64) as u32;
                rem[shift + j] = (rem[shift + j] + p - t) % p;
            }
            trim(&mut rem);
        }
        trim(&mut quot);
        (quot, rem)
    }

    /// Polynomial whose coefficients are the base-`p` digits of `code`,
    /// `len` coefficients wide (not trimmed).
    pub fn from_code(mut code: u64, p: u32, len: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push((code % p as u64) as u32);
            code /= p as u64;
        }
        out
    }
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let e = match poly::degree(modulus) {
        Some(e) if e >= 1 => e,
        _ => return false,
    };
    // A reducible polynomial of degree e has a monic factor of degree <= e/2.
    for deg in 1..=e / 2 {
        let count = (p as u64).pow(deg as u32);
        for code in 0..count {
            let mut divisor = poly::from_code(code, p, deg);
            divisor.push(1);
            let (_, rem) = poly::divrem(modulus, &divisor, p);
            if rem.is_empty() {
                return false;
            }
        }
    }
    true
}

/// The monic irreducible polynomial of degree `e` over Z_p with the smallest
/// encoding `sum c_j p^j` of its non-leading coefficients. Coefficients are
/// returned lowest degree first (`e + 1` entries, last one is 1).
pub fn find_irreducible(p: u32, e: u32) -> Result<Vec<u32>> {
    if !is_prime(p as u64) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if e == 0 {
        return Err(Error::invalid("extension degree must be >= 1"));
    }
    let q = (p as u64)
        .checked_pow(e)
        .filter(|&q| q <= MAX_ORDER)
        .ok_or_else(|| Error::invalid(format!("{p}^{e} exceeds the supported order {MAX_ORDER}")))?;
    for code in 0..q {
        let mut candidate = poly::from_code(code, p, e as usize);
        candidate.push(1);
        if is_irreducible(&candidate, p) {
            return Ok(candidate);
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over Z_p")
}

/// Descriptor of GF(p^e): characteristic, degree and defining polynomial.
/// This is what scheme and net provenance records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePowerBase {
    pub p: u32,
    pub e: u32,
    /// Monic defining polynomial, lowest degree first, `e + 1` coefficients.
    pub modulus: Vec<u32>,
}

impl PrimePowerBase {
    pub fn q(&self) -> u32 {
        self.p.pow(self.e)
    }
}

/// Element of a finite field. Carries the field order so that elements of
/// different fields cannot be silently mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    q: u32,
    index: u32,
}

impl FieldElem {
    /// Integer index in `[0, q)`.
    pub fn index(self) -> u32 {
        self.index
    }

    pub fn order(self) -> u32 {
        self.q
    }
}

/// GF(p^e), immutable after construction.
#[derive(Debug, Clone)]
pub struct GaloisField {
    base: PrimePowerBase,
    q: u32,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
    inv_table: Option<Vec<u32>>,
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl Eq for GaloisField {}

impl GaloisField {
    /// GF(p^e) with the canonical defining polynomial.
    pub fn new(p: u32, e: u32) -> Result<Self> {
        let modulus = find_irreducible(p, e)?;
        Self::with_modulus(p, modulus)
    }

    /// GF(q) for a prime power `q`.
    pub fn of_order(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q as u64).ok_or_else(|| Error::invalid(format!("{q} is not a prime power")))?;
        Self::new(p as u32, e)
    }

    /// Field defined by an explicit monic irreducible polynomial.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::invalid(format!("{p} is not prime")));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::invalid(format!(
                "modulus {modulus:?} is not a monic polynomial over Z_{p} of degree >= 1"
            )));
        }
        let e = (modulus.len() - 1) as u32;
        let q = (p as u64).pow(e);
        if q > MAX_ORDER {
            return Err(Error::invalid(format!("order {q} exceeds {MAX_ORDER}")));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::invalid(format!("modulus {modulus:?} is reducible over Z_{p}")));
        }
        let mut field = GaloisField {
            base: PrimePowerBase { p, e, modulus },
            q: q as u32,
            add_table: None,
            mul_table: None,
            inv_table: None,
        };
        if field.q <= TABLE_ORDER {
            field.build_tables();
        }
        Ok(field)
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let mut add = vec![0u32; q * q];
        let mut mul = vec![0u32; q * q];
        let mut inv = vec![0u32; q];
        for a in 0..q as u32 {
            for b in 0..q as u32 {
                add[a as usize * q + b as usize] = self.add_poly(a, b);
                mul[a as usize * q + b as usize] = self.mul_poly(a, b);
            }
            if a != 0 {
                inv[a as usize] = self.inv_poly(a);
            }
        }
        self.add_table = Some(add);
        self.mul_table = Some(mul);
        self.inv_table = Some(inv);
    }

    pub fn base(&self) -> &PrimePowerBase {
        &self.base
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.base.p
    }

    pub fn degree(&self) -> u32 {
        self.base.e
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { q: self.q, index: 0 }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem { q: self.q, index: 1 }
    }

    /// Element with integer index `i`.
    pub fn elem(&self, i: u32) -> Result<FieldElem> {
        if i >= self.q {
            return Err(Error::OutOfRange(format!("index {i} not in GF({})", self.q)));
        }
        Ok(FieldElem { q: self.q, index: i })
    }

    /// Element with the given coefficient vector (coefficient of `x^j` at `j`).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElem> {
        if coeffs.len() != self.base.e as usize || coeffs.iter().any(|&c| c >= self.base.p) {
            return Err(Error::invalid(format!("{coeffs:?} is not a coefficient vector of GF({})", self.q)));
        }
        let index = coeffs.iter().rev().fold(0u32, |acc, &c| acc * self.base.p + c);
        Ok(FieldElem { q: self.q, index })
    }

    pub fn coeffs(&self, a: FieldElem) -> Vec<u32> {
        poly::from_code(a.index as u64, self.base.p, self.base.e as usize)
    }

    fn check(&self, a: FieldElem) -> Result<()> {
        if a.q != self.q || a.index >= self.q {
            return Err(Error::invalid(format!("element of GF({}) used with GF({})", a.q, self.q)));
        }
        Ok(())
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElem { q: self.q, index: self.add_idx(a.index, b.index) })
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElem { q: self.q, index: self.add_idx(a.index, self.neg_idx(b.index)) })
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElem { q: self.q, index: self.mul_idx(a.index, b.index) })
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        self.check(a)?;
        if a.index == 0 {
            return Err(Error::DivisionByZero { q: self.q });
        }
        Ok(FieldElem { q: self.q, index: self.inv_idx(a.index) })
    }

    pub fn pow(&self, a: FieldElem, exp: u64) -> Result<FieldElem> {
        self.check(a)?;
        Ok(FieldElem { q: self.q, index: self.pow_idx(a.index, exp) })
    }

    // Index-level arithmetic used by the net construction. Callers guarantee
    // that all indices are below q.

    pub(crate) fn add_idx(&self, a: u32, b: u32) -> u32 {
        match &self.add_table {
            Some(t) => t[a as usize * self.q as usize + b as usize],
            None => self.add_poly(a, b),
        }
    }

    pub(crate) fn neg_idx(&self, a: u32) -> u32 {
        let p = self.base.p;
        let coeffs = poly::from_code(a as u64, p, self.base.e as usize);
        coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + (p - c) % p)
    }

    pub(crate) fn mul_idx(&self, a: u32, b: u32) -> u32 {
        match &self.mul_table {
            Some(t) => t[a as usize * self.q as usize + b as usize],
            None => self.mul_poly(a, b),
        }
    }

    pub(crate) fn inv_idx(&self, a: u32) -> u32 {
        match &self.inv_table {
            Some(t) => t[a as usize],
            None => self.inv_poly(a),
        }
    }

    pub(crate) fn pow_idx(&self, a: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        let mut base = a;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_idx(acc, base);
            }
            base = self.mul_idx(base, base);
            exp >>= 1;
        }
        acc
    }

    fn to_poly(&self, a: u32) -> Vec<u32> {
        let mut v = poly::from_code(a as u64, self.base.p, self.base.e as usize);
        poly::trim(&mut v);
        v
    }

    fn poly_index(&self, a: &[u32]) -> u32 {
        a.iter().rev().fold(0u32, |acc, &c| acc * self.base.p + c)
    }

    fn add_poly(&self, a: u32, b: u32) -> u32 {
        let p = self.base.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut scale = 1u32;
        for _ in 0..self.base.e {
            out += ((a % p + b % p) % p) * scale;
            a /= p;
            b /= p;
            scale = scale.wrapping_mul(p);
        }
        out
    }

    pub(crate) fn mul_poly(&self, a: u32, b: u32) -> u32 {
        let prod = poly::mul(&self.to_poly(a), &self.to_poly(b), self.base.p);
        let (_, rem) = poly::divrem(&prod, &self.base.modulus, self.base.p);
        self.poly_index(&rem)
    }

    /// Inverse via the extended Euclidean algorithm on polynomials.
    pub(crate) fn inv_poly(&self, a: u32) -> u32 {
        let p = self.base.p;
        let mut r0 = self.base.modulus.clone();
        let mut r1 = self.to_poly(a);
        let mut t0: Vec<u32> = Vec::new();
        let mut t1: Vec<u32> = vec![1];
        while !r1.is_empty() {
            let (quot, rem) = poly::divrem(&r0, &r1, p);
            let t2 = poly::sub(&t0, &poly::mul(&quot, &t1, p), p);
            r0 = std::mem::replace(&mut r1, rem);
            t0 = std::mem::replace(&mut t1, t2);
        }
        // r0 is a nonzero constant since the modulus is irreducible.
        let scale = poly::inv_mod(r0[0], p);
        let inv = poly::mul(&t0, &[scale], p);
        let (_, inv) = poly::divrem(&inv, &self.base.modulus, p);
        self.poly_index(&inv)
    }
}

/// Writes `n` as `p^e` if it is a prime power.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            break;
        }
        p += 1;
    }
    if !n.is_multiple_of(p) || p.saturating_mul(p) > n {
        // n itself is prime
        return Some((n, 1));
    }
    let mut rest = n;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducible_selection() {
        assert_eq!(find_irreducible(3, 1).unwrap(), vec![0, 1]);
        assert_eq!(find_irreducible(2, 2).unwrap(), vec![1, 1, 1]);
        assert_eq!(find_irreducible(3, 2).unwrap(), vec![1, 0, 1]);
        assert!(matches!(find_irreducible(4, 2), Err(Error::InvalidParameter(_))));
        assert!(find_irreducible(2, 17).is_err());
    }

    #[test]
    fn quadratics_over_z2_exhaustive() {
        // x^2, x^2+1, x^2+x factor; only x^2+x+1 has no root in Z_2.
        let roots = |c: [u32; 3]| (0..2).any(|x| (c[0] + c[1] * x + c[2] * x * x) % 2 == 0);
        let irreducible: Vec<u32> = (0..4).filter(|&code| !roots([code % 2, code / 2, 1])).collect();
        assert_eq!(irreducible, vec![3]);
    }

    #[test]
    fn gf4_examples() {
        let f = GaloisField::new(2, 2).unwrap();
        let x = f.from_coeffs(&[0, 1]).unwrap();
        let x1 = f.from_coeffs(&[1, 1]).unwrap();
        assert_eq!(f.mul(x, x).unwrap(), x1);
        assert_eq!(f.inv(x1).unwrap(), x);
        assert_eq!(f.coeffs(x1), vec![1, 1]);
    }

    #[test]
    fn inverse_of_zero_and_mismatch() {
        let f = GaloisField::new(3, 2).unwrap();
        let g = GaloisField::new(2, 3).unwrap();
        assert!(matches!(f.inv(f.zero()), Err(Error::DivisionByZero { q: 9 })));
        assert!(matches!(f.mul(f.one(), g.one()), Err(Error::InvalidParameter(_))));
        assert!(f.elem(9).is_err());
    }

    #[test]
    fn tables_match_polynomial_arithmetic() {
        for q in [4u32, 8, 9, 16, 25, 27, 32, 49, 64, 81, 121, 125, 128, 243, 256] {
            let f = GaloisField::of_order(q).unwrap();
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(f.mul_idx(a, b), f.mul_poly(a, b), "GF({q}) {a}*{b}");
                }
                if a != 0 {
                    assert_eq!(f.inv_idx(a), f.inv_poly(a));
                    assert_eq!(f.mul_idx(a, f.inv_idx(a)), 1);
                }
            }
        }
    }

    #[test]
    fn untabled_field_works() {
        // 3^6 = 729 > 256 takes the polynomial path.
        let f = GaloisField::new(3, 6).unwrap();
        assert!(f.mul_table.is_none());
        for a in (1..729).step_by(7) {
            let a = f.elem(a).unwrap();
            assert_eq!(f.mul(a, f.inv(a).unwrap()).unwrap(), f.one());
            assert_eq!(f.pow(a, 728).unwrap(), f.one());
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(4), Some((2, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert!(is_prime(65521));
        assert!(!is_prime(65535));
    }
}
