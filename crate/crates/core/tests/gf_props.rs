use decluster::gf::{find_irreducible, is_prime, prime_power};
use decluster::{FieldElem, GaloisField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prime_powers(limit: u32) -> Vec<u32> {
    (2..=limit).filter(|&q| prime_power(q as u64).is_some()).collect()
}

fn elems(f: &GaloisField) -> Vec<FieldElem> {
    (0..f.order()).map(|i| f.elem(i).unwrap()).collect()
}

/// Product of two coefficient vectors over Z_p (low degree first).
fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// All monic polynomials of degree `k` over Z_p.
fn monic(p: u32, k: usize) -> Vec<Vec<u32>> {
    (0..(p as usize).pow(k as u32))
        .map(|mut code| {
            let mut v: Vec<u32> = (0..k)
                .map(|_| {
                    let c = (code % p as usize) as u32;
                    code /= p as usize;
                    c
                })
                .collect();
            v.push(1);
            v
        })
        .collect()
}

fn reducible(poly: &[u32], p: u32) -> bool {
    let e = poly.len() - 1;
    (1..=e / 2).any(|k| monic(p, k).iter().any(|a| monic(p, e - k).iter().any(|b| poly_mul(a, b, p) == poly)))
}

#[test]
fn irreducible_is_smallest_by_factor_enumeration() {
    for q in prime_powers(256) {
        let (p, e) = prime_power(q as u64).unwrap();
        let (p, e) = (p as u32, e as usize);
        let chosen = find_irreducible(p, e as u32).unwrap();
        assert_eq!(chosen.len(), e + 1);
        assert!(!reducible(&chosen, p), "q={q}");
        for smaller in monic(p, e) {
            if smaller == chosen {
                break;
            }
            assert!(reducible(&smaller, p), "q={q}: {smaller:?} is irreducible and smaller");
        }
    }
}

#[test]
fn index_bijection() {
    for q in prime_powers(256) {
        let f = GaloisField::of_order(q).unwrap();
        let p = f.characteristic();
        for i in 0..q {
            let c = f.coeffs(f.elem(i).unwrap());
            assert_eq!(c.iter().rev().fold(0, |acc, &x| acc * p + x), i);
            assert_eq!(f.from_coeffs(&c).unwrap().index(), i);
        }
    }
}

#[test]
fn ring_axioms_exhaustive_small() {
    for q in prime_powers(16) {
        let f = GaloisField::of_order(q).unwrap();
        let all = elems(&f);
        for &a in &all {
            for &b in &all {
                assert_eq!(f.add(a, b).unwrap(), f.add(b, a).unwrap());
                assert_eq!(f.mul(a, b).unwrap(), f.mul(b, a).unwrap());
                for &c in &all {
                    let ab_c = f.mul(f.mul(a, b).unwrap(), c).unwrap();
                    assert_eq!(ab_c, f.mul(a, f.mul(b, c).unwrap()).unwrap());
                    let sum = f.add(f.add(a, b).unwrap(), c).unwrap();
                    assert_eq!(sum, f.add(a, f.add(b, c).unwrap()).unwrap());
                    let left = f.mul(a, f.add(b, c).unwrap()).unwrap();
                    let right = f.add(f.mul(a, b).unwrap(), f.mul(a, c).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }
}

#[test]
fn ring_axioms_pairs_and_sampled_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for q in prime_powers(64).into_iter().filter(|&q| q > 16) {
        let f = GaloisField::of_order(q).unwrap();
        let all = elems(&f);
        for &a in &all {
            for &b in &all {
                assert_eq!(f.add(a, b).unwrap(), f.add(b, a).unwrap());
                assert_eq!(f.mul(a, b).unwrap(), f.mul(b, a).unwrap());
                assert_eq!(f.sub(f.add(a, b).unwrap(), b).unwrap(), a);
            }
        }
        for _ in 0..2000 {
            let [a, b, c] = [0; 3].map(|_| f.elem(rng.gen_range(0..q)).unwrap());
            let ab_c = f.mul(f.mul(a, b).unwrap(), c).unwrap();
            assert_eq!(ab_c, f.mul(a, f.mul(b, c).unwrap()).unwrap());
            let left = f.mul(a, f.add(b, c).unwrap()).unwrap();
            let right = f.add(f.mul(a, b).unwrap(), f.mul(a, c).unwrap()).unwrap();
            assert_eq!(left, right);
            let sum = f.add(f.add(a, b).unwrap(), c).unwrap();
            assert_eq!(sum, f.add(a, f.add(b, c).unwrap()).unwrap());
        }
    }
}

#[test]
fn fermat_and_inverses() {
    for q in prime_powers(256) {
        let f = GaloisField::of_order(q).unwrap();
        for a in elems(&f).into_iter().skip(1) {
            assert_eq!(f.pow(a, (q - 1) as u64).unwrap(), f.one(), "q={q}");
            assert_eq!(f.mul(a, f.inv(a).unwrap()).unwrap(), f.one());
        }
        assert!(f.inv(f.zero()).is_err());
    }
}

#[test]
fn frobenius() {
    for q in prime_powers(64) {
        let f = GaloisField::of_order(q).unwrap();
        let p = f.characteristic() as u64;
        let all = elems(&f);
        for &a in &all {
            for &b in &all {
                let lhs = f.pow(f.add(a, b).unwrap(), p).unwrap();
                let rhs = f.add(f.pow(a, p).unwrap(), f.pow(b, p).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}

#[test]
fn mixing_fields_is_an_error() {
    let f4 = GaloisField::of_order(4).unwrap();
    let f5 = GaloisField::of_order(5).unwrap();
    assert!(f4.add(f4.one(), f5.one()).is_err());
    assert!(GaloisField::of_order(6).is_err());
    assert!(GaloisField::new(4, 1).is_err());
    assert!(is_prime(65521) && !is_prime(65535));
}

proptest! {
    #[test]
    fn identities_hold_in_large_fields(q in prop::sample::select(vec![243u32, 256, 343, 625, 729, 1024, 2048, 4096]), a in 0u32..4096, b in 0u32..4096, e in 0u64..10_000) {
        let f = GaloisField::of_order(q).unwrap();
        let (a, b) = (f.elem(a % q).unwrap(), f.elem(b % q).unwrap());
        prop_assert_eq!(f.mul(a, f.one()).unwrap(), a);
        prop_assert_eq!(f.sub(f.add(a, b).unwrap(), b).unwrap(), a);
        if a != f.zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()).unwrap(), f.one());
            let lhs = f.pow(a, e + (q as u64 - 1)).unwrap();
            prop_assert_eq!(lhs, f.pow(a, e).unwrap());
        }
    }
}
