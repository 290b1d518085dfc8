//! Arithmetic in `Z/pZ` for word-sized primes `2^30 < p < 2^31`.
//!
//! Products of two reduced elements stay below `2^62`, which lets hot loops
//! accumulate several products in a `u64` before reducing (see [`Lazy`]).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    barrett: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        assert!(p > 2 && p < (1 << 31), "modulus out of range");
        PrimeField { p, barrett: u64::MAX / p }
    }

    /// Draws a uniformly random prime in `(2^30, 2^31)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let c = rng.gen_range((1u64 << 30) + 1..(1u64 << 31)) | 1;
            if is_prime(c) {
                return PrimeField::new(c);
            }
        }
    }

    #[inline(always)]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline(always)]
    pub fn reduce(&self, x: u64) -> u64 {
        let q = ((x as u128 * self.barrett as u128) >> 64) as u64;
        let mut r = x - q * self.p;
        while r >= self.p {
            r -= self.p;
        }
        r
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        let r = v.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.p as i128) as u64
    }

    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        v.mod_floor(&p).to_u64().expect("reduced residue fits")
    }

    /// Image of a rational, or `None` if the denominator vanishes mod p.
    pub fn from_rational(&self, v: &BigRational) -> Option<u64> {
        let d = self.from_bigint(v.denom());
        if d == 0 {
            return None;
        }
        Some(self.mul(self.from_bigint(v.numer()), self.inv(d)))
    }

    /// Symmetric lift to `(-p/2, p/2]`.
    pub fn lift(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

/// Deferred-reduction accumulator bound.
///
/// `acc + a*b` with `acc < 2^63` and `a, b < 2^31` never overflows; folding the
/// top bit away by subtracting a multiple of `p` restores `acc < 2^63`.
#[derive(Clone, Copy, Debug)]
pub struct Lazy {
    fold: u64,
}

impl Lazy {
    pub fn new(f: &PrimeField) -> Self {
        let top = 1u64 << 63;
        Lazy { fold: top - top % f.p() }
    }

    #[inline(always)]
    pub fn fold(&self, acc: u64) -> u64 {
        acc - (acc >> 63) * self.fold
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_primes_are_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let f = PrimeField::random(&mut rng);
            assert!(f.p() > 1 << 30 && f.p() < 1 << 31);
            let naive = (2..=((f.p() as f64).sqrt() as u64)).all(|q| f.p() % q != 0);
            assert!(naive);
        }
    }

    #[test]
    fn small_primality_matches_sieve() {
        let mut sieve = vec![true; 2000];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..2000 {
            if sieve[i] {
                for j in (2 * i..2000).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (i, &s) in sieve.iter().enumerate() {
            assert_eq!(is_prime(i as u64), s, "{i}");
        }
    }

    proptest! {
        #[test]
        fn barrett_matches_rem(x in any::<u64>()) {
            let f = PrimeField::new(2147483647);
            prop_assert_eq!(f.reduce(x), x % f.p());
        }

        #[test]
        fn lazy_fold_preserves_residue(a in 0u64..(1<<31) - 1, b in 0u64..(1<<31) - 1, acc in 0u64..(1<<63)) {
            let f = PrimeField::new(2147483629);
            let a = a % f.p();
            let b = b % f.p();
            let l = Lazy::new(&f);
            let s = l.fold(acc + a * b);
            prop_assert!(s < 1 << 63);
            prop_assert_eq!(s % f.p(), ((acc as u128 + (a * b) as u128) % f.p() as u128) as u64);
        }

        #[test]
        fn inverse_roundtrip(a in 1u64..1_000_000_000) {
            let f = PrimeField::new(1073741827);
            prop_assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }
}
