//! Small-integer number theory shared by the finite-field and boundary code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g >= 0`.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn modulo(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

pub fn mod_pow(base: i64, mut exp: u64, m: i64) -> i64 {
    let m128 = m as i128;
    let mut b = (base as i128).rem_euclid(m128);
    let mut acc: i128 = 1 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as i64
}

pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// Deterministic trial division.
pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3i64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Rejects anything that is not a prime `p > 3`.
pub fn check_boundary_prime(p: i64) -> Result<()> {
    if p > 3 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::BadPrime(p))
    }
}

/// Legendre symbol via Euler's criterion: 0, 1 or -1.
pub fn legendre(a: i64, p: i64) -> i64 {
    let a = a.rem_euclid(p);
    if a == 0 {
        return 0;
    }
    if mod_pow(a, ((p - 1) / 2) as u64, p) == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli-Shanks square root modulo an odd prime.
pub fn sqrt_mod(a: i64, p: i64) -> Option<i64> {
    let a = a.rem_euclid(p);
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q as u64, p);
    let mut t = mod_pow(a, q as u64, p);
    let mut r = mod_pow(a, ((q + 1) / 2) as u64, p);
    let mulm = |x: i64, y: i64| ((x as i128 * y as i128) % p as i128) as i64;
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mulm(b, b);
        }
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

pub fn big_gcd_all<'a, I: IntoIterator<Item = &'a BigInt>>(it: I) -> BigInt {
    it.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Reduces `a` into `[0, m)`.
pub fn big_mod(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

pub fn big_to_i64(a: &BigInt) -> Result<i64> {
    i64::try_from(a).map_err(|_| Error::InvalidArgument(format!("{a} does not fit in i64")))
}

pub fn big_abs(a: &BigInt) -> BigInt {
    a.abs()
}
