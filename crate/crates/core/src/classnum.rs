//! Class numbers of positive definite binary quadratic forms.
//!
//! `h(D)` counts proper equivalence classes of primitive forms
//! `ax^2 + bxy + cy^2` with `b^2 - 4ac = D < 0`. Non-fundamental `D` are
//! allowed; this is the form class number, not an order's Picard number.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

/// `(a, b, c)` representing `ax^2 + bxy + cy^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BinaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    /// `|b| <= a <= c`, with `b >= 0` when `|b| = a` or `a = c`.
    pub fn is_reduced(&self) -> bool {
        let BinaryForm { a, b, c } = *self;
        b.abs() <= a && a <= c && ((b.abs() != a && a != c) || b >= 0)
    }

    /// Gauss reduction of a positive definite form to the unique reduced
    /// form in its proper equivalence class.
    pub fn reduce(self) -> BinaryForm {
        let BinaryForm { mut a, mut b, mut c } = self;
        assert!(a > 0 && b * b - 4 * a * c < 0, "reduce expects a positive definite form");
        loop {
            // b -> b - 2ak lands in (-a, a]
            let k = (b + a - 1).div_euclid(2 * a);
            if k != 0 {
                c += a * k * k - b * k;
                b -= 2 * a * k;
            }
            if c < a {
                (a, b, c) = (c, -b, a);
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return BinaryForm { a, b, c };
        }
    }
}

fn check_discriminant(d: i64) -> Result<()> {
    if d < 0 && (d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{d} is not a negative discriminant (0 or 1 mod 4)")))
    }
}

/// All primitive reduced forms of discriminant `d`, by direct enumeration
/// of `a <= sqrt(|d|/3)`, `|b| <= a`.
pub fn reduced_forms(d: i64) -> Result<Vec<BinaryForm>> {
    check_discriminant(d)?;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in -a..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = BinaryForm { a, b, c: num / (4 * a) };
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
        a += 1;
    }
    Ok(out)
}

pub fn class_number(d: i64) -> Result<u64> {
    Ok(reduced_forms(d)?.len() as u64)
}

/// Second route: for every `b` in a window, split `(b^2 - d)/4 = a*c` in all
/// ways, reduce each primitive form and count distinct results. The window
/// contains every reduced form, so every class is hit.
pub fn class_number_by_reduction(d: i64) -> Result<u64> {
    check_discriminant(d)?;
    let bound = (((-d) as f64 / 3.0).sqrt() as i64) + 2;
    let mut seen = BTreeSet::new();
    for b in -2 * bound..=2 * bound {
        let num = b * b - d;
        if num % 4 != 0 {
            continue;
        }
        let ac = num / 4;
        let mut a = 1;
        while a * a <= ac {
            if ac % a == 0 {
                for (x, y) in [(a, ac / a), (ac / a, a)] {
                    let f = BinaryForm { a: x, b, c: y };
                    if f.is_primitive() {
                        seen.insert(f.reduce());
                    }
                }
            }
            a += 1;
        }
    }
    Ok(seen.len() as u64)
}
