//! Index and cusp count of `Gamma_1(N)` by coset enumeration.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::arith::gcd_i64;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveGroup {
    pub level: i64,
    pub name: String,
    /// Index of the image in `PSL(2, Z)`.
    pub index: u64,
    pub cusps: u64,
}

/// Right cosets of `Gamma_1(N)` in `SL(2, Z)` correspond to bottom rows
/// `(c, d) mod N` with `gcd(c, d, N) = 1`. Cusps are the orbits of these
/// rows under `(c, d) -> (c, c + d)` and `(c, d) -> (-c, -d)`.
pub fn curve_group(level: i64) -> Result<CurveGroup> {
    if level < 1 {
        return Err(Error::InvalidArgument(format!("level must be positive (got {level})")));
    }
    if level == 1 {
        return Ok(CurveGroup { level, name: "PSL(2,Z)".into(), index: 1, cusps: 1 });
    }
    let n = level;
    let rows: Vec<(i64, i64)> = (0..n)
        .flat_map(|c| (0..n).map(move |d| (c, d)))
        .filter(|&(c, d)| gcd_i64(gcd_i64(c, d), n) == 1)
        .collect();
    let mut seen = BTreeSet::new();
    let mut cusps = 0u64;
    for &start in &rows {
        if seen.contains(&start) {
            continue;
        }
        cusps += 1;
        let mut stack = vec![start];
        while let Some((c, d)) = stack.pop() {
            if !seen.insert((c, d)) {
                continue;
            }
            stack.push((c, (c + d).rem_euclid(n)));
            stack.push(((-c).rem_euclid(n), (-d).rem_euclid(n)));
        }
    }
    // -I lies in Gamma_1(N) only for N <= 2.
    let sl_index = rows.len() as u64;
    let index = if n <= 2 { sl_index } else { sl_index / 2 };
    Ok(CurveGroup { level, name: format!("Gamma_1({n})"), index, cusps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        assert_eq!(curve_group(1).unwrap().cusps, 1);
        let g2 = curve_group(2).unwrap();
        assert_eq!((g2.index, g2.cusps), (3, 2));
        let g5 = curve_group(5).unwrap();
        assert_eq!((g5.index, g5.cusps), (12, 4));
        let g10 = curve_group(10).unwrap();
        assert_eq!((g10.index, g10.cusps), (36, 8));
        assert!(curve_group(0).is_err());
    }
}
