//! Rank-one isotropic sublattices of `L_{2p^2}` up to `Gamma`: the boundary points.
//!
//! A primitive isotropic `v` is determined up to `Gamma` by `v*` in
//! `D(L) = C6 + C_{2p^2}` (named generators `w/6`, `v/2p^2`), and `<v>` only
//! sees `v*` up to sign. The isotropic classes are `(0, 2kp)` and
//! `(3, (2k+1)p)`; sorted by order they give the families 1, 2, p and 2p.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::check_boundary_prime;
use crate::error::{Error, Result};
use crate::fqm::DiscElement;
use crate::lattice::{Lattice, Vector};
use crate::linalg::int_vec;

/// Order of `v*`, which is also `div(v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFamily {
    One,
    Two,
    P,
    TwoP,
}

impl PointFamily {
    pub fn divisor(self, p: i64) -> i64 {
        match self {
            PointFamily::One => 1,
            PointFamily::Two => 2,
            PointFamily::P => p,
            PointFamily::TwoP => 2 * p,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PointFamily::One => "1",
            PointFamily::Two => "2",
            PointFamily::P => "p",
            PointFamily::TwoP => "2p",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryPoint {
    pub family: PointFamily,
    /// `Some` for families `p` and `2p` only; canonical under `k <-> -k`.
    pub k: Option<i64>,
    pub representative: Vector,
    pub star: DiscElement,
}

impl BoundaryPoint {
    /// `p1`, `p2`, `pp(k)`, `p2p(k)`.
    pub fn id(&self) -> String {
        match (self.family, self.k) {
            (PointFamily::One, _) => "p1".into(),
            (PointFamily::Two, _) => "p2".into(),
            (PointFamily::P, Some(k)) => format!("pp_{k}"),
            (PointFamily::TwoP, Some(k)) => format!("p2p_{k}"),
            (f, None) => format!("p{}", f.label()),
        }
    }
}

fn check_l2p2(l: &Lattice, p: i64) -> Result<()> {
    check_boundary_prime(p)?;
    let v = l.v_mark()?;
    l.w_mark()?;
    if l.rank() != 6 || l.norm(&v) != BigInt::from(-2 * p * p) {
        return Err(Error::InvalidArgument(format!("lattice is not L_(2p^2) for p = {p}")));
    }
    Ok(())
}

/// Family and canonical `k` for a star class `(x, y)` of `C6 + C_{2p^2}`.
pub fn classify_star(star: &DiscElement, p: i64) -> Result<(PointFamily, Option<i64>)> {
    let (x, y) = match star.coords() {
        [x, y] => (*x, *y),
        _ => return Err(Error::Dimension(format!("expected a class in C6 + C_(2p^2), got {star}"))),
    };
    let bad = || Error::NotIsotropic(format!("{star} is not an isotropic class"));
    match x {
        0 => {
            if y == 0 {
                return Ok((PointFamily::One, None));
            }
            if y % (2 * p) != 0 {
                return Err(bad());
            }
            let k = (y / (2 * p)).rem_euclid(p);
            Ok((PointFamily::P, Some(k.min(p - k))))
        }
        3 => {
            if y % p != 0 {
                return Err(bad());
            }
            let j = (y / p).rem_euclid(2 * p);
            if j % 2 == 0 {
                return Err(bad());
            }
            if j == p {
                return Ok((PointFamily::Two, None));
            }
            let j = j.min(2 * p - j);
            Ok((PointFamily::TwoP, Some((j - 1) / 2)))
        }
        _ => Err(bad()),
    }
}

/// Classifies a primitive isotropic vector of `L_{2p^2}` by its boundary point.
pub fn classify_isotropic_vector(l: &Lattice, v: &[BigInt], p: i64) -> Result<BoundaryPoint> {
    check_l2p2(l, p)?;
    if !l.is_isotropic(v) {
        return Err(Error::NotIsotropic(format!("v^2 = {}", l.norm(v))));
    }
    let star = l.star(v)?;
    let (family, k) = classify_star(&star, p)?;
    let div = l.divisor(v)?.to_i64().ok_or_else(|| Error::Invariant("divisor overflow".into()))?;
    if div != family.divisor(p) {
        return Err(Error::Invariant(format!("div(v) = {div} but v* has order {}", family.divisor(p))));
    }
    Ok(BoundaryPoint { family, k, representative: v.to_vec(), star: canonical_star(family, k, p) })
}

fn canonical_star(family: PointFamily, k: Option<i64>, p: i64) -> DiscElement {
    let n = 2 * p * p;
    match (family, k) {
        (PointFamily::One, _) => DiscElement(vec![0, 0]),
        (PointFamily::Two, _) => DiscElement(vec![3, p * p % n]),
        (PointFamily::P, Some(k)) => DiscElement(vec![0, 2 * k * p % n]),
        (PointFamily::TwoP, Some(k)) => DiscElement(vec![3, (2 * k + 1) * p % n]),
        _ => unreachable!("families p and 2p carry k"),
    }
}

/// Explicit primitive isotropic vector in `(e1, f1, e2, f2, w, v)` coordinates.
pub fn point_representative(family: PointFamily, k: Option<i64>, p: i64) -> Vector {
    match (family, k) {
        (PointFamily::One, _) => int_vec(&[1, 0, 0, 0, 0, 0]),
        // 4 v3 v4 + 3 + p^2 = 0 with v3 = 1, up to the factor 2.
        (PointFamily::Two, _) => int_vec(&[2, 0, 2, 2 * (3 + p * p) / 4, 1, 1]),
        (PointFamily::P, Some(k)) => int_vec(&[p, 0, p, p * k * k, 0, k]),
        (PointFamily::TwoP, Some(k)) => {
            let j = 2 * k + 1;
            int_vec(&[2 * p, 0, 2 * p, 2 * p * (3 + j * j) / 4, p, j])
        }
        _ => unreachable!("families p and 2p carry k"),
    }
}

/// One point per `Gamma`-orbit, ordered by family then `k`.
pub fn boundary_points(l: &Lattice, p: i64) -> Result<Vec<BoundaryPoint>> {
    check_l2p2(l, p)?;
    let mut labels: Vec<(PointFamily, Option<i64>)> = vec![(PointFamily::One, None), (PointFamily::Two, None)];
    labels.extend((1..=(p - 1) / 2).map(|k| (PointFamily::P, Some(k))));
    labels.extend((0..=(p - 3) / 2).map(|k| (PointFamily::TwoP, Some(k))));
    labels
        .into_iter()
        .map(|(family, k)| {
            let v = point_representative(family, k, p);
            let point = classify_isotropic_vector(l, &v, p)?;
            if point.family != family || point.k != k {
                return Err(Error::Invariant(format!("representative of {family:?}/{k:?} classified as {point:?}")));
            }
            Ok(point)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_l2d, vector};

    #[test]
    fn families_of_known_vectors() {
        let p = 5;
        let l = make_l2d(p * p).unwrap();
        let e1 = classify_isotropic_vector(&l, &vector(&[1, 0, 0, 0, 0, 0]), p).unwrap();
        assert_eq!((e1.family, e1.star.clone()), (PointFamily::One, DiscElement(vec![0, 0])));
        let two = classify_isotropic_vector(&l, &vector(&[2, 0, 2, 14, 1, 1]), p).unwrap();
        assert_eq!((two.family, two.star.0.clone()), (PointFamily::Two, vec![3, 25]));
        // k and -k give the same point
        let a = classify_isotropic_vector(&l, &vector(&[5, 0, 5, 5, 0, 1]), p).unwrap();
        let b = classify_isotropic_vector(&l, &vector(&[5, 0, 5, 80, 0, 4]), p).unwrap();
        assert_eq!((a.family, a.k), (PointFamily::P, Some(1)));
        assert_eq!(a.k, b.k);
    }

    #[test]
    fn rejects_bad_input() {
        let l = make_l2d(25).unwrap();
        assert!(matches!(
            classify_isotropic_vector(&l, &vector(&[1, 1, 0, 0, 0, 0]), 5),
            Err(Error::NotIsotropic(_))
        ));
        assert_eq!(classify_isotropic_vector(&l, &vector(&[2, 0, 0, 0, 0, 0]), 5), Err(Error::NotPrimitive));
        assert_eq!(boundary_points(&l, 4), Err(Error::BadPrime(4)));
        assert!(boundary_points(&l, 7).is_err());
    }

    #[test]
    fn point_census() {
        for p in [5i64, 7, 11, 13] {
            let l = make_l2d(p * p).unwrap();
            let pts = boundary_points(&l, p).unwrap();
            assert_eq!(pts.len() as i64, p + 1);
            for pt in &pts {
                assert!(l.is_isotropic(&pt.representative));
                assert_eq!(l.divisor(&pt.representative).unwrap(), BigInt::from(pt.family.divisor(p)));
            }
        }
    }
}
