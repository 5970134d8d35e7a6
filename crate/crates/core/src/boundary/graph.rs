//! Incidence graphs of boundary points and curves, counting bounds, and the
//! two plane orbits of `L_2`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::modular::{curve_group, CurveGroup};
use super::normal_form::{check_shape, rank2_normal_form, rank2_representatives, NormalForm};
use super::points::{boundary_points, classify_star, BoundaryPoint, PointFamily};
use crate::arith::{check_boundary_prime, gcd_i64};
use crate::classnum::{class_number, class_number_by_reduction};
use crate::error::{Error, Result};
use crate::fqm::DiscElement;
use crate::lattice::{make_l2d, Lattice, Sublattice, Vector};
use crate::linalg::int_vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Ambient {
    L2,
    L2p2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryCurve {
    pub a: i64,
    pub representative: Sublattice,
    pub group: CurveGroup,
    pub normal_form: NormalForm,
    /// Upper bound on the number of curves of this type.
    pub count_bound: u64,
    /// The same bound read with `a = p` for every type, when it differs.
    pub count_bound_alt: Option<u64>,
}

impl BoundaryCurve {
    pub fn id(&self) -> String {
        format!("c{}", self.a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryGraph {
    pub p: Option<i64>,
    pub ambient: Ambient,
    pub points: Vec<BoundaryPoint>,
    pub curves: Vec<BoundaryCurve>,
    /// `(curve index, point index)`, sorted.
    pub edges: Vec<(usize, usize)>,
}

/// A curve of type `a` passes through the points of family `i` iff `i | a`.
pub fn incidence(a: i64, point: &BoundaryPoint, p: i64) -> bool {
    a % point.family.divisor(p) == 0
}

/// `star` and `-star` name the same line.
fn canonical_pm(l: &Lattice, star: &DiscElement) -> Result<DiscElement> {
    let m = l.discriminant_module()?;
    Ok(star.clone().min(m.neg(star)))
}

/// Star classes (up to sign) of the primitive vectors `x v1 + y v2` of `E`
/// with `|x|, |y| <= bound`.
pub fn plane_star_classes(l: &Lattice, e: &Sublattice, bound: i64) -> Result<BTreeSet<DiscElement>> {
    let vs = e.vectors();
    if vs.len() != 2 {
        return Err(Error::InvalidArgument("expected a rank-2 sublattice".into()));
    }
    let pairs: Vec<(i64, i64)> = (-bound..=bound)
        .flat_map(|x| (-bound..=bound).map(move |y| (x, y)))
        .filter(|&(x, y)| gcd_i64(x, y) == 1)
        .collect();
    let stars = pairs
        .par_iter()
        .map(|&(x, y)| {
            let v: Vector = vs[0].iter().zip(&vs[1]).map(|(a, b)| a * x + b * y).collect();
            canonical_pm(l, &l.star(&v)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(stars.into_iter().collect())
}

/// Point indices met by the plane `E`, found by scanning its primitive vectors.
pub fn incidence_by_scan(l: &Lattice, e: &Sublattice, a: i64, points: &[BoundaryPoint]) -> Result<BTreeSet<usize>> {
    let stars = plane_star_classes(l, e, 2 * a + 1)?;
    let mut out = BTreeSet::new();
    for s in stars {
        let idx = points
            .iter()
            .map(|pt| canonical_pm(l, &pt.star))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .position(|ps| *ps == s)
            .ok_or_else(|| Error::Invariant(format!("star class {s} matches no boundary point")))?;
        out.insert(idx);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveCountBounds {
    pub p: i64,
    pub h_48p2: u64,
    pub h_12p2: u64,
    pub type_1: u64,
    pub type_2: u64,
    /// `8a` with `a = p`.
    pub type_p: u64,
    /// `4a` with `a = 2p`.
    pub type_2p: u64,
    /// `4a` with `a = p`.
    pub type_2p_alt: u64,
}

fn checked_class_number(d: i64) -> Result<u64> {
    let h = class_number(d)?;
    let h2 = class_number_by_reduction(d)?;
    if h != h2 {
        return Err(Error::Invariant(format!("class number oracles disagree at {d}: {h} vs {h2}")));
    }
    Ok(h)
}

/// `4 h(-48p^2)`, `128 h(-12p^2)`, `8a` and `4a`.
pub fn curve_count_bounds(p: i64) -> Result<CurveCountBounds> {
    check_boundary_prime(p)?;
    let h48 = checked_class_number(-48 * p * p)?;
    let h12 = checked_class_number(-12 * p * p)?;
    let pu = p as u64;
    Ok(CurveCountBounds {
        p,
        h_48p2: h48,
        h_12p2: h12,
        type_1: 4 * h48,
        type_2: 128 * h12,
        type_p: 8 * pu,
        type_2p: 8 * pu,
        type_2p_alt: 4 * pu,
    })
}

/// Points, one curve per type and the incidences of `L_{2p^2}`.
///
/// Edges come from divisibility and are checked against a scan of each
/// representative plane.
pub fn build_boundary_graph(p: i64) -> Result<BoundaryGraph> {
    check_boundary_prime(p)?;
    let l = make_l2d(p * p)?;
    let points = boundary_points(&l, p)?;
    let bounds = curve_count_bounds(p)?;
    let reps = rank2_representatives(&l, p)?;
    let curves = reps
        .into_par_iter()
        .map(|(a, e)| {
            let nf = rank2_normal_form(&l, &e)?;
            check_shape(&nf, &l, p)?;
            let (count_bound, count_bound_alt) = match a {
                1 => (bounds.type_1, None),
                2 => (bounds.type_2, None),
                x if x == p => (bounds.type_p, None),
                _ => (bounds.type_2p, Some(bounds.type_2p_alt)),
            };
            Ok(BoundaryCurve { a, representative: e, group: curve_group(a)?, normal_form: nf, count_bound, count_bound_alt })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        let by_div: BTreeSet<usize> = (0..points.len()).filter(|&i| incidence(c.a, &points[i], p)).collect();
        let by_scan = incidence_by_scan(&l, &c.representative, c.a, &points)?;
        if by_div != by_scan {
            return Err(Error::Invariant(format!(
                "type {}: divisibility gives {by_div:?}, scan gives {by_scan:?}",
                c.a
            )));
        }
        edges.extend(by_div.into_iter().map(|pi| (ci, pi)));
    }
    Ok(BoundaryGraph { p: Some(p), ambient: Ambient::L2p2, points, curves, edges })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum L2PlaneClass {
    TrivialH,
    C2H,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L2PlaneClassification {
    pub class: L2PlaneClass,
    pub h_group: Vec<DiscElement>,
    pub normal_form: NormalForm,
}

/// Orbit of a primitive totally isotropic plane of `L_2`, read off `H_E`,
/// with the normal form as witness.
pub fn classify_rank2_l2(l2: &Lattice, e: &Sublattice) -> Result<L2PlaneClassification> {
    if l2.rank() != 6 || l2.det().abs() != BigInt::from(12) {
        return Err(Error::InvalidArgument("expected L_2".into()));
    }
    let nf = rank2_normal_form(l2, e)?;
    let h = l2.h_group(e)?;
    let class = match h.len() {
        1 => L2PlaneClass::TrivialH,
        2 => L2PlaneClass::C2H,
        n => return Err(Error::Invariant(format!("H_E of order {n}"))),
    };
    let expected_a = if class == L2PlaneClass::TrivialH { 1 } else { 2 };
    if nf.a != expected_a || !nf.c.is_zero() {
        return Err(Error::Invariant(format!("H_E of order {} but normal form has a = {}", h.len(), nf.a)));
    }
    Ok(L2PlaneClassification { class, h_group: h, normal_form: nf })
}

/// `E1 = <e1, e2>` and `E2 = <e1, 2e2 + 2f2 + w + v>`.
pub fn l2_plane_representatives() -> Result<Vec<Sublattice>> {
    let e1 = int_vec(&[1, 0, 0, 0, 0, 0]);
    Ok(vec![
        Sublattice::from_vectors(6, &[e1.clone(), int_vec(&[0, 0, 1, 0, 0, 0])])?,
        Sublattice::from_vectors(6, &[e1, int_vec(&[0, 0, 2, 2, 1, 1])])?,
    ])
}

/// The boundary of the `L_2` quotient: one point per isotropic class of
/// `D(L_2)` and one curve per plane orbit, with incidences from scanning.
pub fn build_boundary_graph_l2() -> Result<BoundaryGraph> {
    let l2 = make_l2d(1)?;
    let disc = l2.discriminant_module()?;
    let reps = [int_vec(&[1, 0, 0, 0, 0, 0]), int_vec(&[0, 0, 2, 2, 1, 1])];
    let mut points = Vec::new();
    for (family, v) in [PointFamily::One, PointFamily::Two].into_iter().zip(reps) {
        let star = l2.star(&v)?;
        if !l2.is_isotropic(&v) || !disc.is_isotropic(&star) {
            return Err(Error::Invariant(format!("bad L_2 point representative {v:?}")));
        }
        points.push(BoundaryPoint { family, k: None, representative: v, star });
    }
    let isotropic: BTreeSet<DiscElement> =
        disc.isotropic_elements().iter().map(|x| canonical_pm(&l2, x)).collect::<Result<_>>()?;
    if isotropic.len() != points.len() {
        return Err(Error::Invariant(format!("{} isotropic classes in D(L_2)", isotropic.len())));
    }
    let mut curves = Vec::new();
    for e in l2_plane_representatives()? {
        let cls = classify_rank2_l2(&l2, &e)?;
        let a = cls.normal_form.a;
        curves.push(BoundaryCurve {
            a,
            representative: e,
            group: curve_group(a)?,
            normal_form: cls.normal_form,
            count_bound: 1,
            count_bound_alt: None,
        });
    }
    let mut edges = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        for pi in incidence_by_scan(&l2, &c.representative, c.a, &points)? {
            edges.push((ci, pi));
        }
    }
    Ok(BoundaryGraph { p: None, ambient: Ambient::L2, points, curves, edges })
}

fn rep_i64(v: &[BigInt]) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("representative entries are small")).collect()
}

fn group_label(g: &CurveGroup) -> String {
    if g.level == 1 {
        "PSL(2,Z)".into()
    } else {
        format!("Γ₁({})", g.level)
    }
}

impl BoundaryGraph {
    pub fn degree(&self, curve: usize) -> usize {
        self.edges.iter().filter(|(c, _)| *c == curve).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let points: Vec<_> = self
            .points
            .iter()
            .map(|pt| json!({"id": pt.id(), "family": pt.family.label(), "k": pt.k, "rep": rep_i64(&pt.representative)}))
            .collect();
        let curves: Vec<_> = self
            .curves
            .iter()
            .map(|c| {
                let mut v = json!({"id": c.id(), "type_a": c.a, "group": c.group.name, "count_bound": c.count_bound});
                if let Some(alt) = c.count_bound_alt {
                    v["count_bound_alt"] = json!(alt);
                }
                v
            })
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(c, p)| json!({"curve": self.curves[c].id(), "point": self.points[p].id()}))
            .collect();
        let ambient = match self.ambient {
            Ambient::L2 => "L2",
            Ambient::L2p2 => "L2p2",
        };
        json!({"p": self.p, "ambient": ambient, "points": points, "curves": curves, "edges": edges})
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph boundary {\n");
        out.push_str("  node [shape=circle, style=filled];\n");
        for pt in &self.points {
            let _ = writeln!(out, "  {} [label=\"{}\"];", pt.id(), pt.id());
        }
        for c in &self.curves {
            let _ = writeln!(out, "  {} [shape=box, style=solid, label=\"type {} / {}\"];", c.id(), c.a, group_label(&c.group));
        }
        for &(c, p) in &self.edges {
            let _ = writeln!(out, "  {} -- {};", self.curves[c].id(), self.points[p].id());
        }
        out.push_str("}\n");
        out
    }

    /// Plain-text summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.p {
            Some(p) => {
                let _ = writeln!(out, "boundary of L_2p^2, p = {p}");
            }
            None => out.push_str("boundary of L_2\n"),
        }
        let _ = writeln!(out, "points: {}", self.points.len());
        for pt in &self.points {
            let _ = writeln!(out, "  {:<8} family {:<2} star {}", pt.id(), pt.family.label(), pt.star);
        }
        let _ = writeln!(out, "curves: {}", self.curves.len());
        for (i, c) in self.curves.iter().enumerate() {
            let touches: Vec<String> =
                self.edges.iter().filter(|(ci, _)| *ci == i).map(|&(_, pi)| self.points[pi].id()).collect();
            let _ = writeln!(
                out,
                "  {:<4} type {:<3} {:<14} index {:<4} cusps {:<3} bound {:<6} meets {}",
                c.id(),
                c.a,
                c.group.name,
                c.group.index,
                c.group.cusps,
                c.count_bound,
                touches.join(" ")
            );
        }
        out
    }
}

/// Point of the graph whose star class is `star` up to sign.
pub fn point_for_star(graph: &BoundaryGraph, star: &DiscElement) -> Result<usize> {
    let p = graph.p.ok_or_else(|| Error::InvalidArgument("only for L_2p^2 graphs".into()))?;
    let (family, k) = classify_star(star, p)?;
    graph
        .points
        .iter()
        .position(|pt| pt.family == family && pt.k == k)
        .ok_or_else(|| Error::Invariant(format!("no point for {star}")))
}
