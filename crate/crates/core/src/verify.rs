//! Seeded property suites over the whole library, used by the `verify`
//! command and by the acceptance tests.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::arith::{check_boundary_prime, legendre};
use crate::boundary::{
    boundary_points, classify_isotropic_vector, curve_count_bounds, lift_parabolic, pi_e, rank2_normal_form,
    rank2_representatives,
};
use crate::error::{Error, Result};
use crate::fp::{brute_force_orthogonal_order, finite_orthogonal_order, FpQuadraticSpace};
use crate::fqm::DiscElement;
use crate::hyperplane::{hyperplane_equivalence, reduce_vector_mod_p, same_line_mod_p};
use crate::isometry::{eichler_invariant, extend_isometry_to_l2, Isometry};
use crate::lattice::{make_l2d, Lattice, Vector};
use crate::sampling::{
    random_gamma1, random_gamma_element, random_hyperplane_vector, random_primitive_vector, random_transvection,
    seeded,
};

/// Failure messages kept per report.
const MAX_FAILURES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Isotropic,
    Orders,
    Transvections,
    Lifts,
    Extension,
    Hyperplanes,
    Classnum,
    Points,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Isotropic,
        Suite::Orders,
        Suite::Transvections,
        Suite::Lifts,
        Suite::Extension,
        Suite::Hyperplanes,
        Suite::Classnum,
        Suite::Points,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Isotropic => "isotropic",
            Suite::Orders => "orders",
            Suite::Transvections => "transvections",
            Suite::Lifts => "lifts",
            Suite::Extension => "extension",
            Suite::Hyperplanes => "hyperplanes",
            Suite::Classnum => "classnum",
            Suite::Points => "points",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: u64,
    pub failures: Vec<String>,
    pub details: serde_json::Value,
}

impl SuiteReport {
    fn new(suite: Suite, checks: u64, mut failures: Vec<String>, details: serde_json::Value) -> Self {
        failures.truncate(MAX_FAILURES);
        SuiteReport { suite, passed: failures.is_empty(), checks, failures, details }
    }
}

/// Knobs shared by all suites; counts default to the acceptance sizes.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub p: i64,
    pub dim: usize,
    pub count: usize,
    pub pairs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 42, p: 5, dim: 3, count: 0, pairs: 0 }
    }
}

impl VerifyConfig {
    fn count_or(&self, default: usize) -> usize {
        if self.count == 0 { default } else { self.count }
    }

    fn pairs_or(&self, default: usize) -> usize {
        if self.pairs == 0 { default } else { self.pairs }
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    match suite {
        Suite::Isotropic => verify_isotropic(cfg.p),
        Suite::Orders => verify_orders(cfg.p, cfg.dim),
        Suite::Transvections => verify_transvections(cfg.seed, cfg.p, cfg.count_or(1000), 100),
        Suite::Lifts => verify_lifts(cfg.seed, cfg.p, cfg.count_or(50), 10_000),
        Suite::Extension => verify_extension(cfg.seed, cfg.p, cfg.count_or(100), cfg.pairs_or(50)),
        Suite::Hyperplanes => verify_hyperplanes(cfg.seed, cfg.p, cfg.count_or(200), cfg.pairs_or(100)),
        Suite::Classnum => verify_classnum(cfg.p),
        Suite::Points => verify_points(cfg.seed, cfg.p, cfg.count_or(200)),
    }
}

fn collect_failures<T, F>(items: &[T], check: F) -> Vec<String>
where
    T: Send + Sync,
    F: Fn(usize, &T) -> std::result::Result<(), String> + Sync,
{
    let mut out: Vec<(usize, String)> =
        items.par_iter().enumerate().filter_map(|(i, x)| check(i, x).err().map(|m| (i, m))).collect();
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(i, m)| format!("#{i}: {m}")).collect()
}

/// Brute-force isotropic elements of `D(L_{2p^2})` against
/// `{(0, 2kp), (3, (2k+1)p) : 0 <= k < p}`.
pub fn verify_isotropic(p: i64) -> Result<SuiteReport> {
    check_boundary_prime(p)?;
    let l = make_l2d(p * p)?;
    let found: BTreeSet<DiscElement> = l.discriminant_module()?.isotropic_elements().into_iter().collect();
    let n = 2 * p * p;
    let expected: BTreeSet<DiscElement> = (0..p)
        .flat_map(|k| [DiscElement(vec![0, 2 * k * p % n]), DiscElement(vec![3, (2 * k + 1) * p % n])])
        .collect();
    let mut failures = Vec::new();
    if found != expected {
        let extra: Vec<String> = found.difference(&expected).map(ToString::to_string).collect();
        let missing: Vec<String> = expected.difference(&found).map(ToString::to_string).collect();
        failures.push(format!("unexpected {extra:?}, missing {missing:?}"));
    }
    Ok(SuiteReport::new(Suite::Isotropic, found.len() as u64, failures, json!({"p": p, "count": found.len()})))
}

/// Closed-form `|O(V)|` against exhaustive counting, both `eps` in even dimension.
pub fn verify_orders(p: i64, dim: usize) -> Result<SuiteReport> {
    let eps_list: Vec<Option<i64>> = if dim.is_multiple_of(2) { vec![Some(1), Some(-1)] } else { vec![None] };
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for eps in eps_list {
        let space = FpQuadraticSpace::standard(dim, eps, p)?;
        let formula = finite_orthogonal_order(dim, eps, p)?;
        let brute = brute_force_orthogonal_order(&space)?;
        if formula != BigInt::from(brute) {
            failures.push(format!("dim {dim}, eps {eps:?}: formula {formula}, count {brute}"));
        }
        rows.push(json!({"dim": dim, "eps": eps, "formula": formula.to_string(), "brute_force": brute}));
    }
    Ok(SuiteReport::new(Suite::Orders, rows.len() as u64, failures, json!({"p": p, "orders": rows})))
}

fn check_transvection(l: &Lattice, e: &Vector, t: &Isometry, vectors: &[Vector]) -> std::result::Result<(), String> {
    let g = t.matrix();
    if &(&(&g.transpose() * l.gram()) * g) != l.gram() {
        return Err("Gram not preserved".into());
    }
    if t.apply(e) != *e {
        return Err("e not fixed".into());
    }
    if !t.in_stable().map_err(|x| x.to_string())? {
        return Err("nontrivial action on D(L)".into());
    }
    let sn = t.spinor_norm().map_err(|x| x.to_string())?;
    if sn != 1 {
        return Err(format!("spinor norm {sn}"));
    }
    for v in vectors {
        let before = eichler_invariant(l, v).map_err(|x| x.to_string())?;
        let after = eichler_invariant(l, &t.apply(v)).map_err(|x| x.to_string())?;
        if before != after {
            return Err(format!("Eichler invariant of {v:?} changed"));
        }
    }
    Ok(())
}

/// Random `t(e, a)` on `L_2` and `L_{2p^2}`.
pub fn verify_transvections(seed: u64, p: i64, count: usize, vectors: usize) -> Result<SuiteReport> {
    check_boundary_prime(p)?;
    let mut rng = seeded(seed);
    let mut failures = Vec::new();
    let mut checks = 0u64;
    for d in [1, p * p] {
        let l = Arc::new(make_l2d(d)?);
        let vs: Vec<Vector> = (0..vectors).map(|_| random_primitive_vector(&mut rng, 6, 20)).collect();
        let samples = (0..count)
            .map(|_| random_transvection(&l, &mut rng, 5).map(|(e, _, t)| (e, t)))
            .collect::<Result<Vec<_>>>()?;
        let fails = collect_failures(&samples, |_, (e, t)| check_transvection(&l, e, t, &vs));
        failures.extend(fails.into_iter().map(|m| format!("L_{}: {m}", 2 * d)));
        checks += samples.len() as u64;
    }
    Ok(SuiteReport::new(
        Suite::Transvections,
        checks,
        failures,
        json!({"seed": seed, "p": p, "per_lattice": count, "vectors": vectors}),
    ))
}

/// Lifts of random `U` in `Gamma_1(a)` for each curve type.
pub fn verify_lifts(seed: u64, p: i64, count: usize, bound: i64) -> Result<SuiteReport> {
    check_boundary_prime(p)?;
    let l = Arc::new(make_l2d(p * p)?);
    let mut rng = seeded(seed);
    let mut failures = Vec::new();
    let mut checks = 0u64;
    let mut per_type = Vec::new();
    for (a, e) in rank2_representatives(&l, p)? {
        let nf = rank2_normal_form(&l, &e)?;
        let us: Vec<_> = (0..count).map(|_| random_gamma1(&mut rng, a, bound)).collect();
        let fails = collect_failures(&us, |_, u| {
            let g = lift_parabolic(l.clone(), &nf, u).map_err(|x| x.to_string())?;
            if !e.vectors().iter().all(|x| e.contains(&g.apply(x))) {
                return Err("gE != E".into());
            }
            if pi_e(&nf, &g).map_err(|x| x.to_string())? != *u {
                return Err("pi_E(g) != U".into());
            }
            if !g.in_gamma().map_err(|x| x.to_string())? {
                return Err(format!("lift of {u:?} not in Gamma"));
            }
            Ok(())
        });
        per_type.push(json!({"type": a, "samples": us.len(), "failures": fails.len()}));
        failures.extend(fails.into_iter().map(|m| format!("type {a}: {m}")));
        checks += us.len() as u64;
    }
    Ok(SuiteReport::new(Suite::Lifts, checks, failures, json!({"seed": seed, "p": p, "types": per_type})))
}

/// Extension of random elements of `Gamma_{2p^2}` to `L_2`, and compatibility
/// with composition.
pub fn verify_extension(seed: u64, p: i64, count: usize, pairs: usize) -> Result<SuiteReport> {
    check_boundary_prime(p)?;
    let l = Arc::new(make_l2d(p * p)?);
    let l2 = Arc::new(make_l2d(1)?);
    let mut rng = seeded(seed);
    let elems = (0..count)
        .map(|_| {
            let len = rng.random_range(1..=4);
            random_gamma_element(&l, &mut rng, len)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures = collect_failures(&elems, |_, g| {
        if !g.in_gamma().map_err(|x| x.to_string())? {
            return Err("sample is not in Gamma_2p^2".into());
        }
        extend_isometry_to_l2(g, l2.clone(), p).map(|_| ()).map_err(|x| x.to_string())
    });
    let idx: Vec<(usize, usize)> =
        (0..pairs).map(|_| (rng.random_range(0..elems.len()), rng.random_range(0..elems.len()))).collect();
    failures.extend(collect_failures(&idx, |_, &(i, j)| {
        let ext = |g: &Isometry| extend_isometry_to_l2(g, l2.clone(), p).map_err(|x| x.to_string());
        let lhs = ext(&elems[i].compose(&elems[j]))?;
        let rhs = ext(&elems[i])?.compose(&ext(&elems[j])?);
        if lhs != rhs {
            return Err(format!("ext(g{i} g{j}) != ext(g{i}) ext(g{j})"));
        }
        Ok(())
    }));
    Ok(SuiteReport::new(
        Suite::Extension,
        (count + pairs) as u64,
        failures,
        json!({"seed": seed, "p": p, "elements": count, "pairs": pairs}),
    ))
}

/// Reduction of random nondegenerate hyperplanes of `L_2 / p` and explicit
/// equivalences between pairs in the same square class.
pub fn verify_hyperplanes(seed: u64, p: i64, count: usize, pairs: usize) -> Result<SuiteReport> {
    check_boundary_prime(p)?;
    let l2 = Arc::new(make_l2d(1)?);
    let mut rng = seeded(seed);
    let ws: Vec<Vector> = (0..count).map(|_| random_hyperplane_vector(&l2, &mut rng, p)).collect();
    let mut failures = collect_failures(&ws, |_, w| {
        let red = reduce_vector_mod_p(&l2, w, p).map_err(|x| x.to_string())?;
        let product = red.transcript.iter().fold(Isometry::identity(l2.clone()), |acc, g| g.compose(&acc));
        if product != red.composite {
            return Err("transcript does not multiply to the composite".into());
        }
        if !same_line_mod_p(&product.apply(w), &red.standard, p) {
            return Err("composite misses the standard line".into());
        }
        let tail = &red.standard[2..];
        if red.standard[0] != BigInt::from(1) || tail.iter().any(|x| x.to_i64() != Some(0)) {
            return Err(format!("non-standard target {:?}", red.standard));
        }
        Ok(())
    });
    let pb = BigInt::from(p);
    let norm_mod = |v: &Vector| (l2.norm(v) % &pb).to_i64().expect("residue");
    let mut uv = Vec::with_capacity(pairs);
    while uv.len() < pairs {
        let u = random_hyperplane_vector(&l2, &mut rng, p);
        let v = random_hyperplane_vector(&l2, &mut rng, p);
        if legendre(norm_mod(&u) * norm_mod(&v), p) == 1 {
            uv.push((u, v));
        }
    }
    failures.extend(collect_failures(&uv, |_, (u, v)| {
        let g = hyperplane_equivalence(&l2, u, v, p).map_err(|x| x.to_string())?;
        if !same_line_mod_p(&g.apply(u), v, p) {
            return Err("g u is not on the line of v".into());
        }
        Ok(())
    }));
    Ok(SuiteReport::new(
        Suite::Hyperplanes,
        (count + pairs) as u64,
        failures,
        json!({"seed": seed, "p": p, "vectors": count, "pairs": pairs}),
    ))
}

/// Curve-count bounds, with both class-number routes compared.
pub fn verify_classnum(p: i64) -> Result<SuiteReport> {
    let b = curve_count_bounds(p)?;
    let details = serde_json::to_value(&b).map_err(|e| Error::Serde(e.to_string()))?;
    Ok(SuiteReport::new(Suite::Classnum, 2, Vec::new(), details))
}

/// Boundary-point classification is constant along random `Gamma` words.
pub fn verify_points(seed: u64, p: i64, words: usize) -> Result<SuiteReport> {
    check_boundary_prime(p)?;
    let l = Arc::new(make_l2d(p * p)?);
    let points = boundary_points(&l, p)?;
    let mut rng = seeded(seed);
    let gs = (0..words)
        .map(|_| {
            let len = rng.random_range(1..=4);
            random_gamma_element(&l, &mut rng, len)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = collect_failures(&gs, |i, g| {
        for pt in &points {
            let moved = classify_isotropic_vector(&l, &g.apply(&pt.representative), p).map_err(|x| x.to_string())?;
            if (moved.family, moved.k) != (pt.family, pt.k) {
                return Err(format!("word {i} moves {} to {}", pt.id(), moved.id()));
            }
        }
        Ok(())
    });
    Ok(SuiteReport::new(
        Suite::Points,
        (words * points.len()) as u64,
        failures,
        json!({"seed": seed, "p": p, "points": points.len(), "words": words}),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        let cfg = VerifyConfig { count: 5, pairs: 3, ..VerifyConfig::default() };
        for suite in Suite::ALL {
            let r = run_suite(suite, &cfg).unwrap();
            assert!(r.passed, "{suite}: {:?}", r.failures);
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
