//! JSON and text renderings of each report.

use kbb_core::arith::{big_to_i64, check_boundary_prime};
use kbb_core::boundary::{boundary_points, build_boundary_graph, curve_count_bounds};
use kbb_core::classnum::{class_number, class_number_by_reduction, reduced_forms};
use kbb_core::fp::{brute_force_orthogonal_order, finite_orthogonal_order, FpQuadraticSpace};
use kbb_core::hyperplane::{index_bound as bound_formula, index_from_orders};
use kbb_core::lattice::{make_l2d, Vector};
use kbb_core::linalg::IntMatrix;
use kbb_core::verify::{run_suite, Suite, VerifyConfig};
use kbb_core::{Error, Result};
use serde_json::{json, Value};

use crate::Format;

pub struct Report {
    json: Value,
    text: String,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => pretty(&self.json),
            Format::Text => self.text.clone(),
        }
    }
}

pub fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn ints(v: &Vector) -> Result<Vec<i64>> {
    v.iter().map(big_to_i64).collect()
}

fn matrix_rows(m: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    (0..m.rows()).map(|i| ints(&m.row(i))).collect()
}

pub fn points(p: i64) -> Result<Report> {
    check_boundary_prime(p)?;
    let l = make_l2d(p * p)?;
    let pts = boundary_points(&l, p)?;
    let mut text = format!("boundary points of L_2p^2, p = {p}: {}\n", pts.len());
    let mut rows = Vec::new();
    for pt in &pts {
        let rep = ints(&pt.representative)?;
        let divisor = big_to_i64(&l.divisor(&pt.representative)?)?;
        text.push_str(&format!(
            "  {:<8} family {:<2} div {:<3} star {:<10} rep {:?}\n",
            pt.id(),
            pt.family.label(),
            divisor,
            pt.star.to_string(),
            rep
        ));
        rows.push(json!({
            "id": pt.id(),
            "family": pt.family.label(),
            "k": pt.k,
            "representative": rep,
            "divisor": divisor,
            "star": pt.star.coords(),
        }));
    }
    Ok(Report { json: json!({"p": p, "count": pts.len(), "points": rows}), text })
}

pub fn curves(p: i64) -> Result<Report> {
    let g = build_boundary_graph(p)?;
    let mut text = format!("boundary curve types of L_2p^2, p = {p}\n");
    let mut rows = Vec::new();
    for (ci, c) in g.curves.iter().enumerate() {
        let meets: Vec<String> = g.edges.iter().filter(|e| e.0 == ci).map(|e| g.points[e.1].id()).collect();
        let nf = &c.normal_form;
        let b = matrix_rows(&nf.b)?;
        let alt = nf.alternative_b.as_ref().map(matrix_rows).transpose()?;
        text.push_str(&format!(
            "  {:<4} type {:<3} {:<12} index {:<4} cusps {:<3} B {:?} d {} bound {} meets {}\n",
            c.id(),
            c.a,
            c.group.name,
            c.group.index,
            c.group.cusps,
            b,
            nf.d,
            c.count_bound,
            meets.join(" ")
        ));
        rows.push(json!({
            "id": c.id(),
            "type_a": c.a,
            "group": {"level": c.group.level, "name": c.group.name, "index": c.group.index, "cusps": c.group.cusps},
            "plane": c.representative.vectors().iter().map(ints).collect::<Result<Vec<_>>>()?,
            "normal_form": {"a": nf.a, "b": b, "c": matrix_rows(&nf.c)?, "d": nf.d, "basis": matrix_rows(&nf.basis)?},
            "alternative_b": alt,
            "count_bound": c.count_bound,
            "count_bound_alt": c.count_bound_alt,
            "meets": meets,
        }));
    }
    Ok(Report { json: json!({"p": p, "curves": rows}), text })
}

pub fn bounds(p: i64) -> Result<Report> {
    let b = curve_count_bounds(p)?;
    let text = format!(
        "curve-count bounds, p = {p}\n  h(-48p^2) = {}, h(-12p^2) = {}\n  type 1  <= {}\n  type 2  <= {}\n  type p  <= {}\n  type 2p <= {} (reading a = p: {})\n",
        b.h_48p2, b.h_12p2, b.type_1, b.type_2, b.type_p, b.type_2p, b.type_2p_alt
    );
    let json = serde_json::to_value(&b).map_err(|e| Error::Serde(e.to_string()))?;
    Ok(Report { json, text })
}

pub fn index_bound(p: i64) -> Result<Report> {
    let bound = bound_formula(p)?;
    let (eps, index) = index_from_orders(p)?;
    if index > bound {
        return Err(Error::Invariant(format!("orthogonal-group index {index} exceeds {bound}")));
    }
    let json = json!({"p": p, "bound": big_to_i64(&bound)?, "epsilon": eps, "orthogonal_index": big_to_i64(&index)?});
    Ok(Report { json, text: format!("{bound}\n") })
}

pub fn classnum(d: i64) -> Result<Report> {
    let h = class_number(d)?;
    let h2 = class_number_by_reduction(d)?;
    if h != h2 {
        return Err(Error::Invariant(format!("class number oracles disagree at {d}: {h} vs {h2}")));
    }
    let forms: Vec<[i64; 3]> = reduced_forms(d)?.iter().map(|f| [f.a, f.b, f.c]).collect();
    let json = json!({"d": d, "h": h, "h_by_reduction": h2, "forms": forms});
    Ok(Report { json, text: format!("h({d}) = {h}\n") })
}

pub fn fqm_isotropic(d: i64) -> Result<Report> {
    let l = make_l2d(d)?;
    let m = l.discriminant_module()?;
    let elements: Vec<Vec<i64>> = m.isotropic_elements().into_iter().map(|x| x.0).collect();
    let mut text = format!("isotropic elements of D(L_2d), d = {d}, orders {:?}: {}\n", m.orders(), elements.len());
    for x in &elements {
        let parts: Vec<String> = x.iter().map(ToString::to_string).collect();
        text.push_str(&format!("  ({})\n", parts.join(", ")));
    }
    let json = json!({"d": d, "orders": m.orders(), "size": m.size(), "count": elements.len(), "elements": elements});
    Ok(Report { json, text })
}

pub fn fqm_order(p: i64, dim: usize, eps: Option<i64>, brute: bool) -> Result<Report> {
    let eps_list = match (dim % 2, eps) {
        (0, None) => vec![Some(1), Some(-1)],
        (0, Some(e)) => vec![Some(e)],
        (_, None) => vec![None],
        (_, Some(_)) => return Err(Error::InvalidArgument("--eps only applies to even dimension".into())),
    };
    let mut text = String::new();
    let mut cases = Vec::new();
    for e in eps_list {
        let formula = finite_orthogonal_order(dim, e, p)?;
        let count = if brute {
            let n = brute_force_orthogonal_order(&FpQuadraticSpace::standard(dim, e, p)?)?;
            if formula != n.into() {
                return Err(Error::Invariant(format!("formula {formula} but exhaustive count {n}")));
            }
            Some(n)
        } else {
            None
        };
        let eps_label = e.map_or(String::new(), |e| format!(", eps {e:+}"));
        let brute_label = count.map_or(String::new(), |n| format!(" (exhaustive count {n})"));
        text.push_str(&format!("|O(V)| for dim {dim}{eps_label} over F_{p}: {formula}{brute_label}\n"));
        cases.push(json!({"eps": e, "formula": formula.to_string(), "brute_force": count}));
    }
    Ok(Report { json: json!({"p": p, "dim": dim, "cases": cases}), text })
}

pub fn verify(suite: Suite, cfg: &VerifyConfig) -> Result<(Report, bool)> {
    let r = run_suite(suite, cfg)?;
    let mut text = format!("{} {} ({} checks)\n", if r.passed { "PASS" } else { "FAIL" }, r.suite, r.checks);
    for f in &r.failures {
        text.push_str(&format!("  {f}\n"));
    }
    text.push_str(&format!("  details: {}\n", r.details));
    let json = serde_json::to_value(&r).map_err(|e| Error::Serde(e.to_string()))?;
    Ok((Report { json, text }, r.passed))
}
