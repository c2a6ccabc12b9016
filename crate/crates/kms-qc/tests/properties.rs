//! Properties of the solver on y^2 = x^6 + 31x^4 + 31x^2 + 1 at p = 3.

use std::collections::BTreeSet;

use kms_qc::curve::RationalPoint;
use kms_qc::qc::{find_roots, Multiplicity, QCProblem, QCReport, QCSolver};
use kms_qc::Padic;

fn solver(prec: i64) -> QCSolver {
    QCSolver::new(QCProblem::kms_int(31, 3, prec).unwrap().with_known_points(QCProblem::example_one_points())).unwrap()
}

fn family_sets(r: &QCReport) -> BTreeSet<(String, String)> {
    r.families()
        .into_iter()
        .flat_map(|(f, rs)| rs.into_iter().map(move |r| (f.clone(), if r.x.starts_with("inf") { "inf±".into() } else { r.x.clone() })))
        .collect()
}

fn vanishing(v: &Padic) -> i64 {
    if v.is_zero() {
        v.precision_bound()
    } else {
        v.valuation_bound()
    }
}

#[test]
fn runs_are_byte_identical() {
    let a = solver(6).solve().unwrap();
    let b = solver(6).solve().unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.to_text(), b.to_text());
}

#[test]
fn every_rational_point_is_a_candidate() {
    let report = solver(7).solve().unwrap();
    let matched: BTreeSet<String> = report.disks.iter().flat_map(|d| d.roots.iter().filter_map(|r| r.matched.clone())).collect();
    for pt in QCProblem::example_one_points() {
        assert!(matched.contains(&pt.to_string()), "{pt} not matched");
    }
    assert_eq!(matched.len(), 16);
}

#[test]
fn candidates_persist_when_precision_grows() {
    let low = solver(5);
    let high = solver(7);
    for disk in low.problem.curve.enumerate_disks(3).unwrap() {
        let a = low.solve_disk(&disk).unwrap();
        let b = high.solve_disk(&disk).unwrap();
        assert_eq!(a.len(), b.len(), "disk {disk}");
        for c in &a {
            let hit = b.iter().any(|d| match (c.x_value(), d.x_value()) {
                (Some(x), Some(y)) => y.truncate(5).agrees_with(&x.in_context(&y.context())) && x.precision_bound() == 5,
                (None, None) => true,
                _ => false,
            });
            assert!(hit, "disk {disk}: {:?} lost at precision 7", c.x);
        }
    }
}

/// Scans t0 over pZ/p^4. Where Hensel's lemma certifies a root in t0 + p^4 Z_p
/// the class must hold exactly one reported simple root; elsewhere
/// |G(t0)| > |G'(t0)| p^-4 rules roots out.
#[test]
fn root_classes_match_a_scan_mod_p4() {
    let s = solver(7);
    let ctx = *s.context();
    let p = 3u64;
    let modulus = 81i64;
    for disk in s.problem.curve.enumerate_disks(p).unwrap() {
        let ex = s.expand_g_on_disk(&disk).unwrap();
        let coeffs: Vec<Padic> = (0..ex.g.order()).map(|k| ex.g.coeff(k)).collect();
        let roots = find_roots(&coeffs, ex.tail_base, p, s.engine.target + 4).unwrap();
        assert!(roots.iter().all(|r| r.multiplicity == Multiplicity::Simple));
        let found: BTreeSet<i64> = roots
            .iter()
            .map(|r| {
                let k = r.t.truncate(4).lift();
                assert!(k.is_integer());
                let k: i64 = k.to_integer().try_into().unwrap();
                k.rem_euclid(modulus)
            })
            .collect();
        assert_eq!(found.len(), roots.len(), "disk {disk}: roots collide mod 3^4");

        let dg = ex.g.derivative();
        let mut hensel = BTreeSet::new();
        for t0 in (0..modulus).step_by(p as usize) {
            let x = ctx.from_int(t0);
            let a = vanishing(&ex.g.eval(&x).unwrap());
            let b = vanishing(&dg.eval(&x).unwrap());
            if a > 2 * b && a - b >= 4 {
                hensel.insert(t0);
            } else {
                assert!(a < b + 4, "disk {disk}, t0 = {t0}: undecided class (v(G) = {a}, v(G') = {b})");
            }
        }
        assert_eq!(found, hensel, "disk {disk}");
    }
}

#[test]
fn candidate_set_does_not_depend_on_z0() {
    let base = family_sets(&solver(7).solve().unwrap());
    for z0 in [RationalPoint::from_ratios((1, 7), (440, 343)), RationalPoint::from_ratios((-7, 1), (-440, 1))] {
        let pr = QCProblem::kms_int(31, 3, 7).unwrap().with_z0(z0.clone());
        let other = family_sets(&QCSolver::new(pr).unwrap().solve().unwrap());
        assert_eq!(base, other, "z0 = {z0}");
    }
}
