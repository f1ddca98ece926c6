use std::sync::Arc;

use umrow_core::calculus::mn::{mennicke_newman, mn_postcondition, MnMode};
use umrow_core::calculus::theta::{conjugation_identity, descent_check, is_alternating, lemma_a_descend, theta, DescentContext};
use umrow_core::calculus::{
    choose_p, group_table, mn_check, niceness_all, valid_ps, vv_form1, wms_relation_check, TableOptions,
};
use umrow_core::group::{elementary_group, relative_elementary_group, RelMethod};
use umrow_core::matrix::Mat;
use umrow_core::ring::{ideal_generate, make_ring, Elem, FiniteRing, IdealHandle, RingSpec};
use umrow_core::rows::{e1, enumerate_um, orbit_space};

fn z(n: u64) -> Arc<FiniteRing> {
    make_ring(&RingSpec::zmod(n), 4096).unwrap()
}

fn row(r: &FiniteRing, v: &[i64]) -> Vec<Elem> {
    v.iter().map(|&x| r.int(x)).collect()
}

#[test]
fn p_choice() {
    let r = z(4);
    let s = orbit_space(&r, 3, None, None, 1000).unwrap();
    assert_eq!(choose_p(&s, &e1(&r, 3)).unwrap(), r.one());
    let v = row(&r, &[3, 2, 0]);
    // a·p ≡ 1 mod (2) by exhaustive scan: p ∈ {1, 3}.
    let scan: Vec<Elem> = r.elements().filter(|&p| r.mul(v[0], p) % 2 == 1).collect();
    assert_eq!(valid_ps(&s, &v), scan);
    assert!(scan.contains(&r.int(3)));
    let p = choose_p(&s, &v).unwrap();
    assert_eq!(r.sub(r.mul(v[0], p), r.one()) % 2, 0);
    for w in s.rows() {
        let p = choose_p(&s, &w.entries).unwrap();
        assert!(valid_ps(&s, &w.entries).contains(&p));
        assert_eq!(choose_p(&s, &w.entries).unwrap(), p);
    }
}

#[test]
fn vv_formula_instance() {
    let r = z(4);
    let v = row(&r, &[3, 2, 0]);
    assert_eq!(vv_form1(&r, &v, &v, r.int(3)), row(&r, &[1, 0, 0]));
}

#[test]
fn trivial_tables() {
    for (r, ideal) in [(z(2), None), (z(4), Some(2))] {
        let i = ideal.map(|g| ideal_generate(&r, &[r.int(g)]).unwrap());
        let s = orbit_space(&r, 3, i.as_ref(), None, 1000).unwrap();
        let (t, rep) = group_table(&s, TableOptions::default()).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(t.len(), 1);
        assert_eq!(t.mul(0, 0), s.e1_class());
        assert_eq!(rep.metric_u64("form_agreements"), rep.metric_u64("representative_pairs"));
        let (per, summary) = niceness_all(&s, &t);
        assert!(summary.passed());
        assert!(per.iter().all(|p| p.passed()));
    }
}

#[test]
fn weak_mennicke_relations() {
    for n in [2, 4] {
        let r = z(n);
        let s = orbit_space(&r, 3, None, None, 1000).unwrap();
        let (t, _) = group_table(&s, TableOptions::default()).unwrap();
        let rep = wms_relation_check(&s, &t).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}

#[test]
fn mennicke_newman_examples() {
    let r = z(4);
    let e = e1(&r, 3);
    let whole = IdealHandle::whole(&r);
    let res = mennicke_newman(&r, Some(&whole), &e, &e, MnMode::RelativeLast).unwrap();
    assert!(mn_postcondition(&r, MnMode::RelativeLast, &res.v, &res.w));
    let v = row(&r, &[1, 2, 3]);
    let res = mennicke_newman(&r, None, &v, &v, MnMode::Absolute).unwrap();
    assert_eq!(r.add(res.v[0], res.w[0]), r.one());
    assert_eq!(res.v[1..], res.w[1..]);
    assert_eq!(res.eps1.row_action(&r, &v).unwrap(), res.v);
    assert_eq!(res.eps2.row_action(&r, &v).unwrap(), res.w);
}

#[test]
fn mennicke_newman_all_pairs_z4() {
    let r = z(4);
    let two = ideal_generate(&r, &[r.int(2)]).unwrap();
    let s = orbit_space(&r, 3, Some(&two), None, 1000).unwrap();
    let abs = elementary_group(&r, 3, false, 1 << 20).unwrap();
    let rel = relative_elementary_group(&r, &two, 3, RelMethod::NormalClosure, 1 << 20).unwrap();
    let rep = mn_check(&s, &abs, Some(&rel));
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn theta_examples() {
    let r = z(4);
    let e = e1(&r, 3);
    let t = theta(&r, &e, &e).unwrap();
    let m1 = r.neg(r.one());
    #[rustfmt::skip]
    let expected = vec![
        0, m1, 0, 0,
        1, 0, 0, 0,
        0, 0, 0, m1,
        0, 0, 1, 0,
    ];
    assert_eq!(t.entries, expected);
    let g = elementary_group(&r, 3, false, 1 << 20).unwrap();
    for u in enumerate_um(&r, 3, None, 1000).unwrap().rows.iter().step_by(7) {
        assert!(is_alternating(&r, &theta(&r, &u.entries, &u.certificate).unwrap()));
        for k in (0..g.len()).step_by(4001) {
            assert!(conjugation_identity(&r, &u.entries, &u.certificate, &g.element(k)).unwrap());
        }
    }
}

#[test]
fn descent_examples() {
    let r = z(4);
    let two = ideal_generate(&r, &[r.int(2)]).unwrap();
    let ctx = DescentContext::new(&two, 1 << 20).unwrap();
    let u = row(&r, &[1, 2, 2]);
    let w = row(&r, &[1, 0, 0]);
    let eps = lemma_a_descend(&ctx, &u, &w, &Mat::identity(&r, 3)).unwrap();
    assert!(eps.is_identity(&r));
    let alpha = Mat::elementary(&r, 3, 1, 2, r.int(2));
    let eps = lemma_a_descend(&ctx, &u, &w, &alpha).unwrap();
    assert_eq!(eps.row_action(&r, &u).unwrap(), alpha.row_action(&r, &u).unwrap());
    assert!(ctx.relative_group().contains(&eps));
    let rep = descent_check(&two, 50, 7, 1 << 20).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.metric_u64("passed"), 50);
}
