use std::sync::Arc;

use umrow_core::cache::GroupStore;
use umrow_core::excision::{
    double_excision_check, find_section, induced_orbit_map, lemma_l_check, relative_niceness_criterion_check, retract_check,
    suslin_retract_check,
};
use umrow_core::ring::{excision_ring, ideal_generate, make_ring, quotient_ring, FiniteRing, IdealHandle, RingSpec};
use umrow_core::rows::orbit_space;
use umrow_core::report::Verdict;
use umrow_core::Budgets;

fn z(n: u64) -> Arc<FiniteRing> {
    make_ring(&RingSpec::zmod(n), 4096).unwrap()
}

fn two_in_z4() -> (Arc<FiniteRing>, IdealHandle) {
    let r = z(4);
    let i = ideal_generate(&r, &[r.int(2)]).unwrap();
    (r, i)
}

#[test]
fn identity_and_pi2_maps() {
    let r = z(4);
    let s = orbit_space(&r, 3, None, None, 1000).unwrap();
    let (m, rep) = induced_orbit_map("id", &s, &s, |x| x);
    assert!(rep.passed());
    assert!(m.is_bijection());
    assert!(m.table.iter().enumerate().all(|(i, t)| *t == Some(i)));

    let (r, i) = two_in_z4();
    let ex = excision_ring(&r, &i, 4096).unwrap();
    let src = orbit_space(&ex.ring, 3, Some(&ex.ideal), None, 100_000).unwrap();
    let dst = orbit_space(&r, 3, Some(&i), None, 1000).unwrap();
    let (m, _) = induced_orbit_map("pi2", &src, &dst, |x| ex.pi2.apply(x));
    assert!(m.is_bijection());
    let abs = orbit_space(&ex.ring, 3, None, None, 100_000).unwrap();
    let (m, _) = induced_orbit_map("inclusion", &src, &abs, |x| x);
    assert!(m.injective);
}

#[test]
fn double_excision_chains() {
    let b = Budgets::default();
    let (r, i) = two_in_z4();
    assert!(double_excision_check(&r, &i, 3, 4, &b).unwrap().passed());
    assert!(double_excision_check(&r, &IdealHandle::zero(&r), 3, 4, &b).unwrap().passed());
    let f2 = z(2);
    assert!(double_excision_check(&f2, &IdealHandle::whole(&f2), 3, 2, &b).unwrap().passed());
}

#[test]
fn suslin_retract_instances() {
    let b = Budgets::default();
    let store = GroupStore::default();
    let (r, i) = two_in_z4();
    for (base, ideal) in [(r.clone(), i), (z(2), IdealHandle::whole(&z(2))), (r.clone(), IdealHandle::zero(&r))] {
        let ex = excision_ring(&base, &ideal, 4096).unwrap();
        let rep = suslin_retract_check(&ex, 3, &b, &store).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}

#[test]
fn retracts() {
    let (r, i) = two_in_z4();
    let ex = excision_ring(&r, &i, 4096).unwrap();
    assert!(retract_check(&ex.proj, &ex.section).passed());
    let q = quotient_ring(&r, &i).unwrap();
    assert!(find_section(&r, &q).unwrap().is_none());
    let p = make_ring(&RingSpec::Product { factors: vec![RingSpec::zmod(2), RingSpec::zmod(2)] }, 64).unwrap();
    let factor = ideal_generate(&p, &[p.parse("(1, 0)").unwrap()]).unwrap();
    let qp = quotient_ring(&p, &factor).unwrap();
    let s = find_section(&p, &qp).unwrap().expect("a factor projection splits");
    assert!(retract_check(&qp.q, &s).passed());
}

#[test]
fn lemma_l_instances() {
    let b = Budgets::default();
    let (r, i) = two_in_z4();
    assert_eq!(lemma_l_check(&r, &i, 3, &b).unwrap().verdict, Verdict::Skip);
    assert!(lemma_l_check(&r, &IdealHandle::zero(&r), 3, &b).unwrap().passed());
    let whole = lemma_l_check(&r, &IdealHandle::whole(&r), 3, &b).unwrap();
    assert!(whole.passed());
    assert!(!whole.model_caveats.is_empty());
}

#[test]
fn relative_niceness_criterion() {
    let b = Budgets::default();
    let (r, i) = two_in_z4();
    assert!(relative_niceness_criterion_check(&r, &i, 3, &b).unwrap().passed());
    assert!(relative_niceness_criterion_check(&r, &IdealHandle::zero(&r), 3, &b).unwrap().passed());
    let p = make_ring(&RingSpec::Product { factors: vec![RingSpec::zmod(2), RingSpec::zmod(2)] }, 64).unwrap();
    let factor = ideal_generate(&p, &[p.parse("(1, 0)").unwrap()]).unwrap();
    assert!(relative_niceness_criterion_check(&p, &factor, 3, &b).unwrap().passed());
}
