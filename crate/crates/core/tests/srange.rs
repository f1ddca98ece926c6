use std::sync::Arc;

use umrow_core::ring::{all_ideals, excision_ring, ideal_generate, make_ring, FiniteRing, IdealHandle, RingSpec};
use umrow_core::srange::{sr_condition, sr_laws_check, stable_range};

fn z(n: u64) -> Arc<FiniteRing> {
    make_ring(&RingSpec::zmod(n), 4096).unwrap()
}

#[test]
fn sr1_examples() {
    let r = z(4);
    assert!(sr_condition(&IdealHandle::zero(&r), 1, 1000).unwrap().holds);
    let whole = sr_condition(&IdealHandle::whole(&r), 1, 1000).unwrap();
    assert!(whole.holds);
    assert_eq!(whole.rows, 12);
    let two = ideal_generate(&r, &[r.int(2)]).unwrap();
    assert!(sr_condition(&two, 1, 1000).unwrap().holds);
}

#[test]
fn sr_is_one_on_finite_rings() {
    for r in [z(1), z(2), z(6), z(8)] {
        for i in all_ideals(&r).unwrap() {
            let s = stable_range(&i, 1_000_000).unwrap();
            assert_eq!((s.sr, s.sd), (Some(1), Some(0)), "{}", i.label());
            assert!(s.is_monotone());
        }
    }
    let r = z(4);
    let two = ideal_generate(&r, &[r.int(2)]).unwrap();
    let ex = excision_ring(&r, &two, 4096).unwrap();
    assert_eq!(stable_range(&IdealHandle::whole(&ex.ring), 1_000_000).unwrap().sr, Some(1));
}

#[test]
fn monotonicity_laws() {
    let r = z(8);
    let rep = sr_laws_check(&r, 1_000_000).unwrap();
    assert!(rep.passed());
    let p = make_ring(&RingSpec::Product { factors: vec![RingSpec::zmod(2), RingSpec::zmod(4)] }, 64).unwrap();
    let rep = sr_laws_check(&p, 1_000_000).unwrap();
    assert!(rep.passed(), "{rep:?}");
    // Ideals of Z/2 × Z/4 are products of ideals of the factors.
    assert_eq!(rep.metric_u64("ideals"), 6);
}
