use std::sync::Arc;

use umrow_core::group::elementary_group;
use umrow_core::matrix::Mat;
use umrow_core::ring::{ideal_generate, make_ring, Elem, FiniteRing, IdealHandle, RingSpec};
use umrow_core::rows::{canonical_key, e1, enumerate_um, orbit_space, relative_certificate};

fn z(n: u64) -> Arc<FiniteRing> {
    make_ring(&RingSpec::zmod(n), 4096).unwrap()
}

fn all_rows(r: &FiniteRing, n: usize) -> Vec<Vec<Elem>> {
    let q = r.size();
    (0..q.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let x = (c % q) as Elem;
                    c /= q;
                    x
                })
                .collect()
        })
        .collect()
}

#[test]
fn unimodular_counts() {
    let f2 = z(2);
    assert_eq!(enumerate_um(&f2, 3, None, 1000).unwrap().rows.len(), 7);
    let r = z(4);
    // Brute-force certificate search over all 64 candidate rows.
    let brute = all_rows(&r, 3).iter().filter(|v| all_rows(&r, 3).iter().any(|w| r.dot(v, w) == r.one())).count();
    assert_eq!(brute, 56);
    let en = enumerate_um(&r, 3, None, 1000).unwrap();
    assert_eq!(en.rows.len(), brute);
    for row in &en.rows {
        assert_eq!(r.dot(&row.entries, &row.certificate), r.one());
    }
    let zero = enumerate_um(&r, 3, Some(&IdealHandle::zero(&r)), 1000).unwrap();
    assert_eq!(zero.rows.len(), 1);
    assert_eq!(zero.rows[0].entries, e1(&r, 3));
}

#[test]
fn relative_certificates_are_congruent() {
    let r = z(8);
    let i = ideal_generate(&r, &[r.int(2)]).unwrap();
    let en = enumerate_um(&r, 3, Some(&i), 100_000).unwrap();
    assert!(en.uncertified.is_empty());
    let e = e1(&r, 3);
    for row in &en.rows {
        assert_eq!(r.dot(&row.entries, &row.certificate), r.one());
        for k in 0..3 {
            assert!(i.contains(r.sub(row.entries[k], e[k])));
            assert!(i.contains(r.sub(row.certificate[k], e[k])));
        }
        assert!(relative_certificate(&i, &row.entries).is_some());
    }
}

#[test]
fn singleton_spaces() {
    let f2 = z(2);
    let s = orbit_space(&f2, 3, None, None, 1000).unwrap();
    assert_eq!(s.num_classes(), 1);
    assert_eq!(s.rep(0), e1(&f2, 3).as_slice());
    let r = z(4);
    let two = ideal_generate(&r, &[r.int(2)]).unwrap();
    assert!(orbit_space(&r, 3, Some(&two), None, 1000).unwrap().is_singleton());
}

#[test]
fn orbit_invariance() {
    let r = z(4);
    let s = orbit_space(&r, 3, None, None, 1000).unwrap();
    let e = e1(&r, 3);
    assert_eq!(s.class_of(&e).unwrap(), s.e1_class());
    for l in r.elements() {
        assert_eq!(s.class_of(&[r.one(), l, r.zero()]).unwrap(), s.e1_class());
    }
    let g = elementary_group(&r, 3, false, 1 << 20).unwrap();
    for (t, row) in s.rows().iter().enumerate().take(100) {
        let m = g.element((t * 7919) % g.len());
        let moved = m.row_action(&r, &row.entries).unwrap();
        assert_eq!(s.class_of(&moved).unwrap(), s.class_of(&row.entries).unwrap());
    }
}

#[test]
fn partition_under_a_smaller_action() {
    let r = z(4);
    let gens = vec![Mat::elementary(&r, 3, 0, 1, r.one())];
    let s = orbit_space(&r, 3, None, Some(gens.clone()), 1000).unwrap();
    assert!(s.num_classes() > 1);
    let mut seen = vec![false; s.rows().len()];
    for (c, class) in s.classes().iter().enumerate() {
        for &m in &class.members {
            assert!(!seen[m]);
            seen[m] = true;
            let moved = gens[0].row_action(&r, &s.row(m).entries).unwrap();
            assert_eq!(s.class_of(&moved).unwrap(), c);
        }
        let least = class.members.iter().min_by_key(|&&m| canonical_key(&r, &s.row(m).entries)).unwrap();
        assert_eq!(*least, class.rep);
    }
    assert!(seen.into_iter().all(|x| x));
}
