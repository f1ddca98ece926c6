use std::sync::Arc;

use proptest::prelude::*;
use umrow_core::cache::{read_group, write_group};
use umrow_core::calculus::mn::{mennicke_newman, mn_postcondition, MnMode};
use umrow_core::calculus::theta::{conjugation_identity, is_alternating, theta};
use umrow_core::group::{elementary_group, MatGroup};
use umrow_core::matrix::Mat;
use umrow_core::ring::{ideal_generate, make_ring, Elem, FiniteRing, RingSpec};
use umrow_core::rows::enumerate_um;

fn ring(k: usize) -> Arc<FiniteRing> {
    let specs = [
        r#"{"type": "zmod", "n": 6}"#,
        r#"{"type": "zmod", "n": 8}"#,
        r#"{"type": "poly_quotient", "base": {"type": "zmod", "n": 2}, "poly": [1, 1, 1]}"#,
        r#"{"type": "product", "factors": [{"type": "zmod", "n": 2}, {"type": "zmod", "n": 3}]}"#,
        r#"{"type": "excision", "base": {"type": "zmod", "n": 4}, "ideal": [2]}"#,
    ];
    make_ring(&RingSpec::from_json(specs[k % specs.len()]).unwrap(), 4096).unwrap()
}

fn mat(r: &FiniteRing, n: usize, raw: &[u16]) -> Mat {
    let e = raw.iter().take(n * n).map(|&x| x % r.size() as Elem).collect();
    Mat::from_entries(r, n, e).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_axioms(k in 0usize..5, a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
        let r = ring(k);
        let m = r.size() as Elem;
        let (a, b, c) = (a % m, b % m, c % m);
        prop_assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
        prop_assert_eq!(r.mul(r.mul(a, b), c), r.mul(a, r.mul(b, c)));
        prop_assert_eq!(r.mul(a, b), r.mul(b, a));
        prop_assert_eq!(r.add(a, r.neg(a)), r.zero());
        prop_assert_eq!(r.mul(r.one(), a), a);
    }

    #[test]
    fn matmul_associative_and_det_multiplicative(k in 0usize..5, x in prop::collection::vec(any::<u16>(), 27)) {
        let r = ring(k);
        let (a, b, c) = (mat(&r, 3, &x[..9]), mat(&r, 3, &x[9..18]), mat(&r, 3, &x[18..]));
        let ab = a.mul(&r, &b).unwrap();
        prop_assert_eq!(ab.mul(&r, &c).unwrap(), a.mul(&r, &b.mul(&r, &c).unwrap()).unwrap());
        prop_assert_eq!(ab.det(&r), r.mul(a.det(&r), b.det(&r)));
        prop_assert_eq!(ab.transpose(), b.transpose().mul(&r, &a.transpose()).unwrap());
    }

    #[test]
    fn right_action(k in 0usize..5, x in prop::collection::vec(any::<u16>(), 21)) {
        let r = ring(k);
        let (a, b) = (mat(&r, 3, &x[..9]), mat(&r, 3, &x[9..18]));
        let v: Vec<Elem> = x[18..].iter().map(|&e| e % r.size() as Elem).collect();
        let lhs = a.mul(&r, &b).unwrap().row_action(&r, &v).unwrap();
        prop_assert_eq!(lhs, b.row_action(&r, &a.row_action(&r, &v).unwrap()).unwrap());
    }

    #[test]
    fn theta_alternating_and_conjugation(k in 0usize..5, ui in any::<usize>(), x in prop::collection::vec(any::<u16>(), 6)) {
        let r = ring(k);
        let rows = enumerate_um(&r, 3, None, 1_000_000).unwrap().rows;
        let u = &rows[ui % rows.len()];
        prop_assert!(is_alternating(&r, &theta(&r, &u.entries, &u.certificate).unwrap()));
        // α as a product of transvections lies in SL₃.
        let mut alpha = Mat::identity(&r, 3);
        for (t, &l) in x.iter().enumerate() {
            let (i, j) = [(0, 1), (1, 2), (2, 0), (1, 0), (2, 1), (0, 2)][t];
            alpha = alpha.mul(&r, &Mat::elementary(&r, 3, i, j, l % r.size() as Elem)).unwrap();
        }
        prop_assert!(conjugation_identity(&r, &u.entries, &u.certificate, &alpha).unwrap());
    }

    #[test]
    fn mennicke_newman_random_pairs(k in 0usize..5, vi in any::<usize>(), wi in any::<usize>()) {
        let r = ring(k);
        let rows = enumerate_um(&r, 3, None, 1_000_000).unwrap().rows;
        let (v, w) = (&rows[vi % rows.len()].entries, &rows[wi % rows.len()].entries);
        let res = mennicke_newman(&r, None, v, w, MnMode::Absolute).unwrap();
        prop_assert!(mn_postcondition(&r, MnMode::Absolute, &res.v, &res.w));
        prop_assert_eq!(res.eps1.row_action(&r, v).unwrap(), res.v.clone());
        prop_assert_eq!(res.eps2.row_action(&r, w).unwrap(), res.w.clone());
        prop_assert_eq!(res.eps1.det(&r), r.one());
    }

    #[test]
    fn relative_mennicke_newman(vi in any::<usize>(), wi in any::<usize>(), mode in 0usize..3) {
        let r = ring(1);
        let i = ideal_generate(&r, &[r.int(2)]).unwrap();
        let rows = enumerate_um(&r, 3, Some(&i), 1_000_000).unwrap().rows;
        let (v, w) = (&rows[vi % rows.len()].entries, &rows[wi % rows.len()].entries);
        let mode = MnMode::ALL[mode];
        let res = mennicke_newman(&r, Some(&i), v, w, mode).unwrap();
        prop_assert!(mn_postcondition(&r, mode, &res.v, &res.w));
        if mode.is_relative() {
            prop_assert!(res.eps1.is_congruent_identity(&r, |x| i.contains(x)));
            prop_assert!(res.eps2.is_congruent_identity(&r, |x| i.contains(x)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cache_format_round_trip(picks in prop::collection::btree_set(0usize..168, 1..40)) {
        let r = make_ring(&RingSpec::zmod(2), 64).unwrap();
        let e = elementary_group(&r, 3, false, 1 << 12).unwrap();
        let keys: Vec<u64> = picks.iter().map(|&p| e.sorted_keys()[p]).collect();
        let g = MatGroup::from_keys(&r, 3, "sub", Vec::new(), keys.clone()).unwrap();
        let mut buf = Vec::new();
        write_group(&mut buf, &g, "sub").unwrap();
        let back = read_group(&mut buf.as_slice(), &r, 3, "sub").unwrap();
        prop_assert_eq!(back.sorted_keys(), keys);
        prop_assert!(read_group(&mut buf.as_slice(), &r, 3, "other").is_err());
    }
}
