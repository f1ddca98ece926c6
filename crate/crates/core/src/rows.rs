//! Unimodular rows and their elementary orbit spaces.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::group::{elementary_generators, z_generators, KeyCodec};
use crate::matrix::{row_times, ElemGen, Mat};
use crate::ring::{Elem, FiniteRing, IdealHandle};
use crate::{Error, Result};

pub const DEFAULT_ROW_BUDGET: u64 = 10_000_000;
pub const MAX_ROW_LEN: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UmRow {
    pub entries: Vec<Elem>,
    pub certificate: Vec<Elem>,
}

/// `w ≡ e₁ (mod I)` with `v · w = 1`, found by a search over `1 + I`
/// in the first slot and `I` elsewhere.
pub fn relative_certificate(ideal: &IdealHandle, v: &[Elem]) -> Option<Vec<Elem>> {
    let ring = ideal.ring();
    if v.is_empty() {
        return None;
    }
    if let Some(x) = ring.inv(v[0]) {
        if ideal.contains(ring.sub(x, ring.one())) {
            let mut w = vec![0; v.len()];
            w[0] = x;
            return Some(w);
        }
    }
    if !ring.is_unimodular(v) {
        return None;
    }
    let head = ideal.one_plus();
    let mut terms: Vec<(Elem, &[Elem])> = vec![(v[0], &head)];
    for &x in &v[1..] {
        terms.push((x, ideal.members()));
    }
    ring.solve_combination(ring.one(), &terms)
}

/// `v ≡ e₁ (mod I)`.
pub fn is_congruent_e1(ideal: &IdealHandle, v: &[Elem]) -> bool {
    let ring = ideal.ring();
    !v.is_empty()
        && ideal.contains(ring.sub(v[0], ring.one()))
        && v[1..].iter().all(|&x| ideal.contains(x))
}

pub fn e1(ring: &FiniteRing, n: usize) -> Vec<Elem> {
    let mut v = vec![0; n];
    if n > 0 {
        v[0] = ring.one();
    }
    v
}

#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub rows: Vec<UmRow>,
    /// Congruent unimodular rows for which no relative certificate was
    /// found. Always empty when the theory holds.
    pub uncertified: Vec<Vec<Elem>>,
}

/// All of `Um_n(R)`, or `Um_n(R, I)` when an ideal is given, in
/// lexicographic order of element indices.
pub fn enumerate_um(ring: &Arc<FiniteRing>, n: usize, ideal: Option<&IdealHandle>, budget: u64) -> Result<Enumeration> {
    if n == 0 {
        return Err(Error::Precondition("rows must have positive length".into()));
    }
    let choices: Vec<Vec<Elem>> = match ideal {
        None => vec![ring.elements().collect(); n],
        Some(i) => {
            if i.ring().id() != ring.id() {
                return Err(Error::Mismatch("ideal lives in another ring".into()));
            }
            let mut c = vec![i.one_plus()];
            c.extend(std::iter::repeat_n(i.members().to_vec(), n - 1));
            c
        }
    };
    let total = choices
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
        .unwrap_or(u64::MAX);
    if total > budget {
        return Err(Error::Budget {
            what: "candidate rows",
            limit: budget,
            reached: total,
        });
    }
    let mut out = Enumeration::default();
    let mut idx = vec![0usize; n];
    let mut v = vec![0 as Elem; n];
    loop {
        for p in 0..n {
            v[p] = choices[p][idx[p]];
        }
        if ring.is_unimodular(&v) {
            let cert = match ideal {
                None => ring.certificate(&v),
                Some(i) => relative_certificate(i, &v),
            };
            match cert {
                Some(certificate) => out.rows.push(UmRow {
                    entries: v.clone(),
                    certificate,
                }),
                None => out.uncertified.push(v.clone()),
            }
        }
        let mut p = n;
        loop {
            if p == 0 {
                return Ok(out);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < choices[p].len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

#[derive(Clone, Debug)]
pub enum Action {
    /// Right multiplication by `E_ij(λ)`.
    Elementary(Vec<ElemGen>),
    /// Right multiplication by arbitrary matrices.
    Matrices(Vec<Mat>),
}

impl Action {
    fn apply(&self, ring: &FiniteRing, n: usize, v: &[Elem], t: usize) -> Vec<Elem> {
        match self {
            Action::Elementary(g) => {
                let mut out = v.to_vec();
                g[t].act_row(ring, &mut out);
                out
            }
            Action::Matrices(m) => row_times(ring, n, v, &m[t].entries),
        }
    }

    fn len(&self) -> usize {
        match self {
            Action::Elementary(g) => g.len(),
            Action::Matrices(m) => m.len(),
        }
    }

    pub fn matrices(&self, ring: &FiniteRing, n: usize) -> Vec<Mat> {
        match self {
            Action::Elementary(g) => g.iter().map(|g| g.to_mat(ring, n)).collect(),
            Action::Matrices(m) => m.clone(),
        }
    }
}

/// Sort key of the canonical row order: coordinates compared from the
/// last to the first, elements ranked zero, one, then by index. Under it
/// `e₁` is the least member of its class.
pub fn canonical_key(ring: &FiniteRing, v: &[Elem]) -> Vec<usize> {
    let one = ring.one();
    v.iter()
        .rev()
        .map(|&x| match x {
            0 => 0,
            x if x == one => 1,
            x if x < one => x as usize + 1,
            x => x as usize,
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct OrbitClass {
    /// Row index of the canonically least member.
    pub rep: usize,
    /// Row indices, increasing.
    pub members: Vec<usize>,
}

pub struct OrbitSpace {
    ring: Arc<FiniteRing>,
    n: usize,
    ideal: Option<IdealHandle>,
    codec: KeyCodec,
    rows: Vec<UmRow>,
    keys: Vec<u64>,
    class: Vec<u32>,
    classes: Vec<OrbitClass>,
    uncertified: Vec<Vec<Elem>>,
    action: Action,
    action_tag: String,
}

impl std::fmt::Debug for OrbitSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrbitSpace")
            .field("n", &self.n)
            .field("rows", &self.rows.len())
            .field("classes", &self.classes.len())
            .finish()
    }
}

/// Partition the unimodular rows into orbits.
///
/// The absolute space is acted on by `E_ij(λ)` with `λ` in an additive
/// generating set of `R`. The relative space is acted on by the
/// generators `E_ij(a) E_ji(x) E_ij(−a)` of `E_n(R, I)` unless an
/// override is given. Classes are numbered by their canonical
/// representative, so the class of `e₁` is class 0.
pub fn orbit_space(
    ring: &Arc<FiniteRing>,
    n: usize,
    ideal: Option<&IdealHandle>,
    acting_override: Option<Vec<Mat>>,
    budget: u64,
) -> Result<OrbitSpace> {
    if n > MAX_ROW_LEN {
        return Err(Error::Precondition(format!("row length {n} exceeds the cap {MAX_ROW_LEN}")));
    }
    if ideal.is_some() && n < 3 && acting_override.is_none() {
        return Err(Error::Precondition("relative orbit spaces need n ≥ 3".into()));
    }
    let (action, action_tag) = match (acting_override, ideal) {
        (Some(m), _) => (Action::Matrices(m), "override".to_string()),
        (None, None) => (
            Action::Elementary(elementary_generators(n, ring.additive_generators())),
            "elementary".to_string(),
        ),
        (None, Some(i)) => (Action::Matrices(z_generators(ring, i, n)), "z_generators".to_string()),
    };
    if let Action::Matrices(m) = &action {
        if m.iter().any(|g| g.n != n || g.ring_id != ring.id()) {
            return Err(Error::Mismatch("acting matrix over a different ring or size".into()));
        }
    }
    let en = enumerate_um(ring, n, ideal, budget)?;
    let codec = KeyCodec::with_len(ring.size(), n)?;
    let keys: Vec<u64> = en.rows.iter().map(|r| codec.encode(&r.entries)).collect();
    debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
    let mut class = vec![u32::MAX; keys.len()];
    let mut classes = Vec::new();
    let mut sweep: Vec<usize> = (0..keys.len()).collect();
    sweep.sort_by_cached_key(|&i| canonical_key(ring, &en.rows[i].entries));
    for start in sweep {
        if class[start] != u32::MAX {
            continue;
        }
        let id = classes.len() as u32;
        class[start] = id;
        let mut members = vec![start];
        let mut q = 0;
        while q < members.len() {
            let v = &en.rows[members[q]].entries;
            for t in 0..action.len() {
                let u = action.apply(ring, n, v, t);
                let j = keys.binary_search(&codec.encode(&u)).map_err(|_| {
                    Error::Verification(format!(
                        "acting generator leaves the row set: {} -> {}",
                        ring.format_row(v),
                        ring.format_row(&u)
                    ))
                })?;
                if class[j] == u32::MAX {
                    class[j] = id;
                    members.push(j);
                } else if class[j] != id {
                    return Err(Error::Verification("orbit sweep met a finished class".into()));
                }
            }
            q += 1;
        }
        members.sort_unstable();
        classes.push(OrbitClass { rep: start, members });
    }
    Ok(OrbitSpace {
        ring: ring.clone(),
        n,
        ideal: ideal.cloned(),
        codec,
        rows: en.rows,
        keys,
        class,
        classes,
        uncertified: en.uncertified,
        action,
        action_tag,
    })
}

impl OrbitSpace {
    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ideal(&self) -> Option<&IdealHandle> {
        self.ideal.as_ref()
    }

    pub fn is_relative(&self) -> bool {
        self.ideal.is_some()
    }

    pub fn rows(&self) -> &[UmRow] {
        &self.rows
    }

    pub fn classes(&self) -> &[OrbitClass] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn is_singleton(&self) -> bool {
        self.classes.len() == 1
    }

    pub fn uncertified(&self) -> &[Vec<Elem>] {
        &self.uncertified
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn action_tag(&self) -> &str {
        &self.action_tag
    }

    pub fn row_index(&self, v: &[Elem]) -> Option<usize> {
        if v.len() != self.n || v.iter().any(|&x| x as usize >= self.ring.size()) {
            return None;
        }
        self.keys.binary_search(&self.codec.encode(v)).ok()
    }

    pub fn class_of(&self, v: &[Elem]) -> Result<usize> {
        self.row_index(v)
            .map(|i| self.class[i] as usize)
            .ok_or_else(|| Error::RowNotFound(self.ring.format_row(v)))
    }

    pub fn class_of_index(&self, i: usize) -> usize {
        self.class[i] as usize
    }

    pub fn rep(&self, c: usize) -> &[Elem] {
        &self.rows[self.classes[c].rep].entries
    }

    pub fn row(&self, i: usize) -> &UmRow {
        &self.rows[i]
    }

    /// Class of `e₁`, which every space contains.
    pub fn e1_class(&self) -> usize {
        self.class_of(&e1(&self.ring, self.n)).expect("e1 is unimodular and congruent")
    }

    /// Up to `k` members of a class, evenly spaced, the representative first.
    pub fn sample_members(&self, c: usize, k: usize) -> Vec<usize> {
        let m = &self.classes[c].members;
        if m.len() <= k {
            return m.clone();
        }
        (0..k).map(|t| m[t * m.len() / k]).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "ring_hash": self.ring.hash_hex(),
            "ideal": self.ideal.as_ref().map(|i| i.label()),
            "rows": self.rows.len(),
            "action": self.action_tag,
            "classes": self.classes.iter().map(|c| json!({
                "canonical_rep": self.ring.row_json(&self.rows[c.rep].entries),
                "size": c.members.len(),
            })).collect::<Vec<_>>(),
        })
    }

    /// One line per class: representative and size.
    pub fn csv_records(&self) -> Vec<[String; 2]> {
        self.classes
            .iter()
            .map(|c| [self.ring.format_row(&self.rows[c.rep].entries), c.members.len().to_string()])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{ideal_generate, make_ring, RingSpec};

    fn z(n: u64) -> Arc<FiniteRing> {
        make_ring(&RingSpec::zmod(n), 4096).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_um(&z(2), 3, None, 1000).unwrap().rows.len(), 7);
        let r = z(4);
        let all = enumerate_um(&r, 3, None, 1000).unwrap();
        assert_eq!(all.rows.len(), 56);
        for row in &all.rows {
            assert_eq!(r.dot(&row.entries, &row.certificate), r.one());
        }
        let zero = IdealHandle::zero(&r);
        let rel = enumerate_um(&r, 3, Some(&zero), 1000).unwrap();
        assert_eq!(rel.rows.len(), 1);
        assert_eq!(rel.rows[0].entries, vec![1, 0, 0]);
    }

    #[test]
    fn relative_certificates_are_congruent() {
        let r = z(8);
        let i = ideal_generate(&r, &[2]).unwrap();
        let en = enumerate_um(&r, 3, Some(&i), 1000).unwrap();
        assert!(en.uncertified.is_empty());
        for row in &en.rows {
            assert!(is_congruent_e1(&i, &row.entries));
            assert!(is_congruent_e1(&i, &row.certificate));
            assert_eq!(r.dot(&row.entries, &row.certificate), 1);
        }
    }

    #[test]
    fn singleton_spaces() {
        let r = z(2);
        let s = orbit_space(&r, 3, None, None, 1000).unwrap();
        assert!(s.is_singleton());
        assert_eq!(s.rep(0), &[1, 0, 0]);
        // x is a unit of smaller index than one in F4.
        let f4 = make_ring(&RingSpec::from_json(r#"{"type":"poly_quotient","base":{"type":"zmod","n":2},"poly":[1,1]}"#).unwrap(), 64).unwrap();
        let s = orbit_space(&f4, 3, None, None, 1000).unwrap();
        assert_eq!(s.rep(0), e1(&f4, 3).as_slice());
        let r4 = z(4);
        let i = ideal_generate(&r4, &[2]).unwrap();
        let rel = orbit_space(&r4, 3, Some(&i), None, 1000).unwrap();
        assert!(rel.is_singleton());
        assert_eq!(rel.class_of(&[1, 2, 0]).unwrap(), rel.e1_class());
        assert!(rel.class_of(&[1, 1, 0]).is_err());
    }

    #[test]
    fn relative_needs_length_three() {
        let r = z(4);
        let i = ideal_generate(&r, &[2]).unwrap();
        assert!(orbit_space(&r, 2, Some(&i), None, 1000).is_err());
    }

    #[test]
    fn length_two_has_several_orbits_over_a_field() {
        // Over a field E_2 acts transitively on nonzero rows.
        let s = orbit_space(&z(3), 2, None, None, 1000).unwrap();
        assert_eq!(s.rows().len(), 8);
        assert!(s.is_singleton());
    }
}
