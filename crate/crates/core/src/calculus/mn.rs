//! Mennicke–Newman normalization of a pair of rows.
//!
//! Every step is an elementary move recorded in a running matrix, so the
//! result carries `ε₁, ε₂` with `v ε₁ = v'` and `w ε₂ = w'`.

use crate::matrix::{mul_into, row_times, ElemGen, Mat};
use crate::ring::{Elem, FiniteRing, IdealHandle};
use crate::rows::is_congruent_e1;
use crate::{Error, Result};

/// Cap on candidate vectors tried by a single coefficient search.
const SEARCH_CAP: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MnMode {
    /// `v' = (x, a₂, …)`, `w' = (y, a₂, …)` with `x + y = 1`, moves in `E_n(R)`.
    Absolute,
    /// Common last `n − 1` coordinates, moves in `E_n(R, I)`.
    RelativeFirst,
    /// Common first `n − 1` coordinates with `a + b` a unit modulo them,
    /// moves in `E_n(R, I)`.
    RelativeLast,
}

impl MnMode {
    pub const ALL: [MnMode; 3] = [MnMode::Absolute, MnMode::RelativeFirst, MnMode::RelativeLast];

    pub fn name(self) -> &'static str {
        match self {
            MnMode::Absolute => "absolute",
            MnMode::RelativeFirst => "relative_first",
            MnMode::RelativeLast => "relative_last",
        }
    }

    pub fn is_relative(self) -> bool {
        self != MnMode::Absolute
    }
}

#[derive(Clone, Debug)]
pub struct MnResult {
    pub eps1: Mat,
    pub eps2: Mat,
    pub v: Vec<Elem>,
    pub w: Vec<Elem>,
    /// Number of matrix factors in `ε₁` and `ε₂`.
    pub steps: (usize, usize),
}

struct Track<'a> {
    ring: &'a FiniteRing,
    n: usize,
    row: Vec<Elem>,
    eps: Vec<Elem>,
    steps: usize,
}

impl<'a> Track<'a> {
    fn new(ring: &'a FiniteRing, v: &[Elem]) -> Self {
        let n = v.len();
        Track {
            ring,
            n,
            row: v.to_vec(),
            eps: Mat::identity(ring, n).entries,
            steps: 0,
        }
    }

    fn elem(&mut self, i: usize, j: usize, lambda: Elem) {
        if lambda == 0 {
            return;
        }
        let g = ElemGen::new(i, j, lambda);
        g.act_row(self.ring, &mut self.row);
        g.mul_right(self.ring, self.n, &mut self.eps);
        self.steps += 1;
    }

    fn mat(&mut self, m: &[Elem]) {
        self.row = row_times(self.ring, self.n, &self.row, m);
        let mut out = vec![0; self.n * self.n];
        mul_into(self.ring, self.n, &self.eps, m, &mut out);
        self.eps = out;
        self.steps += 1;
    }
}

/// Coefficients `c` with `(base_k + c_k t)_k` unimodular, scanning the
/// distinct multiples of `t` in coefficient index order, the first
/// position varying slowest.
fn shift_search(ring: &FiniteRing, base: &[Elem], t: Elem) -> Option<Vec<Elem>> {
    let mut seen = vec![false; ring.size()];
    let mut mults: Vec<(Elem, Elem)> = Vec::new();
    for c in ring.elements() {
        let m = ring.mul(c, t);
        if !seen[m as usize] {
            seen[m as usize] = true;
            mults.push((c, m));
        }
    }
    let k = base.len();
    let mut idx = vec![0usize; k];
    let mut cur = base.to_vec();
    let mut tried = 0u64;
    loop {
        for p in 0..k {
            cur[p] = ring.add(base[p], mults[idx[p]].1);
        }
        if ring.is_unimodular(&cur) {
            return Some(idx.iter().map(|&i| mults[i].0).collect());
        }
        tried += 1;
        if tried >= SEARCH_CAP {
            return None;
        }
        let mut p = k;
        loop {
            if p == 0 {
                return None;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < mults.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Sums `Σ c_i x_i` with `c_i ∈ allowed`, as a reachability table.
fn reachable(ring: &FiniteRing, xs: &[Elem], allowed: &[Elem]) -> Vec<bool> {
    let mut reach = vec![false; ring.size()];
    reach[0] = true;
    for &x in xs {
        let mut next = vec![false; ring.size()];
        for s in ring.elements().filter(|&s| reach[s as usize]) {
            for &c in allowed {
                next[ring.add(s, ring.mul(c, x)) as usize] = true;
            }
        }
        reach = next;
    }
    reach
}

fn exhausted(what: &str, ring: &FiniteRing, v: &[Elem], w: &[Elem]) -> Error {
    Error::SearchExhausted(format!("{what} for v = {}, w = {}", ring.format_row(v), ring.format_row(w)))
}

/// Normalize `v` and `w` into the shape required by `mode`.
///
/// Relative modes need the ideal and rows congruent to `e₁`. Hypotheses
/// on the stable dimension are not enforced; a failing coefficient search
/// is reported as `SearchExhausted` with the offending pair.
pub fn mennicke_newman(
    ring: &FiniteRing,
    ideal: Option<&IdealHandle>,
    v: &[Elem],
    w: &[Elem],
    mode: MnMode,
) -> Result<MnResult> {
    let n = v.len();
    if w.len() != n || n < 2 {
        return Err(Error::Precondition("rows must share a length of at least 2".into()));
    }
    if !ring.is_unimodular(v) || !ring.is_unimodular(w) {
        return Err(Error::Precondition("rows must be unimodular".into()));
    }
    let (tv, tw) = match mode {
        MnMode::Absolute => absolute(ring, v, w)?,
        MnMode::RelativeFirst | MnMode::RelativeLast => {
            let ideal = ideal.ok_or_else(|| Error::Precondition("relative mode needs an ideal".into()))?;
            if !is_congruent_e1(ideal, v) || !is_congruent_e1(ideal, w) {
                return Err(Error::Precondition("rows must be congruent to e1".into()));
            }
            if mode == MnMode::RelativeFirst {
                relative_first(ring, ideal, v, w)?
            } else {
                if n < 3 {
                    return Err(Error::Precondition("relative_last needs n ≥ 3".into()));
                }
                relative_last(ring, ideal, v, w)?
            }
        }
    };
    let id = ring.id();
    Ok(MnResult {
        eps1: Mat {
            ring_id: id,
            n,
            entries: tv.eps,
        },
        eps2: Mat {
            ring_id: id,
            n,
            entries: tw.eps,
        },
        v: tv.row,
        w: tw.row,
        steps: (tv.steps, tw.steps),
    })
}

fn absolute<'a>(ring: &'a FiniteRing, v: &[Elem], w: &[Elem]) -> Result<(Track<'a>, Track<'a>)> {
    let n = v.len();
    let mut tv = Track::new(ring, v);
    let mut tw = Track::new(ring, w);
    // Make the tails comaximal by adding multiples of a₁b₁.
    let t = ring.mul(tv.row[0], tw.row[0]);
    let mut base = tv.row[1..].to_vec();
    base.extend_from_slice(&tw.row[1..]);
    let c = shift_search(ring, &base, t).ok_or_else(|| exhausted("no comaximal tails", ring, v, w))?;
    let (a1, b1) = (tv.row[0], tw.row[0]);
    for i in 1..n {
        tv.elem(0, i, ring.mul(c[i - 1], b1));
        tw.elem(0, i, ring.mul(c[n - 2 + i], a1));
    }
    // Add tail combinations to the heads so that they sum to one.
    let all: Vec<Elem> = ring.elements().collect();
    let target = ring.sub(ring.sub(ring.one(), tv.row[0]), tw.row[0]);
    let terms: Vec<(Elem, &[Elem])> = tv.row[1..]
        .iter()
        .chain(&tw.row[1..])
        .map(|&x| (x, all.as_slice()))
        .collect();
    let xy = ring
        .solve_combination(target, &terms)
        .ok_or_else(|| exhausted("heads cannot be made to sum to one", ring, v, w))?;
    for i in 1..n {
        tv.elem(i, 0, xy[i - 1]);
        tw.elem(i, 0, xy[n - 2 + i]);
    }
    // With x + y = 1, move both tails to a + (b − a)x.
    let (av, bw) = (tv.row.clone(), tw.row.clone());
    for i in 1..n {
        tv.elem(0, i, ring.sub(bw[i], av[i]));
        tw.elem(0, i, ring.sub(av[i], bw[i]));
    }
    Ok((tv, tw))
}

fn relative_first<'a>(
    ring: &'a FiniteRing,
    ideal: &IdealHandle,
    v: &[Elem],
    w: &[Elem],
) -> Result<(Track<'a>, Track<'a>)> {
    let n = v.len();
    let mut tv = Track::new(ring, v);
    let mut tw = Track::new(ring, w);
    let im = ideal.members();
    // Comaximal heads x, y using I-combinations of the tails.
    let rx = reachable(ring, &v[1..], im);
    let ry = reachable(ring, &w[1..], im);
    let pick = ring
        .elements()
        .filter(|&s| rx[s as usize])
        .find_map(|sx| {
            let x = ring.add(v[0], sx);
            ring.elements()
                .filter(|&s| ry[s as usize])
                .find(|&sy| ring.is_unimodular(&[x, ring.add(w[0], sy)]))
                .map(|sy| (sx, sy))
        })
        .ok_or_else(|| exhausted("no comaximal heads", ring, v, w))?;
    let tv_terms: Vec<(Elem, &[Elem])> = v[1..].iter().map(|&x| (x, im)).collect();
    let tw_terms: Vec<(Elem, &[Elem])> = w[1..].iter().map(|&x| (x, im)).collect();
    let r = ring.solve_combination(pick.0, &tv_terms).expect("sum is reachable");
    let s = ring.solve_combination(pick.1, &tw_terms).expect("sum is reachable");
    for i in 1..n {
        tv.elem(i, 0, r[i - 1]);
        tw.elem(i, 0, s[i - 1]);
    }
    let (x, y) = (tv.row[0], tw.row[0]);
    let all: Vec<Elem> = ring.elements().collect();
    let pq = ring
        .solve_combination(ring.one(), &[(x, &all), (y, &all)])
        .expect("comaximal pair");
    let (p, q) = (pq[0], pq[1]);
    let (av, bw) = (tv.row.clone(), tw.row.clone());
    for i in 1..n {
        let d = ring.sub(bw[i], av[i]);
        tv.elem(0, i, ring.mul(d, p));
        tw.elem(0, i, ring.neg(ring.mul(d, q)));
    }
    Ok((tv, tw))
}

/// Add multiples of `t` to the first `n − 1` coordinates of both rows so
/// that their heads become comaximal. `t = v_n w_n`; the moves are
/// `E_ni(c_i w_n)` on `v` and `E_ni(d_i v_n)` on `w`.
fn comaximal_heads(tv: &mut Track, tw: &mut Track, v0: &[Elem], w0: &[Elem]) -> Result<()> {
    let ring = tv.ring;
    let n = tv.n;
    let (an, bn) = (tv.row[n - 1], tw.row[n - 1]);
    let t = ring.mul(an, bn);
    let mut base = tv.row[..n - 1].to_vec();
    base.extend_from_slice(&tw.row[..n - 1]);
    let c = shift_search(ring, &base, t).ok_or_else(|| exhausted("no comaximal heads", ring, v0, w0))?;
    for i in 0..n - 1 {
        tv.elem(n - 1, i, ring.mul(c[i], bn));
        tw.elem(n - 1, i, ring.mul(c[n - 1 + i], an));
    }
    Ok(())
}

/// The relative word sending `u = (1 + i₁, i₂, …, i_n)` to `u E_n1(1)`.
fn last_into_first(ring: &FiniteRing, u: &[Elem]) -> Result<Vec<Elem>> {
    let n = u.len();
    let i1 = ring.sub(u[0], ring.one());
    let i2 = u[1];
    let i_n = u[n - 1];
    let mut m = Mat::identity(ring, n).entries;
    let word = [
        ElemGen::new(0, 1, i_n),
        ElemGen::new(n - 1, 1, ring.neg(i1)),
        ElemGen::new(1, 0, ring.one()),
        ElemGen::new(0, 1, ring.neg(i_n)),
        ElemGen::new(n - 1, 1, ring.sum([i1, i2, i_n])),
        ElemGen::new(1, 0, ring.neg(ring.one())),
    ];
    for g in word {
        g.mul_right(ring, n, &mut m);
    }
    let mut expect = u.to_vec();
    ElemGen::new(n - 1, 0, ring.one()).act_row(ring, &mut expect);
    if row_times(ring, n, u, &m) != expect {
        return Err(Error::Verification(format!(
            "relative word does not add the last coordinate to the first for {}",
            ring.format_row(u)
        )));
    }
    Ok(m)
}

fn relative_last<'a>(
    ring: &'a FiniteRing,
    ideal: &IdealHandle,
    v: &[Elem],
    w: &[Elem],
) -> Result<(Track<'a>, Track<'a>)> {
    let n = v.len();
    let last = n - 1;
    let im = ideal.members();
    let mut tv = Track::new(ring, v);
    let mut tw = Track::new(ring, w);

    comaximal_heads(&mut tv, &mut tw, v, w)?;

    // Make b_n − a_n = a₁ − b₁ with I-combinations of the heads.
    let target = ring.sum([
        tv.row[0],
        ring.neg(tw.row[0]),
        ring.neg(tw.row[last]),
        tv.row[last],
    ]);
    let neg_heads: Vec<Elem> = tv.row[..last].iter().map(|&x| ring.neg(x)).collect();
    let terms: Vec<(Elem, &[Elem])> = tw.row[..last]
        .iter()
        .chain(&neg_heads)
        .map(|&x| (x, im))
        .collect();
    let yx = ring
        .solve_combination(target, &terms)
        .ok_or_else(|| exhausted("last coordinates cannot be balanced", ring, v, w))?;
    for i in 0..last {
        tw.elem(i, last, yx[i]);
        tv.elem(i, last, yx[last + i]);
    }

    // Add the last coordinate to the first, by relative moves.
    let m = last_into_first(ring, &tv.row)?;
    tv.mat(&m);
    let m = last_into_first(ring, &tw.row)?;
    tw.mat(&m);
    if tv.row[0] != tw.row[0] {
        return Err(Error::Verification("first coordinates differ after balancing".into()));
    }

    // a₁ = 1 − λ; scale the remaining coordinates by λ².
    let lambda = ring.sub(ring.one(), tv.row[0]);
    let one_plus = ring.add(ring.one(), lambda);
    for t in [&mut tv, &mut tw] {
        for i in 1..n {
            let x = ring.neg(ring.mul(one_plus, t.row[i]));
            t.elem(0, i, x);
        }
    }

    comaximal_heads(&mut tv, &mut tw, v, w)?;

    // Make a'_n + b'_n = λ.
    let target = ring.sub(ring.sub(lambda, tv.row[last]), tw.row[last]);
    let terms: Vec<(Elem, &[Elem])> = tv.row[..last]
        .iter()
        .chain(&tw.row[..last])
        .map(|&x| (x, im))
        .collect();
    let xy = ring
        .solve_combination(target, &terms)
        .ok_or_else(|| exhausted("last coordinates cannot sum to λ", ring, v, w))?;
    for i in 0..last {
        tv.elem(i, last, xy[i]);
        tw.elem(i, last, xy[last + i]);
    }

    // Heads differ by multiples of λ²; absorb them with λ-multiples of the
    // last coordinates.
    let l2 = ring.mul(lambda, lambda);
    for i in 0..last {
        let diff = ring.sub(tv.row[i], tw.row[i]);
        let c = ring
            .elements()
            .find(|&c| ring.mul(c, l2) == diff)
            .ok_or_else(|| exhausted("head difference is not a multiple of λ²", ring, v, w))?;
        let cl = ring.mul(c, lambda);
        tv.elem(last, i, ring.neg(cl));
        tw.elem(last, i, cl);
    }
    Ok((tv, tw))
}

/// The quoted shape of the normalized pair.
pub fn mn_postcondition(ring: &FiniteRing, mode: MnMode, v: &[Elem], w: &[Elem]) -> bool {
    let n = v.len();
    match mode {
        MnMode::Absolute => v[1..] == w[1..] && ring.add(v[0], w[0]) == ring.one(),
        MnMode::RelativeFirst => v[1..] == w[1..],
        MnMode::RelativeLast => {
            v[..n - 1] == w[..n - 1] && ring.is_unit_mod(ring.add(v[n - 1], w[n - 1]), &v[..n - 1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{ideal_generate, make_ring, RingSpec};
    use crate::rows::enumerate_um;

    #[test]
    fn e1_pair_relative_last() {
        let r = make_ring(&RingSpec::zmod(4), 64).unwrap();
        let i = ideal_generate(&r, &[2]).unwrap();
        let e = [1, 0, 0];
        let out = mennicke_newman(&r, Some(&i), &e, &e, MnMode::RelativeLast).unwrap();
        assert_eq!(out.v, vec![1, 0, 0]);
        assert_eq!(out.w, vec![1, 0, 0]);
        assert!(mn_postcondition(&r, MnMode::RelativeLast, &out.v, &out.w));
    }

    #[test]
    fn all_modes_on_z8() {
        let r = make_ring(&RingSpec::zmod(8), 64).unwrap();
        let i = ideal_generate(&r, &[2]).unwrap();
        let rows = enumerate_um(&r, 3, Some(&i), 10_000).unwrap().rows;
        for a in &rows {
            for b in &rows {
                for mode in MnMode::ALL {
                    let out = mennicke_newman(&r, Some(&i), &a.entries, &b.entries, mode).unwrap();
                    assert!(mn_postcondition(&r, mode, &out.v, &out.w), "{mode:?} {a:?} {b:?}");
                    assert_eq!(out.eps1.row_action(&r, &a.entries).unwrap(), out.v);
                    assert_eq!(out.eps2.row_action(&r, &b.entries).unwrap(), out.w);
                    if mode.is_relative() {
                        assert!(out.eps1.is_congruent_identity(&r, |x| i.contains(x)));
                        assert!(out.eps2.is_congruent_identity(&r, |x| i.contains(x)));
                    }
                }
            }
        }
    }

    #[test]
    fn absolute_shared_pair() {
        let r = make_ring(&RingSpec::zmod(4), 64).unwrap();
        let v = [3, 2, 0];
        let out = mennicke_newman(&r, None, &v, &v, MnMode::Absolute).unwrap();
        assert_eq!(r.add(out.v[0], out.w[0]), 1);
        assert_eq!(out.v[1..], out.w[1..]);
    }
}
