//! Group structure on orbit spaces: the Vaserstein–van der Kallen product,
//! its table, niceness and the weak Mennicke relations.

pub mod mn;
pub mod theta;

use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use crate::group::{KeyCodec, MatGroup};
use crate::report::VerdictReport;
use crate::ring::{ideal_generate, Elem, FiniteRing, IdealHandle};
use crate::rows::{is_congruent_e1, OrbitSpace};
use crate::{Error, Result};

pub use mn::{mennicke_newman, mn_postcondition, MnMode, MnResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VvForm {
    One,
    Two,
}

/// Members of `(xs)`, as an ideal handle.
fn span(ring: &std::sync::Arc<FiniteRing>, xs: &[Elem]) -> IdealHandle {
    ideal_generate(ring, xs).expect("row entries are ring elements")
}

/// Every valid `p` for `v = (a, a₂, …)`: `a p ≡ 1 mod (a₂, …, a_n)`, in
/// increasing index order. On a relative space `p` is drawn from `1 + I`
/// so that the product row stays congruent to `e₁`.
pub fn valid_ps(space: &OrbitSpace, v: &[Elem]) -> Vec<Elem> {
    let ring = space.ring();
    let j = span(ring, &v[1..]);
    let ok = |p: Elem| j.contains(ring.sub(ring.mul(v[0], p), ring.one()));
    match space.ideal() {
        None => ring.elements().filter(|&p| ok(p)).collect(),
        Some(i) => i.one_plus().into_iter().filter(|&p| ok(p)).collect(),
    }
}

/// The least valid `p`.
pub fn choose_p(space: &OrbitSpace, v: &[Elem]) -> Result<Elem> {
    valid_ps(space, v)
        .first()
        .copied()
        .ok_or_else(|| Error::SearchExhausted(format!("no p for {}", space.ring().format_row(v))))
}

/// `(a(b + p) − 1, a₂(b + p), a₃, …)` for `v = (a, a₂, …)`, `w = (b, a₂, …)`.
pub fn vv_form1(ring: &FiniteRing, w: &[Elem], v: &[Elem], p: Elem) -> Vec<Elem> {
    let bp = ring.add(w[0], p);
    let mut out = v.to_vec();
    out[0] = ring.sub(ring.mul(v[0], bp), ring.one());
    out[1] = ring.mul(v[1], bp);
    out
}

/// `((b, a₂) α, a₃, …)` with `α = [[a, a₂], [c, d]]`, taking the least
/// `(c, d)` for which `det α` is a unit modulo `(a₃, …)`.
pub fn vv_form2(ring: &FiniteRing, w: &[Elem], v: &[Elem]) -> Result<Vec<Elem>> {
    let rest = &v[2..];
    for c in ring.elements() {
        for d in ring.elements() {
            let det = ring.sub(ring.mul(v[0], d), ring.mul(v[1], c));
            if ring.is_unit_mod(det, rest) {
                let mut out = v.to_vec();
                out[0] = ring.add(ring.mul(w[0], v[0]), ring.mul(v[1], c));
                out[1] = ring.add(ring.mul(w[0], v[1]), ring.mul(v[1], d));
                return Ok(out);
            }
        }
    }
    Err(Error::SearchExhausted(format!("no α for {}", ring.format_row(v))))
}

fn check_result_row(space: &OrbitSpace, row: &[Elem]) -> Result<usize> {
    let ring = space.ring();
    if !ring.is_unimodular(row) || space.ideal().is_some_and(|i| !is_congruent_e1(i, row)) {
        return Err(Error::Verification(format!(
            "Vv product row {} left the row set",
            ring.format_row(row)
        )));
    }
    space.class_of(row)
}

/// Bring `(w, v)` to a common tail by Mennicke–Newman moves, inside the
/// acting group of the space.
pub fn common_tail(space: &OrbitSpace, w: &[Elem], v: &[Elem]) -> Result<(Vec<Elem>, Vec<Elem>)> {
    if w[1..] == v[1..] {
        return Ok((w.to_vec(), v.to_vec()));
    }
    let mode = if space.is_relative() { MnMode::RelativeFirst } else { MnMode::Absolute };
    let out = mennicke_newman(space.ring(), space.ideal(), v, w, mode)?;
    Ok((out.w, out.v))
}

/// All Vv evaluations for one representative pair.
#[derive(Clone, Debug)]
pub struct ProductSample {
    pub form1: usize,
    pub form2: usize,
    /// Form 1 with further valid `p`, beyond the least one.
    pub alternates: Vec<usize>,
    /// Valid `p` available beyond the least one.
    pub alternates_available: usize,
}

/// `[w] ⋆ [v]` from rows, evaluated with both forms and with up to
/// `max_alt` alternative choices of `p`.
pub fn product_sample(space: &OrbitSpace, w: &[Elem], v: &[Elem], max_alt: usize) -> Result<ProductSample> {
    let ring = space.ring();
    let (w, v) = common_tail(space, w, v)?;
    let ps = valid_ps(space, &v);
    let p = *ps
        .first()
        .ok_or_else(|| Error::SearchExhausted(format!("no p for {}", ring.format_row(&v))))?;
    let form1 = check_result_row(space, &vv_form1(ring, &w, &v, p))?;
    let form2 = check_result_row(space, &vv_form2(ring, &w, &v)?)?;
    let mut alternates = Vec::new();
    for &q in ps.iter().skip(1).take(max_alt) {
        alternates.push(check_result_row(space, &vv_form1(ring, &w, &v, q))?);
    }
    Ok(ProductSample {
        form1,
        form2,
        alternates,
        alternates_available: ps.len() - 1,
    })
}

/// `[w] ⋆ [v]` on class ids, from the canonical representatives.
pub fn vv_product(space: &OrbitSpace, cw: usize, cv: usize, form: VvForm) -> Result<usize> {
    let s = product_sample(space, space.rep(cw), space.rep(cv), 0)?;
    Ok(match form {
        VvForm::One => s.form1,
        VvForm::Two => s.form2,
    })
}

#[derive(Clone, Debug)]
pub struct GroupTable {
    /// `table[x][y] = x ⋆ y`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverse: Vec<Option<usize>>,
}

impl GroupTable {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn to_json(&self, space: &OrbitSpace) -> Value {
        let ring = space.ring();
        json!({
            "classes": (0..self.len()).map(|c| ring.row_json(space.rep(c))).collect::<Vec<_>>(),
            "identity": self.identity,
            "table": self.table,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TableOptions {
    /// Representatives sampled per class.
    pub reps_per_class: usize,
    /// Alternative `p` tried per product.
    pub alternates: usize,
    /// Known stable dimension, recorded against the bound `d ≤ 2n − 4`.
    pub stable_dimension: Option<usize>,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            reps_per_class: 5,
            alternates: 3,
            stable_dimension: None,
        }
    }
}

/// The Vv product table with exhaustive axiom checks.
///
/// Each cell is evaluated on every pair of sampled representatives, in
/// both forms and with alternative `p`; any disagreement is a failure.
pub fn group_table(space: &OrbitSpace, opts: TableOptions) -> Result<(GroupTable, VerdictReport)> {
    let ring = space.ring();
    let k = space.num_classes();
    let mut rep = VerdictReport::new(
        "group_table",
        json!({
            "ring_hash": ring.hash_hex(),
            "n": space.n(),
            "ideal": space.ideal().map(|i| i.label()),
            "reps_per_class": opts.reps_per_class,
            "alternates": opts.alternates,
        }),
    );
    let bound = (2 * space.n()).saturating_sub(4);
    rep.metric("stable_dimension_bound", bound as u64);
    match opts.stable_dimension {
        Some(d) => {
            rep.metric("stable_dimension", d as u64);
            if d > bound {
                rep.caveat(format!("stable dimension {d} exceeds the bound {bound}; checked regardless"));
            }
        }
        None => rep.caveat("stable dimension not supplied"),
    }
    let mut table = vec![vec![usize::MAX; k]; k];
    let (mut pairs, mut form_agree, mut alt_checked, mut min_alt, mut full_alt) = (0u64, 0u64, 0u64, u64::MAX, 0u64);
    for cw in 0..k {
        for cv in 0..k {
            for &iw in &space.sample_members(cw, opts.reps_per_class) {
                for &iv in &space.sample_members(cv, opts.reps_per_class) {
                    let (w, v) = (&space.row(iw).entries, &space.row(iv).entries);
                    let s = product_sample(space, w, v, opts.alternates)?;
                    pairs += 1;
                    if table[cw][cv] == usize::MAX {
                        table[cw][cv] = s.form1;
                    }
                    let cell = table[cw][cv];
                    rep.check(s.form1 == cell, || json!({"issue": "representative dependence", "w": ring.row_json(w), "v": ring.row_json(v)}));
                    form_agree += (s.form2 == s.form1) as u64;
                    rep.check(s.form2 == s.form1, || json!({"issue": "forms disagree", "w": ring.row_json(w), "v": ring.row_json(v)}));
                    alt_checked += s.alternates.len() as u64;
                    full_alt += (s.alternates.len() >= opts.alternates) as u64;
                    min_alt = min_alt.min(s.alternates_available as u64);
                    for &a in &s.alternates {
                        rep.check(a == s.form1, || json!({"issue": "p dependence", "w": ring.row_json(w), "v": ring.row_json(v)}));
                    }
                }
            }
        }
    }
    rep.metric("classes", k as u64);
    rep.metric("representative_pairs", pairs);
    rep.metric("form_agreements", form_agree);
    rep.metric("p_alternates_checked", alt_checked);
    rep.metric("p_alternates_min_available", if pairs == 0 { 0 } else { min_alt });
    rep.metric("products_with_full_alternates", full_alt);
    let identity = space.e1_class();
    let axioms = check_axioms(&table, identity);
    for (name, witness) in &axioms.failures {
        rep.fail(json!({"axiom": name, "witness": witness}));
    }
    rep.metric("associative", axioms.associative);
    rep.metric("commutative", axioms.commutative);
    rep.metric("identity_ok", axioms.identity);
    rep.metric("inverses_ok", axioms.inverses);
    Ok((
        GroupTable {
            table,
            identity,
            inverse: axioms.inverse,
        },
        rep,
    ))
}

struct Axioms {
    associative: bool,
    commutative: bool,
    identity: bool,
    inverses: bool,
    inverse: Vec<Option<usize>>,
    failures: Vec<(&'static str, Value)>,
}

fn check_axioms(t: &[Vec<usize>], e: usize) -> Axioms {
    let k = t.len();
    let mut failures = Vec::new();
    let mut associative = true;
    'a: for x in 0..k {
        for y in 0..k {
            for z in 0..k {
                if t[t[x][y]][z] != t[x][t[y][z]] {
                    associative = false;
                    failures.push(("associativity", json!([x, y, z])));
                    break 'a;
                }
            }
        }
    }
    let commutative = (0..k).all(|x| (0..k).all(|y| t[x][y] == t[y][x]));
    if !commutative {
        failures.push(("commutativity", json!(null)));
    }
    let identity = (0..k).all(|x| t[e][x] == x && t[x][e] == x);
    if !identity {
        failures.push(("identity", json!(e)));
    }
    let inverse: Vec<Option<usize>> = (0..k).map(|x| (0..k).find(|&y| t[x][y] == e && t[y][x] == e)).collect();
    let inverses = inverse.iter().all(Option::is_some);
    if !inverses {
        failures.push(("inverses", json!(null)));
    }
    Axioms {
        associative,
        commutative,
        identity,
        inverses,
        inverse,
        failures,
    }
}

/// Rows grouped by all coordinates except `coord`.
fn pairs_by_coordinate(space: &OrbitSpace, coord: usize) -> Vec<Vec<usize>> {
    let ring = space.ring();
    let codec = KeyCodec::with_len(ring.size(), space.n()).expect("rows fit a key");
    let mut groups: FxHashMap<u64, Vec<usize>> = FxHashMap::default();
    let mut order = Vec::new();
    for (i, r) in space.rows().iter().enumerate() {
        let mut v = r.entries.clone();
        v[coord] = 0;
        let k = codec.encode(&v);
        groups
            .entry(k)
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(i);
    }
    order.into_iter().map(|k| groups.remove(&k).unwrap()).collect()
}

/// Coordinate-wise multiplication in position `coord` (0-based) agrees with
/// the table on every pair of rows differing only there.
pub fn niceness_check(space: &OrbitSpace, table: &GroupTable, coord: usize) -> VerdictReport {
    let ring = space.ring();
    let mut rep = VerdictReport::new(
        "niceness",
        json!({"ring_hash": ring.hash_hex(), "n": space.n(), "ideal": space.ideal().map(|i| i.label()), "coordinate": coord + 1}),
    );
    let (mut checked, mut not_unimodular) = (0u64, 0u64);
    for group in pairs_by_coordinate(space, coord) {
        for &iw in &group {
            for &iv in &group {
                let (w, v) = (&space.row(iw).entries, &space.row(iv).entries);
                let mut prod = v.clone();
                prod[coord] = ring.mul(w[coord], v[coord]);
                if !ring.is_unimodular(&prod) {
                    not_unimodular += 1;
                    continue;
                }
                checked += 1;
                let expect = table.mul(space.class_of_index(iw), space.class_of_index(iv));
                match space.class_of(&prod) {
                    Ok(c) => rep.check(c == expect, || json!({"w": ring.row_json(w), "v": ring.row_json(v)})),
                    Err(_) => rep.fail(json!({"w": ring.row_json(w), "v": ring.row_json(v), "issue": "product row missing"})),
                }
            }
        }
    }
    rep.metric("pairs_checked", checked);
    rep.metric("pairs_not_unimodular", not_unimodular);
    rep
}

/// Niceness in every coordinate, and whether the verdicts agree.
pub fn niceness_all(space: &OrbitSpace, table: &GroupTable) -> (Vec<VerdictReport>, VerdictReport) {
    let per: Vec<VerdictReport> = (0..space.n()).map(|c| niceness_check(space, table, c)).collect();
    let verdicts: Vec<bool> = per.iter().map(VerdictReport::passed).collect();
    let mut summary = VerdictReport::new(
        "niceness_coherence",
        json!({"ring_hash": space.ring().hash_hex(), "n": space.n(), "ideal": space.ideal().map(|i| i.label())}),
    );
    summary.check(verdicts.windows(2).all(|w| w[0] == w[1]), || json!({"verdicts": verdicts}));
    summary.metric("nice", verdicts.iter().all(|&b| b));
    summary.metric("verdicts", json!(verdicts));
    (per, summary)
}

/// The weak Mennicke relation and van der Kallen's product identity,
/// exhaustively against the table of an absolute space.
pub fn wms_relation_check(space: &OrbitSpace, table: &GroupTable) -> Result<VerdictReport> {
    let ring = space.ring();
    let mut rep = VerdictReport::new("wms_relations", json!({"ring_hash": ring.hash_hex(), "n": space.n()}));
    if space.is_relative() {
        return Ok(rep.skip("relations are stated for absolute orbit spaces"));
    }
    let one = ring.one();
    let (mut relations, mut products) = (0u64, 0u64);
    for group in pairs_by_coordinate(space, 0) {
        let tail = space.row(group[0]).entries[1..].to_vec();
        let j = span(ring, &tail);
        let row_with = |x: Elem| {
            let mut v = vec![x];
            v.extend_from_slice(&tail);
            v
        };
        let heads: Vec<Elem> = group.iter().map(|&i| space.row(i).entries[0]).collect();
        for &q in &heads {
            let q1 = ring.add(one, q);
            let Ok(c1) = space.class_of(&row_with(q1)) else { continue };
            let cq = space.class_of(&row_with(q))?;
            for r in ring.elements() {
                if !j.contains(ring.sub(ring.mul(r, q1), q)) {
                    continue;
                }
                relations += 1;
                match space.class_of(&row_with(r)) {
                    Ok(cr) => rep.check(table.mul(cr, c1) == cq, || json!({"q": ring.format(q), "r": ring.format(r), "tail": ring.row_json(&tail)})),
                    Err(_) => rep.fail(json!({"q": ring.format(q), "r": ring.format(r), "issue": "(r, tail) not unimodular"})),
                }
            }
        }
        for &a in &heads {
            let v = row_with(a);
            let Some(&p) = valid_ps(space, &v).first() else {
                rep.fail(json!({"issue": "no p", "v": ring.row_json(&v)}));
                continue;
            };
            let cv = space.class_of(&v)?;
            for &b in &heads {
                let w = row_with(b);
                products += 1;
                let c = check_result_row(space, &vv_form1(ring, &w, &v, p))?;
                rep.check(c == table.mul(space.class_of(&w)?, cv), || json!({"v": ring.row_json(&v), "w": ring.row_json(&w)}));
            }
        }
    }
    rep.metric("relations_checked", relations);
    rep.metric("products_checked", products);
    Ok(rep)
}

/// Every pair of rows of the space under every applicable normalization
/// mode: termination, the quoted shape, `vε = v'` and membership of the
/// `ε` in `E_n(R)` or `E_n(R, I)`.
pub fn mn_check(space: &OrbitSpace, absolute: &MatGroup, relative: Option<&MatGroup>) -> VerdictReport {
    let ring = space.ring();
    let modes: &[MnMode] = if space.is_relative() { &MnMode::ALL } else { &[MnMode::Absolute] };
    let mut rep = VerdictReport::new(
        "mennicke_newman",
        json!({
            "ring_hash": ring.hash_hex(),
            "n": space.n(),
            "ideal": space.ideal().map(|i| i.label()),
            "modes": modes.iter().map(|m| m.name()).collect::<Vec<_>>(),
        }),
    );
    rep.caveat(format!("stable dimension hypothesis d ≤ {} recorded, not enforced", (2 * space.n()).saturating_sub(3)));
    let mut runs = 0u64;
    for &mode in modes {
        let group = if mode.is_relative() {
            match relative {
                Some(g) => g,
                None => {
                    rep.fail(json!({"mode": mode.name(), "issue": "relative group not supplied"}));
                    continue;
                }
            }
        } else {
            absolute
        };
        for a in space.rows() {
            for b in space.rows() {
                runs += 1;
                let (v, w) = (&a.entries, &b.entries);
                let witness = |issue: &str| json!({"mode": mode.name(), "v": ring.row_json(v), "w": ring.row_json(w), "issue": issue});
                let out = match mennicke_newman(ring, space.ideal(), v, w, mode) {
                    Ok(o) => o,
                    Err(e) => {
                        rep.fail(witness(&e.to_string()));
                        continue;
                    }
                };
                rep.check(mn_postcondition(ring, mode, &out.v, &out.w), || witness("postcondition"));
                let moved = out.eps1.row_action(ring, v).ok() == Some(out.v.clone())
                    && out.eps2.row_action(ring, w).ok() == Some(out.w.clone());
                rep.check(moved, || witness("ε does not carry the rows"));
                rep.check(group.contains(&out.eps1) && group.contains(&out.eps2), || witness("ε outside the elementary group"));
            }
        }
    }
    rep.metric("normalizations", runs);
    rep.metric("absolute_group_order", absolute.len() as u64);
    if let Some(g) = relative {
        rep.metric("relative_group_order", g.len() as u64);
    }
    rep
}
