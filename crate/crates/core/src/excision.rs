//! Maps between orbit spaces induced by ring maps, the excision chain on
//! finite models, retract lemmas and the relative niceness criterion.
//!
//! The integers are modelled by `Z/k` with `k` a multiple of the
//! characteristic; every report carries `k` so that a model verdict is
//! never read as a statement about `Z ⊕ I`.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::calculus::{group_table, niceness_all, GroupTable, TableOptions};
use crate::cache::GroupStore;
use crate::group::{congruence_counts, RelMethod};
use crate::report::VerdictReport;
use crate::ring::{
    excision_ring, quotient_ring, zmodel_excision, Elem, ExcisionRing, FiniteRing, IdealHandle, QuotientRing, RingHom,
    ZModel,
};
use crate::rows::{orbit_space, OrbitSpace};
use crate::{Budgets, Error, Result};

/// Quotients up to this size are searched for a section.
pub const SECTION_SEARCH_LIMIT: usize = 8;
/// Direct `E_n(B)` closures are attempted up to this size.
const DIRECT_LIMIT: usize = 2_000_000;

/// A class-level map between orbit spaces.
#[derive(Clone, Debug)]
pub struct OrbitMap {
    pub name: String,
    /// Target class of each source class, `None` where no member mapped.
    pub table: Vec<Option<usize>>,
    pub well_defined: bool,
    pub injective: bool,
    pub surjective: bool,
}

impl OrbitMap {
    pub fn is_bijection(&self) -> bool {
        self.well_defined && self.injective && self.surjective
    }

    pub fn to_json(&self) -> Value {
        json!({
            "map": self.name,
            "table": self.table,
            "well_defined": self.well_defined,
            "injective": self.injective,
            "surjective": self.surjective,
        })
    }
}

/// The map `[(a_i)] ↦ [(f(a_i))]`, checked on every member of every class.
pub fn induced_orbit_map(
    name: &str,
    src: &OrbitSpace,
    dst: &OrbitSpace,
    f: impl Fn(Elem) -> Elem,
) -> (OrbitMap, VerdictReport) {
    let (sr, dr) = (src.ring(), dst.ring());
    let mut rep = VerdictReport::new(
        "induced_orbit_map",
        json!({"map": name, "source_ring": sr.hash_hex(), "target_ring": dr.hash_hex(), "n": src.n()}),
    );
    let mut table: Vec<Option<usize>> = vec![None; src.num_classes()];
    let mut well_defined = true;
    for (i, row) in src.rows().iter().enumerate() {
        let image: Vec<Elem> = row.entries.iter().map(|&x| f(x)).collect();
        let c = src.class_of_index(i);
        match dst.class_of(&image) {
            Ok(t) => match table[c] {
                None => table[c] = Some(t),
                Some(prev) if prev != t => {
                    well_defined = false;
                    rep.fail(json!({"issue": "class splits", "row": sr.row_json(&row.entries)}));
                }
                Some(_) => {}
            },
            Err(_) => {
                well_defined = false;
                rep.fail(json!({"issue": "image outside target", "row": sr.row_json(&row.entries), "image": dr.row_json(&image)}));
            }
        }
    }
    let mut hit = vec![0usize; dst.num_classes()];
    for t in table.iter().flatten() {
        hit[*t] += 1;
    }
    let injective = well_defined && hit.iter().all(|&h| h <= 1);
    let surjective = hit.iter().all(|&h| h >= 1);
    rep.metric("source_classes", src.num_classes() as u64);
    rep.metric("target_classes", dst.num_classes() as u64);
    rep.metric("injective", injective);
    rep.metric("surjective", surjective);
    (
        OrbitMap {
            name: name.to_string(),
            table,
            well_defined,
            injective,
            surjective,
        },
        rep,
    )
}

fn base_params(base: &FiniteRing, ideal: &IdealHandle, n: usize) -> Value {
    json!({"ring_hash": base.hash_hex(), "ideal": ideal.label(), "n": n})
}

fn relative_space(ring: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize, b: &Budgets) -> Result<OrbitSpace> {
    orbit_space(ring, n, Some(ideal), None, b.elements)
}

fn absolute_space(ring: &Arc<FiniteRing>, n: usize, b: &Budgets) -> Result<OrbitSpace> {
    orbit_space(ring, n, None, None, b.elements)
}

/// `π(x ⋆ y) = π(x) ⋆ π(y)` on every pair of classes.
fn is_homomorphism(map: &OrbitMap, src: &GroupTable, dst: &GroupTable) -> bool {
    let k = src.len();
    (0..k).all(|x| {
        (0..k).all(|y| match (map.table[src.mul(x, y)], map.table[x], map.table[y]) {
            (Some(xy), Some(a), Some(b)) => xy == dst.mul(a, b),
            _ => false,
        })
    })
}

/// Every map in the double excision chain
///
/// `MSE(R⊕I, 0⊕I) ← MSE(Zk⊕J, J) → MSE(Zk⊕J) ≅ MSE(Zk⊕I) ← MSE(Zk⊕I, 0⊕I) → MSE(R, I)`
///
/// with `J = 0 ⊕ I`, plus `π₂ : MSE(R⊕I, 0⊕I) → MSE(R, I)`, each a verified
/// bijection, and `π₂` a homomorphism of the Vv group tables.
pub fn double_excision_check(base: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize, k: u64, b: &Budgets) -> Result<VerdictReport> {
    let mut params = base_params(base, ideal, n);
    params["k"] = json!(k);
    let mut rep = VerdictReport::new("double_excision", params);
    rep.caveat(format!("Z is modelled by Z/{k}"));
    if n < 3 {
        return Ok(rep.skip("the chain is stated for n ≥ 3"));
    }
    let ex = excision_ring(base, ideal, b.ring())?;
    let zj = zmodel_excision(&ex.ideal, k, b.ring())?;
    let zi = zmodel_excision(ideal, k, b.ring())?;
    // Both models number (m, i) as m·|I| + position of i, so φ is the
    // identity on indices; RingHom verifies it is a ring map.
    let phi = RingHom::from_fn(&zj.ring, &zi.ring, |x| x)?;
    rep.check(phi.is_bijective(), || json!({"issue": "φ is not bijective"}));
    let section_ok = base.elements().all(|a| ex.proj.apply(ex.section.apply(a)) == a);
    rep.check(section_ok, || json!({"issue": "proj ∘ section ≠ id"}));

    let s1 = relative_space(&ex.ring, &ex.ideal, n, b)?;
    let s2 = relative_space(&zj.ring, &zj.ideal, n, b)?;
    let s3 = absolute_space(&zj.ring, n, b)?;
    let s4 = absolute_space(&zi.ring, n, b)?;
    let s5 = relative_space(&zi.ring, &zi.ideal, n, b)?;
    let s6 = relative_space(base, ideal, n, b)?;
    let spaces = [&s1, &s2, &s3, &s4, &s5, &s6];
    rep.metric("space_sizes", json!(spaces.iter().map(|s| s.num_classes()).collect::<Vec<_>>()));
    rep.metric("space_rows", json!(spaces.iter().map(|s| s.rows().len()).collect::<Vec<_>>()));

    let maps = [
        induced_orbit_map("F1", &s2, &s1, |x| zj.fbar.apply(x)),
        induced_orbit_map("G1", &s2, &s3, |x| x),
        induced_orbit_map("phi", &s3, &s4, |x| phi.apply(x)),
        induced_orbit_map("G2", &s5, &s4, |x| x),
        induced_orbit_map("F2", &s5, &s6, |x| zi.fbar.apply(x)),
        induced_orbit_map("pi2", &s1, &s6, |x| ex.pi2.apply(x)),
    ];
    let mut summary = Vec::new();
    for (m, sub) in &maps {
        for w in &sub.witnesses {
            rep.fail(json!({"map": m.name, "witness": w}));
        }
        rep.check(m.is_bijection(), || json!({"map": m.name, "issue": "not a bijection"}));
        summary.push(m.to_json());
    }
    rep.metric("maps", Value::Array(summary));

    let (t1, r1) = group_table(&s1, TableOptions::default())?;
    let (t6, r6) = group_table(&s6, TableOptions::default())?;
    rep.check(r1.passed() && r6.passed(), || json!({"issue": "group tables failed their axioms"}));
    let pi2 = &maps[5].0;
    let hom = pi2.well_defined && is_homomorphism(pi2, &t1, &t6);
    rep.check(hom, || json!({"issue": "π₂ is not a homomorphism"}));
    rep.metric("pi2_homomorphism", hom);
    Ok(rep)
}

/// `π ∘ γ = id` and `π` onto.
pub fn retract_check(pi: &RingHom, section: &RingHom) -> VerdictReport {
    let d = pi.target();
    let mut rep = VerdictReport::new(
        "retract",
        json!({"source_ring": pi.source().hash_hex(), "target_ring": d.hash_hex()}),
    );
    if section.source().hash() != d.hash() || section.target().hash() != pi.source().hash() {
        rep.fail(json!({"issue": "section has the wrong shape"}));
        return rep;
    }
    for x in d.elements() {
        let y = pi.apply(section.apply(x));
        rep.check(y == x, || json!({"x": d.format(x), "image": d.format(y)}));
    }
    rep.check(pi.is_surjective(), || json!({"issue": "not onto"}));
    rep
}

/// `E_n(B, J) = E_n(B) ∩ SL_n(B, J)` for `B = R ⊕ I`, `J = 0 ⊕ I` and the
/// retract `(a, i) ↦ a`.
///
/// `E_n(B, J)` lies in both sides by construction. When it is as large
/// as `SL_n(B, J)` the equality follows from the sandwich
/// `E_n(B, J) ⊆ E_n(B) ∩ SL_n(B, J) ⊆ SL_n(B, J)`; otherwise, and whenever
/// `E_n(B)` is small, the intersection is computed directly.
pub fn suslin_retract_check(ex: &ExcisionRing, n: usize, b: &Budgets, store: &GroupStore) -> Result<VerdictReport> {
    let ring = &ex.ring;
    let j = &ex.ideal;
    let mut rep = VerdictReport::new(
        "suslin_retract",
        json!({"ring_hash": ring.hash_hex(), "ideal": j.label(), "n": n}),
    );
    let retract = retract_check(&ex.proj, &ex.section);
    for w in &retract.witnesses {
        rep.fail(w.clone());
    }
    let kernel: Vec<Elem> = ring.elements().filter(|&x| ex.proj.apply(x) == 0).collect();
    rep.check(kernel == j.members(), || json!({"issue": "J is not the kernel"}));

    let e_rel = store.relative(j, n, RelMethod::NormalClosure, b.group)?;
    let one = ring.one();
    let congruent = e_rel.all_congruent(j) && e_rel.iter().all(|m| m.det(ring) == one);
    rep.check(congruent, || json!({"issue": "E_n(B, J) leaves SL_n(B, J)"}));
    let (sl, _) = congruence_counts(j, n, 16 * b.group as u64)?;
    rep.metric("relative_order", e_rel.len() as u64);
    rep.metric("congruence_order", sl);

    let direct = match store.elementary(ring, n, b.group.min(DIRECT_LIMIT)) {
        Ok(e) => Some(e),
        Err(Error::Budget { .. }) => None,
        Err(e) => return Err(e),
    };
    match direct {
        Some(e) => {
            let inter = e.filter("E_n(B) ∩ SL_n(B, J)", |m| m.is_congruent_identity(ring, |x| j.contains(x)))?;
            rep.metric("method", "direct");
            rep.metric("absolute_order", e.len() as u64);
            rep.metric("intersection_order", inter.len() as u64);
            rep.check(inter.same_elements(&e_rel), || json!({"issue": "sets differ", "relative": e_rel.len(), "intersection": inter.len()}));
        }
        None if e_rel.len() as u64 == sl => {
            rep.metric("method", "sandwich");
            rep.metric("intersection_order", sl);
        }
        None => {
            return Err(Error::Budget {
                what: "E_n(B) for the retract intersection",
                limit: b.group.min(DIRECT_LIMIT) as u64,
                reached: b.group.min(DIRECT_LIMIT) as u64,
            })
        }
    }
    Ok(rep)
}

/// Ring sections `R/I → R` of the quotient map, by search over the fibres.
pub fn find_section(base: &Arc<FiniteRing>, q: &QuotientRing) -> Result<Option<RingHom>> {
    let d = &q.ring;
    if d.size() > SECTION_SEARCH_LIMIT {
        return Ok(None);
    }
    let mut fibres: Vec<Vec<Elem>> = vec![Vec::new(); d.size()];
    for x in base.elements() {
        fibres[q.q.apply(x) as usize].push(x);
    }
    let mut choice = vec![0usize; d.size()];
    loop {
        let map: Vec<Elem> = choice.iter().enumerate().map(|(c, &i)| fibres[c][i]).collect();
        let plausible = map[d.zero() as usize] == 0 && map[d.one() as usize] == base.one();
        if plausible {
            if let Ok(h) = RingHom::new(d.clone(), base.clone(), map) {
                return Ok(Some(h));
            }
        }
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(None);
            }
            choice[pos] += 1;
            if choice[pos] < fibres[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Rows of `Um_n(R, I)` trivial in `MSE_n(R)` are trivial in `MSE_n(R, I)`
/// whenever `R → R/I` is a retract.
pub fn lemma_l_check(base: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize, b: &Budgets) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new("lemma_l", base_params(base, ideal, n));
    if n < 3 {
        return Ok(rep.skip("stated for n ≥ 3"));
    }
    if ideal.is_whole() {
        rep.caveat("I = R: relative and absolute spaces coincide, so the statement is a tautology");
    } else {
        let q = quotient_ring(base, ideal)?;
        if q.ring.size() > SECTION_SEARCH_LIMIT {
            return Ok(rep.skip("no retract found: quotient too large to search"));
        }
        match find_section(base, &q)? {
            Some(s) => {
                let r = retract_check(&q.q, &s);
                rep.check(r.passed(), || json!({"issue": "section check failed"}));
                rep.metric("section", json!(s.table().iter().map(|&x| base.format(x)).collect::<Vec<_>>()));
            }
            None => return Ok(rep.skip("no retract found")),
        }
    }
    let abs = absolute_space(base, n, b)?;
    let rel = relative_space(base, ideal, n, b)?;
    let (mut checked, mut trivial) = (0u64, 0u64);
    for (i, row) in rel.rows().iter().enumerate() {
        checked += 1;
        if abs.class_of(&row.entries)? != abs.e1_class() {
            continue;
        }
        trivial += 1;
        rep.check(rel.class_of_index(i) == rel.e1_class(), || base.row_json(&row.entries));
    }
    rep.metric("rows_checked", checked);
    rep.metric("rows_trivial_absolutely", trivial);
    Ok(rep)
}

fn nice(space: &OrbitSpace) -> Result<(bool, bool)> {
    let (table, axioms) = group_table(space, TableOptions::default())?;
    let (_, summary) = niceness_all(space, &table);
    let nice = summary.metrics.get("nice").and_then(Value::as_bool).unwrap_or(false);
    Ok((nice, axioms.passed()))
}

/// If `MSE_n(R ⊕ I)` is nice then so is `MSE_n(R, I)`; both verdicts are
/// reported. Also checks that `MSE_n(R⊕I, 0⊕I) → MSE_n(R⊕I)` is
/// injective, the step the implication rests on.
pub fn relative_niceness_criterion_check(base: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize, b: &Budgets) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new("relative_niceness_criterion", base_params(base, ideal, n));
    if n < 3 {
        return Ok(rep.skip("stated for n ≥ 3"));
    }
    let ex = excision_ring(base, ideal, b.ring())?;
    let sb = absolute_space(&ex.ring, n, b)?;
    let sbj = relative_space(&ex.ring, &ex.ideal, n, b)?;
    let sr = relative_space(base, ideal, n, b)?;
    let (nice_b, ok_b) = nice(&sb)?;
    let (nice_r, ok_r) = nice(&sr)?;
    rep.check(ok_b && ok_r, || json!({"issue": "group tables failed their axioms"}));
    rep.metric("nice_excision_ring", nice_b);
    rep.metric("nice_relative", nice_r);
    rep.check(!nice_b || nice_r, || json!({"issue": "implication fails"}));
    let (incl, _) = induced_orbit_map("inclusion", &sbj, &sb, |x| x);
    rep.metric("inclusion_injective", incl.injective);
    rep.check(incl.well_defined && incl.injective, || json!({"issue": "relative to absolute map not injective"}));
    Ok(rep)
}

fn model_to_excision(zi: &ZModel, ex: &ExcisionRing, ideal: &IdealHandle) -> Result<RingHom> {
    let base = ideal.ring();
    let m = ideal.len();
    RingHom::from_fn(&zi.ring, &ex.ring, |x| {
        let (k, pos) = (x as usize / m, x as usize % m);
        (base.int(k as i64) as usize * m + pos) as Elem
    })
}

/// Exploratory evidence on whether `MSE_n(Z⊕I) → MSE_n(R⊕I)`
/// is injective, on the model `Z/k`.
pub fn experiment_q1(base: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize, k: u64, b: &Budgets) -> Result<VerdictReport> {
    let mut params = base_params(base, ideal, n);
    params["k"] = json!(k);
    let mut rep = VerdictReport::new("experiment_q1_injectivity", params);
    rep.caveat(format!("evidence on the finite model Z/{k}; the question is not resolved by it"));
    let ex = excision_ring(base, ideal, b.ring())?;
    let zi = zmodel_excision(ideal, k, b.ring())?;
    let h = model_to_excision(&zi, &ex, ideal)?;
    let src = absolute_space(&zi.ring, n, b)?;
    let dst = absolute_space(&ex.ring, n, b)?;
    let (m, sub) = induced_orbit_map("model_to_excision", &src, &dst, |x| h.apply(x));
    for w in sub.witnesses {
        rep.fail(w);
    }
    rep.metric("source_classes", src.num_classes() as u64);
    rep.metric("target_classes", dst.num_classes() as u64);
    rep.metric("injective", m.injective);
    rep.check(m.injective, || json!({"issue": "not injective on this model"}));
    Ok(rep)
}

/// Exploratory evidence on whether niceness of
/// `MSE_n(Z⊕I, 0⊕I)` and of `MSE_n(Z⊕I)` are equivalent, on the model `Z/k`.
pub fn experiment_q2(base: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize, k: u64, b: &Budgets) -> Result<VerdictReport> {
    let mut params = base_params(base, ideal, n);
    params["k"] = json!(k);
    let mut rep = VerdictReport::new("experiment_q2_niceness", params);
    rep.caveat(format!("evidence on the finite model Z/{k}; the question is not resolved by it"));
    if n < 3 {
        return Ok(rep.skip("stated for n ≥ 3"));
    }
    let zi = zmodel_excision(ideal, k, b.ring())?;
    let (nice_rel, ok_rel) = nice(&relative_space(&zi.ring, &zi.ideal, n, b)?)?;
    let (nice_abs, ok_abs) = nice(&absolute_space(&zi.ring, n, b)?)?;
    rep.check(ok_rel && ok_abs, || json!({"issue": "group tables failed their axioms"}));
    rep.metric("nice_relative", nice_rel);
    rep.metric("nice_absolute", nice_abs);
    rep.check(nice_rel == nice_abs, || json!({"issue": "verdicts differ on this model"}));
    Ok(rep)
}
