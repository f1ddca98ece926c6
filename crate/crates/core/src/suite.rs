//! The named checker suites run by `verify`.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::cache::GroupStore;
use crate::calculus::theta::{descent_check, theta_identity_check};
use crate::calculus::{group_table, mn_check, niceness_all, wms_relation_check, GroupTable, TableOptions};
use crate::excision::{double_excision_check, lemma_l_check, relative_niceness_criterion_check, suslin_retract_check};
use crate::group::{congruence_counts, elementary_generators, elementary_group, RelMethod};
use crate::report::VerdictReport;
use crate::ring::{excision_ring, Elem, FiniteRing, IdealHandle};
use crate::rows::{orbit_space, OrbitSpace};
use crate::srange::{sr_laws_check, stable_range};
use crate::{Budgets, Error, Result};

pub const SUITES: &[&str] = &["all", "groups", "rows", "calculus", "excision", "srange"];
/// Word tables are built only for groups up to this size.
const WORD_TABLE_LIMIT: usize = 200_000;
const ROUND_TRIP_SAMPLE: usize = 1000;
const INVARIANCE_SAMPLE: usize = 100;
/// Materialized-group orbit oracle applies up to this ring size.
const ORACLE_RING_LIMIT: usize = 4;
const DESCENT_RING_LIMIT: usize = 4;
const DESCENT_SAMPLES: usize = 50;
const THETA_TRIPLES: usize = 1000;
const SEED: u64 = 0x0075_6d72_6f77;

/// One `(ring, ideal, n)` job.
pub struct SuiteContext<'a> {
    pub ring: Arc<FiniteRing>,
    pub ideal: IdealHandle,
    pub n: usize,
    /// Modulus of the integer model.
    pub k: u64,
    pub budgets: Budgets,
    pub store: &'a GroupStore,
}

impl SuiteContext<'_> {
    fn params(&self) -> Value {
        json!({"ring_hash": self.ring.hash_hex(), "ideal": self.ideal.label(), "n": self.n})
    }

    fn absolute(&self) -> Result<OrbitSpace> {
        orbit_space(&self.ring, self.n, None, None, self.budgets.elements)
    }

    fn relative(&self) -> Result<OrbitSpace> {
        orbit_space(&self.ring, self.n, Some(&self.ideal), None, self.budgets.elements)
    }

    fn whole(&self) -> IdealHandle {
        IdealHandle::whole(&self.ring)
    }
}

pub struct Checker {
    pub name: &'static str,
    pub module: &'static str,
    pub run: fn(&SuiteContext) -> Result<VerdictReport>,
}

pub const CHECKERS: &[Checker] = &[
    Checker { name: "elementary_group", module: "groups", run: elementary_order },
    Checker { name: "relative_methods", module: "groups", run: relative_methods },
    Checker { name: "factorize", module: "groups", run: factorize_round_trip },
    Checker { name: "orbits_absolute", module: "rows", run: orbits_absolute },
    Checker { name: "orbits_relative", module: "rows", run: orbits_relative },
    Checker { name: "group_table_absolute", module: "calculus", run: table_absolute },
    Checker { name: "group_table_relative", module: "calculus", run: table_relative },
    Checker { name: "niceness_absolute", module: "calculus", run: niceness_absolute },
    Checker { name: "niceness_relative", module: "calculus", run: niceness_relative },
    Checker { name: "wms_relations", module: "calculus", run: wms },
    Checker { name: "mennicke_newman_absolute", module: "calculus", run: mn_absolute },
    Checker { name: "mennicke_newman_relative", module: "calculus", run: mn_relative },
    Checker { name: "theta_identity", module: "calculus", run: theta },
    Checker { name: "lemma_a_descend", module: "calculus", run: descent },
    Checker { name: "double_excision", module: "excision", run: double_excision },
    Checker { name: "suslin_retract", module: "excision", run: suslin },
    Checker { name: "lemma_l", module: "excision", run: lemma_l },
    Checker { name: "relative_niceness_criterion", module: "excision", run: niceness_criterion },
    Checker { name: "stable_range_ideal", module: "srange", run: sr_ideal },
    Checker { name: "stable_range_ring", module: "srange", run: sr_ring },
    Checker { name: "sr_laws", module: "srange", run: sr_laws },
];

/// The checkers of a suite, in report order.
pub fn checkers(suite: &str) -> Result<Vec<&'static Checker>> {
    if !SUITES.contains(&suite) {
        return Err(Error::Precondition(format!("unknown suite `{suite}`; expected one of {}", SUITES.join(", "))));
    }
    Ok(CHECKERS.iter().filter(|c| suite == "all" || c.module == suite).collect())
}

/// The report of a checker named `name`, with the checker and module
/// names recorded in its parameters.
pub fn run_checker(c: &Checker, ctx: &SuiteContext) -> Result<VerdictReport> {
    let mut rep = (c.run)(ctx)?;
    rep.check_name = c.name.to_string();
    if let Value::Object(m) = &mut rep.parameters {
        m.insert("module".into(), json!(c.module));
    }
    Ok(rep)
}

fn elementary_order(c: &SuiteContext) -> Result<VerdictReport> {
    let ring = &c.ring;
    let mut rep = VerdictReport::new("elementary_group", c.params());
    let g = c.store.elementary(ring, c.n, c.budgets.group)?;
    rep.metric("order", g.len() as u64);
    rep.check(g.verify_closed(), || json!({"issue": "not closed under the generators"}));
    let one = ring.one();
    rep.check(g.iter().all(|m| m.det(ring) == one), || json!({"issue": "element of determinant ≠ 1"}));
    match congruence_counts(&c.whole(), c.n, 16 * c.budgets.group as u64) {
        Ok((sl, _)) => {
            rep.metric("sl_order", sl);
            // Finite rings are semilocal, where E_n = SL_n.
            rep.check(sl == g.len() as u64, || json!({"issue": "E_n(R) ≠ SL_n(R)", "e": g.len(), "sl": sl}));
        }
        Err(Error::Budget { .. }) => rep.caveat("SL_n(R) too large to count; order not cross-checked"),
        Err(e) => return Err(e),
    }
    Ok(rep)
}

fn relative_methods(c: &SuiteContext) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new("relative_methods", c.params());
    let b = c.budgets.group;
    let groups = [RelMethod::NormalClosure, RelMethod::Intersection, RelMethod::ZGenerators]
        .into_iter()
        .map(|m| c.store.relative(&c.ideal, c.n, m, b))
        .collect::<Result<Vec<_>>>()?;
    let agree = groups[0].same_elements(&groups[1]) && groups[0].same_elements(&groups[2]);
    rep.metric(
        "orders",
        json!(groups.iter().map(|g| json!({"method": g.tag(), "order": g.len()})).collect::<Vec<_>>()),
    );
    rep.metric("methods_agree", agree);
    if c.n >= 3 {
        rep.check(agree, || json!({"issue": "constructions differ"}));
    } else {
        rep.caveat("n = 2: agreement recorded, not asserted");
    }
    let e = &groups[0];
    let conj = elementary_generators(c.n, c.ring.additive_generators());
    rep.check(e.normalized_by(&conj, None), || json!({"issue": "not normal in E_n(R)"}));
    rep.check(e.all_congruent(&c.ideal), || json!({"issue": "element not ≡ I mod the ideal"}));
    match congruence_counts(&c.ideal, c.n, 16 * b as u64) {
        Ok((sl, gl)) => {
            rep.metric("sl_congruence_order", sl);
            rep.metric("gl_congruence_order", gl);
            rep.check(e.len() as u64 <= sl, || json!({"issue": "larger than SL_n(R, I)"}));
        }
        Err(Error::Budget { .. }) => rep.caveat("SL_n(R, I) too large to count"),
        Err(e) => return Err(e),
    }
    Ok(rep)
}

fn factorize_round_trip(c: &SuiteContext) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new("factorize", c.params());
    let g = match elementary_group(&c.ring, c.n, true, WORD_TABLE_LIMIT.min(c.budgets.group)) {
        Ok(g) => g,
        Err(Error::Budget { .. }) => return Ok(rep.skip("E_n(R) too large for a word table")),
        Err(e) => return Err(e),
    };
    let id = crate::matrix::Mat::identity(&c.ring, c.n);
    rep.check(g.factorize(&id)?.is_empty(), || json!({"issue": "identity has a nonempty word"}));
    let step = (g.len() / ROUND_TRIP_SAMPLE).max(1);
    let mut checked = 0u64;
    let mut longest = 0usize;
    for i in (0..g.len()).step_by(step) {
        let m = g.element(i);
        let w = g.factorize(&m)?;
        longest = longest.max(w.len());
        checked += 1;
        rep.check(g.evaluate(&w)? == m, || json!({"element": m.to_json(&c.ring)}));
    }
    rep.metric("order", g.len() as u64);
    rep.metric("elements_checked", checked);
    rep.metric("longest_word", longest as u64);
    Ok(rep)
}

fn orbit_common(c: &SuiteContext, space: &OrbitSpace, acting: &crate::group::MatGroup, rep: &mut VerdictReport) -> Result<()> {
    let ring = &c.ring;
    rep.metric("rows", space.rows().len() as u64);
    rep.metric("classes", space.num_classes() as u64);
    rep.metric("action", space.action_tag());
    rep.check(space.uncertified().is_empty(), || json!({"issue": "rows without certificate", "count": space.uncertified().len()}));
    for r in space.rows() {
        let ok = ring.dot(&r.entries, &r.certificate) == ring.one();
        rep.check(ok, || json!({"row": ring.row_json(&r.entries), "issue": "bad certificate"}));
    }
    // Finite rings are semilocal, so every orbit space is expected to be trivial.
    rep.check(space.is_singleton(), || json!({"issue": "nontrivial orbit space", "classes": space.num_classes()}));
    let total: usize = space.classes().iter().map(|k| k.members.len()).sum();
    rep.check(total == space.rows().len(), || json!({"issue": "classes do not partition the rows"}));
    let step = (acting.len() / INVARIANCE_SAMPLE).max(1);
    let mut moved = 0u64;
    for (t, i) in (0..acting.len()).step_by(step).take(INVARIANCE_SAMPLE).enumerate() {
        let g = acting.element(i);
        let v = &space.row(t * 7919 % space.rows().len()).entries;
        let w = g.row_action(ring, v)?;
        moved += 1;
        rep.check(space.class_of(&w)? == space.class_of(v)?, || json!({"row": ring.row_json(v), "g": g.to_json(ring)}));
    }
    rep.metric("invariance_samples", moved);
    Ok(())
}

fn same_partition(a: &OrbitSpace, b: &OrbitSpace) -> bool {
    a.rows().len() == b.rows().len() && (0..a.rows().len()).all(|i| a.class_of_index(i) == b.class_of_index(i))
}

fn orbits_absolute(c: &SuiteContext) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new("orbits_absolute", c.params());
    let space = c.absolute()?;
    let e = c.store.elementary(&c.ring, c.n, c.budgets.group)?;
    orbit_common(c, &space, &e, &mut rep)?;
    if c.ring.size() <= ORACLE_RING_LIMIT {
        let full = orbit_space(&c.ring, c.n, None, Some(e.iter().collect()), c.budgets.elements)?;
        rep.check(same_partition(&space, &full), || json!({"issue": "generator BFS differs from the materialized action"}));
        rep.metric("oracle", "materialized E_n(R)");
    } else {
        rep.caveat("materialized-group oracle applied only for |R| ≤ 4");
    }
    Ok(rep)
}

fn orbits_relative(c: &SuiteContext) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new("orbits_relative", c.params());
    if c.n < 3 {
        return Ok(rep.skip("relative orbit spaces are taken for n ≥ 3"));
    }
    let space = c.relative()?;
    let e = c.store.relative(&c.ideal, c.n, RelMethod::NormalClosure, c.budgets.group)?;
    orbit_common(c, &space, &e, &mut rep)?;
    let alt = orbit_space(&c.ring, c.n, Some(&c.ideal), Some(e.generators().to_vec()), c.budgets.elements)?;
    rep.check(same_partition(&space, &alt), || json!({"issue": "generator sets give different partitions"}));
    rep.metric("normal_closure_generators", e.generators().len() as u64);
    Ok(rep)
}

fn stable_dimension(ideal: &IdealHandle, b: &Budgets) -> Option<usize> {
    stable_range(ideal, b.elements).ok().and_then(|r| r.sd)
}

fn table(c: &SuiteContext, space: &OrbitSpace, ideal: &IdealHandle) -> Result<(GroupTable, VerdictReport)> {
    let opts = TableOptions {
        stable_dimension: stable_dimension(ideal, &c.budgets),
        ..TableOptions::default()
    };
    group_table(space, opts)
}

fn table_absolute(c: &SuiteContext) -> Result<VerdictReport> {
    let space = c.absolute()?;
    let (t, mut rep) = table(c, &space, &c.whole())?;
    rep.metric("table", t.to_json(&space));
    Ok(rep)
}

fn table_relative(c: &SuiteContext) -> Result<VerdictReport> {
    if c.n < 3 {
        return Ok(VerdictReport::new("group_table", c.params()).skip("relative orbit spaces are taken for n ≥ 3"));
    }
    let space = c.relative()?;
    let (t, mut rep) = table(c, &space, &c.ideal)?;
    rep.metric("table", t.to_json(&space));
    Ok(rep)
}

fn niceness(c: &SuiteContext, space: &OrbitSpace, ideal: &IdealHandle) -> Result<VerdictReport> {
    let (t, _) = table(c, space, ideal)?;
    let (per, mut summary) = niceness_all(space, &t);
    summary.parameters = c.params();
    for r in &per {
        for w in &r.witnesses {
            summary.fail(json!({"coordinate": r.parameters["coordinate"], "witness": w}));
        }
    }
    summary.metric(
        "pairs_checked",
        json!(per.iter().map(|r| r.metric_u64("pairs_checked")).collect::<Vec<_>>()),
    );
    Ok(summary)
}

fn niceness_absolute(c: &SuiteContext) -> Result<VerdictReport> {
    niceness(c, &c.absolute()?, &c.whole())
}

fn niceness_relative(c: &SuiteContext) -> Result<VerdictReport> {
    if c.n < 3 {
        return Ok(VerdictReport::new("niceness", c.params()).skip("relative orbit spaces are taken for n ≥ 3"));
    }
    niceness(c, &c.relative()?, &c.ideal)
}

fn wms(c: &SuiteContext) -> Result<VerdictReport> {
    let space = c.absolute()?;
    let (t, _) = table(c, &space, &c.whole())?;
    wms_relation_check(&space, &t)
}

fn mn_absolute(c: &SuiteContext) -> Result<VerdictReport> {
    let e = c.store.elementary(&c.ring, c.n, c.budgets.group)?;
    Ok(mn_check(&c.absolute()?, &e, None))
}

fn mn_relative(c: &SuiteContext) -> Result<VerdictReport> {
    if c.n < 3 {
        return Ok(VerdictReport::new("mennicke_newman", c.params()).skip("relative orbit spaces are taken for n ≥ 3"));
    }
    let e = c.store.elementary(&c.ring, c.n, c.budgets.group)?;
    let rel = c.store.relative(&c.ideal, c.n, RelMethod::NormalClosure, c.budgets.group)?;
    Ok(mn_check(&c.relative()?, &e, Some(&rel)))
}

fn theta(c: &SuiteContext) -> Result<VerdictReport> {
    theta_identity_check(&c.ring, THETA_TRIPLES, SEED)
}

fn descent(c: &SuiteContext) -> Result<VerdictReport> {
    if c.ring.size() > DESCENT_RING_LIMIT {
        let rep = VerdictReport::new("lemma_a_descend", c.params());
        return Ok(rep.skip("descent sampling is limited to rings with at most 4 elements"));
    }
    descent_check(&c.ideal, DESCENT_SAMPLES, SEED, c.budgets.group)
}

fn double_excision(c: &SuiteContext) -> Result<VerdictReport> {
    double_excision_check(&c.ring, &c.ideal, c.n, c.k, &c.budgets)
}

fn suslin(c: &SuiteContext) -> Result<VerdictReport> {
    if c.n < 3 {
        return Ok(VerdictReport::new("suslin_retract", c.params()).skip("stated for n ≥ 3"));
    }
    let ex = excision_ring(&c.ring, &c.ideal, c.budgets.ring())?;
    let mut rep = suslin_retract_check(&ex, c.n, &c.budgets, c.store)?;
    rep.parameters["base_ring_hash"] = json!(c.ring.hash_hex());
    rep.parameters["base_ideal"] = json!(c.ideal.label());
    Ok(rep)
}

fn lemma_l(c: &SuiteContext) -> Result<VerdictReport> {
    lemma_l_check(&c.ring, &c.ideal, c.n, &c.budgets)
}

fn niceness_criterion(c: &SuiteContext) -> Result<VerdictReport> {
    relative_niceness_criterion_check(&c.ring, &c.ideal, c.n, &c.budgets)
}

fn sr_ideal(c: &SuiteContext) -> Result<VerdictReport> {
    Ok(stable_range(&c.ideal, c.budgets.elements)?.to_verdict())
}

fn sr_ring(c: &SuiteContext) -> Result<VerdictReport> {
    Ok(stable_range(&c.whole(), c.budgets.elements)?.to_verdict())
}

fn sr_laws(c: &SuiteContext) -> Result<VerdictReport> {
    sr_laws_check(&c.ring, c.budgets.elements)
}

/// Parse an ideal selector: `(g₁, …)` of generator literals, `0`, or `R`.
pub fn parse_ideal(ring: &Arc<FiniteRing>, sel: &str) -> Result<IdealHandle> {
    let s = sel.trim();
    match s {
        "0" | "()" => return Ok(IdealHandle::zero(ring)),
        "R" | "(1)" => return Ok(IdealHandle::whole(ring)),
        _ => {}
    }
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::ElementSyntax {
            input: sel.to_string(),
            reason: "expected `(g1, g2, ...)`, `0` or `R`".into(),
        })?;
    let gens = split_generators(inner)
        .into_iter()
        .map(|g| ring.parse(g.trim()))
        .collect::<Result<Vec<Elem>>>()?;
    crate::ring::ideal_generate(ring, &gens)
}

/// Split at commas outside brackets.
fn split_generators(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingSpec};

    #[test]
    fn selectors() {
        let r = make_ring(&RingSpec::zmod(8), 64).unwrap();
        assert_eq!(parse_ideal(&r, "(2)").unwrap().len(), 4);
        assert_eq!(parse_ideal(&r, "(4, 6)").unwrap().len(), 4);
        assert!(parse_ideal(&r, "0").unwrap().is_zero());
        assert!(parse_ideal(&r, "R").unwrap().is_whole());
        assert!(parse_ideal(&r, "2").is_err());
        assert!(checkers("nope").is_err());
        assert_eq!(checkers("all").unwrap().len(), CHECKERS.len());
    }

    #[test]
    fn all_checkers_pass_on_z4() {
        let r = make_ring(&RingSpec::zmod(4), 64).unwrap();
        let store = GroupStore::default();
        for sel in ["0", "(2)", "R"] {
            let ctx = SuiteContext {
                ring: r.clone(),
                ideal: parse_ideal(&r, sel).unwrap(),
                n: 3,
                k: 4,
                budgets: Budgets::default(),
                store: &store,
            };
            for c in checkers("all").unwrap() {
                let rep = run_checker(c, &ctx).unwrap();
                assert!(!rep.is_fail(), "{sel} {}: {rep:?}", c.name);
            }
        }
    }
}
