//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if
//! any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::Value;
use umrow_core::cache::GroupStore;
use umrow_core::group::elementary_group;
use umrow_core::report::{Verdict, VerdictReport};
use umrow_core::ring::{all_ideals, make_ring, FiniteRing, RingSpec};
use umrow_core::suite::{run_checker, SuiteContext, CHECKERS};
use umrow_core::Budgets;

/// E₃(Z/8) has about 1.1·10⁷ elements, above the default group budget.
const GROUP_BUDGET: usize = 20_000_000;
const C1_LIMIT: Duration = Duration::from_secs(60);
const C5_LIMIT: Duration = Duration::from_secs(600);
const DESCENT_MIN: u64 = 50;
const DESCENT_RING_LIMIT: usize = 4;
const THETA_MIN: u64 = 1000;
const ALTERNATES: u64 = 3;
const C2_RING_LIMIT: usize = 8;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load_corpus() -> Vec<(String, Arc<FiniteRing>)> {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|f| {
            let spec = RingSpec::from_json(&fs::read_to_string(f).expect("readable spec")).expect("valid spec");
            let name = f.file_stem().unwrap().to_string_lossy().into_owned();
            (name, make_ring(&spec, 4096).expect("ring builds"))
        })
        .collect()
}

type Outcome = Result<VerdictReport, String>;

struct Run {
    /// `(ring, ideal label, ring size)` per entry, in corpus order.
    entries: Vec<(String, String, usize)>,
    results: BTreeMap<(usize, &'static str), Outcome>,
    elapsed: BTreeMap<&'static str, Duration>,
}

impl Run {
    fn of<'a>(&'a self, checker: &'a str) -> impl Iterator<Item = (&'a (String, String, usize), &'a Outcome)> + 'a {
        self.results
            .iter()
            .filter(move |((_, c), _)| *c == checker)
            .map(|((e, _), o)| (&self.entries[*e], o))
    }

    fn time(&self, checkers: &[&str]) -> Duration {
        checkers.iter().filter_map(|c| self.elapsed.get(c)).sum()
    }
}

fn run_suite(corpus: &[(String, Arc<FiniteRing>)]) -> Run {
    let store = GroupStore::default();
    let budgets = Budgets {
        group: GROUP_BUDGET,
        ..Budgets::default()
    };
    let mut run = Run {
        entries: Vec::new(),
        results: BTreeMap::new(),
        elapsed: BTreeMap::new(),
    };
    for (name, ring) in corpus {
        for ideal in all_ideals(ring).expect("ideal lattice") {
            let e = run.entries.len();
            run.entries.push((name.clone(), ideal.label(), ring.size()));
            let ctx = SuiteContext {
                ring: ring.clone(),
                ideal: ideal.clone(),
                n: 3,
                k: ring.characteristic(),
                budgets,
                store: &store,
            };
            for ch in CHECKERS {
                let start = Instant::now();
                let out = run_checker(ch, &ctx).map_err(|e| e.to_string());
                *run.elapsed.entry(ch.name).or_default() += start.elapsed();
                run.results.insert((e, ch.name), out);
            }
        }
    }
    run
}

struct Tally {
    checked: usize,
    problems: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checked: 0, problems: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.problems.push(what());
        }
    }

    /// Every report of `checker` passes and satisfies `extra`.
    fn all_pass(&mut self, run: &Run, checker: &str, extra: impl Fn(&VerdictReport) -> Result<(), String>) {
        for ((ring, ideal, _), out) in run.of(checker) {
            let verdict = match out {
                Err(e) => Err(format!("error: {e}")),
                Ok(r) if r.verdict != Verdict::Pass => Err(format!("{:?}: {}", r.verdict, r.witnesses.first().map(Value::to_string).unwrap_or_default())),
                Ok(r) => extra(r),
            };
            self.require(verdict.is_ok(), || format!("{checker} on {ring} {ideal}: {}", verdict.unwrap_err()));
        }
    }

    fn line(self, id: u32, summary: String) -> bool {
        let ok = self.problems.is_empty() && self.checked > 0;
        let status = if ok { "PASS" } else { "FAIL" };
        println!("C{id:<2} {status}  {summary} ({} checks)", self.checked);
        for p in self.problems.iter().take(5) {
            println!("      {p}");
        }
        ok
    }
}

/// det(I + 2X) mod 4 over the integers.
fn det_one_plus_twice(x: u32) -> i64 {
    let m: Vec<i64> = (0..9).map(|k| (k % 4 == 0) as i64 + 2 * ((x >> k) & 1) as i64).collect();
    let d = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
    d.rem_euclid(4)
}

fn c1(run: &Run) -> bool {
    let mut t = Tally::new();
    let sl3_f2: u64 = (8 - 1) * (8 - 2) * (8 - 4);
    let kernel = (0..512u32).filter(|&x| det_one_plus_twice(x) == 1).count() as u64;
    let mut times = Vec::new();
    for (n, expect) in [(2u64, sl3_f2), (4, sl3_f2 * kernel)] {
        let ring = make_ring(&RingSpec::zmod(n), 64).unwrap();
        let start = Instant::now();
        let order = elementary_group(&ring, 3, false, GROUP_BUDGET).map(|g| g.len() as u64);
        let took = start.elapsed();
        times.push(format!("{:.2}s", took.as_secs_f64()));
        t.require(order.as_ref().is_ok_and(|&o| o == expect), || format!("|E3(Z/{n})| = {order:?}, formula {expect}"));
        t.require(took < C1_LIMIT, || format!("E3(Z/{n}) took {took:?}"));
    }
    t.all_pass(run, "elementary_group", |_| Ok(()));
    t.line(1, format!("|E3(Z/2)| = {sl3_f2}, |E3(Z/4)| = {} (kernel {kernel}); BFS {}", sl3_f2 * kernel, times.join(", ")))
}

fn c2(run: &Run) -> bool {
    let mut t = Tally::new();
    for ((ring, ideal, size), out) in run.of("relative_methods") {
        if *size > C2_RING_LIMIT {
            continue;
        }
        let agree = out.as_ref().map(|r| r.passed() && r.metrics.get("methods_agree") == Some(&Value::Bool(true)));
        t.require(agree == Ok(true), || format!("{ring} {ideal}: {out:?}"));
    }
    t.line(2, "normal closure, E¹ ∩ congruence and z-generator constructions of E3(R, I) agree".into())
}

fn c3(run: &Run) -> bool {
    let mut t = Tally::new();
    t.all_pass(run, "suslin_retract", |_| Ok(()));
    t.line(3, "E3(R⊕I, 0⊕I) = E3(R⊕I) ∩ SL3(R⊕I, 0⊕I)".into())
}

fn c4(run: &Run) -> bool {
    let mut t = Tally::new();
    let singleton = |r: &VerdictReport| if r.metric_u64("classes") == 1 { Ok(()) } else { Err(format!("{} classes", r.metric_u64("classes"))) };
    t.all_pass(run, "orbits_absolute", singleton);
    t.all_pass(run, "orbits_relative", singleton);
    let (mut products, mut full, mut thin) = (0u64, 0u64, 0u64);
    for checker in ["group_table_absolute", "group_table_relative"] {
        t.all_pass(run, checker, |r| {
            let pairs = r.metric_u64("representative_pairs");
            if r.metric_u64("form_agreements") != pairs {
                return Err("Vv forms disagree".into());
            }
            if r.metric_u64("p_alternates_min_available") >= ALTERNATES && r.metric_u64("products_with_full_alternates") != pairs {
                return Err("fewer alternates checked than available".into());
            }
            Ok(())
        });
        for (_, out) in run.of(checker) {
            if let Ok(r) = out {
                products += r.metric_u64("representative_pairs");
                full += r.metric_u64("products_with_full_alternates");
                thin += (r.metric_u64("p_alternates_min_available") < ALTERNATES) as u64;
            }
        }
    }
    t.line(
        4,
        format!("all orbit spaces singletons, axioms hold, forms agree on {products} products; {full} with ≥ {ALTERNATES} p-alternates, the rest checked on every valid p ({thin} spaces have fewer)"),
    )
}

fn c5(run: &Run) -> bool {
    let mut t = Tally::new();
    t.all_pass(run, "mennicke_newman_relative", |_| Ok(()));
    t.all_pass(run, "mennicke_newman_absolute", |_| Ok(()));
    let took = run.time(&["mennicke_newman_relative", "mennicke_newman_absolute"]);
    t.require(took < C5_LIMIT, || format!("took {took:?}"));
    t.line(5, format!("all pairs, all modes, ε membership verified in {:.1}s", took.as_secs_f64()))
}

fn c6(run: &Run) -> bool {
    let mut t = Tally::new();
    for ((ring, ideal, size), out) in run.of("lemma_a_descend") {
        if *size > DESCENT_RING_LIMIT {
            continue;
        }
        let ok = out.as_ref().is_ok_and(|r| r.passed() && r.metric_u64("passed") >= DESCENT_MIN);
        t.require(ok, || format!("{ring} {ideal}: {out:?}"));
    }
    t.all_pass(run, "theta_identity", |r| {
        if r.metric_u64("holds") >= THETA_MIN {
            Ok(())
        } else {
            Err(format!("only {} triples", r.metric_u64("holds")))
        }
    });
    t.line(6, format!("descent on ≥ {DESCENT_MIN} α per entry with |R| ≤ {DESCENT_RING_LIMIT}; θ identity on ≥ {THETA_MIN} triples"))
}

fn c7(run: &Run) -> bool {
    let mut t = Tally::new();
    t.all_pass(run, "double_excision", |_| Ok(()));
    t.line(7, "double excision chain over (Z/k)⊕I: bijections and π₂ a homomorphism".into())
}

fn c8(run: &Run) -> bool {
    let mut t = Tally::new();
    let sr_one = |r: &VerdictReport| if r.metric_u64("sr") == 1 { Ok(()) } else { Err(format!("sr = {:?}", r.metrics.get("sr"))) };
    t.all_pass(run, "stable_range_ideal", sr_one);
    t.all_pass(run, "stable_range_ring", sr_one);
    t.all_pass(run, "sr_laws", |r| {
        if r.metric_u64("nested_pairs") > 0 {
            Ok(())
        } else {
            Err("no nested pairs".into())
        }
    });
    t.line(8, "Sr = 1 everywhere, monotone on nested pairs, Sr_n ⇒ Sr_{n+1} for n = 1..3".into())
}

fn c9(run: &Run) -> bool {
    let mut t = Tally::new();
    t.all_pass(run, "niceness_absolute", |_| Ok(()));
    t.all_pass(run, "niceness_relative", |_| Ok(()));
    t.all_pass(run, "relative_niceness_criterion", |_| Ok(()));
    t.line(9, "coordinate variants of niceness agree; relative niceness criterion holds".into())
}

fn verify_body(cache: &Path, out: &Path) -> Result<(String, u64), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_umrow"))
        .args(["verify", "--suite", "all", "--n", "3", "--budget-group", &GROUP_BUDGET.to_string()])
        .arg("--ring")
        .arg(corpus_dir())
        .arg("--cache")
        .arg(cache)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("verify exited with {status}"));
    }
    let text = fs::read_to_string(out.join("verify.json")).map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let hits = v["header"]["cache_hits"].as_u64().unwrap_or(0);
    Ok((serde_json::to_string(&v["body"]).unwrap(), hits))
}

fn c10() -> bool {
    let mut t = Tally::new();
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let first = verify_body(&cache, &tmp.path().join("a"));
    let second = verify_body(&cache, &tmp.path().join("b"));
    let detail = match (&first, &second) {
        (Ok((a, _)), Ok((b, hits))) => {
            t.require(a == b, || "report bodies differ".into());
            format!("two verify runs, {} body bytes identical; second run served {hits} groups from cache", a.len())
        }
        _ => {
            let err = first.as_ref().err().or(second.as_ref().err()).cloned().unwrap_or_default();
            t.require(false, || err);
            "verify did not complete".into()
        }
    };
    t.line(10, detail)
}

fn main() {
    let start = Instant::now();
    let corpus = load_corpus();
    let run = run_suite(&corpus);
    println!("acceptance: {} corpus entries, suite run in {:.1}s", run.entries.len(), start.elapsed().as_secs_f64());
    let results = [c1(&run), c2(&run), c3(&run), c4(&run), c5(&run), c6(&run), c7(&run), c8(&run), c9(&run), c10()];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria pass in {:.1}s", results.len(), start.elapsed().as_secs_f64());
    if passed != results.len() {
        std::process::exit(1);
    }
}
