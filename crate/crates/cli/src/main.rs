//! `umrow`: batch front-end for orbit computations and verification suites.
//!
//! Exit status: 0 when every check passes, 1 when findings are present,
//! 2 on usage errors and exhausted budgets.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use umrow_core::cache::{cache_gc, GcReport, GroupCache, GroupStore};
use umrow_core::calculus::{group_table, TableOptions};
use umrow_core::excision::{experiment_q1, experiment_q2};
use umrow_core::report::{Envelope, Header, Verdict, VerdictReport, SCHEMA_VERSION};
use umrow_core::ring::{all_ideals, make_ring, FiniteRing, IdealHandle, RingSpec};
use umrow_core::rows::orbit_space;
use umrow_core::srange::{sr_laws_check, stable_range, PROBE_LIMIT};
use umrow_core::suite::{checkers, parse_ideal, run_checker, Checker, SuiteContext};
use umrow_core::{Budgets, Error};

#[derive(Parser, Debug)]
#[command(name = "umrow", version, about = "Unimodular row orbit spaces over finite commutative rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition unimodular rows into elementary orbits.
    Orbits(Common),
    /// The Vv product table of an orbit space.
    GroupTable(Common),
    /// Run a checker suite.
    Verify(Common),
    /// Stable range of ideals and the Vaserstein laws.
    Sr(Common),
    /// Exploratory tables on the integer model.
    Experiment(Common),
    /// Evict least recently used cache entries.
    CacheGc(GcArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Ring spec file, or a directory of `*.json` specs.
    #[arg(long)]
    ring: PathBuf,
    /// `(g1, g2, ...)`, `0`, `R` or `all`. Orbits and tables default to the
    /// absolute space; the other commands default to `all`.
    #[arg(long)]
    ideal: Option<String>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Modulus standing in for Z; defaults to the characteristic.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Group cache directory; `UMROW_CACHE` takes precedence.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = Budgets::default().elements)]
    budget_elements: u64,
    #[arg(long, default_value_t = Budgets::default().group)]
    budget_group: usize,
}

#[derive(Args, Debug)]
struct GcArgs {
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    max_bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A failure that maps to exit status 2.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.into())
    }
}

type CliResult<T> = Result<T, UsageError>;

struct RingInput {
    name: String,
    ring: Arc<FiniteRing>,
}

fn load_rings(path: &Path, budget: usize) -> CliResult<Vec<RingInput>> {
    let files = if path.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|x| x.to_str()) == Some("json"))
            .collect();
        v.sort();
        if v.is_empty() {
            return Err(anyhow!("no ring specs in {}", path.display()).into());
        }
        v
    } else {
        vec![path.to_path_buf()]
    };
    files
        .iter()
        .map(|f| {
            let text = fs::read_to_string(f).with_context(|| format!("reading ring spec {}", f.display()))?;
            let spec = RingSpec::from_json(&text).with_context(|| format!("in {}", f.display()))?;
            let ring = make_ring(&spec, budget).with_context(|| format!("building {}", f.display()))?;
            let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(RingInput { name, ring })
        })
        .collect()
}

fn ideals(ring: &Arc<FiniteRing>, sel: Option<&str>, default_all: bool) -> CliResult<Vec<Option<IdealHandle>>> {
    match sel {
        None if !default_all => Ok(vec![None]),
        None | Some("all") => Ok(all_ideals(ring)?.into_iter().map(Some).collect()),
        Some(s) => Ok(vec![Some(parse_ideal(ring, s)?)]),
    }
}

fn budgets(c: &Common) -> CliResult<Budgets> {
    if c.budget_elements == 0 || c.budget_group == 0 {
        return Err(anyhow!("budgets must be positive").into());
    }
    Ok(Budgets {
        elements: c.budget_elements,
        group: c.budget_group,
    })
}

fn emit(c: &Common, stem: &str, text: &str, ext: &str) -> CliResult<()> {
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("{stem}.{ext}"));
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(c: &Common, stem: &str, header: Header, body: Value) -> CliResult<()> {
    let env = Envelope { header, body };
    emit(c, stem, &(env.to_pretty() + "\n"), "json")
}

fn csv_string(records: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn budget_or_usage(e: Error) -> UsageError {
    UsageError(e.into())
}

fn orbits(c: &Common) -> CliResult<i32> {
    let b = budgets(c)?;
    let mut spaces = Vec::new();
    let mut csv_rows = vec![vec!["ring".into(), "ideal".into(), "canonical_rep".into(), "size".into()]];
    for input in load_rings(&c.ring, b.ring())? {
        for ideal in ideals(&input.ring, c.ideal.as_deref(), false)? {
            let s = orbit_space(&input.ring, c.n, ideal.as_ref(), None, b.elements).map_err(budget_or_usage)?;
            let label = ideal.as_ref().map_or("absolute".to_string(), |i| i.label());
            for [rep, size] in s.csv_records() {
                csv_rows.push(vec![input.name.clone(), label.clone(), rep, size]);
            }
            let mut j = s.to_json();
            j["ring"] = json!(input.name);
            spaces.push(j);
        }
    }
    match c.format {
        Format::Json => emit_json(c, "orbits", Header::new(), json!({"schema_version": SCHEMA_VERSION, "orbit_spaces": spaces}))?,
        Format::Csv => emit(c, "orbits", &csv_string(csv_rows)?, "csv")?,
    }
    Ok(0)
}

fn tables(c: &Common) -> CliResult<i32> {
    let b = budgets(c)?;
    let mut out = Vec::new();
    let mut csv_rows = Vec::new();
    let mut failed = false;
    for input in load_rings(&c.ring, b.ring())? {
        for ideal in ideals(&input.ring, c.ideal.as_deref(), false)? {
            let s = orbit_space(&input.ring, c.n, ideal.as_ref(), None, b.elements).map_err(budget_or_usage)?;
            let (t, rep) = group_table(&s, TableOptions::default()).map_err(budget_or_usage)?;
            failed |= rep.is_fail();
            let label = ideal.as_ref().map_or("absolute".to_string(), |i| i.label());
            let reps: Vec<String> = (0..t.len()).map(|k| input.ring.format_row(s.rep(k))).collect();
            let mut head = vec![format!("{}|{}", input.name, label)];
            head.extend(reps.iter().cloned());
            csv_rows.push(head);
            for (x, row) in t.table.iter().enumerate() {
                let mut r = vec![reps[x].clone()];
                r.extend(row.iter().map(|&y| reps[y].clone()));
                csv_rows.push(r);
            }
            out.push(json!({"ring": input.name, "ideal": label, "group": t.to_json(&s), "axioms": rep}));
        }
    }
    match c.format {
        Format::Json => emit_json(c, "group_table", Header::new(), json!({"schema_version": SCHEMA_VERSION, "tables": out}))?,
        // Tables of different spaces are stacked, each led by its own header line.
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            for r in csv_rows {
                w.write_record(&r)?;
            }
            emit(c, "group_table", &String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?, "csv")?
        }
    }
    Ok(failed as i32)
}

/// Outcome of one checker: a report, or an error that stopped it.
enum Slot {
    Report(VerdictReport),
    Error { check: &'static str, budget: bool, message: String },
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::Budget { .. } | Error::Spec(_) | Error::ElementSyntax { .. } | Error::ElementRange { .. } | Error::Precondition(_) | Error::Io(_)
    )
}

struct Job<'a> {
    ring: usize,
    ideal: usize,
    checker: &'a Checker,
}

fn verify(c: &Common) -> CliResult<i32> {
    if c.format != Format::Json {
        return Err(anyhow!("verdicts are JSON only").into());
    }
    let b = budgets(c)?;
    let suite = checkers(&c.suite)?;
    let rings = load_rings(&c.ring, b.ring())?;
    let mut ideal_lists = Vec::new();
    for r in &rings {
        let list: Vec<IdealHandle> = ideals(&r.ring, c.ideal.as_deref(), true)?.into_iter().flatten().collect();
        ideal_lists.push(list);
    }
    let cache = GroupCache::resolve_dir(c.cache.as_deref()).map(GroupCache::open).transpose()?;
    let store = GroupStore::new(cache);
    let mut jobs = Vec::new();
    for (ri, list) in ideal_lists.iter().enumerate() {
        for ii in 0..list.len() {
            for &ch in &suite {
                jobs.push(Job { ring: ri, ideal: ii, checker: ch });
            }
        }
    }
    let ks: Vec<u64> = rings.iter().map(|r| c.k.unwrap_or_else(|| r.ring.characteristic())).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(c.jobs.max(1)).build()?;
    let results: Vec<(Slot, u64)> = pool.install(|| {
        jobs.par_iter()
            .map(|j| {
                let ctx = SuiteContext {
                    ring: rings[j.ring].ring.clone(),
                    ideal: ideal_lists[j.ring][j.ideal].clone(),
                    n: c.n,
                    k: ks[j.ring],
                    budgets: b,
                    store: &store,
                };
                let start = Instant::now();
                let slot = match run_checker(j.checker, &ctx) {
                    Ok(r) => Slot::Report(r),
                    Err(e) => Slot::Error {
                        check: j.checker.name,
                        budget: e.is_budget(),
                        message: e.to_string(),
                    },
                };
                (slot, start.elapsed().as_millis() as u64)
            })
            .collect()
    });

    let mut header = Header::new();
    let (mut pass, mut fail, mut skip, mut errors, mut usage) = (0u64, 0u64, 0u64, 0u64, false);
    let mut entries: Vec<Value> = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (j, (slot, ms)) in jobs.iter().zip(results) {
        let ideal = &ideal_lists[j.ring][j.ideal];
        if current != Some((j.ring, j.ideal)) {
            current = Some((j.ring, j.ideal));
            entries.push(json!({
                "ring": rings[j.ring].name,
                "ring_hash": rings[j.ring].ring.hash_hex(),
                "ring_size": rings[j.ring].ring.size(),
                "ideal": ideal.label(),
                "n": c.n,
                "k": ks[j.ring],
                "reports": [],
            }));
        }
        header
            .timings
            .insert(format!("{}/{}/{}", rings[j.ring].name, ideal.label(), j.checker.name), json!(ms));
        let value = match slot {
            Slot::Report(r) => {
                match r.verdict {
                    Verdict::Pass => pass += 1,
                    Verdict::Fail => fail += 1,
                    Verdict::Skip => skip += 1,
                }
                serde_json::to_value(&r)?
            }
            Slot::Error { check, budget, message } => {
                errors += 1;
                usage |= budget;
                json!({"check_name": check, "verdict": "error", "budget_exceeded": budget, "error": message})
            }
        };
        let last = entries.last_mut().expect("entry pushed above");
        last["reports"].as_array_mut().expect("array").push(value);
    }
    for (label, ms) in store.timings() {
        header.timings.insert(format!("group/{label}"), json!(ms));
    }
    header.cache_hits = store.hits();
    header.cache_misses = store.misses();
    let body = json!({
        "schema_version": SCHEMA_VERSION,
        "suite": c.suite,
        "checkers": suite.iter().map(|ch| json!({"name": ch.name, "module": ch.module})).collect::<Vec<_>>(),
        "budgets": b.to_json(),
        "entries": entries,
        "summary": {"pass": pass, "fail": fail, "skip": skip, "error": errors},
        "partial": errors > 0,
    });
    emit_json(c, "verify", header, body)?;
    eprintln!("umrow verify: {pass} pass, {fail} fail, {skip} skip, {errors} error");
    Ok(if usage {
        2
    } else if fail > 0 || errors > 0 {
        1
    } else {
        0
    })
}

fn sr(c: &Common) -> CliResult<i32> {
    let b = budgets(c)?;
    let mut out = Vec::new();
    let mut failed = false;
    let mut csv_rows = vec![["ring", "ideal", "sr", "sd"].map(String::from).to_vec()];
    csv_rows[0].extend((1..=PROBE_LIMIT).map(|n| format!("sr_{n}")));
    for input in load_rings(&c.ring, b.ring())? {
        let mut reps: Vec<VerdictReport> = Vec::new();
        for ideal in ideals(&input.ring, c.ideal.as_deref(), true)?.into_iter().flatten() {
            let r = stable_range(&ideal, b.elements).map_err(budget_or_usage)?;
            let show = |x: Option<usize>| x.map_or(format!("≥ {}", PROBE_LIMIT + 1), |x| x.to_string());
            let mut line = vec![input.name.clone(), r.ideal.clone(), show(r.sr), r.sd.map_or("".into(), |x| x.to_string())];
            line.extend(r.verdicts.iter().map(|v| v.holds.to_string()));
            csv_rows.push(line);
            reps.push(r.to_verdict());
        }
        reps.push(sr_laws_check(&input.ring, b.elements).map_err(budget_or_usage)?);
        failed |= reps.iter().any(VerdictReport::is_fail);
        out.push(json!({"ring": input.name, "ring_hash": input.ring.hash_hex(), "reports": reps}));
    }
    match c.format {
        Format::Json => emit_json(c, "sr", Header::new(), json!({"schema_version": SCHEMA_VERSION, "rings": out}))?,
        Format::Csv => emit(c, "sr", &csv_string(csv_rows)?, "csv")?,
    }
    Ok(failed as i32)
}

fn experiment(c: &Common) -> CliResult<i32> {
    if c.format != Format::Json {
        return Err(anyhow!("experiment tables are JSON only").into());
    }
    let b = budgets(c)?;
    let mut out = Vec::new();
    for input in load_rings(&c.ring, b.ring())? {
        let k = c.k.unwrap_or_else(|| input.ring.characteristic());
        for ideal in ideals(&input.ring, c.ideal.as_deref(), true)?.into_iter().flatten() {
            let q1 = experiment_q1(&input.ring, &ideal, c.n, k, &b).map_err(budget_or_usage)?;
            let q2 = experiment_q2(&input.ring, &ideal, c.n, k, &b).map_err(budget_or_usage)?;
            out.push(json!({"ring": input.name, "ideal": ideal.label(), "k": k, "reports": [q1, q2]}));
        }
    }
    let body = json!({
        "schema_version": SCHEMA_VERSION,
        "note": "evidence tables on finite models; these do not settle the questions",
        "experiments": out,
    });
    emit_json(c, "experiment", Header::new(), body)?;
    // Experiments produce evidence, not findings.
    Ok(0)
}

fn gc(a: &GcArgs) -> CliResult<i32> {
    let dir = GroupCache::resolve_dir(a.cache.as_deref()).ok_or_else(|| anyhow!("no cache directory: pass --cache or set UMROW_CACHE"))?;
    // A cache that was never written holds nothing to evict.
    let rep = if dir.is_dir() { cache_gc(&dir, a.max_bytes)? } else { GcReport::default() };
    let mut body = Map::new();
    body.insert("schema_version".into(), json!(SCHEMA_VERSION));
    body.insert("gc".into(), serde_json::to_value(&rep)?);
    println!("{}", serde_json::to_string_pretty(&Value::Object(body))?);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Orbits(c) => orbits(c),
        Command::GroupTable(c) => tables(c),
        Command::Verify(c) => verify(c),
        Command::Sr(c) => sr(c),
        Command::Experiment(c) => experiment(c),
        Command::CacheGc(a) => gc(a),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(UsageError(e)) => {
            let fatal = e.downcast_ref::<Error>().is_none_or(is_usage);
            eprintln!("umrow: {e:#}");
            ExitCode::from(if fatal { 2 } else { 1 })
        }
    }
}
