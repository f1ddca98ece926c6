//! Stable range conditions `Sr_n(I)`, decided by exhaustive search.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::report::VerdictReport;
use crate::ring::{all_ideals, ideal_generate, quotient_ring, Elem, FiniteRing, IdealHandle};
use crate::rows::{enumerate_um, relative_certificate};
use crate::{Error, Result};

pub const PROBE_LIMIT: usize = 4;

/// Outcome of `Sr_n(I)` for one `n`.
#[derive(Clone, Debug, Serialize)]
pub struct SrVerdict {
    pub n: usize,
    pub holds: bool,
    pub rows: u64,
    /// A row of `Um_{n+1}(R, I)` that cannot be shortened.
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableRangeReport {
    pub ring_hash: String,
    pub ideal: String,
    pub verdicts: Vec<SrVerdict>,
    /// Least probed `n` with `Sr_n(I)`; `None` means at least the probe limit.
    pub sr: Option<usize>,
    pub sd: Option<usize>,
}

impl StableRangeReport {
    pub fn is_monotone(&self) -> bool {
        self.verdicts.windows(2).all(|w| !w[0].holds || w[1].holds)
    }

    /// `Sr` as a number, with "beyond the probe limit" ordered last.
    fn rank(&self) -> usize {
        self.sr.unwrap_or(PROBE_LIMIT + 1)
    }

    pub fn to_verdict(&self) -> VerdictReport {
        let mut rep = VerdictReport::new("stable_range", json!({"ring_hash": self.ring_hash, "ideal": self.ideal}));
        rep.caveat("for a finite ring every maximal ideal is isolated, so the topological hypotheses on max(R) carry no content beyond Sd = 0");
        match self.sr {
            Some(sr) => {
                rep.metric("sr", sr as u64);
                rep.metric("sd", (sr - 1) as u64);
            }
            None => {
                rep.metric("sr", format!("≥ {}", PROBE_LIMIT + 1));
                rep.fail(json!({"issue": "no probed n satisfies the condition"}));
            }
        }
        rep.metric("verdicts", serde_json::to_value(&self.verdicts).expect("serializes"));
        rep.check(self.is_monotone(), || json!({"issue": "verdicts not monotone in n"}));
        rep
    }
}

/// Search `c ∈ Iⁿ` with `(a_i + c_i a_{n+1})_{i ≤ n} ∈ Um_n(R, I)`.
fn shorten(ideal: &IdealHandle, row: &[Elem]) -> Option<Vec<Elem>> {
    let ring = ideal.ring();
    let n = row.len() - 1;
    let last = row[n];
    // Distinct products c·a_{n+1}, c ∈ I, are all that matter.
    let mut shifts: Vec<Elem> = ideal.members().iter().map(|&c| ring.mul(c, last)).collect();
    shifts.sort_unstable();
    shifts.dedup();
    let mut idx = vec![0usize; n];
    let mut b = vec![0; n];
    loop {
        for i in 0..n {
            b[i] = ring.add(row[i], shifts[idx[i]]);
        }
        if relative_certificate(ideal, &b).is_some() {
            return Some(b);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return None;
            }
            idx[pos] += 1;
            if idx[pos] < shifts.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Decide `Sr_n(I)` over every row of `Um_{n+1}(R, I)`.
pub fn sr_condition(ideal: &IdealHandle, n: usize, budget: u64) -> Result<SrVerdict> {
    if n == 0 {
        return Err(Error::Precondition("Sr_n needs n ≥ 1".into()));
    }
    let ring = ideal.ring();
    let en = enumerate_um(ring, n + 1, Some(ideal), budget)?;
    let mut verdict = SrVerdict {
        n,
        holds: true,
        rows: en.rows.len() as u64,
        counterexample: None,
    };
    for row in &en.rows {
        if shorten(ideal, &row.entries).is_none() {
            verdict.holds = false;
            verdict.counterexample = Some(ring.row_json(&row.entries));
            break;
        }
    }
    Ok(verdict)
}

/// Probe `Sr_n(I)` for `n = 1..=4`.
pub fn stable_range(ideal: &IdealHandle, budget: u64) -> Result<StableRangeReport> {
    let verdicts = (1..=PROBE_LIMIT)
        .map(|n| sr_condition(ideal, n, budget))
        .collect::<Result<Vec<_>>>()?;
    let sr = verdicts.iter().find(|v| v.holds).map(|v| v.n);
    Ok(StableRangeReport {
        ring_hash: ideal.ring().hash_hex(),
        ideal: ideal.label(),
        verdicts,
        sr,
        sd: sr.map(|s| s - 1),
    })
}

/// Largest ring handled by [`sr_laws_check`].
pub const LAWS_RING_LIMIT: usize = 16;

/// Monotonicity `Sr(I) ≤ Sr(J)` and `Sr(J/I) ≤ Sr(J)` over all nested
/// ideal pairs, and `Sr_n ⇒ Sr_{n+1}` for every ideal.
pub fn sr_laws_check(ring: &Arc<FiniteRing>, budget: u64) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new("sr_laws", json!({"ring_hash": ring.hash_hex()}));
    if ring.size() > LAWS_RING_LIMIT {
        return Ok(rep.skip("ideal lattice enumeration is limited to rings of at most 16 elements"));
    }
    let ideals = all_ideals(ring)?;
    let reports: Vec<StableRangeReport> = ideals.iter().map(|i| stable_range(i, budget)).collect::<Result<_>>()?;
    let (mut pairs, mut implications) = (0u64, 0u64);
    for (r, i) in reports.iter().zip(&ideals) {
        for w in r.verdicts.windows(2) {
            if w[0].holds {
                implications += 1;
                rep.check(w[1].holds, || json!({"ideal": i.label(), "n": w[0].n, "issue": "Sr_n without Sr_{n+1}"}));
            }
        }
    }
    for (ia, i) in ideals.iter().enumerate() {
        let q = quotient_ring(ring, i)?;
        for (ja, j) in ideals.iter().enumerate() {
            if !i.is_subset_of(j) {
                continue;
            }
            pairs += 1;
            let (si, sj) = (reports[ia].rank(), reports[ja].rank());
            rep.check(si <= sj, || json!({"I": i.label(), "J": j.label(), "sr_i": si, "sr_j": sj}));
            let image: Vec<Elem> = j.members().iter().map(|&x| q.q.apply(x)).collect();
            let jq = ideal_generate(&q.ring, &image)?;
            let sq = stable_range(&jq, budget)?.rank();
            rep.check(sq <= sj, || json!({"I": i.label(), "J": j.label(), "sr_quotient": sq, "sr_j": sj}));
        }
    }
    rep.metric("ideals", ideals.len() as u64);
    rep.metric("nested_pairs", pairs);
    rep.metric("implications_checked", implications);
    rep.metric(
        "sr_by_ideal",
        json!(ideals.iter().zip(&reports).map(|(i, r)| json!({"ideal": i.label(), "sr": r.sr})).collect::<Vec<_>>()),
    );
    Ok(rep)
}
