//! Finite matrix groups: closure, relative elementary subgroups,
//! congruence subgroups and factorization into generator words.
//!
//! Elements are packed into `u64` keys, one fixed-width field per entry.

use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::matrix::{det_entries, mul_into, ElemGen, Mat};
use crate::ring::{Elem, FiniteRing, IdealHandle};
use crate::{Error, Result};

pub const DEFAULT_GROUP_BUDGET: usize = 2_000_000;
/// Key widths up to this many bits use a dense bitset for membership.
const DENSE_KEY_BITS: u32 = 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyCodec {
    len: usize,
    bits: u32,
}

impl KeyCodec {
    /// Codec for `n × n` matrices.
    pub fn new(ring_size: usize, n: usize) -> Result<Self> {
        Self::with_len(ring_size, n * n)
    }

    /// Codec for vectors of `len` entries. Keys order like the vectors
    /// under lexicographic comparison.
    pub fn with_len(ring_size: usize, len: usize) -> Result<Self> {
        let bits = (usize::BITS - (ring_size.max(2) - 1).leading_zeros()).max(1);
        if bits as usize * len > 64 {
            return Err(Error::Precondition(format!(
                "{len} entries over a ring of {ring_size} elements do not fit a 64-bit key"
            )));
        }
        Ok(KeyCodec { len, bits })
    }

    pub fn total_bits(&self) -> u32 {
        self.bits * self.len as u32
    }

    #[inline]
    pub fn encode(&self, e: &[Elem]) -> u64 {
        e.iter().fold(0u64, |k, &x| (k << self.bits) | x as u64)
    }

    #[inline]
    pub fn decode(&self, mut k: u64, out: &mut [Elem]) {
        let mask = (1u64 << self.bits) - 1;
        for slot in out.iter_mut().rev() {
            *slot = (k & mask) as Elem;
            k >>= self.bits;
        }
    }
}

enum Members {
    Bits(Vec<u64>),
    Hash(FxHashSet<u64>),
    /// Key to position in discovery order; needed for word lookup.
    Indexed(FxHashMap<u64, u32>),
}

impl Members {
    fn new(codec: &KeyCodec, indexed: bool) -> Self {
        if indexed {
            Members::Indexed(FxHashMap::default())
        } else if codec.total_bits() <= DENSE_KEY_BITS {
            Members::Bits(vec![0; (1usize << codec.total_bits()).div_ceil(64)])
        } else {
            Members::Hash(FxHashSet::default())
        }
    }

    #[inline]
    fn contains(&self, k: u64) -> bool {
        match self {
            Members::Bits(b) => b[(k >> 6) as usize] >> (k & 63) & 1 == 1,
            Members::Hash(h) => h.contains(&k),
            Members::Indexed(m) => m.contains_key(&k),
        }
    }

    /// Returns true when the key was new.
    #[inline]
    fn insert(&mut self, k: u64, pos: u32) -> bool {
        match self {
            Members::Bits(b) => {
                let w = &mut b[(k >> 6) as usize];
                let bit = 1u64 << (k & 63);
                let new = *w & bit == 0;
                *w |= bit;
                new
            }
            Members::Hash(h) => h.insert(k),
            Members::Indexed(m) => {
                if let std::collections::hash_map::Entry::Vacant(e) = m.entry(k) {
                    e.insert(pos);
                    true
                } else {
                    false
                }
            }
        }
    }
}

/// One letter of a word: generator index and exponent ±1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Letter {
    pub gen: u32,
    pub exp: i8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone)]
enum GenOp {
    Elem(ElemGen),
    Full(Vec<Elem>),
}

impl GenOp {
    fn of(ring: &FiniteRing, m: &Mat) -> Self {
        match m.as_elementary(ring) {
            Some(g) => GenOp::Elem(g),
            None => GenOp::Full(m.entries.clone()),
        }
    }

    #[inline]
    fn apply_right(&self, ring: &FiniteRing, n: usize, cur: &[Elem], out: &mut [Elem]) {
        match self {
            GenOp::Elem(g) => {
                out.copy_from_slice(cur);
                g.mul_right(ring, n, out);
            }
            GenOp::Full(m) => mul_into(ring, n, cur, m, out),
        }
    }
}

pub struct MatGroup {
    ring: Arc<FiniteRing>,
    n: usize,
    codec: KeyCodec,
    tag: String,
    generators: Vec<Mat>,
    order: Vec<u64>,
    members: Members,
    /// Parent position and generator index per element, when words are kept.
    words: Option<(Vec<u32>, Vec<u32>)>,
}

impl std::fmt::Debug for MatGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatGroup")
            .field("tag", &self.tag)
            .field("n", &self.n)
            .field("order", &self.order.len())
            .finish()
    }
}

fn budget_error(limit: usize, reached: usize) -> Error {
    Error::Budget {
        what: "group elements",
        limit: limit as u64,
        reached: reached as u64,
    }
}

impl MatGroup {
    /// Close `generators` under multiplication.
    ///
    /// With `record_words` the closure is a breadth-first search from the
    /// identity, so each element's recorded word is a shortest one, ties
    /// going to the lower generator index. Without words a coset-by-coset
    /// incremental closure is used: generators are added one at a time and
    /// those already present are skipped.
    pub fn closure(
        ring: &Arc<FiniteRing>,
        n: usize,
        generators: &[Mat],
        record_words: bool,
        budget: usize,
        tag: &str,
    ) -> Result<MatGroup> {
        for g in generators {
            if g.ring_id != ring.id() || g.n != n {
                return Err(Error::Mismatch("generator over a different ring or size".into()));
            }
            if !ring.is_unit(g.det(ring)) {
                return Err(Error::Precondition("generator is not invertible".into()));
            }
        }
        let codec = KeyCodec::new(ring.size(), n)?;
        let mut g = MatGroup {
            ring: ring.clone(),
            n,
            codec,
            tag: tag.to_string(),
            generators: generators.to_vec(),
            order: Vec::new(),
            members: Members::new(&codec, record_words),
            words: None,
        };
        let id = codec.encode(&Mat::identity(ring, n).entries);
        g.members.insert(id, 0);
        g.order.push(id);
        if record_words {
            g.bfs_with_words(budget)?;
        } else {
            g.incremental(budget)?;
        }
        Ok(g)
    }

    fn bfs_with_words(&mut self, budget: usize) -> Result<()> {
        let ring = self.ring.clone();
        let n = self.n;
        let ops: Vec<GenOp> = self.generators.iter().map(|m| GenOp::of(&ring, m)).collect();
        let mut parent = vec![u32::MAX];
        let mut via = vec![u32::MAX];
        let mut cur = vec![0; n * n];
        let mut next = vec![0; n * n];
        let mut i = 0;
        while i < self.order.len() {
            self.codec.decode(self.order[i], &mut cur);
            for (t, op) in ops.iter().enumerate() {
                op.apply_right(&ring, n, &cur, &mut next);
                let k = self.codec.encode(&next);
                if self.members.insert(k, self.order.len() as u32) {
                    self.order.push(k);
                    parent.push(i as u32);
                    via.push(t as u32);
                    if self.order.len() > budget {
                        return Err(budget_error(budget, self.order.len()));
                    }
                }
            }
            i += 1;
        }
        self.words = Some((parent, via));
        Ok(())
    }

    fn incremental(&mut self, budget: usize) -> Result<()> {
        let ring = self.ring.clone();
        let n = self.n;
        let mut active: Vec<GenOp> = Vec::new();
        let mut buf = vec![0; n * n];
        let mut h = vec![0; n * n];
        for gm in self.generators.clone() {
            if self.members.contains(self.codec.encode(&gm.entries)) {
                continue;
            }
            active.push(GenOp::of(&ring, &gm));
            let h_len = self.order.len();
            let mut reps: Vec<Vec<Elem>> = vec![Mat::identity(&ring, n).entries];
            let mut r = 0;
            while r < reps.len() {
                for op in &active {
                    op.apply_right(&ring, n, &reps[r], &mut buf);
                    if self.members.contains(self.codec.encode(&buf)) {
                        continue;
                    }
                    let c = buf.clone();
                    for idx in 0..h_len {
                        self.codec.decode(self.order[idx], &mut h);
                        mul_into(&ring, n, &h, &c, &mut buf);
                        let k = self.codec.encode(&buf);
                        let fresh = self.members.insert(k, self.order.len() as u32);
                        debug_assert!(fresh, "cosets are disjoint");
                        self.order.push(k);
                    }
                    if self.order.len() > budget {
                        return Err(budget_error(budget, self.order.len()));
                    }
                    reps.push(c);
                }
                r += 1;
            }
        }
        Ok(())
    }

    /// A group given directly by its element keys, without generators.
    pub fn from_keys(ring: &Arc<FiniteRing>, n: usize, tag: &str, generators: Vec<Mat>, keys: Vec<u64>) -> Result<MatGroup> {
        let codec = KeyCodec::new(ring.size(), n)?;
        let mut members = Members::new(&codec, false);
        for (i, &k) in keys.iter().enumerate() {
            members.insert(k, i as u32);
        }
        Ok(MatGroup {
            ring: ring.clone(),
            n,
            codec,
            tag: tag.to_string(),
            generators,
            order: keys,
            members,
            words: None,
        })
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn codec(&self) -> KeyCodec {
        self.codec
    }

    pub fn generators(&self) -> &[Mat] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn has_words(&self) -> bool {
        self.words.is_some()
    }

    #[inline]
    pub fn contains_entries(&self, e: &[Elem]) -> bool {
        self.members.contains(self.codec.encode(e))
    }

    pub fn contains(&self, m: &Mat) -> bool {
        m.ring_id == self.ring.id() && m.n == self.n && self.contains_entries(&m.entries)
    }

    /// Keys in discovery order.
    pub fn keys(&self) -> &[u64] {
        &self.order
    }

    pub fn sorted_keys(&self) -> Vec<u64> {
        let mut k = self.order.clone();
        k.sort_unstable();
        k
    }

    pub fn mat_of_key(&self, k: u64) -> Mat {
        let mut e = vec![0; self.n * self.n];
        self.codec.decode(k, &mut e);
        Mat {
            ring_id: self.ring.id(),
            n: self.n,
            entries: e,
        }
    }

    pub fn element(&self, i: usize) -> Mat {
        self.mat_of_key(self.order[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = Mat> + '_ {
        self.order.iter().map(|&k| self.mat_of_key(k))
    }

    /// A word over the generators evaluating to `g`.
    pub fn factorize(&self, g: &Mat) -> Result<Word> {
        let (parent, via) = self.words.as_ref().ok_or(Error::NoWords)?;
        let idx = match &self.members {
            Members::Indexed(m) => *m.get(&self.codec.encode(&g.entries)).ok_or(Error::NotInGroup)?,
            _ => return Err(Error::NoWords),
        };
        if !self.contains(g) {
            return Err(Error::NotInGroup);
        }
        let mut letters = Vec::new();
        let mut i = idx as usize;
        while i != 0 {
            letters.push(Letter {
                gen: via[i],
                exp: 1,
            });
            i = parent[i] as usize;
        }
        letters.reverse();
        Ok(Word(letters))
    }

    pub fn evaluate(&self, w: &Word) -> Result<Mat> {
        let mut m = Mat::identity(&self.ring, self.n);
        for l in &w.0 {
            let g = self
                .generators
                .get(l.gen as usize)
                .ok_or_else(|| Error::Mismatch(format!("no generator {}", l.gen)))?;
            let g = if l.exp >= 0 { g.clone() } else { self.inverse(g)? };
            m = m.mul(&self.ring, &g)?;
        }
        Ok(m)
    }

    /// Inverse of a member, found as a power (the group is finite).
    pub fn inverse(&self, g: &Mat) -> Result<Mat> {
        let id = Mat::identity(&self.ring, self.n);
        let mut prev = id.clone();
        let mut cur = g.clone();
        for _ in 0..=self.len().max(1) {
            if cur == id {
                return Ok(prev);
            }
            prev = cur.clone();
            cur = cur.mul(&self.ring, g)?;
        }
        Err(Error::Verification("element has no finite order".into()))
    }

    /// Closed under right multiplication by every generator.
    pub fn verify_closed(&self) -> bool {
        let ring = &self.ring;
        let n = self.n;
        let ops: Vec<GenOp> = self.generators.iter().map(|m| GenOp::of(ring, m)).collect();
        let mut cur = vec![0; n * n];
        let mut next = vec![0; n * n];
        self.order.iter().all(|&k| {
            self.codec.decode(k, &mut cur);
            ops.iter().all(|op| {
                op.apply_right(ring, n, &cur, &mut next);
                self.contains_entries(&next)
            })
        })
    }

    /// Same element set.
    pub fn same_elements(&self, other: &MatGroup) -> bool {
        self.len() == other.len()
            && self.ring.id() == other.ring.id()
            && self.n == other.n
            && self.order.iter().all(|&k| other.members.contains(k))
    }

    pub fn is_subset_of(&self, other: &MatGroup) -> bool {
        self.order.iter().all(|&k| other.members.contains(k))
    }

    /// `g·h·g⁻¹ ∈ self` for each `h` visited and each elementary `g`.
    /// Visits every element when `sample` is `None`, otherwise the given
    /// number of evenly spaced elements.
    pub fn normalized_by(&self, conj: &[ElemGen], sample: Option<usize>) -> bool {
        let ring = &self.ring;
        let n = self.n;
        let step = sample.map_or(1, |s| (self.len() / s.max(1)).max(1));
        let mut cur = vec![0; n * n];
        (0..self.len()).step_by(step).all(|i| {
            conj.iter().all(|g| {
                self.codec.decode(self.order[i], &mut cur);
                g.mul_left(ring, n, &mut cur);
                g.inverse(ring).mul_right(ring, n, &mut cur);
                self.contains_entries(&cur)
            })
        })
    }

    /// Every element is `≡ I` modulo the ideal.
    pub fn all_congruent(&self, ideal: &IdealHandle) -> bool {
        self.iter().all(|m| m.is_congruent_identity(&self.ring, |x| ideal.contains(x)))
    }

    /// Elements satisfying `keep`, as a set without generators.
    pub fn filter(&self, tag: &str, keep: impl Fn(&Mat) -> bool) -> Result<MatGroup> {
        let keys = self
            .order
            .iter()
            .copied()
            .filter(|&k| keep(&self.mat_of_key(k)))
            .collect();
        MatGroup::from_keys(&self.ring, self.n, tag, Vec::new(), keys)
    }
}

/// All `E_ij(λ)` with `λ` ranging over `lambdas`, ordered by `(i, j, λ)`.
pub fn elementary_generators(n: usize, lambdas: &[Elem]) -> Vec<ElemGen> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                for &l in lambdas {
                    if l != 0 {
                        out.push(ElemGen::new(i, j, l));
                    }
                }
            }
        }
    }
    out
}

fn to_mats(ring: &FiniteRing, n: usize, gens: &[ElemGen]) -> Vec<Mat> {
    gens.iter().map(|g| g.to_mat(ring, n)).collect()
}

/// `E_n(R)`. With words the generators are all `E_ij(λ)`, `λ ≠ 0`;
/// otherwise `λ` runs over an additive generating set, which yields the
/// same group.
pub fn elementary_group(ring: &Arc<FiniteRing>, n: usize, record_words: bool, budget: usize) -> Result<MatGroup> {
    let lambdas: Vec<Elem> = if record_words {
        ring.elements().collect()
    } else {
        ring.additive_generators().to_vec()
    };
    let gens = to_mats(ring, n, &elementary_generators(n, &lambdas));
    MatGroup::closure(ring, n, &gens, record_words, budget, "E")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelMethod {
    /// Closure of the conjugates `g E_21(x) g⁻¹`.
    NormalClosure,
    /// `E¹_n(R, I)` cut down to the matrices congruent to `I` mod `I`.
    Intersection,
    /// Closure of `E_ij(a) E_ji(x) E_ij(−a)`.
    ZGenerators,
}

impl RelMethod {
    pub fn name(self) -> &'static str {
        match self {
            RelMethod::NormalClosure => "normal_closure",
            RelMethod::Intersection => "intersection",
            RelMethod::ZGenerators => "z_generators",
        }
    }
}

/// The orbit of `seeds` under conjugation by the given transvections.
///
/// The orbit under a generating set of `E_n(R)` is the full conjugacy
/// orbit under `E_n(R)`, so the group need not be materialized.
pub fn conjugation_orbit(
    ring: &Arc<FiniteRing>,
    n: usize,
    seeds: &[Mat],
    conj: &[ElemGen],
    budget: usize,
) -> Result<Vec<Mat>> {
    let codec = KeyCodec::new(ring.size(), n)?;
    let mut seen = FxHashSet::default();
    let mut order: Vec<Vec<Elem>> = Vec::new();
    for s in seeds {
        if seen.insert(codec.encode(&s.entries)) {
            order.push(s.entries.clone());
        }
    }
    let inverses: Vec<ElemGen> = conj.iter().map(|g| g.inverse(ring)).collect();
    let mut i = 0;
    while i < order.len() {
        for (g, gi) in conj.iter().zip(&inverses) {
            let mut x = order[i].clone();
            g.mul_left(ring, n, &mut x);
            gi.mul_right(ring, n, &mut x);
            if seen.insert(codec.encode(&x)) {
                order.push(x);
                if order.len() > budget {
                    return Err(budget_error(budget, order.len()));
                }
            }
        }
        i += 1;
    }
    Ok(order
        .into_iter()
        .map(|entries| Mat {
            ring_id: ring.id(),
            n,
            entries,
        })
        .collect())
}

/// Generators `E_ij(a) E_ji(x) E_ij(−a)` for `x` in an additive generating
/// set of `I`, `a ∈ R`, deduplicated in order of first appearance.
pub fn z_generators(ring: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize) -> Vec<Mat> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for &x in ideal.additive_generators() {
                for a in ring.elements() {
                    let mut m = ElemGen::new(j, i, x).to_mat(ring, n).entries;
                    ElemGen::new(i, j, a).mul_left(ring, n, &mut m);
                    ElemGen::new(i, j, ring.neg(a)).mul_right(ring, n, &mut m);
                    if seen.insert(m.clone()) {
                        out.push(Mat {
                            ring_id: ring.id(),
                            n,
                            entries: m,
                        });
                    }
                }
            }
        }
    }
    out
}

/// `E_n(R, I)` by the chosen construction.
pub fn relative_elementary_group(
    ring: &Arc<FiniteRing>,
    ideal: &IdealHandle,
    n: usize,
    method: RelMethod,
    budget: usize,
) -> Result<MatGroup> {
    if ideal.ring().id() != ring.id() {
        return Err(Error::Mismatch("ideal lives in another ring".into()));
    }
    let tag = format!("E_rel/{}/{}", method.name(), ideal.label());
    match method {
        RelMethod::NormalClosure => {
            let seeds: Vec<Mat> = ideal
                .additive_generators()
                .iter()
                .map(|&x| Mat::elementary(ring, n, 1, 0, x))
                .collect();
            let conj = elementary_generators(n, ring.additive_generators());
            let gens = conjugation_orbit(ring, n, &seeds, &conj, budget)?;
            MatGroup::closure(ring, n, &gens, false, budget, &tag)
        }
        RelMethod::Intersection => {
            let mut gens = Vec::new();
            for i in 1..n {
                for &a in ring.additive_generators() {
                    gens.push(Mat::elementary(ring, n, 0, i, a));
                }
                for &x in ideal.additive_generators() {
                    gens.push(Mat::elementary(ring, n, i, 0, x));
                }
            }
            let e1 = MatGroup::closure(ring, n, &gens, false, budget, "E1")?;
            e1.filter(&tag, |m| m.is_congruent_identity(ring, |x| ideal.contains(x)))
        }
        RelMethod::ZGenerators => {
            let gens = z_generators(ring, ideal, n);
            MatGroup::closure(ring, n, &gens, false, budget, &tag)
        }
    }
}

/// The group generated by `E_ki(a)`, `a ∈ R`, and `E_ik(x)`, `x ∈ I`,
/// with words. Generators are listed `E_ki` first, then `E_ik`, each by
/// `(i, value)`.
pub fn ek_group(ring: &Arc<FiniteRing>, ideal: &IdealHandle, n: usize, k: usize, budget: usize) -> Result<MatGroup> {
    let mut gens = Vec::new();
    for i in (0..n).filter(|&i| i != k) {
        for a in ring.elements().filter(|&a| a != 0) {
            gens.push(Mat::elementary(ring, n, k, i, a));
        }
    }
    for i in (0..n).filter(|&i| i != k) {
        for &x in ideal.members().iter().filter(|&&x| x != 0) {
            gens.push(Mat::elementary(ring, n, i, k, x));
        }
    }
    MatGroup::closure(ring, n, &gens, true, budget, &format!("E^{}", k + 1))
}

/// Allowed values per entry for matrices `≡ I` mod `I`: `1 + I` on the
/// diagonal and `I` off it.
fn coset_choices(ideal: &IdealHandle, n: usize) -> Vec<Vec<Elem>> {
    let diag = ideal.one_plus();
    (0..n * n)
        .map(|p| if p / n == p % n { diag.clone() } else { ideal.members().to_vec() })
        .collect()
}

/// Sizes of `SL_n(R, I)` and `GL_n(R, I)`.
///
/// The determinant is linear in the last row, so for each choice of the
/// first `n − 1` rows the number of completing last rows is read off a
/// value histogram of the cofactor form.
pub fn congruence_counts(ideal: &IdealHandle, n: usize, candidate_budget: u64) -> Result<(u64, u64)> {
    let ring = ideal.ring();
    let choices = coset_choices(ideal, n);
    let head = n * (n - 1);
    let combos = (ideal.len() as u64).checked_pow(head as u32).unwrap_or(u64::MAX);
    if combos > candidate_budget {
        return Err(Error::Budget {
            what: "congruence candidates",
            limit: candidate_budget,
            reached: combos,
        });
    }
    let size = ring.size();
    let mut idx = vec![0usize; head];
    let mut m = vec![0 as Elem; n * n];
    let (mut sl, mut gl) = (0u64, 0u64);
    let mut minor = vec![0 as Elem; (n - 1) * (n - 1)];
    loop {
        for p in 0..head {
            m[p] = choices[p][idx[p]];
        }
        // Cofactors of the last row.
        let mut cof = vec![0 as Elem; n];
        for (j, c) in cof.iter_mut().enumerate() {
            for r in 0..n - 1 {
                let mut t = 0;
                for col in (0..n).filter(|&col| col != j) {
                    minor[r * (n - 1) + t] = m[r * n + col];
                    t += 1;
                }
            }
            let d = det_entries(ring, n - 1, &minor);
            *c = if (n - 1 + j).is_multiple_of(2) { d } else { ring.neg(d) };
        }
        let mut dist = vec![0u64; size];
        dist[0] = 1;
        for (j, &c) in cof.iter().enumerate() {
            let mut next = vec![0u64; size];
            for (v, &cnt) in dist.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                for &x in &choices[head + j] {
                    next[ring.add(v as Elem, ring.mul(c, x)) as usize] += cnt;
                }
            }
            dist = next;
        }
        sl += dist[ring.one() as usize];
        gl += ring.units().iter().map(|&u| dist[u as usize]).sum::<u64>();
        // Next head in lexicographic order.
        let mut p = head;
        loop {
            if p == 0 {
                return Ok((sl, gl));
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

/// `SL_n(R, I)` and `GL_n(R, I)` as element sets, by enumerating the
/// matrices congruent to the identity.
pub fn congruence_groups(ideal: &IdealHandle, n: usize, budget: usize) -> Result<(MatGroup, MatGroup)> {
    let ring = ideal.ring();
    let choices = coset_choices(ideal, n);
    let total = (ideal.len() as u64).checked_pow((n * n) as u32).unwrap_or(u64::MAX);
    if total > budget as u64 * 16 {
        return Err(Error::Budget {
            what: "congruence candidates",
            limit: budget as u64 * 16,
            reached: total,
        });
    }
    let codec = KeyCodec::new(ring.size(), n)?;
    let mut idx = vec![0usize; n * n];
    let mut m = vec![0 as Elem; n * n];
    let (mut sl, mut gl) = (Vec::new(), Vec::new());
    loop {
        for p in 0..n * n {
            m[p] = choices[p][idx[p]];
        }
        let d = det_entries(ring, n, &m);
        if ring.is_unit(d) {
            let k = codec.encode(&m);
            gl.push(k);
            if d == ring.one() {
                sl.push(k);
            }
            if gl.len() > budget {
                return Err(budget_error(budget, gl.len()));
            }
        }
        let mut p = n * n;
        loop {
            if p == 0 {
                let tag = ideal.label();
                return Ok((
                    MatGroup::from_keys(ring, n, &format!("SL/{tag}"), Vec::new(), sl)?,
                    MatGroup::from_keys(ring, n, &format!("GL/{tag}"), Vec::new(), gl)?,
                ));
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
