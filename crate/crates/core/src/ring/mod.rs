//! Finite commutative rings with identity.
//!
//! Elements are indices `0..size`. Every constructor orders its elements
//! lexicographically on component indices, first component most significant,
//! so the zero element is always index 0.

mod construct;
mod hom;
mod ideal;
mod spec;

use std::sync::Arc;

pub use construct::{
    all_ideals, double_ring, excision_ring, iso_double_excision, local_structure, make_ring,
    quotient_ring, zmodel_excision, DoubleRing, ExcisionRing, QuotientRing, ZModel,
};
pub use hom::RingHom;
pub use ideal::{ideal_generate, IdealHandle};
pub use spec::{ElemLit, RingSpec};

use crate::{Error, Result};
use spec::{split_top_level, strip_delims};

pub type Elem = u16;

pub const DEFAULT_RING_BUDGET: usize = 4096;
/// Rings up to this size keep dense operation tables.
pub const DENSE_LIMIT: usize = 256;
const NO_INV: Elem = Elem::MAX;

#[derive(Debug)]
pub(crate) enum Repr {
    ZMod {
        n: u32,
    },
    Product {
        factors: Vec<Arc<FiniteRing>>,
    },
    Poly {
        base: Arc<FiniteRing>,
        /// Non-leading coefficients of the monic modulus, constant term first.
        modulus: Vec<Elem>,
    },
    Quotient {
        base: Arc<FiniteRing>,
        class_of: Vec<Elem>,
        reps: Vec<Elem>,
    },
    /// Shared by the excision ring `R ⊕ I` and its integer model `(Z/k) ⊕ I`.
    Pair {
        base: Arc<FiniteRing>,
        /// `None` for `R ⊕ I`, `Some(k)` for `(Z/k) ⊕ I`.
        zmod: Option<u32>,
        members: Vec<Elem>,
        pos: Vec<Elem>,
    },
    Double {
        base: Arc<FiniteRing>,
        /// Sorted members of the ideal; the `b` in `(a, b)` ranges over `a + I`.
        members: Vec<Elem>,
    },
}

struct Tables {
    add: Vec<Elem>,
    mul: Vec<Elem>,
}

pub struct FiniteRing {
    spec: RingSpec,
    hash: [u8; 32],
    size: usize,
    one: Elem,
    characteristic: u64,
    repr: Repr,
    tables: Option<Tables>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
    masks: Vec<u64>,
    full_mask: u64,
    prim_idem: Vec<Elem>,
    add_gens: Vec<Elem>,
}

impl std::fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteRing")
            .field("spec", &self.spec.canonical_json())
            .field("size", &self.size)
            .finish()
    }
}

fn mixed_radix_decode(mut x: usize, radix: &[usize], out: &mut [Elem]) {
    for k in (0..radix.len()).rev() {
        out[k] = (x % radix[k]) as Elem;
        x /= radix[k];
    }
}

fn mixed_radix_encode(digits: &[Elem], radix: &[usize]) -> usize {
    digits
        .iter()
        .zip(radix)
        .fold(0usize, |acc, (&d, &r)| acc * r + d as usize)
}

impl Repr {
    fn size(&self) -> usize {
        match self {
            Repr::ZMod { n } => *n as usize,
            Repr::Product { factors } => factors.iter().map(|f| f.size).product(),
            Repr::Poly { base, modulus } => base.size.pow(modulus.len() as u32),
            Repr::Quotient { reps, .. } => reps.len(),
            Repr::Pair {
                base,
                zmod,
                members,
                ..
            } => zmod.map_or(base.size, |k| k as usize) * members.len(),
            Repr::Double { base, members } => base.size * members.len(),
        }
    }

    fn one(&self) -> Elem {
        match self {
            Repr::ZMod { n } => (1 % n) as Elem,
            Repr::Product { factors } => {
                let radix: Vec<usize> = factors.iter().map(|f| f.size).collect();
                let digits: Vec<Elem> = factors.iter().map(|f| f.one).collect();
                mixed_radix_encode(&digits, &radix) as Elem
            }
            Repr::Poly { base, modulus } => {
                let d = modulus.len();
                let mut c = vec![0; d];
                c[0] = base.one;
                mixed_radix_encode(&c, &vec![base.size; d]) as Elem
            }
            Repr::Quotient {
                base, class_of, ..
            } => class_of[base.one as usize],
            Repr::Pair {
                base,
                zmod,
                members,
                pos,
            } => {
                let first = match zmod {
                    None => base.one as usize,
                    Some(k) => (1 % k) as usize,
                };
                (first * members.len() + pos[0] as usize) as Elem
            }
            Repr::Double { base, .. } => self.double_index(base.one, base.one),
        }
    }

    fn double_index(&self, a: Elem, b: Elem) -> Elem {
        match self {
            Repr::Double { base, members } => {
                // b runs over the coset a + I, ordered by b itself.
                let mut coset: Vec<Elem> = members.iter().map(|&i| base.add(a, i)).collect();
                coset.sort_unstable();
                let k = coset.binary_search(&b).expect("double pair congruent");
                (a as usize * members.len() + k) as Elem
            }
            _ => unreachable!(),
        }
    }

    fn double_decode(&self, x: Elem) -> (Elem, Elem) {
        match self {
            Repr::Double { base, members } => {
                let m = members.len();
                let a = (x as usize / m) as Elem;
                let mut coset: Vec<Elem> = members.iter().map(|&i| base.add(a, i)).collect();
                coset.sort_unstable();
                (a, coset[x as usize % m])
            }
            _ => unreachable!(),
        }
    }

    fn add(&self, a: Elem, b: Elem) -> Elem {
        match self {
            Repr::ZMod { n } => ((a as u32 + b as u32) % n) as Elem,
            Repr::Product { factors } => self.product_op(a, b, |f, x, y| f.add(x, y), factors),
            Repr::Poly { base, modulus } => {
                let d = modulus.len();
                let radix = vec![base.size; d];
                let (mut x, mut y) = (vec![0; d], vec![0; d]);
                mixed_radix_decode(a as usize, &radix, &mut x);
                mixed_radix_decode(b as usize, &radix, &mut y);
                for k in 0..d {
                    x[k] = base.add(x[k], y[k]);
                }
                mixed_radix_encode(&x, &radix) as Elem
            }
            Repr::Quotient {
                base,
                class_of,
                reps,
            } => class_of[base.add(reps[a as usize], reps[b as usize]) as usize],
            Repr::Pair {
                base,
                zmod,
                members,
                pos,
            } => {
                let m = members.len();
                let (r, i) = (a as usize / m, members[a as usize % m]);
                let (s, j) = (b as usize / m, members[b as usize % m]);
                let first = match zmod {
                    None => base.add(r as Elem, s as Elem) as usize,
                    Some(k) => (r + s) % *k as usize,
                };
                (first * m + pos[base.add(i, j) as usize] as usize) as Elem
            }
            Repr::Double { base, .. } => {
                let (a1, a2) = self.double_decode(a);
                let (b1, b2) = self.double_decode(b);
                self.double_index(base.add(a1, b1), base.add(a2, b2))
            }
        }
    }

    fn mul(&self, a: Elem, b: Elem) -> Elem {
        match self {
            Repr::ZMod { n } => ((a as u32 * b as u32) % n) as Elem,
            Repr::Product { factors } => self.product_op(a, b, |f, x, y| f.mul(x, y), factors),
            Repr::Poly { base, modulus } => {
                let d = modulus.len();
                let radix = vec![base.size; d];
                let (mut x, mut y) = (vec![0; d], vec![0; d]);
                mixed_radix_decode(a as usize, &radix, &mut x);
                mixed_radix_decode(b as usize, &radix, &mut y);
                let mut prod = vec![0 as Elem; 2 * d - 1];
                for i in 0..d {
                    for j in 0..d {
                        prod[i + j] = base.add(prod[i + j], base.mul(x[i], y[j]));
                    }
                }
                // x^d = -(m_0 + m_1 x + ... + m_{d-1} x^{d-1})
                for t in (d..2 * d - 1).rev() {
                    let c = prod[t];
                    if c == 0 {
                        continue;
                    }
                    prod[t] = 0;
                    for (k, &m) in modulus.iter().enumerate() {
                        let idx = t - d + k;
                        prod[idx] = base.sub(prod[idx], base.mul(c, m));
                    }
                }
                mixed_radix_encode(&prod[..d], &radix) as Elem
            }
            Repr::Quotient {
                base,
                class_of,
                reps,
            } => class_of[base.mul(reps[a as usize], reps[b as usize]) as usize],
            Repr::Pair {
                base,
                zmod,
                members,
                pos,
            } => {
                let m = members.len();
                let (r, i) = (a as usize / m, members[a as usize % m]);
                let (s, j) = (b as usize / m, members[b as usize % m]);
                let (first, rj, si) = match zmod {
                    None => (
                        base.mul(r as Elem, s as Elem) as usize,
                        base.mul(r as Elem, j),
                        base.mul(s as Elem, i),
                    ),
                    Some(k) => (
                        (r * s) % *k as usize,
                        base.mul(base.int(r as i64), j),
                        base.mul(base.int(s as i64), i),
                    ),
                };
                let second = base.add(base.add(rj, si), base.mul(i, j));
                (first * m + pos[second as usize] as usize) as Elem
            }
            Repr::Double { base, .. } => {
                let (a1, a2) = self.double_decode(a);
                let (b1, b2) = self.double_decode(b);
                self.double_index(base.mul(a1, b1), base.mul(a2, b2))
            }
        }
    }

    fn neg(&self, a: Elem) -> Elem {
        match self {
            Repr::ZMod { n } => ((*n - a as u32) % n) as Elem,
            Repr::Product { factors } => self.product_op(a, a, |f, x, _| f.neg(x), factors),
            Repr::Poly { base, modulus } => {
                let d = modulus.len();
                let radix = vec![base.size; d];
                let mut x = vec![0; d];
                mixed_radix_decode(a as usize, &radix, &mut x);
                for c in x.iter_mut() {
                    *c = base.neg(*c);
                }
                mixed_radix_encode(&x, &radix) as Elem
            }
            Repr::Quotient {
                base,
                class_of,
                reps,
            } => class_of[base.neg(reps[a as usize]) as usize],
            Repr::Pair {
                base,
                zmod,
                members,
                pos,
            } => {
                let m = members.len();
                let (r, i) = (a as usize / m, members[a as usize % m]);
                let first = match zmod {
                    None => base.neg(r as Elem) as usize,
                    Some(k) => (*k as usize - r) % *k as usize,
                };
                (first * m + pos[base.neg(i) as usize] as usize) as Elem
            }
            Repr::Double { base, .. } => {
                let (a1, a2) = self.double_decode(a);
                self.double_index(base.neg(a1), base.neg(a2))
            }
        }
    }

    fn product_op(
        &self,
        a: Elem,
        b: Elem,
        op: impl Fn(&FiniteRing, Elem, Elem) -> Elem,
        factors: &[Arc<FiniteRing>],
    ) -> Elem {
        let radix: Vec<usize> = factors.iter().map(|f| f.size).collect();
        let k = factors.len();
        let (mut x, mut y) = (vec![0; k], vec![0; k]);
        mixed_radix_decode(a as usize, &radix, &mut x);
        mixed_radix_decode(b as usize, &radix, &mut y);
        for t in 0..k {
            x[t] = op(&factors[t], x[t], y[t]);
        }
        mixed_radix_encode(&x, &radix) as Elem
    }
}

impl FiniteRing {
    /// Realize a ring from its structural description: tables, units, the
    /// maximal-ideal masks and an additive generating set.
    pub(crate) fn realize(spec: RingSpec, repr: Repr) -> Result<Arc<FiniteRing>> {
        let size = repr.size();
        if size == 0 || size > Elem::MAX as usize {
            return Err(Error::Spec(format!("ring of size {size} not representable")));
        }
        let hash = spec.hash();
        let one = repr.one();
        let mut ring = FiniteRing {
            spec,
            hash,
            size,
            one,
            characteristic: 0,
            repr,
            tables: None,
            neg: Vec::new(),
            inv: Vec::new(),
            masks: Vec::new(),
            full_mask: 0,
            prim_idem: Vec::new(),
            add_gens: Vec::new(),
        };
        if size <= DENSE_LIMIT {
            let mut add = vec![0; size * size];
            let mut mul = vec![0; size * size];
            for a in 0..size {
                for b in 0..size {
                    add[a * size + b] = ring.repr.add(a as Elem, b as Elem);
                    mul[a * size + b] = ring.repr.mul(a as Elem, b as Elem);
                }
            }
            ring.tables = Some(Tables { add, mul });
        }
        ring.neg = (0..size).map(|a| ring.repr.neg(a as Elem)).collect();

        let mut c = 1u64;
        let mut x = one;
        while x != 0 {
            x = ring.add(x, one);
            c += 1;
        }
        ring.characteristic = c;

        ring.inv = vec![NO_INV; size];
        for a in 0..size as Elem {
            if ring.inv[a as usize] != NO_INV {
                continue;
            }
            for b in 0..size as Elem {
                if ring.mul(a, b) == one {
                    ring.inv[a as usize] = b;
                    ring.inv[b as usize] = a;
                    break;
                }
            }
        }

        let idem: Vec<Elem> = (1..size as Elem).filter(|&e| ring.mul(e, e) == e).collect();
        ring.prim_idem = idem
            .iter()
            .copied()
            .filter(|&e| idem.iter().all(|&f| f == e || ring.mul(f, e) != f))
            .collect();
        if ring.prim_idem.len() > 64 {
            return Err(Error::Spec("more than 64 maximal ideals".into()));
        }
        ring.full_mask = if ring.prim_idem.len() == 64 {
            u64::MAX
        } else {
            (1u64 << ring.prim_idem.len()) - 1
        };
        let mut masks = vec![0u64; size];
        for (k, &e) in ring.prim_idem.iter().enumerate() {
            let comp = ring.sub(one, e);
            for (x, mask) in masks.iter_mut().enumerate() {
                let u = ring.add(ring.mul(x as Elem, e), comp);
                if ring.inv[u as usize] != NO_INV {
                    *mask |= 1 << k;
                }
            }
        }
        ring.masks = masks;

        let mut span = vec![false; size];
        span[0] = true;
        let mut list = vec![0 as Elem];
        for x in 0..size as Elem {
            if span[x as usize] {
                continue;
            }
            ring.add_gens.push(x);
            let current = list.clone();
            for s in current {
                let mut t = ring.add(s, x);
                while !span[t as usize] {
                    span[t as usize] = true;
                    list.push(t);
                    t = ring.add(t, x);
                }
            }
        }
        Ok(Arc::new(ring))
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn hash(&self) -> [u8; 32] {
        self.hash
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash)
    }

    /// Short identity used to tag matrices.
    pub fn id(&self) -> u64 {
        u64::from_le_bytes(self.hash[..8].try_into().unwrap())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.size as Elem
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        self.one
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn is_dense(&self) -> bool {
        self.tables.is_some()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.tables {
            Some(t) => t.add[a as usize * self.size + b as usize],
            None => self.repr.add(a, b),
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.tables {
            Some(t) => t.mul[a as usize * self.size + b as usize],
            None => self.repr.mul(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    /// Operations computed structurally, bypassing the dense tables.
    pub fn add_structural(&self, a: Elem, b: Elem) -> Elem {
        self.repr.add(a, b)
    }

    pub fn mul_structural(&self, a: Elem, b: Elem) -> Elem {
        self.repr.mul(a, b)
    }

    pub fn is_unit(&self, a: Elem) -> bool {
        self.inv[a as usize] != NO_INV
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        let i = self.inv[a as usize];
        (i != NO_INV).then_some(i)
    }

    pub fn units(&self) -> Vec<Elem> {
        self.elements().filter(|&a| self.is_unit(a)).collect()
    }

    /// The integer `k` as `k·1`.
    pub fn int(&self, k: i64) -> Elem {
        let c = self.characteristic as i64;
        let mut m = k.rem_euclid(c);
        let mut acc = 0;
        let mut base = self.one;
        while m > 0 {
            if m & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            m >>= 1;
        }
        acc
    }

    /// `k·x` as an iterated sum.
    pub fn zmul(&self, k: i64, x: Elem) -> Elem {
        self.mul(self.int(k), x)
    }

    pub fn pow(&self, x: Elem, e: u32) -> Elem {
        (0..e).fold(self.one, |acc, _| self.mul(acc, x))
    }

    pub fn sum(&self, xs: impl IntoIterator<Item = Elem>) -> Elem {
        xs.into_iter().fold(0, |acc, x| self.add(acc, x))
    }

    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Elem {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    pub fn num_maximal_ideals(&self) -> usize {
        self.prim_idem.len()
    }

    pub fn primitive_idempotents(&self) -> &[Elem] {
        &self.prim_idem
    }

    /// Bit `k` is set when `x` lies outside the `k`-th maximal ideal.
    #[inline]
    pub fn mask(&self, x: Elem) -> u64 {
        self.masks[x as usize]
    }

    pub fn full_mask(&self) -> u64 {
        self.full_mask
    }

    /// The ideal generated by `xs` is the whole ring.
    #[inline]
    pub fn is_unimodular(&self, xs: &[Elem]) -> bool {
        xs.iter().fold(0, |m, &x| m | self.masks[x as usize]) == self.full_mask
    }

    /// `x` is a unit modulo the ideal generated by `gens`.
    pub fn is_unit_mod(&self, x: Elem, gens: &[Elem]) -> bool {
        gens.iter().fold(self.masks[x as usize], |m, &g| m | self.masks[g as usize])
            == self.full_mask
    }

    /// A minimal additive generating set, chosen greedily by index.
    pub fn additive_generators(&self) -> &[Elem] {
        &self.add_gens
    }

    /// A certificate `w` with `v · w = 1`. Built componentwise from the
    /// primitive idempotents: for each local factor pick the first entry
    /// that is a unit there and invert it in that factor.
    pub fn certificate(&self, v: &[Elem]) -> Option<Vec<Elem>> {
        if let Some((i, inv)) = v.iter().enumerate().find_map(|(i, &x)| self.inv(x).map(|y| (i, y))) {
            let mut w = vec![0; v.len()];
            w[i] = inv;
            return Some(w);
        }
        if !self.is_unimodular(v) {
            return None;
        }
        let mut w = vec![0; v.len()];
        for (k, &e) in self.prim_idem.iter().enumerate() {
            let i = v.iter().position(|&x| self.mask(x) >> k & 1 == 1)?;
            let u = self.add(self.mul(v[i], e), self.sub(self.one, e));
            let y = self.mul(self.inv(u)?, e);
            w[i] = self.add(w[i], y);
        }
        debug_assert_eq!(self.dot(v, &w), self.one);
        Some(w)
    }

    /// Find `c_k` drawn from `allowed_k` with `Σ v_k c_k = target`.
    ///
    /// Dynamic programming over reachable partial sums. Prior sums are
    /// scanned in index order and coefficients in the given order, and the
    /// first path to reach a sum is kept, so the answer is deterministic.
    pub fn solve_combination(
        &self,
        target: Elem,
        terms: &[(Elem, &[Elem])],
    ) -> Option<Vec<Elem>> {
        let n = self.size;
        let k = terms.len();
        // back[t][s] = (previous sum, coefficient) for stage t.
        let mut back: Vec<Vec<(Elem, Elem)>> = Vec::with_capacity(k);
        let mut reached = vec![false; n];
        reached[0] = true;
        const UNSET: (Elem, Elem) = (Elem::MAX, Elem::MAX);
        for &(v, allowed) in terms {
            let mut seen = vec![false; n];
            let mut prods = Vec::new();
            for &c in allowed {
                let p = self.mul(v, c);
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    prods.push((p, c));
                }
            }
            let mut stage = vec![UNSET; n];
            let mut next = vec![false; n];
            for s in 0..n {
                if !reached[s] {
                    continue;
                }
                for &(p, c) in &prods {
                    let t = self.add(s as Elem, p) as usize;
                    if !next[t] {
                        next[t] = true;
                        stage[t] = (s as Elem, c);
                    }
                }
            }
            back.push(stage);
            reached = next;
        }
        if !reached[target as usize] {
            return None;
        }
        let mut out = vec![0; k];
        let mut s = target;
        for t in (0..k).rev() {
            let (prev, c) = back[t][s as usize];
            out[t] = c;
            s = prev;
        }
        Some(out)
    }

    /// Parse an element literal in this ring's syntax.
    pub fn parse_lit(&self, lit: &ElemLit) -> Result<Elem> {
        match lit {
            ElemLit::Int(k) => Ok(self.int(*k)),
            ElemLit::Str(s) => self.parse(s),
        }
    }

    /// Element syntax: an integer `k` means `k·1`; products, excision
    /// rings and doubles use tuples `(x, y, ...)`; polynomial quotients use
    /// coefficient lists `[c0, c1, ...]`; quotients use the base syntax.
    pub fn parse(&self, s: &str) -> Result<Elem> {
        let s = s.trim();
        let bad = |reason: &str| Error::ElementSyntax {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        if let Ok(k) = s.parse::<i64>() {
            return Ok(self.int(k));
        }
        match &self.repr {
            Repr::ZMod { .. } => Err(bad("expected an integer")),
            Repr::Product { factors } => {
                let inner = strip_delims(s, '(', ')').ok_or_else(|| bad("expected a tuple"))?;
                let parts = split_top_level(inner).ok_or_else(|| bad("unbalanced brackets"))?;
                if parts.len() != factors.len() {
                    return Err(bad(&format!("expected {} components", factors.len())));
                }
                let mut digits = Vec::with_capacity(parts.len());
                for (f, p) in factors.iter().zip(parts) {
                    digits.push(f.parse(p)?);
                }
                let radix: Vec<usize> = factors.iter().map(|f| f.size).collect();
                Ok(mixed_radix_encode(&digits, &radix) as Elem)
            }
            Repr::Poly { base, modulus } => {
                let inner = strip_delims(s, '[', ']').ok_or_else(|| bad("expected a coefficient list"))?;
                let parts = split_top_level(inner).ok_or_else(|| bad("unbalanced brackets"))?;
                let d = modulus.len();
                if parts.len() > d {
                    return Err(bad(&format!("at most {d} coefficients")));
                }
                let mut c = vec![0; d];
                for (slot, p) in c.iter_mut().zip(parts) {
                    *slot = base.parse(p)?;
                }
                Ok(mixed_radix_encode(&c, &vec![base.size; d]) as Elem)
            }
            Repr::Quotient { base, class_of, .. } => Ok(class_of[base.parse(s)? as usize]),
            Repr::Pair {
                base,
                zmod,
                members,
                pos,
            } => {
                let (x, y) = self.parse_pair(s)?;
                let first = match zmod {
                    None => base.parse(x)? as usize,
                    Some(k) => {
                        let m: i64 = x.parse().map_err(|_| bad("expected an integer first component"))?;
                        m.rem_euclid(*k as i64) as usize
                    }
                };
                let i = base.parse(y)?;
                if pos[i as usize] == NO_INV {
                    return Err(bad("second component not in the ideal"));
                }
                Ok((first * members.len() + pos[i as usize] as usize) as Elem)
            }
            Repr::Double { base, members } => {
                let (x, y) = self.parse_pair(s)?;
                let (a, b) = (base.parse(x)?, base.parse(y)?);
                if members.binary_search(&base.sub(b, a)).is_err() {
                    return Err(bad("components not congruent modulo the ideal"));
                }
                Ok(self.repr.double_index(a, b))
            }
        }
    }

    fn parse_pair<'a>(&self, s: &'a str) -> Result<(&'a str, &'a str)> {
        let bad = |reason: &str| Error::ElementSyntax {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let inner = strip_delims(s, '(', ')').ok_or_else(|| bad("expected a pair"))?;
        let parts = split_top_level(inner).ok_or_else(|| bad("unbalanced brackets"))?;
        match parts.as_slice() {
            [x, y] => Ok((x, y)),
            _ => Err(bad("expected exactly two components")),
        }
    }

    pub fn check_elem(&self, x: usize) -> Result<Elem> {
        if x < self.size {
            Ok(x as Elem)
        } else {
            Err(Error::ElementRange {
                index: x,
                size: self.size,
            })
        }
    }

    pub fn format(&self, x: Elem) -> String {
        match &self.repr {
            Repr::ZMod { .. } => x.to_string(),
            Repr::Product { factors } => {
                let radix: Vec<usize> = factors.iter().map(|f| f.size).collect();
                let mut d = vec![0; factors.len()];
                mixed_radix_decode(x as usize, &radix, &mut d);
                let parts: Vec<String> = factors.iter().zip(d).map(|(f, e)| f.format(e)).collect();
                format!("({})", parts.join(", "))
            }
            Repr::Poly { base, modulus } => {
                let dg = modulus.len();
                let mut c = vec![0; dg];
                mixed_radix_decode(x as usize, &vec![base.size; dg], &mut c);
                let parts: Vec<String> = c.iter().map(|&e| base.format(e)).collect();
                format!("[{}]", parts.join(", "))
            }
            Repr::Quotient { base, reps, .. } => base.format(reps[x as usize]),
            Repr::Pair {
                base,
                zmod,
                members,
                ..
            } => {
                let m = members.len();
                let r = x as usize / m;
                let first = match zmod {
                    None => base.format(r as Elem),
                    Some(_) => r.to_string(),
                };
                format!("({}, {})", first, base.format(members[x as usize % m]))
            }
            Repr::Double { base, .. } => {
                let (a, b) = self.repr.double_decode(x);
                format!("({}, {})", base.format(a), base.format(b))
            }
        }
    }

    /// Report form of an element: a number over `Z/n`, a string otherwise.
    pub fn elem_json(&self, x: Elem) -> serde_json::Value {
        match &self.repr {
            Repr::ZMod { .. } => serde_json::Value::from(x),
            _ => serde_json::Value::from(self.format(x)),
        }
    }

    pub fn row_json(&self, v: &[Elem]) -> serde_json::Value {
        serde_json::Value::Array(v.iter().map(|&x| self.elem_json(x)).collect())
    }

    pub fn format_row(&self, v: &[Elem]) -> String {
        let parts: Vec<String> = v.iter().map(|&x| self.format(x)).collect();
        format!("[{}]", parts.join(", "))
    }

    /// Exhaustive (or, above 64 elements, sampled) check of the ring axioms.
    pub fn verify_axioms(&self, samples: usize, seed: u64) -> Result<()> {
        use rand::{Rng, SeedableRng};
        let n = self.size as Elem;
        let check = |a: Elem, b: Elem, c: Elem| -> Result<()> {
            let ok = self.add(self.add(a, b), c) == self.add(a, self.add(b, c))
                && self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))
                && self.mul(a, self.add(b, c)) == self.add(self.mul(a, b), self.mul(a, c))
                && self.add(a, b) == self.add(b, a)
                && self.mul(a, b) == self.mul(b, a)
                && self.add(a, 0) == a
                && self.mul(a, self.one) == a
                && self.add(a, self.neg(a)) == 0;
            if ok {
                Ok(())
            } else {
                Err(Error::Verification(format!(
                    "ring axiom fails at ({}, {}, {})",
                    self.format(a),
                    self.format(b),
                    self.format(c)
                )))
            }
        };
        if self.size <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }
}
