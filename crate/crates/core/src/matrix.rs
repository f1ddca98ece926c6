//! Dense square matrices over a finite ring.
//!
//! Positions are 0-based in code; reports print them 1-based.

use std::sync::OnceLock;

use crate::ring::{Elem, FiniteRing};
use crate::{Error, Result};

pub const MAX_N: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat {
    pub ring_id: u64,
    pub n: usize,
    /// Row-major.
    pub entries: Vec<Elem>,
}

/// The transvection `E_ij(λ) = I + λ e_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemGen {
    pub i: usize,
    pub j: usize,
    pub lambda: Elem,
}

impl ElemGen {
    pub fn new(i: usize, j: usize, lambda: Elem) -> Self {
        assert_ne!(i, j, "elementary generator needs distinct positions");
        ElemGen { i, j, lambda }
    }

    pub fn to_mat(self, ring: &FiniteRing, n: usize) -> Mat {
        Mat::elementary(ring, n, self.i, self.j, self.lambda)
    }

    pub fn inverse(self, ring: &FiniteRing) -> Self {
        ElemGen {
            lambda: ring.neg(self.lambda),
            ..self
        }
    }

    /// `v ↦ v·E_ij(λ)`: adds `λ·v_i` to `v_j`.
    #[inline]
    pub fn act_row(self, ring: &FiniteRing, v: &mut [Elem]) {
        v[self.j] = ring.add(v[self.j], ring.mul(self.lambda, v[self.i]));
    }

    /// `m ↦ m·E_ij(λ)`: adds `λ·(column i)` to column `j`.
    #[inline]
    pub fn mul_right(self, ring: &FiniteRing, n: usize, m: &mut [Elem]) {
        for r in 0..n {
            let x = ring.mul(m[r * n + self.i], self.lambda);
            m[r * n + self.j] = ring.add(m[r * n + self.j], x);
        }
    }

    /// `m ↦ E_ij(λ)·m`: adds `λ·(row j)` to row `i`.
    #[inline]
    pub fn mul_left(self, ring: &FiniteRing, n: usize, m: &mut [Elem]) {
        for c in 0..n {
            let x = ring.mul(self.lambda, m[self.j * n + c]);
            m[self.i * n + c] = ring.add(m[self.i * n + c], x);
        }
    }

    pub fn label(self, ring: &FiniteRing) -> String {
        format!("E{}{}({})", self.i + 1, self.j + 1, ring.format(self.lambda))
    }
}

/// Permutations of `0..n` with their signs, for the Leibniz expansion.
fn permutations(n: usize) -> &'static [(Vec<usize>, bool)] {
    static CACHE: OnceLock<Vec<Vec<(Vec<usize>, bool)>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        (0..=MAX_N)
            .map(|k| {
                let mut out = Vec::new();
                let mut p: Vec<usize> = (0..k).collect();
                heap_permute(k, &mut p, true, &mut out);
                out
            })
            .collect()
    });
    &all[n]
}

fn heap_permute(k: usize, p: &mut Vec<usize>, even: bool, out: &mut Vec<(Vec<usize>, bool)>) {
    // Recursive Heap's algorithm; each swap flips the parity.
    fn go(k: usize, p: &mut Vec<usize>, parity: &mut bool, out: &mut Vec<(Vec<usize>, bool)>) {
        if k <= 1 {
            out.push((p.clone(), *parity));
            return;
        }
        for i in 0..k - 1 {
            go(k - 1, p, parity, out);
            if k.is_multiple_of(2) {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
            *parity = !*parity;
        }
        go(k - 1, p, parity, out);
    }
    let mut parity = even;
    go(k, p, &mut parity, out);
}

impl Mat {
    pub fn from_entries(ring: &FiniteRing, n: usize, entries: Vec<Elem>) -> Result<Self> {
        if !(1..=MAX_N).contains(&n) || entries.len() != n * n {
            return Err(Error::Mismatch(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        for &e in &entries {
            ring.check_elem(e as usize)?;
        }
        Ok(Mat {
            ring_id: ring.id(),
            n,
            entries,
        })
    }

    pub fn identity(ring: &FiniteRing, n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = ring.one();
        }
        Mat {
            ring_id: ring.id(),
            n,
            entries,
        }
    }

    pub fn elementary(ring: &FiniteRing, n: usize, i: usize, j: usize, lambda: Elem) -> Self {
        assert!(i != j && i < n && j < n);
        let mut m = Mat::identity(ring, n);
        m.entries[i * n + j] = ring.add(m.entries[i * n + j], lambda);
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Elem) {
        self.entries[i * self.n + j] = x;
    }

    fn check(&self, ring: &FiniteRing, other: &Mat) -> Result<()> {
        if self.ring_id != ring.id() || other.ring_id != ring.id() {
            return Err(Error::Mismatch("matrices over different rings".into()));
        }
        if self.n != other.n {
            return Err(Error::Mismatch(format!("sizes {} and {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn mul(&self, ring: &FiniteRing, other: &Mat) -> Result<Mat> {
        self.check(ring, other)?;
        let mut out = vec![0; self.n * self.n];
        mul_into(ring, self.n, &self.entries, &other.entries, &mut out);
        Ok(Mat {
            ring_id: self.ring_id,
            n: self.n,
            entries: out,
        })
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Mat {
            ring_id: self.ring_id,
            n,
            entries,
        }
    }

    /// Leibniz expansion; valid over any commutative ring.
    pub fn det(&self, ring: &FiniteRing) -> Elem {
        det_entries(ring, self.n, &self.entries)
    }

    /// `v · self`.
    pub fn row_action(&self, ring: &FiniteRing, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.n {
            return Err(Error::Mismatch(format!(
                "row of length {} against a {}x{} matrix",
                v.len(),
                self.n,
                self.n
            )));
        }
        Ok(row_times(ring, self.n, v, &self.entries))
    }

    pub fn is_identity(&self, ring: &FiniteRing) -> bool {
        *self == Mat::identity(ring, self.n)
    }

    /// `g ≡ I` entrywise modulo the ideal given by its membership test.
    pub fn is_congruent_identity(&self, ring: &FiniteRing, in_ideal: impl Fn(Elem) -> bool) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let x = self.entries[i * n + j];
                let x = if i == j { ring.sub(x, ring.one()) } else { x };
                in_ideal(x)
            })
        })
    }

    /// `[[1, 0], [0, self]]`.
    pub fn one_plus(&self, ring: &FiniteRing) -> Mat {
        let n = self.n + 1;
        let mut m = Mat::identity(ring, n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.entries[(i + 1) * n + j + 1] = self.get(i, j);
            }
        }
        m
    }

    /// Recognize `I + λ e_ij`.
    pub fn as_elementary(&self, ring: &FiniteRing) -> Option<ElemGen> {
        let n = self.n;
        let mut found = None;
        for i in 0..n {
            for j in 0..n {
                let x = self.entries[i * n + j];
                if i == j {
                    if x != ring.one() {
                        return None;
                    }
                } else if x != 0 {
                    if found.is_some() {
                        return None;
                    }
                    found = Some(ElemGen::new(i, j, x));
                }
            }
        }
        found
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn to_json(&self, ring: &FiniteRing) -> serde_json::Value {
        serde_json::Value::Array(self.rows().iter().map(|r| ring.row_json(r)).collect())
    }
}

pub(crate) fn mul_into(ring: &FiniteRing, n: usize, a: &[Elem], b: &[Elem], out: &mut [Elem]) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0;
            for k in 0..n {
                acc = ring.add(acc, ring.mul(a[i * n + k], b[k * n + j]));
            }
            out[i * n + j] = acc;
        }
    }
}

pub(crate) fn row_times(ring: &FiniteRing, n: usize, v: &[Elem], m: &[Elem]) -> Vec<Elem> {
    (0..n)
        .map(|j| (0..n).fold(0, |acc, k| ring.add(acc, ring.mul(v[k], m[k * n + j]))))
        .collect()
}

pub(crate) fn det_entries(ring: &FiniteRing, n: usize, m: &[Elem]) -> Elem {
    let mut acc = 0;
    for (p, even) in permutations(n) {
        let mut t = ring.one();
        for (i, &pi) in p.iter().enumerate() {
            t = ring.mul(t, m[i * n + pi]);
            if t == 0 {
                break;
            }
        }
        acc = if *even { ring.add(acc, t) } else { ring.sub(acc, t) };
    }
    acc
}
