//! The alternating matrix `θ(w, u)` and the descent of an `SL₃ ∩ E₄`
//! action on rows of length three to a relative elementary one.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::group::{congruence_groups, ek_group, elementary_group, relative_elementary_group, MatGroup, RelMethod};
use crate::matrix::{row_times, ElemGen, Mat};
use crate::report::VerdictReport;
use crate::ring::{Elem, FiniteRing, IdealHandle};
use crate::rows::enumerate_um;
use crate::{Error, Result};

/// ```text
/// ⎡ 0   −u₁  −u₂  −u₃ ⎤
/// ⎢ u₁   0   −w₃   w₂ ⎥
/// ⎢ u₂   w₃   0   −w₁ ⎥
/// ⎣ u₃  −w₂   w₁   0  ⎦
/// ```
pub fn theta(ring: &FiniteRing, u: &[Elem], w: &[Elem]) -> Result<Mat> {
    if u.len() != 3 || w.len() != 3 {
        return Err(Error::Precondition("theta takes rows of length 3".into()));
    }
    let n = |x: Elem| ring.neg(x);
    #[rustfmt::skip]
    let e = vec![
        0, n(u[0]), n(u[1]), n(u[2]),
        u[0], 0, n(w[2]), w[1],
        u[1], w[2], 0, n(w[0]),
        u[2], n(w[1]), w[0], 0,
    ];
    Ok(Mat {
        ring_id: ring.id(),
        n: 4,
        entries: e,
    })
}

pub fn is_alternating(ring: &FiniteRing, m: &Mat) -> bool {
    (0..m.n).all(|i| m.get(i, i) == 0 && (0..m.n).all(|j| m.get(i, j) == ring.neg(m.get(j, i))))
}

/// Read `(u, w)` back from a matrix of the shape of `θ(w, u)`.
pub fn theta_parts(ring: &FiniteRing, m: &Mat) -> Option<(Vec<Elem>, Vec<Elem>)> {
    if m.n != 4 {
        return None;
    }
    let u = vec![m.get(1, 0), m.get(2, 0), m.get(3, 0)];
    let w = vec![m.get(3, 2), m.get(1, 3), m.get(2, 1)];
    (theta(ring, &u, &w).ok()? == *m).then_some((u, w))
}

/// `(1 ⊕ α)ᵗ θ(w, u) (1 ⊕ α)` is alternating and equals `θ(w', uα)` for
/// some `w'`, and `uα · w' = u · w`.
pub fn conjugation_identity(ring: &FiniteRing, u: &[Elem], w: &[Elem], alpha: &Mat) -> Result<bool> {
    let p = alpha.one_plus(ring);
    let c = p.transpose().mul(ring, &theta(ring, u, w)?)?.mul(ring, &p)?;
    if !is_alternating(ring, &c) {
        return Ok(false);
    }
    Ok(match theta_parts(ring, &c) {
        Some((u2, w2)) => u2 == row_times(ring, 3, u, &alpha.entries) && ring.dot(&u2, &w2) == ring.dot(u, w),
        None => false,
    })
}

/// `β̂` with `β θ(w, u) βᵗ = θ(w', u β̂)` for a generator `β` of `E⁴₄(R, I)`.
pub fn hat_beta(ring: &FiniteRing, beta: ElemGen, w: &[Elem]) -> Result<Mat> {
    let x = beta.lambda;
    match (beta.i, beta.j) {
        (0, 3) => {
            let (w1, w2, w3) = (w[0], w[1], w[2]);
            let m = |a: Elem, b: Elem| ring.mul(x, ring.mul(a, b));
            let e = vec![
                ring.add(ring.one(), m(w1, w2)),
                ring.neg(m(w1, w1)),
                0,
                m(w2, w2),
                ring.sub(ring.one(), m(w1, w2)),
                0,
                m(w2, w3),
                ring.neg(m(w1, w3)),
                ring.one(),
            ];
            Ok(Mat {
                ring_id: ring.id(),
                n: 3,
                entries: e,
            })
        }
        (3, 0) => Ok(Mat::identity(ring, 3)),
        (3, i) if i == 1 || i == 2 => Ok(Mat::elementary(ring, 3, i - 1, 2, x)),
        (i, 3) if i == 1 || i == 2 => Ok(Mat::elementary(ring, 3, 2, i - 1, x)),
        _ => Err(Error::Precondition(format!("{} is not of the form E4i or Ei4", beta.label(ring)))),
    }
}

/// Groups needed to factor and to check membership.
pub struct DescentContext {
    ring: Arc<FiniteRing>,
    ideal: IdealHandle,
    /// `E⁴₄(R, I)` with words, for a proper nonzero ideal.
    ek: Option<MatGroup>,
    /// `E₃(R)` with words, for `I = R`.
    e3_words: Option<MatGroup>,
    /// `E₃(R, I)`.
    e3_rel: MatGroup,
}

impl DescentContext {
    pub fn new(ideal: &IdealHandle, budget: usize) -> Result<Self> {
        let ring = ideal.ring().clone();
        let e3_rel = relative_elementary_group(&ring, ideal, 3, RelMethod::NormalClosure, budget)?;
        let (ek, e3_words) = if ideal.is_zero() {
            (None, None)
        } else if ideal.is_whole() {
            (None, Some(elementary_group(&ring, 3, true, budget)?))
        } else {
            (Some(ek_group(&ring, ideal, 4, 3, budget)?), None)
        };
        Ok(DescentContext {
            ring,
            ideal: ideal.clone(),
            ek,
            e3_words,
            e3_rel,
        })
    }

    pub fn relative_group(&self) -> &MatGroup {
        &self.e3_rel
    }

    /// `(1 ⊕ α)ᵗ` as a product `β₁ ⋯ β_m` of `E_4i(a)` and `E_i4(x)`,
    /// `x ∈ I`, or `None` when no factorization is available.
    pub fn factor(&self, alpha: &Mat) -> Option<Vec<ElemGen>> {
        let ring = &self.ring;
        if self.ideal.is_zero() {
            return alpha.is_identity(ring).then(Vec::new);
        }
        if let Some(ek) = &self.ek {
            let p = alpha.one_plus(ring).transpose();
            let word = ek.factorize(&p).ok()?;
            return word
                .0
                .iter()
                .map(|l| ek.generators()[l.gen as usize].as_elementary(ring))
                .collect();
        }
        let e3 = self.e3_words.as_ref()?;
        let word = e3.factorize(&alpha.transpose()).ok()?;
        let mut out = Vec::new();
        for l in &word.0 {
            let g = e3.generators()[l.gen as usize].as_elementary(ring)?;
            let (p, q) = (g.i + 1, g.j + 1);
            if p == 3 || q == 3 {
                out.push(ElemGen::new(p, q, g.lambda));
            } else {
                // E_pq(λ) = [E_p4(λ), E_4q(1)].
                out.push(ElemGen::new(p, 3, g.lambda));
                out.push(ElemGen::new(3, q, ring.one()));
                out.push(ElemGen::new(p, 3, ring.neg(g.lambda)));
                out.push(ElemGen::new(3, q, ring.neg(ring.one())));
            }
        }
        Some(out)
    }

    pub fn is_admissible(&self, alpha: &Mat) -> bool {
        alpha.det(&self.ring) == self.ring.one()
            && alpha.is_congruent_identity(&self.ring, |x| self.ideal.contains(x))
            && self.factor(alpha).is_some()
    }
}

/// `ε ∈ E₃(R, I)` with `u ε = u α`, assembled from the `β̂` of a
/// factorization of `(1 ⊕ α)ᵗ`. `w` is a relative certificate of `u`.
pub fn lemma_a_descend(ctx: &DescentContext, u: &[Elem], w: &[Elem], alpha: &Mat) -> Result<Mat> {
    let ring = &ctx.ring;
    if alpha.n != 3 || alpha.det(ring) != ring.one() || !alpha.is_congruent_identity(ring, |x| ctx.ideal.contains(x)) {
        return Err(Error::Precondition("α must lie in SL3(R, I)".into()));
    }
    if ring.dot(u, w) != ring.one() {
        return Err(Error::Precondition("w must satisfy u·w = 1".into()));
    }
    let betas = ctx.factor(alpha).ok_or(Error::NotInGroup)?;
    let p = alpha.one_plus(ring).transpose();
    let mut prod = Mat::identity(ring, 4);
    for b in &betas {
        b.mul_right(ring, 4, &mut prod.entries);
    }
    if prod != p {
        return Err(Error::Verification("factorization does not reproduce (1 ⊕ α)ᵗ".into()));
    }
    let (mut uc, mut wc) = (u.to_vec(), w.to_vec());
    let mut eps = Mat::identity(ring, 3);
    for &b in betas.iter().rev() {
        let h = hat_beta(ring, b, &wc)?;
        let bm = b.to_mat(ring, 4);
        let conj = bm.mul(ring, &theta(ring, &uc, &wc)?)?.mul(ring, &bm.transpose())?;
        let (u2, w2) = theta_parts(ring, &conj)
            .ok_or_else(|| Error::Verification(format!("conjugate by {} is not of theta shape", b.label(ring))))?;
        if u2 != row_times(ring, 3, &uc, &h.entries) {
            return Err(Error::Verification(format!("hat of {} does not act as the conjugation", b.label(ring))));
        }
        uc = u2;
        wc = w2;
        eps = eps.mul(ring, &h)?;
    }
    if eps.row_action(ring, u)? != alpha.row_action(ring, u)? {
        return Err(Error::Verification("u·ε differs from u·α".into()));
    }
    Ok(eps)
}

/// `lemma_a_descend` on sampled `α` of `SL₃(R, I)` with `1 ⊕ α ∈ E₄(R, I)`.
///
/// Draws `samples` matrices from the admissible set, without repetition
/// when it is large enough and cycling through it otherwise.
pub fn descent_check(ideal: &IdealHandle, samples: usize, seed: u64, budget: usize) -> Result<VerdictReport> {
    let ring = ideal.ring();
    let mut rep = VerdictReport::new(
        "lemma_a_descend",
        json!({"ring_hash": ring.hash_hex(), "ideal": ideal.label(), "n": 3, "samples": samples, "seed": seed}),
    );
    let ctx = DescentContext::new(ideal, budget)?;
    let (sl, _) = congruence_groups(ideal, 3, budget)?;
    let admissible: Vec<Mat> = sl.iter().filter(|a| ctx.is_admissible(a)).collect();
    rep.metric("sl3_congruence_size", sl.len() as u64);
    rep.metric("admissible", admissible.len() as u64);
    let rows = enumerate_um(ring, 3, Some(ideal), u64::MAX)?.rows;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = admissible;
    if pool.is_empty() {
        return Err(Error::Verification("the identity is not admissible".into()));
    }
    pool.shuffle(&mut rng);
    let draws: Vec<&Mat> = (0..samples).map(|t| &pool[t % pool.len()]).collect();
    rep.metric("distinct_alpha", pool.len().min(samples) as u64);
    let mut passed = 0u64;
    for alpha in draws {
        let row = &rows[rng.gen_range(0..rows.len())];
        match lemma_a_descend(&ctx, &row.entries, &row.certificate, alpha) {
            Ok(eps) => {
                let ok = ctx.e3_rel.contains(&eps);
                rep.check(ok, || json!({"alpha": alpha.to_json(ring), "u": ring.row_json(&row.entries), "issue": "ε not in E3(R, I)"}));
                passed += ok as u64;
            }
            Err(e) => rep.fail(json!({"alpha": alpha.to_json(ring), "u": ring.row_json(&row.entries), "error": e.to_string()})),
        }
    }
    rep.metric("passed", passed);
    rep.metric("e3_relative_size", ctx.e3_rel.len() as u64);
    Ok(rep)
}

/// The conjugation identity on random `(u, w, α)` with `u·w = 1` and
/// `α ∈ SL₃(R)`, both drawn by rejection.
pub fn theta_identity_check(ring: &Arc<FiniteRing>, triples: usize, seed: u64) -> Result<VerdictReport> {
    let mut rep = VerdictReport::new(
        "theta_conjugation",
        json!({"ring_hash": ring.hash_hex(), "triples": triples, "seed": seed}),
    );
    if ring.size() == 1 {
        return Ok(rep.skip("zero ring"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = ring.size();
    let random_row = |r: &mut ChaCha8Rng, k: usize| -> Vec<Elem> { (0..k).map(|_| r.gen_range(0..size) as Elem).collect() };
    let mut alternating = 0u64;
    let mut holds = 0u64;
    for _ in 0..triples {
        let (u, w) = loop {
            let u = random_row(&mut rng, 3);
            let w = random_row(&mut rng, 3);
            if ring.dot(&u, &w) == ring.one() {
                break (u, w);
            }
        };
        let alpha = loop {
            let e = random_row(&mut rng, 9);
            let m = Mat::from_entries(ring, 3, e)?;
            if m.det(ring) == ring.one() {
                break m;
            }
        };
        alternating += is_alternating(ring, &theta(ring, &u, &w)?) as u64;
        let ok = conjugation_identity(ring, &u, &w, &alpha)?;
        holds += ok as u64;
        rep.check(ok, || json!({"u": ring.row_json(&u), "w": ring.row_json(&w), "alpha": alpha.to_json(ring)}));
    }
    rep.check(alternating == triples as u64, || json!({"issue": "theta not alternating"}));
    rep.metric("holds", holds);
    rep.metric("alternating", alternating);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{ideal_generate, make_ring, RingSpec};

    #[test]
    fn theta_of_e1() {
        let r = make_ring(&RingSpec::zmod(5), 64).unwrap();
        let t = theta(&r, &[1, 0, 0], &[1, 0, 0]).unwrap();
        assert_eq!(t.rows(), vec![vec![0, 4, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 4], vec![0, 0, 1, 0]]);
        assert!(is_alternating(&r, &t));
        assert!(theta(&r, &[1, 0], &[1, 0, 0]).is_err());
    }

    #[test]
    fn descent_on_z4() {
        let r = make_ring(&RingSpec::zmod(4), 64).unwrap();
        let i = ideal_generate(&r, &[2]).unwrap();
        let ctx = DescentContext::new(&i, 2_000_000).unwrap();
        let id = Mat::identity(&r, 3);
        assert_eq!(lemma_a_descend(&ctx, &[1, 0, 0], &[1, 0, 0], &id).unwrap(), id);
        let a = Mat::elementary(&r, 3, 1, 2, 2);
        let u = [1, 2, 2];
        let w = [1, 0, 0];
        let eps = lemma_a_descend(&ctx, &u, &w, &a).unwrap();
        assert_eq!(eps.row_action(&r, &u).unwrap(), a.row_action(&r, &u).unwrap());
        assert!(ctx.relative_group().contains(&eps));
    }

    #[test]
    fn descent_on_whole_ring() {
        let r = make_ring(&RingSpec::zmod(3), 64).unwrap();
        let i = IdealHandle::whole(&r);
        let ctx = DescentContext::new(&i, 2_000_000).unwrap();
        let a = Mat::elementary(&r, 3, 0, 1, 1).mul(&r, &Mat::elementary(&r, 3, 2, 0, 2)).unwrap();
        let u = [0, 1, 1];
        let w = [0, 1, 0];
        let eps = lemma_a_descend(&ctx, &u, &w, &a).unwrap();
        assert_eq!(eps.row_action(&r, &u).unwrap(), a.row_action(&r, &u).unwrap());
    }

    #[test]
    fn identity_on_small_rings() {
        let r = make_ring(&RingSpec::zmod(4), 64).unwrap();
        let rep = theta_identity_check(&r, 200, 7).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}
