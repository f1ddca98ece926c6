use std::sync::Arc;

use super::{ideal_generate, Elem, ElemLit, FiniteRing, IdealHandle, Repr, RingHom, RingSpec, NO_INV};
use crate::{Error, Result};

fn budget_check(size: u128, budget: usize) -> Result<()> {
    if size > budget as u128 {
        Err(Error::Budget {
            what: "ring elements",
            limit: budget as u64,
            reached: size.min(u64::MAX as u128) as u64,
        })
    } else {
        Ok(())
    }
}

fn parse_ideal(base: &Arc<FiniteRing>, lits: &[ElemLit]) -> Result<IdealHandle> {
    let gens = lits
        .iter()
        .map(|l| base.parse_lit(l))
        .collect::<Result<Vec<_>>>()?;
    ideal_generate(base, &gens)
}

/// Realize a ring from its constructor tree.
pub fn make_ring(spec: &RingSpec, budget: usize) -> Result<Arc<FiniteRing>> {
    match spec {
        RingSpec::Zmod { n } => {
            if *n == 0 {
                return Err(Error::Spec("modulus must be positive".into()));
            }
            budget_check(*n as u128, budget)?;
            FiniteRing::realize(spec.clone(), Repr::ZMod { n: *n as u32 })
        }
        RingSpec::Product { factors } => {
            let rings = factors
                .iter()
                .map(|f| make_ring(f, budget))
                .collect::<Result<Vec<_>>>()?;
            let size: u128 = rings.iter().map(|r| r.size() as u128).product();
            budget_check(size, budget)?;
            FiniteRing::realize(spec.clone(), Repr::Product { factors: rings })
        }
        RingSpec::PolyQuotient { base, poly } => {
            let base = make_ring(base, budget)?;
            let coeffs = poly
                .iter()
                .map(|l| base.parse_lit(l))
                .collect::<Result<Vec<_>>>()?;
            if coeffs.len() < 2 {
                return Err(Error::Spec("polynomial must have degree at least 1".into()));
            }
            if *coeffs.last().unwrap() != base.one() {
                return Err(Error::Spec("polynomial must be monic".into()));
            }
            let d = coeffs.len() - 1;
            budget_check((base.size() as u128).saturating_pow(d as u32), budget)?;
            FiniteRing::realize(
                spec.clone(),
                Repr::Poly {
                    base,
                    modulus: coeffs[..d].to_vec(),
                },
            )
        }
        RingSpec::Quotient { base, ideal } => {
            let base = make_ring(base, budget)?;
            let ideal = parse_ideal(&base, ideal)?;
            build_quotient(spec.clone(), &base, &ideal)
        }
        RingSpec::Excision { base, ideal } => {
            let base = make_ring(base, budget)?;
            let ideal = parse_ideal(&base, ideal)?;
            budget_check((base.size() * ideal.len()) as u128, budget)?;
            build_pair(spec.clone(), &base, &ideal, None)
        }
        RingSpec::Double { base, ideal } => {
            let base = make_ring(base, budget)?;
            let ideal = parse_ideal(&base, ideal)?;
            budget_check((base.size() * ideal.len()) as u128, budget)?;
            FiniteRing::realize(
                spec.clone(),
                Repr::Double {
                    base,
                    members: ideal.members().to_vec(),
                },
            )
        }
        RingSpec::ZmodExcision { k, base, ideal } => {
            let base = make_ring(base, budget)?;
            let ideal = parse_ideal(&base, ideal)?;
            zmod_check(*k, &base)?;
            budget_check(*k as u128 * ideal.len() as u128, budget)?;
            build_pair(spec.clone(), &base, &ideal, Some(*k as u32))
        }
    }
}

fn zmod_check(k: u64, base: &FiniteRing) -> Result<()> {
    if k == 0 || !k.is_multiple_of(base.characteristic()) {
        return Err(Error::Precondition(format!(
            "k = {k} is not a positive multiple of the characteristic {}",
            base.characteristic()
        )));
    }
    Ok(())
}

fn build_pair(
    spec: RingSpec,
    base: &Arc<FiniteRing>,
    ideal: &IdealHandle,
    zmod: Option<u32>,
) -> Result<Arc<FiniteRing>> {
    let mut pos = vec![NO_INV; base.size()];
    for (p, &i) in ideal.members().iter().enumerate() {
        pos[i as usize] = p as Elem;
    }
    FiniteRing::realize(
        spec,
        Repr::Pair {
            base: base.clone(),
            zmod,
            members: ideal.members().to_vec(),
            pos,
        },
    )
}

fn build_quotient(spec: RingSpec, base: &Arc<FiniteRing>, ideal: &IdealHandle) -> Result<Arc<FiniteRing>> {
    let mut class_of = vec![NO_INV; base.size()];
    let mut reps = Vec::new();
    for x in base.elements() {
        if class_of[x as usize] != NO_INV {
            continue;
        }
        let c = reps.len() as Elem;
        reps.push(x);
        for &i in ideal.members() {
            class_of[base.add(x, i) as usize] = c;
        }
    }
    FiniteRing::realize(
        spec,
        Repr::Quotient {
            base: base.clone(),
            class_of,
            reps,
        },
    )
}

/// The excision ring `R ⊕ I` with its distinguished ideal and maps.
#[derive(Clone, Debug)]
pub struct ExcisionRing {
    pub ring: Arc<FiniteRing>,
    /// `0 ⊕ I`.
    pub ideal: IdealHandle,
    /// `(a, i) ↦ a + i`.
    pub pi2: RingHom,
    /// `(a, i) ↦ a`.
    pub proj: RingHom,
    /// `a ↦ (a, 0)`, a section of `proj`.
    pub section: RingHom,
}

fn pair_sub_ideal(ring: &Arc<FiniteRing>, ideal: &IdealHandle) -> IdealHandle {
    // Elements (0, i) occupy indices 0..|I|.
    let m = ideal.len();
    let mut contains = vec![false; ring.size()];
    for c in contains.iter_mut().take(m) {
        *c = true;
    }
    let gens = ideal
        .generators()
        .iter()
        .map(|&g| ideal.members().binary_search(&g).unwrap() as Elem)
        .collect();
    IdealHandle::from_members(ring, gens, contains)
}

pub fn excision_ring(base: &Arc<FiniteRing>, ideal: &IdealHandle, budget: usize) -> Result<ExcisionRing> {
    let spec = RingSpec::Excision {
        base: Box::new(base.spec().clone()),
        ideal: ideal.generator_literals(),
    };
    budget_check((base.size() * ideal.len()) as u128, budget)?;
    let ring = build_pair(spec, base, ideal, None)?;
    let m = ideal.len();
    let members = ideal.members();
    let pi2 = RingHom::from_fn(&ring, base, |x| {
        base.add((x as usize / m) as Elem, members[x as usize % m])
    })?;
    let proj = RingHom::from_fn(&ring, base, |x| (x as usize / m) as Elem)?;
    let section = RingHom::from_fn(base, &ring, |a| (a as usize * m) as Elem)?;
    Ok(ExcisionRing {
        ideal: pair_sub_ideal(&ring, ideal),
        ring,
        pi2,
        proj,
        section,
    })
}

/// The double `{(a, b) : a − b ∈ I}` with its two projections.
#[derive(Clone, Debug)]
pub struct DoubleRing {
    pub ring: Arc<FiniteRing>,
    pub p1: RingHom,
    pub p2: RingHom,
}

fn double_components(ring: &FiniteRing, x: Elem) -> (Elem, Elem) {
    ring.repr().double_decode(x)
}

pub fn double_ring(base: &Arc<FiniteRing>, ideal: &IdealHandle, budget: usize) -> Result<DoubleRing> {
    let spec = RingSpec::Double {
        base: Box::new(base.spec().clone()),
        ideal: ideal.generator_literals(),
    };
    budget_check((base.size() * ideal.len()) as u128, budget)?;
    let ring = FiniteRing::realize(
        spec,
        Repr::Double {
            base: base.clone(),
            members: ideal.members().to_vec(),
        },
    )?;
    let p1 = RingHom::from_fn(&ring, base, |x| double_components(&ring, x).0)?;
    let p2 = RingHom::from_fn(&ring, base, |x| double_components(&ring, x).1)?;
    Ok(DoubleRing { ring, p1, p2 })
}

/// The isomorphism `R ⊕ I → R ×_I R`, `(a, i) ↦ (a, a + i)`.
pub fn iso_double_excision(base: &Arc<FiniteRing>, ideal: &IdealHandle, budget: usize) -> Result<RingHom> {
    let exc = excision_ring(base, ideal, budget)?;
    let dbl = double_ring(base, ideal, budget)?;
    let m = ideal.len();
    let members = ideal.members();
    let iso = RingHom::from_fn(&exc.ring, &dbl.ring, |x| {
        let a = (x as usize / m) as Elem;
        let i = members[x as usize % m];
        dbl.ring.repr().double_index(a, base.add(a, i))
    })?;
    if !iso.is_bijective() {
        return Err(Error::Verification("excision-to-double map is not bijective".into()));
    }
    Ok(iso)
}

/// The unique maximal ideal when the ring is local.
pub fn local_structure(ring: &Arc<FiniteRing>) -> Option<IdealHandle> {
    if ring.size() == 1 {
        return None;
    }
    let nonunits: Vec<Elem> = ring.elements().filter(|&x| !ring.is_unit(x)).collect();
    let mut contains = vec![false; ring.size()];
    for &x in &nonunits {
        contains[x as usize] = true;
    }
    let closed = nonunits
        .iter()
        .all(|&a| nonunits.iter().all(|&b| contains[ring.add(a, b) as usize]));
    if !closed {
        return None;
    }
    let draft = IdealHandle::from_members(ring, Vec::new(), contains.clone());
    let gens = draft.additive_generators().to_vec();
    Some(IdealHandle::from_members(ring, gens, contains))
}

/// The finite model `(Z/k) ⊕ I` of `Z ⊕ I`.
#[derive(Clone, Debug)]
pub struct ZModel {
    pub ring: Arc<FiniteRing>,
    /// `0 ⊕ I`.
    pub ideal: IdealHandle,
    /// `(m, i) ↦ m·1 + i`.
    pub fbar: RingHom,
    pub k: u64,
}

pub fn zmodel_excision(ideal: &IdealHandle, k: u64, budget: usize) -> Result<ZModel> {
    let base = ideal.ring();
    zmod_check(k, base)?;
    let spec = RingSpec::ZmodExcision {
        k,
        base: Box::new(base.spec().clone()),
        ideal: ideal.generator_literals(),
    };
    budget_check(k as u128 * ideal.len() as u128, budget)?;
    // k·i = 0 for i ∈ I once the characteristic divides k.
    for &i in ideal.members() {
        if base.zmul(k as i64, i) != 0 {
            return Err(Error::Verification("k does not annihilate the ideal".into()));
        }
    }
    let ring = build_pair(spec, base, ideal, Some(k as u32))?;
    let m = ideal.len();
    let members = ideal.members();
    let fbar = RingHom::from_fn(&ring, base, |x| {
        base.add(base.int((x as usize / m) as i64), members[x as usize % m])
    })?;
    Ok(ZModel {
        ideal: pair_sub_ideal(&ring, ideal),
        ring,
        fbar,
        k,
    })
}

#[derive(Clone, Debug)]
pub struct QuotientRing {
    pub ring: Arc<FiniteRing>,
    pub q: RingHom,
}

/// `R / I`, cosets represented by their least member.
pub fn quotient_ring(base: &Arc<FiniteRing>, ideal: &IdealHandle) -> Result<QuotientRing> {
    let spec = RingSpec::Quotient {
        base: Box::new(base.spec().clone()),
        ideal: ideal.generator_literals(),
    };
    let ring = build_quotient(spec, base, ideal)?;
    let class_of = match ring.repr() {
        Repr::Quotient { class_of, .. } => class_of.clone(),
        _ => unreachable!(),
    };
    let q = RingHom::new(base.clone(), ring.clone(), class_of)?;
    Ok(QuotientRing { ring, q })
}

/// Every ideal of the ring, ordered by size and then by member list.
///
/// Starts from the principal ideals and closes under sums. In a finite
/// ring each ideal is a sum of principal ones, so the closure is complete;
/// the final pass re-checks that the lattice is closed under sums.
pub fn all_ideals(ring: &Arc<FiniteRing>) -> Result<Vec<IdealHandle>> {
    let mut ideals: Vec<IdealHandle> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for a in ring.elements() {
        let i = ideal_generate(ring, &[a])?;
        if seen.insert(i.members().to_vec()) {
            ideals.push(i);
        }
    }
    let mut frontier = 0;
    loop {
        let len = ideals.len();
        let mut added = Vec::new();
        for x in 0..len {
            for y in frontier.max(x + 1)..len {
                let mut gens = ideals[x].generators().to_vec();
                gens.extend_from_slice(ideals[y].generators());
                let s = ideal_generate(ring, &gens)?;
                if seen.insert(s.members().to_vec()) {
                    added.push(s);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        frontier = len;
        ideals.extend(added);
    }
    ideals.sort_by(|a, b| (a.len(), a.members()).cmp(&(b.len(), b.members())));
    for a in &ideals {
        for b in &ideals {
            let mut gens = a.generators().to_vec();
            gens.extend_from_slice(b.generators());
            let s = ideal_generate(ring, &gens)?;
            if !seen.contains(s.members()) {
                return Err(Error::Verification("ideal lattice not closed under sums".into()));
            }
        }
    }
    Ok(ideals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(json: &str) -> Arc<FiniteRing> {
        make_ring(&RingSpec::from_json(json).unwrap(), 4096).unwrap()
    }

    #[test]
    fn zmod_basics() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        assert_eq!(z4.size(), 4);
        assert_eq!(z4.units(), vec![1, 3]);
        assert_eq!(z4.characteristic(), 4);
        let z1 = make_ring(&RingSpec::zmod(1), 4096).unwrap();
        assert_eq!((z1.size(), z1.one(), z1.zero()), (1, 0, 0));
        assert!(z1.is_unimodular(&[0, 0, 0]));
    }

    #[test]
    fn field_of_four() {
        let f4 = ring(r#"{"type":"poly_quotient","base":{"type":"zmod","n":2},"poly":[1,1,1]}"#);
        assert_eq!(f4.size(), 4);
        assert_eq!(f4.units().len(), 3);
        for a in 1..4 {
            assert!((0..4).any(|b| f4.mul(a, b) == f4.one()));
        }
        f4.verify_axioms(0, 0).unwrap();
    }

    #[test]
    fn non_monic_rejected() {
        let spec = RingSpec::from_json(r#"{"type":"poly_quotient","base":{"type":"zmod","n":4},"poly":[1,1,2]}"#).unwrap();
        assert!(matches!(make_ring(&spec, 4096), Err(Error::Spec(_))));
        let spec = RingSpec::from_json(r#"{"type":"poly_quotient","base":{"type":"zmod","n":4},"poly":[1]}"#).unwrap();
        assert!(make_ring(&spec, 4096).is_err());
    }

    #[test]
    fn budget_enforced() {
        assert!(make_ring(&RingSpec::zmod(5000), 4096).unwrap_err().is_budget());
        let spec = RingSpec::Product {
            factors: vec![RingSpec::zmod(64), RingSpec::zmod(64), RingSpec::zmod(2)],
        };
        assert!(make_ring(&spec, 4096).unwrap_err().is_budget());
    }

    #[test]
    fn bad_generator_reference() {
        let spec = RingSpec::from_json(r#"{"type":"excision","base":{"type":"zmod","n":4},"ideal":["(1, 2)"]}"#).unwrap();
        assert!(matches!(make_ring(&spec, 4096), Err(Error::ElementSyntax { .. })));
    }

    #[test]
    fn excision_z4() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        let i = ideal_generate(&z4, &[2]).unwrap();
        let e = excision_ring(&z4, &i, 4096).unwrap();
        let b = &e.ring;
        assert_eq!(b.size(), 8);
        // Units by table search, independent of the stored unit list.
        let units = b.elements().filter(|&x| b.elements().any(|y| b.mul(x, y) == b.one())).count();
        assert_eq!(units, 4);
        assert_eq!(b.format(b.one()), "(1, 0)");
        for x in b.elements() {
            assert_eq!(b.mul(b.one(), x), x);
        }
        assert_eq!(e.pi2.kernel().len(), i.len());
        assert!(e.pi2.is_surjective());
        assert_eq!(e.ideal.len(), 2);
        b.verify_axioms(0, 0).unwrap();
    }

    #[test]
    fn excision_by_zero_is_base() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        let e = excision_ring(&z4, &IdealHandle::zero(&z4), 4096).unwrap();
        assert!(e.proj.is_bijective());
    }

    #[test]
    fn double_and_iso() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        let i = ideal_generate(&z4, &[2]).unwrap();
        let d = double_ring(&z4, &i, 4096).unwrap();
        let count = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).filter(|(a, b)| (4 + a - b) % 2 == 0).count();
        assert_eq!(d.ring.size(), count);
        let iso = iso_double_excision(&z4, &i, 4096).unwrap();
        let src = iso.source().clone();
        let dst = iso.target().clone();
        assert_eq!(dst.format(iso.apply(src.parse("(1, 2)").unwrap())), "(1, 3)");
        let x = src.parse("(3, 2)").unwrap();
        assert_eq!(dst.format(iso.apply(src.mul(x, x))), "(1, 1)");
        assert_eq!(iso.apply(src.one()), dst.one());

        let full = double_ring(&z4, &IdealHandle::whole(&z4), 4096).unwrap();
        assert_eq!(full.ring.size(), 16);
        let zero = double_ring(&z4, &IdealHandle::zero(&z4), 4096).unwrap();
        assert!(zero.p1.is_bijective());
    }

    #[test]
    fn locality() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        assert_eq!(local_structure(&z4).unwrap().members(), &[0, 2]);
        let z6 = make_ring(&RingSpec::zmod(6), 4096).unwrap();
        assert!(local_structure(&z6).is_none());
        let i = ideal_generate(&z4, &[2]).unwrap();
        let e = excision_ring(&z4, &i, 4096).unwrap();
        let m = local_structure(&e.ring).unwrap();
        assert_eq!(m.len(), 4);
        // m ⊕ I
        for &x in m.members() {
            assert!(!z4.is_unit(e.proj.apply(x)));
        }
    }

    #[test]
    fn zmodel() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        let i = ideal_generate(&z4, &[2]).unwrap();
        let zm = zmodel_excision(&i, 4, 4096).unwrap();
        assert_eq!(zm.ring.size(), 8);
        assert_eq!(zm.fbar.apply(zm.ring.parse("(3, 2)").unwrap()), 1);
        assert!(zmodel_excision(&i, 6, 4096).is_err());
        let zero = zmodel_excision(&IdealHandle::zero(&z4), 4, 4096).unwrap();
        assert_eq!(zero.ring.size(), 4);
        assert_eq!(zero.ring.characteristic(), 4);
    }

    #[test]
    fn quotient_and_ideals() {
        let z8 = make_ring(&RingSpec::zmod(8), 4096).unwrap();
        let ideals = all_ideals(&z8).unwrap();
        let sizes: Vec<usize> = ideals.iter().map(|i| i.len()).collect();
        assert_eq!(sizes, vec![1, 2, 4, 8]);
        let q = quotient_ring(&z8, &ideals[2]).unwrap();
        assert_eq!(q.ring.size(), 2);
        let z2z2 = ring(r#"{"type":"product","factors":[{"type":"zmod","n":2},{"type":"zmod","n":2}]}"#);
        assert_eq!(all_ideals(&z2z2).unwrap().len(), 4);
    }

    #[test]
    fn element_syntax() {
        let p = ring(r#"{"type":"product","factors":[{"type":"zmod","n":2},{"type":"zmod","n":4}]}"#);
        let x = p.parse("(1, 3)").unwrap();
        assert_eq!(p.format(x), "(1, 3)");
        assert_eq!(p.parse("5").unwrap(), p.parse("(1, 1)").unwrap());
        assert!(p.parse("(1)").is_err());
        let d = ring(r#"{"type":"zmod_excision","k":4,"base":{"type":"zmod","n":4},"ideal":[2]}"#);
        assert_eq!(d.format(d.parse("(7, 2)").unwrap()), "(3, 2)");
        let f4 = ring(r#"{"type":"poly_quotient","base":{"type":"zmod","n":2},"poly":[1,1,1]}"#);
        let x = f4.parse("[0, 1]").unwrap();
        assert_eq!(f4.format(f4.mul(x, x)), "[1, 1]");
    }

    #[test]
    fn dense_and_structural_agree() {
        let b = ring(r#"{"type":"double","base":{"type":"zmod","n":8},"ideal":[2]}"#);
        assert!(b.is_dense());
        for x in b.elements() {
            for y in b.elements() {
                assert_eq!(b.add(x, y), b.add_structural(x, y));
                assert_eq!(b.mul(x, y), b.mul_structural(x, y));
            }
        }
        let big = ring(r#"{"type":"product","factors":[{"type":"zmod","n":16},{"type":"zmod","n":18}]}"#);
        assert!(!big.is_dense());
        big.verify_axioms(100_000, 7).unwrap();
    }
}
