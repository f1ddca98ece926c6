use std::sync::Arc;

use super::{Elem, FiniteRing};
use crate::Result;

/// An ideal: its generators and the realized member set.
#[derive(Clone)]
pub struct IdealHandle {
    ring: Arc<FiniteRing>,
    generators: Vec<Elem>,
    members: Vec<Elem>,
    contains: Vec<bool>,
    add_gens: Vec<Elem>,
}

impl std::fmt::Debug for IdealHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdealHandle")
            .field("generators", &self.generators)
            .field("members", &self.members)
            .finish()
    }
}

impl PartialEq for IdealHandle {
    fn eq(&self, other: &Self) -> bool {
        self.ring.hash() == other.ring.hash() && self.members == other.members
    }
}

impl Eq for IdealHandle {}

/// The ideal generated by `gens`: the sum of the principal ideals `(g)`.
pub fn ideal_generate(ring: &Arc<FiniteRing>, gens: &[Elem]) -> Result<IdealHandle> {
    for &g in gens {
        ring.check_elem(g as usize)?;
    }
    let n = ring.size();
    let mut contains = vec![false; n];
    contains[0] = true;
    let mut members = vec![0 as Elem];
    for &g in gens {
        let mut principal = vec![false; n];
        let mut prod = Vec::new();
        for r in ring.elements() {
            let x = ring.mul(r, g);
            if !principal[x as usize] {
                principal[x as usize] = true;
                prod.push(x);
            }
        }
        let current = members.clone();
        for s in current {
            for &p in &prod {
                let t = ring.add(s, p);
                if !contains[t as usize] {
                    contains[t as usize] = true;
                    members.push(t);
                }
            }
        }
    }
    Ok(IdealHandle::from_members(ring, gens.to_vec(), contains))
}

impl IdealHandle {
    pub(crate) fn from_members(ring: &Arc<FiniteRing>, generators: Vec<Elem>, contains: Vec<bool>) -> Self {
        let members: Vec<Elem> = (0..contains.len())
            .filter(|&x| contains[x])
            .map(|x| x as Elem)
            .collect();
        let mut span = vec![false; contains.len()];
        span[0] = true;
        let mut list = vec![0 as Elem];
        let mut add_gens = Vec::new();
        for &x in &members {
            if span[x as usize] {
                continue;
            }
            add_gens.push(x);
            for s in list.clone() {
                let mut t = ring.add(s, x);
                while !span[t as usize] {
                    span[t as usize] = true;
                    list.push(t);
                    t = ring.add(t, x);
                }
            }
        }
        IdealHandle {
            ring: ring.clone(),
            generators,
            members,
            contains,
            add_gens,
        }
    }

    pub fn zero(ring: &Arc<FiniteRing>) -> Self {
        ideal_generate(ring, &[]).expect("empty generator list")
    }

    pub fn whole(ring: &Arc<FiniteRing>) -> Self {
        ideal_generate(ring, &[ring.one()]).expect("one is an element")
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    /// Members in increasing index order; zero comes first.
    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        self.contains[x as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.members.len() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.members.len() == self.ring.size()
    }

    /// Additive generators of the ideal, chosen greedily by index.
    pub fn additive_generators(&self) -> &[Elem] {
        &self.add_gens
    }

    /// The coset `1 + I`, in increasing index order.
    pub fn one_plus(&self) -> Vec<Elem> {
        let mut v: Vec<Elem> = self.members.iter().map(|&i| self.ring.add(self.ring.one(), i)).collect();
        v.sort_unstable();
        v
    }

    pub fn is_subset_of(&self, other: &IdealHandle) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    /// Closed under addition and under multiplication by every ring element.
    pub fn verify_closed(&self) -> bool {
        let r = &self.ring;
        self.members.iter().all(|&a| {
            self.members.iter().all(|&b| self.contains(r.add(a, b)))
                && r.elements().all(|s| self.contains(r.mul(s, a)))
        })
    }

    /// Generators written in the ring's element syntax.
    pub fn generator_literals(&self) -> Vec<super::ElemLit> {
        self.generators
            .iter()
            .map(|&g| super::ElemLit::Str(self.ring.format(g)))
            .collect()
    }

    /// Short label such as `(2)` or `()`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.generators.iter().map(|&g| self.ring.format(g)).collect();
        format!("({})", parts.join(", "))
    }

    pub fn members_json(&self) -> serde_json::Value {
        self.ring.row_json(&self.members)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingSpec};

    #[test]
    fn principal_and_zero() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        assert_eq!(ideal_generate(&z4, &[2]).unwrap().members(), &[0, 2]);
        assert_eq!(ideal_generate(&z4, &[]).unwrap().members(), &[0]);
    }

    #[test]
    fn coprime_generators_give_whole_ring() {
        let z6 = make_ring(&RingSpec::zmod(6), 4096).unwrap();
        let i = ideal_generate(&z6, &[2, 3]).unwrap();
        assert!(i.is_whole());
        assert!(i.verify_closed());
    }

    #[test]
    fn index_bounds() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        assert!(ideal_generate(&z4, &[7]).is_err());
    }
}
