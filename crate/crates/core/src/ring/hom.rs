use std::sync::Arc;

use super::{Elem, FiniteRing, IdealHandle};
use crate::{Error, Result};

/// A ring homomorphism given by its element table. Construction checks
/// unit preservation, additivity and multiplicativity on every pair.
#[derive(Clone)]
pub struct RingHom {
    source: Arc<FiniteRing>,
    target: Arc<FiniteRing>,
    map: Vec<Elem>,
}

impl std::fmt::Debug for RingHom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RingHom").field("map", &self.map).finish()
    }
}

impl RingHom {
    pub fn new(source: Arc<FiniteRing>, target: Arc<FiniteRing>, map: Vec<Elem>) -> Result<Self> {
        if map.len() != source.size() {
            return Err(Error::Mismatch(format!(
                "map has {} entries for a source of size {}",
                map.len(),
                source.size()
            )));
        }
        for &y in &map {
            target.check_elem(y as usize)?;
        }
        if map[source.one() as usize] != target.one() {
            return Err(Error::Verification("map does not send one to one".into()));
        }
        for a in source.elements() {
            for b in source.elements() {
                let (fa, fb) = (map[a as usize], map[b as usize]);
                if map[source.add(a, b) as usize] != target.add(fa, fb)
                    || map[source.mul(a, b) as usize] != target.mul(fa, fb)
                {
                    return Err(Error::Verification(format!(
                        "map is not a homomorphism at ({}, {})",
                        source.format(a),
                        source.format(b)
                    )));
                }
            }
        }
        Ok(RingHom {
            source,
            target,
            map,
        })
    }

    pub fn from_fn(
        source: &Arc<FiniteRing>,
        target: &Arc<FiniteRing>,
        f: impl Fn(Elem) -> Elem,
    ) -> Result<Self> {
        let map = source.elements().map(f).collect();
        RingHom::new(source.clone(), target.clone(), map)
    }

    pub fn identity(ring: &Arc<FiniteRing>) -> Self {
        RingHom {
            source: ring.clone(),
            target: ring.clone(),
            map: ring.elements().collect(),
        }
    }

    pub fn source(&self) -> &Arc<FiniteRing> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteRing> {
        &self.target
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.map[x as usize]
    }

    pub fn apply_row(&self, v: &[Elem]) -> Vec<Elem> {
        v.iter().map(|&x| self.apply(x)).collect()
    }

    pub fn table(&self) -> &[Elem] {
        &self.map
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &RingHom) -> Result<RingHom> {
        if self.target.hash() != other.source.hash() {
            return Err(Error::Mismatch("composition of incompatible maps".into()));
        }
        Ok(RingHom {
            source: self.source.clone(),
            target: other.target.clone(),
            map: self.map.iter().map(|&x| other.apply(x)).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.size()];
        self.map.iter().all(|&y| !std::mem::replace(&mut seen[y as usize], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.size()];
        for &y in &self.map {
            seen[y as usize] = true;
        }
        seen.iter().all(|&s| s)
    }

    pub fn is_bijective(&self) -> bool {
        self.source.size() == self.target.size() && self.is_injective()
    }

    pub fn image(&self) -> Vec<Elem> {
        let mut v = self.map.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn kernel(&self) -> Vec<Elem> {
        self.source.elements().filter(|&x| self.apply(x) == 0).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.source.hash() == self.target.hash()
            && self.map.iter().enumerate().all(|(i, &y)| i == y as usize)
    }

    /// Whether the map sends every member of `src` into `dst`.
    pub fn maps_ideal_into(&self, src: &IdealHandle, dst: &IdealHandle) -> bool {
        src.members().iter().all(|&x| dst.contains(self.apply(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{make_ring, RingSpec};

    #[test]
    fn reduction_is_a_homomorphism() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        let z2 = make_ring(&RingSpec::zmod(2), 4096).unwrap();
        let h = RingHom::from_fn(&z4, &z2, |x| x % 2).unwrap();
        assert!(h.is_surjective());
        assert_eq!(h.kernel(), vec![0, 2]);
    }

    #[test]
    fn non_homomorphism_rejected() {
        let z4 = make_ring(&RingSpec::zmod(4), 4096).unwrap();
        assert!(RingHom::from_fn(&z4, &z4, |x| (x * 3) % 4).is_err());
        let z3 = make_ring(&RingSpec::zmod(3), 4096).unwrap();
        assert!(RingHom::from_fn(&z4, &z3, |x| x % 3).is_err());
    }
}
