//! Ray shooting against envelopes of plane subsets.
//!
//! The walk keeps two plane sets per traversed edge: the planes strictly
//! below its midpoint and the planes strictly above.  Certifying that the
//! edge interior meets no third plane reduces to shooting the edge segment
//! against the upper envelope of the lower set and the lower envelope of
//! the upper set.  Membership changes one plane at a time as the walk
//! moves, so the set lives here and every query recomputes exactly.

use std::collections::BTreeSet;

use crate::geom::{Plane3, Point3};
use crate::rat::{rat, Rational};

/// Which envelope of the member planes is queried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Pointwise minimum; members lie above the query origin.
    Lower,
    /// Pointwise maximum; members lie below the query origin.
    Upper,
}

/// First contact of a query segment with the envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayHit {
    /// Parameter along `from -> to`, where `to` sits at one.
    pub t: Rational,
    /// Every member met at that parameter, ascending.
    pub planes: Vec<usize>,
}

/// The query origin touched or crossed a member plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriginNotClear {
    pub plane: usize,
}

/// A plane subset queried through one of its envelopes.
#[derive(Debug, Clone)]
pub struct DynamicEnvelope {
    side: Side,
    members: BTreeSet<usize>,
}

impl DynamicEnvelope {
    pub fn new(side: Side) -> Self {
        DynamicEnvelope { side, members: BTreeSet::new() }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn insert(&mut self, plane: usize) -> bool {
        self.members.insert(plane)
    }

    pub fn remove(&mut self, plane: usize) -> bool {
        self.members.remove(&plane)
    }

    pub fn contains(&self, plane: usize) -> bool {
        self.members.contains(&plane)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    fn clearance(&self, plane: &Plane3, q: &Point3) -> Rational {
        match self.side {
            Side::Upper => &q.z - plane.eval_at(&q.xy()),
            Side::Lower => plane.eval_at(&q.xy()) - &q.z,
        }
    }

    /// Shoots the ray through `from` and `to` at the envelope.
    ///
    /// Requires `from` strictly clear of every member; the lowest
    /// offending plane id is reported otherwise.  The hit parameter may
    /// exceed one when the first contact lies beyond `to`.
    pub fn ray_shoot(
        &self,
        planes: &[Plane3],
        from: &Point3,
        to: &Point3,
    ) -> Result<Option<RayHit>, OriginNotClear> {
        let mut best: Option<RayHit> = None;
        for &g in &self.members {
            let c0 = self.clearance(&planes[g], from);
            if c0 <= rat(0) {
                return Err(OriginNotClear { plane: g });
            }
            let c1 = self.clearance(&planes[g], to);
            if c1 >= c0 {
                continue;
            }
            let t = &c0 / (&c0 - &c1);
            match best.as_mut() {
                Some(hit) if t == hit.t => hit.planes.push(g),
                Some(hit) if t < hit.t => *hit = RayHit { t, planes: vec![g] },
                None => best = Some(RayHit { t, planes: vec![g] }),
                _ => {}
            }
        }
        Ok(best)
    }
}
