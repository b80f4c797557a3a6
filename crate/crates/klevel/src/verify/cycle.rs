//! Locating a point on each plane's level cycle.
//!
//! On the `k`-level surface, the portion supported by one plane `h` is
//! bounded by a single closed cycle: the locus where `h` has exactly
//! `k` planes strictly below it.  A point of that cycle anchors the
//! later interior-versus-exterior classification of `h` against a
//! region.  The point is found by shooting a ray inside `h` from a spot
//! where `h` is strictly lowest and counting sign flips of the other
//! planes along the way; the wall families guarantee the count climbs
//! high enough before the ray escapes.

use crate::geom::{level_of_excluding, Plane3, Point2, Point3};
use crate::rat::{rat, Rational};

/// No ray direction reached the requested level on the plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclePointFault {
    pub plane: usize,
}

const DIRECTIONS: [(i64, i64); 16] = [
    (1, 0),
    (0, 1),
    (1, 1),
    (1, -1),
    (2, 1),
    (1, 2),
    (-1, 2),
    (3, -1),
    (-2, 3),
    (5, 2),
    (2, -5),
    (-3, -4),
    (7, 3),
    (-5, 1),
    (1, 7),
    (-7, -2),
];

fn on_plane(h: &Plane3, p: &Point2) -> Point3 {
    Point3::new(p.x.clone(), p.y.clone(), h.eval_at(p))
}

/// Walks one ray direction; returns a point with `level == k` if the
/// running count passes through `k` exactly.
fn walk_direction(
    planes: &[Plane3],
    h: usize,
    start: &Point2,
    dir: (i64, i64),
    k: usize,
) -> Option<Point3> {
    let hp = &planes[h];
    let tip = Point2::new(&start.x + rat(dir.0), &start.y + rat(dir.1));
    let mut crossings: Vec<(Rational, i64)> = Vec::new();
    let mut level: i64 = 0;
    for (g, gp) in planes.iter().enumerate() {
        if g == h {
            continue;
        }
        let f0 = gp.eval_at(start) - hp.eval_at(start);
        if f0 < rat(0) {
            level += 1;
        }
        let slope = gp.eval_at(&tip) - hp.eval_at(&tip) - &f0;
        if slope == rat(0) {
            continue;
        }
        let t = -f0 / &slope;
        if t > rat(0) {
            crossings.push((t, if slope < rat(0) { 1 } else { -1 }));
        }
    }
    if level == k as i64 {
        return Some(on_plane(hp, start));
    }
    crossings.sort_by(|a, b| a.0.cmp(&b.0));
    let mut i = 0;
    while i < crossings.len() {
        let mut j = i;
        while j < crossings.len() && crossings[j].0 == crossings[i].0 {
            level += crossings[j].1;
            j += 1;
        }
        if level == k as i64 {
            let t_here = &crossings[i].0;
            let t_next = crossings
                .get(j)
                .map(|c| c.0.clone())
                .unwrap_or_else(|| t_here + rat(2));
            let t_mid = (t_here + t_next) / rat(2);
            let p = Point2::new(
                &start.x + &t_mid * rat(dir.0),
                &start.y + &t_mid * rat(dir.1),
            );
            return Some(on_plane(hp, &p));
        }
        i = j;
    }
    None
}

/// A point on plane `h` whose level among the other planes is exactly
/// `k`.  `witness` must be a spot where `h` is strictly lowest among
/// the inputs; `planes` holds inputs and walls together.
pub fn cycle_point(
    planes: &[Plane3],
    h: usize,
    witness: &Point2,
    k: usize,
) -> Result<Point3, CyclePointFault> {
    for dir in DIRECTIONS {
        if let Some(p) = walk_direction(planes, h, witness, dir, k) {
            if level_of_excluding(planes, &p, &[h]) == k {
                return Ok(p);
            }
        }
    }
    Err(CyclePointFault { plane: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{convex_position_witnesses, lift_point};
    use crate::oracle::{canonical_half_width, plane_set_in_general_position};
    use crate::verify::bounding::make_bounding_planes;

    fn lifted_inputs() -> Vec<Plane3> {
        [(0, 0), (7, 1), (3, 8), (-5, 4), (-6, -5), (2, -7), (9, -3), (-2, 11)]
            .iter()
            .map(|&(x, y)| lift_point(&Point2::new(rat(x), rat(y))))
            .collect()
    }

    fn extended() -> (Vec<Plane3>, Vec<Point2>, usize) {
        let inputs = lifted_inputs();
        let n = inputs.len();
        let vertices = plane_set_in_general_position(&inputs).unwrap();
        let w = canonical_half_width(&inputs, &vertices);
        let walls = make_bounding_planes(&inputs, &w, &vertices);
        let witnesses = convex_position_witnesses(&inputs).unwrap();
        let mut all = inputs;
        all.extend(walls.planes.iter().cloned());
        (all, witnesses, n)
    }

    #[test]
    fn level_zero_returns_the_envelope_witness() {
        let (all, witnesses, n) = extended();
        for h in 0..n {
            let p = cycle_point(&all, h, &witnesses[h], 0).unwrap();
            assert_eq!(p.xy(), witnesses[h]);
            assert_eq!(level_of_excluding(&all, &p, &[h]), 0);
        }
    }

    #[test]
    fn every_plane_reaches_every_level() {
        let (all, witnesses, n) = extended();
        for k in [1usize, 3, n - 1] {
            for h in 0..n {
                let p = cycle_point(&all, h, &witnesses[h], k).unwrap();
                assert!(all[h].contains(&p));
                assert_eq!(level_of_excluding(&all, &p, &[h]), k);
            }
        }
    }
}
