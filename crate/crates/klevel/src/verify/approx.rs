//! Per-vertex clearance screens shared by the walk, leaf, and
//! classification passes.
//!
//! Every subdivision vertex that any pass touches gets one row: the
//! clearance of each plane over the vertex as a floating value with an
//! error margin, and the exact wall copy positions.  A sign that beats
//! its margin is final; anything closer is settled by exact arithmetic
//! at the caller.  Rows are filled on first touch and shared by every
//! later pass over the same vertex.

use crate::geom::{PlaneApprox, Point3};
use crate::rat::{rat_to_f64, Rational};
use crate::subdivision::LevelSubdivision;
use crate::verify::bounding::WallSet;

struct Row {
    /// Clearance and margin per subdivision plane, inputs and walls.
    diff: Box<[(f64, f64)]>,
    wall_pos: Option<[Rational; 3]>,
    through: Option<Box<[usize]>>,
}

pub struct EvalCache {
    planes: Vec<PlaneApprox>,
    n_inputs: usize,
    rows: Vec<Option<Row>>,
}

impl EvalCache {
    pub fn new(sub: &LevelSubdivision, n_inputs: usize) -> Self {
        EvalCache {
            planes: sub.planes.iter().map(PlaneApprox::of).collect(),
            n_inputs,
            rows: (0..sub.vertices.len()).map(|_| None).collect(),
        }
    }

    /// Exact clearance of plane `g` over a point.
    pub fn exact_diff(sub: &LevelSubdivision, g: usize, p: &Point3) -> Rational {
        sub.planes[g].eval(&p.x, &p.y) - &p.z
    }

    /// Fills the clearance row of vertex `v` if it is still empty.
    pub fn prime(&mut self, sub: &LevelSubdivision, v: usize) {
        if self.rows[v].is_some() {
            return;
        }
        let p = &sub.vertices[v].point;
        let x = rat_to_f64(&p.x);
        let y = rat_to_f64(&p.y);
        let z = rat_to_f64(&p.z);
        let diff: Box<[(f64, f64)]> =
            self.planes.iter().map(|pl| pl.clearance(x, y, z)).collect();
        self.rows[v] = Some(Row { diff, wall_pos: None, through: None });
    }

    /// Fills the wall copy positions of vertex `v`, priming it first.
    pub fn prime_walls(&mut self, sub: &LevelSubdivision, walls: &WallSet, v: usize) {
        self.prime(sub, v);
        let row = self.rows[v].as_mut().expect("row was just primed");
        if row.wall_pos.is_none() {
            row.wall_pos = Some(walls.positions(&sub.vertices[v].point));
        }
    }

    /// Screened clearance of plane `g` at a primed vertex.
    pub fn diff(&self, v: usize, g: usize) -> (f64, f64) {
        self.rows[v].as_ref().expect("vertex was primed").diff[g]
    }

    /// Wall copy positions of a vertex primed with walls.
    pub fn wall_pos(&self, v: usize) -> &[Rational; 3] {
        self.rows[v]
            .as_ref()
            .and_then(|r| r.wall_pos.as_ref())
            .expect("vertex walls were primed")
    }

    /// Ascending input planes through vertex `v`, resolved exactly where
    /// the screen cannot refute containment.
    pub fn through_planes(&mut self, sub: &LevelSubdivision, v: usize) -> &[usize] {
        self.prime(sub, v);
        let n = self.n_inputs;
        let row = self.rows[v].as_mut().expect("row was just primed");
        if row.through.is_none() {
            let p = &sub.vertices[v].point;
            let list: Vec<usize> = (0..n)
                .filter(|&g| {
                    let (value, margin) = row.diff[g];
                    value.abs() <= margin && sub.planes[g].contains(p)
                })
                .collect();
            row.through = Some(list.into_boxed_slice());
        }
        row.through.as_deref().expect("entry was just filled")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{filtered_sign, lift_point, sign, Point2};
    use crate::oracle::{
        brute_klevel_3d_in_box, canonical_half_width, plane_set_in_general_position,
    };
    use crate::rat::rat;
    use crate::verify::bounding::make_bounding_planes;

    fn fixture() -> (LevelSubdivision, WallSet, usize) {
        let inputs: Vec<crate::geom::Plane3> =
            [(0, 0), (7, 1), (3, 8), (-5, 4), (-6, -5), (2, -7)]
                .iter()
                .map(|&(x, y)| lift_point(&Point2::new(rat(x), rat(y))))
                .collect();
        let n = inputs.len();
        let vertices = plane_set_in_general_position(&inputs).unwrap();
        let w = canonical_half_width(&inputs, &vertices);
        let cand = brute_klevel_3d_in_box(&inputs, 2, &w).unwrap();
        let walls = make_bounding_planes(&inputs, &w, &vertices);
        let glue = crate::verify::extend::extend_with_annulus(&cand, &walls).unwrap();
        (glue.sub, walls, n)
    }

    #[test]
    fn screened_signs_never_contradict_exact_clearances() {
        let (sub, _, n) = fixture();
        let mut cache = EvalCache::new(&sub, n);
        for v in 0..sub.vertices.len() {
            cache.prime(&sub, v);
            let p = &sub.vertices[v].point;
            for g in 0..sub.planes.len() {
                let (value, margin) = cache.diff(v, g);
                let screened = filtered_sign(value, margin);
                if screened != 0 {
                    let exact = sign(&EvalCache::exact_diff(&sub, g, p));
                    assert_eq!(screened, exact, "vertex {v} plane {g}");
                }
            }
        }
    }

    #[test]
    fn through_planes_match_exact_containment() {
        let (sub, _, n) = fixture();
        let mut cache = EvalCache::new(&sub, n);
        for v in 0..sub.vertices.len() {
            let listed: Vec<usize> = cache.through_planes(&sub, v).to_vec();
            let p = &sub.vertices[v].point;
            let direct: Vec<usize> =
                (0..n).filter(|&g| sub.planes[g].contains(p)).collect();
            assert_eq!(listed, direct, "vertex {v}");
        }
    }

    #[test]
    fn wall_positions_round_trip_the_direct_evaluation() {
        let (sub, walls, n) = fixture();
        let mut cache = EvalCache::new(&sub, n);
        for v in (0..sub.vertices.len()).step_by(7) {
            cache.prime_walls(&sub, &walls, v);
            let q = &sub.vertices[v].point;
            assert_eq!(
                walls.below_count_at(cache.wall_pos(v)),
                walls.below_count(q),
                "vertex {v}"
            );
        }
    }
}
