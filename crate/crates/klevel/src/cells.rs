//! Cells of the surface formed by the (k+1)-smallest plane value.
//!
//! Over any convex clip region the surface decomposes into convex cells,
//! one per pair of a supporting plane and a sign vector recording which of
//! the remaining planes lie below.  Crossing the tie segment with another
//! plane swaps that plane into the support, so a breadth-first walk from a
//! single generic point reaches every cell that meets the clip region.
//! Plane pairs whose tie line misses the clip region entirely are detected
//! once, from the corner signs of their difference form, and settled
//! without any polygon clipping.

use std::collections::{HashMap, VecDeque};

use num_traits::Signed;

use crate::geom::{clip_polygon, LinForm, Plane3, Point2, Point3};
use crate::rat::{rat, ratio, Rational};
use crate::subdivision::{BuildCorner, BuildFace};

/// Label of one cell boundary segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellEdgeKind {
    /// Tie with another plane; the index names it.
    Tie(usize),
    /// Piece of the clip region boundary; the index names the clip side.
    Clip(usize),
}

/// One convex cell of the surface.
#[derive(Debug, Clone)]
pub struct LevelCell {
    pub support: usize,
    /// `signs[i]` is -1 when plane `i` runs strictly below the support
    /// on this cell, 1 when strictly above, and 0 only at `support`.
    pub signs: Vec<i8>,
    pub polygon: Vec<Point2>,
    /// `edges[i]` labels the segment from `polygon[i]` to `polygon[i+1]`.
    pub edges: Vec<CellEdgeKind>,
}

impl LevelCell {
    /// Height of the cell's supporting plane above a projected point.
    pub fn lift(&self, planes: &[Plane3], p: &Point2) -> Rational {
        planes[self.support].eval_at(p)
    }

    /// Face ring for assembly into a subdivision.  Corner triples come
    /// from the labels of the two segments meeting there; a corner
    /// touching the clip boundary is synthetic.
    pub fn to_build_face(&self, planes: &[Plane3]) -> BuildFace {
        let m = self.polygon.len();
        let mut corners = Vec::with_capacity(m);
        for i in 0..m {
            let before = &self.edges[(i + m - 1) % m];
            let after = &self.edges[i];
            let (triple, synthetic) = match (before, after) {
                (CellEdgeKind::Tie(g), CellEdgeKind::Tie(h)) => {
                    let mut t = [self.support, *g, *h];
                    t.sort_unstable();
                    (Some(t), false)
                }
                _ => (None, true),
            };
            corners.push(BuildCorner {
                xy: self.polygon[i].clone(),
                z: planes[self.support].eval_at(&self.polygon[i]),
                triple,
                synthetic,
            });
        }
        BuildFace { plane: self.support, corners }
    }
}

/// Sorted plane values at a point, smallest first, with plane indices.
fn ranked_values(planes: &[Plane3], p: &Point2) -> Vec<(Rational, usize)> {
    let mut v: Vec<(Rational, usize)> =
        planes.iter().enumerate().map(|(i, h)| (h.eval_at(p), i)).collect();
    v.sort();
    v
}

/// A point of the open clip region where all plane values are pairwise
/// distinct.  Starts at the centroid and retreats along a parabolic arc,
/// which meets each tie line at most twice.
pub fn find_generic_point(planes: &[Plane3], clip: &[Point2]) -> Point2 {
    let centroid = crate::geom::polygon_centroid(clip);
    let mut span = rat(0);
    for p in clip {
        for q in clip {
            let dx = (&p.x - &q.x).abs();
            let dy = (&p.y - &q.y).abs();
            if dx > span {
                span = dx.clone();
            }
            if dy > span {
                span = dy.clone();
            }
        }
    }
    let mut step = span * ratio(1, 4);
    for _ in 0..10_000 {
        let q = Point2 {
            x: &centroid.x + &step,
            y: &centroid.y + &step * &step,
        };
        let inside = clip.iter().zip(clip.iter().cycle().skip(1)).all(|(a, b)| {
            crate::geom::orient2d(a, b, &q) > 0
        });
        if inside {
            let ranked = ranked_values(planes, &q);
            let distinct =
                ranked.windows(2).all(|w| w[0].0 != w[1].0);
            if distinct {
                return q;
            }
        }
        step = step * ratio(1, 2);
    }
    panic!("no generic point found in the clip region");
}

/// Sign of `planes[hi] - planes[lo]` over the whole clip region when it
/// is constant and nonzero there, else 0; computed once per pair.
fn constant_pair_side(
    planes: &[Plane3],
    clip: &[Point2],
    cache: &mut HashMap<(usize, usize), i8>,
    lo: usize,
    hi: usize,
) -> i8 {
    if let Some(&v) = cache.get(&(lo, hi)) {
        return v;
    }
    let form = LinForm::plane_difference(&planes[hi], &planes[lo]);
    let mut value = 0i8;
    for (i, p) in clip.iter().enumerate() {
        let s = crate::geom::sign(&form.eval(p));
        if s == 0 || (i > 0 && s != value) {
            value = 0;
            break;
        }
        value = s;
    }
    cache.insert((lo, hi), value);
    value
}

/// All cells of the surface of the (k+1)-smallest value over `clip`.
///
/// `clip` must be a convex counterclockwise polygon and no three planes
/// may share a common line.  Cells are reported in discovery order.
pub fn level_cells(planes: &[Plane3], k: usize, clip: &[Point2]) -> Vec<LevelCell> {
    let n = planes.len();
    assert!(k < n, "level index out of range");
    assert!(clip.len() >= 3, "clip region must be a polygon");

    let clip_forms: Vec<LinForm> = (0..clip.len())
        .map(|i| {
            let a = &clip[i];
            let b = &clip[(i + 1) % clip.len()];
            LinForm {
                a: &b.y - &a.y,
                b: &a.x - &b.x,
                c: &a.y * &b.x - &a.x * &b.y,
            }
        })
        .collect();

    let start = find_generic_point(planes, clip);
    let ranked = ranked_values(planes, &start);
    let support = ranked[k].1;
    let mut signs = vec![0i8; n];
    for (rank, &(_, i)) in ranked.iter().enumerate() {
        if i != support {
            signs[i] = if rank < k { -1 } else { 1 };
        }
    }

    let mut seen: HashMap<(usize, Vec<i8>), ()> = HashMap::new();
    let mut queue: VecDeque<(usize, Vec<i8>)> = VecDeque::new();
    seen.insert((support, signs.clone()), ());
    queue.push_back((support, signs));
    let mut cells = Vec::new();
    let mut pair_side: HashMap<(usize, usize), i8> = HashMap::new();

    while let Some((s, signs)) = queue.pop_front() {
        let mut poly = clip.to_vec();
        let mut cut: Vec<usize> = Vec::new();
        let mut dead = false;
        for g in 0..n {
            if g == s {
                continue;
            }
            let (lo, hi) = if g < s { (g, s) } else { (s, g) };
            let side = constant_pair_side(planes, clip, &mut pair_side, lo, hi);
            if side != 0 {
                let toward_g = if g > s { side } else { -side };
                if toward_g == signs[g] {
                    continue;
                }
                dead = true;
                break;
            }
            let mut form = LinForm::plane_difference(&planes[g], &planes[s]);
            if signs[g] < 0 {
                form = LinForm { a: -form.a, b: -form.b, c: -form.c };
            }
            poly = clip_polygon(&poly, &form);
            if poly.len() < 3 {
                break;
            }
            cut.push(g);
        }
        if dead || poly.len() < 3 || !crate::geom::polygon_area2(&poly).is_positive() {
            continue;
        }

        let m = poly.len();
        let mut edges = Vec::with_capacity(m);
        for i in 0..m {
            let a = &poly[i];
            let b = &poly[(i + 1) % m];
            let mid = Point2 {
                x: (&a.x + &b.x) * ratio(1, 2),
                y: (&a.y + &b.y) * ratio(1, 2),
            };
            let clip_side = clip_forms.iter().position(|f| f.eval(&mid) == rat(0));
            if let Some(side) = clip_side {
                edges.push(CellEdgeKind::Clip(side));
                continue;
            }
            let zs = planes[s].eval_at(&mid);
            let mut tied: Vec<usize> = cut
                .iter()
                .copied()
                .filter(|&g| planes[g].eval_at(&mid) == zs)
                .collect();
            if tied.len() > 1 {
                let quarter = Point2 {
                    x: (&a.x + &mid.x) * ratio(1, 2),
                    y: (&a.y + &mid.y) * ratio(1, 2),
                };
                let zq = planes[s].eval_at(&quarter);
                tied.retain(|&g| planes[g].eval_at(&quarter) == zq);
            }
            assert_eq!(
                tied.len(),
                1,
                "cell edge must run along the tie with exactly one other plane"
            );
            let g = tied[0];
            edges.push(CellEdgeKind::Tie(g));

            let mut nsigns = signs.clone();
            nsigns[g] = 0;
            nsigns[s] = signs[g];
            let key = (g, nsigns);
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), ());
                queue.push_back(key);
            }
        }
        cells.push(LevelCell { support: s, signs, polygon: poly, edges });
    }
    cells
}

/// Square clip region of half-width `w`, counterclockwise.
pub fn square_clip(w: &Rational) -> Vec<Point2> {
    let n = -w.clone();
    vec![
        Point2 { x: n.clone(), y: n.clone() },
        Point2 { x: w.clone(), y: n },
        Point2 { x: w.clone(), y: w.clone() },
        Point2 { x: -w.clone(), y: w.clone() },
    ]
}

/// Vertex of the three-plane arrangement meeting at a single point, used
/// by tests to pin cell corners.
pub fn triple_point(planes: &[Plane3], t: [usize; 3]) -> Option<Point3> {
    crate::geom::intersect3(&planes[t[0]], &planes[t[1]], &planes[t[2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::level_of;
    use rand::Rng;
    use rand::SeedableRng;

    fn plane(a: i64, b: i64, c: i64) -> Plane3 {
        Plane3 { a: rat(a), b: rat(b), c: rat(c) }
    }

    /// Three planes tilted toward each other; their lower envelope has a
    /// single vertex at the origin.
    fn tripod() -> Vec<Plane3> {
        vec![plane(1, 0, 0), plane(-1, 1, 0), plane(-1, -1, 0)]
    }

    #[test]
    fn lowest_level_of_a_tripod_has_three_cells() {
        let planes = tripod();
        let cells = level_cells(&planes, 0, &square_clip(&rat(4)));
        assert_eq!(cells.len(), 3);
        let mut supports: Vec<usize> = cells.iter().map(|c| c.support).collect();
        supports.sort_unstable();
        assert_eq!(supports, vec![0, 1, 2]);
        for cell in &cells {
            let ties = cell
                .edges
                .iter()
                .filter(|e| matches!(e, CellEdgeKind::Tie(_)))
                .count();
            assert_eq!(ties, 2);
        }
    }

    #[test]
    fn middle_level_of_a_tripod_has_six_cells() {
        let planes = tripod();
        let cells = level_cells(&planes, 1, &square_clip(&rat(4)));
        assert_eq!(cells.len(), 6);
        let mut per_support = [0usize; 3];
        for cell in &cells {
            per_support[cell.support] += 1;
        }
        assert_eq!(per_support, [2, 2, 2]);
    }

    #[test]
    fn cells_tile_the_clip_region() {
        let planes = tripod();
        let w = rat(4);
        for k in 0..3 {
            let cells = level_cells(&planes, k, &square_clip(&w));
            let total: Rational = cells
                .iter()
                .map(|c| crate::geom::polygon_area2(&c.polygon))
                .sum();
            assert_eq!(total, rat(8) * &w * &w, "level {k}");
        }
    }

    #[test]
    fn sampled_points_agree_with_direct_ranking() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let planes: Vec<Plane3> = (0..7)
            .map(|_| {
                plane(
                    rng.gen_range(-6..7),
                    rng.gen_range(-6..7),
                    rng.gen_range(-20..21),
                )
            })
            .collect();
        let w = rat(9);
        for k in [0, 3, 6] {
            let cells = level_cells(&planes, k, &square_clip(&w));
            for cell in &cells {
                let c = crate::geom::polygon_centroid(&cell.polygon);
                let ranked = ranked_values(&planes, &c);
                assert_eq!(ranked[k].1, cell.support);
                let q = Point3 {
                    x: c.x.clone(),
                    y: c.y.clone(),
                    z: planes[cell.support].eval_at(&c),
                };
                assert_eq!(level_of(&planes, &q), k);
            }
        }
    }

    #[test]
    fn sign_vectors_count_planes_below() {
        let planes = tripod();
        for k in 0..3 {
            let cells = level_cells(&planes, k, &square_clip(&rat(4)));
            for cell in &cells {
                let below = cell.signs.iter().filter(|&&s| s < 0).count();
                assert_eq!(below, k, "support {}", cell.support);
            }
        }
    }

    #[test]
    fn build_faces_carry_triples_at_interior_corners() {
        let planes = tripod();
        let cells = level_cells(&planes, 0, &square_clip(&rat(4)));
        let mut interior_corners = 0;
        for cell in &cells {
            let bf = cell.to_build_face(&planes);
            for c in &bf.corners {
                if let Some(t) = c.triple {
                    assert_eq!(t, [0, 1, 2]);
                    assert_eq!(c.xy, Point2 { x: rat(0), y: rat(0) });
                    assert!(!c.synthetic);
                    interior_corners += 1;
                } else {
                    assert!(c.synthetic);
                }
            }
        }
        assert_eq!(interior_corners, 3);
    }

    #[test]
    fn generic_point_avoids_every_tie() {
        let planes = tripod();
        let q = find_generic_point(&planes, &square_clip(&rat(4)));
        let ranked = ranked_values(&planes, &q);
        assert!(ranked.windows(2).all(|w| w[0].0 != w[1].0));
        let inside = square_clip(&rat(4));
        for i in 0..inside.len() {
            let a = &inside[i];
            let b = &inside[(i + 1) % inside.len()];
            assert!(crate::geom::orient2d(a, b, &q) > 0);
        }
    }
}
