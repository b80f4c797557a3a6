//! Geometric primitives and exact predicates.
//!
//! Planes are non-vertical graphs `z = a·x + b·y + c`; lines are
//! non-vertical graphs `y = m·x + t`. A plane is *below* a point when its
//! value at the point's projection is strictly smaller than the point's z.

use crate::rat::{rat, Rational};
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point2 {
    pub x: Rational,
    pub y: Rational,
}

impl Point2 {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point2 { x, y }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point3 {
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
}

impl Point3 {
    pub fn new(x: Rational, y: Rational, z: Rational) -> Self {
        Point3 { x, y, z }
    }

    pub fn xy(&self) -> Point2 {
        Point2::new(self.x.clone(), self.y.clone())
    }
}

/// Non-vertical plane `z = a·x + b·y + c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Plane3 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl Plane3 {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Self {
        Plane3 { a, b, c }
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        &self.a * x + &self.b * y + &self.c
    }

    pub fn eval_at(&self, p: &Point2) -> Rational {
        self.eval(&p.x, &p.y)
    }

    /// Strictly below the point.
    pub fn below(&self, q: &Point3) -> bool {
        self.eval(&q.x, &q.y) < q.z
    }

    /// Strictly above the point.
    pub fn above(&self, q: &Point3) -> bool {
        self.eval(&q.x, &q.y) > q.z
    }

    pub fn contains(&self, q: &Point3) -> bool {
        self.eval(&q.x, &q.y) == q.z
    }
}

/// Non-vertical line `y = m·x + t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line2 {
    pub m: Rational,
    pub t: Rational,
}

impl Line2 {
    pub fn new(m: Rational, t: Rational) -> Self {
        Line2 { m, t }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &self.m * x + &self.t
    }
}

/// Affine form `a·x + b·y + c` over the plane; the `= 0` locus is a line
/// when `(a, b) != (0, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinForm {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl LinForm {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Self {
        LinForm { a, b, c }
    }

    /// The form vanishing where `upper` and `lower` agree, positive where
    /// `upper` exceeds `lower`.
    pub fn plane_difference(upper: &Plane3, lower: &Plane3) -> Self {
        LinForm {
            a: &upper.a - &lower.a,
            b: &upper.b - &lower.b,
            c: &upper.c - &lower.c,
        }
    }

    pub fn eval(&self, p: &Point2) -> Rational {
        &self.a * &p.x + &self.b * &p.y + &self.c
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// Relative width of the floating error screens.  The screens only gate
/// which signs get re-derived exactly, so the value trades speed for
/// nothing else; it sits a million times above worst-case rounding.
pub const FILTER_EPS: f64 = 1e-9;

/// Sign of a screened value: `1` or `-1` once the value clears its
/// margin, `0` when the caller must decide exactly.
pub fn filtered_sign(value: f64, margin: f64) -> i8 {
    if value > margin {
        1
    } else if value < -margin {
        -1
    } else {
        0
    }
}

/// Floating image of a plane, for screening clearance signs.
#[derive(Debug, Clone)]
pub struct PlaneApprox {
    a: f64,
    b: f64,
    c: f64,
}

impl PlaneApprox {
    pub fn of(p: &Plane3) -> PlaneApprox {
        PlaneApprox {
            a: crate::rat::rat_to_f64(&p.a),
            b: crate::rat::rat_to_f64(&p.b),
            c: crate::rat::rat_to_f64(&p.c),
        }
    }

    /// Approximate clearance `eval(x, y) - z` with its error margin.
    pub fn clearance(&self, x: f64, y: f64, z: f64) -> (f64, f64) {
        let value = self.a * x + self.b * y + self.c - z;
        let margin = FILTER_EPS
            * (self.a.abs() * x.abs() + self.b.abs() * y.abs() + self.c.abs()
                + z.abs()
                + 1.0);
        (value, margin)
    }
}

/// Floating image of a linear form, for screening side-of-line signs.
#[derive(Debug, Clone)]
pub struct FormApprox {
    a: f64,
    b: f64,
    c: f64,
}

impl FormApprox {
    pub fn of(f: &LinForm) -> FormApprox {
        FormApprox {
            a: crate::rat::rat_to_f64(&f.a),
            b: crate::rat::rat_to_f64(&f.b),
            c: crate::rat::rat_to_f64(&f.c),
        }
    }

    /// Approximate `eval(x, y)` with its error margin.
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let value = self.a * x + self.b * y + self.c;
        let margin = FILTER_EPS
            * (self.a.abs() * x.abs() + self.b.abs() * y.abs() + self.c.abs() + 1.0);
        (value, margin)
    }
}

/// Screened orientation sign of `(a, b, p)` from floating coordinates:
/// `1` or `-1` when certain, `0` when the exact predicate must decide.
pub fn orient2d_screened(
    (ax, ay): (f64, f64),
    (bx, by): (f64, f64),
    (px, py): (f64, f64),
) -> i8 {
    let det = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    let sx = ax.abs() + bx.abs() + px.abs();
    let sy = ay.abs() + by.abs() + py.abs();
    let margin = FILTER_EPS * (sx * sy + 1.0);
    filtered_sign(det, margin)
}

/// Closed triangle with positively oriented corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangle2 {
    corners: [Point2; 3],
}

impl Triangle2 {
    /// Reorders the corners counter-clockwise; `None` if they are collinear.
    pub fn new(a: Point2, b: Point2, c: Point2) -> Option<Self> {
        match orient2d(&a, &b, &c) {
            0 => None,
            1 => Some(Triangle2 { corners: [a, b, c] }),
            _ => Some(Triangle2 { corners: [a, c, b] }),
        }
    }

    pub fn corners(&self) -> &[Point2; 3] {
        &self.corners
    }

    pub fn contains(&self, p: &Point2) -> bool {
        let [a, b, c] = &self.corners;
        orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0
    }

    pub fn contains_strictly(&self, p: &Point2) -> bool {
        let [a, b, c] = &self.corners;
        orient2d(a, b, p) > 0 && orient2d(b, c, p) > 0 && orient2d(c, a, p) > 0
    }

    /// `1` strictly inside, `0` on the boundary, `-1` outside, from a
    /// single pass over the three edges.
    pub fn locate(&self, p: &Point2) -> i8 {
        let [a, b, c] = &self.corners;
        let mut grazed = false;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            match orient2d(u, v, p) {
                -1 => return -1,
                0 => grazed = true,
                _ => {}
            }
        }
        if grazed {
            0
        } else {
            1
        }
    }

    pub fn centroid(&self) -> Point2 {
        let [a, b, c] = &self.corners;
        let third = crate::rat::ratio(1, 3);
        Point2::new(
            (&a.x + &b.x + &c.x) * &third,
            (&a.y + &b.y + &c.y) * &third,
        )
    }
}

/// Sign of the signed area of `(p, q, r)`: `1` for a left turn, `-1` for a
/// right turn, `0` for collinear.
pub fn orient2d(p: &Point2, q: &Point2, r: &Point2) -> i8 {
    let det = (&q.x - &p.x) * (&r.y - &p.y) - (&q.y - &p.y) * (&r.x - &p.x);
    sign(&det)
}

pub fn sign(r: &Rational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

fn on_segment_collinear(p: &Point2, a: &Point2, b: &Point2) -> bool {
    let lo_x = a.x.clone().min(b.x.clone());
    let hi_x = a.x.clone().max(b.x.clone());
    let lo_y = a.y.clone().min(b.y.clone());
    let hi_y = a.y.clone().max(b.y.clone());
    lo_x <= p.x && p.x <= hi_x && lo_y <= p.y && p.y <= hi_y
}

/// Do the closed segments `a1a2` and `b1b2` share at least one point?
pub fn segments_intersect(a1: &Point2, a2: &Point2, b1: &Point2, b2: &Point2) -> bool {
    let d1 = orient2d(b1, b2, a1);
    let d2 = orient2d(b1, b2, a2);
    let d3 = orient2d(a1, a2, b1);
    let d4 = orient2d(a1, a2, b2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment_collinear(a1, b1, b2))
        || (d2 == 0 && on_segment_collinear(a2, b1, b2))
        || (d3 == 0 && on_segment_collinear(b1, a1, a2))
        || (d4 == 0 && on_segment_collinear(b2, a1, a2))
}

/// Do the closed segments intersect anywhere besides a shared endpoint?
///
/// Used by embedding checks: segments that merely meet endpoint-to-endpoint
/// are fine, anything else is a crossing.
pub fn segments_cross(a1: &Point2, a2: &Point2, b1: &Point2, b2: &Point2) -> bool {
    if !segments_intersect(a1, a2, b1, b2) {
        return false;
    }
    let shared_endpoints = [(a1, b1), (a1, b2), (a2, b1), (a2, b2)]
        .iter()
        .filter(|(p, q)| p == q)
        .count();
    if shared_endpoints == 0 {
        return true;
    }
    if shared_endpoints > 1 {
        // Identical or reversed segments overlap completely.
        return true;
    }
    // One shared endpoint: a crossing remains only if some other endpoint
    // lies on the interior of the opposite segment, which collinear overlap
    // detects.
    let d1 = orient2d(b1, b2, a1);
    let d2 = orient2d(b1, b2, a2);
    if d1 == 0 && d2 == 0 {
        // Collinear with one shared endpoint: overlap iff the non-shared
        // endpoints point the same way.
        let (shared, a_other, b_other) = if a1 == b1 {
            (a1, a2, b2)
        } else if a1 == b2 {
            (a1, a2, b1)
        } else if a2 == b1 {
            (a2, a1, b2)
        } else {
            (a2, a1, b1)
        };
        let dax = sign(&(&a_other.x - &shared.x));
        let dbx = sign(&(&b_other.x - &shared.x));
        let day = sign(&(&a_other.y - &shared.y));
        let dby = sign(&(&b_other.y - &shared.y));
        return dax == dbx && day == dby;
    }
    false
}

/// Distinct slopes and no three concurrent lines: every crossing is simple.
pub fn lines_in_general_position(lines: &[Line2]) -> bool {
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if lines[i].m == lines[j].m {
                return false;
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = intersect2(&lines[i], &lines[j]) {
                if !seen.insert(p) {
                    return false;
                }
            }
        }
    }
    true
}

/// Tangent plane of the lifting transform at `p`: distances to `p` become
/// vertical gaps above the lifted surface.
pub fn lift_point(p: &Point2) -> Plane3 {
    Plane3 {
        a: rat(-2) * &p.x,
        b: rat(-2) * &p.y,
        c: &p.x * &p.x + &p.y * &p.y,
    }
}

/// Intersection of two non-parallel lines.
pub fn intersect2(l1: &Line2, l2: &Line2) -> Option<Point2> {
    let dm = &l1.m - &l2.m;
    if dm.is_zero() {
        return None;
    }
    let x = (&l2.t - &l1.t) / &dm;
    let y = l1.eval(&x);
    Some(Point2::new(x, y))
}

/// Common point of three planes; `None` when the projected directions are
/// degenerate (parallel planes or a shared line).
pub fn intersect3(h1: &Plane3, h2: &Plane3, h3: &Plane3) -> Option<Point3> {
    // Subtracting pairs leaves a 2x2 linear system in (x, y).
    let a1 = &h1.a - &h2.a;
    let b1 = &h1.b - &h2.b;
    let c1 = &h2.c - &h1.c;
    let a2 = &h1.a - &h3.a;
    let b2 = &h1.b - &h3.b;
    let c2 = &h3.c - &h1.c;
    let det = &a1 * &b2 - &a2 * &b1;
    if det.is_zero() {
        return None;
    }
    let x = (&c1 * &b2 - &c2 * &b1) / &det;
    let y = (&a1 * &c2 - &a2 * &c1) / &det;
    let z = h1.eval(&x, &y);
    Some(Point3::new(x, y, z))
}

/// Number of planes strictly below `q`.
pub fn level_of(planes: &[Plane3], q: &Point3) -> usize {
    planes.iter().filter(|h| h.below(q)).count()
}

/// Number of planes strictly below `q`, ignoring the listed indices.
pub fn level_of_excluding(planes: &[Plane3], q: &Point3, skip: &[usize]) -> usize {
    planes
        .iter()
        .enumerate()
        .filter(|(i, h)| !skip.contains(i) && h.below(q))
        .count()
}

/// Clips `poly` to the closed half-plane `form >= 0` (Sutherland-Hodgman).
pub fn clip_polygon(poly: &[Point2], form: &LinForm) -> Vec<Point2> {
    if poly.is_empty() {
        return Vec::new();
    }
    let vals: Vec<Rational> = poly.iter().map(|p| form.eval(p)).collect();
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        let (pi, pj) = (&poly[i], &poly[j]);
        let (vi, vj) = (&vals[i], &vals[j]);
        if !vi.is_negative() {
            out.push(pi.clone());
        }
        if (vi.is_negative() && vj.is_positive()) || (vi.is_positive() && vj.is_negative()) {
            let t = vi / (vi - vj);
            out.push(Point2::new(
                &pi.x + (&pj.x - &pi.x) * &t,
                &pi.y + (&pj.y - &pi.y) * &t,
            ));
        }
    }
    dedup_cyclic(&mut out);
    out
}

fn dedup_cyclic(pts: &mut Vec<Point2>) {
    pts.dedup();
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
}

/// Twice the signed area of a polygon.
pub fn polygon_area2(poly: &[Point2]) -> Rational {
    let mut acc = rat(0);
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        acc += &poly[i].x * &poly[j].y - &poly[j].x * &poly[i].y;
    }
    acc
}

/// Exact centroid of a polygon with nonzero area.
pub fn polygon_centroid(poly: &[Point2]) -> Point2 {
    let a2 = polygon_area2(poly);
    debug_assert!(!a2.is_zero());
    let mut cx = rat(0);
    let mut cy = rat(0);
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        let w = &poly[i].x * &poly[j].y - &poly[j].x * &poly[i].y;
        cx += (&poly[i].x + &poly[j].x) * &w;
        cy += (&poly[i].y + &poly[j].y) * &w;
    }
    let denom = rat(3) * &a2;
    Point2::new(cx / &denom, cy / &denom)
}

/// For every plane, an exact projected point where it is strictly lowest;
/// `Err(i)` names the first plane that is nowhere strictly below all others.
///
/// Feasibility of each "strictly lowest" region is decided by clipping a box
/// that provably meets the region whenever it is nonempty: the region is a
/// cell of the arrangement of bisector lines, so either all bisectors are
/// parallel (handled along their common normal) or a nonempty cell has a
/// polygon vertex among the pairwise bisector crossings.
pub fn convex_position_witnesses(planes: &[Plane3]) -> Result<Vec<Point2>, usize> {
    let mut out = Vec::with_capacity(planes.len());
    for (i, h) in planes.iter().enumerate() {
        match lowest_region_witness(planes, i, h) {
            Some(p) => out.push(p),
            None => return Err(i),
        }
    }
    Ok(out)
}

/// Is every plane somewhere strictly lowest?
pub fn convex_position_check(planes: &[Plane3]) -> bool {
    convex_position_witnesses(planes).is_ok()
}

fn lowest_region_witness(planes: &[Plane3], i: usize, h: &Plane3) -> Option<Point2> {
    let mut forms = Vec::new();
    for (j, g) in planes.iter().enumerate() {
        if j == i {
            continue;
        }
        let f = LinForm::plane_difference(g, h);
        if f.is_constant() {
            if !f.c.is_positive() {
                return None;
            }
            continue;
        }
        forms.push(f);
    }
    if forms.is_empty() {
        return Some(Point2::new(rat(0), rat(0)));
    }

    let parallel = forms
        .iter()
        .skip(1)
        .all(|f| (&f.a * &forms[0].b - &f.b * &forms[0].a).is_zero());
    if parallel {
        return parallel_strip_witness(&forms);
    }

    let mut reach = rat(1);
    for s in 0..forms.len() {
        for t in s + 1..forms.len() {
            let (fs, ft) = (&forms[s], &forms[t]);
            let det = &fs.a * &ft.b - &ft.a * &fs.b;
            if det.is_zero() {
                continue;
            }
            let x = (&ft.c * &fs.b - &fs.c * &ft.b) / &det;
            let y = (&fs.c * &ft.a - &ft.c * &fs.a) / &det;
            reach = reach.max(x.abs() + rat(1)).max(y.abs() + rat(1));
        }
    }
    let mut poly = vec![
        Point2::new(-reach.clone(), -reach.clone()),
        Point2::new(reach.clone(), -reach.clone()),
        Point2::new(reach.clone(), reach.clone()),
        Point2::new(-reach.clone(), reach.clone()),
    ];
    for f in &forms {
        poly = clip_polygon(&poly, f);
        if poly.len() < 3 {
            return None;
        }
    }
    if !polygon_area2(&poly).is_positive() {
        return None;
    }
    Some(polygon_centroid(&poly))
}

fn parallel_strip_witness(forms: &[LinForm]) -> Option<Point2> {
    // All bisector normals agree up to scale; solve along that direction.
    let (na, nb) = (forms[0].a.clone(), forms[0].b.clone());
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for f in forms {
        // f = lambda * (na, nb) dotted with p, plus f.c.
        let lambda = if !na.is_zero() { &f.a / &na } else { &f.b / &nb };
        debug_assert!(!lambda.is_zero());
        let bound = -&f.c / &lambda;
        if lambda.is_positive() {
            lo = Some(match lo {
                Some(v) => v.max(bound),
                None => bound,
            });
        } else {
            hi = Some(match hi {
                Some(v) => v.min(bound),
                None => bound,
            });
        }
    }
    let s = match (&lo, &hi) {
        (Some(l), Some(h)) => {
            if l < h {
                (l + h) / rat(2)
            } else {
                return None;
            }
        }
        (Some(l), None) => l + rat(1),
        (None, Some(h)) => h - rat(1),
        (None, None) => rat(0),
    };
    let norm2 = &na * &na + &nb * &nb;
    Some(Point2::new(&na * &s / &norm2, &nb * &s / &norm2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;
    use proptest::prelude::*;

    fn p2(x: i64, y: i64) -> Point2 {
        Point2::new(rat(x), rat(y))
    }

    fn plane(a: i64, b: i64, c: i64) -> Plane3 {
        Plane3::new(rat(a), rat(b), rat(c))
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift_point(&p2(0, 0)), plane(0, 0, 0));
        assert_eq!(lift_point(&p2(1, 0)), plane(-2, 0, 1));
        assert_eq!(lift_point(&p2(1, 2)), plane(-2, -4, 5));
    }

    #[test]
    fn lifted_triple_meets_at_circumcenter() {
        let h0 = lift_point(&p2(0, 0));
        let h1 = lift_point(&p2(1, 0));
        let h2 = lift_point(&p2(0, 1));
        let v = intersect3(&h0, &h1, &h2).unwrap();
        assert_eq!(v, Point3::new(ratio(1, 2), ratio(1, 2), rat(0)));
        assert_eq!(level_of(&[h0, h1, h2], &v), 0);
    }

    #[test]
    fn intersect3_origin_and_degenerate() {
        let v = intersect3(&plane(0, 0, 0), &plane(2, 0, 0), &plane(0, 2, 0)).unwrap();
        assert_eq!(v, Point3::new(rat(0), rat(0), rat(0)));
        // Two parallel planes never meet the third in a single point.
        assert!(intersect3(&plane(0, 0, 0), &plane(0, 0, 1), &plane(1, 0, 0)).is_none());
    }

    #[test]
    fn level_counts_strictly_below() {
        let hs = [plane(0, 0, 0), plane(0, 0, 2)];
        assert_eq!(level_of(&hs, &Point3::new(rat(0), rat(0), rat(1))), 1);
        assert_eq!(level_of(&hs, &Point3::new(rat(0), rat(0), rat(0))), 0);
        assert_eq!(level_of(&hs, &Point3::new(rat(0), rat(0), rat(3))), 2);
        assert_eq!(level_of(&[], &Point3::new(rat(0), rat(0), rat(0))), 0);
    }

    #[test]
    fn orientation_signs() {
        assert_eq!(orient2d(&p2(0, 0), &p2(1, 0), &p2(0, 1)), 1);
        assert_eq!(orient2d(&p2(0, 0), &p2(0, 1), &p2(1, 0)), -1);
        assert_eq!(orient2d(&p2(0, 0), &p2(1, 1), &p2(2, 2)), 0);
    }

    #[test]
    fn segment_predicates() {
        let (a1, a2) = (p2(0, 0), p2(2, 2));
        let (b1, b2) = (p2(0, 2), p2(2, 0));
        assert!(segments_intersect(&a1, &a2, &b1, &b2));
        assert!(segments_cross(&a1, &a2, &b1, &b2));
        // Shared endpoint only.
        assert!(segments_intersect(&a1, &a2, &a2, &p2(3, 0)));
        assert!(!segments_cross(&a1, &a2, &a2, &p2(3, 0)));
        // Collinear overlap.
        assert!(segments_cross(&a1, &a2, &p2(1, 1), &p2(3, 3)));
        // Collinear, shared endpoint, opposite directions.
        assert!(!segments_cross(&a1, &a2, &a1, &p2(-1, -1)));
        // Disjoint.
        assert!(!segments_intersect(&a1, &a2, &p2(5, 5), &p2(6, 5)));
        // Endpoint touching an interior point.
        assert!(segments_cross(&a1, &a2, &p2(1, 1), &p2(5, 1)));
    }

    #[test]
    fn triangle_orientation_and_containment() {
        let t = Triangle2::new(p2(0, 0), p2(0, 2), p2(2, 0)).unwrap();
        assert_eq!(orient2d(&t.corners()[0], &t.corners()[1], &t.corners()[2]), 1);
        assert!(Triangle2::new(p2(0, 0), p2(1, 1), p2(2, 2)).is_none());
        assert!(t.contains(&p2(0, 1)));
        assert!(!t.contains_strictly(&p2(0, 1)));
        assert!(t.contains_strictly(&Point2::new(ratio(1, 2), ratio(1, 2))));
        assert!(!t.contains(&p2(2, 2)));
    }

    #[test]
    fn general_position_of_lines() {
        let l = |m: i64, t: i64| Line2::new(rat(m), rat(t));
        assert!(lines_in_general_position(&[l(0, 0), l(1, 1), l(2, -1)]));
        assert!(!lines_in_general_position(&[l(0, 0), l(1, 1), l(2, 2)]));
        assert!(!lines_in_general_position(&[l(1, 0), l(1, 5)]));
        assert!(lines_in_general_position(&[]));
    }

    #[test]
    fn clip_keeps_positive_side() {
        let square = vec![p2(-1, -1), p2(1, -1), p2(1, 1), p2(-1, 1)];
        let right = clip_polygon(&square, &LinForm::new(rat(1), rat(0), rat(0)));
        assert_eq!(polygon_area2(&right), rat(4));
        assert_eq!(
            polygon_centroid(&right),
            Point2::new(crate::rat::ratio(1, 2), rat(0))
        );
        let gone = clip_polygon(&square, &LinForm::new(rat(1), rat(0), rat(-5)));
        assert!(gone.len() < 3);
    }

    #[test]
    fn convex_position_tent_examples() {
        // A plane below the crease of the other two is somewhere lowest.
        let tent_low = [plane(1, 0, 0), plane(-1, 0, 0), plane(0, 0, -10)];
        assert!(convex_position_check(&tent_low));
        // Raised above the crease it never reaches the envelope.
        let tent_high = [plane(1, 0, 0), plane(-1, 0, 0), plane(0, 0, 10)];
        assert!(!convex_position_check(&tent_high));
        let single = [plane(3, -2, 7)];
        assert!(convex_position_check(&single));
    }

    #[test]
    fn convex_position_witnesses_are_strict() {
        let hs = [
            plane(1, 0, 0),
            plane(-1, 0, 0),
            plane(0, 1, -3),
            plane(0, -1, -3),
            plane(0, 0, -10),
        ];
        let ws = convex_position_witnesses(&hs).unwrap();
        for (i, w) in ws.iter().enumerate() {
            let z = hs[i].eval_at(w);
            for (j, g) in hs.iter().enumerate() {
                if i != j {
                    assert!(g.eval_at(w) > z, "plane {i} not strictly lowest at witness");
                }
            }
        }
    }

    #[test]
    fn parallel_bisectors_reduce_to_a_strip() {
        // All bisectors vertical: strictly lowest on a strip of x.
        let hs = [plane(0, 0, 0), plane(1, 0, 1), plane(-1, 0, 1)];
        let ws = convex_position_witnesses(&hs).unwrap();
        let z = hs[0].eval_at(&ws[0]);
        assert!(hs[1].eval_at(&ws[0]) > z && hs[2].eval_at(&ws[0]) > z);
    }

    proptest! {
        #[test]
        fn lifting_identity(px in -20i64..20, py in -20i64..20, qx in -20i64..20, qy in -20i64..20) {
            let p = p2(px, py);
            let q = p2(qx, qy);
            let lifted = lift_point(&p);
            let gap = lifted.eval_at(&q) + (&q.x * &q.x + &q.y * &q.y);
            let dx = &p.x - &q.x;
            let dy = &p.y - &q.y;
            prop_assert_eq!(gap, &dx * &dx + &dy * &dy);
        }

        #[test]
        fn lifted_points_in_convex_position(pts in proptest::collection::btree_set((-12i64..12, -12i64..12), 1..7)) {
            let planes: Vec<Plane3> = pts.iter().map(|&(x, y)| lift_point(&p2(x, y))).collect();
            prop_assert!(convex_position_check(&planes));
        }

        #[test]
        fn orient_antisymmetry(ax in -9i64..9, ay in -9i64..9, bx in -9i64..9, by in -9i64..9, cx in -9i64..9, cy in -9i64..9) {
            let (a, b, c) = (p2(ax, ay), p2(bx, by), p2(cx, cy));
            prop_assert_eq!(orient2d(&a, &b, &c), -orient2d(&b, &a, &c));
            prop_assert_eq!(orient2d(&a, &b, &c), orient2d(&b, &c, &a));
        }
    }
}
