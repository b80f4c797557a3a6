//! Reference constructions that favor the obvious slow route.
//!
//! Everything here exists to check the fast paths against, so none of it
//! shares machinery with them beyond the geometric primitives.

use num_traits::Signed;

use crate::cells::{level_cells, square_clip};
use crate::geom::{intersect2, intersect3, lift_point, LinForm, Line2, Plane3, Point2, Point3};
use crate::polyline::Polyline;
use crate::rat::{rat, Rational};
use crate::subdivision::{from_faces, LevelSubdivision};

/// k-level of an arrangement of lines by sorting every slab.
///
/// Requires `k < lines.len()`, pairwise distinct slopes, and no three
/// concurrent lines.
pub fn brute_klevel_2d(lines: &[Line2], k: usize) -> Polyline {
    assert!(k < lines.len());
    let mut xs: Vec<Rational> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = intersect2(&lines[i], &lines[j]) {
                xs.push(p.x);
            }
        }
    }
    xs.sort();
    xs.dedup();

    let samples: Vec<Rational> = if xs.is_empty() {
        vec![rat(0)]
    } else {
        let mut s = Vec::with_capacity(xs.len() + 1);
        s.push(&xs[0] - rat(1));
        for w in xs.windows(2) {
            s.push((&w[0] + &w[1]) / rat(2));
        }
        s.push(xs.last().unwrap() + rat(1));
        s
    };

    let mut edges: Vec<usize> = Vec::new();
    let mut breakpoints: Vec<Point2> = Vec::new();
    for x in &samples {
        let e = rank_at(lines, k, x);
        match edges.last() {
            Some(&prev) if prev == e => {}
            Some(&prev) => {
                let bp = intersect2(&lines[prev], &lines[e])
                    .expect("consecutive level edges must cross");
                breakpoints.push(bp);
                edges.push(e);
            }
            None => edges.push(e),
        }
    }
    Polyline { edges, breakpoints }
}

/// Index of the line with exactly `k` lines strictly below it at `x`.
fn rank_at(lines: &[Line2], k: usize, x: &Rational) -> usize {
    let mut order: Vec<usize> = (0..lines.len()).collect();
    order.sort_by(|&i, &j| lines[i].eval(x).cmp(&lines[j].eval(x)));
    order[k]
}

/// Why a plane set cannot be handled exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Degeneracy {
    IdenticalPlanes(usize, usize),
    /// Three planes meeting in a common line.
    SharedLine(usize, usize, usize),
    /// A fourth plane through an arrangement vertex.
    FourConcurrent([usize; 3], [usize; 3]),
}

impl std::fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Degeneracy::IdenticalPlanes(i, j) => write!(f, "planes {i} and {j} coincide"),
            Degeneracy::SharedLine(i, j, l) => {
                write!(f, "planes {i}, {j} and {l} share a line")
            }
            Degeneracy::FourConcurrent(a, b) => write!(
                f,
                "triples {a:?} and {b:?} meet at the same point"
            ),
        }
    }
}

/// Point where three planes meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrangementVertex {
    pub triple: [usize; 3],
    pub point: Point3,
}

fn planes_parallel(g: &Plane3, h: &Plane3) -> bool {
    g.a == h.a && g.b == h.b
}

fn tie_line(g: &Plane3, h: &Plane3) -> LinForm {
    LinForm::plane_difference(g, h)
}

fn forms_proportional(f: &LinForm, g: &LinForm) -> bool {
    &f.a * &g.b == &g.a * &f.b
        && &f.a * &g.c == &g.a * &f.c
        && &f.b * &g.c == &g.b * &f.c
}

/// Checks that no two planes coincide, no three share a line and no four
/// pass through a point, returning every arrangement vertex on success.
pub fn plane_set_in_general_position(
    planes: &[Plane3],
) -> Result<Vec<ArrangementVertex>, Degeneracy> {
    let n = planes.len();
    for i in 0..n {
        for j in i + 1..n {
            if planes[i] == planes[j] {
                return Err(Degeneracy::IdenticalPlanes(i, j));
            }
        }
    }
    let mut vertices: Vec<ArrangementVertex> = Vec::new();
    let mut by_point: std::collections::BTreeMap<Point3, [usize; 3]> =
        std::collections::BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            if planes_parallel(&planes[i], &planes[j]) {
                continue;
            }
            for l in j + 1..n {
                if planes_parallel(&planes[i], &planes[l])
                    || planes_parallel(&planes[j], &planes[l])
                {
                    continue;
                }
                match intersect3(&planes[i], &planes[j], &planes[l]) {
                    Some(p) => {
                        if let Some(prev) = by_point.get(&p) {
                            return Err(Degeneracy::FourConcurrent(*prev, [i, j, l]));
                        }
                        by_point.insert(p.clone(), [i, j, l]);
                        vertices.push(ArrangementVertex { triple: [i, j, l], point: p });
                    }
                    None => {
                        let fij = tie_line(&planes[i], &planes[j]);
                        let fil = tie_line(&planes[i], &planes[l]);
                        if forms_proportional(&fij, &fil) {
                            return Err(Degeneracy::SharedLine(i, j, l));
                        }
                    }
                }
            }
        }
    }
    Ok(vertices)
}

/// Clip half-width that provably encloses the arrangement: four times the
/// largest coordinate among vertices and among the points of each tie
/// line closest to the origin, and never less than one.
pub fn canonical_half_width(planes: &[Plane3], vertices: &[ArrangementVertex]) -> Rational {
    let mut m = rat(0);
    let mut bump = |v: &Rational| {
        let a = v.abs();
        if a > m {
            m = a;
        }
    };
    for v in vertices {
        bump(&v.point.x);
        bump(&v.point.y);
    }
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            if planes_parallel(&planes[i], &planes[j]) {
                continue;
            }
            let f = tie_line(&planes[i], &planes[j]);
            let s = &f.a * &f.a + &f.b * &f.b;
            bump(&(-(&f.c * &f.a) / &s));
            bump(&(-(&f.c * &f.b) / &s));
        }
    }
    let four = rat(4) * m;
    if four < rat(1) {
        rat(1)
    } else {
        four
    }
}

/// Subdivision of the (k+1)-smallest plane value over a chosen box.
pub fn brute_klevel_3d_in_box(
    planes: &[Plane3],
    k: usize,
    half_width: &Rational,
) -> Result<LevelSubdivision, Degeneracy> {
    plane_set_in_general_position(planes)?;
    assert!(k < planes.len(), "level index out of range");
    let cells = level_cells(planes, k, &square_clip(half_width));
    let faces: Vec<_> = cells.iter().map(|c| c.to_build_face(planes)).collect();
    let sub = from_faces(planes.to_vec(), k, half_width.clone(), &faces)
        .expect("cells of one level always close up");
    Ok(sub)
}

/// Subdivision of the (k+1)-smallest plane value over the canonical box.
pub fn brute_klevel_3d(planes: &[Plane3], k: usize) -> Result<LevelSubdivision, Degeneracy> {
    let vertices = plane_set_in_general_position(planes)?;
    assert!(k < planes.len(), "level index out of range");
    let w = canonical_half_width(planes, &vertices);
    brute_klevel_3d_in_box(planes, k, &w)
}

/// Order-k Voronoi diagram of point sites, as the subdivision whose faces
/// are labeled by the k-th nearest site.  Requires `1 <= k <= points.len()`.
pub fn order_k_voronoi(points: &[Point2], k: usize) -> Result<LevelSubdivision, Degeneracy> {
    assert!(k >= 1 && k <= points.len(), "order out of range");
    let planes: Vec<Plane3> = points.iter().map(lift_point).collect();
    brute_klevel_3d(&planes, k - 1)
}

/// Site indices sorted by distance from `q`, nearest first, used to spot
/// check Voronoi labels.
pub fn nearest_sites(points: &[Point2], q: &Point2) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    let d = |i: usize| {
        let dx = &points[i].x - &q.x;
        let dy = &points[i].y - &q.y;
        &dx * &dx + &dy * &dy
    };
    order.sort_by(|&i, &j| d(i).cmp(&d(j)).then(i.cmp(&j)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyline::check_polyline;
    use proptest::prelude::*;

    fn line(m: i64, t: i64) -> Line2 {
        Line2::new(rat(m), rat(t))
    }

    fn p2(x: i64, y: i64) -> Point2 {
        Point2::new(rat(x), rat(y))
    }

    fn tri_lines() -> Vec<Line2> {
        vec![line(0, 0), line(1, 0), line(-1, 2)]
    }

    #[test]
    fn three_line_levels_frozen() {
        let lines = tri_lines();
        assert_eq!(
            brute_klevel_2d(&lines, 0),
            Polyline {
                edges: vec![1, 0, 2],
                breakpoints: vec![p2(0, 0), p2(2, 0)],
            }
        );
        assert_eq!(
            brute_klevel_2d(&lines, 1),
            Polyline {
                edges: vec![0, 1, 2, 0],
                breakpoints: vec![p2(0, 0), p2(1, 1), p2(2, 0)],
            }
        );
        assert_eq!(
            brute_klevel_2d(&lines, 2),
            Polyline {
                edges: vec![2, 1],
                breakpoints: vec![p2(1, 1)],
            }
        );
    }

    #[test]
    fn single_line_is_its_own_level() {
        let lines = vec![line(3, -1)];
        assert_eq!(
            brute_klevel_2d(&lines, 0),
            Polyline {
                edges: vec![0],
                breakpoints: vec![],
            }
        );
    }

    fn arb_lines(max: usize) -> impl Strategy<Value = Vec<Line2>> {
        proptest::collection::btree_map(-40i64..40, -40i64..40, 1..max)
            .prop_map(|m| m.into_iter().map(|(s, t)| line(s, t)).collect())
    }

    fn arb_simple_lines(max: usize) -> impl Strategy<Value = Vec<Line2>> {
        arb_lines(max).prop_filter("three lines concurrent", |ls| {
            crate::geom::lines_in_general_position(ls)
        })
    }

    proptest! {
        #[test]
        fn every_level_validates(lines in arb_simple_lines(8)) {
            for k in 0..lines.len() {
                let poly = brute_klevel_2d(&lines, k);
                prop_assert_eq!(check_polyline(&lines, k, &poly), Ok(()));
            }
        }

        #[test]
        fn levels_of_all_ranks_cover_every_crossing_twice(lines in arb_simple_lines(7)) {
            let n = lines.len();
            let crossings = n * (n - 1) / 2;
            let mut total_edges = 0;
            let mut total_bps = 0;
            for k in 0..n {
                let poly = brute_klevel_2d(&lines, k);
                total_edges += poly.edges.len();
                total_bps += poly.breakpoints.len();
            }
            prop_assert_eq!(total_bps, 2 * crossings);
            prop_assert_eq!(total_edges, n * n);
        }

        #[test]
        fn reflection_swaps_level_ranks(lines in arb_lines(7)) {
            let n = lines.len();
            let flipped: Vec<Line2> = lines
                .iter()
                .map(|l| Line2::new(-l.m.clone(), -l.t.clone()))
                .collect();
            for k in 0..n {
                let poly = brute_klevel_2d(&lines, k);
                let mirror = brute_klevel_2d(&flipped, n - 1 - k);
                prop_assert_eq!(&poly.edges, &mirror.edges);
                let reflected: Vec<Point2> = mirror
                    .breakpoints
                    .iter()
                    .map(|p| Point2::new(p.x.clone(), -p.y.clone()))
                    .collect();
                prop_assert_eq!(&poly.breakpoints, &reflected);
            }
        }
    }

    use crate::subdivision::check_subdivision;
    use rand::Rng;
    use rand::SeedableRng;

    fn plane(a: i64, b: i64, c: i64) -> Plane3 {
        Plane3 { a: rat(a), b: rat(b), c: rat(c) }
    }

    fn rational_pt(x: (i64, i64), y: (i64, i64)) -> Point2 {
        Point2 { x: crate::rat::ratio(x.0, x.1), y: crate::rat::ratio(y.0, y.1) }
    }

    #[test]
    fn flags_identical_shared_line_and_concurrent_degeneracies() {
        let twice = vec![plane(1, 2, 3), plane(1, 2, 3)];
        assert_eq!(
            plane_set_in_general_position(&twice),
            Err(Degeneracy::IdenticalPlanes(0, 1))
        );
        // z = 0, z = x and z = 2x all contain the line z = 0, x = 0.
        let sheaf = vec![plane(0, 0, 0), plane(1, 0, 0), plane(2, 0, 0)];
        assert_eq!(
            plane_set_in_general_position(&sheaf),
            Err(Degeneracy::SharedLine(0, 1, 2))
        );
        let concurrent = vec![
            plane(1, 0, 0),
            plane(-1, 1, 0),
            plane(-1, -1, 0),
            plane(0, 0, 0),
        ];
        assert!(matches!(
            plane_set_in_general_position(&concurrent),
            Err(Degeneracy::FourConcurrent(_, _))
        ));
    }

    #[test]
    fn vertex_enumeration_is_exact() {
        let planes = vec![plane(1, 0, 0), plane(-1, 1, 0), plane(-1, -1, 6)];
        let verts = plane_set_in_general_position(&planes).unwrap();
        assert_eq!(verts.len(), 1);
        assert_eq!(verts[0].triple, [0, 1, 2]);
        let p = &verts[0].point;
        assert_eq!(planes[0].eval(&p.x, &p.y), p.z);
        assert_eq!(planes[1].eval(&p.x, &p.y), p.z);
        assert_eq!(planes[2].eval(&p.x, &p.y), p.z);
    }

    #[test]
    fn single_plane_level_is_one_square_face() {
        let planes = vec![plane(0, 0, 0)];
        let sub = brute_klevel_3d(&planes, 0).unwrap();
        assert_eq!(sub.half_width, rat(1));
        assert_eq!(sub.faces.len(), 2);
        assert_eq!(sub.vertices.len(), 4);
        assert!(sub.vertices.iter().all(|v| v.synthetic));
        check_subdivision(&sub).unwrap();
    }

    #[test]
    fn nearest_voronoi_of_three_sites_frozen() {
        let sites = vec![
            rational_pt((0, 1), (0, 1)),
            rational_pt((1, 1), (0, 1)),
            rational_pt((0, 1), (1, 1)),
        ];
        let sub = order_k_voronoi(&sites, 1).unwrap();
        assert_eq!(sub.half_width, rat(2));
        assert_eq!(sub.faces.len(), 4);
        let real: Vec<_> = sub.vertices.iter().filter(|v| !v.synthetic).collect();
        assert_eq!(real.len(), 1);
        assert_eq!(real[0].triple, Some([0, 1, 2]));
        assert_eq!(real[0].point.x, crate::rat::ratio(1, 2));
        assert_eq!(real[0].point.y, crate::rat::ratio(1, 2));
        assert_eq!(real[0].point.z, rat(0));
        assert_eq!(sub.vertices.len(), 7);
        assert_eq!(sub.half_edges.len(), 18);
        check_subdivision(&sub).unwrap();
    }

    #[test]
    fn nearest_voronoi_of_four_sites_frozen() {
        let sites = vec![
            rational_pt((0, 1), (0, 1)),
            rational_pt((4, 1), (0, 1)),
            rational_pt((0, 1), (4, 1)),
            rational_pt((5, 1), (5, 1)),
        ];
        let sub = order_k_voronoi(&sites, 1).unwrap();
        assert_eq!(sub.half_width, crate::rat::ratio(170, 13));
        let mut real: Vec<_> = sub
            .vertices
            .iter()
            .filter(|v| !v.synthetic)
            .map(|v| (v.point.xy(), v.triple.unwrap()))
            .collect();
        real.sort();
        assert_eq!(
            real,
            vec![
                (rational_pt((2, 1), (2, 1)), [0, 1, 2]),
                (rational_pt((17, 6), (17, 6)), [1, 2, 3]),
            ]
        );
        let inner = sub.faces.len() - 1;
        assert_eq!(inner, 4);
        check_subdivision(&sub).unwrap();
    }

    #[test]
    fn voronoi_faces_are_labeled_by_nearest_sites() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let sites: Vec<Point2> = (0..6)
            .map(|_| {
                rational_pt(
                    (rng.gen_range(-12i64..13), 3),
                    (rng.gen_range(-12i64..13), 3),
                )
            })
            .collect();
        for k in [1usize, 3, 6] {
            let sub = order_k_voronoi(&sites, k).unwrap();
            check_subdivision(&sub).unwrap();
            for (fi, face) in sub.faces.iter().enumerate() {
                if fi == sub.outer_face {
                    continue;
                }
                let poly = sub.face_polygon(fi);
                let c = crate::geom::polygon_centroid(&poly);
                let order = nearest_sites(&sites, &c);
                assert_eq!(Some(order[k - 1]), face.plane);
            }
        }
    }

    fn random_plane_set(seed: u64, n: usize) -> Vec<Plane3> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        loop {
            let planes: Vec<Plane3> = (0..n)
                .map(|_| {
                    plane(
                        rng.gen_range(-9..10),
                        rng.gen_range(-9..10),
                        rng.gen_range(-30..31),
                    )
                })
                .collect();
            if plane_set_in_general_position(&planes).is_ok() {
                return planes;
            }
        }
    }

    #[test]
    fn level_edges_sit_at_the_right_depth() {
        for seed in [1u64, 2, 3] {
            let planes = random_plane_set(seed, 6);
            for k in 0..planes.len() {
                let sub = brute_klevel_3d(&planes, k).unwrap();
                check_subdivision(&sub).unwrap();
                for (e, he) in sub.half_edges.iter().enumerate() {
                    if he.synthetic || he.plane.is_none() {
                        continue;
                    }
                    let t = he.twin;
                    if e > t {
                        continue;
                    }
                    let a = &sub.vertices[he.origin].point;
                    let b = &sub.vertices[sub.half_edges[t].origin].point;
                    let mid = Point3 {
                        x: (&a.x + &b.x) / rat(2),
                        y: (&a.y + &b.y) / rat(2),
                        z: (&a.z + &b.z) / rat(2),
                    };
                    let c = crate::geom::level_of(&planes, &mid);
                    assert!(
                        c + 1 == k || c == k,
                        "edge {e} at level {c} on the {k}-level"
                    );
                }
            }
        }
    }

    /// Splits every pairwise tie line at arrangement vertices and box
    /// crossings, keeps the pieces whose midpoints carry the right depth,
    /// and compares against the subdivision's real edges.
    fn edges_by_pair_splitting(
        planes: &[Plane3],
        k: usize,
        w: &Rational,
    ) -> Vec<(Point2, Point2, (usize, usize))> {
        let verts = plane_set_in_general_position(planes).unwrap();
        let mut out = Vec::new();
        let box_poly = crate::cells::square_clip(w);
        for i in 0..planes.len() {
            for j in i + 1..planes.len() {
                if planes_parallel(&planes[i], &planes[j]) {
                    continue;
                }
                let f = tie_line(&planes[i], &planes[j]);
                let by_x = f.b != rat(0);
                let param = |p: &Point2| if by_x { p.x.clone() } else { p.y.clone() };
                let mut points: Vec<Point2> = Vec::new();
                for v in &verts {
                    if v.triple.contains(&i) && v.triple.contains(&j) {
                        points.push(v.point.xy());
                    }
                }
                for s in 0..4 {
                    let a = &box_poly[s];
                    let b = &box_poly[(s + 1) % 4];
                    let side = LinForm {
                        a: &b.y - &a.y,
                        b: &a.x - &b.x,
                        c: &a.y * &b.x - &a.x * &b.y,
                    };
                    let den = &f.a * &side.b - &side.a * &f.b;
                    if den == rat(0) {
                        continue;
                    }
                    let x = (&f.b * &side.c - &side.b * &f.c) / &den;
                    let y = (&side.a * &f.c - &f.a * &side.c) / &den;
                    let p = Point2 { x, y };
                    let inside_x = p.x.abs() <= *w;
                    let inside_y = p.y.abs() <= *w;
                    if inside_x && inside_y {
                        points.push(p);
                    }
                }
                points.sort_by(|p, q| param(p).cmp(&param(q)));
                points.dedup();
                for pair in points.windows(2) {
                    let mid = Point2 {
                        x: (&pair[0].x + &pair[1].x) / rat(2),
                        y: (&pair[0].y + &pair[1].y) / rat(2),
                    };
                    let strict_x = mid.x.abs() < *w;
                    let strict_y = mid.y.abs() < *w;
                    if !strict_x || !strict_y {
                        continue;
                    }
                    let q = Point3 {
                        x: mid.x.clone(),
                        y: mid.y.clone(),
                        z: planes[i].eval_at(&mid),
                    };
                    let c = crate::geom::level_of(planes, &q);
                    if c == k || c + 1 == k {
                        out.push((pair[0].clone(), pair[1].clone(), (i, j)));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn pair_splitting_reproduces_the_level_edges() {
        for seed in [5u64, 8, 13] {
            let planes = random_plane_set(seed, 6);
            for k in [0, 2, 5] {
                let sub = brute_klevel_3d(&planes, k).unwrap();
                let mut expected: Vec<(Point2, Point2, (usize, usize))> =
                    edges_by_pair_splitting(&planes, k, &sub.half_width)
                        .into_iter()
                        .map(|(a, b, pair)| {
                            if a <= b {
                                (a, b, pair)
                            } else {
                                (b, a, pair)
                            }
                        })
                        .collect();
                expected.sort();
                let mut got: Vec<(Point2, Point2, (usize, usize))> = Vec::new();
                for (e, he) in sub.half_edges.iter().enumerate() {
                    if he.synthetic || e > he.twin {
                        continue;
                    }
                    let pa = sub.vertices[he.origin].point.xy();
                    let pb = sub.vertices[sub.half_edges[he.twin].origin].point.xy();
                    let (pa, pb) = if pa <= pb { (pa, pb) } else { (pb, pa) };
                    let mut pls = [
                        he.plane.expect("real edges are interior"),
                        sub.half_edges[he.twin].plane.expect("real edges are interior"),
                    ];
                    pls.sort_unstable();
                    got.push((pa, pb, (pls[0], pls[1])));
                }
                got.sort();
                assert_eq!(got, expected, "seed {seed} level {k}");
            }
        }
    }

    #[test]
    fn lifted_levels_match_distance_ranks() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let sites: Vec<Point2> = (0..5)
            .map(|_| {
                rational_pt(
                    (rng.gen_range(-10i64..11), 2),
                    (rng.gen_range(-10i64..11), 2),
                )
            })
            .collect();
        let planes: Vec<Plane3> = sites.iter().map(lift_point).collect();
        let q = rational_pt((3, 7), (-2, 7));
        for (i, pl) in planes.iter().enumerate() {
            let dx = &sites[i].x - &q.x;
            let dy = &sites[i].y - &q.y;
            let dist2 = &dx * &dx + &dy * &dy;
            let norm2 = &q.x * &q.x + &q.y * &q.y;
            assert_eq!(pl.eval_at(&q) + norm2, dist2);
        }
    }
}
