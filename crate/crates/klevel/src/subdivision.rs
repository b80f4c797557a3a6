//! Doubly connected edge list for plane levels clipped to a square box.
//!
//! Faces carry the index of their supporting plane, vertices carry the
//! defining plane triple when one exists, and every element introduced by
//! the clip boundary is flagged synthetic.  The outer face is the unique
//! face without a supporting plane; its cycle runs clockwise around the
//! clip square while every bounded face runs counterclockwise.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::geom::{orient2d, polygon_area2, Plane3, Point2, Point3};
use crate::rat::{rat, rat_to_f64, Rational};

/// Vertex of the subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub point: Point3,
    /// Indices of the three planes meeting at the vertex, when the vertex
    /// is a genuine arrangement vertex rather than a clip artifact.
    pub triple: Option<[usize; 3]>,
    pub synthetic: bool,
}

/// Half-edge of the subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfEdge {
    pub origin: usize,
    pub twin: usize,
    pub next: usize,
    pub face: usize,
    /// Supporting plane of the incident face, `None` on the outer face.
    pub plane: Option<usize>,
    pub synthetic: bool,
}

/// Face of the subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub edge: usize,
    /// `None` exactly for the outer face.
    pub plane: Option<usize>,
}

/// A plane level clipped to the square `max(|x|, |y|) <= half_width`.
#[derive(Debug, Clone)]
pub struct LevelSubdivision {
    pub planes: Vec<Plane3>,
    pub k: usize,
    pub half_width: Rational,
    pub vertices: Vec<Vertex>,
    pub half_edges: Vec<HalfEdge>,
    pub faces: Vec<Face>,
    pub outer_face: usize,
}

/// Corner of a face handed to [`from_faces`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildCorner {
    pub xy: Point2,
    pub z: Rational,
    pub triple: Option<[usize; 3]>,
    pub synthetic: bool,
}

/// Face handed to [`from_faces`]: a supporting plane index and a
/// counterclockwise corner ring.
#[derive(Debug, Clone)]
pub struct BuildFace {
    pub plane: usize,
    pub corners: Vec<BuildCorner>,
}

/// Why a set of face rings does not assemble into a subdivision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildDefect {
    /// The same projected point occurs with conflicting height, triple or
    /// synthetic data.
    InconsistentCorner(Point2),
    /// Two faces claim the same directed edge.
    DoubledEdge(Point2, Point2),
    /// An edge without a partner does not lie on the clip rim, or the rim
    /// edges do not close into a single cycle.
    OpenBoundary(Point2),
    /// A face ring with fewer than three corners, a repeated corner, or a
    /// nonpositive area.
    BadRing(usize),
}

impl std::fmt::Display for BuildDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuildDefect::InconsistentCorner(p) => {
                write!(f, "conflicting vertex data at ({}, {})", p.x, p.y)
            }
            BuildDefect::DoubledEdge(a, b) => write!(
                f,
                "edge ({}, {}) -> ({}, {}) claimed by two faces",
                a.x, a.y, b.x, b.y
            ),
            BuildDefect::OpenBoundary(p) => {
                write!(f, "unmatched edge away from the clip rim near ({}, {})", p.x, p.y)
            }
            BuildDefect::BadRing(i) => write!(f, "degenerate face ring {i}"),
        }
    }
}

/// Structural defect found by [`check_subdivision`].
#[derive(Debug, Clone)]
pub struct SubdivisionDefect {
    pub what: String,
    pub locus: String,
}

impl std::fmt::Display for SubdivisionDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} at {}", self.what, self.locus)
    }
}

fn defect(what: impl Into<String>, locus: impl Into<String>) -> SubdivisionDefect {
    SubdivisionDefect { what: what.into(), locus: locus.into() }
}

/// Which side line of the clip square a point lies on, if any.
fn rim_sides(p: &Point2, w: &Rational) -> [bool; 4] {
    let neg_w = -w.clone();
    [p.x == *w, p.x == neg_w, p.y == *w, p.y == neg_w]
}

fn on_rim(p: &Point2, w: &Rational) -> bool {
    rim_sides(p, w).iter().any(|&b| b)
}

fn common_rim_side(a: &Point2, b: &Point2, w: &Rational) -> bool {
    let sa = rim_sides(a, w);
    let sb = rim_sides(b, w);
    (0..4).any(|i| sa[i] && sb[i])
}

impl LevelSubdivision {
    /// Other endpoint of a half-edge.
    pub fn head(&self, e: usize) -> usize {
        self.half_edges[self.half_edges[e].twin].origin
    }

    /// Half-edge ids of a face cycle in `next` order.
    pub fn face_cycle(&self, f: usize) -> Vec<usize> {
        let start = self.faces[f].edge;
        let mut cycle = vec![start];
        let mut e = self.half_edges[start].next;
        while e != start {
            cycle.push(e);
            e = self.half_edges[e].next;
            assert!(cycle.len() <= self.half_edges.len(), "unclosed face cycle");
        }
        cycle
    }

    /// Projected corner ring of a face.
    pub fn face_polygon(&self, f: usize) -> Vec<Point2> {
        self.face_cycle(f)
            .iter()
            .map(|&e| self.vertices[self.half_edges[e].origin].point.xy())
            .collect()
    }

    /// Outgoing half-edges around the origin of `e`, following
    /// `next(twin(..))`, which walks clockwise.
    pub fn vertex_fan(&self, e: usize) -> Vec<usize> {
        let mut fan = vec![e];
        let mut cur = self.half_edges[self.half_edges[e].twin].next;
        while cur != e {
            fan.push(cur);
            cur = self.half_edges[self.half_edges[cur].twin].next;
            assert!(fan.len() <= self.half_edges.len(), "unclosed vertex fan");
        }
        fan
    }

    /// Builds the order-independent form used for equality tests.
    pub fn canonical_form(&self) -> CanonicalSubdivision {
        let mut vertices: Vec<(Point3, Option<[usize; 3]>, bool)> = self
            .vertices
            .iter()
            .map(|v| {
                let mut t = v.triple;
                if let Some(ref mut t) = t {
                    t.sort_unstable();
                }
                (v.point.clone(), t, v.synthetic)
            })
            .collect();
        vertices.sort();

        let mut edges = Vec::new();
        for (i, he) in self.half_edges.iter().enumerate() {
            if i < he.twin {
                let a = self.vertices[he.origin].point.clone();
                let b = self.vertices[self.half_edges[he.twin].origin].point.clone();
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                let mut planes = [he.plane, self.half_edges[he.twin].plane];
                planes.sort_unstable();
                edges.push((a, b, planes[0], planes[1], he.synthetic));
            }
        }
        edges.sort();

        let mut faces = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            let cycle = self.face_cycle(f);
            let mut ring: Vec<(Point3, Point3)> = cycle
                .iter()
                .map(|&e| {
                    let a = self.vertices[self.half_edges[e].origin].point.clone();
                    let b = self.vertices[self.head(e)].point.clone();
                    if a <= b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
                .collect();
            ring.sort();
            faces.push((face.plane, ring));
        }
        faces.sort();

        CanonicalSubdivision {
            k: self.k,
            half_width: self.half_width.clone(),
            vertices,
            edges,
            faces,
        }
    }
}

/// Order-independent description of a subdivision, compared with `==`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalSubdivision {
    pub k: usize,
    pub half_width: Rational,
    pub vertices: Vec<(Point3, Option<[usize; 3]>, bool)>,
    pub edges: Vec<(Point3, Point3, Option<usize>, Option<usize>, bool)>,
    pub faces: Vec<(Option<usize>, Vec<(Point3, Point3)>)>,
}

/// Assembles face rings into a subdivision, deduplicating vertices by
/// projected point and matching twins by directed endpoints.  Edges that
/// stay unmatched must tile the clip rim; they receive the outer face.
pub fn from_faces(
    planes: Vec<Plane3>,
    k: usize,
    half_width: Rational,
    build: &[BuildFace],
) -> Result<LevelSubdivision, BuildDefect> {
    from_faces_impl(planes, k, half_width, build, false)
}

/// Like [`from_faces`], but on conflicting triple or synthetic data the
/// vertex falls back to a plain synthetic point instead of failing.
/// Heights must always agree.  Used when rings from independent sources
/// meet along shared cut lines, where corner annotations legitimately
/// differ.
pub fn from_faces_lenient(
    planes: Vec<Plane3>,
    k: usize,
    half_width: Rational,
    build: &[BuildFace],
) -> Result<LevelSubdivision, BuildDefect> {
    from_faces_impl(planes, k, half_width, build, true)
}

fn from_faces_impl(
    planes: Vec<Plane3>,
    k: usize,
    half_width: Rational,
    build: &[BuildFace],
    lenient: bool,
) -> Result<LevelSubdivision, BuildDefect> {
    let mut vertex_ids: BTreeMap<Point2, usize> = BTreeMap::new();
    let mut vertices: Vec<Vertex> = Vec::new();

    let mut intern = |c: &BuildCorner| -> Result<usize, BuildDefect> {
        if let Some(&id) = vertex_ids.get(&c.xy) {
            let v = &vertices[id];
            let mut t = c.triple;
            if let Some(ref mut t) = t {
                t.sort_unstable();
            }
            if v.point.z != c.z {
                return Err(BuildDefect::InconsistentCorner(c.xy.clone()));
            }
            if v.triple != t || v.synthetic != c.synthetic {
                if lenient {
                    vertices[id].triple = None;
                    vertices[id].synthetic = true;
                } else {
                    return Err(BuildDefect::InconsistentCorner(c.xy.clone()));
                }
            }
            return Ok(id);
        }
        let id = vertices.len();
        let mut t = c.triple;
        if let Some(ref mut t) = t {
            t.sort_unstable();
        }
        vertices.push(Vertex {
            point: Point3 { x: c.xy.x.clone(), y: c.xy.y.clone(), z: c.z.clone() },
            triple: t,
            synthetic: c.synthetic,
        });
        vertex_ids.insert(c.xy.clone(), id);
        Ok(id)
    };

    struct ProtoEdge {
        origin: usize,
        head: usize,
        face: usize,
        plane: Option<usize>,
    }
    let mut proto: Vec<ProtoEdge> = Vec::new();
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut face_first_edge: Vec<usize> = Vec::new();

    for (fi, bf) in build.iter().enumerate() {
        if bf.corners.len() < 3 {
            return Err(BuildDefect::BadRing(fi));
        }
        let ring: Vec<usize> =
            bf.corners.iter().map(&mut intern).collect::<Result<_, _>>()?;
        let mut distinct = ring.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != ring.len() {
            return Err(BuildDefect::BadRing(fi));
        }
        let poly: Vec<Point2> = bf.corners.iter().map(|c| c.xy.clone()).collect();
        if !polygon_area2(&poly).is_positive() {
            return Err(BuildDefect::BadRing(fi));
        }
        let face_id = faces.len();
        faces.push(Face { edge: 0, plane: Some(bf.plane) });
        face_first_edge.push(proto.len());
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let eid = proto.len();
            if by_pair.insert((a, b), eid).is_some() {
                return Err(BuildDefect::DoubledEdge(
                    vertices[a].point.xy(),
                    vertices[b].point.xy(),
                ));
            }
            proto.push(ProtoEdge { origin: a, head: b, face: face_id, plane: Some(bf.plane) });
        }
    }

    let inner_count = proto.len();
    let mut twin: Vec<Option<usize>> = vec![None; inner_count];
    let mut rim_edges: Vec<usize> = Vec::new();
    for e in 0..inner_count {
        let key = (proto[e].head, proto[e].origin);
        match by_pair.get(&key) {
            Some(&t) => twin[e] = Some(t),
            None => {
                let a = &vertices[proto[e].origin].point.xy();
                let b = &vertices[proto[e].head].point.xy();
                if !common_rim_side(a, b, &half_width) {
                    return Err(BuildDefect::OpenBoundary(a.clone()));
                }
                rim_edges.push(e);
            }
        }
    }

    let outer_face = faces.len();
    faces.push(Face { edge: 0, plane: None });

    let mut half_edges: Vec<HalfEdge> = proto
        .iter()
        .map(|p| HalfEdge {
            origin: p.origin,
            twin: usize::MAX,
            next: usize::MAX,
            face: p.face,
            plane: p.plane,
            synthetic: false,
        })
        .collect();
    for e in 0..inner_count {
        if let Some(t) = twin[e] {
            half_edges[e].twin = t;
        }
    }

    let mut outer_by_origin: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in &rim_edges {
        let oid = half_edges.len();
        half_edges.push(HalfEdge {
            origin: proto[e].head,
            twin: e,
            next: usize::MAX,
            face: outer_face,
            plane: None,
            synthetic: true,
        });
        half_edges[e].twin = oid;
        if outer_by_origin.insert(proto[e].head, oid).is_some() {
            return Err(BuildDefect::OpenBoundary(vertices[proto[e].head].point.xy()));
        }
    }

    for fi in 0..build.len() {
        let base = face_first_edge[fi];
        let len = build[fi].corners.len();
        for i in 0..len {
            half_edges[base + i].next = base + (i + 1) % len;
        }
        faces[fi].edge = base;
    }

    if !rim_edges.is_empty() {
        let first_outer = half_edges[rim_edges[0]].twin;
        faces[outer_face].edge = first_outer;
        let mut seen = 0usize;
        let mut cur = first_outer;
        loop {
            let dest = half_edges[half_edges[cur].twin].origin;
            let nxt = match outer_by_origin.get(&dest) {
                Some(&n) => n,
                None => return Err(BuildDefect::OpenBoundary(vertices[dest].point.xy())),
            };
            half_edges[cur].next = nxt;
            seen += 1;
            cur = nxt;
            if cur == first_outer {
                break;
            }
            if seen > rim_edges.len() {
                return Err(BuildDefect::OpenBoundary(vertices[dest].point.xy()));
            }
        }
        if seen != rim_edges.len() {
            let stray = rim_edges
                .iter()
                .map(|&e| half_edges[e].twin)
                .find(|&o| half_edges[o].next == usize::MAX)
                .unwrap();
            return Err(BuildDefect::OpenBoundary(
                vertices[half_edges[stray].origin].point.xy(),
            ));
        }
    } else {
        faces.pop();
    }

    let edge_count = half_edges.len();
    for e in 0..edge_count {
        let t = half_edges[e].twin;
        let rim = {
            let a = vertices[half_edges[e].origin].point.xy();
            let b = vertices[half_edges[t].origin].point.xy();
            common_rim_side(&a, &b, &half_width)
        };
        let same_support =
            half_edges[e].plane.is_some() && half_edges[e].plane == half_edges[t].plane;
        half_edges[e].synthetic = rim || same_support;
    }

    let outer_face = if rim_edges.is_empty() { faces.len() } else { outer_face };
    Ok(LevelSubdivision {
        planes,
        k,
        half_width,
        vertices,
        half_edges,
        faces,
        outer_face,
    })
}

/// Compares two outgoing directions around a common origin by
/// counterclockwise angle from the positive x axis.
fn angle_order(u: &Point2, v: &Point2) -> std::cmp::Ordering {
    fn half(p: &Point2) -> u8 {
        let sy = crate::geom::sign(&p.y);
        if sy > 0 || (sy == 0 && crate::geom::sign(&p.x) > 0) {
            0
        } else {
            1
        }
    }
    let (hu, hv) = (half(u), half(v));
    if hu != hv {
        return hu.cmp(&hv);
    }
    let cross = &u.x * &v.y - &u.y * &v.x;
    match crate::geom::sign(&cross) {
        1 => std::cmp::Ordering::Less,
        -1 => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    }
}

/// Validates the structure and embedding of a claimed subdivision: index
/// sanity, the twin and next involutions, face cycles that are simple
/// counterclockwise polygons, a clockwise outer cycle tiling the clip rim,
/// clockwise vertex fans matching the geometric rotation, synthetic flags
/// consistent with the rim, no two edges crossing, and Euler's relation on
/// a connected structure.
pub fn check_subdivision(sub: &LevelSubdivision) -> Result<(), SubdivisionDefect> {
    let nv = sub.vertices.len();
    let ne = sub.half_edges.len();
    let nf = sub.faces.len();
    let np = sub.planes.len();
    let w = &sub.half_width;

    if nv == 0 || ne == 0 || nf < 2 {
        return Err(defect("empty subdivision", "structure"));
    }
    if *w < rat(1) {
        return Err(defect("clip half-width below one", "bbox"));
    }
    if ne % 2 != 0 {
        return Err(defect("odd number of half-edges", "structure"));
    }

    for (i, he) in sub.half_edges.iter().enumerate() {
        if he.origin >= nv || he.twin >= ne || he.next >= ne || he.face >= nf {
            return Err(defect("half-edge index out of range", format!("half-edge {i}")));
        }
        if let Some(p) = he.plane {
            if p >= np {
                return Err(defect("plane index out of range", format!("half-edge {i}")));
            }
        }
    }
    for (i, f) in sub.faces.iter().enumerate() {
        if f.edge >= ne {
            return Err(defect("face edge out of range", format!("face {i}")));
        }
        if let Some(p) = f.plane {
            if p >= np {
                return Err(defect("plane index out of range", format!("face {i}")));
            }
        }
    }
    if sub.outer_face >= nf || sub.faces[sub.outer_face].plane.is_some() {
        return Err(defect("outer face not marked", format!("face {}", sub.outer_face)));
    }
    for (i, f) in sub.faces.iter().enumerate() {
        if f.plane.is_none() && i != sub.outer_face {
            return Err(defect("second face without a plane", format!("face {i}")));
        }
    }

    for e in 0..ne {
        let t = sub.half_edges[e].twin;
        if t == e || sub.half_edges[t].twin != e {
            return Err(defect("twin is not an involution", format!("half-edge {e}")));
        }
        if sub.half_edges[sub.half_edges[e].next].origin != sub.half_edges[t].origin {
            return Err(defect("next does not continue at the head", format!("half-edge {e}")));
        }
        if sub.half_edges[sub.half_edges[e].next].face != sub.half_edges[e].face {
            return Err(defect("next leaves the face", format!("half-edge {e}")));
        }
        if sub.half_edges[e].plane != sub.faces[sub.half_edges[e].face].plane {
            return Err(defect("half-edge plane differs from its face", format!("half-edge {e}")));
        }
        if sub.half_edges[e].origin == sub.half_edges[t].origin {
            return Err(defect("zero-length edge", format!("half-edge {e}")));
        }
    }

    let mut seen_points: BTreeMap<Point2, usize> = BTreeMap::new();
    for (i, v) in sub.vertices.iter().enumerate() {
        let xy = v.point.xy();
        if let Some(&j) = seen_points.get(&xy) {
            return Err(defect("two vertices at one point", format!("vertices {j} and {i}")));
        }
        seen_points.insert(xy.clone(), i);
        let abs_x = if xy.x.is_negative() { -xy.x.clone() } else { xy.x.clone() };
        let abs_y = if xy.y.is_negative() { -xy.y.clone() } else { xy.y.clone() };
        let m = if abs_x >= abs_y { abs_x } else { abs_y };
        if m > *w {
            return Err(defect("vertex outside the clip box", format!("vertex {i}")));
        }
        let rim = m == *w;
        if rim != v.synthetic {
            return Err(defect("synthetic flag disagrees with the rim", format!("vertex {i}")));
        }
        match (&v.triple, v.synthetic) {
            (Some(t), false) => {
                let mut s = *t;
                s.sort_unstable();
                if s[0] == s[1] || s[1] == s[2] || s[2] >= np {
                    return Err(defect("invalid vertex triple", format!("vertex {i}")));
                }
            }
            (None, true) => {}
            (Some(_), true) => {
                return Err(defect("synthetic vertex with a triple", format!("vertex {i}")));
            }
            (None, false) => {
                return Err(defect("interior vertex without a triple", format!("vertex {i}")));
            }
        }
    }

    let mut face_of: Vec<Option<usize>> = vec![None; ne];
    for (fi, _) in sub.faces.iter().enumerate() {
        let start = sub.faces[fi].edge;
        if sub.half_edges[start].face != fi {
            return Err(defect("face edge belongs elsewhere", format!("face {fi}")));
        }
        let mut cycle = Vec::new();
        let mut e = start;
        loop {
            if face_of[e].is_some() {
                return Err(defect("half-edge in two face cycles", format!("half-edge {e}")));
            }
            face_of[e] = Some(fi);
            cycle.push(e);
            e = sub.half_edges[e].next;
            if e == start {
                break;
            }
            if cycle.len() > ne {
                return Err(defect("unclosed face cycle", format!("face {fi}")));
            }
        }
        if cycle.len() < 3 {
            return Err(defect("face cycle shorter than three", format!("face {fi}")));
        }
        let mut ids: Vec<usize> = cycle.iter().map(|&e| sub.half_edges[e].origin).collect();
        let poly: Vec<Point2> =
            ids.iter().map(|&v| sub.vertices[v].point.xy()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != cycle.len() {
            return Err(defect("face cycle repeats a vertex", format!("face {fi}")));
        }
        let area2 = polygon_area2(&poly);
        if fi == sub.outer_face {
            let expect = -(rat(8) * w * w);
            if area2 != expect {
                return Err(defect("outer cycle does not trace the rim", format!("face {fi}")));
            }
            for (&e, p) in cycle.iter().zip(poly.iter()) {
                if !on_rim(p, w) {
                    return Err(defect(
                        "outer cycle leaves the rim",
                        format!("half-edge {e}"),
                    ));
                }
            }
            for i in 0..poly.len() {
                let a = &poly[i];
                let b = &poly[(i + 1) % poly.len()];
                if !common_rim_side(a, b, w) {
                    return Err(defect("outer cycle cuts a corner", format!("face {fi}")));
                }
            }
        } else if !area2.is_positive() {
            return Err(defect("face cycle not counterclockwise", format!("face {fi}")));
        }
    }
    for e in 0..ne {
        if face_of[e] != Some(sub.half_edges[e].face) {
            return Err(defect("half-edge outside its face cycle", format!("half-edge {e}")));
        }
    }

    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for e in 0..ne {
        outgoing[sub.half_edges[e].origin].push(e);
    }
    let mut fan_seen = vec![false; ne];
    for v in 0..nv {
        if outgoing[v].is_empty() {
            return Err(defect("isolated vertex", format!("vertex {v}")));
        }
        if outgoing[v].len() < 2 {
            return Err(defect("vertex of degree one", format!("vertex {v}")));
        }
        let start = outgoing[v][0];
        let mut fan = Vec::new();
        let mut e = start;
        loop {
            if sub.half_edges[e].origin != v {
                return Err(defect("vertex fan drifts", format!("vertex {v}")));
            }
            if fan_seen[e] {
                return Err(defect("vertex fan revisits an edge", format!("half-edge {e}")));
            }
            fan_seen[e] = true;
            fan.push(e);
            e = sub.half_edges[sub.half_edges[e].twin].next;
            if e == start {
                break;
            }
            if fan.len() > outgoing[v].len() {
                return Err(defect("vertex fan does not close", format!("vertex {v}")));
            }
        }
        if fan.len() != outgoing[v].len() {
            return Err(defect("split vertex fan", format!("vertex {v}")));
        }
        let origin = sub.vertices[v].point.xy();
        let dirs: Vec<Point2> = fan
            .iter()
            .map(|&e| {
                let h = sub.half_edges[sub.half_edges[e].twin].origin;
                let p = sub.vertices[h].point.xy();
                Point2 { x: &p.x - &origin.x, y: &p.y - &origin.y }
            })
            .collect();
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                if angle_order(&dirs[i], &dirs[j]) == std::cmp::Ordering::Equal {
                    return Err(defect(
                        "two edges leave a vertex in one direction",
                        format!("vertex {v}"),
                    ));
                }
            }
        }
        if dirs.len() > 2 {
            let mut sorted: Vec<usize> = (0..dirs.len()).collect();
            sorted.sort_by(|&i, &j| angle_order(&dirs[i], &dirs[j]));
            sorted.reverse();
            let pos = sorted.iter().position(|&i| i == 0).unwrap();
            let aligned: Vec<usize> =
                (0..sorted.len()).map(|i| sorted[(pos + i) % sorted.len()]).collect();
            let expect: Vec<usize> = (0..dirs.len()).collect();
            if aligned != expect {
                return Err(defect(
                    "vertex fan disagrees with the clockwise rotation",
                    format!("vertex {v}"),
                ));
            }
        }
    }

    for e in 0..ne {
        let t = sub.half_edges[e].twin;
        let a = sub.vertices[sub.half_edges[e].origin].point.xy();
        let b = sub.vertices[sub.half_edges[t].origin].point.xy();
        let rim = common_rim_side(&a, &b, w);
        let same_support =
            sub.half_edges[e].plane.is_some() && sub.half_edges[e].plane == sub.half_edges[t].plane;
        if sub.half_edges[e].synthetic != (rim || same_support) {
            return Err(defect("edge synthetic flag wrong", format!("half-edge {e}")));
        }
    }

    let mut segs: Vec<(usize, usize, usize)> = Vec::new();
    for e in 0..ne {
        let t = sub.half_edges[e].twin;
        if e < t {
            segs.push((sub.half_edges[e].origin, sub.half_edges[t].origin, e));
        }
    }
    let pts_f64: Vec<(f64, f64)> = sub
        .vertices
        .iter()
        .map(|v| (rat_to_f64(&v.point.x), rat_to_f64(&v.point.y)))
        .collect();
    let boxes: Vec<(f64, f64, f64, f64)> = segs
        .iter()
        .map(|&(a, b, _)| {
            let (ax, ay) = pts_f64[a];
            let (bx, by) = pts_f64[b];
            let pad = 1e-9 * (1.0 + ax.abs().max(ay.abs()).max(bx.abs()).max(by.abs()));
            (ax.min(bx) - pad, ax.max(bx) + pad, ay.min(by) - pad, ay.max(by) + pad)
        })
        .collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let (alo, ahi, blo, bhi) = boxes[i];
            let (clo, chi, dlo, dhi) = boxes[j];
            if ahi < clo || chi < alo || bhi < dlo || dhi < blo {
                continue;
            }
            let (a, b, ei) = segs[i];
            let (c, d, ej) = segs[j];
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let pa = sub.vertices[a].point.xy();
            let pb = sub.vertices[b].point.xy();
            let pc = sub.vertices[c].point.xy();
            let pd = sub.vertices[d].point.xy();
            if crate::geom::segments_intersect(&pa, &pb, &pc, &pd) {
                return Err(defect(
                    "two edges intersect away from shared endpoints",
                    format!("half-edges {ei} and {ej}"),
                ));
            }
        }
    }
    for (vi, v) in sub.vertices.iter().enumerate() {
        let (px, py) = (rat_to_f64(&v.point.x), rat_to_f64(&v.point.y));
        for (si, &(a, b, e)) in segs.iter().enumerate() {
            if a == vi || b == vi {
                continue;
            }
            let (alo, ahi, blo, bhi) = boxes[si];
            if px < alo || px > ahi || py < blo || py > bhi {
                continue;
            }
            let pa = sub.vertices[a].point.xy();
            let pb = sub.vertices[b].point.xy();
            let p = v.point.xy();
            if orient2d(&pa, &pb, &p) == 0 {
                let within_x = (pa.x <= p.x && p.x <= pb.x) || (pb.x <= p.x && p.x <= pa.x);
                let within_y = (pa.y <= p.y && p.y <= pb.y) || (pb.y <= p.y && p.y <= pa.y);
                if within_x && within_y {
                    return Err(defect(
                        "vertex lies inside an edge",
                        format!("vertex {vi} on half-edge {e}"),
                    ));
                }
            }
        }
    }

    let mut reached = vec![false; ne];
    let mut stack = vec![0usize];
    reached[0] = true;
    while let Some(e) = stack.pop() {
        for nb in [sub.half_edges[e].twin, sub.half_edges[e].next] {
            if !reached[nb] {
                reached[nb] = true;
                stack.push(nb);
            }
        }
    }
    if reached.iter().any(|&r| !r) {
        return Err(defect("disconnected subdivision", "structure"));
    }
    let v = nv as i64;
    let e = (ne / 2) as i64;
    let f = nf as i64;
    if v - e + f != 2 {
        return Err(defect("Euler relation fails", format!("V={v} E={e} F={f}")));
    }

    Ok(())
}

/// Removes synthetic edges between faces with equal support and merges
/// collinear runs left behind, yielding the subdivision a direct
/// construction over the same box would produce.
pub fn dissolve_synthetic_edges(sub: &LevelSubdivision) -> LevelSubdivision {
    let nf = sub.faces.len();
    let mut group: Vec<usize> = (0..nf).collect();
    fn find(group: &mut Vec<usize>, i: usize) -> usize {
        if group[i] != i {
            let r = find(group, group[i]);
            group[i] = r;
            r
        } else {
            i
        }
    }
    for e in 0..sub.half_edges.len() {
        let t = sub.half_edges[e].twin;
        let (fa, fb) = (sub.half_edges[e].face, sub.half_edges[t].face);
        if fa != fb
            && sub.faces[fa].plane.is_some()
            && sub.faces[fa].plane == sub.faces[fb].plane
        {
            let (ra, rb) = (find(&mut group, fa), find(&mut group, fb));
            if ra != rb {
                group[ra] = rb;
            }
        }
    }

    let mut rings: BTreeMap<usize, Vec<BuildFace>> = BTreeMap::new();
    let mut next_in_group: BTreeMap<usize, usize> = BTreeMap::new();
    for e in 0..sub.half_edges.len() {
        let fe = sub.half_edges[e].face;
        if fe == sub.outer_face {
            continue;
        }
        let t = sub.half_edges[e].twin;
        let ft = sub.half_edges[t].face;
        let dissolved = ft != sub.outer_face
            && find(&mut group, fe) == find(&mut group, ft)
            && sub.faces[fe].plane == sub.faces[ft].plane
            && fe != ft;
        if dissolved {
            continue;
        }
        let mut n = sub.half_edges[e].next;
        loop {
            let tn = sub.half_edges[n].twin;
            let fn_ = sub.half_edges[tn].face;
            let drop_n = fn_ != sub.outer_face
                && sub.half_edges[n].face != fn_
                && find(&mut group, sub.half_edges[n].face) == find(&mut group, fn_)
                && sub.faces[sub.half_edges[n].face].plane == sub.faces[fn_].plane;
            if !drop_n {
                break;
            }
            n = sub.half_edges[tn].next;
        }
        next_in_group.insert(e, n);
    }

    let mut emitted: Vec<bool> = vec![false; sub.half_edges.len()];
    for (&start, _) in next_in_group.iter() {
        if emitted[start] {
            continue;
        }
        let root = find(&mut group, sub.half_edges[start].face);
        let plane = sub.faces[sub.half_edges[start].face].plane.unwrap();
        let mut ring_ids: Vec<usize> = Vec::new();
        let mut e = start;
        loop {
            emitted[e] = true;
            ring_ids.push(sub.half_edges[e].origin);
            e = next_in_group[&e];
            if e == start {
                break;
            }
        }
        let mut cleaned: Vec<usize> = Vec::new();
        let m = ring_ids.len();
        for i in 0..m {
            let prev = ring_ids[(i + m - 1) % m];
            let cur = ring_ids[i];
            let nxt = ring_ids[(i + 1) % m];
            let a = sub.vertices[prev].point.xy();
            let b = sub.vertices[cur].point.xy();
            let c = sub.vertices[nxt].point.xy();
            if orient2d(&a, &b, &c) != 0 {
                cleaned.push(cur);
            } else if sub.vertices[cur].synthetic
                || sub.vertices[cur].triple.is_none()
            {
                continue;
            } else {
                cleaned.push(cur);
            }
        }
        let corners: Vec<BuildCorner> = cleaned
            .iter()
            .map(|&v| BuildCorner {
                xy: sub.vertices[v].point.xy(),
                z: sub.vertices[v].point.z.clone(),
                triple: sub.vertices[v].triple,
                synthetic: sub.vertices[v].synthetic,
            })
            .collect();
        rings.entry(root).or_default().push(BuildFace { plane, corners });
    }

    let mut build: Vec<BuildFace> = Vec::new();
    for (_, mut faces) in rings {
        assert_eq!(faces.len(), 1, "merged face is not simply connected");
        build.push(faces.pop().unwrap());
    }
    from_faces(
        sub.planes.clone(),
        sub.k,
        sub.half_width.clone(),
        &build,
    )
    .expect("dissolving synthetic edges kept the structure closed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn pt(x: i64, y: i64) -> Point2 {
        Point2 { x: rat(x), y: rat(y) }
    }

    fn corner(x: i64, y: i64, z: i64, triple: Option<[usize; 3]>, synthetic: bool) -> BuildCorner {
        BuildCorner { xy: pt(x, y), z: rat(z), triple, synthetic }
    }

    fn flat_planes(n: usize) -> Vec<Plane3> {
        (0..n)
            .map(|i| Plane3 { a: rat(0), b: rat(0), c: rat(i as i64) })
            .collect()
    }

    /// One plane over the whole box: a single square face.
    fn single_square() -> LevelSubdivision {
        let faces = vec![BuildFace {
            plane: 0,
            corners: vec![
                corner(-2, -2, 0, None, true),
                corner(2, -2, 0, None, true),
                corner(2, 2, 0, None, true),
                corner(-2, 2, 0, None, true),
            ],
        }];
        from_faces(flat_planes(1), 0, rat(2), &faces).unwrap()
    }

    /// Two faces split by a vertical tie edge, supports 0 and 1.
    fn split_square() -> LevelSubdivision {
        let left = BuildFace {
            plane: 0,
            corners: vec![
                corner(-2, -2, 0, None, true),
                corner(0, -2, 0, None, true),
                corner(0, 2, 0, None, true),
                corner(-2, 2, 0, None, true),
            ],
        };
        let right = BuildFace {
            plane: 1,
            corners: vec![
                corner(0, -2, 0, None, true),
                corner(2, -2, 0, None, true),
                corner(2, 2, 0, None, true),
                corner(0, 2, 0, None, true),
            ],
        };
        from_faces(flat_planes(2), 0, rat(2), &[left, right]).unwrap()
    }

    #[test]
    fn builds_a_single_face_with_outer_rim() {
        let sub = single_square();
        assert_eq!(sub.faces.len(), 2);
        assert_eq!(sub.vertices.len(), 4);
        assert_eq!(sub.half_edges.len(), 8);
        assert_eq!(sub.outer_face, 1);
        check_subdivision(&sub).unwrap();
    }

    #[test]
    fn builds_two_faces_sharing_an_edge() {
        let sub = split_square();
        assert_eq!(sub.faces.len(), 3);
        assert_eq!(sub.vertices.len(), 6);
        assert_eq!(sub.half_edges.len(), 14);
        check_subdivision(&sub).unwrap();
        let shared: Vec<&HalfEdge> = sub
            .half_edges
            .iter()
            .filter(|he| he.plane.is_some() && !he.synthetic)
            .collect();
        assert_eq!(shared.len(), 2);
        assert_ne!(shared[0].plane, shared[1].plane);
    }

    #[test]
    fn twin_matching_is_exact_on_endpoints() {
        let sub = split_square();
        for (e, he) in sub.half_edges.iter().enumerate() {
            let t = &sub.half_edges[he.twin];
            assert_eq!(he.origin, sub.half_edges[t.next].origin);
            assert_eq!(t.origin, sub.half_edges[he.next].origin);
            assert_eq!(sub.half_edges[t.twin].origin, he.origin, "twin of twin at {e}");
        }
    }

    #[test]
    fn rejects_a_gap_in_the_interior() {
        let faces = vec![BuildFace {
            plane: 0,
            corners: vec![
                corner(-2, -2, 0, None, true),
                corner(2, -2, 0, None, true),
                corner(1, 1, 0, Some([0, 1, 2]), false),
            ],
        }];
        let got = from_faces(flat_planes(3), 0, rat(2), &faces);
        assert!(matches!(got, Err(BuildDefect::OpenBoundary(_))));
    }

    #[test]
    fn rejects_conflicting_vertex_heights() {
        let left = BuildFace {
            plane: 0,
            corners: vec![
                corner(-2, -2, 0, None, true),
                corner(0, -2, 0, None, true),
                corner(0, 2, 0, None, true),
                corner(-2, 2, 0, None, true),
            ],
        };
        let right = BuildFace {
            plane: 1,
            corners: vec![
                corner(0, -2, 7, None, true),
                corner(2, -2, 0, None, true),
                corner(2, 2, 0, None, true),
                corner(0, 2, 0, None, true),
            ],
        };
        let got = from_faces(flat_planes(2), 0, rat(2), &[left, right]);
        assert!(matches!(got, Err(BuildDefect::InconsistentCorner(_))));
    }

    #[test]
    fn vertex_fans_walk_clockwise() {
        let sub = split_square();
        let bottom_mid = sub
            .vertices
            .iter()
            .position(|v| v.point.xy() == pt(0, -2))
            .unwrap();
        let start = (0..sub.half_edges.len())
            .find(|&e| sub.half_edges[e].origin == bottom_mid)
            .unwrap();
        let fan = sub.vertex_fan(start);
        assert_eq!(fan.len(), 3);
        check_subdivision(&sub).unwrap();
    }

    /// Six axis-aligned cells around two interior vertices.
    fn ladder() -> LevelSubdivision {
        let cell = |plane: usize, x0: i64, x1: i64, y0: i64, y1: i64, t: [Option<[usize; 3]>; 4]| {
            let xs = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
            BuildFace {
                plane,
                corners: xs
                    .iter()
                    .zip(t.iter())
                    .map(|(&(x, y), &triple)| {
                        corner(x, y, 0, triple, triple.is_none())
                    })
                    .collect(),
            }
        };
        let a = Some([0, 1, 2]);
        let b = Some([2, 4, 5]);
        from_faces(
            flat_planes(6),
            0,
            rat(2),
            &[
                cell(0, -2, -1, -2, 0, [None, None, a, None]),
                cell(1, -2, -1, 0, 2, [None, a, None, None]),
                cell(2, -1, 1, -2, 0, [None, None, b, a]),
                cell(3, -1, 1, 0, 2, [a, b, None, None]),
                cell(4, 1, 2, -2, 0, [None, None, None, b]),
                cell(5, 1, 2, 0, 2, [b, None, None, None]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn detects_a_vertex_dragged_across_the_structure() {
        let sub = ladder();
        check_subdivision(&sub).unwrap();
        let v = sub
            .vertices
            .iter()
            .position(|v| v.point.xy() == pt(1, 0))
            .unwrap();
        let mut broken = sub.clone();
        broken.vertices[v].point.x = ratio(-3, 2);
        broken.vertices[v].point.y = rat(1);
        assert!(check_subdivision(&broken).is_err());
    }

    #[test]
    fn detects_broken_twin_wiring() {
        let mut sub = split_square();
        let e = sub.faces[0].edge;
        sub.half_edges[e].twin = e;
        assert!(check_subdivision(&sub).is_err());
    }

    #[test]
    fn detects_wrong_synthetic_flag() {
        let mut sub = split_square();
        let inner = (0..sub.half_edges.len())
            .find(|&e| !sub.half_edges[e].synthetic)
            .unwrap();
        sub.half_edges[inner].synthetic = true;
        assert!(check_subdivision(&sub).is_err());
    }

    #[test]
    fn detects_misplaced_vertex_triple() {
        let mut sub = split_square();
        sub.vertices[0].triple = Some([0, 1, 2]);
        let got = check_subdivision(&sub);
        assert!(got.is_err());
    }

    #[test]
    fn canonical_form_ignores_labels_and_order() {
        let a = split_square();
        let left = BuildFace {
            plane: 1,
            corners: vec![
                corner(0, -2, 0, None, true),
                corner(2, -2, 0, None, true),
                corner(2, 2, 0, None, true),
                corner(0, 2, 0, None, true),
            ],
        };
        let right = BuildFace {
            plane: 0,
            corners: vec![
                corner(0, 2, 0, None, true),
                corner(-2, 2, 0, None, true),
                corner(-2, -2, 0, None, true),
                corner(0, -2, 0, None, true),
            ],
        };
        let b = from_faces(flat_planes(2), 0, rat(2), &[left, right]).unwrap();
        assert_eq!(a.canonical_form(), b.canonical_form());
        let c = single_square();
        assert_ne!(a.canonical_form(), c.canonical_form());
    }

    #[test]
    fn dissolves_a_seam_between_equal_supports() {
        let left = BuildFace {
            plane: 0,
            corners: vec![
                corner(-2, -2, 0, None, true),
                corner(0, -2, 0, None, true),
                corner(0, 2, 0, None, true),
                corner(-2, 2, 0, None, true),
            ],
        };
        let right = BuildFace {
            plane: 0,
            corners: vec![
                corner(0, -2, 0, None, true),
                corner(2, -2, 0, None, true),
                corner(2, 2, 0, None, true),
                corner(0, 2, 0, None, true),
            ],
        };
        let seamed = from_faces(flat_planes(1), 0, rat(2), &[left, right]).unwrap();
        let dissolved = dissolve_synthetic_edges(&seamed);
        assert_eq!(dissolved.canonical_form(), single_square().canonical_form());
    }

    #[test]
    fn keeps_half_integer_coordinates_exact() {
        let w = ratio(5, 2);
        let faces = vec![BuildFace {
            plane: 0,
            corners: vec![
                BuildCorner { xy: Point2 { x: -w.clone(), y: -w.clone() }, z: rat(0), triple: None, synthetic: true },
                BuildCorner { xy: Point2 { x: w.clone(), y: -w.clone() }, z: rat(0), triple: None, synthetic: true },
                BuildCorner { xy: Point2 { x: w.clone(), y: w.clone() }, z: rat(0), triple: None, synthetic: true },
                BuildCorner { xy: Point2 { x: -w.clone(), y: w.clone() }, z: rat(0), triple: None, synthetic: true },
            ],
        }];
        let sub = from_faces(flat_planes(1), 0, w.clone(), &faces).unwrap();
        check_subdivision(&sub).unwrap();
        assert_eq!(sub.half_width, w);
    }
}
