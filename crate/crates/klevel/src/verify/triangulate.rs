//! Triangulation of subdivision faces for region splitting.
//!
//! Every bounded face is cut into triangles by ear clipping, keeping the
//! subdivision's vertex indexing.  Triangle sides remember whether they
//! lie on a face boundary, and if so which plane supports the far side,
//! so later passes can walk region boundaries without consulting the
//! original half-edges again.

use std::collections::BTreeMap;

use crate::geom::{orient2d, Point2};
use crate::subdivision::LevelSubdivision;

/// What a triangle side coincides with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TriEdgeKind {
    /// Piece of the face boundary.  `other_plane` supports the face on
    /// the far side, `None` when that is the outer face.
    Border { other_plane: Option<usize>, synthetic: bool },
    /// Interior cut introduced by the triangulation.
    Diagonal,
}

/// One triangle of the mesh.
#[derive(Debug, Clone)]
pub struct Tri {
    /// Subdivision vertex indices, counterclockwise.
    pub v: [usize; 3],
    /// Neighbor across side `i`, which runs from `v[i]` to `v[(i+1)%3]`.
    pub nb: [Option<usize>; 3],
    /// Face of the subdivision this triangle came from.
    pub face: usize,
    pub kind: [TriEdgeKind; 3],
}

/// A face-respecting triangulation of a subdivision.
#[derive(Debug, Clone)]
pub struct TriMesh {
    /// Projected positions, indexed like the subdivision's vertices.
    pub xy: Vec<Point2>,
    pub tris: Vec<Tri>,
}

/// Ear clips a simple counterclockwise ring, returning index triples
/// into `xy`.  Flat corners are never clipped and blocked ears are
/// skipped, so collinear chains along the ring are safe.
pub fn triangulate_ring(xy: &[Point2], ring: &[usize]) -> Vec<[usize; 3]> {
    assert!(ring.len() >= 3, "ring shorter than three corners");
    let mut ids: Vec<usize> = ring.to_vec();
    let mut out = Vec::with_capacity(ids.len() - 2);
    while ids.len() > 3 {
        let m = ids.len();
        let mut clipped = false;
        'ears: for i in 0..m {
            let a = ids[(i + m - 1) % m];
            let b = ids[i];
            let c = ids[(i + 1) % m];
            if orient2d(&xy[a], &xy[b], &xy[c]) <= 0 {
                continue;
            }
            for &other in &ids {
                if other == a || other == b || other == c {
                    continue;
                }
                let inside = orient2d(&xy[a], &xy[b], &xy[other]) >= 0
                    && orient2d(&xy[b], &xy[c], &xy[other]) >= 0
                    && orient2d(&xy[c], &xy[a], &xy[other]) >= 0;
                if inside {
                    continue 'ears;
                }
            }
            out.push([a, b, c]);
            ids.remove(i);
            clipped = true;
            break;
        }
        assert!(clipped, "no ear in a simple polygon");
    }
    out.push([ids[0], ids[1], ids[2]]);
    out
}

/// Triangulates every bounded face of `sub`.
pub fn triangulate(sub: &LevelSubdivision) -> TriMesh {
    let xy: Vec<Point2> = sub.vertices.iter().map(|v| v.point.xy()).collect();
    let mut tris: Vec<Tri> = Vec::new();

    for (fi, face) in sub.faces.iter().enumerate() {
        if face.plane.is_none() {
            continue;
        }
        let mut ring = Vec::new();
        let mut border: BTreeMap<(usize, usize), TriEdgeKind> = BTreeMap::new();
        let start = face.edge;
        let mut e = start;
        loop {
            let he = &sub.half_edges[e];
            let head = sub.half_edges[he.next].origin;
            ring.push(he.origin);
            let twin = &sub.half_edges[he.twin];
            border.insert(
                (he.origin, head),
                TriEdgeKind::Border {
                    other_plane: twin.plane,
                    synthetic: he.synthetic,
                },
            );
            e = he.next;
            if e == start {
                break;
            }
        }
        for t in triangulate_ring(&xy, &ring) {
            let kind = std::array::from_fn(|i| {
                border
                    .get(&(t[i], t[(i + 1) % 3]))
                    .cloned()
                    .unwrap_or(TriEdgeKind::Diagonal)
            });
            tris.push(Tri { v: t, nb: [None, None, None], face: fi, kind });
        }
    }

    let mut by_pair: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (ti, t) in tris.iter().enumerate() {
        for i in 0..3 {
            by_pair.insert((t.v[i], t.v[(i + 1) % 3]), (ti, i));
        }
    }
    for ti in 0..tris.len() {
        for i in 0..3 {
            let pair = (tris[ti].v[(i + 1) % 3], tris[ti].v[i]);
            tris[ti].nb[i] = by_pair.get(&pair).map(|&(tj, _)| tj);
        }
    }

    TriMesh { xy, tris }
}
