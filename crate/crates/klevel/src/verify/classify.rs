//! Classifying planes against a decomposition region.
//!
//! A verified region boundary pins each in-scope plane to one of three
//! roles.  Planes supporting a boundary edge, passing through a
//! boundary vertex, or whose cycle point touches the region are kept;
//! planes whose cycle point falls outside are exterior and contribute
//! to the region only a constant below-count, absorbed into the child
//! level.  Keeping a plane too eagerly is harmless, dropping one is
//! not, so every tie breaks toward keeping.

use std::collections::BTreeSet;

use crate::geom::{Point3, Triangle2};
use crate::rat::rat_to_f64;
use crate::subdivision::LevelSubdivision;
use crate::verify::decomp::DecompNode;
use crate::verify::triangulate::{TriEdgeKind, TriMesh};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
    pub exterior: Vec<usize>,
}

/// Input planes through each vertex, resolved on first touch and kept
/// for every region that asks later.
pub struct VertexPlaneTable {
    through: Vec<Option<Vec<usize>>>,
}

impl VertexPlaneTable {
    pub fn new(vertex_count: usize) -> Self {
        VertexPlaneTable { through: vec![None; vertex_count] }
    }

    /// Ascending input plane ids containing vertex `v` of `sub`.
    pub fn get(&mut self, sub: &LevelSubdivision, n_inputs: usize, v: usize) -> &[usize] {
        if self.through[v].is_none() {
            let p = &sub.vertices[v].point;
            let list: Vec<usize> =
                (0..n_inputs).filter(|&g| sub.planes[g].contains(p)).collect();
            self.through[v] = Some(list);
        }
        self.through[v].as_deref().expect("entry was just filled")
    }
}

/// Conservative floating bounds around a region, for discarding far
/// cycle points before any exact test.
struct CoarseBox {
    lo_x: f64,
    hi_x: f64,
    lo_y: f64,
    hi_y: f64,
}

impl CoarseBox {
    fn of_region(mesh: &TriMesh, tris: &[usize]) -> CoarseBox {
        let mut b = CoarseBox {
            lo_x: f64::INFINITY,
            hi_x: f64::NEG_INFINITY,
            lo_y: f64::INFINITY,
            hi_y: f64::NEG_INFINITY,
        };
        for &t in tris {
            for &v in &mesh.tris[t].v {
                let x = rat_to_f64(&mesh.xy[v].x);
                let y = rat_to_f64(&mesh.xy[v].y);
                b.lo_x = b.lo_x.min(x);
                b.hi_x = b.hi_x.max(x);
                b.lo_y = b.lo_y.min(y);
                b.hi_y = b.hi_y.max(y);
            }
        }
        let pad_x = 1e-9 * (b.lo_x.abs().max(b.hi_x.abs()) + 1.0);
        let pad_y = 1e-9 * (b.lo_y.abs().max(b.hi_y.abs()) + 1.0);
        b.lo_x -= pad_x;
        b.hi_x += pad_x;
        b.lo_y -= pad_y;
        b.hi_y += pad_y;
        b
    }

    fn clearly_outside(&self, p: &Point3) -> bool {
        let x = rat_to_f64(&p.x);
        let y = rat_to_f64(&p.y);
        x < self.lo_x || x > self.hi_x || y < self.lo_y || y > self.hi_y
    }
}

/// Splits the in-scope input planes into boundary, interior, and
/// exterior relative to one region.  `cycle_points` is indexed by
/// input plane id.
pub fn classify_planes(
    sub: &LevelSubdivision,
    mesh: &TriMesh,
    node: &DecompNode,
    scope: &[usize],
    n_inputs: usize,
    cycle_points: &[Point3],
    table: &mut VertexPlaneTable,
) -> Classification {
    let in_scope: BTreeSet<usize> = scope.iter().copied().collect();
    let mut boundary: BTreeSet<usize> = BTreeSet::new();
    for cycle in &node.cycles {
        for step in &cycle.steps {
            let tri = &mesh.tris[step.tri];
            if let Some(s) = sub.faces[tri.face].plane {
                if s < n_inputs {
                    boundary.insert(s);
                }
            }
            if let TriEdgeKind::Border { other_plane: Some(o), .. } =
                tri.kind[step.side]
            {
                if o < n_inputs {
                    boundary.insert(o);
                }
            }
            let head = tri.v[(step.side + 1) % 3];
            for &g in table.get(sub, n_inputs, head) {
                boundary.insert(g);
            }
        }
    }
    boundary.retain(|p| in_scope.contains(p));

    let coarse = CoarseBox::of_region(mesh, &node.tris);
    let mut patches: Option<Vec<Triangle2>> = None;

    let mut interior = Vec::new();
    let mut exterior = Vec::new();
    for &h in scope {
        if boundary.contains(&h) {
            continue;
        }
        if coarse.clearly_outside(&cycle_points[h]) {
            exterior.push(h);
            continue;
        }
        let patches = patches.get_or_insert_with(|| {
            node.tris
                .iter()
                .map(|&t| {
                    let v = &mesh.tris[t].v;
                    Triangle2::new(
                        mesh.xy[v[0]].clone(),
                        mesh.xy[v[1]].clone(),
                        mesh.xy[v[2]].clone(),
                    )
                    .expect("mesh triangles are counterclockwise")
                })
                .collect()
        });
        let p = cycle_points[h].xy();
        let mut touched = false;
        let mut strict = false;
        for t in patches.iter() {
            match t.locate(&p) {
                1 => {
                    strict = true;
                    break;
                }
                0 => touched = true,
                _ => {}
            }
        }
        if strict {
            interior.push(h);
        } else if touched {
            boundary.insert(h);
        } else {
            exterior.push(h);
        }
    }
    Classification {
        boundary: boundary.into_iter().collect(),
        interior,
        exterior,
    }
}

/// A generic interior point of the region, lifted onto the claimed
/// surface: the centroid of its first triangle on that triangle's face
/// plane.
pub fn region_sample(sub: &LevelSubdivision, mesh: &TriMesh, tris: &[usize]) -> Point3 {
    let tri = &mesh.tris[tris[0]];
    let t = Triangle2::new(
        mesh.xy[tri.v[0]].clone(),
        mesh.xy[tri.v[1]].clone(),
        mesh.xy[tri.v[2]].clone(),
    )
    .expect("mesh triangles are counterclockwise");
    let c = t.centroid();
    let plane = sub.faces[tri.face].plane.expect("region faces are interior");
    let z = sub.planes[plane].eval_at(&c);
    Point3::new(c.x, c.y, z)
}

/// The level a child region lives on once its exterior planes are
/// dropped: the parent level minus the exterior planes strictly below
/// a sample point.  `None` when the count exceeds the parent level.
pub fn child_level(
    sub: &LevelSubdivision,
    k: usize,
    exterior: &[usize],
    sample: &Point3,
) -> Option<usize> {
    let dropped = exterior
        .iter()
        .filter(|&&h| sub.planes[h].below(sample))
        .count();
    k.checked_sub(dropped)
}
