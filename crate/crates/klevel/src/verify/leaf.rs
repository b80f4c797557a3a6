//! Base case checks over leaf regions.
//!
//! A leaf region is small enough to compare against the true level
//! directly, one triangle at a time.  Over a triangle with face plane
//! `h`, the claim equals the `k`-level exactly when the strictly-below
//! count at the centroid is `k` and no other in-scope plane changes
//! sign across the triangle without being declared as the tie of the
//! crossed side.  Real corners must carry the exact triple of planes
//! through them; synthetic corners of claimed faces must sit on the
//! claimed clip rim at face height.  Triangles of the recomputed
//! annulus get the count check only, their structure being trusted.

use num_traits::Signed;

use crate::geom::{sign, Point2, Triangle2};
use crate::rat::Rational;
use crate::subdivision::LevelSubdivision;
use crate::verify::bounding::WallSet;
use crate::verify::triangulate::{TriEdgeKind, TriMesh};

/// Violation found while grounding a leaf region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeafFault {
    /// Strictly-below count at a face sample is not the promised level.
    LevelCount { tri: usize, at: Point2, found: usize, want: usize },
    /// An in-scope plane crosses a claimed face's interior undeclared.
    UndeclaredCrossing { tri: usize, plane: usize },
    /// A plane runs along a triangle side that does not declare it.
    TieMismatch { tri: usize, side: usize, plane: usize },
    /// A real corner's triple does not match the planes through it.
    VertexTriple { tri: usize, vertex: usize },
    /// A synthetic corner of a claimed face is off the claimed rim.
    RimCorner { tri: usize, vertex: usize },
}

/// Checks every triangle of a leaf region against the promised level.
pub fn check_leaf(
    sub: &LevelSubdivision,
    mesh: &TriMesh,
    walls: &WallSet,
    claimed_faces: usize,
    inner_half_width: &Rational,
    scope: &[usize],
    n_inputs: usize,
    k_leaf: usize,
    tris: &[usize],
) -> Result<(), LeafFault> {
    for &ti in tris {
        let tri = &mesh.tris[ti];
        let h_id = sub.faces[tri.face].plane.expect("region faces are interior");
        let h = &sub.planes[h_id];
        let patch = Triangle2::new(
            mesh.xy[tri.v[0]].clone(),
            mesh.xy[tri.v[1]].clone(),
            mesh.xy[tri.v[2]].clone(),
        )
        .expect("mesh triangles are counterclockwise");

        let c = patch.centroid();
        let z = h.eval_at(&c);
        let q = crate::geom::Point3::new(c.x.clone(), c.y.clone(), z);
        let below = scope
            .iter()
            .filter(|&&g| sub.planes[g].below(&q))
            .count()
            + walls.below_count(&q);
        if below != k_leaf {
            return Err(LeafFault::LevelCount {
                tri: ti,
                at: c,
                found: below,
                want: k_leaf,
            });
        }

        if tri.face >= claimed_faces {
            continue;
        }

        for &g_id in scope {
            if g_id == h_id {
                continue;
            }
            let g = &sub.planes[g_id];
            let signs: [i8; 3] = std::array::from_fn(|i| {
                let p = &mesh.xy[tri.v[i]];
                sign(&(g.eval_at(p) - h.eval_at(p)))
            });
            if signs.contains(&1) && signs.contains(&-1) {
                return Err(LeafFault::UndeclaredCrossing { tri: ti, plane: g_id });
            }
            for side in 0..3 {
                if signs[side] == 0 && signs[(side + 1) % 3] == 0 {
                    let declared = matches!(
                        tri.kind[side],
                        TriEdgeKind::Border { other_plane: Some(o), .. } if o == g_id
                    );
                    if !declared {
                        return Err(LeafFault::TieMismatch {
                            tri: ti,
                            side,
                            plane: g_id,
                        });
                    }
                }
            }
        }

        for &v_id in &tri.v {
            let v = &sub.vertices[v_id];
            if v.synthetic {
                let span = if v.point.x.abs() >= v.point.y.abs() {
                    v.point.x.abs()
                } else {
                    v.point.y.abs()
                };
                if span != *inner_half_width || h.eval(&v.point.x, &v.point.y) != v.point.z
                {
                    return Err(LeafFault::RimCorner { tri: ti, vertex: v_id });
                }
            } else {
                let ok = match v.triple {
                    Some(t) => {
                        t[0] < t[1]
                            && t[1] < t[2]
                            && t[2] < n_inputs
                            && t.contains(&h_id)
                            && t.iter().all(|&p| sub.planes[p].contains(&v.point))
                    }
                    None => false,
                };
                if !ok {
                    return Err(LeafFault::VertexTriple { tri: ti, vertex: v_id });
                }
            }
        }
    }
    Ok(())
}
