//! Walking region boundaries along a claimed level surface.
//!
//! A boundary cycle of a decomposition region is certified against the
//! promise "this region's portion of the claim is the `k`-level" edge
//! by edge.  Each edge midpoint must sit inside the level window spanned
//! by the planes through it, and no plane may cross the lifted edge
//! strictly between midpoint and endpoint.  Plane clearances are affine
//! along the lifted edge, so a crossing shows up as a sign change at an
//! endpoint; plane values are cached per vertex and midpoint values are
//! endpoint sums, which keeps the scan free of divisions.  A faulted
//! edge recovers its exact first contact by ray shooting the envelope of
//! the planes that crossed.  Bounding walls are charged in closed form.

use std::collections::HashMap;

use crate::geom::{Plane3, Point2, Point3};
use crate::rat::{rat, Rational};
use crate::subdivision::LevelSubdivision;
use crate::verify::bounding::WallSet;
use crate::verify::decomp::BoundaryCycle;
use crate::verify::envelope::{DynamicEnvelope, RayHit, Side};
use crate::verify::triangulate::{TriEdgeKind, TriMesh};

/// Violation found while walking one boundary cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkFault {
    /// The cycle's first edge does not lie on the promised level.
    StartLevel { step: usize, at: Point2, below: usize, through: usize },
    /// A later edge does not lie on the promised level.
    OffLevel { step: usize, at: Point2, below: usize, through: usize },
    /// Some plane crosses an edge strictly between midpoint and endpoint.
    CrossedEarly { step: usize, at: Point2, plane: Option<usize> },
    /// The planes meeting an edge's far endpoint contradict its triple.
    EndpointTriple {
        step: usize,
        vertex: usize,
        expected: Vec<usize>,
        found: [usize; 3],
    },
}

/// Everything a walk needs to resolve edges and planes.
pub struct WalkContext<'a> {
    pub sub: &'a LevelSubdivision,
    pub mesh: &'a TriMesh,
    pub walls: &'a WallSet,
    pub n_inputs: usize,
    /// Input plane ids in scope at the current node, ascending.
    pub scope: &'a [usize],
}

fn midpoint(a: &Point3, b: &Point3) -> Point3 {
    let two = rat(2);
    Point3::new(
        (&a.x + &b.x) / &two,
        (&a.y + &b.y) / &two,
        (&a.z + &b.z) / &two,
    )
}

fn point_along(a: &Point3, b: &Point3, t: &Rational) -> Point2 {
    Point2::new(&a.x + t * (&b.x - &a.x), &a.y + t * (&b.y - &a.y))
}

/// Exact first contact of the half edge from `m` toward `target` with
/// the planes already known to cross it, for the fault report.
fn first_contact(
    planes: &[Plane3],
    m: &Point3,
    target: &Point3,
    crossed_below: &[usize],
    crossed_above: &[usize],
) -> (Rational, usize) {
    let mut best: Option<RayHit> = None;
    for (side, crossed) in
        [(Side::Upper, crossed_below), (Side::Lower, crossed_above)]
    {
        if crossed.is_empty() {
            continue;
        }
        let mut env = DynamicEnvelope::new(side);
        for &g in crossed {
            env.insert(g);
        }
        let hit = env
            .ray_shoot(planes, m, target)
            .expect("the midpoint is strictly clear of its crossing planes")
            .expect("every envelope member crosses the half edge");
        match &best {
            Some(b) if hit.t >= b.t => {}
            _ => best = Some(hit),
        }
    }
    let hit = best.expect("some plane crossed the half edge");
    (hit.t, hit.planes[0])
}

/// Walks one boundary cycle, certifying that it lies on the `k`-level
/// of the in-scope planes plus walls and that the far endpoint of every
/// original edge carries the correct defining triple.
pub fn walk_cycle(
    cx: &WalkContext,
    cycle: &BoundaryCycle,
    k: usize,
) -> Result<(), WalkFault> {
    let mut vertex_evals: HashMap<usize, Vec<Rational>> = HashMap::new();

    for (step_i, step) in cycle.steps.iter().enumerate() {
        let tri = &cx.mesh.tris[step.tri];
        let a_id = tri.v[step.side];
        let b_id = tri.v[(step.side + 1) % 3];
        let pa = &cx.sub.vertices[a_id].point;
        let pb = &cx.sub.vertices[b_id].point;

        for (vid, p) in [(a_id, pa), (b_id, pb)] {
            if !vertex_evals.contains_key(&vid) {
                let evals: Vec<Rational> = cx
                    .scope
                    .iter()
                    .map(|&g| cx.sub.planes[g].eval(&p.x, &p.y))
                    .collect();
                vertex_evals.insert(vid, evals);
            }
        }
        let ea = &vertex_evals[&a_id];
        let eb = &vertex_evals[&b_id];

        let mz2 = &pa.z + &pb.z;
        let mut below: Vec<usize> = Vec::new();
        let mut above: Vec<usize> = Vec::new();
        let mut through = 0usize;
        for idx in 0..cx.scope.len() {
            let v2 = &ea[idx] + &eb[idx];
            if v2 < mz2 {
                below.push(idx);
            } else if v2 > mz2 {
                above.push(idx);
            } else {
                through += 1;
            }
        }

        let m = midpoint(pa, pb);
        let wall_below = cx.walls.below_count(&m);
        let wall_through = cx.walls.through(&m).len();
        let c = below.len() + wall_below;
        let t = through + wall_through;
        if !(k >= c && k < c + t) {
            let at = m.xy();
            return Err(if step_i == 0 {
                WalkFault::StartLevel { step: step_i, at, below: c, through: t }
            } else {
                WalkFault::OffLevel { step: step_i, at, below: c, through: t }
            });
        }

        let mut end_hits: Vec<usize> = Vec::new();
        for (evals, target, forward) in [(eb, pb, true), (ea, pa, false)] {
            let mut crossed_below: Vec<usize> = Vec::new();
            let mut crossed_above: Vec<usize> = Vec::new();
            for &idx in &below {
                match evals[idx].cmp(&target.z) {
                    std::cmp::Ordering::Greater => crossed_below.push(cx.scope[idx]),
                    std::cmp::Ordering::Equal if forward => {
                        end_hits.push(cx.scope[idx])
                    }
                    _ => {}
                }
            }
            for &idx in &above {
                match evals[idx].cmp(&target.z) {
                    std::cmp::Ordering::Less => crossed_above.push(cx.scope[idx]),
                    std::cmp::Ordering::Equal if forward => {
                        end_hits.push(cx.scope[idx])
                    }
                    _ => {}
                }
            }
            if !crossed_below.is_empty() || !crossed_above.is_empty() {
                let (t_hit, plane) = first_contact(
                    &cx.sub.planes,
                    &m,
                    target,
                    &crossed_below,
                    &crossed_above,
                );
                return Err(WalkFault::CrossedEarly {
                    step: step_i,
                    at: point_along(&m, target, &t_hit),
                    plane: Some(plane),
                });
            }
        }

        let mut wall_end_hit = false;
        for (target, forward) in [(pb, true), (pa, false)] {
            let (early, at_end) = cx.walls.crossings(&m, target, None);
            if let Some(s) = early {
                return Err(WalkFault::CrossedEarly {
                    step: step_i,
                    at: point_along(&m, target, &s),
                    plane: None,
                });
            }
            if forward && !at_end.is_empty() {
                wall_end_hit = true;
            }
        }

        let head = &cx.sub.vertices[b_id];
        let support = cx.sub.faces[tri.face].plane;
        let other = match tri.kind[step.side] {
            TriEdgeKind::Border { other_plane: Some(o), .. } => Some(o),
            _ => None,
        };
        if let (Some(s), Some(o), Some(triple), false) =
            (support, other, head.triple, head.synthetic)
        {
            let inputs_only = s < cx.n_inputs
                && o < cx.n_inputs
                && triple.iter().all(|&p| p < cx.n_inputs);
            if inputs_only && !wall_end_hit {
                let mut expected: Vec<usize> = end_hits;
                expected.push(s);
                expected.push(o);
                expected.sort_unstable();
                expected.dedup();
                let mut claimed = triple;
                claimed.sort_unstable();
                if expected.len() != 3 || claimed.to_vec() != expected {
                    return Err(WalkFault::EndpointTriple {
                        step: step_i,
                        vertex: b_id,
                        expected,
                        found: triple,
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::lift_point;
    use crate::oracle::{brute_klevel_3d_in_box, canonical_half_width, plane_set_in_general_position};
    use crate::rat::ratio;
    use crate::verify::bounding::make_bounding_planes;
    use crate::verify::decomp::decompose;
    use crate::verify::extend::extend_with_annulus;
    use crate::verify::triangulate::triangulate;

    fn lifted_inputs() -> Vec<crate::geom::Plane3> {
        [
            (0, 0),
            (7, 1),
            (3, 8),
            (-5, 4),
            (-6, -5),
            (2, -7),
            (9, -3),
            (-2, 11),
        ]
        .iter()
        .map(|&(x, y)| lift_point(&Point2::new(rat(x), rat(y))))
        .collect()
    }

    struct Fixture {
        glue: crate::verify::extend::GluedExtension,
        mesh: TriMesh,
        tree: crate::verify::decomp::DecompTree,
        walls: WallSet,
        n: usize,
    }

    fn fixture(k: usize) -> Fixture {
        let inputs = lifted_inputs();
        let n = inputs.len();
        let vertices = plane_set_in_general_position(&inputs).unwrap();
        let w = canonical_half_width(&inputs, &vertices);
        let cand = brute_klevel_3d_in_box(&inputs, k, &w).unwrap();
        let walls = make_bounding_planes(&inputs, &w, &vertices);
        let glue = extend_with_annulus(&cand, &walls).unwrap();
        let mesh = triangulate(&glue.sub);
        let tree = decompose(&mesh);
        Fixture { glue, mesh, tree, walls, n }
    }

    fn full_scope(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn every_region_cycle_walks_clean_at_the_true_level() {
        for k in [1usize, 3, 6] {
            let fx = fixture(k);
            let scope = full_scope(fx.n);
            let cx = WalkContext {
                sub: &fx.glue.sub,
                mesh: &fx.mesh,
                walls: &fx.walls,
                n_inputs: fx.n,
                scope: &scope,
            };
            let mut walked = 0;
            for node in &fx.tree.nodes {
                for cycle in &node.cycles {
                    walk_cycle(&cx, cycle, k).unwrap();
                    walked += 1;
                }
            }
            assert!(walked > 1);
        }
    }

    #[test]
    fn a_shifted_promise_fails_on_the_first_edge() {
        let fx = fixture(3);
        let scope = full_scope(fx.n);
        let cx = WalkContext {
            sub: &fx.glue.sub,
            mesh: &fx.mesh,
            walls: &fx.walls,
            n_inputs: fx.n,
            scope: &scope,
        };
        let cycle = &fx.tree.nodes[fx.tree.root].cycles[0];
        match walk_cycle(&cx, cycle, 4) {
            Err(WalkFault::StartLevel { step: 0, .. }) => {}
            other => panic!("expected a start level fault, got {other:?}"),
        }
    }

    #[test]
    fn a_raised_vertex_breaks_the_walk() {
        let fx = fixture(3);
        let scope = full_scope(fx.n);
        let mut bumped = fx.glue.sub.clone();
        let target = fx.tree.nodes.iter().flat_map(|nd| &nd.cycles).find_map(|cy| {
            cy.steps.iter().find_map(|st| {
                let tri = &fx.mesh.tris[st.tri];
                let head = tri.v[(st.side + 1) % 3];
                (!fx.glue.sub.vertices[head].synthetic).then_some(head)
            })
        });
        let target = target.expect("some cycle passes a real vertex");
        bumped.vertices[target].point.z += ratio(1, 1_000_003);
        let cx = WalkContext {
            sub: &bumped,
            mesh: &fx.mesh,
            walls: &fx.walls,
            n_inputs: fx.n,
            scope: &scope,
        };
        let hit = fx.tree.nodes.iter().flat_map(|nd| &nd.cycles).any(|cy| {
            matches!(
                walk_cycle(&cx, cy, 3),
                Err(WalkFault::OffLevel { .. })
                    | Err(WalkFault::StartLevel { .. })
                    | Err(WalkFault::CrossedEarly { .. })
            )
        });
        assert!(hit);
    }

    #[test]
    fn a_swapped_triple_is_called_out_at_its_vertex() {
        let fx = fixture(3);
        let scope = full_scope(fx.n);
        let mut forged = fx.glue.sub.clone();
        let victim = fx.tree.nodes.iter().flat_map(|nd| &nd.cycles).find_map(|cy| {
            cy.steps.iter().enumerate().find_map(|(_, st)| {
                let tri = &fx.mesh.tris[st.tri];
                let head = tri.v[(st.side + 1) % 3];
                let v = &fx.glue.sub.vertices[head];
                let tie = matches!(
                    tri.kind[st.side],
                    TriEdgeKind::Border { other_plane: Some(_), .. }
                );
                (tie && !v.synthetic
                    && v.triple.map_or(false, |t| t.iter().all(|&p| p < fx.n)))
                .then_some(head)
            })
        });
        let victim = victim.expect("some cycle heads at a real input vertex");
        let triple = forged.vertices[victim].triple.unwrap();
        let spare = (0..fx.n).find(|p| !triple.contains(p)).unwrap();
        forged.vertices[victim].triple = Some([triple[0], triple[1], spare]);
        let cx = WalkContext {
            sub: &forged,
            mesh: &fx.mesh,
            walls: &fx.walls,
            n_inputs: fx.n,
            scope: &scope,
        };
        let caught = fx.tree.nodes.iter().flat_map(|nd| &nd.cycles).any(|cy| {
            matches!(
                walk_cycle(&cx, cy, 3),
                Err(WalkFault::EndpointTriple { vertex, .. }) if vertex == victim
            )
        });
        assert!(caught);
    }
}
