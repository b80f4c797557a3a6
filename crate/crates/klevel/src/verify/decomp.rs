//! Balanced recursive splitting of the triangulated box.
//!
//! Regions are triangle sets.  A split candidate comes from tree-cotree
//! duality: a spanning tree on the region's vertices leaves the dual
//! graph of its triangles connected through the remaining sides, and
//! every subtree of a dual spanning tree rooted outside encloses a
//! candidate part whose rim consists of primal tree edges plus one jump.
//! Candidates are tried best-balanced first; a region that refuses all
//! of them becomes a leaf, which costs time later but never soundness.
//!
//! Boundary cycles keep the region on the left, so outer rims run
//! counterclockwise and hole rims clockwise.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::geom::polygon_area2;
use crate::rat::rat;
use crate::verify::triangulate::TriMesh;

/// Largest region size that is never split.
pub const LEAF_SIZE: usize = 24;
/// A split is acceptable when each part keeps at most this fraction of
/// the parent, as a ratio of these two constants.
pub const BALANCE_NUM: usize = 19;
pub const BALANCE_DEN: usize = 20;
/// Most holes a part may have.
pub const MAX_HOLES: usize = 4;
/// Split candidates examined per region, best balance first.
pub const CANDIDATE_BUDGET: usize = 64;

/// One directed boundary side: triangle `tri`, side `side`, region on
/// the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryStep {
    pub tri: usize,
    pub side: usize,
}

/// A closed walk along a region rim.
#[derive(Debug, Clone)]
pub struct BoundaryCycle {
    pub steps: Vec<BoundaryStep>,
    /// Counterclockwise cycles bound the region from outside; clockwise
    /// ones surround holes.
    pub outer: bool,
}

#[derive(Debug, Clone)]
pub struct DecompNode {
    /// Triangles of the region, ascending.
    pub tris: Vec<usize>,
    pub cycles: Vec<BoundaryCycle>,
    /// Child node ids; empty for leaves.
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DecompTree {
    pub nodes: Vec<DecompNode>,
    pub root: usize,
}

fn side_vertices(mesh: &TriMesh, tri: usize, side: usize) -> (usize, usize) {
    let t = &mesh.tris[tri];
    (t.v[side], t.v[(side + 1) % 3])
}

fn is_boundary(mesh: &TriMesh, member: &[bool], tri: usize, side: usize) -> bool {
    match mesh.tris[tri].nb[side] {
        Some(nj) => !member[nj],
        None => true,
    }
}

/// Walks every rim of the triangle set marked in `member`.
pub fn boundary_cycles(mesh: &TriMesh, member: &[bool]) -> Vec<BoundaryCycle> {
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut cycles = Vec::new();
    for tri in 0..mesh.tris.len() {
        if !member[tri] {
            continue;
        }
        for side in 0..3 {
            if !is_boundary(mesh, member, tri, side) || seen.contains(&(tri, side)) {
                continue;
            }
            let mut steps = Vec::new();
            let (mut ct, mut cs) = (tri, side);
            loop {
                assert!(
                    seen.insert((ct, cs)),
                    "boundary walk revisited a side"
                );
                steps.push(BoundaryStep { tri: ct, side: cs });
                let head = mesh.tris[ct].v[(cs + 1) % 3];
                let (mut nt, mut ns) = (ct, (cs + 1) % 3);
                while !is_boundary(mesh, member, nt, ns) {
                    let nj = mesh.tris[nt].nb[ns].expect("interior side has a neighbor");
                    nt = nj;
                    ns = (0..3)
                        .find(|&i| mesh.tris[nt].v[i] == head)
                        .expect("neighbor misses the pivot vertex");
                }
                if (nt, ns) == (tri, side) {
                    break;
                }
                (ct, cs) = (nt, ns);
            }
            let poly: Vec<_> = steps
                .iter()
                .map(|s| mesh.xy[mesh.tris[s.tri].v[s.side]].clone())
                .collect();
            let outer = polygon_area2(&poly) > rat(0);
            cycles.push(BoundaryCycle { steps, outer });
        }
    }
    cycles
}

fn connected_components(mesh: &TriMesh, tris: &[usize], member: &[bool]) -> Vec<Vec<usize>> {
    let mut comp: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &start in tris {
        if comp.contains_key(&start) {
            continue;
        }
        let id = out.len();
        let mut queue = VecDeque::from([start]);
        comp.insert(start, id);
        let mut acc = vec![start];
        while let Some(t) = queue.pop_front() {
            for side in 0..3 {
                if let Some(nj) = mesh.tris[t].nb[side] {
                    if member[nj] && !comp.contains_key(&nj) {
                        comp.insert(nj, id);
                        acc.push(nj);
                        queue.push_back(nj);
                    }
                }
            }
        }
        acc.sort_unstable();
        out.push(acc);
    }
    out
}

/// Splits `region` into connected parts, or `None` to keep it a leaf.
fn split_region(mesh: &TriMesh, region: &[usize], leaf_size: usize) -> Option<Vec<Vec<usize>>> {
    let n = region.len();
    if n <= leaf_size {
        return None;
    }
    let mut member = vec![false; mesh.tris.len()];
    for &t in region {
        member[t] = true;
    }

    let mut tree_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &t in region {
            for side in 0..3 {
                let (a, b) = side_vertices(mesh, t, side);
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
        let root = *adj.keys().next().expect("region has vertices");
        let mut seen: BTreeSet<usize> = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[&v] {
                if seen.insert(u) {
                    let key = if v < u { (v, u) } else { (u, v) };
                    tree_edges.insert(key);
                    queue.push_back(u);
                }
            }
        }
    }

    let crossable = |t: usize, side: usize| {
        let (a, b) = side_vertices(mesh, t, side);
        let key = if a < b { (a, b) } else { (b, a) };
        !tree_edges.contains(&key)
    };

    // Dual BFS from a virtual outside node across sides off the tree.
    // parent[t] is the triangle the search entered t from, or usize::MAX
    // when entered from outside.
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &t in region {
        for side in 0..3 {
            if is_boundary(mesh, &member, t, side)
                && crossable(t, side)
                && !parent.contains_key(&t)
            {
                parent.insert(t, usize::MAX);
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    while let Some(t) = queue.pop_front() {
        for side in 0..3 {
            if !crossable(t, side) {
                continue;
            }
            if let Some(nj) = mesh.tris[t].nb[side] {
                if member[nj] && !parent.contains_key(&nj) {
                    parent.insert(nj, t);
                    order.push(nj);
                    queue.push_back(nj);
                }
            }
        }
    }
    assert_eq!(order.len(), n, "dual search must reach every triangle");

    let mut subtree: BTreeMap<usize, usize> = region.iter().map(|&t| (t, 1)).collect();
    for &t in order.iter().rev() {
        let p = parent[&t];
        if p != usize::MAX {
            *subtree.get_mut(&p).unwrap() += subtree[&t];
        }
    }

    let mut candidates: Vec<(usize, usize)> = region
        .iter()
        .map(|&t| {
            let a = subtree[&t];
            (a.max(n - a), t)
        })
        .collect();
    candidates.sort_unstable();

    let limit = n * BALANCE_NUM / BALANCE_DEN;
    for &(worst, root_tri) in candidates.iter().take(CANDIDATE_BUDGET) {
        if worst > limit || worst == n {
            continue;
        }
        let mut in_a = vec![false; mesh.tris.len()];
        let mut stack = vec![root_tri];
        let mut a_tris = Vec::new();
        in_a[root_tri] = true;
        while let Some(t) = stack.pop() {
            a_tris.push(t);
            for side in 0..3 {
                if !crossable(t, side) {
                    continue;
                }
                if let Some(nj) = mesh.tris[t].nb[side] {
                    if member[nj] && parent.get(&nj) == Some(&t) && !in_a[nj] {
                        in_a[nj] = true;
                        stack.push(nj);
                    }
                }
            }
        }
        if a_tris.len() != subtree[&root_tri] {
            continue;
        }
        a_tris.sort_unstable();
        let b_tris: Vec<usize> = region.iter().copied().filter(|&t| !in_a[t]).collect();

        let mut parts = vec![a_tris];
        parts.extend(connected_components(mesh, &b_tris, &{
            let mut mb = vec![false; mesh.tris.len()];
            for &t in &b_tris {
                mb[t] = true;
            }
            mb
        }));

        let mut ok = parts.iter().all(|p| !p.is_empty() && p.len() <= limit);
        if ok {
            for part in &parts {
                let mut mp = vec![false; mesh.tris.len()];
                for &t in part {
                    mp[t] = true;
                }
                let cycles = boundary_cycles(mesh, &mp);
                let outers = cycles.iter().filter(|c| c.outer).count();
                if outers != 1 || cycles.len() - outers > MAX_HOLES {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(parts);
        }
    }
    None
}

/// Builds the full split tree over every triangle of the mesh.
pub fn decompose(mesh: &TriMesh) -> DecompTree {
    decompose_with(mesh, LEAF_SIZE)
}

/// [`decompose`] with an explicit leaf size.
pub fn decompose_with(mesh: &TriMesh, leaf_size: usize) -> DecompTree {
    let all: Vec<usize> = (0..mesh.tris.len()).collect();
    let mut nodes = Vec::new();
    let mut work: Vec<(usize, Vec<usize>)> = Vec::new();

    let mut member = vec![true; mesh.tris.len()];
    let cycles = boundary_cycles(mesh, &member);
    nodes.push(DecompNode { tris: all.clone(), cycles, children: Vec::new() });
    work.push((0, all));

    while let Some((id, region)) = work.pop() {
        let parts = match split_region(mesh, &region, leaf_size) {
            Some(p) => p,
            None => continue,
        };
        for part in parts {
            member.iter_mut().for_each(|m| *m = false);
            for &t in &part {
                member[t] = true;
            }
            let cycles = boundary_cycles(mesh, &member);
            let child = nodes.len();
            nodes.push(DecompNode { tris: part.clone(), cycles, children: Vec::new() });
            nodes[id].children.push(child);
            work.push((child, part));
        }
    }
    DecompTree { nodes, root: 0 }
}

/// Structural audit of a split tree against its mesh: children partition
/// the parent and stay balanced, rims close up with the region on the
/// left, and cycle orientations match their outer flags.
pub fn audit_tree(mesh: &TriMesh, tree: &DecompTree) -> Result<(), String> {
    if tree.nodes.is_empty() {
        return Err("empty tree".into());
    }
    let root = &tree.nodes[tree.root];
    let all: Vec<usize> = (0..mesh.tris.len()).collect();
    if root.tris != all {
        return Err("root does not cover the mesh".into());
    }

    for (id, node) in tree.nodes.iter().enumerate() {
        if node.tris.is_empty() {
            return Err(format!("node {id} is empty"));
        }
        if node.tris.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("node {id} triangles not ascending"));
        }

        if !node.children.is_empty() {
            if node.children.len() < 2 {
                return Err(format!("node {id} has a single child"));
            }
            let mut merged: Vec<usize> = Vec::new();
            for &c in &node.children {
                if c >= tree.nodes.len() || c == id {
                    return Err(format!("node {id} has a bad child id"));
                }
                let limit = node.tris.len() * BALANCE_NUM / BALANCE_DEN;
                if tree.nodes[c].tris.len() > limit {
                    return Err(format!("child {c} of node {id} too large"));
                }
                merged.extend(tree.nodes[c].tris.iter().copied());
            }
            merged.sort_unstable();
            if merged != node.tris {
                return Err(format!("children of node {id} do not partition it"));
            }
        }

        let mut member = vec![false; mesh.tris.len()];
        for &t in &node.tris {
            member[t] = true;
        }
        let mut sides: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &t in &node.tris {
            for side in 0..3 {
                if is_boundary(mesh, &member, t, side) {
                    sides.insert((t, side));
                }
            }
        }
        let mut walked: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut outers = 0usize;
        for cycle in &node.cycles {
            if cycle.steps.len() < 3 {
                return Err(format!("short cycle in node {id}"));
            }
            for (si, s) in cycle.steps.iter().enumerate() {
                if !sides.contains(&(s.tri, s.side)) {
                    return Err(format!("node {id} cycle leaves the rim"));
                }
                if !walked.insert((s.tri, s.side)) {
                    return Err(format!("node {id} walks a side twice"));
                }
                let next = &cycle.steps[(si + 1) % cycle.steps.len()];
                let (_, head) = side_vertices(mesh, s.tri, s.side);
                let (tail, _) = side_vertices(mesh, next.tri, next.side);
                if head != tail {
                    return Err(format!("node {id} cycle is not closed"));
                }
            }
            let poly: Vec<_> = cycle
                .steps
                .iter()
                .map(|s| mesh.xy[mesh.tris[s.tri].v[s.side]].clone())
                .collect();
            let ccw = polygon_area2(&poly) > rat(0);
            if ccw != cycle.outer {
                return Err(format!("node {id} cycle orientation disagrees"));
            }
            if cycle.outer {
                outers += 1;
            }
        }
        if walked != sides {
            return Err(format!("node {id} cycles miss rim sides"));
        }
        if outers == 0 {
            return Err(format!("node {id} has no outer cycle"));
        }
        if id != tree.root && node.cycles.len() - outers > MAX_HOLES {
            return Err(format!("node {id} has too many holes"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{lift_point, Plane3, Point2};
    use crate::oracle::{
        brute_klevel_3d_in_box, canonical_half_width, plane_set_in_general_position,
    };
    use crate::rat::rat;
    use crate::verify::triangulate::triangulate;

    fn lifted_fixture(k: usize) -> (Vec<Plane3>, crate::subdivision::LevelSubdivision) {
        let pts = [
            (0, 0),
            (7, 1),
            (3, 8),
            (-5, 4),
            (-6, -5),
            (2, -7),
            (9, -3),
            (-2, 11),
        ];
        let planes: Vec<Plane3> = pts
            .iter()
            .map(|&(x, y)| lift_point(&Point2 { x: rat(x), y: rat(y) }))
            .collect();
        let vertices = plane_set_in_general_position(&planes).unwrap();
        let w = canonical_half_width(&planes, &vertices);
        let sub = brute_klevel_3d_in_box(&planes, k, &w).unwrap();
        (planes, sub)
    }

    #[test]
    fn two_triangles_have_a_square_rim() {
        let (_, sub) = lifted_fixture(2);
        let mesh = triangulate(&sub);
        let mut member = vec![false; mesh.tris.len()];
        member[0] = true;
        let nb = mesh.tris[0]
            .nb
            .iter()
            .flatten()
            .copied()
            .next()
            .expect("triangle 0 has a neighbor");
        member[nb] = true;
        let cycles = boundary_cycles(&mesh, &member);
        assert_eq!(cycles.len(), 1);
        assert!(cycles[0].outer);
        assert_eq!(cycles[0].steps.len(), 4);
    }

    #[test]
    fn removing_an_interior_triangle_opens_a_hole() {
        let (_, sub) = lifted_fixture(2);
        let mesh = triangulate(&sub);
        let interior = (0..mesh.tris.len())
            .find(|&t| mesh.tris[t].nb.iter().all(|n| n.is_some()))
            .expect("some triangle is interior");
        let mut member = vec![true; mesh.tris.len()];
        member[interior] = false;
        let cycles = boundary_cycles(&mesh, &member);
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles.iter().filter(|c| c.outer).count(), 1);
        let hole = cycles.iter().find(|c| !c.outer).unwrap();
        assert_eq!(hole.steps.len(), 3);
    }

    #[test]
    fn decomposition_passes_its_own_audit() {
        for k in [1usize, 3, 6] {
            let (_, sub) = lifted_fixture(k);
            let mesh = triangulate(&sub);
            let tree = decompose(&mesh);
            audit_tree(&mesh, &tree).unwrap();
            assert!(tree.nodes.len() > 1, "k={k}: fixture too small to split");
            for node in &tree.nodes {
                if node.children.is_empty() {
                    continue;
                }
                assert!(node.tris.len() > LEAF_SIZE);
            }
        }
    }

    #[test]
    fn leaves_cover_the_mesh_exactly_once() {
        let (_, sub) = lifted_fixture(3);
        let mesh = triangulate(&sub);
        let tree = decompose(&mesh);
        let mut count = vec![0usize; mesh.tris.len()];
        for node in &tree.nodes {
            if node.children.is_empty() {
                for &t in &node.tris {
                    count[t] += 1;
                }
            }
        }
        assert!(count.iter().all(|&c| c == 1));
    }
}
