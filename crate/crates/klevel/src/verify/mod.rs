//! Certification of claimed level subdivisions.
//!
//! The verifier accepts a candidate exactly when it is the `k`-level of
//! the given planes.  The claim is first checked structurally, then
//! embedded in a recomputed annulus reaching out to bounding walls,
//! triangulated, and cut into a balanced region tree.  Region
//! boundaries are certified by envelope ray shooting at the promised
//! level, planes are classified against each region to shrink the
//! problem, and leaf regions are compared against the true level
//! triangle by triangle.  Every rejection carries a reason code and a
//! locus that can be re-checked independently.

pub mod bounding;
pub mod classify;
pub mod cycle;
pub mod decomp;
pub mod envelope;
pub mod extend;
pub mod leaf;
pub mod triangulate;
pub mod walk;

use crate::geom::{convex_position_witnesses, LinForm, Plane3, Point2};
use crate::oracle::{plane_set_in_general_position, Degeneracy};
use crate::rat::{format_rational, rat};
use crate::subdivision::{check_subdivision, LevelSubdivision};
use crate::verify::bounding::make_bounding_planes;
use crate::verify::classify::{
    child_level, classify_planes, region_sample, VertexPlaneTable,
};
use crate::verify::cycle::cycle_point;
use crate::verify::decomp::{decompose_with, LEAF_SIZE};
use crate::verify::extend::extend_with_annulus;
use crate::verify::leaf::{check_leaf, LeafFault};
use crate::verify::triangulate::triangulate;
use crate::verify::walk::{walk_cycle, WalkContext, WalkFault};

/// Why a candidate was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    BadSubdivision,
    StartLevelMismatch,
    BoundaryMismatch,
    EdgeCrossedEarly,
    BaseCaseMismatch,
    CyclePointMissing,
    NotConvexPosition,
    KOutOfRange,
    ExtensionMismatch,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::BadSubdivision => "BadSubdivision",
            RejectReason::StartLevelMismatch => "StartLevelMismatch",
            RejectReason::BoundaryMismatch => "BoundaryMismatch",
            RejectReason::EdgeCrossedEarly => "EdgeCrossedEarly",
            RejectReason::BaseCaseMismatch => "BaseCaseMismatch",
            RejectReason::CyclePointMissing => "CyclePointMissing",
            RejectReason::NotConvexPosition => "NotConvexPosition",
            RejectReason::KOutOfRange => "KOutOfRange",
            RejectReason::ExtensionMismatch => "ExtensionMismatch",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Work counters gathered along a verification run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyStats {
    pub triangles: usize,
    pub regions: usize,
    pub leaves: usize,
    pub walked_edges: usize,
    pub max_depth: usize,
}

/// Outcome of a verification run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub accepted: bool,
    pub reason: Option<RejectReason>,
    pub locus: Option<String>,
    pub expected: Option<String>,
    pub found: Option<String>,
    pub stats: VerifyStats,
}

impl VerifyReport {
    fn accept(stats: VerifyStats) -> Self {
        VerifyReport {
            accepted: true,
            reason: None,
            locus: None,
            expected: None,
            found: None,
            stats,
        }
    }
}

/// The instance itself is unusable, as opposed to the candidate being
/// wrong about it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputFault {
    Degenerate(Degeneracy),
    PlanesDiffer,
    LevelsDiffer { candidate: usize, requested: usize },
}

impl std::fmt::Display for InputFault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputFault::Degenerate(d) => write!(f, "degenerate input: {d:?}"),
            InputFault::PlanesDiffer => {
                write!(f, "candidate planes differ from the instance")
            }
            InputFault::LevelsDiffer { candidate, requested } => write!(
                f,
                "candidate is for level {candidate}, verification asked for {requested}"
            ),
        }
    }
}

struct Reject {
    reason: RejectReason,
    locus: String,
    expected: String,
    found: String,
}

impl Reject {
    fn report(self, stats: VerifyStats) -> VerifyReport {
        VerifyReport {
            accepted: false,
            reason: Some(self.reason),
            locus: Some(self.locus),
            expected: Some(self.expected),
            found: Some(self.found),
            stats,
        }
    }
}

fn fmt_point(p: &Point2) -> String {
    format!("({}, {})", format_rational(&p.x), format_rational(&p.y))
}

fn reject(
    reason: RejectReason,
    locus: impl Into<String>,
    expected: impl Into<String>,
    found: impl Into<String>,
) -> Reject {
    Reject {
        reason,
        locus: locus.into(),
        expected: expected.into(),
        found: found.into(),
    }
}

fn walk_reject(node: usize, fault: WalkFault) -> Reject {
    match fault {
        WalkFault::StartLevel { step, at, below, through } => reject(
            RejectReason::StartLevelMismatch,
            format!("region {node}, boundary edge {step} near {}", fmt_point(&at)),
            "promised level inside the edge's level window".to_string(),
            format!("{below} planes strictly below, {through} through"),
        ),
        WalkFault::OffLevel { step, at, below, through } => reject(
            RejectReason::EdgeCrossedEarly,
            format!("region {node}, boundary edge {step} near {}", fmt_point(&at)),
            "level window containing the promised level".to_string(),
            format!("{below} planes strictly below, {through} through"),
        ),
        WalkFault::CrossedEarly { step, at, plane } => reject(
            RejectReason::EdgeCrossedEarly,
            format!("region {node}, boundary edge {step} at {}", fmt_point(&at)),
            "no plane crossing the open edge".to_string(),
            match plane {
                Some(p) => format!("plane {p} crosses"),
                None => "a bounding wall crosses".to_string(),
            },
        ),
        WalkFault::EndpointTriple { step, vertex, expected, found } => reject(
            RejectReason::BoundaryMismatch,
            format!("region {node}, boundary edge {step}, vertex {vertex}"),
            format!("defining triple {expected:?}"),
            format!("claimed triple {found:?}"),
        ),
    }
}

fn leaf_reject(node: usize, fault: LeafFault) -> Reject {
    let reason = RejectReason::BaseCaseMismatch;
    match fault {
        LeafFault::LevelCount { tri, at, found, want } => reject(
            reason,
            format!("region {node}, triangle {tri} at {}", fmt_point(&at)),
            format!("{want} planes strictly below"),
            format!("{found} planes strictly below"),
        ),
        LeafFault::UndeclaredCrossing { tri, plane } => reject(
            reason,
            format!("region {node}, triangle {tri}"),
            "no undeclared plane crossing the face".to_string(),
            format!("plane {plane} changes sign across the triangle"),
        ),
        LeafFault::TieMismatch { tri, side, plane } => reject(
            reason,
            format!("region {node}, triangle {tri}, side {side}"),
            format!("side declared as a tie with plane {plane}"),
            "side not declared".to_string(),
        ),
        LeafFault::VertexTriple { tri, vertex } => reject(
            reason,
            format!("region {node}, triangle {tri}, vertex {vertex}"),
            "triple of distinct input planes through the corner".to_string(),
            "claimed triple does not pass through it".to_string(),
        ),
        LeafFault::RimCorner { tri, vertex } => reject(
            reason,
            format!("region {node}, triangle {tri}, vertex {vertex}"),
            "synthetic corner on the claimed clip rim at face height".to_string(),
            "corner off the rim or off its face plane".to_string(),
        ),
    }
}

/// Does every arrangement vertex lie strictly inside the candidate's
/// clip box, with every pairwise tie line crossing it?
fn enclosure_defect(
    planes: &[Plane3],
    vertices: &[crate::oracle::ArrangementVertex],
    w: &crate::rat::Rational,
) -> Option<Reject> {
    for v in vertices {
        if v.point.x.clone().max(-v.point.x.clone()) >= *w
            || v.point.y.clone().max(-v.point.y.clone()) >= *w
        {
            return Some(reject(
                RejectReason::BadSubdivision,
                format!("arrangement vertex of planes {:?}", v.triple),
                "vertex strictly inside the clip box".to_string(),
                format!("vertex at {}", fmt_point(&v.point.xy())),
            ));
        }
    }
    let corners = [
        Point2::new(-w.clone(), -w.clone()),
        Point2::new(w.clone(), -w.clone()),
        Point2::new(w.clone(), w.clone()),
        Point2::new(-w.clone(), w.clone()),
    ];
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let d = LinForm::plane_difference(&planes[i], &planes[j]);
            if d.is_constant() {
                continue;
            }
            let mut pos = false;
            let mut neg = false;
            for c in &corners {
                let v = d.eval(c);
                if v > rat(0) {
                    pos = true;
                } else if v < rat(0) {
                    neg = true;
                }
            }
            if !(pos && neg) {
                return Some(reject(
                    RejectReason::BadSubdivision,
                    format!("tie line of planes {i} and {j}"),
                    "tie line crossing the open clip box".to_string(),
                    "tie line misses the box".to_string(),
                ));
            }
        }
    }
    None
}

/// Accepts `cand` exactly when it is the `k`-level of `planes`.
///
/// `Err` means the instance itself was unusable; `Ok` always carries a
/// verdict about the candidate.
pub fn verify(
    planes: &[Plane3],
    k: usize,
    cand: &LevelSubdivision,
) -> Result<VerifyReport, InputFault> {
    verify_with(planes, k, cand, LEAF_SIZE)
}

/// [`verify`] with an explicit base-case region size.
pub fn verify_with(
    planes: &[Plane3],
    k: usize,
    cand: &LevelSubdivision,
    leaf_size: usize,
) -> Result<VerifyReport, InputFault> {
    let mut stats = VerifyStats::default();
    let n = planes.len();
    if cand.planes != planes {
        return Err(InputFault::PlanesDiffer);
    }
    if cand.k != k {
        return Err(InputFault::LevelsDiffer { candidate: cand.k, requested: k });
    }
    let vertices = match plane_set_in_general_position(planes) {
        Ok(v) => v,
        Err(d) => return Err(InputFault::Degenerate(d)),
    };

    let witnesses = match convex_position_witnesses(planes) {
        Ok(w) => w,
        Err(h) => {
            return Ok(reject(
                RejectReason::NotConvexPosition,
                format!("plane {h}"),
                "every plane somewhere strictly lowest".to_string(),
                format!("plane {h} never reaches the lower envelope"),
            )
            .report(stats))
        }
    };
    if k >= n {
        return Ok(reject(
            RejectReason::KOutOfRange,
            "level index".to_string(),
            format!("k < {n}"),
            format!("k = {k}"),
        )
        .report(stats));
    }

    if let Err(d) = check_subdivision(cand) {
        return Ok(reject(
            RejectReason::BadSubdivision,
            d.locus.clone(),
            "structurally valid subdivision".to_string(),
            d.what,
        )
        .report(stats));
    }
    if let Some(r) = enclosure_defect(planes, &vertices, &cand.half_width) {
        return Ok(r.report(stats));
    }

    let walls = make_bounding_planes(planes, &cand.half_width, &vertices);
    let glue = match extend_with_annulus(cand, &walls) {
        Ok(g) => g,
        Err(d) => {
            return Ok(reject(
                RejectReason::ExtensionMismatch,
                format!("{d:?}"),
                "claimed rim attaching to the recomputed annulus".to_string(),
                "gluing produced a structural defect".to_string(),
            )
            .report(stats))
        }
    };

    let mut points = Vec::with_capacity(n);
    for h in 0..n {
        match cycle_point(&glue.sub.planes, h, &witnesses[h], k) {
            Ok(p) => points.push(p),
            Err(_) => {
                return Ok(reject(
                    RejectReason::CyclePointMissing,
                    format!("plane {h}"),
                    format!("a point on plane {h} at level {k}"),
                    "no ray direction reached that level".to_string(),
                )
                .report(stats))
            }
        }
    }

    let mesh = triangulate(&glue.sub);
    let tree = decompose_with(&mesh, leaf_size);
    stats.triangles = mesh.tris.len();

    let full_scope: Vec<usize> = (0..n).collect();
    let root_cx = WalkContext {
        sub: &glue.sub,
        mesh: &mesh,
        walls: &walls,
        n_inputs: n,
        scope: &full_scope,
    };
    for cycle in &tree.nodes[tree.root].cycles {
        stats.walked_edges += cycle.steps.len();
        if let Err(f) = walk_cycle(&root_cx, cycle, k) {
            return Ok(walk_reject(tree.root, f).report(stats));
        }
    }

    let mut vtable = VertexPlaneTable::new(glue.sub.vertices.len());
    let mut work = vec![(tree.root, full_scope.clone(), k, 0usize)];
    while let Some((node_id, scope, k_nu, depth)) = work.pop() {
        stats.regions += 1;
        stats.max_depth = stats.max_depth.max(depth);
        let node = &tree.nodes[node_id];
        if node.children.is_empty() {
            stats.leaves += 1;
            if let Err(f) = check_leaf(
                &glue.sub,
                &mesh,
                &walls,
                glue.claimed_faces,
                &cand.half_width,
                &scope,
                n,
                k_nu,
                &node.tris,
            ) {
                return Ok(leaf_reject(node_id, f).report(stats));
            }
            continue;
        }
        for &child_id in &node.children {
            let child = &tree.nodes[child_id];
            let cx = WalkContext {
                sub: &glue.sub,
                mesh: &mesh,
                walls: &walls,
                n_inputs: n,
                scope: &scope,
            };
            for cycle in &child.cycles {
                stats.walked_edges += cycle.steps.len();
                if let Err(f) = walk_cycle(&cx, cycle, k_nu) {
                    return Ok(walk_reject(child_id, f).report(stats));
                }
            }
            let cls = classify_planes(
                &glue.sub, &mesh, child, &scope, n, &points, &mut vtable,
            );
            let sample = region_sample(&glue.sub, &mesh, &child.tris);
            let k_child = match child_level(&glue.sub, k_nu, &cls.exterior, &sample) {
                Some(kc) => kc,
                None => {
                    return Ok(reject(
                        RejectReason::StartLevelMismatch,
                        format!("region {child_id}"),
                        "child level at least zero".to_string(),
                        "more exterior planes below the sample than the level"
                            .to_string(),
                    )
                    .report(stats))
                }
            };
            let mut child_scope = cls.boundary;
            child_scope.extend(cls.interior);
            child_scope.sort_unstable();
            work.push((child_id, child_scope, k_child, depth + 1));
        }
    }

    Ok(VerifyReport::accept(stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::lift_point;
    use crate::oracle::{brute_klevel_3d_in_box, canonical_half_width};
    use crate::rat::ratio;

    fn lifted(points: &[(i64, i64)]) -> Vec<Plane3> {
        points
            .iter()
            .map(|&(x, y)| lift_point(&Point2::new(rat(x), rat(y))))
            .collect()
    }

    fn oracle_candidate(planes: &[Plane3], k: usize) -> LevelSubdivision {
        let vertices = plane_set_in_general_position(planes).unwrap();
        let w = canonical_half_width(planes, &vertices);
        brute_klevel_3d_in_box(planes, k, &w).unwrap()
    }

    #[test]
    fn oracle_levels_are_accepted() {
        let planes = lifted(&[
            (0, 0),
            (7, 1),
            (3, 8),
            (-5, 4),
            (-6, -5),
            (2, -7),
            (9, -3),
            (-2, 11),
        ]);
        for k in [0usize, 2, 5, 7] {
            let cand = oracle_candidate(&planes, k);
            let report = verify(&planes, k, &cand).unwrap();
            assert!(report.accepted, "k = {k}: {report:?}");
            assert!(report.stats.regions >= 1);
            assert!(report.stats.leaves >= 1);
        }
    }

    #[test]
    fn a_single_plane_accepts_its_envelope() {
        let planes = lifted(&[(1, 2)]);
        let cand = oracle_candidate(&planes, 0);
        let report = verify(&planes, 0, &cand).unwrap();
        assert!(report.accepted, "{report:?}");
    }

    #[test]
    fn the_wrong_level_is_rejected() {
        let planes = lifted(&[(0, 0), (7, 1), (3, 8), (-5, 4), (-6, -5), (2, -7)]);
        let cand = oracle_candidate(&planes, 2);
        let shifted = LevelSubdivision { k: 3, ..cand };
        let report = verify(&planes, 3, &shifted).unwrap();
        assert!(!report.accepted);
        assert!(matches!(
            report.reason,
            Some(RejectReason::StartLevelMismatch)
                | Some(RejectReason::BaseCaseMismatch)
                | Some(RejectReason::ExtensionMismatch)
        ));
    }

    #[test]
    fn k_out_of_range_is_a_verdict_not_an_error() {
        let planes = lifted(&[(0, 0), (7, 1), (3, 8)]);
        let cand = oracle_candidate(&planes, 1);
        let relabeled = LevelSubdivision { k: 3, ..cand };
        let report = verify(&planes, 3, &relabeled).unwrap();
        assert_eq!(report.reason, Some(RejectReason::KOutOfRange));
    }

    #[test]
    fn planes_out_of_convex_position_are_rejected() {
        let mut planes = lifted(&[(0, 0), (9, 1), (2, 7)]);
        planes.push(Plane3::new(rat(0), rat(0), rat(1_000_000)));
        let cand = oracle_candidate(&planes, 0);
        let report = verify(&planes, 0, &cand).unwrap();
        assert_eq!(report.reason, Some(RejectReason::NotConvexPosition));
        assert_eq!(report.locus.as_deref(), Some("plane 3"));
    }

    #[test]
    fn a_forged_triple_is_rejected_with_a_located_reason() {
        let planes = lifted(&[(0, 0), (7, 1), (3, 8), (-5, 4), (-6, -5), (2, -7)]);
        let mut cand = oracle_candidate(&planes, 2);
        let victim = cand
            .vertices
            .iter()
            .position(|v| !v.synthetic && v.triple.is_some())
            .unwrap();
        let t = cand.vertices[victim].triple.unwrap();
        let spare = (0..planes.len()).find(|p| !t.contains(p)).unwrap();
        let mut forged = [t[0], t[1], spare];
        forged.sort_unstable();
        cand.vertices[victim].triple = Some(forged);
        let report = verify(&planes, 2, &cand).unwrap();
        assert!(!report.accepted);
        assert!(matches!(
            report.reason,
            Some(RejectReason::BoundaryMismatch) | Some(RejectReason::BaseCaseMismatch)
        ));
    }

    #[test]
    fn a_raised_vertex_is_rejected() {
        let planes = lifted(&[(0, 0), (7, 1), (3, 8), (-5, 4), (-6, -5), (2, -7)]);
        let mut cand = oracle_candidate(&planes, 2);
        let victim = cand
            .vertices
            .iter()
            .position(|v| !v.synthetic && v.triple.is_some())
            .unwrap();
        cand.vertices[victim].point.z += ratio(1, 999_983);
        let report = verify(&planes, 2, &cand).unwrap();
        assert!(!report.accepted, "{report:?}");
    }

    #[test]
    fn degenerate_inputs_are_input_faults() {
        let planes = vec![
            Plane3::new(rat(1), rat(0), rat(0)),
            Plane3::new(rat(1), rat(0), rat(0)),
        ];
        let cand = LevelSubdivision {
            planes: planes.clone(),
            k: 0,
            half_width: rat(4),
            vertices: vec![],
            half_edges: vec![],
            faces: vec![],
            outer_face: 0,
        };
        assert!(matches!(
            verify(&planes, 0, &cand),
            Err(InputFault::Degenerate(_))
        ));
    }
}
