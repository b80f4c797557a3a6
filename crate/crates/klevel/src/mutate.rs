//! Seeded damage for accepted level structures.
//!
//! Each mutation breaks an accepted candidate in one structured way and
//! records which rejection codes a verifier run may legitimately report
//! for it.  Damage that happens to leave the level unchanged is re-rolled,
//! so a mutated candidate never certifies the same surface as its source.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Plane3, Point2};
use crate::oracle::{brute_klevel_3d_in_box, plane_set_in_general_position};
use crate::rat::{format_rational, rat, ratio};
use crate::subdivision::{check_subdivision, LevelSubdivision};
use crate::verify::RejectReason;

/// The six ways a candidate gets damaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationKind {
    /// Replaces one plane in a vertex triple by a plane missing the vertex.
    VertexTripleSwap,
    /// Exchanges the `next` pointers of two half-edges on one face ring.
    EdgeRewire,
    /// Relabels the whole structure with an adjacent level.
    LevelShift,
    /// Moves the support of one input plane, leaving the candidate stale.
    PlanePerturb,
    /// Merges a bounded face into a neighbor, erasing the edge between them.
    FaceDelete,
    /// Drags an interior vertex into a face it does not touch.
    CrossingInject,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::VertexTripleSwap,
        MutationKind::EdgeRewire,
        MutationKind::LevelShift,
        MutationKind::PlanePerturb,
        MutationKind::FaceDelete,
        MutationKind::CrossingInject,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationKind::VertexTripleSwap => "vertex-triple-swap",
            MutationKind::EdgeRewire => "edge-rewire",
            MutationKind::LevelShift => "level-shift",
            MutationKind::PlanePerturb => "plane-perturb",
            MutationKind::FaceDelete => "face-delete",
            MutationKind::CrossingInject => "crossing-inject",
        }
    }

    pub fn parse(s: &str) -> Option<MutationKind> {
        MutationKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Rejection codes the verifier may report for this damage.  The
    /// verdict is always a rejection; the code depends on which check
    /// meets the damage first.
    pub fn expected_reasons(self) -> &'static [RejectReason] {
        use RejectReason::*;
        match self {
            MutationKind::VertexTripleSwap => &[BoundaryMismatch, BaseCaseMismatch],
            MutationKind::EdgeRewire => &[BadSubdivision],
            MutationKind::LevelShift => {
                &[ExtensionMismatch, StartLevelMismatch, BaseCaseMismatch]
            }
            MutationKind::PlanePerturb => &[
                NotConvexPosition,
                BadSubdivision,
                ExtensionMismatch,
                StartLevelMismatch,
                EdgeCrossedEarly,
                BoundaryMismatch,
                BaseCaseMismatch,
            ],
            MutationKind::FaceDelete => &[
                BadSubdivision,
                ExtensionMismatch,
                StartLevelMismatch,
                EdgeCrossedEarly,
                BoundaryMismatch,
                BaseCaseMismatch,
            ],
            MutationKind::CrossingInject => &[BadSubdivision],
        }
    }
}

impl std::fmt::Display for MutationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A damaged instance ready for a verifier run.
#[derive(Debug, Clone)]
pub struct Mutated {
    pub kind: MutationKind,
    pub seed: u64,
    /// Planes to verify against; differs from the input only for
    /// [`MutationKind::PlanePerturb`].
    pub planes: Vec<Plane3>,
    /// Level to request; differs from the input only for
    /// [`MutationKind::LevelShift`].
    pub k: usize,
    pub candidate: LevelSubdivision,
    /// Human description of the damaged element.
    pub locus: String,
}

/// Why a mutation could not be applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutationFault {
    /// The candidate offers no site for this kind of damage.
    Unsatisfiable(MutationKind),
    /// Every retry left the certified surface unchanged.
    NoOp(MutationKind),
}

impl std::fmt::Display for MutationFault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MutationFault::Unsatisfiable(k) => {
                write!(f, "candidate offers no site for {k}")
            }
            MutationFault::NoOp(k) => {
                write!(f, "{k} left the level unchanged after every retry")
            }
        }
    }
}

/// Applies one seeded mutation to a verifier-accepted candidate.
///
/// The result is reproducible from `(kind, seed)` alone.
pub fn mutate(
    planes: &[Plane3],
    cand: &LevelSubdivision,
    kind: MutationKind,
    seed: u64,
) -> Result<Mutated, MutationFault> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(kind as u64 + 1);
    let (candidate, out_planes, k, locus) = match kind {
        MutationKind::VertexTripleSwap => {
            let (c, l) = triple_swap(cand, &mut rng)?;
            (c, planes.to_vec(), cand.k, l)
        }
        MutationKind::EdgeRewire => {
            let (c, l) = edge_rewire(cand, &mut rng)?;
            (c, planes.to_vec(), cand.k, l)
        }
        MutationKind::LevelShift => {
            let (c, k2, l) = level_shift(planes, cand)?;
            (c, planes.to_vec(), k2, l)
        }
        MutationKind::PlanePerturb => {
            let (c, p, l) = plane_perturb(planes, cand, &mut rng)?;
            (c, p, cand.k, l)
        }
        MutationKind::FaceDelete => {
            let (c, l) = face_delete(cand, &mut rng)?;
            (c, planes.to_vec(), cand.k, l)
        }
        MutationKind::CrossingInject => {
            let (c, l) = crossing_inject(cand, &mut rng)?;
            (c, planes.to_vec(), cand.k, l)
        }
    };
    Ok(Mutated { kind, seed, planes: out_planes, k, candidate, locus })
}

fn triple_swap(
    cand: &LevelSubdivision,
    rng: &mut ChaCha8Rng,
) -> Result<(LevelSubdivision, String), MutationFault> {
    let sites: Vec<usize> =
        (0..cand.vertices.len()).filter(|&v| cand.vertices[v].triple.is_some()).collect();
    if sites.is_empty() {
        return Err(MutationFault::Unsatisfiable(MutationKind::VertexTripleSwap));
    }
    let v = sites[rng.gen_range(0..sites.len())];
    let mut triple = cand.vertices[v].triple.unwrap();
    let spare: Vec<usize> =
        (0..cand.planes.len()).filter(|p| !triple.contains(p)).collect();
    if spare.is_empty() {
        return Err(MutationFault::Unsatisfiable(MutationKind::VertexTripleSwap));
    }
    let slot = rng.gen_range(0..3);
    let repl = spare[rng.gen_range(0..spare.len())];
    let old = triple[slot];
    triple[slot] = repl;
    triple.sort_unstable();
    let mut out = cand.clone();
    out.vertices[v].triple = Some(triple);
    Ok((out, format!("vertex {v}: plane {old} replaced by plane {repl}")))
}

fn edge_rewire(
    cand: &LevelSubdivision,
    rng: &mut ChaCha8Rng,
) -> Result<(LevelSubdivision, String), MutationFault> {
    let rings: Vec<(usize, Vec<usize>)> = (0..cand.faces.len())
        .map(|f| (f, cand.face_cycle(f)))
        .filter(|(_, c)| c.len() >= 4)
        .collect();
    if rings.is_empty() {
        return Err(MutationFault::Unsatisfiable(MutationKind::EdgeRewire));
    }
    let (f, ring) = &rings[rng.gen_range(0..rings.len())];
    let len = ring.len();
    let (i, j) = loop {
        let i = rng.gen_range(0..len);
        let j = rng.gen_range(0..len);
        let adjacent = j == i || j == (i + 1) % len || i == (j + 1) % len;
        if !adjacent {
            break (i, j);
        }
    };
    let (e1, e2) = (ring[i], ring[j]);
    let mut out = cand.clone();
    let n1 = out.half_edges[e1].next;
    let n2 = out.half_edges[e2].next;
    out.half_edges[e1].next = n2;
    out.half_edges[e2].next = n1;
    Ok((out, format!("face {f}: next of half-edges {e1} and {e2} exchanged")))
}

fn level_shift(
    planes: &[Plane3],
    cand: &LevelSubdivision,
) -> Result<(LevelSubdivision, usize, String), MutationFault> {
    let k = cand.k;
    let k2 = if k + 1 < planes.len() {
        k + 1
    } else if k > 0 {
        k - 1
    } else {
        return Err(MutationFault::Unsatisfiable(MutationKind::LevelShift));
    };
    let mut out = cand.clone();
    out.k = k2;
    Ok((out, k2, format!("level {k} relabeled {k2}")))
}

fn plane_perturb(
    planes: &[Plane3],
    cand: &LevelSubdivision,
    rng: &mut ChaCha8Rng,
) -> Result<(LevelSubdivision, Vec<Plane3>, String), MutationFault> {
    let before = cand.canonical_form();
    for _ in 0..16 {
        let j = rng.gen_range(0..planes.len());
        let sign = if rng.gen::<bool>() { 1 } else { -1 };
        let eps = ratio(sign, rng.gen_range(1_000_003i64..1_050_003));
        let mut moved = planes.to_vec();
        moved[j].c = &moved[j].c + &eps;
        if plane_set_in_general_position(&moved).is_err() {
            continue;
        }
        let truth = match brute_klevel_3d_in_box(&moved, cand.k, &cand.half_width) {
            Ok(t) => t,
            Err(_) => continue,
        };
        if truth.canonical_form() == before {
            continue;
        }
        let mut out = cand.clone();
        out.planes = moved.clone();
        let locus = format!("plane {j}: support offset by {}", format_rational(&eps));
        return Ok((out, moved, locus));
    }
    Err(MutationFault::NoOp(MutationKind::PlanePerturb))
}

fn face_delete(
    cand: &LevelSubdivision,
    rng: &mut ChaCha8Rng,
) -> Result<(LevelSubdivision, String), MutationFault> {
    let sites: Vec<usize> = (0..cand.half_edges.len())
        .filter(|&e| {
            let t = cand.half_edges[e].twin;
            let (fa, fb) = (cand.half_edges[e].face, cand.half_edges[t].face);
            e < t && fa != cand.outer_face && fb != cand.outer_face && fa != fb
        })
        .collect();
    if sites.is_empty() {
        return Err(MutationFault::Unsatisfiable(MutationKind::FaceDelete));
    }
    let e = sites[rng.gen_range(0..sites.len())];
    let mut out = cand.clone();
    let t = out.half_edges[e].twin;
    let (fa, fb) = (out.half_edges[e].face, out.half_edges[t].face);
    let prev = |sub: &LevelSubdivision, e: usize| {
        let mut cur = e;
        while sub.half_edges[cur].next != e {
            cur = sub.half_edges[cur].next;
        }
        cur
    };
    let (pe, pt) = (prev(&out, e), prev(&out, t));
    let (ne, nt) = (out.half_edges[e].next, out.half_edges[t].next);
    out.half_edges[pe].next = nt;
    out.half_edges[pt].next = ne;
    let plane = out.faces[fa].plane;
    for he in out.half_edges.iter_mut() {
        if he.face == fb {
            he.face = fa;
            he.plane = plane;
        }
    }
    out.faces[fa].edge = ne;
    out.faces.remove(fb);
    for he in out.half_edges.iter_mut() {
        if he.face > fb {
            he.face -= 1;
        }
    }
    if out.outer_face > fb {
        out.outer_face -= 1;
    }
    let (lo, hi) = (e.min(t), e.max(t));
    out.half_edges.remove(hi);
    out.half_edges.remove(lo);
    let remap = |x: usize| x - usize::from(x > lo) - usize::from(x > hi);
    for he in out.half_edges.iter_mut() {
        he.twin = remap(he.twin);
        he.next = remap(he.next);
    }
    for f in out.faces.iter_mut() {
        f.edge = remap(f.edge);
    }
    Ok((out, format!("face {fb} merged into face {fa} across half-edge {e}")))
}

fn crossing_inject(
    cand: &LevelSubdivision,
    rng: &mut ChaCha8Rng,
) -> Result<(LevelSubdivision, String), MutationFault> {
    let movable: Vec<usize> =
        (0..cand.vertices.len()).filter(|&v| !cand.vertices[v].synthetic).collect();
    let pool: Vec<usize> = (0..cand.faces.len()).filter(|&f| f != cand.outer_face).collect();
    if movable.is_empty() || pool.is_empty() {
        return Err(MutationFault::Unsatisfiable(MutationKind::CrossingInject));
    }
    for _ in 0..64 {
        let v = movable[rng.gen_range(0..movable.len())];
        let f = pool[rng.gen_range(0..pool.len())];
        let ring = cand.face_cycle(f);
        if ring.iter().any(|&e| cand.half_edges[e].origin == v) {
            continue;
        }
        let poly = cand.face_polygon(f);
        let n = rat(poly.len() as i64);
        let target = Point2 {
            x: poly.iter().fold(rat(0), |s, p| &s + &p.x) / &n,
            y: poly.iter().fold(rat(0), |s, p| &s + &p.y) / &n,
        };
        if cand.vertices.iter().any(|w| w.point.xy() == target) {
            continue;
        }
        let mut out = cand.clone();
        out.vertices[v].point.x = target.x;
        out.vertices[v].point.y = target.y;
        if check_subdivision(&out).is_err() {
            return Ok((out, format!("vertex {v} dragged into face {f}")));
        }
    }
    Err(MutationFault::NoOp(MutationKind::CrossingInject))
}
