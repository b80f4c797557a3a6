//! Gluing a claimed subdivision to a recomputed surrounding annulus.
//!
//! The claimed faces cover the inner box.  Around them, four trapezoid
//! sectors tile an annulus out to a larger box, and the level surface of
//! the inputs plus walls is recomputed over each sector from scratch.
//! Reassembling claimed and recomputed rings into one structure forces
//! the claim to meet the truth along the inner rim: any disagreement in
//! crossing points or heights surfaces as a build defect.
//!
//! Sector seams slide along the outer rim until no tie line of the
//! extended plane set runs along a seam, and the outer box grows until
//! the rim lies in the wall-only zone.

use num_traits::Signed;

use crate::cells::{level_cells, LevelCell};
use crate::geom::{LinForm, Plane3, Point2};
use crate::rat::{rat, Rational};
use crate::subdivision::{
    from_faces_lenient, BuildCorner, BuildDefect, BuildFace, LevelSubdivision,
};
use crate::verify::bounding::WallSet;

/// A claimed subdivision embedded in its recomputed annulus.
#[derive(Debug, Clone)]
pub struct GluedExtension {
    /// Subdivision over inputs plus walls, clipped to the outer box.
    pub sub: LevelSubdivision,
    /// Faces `0..claimed_faces` of `sub` come from the claim; the rest
    /// are recomputed annulus cells.
    pub claimed_faces: usize,
    pub outer_half_width: Rational,
}

fn on_rim(p: &Point2, w: &Rational) -> bool {
    let span = if p.x.abs() >= p.y.abs() { p.x.abs() } else { p.y.abs() };
    span == *w
}

fn tie_runs_along(planes: &[Plane3], a: &Point2, b: &Point2) -> bool {
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let f = LinForm::plane_difference(&planes[i], &planes[j]);
            if f.a == rat(0) && f.b == rat(0) {
                continue;
            }
            if f.eval(a) == rat(0) && f.eval(b) == rat(0) {
                return true;
            }
        }
    }
    false
}

/// Outer endpoint of the seam leaving `corner`, slid clockwise along the
/// outer rim until the seam runs along no tie line.
fn place_seam(
    planes: &[Plane3],
    corner: &Point2,
    outer_corner: &Point2,
    slide: &Point2,
) -> Point2 {
    let mut shift = rat(0);
    for _ in 0..64 {
        let o = Point2 {
            x: &outer_corner.x + &slide.x * &shift,
            y: &outer_corner.y + &slide.y * &shift,
        };
        if !tie_runs_along(planes, corner, &o) {
            return o;
        }
        shift = if shift == rat(0) {
            rat(1)
        } else {
            shift / rat(2)
        };
    }
    panic!("no admissible seam endpoint near {outer_corner:?}");
}

fn dedup_ring(mut ring: Vec<Point2>) -> Vec<Point2> {
    ring.dedup();
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}

/// The four sector clips tiling the annulus between the boxes.
fn sector_clips(planes: &[Plane3], w: &Rational, w_out: &Rational) -> [Vec<Point2>; 4] {
    let p = |x: &Rational, y: &Rational| Point2 { x: x.clone(), y: y.clone() };
    let nw_ = -w.clone();
    let nout = -w_out.clone();
    let c_ne = p(w, w);
    let c_nw = p(&nw_, w);
    let c_sw = p(&nw_, &nw_);
    let c_se = p(w, &nw_);
    let half = w_out / rat(2);
    let nhalf = -half.clone();
    let zero = rat(0);

    let o_ne = place_seam(planes, &c_ne, &p(w_out, w_out), &p(&zero, &nhalf));
    let o_se = place_seam(planes, &c_se, &p(w_out, &nout), &p(&nhalf, &zero));
    let o_sw = place_seam(planes, &c_sw, &p(&nout, &nout), &p(&zero, &half));
    let o_nw = place_seam(planes, &c_nw, &p(&nout, w_out), &p(&half, &zero));

    [
        dedup_ring(vec![
            c_se.clone(),
            o_se.clone(),
            p(w_out, &nout),
            o_ne.clone(),
            c_ne.clone(),
        ]),
        dedup_ring(vec![
            c_ne.clone(),
            o_ne.clone(),
            p(w_out, w_out),
            o_nw.clone(),
            c_nw.clone(),
        ]),
        dedup_ring(vec![
            c_nw.clone(),
            o_nw.clone(),
            p(&nout, w_out),
            o_sw.clone(),
            c_sw.clone(),
        ]),
        dedup_ring(vec![
            c_sw.clone(),
            o_sw.clone(),
            p(&nout, &nout),
            o_se.clone(),
            c_se.clone(),
        ]),
    ]
}

/// True when an edge of `cell` touching the outer rim involves an input
/// plane, which means the rim is not yet in the wall-only zone.
fn rim_touched_by_inputs(cell: &LevelCell, n_inputs: usize, w_out: &Rational) -> bool {
    let m = cell.polygon.len();
    for i in 0..m {
        let a = &cell.polygon[i];
        let b = &cell.polygon[(i + 1) % m];
        if !on_rim(a, w_out) && !on_rim(b, w_out) {
            continue;
        }
        let involved = match cell.edges[i] {
            crate::cells::CellEdgeKind::Tie(g) => cell.support < n_inputs || g < n_inputs,
            crate::cells::CellEdgeKind::Clip(_) => cell.support < n_inputs,
        };
        if involved {
            return true;
        }
    }
    false
}

/// Faces of the claimed subdivision, re-expressed for reassembly.
fn claimed_build_faces(candidate: &LevelSubdivision) -> Vec<BuildFace> {
    let mut out = Vec::new();
    for face in &candidate.faces {
        let plane = match face.plane {
            Some(p) => p,
            None => continue,
        };
        let mut corners = Vec::new();
        let start = face.edge;
        let mut e = start;
        loop {
            let v = &candidate.vertices[candidate.half_edges[e].origin];
            corners.push(BuildCorner {
                xy: v.point.xy(),
                z: v.point.z.clone(),
                triple: v.triple,
                synthetic: v.synthetic,
            });
            e = candidate.half_edges[e].next;
            if e == start {
                break;
            }
        }
        out.push(BuildFace { plane, corners });
    }
    out
}

/// Embeds `candidate` into the recomputed annulus over inputs plus walls.
///
/// Returns the glued subdivision or the defect that stopped reassembly;
/// a defect convicts the claim, because the annulus rings alone always
/// assemble.
pub fn extend_with_annulus(
    candidate: &LevelSubdivision,
    walls: &WallSet,
) -> Result<GluedExtension, BuildDefect> {
    let n = candidate.planes.len();
    let mut all_planes = candidate.planes.clone();
    all_planes.extend(walls.planes.iter().cloned());

    let base = rat(8)
        * (&walls.d + rat(walls.copies as i64) * &walls.delta + rat(1));
    let mut w_out = base;
    let mut cells: Vec<LevelCell> = Vec::new();
    let mut grown = 0;
    loop {
        cells.clear();
        for clip in sector_clips(&all_planes, &candidate.half_width, &w_out) {
            cells.extend(level_cells(&all_planes, candidate.k, &clip));
        }
        if cells.iter().all(|c| !rim_touched_by_inputs(c, n, &w_out)) {
            break;
        }
        grown += 1;
        assert!(grown <= 8, "outer rim never cleared of input planes");
        w_out = w_out * rat(4);
    }

    let mut build = claimed_build_faces(candidate);
    let claimed_faces = build.len();
    build.extend(cells.iter().map(|c| c.to_build_face(&all_planes)));

    let sub = from_faces_lenient(all_planes, candidate.k, w_out.clone(), &build)?;
    Ok(GluedExtension { sub, claimed_faces, outer_half_width: w_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{
        brute_klevel_3d_in_box, canonical_half_width, plane_set_in_general_position,
    };
    use crate::subdivision::dissolve_synthetic_edges;
    use crate::verify::bounding::make_bounding_planes;

    fn plane(a: i64, b: i64, c: i64) -> Plane3 {
        Plane3 { a: rat(a), b: rat(b), c: rat(c) }
    }

    fn setup() -> (Vec<Plane3>, Rational, WallSet) {
        let planes = vec![
            plane(1, 0, 0),
            plane(-1, 1, 0),
            plane(-1, -1, 6),
            plane(0, 2, -3),
        ];
        let vertices = plane_set_in_general_position(&planes).unwrap();
        let w = canonical_half_width(&planes, &vertices);
        let walls = make_bounding_planes(&planes, &w, &vertices);
        (planes, w, walls)
    }

    #[test]
    fn sectors_tile_the_annulus_with_positive_area() {
        let (planes, w, walls) = setup();
        let mut all = planes.clone();
        all.extend(walls.planes.iter().cloned());
        let w_out = rat(8) * (&walls.d + rat(walls.copies as i64) * &walls.delta + rat(1));
        let clips = sector_clips(&all, &w, &w_out);
        let mut total = rat(0);
        for clip in &clips {
            let a = crate::geom::polygon_area2(clip);
            assert!(a > rat(0));
            total = total + a;
        }
        let full = rat(4) * (&w_out * &w_out - &w * &w);
        assert_eq!(total, rat(2) * full);
    }

    #[test]
    fn gluing_a_correct_subdivision_succeeds() {
        for k in [0usize, 1, 2] {
            let (planes, w, walls) = setup();
            let candidate = brute_klevel_3d_in_box(&planes, k, &w).unwrap();
            let total = candidate.faces.len();
            let glued = extend_with_annulus(&candidate, &walls).unwrap();
            assert_eq!(glued.claimed_faces, total - 1);
            assert!(glued.sub.faces.len() > total);
        }
    }

    #[test]
    fn glued_structure_matches_the_oracle_over_the_outer_box() {
        let k = 1;
        let (planes, w, walls) = setup();
        let candidate = brute_klevel_3d_in_box(&planes, k, &w).unwrap();
        let glued = extend_with_annulus(&candidate, &walls).unwrap();

        let mut all = planes.clone();
        all.extend(walls.planes.iter().cloned());
        let oracle = brute_klevel_3d_in_box(&all, k, &glued.outer_half_width).unwrap();
        assert_eq!(
            dissolve_synthetic_edges(&glued.sub).canonical_form(),
            dissolve_synthetic_edges(&oracle).canonical_form()
        );
    }

    #[test]
    fn height_lies_on_the_inner_rim_are_convicted() {
        let k = 1;
        let (planes, w, walls) = setup();
        let mut candidate = brute_klevel_3d_in_box(&planes, k, &w).unwrap();
        let lifted = candidate
            .vertices
            .iter()
            .position(|v| v.synthetic && on_rim(&v.point.xy(), &w))
            .unwrap();
        candidate.vertices[lifted].point.z = &candidate.vertices[lifted].point.z + rat(1);
        assert!(extend_with_annulus(&candidate, &walls).is_err());
    }
}
