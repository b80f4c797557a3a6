//! Divide-and-conquer k-level construction driven by cuttings.
//!
//! The level is computed inside a triangle that contains every crossing of
//! the arrangement. Each cutting tile receives only the lines that reach
//! it, together with the count of lines passing strictly under it, so the
//! target rank drops as the recursion descends. Tiles small enough are
//! solved by the slab-sorting oracle and clipped; the pieces are then
//! stitched back into one x-monotone polyline.

use crate::cutting::{cutting, CutCell, CuttingAudit, CuttingConfig};
use crate::geom::{intersect2, Line2, LinForm, Point2, Triangle2};
use crate::oracle::brute_klevel_2d;
use crate::polyline::Polyline;
use crate::rat::{rat, Rational};
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct DcConfig {
    pub cutting: CuttingConfig,
    /// Subproblems at most this large go straight to the slab oracle.
    pub base_size: usize,
    pub max_depth: usize,
}

impl Default for DcConfig {
    fn default() -> Self {
        DcConfig {
            cutting: CuttingConfig::default(),
            base_size: 24,
            max_depth: 8,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct DcStats {
    pub cuttings: Vec<CuttingAudit>,
    pub base_cells: usize,
    pub deepest: usize,
}

pub fn klevel_dc(lines: &[Line2], k: usize, seed: u64) -> Polyline {
    klevel_dc_with_stats(lines, k, &DcConfig::default(), seed).0
}

pub fn klevel_dc_with_stats(
    lines: &[Line2],
    k: usize,
    cfg: &DcConfig,
    seed: u64,
) -> (Polyline, DcStats) {
    assert!(k < lines.len());
    let mut stats = DcStats::default();
    if lines.len() <= cfg.base_size {
        stats.base_cells = 1;
        return (brute_klevel_2d(lines, k), stats);
    }

    let region = enclosing_triangle(lines);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idxs: Vec<usize> = (0..lines.len()).collect();
    let mut segments = Vec::new();
    recurse(
        lines, &idxs, k, &region, cfg, 0, &mut rng, &mut stats, &mut segments,
    );
    (stitch(lines, k, segments), stats)
}

/// A triangle strictly containing every pairwise crossing.
fn enclosing_triangle(lines: &[Line2]) -> Triangle2 {
    let mut min_x: Option<Rational> = None;
    let mut max_x: Option<Rational> = None;
    let mut min_y: Option<Rational> = None;
    let mut max_y: Option<Rational> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = intersect2(&lines[i], &lines[j]) {
                update_min(&mut min_x, &p.x);
                update_max(&mut max_x, &p.x);
                update_min(&mut min_y, &p.y);
                update_max(&mut max_y, &p.y);
            }
        }
    }
    let (min_x, max_x) = (min_x.unwrap_or_else(|| rat(0)), max_x.unwrap_or_else(|| rat(0)));
    let (min_y, max_y) = (min_y.unwrap_or_else(|| rat(0)), max_y.unwrap_or_else(|| rat(0)));
    let mid_x = (&min_x + &max_x) / rat(2);
    let mut margin = &max_x - &min_x + (&max_y - &min_y) + rat(2);
    loop {
        let a = Point2::new(&min_x - &margin, &min_y - &margin);
        let b = Point2::new(&max_x + &margin, &min_y - &margin);
        let c = Point2::new(mid_x.clone(), &max_y + rat(2) * &margin);
        let tri = Triangle2::new(a, b, c).expect("enclosing corners are never collinear");
        let hull_corners = [
            Point2::new(min_x.clone(), min_y.clone()),
            Point2::new(max_x.clone(), min_y.clone()),
            Point2::new(max_x.clone(), max_y.clone()),
            Point2::new(min_x.clone(), max_y.clone()),
        ];
        if hull_corners.iter().all(|p| tri.contains_strictly(p)) {
            return tri;
        }
        margin *= rat(2);
    }
}

fn update_min(slot: &mut Option<Rational>, v: &Rational) {
    match slot {
        Some(cur) if &*cur <= v => {}
        _ => *slot = Some(v.clone()),
    }
}

fn update_max(slot: &mut Option<Rational>, v: &Rational) {
    match slot {
        Some(cur) if &*cur >= v => {}
        _ => *slot = Some(v.clone()),
    }
}

type Segment = (usize, Point2, Point2);

#[allow(clippy::too_many_arguments)]
fn recurse(
    lines: &[Line2],
    idxs: &[usize],
    k: usize,
    region: &Triangle2,
    cfg: &DcConfig,
    depth: usize,
    rng: &mut ChaCha8Rng,
    stats: &mut DcStats,
    out: &mut Vec<Segment>,
) {
    stats.deepest = stats.deepest.max(depth);
    if k >= idxs.len() {
        return;
    }
    let sub: Vec<Line2> = idxs.iter().map(|&i| lines[i].clone()).collect();
    if idxs.len() <= cfg.base_size || depth >= cfg.max_depth {
        stats.base_cells += 1;
        let poly = brute_klevel_2d(&sub, k);
        clip_into(&poly, idxs, &sub, region, out);
        return;
    }
    let (cells, audit) = cutting(&sub, region, &cfg.cutting, rng);
    stats.cuttings.push(audit);
    for cell in cells {
        descend(lines, idxs, k, &cell, cfg, depth, rng, stats, out);
    }
}

#[allow(clippy::too_many_arguments)]
fn descend(
    lines: &[Line2],
    idxs: &[usize],
    k: usize,
    cell: &CutCell,
    cfg: &DcConfig,
    depth: usize,
    rng: &mut ChaCha8Rng,
    stats: &mut DcStats,
    out: &mut Vec<Segment>,
) {
    if cell.below > k {
        return;
    }
    let child_k = k - cell.below;
    if child_k >= cell.recurse.len() {
        return;
    }
    let child_idxs: Vec<usize> = cell.recurse.iter().map(|&i| idxs[i]).collect();
    if child_idxs.len() >= idxs.len() {
        stats.base_cells += 1;
        let sub: Vec<Line2> = child_idxs.iter().map(|&i| lines[i].clone()).collect();
        let poly = brute_klevel_2d(&sub, child_k);
        clip_into(&poly, &child_idxs, &sub, &cell.triangle, out);
        return;
    }
    recurse(
        lines,
        &child_idxs,
        child_k,
        &cell.triangle,
        cfg,
        depth + 1,
        rng,
        stats,
        out,
    );
}

/// Clips a polyline to a closed triangle, emitting surviving pieces with
/// line indices mapped through `idxs`.
fn clip_into(
    poly: &Polyline,
    idxs: &[usize],
    sub: &[Line2],
    region: &Triangle2,
    out: &mut Vec<Segment>,
) {
    let corners = region.corners();
    let span_lo = corners.iter().map(|c| &c.x).min().unwrap() - rat(1);
    let span_hi = corners.iter().map(|c| &c.x).max().unwrap() + rat(1);
    let forms: Vec<LinForm> = (0..3)
        .map(|i| {
            let (a, b) = (&corners[i], &corners[(i + 1) % 3]);
            LinForm::new(
                &a.y - &b.y,
                &b.x - &a.x,
                &a.x * &b.y - &a.y * &b.x,
            )
        })
        .collect();
    for (i, &e) in poly.edges.iter().enumerate() {
        let line = &sub[e];
        let x0 = if i == 0 {
            span_lo.clone()
        } else {
            poly.breakpoints[i - 1].x.clone()
        };
        let x1 = if i == poly.edges.len() - 1 {
            span_hi.clone()
        } else {
            poly.breakpoints[i].x.clone()
        };
        if x0 >= x1 {
            continue;
        }
        let mut a = Point2::new(x0.clone(), line.eval(&x0));
        let mut b = Point2::new(x1.clone(), line.eval(&x1));
        let mut alive = true;
        for form in &forms {
            let va = form.eval(&a);
            let vb = form.eval(&b);
            if va.is_negative() && vb.is_negative() {
                alive = false;
                break;
            }
            if va.is_negative() || vb.is_negative() {
                let t = &va / (&va - &vb);
                let cut = Point2::new(&a.x + (&b.x - &a.x) * &t, &a.y + (&b.y - &a.y) * &t);
                if va.is_negative() {
                    a = cut;
                } else {
                    b = cut;
                }
            }
        }
        if alive && a != b {
            out.push((idxs[e], a, b));
        }
    }
}

/// Splits overlapping pieces at the union of their endpoints, removes
/// duplicates, and chains what is left into the level polyline.
fn stitch(lines: &[Line2], k: usize, segments: Vec<Segment>) -> Polyline {
    let mut per_line: BTreeMap<usize, (BTreeSet<Rational>, Vec<(Point2, Point2)>)> =
        BTreeMap::new();
    for (e, a, b) in segments {
        let entry = per_line.entry(e).or_default();
        entry.0.insert(a.x.clone());
        entry.0.insert(b.x.clone());
        entry.1.push((a, b));
    }
    let mut pieces: BTreeSet<Segment> = BTreeSet::new();
    for (e, (xs, segs)) in &per_line {
        let xs: Vec<&Rational> = xs.iter().collect();
        for (a, b) in segs {
            let lo = xs.partition_point(|x| **x < a.x);
            let hi = xs.partition_point(|x| **x <= b.x);
            for w in xs[lo..hi].windows(2) {
                let line = &lines[*e];
                pieces.insert((
                    *e,
                    Point2::new(w[0].clone(), line.eval(w[0])),
                    Point2::new(w[1].clone(), line.eval(w[1])),
                ));
            }
        }
    }

    let mut outs: BTreeMap<Point2, Vec<Segment>> = BTreeMap::new();
    let mut in_degree: BTreeMap<Point2, usize> = BTreeMap::new();
    for piece in &pieces {
        outs.entry(piece.1.clone()).or_default().push(piece.clone());
        *in_degree.entry(piece.2.clone()).or_default() += 1;
    }
    for segs in outs.values() {
        assert_eq!(segs.len(), 1, "level pieces must not branch");
    }
    for count in in_degree.values() {
        assert_eq!(*count, 1, "level pieces must not merge");
    }
    let mut starts: Vec<Point2> = outs
        .keys()
        .filter(|p| !in_degree.contains_key(*p))
        .cloned()
        .collect();
    assert_eq!(starts.len(), 1, "level must enter the region exactly once");
    let mut cursor = starts.pop().unwrap();

    let mut edges: Vec<usize> = Vec::new();
    let mut breakpoints: Vec<Point2> = Vec::new();
    let mut used = 0usize;
    while let Some(seg) = outs.get(&cursor).and_then(|v| v.first()).cloned() {
        used += 1;
        match edges.last() {
            Some(&prev) if prev == seg.0 => {}
            Some(_) => {
                breakpoints.push(seg.1.clone());
                edges.push(seg.0);
            }
            None => edges.push(seg.0),
        }
        outs.remove(&cursor);
        cursor = seg.2;
    }
    assert_eq!(used, pieces.len(), "level pieces must form one chain");

    let mut by_slope: Vec<usize> = (0..lines.len()).collect();
    by_slope.sort_by(|&i, &j| lines[i].m.cmp(&lines[j].m));
    assert_eq!(edges.first(), Some(&by_slope[lines.len() - 1 - k]));
    assert_eq!(edges.last(), Some(&by_slope[k]));
    Polyline { edges, breakpoints }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::lines_in_general_position;
    use crate::polyline::check_polyline;
    use proptest::prelude::*;

    fn line(m: i64, t: i64) -> Line2 {
        Line2::new(rat(m), rat(t))
    }

    fn spread_lines(n: usize, seed: u64) -> Vec<Line2> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut lines = Vec::with_capacity(n);
            let mut slopes = BTreeSet::new();
            while lines.len() < n {
                let m: i64 = rng.gen_range(-60..60);
                let t: i64 = rng.gen_range(-60..60);
                if slopes.insert(m) {
                    lines.push(line(m, t));
                }
            }
            if lines_in_general_position(&lines) {
                return lines;
            }
        }
    }

    #[test]
    fn matches_oracle_beyond_the_base_size() {
        for (n, seed) in [(26usize, 5u64), (30, 8), (35, 13)] {
            let lines = spread_lines(n, seed);
            for k in [0, n / 2, n - 1] {
                let (poly, stats) = klevel_dc_with_stats(&lines, k, &DcConfig::default(), 99);
                assert!(!stats.cuttings.is_empty());
                assert!(stats.cuttings.iter().all(|a| a.within_bounds));
                assert_eq!(poly, brute_klevel_2d(&lines, k));
                assert_eq!(check_polyline(&lines, k, &poly), Ok(()));
            }
        }
    }

    #[test]
    fn output_is_seed_independent() {
        let lines = spread_lines(28, 21);
        let a = klevel_dc(&lines, 14, 1);
        let b = klevel_dc(&lines, 14, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn small_inputs_skip_the_cutting() {
        let lines = vec![line(0, 0), line(1, 0), line(-1, 2)];
        let (poly, stats) = klevel_dc_with_stats(&lines, 1, &DcConfig::default(), 0);
        assert_eq!(stats.base_cells, 1);
        assert!(stats.cuttings.is_empty());
        assert_eq!(poly, brute_klevel_2d(&lines, 1));
    }

    #[test]
    fn tiny_base_size_still_stitches_correctly() {
        let lines = spread_lines(12, 3);
        let cfg = DcConfig {
            base_size: 4,
            ..DcConfig::default()
        };
        for k in 0..lines.len() {
            let (poly, _) = klevel_dc_with_stats(&lines, k, &cfg, 7);
            assert_eq!(poly, brute_klevel_2d(&lines, k));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn random_instances_match_the_oracle(seed in 0u64..5000, n in 25usize..34, pick in 0u64..3) {
            let lines = spread_lines(n, seed);
            let k = match pick {
                0 => 0,
                1 => n / 2,
                _ => n - 1,
            };
            let poly = klevel_dc(&lines, k, seed ^ 0xabcd);
            prop_assert_eq!(&poly, &brute_klevel_2d(&lines, k));
            prop_assert_eq!(check_polyline(&lines, k, &poly), Ok(()));
        }
    }
}
