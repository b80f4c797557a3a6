//! Randomized cuttings of a line arrangement inside a triangle.
//!
//! A cutting is a tiling of the region by triangles such that few input
//! lines cross any one tile. It is built the Las Vegas way: sample a few
//! lines, decompose the region along them into trapezoids by a vertical
//! slab sweep, split each trapezoid along a diagonal, and audit the result
//! against the declared bounds, resampling on failure.

use crate::geom::{intersect2, sign, Line2, Point2, Triangle2};
use crate::rat::{rat, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct CuttingConfig {
    /// Inverse conflict fraction: no tile may be crossed by more than
    /// `ceil(n / r)` lines.
    pub r: usize,
    /// Sample size multiplier; the sample has about
    /// `sample_factor * r * ln(r + 1)` lines.
    pub sample_factor: f64,
    /// Tile count allowance: at most
    /// `cell_constant * (X * r^2 / n^2 + r)` tiles, where `X` counts the
    /// input crossings inside the region.
    pub cell_constant: usize,
    pub max_attempts: usize,
}

impl Default for CuttingConfig {
    fn default() -> Self {
        CuttingConfig {
            r: 4,
            sample_factor: 3.0,
            cell_constant: 96,
            max_attempts: 20,
        }
    }
}

/// One tile of a cutting, classified against the full line set.
#[derive(Clone, Debug)]
pub struct CutCell {
    pub triangle: Triangle2,
    /// Lines crossing the open interior.
    pub conflict: Vec<usize>,
    /// Lines that must be passed down: the conflict lines plus any line
    /// touching the tile boundary.
    pub recurse: Vec<usize>,
    /// Lines strictly below every point of the tile.
    pub below: usize,
}

#[derive(Clone, Debug)]
pub struct CuttingAudit {
    pub lines: usize,
    pub r: usize,
    pub sample_size: usize,
    pub attempts: usize,
    pub cells: usize,
    pub max_conflict: usize,
    pub conflict_bound: usize,
    pub cell_bound: usize,
    pub crossings_inside: usize,
    pub within_bounds: bool,
}

/// Crossings of distinct line pairs lying in the closed triangle.
pub fn crossings_inside(lines: &[Line2], region: &Triangle2) -> usize {
    let mut count = 0;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = intersect2(&lines[i], &lines[j]) {
                if region.contains(&p) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Lines of `lines` strictly below `p`.
pub fn level2d_at(lines: &[Line2], p: &Point2) -> usize {
    lines.iter().filter(|l| l.eval(&p.x) < p.y).count()
}

pub fn cutting(
    lines: &[Line2],
    region: &Triangle2,
    cfg: &CuttingConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<CutCell>, CuttingAudit) {
    let n = lines.len();
    assert!(n > 0);
    let x_inside = crossings_inside(lines, region);
    let conflict_bound = n.div_ceil(cfg.r);
    let cell_bound =
        cfg.cell_constant * x_inside * cfg.r * cfg.r / (n * n) + cfg.cell_constant * cfg.r;

    let base = (cfg.sample_factor * cfg.r as f64 * ((cfg.r + 1) as f64).ln()).round() as usize;
    let base = base.max(1);

    let mut best: Option<(Vec<CutCell>, usize, usize)> = None;
    let mut attempts = 0;
    for attempt in 0..cfg.max_attempts {
        attempts = attempt + 1;
        let growth = 1.3f64.powi(attempt.saturating_sub(10) as i32);
        let s = ((base as f64 * growth).round() as usize).min(base * 8).min(n);
        let picked = sample_indices(rng, n, s);
        let sample: Vec<Line2> = picked.iter().map(|&i| lines[i].clone()).collect();
        let cells = classify(lines, &tiles(&sample, region));
        let max_conflict = cells.iter().map(|c| c.conflict.len()).max().unwrap_or(0);
        if max_conflict <= conflict_bound && cells.len() <= cell_bound {
            let audit = CuttingAudit {
                lines: n,
                r: cfg.r,
                sample_size: s,
                attempts,
                cells: cells.len(),
                max_conflict,
                conflict_bound,
                cell_bound,
                crossings_inside: x_inside,
                within_bounds: true,
            };
            return (cells, audit);
        }
        let score = max_conflict.saturating_sub(conflict_bound) * 1000
            + cells.len().saturating_sub(cell_bound);
        match &best {
            Some((_, best_score, _)) if *best_score <= score => {}
            _ => best = Some((cells, score, s)),
        }
    }
    let (cells, _, s) = best.unwrap();
    let max_conflict = cells.iter().map(|c| c.conflict.len()).max().unwrap_or(0);
    let audit = CuttingAudit {
        lines: n,
        r: cfg.r,
        sample_size: s,
        attempts,
        cells: cells.len(),
        max_conflict,
        conflict_bound,
        cell_bound,
        crossings_inside: x_inside,
        within_bounds: false,
    };
    (cells, audit)
}

fn sample_indices(rng: &mut ChaCha8Rng, n: usize, s: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..s {
        let j = rng.gen_range(i..n);
        all.swap(i, j);
    }
    all.truncate(s);
    all
}

fn classify(lines: &[Line2], triangles: &[Triangle2]) -> Vec<CutCell> {
    triangles
        .iter()
        .map(|tri| {
            let mut below = 0;
            let mut conflict = Vec::new();
            let mut recurse = Vec::new();
            for (i, g) in lines.iter().enumerate() {
                let mut pos = 0;
                let mut neg = 0;
                for corner in tri.corners() {
                    match sign(&(&corner.y - g.eval(&corner.x))) {
                        1 => pos += 1,
                        -1 => neg += 1,
                        _ => {}
                    }
                }
                if pos == 3 {
                    below += 1;
                } else if neg == 3 {
                    // Strictly above the whole tile.
                } else {
                    recurse.push(i);
                    if pos > 0 && neg > 0 {
                        conflict.push(i);
                    }
                }
            }
            CutCell {
                triangle: tri.clone(),
                conflict,
                recurse,
                below,
            }
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Rail {
    Edge(usize),
    Sample(usize),
}

struct Trapezoid {
    xl: Rational,
    xr: Rational,
    lower: Line2,
    upper: Line2,
}

/// Triangulated trapezoidal decomposition of the sample inside the region.
fn tiles(sample: &[Line2], region: &Triangle2) -> Vec<Triangle2> {
    let mut out = Vec::new();
    for trap in trapezoids(sample, region) {
        let p1 = Point2::new(trap.xl.clone(), trap.lower.eval(&trap.xl));
        let p2 = Point2::new(trap.xr.clone(), trap.lower.eval(&trap.xr));
        let p3 = Point2::new(trap.xr.clone(), trap.upper.eval(&trap.xr));
        let p4 = Point2::new(trap.xl.clone(), trap.upper.eval(&trap.xl));
        let left_flat = p1 == p4;
        let right_flat = p2 == p3;
        match (left_flat, right_flat) {
            (true, true) => {}
            (true, false) => out.extend(Triangle2::new(p1, p2, p3)),
            (false, true) => out.extend(Triangle2::new(p1, p2, p4)),
            (false, false) => {
                out.extend(Triangle2::new(p1.clone(), p2, p3.clone()));
                out.extend(Triangle2::new(p1, p3, p4));
            }
        }
    }
    out
}

fn trapezoids(sample: &[Line2], region: &Triangle2) -> Vec<Trapezoid> {
    let corners = region.corners();
    let edges: Vec<(Point2, Point2)> = (0..3)
        .map(|i| (corners[i].clone(), corners[(i + 1) % 3].clone()))
        .collect();

    let mut events: Vec<Rational> = corners.iter().map(|c| c.x.clone()).collect();
    let min_x = events.iter().min().unwrap().clone();
    let max_x = events.iter().max().unwrap().clone();
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            if let Some(p) = intersect2(&sample[i], &sample[j]) {
                if region.contains(&p) {
                    events.push(p.x);
                }
            }
        }
    }
    for line in sample {
        for (a, b) in &edges {
            if a.x == b.x {
                continue;
            }
            let edge_line = line_through(a, b);
            if let Some(p) = intersect2(line, &edge_line) {
                let (lo, hi) = if a.x <= b.x { (&a.x, &b.x) } else { (&b.x, &a.x) };
                if *lo <= p.x && p.x <= *hi {
                    events.push(p.x);
                }
            }
        }
    }
    events.retain(|x| min_x <= *x && *x <= max_x);
    events.sort();
    events.dedup();

    let mut open: Vec<(Rail, Rail, Rational, Line2, Line2)> = Vec::new();
    let mut out = Vec::new();
    for w in events.windows(2) {
        let (xa, xb) = (&w[0], &w[1]);
        let xm = (xa + xb) / rat(2);
        let mut band: Vec<(usize, Line2, Rational)> = Vec::new();
        for (eid, (a, b)) in edges.iter().enumerate() {
            if a.x == b.x {
                continue;
            }
            let (lo, hi) = if a.x <= b.x { (&a.x, &b.x) } else { (&b.x, &a.x) };
            if *lo <= xm && xm <= *hi {
                let line = line_through(a, b);
                let y = line.eval(&xm);
                band.push((eid, line, y));
            }
        }
        debug_assert_eq!(band.len(), 2);
        band.sort_by(|p, q| p.2.cmp(&q.2));
        let (low_eid, low_line, low_y) = band.remove(0);
        let (high_eid, high_line, high_y) = band.remove(0);
        if low_y >= high_y {
            close_all(&mut open, xa, &mut out);
            continue;
        }

        let mut items: Vec<(Rail, Line2, Rational)> =
            vec![(Rail::Edge(low_eid), low_line, low_y)];
        for (si, line) in sample.iter().enumerate() {
            let y = line.eval(&xm);
            if items[0].2 < y && y < high_y {
                items.push((Rail::Sample(si), line.clone(), y));
            }
        }
        items.sort_by(|p, q| p.2.cmp(&q.2));
        items.push((Rail::Edge(high_eid), high_line, high_y));

        let mut next_open: Vec<(Rail, Rail, Rational, Line2, Line2)> = Vec::new();
        for pair in items.windows(2) {
            let key = (pair[0].0.clone(), pair[1].0.clone());
            let carried = open
                .iter()
                .position(|(lo, hi, _, _, _)| *lo == key.0 && *hi == key.1);
            match carried {
                Some(idx) => next_open.push(open.swap_remove(idx)),
                None => next_open.push((
                    key.0,
                    key.1,
                    xa.clone(),
                    pair[0].1.clone(),
                    pair[1].1.clone(),
                )),
            }
        }
        close_all(&mut open, xa, &mut out);
        open = next_open;
    }
    if let Some(last) = events.last() {
        close_all(&mut open, last, &mut out);
    }
    out
}

fn close_all(
    open: &mut Vec<(Rail, Rail, Rational, Line2, Line2)>,
    xr: &Rational,
    out: &mut Vec<Trapezoid>,
) {
    for (_, _, xl, lower, upper) in open.drain(..) {
        if xl < *xr {
            out.push(Trapezoid {
                xl,
                xr: xr.clone(),
                lower,
                upper,
            });
        }
    }
}

fn line_through(a: &Point2, b: &Point2) -> Line2 {
    debug_assert!(a.x != b.x);
    let m = (&b.y - &a.y) / (&b.x - &a.x);
    let t = &a.y - &m * &a.x;
    Line2::new(m, t)
}
