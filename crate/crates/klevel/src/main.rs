//! Command-line front end: instance generation, level construction,
//! verification, fault injection, benchmarking and SVG rendering.
//!
//! Exit codes are part of the contract: 0 success or Accept, 1 Reject,
//! 2 nothing to generate, 3 level out of range, 4 malformed or
//! degenerate input.  Given the same flags and seed every command
//! writes the same bytes; bench rows carry wall-clock times, so only
//! their structural columns repeat.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use klevel::formats::{
    load_config, polyline_from_json, polyline_to_json, subdivision_from_json,
    subdivision_to_json, Config, Instance, InstanceData, MutationSidecar,
};
use klevel::geom::{lift_point, Line2, Plane3, Point2};
use klevel::klevel2d::klevel_dc_with_stats;
use klevel::mutate::{mutate, MutationKind};
use klevel::oracle::{
    brute_klevel_2d, brute_klevel_3d, order_k_voronoi, plane_set_in_general_position,
};
use klevel::polyline::{check_polyline, Polyline};
use klevel::rat::{rat, rat_to_f64, ratio, Rational};
use klevel::subdivision::LevelSubdivision;
use klevel::verify::{verify_with, VerifyReport};

const EXIT_REJECT: u8 = 1;
const EXIT_UNSATISFIABLE: u8 = 2;
const EXIT_K_RANGE: u8 = 3;
const EXIT_BAD_INPUT: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

#[derive(Parser)]
#[command(
    name = "klevel",
    version,
    about = "Builds and certifies k-levels of planes in convex position"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tuning-knob JSON; the KLEVEL_CONFIG path is read when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    #[value(name = "points2")]
    Points2,
    #[value(name = "lines2")]
    Lines2,
    #[value(name = "planes3")]
    Planes3,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    #[value(name = "oracle2d")]
    Oracle2d,
    #[value(name = "dc2d")]
    Dc2d,
    #[value(name = "oracle3d")]
    Oracle3d,
    #[value(name = "voronoi")]
    Voronoi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
}

fn mutation_kind(s: &str) -> Result<MutationKind, String> {
    MutationKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = MutationKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown mutation kind {s:?}, expected one of: {}", names.join(", "))
    })
}

#[derive(Subcommand)]
enum Cmd {
    /// Writes a random instance in general position.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Builds a level from an instance file.
    Construct {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks a candidate against its plane set and prints a JSON report.
    Verify {
        #[arg(long)]
        candidate: PathBuf,
        /// Instance file with the plane set; the candidate's embedded
        /// planes are used when absent.
        #[arg(long)]
        planes: Option<PathBuf>,
        /// Level to check; the candidate's own label when absent.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Damages an accepted candidate and records the expected verdict.
    Mutate {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, value_parser = mutation_kind)]
        kind: MutationKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Times construction and verification over a size sweep.
    Bench {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Renders a level or polyline file as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("klevel: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let config = load_config(cli.config.as_deref())
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    match cli.cmd {
        Cmd::Gen { kind, n, out } => cmd_gen(kind, n, cli.seed, &config, &out),
        Cmd::Construct { input, k, algo, out } => {
            cmd_construct(&input, k, algo, &out, cli.seed, &config)
        }
        Cmd::Verify { candidate, planes, k } => {
            cmd_verify(&candidate, planes.as_deref(), k, &config)
        }
        Cmd::Mutate { candidate, kind, out } => {
            cmd_mutate(&candidate, kind, cli.seed, &out)
        }
        Cmd::Bench { suite, sizes, seeds, out } => {
            cmd_bench(suite, &sizes, seeds, cli.seed, &out, &config)
        }
        Cmd::Plot { input, out } => cmd_plot(&input, &out),
    }
}

fn read_file(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("{}: {e}", p.display())))
}

fn write_file(p: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(p, text)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("{}: {e}", p.display())))
}

fn jitter(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-31..=31), 64)
}

fn gen_points(n: usize, retries: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Point2>> {
    let g = 8 * n as i64 + 8;
    for _ in 0..retries.max(1) {
        let pts: Vec<Point2> = (0..n)
            .map(|_| {
                Point2::new(
                    rat(rng.gen_range(-g..=g)) + jitter(rng),
                    rat(rng.gen_range(-g..=g)) + jitter(rng),
                )
            })
            .collect();
        let lifted: Vec<Plane3> = pts.iter().map(lift_point).collect();
        if plane_set_in_general_position(&lifted).is_ok() {
            return Some(pts);
        }
    }
    None
}

/// Distinct slopes and no three lines through one point.
fn lines_general_position(lines: &[Line2]) -> Result<(), String> {
    let mut slopes: BTreeMap<Rational, usize> = BTreeMap::new();
    for (i, l) in lines.iter().enumerate() {
        if let Some(&j) = slopes.get(&l.m) {
            return Err(format!("lines {j} and {i} share a slope"));
        }
        slopes.insert(l.m.clone(), i);
    }
    let mut crossings: BTreeMap<Point2, (usize, usize)> = BTreeMap::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let x = (&lines[j].t - &lines[i].t) / (&lines[i].m - &lines[j].m);
            let p = Point2::new(x.clone(), lines[i].eval(&x));
            if let Some(&(a, b)) = crossings.get(&p) {
                return Err(format!("lines {a}, {b} and {j} pass through one point"));
            }
            crossings.insert(p, (i, j));
        }
    }
    Ok(())
}

fn gen_lines(n: usize, retries: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Line2>> {
    let g = 4 * n as i64 + 4;
    for _ in 0..retries.max(1) {
        let mut base: BTreeSet<i64> = BTreeSet::new();
        while base.len() < n {
            base.insert(rng.gen_range(-g..=g));
        }
        let lines: Vec<Line2> = base
            .into_iter()
            .map(|m| {
                Line2::new(rat(m) + jitter(rng), rat(rng.gen_range(-g..=g)) + jitter(rng))
            })
            .collect();
        if lines_general_position(&lines).is_ok() {
            return Some(lines);
        }
    }
    None
}

fn gen_planes(n: usize, retries: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Plane3>> {
    let g = 4 * n as i64 + 4;
    for _ in 0..retries.max(1) {
        let planes: Vec<Plane3> = (0..n)
            .map(|_| {
                Plane3::new(
                    rat(rng.gen_range(-g..=g)) + jitter(rng),
                    rat(rng.gen_range(-g..=g)) + jitter(rng),
                    rat(rng.gen_range(-2 * g..=2 * g)) + jitter(rng),
                )
            })
            .collect();
        if plane_set_in_general_position(&planes).is_ok() {
            return Some(planes);
        }
    }
    None
}

fn cmd_gen(
    kind: KindArg,
    n: usize,
    seed: u64,
    cfg: &Config,
    out: &Path,
) -> Result<u8, Failure> {
    if n == 0 {
        return Err(fail(EXIT_BAD_INPUT, "n must be at least 1"));
    }
    if n > cfg.hmax {
        return Err(fail(
            EXIT_UNSATISFIABLE,
            format!("n = {n} exceeds the exact-arithmetic allowance Hmax = {}", cfg.hmax),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = match kind {
        KindArg::Points2 => gen_points(n, cfg.retries, &mut rng).map(InstanceData::Points2),
        KindArg::Lines2 => gen_lines(n, cfg.retries, &mut rng).map(InstanceData::Lines2),
        KindArg::Planes3 => gen_planes(n, cfg.retries, &mut rng).map(InstanceData::Planes3),
    };
    let data = data.ok_or_else(|| {
        fail(EXIT_UNSATISFIABLE, "no general-position instance within the retry budget")
    })?;
    write_file(out, &Instance { data, seed: Some(seed) }.to_json())?;
    Ok(0)
}

fn cmd_construct(
    input: &Path,
    k: usize,
    algo: AlgoArg,
    out: &Path,
    seed: u64,
    cfg: &Config,
) -> Result<u8, Failure> {
    let inst = Instance::from_json(&read_file(input)?)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("{}: {e}", input.display())))?;
    match (algo, &inst.data) {
        (AlgoArg::Oracle2d | AlgoArg::Dc2d, InstanceData::Lines2(lines)) => {
            lines_general_position(lines)
                .map_err(|m| fail(EXIT_BAD_INPUT, format!("degenerate input: {m}")))?;
            if k >= lines.len() {
                return Err(fail(
                    EXIT_K_RANGE,
                    format!("k = {k} out of range for {} lines", lines.len()),
                ));
            }
            let poly = match algo {
                AlgoArg::Oracle2d => brute_klevel_2d(lines, k),
                _ => klevel_dc_with_stats(lines, k, &cfg.dc(), seed).0,
            };
            write_file(out, &polyline_to_json(lines, k, &poly))?;
        }
        (AlgoArg::Oracle3d, InstanceData::Planes3(planes)) => {
            construct_3d(planes, k, out)?;
        }
        (AlgoArg::Oracle3d, InstanceData::Points2(points)) => {
            let planes: Vec<Plane3> = points.iter().map(lift_point).collect();
            construct_3d(&planes, k, out)?;
        }
        (AlgoArg::Voronoi, InstanceData::Points2(points)) => {
            if k < 1 || k > points.len() {
                return Err(fail(
                    EXIT_K_RANGE,
                    format!("order {k} out of range for {} sites", points.len()),
                ));
            }
            let sub = order_k_voronoi(points, k)
                .map_err(|d| fail(EXIT_BAD_INPUT, format!("degenerate input: {d}")))?;
            write_file(out, &subdivision_to_json(&sub))?;
        }
        _ => {
            return Err(fail(
                EXIT_BAD_INPUT,
                format!("a {} instance does not feed that algorithm", inst.data.kind()),
            ));
        }
    }
    Ok(0)
}

fn construct_3d(planes: &[Plane3], k: usize, out: &Path) -> Result<(), Failure> {
    plane_set_in_general_position(planes)
        .map_err(|d| fail(EXIT_BAD_INPUT, format!("degenerate input: {d}")))?;
    if k >= planes.len() {
        return Err(fail(
            EXIT_K_RANGE,
            format!("k = {k} out of range for {} planes", planes.len()),
        ));
    }
    let sub = brute_klevel_3d(planes, k)
        .map_err(|d| fail(EXIT_BAD_INPUT, format!("degenerate input: {d}")))?;
    write_file(out, &subdivision_to_json(&sub))
}

fn report_json(r: &VerifyReport, timing_ms: f64) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "accepted": r.accepted,
        "reason": r.reason.map(|x| x.code()),
        "locus": r.locus,
        "expected": r.expected,
        "found": r.found,
        "stats": {
            "triangles": r.stats.triangles,
            "regions": r.stats.regions,
            "leaves": r.stats.leaves,
            "walked_edges": r.stats.walked_edges,
            "max_depth": r.stats.max_depth,
        },
        "timing_ms": timing_ms,
    }))
    .expect("serializable report")
}

fn cmd_verify(
    candidate: &Path,
    planes_file: Option<&Path>,
    k_arg: Option<usize>,
    cfg: &Config,
) -> Result<u8, Failure> {
    let cand = subdivision_from_json(&read_file(candidate)?)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("{}: {e}", candidate.display())))?;
    let planes: Vec<Plane3> = match planes_file {
        None => cand.planes.clone(),
        Some(p) => {
            let inst = Instance::from_json(&read_file(p)?)
                .map_err(|e| fail(EXIT_BAD_INPUT, format!("{}: {e}", p.display())))?;
            match inst.data {
                InstanceData::Planes3(h) => h,
                InstanceData::Points2(pts) => pts.iter().map(lift_point).collect(),
                InstanceData::Lines2(_) => {
                    return Err(fail(EXIT_BAD_INPUT, "a line instance carries no plane set"));
                }
            }
        }
    };
    let k = k_arg.unwrap_or(cand.k);
    let start = Instant::now();
    let report = verify_with(&planes, k, &cand, cfg.b1)
        .map_err(|f| fail(EXIT_BAD_INPUT, f.to_string()))?;
    let timing_ms = start.elapsed().as_secs_f64() * 1e3;
    println!("{}", report_json(&report, timing_ms));
    Ok(if report.accepted { 0 } else { EXIT_REJECT })
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("sidecar.json")
}

fn cmd_mutate(
    candidate: &Path,
    kind: MutationKind,
    seed: u64,
    out: &Path,
) -> Result<u8, Failure> {
    let cand = subdivision_from_json(&read_file(candidate)?)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("{}: {e}", candidate.display())))?;
    let planes = cand.planes.clone();
    let m = mutate(&planes, &cand, kind, seed)
        .map_err(|f| fail(EXIT_UNSATISFIABLE, f.to_string()))?;
    write_file(out, &subdivision_to_json(&m.candidate))?;
    let side = MutationSidecar {
        kind: kind.name().to_string(),
        seed,
        k: m.k,
        planes_changed: m.planes != planes,
        locus: m.locus,
        expected: kind.expected_reasons().iter().map(|r| r.code().to_string()).collect(),
    };
    write_file(&sidecar_path(out), &side.to_json())?;
    Ok(0)
}

fn bench_levels(n: usize) -> Vec<usize> {
    let mut ks = vec![1, n / 4, n / 2];
    ks.retain(|&k| k >= 1 && k < n);
    ks.dedup();
    ks
}

fn cmd_bench(
    suite: SuiteArg,
    sizes: &[usize],
    seeds: u64,
    seed0: u64,
    out: &Path,
    cfg: &Config,
) -> Result<u8, Failure> {
    let mut csv = String::from("n,k,size,construct_ms,verify_ms\n");
    let mut rows: Vec<(usize, usize, usize)> = Vec::new();
    for &n in sizes {
        if n < 2 {
            eprintln!("klevel: skipping n = {n}, too small to bench");
            continue;
        }
        if n > cfg.hmax {
            eprintln!("klevel: skipping n = {n}, beyond Hmax = {}", cfg.hmax);
            continue;
        }
        for s in 0..seeds {
            let seed = seed0 ^ ((n as u64) << 32) ^ s;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match suite {
                SuiteArg::TwoD => {
                    let lines = gen_lines(n, cfg.retries, &mut rng).ok_or_else(|| {
                        fail(EXIT_UNSATISFIABLE, format!("no instance at n = {n}"))
                    })?;
                    for k in bench_levels(n) {
                        let t0 = Instant::now();
                        let poly = klevel_dc_with_stats(&lines, k, &cfg.dc(), seed).0;
                        let construct_ms = t0.elapsed().as_secs_f64() * 1e3;
                        let t1 = Instant::now();
                        check_polyline(&lines, k, &poly).map_err(|e| {
                            fail(EXIT_REJECT, format!("bench build failed its check: {e}"))
                        })?;
                        let verify_ms = t1.elapsed().as_secs_f64() * 1e3;
                        let size = poly.edges.len();
                        csv.push_str(&format!(
                            "{n},{k},{size},{construct_ms:.3},{verify_ms:.3}\n"
                        ));
                        rows.push((n, k, size));
                    }
                }
                SuiteArg::ThreeD => {
                    let points = gen_points(n, cfg.retries, &mut rng).ok_or_else(|| {
                        fail(EXIT_UNSATISFIABLE, format!("no instance at n = {n}"))
                    })?;
                    let planes: Vec<Plane3> = points.iter().map(lift_point).collect();
                    for k in bench_levels(n) {
                        let t0 = Instant::now();
                        let sub = brute_klevel_3d(&planes, k).map_err(|d| {
                            fail(EXIT_BAD_INPUT, format!("degenerate input: {d}"))
                        })?;
                        let construct_ms = t0.elapsed().as_secs_f64() * 1e3;
                        let t1 = Instant::now();
                        let report = verify_with(&planes, k, &sub, cfg.b1)
                            .map_err(|f| fail(EXIT_BAD_INPUT, f.to_string()))?;
                        let verify_ms = t1.elapsed().as_secs_f64() * 1e3;
                        if !report.accepted {
                            return Err(fail(
                                EXIT_REJECT,
                                format!("bench build rejected: {report:?}"),
                            ));
                        }
                        let size =
                            sub.vertices.len() + sub.half_edges.len() / 2 + sub.faces.len();
                        csv.push_str(&format!(
                            "{n},{k},{size},{construct_ms:.3},{verify_ms:.3}\n"
                        ));
                        rows.push((n, k, size));
                    }
                }
            }
        }
    }
    write_file(out, &csv)?;
    if rows.is_empty() {
        println!("no rows");
        return Ok(0);
    }
    let per_nk: Vec<f64> =
        rows.iter().map(|&(n, k, s)| s as f64 / (n as f64 * (k + 1) as f64)).collect();
    let mean = per_nk.iter().sum::<f64>() / per_nk.len() as f64;
    let max = per_nk.iter().cloned().fold(0.0f64, f64::max);
    println!("rows {}", rows.len());
    println!("fit size <= C * n * (k + 1): C_max {max:.3} C_mean {mean:.3}");
    if suite == SuiteArg::TwoD {
        let per43: Vec<f64> =
            rows.iter().map(|&(n, _, s)| s as f64 / (n as f64).powf(4.0 / 3.0)).collect();
        let max43 = per43.iter().cloned().fold(0.0f64, f64::max);
        println!("fit size <= C * n^(4/3): C_max {max43:.3}");
    }
    Ok(0)
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.3}")
}

struct SvgCanvas {
    min_x: f64,
    min_y: f64,
    scale: f64,
    size: f64,
}

impl SvgCanvas {
    fn fit(xs: &[f64], ys: &[f64]) -> SvgCanvas {
        let (mut lo_x, mut hi_x) = (f64::MAX, f64::MIN);
        let (mut lo_y, mut hi_y) = (f64::MAX, f64::MIN);
        for &x in xs {
            lo_x = lo_x.min(x);
            hi_x = hi_x.max(x);
        }
        for &y in ys {
            lo_y = lo_y.min(y);
            hi_y = hi_y.max(y);
        }
        let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-9);
        let margin = span * 0.05;
        SvgCanvas {
            min_x: lo_x - margin,
            min_y: lo_y - margin,
            scale: 800.0 / (span + 2.0 * margin),
            size: 800.0,
        }
    }

    fn x(&self, v: f64) -> f64 {
        (v - self.min_x) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        self.size - (v - self.min_y) * self.scale
    }
}

fn svg_open(out: &mut String) {
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\" \
         width=\"800\" height=\"800\">\n",
    );
    out.push_str("<rect width=\"800\" height=\"800\" fill=\"white\"/>\n");
}

fn svg_edge(out: &mut String, c: &SvgCanvas, a: (f64, f64), b: (f64, f64), dashed: bool) {
    let style = if dashed {
        " stroke=\"#888888\" stroke-dasharray=\"6 4\""
    } else {
        " stroke=\"#000000\""
    };
    out.push_str(&format!(
        "<path d=\"M {} {} L {} {}\" fill=\"none\" stroke-width=\"1.5\"{style}/>\n",
        fmt_coord(c.x(a.0)),
        fmt_coord(c.y(a.1)),
        fmt_coord(c.x(b.0)),
        fmt_coord(c.y(b.1)),
    ));
}

fn svg_dot(out: &mut String, c: &SvgCanvas, p: (f64, f64), hollow: bool) {
    let style = if hollow {
        "fill=\"white\" stroke=\"#888888\""
    } else {
        "fill=\"#000000\" stroke=\"none\""
    };
    out.push_str(&format!(
        "<circle cx=\"{}\" cy=\"{}\" r=\"3\" {style}/>\n",
        fmt_coord(c.x(p.0)),
        fmt_coord(c.y(p.1)),
    ));
}

fn render_subdivision_svg(sub: &LevelSubdivision) -> String {
    let pts: Vec<(f64, f64)> = sub
        .vertices
        .iter()
        .map(|v| (rat_to_f64(&v.point.x), rat_to_f64(&v.point.y)))
        .collect();
    let w = rat_to_f64(&sub.half_width);
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    xs.extend([-w, w]);
    ys.extend([-w, w]);
    let canvas = SvgCanvas::fit(&xs, &ys);
    let mut out = String::new();
    svg_open(&mut out);
    for (e, he) in sub.half_edges.iter().enumerate() {
        if e < he.twin {
            let a = pts[he.origin];
            let b = pts[sub.half_edges[he.twin].origin];
            svg_edge(&mut out, &canvas, a, b, he.synthetic);
        }
    }
    for (v, p) in pts.iter().enumerate() {
        svg_dot(&mut out, &canvas, *p, sub.vertices[v].synthetic);
    }
    out.push_str("</svg>\n");
    out
}

fn render_polyline_svg(lines: &[Line2], poly: &Polyline) -> String {
    let mut pts: Vec<(Rational, Rational)> = Vec::new();
    if poly.breakpoints.is_empty() {
        let line = &lines[poly.edges[0]];
        for x in [rat(-4), rat(4)] {
            let y = line.eval(&x);
            pts.push((x, y));
        }
    } else {
        let span = &poly.breakpoints.last().unwrap().x - &poly.breakpoints[0].x;
        let reach = span / rat(4) + rat(1);
        let x0 = &poly.breakpoints[0].x - &reach;
        let x1 = poly.breakpoints.last().unwrap().x.clone() + &reach;
        pts.push((x0.clone(), lines[poly.edges[0]].eval(&x0)));
        for b in &poly.breakpoints {
            pts.push((b.x.clone(), b.y.clone()));
        }
        pts.push((x1.clone(), lines[*poly.edges.last().unwrap()].eval(&x1)));
    }
    let screen: Vec<(f64, f64)> =
        pts.iter().map(|(x, y)| (rat_to_f64(x), rat_to_f64(y))).collect();
    let xs: Vec<f64> = screen.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = screen.iter().map(|p| p.1).collect();
    let canvas = SvgCanvas::fit(&xs, &ys);
    let mut out = String::new();
    svg_open(&mut out);
    for pair in screen.windows(2) {
        svg_edge(&mut out, &canvas, pair[0], pair[1], false);
    }
    for p in &screen[1..screen.len().saturating_sub(1)] {
        svg_dot(&mut out, &canvas, *p, false);
    }
    out.push_str("</svg>\n");
    out
}

fn cmd_plot(input: &Path, out: &Path) -> Result<u8, Failure> {
    let text = read_file(input)?;
    let svg = match subdivision_from_json(&text) {
        Ok(sub) => render_subdivision_svg(&sub),
        Err(sub_err) => match polyline_from_json(&text) {
            Ok((lines, _k, poly)) => {
                if poly.edges.is_empty()
                    || poly.edges.len() != poly.breakpoints.len() + 1
                    || poly.edges.iter().any(|&e| e >= lines.len())
                {
                    return Err(fail(
                        EXIT_BAD_INPUT,
                        format!("{}: polyline shape is inconsistent", input.display()),
                    ));
                }
                render_polyline_svg(&lines, &poly)
            }
            Err(poly_err) => {
                return Err(fail(
                    EXIT_BAD_INPUT,
                    format!(
                        "{}: not a subdivision ({sub_err}) nor a polyline ({poly_err})",
                        input.display()
                    ),
                ));
            }
        },
    };
    write_file(out, &svg)?;
    Ok(0)
}
