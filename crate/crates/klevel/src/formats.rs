//! JSON shapes for instances, level structures, polylines, mutation
//! records and the tuning-knob file.
//!
//! Every coordinate travels as a string: exact "p/q" on output, with
//! plain integers and decimal literals also accepted on input.  Loading
//! names the offending record when something does not parse.  Structural
//! soundness of a loaded subdivision is deliberately not enforced here;
//! that is the verifier's job, and files with broken pointers must load
//! so it can convict them.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cutting::CuttingConfig;
use crate::geom::{Line2, Plane3, Point2, Point3};
use crate::klevel2d::DcConfig;
use crate::polyline::Polyline;
use crate::rat::{format_rational, parse_rational, Rational};
use crate::subdivision::{Face, HalfEdge, LevelSubdivision, Vertex};

/// A file did not parse or refers to records that do not line up.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{locus}: {what}")]
pub struct FormatError {
    pub what: String,
    pub locus: String,
}

fn bad(what: impl Into<String>, locus: impl Into<String>) -> FormatError {
    FormatError { what: what.into(), locus: locus.into() }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn from_json<T: DeserializeOwned>(s: &str) -> Result<T, FormatError> {
    serde_json::from_str(s).map_err(|e| bad(e.to_string(), "json"))
}

fn prat(s: &str, locus: impl Fn() -> String) -> Result<Rational, FormatError> {
    parse_rational(s).map_err(|e| bad(format!("bad rational {:?}", e.0), locus()))
}

/// The three instance kinds the generator and constructors understand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceData {
    Points2(Vec<Point2>),
    Lines2(Vec<Line2>),
    Planes3(Vec<Plane3>),
}

impl InstanceData {
    pub fn kind(&self) -> &'static str {
        match self {
            InstanceData::Points2(_) => "points2",
            InstanceData::Lines2(_) => "lines2",
            InstanceData::Planes3(_) => "planes3",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            InstanceData::Points2(v) => v.len(),
            InstanceData::Lines2(v) => v.len(),
            InstanceData::Planes3(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// On-disk problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub data: InstanceData,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    kind: String,
    data: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl Instance {
    pub fn to_json(&self) -> String {
        let data: Vec<Vec<String>> = match &self.data {
            InstanceData::Points2(v) => v
                .iter()
                .map(|p| vec![format_rational(&p.x), format_rational(&p.y)])
                .collect(),
            InstanceData::Lines2(v) => v
                .iter()
                .map(|l| vec![format_rational(&l.m), format_rational(&l.t)])
                .collect(),
            InstanceData::Planes3(v) => v
                .iter()
                .map(|h| {
                    vec![format_rational(&h.a), format_rational(&h.b), format_rational(&h.c)]
                })
                .collect(),
        };
        to_json(&RawInstance {
            kind: self.data.kind().to_string(),
            data,
            seed: self.seed,
        })
    }

    pub fn from_json(s: &str) -> Result<Instance, FormatError> {
        let raw: RawInstance = from_json(s)?;
        let width = match raw.kind.as_str() {
            "points2" | "lines2" => 2,
            "planes3" => 3,
            other => return Err(bad(format!("unknown kind {other:?}"), "kind")),
        };
        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(raw.data.len());
        for (i, row) in raw.data.iter().enumerate() {
            if row.len() != width {
                return Err(bad(
                    format!("{} entries where {} rows need {width}", row.len(), raw.kind),
                    format!("data[{i}]"),
                ));
            }
            let mut parsed = Vec::with_capacity(width);
            for (j, cell) in row.iter().enumerate() {
                parsed.push(prat(cell, || format!("data[{i}][{j}]"))?);
            }
            rows.push(parsed);
        }
        let data = match raw.kind.as_str() {
            "points2" => InstanceData::Points2(
                rows.into_iter().map(|mut r| Point2::new(r.remove(0), r.remove(0))).collect(),
            ),
            "lines2" => InstanceData::Lines2(
                rows.into_iter().map(|mut r| Line2::new(r.remove(0), r.remove(0))).collect(),
            ),
            _ => InstanceData::Planes3(
                rows.into_iter()
                    .map(|mut r| Plane3::new(r.remove(0), r.remove(0), r.remove(0)))
                    .collect(),
            ),
        };
        Ok(Instance { data, seed: raw.seed })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBbox {
    half_width: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    id: usize,
    x: String,
    y: String,
    z: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    triple: Option<[usize; 3]>,
    synthetic: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHalfEdge {
    origin: usize,
    twin: usize,
    next: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    plane: Option<usize>,
    face: usize,
    synthetic: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFace {
    id: usize,
    edge: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    plane: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubdivision {
    planes: Vec<Vec<String>>,
    k: usize,
    bbox: RawBbox,
    vertices: Vec<RawVertex>,
    half_edges: Vec<RawHalfEdge>,
    faces: Vec<RawFace>,
    outer_face: usize,
}

pub fn subdivision_to_json(sub: &LevelSubdivision) -> String {
    let raw = RawSubdivision {
        planes: sub
            .planes
            .iter()
            .map(|h| {
                vec![format_rational(&h.a), format_rational(&h.b), format_rational(&h.c)]
            })
            .collect(),
        k: sub.k,
        bbox: RawBbox { half_width: format_rational(&sub.half_width) },
        vertices: sub
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| RawVertex {
                id,
                x: format_rational(&v.point.x),
                y: format_rational(&v.point.y),
                z: format_rational(&v.point.z),
                triple: v.triple,
                synthetic: v.synthetic,
            })
            .collect(),
        half_edges: sub
            .half_edges
            .iter()
            .map(|e| RawHalfEdge {
                origin: e.origin,
                twin: e.twin,
                next: e.next,
                plane: e.plane,
                face: e.face,
                synthetic: e.synthetic,
            })
            .collect(),
        faces: sub
            .faces
            .iter()
            .enumerate()
            .map(|(id, f)| RawFace { id, edge: f.edge, plane: f.plane })
            .collect(),
        outer_face: sub.outer_face,
    };
    to_json(&raw)
}

pub fn subdivision_from_json(s: &str) -> Result<LevelSubdivision, FormatError> {
    let raw: RawSubdivision = from_json(s)?;
    let mut planes = Vec::with_capacity(raw.planes.len());
    for (i, row) in raw.planes.iter().enumerate() {
        if row.len() != 3 {
            return Err(bad(
                format!("{} entries where a plane needs 3", row.len()),
                format!("planes[{i}]"),
            ));
        }
        planes.push(Plane3::new(
            prat(&row[0], || format!("planes[{i}][0]"))?,
            prat(&row[1], || format!("planes[{i}][1]"))?,
            prat(&row[2], || format!("planes[{i}][2]"))?,
        ));
    }
    let half_width = prat(&raw.bbox.half_width, || "bbox.half_width".to_string())?;
    let mut vertices = Vec::with_capacity(raw.vertices.len());
    for (i, v) in raw.vertices.iter().enumerate() {
        if v.id != i {
            return Err(bad(
                format!("id {} does not match its position", v.id),
                format!("vertices[{i}]"),
            ));
        }
        vertices.push(Vertex {
            point: Point3 {
                x: prat(&v.x, || format!("vertices[{i}].x"))?,
                y: prat(&v.y, || format!("vertices[{i}].y"))?,
                z: prat(&v.z, || format!("vertices[{i}].z"))?,
            },
            triple: v.triple,
            synthetic: v.synthetic,
        });
    }
    let half_edges = raw
        .half_edges
        .iter()
        .map(|e| HalfEdge {
            origin: e.origin,
            twin: e.twin,
            next: e.next,
            plane: e.plane,
            face: e.face,
            synthetic: e.synthetic,
        })
        .collect();
    let mut faces = Vec::with_capacity(raw.faces.len());
    for (i, f) in raw.faces.iter().enumerate() {
        if f.id != i {
            return Err(bad(
                format!("id {} does not match its position", f.id),
                format!("faces[{i}]"),
            ));
        }
        faces.push(Face { edge: f.edge, plane: f.plane });
    }
    Ok(LevelSubdivision {
        planes,
        k: raw.k,
        half_width,
        vertices,
        half_edges,
        faces,
        outer_face: raw.outer_face,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolyline {
    k: usize,
    lines: Vec<Vec<String>>,
    edges: Vec<usize>,
    breakpoints: Vec<Vec<String>>,
}

pub fn polyline_to_json(lines: &[Line2], k: usize, line: &Polyline) -> String {
    to_json(&RawPolyline {
        k,
        lines: lines
            .iter()
            .map(|l| vec![format_rational(&l.m), format_rational(&l.t)])
            .collect(),
        edges: line.edges.clone(),
        breakpoints: line
            .breakpoints
            .iter()
            .map(|p| vec![format_rational(&p.x), format_rational(&p.y)])
            .collect(),
    })
}

pub fn polyline_from_json(s: &str) -> Result<(Vec<Line2>, usize, Polyline), FormatError> {
    let raw: RawPolyline = from_json(s)?;
    let mut lines = Vec::with_capacity(raw.lines.len());
    for (i, row) in raw.lines.iter().enumerate() {
        if row.len() != 2 {
            return Err(bad(
                format!("{} entries where a line needs 2", row.len()),
                format!("lines[{i}]"),
            ));
        }
        lines.push(Line2::new(
            prat(&row[0], || format!("lines[{i}][0]"))?,
            prat(&row[1], || format!("lines[{i}][1]"))?,
        ));
    }
    let mut breakpoints = Vec::with_capacity(raw.breakpoints.len());
    for (i, row) in raw.breakpoints.iter().enumerate() {
        if row.len() != 2 {
            return Err(bad(
                format!("{} entries where a breakpoint needs 2", row.len()),
                format!("breakpoints[{i}]"),
            ));
        }
        breakpoints.push(Point2::new(
            prat(&row[0], || format!("breakpoints[{i}][0]"))?,
            prat(&row[1], || format!("breakpoints[{i}][1]"))?,
        ));
    }
    Ok((lines, raw.k, Polyline { edges: raw.edges, breakpoints }))
}

/// Record written next to a mutated candidate: what was damaged and which
/// rejection codes a verifier run may legitimately report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationSidecar {
    pub kind: String,
    pub seed: u64,
    /// Level to request when verifying the mutant.
    pub k: usize,
    /// True when the damage moved an input plane, so the mutant must be
    /// verified against the plane list embedded in its own file.
    pub planes_changed: bool,
    pub locus: String,
    pub expected: Vec<String>,
}

impl MutationSidecar {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(s: &str) -> Result<MutationSidecar, FormatError> {
        from_json(s)
    }
}

/// Tuning knobs, overridable by `--config` or the `KLEVEL_CONFIG` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Inverse conflict fraction of the cutting step.
    pub r: usize,
    /// Tile count allowance of the cutting step.
    #[serde(rename = "C_cut")]
    pub c_cut: usize,
    /// Sample size multiplier of the cutting step.
    pub c0: f64,
    /// Largest 2D subproblem handed straight to the slab oracle.
    #[serde(rename = "B0")]
    pub b0: usize,
    /// Largest verification region that is checked directly.
    #[serde(rename = "B1")]
    pub b1: usize,
    /// Recursion depth allowance of the 2D divide and conquer.
    pub rho: usize,
    /// Largest instance the exact oracles are asked to handle.
    #[serde(rename = "Hmax")]
    pub hmax: usize,
    /// Retries for rejection-sampled steps: cuttings and generated instances.
    pub retries: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            r: 4,
            c_cut: 96,
            c0: 3.0,
            b0: 24,
            b1: 24,
            rho: 8,
            hmax: 512,
            retries: 20,
        }
    }
}

impl Config {
    pub fn cutting(&self) -> CuttingConfig {
        CuttingConfig {
            r: self.r,
            sample_factor: self.c0,
            cell_constant: self.c_cut,
            max_attempts: self.retries,
        }
    }

    pub fn dc(&self) -> DcConfig {
        DcConfig {
            cutting: self.cutting(),
            base_size: self.b0,
            max_depth: self.rho,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(s: &str) -> Result<Config, FormatError> {
        from_json(s)
    }
}

/// Resolves the effective config: an explicit path wins, then the
/// `KLEVEL_CONFIG` environment variable, then built-in defaults.
pub fn load_config(explicit: Option<&std::path::Path>) -> Result<Config, FormatError> {
    let path = match explicit {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os("KLEVEL_CONFIG").map(std::path::PathBuf::from),
    };
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| bad(e.to_string(), p.display().to_string()))?;
            Config::from_json(&text)
                .map_err(|e| bad(e.what, format!("{}: {}", p.display(), e.locus)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::lift_point;
    use crate::oracle::{
        brute_klevel_3d, brute_klevel_2d, plane_set_in_general_position,
    };
    use crate::rat::{rat, ratio};

    #[test]
    fn instances_round_trip() {
        let cases = [
            InstanceData::Points2(vec![
                Point2::new(rat(3), ratio(-1, 2)),
                Point2::new(ratio(22, 7), rat(0)),
            ]),
            InstanceData::Lines2(vec![Line2::new(rat(1), rat(-4))]),
            InstanceData::Planes3(vec![Plane3::new(rat(2), rat(5), ratio(9, 4))]),
        ];
        for data in cases {
            let inst = Instance { data, seed: Some(11) };
            let json = inst.to_json();
            let back = Instance::from_json(&json).unwrap();
            assert_eq!(back, inst);
            assert_eq!(back.to_json(), json);
        }
    }

    #[test]
    fn decimals_parse_exactly() {
        let inst = Instance::from_json(
            r#"{"kind": "points2", "data": [["1.25", "-0.5"]]}"#,
        )
        .unwrap();
        let InstanceData::Points2(pts) = &inst.data else { panic!() };
        assert_eq!(pts[0], Point2::new(ratio(5, 4), ratio(-1, 2)));
        assert_eq!(inst.seed, None);
    }

    #[test]
    fn malformed_instances_name_the_cell() {
        let err = Instance::from_json(
            r#"{"kind": "lines2", "data": [["1", "2"], ["3", "x"]]}"#,
        )
        .unwrap_err();
        assert_eq!(err.locus, "data[1][1]");
        let err =
            Instance::from_json(r#"{"kind": "planes3", "data": [["1", "2"]]}"#).unwrap_err();
        assert_eq!(err.locus, "data[0]");
        let err = Instance::from_json(r#"{"kind": "circles", "data": []}"#).unwrap_err();
        assert_eq!(err.locus, "kind");
    }

    #[test]
    fn subdivisions_round_trip_by_the_byte() {
        let planes: Vec<Plane3> = [(0, 0), (7, 1), (3, 8), (-5, 4)]
            .iter()
            .map(|&(x, y)| lift_point(&Point2::new(rat(x), rat(y))))
            .collect();
        plane_set_in_general_position(&planes).unwrap();
        let sub = brute_klevel_3d(&planes, 1).unwrap();
        let json = subdivision_to_json(&sub);
        let back = subdivision_from_json(&json).unwrap();
        assert_eq!(back.canonical_form(), sub.canonical_form());
        assert_eq!(subdivision_to_json(&back), json);
    }

    #[test]
    fn a_shuffled_id_is_a_parse_error() {
        let planes: Vec<Plane3> = [(0, 0), (7, 1), (3, 8)]
            .iter()
            .map(|&(x, y)| lift_point(&Point2::new(rat(x), rat(y))))
            .collect();
        let sub = brute_klevel_3d(&planes, 0).unwrap();
        let json = subdivision_to_json(&sub).replace("\"id\": 0", "\"id\": 9");
        let err = subdivision_from_json(&json).unwrap_err();
        assert!(err.locus.ends_with("[0]"), "{err}");
    }

    #[test]
    fn polylines_round_trip() {
        let lines = vec![
            Line2::new(rat(1), rat(0)),
            Line2::new(rat(-1), rat(2)),
            Line2::new(rat(0), rat(-3)),
        ];
        let level = brute_klevel_2d(&lines, 1);
        let json = polyline_to_json(&lines, 1, &level);
        let (lines2, k, back) = polyline_from_json(&json).unwrap();
        assert_eq!(k, 1);
        assert_eq!(lines2, lines);
        assert_eq!(back, level);
        assert_eq!(polyline_to_json(&lines2, k, &back), json);
    }

    #[test]
    fn sidecars_round_trip() {
        let side = MutationSidecar {
            kind: "level-shift".to_string(),
            seed: 9,
            k: 3,
            planes_changed: false,
            locus: "level 2 relabeled 3".to_string(),
            expected: vec!["StartLevelMismatch".to_string()],
        };
        assert_eq!(MutationSidecar::from_json(&side.to_json()).unwrap(), side);
    }

    #[test]
    fn the_config_defaults_hold_and_partial_files_override() {
        let d = Config::default();
        assert_eq!((d.r, d.c_cut, d.b0, d.b1), (4, 96, 24, 24));
        let c = Config::from_json(r#"{"r": 6, "B1": 30}"#).unwrap();
        assert_eq!(c.r, 6);
        assert_eq!(c.b1, 30);
        assert_eq!(c.c_cut, d.c_cut);
        assert!(Config::from_json(r#"{"unknown_knob": 1}"#).is_err());
        let cut = c.cutting();
        assert_eq!(cut.r, 6);
        assert_eq!(cut.cell_constant, 96);
    }
}
