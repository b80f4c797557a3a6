//! Connected x-monotone polylines, the shape of a k-level of lines.
//!
//! A polyline alternates edges and breakpoints: `edges[i]` names the line
//! carrying the piece between `breakpoints[i-1]` and `breakpoints[i]`, and
//! the first and last edges are unbounded rays. There is always one more
//! edge than breakpoint.

use crate::geom::Point2;
use crate::rat::{rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyline {
    pub edges: Vec<usize>,
    pub breakpoints: Vec<Point2>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PolylineError {
    #[error("polyline has {edges} edges and {breakpoints} breakpoints")]
    Shape { edges: usize, breakpoints: usize },
    #[error("edge {position} names line {line} but only {count} lines exist")]
    UnknownLine {
        position: usize,
        line: usize,
        count: usize,
    },
    #[error("edges {position} and {} lie on the same line", position + 1)]
    RepeatedLine { position: usize },
    #[error("breakpoint {position} does not advance in x")]
    NotMonotone { position: usize },
    #[error("breakpoint {position} is off line {line}")]
    OffLine { position: usize, line: usize },
    #[error("edge {position} sits at level {found}, expected {expected}")]
    WrongLevel {
        position: usize,
        found: usize,
        expected: usize,
    },
}

impl Polyline {
    /// One interior point per edge, strictly between that edge's endpoints.
    pub fn sample_xs(&self) -> Vec<Rational> {
        let n = self.edges.len();
        let mut xs = Vec::with_capacity(n);
        for i in 0..n {
            let x = if self.breakpoints.is_empty() {
                rat(0)
            } else if i == 0 {
                &self.breakpoints[0].x - rat(1)
            } else if i == n - 1 {
                &self.breakpoints[i - 1].x + rat(1)
            } else {
                (&self.breakpoints[i - 1].x + &self.breakpoints[i].x) / rat(2)
            };
            xs.push(x);
        }
        xs
    }
}

/// Full structural and level validation of a claimed k-level.
pub fn check_polyline(
    lines: &[crate::geom::Line2],
    k: usize,
    poly: &Polyline,
) -> Result<(), PolylineError> {
    if poly.edges.is_empty() || poly.edges.len() != poly.breakpoints.len() + 1 {
        return Err(PolylineError::Shape {
            edges: poly.edges.len(),
            breakpoints: poly.breakpoints.len(),
        });
    }
    for (position, &line) in poly.edges.iter().enumerate() {
        if line >= lines.len() {
            return Err(PolylineError::UnknownLine {
                position,
                line,
                count: lines.len(),
            });
        }
    }
    for position in 0..poly.edges.len() - 1 {
        if poly.edges[position] == poly.edges[position + 1] {
            return Err(PolylineError::RepeatedLine { position });
        }
    }
    for position in 1..poly.breakpoints.len() {
        if poly.breakpoints[position - 1].x >= poly.breakpoints[position].x {
            return Err(PolylineError::NotMonotone { position });
        }
    }
    for (position, bp) in poly.breakpoints.iter().enumerate() {
        for &line in [poly.edges[position], poly.edges[position + 1]].iter() {
            if lines[line].eval(&bp.x) != bp.y {
                return Err(PolylineError::OffLine { position, line });
            }
        }
    }
    for (position, x) in poly.sample_xs().into_iter().enumerate() {
        let e = poly.edges[position];
        let y = lines[e].eval(&x);
        let found = lines
            .iter()
            .enumerate()
            .filter(|(j, g)| *j != e && g.eval(&x) < y)
            .count();
        if found != k {
            return Err(PolylineError::WrongLevel {
                position,
                found,
                expected: k,
            });
        }
    }
    Ok(())
}
