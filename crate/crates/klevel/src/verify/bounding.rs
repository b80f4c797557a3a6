//! Steep bounding planes that wall off the clip box.
//!
//! Three families of parallel planes, one per direction of a rational
//! 120-degree fan, dive away from the box so steeply that far from the
//! origin the level surface runs along wall copies instead of input
//! planes, while over the closed box every wall stays strictly above
//! every input.  Walls are evaluated in closed form where counting is
//! needed, so they never enter per-plane scans.

use num_traits::Signed;

use crate::geom::{Plane3, Point2, Point3};
use crate::oracle::ArrangementVertex;
use crate::rat::{rat, ratio, Rational};

/// The three families of bounding planes around one instance.
#[derive(Debug, Clone)]
pub struct WallSet {
    /// Unit directions of the families.
    pub dirs: [(Rational, Rational); 3],
    /// Common slope magnitude.
    pub m: Rational,
    /// Base offset of copy zero.
    pub d: Rational,
    /// Offset step between consecutive copies.
    pub delta: Rational,
    /// Copies per family.
    pub copies: usize,
    /// All walls, family-major: index `j * copies + i`.
    pub planes: Vec<Plane3>,
}

fn wall_plane(dir: &(Rational, Rational), m: &Rational, offset: &Rational) -> Plane3 {
    Plane3 {
        a: -(m * &dir.0),
        b: -(m * &dir.1),
        c: m * offset,
    }
}

fn forms_share_line(f: &crate::geom::LinForm, g: &crate::geom::LinForm) -> bool {
    &f.a * &g.b == &g.a * &f.b
        && &f.a * &g.c == &g.a * &f.c
        && &f.b * &g.c == &g.b * &f.c
}

fn triple_shares_line(a: &Plane3, b: &Plane3, c: &Plane3) -> bool {
    let fab = crate::geom::LinForm::plane_difference(a, b);
    let fac = crate::geom::LinForm::plane_difference(a, c);
    let degenerate = |f: &crate::geom::LinForm| f.a == rat(0) && f.b == rat(0);
    if degenerate(&fab) || degenerate(&fac) {
        return false;
    }
    forms_share_line(&fab, &fac)
}

/// Builds the wall set for `inputs` around the box of half-width `w`.
///
/// The slope grows until copy zero of every family clears every input at
/// all four box corners; the offset step then shifts until no wall shares
/// a line with any pair drawn from walls and inputs.
pub fn make_bounding_planes(
    inputs: &[Plane3],
    w: &Rational,
    vertices: &[ArrangementVertex],
) -> WallSet {
    let n = inputs.len().max(1);
    let dirs: [(Rational, Rational); 3] = [
        (rat(1), rat(0)),
        (ratio(-3, 5), ratio(4, 5)),
        (ratio(-3, 5), ratio(-4, 5)),
    ];
    let d = rat(4) * (w + rat(1));
    let mut delta = (w + rat(1)) / rat(8 * n as i64);

    let mut lo = Point3 { x: rat(0), y: rat(0), z: rat(0) };
    let mut hi = lo.clone();
    for v in vertices {
        for (axis, (l, h)) in [
            (&v.point.x, (&mut lo.x, &mut hi.x)),
            (&v.point.y, (&mut lo.y, &mut hi.y)),
            (&v.point.z, (&mut lo.z, &mut hi.z)),
        ] {
            if *axis < *l {
                *l = axis.clone();
            }
            if *axis > *h {
                *h = axis.clone();
            }
        }
    }
    let width = {
        let wx = &hi.x - &lo.x;
        let wy = &hi.y - &lo.y;
        if wx >= wy {
            wx
        } else {
            wy
        }
    };
    let height = &hi.z - &lo.z;
    let mut m = rat(64) * (width + height + rat(1));

    let steepest = inputs
        .iter()
        .map(|g| g.a.abs() + g.b.abs())
        .max()
        .unwrap_or_else(|| rat(0));
    while m <= rat(8) * &steepest {
        m = m * rat(4);
    }

    let corners = crate::cells::square_clip(w);
    'slope: loop {
        for dir in &dirs {
            let wall = wall_plane(dir, &m, &d);
            for g in inputs {
                for c in &corners {
                    if wall.eval_at(c) <= g.eval_at(c) {
                        m = m * rat(4);
                        continue 'slope;
                    }
                }
            }
        }
        break;
    }

    let mut attempts = 0;
    'offsets: loop {
        attempts += 1;
        assert!(attempts <= 200, "wall offsets never became generic");
        // Family bases are staggered by thirds of the copy step so that no
        // cross-family tie line keeps a step-independent offset.
        let planes: Vec<Plane3> = dirs
            .iter()
            .enumerate()
            .flat_map(|(j, dir)| {
                let d = &d;
                let m = &m;
                let delta = &delta;
                (0..n).map(move |i| {
                    let offset = d + ratio(j as i64, 3) * delta + rat(i as i64) * delta;
                    wall_plane(dir, m, &offset)
                })
            })
            .collect();

        for j1 in 0..3 {
            for j2 in j1 + 1..3 {
                for i1 in 0..n {
                    for i2 in 0..n {
                        let a = &planes[j1 * n + i1];
                        let b = &planes[j2 * n + i2];
                        for g in inputs {
                            if triple_shares_line(a, b, g) {
                                delta = delta * ratio(98, 97);
                                continue 'offsets;
                            }
                        }
                    }
                }
            }
        }
        for gi in 0..inputs.len() {
            for gj in gi + 1..inputs.len() {
                for wall in &planes {
                    if triple_shares_line(&inputs[gi], &inputs[gj], wall) {
                        delta = delta * ratio(98, 97);
                        continue 'offsets;
                    }
                }
            }
        }

        return WallSet { dirs, m, d, delta, copies: n, planes };
    }
}

impl WallSet {
    /// Base offset of family `j`, staggered by thirds of the copy step.
    pub fn family_base(&self, family: usize) -> Rational {
        &self.d + ratio(family as i64, 3) * &self.delta
    }

    /// Value of the wall `(family, copy)` above a projected point.
    pub fn value(&self, family: usize, copy: usize, p: &Point2) -> Rational {
        self.planes[family * self.copies + copy].eval_at(p)
    }

    /// Copy position of family `j` at `q`: the wall through `q` has this
    /// copy index when the position is a whole number.
    fn copy_position(&self, family: usize, q: &Point3) -> Rational {
        let dir = &self.dirs[family];
        let s = &dir.0 * &q.x + &dir.1 * &q.y;
        (&q.z / &self.m - self.family_base(family) + s) / &self.delta
    }

    /// How many walls lie strictly below `q`, in closed form per family.
    pub fn below_count(&self, q: &Point3) -> usize {
        let mut total = 0usize;
        for j in 0..3 {
            let t = self.copy_position(j, q);
            if t <= rat(0) {
                continue;
            }
            let count = if t.is_integer() {
                t.to_integer()
            } else {
                t.ceil().to_integer()
            };
            let copies = num_bigint::BigInt::from(self.copies);
            total += if count >= copies {
                self.copies
            } else {
                usize::try_from(count).expect("positive count fits")
            };
        }
        total
    }

    /// Walls passing exactly through `q`, as `(family, copy)` pairs.
    pub fn through(&self, q: &Point3) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..3 {
            let t = self.copy_position(j, q);
            if t.is_integer() && t >= rat(0) {
                let i = t.to_integer();
                if i < num_bigint::BigInt::from(self.copies) {
                    out.push((j, usize::try_from(i).expect("small copy index")));
                }
            }
        }
        out
    }

    /// Wall crossings along the segment from `a` to `b` with parameters in
    /// `(0, 1]`, excluding the wall `skip` when given.  Returns the
    /// smallest interior parameter and the walls met exactly at `b`.
    ///
    /// Within one family the copy position moves affinely along the
    /// segment, so the copies crossed are the integers strictly between
    /// the endpoint positions and the earliest is the integer nearest the
    /// start.  Three families cost three position pairs, not a scan.
    pub fn crossings(
        &self,
        a: &Point3,
        b: &Point3,
        skip: Option<(usize, usize)>,
    ) -> (Option<Rational>, Vec<(usize, usize)>) {
        let copies = num_bigint::BigInt::from(self.copies);
        let zero = num_bigint::BigInt::from(0);
        let mut earliest: Option<Rational> = None;
        let mut at_end = Vec::new();
        for j in 0..3 {
            let ta = self.copy_position(j, a);
            let tb = self.copy_position(j, b);
            if ta == tb {
                continue;
            }
            if tb.is_integer() {
                let i = tb.to_integer();
                if i >= zero && i < copies {
                    let iu = usize::try_from(&i).expect("small copy index");
                    if skip != Some((j, iu)) {
                        at_end.push((j, iu));
                    }
                }
            }
            let toward_b = tb > ta;
            let mut i = if toward_b {
                ta.floor().to_integer() + 1
            } else {
                ta.ceil().to_integer() - 1
            };
            loop {
                if toward_b && i < zero {
                    i = zero.clone();
                } else if !toward_b && i >= copies {
                    i = &copies - 1;
                }
                if i < zero || i >= copies {
                    break;
                }
                let ir = Rational::from_integer(i.clone());
                if (toward_b && ir >= tb) || (!toward_b && ir <= tb) {
                    break;
                }
                let iu = usize::try_from(&i).expect("small copy index");
                if skip == Some((j, iu)) {
                    i = if toward_b { i + 1 } else { i - 1 };
                    continue;
                }
                let s = (&ta - &ir) / (&ta - &tb);
                if earliest.as_ref().map_or(true, |e| s < *e) {
                    earliest = Some(s);
                }
                break;
            }
        }
        (earliest, at_end)
    }

    /// Direct per-wall crossing scan, for cross-checking the closed form.
    pub fn crossings_by_scan(
        &self,
        a: &Point3,
        b: &Point3,
        skip: Option<(usize, usize)>,
    ) -> (Option<Rational>, Vec<(usize, usize)>) {
        let mut earliest: Option<Rational> = None;
        let mut at_end = Vec::new();
        for j in 0..3 {
            for i in 0..self.copies {
                if skip == Some((j, i)) {
                    continue;
                }
                let fa = self.value(j, i, &a.xy()) - &a.z;
                let fb = self.value(j, i, &b.xy()) - &b.z;
                if fa == fb {
                    continue;
                }
                let s = &fa / (&fa - &fb);
                if s <= rat(0) || s > rat(1) {
                    continue;
                }
                if s == rat(1) {
                    at_end.push((j, i));
                } else if earliest.as_ref().map_or(true, |e| s < *e) {
                    earliest = Some(s);
                }
            }
        }
        (earliest, at_end)
    }

    /// Direct per-wall count, for cross-checking the closed form.
    pub fn below_count_by_scan(&self, q: &Point3) -> usize {
        self.planes.iter().filter(|w| w.below(q)).count()
    }
}
