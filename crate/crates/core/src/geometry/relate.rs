//! DE-9IM matrices by noding: both operands are split at every mutual
//! intersection so each resulting node and sub-edge has a single location
//! relative to the other operand. Areal cells follow from which side of each
//! polygon edge the other operand occupies.

use std::fmt;

use super::predicates::{locate, on_segment, segment_intersection, Location, SegmentIntersection};
use super::{signed_ring_area, Coord, Geometry, GeometryKind, EPS};

/// Dimension of a point set, `Empty` rendered as `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Empty,
    Zero,
    One,
    Two,
}

impl Dimension {
    pub fn as_char(self) -> char {
        match self {
            Dimension::Empty => 'F',
            Dimension::Zero => '0',
            Dimension::One => '1',
            Dimension::Two => '2',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'F' => Some(Dimension::Empty),
            '0' => Some(Dimension::Zero),
            '1' => Some(Dimension::One),
            '2' => Some(Dimension::Two),
            _ => None,
        }
    }

    pub fn is_empty(self) -> bool {
        self == Dimension::Empty
    }
}

/// Nine-intersection matrix, rows = interior/boundary/exterior of the first
/// operand, columns = the same for the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct De9im([[Dimension; 3]; 3]);

impl De9im {
    fn empty() -> Self {
        De9im([[Dimension::Empty; 3]; 3])
    }

    pub fn get(&self, a: Location, b: Location) -> Dimension {
        self.0[a.index()][b.index()]
    }

    fn raise(&mut self, a: Location, b: Location, dim: Dimension) {
        let cell = &mut self.0[a.index()][b.index()];
        if dim > *cell {
            *cell = dim;
        }
    }

    pub fn transpose(&self) -> De9im {
        let mut t = De9im::empty();
        for i in 0..3 {
            for j in 0..3 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn cells(&self) -> impl Iterator<Item = Dimension> + '_ {
        self.0.iter().flatten().copied()
    }

    /// Matches a 9-character mask over `T F * 0 1 2`.
    pub fn matches(&self, mask: &str) -> bool {
        let mask: Vec<char> = mask.chars().collect();
        assert_eq!(mask.len(), 9, "DE-9IM masks have 9 characters");
        self.cells().zip(mask).all(|(d, m)| match m {
            '*' => true,
            'T' => !d.is_empty(),
            other => Dimension::from_char(other) == Some(d),
        })
    }

    pub fn is_disjoint(&self) -> bool {
        self.matches("FF*FF****")
    }

    pub fn intersects(&self) -> bool {
        !self.is_disjoint()
    }

    pub fn equals(&self) -> bool {
        self.matches("T*F**FFF*")
    }

    pub fn contains(&self) -> bool {
        self.matches("T*****FF*")
    }

    pub fn within(&self) -> bool {
        self.matches("T*F**F***")
    }

    pub fn touches(&self) -> bool {
        self.get(Location::Interior, Location::Interior).is_empty() && self.intersects()
    }

    pub fn interiors_intersect(&self) -> bool {
        !self.get(Location::Interior, Location::Interior).is_empty()
    }
}

impl fmt::Display for De9im {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.cells() {
            write!(f, "{}", d.as_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for De9im {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 9 {
            return Err(format!("DE-9IM pattern `{s}` must have 9 characters"));
        }
        let mut m = De9im::empty();
        for (i, c) in chars.into_iter().enumerate() {
            m.0[i / 3][i % 3] =
                Dimension::from_char(c).ok_or_else(|| format!("invalid DE-9IM cell `{c}` in `{s}`"))?;
        }
        Ok(m)
    }
}

fn snapped(g: &Geometry) -> Geometry {
    Geometry {
        kind: g.kind,
        coords: g.coords.iter().map(|c| c.snapped()).collect(),
    }
}

fn boxes_overlap(a: (Coord, Coord), b: (Coord, Coord)) -> bool {
    a.0.x <= b.1.x + EPS && b.0.x <= a.1.x + EPS && a.0.y <= b.1.y + EPS && b.0.y <= a.1.y + EPS
}

/// Interior side of a polygon edge travelling along `dir`.
fn interior_normal(dir: Coord, ccw: bool) -> Coord {
    let left = Coord::new(-dir.y, dir.x);
    if ccw {
        left
    } else {
        left.scale(-1.0)
    }
}

struct SubEdge {
    mid: Coord,
    dir: Coord,
}

/// Splits every segment of `g` at the nodes lying on it.
fn sub_edges(g: &Geometry, nodes: &[Coord]) -> Vec<SubEdge> {
    let mut out = Vec::new();
    for (p, q) in g.segments() {
        let dir = q.sub(p);
        let len = dir.norm();
        let u = dir.scale(1.0 / len);
        let mut ts = vec![0.0, len];
        ts.extend(
            nodes
                .iter()
                .filter(|n| on_segment(**n, p, q))
                .map(|n| n.sub(p).dot(u).clamp(0.0, len)),
        );
        ts.sort_by(f64::total_cmp);
        for w in ts.windows(2) {
            if w[1] - w[0] > 2.0 * EPS {
                out.push(SubEdge {
                    mid: p.add(u.scale((w[0] + w[1]) / 2.0)),
                    dir,
                });
            }
        }
    }
    out
}

/// Computes the DE-9IM matrix of `a` against `b`.
///
/// Coordinates are snapped to the [`EPS`] grid first; every orientation and
/// incidence test then uses the same absolute tolerance.
pub fn de9im(a: &Geometry, b: &Geometry) -> De9im {
    let a = snapped(a);
    let b = snapped(b);
    let mut m = De9im::empty();
    m.raise(Location::Exterior, Location::Exterior, Dimension::Two);

    let mut nodes: Vec<Coord> = a.coords().iter().chain(b.coords()).copied().collect();
    if boxes_overlap(a.bbox(), b.bbox()) {
        for (p, q) in a.segments() {
            for (r, s) in b.segments() {
                match segment_intersection(p, q, r, s) {
                    SegmentIntersection::None => {}
                    SegmentIntersection::Point(x) => nodes.push(x),
                    SegmentIntersection::Overlap(x, y) => {
                        nodes.push(x);
                        nodes.push(y);
                    }
                }
            }
        }
    }

    for &n in &nodes {
        m.raise(locate(n, &a), locate(n, &b), Dimension::Zero);
    }

    let a_poly = a.kind() == GeometryKind::Polygon;
    let b_poly = b.kind() == GeometryKind::Polygon;
    let own = |g: &Geometry| match g.kind() {
        GeometryKind::Polygon => Location::Boundary,
        _ => Location::Interior,
    };
    let (a_own, b_own) = (own(&a), own(&b));
    let a_ccw = a_poly && signed_ring_area(a.coords()) > 0.0;
    let b_ccw = b_poly && signed_ring_area(b.coords()) > 0.0;

    for e in sub_edges(&a, &nodes) {
        let lb = locate(e.mid, &b);
        m.raise(a_own, lb, Dimension::One);
        if a_poly && b_poly {
            match lb {
                Location::Interior => {
                    m.raise(Location::Interior, Location::Interior, Dimension::Two);
                    m.raise(Location::Exterior, Location::Interior, Dimension::Two);
                }
                Location::Exterior => {
                    m.raise(Location::Interior, Location::Exterior, Dimension::Two);
                }
                Location::Boundary => {
                    let b_dir = b
                        .segments()
                        .find(|(r, s)| on_segment(e.mid, *r, *s))
                        .map(|(r, s)| s.sub(r))
                        .expect("boundary location implies an incident segment");
                    let same_side =
                        interior_normal(e.dir, a_ccw).dot(interior_normal(b_dir, b_ccw)) > 0.0;
                    if same_side {
                        m.raise(Location::Interior, Location::Interior, Dimension::Two);
                    } else {
                        m.raise(Location::Interior, Location::Exterior, Dimension::Two);
                        m.raise(Location::Exterior, Location::Interior, Dimension::Two);
                    }
                }
            }
        }
    }

    for e in sub_edges(&b, &nodes) {
        let la = locate(e.mid, &a);
        m.raise(la, b_own, Dimension::One);
        if a_poly && b_poly {
            match la {
                Location::Interior => {
                    m.raise(Location::Interior, Location::Interior, Dimension::Two);
                    m.raise(Location::Interior, Location::Exterior, Dimension::Two);
                }
                Location::Exterior => {
                    m.raise(Location::Exterior, Location::Interior, Dimension::Two);
                }
                Location::Boundary => {}
            }
        }
    }

    if a_poly && !b_poly {
        m.raise(Location::Interior, Location::Exterior, Dimension::Two);
    }
    if b_poly && !a_poly {
        m.raise(Location::Exterior, Location::Interior, Dimension::Two);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::super::parse_geometry;
    use super::*;

    fn rel(a: &str, b: &str) -> String {
        de9im(&parse_geometry(a).unwrap(), &parse_geometry(b).unwrap()).to_string()
    }

    const SQUARE: &str = "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))";

    #[test]
    fn textbook_patterns() {
        assert_eq!(rel(SQUARE, SQUARE), "2FFF1FFF2");
        assert_eq!(rel("POINT (0 0)", "POINT (1 1)"), "FF0FFF0F2");
        assert_eq!(rel("POINT (0 0)", "POINT (0 0)"), "0FFFFFFF2");
        assert_eq!(rel("POINT (0.5 0.5)", SQUARE), "0FFFFF212");
        assert_eq!(rel("POINT (1 0.5)", SQUARE), "F0FFFF212");
        assert_eq!(rel("POINT (3 3)", SQUARE), "FF0FFF212");
        assert_eq!(rel("LINESTRING (-1 0.5, 2 0.5)", SQUARE), "101FF0212");
        assert_eq!(rel("LINESTRING (0.5 0.5, 2 0.5)", SQUARE), "1010F0212");
        assert_eq!(rel("LINESTRING (0.2 0.5, 0.8 0.5)", SQUARE), "1FF0FF212");
    }

    #[test]
    fn polygon_pairs() {
        // overlap
        assert_eq!(
            rel(SQUARE, "POLYGON ((0.5 0.5, 1.5 0.5, 1.5 1.5, 0.5 1.5, 0.5 0.5))"),
            "212101212"
        );
        // edge-adjacent
        assert_eq!(
            rel(SQUARE, "POLYGON ((1 0, 2 0, 2 1, 1 1, 1 0))"),
            "FF2F11212"
        );
        // corner touch
        assert_eq!(
            rel(SQUARE, "POLYGON ((1 1, 2 1, 2 2, 1 2, 1 1))"),
            "FF2F01212"
        );
        // strict containment
        assert_eq!(
            rel("POLYGON ((-1 -1, 2 -1, 2 2, -1 2, -1 -1))", SQUARE),
            "212FF1FF2"
        );
        // contained, sharing part of an edge
        assert_eq!(
            rel("POLYGON ((0 0, 2 0, 2 2, 0 2, 0 0))", SQUARE),
            "212F11FF2"
        );
        // same square, opposite winding and shifted start vertex
        assert_eq!(rel(SQUARE, "POLYGON ((1 1, 1 0, 0 0, 0 1, 1 1))"), "2FFF1FFF2");
        // disjoint
        assert_eq!(
            rel(SQUARE, "POLYGON ((3 3, 4 3, 4 4, 3 3))"),
            "FF2FF1212"
        );
    }

    #[test]
    fn line_pairs() {
        assert_eq!(rel("LINESTRING (0 0, 2 2)", "LINESTRING (0 2, 2 0)"), "0F1FF0102");
        assert_eq!(rel("LINESTRING (0 0, 2 0)", "LINESTRING (1 0, 3 0)"), "1010F0102");
        assert_eq!(rel("LINESTRING (0 0, 1 0)", "LINESTRING (1 0, 2 0)"), "FF1F00102");
        assert_eq!(rel("LINESTRING (0 0, 1 0)", "LINESTRING (0 0, 1 0)"), "1FFF0FFF2");
        assert_eq!(rel("POINT (0.5 0)", "LINESTRING (0 0, 1 0)"), "0FFFFF102");
        assert_eq!(rel("POINT (0 0)", "LINESTRING (0 0, 1 0)"), "F0FFFF102");
    }

    #[test]
    fn transpose_symmetry() {
        let cases = [
            ("LINESTRING (-1 0.5, 2 0.5)", SQUARE),
            ("POINT (1 0.5)", SQUARE),
            ("LINESTRING (0 0, 2 0)", "LINESTRING (1 0, 3 0)"),
            (SQUARE, "POLYGON ((0.5 0.5, 1.5 0.5, 1.5 1.5, 0.5 1.5, 0.5 0.5))"),
        ];
        for (a, b) in cases {
            let ga = parse_geometry(a).unwrap();
            let gb = parse_geometry(b).unwrap();
            assert_eq!(de9im(&gb, &ga), de9im(&ga, &gb).transpose(), "{a} vs {b}");
        }
    }

    #[test]
    fn named_predicates() {
        let m: De9im = "212FF1FF2".parse().unwrap();
        assert!(m.contains() && !m.within() && m.intersects() && !m.touches());
        assert!(m.transpose().within());
        let t: De9im = "FF2F11212".parse().unwrap();
        assert!(t.touches());
        assert!("FF2FF1212".parse::<De9im>().unwrap().is_disjoint());
        assert!("2FFF1FFF2".parse::<De9im>().unwrap().equals());
        assert!("2FF1FFFFX".parse::<De9im>().is_err());
    }
}
