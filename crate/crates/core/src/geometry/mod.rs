//! Footprint geometry: a WKT subset, centroids, local projection, DE-9IM
//! topology, compass octants and centroid distances.
//!
//! All predicates share one absolute tolerance, [`EPS`], in frame units.

mod predicates;
mod relate;
mod wkt;

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

pub use predicates::{locate, orientation, point_segment_distance, segment_intersection, Location, SegmentIntersection};
pub use relate::{de9im, De9im, Dimension};

use crate::error::{Error, Result};

/// Absolute tolerance for orientation and on-segment tests, in frame units.
pub const EPS: f64 = 1e-9;

/// Mean Earth radius used by the equirectangular projection, in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("WKT syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("polygon ring is not closed")]
    RingNotClosed,
    #[error("polygon ring is self-intersecting")]
    SelfIntersecting,
    #[error("{kind} needs at least {min} coordinates, got {got}")]
    TooFewCoordinates {
        kind: GeometryKind,
        min: usize,
        got: usize,
    },
    #[error("zero-length segment at vertex {0}")]
    ZeroLengthSegment(usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("coincident points have no bearing")]
    CoincidentPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Coord) -> Coord {
        Coord::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Coord) -> Coord {
        Coord::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Coord {
        Coord::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Coord) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Coord) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Coord) -> f64 {
        self.sub(o).norm()
    }

    /// Rounds both components to the [`EPS`] grid.
    pub fn snapped(self) -> Coord {
        let snap = |v: f64| (v / EPS).round() * EPS;
        Coord::new(snap(self.x), snap(self.y))
    }
}

impl From<(f64, f64)> for Coord {
    fn from((x, y): (f64, f64)) -> Self {
        Coord::new(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Point,
    Polyline,
    Polygon,
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeometryKind::Point => "point",
            GeometryKind::Polyline => "polyline",
            GeometryKind::Polygon => "polygon",
        })
    }
}

/// A validated footprint. Polygons are single simple closed rings without
/// holes; the stored ring repeats its first vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    kind: GeometryKind,
    coords: Vec<Coord>,
}

impl Geometry {
    pub fn point(x: f64, y: f64) -> Result<Self, GeometryError> {
        Self::new(GeometryKind::Point, vec![Coord::new(x, y)])
    }

    pub fn polyline(coords: Vec<Coord>) -> Result<Self, GeometryError> {
        Self::new(GeometryKind::Polyline, coords)
    }

    pub fn polygon(ring: Vec<Coord>) -> Result<Self, GeometryError> {
        Self::new(GeometryKind::Polygon, ring)
    }

    pub fn new(kind: GeometryKind, coords: Vec<Coord>) -> Result<Self, GeometryError> {
        if coords.iter().any(|c| !c.x.is_finite() || !c.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let min = match kind {
            GeometryKind::Point => 1,
            GeometryKind::Polyline => 2,
            GeometryKind::Polygon => 4,
        };
        if coords.len() < min || (kind == GeometryKind::Point && coords.len() != 1) {
            return Err(GeometryError::TooFewCoordinates {
                kind,
                min,
                got: coords.len(),
            });
        }
        if kind != GeometryKind::Point {
            for (i, w) in coords.windows(2).enumerate() {
                if w[0].distance(w[1]) <= EPS {
                    return Err(GeometryError::ZeroLengthSegment(i + 1));
                }
            }
        }
        if kind == GeometryKind::Polygon {
            let first = coords[0];
            let last = coords[coords.len() - 1];
            if first.distance(last) > EPS {
                return Err(GeometryError::RingNotClosed);
            }
            if !predicates::ring_is_simple(&coords) {
                // A flat ring folds back on itself; report it as degenerate.
                let flat = coords
                    .iter()
                    .all(|&c| predicates::orientation(coords[0], coords[1], c) == 0);
                return Err(if flat {
                    GeometryError::ZeroArea
                } else {
                    GeometryError::SelfIntersecting
                });
            }
            if signed_ring_area(&coords).abs() <= EPS {
                return Err(GeometryError::ZeroArea);
            }
        }
        Ok(Geometry { kind, coords })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    /// Segments of a polyline or polygon ring, in order.
    pub fn segments(&self) -> impl Iterator<Item = (Coord, Coord)> + '_ {
        self.coords.windows(2).map(|w| (w[0], w[1]))
    }

    /// A polyline whose endpoints coincide has an empty boundary.
    pub fn is_closed_line(&self) -> bool {
        self.kind == GeometryKind::Polyline
            && self.coords[0].distance(self.coords[self.coords.len() - 1]) <= EPS
    }

    pub fn translate(&self, v: Coord) -> Geometry {
        Geometry {
            kind: self.kind,
            coords: self.coords.iter().map(|c| c.add(v)).collect(),
        }
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bbox(&self) -> (Coord, Coord) {
        let mut lo = Coord::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Coord::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &self.coords {
            lo.x = lo.x.min(c.x);
            lo.y = lo.y.min(c.y);
            hi.x = hi.x.max(c.x);
            hi.y = hi.y.max(c.y);
        }
        (lo, hi)
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            GeometryKind::Polygon => signed_ring_area(&self.coords).abs(),
            _ => 0.0,
        }
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn centroid(&self) -> Coord {
        centroid(self)
    }

    pub fn project(&self, projection: Projection) -> Result<Geometry, GeometryError> {
        let coords = projection.apply(&self.coords)?;
        Geometry::new(self.kind, coords)
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        wkt::write(self, f)
    }
}

impl std::str::FromStr for Geometry {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, GeometryError> {
        parse_geometry(s)
    }
}

/// Parses `POINT (x y)`, `LINESTRING (x y, ...)` or `POLYGON ((x y, ...))`.
pub fn parse_geometry(text: &str) -> Result<Geometry, GeometryError> {
    let (kind, coords) = wkt::parse(text)?;
    Geometry::new(kind, coords)
}

/// Shoelace area, positive for counter-clockwise rings.
pub(crate) fn signed_ring_area(ring: &[Coord]) -> f64 {
    let o = ring[0];
    let mut twice = 0.0;
    for w in ring.windows(2) {
        twice += w[0].sub(o).cross(w[1].sub(o));
    }
    twice / 2.0
}

/// Point: itself. Polyline: length-weighted mean of segment midpoints.
/// Polygon: area centroid from the shoelace moments.
pub fn centroid(g: &Geometry) -> Coord {
    let coords = g.coords();
    let o = coords[0];
    match g.kind() {
        GeometryKind::Point => o,
        GeometryKind::Polyline => {
            let mut total = 0.0;
            let mut acc = Coord::default();
            for (a, b) in g.segments() {
                let (a, b) = (a.sub(o), b.sub(o));
                let len = a.distance(b);
                acc = acc.add(a.add(b).scale(0.5 * len));
                total += len;
            }
            acc.scale(1.0 / total).add(o)
        }
        GeometryKind::Polygon => {
            let mut twice_area = 0.0;
            let mut cx = 0.0;
            let mut cy = 0.0;
            for (a, b) in g.segments() {
                let (a, b) = (a.sub(o), b.sub(o));
                let cross = a.cross(b);
                twice_area += cross;
                cx += (a.x + b.x) * cross;
                cy += (a.y + b.y) * cross;
            }
            let k = 1.0 / (3.0 * twice_area);
            Coord::new(cx * k, cy * k).add(o)
        }
    }
}

pub fn centroid_distance(a: &Geometry, b: &Geometry) -> f64 {
    centroid(a).distance(centroid(b))
}

/// Maps input coordinates into the planar frame used by every predicate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Projection {
    /// Coordinates are already planar.
    #[default]
    Planar,
    /// Longitude/latitude degrees to metres, scaled at a reference latitude.
    Equirectangular { ref_lat: f64 },
}

impl Projection {
    pub fn apply(&self, coords: &[Coord]) -> Result<Vec<Coord>, GeometryError> {
        match *self {
            Projection::Planar => Ok(coords.to_vec()),
            Projection::Equirectangular { ref_lat } => {
                let pts: Vec<(f64, f64)> = coords.iter().map(|c| (c.x, c.y)).collect();
                project_equirect(&pts, ref_lat)
            }
        }
    }
}

/// `x = R cos(ref_lat) lon`, `y = R lat`, angles in radians, `R` the mean
/// Earth radius.
pub fn project_equirect(lon_lat: &[(f64, f64)], ref_lat: f64) -> Result<Vec<Coord>, GeometryError> {
    if !(-90.0..=90.0).contains(&ref_lat) {
        return Err(GeometryError::LatitudeOutOfRange(ref_lat));
    }
    let kx = EARTH_RADIUS_M * ref_lat.to_radians().cos();
    lon_lat
        .iter()
        .map(|&(lon, lat)| {
            if !(-90.0..=90.0).contains(&lat) {
                return Err(GeometryError::LatitudeOutOfRange(lat));
            }
            Ok(Coord::new(kx * lon.to_radians(), EARTH_RADIUS_M * lat.to_radians()))
        })
        .collect()
}

/// Mean latitude (y) over every vertex, used as the projection reference.
pub fn mean_latitude<'a>(geoms: impl IntoIterator<Item = &'a Geometry>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for g in geoms {
        for c in g.coords() {
            sum += c.y;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Eight compass sectors, clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompassOctant {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl CompassOctant {
    pub const ALL: [CompassOctant; 8] = [
        CompassOctant::N,
        CompassOctant::NE,
        CompassOctant::E,
        CompassOctant::SE,
        CompassOctant::S,
        CompassOctant::SW,
        CompassOctant::W,
        CompassOctant::NW,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        ["N", "NE", "E", "SE", "S", "SW", "W", "NW"][self.id()]
    }

    pub fn opposite(self) -> Self {
        Self::ALL[(self.id() + 4) % 8]
    }
}

/// Bearing in degrees clockwise from north, in `[0, 360)`.
pub fn bearing_degrees(from: Coord, to: Coord) -> Result<f64, GeometryError> {
    let d = to.sub(from);
    if d.norm() <= EPS {
        return Err(GeometryError::CoincidentPoints);
    }
    let theta = d.x.atan2(d.y).to_degrees();
    let theta = if theta < 0.0 { theta + 360.0 } else { theta };
    Ok(if theta >= 360.0 { 0.0 } else { theta })
}

/// Octant `k` covers bearings `[45k - 22.5, 45k + 22.5)`.
pub fn compass_octant(from: Coord, to: Coord) -> Result<CompassOctant, GeometryError> {
    let theta = bearing_degrees(from, to)?;
    Ok(octant_of_bearing(theta))
}

pub fn octant_of_bearing(theta: f64) -> CompassOctant {
    let k = ((theta + 22.5) / 45.0).floor() as usize % 8;
    CompassOctant::ALL[k]
}

/// Reads `entity_name<TAB>WKT` lines. Names must be unique.
pub fn read_geometry_file(path: &Path) -> Result<Vec<(String, Geometry)>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let display = path.display().to_string();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, wkt) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&display, i + 1, "expected `name<TAB>WKT`"))?;
        if name.is_empty() {
            return Err(Error::parse(&display, i + 1, "empty entity name"));
        }
        let geom = parse_geometry(wkt).map_err(|e| Error::parse(&display, i + 1, e.to_string()))?;
        if !seen.insert(name.to_owned()) {
            return Err(Error::parse(&display, i + 1, format!("duplicate entity `{name}`")));
        }
        out.push((name.to_owned(), geom));
    }
    if out.is_empty() {
        return Err(Error::Empty(display));
    }
    Ok(out)
}

pub fn write_geometry_file<'a, I>(path: &Path, geoms: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a Geometry)>,
{
    let mut out = String::new();
    for (name, g) in geoms {
        out.push_str(name);
        out.push('\t');
        out.push_str(&g.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Coord {
        Coord::new(x, y)
    }

    #[test]
    fn parse_point_and_square() {
        let p = parse_geometry("POINT (1 2)").unwrap();
        assert_eq!(p.kind(), GeometryKind::Point);
        assert_eq!(p.coords(), &[c(1.0, 2.0)]);
        let sq = parse_geometry("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap();
        assert_eq!(sq.kind(), GeometryKind::Polygon);
        assert_eq!(sq.area(), 1.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        assert_eq!(
            parse_geometry("POLYGON ((0 0, 1 1, 1 0, 0 1, 0 0))"),
            Err(GeometryError::SelfIntersecting)
        );
    }

    #[test]
    fn invalid_rings_and_lines() {
        assert_eq!(
            parse_geometry("POLYGON ((0 0, 1 0, 1 1, 0 1))"),
            Err(GeometryError::RingNotClosed)
        );
        assert!(matches!(
            parse_geometry("POLYGON ((0 0, 1 0, 0 0))"),
            Err(GeometryError::TooFewCoordinates { .. })
        ));
        assert!(matches!(
            parse_geometry("LINESTRING (0 0)"),
            Err(GeometryError::TooFewCoordinates { .. })
        ));
        assert!(matches!(
            parse_geometry("LINESTRING (0 0, 0 0, 1 1)"),
            Err(GeometryError::ZeroLengthSegment(_))
        ));
        assert_eq!(
            parse_geometry("POLYGON ((0 0, 1 0, 2 0, 0 0))"),
            Err(GeometryError::ZeroArea)
        );
        // spike: edge folds back over its predecessor
        assert_eq!(
            parse_geometry("POLYGON ((0 0, 2 0, 1 0, 1 1, 0 0))"),
            Err(GeometryError::SelfIntersecting)
        );
    }

    #[test]
    fn centroids() {
        let sq = parse_geometry("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap();
        assert_eq!(centroid(&sq), c(0.5, 0.5));
        let tri = parse_geometry("POLYGON ((0 0, 1 0, 0 1, 0 0))").unwrap();
        let ct = centroid(&tri);
        assert!((ct.x - 1.0 / 3.0).abs() < 1e-15 && (ct.y - 1.0 / 3.0).abs() < 1e-15);
        let line = parse_geometry("LINESTRING (0 0, 2 0, 2 2)").unwrap();
        assert_eq!(centroid(&line), c(1.5, 0.5));
    }

    #[test]
    fn clockwise_ring_has_same_centroid() {
        let cw = parse_geometry("POLYGON ((0 0, 0 1, 1 1, 1 0, 0 0))").unwrap();
        assert_eq!(centroid(&cw), c(0.5, 0.5));
    }

    #[test]
    fn projection() {
        let p = project_equirect(&[(0.0, 0.0), (0.0, 1.0)], 0.0).unwrap();
        assert_eq!(p[0], c(0.0, 0.0));
        assert!((p[1].y - 111_194.9).abs() < 0.1);
        let at0 = project_equirect(&[(1.0, 0.0)], 0.0).unwrap()[0].x;
        let at60 = project_equirect(&[(1.0, 0.0)], 60.0).unwrap()[0].x;
        assert!((at60 - at0 / 2.0).abs() < 1e-6);
        assert!(project_equirect(&[(0.0, 91.0)], 0.0).is_err());
        assert!(project_equirect(&[], -90.5).is_err());
        let planar = Projection::Planar.apply(&[c(3.0, 4.0)]).unwrap();
        assert_eq!(planar, vec![c(3.0, 4.0)]);
    }

    #[test]
    fn octants() {
        let o = c(0.0, 0.0);
        assert_eq!(compass_octant(o, c(0.0, 1.0)).unwrap(), CompassOctant::N);
        assert_eq!(compass_octant(o, c(1.0, 1.0)).unwrap(), CompassOctant::NE);
        assert_eq!(compass_octant(o, c(-1.0, 0.0)).unwrap(), CompassOctant::W);
        assert_eq!(compass_octant(o, c(0.0, -1.0)).unwrap(), CompassOctant::S);
        assert_eq!(octant_of_bearing(22.5), CompassOctant::NE);
        assert_eq!(octant_of_bearing(337.5), CompassOctant::N);
        assert_eq!(octant_of_bearing(337.4999), CompassOctant::NW);
        assert_eq!(
            compass_octant(o, o),
            Err(GeometryError::CoincidentPoints)
        );
    }

    #[test]
    fn distances() {
        let a = parse_geometry("POINT (0 0)").unwrap();
        let b = parse_geometry("POINT (3 4)").unwrap();
        assert_eq!(centroid_distance(&a, &b), 5.0);
        assert_eq!(centroid_distance(&a, &a), 0.0);
        let sq = parse_geometry("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap();
        let p = parse_geometry("POINT (3.5 0.5)").unwrap();
        assert_eq!(centroid_distance(&sq, &p), 3.0);
    }
}
