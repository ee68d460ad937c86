use super::{Coord, Geometry, GeometryKind, EPS};

/// Position of a point relative to a geometry's point sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

impl Location {
    pub const ALL: [Location; 3] = [Location::Interior, Location::Boundary, Location::Exterior];

    pub fn index(self) -> usize {
        match self {
            Location::Interior => 0,
            Location::Boundary => 1,
            Location::Exterior => 2,
        }
    }
}

/// Side of `c` relative to the directed line `a -> b`: 1 left, -1 right,
/// 0 when `c` lies within [`EPS`] of the line.
pub fn orientation(a: Coord, b: Coord, c: Coord) -> i8 {
    let ab = b.sub(a);
    let len = ab.norm();
    let cross = ab.cross(c.sub(a));
    let dist = if len > 0.0 { cross / len } else { c.distance(a) };
    if dist.abs() <= EPS {
        0
    } else if dist > 0.0 {
        1
    } else {
        -1
    }
}

pub fn point_segment_distance(p: Coord, a: Coord, b: Coord) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a.add(ab.scale(t)))
}

pub(crate) fn on_segment(p: Coord, a: Coord, b: Coord) -> bool {
    point_segment_distance(p, a, b) <= EPS
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentIntersection {
    None,
    Point(Coord),
    /// Collinear overlap between the two given points.
    Overlap(Coord, Coord),
}

pub fn segment_intersection(a: Coord, b: Coord, c: Coord, d: Coord) -> SegmentIntersection {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);

    if o1 == 0 && o2 == 0 {
        return collinear_overlap(a, b, c, d);
    }
    if o1 * o2 > 0 || o3 * o4 > 0 {
        return SegmentIntersection::None;
    }
    // Touching: an endpoint lies on the other segment.
    for (p, s0, s1) in [(c, a, b), (d, a, b), (a, c, d), (b, c, d)] {
        if on_segment(p, s0, s1) {
            return SegmentIntersection::Point(p);
        }
    }
    if o1 == 0 || o2 == 0 || o3 == 0 || o4 == 0 {
        // Collinear with the other line but beyond the segment's extent.
        return SegmentIntersection::None;
    }
    let r = b.sub(a);
    let s = d.sub(c);
    let t = c.sub(a).cross(s) / r.cross(s);
    SegmentIntersection::Point(a.add(r.scale(t)))
}

fn collinear_overlap(a: Coord, b: Coord, c: Coord, d: Coord) -> SegmentIntersection {
    let dir = b.sub(a);
    let len = dir.norm();
    let u = dir.scale(1.0 / len);
    let (tc, td) = (c.sub(a).dot(u), d.sub(a).dot(u));
    let lo = tc.min(td).max(0.0);
    let hi = tc.max(td).min(len);
    if hi < lo - EPS {
        return SegmentIntersection::None;
    }
    let clamp_pt = |t: f64| {
        // Prefer exact input vertices over reconstructed points.
        [a, b, c, d]
            .into_iter()
            .find(|p| (p.sub(a).dot(u) - t).abs() <= EPS)
            .unwrap_or_else(|| a.add(u.scale(t)))
    };
    if hi - lo <= EPS {
        SegmentIntersection::Point(clamp_pt((lo + hi) / 2.0))
    } else {
        SegmentIntersection::Overlap(clamp_pt(lo), clamp_pt(hi))
    }
}

/// True when no two non-adjacent edges meet and adjacent edges share only
/// their common vertex.
pub(crate) fn ring_is_simple(ring: &[Coord]) -> bool {
    let n = ring.len() - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[i + 1]);
        for j in i + 1..n {
            let (c, d) = (ring[j], ring[j + 1]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared vertex is b == c (j == i+1) or a == d (wrap-around)
                let (p, shared, q) = if j == i + 1 { (a, b, d) } else { (b, a, c) };
                let folds_back = orientation(p, shared, q) == 0
                    && shared.sub(p).dot(q.sub(shared)) < 0.0;
                if folds_back {
                    return false;
                }
                // the far endpoint of one edge must not touch the other edge
                if n > 3 && (on_segment(q, p, shared) || on_segment(p, shared, q)) {
                    return false;
                }
            } else if segment_intersection(a, b, c, d) != SegmentIntersection::None {
                return false;
            }
        }
    }
    true
}

fn ring_contains(ring: &[Coord], p: Coord) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Locates `p` in the interior, boundary or exterior of `g` (OGC semantics:
/// a point has an empty boundary, a polyline's boundary is its two endpoints
/// unless closed, a polygon's boundary is its ring).
pub fn locate(p: Coord, g: &Geometry) -> Location {
    let coords = g.coords();
    match g.kind() {
        GeometryKind::Point => {
            if p.distance(coords[0]) <= EPS {
                Location::Interior
            } else {
                Location::Exterior
            }
        }
        GeometryKind::Polyline => {
            if !g.is_closed_line()
                && (p.distance(coords[0]) <= EPS || p.distance(coords[coords.len() - 1]) <= EPS)
            {
                return Location::Boundary;
            }
            if g.segments().any(|(a, b)| on_segment(p, a, b)) {
                Location::Interior
            } else {
                Location::Exterior
            }
        }
        GeometryKind::Polygon => {
            if g.segments().any(|(a, b)| on_segment(p, a, b)) {
                Location::Boundary
            } else if ring_contains(coords, p) {
                Location::Interior
            } else {
                Location::Exterior
            }
        }
    }
}
