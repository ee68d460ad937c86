//! Independent reference implementations used as oracles by the integration
//! tests. None of them call into the code they check.

#![allow(dead_code)]

use std::f64::consts::TAU;

use geokge::features::FeatureKind;
use geokge::geometry::{Coord, Geometry, GeometryKind};
use geokge::model::{EmbeddingSpace, Lambda, TableId};
use geokge::Triple;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Distances, written out coordinate by coordinate.

fn half_angle_sine(x: f64) -> f64 {
    // |sin(x/2)| over one period, where the sine is non-negative.
    (x.rem_euclid(TAU) / 2.0).sin()
}

pub fn triplet_distance(es: &EmbeddingSpace, h: usize, r: usize, t: usize) -> f64 {
    let ent_p = es.table(TableId::ENTITY_PHASE);
    let ent_m = es.table(TableId::ENTITY_MOD);
    let rel_p = es.table(TableId::REL_PHASE);
    let rel_m = es.table(TableId::REL_MOD_RAW);
    let mut squares = Vec::new();
    let mut phase = 0.0;
    for i in 0..es.k() {
        let scaled = ent_m.row(h)[i] * rel_m.row(r)[i].abs();
        squares.push((scaled - ent_m.row(t)[i]).powi(2));
        phase += half_angle_sine(ent_p.row(h)[i] + rel_p.row(r)[i] - ent_p.row(t)[i]);
    }
    squares.iter().sum::<f64>().sqrt() + es.lambda(Lambda::Triplet) * phase
}

pub fn alignment_distance(es: &EmbeddingSpace, r: usize, kind: FeatureKind, g: usize) -> f64 {
    let rel_p = es.table(TableId::REL_PHASE).row(r);
    let rel_m = es.table(TableId::REL_MOD_RAW).row(r);
    let g_p = es.table(TableId::feat_phase(kind)).row(g);
    let g_m = es.table(TableId::feat_mod_raw(kind)).row(g);
    let mut squares = 0.0;
    let mut phase = 0.0;
    for i in 0..es.k() {
        squares += (rel_m[i].abs() - g_m[i].abs()).powi(2);
        phase += half_angle_sine(rel_p[i] - g_p[i]);
    }
    squares.sqrt() + es.lambda(Lambda::Align) * phase
}

/// Random parameters with moduli in [-1, 1] and λ in [0.1, 2].
pub fn random_space(
    n_ent: usize,
    n_rel: usize,
    sizes: [usize; 3],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> EmbeddingSpace {
    let mut es = EmbeddingSpace::init(n_ent, n_rel, sizes, k, rng.random());
    for id in TableId::all() {
        let phase = id.is_phase();
        for v in es.table_mut(id).data_mut() {
            *v = if phase {
                rng.random_range(0.0..TAU)
            } else {
                rng.random_range(-1.0..1.0)
            };
        }
    }
    es.set_lambda(Lambda::Triplet, rng.random_range(0.1..2.0));
    es.set_lambda(Lambda::Align, rng.random_range(0.1..2.0));
    es
}

// ---------------------------------------------------------------------------
// Central differences.

pub const FD_STEP: f64 = 1e-5;

/// A single scalar parameter.
#[derive(Debug, Clone, Copy)]
pub enum Param {
    Cell(TableId, usize, usize),
    Lambda(Lambda),
}

pub fn get(es: &EmbeddingSpace, p: Param) -> f64 {
    match p {
        Param::Cell(id, row, col) => es.table(id).row(row)[col],
        Param::Lambda(l) => es.lambda(l),
    }
}

pub fn set(es: &mut EmbeddingSpace, p: Param, v: f64) {
    match p {
        Param::Cell(id, row, col) => es.table_mut(id).row_mut(row)[col] = v,
        Param::Lambda(l) => es.set_lambda(l, v),
    }
}

pub fn central_difference(es: &EmbeddingSpace, p: Param, f: impl Fn(&EmbeddingSpace) -> f64) -> f64 {
    let mut plus = es.clone();
    let x = get(es, p);
    set(&mut plus, p, x + FD_STEP);
    let mut minus = es.clone();
    set(&mut minus, p, x - FD_STEP);
    (f(&plus) - f(&minus)) / (2.0 * FD_STEP)
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(1e-6);
    (analytic - numeric).abs() / scale
}

// ---------------------------------------------------------------------------
// Brute-force filtered rank.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Head,
    Tail,
    Relation,
}

/// Scores every candidate with [`triplet_distance`] and filters against a
/// plain list of known triples.
pub fn brute_force_rank(es: &EmbeddingSpace, known: &[Triple], query: Triple, part: Part) -> f64 {
    let n = match part {
        Part::Relation => es.n_relations(),
        _ => es.n_entities(),
    };
    let replace = |c: usize| match part {
        Part::Head => Triple::new(c, query.r, query.t),
        Part::Tail => Triple::new(query.h, query.r, c),
        Part::Relation => Triple::new(query.h, c, query.t),
    };
    let target = triplet_distance(es, query.h, query.r, query.t);
    let mut better = 0.0;
    let mut ties = 0.0;
    for c in 0..n {
        let cand = replace(c);
        if cand == query || known.contains(&cand) {
            continue;
        }
        let d = triplet_distance(es, cand.h, cand.r, cand.t);
        if d < target {
            better += 1.0;
        } else if d == target {
            ties += 1.0;
        }
    }
    1.0 + better + ties / 2.0
}

// ---------------------------------------------------------------------------
// Exhaustive natural breaks.

fn squared_deviation(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum()
}

/// Every way to cut the sorted values into `k` nonempty runs. Returns the
/// optimum deviation and, among optimal partitions that keep equal values
/// together, the lexicographically smallest list of class start indices.
pub fn jenks_exhaustive(values: &[f64], k: usize) -> (f64, Vec<usize>) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut results: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut cuts = Vec::new();
    fn recurse(
        sorted: &[f64],
        k: usize,
        start: usize,
        cuts: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        let n = sorted.len();
        if cuts.len() == k - 1 {
            let mut starts = vec![0];
            starts.extend(cuts.iter().copied());
            let mut bounds = starts.clone();
            bounds.push(n);
            let dev = bounds.windows(2).map(|w| squared_deviation(&sorted[w[0]..w[1]])).sum();
            out.push((dev, starts));
            return;
        }
        for c in start..n {
            cuts.push(c);
            recurse(sorted, k, c + 1, cuts, out);
            cuts.pop();
        }
    }
    recurse(&sorted, k, 1, &mut cuts, &mut results);
    let best = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * (1.0 + best);
    let mut optimal: Vec<Vec<usize>> = results
        .into_iter()
        .filter(|(d, s)| *d <= best + tol && s[1..].iter().all(|&c| sorted[c - 1] != sorted[c]))
        .map(|(_, s)| s)
        .collect();
    optimal.sort();
    assert!(n >= k);
    (best, optimal.into_iter().next().unwrap_or_default())
}

// ---------------------------------------------------------------------------
// Nine-intersection by sampling.

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loc {
    I,
    B,
    E,
}

fn seg_dist(p: Coord, a: Coord, b: Coord) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    let (qx, qy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

/// Winding number of a closed ring around `p`.
fn winding(ring: &[Coord], p: Coord) -> i32 {
    let mut w = 0;
    for s in ring.windows(2) {
        let (a, b) = (s[0], s[1]);
        let side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            w -= 1;
        }
    }
    w
}

fn locate(g: &Geometry, p: Coord) -> Loc {
    let c = g.coords();
    match g.kind() {
        GeometryKind::Point => {
            if (p.x - c[0].x).hypot(p.y - c[0].y) <= TOL {
                Loc::I
            } else {
                Loc::E
            }
        }
        GeometryKind::Polyline => {
            let closed = (c[0].x - c[c.len() - 1].x).hypot(c[0].y - c[c.len() - 1].y) <= TOL;
            if !closed {
                for e in [c[0], c[c.len() - 1]] {
                    if (p.x - e.x).hypot(p.y - e.y) <= TOL {
                        return Loc::B;
                    }
                }
            }
            if c.windows(2).any(|s| seg_dist(p, s[0], s[1]) <= TOL) {
                Loc::I
            } else {
                Loc::E
            }
        }
        GeometryKind::Polygon => {
            if c.windows(2).any(|s| seg_dist(p, s[0], s[1]) <= TOL) {
                Loc::B
            } else if winding(c, p) != 0 {
                Loc::I
            } else {
                Loc::E
            }
        }
    }
}

fn part_dimension(kind: GeometryKind, loc: Loc) -> i32 {
    match (kind, loc) {
        (_, Loc::E) => 2,
        (GeometryKind::Point, Loc::I) => 0,
        (GeometryKind::Point, Loc::B) => -1,
        (GeometryKind::Polyline, Loc::I) => 1,
        (GeometryKind::Polyline, Loc::B) => 0,
        (GeometryKind::Polygon, Loc::I) => 2,
        (GeometryKind::Polygon, Loc::B) => 1,
    }
}

fn crossing(a: Coord, b: Coord, c: Coord, d: Coord) -> Option<Coord> {
    let r = (b.x - a.x, b.y - a.y);
    let s = (d.x - c.x, d.y - c.y);
    let den = r.0 * s.1 - r.1 * s.0;
    if den.abs() < 1e-15 {
        return None;
    }
    let t = ((c.x - a.x) * s.1 - (c.y - a.y) * s.0) / den;
    let u = ((c.x - a.x) * r.1 - (c.y - a.y) * r.0) / den;
    ((-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u))
        .then(|| Coord::new(a.x + t * r.0, a.y + t * r.1))
}

/// A sample point and the dimension of the part it was drawn from
/// (0 for the special points: vertices and crossings).
struct Sample {
    p: Coord,
    dim: i32,
}

fn random_on_segments(g: &Geometry, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Sample>) {
    let segs: Vec<(Coord, Coord)> = g.coords().windows(2).map(|s| (s[0], s[1])).collect();
    let lens: Vec<f64> = segs.iter().map(|(a, b)| (b.x - a.x).hypot(b.y - a.y)).collect();
    let total: f64 = lens.iter().sum();
    for _ in 0..n {
        let mut x = rng.random_range(0.0..total);
        let mut i = 0;
        while i + 1 < segs.len() && x > lens[i] {
            x -= lens[i];
            i += 1;
        }
        let t = (x / lens[i]).clamp(1e-6, 1.0 - 1e-6);
        let (a, b) = segs[i];
        out.push(Sample {
            p: Coord::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)),
            dim: 1,
        });
    }
}

fn bbox(gs: &[&Geometry]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for g in gs {
        for c in g.coords() {
            b = (b.0.min(c.x), b.1.min(c.y), b.2.max(c.x), b.3.max(c.y));
        }
    }
    b
}

/// Nine-intersection pattern estimated from `n` random samples plus every
/// vertex and edge crossing. Cell dimensions follow the dimension of the
/// samples that reach them.
pub fn sampled_de9im(a: &Geometry, b: &Geometry, n: usize, rng: &mut ChaCha8Rng) -> String {
    let mut samples = Vec::new();
    for g in [a, b] {
        for &c in g.coords() {
            samples.push(Sample { p: c, dim: 0 });
        }
    }
    for s in a.coords().windows(2) {
        for t in b.coords().windows(2) {
            if let Some(p) = crossing(s[0], s[1], t[0], t[1]) {
                samples.push(Sample { p, dim: 0 });
            }
        }
    }
    let per = n / 4;
    for g in [a, b] {
        if g.kind() != GeometryKind::Point {
            random_on_segments(g, per, rng, &mut samples);
        }
    }
    // Area samples in small discs around every vertex and crossing, at
    // log-uniform radii, so that slivers near those points are hit.
    let specials: Vec<Coord> = samples.iter().map(|s| s.p).collect();
    for i in 0..per {
        let c = specials[i % specials.len()];
        let r = 10f64.powf(rng.random_range(-6.0..-1.0));
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        samples.push(Sample {
            p: Coord::new(c.x + r * t.cos(), c.y + r * t.sin()),
            dim: 2,
        });
    }
    // Area samples over a box enlarged around both geometries.
    let (x0, y0, x1, y1) = bbox(&[a, b]);
    let (w, h) = ((x1 - x0).max(1.0), (y1 - y0).max(1.0));
    for _ in 0..n - 3 * per {
        samples.push(Sample {
            p: Coord::new(
                rng.random_range(x0 - w * 0.5..x1 + w * 0.5),
                rng.random_range(y0 - h * 0.5..y1 + h * 0.5),
            ),
            dim: 2,
        });
    }

    let mut cells = [[-1i32; 3]; 3];
    let index = |l: Loc| match l {
        Loc::I => 0,
        Loc::B => 1,
        Loc::E => 2,
    };
    for s in &samples {
        let (la, lb) = (locate(a, s.p), locate(b, s.p));
        let dim = s
            .dim
            .min(part_dimension(a.kind(), la))
            .min(part_dimension(b.kind(), lb));
        let cell = &mut cells[index(la)][index(lb)];
        *cell = (*cell).max(dim);
    }
    cells
        .iter()
        .flatten()
        .map(|&d| match d {
            -1 => 'F',
            0 => '0',
            1 => '1',
            _ => '2',
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Random convex polygons.

fn cross(o: Coord, a: Coord, b: Coord) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Counter-clockwise convex hull (monotone chain), closed.
pub fn convex_hull(mut pts: Vec<Coord>) -> Vec<Coord> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut lower: Vec<Coord> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-9 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Coord> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-9 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let first = lower[0];
    lower.push(first);
    lower
}

pub fn random_convex(rng: &mut ChaCha8Rng, cx: f64, cy: f64, radius: f64) -> Geometry {
    loop {
        let pts: Vec<Coord> = (0..rng.random_range(3..9))
            .map(|_| {
                let a = rng.random_range(0.0..TAU);
                let r = radius * rng.random_range(0.3..1.0);
                Coord::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        let hull = convex_hull(pts);
        if hull.len() >= 4 {
            if let Ok(g) = Geometry::polygon(hull) {
                return g;
            }
        }
    }
}

/// A pair of convex polygons in one of several arrangements: independent,
/// nested, sharing an edge, sharing a vertex, identical or shifted.
pub fn random_convex_pair(rng: &mut ChaCha8Rng) -> (Geometry, Geometry, &'static str) {
    let a = random_convex(rng, 0.0, 0.0, 4.0);
    let ring: Vec<Coord> = a.coords().to_vec();
    let n = ring.len() - 1;
    let centroid = a.centroid();
    let choice = rng.random_range(0..10);
    let (b, label) = match choice {
        0..=3 => {
            let (cx, cy) = (rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
            let b = random_convex(rng, cx, cy, 4.0);
            (b, "independent")
        }
        4 => {
            let s = rng.random_range(0.3..0.9);
            let inner: Vec<Coord> = ring
                .iter()
                .map(|c| Coord::new(centroid.x + s * (c.x - centroid.x), centroid.y + s * (c.y - centroid.y)))
                .collect();
            (Geometry::polygon(inner).unwrap(), "nested")
        }
        5 | 6 => {
            // Reflect across one edge, keeping that edge's endpoints exact.
            let i = rng.random_range(0..n);
            let (p, q) = (ring[i], ring[i + 1]);
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let len2 = dx * dx + dy * dy;
            let mut out: Vec<Coord> = ring[..n]
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    if j == i || j == (i + 1) % n {
                        return c;
                    }
                    let t = ((c.x - p.x) * dx + (c.y - p.y) * dy) / len2;
                    let (fx, fy) = (p.x + t * dx, p.y + t * dy);
                    Coord::new(2.0 * fx - c.x, 2.0 * fy - c.y)
                })
                .collect();
            out.reverse();
            let first = out[0];
            out.push(first);
            (Geometry::polygon(out).unwrap(), "shared-edge")
        }
        7 => {
            let v = ring[rng.random_range(0..n)];
            let out: Vec<Coord> = ring.iter().map(|c| Coord::new(2.0 * v.x - c.x, 2.0 * v.y - c.y)).collect();
            (Geometry::polygon(out).unwrap(), "shared-vertex")
        }
        8 => (a.clone(), "identical"),
        _ => {
            let shift = Coord::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            (a.translate(shift), "shifted")
        }
    };
    (a, b, label)
}
