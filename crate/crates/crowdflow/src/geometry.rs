//! Planar primitives: points, vectors, convex polygons, circular sectors.
//!
//! Everything here is an immutable value type; operations are pure functions
//! and safe to call from any number of threads.

use crate::{Error, Result};

/// Intersections with area below this are treated as empty so that sliver
/// polygons do not pollute the mass redistribution.
pub const DEGENERATE_AREA_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_vec(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    pub const EX: Vec2 = Vec2 { x: 1.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add<Vec2> for Point2 {
    type Output = Point2;
    fn add(self, v: Vec2) -> Point2 {
        Point2::new(self.x + v.x, self.y + v.y)
    }
}

impl std::ops::Sub<Point2> for Point2 {
    type Output = Vec2;
    fn sub(self, p: Point2) -> Vec2 {
        Vec2::new(self.x - p.x, self.y - p.y)
    }
}

impl std::ops::Add<Vec2> for Vec2 {
    type Output = Vec2;
    fn add(self, v: Vec2) -> Vec2 {
        Vec2::new(self.x + v.x, self.y + v.y)
    }
}

impl std::ops::Sub<Vec2> for Vec2 {
    type Output = Vec2;
    fn sub(self, v: Vec2) -> Vec2 {
        Vec2::new(self.x - v.x, self.y - v.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Convex planar polygon with counterclockwise vertex order.
///
/// Construction normalizes orientation (clockwise input is reversed, not
/// rejected) and rejects non-convex or too-short vertex lists. A polygon
/// whose area is below [`DEGENERATE_AREA_EPS`] can still be constructed;
/// it reports itself via [`Polygon2::is_degenerate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    verts: Vec<Point2>,
}

/// Shoelace sum; positive for counterclockwise order.
fn signed_area(verts: &[Point2]) -> f64 {
    let n = verts.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

impl Polygon2 {
    pub fn new(mut verts: Vec<Point2>) -> Result<Self> {
        if verts.len() < 3 {
            return Err(Error::Geometry(format!(
                "polygon needs at least 3 vertices, got {}",
                verts.len()
            )));
        }
        if verts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Geometry("non-finite polygon vertex".into()));
        }
        if signed_area(&verts) < 0.0 {
            verts.reverse();
        }
        let poly = Self { verts };
        if !poly.is_convex() {
            return Err(Error::Geometry("polygon is not convex".into()));
        }
        Ok(poly)
    }

    pub fn triangle(a: Point2, b: Point2, c: Point2) -> Result<Self> {
        Self::new(vec![a, b, c])
    }

    /// Construction bypass for vertices already known to be convex and CCW
    /// (mesh elements, clip outputs).
    pub(crate) fn from_ccw_unchecked(verts: Vec<Point2>) -> Self {
        Self { verts }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.verts
    }

    /// Shoelace area; nonnegative for the stored CCW order.
    pub fn area(&self) -> f64 {
        signed_area(&self.verts).max(0.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() < DEGENERATE_AREA_EPS
    }

    pub fn centroid(&self) -> Point2 {
        // Area-weighted centroid; falls back to the vertex mean for
        // degenerate polygons.
        let a = signed_area(&self.verts);
        if a.abs() < DEGENERATE_AREA_EPS {
            let n = self.verts.len() as f64;
            let (sx, sy) = self
                .verts
                .iter()
                .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
            return Point2::new(sx / n, sy / n);
        }
        let n = self.verts.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let p = self.verts[i];
            let q = self.verts[(i + 1) % n];
            let w = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point2::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    fn is_convex(&self) -> bool {
        let n = self.verts.len();
        let scale: f64 = self
            .verts
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(0.0, f64::max)
            .max(1.0);
        let tol = 1e-12 * scale * scale;
        for i in 0..n {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % n];
            let c = self.verts[(i + 2) % n];
            if (b - a).cross(c - b) < -tol {
                return false;
            }
        }
        true
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.verts {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn contains(&self, p: Point2) -> bool {
        let n = self.verts.len();
        for i in 0..n {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % n];
            if (b - a).cross(p - a) < 0.0 {
                return false;
            }
        }
        true
    }
}

/// Rigid translation; area is preserved exactly.
pub fn translate(poly: &Polygon2, v: Vec2) -> Polygon2 {
    Polygon2::from_ccw_unchecked(poly.verts.iter().map(|&p| p + v).collect())
}

/// Clip a CCW vertex loop against the half-plane left of `a -> b`.
///
/// Points exactly on the boundary count as inside, so clipping a polygon
/// against its own edges reproduces it bit for bit.
fn clip_halfplane(input: &[Point2], a: Point2, b: Point2, out: &mut Vec<Point2>) {
    out.clear();
    let n = input.len();
    if n == 0 {
        return;
    }
    let dir = b - a;
    let side = |p: Point2| dir.cross(p - a);
    let mut prev = input[n - 1];
    let mut prev_side = side(prev);
    for &cur in input {
        let cur_side = side(cur);
        let cur_in = cur_side >= 0.0;
        let prev_in = prev_side >= 0.0;
        if cur_in != prev_in {
            let t = prev_side / (prev_side - cur_side);
            out.push(Point2::new(
                prev.x + t * (cur.x - prev.x),
                prev.y + t * (cur.y - prev.y),
            ));
        }
        if cur_in {
            out.push(cur);
        }
        prev = cur;
        prev_side = cur_side;
    }
}

fn lex_less(a: &[Point2], b: &[Point2]) -> bool {
    for (p, q) in a.iter().zip(b.iter()) {
        if p.x != q.x {
            return p.x < q.x;
        }
        if p.y != q.y {
            return p.y < q.y;
        }
    }
    a.len() < b.len()
}

/// Intersection of two convex polygons by successive half-plane clipping
/// against the edges of the smaller polygon (linear in total vertex count).
///
/// The subject/clipper roles are chosen by a swap-symmetric rule so that
/// `convex_intersection(p, q)` and `convex_intersection(q, p)` return the
/// identical polygon, making the intersection area exactly commutative.
/// Results with area below [`DEGENERATE_AREA_EPS`] are reported as `None`.
pub fn convex_intersection(p: &Polygon2, q: &Polygon2) -> Option<Polygon2> {
    let (subject, clipper) = if p.verts.len() != q.verts.len() {
        if p.verts.len() > q.verts.len() {
            (p, q)
        } else {
            (q, p)
        }
    } else if lex_less(&p.verts, &q.verts) {
        (p, q)
    } else {
        (q, p)
    };

    let mut work: Vec<Point2> = subject.verts.clone();
    let mut scratch: Vec<Point2> = Vec::with_capacity(work.len() + clipper.verts.len());
    let nc = clipper.verts.len();
    for i in 0..nc {
        let a = clipper.verts[i];
        let b = clipper.verts[(i + 1) % nc];
        clip_halfplane(&work, a, b, &mut scratch);
        std::mem::swap(&mut work, &mut scratch);
        if work.len() < 3 {
            return None;
        }
    }
    if signed_area(&work) < DEGENERATE_AREA_EPS {
        return None;
    }
    Some(Polygon2::from_ccw_unchecked(work))
}

/// Area of the part of `poly` strictly past the line through `origin` with
/// outward normal `n` (the open half-plane `n . (x - origin) > 0`).
pub fn area_beyond_halfplane(poly: &Polygon2, origin: Point2, n: Vec2) -> f64 {
    // Clip against the complementary half-plane spanned left of `dir`,
    // where dir = n rotated -90 degrees so that "left" is the outside.
    let dir = Vec2::new(n.y, -n.x);
    let a = origin;
    let b = origin + dir;
    let mut out = Vec::with_capacity(poly.verts.len() + 2);
    clip_halfplane(&poly.verts, a, b, &mut out);
    if out.len() < 3 {
        return 0.0;
    }
    signed_area(&out).max(0.0)
}

/// Clip `poly` to the closed half-plane `n . (x - origin) <= 0`.
pub fn clip_to_halfplane(poly: &Polygon2, origin: Point2, n: Vec2) -> Option<Polygon2> {
    // "Inside" is the left of dir = n rotated +90 degrees.
    let dir = Vec2::new(-n.y, n.x);
    let a = origin;
    let b = origin + dir;
    let mut out = Vec::with_capacity(poly.verts.len() + 2);
    clip_halfplane(&poly.verts, a, b, &mut out);
    if out.len() < 3 || signed_area(&out) < DEGENERATE_AREA_EPS {
        return None;
    }
    Some(Polygon2::from_ccw_unchecked(out))
}

/// Frontal circular sector: everything closer than `radius` to `center`
/// within `half_angle` of `heading`.
#[derive(Debug, Clone, Copy)]
pub struct Sector {
    pub center: Point2,
    /// Unit vector along the desired velocity at the center.
    pub heading: Vec2,
    pub radius: f64,
    pub half_angle: f64,
}

impl Sector {
    pub fn new(center: Point2, heading: Vec2, radius: f64, half_angle: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Geometry("sector radius must be positive".into()));
        }
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Geometry(
                "sector half-angle must lie in (0, pi/2)".into(),
            ));
        }
        Ok(Self {
            center,
            heading: heading.normalized(),
            radius,
            half_angle,
        })
    }

    /// Membership is strict on both conditions (`r < R`, frontal cosine
    /// strictly above `cos(half_angle)`); the center itself is excluded
    /// because its direction is undefined.
    pub fn contains(&self, p: Point2) -> bool {
        let d = p - self.center;
        let r = d.norm();
        if r <= 0.0 || r >= self.radius {
            return false;
        }
        let e_r = Vec2::new(d.x / r, d.y / r);
        self.heading.dot(e_r) > self.half_angle.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon2 {
        Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn triangle_area_is_half() {
        let t = Polygon2::triangle(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        )
        .unwrap();
        assert_eq!(t.area(), 0.5);
    }

    #[test]
    fn unit_square_area() {
        assert_eq!(unit_square().area(), 1.0);
    }

    #[test]
    fn pentagon_area_matches_monte_carlo() {
        let pent = Polygon2::new(vec![
            Point2::new(0.12, 0.05),
            Point2::new(0.83, 0.11),
            Point2::new(0.95, 0.61),
            Point2::new(0.48, 0.93),
            Point2::new(0.05, 0.55),
        ])
        .unwrap();
        let mut state = 0xfeed_beefu64;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            (z ^ (z >> 31)) >> 11
        };
        let n = 10_000_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            let x = next() as f64 / (1u64 << 53) as f64;
            let y = next() as f64 / (1u64 << 53) as f64;
            if pent.contains(Point2::new(x, y)) {
                hits += 1;
            }
        }
        let mc = hits as f64 / n as f64;
        let rel = (pent.area() - mc).abs() / pent.area();
        assert!(rel < 1e-3, "relative area error {rel}");
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let t = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(t.area() > 0.0);
        assert!(signed_area(t.vertices()) > 0.0);
    }

    #[test]
    fn degenerate_polygon_is_flagged() {
        let t = Polygon2::triangle(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        )
        .unwrap();
        assert_eq!(t.area(), 0.0);
        assert!(t.is_degenerate());
    }

    #[test]
    fn nonconvex_rejected() {
        let r = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.2),
            Point2::new(2.0, 2.0),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn translate_identity_and_shift() {
        let sq = unit_square();
        let same = translate(&sq, Vec2::ZERO);
        assert_eq!(sq, same);
        let moved = translate(&sq, Vec2::new(0.5, 0.0));
        assert_eq!(moved.vertices()[0], Point2::new(0.5, 0.0));
        assert_eq!(moved.area(), sq.area());
    }

    #[test]
    fn self_intersection_is_identity() {
        let sq = unit_square();
        let i = convex_intersection(&sq, &sq).unwrap();
        assert_eq!(i.area(), sq.area());
    }

    #[test]
    fn shifted_square_overlap() {
        let sq = unit_square();
        let shifted = translate(&sq, Vec2::new(0.5, 0.0));
        let i = convex_intersection(&sq, &shifted).unwrap();
        assert!((i.area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn disjoint_intersection_is_empty() {
        let sq = unit_square();
        let far = translate(&sq, Vec2::new(3.0, 0.0));
        assert!(convex_intersection(&sq, &far).is_none());
    }

    proptest::proptest! {
        /// Intersection is exactly commutative in area, bounded by the
        /// smaller input, and equivariant under joint translation.
        #[test]
        fn intersection_properties(
            xs in proptest::collection::vec(-1.0f64..1.0, 12),
            shift in proptest::collection::vec(-0.5f64..0.5, 2),
        ) {
            let tri = |c: &[f64]| {
                let pts = vec![
                    Point2::new(c[0], c[1]),
                    Point2::new(c[2], c[3]),
                    Point2::new(c[4], c[5]),
                ];
                if signed_area(&pts).abs() > 1e-3 {
                    Some(Polygon2::new(pts).unwrap())
                } else {
                    None
                }
            };
            let (Some(t1), Some(t2)) = (tri(&xs[..6]), tri(&xs[6..])) else {
                return Ok(());
            };
            let a = convex_intersection(&t1, &t2).map(|p| p.area());
            let b = convex_intersection(&t2, &t1).map(|p| p.area());
            proptest::prop_assert_eq!(a, b);
            if let Some(a) = a {
                proptest::prop_assert!(a <= t1.area().min(t2.area()) + 1e-12);
            }
            let v = Vec2::new(shift[0], shift[1]);
            proptest::prop_assert!((translate(&t1, v).area() - t1.area()).abs() < 1e-12);
            let moved = convex_intersection(&translate(&t1, v), &translate(&t2, v))
                .map_or(0.0, |p| p.area());
            proptest::prop_assert!((a.unwrap_or(0.0) - moved).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_membership() {
        let s = Sector::new(
            Point2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            1.0,
            std::f64::consts::FRAC_PI_4,
        )
        .unwrap();
        // Ahead at half radius.
        assert!(s.contains(Point2::new(0.5, 0.0)));
        // Behind the center.
        assert!(!s.contains(Point2::new(-0.5, 0.0)));
        // Exactly at distance R: excluded by the strict inequality.
        assert!(!s.contains(Point2::new(1.0, 0.0)));
        // Center excluded.
        assert!(!s.contains(Point2::new(0.0, 0.0)));
        // Outside the half-angle.
        assert!(!s.contains(Point2::new(0.1, 0.2)));
        // Inside the cone off-axis.
        assert!(s.contains(Point2::new(0.5, 0.3)));
    }

    #[test]
    fn sector_rotation_invariance() {
        let center = Point2::new(0.3, -0.2);
        let mut seed = 7u64;
        let mut next = move || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let ang0 = next() * std::f64::consts::TAU;
            let heading = Vec2::new(ang0.cos(), ang0.sin());
            let s = Sector::new(center, heading, 0.8, 0.7).unwrap();
            let p = Point2::new(
                center.x + 2.0 * (next() - 0.5),
                center.y + 2.0 * (next() - 0.5),
            );
            let rot = next() * std::f64::consts::TAU;
            let (c, sn) = (rot.cos(), rot.sin());
            let rotate = |v: Vec2| Vec2::new(c * v.x - sn * v.y, sn * v.x + c * v.y);
            let hr = rotate(heading);
            let pr = center + rotate(p - center);
            let sr = Sector::new(center, hr, 0.8, 0.7).unwrap();
            let d = (p - center).norm();
            // Skip points within floating tolerance of the sector boundary.
            let cosang = if d > 0.0 {
                heading.dot(Vec2::new((p.x - center.x) / d, (p.y - center.y) / d))
            } else {
                0.0
            };
            if (d - 0.8).abs() < 1e-9 || (cosang - 0.7f64.cos()).abs() < 1e-9 {
                continue;
            }
            assert_eq!(s.contains(p), sr.contains(pr));
        }
    }
}
