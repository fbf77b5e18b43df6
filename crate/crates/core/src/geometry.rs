//! Planar points, segments and convex polygon utilities.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::Real;

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counter-clockwise rotation by 90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    pub fn cast<U: Real>(self) -> Vec2<U> {
        Vec2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x.to_f64_lossy(), self.y.to_f64_lossy()]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self::new(T::lit(a[0]), T::lit(a[1]))
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Div<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s)
    }
}

/// Which side of a directed segment a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// The half-plane `(x - a) · perp(b - a) > 0`.
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Closed straight segment from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub a: Vec2<T>,
    pub b: Vec2<T>,
}

impl<T: Real> Segment<T> {
    pub fn new(a: Vec2<T>, b: Vec2<T>) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> T {
        self.a.dist(self.b)
    }

    pub fn tangent(&self) -> Vec2<T> {
        (self.b - self.a).normalized()
    }

    /// Arc-length coordinate of the orthogonal projection of `p`.
    pub fn param(&self, p: Vec2<T>) -> T {
        (p - self.a).dot(self.tangent())
    }

    pub fn point_at(&self, s: T) -> Vec2<T> {
        self.a + self.tangent() * s
    }

    pub fn distance_to_point(&self, p: Vec2<T>) -> T {
        let d = self.b - self.a;
        let len2 = d.dot(d);
        if len2 == T::zero() {
            return p.dist(self.a);
        }
        let t = ((p - self.a).dot(d) / len2).max(T::zero()).min(T::one());
        p.dist(self.a + d * t)
    }

    /// True when `p` lies on the closed segment within `tol`.
    pub fn contains(&self, p: Vec2<T>, tol: T) -> bool {
        self.distance_to_point(p) <= tol
    }

    pub fn side_of(&self, p: Vec2<T>) -> Side {
        if (p - self.a).dot((self.b - self.a).perp()) > T::zero() {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Hausdorff distance between two segments (both are convex, so
    /// the supremum is attained at an endpoint).
    pub fn hausdorff(&self, o: &Segment<T>) -> T {
        let d1 = self.distance_to_point(o.a).max(self.distance_to_point(o.b));
        let d2 = o.distance_to_point(self.a).max(o.distance_to_point(self.b));
        d1.max(d2)
    }
}

/// Signed area of a polygon (positive for counter-clockwise order).
pub fn signed_area<T: Real>(poly: &[Vec2<T>]) -> T {
    let n = poly.len();
    if n < 3 {
        return T::zero();
    }
    let mut s = T::zero();
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    s * T::lit(0.5)
}

pub fn triangle_signed_area<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    (b - a).cross(c - a) * T::lit(0.5)
}

/// Clips the convex polygon `subject` against the convex counter-clockwise
/// polygon `clip` (Sutherland–Hodgman).
pub fn clip_convex<T: Real>(subject: &[Vec2<T>], clip: &[Vec2<T>]) -> Vec<Vec2<T>> {
    let mut output: Vec<Vec2<T>> = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let ea = clip[i];
        let eb = clip[(i + 1) % m];
        let edge = eb - ea;
        let input = std::mem::take(&mut output);
        let inside = |p: Vec2<T>| edge.cross(p - ea) >= T::zero();
        let n = input.len();
        for k in 0..n {
            let cur = input[k];
            let prev = input[(k + n - 1) % n];
            let cur_in = inside(cur);
            let prev_in = inside(prev);
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(prev, cur, ea, eb));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(prev, cur, ea, eb));
            }
        }
    }
    output
}

fn line_intersection<T: Real>(p: Vec2<T>, q: Vec2<T>, a: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
    let e = b - a;
    let dp = e.cross(p - a);
    let dq = e.cross(q - a);
    let t = dp / (dp - dq);
    p + (q - p) * t
}

/// Removes consecutive duplicates (including wrap-around) closer than `tol`.
pub fn dedup_ring<T: Real>(poly: &[Vec2<T>], tol: T) -> Vec<Vec2<T>> {
    let mut out: Vec<Vec2<T>> = Vec::with_capacity(poly.len());
    for &p in poly {
        if out.last().is_none_or(|&q: &Vec2<T>| q.dist(p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= tol {
        out.pop();
    }
    out
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec2<T>,
    pub max: Vec2<T>,
}

impl<T: Real> Aabb<T> {
    pub fn from_points(pts: &[Vec2<T>]) -> Self {
        let mut min = pts[0];
        let mut max = pts[0];
        for p in &pts[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self { min, max }
    }

    pub fn overlaps(&self, o: &Self, tol: T) -> bool {
        self.min.x <= o.max.x + tol
            && o.min.x <= self.max.x + tol
            && self.min.y <= o.max.y + tol
            && o.min.y <= self.max.y + tol
    }

    pub fn diameter(&self) -> T {
        self.min.dist(self.max)
    }

    pub fn union(&self, o: &Self) -> Self {
        Self {
            min: Vec2::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Vec2::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }
}
