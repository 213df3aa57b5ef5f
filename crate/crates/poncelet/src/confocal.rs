//! The confocal family of conics spanned by a caustic ellipse.
//!
//! A base ellipse `c` with semiaxes `a_c > b_c > 0` spans the family
//!
//! ```text
//! x²/(a_c² + k) + y²/(b_c² + k) = 1,
//! ```
//!
//! whose members share the foci `(±d, 0)`, `d² = a_c² − b_c²`: ellipses for
//! `k > 0` (and `c` itself at `k = 0`), hyperbolas for
//! `−a_c² < k < −b_c²`.  Through every point strictly outside `c` and off
//! the axes pass exactly one ellipse `k_e ≥ 0` and one hyperbola `k_h` of
//! the family; the pair `(k_e, k_h)` are the *elliptic coordinates* of the
//! point, confined to the band `−a_c² ≤ k_h ≤ −b_c² ≤ 0 ≤ k_e`.
//!
//! Each confocal ellipse `e` carries the standard parameterization
//! `P(t) = (a_e cos t, b_e sin t)`; tangent vectors of `e` and of the
//! caustic at the same `t` are `t_e(t) = (−a_e sin t, b_e cos t)` and
//! `t_c(t) = (−a_c sin t, b_c cos t)`, related by
//! `‖t_e‖² − ‖t_c‖² = k_e` and `‖t_c(t)‖² = −k_h(t)`.

use crate::ellipfn::Modulus;
use crate::error::{Error, Result};

/// A point of the plane in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn distance_to(&self, other: Point) -> f64 {
        (*self - other).norm()
    }
}

/// A displacement / direction in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(&self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product (positive for a left turn).
    #[inline]
    pub fn cross(&self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(*self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vec2> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(Vec2::new(self.x / n, self.y / n))
        }
    }
}

impl std::ops::Sub for Point {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Point) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add<Vec2> for Point {
    type Output = Point;
    #[inline]
    fn add(self, rhs: Vec2) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub<Vec2> for Point {
    type Output = Point;
    #[inline]
    fn sub(self, rhs: Vec2) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Sign selector for a square-root branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Sign::Neg => -v,
            Sign::Pos => v,
        }
    }

    /// The sign of a coordinate (`Pos` for `0.0`).
    #[inline]
    pub fn of(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }
}

/// The confocal family spanned by a caustic with semiaxes `a_c >= b_c > 0`.
///
/// Carries the focal distance `d = √(a_c² − b_c²)` and the modulus
/// `m = d/a_c` of the associated elliptic functions.  `a_c = b_c` (a
/// circular caustic, `m = 0`) is accepted; the family is then concentric
/// circles and the elliptic-coordinate conversions, which divide by `d`,
/// are rejected at call time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalFamily {
    a_c: f64,
    b_c: f64,
    d: f64,
    modulus: Modulus,
}

impl ConfocalFamily {
    pub fn new(a_c: f64, b_c: f64) -> Result<Self> {
        if !(a_c.is_finite() && b_c.is_finite()) || b_c <= 0.0 || a_c < b_c {
            return Err(Error::InvalidSemiaxes { a_c, b_c });
        }
        let d = (a_c * a_c - b_c * b_c).max(0.0).sqrt();
        let modulus = Modulus::new(d / a_c)?;
        Ok(ConfocalFamily {
            a_c,
            b_c,
            d,
            modulus,
        })
    }

    #[inline]
    pub fn a_c(&self) -> f64 {
        self.a_c
    }

    #[inline]
    pub fn b_c(&self) -> f64 {
        self.b_c
    }

    /// Focal distance `d = √(a_c² − b_c²)`.
    #[inline]
    pub fn focal_distance(&self) -> f64 {
        self.d
    }

    /// Modulus `m = d / a_c` of the elliptic functions tied to the family.
    #[inline]
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    #[inline]
    pub fn is_circular(&self) -> bool {
        self.d == 0.0
    }

    /// The confocal ellipse at family parameter `k_e >= 0`.
    pub fn ellipse(&self, k_e: f64) -> Result<ConfocalEllipse> {
        if !k_e.is_finite() || k_e < 0.0 {
            return Err(Error::OutsideBand {
                k_e,
                k_h: f64::NAN,
            });
        }
        Ok(ConfocalEllipse {
            k_e,
            a_e: (self.a_c * self.a_c + k_e).sqrt(),
            b_e: (self.b_c * self.b_c + k_e).sqrt(),
        })
    }

    /// Hyperbola-family parameter along the caustic:
    /// `k_h(t) = −(a_c² sin² t + b_c² cos² t) = −‖t_c(t)‖²`.
    #[inline]
    pub fn k_h_of_t(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        -(self.a_c * self.a_c * s * s + self.b_c * self.b_c * c * c)
    }

    /// Point of the caustic at parameter `t`.
    #[inline]
    pub fn caustic_point(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        Point::new(self.a_c * c, self.b_c * s)
    }

    /// Tangent vector `t_c(t) = (−a_c sin t, b_c cos t)` of the caustic.
    #[inline]
    pub fn caustic_tangent(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        Vec2::new(-self.a_c * s, self.b_c * c)
    }

    /// `‖t_c(t)‖ = √(−k_h(t))`, the speed scale along the caustic.
    #[inline]
    pub fn caustic_tangent_norm(&self, t: f64) -> f64 {
        (-self.k_h_of_t(t)).sqrt()
    }
}

/// A member ellipse of a confocal family: `x²/a_e² + y²/b_e² = 1` with
/// `a_e² = a_c² + k_e`, `b_e² = b_c² + k_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalEllipse {
    k_e: f64,
    a_e: f64,
    b_e: f64,
}

impl ConfocalEllipse {
    /// Assembles an ellipse from precomputed parts (internal: callers must
    /// guarantee `a_e² − k_e = a_c²` and `b_e² − k_e = b_c²` up to rounding).
    pub(crate) fn from_parts(k_e: f64, a_e: f64, b_e: f64) -> Self {
        ConfocalEllipse { k_e, a_e, b_e }
    }

    #[inline]
    pub fn k_e(&self) -> f64 {
        self.k_e
    }

    #[inline]
    pub fn a_e(&self) -> f64 {
        self.a_e
    }

    #[inline]
    pub fn b_e(&self) -> f64 {
        self.b_e
    }

    /// Point at parameter `t`: `(a_e cos t, b_e sin t)`.
    #[inline]
    pub fn point_at(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        Point::new(self.a_e * c, self.b_e * s)
    }

    /// Tangent vector `t_e(t) = (−a_e sin t, b_e cos t)`.
    #[inline]
    pub fn tangent_at(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        Vec2::new(-self.a_e * s, self.b_e * c)
    }

    /// Parameter of a point assumed to lie on the ellipse.
    #[inline]
    pub fn parameter_of(&self, p: Point) -> f64 {
        (p.y / self.b_e).atan2(p.x / self.a_e)
    }

    /// Residual of the implicit equation, `x²/a_e² + y²/b_e² − 1`
    /// (zero on the ellipse, negative inside).
    #[inline]
    pub fn implicit_residual(&self, p: Point) -> f64 {
        (p.x / self.a_e).powi(2) + (p.y / self.b_e).powi(2) - 1.0
    }
}

/// A member hyperbola: `x²/a_h² − y²/b_h² = 1` with `a_h² = a_c² + k_h`,
/// `b_h² = −(b_c² + k_h)`, both positive inside the open band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalHyperbola {
    pub k_h: f64,
    pub a_h: f64,
    pub b_h: f64,
}

/// Elliptic coordinates of a point: the family parameters of the confocal
/// ellipse and hyperbola through it.
///
/// Band invariant: `−a_c² ≤ k_h ≤ −b_c² ≤ 0 ≤ k_e`; the closed boundary
/// corresponds to points on a symmetry axis (where the hyperbola
/// degenerates) or on the caustic itself (`k_e = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoords {
    k_e: f64,
    k_h: f64,
}

impl EllipticCoords {
    /// Validates the band (with a small relative slack for roundoff) and
    /// clamps onto it.
    pub fn new(k_e: f64, k_h: f64, fam: &ConfocalFamily) -> Result<Self> {
        let a2 = fam.a_c() * fam.a_c();
        let b2 = fam.b_c() * fam.b_c();
        let slack = 1e-9 * (a2 + k_e.abs());
        if !k_e.is_finite() || !k_h.is_finite() {
            return Err(Error::OutsideBand { k_e, k_h });
        }
        if k_e < -slack || k_h < -a2 - slack || k_h > -b2 + slack {
            return Err(Error::OutsideBand { k_e, k_h });
        }
        Ok(EllipticCoords {
            k_e: k_e.max(0.0),
            k_h: k_h.clamp(-a2, -b2),
        })
    }

    #[inline]
    pub fn k_e(&self) -> f64 {
        self.k_e
    }

    #[inline]
    pub fn k_h(&self) -> f64 {
        self.k_h
    }

    /// True when the point sits on a symmetry axis, i.e. `k_h` at a band
    /// boundary, where the confocal hyperbola degenerates.
    pub fn on_axis(&self, fam: &ConfocalFamily) -> bool {
        let a2 = fam.a_c() * fam.a_c();
        let b2 = fam.b_c() * fam.b_c();
        let eps = 1e-12 * a2;
        (self.k_h + a2).abs() <= eps || (self.k_h + b2).abs() <= eps
    }
}

/// Point plus the two confocal tangent vectors at the same parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    /// `P(t) = (a_e cos t, b_e sin t)` on the ellipse.
    pub p: Point,
    /// Tangent `t_e(t)` of the ellipse.
    pub t_e: Vec2,
    /// Tangent `t_c(t)` of the caustic at the same `t`.
    pub t_c: Vec2,
    /// `k_h(t) = −‖t_c(t)‖²`, the hyperbola parameter of `P`.
    pub k_h: f64,
}

/// Half-angle data of the two caustic tangents through a point with
/// elliptic coordinates `(k_e, k_h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfAngle {
    /// `sin²(θ/2) = k_e / (k_e − k_h)`.
    pub sin_sq_half: f64,
    /// `tan(θ/2) = √(−k_e/k_h)` (positive branch).
    pub tan_half: f64,
    /// `sin θ = 2 √(−k_e k_h) / (k_e − k_h)`.
    pub sin_theta: f64,
}

impl HalfAngle {
    /// The full angle `θ ∈ (0, π)`.
    #[inline]
    pub fn theta(&self) -> f64 {
        2.0 * self.tan_half.atan()
    }
}

/// Elliptic coordinates of a Cartesian point (outside or on the caustic).
///
/// `k_e`, `k_h` are the roots of
/// `k² + (a_c² + b_c² − x² − y²) k + (a_c² b_c² − b_c² x² − a_c² y²) = 0`,
/// separated by the confocal band.  Points on a symmetry axis land on the
/// closed band boundary (flagged by [`EllipticCoords::on_axis`]); points
/// strictly inside the caustic are rejected.
pub fn elliptic_from_cartesian(p: Point, fam: &ConfocalFamily) -> Result<EllipticCoords> {
    if fam.is_circular() {
        return Err(Error::CircularFamily);
    }
    let a2 = fam.a_c() * fam.a_c();
    let b2 = fam.b_c() * fam.b_c();
    let r2 = p.x * p.x + p.y * p.y;
    // k² + pk + q with roots k_e >= k_h.
    let pc = a2 + b2 - r2;
    let q = a2 * b2 - b2 * p.x * p.x - a2 * p.y * p.y;
    let disc = pc * pc - 4.0 * q;
    if disc < 0.0 {
        // Only roundoff can drive the discriminant negative (the quadratic
        // always has real roots); treat as a double root.
        let k = -0.5 * pc;
        return EllipticCoords::new(k, k, fam);
    }
    let s = disc.sqrt();
    // Stable quadratic: compute the larger-magnitude root first.
    let k_big = if pc >= 0.0 {
        (-pc - s) * 0.5
    } else {
        (-pc + s) * 0.5
    };
    let k_other = if k_big == 0.0 { 0.0 } else { q / k_big };
    let (k_e, k_h) = if k_big >= k_other {
        (k_big, k_other)
    } else {
        (k_other, k_big)
    };
    if k_e < -1e-9 * a2 {
        return Err(Error::InsideCaustic { x: p.x, y: p.y });
    }
    EllipticCoords::new(k_e, k_h, fam).map_err(|e| match e {
        // A band violation on conversion means the point is inside c.
        Error::OutsideBand { .. } if q > 0.0 => Error::InsideCaustic { x: p.x, y: p.y },
        other => other,
    })
}

/// Cartesian point with given elliptic coordinates and quadrant signs.
///
/// `x² = (a_c² + k_e)(a_c² + k_h) / d²`,
/// `y² = −(b_c² + k_e)(b_c² + k_h) / d²`; `signs` picks the quadrant.
pub fn cartesian_from_elliptic(
    coords: &EllipticCoords,
    signs: (Sign, Sign),
    fam: &ConfocalFamily,
) -> Result<Point> {
    if fam.is_circular() {
        return Err(Error::CircularFamily);
    }
    let a2 = fam.a_c() * fam.a_c();
    let b2 = fam.b_c() * fam.b_c();
    let d2 = fam.focal_distance() * fam.focal_distance();
    let x2 = (a2 + coords.k_e()) * (a2 + coords.k_h()) / d2;
    let y2 = -(b2 + coords.k_e()) * (b2 + coords.k_h()) / d2;
    // The band guarantees non-negativity; clamp away roundoff.
    let x = x2.max(0.0).sqrt();
    let y = y2.max(0.0).sqrt();
    Ok(Point::new(signs.0.apply(x), signs.1.apply(y)))
}

/// Point and both confocal tangent vectors at parameter `t` of `ell`.
///
/// The frame satisfies `‖t_e‖² − ‖t_c‖² = k_e` and `k_h = −‖t_c‖²`.
pub fn point_and_tangents(t: f64, ell: &ConfocalEllipse, fam: &ConfocalFamily) -> TangentFrame {
    TangentFrame {
        p: ell.point_at(t),
        t_e: ell.tangent_at(t),
        t_c: fam.caustic_tangent(t),
        k_h: fam.k_h_of_t(t),
    }
}

/// Half-angle of the caustic-tangent pair at parameter `t` of `ell`.
///
/// Recovers the caustic semiaxes from `a_c² = a_e² − k_e`,
/// `b_c² = b_e² − k_e`, forms `k_h(t)`, and evaluates
/// `sin²(θ/2) = k_e/(k_e − k_h)`, `tan(θ/2) = √(−k_e/k_h)` (the positive
/// branch, matching the counter-clockwise orientation), and
/// `sin θ = 2√(−k_e k_h)/(k_e − k_h)`.
pub fn half_angle(t: f64, ell: &ConfocalEllipse) -> HalfAngle {
    let k_e = ell.k_e();
    let a_c2 = ell.a_e() * ell.a_e() - k_e;
    let b_c2 = ell.b_e() * ell.b_e() - k_e;
    let (s, c) = t.sin_cos();
    let k_h = -(a_c2 * s * s + b_c2 * c * c);
    HalfAngle {
        sin_sq_half: k_e / (k_e - k_h),
        tan_half: (-k_e / k_h).sqrt(),
        sin_theta: 2.0 * (-k_e * k_h).sqrt() / (k_e - k_h),
    }
}

/// The confocal hyperbola through the caustic parameter `t`:
/// `k_h = −(a_c² sin² t + b_c² cos² t)`, semiaxes `a_h = d |cos t|`,
/// `b_h = d |sin t|`.  Degenerates (one semiaxis zero) when `t` lies on an
/// axis, which is rejected.
pub fn hyperbola_from_t(t: f64, fam: &ConfocalFamily) -> Result<ConfocalHyperbola> {
    if fam.is_circular() {
        return Err(Error::CircularFamily);
    }
    let k_h = fam.k_h_of_t(t);
    let a2 = fam.a_c() * fam.a_c();
    let b2 = fam.b_c() * fam.b_c();
    let a_h2 = a2 + k_h;
    let b_h2 = -(b2 + k_h);
    let eps = 1e-24 * a2;
    if a_h2 <= eps || b_h2 <= eps {
        return Err(Error::DegenerateGeometry(format!(
            "hyperbola through t = {t} collapses onto a symmetry axis"
        )));
    }
    Ok(ConfocalHyperbola {
        k_h,
        a_h: a_h2.sqrt(),
        b_h: b_h2.sqrt(),
    })
}

/// Residual of the condition that the line through `P(t)` on `ell` tangent
/// to the caustic at `t'` actually touches there:
/// `b_c a_e cos t' cos t + a_c b_e sin t' sin t − a_c b_c`
/// (zero iff the caustic tangent at `t'` passes through `P(t)`).
pub fn tangency_residual(t: f64, ell: &ConfocalEllipse, t_prime: f64, fam: &ConfocalFamily) -> f64 {
    let (s, c) = t.sin_cos();
    let (sp, cp) = t_prime.sin_cos();
    fam.b_c() * ell.a_e() * cp * c + fam.a_c() * ell.b_e() * sp * s - fam.a_c() * fam.b_c()
}

/// Pole of the caustic tangent at `t'` with respect to `ell`.
///
/// The tangent line is `(cos t'/a_c) x + (sin t'/b_c) y = 1`; its pole
/// w.r.t. `x²/a_e² + y²/b_e² = 1` is `(a_e² cos t'/a_c, b_e² sin t'/b_c)`.
/// Caustic tangents never pass through the center, so the pole is always
/// finite.
pub fn pole_of_side(t_prime: f64, ell: &ConfocalEllipse, fam: &ConfocalFamily) -> Point {
    let (sp, cp) = t_prime.sin_cos();
    Point::new(
        ell.a_e() * ell.a_e() * cp / fam.a_c(),
        ell.b_e() * ell.b_e() * sp / fam.b_c(),
    )
}

/// Curvature radius of the caustic at parameter `t`:
/// `ρ_c(t) = ‖t_c(t)‖³ / (a_c b_c)`.
pub fn caustic_curvature_radius(t: f64, fam: &ConfocalFamily) -> f64 {
    fam.caustic_tangent_norm(t).powi(3) / (fam.a_c() * fam.b_c())
}
