//! Billiard polygons in an ellipse with a confocal caustic.
//!
//! A billiard trajectory inside an ellipse `e` whose segments all touch a
//! confocal ellipse `c` (the caustic) is rigid in a strong sense: in the
//! canonical parameter `ũ` defined by `t = am(ũ) + π/2` (with the modulus
//! `m = d/a_c` of the family), every reflection advances the vertex by the
//! same shift `2Δũ`, and the contact points sit exactly halfway between
//! consecutive vertices.  Concretely,
//!
//! ```text
//! P_i = (−a_e sn ũ_i,  b_e cn ũ_i),        ũ_i = ũ_0 + 2iΔũ,
//! Q_i = (−a_c sn (ũ_i + Δũ),  b_c cn (ũ_i + Δũ)),
//! ```
//!
//! where `Q_i` is the contact point of the side `P_i P_{i+1}` and the table
//! semiaxes are locked to the spacing by `a_e = a_c dn Δũ / cn Δũ`,
//! `b_e = b_c / cn Δũ`.  The trajectory closes after `N` reflections while
//! winding `τ` times around the caustic exactly when `Δũ = 2τK/N` with
//! `gcd(N, τ) = 1` and `2τ < N`; by the Poncelet closure property the same
//! `(N, τ)` then closes from *every* starting point `ũ_0`.
//!
//! The module also exposes the two-parameter chart
//! `Y(ũ, ṽ) = (−a_c sn ũ dn ṽ / cn ṽ,  b_c cn ũ / cn ṽ)`, which reaches the
//! vertices at `ṽ = Δũ`, the contacts at `ṽ = 0`, and the intersections of
//! extended sides at `ṽ = (j+1)Δũ` — the grid of a periodic billiard — with
//! points escaping to infinity where `cn ṽ = 0`, plus an independent
//! geometric construction of the same polygon by explicit reflection, used
//! throughout the tests as an oracle.

use crate::confocal::{ConfocalEllipse, ConfocalFamily, Point, Vec2};
use crate::ellipfn::{complete_k, incomplete_f, jacobi_am, jacobi_sncndn};
use crate::error::{Error, Result};

/// Threshold on `|cn ṽ|` below which a chart point is treated as being at
/// infinity (the projective boundary of the chart).
const CHART_INFINITY_EPS: f64 = 1e-12;

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Specification of a billiard polygon: family, spacing, start, length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilliardConfig {
    fam: ConfocalFamily,
    delta_u: f64,
    u0: f64,
    count: usize,
    period: Option<(usize, usize)>,
}

impl BilliardConfig {
    /// A periodic billiard closing after `n` reflections with turning
    /// number `tau`: spacing `Δũ = 2τK/n`, requiring `n ≥ 3`,
    /// `1 ≤ τ`, `2τ < n`, and `gcd(n, τ) = 1`.
    pub fn periodic(fam: ConfocalFamily, n: usize, tau: usize, u0: f64) -> Result<Self> {
        if n < 3 || tau == 0 || 2 * tau >= n {
            return Err(Error::InvalidConfig(format!(
                "period ({n}, {tau}) requires n >= 3 and 1 <= tau < n/2"
            )));
        }
        if gcd(n, tau) != 1 {
            return Err(Error::InvalidConfig(format!(
                "period ({n}, {tau}) is not primitive: gcd = {}",
                gcd(n, tau)
            )));
        }
        if !u0.is_finite() {
            return Err(Error::InvalidConfig(format!("non-finite u0 = {u0}")));
        }
        let k = complete_k(fam.modulus());
        Ok(BilliardConfig {
            fam,
            delta_u: 2.0 * tau as f64 * k / n as f64,
            u0,
            count: n,
            period: Some((n, tau)),
        })
    }

    /// An open trajectory with explicit spacing `Δũ ∈ (0, K)`, traced for
    /// `count ≥ 2` vertices (`count − 1` reflections; the chain does not
    /// close unless `Δũ/K` happens to be rational).
    pub fn aperiodic(fam: ConfocalFamily, delta_u: f64, u0: f64, count: usize) -> Result<Self> {
        let k = complete_k(fam.modulus());
        if !(delta_u.is_finite() && delta_u > 0.0 && delta_u < k) {
            return Err(Error::InvalidConfig(format!(
                "spacing delta_u = {delta_u} must lie in (0, K) with K = {k}"
            )));
        }
        if !u0.is_finite() {
            return Err(Error::InvalidConfig(format!("non-finite u0 = {u0}")));
        }
        if count < 2 {
            return Err(Error::InvalidConfig(format!(
                "count = {count} leaves no side to build"
            )));
        }
        Ok(BilliardConfig {
            fam,
            delta_u,
            u0,
            count,
            period: None,
        })
    }

    /// Overrides the number of traced vertices.  A periodic configuration
    /// stays aware of its period, but the polygon is treated as closed only
    /// when `count` equals the period length.
    pub fn with_count(mut self, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidConfig(format!(
                "count = {count} leaves no side to build"
            )));
        }
        self.count = count;
        Ok(self)
    }

    /// Restarts the same trajectory shape at a different `ũ_0`.
    pub fn with_start(mut self, u0: f64) -> Result<Self> {
        if !u0.is_finite() {
            return Err(Error::InvalidConfig(format!("non-finite u0 = {u0}")));
        }
        self.u0 = u0;
        Ok(self)
    }

    #[inline]
    pub fn family(&self) -> &ConfocalFamily {
        &self.fam
    }

    #[inline]
    pub fn delta_u(&self) -> f64 {
        self.delta_u
    }

    #[inline]
    pub fn u0(&self) -> f64 {
        self.u0
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    /// `(N, τ)` for configurations built from a closure period.
    #[inline]
    pub fn period(&self) -> Option<(usize, usize)> {
        self.period
    }

    /// The table ellipse determined by the spacing:
    /// `a_e = a_c dn Δũ / cn Δũ`, `b_e = b_c / cn Δũ`.
    pub fn table(&self) -> ConfocalEllipse {
        table_for_spacing(&self.fam, self.delta_u)
    }
}

/// Table ellipse whose billiard with caustic `fam` has spacing `delta_u`.
///
/// The semiaxes `a_e = a_c dn Δũ / cn Δũ`, `b_e = b_c / cn Δũ` satisfy
/// `a_e² − b_e² = a_c² − b_c²` identically, so the table is a member of
/// the family with `k_e = (b_c sn Δũ / cn Δũ)²`.
pub fn table_for_spacing(fam: &ConfocalFamily, delta_u: f64) -> ConfocalEllipse {
    let t = jacobi_sncndn(delta_u, fam.modulus());
    let a_e = fam.a_c() * t.dn / t.cn;
    let b_e = fam.b_c() / t.cn;
    let k_e = (fam.b_c() * t.sn / t.cn).powi(2);
    ConfocalEllipse::from_parts(k_e, a_e, b_e)
}

/// Table ellipse of the `(n, τ)`-periodic billiard around `fam`.
pub fn ellipse_for_period(fam: &ConfocalFamily, n: usize, tau: usize) -> Result<ConfocalEllipse> {
    Ok(BilliardConfig::periodic(*fam, n, tau, 0.0)?.table())
}

/// Inverts the spacing–table relation: the `Δũ ∈ (0, K)` whose billiard in
/// `ell` has caustic `fam`, from `cn Δũ = b_c / b_e`.
pub fn delta_from_ellipse(ell: &ConfocalEllipse, fam: &ConfocalFamily) -> Result<f64> {
    let ratio = fam.b_c() / ell.b_e();
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "table semiaxis b_e = {} does not strictly contain the caustic b_c = {}",
            ell.b_e(),
            fam.b_c()
        )));
    }
    Ok(incomplete_f(ratio.acos(), fam.modulus()))
}

/// A constructed billiard polygon (closed) or trajectory chain (open).
#[derive(Debug, Clone, PartialEq)]
pub struct Billiard {
    config: BilliardConfig,
    table: ConfocalEllipse,
    closed: bool,
    vertices: Vec<Point>,
    contacts: Vec<Point>,
    vertex_u: Vec<f64>,
    vertex_t: Vec<f64>,
    contact_u: Vec<f64>,
    contact_t: Vec<f64>,
    perimeter: f64,
}

/// Builds the polygon from its configuration.
///
/// Vertices are `P_i = (−a_e sn ũ_i, b_e cn ũ_i)` at `ũ_i = ũ_0 + 2iΔũ`
/// for `i = 0, …, count−1`; contact points `Q_i` (one per side) sit at
/// `ũ_i + Δũ` on the caustic.  A periodic configuration traced for exactly
/// one period yields a closed polygon with `count` sides; anything else is
/// an open chain with `count − 1` sides.
pub fn build_billiard(config: &BilliardConfig) -> Result<Billiard> {
    let fam = config.fam;
    let table = config.table();
    let closed = matches!(config.period, Some((n, _)) if n == config.count);
    let n_sides = if closed {
        config.count
    } else {
        config.count - 1
    };

    let m = fam.modulus();
    let mut vertices = Vec::with_capacity(config.count);
    let mut vertex_u = Vec::with_capacity(config.count);
    let mut vertex_t = Vec::with_capacity(config.count);
    let mut contacts = Vec::with_capacity(n_sides);
    let mut contact_u = Vec::with_capacity(n_sides);
    let mut contact_t = Vec::with_capacity(n_sides);

    for i in 0..config.count {
        let u = config.u0 + 2.0 * i as f64 * config.delta_u;
        let j = jacobi_sncndn(u, m);
        vertices.push(Point::new(-table.a_e() * j.sn, table.b_e() * j.cn));
        vertex_u.push(u);
        vertex_t.push(jacobi_am(u, m) + std::f64::consts::FRAC_PI_2);
        if i < n_sides {
            let uq = u + config.delta_u;
            let jq = jacobi_sncndn(uq, m);
            contacts.push(Point::new(-fam.a_c() * jq.sn, fam.b_c() * jq.cn));
            contact_u.push(uq);
            contact_t.push(jacobi_am(uq, m) + std::f64::consts::FRAC_PI_2);
        }
    }

    let mut perimeter = 0.0;
    for i in 0..n_sides {
        let a = vertices[i];
        let b = vertices[(i + 1) % config.count];
        perimeter += a.distance_to(b);
    }

    Ok(Billiard {
        config: *config,
        table,
        closed,
        vertices,
        contacts,
        vertex_u,
        vertex_t,
        contact_u,
        contact_t,
        perimeter,
    })
}

impl Billiard {
    #[inline]
    pub fn config(&self) -> &BilliardConfig {
        &self.config
    }

    #[inline]
    pub fn family(&self) -> &ConfocalFamily {
        &self.config.fam
    }

    #[inline]
    pub fn table(&self) -> &ConfocalEllipse {
        &self.table
    }

    /// True when the trajectory closes up into a polygon (periodic
    /// configuration traced for exactly one period).
    #[inline]
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of sides: `count` for a closed polygon, `count − 1` open.
    #[inline]
    pub fn side_count(&self) -> usize {
        self.contacts.len()
    }

    #[inline]
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Contact points, one per side (`Q_i` touches side `P_i P_{i+1}`).
    #[inline]
    pub fn contacts(&self) -> &[Point] {
        &self.contacts
    }

    #[inline]
    pub fn vertex_params_u(&self) -> &[f64] {
        &self.vertex_u
    }

    /// Vertex angle parameters `t_i = am(ũ_i) + π/2`, monotone and
    /// unbounded (they record the winding around the caustic).
    #[inline]
    pub fn vertex_params_t(&self) -> &[f64] {
        &self.vertex_t
    }

    #[inline]
    pub fn contact_params_u(&self) -> &[f64] {
        &self.contact_u
    }

    #[inline]
    pub fn contact_params_t(&self) -> &[f64] {
        &self.contact_t
    }

    #[inline]
    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    #[inline]
    pub fn delta_u(&self) -> f64 {
        self.config.delta_u
    }

    /// Turning number `τ` for periodic configurations.
    #[inline]
    pub fn turning_number(&self) -> Option<usize> {
        self.config.period.map(|(_, tau)| tau)
    }

    /// Vertex by extended index: cyclic for closed polygons, computed from
    /// the parameterization for open chains when `i` runs past the stored
    /// range.
    pub fn vertex_point(&self, i: usize) -> Point {
        if self.closed {
            self.vertices[i % self.vertices.len()]
        } else if i < self.vertices.len() {
            self.vertices[i]
        } else {
            let u = self.config.u0 + 2.0 * i as f64 * self.config.delta_u;
            let j = jacobi_sncndn(u, self.config.fam.modulus());
            Point::new(-self.table.a_e() * j.sn, self.table.b_e() * j.cn)
        }
    }

    /// Contact point by extended index (same cyclic/extended convention).
    pub fn contact_point(&self, i: usize) -> Point {
        if self.closed {
            self.contacts[i % self.contacts.len()]
        } else if i < self.contacts.len() {
            self.contacts[i]
        } else {
            let u = self.config.u0 + (2.0 * i as f64 + 1.0) * self.config.delta_u;
            let j = jacobi_sncndn(u, self.config.fam.modulus());
            Point::new(
                -self.config.fam.a_c() * j.sn,
                self.config.fam.b_c() * j.cn,
            )
        }
    }

    /// Moves one vertex off the true trajectory (and recomputes the
    /// perimeter).  Deliberate damage for negative controls: the displaced
    /// polygon no longer touches the caustic and the conserved quantities
    /// drift, which verification must detect.
    pub fn displace_vertex(&mut self, i: usize, dx: f64, dy: f64) {
        let n = self.vertices.len();
        let p = self.vertices[i % n];
        self.vertices[i % n] = Point::new(p.x + dx, p.y + dy);
        let n_sides = self.contacts.len();
        let mut perimeter = 0.0;
        for s in 0..n_sides {
            perimeter += self.vertices[s].distance_to(self.vertices[(s + 1) % n]);
        }
        self.perimeter = perimeter;
    }
}

/// Line `ux + vy = 1` through two points, as its coefficient pair.
/// Fails when the line passes through the origin (center of the family),
/// where no such normalization exists.
pub fn side_line_coeffs(p1: Point, p2: Point) -> Result<(f64, f64)> {
    let det = p1.x * p2.y - p2.x * p1.y;
    let scale = p1.distance_to(p2) * (p1.x.hypot(p1.y) + p2.x.hypot(p2.y));
    if det.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateGeometry(
            "side line passes through the center".to_string(),
        ));
    }
    Ok(((p2.y - p1.y) / det, (p1.x - p2.x) / det))
}

/// Coefficients of the caustic tangent line at canonical parameter `ũ`:
/// the side with contact parameter `ũ` is `ux + vy = 1` with
/// `u = −sn ũ / a_c`, `v = cn ũ / b_c`.
pub fn tangent_line_coords(u_contact: f64, fam: &ConfocalFamily) -> (f64, f64) {
    let j = jacobi_sncndn(u_contact, fam.modulus());
    (-j.sn / fam.a_c(), j.cn / fam.b_c())
}

/// Contact point of a side with the caustic, recovered *geometrically*
/// from the side's endpoints: the line `ux + vy = 1` through them touches
/// `x²/a_c² + y²/b_c² = 1` at `Q = (a_c² u, b_c² v)`.
///
/// This is deliberately independent of the canonical parameterization and
/// serves as an oracle for it.
pub fn side_contact_geometric(p1: Point, p2: Point, fam: &ConfocalFamily) -> Result<Point> {
    let (u, v) = side_line_coeffs(p1, p2)?;
    Ok(Point::new(
        fam.a_c() * fam.a_c() * u,
        fam.b_c() * fam.b_c() * v,
    ))
}

/// Next billiard vertex by explicit geometric reflection, independent of
/// the canonical parameterization: reflects the incoming direction at
/// `cur` across the table tangent there and intersects the outgoing ray
/// with the table again.
pub fn reflect_next_geometric(
    prev: Point,
    cur: Point,
    table: &ConfocalEllipse,
) -> Result<Point> {
    let t = table.parameter_of(cur);
    let tangent = table
        .tangent_at(t)
        .normalized()
        .ok_or_else(|| Error::DegenerateGeometry("zero tangent on table".to_string()))?;
    let incoming = cur - prev;
    let dir = tangent * (2.0 * incoming.dot(tangent)) + (-incoming);
    // Second intersection of cur + s·dir with the table, in coordinates
    // scaled onto the unit circle (the first intersection is s = 0).
    let p_hat = Vec2::new(cur.x / table.a_e(), cur.y / table.b_e());
    let d_hat = Vec2::new(dir.x / table.a_e(), dir.y / table.b_e());
    let denom = d_hat.norm_sq();
    if denom == 0.0 {
        return Err(Error::DegenerateGeometry(
            "zero reflected direction".to_string(),
        ));
    }
    let s = -2.0 * p_hat.dot(d_hat) / denom;
    Ok(cur + dir * s)
}

/// Two chord pieces `r_i = |Q_{i−1} P_i|`, `l_i = |P_i Q_i|` at a vertex,
/// each with its closed-form value
/// `√k_e · ‖t_c‖·‖t_c‖′ / (a_c b_c)` built from the caustic tangent norms
/// `‖t_c(ũ)‖ = a_c dn ũ` at the adjacent contact and vertex parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordPair {
    /// Euclidean `|Q_{i−1} P_i|`.
    pub r: f64,
    /// Euclidean `|P_i Q_i|`.
    pub l: f64,
    /// Closed form for `r`.
    pub r_closed: f64,
    /// Closed form for `l`.
    pub l_closed: f64,
}

/// Chord pieces of all vertices of a closed polygon.
///
/// Vertex `i` carries `r_i` (to the contact behind, on side `i−1`) and
/// `l_i` (to the contact ahead, on side `i`); side `i` has length
/// `l_i + r_{i+1}`.  Open chains are rejected: their first `r` and last
/// `l` do not exist.
pub fn chord_lengths(billiard: &Billiard) -> Result<Vec<ChordPair>> {
    if !billiard.is_closed() {
        return Err(Error::InvalidConfig(
            "chord decomposition requires a closed polygon".to_string(),
        ));
    }
    let n = billiard.vertex_count();
    let fam = billiard.family();
    let m = fam.modulus();
    let sqrt_ke = billiard.table().k_e().sqrt();
    let du = billiard.delta_u();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p = billiard.vertices()[i];
        let q_behind = billiard.contacts()[(i + n - 1) % n];
        let q_ahead = billiard.contacts()[i];
        let u_i = billiard.vertex_params_u()[i];
        // ‖t_c‖ = a_c dn(ũ) at the vertex and the two neighbouring contacts.
        let norm_v = fam.a_c() * jacobi_sncndn(u_i, m).dn;
        let norm_qb = fam.a_c() * jacobi_sncndn(u_i - du, m).dn;
        let norm_qa = fam.a_c() * jacobi_sncndn(u_i + du, m).dn;
        out.push(ChordPair {
            r: q_behind.distance_to(p),
            l: p.distance_to(q_ahead),
            r_closed: sqrt_ke * norm_qb * norm_v / (fam.a_c() * fam.b_c()),
            l_closed: sqrt_ke * norm_v * norm_qa / (fam.a_c() * fam.b_c()),
        });
    }
    Ok(out)
}

/// A point of the projective closure of the chart: either an ordinary
/// point or a direction at infinity (unit vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjPoint {
    Finite(Point),
    AtInfinity(Vec2),
}

impl ProjPoint {
    pub fn as_finite(&self) -> Option<Point> {
        match self {
            ProjPoint::Finite(p) => Some(*p),
            ProjPoint::AtInfinity(_) => None,
        }
    }

    pub fn is_at_infinity(&self) -> bool {
        matches!(self, ProjPoint::AtInfinity(_))
    }
}

/// The chart `Y(ũ, ṽ) = (−a_c sn ũ dn ṽ / cn ṽ, b_c cn ũ / cn ṽ)`.
///
/// For fixed `ṽ` with `cn ṽ ≠ 0` the image of `ũ ↦ Y(ũ, ṽ)` is the
/// confocal ellipse with semiaxes `(a_c dn ṽ / |cn ṽ|, b_c / |cn ṽ|)`;
/// `ṽ = 0` gives the caustic and `ṽ = Δũ` the table, and the intersection
/// of the extended sides with contact parameters `ũ ± ṽ` is `Y(ũ, ṽ)`.
/// Where `cn ṽ` vanishes the point escapes along the direction
/// `(−a_c sn ũ dn ṽ, b_c cn ũ)`, reported as [`ProjPoint::AtInfinity`].
///
/// Symmetries (verified in the tests): invariant under
/// `ũ → ũ + 4K`, `ṽ → −ṽ`, `ṽ → ṽ + 4K`, and `(ũ, ṽ) → (ũ + 2K, ṽ + 2K)`;
/// antisymmetric (`Y → −Y`) under `ũ → ũ + 2K` and under `ṽ → ṽ + 2K`.
pub fn canonical_chart(u: f64, v: f64, fam: &ConfocalFamily) -> ProjPoint {
    let m = fam.modulus();
    let ju = jacobi_sncndn(u, m);
    let jv = jacobi_sncndn(v, m);
    if jv.cn.abs() < CHART_INFINITY_EPS {
        let dir = Vec2::new(-fam.a_c() * ju.sn * jv.dn, fam.b_c() * ju.cn);
        match dir.normalized() {
            Some(d) => ProjPoint::AtInfinity(d),
            None => ProjPoint::AtInfinity(Vec2::new(1.0, 0.0)),
        }
    } else {
        ProjPoint::Finite(Point::new(
            -fam.a_c() * ju.sn * jv.dn / jv.cn,
            fam.b_c() * ju.cn / jv.cn,
        ))
    }
}

/// A conic of the grid: a confocal ellipse, or the line at infinity for
/// levels whose chart parameter hits a zero of `cn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridConic {
    Ellipse(ConfocalEllipse),
    AtInfinity,
}

/// One level of the grid: the conic through the `N` intersection points of
/// sides separated by `j + 1` contacts, and those points themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLevel {
    /// Level index: `j = 0` reproduces the polygon's vertices (and the
    /// table); level `j` collects `S_i^{(j)}`, the intersections of the
    /// extended sides `i−k−1` and `i+k` for `j = 2k`, or `i−k` and `i+k`
    /// for `j = 2k−1`.
    pub j: usize,
    pub conic: GridConic,
    /// `S_i^{(j)}` for `i = 0, …, N−1`.
    pub points: Vec<ProjPoint>,
}

/// The grid of a closed periodic billiard: all pairwise intersections of
/// extended sides, organized by level onto confocal ellipses.
#[derive(Debug, Clone, PartialEq)]
pub struct PonceletGrid {
    pub levels: Vec<GridLevel>,
}

/// Largest meaningful grid level for an `N`-gon.
///
/// Levels beyond `N − 3` pair a side with itself or repeat earlier levels
/// (the level conics satisfy `e^{(j)} = e^{(N−2−j)}`), and the default
/// stops at `⌊N/2⌋ − 1`, after which the ellipses repeat by that symmetry.
pub fn grid_level_cap(n: usize) -> usize {
    n.saturating_sub(3)
}

/// The conic carrying grid level `j`: the chart ellipse at
/// `ṽ = (j+1)Δũ`, or the line at infinity when `cn ṽ = 0`, which for the
/// period `(N, τ)` happens exactly when `2τ(j+1) ≡ N (mod 2N)`.
pub fn grid_conic(billiard: &Billiard, j: usize) -> Result<GridConic> {
    let (n, tau) = billiard
        .config()
        .period()
        .filter(|_| billiard.is_closed())
        .ok_or_else(|| {
            Error::InvalidConfig("the grid is defined for closed periodic polygons".to_string())
        })?;
    if (2 * tau * (j + 1)) % (2 * n) == n {
        return Ok(GridConic::AtInfinity);
    }
    let fam = billiard.family();
    let v = (j as f64 + 1.0) * billiard.delta_u();
    let jv = jacobi_sncndn(v, fam.modulus());
    let a = fam.a_c() * jv.dn / jv.cn.abs();
    let b = fam.b_c() / jv.cn.abs();
    Ok(GridConic::Ellipse(ConfocalEllipse::from_parts(
        b * b - fam.b_c() * fam.b_c(),
        a,
        b,
    )))
}

/// Builds grid levels `0 ..= j_max` (default `⌊N/2⌋ − 1`, and always
/// clamped to `N − 3`) for a closed periodic billiard.
pub fn poncelet_grid(billiard: &Billiard, j_max: Option<usize>) -> Result<PonceletGrid> {
    let (n, _) = billiard
        .config()
        .period()
        .filter(|_| billiard.is_closed())
        .ok_or_else(|| {
            Error::InvalidConfig("the grid is defined for closed periodic polygons".to_string())
        })?;
    let cap = grid_level_cap(n);
    let j_top = j_max.unwrap_or((n / 2).saturating_sub(1)).min(cap);
    let fam = *billiard.family();
    let du = billiard.delta_u();
    let mut levels = Vec::with_capacity(j_top + 1);
    for j in 0..=j_top {
        let conic = grid_conic(billiard, j)?;
        let v = (j as f64 + 1.0) * du;
        let mut points = Vec::with_capacity(n);
        for i in 0..n {
            // Even levels are centred on a vertex parameter, odd levels on
            // a contact parameter.
            let u_mid = if j % 2 == 0 {
                billiard.vertex_params_u()[i]
            } else {
                billiard.vertex_params_u()[i] + du
            };
            let pt = canonical_chart(u_mid, v, &fam);
            // The level conic decides finiteness; near the threshold the
            // chart and the integer test must agree, so force consistency.
            let pt = match (&conic, pt) {
                (GridConic::AtInfinity, ProjPoint::Finite(p)) => {
                    let dir = Vec2::new(p.x, p.y);
                    ProjPoint::AtInfinity(dir.normalized().unwrap_or(Vec2::new(1.0, 0.0)))
                }
                (GridConic::Ellipse(_), ProjPoint::AtInfinity(d)) => {
                    ProjPoint::AtInfinity(d)
                }
                (_, pt) => pt,
            };
            points.push(pt);
        }
        levels.push(GridLevel { j, conic, points });
    }
    Ok(PonceletGrid { levels })
}

/// The conjugate polygon of a closed billiard: the same trajectory shape
/// restarted half a step later (`ũ_0 + Δũ`), whose vertices are the images
/// of the original contact points under the axial scaling
/// `(x, y) ↦ (x·a_e/a_c, y·b_e/b_c)` that maps the caustic onto the table.
pub fn conjugate_billiard(billiard: &Billiard) -> Result<Billiard> {
    if !billiard.is_closed() {
        return Err(Error::InvalidConfig(
            "the conjugate polygon is defined for closed polygons".to_string(),
        ));
    }
    let config = billiard
        .config()
        .with_start(billiard.config().u0() + billiard.delta_u())?;
    build_billiard(&config)
}
