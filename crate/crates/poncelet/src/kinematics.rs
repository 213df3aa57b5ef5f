//! Kinematics of the one-parameter billiard motion.
//!
//! A closed billiard polygon with a confocal caustic is not rigid: it
//! admits a one-parameter deformation that slides every vertex along the
//! table while all sides stay tangent to the caustic (vary `ũ_0` with
//! `Δũ` fixed).  The natural time scale for this motion assigns each
//! vertex the velocity
//!
//! ```text
//! v(t) = ‖t_c(t)‖ · t_e(t),
//! ```
//!
//! the table tangent scaled by the norm of the caustic tangent at the same
//! parameter.  Under that normalization the canonical parameter advances
//! uniformly, `dũ/dτ = a_c`, the angle parameter obeys
//! `dt/dτ = ‖t_c(t)‖`, and the decomposition of the speed along the two
//! confocal directions is governed by the elliptic coordinates `(k_e, k_h)`
//! of the vertex:
//!
//! ```text
//! v_t = −k_h,   v_n = √(−k_e k_h),   |v|² = k_h (k_h − k_e),
//! ```
//!
//! with the motion constant `v_t · tan²(θ/2) = k_e` at every vertex, `θ`
//! the angle between the two sides.  Each side rotates about its contact
//! point with angular velocity `ω = a_c b_c / ‖t_c(t')‖` (`t'` the contact
//! parameter), so the vertex angle changes at the rate
//! `θ̇_i = ω_i − ω_{i−1}`, and the side lengths change at the rate
//! `ṡ_i = d²(sin² t_{i+1} − sin² t_i)` — which telescopes to a constant
//! perimeter around a closed polygon.

use crate::billiard::{chord_lengths, Billiard};
use crate::confocal::{ConfocalEllipse, ConfocalFamily, EllipticCoords, Vec2};
use crate::ellipfn::jacobi_sncndn;
use crate::error::{Error, Result};

/// Default absolute per-step error tolerance of [`integrate_flow`].
pub const DEFAULT_FLOW_TOL: f64 = 1e-10;

const MAX_FLOW_STEPS: usize = 100_000;

/// Velocity of the vertex at angle parameter `t` under the canonical
/// motion: `v(t) = ‖t_c(t)‖ · t_e(t)`.
pub fn velocity_field(t: f64, ell: &ConfocalEllipse, fam: &ConfocalFamily) -> Vec2 {
    ell.tangent_at(t) * fam.caustic_tangent_norm(t)
}

/// Speed of a vertex split along the confocal directions: tangential to
/// the ellipse through it (`v_t`), along the hyperbola (`v_n`), total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexSpeeds {
    /// `v_t = −k_h` (component along the confocal ellipse).
    pub tangential: f64,
    /// `v_n = √(−k_e k_h)` (component along the confocal hyperbola).
    pub normal: f64,
    /// `|v| = √(k_h (k_h − k_e))`.
    pub speed: f64,
}

/// Speed decomposition from the elliptic coordinates of the vertex.
pub fn vertex_speeds(coords: &EllipticCoords) -> VertexSpeeds {
    let k_e = coords.k_e();
    let k_h = coords.k_h();
    VertexSpeeds {
        tangential: -k_h,
        normal: (-k_e * k_h).max(0.0).sqrt(),
        speed: (k_h * (k_h - k_e)).max(0.0).sqrt(),
    }
}

/// Speed decomposition at angle parameter `t` of a vertex on `ell`.
pub fn speeds_at(t: f64, ell: &ConfocalEllipse, fam: &ConfocalFamily) -> VertexSpeeds {
    let k_e = ell.k_e();
    let k_h = fam.k_h_of_t(t);
    VertexSpeeds {
        tangential: -k_h,
        normal: (-k_e * k_h).max(0.0).sqrt(),
        speed: (k_h * (k_h - k_e)).max(0.0).sqrt(),
    }
}

/// The conserved combination `v_t · tan²(θ/2)` (equal to `k_e` on a true
/// billiard).  Taking the *measured* polygon angle `θ` keeps this an
/// honest check rather than an identity.
pub fn motion_constant(tangential_speed: f64, theta: f64) -> f64 {
    let t = (0.5 * theta).tan();
    tangential_speed * t * t
}

/// Angular velocity of a side about its contact point, from the contact's
/// angle parameter: `ω = a_c b_c / ‖t_c(t')‖`.
pub fn omega_of_side(t_contact: f64, fam: &ConfocalFamily) -> f64 {
    fam.a_c() * fam.b_c() / fam.caustic_tangent_norm(t_contact)
}

/// Rate of change of the side length between vertices at angle parameters
/// `t_i`, `t_{i+1}`: `ṡ = d² (sin² t_{i+1} − sin² t_i)`.
pub fn side_length_rate(t_i: f64, t_next: f64, fam: &ConfocalFamily) -> f64 {
    let d2 = fam.focal_distance() * fam.focal_distance();
    d2 * (t_next.sin().powi(2) - t_i.sin().powi(2))
}

/// Signed rate of the hyperbola coordinate along the flow,
/// `k̇_h = 2 a_c³ m² sn ũ cn ũ dn ũ`.
pub fn k_h_rate(u: f64, fam: &ConfocalFamily) -> f64 {
    let j = jacobi_sncndn(u, fam.modulus());
    let m = fam.modulus().m();
    2.0 * fam.a_c().powi(3) * m * m * j.sn * j.cn * j.dn
}

/// Squared rate of `k_h` along the flow as a function of `k_h` alone:
/// `k̇_h² = 4 (a_c² + k_h) · (−(b_c² + k_h)) · (−k_h)`,
/// all three factors non-negative on the confocal band.
pub fn k_h_rate_squared(k_h: f64, fam: &ConfocalFamily) -> f64 {
    let a2 = fam.a_c() * fam.a_c();
    let b2 = fam.b_c() * fam.b_c();
    4.0 * (a2 + k_h) * (-(b2 + k_h)) * (-k_h)
}

/// Elliptic coordinates of the vertex at canonical parameter `ũ` of a
/// billiard with spacing `Δũ`, in closed form:
/// `k_e = a_c²(1 − m²) sn²Δũ / cn²Δũ`, `k_h = −a_c² dn²ũ`.
pub fn elliptic_coords_canonical(
    u: f64,
    delta_u: f64,
    fam: &ConfocalFamily,
) -> Result<EllipticCoords> {
    let m = fam.modulus();
    let jd = jacobi_sncndn(delta_u, m);
    let ju = jacobi_sncndn(u, m);
    let a2 = fam.a_c() * fam.a_c();
    let k_e = a2 * (1.0 - m.m() * m.m()) * (jd.sn / jd.cn).powi(2);
    let k_h = -a2 * ju.dn * ju.dn;
    EllipticCoords::new(k_e, k_h, fam)
}

/// Integrates the angle-parameter flow `dt/dτ = ‖t_c(t)‖` from `t0` over
/// a (possibly negative) time `span` with an adaptive embedded
/// Runge–Kutta 4(5) scheme, keeping the per-step error below `abs_tol`.
///
/// The exact solution is `t(τ) = am(ũ_0 + a_c τ) + π/2` when
/// `t0 = am(ũ_0) + π/2`, which the tests use as an oracle; the integrator
/// exists as the independent route.
pub fn integrate_flow(t0: f64, span: f64, fam: &ConfocalFamily, abs_tol: f64) -> Result<f64> {
    if !(abs_tol.is_finite() && abs_tol > 0.0) {
        return Err(Error::IntegrationFailure(format!(
            "tolerance {abs_tol} must be positive"
        )));
    }
    if !span.is_finite() || !t0.is_finite() {
        return Err(Error::IntegrationFailure(format!(
            "non-finite flow arguments t0 = {t0}, span = {span}"
        )));
    }
    if span == 0.0 {
        return Ok(t0);
    }
    let f = |t: f64| fam.caustic_tangent_norm(t);
    let mut t = t0;
    let mut remaining = span;
    let mut h = span / 64.0;
    for _ in 0..MAX_FLOW_STEPS {
        if remaining == 0.0 {
            return Ok(t);
        }
        if h.abs() > remaining.abs() {
            h = remaining;
        }
        let k1 = f(t);
        let k2 = f(t + h * 0.25 * k1);
        let k3 = f(t + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2));
        let k4 = f(t
            + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3));
        let k5 = f(t
            + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3
                - 845.0 / 4104.0 * k4));
        let k6 = f(t
            + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3
                + 1859.0 / 4104.0 * k4
                - 11.0 / 40.0 * k5));
        let fifth = h
            * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 + 28561.0 / 56430.0 * k4
                - 9.0 / 50.0 * k5
                + 2.0 / 55.0 * k6);
        let fourth = h
            * (25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 + 2197.0 / 4104.0 * k4
                - 0.2 * k5);
        let err = (fifth - fourth).abs();
        if err <= abs_tol {
            t += fifth;
            remaining -= h;
        }
        // Standard safety-factored step update, clamped to avoid stalls
        // and overshoots.
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (abs_tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h == 0.0 || !h.is_finite() {
            return Err(Error::IntegrationFailure(format!(
                "step size collapsed at t = {t} ({} of {span} remaining)",
                remaining
            )));
        }
    }
    Err(Error::IntegrationFailure(format!(
        "flow failed to cover span {span} within {MAX_FLOW_STEPS} steps"
    )))
}

/// Kinematic data of one vertex of a closed polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexKinematics {
    /// Velocity vector `‖t_c‖ t_e` at the vertex.
    pub velocity: Vec2,
    /// Confocal speed decomposition.
    pub speeds: VertexSpeeds,
    /// Measured angle between the two sides at the vertex.
    pub theta: f64,
    /// `θ̇ = ω_ahead − ω_behind`.
    pub theta_rate: f64,
    /// `v_t tan²(θ/2)` with the measured `θ` (≈ `k_e`).
    pub motion_constant: f64,
}

/// Kinematic snapshot of a closed billiard polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicState {
    /// Per-vertex data, aligned with the polygon's vertex order.
    pub vertices: Vec<VertexKinematics>,
    /// Angular velocity `ω_i` of each side about its contact point.
    pub omegas: Vec<f64>,
    /// Side length rates `ṡ_i` (they sum to zero: constant perimeter).
    pub side_rates: Vec<f64>,
    /// The conserved quantity evaluated at vertex 0.
    pub motion_constant: f64,
}

/// Computes the full kinematic snapshot of a closed polygon: velocities,
/// speed decompositions, measured vertex angles and their rates, side
/// rotation rates, and the motion constant.
pub fn kinematic_state(billiard: &Billiard) -> Result<KinematicState> {
    if !billiard.is_closed() {
        return Err(Error::InvalidConfig(
            "kinematic snapshot requires a closed polygon".to_string(),
        ));
    }
    let n = billiard.vertex_count();
    let fam = billiard.family();
    let table = billiard.table();

    let omegas: Vec<f64> = billiard
        .contact_params_t()
        .iter()
        .map(|&tq| omega_of_side(tq, fam))
        .collect();

    // The wrapped index is sound for the last side: the rate depends on
    // the parameters only through sin², and t_N differs from t_0 by a
    // whole multiple of 2π.
    let side_rates: Vec<f64> = (0..n)
        .map(|i| {
            side_length_rate(
                billiard.vertex_params_t()[i],
                billiard.vertex_params_t()[(i + 1) % n],
                fam,
            )
        })
        .collect();

    let mut vertices = Vec::with_capacity(n);
    for i in 0..n {
        let t_i = billiard.vertex_params_t()[i];
        let p = billiard.vertices()[i];
        let q_behind = billiard.contacts()[(i + n - 1) % n];
        let q_ahead = billiard.contacts()[i];
        // The turning angle between the incoming and outgoing directions
        // (not the interior angle): this is the θ of the half-angle
        // relations sin²(θ/2) = k_e/(k_e − k_h).
        let d1 = p - q_behind;
        let d2 = q_ahead - p;
        let theta = d1.cross(d2).abs().atan2(d1.dot(d2));
        let speeds = speeds_at(t_i, table, fam);
        vertices.push(VertexKinematics {
            velocity: velocity_field(t_i, table, fam),
            speeds,
            theta,
            theta_rate: omegas[i] - omegas[(i + n - 1) % n],
            motion_constant: motion_constant(speeds.tangential, theta),
        });
    }

    let motion_constant = vertices[0].motion_constant;
    Ok(KinematicState {
        vertices,
        omegas,
        side_rates,
        motion_constant,
    })
}

/// Re-exported view of the chord decomposition for rate checks: the
/// angular velocity of a side links the chord pieces to the vertex speeds
/// through `ω_i l_i = v_⊥(P_i)` and `ω_i r_{i+1} = v_⊥(P_{i+1})`, the
/// components of the vertex velocities perpendicular to the side.
pub fn perpendicular_speed_residuals(billiard: &Billiard) -> Result<Vec<f64>> {
    let chords = chord_lengths(billiard)?;
    let n = billiard.vertex_count();
    let fam = billiard.family();
    let table = billiard.table();
    let mut residuals = Vec::with_capacity(2 * n);
    for i in 0..n {
        let omega = omega_of_side(billiard.contact_params_t()[i], fam);
        let p1 = billiard.vertices()[i];
        let p2 = billiard.vertices()[(i + 1) % n];
        let side_dir = match (p2 - p1).normalized() {
            Some(d) => d,
            None => {
                return Err(Error::DegenerateGeometry(
                    "coincident vertices on a side".to_string(),
                ))
            }
        };
        let perp = |t: f64| -> f64 {
            let v = velocity_field(t, table, fam);
            (v + side_dir * -v.dot(side_dir)).norm()
        };
        let v_perp_1 = perp(billiard.vertex_params_t()[i]);
        let v_perp_2 = perp(billiard.vertex_params_t()[(i + 1) % n]);
        residuals.push(omega * chords[i].l - v_perp_1);
        residuals.push(omega * chords[(i + 1) % n].r - v_perp_2);
    }
    Ok(residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::{build_billiard, BilliardConfig};
    use crate::confocal::{elliptic_from_cartesian, Point};
    use crate::ellipfn::{complete_k, incomplete_f, jacobi_am};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn fam21() -> ConfocalFamily {
        ConfocalFamily::new(2.0, 1.0).unwrap()
    }

    fn square() -> Billiard {
        build_billiard(&BilliardConfig::periodic(fam21(), 4, 1, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn speed_decomposition_square_fixture() {
        let b = square();
        let state = kinematic_state(&b).unwrap();
        // Top vertex (0, √3): k_h = −4.
        let s0 = state.vertices[0].speeds;
        assert_relative_eq!(s0.tangential, 4.0, max_relative = 1e-13);
        assert_relative_eq!(s0.normal, 2.0 * 2.0f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(s0.speed, 2.0 * 6.0f64.sqrt(), max_relative = 1e-13);
        // Left vertex (−√6, 0): k_h = −1.
        let s1 = state.vertices[1].speeds;
        assert_relative_eq!(s1.tangential, 1.0, max_relative = 1e-13);
        assert_relative_eq!(s1.normal, 2.0f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(s1.speed, 3.0f64.sqrt(), max_relative = 1e-13);
        // sin θ = 2√2/3 at every vertex of the square.
        for v in &state.vertices {
            assert_relative_eq!(v.theta.sin(), 2.0 * 2.0f64.sqrt() / 3.0, epsilon = 1e-13);
        }
        // All four sides rotate equally fast: ω = √2, so θ̇ = 0.
        for (&omega, v) in state.omegas.iter().zip(&state.vertices) {
            assert_relative_eq!(omega, 2.0f64.sqrt(), max_relative = 1e-13);
            assert!(v.theta_rate.abs() < 1e-13);
        }
        // Side rates: ṡ_0 = d²(sin²t_1 − sin²t_0) = 3(0 − 1) = −3.
        assert_relative_eq!(state.side_rates[0], -3.0, epsilon = 1e-12);
        assert_relative_eq!(state.side_rates[1], 3.0, epsilon = 1e-12);
        assert_relative_eq!(state.motion_constant, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn velocity_matches_finite_difference_of_motion() {
        // v(P_i) = a_c · dP_i/dũ_0: the canonical parameter flows with
        // dũ/dτ = a_c under the velocity normalization.
        let fam = ConfocalFamily::new(1.8, 0.9).unwrap();
        let cfg = BilliardConfig::periodic(fam, 7, 2, 0.58).unwrap();
        let b = build_billiard(&cfg).unwrap();
        let h = 1e-6;
        let plus = build_billiard(&cfg.with_start(cfg.u0() + h).unwrap()).unwrap();
        let minus = build_billiard(&cfg.with_start(cfg.u0() - h).unwrap()).unwrap();
        for i in 0..7 {
            let fd = (plus.vertices()[i] - minus.vertices()[i]) * (fam.a_c() / (2.0 * h));
            let v = velocity_field(b.vertex_params_t()[i], b.table(), &fam);
            assert!(
                (fd.x - v.x).abs() < 1e-7 && (fd.y - v.y).abs() < 1e-7,
                "vertex {i}: fd {fd:?} vs field {v:?}"
            );
        }
    }

    #[test]
    fn speed_identities_generic() {
        let fam = ConfocalFamily::new(2.2, 1.4).unwrap();
        let ell = fam.ellipse(1.7).unwrap();
        let mut t = 0.0;
        while t < 2.0 * PI {
            let s = speeds_at(t, &ell, &fam);
            // |v|² = v_t² + v_n², and the field agrees.
            assert_relative_eq!(
                s.speed * s.speed,
                s.tangential * s.tangential + s.normal * s.normal,
                max_relative = 1e-12
            );
            assert_relative_eq!(
                velocity_field(t, &ell, &fam).norm(),
                s.speed,
                max_relative = 1e-12
            );
            // Same numbers from actual elliptic coordinates of the point.
            let coords = elliptic_from_cartesian(ell.point_at(t), &fam).unwrap();
            let s2 = vertex_speeds(&coords);
            assert_relative_eq!(s.tangential, s2.tangential, max_relative = 1e-9);
            assert_relative_eq!(s.speed, s2.speed, max_relative = 1e-9);
            t += 0.13;
        }
    }

    #[test]
    fn motion_constant_equals_k_e() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let b_c = rng.gen_range(0.5..1.2);
            let a_c = b_c + rng.gen_range(0.1..1.5);
            let fam = ConfocalFamily::new(a_c, b_c).unwrap();
            let (n, tau) = *[(3usize, 1usize), (5, 2), (8, 3), (11, 2)]
                .iter()
                .nth(rng.gen_range(0..4))
                .unwrap();
            let b = build_billiard(
                &BilliardConfig::periodic(fam, n, tau, rng.gen_range(-3.0..3.0)).unwrap(),
            )
            .unwrap();
            let state = kinematic_state(&b).unwrap();
            for v in &state.vertices {
                assert_relative_eq!(
                    v.motion_constant,
                    b.table().k_e(),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn omega_links_chords_to_perpendicular_speeds() {
        let fam = ConfocalFamily::new(1.6, 0.8).unwrap();
        let b = build_billiard(&BilliardConfig::periodic(fam, 9, 2, 1.1).unwrap()).unwrap();
        for r in perpendicular_speed_residuals(&b).unwrap() {
            assert!(r.abs() < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn theta_rate_matches_finite_difference() {
        let fam = ConfocalFamily::new(2.0, 1.1).unwrap();
        let cfg = BilliardConfig::periodic(fam, 5, 2, 0.77).unwrap();
        let b = build_billiard(&cfg).unwrap();
        let state = kinematic_state(&b).unwrap();
        let h = 1e-6;
        let thetas = |du: f64| -> Vec<f64> {
            let bb =
                build_billiard(&cfg.with_start(cfg.u0() + du).unwrap()).unwrap();
            kinematic_state(&bb).unwrap().vertices.iter().map(|v| v.theta).collect()
        };
        let plus = thetas(h);
        let minus = thetas(-h);
        for i in 0..5 {
            let fd = fam.a_c() * (plus[i] - minus[i]) / (2.0 * h);
            assert!(
                (fd - state.vertices[i].theta_rate).abs() < 1e-6,
                "vertex {i}: fd {fd} vs rate {}",
                state.vertices[i].theta_rate
            );
        }
        // Rates of the vertex angles telescope to zero around the polygon.
        let sum: f64 = state.vertices.iter().map(|v| v.theta_rate).sum();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn side_rates_match_finite_difference_and_preserve_perimeter() {
        let fam = ConfocalFamily::new(1.9, 1.0).unwrap();
        let cfg = BilliardConfig::periodic(fam, 6, 1, 0.23).unwrap();
        let b = build_billiard(&cfg).unwrap();
        let state = kinematic_state(&b).unwrap();
        let h = 1e-6;
        let side_lengths = |du: f64| -> Vec<f64> {
            let bb = build_billiard(&cfg.with_start(cfg.u0() + du).unwrap()).unwrap();
            (0..6)
                .map(|i| bb.vertices()[i].distance_to(bb.vertices()[(i + 1) % 6]))
                .collect()
        };
        let plus = side_lengths(h);
        let minus = side_lengths(-h);
        for i in 0..6 {
            let fd = fam.a_c() * (plus[i] - minus[i]) / (2.0 * h);
            assert!(
                (fd - state.side_rates[i]).abs() < 1e-6,
                "side {i}: fd {fd} vs rate {}",
                state.side_rates[i]
            );
        }
        let sum: f64 = state.side_rates.iter().sum();
        assert!(sum.abs() < 1e-12, "perimeter drift rate {sum}");
        // Direct check: the perimeter is numerically constant in ũ_0.
        let p_plus = build_billiard(&cfg.with_start(cfg.u0() + 0.31).unwrap())
            .unwrap()
            .perimeter();
        assert_relative_eq!(p_plus, b.perimeter(), max_relative = 1e-9);
    }

    #[test]
    fn flow_integrator_matches_closed_form() {
        let fam = ConfocalFamily::new(2.0, 1.0).unwrap();
        let m = fam.modulus();
        // Start at the top of the caustic: t_0 = π/2 ⇔ ũ_0 = 0.
        for &span in &[0.1, 0.9, 3.7, -1.3, 12.0] {
            let got = integrate_flow(FRAC_PI_2, span, &fam, DEFAULT_FLOW_TOL).unwrap();
            let exact = jacobi_am(fam.a_c() * span, m) + FRAC_PI_2;
            assert_relative_eq!(got, exact, epsilon = 1e-8, max_relative = 1e-8);
        }
        // Generic start: invert t_0 through the incomplete integral.
        let t0 = 2.31;
        let u0 = incomplete_f(t0 - FRAC_PI_2, m);
        let got = integrate_flow(t0, 2.6, &fam, 1e-12).unwrap();
        let exact = jacobi_am(u0 + fam.a_c() * 2.6, m) + FRAC_PI_2;
        assert_relative_eq!(got, exact, epsilon = 1e-9);
        // Zero span is the identity.
        assert_eq!(integrate_flow(1.0, 0.0, &fam, 1e-10).unwrap(), 1.0);
        assert!(integrate_flow(1.0, 1.0, &fam, -1e-3).is_err());
    }

    #[test]
    fn flow_on_circle_is_uniform_rotation() {
        let circle = ConfocalFamily::new(1.5, 1.5).unwrap();
        for &span in &[0.4, 2.0, -3.3] {
            let got = integrate_flow(0.7, span, &circle, 1e-12).unwrap();
            assert_relative_eq!(got, 0.7 + 1.5 * span, epsilon = 1e-10);
        }
    }

    #[test]
    fn canonical_elliptic_coords_match_cartesian_route() {
        let fam = ConfocalFamily::new(1.7, 0.9).unwrap();
        let cfg = BilliardConfig::periodic(fam, 7, 3, 0.0).unwrap();
        let b = build_billiard(&cfg).unwrap();
        for i in 0..7 {
            let u = b.vertex_params_u()[i];
            let canon = elliptic_coords_canonical(u, b.delta_u(), &fam).unwrap();
            assert_relative_eq!(canon.k_e(), b.table().k_e(), max_relative = 1e-12);
            let via_point = elliptic_from_cartesian(b.vertices()[i], &fam).unwrap();
            assert_relative_eq!(canon.k_e(), via_point.k_e(), max_relative = 1e-9);
            assert_relative_eq!(canon.k_h(), via_point.k_h(), max_relative = 1e-9);
        }
    }

    #[test]
    fn k_h_rate_closed_form_and_squared_form() {
        let fam = ConfocalFamily::new(2.0, 1.0).unwrap();
        let k = complete_k(fam.modulus());
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..300 {
            let u = rng.gen_range(-2.0 * k..2.0 * k);
            // Finite difference of k_h(ũ(τ)) with dũ/dτ = a_c.
            let h = 1e-6;
            let k_h = |uu: f64| -fam.a_c().powi(2) * jacobi_sncndn(uu, fam.modulus()).dn.powi(2);
            let fd = fam.a_c() * (k_h(u + h) - k_h(u - h)) / (2.0 * h);
            let rate = k_h_rate(u, &fam);
            assert!((fd - rate).abs() < 1e-6, "u={u}: fd {fd} vs rate {rate}");
            // The squared form closes through k_h alone.
            assert_relative_eq!(
                rate * rate,
                k_h_rate_squared(k_h(u), &fam),
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn snapshot_requires_closed_polygon() {
        let fam = fam21();
        let open =
            build_billiard(&BilliardConfig::aperiodic(fam, 0.8, 0.1, 5).unwrap()).unwrap();
        assert!(kinematic_state(&open).is_err());
        assert!(perpendicular_speed_residuals(&open).is_err());
    }

    #[test]
    fn fixture_velocity_vectors() {
        // At the top vertex of the square the motion is pure x-translation:
        // v = ‖t_c(π/2)‖ · t_e(π/2) = 2·(−√6, 0).
        let b = square();
        let v = velocity_field(b.vertex_params_t()[0], b.table(), b.family());
        assert_relative_eq!(v.x, -2.0 * 6.0f64.sqrt(), max_relative = 1e-13);
        assert!(v.y.abs() < 1e-13);
        // Perpendicular component w.r.t. side 0 is ω·l_0 = √2·2.
        let p0 = Point::new(0.0, 3.0f64.sqrt());
        let p1 = Point::new(-(6.0f64.sqrt()), 0.0);
        let dir = (p1 - p0).normalized().unwrap();
        let perp = (v + dir * -v.dot(dir)).norm();
        assert_relative_eq!(perp, 2.0 * 2.0f64.sqrt(), max_relative = 1e-13);
    }
}
