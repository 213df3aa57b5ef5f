//! Conserved quantities of periodic billiards and their verification.
//!
//! A closed billiard polygon with a confocal caustic satisfies a family of
//! exact relations between its chord pieces `r_i = |Q_{i−1}P_i|`,
//! `l_i = |P_iQ_i|`, its vertex angles, and the caustic tangent norms
//! `‖t_c‖`.  Writing `N` for the period, `k_e` for the table's family
//! parameter, and `D(ũ) = a_c dn ũ = ‖t_c‖` at a canonical parameter:
//!
//! * `∏ r_i = ∏ l_i` for every `N`, with common value `k_e^{N/2}` when `N`
//!   is even;
//! * for `N = 4n`: `r_i r_{i+n} = l_i l_{i+n} = k_e`,
//!   `D(ũ_i) D(ũ_{i+n}) = a_c b_c` (and the same for contact parameters),
//!   and the half-range products `∏_{i<N/2} r_i = ∏_{i<N/2} l_i = k_e^{N/4}`;
//! * for `N = 4n+2`: the crossed relations `r_i l_{i+n} = l_i r_{i+n+1} = k_e`
//!   and `D(ũ_i) D(ũ'_{i+n}) = a_c b_c` with `ũ'` the contact parameters;
//! * for `N ≡ 0 (mod 4)`: `Σ (−1)^i sin t_i = Σ (−1)^i cos t_i = 0`;
//!   for `N ≡ 2 (mod 4)`: `Σ (−1)^i sin² t_i = 0`;
//! * for `N = 4n`: the three-way ratio
//!   `s_{i+n}/s_i = l_{i+n}/r_{i+1} = r_{i+n+1}/l_i` between opposite
//!   sides; for `N = 4n+2` the same with the sides `s'` of the conjugate
//!   polygon: `s'_{i+n}/s_i = r_{i+n+1}/r_{i+1} = l_{i+n+1}/l_i`.
//!
//! All of these derive from the quarter-period shift: advancing the
//! canonical parameter by `τK` (half the polygon for `N = 4n`, half plus a
//! contact offset for `N = 4n+2`) sends `D(ũ)` to `a_c b_c / D(ũ)`.
//!
//! On top of the per-polygon relations, the one-parameter motion of the
//! whole polygon (sweeping `ũ_0`) conserves the perimeter, the sum of the
//! cosines of the vertex turning angles, the quantity
//! `v_t tan²(θ/2) = k_e` at every vertex, and — for even `N`, where they
//! are pinned to `k_e^{N/2}` — the chord products.  (For odd `N` the
//! common product `∏r = ∏l` is *not* conserved: it oscillates with `ũ_0`
//! at an amplitude that decays exponentially in `N`.)  [`sweep_motion`]
//! samples the motion and reports the spread of each conserved quantity,
//! rebuilding every sampled polygon by plain geometric reflection as an
//! independent closure check.
//!
//! Checks that do not apply to a given period (odd `N`, or the wrong class
//! mod 4) are reported with `applicable: false` and never fail.

use crate::billiard::{
    build_billiard, chord_lengths, conjugate_billiard, reflect_next_geometric, Billiard,
    BilliardConfig,
};
use crate::ellipfn::jacobi_sncndn;
use crate::error::{Error, Result};
use crate::kinematics::kinematic_state;

/// Relative tolerance on `∏r = ∏l` (compared in log space).
pub const PRODUCT_EQUALITY_REL: f64 = 1e-10;
/// Relative tolerance on product *values* against powers of `k_e`
/// (compared through geometric means, so it scales with `N`).
pub const PRODUCT_VALUE_REL: f64 = 1e-9;
/// Relative tolerance on the pairwise quarter/crossed chord products.
pub const QUARTER_PRODUCT_REL: f64 = 1e-10;
/// Relative tolerance on the tangent-norm products `D D' = a_c b_c`.
pub const NORM_PRODUCT_REL: f64 = 1e-11;
/// Absolute tolerance on the alternating trigonometric sums.
pub const SUM_ABS: f64 = 1e-10;
/// Absolute tolerance on the central symmetry of vertex angles.
pub const ANGLE_ABS: f64 = 1e-10;
/// Relative tolerance on the three-way side ratios.
pub const RATIO_REL: f64 = 1e-9;
/// Relative spread allowed for conserved quantities across a sweep.
pub const SPREAD_REL: f64 = 1e-9;
/// Absolute tolerance on the reflective closure residual.
pub const CLOSURE_ABS: f64 = 1e-9;
/// Relative tolerance on `v_t tan²(θ/2) = k_e` per vertex.
pub const MOTION_CONSTANT_REL: f64 = 1e-9;

/// What a checked quantity is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectedValue {
    /// A definite target value.
    Value(f64),
    /// No target value; the quantity must merely be constant (across the
    /// polygon or across a sweep).
    Constant,
}

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    /// Descriptive identifier of the relation being checked.
    pub name: String,
    pub expected: ExpectedValue,
    /// Representative observed value (worst offender for per-index
    /// relations, mean for constancy checks).
    pub observed: f64,
    /// Largest residual encountered, in the units of `tolerance`.
    pub max_residual: f64,
    pub tolerance: f64,
    /// `max_residual <= tolerance` (vacuously true when not applicable).
    pub pass: bool,
    /// False when the relation does not apply to this period (wrong parity
    /// class); such reports never fail.
    pub applicable: bool,
}

impl InvariantReport {
    fn applicable(
        name: &str,
        expected: ExpectedValue,
        observed: f64,
        max_residual: f64,
        tolerance: f64,
    ) -> Self {
        InvariantReport {
            name: name.to_string(),
            expected,
            observed,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            applicable: true,
        }
    }

    fn not_applicable(name: &str, tolerance: f64) -> Self {
        InvariantReport {
            name: name.to_string(),
            expected: ExpectedValue::Constant,
            observed: 0.0,
            max_residual: 0.0,
            tolerance,
            pass: true,
            applicable: false,
        }
    }

    /// An applicable check that exceeded its tolerance.
    pub fn is_failure(&self) -> bool {
        self.applicable && !self.pass
    }
}

/// True when no applicable check failed.
pub fn all_pass(reports: &[InvariantReport]) -> bool {
    reports.iter().all(|r| !r.is_failure())
}

fn require_closed(billiard: &Billiard) -> Result<usize> {
    if !billiard.is_closed() {
        return Err(Error::InvalidConfig(
            "invariant checks require a closed polygon".to_string(),
        ));
    }
    Ok(billiard.vertex_count())
}

/// Chord-product relations: `∏r = ∏l` (all `N`), the value `k_e^{N/2}`
/// (even `N`, via geometric means), and the half-range value `k_e^{N/4}`
/// (`N ≡ 0 mod 4`).  Products are accumulated in log space so long
/// polygons neither overflow nor lose the comparison.
pub fn check_chord_products(billiard: &Billiard) -> Result<Vec<InvariantReport>> {
    let n = require_closed(billiard)?;
    let chords = chord_lengths(billiard)?;
    let k_e = billiard.table().k_e();
    let ln_r: Vec<f64> = chords.iter().map(|c| c.r.ln()).collect();
    let ln_l: Vec<f64> = chords.iter().map(|c| c.l.ln()).collect();
    let sum_r: f64 = ln_r.iter().sum();
    let sum_l: f64 = ln_l.iter().sum();

    let mut reports = Vec::new();

    // ∏r = ∏l: the difference of log sums is the relative mismatch.
    reports.push(InvariantReport::applicable(
        "chord products equal (prod r = prod l)",
        ExpectedValue::Value(1.0),
        (sum_r - sum_l).exp(),
        (sum_r - sum_l).abs(),
        PRODUCT_EQUALITY_REL,
    ));

    if n % 2 == 0 {
        // Geometric mean over pairs: exp(2Σln/N) must equal k_e.
        let gm_r = (2.0 * sum_r / n as f64).exp();
        let gm_l = (2.0 * sum_l / n as f64).exp();
        let res = ((gm_r - k_e).abs().max((gm_l - k_e).abs())) / k_e;
        reports.push(InvariantReport::applicable(
            "chord product value (k_e^(N/2) for even N)",
            ExpectedValue::Value(k_e),
            gm_r,
            res,
            PRODUCT_VALUE_REL,
        ));
    } else {
        reports.push(InvariantReport::not_applicable(
            "chord product value (k_e^(N/2) for even N)",
            PRODUCT_VALUE_REL,
        ));
    }

    if n % 4 == 0 {
        let half_r: f64 = ln_r[..n / 2].iter().sum();
        let half_l: f64 = ln_l[..n / 2].iter().sum();
        let gm_r = (4.0 * half_r / n as f64).exp();
        let gm_l = (4.0 * half_l / n as f64).exp();
        let res = ((gm_r - k_e).abs().max((gm_l - k_e).abs())) / k_e;
        reports.push(InvariantReport::applicable(
            "half-range chord product (k_e^(N/4) for N = 4n)",
            ExpectedValue::Value(k_e),
            gm_r,
            res,
            PRODUCT_VALUE_REL,
        ));
    } else {
        reports.push(InvariantReport::not_applicable(
            "half-range chord product (k_e^(N/4) for N = 4n)",
            PRODUCT_VALUE_REL,
        ));
    }

    Ok(reports)
}

/// Pairwise product relations a quarter period apart.
///
/// `N = 4n`: `r_i r_{i+n} = k_e`, `l_i l_{i+n} = k_e`, and the tangent
/// norms pair into `D(ũ_i) D(ũ_{i+n}) = a_c b_c` at vertices and contacts.
/// `N = 4n+2`: the crossed versions `r_i l_{i+n} = k_e`,
/// `l_i r_{i+n+1} = k_e`, `D(ũ_i) D(ũ'_{i+n}) = a_c b_c`.
pub fn check_quarter_products(billiard: &Billiard) -> Result<Vec<InvariantReport>> {
    let n_total = require_closed(billiard)?;
    let fam = billiard.family();
    let m = fam.modulus();
    let k_e = billiard.table().k_e();
    let ab = fam.a_c() * fam.b_c();
    let norm = |u: f64| fam.a_c() * jacobi_sncndn(u, m).dn;

    let mut reports = Vec::new();
    if n_total % 2 != 0 {
        for name in [
            "quarter chord products r (r_i r_{i+n} = k_e)",
            "quarter chord products l (l_i l_{i+n} = k_e)",
            "crossed chord products (r_i l_{i+n} = k_e)",
            "opposite tangent-norm products (D_i D_{i+n} = a_c b_c)",
        ] {
            reports.push(InvariantReport::not_applicable(name, QUARTER_PRODUCT_REL));
        }
        return Ok(reports);
    }

    let chords = chord_lengths(billiard)?;
    if n_total % 4 == 0 {
        let n = n_total / 4;
        let mut worst_r = (0.0f64, k_e);
        let mut worst_l = (0.0f64, k_e);
        for i in 0..n_total {
            let pr = chords[i].r * chords[(i + n) % n_total].r;
            let pl = chords[i].l * chords[(i + n) % n_total].l;
            if (pr - k_e).abs() > worst_r.0 {
                worst_r = ((pr - k_e).abs(), pr);
            }
            if (pl - k_e).abs() > worst_l.0 {
                worst_l = ((pl - k_e).abs(), pl);
            }
        }
        reports.push(InvariantReport::applicable(
            "quarter chord products r (r_i r_{i+n} = k_e)",
            ExpectedValue::Value(k_e),
            worst_r.1,
            worst_r.0 / k_e,
            QUARTER_PRODUCT_REL,
        ));
        reports.push(InvariantReport::applicable(
            "quarter chord products l (l_i l_{i+n} = k_e)",
            ExpectedValue::Value(k_e),
            worst_l.1,
            worst_l.0 / k_e,
            QUARTER_PRODUCT_REL,
        ));
        reports.push(InvariantReport::not_applicable(
            "crossed chord products (r_i l_{i+n} = k_e)",
            QUARTER_PRODUCT_REL,
        ));
        // Tangent norms at vertices and at contacts, half a polygon apart.
        let mut worst = (0.0f64, ab);
        for i in 0..n_total {
            let dv = norm(billiard.vertex_params_u()[i])
                * norm(billiard.vertex_params_u()[(i + n) % n_total]);
            let dq = norm(billiard.contact_params_u()[i])
                * norm(billiard.contact_params_u()[(i + n) % n_total]);
            for d in [dv, dq] {
                if (d - ab).abs() > worst.0 {
                    worst = ((d - ab).abs(), d);
                }
            }
        }
        reports.push(InvariantReport::applicable(
            "opposite tangent-norm products (D_i D_{i+n} = a_c b_c)",
            ExpectedValue::Value(ab),
            worst.1,
            worst.0 / ab,
            NORM_PRODUCT_REL,
        ));
    } else {
        // N = 4n + 2.
        let n = (n_total - 2) / 4;
        let mut worst_rl = (0.0f64, k_e);
        let mut worst_lr = (0.0f64, k_e);
        for i in 0..n_total {
            let prl = chords[i].r * chords[(i + n) % n_total].l;
            let plr = chords[i].l * chords[(i + n + 1) % n_total].r;
            if (prl - k_e).abs() > worst_rl.0 {
                worst_rl = ((prl - k_e).abs(), prl);
            }
            if (plr - k_e).abs() > worst_lr.0 {
                worst_lr = ((plr - k_e).abs(), plr);
            }
        }
        reports.push(InvariantReport::not_applicable(
            "quarter chord products r (r_i r_{i+n} = k_e)",
            QUARTER_PRODUCT_REL,
        ));
        reports.push(InvariantReport::not_applicable(
            "quarter chord products l (l_i l_{i+n} = k_e)",
            QUARTER_PRODUCT_REL,
        ));
        reports.push(InvariantReport::applicable(
            "crossed chord products (r_i l_{i+n} = k_e)",
            ExpectedValue::Value(k_e),
            worst_rl.1,
            (worst_rl.0.max(worst_lr.0)) / k_e,
            QUARTER_PRODUCT_REL,
        ));
        let mut worst = (0.0f64, ab);
        for i in 0..n_total {
            let d = norm(billiard.vertex_params_u()[i])
                * norm(billiard.contact_params_u()[(i + n) % n_total]);
            if (d - ab).abs() > worst.0 {
                worst = ((d - ab).abs(), d);
            }
        }
        reports.push(InvariantReport::applicable(
            "opposite tangent-norm products (D_i D_{i+n} = a_c b_c)",
            ExpectedValue::Value(ab),
            worst.1,
            worst.0 / ab,
            NORM_PRODUCT_REL,
        ));
    }
    Ok(reports)
}

/// Alternating trigonometric sums over the vertex parameters, and the
/// central symmetry of the vertex angles for even `N`.
pub fn check_angle_sums(billiard: &Billiard) -> Result<Vec<InvariantReport>> {
    let n = require_closed(billiard)?;
    let mut reports = Vec::new();

    if n % 4 == 0 {
        let mut sin_sum = 0.0;
        let mut cos_sum = 0.0;
        for (i, &t) in billiard.vertex_params_t().iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sin_sum += sign * t.sin();
            cos_sum += sign * t.cos();
        }
        reports.push(InvariantReport::applicable(
            "alternating vertex sine sum (N = 4n)",
            ExpectedValue::Value(0.0),
            sin_sum,
            sin_sum.abs(),
            SUM_ABS,
        ));
        reports.push(InvariantReport::applicable(
            "alternating vertex cosine sum (N = 4n)",
            ExpectedValue::Value(0.0),
            cos_sum,
            cos_sum.abs(),
            SUM_ABS,
        ));
    } else {
        reports.push(InvariantReport::not_applicable(
            "alternating vertex sine sum (N = 4n)",
            SUM_ABS,
        ));
        reports.push(InvariantReport::not_applicable(
            "alternating vertex cosine sum (N = 4n)",
            SUM_ABS,
        ));
    }

    if n % 4 == 2 {
        let mut sq_sum = 0.0;
        for (i, &t) in billiard.vertex_params_t().iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sq_sum += sign * t.sin().powi(2);
        }
        reports.push(InvariantReport::applicable(
            "alternating squared-sine sum (N = 4n+2)",
            ExpectedValue::Value(0.0),
            sq_sum,
            sq_sum.abs(),
            SUM_ABS,
        ));
    } else {
        reports.push(InvariantReport::not_applicable(
            "alternating squared-sine sum (N = 4n+2)",
            SUM_ABS,
        ));
    }

    if n % 2 == 0 {
        // Even polygons are centrally symmetric: θ_i = θ_{i+N/2}.
        let state = kinematic_state(billiard)?;
        let mut worst = 0.0f64;
        let mut observed = state.vertices[0].theta;
        for i in 0..n / 2 {
            let a = state.vertices[i].theta;
            let b = state.vertices[i + n / 2].theta;
            if (a - b).abs() > worst {
                worst = (a - b).abs();
                observed = a;
            }
        }
        reports.push(InvariantReport::applicable(
            "central vertex-angle symmetry (even N)",
            ExpectedValue::Constant,
            observed,
            worst,
            ANGLE_ABS,
        ));
    } else {
        reports.push(InvariantReport::not_applicable(
            "central vertex-angle symmetry (even N)",
            ANGLE_ABS,
        ));
    }

    Ok(reports)
}

/// Three-way ratios between opposite sides.
///
/// `N = 4n`: `s_{i+n}/s_i = l_{i+n}/r_{i+1} = r_{i+n+1}/l_i`;
/// `N = 4n+2`: the same with the conjugate polygon's sides `s'`:
/// `s'_{i+n}/s_i = r_{i+n+1}/r_{i+1} = l_{i+n+1}/l_i`.
pub fn check_side_ratios(billiard: &Billiard) -> Result<Vec<InvariantReport>> {
    let n_total = require_closed(billiard)?;
    let name_4n = "side ratios (s_{i+n}/s_i three-way, N = 4n)";
    let name_4n2 = "conjugate side ratios (s'_{i+n}/s_i three-way, N = 4n+2)";
    let mut reports = Vec::new();
    if n_total % 2 != 0 {
        reports.push(InvariantReport::not_applicable(name_4n, RATIO_REL));
        reports.push(InvariantReport::not_applicable(name_4n2, RATIO_REL));
        return Ok(reports);
    }
    let chords = chord_lengths(billiard)?;
    let side = |i: usize| -> f64 {
        billiard.vertices()[i % n_total]
            .distance_to(billiard.vertices()[(i + 1) % n_total])
    };
    if n_total % 4 == 0 {
        let n = n_total / 4;
        let mut worst = (0.0f64, 1.0f64);
        for i in 0..n_total {
            let q1 = side(i + n) / side(i);
            let q2 = chords[(i + n) % n_total].l / chords[(i + 1) % n_total].r;
            let q3 = chords[(i + n + 1) % n_total].r / chords[i].l;
            let spread = (q1 - q2).abs().max((q1 - q3).abs()) / q1.abs();
            if spread > worst.0 {
                worst = (spread, q1);
            }
        }
        reports.push(InvariantReport::applicable(
            name_4n,
            ExpectedValue::Constant,
            worst.1,
            worst.0,
            RATIO_REL,
        ));
        reports.push(InvariantReport::not_applicable(name_4n2, RATIO_REL));
    } else {
        let n = (n_total - 2) / 4;
        let conj = conjugate_billiard(billiard)?;
        let side_c = |i: usize| -> f64 {
            conj.vertices()[i % n_total].distance_to(conj.vertices()[(i + 1) % n_total])
        };
        let mut worst = (0.0f64, 1.0f64);
        for i in 0..n_total {
            let q1 = side_c(i + n) / side(i);
            let q2 = chords[(i + n + 1) % n_total].r / chords[(i + 1) % n_total].r;
            let q3 = chords[(i + n + 1) % n_total].l / chords[i].l;
            let spread = (q1 - q2).abs().max((q1 - q3).abs()) / q1.abs();
            if spread > worst.0 {
                worst = (spread, q1);
            }
        }
        reports.push(InvariantReport::not_applicable(name_4n, RATIO_REL));
        reports.push(InvariantReport::applicable(
            name_4n2,
            ExpectedValue::Constant,
            worst.1,
            worst.0,
            RATIO_REL,
        ));
    }
    Ok(reports)
}

/// `v_t tan²(θ/2) = k_e` at every vertex, with the measured angle `θ`.
pub fn check_motion_constant(billiard: &Billiard) -> Result<Vec<InvariantReport>> {
    require_closed(billiard)?;
    let state = kinematic_state(billiard)?;
    let k_e = billiard.table().k_e();
    let mut worst = (0.0f64, k_e);
    for v in &state.vertices {
        let res = (v.motion_constant - k_e).abs() / k_e;
        if res > worst.0 {
            worst = (res, v.motion_constant);
        }
    }
    Ok(vec![InvariantReport::applicable(
        "motion constant equals table parameter (v_t tan^2(theta/2) = k_e)",
        ExpectedValue::Value(k_e),
        worst.1,
        worst.0,
        MOTION_CONSTANT_REL,
    )])
}

/// Runs every per-polygon check and concatenates the reports.
pub fn verify_billiard(billiard: &Billiard) -> Result<Vec<InvariantReport>> {
    let mut reports = check_chord_products(billiard)?;
    reports.extend(check_quarter_products(billiard)?);
    reports.extend(check_angle_sums(billiard)?);
    reports.extend(check_side_ratios(billiard)?);
    reports.extend(check_motion_constant(billiard)?);
    Ok(reports)
}

/// One sampled position of the polygon along its one-parameter motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    /// Starting parameter of the sampled polygon.
    pub u0: f64,
    pub perimeter: f64,
    /// `Σ cos θ_i` over the vertices.
    pub sum_cos_theta: f64,
    /// `v_t tan²(θ/2)` at vertex 0.
    pub motion_constant: f64,
    /// `∏ r_i` (accumulated in log space).
    pub prod_r: f64,
    /// `∏ l_i` (accumulated in log space).
    pub prod_l: f64,
    /// Gap `|P_N − P_0|` after rebuilding the polygon by pure geometric
    /// reflection from its first two vertices.
    pub max_closure_residual: f64,
}

/// A sampled motion with constancy reports for its conserved quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSweep {
    pub samples: Vec<SweepSample>,
    pub reports: Vec<InvariantReport>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

fn constancy_report(name: &str, values: &[f64], tolerance: f64) -> InvariantReport {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut mean = 0.0;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
        mean += v;
    }
    mean /= values.len() as f64;
    // Mixed residual: relative for large conserved values, absolute for
    // small ones.  Some conserved quantities vanish identically (the
    // vertex-angle cosine sum of a 4-periodic polygon is 0), where a
    // purely relative spread would divide roundoff by roundoff.
    let spread = (max - min) / mean.abs().max(1.0);
    InvariantReport::applicable(name, ExpectedValue::Constant, mean, spread, tolerance)
}

/// Samples the one-parameter motion of a periodic billiard.
///
/// `ũ_0` offsets are taken in `[0, 2Δũ)` (one full relabelling period of
/// the construction): an even grid when `seed` is `None`, or reproducible
/// pseudo-random draws for a given seed.  Each sample records the
/// conserved quantities and a closure residual obtained by rebuilding the
/// polygon with mirror-law reflections only; the returned reports bound
/// the relative spread of each conserved quantity across the samples.
pub fn sweep_motion(
    config: &BilliardConfig,
    samples: usize,
    seed: Option<u64>,
) -> Result<MotionSweep> {
    if config.period().is_none() || config.period().unwrap().0 != config.count() {
        return Err(Error::InvalidConfig(
            "motion sweeps require a periodic configuration".to_string(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidConfig("sweep needs at least one sample".to_string()));
    }
    let span = 2.0 * config.delta_u();
    let mut rng_state = seed.map(|s| if s == 0 { 0x9E37_79B9 } else { s });
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let offset = match rng_state.as_mut() {
            None => span * k as f64 / samples as f64,
            Some(state) => span * unit_from_bits(splitmix64(state)),
        };
        let cfg = config.with_start(config.u0() + offset)?;
        let billiard = build_billiard(&cfg)?;
        let n = billiard.vertex_count();
        let state = kinematic_state(&billiard)?;
        let chords = chord_lengths(&billiard)?;
        let sum_cos: f64 = state.vertices.iter().map(|v| v.theta.cos()).sum();
        let ln_r: f64 = chords.iter().map(|c| c.r.ln()).sum();
        let ln_l: f64 = chords.iter().map(|c| c.l.ln()).sum();
        // Rebuild by reflection alone and measure how well it closes.
        let mut prev = billiard.vertices()[0];
        let mut cur = billiard.vertices()[1];
        for _ in 0..n - 1 {
            let next = reflect_next_geometric(prev, cur, billiard.table())?;
            prev = cur;
            cur = next;
        }
        let closure = cur.distance_to(billiard.vertices()[0]);
        out.push(SweepSample {
            u0: cfg.u0(),
            perimeter: billiard.perimeter(),
            sum_cos_theta: sum_cos,
            motion_constant: state.motion_constant,
            prod_r: ln_r.exp(),
            prod_l: ln_l.exp(),
            max_closure_residual: closure,
        });
    }

    let collect = |f: fn(&SweepSample) -> f64| -> Vec<f64> { out.iter().map(f).collect() };
    let mut reports = vec![
        constancy_report(
            "perimeter conserved along the motion",
            &collect(|s| s.perimeter),
            SPREAD_REL,
        ),
        constancy_report(
            "vertex-angle cosine sum conserved along the motion",
            &collect(|s| s.sum_cos_theta),
            SPREAD_REL,
        ),
        constancy_report(
            "motion constant conserved along the motion",
            &collect(|s| s.motion_constant),
            SPREAD_REL,
        ),
    ];
    // The chord products are pinned to k_e^{N/2} for even N and therefore
    // conserved; for odd N they genuinely oscillate with ũ_0 (with an
    // amplitude that decays exponentially in N), so constancy is not a
    // valid check there.
    if config.count() % 2 == 0 {
        reports.push(constancy_report(
            "chord product r conserved along the motion (even N)",
            &collect(|s| s.prod_r),
            SPREAD_REL,
        ));
        reports.push(constancy_report(
            "chord product l conserved along the motion (even N)",
            &collect(|s| s.prod_l),
            SPREAD_REL,
        ));
    } else {
        reports.push(InvariantReport::not_applicable(
            "chord product r conserved along the motion (even N)",
            SPREAD_REL,
        ));
        reports.push(InvariantReport::not_applicable(
            "chord product l conserved along the motion (even N)",
            SPREAD_REL,
        ));
    }
    let worst_closure = out
        .iter()
        .map(|s| s.max_closure_residual)
        .fold(0.0f64, f64::max);
    reports.push(InvariantReport::applicable(
        "polygon closes under pure reflection",
        ExpectedValue::Value(0.0),
        worst_closure,
        worst_closure,
        CLOSURE_ABS,
    ));
    Ok(MotionSweep {
        samples: out,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confocal::ConfocalFamily;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam21() -> ConfocalFamily {
        ConfocalFamily::new(2.0, 1.0).unwrap()
    }

    fn billiard(a_c: f64, b_c: f64, n: usize, tau: usize, u0: f64) -> Billiard {
        let fam = ConfocalFamily::new(a_c, b_c).unwrap();
        build_billiard(&BilliardConfig::periodic(fam, n, tau, u0).unwrap()).unwrap()
    }

    #[test]
    fn square_fixture_reports() {
        let b = billiard(2.0, 1.0, 4, 1, 0.0);
        let reports = verify_billiard(&b).unwrap();
        assert!(all_pass(&reports), "{reports:#?}");
        // Product value: ∏r = 2·1·2·1 = 4 = k_e², geometric mean = k_e = 2.
        let value = reports
            .iter()
            .find(|r| r.name.starts_with("chord product value"))
            .unwrap();
        assert!(value.applicable);
        assert_relative_eq!(value.observed, 2.0, max_relative = 1e-12);
        // Quarter products r_i r_{i+1} = k_e (n = 1 for the square).
        let quarter = reports
            .iter()
            .find(|r| r.name.starts_with("quarter chord products r"))
            .unwrap();
        assert!(quarter.applicable && quarter.pass);
        assert_relative_eq!(quarter.observed, 2.0, max_relative = 1e-12);
        // All 4n-class checks applicable, 4n+2-class ones not.
        assert!(
            !reports
                .iter()
                .find(|r| r.name.starts_with("crossed chord products"))
                .unwrap()
                .applicable
        );
        assert!(
            reports
                .iter()
                .find(|r| r.name.starts_with("alternating vertex sine"))
                .unwrap()
                .applicable
        );
    }

    #[test]
    fn parity_classes_get_their_checks() {
        // N = 6 (class 4n+2): crossed products and squared-sine sum apply.
        let b6 = billiard(2.0, 1.0, 6, 1, 0.37);
        let r6 = verify_billiard(&b6).unwrap();
        assert!(all_pass(&r6), "{r6:#?}");
        let crossed = r6
            .iter()
            .find(|r| r.name.starts_with("crossed chord products"))
            .unwrap();
        assert!(crossed.applicable && crossed.pass);
        assert_relative_eq!(crossed.observed, b6.table().k_e(), max_relative = 1e-9);
        assert!(
            r6.iter()
                .find(|r| r.name.starts_with("alternating squared-sine"))
                .unwrap()
                .applicable
        );
        assert!(
            !r6.iter()
                .find(|r| r.name.starts_with("alternating vertex sine"))
                .unwrap()
                .applicable
        );
        assert!(
            r6.iter()
                .find(|r| r.name.starts_with("conjugate side ratios"))
                .unwrap()
                .applicable
        );

        // N = 8, τ = 3 (class 4n): quarter products and alternating sums.
        let b8 = billiard(1.7, 0.8, 8, 3, -1.2);
        let r8 = verify_billiard(&b8).unwrap();
        assert!(all_pass(&r8), "{r8:#?}");
        assert!(
            r8.iter()
                .find(|r| r.name.starts_with("quarter chord products r"))
                .unwrap()
                .applicable
        );
        assert!(
            r8.iter()
                .find(|r| r.name.starts_with("side ratios"))
                .unwrap()
                .applicable
        );
        assert!(
            r8.iter()
                .find(|r| r.name.starts_with("half-range chord product"))
                .unwrap()
                .applicable
        );
    }

    #[test]
    fn odd_periods_never_fail_inapplicable_checks() {
        for (n, tau) in [(3usize, 1usize), (5, 2), (7, 3), (9, 2)] {
            let b = billiard(1.9, 1.1, n, tau, 0.61);
            let reports = verify_billiard(&b).unwrap();
            assert!(all_pass(&reports), "({n},{tau}): {reports:#?}");
            // Product equality holds for every period...
            let eq = reports
                .iter()
                .find(|r| r.name.starts_with("chord products equal"))
                .unwrap();
            assert!(eq.applicable && eq.pass);
            // ...while even-only checks are flagged, not failed.
            for r in &reports {
                if r.name.contains("even N")
                    || r.name.contains("4n")
                    || r.name.contains("N = 4n")
                {
                    assert!(!r.applicable, "{} should not apply to N = {n}", r.name);
                    assert!(r.pass);
                }
            }
        }
    }

    #[test]
    fn random_configurations_pass_verification() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        for _ in 0..25 {
            let b_c = rng.gen_range(0.4..1.4);
            let a_c = b_c + rng.gen_range(0.02..2.2);
            let periods = [(3usize, 1usize), (4, 1), (5, 2), (6, 1), (7, 2), (8, 1), (10, 3), (12, 5)];
            let (n, tau) = periods[rng.gen_range(0..periods.len())];
            let b = billiard(a_c, b_c, n, tau, rng.gen_range(-6.0..6.0));
            let reports = verify_billiard(&b).unwrap();
            assert!(
                all_pass(&reports),
                "({n},{tau}) a_c={a_c} b_c={b_c}: {:#?}",
                reports.iter().filter(|r| r.is_failure()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn sweep_reports_conserved_quantities() {
        let fam = fam21();
        let cfg = BilliardConfig::periodic(fam, 7, 2, 0.0).unwrap();
        let sweep = sweep_motion(&cfg, 50, None).unwrap();
        assert_eq!(sweep.samples.len(), 50);
        assert!(all_pass(&sweep.reports), "{:#?}", sweep.reports);
        // The grid starts at the configured ũ_0 and spans [0, 2Δũ).
        assert_relative_eq!(sweep.samples[0].u0, 0.0, epsilon = 1e-15);
        let last = sweep.samples.last().unwrap().u0;
        assert!(last < 2.0 * cfg.delta_u());
        // Closure residuals are tiny but nonzero (accumulated roundoff).
        for s in &sweep.samples {
            assert!(s.max_closure_residual < CLOSURE_ABS);
        }
        // Odd period: the chord products drift, so the report abstains.
        for r in &sweep.reports {
            if r.name.starts_with("chord product") {
                assert!(!r.applicable);
            }
        }
        // Even period: the chord products are pinned and must hold.
        let cfg6 = BilliardConfig::periodic(fam, 6, 1, 0.1).unwrap();
        let sweep6 = sweep_motion(&cfg6, 40, None).unwrap();
        assert!(all_pass(&sweep6.reports), "{:#?}", sweep6.reports);
        let prod = sweep6
            .reports
            .iter()
            .find(|r| r.name.starts_with("chord product r conserved"))
            .unwrap();
        assert!(prod.applicable && prod.pass);
        assert_relative_eq!(
            prod.observed,
            build_billiard(&cfg6).unwrap().table().k_e().powi(3),
            max_relative = 1e-10
        );
        // A 4-periodic polygon has supplementary reflection angles in
        // alternation, so its conserved cosine sum is identically zero;
        // the mixed spread residual must not blow up on it.
        let cfg4 = BilliardConfig::periodic(fam, 4, 1, 0.0).unwrap();
        let sweep4 = sweep_motion(&cfg4, 30, None).unwrap();
        assert!(all_pass(&sweep4.reports), "{:#?}", sweep4.reports);
        let cos_sum = sweep4
            .reports
            .iter()
            .find(|r| r.name.starts_with("vertex-angle cosine sum"))
            .unwrap();
        assert!(cos_sum.observed.abs() < 1e-12, "observed {}", cos_sum.observed);
    }

    #[test]
    fn seeded_sweeps_are_reproducible() {
        let cfg = BilliardConfig::periodic(fam21(), 5, 1, 0.2).unwrap();
        let a = sweep_motion(&cfg, 12, Some(42)).unwrap();
        let b = sweep_motion(&cfg, 12, Some(42)).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = sweep_motion(&cfg, 12, Some(43)).unwrap();
        assert_ne!(a.samples, c.samples);
        // Samples stay inside the sweep window.
        for s in &a.samples {
            assert!(s.u0 >= 0.2 && s.u0 < 0.2 + 2.0 * cfg.delta_u());
        }
        // Aperiodic configurations cannot sweep.
        let open = BilliardConfig::aperiodic(fam21(), 0.5, 0.0, 6).unwrap();
        assert!(sweep_motion(&open, 5, None).is_err());
    }

    #[test]
    fn displaced_vertex_is_detected() {
        let mut b = billiard(2.0, 1.0, 6, 1, 0.45);
        let clean = verify_billiard(&b).unwrap();
        assert!(all_pass(&clean));
        b.displace_vertex(2, 8e-4, -5e-4);
        let damaged = verify_billiard(&b).unwrap();
        assert!(!all_pass(&damaged), "damage went unnoticed");
        let eq = damaged
            .iter()
            .find(|r| r.name.starts_with("chord products equal"))
            .unwrap();
        assert!(eq.is_failure(), "chord equality must flag the displacement");
    }

    #[test]
    fn open_chains_are_rejected() {
        let open = build_billiard(
            &BilliardConfig::aperiodic(fam21(), 0.7, 0.0, 5).unwrap(),
        )
        .unwrap();
        assert!(check_chord_products(&open).is_err());
        assert!(check_quarter_products(&open).is_err());
        assert!(check_angle_sums(&open).is_err());
        assert!(check_side_ratios(&open).is_err());
        assert!(verify_billiard(&open).is_err());
    }

    #[test]
    fn report_shape_is_stable() {
        // The CLI serializes these; the full set and order must be stable.
        let b = billiard(2.0, 1.0, 4, 1, 0.3);
        let names: Vec<String> = verify_billiard(&b)
            .unwrap()
            .into_iter()
            .map(|r| r.name)
            .collect();
        assert_eq!(names.len(), 14);
        assert!(names[0].starts_with("chord products equal"));
        assert!(names.iter().all(|n| !n.is_empty()));
        // No duplicate report names.
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
    }
}
