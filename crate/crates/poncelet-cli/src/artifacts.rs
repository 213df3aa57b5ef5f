//! Output documents.  Every struct serializes its fields in declaration
//! order and all maps are ordered, so reruns produce byte-identical files.

use crate::config::Config;
use crate::CliError;
use poncelet::billiard::{chord_lengths, Billiard, GridConic, PonceletGrid, ProjPoint};
use poncelet::ellipfn::complete_k;
use poncelet::invariants::{ExpectedValue, InvariantReport, MotionSweep};
use poncelet::kinematics::kinematic_state;
use serde::Serialize;

#[derive(Serialize)]
pub struct CausticDoc {
    pub a_c: f64,
    pub b_c: f64,
    pub focal_distance: f64,
    pub modulus: f64,
}

#[derive(Serialize)]
pub struct TableDoc {
    pub a_e: f64,
    pub b_e: f64,
    pub k_e: f64,
}

#[derive(Serialize)]
pub struct SpacingDoc {
    pub delta_u: f64,
    pub u0: f64,
    /// Complete quarter period `K` of the family's parametrization.
    pub quarter_period: f64,
}

#[derive(Serialize)]
pub struct PeriodDoc {
    pub n: usize,
    pub tau: usize,
}

/// A vertex or contact point with its parameters.
#[derive(Serialize)]
pub struct MarkedPointDoc {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub t: f64,
}

#[derive(Serialize)]
pub struct ChordDoc {
    pub r: f64,
    pub l: f64,
    pub r_closed: f64,
    pub l_closed: f64,
}

#[derive(Serialize)]
pub struct XyDoc {
    pub x: f64,
    pub y: f64,
}

#[derive(Serialize)]
pub struct VertexKinematicsDoc {
    pub velocity: XyDoc,
    pub tangential_speed: f64,
    pub normal_speed: f64,
    pub speed: f64,
    pub theta: f64,
    pub theta_rate: f64,
    pub motion_constant: f64,
}

#[derive(Serialize)]
pub struct KinematicsDoc {
    pub motion_constant: f64,
    pub vertices: Vec<VertexKinematicsDoc>,
    pub omegas: Vec<f64>,
    pub side_rates: Vec<f64>,
}

/// `billiard.json`: the constructed polygon and everything measured on it.
#[derive(Serialize)]
pub struct BilliardDoc {
    pub caustic: CausticDoc,
    pub table: TableDoc,
    pub spacing: SpacingDoc,
    pub period: Option<PeriodDoc>,
    pub closed: bool,
    pub perimeter: f64,
    pub turning_number: Option<usize>,
    pub vertices: Vec<MarkedPointDoc>,
    pub contacts: Vec<MarkedPointDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chords: Option<Vec<ChordDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kinematics: Option<KinematicsDoc>,
}

pub fn billiard_doc(b: &Billiard) -> Result<BilliardDoc, CliError> {
    let fam = b.family();
    let table = b.table();
    let marked = |points: &[poncelet::confocal::Point], us: &[f64], ts: &[f64]| {
        points
            .iter()
            .zip(us.iter().zip(ts))
            .map(|(p, (&u, &t))| MarkedPointDoc { x: p.x, y: p.y, u, t })
            .collect::<Vec<_>>()
    };
    let (chords, kinematics) = if b.is_closed() {
        let pairs = chord_lengths(b).map_err(crate::map_lib_error)?;
        let state = kinematic_state(b).map_err(crate::map_lib_error)?;
        let chords = pairs
            .iter()
            .map(|c| ChordDoc { r: c.r, l: c.l, r_closed: c.r_closed, l_closed: c.l_closed })
            .collect();
        let vertices = state
            .vertices
            .iter()
            .map(|v| VertexKinematicsDoc {
                velocity: XyDoc { x: v.velocity.x, y: v.velocity.y },
                tangential_speed: v.speeds.tangential,
                normal_speed: v.speeds.normal,
                speed: v.speeds.speed,
                theta: v.theta,
                theta_rate: v.theta_rate,
                motion_constant: v.motion_constant,
            })
            .collect();
        let kin = KinematicsDoc {
            motion_constant: state.motion_constant,
            vertices,
            omegas: state.omegas,
            side_rates: state.side_rates,
        };
        (Some(chords), Some(kin))
    } else {
        (None, None)
    };
    Ok(BilliardDoc {
        caustic: CausticDoc {
            a_c: fam.a_c(),
            b_c: fam.b_c(),
            focal_distance: fam.focal_distance(),
            modulus: fam.modulus().m(),
        },
        table: TableDoc { a_e: table.a_e(), b_e: table.b_e(), k_e: table.k_e() },
        spacing: SpacingDoc {
            delta_u: b.delta_u(),
            u0: b.config().u0(),
            quarter_period: complete_k(fam.modulus()),
        },
        period: b.config().period().map(|(n, tau)| PeriodDoc { n, tau }),
        closed: b.is_closed(),
        perimeter: b.perimeter(),
        turning_number: b.turning_number(),
        vertices: marked(b.vertices(), b.vertex_params_u(), b.vertex_params_t()),
        contacts: marked(b.contacts(), b.contact_params_u(), b.contact_params_t()),
        chords,
        kinematics,
    })
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectedDoc {
    Value { value: f64 },
    Constant,
}

#[derive(Serialize)]
pub struct CheckDoc {
    pub name: String,
    pub expected: ExpectedDoc,
    pub observed: f64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub applicable: bool,
}

impl CheckDoc {
    pub fn from_report(r: &InvariantReport) -> Self {
        CheckDoc {
            name: r.name.clone(),
            expected: match r.expected {
                ExpectedValue::Value(v) => ExpectedDoc::Value { value: v },
                ExpectedValue::Constant => ExpectedDoc::Constant,
            },
            observed: r.observed,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            pass: r.pass,
            applicable: r.applicable,
        }
    }
}

/// `report.json`: the verification verdict.
#[derive(Serialize)]
pub struct ReportDoc<'a> {
    pub config: &'a Config,
    pub samples: usize,
    pub seed: Option<u64>,
    pub all_pass: bool,
    pub polygon_checks: Vec<CheckDoc>,
    pub sweep_checks: Vec<CheckDoc>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConicDoc {
    Ellipse { a_e: f64, b_e: f64, k_e: f64 },
    AtInfinity,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridPointDoc {
    Finite { x: f64, y: f64 },
    AtInfinity { dx: f64, dy: f64 },
}

#[derive(Serialize)]
pub struct GridLevelDoc {
    pub j: usize,
    pub conic: ConicDoc,
    pub points: Vec<GridPointDoc>,
}

/// `grid.json`: intersections of extended sides, level by level.
#[derive(Serialize)]
pub struct GridDoc {
    pub n: usize,
    pub tau: usize,
    pub j_max: usize,
    pub level_cap: usize,
    pub levels: Vec<GridLevelDoc>,
}

pub fn grid_doc(b: &Billiard, grid: &PonceletGrid) -> GridDoc {
    let (n, tau) = b.config().period().expect("grid implies a period");
    let levels: Vec<GridLevelDoc> = grid
        .levels
        .iter()
        .map(|level| GridLevelDoc {
            j: level.j,
            conic: match &level.conic {
                GridConic::Ellipse(e) => {
                    ConicDoc::Ellipse { a_e: e.a_e(), b_e: e.b_e(), k_e: e.k_e() }
                }
                GridConic::AtInfinity => ConicDoc::AtInfinity,
            },
            points: level
                .points
                .iter()
                .map(|p| match p {
                    ProjPoint::Finite(q) => GridPointDoc::Finite { x: q.x, y: q.y },
                    ProjPoint::AtInfinity(d) => GridPointDoc::AtInfinity { dx: d.x, dy: d.y },
                })
                .collect(),
        })
        .collect();
    GridDoc {
        n,
        tau,
        j_max: levels.last().map(|l| l.j).unwrap_or(0),
        level_cap: poncelet::billiard::grid_level_cap(n),
        levels,
    }
}

/// `sweep.csv`: one row per sampled polygon along the motion.
pub fn sweep_csv(sweep: &MotionSweep) -> String {
    let mut out =
        String::from("u0,perimeter,sum_cos_theta,C,prod_r,prod_l,max_closure_residual\n");
    for s in &sweep.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.u0,
            s.perimeter,
            s.sum_cos_theta,
            s.motion_constant,
            s.prod_r,
            s.prod_l,
            s.max_closure_residual
        ));
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(doc)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))
}
