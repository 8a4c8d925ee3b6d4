//! Adaptive integration and the empirical stability experiment.
//!
//! The integrator is an embedded Dormand–Prince 5(4) scheme with PI step
//! control and fourth-order dense output. Box-boundary crossings around the
//! equilibria are localised by bisection on the dense interpolant. The
//! empirical experiment seeds trajectories at complementary distance ε from
//! the network and watches the distance at box entries.

use crate::model::Network;
use crate::realize::VectorField;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// State magnitude beyond which a trajectory counts as escaped to infinity.
pub const DIVERGE_LIMIT: f64 = 1e3;
/// Smallest admissible step.
pub const MIN_STEP: f64 = 1e-14;
/// Time tolerance of event bisection.
pub const EVENT_TIME_TOL: f64 = 1e-10;

/// A single connecting-trajectory discretisation.
pub type Polyline = Vec<Vec<f64>>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("integration exceeded {0} steps")]
    ExceededWork(usize),
    #[error("config invariant violated: {0}")]
    Config(String),
    #[error("connection polylines missing: {0}")]
    PolylineMissing(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Enter,
    Exit,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxEvent {
    pub equilibrium: usize,
    pub kind: EventKind,
    pub time: f64,
    pub state: Vec<f64>,
    /// Complementary distance to the network at the event.
    pub frak_d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub events: Vec<BoxEvent>,
    pub diverged: bool,
    /// True when a caller-supplied stop condition ended the run early.
    pub stopped: bool,
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct DenseStep {
    t: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl DenseStep {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let theta = ((t - self.t) / self.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        for i in 0..out.len() {
            out[i] = self.r[0][i]
                + theta
                    * (self.r[1][i]
                        + theta1 * (self.r[2][i] + theta * (self.r[3][i] + theta1 * self.r[4][i])));
        }
    }
}

const MAX_STEPS: usize = 20_000_000;

struct Stepper<'a> {
    field: &'a VectorField,
    rtol: f64,
    atol: f64,
    h: f64,
    h_max: f64,
    err_old: f64,
    k: Vec<Vec<f64>>,
    steps: usize,
}

impl<'a> Stepper<'a> {
    fn new(
        field: &'a VectorField,
        x0: &[f64],
        t_end: f64,
        rtol: f64,
        atol: f64,
        h_max: f64,
    ) -> Self {
        let n = x0.len();
        let mut k = vec![vec![0.0; n]; 7];
        field.eval(x0, &mut k[0]);
        let f_norm = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
        let x_norm = x0.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-3);
        // Conservative start; the controller grows the step by up to 10x per
        // accepted step, so a small h0 costs little.
        let h = (0.01 * x_norm / f_norm.max(1e-8))
            .min(t_end / 10.0)
            .min(h_max)
            .min(1.0)
            .max(MIN_STEP * 10.0);
        Stepper {
            field,
            rtol,
            atol,
            h,
            h_max,
            err_old: 1e-4,
            k,
            steps: 0,
        }
    }

    /// One accepted step: returns the new time, state and the dense
    /// interpolant covering the step.
    fn step(
        &mut self,
        t: f64,
        y: &[f64],
        t_end: f64,
    ) -> Result<(f64, Vec<f64>, DenseStep), SimError> {
        let n = y.len();
        let mut y_stage = vec![0.0; n];
        loop {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(SimError::ExceededWork(MAX_STEPS));
            }
            let h = self.h.min(t_end - t).max(MIN_STEP);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        acc += a * self.k[j][i];
                    }
                    y_stage[i] = y[i] + h * acc;
                }
                let (done, rest) = self.k.split_at_mut(s);
                let _ = done;
                self.field.eval(&y_stage, &mut rest[0]);
            }
            // Stage 7 uses the solution weights, so y_stage now holds the
            // fifth-order result and k[6] its derivative (FSAL).
            let y_new = y_stage.clone();
            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = 0.0;
                for (j, c) in E.iter().enumerate() {
                    e += c * self.k[j][i];
                }
                e *= h;
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale) * (e / scale);
            }
            // Error per unit step: the accumulated global error then tracks
            // rtol linearly instead of rtol^(4/5).
            err = (err / n as f64).sqrt() / h.min(1.0);
            if !err.is_finite() {
                // A stage overflowed; treat it as a hard rejection.
                self.h = h / 10.0;
                if self.h < MIN_STEP {
                    return Err(SimError::StepUnderflow { t });
                }
                continue;
            }

            if err <= 1.0 {
                let dense = self.make_dense(t, h, y, &y_new);
                let fac = 0.9 * err.max(1e-16).powf(-0.7 / 4.0) * self.err_old.powf(0.4 / 4.0);
                self.err_old = err.max(1e-16);
                self.k.swap(0, 6);
                self.h = (h * fac.clamp(0.2, 10.0)).min(self.h_max);
                return Ok((t + h, y_new, dense));
            }
            self.h = h * (0.9 * err.powf(-0.25)).clamp(0.1, 1.0);
            if self.h < MIN_STEP {
                return Err(SimError::StepUnderflow { t });
            }
        }
    }

    fn make_dense(&self, t: f64, h: f64, y: &[f64], y_new: &[f64]) -> DenseStep {
        let n = y.len();
        let mut r = [
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
            vec![0.0; n],
        ];
        for i in 0..n {
            let ydiff = y_new[i] - y[i];
            let bspl = h * self.k[0][i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * self.k[6][i] - bspl;
            let mut acc = 0.0;
            for (j, d) in D.iter().enumerate() {
                acc += d * self.k[j][i];
            }
            r[4][i] = h * acc;
        }
        DenseStep { t, h, r }
    }
}

/// Integrates `dx/dt = field(x)` from `x0` over `[0, t_end]`.
pub fn integrate(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<Trajectory, SimError> {
    integrate_driver(field, x0, t_end, rtol, atol, None, f64::INFINITY, |_, _| {
        false
    })
}

/// Like [`integrate`], recording ENTER/EXIT events for max-norm boxes of
/// half-width `delta_tilde` around the equilibria of `net`. Steps are capped
/// at the box size so a transit cannot tunnel through a box unnoticed.
pub fn integrate_with_events(
    field: &VectorField,
    net: &Network,
    delta_tilde: f64,
    x0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<Trajectory, SimError> {
    integrate_driver(
        field,
        x0,
        t_end,
        rtol,
        atol,
        Some((net, delta_tilde)),
        delta_tilde,
        |_, _| false,
    )
}

/// Integrates until `stop(t, x)` holds at an accepted step. The returned
/// trajectory's `stopped` flag distinguishes an early stop from running out
/// the clock.
pub fn integrate_until(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
    stop: impl FnMut(f64, &[f64]) -> bool,
) -> Result<Trajectory, SimError> {
    integrate_driver(field, x0, t_end, rtol, atol, None, f64::INFINITY, stop)
}

pub(crate) fn equilibrium_point(net: &Network, id: usize) -> Vec<f64> {
    let eq = net.equilibrium(id);
    let mut p = vec![0.0; net.n];
    p[eq.axis - 1] = eq.position;
    p
}

fn box_gap(x: &[f64], center: &[f64], delta: f64) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for i in 0..x.len() {
        m = m.max((x[i] - center[i]).abs());
    }
    m - delta
}

#[allow(clippy::too_many_arguments)]
fn integrate_driver(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
    events: Option<(&Network, f64)>,
    h_max: f64,
    mut stop: impl FnMut(f64, &[f64]) -> bool,
) -> Result<Trajectory, SimError> {
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(SimError::Config("rtol and atol must be positive".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { t: 0.0 });
    }

    let centers: Vec<(usize, Vec<f64>)> = events
        .map(|(net, _)| {
            net.equilibria
                .iter()
                .map(|e| (e.id, equilibrium_point(net, e.id)))
                .collect()
        })
        .unwrap_or_default();
    let delta = events.map(|(_, d)| d).unwrap_or(0.0);
    let mut inside: Vec<bool> = centers
        .iter()
        .map(|(_, c)| box_gap(x0, c, delta) < 0.0)
        .collect();

    let mut stepper = Stepper::new(field, x0, t_end, rtol, atol, h_max);
    let mut t = 0.0;
    let mut y = x0.to_vec();
    let mut traj = Trajectory {
        samples: vec![(t, y.clone())],
        events: Vec::new(),
        diverged: false,
        stopped: false,
    };

    while t < t_end {
        let (t_new, y_new, dense) = stepper.step(t, &y, t_end)?;

        if let Some((net, _)) = events {
            let mut crossings: Vec<(f64, usize, bool)> = Vec::new();
            for (bi, (id, center)) in centers.iter().enumerate() {
                let now_inside = box_gap(&y_new, center, delta) < 0.0;
                if now_inside != inside[bi] {
                    let t_cross = bisect_crossing(&dense, center, delta, t, t_new, inside[bi]);
                    crossings.push((t_cross, *id, now_inside));
                    inside[bi] = now_inside;
                }
            }
            crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut state = vec![0.0; y.len()];
            for (t_cross, id, entered) in crossings {
                dense.eval(t_cross, &mut state);
                traj.events.push(BoxEvent {
                    equilibrium: id,
                    kind: if entered {
                        EventKind::Enter
                    } else {
                        EventKind::Exit
                    },
                    time: t_cross,
                    state: state.clone(),
                    frak_d: frak_distance(&state, net),
                });
            }
        }

        t = t_new;
        y = y_new;
        traj.samples.push((t, y.clone()));
        if y.iter().any(|v| v.abs() > DIVERGE_LIMIT) {
            traj.diverged = true;
            break;
        }
        if stop(t, &y) {
            traj.stopped = true;
            break;
        }
    }
    Ok(traj)
}

fn bisect_crossing(
    dense: &DenseStep,
    center: &[f64],
    delta: f64,
    t_lo: f64,
    t_hi: f64,
    was_inside: bool,
) -> f64 {
    let mut lo = t_lo;
    let mut hi = t_hi;
    let mut state = vec![0.0; center.len()];
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        dense.eval(mid, &mut state);
        if (box_gap(&state, center, delta) < 0.0) == was_inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Distances

/// Complementary distance 𝔡(x, Y): minimum over connections of the max-norm
/// of x restricted to the coordinates outside the connection subspace.
pub fn frak_distance(x: &[f64], net: &Network) -> f64 {
    let mut best = f64::INFINITY;
    for conn in &net.connections {
        let mut d = 0.0f64;
        for k in 1..=net.n {
            if !conn.subspace.contains(&k) {
                d = d.max(x[k - 1].abs());
            }
        }
        best = best.min(d);
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Point-cloud discretisation of the connecting trajectories.
#[derive(Debug, Clone)]
pub struct Polylines {
    pub mesh: f64,
    /// One polyline per 1D connection, a fan of nine per 2D connection.
    pub per_connection: Vec<((usize, usize), Vec<Polyline>)>,
}

impl Polylines {
    pub fn points(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.per_connection
            .iter()
            .flat_map(|(_, lines)| lines.iter().flatten())
    }
}

/// Integrates every connection of the field and resamples the trajectories
/// at max-norm arclength `mesh`.
pub fn connection_polylines(
    field: &VectorField,
    net: &Network,
    mesh: f64,
) -> Result<Polylines, SimError> {
    if mesh <= 0.0 {
        return Err(SimError::Config("mesh must be positive".into()));
    }
    let targets: Vec<Vec<f64>> = net
        .equilibria
        .iter()
        .map(|e| equilibrium_point(net, e.id))
        .collect();
    let mut per_connection = Vec::new();
    for conn in &net.connections {
        let mut lines = Vec::new();
        for x0 in connection_seeds(net, conn, 1e-4) {
            let traj = integrate_until(field, &x0, 1e4, 1e-9, 1e-12, |_, x| {
                targets.iter().any(|p| max_norm_dist(x, p) < 1e-9)
            })?;
            let pts: Vec<Vec<f64>> = traj.samples.into_iter().map(|(_, x)| x).collect();
            lines.push(resample(&pts, mesh));
        }
        per_connection.push(((conn.from, conn.to), lines));
    }
    Ok(Polylines {
        mesh,
        per_connection,
    })
}

/// Seed points just off the source equilibrium inside the connection
/// subspace: one seed for a 1D connection, a fan of nine across the two
/// unstable directions for a 2D one.
pub fn connection_seeds(
    net: &Network,
    conn: &crate::model::Connection,
    delta: f64,
) -> Vec<Vec<f64>> {
    let from_axis = net.axis_of(conn.from);
    let base = equilibrium_point(net, conn.from);
    let e_axis = net.axis_of(conn.to);
    if conn.dim == 1 {
        let mut x = base;
        x[e_axis - 1] += delta;
        return vec![x];
    }
    let m_axis = conn
        .subspace
        .iter()
        .copied()
        .find(|k| *k != from_axis && *k != e_axis && net.lambda(conn.from, *k) > 0.0);
    let Some(m_axis) = m_axis else {
        let mut x = base;
        x[e_axis - 1] += delta;
        return vec![x];
    };
    (1..=9)
        .map(|i| {
            let phi = std::f64::consts::FRAC_PI_2 * i as f64 / 10.0;
            let mut x = base.clone();
            x[e_axis - 1] += delta * phi.cos();
            x[m_axis - 1] += delta * phi.sin();
            x
        })
        .collect()
}

fn resample(points: &[Vec<f64>], mesh: f64) -> Polyline {
    let mut out: Polyline = Vec::new();
    for p in points {
        if out
            .last()
            .map(|last| max_norm_dist(last, p) >= mesh)
            .unwrap_or(true)
        {
            out.push(p.clone());
        }
    }
    if let (Some(last_in), Some(last_out)) = (points.last(), out.last()) {
        if last_out != last_in {
            out.push(last_in.clone());
        }
    }
    out
}

/// Max-norm distance from x to the network, approximated by the equilibria
/// and the connection polylines.
pub fn max_distance(x: &[f64], net: &Network, polylines: &Polylines) -> f64 {
    let mut best = f64::INFINITY;
    for eq in &net.equilibria {
        best = best.min(max_norm_dist(x, &equilibrium_point(net, eq.id)));
    }
    for p in polylines.points() {
        best = best.min(max_norm_dist(x, p));
    }
    best
}

pub(crate) fn max_norm_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Experiment

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    /// Initial complementary distance of the sampled points.
    pub epsilon: f64,
    /// Box half-width.
    pub delta_tilde: f64,
    pub t_max: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// A trajectory whose 𝔡 exceeds this is classified as escaped.
    pub escape_threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            epsilon: 1e-3,
            delta_tilde: 0.1,
            t_max: 500.0,
            n_samples: 50,
            seed: 1,
            escape_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrajectoryClass {
    Converged,
    Escaped,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EmpiricalResult {
    EmpiricallyStable,
    EmpiricallyUnstable,
    Mixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryReport {
    pub x0: Vec<f64>,
    pub class: TrajectoryClass,
    pub sup_enter_frak_d: f64,
    pub max_frak_d: f64,
    pub final_frak_d: f64,
    pub enter_frak_d: Vec<f64>,
    /// Geometric mean of successive ENTER-event distance ratios.
    pub geo_mean_ratio: Option<f64>,
    pub diverged: bool,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub result: EmpiricalResult,
    pub trajectories: Vec<TrajectoryReport>,
}

/// Seeds `n_samples` points at complementary distance ε from random
/// connections, integrates each to `t_max` and classifies the runs.
pub fn stability_experiment(
    field: &VectorField,
    net: &Network,
    polylines: &Polylines,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, SimError> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < cfg.delta_tilde) {
        return Err(SimError::Config(format!(
            "need 0 < epsilon < delta_tilde, got epsilon = {} and delta_tilde = {}",
            cfg.epsilon, cfg.delta_tilde
        )));
    }
    let min_sep = min_equilibrium_separation(net);
    if cfg.delta_tilde >= min_sep / 2.0 {
        return Err(SimError::Config(format!(
            "delta_tilde = {} must stay below half the minimal equilibrium \
             separation {min_sep}",
            cfg.delta_tilde
        )));
    }
    if polylines.per_connection.is_empty() {
        return Err(SimError::PolylineMissing(
            "certify the connections first".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers: Vec<Vec<f64>> = net
        .equilibria
        .iter()
        .map(|e| equilibrium_point(net, e.id))
        .collect();

    let mut trajectories = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let x0 = sample_initial_point(net, polylines, cfg, &centers, &mut rng);
        let run = integrate_with_events(field, net, cfg.delta_tilde, &x0, cfg.t_max, 1e-9, 1e-12);
        let report = match run {
            Ok(traj) => classify_trajectory(net, cfg, x0, traj),
            Err(_) => TrajectoryReport {
                x0,
                class: TrajectoryClass::Undecided,
                sup_enter_frak_d: 0.0,
                max_frak_d: 0.0,
                final_frak_d: 0.0,
                enter_frak_d: Vec::new(),
                geo_mean_ratio: None,
                diverged: false,
                trajectory: None,
            },
        };
        trajectories.push(report);
    }

    let all_converged = trajectories
        .iter()
        .all(|t| t.class == TrajectoryClass::Converged);
    let any_escaped = trajectories
        .iter()
        .any(|t| t.class == TrajectoryClass::Escaped);
    let result = if all_converged {
        EmpiricalResult::EmpiricallyStable
    } else if any_escaped {
        EmpiricalResult::EmpiricallyUnstable
    } else {
        EmpiricalResult::Mixed
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        result,
        trajectories,
    })
}

fn min_equilibrium_separation(net: &Network) -> f64 {
    let pts: Vec<Vec<f64>> = net
        .equilibria
        .iter()
        .map(|e| equilibrium_point(net, e.id))
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.min(max_norm_dist(&pts[i], &pts[j]));
        }
    }
    best
}

fn sample_initial_point(
    net: &Network,
    polylines: &Polylines,
    cfg: &ExperimentConfig,
    centers: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut fallback = None;
    for _ in 0..1000 {
        let ci = rng.gen_range(0..polylines.per_connection.len());
        let ((from, to), lines) = &polylines.per_connection[ci];
        let Some(conn) = net.connection(*from, *to) else {
            continue;
        };
        let line = &lines[rng.gen_range(0..lines.len())];
        if line.is_empty() {
            continue;
        }
        let p = &line[rng.gen_range(0..line.len())];
        let comp: Vec<usize> = net.complementary_subspace(conn).into_iter().collect();
        if comp.is_empty() {
            continue;
        }
        let k = comp[rng.gen_range(0..comp.len())];
        let mut x = p.clone();
        x[k - 1] += cfg.epsilon;
        if fallback.is_none() {
            fallback = Some(x.clone());
        }
        // The first event must be a clean ENTER: skip points inside a box.
        let inside = centers
            .iter()
            .any(|c| max_norm_dist(&x, c) < cfg.delta_tilde);
        if !inside {
            return x;
        }
    }
    fallback.expect("polylines carry at least one point")
}

fn classify_trajectory(
    net: &Network,
    cfg: &ExperimentConfig,
    x0: Vec<f64>,
    traj: Trajectory,
) -> TrajectoryReport {
    let enter: Vec<f64> = traj
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Enter)
        .map(|e| e.frak_d)
        .collect();
    let sup_enter = enter.iter().copied().fold(0.0, f64::max);
    let max_frak_d = traj
        .samples
        .iter()
        .map(|(_, x)| frak_distance(x, net))
        .fold(0.0, f64::max);
    let final_d = frak_distance(&traj.samples.last().unwrap().1, net);
    let geo_mean_ratio = if enter.len() >= 2 && enter.iter().all(|d| *d > 0.0) {
        let sum: f64 = enter.windows(2).map(|w| (w[1] / w[0]).ln()).sum();
        Some((sum / (enter.len() - 1) as f64).exp())
    } else {
        None
    };

    let class = if traj.diverged || max_frak_d > cfg.escape_threshold {
        TrajectoryClass::Escaped
    } else if final_d < cfg.epsilon / 100.0 && sup_enter < cfg.escape_threshold {
        TrajectoryClass::Converged
    } else {
        TrajectoryClass::Undecided
    };
    TrajectoryReport {
        x0,
        class,
        sup_enter_frak_d: sup_enter,
        max_frak_d,
        final_frak_d: final_d,
        enter_frak_d: enter,
        geo_mean_ratio,
        diverged: traj.diverged,
        trajectory: Some(traj),
    }
}
