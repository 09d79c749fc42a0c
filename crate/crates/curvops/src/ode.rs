//! Integration of the curvature reaction ODE Ṙ = 2(R² + R#R).
//!
//! The reaction term is quadratic, so generic initial data blows up in
//! finite time; a norm cap turns that into a clean stop with a recorded
//! blow-up estimate. States are symmetric by construction and their Bianchi
//! component is monitored: stored states whose residual drifts past 1e−12
//! are re-projected and the event is counted on the trajectory.

use alloc::vec::Vec;

use crate::basis::{BivectorBasis, StructureConstants};
use crate::cones::{member, min_shift, near_boundary_sample, ConeId, SearchBudget};
use crate::error::Error;
use crate::mat::{sym_eigen, Mat};
use crate::operator::{q, random_operator, ricci, CurvatureOperator, RandomMode};
use crate::parallel;
use crate::rng::Rng;
use crate::scalar;

/// Time stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step. The step is
    /// snapped so that a whole number of steps covers the horizon.
    Rk4Fixed { step: f64 },
    /// Embedded Fehlberg 4(5) pair with the standard controller
    /// (safety 0.9, exponent 1/5, scale clamped to [0.2, 5]).
    Rkf45 { rtol: f64, atol: f64 },
}

/// Which states the trajectory keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputGrid {
    /// Store accepted steps (thinned to `max_stored` for the fixed-step
    /// method).
    Natural,
    /// Store at `k`+1 evenly spaced times; the adaptive method lands on the
    /// grid exactly.
    Uniform(usize),
}

/// Integrator configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    /// Blow-up guard as a multiple of the initial norm.
    pub norm_cap_factor: f64,
    pub max_steps: usize,
    pub max_stored: usize,
    pub output: OutputGrid,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Rkf45 {
                rtol: 1e-9,
                atol: 1e-9,
            },
            norm_cap_factor: 1e6,
            max_steps: 1_000_000,
            max_stored: 4096,
            output: OutputGrid::Natural,
        }
    }
}

impl SolverConfig {
    pub fn rk4(step: f64) -> Self {
        SolverConfig {
            method: Method::Rk4Fixed { step },
            ..Self::default()
        }
    }

    pub fn rkf45(rtol: f64, atol: f64) -> Self {
        SolverConfig {
            method: Method::Rkf45 { rtol, atol },
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), Error> {
        match self.method {
            Method::Rk4Fixed { step } if step.is_nan() || step <= 0.0 => {
                Err(Error::InvalidConfig("rk4 step must be positive"))
            }
            Method::Rkf45 { rtol, atol } if rtol.is_nan() || atol.is_nan() || rtol <= 0.0 || atol <= 0.0 => {
                Err(Error::InvalidConfig("rkf45 tolerances must be positive"))
            }
            _ if self.max_steps == 0 => Err(Error::InvalidConfig("max_steps must be positive")),
            _ if self.norm_cap_factor.is_nan() || self.norm_cap_factor <= 0.0 => {
                Err(Error::InvalidConfig("norm cap factor must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Time-stamped states of one ODE solution with derived scalar tracks.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub ops: Vec<CurvatureOperator>,
    pub scal_track: Vec<f64>,
    pub ric_min_track: Vec<f64>,
    pub blown_up: bool,
    pub blowup_time_estimate: Option<f64>,
    /// Stored states whose Bianchi residual exceeded 1e−12 and were
    /// re-projected.
    pub bianchi_reprojections: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_op(&self) -> Option<&CurvatureOperator> {
        self.ops.last()
    }
}

struct Recorder {
    basis: BivectorBasis,
    traj: Trajectory,
    reproject_threshold: f64,
}

impl Recorder {
    fn new(basis: BivectorBasis) -> Self {
        Recorder {
            basis,
            traj: Trajectory {
                times: Vec::new(),
                ops: Vec::new(),
                scal_track: Vec::new(),
                ric_min_track: Vec::new(),
                blown_up: false,
                blowup_time_estimate: None,
                bianchi_reprojections: 0,
            },
            reproject_threshold: 1e-12,
        }
    }

    /// Store state; re-project (state included) if Bianchi drift shows.
    fn push(&mut self, t: f64, state: &mut Mat) -> Result<(), Error> {
        let mut op = CurvatureOperator::from_mat_unchecked(self.basis.clone(), state.clone());
        if op.bianchi_residual() > self.reproject_threshold {
            op = crate::operator::bianchi_project(state, &self.basis)?;
            *state = op.mat().clone();
            self.traj.bianchi_reprojections += 1;
        }
        let data = ricci(&op);
        self.traj.times.push(t);
        self.traj.scal_track.push(data.scal);
        self.traj
            .ric_min_track
            .push(sym_eigen(&data.ric).values[0]);
        self.traj.ops.push(op);
        Ok(())
    }
}

fn rhs(state: &Mat, basis: &BivectorBasis, sc: &StructureConstants) -> Mat {
    let op = CurvatureOperator::from_mat_unchecked(basis.clone(), state.clone());
    q(&op, sc).expect("same basis by construction").into_mat().scale(2.0)
}

/// Integrate Ṙ = 2Q(R) from `r0` up to `t_end` or the blow-up guard.
pub fn integrate(
    r0: &CurvatureOperator,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, Error> {
    if t_end.is_nan() || t_end <= 0.0 {
        return Err(Error::InvalidConfig("t_end must be positive"));
    }
    cfg.validate()?;
    let basis = r0.basis().clone();
    let sc = StructureConstants::new(&basis);
    let cap = cfg.norm_cap_factor * r0.norm().max(1e-12);

    match cfg.method {
        Method::Rk4Fixed { step } => integrate_rk4(r0, t_end, cfg, &basis, &sc, cap, step),
        Method::Rkf45 { rtol, atol } => {
            integrate_rkf45(r0, t_end, cfg, &basis, &sc, cap, rtol, atol)
        }
    }
}

fn rk4_step(y: &Mat, h: f64, basis: &BivectorBasis, sc: &StructureConstants) -> Mat {
    let k1 = rhs(y, basis, sc);
    let mut y2 = y.clone();
    y2.axpy(0.5 * h, &k1);
    let k2 = rhs(&y2, basis, sc);
    let mut y3 = y.clone();
    y3.axpy(0.5 * h, &k2);
    let k3 = rhs(&y3, basis, sc);
    let mut y4 = y.clone();
    y4.axpy(h, &k3);
    let k4 = rhs(&y4, basis, sc);
    let mut out = y.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

#[allow(clippy::too_many_arguments)]
fn integrate_rk4(
    r0: &CurvatureOperator,
    t_end: f64,
    cfg: &SolverConfig,
    basis: &BivectorBasis,
    sc: &StructureConstants,
    cap: f64,
    step: f64,
) -> Result<Trajectory, Error> {
    // snap the step so stored nodes are perfectly uniform
    let requested = scalar::round(t_end / step).max(1.0) as usize;
    let (steps, stride) = match cfg.output {
        OutputGrid::Uniform(k) => {
            let k = k.max(1);
            let mult = requested.div_ceil(k).max(1);
            (k * mult, mult)
        }
        OutputGrid::Natural => {
            let stride = requested.div_ceil(cfg.max_stored.max(1)).max(1);
            (requested.div_ceil(stride) * stride, stride)
        }
    };
    if steps > cfg.max_steps {
        return Err(Error::MaxStepsExceeded {
            steps: cfg.max_steps,
            t_reached: 0.0,
            partial: alloc::boxed::Box::new(Recorder::new(basis.clone()).traj),
        });
    }
    let h = t_end / steps as f64;

    let mut rec = Recorder::new(basis.clone());
    let mut y = r0.mat().clone();
    rec.push(0.0, &mut y)?;
    for k in 0..steps {
        let t_next = (k + 1) as f64 * h;
        let next = rk4_step(&y, h, basis, sc);
        if !next.is_finite() || next.frob_norm() > cap {
            rec.traj.blown_up = true;
            rec.traj.blowup_time_estimate = Some(t_next);
            return Ok(rec.traj);
        }
        y = next;
        if (k + 1) % stride == 0 {
            rec.push(t_next, &mut y)?;
        }
    }
    Ok(rec.traj)
}

// Fehlberg 4(5) tableau.
const A2: [f64; 1] = [0.25];
const A3: [f64; 2] = [3.0 / 32.0, 9.0 / 32.0];
const A4: [f64; 3] = [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0];
const A5: [f64; 4] = [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0];
const A6: [f64; 5] = [
    -8.0 / 27.0,
    2.0,
    -3544.0 / 2565.0,
    1859.0 / 4104.0,
    -11.0 / 40.0,
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -0.2,
    0.0,
];

#[allow(clippy::too_many_arguments)]
fn integrate_rkf45(
    r0: &CurvatureOperator,
    t_end: f64,
    cfg: &SolverConfig,
    basis: &BivectorBasis,
    sc: &StructureConstants,
    cap: f64,
    rtol: f64,
    atol: f64,
) -> Result<Trajectory, Error> {
    let mut rec = Recorder::new(basis.clone());
    let mut y = r0.mat().clone();
    let mut t = 0.0;
    rec.push(0.0, &mut y)?;

    let grid: Option<Vec<f64>> = match cfg.output {
        OutputGrid::Uniform(k) => {
            let k = k.max(1);
            Some((1..=k).map(|i| t_end * i as f64 / k as f64).collect())
        }
        OutputGrid::Natural => None,
    };
    let mut next_grid = 0usize;

    let f0 = rhs(&y, basis, sc);
    let mut h = 0.01 * (y.frob_norm() + atol) / (f0.frob_norm() + 1e-30);
    h = h.min(t_end);

    let mut stages: [Mat; 6] = core::array::from_fn(|_| Mat::zeros(y.rows(), y.cols()));
    for _step in 0..cfg.max_steps {
        if t >= t_end * (1.0 - 1e-14) {
            return Ok(rec.traj);
        }
        let mut h_try = h.min(t_end - t);
        if let Some(g) = &grid {
            if next_grid < g.len() {
                h_try = h_try.min(g[next_grid] - t);
            }
        }
        if h_try.is_nan() || h_try <= 1e-14 * t_end.max(1.0) {
            // the controller has collapsed the step; treat as blow-up
            rec.traj.blown_up = true;
            rec.traj.blowup_time_estimate = Some(t);
            return Ok(rec.traj);
        }

        stages[0] = rhs(&y, basis, sc);
        let combos: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        let mut finite = true;
        for (s, coeffs) in combos.iter().enumerate() {
            let mut ys = y.clone();
            for (j, &c) in coeffs.iter().enumerate() {
                ys.axpy(h_try * c, &stages[j]);
            }
            if !ys.is_finite() {
                finite = false;
                break;
            }
            stages[s + 1] = rhs(&ys, basis, sc);
        }
        if !finite || stages.iter().any(|s| !s.is_finite()) {
            h = h_try * 0.2;
            continue;
        }

        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for j in 0..6 {
            y5.axpy(h_try * B5[j], &stages[j]);
            y4.axpy(h_try * B4[j], &stages[j]);
        }
        if !y5.is_finite() {
            h = h_try * 0.2;
            continue;
        }

        let mut err: f64 = 0.0;
        for i in 0..y.rows() {
            for j in 0..y.cols() {
                let scale = atol + rtol * scalar::abs(y[(i, j)]).max(scalar::abs(y5[(i, j)]));
                err = err.max(scalar::abs(y5[(i, j)] - y4[(i, j)]) / scale);
            }
        }

        if err <= 1.0 {
            t += h_try;
            y = y5;
            if y.frob_norm() > cap {
                rec.traj.blown_up = true;
                rec.traj.blowup_time_estimate = Some(t);
                return Ok(rec.traj);
            }
            match &grid {
                Some(g) => {
                    if next_grid < g.len() && t >= g[next_grid] * (1.0 - 1e-14) {
                        rec.push(g[next_grid], &mut y)?;
                        next_grid += 1;
                    }
                }
                None => rec.push(t, &mut y)?,
            }
        }
        let scale = 0.9 * scalar::powf(err.max(1e-30), -0.2);
        h = h_try * scale.clamp(0.2, 5.0);
    }
    Err(Error::MaxStepsExceeded {
        steps: cfg.max_steps,
        t_reached: t,
        partial: alloc::boxed::Box::new(rec.traj),
    })
}

/// Maximum normalized deviation of the discrete d(scal)/dt from 2|ric|²
/// along the trajectory.
///
/// Uses a five-point central difference on interior nodes of uniform tracks
/// (three-point near the ends and on nonuniform tracks); only nodes with a
/// full interior stencil enter the maximum. Deviations are normalized by
/// max(1, 2|ric|²).
pub fn scal_rate_check(traj: &Trajectory) -> Result<f64, Error> {
    let len = traj.len();
    if len < 3 {
        return Err(Error::InvalidConfig(
            "scal rate check needs at least 3 trajectory points",
        ));
    }
    let ric_rate: Vec<f64> = traj
        .ops
        .iter()
        .map(|op| 2.0 * ricci(op).ric_norm_sq)
        .collect();
    let t = &traj.times;
    let s = &traj.scal_track;

    let dt0 = t[1] - t[0];
    let uniform = t
        .windows(2)
        .all(|w| scalar::abs((w[1] - w[0]) - dt0) <= 1e-9 * scalar::abs(dt0));

    let mut worst = 0.0f64;
    if uniform && len >= 5 {
        for i in 2..len - 2 {
            let fd = (-s[i + 2] + 8.0 * s[i + 1] - 8.0 * s[i - 1] + s[i - 2]) / (12.0 * dt0);
            let dev = scalar::abs(fd - ric_rate[i]) / ric_rate[i].abs().max(1.0);
            worst = worst.max(dev);
        }
    } else {
        for i in 1..len - 1 {
            let h1 = t[i] - t[i - 1];
            let h2 = t[i + 1] - t[i];
            let fd = (h1 * h1 * s[i + 1] + (h2 * h2 - h1 * h1) * s[i] - h2 * h2 * s[i - 1])
                / (h1 * h2 * (h1 + h2));
            let dev = scalar::abs(fd - ric_rate[i]) / ric_rate[i].abs().max(1.0);
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// Configuration of an invariance probe.
#[derive(Debug, Clone)]
pub struct InvarianceConfig {
    pub samples: usize,
    /// Fraction of the estimated blow-up time to track.
    pub horizon_fraction: f64,
    /// Relative distance of initial data inside the cone boundary.
    pub delta: f64,
    /// Violation threshold on the norm-relative margin.
    pub tol: f64,
    pub seed: u64,
    pub solver: SolverConfig,
    pub budget: SearchBudget,
    /// Membership evaluations per trajectory.
    pub checkpoints: usize,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        InvarianceConfig {
            samples: 100,
            horizon_fraction: 0.5,
            delta: 1e-3,
            tol: 1e-6,
            seed: 0,
            solver: SolverConfig::default(),
            budget: SearchBudget::default(),
            checkpoints: 64,
        }
    }
}

/// Per-sample outcome of an invariance probe.
#[derive(Debug, Clone)]
pub struct InvarianceSample {
    pub sample: usize,
    pub min_margin_rel: f64,
    pub time_of_min: f64,
    pub blowup_estimate: Option<f64>,
}

/// Outcome of an invariance probe.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub cone: ConeId,
    pub n: usize,
    pub min_margin_rel: f64,
    pub violations: Vec<usize>,
    pub per_sample: Vec<InvarianceSample>,
}

/// Track near-boundary cone members along the ODE and report the worst
/// norm-relative membership margin within a fraction of the blow-up time.
pub fn invariance_probe(
    cone: ConeId,
    n: usize,
    cfg: &InvarianceConfig,
) -> Result<InvarianceReport, Error> {
    if !(cfg.horizon_fraction > 0.0 && cfg.horizon_fraction < 1.0) {
        return Err(Error::InvalidConfig("horizon_fraction must be in (0, 1)"));
    }
    let results = parallel::indexed_map(cfg.samples, |i| invariance_sample(cone, n, cfg, i));
    let mut per_sample = Vec::with_capacity(cfg.samples);
    for r in results {
        per_sample.push(r?);
    }
    let min_margin_rel = per_sample
        .iter()
        .map(|s| s.min_margin_rel)
        .fold(f64::INFINITY, f64::min);
    let violations = per_sample
        .iter()
        .filter(|s| s.min_margin_rel < -cfg.tol)
        .map(|s| s.sample)
        .collect();
    Ok(InvarianceReport {
        cone,
        n,
        min_margin_rel,
        violations,
        per_sample,
    })
}

fn invariance_sample(
    cone: ConeId,
    n: usize,
    cfg: &InvarianceConfig,
    index: usize,
) -> Result<InvarianceSample, Error> {
    let mut rng = Rng::for_sample(cfg.seed, index as u64);
    let base = random_operator(n, RandomMode::Psd, &mut rng)?;
    let mut budget = cfg.budget.clone();
    budget.seed ^= (index as u64).wrapping_mul(0x2545f4914f6cdd1d);
    let r0 = near_boundary_sample(&base, cone, cfg.delta, 1e-10, &budget)?;

    // first pass: find the blow-up time under the guard
    let scan_horizon = 1e3 / r0.norm().max(1e-9);
    let scan = integrate(&r0, scan_horizon, &cfg.solver)?;
    let blowup = scan.blowup_time_estimate;
    let horizon = cfg.horizon_fraction * blowup.unwrap_or(scan_horizon);

    let mut solver = cfg.solver.clone();
    solver.output = OutputGrid::Uniform(cfg.checkpoints.max(1));
    let traj = integrate(&r0, horizon, &solver)?;

    let mut min_margin_rel = f64::INFINITY;
    let mut time_of_min = 0.0;
    for (i, op) in traj.ops.iter().enumerate() {
        let rep = member(op, cone, 1e-12, &budget)?;
        let rel = rep.margin / op.norm().max(1e-12);
        if rel < min_margin_rel {
            min_margin_rel = rel;
            time_of_min = traj.times[i];
        }
    }
    Ok(InvarianceSample {
        sample: index,
        min_margin_rel,
        time_of_min,
        blowup_estimate: blowup,
    })
}

/// Smallest shift putting the state back in the cone, for probe reporting.
pub fn shift_track(
    traj: &Trajectory,
    cone: ConeId,
    tol: f64,
    budget: &SearchBudget,
) -> Result<Vec<f64>, Error> {
    traj.ops
        .iter()
        .map(|op| min_shift(op, cone, tol, budget))
        .collect()
}
