//! Pinching constants and the defect operator of the modified reaction ODE.
//!
//! Given a dimension n, a scalar-curvature window |t·scal| ≤ A + B·t with
//! A ∈ (0, ¼), B ≥ 0, this module constructs constants (α, β, T, K) with
//! φ(t) = 1 + β·t such that the comparison operator
//! L = R + ε(φ(t) + tα·scal)·Id evolves by a reaction term exceeding Q(L) by
//! a nonnegative defect
//!
//!   D(L) = (ε/2)(φ' + α·scal + 2tα|ric|²)·Id
//!          − 2ε(φ + tα·scal)·(ric∧id) − (n−1)ε²(φ + tα·scal)²·Id
//!
//! as long as four closed-form conditions (C1)–(C4) hold on [0, T]. The
//! probes here certify the conditions on grids, test positivity of D on
//! sampled admissible states, and run the resulting lower-bound estimate
//! R(t) ≥ −Kε·Id along actual ODE trajectories. All of this works at the
//! reaction-term level; no spatial terms are modeled.

use alloc::vec::Vec;

use crate::cones::{member, min_shift, ConeId, SearchBudget};
use crate::error::Error;
use crate::mat::{sym_eigen, Mat};
use crate::ode::{integrate, OutputGrid, SolverConfig};
use crate::operator::{random_operator, ric_wedge_id, ricci, CurvatureOperator, RandomMode};
use crate::parallel;
use crate::rng::Rng;
use crate::scalar;

/// Constants of the pinching estimate for one (n, A, B).
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingConstants {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    /// Coefficient of the t·scal term; midpoint of (2/(1−2A), 4).
    pub alpha: f64,
    /// Slope of φ(t) = 1 + β·t.
    pub beta: f64,
    /// Largest certified time: (C3) and (C4) hold with nonnegative margin on
    /// [0, T].
    pub t_max: f64,
    /// Uniform bound sup over [0, T] of φ(t) + α(A + B·t); the resulting
    /// lower-bound factor.
    pub k_bound: f64,
}

impl PinchingConstants {
    pub fn phi(&self, t: f64) -> f64 {
        1.0 + self.beta * t
    }

    pub fn phi_prime(&self) -> f64 {
        self.beta
    }

    /// Window of u = t·scal implied by |t·scal| ≤ A + B·t and
    /// scal ≥ −n(n−1).
    pub fn u_window(&self, t: f64) -> (f64, f64) {
        let n = self.n as f64;
        (-n * (n - 1.0) * t, self.a + self.b * t)
    }
}

/// Worst-case margins of the four conditions at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionMargins {
    /// φ + tα·scal ≥ 0.
    pub c1: f64,
    /// 0 ≤ (½ − t·scal)α − φ ≤ 1 (the smaller of the two sides).
    pub c2: f64,
    /// φ'/2 − n(n−1) − (n−1)(2n−1)(φ + α(A+Bt))² ≥ 0.
    pub c3: f64,
    /// The three scal-free sufficient inequalities (smallest margin).
    pub c4: f64,
}

impl ConditionMargins {
    pub fn min(&self) -> f64 {
        self.c1.min(self.c2).min(self.c3).min(self.c4)
    }
}

fn margins_at_u_window(c: &PinchingConstants, t: f64, u_lo: f64, u_hi: f64) -> ConditionMargins {
    let n = c.n as f64;
    let phi = c.phi(t);
    let alpha = c.alpha;
    let c1 = phi + alpha * u_lo;
    let c2_lower = (0.5 - u_hi) * alpha - phi;
    let c2_upper = 1.0 - ((0.5 - u_lo) * alpha - phi);
    let window = c.a + c.b * t;
    let c3 = c.beta / 2.0
        - n * (n - 1.0)
        - (n - 1.0) * (2.0 * n - 1.0) * (phi + alpha * window) * (phi + alpha * window);
    let c4_a = (0.5 - window) * alpha - phi;
    let c4_b = 1.0 - ((0.5 + t * n * (n - 1.0)) * alpha - phi);
    let c4_c = phi - n * (n - 1.0) * t * alpha;
    ConditionMargins {
        c1,
        c2: c2_lower.min(c2_upper),
        c3,
        c4: c4_a.min(c4_b).min(c4_c),
    }
}

/// Margins with scal ranging over a caller-provided interval; C3 and C4 do
/// not depend on it.
pub fn condition_margins(
    c: &PinchingConstants,
    t: f64,
    scal_range: (f64, f64),
) -> ConditionMargins {
    margins_at_u_window(c, t, t * scal_range.0, t * scal_range.1)
}

/// Margins with scal ranging over the window the estimate itself provides:
/// u = t·scal in [−n(n−1)·t, A + B·t].
pub fn condition_margins_window(c: &PinchingConstants, t: f64) -> ConditionMargins {
    let (u_lo, u_hi) = c.u_window(t);
    margins_at_u_window(c, t, u_lo, u_hi)
}

/// Construct (α, β, T, K) from (n, A, B).
///
/// α is the midpoint of (2/(1−2A), 4); β the smallest value on a geometric
/// grid giving (C3) a 10% slack at t = 0; T is found by doubling-then-
/// bisection on the first failure of min(C3, C4) and certified on a
/// 1000-point grid; K = φ(T) + α(A + B·T).
pub fn find_constants(n: usize, a: f64, b: f64) -> Result<PinchingConstants, Error> {
    if n < 2 {
        return Err(Error::InvalidDimension { n });
    }
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::InvalidConfig("A must be positive"));
    }
    if a >= 0.25 {
        return Err(Error::EmptyAlphaInterval { a });
    }
    if !b.is_finite() || b < 0.0 {
        return Err(Error::InvalidConfig("B must be nonnegative"));
    }
    let alpha = 0.5 * (2.0 / (1.0 - 2.0 * a) + 4.0);
    let nf = n as f64;

    // smallest grid beta with 10% slack in (C3) at t = 0:
    // 0.9·β/2 ≥ n(n−1) + (n−1)(2n−1)(1 + αA)²
    let lift = 1.0 + alpha * a;
    let c3_rhs = nf * (nf - 1.0) + (nf - 1.0) * (2.0 * nf - 1.0) * lift * lift;
    let mut beta = 1.0;
    let mut found = false;
    for _ in 0..2000 {
        if 0.45 * beta >= c3_rhs {
            found = true;
            break;
        }
        beta *= 1.05;
    }
    if !found {
        return Err(Error::CertificationFailure("beta grid exhausted"));
    }

    let mut constants = PinchingConstants {
        n,
        a,
        b,
        alpha,
        beta,
        t_max: 0.0,
        k_bound: 0.0,
    };
    let margin_at = |c: &PinchingConstants, t: f64| -> f64 {
        let m = condition_margins_window(c, t);
        m.c3.min(m.c4)
    };
    if margin_at(&constants, 0.0) <= 0.0 {
        return Err(Error::CertificationFailure(
            "conditions fail at t = 0 despite slack",
        ));
    }

    // bracket the first failure time, then bisect
    let mut hi = 1e-6;
    let mut doublings = 0;
    while margin_at(&constants, hi) >= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 80 {
            return Err(Error::CertificationFailure("no condition failure found"));
        }
    }
    let mut lo = if doublings == 0 { 0.0 } else { hi / 2.0 };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if margin_at(&constants, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    // back off so the certification grid sees strictly nonnegative margins
    constants.t_max = lo * (1.0 - 1e-9);
    constants.k_bound = constants.phi(constants.t_max) + alpha * (a + b * constants.t_max);

    // certification grid over [0, T]
    let grid = 1000;
    for i in 0..=grid {
        let t = constants.t_max * i as f64 / grid as f64;
        let m = condition_margins_window(&constants, t);
        if m.min() < 0.0 {
            return Err(Error::CertificationFailure("grid margin negative"));
        }
    }
    Ok(constants)
}

/// State fed to the defect operator.
#[derive(Debug, Clone)]
pub struct DefectInputs {
    pub r: CurvatureOperator,
    pub eps: f64,
    pub t: f64,
    pub scal: f64,
    pub ric_norm_sq: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub alpha: f64,
}

impl DefectInputs {
    /// Inputs with the scalar data taken from `r` itself.
    pub fn from_operator(
        r: CurvatureOperator,
        eps: f64,
        t: f64,
        constants: &PinchingConstants,
    ) -> Self {
        let data = ricci(&r);
        DefectInputs {
            eps,
            t,
            scal: data.scal,
            ric_norm_sq: data.ric_norm_sq,
            phi: constants.phi(t),
            phi_prime: constants.phi_prime(),
            alpha: constants.alpha,
            r,
        }
    }
}

/// The defect operator
/// D = (ε/2)(φ' + α·scal + 2tα|ric|²)·Id − 2ε(φ+tα·scal)·(ric∧id)
///     − (n−1)ε²(φ+tα·scal)²·Id.
pub fn defect_operator(inputs: &DefectInputs) -> Mat {
    let n = inputs.r.n() as f64;
    let shift = inputs.phi + inputs.t * inputs.alpha * inputs.scal;
    let id_coeff = 0.5
        * inputs.eps
        * (inputs.phi_prime + inputs.alpha * inputs.scal
            + 2.0 * inputs.t * inputs.alpha * inputs.ric_norm_sq)
        - (n - 1.0) * inputs.eps * inputs.eps * shift * shift;
    let mut out = ric_wedge_id(&inputs.r).into_mat().scale(-2.0 * inputs.eps * shift);
    out.shift_diag(id_coeff);
    out
}

/// Configuration for the defect positivity probe.
#[derive(Debug, Clone)]
pub struct DefectProbeConfig {
    pub samples: usize,
    /// Absolute tolerance on the smallest defect eigenvalue.
    pub tol: f64,
    pub seed: u64,
    pub budget: SearchBudget,
}

impl Default for DefectProbeConfig {
    fn default() -> Self {
        DefectProbeConfig {
            samples: 1000,
            tol: 1e-8,
            seed: 0,
            budget: SearchBudget::default(),
        }
    }
}

/// Per-sample record of the defect probe.
#[derive(Debug, Clone)]
pub struct DefectSample {
    pub sample: usize,
    pub t: f64,
    pub eps: f64,
    pub scal: f64,
    pub defect_min_eig: f64,
    /// λ_min(ric(L)); nonnegative for admissible states.
    pub ric_l_min: f64,
    /// Margin of the operator bound 2·ric∧id ≤ (scal + (n−1)²ε·shift)·Id.
    pub wedge_bound_margin: f64,
}

/// Outcome of the defect positivity probe.
#[derive(Debug, Clone)]
pub struct DefectProbeReport {
    pub cone: ConeId,
    pub n: usize,
    pub samples: usize,
    pub rejected_draws: usize,
    pub min_defect_eig: f64,
    pub violations: Vec<usize>,
    pub per_sample: Vec<DefectSample>,
}

/// Sample admissible boundary states L = R + ε(φ+tα·scal)·Id of the cone and
/// check that the defect operator is positive semidefinite on each.
///
/// A draw places L on the cone boundary (random member shifted by its
/// minimal shift), picks t uniform in [0, T] and ε uniform in [0, 1], and
/// recovers the unique scal(R) consistent with scal(L); draws violating
/// scal ≥ −ε·n(n−1) or |t·scal| ≤ A+Bt are rejected and retried.
pub fn defect_psd_probe(
    constants: &PinchingConstants,
    cone: ConeId,
    cfg: &DefectProbeConfig,
) -> Result<DefectProbeReport, Error> {
    let n = constants.n;
    let results = parallel::indexed_map(cfg.samples, |i| defect_sample(constants, cone, cfg, i));
    let mut per_sample = Vec::with_capacity(cfg.samples);
    let mut rejected = 0usize;
    for r in results {
        let (sample, rej) = r?;
        rejected += rej;
        per_sample.push(sample);
    }
    let min_defect_eig = per_sample
        .iter()
        .map(|s| s.defect_min_eig)
        .fold(f64::INFINITY, f64::min);
    let violations = per_sample
        .iter()
        .filter(|s| s.defect_min_eig < -cfg.tol)
        .map(|s| s.sample)
        .collect();
    Ok(DefectProbeReport {
        cone,
        n,
        samples: cfg.samples,
        rejected_draws: rejected,
        min_defect_eig,
        violations,
        per_sample,
    })
}

fn defect_sample(
    constants: &PinchingConstants,
    cone: ConeId,
    cfg: &DefectProbeConfig,
    index: usize,
) -> Result<(DefectSample, usize), Error> {
    let n = constants.n;
    let nf = n as f64;
    let mut rng = Rng::for_sample(cfg.seed, index as u64);
    let mut budget = cfg.budget.clone();
    budget.seed ^= (index as u64).wrapping_mul(0x9e3779b97f4a7c15);

    let mut rejections = 0usize;
    let mut boundary = {
        let base = random_operator(n, RandomMode::Psd, &mut rng)?;
        let k = min_shift(&base, cone, 1e-10, &budget)?;
        base.shifted(k)
    };
    loop {
        let t = rng.uniform() * constants.t_max;
        let eps = rng.uniform();
        let phi = constants.phi(t);
        let scal_l = ricci(&boundary).scal;
        // scal(L) = scal(R) + ε(φ + tα·scal(R))·n(n−1), solved for scal(R)
        let scal_r = (scal_l - eps * phi * nf * (nf - 1.0))
            / (1.0 + eps * t * constants.alpha * nf * (nf - 1.0));
        let window = constants.a + constants.b * t;
        let admissible =
            scal_r >= -eps * nf * (nf - 1.0) - 1e-12 && scalar::abs(t * scal_r) <= window;
        if !admissible {
            rejections += 1;
            if rejections > 500 {
                return Err(Error::CertificationFailure(
                    "defect sampler failed to draw an admissible state",
                ));
            }
            if rejections.is_multiple_of(50) {
                // persistently inadmissible scal scale: redraw the boundary
                // operator as well
                let base = random_operator(n, RandomMode::Psd, &mut rng)?;
                let k = min_shift(&base, cone, 1e-10, &budget)?;
                boundary = base.shifted(k);
            }
            continue;
        }

        let shift = phi + t * constants.alpha * scal_r;
        let r = boundary.shifted(-eps * shift);
        let inputs = DefectInputs {
            scal: scal_r,
            ric_norm_sq: ricci(&r).ric_norm_sq,
            phi,
            phi_prime: constants.phi_prime(),
            alpha: constants.alpha,
            eps,
            t,
            r,
        };
        let defect = defect_operator(&inputs);
        let defect_min_eig = sym_eigen(&defect).values[0];

        let ric_l = ricci(&boundary);
        let ric_l_min = sym_eigen(&ric_l.ric).values[0];
        // 2·ric∧id(R) ≤ (scal(R) + (n−1)²ε·shift)·Id
        let wedge_top = sym_eigen(ric_wedge_id(&inputs.r).mat()).values;
        let wedge_max = wedge_top[wedge_top.len() - 1];
        let wedge_bound_margin =
            inputs.scal + (nf - 1.0) * (nf - 1.0) * eps * shift - 2.0 * wedge_max;

        return Ok((
            DefectSample {
                sample: index,
                t,
                eps,
                scal: scal_r,
                defect_min_eig,
                ric_l_min,
                wedge_bound_margin,
            },
            rejections,
        ));
    }
}

/// Configuration for the trajectory-level lower-bound probe.
#[derive(Debug, Clone)]
pub struct TheoremProbeConfig {
    pub samples: usize,
    /// Initial lower-bound parameter ε in [0, 1].
    pub eps: f64,
    /// Slack added to the K·ε bound.
    pub tol: f64,
    pub seed: u64,
    pub solver: SolverConfig,
    pub budget: SearchBudget,
    pub checkpoints: usize,
}

impl Default for TheoremProbeConfig {
    fn default() -> Self {
        TheoremProbeConfig {
            samples: 200,
            eps: 0.5,
            tol: 1e-6,
            seed: 0,
            solver: SolverConfig::default(),
            budget: SearchBudget::default(),
            checkpoints: 64,
        }
    }
}

/// Per-sample record of the trajectory probe.
#[derive(Debug, Clone)]
pub struct TheoremSample {
    pub sample: usize,
    /// Largest minimal shift observed within the admissible window.
    pub max_shift: f64,
    /// Nodes skipped because the scalar window |scal| ≤ A/t + B failed.
    pub window_cutoff: Option<f64>,
    pub violated: bool,
}

/// Outcome of the trajectory-level probe.
#[derive(Debug, Clone)]
pub struct TheoremProbeReport {
    pub cone: ConeId,
    pub constants: PinchingConstants,
    pub eps: f64,
    pub samples: usize,
    /// max over samples of (max_shift − K·ε).
    pub worst_excess: f64,
    pub violations: Vec<usize>,
    pub per_sample: Vec<TheoremSample>,
}

/// Monte-Carlo check of the lower-bound estimate along actual reaction-ODE
/// trajectories: initial data with minimal shift ≤ ε must keep minimal shift
/// ≤ K·ε + tol for t < T while |scal(t)| ≤ A/t + B.
///
/// This exercises the reaction-term mechanism only; no spatial diffusion is
/// modeled, so it is a consistency probe rather than a PDE statement.
pub fn theorem_probe(
    constants: &PinchingConstants,
    cone: ConeId,
    cfg: &TheoremProbeConfig,
) -> Result<TheoremProbeReport, Error> {
    if !(0.0..=1.0).contains(&cfg.eps) {
        return Err(Error::InvalidConfig("eps must lie in [0, 1]"));
    }
    let results =
        parallel::indexed_map(cfg.samples, |i| theorem_sample(constants, cone, cfg, i));
    let mut per_sample = Vec::with_capacity(cfg.samples);
    for r in results {
        per_sample.push(r?);
    }
    let bound = constants.k_bound * cfg.eps;
    let worst_excess = per_sample
        .iter()
        .map(|s| s.max_shift - bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let violations = per_sample
        .iter()
        .filter(|s| s.violated)
        .map(|s| s.sample)
        .collect();
    Ok(TheoremProbeReport {
        cone,
        constants: constants.clone(),
        eps: cfg.eps,
        samples: cfg.samples,
        worst_excess,
        violations,
        per_sample,
    })
}

fn theorem_sample(
    constants: &PinchingConstants,
    cone: ConeId,
    cfg: &TheoremProbeConfig,
    index: usize,
) -> Result<TheoremSample, Error> {
    let mut rng = Rng::for_sample(cfg.seed, index as u64);
    let mut budget = cfg.budget.clone();
    budget.seed ^= (index as u64).wrapping_mul(0x6a09e667f3bcc909);

    let base = random_operator(constants.n, RandomMode::Psd, &mut rng)?;
    let k = min_shift(&base, cone, 1e-10, &budget)?;
    let boundary = base.shifted(k);
    // initial minimal shift drawn in [0, ε]
    let eps_used = cfg.eps * rng.uniform();
    let r0 = boundary.shifted(-eps_used);

    let mut solver = cfg.solver.clone();
    solver.output = OutputGrid::Uniform(cfg.checkpoints.max(1));
    let traj = integrate(&r0, constants.t_max, &solver)?;

    let bound = constants.k_bound * cfg.eps + cfg.tol;
    let mut max_shift = f64::NEG_INFINITY;
    let mut window_cutoff = None;
    let mut violated = false;
    for (i, op) in traj.ops.iter().enumerate() {
        let t = traj.times[i];
        if t > 0.0 {
            let scal_bound = constants.a / t + constants.b;
            if scalar::abs(traj.scal_track[i]) > scal_bound {
                window_cutoff = Some(t);
                break;
            }
        }
        if t >= constants.t_max {
            break;
        }
        let shift = min_shift(op, cone, 1e-10, &budget)?;
        max_shift = max_shift.max(shift);
        if shift > bound {
            violated = true;
        }
    }
    Ok(TheoremSample {
        sample: index,
        max_shift,
        window_cutoff,
        violated,
    })
}

/// Membership report for the comparison operator L at a sampled state;
/// exposed for diagnostics.
pub fn comparison_membership(
    constants: &PinchingConstants,
    r: &CurvatureOperator,
    eps: f64,
    t: f64,
    cone: ConeId,
    budget: &SearchBudget,
) -> Result<crate::cones::MembershipReport, Error> {
    let scal = ricci(r).scal;
    let l = r.shifted(eps * (constants.phi(t) + t * constants.alpha * scal));
    member(&l, cone, 1e-10, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{wedge_sym, BivectorBasis};
    use crate::operator::to_tensor;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_midpoint_and_c4_at_zero() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        assert_relative_eq!(c.alpha, 3.25, epsilon = 1e-12);
        // C4 at t = 0 reduces to α(½−A) − 1 ≥ 0, α/2 − 1 ≤ 1, 1 ≥ 0
        let m = condition_margins_window(&c, 0.0);
        assert_relative_eq!(m.c4, (0.5 - c.a) * c.alpha - 1.0, epsilon = 1e-12);
        assert!(m.c1 >= 0.0 && m.c2 >= 0.0 && m.c3 > 0.0 && m.c4 > 0.0);
    }

    #[test]
    fn c4_boundary_alphas() {
        // at the interval endpoints one of the t = 0 inequalities is tight
        let mut c = find_constants(3, 0.1, 1.0).unwrap();
        c.alpha = 2.0 / (1.0 - 2.0 * c.a);
        let m = condition_margins_window(&c, 0.0);
        assert!(m.c4.abs() < 1e-12);
        c.alpha = 4.0;
        let m = condition_margins_window(&c, 0.0);
        assert!(m.c4.abs() < 1e-12);
        // outside the closed interval C4 fails at t = 0
        c.alpha = 4.2;
        assert!(condition_margins_window(&c, 0.0).c4 < 0.0);
        c.alpha = 2.0 / (1.0 - 2.0 * c.a) - 0.2;
        assert!(condition_margins_window(&c, 0.0).c4 < 0.0);
    }

    #[test]
    fn example_constants_n3() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        // β must clear the no-slack bound 2(6 + 10·1.325²)
        assert!(c.beta >= 47.1125);
        assert!(c.t_max > 0.0);
        assert_relative_eq!(
            c.k_bound,
            1.0 + c.beta * c.t_max + c.alpha * (0.1 + c.t_max),
            epsilon = 1e-12
        );
        assert!(c.k_bound >= 1.0);
        // C3 at t = 0 with the stated slack
        let m = condition_margins_window(&c, 0.0);
        assert!(m.c3 >= 0.1 * c.beta / 2.0 - 1e-9);
    }

    #[test]
    fn constants_for_n2() {
        let c = find_constants(2, 0.1, 1.0).unwrap();
        // C3 at t = 0 needs β/2 ≥ 2 + 3(1+αA)²
        let rhs = 2.0 + 3.0 * (1.0 + c.alpha * c.a).powi(2);
        assert!(c.beta / 2.0 >= rhs);
        assert!(c.t_max > 0.0);
    }

    #[test]
    fn invalid_windows_rejected() {
        assert!(matches!(
            find_constants(3, 0.25, 1.0),
            Err(Error::EmptyAlphaInterval { .. })
        ));
        assert!(matches!(
            find_constants(3, 0.3, 1.0),
            Err(Error::EmptyAlphaInterval { .. })
        ));
        assert!(matches!(
            find_constants(3, -0.1, 1.0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            find_constants(1, 0.1, 1.0),
            Err(Error::InvalidDimension { .. })
        ));
    }

    #[test]
    fn b_zero_accepted() {
        let c = find_constants(3, 0.1, 0.0).unwrap();
        assert!(c.t_max > 0.0);
        assert!(c.k_bound >= 1.0);
    }

    #[test]
    fn alpha_interval_shrinks_with_a() {
        let width = |a: f64| 4.0 - 2.0 / (1.0 - 2.0 * a);
        let mut previous = width(0.01);
        for a in [0.05, 0.1, 0.15, 0.2, 0.24] {
            let w = width(a);
            assert!(w < previous);
            previous = w;
        }
        // and α approaches the midpoint of (2, 4) as A -> 0
        let c = find_constants(3, 1e-9, 1.0).unwrap();
        assert_relative_eq!(c.alpha, 3.0, epsilon = 1e-7);
    }

    #[test]
    fn margins_on_grid() {
        for n in [2, 3, 4] {
            let c = find_constants(n, 0.1, 1.0).unwrap();
            for i in 0..=1000 {
                let t = c.t_max * i as f64 / 1000.0;
                let m = condition_margins_window(&c, t);
                assert!(m.min() >= 0.0, "n={n} t={t}: {m:?}");
            }
        }
    }

    #[test]
    fn k_bound_is_supremum() {
        let c = find_constants(4, 0.05, 0.5).unwrap();
        let mut sup = f64::NEG_INFINITY;
        for i in 0..=5000 {
            let t = c.t_max * i as f64 / 5000.0;
            sup = sup.max(c.phi(t) + c.alpha * (c.a + c.b * t));
        }
        assert_relative_eq!(c.k_bound, sup, epsilon = 1e-10);
    }

    #[test]
    fn defect_zero_at_eps_zero() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        let r = CurvatureOperator::identity(3).unwrap();
        let inputs = DefectInputs::from_operator(r, 0.0, 0.5 * c.t_max, &c);
        assert_eq!(defect_operator(&inputs).frob_norm(), 0.0);
    }

    #[test]
    fn defect_identity_hand_expansion() {
        // R = Id, ε = 1, t = 0: every term is a multiple of Id
        let c = find_constants(3, 0.1, 1.0).unwrap();
        let n = 3.0;
        let r = CurvatureOperator::identity(3).unwrap();
        let inputs = DefectInputs::from_operator(r, 1.0, 0.0, &c);
        assert_eq!(inputs.scal, n * (n - 1.0));
        let d = defect_operator(&inputs);
        let expected = 0.5 * (c.beta + c.alpha * n * (n - 1.0))
            - 2.0 * (n - 1.0)
            - (n - 1.0);
        let diff = d.sub(&Mat::identity(3).scale(expected)).frob_norm();
        assert!(diff < 1e-12, "defect differs from hand expansion by {diff}");
    }

    /// Independent route: tensor-level Ricci contraction and wedge, scalar
    /// coefficients recomputed from scratch.
    #[test]
    fn defect_dual_path() {
        let c = find_constants(4, 0.1, 1.0).unwrap();
        let mut rng = Rng::new(314);
        for i in 0..10 {
            let r = random_operator(4, RandomMode::GaussianBianchi, &mut rng).unwrap();
            let eps = rng.uniform();
            let t = rng.uniform() * c.t_max;
            let inputs = DefectInputs::from_operator(r.clone(), eps, t, &c);
            let d = defect_operator(&inputs);

            // oracle path
            let tensor = to_tensor(&r);
            let n = 4usize;
            let mut ric = Mat::zeros(n, n);
            for p in 0..n {
                for q in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += tensor.get(p, j, q, j);
                    }
                    ric[(p, q)] = acc;
                }
            }
            let scal: f64 = ric.trace();
            let ric_sq = ric.frob_dot(&ric);
            let basis = BivectorBasis::new(n).unwrap();
            let wedge = wedge_sym(&ric, &Mat::identity(n), &basis).unwrap();
            let shift = c.phi(t) + t * c.alpha * scal;
            let mut oracle = wedge.scale(-2.0 * eps * shift);
            oracle.shift_diag(
                0.5 * eps * (c.beta + c.alpha * scal + 2.0 * t * c.alpha * ric_sq)
                    - 3.0 * eps * eps * shift * shift,
            );
            let err = d.sub(&oracle).frob_norm() / d.frob_norm().max(1.0);
            assert!(err < 1e-10, "sample {i}: dual-path mismatch {err}");
        }
    }

    /// D is affine in φ' and quadratic in ε; finite differences confirm.
    #[test]
    fn defect_parameter_structure() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        let mut rng = Rng::new(2718);
        let r = random_operator(3, RandomMode::GaussianBianchi, &mut rng).unwrap();
        let mut inputs = DefectInputs::from_operator(r, 0.7, 0.5 * c.t_max, &c);

        // second difference in φ' vanishes (linearity)
        let h = 0.5;
        let base = defect_operator(&inputs);
        inputs.phi_prime += h;
        let plus = defect_operator(&inputs);
        inputs.phi_prime -= 2.0 * h;
        let minus = defect_operator(&inputs);
        inputs.phi_prime += h;
        let second = plus.add(&minus).sub(&base.scale(2.0));
        assert!(second.frob_norm() < 1e-10);

        // third difference in ε vanishes (quadratic)
        let he = 0.05;
        let d_at = |inputs: &mut DefectInputs, e: f64| {
            inputs.eps = e;
            defect_operator(inputs)
        };
        let e0 = inputs.eps;
        let d0 = d_at(&mut inputs, e0);
        let d1 = d_at(&mut inputs, e0 + he);
        let d2 = d_at(&mut inputs, e0 + 2.0 * he);
        let d3 = d_at(&mut inputs, e0 + 3.0 * he);
        let third = d3
            .sub(&d2.scale(3.0))
            .add(&d1.scale(3.0))
            .sub(&d0);
        assert!(third.frob_norm() < 1e-9);
        // while the second difference does not (genuinely quadratic)
        let second = d2.sub(&d1.scale(2.0)).add(&d0);
        assert!(second.frob_norm() > 1e-6);
    }

    #[test]
    fn defect_probe_small_run() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        let cfg = DefectProbeConfig {
            samples: 50,
            seed: 11,
            ..DefectProbeConfig::default()
        };
        let report = defect_psd_probe(&c, ConeId::Co, &cfg).unwrap();
        assert!(
            report.violations.is_empty(),
            "defect violations with min eig {}",
            report.min_defect_eig
        );
        for s in &report.per_sample {
            // sampled boundary operators have nonnegative Ricci
            assert!(s.ric_l_min >= -1e-9, "sample {}: ric {}", s.sample, s.ric_l_min);
            // and satisfy the wedge comparison used in the estimate
            assert!(
                s.wedge_bound_margin >= -1e-9,
                "sample {}: wedge bound {}",
                s.sample,
                s.wedge_bound_margin
            );
        }
    }

    #[test]
    fn theorem_probe_eps_zero_is_invariance() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        let cfg = TheoremProbeConfig {
            samples: 10,
            eps: 0.0,
            seed: 21,
            ..TheoremProbeConfig::default()
        };
        let report = theorem_probe(&c, ConeId::Co, &cfg).unwrap();
        assert!(report.violations.is_empty());
        assert!(report.worst_excess <= cfg.tol);
    }

    #[test]
    fn theorem_probe_interior_sphere() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        // the identity line stays positive, so its minimal shift never
        // approaches the bound
        let cfg = TheoremProbeConfig {
            samples: 1,
            eps: 0.5,
            seed: 0,
            ..TheoremProbeConfig::default()
        };
        let r0 = CurvatureOperator::identity(3).unwrap();
        let mut solver = cfg.solver.clone();
        solver.output = OutputGrid::Uniform(16);
        let traj = integrate(&r0, c.t_max, &solver).unwrap();
        for op in &traj.ops {
            let shift = min_shift(op, ConeId::Co, 1e-10, &cfg.budget).unwrap();
            assert!(shift <= 0.0);
        }
    }

    #[test]
    fn theorem_probe_small_run() {
        let c = find_constants(3, 0.1, 1.0).unwrap();
        let cfg = TheoremProbeConfig {
            samples: 20,
            eps: 0.5,
            seed: 77,
            ..TheoremProbeConfig::default()
        };
        let report = theorem_probe(&c, ConeId::Co, &cfg).unwrap();
        assert!(
            report.violations.is_empty(),
            "worst excess {}",
            report.worst_excess
        );
    }
}
