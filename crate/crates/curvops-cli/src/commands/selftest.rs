//! Calibration and identity suite.

use anyhow::Result;
use curvops::basis::{BivectorBasis, StructureConstants};
use curvops::mat::Mat;
use curvops::ode::{integrate, SolverConfig};
use curvops::operator::{
    bianchi_project, q, random_operator, ric_wedge_id, ricci, sharp, CurvatureOperator,
    RandomMode,
};
use curvops::rng::Rng;

pub struct SelftestOptions {
    pub max_n: usize,
    pub seed: u64,
    /// Test hook: name of a deliberately corrupted code path.
    pub inject_fault: Option<String>,
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

/// Run all checks; returns the process exit code.
pub fn run(opts: &SelftestOptions) -> Result<u8> {
    let max_n = opts.max_n.clamp(2, 8);
    let fault_scale = match opts.inject_fault.as_deref() {
        Some("bw-scale") => 1.001,
        Some(other) => anyhow::bail!("unknown fault {other:?} (expected bw-scale)"),
        None => 1.0,
    };

    let checks = vec![
        bw_identity(max_n, opts.seed, fault_scale),
        q_identity(max_n),
        sphere_trajectory(),
        bianchi_projection(opts.seed),
    ];

    let mut failed = None;
    for check in &checks {
        let status = if check.passed { "ok  " } else { "FAIL" };
        println!("{status} {:<20} {}", check.name, check.detail);
        if !check.passed && failed.is_none() {
            failed = Some(check.name);
        }
    }
    match failed {
        Some(name) => {
            println!("selftest: FAILED at {name}");
            Ok(1)
        }
        None => {
            println!("selftest: all {} checks passed", checks.len());
            Ok(0)
        }
    }
}

fn bw_identity(max_n: usize, seed: u64, fault_scale: f64) -> Check {
    let mut rng = Rng::new(seed);
    let mut worst = 0.0f64;
    for n in 2..=max_n {
        let basis = BivectorBasis::new(n).unwrap();
        let sc = StructureConstants::new(&basis);
        let id = CurvatureOperator::identity(n).unwrap();
        for _ in 0..40 {
            let r = random_operator(n, RandomMode::GaussianBianchi, &mut rng).unwrap();
            let mut lhs = r.mat().clone();
            lhs.axpy(fault_scale, &sharp(&r, &id, &sc).unwrap());
            let residual = lhs.sub(ric_wedge_id(&r).mat()).frob_norm()
                / r.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(residual);
        }
    }
    Check {
        name: "bw-identity",
        passed: worst < 1e-10,
        detail: format!("max residual {worst:.3e} over n in 2..={max_n}"),
    }
}

fn q_identity(max_n: usize) -> Check {
    let mut worst = 0.0f64;
    for n in 2..=max_n {
        let basis = BivectorBasis::new(n).unwrap();
        let sc = StructureConstants::new(&basis);
        let id = CurvatureOperator::identity(n).unwrap();
        let qi = q(&id, &sc).unwrap();
        let expected = Mat::identity(id.dim()).scale(n as f64 - 1.0);
        worst = worst.max(qi.mat().sub(&expected).frob_norm());
        let scal = ricci(&id).scal;
        worst = worst.max((scal - (n * (n - 1)) as f64).abs());
    }
    Check {
        name: "q-identity",
        passed: worst < 1e-12,
        detail: format!("max deviation {worst:.3e} from (n-1)Id and n(n-1)"),
    }
}

fn sphere_trajectory() -> Check {
    let r0 = CurvatureOperator::identity(3).unwrap();
    let traj = match integrate(&r0, 0.2, &SolverConfig::rk4(1e-4)) {
        Ok(t) => t,
        Err(e) => {
            return Check {
                name: "sphere-trajectory",
                passed: false,
                detail: format!("integration failed: {e}"),
            }
        }
    };
    let mut worst = 0.0f64;
    for (i, t) in traj.times.iter().enumerate() {
        let f = 1.0 / (1.0 - 4.0 * t);
        let expected = Mat::identity(3).scale(f);
        worst = worst
            .max(traj.ops[i].mat().sub(&expected).frob_norm() / expected.frob_norm());
    }
    let blow = integrate(&r0, 1.0, &SolverConfig::rk4(1e-4))
        .ok()
        .and_then(|t| t.blowup_time_estimate);
    let blow_ok = matches!(blow, Some(t) if (0.24..=0.26).contains(&t));
    Check {
        name: "sphere-trajectory",
        passed: worst < 1e-8 && blow_ok,
        detail: format!("max relative error {worst:.3e}, blow-up at {blow:?}"),
    }
}

fn bianchi_projection(seed: u64) -> Check {
    let mut rng = Rng::new(seed ^ 0x5555);
    let mut worst = 0.0f64;
    for n in [3usize, 4, 5] {
        let basis = BivectorBasis::new(n).unwrap();
        let dim = basis.dim();
        let mut s = Mat::from_fn(dim, dim, |_, _| rng.normal());
        s.symmetrize();
        let once = bianchi_project(&s, &basis).unwrap();
        let twice = bianchi_project(once.mat(), &basis).unwrap();
        worst = worst
            .max(twice.mat().sub(once.mat()).frob_norm() / once.norm().max(1.0));
        worst = worst.max(once.bianchi_residual());
    }
    Check {
        name: "bianchi-projection",
        passed: worst < 1e-12,
        detail: format!("max idempotence/residual {worst:.3e}"),
    }
}
