pub mod cone_test;
pub mod constants;
pub mod integrate;
pub mod probe;
pub mod selftest;

use anyhow::{bail, Result};
use curvops::cones::near_boundary_sample;
use curvops::operator::{random_operator, CurvatureOperator, RandomMode};
use curvops::rng::Rng;
use std::path::Path;

use crate::config::{budget_from, parse_cone, OperatorSpec};

/// Materialize the operator a config points at.
pub fn resolve_operator(n: usize, spec: &OperatorSpec, seed: u64) -> Result<CurvatureOperator> {
    match spec {
        OperatorSpec::Identity => Ok(CurvatureOperator::identity(n)?),
        OperatorSpec::File { path } => {
            let op = crate::formats::read_operator(Path::new(path))?;
            if op.n() != n {
                bail!(
                    "operator file has n = {} but the config asks for n = {}",
                    op.n(),
                    n
                );
            }
            Ok(op)
        }
        OperatorSpec::Random { mode, cone, delta } => {
            let mut rng = Rng::new(seed);
            match mode.as_str() {
                "gaussian-bianchi" => {
                    Ok(random_operator(n, RandomMode::GaussianBianchi, &mut rng)?)
                }
                "psd" => Ok(random_operator(n, RandomMode::Psd, &mut rng)?),
                "near-cone-boundary" => {
                    let cone_name = cone
                        .as_deref()
                        .ok_or_else(|| anyhow::anyhow!("near-cone-boundary needs a cone"))?;
                    let cone = parse_cone(cone_name)?;
                    let base = random_operator(n, RandomMode::Psd, &mut rng)?;
                    let budget = budget_from(64, 500, seed);
                    Ok(near_boundary_sample(&base, cone, *delta, 1e-10, &budget)?)
                }
                other => bail!(
                    "unknown operator mode {other:?} (expected gaussian-bianchi, psd or near-cone-boundary)"
                ),
            }
        }
    }
}
