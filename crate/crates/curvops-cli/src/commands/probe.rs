//! Invariance, tangency, defect-positivity and trajectory-bound probes.

use anyhow::{bail, Result};
use curvops::cones::{tangency_probe, TangencyConfig};
use curvops::ode::{invariance_probe, InvarianceConfig, SolverConfig};
use curvops::pinching::{
    defect_psd_probe, find_constants, theorem_probe, DefectProbeConfig, TheoremProbeConfig,
};
use std::path::Path;

use crate::config::{budget_from, check_schema, parse_cone, ProbeConfig, Provenance};
use crate::formats::{write_json, Csv, CsvField};

pub fn run(config: ProbeConfig, out_dir: &Path) -> Result<u8> {
    check_schema(config.schema)?;
    let cone = parse_cone(&config.cone)?;
    let budget = budget_from(config.starts, config.iters, config.seed);
    let provenance = Provenance::new(config.seed, config.clone());
    let comments = provenance.csv_comments();

    let violations = match config.kind.as_str() {
        "tangency" => {
            let cfg = TangencyConfig {
                samples: config.samples,
                delta: config.delta,
                tol: config.tol,
                seed: config.seed,
                budget,
            };
            let report = tangency_probe(cone, config.n, &cfg)?;

            let mut csv = Csv::new(&comments, "sample,margin,slope,first_order_exit");
            for s in &report.per_sample {
                csv.row(&[
                    CsvField::Int(s.sample as i64),
                    CsvField::Float(s.margin),
                    CsvField::Float(s.slope),
                    CsvField::Bool(s.first_order_exit),
                ]);
            }
            csv.write(&out_dir.join("samples.csv"))?;

            #[derive(serde::Serialize)]
            struct Out<'a> {
                provenance: &'a Provenance<ProbeConfig>,
                cone: String,
                n: usize,
                worst_slope: f64,
                exits: &'a [usize],
            }
            write_json(
                &out_dir.join("report.json"),
                &Out {
                    provenance: &provenance,
                    cone: cone.name().into(),
                    n: report.n,
                    worst_slope: report.worst_slope,
                    exits: &report.exits,
                },
            )?;
            println!(
                "tangency {} n={}: worst slope {}, {} first-order exits / {} samples",
                cone,
                config.n,
                report.worst_slope,
                report.exits.len(),
                config.samples
            );
            report.exits.len()
        }
        "invariance" => {
            let cfg = InvarianceConfig {
                samples: config.samples,
                horizon_fraction: config.horizon_fraction,
                delta: config.delta,
                tol: config.tol,
                seed: config.seed,
                solver: SolverConfig::rkf45(config.rtol, config.atol),
                budget,
                checkpoints: config.checkpoints,
            };
            let report = invariance_probe(cone, config.n, &cfg)?;

            let mut csv = Csv::new(&comments, "sample,min_margin_rel,time_of_min,blowup_estimate");
            for s in &report.per_sample {
                csv.row(&[
                    CsvField::Int(s.sample as i64),
                    CsvField::Float(s.min_margin_rel),
                    CsvField::Float(s.time_of_min),
                    CsvField::Float(s.blowup_estimate.unwrap_or(f64::NAN)),
                ]);
            }
            csv.write(&out_dir.join("samples.csv"))?;

            #[derive(serde::Serialize)]
            struct Out<'a> {
                provenance: &'a Provenance<ProbeConfig>,
                cone: String,
                n: usize,
                min_margin_rel: f64,
                violations: &'a [usize],
            }
            write_json(
                &out_dir.join("report.json"),
                &Out {
                    provenance: &provenance,
                    cone: cone.name().into(),
                    n: report.n,
                    min_margin_rel: report.min_margin_rel,
                    violations: &report.violations,
                },
            )?;
            println!(
                "invariance {} n={}: min relative margin {}, {} violations / {} samples",
                cone,
                config.n,
                report.min_margin_rel,
                report.violations.len(),
                config.samples
            );
            report.violations.len()
        }
        "defect-psd" => {
            let constants = find_constants(config.n, config.a, config.b)?;
            let cfg = DefectProbeConfig {
                samples: config.samples,
                tol: config.tol,
                seed: config.seed,
                budget,
            };
            let report = defect_psd_probe(&constants, cone, &cfg)?;

            let mut csv = Csv::new(
                &comments,
                "sample,t,eps,scal,defect_min_eig,ric_l_min,wedge_bound_margin",
            );
            for s in &report.per_sample {
                csv.row(&[
                    CsvField::Int(s.sample as i64),
                    CsvField::Float(s.t),
                    CsvField::Float(s.eps),
                    CsvField::Float(s.scal),
                    CsvField::Float(s.defect_min_eig),
                    CsvField::Float(s.ric_l_min),
                    CsvField::Float(s.wedge_bound_margin),
                ]);
            }
            csv.write(&out_dir.join("samples.csv"))?;

            #[derive(serde::Serialize)]
            struct Out<'a> {
                provenance: &'a Provenance<ProbeConfig>,
                cone: String,
                constants: crate::formats::ConstantsJson,
                samples: usize,
                rejected_draws: usize,
                min_defect_eig: f64,
                violations: &'a [usize],
            }
            write_json(
                &out_dir.join("report.json"),
                &Out {
                    provenance: &provenance,
                    cone: cone.name().into(),
                    constants: (&constants).into(),
                    samples: report.samples,
                    rejected_draws: report.rejected_draws,
                    min_defect_eig: report.min_defect_eig,
                    violations: &report.violations,
                },
            )?;
            println!(
                "defect-psd {} n={}: min eigenvalue {}, {} violations / {} samples",
                cone,
                config.n,
                report.min_defect_eig,
                report.violations.len(),
                report.samples
            );
            report.violations.len()
        }
        "theorem" => {
            let constants = find_constants(config.n, config.a, config.b)?;
            let cfg = TheoremProbeConfig {
                samples: config.samples,
                eps: config.eps,
                tol: config.tol,
                seed: config.seed,
                solver: SolverConfig::rkf45(config.rtol, config.atol),
                budget,
                checkpoints: config.checkpoints,
            };
            let report = theorem_probe(&constants, cone, &cfg)?;

            let mut csv = Csv::new(&comments, "sample,max_shift,window_cutoff,violated");
            for s in &report.per_sample {
                csv.row(&[
                    CsvField::Int(s.sample as i64),
                    CsvField::Float(s.max_shift),
                    CsvField::Float(s.window_cutoff.unwrap_or(f64::NAN)),
                    CsvField::Bool(s.violated),
                ]);
            }
            csv.write(&out_dir.join("samples.csv"))?;

            #[derive(serde::Serialize)]
            struct Out<'a> {
                provenance: &'a Provenance<ProbeConfig>,
                cone: String,
                constants: crate::formats::ConstantsJson,
                eps: f64,
                shift_bound: f64,
                worst_excess: f64,
                violations: &'a [usize],
            }
            write_json(
                &out_dir.join("report.json"),
                &Out {
                    provenance: &provenance,
                    cone: cone.name().into(),
                    constants: (&report.constants).into(),
                    eps: report.eps,
                    shift_bound: report.constants.k_bound * report.eps,
                    worst_excess: report.worst_excess,
                    violations: &report.violations,
                },
            )?;
            println!(
                "theorem {} n={}: worst excess over K*eps is {}, {} violations / {} samples",
                cone,
                config.n,
                report.worst_excess,
                report.violations.len(),
                config.samples
            );
            report.violations.len()
        }
        other => bail!(
            "unknown probe kind {other:?} (expected tangency, invariance, defect-psd or theorem)"
        ),
    };

    if config.expect_clean && violations > 0 {
        println!("probe expected clean but found {violations} violations");
        return Ok(1);
    }
    Ok(0)
}
