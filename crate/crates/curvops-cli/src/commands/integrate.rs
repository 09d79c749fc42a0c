//! Trajectory runs with CSV export.

use anyhow::Result;
use curvops::cones::member;
use std::path::Path;

use crate::commands::resolve_operator;
use crate::config::{
    budget_from, check_schema, parse_cone, solver_from, IntegrateConfig, Provenance,
};
use crate::formats::{write_json, Csv, CsvField};

pub fn run(config: IntegrateConfig, out_dir: &Path) -> Result<u8> {
    check_schema(config.schema)?;
    let r0 = resolve_operator(config.n, &config.r0, config.seed)?;
    let solver = solver_from(
        &config.method,
        config.step,
        config.rtol,
        config.atol,
        config.norm_cap_factor,
        config.max_steps,
        config.output_points,
    )?;
    let margin_cones: Vec<_> = config
        .margins
        .iter()
        .map(|name| parse_cone(name))
        .collect::<Result<_>>()?;
    let budget = budget_from(config.starts, 500, config.seed);

    let traj = curvops::ode::integrate(&r0, config.t_end, &solver)?;

    let provenance = Provenance::new(config.seed, config.clone());
    let mut header = String::from("t,norm,scal,ric_min");
    for cone in &margin_cones {
        header.push_str(&format!(",margin_{cone}"));
    }
    let mut csv = Csv::new(&provenance.csv_comments(), &header);
    for i in 0..traj.len() {
        let mut fields = vec![
            CsvField::Float(traj.times[i]),
            CsvField::Float(traj.ops[i].norm()),
            CsvField::Float(traj.scal_track[i]),
            CsvField::Float(traj.ric_min_track[i]),
        ];
        for cone in &margin_cones {
            let rep = member(&traj.ops[i], *cone, config.tol, &budget)?;
            fields.push(CsvField::Float(rep.margin));
        }
        csv.row(&fields);
    }
    csv.write(&out_dir.join("trajectory.csv"))?;

    #[derive(serde::Serialize)]
    struct TrajectoryJson<'a> {
        provenance: &'a Provenance<IntegrateConfig>,
        times: &'a [f64],
        norms: Vec<f64>,
        scal: &'a [f64],
        ric_min: &'a [f64],
        blown_up: bool,
        blowup_time_estimate: Option<f64>,
        bianchi_reprojections: usize,
    }
    write_json(
        &out_dir.join("trajectory.json"),
        &TrajectoryJson {
            provenance: &provenance,
            times: &traj.times,
            norms: traj.ops.iter().map(|op| op.norm()).collect(),
            scal: &traj.scal_track,
            ric_min: &traj.ric_min_track,
            blown_up: traj.blown_up,
            blowup_time_estimate: traj.blowup_time_estimate,
            bianchi_reprojections: traj.bianchi_reprojections,
        },
    )?;

    #[derive(serde::Serialize)]
    struct Summary<'a> {
        provenance: &'a Provenance<IntegrateConfig>,
        points: usize,
        t_last: f64,
        final_norm: f64,
        final_scal: f64,
        blown_up: bool,
        blowup_time_estimate: Option<f64>,
        bianchi_reprojections: usize,
    }
    write_json(
        &out_dir.join("summary.json"),
        &Summary {
            provenance: &provenance,
            points: traj.len(),
            t_last: *traj.times.last().unwrap_or(&0.0),
            final_norm: traj.last_op().map(|op| op.norm()).unwrap_or(0.0),
            final_scal: *traj.scal_track.last().unwrap_or(&0.0),
            blown_up: traj.blown_up,
            blowup_time_estimate: traj.blowup_time_estimate,
            bianchi_reprojections: traj.bianchi_reprojections,
        },
    )?;

    println!(
        "integrated {} points to t = {}{}",
        traj.len(),
        traj.times.last().unwrap_or(&0.0),
        if traj.blown_up {
            format!(
                ", blow-up guard at t = {}",
                traj.blowup_time_estimate.unwrap_or(f64::NAN)
            )
        } else {
            String::new()
        }
    );
    Ok(0)
}
