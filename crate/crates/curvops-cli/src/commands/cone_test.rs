//! Membership queries against one cone or all of them.

use anyhow::Result;
use curvops::cones::member;
use std::path::Path;

use crate::config::{budget_from, check_schema, parse_cone, ConeTestConfig, Provenance};
use crate::formats::{write_json, Csv, CsvField, MembershipJson, OperatorJson};
use crate::commands::resolve_operator;

pub fn run(config: ConeTestConfig, out_dir: &Path) -> Result<u8> {
    check_schema(config.schema)?;
    let cones = if config.cone == "all" {
        curvops::ConeId::ALL.to_vec()
    } else {
        vec![parse_cone(&config.cone)?]
    };
    let op = resolve_operator(config.n, &config.operator, config.seed)?;
    // dump the operator actually tested so the run can be reproduced from
    // a file spec
    write_json(
        &out_dir.join("operator.json"),
        &OperatorJson::from_operator(&op),
    )?;
    let budget = budget_from(config.starts, config.iters, config.seed);

    let mut reports = Vec::new();
    for cone in &cones {
        reports.push(member(&op, *cone, config.tol, &budget)?);
    }

    let provenance = Provenance::new(config.seed, config.clone());
    let json: Vec<MembershipJson> = reports.iter().map(|r| MembershipJson::new(&op, r)).collect();

    #[derive(serde::Serialize)]
    struct Output<'a> {
        provenance: &'a Provenance<ConeTestConfig>,
        reports: &'a [MembershipJson],
    }
    write_json(
        &out_dir.join("membership.json"),
        &Output {
            provenance: &provenance,
            reports: &json,
        },
    )?;

    let mut csv = Csv::new(
        &provenance.csv_comments(),
        "cone,inside,margin,oracle_kind",
    );
    for r in &json {
        csv.row(&[
            CsvField::Str(r.cone.clone()),
            CsvField::Bool(r.inside),
            CsvField::Float(r.margin),
            CsvField::Str(r.oracle_kind.to_string()),
        ]);
    }
    csv.write(&out_dir.join("margins.csv"))?;

    for r in &json {
        println!(
            "{:<5} inside={} margin={} ({})",
            r.cone, r.inside, r.margin, r.oracle_kind
        );
    }
    Ok(0)
}
