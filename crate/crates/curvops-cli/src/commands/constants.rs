//! Pinching constants and their per-condition margin table.

use anyhow::Result;
use curvops::pinching::{condition_margins_window, find_constants};
use std::path::Path;

use crate::config::{check_schema, ConstantsConfig, Provenance};
use crate::formats::{write_json, ConstantsJson, Csv, CsvField};

pub fn run(config: ConstantsConfig, out_dir: &Path) -> Result<u8> {
    check_schema(config.schema)?;
    let constants = find_constants(config.n, config.a, config.b)?;

    let provenance = Provenance::new(0, config.clone());
    #[derive(serde::Serialize)]
    struct Out<'a> {
        provenance: &'a Provenance<ConstantsConfig>,
        constants: ConstantsJson,
    }
    write_json(
        &out_dir.join("constants.json"),
        &Out {
            provenance: &provenance,
            constants: (&constants).into(),
        },
    )?;

    let points = config.grid_points.max(2);
    let mut csv = Csv::new(&provenance.csv_comments(), "t,c1,c2,c3,c4");
    for i in 0..=points {
        let t = constants.t_max * i as f64 / points as f64;
        let m = condition_margins_window(&constants, t);
        csv.row(&[
            CsvField::Float(t),
            CsvField::Float(m.c1),
            CsvField::Float(m.c2),
            CsvField::Float(m.c3),
            CsvField::Float(m.c4),
        ]);
    }
    csv.write(&out_dir.join("margins.csv"))?;

    println!(
        "n={} A={} B={}: alpha={} beta={} T={} K={}",
        constants.n,
        constants.a,
        constants.b,
        constants.alpha,
        constants.beta,
        constants.t_max,
        constants.k_bound
    );
    Ok(0)
}
