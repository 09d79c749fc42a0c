//! On-disk formats: operator JSON, report DTOs and CSV writers.
//!
//! Operators serialize as `{n, mat}` with `mat` the row-major lower triangle
//! of the bivector matrix. serde_json prints floats in shortest round-trip
//! form, so write→read→write is byte-stable.

use anyhow::{bail, Context, Result};
use curvops::cones::{MembershipReport, OracleKind, Witness};
use curvops::mat::Mat;
use curvops::operator::CurvatureOperator;
use curvops::pinching::PinchingConstants;
use curvops::BivectorBasis;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorJson {
    pub n: usize,
    /// Row-major lower triangle (diagonal included) of the N×N matrix.
    pub mat: Vec<f64>,
}

impl OperatorJson {
    pub fn from_operator(op: &CurvatureOperator) -> Self {
        let dim = op.dim();
        let mut mat = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                mat.push(op.mat()[(i, j)]);
            }
        }
        OperatorJson { n: op.n(), mat }
    }

    pub fn into_operator(self) -> Result<CurvatureOperator> {
        let basis = BivectorBasis::new(self.n)
            .with_context(|| format!("bad ambient dimension n = {}", self.n))?;
        let dim = basis.dim();
        let expected = dim * (dim + 1) / 2;
        if self.mat.len() != expected {
            bail!(
                "operator for n = {} needs {} lower-triangle entries, found {}",
                self.n,
                expected,
                self.mat.len()
            );
        }
        let mut m = Mat::zeros(dim, dim);
        let mut it = self.mat.iter();
        for i in 0..dim {
            for j in 0..=i {
                let v = *it.next().expect("length checked");
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let op = CurvatureOperator::from_mat_unchecked(basis, m);
        let residual = op.bianchi_residual();
        if residual > 1e-8 {
            bail!("operator violates the Bianchi identity (residual {residual:.3e})");
        }
        Ok(op)
    }
}

pub fn read_operator(path: &Path) -> Result<CurvatureOperator> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read operator file {}", path.display()))?;
    let parsed: OperatorJson = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse operator file {}", path.display()))?;
    parsed.into_operator()
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub kind: &'static str,
    pub vectors: Vec<Vec<f64>>,
}

impl WitnessJson {
    pub fn from_witness(w: &Witness) -> Self {
        match w {
            Witness::Eigenvector(v) => WitnessJson {
                kind: "eigenvector",
                vectors: vec![v.clone()],
            },
            Witness::EigenPair(a, b) => WitnessJson {
                kind: "eigen-pair",
                vectors: vec![a.clone(), b.clone()],
            },
            Witness::RicciDirection(v) => WitnessJson {
                kind: "ricci-direction",
                vectors: vec![v.clone()],
            },
            Witness::Scalar => WitnessJson {
                kind: "scalar",
                vectors: vec![],
            },
            Witness::TwoFrame(u, v) => WitnessJson {
                kind: "two-frame",
                vectors: vec![u.clone(), v.clone()],
            },
            Witness::FourFrame(cols) => WitnessJson {
                kind: "four-frame",
                vectors: cols.clone(),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MembershipJson {
    pub cone: String,
    pub inside: bool,
    pub margin: f64,
    pub oracle_kind: &'static str,
    pub witness: WitnessJson,
    /// Witness re-evaluated through the 4-tensor route.
    pub witness_value: f64,
}

impl MembershipJson {
    pub fn new(r: &CurvatureOperator, report: &MembershipReport) -> Self {
        MembershipJson {
            cone: report.cone.name().to_string(),
            inside: report.inside,
            margin: report.margin,
            oracle_kind: match report.oracle_kind {
                OracleKind::Exact => "exact",
                OracleKind::Heuristic => "heuristic",
            },
            witness: WitnessJson::from_witness(&report.witness),
            witness_value: curvops::cones::evaluate_witness(r, &report.witness),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConstantsJson {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_max: f64,
    pub k_bound: f64,
}

impl From<&PinchingConstants> for ConstantsJson {
    fn from(c: &PinchingConstants) -> Self {
        ConstantsJson {
            n: c.n,
            a: c.a,
            b: c.b,
            alpha: c.alpha,
            beta: c.beta,
            t_max: c.t_max,
            k_bound: c.k_bound,
        }
    }
}

/// Simple CSV accumulator; floats print in shortest round-trip form.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(comment_lines: &[String], header: &str) -> Self {
        let mut buf = String::new();
        for line in comment_lines {
            let _ = writeln!(buf, "# {line}");
        }
        let _ = writeln!(buf, "{header}");
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[CsvField]) {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            match f {
                CsvField::Int(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvField::Float(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvField::Str(s) => {
                    let _ = write!(self.buf, "{s}");
                }
                CsvField::Bool(b) => {
                    let _ = write!(self.buf, "{b}");
                }
            }
        }
        self.buf.push('\n');
    }

    pub fn write(self, path: &Path) -> Result<()> {
        fs::write(path, self.buf.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))
    }
}

#[derive(Debug)]
pub enum CsvField {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
