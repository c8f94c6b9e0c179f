//! CSV and JSON renderings of kernels and Lyapunov reports.
//!
//! Numbers are written in Rust's shortest round-trip form, so parsing the
//! output recovers every double exactly.

use serde::Serialize;

use crate::bvp::BvpShape;
use crate::error::{Error, Result};
use crate::greens::{GreensKernel, OperatorSign};
use crate::lyapunov::LyapunovReport;

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Domain(format!("CSV output: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

/// Kernel matrix: header `t\s,1,...,b`, then one row per `t`.
pub fn kernel_csv(kernel: &GreensKernel) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let span = kernel.shape().span();
    let mut header = vec!["t\\s".to_string()];
    header.extend((1..=span).map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_error)?;
    for t in kernel.t_lo()..=kernel.t_hi() {
        let mut rec = vec![t.to_string()];
        rec.extend(kernel.row(t)?.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec).map_err(csv_error)?;
    }
    finish(w)
}

#[derive(Serialize)]
struct KernelJson<'a> {
    shape: &'a BvpShape,
    a: f64,
    b: f64,
    sign: OperatorSign,
    beta: f64,
    t_lo: i64,
    t_hi: i64,
    s_lo: i64,
    s_hi: i64,
    table: Vec<&'a [f64]>,
}

/// Problem echo, `beta` and the row-major table.
pub fn kernel_json(kernel: &GreensKernel) -> Result<serde_json::Value> {
    let shape = kernel.shape();
    let table = (kernel.t_lo()..=kernel.t_hi())
        .map(|t| kernel.row(t))
        .collect::<Result<Vec<_>>>()?;
    let doc = KernelJson {
        shape,
        a: shape.base(),
        b: shape.base() + shape.span() as f64,
        sign: kernel.sign(),
        beta: kernel.beta(),
        t_lo: kernel.t_lo(),
        t_hi: kernel.t_hi(),
        s_lo: 1,
        s_hi: shape.span(),
        table,
    };
    serde_json::to_value(doc).map_err(|e| Error::Domain(e.to_string()))
}

pub const REPORT_CSV_HEADER: [&str; 10] = [
    "nu", "N", "a", "b", "pattern", "q_integral", "threshold", "ratio", "nontrivial", "holds",
];

/// One summary row per report.
pub fn reports_csv(reports: &[LyapunovReport]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(REPORT_CSV_HEADER).map_err(csv_error)?;
    for r in reports {
        w.write_record([
            r.nu.to_string(),
            r.n.to_string(),
            r.a.to_string(),
            r.b.to_string(),
            r.pattern_label.clone(),
            r.q_integral.to_string(),
            r.threshold.to_string(),
            r.ratio.to_string(),
            r.nontrivial_exists.to_string(),
            r.inequality_holds.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}
