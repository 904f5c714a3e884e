//! CSV emission. Rows are written in input order; failed points keep their
//! parameters and carry the error in the status column.

use std::io::Write;

use csv::Writer;
use std::time::{SystemTime, UNIX_EPOCH};

use geon_core::{RateResult, ResponseResult, VacuumKind};

pub const RESPONSE_HEADER: [&str; 12] =
    ["sweep_var", "value", "vacuum", "r", "Omega", "sigma", "tau0", "F_BH", "F_J", "F_total", "err_est", "status"];
pub const RATE_HEADER: [&str; 11] =
    ["sweep_var", "value", "vacuum", "r", "Omega", "tau0", "rate_BH", "rate_J_delta", "rate_J_pv", "rate_J_total", "status"];

/// Optional leading comment with the generation time.
pub fn preamble(out: &mut dyn Write, timestamp: bool) -> std::io::Result<()> {
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        writeln!(out, "# generated by geon {} at unix time {secs}", env!("CARGO_PKG_VERSION"))?;
    }
    Ok(())
}

/// Sweep variable and value; both empty-valued for a single point.
pub struct Key<'a> {
    pub var: &'a str,
    pub value: Option<f64>,
}

impl Key<'_> {
    fn fields(&self) -> (String, String) {
        (self.var.to_string(), self.value.map_or(String::new(), |v| v.to_string()))
    }
}

fn status(err: Option<&geon_core::Error>) -> String {
    match err {
        None => "ok".into(),
        Some(e) => format!("error: {e}"),
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub struct ResponseRow<'a> {
    pub key: Key<'a>,
    pub vacuum: VacuumKind,
    pub r: f64,
    pub gap: f64,
    pub sigma: f64,
    pub tau0: f64,
    pub result: Result<&'a ResponseResult, &'a geon_core::Error>,
}

pub fn response_row<W: Write>(out: &mut Writer<W>, row: &ResponseRow) -> csv::Result<()> {
    let (var, value) = row.key.fields();
    let (f_bh, f_j, f_total, err, st) = match row.result {
        Ok(r) => (r.f_bh, r.f_j, r.f_total, r.err_est(), status(None)),
        Err(e) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, status(Some(e))),
    };
    out.write_record([
        var,
        value,
        row.vacuum.label().to_string(),
        row.r.to_string(),
        row.gap.to_string(),
        row.sigma.to_string(),
        row.tau0.to_string(),
        num(f_bh),
        num(f_j),
        num(f_total),
        num(err),
        st,
    ])
}

pub struct RateRow<'a> {
    pub key: Key<'a>,
    pub vacuum: VacuumKind,
    pub r: f64,
    pub gap: f64,
    pub tau0: f64,
    pub result: Result<&'a RateResult, &'a geon_core::Error>,
}

pub fn rate_row<W: Write>(out: &mut Writer<W>, row: &RateRow) -> csv::Result<()> {
    let (var, value) = row.key.fields();
    let (bh, d, pv, tot, st) = match row.result {
        Ok(r) => (r.rate_bh, r.rate_j_delta, r.rate_j_pv, r.rate_j_total, status(None)),
        Err(e) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, status(Some(e))),
    };
    out.write_record([
        var,
        value,
        row.vacuum.label().to_string(),
        row.r.to_string(),
        row.gap.to_string(),
        row.tau0.to_string(),
        num(bh),
        num(d),
        num(pv),
        num(tot),
        st,
    ])
}
