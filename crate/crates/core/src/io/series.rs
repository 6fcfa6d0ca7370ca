//! CSV series: data ingestion and result tables.
//!
//! Output uses `,` separators, `.` decimals and LF line endings.

use crate::calibration::DataSeries;
use crate::error::{Error, Result};
use crate::fem::{Phase, StepRecord};
use crate::matpoint::PointRecord;
use std::fmt::Write;

pub const POINT_CSV_HEADER: &str = "time,F11,F22,F33,S11,S22,S33,sigma11,sigma22,sigma33,rho,psi_m";

const KNOWN_HEADERS: [(&str, &str); 3] = [("t", "value"), ("strain", "stress"), ("stretch", "stress")];

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Reads a two-column series (`t,value`, `strain,stress` or `stretch,stress`)
/// with an optional third `weight` column.
pub fn parse_series(text: &str) -> Result<DataSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Data(format!("CSV header: {e}")))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let known = cols.len() >= 2 && KNOWN_HEADERS.iter().any(|(x, y)| cols[0] == *x && cols[1] == *y);
    let weighted = match cols.len() {
        2 => false,
        3 if cols[2] == "weight" => true,
        _ => false,
    };
    if !known || (cols.len() == 3 && !weighted) || cols.len() > 3 {
        return Err(Error::Data(format!(
            "unsupported CSV header '{}' (expected t,value or strain,stress, optionally followed by weight)",
            cols.join(",")
        )));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("CSV row {}: {e}", line + 2)))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Data(format!("CSV row {}: missing column {}", line + 2, k + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::Data(format!("CSV row {}: {e}", line + 2)))
        };
        x.push(num(0)?);
        y.push(num(1)?);
        if weighted {
            w.push(num(2)?);
        }
    }
    let s = DataSeries {
        x_label: cols[0].to_string(),
        y_label: cols[1].to_string(),
        x,
        y,
        weights: weighted.then_some(w),
    };
    s.validate()?;
    Ok(s)
}

pub fn point_records_csv(records: &[PointRecord]) -> String {
    let mut out = String::from(POINT_CSV_HEADER);
    out.push('\n');
    for r in records {
        let cols = [
            r.time,
            r.f.0[0][0],
            r.f.0[1][1],
            r.f.0[2][2],
            r.s.0[0],
            r.s.0[1],
            r.s.0[2],
            r.sigma.0[0],
            r.sigma.0[1],
            r.sigma.0[2],
            r.rho,
            r.psi_m,
        ];
        push_row(&mut out, &cols);
    }
    out
}

/// `t,rho` table of a density trajectory.
pub fn trajectory_csv(records: &[PointRecord]) -> String {
    let mut out = String::from("t,rho\n");
    for r in records {
        push_row(&mut out, &[r.time, r.rho]);
    }
    out
}

/// `t,max_deflection,rho_min,rho_max,rho_mean`; the ramp contributes its
/// final state at `t = 0`.
pub fn step_records_csv(steps: &[StepRecord]) -> String {
    let mut out = String::from("t,max_deflection,rho_min,rho_max,rho_mean\n");
    let last_ramp = steps.iter().rposition(|s| s.phase == Phase::Ramp);
    for (k, s) in steps.iter().enumerate() {
        if s.phase == Phase::Ramp && Some(k) != last_ramp {
            continue;
        }
        push_row(&mut out, &[s.t, s.max_deflection, s.rho_min, s.rho_max, s.rho_mean]);
    }
    out
}

fn push_row(out: &mut String, cols: &[f64]) {
    for (k, v) in cols.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", format_number(*v));
    }
    out.push('\n');
}
