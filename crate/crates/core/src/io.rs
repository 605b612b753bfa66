//! Artifact formats: orbit CSV, shadow report JSON, sweep CSV.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing an
//! artifact and writing it again gives the same bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dls::{el_gradient, equation_slots, DlsSystem, Orbit};
use crate::standard_map::StandardOrbit;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed orbit csv: {0}")]
    Orbit(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRow {
    pub index: usize,
    pub x: Vec<f64>,
    pub local_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowReport {
    pub rho: f64,
    pub residual: f64,
    pub iterations: usize,
    pub contraction_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub converged: bool,
    pub residual: Option<f64>,
    pub rho: Option<f64>,
    pub contraction: Option<f64>,
    pub mu: Option<f64>,
    pub entropy_bound: Option<f64>,
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// Rows of a general orbit; the local residual is the norm of the
/// Euler–Lagrange gradient, zero at pinned window ends.
pub fn orbit_rows(system: &DlsSystem, orbit: &Orbit) -> Vec<OrbitRow> {
    let mut local = vec![0.0; orbit.points.len()];
    for i in equation_slots(&orbit.code) {
        local[i] = el_gradient(system, &orbit.code, &orbit.points, i).norm();
    }
    orbit
        .points
        .iter()
        .zip(local)
        .enumerate()
        .map(|(index, (p, r))| OrbitRow { index, x: p.iter().copied().collect(), local_residual: r })
        .collect()
}

pub fn standard_orbit_rows(orbit: &StandardOrbit) -> Vec<OrbitRow> {
    let x = &orbit.points;
    let n = x.len();
    let periodic = orbit.code.periodic;
    (0..n)
        .map(|k| {
            let r = if periodic || (k > 0 && k + 1 < n) {
                let (p, q) = ((k + n - 1) % n, (k + 1) % n);
                (x[q] - 2.0 * x[k] + x[p] - orbit.coupling * x[k].sin()).abs()
            } else {
                0.0
            };
            OrbitRow { index: k, x: vec![x[k]], local_residual: r }
        })
        .collect()
}

pub fn write_orbit_csv(rows: &[OrbitRow]) -> Result<String, IoError> {
    let m = rows.first().map_or(1, |r| r.x.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string()];
    header.extend((0..m).map(|j| format!("x_{j}")));
    header.push("local_residual".into());
    w.write_record(&header)?;
    for r in rows {
        if r.x.len() != m {
            return Err(IoError::Orbit(format!("row {} has {} coordinates, expected {m}", r.index, r.x.len())));
        }
        let mut rec = vec![r.index.to_string()];
        rec.extend(r.x.iter().map(|&v| fmt(v)));
        rec.push(fmt(r.local_residual));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| IoError::Orbit(e.to_string()))?)
        .expect("csv output is utf-8"))
}

pub fn read_orbit_csv(text: &str) -> Result<Vec<OrbitRow>, IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols < 3 || &header[0] != "index" || &header[cols - 1] != "local_residual" {
        return Err(IoError::Orbit("header must be index, x_0.., local_residual".into()));
    }
    let parse = |s: &str| s.parse::<f64>().map_err(|e| IoError::Orbit(format!("{s}: {e}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let index = rec[0].parse().map_err(|e| IoError::Orbit(format!("index: {e}")))?;
        let x = (1..cols - 1).map(|j| parse(&rec[j])).collect::<Result<_, _>>()?;
        rows.push(OrbitRow { index, x, local_residual: parse(&rec[cols - 1])? });
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_sweep_csv(rows: &[SweepRow]) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["param", "converged", "residual", "rho", "contraction", "mu", "entropy_bound"])?;
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    for r in rows {
        w.write_record([
            fmt(r.param),
            r.converged.to_string(),
            opt(r.residual),
            opt(r.rho),
            opt(r.contraction),
            opt(r.mu),
            opt(r.entropy_bound),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| IoError::Orbit(e.to_string()))?)
        .expect("csv output is utf-8"))
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>, IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_csv_round_trip() {
        let rows = vec![
            OrbitRow { index: 0, x: vec![0.1, -2.5e-17], local_residual: 0.0 },
            OrbitRow { index: 1, x: vec![std::f64::consts::PI, 1e300], local_residual: 3.3e-15 },
        ];
        let text = write_orbit_csv(&rows).unwrap();
        assert!(text.starts_with("index,x_0,x_1,local_residual\n"));
        let back = read_orbit_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(write_orbit_csv(&back).unwrap(), text);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rows = vec![
            SweepRow {
                param: 12.0,
                converged: true,
                residual: Some(1e-15),
                rho: Some(0.3),
                contraction: Some(0.2),
                mu: Some(9.5),
                entropy_bound: None,
            },
            SweepRow {
                param: 2.0,
                converged: false,
                residual: None,
                rho: None,
                contraction: None,
                mu: None,
                entropy_bound: None,
            },
        ];
        let text = write_sweep_csv(&rows).unwrap();
        let back = read_sweep_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(write_sweep_csv(&back).unwrap(), text);
    }
}
