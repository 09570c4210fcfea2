//! JSON-lines convergence traces, one record per accepted step or iteration.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use biortho::io::{to_json_line, IoError};
use biortho::ConvergenceTrace;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    /// Integration time for the flow, iteration count for power methods.
    pub t: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Larger of the right and left residuals.
    pub residual: f64,
}

pub fn records(trace: &ConvergenceTrace) -> Vec<TraceRecord> {
    trace
        .samples
        .iter()
        .enumerate()
        .map(|(k, p)| TraceRecord {
            step: k as u64,
            t: p.t_or_iter,
            lambda_re: p.lambda.re,
            lambda_im: p.lambda.im,
            residual: p.residual_phi.max(p.residual_psi),
        })
        .collect()
}

pub fn write(path: &Path, trace: &ConvergenceTrace) -> Result<()> {
    let mut text = String::new();
    for r in records(trace) {
        text.push_str(&to_json_line(&r)?);
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| IoError::Io { path: path.to_owned(), source })?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Vec<TraceRecord>> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_owned(), source })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l)
                .map_err(|source| IoError::Json { path: path.to_owned(), source })
                .with_context(|| format!("line {}", k + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use biortho::{Complex, TracePoint};

    #[test]
    fn round_trip_keeps_order_and_residual() {
        let mut trace = ConvergenceTrace::default();
        for k in 0..3 {
            trace.push(TracePoint {
                t_or_iter: 0.5 * k as f64,
                lambda: Complex::new(1.0 / 3.0, -(k as f64)),
                residual_phi: 10f64.powi(-k),
                residual_psi: 2.0 * 10f64.powi(-k),
                rayleigh: None,
            });
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        write(&path, &trace).unwrap();
        let back = read(&path).unwrap();
        assert_eq!(back, records(&trace));
        assert_eq!(back[2].residual, 0.02);
        assert_eq!(back[1].lambda_re.to_bits(), (1.0f64 / 3.0).to_bits());
    }

    #[test]
    fn malformed_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(&path, "{\"step\": 0}\n").unwrap();
        let err = read(&path).unwrap_err();
        assert!(format!("{err:#}").contains("line 1"));
    }
}
