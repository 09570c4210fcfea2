//! `oracle`: reference spectrum of a matrix file.

use std::path::PathBuf;

use anyhow::Result;
use biortho::io::{read_matrix, write_json};
use biortho::{qr_spectrum, SpectralData};
use serde::Serialize;

use crate::EXIT_OK;

/// Imaginary parts below this count as real.
pub const REAL_TOL: f64 = 1e-9;

#[derive(clap::Args)]
pub struct Args {
    /// Matrix JSON file.
    matrix: PathBuf,
    /// Output; default `<matrix stem>.spectrum.json` beside the matrix.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
pub struct OracleReport<'a> {
    pub real_spectrum: bool,
    pub defective: bool,
    pub repeated: bool,
    #[serde(flatten)]
    pub spectrum: &'a SpectralData,
}

impl<'a> OracleReport<'a> {
    pub fn new(spectrum: &'a SpectralData) -> Self {
        Self {
            real_spectrum: spectrum.is_real(REAL_TOL),
            defective: spectrum.flags.iter().any(|f| f.defective),
            repeated: spectrum.flags.iter().any(|f| f.repeated),
            spectrum,
        }
    }
}

pub fn run(args: &Args) -> Result<u8> {
    let a = read_matrix(&args.matrix)?;
    let s = qr_spectrum(&a);
    let report = OracleReport::new(&s);
    let out = args.out.clone().unwrap_or_else(|| {
        let stem = args
            .matrix
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "matrix".into());
        args.matrix.with_file_name(format!("{stem}.spectrum.json"))
    });
    write_json(&out, &report)?;
    for (k, (l, f)) in s.eigenvalues.iter().zip(&s.flags).enumerate() {
        let mut notes = Vec::new();
        if f.repeated {
            notes.push("repeated");
        }
        if f.defective {
            notes.push("defective");
        }
        println!(
            "lambda_{} = {:.10} {:+.10}i  pairing {:.2e} {}",
            k + 1,
            l.re,
            l.im,
            f.pairing,
            notes.join(" ")
        );
    }
    if !s.converged {
        eprintln!("warning: QR iteration did not converge; trailing eigenvalues are unreliable");
    }
    if report.real_spectrum {
        println!("real spectrum");
    }
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use biortho::matgen::{swanson, SwansonParams};
    use biortho::CMatrix;

    #[test]
    fn flags_surface_in_report() {
        let h = swanson(SwansonParams { n: 7, theta: 0.4 }).unwrap();
        let s = qr_spectrum(&h);
        let r = OracleReport::new(&s);
        assert!(r.real_spectrum && !r.defective);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 7);
        assert_eq!(v["real_spectrum"], true);

        let rot = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let s = qr_spectrum(&rot);
        assert!(!OracleReport::new(&s).real_spectrum);
    }
}
