//! `generate`: matrix files plus a metadata sibling.

use std::path::{Path, PathBuf};

use anyhow::Result;
use biortho::io::write_matrix_with_metadata;
use biortho::matgen::{
    e1_eigenvalues, e1_fixture, hessenberg, random_complex, random_hermitian, swanson, AlphaSequence,
    SwansonParams, SWANSON_CONVENTION,
};
use biortho::{CMatrix, Complex};
use clap::{Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::{resolve_seed, EXIT_OK};

#[derive(clap::Args)]
pub struct Args {
    #[command(subcommand)]
    kind: Kind,
    /// Matrix output path; metadata goes to `<stem>.meta.json` beside it.
    #[arg(short, long, global = true, default_value = "matrix.json")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Kind {
    /// Entries uniform in [-1, 1] (real and imaginary parts).
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hermitian part (B + B†)/2 instead.
        #[arg(long)]
        hermitian: bool,
    },
    /// Upper Hessenberg matrix D{α} built from a sequence α_k → 0.
    Hessenberg {
        #[arg(long, value_enum)]
        seq: Sequence,
        #[arg(long, default_value_t = 15)]
        n: usize,
    },
    /// Swanson Hamiltonian T h T⁻¹ with real spectrum {k + 1/2}.
    Swanson {
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
        theta: f64,
    },
    /// The 7×7 fixture A = R + iT with printed spectrum.
    E1,
    /// Identity of order n.
    Identity {
        #[arg(long)]
        n: usize,
    },
    /// 2×2 rotation by a quarter turn, spectrum {i, −i}.
    Rotation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sequence {
    /// α_k = exp(−k²)
    ExpK2,
    /// α_k = 1/((k+1)²)!
    FactK2,
    /// α_k = 1/((k+1)!)²
    FactSq,
}

impl Sequence {
    pub fn alpha(self) -> AlphaSequence {
        match self {
            Self::ExpK2 => AlphaSequence::ExpMinusKSquared,
            Self::FactK2 => AlphaSequence::InverseFactorialKSquared,
            Self::FactSq => AlphaSequence::InverseFactorialSquared,
        }
    }
}

pub fn run(args: &Args) -> Result<u8> {
    let (a, meta) = build(&args.kind)?;
    let meta_path = write_matrix_with_metadata(&args.out, &a, &meta)?;
    println!("wrote {} and {}", args.out.display(), meta_path.display());
    Ok(EXIT_OK)
}

fn build(kind: &Kind) -> Result<(CMatrix, serde_json::Value)> {
    Ok(match *kind {
        Kind::Random { n, seed, hermitian } => {
            anyhow::ensure!(n > 0, "n must be positive");
            let seed = resolve_seed(seed)?;
            let a = if hermitian { random_hermitian(n, seed) } else { random_complex(n, seed) };
            (a, json!({"kind": "random", "n": n, "seed": seed, "hermitian": hermitian}))
        }
        Kind::Hessenberg { seq, n } => (
            hessenberg(&seq.alpha(), n)?,
            json!({"kind": "hessenberg", "seq": seq, "n": n, "alpha": seq.alpha()}),
        ),
        Kind::Swanson { n, theta } => (
            swanson(SwansonParams { n, theta })?,
            json!({"kind": "swanson", "n": n, "theta": theta, "convention": SWANSON_CONVENTION}),
        ),
        Kind::E1 => {
            let eigs: Vec<[f64; 2]> = e1_eigenvalues().iter().map(|z| [z.re, z.im]).collect();
            (e1_fixture().2, json!({"kind": "e1", "n": 7, "printed_eigenvalues": eigs}))
        }
        Kind::Identity { n } => {
            anyhow::ensure!(n > 0, "n must be positive");
            (CMatrix::identity(n), json!({"kind": "identity", "n": n}))
        }
        Kind::Rotation => (
            CMatrix::from_fn(2, |i, j| match (i, j) {
                (0, 1) => Complex::new(-1.0, 0.0),
                (1, 0) => Complex::new(1.0, 0.0),
                _ => Complex::new(0.0, 0.0),
            }),
            json!({"kind": "rotation", "n": 2}),
        ),
    })
}

/// Generates into `dir/name` for the experiment runner.
pub fn write_named(dir: &Path, name: &str, a: &CMatrix, meta: &serde_json::Value) -> Result<PathBuf> {
    let path = dir.join(name);
    write_matrix_with_metadata(&path, a, meta)?;
    Ok(path)
}
