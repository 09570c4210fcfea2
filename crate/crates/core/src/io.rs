//! JSON forms of vectors and matrices.
//!
//! Matrices are `{"n": int, "re": [[...]], "im": [[...]]}` and vectors are
//! `{"re": [...], "im": [...]}`. Floats are written with 17 significant
//! digits so every `f64` survives a round trip bit-exactly.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::linalg::{CMatrix, CVector, Complex};

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VectorRepr { re: self.iter().map(|z| z.re).collect(), im: self.iter().map(|z| z.im).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = VectorRepr::deserialize(d)?;
        if r.re.len() != r.im.len() {
            return Err(D::Error::custom("re and im lengths differ"));
        }
        if r.re.is_empty() {
            return Err(D::Error::custom("empty vector"));
        }
        let v = CVector::new(r.re.into_iter().zip(r.im).map(|(a, b)| Complex::new(a, b)).collect());
        if !v.is_finite() {
            return Err(D::Error::custom("non-finite entry"));
        }
        Ok(v)
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let n = self.n();
        MatrixRepr {
            n,
            re: (0..n).map(|i| self.row(i).iter().map(|z| z.re).collect()).collect(),
            im: (0..n).map(|i| self.row(i).iter().map(|z| z.im).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        if r.n == 0 {
            return Err(D::Error::custom("matrix order must be positive"));
        }
        if r.re.len() != r.n || r.im.len() != r.n {
            return Err(D::Error::custom(format!("expected {} rows", r.n)));
        }
        let mut data = Vec::with_capacity(r.n * r.n);
        for (row_re, row_im) in r.re.iter().zip(&r.im) {
            if row_re.len() != r.n || row_im.len() != r.n {
                return Err(D::Error::custom(format!("expected {} columns", r.n)));
            }
            data.extend(row_re.iter().zip(row_im).map(|(&a, &b)| Complex::new(a, b)));
        }
        let m = CMatrix::new(r.n, data).map_err(D::Error::custom)?;
        if !m.is_finite() {
            return Err(D::Error::custom("non-finite entry"));
        }
        Ok(m)
    }
}

/// Pretty JSON formatter writing floats as `%.16e` (17 significant digits).
/// Non-finite floats become `null`.
pub struct Sig17Formatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for Sig17Formatter<'_> {
    fn default() -> Self {
        Self { inner: PrettyFormatter::with_indent(b"  ") }
    }
}

fn write_sig17<W: ?Sized + Write>(w: &mut W, v: f64) -> io::Result<()> {
    if v.is_finite() {
        write!(w, "{v:.16e}")
    } else {
        w.write_all(b"null")
    }
}

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_sig17(w, v)
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_sig17(w, f64::from(v))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Compact single-line variant, for JSON-lines output.
#[derive(Default)]
pub struct Sig17Compact;

impl Formatter for Sig17Compact {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_sig17(w, v)
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_sig17(w, f64::from(v))
    }
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Single-line JSON with 17-significant-digit floats.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Compact);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = to_json_string(value).map_err(|source| IoError::Json { path: path.to_owned(), source })?;
    fs::write(path, text + "\n").map_err(|source| IoError::Io { path: path.to_owned(), source })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_owned(), source })
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, IoError> {
    read_json(path)
}

/// `foo.json` → `foo.meta.json`
pub fn metadata_path(matrix_path: &Path) -> PathBuf {
    let stem = matrix_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    matrix_path.with_file_name(format!("{stem}.meta.json"))
}

/// Writes the matrix and its metadata as a sibling file.
pub fn write_matrix_with_metadata<M: Serialize + ?Sized>(
    path: &Path,
    matrix: &CMatrix,
    metadata: &M,
) -> Result<PathBuf, IoError> {
    write_json(path, matrix)?;
    let meta = metadata_path(path);
    write_json(&meta, metadata)?;
    Ok(meta)
}
