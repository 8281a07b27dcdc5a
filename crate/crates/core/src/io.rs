//! JSON formats.
//!
//! * Sequence: `{"d":1,"entries":[{"k":[0],"l":[0],"re":1.0,"im":0.0}, …]}`;
//!   repeated `(k, l)` pairs are rejected.
//! * Finite grid: `{"p":2,"q":1,"data":[[[re,im],[re,im]],[[re,im],[re,im]]]}`.
//! * Sequence matrix (output only): array of rows of sequences.
//!
//! Output goes through [`to_canonical_json`], which fixes key order (struct
//! declaration order) and prints every float with 17 significant digits so
//! identical inputs give byte-identical files.

use std::collections::BTreeSet;
use std::io;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coset_algebra::SeqMatrix;
use crate::error::{Error, Result};
use crate::finite::FiniteGrid;
use crate::sequence::{SeqIndex, Sequence};

#[derive(Serialize, Deserialize)]
struct RawEntry {
    k: Vec<i64>,
    l: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    d: usize,
    entries: Vec<RawEntry>,
}

impl Serialize for Sequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .iter()
            .map(|(idx, v)| RawEntry { k: idx.k().to_vec(), l: idx.l().to_vec(), re: v.re, im: v.im })
            .collect();
        RawSequence { d: self.dim(), entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Sequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSequence::deserialize(deserializer)?;
        if raw.d == 0 {
            return Err(D::Error::custom("sequence dimension d must be positive"));
        }
        let mut seen = BTreeSet::new();
        let mut triples = Vec::with_capacity(raw.entries.len());
        for e in raw.entries {
            if e.k.len() != raw.d || e.l.len() != raw.d {
                return Err(D::Error::custom(format!("index of length {} in a d = {} sequence", e.k.len().max(e.l.len()), raw.d)));
            }
            if !seen.insert(SeqIndex::new(&e.k, &e.l)) {
                return Err(D::Error::custom(format!("duplicate index k={:?} l={:?}", e.k, e.l)));
            }
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(D::Error::custom("non-finite coefficient"));
            }
            triples.push((e.k, e.l, Complex64::new(e.re, e.im)));
        }
        Sequence::from_triples(raw.d, triples).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl Serialize for SeqMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

/// Complex number as a `[re, im]` pair.
pub(crate) mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_pair(v: &Complex64) -> [f64; 2] {
        [v.re, v.im]
    }

    pub fn serialize_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(to_pair).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// On-disk form of a finite grid together with its twist numerator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteGridFile {
    pub p: usize,
    pub q: i64,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl FiniteGridFile {
    pub fn from_grid(grid: &FiniteGrid, q: i64) -> Self {
        let data = grid
            .rows()
            .iter()
            .map(|row| row.iter().map(complex_pair::to_pair).collect())
            .collect();
        FiniteGridFile { p: grid.p(), q, data }
    }

    pub fn to_grid(&self) -> Result<FiniteGrid> {
        let rows = self
            .data
            .iter()
            .map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .collect();
        let grid = FiniteGrid::from_rows(rows)?;
        if grid.p() != self.p {
            return Err(Error::SizeMismatch(format!("declared p = {} but data is {}x{}", self.p, grid.p(), grid.p())));
        }
        Ok(grid)
    }
}

struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with a fixed 17-significant-digit float format.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).map_err(|e| Error::Malformed(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Malformed(e.to_string()))
}

pub fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}
