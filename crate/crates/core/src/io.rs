//! Binary field files with a JSON metadata sidecar.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic    8 bytes  "PSFIELD\0"
//! version  u16      1
//! scalar   u8       0 = real f64, 1 = complex (re, im) f64 pairs
//! rank     u8       1..=4
//! axes     rank × { n: u64, min: f64, max: f64 }
//! values   row-major, first axis slowest
//! ```
//!
//! The sidecar `<file>.json` repeats the header in readable form and carries a
//! free-form description; readers only trust the binary header.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Field};

pub const MAGIC: &[u8; 8] = b"PSFIELD\0";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scalar {
    Real,
    Complex,
}

impl Scalar {
    fn tag(self) -> u8 {
        match self {
            Scalar::Real => 0,
            Scalar::Complex => 1,
        }
    }

    fn width(self) -> usize {
        match self {
            Scalar::Real => 8,
            Scalar::Complex => 16,
        }
    }
}

/// Parsed header of a field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub version: u16,
    pub scalar: Scalar,
    pub axes: Vec<Axis>,
}

impl FieldHeader {
    pub fn value_count(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }
}

/// Sidecar contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub format: String,
    pub header: FieldHeader,
    pub description: String,
    #[serde(default)]
    pub extra: serde_json::Value,
}

/// A decoded field of any supported rank and scalar type.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Real1(Field<f64, 1>),
    Real2(Field<f64, 2>),
    Real4(Field<f64, 4>),
    Complex1(Field<Complex64, 1>),
    Complex2(Field<Complex64, 2>),
}

fn encode_header(out: &mut Vec<u8>, scalar: Scalar, axes: &[Axis]) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(scalar.tag());
    out.push(axes.len() as u8);
    for a in axes {
        out.extend_from_slice(&(a.len() as u64).to_le_bytes());
        out.extend_from_slice(&a.min().to_le_bytes());
        out.extend_from_slice(&a.max().to_le_bytes());
    }
}

pub fn encode_real<const D: usize>(field: &Field<f64, D>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 24 * D + 8 * field.len());
    encode_header(&mut out, Scalar::Real, field.axes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_complex<const D: usize>(field: &Field<Complex64, D>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 24 * D + 16 * field.len());
    encode_header(&mut out, Scalar::Complex, field.axes());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::Decode(format!("truncated at byte {}", self.pos)))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses and validates the header; returns it with the offset of the values.
pub fn decode_header(data: &[u8]) -> Result<(FieldHeader, usize)> {
    let mut r = Reader { data, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Decode("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Decode(format!("unsupported version {version}")));
    }
    let scalar = match r.u8()? {
        0 => Scalar::Real,
        1 => Scalar::Complex,
        t => return Err(Error::Decode(format!("unknown scalar tag {t}"))),
    };
    let rank = r.u8()? as usize;
    if !(1..=4).contains(&rank) {
        return Err(Error::Decode(format!("unsupported rank {rank}")));
    }
    let mut axes = Vec::with_capacity(rank);
    let mut count: usize = 1;
    for _ in 0..rank {
        let n = usize::try_from(r.u64()?).map_err(|_| Error::Decode("axis too long".into()))?;
        let axis = Axis::new(n, r.f64()?, r.f64()?).map_err(|e| Error::Decode(e.to_string()))?;
        count = count
            .checked_mul(n)
            .ok_or_else(|| Error::Decode("value count overflows".into()))?;
        axes.push(axis);
    }
    let payload = count
        .checked_mul(scalar.width())
        .ok_or_else(|| Error::Decode("payload size overflows".into()))?;
    let remaining = data.len() - r.pos;
    if remaining != payload {
        return Err(Error::Decode(format!(
            "expected {payload} payload bytes, found {remaining}"
        )));
    }
    Ok((
        FieldHeader {
            version,
            scalar,
            axes,
        },
        r.pos,
    ))
}

fn f64_at(data: &[u8], i: usize) -> f64 {
    f64::from_le_bytes(data[8 * i..8 * i + 8].try_into().unwrap())
}

/// Decodes a field of any supported rank/scalar combination.
pub fn decode(data: &[u8]) -> Result<AnyField> {
    let (header, offset) = decode_header(data)?;
    let payload = &data[offset..];
    let n = header.value_count();
    let axes = &header.axes;
    match header.scalar {
        Scalar::Real => {
            let values: Vec<f64> = (0..n).map(|i| f64_at(payload, i)).collect();
            Ok(match axes.len() {
                1 => AnyField::Real1(Field::from_values([axes[0]], values)?),
                2 => AnyField::Real2(Field::from_values([axes[0], axes[1]], values)?),
                4 => AnyField::Real4(Field::from_values(
                    [axes[0], axes[1], axes[2], axes[3]],
                    values,
                )?),
                r => return Err(Error::Decode(format!("no real field of rank {r}"))),
            })
        }
        Scalar::Complex => {
            let values: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(f64_at(payload, 2 * i), f64_at(payload, 2 * i + 1)))
                .collect();
            Ok(match axes.len() {
                1 => AnyField::Complex1(Field::from_values([axes[0]], values)?),
                2 => AnyField::Complex2(Field::from_values([axes[0], axes[1]], values)?),
                r => return Err(Error::Decode(format!("no complex field of rank {r}"))),
            })
        }
    }
}

pub fn decode_real2(data: &[u8]) -> Result<Field<f64, 2>> {
    match decode(data)? {
        AnyField::Real2(f) => Ok(f),
        _ => Err(Error::Decode("expected a real rank-2 field".into())),
    }
}

pub fn decode_real4(data: &[u8]) -> Result<Field<f64, 4>> {
    match decode(data)? {
        AnyField::Real4(f) => Ok(f),
        _ => Err(Error::Decode("expected a real rank-4 field".into())),
    }
}

pub fn decode_complex2(data: &[u8]) -> Result<Field<Complex64, 2>> {
    match decode(data)? {
        AnyField::Complex2(f) => Ok(f),
        _ => Err(Error::Decode("expected a complex rank-2 field".into())),
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_with_sidecar(
    path: &Path,
    bytes: Vec<u8>,
    description: &str,
    extra: serde_json::Value,
) -> Result<()> {
    let (header, _) = decode_header(&bytes)?;
    let meta = FieldMetadata {
        format: format!("psfield-v{VERSION}"),
        header,
        description: description.to_owned(),
        extra,
    };
    fs::write(path, &bytes)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn write_real<const D: usize>(
    path: &Path,
    field: &Field<f64, D>,
    description: &str,
    extra: serde_json::Value,
) -> Result<()> {
    write_with_sidecar(path, encode_real(field), description, extra)
}

pub fn write_complex<const D: usize>(
    path: &Path,
    field: &Field<Complex64, D>,
    description: &str,
    extra: serde_json::Value,
) -> Result<()> {
    write_with_sidecar(path, encode_complex(field), description, extra)
}

pub fn read(path: &Path) -> Result<AnyField> {
    decode(&fs::read(path)?)
}
