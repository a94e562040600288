//! File formats: RTF tensors (JSON header + raw little-endian payload),
//! point-cloud CSV and JSON configs.
//!
//! An RTF object `foo` lives in two files, `foo.json` and `foo.bin`. The
//! header carries dtype, shape, axis metadata and the fixed strings
//! `"order": "row-major"` and `"endian": "little"`. `c64` payloads are
//! interleaved `(re, im)` 32-bit floats.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex32;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::annotate::DoaPoint;
use crate::error::{Error, Result};
use crate::types::{
    AxisKind, AxisSpec, FusedPoint, LidarPoint, Provenance, RadTensor, RadarPoint, RadarView,
    ViewKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    C64,
    F32,
}

impl Dtype {
    fn bytes_per_value(self) -> usize {
        match self {
            Dtype::C64 => 8,
            Dtype::F32 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtfAxis {
    pub name: String,
    pub origin: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtfHeader {
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    pub order: String,
    pub endian: String,
    pub axes: Vec<RtfAxis>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RtfData {
    C64(Vec<Complex32>),
    F32(Vec<f32>),
}

impl RtfData {
    fn len(&self) -> usize {
        match self {
            RtfData::C64(v) => v.len(),
            RtfData::F32(v) => v.len(),
        }
    }

    fn dtype(&self) -> Dtype {
        match self {
            RtfData::C64(_) => Dtype::C64,
            RtfData::F32(_) => Dtype::F32,
        }
    }
}

/// An n-dimensional array together with its axis metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RtfArray {
    pub shape: Vec<usize>,
    pub axes: Vec<RtfAxis>,
    pub data: RtfData,
}

impl RtfArray {
    pub fn new(shape: Vec<usize>, axes: Vec<RtfAxis>, data: RtfData) -> Result<Self> {
        if axes.len() != shape.len() {
            return Err(Error::format(
                "axes",
                format!("{} axes for a rank-{} shape", axes.len(), shape.len()),
            ));
        }
        let n: usize = shape.iter().product();
        if data.len() != n {
            return Err(Error::format(
                "shape",
                format!("shape {shape:?} needs {n} values, payload has {}", data.len()),
            ));
        }
        Ok(Self { shape, axes, data })
    }

    pub fn header(&self) -> RtfHeader {
        RtfHeader {
            dtype: self.data.dtype(),
            shape: self.shape.clone(),
            order: "row-major".into(),
            endian: "little".into(),
            axes: self.axes.clone(),
        }
    }

    /// A real-valued 2-D mask (1.0 inside, 0.0 outside) on the given axes.
    pub fn from_mask(axes: [AxisSpec; 2], cells: &[bool]) -> Result<Self> {
        Self::new(
            vec![axes[0].bins, axes[1].bins],
            axes.iter().map(rtf_axis).collect(),
            RtfData::F32(cells.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()),
        )
    }

    fn spec_axes(&self) -> Result<Vec<AxisSpec>> {
        self.axes
            .iter()
            .zip(&self.shape)
            .map(|(a, &bins)| {
                let kind = AxisKind::parse(&a.name)
                    .ok_or_else(|| Error::format("axes.name", format!("unknown axis `{}`", a.name)))?;
                AxisSpec::new(kind, bins, a.origin, a.step)
            })
            .collect()
    }

    pub fn into_rad_tensor(self) -> Result<RadTensor> {
        let axes = self.spec_axes()?;
        let axes: [AxisSpec; 3] = axes
            .try_into()
            .map_err(|_| Error::format("shape", "RAD tensor must have rank 3"))?;
        match self.data {
            RtfData::C64(v) => RadTensor::new(axes, v),
            RtfData::F32(_) => Err(Error::format("dtype", "RAD tensor must be c64")),
        }
    }

    pub fn into_view(self) -> Result<RadarView> {
        let axes = self.spec_axes()?;
        let axes: [AxisSpec; 2] = axes
            .try_into()
            .map_err(|_| Error::format("shape", "view must have rank 2"))?;
        let kind = ViewKind::from_axes(axes[0].kind, axes[1].kind).ok_or_else(|| {
            Error::format(
                "axes",
                format!("no view with axes ({:?}, {:?})", axes[0].kind, axes[1].kind),
            )
        })?;
        match self.data {
            RtfData::F32(v) => RadarView::new(kind, axes, v),
            RtfData::C64(_) => Err(Error::format("dtype", "view must be f32")),
        }
    }

    /// Rank-2 f32 array interpreted as a raw grid (masks, label maps).
    pub fn into_grid(self) -> Result<(usize, usize, Vec<f32>)> {
        match (self.shape.as_slice(), self.data) {
            (&[r, c], RtfData::F32(v)) => Ok((r, c, v)),
            (_, RtfData::F32(_)) => Err(Error::format("shape", "grid must have rank 2")),
            (_, RtfData::C64(_)) => Err(Error::format("dtype", "grid must be f32")),
        }
    }
}

fn rtf_axis(a: &AxisSpec) -> RtfAxis {
    RtfAxis {
        name: a.kind.name().into(),
        origin: a.origin,
        step: a.step,
    }
}

impl From<&RadTensor> for RtfArray {
    fn from(t: &RadTensor) -> Self {
        RtfArray {
            shape: t.dims().to_vec(),
            axes: t.axes().iter().map(rtf_axis).collect(),
            data: RtfData::C64(t.data().to_vec()),
        }
    }
}

impl From<&RadarView> for RtfArray {
    fn from(v: &RadarView) -> Self {
        RtfArray {
            shape: vec![v.rows(), v.cols()],
            axes: v.axes().iter().map(rtf_axis).collect(),
            data: RtfData::F32(v.data().to_vec()),
        }
    }
}

/// `foo`, `foo.json` and `foo.bin` all name the same RTF object.
pub fn rtf_paths(base: &Path) -> (PathBuf, PathBuf) {
    let stem = match base.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("bin") => base.with_extension(""),
        _ => base.to_path_buf(),
    };
    let mut header = stem.clone().into_os_string();
    header.push(".json");
    let mut payload = stem.into_os_string();
    payload.push(".bin");
    (header.into(), payload.into())
}

pub fn encode_payload(data: &RtfData) -> Vec<u8> {
    match data {
        RtfData::C64(v) => {
            let mut out = Vec::with_capacity(v.len() * 8);
            for c in v {
                out.extend_from_slice(&c.re.to_le_bytes());
                out.extend_from_slice(&c.im.to_le_bytes());
            }
            out
        }
        RtfData::F32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
    }
}

pub fn decode_payload(header: &RtfHeader, bytes: &[u8]) -> Result<RtfData> {
    let n: usize = header.shape.iter().product();
    let expected = n * header.dtype.bytes_per_value();
    if bytes.len() != expected {
        return Err(Error::format(
            "payload",
            format!(
                "shape {:?} ({:?}) needs {expected} bytes, payload has {}",
                header.shape,
                header.dtype,
                bytes.len()
            ),
        ));
    }
    let f = |c: &[u8]| f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
    Ok(match header.dtype {
        Dtype::F32 => RtfData::F32(bytes.chunks_exact(4).map(f).collect()),
        Dtype::C64 => RtfData::C64(
            bytes
                .chunks_exact(8)
                .map(|c| Complex32::new(f(&c[..4]), f(&c[4..])))
                .collect(),
        ),
    })
}

fn validate_header(h: &RtfHeader) -> Result<()> {
    if h.order != "row-major" {
        return Err(Error::format("order", format!("unsupported order `{}`", h.order)));
    }
    if h.endian != "little" {
        return Err(Error::format("endian", format!("unsupported endianness `{}`", h.endian)));
    }
    if h.axes.len() != h.shape.len() {
        return Err(Error::format(
            "axes",
            format!("{} axes for a rank-{} shape", h.axes.len(), h.shape.len()),
        ));
    }
    Ok(())
}

/// Writes `base.json` and `base.bin`, returning both paths.
pub fn write_rtf(base: &Path, array: &RtfArray) -> Result<(PathBuf, PathBuf)> {
    let (hp, bp) = rtf_paths(base);
    write_json(&hp, &array.header())?;
    fs::write(&bp, encode_payload(&array.data)).map_err(|e| Error::io(&bp, e))?;
    Ok((hp, bp))
}

pub fn read_rtf(base: &Path) -> Result<RtfArray> {
    let (hp, bp) = rtf_paths(base);
    let header: RtfHeader = read_json(&hp)?;
    validate_header(&header)?;
    let bytes = fs::read(&bp).map_err(|e| Error::io(&bp, e))?;
    let data = decode_payload(&header, &bytes)?;
    RtfArray::new(header.shape, header.axes, data)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// A point record with a fixed, named CSV column layout.
pub trait CsvRecord: Sized {
    const COLUMNS: &'static [&'static str];
    fn from_fields(fields: &[&str]) -> Result<Self>;
    fn to_fields(&self) -> Vec<String>;
}

fn real(v: f64) -> String {
    // Shortest representation that parses back to the same f64.
    format!("{v}")
}

fn parse_real(column: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::format(column, format!("`{s}` is not a finite real")))
}

fn parse_reals<const N: usize>(columns: &[&str], fields: &[&str]) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = parse_real(columns[i], fields[i])?;
    }
    Ok(out)
}

impl CsvRecord for RadarPoint {
    const COLUMNS: &'static [&'static str] = &["x", "y", "vx", "vy", "rcs"];
    fn from_fields(f: &[&str]) -> Result<Self> {
        let [x, y, vx, vy, rcs] = parse_reals(Self::COLUMNS, f)?;
        Ok(Self { x, y, vx, vy, rcs })
    }
    fn to_fields(&self) -> Vec<String> {
        [self.x, self.y, self.vx, self.vy, self.rcs].map(real).to_vec()
    }
}

impl CsvRecord for LidarPoint {
    const COLUMNS: &'static [&'static str] = &["x", "y", "intensity"];
    fn from_fields(f: &[&str]) -> Result<Self> {
        let [x, y, intensity] = parse_reals(Self::COLUMNS, f)?;
        if intensity < 0.0 {
            return Err(Error::format("intensity", "lidar intensity must be non-negative"));
        }
        Ok(Self { x, y, intensity })
    }
    fn to_fields(&self) -> Vec<String> {
        [self.x, self.y, self.intensity].map(real).to_vec()
    }
}

impl CsvRecord for FusedPoint {
    const COLUMNS: &'static [&'static str] =
        &["x", "y", "intensity", "vx", "vy", "rcs", "provenance"];
    fn from_fields(f: &[&str]) -> Result<Self> {
        let [x, y, intensity, vx, vy, rcs] = parse_reals(Self::COLUMNS, f)?;
        let provenance = Provenance::parse(f[6].trim())
            .ok_or_else(|| Error::format("provenance", format!("unknown provenance `{}`", f[6])))?;
        Ok(Self {
            x,
            y,
            intensity,
            vx,
            vy,
            rcs,
            provenance,
        })
    }
    fn to_fields(&self) -> Vec<String> {
        let mut v = [self.x, self.y, self.intensity, self.vx, self.vy, self.rcs]
            .map(real)
            .to_vec();
        v.push(self.provenance.name().into());
        v
    }
}

impl CsvRecord for DoaPoint {
    const COLUMNS: &'static [&'static str] = &["x", "y", "doppler"];
    fn from_fields(f: &[&str]) -> Result<Self> {
        let [x, y, doppler] = parse_reals(Self::COLUMNS, f)?;
        Ok(Self { x, y, doppler })
    }
    fn to_fields(&self) -> Vec<String> {
        [self.x, self.y, self.doppler].map(real).to_vec()
    }
}

/// Reads records by header name. Unknown columns are ignored with a warning;
/// a missing required column is an error.
pub fn read_points_from<T: CsvRecord, R: Read>(reader: R) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut index = Vec::with_capacity(T::COLUMNS.len());
    for col in T::COLUMNS {
        let pos = headers
            .iter()
            .position(|h| h.trim() == *col)
            .ok_or_else(|| Error::format(*col, "required column missing from header"))?;
        index.push(pos);
    }
    for h in headers.iter() {
        if !T::COLUMNS.contains(&h.trim()) {
            log::warn!("ignoring unknown CSV column `{h}`");
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let fields: Vec<&str> = index
            .iter()
            .map(|&i| rec.get(i).unwrap_or(""))
            .collect();
        out.push(T::from_fields(&fields)?);
    }
    Ok(out)
}

pub fn write_points_to<T: CsvRecord, W: Write>(writer: W, points: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(T::COLUMNS)?;
    for p in points {
        w.write_record(p.to_fields())?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_points<T: CsvRecord>(path: &Path) -> Result<Vec<T>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_points_from(std::io::BufReader::new(f))
}

pub fn write_points<T: CsvRecord>(path: &Path, points: &[T]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_points_to(std::io::BufWriter::new(f), points)
}
