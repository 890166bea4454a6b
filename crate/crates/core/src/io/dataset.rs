//! Binary matrix container: little-endian row-major payload plus a JSON
//! sidecar (`<path>.json`) carrying the header.

use crate::error::{Error, Result};
use crate::pfa::{CartesianGrid, CartesianSpectrum, ComplexImage, Taper};
use crate::sim::{FlightGeometry, PhaseHistory, RadarParams};
use crate::structure::PhaseErrorSurface;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "kasar-dataset";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    PhaseHistory,
    Spectrum,
    Image,
    Surface,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::PhaseHistory => "phase-history",
            Kind::Spectrum => "spectrum",
            Kind::Image => "image",
            Kind::Surface => "surface",
        }
    }

    fn axis_units(&self) -> [&'static str; 2] {
        match self {
            Kind::PhaseHistory => ["s", "Hz"],
            Kind::Spectrum | Kind::Surface => ["rad/m", "rad/m"],
            Kind::Image => ["m", "m"],
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase-history" => Ok(Kind::PhaseHistory),
            "spectrum" => Ok(Kind::Spectrum),
            "image" => Ok(Kind::Image),
            "surface" => Ok(Kind::Surface),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementType {
    Complex64,
    Float32,
    Complex128,
    Float64,
}

impl ElementType {
    pub fn size(&self) -> usize {
        match self {
            ElementType::Float32 => 4,
            ElementType::Complex64 | ElementType::Float64 => 8,
            ElementType::Complex128 => 16,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, ElementType::Complex64 | ElementType::Complex128)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDescriptor {
    pub name: String,
    pub unit: String,
    pub start: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub tool_version: String,
}

impl Provenance {
    /// SHA-256 of the config text plus the crate version.
    pub fn from_config_text(text: &str) -> Self {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(text.as_bytes());
        let config_hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self { config_hash, tool_version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

impl Default for Provenance {
    fn default() -> Self {
        Self { config_hash: String::new(), tool_version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub kind: Kind,
    pub rows: usize,
    pub cols: usize,
    pub element: ElementType,
    pub axes: [AxisDescriptor; 2],
    pub provenance: Provenance,
    /// Kind-specific metadata (grid, geometry, masks, taper).
    #[serde(default)]
    pub meta: serde_json::Value,
}

impl DatasetHeader {
    pub fn new(kind: Kind, rows: usize, cols: usize, element: ElementType, axes: [AxisDescriptor; 2]) -> Self {
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            kind,
            rows,
            cols,
            element,
            axes,
            provenance: Provenance::default(),
            meta: serde_json::Value::Null,
        }
    }

    pub fn payload_len(&self) -> u64 {
        self.rows as u64 * self.cols as u64 * self.element.size() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != FORMAT_NAME {
            return Err(Error::Header(format!("unexpected format tag `{}`", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::Version(self.version));
        }
        let units = self.kind.axis_units();
        for (a, u) in self.axes.iter().zip(units) {
            if a.unit != u {
                return Err(Error::Header(format!(
                    "axis `{}` has unit `{}`, {} data needs `{u}`",
                    a.name, a.unit, self.kind
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Complex(Array2<Complex64>),
    Real(Array2<f64>),
}

impl Matrix {
    pub fn dim(&self) -> (usize, usize) {
        match self {
            Matrix::Complex(a) => a.dim(),
            Matrix::Real(a) => a.dim(),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes via a temporary file in the target directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn encode(m: &Matrix, element: ElementType) -> Result<Vec<u8>> {
    let (r, c) = m.dim();
    let mut out = Vec::with_capacity(r * c * element.size());
    match (m, element) {
        (Matrix::Complex(a), ElementType::Complex128) => a.iter().for_each(|v| {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }),
        (Matrix::Complex(a), ElementType::Complex64) => a.iter().for_each(|v| {
            out.extend_from_slice(&(v.re as f32).to_le_bytes());
            out.extend_from_slice(&(v.im as f32).to_le_bytes());
        }),
        (Matrix::Real(a), ElementType::Float64) => a.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        (Matrix::Real(a), ElementType::Float32) => {
            a.iter().for_each(|v| out.extend_from_slice(&(*v as f32).to_le_bytes()))
        }
        _ => return Err(Error::Header("element type does not match the matrix (complex vs real)".into())),
    }
    Ok(out)
}

fn decode(bytes: &[u8], h: &DatasetHeader) -> Result<Matrix> {
    let n = h.rows * h.cols;
    let f32_at = |k: usize| f32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes")) as f64;
    let f64_at = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().expect("8 bytes"));
    let shape = (h.rows, h.cols);
    let m = match h.element {
        ElementType::Complex128 => {
            let v = (0..n).map(|i| Complex64::new(f64_at(16 * i), f64_at(16 * i + 8))).collect();
            Matrix::Complex(Array2::from_shape_vec(shape, v).expect("shape checked"))
        }
        ElementType::Complex64 => {
            let v = (0..n).map(|i| Complex64::new(f32_at(8 * i), f32_at(8 * i + 4))).collect();
            Matrix::Complex(Array2::from_shape_vec(shape, v).expect("shape checked"))
        }
        ElementType::Float64 => {
            Matrix::Real(Array2::from_shape_vec(shape, (0..n).map(|i| f64_at(8 * i)).collect()).expect("shape checked"))
        }
        ElementType::Float32 => {
            Matrix::Real(Array2::from_shape_vec(shape, (0..n).map(|i| f32_at(4 * i)).collect()).expect("shape checked"))
        }
    };
    Ok(m)
}

pub fn write_dataset(path: &Path, header: &DatasetHeader, m: &Matrix) -> Result<()> {
    header.validate()?;
    if m.dim() != (header.rows, header.cols) {
        return Err(Error::Header(format!(
            "header says {}x{}, matrix is {}x{}",
            header.rows,
            header.cols,
            m.dim().0,
            m.dim().1
        )));
    }
    let payload = encode(m, header.element)?;
    let json = serde_json::to_string_pretty(header).map_err(|e| Error::Header(e.to_string()))?;
    atomic_write(path, &payload)?;
    atomic_write(&sidecar_path(path), json.as_bytes())?;
    Ok(())
}

pub fn read_header(path: &Path) -> Result<DatasetHeader> {
    let text = std::fs::read_to_string(sidecar_path(path))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Header(e.to_string()))?;
    if let Some(ver) = v.get("version").and_then(|x| x.as_u64()) {
        if ver != FORMAT_VERSION as u64 {
            return Err(Error::Version(ver as u32));
        }
    }
    if let Some(k) = v.get("kind").and_then(|x| x.as_str()) {
        k.parse::<Kind>()?;
    }
    let h: DatasetHeader = serde_json::from_value(v).map_err(|e| Error::Header(e.to_string()))?;
    h.validate()?;
    Ok(h)
}

pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, Matrix)> {
    let h = read_header(path)?;
    let bytes = std::fs::read(path)?;
    if bytes.len() as u64 != h.payload_len() {
        return Err(Error::SizeMismatch { expected: h.payload_len(), found: bytes.len() as u64 });
    }
    let m = decode(&bytes, &h)?;
    Ok((h, m))
}

/// Reads a dataset and insists on its kind.
pub fn read_dataset_of(path: &Path, kind: Kind) -> Result<(DatasetHeader, Matrix)> {
    let h = read_header(path)?;
    if h.kind != kind {
        return Err(Error::KindMismatch { expected: kind.to_string(), found: h.kind.to_string() });
    }
    read_dataset(path)
}

/// Run-length mask: alternating run lengths starting with a `true` run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRle {
    pub rows: usize,
    pub cols: usize,
    pub runs: Vec<usize>,
}

impl MaskRle {
    pub fn encode(mask: &Array2<bool>) -> Self {
        let (rows, cols) = mask.dim();
        let mut runs = Vec::new();
        let mut cur = true;
        let mut n = 0;
        for &v in mask.iter() {
            if v == cur {
                n += 1;
            } else {
                runs.push(n);
                cur = v;
                n = 1;
            }
        }
        runs.push(n);
        Self { rows, cols, runs }
    }

    pub fn decode(&self) -> Result<Array2<bool>> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        let mut cur = true;
        for &r in &self.runs {
            v.extend(std::iter::repeat_n(cur, r));
            cur = !cur;
        }
        Array2::from_shape_vec((self.rows, self.cols), v)
            .map_err(|_| Error::Header("mask run lengths do not cover the matrix".into()))
    }
}

#[derive(Serialize, Deserialize)]
struct PhaseHistoryMeta {
    radar: RadarParams,
    geometry: FlightGeometry,
}

#[derive(Serialize, Deserialize)]
struct GridMeta {
    grid: CartesianGrid,
    mask: MaskRle,
    #[serde(default)]
    taper: Taper,
}

fn meta<T: for<'de> Deserialize<'de>>(h: &DatasetHeader) -> Result<T> {
    serde_json::from_value(h.meta.clone()).map_err(|e| Error::Header(format!("metadata: {e}")))
}

fn to_meta<T: Serialize>(m: &T) -> Result<serde_json::Value> {
    serde_json::to_value(m).map_err(|e| Error::Header(e.to_string()))
}

fn complex(m: Matrix) -> Result<Array2<Complex64>> {
    match m {
        Matrix::Complex(a) => Ok(a),
        Matrix::Real(_) => Err(Error::Header("expected complex payload".into())),
    }
}

fn grid_axes(g: &CartesianGrid) -> [AxisDescriptor; 2] {
    [
        AxisDescriptor { name: "X".into(), unit: "rad/m".into(), start: g.x.first(), step: g.x.step },
        AxisDescriptor { name: "Y".into(), unit: "rad/m".into(), start: g.y.first(), step: g.y.step },
    ]
}

pub fn save_phase_history(path: &Path, ph: &PhaseHistory, prov: &Provenance) -> Result<()> {
    let (r, c) = ph.data.dim();
    let f = ph.radar.range_freq_axis();
    let axes = [
        AxisDescriptor {
            name: "slow_time".into(),
            unit: "s".into(),
            start: ph.geometry.slow_time.first(),
            step: ph.geometry.slow_time.step,
        },
        AxisDescriptor { name: "range_frequency".into(), unit: "Hz".into(), start: f.first(), step: f.step },
    ];
    let mut h = DatasetHeader::new(Kind::PhaseHistory, r, c, ElementType::Complex128, axes);
    h.provenance = prov.clone();
    h.meta = to_meta(&PhaseHistoryMeta { radar: ph.radar, geometry: ph.geometry.clone() })?;
    write_dataset(path, &h, &Matrix::Complex(ph.data.clone()))
}

pub fn load_phase_history(path: &Path) -> Result<PhaseHistory> {
    let (h, m) = read_dataset_of(path, Kind::PhaseHistory)?;
    let meta: PhaseHistoryMeta = meta(&h)?;
    let ph = PhaseHistory { data: complex(m)?, radar: meta.radar, geometry: meta.geometry };
    ph.validate()?;
    Ok(ph)
}

pub fn save_spectrum(path: &Path, s: &CartesianSpectrum, prov: &Provenance) -> Result<()> {
    let (r, c) = s.data.dim();
    let mut h = DatasetHeader::new(Kind::Spectrum, r, c, ElementType::Complex128, grid_axes(&s.grid));
    h.provenance = prov.clone();
    h.meta = to_meta(&GridMeta { grid: s.grid.clone(), mask: MaskRle::encode(&s.coverage), taper: Taper::None })?;
    write_dataset(path, &h, &Matrix::Complex(s.data.clone()))
}

pub fn load_spectrum(path: &Path) -> Result<CartesianSpectrum> {
    let (h, m) = read_dataset_of(path, Kind::Spectrum)?;
    let meta: GridMeta = meta(&h)?;
    let data = complex(m)?;
    let coverage = meta.mask.decode()?;
    if data.dim() != meta.grid.dims() || coverage.dim() != data.dim() {
        return Err(Error::Header("grid metadata does not match the payload".into()));
    }
    Ok(CartesianSpectrum { data, grid: meta.grid, coverage })
}

pub fn save_image(path: &Path, img: &ComplexImage, prov: &Provenance) -> Result<()> {
    let (r, c) = img.data.dim();
    let (x0, y0) = img.position(0, 0);
    let axes = [
        AxisDescriptor { name: "azimuth".into(), unit: "m".into(), start: x0, step: img.dx() },
        AxisDescriptor { name: "range".into(), unit: "m".into(), start: y0, step: img.dy() },
    ];
    let mut h = DatasetHeader::new(Kind::Image, r, c, ElementType::Complex128, axes);
    h.provenance = prov.clone();
    h.meta = to_meta(&GridMeta { grid: img.grid.clone(), mask: MaskRle::encode(&img.coverage), taper: img.taper })?;
    write_dataset(path, &h, &Matrix::Complex(img.data.clone()))
}

pub fn load_image(path: &Path) -> Result<ComplexImage> {
    let (h, m) = read_dataset_of(path, Kind::Image)?;
    let meta: GridMeta = meta(&h)?;
    let data = complex(m)?;
    let coverage = meta.mask.decode()?;
    if data.dim() != meta.grid.dims() || coverage.dim() != data.dim() {
        return Err(Error::Header("grid metadata does not match the payload".into()));
    }
    Ok(ComplexImage { data, grid: meta.grid, coverage, taper: meta.taper })
}

pub fn save_surface(path: &Path, s: &PhaseErrorSurface, prov: &Provenance) -> Result<()> {
    let (r, c) = s.values.dim();
    let mut h = DatasetHeader::new(Kind::Surface, r, c, ElementType::Float64, grid_axes(&s.grid));
    h.provenance = prov.clone();
    h.meta = to_meta(&GridMeta { grid: s.grid.clone(), mask: MaskRle::encode(&s.valid), taper: Taper::None })?;
    write_dataset(path, &h, &Matrix::Real(s.values.clone()))
}

pub fn load_surface(path: &Path) -> Result<PhaseErrorSurface> {
    let (h, m) = read_dataset_of(path, Kind::Surface)?;
    let meta: GridMeta = meta(&h)?;
    let values = match m {
        Matrix::Real(a) => a,
        Matrix::Complex(_) => return Err(Error::Header("expected real payload".into())),
    };
    let valid = meta.mask.decode()?;
    if values.dim() != meta.grid.dims() || valid.dim() != values.dim() {
        return Err(Error::Header("grid metadata does not match the payload".into()));
    }
    Ok(PhaseErrorSurface { values, valid, grid: meta.grid })
}
