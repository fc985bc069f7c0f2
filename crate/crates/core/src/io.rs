//! File formats.
//!
//! A field file is one JSON header line followed by little-endian `complex64` values (two `f32`
//! each), row-major with the spatial index outermost and the fibre angle innermost. Only active
//! nodes are stored; halo values are rebuilt on load. Sinograms are also written as CSV rows
//! `phi, psi, re, im` over the inflow nodes.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundle::{BoundaryField, BundleField, ScalarField};
use crate::domain::{Domain, DomainOptions};
use crate::error::{Error, Result};
use crate::geometry::{MetricModel, MetricSpec};
use crate::scalar::{lit, to_f64, wrap_2pi, Complex, Real};

pub const FORMAT: &str = "agrt-field";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Rows are active nodes, one column.
    Scalar,
    /// Rows are active nodes, `n_theta` columns.
    Bundle,
    /// Rows are boundary angles, `n_theta` columns.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub kind: FieldKind,
    pub n_x: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub rows: usize,
    pub cols: usize,
    pub metric: MetricSpec,
    #[serde(default)]
    pub config_hash: Option<String>,
    /// SHA-256 of the payload bytes.
    pub payload_sha256: String,
}

/// A field read back from disk, not yet attached to a domain.
#[derive(Clone, Debug)]
pub struct StoredField {
    pub header: FieldHeader,
    pub values: Vec<Complex<f64>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut h = Sha256::new();
    let mut f = std::fs::File::open(path)?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn header_for<T: Real>(dom: &Domain<T>, name: &str, kind: FieldKind, config_hash: Option<&str>) -> FieldHeader {
    let nt = dom.n_theta();
    let (rows, cols) = match kind {
        FieldKind::Scalar => (dom.grid.active.len(), 1),
        FieldKind::Bundle => (dom.grid.active.len(), nt),
        FieldKind::Boundary => (dom.boundary.n_phi, nt),
    };
    FieldHeader {
        format: FORMAT.into(),
        version: VERSION,
        name: name.into(),
        kind,
        n_x: dom.options.n_x,
        n_theta: nt,
        n_phi: dom.boundary.n_phi,
        rows,
        cols,
        metric: dom.metric.spec().clone(),
        config_hash: config_hash.map(str::to_string),
        payload_sha256: String::new(),
    }
}

fn encode<T: Real>(vals: impl Iterator<Item = Complex<T>>) -> Vec<u8> {
    let mut out = Vec::new();
    for z in vals {
        out.extend_from_slice(&(to_f64(z.re) as f32).to_le_bytes());
        out.extend_from_slice(&(to_f64(z.im) as f32).to_le_bytes());
    }
    out
}

fn write_raw(mut w: impl Write, mut header: FieldHeader, payload: &[u8]) -> Result<()> {
    header.payload_sha256 = sha256_hex(payload);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

pub fn write_scalar<T: Real>(w: impl Write, name: &str, f: &ScalarField<T>, config_hash: Option<&str>) -> Result<()> {
    let h = header_for(&f.dom, name, FieldKind::Scalar, config_hash);
    let payload = encode(f.dom.grid.active.iter().map(|&i| f.values[i as usize]));
    write_raw(w, h, &payload)
}

pub fn write_bundle<T: Real>(w: impl Write, name: &str, u: &BundleField<T>, config_hash: Option<&str>) -> Result<()> {
    let dom = &u.dom;
    let (n2, nt) = (dom.grid.node_count(), dom.n_theta());
    let h = header_for(dom, name, FieldKind::Bundle, config_hash);
    let payload = encode(
        dom.grid
            .active
            .iter()
            .flat_map(|&i| (0..nt).map(move |k| u.values[k * n2 + i as usize])),
    );
    write_raw(w, h, &payload)
}

pub fn write_boundary<T: Real>(w: impl Write, name: &str, b: &BoundaryField<T>, config_hash: Option<&str>) -> Result<()> {
    let h = header_for(&b.dom, name, FieldKind::Boundary, config_hash);
    write_raw(w, h, &encode(b.values.iter().copied()))
}

/// Reads a field file and verifies its payload checksum.
pub fn read_field(r: impl Read) -> Result<StoredField> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: FieldHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Format(format!("bad field header: {e}")))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(Error::Format(format!("unsupported format {} v{}", header.format, header.version)));
    }
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    let n = header.rows * header.cols;
    if payload.len() != 8 * n {
        return Err(Error::Format(format!("payload holds {} bytes, header promises {}", payload.len(), 8 * n)));
    }
    let sum = sha256_hex(&payload);
    if sum != header.payload_sha256 {
        return Err(Error::Format(format!("payload checksum {sum} does not match header")));
    }
    let f = |c: &[u8]| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
    let values = payload.chunks_exact(8).map(|c| Complex::new(f(&c[..4]), f(&c[4..]))).collect();
    Ok(StoredField { header, values })
}

pub fn read_field_file(path: &Path) -> Result<StoredField> {
    read_field(std::fs::File::open(path)?)
}

impl StoredField {
    /// Rebuilds the domain the field was written on.
    pub fn domain(&self) -> Result<Arc<Domain<f64>>> {
        let h = &self.header;
        let mut opts = DomainOptions::new(h.n_x, h.n_theta);
        opts.n_phi = Some(h.n_phi);
        Domain::new(MetricModel::from_spec(&h.metric)?, opts)
    }

    fn check<T: Real>(&self, dom: &Domain<T>, kind: FieldKind) -> Result<()> {
        let h = &self.header;
        if h.kind != kind {
            return Err(Error::Format(format!("expected a {kind:?} field, found {:?}", h.kind)));
        }
        let grid = (dom.options.n_x, dom.n_theta(), dom.boundary.n_phi);
        if (h.n_x, h.n_theta, h.n_phi) != grid {
            return Err(Error::InvalidGrid(format!(
                "file grid {}x{}x{} differs from {}x{}x{}",
                h.n_x, h.n_theta, h.n_phi, grid.0, grid.1, grid.2
            )));
        }
        if &h.metric != dom.metric.spec() {
            return Err(Error::InvalidMetric("file metric differs from the configured metric".into()));
        }
        Ok(())
    }

    fn cast<T: Real>(z: Complex<f64>) -> Complex<T> {
        Complex::new(lit(z.re), lit(z.im))
    }

    pub fn to_scalar<T: Real>(&self, dom: &Arc<Domain<T>>) -> Result<ScalarField<T>> {
        self.check(dom, FieldKind::Scalar)?;
        let mut f = ScalarField::zeros(dom);
        for (v, &i) in self.values.iter().zip(&dom.grid.active) {
            f.values[i as usize] = Self::cast(*v);
        }
        f.fill_halo();
        Ok(f)
    }

    pub fn to_bundle<T: Real>(&self, dom: &Arc<Domain<T>>) -> Result<BundleField<T>> {
        self.check(dom, FieldKind::Bundle)?;
        let (n2, nt) = (dom.grid.node_count(), dom.n_theta());
        let mut u = BundleField::zeros(dom);
        for (s, &i) in dom.grid.active.iter().enumerate() {
            for k in 0..nt {
                u.values[k * n2 + i as usize] = Self::cast(self.values[s * nt + k]);
            }
        }
        u.fill_halo();
        Ok(u)
    }

    pub fn to_boundary<T: Real>(&self, dom: &Arc<Domain<T>>) -> Result<BoundaryField<T>> {
        self.check(dom, FieldKind::Boundary)?;
        Ok(BoundaryField {
            dom: dom.clone(),
            values: self.values.iter().map(|&z| Self::cast(z)).collect(),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SinogramRow {
    phi: f64,
    psi: f64,
    re: f64,
    im: f64,
}

/// Inflow values as CSV, preceded by a `# config_hash: ...` comment line when a hash is given.
pub fn write_sinogram_csv<T: Real>(mut w: impl Write, b: &BoundaryField<T>, config_hash: Option<&str>) -> Result<()> {
    if let Some(h) = config_hash {
        writeln!(w, "# config_hash: {h}")?;
    }
    let mut wr = csv::Writer::from_writer(w);
    let dom = &b.dom;
    for j in 0..dom.boundary.n_phi {
        for k in dom.inflow_angles(j) {
            let p = dom.boundary_point(j, k);
            let v = b.at(j, k);
            wr.serialize(SinogramRow {
                phi: to_f64(p.phi),
                psi: to_f64(p.psi()),
                re: to_f64(v.re),
                im: to_f64(v.im),
            })?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Reads CSV rows back onto the boundary grid of `dom`. Rows must sit on grid nodes.
/// Returns the field and the config hash comment, if present.
pub fn read_sinogram_csv<T: Real>(r: impl Read, dom: &Arc<Domain<T>>) -> Result<(BoundaryField<T>, Option<String>)> {
    let mut text = String::new();
    BufReader::new(r).read_to_string(&mut text)?;
    let hash = text
        .lines()
        .find_map(|l| l.strip_prefix("# config_hash:"))
        .map(|s| s.trim().to_string());
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let (np, nt) = (dom.boundary.n_phi, dom.n_theta());
    let tau = std::f64::consts::TAU;
    let mut out = BoundaryField::zeros(dom);
    for (line, row) in rd.deserialize::<SinogramRow>().enumerate() {
        let row = row?;
        let jf = wrap_2pi(row.phi) / tau * np as f64;
        let kf = wrap_2pi(row.phi + std::f64::consts::PI + row.psi) / tau * nt as f64;
        let (j, k) = (jf.round(), kf.round());
        if (jf - j).abs() > 1e-6 || (kf - k).abs() > 1e-6 {
            return Err(Error::Format(format!("row {}: ({}, {}) is not a grid node", line + 1, row.phi, row.psi)));
        }
        out.set(j as usize % np, k as usize % nt, Complex::new(lit(row.re), lit(row.im)));
    }
    Ok((out, hash))
}
