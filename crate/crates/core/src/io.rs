//! File formats: CSV for grid functions, symbols, singular values and
//! loops; a binary matrix format with a grid-hash header; and a symbol cache
//! keyed by content hash.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use faer::Mat;
use sha2::{Digest, Sha256};

use crate::fredholm::BoundaryLoop;
use crate::grid::{hex_prefix, Grid, GridFunction};
use crate::operators::{DenseOperator, LinearOperator};
use crate::shifts::{FiberEnd, FiberPoint, FiberSampling};
use crate::symbols::{BivariateSymbol, FiberRow};
use crate::{Error, Result, C64};

const OPERATOR_MAGIC: &[u8; 8] = b"MSIOOP01";
const SYMBOL_MAGIC: &[u8; 8] = b"MSIOSY01";

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = BufWriter::new(fs::File::create(&tmp)?);
        f.write_all(bytes)?;
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// `t, re, im` per node.
pub fn write_grid_function_csv(path: &Path, f: &GridFunction) -> Result<()> {
    let grid = f.grid();
    let rows = f
        .samples()
        .iter()
        .enumerate()
        .map(|(j, z)| vec![num(grid.t(j)), num(z.re), num(z.im)]);
    write_atomic(path, &csv_bytes(&["t", "re", "im"], rows)?)
}

pub fn read_grid_function_csv(path: &Path, grid: &Arc<Grid>) -> Result<GridFunction> {
    let mut r = csv::Reader::from_path(path)?;
    let mut samples = Vec::with_capacity(grid.n_t());
    for (j, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("{}: bad field {k} in row {j}", path.display())))
        };
        if j >= grid.n_t() {
            return Err(Error::InvalidInput(format!("{}: more rows than grid nodes", path.display())));
        }
        let t = field(0)?;
        if (t.ln() - grid.u()[j]).abs() > 1e-9 * grid.u()[j].abs().max(1.0) {
            return Err(Error::InvalidInput(format!("{}: row {j} is off the grid", path.display())));
        }
        samples.push(C64::new(field(1)?, field(2)?));
    }
    GridFunction::new(Arc::clone(grid), samples)
}

/// `t, x, re, im` for every `stride`-th node in each direction.
pub fn write_symbol_csv(path: &Path, a: &BivariateSymbol, stride: usize) -> Result<()> {
    let grid = a.grid();
    let stride = stride.max(1);
    let vals = a.values();
    let rows = (0..grid.n_t()).step_by(stride).flat_map(move |i| {
        (0..grid.n_x())
            .step_by(stride)
            .map(move |k| vec![num(grid.t(i)), num(grid.x()[k]), num(vals[(i, k)].re), num(vals[(i, k)].im)])
    });
    write_atomic(path, &csv_bytes(&["t", "x", "re", "im"], rows)?)
}

/// `k, sigma`, descending.
pub fn write_singular_values_csv(path: &Path, singular: &[f64]) -> Result<()> {
    let rows = singular.iter().enumerate().map(|(k, s)| vec![k.to_string(), num(*s)]);
    write_atomic(path, &csv_bytes(&["k", "sigma"], rows)?)
}

/// `k, re, im`; the first and last rows coincide.
pub fn write_loop_csv(path: &Path, l: &BoundaryLoop) -> Result<()> {
    let rows = l.points.iter().enumerate().map(|(k, z)| vec![k.to_string(), num(z.re), num(z.im)]);
    write_atomic(path, &csv_bytes(&["k", "re", "im"], rows)?)
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend((s.len() as u64).to_le_bytes());
    buf.extend(s.as_bytes());
}

fn put_c64s<'a>(buf: &mut Vec<u8>, zs: impl IntoIterator<Item = &'a C64>) {
    for z in zs {
        buf.extend(z.re.to_le_bytes());
        buf.extend(z.im.to_le_bytes());
    }
}

fn put_mat(buf: &mut Vec<u8>, m: faer::MatRef<'_, C64>) {
    buf.extend((m.nrows() as u64).to_le_bytes());
    buf.extend((m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        put_c64s(buf, m.row(i).iter());
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::InvalidInput("truncated binary file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn c64(&mut self) -> Result<C64> {
        Ok(C64::new(self.f64()?, self.f64()?))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        usize::try_from(n)
            .ok()
            .filter(|&n| n <= self.bytes.len())
            .ok_or_else(|| Error::InvalidInput(format!("implausible length {n}")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::InvalidInput("invalid utf-8".into()))
    }

    fn c64s(&mut self, n: usize) -> Result<Vec<C64>> {
        (0..n).map(|_| self.c64()).collect()
    }

    fn mat(&mut self) -> Result<Mat<C64>> {
        let (r, c) = (self.len()?, self.len()?);
        let flat = self.c64s(r * c)?;
        Ok(Mat::from_fn(r, c, |i, j| flat[i * c + j]))
    }

    fn magic(&mut self, magic: &[u8; 8]) -> Result<()> {
        if self.take(8)? != magic {
            return Err(Error::InvalidInput("unrecognized file header".into()));
        }
        Ok(())
    }

    fn grid_hash(&mut self, grid: &Grid) -> Result<()> {
        let hash = self.string()?;
        if hash != grid.spec().hash() {
            return Err(Error::InvalidInput(format!(
                "file was written for grid {hash}, expected {}",
                grid.spec().hash()
            )));
        }
        Ok(())
    }
}

/// Header (magic, grid hash, provenance, flags) followed by the matrix in
/// row-major order as little-endian `(re, im)` pairs.
pub fn write_operator_bin(path: &Path, op: &DenseOperator) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend(OPERATOR_MAGIC);
    put_str(&mut buf, &LinearOperator::grid(op).spec().hash());
    put_str(&mut buf, &op.provenance);
    buf.extend((op.flags.len() as u64).to_le_bytes());
    for &f in &op.flags {
        buf.extend((f as u64).to_le_bytes());
    }
    put_mat(&mut buf, op.matrix());
    write_atomic(path, &buf)
}

pub fn read_operator_bin(path: &Path, grid: &Arc<Grid>) -> Result<DenseOperator> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut c = Cursor { bytes: &bytes, pos: 0 };
    c.magic(OPERATOR_MAGIC)?;
    c.grid_hash(grid)?;
    let provenance = c.string()?;
    let n_flags = c.len()?;
    let flags = (0..n_flags).map(|_| c.len()).collect::<Result<Vec<_>>>()?;
    let matrix = c.mat()?;
    let mut op = DenseOperator::new(grid, matrix, provenance)?;
    op.flags = flags;
    Ok(op)
}

fn encode_symbol(a: &BivariateSymbol) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend(SYMBOL_MAGIC);
    put_str(&mut buf, &a.grid().spec().hash());
    put_str(&mut buf, a.label());
    let s = a.sampling();
    buf.extend(s.clock.to_le_bytes());
    buf.extend((s.phases as u64).to_le_bytes());
    put_mat(&mut buf, a.values());
    put_mat(&mut buf, a.band_values());
    put_c64s(&mut buf, a.boundary_minus());
    put_c64s(&mut buf, a.boundary_plus());
    buf.extend((a.fibers().len() as u64).to_le_bytes());
    for row in a.fibers() {
        buf.push(matches!(row.point.end, FiberEnd::Infinity) as u8);
        buf.extend(row.point.phase.to_le_bytes());
        buf.extend(row.u_sequence.to_le_bytes());
        put_c64s(&mut buf, &row.values);
    }
    buf.extend((a.flagged_rows().len() as u64).to_le_bytes());
    for &f in a.flagged_rows() {
        buf.extend((f as u64).to_le_bytes());
    }
    buf
}

fn decode_symbol(bytes: &[u8], grid: &Arc<Grid>) -> Result<BivariateSymbol> {
    let mut c = Cursor { bytes, pos: 0 };
    c.magic(SYMBOL_MAGIC)?;
    c.grid_hash(grid)?;
    let label = c.string()?;
    let sampling = FiberSampling {
        clock: c.f64()?,
        phases: c.len()?,
    };
    let values = c.mat()?;
    let band_values = c.mat()?;
    let boundary_minus = c.c64s(grid.n_t())?;
    let boundary_plus = c.c64s(grid.n_t())?;
    let n_fibers = c.len()?;
    let mut fibers = Vec::with_capacity(n_fibers);
    for _ in 0..n_fibers {
        let end = if c.take(1)?[0] == 1 { FiberEnd::Infinity } else { FiberEnd::Zero };
        let phase = c.f64()?;
        let u_sequence = c.f64()?;
        fibers.push(FiberRow {
            point: FiberPoint { end, phase },
            u_sequence,
            values: c.c64s(grid.n_x())?,
        });
    }
    let n_flags = c.len()?;
    let flags = (0..n_flags).map(|_| c.len()).collect::<Result<Vec<_>>>()?;
    Ok(BivariateSymbol::from_parts(
        grid,
        label,
        values,
        band_values,
        boundary_minus,
        boundary_plus,
        sampling,
        fibers,
    )?
    .with_flags(flags))
}

/// On-disk cache of sampled symbols. Entries are keyed by the SHA-256 of
/// the grid hash and a caller-supplied descriptor of the construction.
#[derive(Debug, Clone)]
pub struct SymbolCache {
    dir: PathBuf,
}

impl SymbolCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn key(grid: &Grid, descriptor: &str) -> String {
        let mut h = Sha256::new();
        h.update(grid.spec().hash().as_bytes());
        h.update([0u8]);
        h.update(descriptor.as_bytes());
        hex_prefix(&h.finalize(), 32)
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.sym"))
    }

    /// Returns the cached symbol, or builds, stores and returns it.
    pub fn get_or_build(
        &self,
        grid: &Arc<Grid>,
        descriptor: &str,
        build: impl FnOnce() -> Result<BivariateSymbol>,
    ) -> Result<BivariateSymbol> {
        let path = self.path(&Self::key(grid, descriptor));
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(symbol) = decode_symbol(&bytes, grid) {
                return Ok(symbol);
            }
        }
        let symbol = build()?;
        write_atomic(&path, &encode_symbol(&symbol))?;
        Ok(symbol)
    }

    pub fn contains(&self, grid: &Grid, descriptor: &str) -> bool {
        self.path(&Self::key(grid, descriptor)).exists()
    }
}
