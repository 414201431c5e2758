//! File formats: CSV for directions, samples, sinograms, coefficient tables
//! and grids; 16-bit binary PGM with a JSON sidecar for images.
//!
//! Reals are written with 17 significant digits so every format reads back
//! bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TorusError};
use crate::forward::{Axis, EuclideanSinogram, GeodesicSamples, Profile, Projection, Rule};
use crate::lattice::{DirectionSet, FourierIndex, ReducedDirection};
use crate::phantom::PixelPhantom;
use crate::transform::FourierTable;

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sidecar path of a data file: the file name with `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TorusError + '_ {
    move |source| TorusError::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, reason: impl Into<String>) -> TorusError {
    TorusError::Format { path: path.to_path_buf(), reason: reason.into() }
}

fn csv_err(path: &Path, e: csv::Error) -> TorusError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => TorusError::Io { path: path.to_path_buf(), source },
            _ => unreachable!("checked is_io_error"),
        }
    } else {
        format_err(path, e.to_string())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

/// Writes a value as pretty-printed JSON.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| format_err(path, e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| {
        if e.is_io() {
            TorusError::Io { path: path.to_path_buf(), source: e.into() }
        } else {
            format_err(path, e.to_string())
        }
    })
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads every record after checking the header.
fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let got = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if got.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(format_err(path, format!("expected header {}, found {}", header.join(","), got.iter().collect::<Vec<_>>().join(","))));
    }
    r.records().map(|rec| rec.map_err(|e| csv_err(path, e))).collect()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec.get(i).ok_or_else(|| format_err(path, format!("line {line}: missing field {name}")))?;
    raw.trim()
        .parse()
        .map_err(|_| format_err(path, format!("line {line}: cannot parse {name} from {raw:?}")))
}

fn direction_field(path: &Path, rec: &csv::StringRecord) -> Result<ReducedDirection> {
    let a: i64 = field(path, rec, 0, "a")?;
    let b: i64 = field(path, rec, 1, "b")?;
    ReducedDirection::new(a, b).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_directions(path: &Path, dirs: &DirectionSet) -> Result<()> {
    write_csv(path, &["a", "b"], dirs.iter().map(|d| vec![d.a().to_string(), d.b().to_string()]))
}

/// Reads a direction list; the radius is the largest height present.
pub fn read_directions(path: &Path) -> Result<DirectionSet> {
    let dirs = read_csv(path, &["a", "b"])?
        .iter()
        .map(|rec| direction_field(path, rec))
        .collect::<Result<Vec<_>>>()?;
    let radius = dirs.iter().map(|d| crate::lattice::height(*d)).max().unwrap_or(0);
    DirectionSet::from_directions(radius, dirs).map_err(|e| format_err(path, e.to_string()))
}

const SAMPLES_HEADER: [&str; 7] = ["a", "b", "axis", "rule", "n_d", "l", "value"];

pub fn write_samples(path: &Path, d: &GeodesicSamples) -> Result<()> {
    let (n_d, rule) = (d.n_d(), d.rule());
    let rows = d.profiles().iter().flat_map(move |p| {
        p.values.iter().enumerate().map(move |(l, &v)| {
            vec![
                p.direction.a().to_string(),
                p.direction.b().to_string(),
                p.axis.to_string(),
                rule.to_string(),
                n_d.to_string(),
                l.to_string(),
                fmt_real(v),
            ]
        })
    });
    write_csv(path, &SAMPLES_HEADER, rows)
}

pub fn read_samples(path: &Path) -> Result<GeodesicSamples> {
    let records = read_csv(path, &SAMPLES_HEADER)?;
    let first = records.first().ok_or_else(|| format_err(path, "no samples"))?;
    let n_d: usize = field(path, first, 4, "n_d")?;
    let rule: Rule = field(path, first, 3, "rule")?;
    let mut profiles: Vec<Profile> = Vec::new();
    for rec in &records {
        let dir = direction_field(path, rec)?;
        let axis: Axis = field(path, rec, 2, "axis")?;
        let line = rec.position().map_or(0, |p| p.line());
        if field::<Rule>(path, rec, 3, "rule")? != rule || field::<usize>(path, rec, 4, "n_d")? != n_d {
            return Err(format_err(path, format!("line {line}: rule and n_d must be the same on every row")));
        }
        let l: usize = field(path, rec, 5, "l")?;
        let value: f64 = field(path, rec, 6, "value")?;
        if l == 0 {
            profiles.push(Profile { direction: dir, axis, values: Vec::with_capacity(n_d) });
        }
        match profiles.last_mut() {
            Some(p) if p.direction == dir && p.axis == axis && p.values.len() == l => p.values.push(value),
            _ => return Err(format_err(path, format!("line {line}: samples of {dir} out of order"))),
        }
    }
    GeodesicSamples::new(n_d, rule, profiles).map_err(|e| format_err(path, e.to_string()))
}

const SINOGRAM_HEADER: [&str; 3] = ["angle_rad", "offset", "value"];

pub fn write_sinogram(path: &Path, s: &EuclideanSinogram) -> Result<()> {
    let rows = s.projections().iter().flat_map(|p| {
        p.offsets
            .iter()
            .zip(&p.values)
            .map(move |(&c, &v)| vec![fmt_real(p.angle), fmt_real(c), fmt_real(v)])
    });
    write_csv(path, &SINOGRAM_HEADER, rows)
}

pub fn read_sinogram(path: &Path) -> Result<EuclideanSinogram> {
    let mut projections: Vec<Projection> = Vec::new();
    for rec in read_csv(path, &SINOGRAM_HEADER)? {
        let angle: f64 = field(path, &rec, 0, "angle_rad")?;
        let offset: f64 = field(path, &rec, 1, "offset")?;
        let value: f64 = field(path, &rec, 2, "value")?;
        match projections.last_mut() {
            Some(p) if p.angle == angle => {
                p.offsets.push(offset);
                p.values.push(value);
            }
            _ => projections.push(Projection { angle, offsets: vec![offset], values: vec![value] }),
        }
    }
    EuclideanSinogram::new(projections).map_err(|e| format_err(path, e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct TableSidecar {
    r: f64,
    real_flag: bool,
}

/// Writes the table CSV (in key order) and its sidecar `{r, real_flag}`.
pub fn write_table(path: &Path, t: &FourierTable) -> Result<()> {
    let rows = t
        .iter()
        .map(|(k, z)| vec![k.k1.to_string(), k.k2.to_string(), fmt_real(z.re), fmt_real(z.im)]);
    write_csv(path, &["k1", "k2", "re", "im"], rows)?;
    write_json(&sidecar_path(path), &TableSidecar { r: t.radius(), real_flag: t.is_real() })
}

pub fn read_table(path: &Path) -> Result<FourierTable> {
    let side: TableSidecar = read_json(&sidecar_path(path))?;
    let mut t = FourierTable::zeros(side.r).map_err(|e| format_err(path, e.to_string()))?;
    for rec in read_csv(path, &["k1", "k2", "re", "im"])? {
        let k = FourierIndex::new(field(path, &rec, 0, "k1")?, field(path, &rec, 1, "k2")?);
        let z = Complex64::new(field(path, &rec, 2, "re")?, field(path, &rec, 3, "im")?);
        t.set(k, z).map_err(|e| format_err(path, e.to_string()))?;
    }
    t.set_real(side.real_flag);
    Ok(t)
}

/// Value range of a PGM export.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

const PGM_MAX: f64 = 65535.0;

/// Writes a 16-bit binary PGM, top row first, with `[min, max]` mapped
/// linearly onto `[0, 65535]` and recorded in the sidecar.
pub fn write_pgm(path: &Path, p: &PixelPhantom) -> Result<()> {
    let n = p.n();
    let (min, max) = p.min_max();
    let span = max - min;
    let mut w = create(path)?;
    let mut body = Vec::with_capacity(2 * n * n + 32);
    write!(body, "P5\n{n} {n}\n65535\n").expect("writing to a Vec");
    for i in (0..n).rev() {
        for j in 0..n {
            let q = if span > 0.0 { ((p.get(i, j) - min) / span * PGM_MAX).round() as u16 } else { 0 };
            body.extend_from_slice(&q.to_be_bytes());
        }
    }
    w.write_all(&body).and_then(|_| w.flush()).map_err(io_err(path))?;
    write_json(&sidecar_path(path), &PgmSidecar { min, max, n })
}

/// Reads a PGM written by [`write_pgm`], restoring values from the sidecar
/// range (exact up to the 16-bit quantization).
pub fn read_pgm(path: &Path) -> Result<PixelPhantom> {
    let side: PgmSidecar = read_json(&sidecar_path(path))?;
    let mut raw = Vec::new();
    open(path)?.read_to_end(&mut raw).map_err(io_err(path))?;
    // Header: magic, width, height, maxval, then exactly one whitespace byte.
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < raw.len() && raw[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < raw.len() && !raw[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, "truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&raw[start..pos]).into_owned());
    }
    pos += 1;
    let dims: Vec<usize> = fields[1..].iter().filter_map(|f| f.parse().ok()).collect();
    if fields[0] != "P5" || dims.len() != 3 || dims[2] != 65535 {
        return Err(format_err(path, "expected a 16-bit binary PGM (P5, maxval 65535)"));
    }
    let n = dims[0];
    if dims[1] != n || n != side.n {
        return Err(format_err(path, format!("image is {}x{}, sidecar says n = {}", dims[0], dims[1], side.n)));
    }
    let body = raw.get(pos..).unwrap_or_default();
    if body.len() != 2 * n * n {
        return Err(format_err(path, format!("expected {} bytes of pixel data, found {}", 2 * n * n, body.len())));
    }
    let mut values = vec![0.0; n * n];
    for (s, pair) in body.chunks_exact(2).enumerate() {
        let q = u16::from_be_bytes([pair[0], pair[1]]) as f64;
        let (row, j) = (s / n, s % n);
        values[(n - 1 - row) * n + j] = side.min + q / PGM_MAX * (side.max - side.min);
    }
    PixelPhantom::new(n, values).map_err(|e| format_err(path, e.to_string()))
}

/// Writes a grid as CSV rows `x,y,value` at the cell centres.
pub fn write_grid_csv(path: &Path, p: &PixelPhantom) -> Result<()> {
    let n = p.n();
    let rows = (0..n * n).map(|s| {
        let (i, j) = (s / n, s % n);
        let [x, y] = p.cell_center(i, j);
        vec![fmt_real(x), fmt_real(y), fmt_real(p.get(i, j))]
    });
    write_csv(path, &["x", "y", "value"], rows)
}

/// Reads a grid written by [`write_grid_csv`].
pub fn read_grid_csv(path: &Path) -> Result<PixelPhantom> {
    let records = read_csv(path, &["x", "y", "value"])?;
    let n = (records.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != records.len() {
        return Err(format_err(path, format!("{} rows do not form a square grid", records.len())));
    }
    let values = records.iter().map(|rec| field(path, rec, 2, "value")).collect::<Result<Vec<f64>>>()?;
    PixelPhantom::new(n, values).map_err(|e| format_err(path, e.to_string()))
}

/// Reads a grid from `.pgm` (with sidecar) or `.csv`, by extension.
pub fn read_grid(path: &Path) -> Result<PixelPhantom> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => read_pgm(path),
        Some("csv") => read_grid_csv(path),
        _ => Err(format_err(path, "grid files must end in .pgm or .csv")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::direction_set;
    use tempfile::tempdir;

    #[test]
    fn reals_round_trip_at_17_digits() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn directions_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("dirs.csv");
        let d = direction_set(4).unwrap();
        write_directions(&path, &d).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("a,b\n1,0\n0,1\n"));
        assert_eq!(read_directions(&path).unwrap().as_slice(), d.as_slice());
    }

    #[test]
    fn table_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = FourierTable::zeros(2.5).unwrap();
        for (i, &k) in t.keys().to_vec().iter().enumerate() {
            t.set(k, Complex64::new(1.0 / (i as f64 + 3.0), -(i as f64).sqrt())).unwrap();
        }
        t.set_real(true);
        write_table(&path, &t).unwrap();
        assert_eq!(read_table(&path).unwrap(), t);
        assert!(sidecar_path(&path).exists());
    }

    #[test]
    fn pgm_round_trip_within_quantization() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let p = PixelPhantom::from_fn(5, |i, j| (i * 7 + j) as f64 * 0.01 - 0.1).unwrap();
        write_pgm(&path, &p).unwrap();
        let back = read_pgm(&path).unwrap();
        let (min, max) = p.min_max();
        for (a, b) in p.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 0.5 * (max - min) / PGM_MAX + 1e-15);
        }
        // The top image row is the last grid row.
        let raw = std::fs::read(&path).unwrap();
        let body = &raw[raw.len() - 50..];
        assert_eq!(u16::from_be_bytes([body[8], body[9]]), 65535);
    }

    #[test]
    fn grid_csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let p = PixelPhantom::from_fn(3, |i, j| (i as f64 + 0.1).ln() * (j as f64 + 1.0)).unwrap();
        write_grid_csv(&path, &p).unwrap();
        assert_eq!(read_grid(&path).unwrap(), p);
    }

    #[test]
    fn missing_file_is_io_and_bad_header_is_format() {
        let dir = tempdir().unwrap();
        let err = read_directions(&dir.path().join("nope.csv")).unwrap_err();
        assert!(err.is_io());
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,y\n1,0\n").unwrap();
        assert!(matches!(read_directions(&path), Err(TorusError::Format { .. })));
        std::fs::write(&path, "a,b\n2,4\n").unwrap();
        assert!(matches!(read_directions(&path), Err(TorusError::Format { .. })));
    }
}
