//! Spectrum files: rows of `(ξ components…, Re, Im)` with a JSON grid header.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::grid::{Dim, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub dim: Dim,
    #[serde(rename = "L")]
    pub box_length: f64,
    pub n: usize,
    pub dealias_fraction: f64,
    pub real_symmetric: bool,
}

impl GridHeader {
    pub fn of(field: &FourierField) -> Self {
        let g = field.grid;
        GridHeader {
            dim: g.dim,
            box_length: g.box_length,
            n: g.modes,
            dealias_fraction: g.dealias_fraction,
            real_symmetric: field.real_symmetric,
        }
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.dim, self.box_length, self.n, self.dealias_fraction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumFormat {
    Csv,
    Binary,
}

impl SpectrumFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SpectrumFormat::Csv => "csv",
            SpectrumFormat::Binary => "bin",
        }
    }
}

fn row_values(field: &FourierField, slot: usize) -> Vec<f64> {
    let xi = field.grid.freq(slot);
    let c = field.coeffs[slot];
    match field.grid.dim {
        Dim::One => vec![xi.x, c.re, c.im],
        Dim::Two => vec![xi.x, xi.y, c.re, c.im],
    }
}

pub fn write_csv<W: Write>(field: &FourierField, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    match field.grid.dim {
        Dim::One => writeln!(w, "xi,re,im")?,
        Dim::Two => writeln!(w, "xi_x,xi_y,re,im")?,
    }
    for slot in 0..field.len() {
        let row: Vec<String> = row_values(field, slot).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Little-endian `f64` rows, no framing.
pub fn write_binary<W: Write>(field: &FourierField, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    for slot in 0..field.len() {
        for v in row_values(field, slot) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn coeffs_from_rows(header: &GridHeader, rows: Vec<Vec<f64>>) -> Result<FourierField> {
    let grid = header.grid()?;
    if rows.len() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: rows.len(),
        });
    }
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let dxi = grid.dxi();
    for row in rows {
        let (jx, jy, re, im) = match (grid.dim, row.as_slice()) {
            (Dim::One, [x, re, im]) => ((x / dxi).round() as i64, 0, *re, *im),
            (Dim::Two, [x, y, re, im]) => ((x / dxi).round() as i64, (y / dxi).round() as i64, *re, *im),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "spectrum row has {} columns",
                    row.len()
                )))
            }
        };
        let slot = grid
            .slot(jx, jy)
            .ok_or_else(|| Error::InvalidParameter(format!("frequency index ({jx}, {jy}) off lattice")))?;
        coeffs[slot] = Complex64::new(re, im);
    }
    Ok(FourierField {
        grid,
        coeffs,
        real_symmetric: header.real_symmetric,
    })
}

pub fn read_csv<R: Read>(header: &GridHeader, input: R) -> Result<FourierField> {
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    coeffs_from_rows(header, rows)
}

pub fn read_binary<R: Read>(header: &GridHeader, mut input: R) -> Result<FourierField> {
    let cols = header.dim.as_usize() + 2;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % (8 * cols) != 0 {
        return Err(Error::InvalidParameter("truncated binary spectrum".into()));
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    coeffs_from_rows(header, vals.chunks(cols).map(|r| r.to_vec()).collect())
}

/// Writes `<stem>.<csv|bin>` and `<stem>.json`; returns the spectrum path.
pub fn save(field: &FourierField, stem: &Path, format: SpectrumFormat) -> Result<PathBuf> {
    let data_path = stem.with_extension(format.extension());
    let file = fs::File::create(&data_path)?;
    match format {
        SpectrumFormat::Csv => write_csv(field, file)?,
        SpectrumFormat::Binary => write_binary(field, file)?,
    }
    let header = serde_json::to_string_pretty(&GridHeader::of(field))?;
    fs::write(stem.with_extension("json"), header)?;
    Ok(data_path)
}

pub fn load(stem: &Path, format: SpectrumFormat) -> Result<FourierField> {
    let header: GridHeader = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
    let file = fs::File::open(stem.with_extension(format.extension()))?;
    match format {
        SpectrumFormat::Csv => read_csv(&header, file),
        SpectrumFormat::Binary => read_binary(&header, file),
    }
}
