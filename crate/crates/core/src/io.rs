//! CSV and JSON emitters for curves, spectra, crossing tables and scan
//! results, plus the spectrum reader used for LOCC checks.
//!
//! Floats go out with 17 significant digits so that files round-trip.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::crossing::{CrossingMatrix, CrossingStatus};
use crate::entangle::{EntanglementSpectrum, RenyiCurve};
use crate::error::{Error, Result};
use crate::scan::{DerivativeTable, ExcitedRecord, FssResult};

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Buffered file writer; parent directories are created.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_spectrum<W: Write>(w: W, spec: &EntanglementSpectrum) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "lambda"])?;
    for (i, p) in spec.probs().iter().enumerate() {
        out.write_record([i.to_string(), fmt_f64(*p)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a spectrum CSV.
///
/// Accepts the `index,lambda` layout written by [`write_spectrum`] or a
/// single column of values, with or without a header line.
pub fn read_spectrum<R: Read>(r: R) -> Result<EntanglementSpectrum> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    let mut probs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = match rec.len() {
            0 => continue,
            1 => &rec[0],
            _ => &rec[rec.len() - 1],
        };
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => probs.push(v),
            Err(_) if line == 0 => {}
            Err(_) => {
                return Err(Error::InvalidSpectrum(format!(
                    "line {}: cannot parse {field:?} as a number",
                    line + 1
                )))
            }
        }
    }
    if probs.is_empty() {
        return Err(Error::InvalidSpectrum("no eigenvalues found".into()));
    }
    EntanglementSpectrum::new(probs)
}

pub fn read_spectrum_file(path: &Path) -> Result<EntanglementSpectrum> {
    read_spectrum(File::open(path)?)
}

pub fn write_curve<W: Write>(w: W, curve: &RenyiCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "entropy_bits"])?;
    for (a, s) in curve.alphas.iter().zip(&curve.values) {
        out.write_record([fmt_f64(*a), fmt_f64(*s)])?;
    }
    out.flush()?;
    Ok(())
}

/// Table-shaped crossing matrix: parameters label the first row and column,
/// cells hold `N` for no crossing, the crossing orders (`;`-separated) to
/// four decimals, or `I` for identical off-diagonal spectra.
pub fn write_matrix_table<W: Write>(w: W, m: &CrossingMatrix, param: &str) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = std::iter::once(param.to_string())
        .chain(m.params.iter().map(|p| format!("{p}")))
        .collect();
    out.write_record(&header)?;
    for i in 0..m.len() {
        let mut row = vec![format!("{}", m.params[i])];
        for j in 0..m.len() {
            let rec = m.record(i, j);
            row.push(match rec.status() {
                _ if i == j => "N".to_string(),
                CrossingStatus::NoCross => "N".to_string(),
                CrossingStatus::Identical => "I".to_string(),
                CrossingStatus::Crossed => rec
                    .crossing
                    .alphas
                    .iter()
                    .map(|a| format!("{a:.4}"))
                    .collect::<Vec<_>>()
                    .join(";"),
            });
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_fss<W: Write>(w: W, fss: &FssResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n_sites", "lo", "hi", "midpoint"])?;
    for ((n, b), mid) in fss.sizes.iter().zip(&fss.brackets).zip(&fss.midpoints) {
        out.write_record([n.to_string(), fmt_f64(b.lo), fmt_f64(b.hi), fmt_f64(*mid)])?;
    }
    out.flush()?;
    Ok(())
}

/// Long format: one row per `(param, alpha)`.
pub fn write_derivative<W: Write>(w: W, t: &DerivativeTable, param: &str) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([param, "alpha", "entropy_bits", "derivative"])?;
    for (k, &alpha) in t.alphas.iter().enumerate() {
        for (i, &p) in t.params.iter().enumerate() {
            out.write_record([
                fmt_f64(p),
                fmt_f64(alpha),
                fmt_f64(t.entropies[k][i]),
                fmt_f64(t.derivatives[k][i]),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_excited<W: Write>(w: W, records: &[ExcitedRecord], param: &str) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([param, "gap", "degenerate", "status", "alphas"])?;
    for r in records {
        let alphas: Vec<String> = r.record.crossing.alphas.iter().map(|a| fmt_f64(*a)).collect();
        out.write_record([
            fmt_f64(r.param),
            fmt_f64(r.gap),
            r.degenerate.to_string(),
            format!("{:?}", r.record.status()),
            alphas.join(";"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossing::{matrix_from_spectra, CrossingWindow};

    #[test]
    fn spectrum_round_trips_bit_for_bit() {
        let spec = EntanglementSpectrum::new(vec![0.1 + 0.2, 0.7 - 1e-17, 1.0 - 0.3 - 0.7 + 1e-17]).unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &spec).unwrap();
        let back = read_spectrum(buf.as_slice()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn reader_accepts_bare_columns() {
        let s = read_spectrum("0.5\n0.5\n".as_bytes()).unwrap();
        assert_eq!(s.probs(), &[0.5, 0.5]);
        let s = read_spectrum("lambda\n0.7\n0.3\n".as_bytes()).unwrap();
        assert_eq!(s.probs(), &[0.7, 0.3]);
        assert!(read_spectrum("0.7\nabc\n".as_bytes()).is_err());
        assert!(read_spectrum("0.7\n0.2\n".as_bytes()).is_err());
        assert!(read_spectrum("".as_bytes()).is_err());
    }

    #[test]
    fn table_marks_diagonal_and_crossings() {
        let a = EntanglementSpectrum::new(vec![0.7, 0.15, 0.15]).unwrap();
        let b = EntanglementSpectrum::new(vec![0.5, 0.5]).unwrap();
        let m = matrix_from_spectra(&[1.0, 2.0, 3.0], &[a.clone(), b, a], &CrossingWindow::default()).unwrap();
        let mut buf = Vec::new();
        write_matrix_table(&mut buf, &m, "g").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
        assert_eq!(rows[0], ["g", "1", "2", "3"]);
        assert_eq!(rows[1][1], "N");
        assert_eq!(rows[1][3], "I");
        assert!(rows[1][2].parse::<f64>().is_ok(), "{}", rows[1][2]);
        assert_eq!(rows[1][2], rows[2][1]);
    }
}
