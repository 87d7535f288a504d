//! File formats: versioned CSV tables and spectrum files.

use std::fs;
use std::io::Write;
use std::path::Path;

use nlsphere::harmonics::{lm_index, n_coeffs, ScalarSpectrum, VectorSpectrum};
use nlsphere::operators::Spectrum;
use nlsphere::Complex64;
use serde::{Deserialize, Serialize};

use crate::{CliResult, Failure, Format, OutputArgs};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Full round-trip decimal: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table with a `# nlsphere <version>` first line.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut buf = format!("# nlsphere {VERSION}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| Failure::Config(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Config(e.to_string())
}

pub fn emit(out: &OutputArgs, bytes: &[u8]) -> CliResult<()> {
    match &out.output {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

/// One coefficient in a spectrum file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    pub l: usize,
    pub m: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub version: String,
    /// `scalar` or `vector`.
    pub kind: String,
    pub lmax: usize,
    pub coeffs: Vec<CoeffRecord>,
}

fn records(s: &Spectrum) -> Vec<CoeffRecord> {
    let mut out = Vec::new();
    let mut push = |comp: Option<&str>, lmax: usize, c: &[Complex64]| {
        for l in 0..=lmax {
            for m in -(l as i64)..=(l as i64) {
                let v = c[lm_index(l, m)];
                out.push(CoeffRecord { component: comp.map(str::to_owned), l, m, re: v.re, im: v.im });
            }
        }
    };
    match s {
        Spectrum::Scalar(u) => push(None, u.lmax, &u.coeffs),
        Spectrum::Vector(v) => {
            push(Some("s"), v.lmax, &v.s);
            push(Some("t"), v.lmax, &v.t);
            push(Some("x"), v.lmax, &v.x);
        }
    }
    out
}

pub fn write_spectrum(s: &Spectrum, format: Format) -> CliResult<Vec<u8>> {
    let recs = records(s);
    match format {
        Format::Json => {
            let (kind, lmax) = match s {
                Spectrum::Scalar(u) => ("scalar", u.lmax),
                Spectrum::Vector(v) => ("vector", v.lmax),
            };
            json_bytes(&SpectrumFile { version: VERSION.into(), kind: kind.into(), lmax, coeffs: recs })
        }
        Format::Csv => {
            let vector = matches!(s, Spectrum::Vector(_));
            let rows: Vec<Vec<String>> = recs
                .iter()
                .map(|r| {
                    let mut row = Vec::with_capacity(5);
                    if let Some(c) = &r.component {
                        row.push(c.clone());
                    }
                    row.extend([r.l.to_string(), r.m.to_string(), num(r.re), num(r.im)]);
                    row
                })
                .collect();
            let header: &[&str] = if vector { &["component", "l", "m", "re", "im"] } else { &["l", "m", "re", "im"] };
            csv_table(header, &rows)
        }
    }
}

/// Reads a spectrum; the format follows the extension, CSV otherwise.
pub fn read_spectrum(path: &Path) -> CliResult<Spectrum> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let recs = if is_json {
        let f: SpectrumFile = serde_json::from_str(&text).map_err(|e| Failure::Config(e.to_string()))?;
        if f.kind != "scalar" && f.kind != "vector" {
            return Err(Failure::Config(format!("unknown spectrum kind '{}'", f.kind)));
        }
        f.coeffs
    } else {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let mut out = Vec::new();
        for rec in r.deserialize() {
            out.push(rec.map_err(csv_err)?);
        }
        out
    };
    spectrum_from_records(&recs)
}

pub fn spectrum_from_records(recs: &[CoeffRecord]) -> CliResult<Spectrum> {
    if recs.is_empty() {
        return Err(Failure::Config("empty spectrum".into()));
    }
    let vector = recs[0].component.is_some();
    if recs.iter().any(|r| r.component.is_some() != vector) {
        return Err(Failure::Config("mixed scalar and vector records".into()));
    }
    let lmax = recs.iter().map(|r| r.l).max().unwrap_or(0);
    let mut chans = vec![vec![Complex64::new(0.0, 0.0); n_coeffs(lmax)]; if vector { 3 } else { 1 }];
    for r in recs {
        if r.m.unsigned_abs() as usize > r.l {
            return Err(Failure::Config(format!("invalid mode l={} m={}", r.l, r.m)));
        }
        let ch = match r.component.as_deref() {
            None | Some("s") => 0,
            Some("t") => 1,
            Some("x") => 2,
            Some(c) => return Err(Failure::Config(format!("unknown component '{c}'"))),
        };
        chans[ch][lm_index(r.l, r.m)] = Complex64::new(r.re, r.im);
    }
    Ok(if vector {
        let x = chans.pop().unwrap_or_default();
        let t = chans.pop().unwrap_or_default();
        let s = chans.pop().unwrap_or_default();
        Spectrum::Vector(VectorSpectrum { lmax, s, t, x })
    } else {
        Spectrum::Scalar(ScalarSpectrum::from_coeffs(lmax, chans.pop().unwrap_or_default())?)
    })
}
