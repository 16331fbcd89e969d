use std::io::{BufRead, Write};

use super::{SpectraError, Spectrum};

const NM: f64 = 1e-9;

/// Two-column `wavelength_nm,intensity` CSV with one header line.
pub fn write_spectrum_csv<W: Write>(mut w: W, spectrum: &Spectrum) -> std::io::Result<()> {
    writeln!(w, "wavelength_nm,intensity")?;
    for (x, v) in spectrum.wavelengths().iter().zip(spectrum.intensities()) {
        writeln!(w, "{:.6},{:.9e}", x / NM, v)?;
    }
    Ok(())
}

/// Reads the CSV written by [`write_spectrum_csv`] or an external instrument
/// in the same layout. Lines starting with `#` are ignored; negative
/// intensities (e.g. after dark subtraction) are clipped to zero.
pub fn read_spectrum_csv<R: BufRead>(
    r: R,
    resolution_fwhm_m: f64,
) -> Result<Spectrum, SpectraError> {
    let mut wavelengths = Vec::new();
    let mut intensities = Vec::new();
    let mut header_seen = false;
    let mut clipped = 0usize;
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| SpectraError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| SpectraError::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(err(format!("expected 2 columns, found {}", fields.len())));
        }
        if !header_seen {
            header_seen = true;
            if fields[0].parse::<f64>().is_err() {
                continue;
            }
        }
        let x: f64 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad wavelength '{}'", fields[0])))?;
        let v: f64 = fields[1]
            .parse()
            .map_err(|_| err(format!("bad intensity '{}'", fields[1])))?;
        if !(x.is_finite() && v.is_finite()) {
            return Err(err("non-finite value".into()));
        }
        if let Some(prev) = wavelengths.last() {
            if x * NM <= *prev {
                return Err(err("wavelengths must strictly increase".into()));
            }
        }
        if v < 0.0 {
            clipped += 1;
        }
        wavelengths.push(x * NM);
        intensities.push(v.max(0.0));
    }
    if clipped > 0 {
        log::warn!("clipped {clipped} negative intensities to zero");
    }
    Spectrum::new(wavelengths, intensities, resolution_fwhm_m)
}
