//! CSV writers. Every file has a header row, LF line endings and numbers
//! printed to 12 significant digits.

use std::fs::File;
use std::path::Path;

use csv::{Terminator, Writer, WriterBuilder};
use wavepacket_core::{DiagnosticRow, SpectralEnvelope};

use crate::error::{CliError, CliResult};
use crate::experiment::ResultTable;

/// Shortest rendering of `x` rounded to 12 significant digits. Fixed
/// notation for exponents in [-5, 12), scientific otherwise.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn writer(path: &Path) -> CliResult<Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(file))
}

fn write_rows<I>(path: &Path, headers: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = writer(path)?;
    w.write_record(headers).map_err(|e| CliError::csv(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> CliResult<()> {
    let rows = table.rows.iter().map(|r| {
        let mut v = Vec::new();
        if table.sweep_variable.is_some() {
            v.push(r.sweep.map(format_number).unwrap_or_default());
        }
        v.push(r.n.to_string());
        v.push(format_number(r.fidelity));
        if table.monte_carlo {
            let (m, se) = r.monte_carlo.map_or((String::new(), String::new()), |(m, se)| {
                (format_number(m), format_number(se))
            });
            v.push(m);
            v.push(se);
        }
        v.push(r.warning.clone().unwrap_or_default());
        v
    });
    write_rows(path, &table.headers(), rows)
}

pub fn emit_envelope_csv(env: &SpectralEnvelope, path: &Path) -> CliResult<()> {
    let rows = env.rows().into_iter().map(|r| {
        vec![
            format_number(r.omega_mhz),
            format_number(r.re_g),
            format_number(r.im_g),
            format_number(r.abs2_g),
        ]
    });
    write_rows(path, &["omega_MHz", "re_G", "im_G", "abs2_G"], rows)
}

pub fn emit_mu_samples_csv(samples: &[f64], path: &Path) -> CliResult<()> {
    let rows = samples
        .iter()
        .enumerate()
        .map(|(k, &mu)| vec![k.to_string(), format_number(mu)]);
    write_rows(path, &["trial", "mu_sample"], rows)
}

pub fn emit_diagnostics_csv(rows: &[DiagnosticRow], path: &Path) -> CliResult<()> {
    let rows = rows.iter().map(|r| {
        vec![
            format_number(r.t_us),
            format_number(r.norm),
            format_number(r.pop_atom),
            format_number(r.pop_cavity),
            format_number(r.pop_continuum),
        ]
    });
    write_rows(path, &["t_us", "norm", "pop_atom", "pop_cavity", "pop_continuum"], rows)
}

/// `path` with `suffix` appended to the file stem, keeping the extension.
pub fn with_suffix(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}
