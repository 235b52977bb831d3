//! CSV, JSON and SVG writers. A failed run leaves nothing behind.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::run::Report;
use crate::svg::stem_plot;
use crate::Format;

fn spectrum_csv(pairs: &[[f64; 2]]) -> String {
    let mut s = String::from("frequency_hz,value\n");
    for [f, v] in pairs {
        s.push_str(&format!("{f},{v:e}\n"));
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Classical column: `I_T` weights when computed, otherwise ΔI.
fn weights_csv(report: &Report) -> String {
    let w = &report.weights;
    let classical = w.i_total.as_ref().or(w.delta_i.as_ref());
    let mut s = String::from("mirror,weight_quantum,weight_classical,deviation\n");
    for (i, (name, _)) in report.mirrors.iter().enumerate() {
        let q = w.quantum.as_ref().map(|v| v[i].1);
        let c = classical.map(|v| v[i].1);
        let dev = report
            .comparison
            .as_ref()
            .map(|c| c.report.rows[i].deviation);
        s.push_str(&format!("{name},{},{},{}\n", opt(q), opt(c), opt(dev)));
    }
    s
}

fn render(
    report: &Report,
    formats: &[Format],
    log: bool,
) -> Result<Vec<(&'static str, String)>, serde_json::Error> {
    let mut files = Vec::new();
    for f in formats {
        match f {
            Format::Csv => {
                files.push(("weights.csv", weights_csv(report)));
                if let Some(p) = &report.spectra.delta_i {
                    files.push(("delta_i_spectrum.csv", spectrum_csv(p)));
                }
                if let Some(p) = &report.spectra.i_total {
                    files.push(("i_total_spectrum.csv", spectrum_csv(p)));
                }
            }
            Format::Json => {
                let mut text = serde_json::to_string_pretty(report)?;
                text.push('\n');
                files.push(("report.json", text));
            }
            Format::Svg => {
                if let Some(p) = &report.spectra.delta_i {
                    files.push((
                        "delta_i_spectrum.svg",
                        stem_plot("|ΔI(f)|²", p, &report.mirrors, log),
                    ));
                }
                if let Some(p) = &report.spectra.i_total {
                    files.push((
                        "i_total_spectrum.svg",
                        stem_plot("I_T(f)", p, &report.mirrors, log),
                    ));
                }
            }
        }
    }
    Ok(files)
}

/// Writes the requested formats into `dir`. On any error the files written so
/// far, and `dir` itself if it was created here, are removed.
pub fn write_outputs(
    dir: &Path,
    report: &Report,
    formats: &[Format],
    log: bool,
) -> io::Result<Vec<PathBuf>> {
    let files = render(report, formats, log).map_err(io::Error::other)?;
    let created = !dir.exists();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, text) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            if created {
                let _ = fs::remove_dir(dir);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}
