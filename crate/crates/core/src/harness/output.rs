use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::{PolicyResult, ResultBundle};
use crate::error::{Error, Result};

pub const CURVES_HEADER: &str =
    "round,fair_regret_mean,fair_regret_std,std_regret_mean,std_regret_std";
pub const SELECTION_HEADER: &str = "group,selected_fraction_mean,selected_fraction_std";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn curves_file(policy: &str) -> String {
    format!("curves_{policy}.csv")
}

pub fn selection_file(policy: &str) -> String {
    format!("selection_{policy}.csv")
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Cumulative-regret curves at rounds `1, 1 + stride, 1 + 2·stride, …`.
pub fn render_curves(result: &PolicyResult, stride: usize) -> String {
    let c = &result.curves;
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for i in (0..c.horizon()).step_by(stride.max(1)) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i + 1,
            c.fair_mean[i],
            c.fair_std[i],
            c.std_mean[i],
            c.std_std[i]
        );
    }
    out
}

/// Selected/offered fraction per group; empty cells for groups never offered.
pub fn render_selection(result: &PolicyResult, group_names: &[String]) -> String {
    let c = &result.curves;
    let mut out = String::from(SELECTION_HEADER);
    out.push('\n');
    for (g, name) in group_names.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            quote(name),
            opt(c.group_fraction_mean[g]),
            opt(c.group_fraction_std[g])
        );
    }
    out
}

/// Writes every output file of `bundle` into `dir`.
///
/// Existing files are replaced only when `overwrite` is set. If any write
/// fails, the files written so far are removed.
pub fn emit_outputs(bundle: &ResultBundle, dir: &Path, overwrite: bool) -> Result<Vec<PathBuf>> {
    let stride = bundle.manifest.config.record_stride;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for p in &bundle.policies {
        files.push((dir.join(curves_file(&p.name)), render_curves(p, stride)));
        files.push((
            dir.join(selection_file(&p.name)),
            render_selection(p, &bundle.group_names),
        ));
    }
    let mut manifest = serde_json::to_string_pretty(&bundle.manifest)?;
    manifest.push('\n');
    files.push((dir.join(MANIFEST_FILE), manifest));

    if !overwrite {
        if let Some((path, _)) = files.iter().find(|(p, _)| p.exists()) {
            return Err(Error::OutputExists(path.clone()));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut written = Vec::with_capacity(files.len());
    for (path, contents) in files {
        if let Err(e) = fs::write(&path, contents) {
            for w in &written {
                let _ = fs::remove_file(w);
            }
            let _ = fs::remove_file(&path);
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}
