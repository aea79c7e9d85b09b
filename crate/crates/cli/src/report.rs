//! Summary of a directory of experiment manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::run::{Finding, Manifest, Relation};
use crate::CliError;

fn load(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| CliError::Manifest {
        path: path.to_path_buf(),
        reason: e.message().to_string(),
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    for f in &manifest.files {
        let bytes = fs::read(dir.join(&f.name)).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            reason: format!("listed file {}: {e}", f.name),
        })?;
        if hex::encode(Sha256::digest(&bytes)) != f.sha256 {
            return Err(CliError::Manifest {
                path: path.to_path_buf(),
                reason: format!("hash mismatch for {}", f.name),
            });
        }
    }
    Ok(manifest)
}

fn number(v: f64) -> String {
    if v != 0.0 && v.is_finite() && (v.abs() < 1e-3 || v.abs() >= 1e6) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

fn line(kind: &str, f: &Finding) -> String {
    let mut s = format!("- [{kind}] {} {}", f.quantity, number(f.value));
    if let Some(r) = f.reference {
        write!(s, " {} {}", f.relation.symbol(), number(r)).unwrap();
    }
    let verdict = match (f.relation, f.holds) {
        (Relation::Reported, _) | (_, None) => "reported",
        (_, Some(true)) => "ok",
        (_, Some(false)) => "VIOLATED",
    };
    write!(s, " ({}: {verdict}", f.statement).unwrap();
    if !f.note.is_empty() {
        write!(s, "; {}", f.note).unwrap();
    }
    s.push(')');
    s
}

/// Reads every `manifest-*.toml` in `dir`, checks the listed file hashes
/// and renders the findings grouped by ambient dimension.
pub fn emit_report(dir: &Path) -> Result<String, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("manifest-") && name.ends_with(".toml") {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(CliError::Manifest {
            path: dir.to_path_buf(),
            reason: "no manifest-*.toml files found".to_string(),
        });
    }
    paths.sort();
    let mut by_d: BTreeMap<usize, Vec<Manifest>> = BTreeMap::new();
    for p in &paths {
        let m = load(p)?;
        by_d.entry(m.d).or_default().push(m);
    }
    let mut out = String::from("# Experiment summary\n");
    let mut violated = 0;
    for (d, manifests) in &by_d {
        write!(out, "\n## d = {d}\n\n").unwrap();
        for m in manifests {
            for f in &m.findings {
                if f.holds == Some(false) && f.relation != Relation::Reported {
                    violated += 1;
                }
                writeln!(out, "{}", line(m.kind.name(), f)).unwrap();
            }
        }
    }
    let configs: std::collections::BTreeSet<&str> = by_d
        .values()
        .flatten()
        .map(|m| m.config_sha256.as_str())
        .collect();
    writeln!(
        out,
        "\n{} manifests, {} config hashes, {violated} violated checks",
        paths.len(),
        configs.len()
    )
    .unwrap();
    Ok(out)
}
