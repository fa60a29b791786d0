//! On-disk artifact formats shared by the subcommands: the trace document
//! with its snapshot CSV sidecars, and the run manifest that records how
//! every artifact was produced.

use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use condensation::engine::{CondensationConfig, CondensationTrace, HaltReason, MergeEvent};
use condensation::{io, Error, Result};

/// Bumped whenever a file schema changes incompatibly.
pub const ARTIFACT_VERSION: u32 = 1;

/// Serialized condensation run. Everything from the in-memory trace except
/// the coordinate snapshots, which live in sibling CSV files (one matrix per
/// iteration) so they stay readable without a JSON parser.
#[derive(Debug, Serialize, Deserialize)]
pub struct TraceDocument {
    pub config: CondensationConfig,
    pub epsilon_schedule: Vec<(usize, f64)>,
    pub merges: Vec<MergeEvent>,
    pub labels_per_iteration: Vec<Vec<usize>>,
    pub halt_reason: HaltReason,
    /// `(iteration, path)` pairs; paths are relative to the document's
    /// directory.
    pub snapshot_files: Vec<(usize, String)>,
}

/// The input a condensation run read, with the flags needed to read it the
/// same way again.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataInput {
    pub path: String,
    pub has_header: bool,
    pub label_column: Option<usize>,
}

/// Receipt written next to every command's primary output: what ran, on
/// which inputs, with which settings, producing which files. Reruns driven
/// by a manifest reproduce the original outputs byte for byte; the wall
/// time is the only field that varies.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: u32,
    /// Command-line arguments as given, without the binary path.
    pub command: Vec<String>,
    /// Condensation settings as requested; an "auto" bandwidth stays "auto"
    /// so the intent survives, with the number it resolved to alongside.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<CondensationConfig>,
    /// Numeric initial bandwidth the run actually used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_epsilon: Option<f64>,
    /// Structured description of the point-cloud input, when one was read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<DataInput>,
    /// Every file the command read.
    pub inputs: Vec<String>,
    /// Every file the command wrote, primary output first.
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halt_reason: Option<HaltReason>,
}

/// `foo/trace.json` -> `foo/trace.manifest.json`.
pub fn manifest_path_for(primary_out: &Path) -> PathBuf {
    primary_out.with_extension("manifest.json")
}

/// Serializes pretty JSON with a trailing newline, atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidParameter(
        format!("could not serialize {}: {e}", path.display()),
    ))?;
    text.push('\n');
    io::write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        row: e.line(),
        col: e.column(),
        message: format!("{}: {e}", path.display()),
    })
}

/// Writes the trace JSON plus one snapshot CSV per kept iteration, in a
/// `<stem>_snapshots` directory next to the JSON. Returns every path
/// written, the JSON first.
pub fn write_trace(trace: &CondensationTrace, path: &Path) -> Result<Vec<PathBuf>> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidParameter(format!("bad output path {}", path.display())))?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let snapshot_dir = format!("{stem}_snapshots");

    let mut written = vec![path.to_path_buf()];
    let mut snapshot_files = Vec::with_capacity(trace.snapshots.len());
    for (t, x) in &trace.snapshots {
        let rel = format!("{snapshot_dir}/snapshot_{t:04}.csv");
        let file = match dir {
            Some(d) => d.join(&rel),
            None => PathBuf::from(&rel),
        };
        io::write_matrix(&file, &x.view(), None)?;
        snapshot_files.push((*t, rel));
        written.push(file);
    }

    let doc = TraceDocument {
        config: trace.config.clone(),
        epsilon_schedule: trace.epsilon_schedule.clone(),
        merges: trace.merge_log.clone(),
        labels_per_iteration: trace.labels_per_iteration.clone(),
        halt_reason: trace.halt_reason,
        snapshot_files,
    };
    write_json(path, &doc)?;
    Ok(written)
}

/// Loads a trace document and its snapshot files back into the in-memory
/// form. The per-iteration degree log is not part of the file schema (no
/// downstream consumer reads it), so it comes back empty.
pub fn read_trace(path: &Path) -> Result<CondensationTrace> {
    let doc: TraceDocument = read_json(path)?;
    if doc.epsilon_schedule.is_empty() || doc.labels_per_iteration.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{}: trace document records no iterations",
            path.display()
        )));
    }
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut snapshots = Vec::with_capacity(doc.snapshot_files.len());
    for (t, rel) in &doc.snapshot_files {
        let file = match dir {
            Some(d) => d.join(rel),
            None => PathBuf::from(rel),
        };
        snapshots.push((*t, io::read_matrix(&file, false)?));
    }
    Ok(CondensationTrace {
        initial_epsilon: doc.epsilon_schedule[0].1,
        config: doc.config,
        snapshots,
        epsilon_schedule: doc.epsilon_schedule,
        degree_log: Vec::new(),
        merge_log: doc.merges,
        labels_per_iteration: doc.labels_per_iteration,
        halt_reason: doc.halt_reason,
    })
}
