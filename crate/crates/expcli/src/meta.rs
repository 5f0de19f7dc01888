//! Output files: record CSV, summary CSV and the sidecar JSON.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;
use crate::plan::ExperimentPlan;
use crate::records::write_csv;
use crate::run::{Failure, RealizationInfo, RunOutput};

#[derive(Serialize)]
struct Versions {
    macrospin: &'static str,
    expcli: &'static str,
}

#[derive(Serialize)]
struct Window {
    start: f64,
    end: f64,
    definition: &'static str,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    plan: &'a ExperimentPlan,
    versions: Versions,
    saturation_window: Window,
    records: usize,
    realizations: &'a [RealizationInfo],
    failures: &'a [Failure],
    timestamp_unix: u64,
}

/// `<base>.csv`, `<base>_summary.csv`, `<base>.json`.
pub fn output_paths(base: &Path) -> [PathBuf; 3] {
    let with = |suffix: &str| {
        let mut s = base.as_os_str().to_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    [with(".csv"), with("_summary.csv"), with(".json")]
}

pub fn write_outputs<R: Serialize, S: Serialize>(
    base: &Path,
    command: &str,
    plan: &ExperimentPlan,
    out: &RunOutput<R>,
    summary: &[S],
) -> Result<[PathBuf; 3]> {
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let paths = output_paths(base);
    write_csv(BufWriter::new(File::create(&paths[0])?), &out.records)?;
    write_csv(BufWriter::new(File::create(&paths[1])?), summary)?;
    let [start, end] = plan.window();
    let meta = Sidecar {
        command,
        plan,
        versions: Versions {
            macrospin: macrospin::VERSION,
            expcli: env!("CARGO_PKG_VERSION"),
        },
        saturation_window: Window {
            start,
            end,
            definition: "saturated values average M/N over evaluation times t with start <= t <= end, \
                         then over states, then across realizations",
        },
        records: out.records.len(),
        realizations: &out.realizations,
        failures: &out.failures,
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(&paths[2])?), &meta)?;
    Ok(paths)
}
