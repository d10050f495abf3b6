//! Output files. Floats are written with Rust's shortest round-trip
//! formatting, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use pursuit_core::sim::{BatchOutcome, ModeSummary, TraceRecord, WinRate};
use serde::Serialize;

use crate::CliError;

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<(), CliError> {
    write_text(path, &jsonl(trace))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const SUMMARY_HEADER: &str = "mode,n,mean_total,std_total,mean_max,std_max,timeouts";

fn summary_row(s: &ModeSummary) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        s.mode,
        s.n,
        opt(s.mean_total),
        opt(s.std_total),
        opt(s.mean_max),
        opt(s.std_max),
        s.timeouts
    )
}

pub fn summary_csv(rows: &[ModeSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for s in rows {
        let _ = writeln!(out, "{}", summary_row(s));
    }
    out
}

pub fn winrates_csv(rows: &[WinRate]) -> String {
    let mut out = String::from("mode,baseline,metric,wins,runs,win_rate\n");
    for w in rows {
        let metric = match w.metric {
            pursuit_core::sim::Metric::Total => "total",
            pursuit_core::sim::Metric::Max => "max",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            w.mode,
            w.baseline,
            metric,
            w.wins,
            w.runs,
            w.rate()
        );
    }
    out
}

pub fn sweep_csv(levels: &[(f64, Vec<ModeSummary>)]) -> String {
    let mut out = format!("k2,{SUMMARY_HEADER}\n");
    for (k2, rows) in levels {
        for s in rows {
            let _ = writeln!(out, "{k2},{}", summary_row(s));
        }
    }
    out
}

/// `summary.csv`, `winrates.csv` and `episodes.jsonl` (one result per line,
/// modes in the given order, seeds ascending).
pub fn write_batch(dir: &Path, outcome: &BatchOutcome) -> Result<(), CliError> {
    write_text(&dir.join("summary.csv"), &summary_csv(&outcome.summaries()))?;
    write_text(&dir.join("winrates.csv"), &winrates_csv(&outcome.standard_win_rates()))?;
    write_text(&dir.join("episodes.jsonl"), &jsonl(outcome.results.iter().flatten()))
}
