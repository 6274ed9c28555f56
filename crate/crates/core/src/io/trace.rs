//! Run traces: one JSON object per line, tagged by `"type"`.
//!
//! ```text
//! {"type":"start","width":256,"height":256,"paths":16,"style":"iconography","mode":"sive","seed":0,"total_iters":700}
//! {"type":"iter","iteration":0,"loss":0.0132,"paths":16}
//! {"type":"psnr","iteration":0,"psnr":18.79}
//! {"type":"event","iteration":200,"pruned":[3],"split":[],"cloned":[[5,{"x":0.6,"y":-0.8}]],"paths_before":16,"paths_after":16}
//! {"type":"final","iteration":700,"paths":18,"loss":0.0001,"psnr":38.2}
//! ```
//!
//! A `null` PSNR means the images matched exactly.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::ControlEvent;
use crate::error::{Error, Result};
use crate::geometry::{Point, StyleClass};
use crate::loss::Psnr;
use crate::optimize::LossMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TraceRecord {
    Start {
        width: u32,
        height: u32,
        paths: usize,
        style: StyleClass,
        mode: LossMode,
        seed: u64,
        total_iters: usize,
    },
    Iter {
        iteration: usize,
        loss: f64,
        paths: usize,
    },
    Psnr {
        iteration: usize,
        psnr: Option<f64>,
    },
    Event {
        iteration: usize,
        pruned: Vec<usize>,
        split: Vec<usize>,
        cloned: Vec<(usize, Point)>,
        paths_before: usize,
        paths_after: usize,
    },
    Final {
        iteration: usize,
        paths: usize,
        loss: f64,
        psnr: Option<f64>,
    },
}

impl TraceRecord {
    pub fn psnr(iteration: usize, value: Psnr) -> Self {
        TraceRecord::Psnr {
            iteration,
            psnr: match value {
                Psnr::Exact => None,
                Psnr::Db(v) => Some(v),
            },
        }
    }

    pub fn event(event: &ControlEvent, paths_before: usize, paths_after: usize) -> Self {
        TraceRecord::Event {
            iteration: event.iteration,
            pruned: event.pruned.clone(),
            split: event.split.clone(),
            cloned: event.cloned.clone(),
            paths_before,
            paths_after,
        }
    }

    /// The control event carried by an `event` record.
    pub fn control_event(&self) -> Option<ControlEvent> {
        match self {
            TraceRecord::Event {
                iteration,
                pruned,
                split,
                cloned,
                ..
            } => Some(ControlEvent {
                iteration: *iteration,
                pruned: pruned.clone(),
                split: split.clone(),
                cloned: cloned.clone(),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn events(&self) -> impl Iterator<Item = ControlEvent> + '_ {
        self.records.iter().filter_map(TraceRecord::control_event)
    }

    /// Per-iteration losses in order.
    pub fn losses(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| match r {
                TraceRecord::Iter { loss, .. } => Some(*loss),
                _ => None,
            })
            .collect()
    }

    /// `(iteration, psnr)` pairs, `None` meaning an exact match.
    pub fn psnr_points(&self) -> Vec<(usize, Option<f64>)> {
        self.records
            .iter()
            .filter_map(|r| match r {
                TraceRecord::Psnr { iteration, psnr } => Some((*iteration, *psnr)),
                _ => None,
            })
            .collect()
    }

    /// PSNR of the final record; `Some(inf)` for an exact match.
    pub fn final_psnr(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| match r {
            TraceRecord::Final { psnr, .. } => Some(psnr.unwrap_or(f64::INFINITY)),
            _ => None,
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records always serialize"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<RunTrace> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(line).map_err(|e| Error::Trace {
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        Ok(RunTrace { records })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn summary(&self) -> TraceSummary {
        let mut rows = Vec::new();
        let mut initial = None;
        let mut last_paths = None;
        let mut final_paths = None;
        let mut events_consistent = true;
        let mut final_psnr = None;
        for r in &self.records {
            match r {
                TraceRecord::Start { paths, .. } => {
                    initial.get_or_insert(*paths);
                    last_paths = Some(*paths);
                }
                TraceRecord::Iter { paths, .. } => {
                    initial.get_or_insert(*paths);
                    last_paths = Some(*paths);
                }
                TraceRecord::Event {
                    iteration,
                    pruned,
                    split,
                    cloned,
                    paths_before,
                    paths_after,
                } => {
                    initial.get_or_insert(*paths_before);
                    let row = EventRow {
                        iteration: *iteration,
                        pruned: pruned.len(),
                        split: split.len(),
                        cloned: cloned.len(),
                        paths_after: *paths_after,
                    };
                    if paths_before + row.split + row.cloned != paths_after + row.pruned {
                        events_consistent = false;
                    }
                    last_paths = Some(*paths_after);
                    rows.push(row);
                }
                TraceRecord::Final { paths, psnr, .. } => {
                    final_paths = Some(*paths);
                    final_psnr = Some(psnr.unwrap_or(f64::INFINITY));
                }
                TraceRecord::Psnr { .. } => {}
            }
        }
        let losses = self.losses();
        let initial_paths = initial.unwrap_or(0);
        let final_paths = final_paths.or(last_paths).unwrap_or(initial_paths);
        let (pruned, split, cloned) = rows.iter().fold((0, 0, 0), |acc, r| {
            (acc.0 + r.pruned, acc.1 + r.split, acc.2 + r.cloned)
        });
        TraceSummary {
            iterations: losses.len(),
            first_loss: losses.first().copied(),
            final_loss: losses.last().copied(),
            min_loss: losses.iter().copied().reduce(f64::min),
            final_psnr,
            initial_paths,
            final_paths,
            ledger_balanced: events_consistent
                && initial_paths + cloned + split == final_paths + pruned,
            events: rows,
        }
    }
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<RunTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunTrace::parse(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRow {
    pub iteration: usize,
    pub pruned: usize,
    pub split: usize,
    pub cloned: usize,
    pub paths_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub iterations: usize,
    pub first_loss: Option<f64>,
    pub final_loss: Option<f64>,
    pub min_loss: Option<f64>,
    pub final_psnr: Option<f64>,
    pub initial_paths: usize,
    pub final_paths: usize,
    /// initial + clones + splits - prunes == final, and each event adds up.
    pub ledger_balanced: bool,
    pub events: Vec<EventRow>,
}

impl TraceSummary {
    pub fn totals(&self) -> (usize, usize, usize) {
        self.events.iter().fold((0, 0, 0), |acc, r| {
            (acc.0 + r.pruned, acc.1 + r.split, acc.2 + r.cloned)
        })
    }
}

impl fmt::Display for TraceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6e}"));
        writeln!(f, "iterations: {}", self.iterations)?;
        writeln!(
            f,
            "loss: first {} final {} min {}",
            opt(self.first_loss),
            opt(self.final_loss),
            opt(self.min_loss)
        )?;
        match self.final_psnr {
            Some(p) if p.is_infinite() => writeln!(f, "final psnr: exact")?,
            Some(p) => writeln!(f, "final psnr: {p:.2} dB")?,
            None => writeln!(f, "final psnr: -")?,
        }
        writeln!(
            f,
            "{:>9} {:>7} {:>7} {:>7} {:>7}",
            "iteration", "pruned", "split", "cloned", "paths"
        )?;
        for r in &self.events {
            writeln!(
                f,
                "{:>9} {:>7} {:>7} {:>7} {:>7}",
                r.iteration, r.pruned, r.split, r.cloned, r.paths_after
            )?;
        }
        let (p, s, c) = self.totals();
        writeln!(
            f,
            "{:>9} {:>7} {:>7} {:>7} {:>7}",
            "total", p, s, c, self.final_paths
        )?;
        writeln!(f, "initial paths: {}", self.initial_paths)?;
        writeln!(f, "final paths: {}", self.final_paths)?;
        write!(
            f,
            "ledger: {}",
            if self.ledger_balanced {
                "balanced"
            } else {
                "UNBALANCED"
            }
        )
    }
}
