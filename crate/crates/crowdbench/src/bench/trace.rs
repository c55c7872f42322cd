//! Line-delimited trace files: a header record with the fully resolved
//! configuration, then one record per step.

use super::{BenchError, EpisodeReport, StepRecord};
use crate::policy::orca::OrcaParams;
use crate::policy::sf::SfParams;
use crate::sim::{EpisodeOutcome, GroupKind, ScenarioConfig, WorldState};
use crate::taga::TagaConfig;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub const TRACE_FORMAT: &str = "crowdbench.trace.v1";

/// Static group structure of the episode; memberships never change while an
/// episode runs, so they live in the header rather than in every record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupMeta {
    pub group_id: usize,
    pub kind: GroupKind,
    pub leader_id: Option<usize>,
    pub member_ids: Vec<usize>,
}

/// First line of every trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub policy: String,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub taga: Option<TagaConfig>,
    pub orca: OrcaParams,
    pub sf: SfParams,
    pub groups: Vec<GroupMeta>,
    pub outcome: EpisodeOutcome,
    pub nav_time: f64,
    pub path_length: f64,
    pub gcr_fraction: f64,
}

impl TraceHeader {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        policy: String,
        scenario: ScenarioConfig,
        taga: Option<TagaConfig>,
        orca: OrcaParams,
        sf: SfParams,
        world0: &WorldState,
        report: &EpisodeReport,
    ) -> Self {
        TraceHeader {
            format: TRACE_FORMAT.to_string(),
            policy,
            seed: report.seed,
            scenario,
            taga,
            orca,
            sf,
            groups: world0
                .groups
                .iter()
                .map(|g| GroupMeta {
                    group_id: g.group_id,
                    kind: g.kind,
                    leader_id: g.leader_id,
                    member_ids: g.member_ids.clone(),
                })
                .collect(),
            outcome: report.outcome,
            nav_time: report.nav_time,
            path_length: report.path_length,
            gcr_fraction: report.gcr_fraction,
        }
    }
}

pub fn write_trace<W: Write>(
    writer: W,
    header: &TraceHeader,
    steps: &[StepRecord],
) -> Result<(), BenchError> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer(&mut w, header).map_err(|e| BenchError::Trace(e.to_string()))?;
    w.write_all(b"\n")?;
    for step in steps {
        serde_json::to_writer(&mut w, step).map_err(|e| BenchError::Trace(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(
    path: &Path,
    header: &TraceHeader,
    steps: &[StepRecord],
) -> Result<(), BenchError> {
    let file = std::fs::File::create(path)?;
    write_trace(file, header, steps)
}

pub fn read_trace_file(path: &Path) -> Result<(TraceHeader, Vec<StepRecord>), BenchError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| BenchError::Trace("empty trace file".into()))??;
    let header: TraceHeader = serde_json::from_str(&header_line)
        .map_err(|e| BenchError::Trace(format!("bad header: {e}")))?;
    if header.format != TRACE_FORMAT {
        return Err(BenchError::Trace(format!(
            "unsupported trace format '{}'",
            header.format
        )));
    }
    let mut steps = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let step: StepRecord = serde_json::from_str(&line)
            .map_err(|e| BenchError::Trace(format!("bad record on line {}: {e}", i + 2)))?;
        steps.push(step);
    }
    Ok((header, steps))
}
