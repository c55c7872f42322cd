//! Benchmark suites: a set of policy cells evaluated on identical seeded
//! scenarios, with per-episode traces and a summary table.

use super::trace::{write_trace_file, TraceHeader};
use super::{aggregate, run_episode, BenchError, BenchmarkSummary, EpisodeReport};
use crate::policy::orca::OrcaParams;
use crate::policy::sf::SfParams;
use crate::policy::{OrcaPolicy, RobotPolicy, SfPolicy};
use crate::sim::ScenarioConfig;
use crate::taga::{wrap_policy, TagaConfig};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Base navigation method of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseKind {
    Orca,
    Sf,
}

/// One benchmark cell: a base policy, optionally wrapped with group
/// avoidance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolicySpec {
    pub base: BaseKind,
    pub taga: bool,
}

impl PolicySpec {
    pub fn parse(name: &str) -> Result<Self, BenchError> {
        match name.trim() {
            "orca" => Ok(PolicySpec {
                base: BaseKind::Orca,
                taga: false,
            }),
            "orca+taga" => Ok(PolicySpec {
                base: BaseKind::Orca,
                taga: true,
            }),
            "sf" => Ok(PolicySpec {
                base: BaseKind::Sf,
                taga: false,
            }),
            "sf+taga" => Ok(PolicySpec {
                base: BaseKind::Sf,
                taga: true,
            }),
            other => Err(BenchError::UnknownCell(other.to_string())),
        }
    }

    pub fn name(&self) -> String {
        let base = match self.base {
            BaseKind::Orca => "orca",
            BaseKind::Sf => "sf",
        };
        if self.taga {
            format!("{base}+taga")
        } else {
            base.to_string()
        }
    }

    fn dir_name(&self) -> String {
        self.name().replace('+', "_")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSection {
    pub episodes: usize,
    pub base_seed: u64,
    pub cells: Vec<String>,
    pub out_dir: String,
}

impl Default for SuiteSection {
    fn default() -> Self {
        SuiteSection {
            episodes: 100,
            base_seed: 1,
            cells: vec![
                "orca".into(),
                "orca+taga".into(),
                "sf".into(),
                "sf+taga".into(),
            ],
            out_dir: "out".into(),
        }
    }
}

/// Fully resolved benchmark configuration. Every field has a default, so a
/// suite file only needs to override what it cares about.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: SuiteSection,
    pub scenario: ScenarioConfig,
    pub taga: TagaConfig,
    pub orca: OrcaParams,
    pub sf: SfParams,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: SuiteConfig =
            toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.scenario.validate().map_err(BenchError::Config)?;
        self.taga.validate().map_err(BenchError::Config)?;
        self.sf.validate().map_err(BenchError::Config)?;
        if !self.orca.tau.is_finite() || self.orca.tau <= 0.0 {
            return Err(BenchError::Config(format!(
                "orca.tau must be strictly positive, got {}",
                self.orca.tau
            )));
        }
        for cell in &self.suite.cells {
            PolicySpec::parse(cell)?;
        }
        Ok(())
    }

    pub fn build_policy(&self, spec: PolicySpec) -> Box<dyn RobotPolicy> {
        let dt = self.scenario.dt;
        let base: Box<dyn RobotPolicy> = match spec.base {
            BaseKind::Orca => Box::new(OrcaPolicy::new(self.orca, dt)),
            BaseKind::Sf => Box::new(SfPolicy::new(self.sf, dt)),
        };
        if spec.taga {
            Box::new(wrap_policy(base, self.taga))
        } else {
            base
        }
    }
}

/// Summary of one benchmark cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub name: String,
    pub summary: BenchmarkSummary,
    pub reports: Vec<EpisodeReport>,
}

/// Runs every cell of the suite on the same per-episode seeds, writing one
/// trace file per episode, the resolved config, and a summary table under
/// `out_dir`.
pub fn run_suite(config: &SuiteConfig, out_dir: &Path) -> Result<Vec<CellResult>, BenchError> {
    config.validate()?;
    if config.suite.episodes == 0 {
        return Err(BenchError::EmptyReportList);
    }
    std::fs::create_dir_all(out_dir)?;
    let resolved = toml::to_string_pretty(config).map_err(|e| BenchError::Config(e.to_string()))?;
    std::fs::write(out_dir.join("resolved_config.toml"), resolved)?;

    let mut results = Vec::new();
    for cell_name in &config.suite.cells {
        let spec = PolicySpec::parse(cell_name)?;
        let cell_dir = out_dir.join(spec.dir_name());
        std::fs::create_dir_all(&cell_dir)?;

        let mut reports = Vec::with_capacity(config.suite.episodes);
        for i in 0..config.suite.episodes {
            let seed = config.suite.base_seed + i as u64;
            let mut policy = config.build_policy(spec);
            let (report, steps) = run_episode(&config.scenario, policy.as_mut(), seed)?;
            let world0 = crate::sim::generate_scenario(&config.scenario, seed)?;
            let header = TraceHeader::new(
                spec.name(),
                config.scenario.clone(),
                spec.taga.then_some(config.taga),
                config.orca,
                config.sf,
                &world0,
                &report,
            );
            write_trace_file(
                &cell_dir.join(format!("episode_{seed:05}.jsonl")),
                &header,
                &steps,
            )?;
            reports.push(report);
        }
        let summary = aggregate(&reports)?;
        results.push(CellResult {
            name: spec.name(),
            summary,
            reports,
        });
    }

    std::fs::write(out_dir.join("summary.tsv"), summary_table(&results))?;
    Ok(results)
}

/// Renders the summary as a tab-separated table with a fixed number of
/// decimals, so reruns of the same suite are byte-identical.
pub fn summary_table(results: &[CellResult]) -> String {
    let mut out = String::from("model\tSR\tCR\tGCR\tTR\tNT\tPL\tGCRt\n");
    for cell in results {
        let s = &cell.summary;
        let fmt_opt = |v: Option<f64>| match v {
            Some(v) => format!("{v:.2}"),
            None => "-".to_string(),
        };
        writeln!(
            out,
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{:.4}",
            cell.name,
            s.sr,
            s.cr,
            s.gcr,
            s.tr,
            fmt_opt(s.mean_nt),
            fmt_opt(s.mean_pl),
            s.mean_gcr_time,
        )
        .expect("string write cannot fail");
    }
    out
}
