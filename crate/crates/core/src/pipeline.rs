//! File-level orchestration: curate source files into clips, retarget the
//! clips and score the results.
//!
//! Every stage takes a list of input paths, works on them in parallel on a
//! bounded thread pool and writes its artifacts in a fixed order, so that
//! reruns with the same inputs, configuration and seed produce identical
//! bytes. A failure on one input is recorded and does not stop the others.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curation::{contact_scores, curate, CurationConfig, CurationReport, FilterThresholds, CURATION_CSV_HEADER};
use crate::error::{Error, Result};
use crate::io::{
    load_json, load_retargeted_motion, load_robot_model, load_source_motion, save_json, save_retargeted_motion,
    save_source_motion,
};
use crate::kinematics::{adapt_source_shape, CorrespondenceEntry, JointCorrespondence};
use crate::metrics::{quality_report, summarize_corpus, write_metrics_csv, CorpusSummary, QualityReport};
use crate::retarget::{retarget, OptimizerConfig};
use crate::robot::RobotModel;
use crate::signal::FilterSpec;
use crate::synth::{test_correspondence_entries, test_humanoid};

pub const CURATED_DIR: &str = "curated";
pub const RETARGETED_DIR: &str = "retargeted";
pub const METRICS_DIR: &str = "metrics";
pub const CURATION_REPORT_JSON: &str = "curation_report.json";
pub const CURATION_REPORT_CSV: &str = "curation_report.csv";
pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const TRACE_SUFFIX: &str = ".trace.csv";

/// Every tunable of the pipeline in one document.
///
/// Relative paths are resolved against the directory of the file the
/// configuration was loaded from. Without `robot_model` the built-in test
/// humanoid and its correspondence are used.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub filter: FilterSpec,
    pub thresholds: FilterThresholds,
    pub curation: CurationConfig,
    pub optimizer: OptimizerConfig,
    pub robot_model: Option<PathBuf>,
    /// JSON array of correspondence entries.
    pub correspondence: Option<PathBuf>,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: Self = load_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.robot_model, &mut cfg.correspondence].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.thresholds.validate()?;
        self.curation.validate()?;
        self.optimizer.validate()?;
        if self.curation.ramp_top != self.optimizer.contact_ramp_top {
            return Err(Error::param(
                "contact_ramp_top",
                format!(
                    "curation.ramp_top ({}) and optimizer.contact_ramp_top ({}) must agree",
                    self.curation.ramp_top, self.optimizer.contact_ramp_top
                ),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers", "must be at least 1"));
        }
        if self.robot_model.is_none() != self.correspondence.is_none() {
            return Err(Error::param(
                "robot_model",
                "robot_model and correspondence must be given together",
            ));
        }
        Ok(())
    }

    /// Loads the robot model and correspondence entries.
    pub fn resources(&self) -> Result<Resources> {
        match (&self.robot_model, &self.correspondence) {
            (Some(model), Some(corr)) => Ok(Resources {
                model: load_robot_model(model)?,
                entries: load_json(corr)?,
            }),
            _ => Ok(Resources {
                model: test_humanoid(),
                entries: test_correspondence_entries(),
            }),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::param("workers", e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Resources {
    pub model: RobotModel,
    pub entries: Vec<CorrespondenceEntry>,
}

impl Resources {
    pub fn correspondence(&self, source_joints: &[String]) -> Result<JointCorrespondence> {
        JointCorrespondence::resolve(&self.entries, source_joints, &self.model)
    }
}

/// One input that could not be processed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub input: PathBuf,
    pub message: String,
}

/// Outcome of one stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub processed: usize,
    /// Files written, in write order.
    pub written: Vec<PathBuf>,
    pub failures: Vec<Failure>,
}

impl StageSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, other: StageSummary) {
        self.processed += other.processed;
        self.written.extend(other.written);
        self.failures.extend(other.failures);
    }
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| Error::schema(path.display().to_string(), "file name is not valid UTF-8"))
}

/// The JSON files named by `inputs`, directories expanded one level,
/// sorted by path. Report files written by the stages are skipped when
/// expanding a directory.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = fs::read_dir(input).map_err(|source| Error::Io {
                path: input.clone(),
                source,
            })?;
            for e in entries {
                let p = e
                    .map_err(|source| Error::Io {
                        path: input.clone(),
                        source,
                    })?
                    .path();
                let report = p
                    .file_name()
                    .is_some_and(|n| n == CURATION_REPORT_JSON || n == METRICS_JSON);
                if p.is_file() && p.extension().is_some_and(|x| x == "json") && !report {
                    out.push(p);
                }
            }
        } else if input.is_file() {
            out.push(input.clone());
        } else {
            return Err(Error::Io {
                path: input.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            });
        }
    }
    out.sort();
    out.dedup();
    let mut seen = BTreeMap::new();
    for p in &out {
        if let Some(prev) = seen.insert(stem(p)?, p.clone()) {
            return Err(Error::schema(
                p.display().to_string(),
                format!("file stem collides with {}", prev.display()),
            ));
        }
    }
    Ok(out)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn failure(input: &Path, err: &Error) -> Failure {
    Failure {
        input: input.to_owned(),
        message: err.to_string(),
    }
}

/// Name of clip `index` cut from the source file with stem `stem`.
pub fn clip_name(stem: &str, index: usize) -> String {
    format!("{stem}__clip{index:03}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceCuration {
    pub source: String,
    pub report: CurationReport,
}

/// Curates every input file and writes the kept clips plus the JSON and
/// CSV reports to `out_dir`.
pub fn run_curate(inputs: &[PathBuf], cfg: &PipelineConfig, out_dir: &Path) -> Result<StageSummary> {
    cfg.validate()?;
    let files = collect_inputs(inputs)?;
    create_dir(out_dir)?;
    let results: Vec<_> = cfg.pool()?.install(|| {
        files
            .par_iter()
            .map(|path| -> Result<_> {
                let motion = load_source_motion(path)?;
                let (kept, report) = curate(&motion, &cfg.thresholds, &cfg.filter, &cfg.curation)?;
                Ok((stem(path)?, kept, report))
            })
            .collect()
    });

    let mut summary = StageSummary::default();
    let mut reports = Vec::new();
    for (path, result) in files.iter().zip(results) {
        summary.processed += 1;
        match result {
            Ok((stem, kept, report)) => {
                let passing = report.clips.iter().filter(|c| c.pass);
                for (clip, entry) in kept.iter().zip(passing) {
                    let out = out_dir.join(format!("{}.json", clip_name(&stem, entry.clip_index)));
                    save_source_motion(clip, &out)?;
                    summary.written.push(out);
                }
                reports.push(SourceCuration { source: stem, report });
            }
            Err(e) => summary.failures.push(failure(path, &e)),
        }
    }

    let json = out_dir.join(CURATION_REPORT_JSON);
    save_json(&reports, &json)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(CURATION_CSV_HEADER)?;
    for r in &reports {
        r.report.write_csv_rows(&r.source, &mut csv)?;
    }
    let bytes = csv.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    let csv_path = out_dir.join(CURATION_REPORT_CSV);
    write_bytes(&csv_path, &bytes)?;
    summary.written.extend([json, csv_path]);
    Ok(summary)
}

/// Retargets every clip, writing `<stem>.json` and `<stem>.trace.csv`.
pub fn run_retarget(inputs: &[PathBuf], cfg: &PipelineConfig, out_dir: &Path) -> Result<StageSummary> {
    cfg.validate()?;
    let res = cfg.resources()?;
    let files = collect_inputs(inputs)?;
    create_dir(out_dir)?;
    let results: Vec<_> = cfg.pool()?.install(|| {
        files
            .par_iter()
            .map(|path| -> Result<_> {
                let source = load_source_motion(path)?;
                let corr = res.correspondence(source.joint_names())?;
                let out = retarget(&source, &res.model, &corr, &cfg.optimizer)?;
                let mut trace = Vec::new();
                out.trace.write_csv(&mut trace)?;
                Ok((stem(path)?, out.motion, trace))
            })
            .collect()
    });

    let mut summary = StageSummary::default();
    for (path, result) in files.iter().zip(results) {
        summary.processed += 1;
        match result {
            Ok((stem, motion, trace)) => {
                let motion_path = out_dir.join(format!("{stem}.json"));
                save_retargeted_motion(&motion, &motion_path)?;
                let trace_path = out_dir.join(format!("{stem}{TRACE_SUFFIX}"));
                write_bytes(&trace_path, &trace)?;
                summary.written.extend([motion_path, trace_path]);
            }
            Err(e) => summary.failures.push(failure(path, &e)),
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipMetrics {
    pub clip: String,
    pub report: QualityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub clips: Vec<ClipMetrics>,
    pub summary: CorpusSummary,
}

/// Scores a retargeted motion against the clip it came from, using
/// contacts from the shape-adapted clip as the optimizer did.
pub fn score_clip(
    retargeted_path: &Path,
    source_path: &Path,
    res: &Resources,
    cfg: &PipelineConfig,
) -> Result<QualityReport> {
    let motion = load_retargeted_motion(retargeted_path)?;
    let source = load_source_motion(source_path)?;
    let corr = res.correspondence(source.joint_names())?;
    let adapted = adapt_source_shape(&source, &corr, &res.model)?;
    let contacts = contact_scores(&adapted, cfg.curation.ramp_top)?;
    quality_report(
        &motion,
        &adapted,
        &corr,
        &res.model,
        &contacts,
        cfg.optimizer.limit_margin,
        source.fps(),
    )
}

/// Pairs retargeted motions with source clips by file stem and writes
/// `metrics.json` and `metrics.csv` into `out_dir`. Unpaired files on
/// either side are failures.
pub fn run_metrics(
    retargeted: &[PathBuf],
    sources: &[PathBuf],
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<StageSummary> {
    cfg.validate()?;
    let res = cfg.resources()?;
    let by_stem = |paths: &[PathBuf]| -> Result<BTreeMap<String, PathBuf>> {
        collect_inputs(paths)?.into_iter().map(|p| Ok((stem(&p)?, p))).collect()
    };
    let ret = by_stem(retargeted)?;
    let src = by_stem(sources)?;

    let mut summary = StageSummary::default();
    for (name, path) in &ret {
        if !src.contains_key(name) {
            summary.failures.push(Failure {
                input: path.clone(),
                message: format!("no source clip with stem `{name}`"),
            });
        }
    }
    for (name, path) in &src {
        if !ret.contains_key(name) {
            summary.failures.push(Failure {
                input: path.clone(),
                message: format!("no retargeted motion with stem `{name}`"),
            });
        }
    }
    let pairs: Vec<(&String, &PathBuf, &PathBuf)> =
        ret.iter().filter_map(|(n, r)| src.get(n).map(|s| (n, r, s))).collect();

    create_dir(out_dir)?;
    let results: Vec<_> = cfg
        .pool()?
        .install(|| pairs.par_iter().map(|(_, r, s)| score_clip(r, s, &res, cfg)).collect());
    let mut clips = Vec::new();
    for ((name, r, _), result) in pairs.iter().zip(results) {
        summary.processed += 1;
        match result {
            Ok(report) => clips.push(ClipMetrics {
                clip: (*name).clone(),
                report,
            }),
            Err(e) => summary.failures.push(failure(r, &e)),
        }
    }

    let doc = MetricsDocument {
        summary: summarize_corpus(clips.iter().map(|c| &c.report)),
        clips,
    };
    let json = out_dir.join(METRICS_JSON);
    save_json(&doc, &json)?;
    let rows: Vec<(String, QualityReport)> = doc.clips.iter().map(|c| (c.clip.clone(), c.report.clone())).collect();
    let mut bytes = Vec::new();
    write_metrics_csv(&rows, &doc.summary, &mut bytes)?;
    let csv_path = out_dir.join(METRICS_CSV);
    write_bytes(&csv_path, &bytes)?;
    summary.written.extend([json, csv_path]);
    Ok(summary)
}

/// Curate, retarget and score, with each stage's artifacts in its own
/// subdirectory of `out_dir`.
pub fn run_pipeline(inputs: &[PathBuf], cfg: &PipelineConfig, out_dir: &Path) -> Result<StageSummary> {
    cfg.validate()?;
    cfg.resources()?;
    let curated = out_dir.join(CURATED_DIR);
    let retargeted = out_dir.join(RETARGETED_DIR);
    let mut summary = run_curate(inputs, cfg, &curated)?;
    let clips: Vec<PathBuf> = summary
        .written
        .iter()
        .filter(|p| p.file_name().is_some_and(|n| n != CURATION_REPORT_JSON))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .cloned()
        .collect();
    if clips.is_empty() {
        return Ok(summary);
    }
    let stage = run_retarget(&clips, cfg, &retargeted)?;
    let motions: Vec<PathBuf> = stage
        .written
        .iter()
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .cloned()
        .collect();
    summary.absorb(stage);
    if !motions.is_empty() {
        let kept: Vec<PathBuf> = motions
            .iter()
            .map(|m| curated.join(m.file_name().expect("written file has a name")))
            .collect();
        summary.absorb(run_metrics(&motions, &kept, cfg, &out_dir.join(METRICS_DIR))?);
    }
    Ok(summary)
}

/// Checks the configuration, the robot resources and every input file
/// without writing anything. Returns the number of inputs read.
pub fn dry_run(inputs: &[PathBuf], cfg: &PipelineConfig) -> Result<usize> {
    cfg.validate()?;
    let res = cfg.resources()?;
    let files = collect_inputs(inputs)?;
    for f in &files {
        let m = load_source_motion(f)?;
        res.correspondence(m.joint_names())?;
    }
    Ok(files.len())
}
