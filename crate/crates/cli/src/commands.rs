use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ipec::evaluation::{self, RunReport};
use ipec::{engine, RunConfig};
use rayon::prelude::*;

use crate::config::{run_label, ConfigError, ExperimentConfig, Overrides};

pub struct RunArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub jobs: usize,
}

pub struct RunSummary {
    pub label: String,
    pub dir: PathBuf,
    pub report: RunReport,
}

/// Executes every run of the (possibly swept) config and emits reports
/// under `out/<label>/`.
pub fn run(args: &RunArgs) -> anyhow::Result<Vec<RunSummary>> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    cfg.apply(&args.overrides);
    let runs = cfg.expand()?;
    eprintln!("sweep: {} run(s)", runs.len());

    let base_dir = args.config.parent().unwrap_or(Path::new("."));
    let store = cfg.build_store(base_dir)?;
    for run in &runs {
        ipec::episode::check_capacity(&store, run.shape())
            .map_err(|e| ConfigError(format!("dataset cannot supply episodes: {e}")))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let execute = |run: &RunConfig| -> anyhow::Result<RunSummary> {
        let label = run_label(run);
        let dir = args.out.join(&label);
        let output = engine::run(&store, run).with_context(|| format!("run {label}"))?;
        evaluation::emit(&output, &dir)?;
        Ok(RunSummary {
            label,
            dir,
            report: output.report,
        })
    };
    let results: Vec<anyhow::Result<RunSummary>> = pool.install(|| runs.par_iter().map(execute).collect());
    let summaries = results.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    for s in &summaries {
        println!(
            "{}  acc {:.4} ± {:.4}  mem {}  -> {}",
            s.label,
            s.report.mean_accuracy,
            s.report.ci95,
            s.report.final_memory().entries,
            s.dir.display()
        );
    }
    Ok(summaries)
}

pub struct ComparisonRow {
    pub run: String,
    pub report: RunReport,
}

pub fn compare(dirs: &[PathBuf], out: &Path) -> anyhow::Result<Vec<ComparisonRow>> {
    if dirs.is_empty() {
        return Err(ConfigError("compare needs at least one run directory".into()).into());
    }
    let mut rows = Vec::with_capacity(dirs.len());
    for dir in dirs {
        if !dir.join("report.json").is_file() {
            bail!("{}: no report.json", dir.display());
        }
        let report = evaluation::read_report(dir).with_context(|| format!("{}", dir.display()))?;
        let run = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        rows.push(ComparisonRow { run, report });
    }

    let stdout = std::io::stdout();
    let mut t = stdout.lock();
    writeln!(
        t,
        "{:<28} {:<15} {:<8} {:>6} {:>20} {:>10} {:>12}  digest",
        "run", "mode", "strategy", "k_shot", "accuracy", "mem_end", "mem_bytes"
    )?;
    for r in &rows {
        let c = &r.report.config;
        let mem = r.report.final_memory();
        writeln!(
            t,
            "{:<28} {:<15} {:<8} {:>6} {:>20} {:>10} {:>12}  {}",
            r.run,
            c.mode.to_string(),
            c.strategy.to_string(),
            c.k_shot,
            format!("{:.4} ± {:.4}", r.report.mean_accuracy, r.report.ci95),
            mem.entries,
            mem.bytes,
            r.report.config_digest
        )?;
    }

    let mut csv = String::from("run,mode,strategy,k_shot,mean_accuracy,ci95,mem_entries,mem_bytes,config_digest\n");
    for r in &rows {
        let c = &r.report.config;
        let mem = r.report.final_memory();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.run,
            c.mode,
            c.strategy,
            c.k_shot,
            ipec::numfmt::fmt17(r.report.mean_accuracy),
            ipec::numfmt::fmt17(r.report.ci95),
            mem.entries,
            mem.bytes,
            r.report.config_digest
        ));
    }
    std::fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    Ok(rows)
}

/// Runs the acceptance suite; `only` restricts it to the listed criterion ids.
pub fn accept(only: &[u8]) -> bool {
    let criteria = ipec_acceptance::criteria::all();
    let mut all_pass = true;
    for (i, criterion) in criteria.into_iter().enumerate() {
        let id = i as u8 + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let r = criterion();
        println!("{}", r.line());
        all_pass &= r.passed;
    }
    all_pass
}
