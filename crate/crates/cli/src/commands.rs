use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kernel_dpp::metrics::identities::{Budget, Suite, SIGMA_BAND};
use kernel_dpp::metrics::{
    derive_seed, fit_loglog_slope, mc_error_study, replicate_design, summarize, write_records, StudySpec, Summary,
};
use kernel_dpp::Model;

use crate::config::ExperimentConfig;
use crate::CliError;

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// File stems for each design block, disambiguated when labels repeat.
fn design_stems(cfg: &ExperimentConfig) -> Vec<String> {
    let designs = cfg.designs.get_ref();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for d in designs {
        *seen.entry(d.label()).or_default() += 1;
    }
    designs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            if seen[d.label()] > 1 {
                format!("{}-{}", d.label(), i + 1)
            } else {
                d.label().to_string()
            }
        })
        .collect()
}

fn build_model(cfg: &ExperimentConfig) -> Result<Model, CliError> {
    cfg.kernel.get_ref().build().map_err(|e| CliError::Config(format!("kernel: {e}")))
}

pub fn sample(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let model = build_model(cfg)?;
    let kernel_id = cfg.kernel.get_ref().id();
    for (design, stem) in cfg.designs.get_ref().iter().zip(design_stems(cfg)) {
        let (nodes_path, mut nodes) = create(out, &format!("designs_{kernel_id}_{stem}.csv"))?;
        let (log_path, mut log) = create(out, &format!("designs_{kernel_id}_{stem}_log.csv"))?;
        writeln!(nodes, "design,N,replicate,seed,node_index,x,y,z").map_err(io)?;
        writeln!(
            log,
            "design,N,replicate,seed,proposals,density_rejections,conditional_rejections,resamples,description"
        )
        .map_err(io)?;
        let mut density_rejections = 0;
        for &n in cfg.n_grid.get_ref() {
            for r in 0..*cfg.replicates.get_ref() {
                let seed = derive_seed(cfg.master_seed, n, r);
                let d = replicate_design(&model, design, n, seed)?;
                for (i, p) in d.nodes.iter().enumerate() {
                    let c = p.coordinates();
                    let coord = |k: usize| c.get(k).map(|v| format!("{v:.17e}")).unwrap_or_default();
                    writeln!(nodes, "{},{n},{r},{seed},{i},{},{},{}", design.label(), coord(0), coord(1), coord(2))
                        .map_err(io)?;
                }
                let a = d.attempts;
                density_rejections += a.density_rejections;
                writeln!(
                    log,
                    "{},{n},{r},{seed},{},{},{},{},\"{}\"",
                    design.label(),
                    a.proposals,
                    a.density_rejections,
                    a.conditional_rejections,
                    a.resamples,
                    d.tag.describe()
                )
                .map_err(io)?;
            }
        }
        nodes.flush().map_err(io)?;
        log.flush().map_err(io)?;
        println!(
            "{stem}: wrote {} and {} ({density_rejections} density rejections in total)",
            nodes_path.display(),
            log_path.display()
        );
    }
    Ok(())
}

fn write_summary(path: &Path, sums: &[Summary]) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
    writeln!(f, "# N mean stderr lower upper count").map_err(io)?;
    for s in sums {
        let band = SIGMA_BAND * s.stderr;
        writeln!(f, "{} {:.9e} {:.9e} {:.9e} {:.9e} {}", s.n, s.mean, s.stderr, s.mean - band, s.mean + band, s.count)
            .map_err(io)?;
    }
    f.flush().map_err(io)
}

pub fn study(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let model = build_model(cfg)?;
    let kernel_id = cfg.kernel.get_ref().id();
    let grid = cfg.n_grid.get_ref();
    let upper = grid[grid.len() / 2]..=grid[grid.len() - 1];
    let scheme = *cfg.scheme.get_ref();
    let mut budget_error = None;
    for (design, stem) in cfg.designs.get_ref().iter().zip(design_stems(cfg)) {
        for target in cfg.targets.get_ref() {
            let spec = StudySpec {
                model: &model,
                kernel_id: kernel_id.clone(),
                design: design.clone(),
                scheme,
                target: target.clone(),
                n_grid: grid.clone(),
                replicates: *cfg.replicates.get_ref(),
                master_seed: cfg.master_seed,
            };
            let outcome = mc_error_study(&spec)?;
            let base = format!("study_{kernel_id}_{stem}_{}_{}", scheme.label(), target.id());
            let (csv_path, csv) = create(out, &format!("{base}.csv"))?;
            write_records(csv, &outcome.records)?;
            println!("{stem} / {scheme} / {}: {}", target.id(), csv_path.display());
            for f in &outcome.failures {
                eprintln!("  failed N={} replicate={} seed={}: {}", f.n, f.replicate, f.seed, f.error);
            }
            let metrics: &[&str] = if matches!(scheme, kernel_dpp::approximants::Scheme::Oka) {
                &["l2_sq", "rkhs_sq"]
            } else {
                &["l2_sq"]
            };
            for metric in metrics {
                let sums = summarize(&outcome.records, metric);
                write_summary(&out.join(format!("{base}_{metric}.dat")), &sums)?;
                println!("  {metric}: N, mean, 3-sigma band");
                for s in &sums {
                    let band = SIGMA_BAND * s.stderr;
                    println!("    {:>5} {:.4e} [{:.4e}, {:.4e}]", s.n, s.mean, s.mean - band, s.mean + band);
                }
                match fit_loglog_slope(&sums, upper.clone()) {
                    Ok(slope) => println!("  {metric}: slope over N in [{}, {}] = {slope:.3}", upper.start(), upper.end()),
                    Err(e) => println!("  {metric}: slope unavailable: {e}"),
                }
            }
            if let Err(e) = outcome.check_budget() {
                eprintln!("  {e}");
                budget_error.get_or_insert(e);
            }
        }
    }
    match budget_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn verify(suite: &str, replicates: Option<usize>, seed: u64) -> Result<(), CliError> {
    let suite: Suite = suite.parse().map_err(|e: kernel_dpp::Error| CliError::Config(e.to_string()))?;
    let budget = Budget::new(replicates.unwrap_or(suite.default_replicates()), seed);
    let report = suite.run(&budget)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verification(suite.name().into()))
    }
}
