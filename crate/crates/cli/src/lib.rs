//! Experiment harness: seeded runs of the finite and limit laws, their
//! comparison, and a verify report of the numerical identities and
//! bounds the pipeline relies on.

pub mod config;
pub mod experiments;
pub mod output;
pub mod pinned;

use std::path::PathBuf;
use std::time::Instant;

use birkhoff_core::stats::Ecdf;
use birkhoff_core::Params;
use thiserror::Error;

pub use config::{Experiment, Format, PartialConfig, Rule, RunConfig};
use experiments::{compare_cell, nonincreasing, Check};
use output::{file_name, Cell, Meta, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] birkhoff_core::Error),

    #[error("check could not run: {0}")]
    Check(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    start: Instant,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn emit(&mut self, key: String, table: &Table) -> Result<(), CliError> {
        let cfg = self.cfg;
        let name = cfg.experiment.name();
        let path = file_name(&cfg.out, name, cfg.a, &key, cfg.seed, cfg.format);
        let meta = Meta { experiment: name, config: cfg, seed: cfg.seed, git_describe: output::GIT_DESCRIBE, key };
        self.files.push(output::write(&path, &meta, table, cfg.format, self.start.elapsed().as_secs_f64())?);
        Ok(())
    }
}

fn law_table(mut values: Vec<f64>) -> Table {
    values.sort_by(f64::total_cmp);
    let mut t = Table::new(vec!["value"]);
    for v in values {
        t.push(vec![v.into()]);
    }
    t
}

fn check_table(checks: &[Check]) -> Table {
    let mut t =
        Table::new(vec!["check", "a", "N", "eps", "value", "lo", "hi", "ci_low", "ci_high", "samples", "pass"]);
    for c in checks {
        t.push(vec![
            c.name.into(),
            c.a.into(),
            c.n.map_or(Cell::Empty, Cell::U),
            c.eps.into(),
            c.value.into(),
            c.lo.into(),
            c.hi.into(),
            c.ci_low.into(),
            c.ci_high.into(),
            c.samples.into(),
            c.pass.into(),
        ]);
    }
    t
}

/// Runs the configured experiment, writing one file per `N` or `eps`.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    let mut w = Writer { cfg, start: Instant::now(), files: Vec::new() };
    let rule = cfg.rule.into();
    let mut checks = Vec::new();
    match cfg.experiment {
        Experiment::FiniteLaw => {
            for &n in &cfg.n_list {
                let v = experiments::finite_samples(cfg.a, n, cfg.samples, cfg.seed)?;
                w.emit(n.to_string(), &law_table(v))?;
            }
        }
        Experiment::LimitLaw => {
            let laws = experiments::limit_samples(cfg.a, &cfg.eps, cfg.samples, cfg.seed, rule)?;
            for (&eps, v) in cfg.eps.iter().zip(laws) {
                w.emit(eps.to_string(), &law_table(v))?;
            }
        }
        Experiment::Compare => {
            let laws = experiments::limit_samples(cfg.a, &cfg.eps, cfg.samples, cfg.seed, rule)?
                .into_iter()
                .map(Ecdf::new)
                .collect::<Result<Vec<_>, _>>()?;
            let finite = cfg
                .n_list
                .iter()
                .map(|&n| Ecdf::new(experiments::finite_samples(cfg.a, n, cfg.samples, cfg.seed)?).map_err(CliError::from))
                .collect::<Result<Vec<_>, _>>()?;
            for (&eps, law) in cfg.eps.iter().zip(&laws) {
                let cells: Vec<_> = cfg.n_list.iter().zip(&finite).map(|(&n, f)| compare_cell(n, eps, f, law)).collect();
                let mut t = Table::new(vec!["N", "eps", "ks", "n_finite", "n_limit", "ks_crit95", "nonincreasing"]);
                for (c, mono) in cells.iter().zip(nonincreasing(&cells)) {
                    t.push(vec![
                        c.n.into(),
                        c.eps.into(),
                        c.ks.into(),
                        c.n_finite.into(),
                        c.n_limit.into(),
                        c.ks_crit95.into(),
                        mono.into(),
                    ]);
                }
                w.emit(eps.to_string(), &t)?;
            }
        }
        Experiment::Verify => {
            let shared = {
                let mut v = experiments::envelope_checks()?;
                let laws = experiments::limit_samples(cfg.a, &cfg.eps, cfg.samples, cfg.seed, rule)?;
                for (&eps, values) in cfg.eps.iter().zip(&laws) {
                    v.push(experiments::gamma_mean_check(cfg.a, eps, values, cfg.seed)?);
                }
                v
            };
            for &n in &cfg.n_list {
                let mut list = shared.clone();
                list.push(experiments::sampler_check(cfg.a, n, cfg.samples, cfg.seed)?);
                let mut gaps = Vec::new();
                for &eps in &cfg.eps {
                    let p = Params::new(cfg.a, n, eps)?;
                    list.push(experiments::reconstruction_check(&p, pinned::RECONSTRUCTION_POINTS, cfg.seed)?);
                    let [(bar, gb), (tilde, gt)] = experiments::l2_checks(&p, cfg.samples, cfg.seed)?;
                    list.extend([bar, tilde]);
                    gaps.push((eps, gb.estimate, gt.estimate));
                    list.push(experiments::exclusion_check(&p, cfg.samples, cfg.seed));
                    let points = cfg.samples.min(pinned::BOX_DIAMOND_POINTS);
                    list.push(experiments::box_diamond_check(&p, points, cfg.seed, rule)?);
                }
                let p = Params::new(cfg.a, n, cfg.eps[0])?;
                for w2 in gaps.windows(2) {
                    let ((e0, b0, t0), (e1, b1, t1)) = (w2[0], w2[1]);
                    list.push(experiments::halving_check("l2-bar-ratio", &p, e0, b0, e1, b1));
                    list.push(experiments::halving_check("l2-tilde-ratio", &p, e0, t0, e1, t1));
                }
                w.emit(n.to_string(), &check_table(&list))?;
                checks.extend(list);
            }
        }
    }
    Ok(RunReport { files: w.files, checks })
}
