use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::rational::parse_rational;
use crate::arith::{sample_torus_point, FixedPoint, RngStream};
use crate::counting::{count_shells, required_scale_bits, CountReport, MainTerms};
use crate::error::{Error, Result};
use crate::gamma::IrrationalShift;
use crate::psi::ApproxFunction;
use crate::report::decimal_string;

use super::config::ExperimentConfig;

/// Shells per checkpoint.
const CHUNK: u64 = 64;

pub const CSV_HEADER: [&str; 9] = [
    "seed", "Q", "N", "psi_exact", "psi_paper", "chi", "err_norm", "gamma_id", "psi_id",
];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
struct Checkpoint {
    config_hash: String,
    /// `N` at each requested `Q`, per finished trial.
    completed: Vec<Vec<u64>>,
    /// Next shell of the trial in progress.
    next_shell: u64,
    running: u64,
    partial: Vec<u64>,
}

struct Store {
    path: Option<PathBuf>,
    state: Checkpoint,
}

impl Store {
    fn open(path: Option<&Path>, hash: &str) -> Result<Self> {
        let fresh = Checkpoint {
            config_hash: hash.to_string(),
            next_shell: 1,
            ..Default::default()
        };
        let state = match path {
            Some(p) if p.exists() => {
                let text = std::fs::read_to_string(p)?;
                match serde_json::from_str::<Checkpoint>(&text) {
                    Ok(c) if c.config_hash == hash => {
                        log::info!(
                            "resuming from {}: {} trials done, next shell {}",
                            p.display(),
                            c.completed.len(),
                            c.next_shell
                        );
                        c
                    }
                    _ => {
                        log::warn!("ignoring checkpoint {} (different config)", p.display());
                        fresh
                    }
                }
            }
            _ => fresh,
        };
        Ok(Store {
            path: path.map(Path::to_path_buf),
            state,
        })
    }

    fn save(&self) -> Result<()> {
        if let Some(p) = &self.path {
            let tmp = p.with_extension("tmp");
            std::fs::write(&tmp, serde_json::to_vec(&self.state)?)?;
            std::fs::rename(&tmp, p)?;
        }
        Ok(())
    }

    fn clear(&self) -> Result<()> {
        if let Some(p) = &self.path {
            if p.exists() {
                std::fs::remove_file(p)?;
            }
        }
        Ok(())
    }
}

pub struct CountRun {
    pub reports: Vec<CountReport>,
}

fn trial_alpha(seed: u64, trial: u64, scale: u32) -> Result<(FixedPoint, FixedPoint)> {
    sample_torus_point(&mut RngStream::for_trial(seed, trial), scale)
}

/// Runs every trial, resuming from `checkpoint` when it matches the config.
pub fn run_count(cfg: &ExperimentConfig, checkpoint: Option<&Path>) -> Result<CountRun> {
    let gamma = IrrationalShift::parse(&cfg.gamma)?;
    let psi = ApproxFunction::parse(&cfg.psi)?;
    let delta: BigRational = parse_rational(&cfg.delta_log)?;
    let mut qs = cfg.q.clone();
    qs.sort_unstable();
    qs.dedup();
    if qs.is_empty() || qs[0] == 0 {
        return Err(Error::InvalidArgument("Q values must be ≥ 1".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be ≥ 1".into()));
    }
    let q_top = *qs.last().unwrap();
    let need = required_scale_bits(q_top);
    if cfg.scale_bits < need {
        return Err(Error::PrecisionRange(format!(
            "Q = {q_top} needs scale_bits ≥ {need}, got {}",
            cfg.scale_bits
        )));
    }
    let mains: Vec<MainTerms> = qs
        .iter()
        .map(|&q| MainTerms::compute(&psi, q))
        .collect::<Result<_>>()?;
    let hash = cfg.hash();
    let mut store = Store::open(checkpoint, &hash)?;
    while (store.state.completed.len() as u64) < cfg.trials {
        let trial = store.state.completed.len() as u64;
        let alpha = trial_alpha(cfg.seed, trial, cfg.scale_bits)?;
        while store.state.next_shell <= q_top {
            let first = store.state.next_shell;
            let next_q = qs[store.state.partial.len()];
            let last = (first + CHUNK - 1).min(next_q);
            let shells = count_shells(&alpha, first, last, &gamma, &psi)?;
            store.state.running += shells.iter().sum::<u64>();
            store.state.next_shell = last + 1;
            if last == next_q {
                store.state.partial.push(store.state.running);
            }
            store.save()?;
        }
        let done = std::mem::take(&mut store.state.partial);
        store.state.completed.push(done);
        store.state.next_shell = 1;
        store.state.running = 0;
        store.save()?;
    }
    let mut reports = Vec::new();
    for (trial, ns) in store.state.completed.iter().enumerate() {
        let trial = trial as u64;
        let alpha = trial_alpha(cfg.seed, trial, cfg.scale_bits)?;
        for (m, &n) in mains.iter().zip(ns) {
            reports.push(m.report(cfg.seed + trial, trial, n, &delta, &gamma, &psi, &alpha));
        }
    }
    store.clear()?;
    Ok(CountRun { reports })
}

pub fn csv_row(r: &CountReport) -> [String; 9] {
    [
        r.seed.to_string(),
        r.q_max.to_string(),
        r.n.to_string(),
        decimal_string(&r.psi_exact),
        decimal_string(&r.psi_paper),
        decimal_string(&r.chi),
        r.err_norm.map(|e| format!("{e:.12e}")).unwrap_or_default(),
        r.gamma_id.clone(),
        r.psi_id.clone(),
    ]
}
