//! Command-line front end.

pub mod config;
pub mod count;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::fixed::ratio_to_f64;
use crate::arith::rational::parse_rational;
use crate::arith::DEFAULT_SCALE_BITS;
use crate::counting::required_scale_bits;
use crate::error::{Error, Result};
use crate::gamma::{fit_witness, IrrationalShift, NonLiouvilleWitness, WitnessRange};
use crate::lattice::{gcd_power_sum, gcd_power_sum_below, primorial, LatticeVector};
use crate::psi::{hausdorff_exponent, hausdorff_probe_sum, ApproxFunction};
use crate::report::{decimal_string, ratio_string};
use crate::torus::{
    lemma3_bound_values, overlap_2d_grid_oracle, overlap_2d_values, overlap_exact_1d,
    overlap_sweep_oracle, Lemma3Outcome, TorusSet1D,
};
use crate::variance::{default_scale_bits, lemma3_sweep, variance_full, variance_window, Lemma3Status};

use config::{pick, require, ExperimentConfig, FileConfig};
use output::{metadata, CsvOut, JsonLines};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kglab", version, about = "Inhomogeneous Khintchine–Groshev laboratory")]
pub struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all hardware threads).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count solutions for random α and compare with the main term.
    Count(CountArgs),
    /// Exact overlap of two torus sets with an independent oracle.
    Overlap(OverlapArgs),
    /// Pairwise variance over the box or an order window.
    Variance(VarianceArgs),
    /// Gcd power sums.
    Gcdsum(GcdsumArgs),
    /// Continued fraction and non-Liouville witness of γ.
    Cf(CfArgs),
    /// Convergence exponent of the Hausdorff series.
    Hausdorff(HausdorffArgs),
    /// Sweep every parallel pair class against the vanishing threshold and bound.
    #[command(name = "lemma3-sweep")]
    Lemma3Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long = "scale-bits")]
    pub scale_bits: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "Q", value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "delta-log")]
    pub delta_log: Option<String>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// `csv` or `jsonl`.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[command(flatten)]
    pub common: Common,
    /// One-dimensional set `d,shift,t`.
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    /// Frequency vector `(q1,q2)`.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Grid oracle resolution for non-parallel pairs.
    #[arg(long, default_value_t = 400)]
    pub resolution: u64,
    #[command(flatten)]
    pub witness: WitnessArgs,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// Witness exponent; fitted when omitted.
    #[arg(long)]
    pub eta: Option<u32>,
    /// Witness constant.
    #[arg(long)]
    pub c: Option<String>,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "Q", value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
    /// Order window `u,v` (inclusive positions).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub window: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct GcdsumArgs {
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
    /// Use the first N primorials as `q`.
    #[arg(long)]
    pub primorials: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Restrict to `gcd < q^cap`.
    #[arg(long)]
    pub cap: Option<String>,
    /// Report `∑_{r<q} gcd(q,r)^k` instead.
    #[arg(long)]
    pub below: bool,
}

#[derive(Debug, Args)]
pub struct CfArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 20)]
    pub terms: usize,
    /// Fit a witness up to this `q` (needs `--psi`).
    #[arg(long = "witness-q")]
    pub witness_q: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HausdorffArgs {
    #[command(flatten)]
    pub common: Common,
    /// Partial-sum probes at `t ± 0.1` up to this `n`.
    #[arg(long = "probe-n")]
    pub probe_n: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "Q")]
    pub q: Option<u64>,
    #[command(flatten)]
    pub witness: WitnessArgs,
}

/// Maps a library error onto the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::InvalidArgument(_) | Error::RationalShift(_) => EXIT_CONFIG,
        Error::PrecisionRange(_) => EXIT_PRECISION,
        Error::Io(_) => EXIT_FAILURE,
    }
}

/// Parses `argv` and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kglab: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let workers = pick(cli.workers, file.workers);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidArgument("workers must be ≥ 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    let out = pick(cli.out.clone(), file.output.clone());
    pool.install(|| dispatch(&cli.command, &file, out.as_deref()))
}

fn dispatch(cmd: &Command, file: &FileConfig, out: Option<&Path>) -> Result<i32> {
    match cmd {
        Command::Count(a) => cmd_count(a, file, out),
        Command::Overlap(a) => cmd_overlap(a, file, out),
        Command::Variance(a) => cmd_variance(a, file, out),
        Command::Gcdsum(a) => cmd_gcdsum(a, out),
        Command::Cf(a) => cmd_cf(a, file, out),
        Command::Hausdorff(a) => cmd_hausdorff(a, file, out),
        Command::Lemma3Sweep(a) => cmd_lemma3_sweep(a, file, out),
    }
}

fn gamma_of(c: &Common, file: &FileConfig) -> Result<IrrationalShift> {
    IrrationalShift::parse(&pick(c.gamma.clone(), file.gamma.clone()).unwrap_or_else(|| "sqrt:2".into()))
}

fn psi_of(c: &Common, file: &FileConfig) -> Result<ApproxFunction> {
    ApproxFunction::parse(&require(pick(c.psi.clone(), file.psi.clone()), "psi")?)
}

fn scale_of(c: &Common, file: &FileConfig, q_max: u64, floor: u32) -> u32 {
    pick(c.scale_bits, file.scale_bits).unwrap_or_else(|| required_scale_bits(q_max).max(floor))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn resolve_count(a: &CountArgs, file: &FileConfig, out: Option<&Path>) -> Result<ExperimentConfig> {
    let q = require(pick(a.q.clone(), file.q_list()), "Q")?;
    if q.is_empty() || q.contains(&0) {
        return Err(Error::InvalidArgument("Q values must be ≥ 1".into()));
    }
    let q_max = *q.iter().max().unwrap();
    let cfg = ExperimentConfig {
        gamma: pick(a.common.gamma.clone(), file.gamma.clone()).unwrap_or_else(|| "sqrt:2".into()),
        psi: require(pick(a.common.psi.clone(), file.psi.clone()), "psi")?,
        q,
        trials: pick(a.trials, file.trials).unwrap_or(1),
        seed: pick(a.seed, file.seed).unwrap_or(0),
        delta_log: pick(a.delta_log.clone(), file.delta_log.clone()).unwrap_or_else(|| "1/2".into()),
        scale_bits: scale_of(&a.common, file, q_max, DEFAULT_SCALE_BITS),
        output: out.map(|p| p.display().to_string()),
    };
    // validate the specs before any work
    IrrationalShift::parse(&cfg.gamma)?;
    ApproxFunction::parse(&cfg.psi)?;
    parse_rational(&cfg.delta_log)?;
    Ok(cfg)
}

fn cmd_count(a: &CountArgs, file: &FileConfig, out: Option<&Path>) -> Result<i32> {
    let cfg = resolve_count(a, file, out)?;
    let checkpoint = pick(a.checkpoint.clone(), file.checkpoint.clone());
    let run = count::run_count(&cfg, checkpoint.as_deref())?;
    let hash = cfg.hash();
    let meta = metadata("count", to_value(&cfg), Some(&hash), Some(cfg.scale_bits));
    match a.format.as_str() {
        "csv" => {
            let mut w = CsvOut::new(output::open(out)?, &meta, &count::CSV_HEADER)?;
            for r in &run.reports {
                w.row(count::csv_row(r))?;
            }
            w.finish()?;
        }
        "jsonl" => {
            let mut w = JsonLines::new(output::open(out)?, &meta)?;
            for r in &run.reports {
                w.record(r)?;
            }
            w.finish()?;
        }
        other => return Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
    }
    Ok(EXIT_OK)
}

fn parse_set(spec: &str) -> Result<TorusSet1D> {
    let parts: Vec<&str> = spec.split(',').collect();
    let [d, s, t] = parts[..] else {
        return Err(Error::Parse(format!("expected d,shift,t, got {spec:?}")));
    };
    let d = d
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad frequency {d:?}")))?;
    TorusSet1D::new(d, parse_rational(s)?, parse_rational(t)?)
}

fn witness_of(
    w: &WitnessArgs,
    gamma: &IrrationalShift,
    psi: &ApproxFunction,
    q_max: u64,
) -> Result<Option<NonLiouvilleWitness>> {
    match (w.eta, &w.c) {
        (Some(eta), Some(c)) => {
            let (big_c, eps) = psi.power_law_envelope().ok_or_else(|| {
                Error::InvalidArgument("ψ has no power-law envelope for the witness".into())
            })?;
            NonLiouvilleWitness::new(eta, parse_rational(c)?, big_c, eps, WitnessRange::UpTo(q_max)).map(Some)
        }
        (None, None) => Ok(fit_witness(gamma, psi, q_max.max(2))?
            .witness()
            .filter(|w| w.psi_bound.is_some())
            .cloned()),
        _ => Err(Error::InvalidArgument("give both --eta and --c, or neither".into())),
    }
}

fn cmd_overlap(a: &OverlapArgs, file: &FileConfig, out: Option<&Path>) -> Result<i32> {
    let mut code = EXIT_OK;
    let record = match (&a.a, &a.b, &a.q, &a.r) {
        (Some(sa), Some(sb), None, None) => {
            let (x, y) = (parse_set(sa)?, parse_set(sb)?);
            let exact = overlap_exact_1d(&x, &y);
            let oracle = overlap_sweep_oracle(&x, &y);
            let status = if exact == oracle { "agree" } else { "MISMATCH" };
            if exact != oracle {
                code = EXIT_VIOLATION;
            }
            json!({
                "mode": "1d",
                "a": sa, "b": sb,
                "exact": ratio_string(&exact),
                "oracle": ratio_string(&oracle),
                "bound": null,
                "status": status,
            })
        }
        (None, None, Some(sq), Some(sr)) => {
            let q: LatticeVector = sq.parse()?;
            let r: LatticeVector = sr.parse()?;
            let gamma = gamma_of(&a.common, file)?;
            let psi = psi_of(&a.common, file)?;
            let q_max = q.norm().max(r.norm());
            let scale = scale_of(&a.common, file, q_max, DEFAULT_SCALE_BITS);
            let g = gamma.frac(scale)?.to_ratio();
            let (pq, pr) = (psi.eval(q.norm())?, psi.eval(r.norm())?);
            let exact = overlap_2d_values(&q, &r, &pq, &pr, &g)?;
            let (oracle, agree) = if q.is_parallel(&r) {
                let set = |v: &LatticeVector, t: &num_rational::BigRational| {
                    let (_, k) = v.direction();
                    let s = if k < 0 { -&g } else { g.clone() };
                    TorusSet1D::new(k.unsigned_abs(), s, t.clone())
                };
                let o = overlap_sweep_oracle(&set(&q, &pq)?, &set(&r, &pr)?);
                let agree = o == exact.value;
                (json!({ "kind": "sweep", "value": ratio_string(&o) }), agree)
            } else {
                let grid = overlap_2d_grid_oracle(&q, &r, &psi, &gamma, a.resolution)?;
                let agree = grid.contains(&exact.value);
                (to_value(&grid), agree)
            };
            let (big, small, p_big, p_small) = if r.norm() < q.norm() {
                (&q, &r, &pq, &pr)
            } else {
                (&r, &q, &pr, &pq)
            };
            let mut status = if agree { "agree".to_string() } else { "MISMATCH".to_string() };
            let mut bound = Value::Null;
            if q.is_parallel(&r) && small.norm() < big.norm() {
                if let Some(w) = witness_of(&a.witness, &gamma, &psi, q_max)? {
                    let outcome = lemma3_bound_values(big, small, p_big, p_small, &w)?;
                    let st = match &outcome {
                        Lemma3Outcome::ProvablyZero { .. } if exact.value.is_zero() => Lemma3Status::ZeroConfirmed,
                        Lemma3Outcome::BoundValue { bound, .. } if exact.value <= *bound => {
                            Lemma3Status::BoundSatisfied
                        }
                        _ => Lemma3Status::Violation,
                    };
                    status = st.to_string();
                    bound = to_value(&outcome);
                }
            }
            if !agree || status == "VIOLATION" {
                code = EXIT_VIOLATION;
            }
            json!({
                "mode": "2d",
                "q": q.to_string(), "r": r.to_string(),
                "gamma": gamma.id(), "psi": psi.to_string(), "scale_bits": scale,
                "exact": ratio_string(&exact.value),
                "exact_decimal": decimal_string(&exact.value),
                "tag": exact.tag,
                "oracle": oracle,
                "bound": bound,
                "status": status,
            })
        }
        _ => {
            return Err(Error::InvalidArgument(
                "overlap needs either --a and --b, or --q and --r".into(),
            ))
        }
    };
    let config = json!({
        "a": a.a, "b": a.b, "q": a.q, "r": a.r,
        "gamma": record.get("gamma"), "psi": record.get("psi"),
        "resolution": a.resolution, "eta": a.witness.eta, "c": a.witness.c,
    });
    let meta = metadata("overlap", config, None, record.get("scale_bits").and_then(Value::as_u64).map(|s| s as u32));
    let mut w = JsonLines::new(output::open(out)?, &meta)?;
    w.record(&record)?;
    w.finish()?;
    Ok(code)
}

fn cmd_variance(a: &VarianceArgs, file: &FileConfig, out: Option<&Path>) -> Result<i32> {
    let gamma = gamma_of(&a.common, file)?;
    let psi = psi_of(&a.common, file)?;
    let mut reports = Vec::new();
    let config;
    if let Some(win) = &a.window {
        let [u, v] = win[..] else {
            return Err(Error::Parse("expected --window u,v".into()));
        };
        let top = crate::lattice::TotalOrder::nth(v.max(u)).norm();
        let scale = scale_of(&a.common, file, top, default_scale_bits(top));
        config = json!({ "gamma": gamma.id(), "psi": psi.to_string(), "window": [u, v], "scale_bits": scale });
        reports.push(variance_window(u, v, &psi, &gamma, scale)?);
    } else {
        let qs = require(pick(a.q.clone(), file.q_list()), "Q")?;
        let q_top = qs.iter().copied().max().unwrap_or(1);
        let scale = scale_of(&a.common, file, q_top, default_scale_bits(q_top));
        config = json!({ "gamma": gamma.id(), "psi": psi.to_string(), "Q": qs, "scale_bits": scale });
        for q in qs {
            reports.push(variance_full(q, &psi, &gamma, scale)?);
        }
    }
    let meta = metadata("variance", config, None, reports.first().map(|r| r.scale_bits));
    let mut w = JsonLines::new(output::open(out)?, &meta)?;
    for r in &reports {
        let mut v = to_value(r);
        v["ratio_f64"] = json!(r.ratio_f64());
        w.record(&v)?;
    }
    w.finish()?;
    Ok(EXIT_OK)
}

fn cmd_gcdsum(a: &GcdsumArgs, out: Option<&Path>) -> Result<i32> {
    let qs: Vec<u64> = match (&a.q, a.primorials) {
        (Some(q), None) => q.clone(),
        (None, Some(n)) => {
            if n == 0 || n > 15 {
                return Err(Error::InvalidArgument("primorials must be in 1..=15".into()));
            }
            (1..=n).map(primorial).collect()
        }
        _ => return Err(Error::InvalidArgument("give exactly one of --q, --primorials".into())),
    };
    let cap = a.cap.as_deref().map(parse_rational).transpose()?;
    let config = json!({ "q": qs, "k": a.k, "cap": a.cap, "below": a.below });
    let meta = metadata("gcdsum", config, None, None);
    let mut w = JsonLines::new(output::open(out)?, &meta)?;
    for q in qs {
        if a.below {
            let sum = gcd_power_sum_below(q, a.k)?;
            let qk = num_traits::pow(BigInt::from(q), a.k as usize);
            let ratio = num_rational::BigRational::new(sum.clone(), qk);
            w.record(&json!({
                "q": q, "k": a.k,
                "sum_below": sum.to_string(),
                "normalized": ratio_string(&ratio),
                "normalized_f64": ratio_to_f64(&ratio),
            }))?;
        } else {
            let s = gcd_power_sum(q, a.k, cap.as_ref())?;
            let mut v = to_value(&s);
            v["normalized_f64"] = json!(ratio_to_f64(&s.normalized));
            w.record(&v)?;
        }
    }
    w.finish()?;
    Ok(EXIT_OK)
}

fn cmd_cf(a: &CfArgs, file: &FileConfig, out: Option<&Path>) -> Result<i32> {
    let gamma = gamma_of(&a.common, file)?;
    let cf = gamma.expansion(a.terms)?;
    let convergents: Vec<[String; 2]> = cf
        .convergents()
        .take(a.terms)
        .map(|(p, q)| [p.to_string(), q.to_string()])
        .collect();
    let fit = match a.witness_q {
        Some(q) => {
            let psi = psi_of(&a.common, file)?;
            to_value(&fit_witness(&gamma, &psi, q)?)
        }
        None => Value::Null,
    };
    let record = json!({
        "gamma": gamma.id(),
        "expansion": cf.to_string(),
        "quotients": cf.take(a.terms).iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "period": cf.period().map(|p| json!({ "start": p.start, "len": p.len })),
        "convergents": convergents,
        "witness": fit,
    });
    let meta = metadata("cf", json!({ "gamma": gamma.id(), "terms": a.terms, "witness_q": a.witness_q }), None, None);
    let mut w = JsonLines::new(output::open(out)?, &meta)?;
    w.record(&record)?;
    w.finish()?;
    Ok(EXIT_OK)
}

fn cmd_hausdorff(a: &HausdorffArgs, file: &FileConfig, out: Option<&Path>) -> Result<i32> {
    let psi = psi_of(&a.common, file)?;
    let h = hausdorff_exponent(&psi)?;
    let mut record = to_value(&h);
    record["psi"] = json!(psi.to_string());
    record["t_f64"] = json!(ratio_to_f64(&h.t));
    if let Some(n) = a.probe_n {
        let t = ratio_to_f64(&h.t);
        record["probes"] = json!([
            { "s": t - 0.1, "n_max": n, "sum": hausdorff_probe_sum(&psi, t - 0.1, n) },
            { "s": t + 0.1, "n_max": n, "sum": hausdorff_probe_sum(&psi, t + 0.1, n) },
        ]);
    }
    let meta = metadata("hausdorff", json!({ "psi": psi.to_string(), "probe_n": a.probe_n }), None, None);
    let mut w = JsonLines::new(output::open(out)?, &meta)?;
    w.record(&record)?;
    w.finish()?;
    Ok(EXIT_OK)
}

pub const LEMMA3_HEADER: [&str; 8] = ["d", "e", "r", "q", "threshold", "overlap", "bound", "status"];

fn cmd_lemma3_sweep(a: &SweepArgs, file: &FileConfig, out: Option<&Path>) -> Result<i32> {
    let gamma = gamma_of(&a.common, file)?;
    let psi = psi_of(&a.common, file)?;
    let q_max = require(pick(a.q, file.q_list().and_then(|v| v.into_iter().max())), "Q")?;
    let scale = scale_of(&a.common, file, q_max, default_scale_bits(q_max));
    let w = witness_of(&a.witness, &gamma, &psi, q_max)?.ok_or_else(|| {
        Error::InvalidArgument(format!("no non-Liouville witness found for {} up to {q_max}", gamma.id()))
    })?;
    let sweep = lemma3_sweep(q_max, &psi, &w, &gamma, scale)?;
    let config = json!({
        "gamma": gamma.id(), "psi": psi.to_string(), "Q": q_max, "scale_bits": scale,
        "witness": { "eta": w.eta, "c": ratio_string(&w.c) },
    });
    let meta = metadata("lemma3-sweep", config, None, Some(scale));
    let mut csv = CsvOut::new(output::open(out)?, &meta, &LEMMA3_HEADER)?;
    for r in &sweep.rows {
        csv.row([
            r.d.to_string(),
            r.e.to_string(),
            r.r.to_string(),
            r.q.to_string(),
            r.threshold.to_string(),
            decimal_string(&r.overlap),
            r.bound.as_ref().map(decimal_string).unwrap_or_default(),
            r.status.to_string(),
        ])?;
    }
    csv.finish()?;
    eprintln!("{}", serde_json::to_string(&sweep.summary)?);
    Ok(if sweep.summary.violations > 0 { EXIT_VIOLATION } else { EXIT_OK })
}
