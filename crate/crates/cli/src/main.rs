//! `betatherm`: command-line front end for β-shift thermodynamic formalism.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use betatherm_core::beta::{greedy_expansion, quasi_greedy_of_one};
use betatherm_core::involution::{check_duality, check_marginals, involution_kernel, random_bilateral_pairs};
use betatherm_core::oracle::max_orbit_mean;
use betatherm_core::zerotemp::{self, TemperatureGrid};
use betatherm_core::{
    parse_config, BetaSpec, BilateralPair, Error, JobConfig, Pipeline, Result, Side, Word,
};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::output::Output;

#[derive(Parser, Debug)]
#[command(name = "betatherm", version, about = "Transfer operators and zero-temperature limits on β-shifts")]
struct Cli {
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Cylinder depth, overriding the config.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Power-iteration tolerance, overriding the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for sampled checks, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct BetaSource {
    /// Base as a number.
    #[arg(long)]
    beta: Option<f64>,
    /// Quasi-greedy expansion of 1, as `pre(period)`.
    #[arg(long)]
    digits: Option<String>,
    /// Take β from a job file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct JobArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// `lo:hi:geometric`, `lo:hi:linear:n` or a comma list.
    #[arg(long)]
    t_grid: Option<String>,
    /// Same as `--out`.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Longest cycle searched by the orbit oracle.
    #[arg(long)]
    max_period: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy or quasi-greedy digits.
    Expand {
        #[command(flatten)]
        src: BetaSource,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, conflicts_with = "quasi")]
        greedy: bool,
        /// Quasi-greedy expansion of 1.
        #[arg(long)]
        quasi: bool,
        #[arg(long, default_value_t = 64)]
        max_digits: usize,
    },
    /// Parry admissibility of a finite word.
    Admissible {
        #[command(flatten)]
        src: BetaSource,
        #[arg(long)]
        word: String,
        #[arg(long)]
        transpose: bool,
        #[arg(long, default_value_t = 64)]
        max_digits: usize,
    },
    /// Admissible words of length n.
    Language {
        #[command(flatten)]
        src: BetaSource,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        transpose: bool,
        #[arg(long, default_value_t = 64)]
        max_digits: usize,
    },
    /// Perron eigendata of the transfer operator at one temperature.
    Spectrum {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Involution kernel, duality and coupling checks.
    Involution {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// `random:<count>` or `file:<path>` with one `y|x` pair per line.
        #[arg(long, default_value = "random:100")]
        pairs: String,
    },
    /// Sweep t and extract m, V, V^⊺ and γ.
    Zerotemp {
        #[command(flatten)]
        job: JobArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Decay rate of one cylinder against the rate function.
    Ldp {
        #[command(flatten)]
        job: JobArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        cylinder: String,
    },
    /// Maximal periodic-orbit mean.
    Oracle {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        max_period: Option<usize>,
    },
}

fn read_config(path: &PathBuf, cli: &Cli) -> Result<JobConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(k) = cli.depth {
        if k < cfg.potential.depth {
            return Err(Error::DepthMismatch {
                depth: k,
                potential_depth: cfg.potential.depth,
            });
        }
        cfg.depth = k;
    }
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn spec_from(src: &BetaSource, max_digits: usize, cli: &Cli) -> Result<BetaSpec> {
    match (&src.beta, &src.digits, &src.config) {
        (Some(b), _, _) => BetaSpec::from_value(*b, max_digits),
        (_, Some(d), _) => BetaSpec::from_digits_str(d),
        (_, _, Some(p)) => read_config(p, cli)?.spec(),
        _ => unreachable!("clap enforces one source"),
    }
}

fn output_for(cli: &Cli, cfg: Option<&JobConfig>, csv: Option<&PathBuf>) -> Output {
    let dir = csv
        .cloned()
        .or_else(|| cli.out.clone())
        .or_else(|| cfg.and_then(|c| c.output.clone()));
    Output::new(cli.json, dir)
}

fn grid_for(cfg: &JobConfig, sweep: &SweepArgs) -> Result<TemperatureGrid> {
    match &sweep.t_grid {
        Some(s) => s.parse(),
        None => Ok(cfg.t_grid.clone()),
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Expand {
            src,
            alpha,
            n,
            greedy: _,
            quasi,
            max_digits,
        } => {
            let out = output_for(cli, None, None);
            let spec = spec_from(src, *max_digits, cli)?;
            let v = if *quasi {
                let digits = match &src.digits {
                    Some(_) => spec.xbeta().to_string(),
                    None => quasi_greedy_of_one(spec.beta(), *n)?.to_string(),
                };
                json!({ "beta": spec.beta(), "mode": "quasi", "digits": digits })
            } else {
                let w = greedy_expansion(*alpha, spec.beta(), *n)?;
                json!({ "beta": spec.beta(), "alpha": alpha, "mode": "greedy", "digits": w.to_string() })
            };
            out.emit(&v)?;
        }
        Command::Admissible {
            src,
            word,
            transpose,
            max_digits,
        } => {
            let out = output_for(cli, None, None);
            let spec = spec_from(src, *max_digits, cli)?;
            let w: Word = word.parse()?;
            let side = if *transpose { Side::Transpose } else { Side::Forward };
            let ok = spec.is_admissible(w.digits(), side)?;
            out.emit(&json!({ "word": w.to_string(), "side": side, "admissible": ok }))?;
        }
        Command::Language {
            src,
            n,
            count_only,
            transpose,
            max_digits,
        } => {
            let out = output_for(cli, None, None);
            let spec = spec_from(src, *max_digits, cli)?;
            let side = if *transpose { Side::Transpose } else { Side::Forward };
            let words = spec.enumerate_language(*n, side)?;
            let mut v = json!({ "n": n, "side": side, "count": words.len() });
            if !count_only {
                v["words"] = json!(words.iter().map(|w| w.to_string()).collect::<Vec<_>>());
            }
            out.emit(&v)?;
        }
        Command::Spectrum { job, t } => {
            let cfg = read_config(&job.config, cli)?;
            let out = output_for(cli, Some(&cfg), None);
            let (spec, a) = cfg.build()?;
            let op = betatherm_core::TransferOperator::new(&a, &spec, cfg.depth)?;
            let st = op.power_iteration(*t, cfg.power_options())?;
            if out.has_dir() {
                let words = st.language.words();
                for (name, vals) in [("psi", st.psi().values), ("rho", st.rho().masses), ("gibbs", st.gibbs().masses)] {
                    out.csv(
                        &format!("{name}.csv"),
                        &["word", name],
                        words.iter().zip(&vals).map(|(w, v)| vec![w.to_string(), v.to_string()]),
                    )?;
                }
            }
            let v = json!({
                "t": t,
                "depth": cfg.depth,
                "lambda": st.lambda,
                "log_lambda": st.log_lambda,
                "residual": st.residual,
                "iterations": st.iterations,
            });
            out.write_json("spectrum.json", &v)?;
            out.emit(&v)?;
        }
        Command::Involution { job, t, pairs } => {
            let cfg = read_config(&job.config, cli)?;
            let out = output_for(cli, Some(&cfg), None);
            let (spec, a) = cfg.build()?;
            let pl = Pipeline::new(&spec, &a, cfg.depth)?;
            let sample = sample_pairs(pairs, &spec, cfg.seed)?;
            let ks = pl.kernel_spec();
            let mut worst: f64 = 0.0;
            let mut kernel_rows = Vec::with_capacity(sample.len());
            for p in &sample {
                worst = worst.max(check_duality(&a, pl.transpose_potential(), &p.past, &p.future, ks, &spec)?);
                let w = involution_kernel(&a, &p.past, &p.future, ks, &spec)?;
                kernel_rows.push(vec![p.past.to_string(), p.future.to_string(), w.to_string()]);
            }
            let st = pl.state(*t, cfg.power_options())?;
            let coupling = pl.coupling(&st);
            let (past_defect, future_defect) =
                check_marginals(&coupling, &st.transpose.gibbs(), &st.forward.gibbs());
            out.csv("kernel.csv", &["past", "future", "W"], kernel_rows.into_iter())?;
            let at: serde_json::Map<String, Value> = pl
                .transpose_potential()
                .table()
                .into_iter()
                .map(|(w, v)| (w.to_string(), json!(v)))
                .collect();
            let v = json!({
                "t": t,
                "depth": cfg.depth,
                "c_A": st.log_c,
                "duality_max_residual": worst,
                "pairs_checked": sample.len(),
                "marginal_defects": { "past": past_defect, "future": future_defect },
                "transpose_potential": at,
            });
            out.write_json("involution.json", &v)?;
            out.emit(&v)?;
        }
        Command::Zerotemp { job, sweep } => {
            let cfg = read_config(&job.config, cli)?;
            let out = output_for(cli, Some(&cfg), sweep.csv.as_ref());
            let (spec, a) = cfg.build()?;
            let grid = grid_for(&cfg, sweep)?;
            let oracle = max_orbit_mean(&a, sweep.max_period.unwrap_or(cfg.max_period), &spec)?;
            let pl = Arc::new(Pipeline::new(&spec, &a, cfg.depth)?);
            let report = zerotemp::run(pl, &grid, &cfg.zero_temp_options(), Some(&oracle))?;
            out.csv(
                "zerotemp.csv",
                &["t", "lambda", "log_lambda_over_t", "c_over_t"],
                report.rows.iter().map(|r| {
                    vec![
                        r.t.to_string(),
                        r.lambda.to_string(),
                        r.log_lambda_over_t.to_string(),
                        r.c_over_t.to_string(),
                    ]
                }),
            )?;
            let lang = report.v.language.clone();
            out.csv(
                "subactions.csv",
                &["word", "V"],
                lang.words()
                    .iter()
                    .zip(&report.v.values)
                    .map(|(w, v)| vec![w.to_string(), v.to_string()]),
            )?;
            let v = serde_json::to_value(report.summary()).expect("summary serializes");
            out.write_json("zerotemp.json", &v)?;
            out.emit(&v)?;
        }
        Command::Ldp { job, sweep, cylinder } => {
            let mut cfg = read_config(&job.config, cli)?;
            let out = output_for(cli, Some(&cfg), sweep.csv.as_ref());
            let w: Word = cylinder.parse()?;
            cfg.depth = cfg.depth.max(w.len());
            let (spec, a) = cfg.build()?;
            let grid = grid_for(&cfg, sweep)?;
            let oracle = max_orbit_mean(&a, sweep.max_period.unwrap_or(cfg.max_period), &spec)?;
            let pl = Arc::new(Pipeline::new(&spec, &a, cfg.depth)?);
            let report = zerotemp::run(pl, &grid, &cfg.zero_temp_options(), Some(&oracle))?;
            let res = report.ldp_cylinder_limit(&w, &oracle)?;
            out.csv(
                &format!("ldp_{}.csv", w.to_string().replace(',', "-")),
                &["t", "value"],
                res.series.iter().map(|(t, v)| vec![t.to_string(), v.to_string()]),
            )?;
            let v = json!({
                "cylinder": w.to_string(),
                "empirical_limit": res.empirical_limit,
                "fit_residual": res.fit_residual,
                "sup_I": res.sup_i,
                "gap": res.gap,
                "witness_point": res.witness.as_ref().map(|x| x.to_string()),
                "unique": res.unique,
                "candidates": res.candidates,
                "m": report.m.m,
            });
            out.write_json(&format!("ldp_{}.json", w.to_string().replace(',', "-")), &v)?;
            out.emit(&v)?;
            if !res.unique {
                let e = Error::NonUniqueMaximizer(format!(
                    "{} maximizing cycles tie",
                    oracle.argmax.len()
                ));
                eprintln!("warning: {e}");
                return Ok(e.exit_code() as u8);
            }
        }
        Command::Oracle { job, max_period } => {
            let cfg = read_config(&job.config, cli)?;
            let out = output_for(cli, Some(&cfg), None);
            let (spec, a) = cfg.build()?;
            let p = max_period.unwrap_or(cfg.max_period);
            let r = max_orbit_mean(&a, p, &spec)?;
            let v = json!({
                "m": r.m,
                "argmax_cycles": r.argmax.iter().map(|o| o.word.to_string()).collect::<Vec<_>>(),
                "unique": r.unique,
                "max_period": p,
                "cycles_examined": r.cycles_examined,
            });
            out.write_json("oracle.json", &v)?;
            out.emit(&v)?;
        }
    }
    Ok(0)
}

fn sample_pairs(source: &str, spec: &BetaSpec, seed: u64) -> Result<Vec<BilateralPair>> {
    if let Some(n) = source.strip_prefix("random:") {
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad pair count {n:?}")))?;
        return random_bilateral_pairs(spec, n, 4, seed);
    }
    if let Some(path) = source.strip_prefix("file:") {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        return text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let (y, x) = l
                    .split_once('|')
                    .ok_or_else(|| Error::Parse(format!("expected y|x, got {l:?}")))?;
                Ok(BilateralPair::new(y.trim().parse()?, x.trim().parse()?))
            })
            .collect();
    }
    Err(Error::Parse(format!("unknown pair source {source:?}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
