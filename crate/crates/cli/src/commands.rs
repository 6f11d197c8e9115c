use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use spreadlab::deposition::DepositionMechanism;
use spreadlab::estimators::{self as est, EstimatorError, FitWindow, SeriesKind, SpreadEventSeries};
use spreadlab::parity_chain::{parity_sweep, write_sweep_csv, SpreadLaw};
use spreadlab::sim::{run, run_replicas, SimConfig, Trajectory};
use spreadlab::tape::{self, TapeFormat, TickSpec};

use crate::settings::Settings;
use crate::{AnalyzeArgs, Cli, Command, IngestArgs, SimulateArgs, SweepArgs};

/// Exit status when a simulation run diverged.
const EXIT_DIVERGED: u8 = 2;

struct Common {
    seed: u64,
    out: PathBuf,
}

pub fn dispatch(cli: Cli) -> Result<ExitCode> {
    let mut settings = match &cli.common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::empty(),
    };
    let seed = settings.common("seed", cli.common.seed, 1u64)?;
    let out = settings.common("out", cli.common.out.clone(), ".".to_string())?;
    let threads = settings.common("threads", cli.common.threads, 0usize)?;
    let common = Common { seed, out: PathBuf::from(out) };

    let job = match cli.command {
        Command::Simulate(a) => Job::Simulate(resolve_simulate(a, &mut settings, &common)?),
        Command::ParitySweep(a) => Job::Sweep(resolve_sweep(a, &mut settings)?),
        Command::Analyze(a) => Job::Analyze(resolve_analyze(a, &mut settings)?),
        Command::Ingest(a) => Job::Ingest(resolve_ingest(a, &mut settings)?),
    };
    settings.check_unused(job.section())?;
    eprint!("{}", settings.report());

    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating output directory {}", common.out.display()))?;
    let comments = settings.comment_lines();
    match job {
        Job::Simulate(p) => simulate(p, &common, &comments),
        Job::Sweep(p) => sweep(p, &common, &comments),
        Job::Analyze(p) => analyze(p, &common, &comments),
        Job::Ingest(p) => ingest(p, &common, &comments),
    }
}

enum Job {
    Simulate(SimulateParams),
    Sweep(SweepParams),
    Analyze(AnalyzeParams),
    Ingest(IngestParams),
}

impl Job {
    fn section(&self) -> &'static str {
        match self {
            Job::Simulate(_) => "simulate",
            Job::Sweep(_) => "parity-sweep",
            Job::Analyze(_) => "analyze",
            Job::Ingest(_) => "ingest",
        }
    }
}

fn mechanism(name: &str, alpha: f64) -> Result<DepositionMechanism<f64>> {
    match name.trim().to_ascii_lowercase().as_str() {
        "uniform" => Ok(DepositionMechanism::Uniform),
        "nonuniform" | "non-uniform" => Ok(DepositionMechanism::non_uniform(alpha)?),
        other => bail!("unknown mechanism `{other}` (expected uniform or nonuniform)"),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_out(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    body(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

struct SimulateParams {
    config: SimConfig,
    replicas: u64,
    quote_tape: bool,
    tick_size: f64,
}

fn resolve_simulate(a: SimulateArgs, s: &mut Settings, common: &Common) -> Result<SimulateParams> {
    const S: &str = "simulate";
    let d = SimConfig::default();
    let pi = s.get(S, "pi", a.pi, d.pi)?;
    let k = s.get(S, "k", a.k, d.k)?;
    let mech_name = s.get(S, "mechanism", a.mechanism, "uniform".to_string())?;
    let alpha = s.get(S, "alpha", a.alpha, 0.7)?;
    let cancel_rate = s.get(S, "cancel-rate", a.cancel_rate, d.cancel_rate)?;
    let steps = s.get(S, "steps", a.steps, d.steps)?;
    let warmup = s.get(S, "warmup", a.warmup, d.warmup)?;
    let window = s.get(S, "window", a.window, d.window)?;
    let initial_depth = s.get(S, "initial-depth", a.initial_depth, d.initial_depth)?;
    let spread_ceiling = s.get_opt(S, "ceiling", a.ceiling)?;
    let replicas = s.get(S, "replicas", a.replicas, 1u64)?;
    let quote_tape = s.get_flag(S, "quote-tape", a.quote_tape)?;
    let tick_size = s.get(S, "tick-size", a.tick_size, 0.01)?;
    let config = SimConfig {
        pi,
        k,
        mechanism: mechanism(&mech_name, alpha)?,
        cancel_rate,
        steps,
        warmup,
        seed: common.seed,
        stream: 0,
        window,
        initial_depth,
        spread_ceiling,
    };
    config.validate()?;
    if replicas == 0 {
        bail!("replicas must be at least 1");
    }
    TickSpec::new(tick_size)?;
    Ok(SimulateParams { config, replicas, quote_tape, tick_size })
}

fn simulate(p: SimulateParams, common: &Common, comments: &[String]) -> Result<ExitCode> {
    let runs: Vec<Trajectory> = if p.replicas == 1 {
        vec![run(&p.config)?]
    } else {
        run_replicas(&p.config, p.replicas).into_iter().collect::<Result<_, _>>()?
    };
    let suffix = |r: usize| if p.replicas == 1 { String::new() } else { format!("_{r}") };
    for (r, traj) in runs.iter().enumerate() {
        write_out(&common.out, &format!("trajectory{}.csv", suffix(r)), |w| traj.write_csv(w))?;
        if p.quote_tape {
            write_out(&common.out, &format!("quotes{}.csv", suffix(r)), |w| traj.write_quote_tape(w, p.tick_size))?;
        }
    }
    let mut table = String::from(
        "replica,stream,events,mean_spread,odd_fraction,spread_increases,cancellation_events,\
         cancellation_at_best_rate,market_redraws,market_skipped,diverged,divergence_step\n",
    );
    for (r, traj) in runs.iter().enumerate() {
        let sm = traj.summary();
        table.push_str(&format!(
            "{r},{},{},{:.6},{:.6},{},{},{:.6},{},{},{},{}\n",
            traj.config.stream,
            sm.events,
            sm.mean_spread,
            sm.odd_fraction,
            sm.spread_increases,
            sm.cancellation_events,
            sm.cancellation_at_best_rate,
            traj.counters.market_redraws,
            traj.counters.market_skipped,
            sm.diverged,
            traj.divergence.map_or(String::new(), |d| d.step.to_string()),
        ));
    }
    write_out(&common.out, "summary.csv", |w| {
        writeln!(w, "# simulation summary; replica r runs on stream r of the seed")?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        w.write_all(table.as_bytes())
    })?;
    print!("{table}");

    let diverged: Vec<String> = runs
        .iter()
        .enumerate()
        .filter_map(|(r, t)| {
            t.divergence.map(|d| {
                format!(
                    "replica {r}: spread {} exceeded ceiling {} at step {} (warm-up included)",
                    d.spread, d.ceiling, d.step
                )
            })
        })
        .collect();
    if diverged.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!("divergence detected; trajectories truncated at the divergence step");
    for line in diverged {
        eprintln!("  {line}");
    }
    Ok(ExitCode::from(EXIT_DIVERGED))
}

struct SweepParams {
    means: Vec<f64>,
    mechanisms: Vec<DepositionMechanism<f64>>,
    samples: u64,
    law: SpreadLaw,
}

fn resolve_sweep(a: SweepArgs, s: &mut Settings) -> Result<SweepParams> {
    const S: &str = "parity-sweep";
    let means = s.get_list(S, "means", a.means, vec![1.5, 2.0, 3.0, 4.0, 6.0, 8.0])?;
    let names = s.get_list(S, "mechanisms", a.mechanisms, vec!["uniform".to_string(), "nonuniform".to_string()])?;
    let alpha = s.get(S, "alpha", a.alpha, 0.7)?;
    let samples = s.get(S, "samples", a.samples, 1_000_000u64)?;
    let law_name = s.get(S, "law", a.law, "geometric".to_string())?;
    let law = SpreadLaw::parse(&law_name).ok_or_else(|| anyhow!("unknown spread law `{law_name}`"))?;
    if means.is_empty() || names.is_empty() {
        bail!("parity sweep needs at least one mean and one mechanism");
    }
    if let Some(m) = means.iter().find(|m| !(**m > 1.0)) {
        bail!("mean spread {m} must be > 1");
    }
    let mechanisms = names.iter().map(|n| mechanism(n, alpha)).collect::<Result<_>>()?;
    Ok(SweepParams { means, mechanisms, samples, law })
}

fn sweep(p: SweepParams, common: &Common, comments: &[String]) -> Result<ExitCode> {
    let rows = parity_sweep(&p.means, &p.mechanisms, p.samples, p.law, common.seed)?;
    let mut lines = comments.to_vec();
    lines.insert(0, "parity sweep: row r uses stream r of the seed".to_string());
    write_out(&common.out, "parity_sweep.csv", |w| write_sweep_csv(&rows, &lines, w))?;
    println!("mean_spread,mechanism,odd_fraction,sigma,n_transitions,n_excluded");
    for r in &rows {
        println!(
            "{},{},{:.6},{:.6},{},{}",
            r.mean_spread,
            r.mechanism.label(),
            r.outcome.odd_fraction,
            r.outcome.sigma(),
            r.outcome.n_transitions,
            r.outcome.n_excluded
        );
    }
    Ok(ExitCode::SUCCESS)
}

struct AnalyzeParams {
    input: String,
    odd_fraction: bool,
    conditional_parity: bool,
    delta_s: bool,
    alpha: bool,
    acf: bool,
    relaxation: bool,
    min_count: u64,
    delta_s_spreads: Vec<u32>,
    max_lag: usize,
    fit: FitWindow,
    relax_delta: i64,
    relax_max_lag: usize,
}

fn resolve_analyze(a: AnalyzeArgs, s: &mut Settings) -> Result<AnalyzeParams> {
    const S: &str = "analyze";
    let input = s
        .get_opt::<String>(S, "input", a.input)?
        .ok_or_else(|| anyhow!("analyze needs --input"))?;
    let all = s.get_flag(S, "all", a.all)?;
    let mut pick = |key: &str, flag: bool| s.get_flag(S, key, flag || all);
    let odd_fraction = pick("odd-fraction", a.odd_fraction)?;
    let conditional_parity = pick("conditional-parity", a.conditional_parity)?;
    let delta_s = pick("delta-s", a.delta_s)?;
    let alpha = pick("alpha-estimate", a.alpha_estimate)?;
    let acf = pick("acf", a.acf)?;
    let relaxation = pick("relaxation", a.relaxation)?;
    let default_fit = FitWindow::default();
    let p = AnalyzeParams {
        input,
        odd_fraction,
        conditional_parity,
        delta_s,
        alpha,
        acf,
        relaxation,
        min_count: s.get(S, "min-count", a.min_count, est::DEFAULT_MIN_COUNT)?,
        delta_s_spreads: s.get_list(S, "delta-s-spreads", a.delta_s_spreads, Vec::new())?,
        max_lag: s.get(S, "max-lag", a.max_lag, 300usize)?,
        fit: FitWindow {
            first: s.get(S, "fit-first", a.fit_first, default_fit.first)?,
            last: s.get(S, "fit-last", a.fit_last, default_fit.last)?,
        },
        relax_delta: s.get(S, "relax-delta", a.relax_delta, 2i64)?,
        relax_max_lag: s.get(S, "relax-max-lag", a.relax_max_lag, 2000usize)?,
    };
    let chosen = [p.odd_fraction, p.conditional_parity, p.delta_s, p.alpha, p.acf, p.relaxation];
    if !chosen.iter().any(|&c| c) {
        bail!("no estimator selected; pass --all or one of --odd-fraction, --conditional-parity, --delta-s, --alpha-estimate, --acf, --relaxation");
    }
    Ok(p)
}

type Report = (&'static str, Vec<u8>);

fn analyze(p: AnalyzeParams, common: &Common, comments: &[String]) -> Result<ExitCode> {
    let file = File::open(&p.input).with_context(|| format!("opening {}", p.input))?;
    let series = est::read_series_csv(std::io::BufReader::new(file)).with_context(|| format!("reading {}", p.input))?;
    if series.is_empty() {
        return Err(EstimatorError::EmptySeries).with_context(|| format!("reading {}", p.input));
    }
    let mut lines = comments.to_vec();
    lines.push(format!("input_records={}", series.len()));

    let mut reports: Vec<Report> = Vec::new();
    let mut emit = |name: &'static str, f: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        reports.push((name, buf));
        Ok(())
    };
    if p.odd_fraction {
        let f = est::odd_fraction(&series)?;
        emit("odd_fraction.csv", &|w| est::write_odd_fraction_csv(f, series.len(), &lines, w))?;
    }
    if p.conditional_parity {
        let cp = est::conditional_parity_frequency(&series, p.min_count)?;
        emit("conditional_parity.csv", &|w| est::write_conditional_parity_csv(&cp, &lines, w))?;
    }
    if p.delta_s {
        let dists = delta_s_tables(&series, &p.delta_s_spreads)?;
        emit("delta_s.csv", &|w| est::write_delta_s_csv(&dists, &lines, w))?;
    }
    if p.alpha {
        let a = est::alpha_estimate(&series)?;
        emit("alpha.csv", &|w| est::write_alpha_csv(&a, &lines, w))?;
    }
    if p.acf {
        let mids = series
            .mids()
            .ok_or_else(|| anyhow!("the ACF estimator needs a `mid` column in {}", p.input))?;
        let acf = est::acf_abs_returns(&mids, p.max_lag, p.fit)?;
        emit("acf.csv", &|w| est::write_acf_csv(&acf, &lines, w))?;
    }
    if p.relaxation {
        let g = est::spread_relaxation(&series, p.relax_delta, p.relax_max_lag)?;
        emit("relaxation.csv", &|w| est::write_relaxation_csv(&g, &lines, w))?;
    }
    for (name, body) in reports {
        write_out(&common.out, name, |w| w.write_all(&body))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn delta_s_tables(series: &SpreadEventSeries, spreads: &[u32]) -> Result<Vec<est::DeltaSDistribution>> {
    let chosen: BTreeSet<u32> = if spreads.is_empty() {
        series
            .records()
            .iter()
            .filter(|r| r.s_post < r.s_pre)
            .map(|r| r.s_pre)
            .collect()
    } else {
        spreads.iter().copied().collect()
    };
    if chosen.is_empty() {
        return Err(EstimatorError::EmptySeries.into());
    }
    Ok(chosen
        .into_iter()
        .map(|s| est::delta_s_distribution(series, s))
        .collect::<Result<_, _>>()?)
}

struct IngestParams {
    input: String,
    spec: TickSpec,
    lenient: bool,
    with_mid: bool,
}

fn resolve_ingest(a: IngestArgs, s: &mut Settings) -> Result<IngestParams> {
    const S: &str = "ingest";
    let input = s
        .get_opt::<String>(S, "input", a.input)?
        .ok_or_else(|| anyhow!("ingest needs --input"))?;
    let tick_size = s.get(S, "tick-size", a.tick_size, 0.01)?;
    let tolerance = s.get(S, "tolerance", a.tolerance, 1e-6)?;
    let lenient = s.get_flag(S, "lenient", a.lenient)?;
    let with_mid = s.get_flag(S, "with-mid", a.with_mid)?;
    let spec = TickSpec { tick_size, tolerance };
    spec.validate()?;
    Ok(IngestParams { input, spec, lenient, with_mid })
}

fn ingest(p: IngestParams, common: &Common, comments: &[String]) -> Result<ExitCode> {
    let file = File::open(&p.input).with_context(|| format!("opening {}", p.input))?;
    let parsed = tape::parse_tape(std::io::BufReader::new(file), TapeFormat { lenient: p.lenient })
        .with_context(|| format!("parsing {}", p.input))?;
    let (quotes, off_grid) = if p.lenient {
        tape::to_ticks_lenient(&parsed.records, &p.spec)?
    } else {
        (tape::to_ticks(&parsed.records, &p.spec).with_context(|| format!("converting {} to ticks", p.input))?, Vec::new())
    };
    let series = tape::classify_events(&quotes).with_context(|| format!("classifying {}", p.input))?;
    let count = |k: SeriesKind| series.records().iter().filter(|r| r.kind == k).count();

    let mut meta = vec!["classified spread events".to_string()];
    meta.extend(comments.iter().cloned());
    meta.push(format!("rows_read={}", parsed.records.len() + parsed.rejected.len()));
    meta.push(format!("rows_rejected={}", parsed.rejected.len()));
    meta.push(format!("off_grid={}", off_grid.len()));
    meta.push(format!("quotes_used={}", quotes.len()));
    meta.push(format!(
        "events={} limit={} market={}",
        series.len(),
        count(SeriesKind::LimitOrder),
        count(SeriesKind::MarketOrder)
    ));
    for (line, reason) in &parsed.rejected {
        meta.push(format!("rejected line {line}: {reason}"));
    }
    for e in &off_grid {
        meta.push(format!("skipped {e}"));
    }
    meta.push("rule: spread increase = market order, decrease = limit order, unchanged = no event".into());
    meta.push("caveat: a cancellation at the best quote widens the spread and is labelled market".into());
    meta.push("t is the quote row index (0-based, data rows only); mid is bid + ask, i.e. the mid-price in half ticks".into());
    write_out(&common.out, "events.csv", |w| est::write_series_csv(&series, &meta, p.with_mid, w))?;
    println!(
        "{} quotes, {} events ({} limit, {} market), {} rejected rows, {} off-grid",
        quotes.len(),
        series.len(),
        count(SeriesKind::LimitOrder),
        count(SeriesKind::MarketOrder),
        parsed.rejected.len(),
        off_grid.len()
    );
    Ok(ExitCode::SUCCESS)
}
