//! `obs-mabs` command-line driver.
//!
//! Exit status: 0 on success, 2 for configuration and usage errors, 1 for
//! failures while running.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use obs_mabs::adaptive::{AdaptiveObserver, AdaptivePolicy, RateSource};
use obs_mabs::bench::export::{
    read_map_json, read_surface_csv, read_surface_json, write_isolines_gnuplot, write_map_csv,
    write_map_json, write_surface_csv, write_surface_gnuplot, write_surface_json, TimingCsvWriter,
};
use obs_mabs::bench::{
    build_observer, diff_surface, fastest_method_map, median_surface, run_simulation,
    time_interleaved, zero_isoline, CalibrationPlan, Scenario, SurfaceData, SurveySettings,
    TimingRecord,
};
use obs_mabs::config::{env_seed, ConfigFile, Overrides};
use obs_mabs::observers::ObservationSink;
use obs_mabs::seed::{stream_rng, OBSERVER_STREAM};
use obs_mabs::{Error, ObservationMethod, Observer, SimConfig};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "obs-mabs",
    version,
    about = "Observation strategies for agent-based simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one observed simulation and write its observations as CSV.
    Run(RunArgs),
    /// Time observation methods on one configuration.
    Bench(BenchArgs),
    /// Time a calibration plan and write the fastest-method map.
    Calibrate(CalibrateArgs),
    /// Difference of two surfaces and its zero isoline.
    Map(MapArgs),
    /// Run with the observer chosen at runtime from a calibration map.
    AdaptiveRun(AdaptiveArgs),
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Key/value configuration file.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    agents: Option<u32>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
}

impl SimArgs {
    fn resolve(&self) -> obs_mabs::Result<SimConfig> {
        let overrides = Overrides {
            width: self.width,
            height: self.height,
            agents: self.agents,
            steps: self.steps,
            seed: self.seed,
        };
        ConfigFile::load(&self.config)?.resolve(&overrides, env_seed()?)
    }
}

#[derive(Debug, Args)]
struct SurveyArgs {
    /// Maximum sampling error `d` of the survey.
    #[arg(long, default_value_t = 0.08)]
    survey_d: f64,
    /// Expected rate `p` used to size the survey; defaults to the zone coverage.
    #[arg(long)]
    survey_p: Option<f64>,
}

impl SurveyArgs {
    fn settings(&self) -> SurveySettings {
        SurveySettings {
            max_error: self.survey_d,
            expected_rate: self.survey_p,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// brute-force, indirect, self-observation or survey.
    #[arg(long)]
    method: ObservationMethod,
    #[command(flatten)]
    survey: SurveyArgs,
    /// Observation CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Methods to time; repeatable. Defaults to brute-force, self-observation and survey.
    #[arg(long = "method")]
    methods: Vec<ObservationMethod>,
    /// Also time the unobserved run.
    #[arg(long)]
    baseline: bool,
    #[arg(long, default_value_t = 5)]
    replicates: usize,
    #[command(flatten)]
    survey: SurveyArgs,
    /// Timings CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Plan file; the desk-scale default plan when omitted.
    plan: Option<PathBuf>,
    /// Calibration map JSON. The label matrix CSV, the raw timings and one
    /// median surface per method are written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct MapArgs {
    /// Two surfaces, CSV or JSON; the output is the first minus the second.
    #[arg(long = "surface", num_args = 1, required = true)]
    surfaces: Vec<PathBuf>,
    /// Also extract the zero isoline.
    #[arg(long)]
    isoline: bool,
    /// Output prefix: writes `<out>.csv`, `<out>.json`, `<out>.dat` and
    /// `<out>.isoline.dat`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AdaptiveArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Calibration map written by `calibrate`.
    #[arg(long)]
    calibration: PathBuf,
    /// Consecutive steps a new choice must persist before switching.
    #[arg(long, default_value_t = 0)]
    hysteresis: u64,
    /// Select on an exponential moving average of the observed rate
    /// instead of a constant.
    #[arg(long)]
    running_rate: bool,
    #[arg(long, default_value_t = 0.1)]
    smoothing: f64,
    #[command(flatten)]
    survey: SurveyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Map(a) => map(a),
        Command::AdaptiveRun(a) => adaptive_run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            })
        }
    }
}

fn create(path: &Path) -> obs_mabs::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> obs_mabs::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Run `observer` over `sim`, streaming observations to `out`. Returns the
/// summary line.
fn observed_run(
    sim: &SimConfig,
    observer: &mut dyn Observer,
    out: Option<&Path>,
) -> obs_mabs::Result<String> {
    let mut sink = ObservationSink::new(output(out)?)?;
    let started = Instant::now();
    let summary = run_simulation(sim, Some(observer), |o| sink.record(o))?;
    let elapsed = started.elapsed().as_secs_f64();
    sink.flush()?;
    let (step, value) = summary.last.map_or((0, f64::NAN), |o| (o.step, o.value));
    Ok(format!(
        "method={} agents={} steps={} seed={} final_step={step} final_value={value} elapsed_s={elapsed:.6}",
        observer.method(),
        sim.agents,
        sim.steps,
        sim.seed
    ))
}

/// With observations on stdout the summary goes to stderr.
fn report(line: &str, out: Option<&Path>) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn run(a: RunArgs) -> obs_mabs::Result<()> {
    let sim = a.sim.resolve()?;
    if a.method == ObservationMethod::Adaptive {
        return Err(Error::Config(
            "use `adaptive-run` for the adaptive method".into(),
        ));
    }
    let mut scenario = Scenario::new(sim.clone(), Some(a.method));
    let mut extra = String::new();
    if a.method == ObservationMethod::Survey {
        let settings = a.survey.settings();
        let plan = settings.plan(&sim)?;
        eprintln!(
            "survey population={} p={} d={} n={}",
            plan.population(),
            plan.expected_rate(),
            plan.max_error(),
            plan.sample_size()
        );
        extra = format!(" sample_size={}", plan.sample_size());
        scenario = scenario.with_survey(settings);
    }
    let mut observer = build_observer(&scenario, sim.seed)?.expect("observed scenario");
    let line = observed_run(&sim, observer.as_mut(), a.out.as_deref())?;
    report(&format!("{line}{extra}"), a.out.as_deref());
    Ok(())
}

fn print_record(r: &TimingRecord) {
    println!(
        "agents={} rate={} method={} replicates={} median_s={:.6} q1_s={:.6} q3_s={:.6}{}",
        r.key.agents,
        r.key.rate,
        r.key.method_label(),
        r.elapsed.len(),
        r.summary.median,
        r.summary.q1,
        r.summary.q3,
        r.key
            .survey_n
            .map(|n| format!(" sample_size={n}"))
            .unwrap_or_default()
    );
}

fn bench(a: BenchArgs) -> obs_mabs::Result<()> {
    let sim = a.sim.resolve()?;
    let methods = if a.methods.is_empty() {
        vec![
            ObservationMethod::BruteForce,
            ObservationMethod::SelfObservation,
            ObservationMethod::Survey,
        ]
    } else {
        a.methods
    };
    if methods.contains(&ObservationMethod::Adaptive) {
        return Err(Error::Config(
            "the adaptive method is timed by `adaptive-run`".into(),
        ));
    }
    let mut scenarios = Vec::new();
    if a.baseline {
        scenarios.push(Scenario::new(sim.clone(), None).replicates(a.replicates));
    }
    for m in methods {
        let s = Scenario::new(sim.clone(), Some(m)).replicates(a.replicates);
        scenarios.push(if m == ObservationMethod::Survey {
            s.with_survey(a.survey.settings())
        } else {
            s
        });
    }
    let records = time_interleaved(&scenarios)?;
    if let Some(path) = &a.out {
        let mut w = TimingCsvWriter::new(create(path)?)?;
        for r in &records {
            w.write(r)?;
        }
    }
    records.iter().for_each(print_record);
    Ok(())
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "map".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}{suffix}"))
}

fn calibrate(a: CalibrateArgs) -> obs_mabs::Result<()> {
    let mut plan = match &a.plan {
        Some(p) => CalibrationPlan::load(p)?,
        None => CalibrationPlan::desk_scale(),
    };
    if let Some(r) = a.replicates {
        plan.replicates = r;
    }
    if let Some(s) = a.steps {
        plan.steps = s;
    }
    if let Some(s) = a.seed {
        plan.seed = s;
    }
    plan.validate()?;

    let timings_path = sibling(&a.out, ".timings.csv");
    let mut timings = TimingCsvWriter::new(create(&timings_path)?)?;
    let mut total = 0;
    for &rate in &plan.rates {
        for &agents in &plan.agents {
            total += plan.scenarios_at(agents, rate)?.len();
        }
    }
    let mut done = 0;
    let records = plan.run(|r| {
        done += 1;
        eprintln!(
            "[{done}/{total}] agents={} rate={} method={} median_s={:.6}",
            r.key.agents,
            r.key.rate,
            r.key.method_label(),
            r.median()
        );
        timings.write(r)
    })?;
    drop(timings);

    let map = fastest_method_map(&records)?;
    write_map_json(create(&a.out)?, &map)?;
    write_map_csv(create(&sibling(&a.out, ".csv"))?, &map)?;
    for &m in &plan.methods {
        let surface = median_surface(&records, Some(m))?;
        write_surface_csv(create(&sibling(&a.out, &format!(".{m}.csv")))?, &surface)?;
    }
    let counts: Vec<String> = map
        .distinct_labels()
        .into_iter()
        .map(|m| format!("{m}:{}", map.count(m)))
        .collect();
    println!(
        "map={} rows={} cols={} labels={} timings={}",
        a.out.display(),
        map.p_axis.len(),
        map.n_axis.len(),
        counts.join(","),
        timings_path.display()
    );
    Ok(())
}

fn read_surface(path: &Path) -> obs_mabs::Result<SurfaceData> {
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "json") {
        Ok(read_surface_json(reader)?.0)
    } else {
        read_surface_csv(reader)
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn map(a: MapArgs) -> obs_mabs::Result<()> {
    let [first, second] = a.surfaces.as_slice() else {
        return Err(Error::Config(
            "map takes exactly two --surface files".into(),
        ));
    };
    let diff = diff_surface(&read_surface(first)?, &read_surface(second)?)?;
    write_surface_csv(create(&with_suffix(&a.out, ".csv"))?, &diff)?;
    write_surface_json(create(&with_suffix(&a.out, ".json"))?, &diff, None)?;
    write_surface_gnuplot(create(&with_suffix(&a.out, ".dat"))?, &diff)?;
    let negative = diff.values.iter().flatten().filter(|&&v| v < 0.0).count();
    let mut line = format!(
        "cells={} negative={negative} min={} max={}",
        diff.values.iter().flatten().count(),
        diff.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min),
        diff.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
    );
    if a.isoline {
        let lines = zero_isoline(&diff);
        write_isolines_gnuplot(create(&with_suffix(&a.out, ".isoline.dat"))?, &lines)?;
        let vertices: usize = lines.iter().map(Vec::len).sum();
        line.push_str(&format!(" polylines={} vertices={vertices}", lines.len()));
    }
    println!("{line}");
    Ok(())
}

fn adaptive_run(a: AdaptiveArgs) -> obs_mabs::Result<()> {
    let sim = a.sim.resolve()?;
    let file = File::open(&a.calibration)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.calibration.display())))?;
    let calibration = read_map_json(BufReader::new(file)).map_err(|e| match e {
        Error::Json(j) => Error::Parse(format!("{}: {j}", a.calibration.display())),
        e => e,
    })?;
    let source = match (a.running_rate, a.survey.survey_p) {
        (true, initial) => RateSource::RunningEstimate {
            initial,
            smoothing: a.smoothing,
        },
        (false, Some(p)) => RateSource::Constant(p),
        (false, None) => RateSource::ZoneCoverage,
    };
    let policy = AdaptivePolicy::new(calibration)
        .rate_source(source)
        .hysteresis(a.hysteresis);
    let mut observer = AdaptiveObserver::new(
        policy,
        Arc::clone(&sim.zone),
        sim.agents,
        a.survey.survey_d,
        stream_rng(sim.seed, OBSERVER_STREAM),
    )?;
    let line = observed_run(&sim, &mut observer, a.out.as_deref())?;
    let current = observer.current().map_or("none", |m| m.as_str());
    let line = format!(
        "{line} switches={} final_method={current} final_rate={}",
        observer.switch_count(),
        observer.rate()
    );
    report(&line, a.out.as_deref());
    Ok(())
}
