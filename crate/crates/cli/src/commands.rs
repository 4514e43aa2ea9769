use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use windtree_core::flow::{flow, CountingSink, FlowError};
use windtree_core::metric::{accumulation_candidate, hausdorff, in_epsilon_neighborhood};
use windtree_core::stats::{
    assemble, hopf_integrals, run_seed, sample_starts, AverageSeries, ClassSpec, EqualizationSpec, Estimator,
    HopfObservable, SeedResult, SeriesMeta, StartDir, StartSpec, WeightForm,
};
use windtree_core::{
    Configuration, DirIndex, DirectionClass, EventSink, FlowOptions, Neighborhood, PaperPoint, ParticleState,
    PeriodicSpec, Region, Status, Table,
};

use crate::configfile::{parse_f64, ConfigFile};
use crate::error::CliError;
use crate::output::{join4, render_series, Preamble, Report, TraceWriter};
use crate::OUT_DIR_ENV;

#[derive(Debug, Parser)]
#[command(name = "windtree", version, about = "Wind-tree billiards: configurations, flows and ergodic estimators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a configuration file.
    MakeConfig(MakeConfigArgs),
    /// Flow one particle and write its event trace.
    Simulate(SimulateArgs),
    /// Run a seeded estimator and write series and a report.
    Experiment(ExperimentArgs),
    /// Hausdorff distance between two configurations.
    Hausdorff(HausdorffArgs),
    /// Extract a convergent subsequence from a list of configurations.
    Accumulate(AccumulateArgs),
}

fn real(s: &str) -> Result<f64, String> {
    parse_f64(s)
}

fn pair(s: &str) -> Result<PaperPoint, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("`{s}`: expected X,Y"))?;
    Ok(PaperPoint::new(parse_f64(a)?, parse_f64(b)?))
}

fn dir_index(s: &str) -> Result<DirIndex, String> {
    s.parse::<u8>()
        .ok()
        .and_then(DirIndex::from_number)
        .ok_or_else(|| format!("`{s}`: direction index must be 1, 2, 3 or 4"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Explicit,
    Lattice,
    Ringed,
    Perturbed,
}

#[derive(Debug, Args)]
pub struct MakeConfigArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Obstacle L1 diameter.
    #[arg(long, default_value = "1", value_parser = real)]
    pub s: f64,
    /// Explicit center `X,Y` (repeatable).
    #[arg(long = "center", value_parser = pair)]
    pub centers: Vec<PaperPoint>,
    /// Ring index (ringed), or the enclosing ring of a perturbed patch.
    #[arg(long)]
    pub n: Option<u32>,
    /// Inner configuration file for `ringed`.
    #[arg(long)]
    pub inner: Option<PathBuf>,
    /// Square lattice step.
    #[arg(long, default_value = "1", value_parser = real)]
    pub step: f64,
    /// Lattice basis `X1,Y1,X2,Y2` (overrides --step).
    #[arg(long)]
    pub basis: Option<String>,
    /// Lattice site to delete, `X,Y` (repeatable).
    #[arg(long = "delete", value_parser = pair)]
    pub deletes: Vec<PaperPoint>,
    /// L1 radius of the perturbed patch.
    #[arg(long, value_parser = real)]
    pub radius: Option<f64>,
    #[arg(long, value_parser = real)]
    pub magnitude: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; defaults to `<kind>.cfg` in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Direction angle in radians, as an exact decimal.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    #[arg(long, default_value = "0", value_parser = real, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value = "0", value_parser = real, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value = "1", value_parser = dir_index)]
    pub dir: DirIndex,
    /// Flow time.
    #[arg(long = "T", value_parser = real)]
    pub time: f64,
    #[arg(long, value_parser = real)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub max_events: Option<u64>,
    /// Trace file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Hopf,
    Induced,
    Equalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableKind {
    Restricted,
    Weighted,
    WeightedLiteral,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub estimator: EstimatorKind,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    #[arg(long = "K", default_value_t = 1)]
    pub k: usize,
    /// Ambient time (hopf) or induced time (induced, equalize).
    #[arg(long = "T", value_parser = real)]
    pub time: Option<f64>,
    /// Induced time; alias of --T for the induced estimators.
    #[arg(long, value_parser = real)]
    pub tau: Option<f64>,
    /// Sampling step; defaults to a hundredth of the run.
    #[arg(long, value_parser = real)]
    pub sample_dt: Option<f64>,
    /// `window:N`, `all-inside-ring[:N]` or `rect:U0,V0,U1,V1` (internal frame).
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long, value_enum, default_value = "restricted")]
    pub observable: ObservableKind,
    /// Estimator base for `equalize`.
    #[arg(long, value_enum, default_value = "induced")]
    pub via: EstimatorKind,
    #[arg(long, default_value = "1", value_parser = dir_index)]
    pub i: DirIndex,
    #[arg(long, default_value = "2", value_parser = dir_index)]
    pub j: DirIndex,
    /// Comma-separated seeds.
    #[arg(long, default_value = "1")]
    pub seeds: String,
    /// L1 radius of the start distribution; defaults to the region size.
    #[arg(long, value_parser = real)]
    pub start_radius: Option<f64>,
    /// `1`..`4` or `random`.
    #[arg(long, default_value = "1")]
    pub start_dir: String,
    /// All K particles share one drawn start.
    #[arg(long)]
    pub cloned: bool,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_parser = real)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub max_events: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// File name prefix; defaults to the estimator name.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct HausdorffArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Truncation radius.
    #[arg(long, default_value = "100", value_parser = real)]
    pub radius: f64,
    /// Also decide membership in the eps-neighborhood.
    #[arg(long, value_parser = real)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AccumulateArgs {
    /// Configuration files, in sequence order.
    #[arg(required = true)]
    pub configs: Vec<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub depth: u32,
    /// Where to write the limit configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs one parsed command; `argv` is embedded in emitted files.
pub fn run(cli: Cli, argv: &[String], out: &mut impl Write) -> Result<(), CliError> {
    let cmdline = command_line(argv);
    match cli.command {
        Command::MakeConfig(a) => make_config(a, out),
        Command::Simulate(a) => simulate(a, &cmdline, out),
        Command::Experiment(a) => experiment(a, &cmdline, out),
        Command::Hausdorff(a) => hausdorff_cmd(a, out),
        Command::Accumulate(a) => accumulate(a, out),
    }
}

// `--jobs` is left out: it never changes results, and outputs must not
// depend on it
fn command_line(argv: &[String]) -> String {
    let mut kept = Vec::new();
    let mut skip = false;
    for a in argv {
        if std::mem::take(&mut skip) || a.starts_with("--jobs=") {
            continue;
        }
        if a == "--jobs" {
            skip = true;
            continue;
        }
        kept.push(a);
    }
    kept.into_iter()
        .map(|a| {
            if a.is_empty() || a.contains(|c: char| c.is_whitespace() || c == '\'' || c == '"') {
                format!("'{}'", a.replace('\'', "'\\''"))
            } else {
                a.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn out_dir(explicit: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn parse_theta(s: &str) -> Result<DirectionClass, CliError> {
    let th = parse_f64(s).map_err(CliError::input)?;
    DirectionClass::new(th).map_err(|e| CliError::input(format!("theta {s}: {e}")))
}

fn make_config(a: MakeConfigArgs, out: &mut impl Write) -> Result<(), CliError> {
    let s = a.s;
    let file = match a.kind {
        Kind::Explicit => ConfigFile::new(Configuration::explicit(s, a.centers.clone())?, "explicit"),
        Kind::Lattice => {
            let mut spec = lattice_spec(&a)?;
            for d in &a.deletes {
                spec.delete_at(*d)?;
            }
            let f = ConfigFile::new(Configuration::lattice(spec, s)?, "lattice");
            match &a.basis {
                Some(b) => f.param("basis", b),
                None => f.param("step", a.step),
            }
        }
        Kind::Ringed => {
            let n = a.n.ok_or_else(|| CliError::input("ringed needs --n"))?;
            let inner = match &a.inner {
                Some(p) => {
                    let f = ConfigFile::read(p)?;
                    if f.config.s() != s {
                        return Err(CliError::input("inner configuration has a different s"));
                    }
                    f.config
                }
                None => Configuration::empty(s)?,
            };
            ConfigFile::new(Configuration::make_ringed(&inner, n)?, "ringed").param("n", n)
        }
        Kind::Perturbed => {
            let radius = a.radius.ok_or_else(|| CliError::input("perturbed needs --radius"))?;
            let magnitude = a.magnitude.ok_or_else(|| CliError::input("perturbed needs --magnitude"))?;
            let seed = a.seed.ok_or_else(|| CliError::input("perturbed needs --seed"))?;
            if magnitude < 0.0 {
                return Err(CliError::input("--magnitude must be non-negative"));
            }
            let base = Configuration::lattice(lattice_spec(&a)?, s)?;
            let mut f = match a.n {
                Some(n) => {
                    let inner = base.patch(radius).perturb(magnitude, seed)?;
                    ConfigFile::new(Configuration::make_ringed(&inner, n)?, "perturbed").param("n", n)
                }
                None => ConfigFile::new(base.materialize(radius).perturb(magnitude, seed)?, "perturbed"),
            };
            f = f.param("step", a.step).param("radius", radius).param("magnitude", magnitude);
            f.seed = Some(seed);
            f
        }
    };
    let path = a.out.clone().unwrap_or_else(|| {
        let name = match a.kind {
            Kind::Explicit => "explicit",
            Kind::Lattice => "lattice",
            Kind::Ringed => "ringed",
            Kind::Perturbed => "perturbed",
        };
        out_dir(None).join(format!("{name}.cfg"))
    });
    write_file(&path, &file.render())?;
    writeln!(out, "path: {}", path.display())?;
    writeln!(out, "centers: {}", file.config.core().len())?;
    writeln!(out, "periodic: {}", file.config.extension().is_some())?;
    writeln!(out, "config_digest: {:016x}", file.config.digest())?;
    Ok(())
}

fn lattice_spec(a: &MakeConfigArgs) -> Result<PeriodicSpec, CliError> {
    match &a.basis {
        Some(b) => {
            let v = b.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>().map_err(CliError::input)?;
            if v.len() != 4 {
                return Err(CliError::input("--basis takes X1,Y1,X2,Y2"));
            }
            Ok(PeriodicSpec::new([PaperPoint::new(v[0], v[1]), PaperPoint::new(v[2], v[3])], vec![PaperPoint::ORIGIN])?)
        }
        None => Ok(PeriodicSpec::square(a.step)?),
    }
}

fn flow_options(horizon: Option<f64>, max_events: Option<u64>) -> FlowOptions {
    FlowOptions {
        horizon,
        max_events: max_events.unwrap_or(FlowOptions::default().max_events),
    }
}

struct Tee<'a, A: EventSink, B: EventSink>(&'a mut A, &'a mut B);

impl<A: EventSink, B: EventSink> EventSink for Tee<'_, A, B> {
    fn record(&mut self, particle: usize, ev: &windtree_core::EventRecord) {
        self.0.record(particle, ev);
        self.1.record(particle, ev);
    }
}

fn simulate(a: SimulateArgs, cmdline: &str, out: &mut impl Write) -> Result<(), CliError> {
    let file = ConfigFile::read(&a.config)?;
    let table = Table::new(&file.config);
    let dc = parse_theta(&a.theta)?;
    if a.time.is_nan() || a.time < 0.0 {
        return Err(CliError::input("--T must be non-negative"));
    }
    let start = ParticleState::new(PaperPoint::new(a.x, a.y).to_internal(), a.dir);
    if table.inside_obstacle(start.pos) {
        return Err(CliError::input(format!("start ({}, {}) is inside an obstacle", a.x, a.y)));
    }
    let opts = flow_options(a.horizon, a.max_events);
    let digest = format!("{:016x}", file.config.digest());
    let pre = Preamble::default()
        .with("command", cmdline)
        .with("config_digest", &digest)
        .with("theta", &a.theta);
    let mut counts = CountingSink::default();
    let (res, rows) = match &a.trace {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let f = std::io::BufWriter::new(std::fs::File::create(path)?);
            let mut w = TraceWriter::new(f, &pre)?;
            let res = flow(&table, &dc, &start, a.time, &opts, &mut Tee(&mut w, &mut counts));
            let rows = w.rows;
            w.finish()?;
            (res, rows)
        }
        None => {
            let res = flow(&table, &dc, &start, a.time, &opts, &mut counts);
            (res, 0)
        }
    };
    let (end, reason) = match res {
        Ok(st) => {
            let reason = match st.status {
                Status::Running => "time",
                Status::StoppedAtCorner => "corner-stop",
                Status::EscapedHorizon => "horizon",
            };
            (st, reason)
        }
        Err(FlowError::EventBudgetExceeded { state, .. }) => (state, "event-budget"),
        Err(e) => return Err(e.into()),
    };
    let p = end.pos.to_paper();
    let mut r = Report::from_preamble(&pre);
    r.push("events", counts.reflections + counts.corner_stops + counts.horizons);
    r.push("reflections", counts.reflections);
    r.push("corner_stops", counts.corner_stops);
    r.push("horizon", counts.horizons);
    r.push("stop_reason", reason);
    r.push("final_t", end.clock);
    r.push("final_x", p.x);
    r.push("final_y", p.y);
    r.push("final_dir", end.dir.number());
    if let Some(path) = &a.trace {
        r.push("trace", path.display());
        r.push("trace_rows", rows);
    }
    out.write_all(r.render().as_bytes())?;
    Ok(())
}

fn parse_region(spec: &str, file: &ConfigFile) -> Result<(Region, f64), CliError> {
    let s = file.config.s();
    let (head, tail) = spec.split_once(':').map(|(h, t)| (h, Some(t))).unwrap_or((spec, None));
    let index = |t: Option<&str>| -> Result<u32, CliError> {
        let raw = match t {
            Some(t) => t.to_string(),
            None => file
                .params
                .get("n")
                .cloned()
                .ok_or_else(|| CliError::input("region needs a ring index (`:N`, or a ringed config)"))?,
        };
        raw.trim().parse::<u32>().ok().filter(|&n| n > 0).ok_or_else(|| CliError::input(format!("bad region index `{raw}`")))
    };
    match head {
        "window" => {
            let n = index(tail)?;
            Ok((Region::window(n, s), n as f64 * s))
        }
        "all-inside-ring" => {
            let n = index(tail)?;
            Ok((Region::inside_ring(n, s), (n as f64 - 0.5) * s))
        }
        "rect" => {
            let t = tail.ok_or_else(|| CliError::input("rect:U0,V0,U1,V1"))?;
            let v = t.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>().map_err(CliError::input)?;
            if v.len() != 4 {
                return Err(CliError::input("rect:U0,V0,U1,V1"));
            }
            let r = windtree_core::geometry::Rect::new(v[0], v[1], v[2], v[3]);
            let region = Region::rect(r).ok_or_else(|| CliError::input("region has zero area"))?;
            // largest L1 ball around the origin inside the rectangle
            let m = [-v[0], -v[1], v[2], v[3]].into_iter().fold(f64::INFINITY, f64::min);
            Ok((region, (m * std::f64::consts::SQRT_2).max(0.0)))
        }
        other => Err(CliError::input(format!("unknown region kind `{other}`"))),
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let seeds = s
        .split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| CliError::input(format!("bad seed `{x}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if seeds.is_empty() {
        return Err(CliError::input("no seeds"));
    }
    Ok(seeds)
}

fn experiment(a: ExperimentArgs, cmdline: &str, out: &mut impl Write) -> Result<(), CliError> {
    let file = ConfigFile::read(&a.config)?;
    let table = Table::new(&file.config);
    parse_theta(&a.theta)?;
    let theta = parse_f64(&a.theta).map_err(CliError::input)?;
    let seeds = parse_seeds(&a.seeds)?;
    if a.k == 0 {
        return Err(CliError::input("--K must be at least 1"));
    }
    if a.jobs == 0 {
        return Err(CliError::input("--jobs must be at least 1"));
    }
    let base = match a.estimator {
        EstimatorKind::Equalize => a.via,
        e => e,
    };
    if base == EstimatorKind::Equalize {
        return Err(CliError::input("--via must be hopf or induced"));
    }
    let total = match base {
        EstimatorKind::Hopf => a.time.or(a.tau),
        _ => a.tau.or(a.time),
    }
    .ok_or_else(|| CliError::input("missing run length (--T or --tau)"))?;
    if total.is_nan() || total <= 0.0 {
        return Err(CliError::input("run length must be positive"));
    }
    let dt = a.sample_dt.unwrap_or(total / 100.0);
    if dt.is_nan() || dt <= 0.0 {
        return Err(CliError::input("--sample-dt must be positive"));
    }
    let needs_region = base == EstimatorKind::Induced || a.observable == ObservableKind::Restricted;
    let region = match (&a.region, needs_region) {
        (Some(r), _) => Some(parse_region(r, &file)?),
        (None, true) => return Err(CliError::input("this estimator needs --region")),
        (None, false) => None,
    };
    let start_radius = a
        .start_radius
        .or(region.as_ref().map(|r| r.1))
        .ok_or_else(|| CliError::input("need --start-radius"))?;
    let start_dir = match a.start_dir.as_str() {
        "random" => StartDir::Random,
        d => StartDir::Fixed(dir_index(d).map_err(CliError::input)?),
    };
    let estimator = match base {
        EstimatorKind::Hopf => Estimator::Hopf {
            observable: match a.observable {
                ObservableKind::Restricted => HopfObservable::Restricted(region.clone().unwrap().0),
                ObservableKind::Weighted => HopfObservable::Weighted(WeightForm::Corrected),
                ObservableKind::WeightedLiteral => HopfObservable::Weighted(WeightForm::Literal),
            },
            t_total: total,
            sample_dt: dt,
        },
        _ => Estimator::Induced {
            region: region.clone().unwrap().0,
            tau: total,
            sample_dtau: dt,
        },
    };
    let spec = EqualizationSpec {
        classes: ClassSpec::Single(theta),
        k: a.k,
        start: StartSpec {
            radius: start_radius,
            dir: start_dir,
            cloned: a.cloned,
        },
        estimator,
        seeds: seeds.clone(),
        opts: flow_options(a.horizon, a.max_events),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let results: Vec<Result<SeedOutput, CliError>> =
        pool.install(|| seeds.par_iter().map(|&seed| run_one(&table, &spec, seed, a.i, a.j)).collect());
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let name = a.name.clone().unwrap_or_else(|| {
        match a.estimator {
            EstimatorKind::Hopf => "hopf",
            EstimatorKind::Induced => "induced",
            EstimatorKind::Equalize => "equalize",
        }
        .to_string()
    });
    let dir = out_dir(a.out_dir.as_deref());
    let digest = format!("{:016x}", file.config.digest());
    let pre = Preamble::default()
        .with("command", cmdline)
        .with("config_digest", &digest)
        .with("theta", &a.theta)
        .with("seeds", seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    let (value_name, prefix) = match base {
        EstimatorKind::Hopf => (format!("ratio_{}_{}", a.i.number(), a.j.number()), "integral_I"),
        _ => (format!("fraction_{}", a.i.number()), "fraction_I"),
    };
    let mut report = Report::from_preamble(&pre);
    report.push(
        "estimator",
        match a.estimator {
            EstimatorKind::Hopf => "hopf",
            EstimatorKind::Induced => "induced",
            EstimatorKind::Equalize => "equalize",
        },
    );
    report.push("K", a.k);
    report.push("run_length", total);
    if let Some(r) = &a.region {
        report.push("region", r);
    }
    let mut series_paths = Vec::new();
    for r in &results {
        let path = dir.join(format!("{name}-seed{}.csv", r.seed.seed));
        write_file(&path, &render_series(&r.series, &pre, &value_name, prefix))?;
        series_paths.push(path);
        let tag = format!("seed.{}", r.seed.seed);
        report.push(&format!("{tag}.fractions"), join4(&r.seed.fractions));
        report.push(&format!("{tag}.totals"), join4(&r.seed.totals));
        if base == EstimatorKind::Hopf {
            let ij = r.seed.ratio(a.i, a.j);
            let ji = r.seed.ratio(a.j, a.i);
            report.push(&format!("{tag}.ratio"), opt(ij.value()));
            report.push(&format!("{tag}.ratio_product"), opt((ij * ji).value()));
        }
        report.push(&format!("{tag}.censored_at"), opt(r.seed.censored_at));
        report.push(&format!("{tag}.covered"), r.seed.covered);
        report.push(&format!("{tag}.events"), r.seed.events);
    }
    if a.estimator == EstimatorKind::Equalize {
        let rep = assemble(&table, results.iter().map(|r| r.seed.clone()).collect());
        report.push("mean_fractions", join4(&rep.mean));
        report.push("std_fractions", join4(&rep.std));
        report.push("censored_fraction", rep.censored_fraction);
        report.push("caveat", &rep.caveat);
    }
    let report_path = dir.join(format!("{name}-report.txt"));
    write_file(&report_path, &report.render())?;
    writeln!(out, "report: {}", report_path.display())?;
    for p in series_paths {
        writeln!(out, "series: {}", p.display())?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".to_string())
}

struct SeedOutput {
    seed: SeedResult,
    series: AverageSeries,
}

fn run_one(table: &Table, spec: &EqualizationSpec, seed: u64, i: DirIndex, j: DirIndex) -> Result<SeedOutput, CliError> {
    match &spec.estimator {
        Estimator::Hopf {
            observable,
            t_total,
            sample_dt,
        } => {
            let ps = sample_starts(table, spec, seed)?;
            let run = hopf_integrals(table, &ps, observable, *t_total, *sample_dt, &spec.opts, &mut windtree_core::flow::NullSink)?;
            let totals = run.final_integrals();
            let sum: f64 = totals.iter().sum();
            let fractions = if sum > 0.0 { totals.map(|x| x / sum) } else { [0.0; 4] };
            let series = AverageSeries {
                times: run.times.clone(),
                values: (0..run.times.len()).map(|n| run.ratio_at(n, i, j).value()).collect(),
                per_direction: run.integrals.clone(),
                meta: SeriesMeta {
                    t_total: *t_total,
                    k: spec.k,
                    seed: Some(seed),
                    config_digest: table.config().digest(),
                },
            };
            Ok(SeedOutput {
                seed: SeedResult {
                    seed,
                    fractions,
                    totals,
                    series: series.clone(),
                    censored_at: run.censored_at,
                    covered: run.censored_at.unwrap_or(*t_total),
                    events: run.events,
                },
                series,
            })
        }
        Estimator::Induced { .. } => {
            let r = run_seed(table, spec, seed)?;
            let mut series = r.series.clone();
            series.values = series.per_direction.iter().map(|f| Some(f[i.slot()])).collect();
            Ok(SeedOutput { seed: r, series })
        }
    }
}

fn hausdorff_cmd(a: HausdorffArgs, out: &mut impl Write) -> Result<(), CliError> {
    let g1 = ConfigFile::read(&a.a)?.config;
    let g2 = ConfigFile::read(&a.b)?.config;
    if a.radius.is_nan() || a.radius <= 0.0 {
        return Err(CliError::input("--radius must be positive"));
    }
    let d = hausdorff(&g1, &g2, a.radius);
    writeln!(out, "value: {}", d.value)?;
    writeln!(out, "error_bound: {}", d.error_bound)?;
    writeln!(out, "radius: {}", a.radius)?;
    if let Some(eps) = a.eps {
        let n = match in_epsilon_neighborhood(&g1, &g2, eps, a.radius) {
            Neighborhood::Yes => "yes",
            Neighborhood::No => "no",
            Neighborhood::Undecided => "undecided",
        };
        writeln!(out, "in_neighborhood: {n}")?;
    }
    Ok(())
}

fn accumulate(a: AccumulateArgs, out: &mut impl Write) -> Result<(), CliError> {
    let seq = a
        .configs
        .iter()
        .map(|p| ConfigFile::read(p).map(|f| f.config))
        .collect::<Result<Vec<_>, _>>()?;
    let acc = accumulation_candidate(&seq, a.depth).map_err(|e| CliError::input(e.to_string()))?;
    writeln!(out, "indices: {}", acc.indices.iter().map(usize::to_string).collect::<Vec<_>>().join(","))?;
    writeln!(out, "limit_centers: {}", acc.limit.core().len())?;
    writeln!(out, "limit_digest: {:016x}", acc.limit.digest())?;
    if let Some(path) = &a.out {
        let f = ConfigFile::new(acc.limit, "explicit").param("depth", a.depth);
        write_file(path, &f.render())?;
        writeln!(out, "limit: {}", path.display())?;
    }
    Ok(())
}
