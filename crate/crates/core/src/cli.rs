//! Command-line front end: `simulate`, `geometry`, `tables`, `free-energy`
//! and `machine`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tmsl::geometry::{geometry_report, to_f64, GeometryReport};
use tmsl::inference::{free_energy_slope, ChartBox, ModelEvaluator, SynthesisProblem, DEFAULT_MU};
use tmsl::linalg::Q;
use tmsl::machine::{builtin, tm_run, MachineSpec};
use tmsl::oracle::weight_one_table;
use tmsl::propagate::SyndromeCounts;
use tmsl::utm::utm_run_cycles;
use tmsl::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

const RUN_SCHEMA: &str = "tmsl.run/1";

#[derive(Parser, Debug)]
#[command(
    name = "tmsl",
    version,
    about = "Noisy Turing machine codes: propagation, syndrome tables and local geometry"
)]
pub struct Cli {
    /// Worker threads for the parallel Monte-Carlo loops.
    #[arg(long, global = true, env = "TMSL_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a machine directly and through the staged UTM and compare.
    Simulate(SimulateArgs),
    /// Influence matrix, Hessian, spectrum, kernel and bounds.
    Geometry(GeometryArgs),
    /// Weight-one syndrome tables as CSV.
    Tables(TablesArgs),
    /// Monte-Carlo free energy on a chart slice and its log n slope.
    FreeEnergy(FreeEnergyArgs),
    /// Print a machine as canonical JSON.
    Machine(MachineArgs),
}

#[derive(Args, Debug, Clone)]
struct MachineArg {
    /// Machine spec file, or a built-in name (detectA0, detectA1).
    #[arg(long)]
    machine: String,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    machine: MachineArg,
    /// Input word, e.g. BA, or comma-separated symbols for long names.
    #[arg(long)]
    input: String,
    #[arg(long, default_value_t = 2)]
    t: usize,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Synthesis problem JSON; defaults to the detect-A problem.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Timeout; overrides the problem file.
    #[arg(long)]
    t: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Backend {
    /// Rational entries.
    Exact,
    /// Decimal rendering of the same exact results.
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        })
    }
}

#[derive(Args, Debug)]
struct GeometryArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Error-degree budget of the propagated polynomials.
    #[arg(long, default_value_t = 1)]
    kmax: usize,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    /// Directory for geometry.json and geometry.txt; text goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TablesArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated 1-based coordinates, or `all`.
    #[arg(long, default_value = "all")]
    coords: String,
    /// Directory for table_k<k>.csv files; CSV goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FreeEnergyArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Smoothing; overrides the problem file.
    #[arg(long)]
    mu: Option<f64>,
    /// Free coordinates of the slice (1-based, at most three).
    #[arg(long, default_value = "18")]
    coords: String,
    /// Each free coordinate ranges over [0, radius].
    #[arg(long, default_value_t = 0.2)]
    radius: f64,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    ns: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for free_energy.csv and free_energy.json; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MachineArgs {
    #[command(flatten)]
    machine: MachineArg,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } | Error::ResourceGuard(_) | Error::WindowOverflow { .. } => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_INPUT;
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Geometry(a) => geometry(a),
        Command::Tables(a) => tables(a),
        Command::FreeEnergy(a) => free_energy(a),
        Command::Machine(a) => machine(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

struct Loaded {
    spec: MachineSpec,
    /// Built-in name or the resolved path.
    source: String,
}

fn load_machine(arg: &MachineArg) -> CliResult<Loaded> {
    let path = Path::new(&arg.machine);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let spec = MachineSpec::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        return Ok(Loaded { spec, source: resolve(path) });
    }
    match builtin(&arg.machine) {
        Some(spec) => Ok(Loaded { spec, source: format!("builtin:{}", arg.machine) }),
        None => Err(Failure::input(format!("{}: no such file or built-in machine", arg.machine))),
    }
}

fn resolve(path: &Path) -> String {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf()).display().to_string()
}

fn load_problem(args: &ProblemArgs, spec: &MachineSpec, mu: Option<f64>) -> CliResult<(SynthesisProblem, String)> {
    let (mut problem, source) = match &args.problem {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let p = SynthesisProblem::from_json(&text, spec)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            (p, resolve(path))
        }
        None => (SynthesisProblem::detect_a(spec, DEFAULT_MU)?, "builtin:detectA".to_string()),
    };
    if let Some(t) = args.t {
        problem.t = t;
    }
    if let Some(mu) = mu {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::InvalidMu(mu).into());
        }
        problem.mu = mu;
    }
    Ok((problem, source))
}

/// Provenance block embedded in every output.
#[derive(Serialize)]
struct RunConfig {
    schema: &'static str,
    tool: String,
    command: &'static str,
    machine: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<String>,
    t: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    backend: Option<Backend>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl RunConfig {
    fn new(command: &'static str, machine: &str, t: usize) -> Self {
        RunConfig {
            schema: RUN_SCHEMA,
            tool: format!("tmsl {}", env!("CARGO_PKG_VERSION")),
            command,
            machine: machine.to_string(),
            problem: None,
            t,
            mu: None,
            k_max: None,
            coords: None,
            backend: None,
            seed: None,
        }
    }

    /// One-line `# key=value` header for text and CSV outputs.
    fn header(&self) -> String {
        let v = serde_json::to_value(self).expect("serialisable");
        let fields: Vec<String> = v
            .as_object()
            .expect("object")
            .iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        format!("# {}\n", fields.join(" "))
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: &'a T,
}

fn to_json<T: Serialize>(config: &RunConfig, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { config, body }).expect("serialisable");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn parse_coords(text: &str, d: usize) -> CliResult<Vec<usize>> {
    if text.trim() == "all" {
        return Ok((1..=d).collect());
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let k: usize = part.trim().parse().map_err(|_| Failure::input(format!("bad coordinate {part:?}")))?;
        if k == 0 || k > d {
            return Err(Error::InvalidCoordinate(k, d).into());
        }
        out.push(k);
    }
    Ok(out)
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let m = load_machine(&a.machine)?;
    let x = m.spec.parse_input(&a.input)?;
    let direct = tm_run(&x, &m.spec, a.t)?;
    let via_utm = utm_run_cycles(&x, &m.spec, a.t)?;
    let config = RunConfig::new("simulate", &m.source, a.t);
    let verdict = if direct == via_utm { "OK" } else { "MISMATCH" };
    print!("{}", config.header());
    println!("{} / {} / {verdict}", m.spec.states[direct], m.spec.states[via_utm]);
    if direct != via_utm {
        return Err(Failure { code: EXIT_ASSERTION, message: "direct run and UTM disagree".into() });
    }
    Ok(())
}

/// The report with every exact value rendered as a decimal.
fn floatify(report: &GeometryReport) -> serde_json::Value {
    fn conv(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::String(s) => {
                if let Ok(q) = s.parse::<Q>() {
                    *v = serde_json::json!(to_f64(&q));
                }
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(conv),
            serde_json::Value::Object(o) => o.values_mut().for_each(conv),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(report).expect("serialisable");
    for key in ["p_matrix", "hessian", "kernel_block", "input_distribution"] {
        if let Some(x) = v.get_mut(key) {
            conv(x);
        }
    }
    v
}

fn geometry(a: GeometryArgs) -> CliResult<()> {
    let m = load_machine(&a.machine)?;
    let (problem, psrc) = load_problem(&a.problem, &m.spec, None)?;
    let counts = SyndromeCounts::compute(&m.spec, &problem.inputs, problem.t, a.kmax)?;
    let name = m.source.rsplit(['/', ':']).next().unwrap_or(&m.source).to_string();
    let report = geometry_report(&m.spec, &name, &counts, &problem.q)?;
    let mut config = RunConfig::new("geometry", &m.source, problem.t);
    config.problem = Some(psrc);
    config.k_max = Some(a.kmax);
    config.backend = Some(a.backend);
    let json = match a.backend {
        Backend::Exact => to_json(&config, &report),
        Backend::Float => to_json(&config, &floatify(&report)),
    };
    let text = format!("{}{}", config.header(), report.to_text());
    match &a.out {
        Some(dir) => {
            write_file(dir, "geometry.json", &json)?;
            write_file(dir, "geometry.txt", &text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn tables(a: TablesArgs) -> CliResult<()> {
    let m = load_machine(&a.machine)?;
    let (problem, psrc) = load_problem(&a.problem, &m.spec, None)?;
    if problem.t != 2 {
        return Err(Failure::input("syndrome tables use the named paths of t = 2"));
    }
    let d = tmsl::noisy::LocalChart::new(&m.spec).dim();
    let coords = parse_coords(&a.coords, d)?;
    let mut config = RunConfig::new("tables", &m.source, problem.t);
    config.problem = Some(psrc);
    config.coords = Some(coords.clone());
    let mut nonzero = Vec::new();
    let mut stdout = String::new();
    for &k in &coords {
        let table = weight_one_table(&m.spec, k - 1, &problem.inputs)?;
        if table.errors.iter().any(|&e| e > 0) {
            nonzero.push(k);
        }
        let csv = format!("{}{}", config.header(), table.to_csv(&m.spec));
        match &a.out {
            Some(dir) => write_file(dir, &format!("table_k{k}.csv"), &csv)?,
            None => {
                stdout.push_str(&format!("# coordinate {k}\n"));
                stdout.push_str(&table.to_csv(&m.spec));
            }
        }
    }
    if a.out.is_none() {
        print!("{}{stdout}", config.header());
    }
    let list: Vec<String> = nonzero.iter().map(|k| k.to_string()).collect();
    eprintln!("coordinates with errors: {}", list.join(","));
    Ok(())
}

fn free_energy(a: FreeEnergyArgs) -> CliResult<()> {
    let m = load_machine(&a.machine)?;
    let (problem, psrc) = load_problem(&a.problem, &m.spec, a.mu)?;
    let model = ModelEvaluator::new(&m.spec, &problem);
    let d = tmsl::noisy::LocalChart::new(&m.spec).dim();
    let coords = parse_coords(&a.coords, d)?;
    if !(a.radius > 0.0 && a.radius.is_finite()) {
        return Err(Failure::input("--radius must be positive"));
    }
    let axes: Vec<(usize, f64, f64)> = coords.iter().map(|&k| (k - 1, 0.0, a.radius)).collect();
    let fit = free_energy_slope(&ChartBox::slice(d, &axes), &model, &a.ns, a.samples, a.seed)?;
    let mut config = RunConfig::new("free-energy", &m.source, problem.t);
    config.problem = Some(psrc);
    config.mu = Some(problem.mu);
    config.coords = Some(coords);
    config.seed = Some(a.seed);
    let csv = format!("{}{}", config.header(), fit.to_csv());
    let summary = format!("slope {:.6} +- {:.6} (max residual {:.3e})\n", fit.slope, fit.slope_ci, fit.max_residual);
    match &a.out {
        Some(dir) => {
            write_file(dir, "free_energy.csv", &csv)?;
            write_file(dir, "free_energy.json", &to_json(&config, &fit))?;
            print!("{summary}");
        }
        None => print!("{csv}{summary}"),
    }
    Ok(())
}

fn machine(a: MachineArgs) -> CliResult<()> {
    let m = load_machine(&a.machine)?;
    println!("{}", m.spec.to_json());
    Ok(())
}
