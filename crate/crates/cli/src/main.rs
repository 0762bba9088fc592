use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use sharp_ald::exactnum::{parse_rational, serde_rat};
use sharp_ald::mipsolve::{solve_mip, Augmenting};
use sharp_ald::model::check_recession_condition;
use sharp_ald::saldual::{
    self, asymptotic_experiment, certify, compute_constants, geometric_schedule, rho_sweep, sweep_csv, CertifyOptions,
    Class, OracleGrid, SalrEvaluator,
};
use sharp_ald::valuefn::{build_grid, continuous_relaxation, samples_csv};
use sharp_ald::{io, selftest, Caps, Error, Norm, ProblemInstance, Rational, Settings};

const CAP_ENV: &str = "SHARP_ALD_CAP_OVERRIDE";

#[derive(Parser, Debug)]
#[command(name = "sharp-ald", version, about = "Exact sharp augmented Lagrangian duality for small mixed-integer programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args, Debug, Clone)]
struct Opts {
    /// Penalty norm.
    #[arg(long, global = true, default_value = "l1")]
    norm: String,
    #[arg(long, global = true)]
    rho: Option<String>,
    /// Last ρ of a doubling schedule starting at --rho.
    #[arg(long, global = true)]
    rho_max: Option<String>,
    /// Comma-separated ρ values.
    #[arg(long, global = true)]
    schedule: Option<String>,
    /// Grid radius.
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Lattice pitch for mixed instances.
    #[arg(long, global = true, default_value = "1/8")]
    pitch: String,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// A single cap for everything, or `basis=N,node=N,grid=N,...`.
    #[arg(long, global = true)]
    caps: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Machine-readable output file; `-` for stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Threshold class: milp, miqp, picp, micp-a, micp-b.
    #[arg(long, global = true)]
    class: Option<String>,
    /// Ascent steps for `salr --ascent`.
    #[arg(long, global = true)]
    ascent: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance file.
    Validate { instance: PathBuf },
    /// Continuous relaxation and multipliers.
    Relax { instance: PathBuf },
    /// z_IP by branch and bound.
    Solve { instance: PathBuf },
    /// φ on a grid around 0.
    Valuefn { instance: PathBuf },
    /// Penalty constants and ρ*.
    Constants { instance: PathBuf },
    /// z_SALR(ρ), optionally followed by dual ascent on λ.
    Salr { instance: PathBuf },
    /// Gap over a ρ schedule.
    Sweep { instance: PathBuf },
    /// Penalty certificate.
    Certify { instance: PathBuf },
    /// Recession condition check.
    Recession { instance: PathBuf },
    /// Squared-ℓ2 gap trace.
    Asymptotic { instance: PathBuf },
    /// Deterministic corpus suite.
    Selftest,
}

/// The configuration embedded in every output. Worker count is left out
/// so that outputs do not depend on it.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    command: &'static str,
    norm: Norm,
    tol: f64,
    caps: Caps,
    seed: u64,
    format: Format,
    #[serde(with = "serde_rat")]
    pitch: Rational,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::ResourceLimit { .. } => 2,
            Error::HypothesisViolated(_) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 1, message: msg.into() }
}

fn parse_caps(spec: Option<&str>, env: Option<&str>) -> Result<Caps, Failure> {
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| usage(format!("bad cap value {s:?}")));
    let mut caps = Caps::default();
    if let Some(spec) = spec {
        if let Ok(v) = spec.trim().parse::<u64>() {
            caps = Caps::uniform(v);
        } else {
            for part in spec.split(',') {
                let (k, v) = part.split_once('=').ok_or_else(|| usage(format!("bad cap {part:?}")))?;
                let v = num(v)?;
                match k.trim() {
                    "basis" => caps.basis_cap = v,
                    "node" => caps.node_cap = v,
                    "grid" => caps.grid_cap = v,
                    "active" => caps.active_set_cap = v,
                    "enum" => caps.enum_cap = v,
                    "iter" => caps.iter_cap = v,
                    other => return Err(usage(format!("unknown cap {other:?}"))),
                }
            }
        }
    }
    if let Some(v) = env {
        caps = Caps::uniform(num(v)?);
    }
    for (name, v) in [
        ("basis", caps.basis_cap),
        ("node", caps.node_cap),
        ("grid", caps.grid_cap),
        ("active", caps.active_set_cap),
        ("enum", caps.enum_cap),
        ("iter", caps.iter_cap),
    ] {
        if v == 0 {
            return Err(usage(format!("cap {name} must be positive")));
        }
    }
    Ok(caps)
}

fn rational(s: &str, what: &str) -> Result<Rational, Failure> {
    parse_rational(s).map_err(|e| usage(format!("--{what}: {e}")))
}

fn schedule(opts: &Opts) -> Result<Vec<Rational>, Failure> {
    if let Some(s) = &opts.schedule {
        return s.split(',').map(|v| rational(v, "schedule")).collect();
    }
    let start = rational(opts.rho.as_deref().unwrap_or("1/4"), "rho")?;
    let end = rational(opts.rho_max.as_deref().unwrap_or("8"), "rho-max")?;
    if start <= Rational::from_integer(0.into()) || end < start {
        return Err(usage("need 0 < --rho <= --rho-max"));
    }
    let mut out = vec![];
    let mut r = start;
    while r <= end {
        out.push(r.clone());
        r *= Rational::from_integer(2.into());
    }
    Ok(out)
}

pub fn instance_hash(inst: &ProblemInstance) -> String {
    hex::encode(Sha256::digest(io::canonical_json(inst).as_bytes()))
}

struct Output {
    /// Human summary for stdout.
    summary: String,
    /// Machine payload: JSON value or CSV text.
    json: Value,
    csv: Option<String>,
    ok: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results always serialize")
}

fn load(path: &Path) -> Result<ProblemInstance, Failure> {
    io::load_instance(path).map_err(Failure::from)
}

fn run(cmd: &Command, opts: &Opts, settings: &Settings, norm: Norm, pitch: &Rational) -> Result<(Output, Option<ProblemInstance>), Failure> {
    let oracle = OracleGrid {
        radius: match &opts.delta {
            Some(d) => rational(d, "delta")?,
            None => OracleGrid::default().radius,
        },
        pitch: pitch.clone(),
    };
    let class = opts.class.as_deref().map(Class::parse).transpose()?;
    let out = |summary: String, json: Value| Output { summary, json, csv: None, ok: true };
    Ok(match cmd {
        Command::Validate { instance } => {
            let inst = load(instance)?;
            let s = format!(
                "{}: valid, n = {}, m = {}, p = {}, {} integer, {} objective",
                inst.name,
                inst.n(),
                inst.m(),
                inst.p(),
                inst.integer.len(),
                inst.kind().name()
            );
            (out(s, json!({ "valid": true, "n": inst.n(), "m": inst.m(), "p": inst.p() })), Some(inst))
        }
        Command::Relax { instance } => {
            let inst = load(instance)?;
            let r = continuous_relaxation(&inst, settings)?;
            (out(format!("z_R = {}", r.z), to_value(&r)), Some(inst))
        }
        Command::Solve { instance } => {
            let inst = load(instance)?;
            let r = solve_mip(&inst, settings)?;
            (out(format!("{:?}: z_IP = {}", r.status, r.z), to_value(&r)), Some(inst))
        }
        Command::Valuefn { instance } => {
            let inst = load(instance)?;
            let delta = rational(opts.delta.as_deref().unwrap_or("1"), "delta")?;
            let g = build_grid(&inst, &delta, Some(pitch), norm, settings)?;
            let feasible = g.feasible().count();
            let csv = samples_csv(&g.samples, inst.m(), inst.n())?;
            let mut o = out(format!("{} samples, {feasible} feasible", g.samples.len()), to_value(&g));
            o.csv = Some(csv);
            (o, Some(inst))
        }
        Command::Constants { instance } => {
            let inst = load(instance)?;
            let relax = continuous_relaxation(&inst, settings)?;
            let cl = class.unwrap_or_else(|| Class::of(&inst));
            let c = compute_constants(&inst, cl, &relax, norm, pitch, settings)?;
            let lines: Vec<String> = c
                .quantities()
                .iter()
                .map(|q| format!("{} = {} (~{:.6}, {:?})", q.name, q.value, q.approx, q.provenance))
                .collect();
            (out(lines.join("\n"), json!({ "class": cl, "constants": c, "quantities": c.quantities() })), Some(inst))
        }
        Command::Salr { instance } => {
            let inst = load(instance)?;
            let rho = rational(opts.rho.as_deref().ok_or_else(|| usage("salr needs --rho"))?, "rho")?;
            let ev = SalrEvaluator::new(&inst, norm, &oracle, settings)?;
            let (z, fid) = ev.eval(&rho)?;
            let mut payload = json!({ "rho": rho.to_string(), "z_salr": z, "fidelity": fid });
            let mut s = format!("z_SALR({rho}) = {z} ({fid:?})");
            if let Some(steps) = opts.ascent {
                let t = saldual::ald_ascent(&inst, &rho, Augmenting::Norm(norm), steps, &Rational::from_integer(1.into()), settings)?;
                s.push_str(&format!("\nbest ascent value {} after {} steps", t.best, t.steps.len()));
                payload["ascent"] = to_value(&t);
            }
            (out(s, payload), Some(inst))
        }
        Command::Sweep { instance } => {
            let inst = load(instance)?;
            let sw = rho_sweep(&inst, &schedule(opts)?, norm, &oracle, settings)?;
            let violations = saldual::sweep_violations(&sw, settings);
            let s = sw
                .records
                .iter()
                .map(|r| format!("rho = {}: gap = {}", r.rho, r.gap))
                .collect::<Vec<_>>()
                .join("\n");
            let o = Output {
                summary: s,
                csv: Some(sweep_csv(&sw)?),
                json: json!({ "sweep": sw, "violations": violations }),
                ok: violations.is_empty(),
            };
            (o, Some(inst))
        }
        Command::Certify { instance } => {
            let inst = load(instance)?;
            let o = CertifyOptions {
                class,
                pitch: pitch.clone(),
                oracle,
                ..CertifyOptions::default()
            };
            let c = certify(&inst, norm, &o, settings)?;
            let s = format!(
                "{:?}: rho* = {} (~{:.6}), gap at {} = {}, verdict {:?}",
                c.class,
                c.rho_star,
                sharp_ald::exactnum::to_f64(&c.rho_star),
                c.certified_rho,
                c.gap_at_certified,
                c.verdict
            );
            (out(s, to_value(&c)), Some(inst))
        }
        Command::Recession { instance } => {
            let inst = load(instance)?;
            let r = check_recession_condition(&inst)?;
            let s = if r.holds { "recession condition holds".to_string() } else { format!("recession condition fails: {}", r.reason) };
            (out(s, to_value(&r)), Some(inst))
        }
        Command::Asymptotic { instance } => {
            let inst = load(instance)?;
            let sched = match (&opts.schedule, &opts.rho) {
                (None, None) => geometric_schedule(&Rational::from_integer(1.into()), &Rational::from_integer(10.into()), 5),
                _ => schedule(opts)?,
            };
            let t = asymptotic_experiment(&inst, &sched, settings)?;
            let s = t
                .records
                .iter()
                .map(|r| format!("rho = {}: gap = {}", r.rho, r.gap))
                .collect::<Vec<_>>()
                .join("\n");
            (out(s, to_value(&t)), Some(inst))
        }
        Command::Selftest => {
            let r = selftest::run(opts.seed, settings)?;
            let failed: Vec<&str> = r.instances.iter().filter(|i| !i.passed).map(|i| i.instance.as_str()).collect();
            let s = if r.passed {
                format!("selftest passed on {} instances", r.instances.len())
            } else {
                format!("selftest failed on {}", failed.join(", "))
            };
            let o = Output { summary: s, ok: r.passed, json: to_value(&r), csv: None };
            (o, None)
        }
    })
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate { .. } => "validate",
        Command::Relax { .. } => "relax",
        Command::Solve { .. } => "solve",
        Command::Valuefn { .. } => "valuefn",
        Command::Constants { .. } => "constants",
        Command::Salr { .. } => "salr",
        Command::Sweep { .. } => "sweep",
        Command::Certify { .. } => "certify",
        Command::Recession { .. } => "recession",
        Command::Asymptotic { .. } => "asymptotic",
        Command::Selftest => "selftest",
    }
}

fn machine_text(config: &RunConfig, hash: Option<&str>, o: &Output) -> String {
    match (config.format, &o.csv) {
        (Format::Csv, Some(csv)) => {
            let cfg = serde_json::to_string(config).expect("config serializes");
            format!("# config: {cfg}\n# instance_sha256: {}\n{csv}", hash.unwrap_or("none"))
        }
        _ => {
            let env = json!({
                "config": config,
                "instance_sha256": hash,
                "result": o.json,
            });
            serde_json::to_string_pretty(&env).expect("output serializes") + "\n"
        }
    }
}

fn main_inner(cli: Cli) -> Result<bool, Failure> {
    let opts = &cli.opts;
    let norm = Norm::parse(&opts.norm)?;
    let env = std::env::var(CAP_ENV).ok();
    let caps = parse_caps(opts.caps.as_deref(), env.as_deref())?;
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(usage("--tol must be positive"));
    }
    let pitch = rational(&opts.pitch, "pitch")?;
    let settings = Settings {
        caps: caps.clone(),
        tol: opts.tol,
        ..Settings::default()
    };
    let config = RunConfig {
        command: command_name(&cli.command),
        norm,
        tol: opts.tol,
        caps,
        seed: opts.seed,
        format: opts.format,
        pitch: pitch.clone(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if opts.workers > 0 {
        pool = pool.num_threads(opts.workers);
    }
    let pool = pool.build().map_err(|e| usage(format!("worker pool: {e}")))?;
    let (o, inst) = pool.install(|| run(&cli.command, opts, &settings, norm, &pitch))?;
    let hash = inst.as_ref().map(instance_hash);
    println!("{}", o.summary);
    if let Some(path) = &opts.out {
        let text = machine_text(&config, hash.as_deref(), &o);
        if path.as_os_str() == "-" {
            print!("{text}");
        } else {
            std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(o.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
