use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use akpz::config::Config;
use akpz::io::{state_to_string, read_state, TraceWriter};
use akpz::stats::{self, Event};
use akpz::suite::{self, Suite};
use akpz::tiling;
use akpz::{Error, Result};
use akpz_core::dynamics::{aztec_shuffle, parallel_update, seq_update, Ctmc, StepFamily, StepLaw};
use akpz_core::geometry::{density, limit_shape, omega, MacroPoint};
use akpz_core::kernel::{kernel_spacetime_with, KernelOptions, Repr};
use akpz_core::{InterlacingArray, LozengeType, RngStream, SpaceTimePoint};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "akpz", version, about = "Anisotropic KPZ growth on interlacing arrays")]
struct Cli {
    /// Worker threads for replica ensembles (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (else config file, else $AKPZ_SEED, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Chain {
    Ctmc,
    Seq,
    Parallel,
    Aztec,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReprArg {
    Auto,
    Contour,
    Charlier,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Variance,
    Shape,
    Covariance,
    Freq,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Svg,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a chain from the packed state and write the final array as JSON.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        /// Time (ctmc) or number of steps (seq, parallel); ignored by aztec.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_enum)]
        chain: Option<Chain>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// NDJSON event log (ctmc only).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Step parameter of the discrete chains (default 0.5).
        #[arg(long)]
        beta: Option<f64>,
        /// bernoulli-right | bernoulli-left | geometric-right | geometric-left (seq only).
        #[arg(long)]
        family: Option<String>,
    },
    /// Evaluate the correlation kernel at two space-time points `x,n,t`.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        p1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        p2: Option<String>,
        #[arg(long, value_enum)]
        repr: Option<ReprArg>,
    },
    /// CSV table of the limit shape at fixed tau over the rough region.
    LimitShape {
        #[arg(long)]
        tau: Option<f64>,
        /// Grid points per axis over (0, 4 tau].
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimators; prints a JSON report, exit 1 on failure.
    Stats {
        #[arg(value_enum)]
        mode: Mode,
        #[arg(long)]
        replicas: Option<usize>,
        /// variance: ray nu/tau
        #[arg(long)]
        lambda: Option<f64>,
        /// variance: ray eta/tau
        #[arg(long)]
        c: Option<f64>,
        /// variance: comma separated times
        #[arg(long)]
        times: Option<String>,
        /// shape, covariance: macroscopic point `nu,eta,tau`
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// covariance: second point
        #[arg(long, allow_hyphen_values = true)]
        point2: Option<String>,
        /// shape, covariance: scale L
        #[arg(long)]
        scale: Option<f64>,
        /// freq: `x,n,t[,I|II|III]` entries separated by `;`
        #[arg(long, allow_hyphen_values = true)]
        event: Option<String>,
        /// Relative tolerance (variance 0.2, shape 0.02, covariance 0.25) or z limit (freq 4).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lozenge tiling of a saved state.
    Tiling {
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG pixels per lattice unit.
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Run an acceptance bundle: oracle, kernel, geometry, stats-fast, stats-slow.
    Suite { name: String },
    /// Same as `suite oracle`.
    Oracle,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(1)
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                s.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| usage(format!("not a number: {v:?}"))))
        .collect()
}

fn parse_point(s: &str) -> Result<SpaceTimePoint> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(usage(format!("expected x,n,t, got {s:?}")));
    }
    let x = parts[0].parse().map_err(|_| usage(format!("bad x in {s:?}")))?;
    let n = parts[1].parse().map_err(|_| usage(format!("bad n in {s:?}")))?;
    let t = parts[2].parse().map_err(|_| usage(format!("bad t in {s:?}")))?;
    SpaceTimePoint::new(x, n, t).map_err(|e| usage(e.to_string()))
}

fn parse_macro(s: &str) -> Result<MacroPoint> {
    let v = parse_list(s)?;
    if v.len() != 3 {
        return Err(usage(format!("expected nu,eta,tau, got {s:?}")));
    }
    MacroPoint::new(v[0], v[1], v[2]).map_err(|e| usage(e.to_string()))
}

fn parse_event(s: &str) -> Result<Event> {
    let mut points = Vec::new();
    let mut types = Vec::new();
    for item in s.split(';') {
        let parts: Vec<&str> = item.split(',').map(str::trim).collect();
        match parts.len() {
            3 => points.push(parse_point(item)?),
            4 => {
                points.push(parse_point(&parts[..3].join(","))?);
                types.push(match parts[3] {
                    "I" => LozengeType::I,
                    "II" => LozengeType::II,
                    "III" => LozengeType::III,
                    o => return Err(usage(format!("unknown lozenge type {o:?}"))),
                });
            }
            _ => return Err(usage(format!("expected x,n,t[,type], got {item:?}"))),
        }
    }
    if types.is_empty() {
        Ok(Event::occupied(points))
    } else if types.len() == points.len() {
        Ok(Event::lozenges(points, types))
    } else {
        Err(usage("give a lozenge type for every point or for none"))
    }
}

fn parse_family(s: &str, beta: f64) -> Result<StepFamily> {
    Ok(match s {
        "bernoulli-right" => StepFamily::BernoulliRight(beta),
        "bernoulli-left" => StepFamily::BernoulliLeft(beta),
        "geometric-right" => StepFamily::GeometricRight(beta),
        "geometric-left" => StepFamily::GeometricLeft(beta),
        o => return Err(usage(format!("unknown step family {o:?}"))),
    })
}

fn steps(t: f64) -> Result<usize> {
    if t < 0.0 || t.fract() != 0.0 {
        return Err(usage("discrete chains need a whole number of steps"));
    }
    Ok(t as usize)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let jobs: Option<usize> = match cli.jobs {
        Some(j) => Some(j),
        None => cfg.get("jobs")?,
    };
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    let seed = cfg.seed(cli.seed)?;
    match cli.cmd {
        Cmd::Simulate {
            n,
            t,
            chain,
            out,
            trace,
            beta,
            family,
        } => {
            let n: usize = cfg.require(n, "n")?;
            let t: f64 = cfg.pick(t, "t", 0.0)?;
            let chain = match chain {
                Some(c) => c,
                None => match cfg.raw("chain") {
                    Some(s) => Chain::from_str(s, true).map_err(|_| usage(format!("unknown chain {s:?}")))?,
                    None => Chain::Ctmc,
                },
            };
            let trace: Option<PathBuf> = match trace {
                Some(p) => Some(p),
                None => cfg.get("trace")?,
            };
            let out: Option<PathBuf> = match out {
                Some(p) => Some(p),
                None => cfg.get("out")?,
            };
            let beta: f64 = cfg.pick(beta, "beta", 0.5)?;
            let family: String = cfg.pick(family, "family", "bernoulli-right".to_string())?;
            if trace.is_some() && !matches!(chain, Chain::Ctmc) {
                return Err(usage("--trace is only available for the ctmc chain"));
            }
            if !(t >= 0.0) || !t.is_finite() {
                return Err(usage("--t must be finite and >= 0"));
            }
            let mut rng = RngStream::new(seed, 0).rng();
            let state = match chain {
                Chain::Ctmc => {
                    let mut sim = Ctmc::packed(n)?;
                    match &trace {
                        Some(path) => {
                            let mut w = TraceWriter::create(path)?;
                            let mut failed = None;
                            sim.advance_traced(t, &mut rng, |e| {
                                if failed.is_none() {
                                    if let Err(err) = w.event(&e) {
                                        failed = Some(err);
                                    }
                                }
                            })?;
                            if let Some(err) = failed {
                                return Err(err);
                            }
                            w.finish()?;
                        }
                        None => sim.advance(t, &mut rng)?,
                    }
                    sim.into_state()
                }
                Chain::Seq => {
                    let law = StepLaw::uniform(parse_family(&family, beta)?, n)?;
                    let mut a = InterlacingArray::packed(n)?;
                    for _ in 0..steps(t)? {
                        a = seq_update(&a, &law, &mut rng)?;
                    }
                    a
                }
                Chain::Parallel => {
                    let k = steps(t)?;
                    let betas = vec![beta; k + n];
                    let alphas = vec![1.0; n];
                    let mut a = InterlacingArray::packed(n)?;
                    for s in 0..k {
                        a = parallel_update(&a, &betas, &alphas, s, &mut rng)?;
                    }
                    a
                }
                Chain::Aztec => aztec_shuffle(n, beta, &mut rng)?,
            };
            emit(out.as_deref(), &state_to_string(&state)?)?;
            Ok(true)
        }
        Cmd::Kernel { p1, p2, repr } => {
            let p1 = parse_point(&cfg.require(p1, "p1")?)?;
            let p2 = parse_point(&cfg.require(p2, "p2")?)?;
            let repr = match repr {
                Some(r) => r,
                None => match cfg.raw("repr") {
                    Some(s) => ReprArg::from_str(s, true).map_err(|_| usage(format!("unknown repr {s:?}")))?,
                    None => ReprArg::Auto,
                },
            };
            let with = |r: Repr| {
                let opts = KernelOptions {
                    repr: r,
                    ..KernelOptions::default()
                };
                kernel_spacetime_with(&p1, &p2, &opts)
            };
            let (v, used) = match repr {
                ReprArg::Contour => (with(Repr::Contour)?, "contour"),
                ReprArg::Charlier => (with(Repr::Charlier)?, "charlier"),
                ReprArg::Auto => match with(Repr::Contour) {
                    Ok(v) => (v, "contour"),
                    Err(_) if p1.n == p2.n && p1.t == p2.t && p1.t > 0.0 => (with(Repr::Charlier)?, "charlier"),
                    Err(e) => return Err(e.into()),
                },
            };
            let j = json!({ "value": v.value, "est_error": v.est_error, "repr": used });
            println!("{j}");
            Ok(true)
        }
        Cmd::LimitShape { tau, grid, out } => {
            let tau: f64 = cfg.pick(tau, "tau", 1.0)?;
            let grid: usize = cfg.pick(grid, "grid", 41)?;
            let out: Option<PathBuf> = match out {
                Some(p) => Some(p),
                None => cfg.get("out")?,
            };
            if !(tau > 0.0) || grid < 2 {
                return Err(usage("need tau > 0 and grid >= 2"));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "nu", "eta", "tau", "rho", "h", "h_nu", "h_eta", "h_tau", "re_omega", "im_omega",
            ])?;
            let span = 4.0 * tau;
            for i in 1..=grid {
                for j in 1..=grid {
                    let nu = span * i as f64 / grid as f64;
                    let eta = span * j as f64 / grid as f64;
                    let p = MacroPoint::new(nu, eta, tau)?;
                    if !p.in_domain() {
                        continue;
                    }
                    let v = limit_shape(&p)?;
                    let o = omega(&p)?;
                    let row = [nu, eta, tau, density(&p)?, v.h, v.h_nu, v.h_eta, v.h_tau, o.re, o.im];
                    w.write_record(row.iter().map(|x| format!("{x}")))?;
                }
            }
            let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
            emit(out.as_deref(), &String::from_utf8_lossy(&bytes))?;
            Ok(true)
        }
        Cmd::Stats {
            mode,
            replicas,
            lambda,
            c,
            times,
            point,
            point2,
            scale,
            event,
            tol,
            out,
        } => {
            let out: Option<PathBuf> = match out {
                Some(p) => Some(p),
                None => cfg.get("out")?,
            };
            let report = match mode {
                Mode::Variance => {
                    let lambda: f64 = cfg.pick(lambda, "lambda", 1.0)?;
                    let c: f64 = cfg.pick(c, "c", 1.0)?;
                    let times = parse_list(&cfg.pick(times, "times", "50,100,200,400".to_string())?)?;
                    let replicas: usize = cfg.pick(replicas, "replicas", 200)?;
                    let tol: f64 = cfg.pick(tol, "tol", 0.2)?;
                    let spec = json!({ "mode": "variance", "lambda": lambda, "c": c, "times": times, "replicas": replicas, "seed": seed, "tol": tol });
                    stats::variance_slope(lambda, c, &times, replicas, seed)?.report(spec, tol)
                }
                Mode::Shape => {
                    let p = parse_macro(&cfg.pick(point, "point", "1,1,1".to_string())?)?;
                    let l: f64 = cfg.pick(scale, "scale", 200.0)?;
                    let replicas: usize = cfg.pick(replicas, "replicas", 200)?;
                    let tol: f64 = cfg.pick(tol, "tol", 0.02)?;
                    let spec = json!({ "mode": "shape", "point": [p.nu, p.eta, p.tau], "scale": l, "replicas": replicas, "seed": seed, "tol": tol });
                    stats::shape_error(&p, l, replicas, seed)?.report(spec, tol)
                }
                Mode::Covariance => {
                    let p1 = parse_macro(&cfg.pick(point, "point", "1,1,1".to_string())?)?;
                    let p2 = parse_macro(&cfg.pick(point2, "point2", "1.5,0.8,1".to_string())?)?;
                    let l: f64 = cfg.pick(scale, "scale", 300.0)?;
                    let replicas: usize = cfg.pick(replicas, "replicas", 5000)?;
                    let tol: f64 = cfg.pick(tol, "tol", 0.25)?;
                    let spec = json!({ "mode": "covariance", "point": [p1.nu, p1.eta, p1.tau], "point2": [p2.nu, p2.eta, p2.tau], "scale": l, "replicas": replicas, "seed": seed, "tol": tol });
                    stats::covariance_pair(&p1, &p2, l, replicas, seed)?.report(spec, tol)
                }
                Mode::Freq => {
                    let text: String = cfg.require(event, "event")?;
                    let ev = parse_event(&text)?;
                    let replicas: usize = cfg.pick(replicas, "replicas", 100_000)?;
                    let tol: f64 = cfg.pick(tol, "tol", 4.0)?;
                    let spec = json!({ "mode": "freq", "event": ev.label(), "replicas": replicas, "seed": seed, "z_max": tol });
                    stats::frequency_vs_determinant(&[ev], replicas, seed)?.report(spec, tol)
                }
            };
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
            Ok(report.pass)
        }
        Cmd::Tiling {
            state,
            format,
            out,
            scale,
        } => {
            let state: PathBuf = cfg.require(state, "state")?;
            let format = match format {
                Some(f) => f,
                None => match cfg.raw("format") {
                    Some(s) => Format::from_str(s, true).map_err(|_| usage(format!("unknown format {s:?}")))?,
                    None => Format::Svg,
                },
            };
            let out: Option<PathBuf> = match out {
                Some(p) => Some(p),
                None => cfg.get("out")?,
            };
            let scale: f64 = cfg.pick(scale, "scale", 20.0)?;
            let a = read_state(&state)?;
            let tiles = tiling::lozenges(&a, tiling::default_window(&a))?;
            let text = match format {
                Format::Svg => tiling::to_svg(&tiles, scale),
                Format::Json => tiling::to_json(&tiles)?,
            };
            emit(out.as_deref(), &text)?;
            Ok(true)
        }
        Cmd::Suite { name } => run_suite(name.parse()?, seed),
        Cmd::Oracle => run_suite(Suite::Oracle, seed),
    }
}

fn run_suite(s: Suite, seed: u64) -> Result<bool> {
    let report = suite::run(s, seed)?;
    for c in &report.checks {
        eprintln!("{}", c.line());
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.pass)
}
