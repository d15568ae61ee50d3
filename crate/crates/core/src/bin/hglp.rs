use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hglp::conv::{area_integral, discrete_square, g_function, Field, ScaleGrid};
use hglp::group::validate_group;
use hglp::harness::experiment::{prepare_kernel, quad_points, reproducing_pair_by_name};
use hglp::harness::{inequality_fuzz, run_experiment, validation_rows, ExperimentConfig, FuzzKind, Report, ReproduceSettings};
use hglp::kernels::{corr_decay, kernel_by_name, HeatConfig};
use hglp::{Error, GridSpec, GroupSpec, Result, SampledFunction};

#[derive(Parser)]
#[command(name = "hglp", version, about = "Square functions, maximal functions and reproducing formulas on homogeneous groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Checks the group axioms and estimates the quasi-triangle constant.
    ValidateGroup {
        name: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Correlation decay table C(eta, psi, t, L).
    Decay {
        #[arg(long, default_value = "heisenberg")]
        group: String,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        psi: String,
        #[arg(long = "L", default_value_t = 0.0)]
        l: f64,
        /// Comma-separated scales, each a number or `b^k`.
        #[arg(long, default_value = "1,2,4,8,16")]
        scales: String,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long, default_value_t = 1e-3)]
        tail_tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Littlewood-Paley g-function of `--in` with kernel `--kernel`.
    Gfun(SquareArgs),
    /// Lusin area integral.
    Area(SquareArgs),
    /// Discrete square function over `t = b^j`.
    Dsq {
        #[command(flatten)]
        common: SquareArgs,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
    },
    /// Truncated synthesis residuals of a reproducing pair.
    Reproduce {
        #[arg(long, default_value = "heisenberg")]
        group: String,
        #[arg(long, default_value = "heat:1,1")]
        pair: String,
        /// Lower truncation, a number or `b^k`.
        #[arg(long, default_value = "2^-5", value_parser = parse_scale)]
        eps: f64,
        /// Upper truncation, a number or `b^k`.
        #[arg(long = "B", default_value = "2^5", value_parser = parse_scale)]
        big_b: f64,
        /// Comma-separated probe kernels, at least three.
        #[arg(long, default_value = "bump,bump@0.8,bump@1.25")]
        probes: String,
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
        #[arg(long, default_value_t = 17)]
        points: usize,
        #[arg(long, default_value_t = 4)]
        per_octave: usize,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Writes the fitted pair's manifest as JSON.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Norm-equivalence band from a JSON config.
    Equivalence {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Random checks of elementary inequalities.
    Fuzz {
        #[arg(long, value_parser = parse_fuzz)]
        kind: FuzzKind,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "heisenberg")]
        group: String,
        #[command(flatten)]
        out: Output,
    },
    /// Any experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    /// CSV destination; stdout when absent.
    #[arg(long = "out")]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct SquareArgs {
    #[arg(long, default_value = "heisenberg")]
    group: String,
    /// Kernel name, for example `heat:1` or `dgauss:1,0,0`.
    #[arg(long)]
    kernel: String,
    /// A raw sampled-field file, or a kernel name used as the function.
    #[arg(long = "in")]
    input: String,
    #[arg(long, default_value_t = 3)]
    octaves: i32,
    #[arg(long, default_value_t = 2)]
    per_octave: usize,
    #[arg(long, default_value_t = 3.0)]
    radius: f64,
    #[arg(long, default_value_t = 9)]
    points: usize,
    #[command(flatten)]
    out: Output,
}

fn parse_scale(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('^') {
        Some((b, k)) => {
            let b: f64 = b.trim().parse().map_err(|_| format!("bad base in {s:?}"))?;
            let k: f64 = k.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            b.powf(k)
        }
        None => s.trim().parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not a positive number"))
    }
}

fn parse_fuzz(s: &str) -> std::result::Result<FuzzKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn group(name: &str) -> Result<GroupSpec> {
    GroupSpec::builtin(name).map_err(|e| Error::Config(e.to_string()))
}

fn sink(out: &Output) -> Result<Box<dyn Write>> {
    Ok(match &out.path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit(report: &Report, out: &Output) -> Result<u8> {
    report.write_csv(sink(out)?)?;
    eprintln!("{}", report.summary());
    Ok(report.exit_code() as u8)
}

fn emit_field(f: &SampledFunction, out: &Output) -> Result<u8> {
    f.write_csv(sink(out)?)?;
    Ok(0)
}

fn square(args: &SquareArgs, op: &dyn Fn(&GroupSpec, Field<'_>, &hglp::kernels::KernelSpec, &GridSpec) -> Result<SampledFunction>) -> Result<u8> {
    let g = group(&args.group)?;
    let heat = HeatConfig::default();
    let kappa = prepare_kernel(&g, kernel_by_name(&g, &args.kernel, &heat)?)?;
    let out = GridSpec::for_group(&g, args.radius, args.points).map_err(|e| Error::Config(e.to_string()))?;
    let result = if Path::new(&args.input).is_file() {
        let f = SampledFunction::read_raw(std::fs::File::open(&args.input)?)?;
        op(&g, Field::sampled(&f), &kappa, &out)?
    } else {
        let f = kernel_by_name(&g, &args.input, &heat)?.with_quad_points(quad_points(&g))?;
        op(&g, Field::kernel(&f, 1.0), &kappa, &out)?
    };
    emit_field(&result, &args.out)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::ValidateGroup { name, samples, seed, out } => {
            let mut g = group(&name)?;
            let rep = validate_group(&mut g, samples, seed)?;
            let mut report = Report::default();
            report.extend(validation_rows(&rep, "validate-group"));
            emit(&report, &out)
        }
        Command::Decay {
            group: gname,
            eta,
            psi,
            l,
            scales,
            points,
            tail_tol,
            out,
        } => {
            let g = group(&gname)?;
            let heat = HeatConfig::default();
            let eta = kernel_by_name(&g, &eta, &heat)?;
            let psi = kernel_by_name(&g, &psi, &heat)?;
            let ts = scales
                .split(',')
                .map(parse_scale)
                .collect::<std::result::Result<Vec<f64>, String>>()
                .map_err(Error::Config)?;
            let table = corr_decay(&g, &eta, &psi, l, &ts, points, tail_tol)?;
            table.write_csv(sink(&out)?)?;
            Ok(0)
        }
        Command::Gfun(args) => {
            let grid = ScaleGrid::dyadic(args.octaves, args.per_octave).map_err(|e| Error::Config(e.to_string()))?;
            square(&args, &|g, f, k, out| g_function(g, f, k, &grid, out))
        }
        Command::Area(args) => {
            let grid = ScaleGrid::dyadic(args.octaves, args.per_octave).map_err(|e| Error::Config(e.to_string()))?;
            square(&args, &|g, f, k, out| area_integral(g, f, k, &grid, out))
        }
        Command::Dsq { common, b, q } => {
            let range = (-common.octaves, common.octaves);
            square(&common, &|g, f, k, out| discrete_square(g, f, k, b, q, range, out))
        }
        Command::Reproduce {
            group: gname,
            pair,
            eps,
            big_b,
            probes,
            radius,
            points,
            per_octave,
            threshold,
            manifest,
            out,
        } => {
            let g = group(&gname)?;
            let heat = HeatConfig::default();
            let mut pair = reproducing_pair_by_name(&g, &pair, per_octave)?;
            let probes = probes
                .split(',')
                .map(|n| kernel_by_name(&g, n, &heat)?.with_quad_points(if g.dim() >= 3 { 25 } else { 81 }))
                .collect::<Result<Vec<_>>>()?;
            let half = (points - 1) / 2 + 1;
            let s = ReproduceSettings {
                eps,
                big_b,
                widenings: 3,
                out: GridSpec::for_group(&g, radius, points).map_err(|e| Error::Config(e.to_string()))?,
                probe_out: GridSpec::for_group(&g, radius, (half + 1 - half % 2).max(3)).map_err(|e| Error::Config(e.to_string()))?,
                residual_bound: threshold,
            };
            let mut report = Report::default();
            report.extend(hglp::harness::reproduce_check(&g, &mut pair, &probes, &s, "reproduce")?);
            if let Some(path) = manifest {
                pair.write_manifest(path)?;
            }
            emit(&report, &out)
        }
        Command::Equivalence { config, out } | Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = Output {
                path: out.path.or_else(|| cfg.output.as_ref().map(PathBuf::from)),
            };
            emit(&run_experiment(&cfg)?, &out)
        }
        Command::Fuzz {
            kind,
            n,
            seed,
            group: gname,
            out,
        } => {
            let mut g = group(&gname)?;
            validate_group(&mut g, 10_000, seed)?;
            let mut report = Report::default();
            report.push(inequality_fuzz(&g, kind, n, seed, "fuzz")?);
            emit(&report, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Error::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Error::HypothesisNotMet(m)) => {
            eprintln!("skipped, hypothesis not met: {m}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
