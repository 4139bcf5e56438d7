//! `caustica`: runs one experiment, prints a PASS/FAIL line per check and
//! writes its data as CSV with a JSON sidecar.

mod args;
mod emit;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use caustica::cancellation::scon_probe;
use caustica::circular::{circular_transform_quadrature_with, transform_multiplier, Interpolation};
use caustica::field::{read_csf2, write_csf2, write_csv, ScalarField2D};
use caustica::geodesic::Vector;
use caustica::suite::{self, Check, ModelSpec, Report, Table};
use caustica::Execution;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use emit::Outputs;

#[derive(Parser)]
#[command(name = "caustica", version, about = "Circular and X-ray transform experiments near fold caustics")]
struct Cli {
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-radius circular transform.
    Circ {
        #[command(subcommand)]
        op: Circ,
    },
    /// Cancellation of singularities by a packet pair.
    Cancel(CancelArgs),
    /// Conjugate points, classification, loci and conormals.
    Conj(ConjArgs),
    /// Canonical-graph rank and homogeneity.
    GraphTest(GraphArgs),
    /// Kernel singularity fit, or the diagonal symbol with --diagonal.
    KernelFit(FitArgs),
    /// Great-circle transform on the sphere.
    Sphere(SphereArgs),
    /// Strong conormal condition probe.
    Scon(SconArgs),
}

#[derive(Subcommand)]
enum Circ {
    /// Quadrature and multiplier realizations, or their agreement.
    Apply(ApplyArgs),
    /// Bump-probed kernel of the normal operator.
    Kernel(KernelArgs),
    /// Split into A0 + F+ + F- and the residual decay.
    Decompose(DecomposeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Impl {
    Quadrature,
    Multiplier,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Interp {
    Bilinear,
    Cubic,
}

#[derive(clap::Args)]
struct ApplyArgs {
    #[arg(long = "impl", value_enum, default_value = "both")]
    realization: Impl,
    /// CSF2 input; without it a Gaussian on the configured grid is used.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// CSF2 output with --in, the centre-row CSV otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also export the transformed field as x, y, value.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 16.0)]
    period: f64,
    #[arg(long, default_value_t = 1024)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "cubic")]
    interp: Interp,
}

#[derive(clap::Args)]
struct KernelArgs {
    #[arg(long, default_value_t = 400)]
    samples: usize,
    #[arg(long, default_value_t = 2048)]
    n: usize,
    #[arg(long, default_value_t = 8.0)]
    period: f64,
    #[arg(long, default_value_t = 0.012)]
    width: f64,
    #[arg(long, default_value = "kernel.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct DecomposeArgs {
    #[arg(long, value_parser = args::sweep, default_value = "16,32,64,128")]
    k: ::std::vec::Vec<f64>,
    #[arg(long, default_value_t = 2)]
    terms: usize,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 10.0)]
    period: f64,
    #[arg(long, value_parser = args::direction, default_value = "0.6,0.8")]
    direction: [f64; 2],
    #[arg(long, default_value = "decompose.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CancelArgs {
    #[arg(long, value_parser = args::sweep, default_value = "16,32,64,128")]
    k: ::std::vec::Vec<f64>,
    /// Frequency of the absolute bound and the wrong-sign control.
    #[arg(long, default_value_t = 32.0)]
    control_k: f64,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 10.0)]
    period: f64,
    #[arg(long, default_value = "cancel.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConjCheck {
    Times,
    Classify,
    Locus,
    Conormal,
}

#[derive(clap::Args)]
struct ConjArgs {
    /// circle2d, magnetic3d[:α], sphere, product, lens or conformal:FILE.
    #[arg(long, value_parser = args::model)]
    model: Option<ModelSpec>,
    #[arg(long, value_parser = args::floats, requires = "model")]
    p: Option<::std::vec::Vec<f64>>,
    /// ring:N[:elevation], fib:N, or explicit directions a,b[,c];...
    #[arg(long, requires = "model")]
    patch: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    /// Reference run when no model is given.
    #[arg(long, value_enum, default_value = "times", conflicts_with = "model")]
    check: ConjCheck,
    /// Directions sampled by the locus and conormal checks.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value = "locus.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct GraphArgs {
    #[arg(long, value_parser = args::model)]
    model: Option<ModelSpec>,
    #[arg(long, value_parser = args::floats, requires = "model")]
    p: Option<::std::vec::Vec<f64>>,
    #[arg(long, value_parser = args::floats, requires = "model")]
    dir: Option<::std::vec::Vec<f64>>,
    #[arg(long, default_value_t = 1e-4)]
    scale: f64,
    #[arg(long, default_value = "graph.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long, value_parser = args::model, conflicts_with = "diagonal")]
    model: Option<ModelSpec>,
    #[arg(long, value_parser = args::floats, requires = "model")]
    p: Option<::std::vec::Vec<f64>>,
    /// Initial direction of the conjugate geodesic.
    #[arg(long, value_parser = args::floats, requires = "model")]
    dir: Option<::std::vec::Vec<f64>>,
    /// Direction of the slice through Σ(p); the normal by default.
    #[arg(long, value_parser = args::floats, requires = "model")]
    path: Option<::std::vec::Vec<f64>>,
    #[arg(long, value_parser = args::window, default_value = "0.01:0.25")]
    window: (f64, f64),
    #[arg(long, default_value_t = 14)]
    points: usize,
    /// Diagonal symbol of the circular model instead of the kernel fit.
    #[arg(long)]
    diagonal: bool,
    #[arg(long, value_parser = args::sweep, default_value = "32,64", requires = "diagonal")]
    k: ::std::vec::Vec<f64>,
    #[arg(long, value_parser = args::direction, default_value = "1,0.3", requires = "diagonal")]
    xi: [f64; 2],
    #[arg(long, default_value = "fit.json")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SphereArgs {
    /// `l,m`; repeatable. Every odd harmonic of degree 1 and 3 by default.
    #[arg(long, value_parser = args::harmonic)]
    harmonic: Vec<(usize, i64)>,
    #[arg(long, default_value_t = 100)]
    circles: usize,
    #[arg(long, default_value_t = 64)]
    n_lat: usize,
    #[arg(long, default_value_t = 128)]
    n_lon: usize,
    #[arg(long, default_value_t = 256)]
    m: usize,
    #[arg(long, default_value = "sphere.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expect {
    Holds,
    Fails,
}

#[derive(clap::Args)]
struct SconArgs {
    #[arg(long, value_parser = args::model)]
    model: Option<ModelSpec>,
    #[arg(long, value_parser = args::floats, requires = "model")]
    p: Option<::std::vec::Vec<f64>>,
    #[arg(long, value_parser = args::floats, requires = "model")]
    xi: Option<::std::vec::Vec<f64>>,
    #[arg(long, default_value_t = 8)]
    candidates: usize,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, value_enum, default_value = "holds", requires = "model")]
    expect: Expect,
    #[arg(long, default_value = "scon.csv")]
    out: PathBuf,
}

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn point(spec: &ModelSpec, p: Option<::std::vec::Vec<f64>>, what: &str) -> Vector {
    match p {
        None => spec.default_point(),
        Some(x) if x.len() == spec.dim() => Vector::from_vec(x),
        Some(x) => usage(
            ErrorKind::InvalidValue,
            format!("--{what} has {} entries, the model has dimension {}", x.len(), spec.dim()),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match args::threads() {
        Ok(t) => t,
        Err(e) => usage(ErrorKind::InvalidValue, format!("{e:#}")),
    };
    let exec = if threads == Some(1) {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match run(cli.command, cli.seed, exec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command, seed: u64, exec: Execution) -> anyhow::Result<bool> {
    match command {
        Command::Circ { op } => match op {
            Circ::Apply(a) => apply(a, seed, exec),
            Circ::Kernel(a) => {
                let cfg = suite::KernelConfig {
                    n: a.n,
                    period: a.period,
                    width: a.width,
                    samples: a.samples,
                    exec,
                    ..Default::default()
                };
                let r = suite::normal_kernel(&cfg)?;
                emit::finish("circ kernel", &r, seed, Value::Null, &Outputs::from(&a.out))
            }
            Circ::Decompose(a) => {
                let cfg = suite::DecomposeConfig {
                    n: a.n,
                    period: a.period,
                    terms: a.terms,
                    ks: a.k,
                    direction: a.direction,
                    exec,
                    ..Default::default()
                };
                let r = suite::decomposition(&cfg)?;
                emit::finish("circ decompose", &r, seed, Value::Null, &Outputs::from(&a.out))
            }
        },
        Command::Cancel(a) => {
            let mut cfg = suite::CancelConfig {
                ks: a.k,
                control_k: a.control_k,
                exec,
                ..Default::default()
            };
            cfg.pair.n = a.n;
            cfg.pair.period = a.period;
            let r = suite::cancellation(&cfg)?;
            emit::finish("cancel", &r, seed, Value::Null, &Outputs::from(&a.out))
        }
        Command::Conj(a) => conj(a, seed, exec),
        Command::GraphTest(a) => {
            let r = match a.model {
                None => suite::canonical_graph(exec)?,
                Some(spec) => {
                    let p = point(&spec, a.p, "p");
                    let dir = a.dir.unwrap_or_else(|| default_direction(&spec));
                    let dir = point(&spec, Some(dir), "dir");
                    suite::model_graph(&spec, &p, &dir, a.scale)?
                }
            };
            emit::finish("graph-test", &r, seed, Value::Null, &Outputs::from(&a.out))
        }
        Command::KernelFit(a) => kernel_fit(a, seed, exec),
        Command::Sphere(a) => {
            let cfg = suite::SphereConfig {
                n_lat: a.n_lat,
                n_lon: a.n_lon,
                circles: a.circles,
                m: a.m,
                seed,
                harmonics: (!a.harmonic.is_empty()).then_some(a.harmonic),
                exec,
            };
            let r = suite::sphere_kernel(&cfg)?;
            emit::finish("sphere", &r, seed, Value::Null, &Outputs::from(&a.out))
        }
        Command::Scon(a) => scon(a, seed),
    }
}

fn default_direction(spec: &ModelSpec) -> Vec<f64> {
    match spec {
        ModelSpec::Magnetic3d(_) | ModelSpec::Product => vec![0.8, 0.0, 0.6],
        ModelSpec::Sphere => vec![0.0, 1.0],
        ModelSpec::Lens | ModelSpec::Conformal(_) => vec![1.2f64.cos(), 1.2f64.sin()],
        ModelSpec::Circle2d => vec![1.0, 0.0],
    }
}

fn apply(a: ApplyArgs, seed: u64, exec: Execution) -> anyhow::Result<bool> {
    let interp = match a.interp {
        Interp::Bilinear => Interpolation::Bilinear,
        Interp::Cubic => Interpolation::Cubic,
    };
    let Some(input) = a.input else {
        if a.realization != Impl::Both {
            usage(ErrorKind::MissingRequiredArgument, "--impl quadrature|multiplier needs --in");
        }
        let cfg = suite::ApplyConfig {
            n: a.n,
            period: a.period,
            m: a.m,
            sigma: a.sigma,
            interp,
            exec,
        };
        let r = suite::apply_equivalence(&cfg)?;
        let out = a.out.unwrap_or_else(|| PathBuf::from("apply.csv"));
        return emit::finish("circ apply", &r, seed, Value::Null, &Outputs::from(&out));
    };
    let file = std::fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
    let f = read_csf2(std::io::BufReader::new(file))?;
    let quad = || -> anyhow::Result<ScalarField2D> {
        let q = circular_transform_quadrature_with(&f, a.m, interp, exec)?;
        Ok(if f.is_real() { q.into_real() } else { q })
    };
    let mult = || transform_multiplier().apply_with(&f, exec);
    let mut rep = Report::new("circular transform", Table::default());
    let result = match a.realization {
        Impl::Quadrature => quad()?,
        Impl::Multiplier => mult(),
        Impl::Both => {
            let q = quad()?;
            let m = mult();
            let rel = q.sub(&m).norm_l2() / m.norm_l2();
            rep.check(Check::below("relative L2 discrepancy", rel, 1e-5));
            q
        }
    };
    let finite = result.values().iter().all(|v| v.re.is_finite() && v.im.is_finite());
    rep.check(Check::holds("transformed samples are finite", finite, "finite"));
    rep.note("input", input.display());
    rep.note("n", f.grid().n());
    rep.note("period", f.grid().period());
    rep.note("m", a.m);
    let json_path = match &a.out {
        Some(out) => {
            let w = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
            write_csf2(&result, std::io::BufWriter::new(w))?;
            println!("wrote {}", out.display());
            out.with_extension("json")
        }
        None => input.with_extension("apply.json"),
    };
    if let Some(path) = &a.csv {
        write_field_csv(&result, path)?;
    }
    let outputs = Outputs {
        csv: None,
        json: json_path,
    };
    emit::finish("circ apply", &rep, seed, Value::Null, &outputs)
}

fn write_field_csv(f: &ScalarField2D, path: &Path) -> anyhow::Result<()> {
    let w = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(f, std::io::BufWriter::new(w))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn conj(a: ConjArgs, seed: u64, exec: Execution) -> anyhow::Result<bool> {
    let r = match a.model {
        Some(spec) => {
            let p = point(&spec, a.p, "p");
            let patch = a.patch.unwrap_or_else(|| "ring:16".into());
            let dirs = match suite::patch_directions(spec.dim(), &patch) {
                Ok(d) => d,
                Err(e) => usage(ErrorKind::InvalidValue, e),
            };
            suite::model_locus(&spec, &p, &dirs, a.t_max, exec)?
        }
        None => match a.check {
            ConjCheck::Times => suite::conjugate_detection(exec)?,
            ConjCheck::Classify => suite::classification(exec)?,
            ConjCheck::Locus => {
                let cfg = suite::LocusConfig {
                    samples: a.samples.unwrap_or(1000),
                    t_max: a.t_max,
                    exec,
                    ..Default::default()
                };
                suite::locus_geometry(&cfg)?
            }
            ConjCheck::Conormal => suite::conormal_geometry(a.samples.unwrap_or(100), exec)?,
        },
    };
    emit::finish("conj", &r, seed, Value::Null, &Outputs::from(&a.out))
}

fn kernel_fit(a: FitArgs, seed: u64, exec: Execution) -> anyhow::Result<bool> {
    if a.points < 12 {
        usage(ErrorKind::InvalidValue, "the fit needs at least 12 points");
    }
    let out = Outputs::from(&a.out);
    if a.diagonal {
        let cfg = suite::DiagonalConfig {
            xi: a.xi,
            ks: a.k,
            exec,
            ..Default::default()
        };
        let r = suite::diagonal_symbol(&cfg)?;
        return emit::finish("kernel-fit", &r, seed, Value::Null, &out);
    }
    let (r, fits) = match a.model {
        None => suite::sqrt_law(&suite::SqrtLawConfig {
            window: a.window,
            points: a.points,
            exec,
        })?,
        Some(spec) => {
            let p = point(&spec, a.p, "p");
            let dir = point(&spec, Some(a.dir.unwrap_or_else(|| default_direction(&spec))), "dir");
            let path = a.path.map(|x| point(&spec, Some(x), "path"));
            let tol = if spec == ModelSpec::Circle2d { 0.05 } else { 0.1 };
            let (r, fit) = suite::model_fit(&spec, &p, &dir, path, a.window, a.points, tol, exec)?;
            let name = spec.build().name();
            (r, vec![(name, fit)])
        }
    };
    emit::finish("kernel-fit", &r, seed, emit::fits_json(&fits), &out)
}

fn scon(a: SconArgs, seed: u64) -> anyhow::Result<bool> {
    let r = match a.model {
        None => suite::scon()?,
        Some(spec) => {
            let p = point(&spec, a.p, "p");
            let Some(xi) = a.xi else {
                usage(ErrorKind::MissingRequiredArgument, "--model needs --xi");
            };
            let xi = point(&spec, Some(xi), "xi");
            let s = scon_probe(spec.build().as_ref(), &p, &xi, a.candidates, a.t_max)?;
            let n = spec.dim();
            let mut header: Vec<String> = (0..n).map(|i| format!("theta{i}")).collect();
            header.push("angle".into());
            let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut table = Table::new(&h);
            for (th, angle) in &s.candidates {
                let mut row: Vec<String> = th.iter().map(|x| suite::cell(*x)).collect();
                row.push(suite::opt_cell(*angle));
                table.push(row);
            }
            let mut r = Report::new("strong conormal condition", table);
            let expect = a.expect == Expect::Holds;
            r.check(Check::holds(
                "condition",
                s.holds == expect,
                if expect { "holds" } else { "fails" },
            ));
            r.note("holds", s.holds);
            r
        }
    };
    emit::finish("scon", &r, seed, Value::Null, &Outputs::from(&a.out))
}
