use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fadekit::approx::{self, ApproxTarget, ExpSumApprox, FitOptions};
use fadekit::noise::NoiseModel;
use fadekit_cli::scenario::{
    FadingSection, McMode, McSettings, Method, Metric, ModulationChoice, NoiseSection, Scenario, SnrConvention, Sweep,
};
use fadekit_cli::{parse_scenario_file, run_scenario, write_csv, CliError};

#[derive(Parser)]
#[command(name = "fadekit", version, about = "Error rate and capacity of MRC receivers over κ-μ shadowed fading")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average error rate versus mean SNR.
    Aber(AberArgs),
    /// Ergodic capacity versus mean SNR.
    Acc(AccArgs),
    /// Density or distribution function of the combined SNR.
    Dist(DistArgs),
    /// Fit an exponential sum to Q_a(√x) or log2(1+x).
    Fit(FitArgs),
    /// Run a scenario file.
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the equivalent scenario file and exit.
    #[arg(long)]
    emit_scenario: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    KappaMuShadowed,
    KappaMu,
    EtaMu,
    RicianShadowed,
    Hoyt,
    Rician,
    NakagamiM,
    Rayleigh,
    OneSidedGaussian,
}

#[derive(Args)]
struct FadingArgs {
    #[arg(long, value_enum, default_value = "kappa-mu-shadowed")]
    model: Model,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Shadowing severity m.
    #[arg(long = "m")]
    m: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Rician factor K.
    #[arg(long = "k")]
    k: Option<f64>,
}

impl FadingArgs {
    fn section(&self) -> Result<FadingSection, CliError> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Usage(format!("--{name} is required for this --model")))
        };
        Ok(match self.model {
            Model::KappaMuShadowed => FadingSection::KappaMuShadowed {
                kappa: need(self.kappa, "kappa")?,
                mu: need(self.mu, "mu")?,
                m: need(self.m, "m")?,
            },
            Model::KappaMu => FadingSection::KappaMu {
                kappa: need(self.kappa, "kappa")?,
                mu: need(self.mu, "mu")?,
            },
            Model::EtaMu => FadingSection::EtaMu {
                eta: need(self.eta, "eta")?,
                mu: need(self.mu, "mu")?,
            },
            Model::RicianShadowed => FadingSection::RicianShadowed {
                k: need(self.k, "k")?,
                m: need(self.m, "m")?,
            },
            Model::Hoyt => FadingSection::Hoyt { q: need(self.q, "q")? },
            Model::Rician => FadingSection::Rician { k: need(self.k, "k")? },
            Model::NakagamiM => FadingSection::NakagamiM { m: need(self.m, "m")? },
            Model::Rayleigh => FadingSection::Rayleigh,
            Model::OneSidedGaussian => FadingSection::OneSidedGaussian,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    PerBranch,
    Total,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    branches: u32,
    #[arg(long, value_enum, default_value = "per-branch")]
    convention: Convention,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    start_db: f64,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    stop_db: f64,
    #[arg(long, default_value_t = 1.0)]
    step_db: f64,
}

impl SweepArgs {
    fn sweep(&self) -> Sweep {
        Sweep {
            start_db: self.start_db,
            stop_db: self.stop_db,
            step_db: self.step_db,
        }
    }
    fn convention(&self) -> SnrConvention {
        match self.convention {
            Convention::PerBranch => SnrConvention::PerBranch,
            Convention::Total => SnrConvention::Total,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    QuadratureExact,
    QuadratureApprox,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum McModeArg {
    SemiAnalytic,
    BitLevel,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, value_enum, default_value = "closed")]
    method: MethodArg,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Below 2^63 so that it fits a scenario file.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: u64,
    #[arg(long, value_enum, default_value = "semi-analytic")]
    mc_mode: McModeArg,
}

impl MethodArgs {
    fn method(&self) -> Method {
        match self.method {
            MethodArg::Closed => Method::Closed,
            MethodArg::QuadratureExact => Method::QuadratureExact,
            MethodArg::QuadratureApprox => Method::QuadratureApprox,
            MethodArg::Mc => Method::Mc(McSettings {
                samples: self.samples,
                seed: self.seed,
                mode: match self.mc_mode {
                    McModeArg::SemiAnalytic => McMode::SemiAnalytic,
                    McModeArg::BitLevel => McMode::BitLevel,
                },
            }),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModArg {
    Bfsk,
    Bpsk,
    Qpsk,
    Pam,
    Psk,
    RectQam,
    NonrectQam,
}

#[derive(Args)]
struct AberArgs {
    #[arg(long, value_enum)]
    modulation: ModArg,
    /// Constellation size M for pam, psk and the QAM variants.
    #[arg(long)]
    order: Option<u32>,
    /// GGN shape a.
    #[arg(long, default_value_t = 2.0)]
    shape: f64,
    /// Explicit approximation amplitudes (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    delta: Option<Vec<f64>>,
    /// Explicit approximation rates (comma separated).
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[command(flatten)]
    fading: FadingArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    out: Output,
}

impl AberArgs {
    fn modulation(&self) -> Result<ModulationChoice, CliError> {
        let order = || {
            self.order
                .ok_or_else(|| CliError::Usage("--order is required for this --modulation".into()))
        };
        Ok(match self.modulation {
            ModArg::Bfsk => ModulationChoice::Bfsk,
            ModArg::Bpsk => ModulationChoice::Bpsk,
            ModArg::Qpsk => ModulationChoice::Qpsk,
            ModArg::Pam => ModulationChoice::Pam(order()?),
            ModArg::Psk => ModulationChoice::Psk(order()?),
            ModArg::RectQam => ModulationChoice::RectQam(order()?),
            ModArg::NonrectQam => ModulationChoice::NonrectQam(order()?),
        })
    }

    fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(Scenario {
            metric: Metric::Aber,
            modulation: Some(self.modulation()?),
            branches: self.sweep.branches,
            snr_convention: self.sweep.convention(),
            method: self.method.method(),
            mean_snr_db: None,
            noise: NoiseSection {
                shape: self.shape,
                delta: self.delta.clone(),
                sigma: self.sigma.clone(),
            },
            fading: self.fading.section()?,
            sweep: self.sweep.sweep(),
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AccMethod {
    Closed,
    QuadratureExact,
    QuadratureApprox,
}

#[derive(Args)]
struct AccArgs {
    #[command(flatten)]
    fading: FadingArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, value_enum, default_value = "closed")]
    method: AccMethod,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistMetric {
    Pdf,
    Cdf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistMethod {
    Closed,
    QuadratureExact,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    metric: DistMetric,
    /// Mean SNR in dB; the sweep runs over the evaluation point γ in dB.
    #[arg(long, allow_negative_numbers = true)]
    mean_snr_db: f64,
    #[arg(long, value_enum, default_value = "closed")]
    method: DistMethod,
    #[command(flatten)]
    fading: FadingArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct FitArgs {
    /// Fit Q_a(√x) for this GGN shape.
    #[arg(long, conflicts_with = "capacity")]
    shape: Option<f64>,
    /// Fit log2(1+x) instead.
    #[arg(long)]
    capacity: bool,
    #[arg(long, default_value_t = 4)]
    terms: usize,
    #[arg(long, default_value_t = 0.01)]
    grid_min: f64,
    #[arg(long, default_value_t = 36.0)]
    grid_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args)]
struct ScenarioArgs {
    file: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn emit_csv(sc: &Scenario, output: Option<&PathBuf>) -> Result<(), CliError> {
    let rows = run_scenario(sc)?;
    match output {
        Some(p) => write_csv(&rows, BufWriter::new(File::create(p)?))?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    if !rows.is_empty() && rows.iter().all(|r| r.failed()) {
        return Err(CliError::Computation("every sweep point failed; see the flags column".into()));
    }
    Ok(())
}

fn run_or_emit(sc: Scenario, out: &Output) -> Result<(), CliError> {
    sc.validate()?;
    if out.emit_scenario {
        print!("{}", sc.to_toml()?);
        return Ok(());
    }
    emit_csv(&sc, out.output.as_ref())
}

fn fit(args: &FitArgs) -> Result<(), CliError> {
    let usage = |e: fadekit::Error| CliError::Usage(e.to_string());
    if !(args.grid_min > 0.0 && args.grid_max > args.grid_min) {
        return Err(CliError::Usage("--grid-min must be > 0 and below --grid-max".into()));
    }
    let grid = approx::log_grid(args.grid_min, args.grid_max, args.points);
    let opts = FitOptions {
        starts: args.starts,
        max_iterations: args.max_iterations,
        seed: args.seed,
        ..FitOptions::default()
    };
    let (target, baseline): (Box<dyn Fn(f64) -> f64 + Sync>, Option<ExpSumApprox>) = match (args.shape, args.capacity) {
        (Some(a), false) => {
            let n = NoiseModel::new(a).map_err(usage)?;
            (Box::new(move |x: f64| n.q(x.sqrt())), ExpSumApprox::preset_unit_variance(a).ok())
        }
        (None, true) => (
            Box::new(|x: f64| x.ln_1p() / std::f64::consts::LN_2),
            ExpSumApprox::preset(ApproxTarget::Log2Capacity).ok(),
        ),
        _ => return Err(CliError::Usage("give exactly one of --shape or --capacity".into())),
    };
    let r = approx::fit(&target, &grid, args.terms, None, &opts).map_err(usage)?;
    let mut out = io::stdout().lock();
    writeln!(out, "# max abs residual {:.6e}, sse {:.6e}, converged {}", r.max_abs_residual, r.sse, r.converged)?;
    if let Some(b) = baseline {
        writeln!(out, "# tabulated coefficients on the same grid: {:.6e}", b.max_abs_residual(&target, &grid))?;
    }
    let list = |v: Vec<f64>| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
    let delta = list(r.approx.terms().iter().map(|t| t.delta).collect());
    let sigma = list(r.approx.terms().iter().map(|t| t.sigma).collect());
    match args.shape {
        Some(a) => writeln!(out, "noise = {{ shape = {a:?}, delta = [{delta}], sigma = [{sigma}] }}")?,
        None => writeln!(out, "delta = [{delta}]\nsigma = [{sigma}]")?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Aber(a) => run_or_emit(a.scenario()?, &a.out),
        Command::Acc(a) => {
            let sc = Scenario {
                metric: Metric::Acc,
                modulation: None,
                branches: a.sweep.branches,
                snr_convention: a.sweep.convention(),
                method: match a.method {
                    AccMethod::Closed => Method::Closed,
                    AccMethod::QuadratureExact => Method::QuadratureExact,
                    AccMethod::QuadratureApprox => Method::QuadratureApprox,
                },
                mean_snr_db: None,
                noise: NoiseSection::default(),
                fading: a.fading.section()?,
                sweep: a.sweep.sweep(),
            };
            run_or_emit(sc, &a.out)
        }
        Command::Dist(a) => {
            let sc = Scenario {
                metric: match a.metric {
                    DistMetric::Pdf => Metric::Pdf,
                    DistMetric::Cdf => Metric::Cdf,
                },
                modulation: None,
                branches: a.sweep.branches,
                snr_convention: a.sweep.convention(),
                method: match a.method {
                    DistMethod::Closed => Method::Closed,
                    DistMethod::QuadratureExact => Method::QuadratureExact,
                },
                mean_snr_db: Some(a.mean_snr_db),
                noise: NoiseSection::default(),
                fading: a.fading.section()?,
                sweep: a.sweep.sweep(),
            };
            run_or_emit(sc, &a.out)
        }
        Command::Fit(a) => fit(&a),
        Command::Scenario(a) => {
            let sc = parse_scenario_file(&a.file)?;
            emit_csv(&sc, a.output.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed reader (`fadekit ... | head`) is not a failure.
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fadekit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
