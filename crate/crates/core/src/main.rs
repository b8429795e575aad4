use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kkl_core::harness::{
    build_transform, compare_gammas, estimate_system_constants, resolve_constants, run_experiment,
    ConstantMode, RunConfig,
};
use kkl_core::observer::RecoveryVariant;
use kkl_core::transform::gamma_star;
use kkl_core::Error;

const EXIT_VIOLATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(
    name = "kkl-interval",
    version,
    about = "KKL-based interval observer experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the plant, run the observer and write a CSV trace.
    Run(RunArgs),
    /// Run the same experiment for several gains and tabulate widths.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated gains.
        #[arg(long, value_delimiter = ',', required = true)]
        gammas: Vec<f64>,
    },
    /// Print the estimated plant and transform constants.
    Constants {
        #[arg(long, default_value = "oscillator-siE")]
        preset: String,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with run settings; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Plant preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Target gain in (0, 1].
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of observer steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Bounded measurement noise.
    #[arg(long)]
    noise: Option<Toggle>,
    /// Bounded state disturbance.
    #[arg(long)]
    disturbance: Option<Toggle>,
    /// Seed for the disturbance draw.
    #[arg(long)]
    seed: Option<u64>,
    /// minmax, plus-only, minus-only or swapped.
    #[arg(long)]
    variant: Option<String>,
    /// auto, analytic or sampled.
    #[arg(long)]
    constants: Option<String>,
    /// CSV trace path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional SVG plot of the state bounds.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write the fitted coefficients of T here.
    #[arg(long)]
    save_coeffs: Option<PathBuf>,
    /// Reuse coefficients written by --save-coeffs.
    #[arg(long)]
    load_coeffs: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> kkl_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.preset {
            cfg.preset = v.clone();
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.noise {
            cfg.noise = matches!(v, Toggle::On);
        }
        if let Some(v) = self.disturbance {
            cfg.disturbance = matches!(v, Toggle::On);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.variant {
            cfg.variant = v.parse::<RecoveryVariant>()?;
        }
        if let Some(v) = &self.constants {
            cfg.constants = v.parse::<ConstantMode>()?;
        }
        for (slot, v) in [
            (&mut cfg.out, &self.out),
            (&mut cfg.svg, &self.svg),
            (&mut cfg.save_coeffs, &self.save_coeffs),
            (&mut cfg.load_coeffs, &self.load_coeffs),
        ] {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::EnclosureViolation { .. } => ExitCode::from(EXIT_VIOLATION),
        _ => ExitCode::from(EXIT_CONFIG),
    }
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

fn run(args: &RunArgs) -> kkl_core::Result<ExitCode> {
    let cfg = args.resolve()?;
    let out = run_experiment(&cfg)?;
    let s = &out.summary;
    println!("gamma            {}", s.gamma);
    println!("steps            {}", s.steps);
    println!(
        "constants        c_L = {:.6e}, c = {:.6e} ({:?})",
        s.constants.c_l, s.constants.c, s.constants.source
    );
    println!("margin           {:.6e}", s.margin);
    println!("violations       {}", s.violations);
    println!(
        "mean width_x     {:.6e} over k in [{}, {}]",
        s.mean_width_x, s.window.0, s.window.1
    );
    println!("final width_x    {:.6e}", s.final_width_x);
    println!("z decay per step {}", fmt_rate(s.decay_rate_z));
    println!("max residual     {:.3e}", s.max_residual);
    if !s.escaped.is_empty() {
        println!("state left the enlarged box at {} steps", s.escaped.len());
    }
    if let Some(k) = s.first_violation {
        eprintln!("enclosure violated first at step {k}");
        return Ok(ExitCode::from(EXIT_VIOLATION));
    }
    Ok(ExitCode::SUCCESS)
}

fn compare(args: &RunArgs, gammas: &[f64]) -> kkl_core::Result<ExitCode> {
    let cfg = args.resolve()?;
    for &g in gammas {
        RunConfig {
            gamma: g,
            ..cfg.clone()
        }
        .validate()?;
    }
    let table = compare_gammas(&cfg, gammas)?;
    println!("gamma,mean_width_x,decay_rate_z,margin,violations");
    for row in table {
        println!(
            "{},{:.6e},{},{:.6e},{}",
            row.gamma,
            row.mean_width_x,
            fmt_rate(row.decay_rate_z),
            row.margin,
            row.violations
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn constants(preset: &str, gamma: f64, samples: usize) -> kkl_core::Result<ExitCode> {
    let cfg = RunConfig {
        preset: preset.to_string(),
        gamma,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let t = build_transform(&cfg)?;
    let design = &t.target().design;
    let sys = estimate_system_constants(
        t.plant(),
        design,
        samples,
        kkl_core::harness::CONSTANTS_SEED,
    )?;
    println!("c_f      {:.16e}", sys.c_f);
    println!("c_h      {:.16e}", sys.c_h);
    println!("c_o      {:.16e}", sys.c_o);
    println!("c_c      {:.16e}", sys.c_c);
    println!("c_N      {:.16e}", sys.c_n);
    println!("orders   {:?}", sys.orders);
    println!("gamma*   {:.16e}", gamma_star(&sys, design));
    let dc = resolve_constants(&t, ConstantMode::Auto, samples)?;
    println!("gamma    {gamma}");
    println!("source   {:?}", dc.source);
    println!("c_L      {:.16e}", dc.c_l);
    println!("c_I      {:.16e}", dc.c_i);
    println!("c        {:.16e}", dc.c);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Compare { run, gammas } => compare(run, gammas),
        Command::Constants {
            preset,
            gamma,
            samples,
        } => constants(preset, *gamma, *samples),
    };
    result.unwrap_or_else(|e| exit_for(&e))
}
