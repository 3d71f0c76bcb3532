//! Command-line front end: run one scenario, sweep the tuning grid,
//! inspect meshes, validate configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crowdflow::output;
use crowdflow::scenario::{self, Scenario, ScenarioConfig};
use crowdflow::sim::Simulation;

#[derive(Parser)]
#[command(
    name = "crowdflow",
    version,
    about = "Macroscopic crowd-flow simulator for walkways"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run(RunArgs),
    /// Run a (c, theta) parameter sweep and emit the tuning tables.
    Sweep(SweepArgs),
    /// Print mesh statistics for a scenario or a mesh file.
    MeshInfo(MeshInfoArgs),
    /// Check a scenario file and report every offending field.
    ValidateConfig(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Snapshot period in crossing-time units (overrides the config).
    #[arg(long)]
    snapshot_every: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated repulsion strengths, e.g. `2.5e-4,5e-4,7.5e-4`.
    #[arg(long, value_delimiter = ',')]
    c_list: Vec<f64>,
    /// Comma-separated wall angles in degrees, e.g. `0,1,2,3,4,5`.
    #[arg(long, value_delimiter = ',')]
    theta_list: Vec<f64>,
    /// Target egress time for the tuning lookup (in crossing times).
    #[arg(long)]
    target_ta: Option<f64>,
    /// Target chord-uniformity index for the tuning lookup.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    target_drho: f64,
}

#[derive(Args)]
struct MeshInfoArgs {
    /// Scenario file to generate the mesh from.
    #[arg(long, conflicts_with = "mesh")]
    config: Option<PathBuf>,
    /// Existing mesh file to inspect.
    #[arg(long)]
    mesh: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    let code = match cli.command {
        Command::Run(args) => run(&args),
        Command::Sweep(args) => sweep(&args),
        Command::MeshInfo(args) => mesh_info(&args),
        Command::ValidateConfig(args) => validate(&args),
    };
    match code {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn load_scenario(path: &Path) -> anyhow::Result<Scenario> {
    let cfg =
        ScenarioConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let (scenario, warnings) = cfg.resolve_with_warnings()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(scenario)
}

fn run(args: &RunArgs) -> anyhow::Result<()> {
    let mut sc = load_scenario(&args.config)?;
    if let Some(every) = args.snapshot_every {
        sc.snapshot_every = every;
    }
    std::fs::create_dir_all(&args.out)?;

    let mut sim = sc.build()?;
    output::write_mesh_info(&sim.mesh, args.out.join("mesh_info.txt"))?;
    output::write_field_csv(&sim, args.out.join("field.csv"))?;

    let snapshot = |sim: &Simulation, out: &Path| -> anyhow::Result<()> {
        let name = format!("snapshot_t{:.4}.csv", sim.t);
        output::write_snapshot_csv(
            &sim.mesh,
            &sim.rho,
            &sim.last_w,
            sc.total,
            sc.length_m,
            out.join(name),
        )?;
        Ok(())
    };

    let mut next_snap = if sc.snapshot_every > 0.0 {
        Some(sc.snapshot_every)
    } else {
        None
    };
    if next_snap.is_some() {
        snapshot(&sim, &args.out)?;
    }
    let result = (|| -> crowdflow::Result<()> {
        while sim.t < sc.t_end - 1e-12 && !sim.drained() {
            sim.step()?;
            if let Some(ns) = next_snap {
                if sim.t >= ns {
                    snapshot(&sim, &args.out).ok();
                    next_snap = Some(ns + sc.snapshot_every);
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        // Keep the last valid state for post-mortem inspection.
        output::write_snapshot_csv(
            &sim.mesh,
            &sim.rho,
            &sim.last_w,
            sc.total,
            sc.length_m,
            args.out.join("abort_dump.csv"),
        )
        .ok();
        output::write_metrics_csv(&sim.metrics, args.out.join("metrics.csv")).ok();
        bail!("run aborted: {e}");
    }

    output::write_metrics_csv(&sim.metrics, args.out.join("metrics.csv"))?;
    if sim.entrance.is_some() {
        output::write_entrance_csv(&sim.metrics, args.out.join("entrance.csv"))?;
    }
    output::write_profile_csv(&sim, sc.length_m, args.out.join("profile_mid.csv"))?;
    output::write_summary(&sim, args.out.join("summary.txt"))?;
    if next_snap.is_some() {
        snapshot(&sim, &args.out)?;
    }

    let ta = sim
        .metrics
        .egress_time()
        .map_or("inf".to_string(), |t| format!("{t:.4}"));
    println!(
        "done: t = {:.4}, steps = {}, Ta/T = {}, budget error = {:.2e}",
        sim.t,
        sim.steps,
        ta,
        sim.metrics.budget_error()
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    if args.c_list.is_empty() || args.theta_list.is_empty() {
        bail!("sweep needs non-empty --c-list and --theta-list");
    }
    let sc = load_scenario(&args.config)?;
    std::fs::create_dir_all(&args.out)?;
    let thetas_rad: Vec<f64> = args.theta_list.iter().map(|d| d.to_radians()).collect();
    let cells = scenario::sweep(&sc, &args.c_list, &thetas_rad);
    output::write_sweep_csv(&cells, args.out.join("sweep.csv"))?;

    let failures: Vec<&scenario::SweepCell> = cells.iter().filter(|c| c.error.is_some()).collect();
    if !failures.is_empty() {
        let mut log = String::new();
        for cell in &failures {
            log.push_str(&format!(
                "c={}, theta={}deg: {}\n",
                cell.repulsion_c,
                cell.theta.to_degrees(),
                cell.error.as_deref().unwrap_or("")
            ));
        }
        std::fs::write(args.out.join("sweep_errors.txt"), &log)?;
        eprintln!(
            "{} of {} cells failed; see sweep_errors.txt",
            failures.len(),
            cells.len()
        );
    }

    if let Some(ta_target) = args.target_ta {
        match scenario::tune(&cells, ta_target, args.target_drho) {
            Some((c, theta)) => {
                let text = format!(
                    "target_ta_over_t = {ta_target}\ntarget_delta_rho = {}\nc = {c}\ntheta_deg = {}\n",
                    args.target_drho,
                    theta.to_degrees()
                );
                std::fs::write(args.out.join("tuning.txt"), &text)?;
                println!("tuned: c = {c:.6e}, theta = {:.3} deg", theta.to_degrees());
            }
            None => eprintln!("tuning lookup failed: no usable sweep cells"),
        }
    }
    println!("sweep complete: {} cells", cells.len());
    Ok(())
}

fn mesh_info(args: &MeshInfoArgs) -> anyhow::Result<()> {
    let mesh = match (&args.config, &args.mesh) {
        (Some(config), None) => load_scenario(config)?.build_mesh()?,
        (None, Some(path)) => crowdflow::mesh::load_mesh(path)?,
        _ => bail!("give exactly one of --config or --mesh"),
    };
    print!("{}", output::mesh_info_text(&mesh));
    Ok(())
}

fn validate(args: &ValidateArgs) -> anyhow::Result<()> {
    let cfg = match ScenarioConfig::from_path(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    match cfg.resolve_with_warnings() {
        Ok((_, warnings)) => {
            for w in &warnings {
                println!("warning: {w}");
            }
            println!("ok");
            Ok(())
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }
}
