//! Command-line entry point for geometry dumps, spiral runs, coefficient
//! fits, drift predictions and end-to-end experiment bundles.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use spiraldrift::driftlaw::{integrate_drift, IntegratorSettings, MobilityCoefficients};
use spiraldrift::grid::FieldDump;
use spiraldrift::mobility::{
    extract_drift, fit_mobility, fit_q0, overlap_integrals, resample, source_terms,
    ExtractSettings, ResponseFunctionSet,
};
use spiraldrift::pipeline::{
    canonical_manifest, canonical_manifests, compare_trajectories, read_path_csv, read_tips_csv,
    run_pipeline, ExperimentManifest, PipelineOptions,
};
use spiraldrift::solver::{
    continue_run, run_experiment, seed_spiral, ExperimentConfig, ExperimentRun, SeedSummary,
    SpiralState,
};

fn version() -> String {
    format!(
        "{} ({})",
        env!("CARGO_PKG_VERSION"),
        env!("SPIRALDRIFT_GIT")
    )
}

#[derive(Parser)]
#[command(name = "spiraldrift", version = env!("CARGO_PKG_VERSION"), about)]
struct Cli {
    /// Worker threads for the solver and geometry stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Writes the metric and curvature grids of a configuration.
    Geometry {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Runs the planar pre-run and writes the placed initial state.
    Seed {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Seeds and evolves a spiral, writing tips, snapshots and the final state.
    Simulate {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Continues a `simulate` output directory to the configured end time.
    Resume {
        config: PathBuf,
        /// Directory written by `simulate`.
        from: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Fits the drift coefficients to a tip CSV.
    Fit {
        tips: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Velocity estimates span this many rotation periods.
        #[arg(long, default_value_t = 1.0)]
        stride_periods: f64,
        /// Rotations dropped from the start of the centre path.
        #[arg(long, default_value_t = 2.0)]
        discard_rotations: f64,
        /// Planar angular frequency; enables the frequency-shift fit.
        #[arg(long)]
        omega0: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Integrates the drift law from a starting point.
    Predict {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, allow_negative_numbers = true)]
        q1: f64,
        #[arg(long, allow_negative_numbers = true)]
        q2: f64,
        /// Output spacing.
        #[arg(long, default_value_t = 1.0)]
        sample_dt: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Runs a manifest end to end and writes a bundle.
    Pipeline {
        /// Built-in manifest name or path to a manifest JSON file.
        manifest: String,
        #[arg(short, long)]
        out: PathBuf,
        /// Overrides the manifest end time.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Deviation statistics between an observed and a predicted path.
    Compare {
        observed: PathBuf,
        predicted: PathBuf,
    },
    /// Coefficients from a response-function file.
    Coeffs {
        response: PathBuf,
        /// Diffusion coefficient of the slow variable.
        #[arg(long, default_value_t = 0.0)]
        d_v: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
    /// Lists the built-in manifests.
    List,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_run(out: &Path, config: &ExperimentConfig, run: &ExperimentRun) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let mut w = create(&out.join("tips.csv"))?;
    run.trajectory.write_csv(&mut w)?;
    w.flush()?;
    run.final_state
        .to_dump()
        .write(&out.join("final_state.grid"))?;
    for (k, s) in run.snapshots.iter().enumerate() {
        s.to_dump()
            .write(&out.join(format!("snapshot_{k:05}.grid")))?;
    }
    write_json(
        &out.join("run.json"),
        &serde_json::json!({
            "version": version(),
            "seed": run.seed,
            "dt": run.dt,
            "steps": run.steps,
            "status": run.trajectory.status,
            "chirality": run.trajectory.chirality,
            "wall_seconds": run.wall_seconds,
            "config": config,
        }),
    )
}

fn resolve_manifest(arg: &str) -> Result<(ExperimentManifest, PathBuf)> {
    if let Some(m) = canonical_manifest(arg) {
        return Ok((m, PathBuf::from(".")));
    }
    let path = Path::new(arg);
    if !path.exists() {
        bail!("{arg} is neither a built-in manifest nor a file; see `spiraldrift list`");
    }
    Ok((ExperimentManifest::load(path)?, base_dir(path)))
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Geometry { config, out } => {
            let c = load_config(&config)?;
            let m = c.metric(&base_dir(&config))?;
            std::fs::create_dir_all(&out)?;
            let dump = m.to_dump();
            dump.write(&out.join("metric.grid"))?;
            let mut w = create(&out.join("metric.csv"))?;
            dump.write_csv(&mut w)?;
            w.flush()?;
        }
        Command::Seed { config, out } => {
            let c = load_config(&config)?;
            let m = c.metric(&base_dir(&config))?;
            let pos = (c.seed_position[0], c.seed_position[1]);
            let s = seed_spiral(&m, c.kinetics()?, c.time_step()?, pos, c.chirality, &c.seed)?;
            std::fs::create_dir_all(&out)?;
            s.state.to_dump().write(&out.join("seed_state.grid"))?;
            let mut w = create(&out.join("planar_tips.csv"))?;
            s.planar.trajectory.write_csv(&mut w)?;
            w.flush()?;
            let summary = SeedSummary {
                omega0: s.planar.omega0,
                period: s.planar.period,
                core_radius: s.planar.core_radius,
                planar_rotations: s.planar.rotations,
                placed_center: [s.placed_center.0, s.placed_center.1],
            };
            write_json(&out.join("seed.json"), &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Simulate { config, out } => {
            let c = load_config(&config)?;
            let m = c.metric(&base_dir(&config))?;
            let run = run_experiment(&c, &m)?;
            write_run(&out, &c, &run)?;
            println!(
                "{} steps in {:.1} s, {} tip samples, status {:?}",
                run.steps,
                run.wall_seconds,
                run.trajectory.samples.len(),
                run.trajectory.status
            );
        }
        Command::Resume { config, from, out } => {
            let c = load_config(&config)?;
            let m = c.metric(&base_dir(&config))?;
            let meta: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(from.join("run.json"))?)?;
            let seed: SeedSummary = serde_json::from_value(meta["seed"].clone())?;
            let dump = FieldDump::read(&from.join("final_state.grid"))?;
            let state = SpiralState::from_dump(&dump)?;
            if state.t >= c.t_end {
                bail!(
                    "saved state is at t = {} which is not before t_end = {}",
                    state.t,
                    c.t_end
                );
            }
            let run = continue_run(&c, &m, state, seed)?;
            write_run(&out, &c, &run)?;
            println!(
                "resumed to t = {}, status {:?}",
                run.final_state.t, run.trajectory.status
            );
        }
        Command::Fit {
            tips,
            config,
            stride_periods,
            discard_rotations,
            omega0,
            out,
        } => {
            let c = load_config(&config)?;
            let m = c.metric(&base_dir(&config))?;
            let samples = read_tips_csv(&tips)?;
            let e = extract_drift(&samples, &ExtractSettings::default())?;
            let mut periods: Vec<f64> = e.rotations.iter().map(|r| r.period).collect();
            periods.sort_by(f64::total_cmp);
            let period = periods[periods.len() / 2];
            let t0 = e.path.samples[0].t + discard_rotations * period;
            let kept: Vec<_> = e
                .path
                .samples
                .iter()
                .copied()
                .filter(|s| s.t >= t0)
                .collect();
            let path = resample(
                &spiraldrift::driftlaw::DriftPath::observed(kept),
                stride_periods * period,
            );
            let fit = fit_mobility(std::slice::from_ref(&path), &m)?;
            let frequency = match omega0 {
                Some(w) => {
                    use spiraldrift::driftlaw::CurvatureSource;
                    let ricci = e
                        .rotations
                        .iter()
                        .map(|r| m.local(r.x, r.y).map(|l| l.ricci))
                        .collect::<Result<Vec<_>, _>>()?;
                    let p: Vec<f64> = e.rotations.iter().map(|r| r.period).collect();
                    Some(fit_q0(&p, &ricci, w)?)
                }
                None => None,
            };
            let report = serde_json::json!({
                "fit": fit,
                "std_errors": fit.std_errors(),
                "frequency": frequency,
                "median_period": period,
                "stride": stride_periods * period,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(o) = out {
                write_json(&o, &report)?;
            }
        }
        Command::Predict {
            config,
            x0,
            y0,
            t_end,
            q1,
            q2,
            sample_dt,
            out,
        } => {
            let c = load_config(&config)?;
            let m = c.metric(&base_dir(&config))?;
            let q = MobilityCoefficients::drift(q1, q2);
            let settings = IntegratorSettings {
                sample_dt,
                ..IntegratorSettings::default()
            };
            let p = integrate_drift(&m, [x0, y0], t_end, &q, &settings)?;
            let mut w = create(&out)?;
            p.write_csv(&mut w)?;
            w.flush()?;
            println!("{} samples, status {:?}", p.samples.len(), p.status);
        }
        Command::Pipeline {
            manifest,
            out,
            t_end,
        } => {
            let (mut m, base) = resolve_manifest(&manifest)?;
            if t_end.is_some() {
                m.t_end = t_end;
            }
            let opts = PipelineOptions {
                base_dir: base,
                out_dir: Some(out),
                version: version(),
            };
            let o = run_pipeline(&m, &opts)?;
            for s in &o.summary.stages {
                let msg = s.message.as_deref().unwrap_or("");
                println!("stage {:<9} {:?} {:.1}s {msg}", s.name, s.status, s.seconds);
            }
            for c in &o.summary.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                println!("{mark} {}: {}", c.name, c.detail);
            }
            return Ok(o.summary.passed);
        }
        Command::Compare {
            observed,
            predicted,
        } => {
            let r = compare_trajectories(&read_path_csv(&observed)?, &read_path_csv(&predicted)?)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Command::Coeffs {
            response,
            d_v,
            tolerance,
        } => {
            let rf = ResponseFunctionSet::load(&response)?;
            let bi = rf.biorthogonality(tolerance)?;
            let src = source_terms(&rf.u0, &[1.0, d_v])?;
            let q = overlap_integrals(&rf, &src)?;
            let report = serde_json::json!({
                "coefficients": q,
                "biorthogonality": bi,
                "source_edge_ratio": src.edge_ratio,
                "source_localized": src.is_localized(),
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            return Ok(bi.passed);
        }
        Command::List => {
            for m in canonical_manifests() {
                let c = m.resolve(Path::new("."))?;
                println!(
                    "{:<20} a={} b={} A={} B={:.5} L={} D_v={} D_L={} t_end={}",
                    m.name, c.a, c.b, c.paraboloid, c.fiber_rate, c.length, c.d_v, c.d_l, c.t_end
                );
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
