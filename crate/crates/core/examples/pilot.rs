//! Seeds and runs one experiment configuration, then extracts the centre
//! path and fits the drift coefficients.
//!
//! `cargo run --release -p spiraldrift --example pilot -- <config.json> [resample_dt]`

use std::path::Path;

use spiraldrift::mobility::{extract_drift, fit_mobility, resample, ExtractSettings};
use spiraldrift::solver::{run_experiment, ExperimentConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().expect("config path");
    let stride: Option<f64> = args.next().map(|s| s.parse().unwrap());
    let config: ExperimentConfig =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let metric = config.metric(Path::new(".")).unwrap();
    let run = run_experiment(&config, &metric).unwrap();
    println!("seed: {:?}", run.seed);
    println!(
        "steps {} wall {:.1}s status {:?}",
        run.steps, run.wall_seconds, run.trajectory.status
    );
    let e = extract_drift(&run.trajectory.samples, &ExtractSettings::default()).unwrap();
    for r in &e.rotations {
        println!(
            "t {:8.2} T {:.4} centre ({:8.4}, {:8.4})",
            r.t, r.period, r.x, r.y
        );
    }
    let dt = stride.unwrap_or(run.seed.period);
    let p = resample(&e.path, dt);
    let (a, b) = (p.samples[0], p.samples[p.samples.len() - 1]);
    println!(
        "path ({:.4},{:.4}) -> ({:.4},{:.4}) over {:.1}",
        a.x,
        a.y,
        b.x,
        b.y,
        b.t - a.t
    );
    match fit_mobility(&[p], &metric) {
        Ok(f) => println!(
            "fit q1 {:.4} q2 {:.4} se {:?} n {}",
            f.q1,
            f.q2,
            f.std_errors(),
            f.samples
        ),
        Err(err) => println!("fit failed: {err}"),
    }
}
