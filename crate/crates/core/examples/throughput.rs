//! Measures stepper throughput in node updates per second.
//!
//! `cargo run --release -p spiraldrift --example throughput -- [L] [steps] [D_v]`

use std::f64::consts::PI;
use std::time::Instant;

use spiraldrift::geometry::{
    christoffel_and_ricci, DerivativeMode, FiberConfig, ShapeConfig, SurfaceConfig, SurfaceSpec,
};
use spiraldrift::solver::{build_stencil, max_time_step, BarkleyKinetics, Simulation, SpiralState};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().unwrap())
        .collect();
    let length = args.first().copied().unwrap_or(30.0);
    let steps = args.get(1).copied().unwrap_or(1000.0) as u64;
    let d_v = args.get(2).copied().unwrap_or(0.0);
    let spec = SurfaceSpec::analytic(SurfaceConfig {
        shape: ShapeConfig::Paraboloid {
            coefficient: 0.05,
            sign: -1.0,
        },
        fiber: FiberConfig::Linear {
            alpha0: 0.0,
            rate: PI / 40.0,
        },
        d_l: 4.0,
        d_t: 1.0,
        d0: 1.0,
        length,
        dx: 0.1,
    })
    .unwrap();
    let metric = christoffel_and_ricci(&spec, DerivativeMode::Analytic).unwrap();
    let stencil = build_stencil(&metric);
    let g = metric.grid;
    let mut state = SpiralState::uniform(g, 0.0, 0.0);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.index(i, j);
            state.u[k] = if g.x(i) > 0.0 { 1.0 } else { 0.0 };
            state.v[k] = if g.y(j) > 0.0 { 0.65 } else { 0.0 };
        }
    }
    let kinetics = BarkleyKinetics::new(1.3, 0.19, 0.025, d_v).unwrap();
    let dt = max_time_step(0.1, 1.0, 4.0, 1.0);
    let mut sim = Simulation::new(&stencil, kinetics, 1.0, dt, &state).unwrap();
    let start = Instant::now();
    sim.advance(steps).unwrap();
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{}x{} nodes, {steps} steps in {secs:.3} s: {:.3e} node updates/s",
        g.nx,
        g.ny,
        (g.len() as f64 * steps as f64) / secs
    );
}
