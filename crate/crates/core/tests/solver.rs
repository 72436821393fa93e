//! Time stepper properties: exact fixed points, conservation of the
//! surface integral, agreement with a hand-written five-point update,
//! spatial convergence order, worker-count independence and seeding.

use spiraldrift::geometry::{
    christoffel_and_ricci, DerivativeMode, FiberConfig, MetricField, ShapeConfig, SurfaceConfig,
    SurfaceSpec,
};
use spiraldrift::grid::Grid;
use spiraldrift::solver::{
    build_stencil, max_time_step, seed_spiral, BarkleyKinetics, SeedSettings, Simulation,
    SpiralState,
};

fn metric(shape: ShapeConfig, fiber: FiberConfig, d_l: f64, length: f64, dx: f64) -> MetricField {
    let spec = SurfaceSpec::analytic(SurfaceConfig {
        shape,
        fiber,
        d_l,
        d_t: 1.0,
        d0: 1.0,
        length,
        dx,
    })
    .unwrap();
    christoffel_and_ricci(&spec, DerivativeMode::Analytic).unwrap()
}

fn curved(length: f64, dx: f64) -> MetricField {
    metric(
        ShapeConfig::Paraboloid {
            coefficient: 0.05,
            sign: -1.0,
        },
        FiberConfig::Linear {
            alpha0: 0.0,
            rate: std::f64::consts::PI / 40.0,
        },
        4.0,
        length,
        dx,
    )
}

/// With `ε → ∞` the reaction term of `u` vanishes and `u` only diffuses.
fn passive() -> BarkleyKinetics {
    BarkleyKinetics::new(1.0, 0.0, f64::INFINITY, 0.0).unwrap()
}

fn dt_for(m: &MetricField) -> f64 {
    max_time_step(m.grid.dx, m.spec.d0, m.spec.d_l, m.spec.d_t)
}

/// Deterministic pseudo-random field in `[0, 1)`.
fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

#[test]
fn uniform_rest_and_excited_states_are_unchanged() {
    let m = curved(6.0, 0.1);
    let st = build_stencil(&m);
    let k = BarkleyKinetics::new(1.3, 0.19, 0.025, 0.0).unwrap();
    for (u, v) in [(0.0, 0.0), (1.0, 1.0)] {
        let s = SpiralState::uniform(m.grid, u, v);
        let mut sim = Simulation::new(&st, k, 1.0, dt_for(&m), &s).unwrap();
        sim.advance(200).unwrap();
        let out = sim.state();
        assert!(out.u.iter().all(|&x| x == u) && out.v.iter().all(|&x| x == v));
    }
}

#[test]
fn surface_integral_of_u_is_conserved_without_kinetics() {
    let m = curved(12.0, 0.1);
    let st = build_stencil(&m);
    let g = m.grid;
    let mut s = SpiralState::uniform(g, 0.0, 0.0);
    s.u = noise(g.len(), 7);
    let total = |u: &[f64]| -> f64 {
        u.iter().zip(&m.sqrt_g).map(|(u, w)| u * w).sum::<f64>() * g.dx * g.dx
    };
    let before = total(&s.u);
    let mut sim = Simulation::new(&st, passive(), 1.0, dt_for(&m), &s).unwrap();
    sim.advance(10_000).unwrap();
    let after = total(&sim.state().u);
    assert!(
        ((after - before) / before).abs() < 1e-10,
        "{before} -> {after}"
    );
}

#[test]
fn flat_isotropic_step_equals_five_point_update_bit_for_bit() {
    let m = metric(
        ShapeConfig::Plane,
        FiberConfig::Constant { alpha0: 0.0 },
        1.0,
        3.0,
        0.1,
    );
    let g = m.grid;
    let kin = BarkleyKinetics::new(0.9, 0.05, 0.02, 0.0).unwrap();
    let dt = dt_for(&m);
    let mut s = SpiralState::uniform(g, 0.0, 0.0);
    s.u = noise(g.len(), 1);
    s.v = noise(g.len(), 2).iter().map(|x| 0.5 * x).collect();
    let mut sim = Simulation::new(&build_stencil(&m), kin, 1.0, dt, &s).unwrap();
    sim.step().unwrap();
    let out = sim.state();
    let kw = dt * 1.0 * 1.0 * (1.0 / (g.dx * g.dx));
    let (inv_a, inv_eps) = (1.0 / kin.a, 1.0 / kin.eps);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let at =
                |di: i64, dj: i64| s.u[g.index((i as i64 + di) as usize, (j as i64 + dj) as usize)];
            let c = at(0, 0);
            // Same neighbour order and zero corner weights as the kernel.
            let mut acc = 0.0 * (at(-1, -1) - c);
            acc += kw * (at(0, -1) - c);
            acc += 0.0 * (at(1, -1) - c);
            acc += kw * (at(-1, 0) - c);
            acc += kw * (at(1, 0) - c);
            acc += 0.0 * (at(-1, 1) - c);
            acc += kw * (at(0, 1) - c);
            acc += 0.0 * (at(1, 1) - c);
            let v = s.v[g.index(i, j)];
            let f = c * (1.0 - c) * (c - (v + kin.b) * inv_a) * inv_eps;
            let k = g.index(i, j);
            assert_eq!(out.u[k].to_bits(), (c + acc + dt * f).to_bits());
            assert_eq!(out.v[k].to_bits(), (v + dt * (c - v)).to_bits());
        }
    }
}

/// Diffusion of a smooth bump on the curved anisotropic surface at
/// `dx, dx/2, dx/4, dx/8`.
#[test]
fn diffusion_converges_at_second_order() {
    // The bump stays clear of the edges, whose no-flux closure is first order.
    let length = 10.0;
    let t_end = 0.1;
    let run = |dx: f64| -> (Grid, Vec<f64>) {
        let m = curved(length, dx);
        let g = m.grid;
        let mut s = SpiralState::uniform(g, 0.0, 0.0);
        s.u = g.sample(|x, y| (-(x - 0.3) * (x - 0.3) - (y + 0.2) * (y + 0.2)).exp());
        let bound = dt_for(&m);
        let steps = (t_end / bound).ceil() as u64;
        let dt = t_end / steps as f64;
        let mut sim = Simulation::new(&build_stencil(&m), passive(), 1.0, dt, &s).unwrap();
        sim.advance(steps).unwrap();
        (g, sim.state().u)
    };
    let levels: Vec<(Grid, Vec<f64>)> = [0.2, 0.1, 0.05, 0.025].iter().map(|&dx| run(dx)).collect();
    // Successive differences at shared nodes shrink by 4 per halving.
    let errors: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            let ((g, u), (gf, fine)) = (&w[0], &w[1]);
            let mut e = 0.0f64;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    e = e.max((u[g.index(i, j)] - fine[gf.index(2 * i, 2 * j)]).abs());
                }
            }
            e
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8 && order < 2.3, "errors {errors:?}");
    }
}

#[test]
fn result_does_not_depend_on_worker_count() {
    let m = curved(8.0, 0.1);
    let st = build_stencil(&m);
    let kin = BarkleyKinetics::new(1.3, 0.19, 0.025, 0.0).unwrap();
    let g = m.grid;
    let mut s = SpiralState::uniform(g, 0.0, 0.0);
    s.u = g.sample(|x, _| if x > 0.0 { 1.0 } else { 0.0 });
    s.v = g.sample(|_, y| if y < 0.0 { 0.65 } else { 0.0 });
    let evolve = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let mut sim = Simulation::new(&st, kin, 1.0, dt_for(&m), &s).unwrap();
            sim.advance(500).unwrap();
            sim.state()
        })
    };
    let one = evolve(1);
    for n in [2, 3] {
        assert_eq!(evolve(n), one);
    }
}

#[test]
fn seeded_orbit_is_centred_at_the_requested_position() {
    let m = metric(
        ShapeConfig::Plane,
        FiberConfig::Constant { alpha0: 0.0 },
        1.0,
        20.0,
        0.1,
    );
    let kin = BarkleyKinetics::new(1.3, 0.19, 0.025, 0.0).unwrap();
    let dt = dt_for(&m);
    let target = (2.0, -1.5);
    let seeded = seed_spiral(&m, kin, dt, target, 1, &SeedSettings::default()).unwrap();
    assert!(seeded.planar.period > 3.0 && seeded.planar.period < 7.0);
    assert!(seeded.planar.core_radius > 0.2 && seeded.planar.core_radius < 1.0);
    assert_eq!(seeded.planar.chirality, 1);

    // One more rotation on the target plane: its mean tip position is the
    // orbit centre.
    let st = build_stencil(&m);
    let mut sim = Simulation::new(&st, kin, 1.0, dt, &seeded.state).unwrap();
    let level = kin.tip_v_level();
    let stride = (0.02 / dt).round() as u64;
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    let mut prev = None;
    while sim.time() < seeded.planar.period {
        sim.advance(stride).unwrap();
        let s = sim.state();
        let tip = spiraldrift::solver::track_tip(&m.grid, &s.u, &s.v, level, prev)
            .unwrap()
            .unwrap();
        prev = Some((tip.x, tip.y));
        sx += tip.x;
        sy += tip.y;
        n += 1.0;
    }
    let (cx, cy) = (sx / n, sy / n);
    let d = (cx - target.0).hypot(cy - target.1);
    assert!(d < 2.0 * m.grid.dx, "centre ({cx}, {cy})");
}
