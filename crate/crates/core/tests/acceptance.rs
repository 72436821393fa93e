//! Acceptance run: one PASS/FAIL line per criterion, plus INFO lines for
//! diagnostics that are reported but not counted.
//!
//! Set `ACCEPTANCE_QUICK=1` to skip the criteria that need long spiral
//! simulations; they are then reported as SKIP.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use spiraldrift::driftlaw::{
    eom_velocity, integrate_drift, paraboloid_constant, paraboloid_trajectory, planar_constant,
    planar_w, CurvatureSource, DriftPath, IntegratorSettings, MobilityCoefficients,
};
use spiraldrift::geometry::{
    christoffel_and_ricci, ricci_decomposition, DerivativeMode, FiberConfig, MetricField,
    ShapeConfig, SurfaceConfig, SurfaceSpec,
};
use spiraldrift::grid::Grid;
use spiraldrift::mobility::{
    extract_drift, fit_mobility, Complex64, ExtractSettings, PolarField, PolarGrid,
};
use spiraldrift::pipeline::{
    canonical_manifest, canonical_manifests, run_pipeline, PipelineOptions, PipelineSummary,
};
use spiraldrift::solver::{
    build_stencil, max_time_step, place_seed, planar_metric, planar_seed, run_experiment,
    BarkleyKinetics, ExperimentConfig, PlanarSeed, Simulation, SpiralState,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

#[derive(Default)]
struct Tally {
    passed: usize,
    failed: usize,
    skipped: usize,
}

impl Tally {
    fn run(&mut self, id: &str, title: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let o = f();
        let mark = if o.passed { "PASS" } else { "FAIL" };
        if o.passed {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!(
            "{mark} {id:<3} {title}: {} [{:.1} s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        std::io::stdout().flush().ok();
    }

    /// Diagnostic outside the criteria list: printed, never counted.
    fn info(&mut self, id: &str, title: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let o = f();
        let within = if o.passed { "within" } else { "outside" };
        println!(
            "INFO {id:<3} {title}: {} ({within} tolerance) [{:.1} s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        std::io::stdout().flush().ok();
    }

    fn skip(&mut self, id: &str, title: &str) {
        self.skipped += 1;
        println!("SKIP {id:<3} {title}: ACCEPTANCE_QUICK is set");
    }
}

fn surface(shape: ShapeConfig, fiber: FiberConfig, d_l: f64, length: f64, dx: f64) -> SurfaceSpec {
    SurfaceSpec::analytic(SurfaceConfig {
        shape,
        fiber,
        d_l,
        d_t: 1.0,
        d0: 1.0,
        length,
        dx,
    })
    .unwrap()
}

fn paraboloid(a: f64, length: f64, dx: f64) -> SurfaceSpec {
    surface(
        ShapeConfig::Paraboloid {
            coefficient: a,
            sign: -1.0,
        },
        FiberConfig::Constant { alpha0: 0.0 },
        1.0,
        length,
        dx,
    )
}

fn rotating_plane(b: f64, d_l: f64, length: f64, dx: f64) -> SurfaceSpec {
    surface(
        ShapeConfig::Plane,
        FiberConfig::Linear {
            alpha0: 0.0,
            rate: b,
        },
        d_l,
        length,
        dx,
    )
}

/// Paraboloid `z = −0.05 r²` with `D_L/D_T = 4` and `α = (π/40)(x + y)`.
fn curved_anisotropic(length: f64, dx: f64) -> SurfaceSpec {
    surface(
        ShapeConfig::Paraboloid {
            coefficient: 0.05,
            sign: -1.0,
        },
        FiberConfig::Linear {
            alpha0: 0.0,
            rate: PI / 40.0,
        },
        4.0,
        length,
        dx,
    )
}

fn metric(s: &SurfaceSpec) -> MetricField {
    christoffel_and_ricci(s, DerivativeMode::Analytic).unwrap()
}

/// With `ε → ∞` the reaction term of `u` vanishes and `u` only diffuses.
fn passive() -> BarkleyKinetics {
    BarkleyKinetics::new(1.0, 0.0, f64::INFINITY, 0.0).unwrap()
}

fn dt_bound(m: &MetricField) -> f64 {
    max_time_step(m.grid.dx, m.spec.d0, m.spec.d_l, m.spec.d_t)
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn fine_integrator() -> IntegratorSettings {
    IntegratorSettings {
        sample_dt: 0.5,
        initial_step: 0.5,
        tolerance: 1e-10,
        max_halvings: 20,
    }
}

fn criterion_1() -> Outcome {
    // 100 x 100 nodes on each geometry.
    let a = 0.1;
    let m = metric(&paraboloid(a, 19.8, 0.2));
    assert_eq!(m.grid.len(), 10_000);
    let g = m.grid;
    let mut worst_p = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let r2 = g.x(i).powi(2) + g.y(j).powi(2);
            let exact = 8.0 * a * a / (1.0 + 4.0 * a * a * r2).powi(2);
            worst_p = worst_p.max((m.ricci[g.index(i, j)] - exact).abs() / exact);
        }
    }
    let (b, d_l, d_t) = (PI / 40.0, 4.0, 1.0);
    let m = metric(&rotating_plane(b, d_l, 19.8, 0.2));
    let amp = 4.0 * (d_l - d_t) * b * b;
    let mut worst_a = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let alpha = b * (g.x(i) + g.y(j));
            let exact = amp * (2.0 * alpha).sin();
            worst_a = worst_a.max((m.ricci[g.index(i, j)] - exact).abs() / amp);
        }
    }
    let tol = 1e-8;
    outcome(
        worst_p < tol && worst_a < tol,
        format!(
            "paraboloid max rel err {worst_p:.2e}, anisotropic plane max err/amplitude {worst_a:.2e} (tol {tol:e}, 10^4 nodes each)"
        ),
    )
}

fn criterion_2() -> Outcome {
    let s = curved_anisotropic(20.0, 0.1);
    let check = |mode: DerivativeMode| {
        let full = christoffel_and_ricci(&s, mode).unwrap();
        let d = ricci_decomposition(&s, mode).unwrap();
        let sum = d.recombine(s.d_l, s.d_t);
        let scale = full.ricci.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        (0..full.ricci.len())
            .filter(|&k| !full.reduced_accuracy[k] && !d.reduced_accuracy[k])
            .map(|k| (full.ricci[k] - sum[k]).abs() / scale)
            .fold(0.0, f64::max)
    };
    let an = check(DerivativeMode::Analytic);
    let fd = check(DerivativeMode::FiniteDifference);
    outcome(
        an < 1e-6 && fd < 1e-3,
        format!(
            "max |R - (dT R_shape + (dL-dT) R_aniso)| / max|R|: analytic {an:.2e} (tol 1e-6), finite difference {fd:.2e} (tol 1e-3)"
        ),
    )
}

fn criterion_3(quick: bool) -> Outcome {
    let manifests: Vec<(String, ExperimentConfig)> = canonical_manifests()
        .iter()
        .filter(|m| !m.name.ends_with("-desk"))
        .map(|m| {
            (
                m.name.clone(),
                m.resolve(std::path::Path::new(".")).unwrap(),
            )
        })
        .collect();
    let mut geometries: Vec<SurfaceConfig> = Vec::new();
    for (_, c) in &manifests {
        let s = c.surface_config();
        if !geometries.contains(&s) {
            geometries.push(s);
        }
    }
    let mut worst = 0.0f64;
    for s in &geometries {
        let m = metric(&SurfaceSpec::analytic(s.clone()).unwrap());
        let g = m.grid;
        let mut rng = Lcg(11);
        let mut st = SpiralState::uniform(g, 0.0, 0.0);
        st.u = (0..g.len()).map(|_| rng.next()).collect();
        let total =
            |u: &[f64]| u.iter().zip(&m.sqrt_g).map(|(u, w)| u * w).sum::<f64>() * g.dx * g.dx;
        let before = total(&st.u);
        let mut sim =
            Simulation::new(&build_stencil(&m), passive(), m.spec.d0, dt_bound(&m), &st).unwrap();
        sim.advance(10_000).unwrap();
        worst = worst.max(((total(&sim.state().u) - before) / before).abs());
    }
    let conserved = worst < 1e-10;
    let mut detail = format!(
        "kinetics off, {} canonical geometries, 10^4 steps: max relative change of sum sqrt(g) u dx^2 {worst:.2e} (tol 1e-10)",
        geometries.len()
    );
    if quick {
        detail.push_str("; 10^5-step runs skipped");
        return outcome(conserved, detail);
    }
    // Each run starts from the spiral its experiment is seeded with. The
    // planar pre-run uses a 30 x 30 domain; configurations whose kinetics
    // support no spiral borrow the spiral of a manifest on the same surface.
    let mut seeds: Vec<(String, SpiralState)> = Vec::new();
    let mut notes = Vec::new();
    // Pre-runs depend only on the kinetics, the step and the metric at the origin.
    let mut planar: Vec<(String, Result<PlanarSeed, String>)> = Vec::new();
    for (name, c) in &manifests {
        let m = c.metric(std::path::Path::new(".")).unwrap();
        let kin = c.kinetics().unwrap();
        let dt = c.time_step().unwrap();
        let key = format!(
            "{kin:?} {dt} {} {} {:?} {:?}",
            c.chirality,
            m.spec.dx,
            m.spec.local(0.0, 0.0).unwrap().metric.lower,
            c.seed
        );
        if !planar.iter().any(|(k, _)| *k == key) {
            let p = planar_metric(&m.spec, 30.0)
                .and_then(|p| planar_seed(&p, kin, dt, c.chirality, &c.seed))
                .map_err(|e| e.to_string());
            planar.push((key.clone(), p));
        }
        let pos = (c.seed_position[0], c.seed_position[1]);
        match &planar.iter().find(|(k, _)| *k == key).unwrap().1 {
            Ok(p) => seeds.push((name.clone(), place_seed(p, m.grid, pos))),
            Err(e) => notes.push(format!("{name} has no spiral ({e})")),
        }
    }
    let mut failures = Vec::new();
    for (name, c) in &manifests {
        let m = c.metric(std::path::Path::new(".")).unwrap();
        let kin = c.kinetics().unwrap();
        let own = seeds.iter().find(|(n, _)| n == name);
        let donor = own.or_else(|| {
            seeds.iter().find(|(n, _)| {
                manifests
                    .iter()
                    .any(|(d, dc)| d == n && dc.surface_config() == c.surface_config())
            })
        });
        let Some((from, st)) = donor else {
            failures.push(format!("{name}: no spiral to start from"));
            continue;
        };
        if from != name {
            notes.push(format!("{name} starts from the {from} spiral"));
        }
        let mut sim = Simulation::new(
            &build_stencil(&m),
            kin,
            m.spec.d0,
            c.time_step().unwrap(),
            st,
        )
        .unwrap();
        // u is sampled every 10^3 steps for the range check.
        for _ in 0..100 {
            if let Err(e) = sim.advance(1_000) {
                failures.push(format!("{name}: {e}"));
                break;
            }
            let u = sim.state().u;
            let (lo, hi) = u
                .iter()
                .fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
            if !(lo >= -0.1 && hi <= 1.1) {
                failures.push(format!(
                    "{name}: u in [{lo:.3}, {hi:.3}] at t = {:.1}",
                    sim.time()
                ));
                break;
            }
        }
    }
    if !notes.is_empty() {
        detail.push_str(&format!("; {}", notes.join(", ")));
    }
    detail.push_str(&format!(
        "; {} canonical configurations x 10^5 steps at the dt bound: {}",
        manifests.len(),
        if failures.is_empty() {
            "all finite with u in [-0.1, 1.1]".to_string()
        } else {
            failures.join(", ")
        }
    ));
    outcome(conserved && failures.is_empty(), detail)
}

fn unwrapped_polar(p: &DriftPath) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for s in &p.samples {
        let mut phi = s.y.atan2(s.x);
        if let Some(&(_, prev)) = out.last() {
            phi += TAU * ((prev - phi) / TAU).round();
        }
        out.push((s.x.hypot(s.y), phi));
    }
    out
}

fn criterion_4() -> Outcome {
    let a = 0.5;
    let s = paraboloid(a, 12.0, 0.1);
    let mut worst_p = 0.0f64;
    for (q1, q2, r0) in [(0.855, -0.386, 1.0), (0.643, 0.357, 1.0), (-0.3, 1.2, 2.0)] {
        let q = MobilityCoefficients::drift(q1, q2);
        let p = integrate_drift(&s, [r0, 0.0], 40.0, &q, &fine_integrator()).unwrap();
        let polar = unwrapped_polar(&p);
        let c1 = paraboloid_constant(polar[0].0, polar[0].1, a, q1, q2).unwrap();
        for &(r, phi) in &polar {
            worst_p = worst_p.max((phi - paraboloid_trajectory(r, a, q1, q2, c1).unwrap()).abs());
        }
    }
    let (b, d_l) = (PI / 40.0, 4.0);
    let s = rotating_plane(b, d_l, 60.0, 0.1);
    let mut worst_w = 0.0f64;
    for (q1, q2) in [(0.643, 0.357), (-0.102, 2.652)] {
        let q = MobilityCoefficients::drift(q1, q2);
        let p = integrate_drift(&s, [1.0, 2.0], 150.0, &q, &fine_integrator()).unwrap();
        let c2 = planar_constant(1.0, 2.0, b, d_l, 1.0, q1, q2).unwrap();
        for x in &p.samples {
            let w = planar_w(x.x + x.y, b, d_l, 1.0, q1, q2, c2).unwrap();
            worst_w = worst_w.max((x.x - x.y - w).abs());
        }
    }
    let dphi = paraboloid_trajectory(2.0, 0.5, 1.0, 1.0, 0.0).unwrap()
        - paraboloid_trajectory(1.0, 0.5, 1.0, 1.0, 0.0).unwrap();
    // Independent oracle: Simpson quadrature of the slope over [1, 2].
    let n = 2000;
    let h = 1.0 / n as f64;
    let f = |r: f64| (1.0 + r * r).sqrt() / r;
    let quad = (f(1.0)
        + f(2.0)
        + (1..n)
            .map(|k| f(1.0 + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 })
            .sum::<f64>())
        * h
        / 3.0;
    let ok = worst_p < 1e-6
        && worst_w < 1e-6
        && (dphi - quad).abs() < 1e-10
        && (dphi - 1.22202).abs() < 5e-6;
    outcome(
        ok,
        format!(
            "max |phi - phi(r)| {worst_p:.2e}, max |w - W(z)| {worst_w:.2e} (tol 1e-6); delta phi(1->2) {dphi:.6} vs quadrature {quad:.6}"
        ),
    )
}

struct Runs {
    dir: PathBuf,
    summaries: Vec<(String, Option<PipelineSummary>)>,
}

impl Runs {
    fn get(&mut self, name: &str) -> Option<&PipelineSummary> {
        if !self.summaries.iter().any(|(n, _)| n == name) {
            let m = canonical_manifest(name).expect("canonical manifest");
            let opts = PipelineOptions {
                base_dir: ".".into(),
                out_dir: Some(self.dir.join(name)),
                version: env!("CARGO_PKG_VERSION").into(),
            };
            let start = Instant::now();
            let s = match run_pipeline(&m, &opts) {
                Ok(o) => Some(o.summary),
                Err(e) => {
                    println!("     {name}: pipeline error {e}");
                    None
                }
            };
            println!(
                "     {name}: bundle in {} [{:.0} s]",
                self.dir.join(name).display(),
                start.elapsed().as_secs_f64()
            );
            self.summaries.push((name.into(), s));
        }
        self.summaries
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, s)| s.as_ref())
    }
}

fn stage_failure(s: &PipelineSummary) -> Option<String> {
    s.stages
        .iter()
        .find(|r| r.status != spiraldrift::pipeline::StageStatus::Ok)
        .map(|r| {
            format!(
                "stage {} {:?}: {}",
                r.name,
                r.status,
                r.message.clone().unwrap_or_default()
            )
        })
}

fn criterion_5(runs: &mut Runs) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let dx = 0.1;

    match runs.get("fig3-desk") {
        Some(s) if stage_failure(s).is_none() => {
            let r = &s.results;
            let (a, b) = (r.drift_start.unwrap(), r.drift_end.unwrap());
            let dr = b[0].hypot(b[1]) - a[0].hypot(a[1]);
            let drop = r.max_radius_drop.unwrap();
            let q1 = r.fit.unwrap().q1;
            let pass = dr > dx && drop <= dx && q1 > 0.0;
            ok &= pass;
            parts.push(format!(
                "(a) radius {:.3} -> {:.3} (q1 = 0 keeps it fixed), largest inward step {drop:.3}, fitted q1 {q1:.3}",
                a[0].hypot(a[1]),
                b[0].hypot(b[1])
            ));
        }
        other => {
            ok = false;
            parts.push(format!(
                "(a) run failed: {:?}",
                other.and_then(stage_failure)
            ));
        }
    }
    match runs.get("fig4a-desk") {
        Some(s) if stage_failure(s).is_none() => {
            let r = &s.results;
            let (a, b) = (r.drift_start.unwrap(), r.drift_end.unwrap());
            // α = −π/4 on the line x + y = −π/(4B) = −10.
            let line = |p: [f64; 2]| (p[0] + p[1] + 10.0).abs() / 2f64.sqrt();
            let q1 = r.fit.unwrap().q1;
            let pass = q1 > 0.0 && line(b) < line(a);
            ok &= pass;
            parts.push(format!(
                "(b) fitted q1 {q1:.3}, distance to the alpha = -pi/4 line {:.3} -> {:.3}",
                line(a),
                line(b)
            ));
        }
        other => {
            ok = false;
            parts.push(format!(
                "(b) run failed: {:?}",
                other.and_then(stage_failure)
            ));
        }
    }
    match runs.get("fig4b-desk") {
        Some(s) if stage_failure(s).is_none() => {
            let f = s.results.fit.unwrap();
            let ratio = f.q1.abs() / f.q2.abs();
            let pass = f.q1 < 0.0 && ratio <= 0.2;
            ok &= pass;
            parts.push(format!(
                "(c) fitted q1 {:.4}, |q1|/|q2| {ratio:.3} (<= 0.2)",
                f.q1
            ));
        }
        other => {
            ok = false;
            parts.push(format!(
                "(c) run failed: {:?}",
                other.and_then(stage_failure)
            ));
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6(runs: &mut Runs) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, want) in [
        ("fig4a-desk", (0.643, 0.357)),
        ("fig4b-desk", (-0.102, 2.652)),
    ] {
        match runs.get(name).and_then(|s| s.results.fit) {
            Some(f) => {
                let e1 = (f.q1 - want.0).abs() / want.0.abs();
                let e2 = (f.q2 - want.1).abs() / want.1.abs();
                let signs = f.q1.signum() == want.0.signum() && f.q2.signum() == want.1.signum();
                ok &= e1 <= 0.25 && e2 <= 0.25 && signs;
                parts.push(format!(
                    "{name} ({:.3}, {:.3}) vs ({}, {}): rel err ({e1:.3}, {e2:.3})",
                    f.q1, f.q2, want.0, want.1
                ));
            }
            None => {
                ok = false;
                parts.push(format!("{name}: no fit"));
            }
        }
    }
    outcome(ok, format!("{} (tol 0.25, signs exact)", parts.join("; ")))
}

fn criterion_7(runs: &mut Runs) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["fig4a-desk", "fig5a-red-desk"] {
        let Some(s) = runs.get(name) else {
            ok = false;
            parts.push(format!("{name}: run failed"));
            continue;
        };
        let r = &s.results;
        match (r.deviation, r.seed, r.drift_core_diameters) {
            (Some(d), Some(seed), Some(n)) => {
                let mean = d.mean / seed.core_radius;
                ok &= mean < 1.0 && n >= 5.0;
                parts.push(format!(
                    "{name} mean deviation {mean:.3} core radii over {n:.2} core diameters (max {:.3})",
                    d.max / seed.core_radius
                ));
            }
            _ => {
                ok = false;
                parts.push(format!("{name}: {:?}", stage_failure(s)));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

/// Period shift at the top of the paraboloid against `q0 𝓡` with `q0`
/// fitted on the fig3 run.
fn frequency_at_top(runs: &mut Runs) -> Outcome {
    let Some(freq) = runs.get("fig3-desk").and_then(|s| s.results.frequency) else {
        return outcome(false, "no q0 fit from the fig3 run");
    };
    let mut c = canonical_manifest("fig3-desk")
        .unwrap()
        .resolve(std::path::Path::new("."))
        .unwrap();
    c.seed_position = [0.0, 0.0];
    c.t_end = 60.0;
    let m = c.metric(std::path::Path::new(".")).unwrap();
    let run = match run_experiment(&c, &m) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let e = match extract_drift(&run.trajectory.samples, &ExtractSettings::default()) {
        Ok(e) => e,
        Err(e) => return outcome(false, format!("extraction failed: {e}")),
    };
    let rot = &e.rotations[1..];
    let n = rot.len() as f64;
    let measured = rot
        .iter()
        .map(|p| TAU / p.period - run.seed.omega0)
        .sum::<f64>()
        / n;
    let ricci = rot
        .iter()
        .map(|p| m.local(p.x, p.y).unwrap().ricci)
        .sum::<f64>()
        / n;
    let predicted = freq.q0 * ricci;
    let rel = (measured - predicted).abs() / predicted.abs();
    outcome(
        rel <= 0.25,
        format!(
            "R at the orbit centre {ricci:.4}, measured omega - omega0 {measured:.4}, q0 R = {:.3} x {ricci:.4} = {predicted:.4}, rel err {rel:.3} (tol 0.25)",
            freq.q0
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        parts.push(format!(
            "{name} {} ({detail})",
            if pass { "ok" } else { "FAILED" }
        ));
    };

    let m = metric(&curved_anisotropic(40.0, 0.1));
    let st = build_stencil(&m);
    let worst = (0..m.grid.len())
        .map(|k| st.row_sum(k).abs() / st.coeff(0, 0, k).abs())
        .fold(0.0, f64::max);
    check("zero row sum", worst < 1e-12, format!("{worst:.1e}"));

    let flat = metric(&surface(
        ShapeConfig::Plane,
        FiberConfig::Constant { alpha0: 0.7 },
        1.0,
        4.0,
        0.5,
    ));
    let fs = build_stencil(&flat);
    let k = flat.grid.index(4, 4);
    let five = [(0, -1), (-1, 0), (1, 0), (0, 1)]
        .iter()
        .all(|&(i, j)| fs.coeff(i, j, k) == 1.0)
        && fs.coeff(0, 0, k) == -4.0
        && [(1, 1), (1, -1), (-1, 1), (-1, -1)]
            .iter()
            .all(|&(i, j)| fs.coeff(i, j, k).abs() < 1e-15);
    check("five-point reduction", five, "exact".into());

    let order = diffusion_orders();
    check(
        "2nd-order convergence",
        order.iter().all(|o| (1.8..2.3).contains(o)),
        format!("orders {:.2}, {:.2}", order[0], order[1]),
    );

    let s = curved_anisotropic(40.0, 0.1);
    let mut rng = Lcg(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (x, y) = (30.0 * rng.next() - 15.0, 30.0 * rng.next() - 15.0);
        let (q1, q2) = (4.0 * rng.next() - 2.0, 4.0 * rng.next() - 2.0);
        let l = s.local(x, y).unwrap();
        let up = l.metric.upper.apply(l.gradient);
        let v = eom_velocity(&s, x, y, &MobilityCoefficients::drift(q1, q2)).unwrap();
        let g = l.metric.lower;
        let inner = |a: [f64; 2], b: [f64; 2]| {
            g.xx * a[0] * b[0] + g.xy * (a[0] * b[1] + a[1] * b[0]) + g.yy * a[1] * b[1]
        };
        let d = [-up[0], -up[1]];
        let norm = (inner(v, v) * inner(d, d)).sqrt();
        let got = (l.metric.sqrt_g * (d[0] * v[1] - d[1] * v[0]) / norm).atan2(inner(v, d) / norm);
        let diff = (got - q2.atan2(q1) + PI).rem_euclid(TAU) - PI;
        worst = worst.max(diff.abs());
    }
    check(
        "drift angle atan2(q2, q1)",
        worst < 1e-9,
        format!("{worst:.1e} rad"),
    );

    let p = integrate_drift(
        &s,
        [2.0, 3.0],
        200.0,
        &MobilityCoefficients::drift(0.0, 1.0),
        &fine_integrator(),
    )
    .unwrap();
    let r0 = s.local(2.0, 3.0).unwrap().ricci;
    let worst = p
        .samples
        .iter()
        .map(|x| (s.local(x.x, x.y).unwrap().ricci - r0).abs() / r0.abs())
        .fold(0.0, f64::max);
    check(
        "q2 neutrality",
        worst < 1e-8,
        format!("rel R change {worst:.1e} over arc {:.2}", p.arc_length()),
    );

    let iso = paraboloid(0.1, 40.0, 0.1);
    let q = MobilityCoefficients::drift(0.855, -0.386);
    let a = integrate_drift(&iso, [3.0, 1.0], 300.0, &q, &fine_integrator()).unwrap();
    let b = integrate_drift(
        &iso,
        [3.0, -1.0],
        300.0,
        &q.with_chirality(-1),
        &fine_integrator(),
    )
    .unwrap();
    let worst = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(p, m)| (p.x - m.x).abs().max((p.y + m.y).abs()))
        .fold(0.0, f64::max);
    check(
        "chirality mirror",
        a.samples.len() == b.samples.len() && worst < 1e-9,
        format!("{worst:.1e}"),
    );

    let plane = rotating_plane(PI / 40.0, 4.0, 30.0, 0.1);
    let settings = IntegratorSettings {
        sample_dt: 0.25,
        ..IntegratorSettings::default()
    };
    let path = integrate_drift(
        &plane,
        [0.0, 0.0],
        300.0,
        &MobilityCoefficients::drift(0.643, 0.357),
        &settings,
    )
    .unwrap();
    let f = fit_mobility(&[path], &plane).unwrap();
    let err = (f.q1 - 0.643).abs().max((f.q2 - 0.357).abs());
    check(
        "fitter round trip",
        err < 1e-3,
        format!("({:.5}, {:.5}), err {err:.1e}", f.q1, f.q2),
    );

    let quad: Vec<f64> = [51, 101, 201]
        .iter()
        .map(|&n_r| {
            let g = PolarGrid::new(n_r, 32, 5.0).unwrap();
            let one = PolarField::from_fn(g, 1, |_, _, _| Complex64::new(1.0, 0.0));
            let f = PolarField::from_fn(g, 1, |_, r, _| Complex64::new((-r * r).exp(), 0.0));
            (one.inner(&f).unwrap().re - PI * (1.0 - (-25.0f64).exp())).abs()
        })
        .collect();
    let orders = [(quad[0] / quad[1]).log2(), (quad[1] / quad[2]).log2()];
    check(
        "quadrature convergence",
        orders.iter().all(|o| (1.8..2.3).contains(o)),
        format!("orders {:.2}, {:.2}", orders[0], orders[1]),
    );
    outcome(ok, parts.join("; "))
}

/// Observed orders from successive differences of diffusion runs at
/// `dx = 0.2, 0.1, 0.05, 0.025` on the curved anisotropic surface.
fn diffusion_orders() -> [f64; 2] {
    let t_end = 0.1;
    let levels: Vec<(Grid, Vec<f64>)> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&dx| {
            let m = metric(&curved_anisotropic(10.0, dx));
            let g = m.grid;
            let mut s = SpiralState::uniform(g, 0.0, 0.0);
            s.u = g.sample(|x, y| (-(x - 0.3).powi(2) - (y + 0.2).powi(2)).exp());
            let steps = (t_end / dt_bound(&m)).ceil() as u64;
            let mut sim =
                Simulation::new(&build_stencil(&m), passive(), 1.0, t_end / steps as f64, &s)
                    .unwrap();
            sim.advance(steps).unwrap();
            (g, sim.state().u)
        })
        .collect();
    let d: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            let ((g, u), (gf, f)) = (&w[0], &w[1]);
            let mut e = 0.0f64;
            for j in 0..g.ny {
                for i in 0..g.nx {
                    e = e.max((u[g.index(i, j)] - f[gf.index(2 * i, 2 * j)]).abs());
                }
            }
            e
        })
        .collect();
    [(d[0] / d[1]).log2(), (d[1] / d[2]).log2()]
}

fn main() {
    let quick = std::env::var_os("ACCEPTANCE_QUICK").is_some();
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let mut runs = Runs {
        dir,
        summaries: Vec::new(),
    };
    let mut t = Tally::default();
    t.run("1", "geometry exactness", criterion_1);
    t.run("2", "decomposition identity", criterion_2);
    t.run("3", "conservation and stability", || criterion_3(quick));
    t.run("4", "closed form vs integrator", criterion_4);
    if quick {
        t.skip("5", "sign reproduction");
        println!("SKIP 5f  rotation frequency at the paraboloid top: ACCEPTANCE_QUICK is set");
        t.skip("6", "coefficient check");
        t.skip("7", "trajectory overlay");
    } else {
        t.run("5", "sign reproduction", || criterion_5(&mut runs));
        t.info("5f", "rotation frequency at the paraboloid top", || {
            frequency_at_top(&mut runs)
        });
        t.run("6", "coefficient check", || criterion_6(&mut runs));
        t.run("7", "trajectory overlay", || criterion_7(&mut runs));
    }
    t.run("8", "property suites", criterion_8);
    println!(
        "acceptance: {} passed, {} failed, {} skipped",
        t.passed, t.failed, t.skipped
    );
    if t.failed > 0 {
        std::process::exit(1);
    }
}
