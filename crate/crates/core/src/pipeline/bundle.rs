//! Pipeline driver and bundle layout.
//!
//! A bundle directory holds `metric.grid`, `tips.csv`, `final_state.grid`,
//! `drift.csv`, `rotations.csv`, `fit.json`, `prediction.csv` and
//! `summary.json`. Stages after a failure are skipped and recorded as such.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::compare::{compare_trajectories, DeviationReport};
use super::manifest::{ExperimentManifest, RadialDrift};
use super::PipelineError;
use crate::driftlaw::{
    integrate_drift, CurvatureSource, DriftPath, DriftSample, IntegratorSettings,
    MobilityCoefficients,
};
use crate::geometry::MetricField;
use crate::mobility::{
    extract_drift, fit_mobility, fit_q0, resample, DriftExtraction, ExtractSettings, FrequencyFit,
    MobilityFit,
};
use crate::solver::{run_experiment, ExperimentConfig, ExperimentRun, SeedSummary};

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Directory that relative config references resolve against.
    pub base_dir: PathBuf,
    /// Bundle directory; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
    /// Recorded in the summary.
    pub version: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub message: Option<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Numbers derived from a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineResults {
    pub seed: Option<SeedSummary>,
    pub tracking: Option<String>,
    pub simulated_time: Option<f64>,
    pub fit: Option<MobilityFit>,
    pub frequency: Option<FrequencyFit>,
    pub frequency_error: Option<String>,
    pub deviation: Option<DeviationReport>,
    /// First and last point of the analysed centre path.
    pub drift_start: Option<[f64; 2]>,
    pub drift_end: Option<[f64; 2]>,
    /// Net displacement over the analysed path in core diameters.
    pub drift_core_diameters: Option<f64>,
    /// Largest drop of the distance from the origin below its running
    /// maximum along the fit path.
    pub max_radius_drop: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub name: String,
    pub version: String,
    pub stages: Vec<StageRecord>,
    pub checks: Vec<CheckResult>,
    /// All stages that ran succeeded and every check passed.
    pub passed: bool,
    pub results: PipelineResults,
    pub manifest: ExperimentManifest,
    pub config: ExperimentConfig,
}

/// In-memory products of a pipeline run.
#[derive(Debug)]
pub struct PipelineOutcome {
    pub summary: PipelineSummary,
    pub metric: Option<MetricField>,
    pub run: Option<ExperimentRun>,
    pub extraction: Option<DriftExtraction>,
    /// Analysed centre path after the transient is discarded.
    pub observed: Option<DriftPath>,
    /// Observed path resampled at the fit stride.
    pub fit_path: Option<DriftPath>,
    pub prediction: Option<DriftPath>,
}

struct Stages {
    records: Vec<StageRecord>,
    failed: bool,
}

impl Stages {
    /// Runs `f` unless an earlier stage failed.
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T, PipelineError>) -> Option<T> {
        if self.failed {
            self.records.push(StageRecord {
                name: name.into(),
                status: StageStatus::Skipped,
                message: None,
                seconds: 0.0,
            });
            return None;
        }
        let start = Instant::now();
        let r = f();
        let seconds = start.elapsed().as_secs_f64();
        let (status, message, out) = match r {
            Ok(v) => (StageStatus::Ok, None, Some(v)),
            Err(e) => {
                self.failed = true;
                (StageStatus::Failed, Some(e.to_string()), None)
            }
        };
        self.records.push(StageRecord {
            name: name.into(),
            status,
            message,
            seconds,
        });
        out
    }
}

fn create(dir: &Option<PathBuf>, name: &str) -> Result<Option<BufWriter<File>>, PipelineError> {
    match dir {
        Some(d) => Ok(Some(BufWriter::new(File::create(d.join(name))?))),
        None => Ok(None),
    }
}

fn write_json(dir: &Option<PathBuf>, name: &str, v: &impl Serialize) -> Result<(), PipelineError> {
    if let Some(mut w) = create(dir, name)? {
        serde_json::to_writer_pretty(&mut w, v)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn shifted(path: DriftPath, t0: f64) -> DriftPath {
    DriftPath {
        samples: path
            .samples
            .into_iter()
            .map(|s| DriftSample { t: s.t + t0, ..s })
            .collect(),
        ..path
    }
}

/// Fit report written to `fit.json`.
#[derive(Serialize)]
struct FitReport<'a> {
    fit: &'a MobilityFit,
    std_errors: [f64; 2],
    frequency: Option<&'a FrequencyFit>,
    frequency_error: Option<&'a str>,
    stride: f64,
    /// SHA-256 of the resolved configuration and the tip CSV.
    input_digest: String,
    config: &'a ExperimentConfig,
}

/// Runs every stage of `manifest` and evaluates its expectations.
pub fn run_pipeline(
    manifest: &ExperimentManifest,
    options: &PipelineOptions,
) -> Result<PipelineOutcome, PipelineError> {
    manifest.expectations.validate()?;
    let config = manifest.resolve(&options.base_dir)?;
    let dir = options.out_dir.clone();
    if let Some(d) = &dir {
        std::fs::create_dir_all(d)?;
    }
    let mut st = Stages {
        records: Vec::new(),
        failed: false,
    };
    let mut res = PipelineResults::default();
    let analysis = manifest.analysis;

    let metric = st.run("geometry", || {
        let m = config.metric(&options.base_dir)?;
        if let Some(d) = &dir {
            m.to_dump().write(&d.join("metric.grid"))?;
        }
        Ok(m)
    });

    let mut run = None;
    let mut extraction = None;
    let mut observed = None;
    let mut fit_path = None;
    let mut prediction = None;
    let simulate = config.t_end > 0.0;
    if simulate {
        run = st.run("simulate", || {
            let metric = metric.as_ref().expect("geometry stage succeeded");
            let r = run_experiment(&config, metric)?;
            if let Some(mut w) = create(&dir, "tips.csv")? {
                r.trajectory.write_csv(&mut w)?;
                w.flush()?;
            }
            if let Some(d) = &dir {
                r.final_state.to_dump().write(&d.join("final_state.grid"))?;
            }
            Ok(r)
        });
        if let Some(r) = &run {
            res.seed = Some(r.seed);
            res.tracking = Some(format!("{:?}", r.trajectory.status));
            res.simulated_time = r.trajectory.samples.last().map(|s| s.t);
        }

        extraction = st.run("extract", || {
            let r = run.as_ref().expect("simulate stage succeeded");
            let e = extract_drift(&r.trajectory.samples, &ExtractSettings::default())?;
            if let Some(mut w) = create(&dir, "rotations.csv")? {
                writeln!(w, "t,period,x,y")?;
                for p in &e.rotations {
                    writeln!(w, "{},{},{},{}", p.t, p.period, p.x, p.y)?;
                }
                w.flush()?;
            }
            Ok(e)
        });
        observed = st.run("discard", || {
            let e = extraction.as_ref().expect("extract stage succeeded");
            let period = run.as_ref().expect("simulate").seed.period;
            let t_first = e.path.samples.first().map_or(0.0, |s| s.t);
            let cut = t_first + analysis.discard_rotations * period;
            let samples: Vec<_> = e
                .path
                .samples
                .iter()
                .copied()
                .filter(|s| s.t >= cut)
                .collect();
            if samples.len() < 2 {
                return Err(PipelineError::Manifest(format!(
                    "no centre samples remain after discarding {} rotations",
                    analysis.discard_rotations
                )));
            }
            let p = DriftPath::observed(samples);
            if let Some(mut w) = create(&dir, "drift.csv")? {
                p.write_csv(&mut w)?;
                w.flush()?;
            }
            Ok(p)
        });

        let fit = st.run("fit", || {
            let metric = metric.as_ref().expect("geometry");
            let r = run.as_ref().expect("simulate");
            let obs = observed.as_ref().expect("discard stage succeeded");
            let stride = analysis.fit_stride_periods * r.seed.period;
            let p = resample(obs, stride);
            let fit = fit_mobility(std::slice::from_ref(&p), metric)?;
            let rot = &extraction.as_ref().expect("extract").rotations;
            let periods: Vec<f64> = rot.iter().map(|p| p.period).collect();
            let ricci: Result<Vec<f64>, _> = rot
                .iter()
                .map(|p| metric.local(p.x, p.y).map(|l| l.ricci))
                .collect();
            let frequency = fit_q0(&periods, &ricci?, r.seed.omega0);
            res.frequency_error = frequency.as_ref().err().map(|e| e.to_string());
            res.frequency = frequency.ok();

            let mut h = Sha256::new();
            h.update(serde_json::to_vec(&config)?);
            let mut tips = Vec::new();
            r.trajectory.write_csv(&mut tips)?;
            h.update(&tips);
            let digest: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
            write_json(
                &dir,
                "fit.json",
                &FitReport {
                    fit: &fit,
                    std_errors: fit.std_errors(),
                    frequency: res.frequency.as_ref(),
                    frequency_error: res.frequency_error.as_deref(),
                    stride,
                    input_digest: digest,
                    config: &config,
                },
            )?;
            fit_path = Some(p);
            Ok(fit)
        });
        res.fit = fit;

        prediction = st.run("predict", || {
            let metric = metric.as_ref().expect("geometry");
            let fit = fit.expect("fit stage succeeded");
            let obs = observed.as_ref().expect("discard");
            let (a, b) = (obs.samples[0], obs.samples[obs.samples.len() - 1]);
            let q = MobilityCoefficients::drift(fit.q1, fit.q2);
            let settings = IntegratorSettings {
                sample_dt: analysis.fit_stride_periods
                    * run.as_ref().expect("simulate").seed.period,
                ..IntegratorSettings::default()
            };
            let p = shifted(
                integrate_drift(metric, [a.x, a.y], b.t - a.t, &q, &settings)?,
                a.t,
            );
            if let Some(mut w) = create(&dir, "prediction.csv")? {
                p.write_csv(&mut w)?;
                w.flush()?;
            }
            Ok(p)
        });
        res.deviation = st.run("compare", || {
            compare_trajectories(
                observed.as_ref().expect("discard"),
                prediction.as_ref().expect("predict stage succeeded"),
            )
        });

        if let (Some(p), Some(r)) = (&fit_path, &run) {
            let (a, b) = (p.samples[0], p.samples[p.samples.len() - 1]);
            res.drift_start = Some([a.x, a.y]);
            res.drift_end = Some([b.x, b.y]);
            res.drift_core_diameters =
                Some((b.x - a.x).hypot(b.y - a.y) / (2.0 * r.seed.core_radius));
            let mut top = f64::NEG_INFINITY;
            let mut drop = 0.0f64;
            for s in &p.samples {
                let rad = s.x.hypot(s.y);
                top = top.max(rad);
                drop = drop.max(top - rad);
            }
            res.max_radius_drop = Some(drop);
        }
    }

    let dx = config.dx;
    let checks = evaluate(manifest, &res, dx, simulate);
    let stages_ok = st.records.iter().all(|r| r.status == StageStatus::Ok);
    let summary = PipelineSummary {
        name: manifest.name.clone(),
        version: options.version.clone(),
        passed: stages_ok && checks.iter().all(|c| c.passed),
        stages: st.records,
        checks,
        results: res,
        manifest: manifest.clone(),
        config,
    };
    write_json(&dir, "summary.json", &summary)?;
    Ok(PipelineOutcome {
        summary,
        metric,
        run,
        extraction,
        observed,
        fit_path,
        prediction,
    })
}

fn sign_name(s: i8) -> &'static str {
    if s > 0 {
        "positive"
    } else {
        "negative"
    }
}

/// One check per declared expectation. Checks that need a stage which did
/// not produce its result fail.
fn evaluate(
    manifest: &ExperimentManifest,
    res: &PipelineResults,
    dx: f64,
    simulated: bool,
) -> Vec<CheckResult> {
    let e = &manifest.expectations;
    let mut out = Vec::new();
    let mut check = |name: String, v: Option<(bool, String)>| {
        let (passed, detail) = v.unwrap_or_else(|| {
            let why = if simulated {
                "not evaluated: an earlier stage failed"
            } else {
                "not evaluated: t_end is 0"
            };
            (false, why.into())
        });
        out.push(CheckResult {
            name,
            passed,
            detail,
        });
    };
    let ends = res.drift_start.zip(res.drift_end);

    if let Some(dir) = e.radial_drift {
        check(
            format!("radial drift {dir:?}").to_lowercase(),
            ends.map(|(a, b)| {
                let dr = b[0].hypot(b[1]) - a[0].hypot(a[1]);
                let ok = match dir {
                    RadialDrift::Outward => dr > dx,
                    RadialDrift::Inward => dr < -dx,
                };
                (ok, format!("radius change {dr:.4} (threshold dx = {dx})"))
            }),
        );
    }
    if e.monotone_radius == Some(true) {
        check(
            "monotone radius".into(),
            res.max_radius_drop.map(|d| {
                (
                    d <= dx,
                    format!("largest drop below running maximum {d:.4} (allowed dx = {dx})"),
                )
            }),
        );
    }
    if let Some(v) = e.drift_toward {
        check(
            format!("drift toward ({}, {})", v[0], v[1]),
            ends.map(|(a, b)| {
                let n = v[0].hypot(v[1]);
                let along = ((b[0] - a[0]) * v[0] + (b[1] - a[1]) * v[1]) / n;
                (
                    along > 0.0,
                    format!("displacement along direction {along:.4}"),
                )
            }),
        );
    }
    let fit = res.fit;
    for (name, sign, pick) in [
        (
            "q1",
            e.q1_sign,
            (|f: &MobilityFit| f.q1) as fn(&MobilityFit) -> f64,
        ),
        ("q2", e.q2_sign, |f: &MobilityFit| f.q2),
    ] {
        if let Some(s) = sign {
            check(
                format!("{name} {}", sign_name(s)),
                fit.map(|f| {
                    let v = pick(&f);
                    (v * s as f64 > 0.0, format!("fitted {name} = {v:.4}"))
                }),
            );
        }
    }
    if let Some(m) = e.max_q1_over_q2 {
        check(
            format!("|q1|/|q2| <= {m}"),
            fit.map(|f| {
                let r = f.q1.abs() / f.q2.abs();
                (r <= m, format!("ratio {r:.4}"))
            }),
        );
    }
    if let Some(r) = e.reference {
        for (name, want, pick) in [
            (
                "q1",
                r.q1,
                (|f: &MobilityFit| f.q1) as fn(&MobilityFit) -> f64,
            ),
            ("q2", r.q2, |f: &MobilityFit| f.q2),
        ] {
            check(
                format!("{name} within {:.0}% of {want}", 100.0 * r.rel_tol),
                fit.map(|f| {
                    let v = pick(&f);
                    let rel = (v - want).abs() / want.abs();
                    (
                        rel <= r.rel_tol && v.signum() == want.signum(),
                        format!("fitted {v:.4}, relative error {rel:.3}"),
                    )
                }),
            );
        }
    }
    let core = res.seed.map(|s| s.core_radius);
    if let Some(m) = e.max_mean_deviation_core_radii {
        check(
            format!("mean prediction deviation < {m} core radius"),
            res.deviation.zip(core).map(|(d, c)| {
                let v = d.mean / c;
                (
                    v < m,
                    format!("mean {:.4} = {v:.3} core radii, max {:.4}", d.mean, d.max),
                )
            }),
        );
    }
    if let Some(m) = e.min_drift_core_diameters {
        check(
            format!("drift >= {m} core diameters"),
            res.drift_core_diameters
                .map(|d| (d >= m, format!("net drift {d:.2} core diameters"))),
        );
    }
    out
}

/// Reads `summary.json` from a bundle directory.
pub fn read_summary(dir: &Path) -> Result<PipelineSummary, PipelineError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(
        dir.join("summary.json"),
    )?)?)
}
