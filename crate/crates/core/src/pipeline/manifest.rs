//! Experiment manifests: a run configuration, analysis settings and the
//! expectations a bundle is checked against.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::solver::ExperimentConfig;

/// Inline configuration or a path relative to the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigRef {
    Path(PathBuf),
    Inline(Box<ExperimentConfig>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisSettings {
    /// Velocity estimates are taken over this many rotation periods.
    pub fit_stride_periods: f64,
    /// Rotations dropped from the start of the centre path.
    pub discard_rotations: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            fit_stride_periods: 1.0,
            discard_rotations: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialDrift {
    Outward,
    Inward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCoefficients {
    pub q1: f64,
    pub q2: f64,
    /// Allowed relative error per component; signs must match exactly.
    pub rel_tol: f64,
}

/// Declared outcomes; every present field becomes one pass/fail check.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expectations {
    /// Sign of the change in distance from the origin.
    pub radial_drift: Option<RadialDrift>,
    /// Distance from the origin never decreases between fit samples.
    pub monotone_radius: Option<bool>,
    /// Net displacement has a positive component along this direction.
    pub drift_toward: Option<[f64; 2]>,
    pub q1_sign: Option<i8>,
    pub q2_sign: Option<i8>,
    /// Upper bound on `|q1| / |q2|`.
    pub max_q1_over_q2: Option<f64>,
    pub reference: Option<ReferenceCoefficients>,
    /// Upper bound on the mean prediction deviation in core radii.
    pub max_mean_deviation_core_radii: Option<f64>,
    /// Lower bound on the centre path length in core diameters.
    pub min_drift_core_diameters: Option<f64>,
}

impl Expectations {
    pub fn validate(&self) -> Result<(), PipelineError> {
        for (name, s) in [("q1_sign", self.q1_sign), ("q2_sign", self.q2_sign)] {
            if let Some(s) = s {
                if s != 1 && s != -1 {
                    return Err(PipelineError::Manifest(format!("{name} must be 1 or -1")));
                }
            }
        }
        if let Some(d) = self.drift_toward {
            if d[0] == 0.0 && d[1] == 0.0 {
                return Err(PipelineError::Manifest(
                    "drift_toward must be non-zero".into(),
                ));
            }
        }
        if let Some(r) = &self.reference {
            if !(r.rel_tol > 0.0) {
                return Err(PipelineError::Manifest(
                    "reference.rel_tol must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub name: String,
    pub config: ConfigRef,
    /// Overrides `config.t_end`.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    #[serde(default)]
    pub expectations: Expectations,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        let m: Self = serde_json::from_str(&text)?;
        m.expectations.validate()?;
        Ok(m)
    }

    /// The configuration with references resolved against `base_dir` and
    /// overrides applied.
    pub fn resolve(&self, base_dir: &Path) -> Result<ExperimentConfig, PipelineError> {
        let mut c = match &self.config {
            ConfigRef::Inline(c) => (**c).clone(),
            ConfigRef::Path(p) => {
                let text = std::fs::read_to_string(base_dir.join(p))
                    .map_err(|e| PipelineError::Manifest(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text)?
            }
        };
        if let Some(t) = self.t_end {
            c.t_end = t;
        }
        if c.name.is_empty() {
            c.name = self.name.clone();
        }
        Ok(c)
    }
}

struct Row {
    name: &'static str,
    a: f64,
    b: f64,
    paraboloid: f64,
    fiber_rate: f64,
    length: f64,
    d_v: f64,
    d_l: f64,
    seed: [f64; 2],
    desk_t_end: f64,
    expectations: Expectations,
}

const PI: f64 = std::f64::consts::PI;

fn rows() -> Vec<Row> {
    let overlay = |e: Expectations| Expectations {
        max_mean_deviation_core_radii: Some(1.0),
        min_drift_core_diameters: Some(5.0),
        ..e
    };
    vec![
        Row {
            name: "fig3",
            a: 0.7,
            b: 0.01,
            paraboloid: 0.1,
            fiber_rate: 0.0,
            length: 40.0,
            d_v: 1.0,
            d_l: 1.0,
            seed: [3.0, 0.0],
            desk_t_end: 300.0,
            expectations: Expectations {
                radial_drift: Some(RadialDrift::Outward),
                monotone_radius: Some(true),
                q1_sign: Some(1),
                ..Default::default()
            },
        },
        Row {
            name: "fig3-table",
            a: 0.7,
            b: 0.19,
            paraboloid: 0.1,
            fiber_rate: 0.0,
            length: 40.0,
            d_v: 1.0,
            d_l: 1.0,
            seed: [3.0, 0.0],
            desk_t_end: 300.0,
            expectations: Expectations::default(),
        },
        Row {
            name: "fig4a",
            a: 1.3,
            b: 0.19,
            paraboloid: 0.0,
            fiber_rate: PI / 40.0,
            length: 30.0,
            d_v: 0.0,
            d_l: 4.0,
            seed: [0.0, 0.0],
            desk_t_end: 330.0,
            expectations: overlay(Expectations {
                drift_toward: Some([-1.0, -1.0]),
                q1_sign: Some(1),
                q2_sign: Some(1),
                reference: Some(ReferenceCoefficients {
                    q1: 0.643,
                    q2: 0.357,
                    rel_tol: 0.25,
                }),
                ..Default::default()
            }),
        },
        Row {
            name: "fig4b",
            a: 1.1,
            b: 0.19,
            paraboloid: 0.0,
            fiber_rate: PI / 40.0,
            length: 30.0,
            d_v: 0.0,
            d_l: 4.0,
            seed: [0.0, 0.0],
            desk_t_end: 120.0,
            expectations: Expectations {
                q1_sign: Some(-1),
                q2_sign: Some(1),
                max_q1_over_q2: Some(0.2),
                reference: Some(ReferenceCoefficients {
                    q1: -0.102,
                    q2: 2.652,
                    rel_tol: 0.25,
                }),
                ..Default::default()
            },
        },
        Row {
            name: "fig5a-red",
            a: 1.3,
            b: 0.19,
            paraboloid: 0.05,
            fiber_rate: PI / 40.0,
            length: 40.0,
            d_v: 0.0,
            d_l: 4.0,
            seed: [0.0, 0.0],
            desk_t_end: 320.0,
            expectations: overlay(Expectations {
                q1_sign: Some(1),
                ..Default::default()
            }),
        },
        Row {
            name: "fig5a-yellow",
            a: 1.3,
            b: 0.19,
            paraboloid: 0.05,
            fiber_rate: 0.0,
            length: 40.0,
            d_v: 0.0,
            d_l: 1.0,
            seed: [3.0, 0.0],
            desk_t_end: 300.0,
            expectations: Expectations {
                radial_drift: Some(RadialDrift::Outward),
                q1_sign: Some(1),
                ..Default::default()
            },
        },
        Row {
            name: "fig5b-red",
            a: 1.1,
            b: 0.19,
            paraboloid: 0.025,
            fiber_rate: PI / 80.0,
            length: 80.0,
            d_v: 0.0,
            d_l: 4.0,
            seed: [0.0, 0.0],
            desk_t_end: 150.0,
            expectations: Expectations {
                q1_sign: Some(-1),
                ..Default::default()
            },
        },
        Row {
            name: "fig5b-yellow",
            a: 1.1,
            b: 0.19,
            paraboloid: 0.025,
            fiber_rate: 0.0,
            length: 80.0,
            d_v: 0.0,
            d_l: 1.0,
            seed: [6.0, 0.0],
            desk_t_end: 150.0,
            expectations: Expectations {
                radial_drift: Some(RadialDrift::Inward),
                q1_sign: Some(-1),
                ..Default::default()
            },
        },
    ]
}

/// Full-length runs are this many times longer than the desk variants.
const FULL_LENGTH_FACTOR: f64 = 4.0;

fn manifest(row: Row, desk: bool) -> ExperimentManifest {
    let t_end = if desk {
        row.desk_t_end
    } else {
        FULL_LENGTH_FACTOR * row.desk_t_end
    };
    let config = ExperimentConfig {
        name: String::new(),
        a: row.a,
        b: row.b,
        eps: 0.025,
        paraboloid: row.paraboloid,
        shape_sign: -1.0,
        fiber_rate: row.fiber_rate,
        alpha0: 0.0,
        length: row.length,
        dx: 0.1,
        d_v: row.d_v,
        d_l: row.d_l,
        d_t: 1.0,
        d0: 1.0,
        t_end,
        seed_position: row.seed,
        chirality: 1,
        tip_stride: 0.05,
        snapshot_stride: None,
        dt: None,
        seed: Default::default(),
        boundary_margin: 2.0,
        surface: None,
    };
    let name = if desk {
        format!("{}-desk", row.name)
    } else {
        row.name.to_string()
    };
    ExperimentManifest {
        config: ConfigRef::Inline(Box::new(ExperimentConfig {
            name: name.clone(),
            ..config
        })),
        name,
        t_end: None,
        analysis: AnalysisSettings::default(),
        expectations: row.expectations,
    }
}

/// Built-in manifests: one per parameter row plus a `-desk` variant with a
/// shorter run.
pub fn canonical_manifests() -> Vec<ExperimentManifest> {
    let mut out = Vec::new();
    for desk in [false, true] {
        out.extend(rows().into_iter().map(|r| manifest(r, desk)));
    }
    out
}

pub fn canonical_manifest(name: &str) -> Option<ExperimentManifest> {
    canonical_manifests().into_iter().find(|m| m.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_names_are_unique_and_resolvable() {
        let all = canonical_manifests();
        let mut names: Vec<_> = all.iter().map(|m| m.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
        for m in &all {
            m.expectations.validate().unwrap();
            let c = m.resolve(Path::new(".")).unwrap();
            assert_eq!((c.eps, c.d0, c.d_t), (0.025, 1.0, 1.0));
            c.kinetics().unwrap();
        }
        let desk = canonical_manifest("fig4a-desk")
            .unwrap()
            .resolve(Path::new("."))
            .unwrap();
        let full = canonical_manifest("fig4a")
            .unwrap()
            .resolve(Path::new("."))
            .unwrap();
        assert_eq!(desk.length, full.length);
        assert!(desk.t_end < full.t_end);
    }

    #[test]
    fn manifest_json_round_trip_with_path_reference() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = r#"{"a":1.3,"b":0.19,"L":10,"dx":0.1,"D_v":0,"t_end":5}"#;
        std::fs::write(dir.path().join("run.json"), cfg).unwrap();
        let text = r#"{"name":"m","config":"run.json","t_end":0,
                       "expectations":{"q1_sign":1,"drift_toward":[-1,-1]}}"#;
        std::fs::write(dir.path().join("m.json"), text).unwrap();
        let m = ExperimentManifest::load(&dir.path().join("m.json")).unwrap();
        let c = m.resolve(dir.path()).unwrap();
        assert_eq!((c.t_end, c.name.as_str()), (0.0, "m"));
        assert_eq!(m.expectations.q1_sign, Some(1));
    }

    #[test]
    fn invalid_expectations_are_rejected() {
        let e = Expectations {
            q1_sign: Some(2),
            ..Default::default()
        };
        assert!(e.validate().is_err());
        let bad: Result<Expectations, _> = serde_json::from_str(r#"{"q3_sign":1}"#);
        assert!(bad.is_err());
    }
}
