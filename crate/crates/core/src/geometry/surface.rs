//! Problem definition: surface shape, projected fiber angle and diffusivities.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::finite_diff::{bilinear, partial};
use super::taylor::Real;
use super::GeometryError;
use crate::grid::{FieldDump, Grid};

/// JSON form of the shape `z = f(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeConfig {
    Plane,
    /// `z = sign * A * (x² + y²)`.
    Paraboloid {
        #[serde(rename = "A")]
        coefficient: f64,
        #[serde(default = "negative")]
        sign: f64,
    },
    /// Heights sampled on the simulation grid, read from a grid dump.
    Tabulated {
        file: PathBuf,
        #[serde(default = "default_shape_field")]
        field: String,
    },
}

fn negative() -> f64 {
    -1.0
}

fn default_shape_field() -> String {
    "f".into()
}

fn default_angle_field() -> String {
    "alpha".into()
}

/// JSON form of the projected fiber angle `α(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FiberConfig {
    Constant {
        #[serde(default)]
        alpha0: f64,
    },
    /// `α = alpha0 + B (x + y)`.
    Linear {
        #[serde(default)]
        alpha0: f64,
        #[serde(rename = "B")]
        rate: f64,
    },
    Tabulated {
        file: PathBuf,
        #[serde(default = "default_angle_field")]
        field: String,
    },
}

/// JSON surface specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceConfig {
    pub shape: ShapeConfig,
    pub fiber: FiberConfig,
    #[serde(rename = "dL")]
    pub d_l: f64,
    #[serde(rename = "dT")]
    pub d_t: f64,
    #[serde(rename = "D0", default = "one")]
    pub d0: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub dx: f64,
}

fn one() -> f64 {
    1.0
}

/// Samples on the specification grid together with finite-difference slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    pub values: Arc<Vec<f64>>,
    pub d_dx: Arc<Vec<f64>>,
    pub d_dy: Arc<Vec<f64>>,
}

impl Tabulated {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Self {
        let d_dx = partial(grid, &values, 0);
        let d_dy = partial(grid, &values, 1);
        Self {
            values: Arc::new(values),
            d_dx: Arc::new(d_dx),
            d_dy: Arc::new(d_dy),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Plane,
    Paraboloid { coefficient: f64, sign: f64 },
    Tabulated(Tabulated),
}

impl Shape {
    /// Closed-form `(∂ₓf, ∂ᵧf)`; `None` for tabulated shapes.
    pub fn slopes<T: Real>(&self, x: T, y: T) -> Option<(T, T)> {
        match *self {
            Shape::Plane => Some((T::cst(0.0), T::cst(0.0))),
            Shape::Paraboloid { coefficient, sign } => {
                let k = T::cst(2.0 * sign * coefficient);
                Some((k * x, k * y))
            }
            Shape::Tabulated(_) => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, Shape::Tabulated(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiberAngle {
    Constant(f64),
    Linear { alpha0: f64, rate: f64 },
    Tabulated(Tabulated),
}

impl FiberAngle {
    pub fn angle<T: Real>(&self, x: T, y: T) -> Option<T> {
        match *self {
            FiberAngle::Constant(a) => Some(T::cst(a)),
            FiberAngle::Linear { alpha0, rate } => Some(T::cst(alpha0) + T::cst(rate) * (x + y)),
            FiberAngle::Tabulated(_) => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, FiberAngle::Tabulated(_))
    }
}

/// A validated surface with fibers, ready for metric construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub shape: Shape,
    pub fiber: FiberAngle,
    pub d_l: f64,
    pub d_t: f64,
    pub d0: f64,
    pub length: f64,
    pub dx: f64,
    config: SurfaceConfig,
}

impl SurfaceSpec {
    /// Builds a spec from its JSON form. Relative tabulated-file paths are
    /// resolved against `base_dir`.
    pub fn from_config(config: SurfaceConfig, base_dir: &Path) -> Result<Self, GeometryError> {
        let grid = Grid::centered_square(config.length, config.dx);
        let load = |file: &Path, field: &str| -> Result<Tabulated, GeometryError> {
            let path = if file.is_absolute() {
                file.to_path_buf()
            } else {
                base_dir.join(file)
            };
            let dump = FieldDump::read(&path)?;
            if dump.grid.nx != grid.nx || dump.grid.ny != grid.ny {
                return Err(GeometryError::InvalidSpec(format!(
                    "tabulated field {} is {}x{}, expected {}x{}",
                    path.display(),
                    dump.grid.nx,
                    dump.grid.ny,
                    grid.nx,
                    grid.ny
                )));
            }
            Ok(Tabulated::new(&grid, dump.field(field)?.to_vec()))
        };
        let shape = match &config.shape {
            ShapeConfig::Plane => Shape::Plane,
            ShapeConfig::Paraboloid { coefficient, sign } => Shape::Paraboloid {
                coefficient: *coefficient,
                sign: *sign,
            },
            ShapeConfig::Tabulated { file, field } => Shape::Tabulated(load(file, field)?),
        };
        let fiber = match &config.fiber {
            FiberConfig::Constant { alpha0 } => FiberAngle::Constant(*alpha0),
            FiberConfig::Linear { alpha0, rate } => FiberAngle::Linear {
                alpha0: *alpha0,
                rate: *rate,
            },
            FiberConfig::Tabulated { file, field } => FiberAngle::Tabulated(load(file, field)?),
        };
        let spec = Self {
            shape,
            fiber,
            d_l: config.d_l,
            d_t: config.d_t,
            d0: config.d0,
            length: config.length,
            dx: config.dx,
            config,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Convenience constructor for analytic (non-tabulated) configurations.
    pub fn analytic(config: SurfaceConfig) -> Result<Self, GeometryError> {
        Self::from_config(config, Path::new("."))
    }

    /// Spec with sampled heights and/or angles supplied directly.
    pub fn with_samples(
        config: SurfaceConfig,
        heights: Option<Vec<f64>>,
        angles: Option<Vec<f64>>,
    ) -> Result<Self, GeometryError> {
        let mut spec = Self::analytic(SurfaceConfig {
            shape: if heights.is_some() {
                ShapeConfig::Plane
            } else {
                config.shape.clone()
            },
            fiber: if angles.is_some() {
                FiberConfig::Constant { alpha0: 0.0 }
            } else {
                config.fiber.clone()
            },
            ..config.clone()
        })?;
        let grid = spec.grid();
        if let Some(h) = heights {
            check_len(&grid, h.len())?;
            spec.shape = Shape::Tabulated(Tabulated::new(&grid, h));
        }
        if let Some(a) = angles {
            check_len(&grid, a.len())?;
            spec.fiber = FiberAngle::Tabulated(Tabulated::new(&grid, a));
        }
        spec.config = config;
        Ok(spec)
    }

    pub fn config(&self) -> &SurfaceConfig {
        &self.config
    }

    pub fn grid(&self) -> Grid {
        Grid::centered_square(self.length, self.dx)
    }

    pub fn is_analytic(&self) -> bool {
        self.shape.is_analytic() && self.fiber.is_analytic()
    }

    /// Same surface and fibers with isotropic unit diffusion.
    pub fn isotropic_auxiliary(&self) -> Self {
        let mut aux = self.clone();
        aux.d_l = 1.0;
        aux.d_t = 1.0;
        aux.config.d_l = 1.0;
        aux.config.d_t = 1.0;
        aux
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidSpec(m));
        if !(self.d_t > 0.0) || !(self.d_l >= self.d_t) {
            return bad(format!(
                "need dL >= dT > 0, got dL={} dT={}",
                self.d_l, self.d_t
            ));
        }
        if !(self.d0 > 0.0) {
            return bad(format!("D0 must be positive, got {}", self.d0));
        }
        if !(self.dx > 0.0) || !(self.length > 0.0) {
            return bad(format!(
                "need L > 0 and dx > 0, got L={} dx={}",
                self.length, self.dx
            ));
        }
        let cells = self.length / self.dx;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) || cells.round() < 1.0 {
            return bad(format!("L/dx = {cells} is not a positive integer"));
        }
        Ok(())
    }

    /// Shape slopes at a point: closed form, or bilinear interpolation of
    /// the finite-difference slopes of tabulated heights.
    pub fn slopes_at(&self, x: f64, y: f64) -> Result<(f64, f64), GeometryError> {
        let (fx, fy) = match &self.shape {
            Shape::Tabulated(t) => {
                let g = self.grid();
                self.check_inside(&g, x, y)?;
                (bilinear(&g, &t.d_dx, x, y), bilinear(&g, &t.d_dy, x, y))
            }
            s => s.slopes(x, y).expect("analytic shape"),
        };
        if !fx.is_finite() || !fy.is_finite() {
            return Err(GeometryError::DegenerateFrame { x, y });
        }
        Ok((fx, fy))
    }

    pub fn angle_at(&self, x: f64, y: f64) -> Result<f64, GeometryError> {
        match &self.fiber {
            FiberAngle::Tabulated(t) => {
                let g = self.grid();
                self.check_inside(&g, x, y)?;
                Ok(bilinear(&g, &t.values, x, y))
            }
            f => Ok(f.angle(x, y).expect("analytic fiber")),
        }
    }

    fn check_inside(&self, g: &Grid, x: f64, y: f64) -> Result<(), GeometryError> {
        if g.contains(x, y) {
            Ok(())
        } else {
            Err(GeometryError::OutsideDomain { x, y })
        }
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<(), GeometryError> {
    if len == grid.len() {
        Ok(())
    } else {
        Err(GeometryError::InvalidSpec(format!(
            "sample count {len} does not match grid size {}",
            grid.len()
        )))
    }
}
