//! Polar-grid fields and the response-function data file.
//!
//! A data file is a text header followed by little-endian `f64` payloads:
//!
//! ```text
//! response_functions 1
//! n_r 240
//! n_theta 128
//! radius 12
//! components 2
//! value_type complex
//! normalization 1
//! convention <free text, recorded verbatim>
//! end_header
//! ```
//!
//! Nodes sit at `r_i = radius·i/(n_r − 1)` and `θ_j = 2πj/n_theta`. The
//! fields follow in the order `u0 dtheta_u0 dx_u0 dy_u0 y_theta y_x y_y`.
//! Each field stores its components one after another, each component
//! row-major with `θ` fastest; complex values are stored as `re, im` pairs.
//! `normalization` is the declared value of `⟨Y^θ|∂_θu0⟩`, `⟨Y^x|∂_x u0⟩`
//! and `⟨Y^y|∂_y u0⟩`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MobilityError;

/// Uniform polar grid over a disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub radius: f64,
}

impl PolarGrid {
    pub fn new(n_r: usize, n_theta: usize, radius: f64) -> Result<Self, MobilityError> {
        if n_r < 5 || n_theta < 4 || !(radius > 0.0) {
            return Err(MobilityError::Format(format!(
                "polar grid needs n_r ≥ 5, n_theta ≥ 4 and radius > 0, got {n_r}, {n_theta}, {radius}"
            )));
        }
        Ok(Self {
            n_r,
            n_theta,
            radius,
        })
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dr(&self) -> f64 {
        self.radius / (self.n_r - 1) as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    pub fn theta(&self, j: usize) -> f64 {
        std::f64::consts::TAU * j as f64 / self.n_theta as f64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    /// Trapezoid weight of node `(i, ·)` for `∫ r dr dθ`.
    pub fn weight(&self, i: usize) -> f64 {
        let end = if i == 0 || i == self.n_r - 1 {
            0.5
        } else {
            1.0
        };
        end * self.dr() * self.r(i) * std::f64::consts::TAU / self.n_theta as f64
    }
}

/// A multi-component complex field on a polar grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarField {
    pub grid: PolarGrid,
    /// One vector of `grid.len()` values per component.
    pub components: Vec<Vec<Complex64>>,
}

impl PolarField {
    pub fn zeros(grid: PolarGrid, components: usize) -> Self {
        Self {
            grid,
            components: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; components],
        }
    }

    /// Samples `f(component, r, θ)` at every node.
    pub fn from_fn(
        grid: PolarGrid,
        components: usize,
        f: impl Fn(usize, f64, f64) -> Complex64,
    ) -> Self {
        let mut out = Self::zeros(grid, components);
        for (c, comp) in out.components.iter_mut().enumerate() {
            for i in 0..grid.n_r {
                for j in 0..grid.n_theta {
                    comp[grid.index(i, j)] = f(c, grid.r(i), grid.theta(j));
                }
            }
        }
        out
    }

    /// `⟨self|other⟩ = Σ_c ∫ conj(self_c) other_c r dr dθ` by the trapezoid rule.
    pub fn inner(&self, other: &PolarField) -> Result<Complex64, MobilityError> {
        if self.grid != other.grid || self.components.len() != other.components.len() {
            return Err(MobilityError::GridMismatch);
        }
        let g = self.grid;
        let mut sum = Complex64::new(0.0, 0.0);
        for (a, b) in self.components.iter().zip(&other.components) {
            for i in 0..g.n_r {
                let w = g.weight(i);
                let ring: Complex64 = (0..g.n_theta)
                    .map(|j| a[g.index(i, j)].conj() * b[g.index(i, j)])
                    .sum();
                sum += ring * w;
            }
        }
        Ok(sum)
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest magnitude on the outermost ring.
    pub fn edge_max_abs(&self) -> f64 {
        let g = self.grid;
        let i = g.n_r - 1;
        self.components
            .iter()
            .flat_map(|c| (0..g.n_theta).map(move |j| c[g.index(i, j)].norm()))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Real,
    Complex,
}

/// Spiral solution, its derivatives and the three critical adjoint modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseFunctionSet {
    pub grid: PolarGrid,
    pub value_type: ValueType,
    /// Declared value of the diagonal overlaps.
    pub normalization: f64,
    pub convention: String,
    pub u0: PolarField,
    pub d_theta_u0: PolarField,
    pub dx_u0: PolarField,
    pub dy_u0: PolarField,
    pub y_theta: PolarField,
    pub y_x: PolarField,
    pub y_y: PolarField,
}

/// Overlaps of the adjoint modes with the Goldstone modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiorthogonalityReport {
    /// `⟨Y^θ|∂_θu0⟩`, `⟨Y^x|∂_x u0⟩`, `⟨Y^y|∂_y u0⟩` as `[re, im]`.
    pub diagonal: [[f64; 2]; 3],
    /// Largest `|⟨Y^i|∂_j u0⟩ − normalization δ_ij|`.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

const FIELDS: [&str; 7] = ["u0", "dtheta_u0", "dx_u0", "dy_u0", "y_theta", "y_x", "y_y"];

impl ResponseFunctionSet {
    fn fields(&self) -> [&PolarField; 7] {
        [
            &self.u0,
            &self.d_theta_u0,
            &self.dx_u0,
            &self.dy_u0,
            &self.y_theta,
            &self.y_x,
            &self.y_y,
        ]
    }

    pub fn biorthogonality(&self, tolerance: f64) -> Result<BiorthogonalityReport, MobilityError> {
        let ys = [&self.y_theta, &self.y_x, &self.y_y];
        let gs = [&self.d_theta_u0, &self.dx_u0, &self.dy_u0];
        let mut diagonal = [[0.0; 2]; 3];
        let mut max_deviation = 0.0f64;
        for (a, y) in ys.iter().enumerate() {
            for (b, g) in gs.iter().enumerate() {
                let v = y.inner(g)?;
                let target = if a == b { self.normalization } else { 0.0 };
                if a == b {
                    diagonal[a] = [v.re, v.im];
                }
                max_deviation = max_deviation.max((v - target).norm());
            }
        }
        Ok(BiorthogonalityReport {
            diagonal,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        })
    }

    pub fn load(path: &Path) -> Result<Self, MobilityError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut header = std::collections::HashMap::new();
        let mut line = String::new();
        let mut first = true;
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(MobilityError::Format("missing end_header".into()));
            }
            let l = line.trim_end_matches(['\n', '\r']);
            if first {
                if l != "response_functions 1" {
                    return Err(MobilityError::Format(format!(
                        "unexpected magic line {l:?}"
                    )));
                }
                first = false;
                continue;
            }
            if l == "end_header" {
                break;
            }
            let (k, v) = l.split_once(' ').unwrap_or((l, ""));
            header.insert(k.to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| MobilityError::Format(format!("header lacks {k}")))
        };
        let num = |k: &str| -> Result<f64, MobilityError> {
            get(k)?
                .parse()
                .map_err(|_| MobilityError::Format(format!("bad value for {k}")))
        };
        let grid = PolarGrid::new(
            num("n_r")? as usize,
            num("n_theta")? as usize,
            num("radius")?,
        )?;
        let ncomp = num("components")? as usize;
        let value_type = match get("value_type")?.as_str() {
            "real" => ValueType::Real,
            "complex" => ValueType::Complex,
            other => return Err(MobilityError::Format(format!("unknown value_type {other}"))),
        };
        let normalization = num("normalization")?;
        let convention = header.get("convention").cloned().unwrap_or_default();
        let per = if value_type == ValueType::Complex {
            2
        } else {
            1
        };
        let mut buf = vec![0u8; 8 * per * grid.len()];
        let mut read_field = || -> Result<PolarField, MobilityError> {
            let mut f = PolarField::zeros(grid, ncomp);
            for comp in &mut f.components {
                r.read_exact(&mut buf)
                    .map_err(|_| MobilityError::Format("truncated payload".into()))?;
                for (k, z) in comp.iter_mut().enumerate() {
                    let at =
                        |m: usize| f64::from_le_bytes(buf[8 * m..8 * m + 8].try_into().unwrap());
                    *z = if per == 2 {
                        Complex64::new(at(2 * k), at(2 * k + 1))
                    } else {
                        Complex64::new(at(k), 0.0)
                    };
                }
            }
            Ok(f)
        };
        let mut f: Vec<PolarField> = Vec::with_capacity(7);
        for _ in FIELDS {
            f.push(read_field()?);
        }
        let mut it = f.into_iter();
        let mut next = || it.next().unwrap();
        Ok(Self {
            grid,
            value_type,
            normalization,
            convention,
            u0: next(),
            d_theta_u0: next(),
            dx_u0: next(),
            dy_u0: next(),
            y_theta: next(),
            y_x: next(),
            y_y: next(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), MobilityError> {
        let mut w = BufWriter::new(File::create(path)?);
        let g = self.grid;
        let vt = match self.value_type {
            ValueType::Real => "real",
            ValueType::Complex => "complex",
        };
        writeln!(w, "response_functions 1")?;
        writeln!(
            w,
            "n_r {}\nn_theta {}\nradius {}",
            g.n_r, g.n_theta, g.radius
        )?;
        writeln!(
            w,
            "components {}\nvalue_type {vt}",
            self.u0.components.len()
        )?;
        writeln!(w, "normalization {}", self.normalization)?;
        if !self.convention.is_empty() {
            writeln!(w, "convention {}", self.convention.replace('\n', " "))?;
        }
        writeln!(w, "end_header")?;
        for f in self.fields() {
            for comp in &f.components {
                for z in comp {
                    w.write_all(&z.re.to_le_bytes())?;
                    if self.value_type == ValueType::Complex {
                        w.write_all(&z.im.to_le_bytes())?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trapezoid_matches_gaussian_integral() {
        let g = PolarGrid::new(240, 128, 12.0).unwrap();
        let f = PolarField::from_fn(g, 1, |_, r, t| {
            Complex64::new(r * (-r * r).exp() * t.cos(), 0.0)
        });
        // ∫ r³ e^{−2r²} dr = 1/8 and ∫ cos²θ dθ = π.
        let v = f.inner(&f).unwrap();
        assert!((v.re - PI / 8.0).abs() < 1e-6, "{}", v.re);
    }

    #[test]
    fn quadrature_converges_at_second_order() {
        let err = |n: usize| {
            let g = PolarGrid::new(n, 16, 2.0).unwrap();
            let one = PolarField::from_fn(g, 1, |_, _, _| Complex64::new(1.0, 0.0));
            let e = PolarField::from_fn(g, 1, |_, r, _| Complex64::new((-r).exp(), 0.0));
            let exact = 2.0 * PI * (1.0 - 3.0 * (-2.0f64).exp());
            (one.inner(&e).unwrap().re - exact).abs()
        };
        let (e1, e2, e3) = (err(21), err(41), err(81));
        let (o1, o2) = ((e1 / e2).log2(), (e2 / e3).log2());
        assert!(
            (o1 - 2.0).abs() < 0.1 && (o2 - 2.0).abs() < 0.1,
            "{o1} {o2}"
        );
    }

    fn mode(g: PolarGrid, scale: f64, k: usize) -> PolarField {
        PolarField::from_fn(g, 2, move |c, r, t| {
            let ang = [t.cos(), t.sin(), (2.0 * t).cos()][k];
            let v = scale * r * (-r * r).exp() * ang;
            if c == 0 {
                Complex64::new(v, 0.5 * v)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    fn synthetic_set() -> ResponseFunctionSet {
        let g = PolarGrid::new(61, 32, 6.0).unwrap();
        let m = mode(g, 1.0, 0);
        let s = 1.0 / m.inner(&m).unwrap().re;
        ResponseFunctionSet {
            grid: g,
            value_type: ValueType::Complex,
            normalization: 1.0,
            convention: "test modes".into(),
            u0: PolarField::from_fn(g, 2, |c, r, _| {
                Complex64::new((-r * r).exp() / (1 + c) as f64, 0.0)
            }),
            d_theta_u0: mode(g, 1.0, 0),
            dx_u0: mode(g, 1.0, 1),
            dy_u0: mode(g, 1.0, 2),
            y_theta: mode(g, s, 0),
            y_x: mode(g, s, 1),
            y_y: mode(g, s, 2),
        }
    }

    #[test]
    fn file_round_trip() {
        let set = synthetic_set();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rf.bin");
        set.save(&p).unwrap();
        assert_eq!(ResponseFunctionSet::load(&p).unwrap(), set);
    }

    #[test]
    fn biorthogonality_report() {
        let mut set = synthetic_set();
        let rep = set.biorthogonality(1e-3).unwrap();
        assert!((rep.diagonal[0][0] - 1.0).abs() < 1e-12);
        assert!(rep.passed, "{rep:?}");
        set.y_y = set.y_theta.clone();
        assert!(!set.biorthogonality(1e-3).unwrap().passed);
    }
}
