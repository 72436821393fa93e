//! Rectangular node grids and the binary field-dump format.
//!
//! A dump file is a short text header followed by little-endian `f64`
//! payloads, one per declared field, each stored row-major (`y` rows, `x`
//! fastest):
//!
//! ```text
//! gridfield 1
//! nx 301
//! ny 301
//! dx 0.1
//! x0 -15
//! y0 -15
//! fields u v
//! meta {"time":12.5}
//! end_header
//! <nx*ny f64 for u><nx*ny f64 for v>
//! ```
//!
//! `meta` is optional single-line JSON.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum GridIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed grid header: {0}")]
    Header(String),
    #[error("field {0} not present in dump")]
    MissingField(String),
}

/// Node layout: `nx * ny` nodes at `(x0 + i dx, y0 + j dx)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Grid {
    /// Square grid covering `[-L/2, L/2]²` with nodes on both edges.
    pub fn centered_square(length: f64, dx: f64) -> Self {
        let cells = (length / dx).round() as usize;
        Self {
            nx: cells + 1,
            ny: cells + 1,
            dx,
            x0: -0.5 * cells as f64 * dx,
            y0: -0.5 * cells as f64 * dx,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x_max() && y >= self.y0 && y <= self.y_max()
    }

    /// Distance from `(x, y)` to the nearest edge of the grid rectangle.
    pub fn edge_distance(&self, x: f64, y: f64) -> f64 {
        (x - self.x0)
            .min(self.x_max() - x)
            .min(y - self.y0)
            .min(self.y_max() - y)
    }

    /// Fractional node coordinates of a physical point.
    pub fn locate(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) / self.dx, (y - self.y0) / self.dx)
    }

    /// Samples `f(x, y)` at every node.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(f(self.x(i), self.y(j)));
            }
        }
        out
    }
}

/// Header and named payloads of a dump file.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub grid: Grid,
    pub fields: Vec<(String, Vec<f64>)>,
    pub meta: Option<serde_json::Value>,
}

impl FieldDump {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            fields: Vec::new(),
            meta: None,
        }
    }

    pub fn with_field(mut self, name: &str, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), self.grid.len(), "field {name} has wrong length");
        self.fields.push((name.to_string(), data));
        self
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn field(&self, name: &str) -> Result<&[f64], GridIoError> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d.as_slice())
            .ok_or_else(|| GridIoError::MissingField(name.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<(), GridIoError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), GridIoError> {
        let g = &self.grid;
        writeln!(w, "gridfield 1")?;
        writeln!(w, "nx {}", g.nx)?;
        writeln!(w, "ny {}", g.ny)?;
        writeln!(w, "dx {:?}", g.dx)?;
        writeln!(w, "x0 {:?}", g.x0)?;
        writeln!(w, "y0 {:?}", g.y0)?;
        let names: Vec<&str> = self.fields.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(w, "fields {}", names.join(" "))?;
        if let Some(meta) = &self.meta {
            writeln!(
                w,
                "meta {}",
                serde_json::to_string(meta).expect("json value")
            )?;
        }
        writeln!(w, "end_header")?;
        for (_, data) in &self.fields {
            for v in data {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, GridIoError> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    pub fn read_from(r: &mut impl BufRead) -> Result<Self, GridIoError> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim() != "gridfield 1" {
            return Err(GridIoError::Header(format!(
                "bad magic line {:?}",
                line.trim()
            )));
        }
        let (mut nx, mut ny, mut dx, mut x0, mut y0) = (None, None, None, None, None);
        let mut names: Vec<String> = Vec::new();
        let mut meta = None;
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(GridIoError::Header("missing end_header".into()));
            }
            let l = line.trim_end_matches(['\n', '\r']);
            if l == "end_header" {
                break;
            }
            let (key, rest) = l.split_once(' ').unwrap_or((l, ""));
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| GridIoError::Header(format!("bad number for {key}: {s:?}")))
            };
            match key {
                "nx" => nx = Some(num(rest)? as usize),
                "ny" => ny = Some(num(rest)? as usize),
                "dx" => dx = Some(num(rest)?),
                "x0" => x0 = Some(num(rest)?),
                "y0" => y0 = Some(num(rest)?),
                "field" | "fields" => {
                    names.extend(rest.split_whitespace().map(str::to_string));
                }
                "meta" => {
                    meta = Some(
                        serde_json::from_str(rest)
                            .map_err(|e| GridIoError::Header(format!("bad meta json: {e}")))?,
                    )
                }
                other => return Err(GridIoError::Header(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| GridIoError::Header(format!("missing {k}"));
        let grid = Grid {
            nx: nx.ok_or_else(|| missing("nx"))?,
            ny: ny.ok_or_else(|| missing("ny"))?,
            dx: dx.ok_or_else(|| missing("dx"))?,
            x0: x0.ok_or_else(|| missing("x0"))?,
            y0: y0.ok_or_else(|| missing("y0"))?,
        };
        let mut fields = Vec::with_capacity(names.len());
        let mut buf = vec![0u8; grid.len() * 8];
        for name in names {
            r.read_exact(&mut buf)?;
            let data = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            fields.push((name, data));
        }
        Ok(Self { grid, fields, meta })
    }

    /// Writes `x,y,<field...>` rows for plotting tools.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        let names: Vec<&str> = self.fields.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(w, "x,y,{}", names.join(","))?;
        let g = &self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                write!(w, "{},{}", g.x(i), g.y(j))?;
                for (_, d) in &self.fields {
                    write!(w, ",{}", d[g.index(i, j)])?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}
