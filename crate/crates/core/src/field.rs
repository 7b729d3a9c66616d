//! Evaluation grids and the real-valued fields computed on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How grid nodes are laid out over `[-L/2, L/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    /// Both endpoints included, `Δ = L/(N−1)`.
    Inclusive,
    /// Right endpoint omitted, `Δ = L/N`; used by the pseudo-spectral solver.
    Periodic,
}

/// Uniform lattice over `[-Lx/2, Lx/2] × [-Ly/2, Ly/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub spacing: Spacing,
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Grid2D::with_spacing(lx, ly, nx, ny, Spacing::Inclusive)
    }

    pub fn periodic(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Grid2D::with_spacing(lx, ly, nx, ny, Spacing::Periodic)
    }

    pub fn with_spacing(lx: f64, ly: f64, nx: usize, ny: usize, spacing: Spacing) -> Result<Self> {
        if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain lengths must be positive, got Lx={lx}, Ly={ly}"
            )));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes per direction, got {nx}x{ny}"
            )));
        }
        Ok(Grid2D {
            lx,
            ly,
            nx,
            ny,
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        match self.spacing {
            Spacing::Inclusive => self.lx / (self.nx - 1) as f64,
            Spacing::Periodic => self.lx / self.nx as f64,
        }
    }

    pub fn dy(&self) -> f64 {
        match self.spacing {
            Spacing::Inclusive => self.ly / (self.ny - 1) as f64,
            Spacing::Periodic => self.ly / self.ny as f64,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        if self.spacing == Spacing::Inclusive && i == self.nx - 1 {
            return 0.5 * self.lx;
        }
        -0.5 * self.lx + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        if self.spacing == Spacing::Inclusive && j == self.ny - 1 {
            return 0.5 * self.ly;
        }
        -0.5 * self.ly + j as f64 * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Flat index of node `(i, j)`; rows run along x, y is the outer index.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Node nearest to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let snap = |v: f64, l: f64, d: f64, n: usize| {
            let k = ((v + 0.5 * l) / d).round();
            k.clamp(0.0, (n - 1) as f64) as usize
        };
        (
            snap(x, self.lx, self.dx(), self.nx),
            snap(y, self.ly, self.dy(), self.ny),
        )
    }

    /// `(Lx·Ly / (Nx·Ny))^{1/2}`, the cell-area scaling for RMS norms.
    pub fn rms_scale(&self) -> f64 {
        (self.lx * self.ly / (self.nx * self.ny) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    G,
    U,
    Tau,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::G => "g",
            Quantity::U => "u",
            Quantity::Tau => "tau",
        })
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Ok(Quantity::G),
            "u" => Ok(Quantity::U),
            "tau" => Ok(Quantity::Tau),
            other => Err(Error::InvalidArgument(format!(
                "unknown quantity {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GlmRr,
    GlmCc,
    DetCc,
    Fft2Exp,
    Analytic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::GlmRr => "glm-rr",
            Method::GlmCc => "glm-cc",
            Method::DetCc => "det-cc",
            Method::Fft2Exp => "fft2-exp",
            Method::Analytic => "analytic",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "glm-rr" => Ok(Method::GlmRr),
            "glm-cc" => Ok(Method::GlmCc),
            "det-cc" => Ok(Method::DetCc),
            "fft2-exp" => Ok(Method::Fft2Exp),
            "analytic" => Ok(Method::Analytic),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// Values of `g`, `u` or `τ` over a grid at time `t`.
///
/// Cells whose computation failed hold `NaN` and are counted in `flagged`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub grid: Grid2D,
    pub quantity: Quantity,
    pub method: Method,
    pub t: f64,
    pub values: Vec<f64>,
    pub flagged: usize,
}

impl SolutionField {
    pub fn new(
        grid: Grid2D,
        quantity: Quantity,
        method: Method,
        t: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        let flagged = values.iter().filter(|v| !v.is_finite()).count();
        Ok(SolutionField {
            grid,
            quantity,
            method,
            t,
            values,
            flagged,
        })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(
        grid: Grid2D,
        quantity: Quantity,
        method: Method,
        t: f64,
        f: F,
    ) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                values.push(f(grid.x(i), y));
            }
        }
        SolutionField::new(grid, quantity, method, t, values).expect("length matches grid")
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn is_valid(&self, i: usize, j: usize) -> bool {
        self.at(i, j).is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn recount_flags(&mut self) {
        self.flagged = self.values.iter().filter(|v| !v.is_finite()).count();
    }
}

/// First derivative along x per row: central differences inside,
/// second-order one-sided differences on the two boundary columns.
pub(crate) fn ddx_row(values: &[f64], dx: f64, out: &mut [f64]) {
    let n = values.len();
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx);
}

/// Second derivative along x per row: central inside, second-order
/// one-sided four-point stencils at the boundaries (three-point when only
/// three nodes exist).
pub(crate) fn d2dx2_row(values: &[f64], dx: f64, out: &mut [f64]) {
    let n = values.len();
    let h2 = dx * dx;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
    }
    if n >= 4 {
        out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
        out[n - 1] =
            (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2;
    } else {
        out[0] = out[1];
        out[n - 1] = out[1];
    }
}
