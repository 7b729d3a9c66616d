//! Exponential scattering kernels that solve the linearised KP equation,
//! together with the one-soliton closed forms used as oracles.
//!
//! A single component is
//!
//! ```text
//! p(s, σ; y, t) = −(a+b) · exp(a·s + b·σ + Λ·y + Ω·t),   Λ = a² − b²,  Ω = 4(a³ + b³)
//! ```
//!
//! where `s = z + x` and `σ = ζ + x` are the shifted kernel slots. A
//! [`ScatteringData`] value is a superposition of such components.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One exponential kernel component with decay rates `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonComponent {
    a: f64,
    b: f64,
    lambda: f64,
    omega: f64,
}

/// Builds the component for rates `(a, b)`; rejects `a + b <= 0`.
pub fn make_soliton(a: f64, b: f64) -> Result<SolitonComponent> {
    if !(a.is_finite() && b.is_finite()) || a + b <= 0.0 {
        return Err(Error::NonDecayingSoliton { a, b });
    }
    Ok(SolitonComponent {
        a,
        b,
        lambda: a * a - b * b,
        omega: 4.0 * (a * a * a + b * b * b),
    })
}

impl SolitonComponent {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        make_soliton(a, b)
    }

    /// Component with arbitrary frequencies. The result generally does not
    /// solve the linearised equation; it exists so the constraint residuals
    /// can be exercised on deliberately broken data.
    pub fn from_raw_parts(a: f64, b: f64, lambda: f64, omega: f64) -> Self {
        SolitonComponent {
            a,
            b,
            lambda,
            omega,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `a + b`, the x-rate of the kernel and the width scale of the soliton.
    pub fn rate(&self) -> f64 {
        self.a + self.b
    }

    /// Phase `Θ = ½((a+b)x + Λy + Ωt)`.
    pub fn theta(&self, x: f64, y: f64, t: f64) -> f64 {
        0.5 * (self.rate() * x + self.lambda * y + self.omega * t)
    }

    fn exponent(&self, s: f64, sigma: f64, y: f64, t: f64) -> f64 {
        self.a * s + self.b * sigma + self.lambda * y + self.omega * t
    }

    fn value(&self, s: f64, sigma: f64, y: f64, t: f64) -> f64 {
        -self.rate() * self.exponent(s, sigma, y, t).exp()
    }
}

impl fmt::Display for SolitonComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

/// Superposition of soliton components, optionally scaled and shifted.
///
/// The shift moves the pattern in the (x, y) plane: every evaluation uses
/// `x − shift_x` and `y − shift_y` in place of `x` and `y`. The scale
/// multiplies the whole kernel; a zero scale is the empty-kernel limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    components: Vec<SolitonComponent>,
    scale: f64,
    shift: [f64; 2],
}

impl ScatteringData {
    pub fn new(components: Vec<SolitonComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyScatteringData);
        }
        Ok(ScatteringData {
            components,
            scale: 1.0,
            shift: [0.0, 0.0],
        })
    }

    pub fn single(component: SolitonComponent) -> Self {
        ScatteringData {
            components: vec![component],
            scale: 1.0,
            shift: [0.0, 0.0],
        }
    }

    /// Builds data from `(a, b)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let components = pairs
            .iter()
            .map(|&(a, b)| make_soliton(a, b))
            .collect::<Result<Vec<_>>>()?;
        ScatteringData::new(components)
    }

    /// The two-soliton interaction data: `(1.55, 1.45)` plus `(1.3, 0)`.
    pub fn two_soliton() -> Self {
        ScatteringData::from_pairs(&[(1.55, 1.45), (1.3, 0.0)]).expect("valid parameters")
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self
    }

    pub fn with_shift(mut self, shift_x: f64, shift_y: f64) -> Self {
        self.shift = [shift_x, shift_y];
        self
    }

    pub fn components(&self) -> &[SolitonComponent] {
        &self.components
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shift(&self) -> [f64; 2] {
        self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    /// The single unscaled component, if that is all this data holds.
    /// Closed-form oracles apply only in that case.
    pub fn as_single_soliton(&self) -> Option<&SolitonComponent> {
        match self.components.as_slice() {
            [c] if self.scale == 1.0 => Some(c),
            _ => None,
        }
    }

    /// Evaluates `p(s, σ; y, t)`. Exponentials are taken directly, so
    /// extreme arguments may overflow to infinity.
    pub fn eval_kernel(&self, s: f64, sigma: f64, y: f64, t: f64) -> f64 {
        let [sx, sy] = self.shift;
        let sum: f64 = self
            .components
            .iter()
            .map(|c| c.value(s - sx, sigma - sx, y - sy, t))
            .sum();
        self.scale * sum
    }

    /// Fills `out[r * cols.len() + c] = p(rows[r] + x, cols[c] + x; y, t)`.
    ///
    /// Each component factorises as `row_factor · col_factor`, so the
    /// matrix is built from `O(rows + cols)` exponentials per component.
    pub fn fill_kernel_matrix(
        &self,
        rows: &[f64],
        cols: &[f64],
        x: f64,
        y: f64,
        t: f64,
        out: &mut [f64],
    ) {
        let nc = cols.len();
        assert_eq!(out.len(), rows.len() * nc);
        out.iter_mut().for_each(|v| *v = 0.0);
        let [sx, sy] = self.shift;
        let (xe, ye) = (x - sx, y - sy);
        let mut col_factor = vec![0.0; nc];
        for c in &self.components {
            let amp = -self.scale * c.rate();
            let tail = c.lambda * ye + c.omega * t;
            for (f, &zeta) in col_factor.iter_mut().zip(cols) {
                *f = (c.b * (zeta + xe) + tail).exp();
            }
            for (r, &xi) in rows.iter().enumerate() {
                let rf = amp * (c.a * (xi + xe)).exp();
                let row = &mut out[r * nc..(r + 1) * nc];
                for (v, &f) in row.iter_mut().zip(&col_factor) {
                    *v += rf * f;
                }
            }
        }
    }

    /// Residuals `(p_y − (p_zz − p_ζζ), p_t − 4(p_zzz + p_ζζζ))` from the
    /// exact derivatives of each exponential.
    pub fn constraint_residuals(&self, s: f64, sigma: f64, y: f64, t: f64) -> (f64, f64) {
        let [sx, sy] = self.shift;
        let mut r_y = 0.0;
        let mut r_t = 0.0;
        for c in &self.components {
            let p = self.scale * c.value(s - sx, sigma - sx, y - sy, t);
            let (a, b) = (c.a, c.b);
            let p_y = c.lambda * p;
            let p_zz = a * a * p;
            let p_zeta_zeta = b * b * p;
            let p_t = c.omega * p;
            let p_zzz = a * a * a * p;
            let p_zeta3 = b * b * b * p;
            r_y += p_y - (p_zz - p_zeta_zeta);
            r_t += p_t - 4.0 * (p_zzz + p_zeta3);
        }
        (r_y, r_t)
    }

    /// Sum of the absolute values of every term entering the residuals;
    /// the natural scale for judging them relative to rounding.
    pub fn residual_scale(&self, s: f64, sigma: f64, y: f64, t: f64) -> f64 {
        let [sx, sy] = self.shift;
        self.components
            .iter()
            .map(|c| {
                let p = (self.scale * c.value(s - sx, sigma - sx, y - sy, t)).abs();
                let (a, b) = (c.a.abs(), c.b.abs());
                p * (c.lambda.abs() + a * a + b * b + c.omega.abs() + 4.0 * (a * a * a + b * b * b))
            })
            .sum()
    }
}

impl FromStr for ScatteringData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_solitons(s)
    }
}

impl fmt::Display for ScatteringData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Parses `"a1,b1;a2,b2;..."`.
pub fn parse_solitons(input: &str) -> Result<ScatteringData> {
    let err = |reason: String| Error::SolitonParse {
        input: input.to_string(),
        reason,
    };
    let mut components = Vec::new();
    for chunk in input.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        let fields: Vec<&str> = chunk.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(err(format!("component {chunk:?} needs exactly two values")));
        }
        let a: f64 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad number {:?}", fields[0])))?;
        let b: f64 = fields[1]
            .parse()
            .map_err(|_| err(format!("bad number {:?}", fields[1])))?;
        components.push(make_soliton(a, b)?);
    }
    if components.is_empty() {
        return Err(err("no components".into()));
    }
    ScatteringData::new(components)
}

/// `log(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// One-soliton potential `g(0,0;x,y,t) = −(a+b)/(1 + e^{−2Θ})`.
pub fn analytic_soliton_g(c: &SolitonComponent, x: f64, y: f64, t: f64) -> f64 {
    let two_theta = 2.0 * c.theta(x, y, t);
    -c.rate() / (1.0 + (-two_theta).exp())
}

/// One-soliton field `u = ∂x g = −¼(a+b)² sech²Θ`.
pub fn analytic_soliton_u(c: &SolitonComponent, x: f64, y: f64, t: f64) -> f64 {
    let theta = c.theta(x, y, t);
    let sech = 1.0 / theta.cosh();
    -0.25 * c.rate() * c.rate() * sech * sech
}

/// `log τ = log(1 + e^{2Θ})`.
pub fn analytic_soliton_log_tau(c: &SolitonComponent, x: f64, y: f64, t: f64) -> f64 {
    softplus(2.0 * c.theta(x, y, t))
}

/// One-soliton tau function `τ = 1 + e^{2Θ}`.
pub fn analytic_soliton_tau(c: &SolitonComponent, x: f64, y: f64, t: f64) -> f64 {
    analytic_soliton_log_tau(c, x, y, t).exp()
}
