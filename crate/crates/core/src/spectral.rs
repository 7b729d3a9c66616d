//! Exponential split-step pseudo-spectral integration of
//!
//! ```text
//! u_t = A u − 6 ∂x(u²),   F(A)(kx, ky) = (i kx)³ + 3 (i ky)² / (i kx + 2πδ)
//! ```
//!
//! on a periodic power-of-two grid, with an optional super-Gaussian window
//! that tapers the field near the domain boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid2D, Method, Quantity, SolutionField, Spacing};

/// Regularisation of `∂x⁻¹` at `kx = 0`.
pub const DELTA: f64 = f64::EPSILON;

/// Two-dimensional FFT on row-major data of shape `ny × nx` (x fastest).
/// The inverse is normalised, so `inverse(forward(v)) == v`.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

fn check_pow2(n: usize) -> Result<()> {
    if n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        check_pow2(nx)?;
        check_pow2(ny)?;
        let mut planner = FftPlanner::new();
        Ok(Fft2 {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_len(&self, data: &[Complex64]) {
        assert_eq!(
            data.len(),
            self.len(),
            "buffer does not match transform shape"
        );
    }

    fn columns(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let (nx, ny) = (self.nx, self.ny);
        let mut t = vec![Complex64::default(); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                t[i * ny + j] = data[j * nx + i];
            }
        }
        plan.process(&mut t);
        for i in 0..nx {
            for j in 0..ny {
                data[j * nx + i] = t[i * ny + j];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.check_len(data);
        self.fwd_x.process(data);
        self.columns(data, &self.fwd_y);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.check_len(data);
        self.inv_x.process(data);
        self.columns(data, &self.inv_y);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Forward transform of a real field.
pub fn fft2(values: &[f64], nx: usize, ny: usize) -> Result<Vec<Complex64>> {
    let plan = Fft2::new(nx, ny)?;
    if values.len() != nx * ny {
        return Err(Error::Shape(format!(
            "{} values for {nx}x{ny}",
            values.len()
        )));
    }
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.forward(&mut data);
    Ok(data)
}

/// Normalised inverse transform.
pub fn ifft2(coefficients: &[Complex64], nx: usize, ny: usize) -> Result<Vec<Complex64>> {
    let plan = Fft2::new(nx, ny)?;
    if coefficients.len() != nx * ny {
        return Err(Error::Shape(format!(
            "{} coefficients for {nx}x{ny}",
            coefficients.len()
        )));
    }
    let mut data = coefficients.to_vec();
    plan.inverse(&mut data);
    Ok(data)
}

/// Signed integer frequencies in FFT order, `0, 1, …, n/2−1, −n/2, …, −1`.
pub fn signed_frequencies(n: usize) -> Vec<i64> {
    (0..n)
        .map(|k| {
            if k < n / 2 {
                k as i64
            } else {
                k as i64 - n as i64
            }
        })
        .collect()
}

/// `2πk/L` for each frequency, with the Nyquist entry set to zero.
fn derivative_wavenumbers(n: usize, l: f64) -> Vec<f64> {
    signed_frequencies(n)
        .into_iter()
        .enumerate()
        .map(|(idx, k)| {
            if idx == n / 2 {
                0.0
            } else {
                2.0 * PI * k as f64 / l
            }
        })
        .collect()
}

/// `F(A)` sampled on the FFT frequency lattice of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KpSymbol {
    nx: usize,
    ny: usize,
    values: Vec<Complex64>,
}

impl KpSymbol {
    /// Value at FFT indices `(ix, iy)`.
    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.nx + ix]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
}

/// Regularised KP symbol. The x derivative factor is zeroed at the
/// Nyquist index; the y factor only appears squared and is kept.
pub fn kp_symbol(grid: &Grid2D) -> KpSymbol {
    let kx = derivative_wavenumbers(grid.nx, grid.lx);
    let ky: Vec<f64> = signed_frequencies(grid.ny)
        .into_iter()
        .map(|k| 2.0 * PI * k as f64 / grid.ly)
        .collect();
    let reg = Complex64::new(2.0 * PI * DELTA, 0.0);
    let mut values = Vec::with_capacity(grid.nx * grid.ny);
    for &ky in &ky {
        let iky = Complex64::new(0.0, ky);
        for &kx in &kx {
            let ikx = Complex64::new(0.0, kx);
            values.push(ikx * ikx * ikx + 3.0 * iky * iky / (ikx + reg));
        }
    }
    KpSymbol {
        nx: grid.nx,
        ny: grid.ny,
        values,
    }
}

/// Super-Gaussian taper `exp(−c (|2x/Lx|^n + |2y/Ly|^n))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Window {
    pub order: f64,
    pub strength: f64,
    /// Apply after every `every`-th step.
    pub every: usize,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            order: 27.0,
            strength: 36.0 * std::f64::consts::LN_10,
            every: 1,
        }
    }
}

impl Window {
    pub fn value(&self, x: f64, y: f64, lx: f64, ly: f64) -> f64 {
        let rx = (2.0 * x / lx).abs().powf(self.order);
        let ry = (2.0 * y / ly).abs().powf(self.order);
        (-self.strength * (rx + ry)).exp()
    }

    /// Window sampled at every node of `grid`, row-major.
    pub fn weights(&self, grid: &Grid2D) -> Vec<f64> {
        let xs = grid.xs();
        let mut out = Vec::with_capacity(grid.len());
        for y in grid.ys() {
            out.extend(xs.iter().map(|&x| self.value(x, y, grid.lx, grid.ly)));
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if !(self.order > 0.0 && self.strength >= 0.0 && self.every > 0) {
            return Err(Error::InvalidArgument(format!(
                "bad window parameters {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStepConfig {
    pub window: Option<Window>,
    /// Switching this off leaves the exact linear flow.
    pub nonlinear: bool,
}

impl Default for SplitStepConfig {
    fn default() -> Self {
        SplitStepConfig {
            window: Some(Window::default()),
            nonlinear: true,
        }
    }
}

impl SplitStepConfig {
    pub fn linear() -> Self {
        SplitStepConfig {
            window: None,
            nonlinear: false,
        }
    }
}

/// Fourier coefficients of `u` on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub grid: Grid2D,
    pub coefficients: Vec<Complex64>,
    pub t: f64,
}

fn require_spectral_grid(grid: &Grid2D) -> Result<()> {
    if grid.spacing != Spacing::Periodic {
        return Err(Error::InvalidGrid(
            "the spectral solver needs a periodic grid".into(),
        ));
    }
    check_pow2(grid.nx)?;
    check_pow2(grid.ny)
}

impl SpectralState {
    pub fn from_field(field: &SolutionField) -> Result<Self> {
        if field.quantity != Quantity::U {
            return Err(Error::FieldMismatch(format!(
                "the spectral solver evolves u, got {}",
                field.quantity
            )));
        }
        require_spectral_grid(&field.grid)?;
        if field.flagged > 0 {
            return Err(Error::FieldMismatch(format!(
                "initial field has {} invalid cells",
                field.flagged
            )));
        }
        Ok(SpectralState {
            grid: field.grid,
            coefficients: fft2(&field.values, field.grid.nx, field.grid.ny)?,
            t: field.t,
        })
    }

    /// Physical-space samples, including the imaginary round-off.
    pub fn physical(&self) -> Result<Vec<Complex64>> {
        ifft2(&self.coefficients, self.grid.nx, self.grid.ny)
    }

    /// Largest imaginary part relative to the largest real part.
    pub fn imaginary_ratio(&self) -> Result<f64> {
        let p = self.physical()?;
        let re = p.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
        let im = p.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        Ok(if re == 0.0 { im } else { im / re })
    }

    pub fn to_field(&self) -> Result<SolutionField> {
        let values = self.physical()?.into_iter().map(|v| v.re).collect();
        SolutionField::new(self.grid, Quantity::U, Method::Fft2Exp, self.t, values)
    }
}

/// Precomputed propagator for repeated steps of fixed `dt`.
#[derive(Debug)]
pub struct SplitStepper {
    grid: Grid2D,
    dt: f64,
    config: SplitStepConfig,
    plan: Fft2,
    propagator: Vec<Complex64>,
    // −6·dt·(i kx), indexed by the x frequency.
    nonlinear_factor: Vec<Complex64>,
    window: Option<Vec<f64>>,
    work: Vec<Complex64>,
    steps_taken: usize,
}

impl SplitStepper {
    pub fn new(grid: &Grid2D, dt: f64, symbol: &KpSymbol, config: SplitStepConfig) -> Result<Self> {
        require_spectral_grid(grid)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if symbol.shape() != (grid.nx, grid.ny) {
            return Err(Error::Shape("symbol does not match grid".into()));
        }
        if let Some(w) = &config.window {
            w.validate()?;
        }
        let propagator = symbol.values().iter().map(|s| (dt * s).exp()).collect();
        let nonlinear_factor = derivative_wavenumbers(grid.nx, grid.lx)
            .into_iter()
            .map(|k| Complex64::new(0.0, -6.0 * dt * k))
            .collect();
        Ok(SplitStepper {
            grid: *grid,
            dt,
            config,
            plan: Fft2::new(grid.nx, grid.ny)?,
            propagator,
            nonlinear_factor,
            window: config.window.map(|w| w.weights(grid)),
            work: vec![Complex64::default(); grid.len()],
            steps_taken: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` by one step.
    pub fn step(&mut self, state: &mut SpectralState) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::FieldMismatch(
                "state grid differs from stepper grid".into(),
            ));
        }
        let nx = self.grid.nx;
        let coeffs = &mut state.coefficients;
        for (c, e) in coeffs.iter_mut().zip(&self.propagator) {
            *c *= e;
        }

        if self.config.nonlinear {
            self.work.copy_from_slice(coeffs);
            self.plan.inverse(&mut self.work);
            self.work.iter_mut().for_each(|v| *v = *v * *v);
            self.plan.forward(&mut self.work);
            for (row_c, row_w) in coeffs.chunks_exact_mut(nx).zip(self.work.chunks_exact(nx)) {
                for ((c, w), f) in row_c.iter_mut().zip(row_w).zip(&self.nonlinear_factor) {
                    *c += f * w;
                }
            }
        }

        self.steps_taken += 1;
        if let (Some(weights), Some(cfg)) = (&self.window, &self.config.window) {
            if self.steps_taken.is_multiple_of(cfg.every) {
                self.plan.inverse(coeffs);
                for (c, &w) in coeffs.iter_mut().zip(weights) {
                    *c = Complex64::new(c.re * w, 0.0);
                }
                self.plan.forward(coeffs);
            }
        }

        state.t += self.dt;
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::Unstable {
                step: self.steps_taken,
            });
        }
        Ok(())
    }
}

/// One step of size `dt` from `state`.
pub fn split_step(
    state: SpectralState,
    dt: f64,
    symbol: &KpSymbol,
    config: SplitStepConfig,
) -> Result<SpectralState> {
    let mut stepper = SplitStepper::new(&state.grid, dt, symbol, config)?;
    let mut state = state;
    stepper.step(&mut state)?;
    Ok(state)
}

/// Evolves `u0` over a time span `duration` in `steps` equal steps.
pub fn integrate(
    u0: &SolutionField,
    duration: f64,
    steps: usize,
    config: SplitStepConfig,
) -> Result<SolutionField> {
    let mut state = SpectralState::from_field(u0)?;
    if steps == 0 {
        let mut out = u0.clone();
        out.method = Method::Fft2Exp;
        return Ok(out);
    }
    let symbol = kp_symbol(&u0.grid);
    let mut stepper = SplitStepper::new(&u0.grid, duration / steps as f64, &symbol, config)?;
    for _ in 0..steps {
        stepper.step(&mut state)?;
    }
    state.t = u0.t + duration;
    state.to_field()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, m: usize) -> Grid2D {
        Grid2D::periodic(10.0 * PI, 8.0 * PI, n, m).unwrap()
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(Fft2::new(12, 8).unwrap_err(), Error::NotPowerOfTwo(12));
        assert!(fft2(&[0.0; 6], 3, 2).is_err());
        let inclusive = SolutionField::from_fn(
            Grid2D::new(1.0, 1.0, 8, 8).unwrap(),
            Quantity::U,
            Method::Analytic,
            0.0,
            |_, _| 0.0,
        );
        assert!(SpectralState::from_field(&inclusive).is_err());
    }

    #[test]
    fn delta_transforms_to_ones() {
        let mut v = vec![0.0; 32];
        v[0] = 1.0;
        let c = fft2(&v, 8, 4).unwrap();
        assert!(c
            .iter()
            .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn cosine_gives_conjugate_spikes() {
        let (nx, ny) = (16, 8);
        let v: Vec<f64> = (0..nx * ny)
            .map(|idx| (2.0 * PI * 3.0 * (idx % nx) as f64 / nx as f64).cos())
            .collect();
        let c = fft2(&v, nx, ny).unwrap();
        let half = (nx * ny) as f64 / 2.0;
        for (idx, z) in c.iter().enumerate() {
            let expected = if idx == 3 || idx == nx - 3 { half } else { 0.0 };
            assert!(
                (z - Complex64::new(expected, 0.0)).norm() < 1e-12,
                "{idx} {z}"
            );
        }
    }

    #[test]
    fn symbol_values() {
        let g = Grid2D::periodic(2.0 * PI, 2.0 * PI, 8, 8).unwrap();
        let s = kp_symbol(&g);
        assert_eq!(s.get(0, 0), Complex64::new(0.0, 0.0));
        assert!((s.get(1, 0) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let big = s.get(0, 1);
        assert!((big.re + 3.0 / (2.0 * PI * DELTA)).abs() < 1e-3 * big.re.abs());
        // Nyquist column loses its x derivative.
        assert!((s.get(4, 0)).norm() == 0.0);
    }

    #[test]
    fn symbol_is_hermitian() {
        let g = grid(16, 8);
        let s = kp_symbol(&g);
        for iy in 0..8 {
            for ix in 0..16 {
                let a = s.get(ix, iy);
                let b = s.get((16 - ix) % 16, (8 - iy) % 8);
                assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn window_shape() {
        let w = Window::default();
        let (lx, ly) = (10.0, 6.0);
        assert_eq!(w.value(0.0, 0.0, lx, ly), 1.0);
        assert!(w.value(lx / 2.0, 0.0, lx, ly) < 1.1e-36);
        assert!(w.value(0.1 * lx, 0.1 * ly, lx, ly) > 1.0 - 1e-15);
        assert!(w.value(0.25 * lx, 0.0, lx, ly) > 1.0 - 1e-6);
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = grid(16, 8);
        let u0 = SolutionField::from_fn(g, Quantity::U, Method::Analytic, 0.0, |_, _| 0.0);
        let u = integrate(&u0, 0.1, 20, SplitStepConfig::default()).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
        assert_eq!(u.t, 0.1);
    }

    #[test]
    fn zero_steps_is_identity() {
        let g = grid(8, 8);
        let u0 = SolutionField::from_fn(g, Quantity::U, Method::GlmCc, 0.3, |x, y| (x * y).sin());
        let u = integrate(&u0, 0.0, 0, SplitStepConfig::default()).unwrap();
        assert_eq!(u.values, u0.values);
        assert_eq!(u.t, 0.3);
    }

    #[test]
    fn linear_mode_is_exact() {
        let g = grid(16, 8);
        let (kx, ky) = (2usize, 1usize);
        let mut state = SpectralState {
            grid: g,
            coefficients: vec![Complex64::default(); g.len()],
            t: 0.0,
        };
        state.coefficients[g.index(kx, ky)] = Complex64::new(0.7, -0.2);
        let symbol = kp_symbol(&g);
        let steps = 50;
        let dt = 0.01;
        let mut stepper = SplitStepper::new(&g, dt, &symbol, SplitStepConfig::linear()).unwrap();
        for _ in 0..steps {
            stepper.step(&mut state).unwrap();
        }
        let expected = Complex64::new(0.7, -0.2) * (steps as f64 * dt * symbol.get(kx, ky)).exp();
        let got = state.coefficients[g.index(kx, ky)];
        assert!((got - expected).norm() <= 1e-12 * expected.norm());
    }

    #[test]
    fn y_independent_data_stays_y_independent() {
        let g = grid(32, 8);
        let u0 = SolutionField::from_fn(g, Quantity::U, Method::Analytic, 0.0, |x, _| {
            -0.5 / (x.cosh() * x.cosh())
        });
        let mut state = SpectralState::from_field(&u0).unwrap();
        let symbol = kp_symbol(&g);
        let config = SplitStepConfig {
            window: None,
            nonlinear: true,
        };
        let mut stepper = SplitStepper::new(&g, 1e-3, &symbol, config).unwrap();
        for _ in 0..20 {
            stepper.step(&mut state).unwrap();
        }
        let scale = state
            .coefficients
            .iter()
            .fold(0.0f64, |m, c| m.max(c.norm()));
        for iy in 1..g.ny {
            for ix in 0..g.nx {
                assert!(state.coefficients[g.index(ix, iy)].norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn reality_is_preserved_without_window() {
        let g = grid(32, 16);
        let u0 = SolutionField::from_fn(g, Quantity::U, Method::Analytic, 0.0, |x, y| {
            -0.5 * (-(x * x + 0.3 * y * y) / 4.0).exp()
        });
        let mut state = SpectralState::from_field(&u0).unwrap();
        let symbol = kp_symbol(&g);
        let config = SplitStepConfig {
            window: None,
            nonlinear: true,
        };
        let mut stepper = SplitStepper::new(&g, 1e-3, &symbol, config).unwrap();
        for _ in 0..50 {
            stepper.step(&mut state).unwrap();
            assert!(state.imaginary_ratio().unwrap() <= 1e-10);
        }
    }

    #[test]
    fn blow_up_is_reported_with_step() {
        let g = grid(16, 8);
        let u0 = SolutionField::from_fn(g, Quantity::U, Method::Analytic, 0.0, |x, _| {
            1e150 * x.cos()
        });
        let config = SplitStepConfig {
            window: None,
            nonlinear: true,
        };
        match integrate(&u0, 10.0, 10, config) {
            Err(Error::Unstable { step }) => assert!((1..=10).contains(&step)),
            other => panic!("expected instability, got {other:?}"),
        }
    }
}
