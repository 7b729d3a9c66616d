//! Error metrics between fields and quadrature convergence studies.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid2D, Method, Quantity, SolutionField};
use crate::fredholm::{tau_grid, tau_point, u_from_tau};
use crate::glm::{solve_glm_grid, solve_glm_point, u_from_g};
use crate::quadrature::{QuadratureKind, QuadratureRule};
use crate::scattering::ScatteringData;

/// Upper x limit of the "mod" restriction.
pub const X_MOD: f64 = 10.8;
/// Upper x limit of the "mod2" restriction.
pub const X_MOD2: f64 = 0.0;
/// Generic probe point.
pub const PROBE: (f64, f64) = (6.4, 6.4);

/// Closed rectangle of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn everywhere() -> Self {
        Region {
            x_min: f64::NEG_INFINITY,
            x_max: f64::INFINITY,
            y_min: f64::NEG_INFINITY,
            y_max: f64::INFINITY,
        }
    }

    pub fn x_at_most(x_max: f64) -> Self {
        Region {
            x_max,
            ..Region::everywhere()
        }
    }

    /// `[−Lx/4, Lx/2] × [−Ly/4, Ly/2]`, where the shifted two-soliton
    /// interaction is framed.
    pub fn display(grid: &Grid2D) -> Self {
        Region {
            x_min: -0.25 * grid.lx,
            x_max: 0.5 * grid.lx,
            y_min: -0.25 * grid.ly,
            y_max: 0.5 * grid.ly,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

/// How two samples are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difference {
    Absolute,
    /// `|a − b| / |b|`, with `b` the reference.
    Relative,
}

impl Difference {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Difference::Absolute => (a - b).abs(),
            Difference::Relative => (a - b).abs() / b.abs(),
        }
    }
}

fn check_compatible(a: &SolutionField, b: &SolutionField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::FieldMismatch(
            "fields live on different grids".into(),
        ));
    }
    if a.quantity != b.quantity {
        return Err(Error::FieldMismatch(format!(
            "cannot compare {} with {}",
            a.quantity, b.quantity
        )));
    }
    Ok(())
}

fn differences<'a>(
    a: &'a SolutionField,
    b: &'a SolutionField,
    region: Region,
    kind: Difference,
) -> impl Iterator<Item = f64> + 'a {
    let grid = a.grid;
    (0..grid.ny).flat_map(move |j| {
        let y = grid.y(j);
        (0..grid.nx).filter_map(move |i| {
            let x = grid.x(i);
            region
                .contains(x, y)
                .then(|| kind.apply(a.at(i, j), b.at(i, j)))
        })
    })
}

/// Frobenius norm of the difference over `region`, scaled by
/// `(Lx·Ly / (Nx·Ny))^{1/2}`. Invalid cells make the result `NaN`.
pub fn rms_error_in(
    a: &SolutionField,
    b: &SolutionField,
    region: Region,
    kind: Difference,
) -> Result<f64> {
    check_compatible(a, b)?;
    let sum: f64 = differences(a, b, region, kind).map(|d| d * d).sum();
    Ok(a.grid.rms_scale() * sum.sqrt())
}

/// Largest difference over `region`. Invalid cells make the result `NaN`.
pub fn max_error_in(
    a: &SolutionField,
    b: &SolutionField,
    region: Region,
    kind: Difference,
) -> Result<f64> {
    check_compatible(a, b)?;
    Ok(differences(a, b, region, kind).fold(0.0, |m: f64, d| {
        if d.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(d)
        }
    }))
}

/// Scaled Frobenius norm of `a − b` over the whole grid.
pub fn rms_error(a: &SolutionField, b: &SolutionField) -> Result<f64> {
    rms_error_in(a, b, Region::everywhere(), Difference::Absolute)
}

/// Largest `|a − b|` over nodes with `x ≤ x_max`.
pub fn max_error(a: &SolutionField, b: &SolutionField, x_max: f64) -> Result<f64> {
    max_error_in(a, b, Region::x_at_most(x_max), Difference::Absolute)
}

/// What a convergence study compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compare {
    /// `g` for the GLM methods, relative `τ` for Det-CC.
    Native,
    /// `u` for every method, so different methods can be set side by side.
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    #[serde(rename = "M")]
    pub m: usize,
    pub rms: f64,
    pub max_full: f64,
    pub max_mod: f64,
    pub max_mod2: f64,
    pub pointwise: f64,
    pub cpu_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: Method,
    pub compare: Compare,
    pub reference_m: usize,
    pub records: Vec<ConvergenceRecord>,
}

impl ConvergenceReport {
    pub fn ms(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.m).collect()
    }
}

fn quadrature_for(method: Method) -> Result<QuadratureKind> {
    match method {
        Method::GlmRr => Ok(QuadratureKind::Riemann),
        Method::GlmCc | Method::DetCc => Ok(QuadratureKind::ClenshawCurtis),
        other => Err(Error::InvalidArgument(format!(
            "{other} is not a quadrature method"
        ))),
    }
}

/// The method whose high-resolution field serves as reference. The
/// Riemann rule is first order, so its own `2¹⁰` field is still far from
/// converged; it is measured against GLM-CC instead.
pub fn reference_method(method: Method) -> Method {
    match method {
        Method::GlmRr => Method::GlmCc,
        other => other,
    }
}

fn difference_for(method: Method, compare: Compare) -> Difference {
    match (method, compare) {
        (Method::DetCc, Compare::Native) => Difference::Relative,
        _ => Difference::Absolute,
    }
}

/// Field compared by a study: `g`/`τ` natively, or `u`.
pub fn study_field(
    data: &ScatteringData,
    method: Method,
    grid: &Grid2D,
    t: f64,
    m: usize,
    compare: Compare,
) -> Result<SolutionField> {
    let native = match method {
        Method::DetCc => tau_grid(data, m, grid, t)?,
        _ => solve_glm_grid(data, quadrature_for(method)?, m, grid, t)?,
    };
    match (compare, native.quantity) {
        (Compare::Native, _) => Ok(native),
        (Compare::U, Quantity::Tau) => u_from_tau(&native),
        (Compare::U, _) => u_from_g(&native),
    }
}

/// Runs the study for each `M = 2^e`, measuring against `reference`.
#[allow(clippy::too_many_arguments)]
pub fn study_against(
    data: &ScatteringData,
    method: Method,
    grid: &Grid2D,
    t: f64,
    m_exponents: &[u32],
    reference: &SolutionField,
    reference_m: usize,
    compare: Compare,
) -> Result<ConvergenceReport> {
    let mut exps = m_exponents.to_vec();
    exps.sort_unstable();
    exps.dedup();
    if let Some(&top) = exps.last() {
        if 1usize << top >= reference_m {
            return Err(Error::InvalidArgument(format!(
                "reference M={reference_m} must exceed every study M (largest 2^{top})"
            )));
        }
    }
    let kind = difference_for(method, compare);
    let (pi, pj) = grid.nearest(PROBE.0, PROBE.1);
    let mut records = Vec::with_capacity(exps.len());
    for e in exps {
        let m = 1usize << e;
        let start = Instant::now();
        let field = study_field(data, method, grid, t, m, compare)?;
        let cpu_seconds = start.elapsed().as_secs_f64();
        records.push(ConvergenceRecord {
            m,
            rms: rms_error_in(&field, reference, Region::everywhere(), kind)?,
            max_full: max_error_in(&field, reference, Region::everywhere(), kind)?,
            max_mod: max_error_in(&field, reference, Region::x_at_most(X_MOD), kind)?,
            max_mod2: max_error_in(&field, reference, Region::x_at_most(X_MOD2), kind)?,
            pointwise: kind.apply(field.at(pi, pj), reference.at(pi, pj)),
            cpu_seconds,
        });
    }
    Ok(ConvergenceReport {
        method,
        compare,
        reference_m,
        records,
    })
}

/// Convergence of `method` over `M = 2^e` for each exponent, against the
/// `2^reference_exponent` field.
pub fn convergence_study(
    data: &ScatteringData,
    method: Method,
    grid: &Grid2D,
    t: f64,
    m_exponents: &[u32],
    reference_exponent: u32,
    compare: Compare,
) -> Result<ConvergenceReport> {
    if m_exponents.iter().any(|&e| e >= reference_exponent) {
        return Err(Error::InvalidArgument(format!(
            "reference exponent {reference_exponent} must exceed every study exponent"
        )));
    }
    let reference_m = 1usize << reference_exponent;
    let reference = study_field(
        data,
        reference_method(method),
        grid,
        t,
        reference_m,
        compare,
    )?;
    study_against(
        data,
        method,
        grid,
        t,
        m_exponents,
        &reference,
        reference_m,
        compare,
    )
}

/// `g` (GLM methods) or `τ` (Det-CC) at a single point.
pub fn point_value(
    data: &ScatteringData,
    method: Method,
    length: f64,
    m: usize,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    let rule = QuadratureRule::new(quadrature_for(method)?, length, m)?;
    match method {
        Method::DetCc => tau_point(data, &rule, x, y, t),
        _ => solve_glm_point(data, &rule, x, y, t),
    }
}

/// Pointwise error at `(x, y)` for each `M = 2^e`, against the
/// `2^reference_exponent` value of the reference method. Returns
/// `(M, error)` pairs; Det-CC errors are relative.
pub fn pointwise_convergence(
    data: &ScatteringData,
    method: Method,
    length: f64,
    (x, y): (f64, f64),
    t: f64,
    m_exponents: &[u32],
    reference_exponent: u32,
) -> Result<Vec<(usize, f64)>> {
    let reference = point_value(
        data,
        reference_method(method),
        length,
        1 << reference_exponent,
        x,
        y,
        t,
    )?;
    let kind = difference_for(method, Compare::Native);
    m_exponents
        .iter()
        .map(|&e| {
            let m = 1usize << e;
            let v = point_value(data, method, length, m, x, y, t)?;
            Ok((m, kind.apply(v, reference)))
        })
        .collect()
}

/// Least-squares slope of `log10(error)` against `log10(M)`.
pub fn log_log_slope(points: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0 && e.is_finite())
        .map(|&(m, e)| ((m as f64).log10(), e.log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
