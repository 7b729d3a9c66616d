//! Tau function `τ = det(id − P)` by the Nyström–Clenshaw–Curtis rule
//! `det(I − W^{1/2} Q̂ W^{1/2})`, and the KP field recovered from it.

use crate::error::{Error, Result};
use crate::field::{d2dx2_row, ddx_row, Grid2D, Method, Quantity, SolutionField};
use crate::glm::sweep_grid;
use crate::linalg::lu_factor_in_place;
use crate::quadrature::{QuadratureKind, QuadratureRule};
use crate::scattering::ScatteringData;

fn require_cc(rule: &QuadratureRule) -> Result<()> {
    if rule.kind() != QuadratureKind::ClenshawCurtis {
        return Err(Error::InvalidArgument(format!(
            "the Nyström determinant needs Clenshaw–Curtis weights, got {}",
            rule.kind()
        )));
    }
    Ok(())
}

/// `τ(x, y, t) ≈ det(I − W^{1/2} Q̂ W^{1/2})`.
pub fn tau_point(
    data: &ScatteringData,
    rule: &QuadratureRule,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    require_cc(rule)?;
    let n = rule.len();
    let mut a = vec![0.0; n * n];
    data.fill_kernel_matrix(rule.nodes(), rule.nodes(), x, y, t, &mut a);
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteKernel { x, y, t });
    }
    let sqrt_w: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    for (i, row) in a.chunks_exact_mut(n).enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = -sqrt_w[i] * *v * sqrt_w[j];
        }
        row[i] += 1.0;
    }
    Ok(lu_factor_in_place(n, a).determinant())
}

/// Tau function at every grid node (Clenshaw–Curtis rule with `M`).
pub fn tau_grid(data: &ScatteringData, m: usize, grid: &Grid2D, t: f64) -> Result<SolutionField> {
    let rule = QuadratureRule::new(QuadratureKind::ClenshawCurtis, grid.lx, m)?;
    let values = sweep_grid(grid, |x, y| tau_point(data, &rule, x, y, t));
    SolutionField::new(*grid, Quantity::Tau, Method::DetCc, t, values)
}

/// `log τ`, using `log1p(τ − 1)` near one. Non-positive or non-finite
/// input gives `NaN`.
pub fn log_tau(tau: f64) -> f64 {
    if !(tau.is_finite() && tau > 0.0) {
        f64::NAN
    } else if (tau - 1.0).abs() < 0.5 {
        (tau - 1.0).ln_1p()
    } else {
        tau.ln()
    }
}

fn require_tau(field: &SolutionField) -> Result<()> {
    if field.quantity != Quantity::Tau {
        return Err(Error::FieldMismatch(format!(
            "expected a tau field, got {}",
            field.quantity
        )));
    }
    Ok(())
}

fn differentiate_log_tau(
    field: &SolutionField,
    quantity: Quantity,
    stencil: fn(&[f64], f64, &mut [f64]),
) -> Result<SolutionField> {
    require_tau(field)?;
    let grid = field.grid;
    let dx = grid.dx();
    let mut logs = vec![0.0; grid.nx];
    let mut values = vec![0.0; grid.len()];
    for (j, out) in values.chunks_exact_mut(grid.nx).enumerate() {
        for (l, &tau) in logs.iter_mut().zip(field.row(j)) {
            *l = log_tau(tau);
        }
        stencil(&logs, dx, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
    let mut out = SolutionField::new(grid, quantity, field.method, field.t, values)?;
    out.recount_flags();
    Ok(out)
}

/// `u = −∂x² log τ` by second differences along x.
pub fn u_from_tau(field: &SolutionField) -> Result<SolutionField> {
    differentiate_log_tau(field, Quantity::U, d2dx2_row)
}

/// `g = −∂x log τ` by first differences along x.
pub fn g_from_tau(field: &SolutionField) -> Result<SolutionField> {
    differentiate_log_tau(field, Quantity::G, ddx_row)
}

/// Scaled Frobenius norm of the raw kernel samples `Q̂`, used as the
/// Hilbert–Schmidt norm of `P` in the digit-loss estimate.
pub fn kernel_norm(
    data: &ScatteringData,
    rule: &QuadratureRule,
    x: f64,
    y: f64,
    t: f64,
    scale: f64,
) -> f64 {
    let n = rule.len();
    let mut q = vec![0.0; n * n];
    data.fill_kernel_matrix(rule.nodes(), rule.nodes(), x, y, t, &mut q);
    scale * q.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn loss_from_parts(m: usize, norm: f64, tau: f64) -> f64 {
    if norm == 0.0 {
        return f64::NEG_INFINITY;
    }
    ((m as f64).sqrt() * norm / tau).log10()
}

/// Conservative count of decimal digits lost in the determinant,
/// `log10(√M · ‖P‖ / τ)`. `norm_scale` multiplies the Frobenius norm of
/// `Q̂`; the grid's [`Grid2D::rms_scale`] is the customary choice.
/// Zero data yields `-∞`, meaning no loss.
pub fn digit_loss_estimate(
    data: &ScatteringData,
    rule: &QuadratureRule,
    x: f64,
    y: f64,
    t: f64,
    norm_scale: f64,
) -> Result<f64> {
    let tau = tau_point(data, rule, x, y, t)?;
    let norm = kernel_norm(data, rule, x, y, t, norm_scale);
    Ok(loss_from_parts(rule.m(), norm, tau))
}

/// Digit-loss estimate at every node of an existing tau field computed
/// with resolution `m`. Cells with invalid τ come back as `NaN`.
pub fn digit_loss_field(data: &ScatteringData, m: usize, tau: &SolutionField) -> Result<Vec<f64>> {
    require_tau(tau)?;
    let grid = tau.grid;
    let rule = QuadratureRule::new(QuadratureKind::ClenshawCurtis, grid.lx, m)?;
    let scale = grid.rms_scale();
    let norms = sweep_grid(&grid, |x, y| {
        Ok(kernel_norm(data, &rule, x, y, tau.t, scale))
    });
    Ok(norms
        .iter()
        .zip(&tau.values)
        .map(|(&norm, &tv)| {
            if norm == 0.0 {
                f64::NEG_INFINITY
            } else if tv.is_finite() && tv > 0.0 {
                loss_from_parts(m, norm, tv)
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// Largest finite entry, or `-∞` if there is none.
pub fn max_digit_loss(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v))
}
