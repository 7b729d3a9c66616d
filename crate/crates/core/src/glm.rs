//! Quadrature discretisation of the Gelfand–Levitan–Marchenko equation
//!
//! ```text
//! p(x, ζ+x; y, t) = g(0, ζ) − ∫_{-Lx/2}^0 g(0, ξ) p(ξ+x, ζ+x; y, t) dξ
//! ```
//!
//! With nodes `ξ_{m'}`/`ζ_m` and weights `w_{m'}` this becomes the row
//! system `P̂ = Ĝ (I − W Q̂)`, where `Q̂[m'][m] = p(ξ_{m'}+x, ζ_m+x)` and the
//! row index `m'` is the one contracted against `Ĝ`. The last entry of `Ĝ`
//! approximates `g(0, 0; x, y, t)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ddx_row, Grid2D, Method, Quantity, SolutionField};
use crate::linalg::{lu_factor_in_place, DenseMatrix};
use crate::quadrature::{QuadratureKind, QuadratureRule};
use crate::scattering::ScatteringData;

/// Builds `P̂` and `Q̂` for one evaluation point.
pub fn assemble_glm(
    data: &ScatteringData,
    rule: &QuadratureRule,
    x: f64,
    y: f64,
    t: f64,
) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = rule.len();
    let mut q = vec![0.0; n * n];
    data.fill_kernel_matrix(rule.nodes(), rule.nodes(), x, y, t, &mut q);
    let phat = q[(n - 1) * n..].to_vec();
    let qhat = DenseMatrix::new(n, n, q).map_err(|_| Error::NonFiniteKernel { x, y, t })?;
    Ok((phat, qhat))
}

/// Solves the discretised GLM equation at `(x, y, t)` and returns
/// `g(0, 0; x, y, t)`.
pub fn solve_glm_point(
    data: &ScatteringData,
    rule: &QuadratureRule,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    let n = rule.len();
    let mut q = vec![0.0; n * n];
    data.fill_kernel_matrix(rule.nodes(), rule.nodes(), x, y, t, &mut q);
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteKernel { x, y, t });
    }
    let phat = q[(n - 1) * n..].to_vec();

    // (I − WQ̂)ᵀ, written directly: row m holds δ_{m m'} − w_{m'} Q̂[m'][m].
    let w = rule.weights();
    let mut at = vec![0.0; n * n];
    for (mp, &wm) in w.iter().enumerate() {
        let qrow = &q[mp * n..(mp + 1) * n];
        for (m, &qv) in qrow.iter().enumerate() {
            at[m * n + mp] = -wm * qv;
        }
    }
    for m in 0..n {
        at[m * n + m] += 1.0;
    }

    let factors = lu_factor_in_place(n, at);
    let ghat = factors.solve(&phat).map_err(|e| match e {
        Error::Singular { pivot } => Error::SingularGlm { x, y, t, pivot },
        other => other,
    })?;
    Ok(ghat[n - 1])
}

fn method_for(kind: QuadratureKind) -> Method {
    match kind {
        QuadratureKind::Riemann => Method::GlmRr,
        QuadratureKind::ClenshawCurtis => Method::GlmCc,
    }
}

/// Evaluates `f(x, y)` at every grid node in parallel. Failed cells become
/// `NaN`. Every node is computed independently, so the result does not
/// depend on scheduling.
pub(crate) fn sweep_grid<F>(grid: &Grid2D, f: F) -> Vec<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let xs = grid.xs();
    let ys = grid.ys();
    let mut values = vec![0.0; grid.len()];
    values
        .par_chunks_mut(grid.nx)
        .zip(ys.par_iter())
        .for_each(|(row, &y)| {
            for (v, &x) in row.iter_mut().zip(&xs) {
                *v = f(x, y).unwrap_or(f64::NAN);
            }
        });
    values
}

/// One GLM solve per grid node.
pub fn solve_glm_grid(
    data: &ScatteringData,
    kind: QuadratureKind,
    m: usize,
    grid: &Grid2D,
    t: f64,
) -> Result<SolutionField> {
    let rule = QuadratureRule::new(kind, grid.lx, m)?;
    let values = sweep_grid(grid, |x, y| solve_glm_point(data, &rule, x, y, t));
    SolutionField::new(*grid, Quantity::G, method_for(kind), t, values)
}

/// `u = ∂x g` by finite differences along x.
pub fn u_from_g(gfield: &SolutionField) -> Result<SolutionField> {
    if gfield.quantity != Quantity::G {
        return Err(Error::FieldMismatch(format!(
            "expected a g field, got {}",
            gfield.quantity
        )));
    }
    let grid = gfield.grid;
    let dx = grid.dx();
    let mut values = vec![0.0; grid.len()];
    for (j, out) in values.chunks_exact_mut(grid.nx).enumerate() {
        ddx_row(gfield.row(j), dx, out);
    }
    let mut field = SolutionField::new(grid, Quantity::U, gfield.method, gfield.t, values)?;
    field.recount_flags();
    Ok(field)
}
