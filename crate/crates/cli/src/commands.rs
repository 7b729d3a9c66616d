use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kp_core::analysis::{
    max_error_in, reference_method, rms_error_in, study_against, study_field, ConvergenceReport,
    Difference, Region,
};
use kp_core::fredholm::{digit_loss_field, g_from_tau, max_digit_loss, tau_grid, u_from_tau};
use kp_core::glm::{solve_glm_grid, u_from_g};
use kp_core::io::{save_field, save_json, save_report};
use kp_core::scattering::{analytic_soliton_g, analytic_soliton_tau, analytic_soliton_u};
use kp_core::spectral::{integrate, SplitStepConfig};
use kp_core::{
    Error, Grid2D, Method, QuadratureKind, Quantity, Result, ScatteringData, SolutionField,
};
use serde::Serialize;

use crate::config::ExperimentConfig;

fn comments(c: &ExperimentConfig, command: &str) -> Vec<String> {
    vec![format!("kp {command}"), c.echo()]
}

fn output_path(c: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&c.out)?;
    Ok(c.out.join(name))
}

/// Closed-form one-soliton field at the shifted coordinates the kernel uses.
fn analytic_field(
    data: &ScatteringData,
    grid: &Grid2D,
    quantity: Quantity,
    t: f64,
) -> Option<SolutionField> {
    let c = *data.as_single_soliton()?;
    let [sx, sy] = data.shift();
    let f: fn(&kp_core::SolitonComponent, f64, f64, f64) -> f64 = match quantity {
        Quantity::G => analytic_soliton_g,
        Quantity::U => analytic_soliton_u,
        Quantity::Tau => analytic_soliton_tau,
    };
    Some(SolutionField::from_fn(
        *grid,
        quantity,
        Method::Analytic,
        t,
        |x, y| f(&c, x - sx, y - sy, t),
    ))
}

fn compute(c: &ExperimentConfig, grid: &Grid2D) -> Result<(SolutionField, Option<f64>)> {
    let data = &c.data;
    match c.method {
        Method::GlmRr | Method::GlmCc => {
            let kind = if c.method == Method::GlmRr {
                QuadratureKind::Riemann
            } else {
                QuadratureKind::ClenshawCurtis
            };
            let g = solve_glm_grid(data, kind, c.m, grid, c.t)?;
            match c.quantity {
                Quantity::U => Ok((u_from_g(&g)?, None)),
                _ => Ok((g, None)),
            }
        }
        Method::DetCc => {
            let tau = tau_grid(data, c.m, grid, c.t)?;
            let loss = max_digit_loss(&digit_loss_field(data, c.m, &tau)?);
            let field = match c.quantity {
                Quantity::Tau => tau,
                Quantity::U => u_from_tau(&tau)?,
                Quantity::G => g_from_tau(&tau)?,
            };
            Ok((field, Some(loss)))
        }
        Method::Analytic => analytic_field(data, grid, c.quantity, c.t)
            .map(|f| (f, None))
            .ok_or_else(|| {
                Error::InvalidArgument("the analytic method needs exactly one soliton".into())
            }),
        Method::Fft2Exp => Err(Error::InvalidArgument(
            "use the evolve command for fft2-exp".into(),
        )),
    }
}

#[derive(Debug, Serialize)]
struct OracleReport {
    max_abs_error: f64,
    /// Restricted to `x ≤ 0`.
    max_abs_error_left: f64,
    max_rel_error: f64,
}

#[derive(Debug, Serialize)]
struct SolveMetadata<'a> {
    command: &'static str,
    method: Method,
    quantity: Quantity,
    file: PathBuf,
    flagged: usize,
    digit_loss_max: Option<f64>,
    oracle: Option<OracleReport>,
    wall_seconds: f64,
    config: &'a ExperimentConfig,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn solve(c: &ExperimentConfig) -> Result<()> {
    let grid = c.grid();
    let start = Instant::now();
    let (field, digit_loss_max) = compute(c, &grid)?;
    let wall_seconds = start.elapsed().as_secs_f64();

    let oracle = match c.method {
        Method::Analytic => None,
        _ => analytic_field(&c.data, &grid, field.quantity, c.t)
            .map(|exact| -> Result<OracleReport> {
                Ok(OracleReport {
                    max_abs_error: max_error_in(
                        &field,
                        &exact,
                        Region::everywhere(),
                        Difference::Absolute,
                    )?,
                    max_abs_error_left: max_error_in(
                        &field,
                        &exact,
                        Region::x_at_most(0.0),
                        Difference::Absolute,
                    )?,
                    max_rel_error: max_error_in(
                        &field,
                        &exact,
                        Region::everywhere(),
                        Difference::Relative,
                    )?,
                })
            })
            .transpose()?,
    };

    let path = output_path(c, &format!("{}_{}.csv", c.method, field.quantity))?;
    save_field(&path, &field, &comments(c, "solve"))?;
    let meta = SolveMetadata {
        command: "solve",
        method: c.method,
        quantity: field.quantity,
        file: path.clone(),
        flagged: field.flagged,
        digit_loss_max,
        oracle,
        wall_seconds,
        config: c,
    };
    save_json(&sidecar(&path), &meta)?;

    println!("wrote {}", path.display());
    if field.flagged > 0 {
        eprintln!(
            "kp: warning: {} cells could not be computed and are NaN",
            field.flagged
        );
    }
    if let Some(loss) = digit_loss_max {
        println!("max digit-loss estimate {loss:.3}");
    }
    if let Some(o) = &meta.oracle {
        println!(
            "closed-form check: max |error| {:.3e} (x <= 0: {:.3e})",
            o.max_abs_error, o.max_abs_error_left
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ConvergeSummary<'a> {
    command: &'static str,
    reports: &'a [ConvergenceReport],
    config: &'a ExperimentConfig,
}

pub fn converge(c: &ExperimentConfig) -> Result<()> {
    let grid = c.grid();
    let reference_m = 1usize << c.reference;
    let mut references: HashMap<Method, SolutionField> = HashMap::new();
    let mut reports = Vec::with_capacity(c.methods.len());
    for &method in &c.methods {
        let rm = reference_method(method);
        if let Entry::Vacant(slot) = references.entry(rm) {
            let start = Instant::now();
            let field = study_field(&c.data, rm, &grid, c.t, reference_m, c.compare)?;
            println!(
                "reference {rm} M={reference_m}: {:.1} s",
                start.elapsed().as_secs_f64()
            );
            slot.insert(field);
        }
        let report = study_against(
            &c.data,
            method,
            &grid,
            c.t,
            &c.m_exponents,
            &references[&rm],
            reference_m,
            c.compare,
        )?;
        let path = output_path(c, &format!("converge_{method}.csv"))?;
        save_report(&path, &report)?;
        println!("{method}: wrote {}", path.display());
        for r in &report.records {
            println!(
                "  M={:<5} rms {:.3e}  max {:.3e}  mod {:.3e}  mod2 {:.3e}  point {:.3e}  {:.2} s",
                r.m, r.rms, r.max_full, r.max_mod, r.max_mod2, r.pointwise, r.cpu_seconds
            );
        }
        reports.push(report);
    }
    let summary = ConvergeSummary {
        command: "converge",
        reports: &reports,
        config: c,
    };
    save_json(&output_path(c, "converge.json")?, &summary)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvolveMetadata<'a> {
    command: &'static str,
    initial: PathBuf,
    last: PathBuf,
    reference: Option<PathBuf>,
    rms_vs_glm_cc_display: Option<f64>,
    wall_seconds: f64,
    config: &'a ExperimentConfig,
}

fn glm_cc_u(c: &ExperimentConfig, grid: &Grid2D, t: f64) -> Result<SolutionField> {
    u_from_g(&solve_glm_grid(
        &c.data,
        QuadratureKind::ClenshawCurtis,
        c.m,
        grid,
        t,
    )?)
}

pub fn evolve(c: &ExperimentConfig) -> Result<()> {
    let grid = c.periodic_grid();
    let u0 = glm_cc_u(c, &grid, c.t)?;
    let steps = if c.t_final == 0.0 { 0 } else { c.steps };
    let config = SplitStepConfig {
        window: c.window,
        nonlinear: true,
    };
    let start = Instant::now();
    let u_end = integrate(&u0, c.t_final, steps, config)?;
    let wall_seconds = start.elapsed().as_secs_f64();

    let header = comments(c, "evolve");
    let initial = output_path(c, "evolve_u0.csv")?;
    let last = output_path(c, "evolve_uT.csv")?;
    save_field(&initial, &u0, &header)?;
    save_field(&last, &u_end, &header)?;

    let (reference, rms) = if steps > 0 {
        let exact = glm_cc_u(c, &grid, u_end.t)?;
        let rms = rms_error_in(&u_end, &exact, Region::display(&grid), Difference::Absolute)?;
        let path = output_path(c, "evolve_uT_glm-cc.csv")?;
        save_field(&path, &exact, &header)?;
        println!("RMS difference from GLM-CC on the display region: {rms:.3e}");
        (Some(path), Some(rms))
    } else {
        (None, None)
    };
    let meta = EvolveMetadata {
        command: "evolve",
        initial: initial.clone(),
        last: last.clone(),
        reference,
        rms_vs_glm_cc_display: rms,
        wall_seconds,
        config: c,
    };
    save_json(&output_path(c, "evolve.json")?, &meta)?;
    println!("wrote {} and {}", initial.display(), last.display());
    Ok(())
}
