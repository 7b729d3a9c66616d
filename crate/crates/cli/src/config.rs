//! Experiment settings: a TOML file mirroring the command-line flags,
//! overlaid by the flags themselves, then resolved and validated.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use kp_core::analysis::Compare;
use kp_core::spectral::Window;
use kp_core::{Grid2D, Method, QuadratureKind, QuadratureRule, Quantity, ScatteringData};
use serde::{Deserialize, Serialize};

/// Every setting is optional here; missing ones take per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub solitons: Option<String>,
    #[serde(rename = "Lx")]
    pub lx: Option<f64>,
    #[serde(rename = "Ly")]
    pub ly: Option<f64>,
    #[serde(rename = "Nx")]
    pub nx: Option<usize>,
    #[serde(rename = "Ny")]
    pub ny: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub t: Option<f64>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub steps: Option<usize>,
    pub xshift: Option<f64>,
    pub yshift: Option<f64>,
    pub method: Option<String>,
    pub quantity: Option<String>,
    pub methods: Option<String>,
    pub m_min: Option<u32>,
    pub m_max: Option<u32>,
    pub reference: Option<u32>,
    pub compare: Option<String>,
    pub window: Option<bool>,
    pub window_order: Option<f64>,
    pub window_strength: Option<f64>,
    pub window_every: Option<usize>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings, String> {
        let text =
            fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config file {}: {e}", path.display()))
    }

    /// Values set in `top` win.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay!(base, top; solitons, lx, ly, nx, ny, m, t, t_final, steps, xshift, yshift,
            method, quantity, methods, m_min, m_max, reference, compare, window,
            window_order, window_strength, window_every, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Converge,
    Evolve,
}

/// Fully resolved and validated settings for one command.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub solitons: String,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Ny")]
    pub ny: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub t: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub steps: usize,
    pub xshift: f64,
    pub yshift: f64,
    pub method: Method,
    pub quantity: Quantity,
    pub methods: Vec<Method>,
    pub m_exponents: Vec<u32>,
    pub reference: u32,
    pub compare: Compare,
    pub window: Option<Window>,
    pub out: PathBuf,
    #[serde(skip)]
    pub data: ScatteringData,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.trim().parse().map_err(|e: kp_core::Error| e.to_string())
}

fn native_quantity(method: Method) -> Quantity {
    match method {
        Method::DetCc => Quantity::Tau,
        _ => Quantity::G,
    }
}

impl ExperimentConfig {
    pub fn resolve(s: Settings, command: Command) -> Result<ExperimentConfig, String> {
        let solitons = s.solitons.unwrap_or_else(|| "1.55,1.45;1.3,0".to_string());
        let xshift = s.xshift.unwrap_or(10.0);
        let yshift = s.yshift.unwrap_or(10.0);
        let data = solitons
            .parse::<ScatteringData>()
            .map_err(|e| e.to_string())?
            .with_shift(xshift, yshift);

        let default_n = if command == Command::Converge {
            64
        } else {
            128
        };
        let lx = s.lx.unwrap_or(10.0 * PI);
        let ly = s.ly.unwrap_or(10.0 * PI);
        let nx = s.nx.unwrap_or(default_n);
        let ny = s.ny.unwrap_or(default_n);
        let grid = if command == Command::Evolve {
            let g = Grid2D::periodic(lx, ly, nx, ny).map_err(|e| e.to_string())?;
            for n in [nx, ny] {
                if !n.is_power_of_two() {
                    return Err(kp_core::Error::NotPowerOfTwo(n).to_string());
                }
            }
            g
        } else {
            Grid2D::new(lx, ly, nx, ny).map_err(|e| e.to_string())?
        };

        let m = s.m.unwrap_or(128);
        QuadratureRule::new(QuadratureKind::ClenshawCurtis, grid.lx, m)
            .map_err(|e| e.to_string())?;

        let default_t = if command == Command::Converge {
            0.25
        } else {
            0.0
        };
        let t = s.t.unwrap_or(default_t);
        let t_final = s.t_final.unwrap_or(0.25);
        let steps = s.steps.unwrap_or(10_000);
        for (name, v) in [
            ("t", t),
            ("T", t_final),
            ("xshift", xshift),
            ("yshift", yshift),
        ] {
            if !v.is_finite() {
                return Err(format!("{name} must be finite"));
            }
        }
        if t_final < 0.0 {
            return Err(format!("T must be non-negative, got {t_final}"));
        }
        if t_final > 0.0 && steps == 0 {
            return Err("steps must be positive when T > 0".into());
        }

        let method = match &s.method {
            Some(m) => parse_method(m)?,
            None if command == Command::Evolve => Method::Fft2Exp,
            None => Method::GlmCc,
        };
        let quantity = match &s.quantity {
            Some(q) => q.parse().map_err(|e: kp_core::Error| e.to_string())?,
            None if command == Command::Evolve => Quantity::U,
            None => native_quantity(method),
        };
        if command == Command::Solve {
            check_solve(method, quantity, &data)?;
        }
        if command == Command::Evolve && method != Method::Fft2Exp {
            return Err(format!("evolve runs fft2-exp, not {method}"));
        }

        let methods = match &s.methods {
            Some(list) => list
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(parse_method)
                .collect::<Result<Vec<_>, _>>()?,
            None if s.method.is_some() => vec![method],
            None => vec![Method::GlmRr, Method::GlmCc, Method::DetCc],
        };
        if command == Command::Converge {
            if methods.is_empty() {
                return Err("no methods given".into());
            }
            if let Some(bad) = methods
                .iter()
                .find(|m| !matches!(m, Method::GlmRr | Method::GlmCc | Method::DetCc))
            {
                return Err(format!("{bad} has no quadrature resolution to study"));
            }
        }
        let m_min = s.m_min.unwrap_or(2);
        let m_max = s.m_max.unwrap_or(9);
        let reference = s.reference.unwrap_or(10);
        if m_min < 1 || m_min > m_max {
            return Err(format!("need 1 <= m_min <= m_max, got {m_min}..{m_max}"));
        }
        if reference <= m_max {
            return Err(format!(
                "reference exponent {reference} must exceed m_max {m_max}"
            ));
        }
        if reference > 14 {
            return Err(format!("reference exponent {reference} is too large"));
        }
        let compare = match s.compare.as_deref().map(str::trim) {
            None | Some("native") => Compare::Native,
            Some("u") => Compare::U,
            Some(other) => return Err(format!("unknown comparison {other:?} (native or u)")),
        };

        let window = if s.window.unwrap_or(true) {
            let d = Window::default();
            let w = Window {
                order: s.window_order.unwrap_or(d.order),
                strength: s.window_strength.unwrap_or(d.strength),
                every: s.window_every.unwrap_or(d.every),
            };
            if !(w.order > 0.0 && w.strength >= 0.0 && w.every > 0) {
                return Err(format!("bad window parameters {w:?}"));
            }
            Some(w)
        } else {
            None
        };

        Ok(ExperimentConfig {
            solitons: data.to_string(),
            lx,
            ly,
            nx,
            ny,
            m,
            t,
            t_final,
            steps,
            xshift,
            yshift,
            method,
            quantity,
            methods,
            m_exponents: (m_min..=m_max).collect(),
            reference,
            compare,
            window,
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
            data,
        })
    }

    pub fn grid(&self) -> Grid2D {
        Grid2D::new(self.lx, self.ly, self.nx, self.ny).expect("validated at resolve time")
    }

    pub fn periodic_grid(&self) -> Grid2D {
        Grid2D::periodic(self.lx, self.ly, self.nx, self.ny).expect("validated at resolve time")
    }

    /// The configuration as TOML, for echoing into output headers.
    pub fn echo(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}

fn check_solve(method: Method, quantity: Quantity, data: &ScatteringData) -> Result<(), String> {
    match (method, quantity) {
        (Method::Fft2Exp, _) => Err("fft2-exp is a time stepper; use the evolve command".into()),
        (Method::GlmRr | Method::GlmCc, Quantity::Tau) => {
            Err(format!("{method} yields g and u; use det-cc for tau"))
        }
        (Method::Analytic, _) if data.as_single_soliton().is_none() => {
            Err("the analytic method needs exactly one soliton".into())
        }
        _ => Ok(()),
    }
}
