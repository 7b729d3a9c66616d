//! Quadrature rules on `[-L/2, 0]` with `M/2 + 1` nodes.
//!
//! Nodes are stored in ascending order; the first node is exactly `-L/2`
//! and the last is exactly `0`, so the last unknown of a GLM solve always
//! sits at `ζ = 0`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    Riemann,
    ClenshawCurtis,
}

impl fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureKind::Riemann => write!(f, "riemann"),
            QuadratureKind::ClenshawCurtis => write!(f, "clenshaw-curtis"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    m: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval_length: f64,
}

impl QuadratureRule {
    pub fn new(kind: QuadratureKind, length: f64, m: usize) -> Result<Self> {
        match kind {
            QuadratureKind::Riemann => riemann_rule(length, m),
            QuadratureKind::ClenshawCurtis => clenshaw_curtis_rule(length, m),
        }
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    /// The resolution parameter `M`; the rule has `M/2 + 1` nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `L/2`, the length of the integration interval.
    pub fn interval_length(&self) -> f64 {
        self.interval_length
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn check(length: f64, m: usize) -> Result<()> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidQuadrature(format!(
            "domain length must be positive, got {length}"
        )));
    }
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::InvalidQuadrature(format!(
            "M must be even and at least 2, got {m}"
        )));
    }
    Ok(())
}

/// Uniform nodes `-L/2 + m·h`, `h = L/M`, each carrying weight `h`.
///
/// All `M/2 + 1` nodes get the full weight, so the rule over-counts the
/// interval by one panel; that O(h) defect is part of the rule's
/// first-order error.
pub fn riemann_rule(length: f64, m: usize) -> Result<QuadratureRule> {
    check(length, m)?;
    let n = m / 2;
    let h = length / m as f64;
    let mut nodes: Vec<f64> = (0..=n).map(|j| -0.5 * length + j as f64 * h).collect();
    nodes[0] = -0.5 * length;
    nodes[n] = 0.0;
    Ok(QuadratureRule {
        kind: QuadratureKind::Riemann,
        m,
        nodes,
        weights: vec![h; n + 1],
        interval_length: 0.5 * length,
    })
}

/// Clenshaw–Curtis rule with `n = M/2` panels mapped onto `[-L/2, 0]`.
///
/// Reference nodes are the Chebyshev extreme points `cos(jπ/n)`; weights use
/// the explicit cosine sum
///
/// ```text
/// w_j = (c_j / n) · (1 − Σ_{k=1}^{⌊n/2⌋} b_k cos(2kjπ/n) / (4k² − 1))
/// ```
///
/// with `c_0 = c_n = 1`, `c_j = 2` otherwise, `b_{n/2} = 1`, `b_k = 2`
/// otherwise, then scaled by `L/4`.
pub fn clenshaw_curtis_rule(length: f64, m: usize) -> Result<QuadratureRule> {
    check(length, m)?;
    let n = m / 2;
    let half = 0.25 * length;
    let mut nodes = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    for j in 0..=n {
        // cos(jπ/n) written as a sine of the signed offset from the middle,
        // which keeps the node set symmetric to the last bit.
        let reference = (PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin();
        nodes.push(-half * (1.0 + reference));

        let mut sum = 0.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            let kk = k as f64;
            let angle = (2 * k * j % (2 * n)) as f64 * PI / n as f64;
            sum += b * angle.cos() / (4.0 * kk * kk - 1.0);
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        weights.push(half * c / n as f64 * (1.0 - sum));
    }
    nodes[0] = -0.5 * length;
    nodes[n] = 0.0;
    Ok(QuadratureRule {
        kind: QuadratureKind::ClenshawCurtis,
        m,
        nodes,
        weights,
        interval_length: 0.5 * length,
    })
}
