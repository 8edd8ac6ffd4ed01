//! Primitives of the game: parameters, states, and the derived per-level
//! quantities that every other module is written in terms of.
//!
//! Sensitivity levels are 1-based in every public signature (`m = 1..=n`);
//! the vectors inside [`ModelParams`] are 0-based, so `g[0]` is level 1.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used to check `lambda == 1 / (2 cbar)`.
pub const MICROFOUNDATION_RTOL: f64 = 1e-12;

/// `|theta[m]|` below this raises the near-boundary diagnostic.
pub const THETA_DIAGNOSTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("`{field}` must be strictly {direction} in m (violated between m={at} and m={next})", next = .at + 1)]
    OrderingViolation {
        field: &'static str,
        direction: &'static str,
        at: usize,
    },
    #[error("`{field}` = {value} is outside {bounds}")]
    RangeViolation {
        field: String,
        value: f64,
        bounds: &'static str,
    },
    #[error("`{field}` has length {found}, expected n = {expected}")]
    LengthMismatch {
        field: &'static str,
        found: usize,
        expected: usize,
    },
    #[error("`cbar` = {cbar} implies lambda = {implied}, but lambda = {lambda}")]
    MicrofoundationMismatch {
        cbar: f64,
        lambda: f64,
        implied: f64,
    },
    #[error("`cbar` = {cbar} must exceed b[n] = {b_max}")]
    CbarTooSmall { cbar: f64, b_max: f64 },
}

impl ModelError {
    /// Name of the offending configuration field.
    pub fn field(&self) -> &str {
        match self {
            ModelError::OrderingViolation { field, .. } => field,
            ModelError::RangeViolation { field, .. } => field,
            ModelError::LengthMismatch { field, .. } => field,
            ModelError::MicrofoundationMismatch { .. } | ModelError::CbarTooSmall { .. } => "cbar",
        }
    }
}

/// Primitives of the game. Deserializes from the parameter-file schema
/// (`n`, `lambda`, `g`, `b`, optional `cbar`); call [`ModelParams::validate`]
/// before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub lambda: f64,
    /// Offender utility bounds, strictly decreasing in m.
    pub g: Vec<f64>,
    /// Victim disutility bounds, strictly increasing in m.
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cbar: Option<f64>,
}

impl ModelParams {
    /// Builds and validates a parameter set with `n = g.len()`.
    pub fn new(lambda: f64, g: Vec<f64>, b: Vec<f64>) -> Result<Self, ModelError> {
        ModelParams {
            n: g.len(),
            lambda,
            g,
            b,
            cbar: None,
        }
        .validate()
    }

    /// Builds a parameter set whose `lambda` comes from the condemnation-cost bound.
    pub fn with_cbar(cbar: f64, g: Vec<f64>, b: Vec<f64>) -> Result<Self, ModelError> {
        let b_max = b.last().copied().unwrap_or(f64::NAN);
        let lambda = lambda_from_cbar(cbar, b_max)?;
        ModelParams {
            n: g.len(),
            lambda,
            g,
            b,
            cbar: Some(cbar),
        }
        .validate()
    }

    /// Checks every parameter restriction with exact strict inequalities.
    /// Comparisons are negated so NaN fails them.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(self) -> Result<Self, ModelError> {
        if self.n == 0 {
            return Err(ModelError::RangeViolation {
                field: "n".into(),
                value: 0.0,
                bounds: "n >= 1",
            });
        }
        for (field, v) in [("g", &self.g), ("b", &self.b)] {
            if v.len() != self.n {
                return Err(ModelError::LengthMismatch {
                    field,
                    found: v.len(),
                    expected: self.n,
                });
            }
        }
        if !(self.lambda > 0.0 && self.lambda < 0.5) {
            return Err(ModelError::RangeViolation {
                field: "lambda".into(),
                value: self.lambda,
                bounds: "(0, 1/2)",
            });
        }
        for (field, v) in [("g", &self.g), ("b", &self.b)] {
            for (i, &x) in v.iter().enumerate() {
                if !(x > 1.0 && x < 2.0) {
                    return Err(ModelError::RangeViolation {
                        field: format!("{field}[{}]", i + 1),
                        value: x,
                        bounds: "(1, 2)",
                    });
                }
            }
        }
        if let Some(at) = self.g.windows(2).position(|w| !(w[1] < w[0])) {
            return Err(ModelError::OrderingViolation {
                field: "g",
                direction: "decreasing",
                at: at + 1,
            });
        }
        if let Some(at) = self.b.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(ModelError::OrderingViolation {
                field: "b",
                direction: "increasing",
                at: at + 1,
            });
        }
        // Implied by the bounds above, but everything downstream divides by
        // (1 - lambda b) style terms, so keep it explicit.
        for (i, &b) in self.b.iter().enumerate() {
            if !(self.lambda * b < 1.0) {
                return Err(ModelError::RangeViolation {
                    field: format!("lambda*b[{}]", i + 1),
                    value: self.lambda * b,
                    bounds: "(0, 1)",
                });
            }
        }
        if let Some(cbar) = self.cbar {
            let b_max = self.b[self.n - 1];
            let implied = lambda_from_cbar(cbar, b_max)?;
            if (implied - self.lambda).abs() > MICROFOUNDATION_RTOL * self.lambda {
                return Err(ModelError::MicrofoundationMismatch {
                    cbar,
                    lambda: self.lambda,
                    implied,
                });
            }
        }
        Ok(self)
    }

    /// All 2n states, camp 1 first, then by ascending sensitivity.
    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        [Camp::One, Camp::Two]
            .into_iter()
            .flat_map(move |camp| (1..=self.n).map(move |m| StateId::new(camp, m)))
    }

    pub fn g_at(&self, m: usize) -> f64 {
        self.g[self.idx(m)]
    }

    pub fn b_at(&self, m: usize) -> f64 {
        self.b[self.idx(m)]
    }

    /// Rival-camp condemnation probability `lambda * b[m]`.
    pub fn lambda_b(&self, m: usize) -> f64 {
        self.lambda * self.b_at(m)
    }

    /// Benchmark abstention fraction `lambda b / (2g - 1)`.
    pub fn c(&self, m: usize) -> f64 {
        self.lambda_b(m) / (2.0 * self.g_at(m) - 1.0)
    }

    /// Whataboutism discount factor `lambda b - 2g + 2`.
    pub fn theta(&self, m: usize) -> f64 {
        self.lambda_b(m) - 2.0 * self.g_at(m) + 2.0
    }

    /// `phi_m(z) = (lambda b z + z) / (lambda b + z)`: the probability that a
    /// rival-camp play path cannot support a rebuttal when that camp abstains
    /// with probability `z`.
    pub fn phi(&self, m: usize, z: f64) -> f64 {
        let lb = self.lambda_b(m);
        (lb * z + z) / (lb + z)
    }

    /// Copy with every `g` and `b` scaled by `k`; `lambda` is kept and `cbar`
    /// dropped. Fails if the scaled values leave the admissible region.
    pub fn polarized(&self, k: f64) -> Result<Self, ModelError> {
        ModelParams {
            n: self.n,
            lambda: self.lambda,
            g: self.g.iter().map(|g| g * k).collect(),
            b: self.b.iter().map(|b| b * k).collect(),
            cbar: None,
        }
        .validate()
    }

    pub(crate) fn idx(&self, m: usize) -> usize {
        assert!(
            (1..=self.n).contains(&m),
            "sensitivity level {m} outside 1..={}",
            self.n
        );
        m - 1
    }
}

/// `lambda = 1 / (2 cbar)`, from integrating the uniform condemnation-cost
/// model. Requires `cbar > b_max`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn lambda_from_cbar(cbar: f64, b_max: f64) -> Result<f64, ModelError> {
    if !(cbar > b_max) {
        return Err(ModelError::CbarTooSmall { cbar, b_max });
    }
    Ok(1.0 / (2.0 * cbar))
}

/// The camp that moves first in a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Camp {
    One,
    Two,
}

impl Camp {
    pub fn rival(self) -> Camp {
        match self {
            Camp::One => Camp::Two,
            Camp::Two => Camp::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Camp::One => 1,
            Camp::Two => 2,
        }
    }
}

impl From<Camp> for u8 {
    fn from(c: Camp) -> u8 {
        c.number()
    }
}

impl TryFrom<u8> for Camp {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Camp::One),
            2 => Ok(Camp::Two),
            other => Err(format!("camp must be 1 or 2, got {other}")),
        }
    }
}

impl fmt::Display for Camp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A state `s_camp^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId {
    pub camp: Camp,
    pub m: usize,
}

impl StateId {
    pub fn new(camp: Camp, m: usize) -> Self {
        StateId { camp, m }
    }

    /// The equal-sensitivity state of the rival camp.
    pub fn mirror(self) -> Self {
        StateId::new(self.camp.rival(), self.m)
    }

    /// Sensitivity order: `self` is at least as sensitive as `other`.
    pub fn at_least_as_sensitive_as(self, other: StateId) -> bool {
        self.m >= other.m
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}^{}", self.camp, self.m)
    }
}

/// Per-level constants `c`, `theta` and the threshold `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub c: Vec<f64>,
    pub theta: Vec<f64>,
    /// Lowest m with `theta[m] > 0`, or `n + 1`.
    #[serde(rename = "M")]
    pub big_m: usize,
    /// Levels whose `theta` is within [`THETA_DIAGNOSTIC_TOL`] of zero, where
    /// the `>= 0` and `> 0` readings of `M` could differ.
    pub theta_near_zero: Vec<usize>,
}

impl DerivedQuantities {
    pub fn c_at(&self, m: usize) -> f64 {
        self.c[m - 1]
    }

    pub fn theta_at(&self, m: usize) -> f64 {
        self.theta[m - 1]
    }
}

pub fn derive(params: &ModelParams) -> DerivedQuantities {
    let levels = 1..=params.n;
    let c: Vec<f64> = levels.clone().map(|m| params.c(m)).collect();
    let theta: Vec<f64> = levels.map(|m| params.theta(m)).collect();
    let big_m = theta
        .iter()
        .position(|&t| t > 0.0)
        .map_or(params.n + 1, |i| i + 1);
    let theta_near_zero = theta
        .iter()
        .enumerate()
        .filter(|(_, t)| t.abs() < THETA_DIAGNOSTIC_TOL)
        .map(|(i, _)| i + 1)
        .collect();
    DerivedQuantities {
        c,
        theta,
        big_m,
        theta_near_zero,
    }
}
