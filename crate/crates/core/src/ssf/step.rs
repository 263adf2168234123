use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SsfError;
use crate::spectral::ScalarFunction;

/// Integer-valued, compactly supported, right-continuous step function.
///
/// `values[i]` is the value on `[breakpoints[i-1], breakpoints[i])`, with
/// `values[0]` on `(-∞, breakpoints[0])` and the last entry on
/// `[breakpoints[last], ∞)`. Both outer values are 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<i64>,
}

#[derive(Deserialize)]
struct RawStep {
    breakpoints: Vec<f64>,
    values: Vec<i64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = SsfError;

    fn try_from(raw: RawStep) -> Result<Self, SsfError> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<i64>) -> Result<Self, SsfError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(SsfError::MalformedStep(format!(
                "{} values for {} breakpoints",
                values.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(SsfError::MalformedStep("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SsfError::MalformedStep(
                "breakpoints are not strictly increasing".into(),
            ));
        }
        if values[0] != 0 || values[values.len() - 1] != 0 {
            return Err(SsfError::MalformedStep(
                "step function is not compactly supported".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: vec![],
            values: vec![0],
        }
    }

    /// Builds `Σ_j jump_j · 1[x ≥ position_j]` from signed unit jumps.
    /// Coincident positions are merged and zero net jumps dropped.
    pub fn from_jumps(mut jumps: Vec<(f64, i64)>) -> Self {
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints = Vec::new();
        let mut values = vec![0i64];
        let mut i = 0;
        while i < jumps.len() {
            let x = jumps[i].0;
            let mut net = 0;
            while i < jumps.len() && jumps[i].0 == x {
                net += jumps[i].1;
                i += 1;
            }
            if net != 0 {
                let last = *values.last().unwrap();
                breakpoints.push(x);
                values.push(last + net);
            }
        }
        Self {
            breakpoints,
            values,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, x: f64) -> i64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        self.values[idx]
    }

    pub fn sup_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn min_value(&self) -> i64 {
        self.values.iter().copied().min().unwrap_or(0)
    }

    /// `Σ` of all jumps; zero for compact support.
    pub fn total_jump(&self) -> i64 {
        self.values.windows(2).map(|w| w[1] - w[0]).sum()
    }

    /// `∫ ξ f' dλ`, exact for a piecewise constant ξ:
    /// `Σ_i values[i] · (f(b_i) - f(b_{i-1}))` over bounded intervals.
    pub fn integrate_derivative(&self, f: &ScalarFunction) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            let v = self.values[i + 1];
            if v != 0 {
                acc += (v as f64) * (f.eval(w[1]) - f.eval(w[0]));
            }
        }
        acc
    }

    /// `∫ |ξ(λ)| (1+|λ|)^{-power} dλ`, exact for a step function.
    pub fn weighted_l1(&self, power: f64) -> f64 {
        // antiderivative of (1+|x|)^{-p} for p > 1 on a signed axis
        let prim = |x: f64| {
            let s = x.signum();
            s * (1.0 - (1.0 + x.abs()).powf(1.0 - power)) / (power - 1.0)
        };
        self.breakpoints
            .windows(2)
            .enumerate()
            .map(|(i, w)| (self.values[i + 1].abs() as f64) * (prim(w[1]) - prim(w[0])))
            .sum()
    }

    /// Pointwise sum; used for the chain rule.
    pub fn add(&self, other: &StepFunction) -> StepFunction {
        let mut jumps = self.jumps();
        jumps.extend(other.jumps());
        StepFunction::from_jumps(jumps)
    }

    pub fn jumps(&self) -> Vec<(f64, i64)> {
        self.breakpoints
            .iter()
            .zip(self.values.windows(2))
            .map(|(&b, w)| (b, w[1] - w[0]))
            .collect()
    }

    /// Maps breakpoints through an increasing function.
    pub fn map_breakpoints<F: Fn(f64) -> f64>(&self, map: F) -> StepFunction {
        StepFunction {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|&b| map(b))
                .collect(),
            values: self.values.clone(),
        }
    }

    /// Same values and breakpoints within `tol · max(1, |b|)`.
    pub fn matches(&self, other: &StepFunction, tol: f64) -> bool {
        self.values == other.values
            && self
                .breakpoints
                .iter()
                .zip(&other.breakpoints)
                .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(1.0))
    }

    /// Largest breakpoint displacement, or `None` if the value sequences differ.
    pub fn breakpoint_distance(&self, other: &StepFunction) -> Option<f64> {
        if self.values != other.values {
            return None;
        }
        Some(
            self.breakpoints
                .iter()
                .zip(&other.breakpoints)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step functions always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SsfError> {
        serde_json::from_str(text).map_err(|e| SsfError::MalformedStep(e.to_string()))
    }
}
