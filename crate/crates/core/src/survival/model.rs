use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fitted proportional-hazards model: `h(t|x) = h₀(t) exp(βᵀx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxModel {
    pub feature_names: Vec<String>,
    pub beta: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Distinct event times, ascending.
    pub baseline_times: Vec<f64>,
    /// Breslow Ĥ₀ at each baseline time.
    pub baseline_cumhaz: Vec<f64>,
    pub penalizer: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
    /// Largest observed duration in the training data.
    pub max_time: f64,
    #[serde(default)]
    pub loss_history: Vec<f64>,
}

/// `S_x(t)` on `[0] ∪ baseline_times`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalPrediction {
    pub times: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub partial_hazard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainingLifetime {
    pub days: f64,
    /// `t0` was at or beyond the last observed time.
    pub beyond_horizon: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub beta: f64,
    pub standard_error: f64,
    pub p_value: f64,
    /// Zero standard error; the p-value is reported as 0.
    pub degenerate: bool,
}

impl CoxModel {
    pub fn n_features(&self) -> usize {
        self.beta.len()
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.beta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.beta.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn linear_predictor(&self, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        Ok(x.iter().zip(&self.beta).map(|(a, b)| a * b).sum())
    }

    pub fn partial_hazard(&self, x: &[f64]) -> Result<f64> {
        self.linear_predictor(x).map(f64::exp)
    }

    /// Ĥ₀(t), a right-continuous step function; 0 before the first event.
    pub fn cumulative_baseline_hazard(&self, t: f64) -> f64 {
        match self.baseline_times.partition_point(|&s| s <= t) {
            0 => 0.0,
            i => self.baseline_cumhaz[i - 1],
        }
    }

    /// S₀(t) = exp(−Ĥ₀(t)).
    pub fn baseline_survival(&self, t: f64) -> f64 {
        (-self.cumulative_baseline_hazard(t)).exp()
    }

    /// S_x(t) = S₀(t)^exp(βᵀx).
    pub fn survival_at(&self, x: &[f64], t: f64) -> Result<f64> {
        let c = self.partial_hazard(x)?;
        Ok((-self.cumulative_baseline_hazard(t) * c).exp())
    }

    pub fn predict_survival(&self, x: &[f64]) -> Result<SurvivalPrediction> {
        let c = self.partial_hazard(x)?;
        let mut times = Vec::with_capacity(self.baseline_times.len() + 1);
        let mut probabilities = Vec::with_capacity(times.capacity());
        times.push(0.0);
        probabilities.push(1.0);
        for (&t, &h) in self.baseline_times.iter().zip(&self.baseline_cumhaz) {
            times.push(t);
            probabilities.push((-h * c).exp());
        }
        Ok(SurvivalPrediction {
            times,
            probabilities,
            partial_hazard: c,
        })
    }

    /// `∫_{t0}^{T_max} S_x(t) / S_x(t0) dt`, truncated at the last observed
    /// time, so it underestimates when survival past `T_max` is material.
    pub fn expected_remaining_lifetime(&self, x: &[f64], t0: f64) -> Result<RemainingLifetime> {
        let c = self.partial_hazard(x)?;
        if t0 >= self.max_time {
            return Ok(RemainingLifetime {
                days: 0.0,
                beyond_horizon: true,
            });
        }
        let values: Vec<f64> = self.baseline_cumhaz.iter().map(|h| (-h * c).exp()).collect();
        let s0 = self.survival_at(x, t0)?;
        if !(s0 > 0.0) {
            return Err(Error::Undefined(format!("predicted survival at t0 = {t0} is zero")));
        }
        let area = integrate_step(&self.baseline_times, &values, 1.0, t0, self.max_time);
        Ok(RemainingLifetime {
            days: area / s0,
            beyond_horizon: false,
        })
    }

    pub fn coefficients(&self) -> Vec<Coefficient> {
        self.feature_names
            .iter()
            .zip(&self.beta)
            .zip(&self.standard_errors)
            .map(|((name, &beta), &se)| {
                let (p_value, degenerate) = wald_p_value(beta, se);
                Coefficient {
                    name: name.clone(),
                    beta,
                    standard_error: se,
                    p_value,
                    degenerate,
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: CoxModel = serde_json::from_str(text)?;
        let p = m.beta.len();
        if m.feature_names.len() != p || m.standard_errors.len() != p {
            return Err(Error::Serialization("coefficient vectors have different lengths".into()));
        }
        if m.baseline_times.len() != m.baseline_cumhaz.len() {
            return Err(Error::Serialization("baseline times and hazards differ in length".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Integral over `[from, to]` of a right-continuous step function equal to
/// `initial` before `breaks[0]` and `values[i]` on `[breaks[i], breaks[i+1])`.
pub fn integrate_step(breaks: &[f64], values: &[f64], initial: f64, from: f64, to: f64) -> f64 {
    if to <= from {
        return 0.0;
    }
    let mut area = 0.0;
    let mut left = from;
    let mut level = match breaks.partition_point(|&b| b <= from) {
        0 => initial,
        i => values[i - 1],
    };
    for (&b, &v) in breaks.iter().zip(values) {
        if b <= from {
            continue;
        }
        if b >= to {
            break;
        }
        area += level * (b - left);
        left = b;
        level = v;
    }
    area + level * (to - left)
}

/// Standard normal upper tail via the complementary error function.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Two-sided Wald p-value `2(1 − Φ(|β|/se))`. A zero standard error yields
/// `(0, true)`.
pub fn wald_p_value(beta: f64, se: f64) -> (f64, bool) {
    if se == 0.0 {
        return (0.0, true);
    }
    ((2.0 * normal_sf((beta / se).abs())).min(1.0), false)
}

/// Coefficients with p < alpha, sorted by name.
pub fn significant_coefficients(model: &CoxModel, alpha: f64) -> Vec<Coefficient> {
    let mut out: Vec<Coefficient> = model
        .coefficients()
        .into_iter()
        .filter(|c| c.p_value < alpha)
        .collect();
    out.sort_by(|a, b| a.name.cmp(&b.name));
    out
}
