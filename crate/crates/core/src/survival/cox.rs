//! Ridge-penalized Cox partial likelihood with Breslow ties, and its Newton
//! minimizer.
//!
//! Loss: `Σ_i D_i log Σ_{j: T_j ≥ T_i} exp(βᵀx_j − βᵀx_i) + (λ/2)‖β‖²`.

use nalgebra::{DMatrix, DVector};

use super::model::CoxModel;
use crate::error::{Error, Result};
use crate::ingest::SurvivalDataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when the largest coefficient update falls below this.
    pub beta_tolerance: f64,
    /// Stop when the relative loss change falls below this.
    pub loss_tolerance: f64,
    pub max_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 100,
            beta_tolerance: 1e-7,
            loss_tolerance: 1e-9,
            max_halvings: 30,
        }
    }
}

/// Loss, gradient and Hessian at one coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LossDerivatives {
    pub loss: f64,
    pub gradient: Vec<f64>,
    /// Row-major p × p.
    pub hessian: Vec<f64>,
}

impl LossDerivatives {
    pub fn hessian_at(&self, i: usize, j: usize) -> f64 {
        let p = self.gradient.len();
        self.hessian[i * p + j]
    }
}

/// Rows sorted by descending duration, covariates mean-centred, tied
/// durations grouped. Centring shifts every linear predictor by the same
/// constant, which cancels inside each risk-set ratio.
pub(crate) struct RiskSets {
    p: usize,
    x: Vec<f64>,
    event: Vec<bool>,
    /// `[start, end)` ranges of tied durations, longest first.
    groups: Vec<(usize, usize)>,
}

impl RiskSets {
    pub(crate) fn new(ds: &SurvivalDataset) -> Result<Self> {
        ds.validate()?;
        let p = ds.n_features();
        let n = ds.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ds.rows[b].duration_days.total_cmp(&ds.rows[a].duration_days));

        let mut mean = vec![0.0; p];
        for row in &ds.rows {
            for (m, v) in mean.iter_mut().zip(&row.covariates) {
                *m += v;
            }
        }
        if n > 0 {
            mean.iter_mut().for_each(|m| *m /= n as f64);
        }

        let mut x = Vec::with_capacity(n * p);
        let mut event = Vec::with_capacity(n);
        let mut groups = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            let row = &ds.rows[i];
            x.extend(row.covariates.iter().zip(&mean).map(|(v, m)| v - m));
            event.push(row.event);
            let starts_group = pos == 0 || ds.rows[order[pos - 1]].duration_days != row.duration_days;
            if starts_group {
                groups.push((pos, pos + 1));
            } else {
                groups.last_mut().expect("open group").1 = pos + 1;
            }
        }
        Ok(RiskSets { p, x, event, groups })
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub(crate) fn evaluate(&self, beta: &[f64], penalizer: f64, derivatives: bool) -> LossDerivatives {
        let p = self.p;
        let n = self.event.len();
        let eta: Vec<f64> = (0..n)
            .map(|i| self.row(i).iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect();
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };

        let mut s0 = 0.0;
        let mut s1 = vec![0.0; if derivatives { p } else { 0 }];
        let mut s2 = vec![0.0; if derivatives { p * p } else { 0 }];
        let mut loss = 0.0;
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; if derivatives { p * p } else { 0 }];

        for &(start, end) in &self.groups {
            for i in start..end {
                let w = (eta[i] - shift).exp();
                s0 += w;
                if derivatives {
                    let xi = self.row(i);
                    for a in 0..p {
                        let wa = w * xi[a];
                        if wa == 0.0 {
                            continue;
                        }
                        s1[a] += wa;
                        for b in a..p {
                            s2[a * p + b] += wa * xi[b];
                        }
                    }
                }
            }
            let d = (start..end).filter(|&i| self.event[i]).count();
            if d == 0 {
                continue;
            }
            let d = d as f64;
            let log_s0 = s0.ln() + shift;
            for i in (start..end).filter(|&i| self.event[i]) {
                loss += log_s0 - eta[i];
                if derivatives {
                    for (g, v) in grad.iter_mut().zip(self.row(i)) {
                        *g -= v;
                    }
                }
            }
            if derivatives {
                for a in 0..p {
                    let ma = s1[a] / s0;
                    grad[a] += d * ma;
                    for b in a..p {
                        let mb = s1[b] / s0;
                        hess[a * p + b] += d * (s2[a * p + b] / s0 - ma * mb);
                    }
                }
            }
        }

        let ridge: f64 = beta.iter().map(|b| b * b).sum();
        loss += 0.5 * penalizer * ridge;
        if derivatives {
            for a in 0..p {
                grad[a] += penalizer * beta[a];
                hess[a * p + a] += penalizer;
                for b in 0..a {
                    hess[a * p + b] = hess[b * p + a];
                }
            }
        }
        LossDerivatives {
            loss,
            gradient: if derivatives { grad } else { Vec::new() },
            hessian: hess,
        }
    }
}

fn check_beta(beta: &[f64], ds: &SurvivalDataset) -> Result<()> {
    if beta.len() != ds.n_features() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_features(),
            got: beta.len(),
        });
    }
    Ok(())
}

/// Penalized negative log partial likelihood (Breslow ties).
pub fn cox_loss(beta: &[f64], ds: &SurvivalDataset, penalizer: f64) -> Result<f64> {
    check_beta(beta, ds)?;
    Ok(RiskSets::new(ds)?.evaluate(beta, penalizer, false).loss)
}

/// [`cox_loss`] together with its analytic gradient and Hessian.
pub fn cox_loss_derivatives(beta: &[f64], ds: &SurvivalDataset, penalizer: f64) -> Result<LossDerivatives> {
    check_beta(beta, ds)?;
    Ok(RiskSets::new(ds)?.evaluate(beta, penalizer, true))
}

fn cholesky(hessian: &[f64], p: usize) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    DMatrix::from_row_slice(p, p, hessian).cholesky()
}

/// Newton minimization of [`cox_loss`] with step halving, followed by the
/// Breslow baseline.
pub fn cox_fit(ds: &SurvivalDataset, penalizer: f64, options: &FitOptions) -> Result<CoxModel> {
    if !(penalizer >= 0.0) || !penalizer.is_finite() {
        return Err(Error::InvalidInput(format!("penalizer {penalizer} must be finite and ≥ 0")));
    }
    if ds.n_events() == 0 {
        return Err(Error::NoEvents);
    }
    let sets = RiskSets::new(ds)?;
    let p = ds.n_features();
    let mut beta = vec![0.0; p];
    let mut current = sets.evaluate(&beta, penalizer, true);
    let mut history = vec![current.loss];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let chol = cholesky(&current.hessian, p).ok_or(Error::SingularHessian { iteration: iterations })?;
        let step = chol.solve(&-DVector::from_column_slice(&current.gradient));
        let max_step = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));

        if max_step < options.beta_tolerance {
            for (b, s) in beta.iter_mut().zip(step.iter()) {
                *b += s;
            }
            converged = true;
            break;
        }

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let trial: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + scale * s).collect();
            let loss = sets.evaluate(&trial, penalizer, false).loss;
            if loss.is_finite() && loss <= current.loss {
                accepted = Some((trial, loss));
                break;
            }
            scale *= 0.5;
        }
        let Some((trial, loss)) = accepted else {
            // no descent along the Newton direction: numerically at the optimum
            converged = current.gradient.iter().all(|g| g.abs() < 1e-6 * (1.0 + current.loss.abs()));
            break;
        };
        let previous = current.loss;
        beta = trial;
        history.push(loss);
        current = sets.evaluate(&beta, penalizer, true);
        if (previous - loss).abs() <= options.loss_tolerance * previous.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let last = sets.evaluate(&beta, penalizer, true);
    let standard_errors = match cholesky(&last.hessian, p) {
        Some(ch) => {
            let inv = ch.inverse();
            (0..p).map(|i| inv[(i, i)].max(0.0).sqrt()).collect()
        }
        None if penalizer == 0.0 => return Err(Error::SingularHessian { iteration: iterations }),
        None => vec![f64::NAN; p],
    };
    let (baseline_times, baseline_cumhaz) = breslow(&beta, ds)?;
    let max_time = ds.rows.iter().map(|r| r.duration_days).fold(0.0, f64::max);

    Ok(CoxModel {
        feature_names: ds.feature_names.clone(),
        beta,
        standard_errors,
        baseline_times,
        baseline_cumhaz,
        penalizer,
        converged,
        iterations,
        final_loss: last.loss,
        max_time,
        loss_history: history,
    })
}

/// Breslow cumulative baseline hazard at the distinct event times:
/// `Ĥ₀(t) = Σ_{t_k ≤ t} d_k / Σ_{j: T_j ≥ t_k} exp(βᵀx_j)` on raw covariates.
pub fn breslow(beta: &[f64], ds: &SurvivalDataset) -> Result<(Vec<f64>, Vec<f64>)> {
    check_beta(beta, ds)?;
    let n = ds.len();
    let eta: Vec<f64> = ds
        .rows
        .iter()
        .map(|r| r.covariates.iter().zip(beta).map(|(x, b)| x * b).sum())
        .collect();
    let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ds.rows[b].duration_days.total_cmp(&ds.rows[a].duration_days));

    // walk from the longest duration down, collecting (time, increment)
    let mut increments = Vec::new();
    let mut s0 = 0.0;
    let mut pos = 0;
    while pos < n {
        let t = ds.rows[order[pos]].duration_days;
        let mut d = 0usize;
        while pos < n && ds.rows[order[pos]].duration_days == t {
            let i = order[pos];
            s0 += (eta[i] - shift).exp();
            d += usize::from(ds.rows[i].event);
            pos += 1;
        }
        if d > 0 {
            increments.push((t, d as f64 / s0 * (-shift).exp()));
        }
    }
    increments.reverse();
    let mut cum = 0.0;
    let (times, cumhaz) = increments
        .into_iter()
        .map(|(t, h)| {
            cum += h;
            (t, cum)
        })
        .unzip();
    Ok((times, cumhaz))
}
