//! Brute-force ground truth: cumulative hazard, survival and mean residual
//! life by adaptive quadrature, plus grid diagnostics for the limiting
//! behaviour of `r·m`.
//!
//! Essential suprema and infima are replaced by extremes over deterministic
//! grids. That is exact in the limit for the catalog models, whose `r` and
//! `s'` are continuous on `(0, ∞)`; a model with jumps would need more care.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{HazardModel, ResidualTail};
use crate::quadrature::{Integral, Node, Simpson};

/// Default relative tolerance for mean residual life quadrature.
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_PANELS: u32 = 64;
/// Quadrature tolerance for the window samples in [`limit_diagnostics`].
pub const DIAGNOSTIC_TOL: f64 = 1e-6;
/// Log-spaced points over [T, 10T] used for the tail extremes.
pub const TAIL_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// Where the improper tail was cut.
    pub truncation_point: f64,
}

fn check_args(model: &HazardModel, t: f64, tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    model.hazard(t).map(|_| ())
}

/// Breakpoints no wider than half a local oscillation period.
fn oscillation_breaks(model: &HazardModel, from: f64, to: f64) -> Vec<f64> {
    let mut breaks = Vec::new();
    if model.oscillation_phase_rate(from).is_none() {
        return breaks;
    }
    let mut x = from;
    loop {
        let rate = model.oscillation_phase_rate(x).unwrap_or(0.0).max(1.0);
        x += (PI / rate).min(1.0);
        if x >= to {
            break;
        }
        breaks.push(x);
    }
    breaks
}

fn integrate_hazard(model: &HazardModel, from: f64, to: f64, eps: f64) -> Result<Integral> {
    let breaks = oscillation_breaks(model, from, to);
    // The phase t² carries rounding of order ε·t², which the integrand inherits.
    let phase = model.oscillation_phase_rate(to).map_or(0.0, |rate| rate * to);
    let simpson = Simpson {
        eps,
        min_depth: 1,
        rel_noise: 1e-13 + 16.0 * f64::EPSILON * phase,
        ..Simpson::default()
    };
    let start = Node {
        x: from,
        f: model.hazard_unchecked(from),
        aux: 0.0,
    };
    let (mut out, _) = simpson.integrate_pieces(
        |_, x| Ok(Node { x, f: model.hazard_unchecked(x), aux: 0.0 }),
        start,
        &breaks,
        to,
    )?;
    out.evaluations += 1;
    Ok(out)
}

/// R(t) = ∫_0^t r. Closed forms are used where the model has them.
pub fn cumulative_hazard(model: &HazardModel, t: f64, tol: f64) -> Result<QuadResult> {
    check_args(model, t, tol)?;
    if let Some(value) = model.cumulative_hazard_closed(t) {
        return Ok(QuadResult {
            value,
            abs_error_estimate: 0.0,
            evaluations: 1,
            truncation_point: t,
        });
    }
    let out = integrate_hazard(model, 0.0, t, tol)?;
    Ok(QuadResult {
        value: out.value,
        abs_error_estimate: out.error,
        evaluations: out.evaluations,
        truncation_point: t,
    })
}

/// F̄(t) = exp(-R(t)).
pub fn survival(model: &HazardModel, t: f64, tol: f64) -> Result<f64> {
    Ok((-cumulative_hazard(model, t, tol)?.value).exp())
}

/// m(t) = ∫_0^∞ exp(-(R(t+x) - R(t))) dx.
///
/// The range is covered by panels `[0, L], [L, 2L], [2L, 4L], ...` with `L`
/// the local time scale. After each panel the remaining tail is
/// `exp(-ΔR) · m(u)` at the cut `u`; integration stops once the model can
/// certify that this is below `tol · value`.
pub fn mrl_quadrature(model: &HazardModel, t: f64, tol: f64) -> Result<QuadResult> {
    check_args(model, t, tol)?;
    let r = model.hazard(t)?;
    let scale = match model.residual_tail(t) {
        Some(ResidualTail::Exact(v) | ResidualTail::Bound(v)) if v.is_finite() && v > 0.0 => v.min(1.0 / r),
        _ => 1.0 / r,
    };
    let scale = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
    let first = mrl_panels(model, t, tol, 0.25 * tol * scale, scale)?;
    if first.abs_error_estimate <= 2.0 * tol * first.value {
        return Ok(first);
    }
    let second = mrl_panels(model, t, tol, 0.25 * tol * first.value, scale)?;
    if second.abs_error_estimate > 2.0 * tol * second.value {
        return Err(Error::Quadrature(format!(
            "m({t}) = {} with error {} misses tolerance {tol}",
            second.value, second.abs_error_estimate
        )));
    }
    Ok(QuadResult {
        evaluations: first.evaluations + second.evaluations,
        ..second
    })
}

fn mrl_panels(model: &HazardModel, t: f64, tol: f64, eps: f64, scale: f64) -> Result<QuadResult> {
    let closed = model.capabilities().closed_form_cumulative_hazard;
    // ΔR errors become relative errors of the integrand.
    let inner_eps = 1e-2 * tol;
    let eval = |anchor: &Node, x: f64| -> Result<Node> {
        let aux = if closed {
            model.hazard_increment(t, x).expect("closed-form increment")
        } else {
            anchor.aux + integrate_hazard(model, t + anchor.x, t + x, inner_eps)?.value
        };
        Ok(Node { x, f: (-aux).exp(), aux })
    };
    let simpson = Simpson {
        eps,
        rel_noise: if closed { 0.0 } else { 0.1 * tol },
        ..Simpson::default()
    };
    let mut node = Node { x: 0.0, f: 1.0, aux: 0.0 };
    let mut acc = Integral::default();
    for k in 0..MAX_PANELS {
        let end = scale * 2f64.powi(k as i32);
        let panel_eps = eps * 6.0 / (PI * PI * ((k + 1) as f64).powi(2));
        let breaks = oscillation_breaks(model, t + node.x, t + end)
            .into_iter()
            .map(|u| u - t)
            .collect::<Vec<_>>();
        let (part, last) = Simpson { eps: panel_eps, ..simpson }.integrate_pieces(eval, node, &breaks, end)?;
        acc.value += part.value;
        acc.error += part.error;
        acc.evaluations += part.evaluations;
        node = last;

        let cut = t + node.x;
        let survival = (-node.aux).exp();
        let last_panel = k + 1 == MAX_PANELS;
        match model.residual_tail(cut) {
            Some(ResidualTail::Exact(m)) => {
                let tail = survival * m;
                if tail <= tol * acc.value || last_panel {
                    acc.value += tail;
                    return Ok(finish(acc, cut));
                }
            }
            Some(ResidualTail::Bound(m)) => {
                let tail = survival * m;
                if tail <= tol * acc.value {
                    acc.error += tail;
                    return Ok(finish(acc, cut));
                }
            }
            None => {}
        }
    }
    Err(Error::TailUnbounded(format!(
        "{model}: no certified tail bound for m({t}) within {MAX_PANELS} panels"
    )))
}

fn finish(acc: Integral, cut: f64) -> QuadResult {
    QuadResult {
        value: acc.value,
        abs_error_estimate: acc.error,
        evaluations: acc.evaluations.max(1),
        truncation_point: cut,
    }
}

/// Default step for the central difference in [`de1_residual`].
pub fn default_step(t: f64) -> f64 {
    1e-4 * t.max(1.0)
}

/// |(m(t+h) - m(t-h)) / 2h - (r(t) m(t) - 1)| with m from quadrature.
pub fn de1_residual(model: &HazardModel, t: f64, h: f64, tol: f64) -> Result<f64> {
    if !(h > 0.0 && t > h) {
        return Err(Error::Argument(format!("need t > h > 0, got t = {t}, h = {h}")));
    }
    let m = |x| mrl_quadrature(model, x, tol).map(|q| q.value);
    let slope = (m(t + h)? - m(t - h)?) / (2.0 * h);
    Ok((slope - (model.hazard(t)? * m(t)? - 1.0)).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitDiagnostics {
    pub window: (f64, f64),
    pub window_points: usize,
    pub inf_rm: f64,
    pub sup_rm: f64,
    /// Extremes of m over the window.
    pub m_min: f64,
    pub m_max: f64,
    /// Grid infimum and supremum of r beyond T.
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Grid supremum of |s'| beyond T.
    pub lambda_hat: f64,
    /// 1/(1 - s'(T)), when s'(T) != 1.
    pub sprime_limit_bound: Option<f64>,
    /// Window points where quadrature failed.
    pub failures: Vec<(f64, String)>,
}

/// Uniform points over [T, 2T], refined to a quarter radian of phase where
/// the model oscillates.
pub fn window_grid(model: &HazardModel, big_t: f64, grid_points: usize) -> Vec<f64> {
    let end = 2.0 * big_t;
    let uniform = big_t / (grid_points - 1) as f64;
    let mut points = Vec::with_capacity(grid_points);
    let mut x = big_t;
    while x < end {
        points.push(x);
        let step = match model.oscillation_phase_rate(x) {
            Some(rate) if rate > 0.0 => uniform.min(0.25 * PI / rate),
            _ => uniform,
        };
        x += step;
    }
    points.push(end);
    points
}

pub fn tail_grid(big_t: f64) -> Vec<f64> {
    let n = TAIL_GRID_POINTS;
    (0..n)
        .map(|i| big_t * 10f64.powf(i as f64 / (n - 1) as f64))
        .collect()
}

pub fn limit_diagnostics(model: &HazardModel, big_t: f64, grid_points: usize) -> Result<LimitDiagnostics> {
    limit_diagnostics_with_tol(model, big_t, grid_points, DIAGNOSTIC_TOL)
}

pub fn limit_diagnostics_with_tol(
    model: &HazardModel,
    big_t: f64,
    grid_points: usize,
    tol: f64,
) -> Result<LimitDiagnostics> {
    if !(big_t.is_finite() && big_t > 0.0) {
        return Err(Error::Argument(format!("window start must be positive, got {big_t}")));
    }
    if grid_points < 16 {
        return Err(Error::Argument(format!("need at least 16 grid points, got {grid_points}")));
    }
    let window = window_grid(model, big_t, grid_points);
    let samples: Vec<(f64, Result<(f64, f64)>)> = window
        .par_iter()
        .map(|&t| {
            let rm = model
                .hazard(t)
                .and_then(|r| mrl_quadrature(model, t, tol).map(|q| (r, q.value)));
            (t, rm)
        })
        .collect();

    let mut failures = Vec::new();
    let (mut inf_rm, mut sup_rm) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut m_min, mut m_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (t, sample) in samples {
        match sample {
            Ok((r, m)) => {
                inf_rm = inf_rm.min(r * m);
                sup_rm = sup_rm.max(r * m);
                m_min = m_min.min(m);
                m_max = m_max.max(m);
            }
            Err(e) => failures.push((t, e.to_string())),
        }
    }
    if failures.len() == window.len() {
        return Err(Error::Quadrature(format!(
            "every window point failed, first: {}",
            failures[0].1
        )));
    }

    let mut alpha_hat = f64::INFINITY;
    let mut beta_hat = f64::NEG_INFINITY;
    let mut lambda_hat = 0.0f64;
    for t in window.iter().copied().chain(tail_grid(big_t)) {
        let s = model.s_jet(t, 1)?;
        let r = 1.0 / s.value();
        alpha_hat = alpha_hat.min(r);
        beta_hat = beta_hat.max(r);
        lambda_hat = lambda_hat.max(s.coeffs()[1].abs());
    }
    let s_prime = model.s_jet(big_t, 1)?.coeffs()[1];
    let sprime_limit_bound = (s_prime != 1.0).then(|| 1.0 / (1.0 - s_prime));

    Ok(LimitDiagnostics {
        window: (big_t, 2.0 * big_t),
        window_points: window.len(),
        inf_rm,
        sup_rm,
        m_min,
        m_max,
        alpha_hat,
        beta_hat,
        lambda_hat,
        sprime_limit_bound,
        failures,
    })
}

/// ln(s(T)) - R(T) for each T, i.e. the log of s·exp(-R).
pub fn hyp1_profile(model: &HazardModel, t_list: &[f64]) -> Result<Vec<f64>> {
    if t_list.is_empty() || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("time list must be non-empty and increasing".into()));
    }
    t_list
        .iter()
        .map(|&t| {
            let r = model.hazard(t)?;
            let coarse = cumulative_hazard(model, t, 1e-3 * t.max(1.0))?.value;
            let big_r = cumulative_hazard(model, t, 1e-8 * coarse.abs().max(1.0))?.value;
            Ok(-r.ln() - big_r)
        })
        .collect()
}

/// True when s(T)·exp(-R(T)) decreases along `t_list` and ends below `tol`.
/// Compared in log space so that underflow cannot produce ties.
pub fn hyp1_check(model: &HazardModel, t_list: &[f64], tol: f64) -> Result<bool> {
    let logs = hyp1_profile(model, t_list)?;
    let decreasing = logs.windows(2).all(|w| w[1] < w[0]);
    Ok(decreasing && *logs.last().expect("non-empty") < tol.ln())
}
