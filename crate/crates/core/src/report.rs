//! Row builders for the CLI and the CSV table writer.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansion::{c_value, evaluate_c, mrl_expansion, theta_scale, theta_via_coefficients, D_TABLE_CAP};
use crate::models::HazardModel;
use crate::oracle::mrl_quadrature;

/// Relative gap under which the two Θ evaluations count as agreeing.
pub const AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub t: f64,
    pub r: f64,
    pub s: f64,
    pub m_quad: f64,
    pub m_quad_err: f64,
    pub m_exp: f64,
    pub m_closed: Option<f64>,
    pub rm_product: f64,
    /// Θ⁰(s)(t), ..., Θᴷ(s)(t).
    pub thetas: Vec<f64>,
}

pub fn eval_row(model: &HazardModel, t: f64, order: usize, tol: f64) -> Result<EvalRow> {
    let r = model.hazard(t)?;
    let q = mrl_quadrature(model, t, tol)?;
    let (m_exp, seq) = mrl_expansion(model, t, order)?;
    let m_closed = if model.capabilities().closed_form_mrl {
        Some(model.mrl_closed_form(t)?)
    } else {
        None
    };
    Ok(EvalRow {
        t,
        r,
        s: 1.0 / r,
        m_quad: q.value,
        m_quad_err: q.abs_error_estimate,
        m_exp,
        m_closed,
        rm_product: r * q.value,
        thetas: seq.terms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandRow {
    pub k: usize,
    pub theta: f64,
    pub partial_sum: f64,
    /// Absent beyond the partition table cap.
    pub c_k: Option<f64>,
    pub c_scaled: Option<f64>,
    /// Recursion and multi-index table agree; `None` beyond the table cap.
    pub agree: Option<bool>,
    pub error_vs_quad: f64,
}

pub fn expand_rows(model: &HazardModel, t: f64, order: usize, tol: f64) -> Result<Vec<ExpandRow>> {
    let (_, seq) = mrl_expansion(model, t, order)?;
    let q = mrl_quadrature(model, t, tol)?;
    let mut rows = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let theta = seq.terms[k];
        let agree = if k <= D_TABLE_CAP {
            let via = theta_via_coefficients(model, t, k)?;
            let scale = theta.abs().max(theta_scale(model, t, k)?);
            Some((via - theta).abs() <= AGREEMENT_TOL * scale)
        } else {
            None
        };
        rows.push(ExpandRow {
            k,
            theta,
            partial_sum: seq.partial_sums[k],
            c_k: optional(c_value(model, t, k))?,
            c_scaled: optional(evaluate_c(model, t, k))?,
            agree,
            error_vs_quad: seq.partial_sums[k] - q.value,
        });
    }
    Ok(rows)
}

fn optional(v: Result<f64>) -> Result<Option<f64>> {
    match v {
        Ok(x) => Ok(Some(x)),
        Err(Error::Resource(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `steps` equally spaced times from `t_start` to `t_end` inclusive.
pub fn time_grid(t_start: f64, t_end: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !t_start.is_finite() || !t_end.is_finite() || t_end < t_start {
        return Err(Error::Argument(format!(
            "need finite t_start <= t_end and steps >= 1, got [{t_start}, {t_end}] with {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![t_start]);
    }
    let h = (t_end - t_start) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { t_end } else { t_start + i as f64 * h })
        .collect())
}

/// Rows are computed in parallel and returned in grid order.
pub fn table_rows(model: &HazardModel, grid: &[f64], order: usize, tol: f64) -> Result<Vec<EvalRow>> {
    grid.par_iter().map(|&t| eval_row(model, t, order, tol)).collect()
}

pub fn table_header(order: usize) -> Vec<String> {
    let mut header: Vec<String> = ["t", "r", "s", "m_quad", "m_quad_err", "m_exp", "rm_product"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..=order).map(|k| format!("theta_{k}")));
    header
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_table<W: Write>(out: W, rows: &[EvalRow], order: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table_header(order))?;
    for row in rows {
        let mut record = vec![
            sci(row.t),
            sci(row.r),
            sci(row.s),
            sci(row.m_quad),
            sci(row.m_quad_err),
            sci(row.m_exp),
            sci(row.rm_product),
        ];
        record.extend(row.thetas.iter().map(|&x| sci(x)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
