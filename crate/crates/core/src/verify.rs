//! Invariant suites run by `mrl verify`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expansion::{
    c_terms, d_coefficients, mrl_expansion, theta_scale, theta_terms, theta_via_coefficients, C_TABLE_CAP, D_TABLE_CAP,
};
use crate::jets::factorial;
use crate::models::HazardModel;
use crate::oracle::{de1_residual, hyp1_profile, limit_diagnostics, mrl_quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Limits,
    Expansion,
    De1,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "limits" => Ok(Self::Limits),
            "expansion" => Ok(Self::Expansion),
            "de1" => Ok(Self::De1),
            "all" => Ok(Self::All),
            _ => Err(Error::Argument(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// T = 50 windows, tolerances doubled.
    Fast,
    /// T = 200 windows.
    Full,
}

impl Level {
    pub fn window_start(self) -> f64 {
        match self {
            Level::Fast => 50.0,
            Level::Full => 200.0,
        }
    }

    pub fn slack(self) -> f64 {
        match self {
            Level::Fast => 2.0,
            Level::Full => 1.0,
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            _ => Err(Error::Argument(format!("unknown level '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub model: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {} :: {} :: {}", self.model, self.name, self.detail)
    }
}

struct Recorder<'a> {
    model: &'a HazardModel,
    checks: Vec<Check>,
}

impl Recorder<'_> {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            model: self.model.to_string(),
            name: name.to_string(),
            passed,
            detail,
        });
    }

    fn push_result(&mut self, name: &str, outcome: Result<(bool, String)>) {
        match outcome {
            Ok((passed, detail)) => self.push(name, passed, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

fn param(model: &HazardModel, key: &str) -> Option<f64> {
    model.params().into_iter().find(|(k, _)| *k == key).map(|(_, v)| v)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn run(models: &[HazardModel], suite: Suite, level: Level) -> Vec<Check> {
    let mut out = Vec::new();
    for model in models {
        let mut rec = Recorder {
            model,
            checks: Vec::new(),
        };
        if matches!(suite, Suite::Limits | Suite::All) {
            limits(&mut rec, level);
        }
        if matches!(suite, Suite::Expansion | Suite::All) {
            expansion(&mut rec, level);
        }
        if matches!(suite, Suite::De1 | Suite::All) {
            de1(&mut rec, level);
        }
        out.extend(rec.checks);
    }
    out
}

fn limits(rec: &mut Recorder, level: Level) {
    let model = *rec.model;
    let slack = level.slack();

    if model.capabilities().closed_form_mrl {
        rec.push_result(
            "oracle vs closed-form m",
            (|| {
                let mut worst = 0.0f64;
                let mut ok = true;
                for t in [0.0, 1.0, 5.0, 20.0, 100.0] {
                    let q = mrl_quadrature(&model, t, 1e-9)?;
                    let exact = model.mrl_closed_form(t)?;
                    let diff = (q.value - exact).abs();
                    ok &= diff <= slack * (1e-6 * exact).max(2.0 * q.abs_error_estimate);
                    worst = worst.max(diff / exact);
                }
                Ok((ok, format!("worst relative difference {worst:.3e}")))
            })(),
        );
    }

    let big_t = level.window_start();
    let diag = match limit_diagnostics(&model, big_t, 64) {
        Ok(d) => d,
        Err(e) => {
            rec.push("limit diagnostics", false, format!("error: {e}"));
            return;
        }
    };
    rec.push(
        "window quadrature",
        diag.failures.is_empty(),
        format!("{} window points, {} failures", diag.window_points, diag.failures.len()),
    );

    let grid = 0.02 * slack;
    rec.push(
        "ess sandwich 1/beta <= m <= 1/alpha",
        1.0 / diag.beta_hat <= diag.m_min * (1.0 + grid) && diag.m_max <= (1.0 + grid) / diag.alpha_hat,
        format!(
            "1/beta={:.6e} m in [{:.6e}, {:.6e}] 1/alpha={:.6e} on [{}, {}]",
            1.0 / diag.beta_hat,
            diag.m_min,
            diag.m_max,
            1.0 / diag.alpha_hat,
            diag.window.0,
            diag.window.1
        ),
    );

    if diag.lambda_hat < 1.0 {
        let grid = 0.01 * slack;
        let lo = 1.0 / (1.0 + diag.lambda_hat);
        let hi = 1.0 / (1.0 - diag.lambda_hat);
        rec.push(
            "lambda sandwich 1/(1+l) <= rm <= 1/(1-l)",
            lo * (1.0 - grid) <= diag.inf_rm && diag.sup_rm <= hi * (1.0 + grid),
            format!(
                "lambda={:.6} bounds [{lo:.6}, {hi:.6}] rm in [{:.6}, {:.6}]",
                diag.lambda_hat, diag.inf_rm, diag.sup_rm
            ),
        );
    }

    if model.oscillation_phase_rate(big_t).is_none() {
        if let Some(limit) = diag.sprime_limit_bound {
            let tol = 0.03 * slack;
            let ok = relative(diag.inf_rm, limit) <= tol && relative(diag.sup_rm, limit) <= tol;
            rec.push(
                "rm vs 1/(1-s')",
                ok,
                format!("1/(1-s'(T))={limit:.6} rm in [{:.6}, {:.6}]", diag.inf_rm, diag.sup_rm),
            );
        }
    } else if let Some((lo, hi)) = model.rm_limits() {
        let tol = 0.05 * slack;
        let ok = relative(diag.inf_rm, lo) <= tol && relative(diag.sup_rm, hi) <= tol;
        rec.push(
            "liminf/limsup of rm",
            ok,
            format!(
                "inf rm={:.6} vs {lo:.6}, sup rm={:.6} vs {hi:.6}",
                diag.inf_rm, diag.sup_rm
            ),
        );
    }

    rec.push_result(
        "s*exp(-R) decreasing",
        hyp1_profile(&model, &[10.0, 100.0, 1000.0]).map(|logs| {
            let ok = logs.windows(2).all(|w| w[1] < w[0]);
            let shown: Vec<String> = logs.iter().map(|l| format!("{:.3e}", l.exp())).collect();
            (ok, format!("at T=10,100,1000: {}", shown.join(", ")))
        }),
    );
}

fn expansion(rec: &mut Recorder, level: Level) {
    let model = *rec.model;
    let slack = level.slack();

    rec.push_result(
        "theta recursion vs multi-index formula",
        (|| {
            let mut worst = 0.0f64;
            for t in [1.0, 2.0, 5.0, 10.0] {
                let seq = theta_terms(&model, t, 5)?;
                for (k, &term) in seq.terms.iter().enumerate() {
                    let via = theta_via_coefficients(&model, t, k)?;
                    let scale = term.abs().max(theta_scale(&model, t, k)?);
                    if scale > 0.0 {
                        worst = worst.max((via - term).abs() / scale);
                    }
                }
            }
            Ok((worst <= 1e-9 * slack, format!("worst relative gap {worst:.3e}")))
        })(),
    );

    let masses_ok = (0..=D_TABLE_CAP).all(|k| d_coefficients(k).is_ok_and(|t| t.mass() as f64 == factorial(k)));
    rec.push("multi-index mass equals k!", masses_ok, format!("k = 0..={D_TABLE_CAP}"));
    let partitions_ok = (0..=C_TABLE_CAP).all(|k| {
        c_terms(k).is_ok_and(|table| {
            table.terms.iter().all(|term| {
                let weight: u32 = term.alphas.iter().enumerate().map(|(i, a)| (i as u32 + 2) * a).sum();
                term.alphas.iter().sum::<u32>() == term.p && weight as usize == k
            })
        })
    });
    rec.push("partition side conditions", partitions_ok, format!("k = 0..={C_TABLE_CAP}"));

    let satisfies_hypotheses = match model.name() {
        "weibull" => param(&model, "shape").is_some_and(|k| k > 1.0),
        "linearmrl" | "fraclinear" => true,
        _ => false,
    };
    if satisfies_hypotheses {
        rec.push_result(
            "term ratios shrink from t=1e2 to t=1e3",
            (|| {
                let near = theta_terms(&model, 100.0, 4)?;
                let far = theta_terms(&model, 1000.0, 4)?;
                let mut ok = true;
                let mut ratios = Vec::new();
                for k in 0..=3 {
                    if far.terms[k + 1] == 0.0 || near.terms[k] == 0.0 {
                        continue;
                    }
                    let r_near = (near.terms[k + 1] / near.terms[k]).abs();
                    let r_far = (far.terms[k + 1] / far.terms[k]).abs();
                    ok &= r_far <= r_near * (1.0 + 1e-9);
                    ratios.push(format!("{r_near:.3e}->{r_far:.3e}"));
                }
                Ok((ok, ratios.join(" ")))
            })(),
        );
    }

    if model.name() == "fraclinear" {
        rec.push_result(
            "geometric truncation error",
            (|| {
                let d = param(&model, "d").unwrap_or(0.0);
                let t = 3.0;
                let exact = model.mrl_closed_form(t)?;
                let (_, seq) = mrl_expansion(&model, t, 8)?;
                let s = seq.terms[0];
                let mut worst = 0.0f64;
                for (n, partial) in seq.partial_sums.iter().enumerate() {
                    let want = s * d.powi(n as i32 + 1) / (1.0 - d);
                    let got = exact - partial;
                    if want != 0.0 {
                        worst = worst.max((got - want).abs() / want.abs());
                    }
                }
                Ok((worst <= 1e-9 * slack, format!("worst relative deviation {worst:.3e} for n <= 8")))
            })(),
        );
    }

    if model.name() == "weibull" && param(&model, "shape").is_some_and(|k| k > 1.0) {
        rec.push_result(
            "expansion converges to oracle",
            (|| {
                let errors = |t: f64| -> Result<Vec<f64>> {
                    let q = mrl_quadrature(&model, t, 1e-12)?;
                    let (_, seq) = mrl_expansion(&model, t, 3)?;
                    Ok(seq.partial_sums.iter().map(|p| (p - q.value).abs()).collect())
                };
                let e20 = errors(20.0)?;
                let e40 = errors(40.0)?;
                let ok = e20.windows(2).all(|w| w[1] < w[0]) && e40[3] < e20[3];
                let shown: Vec<String> = e20.iter().map(|e| format!("{e:.2e}")).collect();
                Ok((ok, format!("errors at t=20: {}; n=3 at t=40: {:.2e}", shown.join(" "), e40[3])))
            })(),
        );
    }
}

fn de1(rec: &mut Recorder, level: Level) {
    let model = *rec.model;
    for t in [2.0, 10.0] {
        let h = 1e-4 * f64::max(1.0, t);
        let bound = 1e-4 * level.slack();
        rec.push_result(
            &format!("m' = rm - 1 at t={t}"),
            de1_residual(&model, t, h, 1e-8).map(|res| (res <= bound, format!("residual {res:.3e} (bound {bound:.0e})"))),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse() {
        assert_eq!("limits".parse::<Suite>().unwrap(), Suite::Limits);
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("everything".parse::<Suite>().is_err());
        assert!("slow".parse::<Level>().is_err());
    }

    #[test]
    fn expansion_and_de1_pass_on_fraclinear() {
        let m: HazardModel = "fraclinear:c=2,d=0.5".parse().unwrap();
        let checks = run(&[m], Suite::Expansion, Level::Fast);
        assert!(checks.iter().any(|c| c.name == "geometric truncation error"));
        let checks: Vec<_> = checks.into_iter().chain(run(&[m], Suite::De1, Level::Fast)).collect();
        for c in &checks {
            assert!(c.passed, "{c}");
        }
    }
}
