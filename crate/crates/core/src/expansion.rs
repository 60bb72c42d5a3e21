//! Asymptotic expansion of the mean residual life.
//!
//! With `s = 1/r` and `Θ = s·D`, the residual life expands as
//! `m ~ s + Θ(s) + Θ²(s) + ...`. The terms are computed three ways:
//!
//! * [`theta_terms`] iterates `g_{k+1} = s · D g_k` directly on jets;
//! * [`theta_via_coefficients`] sums the integer multi-index table produced by
//!   expanding `Π_{p=1..k} (x_1 + ... + x_p)`;
//! * [`evaluate_c`] uses the partition form `c_k · r^(-k-1)` in terms of the
//!   derivatives of `r`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use num_rational::Ratio;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::jets::factorial;
use crate::models::HazardModel;

/// Default largest order for multi-index tables (8! = 40320 monomials).
pub const D_TABLE_CAP: usize = 8;
/// Default largest order for partition tables.
pub const C_TABLE_CAP: usize = 12;
/// Orders up to this bound are memoized process-wide.
const CACHE_LIMIT: usize = 16;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSequence {
    pub center: f64,
    pub order: usize,
    /// Θ⁰(s)(t), ..., Θⁿ(s)(t).
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl ThetaSequence {
    fn from_terms(center: f64, terms: Vec<f64>) -> Self {
        let partial_sums = terms
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        Self {
            center,
            order: terms.len() - 1,
            terms,
            partial_sums,
        }
    }

    pub fn value(&self) -> f64 {
        *self.partial_sums.last().expect("at least one term")
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Argument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Θ⁰(s)(t), ..., Θⁿ(s)(t) by iterating `s·D` on the jet of `s`.
pub fn theta_terms(model: &HazardModel, t: f64, n: usize) -> Result<ThetaSequence> {
    check_time(t)?;
    let s = model.s_jet(t, n)?;
    let mut terms = Vec::with_capacity(n + 1);
    let mut g = s.clone();
    terms.push(g.value());
    for _ in 0..n {
        let dg = g.derivative()?;
        g = s.truncate(dg.order()).mul_jet(&dg)?;
        terms.push(g.value());
    }
    debug_assert_eq!(g.order(), 0);
    Ok(ThetaSequence::from_terms(t, terms))
}

/// Partial sum `Σ_{k=0..n} Θᵏ(s)(t)` together with its terms.
pub fn mrl_expansion(model: &HazardModel, t: f64, n: usize) -> Result<(f64, ThetaSequence)> {
    let seq = theta_terms(model, t, n)?;
    Ok((seq.value(), seq))
}

/// Integer coefficients `d(j_1, ..., j_k)` of `Π_{p=1..k} (x_1 + ... + x_p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaTable {
    pub k: usize,
    pub entries: BTreeMap<Vec<u32>, u64>,
}

impl ThetaTable {
    fn build(k: usize) -> Self {
        let mut poly: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        poly.insert(vec![0; k], 1);
        for p in 1..=k {
            let mut next = BTreeMap::new();
            for (key, coeff) in &poly {
                for j in 0..p {
                    let mut key = key.clone();
                    key[j] += 1;
                    *next.entry(key).or_insert(0) += coeff;
                }
            }
            poly = next;
        }
        Self { k, entries: poly }
    }

    /// Sum of all coefficients; equals k!.
    pub fn mass(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Collects the table into monomials of `s` and its derivatives, including
    /// the leading factor `s`. Each key lists the power of `s^(i)` for
    /// `i = 0..=k`. Sorted by power of `s`, then highest derivative present.
    pub fn monomials(&self) -> Vec<(Vec<u32>, u64)> {
        let mut agg: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (key, coeff) in &self.entries {
            let mut powers = vec![0u32; self.k + 1];
            powers[0] = 1;
            for &j in key {
                powers[j as usize] += 1;
            }
            *agg.entry(powers).or_insert(0) += coeff;
        }
        let mut out: Vec<_> = agg.into_iter().collect();
        out.sort_by(|(a, _), (b, _)| {
            let top = |p: &Vec<u32>| p.iter().rposition(|&e| e > 0).unwrap_or(0);
            (a[0], top(a))
                .cmp(&(b[0], top(b)))
                .then_with(|| b.cmp(a))
        });
        out
    }

    /// Human listing such as `1·s(s′)³ + 4·s²s′s″ + 1·s³s‴`.
    pub fn render(&self) -> String {
        self.monomials()
            .iter()
            .map(|(powers, coeff)| {
                let mut term = format!("{coeff}·");
                for (i, &e) in powers.iter().enumerate() {
                    push_factor(&mut term, 's', i, e);
                }
                term
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// One term of the partition formula for `c_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTerm {
    /// Number of parts, `Σ α_j`.
    pub p: u32,
    /// `alphas[j-1] = α_j` for `j = 1..k-1`.
    pub alphas: Vec<u32>,
    /// `k! (-1)^p Π_j 1/α_j! · (1/(j+1)!)^α_j`.
    pub coefficient: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CTable {
    pub k: usize,
    pub terms: Vec<PartitionTerm>,
}

fn rational_factorial(n: u32) -> Rational {
    Rational::from_integer((1..=n as i128).product())
}

impl CTable {
    fn build(k: usize) -> Self {
        let mut terms = Vec::new();
        let mut alphas = vec![0u32; k.saturating_sub(1)];
        enumerate_partitions(k, 1, k as u32, &mut alphas, &mut terms);
        terms.sort_by(|a, b| b.p.cmp(&a.p).then_with(|| b.alphas.cmp(&a.alphas)));
        Self { k, terms }
    }

    /// Listing such as `3(r′)² − r‴`. An empty table renders as `0`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, term) in self.terms.iter().enumerate() {
            let negative = term.coefficient.is_negative();
            match (i, negative) {
                (0, true) => out.push('−'),
                (0, false) => {}
                (_, true) => out.push_str(" − "),
                (_, false) => out.push_str(" + "),
            }
            let mag = term.coefficient.abs();
            let has_factors = term.alphas.iter().any(|&a| a > 0);
            if !mag.is_one() || !has_factors {
                let _ = write!(out, "{mag}");
            }
            for (idx, &a) in term.alphas.iter().enumerate() {
                push_factor(&mut out, 'r', idx + 1, a);
            }
        }
        out
    }
}

// Assigns α_j for j >= `j`, with `remaining` = k - Σ (i+1) α_i still to place.
fn enumerate_partitions(k: usize, j: usize, remaining: u32, alphas: &mut Vec<u32>, out: &mut Vec<PartitionTerm>) {
    if remaining == 0 {
        let p: u32 = alphas.iter().sum();
        let mut coeff = rational_factorial(k as u32);
        if p % 2 == 1 {
            coeff = -coeff;
        }
        for (idx, &a) in alphas.iter().enumerate() {
            let block = rational_factorial(idx as u32 + 2);
            coeff /= rational_factorial(a) * num_traits::pow(block, a as usize);
        }
        out.push(PartitionTerm {
            p,
            alphas: alphas.clone(),
            coefficient: coeff,
        });
        return;
    }
    if j + 1 > remaining as usize || j >= k {
        return;
    }
    let size = (j + 1) as u32;
    for a in 0..=remaining / size {
        alphas[j - 1] = a;
        enumerate_partitions(k, j + 1, remaining - a * size, alphas, out);
    }
    alphas[j - 1] = 0;
}

fn prime_marks(order: usize) -> String {
    match order {
        0 => String::new(),
        1 => "′".into(),
        2 => "″".into(),
        3 => "‴".into(),
        4 => "⁗".into(),
        n => format!("⁽{}⁾", superscript(n as u32)),
    }
}

fn superscript(n: u32) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string().chars().map(|c| SUP[c as usize - '0' as usize]).collect()
}

fn push_factor(out: &mut String, symbol: char, order: usize, power: u32) {
    if power == 0 {
        return;
    }
    let base = format!("{symbol}{}", prime_marks(order));
    if power == 1 {
        out.push_str(&base);
    } else if order == 0 {
        let _ = write!(out, "{base}{}", superscript(power));
    } else {
        let _ = write!(out, "({base}){}", superscript(power));
    }
}

static THETA_CACHE: [OnceLock<Arc<ThetaTable>>; CACHE_LIMIT + 1] = [const { OnceLock::new() }; CACHE_LIMIT + 1];
static C_CACHE: [OnceLock<Arc<CTable>>; CACHE_LIMIT + 1] = [const { OnceLock::new() }; CACHE_LIMIT + 1];

fn cached<T>(cache: &'static [OnceLock<Arc<T>>], k: usize, build: impl FnOnce() -> T) -> Arc<T> {
    match cache.get(k) {
        Some(slot) => slot.get_or_init(|| Arc::new(build())).clone(),
        None => Arc::new(build()),
    }
}

/// Multi-index table for Θᵏ with the default cap.
pub fn d_coefficients(k: usize) -> Result<Arc<ThetaTable>> {
    d_coefficients_capped(k, D_TABLE_CAP)
}

pub fn d_coefficients_capped(k: usize, cap: usize) -> Result<Arc<ThetaTable>> {
    if k > cap {
        return Err(Error::Resource(format!(
            "multi-index table of order {k} exceeds cap {cap} (size grows like k!)"
        )));
    }
    Ok(cached(&THETA_CACHE, k, || ThetaTable::build(k)))
}

/// Partition table for c_k with the default cap.
pub fn c_terms(k: usize) -> Result<Arc<CTable>> {
    c_terms_capped(k, C_TABLE_CAP)
}

pub fn c_terms_capped(k: usize, cap: usize) -> Result<Arc<CTable>> {
    if k > cap {
        return Err(Error::Resource(format!("partition table of order {k} exceeds cap {cap}")));
    }
    Ok(cached(&C_CACHE, k, || CTable::build(k)))
}

/// Θᵏ(s)(t) from the multi-index table.
pub fn theta_via_coefficients(model: &HazardModel, t: f64, k: usize) -> Result<f64> {
    check_time(t)?;
    let table = d_coefficients(k)?;
    let s = model.s_jet(t, k)?;
    let derivs: Vec<f64> = (0..=k).map(|j| s.coeffs()[j] * factorial(j)).collect();
    let sum: f64 = table
        .entries
        .iter()
        .map(|(key, &d)| d as f64 * key.iter().map(|&j| derivs[j as usize]).product::<f64>())
        .sum();
    Ok(derivs[0] * sum)
}

/// Σ |d · Π s^(j)| · |s|: the size of the monomials summed by
/// [`theta_via_coefficients`]. Gaps between evaluation methods are measured
/// against this when Θᵏ itself cancels to zero.
pub fn theta_scale(model: &HazardModel, t: f64, k: usize) -> Result<f64> {
    check_time(t)?;
    let table = d_coefficients(k)?;
    let s = model.s_jet(t, k)?;
    let derivs: Vec<f64> = (0..=k).map(|j| (s.coeffs()[j] * factorial(j)).abs()).collect();
    let sum: f64 = table
        .entries
        .iter()
        .map(|(key, &d)| d as f64 * key.iter().map(|&j| derivs[j as usize]).product::<f64>())
        .sum();
    Ok(derivs[0] * sum)
}

/// c_k(t) as a polynomial in r', ..., r^(k-1).
pub fn c_value(model: &HazardModel, t: f64, k: usize) -> Result<f64> {
    check_time(t)?;
    let table = c_terms(k)?;
    let r = model.hazard_jet(t, k.saturating_sub(1))?;
    let derivs: Vec<f64> = (0..r.coeffs().len()).map(|j| r.coeffs()[j] * factorial(j)).collect();
    Ok(table
        .terms
        .iter()
        .map(|term| {
            let coeff = *term.coefficient.numer() as f64 / *term.coefficient.denom() as f64;
            term.alphas
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(idx, &a)| derivs[idx + 1].powi(a as i32))
                .product::<f64>()
                * coeff
        })
        .sum::<f64>()
        + 0.0)
}

/// `c_k(t) · r(t)^(-k-1)`.
pub fn evaluate_c(model: &HazardModel, t: f64, k: usize) -> Result<f64> {
    let c = c_value(model, t, k)?;
    let r = model.hazard(t)?;
    if r == 0.0 {
        return Err(Error::Singularity(format!("hazard vanishes at t = {t}")));
    }
    Ok(c * r.powi(-(k as i32) - 1))
}

/// Truncation `Σ_{k=0..n-1} c_k r^(-k-1)` of the partition-form series.
pub fn c_series(model: &HazardModel, t: f64, n: usize) -> Result<f64> {
    (0..n).map(|k| evaluate_c(model, t, k)).sum()
}

/// Exact value of a partition coefficient as an integer, when it is one.
pub fn integral_coefficient(term: &PartitionTerm) -> Option<i128> {
    term.coefficient.is_integer().then(|| term.coefficient.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(s: &str) -> HazardModel {
        s.parse().unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn theta_terms_fraclinear_geometric() {
        let seq = theta_terms(&model("fraclinear:c=2,d=0.5"), 0.0, 3).unwrap();
        for (got, want) in seq.terms.iter().zip([2.0, 1.0, 0.5, 0.25]) {
            assert!(close(*got, want, 1e-14), "{got} vs {want}");
        }
        assert_eq!(seq.order, 3);
        for k in 1..seq.terms.len() {
            assert_eq!(seq.partial_sums[k] - seq.partial_sums[k - 1], seq.terms[k]);
        }
    }

    #[test]
    fn theta_terms_exponential_terminates() {
        let seq = theta_terms(&model("exponential:rate=2"), 7.0, 4).unwrap();
        assert_eq!(seq.terms, vec![0.5, 0.0, 0.0, 0.0, 0.0]);
        let (v, _) = mrl_expansion(&model("exponential:rate=2"), 1.0, 0).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn theta_zero_is_s() {
        for m in crate::models::catalog() {
            let seq = theta_terms(&m, 2.5, 0).unwrap();
            assert_eq!(seq.terms.len(), 1);
            assert!(close(seq.terms[0], 1.0 / m.hazard(2.5).unwrap(), 1e-15));
        }
    }

    #[test]
    fn d_tables_small_orders() {
        let t2 = d_coefficients(2).unwrap();
        let want: BTreeMap<Vec<u32>, u64> = [(vec![2, 0], 1), (vec![1, 1], 1)].into_iter().collect();
        assert_eq!(t2.entries, want);
        assert_eq!(d_coefficients(0).unwrap().entries.len(), 1);
        assert_eq!(d_coefficients(3).unwrap().render(), "1·s(s′)³ + 4·s²s′s″ + 1·s³s‴");
        assert_eq!(
            d_coefficients(4).unwrap().render(),
            "1·s(s′)⁴ + 11·s²(s′)²s″ + 4·s³(s″)² + 7·s³s′s‴ + 1·s⁴s⁗"
        );
    }

    #[test]
    fn d_table_mass_and_degree() {
        for k in 0..=D_TABLE_CAP {
            let table = d_coefficients(k).unwrap();
            assert_eq!(table.mass() as f64, factorial(k));
            assert!(table.entries.keys().all(|key| key.iter().sum::<u32>() as usize == k));
        }
        assert!(matches!(d_coefficients(D_TABLE_CAP + 1), Err(Error::Resource(_))));
        assert!(d_coefficients_capped(10, 10).is_ok());
    }

    #[test]
    fn c_tables_small_orders() {
        let rendered: Vec<String> = (0..=6).map(|k| c_terms(k).unwrap().render()).collect();
        assert_eq!(rendered[0], "1");
        assert_eq!(rendered[1], "0");
        assert_eq!(rendered[2], "−r′");
        assert_eq!(rendered[3], "−r″");
        assert_eq!(rendered[4], "3(r′)² − r‴");
        assert_eq!(rendered[5], "10r′r″ − r⁗");
        assert_eq!(rendered[6], "−15(r′)³ + 15r′r‴ + 10(r″)² − r⁽⁵⁾");
        assert!(matches!(c_terms(C_TABLE_CAP + 1), Err(Error::Resource(_))));
    }

    #[test]
    fn partition_side_conditions() {
        for k in 0..=C_TABLE_CAP {
            for term in &c_terms(k).unwrap().terms {
                assert_eq!(term.alphas.iter().sum::<u32>(), term.p);
                let weight: u32 = term.alphas.iter().enumerate().map(|(i, a)| (i as u32 + 2) * a).sum();
                assert_eq!(weight as usize, k);
                assert!(term.p as usize <= k / 2);
                // k!/(Π α_j! ((j+1)!)^α_j) counts set partitions, hence an integer
                assert!(integral_coefficient(term).is_some());
            }
        }
    }

    #[test]
    fn theta_via_coefficients_examples() {
        let f = model("fraclinear:c=2,d=0.5");
        assert!(close(theta_via_coefficients(&f, 0.0, 2).unwrap(), 0.5, 1e-14));
        for m in crate::models::catalog() {
            let s = m.s_jet(3.0, 1).unwrap();
            let want = s.value() * s.derivative_value(1).unwrap();
            assert!(close(theta_via_coefficients(&m, 3.0, 1).unwrap(), want, 1e-14));
        }
        let w = model("weibull:shape=2,scale=1");
        let seq = theta_terms(&w, 3.0, 4).unwrap();
        for k in 0..=4 {
            let v = theta_via_coefficients(&w, 3.0, k).unwrap();
            assert!((v - seq.terms[k]).abs() <= 1e-10 * seq.terms[k].abs(), "k={k}");
        }
    }

    #[test]
    fn evaluate_c_low_orders() {
        let m = model("weibull:shape=3.5,scale=2");
        let t = 4.0;
        let r = m.hazard_jet(t, 4).unwrap();
        let d = |j| r.derivative_value(j).unwrap();
        assert_eq!(c_value(&m, t, 0).unwrap(), 1.0);
        assert_eq!(c_value(&m, t, 1).unwrap(), 0.0);
        assert!(close(c_value(&m, t, 2).unwrap(), -d(1), 1e-14));
        assert!(close(c_value(&m, t, 3).unwrap(), -d(2), 1e-14));
        assert!(close(c_value(&m, t, 4).unwrap(), 3.0 * d(1) * d(1) - d(3), 1e-13));
        assert!(close(c_value(&m, t, 5).unwrap(), 10.0 * d(1) * d(2) - d(4), 1e-13));
        assert!(close(evaluate_c(&m, t, 2).unwrap(), -d(1) / d(0).powi(3), 1e-14));
    }

    #[test]
    fn regrouped_three_terms_match_c_form() {
        // Θ⁰+Θ¹+Θ² = 1/r − r'/r³ − r''/r⁴ + 3(r')²/r⁵ identically.
        let m = model("weibull:shape=2,scale=1");
        for t in [2.0, 5.0, 20.0] {
            let theta = theta_terms(&m, t, 2).unwrap().value();
            let r = m.hazard_jet(t, 2).unwrap();
            let (r0, r1) = (r.value(), r.derivative_value(1).unwrap());
            let grouped = c_series(&m, t, 4).unwrap() + 3.0 * r1 * r1 / r0.powi(5);
            assert!(close(theta, grouped, 1e-13), "t={t}");
        }
    }
}
