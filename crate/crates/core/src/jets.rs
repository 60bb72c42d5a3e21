//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] carries the Taylor-normalized coefficients `a_k = f^(k)(t0) / k!`
//! of a scalar function around a center `t0`. Binary operations truncate to
//! the shorter operand, so a chain of derivatives naturally shrinks the order
//! budget by one per step.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    /// Builds a jet from raw Taylor coefficients. At least one coefficient is
    /// required and all must be finite.
    pub fn from_coeffs(center: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Argument("a jet needs at least one coefficient".into()));
        }
        if !center.is_finite() {
            return Err(Error::Argument(format!("jet center {center} is not finite")));
        }
        Self::checked(center, coeffs)
    }

    fn checked(center: f64, coeffs: Vec<f64>) -> Result<Self> {
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!(
                "jet coefficient {k} at t = {center} is not finite"
            )));
        }
        Ok(Self { center, coeffs })
    }

    /// Jet of the identity function `x ↦ x` at `t0`.
    pub fn var(t0: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = t0;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { center: t0, coeffs }
    }

    /// Like [`Jet::var`] but accepts a signed order, as received from the CLI or C callers.
    pub fn var_checked(t0: f64, order: i64) -> Result<Self> {
        if order < 0 {
            return Err(Error::Argument(format!("jet order must be >= 0, got {order}")));
        }
        if !t0.is_finite() {
            return Err(Error::Argument(format!("jet center {t0} is not finite")));
        }
        Ok(Self::var(t0, order as usize))
    }

    pub fn constant(t0: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { center: t0, coeffs }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// f(t0).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// f^(k)(t0) = k! · a_k.
    pub fn derivative_value(&self, k: usize) -> Option<f64> {
        let a = *self.coeffs.get(k)?;
        Some(a * factorial(k))
    }

    /// Drops every coefficient above `order`. Requests above the current order are a no-op.
    pub fn truncate(&self, order: usize) -> Jet {
        let n = (order + 1).min(self.coeffs.len());
        Jet {
            center: self.center,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    fn common(&self, other: &Jet) -> Result<usize> {
        if self.center != other.center {
            return Err(Error::Argument(format!(
                "jet centers differ: {} vs {}",
                self.center, other.center
            )));
        }
        Ok(self.order().min(other.order()))
    }

    pub fn add_jet(&self, other: &Jet) -> Result<Jet> {
        let n = self.common(other)?;
        let coeffs = (0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect();
        Self::checked(self.center, coeffs)
    }

    pub fn sub_jet(&self, other: &Jet) -> Result<Jet> {
        let n = self.common(other)?;
        let coeffs = (0..=n).map(|k| self.coeffs[k] - other.coeffs[k]).collect();
        Self::checked(self.center, coeffs)
    }

    /// Truncated Cauchy product.
    pub fn mul_jet(&self, other: &Jet) -> Result<Jet> {
        let n = self.common(other)?;
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum())
            .collect();
        Self::checked(self.center, coeffs)
    }

    pub fn scale(&self, factor: f64) -> Result<Jet> {
        Self::checked(self.center, self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Adds a constant to the value coefficient.
    pub fn offset(&self, shift: f64) -> Result<Jet> {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += shift;
        Self::checked(self.center, coeffs)
    }

    /// Jet of `1 / f`.
    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 {
            return Err(Error::Singularity(format!(
                "reciprocal of a jet vanishing at t = {}",
                self.center
            )));
        }
        let inv = 1.0 / a0;
        let mut out: Vec<f64> = Vec::with_capacity(self.coeffs.len());
        out.push(inv);
        for k in 1..self.coeffs.len() {
            let acc: f64 = (1..=k).map(|j| self.coeffs[j] * out[k - j]).sum();
            out.push(-inv * acc);
        }
        Self::checked(self.center, out)
    }

    /// Jets of `sin f` and `cos f`, propagated together through
    /// `(sin g)' = g' cos g` and `(cos g)' = -g' sin g`.
    pub fn sin_cos(&self) -> Result<(Jet, Jet)> {
        let n = self.coeffs.len();
        let mut s = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        s.push(self.coeffs[0].sin());
        c.push(self.coeffs[0].cos());
        for k in 1..n {
            let kf = k as f64;
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let w = j as f64 * self.coeffs[j];
                ds += w * c[k - j];
                dc += w * s[k - j];
            }
            s.push(ds / kf);
            c.push(-dc / kf);
        }
        Ok((
            Self::checked(self.center, s)?,
            Self::checked(self.center, c)?,
        ))
    }

    pub fn exp(&self) -> Result<Jet> {
        let n = self.coeffs.len();
        let mut out = Vec::with_capacity(n);
        out.push(self.coeffs[0].exp());
        for k in 1..n {
            let acc: f64 = (1..=k)
                .map(|j| j as f64 * self.coeffs[j] * out[k - j])
                .sum();
            out.push(acc / k as f64);
        }
        Self::checked(self.center, out)
    }

    /// Jet of `f^p`.
    ///
    /// Integer exponents work for any sign of `f(t0)` (negative ones need
    /// `f(t0) != 0`); fractional exponents need `f(t0) > 0`.
    pub fn pow(&self, p: f64) -> Result<Jet> {
        if !p.is_finite() {
            return Err(Error::Domain(format!("exponent {p} is not finite")));
        }
        let a0 = self.coeffs[0];
        let integral = p.fract() == 0.0;
        if integral && p >= 0.0 {
            return self.powi(p as u64);
        }
        if !integral && a0 <= 0.0 {
            return Err(Error::Domain(format!(
                "fractional power {p} of non-positive value {a0} at t = {}",
                self.center
            )));
        }
        if a0 == 0.0 {
            return Err(Error::Singularity(format!(
                "negative power {p} of a jet vanishing at t = {}",
                self.center
            )));
        }
        // a·b' = p·b·a' turned into a coefficient recurrence.
        let n = self.coeffs.len();
        let mut out = Vec::with_capacity(n);
        out.push(if integral { a0.powi(p as i32) } else { a0.powf(p) });
        for k in 1..n {
            let acc: f64 = (1..=k)
                .map(|j| (p * j as f64 - (k - j) as f64) * self.coeffs[j] * out[k - j])
                .sum();
            out.push(acc / (k as f64 * a0));
        }
        Self::checked(self.center, out)
    }

    fn powi(&self, mut e: u64) -> Result<Jet> {
        let mut result = Jet::constant(self.center, 1.0, self.order());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base)?;
            }
        }
        Ok(result)
    }

    /// Jet of `f'`, one order shorter.
    pub fn derivative(&self) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::Argument(
                "cannot differentiate an order-0 jet: derivative information exhausted".into(),
            ));
        }
        let coeffs = (0..self.order())
            .map(|k| (k + 1) as f64 * self.coeffs[k + 1])
            .collect();
        Self::checked(self.center, coeffs)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(c: &[f64]) -> Jet {
        Jet::from_coeffs(0.0, c.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
    }

    #[test]
    fn var_examples() {
        assert_eq!(Jet::var(2.0, 3).coeffs(), &[2.0, 1.0, 0.0, 0.0]);
        assert_eq!(Jet::var(0.0, 0).coeffs(), &[0.0]);
        assert_eq!(Jet::var(5.0, 1).coeffs(), &[5.0, 1.0]);
        assert!(matches!(Jet::var_checked(1.0, -1), Err(Error::Argument(_))));
    }

    #[test]
    fn add_and_mul_examples() {
        assert_eq!(jet(&[1., 1.]).mul_jet(&jet(&[1., 1.])).unwrap().coeffs(), &[1., 2.]);
        assert_eq!(
            jet(&[1., 1., 0.]).mul_jet(&jet(&[1., 1., 0.])).unwrap().coeffs(),
            &[1., 2., 1.]
        );
        assert_eq!(
            jet(&[2., 0., 0.]).add_jet(&jet(&[0., 1., 0.])).unwrap().coeffs(),
            &[2., 1., 0.]
        );
    }

    #[test]
    fn mixed_orders_truncate_to_shorter() {
        let p = jet(&[1., 1., 1.]).mul_jet(&jet(&[1., 1.])).unwrap();
        assert_eq!(p.order(), 1);
    }

    #[test]
    fn mismatched_centers_rejected() {
        let a = Jet::var(1.0, 2);
        let b = Jet::var(2.0, 2);
        assert!(matches!(a.add_jet(&b), Err(Error::Argument(_))));
        assert!(matches!(a.mul_jet(&b), Err(Error::Argument(_))));
    }

    #[test]
    fn recip_examples() {
        // 1/(2+3x) = 1/2 - 3/4 x + 9/8 x^2 - ...
        assert_eq!(jet(&[2., 3., 0.]).recip().unwrap().coeffs(), &[0.5, -0.75, 1.125]);
        assert_eq!(jet(&[1., 0., 0.]).recip().unwrap().coeffs(), &[1., 0., 0.]);
        let a = jet(&[3.0, -1.5, 0.25, 2.0, -0.75]);
        assert!(close(a.recip().unwrap().recip().unwrap().coeffs(), a.coeffs(), 1e-12));
        assert!(matches!(jet(&[0., 1.]).recip(), Err(Error::Singularity(_))));
    }

    #[test]
    fn sin_cos_maclaurin() {
        let (s, c) = Jet::var(0.0, 3).sin_cos().unwrap();
        assert!(close(s.coeffs(), &[0., 1., 0., -1. / 6.], 1e-15));
        assert!(close(c.coeffs(), &[1., 0., -0.5, 0.], 1e-15));
        assert_eq!(jet(&[0., 0., 0.]).exp().unwrap().coeffs(), &[1., 0., 0.]);
    }

    #[test]
    fn pythagorean_identity() {
        let g = Jet::var(1.3, 6).mul_jet(&Jet::var(1.3, 6)).unwrap();
        let (s, c) = g.sin_cos().unwrap();
        let one = s.mul_jet(&s).unwrap().add_jet(&c.mul_jet(&c).unwrap()).unwrap();
        assert!(close(one.coeffs(), &[1., 0., 0., 0., 0., 0., 0.], 1e-13));
    }

    #[test]
    fn pow_cases() {
        // (1+x)^2 via integer path, (1+x)^0.5 Maclaurin, (2+x)^-1 = recip.
        assert_eq!(jet(&[1., 1., 0.]).pow(2.0).unwrap().coeffs(), &[1., 2., 1.]);
        assert!(close(
            jet(&[1., 1., 0., 0.]).pow(0.5).unwrap().coeffs(),
            &[1., 0.5, -0.125, 0.0625],
            1e-15
        ));
        assert!(close(
            jet(&[2., 1., 0.]).pow(-1.0).unwrap().coeffs(),
            jet(&[2., 1., 0.]).recip().unwrap().coeffs(),
            1e-15
        ));
        assert!(matches!(jet(&[-1., 1.]).pow(0.5), Err(Error::Domain(_))));
        assert!(matches!(jet(&[0., 1.]).pow(-2.0), Err(Error::Singularity(_))));
        // integer powers of negative values are fine
        assert_eq!(jet(&[-1., 1.]).pow(3.0).unwrap().coeffs(), &[-1., 3.]);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(jet(&[5., 2., 3.]).derivative().unwrap().coeffs(), &[2., 6.]);
        assert_eq!(Jet::var(4.0, 1).derivative().unwrap().coeffs(), &[1.0]);
        let e = jet(&[1., 1., 0.5, 1. / 6.]);
        assert!(close(e.derivative().unwrap().coeffs(), &[1., 1., 0.5], 1e-15));
        assert!(matches!(jet(&[1.]).derivative(), Err(Error::Argument(_))));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            Jet::from_coeffs(0.0, vec![1.0, f64::NAN]),
            Err(Error::Domain(_))
        ));
        assert!(Jet::from_coeffs(0.0, vec![]).is_err());
    }
}
