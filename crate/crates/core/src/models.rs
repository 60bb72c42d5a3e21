//! Catalog of hazard-specified lifetime models.
//!
//! Every model is described by its failure rate `r(t)`. Where the structure
//! allows it a model also knows its cumulative hazard `R`, its mean residual
//! life `m`, and a certified bound on the residual life far in the tail,
//! which the quadrature oracle uses to cut the improper integral.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::jets::Jet;

/// Lower bound on the hazard: `r(x) >= rate` for all `x >= from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HazardFloor {
    pub from: f64,
    pub rate: f64,
}

/// What a model knows about `m(u)`, the residual life beyond a cut point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualTail {
    /// Follows from a closed-form cumulative hazard.
    Exact(f64),
    /// A certified upper bound.
    Bound(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capabilities {
    pub closed_form_cumulative_hazard: bool,
    pub closed_form_mrl: bool,
    pub analytic_lambda: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    FracLinear { c: f64, d: f64 },
    LinearMrl { a: f64, b: f64 },
    Oscillating { a: f64, b: f64, c: f64, d: f64 },
}

/// A validated hazard model. Cheap to copy, immutable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HazardModel {
    family: Family,
}

pub const MODEL_NAMES: [&str; 5] = ["exponential", "weibull", "fraclinear", "linearmrl", "oscillating"];

/// Model specs used whenever "every catalog model" is requested.
pub const CATALOG: [&str; 6] = [
    "exponential:rate=0.5",
    "weibull:shape=2,scale=1",
    "weibull:shape=0.5,scale=1",
    "fraclinear:c=2,d=0.5",
    "linearmrl:a=1,b=0.5",
    "oscillating:a=2,b=1,c=4,d=3",
];

pub fn catalog() -> Vec<HazardModel> {
    CATALOG
        .iter()
        .map(|s| s.parse().expect("catalog entries are valid"))
        .collect()
}

fn param_names(name: &str) -> Option<&'static [&'static str]> {
    Some(match name {
        "exponential" => &["rate"],
        "weibull" => &["shape", "scale"],
        "fraclinear" => &["c", "d"],
        "linearmrl" => &["a", "b"],
        "oscillating" => &["a", "b", "c", "d"],
        _ => return None,
    })
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parse(format!("requires {what}")))
    }
}

impl HazardModel {
    /// Parses `name:k1=v1,k2=v2,...` and checks the parameter constraints.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected '<name>:<key>=<value>,...', got '{spec}'")))?;
        let keys = param_names(name).ok_or_else(|| {
            Error::Parse(format!(
                "unknown model '{name}' (expected one of {})",
                MODEL_NAMES.join(", ")
            ))
        })?;
        let mut values: Vec<Option<f64>> = vec![None; keys.len()];
        for pair in rest.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed parameter '{pair}' in '{spec}'")))?;
            let idx = keys
                .iter()
                .position(|key| *key == k)
                .ok_or_else(|| Error::Parse(format!("unknown parameter '{k}' for model '{name}'")))?;
            if values[idx].is_some() {
                return Err(Error::Parse(format!("parameter '{k}' given twice")));
            }
            let x: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("parameter '{k}': '{v}' is not a number")))?;
            if !x.is_finite() {
                return Err(Error::Parse(format!("parameter '{k}' must be finite")));
            }
            values[idx] = Some(x);
        }
        let mut p = Vec::with_capacity(keys.len());
        for (key, v) in keys.iter().zip(&values) {
            p.push(v.ok_or_else(|| Error::Parse(format!("missing parameter '{key}' for model '{name}'")))?);
        }
        let family = match name {
            "exponential" => {
                require(p[0] > 0.0, "rate>0")?;
                Family::Exponential { rate: p[0] }
            }
            "weibull" => {
                require(p[0] > 0.0, "shape>0")?;
                require(p[1] > 0.0, "scale>0")?;
                Family::Weibull { shape: p[0], scale: p[1] }
            }
            "fraclinear" => {
                require(p[0] > 0.0, "c>0")?;
                require(p[1] >= 0.0 && p[1] < 1.0, "0<=d<1")?;
                Family::FracLinear { c: p[0], d: p[1] }
            }
            "linearmrl" => {
                require(p[0] > 0.0, "a>0")?;
                require(p[1] >= 0.0, "b>=0")?;
                Family::LinearMrl { a: p[0], b: p[1] }
            }
            "oscillating" => {
                let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
                require(b > 0.0, "b>0")?;
                require(a > b, "a>b")?;
                require(d > 2.0 * b, "d>2b")?;
                require(c > 0.0 && c * c > (a + b) * d, "c^2>(a+b)d")?;
                Family::Oscillating { a, b, c, d }
            }
            _ => unreachable!(),
        };
        let model = Self { family };
        model.validate()?;
        Ok(model)
    }

    /// Grid scan of the positivity and floor invariants.
    fn validate(&self) -> Result<()> {
        let start = self.min_time().max(1e-3);
        let n = 400;
        let ratio = (1e3 / start).powf(1.0 / (n - 1) as f64);
        let floor = self.hazard_floor();
        for i in 0..n {
            let t = if i == 0 && self.min_time() == 0.0 { 0.0 } else { start * ratio.powi(i) };
            let r = self.hazard(t)?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Parse(format!("{self}: hazard {r} at t = {t} is not positive")));
            }
            if let Some(f) = floor {
                if t >= f.from && r < f.rate * (1.0 - 1e-12) {
                    return Err(Error::Parse(format!("{self}: hazard floor {} violated at t = {t}", f.rate)));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Exponential { .. } => "exponential",
            Family::Weibull { .. } => "weibull",
            Family::FracLinear { .. } => "fraclinear",
            Family::LinearMrl { .. } => "linearmrl",
            Family::Oscillating { .. } => "oscillating",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.family {
            Family::Exponential { rate } => vec![("rate", rate)],
            Family::Weibull { shape, scale } => vec![("shape", shape), ("scale", scale)],
            Family::FracLinear { c, d } => vec![("c", c), ("d", d)],
            Family::LinearMrl { a, b } => vec![("a", a), ("b", b)],
            Family::Oscillating { a, b, c, d } => vec![("a", a), ("b", b), ("c", c), ("d", d)],
        }
    }

    pub fn capabilities(&self) -> Capabilities {
        match self.family {
            Family::Weibull { .. } => Capabilities {
                closed_form_cumulative_hazard: true,
                closed_form_mrl: false,
                analytic_lambda: true,
            },
            Family::Oscillating { .. } => Capabilities {
                closed_form_cumulative_hazard: false,
                closed_form_mrl: true,
                analytic_lambda: false,
            },
            _ => Capabilities {
                closed_form_cumulative_hazard: true,
                closed_form_mrl: true,
                analytic_lambda: true,
            },
        }
    }

    /// Smallest admissible evaluation time. Weibull with shape != 1 has a
    /// vanishing or unbounded hazard at the origin and is only evaluated for t > 0.
    pub fn min_time(&self) -> f64 {
        match self.family {
            Family::Weibull { shape, .. } if shape != 1.0 => f64::MIN_POSITIVE,
            _ => 0.0,
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Argument(format!("time must be finite and >= 0, got {t}")));
        }
        if t < self.min_time() {
            return Err(Error::Argument(format!("{} is only evaluated for t > 0", self.name())));
        }
        Ok(())
    }

    /// Failure rate r(t).
    pub fn hazard(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.hazard_unchecked(t))
    }

    pub(crate) fn hazard_unchecked(&self, t: f64) -> f64 {
        match self.family {
            Family::Exponential { rate } => rate,
            Family::Weibull { shape, scale } => shape / scale * (t / scale).powf(shape - 1.0),
            Family::FracLinear { c, d } => 1.0 / (c + d * t),
            Family::LinearMrl { a, b } => (1.0 + b) / (a + b * t),
            Family::Oscillating { a, b, c, d } => {
                let (sn, cs) = (t * t).sin_cos();
                (c + (d + 2.0 * b * cs) * t) / (a + b * sn) - d / (c + d * t)
            }
        }
    }

    /// Jet of r at `t`.
    pub fn hazard_jet(&self, t: f64, order: usize) -> Result<Jet> {
        self.check_time(t)?;
        let x = Jet::var(t, order);
        match self.family {
            Family::Exponential { rate } => Ok(Jet::constant(t, rate, order)),
            Family::Weibull { shape, scale } => x.scale(1.0 / scale)?.pow(shape - 1.0)?.scale(shape / scale),
            Family::FracLinear { c, d } => x.scale(d)?.offset(c)?.recip(),
            Family::LinearMrl { a, b } => x.scale(b)?.offset(a)?.recip()?.scale(1.0 + b),
            Family::Oscillating { a, b, c, d } => {
                let (sn, cs) = x.mul_jet(&x)?.sin_cos()?;
                let num = cs.scale(2.0 * b)?.offset(d)?.mul_jet(&x)?.offset(c)?;
                let den = sn.scale(b)?.offset(a)?;
                let tail = x.scale(d)?.offset(c)?.recip()?.scale(d)?;
                num.mul_jet(&den.recip()?)?.sub_jet(&tail)
            }
        }
    }

    /// Jet of the reciprocal hazard s = 1/r at `t`.
    pub fn s_jet(&self, t: f64, order: usize) -> Result<Jet> {
        self.hazard_jet(t, order)?.recip()
    }

    pub fn mrl_closed_form(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        match self.family {
            Family::Exponential { rate } => Ok(1.0 / rate),
            Family::FracLinear { c, d } => Ok((c + d * t) / (1.0 - d)),
            Family::LinearMrl { a, b } => Ok(a + b * t),
            Family::Oscillating { a, b, c, d } => Ok((a + b * (t * t).sin()) / (c + d * t)),
            Family::Weibull { .. } => Err(Error::Unsupported(format!(
                "{} has no closed-form mean residual life",
                self.name()
            ))),
        }
    }

    /// R(t) when the model has an antiderivative of r.
    pub fn cumulative_hazard_closed(&self, t: f64) -> Option<f64> {
        match self.family {
            Family::Weibull { shape, scale } => Some((t / scale).powf(shape)),
            Family::Oscillating { .. } => None,
            _ => self.hazard_increment(0.0, t),
        }
    }

    /// R(t + x) - R(t), evaluated without forming R(t) and R(t + x) separately.
    pub fn hazard_increment(&self, t: f64, x: f64) -> Option<f64> {
        match self.family {
            Family::Exponential { rate } => Some(rate * x),
            Family::Weibull { shape, scale } => {
                if t == 0.0 {
                    Some((x / scale).powf(shape))
                } else {
                    Some((t / scale).powf(shape) * (shape * (x / t).ln_1p()).exp_m1())
                }
            }
            Family::FracLinear { c, d } => {
                if d == 0.0 {
                    Some(x / c)
                } else {
                    Some((d * x / (c + d * t)).ln_1p() / d)
                }
            }
            Family::LinearMrl { a, b } => {
                if b == 0.0 {
                    Some(x / a)
                } else {
                    Some((1.0 + b) / b * (b * x / (a + b * t)).ln_1p())
                }
            }
            Family::Oscillating { .. } => None,
        }
    }

    /// Residual life information at a cut point `u`, used to close the
    /// improper integral. `None` means nothing certified is known yet.
    pub fn residual_tail(&self, u: f64) -> Option<ResidualTail> {
        match self.family {
            Family::Exponential { rate } => Some(ResidualTail::Exact(1.0 / rate)),
            // Survival is a power law (1 + x/theta)^(-gamma); its tail integral is elementary.
            Family::FracLinear { c, d } => Some(ResidualTail::Exact((c + d * u) / (1.0 - d))),
            Family::LinearMrl { a, b } => Some(ResidualTail::Exact(a + b * u)),
            Family::Weibull { shape, scale } => {
                if u <= 0.0 {
                    return None;
                }
                // m(u) = scale/shape * e^y0 * Gamma(1/shape, y0), y0 = (u/scale)^shape.
                let inv_r = 1.0 / self.hazard_unchecked(u);
                let a = 1.0 / shape;
                if a <= 1.0 {
                    Some(ResidualTail::Bound(inv_r))
                } else {
                    let y0 = (u / scale).powf(shape);
                    (y0 > 2.0 * (a - 1.0)).then(|| ResidualTail::Bound(inv_r / (1.0 - (a - 1.0) / y0)))
                }
            }
            Family::Oscillating { .. } => {
                let floor = self.hazard_floor_beyond(u)?;
                Some(ResidualTail::Bound(1.0 / floor))
            }
        }
    }

    /// Declared hazard floor, if the model has a positive one.
    pub fn hazard_floor(&self) -> Option<HazardFloor> {
        match self.family {
            Family::Exponential { .. } | Family::Oscillating { .. } => Some(HazardFloor {
                from: 0.0,
                rate: self.hazard_floor_beyond(0.0)?,
            }),
            Family::Weibull { shape, .. } if shape >= 1.0 => Some(HazardFloor {
                from: 1.0,
                rate: self.hazard_unchecked(1.0),
            }),
            _ => None,
        }
    }

    /// A positive lower bound on r(x) valid for every x >= t.
    pub fn hazard_floor_beyond(&self, t: f64) -> Option<f64> {
        match self.family {
            Family::Exponential { rate } => Some(rate),
            Family::Weibull { shape, .. } if shape >= 1.0 && t > 0.0 => Some(self.hazard_unchecked(t)),
            // Numerator >= c + (d-2b)x, denominator <= a+b, and d/(c+dx) <= d/c.
            // Positive at the origin exactly when c^2 > (a+b)d.
            Family::Oscillating { a, b, c, d } => {
                let v = (c + (d - 2.0 * b) * t) / (a + b) - d / c;
                (v > 0.0).then_some(v)
            }
            _ => None,
        }
    }

    /// sup_{x>t} |s'(x)| when it has a closed form.
    pub fn analytic_lambda(&self, t: f64) -> Option<f64> {
        match self.family {
            Family::Exponential { .. } => Some(0.0),
            Family::FracLinear { d, .. } => Some(d),
            Family::LinearMrl { b, .. } => Some(b / (1.0 + b)),
            // |s'| = |1-k|/k (t/scale)^(-k) is decreasing in t.
            Family::Weibull { shape, scale } => {
                (t > 0.0).then(|| (1.0 - shape).abs() / shape * (t / scale).powf(-shape))
            }
            Family::Oscillating { .. } => None,
        }
    }

    /// Limiting inf and sup of r·m, for models where they are known in closed form.
    pub fn rm_limits(&self) -> Option<(f64, f64)> {
        match self.family {
            Family::Exponential { .. } => Some((1.0, 1.0)),
            Family::FracLinear { d, .. } => Some((1.0 / (1.0 - d), 1.0 / (1.0 - d))),
            Family::LinearMrl { b, .. } => Some((1.0 + b, 1.0 + b)),
            Family::Oscillating { b, d, .. } => Some((1.0 - 2.0 * b / d, 1.0 + 2.0 * b / d)),
            Family::Weibull { .. } => Some((1.0, 1.0)),
        }
    }

    /// Rate of change of the phase of any oscillation in r near t.
    pub fn oscillation_phase_rate(&self, t: f64) -> Option<f64> {
        match self.family {
            Family::Oscillating { .. } => Some(2.0 * t),
            _ => None,
        }
    }
}

impl FromStr for HazardModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for HazardModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name())?;
        for (i, (k, v)) in self.params().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(s: &str) -> HazardModel {
        s.parse().unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn parse_examples() {
        let m = model("fraclinear:c=2,d=0.5");
        assert_eq!(m.hazard(0.0).unwrap(), 0.5);
        assert!(HazardModel::parse("oscillating:a=2,b=1,c=4,d=3").is_ok());
        let err = HazardModel::parse("oscillating:a=1,b=2,c=4,d=3").unwrap_err();
        assert_eq!(err, Error::Parse("requires a>b".into()));
    }

    #[test]
    fn parse_errors() {
        for (spec, needle) in [
            ("gamma:k=1", "unknown model"),
            ("exponential", "expected"),
            ("exponential:rate=0", "rate>0"),
            ("exponential:rate=x", "not a number"),
            ("exponential:rate=1,rate=2", "twice"),
            ("exponential:lambda=1", "unknown parameter"),
            ("weibull:shape=2", "missing parameter 'scale'"),
            ("fraclinear:c=2,d=1", "0<=d<1"),
            ("linearmrl:a=1,b=-1", "b>=0"),
            ("oscillating:a=2,b=1,c=4,d=2", "d>2b"),
            ("oscillating:a=2,b=1,c=2,d=3", "c^2>(a+b)d"),
            ("Exponential:rate=1", "unknown model"),
            ("exponential:rate=inf", "finite"),
            ("exponential: rate=1", "unknown parameter"),
        ] {
            let msg = HazardModel::parse(spec).unwrap_err().to_string();
            assert!(msg.contains(needle), "{spec}: {msg}");
        }
    }

    #[test]
    fn display_round_trips() {
        for m in catalog() {
            assert_eq!(model(&m.to_string()), m);
        }
    }

    #[test]
    fn hazard_examples() {
        assert_eq!(model("linearmrl:a=1,b=0.5").hazard(0.0).unwrap(), 1.5);
        assert_eq!(model("exponential:rate=0.5").hazard(37.0).unwrap(), 0.5);
        assert!(rel(model("oscillating:a=2,b=1,c=4,d=3").hazard(0.0).unwrap(), 1.25) < 1e-15);
        assert!(matches!(model("exponential:rate=1").hazard(-1.0), Err(Error::Argument(_))));
        assert!(matches!(model("weibull:shape=0.5,scale=1").hazard(0.0), Err(Error::Argument(_))));
        assert!(model("weibull:shape=1,scale=2").hazard(0.0).is_ok());
    }

    #[test]
    fn s_jet_examples() {
        let t = 3.0;
        let s = model("fraclinear:c=2,d=0.5").s_jet(t, 2).unwrap();
        assert!(rel(s.coeffs()[0], 3.5) < 1e-15);
        assert!(rel(s.coeffs()[1], 0.5) < 1e-15);
        assert!(s.coeffs()[2].abs() < 1e-15);
        assert_eq!(model("exponential:rate=0.5").s_jet(t, 3).unwrap().coeffs(), &[2.0, 0.0, 0.0, 0.0]);
        let s = model("linearmrl:a=1,b=0.5").s_jet(0.0, 1).unwrap();
        assert!(rel(s.coeffs()[0], 2.0 / 3.0) < 1e-15);
        assert!(rel(s.coeffs()[1], 1.0 / 3.0) < 1e-15);
    }

    #[test]
    fn closed_form_mrl_examples() {
        assert_eq!(model("fraclinear:c=2,d=0.5").mrl_closed_form(4.0).unwrap(), 8.0);
        assert_eq!(model("linearmrl:a=1,b=0.5").mrl_closed_form(2.0).unwrap(), 2.0);
        assert_eq!(model("oscillating:a=2,b=1,c=4,d=3").mrl_closed_form(0.0).unwrap(), 0.5);
        assert!(matches!(
            model("weibull:shape=2,scale=1").mrl_closed_form(1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn closed_form_mrl_satisfies_ode() {
        for m in catalog().into_iter().filter(|m| m.capabilities().closed_form_mrl) {
            for t in [0.5f64, 1.0, 2.0, 5.0, 10.0, 50.0] {
                let h = 1e-5 * t.max(1.0) / m.oscillation_phase_rate(t).unwrap_or(1.0).max(1.0);
                let dm = (m.mrl_closed_form(t + h).unwrap() - m.mrl_closed_form(t - h).unwrap()) / (2.0 * h);
                let rhs = m.hazard(t).unwrap() * m.mrl_closed_form(t).unwrap() - 1.0;
                assert!((dm - rhs).abs() < 1e-5 * rhs.abs().max(1.0), "{m} t={t}: {dm} vs {rhs}");
            }
        }
    }

    #[test]
    fn oscillating_hazard_positive_and_floored() {
        let m = model("oscillating:a=2,b=1,c=4,d=3");
        let floor = m.hazard_floor().unwrap();
        for i in 0..200_000 {
            let t = i as f64 * 1e-3;
            let r = m.hazard(t).unwrap();
            assert!(r >= floor.rate, "t={t} r={r}");
            assert!(r >= m.hazard_floor_beyond(t).unwrap() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn s_jet_matches_finite_differences() {
        for m in catalog() {
            for t in [0.7, 2.0, 5.0] {
                let s = m.s_jet(t, 2).unwrap();
                let h = 1e-4 / m.oscillation_phase_rate(t).unwrap_or(1.0).max(1.0);
                let f = |x: f64| 1.0 / m.hazard(x).unwrap();
                let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
                let d2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                let scale = s.coeffs().iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1e-3);
                assert!((s.derivative_value(1).unwrap() - d1).abs() < 1e-6 * scale.max(d1.abs()), "{m} t={t}");
                assert!((s.derivative_value(2).unwrap() - d2).abs() < 1e-3 * scale.max(d2.abs()), "{m} t={t}");
            }
        }
    }

    #[test]
    fn increments_match_cumulative_differences() {
        for m in catalog().into_iter().filter(|m| m.capabilities().closed_form_cumulative_hazard) {
            for (t, x) in [(0.5, 0.25), (2.0, 3.0), (10.0, 1e-3)] {
                let direct = m.cumulative_hazard_closed(t + x).unwrap() - m.cumulative_hazard_closed(t).unwrap();
                assert!(rel(m.hazard_increment(t, x).unwrap(), direct) < 1e-9, "{m}");
            }
        }
    }
}
