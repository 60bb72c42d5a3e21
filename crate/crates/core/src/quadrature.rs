//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{Error, Result};

/// A sample of the integrand. `aux` carries state that later samples may be
/// built from (the cumulative hazard increment, for survival integrands).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub f: f64,
    pub aux: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl Integral {
    fn absorb(&mut self, other: Integral) {
        self.value += other.value;
        self.error += other.error;
        self.evaluations += other.evaluations;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Simpson {
    /// Absolute error target for the whole interval.
    pub eps: f64,
    pub min_depth: u32,
    pub max_depth: u32,
    pub max_evaluations: usize,
    /// Relative noise level of the integrand; differences below it count as settled.
    pub rel_noise: f64,
}

impl Default for Simpson {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            min_depth: 3,
            max_depth: 48,
            max_evaluations: 50_000_000,
            rel_noise: 0.0,
        }
    }
}

impl Simpson {
    pub fn with_eps(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }

    /// ∫_a^b f.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<Integral> {
        let start = Node { x: a, f: f(a), aux: 0.0 };
        let (mut out, _) = self.integrate_chained(|_, x| Ok(Node { x, f: f(x), aux: 0.0 }), start, b)?;
        out.evaluations += 1;
        Ok(out)
    }

    /// ∫ over [start.x, b] where every new sample is produced from a nearby
    /// sample to its left: `eval(anchor, x)`. Returns the node at `b` so a
    /// following panel can continue the chain.
    pub fn integrate_chained<E>(&self, mut eval: E, start: Node, b: f64) -> Result<(Integral, Node)>
    where
        E: FnMut(&Node, f64) -> Result<Node>,
    {
        let a = start.x;
        if !(a.is_finite() && b.is_finite() && b >= a) {
            return Err(Error::Argument(format!("bad integration interval [{a}, {b}]")));
        }
        if b == a {
            return Ok((Integral::default(), start));
        }
        let mid = eval(&start, 0.5 * (a + b))?;
        let end = eval(&mid, b)?;
        let whole = (b - a) / 6.0 * (start.f + 4.0 * mid.f + end.f);
        let mut acc = Integral {
            evaluations: 2,
            ..Integral::default()
        };
        self.recurse(&mut eval, &start, &mid, &end, whole, self.eps, 0, &mut acc)?;
        Ok((acc, end))
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<E>(
        &self,
        eval: &mut E,
        a: &Node,
        m: &Node,
        b: &Node,
        whole: f64,
        eps: f64,
        depth: u32,
        acc: &mut Integral,
    ) -> Result<()>
    where
        E: FnMut(&Node, f64) -> Result<Node>,
    {
        let l = eval(a, 0.5 * (a.x + m.x))?;
        let r = eval(m, 0.5 * (m.x + b.x))?;
        acc.evaluations += 2;
        if acc.evaluations > self.max_evaluations {
            return Err(Error::Quadrature(format!(
                "evaluation budget {} exhausted near x = {}",
                self.max_evaluations, m.x
            )));
        }
        let h = b.x - a.x;
        let left = h / 12.0 * (a.f + 4.0 * l.f + m.f);
        let right = h / 12.0 * (m.f + 4.0 * r.f + b.f);
        let delta = left + right - whole;
        let roundoff = (64.0 * f64::EPSILON + self.rel_noise) * (left.abs() + right.abs());
        let settled = delta.abs() <= 15.0 * eps || delta.abs() <= roundoff || l.x <= a.x || r.x >= b.x;
        if depth >= self.min_depth && (settled || depth >= self.max_depth) {
            if !settled && !delta.is_finite() {
                return Err(Error::Quadrature(format!("non-finite integrand near x = {}", m.x)));
            }
            acc.absorb(Integral {
                value: left + right + delta / 15.0,
                error: delta.abs() / 15.0,
                evaluations: 0,
            });
            return Ok(());
        }
        self.recurse(eval, a, &l, m, left, 0.5 * eps, depth + 1, acc)?;
        self.recurse(eval, m, &r, b, right, 0.5 * eps, depth + 1, acc)
    }

    /// Splits [start.x, b] at `breaks` (ascending, interior) and shares the
    /// error budget in proportion to length.
    pub fn integrate_pieces<E>(&self, mut eval: E, start: Node, breaks: &[f64], b: f64) -> Result<(Integral, Node)>
    where
        E: FnMut(&Node, f64) -> Result<Node>,
    {
        let total = b - start.x;
        let mut node = start;
        let mut acc = Integral::default();
        for &x in breaks.iter().filter(|&&x| x > start.x && x < b).chain(std::iter::once(&b)) {
            let piece = Simpson {
                eps: self.eps * (x - node.x) / total,
                ..*self
            };
            let (part, end) = piece.integrate_chained(&mut eval, node, x)?;
            acc.absorb(part);
            node = end;
        }
        Ok((acc, node))
    }
}
