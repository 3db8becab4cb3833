//! Operator-valued symbols `m(ξ)` on a truncated coefficient space.
//!
//! A [`Symbol`] is an immutable closure mapping coordinate jets to an
//! operator-valued jet, so one evaluation yields the value and all partial
//! derivatives up to the requested order. Symbols built from closures that
//! are not jet-friendly can be switched to central differences.

pub mod builders;
pub mod checks;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::MultiIndex;
use crate::jet::{layout, Jet};
use crate::space::dense_operator_norm;

pub use builders::*;
pub use checks::*;

/// An operator on the truncated space: diagonal or dense.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Diag(Vec<Complex64>),
    Dense(DMatrix<Complex64>),
}

impl Op {
    pub fn identity(m: usize) -> Self {
        Op::Diag(vec![Complex64::new(1.0, 0.0); m])
    }

    pub fn zero(m: usize) -> Self {
        Op::Diag(vec![Complex64::new(0.0, 0.0); m])
    }

    pub fn dim(&self) -> usize {
        match self {
            Op::Diag(d) => d.len(),
            Op::Dense(m) => m.nrows(),
        }
    }

    /// Operator norm on `l_q^M`. Exact for diagonal operators.
    pub fn norm(&self, q: f64) -> f64 {
        match self {
            Op::Diag(d) => d.iter().fold(0.0, |m, v| m.max(v.norm())),
            Op::Dense(m) => dense_operator_norm(m, q),
        }
    }

    pub fn max_entry(&self) -> f64 {
        match self {
            Op::Diag(d) => d.iter().fold(0.0, |m, v| m.max(v.norm())),
            Op::Dense(m) => m.iter().fold(0.0, |a, v| a.max(v.norm())),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            Op::Diag(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())),
            Op::Dense(m) => m.clone(),
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        match self {
            Op::Diag(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
            Op::Dense(m) => (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        let ok = |v: &Complex64| v.re.is_finite() && v.im.is_finite();
        match self {
            Op::Diag(d) => d.iter().all(ok),
            Op::Dense(m) => m.iter().all(ok),
        }
    }

    pub fn scale(&self, c: Complex64) -> Op {
        match self {
            Op::Diag(d) => Op::Diag(d.iter().map(|v| v * c).collect()),
            Op::Dense(m) => Op::Dense(m * c),
        }
    }

    pub fn sub(&self, other: &Op) -> Op {
        match (self, other) {
            (Op::Diag(a), Op::Diag(b)) => Op::Diag(a.iter().zip(b).map(|(x, y)| x - y).collect()),
            _ => Op::Dense(self.to_dense() - other.to_dense()),
        }
    }
}

/// Operator-valued jet: the Taylor data of every entry.
#[derive(Debug, Clone)]
pub enum OpJet {
    Diag(Vec<Jet>),
    /// Row-major `n × n` entries.
    Dense { n: usize, entries: Vec<Jet> },
}

impl OpJet {
    pub fn dim(&self) -> usize {
        match self {
            OpJet::Diag(d) => d.len(),
            OpJet::Dense { n, .. } => *n,
        }
    }

    fn map_entries(&self, f: impl Fn(&Jet) -> Complex64) -> Op {
        match self {
            OpJet::Diag(d) => Op::Diag(d.iter().map(f).collect()),
            OpJet::Dense { n, entries } => {
                Op::Dense(DMatrix::from_row_iterator(*n, *n, entries.iter().map(f)))
            }
        }
    }

    pub fn value(&self) -> Op {
        self.map_entries(|j| j.value())
    }

    /// `D^β` of the operator at the expansion point.
    pub fn derivative(&self, beta: &[usize]) -> Op {
        self.map_entries(|j| j.derivative(beta))
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> OpJet {
        match self {
            OpJet::Diag(d) => OpJet::Diag(d.iter().map(f).collect()),
            OpJet::Dense { n, entries } => OpJet::Dense {
                n: *n,
                entries: entries.iter().map(f).collect(),
            },
        }
    }

    /// Pointwise operator product `self · other`.
    pub fn compose(&self, other: &OpJet) -> Result<OpJet> {
        if self.dim() != other.dim() {
            return Err(Error::Usage(format!(
                "operator dimensions differ: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(match (self, other) {
            (OpJet::Diag(a), OpJet::Diag(b)) => {
                OpJet::Diag(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            _ => {
                let n = self.dim();
                let (a, b) = (self.dense_entries(), other.dense_entries());
                let mut entries = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = a[i * n].zero_like();
                        for k in 0..n {
                            acc = &acc + &(&a[i * n + k] * &b[k * n + j]);
                        }
                        entries.push(acc);
                    }
                }
                OpJet::Dense { n, entries }
            }
        })
    }

    fn dense_entries(&self) -> Vec<Jet> {
        match self {
            OpJet::Dense { entries, .. } => entries.clone(),
            OpJet::Diag(d) => {
                let n = d.len();
                let mut out = vec![d[0].zero_like(); n * n];
                for (i, v) in d.iter().enumerate() {
                    out[i * n + i] = v.clone();
                }
                out
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            OpJet::Diag(d) => d.iter().all(Jet::is_finite),
            OpJet::Dense { entries, .. } => entries.iter().all(Jet::is_finite),
        }
    }
}

/// How partial derivatives of a symbol are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    CentralDifference,
}

pub type Evaluator = dyn Fn(&[Jet]) -> Result<OpJet> + Send + Sync;
pub type ScalarFn = dyn Fn(&[Jet]) -> Jet + Send + Sync;

#[derive(Clone)]
pub struct Symbol {
    name: String,
    params: Vec<(String, String)>,
    dim: usize,
    components: usize,
    mode: DerivativeMode,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("dim", &self.dim)
            .field("components", &self.components)
            .field("mode", &self.mode)
            .finish()
    }
}

/// Step used for the central-difference path at `ξ`.
pub fn difference_step(xi: &[f64]) -> f64 {
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    (1e-3 * (1.0 + r)).max(1e-4)
}

impl Symbol {
    pub fn new<F>(name: &str, dim: usize, components: usize, eval: F) -> Self
    where
        F: Fn(&[Jet]) -> Result<OpJet> + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            params: Vec::new(),
            dim,
            components,
            mode: DerivativeMode::Analytic,
            eval: Arc::new(eval),
        }
    }

    /// Diagonal symbol whose entries are scalar functions of `(ξ, index)`.
    pub fn diagonal<F>(name: &str, dim: usize, components: usize, entry: F) -> Self
    where
        F: Fn(&[Jet], usize) -> Jet + Send + Sync + 'static,
    {
        Self::new(name, dim, components, move |x| {
            Ok(OpJet::Diag((0..components).map(|m| entry(x, m)).collect()))
        })
    }

    pub fn identity(dim: usize, components: usize) -> Self {
        Self::diagonal("identity", dim, components, |x, _| {
            x[0].constant_like(Complex64::new(1.0, 0.0))
        })
    }

    pub fn zero(dim: usize, components: usize) -> Self {
        Self::diagonal("zero", dim, components, |x, _| x[0].zero_like())
    }

    /// Scalar symbol `g(ξ)·I`.
    pub fn scalar<F>(name: &str, dim: usize, components: usize, g: F) -> Self
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        Self::new(name, dim, components, move |x| {
            let v = g(x);
            Ok(OpJet::Diag(vec![v; components]))
        })
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, String)] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    fn check_point(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::Usage(format!(
                "symbol {} expects {} coordinates, got {}",
                self.name,
                self.dim,
                xi.len()
            )));
        }
        Ok(())
    }

    /// Taylor data of `m` at `ξ` up to total order `order`.
    pub fn jet(&self, xi: &[f64], order: usize) -> Result<OpJet> {
        self.check_point(xi)?;
        let x = Jet::point(xi, order);
        let out = (self.eval)(&x)?;
        if out.dim() != self.components {
            return Err(Error::Usage(format!(
                "symbol {} returned {} components, expected {}",
                self.name,
                out.dim(),
                self.components
            )));
        }
        if !out.is_finite() {
            return Err(Error::Numeric(format!(
                "symbol {} is not finite at xi = {:?}",
                self.name, xi
            )));
        }
        Ok(out)
    }

    pub fn eval(&self, xi: &[f64]) -> Result<Op> {
        Ok(self.jet(xi, 0)?.value())
    }

    /// `D^β m(ξ)` via the configured derivative mode.
    pub fn derivative(&self, xi: &[f64], beta: &MultiIndex) -> Result<Op> {
        match self.mode {
            DerivativeMode::Analytic => Ok(self.jet(xi, beta.order())?.derivative(beta.orders())),
            DerivativeMode::CentralDifference => self.difference_derivative(xi, beta),
        }
    }

    /// All `D^β m(ξ)` with `|β| ≤ order`, paired with `β`.
    pub fn derivatives(&self, xi: &[f64], order: usize) -> Result<Vec<(MultiIndex, Op)>> {
        let betas = MultiIndex::all_up_to(self.dim, order);
        match self.mode {
            DerivativeMode::Analytic => {
                let j = self.jet(xi, order)?;
                Ok(betas
                    .into_iter()
                    .map(|b| {
                        let d = j.derivative(b.orders());
                        (b, d)
                    })
                    .collect())
            }
            DerivativeMode::CentralDifference => betas
                .into_iter()
                .map(|b| self.difference_derivative(xi, &b).map(|d| (b, d)))
                .collect(),
        }
    }

    /// Tensor central difference for `D^β` with one Richardson step.
    pub fn difference_derivative(&self, xi: &[f64], beta: &MultiIndex) -> Result<Op> {
        if beta.order() == 0 {
            return self.eval(xi);
        }
        let h = difference_step(xi);
        let coarse = self.difference_stencil(xi, beta, h)?;
        let fine = self.difference_stencil(xi, beta, 0.5 * h)?;
        Ok(fine.scale(Complex64::new(4.0 / 3.0, 0.0)).sub(&coarse.scale(Complex64::new(1.0 / 3.0, 0.0))))
    }

    fn difference_stencil(&self, xi: &[f64], beta: &MultiIndex, h: f64) -> Result<Op> {
        // Per axis: Σ_j (-1)^j C(k, j) f(x + (k/2 - j) h) / h^k.
        let axes: Vec<(usize, usize)> = beta
            .orders()
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(a, &k)| (a, k))
            .collect();
        let mut acc: Option<Op> = None;
        let mut counters = vec![0usize; axes.len()];
        loop {
            let mut pt = xi.to_vec();
            let mut w = 1.0;
            for (&(axis, k), &j) in axes.iter().zip(&counters) {
                pt[axis] += (k as f64 / 2.0 - j as f64) * h;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                w *= sign * binomial(k, j) / h.powi(k as i32);
            }
            let v = self.eval(&pt)?.scale(Complex64::new(w, 0.0));
            acc = Some(match acc {
                None => v,
                Some(a) => a.sub(&v.scale(Complex64::new(-1.0, 0.0))),
            });
            let mut i = 0;
            loop {
                if i == axes.len() {
                    return Ok(acc.expect("stencil has at least one node"));
                }
                counters[i] += 1;
                if counters[i] <= axes[i].1 {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
        }
    }

    /// Operator norm of `m(ξ)` on `l_q^M`.
    pub fn norm_at(&self, xi: &[f64], q: f64) -> Result<f64> {
        Ok(self.eval(xi)?.norm(q))
    }

    /// `c · m`.
    pub fn scaled(&self, c: Complex64) -> Symbol {
        let inner = self.eval.clone();
        let mut s = self.clone();
        s.eval = Arc::new(move |x| Ok(inner(x)?.map(|j| j.scale(c))));
        s.name = format!("{}*({})", fmt_complex(c), self.name);
        s
    }

    /// `m(a ξ)`.
    pub fn dilated(&self, a: f64) -> Symbol {
        let inner = self.eval.clone();
        let mut s = self.clone();
        s.eval = Arc::new(move |x| {
            let y: Vec<Jet> = x.iter().map(|v| v.scale(Complex64::new(a, 0.0))).collect();
            inner(&y)
        });
        s.name = format!("{}(a={a}·)", self.name);
        s
    }

    /// Pointwise product `self(ξ) · other(ξ)`.
    pub fn product(&self, other: &Symbol) -> Result<Symbol> {
        if self.dim != other.dim || self.components != other.components {
            return Err(Error::Usage(format!(
                "cannot multiply symbols {} and {} of different shapes",
                self.name, other.name
            )));
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut s = self.clone();
        s.eval = Arc::new(move |x| a(x)?.compose(&b(x)?));
        s.name = format!("({})·({})", self.name, other.name);
        if other.mode == DerivativeMode::CentralDifference {
            s.mode = DerivativeMode::CentralDifference;
        }
        Ok(s)
    }

    /// `g(ξ) · m(ξ)` for a scalar `g`.
    pub fn times_scalar(&self, label: &str, g: Arc<ScalarFn>) -> Symbol {
        let inner = self.eval.clone();
        let mut s = self.clone();
        s.eval = Arc::new(move |x| {
            let w = g(x);
            Ok(inner(x)?.map(|j| j * &w))
        });
        s.name = format!("{label}·({})", self.name);
        s
    }

    /// Sum of two symbols of the same shape.
    pub fn sum(&self, other: &Symbol) -> Result<Symbol> {
        if self.dim != other.dim || self.components != other.components {
            return Err(Error::Usage("cannot add symbols of different shapes".into()));
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut s = self.clone();
        s.eval = Arc::new(move |x| {
            let (u, v) = (a(x)?, b(x)?);
            Ok(match (u, v) {
                (OpJet::Diag(p), OpJet::Diag(q)) => {
                    OpJet::Diag(p.iter().zip(&q).map(|(x, y)| x + y).collect())
                }
                (u, v) => {
                    let n = u.dim();
                    let (p, q) = (u.dense_entries(), v.dense_entries());
                    OpJet::Dense {
                        n,
                        entries: p.iter().zip(&q).map(|(x, y)| x + y).collect(),
                    }
                }
            })
        });
        s.name = format!("{}+{}", self.name, other.name);
        Ok(s)
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Jet of `|ξ|` (Euclidean), with the convention that its expansion at the
/// origin is truncated to zero.
pub fn jet_norm(x: &[Jet]) -> Jet {
    if x.len() == 1 {
        x[0].abs()
    } else {
        crate::jet::sum_squares(x).pow_nonneg(0.5)
    }
}

/// Layout-compatible constant jet helper.
pub fn constant(x: &[Jet], v: f64) -> Jet {
    Jet::constant(x[0].layout(), Complex64::new(v, 0.0))
}

/// Convenience used by tests and builders: jets of order 0 at `ξ`.
pub fn point0(xi: &[f64]) -> Vec<Jet> {
    let lay = layout(xi.len(), 0);
    xi.iter().map(|&v| Jet::real(lay, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::sum_squares;

    fn sample() -> Symbol {
        // i ξ_1 / (1 + |ξ|^2)^{1/2}
        Symbol::scalar("riesz", 2, 3, |x| {
            let i = Complex64::new(0.0, 1.0);
            &x[0].scale(i) * &sum_squares(x).add_scalar(Complex64::new(1.0, 0.0)).powf(-0.5)
        })
    }

    #[test]
    fn analytic_and_difference_agree() {
        let m = sample();
        let fd = m.clone().with_mode(DerivativeMode::CentralDifference);
        for xi in [[0.3, -1.2], [4.0, 2.0], [0.0, 0.0]] {
            for b in MultiIndex::all_up_to(2, 2) {
                let a = m.derivative(&xi, &b).unwrap();
                let d = fd.derivative(&xi, &b).unwrap();
                assert!(a.sub(&d).norm(2.0) < 1e-6 * (1.0 + a.norm(2.0)), "{b} at {xi:?}");
            }
        }
    }

    #[test]
    fn dilation_and_scaling() {
        let m = sample();
        let d = m.dilated(2.0);
        let v1 = d.eval(&[0.5, 0.25]).unwrap();
        let v2 = m.eval(&[1.0, 0.5]).unwrap();
        assert_eq!(v1, v2);
        let s = m.scaled(Complex64::new(-3.0, 0.0));
        let lhs = s.norm_at(&[1.0, 0.0], 2.0).unwrap();
        assert!((lhs - 3.0 * m.norm_at(&[1.0, 0.0], 2.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_norm_matches_dense() {
        let m = Symbol::diagonal("d", 1, 6, |x, k| {
            (&x[0] * &x[0]).add_scalar(Complex64::new(k as f64 + 1.0, 0.5)).recip()
        });
        let op = m.eval(&[0.7]).unwrap();
        let dense = Op::Dense(op.to_dense());
        for q in [1.0, 2.0, f64::INFINITY] {
            assert!((op.norm(q) - dense.norm(q)).abs() < 1e-14);
        }
    }

    #[test]
    fn product_composes_pointwise() {
        let m = sample();
        let p = m.product(&m).unwrap();
        let v = m.eval(&[1.0, 1.0]).unwrap();
        let w = p.eval(&[1.0, 1.0]).unwrap();
        if let (Op::Diag(a), Op::Diag(b)) = (v, w) {
            assert!((a[0] * a[0] - b[0]).norm() < 1e-15);
        } else {
            panic!("expected diagonal");
        }
    }
}
