//! Truncated multivariate Taylor polynomials ("jets") over `Complex64`.
//!
//! A jet of order `d` in `v` variables stores the Taylor coefficients
//! `c_β` for `|β| ≤ d`, so `D^β f(x0) = β! c_β`. Arithmetic and elementary
//! functions propagate the coefficients exactly up to rounding, which gives
//! analytic symbol derivatives without symbolic algebra.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::grid::MultiIndex;

type Coeffs = SmallVec<[Complex64; 10]>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Monomial bookkeeping shared by all jets of one shape.
#[derive(Debug)]
pub struct Layout {
    vars: usize,
    order: usize,
    monos: Vec<Vec<usize>>,
    factorial: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
    products: Vec<(u16, u16, u16)>,
}

impl Layout {
    fn build(vars: usize, order: usize) -> Self {
        let monos: Vec<Vec<usize>> = MultiIndex::all_up_to(vars.max(1), order)
            .into_iter()
            .map(|m| m.orders()[..vars].to_vec())
            .collect();
        let monos = if vars == 0 { vec![vec![]] } else { monos };
        let degree: Vec<usize> = monos.iter().map(|m| m.iter().sum()).collect();
        let factorial = monos
            .iter()
            .map(|m| m.iter().map(|&o| (1..=o).product::<usize>() as f64).product())
            .collect();
        let index: HashMap<Vec<usize>, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut products = Vec::new();
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                if degree[i] + degree[j] <= order {
                    let sum: Vec<usize> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    products.push((i as u16, j as u16, index[&sum] as u16));
                }
            }
        }
        Self {
            vars,
            order,
            monos,

            factorial,
            index,
            products,
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monos
    }

    pub fn position(&self, beta: &[usize]) -> Option<usize> {
        self.index.get(beta).copied()
    }
}

/// Shared layout for `vars` variables and total order `order`.
pub fn layout(vars: usize, order: usize) -> &'static Layout {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static Layout>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("layout cache poisoned");
    guard
        .entry((vars, order))
        .or_insert_with(|| Box::leak(Box::new(Layout::build(vars, order))))
}

#[derive(Debug, Clone)]
pub struct Jet {
    lay: &'static Layout,
    c: Coeffs,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.lay, other.lay) && self.c == other.c
    }
}

impl Jet {
    pub fn constant(lay: &'static Layout, v: Complex64) -> Self {
        let mut c: Coeffs = SmallVec::from_elem(ZERO, lay.len());
        c[0] = v;
        Self { lay, c }
    }

    pub fn real(lay: &'static Layout, v: f64) -> Self {
        Self::constant(lay, Complex64::new(v, 0.0))
    }

    /// The coordinate function `x_k` expanded at `x_k = v`.
    pub fn variable(lay: &'static Layout, k: usize, v: f64) -> Self {
        let mut j = Self::real(lay, v);
        if lay.order >= 1 {
            let mut beta = vec![0; lay.vars];
            beta[k] = 1;
            j.c[lay.index[&beta]] = ONE;
        }
        j
    }

    /// Jets of all coordinates at the point `x`.
    pub fn point(x: &[f64], order: usize) -> Vec<Jet> {
        let lay = layout(x.len(), order);
        x.iter()
            .enumerate()
            .map(|(k, &v)| Jet::variable(lay, k, v))
            .collect()
    }

    pub fn layout(&self) -> &'static Layout {
        self.lay
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// Taylor coefficient `c_β` (zero beyond the truncation order).
    pub fn coeff(&self, beta: &[usize]) -> Complex64 {
        self.lay.position(beta).map_or(ZERO, |i| self.c[i])
    }

    /// `D^β f = β! c_β`.
    pub fn derivative(&self, beta: &[usize]) -> Complex64 {
        match self.lay.position(beta) {
            Some(i) => self.c[i] * self.lay.factorial[i],
            None => ZERO,
        }
    }

    pub fn zero_like(&self) -> Self {
        Self::constant(self.lay, ZERO)
    }

    pub fn constant_like(&self, v: Complex64) -> Self {
        Self::constant(self.lay, v)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            lay: self.lay,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    /// `Σ_j g_j/j! δ^j` where `δ = self - value` and `g_j = g^{(j)}(value)`.
    fn compose(&self, derivs: &[Complex64]) -> Self {
        let d = self.lay.order;
        if d == 0 {
            return self.constant_like(derivs[0]);
        }
        let mut delta = self.clone();
        delta.c[0] = ZERO;
        let fact = |j: usize| (1..=j).product::<usize>() as f64;
        let mut acc = self.constant_like(derivs[d] / fact(d));
        for j in (0..d).rev() {
            acc = (&acc * &delta).add_scalar(derivs[j] / fact(j));
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        let inv = a.inv();
        let mut derivs = Vec::with_capacity(self.lay.order + 1);
        let mut p = inv;
        let mut sign_fact = 1.0;
        for j in 0..=self.lay.order {
            derivs.push(p * sign_fact);
            p *= inv;
            sign_fact *= -((j + 1) as f64);
        }
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.lay.order + 1])
    }

    pub fn ln(&self) -> Self {
        let a = self.value();
        let mut derivs = vec![a.ln()];
        let mut fact = 1.0;
        for j in 1..=self.lay.order {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            derivs.push(a.powi(-(j as i32)) * (sign * fact));
            fact *= j as f64;
        }
        self.compose(&derivs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        let derivs: Vec<Complex64> = (0..=self.lay.order).map(|j| cycle[j % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        let derivs: Vec<Complex64> = (0..=self.lay.order).map(|j| cycle[j % 4]).collect();
        self.compose(&derivs)
    }

    /// Non-negative integer power by repeated multiplication (exact at 0).
    pub fn powu(&self, n: u32) -> Self {
        let mut out = self.constant_like(ONE);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    pub fn powi(&self, n: i32) -> Self {
        if n >= 0 {
            self.powu(n as u32)
        } else {
            self.recip().powu((-n) as u32)
        }
    }

    /// Principal-branch power `z^p`. Integer exponents use exact products.
    pub fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() < 64.0 {
            return self.powi(p as i32);
        }
        let a = self.value();
        let mut derivs = Vec::with_capacity(self.lay.order + 1);
        let mut coef = 1.0;
        for j in 0..=self.lay.order {
            derivs.push(a.powf(p - j as f64) * coef);
            coef *= p - j as f64;
        }
        self.compose(&derivs)
    }

    /// Complex power `z^w` for a jet exponent, `exp(w ln z)`.
    pub fn powj(&self, w: &Jet) -> Self {
        (&self.ln() * w).exp()
    }

    /// `|t|^p` for a real-valued jet. At `t = 0` the expansion is kept only
    /// when `p` is an even integer, where `|t|^p = t^p`; otherwise the
    /// derivatives up to the truncation order are taken as zero.
    pub fn abs_pow(&self, p: f64) -> Self {
        let a = self.value().re;
        if p == 0.0 {
            return self.constant_like(ONE);
        }
        if p.fract() == 0.0 && (p as i64) % 2 == 0 && p > 0.0 {
            return self.powu(p as u32);
        }
        if a > 0.0 {
            self.real_part().powf(p)
        } else if a < 0.0 {
            (-self.real_part()).powf(p)
        } else {
            self.zero_like()
        }
    }

    /// `|t|` for a real-valued jet.
    pub fn abs(&self) -> Self {
        self.abs_pow(1.0)
    }

    /// `s^p` for a real jet with non-negative value, e.g. `(Σ ξ_k²)^{σ/2}`.
    /// At `s = 0` integer `p` expands exactly and other `p > 0` give zero.
    pub fn pow_nonneg(&self, p: f64) -> Self {
        let a = self.value().re;
        if a > 0.0 {
            self.real_part().powf(p)
        } else if p.fract() == 0.0 && p >= 0.0 {
            self.powu(p as u32)
        } else {
            self.zero_like()
        }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn real_part(&self) -> Self {
        Self {
            lay: self.lay,
            c: self.c.iter().map(|x| Complex64::new(x.re, 0.0)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            lay: self.lay,
            c: self.c.iter().map(|x| x.conj()).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Maximum over all coefficients of `|c_β|`.
    pub fn max_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.norm()))
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet {
            lay: self.lay,
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet {
            lay: self.lay,
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut c: Coeffs = SmallVec::from_elem(ZERO, self.lay.len());
        if self.lay.order == 0 {
            c[0] = self.c[0] * rhs.c[0];
        } else {
            for &(i, j, k) in &self.lay.products {
                c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
            }
        }
        Jet { lay: self.lay, c }
    }
}

impl<'a> Div<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-ONE)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-ONE)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Jet> for &'a Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);
owned_ops!(Div, div);

/// Monomial `(i x_1)^{a_1} ⋯ (i x_N)^{a_N}` as a jet.
pub fn i_monomial(x: &[Jet], alpha: &[usize]) -> Jet {
    let mut out = x[0].constant_like(ONE);
    for (xk, &a) in x.iter().zip(alpha) {
        if a > 0 {
            out = &out * &xk.scale(Complex64::new(0.0, 1.0)).powu(a as u32);
        }
    }
    out
}

/// `Σ_k x_k²` as a jet.
pub fn sum_squares(x: &[Jet]) -> Jet {
    x.iter()
        .fold(x[0].zero_like(), |acc, xk| &acc + &(xk * xk))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn layout_sizes() {
        assert_eq!(layout(1, 4).len(), 5);
        assert_eq!(layout(2, 2).len(), 6);
        assert_eq!(layout(3, 3).len(), 20);
    }

    #[test]
    fn polynomial_derivatives() {
        // f(x, y) = x^2 y + 3 y at (2, -1)
        let p = Jet::point(&[2.0, -1.0], 3);
        let f = &(&(&p[0] * &p[0]) * &p[1]) + &p[1].scale(Complex64::new(3.0, 0.0));
        assert!(close(f.value(), -7.0, 1e-15));
        assert!(close(f.derivative(&[1, 0]), -4.0, 1e-15));
        assert!(close(f.derivative(&[0, 1]), 7.0, 1e-15));
        assert!(close(f.derivative(&[2, 0]), -2.0, 1e-15));
        assert!(close(f.derivative(&[1, 1]), 4.0, 1e-15));
        assert!(close(f.derivative(&[2, 1]), 2.0, 1e-15));
        assert!(close(f.derivative(&[0, 2]), 0.0, 1e-15));
    }

    #[test]
    fn recip_exp_pow_match_closed_forms() {
        let x = 0.7;
        let t = &Jet::point(&[x], 4)[0];
        // 1/(1+t^2)
        let r = (t * t).add_scalar(ONE).recip();
        let d1 = -2.0 * x / (1.0 + x * x).powi(2);
        let d2 = (6.0 * x * x - 2.0) / (1.0 + x * x).powi(3);
        assert!(close(r.derivative(&[1]), d1, 1e-14));
        assert!(close(r.derivative(&[2]), d2, 1e-14));
        // exp(-t^2)
        let e = (-(t * t)).exp();
        let g = (-x * x).exp();
        assert!(close(e.derivative(&[2]), (4.0 * x * x - 2.0) * g, 1e-14));
        // t^{2.5}
        let p = t.powf(2.5);
        assert!(close(p.derivative(&[3]), 2.5 * 1.5 * 0.5 * x.powf(-0.5), 1e-13));
        // sin, cos
        assert!(close(t.sin().derivative(&[3]), -x.cos(), 1e-14));
        assert!(close(t.cos().derivative(&[2]), -x.cos(), 1e-14));
        assert!(close(t.ln().derivative(&[2]), -1.0 / (x * x), 1e-14));
    }

    #[test]
    fn abs_pow_at_origin() {
        let t = &Jet::point(&[0.0], 3)[0];
        let sq = t.abs_pow(2.0);
        assert!(close(sq.derivative(&[2]), 2.0, 1e-15));
        let a = t.abs_pow(1.5);
        assert_eq!(a.max_coeff(), 0.0);
        let neg = &Jet::point(&[-2.0], 2)[0];
        let v = neg.abs_pow(3.0);
        assert!(close(v.value(), 8.0, 1e-15));
        assert!(close(v.derivative(&[1]), -12.0, 1e-14));
    }

    #[test]
    fn i_monomial_values() {
        let p = Jet::point(&[2.0], 2);
        let m = i_monomial(&p, &[2]);
        assert!(close(m.value(), -4.0, 1e-15));
        assert!(close(m.derivative(&[1]), -4.0, 1e-15));
    }
}
