//! Uniform periodic grids on truncated boxes and the Fourier transform pair.
//!
//! A [`Grid`] samples the box `[-L, L)^N` with `n` nodes per axis. Physical
//! nodes are `x_j = -L + j h` with `h = 2L / n`; frequency nodes are stored in
//! centered order, `xi_p = pi (p - n/2) / L` for `p = 0..n`, so the zero
//! frequency sits at index `n/2` on every axis.
//!
//! The transforms follow the convention
//!
//! ```text
//! (F f)(xi)      = ∫ exp(-i xi·x) f(x) dx
//! (F^{-1} g)(x)  = (2π)^{-N} ∫ exp(i xi·x) g(xi) dxi
//! ```
//!
//! discretized as `h^N`-weighted sums, so that `inverse_ft ∘ forward_ft` is
//! the identity on grid functions.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::ValueNorm;

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Default cap on the total order of spectral derivatives.
pub const DEFAULT_MAX_DERIVATIVE_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    samples: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, samples: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!(
                "grid dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!(
                "grid half width must be positive and finite, got {half_width}"
            )));
        }
        if samples < 4 || samples % 2 != 0 {
            return Err(Error::Config(format!(
                "samples per axis must be even and at least 4, got {samples}"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Physical spacing `h = 2L / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.samples as f64
    }

    /// Frequency spacing `pi / L`.
    pub fn freq_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// Nyquist frequency `pi / h`.
    pub fn max_freq(&self) -> f64 {
        PI / self.spacing()
    }

    /// Number of nodes, `n^N`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one physical cell, `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Quadrature weight of one frequency cell, `(pi / L)^N`.
    pub fn freq_cell_volume(&self) -> f64 {
        self.freq_spacing().powi(self.dim as i32)
    }

    /// Physical coordinate of axis index `j`.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Frequency of centered axis index `p`.
    pub fn freq(&self, p: usize) -> f64 {
        (p as f64 - (self.samples / 2) as f64) * self.freq_spacing()
    }

    /// Per-axis indices of a flat (row-major, axis 0 slowest) node index.
    pub fn multi_index(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.samples;
            idx /= self.samples;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .take(self.dim)
            .fold(0, |acc, &j| acc * self.samples + j)
    }

    /// Physical coordinates of node `idx`.
    pub fn point(&self, idx: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(idx);
        let mut out = [0.0; MAX_DIM];
        for a in 0..self.dim {
            out[a] = self.coord(m[a]);
        }
        out
    }

    /// Frequency coordinates of node `idx`.
    pub fn freq_point(&self, idx: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(idx);
        let mut out = [0.0; MAX_DIM];
        for a in 0..self.dim {
            out[a] = self.freq(m[a]);
        }
        out
    }

    /// All frequency nodes as coordinate vectors.
    pub fn freq_points(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.freq_point(i)[..self.dim].to_vec())
            .collect()
    }

    /// Euclidean norm of the frequency at node `idx`.
    pub fn freq_abs(&self, idx: usize) -> f64 {
        let p = self.freq_point(idx);
        p[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Physical,
    Frequency,
}

/// Multi-index of non-negative derivative orders, one per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(orders: &[i64]) -> Result<Self> {
        let mut out = Vec::with_capacity(orders.len());
        for &o in orders {
            if o < 0 {
                return Err(Error::Usage(format!(
                    "multi-index entries must be non-negative, got {orders:?}"
                )));
            }
            out.push(o as usize);
        }
        Ok(Self(out))
    }

    pub fn from_orders(orders: Vec<usize>) -> Self {
        Self(orders)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// Unit multi-index `order * e_axis`.
    pub fn axis(dim: usize, axis: usize, order: usize) -> Self {
        let mut v = vec![0; dim];
        v[axis] = order;
        Self(v)
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices of dimension `dim` with total order at most `max`,
    /// in graded order.
    pub fn all_up_to(dim: usize, max: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for total in 0..=max {
            let mut cur = vec![0usize; dim];
            enumerate_exact(dim, total, 0, &mut cur, &mut out);
        }
        out
    }

    /// `(i xi_1)^{a_1} ... (i xi_N)^{a_N}`.
    pub fn monomial(&self, xi: &[f64]) -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for (a, &o) in self.0.iter().enumerate() {
            if o > 0 {
                v *= Complex64::new(0.0, xi[a]).powu(o as u32);
            }
        }
        v
    }
}

fn enumerate_exact(
    dim: usize,
    remaining: usize,
    axis: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<MultiIndex>,
) {
    if axis + 1 == dim {
        cur[axis] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for o in (0..=remaining).rev() {
        cur[axis] = o;
        enumerate_exact(dim, remaining - o, axis + 1, cur, out);
    }
    cur[axis] = 0;
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|o| o.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `E`-valued samples on a grid, in either domain.
///
/// Values are stored node-major: `values[node * components + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    components: usize,
    domain: Domain,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(
        grid: Grid,
        components: usize,
        domain: Domain,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if components == 0 {
            return Err(Error::Config("field needs at least one component".into()));
        }
        if values.len() != grid.len() * components {
            return Err(Error::Data(format!(
                "field expects {} values, got {}",
                grid.len() * components,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Data(format!("non-finite field value at flat index {i}")));
        }
        Ok(Self {
            grid,
            components,
            domain,
            values,
        })
    }

    pub fn zeros(grid: Grid, components: usize, domain: Domain) -> Self {
        Self {
            grid,
            components: components.max(1),
            domain,
            values: vec![Complex64::new(0.0, 0.0); grid.len() * components.max(1)],
        }
    }

    /// Samples a physical field from `f(x, out)`, where `out` has one slot
    /// per component.
    pub fn from_fn<F>(grid: Grid, components: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [Complex64]),
    {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len() * components];
        for (idx, chunk) in values.chunks_mut(components).enumerate() {
            let p = grid.point(idx);
            f(&p[..grid.dim()], chunk);
        }
        Self::new(grid, components, Domain::Physical, values)
    }

    /// Samples a frequency-domain field from `f(xi, out)`.
    pub fn from_freq_fn<F>(grid: Grid, components: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [Complex64]),
    {
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len() * components];
        for (idx, chunk) in values.chunks_mut(components).enumerate() {
            let p = grid.freq_point(idx);
            f(&p[..grid.dim()], chunk);
        }
        Self::new(grid, components, Domain::Frequency, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at node `idx`, component `c`.
    pub fn at(&self, idx: usize, c: usize) -> Complex64 {
        self.values[idx * self.components + c]
    }

    /// Samples at node `idx`, one per component.
    pub fn node(&self, idx: usize) -> &[Complex64] {
        &self.values[idx * self.components..(idx + 1) * self.components]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    fn same_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid
            || self.components != other.components
            || self.domain != other.domain
        {
            return Err(Error::Usage(
                "fields differ in grid, component count or domain".into(),
            ));
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        Ok(out)
    }

    /// Component `c` as a single-component field.
    pub fn component(&self, c: usize) -> Field {
        let values = self.values.iter().skip(c).step_by(self.components).copied().collect();
        Field {
            grid: self.grid,
            components: 1,
            domain: self.domain,
            values,
        }
    }

    /// Multiplies each sample by `f(point, component)`, where `point` is
    /// the physical or frequency coordinate depending on the domain.
    pub fn multiply_by<F>(&self, f: F) -> Field
    where
        F: Fn(&[f64], usize) -> Complex64,
    {
        let mut out = self.clone();
        let dim = self.grid.dim();
        for (idx, chunk) in out.values.chunks_mut(self.components).enumerate() {
            let p = match self.domain {
                Domain::Physical => self.grid.point(idx),
                Domain::Frequency => self.grid.freq_point(idx),
            };
            for (c, v) in chunk.iter_mut().enumerate() {
                *v *= f(&p[..dim], c);
            }
        }
        out
    }

    /// `L_q(grid; E)` norm: `(h^N Σ_x ‖f(x)‖_E^q)^{1/q}`, or the max for
    /// `q = ∞`. In the frequency domain the cell weight is `(pi/L)^N`.
    pub fn lq_norm(&self, q: f64, e: &dyn ValueNorm) -> f64 {
        let w = match self.domain {
            Domain::Physical => self.grid.cell_volume(),
            Domain::Frequency => self.grid.freq_cell_volume(),
        };
        lq_norm_of_nodes(&self.values, self.components, q, w, e)
    }

    /// Forward transform `h^N Σ_x exp(-i xi·x) f(x)`.
    pub fn forward_ft(&self) -> Result<Field> {
        if self.domain != Domain::Physical {
            return Err(Error::Usage(
                "forward_ft expects a physical-domain field".into(),
            ));
        }
        let mut values = self.values.clone();
        transform(&mut values, &self.grid, self.components, FftDirection::Forward);
        Field::new(self.grid, self.components, Domain::Frequency, values)
    }

    /// Inverse transform with the `(2π)^{-N}` normalization.
    pub fn inverse_ft(&self) -> Result<Field> {
        if self.domain != Domain::Frequency {
            return Err(Error::Usage(
                "inverse_ft expects a frequency-domain field".into(),
            ));
        }
        let mut values = self.values.clone();
        transform(&mut values, &self.grid, self.components, FftDirection::Inverse);
        Field::new(self.grid, self.components, Domain::Physical, values)
    }

    /// Returns the frequency-domain representation, transforming if needed.
    pub fn to_frequency(&self) -> Result<Field> {
        match self.domain {
            Domain::Frequency => Ok(self.clone()),
            Domain::Physical => self.forward_ft(),
        }
    }

    /// Returns the physical-domain representation, transforming if needed.
    pub fn to_physical(&self) -> Result<Field> {
        match self.domain {
            Domain::Physical => Ok(self.clone()),
            Domain::Frequency => self.inverse_ft(),
        }
    }

    /// Largest modulus among nodes that touch the box boundary.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.samples();
        let mut best = 0.0f64;
        for idx in 0..self.grid.len() {
            let m = self.grid.multi_index(idx);
            if m[..self.grid.dim()].iter().any(|&j| j == 0 || j == n - 1) {
                for v in self.node(idx) {
                    best = best.max(v.norm());
                }
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

/// `L_q` norm of node-major samples with cell weight `w`.
pub(crate) fn lq_norm_of_nodes(
    values: &[Complex64],
    components: usize,
    q: f64,
    w: f64,
    e: &dyn ValueNorm,
) -> f64 {
    if q.is_infinite() {
        values
            .chunks(components)
            .map(|c| e.norm(c))
            .fold(0.0, f64::max)
    } else {
        let s: f64 = values.chunks(components).map(|c| e.norm(c).powf(q)).sum();
        (w * s).powf(1.0 / q)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place transform of node-major values along every axis.
pub(crate) fn transform(
    values: &mut [Complex64],
    grid: &Grid,
    components: usize,
    direction: FftDirection,
) {
    let n = grid.samples();
    let h = grid.spacing();
    let half = n / 2;
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    let lines_per_axis = grid.len() / n;
    let mut buf = vec![Complex64::new(0.0, 0.0); n * lines_per_axis * components];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // sign[p] = (-1)^(p - n/2)
    let sign: Vec<f64> = (0..n)
        .map(|p| if (p + half) % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let scale = match direction {
        FftDirection::Forward => h,
        FftDirection::Inverse => 1.0 / (n as f64 * h),
    };

    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let mut line = 0;
        for base in 0..grid.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            for c in 0..components {
                let dst = &mut buf[line * n..(line + 1) * n];
                match direction {
                    FftDirection::Forward => {
                        for j in 0..n {
                            dst[j] = values[(base + j * stride) * components + c];
                        }
                    }
                    FftDirection::Inverse => {
                        for p in 0..n {
                            dst[(p + half) % n] =
                                values[(base + p * stride) * components + c] * sign[p];
                        }
                    }
                }
                line += 1;
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        let mut line = 0;
        for base in 0..grid.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            for c in 0..components {
                let src = &buf[line * n..(line + 1) * n];
                match direction {
                    FftDirection::Forward => {
                        for p in 0..n {
                            values[(base + p * stride) * components + c] =
                                src[(p + half) % n] * (sign[p] * scale);
                        }
                    }
                    FftDirection::Inverse => {
                        for j in 0..n {
                            values[(base + j * stride) * components + c] = src[j] * scale;
                        }
                    }
                }
                line += 1;
            }
        }
    }
}

/// `F^{-1}[(i xi)^alpha F f]`, with `|alpha|` capped at
/// [`DEFAULT_MAX_DERIVATIVE_ORDER`].
pub fn spectral_derivative(f: &Field, alpha: &MultiIndex) -> Result<Field> {
    spectral_derivative_bounded(f, alpha, DEFAULT_MAX_DERIVATIVE_ORDER)
}

pub fn spectral_derivative_bounded(
    f: &Field,
    alpha: &MultiIndex,
    max_order: usize,
) -> Result<Field> {
    if f.domain() != Domain::Physical {
        return Err(Error::Usage(
            "spectral_derivative expects a physical-domain field".into(),
        ));
    }
    check_alpha(f.grid(), alpha, max_order)?;
    if alpha.order() == 0 {
        return Ok(f.clone());
    }
    let fhat = f.forward_ft()?;
    fhat.multiply_by(|xi, _| alpha.monomial(xi)).inverse_ft()
}

pub(crate) fn check_alpha(grid: &Grid, alpha: &MultiIndex, max_order: usize) -> Result<()> {
    if alpha.dim() != grid.dim() {
        return Err(Error::Usage(format!(
            "multi-index {alpha} does not match grid dimension {}",
            grid.dim()
        )));
    }
    if alpha.order() > max_order {
        return Err(Error::Usage(format!(
            "derivative order {} exceeds the configured maximum {max_order}",
            alpha.order()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::LqNorm;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(1, 1.0, 5).is_err());
        assert!(Grid::new(1, 1.0, 2).is_err());
        assert!(Grid::new(0, 1.0, 8).is_err());
        assert!(Grid::new(4, 1.0, 8).is_err());
        assert!(Grid::new(1, -1.0, 8).is_err());
    }

    #[test]
    fn frequency_nodes_are_centered() {
        let g = Grid::new(1, 4.0, 8).unwrap();
        assert_eq!(g.freq(4), 0.0);
        assert!((g.freq(0) + 4.0 * PI / 4.0).abs() < 1e-15);
        assert!((g.freq(7) - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(g.coord(0), -4.0);
        assert_eq!(g.coord(4), 0.0);
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = Grid::new(2, 3.0, 8).unwrap();
        let f = Field::zeros(g, 2, Domain::Physical);
        assert!(f.forward_ft().unwrap().is_zero());
        let z = Field::zeros(g, 2, Domain::Frequency);
        assert!(z.inverse_ft().unwrap().is_zero());
    }

    #[test]
    fn wrong_domain_is_a_usage_error() {
        let g = Grid::new(1, 3.0, 8).unwrap();
        let f = Field::zeros(g, 1, Domain::Frequency);
        assert!(matches!(f.forward_ft(), Err(Error::Usage(_))));
        let p = Field::zeros(g, 1, Domain::Physical);
        assert!(matches!(p.inverse_ft(), Err(Error::Usage(_))));
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let g = Grid::new(1, 3.0, 4).unwrap();
        let mut v = vec![c(0.0); 4];
        v[2] = c(f64::NAN);
        assert!(matches!(
            Field::new(g, 1, Domain::Physical, v),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn spike_roundtrip() {
        let g = Grid::new(1, 2.0, 16).unwrap();
        let mut v = vec![c(0.0); 16];
        v[5] = c(1.0);
        let f = Field::new(g, 1, Domain::Physical, v).unwrap();
        let back = f.forward_ft().unwrap().inverse_ft().unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn forward_matches_direct_sum() {
        let g = Grid::new(2, 2.0, 8).unwrap();
        let f = Field::from_fn(g, 1, |x, out| {
            out[0] = Complex64::new(x[0] * 0.3 + 1.0, x[1] * x[0] - 0.2);
        })
        .unwrap();
        let fhat = f.forward_ft().unwrap();
        let h2 = g.cell_volume();
        for k in [0usize, 9, 27, 63] {
            let xi = g.freq_point(k);
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..g.len() {
                let x = g.point(j);
                let phase = -(xi[0] * x[0] + xi[1] * x[1]);
                s += f.at(j, 0) * Complex64::from_polar(1.0, phase);
            }
            assert!((fhat.at(k, 0) - s * h2).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_zero_order_is_identity() {
        let g = Grid::new(1, 4.0, 32).unwrap();
        let f = Field::from_fn(g, 1, |x, o| o[0] = c((-x[0] * x[0]).exp())).unwrap();
        let d = spectral_derivative(&f, &MultiIndex::zero(1)).unwrap();
        assert_eq!(d, f);
    }

    #[test]
    fn derivative_orders_are_validated() {
        assert!(matches!(MultiIndex::new(&[-1]), Err(Error::Usage(_))));
        let g = Grid::new(1, 4.0, 32).unwrap();
        let f = Field::zeros(g, 1, Domain::Physical);
        assert!(spectral_derivative_bounded(&f, &MultiIndex::new(&[3]).unwrap(), 2).is_err());
        assert!(spectral_derivative(&f, &MultiIndex::new(&[1, 1]).unwrap()).is_err());
    }

    #[test]
    fn all_up_to_counts() {
        assert_eq!(MultiIndex::all_up_to(1, 2).len(), 3);
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(3, 1).len(), 4);
    }

    #[test]
    fn lq_norm_of_constant() {
        let g = Grid::new(1, 2.0, 8).unwrap();
        let f = Field::from_fn(g, 1, |_, o| o[0] = c(2.0)).unwrap();
        let e = LqNorm::new(2.0).unwrap();
        assert!((f.lq_norm(1.0, &e) - 8.0).abs() < 1e-12);
        assert!((f.lq_norm(f64::INFINITY, &e) - 2.0).abs() < 1e-12);
    }
}
