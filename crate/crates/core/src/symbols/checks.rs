//! Numeric verification of multiplier hypotheses on sampled frequencies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::builders::{conv_symbols_unchecked, localized, ConvSpec, PolySymbolSpec};
use super::{difference_step, DerivativeMode, Op, Symbol};
use crate::besov::{besov_norm_fourier, BesovParams};
use crate::dyadic::DyadicSystem;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, MultiIndex};
use crate::jet::Jet;
use crate::space::{log_space, DiagOperator, LqNorm, ValueNorm};

/// A finite set of frequency points at which symbols are examined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreqSampling {
    dim: usize,
    points: Vec<Vec<f64>>,
}

/// Unit directions used by the radial samplings. Off-axis angles keep
/// every coordinate nonzero in two and three dimensions.
fn directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..8)
            .map(|j| {
                let t = (j as f64 + 0.5) * std::f64::consts::PI / 4.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for sx in [-1.0, 1.0] {
                for sy in [-1.0, 1.0] {
                    for sz in [-1.0, 1.0] {
                        let v: Vec<f64> = vec![sx * 0.5, sy * 0.6, sz * 0.6244997998398398];
                        out.push(v);
                    }
                }
            }
            out
        }
    }
}

impl FreqSampling {
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Usage("sampling points have inconsistent dimension".into()));
        }
        Ok(Self { dim, points })
    }

    /// The origin plus `count` log-spaced radii in `[r_min, r_max]` along a
    /// fixed set of directions.
    pub fn radial(dim: usize, r_min: f64, r_max: f64, count: usize) -> Self {
        let mut points = vec![vec![0.0; dim]];
        for r in log_space(r_min, r_max, count) {
            for d in directions(dim) {
                points.push(d.iter().map(|v| v * r).collect());
            }
        }
        Self { dim, points }
    }

    /// Radii `1e-3..1e4`, 20 per decade.
    pub fn standard(dim: usize) -> Self {
        Self::radial(dim, 1e-3, 1e4, 141)
    }

    /// Every frequency node of `grid`.
    pub fn from_grid(grid: &Grid) -> Self {
        Self {
            dim: grid.dim(),
            points: grid.freq_points(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dim(m: &Symbol, s: &FreqSampling) -> Result<()> {
    if m.dim() != s.dim() {
        return Err(Error::Usage(format!(
            "symbol {} has dimension {}, sampling has {}",
            m.name(),
            m.dim(),
            s.dim()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SupReport {
    pub sup: f64,
    pub argmax: Vec<f64>,
    pub points: usize,
}

/// `sup_ξ ‖m(ξ)‖` over the sampling.
pub fn symbol_sup(m: &Symbol, sampling: &FreqSampling, q: f64) -> Result<SupReport> {
    check_dim(m, sampling)?;
    let vals: Vec<Result<f64>> = sampling
        .points()
        .par_iter()
        .map(|xi| m.norm_at(xi, q))
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, v) in vals.into_iter().enumerate() {
        let v = v?;
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(SupReport {
        sup: best.0.max(0.0),
        argmax: sampling.points()[best.1].clone(),
        points: sampling.len(),
    })
}

/// Mikhlin order `⌈N(1/η - 1/p′)⌉ + 1` for Fourier type `p ∈ [1, 2]`.
pub fn mikhlin_order(dim: usize, p: f64, eta: f64) -> usize {
    let inv_pp = 1.0 - 1.0 / p;
    let v = dim as f64 * (1.0 / eta - inv_pp);
    let r = v.round();
    let c = if (v - r).abs() < 1e-9 { r } else { v.ceil() };
    c.max(0.0) as usize + 1
}

#[derive(Debug, Clone, Serialize)]
pub struct MikhlinReport {
    pub constant: f64,
    pub order: usize,
    pub worst_xi: Vec<f64>,
    pub worst_beta: String,
    pub mode: DerivativeMode,
    /// Largest relative analytic-vs-difference mismatch over the spot checks.
    pub difference_mismatch: f64,
    pub difference_checks: usize,
}

/// Relative mismatch tolerated between analytic and difference derivatives.
pub const DERIVATIVE_CONSISTENCY: f64 = 1e-4;

/// `max_{|β| ≤ order} sup_ξ (1+|ξ|)^{|β|} ‖D^β m(ξ)‖`.
///
/// Analytic derivatives are spot-checked against central differences at
/// up to 24 sampled points away from coordinate hyperplanes; a mismatch
/// above [`DERIVATIVE_CONSISTENCY`] is a numeric error.
pub fn mikhlin_constant(
    m: &Symbol,
    order: usize,
    sampling: &FreqSampling,
    q: f64,
) -> Result<MikhlinReport> {
    check_dim(m, sampling)?;
    let per_point: Vec<Result<(f64, String)>> = sampling
        .points()
        .par_iter()
        .map(|xi| {
            let w = 1.0 + norm2(xi);
            let mut best = (0.0f64, String::new());
            for (beta, d) in m.derivatives(xi, order)? {
                let v = w.powi(beta.order() as i32) * d.norm(q);
                if v > best.0 || best.1.is_empty() {
                    best = (v.max(best.0), beta.to_string());
                }
            }
            Ok(best)
        })
        .collect();
    let mut constant = 0.0;
    let mut worst = (0usize, String::new());
    for (i, r) in per_point.into_iter().enumerate() {
        let (v, b) = r?;
        if v > constant || worst.1.is_empty() {
            constant = v.max(constant);
            worst = (i, b);
        }
    }
    let (difference_mismatch, difference_checks) = if m.mode() == DerivativeMode::Analytic {
        difference_spot_check(m, order.min(2), sampling, q)?
    } else {
        (0.0, 0)
    };
    Ok(MikhlinReport {
        constant,
        order,
        worst_xi: sampling.points().get(worst.0).cloned().unwrap_or_default(),
        worst_beta: worst.1,
        mode: m.mode(),
        difference_mismatch,
        difference_checks,
    })
}

/// Compares analytic derivatives against central differences on a spread
/// of sampled points; returns the largest relative mismatch and the count.
pub fn difference_spot_check(
    m: &Symbol,
    order: usize,
    sampling: &FreqSampling,
    q: f64,
) -> Result<(f64, usize)> {
    let fd = m.clone().with_mode(DerivativeMode::CentralDifference);
    let eligible: Vec<&Vec<f64>> = sampling
        .points()
        .iter()
        .filter(|xi| xi.iter().all(|v| v.abs() > 10.0 * difference_step(xi)))
        .collect();
    let stride = (eligible.len() / 24).max(1);
    let chosen: Vec<&Vec<f64>> = eligible.into_iter().step_by(stride).collect();
    let results: Vec<Result<f64>> = chosen
        .par_iter()
        .map(|xi| {
            let w = 1.0 + norm2(xi);
            let analytic = m.derivatives(xi, order)?;
            let scale = analytic
                .iter()
                .map(|(b, d)| w.powi(b.order() as i32) * d.norm(q))
                .fold(0.0, f64::max);
            let mut worst = 0.0f64;
            for (b, a) in &analytic {
                let f = fd.difference_derivative(xi, b)?;
                let diff = w.powi(b.order() as i32) * a.sub(&f).max_entry();
                if scale > 0.0 {
                    worst = worst.max(diff / scale);
                } else if diff > 0.0 {
                    worst = f64::INFINITY;
                }
            }
            Ok(worst)
        })
        .collect();
    let mut worst = 0.0f64;
    for (i, r) in results.into_iter().enumerate() {
        let v = r?;
        if v > DERIVATIVE_CONSISTENCY {
            return Err(Error::Numeric(format!(
                "analytic and difference derivatives of {} disagree by {v:.2e} at ξ = {:?}",
                m.name(),
                chosen[i]
            )));
        }
        worst = worst.max(v);
    }
    Ok((worst, chosen.len()))
}

#[derive(Debug, Clone, Serialize)]
pub struct HormanderReport {
    pub constant: f64,
    /// `max_α (∫_{|t|≤2} ‖D^α m‖^p)^{1/p}`.
    pub inner: f64,
    /// `(R, max_α R^{|α|} (R^{-N} ∫_{R≤|t|≤4R} ‖D^α m‖^p)^{1/p})`.
    pub annuli: Vec<(f64, f64)>,
    pub skipped: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Dyadic radii `2^j`, `j ≥ 0`, whose annuli fit on `grid`.
pub fn default_radii(grid: &Grid) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = 1.0;
    while 4.0 * r <= grid.max_freq() {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// Annulus-averaged derivative bounds, integrated by summation over the
/// frequency nodes of `grid`. Annuli outside the band or thinner than
/// eight node spacings are skipped with a warning.
pub fn hormander_constant(
    m: &Symbol,
    p: f64,
    order: usize,
    radii: &[f64],
    grid: &Grid,
    q: f64,
) -> Result<HormanderReport> {
    if m.dim() != grid.dim() {
        return Err(Error::Usage("symbol and grid dimensions differ".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Config(format!("integrability p must be ≥ 1, got {p}")));
    }
    let pts = grid.freq_points();
    let rmax = radii.iter().fold(2.0f64, |a, &r| a.max(4.0 * r));
    let betas = MultiIndex::all_up_to(grid.dim(), order);
    // ‖D^β m‖ at every node within the outermost annulus.
    let table: Vec<Result<Option<Vec<f64>>>> = pts
        .par_iter()
        .map(|xi| {
            if norm2(xi) > rmax {
                return Ok(None);
            }
            let ds = m.derivatives(xi, order)?;
            Ok(Some(ds.iter().map(|(_, d)| d.norm(q)).collect()))
        })
        .collect();
    let table: Vec<Option<Vec<f64>>> = table.into_iter().collect::<Result<_>>()?;
    let w = grid.freq_cell_volume();
    let dim = grid.dim() as f64;
    let integrate = |lo: f64, hi: f64, bi: usize| -> f64 {
        let mut acc = 0.0f64;
        for (xi, row) in pts.iter().zip(&table) {
            let r = norm2(xi);
            if r < lo || r > hi {
                continue;
            }
            let v = row.as_ref().map_or(0.0, |row| row[bi]);
            if p.is_infinite() {
                acc = acc.max(v);
            } else {
                acc += v.powf(p) * w;
            }
        }
        if p.is_infinite() {
            acc
        } else {
            acc.powf(1.0 / p)
        }
    };
    let inner = (0..betas.len()).map(|bi| integrate(0.0, 2.0, bi)).fold(0.0, f64::max);
    let mut annuli = Vec::new();
    let mut skipped = Vec::new();
    let mut warnings = Vec::new();
    for &r in radii {
        if 4.0 * r > grid.max_freq() || 3.0 * r < 8.0 * grid.freq_spacing() {
            skipped.push(r);
            warnings.push(format!("annulus R = {r} is not resolved on the grid; skipped"));
            continue;
        }
        let norm = if p.is_infinite() { 1.0 } else { r.powf(-dim / p) };
        let v = betas
            .iter()
            .enumerate()
            .map(|(bi, b)| r.powi(b.order() as i32) * norm * integrate(r, 4.0 * r, bi))
            .fold(0.0, f64::max);
        annuli.push((r, v));
    }
    let constant = annuli.iter().fold(inner, |a, &(_, v)| a.max(v));
    Ok(HormanderReport {
        constant,
        inner,
        annuli,
        skipped,
        warnings,
    })
}

/// Box on which symbols are sampled as functions of `t ∈ R^N` for the
/// Besov-norm conditions.
pub fn default_symbol_grid(dim: usize) -> Result<Grid> {
    match dim {
        1 => Grid::new(1, 16.0, 4096),
        2 => Grid::new(2, 16.0, 256),
        _ => Grid::new(3, 16.0, 32),
    }
}

/// `2^{j/per_octave}` for `j` in `[lo, hi]`, closed under doubling when
/// both ends are.
pub fn dyadic_dilations(lo: i32, hi: i32, per_octave: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powf(j as f64 / per_octave as f64)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MpEtaReport {
    pub value: f64,
    pub argmin: f64,
    pub smoothness: f64,
    pub evaluated: Vec<(f64, f64)>,
    pub skipped: Vec<f64>,
}

/// Diagonal symbols are measured in the largest entry, dense ones in the
/// Frobenius envelope of the operator norm.
fn entry_norm(m: &Symbol, sample: &Op) -> Box<dyn ValueNorm> {
    let _ = m;
    match sample {
        Op::Diag(_) => Box::new(LqNorm::new(f64::INFINITY).expect("valid index")),
        Op::Dense(_) => Box::new(LqNorm::new(2.0).expect("valid index")),
    }
}

fn sample_symbol(m: &Symbol, a: f64, grid: &Grid) -> Result<Field> {
    let probe = m.eval(&vec![0.0; m.dim()])?;
    let comps = match &probe {
        Op::Diag(d) => d.len(),
        Op::Dense(x) => x.len(),
    };
    let dim = grid.dim();
    let values: Vec<Result<Op>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.point(i);
            let xi: Vec<f64> = t[..dim].iter().map(|v| v * a).collect();
            m.eval(&xi)
        })
        .collect();
    let mut flat = Vec::with_capacity(grid.len() * comps);
    for v in values {
        match v? {
            Op::Diag(d) => flat.extend(d),
            Op::Dense(x) => flat.extend(x.transpose().iter().copied()),
        }
    }
    Field::new(*grid, comps, crate::grid::Domain::Physical, flat)
}

/// Largest unresolved spectral fraction accepted for a dilated sample.
pub const DILATION_REMAINDER: f64 = 1e-4;

/// Whether a sampled dilation fits the box: constant, or negligible at the
/// boundary, and with at most [`DILATION_REMAINDER`] of its `L_p` mass
/// above the resolved band.
fn fits_box(f: &Field, remainder: f64) -> bool {
    let max = f.max_abs();
    if max == 0.0 {
        return true;
    }
    let first = f.node(0).to_vec();
    let constant = (0..f.grid().len()).all(|i| {
        f.node(i)
            .iter()
            .zip(&first)
            .all(|(a, b)| (a - b).norm() <= 1e-12 * max)
    });
    constant || (f.boundary_max() <= 1e-6 * max && remainder <= DILATION_REMAINDER)
}

/// `min_a ‖m(a·)‖_{B^{N(1/η - 1/p′)}_{p,1}}` over the sampled dilations.
///
/// The symbol is sampled on the box of `grid` as a function of `t`.
/// Dilations that do not fit the box are skipped.
pub fn mp_eta_constant(
    m: &Symbol,
    p: f64,
    eta: f64,
    dilations: &[f64],
    grid: &Grid,
) -> Result<MpEtaReport> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Config(format!("Fourier type p must lie in [1, 2], got {p}")));
    }
    if !(eta >= 1.0) {
        return Err(Error::Config(format!("η must be ≥ 1, got {eta}")));
    }
    if m.dim() != grid.dim() {
        return Err(Error::Usage("symbol and grid dimensions differ".into()));
    }
    let smoothness = grid.dim() as f64 * (1.0 / eta - (1.0 - 1.0 / p));
    let params = BesovParams::new(p, 1.0, smoothness)?;
    let sys = DyadicSystem::new(*grid);
    let e = entry_norm(m, &m.eval(&vec![0.0; m.dim()])?);
    let mut evaluated = Vec::new();
    let mut skipped = Vec::new();
    for &a in dilations {
        let f = sample_symbol(m, a, grid)?;
        let n = besov_norm_fourier(&f, &params, &sys, e.as_ref())?;
        if !fits_box(&f, n.remainder_fraction) {
            skipped.push(a);
        } else {
            evaluated.push((a, n.norm));
        }
    }
    if evaluated.is_empty() {
        return Err(Error::Config(format!(
            "every dilation of {} overflows the symbol grid",
            m.name()
        )));
    }
    let (argmin, value) = evaluated
        .iter()
        .copied()
        .fold((0.0, f64::INFINITY), |b, (a, v)| if v < b.1 { (a, v) } else { b });
    Ok(MpEtaReport {
        value,
        argmin,
        smoothness,
        evaluated,
        skipped,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockwiseReport {
    pub constant: f64,
    pub per_block: Vec<MpEtaReport>,
}

/// Base dilations `b` for the localized symbols: block `k ≥ 1` uses
/// `a = 2^k b`, which maps `supp φ_k` onto `1/(2b) ≤ |t| ≤ 2/b`. The range
/// keeps that annulus inside three quarters of the box and at least four
/// nodes away from the origin.
pub fn block_dilations(grid: &Grid) -> Vec<f64> {
    let lo = 2.0 / (0.75 * grid.half_width());
    let hi = 1.0 / (8.0 * grid.spacing());
    let jlo = (4.0 * lo.log2()).ceil() as i32;
    let jhi = (4.0 * hi.log2()).floor() as i32;
    dyadic_dilations(jlo, jhi.max(jlo), 4)
}

/// `sup_{k ≤ K} M_{p,η}(φ_k m)`.
pub fn blockwise_condition(
    m: &Symbol,
    p: f64,
    eta: f64,
    k_max: i64,
    grid: &Grid,
) -> Result<BlockwiseReport> {
    let base = block_dilations(grid);
    let mut per_block = Vec::new();
    for k in 0..=k_max {
        let scale = if k == 0 { 1.0 } else { 2f64.powi(k as i32) };
        let dil: Vec<f64> = base.iter().map(|b| b * scale).collect();
        per_block.push(mp_eta_constant(&localized(m, k), p, eta, &dil, grid)?);
    }
    let constant = per_block.iter().fold(0.0f64, |a, r| a.max(r.value));
    Ok(BlockwiseReport { constant, per_block })
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub constant: f64,
    /// `(k, max_α ‖D^α m_k‖_{L_u(window)})`.
    pub per_block: Vec<(i64, f64)>,
}

/// Windowed `L_u` norms of `D^α m` on `I_0 = {|t| ≤ 2}` and of
/// `D^α m_k`, `m_k = m(2^{k-1}·)`, on `I_1 = {1 ≤ |t| ≤ 4}`.
/// Integrals are node sums with spacing `step` on `[-4, 4]^N`.
pub fn lemma212_windows(m: &Symbol, l: usize, u: f64, k_max: i64, step: f64) -> Result<WindowReport> {
    if !(u >= 1.0) {
        return Err(Error::Config(format!("window exponent u must be ≥ 1, got {u}")));
    }
    let dim = m.dim();
    let per_axis = (8.0 / step).round() as usize;
    let total = per_axis.pow(dim as u32);
    let nodes: Vec<Vec<f64>> = (0..total)
        .map(|mut i| {
            let mut t = vec![0.0; dim];
            for slot in t.iter_mut().rev() {
                *slot = -4.0 + (i % per_axis) as f64 * step + 0.5 * step;
                i /= per_axis;
            }
            t
        })
        .collect();
    let w = step.powi(dim as i32);
    let mut per_block = Vec::new();
    for k in 0..=k_max {
        let (lo, hi, scale) = if k == 0 { (0.0, 2.0, 1.0) } else { (1.0, 4.0, 2f64.powi(k as i32 - 1)) };
        let window: Vec<&Vec<f64>> = nodes
            .iter()
            .filter(|t| {
                let r = norm2(t);
                r >= lo && r <= hi
            })
            .collect();
        let rows: Vec<Result<Vec<(usize, f64)>>> = window
            .par_iter()
            .map(|t| {
                let xi: Vec<f64> = t.iter().map(|v| v * scale).collect();
                Ok(m
                    .derivatives(&xi, l)?
                    .into_iter()
                    .map(|(b, d)| (b.order(), scale.powi(b.order() as i32) * d.norm(2.0)))
                    .collect())
            })
            .collect();
        let rows: Vec<Vec<(usize, f64)>> = rows.into_iter().collect::<Result<_>>()?;
        let nb = rows.first().map_or(0, |r| r.len());
        let mut best = 0.0f64;
        for bi in 0..nb {
            let v = if u.is_infinite() {
                rows.iter().fold(0.0f64, |a, r| a.max(r[bi].1))
            } else {
                (rows.iter().map(|r| r[bi].1.powf(u)).sum::<f64>() * w).powf(1.0 / u)
            };
            best = best.max(v);
        }
        per_block.push((k, best));
    }
    let constant = per_block.iter().fold(0.0f64, |a, &(_, v)| a.max(v));
    Ok(WindowReport { constant, per_block })
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    /// `inf_{ξ ≠ 0} |L(ξ)| / Σ_k |ξ_k|^{2l}` over the sampling.
    pub k_hat: f64,
    /// Smallest log-log slope of that ratio over the top sampled decade.
    pub decay_exponent: f64,
    pub sector_ok: bool,
    pub worst_xi: Vec<f64>,
    pub elliptic: bool,
}

fn in_sector(z: Complex64, phi: f64) -> bool {
    z.norm() == 0.0 || z.arg().abs() <= phi + 1e-12
}

/// Slope of `ln ratio` against `ln |ξ|` along each direction over the
/// largest decade of radii; the minimum over directions.
fn top_decade_slope(pts: &[(Vec<f64>, f64)]) -> f64 {
    let rmax = pts.iter().fold(0.0f64, |a, (x, _)| a.max(norm2(x)));
    if rmax == 0.0 {
        return 0.0;
    }
    let mut by_dir: Vec<(Vec<f64>, Vec<(f64, f64)>)> = Vec::new();
    for (x, v) in pts {
        let r = norm2(x);
        if r < 0.1 * rmax || !(*v > 0.0) {
            continue;
        }
        let dir: Vec<f64> = x.iter().map(|c| (c / r * 1e6).round()).collect();
        match by_dir.iter_mut().find(|(d, _)| *d == dir) {
            Some((_, list)) => list.push((r.ln(), v.ln())),
            None => by_dir.push((dir, vec![(r.ln(), v.ln())])),
        }
    }
    by_dir
        .iter()
        .filter(|(_, l)| l.len() >= 2)
        .map(|(_, l)| crate::space::slope(l))
        .fold(f64::INFINITY, f64::min)
        .min(f64::MAX)
}

/// Scans `L(ξ)` for the ellipticity bound and sector membership.
pub fn ellipticity_check(spec: &PolySymbolSpec, phi1: f64, sampling: &FreqSampling) -> EllipticityReport {
    let two_l = spec.order() as i32;
    let mut k_hat = f64::INFINITY;
    let mut worst = vec![0.0; spec.dim()];
    let mut sector_ok = true;
    let mut ratios = Vec::new();
    for xi in sampling.points() {
        let lv = spec.eval(xi);
        if !in_sector(lv, phi1) {
            if sector_ok {
                worst = xi.clone();
            }
            sector_ok = false;
        }
        let denom: f64 = xi.iter().map(|v| v.abs().powi(two_l)).sum();
        if denom == 0.0 {
            continue;
        }
        let r = lv.norm() / denom;
        ratios.push((xi.clone(), r));
        if r < k_hat {
            k_hat = r;
            if sector_ok {
                worst = xi.clone();
            }
        }
    }
    if !k_hat.is_finite() {
        k_hat = 0.0;
    }
    let decay_exponent = top_decade_slope(&ratios);
    let decay_exponent = if decay_exponent.is_finite() { decay_exponent } else { 0.0 };
    EllipticityReport {
        k_hat,
        decay_exponent,
        sector_ok,
        worst_xi: worst,
        elliptic: k_hat > 1e-12 && decay_exponent > -0.05,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition51Report {
    /// `inf_{ξ ≠ 0} |L(ξ)| / (|ξ|^l Σ_k |â_k(ξ)|)`.
    pub c_hat: f64,
    pub sector_ok: bool,
    pub worst_xi: Vec<f64>,
    /// Closed-form `‖a_k‖_{L_1}`.
    pub kernel_l1: Vec<f64>,
}

impl Condition51Report {
    pub fn holds(&self) -> bool {
        self.c_hat > 1e-12 && self.sector_ok && self.kernel_l1.iter().all(|v| v.is_finite())
    }
}

/// Scans the kernel condition on `L(ξ) = Σ_k â_k(ξ)(iξ)^k`. Nodes where all
/// kernel transforms underflow are skipped.
pub fn condition51_check(spec: &ConvSpec, phi1: f64, sampling: &FreqSampling) -> Condition51Report {
    let kernel_l1 = spec.kernels().iter().map(|k| k.l1_norm()).collect();
    if spec.kernels().iter().all(|k| k.is_zero()) {
        return Condition51Report {
            c_hat: 0.0,
            sector_ok: true,
            worst_xi: vec![0.0],
            kernel_l1,
        };
    }
    let l = spec.order() as i32;
    let mut c_hat = f64::INFINITY;
    let mut worst = vec![0.0];
    let mut sector_ok = true;
    for xi in sampling.points() {
        let x = xi[0];
        let lv = spec.l_eval(x);
        if !in_sector(lv, phi1) {
            if sector_ok {
                worst = xi.clone();
            }
            sector_ok = false;
        }
        let mass = spec.kernel_mass(x);
        if x == 0.0 || mass < 1e-200 {
            continue;
        }
        let r = lv.norm() / (x.abs().powi(l) * mass);
        if r < c_hat {
            c_hat = r;
            if sector_ok {
                worst = xi.clone();
            }
        }
    }
    Condition51Report {
        c_hat: if c_hat.is_finite() { c_hat } else { 0.0 },
        sector_ok,
        worst_xi: worst,
        kernel_l1,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeBoundsReport {
    /// `sup |â^{(m)}/â|`, `m = 0, 1, 2`.
    pub profile_ratio: [f64; 3],
    /// `sup_k |ξ^m â_k|`.
    pub xi_power_kernel: [f64; 3],
    /// `sup_k |â_k^{(m)}|`.
    pub kernel_derivative: [f64; 3],
    /// `sup_k |ξ^m â_k^{(m)}|`.
    pub xi_power_kernel_derivative: [f64; 3],
    /// `sup_{ξ, λ} ‖|ξ|^m d^m σ_i‖` indexed `[i][m]`.
    pub weighted_symbol: [[f64; 3]; 3],
    /// The same per sampled `λ`.
    pub per_lambda: Vec<(Complex64, [[f64; 3]; 3])>,
}

/// Measures the kernel-derivative quantities and the weighted derivatives
/// of `σ_0, σ_1, σ_2` over the sampling and a `λ` sweep bounded away from 0.
pub fn derivative_bounds_check(
    spec: &ConvSpec,
    a: &DiagOperator,
    lambdas: &[Complex64],
    sampling: &FreqSampling,
) -> Result<DerivativeBoundsReport> {
    if sampling.dim() != 1 {
        return Err(Error::Usage("convolution symbols are one-dimensional".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(l.norm() > 0.0)) {
        return Err(Error::Config(format!(
            "the λ sweep must stay away from 0 (found λ = {l}); choose λ₀ > 0"
        )));
    }
    let mut profile_ratio = [0.0f64; 3];
    let mut xi_power_kernel = [0.0f64; 3];
    let mut kernel_derivative = [0.0f64; 3];
    let mut xi_power_kernel_derivative = [0.0f64; 3];
    for xi in sampling.points() {
        let x = &Jet::point(xi, 2)[0];
        let ah = spec.profile().jet(x);
        let a0 = ah.value();
        for m in 0..3 {
            let xm = xi[0].abs().powi(m as i32);
            profile_ratio[m] = profile_ratio[m].max((ah.derivative(&[m]) / a0).norm());
            for k in spec.kernels() {
                let kj = k.transform_jet(x);
                xi_power_kernel[m] = xi_power_kernel[m].max(xm * kj.value().norm());
                kernel_derivative[m] = kernel_derivative[m].max(kj.derivative(&[m]).norm());
                xi_power_kernel_derivative[m] =
                    xi_power_kernel_derivative[m].max(xm * kj.derivative(&[m]).norm());
            }
        }
    }
    let per_lambda: Vec<Result<(Complex64, [[f64; 3]; 3])>> = lambdas
        .par_iter()
        .map(|&lam| {
            let s = conv_symbols_unchecked(spec, a, lam);
            let mut table = [[0.0f64; 3]; 3];
            for (i, sym) in [&s.sigma0, &s.sigma1, &s.sigma2].into_iter().enumerate() {
                for xi in sampling.points() {
                    let j = sym.jet(xi, 2)?;
                    for m in 0..3 {
                        let v = xi[0].abs().powi(m as i32) * j.derivative(&[m]).norm(a.q());
                        table[i][m] = table[i][m].max(v);
                    }
                }
            }
            Ok((lam, table))
        })
        .collect();
    let per_lambda: Vec<(Complex64, [[f64; 3]; 3])> = per_lambda.into_iter().collect::<Result<_>>()?;
    let mut weighted_symbol = [[0.0f64; 3]; 3];
    for (_, t) in &per_lambda {
        for i in 0..3 {
            for m in 0..3 {
                weighted_symbol[i][m] = weighted_symbol[i][m].max(t[i][m]);
            }
        }
    }
    Ok(DerivativeBoundsReport {
        profile_ratio,
        xi_power_kernel,
        kernel_derivative,
        xi_power_kernel_derivative,
        weighted_symbol,
        per_lambda,
    })
}
