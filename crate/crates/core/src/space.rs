//! The coefficient space `E = l_q` truncated to `M` components, the diagonal
//! positive operator `A = diag(d_m)`, sectors, resolvents, fractional powers
//! and graph norms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::Serialize;

use crate::error::{Error, Result};

/// A norm on component vectors of a field.
pub trait ValueNorm: Send + Sync {
    fn norm(&self, v: &[Complex64]) -> f64;
}

/// Plain `l_q` norm of a finite complex vector, `q ∈ [1, ∞]`.
pub fn lq(v: &[Complex64], q: f64) -> f64 {
    if q.is_infinite() {
        v.iter().fold(0.0, |m, z| m.max(z.norm()))
    } else if q == 1.0 {
        v.iter().map(|z| z.norm()).sum()
    } else if q == 2.0 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    } else {
        v.iter().map(|z| z.norm().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Unweighted `l_q` norm on the components, `q ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LqNorm {
    q: f64,
}

impl LqNorm {
    pub fn new(q: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::Config(format!("norm index must be in [1, inf], got {q}")));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

impl ValueNorm for LqNorm {
    fn norm(&self, v: &[Complex64]) -> f64 {
        lq(v, self.q)
    }
}

/// Truncated `l_q(D)` with weights `d_1..d_M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceSpace {
    q: f64,
    weights: Vec<f64>,
    generator: Option<String>,
}

impl SequenceSpace {
    pub fn new(q: f64, weights: Vec<f64>) -> Result<Self> {
        if !(q > 1.0 && q < f64::INFINITY) {
            return Err(Error::Config(format!(
                "sequence space index q must lie in (1, inf), got {q}"
            )));
        }
        if weights.is_empty() {
            return Err(Error::Config("sequence space needs at least one weight".into()));
        }
        if let Some((m, d)) = weights
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d > 0.0))
        {
            return Err(Error::Config(format!(
                "weight d_{} = {d} is not strictly positive",
                m + 1
            )));
        }
        Ok(Self {
            q,
            weights,
            generator: None,
        })
    }

    /// Builds weights `d_m = g(m)` for `m = 1..=truncation`.
    pub fn from_generator<F>(q: f64, truncation: usize, label: &str, g: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let weights = (1..=truncation)
            .map(|m| g(m as f64))
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::new(q, weights)?;
        s.generator = Some(label.to_string());
        Ok(s)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn truncation(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn generator(&self) -> Option<&str> {
        self.generator.as_deref()
    }

    /// `(Σ |d_m u_m|^q)^{1/q}` when weighted, else `(Σ |u_m|^q)^{1/q}`.
    pub fn lq_norm(&self, u: &[Complex64], weighted: bool) -> Result<f64> {
        if u.len() != self.weights.len() {
            return Err(Error::Data(format!(
                "vector has {} entries, space has {}",
                u.len(),
                self.weights.len()
            )));
        }
        if weighted {
            let du: Vec<Complex64> = u.iter().zip(&self.weights).map(|(x, d)| x * d).collect();
            Ok(lq(&du, self.q))
        } else {
            Ok(lq(u, self.q))
        }
    }

    /// The operator `A = diag(d_m)` on this space.
    pub fn operator(&self) -> DiagOperator {
        DiagOperator {
            q: self.q,
            entries: self.weights.clone(),
            shift: 0.0,
        }
    }

    /// Evidence for `Σ d_m^{-1} < ∞` from the truncated weights.
    pub fn summability(&self) -> Summability {
        summability(&self.weights)
    }
}

impl ValueNorm for SequenceSpace {
    fn norm(&self, v: &[Complex64]) -> f64 {
        lq(v, self.q)
    }
}

/// Partial sums of `1/d_m` and the fitted growth exponent of `d_m` over the
/// upper half of the truncation. An exponent above 1 certifies the trend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summability {
    pub partial_sum: f64,
    pub growth_exponent: f64,
    pub certified: bool,
}

pub fn summability(weights: &[f64]) -> Summability {
    let partial_sum = weights.iter().map(|d| 1.0 / d).sum();
    let m = weights.len();
    let lo = (m / 2).max(1);
    let growth_exponent = if m >= 4 {
        let pts: Vec<(f64, f64)> = (lo..=m)
            .map(|i| ((i as f64).ln(), weights[i - 1].ln()))
            .collect();
        slope(&pts)
    } else {
        f64::NAN
    };
    Summability {
        partial_sum,
        growth_exponent,
        certified: growth_exponent > 1.0,
    }
}

/// Least-squares slope of `(x, y)` pairs.
pub fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `A = diag(d_m) + shift` acting on truncated `l_q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagOperator {
    q: f64,
    entries: Vec<f64>,
    shift: f64,
}

impl DiagOperator {
    pub fn new(q: f64, entries: Vec<f64>) -> Result<Self> {
        Ok(SequenceSpace::new(q, entries)?.operator())
    }

    pub fn identity(q: f64, m: usize) -> Result<Self> {
        Self::new(q, vec![1.0; m])
    }

    /// Adds `a` to every diagonal entry.
    pub fn shifted(&self, a: f64) -> Result<Self> {
        let out = Self {
            q: self.q,
            entries: self.entries.clone(),
            shift: self.shift + a,
        };
        if let Some(m) = out.diagonal().iter().position(|d| !(*d > 0.0)) {
            return Err(Error::Config(format!(
                "shift {a} makes entry {} non-positive",
                m + 1
            )));
        }
        Ok(out)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Effective diagonal `d_m + shift`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.iter().map(|d| d + self.shift).collect()
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        u.iter()
            .zip(self.diagonal())
            .map(|(x, d)| x * d)
            .collect()
    }

    /// Diagonal of `(A + λ)^{-1}`.
    pub fn resolvent(&self, lambda: Complex64) -> Result<DiagMap> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (m, d) in self.diagonal().into_iter().enumerate() {
            let z = d + lambda;
            if z.norm() < 1e-300 {
                return Err(Error::Domain(format!(
                    "d_{} + lambda vanishes at lambda = {lambda}",
                    m + 1
                )));
            }
            entries.push(z.inv());
        }
        Ok(DiagMap { entries })
    }

    /// `A^θ = diag(d_m^θ)`.
    pub fn frac_power(&self, theta: f64) -> DiagOperator {
        DiagOperator {
            q: self.q,
            entries: self.diagonal().iter().map(|d| d.powf(theta)).collect(),
            shift: 0.0,
        }
    }

    /// `(‖u‖^p + ‖A^θ u‖^p)^{1/p}` in `l_q`.
    pub fn graph_norm(&self, u: &[Complex64], theta: f64, p: f64) -> f64 {
        GraphNorm::new(self, theta, p).norm(u)
    }

    /// Operator norm on `l_q`; for a diagonal map this is the largest entry.
    pub fn op_norm(&self) -> f64 {
        self.diagonal().iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Diagonal complex map, e.g. a resolvent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagMap {
    pub entries: Vec<Complex64>,
}

impl DiagMap {
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        u.iter().zip(&self.entries).map(|(x, d)| x * d).collect()
    }

    /// Operator norm on any `l_q`: `max_m |entry_m|`.
    pub fn op_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, d| m.max(d.norm()))
    }
}

/// The graph norm of `E(A^θ)` as a [`ValueNorm`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphNorm {
    q: f64,
    power: Vec<f64>,
    p: f64,
}

impl GraphNorm {
    pub fn new(a: &DiagOperator, theta: f64, p: f64) -> Self {
        Self {
            q: a.q,
            power: a.frac_power(theta).entries,
            p,
        }
    }
}

impl ValueNorm for GraphNorm {
    fn norm(&self, v: &[Complex64]) -> f64 {
        let a = lq(v, self.q);
        let av: Vec<Complex64> = v.iter().zip(&self.power).map(|(x, d)| x * d).collect();
        let b = lq(&av, self.q);
        if self.p.is_infinite() {
            a.max(b)
        } else {
            (a.powf(self.p) + b.powf(self.p)).powf(1.0 / self.p)
        }
    }
}

/// The closed sector `{|arg λ| ≤ φ} ∪ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sector {
    angle: f64,
}

impl Sector {
    pub fn new(angle: f64) -> Result<Self> {
        if !(0.0..PI).contains(&angle) {
            return Err(Error::Config(format!(
                "sector angle must lie in [0, pi), got {angle}"
            )));
        }
        Ok(Self { angle })
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        lambda == Complex64::new(0.0, 0.0) || lambda.arg().abs() <= self.angle + 1e-14
    }
}

/// Rays times log-spaced magnitudes in a sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSampling {
    pub rays: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub include_zero: bool,
}

impl SectorSampling {
    /// Rays `{-φ, 0, φ}` and 25 log-spaced magnitudes in `[1e-2, 1e4]`.
    pub fn standard(sector: Sector) -> Self {
        Self::new(sector, 1e-2, 1e4, 25)
    }

    pub fn new(sector: Sector, min: f64, max: f64, count: usize) -> Self {
        let phi = sector.angle();
        let rays = if phi == 0.0 { vec![0.0] } else { vec![-phi, 0.0, phi] };
        Self {
            rays,
            magnitudes: log_space(min, max, count),
            include_zero: true,
        }
    }

    /// Same endpoints with `factor` times as many magnitude intervals; the
    /// coarse nodes are reproduced bit for bit.
    pub fn refined(&self, factor: usize) -> Self {
        let n = self.magnitudes.len();
        let (a, b) = (self.magnitudes[0], self.magnitudes[n - 1]);
        Self {
            rays: self.rays.clone(),
            magnitudes: log_space(a, b, (n - 1) * factor + 1),
            include_zero: self.include_zero,
        }
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rays.len() * self.magnitudes.len() + 1);
        if self.include_zero {
            out.push(Complex64::new(0.0, 0.0));
        }
        for &r in &self.rays {
            for &m in &self.magnitudes {
                out.push(Complex64::from_polar(m, r));
            }
        }
        out
    }
}

/// `count` log-spaced values from `a` to `b`, endpoints exact.
pub fn log_space(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let (la, lb) = (a.log10(), b.log10());
    (0..count)
        .map(|i| {
            if i == 0 {
                a
            } else if i == count - 1 {
                b
            } else {
                10f64.powf(la + (lb - la) * (i as f64 / (count - 1) as f64))
            }
        })
        .collect()
}

/// `sup (1 + |λ|) max_m 1/|d_m + λ|` over the sampled sector points. The
/// zero sample is skipped when some `d_m + λ` is close to singular.
pub fn positivity_constant(a: &DiagOperator, sector: Sector, plan: &SectorSampling) -> Result<f64> {
    let _ = sector;
    let mut best = 0.0f64;
    for lambda in plan.points() {
        let singular = a.diagonal().iter().any(|d| (d + lambda).norm() < 1e-12);
        if singular {
            if lambda == Complex64::new(0.0, 0.0) {
                continue;
            }
            return Err(Error::Domain(format!(
                "resolvent is singular at sampled lambda = {lambda}"
            )));
        }
        let scale = 1.0 + lambda.norm();
        for d in a.diagonal() {
            best = best.max(scale / (d + lambda).norm());
        }
    }
    Ok(best)
}

/// Checked constructor for the default positivity scan.
pub fn positivity_constant_default(a: &DiagOperator, sector: Sector) -> Result<f64> {
    positivity_constant(a, sector, &SectorSampling::standard(sector))
}

/// `inf |λ + μ| / (|λ| + |μ|)` over `λ ∈ S_φ`, `μ ∈ S_ψ` sampled on
/// `samples` angles per sector and magnitude ratios in `[1e-3, 1e3]`.
pub fn sector_sum_bound(phi: Sector, psi: Sector, samples: usize) -> Result<f64> {
    if phi.angle() + psi.angle() >= PI {
        return Err(Error::Config(format!(
            "sector angles sum to {} >= pi; no lower bound exists",
            phi.angle() + psi.angle()
        )));
    }
    let samples = samples.max(2);
    let angles = |w: f64| -> Vec<f64> {
        (0..samples)
            .map(|i| -w + 2.0 * w * i as f64 / (samples - 1) as f64)
            .collect()
    };
    let mut ratios = log_space(1e-3, 1e3, 2 * samples + 1);
    ratios.push(1.0);
    let mut best = f64::INFINITY;
    for a in angles(phi.angle()) {
        let l = Complex64::from_polar(1.0, a);
        for b in angles(psi.angle()) {
            for &t in &ratios {
                let m = Complex64::from_polar(t, b);
                best = best.min((l + m).norm() / (1.0 + t));
            }
        }
    }
    Ok(best)
}

/// The exact infimum `cos((φ + ψ) / 2)`.
pub fn sector_sum_closed_form(phi: Sector, psi: Sector) -> f64 {
    ((phi.angle() + psi.angle()) / 2.0).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub x: f64,
    pub sup_ratio: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// `sup ‖A^{1-x}u‖ / (‖Au‖^{1-x} ‖u‖^x)` over probes, norms in `l_q`.
pub fn moment_inequality_check(
    a: &DiagOperator,
    x: f64,
    probes: &[Vec<Complex64>],
) -> Result<MomentReport> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Config(format!("moment exponent must lie in [0, 1], got {x}")));
    }
    let q = a.q();
    let frac = a.frac_power(1.0 - x);
    let mut sup_ratio = 0.0f64;
    let (mut evaluated, mut skipped) = (0, 0);
    for u in probes {
        let nu = lq(u, q);
        if nu == 0.0 {
            skipped += 1;
            continue;
        }
        let lhs = lq(&frac.apply(u), q);
        let rhs = lq(&a.apply(u), q).powf(1.0 - x) * nu.powf(x);
        sup_ratio = sup_ratio.max(lhs / rhs);
        evaluated += 1;
    }
    Ok(MomentReport {
        x,
        sup_ratio,
        evaluated,
        skipped,
    })
}

/// Deterministic random complex vectors with entries of varied scale.
pub fn random_vectors(m: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let s = 10f64.powf(rng.gen_range(-3.0..1.0));
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s
                })
                .collect()
        })
        .collect()
}

/// Operator norm of a dense matrix on `l_q`. Exact for `q ∈ {1, 2, ∞}`;
/// otherwise the interpolation bound `‖T‖_1^{1/q} ‖T‖_∞^{1-1/q}`, which is
/// exact for diagonal matrices.
pub fn dense_operator_norm(mat: &DMatrix<Complex64>, q: f64) -> f64 {
    let col = (0..mat.ncols())
        .map(|j| mat.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let row = (0..mat.nrows())
        .map(|i| mat.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    if q == 1.0 {
        col
    } else if q.is_infinite() {
        row
    } else if q == 2.0 {
        mat.clone().singular_values().iter().fold(0.0, |m, s| m.max(*s))
    } else {
        col.powf(1.0 / q) * row.powf(1.0 - 1.0 / q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_vector_has_unit_norm() {
        for q in [1.5, 2.0, 7.0] {
            let s = SequenceSpace::new(q, vec![3.0, 5.0, 7.0]).unwrap();
            let e1 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
            assert!((s.lq_norm(&e1, false).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_two_component_example() {
        let s = SequenceSpace::new(2.0, vec![1.0, 2.0]).unwrap();
        let u = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!((s.lq_norm(&u, true).unwrap() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn space_validation() {
        assert!(SequenceSpace::new(1.0, vec![1.0]).is_err());
        assert!(SequenceSpace::new(f64::INFINITY, vec![1.0]).is_err());
        assert!(SequenceSpace::new(2.0, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let id = DiagOperator::identity(2.0, 4).unwrap();
        let r = id.resolvent(c(1.0, 0.0)).unwrap();
        assert!(r.entries.iter().all(|e| (e - c(0.5, 0.0)).norm() < 1e-16));
        assert_eq!(r.op_norm(), 0.5);

        let sq = DiagOperator::new(2.0, (1..=10).map(|m| (m * m) as f64).collect()).unwrap();
        assert_eq!(sq.resolvent(c(0.0, 0.0)).unwrap().op_norm(), 1.0);

        let lin = DiagOperator::new(2.0, (1..=30).map(|m| m as f64).collect()).unwrap();
        let lambda = c(0.0, 10.0);
        let brute = (1..=30)
            .map(|m| 1.0 / (m as f64 + lambda).norm())
            .fold(0.0, f64::max);
        assert_eq!(lin.resolvent(lambda).unwrap().op_norm(), brute);
    }

    #[test]
    fn singular_resolvent_names_entry() {
        let a = DiagOperator::new(2.0, vec![1.0, 2.0]).unwrap();
        match a.resolvent(c(-2.0, 0.0)) {
            Err(Error::Domain(msg)) => assert!(msg.contains("d_2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn positivity_of_identity_on_positive_axis_is_one() {
        let id = DiagOperator::identity(2.0, 3).unwrap();
        let s = Sector::new(0.0).unwrap();
        assert_eq!(positivity_constant_default(&id, s).unwrap(), 1.0);
    }

    #[test]
    fn positivity_of_squares_on_right_half_plane() {
        // For d = 1 on the imaginary axis (1+t)/|1+it| peaks at t = 1 with √2.
        let a = DiagOperator::new(2.0, (1..=16).map(|m| (m * m) as f64).collect()).unwrap();
        let s = Sector::new(PI / 2.0).unwrap();
        let plan = SectorSampling::new(s, 1e-2, 1e4, 25);
        let coarse = positivity_constant(&a, s, &plan).unwrap();
        let fine = positivity_constant(&a, s, &plan.refined(40)).unwrap();
        assert!(fine >= coarse);
        assert!((fine - 2f64.sqrt()).abs() < 1e-6);
        assert!(coarse <= 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn sector_angle_validation() {
        assert!(Sector::new(PI).is_err());
        assert!(Sector::new(-0.1).is_err());
        let s = Sector::new(PI / 4.0).unwrap();
        assert!(s.contains(c(0.0, 0.0)));
        assert!(s.contains(c(1.0, 1.0)));
        assert!(!s.contains(c(1.0, 1.01)));
    }

    #[test]
    fn sector_sum_bounds() {
        let z = Sector::new(0.0).unwrap();
        assert!((sector_sum_bound(z, z, 5).unwrap() - 1.0).abs() < 1e-15);
        let q = Sector::new(PI / 4.0).unwrap();
        let m = sector_sum_bound(q, q, 41).unwrap();
        assert!((m - sector_sum_closed_form(q, q)).abs() < 1e-12);
        let wide = Sector::new(0.6 * PI).unwrap();
        assert!(sector_sum_bound(wide, wide, 5).is_err());
    }

    #[test]
    fn frac_power_examples() {
        let a = DiagOperator::new(2.0, vec![4.0, 9.0]).unwrap();
        assert_eq!(a.frac_power(0.0).diagonal(), vec![1.0, 1.0]);
        assert_eq!(a.frac_power(1.0).diagonal(), vec![4.0, 9.0]);
        assert_eq!(a.frac_power(0.5).diagonal(), vec![2.0, 3.0]);
    }

    #[test]
    fn graph_norm_of_identity() {
        let a = DiagOperator::identity(3.0, 3).unwrap();
        let u = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 0.25)];
        for p in [1.0, 2.0, 4.0] {
            let g = a.graph_norm(&u, 0.7, p);
            assert!((g - 2f64.powf(1.0 / p) * lq(&u, 3.0)).abs() < 1e-14);
        }
        assert_eq!(a.graph_norm(&[c(0.0, 0.0); 3], 0.5, 2.0), 0.0);
    }

    #[test]
    fn moment_inequality_basis_and_endpoints() {
        let a = DiagOperator::new(2.0, vec![1.0, 4.0, 9.0]).unwrap();
        let e2 = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let r = moment_inequality_check(&a, 0.3, &[e2]).unwrap();
        assert!((r.sup_ratio - 1.0).abs() < 1e-14);
        let probes = random_vectors(3, 20, 1);
        for x in [0.0, 1.0] {
            let r = moment_inequality_check(&a, x, &probes).unwrap();
            assert!((r.sup_ratio - 1.0).abs() < 1e-14);
        }
        let zero = moment_inequality_check(&a, 0.5, &[vec![c(0.0, 0.0); 3]]).unwrap();
        assert_eq!(zero.skipped, 1);
    }

    #[test]
    fn dense_norm_matches_diagonal_rule() {
        let d = [c(0.5, 0.5), c(-2.0, 0.0), c(0.0, 1.5)];
        let mat = DMatrix::from_fn(3, 3, |i, j| if i == j { d[i] } else { c(0.0, 0.0) });
        let expect = 2.0;
        for q in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert!((dense_operator_norm(&mat, q) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn summability_of_squares() {
        let w: Vec<f64> = (1..=64).map(|m| (m * m) as f64).collect();
        let s = summability(&w);
        assert!(s.certified);
        assert!((s.growth_exponent - 2.0).abs() < 1e-10);
        let lin: Vec<f64> = (1..=64).map(|m| m as f64).collect();
        assert!(!summability(&lin).certified);
    }
}
