//! Sweeps that measure the coercive, resolvent, embedding and semigroup
//! estimates over a sector of spectral parameters and a probe corpus.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::besov::{aniso_norm, besov_norm_fourier, AnisoParams, BesovParams};
use crate::dyadic::DyadicSystem;
use crate::error::{Error, Result};
use crate::grid::{spectral_derivative, Domain, Field, Grid, MultiIndex};
use crate::multiplier::{estimate_besov_norm, young_convolution};
use crate::probes::ProbeEnsemble;
use crate::solvers::SINGULAR_PENCIL;
use crate::space::{log_space, DiagOperator, GraphNorm, LqNorm, Sector};
use crate::symbols::{
    condition51_check, conv_symbols_unchecked, elliptic_symbols_unchecked, ellipticity_check,
    sigma_from_exponents, symbol_sup, ConvSpec, FreqSampling, KernelSpec, PolySymbolSpec,
};

/// Default spread allowed between per-decade sups.
pub const DECADE_FACTOR: f64 = 3.0;

/// `1/q₂ = 1/q₁ - 1/η′`; `η′ = ∞` gives `q₂ = q₁` and `η′ = q₁` gives `q₂ = ∞`.
pub fn q2_from(q1: f64, eta_prime: f64) -> Result<f64> {
    if !(q1 > 1.0 && q1 <= eta_prime && eta_prime <= f64::INFINITY) {
        return Err(Error::Config(format!(
            "exponents need 1 < q1 ≤ η' ≤ ∞, got q1 = {q1}, η' = {eta_prime}"
        )));
    }
    let inv = 1.0 / q1 - 1.0 / eta_prime;
    Ok(if inv <= 0.0 { f64::INFINITY } else { 1.0 / inv })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPlan {
    pub grid: Grid,
    pub sector: Sector,
    /// Ray angles, each within `±φ`.
    pub rays: Vec<f64>,
    /// Magnitudes `|λ|`, positive and increasing.
    pub magnitudes: Vec<f64>,
    pub probes: ProbeEnsemble,
    pub besov_in: BesovParams,
    pub besov_out: BesovParams,
    pub eta_prime: f64,
}

impl SweepPlan {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: Grid,
        sector: Sector,
        rays: Vec<f64>,
        magnitudes: Vec<f64>,
        probes: ProbeEnsemble,
        q1: f64,
        eta_prime: f64,
        r: f64,
        s: f64,
    ) -> Result<Self> {
        let q2 = q2_from(q1, eta_prime)?;
        if rays.is_empty() || magnitudes.is_empty() {
            return Err(Error::Config("a sweep needs at least one ray and one magnitude".into()));
        }
        if let Some(bad) = rays.iter().find(|t| t.abs() > sector.angle() + 1e-12) {
            return Err(Error::Config(format!(
                "ray angle {bad} lies outside the sector of angle {}",
                sector.angle()
            )));
        }
        if magnitudes.iter().any(|t| !(*t > 0.0) || !t.is_finite())
            || magnitudes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Config("magnitudes must be positive, finite and increasing".into()));
        }
        Ok(Self {
            grid,
            sector,
            rays,
            magnitudes,
            probes,
            besov_in: BesovParams::new(q1, r, s)?,
            besov_out: BesovParams::new(q2, r, s)?,
            eta_prime,
        })
    }

    /// Rays `-φ, 0, φ`, 25 magnitudes on `[1, 1e4]` and 24 probes.
    pub fn standard(grid: Grid, sector: Sector, q1: f64, eta_prime: f64, r: f64, s: f64, seed: u64) -> Result<Self> {
        let phi = sector.angle();
        let rays = if phi == 0.0 { vec![0.0] } else { vec![-phi, 0.0, phi] };
        Self::new(
            grid,
            sector,
            rays,
            log_space(1.0, 1e4, 25),
            ProbeEnsemble::standard(seed),
            q1,
            eta_prime,
            r,
            s,
        )
    }

    pub fn q1(&self) -> f64 {
        self.besov_in.q()
    }

    pub fn q2(&self) -> f64 {
        self.besov_out.q()
    }

    /// `(ray, |λ|, λ)` in ray-major order.
    pub fn lambdas(&self) -> Vec<(f64, f64, Complex64)> {
        self.rays
            .iter()
            .flat_map(|&t| self.magnitudes.iter().map(move |&m| (t, m, Complex64::from_polar(m, t))))
            .collect()
    }
}

/// Diagonal pencil families `d_m Â(ξ) + λ + L(ξ)`.
#[derive(Debug, Clone)]
pub enum Pencil {
    /// `Σ a_α D^α + A`.
    Elliptic { spec: PolySymbolSpec, a: DiagOperator, phi1: f64 },
    /// `Σ a_k ∗ d^k/dx^k + A ∗`, `Â = â(ξ) diag(d_m)`.
    Convolution { spec: ConvSpec, a: DiagOperator, phi1: f64, lambda0: f64 },
    /// `A` alone (`L = 0`) on an `dim`-dimensional grid.
    Diagonal { a: DiagOperator, dim: usize },
}

struct Term {
    exponent: f64,
    /// Scalar multiplier per frequency node.
    mult: Vec<Complex64>,
}

struct Tables {
    l: Vec<Complex64>,
    scale: Vec<Complex64>,
    d: Vec<f64>,
    terms: Vec<Term>,
}

impl Tables {
    fn pencil(&self, node: usize, m: usize, lambda: Complex64) -> Complex64 {
        self.scale[node] * self.d[m] + lambda + self.l[node]
    }
}

impl Pencil {
    /// Checks ellipticity and the sector condition of `L`.
    pub fn elliptic(spec: PolySymbolSpec, a: DiagOperator, phi1: f64) -> Result<Self> {
        let rep = ellipticity_check(&spec, phi1, &FreqSampling::standard(spec.dim()));
        if !rep.elliptic || !rep.sector_ok {
            return Err(Error::Config(format!(
                "L(ξ) = {spec} fails ellipticity or the sector condition near ξ = {:?} (K̂ = {:.3e})",
                rep.worst_xi, rep.k_hat
            )));
        }
        Ok(Pencil::Elliptic { spec, a, phi1 })
    }

    /// Checks the kernel condition and `λ₀ > 0`.
    pub fn convolution(spec: ConvSpec, a: DiagOperator, phi1: f64, lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::Config(format!("λ₀ must be positive, got {lambda0}")));
        }
        let rep = condition51_check(&spec, phi1, &FreqSampling::standard(1));
        if !rep.holds() {
            return Err(Error::Config(format!(
                "the kernel condition fails near ξ = {:?} (Ĉ = {:.3e}, sector ok = {})",
                rep.worst_xi, rep.c_hat, rep.sector_ok
            )));
        }
        Ok(Pencil::Convolution { spec, a, phi1, lambda0 })
    }

    pub fn operator(&self) -> &DiagOperator {
        match self {
            Pencil::Elliptic { a, .. } | Pencil::Convolution { a, .. } | Pencil::Diagonal { a, .. } => a,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Pencil::Elliptic { spec, .. } => spec.dim(),
            Pencil::Convolution { .. } => 1,
            Pencil::Diagonal { dim, .. } => *dim,
        }
    }

    pub fn components(&self) -> usize {
        self.operator().dim()
    }

    fn phi1(&self) -> f64 {
        match self {
            Pencil::Elliptic { phi1, .. } | Pencil::Convolution { phi1, .. } => *phi1,
            Pencil::Diagonal { .. } => 0.0,
        }
    }

    fn lambda0(&self) -> f64 {
        match self {
            Pencil::Convolution { lambda0, .. } => *lambda0,
            _ => 0.0,
        }
    }

    /// Labels of the weighted terms, followed by the `A` term.
    pub fn term_labels(&self) -> Vec<String> {
        let mut v: Vec<String> = self.term_specs().into_iter().map(|(l, _)| l).collect();
        v.push("A u".into());
        v
    }

    fn term_specs(&self) -> Vec<(String, f64)> {
        match self {
            Pencil::Elliptic { spec, .. } => {
                let two_l = spec.order() as f64;
                MultiIndex::all_up_to(spec.dim(), spec.order())
                    .into_iter()
                    .map(|al| (format!("D^{al}"), 1.0 - al.order() as f64 / two_l))
                    .collect()
            }
            Pencil::Convolution { spec, .. } => {
                let l = spec.order() as f64;
                let mut v = vec![("lambda u".to_string(), 1.0)];
                for (k, ker) in spec.kernels().iter().enumerate() {
                    if !ker.is_zero() {
                        v.push((format!("a_{k} * d^{k}u"), 1.0 - k as f64 / l));
                    }
                }
                v
            }
            Pencil::Diagonal { .. } => vec![("lambda u".to_string(), 1.0)],
        }
    }

    fn tables(&self, grid: &Grid) -> Result<Tables> {
        if grid.dim() != self.dim() {
            return Err(Error::Usage(format!(
                "pencil is {}-dimensional, grid is {}-dimensional",
                self.dim(),
                grid.dim()
            )));
        }
        let n = grid.len();
        let xi = |i: usize| grid.freq_point(i);
        let one = Complex64::new(1.0, 0.0);
        let specs = self.term_specs();
        let (l, scale, terms) = match self {
            Pencil::Elliptic { spec, .. } => {
                let l = (0..n).map(|i| spec.eval(&xi(i)[..grid.dim()])).collect();
                let terms = MultiIndex::all_up_to(spec.dim(), spec.order())
                    .into_iter()
                    .zip(specs)
                    .map(|(al, (_, exponent))| Term {
                        exponent,
                        mult: (0..n).map(|i| al.monomial(&xi(i)[..grid.dim()])).collect(),
                    })
                    .collect();
                (l, vec![one; n], terms)
            }
            Pencil::Convolution { spec, .. } => {
                let fr: Vec<f64> = (0..n).map(|i| grid.freq(i)).collect();
                let l = fr.iter().map(|&x| spec.l_eval(x)).collect();
                let scale = fr.iter().map(|&x| spec.profile().eval(x)).collect();
                let mut it = specs.into_iter();
                let (_, exponent) = it.next().expect("lambda term");
                let mut terms = vec![Term { exponent, mult: vec![one; n] }];
                for (k, ker) in spec.kernels().iter().enumerate().filter(|(_, k)| !k.is_zero()) {
                    let (_, exponent) = it.next().expect("kernel term");
                    terms.push(Term {
                        exponent,
                        mult: fr
                            .iter()
                            .map(|&x| ker.transform(x) * Complex64::new(0.0, x).powu(k as u32))
                            .collect(),
                    });
                }
                (l, scale, terms)
            }
            Pencil::Diagonal { .. } => {
                let (_, exponent) = specs.into_iter().next().expect("lambda term");
                (
                    vec![Complex64::new(0.0, 0.0); n],
                    vec![one; n],
                    vec![Term { exponent, mult: vec![one; n] }],
                )
            }
        };
        Ok(Tables {
            l,
            scale,
            d: self.operator().diagonal(),
            terms,
        })
    }

    fn check_plan(&self, plan: &SweepPlan) -> Result<()> {
        if self.phi1() + plan.sector.angle() >= PI {
            return Err(Error::Config(format!(
                "sector angles must satisfy φ₁ + φ < π, got {} + {}",
                self.phi1(),
                plan.sector.angle()
            )));
        }
        if let Some(t) = plan.magnitudes.first() {
            if *t < self.lambda0() {
                return Err(Error::Config(format!(
                    "|λ| = {t} is below λ₀ = {}",
                    self.lambda0()
                )));
            }
        }
        Ok(())
    }
}

/// `F^{-1}[mult(ξ) c_m(ξ) v̂]` where `c_m` is `1/pencil` (times `d_m Â` when
/// `with_a`).
fn apply_solution(
    fhat: &Field,
    t: &Tables,
    lambda: Complex64,
    mult: Option<&[Complex64]>,
    with_a: bool,
) -> Result<Field> {
    let m = fhat.components();
    let grid = *fhat.grid();
    let mut out = Vec::with_capacity(fhat.values().len());
    for (i, v) in fhat.values().iter().enumerate() {
        let (node, c) = (i / m, i % m);
        let p = t.pencil(node, c, lambda);
        if p.norm() < SINGULAR_PENCIL {
            return Err(Error::Numeric(format!(
                "pencil entry m = {} is near singular at ξ = {:?}",
                c + 1,
                &grid.freq_point(node)[..grid.dim()]
            )));
        }
        let mut z = v / p;
        if let Some(mu) = mult {
            z *= mu[node];
        }
        if with_a {
            z *= t.scale[node] * t.d[c];
        }
        out.push(z);
    }
    Field::new(grid, m, Domain::Frequency, out)?.inverse_ft()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub ray: f64,
    pub magnitude: f64,
    pub lambda: Complex64,
    pub probe: Option<usize>,
    /// Left side over right side; `None` for skipped or failed cells.
    pub ratio: Option<f64>,
    /// Unweighted term values in the order of `term_labels`.
    pub terms: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecadeSup {
    pub lo: f64,
    pub hi: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepMeta {
    pub kind: String,
    pub dim: usize,
    pub half_width: f64,
    pub samples: usize,
    pub components: usize,
    pub seed: u64,
    pub probe_count: usize,
    pub q1: f64,
    pub q2: f64,
    pub r: f64,
    pub s: f64,
    pub singular_pencil: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub meta: SweepMeta,
    pub term_labels: Vec<String>,
    pub cells: Vec<SweepCell>,
    pub sup: f64,
    pub argsup: Option<usize>,
    pub per_decade: Vec<DecadeSup>,
    /// Largest over smallest per-decade sup; 1 with fewer than two decades.
    pub decade_spread: f64,
    pub skipped: usize,
    pub failures: usize,
    /// Free-form scalar results attached by individual sweeps.
    pub extras: Vec<(String, f64)>,
}

impl SweepReport {
    fn build(meta: SweepMeta, term_labels: Vec<String>, cells: Vec<SweepCell>) -> Self {
        let mut sup = 0.0;
        let mut argsup = None;
        for (i, c) in cells.iter().enumerate() {
            if let Some(r) = c.ratio {
                if argsup.is_none() || r > sup {
                    sup = r;
                    argsup = Some(i);
                }
            }
        }
        let per_decade = per_decade_sups(cells.iter().filter_map(|c| c.ratio.map(|r| (c.magnitude, r))));
        let decade_spread = spread(&per_decade);
        let failures = cells.iter().filter(|c| c.error.is_some()).count();
        let skipped = cells.iter().filter(|c| c.ratio.is_none() && c.error.is_none()).count();
        Self {
            meta,
            term_labels,
            cells,
            sup,
            argsup,
            per_decade,
            decade_spread,
            skipped,
            failures,
            extras: Vec::new(),
        }
    }

    /// Whether the per-decade sups differ by less than `factor`.
    pub fn uniform(&self, factor: f64) -> bool {
        self.failures == 0 && self.sup.is_finite() && self.decade_spread < factor
    }

    /// Ratio table as CSV: `ray,magnitude,re,im,probe,ratio,terms...`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ray,magnitude,lambda_re,lambda_im,probe,ratio");
        for l in &self.term_labels {
            s.push(',');
            s.push_str(&l.replace(',', ";"));
        }
        s.push('\n');
        for c in &self.cells {
            let probe = c.probe.map(|p| p.to_string()).unwrap_or_default();
            let ratio = c.ratio.map(|r| format!("{r:.17e}")).unwrap_or_default();
            s.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{probe},{ratio}",
                c.ray, c.magnitude, c.lambda.re, c.lambda.im
            ));
            for t in &c.terms {
                s.push_str(&format!(",{t:.17e}"));
            }
            s.push('\n');
        }
        s
    }

    /// Plot data: `ray,magnitude,sup_ratio` with the sup over probes.
    pub fn plot_csv(&self) -> String {
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for c in &self.cells {
            let Some(r) = c.ratio else { continue };
            match rows.iter_mut().find(|(a, b, _)| *a == c.ray && *b == c.magnitude) {
                Some(row) => row.2 = row.2.max(r),
                None => rows.push((c.ray, c.magnitude, r)),
            }
        }
        let mut s = String::from("ray,magnitude,sup_ratio\n");
        for (a, b, r) in rows {
            s.push_str(&format!("{a:.17e},{b:.17e},{r:.17e}\n"));
        }
        s
    }
}

fn decade_index(t: f64) -> i64 {
    (t.log10() + 1e-12).floor() as i64
}

/// Sups over `[10^j, 10^{j+1})`; a magnitude equal to the top power of ten
/// closes the previous decade rather than opening its own.
pub fn per_decade_sups(points: impl Iterator<Item = (f64, f64)>) -> Vec<DecadeSup> {
    let pts: Vec<(f64, f64)> = points.collect();
    if pts.is_empty() {
        return Vec::new();
    }
    let tmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let tmax = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let (lo, mut hi) = (decade_index(tmin), decade_index(tmax));
    let exact_top = (tmax.log10() - hi as f64).abs() < 1e-12;
    if exact_top && hi > lo {
        hi -= 1;
    }
    let mut sups = vec![f64::NAN; (hi - lo + 1) as usize];
    for (t, r) in pts {
        let j = (decade_index(t).min(hi) - lo) as usize;
        sups[j] = if sups[j].is_nan() { r } else { sups[j].max(r) };
    }
    sups.iter()
        .enumerate()
        .filter(|(_, s)| !s.is_nan())
        .map(|(j, s)| DecadeSup {
            lo: 10f64.powi((lo + j as i64) as i32),
            hi: 10f64.powi((lo + j as i64 + 1) as i32),
            sup: *s,
        })
        .collect()
}

fn spread(d: &[DecadeSup]) -> f64 {
    let max = d.iter().map(|x| x.sup).fold(0.0, f64::max);
    let min = d.iter().map(|x| x.sup).fold(f64::INFINITY, f64::min);
    if d.len() < 2 {
        1.0
    } else if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn meta(kind: &str, plan: &SweepPlan, components: usize) -> SweepMeta {
    SweepMeta {
        kind: kind.into(),
        dim: plan.grid.dim(),
        half_width: plan.grid.half_width(),
        samples: plan.grid.samples(),
        components,
        seed: plan.probes.seed,
        probe_count: plan.probes.count(),
        q1: plan.q1(),
        q2: plan.q2(),
        r: plan.besov_in.r(),
        s: plan.besov_in.s(),
        singular_pencil: SINGULAR_PENCIL,
    }
}

fn probe_fields(plan: &SweepPlan, components: usize) -> Result<Vec<Field>> {
    Ok(plan
        .probes
        .generate(&plan.grid, components)?
        .into_iter()
        .map(|p| p.field)
        .collect())
}

/// Left side of the coercive estimate for one `(λ, f̂)` and its unweighted terms.
fn coercive_terms(
    fhat: &Field,
    tables: &Tables,
    lambda: Complex64,
    magnitude: f64,
    plan: &SweepPlan,
    sys: &DyadicSystem,
    e: &LqNorm,
) -> Result<(f64, Vec<f64>)> {
    let mut lhs = 0.0;
    let mut terms = Vec::with_capacity(tables.terms.len() + 1);
    for t in &tables.terms {
        let v = apply_solution(fhat, tables, lambda, Some(&t.mult), false)?;
        let b = besov_norm_fourier(&v, &plan.besov_out, sys, e)?.norm;
        lhs += magnitude.powf(t.exponent) * b;
        terms.push(b);
    }
    let au = apply_solution(fhat, tables, lambda, None, true)?;
    let b = besov_norm_fourier(&au, &plan.besov_out, sys, e)?.norm;
    terms.push(b);
    Ok((lhs + b, terms))
}

/// Coercive ratio for a single right-hand side; `None` when `f = 0`.
pub fn coercive_ratio(pencil: &Pencil, plan: &SweepPlan, f: &Field, lambda: Complex64) -> Result<Option<f64>> {
    pencil.check_plan(plan)?;
    if f.components() != pencil.components() || f.grid() != &plan.grid {
        return Err(Error::Usage("right-hand side does not match the pencil and plan".into()));
    }
    let tables = pencil.tables(&plan.grid)?;
    let e = LqNorm::new(pencil.operator().q())?;
    let sys = DyadicSystem::new(plan.grid);
    let den = besov_norm_fourier(f, &plan.besov_in, &sys, &e)?.norm;
    if den == 0.0 {
        return Ok(None);
    }
    let fhat = f.to_physical()?.forward_ft()?;
    let (lhs, _) = coercive_terms(&fhat, &tables, lambda, lambda.norm(), plan, &sys, &e)?;
    Ok(Some(lhs / den))
}

fn coercive_sweep(kind: &str, pencil: &Pencil, plan: &SweepPlan) -> Result<SweepReport> {
    pencil.check_plan(plan)?;
    let m = pencil.components();
    let tables = pencil.tables(&plan.grid)?;
    let e = LqNorm::new(pencil.operator().q())?;
    let sys = DyadicSystem::new(plan.grid);
    let probes = probe_fields(plan, m)?;
    let prepared: Vec<Result<(Field, f64)>> = probes
        .par_iter()
        .map(|f| Ok((f.forward_ft()?, besov_norm_fourier(f, &plan.besov_in, &sys, &e)?.norm)))
        .collect();
    let prepared: Vec<(Field, f64)> = prepared.into_iter().collect::<Result<_>>()?;
    let lambdas = plan.lambdas();
    let jobs: Vec<(usize, usize)> = (0..lambdas.len())
        .flat_map(|i| (0..probes.len()).map(move |j| (i, j)))
        .collect();
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (ray, magnitude, lambda) = lambdas[i];
            let (fhat, den) = &prepared[j];
            let mut cell = SweepCell {
                ray,
                magnitude,
                lambda,
                probe: Some(j),
                ratio: None,
                terms: Vec::new(),
                error: None,
            };
            if *den == 0.0 {
                return cell;
            }
            let eval = || coercive_terms(fhat, &tables, lambda, magnitude, plan, &sys, &e);
            match eval() {
                Ok((lhs, terms)) => {
                    cell.ratio = Some(lhs / den);
                    cell.terms = terms;
                }
                Err(err) => cell.error = Some(err.to_string()),
            }
            cell
        })
        .collect();
    Ok(SweepReport::build(meta(kind, plan, m), pencil.term_labels(), cells))
}

/// `Σ_α |λ|^{1-|α|/2l} ‖D^α u‖_{B^s_{q₂,r}} + ‖Au‖_{B^s_{q₂,r}}` over
/// `‖f‖_{B^s_{q₁,r}}` for every `(λ, f)`.
pub fn coercive_sweep_elliptic(pencil: &Pencil, plan: &SweepPlan) -> Result<SweepReport> {
    if !matches!(pencil, Pencil::Elliptic { .. } | Pencil::Diagonal { .. }) {
        return Err(Error::Usage("the elliptic sweep needs an elliptic pencil".into()));
    }
    coercive_sweep("coercive_elliptic", pencil, plan)
}

/// `|λ|‖u‖ + Σ_k |λ|^{1-k/l} ‖a_k ∗ u^{(k)}‖ + ‖A ∗ u‖` over `‖f‖`, all
/// in the Besov norms of the plan.
pub fn coercive_sweep_convolution(pencil: &Pencil, plan: &SweepPlan) -> Result<SweepReport> {
    if !matches!(pencil, Pencil::Convolution { .. }) {
        return Err(Error::Usage("the convolution sweep needs a convolution pencil".into()));
    }
    coercive_sweep("coercive_convolution", pencil, plan)
}

/// Probe estimates of `|λ|^{e} ‖T (Q+λ)^{-1}‖_{B^s_{q₁,r} → B^s_{q₂,r}}` for
/// each weighted term `T` and of `‖A(Q+λ)^{-1}‖`, summed per `λ`.
pub fn resolvent_sweep(pencil: &Pencil, plan: &SweepPlan) -> Result<SweepReport> {
    resolvent_like("resolvent", pencil, plan, 0.0, None)
}

fn resolvent_like(
    kind: &str,
    pencil: &Pencil,
    plan: &SweepPlan,
    shift: f64,
    only_lambda_term: Option<&[(f64, f64, Complex64)]>,
) -> Result<SweepReport> {
    let m = pencil.components();
    let mut tables = pencil.tables(&plan.grid)?;
    for v in tables.l.iter_mut() {
        *v += shift;
    }
    let e = LqNorm::new(pencil.operator().q())?;
    let sys = DyadicSystem::new(plan.grid);
    let probes = probe_fields(plan, m)?;
    let lambdas = match only_lambda_term {
        Some(l) => l.to_vec(),
        None => plan.lambdas(),
    };
    let one = vec![Complex64::new(1.0, 0.0); plan.grid.len()];
    let cells: Vec<SweepCell> = lambdas
        .par_iter()
        .map(|&(ray, magnitude, lambda)| {
            let mut cell = SweepCell {
                ray,
                magnitude,
                lambda,
                probe: None,
                ratio: None,
                terms: Vec::new(),
                error: None,
            };
            let eval = || -> Result<(f64, Vec<f64>)> {
                let mut total = 0.0;
                let mut terms = Vec::new();
                let estimate = |mult: &[Complex64], with_a: bool| -> Result<f64> {
                    let op = |f: &Field| apply_solution(&f.forward_ft()?, &tables, lambda, Some(mult), with_a);
                    Ok(estimate_besov_norm(&op, &plan.besov_in, &plan.besov_out, &probes, &sys, &e)?.estimate)
                };
                if only_lambda_term.is_some() {
                    let v = magnitude * estimate(&one, false)?;
                    return Ok((v, vec![v]));
                }
                for t in &tables.terms {
                    let v = estimate(&t.mult, false)?;
                    total += magnitude.powf(t.exponent) * v;
                    terms.push(v);
                }
                let v = estimate(&one, true)?;
                terms.push(v);
                Ok((total + v, terms))
            };
            match eval() {
                Ok((v, terms)) => {
                    cell.ratio = Some(v);
                    cell.terms = terms;
                }
                Err(err) => cell.error = Some(err.to_string()),
            }
            cell
        })
        .collect();
    let labels = if only_lambda_term.is_some() {
        vec!["lambda (Q + a + lambda)^-1".to_string()]
    } else {
        pencil.term_labels()
    };
    Ok(SweepReport::build(meta(kind, plan, m), labels, cells))
}

/// Sup over rays `|arg λ| ≤ φ` of the probe estimate of
/// `‖λ(Q + a + λ)^{-1}‖`, for `φ ∈ (π/2, π)`. The rays are
/// `-φ, -φ/2, 0, φ/2, φ` and the magnitudes those of the plan.
pub fn semigroup_ray_check(pencil: &Pencil, shift: f64, phi: f64, plan: &SweepPlan) -> Result<SweepReport> {
    if !(phi > PI / 2.0 && phi < PI) {
        return Err(Error::Config(format!("semigroup rays need φ in (π/2, π), got {phi}")));
    }
    if !(shift >= 0.0) {
        return Err(Error::Config(format!("the shift a must be nonnegative, got {shift}")));
    }
    if pencil.phi1() + phi >= PI {
        return Err(Error::Config(format!(
            "sector angles must satisfy φ₁ + φ < π, got {} + {phi}",
            pencil.phi1()
        )));
    }
    let dmin = pencil.operator().diagonal().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin + shift > 0.0) {
        return Err(Error::Config("the shifted pencil is not strictly positive".into()));
    }
    let rays = [-phi, -phi / 2.0, 0.0, phi / 2.0, phi];
    let lambdas: Vec<(f64, f64, Complex64)> = rays
        .iter()
        .flat_map(|&t| plan.magnitudes.iter().map(move |&m| (t, m, Complex64::from_polar(m, t))))
        .collect();
    let mut rep = resolvent_like("semigroup_rays", pencil, plan, shift, Some(&lambdas))?;
    rep.extras.push(("shift".into(), shift));
    rep.extras.push(("phi".into(), phi));
    Ok(rep)
}

/// Embedding ratio `‖D^α u‖_{B^s_{q₂,r}(E(A^{1-x}))} / ‖u‖_{B^{l,s}_{q₁,r}(E(A),E)}`
/// over the probes, with `x = (|α| + σ)/l`. With a kernel, each cell also
/// carries the ratio for `a ∗ D^α u`; the cell ratio is then that one.
pub fn embedding_sweep(
    alpha: &MultiIndex,
    l: usize,
    a: &DiagOperator,
    kernel: Option<&KernelSpec>,
    graph_p: f64,
    plan: &SweepPlan,
) -> Result<SweepReport> {
    let dim = plan.grid.dim();
    if alpha.dim() != dim {
        return Err(Error::Usage(format!("α has {} entries, grid dimension is {dim}", alpha.dim())));
    }
    if kernel.is_some() && dim != 1 {
        return Err(Error::Usage("convolution embeddings are one-dimensional".into()));
    }
    let sigma = sigma_from_exponents(dim, plan.q1(), plan.q2());
    let x = (alpha.order() + sigma) as f64 / l as f64;
    if l == 0 || x > 1.0 + 1e-12 {
        return Err(Error::Config(format!(
            "x = (|α| + σ)/l = ({} + {sigma})/{l} exceeds 1",
            alpha.order()
        )));
    }
    let theta = (1.0 - x).max(0.0);
    let target = GraphNorm::new(a, theta, graph_p);
    let e = LqNorm::new(a.q())?;
    let sys = DyadicSystem::new(plan.grid);
    let aniso = AnisoParams::new(l, plan.besov_in, graph_p)?;
    let kfield = kernel.map(|k| k.sample(&plan.grid)).transpose()?;
    let probes = probe_fields(plan, a.dim())?;
    let cells: Vec<SweepCell> = probes
        .par_iter()
        .enumerate()
        .map(|(j, u)| {
            let mut cell = SweepCell {
                ray: 0.0,
                magnitude: 0.0,
                lambda: Complex64::new(0.0, 0.0),
                probe: Some(j),
                ratio: None,
                terms: Vec::new(),
                error: None,
            };
            let eval = || -> Result<Option<(f64, Vec<f64>)>> {
                let den = aniso_norm(u, &aniso, a, &sys, &e)?.norm;
                if den == 0.0 {
                    return Ok(None);
                }
                let du = spectral_derivative(u, alpha)?;
                let plain = besov_norm_fourier(&du, &plan.besov_out, &sys, &target)?.norm / den;
                match &kfield {
                    None => Ok(Some((plain, vec![plain]))),
                    Some(k) => {
                        let conv = young_convolution(k, &du)?;
                        let c = besov_norm_fourier(&conv, &plan.besov_out, &sys, &target)?.norm / den;
                        Ok(Some((c, vec![plain, c])))
                    }
                }
            };
            match eval() {
                Ok(Some((r, t))) => {
                    cell.ratio = Some(r);
                    cell.terms = t;
                }
                Ok(None) => {}
                Err(err) => cell.error = Some(err.to_string()),
            }
            cell
        })
        .collect();
    let labels = if kernel.is_some() {
        vec!["D^alpha u".to_string(), "a * D^alpha u".to_string()]
    } else {
        vec!["D^alpha u".to_string()]
    };
    let mut rep = SweepReport::build(meta("embedding", plan, a.dim()), labels, cells);
    rep.extras.push(("sigma".into(), sigma as f64));
    rep.extras.push(("x".into(), x));
    rep.extras.push(("fractional_power".into(), theta));
    if let Some(k) = kernel {
        rep.extras.push(("kernel_l1".into(), k.l1_quadrature(&plan.grid)?));
    }
    Ok(rep)
}

/// Per-`λ` sups of the symbols built from a pencil, over a frequency sampling.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolSweep {
    pub names: Vec<String>,
    /// `(λ, sups in the order of names)`.
    pub rows: Vec<(Complex64, Vec<f64>)>,
    pub sups: Vec<f64>,
    pub per_decade: Vec<Vec<DecadeSup>>,
}

impl SymbolSweep {
    /// Largest per-decade sup relative to the first decade, per symbol.
    pub fn growth(&self) -> Vec<f64> {
        self.per_decade
            .iter()
            .map(|d| {
                let first = d.first().map(|x| x.sup).unwrap_or(0.0);
                let max = d.iter().map(|x| x.sup).fold(0.0, f64::max);
                if first > 0.0 { max / first } else { f64::INFINITY }
            })
            .collect()
    }
}

/// Sups of `σ_{1λ}, σ_{2λ}` (elliptic) or `σ_0, σ_1, σ_2` (convolution) in
/// the `l_q` operator norm, for every `λ` of the plan.
pub fn symbol_sweep(pencil: &Pencil, plan: &SweepPlan, sampling: &FreqSampling) -> Result<SymbolSweep> {
    pencil.check_plan(plan)?;
    let a = pencil.operator();
    let q = a.q();
    let lambdas = plan.lambdas();
    let (names, rows): (Vec<String>, Vec<Result<(Complex64, Vec<f64>)>>) = match pencil {
        Pencil::Elliptic { spec, .. } => (
            vec!["sigma1".into(), "sigma2".into()],
            lambdas
                .par_iter()
                .map(|&(_, _, lam)| {
                    let s = elliptic_symbols_unchecked(spec, a, lam);
                    Ok((lam, vec![symbol_sup(&s.sigma1, sampling, q)?.sup, symbol_sup(&s.sigma2, sampling, q)?.sup]))
                })
                .collect(),
        ),
        Pencil::Convolution { spec, .. } => (
            vec!["sigma0".into(), "sigma1".into(), "sigma2".into()],
            lambdas
                .par_iter()
                .map(|&(_, _, lam)| {
                    let s = conv_symbols_unchecked(spec, a, lam);
                    Ok((
                        lam,
                        vec![
                            symbol_sup(&s.sigma0, sampling, q)?.sup,
                            symbol_sup(&s.sigma1, sampling, q)?.sup,
                            symbol_sup(&s.sigma2, sampling, q)?.sup,
                        ],
                    ))
                })
                .collect(),
        ),
        Pencil::Diagonal { .. } => {
            return Err(Error::Usage("symbol sweeps need an elliptic or convolution pencil".into()))
        }
    };
    let rows: Vec<(Complex64, Vec<f64>)> = rows.into_iter().collect::<Result<_>>()?;
    let sups = (0..names.len())
        .map(|i| rows.iter().map(|r| r.1[i]).fold(0.0, f64::max))
        .collect();
    let per_decade = (0..names.len())
        .map(|i| per_decade_sups(rows.iter().map(|r| (r.0.norm(), r.1[i]))))
        .collect();
    Ok(SymbolSweep {
        names,
        rows,
        sups,
        per_decade,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::ProbeFamily;
    use crate::symbols::Profile;

    fn small_plan(grid: Grid, phi: f64, q1: f64, eta_prime: f64) -> SweepPlan {
        SweepPlan::new(
            grid,
            Sector::new(phi).unwrap(),
            vec![0.0, phi],
            log_space(1.0, 1e4, 9),
            ProbeEnsemble::new(11, vec![(ProbeFamily::Gaussian, 3), (ProbeFamily::DyadicBump, 3)]),
            q1,
            eta_prime,
            2.0,
            1.0,
        )
        .unwrap()
    }

    fn laplace(m: usize) -> Pencil {
        let a = DiagOperator::new(2.0, (1..=m).map(|k| (k * k) as f64).collect()).unwrap();
        Pencil::elliptic(PolySymbolSpec::axis_power(1, 2).unwrap(), a, 0.0).unwrap()
    }

    #[test]
    fn exponent_relation() {
        assert_eq!(q2_from(2.0, 4.0).unwrap(), 4.0);
        assert_eq!(q2_from(2.0, 2.0).unwrap(), f64::INFINITY);
        assert!(q2_from(1.0, 2.0).is_err());
        assert!(q2_from(4.0, 2.0).is_err());
        assert_eq!(q2_from(2.0, f64::INFINITY).unwrap(), 2.0);
    }

    #[test]
    fn decades() {
        let d = per_decade_sups([(1.0, 1.0), (5.0, 2.0), (10.0, 3.0), (1e2, 0.5)].into_iter());
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].sup, 2.0);
        assert_eq!(d[1].sup, 3.0);
        assert_eq!(spread(&d), 1.5);
    }

    #[test]
    fn single_mode_matches_closed_form() {
        // f = e^{iκx} e_1 is an eigenfunction of every block, so each Besov
        // norm reduces to the same factor times the modulus of the multiplier.
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let plan = small_plan(grid, 1.0, 2.0, f64::INFINITY);
        let pencil = laplace(1);
        let kappa = 7.0 * PI / 16.0;
        let f = Field::from_fn(grid, 1, |x, o| o[0] = Complex64::from_polar(1.0, kappa * x[0])).unwrap();
        let tables = pencil.tables(&grid).unwrap();
        let sys = DyadicSystem::new(grid);
        let e = LqNorm::new(2.0).unwrap();
        let den = besov_norm_fourier(&f, &plan.besov_in, &sys, &e).unwrap().norm;
        let fhat = f.forward_ft().unwrap();
        for (_, t, lam) in plan.lambdas() {
            let mut lhs = 0.0;
            for term in &tables.terms {
                let v = apply_solution(&fhat, &tables, lam, Some(&term.mult), false).unwrap();
                lhs += t.powf(term.exponent) * besov_norm_fourier(&v, &plan.besov_out, &sys, &e).unwrap().norm;
            }
            let au = apply_solution(&fhat, &tables, lam, None, true).unwrap();
            lhs += besov_norm_fourier(&au, &plan.besov_out, &sys, &e).unwrap().norm;
            let p = (1.0 + lam + kappa * kappa).norm();
            let expect = (t + t.sqrt() * kappa + kappa * kappa + 1.0) / p;
            assert!((lhs / den - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn elliptic_sweep_is_uniform_and_reproducible() {
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let plan = small_plan(grid, 1.0, 2.0, 4.0);
        let rep = coercive_sweep_elliptic(&laplace(4), &plan).unwrap();
        assert_eq!(rep.failures, 0);
        assert!(rep.sup.is_finite() && rep.sup > 0.0);
        assert!(rep.uniform(DECADE_FACTOR), "spread {}", rep.decade_spread);
        let again = coercive_sweep_elliptic(&laplace(4), &plan).unwrap();
        for (a, b) in rep.cells.iter().zip(&again.cells) {
            assert_eq!(a.ratio, b.ratio);
        }
    }

    #[test]
    fn zero_probe_cells_are_skipped() {
        let grid = Grid::new(1, 16.0, 128).unwrap();
        let plan = SweepPlan::new(
            grid,
            Sector::new(0.5).unwrap(),
            vec![0.0],
            vec![1.0, 10.0],
            ProbeEnsemble::new(1, vec![(ProbeFamily::Gaussian, 0)]),
            2.0,
            4.0,
            2.0,
            1.0,
        )
        .unwrap();
        let rep = coercive_sweep_elliptic(&laplace(2), &plan).unwrap();
        assert!(rep.cells.is_empty());
        assert_eq!(rep.argsup, None);
    }

    #[test]
    fn delta_convolution_matches_elliptic() {
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let plan = small_plan(grid, 1.0, 2.0, 4.0);
        let a = DiagOperator::new(2.0, vec![1.0, 4.0, 9.0]).unwrap();
        let conv = Pencil::convolution(
            ConvSpec::new(
                vec![KernelSpec::Zero, KernelSpec::Zero, KernelSpec::Delta { weight: -1.0 }],
                Profile::constant(1.0),
            )
            .unwrap(),
            a.clone(),
            0.0,
            1.0,
        )
        .unwrap();
        let ell = Pencil::elliptic(PolySymbolSpec::axis_power(1, 2).unwrap(), a, 0.0).unwrap();
        let rc = coercive_sweep_convolution(&conv, &plan).unwrap();
        let re = coercive_sweep_elliptic(&ell, &plan).unwrap();
        for (c, e) in rc.cells.iter().zip(&re.cells) {
            // Same λu, second-derivative and A terms; the elliptic side adds
            // |λ|^{1/2} ‖u′‖.
            let (tc, te) = (&c.terms, &e.terms);
            assert!((tc[0] - te[0]).abs() < 1e-10 * te[0]);
            assert!((tc[1] - te[2]).abs() < 1e-10 * te[2]);
            assert!((tc[2] - te[3]).abs() < 1e-10 * te[3]);
        }
        assert!(rc.sup.is_finite());
    }

    #[test]
    fn resolvent_identity_pencil() {
        let grid = Grid::new(1, 16.0, 128).unwrap();
        let plan = SweepPlan::new(
            grid,
            Sector::new(0.0).unwrap(),
            vec![0.0],
            log_space(0.1, 100.0, 7),
            ProbeEnsemble::standard(2),
            2.0,
            f64::INFINITY,
            2.0,
            0.5,
        )
        .unwrap();
        let p = Pencil::Diagonal { a: DiagOperator::identity(2.0, 1).unwrap(), dim: 1 };
        let rep = resolvent_sweep(&p, &plan).unwrap();
        for c in &rep.cells {
            let t = c.magnitude;
            assert!((c.terms[0] * t - t / (1.0 + t)).abs() < 1e-12);
            assert!(c.terms[0] * t <= 1.0);
        }
        // More probes from the same streams never lower an estimate.
        let mut bigger = plan.clone();
        bigger.probes = ProbeEnsemble::new(2, ProbeFamily::ALL.iter().map(|&f| (f, 9)).collect());
        let ell = laplace(2);
        let small = resolvent_sweep(&ell, &plan).unwrap();
        let large = resolvent_sweep(&ell, &bigger).unwrap();
        for (a, b) in small.cells.iter().zip(&large.cells) {
            for (x, y) in a.terms.iter().zip(&b.terms) {
                assert!(y >= x);
            }
        }
    }

    #[test]
    fn semigroup_scalar_oracle() {
        let grid = Grid::new(1, 16.0, 128).unwrap();
        let mut plan = small_plan(grid, 1.0, 2.0, f64::INFINITY);
        plan.magnitudes = log_space(0.01, 100.0, 41);
        let (d, shift) = (2.0, 0.5);
        let p = Pencil::Diagonal { a: DiagOperator::new(2.0, vec![d]).unwrap(), dim: 1 };
        let phi = 3.0 * PI / 4.0;
        let rep = semigroup_ray_check(&p, shift, phi, &plan).unwrap();
        // Brute-force maximization of |λ|/|d + a + λ| on the ray arg λ = φ.
        let oracle = plan
            .magnitudes
            .iter()
            .map(|&t| t / (d + shift + Complex64::from_polar(t, phi)).norm())
            .fold(0.0, f64::max);
        let ray_sup = rep
            .cells
            .iter()
            .filter(|c| c.ray == phi)
            .filter_map(|c| c.ratio)
            .fold(0.0, f64::max);
        assert!((ray_sup - oracle).abs() < 1e-12);
        assert!(rep.sup <= 1.0 / phi.sin() + 1e-12);
        let zero_shift = semigroup_ray_check(&laplace(3), 0.0, phi, &plan).unwrap();
        assert!(zero_shift.sup.is_finite() && zero_shift.failures == 0);
        assert!(semigroup_ray_check(&p, shift, 1.0, &plan).is_err());
    }

    #[test]
    fn embedding_identity_and_young() {
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let plan = small_plan(grid, 1.0, 2.0, 4.0);
        let a = DiagOperator::identity(2.0, 2).unwrap();
        let alpha = MultiIndex::from_orders(vec![2]);
        let k = KernelSpec::Gaussian { weight: 0.7, width: 0.8 };
        let rep = embedding_sweep(&alpha, 4, &a, Some(&k), 2.0, &plan).unwrap();
        let x = rep.extras.iter().find(|e| e.0 == "x").unwrap().1;
        assert_eq!(x, 1.0);
        assert!(a.frac_power(0.0).diagonal().iter().all(|v| *v == 1.0));
        let l1 = rep.extras.iter().find(|e| e.0 == "kernel_l1").unwrap().1;
        for c in &rep.cells {
            assert!(c.terms[1] <= l1 * c.terms[0] + 1e-9);
        }
        assert!(embedding_sweep(&MultiIndex::from_orders(vec![3]), 4, &a, None, 2.0, &plan).is_err());
    }

    #[test]
    fn embedding_single_mode_arithmetic() {
        // With A = I both sides are multiples of the mode's block norms.
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let plan = small_plan(grid, 1.0, 2.0, 4.0);
        let a = DiagOperator::identity(2.0, 1).unwrap();
        let kappa = 5.0 * PI / 16.0;
        let u = Field::from_fn(grid, 1, |x, o| o[0] = Complex64::from_polar(1.0, kappa * x[0])).unwrap();
        let sys = DyadicSystem::new(grid);
        let e = LqNorm::new(2.0).unwrap();
        let target = GraphNorm::new(&a, 0.25, 2.0);
        let du = spectral_derivative(&u, &MultiIndex::from_orders(vec![1])).unwrap();
        let lhs = besov_norm_fourier(&du, &plan.besov_out, &sys, &target).unwrap().norm;
        let aniso = AnisoParams::new(4, plan.besov_in, 2.0).unwrap();
        let rhs = aniso_norm(&u, &aniso, &a, &sys, &e).unwrap().norm;
        let bin = besov_norm_fourier(&u, &plan.besov_in, &sys, &e).unwrap().norm;
        let bout = besov_norm_fourier(&u, &plan.besov_out, &sys, &e).unwrap().norm;
        let s2 = 2f64.sqrt();
        let expect = s2 * kappa * bout / (s2 * bin + kappa.powi(4) * bin);
        assert!((lhs / rhs - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn symbol_sweep_respects_bound() {
        let grid = Grid::new(1, 16.0, 64).unwrap();
        let plan = small_plan(grid, 1.0, 2.0, 4.0);
        let sw = symbol_sweep(&laplace(4), &plan, &FreqSampling::standard(1)).unwrap();
        assert!(sw.sups[0] <= 2.0 + 1e-9);
        assert!(sw.growth().iter().all(|g| *g <= DECADE_FACTOR));
    }
}
