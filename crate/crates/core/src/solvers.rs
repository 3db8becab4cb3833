//! Fourier-inversion solvers for the elliptic, convolution and infinite
//! system problems, with spectral residuals.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Domain, Field, Grid};
use crate::space::{DiagOperator, LqNorm, Sector, SequenceSpace};
use crate::symbols::{
    condition51_check, ellipticity_check, ConvSpec, FreqSampling, PolySymbolSpec,
};

/// Pencil entries with modulus below this are treated as singular.
pub const SINGULAR_PENCIL: f64 = 1e-13;

/// `Σ a_α D^α u + (A + λ) u = f` on a periodic grid.
#[derive(Debug, Clone)]
pub struct EllipticProblem {
    spec: PolySymbolSpec,
    a: DiagOperator,
    lambda: Complex64,
    f: Field,
}

impl EllipticProblem {
    /// Validates ellipticity, `L(ξ) ∈ S(φ₁)`, `λ ∈ S(φ)` and `φ₁ + φ < π`.
    pub fn new(
        spec: PolySymbolSpec,
        a: DiagOperator,
        lambda: Complex64,
        f: Field,
        sector: Sector,
        phi1: f64,
    ) -> Result<Self> {
        if phi1 + sector.angle() >= std::f64::consts::PI {
            return Err(Error::Config(format!(
                "sector angles must satisfy φ₁ + φ < π, got {phi1} + {}",
                sector.angle()
            )));
        }
        if !sector.contains(lambda) {
            return Err(Error::Config(format!(
                "λ = {lambda} lies outside the sector of angle {}",
                sector.angle()
            )));
        }
        let rep = ellipticity_check(&spec, phi1, &FreqSampling::standard(spec.dim()));
        if !rep.elliptic || !rep.sector_ok {
            return Err(Error::Config(format!(
                "L(ξ) fails ellipticity or the sector condition near ξ = {:?} (K̂ = {:.3e})",
                rep.worst_xi, rep.k_hat
            )));
        }
        Self::unchecked(spec, a, lambda, f)
    }

    /// Skips the symbol scans; shapes are still validated.
    pub fn unchecked(spec: PolySymbolSpec, a: DiagOperator, lambda: Complex64, f: Field) -> Result<Self> {
        if f.grid().dim() != spec.dim() {
            return Err(Error::Usage(format!(
                "right-hand side is {}-dimensional, L(ξ) is {}-dimensional",
                f.grid().dim(),
                spec.dim()
            )));
        }
        if f.components() != a.dim() {
            return Err(Error::Usage(format!(
                "right-hand side has {} components, A has {}",
                f.components(),
                a.dim()
            )));
        }
        Ok(Self {
            spec,
            a,
            lambda,
            f: f.to_physical()?,
        })
    }

    pub fn spec(&self) -> &PolySymbolSpec {
        &self.spec
    }

    pub fn operator(&self) -> &DiagOperator {
        &self.a
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn rhs(&self) -> &Field {
        &self.f
    }

    pub fn with_rhs(&self, f: Field) -> Result<Self> {
        Self::unchecked(self.spec.clone(), self.a.clone(), self.lambda, f)
    }

    pub fn with_lambda(&self, lambda: Complex64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// `L(ξ)` on every frequency node.
    fn symbol_table(&self) -> Vec<Complex64> {
        let g = self.f.grid();
        (0..g.len())
            .map(|i| self.spec.eval(&g.freq_point(i)[..g.dim()]))
            .collect()
    }
}

/// Pencil `p_m(ξ)` at each node and component, node-major.
fn pencil(grid: &Grid, d: &[f64], lambda: Complex64, extra: &[Complex64], scale: Option<&[Complex64]>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(grid.len() * d.len());
    for node in 0..grid.len() {
        for dm in d {
            let a = match scale {
                Some(s) => s[node] * dm,
                None => Complex64::new(*dm, 0.0),
            };
            out.push(a + lambda + extra[node]);
        }
    }
    out
}

fn divide(f: &Field, p: &[Complex64]) -> Result<Field> {
    let fh = f.forward_ft()?;
    let m = f.components();
    let grid = *f.grid();
    let mut out = Vec::with_capacity(p.len());
    for (i, (v, z)) in fh.values().iter().zip(p).enumerate() {
        if z.norm() < SINGULAR_PENCIL {
            let xi = grid.freq_point(i / m);
            return Err(Error::Numeric(format!(
                "pencil entry m = {} is near singular at ξ = {:?}",
                i % m + 1,
                &xi[..grid.dim()]
            )));
        }
        out.push(v / z);
    }
    Field::new(grid, m, Domain::Frequency, out)?.inverse_ft()
}

fn multiply(u: &Field, p: &[Complex64]) -> Result<Field> {
    let uh = u.to_frequency()?;
    let out: Vec<Complex64> = uh.values().iter().zip(p).map(|(v, z)| v * z).collect();
    Field::new(*u.grid(), u.components(), Domain::Frequency, out)?.inverse_ft()
}

fn l2_norm(f: &Field) -> f64 {
    f.lq_norm(2.0, &LqNorm::new(2.0).expect("valid index"))
}

/// `u = F^{-1}[A + λ + L(ξ)]^{-1} f̂`.
pub fn solve_elliptic(p: &EllipticProblem) -> Result<Field> {
    let table = p.symbol_table();
    divide(&p.f, &pencil(p.f.grid(), &p.a.diagonal(), p.lambda, &table, None))
}

/// `Σ a_α D^α u + (A + λ) u - f` with spectral derivatives.
pub fn residual_field(p: &EllipticProblem, u: &Field) -> Result<Field> {
    let table = p.symbol_table();
    let lu = multiply(&u.to_physical()?, &pencil(p.f.grid(), &p.a.diagonal(), p.lambda, &table, None))?;
    lu.sub(&p.f.to_physical()?)
}

/// `L_2` norm of [`residual_field`].
pub fn residual(p: &EllipticProblem, u: &Field) -> Result<f64> {
    Ok(l2_norm(&residual_field(p, u)?))
}

/// `Σ_k a_k ∗ u^{(k)} + A ∗ u + λu = f` on a one-dimensional grid, with
/// `Â(ξ) = â(ξ) diag(d_m)`.
#[derive(Debug, Clone)]
pub struct ConvolutionProblem {
    spec: ConvSpec,
    a: DiagOperator,
    lambda: Complex64,
    f: Field,
}

impl ConvolutionProblem {
    /// Validates `|λ| ≥ λ₀ > 0`, the kernel condition and kernel
    /// integrability by quadrature on the problem grid.
    pub fn new(
        spec: ConvSpec,
        a: DiagOperator,
        lambda: Complex64,
        lambda0: f64,
        f: Field,
        phi1: f64,
    ) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::Config(format!("λ₀ must be positive, got {lambda0}")));
        }
        if lambda.norm() < lambda0 {
            return Err(Error::Config(format!("|λ| = {} is below λ₀ = {lambda0}", lambda.norm())));
        }
        let rep = condition51_check(&spec, phi1, &FreqSampling::standard(1));
        if !rep.holds() {
            return Err(Error::Config(format!(
                "the kernel condition fails near ξ = {:?} (Ĉ = {:.3e}, sector ok = {})",
                rep.worst_xi, rep.c_hat, rep.sector_ok
            )));
        }
        for (k, ker) in spec.kernels().iter().enumerate() {
            let q = ker.l1_quadrature(f.grid())?;
            if !q.is_finite() {
                return Err(Error::Config(format!("kernel a_{k} is not integrable")));
            }
        }
        Self::unchecked(spec, a, lambda, f)
    }

    pub fn unchecked(spec: ConvSpec, a: DiagOperator, lambda: Complex64, f: Field) -> Result<Self> {
        if f.grid().dim() != 1 {
            return Err(Error::Usage("convolution problems are one-dimensional".into()));
        }
        if f.components() != a.dim() {
            return Err(Error::Usage(format!(
                "right-hand side has {} components, A has {}",
                f.components(),
                a.dim()
            )));
        }
        Ok(Self {
            spec,
            a,
            lambda,
            f: f.to_physical()?,
        })
    }

    pub fn spec(&self) -> &ConvSpec {
        &self.spec
    }

    pub fn operator(&self) -> &DiagOperator {
        &self.a
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn rhs(&self) -> &Field {
        &self.f
    }

    pub fn with_rhs(&self, f: Field) -> Result<Self> {
        Self::unchecked(self.spec.clone(), self.a.clone(), self.lambda, f)
    }

    pub fn with_lambda(&self, lambda: Complex64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    fn tables(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let g = self.f.grid();
        let xs: Vec<f64> = (0..g.len()).map(|i| g.freq(i)).collect();
        (
            xs.iter().map(|&x| self.spec.l_eval(x)).collect(),
            xs.iter().map(|&x| self.spec.profile().eval(x)).collect(),
        )
    }

    fn pencil(&self) -> Vec<Complex64> {
        let (l, ahat) = self.tables();
        pencil(self.f.grid(), &self.a.diagonal(), self.lambda, &l, Some(&ahat))
    }
}

/// `u = F^{-1}[Â(ξ) + λ + L(ξ)]^{-1} f̂`.
pub fn solve_convolution(p: &ConvolutionProblem) -> Result<Field> {
    divide(&p.f, &p.pencil())
}

/// `‖Σ_k a_k ∗ u^{(k)} + A ∗ u + λu - f‖_{L_2}`, each convolution applied
/// as the multiplier `â_k(ξ)(iξ)^k`.
pub fn convolution_residual(p: &ConvolutionProblem, u: &Field) -> Result<f64> {
    Ok(l2_norm(&convolution_residual_field(p, u)?))
}

/// `Σ_k a_k ∗ u^{(k)} + A ∗ u + λu - f`.
pub fn convolution_residual_field(p: &ConvolutionProblem, u: &Field) -> Result<Field> {
    let lu = multiply(&u.to_physical()?, &p.pencil())?;
    lu.sub(&p.f.to_physical()?)
}

/// Component generator `f_m(x)` for `m = 1, 2, …`.
pub type ComponentFn = Arc<dyn Fn(usize, &[f64]) -> Complex64 + Send + Sync>;

/// Diagonal system `Σ a_α D^α u_m + (d_m + λ) u_m = f_m`, `m = 1..M`,
/// solved for several truncations `M`.
#[derive(Clone)]
pub struct InfiniteSystemProblem {
    pub space: SequenceSpace,
    pub truncations: Vec<usize>,
    pub spec: PolySymbolSpec,
    pub lambda: Complex64,
    pub grid: Grid,
    pub rhs: ComponentFn,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub from: usize,
    pub to: usize,
    /// `‖u^{(to)} - u^{(from)}‖_{L_2(l_q)}`.
    pub difference: f64,
}

#[derive(Debug, Clone)]
pub struct SystemSolution {
    pub solutions: Vec<(usize, Field)>,
    pub table: Vec<TruncationRow>,
    /// Whether the successive differences strictly decrease.
    pub monotone: bool,
    pub partial_sum: f64,
}

fn lq_padded(a: &Field, b: &Field, q: f64) -> Result<f64> {
    let (ma, mb) = (a.components(), b.components());
    let m = ma.max(mb);
    let grid = *a.grid();
    let mut diff = vec![Complex64::new(0.0, 0.0); grid.len() * m];
    for node in 0..grid.len() {
        for c in 0..m {
            let x = if c < ma { a.at(node, c) } else { Complex64::new(0.0, 0.0) };
            let y = if c < mb { b.at(node, c) } else { Complex64::new(0.0, 0.0) };
            diff[node * m + c] = x - y;
        }
    }
    Ok(Field::new(grid, m, Domain::Physical, diff)?.lq_norm(2.0, &LqNorm::new(q)?))
}

/// Solves each truncation by componentwise Fourier inversion and tabulates
/// the differences between successive truncations.
pub fn solve_infinite_system(p: &InfiniteSystemProblem) -> Result<SystemSolution> {
    let mut ms = p.truncations.clone();
    ms.sort_unstable();
    ms.dedup();
    let mmax = *ms.last().ok_or_else(|| Error::Config("no truncations given".into()))?;
    if mmax > p.space.truncation() {
        return Err(Error::Config(format!(
            "truncation {mmax} exceeds the {} available weights",
            p.space.truncation()
        )));
    }
    let cert = p.space.summability();
    if !cert.certified {
        return Err(Error::Config(format!(
            "weights do not show Σ 1/d_m < ∞ (growth exponent {:.3})",
            cert.growth_exponent
        )));
    }
    let solutions: Vec<Result<(usize, Field)>> = ms
        .par_iter()
        .map(|&m| {
            let weights = p.space.weights()[..m].to_vec();
            let a = DiagOperator::new(p.space.q(), weights)?;
            let rhs = p.rhs.clone();
            let f = Field::from_fn(p.grid, m, |x, out| {
                for (c, slot) in out.iter_mut().enumerate() {
                    *slot = rhs(c + 1, x);
                }
            })?;
            let prob = EllipticProblem::unchecked(p.spec.clone(), a, p.lambda, f)?;
            Ok((m, solve_elliptic(&prob)?))
        })
        .collect();
    let solutions: Vec<(usize, Field)> = solutions.into_iter().collect::<Result<_>>()?;
    let mut table = Vec::new();
    for w in solutions.windows(2) {
        table.push(TruncationRow {
            from: w[0].0,
            to: w[1].0,
            difference: lq_padded(&w[1].1, &w[0].1, p.space.q())?,
        });
    }
    let monotone = table.windows(2).all(|w| w[1].difference < w[0].difference);
    Ok(SystemSolution {
        solutions,
        table,
        monotone,
        partial_sum: cert.partial_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::apply_multiplier;
    use crate::symbols::{elliptic_pencil_inverse, KernelSpec, Profile};

    fn mode(grid: Grid, kappa: f64, comps: usize) -> Field {
        Field::from_fn(grid, comps, |x, o| {
            o[0] = Complex64::from_polar(1.0, kappa * x[0]);
        })
        .unwrap()
    }

    fn grid() -> Grid {
        Grid::new(1, 16.0, 256).unwrap()
    }

    #[test]
    fn single_mode_closed_form() {
        let g = grid();
        let kappa = 3.0 * std::f64::consts::PI / 16.0;
        let lam = Complex64::new(2.0, 1.0);
        let spec = PolySymbolSpec::axis_power(1, 2).unwrap();
        let a = DiagOperator::identity(2.0, 2).unwrap();
        let f = mode(g, kappa, 2);
        let p = EllipticProblem::new(spec, a, lam, f.clone(), Sector::new(1.0).unwrap(), 0.0).unwrap();
        let u = solve_elliptic(&p).unwrap();
        let expect = f.scale(Complex64::new(1.0, 0.0) / (1.0 + lam + kappa * kappa));
        assert!(u.sub(&expect).unwrap().max_abs() < 1e-12);
        assert!(residual(&p, &u).unwrap() < 1e-12);
        let zero = Field::zeros(g, 2, Domain::Physical);
        assert!((residual(&p, &zero).unwrap() - l2_norm(&f)).abs() < 1e-12);
        let z = solve_elliptic(&p.with_rhs(zero).unwrap()).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn pencil_consistency() {
        let g = grid();
        let spec = PolySymbolSpec::axis_power(1, 2).unwrap();
        let a = DiagOperator::new(2.0, vec![1.0, 4.0, 9.0]).unwrap();
        let lam = Complex64::new(0.5, -0.2);
        let f = Field::from_fn(g, 3, |x, o| {
            for (m, s) in o.iter_mut().enumerate() {
                *s = Complex64::new((-(x[0] - m as f64).powi(2)).exp(), 0.0);
            }
        })
        .unwrap();
        let p = EllipticProblem::unchecked(spec.clone(), a.clone(), lam, f.clone()).unwrap();
        let u = solve_elliptic(&p).unwrap();
        let v = apply_multiplier(&elliptic_pencil_inverse(&spec, &a, lam), &f).unwrap();
        assert!(u.sub(&v).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_sector_and_singular_pencil() {
        let g = grid();
        let spec = PolySymbolSpec::axis_power(1, 2).unwrap();
        let a = DiagOperator::identity(2.0, 1).unwrap();
        let f = mode(g, 0.0, 1);
        let bad = EllipticProblem::new(spec.clone(), a.clone(), Complex64::new(1.0, 0.0), f.clone(), Sector::new(2.0).unwrap(), 1.5);
        assert!(matches!(bad, Err(Error::Config(_))));
        let p = EllipticProblem::unchecked(spec, a, Complex64::new(-1.0, 0.0), f).unwrap();
        assert!(matches!(solve_elliptic(&p), Err(Error::Numeric(_))));
    }

    #[test]
    fn delta_kernels_reduce_to_elliptic() {
        let g = grid();
        let kappa = 5.0 * std::f64::consts::PI / 16.0;
        let lam = Complex64::new(3.0, 0.0);
        let spec = ConvSpec::new(
            vec![KernelSpec::Zero, KernelSpec::Zero, KernelSpec::Delta { weight: -1.0 }],
            Profile::constant(1.0),
        )
        .unwrap();
        let a = DiagOperator::identity(2.0, 1).unwrap();
        let f = mode(g, kappa, 1);
        let p = ConvolutionProblem::new(spec, a, lam, 1.0, f.clone(), 0.1).unwrap();
        let u = solve_convolution(&p).unwrap();
        let expect = f.scale(Complex64::new(1.0, 0.0) / (1.0 + lam + kappa * kappa));
        assert!(u.sub(&expect).unwrap().max_abs() < 1e-8);
        assert!(convolution_residual(&p, &u).unwrap() < 1e-10 * l2_norm(&f));
    }

    #[test]
    fn gaussian_kernels_residual_and_linearity() {
        let g = Grid::new(1, 16.0, 512).unwrap();
        let spec = ConvSpec::new(
            vec![
                KernelSpec::Gaussian { weight: 0.5, width: 1.0 },
                KernelSpec::Zero,
                KernelSpec::Delta { weight: -1.0 },
            ],
            Profile::one_plus_gaussian(),
        )
        .unwrap();
        let a = DiagOperator::new(2.0, vec![1.0, 4.0]).unwrap();
        let lam = Complex64::from_polar(5.0, 1.0);
        let f1 = Field::from_fn(g, 2, |x, o| {
            o[0] = Complex64::new((-x[0] * x[0]).exp(), 0.0);
            o[1] = Complex64::from_polar((-(x[0] - 1.0).powi(2)).exp(), 2.0 * x[0]);
        })
        .unwrap();
        let f2 = Field::from_fn(g, 2, |x, o| {
            o[0] = Complex64::new(0.0, (-(x[0] + 2.0).powi(2) / 3.0).exp());
            o[1] = Complex64::new(x[0] * (-x[0] * x[0] / 2.0).exp(), 0.0);
        })
        .unwrap();
        let p = ConvolutionProblem::new(spec, a, lam, 1.0, f1.clone(), 0.5).unwrap();
        let u1 = solve_convolution(&p).unwrap();
        assert!(convolution_residual(&p, &u1).unwrap() < 1e-8 * l2_norm(&f1));
        let u2 = solve_convolution(&p.with_rhs(f2.clone()).unwrap()).unwrap();
        let u12 = solve_convolution(&p.with_rhs(f1.add(&f2).unwrap()).unwrap()).unwrap();
        assert!(u12.sub(&u1.add(&u2).unwrap()).unwrap().max_abs() < 1e-11);
        let z = solve_convolution(&p.with_rhs(Field::zeros(g, 2, Domain::Physical)).unwrap()).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn residual_grows_linearly_with_defect() {
        let g = grid();
        let spec = PolySymbolSpec::axis_power(1, 2).unwrap();
        let a = DiagOperator::identity(2.0, 1).unwrap();
        let lam = Complex64::new(1.0, 0.0);
        let f = Field::from_fn(g, 1, |x, o| o[0] = Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let p = EllipticProblem::unchecked(spec, a, lam, f).unwrap();
        let u = solve_elliptic(&p).unwrap();
        let noise = mode(g, 0.0, 1);
        let r1 = residual(&p, &u.add(&noise.scale(Complex64::new(1e-3, 0.0))).unwrap()).unwrap();
        let r2 = residual(&p, &u.add(&noise.scale(Complex64::new(2e-3, 0.0))).unwrap()).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 1e-6);
        // A constant mode sees the pencil 1 + λ = 2.
        assert!((r1 - 2e-3 * l2_norm(&noise)).abs() < 1e-9);
    }

    #[test]
    fn convolution_lambda_floor() {
        let g = grid();
        let spec = ConvSpec::new(
            vec![KernelSpec::Zero, KernelSpec::Zero, KernelSpec::Delta { weight: -1.0 }],
            Profile::constant(1.0),
        )
        .unwrap();
        let a = DiagOperator::identity(2.0, 1).unwrap();
        let r = ConvolutionProblem::new(spec, a, Complex64::new(0.5, 0.0), 1.0, mode(g, 0.0, 1), 0.1);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn infinite_system_decouples_and_converges() {
        let g = grid();
        let kappa = 2.0 * std::f64::consts::PI / 16.0;
        let lam = Complex64::new(1.0, 0.0);
        let space = SequenceSpace::from_generator(2.0, 64, "m^2", |m| Ok(m * m)).unwrap();
        let p = InfiniteSystemProblem {
            space,
            truncations: vec![4, 8, 16, 32, 64],
            spec: PolySymbolSpec::axis_power(1, 2).unwrap(),
            lambda: lam,
            grid: g,
            rhs: Arc::new(move |m, x| Complex64::from_polar(1.0 / (m * m) as f64, kappa * x[0])),
        };
        let sol = solve_infinite_system(&p).unwrap();
        assert!(sol.monotone);
        let box_norm = (2.0 * g.half_width()).sqrt();
        for row in &sol.table {
            let tail: f64 = ((row.from + 1)..=row.to)
                .map(|m| {
                    let d = (m * m) as f64;
                    (1.0 / (d * (d + lam + kappa * kappa)).norm()).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            assert!((row.difference - box_norm * tail).abs() < 1e-12 * box_norm * tail.max(1e-300) + 1e-15);
        }
        // Component m of the largest truncation equals the scalar solve with d_m.
        let (_, big) = sol.solutions.last().unwrap();
        let d3 = DiagOperator::new(2.0, vec![9.0]).unwrap();
        let f3 = Field::from_fn(g, 1, |x, o| o[0] = Complex64::from_polar(1.0 / 9.0, kappa * x[0])).unwrap();
        let u3 = solve_elliptic(&EllipticProblem::unchecked(p.spec.clone(), d3, lam, f3).unwrap()).unwrap();
        assert!(big.component(2).sub(&u3).unwrap().max_abs() < 1e-15);
    }
}
