//! Fourier multipliers, Young convolutions and probe-based norm estimates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::besov::{besov_norm_fourier, BesovParams};
use crate::dyadic::DyadicSystem;
use crate::error::{Error, Result};
use crate::grid::{Domain, Field, Grid};
use crate::symbols::{localized_triple, Op, Symbol};
use crate::space::ValueNorm;

/// A symbol evaluated once on every frequency node of a grid.
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    grid: Grid,
    ops: Vec<Op>,
}

impl MultiplierTable {
    pub fn new(m: &Symbol, grid: &Grid) -> Result<Self> {
        if m.dim() != grid.dim() {
            return Err(Error::Usage(format!(
                "symbol {} has dimension {}, grid has {}",
                m.name(),
                m.dim(),
                grid.dim()
            )));
        }
        let ops: Vec<Result<Op>> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let xi = grid.freq_point(i);
                m.eval(&xi[..grid.dim()])
            })
            .collect();
        Ok(Self {
            grid: *grid,
            ops: ops.into_iter().collect::<Result<_>>()?,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// `F^{-1}[m · F f]`.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.domain() != Domain::Physical {
            return Err(Error::Usage("multipliers act on physical-domain fields".into()));
        }
        if *f.grid() != self.grid {
            return Err(Error::Usage("field and multiplier live on different grids".into()));
        }
        let m = f.components();
        if let Some(op) = self.ops.first() {
            if op.dim() != m {
                return Err(Error::Usage(format!(
                    "symbol acts on {} components, field has {m}",
                    op.dim()
                )));
            }
        }
        let fhat = f.forward_ft()?;
        let mut out = Vec::with_capacity(fhat.values().len());
        for (node, op) in fhat.values().chunks(m).zip(&self.ops) {
            out.extend(op.apply(node));
        }
        Field::new(self.grid, m, Domain::Frequency, out)?.inverse_ft()
    }
}

/// `T_m f = F^{-1}[m(ξ) (F f)(ξ)]`.
pub fn apply_multiplier(m: &Symbol, f: &Field) -> Result<Field> {
    MultiplierTable::new(m, f.grid())?.apply(f)
}

/// `(k ∗ f)(x) = ∫ k(x - y) f(y) dy` through the discrete convolution
/// theorem. `k` is scalar or diagonal (one value per component).
pub fn young_convolution(k: &Field, f: &Field) -> Result<Field> {
    if k.grid() != f.grid() {
        return Err(Error::Usage("kernel and field live on different grids".into()));
    }
    if k.components() != 1 && k.components() != f.components() {
        return Err(Error::Usage(format!(
            "kernel has {} components, field has {}",
            k.components(),
            f.components()
        )));
    }
    let (kh, fh) = (k.to_frequency()?, f.to_frequency()?);
    let m = f.components();
    let kc = k.components();
    let out: Vec<Complex64> = fh
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let node = i / m;
            let c = if kc == 1 { 0 } else { i % m };
            v * kh.values()[node * kc + c]
        })
        .collect();
    Field::new(*f.grid(), m, Domain::Frequency, out)?.inverse_ft()
}

/// Probe-based lower estimate of an operator norm.
#[derive(Debug, Clone, Serialize)]
pub struct NormEstimate {
    /// Supremum of the probe ratios; a lower bound on the true norm.
    pub estimate: f64,
    pub argmax: Option<usize>,
    pub ratios: Vec<Option<f64>>,
    pub skipped: usize,
}

impl NormEstimate {
    fn from_ratios(ratios: Vec<Option<f64>>) -> Self {
        let mut estimate = 0.0;
        let mut argmax = None;
        for (i, r) in ratios.iter().enumerate() {
            if let Some(v) = r {
                if argmax.is_none() || *v > estimate {
                    estimate = *v;
                    argmax = Some(i);
                }
            }
        }
        let skipped = ratios.iter().filter(|r| r.is_none()).count();
        Self {
            estimate,
            argmax,
            ratios,
            skipped,
        }
    }
}

pub type Operator<'a> = dyn Fn(&Field) -> Result<Field> + Sync + 'a;

/// `sup_f ‖T f‖_{L_{q2}} / ‖f‖_{L_{q1}}` over the probes; zero probes skipped.
pub fn estimate_lq_norm(
    t: &Operator<'_>,
    q1: f64,
    q2: f64,
    probes: &[Field],
    e: &dyn ValueNorm,
) -> Result<NormEstimate> {
    let ratios: Vec<Result<Option<f64>>> = probes
        .par_iter()
        .map(|f| {
            let den = f.lq_norm(q1, e);
            if den == 0.0 {
                return Ok(None);
            }
            Ok(Some(t(f)?.lq_norm(q2, e) / den))
        })
        .collect();
    Ok(NormEstimate::from_ratios(ratios.into_iter().collect::<Result<_>>()?))
}

/// `sup_f ‖T f‖_{B^s_{q2,r}} / ‖f‖_{B^s_{q1,r}}` over the probes.
pub fn estimate_besov_norm(
    t: &Operator<'_>,
    params1: &BesovParams,
    params2: &BesovParams,
    probes: &[Field],
    sys: &DyadicSystem,
    e: &dyn ValueNorm,
) -> Result<NormEstimate> {
    if params1.s() != params2.s() || params1.r() != params2.r() {
        return Err(Error::Config(
            "Besov operator norms compare spaces with the same s and r".into(),
        ));
    }
    let ratios: Vec<Result<Option<f64>>> = probes
        .par_iter()
        .map(|f| {
            let den = besov_norm_fourier(f, params1, sys, e)?.norm;
            if den == 0.0 {
                return Ok(None);
            }
            Ok(Some(besov_norm_fourier(&t(f)?, params2, sys, e)?.norm / den))
        })
        .collect();
    Ok(NormEstimate::from_ratios(ratios.into_iter().collect::<Result<_>>()?))
}

/// `sup_f ‖F f‖_{L_{p′}} / ‖f‖_{L_p}` over the probes, with the frequency
/// measure `dξ`; a lower estimate of the Fourier-type constant.
pub fn fourier_type_constant(probes: &[Field], p: f64, e: &dyn ValueNorm) -> Result<NormEstimate> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Config(format!("Fourier type p must lie in [1, 2], got {p}")));
    }
    let pp = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
    let ratios: Vec<Result<Option<f64>>> = probes
        .par_iter()
        .map(|f| {
            let den = f.lq_norm(p, e);
            if den == 0.0 {
                return Ok(None);
            }
            Ok(Some(f.forward_ft()?.lq_norm(pp, e) / den))
        })
        .collect();
    Ok(NormEstimate::from_ratios(ratios.into_iter().collect::<Result<_>>()?))
}

/// Relative defect of `φ̌_k ∗ T_m f = T_{mψ_k}(φ̌_k ∗ f)`.
pub fn block_identity_defect(m: &Symbol, f: &Field, k: i64, sys: &DyadicSystem) -> Result<f64> {
    let lhs = sys.dyadic_block(&apply_multiplier(m, f)?, k)?.field;
    let rhs = apply_multiplier(&localized_triple(m, k), &sys.dyadic_block(f, k)?.field)?;
    let e = crate::space::LqNorm::new(2.0)?;
    let scale = lhs.lq_norm(2.0, &e).max(f.lq_norm(2.0, &e));
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs.sub(&rhs)?.lq_norm(2.0, &e) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{spectral_derivative, MultiIndex};
    use crate::probes::ProbeEnsemble;
    use crate::space::LqNorm;

    fn gaussian(grid: Grid, w: f64) -> Field {
        Field::from_fn(grid, 1, |x, o| {
            o[0] = Complex64::new((-x[0] * x[0] / (2.0 * w * w)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn identity_and_derivative_multipliers() {
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let f = gaussian(grid, 1.3);
        let id = apply_multiplier(&Symbol::identity(1, 1), &f).unwrap();
        let e = LqNorm::new(2.0).unwrap();
        assert!(id.sub(&f).unwrap().max_abs() < 1e-12);
        let d = Symbol::scalar("i xi", 1, 1, |x| x[0].scale(Complex64::new(0.0, 1.0)));
        let df = apply_multiplier(&d, &f).unwrap();
        let sd = spectral_derivative(&f, &MultiIndex::from_orders(vec![1])).unwrap();
        assert!(df.sub(&sd).unwrap().lq_norm(2.0, &e) < 1e-13);
    }

    #[test]
    fn gaussian_convolution_closed_form() {
        let grid = Grid::new(1, 16.0, 512).unwrap();
        let (a, b) = (0.8, 1.1);
        let norm = |w: f64| 1.0 / (2.0 * std::f64::consts::PI * w * w).sqrt();
        let k = gaussian(grid, a).scale(Complex64::new(norm(a), 0.0));
        let f = gaussian(grid, b);
        let kf = young_convolution(&k, &f).unwrap();
        let c = (a * a + b * b).sqrt();
        let expect = gaussian(grid, c).scale(Complex64::new(b / c, 0.0));
        assert!(kf.sub(&expect).unwrap().max_abs() < 1e-8);
        let zero = Field::zeros(grid, 1, Domain::Physical);
        assert!(young_convolution(&k, &zero).unwrap().is_zero());
    }

    #[test]
    fn discrete_delta_is_identity() {
        let grid = Grid::new(1, 8.0, 128).unwrap();
        let h = grid.spacing();
        let delta = Field::from_fn(grid, 1, |x, o| {
            o[0] = Complex64::new(if x[0].abs() < 0.5 * h { 1.0 / h } else { 0.0 }, 0.0)
        })
        .unwrap();
        let f = gaussian(grid, 0.9);
        assert!(young_convolution(&delta, &f).unwrap().sub(&f).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn identity_estimates() {
        let grid = Grid::new(1, 16.0, 256).unwrap();
        let probes: Vec<Field> = ProbeEnsemble::standard(3)
            .generate(&grid, 2)
            .unwrap()
            .into_iter()
            .map(|p| p.field)
            .collect();
        let e = LqNorm::new(2.0).unwrap();
        let id = |f: &Field| Ok(f.clone());
        let est = estimate_lq_norm(&id, 3.0, 3.0, &probes, &e).unwrap();
        assert!((est.estimate - 1.0).abs() < 1e-15);
        let sys = DyadicSystem::new(grid);
        let p = BesovParams::new(2.0, 2.0, 0.5).unwrap();
        let b = estimate_besov_norm(&id, &p, &p, &probes, &sys, &e).unwrap();
        assert!((b.estimate - 1.0).abs() < 1e-10);
    }

    #[test]
    fn block_identity_holds() {
        let grid = Grid::new(1, 16.0, 512).unwrap();
        let sys = DyadicSystem::new(grid);
        let m = Symbol::scalar("riesz", 1, 1, |x| {
            &x[0].scale(Complex64::new(0.0, 1.0))
                * &(&x[0] * &x[0]).add_scalar(Complex64::new(1.0, 0.0)).powf(-0.5)
        });
        for p in ProbeEnsemble::standard(5).generate(&grid, 1).unwrap() {
            for k in 0..=sys.k_max() {
                assert!(block_identity_defect(&m, &p.field, k, &sys).unwrap() < 1e-10);
            }
        }
    }
}
