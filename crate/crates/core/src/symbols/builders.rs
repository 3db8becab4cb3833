//! Builders for the polynomial, elliptic, convolution and embedding symbols.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::checks::{condition51_check, ellipticity_check, FreqSampling};
use super::{OpJet, Symbol};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, MultiIndex};
use crate::jet::{i_monomial, Jet};
use crate::space::DiagOperator;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `θ(ξ) = Σ_k |ξ_k|^l`.
pub fn theta(xi: &[f64], l: usize) -> f64 {
    xi.iter().map(|v| v.abs().powi(l as i32)).sum()
}

/// Jet of `θ`. Even `l` is a polynomial and expands exactly everywhere.
pub fn theta_jet(x: &[Jet], l: usize) -> Jet {
    x.iter()
        .fold(x[0].zero_like(), |acc, v| &acc + &v.abs_pow(l as f64))
}

/// `L(ξ) = Σ a_α (iξ)^α` with complex coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolySymbolSpec {
    dim: usize,
    order: usize,
    coefficients: Vec<(Vec<usize>, Complex64)>,
}

impl PolySymbolSpec {
    pub fn new(dim: usize, order: usize, coefficients: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(Error::Config("polynomial symbol needs dim ≥ 1 and order ≥ 1".into()));
        }
        let mut out = Vec::with_capacity(coefficients.len());
        for (alpha, a) in coefficients {
            if alpha.dim() != dim {
                return Err(Error::Config(format!(
                    "multi-index {alpha} has dimension {}, expected {dim}",
                    alpha.dim()
                )));
            }
            if alpha.order() > order {
                return Err(Error::Config(format!(
                    "multi-index {alpha} exceeds the order {order}"
                )));
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Config(format!("coefficient of {alpha} is not finite")));
            }
            out.push((alpha.orders().to_vec(), a));
        }
        Ok(Self {
            dim,
            order,
            coefficients: out,
        })
    }

    /// `L(ξ) = Σ_k ξ_k^{order}` for even `order`, i.e. `a = (-1)^{order/2}`
    /// on each pure axis monomial.
    pub fn axis_power(dim: usize, order: usize) -> Result<Self> {
        if order % 2 != 0 {
            return Err(Error::Config("axis_power needs an even order".into()));
        }
        let a = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let coeffs = (0..dim)
            .map(|k| (MultiIndex::axis(dim, k, order), Complex64::new(a, 0.0)))
            .collect();
        Self::new(dim, order, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> Vec<(MultiIndex, Complex64)> {
        self.coefficients
            .iter()
            .map(|(a, c)| (MultiIndex::from_orders(a.clone()), *c))
            .collect()
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        self.coefficients
            .iter()
            .map(|(a, c)| c * MultiIndex::from_orders(a.clone()).monomial(xi))
            .sum()
    }

    pub fn jet(&self, x: &[Jet]) -> Jet {
        self.coefficients.iter().fold(x[0].zero_like(), |acc, (a, c)| {
            &acc + &i_monomial(x, a).scale(*c)
        })
    }

    pub fn as_symbol(&self) -> Symbol {
        let spec = self.clone();
        Symbol::scalar("L", self.dim, 1, move |x| spec.jet(x))
    }
}

impl fmt::Display for PolySymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .map(|(a, c)| format!("({}{:+}i)·(iξ)^{:?}", c.re, c.im, a))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Scalar kernels on `R` with closed-form transforms
/// `â(ξ) = ∫ a(x) e^{-ixξ} dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Zero,
    /// `w δ`, so `â ≡ w`.
    Delta { weight: f64 },
    /// `w (2πσ²)^{-1/2} e^{-x²/2σ²}`, so `â = w e^{-σ²ξ²/2}`.
    Gaussian { weight: f64, width: f64 },
}

impl KernelSpec {
    pub fn transform(&self, xi: f64) -> Complex64 {
        match *self {
            KernelSpec::Zero => Complex64::new(0.0, 0.0),
            KernelSpec::Delta { weight } => Complex64::new(weight, 0.0),
            KernelSpec::Gaussian { weight, width } => {
                Complex64::new(weight * (-0.5 * width * width * xi * xi).exp(), 0.0)
            }
        }
    }

    pub fn transform_jet(&self, x: &Jet) -> Jet {
        match *self {
            KernelSpec::Zero => x.zero_like(),
            KernelSpec::Delta { weight } => x.constant_like(Complex64::new(weight, 0.0)),
            KernelSpec::Gaussian { weight, width } => (x * x)
                .scale(Complex64::new(-0.5 * width * width, 0.0))
                .exp()
                .scale(Complex64::new(weight, 0.0)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, KernelSpec::Zero)
            || matches!(self, KernelSpec::Delta { weight } | KernelSpec::Gaussian { weight, .. } if *weight == 0.0)
    }

    /// `‖a‖_{L_1}` in closed form.
    pub fn l1_norm(&self) -> f64 {
        match *self {
            KernelSpec::Zero => 0.0,
            KernelSpec::Delta { weight } | KernelSpec::Gaussian { weight, .. } => weight.abs(),
        }
    }

    /// Samples the kernel on a one-dimensional grid. The delta becomes the
    /// discrete delta `w/h` at the node nearest the origin.
    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        if grid.dim() != 1 {
            return Err(Error::Usage("kernels live on one-dimensional grids".into()));
        }
        let h = grid.spacing();
        let spec = *self;
        Field::from_fn(grid.clone(), 1, move |x, out| {
            out[0] = match spec {
                KernelSpec::Zero => Complex64::new(0.0, 0.0),
                KernelSpec::Delta { weight } => {
                    if x[0].abs() < 0.5 * h {
                        Complex64::new(weight / h, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                KernelSpec::Gaussian { weight, width } => {
                    let c = weight / (2.0 * std::f64::consts::PI * width * width).sqrt();
                    Complex64::new(c * (-x[0] * x[0] / (2.0 * width * width)).exp(), 0.0)
                }
            }
        })
    }

    /// `â` on the frequency nodes, obtained from the FFT of the sampled
    /// kernel rather than the closed form.
    pub fn sampled_transform(&self, grid: &Grid) -> Result<Vec<Complex64>> {
        Ok(self.sample(grid)?.forward_ft()?.into_values())
    }

    /// Quadrature `h Σ |a(x_j)|` of the sampled kernel.
    pub fn l1_quadrature(&self, grid: &Grid) -> Result<f64> {
        let f = self.sample(grid)?;
        Ok(f.values().iter().map(|v| v.norm()).sum::<f64>() * grid.spacing())
    }
}

/// Scalar profile `â(ξ)` of the separable family `Â(ξ) = â(ξ)·diag(d_m)`.
#[derive(Clone)]
pub struct Profile {
    label: String,
    f: Arc<dyn Fn(&Jet) -> Jet + Send + Sync>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({})", self.label)
    }
}

impl Profile {
    pub fn new<F>(label: &str, f: F) -> Self
    where
        F: Fn(&Jet) -> Jet + Send + Sync + 'static,
    {
        Self {
            label: label.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(&format!("{c}"), move |x| x.constant_like(Complex64::new(c, 0.0)))
    }

    /// `1 + e^{-ξ²}`.
    pub fn one_plus_gaussian() -> Self {
        Self::new("1+exp(-xi^2)", |x| (-(x * x)).exp().add_scalar(ONE))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn jet(&self, x: &Jet) -> Jet {
        (self.f)(x)
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        self.jet(&Jet::point(&[xi], 0)[0]).value()
    }
}

/// Kernel data of a convolution equation on `R`.
#[derive(Debug, Clone)]
pub struct ConvSpec {
    kernels: Vec<KernelSpec>,
    profile: Profile,
}

impl ConvSpec {
    /// Kernels `a_0, …, a_l` (so `l = kernels.len() - 1`) and the profile `â`.
    pub fn new(kernels: Vec<KernelSpec>, profile: Profile) -> Result<Self> {
        if kernels.len() < 2 {
            return Err(Error::Config("convolution problems need kernels a_0..a_l with l ≥ 1".into()));
        }
        Ok(Self { kernels, profile })
    }

    pub fn order(&self) -> usize {
        self.kernels.len() - 1
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// `L(ξ) = Σ_k â_k(ξ)(iξ)^k`.
    pub fn l_jet(&self, x: &Jet) -> Jet {
        let xs = std::slice::from_ref(x);
        self.kernels
            .iter()
            .enumerate()
            .fold(x.zero_like(), |acc, (k, a)| {
                &acc + &(&a.transform_jet(x) * &i_monomial(xs, &[k]))
            })
    }

    pub fn l_eval(&self, xi: f64) -> Complex64 {
        self.l_jet(&Jet::point(&[xi], 0)[0]).value()
    }

    /// `Σ_k |â_k(ξ)|`.
    pub fn kernel_mass(&self, xi: f64) -> f64 {
        self.kernels.iter().map(|a| a.transform(xi).norm()).sum()
    }
}

fn complex(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// `σ = ⌈N(1 + 1/q₂ - 1/q₁)⌉ + 1`.
pub fn sigma_from_exponents(dim: usize, q1: f64, q2: f64) -> usize {
    ceil_clean(dim as f64 * (1.0 + 1.0 / q2 - 1.0 / q1)) + 1
}

/// `σ = ⌈N/η⌉ + 1`.
pub fn sigma_from_eta(dim: usize, eta: f64) -> usize {
    ceil_clean(dim as f64 / eta) + 1
}

/// Both forms of `σ`, which agree whenever `1/q₂ = 1/q₁ - 1/η′`.
pub fn sigma_checked(dim: usize, q1: f64, q2: f64, eta: f64) -> Result<usize> {
    let a = sigma_from_exponents(dim, q1, q2);
    let b = sigma_from_eta(dim, eta);
    if a != b {
        return Err(Error::Config(format!(
            "σ from (q1, q2) = {a} disagrees with σ from η = {b}; check 1/q2 = 1/q1 - 1/η'"
        )));
    }
    Ok(a)
}

/// Ceiling that ignores rounding noise below 1e-9.
fn ceil_clean(v: f64) -> usize {
    let r = v.round();
    if (v - r).abs() < 1e-9 {
        r.max(0.0) as usize
    } else {
        v.ceil().max(0.0) as usize
    }
}

/// `Ψ(ξ) = |ξ|^σ (iξ)^α A^{1-x} [A + θ(ξ)]^{-1}` with `x = (|α| + σ)/l`.
/// `σ = 0` gives the unweighted symbol.
pub fn build_embedding_symbol(
    alpha: &MultiIndex,
    a: &DiagOperator,
    l: usize,
    sigma: usize,
) -> Result<Symbol> {
    if l == 0 {
        return Err(Error::Config("embedding order l must be positive".into()));
    }
    let x = (alpha.order() + sigma) as f64 / l as f64;
    if x > 1.0 + 1e-12 {
        return Err(Error::Config(format!(
            "x = (|α| + σ)/l = {x} exceeds 1; the embedding needs x ≤ 1"
        )));
    }
    let d = a.diagonal();
    let powers: Vec<f64> = d.iter().map(|v| v.powf(1.0 - x)).collect();
    let orders = alpha.orders().to_vec();
    let dim = alpha.dim();
    let sym = Symbol::new("psi", dim, d.len(), move |xs| {
        let th = theta_jet(xs, l);
        let mut pre = i_monomial(xs, &orders);
        if sigma > 0 {
            pre = &pre * &crate::jet::sum_squares(xs).pow_nonneg(sigma as f64 / 2.0);
        }
        Ok(OpJet::Diag(
            d.iter()
                .zip(&powers)
                .map(|(dm, pm)| (&pre * &th.add_scalar(complex(*dm)).recip()).scale(complex(*pm)))
                .collect(),
        ))
    });
    Ok(sym
        .with_param("alpha", alpha)
        .with_param("l", l)
        .with_param("sigma", sigma)
        .with_param("x", x))
}

/// `σ_{1λ} = A[A + λ + L]^{-1}` and
/// `σ_{2λ} = Σ_{|α| ≤ 2l} |λ|^{1-|α|/2l} (iξ)^α [A + λ + L]^{-1}`.
#[derive(Debug, Clone)]
pub struct EllipticSymbols {
    pub sigma1: Symbol,
    pub sigma2: Symbol,
}

/// Builds the elliptic symbols after checking ellipticity and the sector
/// condition for `L` on the standard frequency sampling.
pub fn build_elliptic_symbols(
    spec: &PolySymbolSpec,
    a: &DiagOperator,
    lambda: Complex64,
    phi1: f64,
) -> Result<EllipticSymbols> {
    let rep = ellipticity_check(spec, phi1, &FreqSampling::standard(spec.dim()));
    if !rep.elliptic || !rep.sector_ok {
        return Err(Error::Config(format!(
            "L(ξ) = {spec} fails ellipticity (K̂ = {:.3e}, decay exponent {:.3}, sector ok = {}) near ξ = {:?}",
            rep.k_hat, rep.decay_exponent, rep.sector_ok, rep.worst_xi
        )));
    }
    Ok(elliptic_symbols_unchecked(spec, a, lambda))
}

pub(crate) fn elliptic_symbols_unchecked(
    spec: &PolySymbolSpec,
    a: &DiagOperator,
    lambda: Complex64,
) -> EllipticSymbols {
    let d = a.diagonal();
    let dim = spec.dim();
    let two_l = spec.order();
    let s1 = {
        let (spec, d) = (spec.clone(), d.clone());
        Symbol::new("sigma1", dim, d.len(), move |x| {
            let pencil = spec.jet(x).add_scalar(lambda);
            Ok(OpJet::Diag(
                d.iter()
                    .map(|dm| pencil.add_scalar(complex(*dm)).recip().scale(complex(*dm)))
                    .collect(),
            ))
        })
    };
    let s2 = {
        let (spec, d) = (spec.clone(), d.clone());
        let mag = lambda.norm();
        let weights: Vec<(Vec<usize>, f64)> = MultiIndex::all_up_to(dim, two_l)
            .into_iter()
            .map(|al| {
                let w = mag.powf(1.0 - al.order() as f64 / two_l as f64);
                (al.orders().to_vec(), w)
            })
            .collect();
        Symbol::new("sigma2", dim, d.len(), move |x| {
            let pencil = spec.jet(x).add_scalar(lambda);
            let numer = weights.iter().fold(x[0].zero_like(), |acc, (al, w)| {
                &acc + &i_monomial(x, al).scale(complex(*w))
            });
            Ok(OpJet::Diag(
                d.iter()
                    .map(|dm| &numer * &pencil.add_scalar(complex(*dm)).recip())
                    .collect(),
            ))
        })
    };
    let tag = |s: Symbol| s.with_param("lambda", lambda).with_param("L", spec);
    EllipticSymbols {
        sigma1: tag(s1),
        sigma2: tag(s2),
    }
}

/// `[A + λ + L(ξ)]^{-1}`, the solution multiplier of the elliptic problem.
pub fn elliptic_pencil_inverse(spec: &PolySymbolSpec, a: &DiagOperator, lambda: Complex64) -> Symbol {
    let (spec2, d) = (spec.clone(), a.diagonal());
    Symbol::new("pencil_inverse", spec.dim(), d.len(), move |x| {
        let pencil = spec2.jet(x).add_scalar(lambda);
        Ok(OpJet::Diag(d.iter().map(|dm| pencil.add_scalar(complex(*dm)).recip()).collect()))
    })
    .with_param("lambda", lambda)
}

/// `σ_0 = λ[Â + λ + L]^{-1}`, `σ_1 = Â[Â + λ + L]^{-1}` and
/// `σ_2 = Σ_k |λ|^{1-k/l} â_k (iξ)^k [Â + λ + L]^{-1}`.
#[derive(Debug, Clone)]
pub struct ConvSymbols {
    pub sigma0: Symbol,
    pub sigma1: Symbol,
    pub sigma2: Symbol,
}

/// Builds the convolution symbols after checking the kernel condition.
pub fn build_conv_symbols(
    spec: &ConvSpec,
    a: &DiagOperator,
    lambda: Complex64,
    phi1: f64,
) -> Result<ConvSymbols> {
    let rep = condition51_check(spec, phi1, &FreqSampling::standard(1));
    if !rep.holds() {
        return Err(Error::Config(format!(
            "the kernel condition fails: Ĉ = {:.3e}, sector ok = {} near ξ = {:?}",
            rep.c_hat, rep.sector_ok, rep.worst_xi
        )));
    }
    Ok(conv_symbols_unchecked(spec, a, lambda))
}

pub(crate) fn conv_symbols_unchecked(spec: &ConvSpec, a: &DiagOperator, lambda: Complex64) -> ConvSymbols {
    let d = a.diagonal();
    let m = d.len();
    let l = spec.order();
    let make = |name: &str, which: usize| {
        let label = spec.profile.label().to_string();
        let (spec, d) = (spec.clone(), d.clone());
        let mag = lambda.norm();
        Symbol::new(name, 1, m, move |x| {
            let xi = &x[0];
            let ahat = spec.profile.jet(xi);
            let big_l = spec.l_jet(xi).add_scalar(lambda);
            let numer2 = spec
                .kernels
                .iter()
                .enumerate()
                .fold(xi.zero_like(), |acc, (k, ak)| {
                    let w = mag.powf(1.0 - k as f64 / l as f64);
                    &acc + &(&ak.transform_jet(xi) * &i_monomial(x, &[k])).scale(complex(w))
                });
            Ok(OpJet::Diag(
                d.iter()
                    .map(|dm| {
                        let scaled = ahat.scale(complex(*dm));
                        let inv = (&scaled + &big_l).recip();
                        match which {
                            0 => inv.scale(lambda),
                            1 => &scaled * &inv,
                            _ => &numer2 * &inv,
                        }
                    })
                    .collect(),
            ))
        })
        .with_param("lambda", lambda)
        .with_param("profile", label)
    };
    ConvSymbols {
        sigma0: make("conv_sigma0", 0),
        sigma1: make("conv_sigma1", 1),
        sigma2: make("conv_sigma2", 2),
    }
}

/// `[Â(ξ) + λ + L(ξ)]^{-1}` for the convolution problem.
pub fn conv_pencil_inverse(spec: &ConvSpec, a: &DiagOperator, lambda: Complex64) -> Symbol {
    let (spec2, d) = (spec.clone(), a.diagonal());
    Symbol::new("conv_pencil_inverse", 1, d.len(), move |x| {
        let ahat = spec2.profile.jet(&x[0]);
        let big_l = spec2.l_jet(&x[0]).add_scalar(lambda);
        Ok(OpJet::Diag(
            d.iter()
                .map(|dm| (&ahat.scale(complex(*dm)) + &big_l).recip())
                .collect(),
        ))
    })
    .with_param("lambda", lambda)
}

/// `φ_k(ξ)` as a jet, via the normalized exponential bump.
pub fn phi_jet(x: &[Jet], k: i64) -> Jet {
    let r = super::jet_norm(x);
    let t = r.value().re;
    if k < 0 {
        return r.zero_like();
    }
    if k == 0 {
        if t >= 2.0 {
            return r.zero_like();
        }
        return psi_jet(&r.scale(complex(0.5))).scale(complex(-1.0)).add_scalar(ONE);
    }
    psi_jet(&r.scale(complex(2f64.powi(-(k as i32)))))
}

fn bump_jet(s: &Jet) -> Jet {
    let v = s.value().re;
    if v <= 0.5 || v >= 2.0 {
        return s.zero_like();
    }
    // exp(-1/((s - 1/2)(2 - s)))
    let a = s.add_scalar(complex(-0.5));
    let b = s.scale(complex(-1.0)).add_scalar(complex(2.0));
    (&a * &b).recip().scale(complex(-1.0)).exp()
}

fn psi_jet(s: &Jet) -> Jet {
    let v = s.value().re;
    if v <= 0.5 || v >= 2.0 {
        return s.zero_like();
    }
    let j0 = v.log2().floor() as i32;
    let denom = (j0 - 2..=j0 + 2).fold(s.zero_like(), |acc, j| {
        &acc + &bump_jet(&s.scale(complex(2f64.powi(-j))))
    });
    &bump_jet(s) / &denom
}

/// `φ_k · m`.
pub fn localized(m: &Symbol, k: i64) -> Symbol {
    m.times_scalar(&format!("phi_{k}"), Arc::new(move |x: &[Jet]| phi_jet(x, k)))
}

/// `ψ_k · m` with `ψ_k = φ_{k-1} + φ_k + φ_{k+1}`.
pub fn localized_triple(m: &Symbol, k: i64) -> Symbol {
    m.times_scalar(
        &format!("psi_{k}"),
        Arc::new(move |x: &[Jet]| &(&phi_jet(x, k - 1) + &phi_jet(x, k)) + &phi_jet(x, k + 1)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::phi;
    use crate::symbols::Op;

    fn diag(op: Op) -> Vec<Complex64> {
        match op {
            Op::Diag(d) => d,
            Op::Dense(_) => panic!("expected diagonal"),
        }
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(&[0.0, 0.0], 3), 0.0);
        assert_eq!(theta(&[1.0, 2.0], 2), 5.0);
        let x = Jet::point(&[1.0, -2.0], 1);
        assert_eq!(theta_jet(&x, 2).value().re, 5.0);
    }

    #[test]
    fn axis_power_is_positive() {
        let s = PolySymbolSpec::axis_power(2, 2).unwrap();
        assert!((s.eval(&[1.0, 2.0]) - complex(5.0)).norm() < 1e-14);
        let s4 = PolySymbolSpec::axis_power(1, 4).unwrap();
        assert!((s4.eval(&[2.0]) - complex(16.0)).norm() < 1e-13);
    }

    #[test]
    fn embedding_symbol_cases() {
        let a = DiagOperator::new(2.0, vec![1.0, 4.0, 9.0]).unwrap();
        let psi = build_embedding_symbol(&MultiIndex::from_orders(vec![1]), &a, 2, 0).unwrap();
        assert!(psi.eval(&[0.0]).unwrap().norm(2.0) == 0.0);
        let psi0 = build_embedding_symbol(&MultiIndex::zero(1), &a, 2, 0).unwrap();
        let v = diag(psi0.eval(&[1.5]).unwrap());
        for (m, d) in [1.0, 4.0, 9.0].iter().enumerate() {
            assert!((v[m].re - d / (d + 2.25)).abs() < 1e-15);
        }
        let err = build_embedding_symbol(&MultiIndex::from_orders(vec![3]), &a, 2, 0);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn sigma_forms_agree() {
        // η = 2 ⇒ η' = 2; q1 = 3 ⇒ 1/q2 = 1/3 - 1/2 < 0 is excluded, so use q1 = 1.5.
        let q1 = 1.5;
        let q2 = 1.0 / (1.0 / q1 - 0.5);
        assert_eq!(sigma_checked(1, q1, q2, 2.0).unwrap(), 2);
        assert_eq!(sigma_from_eta(1, 1.0), 2);
        assert!(sigma_checked(2, 2.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn sigma1_at_origin_is_identity() {
        let spec = PolySymbolSpec::axis_power(1, 2).unwrap();
        let a = DiagOperator::new(2.0, vec![1.0, 4.0]).unwrap();
        let s = build_elliptic_symbols(&spec, &a, complex(0.0), 0.1).unwrap();
        let v = diag(s.sigma1.eval(&[0.0]).unwrap());
        assert!(v.iter().all(|z| (z - ONE).norm() < 1e-15));
    }

    #[test]
    fn odd_symbol_refused() {
        let spec = PolySymbolSpec::new(1, 2, vec![(MultiIndex::from_orders(vec![1]), ONE)]).unwrap();
        let a = DiagOperator::identity(2.0, 2).unwrap();
        assert!(matches!(
            build_elliptic_symbols(&spec, &a, complex(1.0), 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn conv_sigma0_at_origin() {
        let spec = ConvSpec::new(
            vec![KernelSpec::Delta { weight: 1.0 }, KernelSpec::Zero, KernelSpec::Delta { weight: -1.0 }],
            Profile::constant(1.0),
        )
        .unwrap();
        let a = DiagOperator::new(2.0, vec![1.0, 4.0]).unwrap();
        let lam = 3.0;
        let s = build_conv_symbols(&spec, &a, complex(lam), 0.5).unwrap();
        let v = diag(s.sigma0.eval(&[0.0]).unwrap());
        // L(0) = â_0(0) = 1.
        for (m, d) in [1.0, 4.0].iter().enumerate() {
            assert!((v[m].re - lam / (d + lam + 1.0)).abs() < 1e-15);
            assert!(v[m].norm() <= 1.0);
        }
    }

    #[test]
    fn phi_jet_matches_tabulated() {
        for t in [0.3, 0.9, 1.3, 1.99, 2.7, 5.0, 7.9] {
            for k in 0..4 {
                let j = phi_jet(&Jet::point(&[t], 0), k).value().re;
                assert!((j - phi(k, t)).abs() < 1e-15, "k = {k}, t = {t}");
            }
        }
        let two = phi_jet(&Jet::point(&[0.6, 0.8], 0), 1).value().re;
        assert!((two - phi(1, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn kernel_transform_paths_agree() {
        let grid = Grid::new(1, 16.0, 512).unwrap();
        let k = KernelSpec::Gaussian { weight: 2.0, width: 0.7 };
        let sampled = k.sampled_transform(&grid).unwrap();
        for p in 0..grid.samples() {
            let xi = grid.freq(p);
            assert!((sampled[p] - k.transform(xi)).norm() < 1e-10);
        }
        assert!((k.l1_quadrature(&grid).unwrap() - 2.0).abs() < 1e-10);
    }
}
