//! Line-oriented configuration: `[section]` headers, `key = value` pairs and
//! `#` comments. Numeric values accept constant expressions (`3*pi/4`) and
//! the literal `inf`.
//!
//! ```text
//! [grid]
//! dim = 1
//! half_width = 16
//! samples = 512
//!
//! [space]
//! q = 2
//! components = 8
//! weights = "m^2"
//!
//! [problem]
//! family = elliptic
//! order = 2
//! a[2] = -1
//! lambda = 1, 0.5
//!
//! [besov]
//! q1 = 2
//! eta_prime = 4
//! r = 2
//! s = 1
//! ```

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr, Var};
use crate::grid::{Field, Grid, MultiIndex};
use crate::lab::{q2_from, Pencil, SweepPlan};
use crate::probes::{ProbeEnsemble, ProbeFamily};
use crate::space::{log_space, DiagOperator, Sector, SequenceSpace};
use crate::symbols::{ConvSpec, KernelSpec, PolySymbolSpec, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Elliptic,
    Convolution,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsKind {
    /// `amp(m) e^{-|x|²/2w²}` per component.
    Gaussian,
    /// `amp(m) e^{iκx₁}` with `κ` snapped to the grid.
    Mode,
    /// Probe `probe_index` of the sweep ensemble.
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Coercive,
    Resolvent,
    Semigroup,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Coercive => "coercive",
            SweepKind::Resolvent => "resolvent",
            SweepKind::Semigroup => "semigroup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub dim: usize,
    pub half_width: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSection {
    pub q: f64,
    pub components: usize,
    /// Generator of `d_m` in the variable `m`.
    pub weights: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSection {
    pub family: Family,
    /// `2l` for elliptic and system problems, `l` for convolution problems.
    pub order: usize,
    /// `(α, Re a_α, Im a_α)`; empty means `Σ_k ξ_k^{order}`.
    pub coefficients: Vec<(Vec<usize>, f64, f64)>,
    pub kernels: Vec<KernelSpec>,
    /// `â(ξ)` in the variable `xi`.
    pub profile: Expr,
    pub phi1: f64,
    pub lambda: Complex64,
    pub lambda0: f64,
    pub truncations: Vec<usize>,
    pub rhs: RhsKind,
    pub width: f64,
    pub kappa: f64,
    pub probe_index: usize,
    /// Component amplitude in the variable `m`.
    pub amplitude: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesovSection {
    pub q1: f64,
    pub q2: Option<f64>,
    pub eta: Option<f64>,
    pub eta_prime: Option<f64>,
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub kind: SweepKind,
    pub phi: f64,
    pub rays: Option<Vec<f64>>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub magnitudes: usize,
    pub seed: u64,
    pub probes_per_family: usize,
    pub shift: f64,
    pub semigroup_phi: f64,
    pub decade_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedSection {
    pub alpha: Vec<usize>,
    pub l: usize,
    pub graph_p: f64,
    pub kernel: Option<KernelSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSection {
    /// `sigma1`, `sigma2`, `sigma0` (convolution only) or `pencil_inverse`.
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: String,
    pub format: Format,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridSection,
    pub space: SpaceSection,
    pub problem: ProblemSection,
    pub besov: BesovSection,
    pub sweep: SweepSection,
    pub embed: EmbedSection,
    pub symbol: SymbolSection,
    pub output: OutputSection,
}

fn expr(s: &str) -> Expr {
    parse_expr(s).expect("built-in expression parses")
}

impl Default for Config {
    /// Documented defaults: a 1-D grid `[-16, 16)` with 512 nodes,
    /// `E = l_2` truncated at 8 with `d_m = m²`, the elliptic problem
    /// `-u'' + Au + λu = f` with `λ = 1`, `B^1_{2,2} → B^1_{4,2}` (`η′ = 4`),
    /// sector angle 2 and `|λ| ∈ [1, 1e4]` on 25 magnitudes.
    fn default() -> Self {
        Self {
            grid: GridSection {
                dim: 1,
                half_width: 16.0,
                samples: 512,
            },
            space: SpaceSection {
                q: 2.0,
                components: 8,
                weights: expr("m^2"),
            },
            problem: ProblemSection {
                family: Family::Elliptic,
                order: 2,
                coefficients: Vec::new(),
                kernels: vec![
                    KernelSpec::Gaussian { weight: 0.5, width: 1.0 },
                    KernelSpec::Zero,
                    KernelSpec::Delta { weight: -1.0 },
                ],
                profile: expr("1 + exp(-xi^2)"),
                phi1: 0.0,
                lambda: Complex64::new(1.0, 0.0),
                lambda0: 1.0,
                truncations: vec![4, 8, 16, 32],
                rhs: RhsKind::Gaussian,
                width: 1.0,
                kappa: 1.0,
                probe_index: 0,
                amplitude: expr("1/m^2"),
            },
            besov: BesovSection {
                q1: 2.0,
                q2: None,
                eta: None,
                eta_prime: Some(4.0),
                r: 2.0,
                s: 1.0,
            },
            sweep: SweepSection {
                kind: SweepKind::Coercive,
                phi: 2.0,
                rays: None,
                lambda_min: 1.0,
                lambda_max: 1e4,
                magnitudes: 25,
                seed: 2024,
                probes_per_family: 6,
                shift: 0.0,
                semigroup_phi: 3.0 * PI / 4.0,
                decade_factor: 3.0,
            },
            embed: EmbedSection {
                alpha: vec![2],
                l: 4,
                graph_p: 2.0,
                kernel: None,
            },
            symbol: SymbolSection { name: "sigma1".into() },
            output: OutputSection {
                dir: "out".into(),
                format: Format::Json,
                plot: false,
            },
        }
    }
}

/// Resolved exponent bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub q1: f64,
    pub q2: f64,
    pub eta: f64,
    pub eta_prime: f64,
    /// `q₂ = ∞`, the endpoint the theorems allow but norms treat as a sup.
    pub q2_infinite: bool,
}

fn dual(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() { 0.0 } else { 1.0 / p }
}

impl BesovSection {
    pub fn exponents(&self) -> Result<Exponents> {
        let q1 = self.q1;
        let from_eta = match (self.eta, self.eta_prime) {
            (Some(e), Some(ep)) => {
                if !(e >= 1.0) || (inv(e) + inv(ep) - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!("η = {e} and η' = {ep} are not conjugate")));
                }
                Some(ep)
            }
            (Some(e), None) => {
                if !(e >= 1.0) {
                    return Err(Error::Config(format!("η must be at least 1, got {e}")));
                }
                Some(dual(e))
            }
            (None, Some(ep)) => Some(ep),
            (None, None) => None,
        };
        let eta_prime = match (self.q2, from_eta) {
            (Some(q2), Some(ep)) => {
                if (inv(q2) - (inv(q1) - inv(ep))).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "q2 = {q2} is inconsistent with 1/q2 = 1/q1 - 1/η' for q1 = {q1}, η' = {ep}"
                    )));
                }
                ep
            }
            (Some(q2), None) => {
                if inv(q2) > inv(q1) {
                    return Err(Error::Config(format!(
                        "q2 = {q2} < q1 = {q1}: 1/q2 = 1/q1 - 1/η' has no solution with η' ≥ 1"
                    )));
                }
                let d = inv(q1) - inv(q2);
                if d == 0.0 { f64::INFINITY } else { 1.0 / d }
            }
            (None, Some(ep)) => ep,
            (None, None) => f64::INFINITY,
        };
        let q2 = q2_from(q1, eta_prime)?;
        Ok(Exponents {
            q1,
            q2,
            eta: dual(eta_prime),
            eta_prime,
            q2_infinite: q2.is_infinite(),
        })
    }
}

impl Config {
    /// Notes about accepted but notable settings.
    pub fn flags(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Ok(e) = self.besov.exponents() {
            if e.q2_infinite {
                v.push("q2 = inf: output norms use the sup form".into());
            }
        }
        v
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, self.grid.half_width, self.grid.samples)
    }

    /// Number of components of `E`; systems use the largest truncation.
    pub fn components(&self) -> usize {
        match self.problem.family {
            Family::System => self.problem.truncations.iter().cloned().max().unwrap_or(1),
            _ => self.space.components,
        }
    }

    pub fn space(&self) -> Result<SequenceSpace> {
        let w = self.space.weights.clone();
        SequenceSpace::from_generator(self.space.q, self.components(), w.source(), |m| w.eval_m(m))
    }

    pub fn operator(&self) -> Result<DiagOperator> {
        Ok(self.space()?.operator())
    }

    pub fn poly_spec(&self) -> Result<PolySymbolSpec> {
        let (dim, order) = (self.grid.dim, self.problem.order);
        if self.problem.coefficients.is_empty() {
            return PolySymbolSpec::axis_power(dim, order);
        }
        let c = self
            .problem
            .coefficients
            .iter()
            .map(|(a, re, im)| (MultiIndex::from_orders(a.clone()), Complex64::new(*re, *im)))
            .collect();
        PolySymbolSpec::new(dim, order, c)
    }

    pub fn profile(&self) -> Profile {
        let e = self.problem.profile.clone();
        let label = e.source().to_string();
        Profile::new(&label, move |x| e.eval_jet_xi(x))
    }

    pub fn conv_spec(&self) -> Result<ConvSpec> {
        ConvSpec::new(self.problem.kernels.clone(), self.profile())
    }

    /// The problem's pencil, with ellipticity or the kernel condition checked.
    pub fn pencil(&self) -> Result<Pencil> {
        let a = self.operator()?;
        match self.problem.family {
            Family::Elliptic | Family::System => Pencil::elliptic(self.poly_spec()?, a, self.problem.phi1),
            Family::Convolution => {
                Pencil::convolution(self.conv_spec()?, a, self.problem.phi1, self.problem.lambda0)
            }
        }
    }

    pub fn sector(&self) -> Result<Sector> {
        Sector::new(self.sweep.phi)
    }

    pub fn probes(&self) -> ProbeEnsemble {
        ProbeEnsemble::new(
            self.sweep.seed,
            ProbeFamily::ALL.iter().map(|&f| (f, self.sweep.probes_per_family)).collect(),
        )
    }

    pub fn plan(&self) -> Result<SweepPlan> {
        let e = self.besov.exponents()?;
        let sector = self.sector()?;
        let rays = match &self.sweep.rays {
            Some(r) => r.clone(),
            None if self.sweep.phi == 0.0 => vec![0.0],
            None => vec![-self.sweep.phi, 0.0, self.sweep.phi],
        };
        SweepPlan::new(
            self.grid()?,
            sector,
            rays,
            log_space(self.sweep.lambda_min, self.sweep.lambda_max, self.sweep.magnitudes),
            self.probes(),
            e.q1,
            e.eta_prime,
            self.besov.r,
            self.besov.s,
        )
    }

    /// Right-hand side with `components` values per node.
    pub fn rhs(&self, components: usize) -> Result<Field> {
        let grid = self.grid()?;
        let amps = (1..=components)
            .map(|m| self.problem.amplitude.eval_m(m as f64))
            .collect::<Result<Vec<f64>>>()?;
        match self.problem.rhs {
            RhsKind::Gaussian => {
                let w = self.problem.width;
                Field::from_fn(grid, components, |x, o| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    let g = (-r2 / (2.0 * w * w)).exp();
                    for (s, a) in o.iter_mut().zip(&amps) {
                        *s = Complex64::new(a * g, 0.0);
                    }
                })
            }
            RhsKind::Mode => {
                let k = self.snapped_kappa()?;
                Field::from_fn(grid, components, |x, o| {
                    let e = Complex64::from_polar(1.0, k * x[0]);
                    for (s, a) in o.iter_mut().zip(&amps) {
                        *s = e * a;
                    }
                })
            }
            RhsKind::Probe => {
                let probes = self.probes().generate(&grid, components)?;
                let p = probes.into_iter().nth(self.problem.probe_index).ok_or_else(|| {
                    Error::Config(format!("probe_index {} is out of range", self.problem.probe_index))
                })?;
                Ok(p.field)
            }
        }
    }

    /// `κ` rounded to the nearest frequency node.
    pub fn snapped_kappa(&self) -> Result<f64> {
        let grid = self.grid()?;
        let step = grid.freq_spacing();
        let k = (self.problem.kappa / step).round() * step;
        if k.abs() >= grid.max_freq() {
            return Err(Error::Config(format!("kappa = {} exceeds the grid band", self.problem.kappa)));
        }
        Ok(k)
    }

    /// Cross-field checks; every problem is reported with its line when known.
    pub fn validate(&self) -> Result<()> {
        let mut errs: Vec<String> = [
            self.grid().map(|_| ()),
            self.besov.exponents().map(|_| ()),
            crate::besov::BesovParams::new(self.besov.q1, self.besov.r, self.besov.s).map(|_| ()),
            self.space.weights.require_only(&[Var::M]),
            self.problem.amplitude.require_only(&[Var::M]),
            self.problem.profile.require_only(&[Var::Xi]),
            self.space().map(|_| ()),
            self.sector().map(|_| ()),
        ]
        .into_iter()
        .filter_map(|r| r.err().map(|e| e.to_string()))
        .collect();
        if self.space.components == 0 {
            errs.push("components must be at least 1".into());
        }
        match self.problem.family {
            Family::Convolution => {
                if self.grid.dim != 1 {
                    errs.push("convolution problems need dim = 1".into());
                }
                if !(self.problem.lambda0 > 0.0) {
                    errs.push(format!("lambda0 must be positive, got {}", self.problem.lambda0));
                }
                if self.problem.kernels.len() != self.problem.order + 1 {
                    errs.push(format!(
                        "order {} needs kernels a[0]..a[{}], got {}",
                        self.problem.order,
                        self.problem.order,
                        self.problem.kernels.len()
                    ));
                }
            }
            _ => {
                if let Err(e) = self.poly_spec() {
                    errs.push(e.to_string());
                }
            }
        }
        if self.symbol.name == "sigma0" && self.problem.family != Family::Convolution {
            errs.push("symbol sigma0 exists only for convolution problems".into());
        }
        if self.problem.family == Family::System && self.problem.truncations.is_empty() {
            errs.push("system problems need truncations".into());
        }
        if self.embed.alpha.len() != self.grid.dim {
            errs.push(format!(
                "embed alpha has {} entries, dim is {}",
                self.embed.alpha.len(),
                self.grid.dim
            ));
        }
        if !(self.sweep.lambda_min > 0.0 && self.sweep.lambda_max > self.sweep.lambda_min) {
            errs.push("need 0 < lambda_min < lambda_max".into());
        }
        if self.sweep.magnitudes < 2 {
            errs.push("magnitudes must be at least 2".into());
        }
        if self.problem.rhs == RhsKind::Probe
            && self.problem.probe_index >= 4 * self.sweep.probes_per_family
        {
            errs.push(format!("probe_index {} is out of range", self.problem.probe_index));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn kernel_text(k: &KernelSpec) -> String {
    match k {
        KernelSpec::Zero => "zero".into(),
        KernelSpec::Delta { weight } => format!("delta({})", num(*weight)),
        KernelSpec::Gaussian { weight, width } => format!("gaussian({}, {})", num(*weight), num(*width)),
    }
}

fn list<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Elliptic => "elliptic",
        Family::Convolution => "convolution",
        Family::System => "system",
    }
}

/// Canonical text form; `parse_config` of the output gives an equal config.
impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.grid;
        writeln!(f, "[grid]\ndim = {}\nhalf_width = {}\nsamples = {}\n", g.dim, num(g.half_width), g.samples)?;
        let s = &self.space;
        writeln!(f, "[space]\nq = {}\ncomponents = {}\nweights = \"{}\"\n", num(s.q), s.components, s.weights)?;
        let p = &self.problem;
        writeln!(f, "[problem]\nfamily = {}\norder = {}", family_name(p.family), p.order)?;
        for (a, re, im) in &p.coefficients {
            writeln!(f, "a[{}] = {}, {}", list(a), num(*re), num(*im))?;
        }
        for (k, ker) in p.kernels.iter().enumerate() {
            writeln!(f, "kernel[{k}] = {}", kernel_text(ker))?;
        }
        writeln!(f, "profile = \"{}\"", p.profile)?;
        writeln!(f, "phi1 = {}", num(p.phi1))?;
        writeln!(f, "lambda = {}, {}", num(p.lambda.re), num(p.lambda.im))?;
        writeln!(f, "lambda0 = {}", num(p.lambda0))?;
        writeln!(f, "truncations = {}", list(&p.truncations))?;
        let rhs = match p.rhs {
            RhsKind::Gaussian => "gaussian",
            RhsKind::Mode => "mode",
            RhsKind::Probe => "probe",
        };
        writeln!(f, "rhs = {rhs}\nwidth = {}\nkappa = {}\nprobe_index = {}", num(p.width), num(p.kappa), p.probe_index)?;
        writeln!(f, "amplitude = \"{}\"\n", p.amplitude)?;
        let b = &self.besov;
        writeln!(f, "[besov]\nq1 = {}", num(b.q1))?;
        if let Some(v) = b.q2 {
            writeln!(f, "q2 = {}", num(v))?;
        }
        if let Some(v) = b.eta {
            writeln!(f, "eta = {}", num(v))?;
        }
        if let Some(v) = b.eta_prime {
            writeln!(f, "eta_prime = {}", num(v))?;
        }
        writeln!(f, "r = {}\ns = {}\n", num(b.r), num(b.s))?;
        let w = &self.sweep;
        writeln!(f, "[sweep]\nkind = {}\nphi = {}", w.kind.name(), num(w.phi))?;
        if let Some(r) = &w.rays {
            writeln!(f, "rays = {}", r.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", "))?;
        }
        writeln!(
            f,
            "lambda_min = {}\nlambda_max = {}\nmagnitudes = {}\nseed = {}\nprobes_per_family = {}\nshift = {}\nsemigroup_phi = {}\ndecade_factor = {}\n",
            num(w.lambda_min),
            num(w.lambda_max),
            w.magnitudes,
            w.seed,
            w.probes_per_family,
            num(w.shift),
            num(w.semigroup_phi),
            num(w.decade_factor)
        )?;
        let e = &self.embed;
        writeln!(f, "[embed]\nalpha = {}\nl = {}\ngraph_p = {}", list(&e.alpha), e.l, num(e.graph_p))?;
        if let Some(k) = &e.kernel {
            writeln!(f, "kernel = {}", kernel_text(k))?;
        }
        writeln!(f, "\n[symbol]\nname = {}\n", self.symbol.name)?;
        let o = &self.output;
        let fmt_name = match o.format {
            Format::Json => "json",
            Format::Csv => "csv",
        };
        write!(f, "[output]\ndir = \"{}\"\nformat = {fmt_name}\nplot = {}\n", o.dir, o.plot)
    }
}

struct LineErr(usize, String);

fn parse_number(v: &str) -> std::result::Result<f64, String> {
    let t = v.trim();
    match t {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let e = parse_expr(t).map_err(|e| e.to_string())?;
    if !e.variables().is_empty() {
        return Err(format!("'{t}' must be a constant"));
    }
    e.eval_f64(&crate::expr::Env { m: None, xi: None }).map_err(|e| e.to_string())
}

fn parse_uint(v: &str) -> std::result::Result<usize, String> {
    v.trim().parse::<usize>().map_err(|_| format!("'{}' is not a non-negative integer", v.trim()))
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    split_top(v).iter().map(|s| f(s)).collect()
}

/// Splits on commas outside parentheses.
fn split_top(v: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in v.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn unquote(v: &str) -> &str {
    let t = v.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
        &t[1..t.len() - 1]
    } else {
        t
    }
}

fn parse_kernel(v: &str) -> std::result::Result<KernelSpec, String> {
    let t = v.trim();
    if t == "zero" {
        return Ok(KernelSpec::Zero);
    }
    let (name, rest) = t.split_once('(').ok_or_else(|| format!("unknown kernel '{t}'"))?;
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("kernel '{t}' is missing ')'"))?;
    let a = parse_list(args, parse_number)?;
    match (name.trim(), a.as_slice()) {
        ("delta", [w]) => Ok(KernelSpec::Delta { weight: *w }),
        ("gaussian", [w, s]) if *s > 0.0 => Ok(KernelSpec::Gaussian { weight: *w, width: *s }),
        ("gaussian", [_, s]) => Err(format!("gaussian width must be positive, got {s}")),
        _ => Err(format!("kernel '{t}' needs delta(w), gaussian(w, width) or zero")),
    }
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        t => Err(format!("'{t}' is not true or false")),
    }
}

fn parse_expr_value(v: &str) -> std::result::Result<Expr, String> {
    parse_expr(unquote(v)).map_err(|e| e.to_string())
}

/// Parses the config text; all problems are reported together, each with
/// its line number. Cross-field checks run after parsing.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut c = Config::default();
    let mut errs: Vec<LineErr> = Vec::new();
    let mut section = String::new();
    let mut coefficients_seen = false;
    let mut kernels: Vec<(usize, KernelSpec)> = Vec::new();
    let mut kernels_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = match raw.find('#') {
            Some(p) if !raw[..p].contains('"') || raw[..p].matches('"').count() % 2 == 0 => &raw[..p],
            _ => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            match line.strip_suffix(']') {
                Some(name) => {
                    let name = name[1..].trim();
                    if ["grid", "space", "problem", "besov", "sweep", "embed", "symbol", "output"].contains(&name) {
                        section = name.to_string();
                    } else {
                        errs.push(LineErr(ln, format!("unknown section [{name}]")));
                        section = "?".into();
                    }
                }
                None => errs.push(LineErr(ln, "malformed section header".into())),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errs.push(LineErr(ln, format!("expected 'key = value', got '{line}'")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if section.is_empty() {
            errs.push(LineErr(ln, format!("key '{key}' appears before any section")));
            continue;
        }
        if section == "?" {
            continue;
        }
        let r: std::result::Result<(), String> = (|| {
            match (section.as_str(), key) {
                ("grid", "dim") => c.grid.dim = parse_uint(value)?,
                ("grid", "half_width") => c.grid.half_width = parse_number(value)?,
                ("grid", "samples") => c.grid.samples = parse_uint(value)?,
                ("space", "q") => c.space.q = parse_number(value)?,
                ("space", "components") => c.space.components = parse_uint(value)?,
                ("space", "weights") => c.space.weights = parse_expr_value(value)?,
                ("problem", "family") => {
                    c.problem.family = match value {
                        "elliptic" => Family::Elliptic,
                        "convolution" => Family::Convolution,
                        "system" => Family::System,
                        _ => return Err(format!("unknown family '{value}'")),
                    }
                }
                ("problem", "order") => c.problem.order = parse_uint(value)?,
                ("problem", k) if k.starts_with("a[") && k.ends_with(']') => {
                    if !coefficients_seen {
                        c.problem.coefficients.clear();
                        coefficients_seen = true;
                    }
                    let alpha = parse_list(&k[2..k.len() - 1], parse_uint)?;
                    let v = parse_list(value, parse_number)?;
                    let (re, im) = match v.as_slice() {
                        [re] => (*re, 0.0),
                        [re, im] => (*re, *im),
                        _ => return Err("coefficients take 're' or 're, im'".into()),
                    };
                    c.problem.coefficients.push((alpha, re, im));
                }
                ("problem", k) if k.starts_with("kernel[") && k.ends_with(']') => {
                    if !kernels_seen {
                        kernels.clear();
                        kernels_seen = true;
                    }
                    let idx = parse_uint(&k[7..k.len() - 1])?;
                    if kernels.iter().any(|(j, _)| *j == idx) {
                        return Err(format!("kernel[{idx}] given twice"));
                    }
                    kernels.push((idx, parse_kernel(value)?));
                }
                ("problem", "profile") => c.problem.profile = parse_expr_value(value)?,
                ("problem", "phi1") => c.problem.phi1 = parse_number(value)?,
                ("problem", "lambda") => {
                    let v = parse_list(value, parse_number)?;
                    c.problem.lambda = match v.as_slice() {
                        [re] => Complex64::new(*re, 0.0),
                        [re, im] => Complex64::new(*re, *im),
                        _ => return Err("lambda takes 're' or 're, im'".into()),
                    };
                }
                ("problem", "lambda0") => c.problem.lambda0 = parse_number(value)?,
                ("problem", "truncations") => c.problem.truncations = parse_list(value, parse_uint)?,
                ("problem", "rhs") => {
                    c.problem.rhs = match value {
                        "gaussian" => RhsKind::Gaussian,
                        "mode" => RhsKind::Mode,
                        "probe" => RhsKind::Probe,
                        _ => return Err(format!("unknown rhs '{value}'")),
                    }
                }
                ("problem", "width") => c.problem.width = parse_number(value)?,
                ("problem", "kappa") => c.problem.kappa = parse_number(value)?,
                ("problem", "probe_index") => c.problem.probe_index = parse_uint(value)?,
                ("problem", "amplitude") => c.problem.amplitude = parse_expr_value(value)?,
                ("besov", "q1") => c.besov.q1 = parse_number(value)?,
                ("besov", "q2") => c.besov.q2 = Some(parse_number(value)?),
                ("besov", "eta") => {
                    c.besov.eta = Some(parse_number(value)?);
                    if c.besov.eta_prime == Some(4.0) && !text_has_key(text, "eta_prime") {
                        c.besov.eta_prime = None;
                    }
                }
                ("besov", "eta_prime") => c.besov.eta_prime = Some(parse_number(value)?),
                ("besov", "r") => c.besov.r = parse_number(value)?,
                ("besov", "s") => c.besov.s = parse_number(value)?,
                ("sweep", "kind") => {
                    c.sweep.kind = match value {
                        "coercive" => SweepKind::Coercive,
                        "resolvent" => SweepKind::Resolvent,
                        "semigroup" => SweepKind::Semigroup,
                        _ => return Err(format!("unknown sweep kind '{value}'")),
                    }
                }
                ("sweep", "phi") => c.sweep.phi = parse_number(value)?,
                ("sweep", "rays") => c.sweep.rays = Some(parse_list(value, parse_number)?),
                ("sweep", "lambda_min") => c.sweep.lambda_min = parse_number(value)?,
                ("sweep", "lambda_max") => c.sweep.lambda_max = parse_number(value)?,
                ("sweep", "magnitudes") => c.sweep.magnitudes = parse_uint(value)?,
                ("sweep", "seed") => {
                    c.sweep.seed = value.parse().map_err(|_| format!("'{value}' is not a seed"))?
                }
                ("sweep", "probes_per_family") => c.sweep.probes_per_family = parse_uint(value)?,
                ("sweep", "shift") => c.sweep.shift = parse_number(value)?,
                ("sweep", "semigroup_phi") => c.sweep.semigroup_phi = parse_number(value)?,
                ("sweep", "decade_factor") => c.sweep.decade_factor = parse_number(value)?,
                ("embed", "alpha") => c.embed.alpha = parse_list(value, parse_uint)?,
                ("embed", "l") => c.embed.l = parse_uint(value)?,
                ("embed", "graph_p") => c.embed.graph_p = parse_number(value)?,
                ("embed", "kernel") => c.embed.kernel = Some(parse_kernel(value)?),
                ("symbol", "name") => {
                    let n = unquote(value);
                    if !["sigma1", "sigma2", "sigma0", "pencil_inverse"].contains(&n) {
                        return Err(format!("unknown symbol '{n}'"));
                    }
                    c.symbol.name = n.to_string();
                }
                ("output", "dir") => c.output.dir = unquote(value).to_string(),
                ("output", "format") => {
                    c.output.format = match value {
                        "json" => Format::Json,
                        "csv" => Format::Csv,
                        _ => return Err(format!("unknown format '{value}'")),
                    }
                }
                ("output", "plot") => c.output.plot = parse_bool(value)?,
                _ => return Err(format!("unknown key '{key}' in [{section}]")),
            }
            Ok(())
        })();
        if let Err(m) = r {
            errs.push(LineErr(ln, m));
        }
    }
    if kernels_seen {
        kernels.sort_by_key(|(j, _)| *j);
        if kernels.iter().enumerate().any(|(i, (j, _))| i != *j) {
            errs.push(LineErr(0, "kernel indices must run 0, 1, ..., l without gaps".into()));
        }
        c.problem.kernels = kernels.into_iter().map(|(_, k)| k).collect();
    }
    if !errs.is_empty() {
        let msg = errs
            .iter()
            .map(|LineErr(l, m)| if *l > 0 { format!("line {l}: {m}") } else { m.clone() })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Config(msg));
    }
    c.validate()?;
    Ok(c)
}

fn text_has_key(text: &str, key: &str) -> bool {
    text.lines().any(|l| l.split_once('=').map(|(k, _)| k.trim() == key).unwrap_or(false))
}
