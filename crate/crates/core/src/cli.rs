//! Command-line front end: argument parsing, subcommand dispatch and exit
//! codes (0 success, 1 a numerical bound failed, 2 configuration or usage
//! error, 3 numeric error).

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::besov::{besov_norm_difference, besov_norm_fourier, default_order, BesovParams, DifferenceQuadrature};
use crate::config::{parse_config, Config, Family, Format, RhsKind, SweepKind};
use crate::dyadic::DyadicSystem;
use crate::error::{Error, Result};
use crate::grid::{Field, MultiIndex};
use crate::lab::{
    coercive_sweep_convolution, coercive_sweep_elliptic, embedding_sweep, resolvent_sweep, semigroup_ray_check,
    symbol_sweep, Pencil, SweepReport,
};
use crate::report::{to_value, write_outcome, Check, FieldDump, Outcome, Provenance, SIGMA1_SLACK};
use crate::solvers::{
    convolution_residual_field, residual_field, solve_convolution, solve_elliptic, solve_infinite_system,
    ComponentFn, ConvolutionProblem, EllipticProblem, InfiniteSystemProblem,
};
use crate::space::{positivity_constant_default, LqNorm};
use crate::symbols::{
    build_conv_symbols, build_elliptic_symbols, condition51_check, conv_pencil_inverse, elliptic_pencil_inverse,
    ellipticity_check, mikhlin_constant, mikhlin_order, FreqSampling, Symbol,
};

#[derive(Debug, Parser)]
#[command(name = "besov-lab", version, about = "Besov norms, multiplier solvers and uniform-estimate sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier and difference Besov norms of the configured right-hand side.
    Norm(Common),
    /// Solve the configured problem and report residuals.
    Solve(Common),
    /// Hypothesis checks and symbol bounds over the λ sweep.
    CheckSymbol(Common),
    /// Coercive, resolvent or semigroup sweep.
    Sweep(Common),
    /// Embedding ratio sweep.
    Embed(Common),
    /// All of the above in one report.
    Report(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Norm(c) => ("norm", c),
            Command::Solve(c) => ("solve", c),
            Command::CheckSymbol(c) => ("check-symbol", c),
            Command::Sweep(c) => ("sweep", c),
            Command::Embed(c) => ("embed", c),
            Command::Report(c) => ("report", c),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Probe seed (overrides `[sweep] seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report format; `csv` adds the CSV tables next to the JSON report.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, common) = cli.command.parts();
    match execute(name, common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("besov-lab {name}: {e}");
            e.exit_code()
        }
    }
}

fn execute(name: &str, common: &Common) -> Result<i32> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Error::Io(format!("{}: {e}", common.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(s) = common.seed {
        config.sweep.seed = s;
    }
    if let Some(f) = common.format {
        config.output.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let outcome = run_subcommand(name, &config)?;
    let prov = Provenance::from_config(&config)?;
    let paths = write_outcome(&dir, &outcome, &prov)?;
    for c in &outcome.checks {
        println!(
            "{} {}: {:.6e} (bound {:.6e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    for f in &outcome.flags {
        println!("note: {f}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(outcome.exit_code())
}

/// Runs one subcommand on a parsed config without touching the filesystem.
pub fn run_subcommand(name: &str, c: &Config) -> Result<Outcome> {
    let mut out = dispatch(name, c)?;
    out.flags.splice(0..0, c.flags());
    Ok(out)
}

fn dispatch(name: &str, c: &Config) -> Result<Outcome> {
    match name {
        "norm" => norm(c),
        "solve" => solve(c),
        "check-symbol" => check_symbol(c),
        "sweep" => sweep(c),
        "embed" => embed(c),
        "report" => report(c),
        _ => Err(Error::Usage(format!("unknown subcommand '{name}'"))),
    }
}

fn norm(c: &Config) -> Result<Outcome> {
    let grid = c.grid()?;
    let f = c.rhs(c.components())?;
    let e = LqNorm::new(c.space.q)?;
    let ex = c.besov.exponents()?;
    let params = BesovParams::new(ex.q1, c.besov.r, c.besov.s)?;
    let sys = DyadicSystem::new(grid);
    let fourier = besov_norm_fourier(&f, &params, &sys, &e)?;
    let quad = DifferenceQuadrature::default();
    let difference = besov_norm_difference(&f, &params, default_order(params.s()), &quad, &e)?;
    let output = besov_norm_fourier(&f, &params.with_q(ex.q2)?, &sys, &e)?;
    let mut o = Outcome::new(
        "norm",
        json!({
            "components": f.components(),
            "lq_norm": f.lq_norm(ex.q1, &e),
            "fourier": to_value(&fourier)?,
            "difference": to_value(&difference)?,
            "quadrature": to_value(&quad)?,
            "ratio": difference.norm / fourier.norm,
            "fourier_q2": { "q": ex.q2, "norm": output.norm },
        }),
    );
    o.flags.extend(fourier.warning);
    Ok(o)
}

fn field_artifact(u: &Field, r: &Field) -> Result<(String, String)> {
    let v = json!({ "solution": to_value(&FieldDump::new(u)?)?, "residual": to_value(&FieldDump::new(r)?)? });
    Ok(("solve_fields.json".into(), serde_json::to_string(&v).map_err(|e| Error::Data(e.to_string()))?))
}

fn l2(f: &Field) -> Result<f64> {
    Ok(f.lq_norm(2.0, &LqNorm::new(2.0)?))
}

fn solve(c: &Config) -> Result<Outcome> {
    let lambda = c.problem.lambda;
    let a = c.operator()?;
    match c.problem.family {
        Family::Elliptic | Family::Convolution => {
            let f = c.rhs(c.components())?;
            let (u, r) = if c.problem.family == Family::Elliptic {
                let p = EllipticProblem::new(c.poly_spec()?, a, lambda, f.clone(), c.sector()?, c.problem.phi1)?;
                let u = solve_elliptic(&p)?;
                let r = residual_field(&p, &u)?;
                (u, r)
            } else {
                let p = ConvolutionProblem::new(c.conv_spec()?, a, lambda, c.problem.lambda0, f.clone(), c.problem.phi1)?;
                let u = solve_convolution(&p)?;
                let r = convolution_residual_field(&p, &u)?;
                (u, r)
            };
            let (fn_, rn) = (l2(&f)?, l2(&r)?);
            let mut o = Outcome::new(
                "solve",
                json!({
                    "family": c.problem.family,
                    "lambda": lambda,
                    "rhs_l2": fn_,
                    "solution_l2": l2(&u)?,
                    "residual_l2": rn,
                    "residual_relative": if fn_ > 0.0 { rn / fn_ } else { 0.0 },
                }),
            );
            o.artifacts.push(field_artifact(&u, &r)?);
            Ok(o)
        }
        Family::System => {
            let pencil = c.pencil()?;
            let sector = c.sector()?;
            if !sector.contains(lambda) {
                return Err(Error::Config(format!("λ = {lambda} lies outside the sector of angle {}", sector.angle())));
            }
            let Pencil::Elliptic { spec, .. } = pencil else {
                unreachable!("system problems use an elliptic pencil")
            };
            let n = c.components();
            let amps = (1..=n)
                .map(|m| c.problem.amplitude.eval_m(m as f64))
                .collect::<Result<Vec<f64>>>()?;
            let rhs: ComponentFn = match c.problem.rhs {
                RhsKind::Gaussian => {
                    let w = c.problem.width;
                    Arc::new(move |m, x| {
                        let r2: f64 = x.iter().map(|v| v * v).sum();
                        Complex64::new(amps[m - 1] * (-r2 / (2.0 * w * w)).exp(), 0.0)
                    })
                }
                RhsKind::Mode => {
                    let k = c.snapped_kappa()?;
                    Arc::new(move |m, x| Complex64::from_polar(amps[m - 1], k * x[0]))
                }
                RhsKind::Probe => return Err(Error::Config("system problems take rhs = gaussian or mode".into())),
            };
            let p = InfiniteSystemProblem {
                space: c.space()?,
                truncations: c.problem.truncations.clone(),
                spec,
                lambda,
                grid: c.grid()?,
                rhs,
            };
            let sol = solve_infinite_system(&p)?;
            let worst = sol
                .table
                .windows(2)
                .map(|w| w[1].difference / w[0].difference)
                .fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
            let norms = sol
                .solutions
                .iter()
                .map(|(m, u)| Ok(json!({ "truncation": m, "solution_l2": l2(u)? })))
                .collect::<Result<Vec<Value>>>()?;
            let mut o = Outcome::new(
                "solve",
                json!({
                    "family": "system",
                    "lambda": lambda,
                    "truncations": norms,
                    "table": to_value(&sol.table)?,
                    "monotone": sol.monotone,
                    "weight_partial_sum": sol.partial_sum,
                }),
            );
            if sol.table.len() >= 2 {
                o.checks.push(Check {
                    name: "truncation differences decrease".into(),
                    value: worst,
                    bound: 1.0,
                    pass: sol.monotone,
                });
            }
            if let Some((_, u)) = sol.solutions.last() {
                let v = json!({ "solution": to_value(&FieldDump::new(u)?)? });
                o.artifacts.push(("solve_fields.json".into(), v.to_string()));
            }
            Ok(o)
        }
    }
}

fn finite(name: &str, v: f64) -> Check {
    Check::at_most(name, v, f64::MAX)
}

fn named_symbol(c: &Config, lambda: Complex64) -> Result<Symbol> {
    let a = c.operator()?;
    let phi1 = c.problem.phi1;
    let name = c.symbol.name.as_str();
    match c.problem.family {
        Family::Convolution => {
            let spec = c.conv_spec()?;
            if name == "pencil_inverse" {
                return Ok(conv_pencil_inverse(&spec, &a, lambda));
            }
            let s = build_conv_symbols(&spec, &a, lambda, phi1)?;
            Ok(match name {
                "sigma0" => s.sigma0,
                "sigma1" => s.sigma1,
                _ => s.sigma2,
            })
        }
        _ => {
            let spec = c.poly_spec()?;
            if name == "pencil_inverse" {
                return Ok(elliptic_pencil_inverse(&spec, &a, lambda));
            }
            let s = build_elliptic_symbols(&spec, &a, lambda, phi1)?;
            Ok(if name == "sigma1" { s.sigma1 } else { s.sigma2 })
        }
    }
}

fn check_symbol(c: &Config) -> Result<Outcome> {
    let dim = c.grid.dim;
    let sampling = FreqSampling::standard(dim);
    let hypothesis = match c.problem.family {
        Family::Convolution => {
            let r = condition51_check(&c.conv_spec()?, c.problem.phi1, &sampling);
            if !r.holds() {
                return Err(Error::Config(format!(
                    "the kernel condition fails near ξ = {:?} (Ĉ = {:.3e}, sector ok = {})",
                    r.worst_xi, r.c_hat, r.sector_ok
                )));
            }
            to_value(&r)?
        }
        _ => {
            let spec = c.poly_spec()?;
            let r = ellipticity_check(&spec, c.problem.phi1, &sampling);
            if !(r.elliptic && r.sector_ok) {
                return Err(Error::Config(format!(
                    "L(ξ) = {spec} is not elliptic in S({}) near ξ = {:?} (K̂ = {:.3e}, decay exponent {:.3})",
                    c.problem.phi1, r.worst_xi, r.k_hat, r.decay_exponent
                )));
            }
            to_value(&r)?
        }
    };
    let pencil = c.pencil()?;
    let plan = c.plan()?;
    let sweep = symbol_sweep(&pencil, &plan, &sampling)?;
    let mhat = positivity_constant_default(pencil.operator(), plan.sector)?;
    let growth = sweep.growth();
    let mut checks = Vec::new();
    for ((name, sup), g) in sweep.names.iter().zip(&sweep.sups).zip(&growth) {
        if name == "sigma1" && !matches!(pencil, Pencil::Convolution { .. }) {
            checks.push(Check::at_most("sup sigma1 <= 1 + M", *sup, 1.0 + mhat + SIGMA1_SLACK));
        } else {
            checks.push(finite(&format!("sup {name} finite"), *sup));
        }
        checks.push(Check::at_most(format!("{name} per-decade growth"), *g, c.sweep.decade_factor));
    }
    let ex = c.besov.exponents()?;
    let order = mikhlin_order(dim, 1.0, ex.eta);
    let sym = named_symbol(c, c.problem.lambda)?;
    let mikhlin = mikhlin_constant(&sym, order, &sampling, pencil.operator().q())?;
    checks.push(finite(&format!("Mikhlin constant of {}", c.symbol.name), mikhlin.constant));
    let mut o = Outcome::new(
        "check-symbol",
        json!({
            "hypothesis": hypothesis,
            "positivity_constant": mhat,
            "sampling_points": sampling.len(),
            "symbols": to_value(&sweep)?,
            "growth": growth,
            "mikhlin": { "symbol": c.symbol.name, "lambda": c.problem.lambda, "report": to_value(&mikhlin)? },
        }),
    );
    o.checks = checks;
    Ok(o)
}

fn sweep_outcome(command: &str, c: &Config, rep: &SweepReport, uniform: bool) -> Result<Outcome> {
    let mut o = Outcome::new(command, to_value(rep)?);
    o.checks.push(finite("sup ratio finite", rep.sup));
    if uniform {
        o.checks.push(Check::at_most("per-decade spread", rep.decade_spread, c.sweep.decade_factor));
    }
    if rep.failures > 0 {
        o.flags.push(format!("{} cells failed; see cells[].error", rep.failures));
    }
    let stem = command.replace('-', "_");
    if c.output.format == Format::Csv {
        o.artifacts.push((format!("{stem}_table.csv"), rep.to_csv()));
    }
    if c.output.plot {
        o.artifacts.push((format!("{stem}_plot.csv"), rep.plot_csv()));
    }
    Ok(o)
}

fn sweep(c: &Config) -> Result<Outcome> {
    let pencil = c.pencil()?;
    let plan = c.plan()?;
    let (rep, uniform) = match c.sweep.kind {
        SweepKind::Coercive => {
            let rep = match pencil {
                Pencil::Convolution { .. } => coercive_sweep_convolution(&pencil, &plan)?,
                _ => coercive_sweep_elliptic(&pencil, &plan)?,
            };
            (rep, true)
        }
        SweepKind::Resolvent => (resolvent_sweep(&pencil, &plan)?, true),
        SweepKind::Semigroup => (semigroup_ray_check(&pencil, c.sweep.shift, c.sweep.semigroup_phi, &plan)?, false),
    };
    sweep_outcome("sweep", c, &rep, uniform)
}

fn embed(c: &Config) -> Result<Outcome> {
    let plan = c.plan()?;
    let alpha = MultiIndex::from_orders(c.embed.alpha.clone());
    let a = c.operator()?;
    let rep = embedding_sweep(&alpha, c.embed.l, &a, c.embed.kernel.as_ref(), c.embed.graph_p, &plan)?;
    let mut o = sweep_outcome("embed", c, &rep, false)?;
    if let Some(k) = &c.embed.kernel {
        let l1 = k.l1_norm();
        let excess = rep
            .cells
            .iter()
            .filter(|cell| cell.terms.len() == 2)
            .map(|cell| cell.terms[1] - l1 * cell.terms[0])
            .fold(f64::NEG_INFINITY, f64::max);
        o.checks.push(Check::at_most("convolution term minus Young bound", excess, 1e-9));
    }
    Ok(o)
}

fn report(c: &Config) -> Result<Outcome> {
    let mut sections = serde_json::Map::new();
    let mut all = Outcome::new("report", Value::Null);
    for name in ["norm", "solve", "check-symbol", "sweep", "embed"] {
        let o = dispatch(name, c)?;
        sections.insert(
            name.into(),
            json!({ "status": o.status(), "checks": to_value(&o.checks)?, "result": o.result }),
        );
        all.checks.extend(o.checks.into_iter().map(|mut ch| {
            ch.name = format!("{name}: {}", ch.name);
            ch
        }));
        all.flags.extend(o.flags.into_iter().map(|f| format!("{name}: {f}")));
        all.artifacts.extend(o.artifacts);
    }
    all.result = Value::Object(sections);
    Ok(all)
}
