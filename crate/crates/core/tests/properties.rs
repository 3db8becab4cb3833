use besov_lab::besov::{besov_norm_fourier, BesovParams};
use besov_lab::config::{parse_config, Config, Family, SweepKind};
use besov_lab::dyadic::DyadicSystem;
use besov_lab::grid::{Field, Grid};
use besov_lab::lab::{coercive_ratio, coercive_sweep_elliptic, Pencil, SweepPlan};
use besov_lab::probes::ProbeEnsemble;
use besov_lab::solvers::{solve_elliptic, EllipticProblem};
use besov_lab::space::{DiagOperator, LqNorm, Sector};
use besov_lab::symbols::PolySymbolSpec;
use num_complex::Complex64;
use proptest::prelude::*;

/// A sum of modulated Gaussians; every argument is a `(center, width, freq, re, im)` term.
fn packet(grid: Grid, comps: usize, terms: &[(f64, f64, f64, f64, f64)]) -> Field {
    Field::from_fn(grid, comps, |x, o| {
        for (c, slot) in o.iter_mut().enumerate() {
            *slot = Complex64::new(0.0, 0.0);
            for (k, &(x0, w, f, re, im)) in terms.iter().enumerate() {
                let r2: f64 = x.iter().map(|v| (v - x0) * (v - x0)).sum();
                let phase: f64 = x.iter().sum::<f64>() * f;
                let g = (-r2 / (2.0 * w * w)).exp();
                let a = Complex64::new(re, im) / (1.0 + ((c + k) % 3) as f64);
                *slot += a * Complex64::from_polar(g, phase);
            }
        }
    })
    .unwrap()
}

fn term() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (-2.0..2.0f64, 0.5..1.5f64, -6.0..6.0f64, -1.0..1.0f64, -1.0..1.0f64)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fft_parseval_roundtrip_linearity(
        dim in 1usize..=2,
        comps in 1usize..=3,
        t1 in prop::collection::vec(term(), 1..4),
        t2 in prop::collection::vec(term(), 1..4),
        c in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let grid = if dim == 1 { Grid::new(1, 12.0, 128).unwrap() } else { Grid::new(2, 10.0, 32).unwrap() };
        let f = packet(grid, comps, &t1);
        let g = packet(grid, comps, &t2);
        let e = LqNorm::new(2.0).unwrap();
        let fh = f.forward_ft().unwrap();
        let scale = (2.0 * std::f64::consts::PI).powf(dim as f64 / 2.0);
        prop_assert!(rel(fh.lq_norm(2.0, &e), scale * f.lq_norm(2.0, &e)) < 1e-12);
        let back = fh.inverse_ft().unwrap();
        prop_assert!(max_diff(&back, &f) < 1e-10 * f.max_abs());
        let c = Complex64::new(c.0, c.1);
        let lhs = f.scale(c).add(&g).unwrap().forward_ft().unwrap();
        let rhs = fh.scale(c).add(&g.forward_ft().unwrap()).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-11 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn besov_norm_homogeneous_and_subadditive(
        t1 in prop::collection::vec(term(), 1..3),
        t2 in prop::collection::vec(term(), 1..3),
        c in 0.1..5.0f64,
        qi in 0usize..3, ri in 0usize..3, si in 0usize..2,
    ) {
        let grid = Grid::new(1, 12.0, 256).unwrap();
        let (f, g) = (packet(grid, 2, &t1), packet(grid, 2, &t2));
        let p = BesovParams::new([1.5, 2.0, 4.0][qi], [1.0, 2.0, f64::INFINITY][ri], [0.5, 1.5][si]).unwrap();
        let sys = DyadicSystem::new(grid);
        let e = LqNorm::new(2.0).unwrap();
        let n = |h: &Field| besov_norm_fourier(h, &p, &sys, &e).unwrap().norm;
        let (nf, ng) = (n(&f), n(&g));
        prop_assert!(rel(n(&f.scale(Complex64::new(0.0, c))), c * nf) < 1e-12);
        prop_assert!(n(&f.add(&g).unwrap()) <= nf + ng + 1e-10);
    }

    #[test]
    fn elliptic_solve_is_linear(
        t1 in prop::collection::vec(term(), 1..3),
        t2 in prop::collection::vec(term(), 1..3),
        lam in (0.5..50.0f64, -1.5..1.5f64),
    ) {
        let grid = Grid::new(1, 12.0, 128).unwrap();
        let spec = PolySymbolSpec::axis_power(1, 2).unwrap();
        let a = DiagOperator::new(2.0, vec![1.0, 4.0, 9.0]).unwrap();
        let lambda = Complex64::from_polar(lam.0, lam.1);
        let sector = Sector::new(2.0).unwrap();
        let (f1, f2) = (packet(grid, 3, &t1), packet(grid, 3, &t2));
        let solve = |f: Field| {
            let p = EllipticProblem::new(spec.clone(), a.clone(), lambda, f, sector, 0.0).unwrap();
            solve_elliptic(&p).unwrap()
        };
        let sum = solve(f1.add(&f2).unwrap());
        let parts = solve(f1).add(&solve(f2)).unwrap();
        prop_assert!(max_diff(&sum, &parts) <= 1e-11 * sum.max_abs().max(1e-300));
    }

    #[test]
    fn coercive_ratio_is_scale_invariant(
        t in prop::collection::vec(term(), 1..3),
        c in (-3.0..3.0f64, 0.1..3.0f64),
        lam in (1.0..1e3f64, -1.9..1.9f64),
    ) {
        let grid = Grid::new(1, 12.0, 128).unwrap();
        let pencil = Pencil::elliptic(
            PolySymbolSpec::axis_power(1, 2).unwrap(),
            DiagOperator::new(2.0, vec![1.0, 4.0]).unwrap(),
            0.0,
        ).unwrap();
        let plan = SweepPlan::standard(grid, Sector::new(2.0).unwrap(), 2.0, 4.0, 2.0, 1.0, 1).unwrap();
        let f = packet(grid, 2, &t);
        let lambda = Complex64::from_polar(lam.0, lam.1);
        let base = coercive_ratio(&pencil, &plan, &f, lambda).unwrap().unwrap();
        let scaled = coercive_ratio(&pencil, &plan, &f.scale(Complex64::from_polar(c.1, c.0)), lambda)
            .unwrap()
            .unwrap();
        prop_assert!(rel(base, scaled) < 1e-12, "{} vs {}", base, scaled);
    }

    #[test]
    fn config_round_trips(
        dim in 1usize..=2,
        half in 1.0..40.0f64,
        samples_log in 4u32..9,
        q in 1.1..6.0f64,
        comps in 1usize..12,
        q1 in 1.2..3.0f64,
        gap in prop::option::of(0.05..0.5f64),
        r in prop::option::of(1.0..4.0f64),
        s in 0.1..3.0f64,
        phi in 0.1..3.0f64,
        seed in any::<u64>(),
        lam in (-5.0..5.0f64, -5.0..5.0f64),
        kind in 0usize..3,
        plot in any::<bool>(),
    ) {
        let mut c = Config::default();
        c.grid.dim = dim;
        c.grid.half_width = half;
        c.grid.samples = 1 << samples_log;
        c.space.q = q;
        c.space.components = comps;
        c.problem.family = Family::Elliptic;
        c.problem.lambda = Complex64::new(lam.0, lam.1);
        c.besov.q1 = q1;
        // 1/η' = gap/q1 keeps η' > q1; no gap means η' = ∞ (q2 = q1).
        c.besov.eta_prime = Some(gap.map(|g| q1 / g).unwrap_or(f64::INFINITY));
        c.besov.r = r.unwrap_or(f64::INFINITY);
        c.besov.s = s;
        c.sweep.phi = phi;
        c.sweep.seed = seed;
        c.sweep.kind = [SweepKind::Coercive, SweepKind::Resolvent, SweepKind::Semigroup][kind];
        c.embed.alpha = vec![1; dim];
        c.output.plot = plot;
        let text = c.to_string();
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, c);
    }
}

#[test]
fn sweep_sup_is_table_max_and_reproducible() {
    let grid = Grid::new(1, 8.0, 128).unwrap();
    let pencil = Pencil::elliptic(
        PolySymbolSpec::axis_power(1, 2).unwrap(),
        DiagOperator::new(2.0, vec![1.0, 4.0]).unwrap(),
        0.0,
    )
    .unwrap();
    let mut plan = SweepPlan::standard(grid, Sector::new(2.0).unwrap(), 2.0, 4.0, 2.0, 1.0, 5).unwrap();
    plan.magnitudes = vec![1.0, 10.0, 100.0];
    plan.probes = ProbeEnsemble::new(5, plan.probes.families.iter().map(|&(f, _)| (f, 2)).collect());
    let a = coercive_sweep_elliptic(&pencil, &plan).unwrap();
    let b = coercive_sweep_elliptic(&pencil, &plan).unwrap();
    let max = a.cells.iter().filter_map(|c| c.ratio).fold(0.0, f64::max);
    assert_eq!(a.sup, max);
    assert_eq!(a.sup.to_bits(), b.sup.to_bits());
    assert_eq!(a.to_csv(), b.to_csv());
}
