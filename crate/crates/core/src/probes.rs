//! Seeded probe fields used to estimate operator norms from below.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFamily {
    /// Modulated Gaussians with random centers, widths and coefficients.
    Gaussian,
    /// Gaussian wave packets centred on a dyadic frequency `1.5·2^k`.
    DyadicBump,
    /// Random trigonometric polynomials under a wide Gaussian window.
    TrigPoly,
    /// Independent Gaussians per component of `E`.
    ComponentMix,
}

impl ProbeFamily {
    pub const ALL: [ProbeFamily; 4] = [
        ProbeFamily::Gaussian,
        ProbeFamily::DyadicBump,
        ProbeFamily::TrigPoly,
        ProbeFamily::ComponentMix,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProbeFamily::Gaussian => "gaussian",
            ProbeFamily::DyadicBump => "dyadic_bump",
            ProbeFamily::TrigPoly => "trig_poly",
            ProbeFamily::ComponentMix => "component_mix",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Probe {
    pub family: ProbeFamily,
    pub index: usize,
    pub field: Field,
}

/// Deterministic probe corpus: a seed and a count per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEnsemble {
    pub seed: u64,
    pub families: Vec<(ProbeFamily, usize)>,
}

/// Boundary values of every probe stay below this multiple of its maximum.
pub const BOUNDARY_DECAY: f64 = 1e-14;

struct Shape {
    h: f64,
    half: f64,
    max_freq: f64,
}

impl Shape {
    fn width(&self, rng: &mut ChaCha8Rng) -> f64 {
        let hi = self.half / 12.0;
        let lo = (6.0 * self.h).max(self.half / 64.0).min(0.99 * hi);
        lo * (hi / lo).powf(rng.gen::<f64>())
    }

    /// Largest modulation keeping the spectral tail of width `w` negligible.
    fn max_modulation(&self, w: f64) -> f64 {
        (self.max_freq - 9.0 / w).max(0.0).min(self.max_freq / 2.0)
    }
}

fn coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn center(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-0.25..0.25) * half).collect()
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn gauss(x: &[f64], c: &[f64], w: f64) -> f64 {
    let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
    (-r2 / (2.0 * w * w)).exp()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ProbeEnsemble {
    pub fn new(seed: u64, families: Vec<(ProbeFamily, usize)>) -> Self {
        Self { seed, families }
    }

    /// Six probes from each family (24 in total).
    pub fn standard(seed: u64) -> Self {
        Self::new(seed, ProbeFamily::ALL.iter().map(|&f| (f, 6)).collect())
    }

    /// 50 probes: 13 + 13 + 12 + 12.
    pub fn corpus50(seed: u64) -> Self {
        Self::new(
            seed,
            vec![
                (ProbeFamily::Gaussian, 13),
                (ProbeFamily::DyadicBump, 13),
                (ProbeFamily::TrigPoly, 12),
                (ProbeFamily::ComponentMix, 12),
            ],
        )
    }

    pub fn count(&self) -> usize {
        self.families.iter().map(|(_, c)| c).sum()
    }

    /// Generates the probes on `grid` with `components` values per node.
    /// Each family draws from its own stream so counts can change without
    /// disturbing the other families.
    pub fn generate(&self, grid: &Grid, components: usize) -> Result<Vec<Probe>> {
        if components == 0 {
            return Err(Error::Usage("probes need at least one component".into()));
        }
        let shape = Shape {
            h: grid.spacing(),
            half: grid.half_width(),
            max_freq: grid.max_freq(),
        };
        let dim = grid.dim();
        let mut out = Vec::with_capacity(self.count());
        for (fi, &(family, count)) in self.families.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(fi as u64 + 1);
            for index in 0..count {
                let field = match family {
                    ProbeFamily::Gaussian => {
                        let c = center(&mut rng, dim, shape.half);
                        let w = shape.width(&mut rng);
                        let kmax = shape.max_modulation(w);
                        let kappa: Vec<f64> = unit(&mut rng, dim)
                            .iter()
                            .map(|u| u * rng.gen_range(0.0..1.0) * kmax * 0.5)
                            .collect();
                        let coeffs: Vec<Complex64> = (0..components)
                            .map(|m| coeff(&mut rng) / (1.0 + m as f64))
                            .collect();
                        Field::from_fn(*grid, components, |x, o| {
                            let g = Complex64::from_polar(gauss(x, &c, w), dot(&kappa, x));
                            for (slot, a) in o.iter_mut().zip(&coeffs) {
                                *slot = a * g;
                            }
                        })?
                    }
                    ProbeFamily::DyadicBump => {
                        let kmax = (shape.max_freq / 3.0).log2().floor().max(0.0) as i32;
                        let k = rng.gen_range(0..=kmax);
                        let freq = 1.5 * 2f64.powi(k);
                        // Spectral width about a third of the band centre, narrower near the
                        // top of the band so nothing aliases.
                        let w = (3.0 / freq)
                            .max(20.0 / shape.max_freq)
                            .max(6.0 * shape.h)
                            .min(shape.half / 12.0);
                        let c = center(&mut rng, dim, shape.half);
                        let dir = unit(&mut rng, dim);
                        let coeffs: Vec<Complex64> = (0..components).map(|_| coeff(&mut rng)).collect();
                        Field::from_fn(*grid, components, |x, o| {
                            let env = gauss(x, &c, w);
                            let osc = Complex64::from_polar(env, freq * dot(&dir, x));
                            for (slot, a) in o.iter_mut().zip(&coeffs) {
                                *slot = a * osc;
                            }
                        })?
                    }
                    ProbeFamily::TrigPoly => {
                        let terms = rng.gen_range(2..=5);
                        let w = shape.half / 12.0;
                        let kmax = shape.max_modulation(w).min(shape.max_freq / 4.0);
                        let step = PI / shape.half;
                        let modes: Vec<(Vec<f64>, Vec<Complex64>)> = (0..terms)
                            .map(|_| {
                                let kv: Vec<f64> = (0..dim)
                                    .map(|_| {
                                        let j = (kmax / step).floor() as i64;
                                        rng.gen_range(-j..=j) as f64 * step
                                    })
                                    .collect();
                                let cs = (0..components).map(|_| coeff(&mut rng)).collect();
                                (kv, cs)
                            })
                            .collect();
                        let c = vec![0.0; dim];
                        Field::from_fn(*grid, components, |x, o| {
                            let env = gauss(x, &c, w);
                            for slot in o.iter_mut() {
                                *slot = Complex64::new(0.0, 0.0);
                            }
                            for (kv, cs) in &modes {
                                let e = Complex64::from_polar(env, dot(kv, x));
                                for (slot, a) in o.iter_mut().zip(cs) {
                                    *slot += a * e;
                                }
                            }
                        })?
                    }
                    ProbeFamily::ComponentMix => {
                        let parts: Vec<(Vec<f64>, f64, Complex64)> = (0..components)
                            .map(|_| {
                                let c = center(&mut rng, dim, shape.half);
                                let w = shape.width(&mut rng);
                                (c, w, coeff(&mut rng))
                            })
                            .collect();
                        Field::from_fn(*grid, components, |x, o| {
                            for (slot, (c, w, a)) in o.iter_mut().zip(&parts) {
                                *slot = a * gauss(x, c, *w);
                            }
                        })?
                    }
                };
                out.push(Probe {
                    family,
                    index,
                    field,
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_decaying() {
        let grid = Grid::new(1, 16.0, 512).unwrap();
        let e = ProbeEnsemble::corpus50(7);
        let a = e.generate(&grid, 3).unwrap();
        let b = e.generate(&grid, 3).unwrap();
        assert_eq!(a.len(), 50);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.field.values(), q.field.values());
            assert!(p.field.boundary_max() <= BOUNDARY_DECAY * p.field.max_abs());
            assert!(p.field.max_abs() > 0.0);
        }
        let c = ProbeEnsemble::corpus50(8).generate(&grid, 3).unwrap();
        assert_ne!(a[0].field.values(), c[0].field.values());
    }

    #[test]
    fn two_dimensional_probes_decay() {
        let grid = Grid::new(2, 16.0, 128).unwrap();
        for p in ProbeEnsemble::standard(1).generate(&grid, 2).unwrap() {
            assert!(p.field.boundary_max() <= BOUNDARY_DECAY * p.field.max_abs());
        }
    }
}
