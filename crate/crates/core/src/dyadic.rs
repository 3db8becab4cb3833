//! Littlewood–Paley partition of unity and dyadic frequency blocks.
//!
//! The bump `ψ` is the normalized exponential bump
//! `h(s) = exp(-1/((s - 1/2)(2 - s)))` on `(1/2, 2)`, divided by
//! `Σ_j h(2^{-j} s)`. Then `φ_k(t) = ψ(2^{-k}|t|)` for `k ≥ 1` and
//! `φ_0 = 1 - Σ_{k≥1} φ_k`, which equals `1 - ψ(|t|/2)` on `|t| < 2` and
//! vanishes elsewhere.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Domain, Field, Grid};

/// Unnormalized bump supported on `(1/2, 2)`.
pub fn bump(s: f64) -> f64 {
    if s <= 0.5 || s >= 2.0 {
        0.0
    } else {
        (-1.0 / ((s - 0.5) * (2.0 - s))).exp()
    }
}

/// The normalized bump `ψ` with `Σ_k ψ(2^{-k}s) = 1` for `s > 0`.
pub fn psi(s: f64) -> f64 {
    let num = bump(s);
    if num == 0.0 {
        return 0.0;
    }
    num / bump_dilation_sum(s)
}

/// `Σ_j h(2^{-j} s)`; only the dilates with `2^{-j}s ∈ (1/2, 2)` contribute.
fn bump_dilation_sum(s: f64) -> f64 {
    let j0 = s.log2().floor() as i32;
    (j0 - 2..=j0 + 2).map(|j| bump(s * 2f64.powi(-j))).sum()
}

/// `φ_k` as a function of `|t|`; zero for `k < 0`.
pub fn phi(k: i64, t_abs: f64) -> f64 {
    match k {
        k if k < 0 => 0.0,
        0 => {
            if t_abs < 2.0 {
                1.0 - psi(t_abs * 0.5)
            } else {
                0.0
            }
        }
        k => psi(t_abs * 2f64.powi(-(k as i32))),
    }
}

/// `φ_k(t)` for a point `t ∈ R^N`, using the Euclidean norm.
pub fn phi_k(t: &[f64], k: i64) -> f64 {
    phi(k, t.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `ψ_k = φ_{k-1} + φ_k + φ_{k+1}`, equal to 1 on `supp φ_k`.
pub fn phi_triple(k: i64, t_abs: f64) -> f64 {
    phi(k - 1, t_abs) + phi(k, t_abs) + phi(k + 1, t_abs)
}

/// Closed annulus `I_k`: `|t| ≤ 2` for `k = 0`, else `2^{k-1} ≤ |t| ≤ 2^{k+1}`.
pub fn in_i(k: i64, t_abs: f64) -> bool {
    if k == 0 {
        t_abs <= 2.0
    } else {
        let lo = 2f64.powi(k as i32 - 1);
        t_abs >= lo && t_abs <= 4.0 * lo
    }
}

/// Closed annulus `J_k`: `|t| ≤ 1` for `k = 0`, else `2^{k-1} ≤ |t| ≤ 2^k`.
pub fn in_j(k: i64, t_abs: f64) -> bool {
    if k == 0 {
        t_abs <= 1.0
    } else {
        let lo = 2f64.powi(k as i32 - 1);
        t_abs >= lo && t_abs <= 2.0 * lo
    }
}

/// Largest block index whose annulus is resolved by `grid`:
/// `floor(log2(pi / h)) - 1`.
pub fn k_max(grid: &Grid) -> i64 {
    (grid.max_freq().log2().floor() as i64 - 1).max(0)
}

/// Partition weights tabulated on the frequency nodes of a grid.
#[derive(Debug, Clone)]
pub struct DyadicSystem {
    grid: Grid,
    k_max: i64,
    abs_freq: Vec<f64>,
}

/// One dyadic block together with its resolution flag.
#[derive(Debug, Clone)]
pub struct DyadicBlock {
    pub k: i64,
    pub field: Field,
    pub resolved: bool,
}

impl DyadicSystem {
    pub fn new(grid: Grid) -> Self {
        let abs_freq = (0..grid.len()).map(|i| grid.freq_abs(i)).collect();
        Self {
            grid,
            k_max: k_max(&grid),
            abs_freq,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// `|ξ|` at every frequency node.
    pub fn abs_freq(&self) -> &[f64] {
        &self.abs_freq
    }

    pub fn is_resolved(&self, k: i64) -> bool {
        k <= self.k_max
    }

    /// `φ_k` at every frequency node.
    pub fn weights(&self, k: i64) -> Vec<f64> {
        self.abs_freq.iter().map(|&t| phi(k, t)).collect()
    }

    /// `Σ_{k > K_max} φ_k` at every frequency node.
    pub fn remainder_weights(&self) -> Vec<f64> {
        self.abs_freq
            .iter()
            .map(|&t| {
                let below: f64 = (0..=self.k_max).map(|k| phi(k, t)).sum();
                1.0 - below
            })
            .collect()
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::Usage("field grid differs from the dyadic system grid".into()));
        }
        Ok(())
    }

    /// `F^{-1}[φ_k F f]` in the physical domain.
    pub fn dyadic_block(&self, f: &Field, k: i64) -> Result<DyadicBlock> {
        self.check(f)?;
        let fhat = f.to_frequency()?;
        let field = weighted(&fhat, &self.weights(k)).inverse_ft()?;
        Ok(DyadicBlock {
            k,
            field,
            resolved: self.is_resolved(k),
        })
    }

    /// Blocks `k = 0..=K_max` as frequency-domain fields, plus the
    /// high-frequency remainder. The transform is taken once.
    pub fn frequency_blocks(&self, f: &Field) -> Result<(Vec<Field>, Field)> {
        self.check(f)?;
        let fhat = f.to_frequency()?;
        let blocks = (0..=self.k_max)
            .map(|k| weighted(&fhat, &self.weights(k)))
            .collect();
        let rem = weighted(&fhat, &self.remainder_weights());
        Ok((blocks, rem))
    }

    /// Blocks `k = 0..=K_max` and the remainder in the physical domain.
    pub fn blocks(&self, f: &Field) -> Result<(Vec<Field>, Field)> {
        let (b, r) = self.frequency_blocks(f)?;
        let b = b.iter().map(|x| x.inverse_ft()).collect::<Result<Vec<_>>>()?;
        Ok((b, r.inverse_ft()?))
    }
}

/// Multiplies every component at node `i` by `w[i]`.
pub(crate) fn weighted(fhat: &Field, w: &[f64]) -> Field {
    let m = fhat.components();
    let values: Vec<Complex64> = fhat
        .values()
        .chunks(m)
        .zip(w)
        .flat_map(|(chunk, &wi)| chunk.iter().map(move |v| v * wi))
        .collect();
    Field::new(*fhat.grid(), m, Domain::Frequency, values).expect("shape preserved")
}

/// Diagnostic summary of a partition on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub k_max: i64,
    pub max_partition_error: f64,
    pub max_triple_error: f64,
    pub max_overlap: usize,
}

impl DyadicSystem {
    /// Checks the partition, three-term and overlap properties on all
    /// resolvable frequency nodes.
    pub fn partition_report(&self) -> PartitionReport {
        let limit = 2f64.powi(self.k_max as i32);
        let mut max_partition_error = 0.0f64;
        let mut max_triple_error = 0.0f64;
        let mut max_overlap = 0;
        for &t in &self.abs_freq {
            if t > limit {
                continue;
            }
            let vals: Vec<f64> = (0..=self.k_max).map(|k| phi(k, t)).collect();
            let sum: f64 = vals.iter().sum();
            max_partition_error = max_partition_error.max((sum - 1.0).abs());
            if t > 0.0 {
                max_overlap = max_overlap.max(vals.iter().filter(|v| **v > 0.0).count());
            }
            for (k, v) in vals.iter().enumerate() {
                if *v > 0.0 {
                    let e = (phi_triple(k as i64, t) - 1.0).abs();
                    max_triple_error = max_triple_error.max(e);
                }
            }
        }
        PartitionReport {
            k_max: self.k_max,
            max_partition_error,
            max_triple_error,
            max_overlap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::LqNorm;
    use rand::{Rng, SeedableRng};

    #[test]
    fn psi_vanishes_outside_support() {
        assert_eq!(psi(0.4), 0.0);
        assert_eq!(psi(2.1), 0.0);
        assert_eq!(psi(0.5), 0.0);
        assert_eq!(psi(2.0), 0.0);
    }

    #[test]
    fn psi_dilates_sum_to_one() {
        for i in 0..200 {
            let s = 10f64.powf(-6.0 + 12.0 * i as f64 / 199.0);
            let total: f64 = (-30..=30).map(|k| psi(s * 2f64.powi(-k))).sum();
            assert!((total - 1.0).abs() < 1e-12, "s = {s}: {total}");
        }
    }

    #[test]
    fn psi_is_nonnegative_and_bounded() {
        for i in 0..10_000 {
            let s = i as f64 * 3e-4;
            let v = psi(s);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_k(&[3.0], 3), 0.0);
        assert_eq!(phi_k(&[0.0, 0.0], 0), 1.0);
        assert_eq!(phi(-1, 1.0), 0.0);
    }

    #[test]
    fn three_term_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut hits = 0;
        while hits < 100 {
            let t = 10f64.powf(rng.gen_range(-1.0..4.0));
            let k = rng.gen_range(0..14);
            if phi(k, t) > 0.0 {
                assert!((phi_triple(k, t) - 1.0).abs() < 1e-12);
                hits += 1;
            }
        }
    }

    #[test]
    fn support_within_annulus() {
        for i in 0..5000 {
            let t = i as f64 * 0.01;
            for k in 0..6 {
                if !in_i(k, t) {
                    assert_eq!(phi(k, t), 0.0);
                }
            }
        }
    }

    #[test]
    fn partition_on_grid() {
        let g = Grid::new(2, 8.0, 64).unwrap();
        let sys = DyadicSystem::new(g);
        let r = sys.partition_report();
        assert!(r.max_partition_error < 1e-12);
        assert!(r.max_triple_error < 1e-12);
        assert!(r.max_overlap <= 2);
    }

    #[test]
    fn k_max_matches_rule() {
        let g = Grid::new(1, 16.0, 512).unwrap();
        // pi / h = 16 pi ≈ 50.3, log2 = 5.65
        assert_eq!(k_max(&g), 4);
    }

    #[test]
    fn blocks_of_band_limited_field() {
        let g = Grid::new(1, 16.0, 512).unwrap();
        let sys = DyadicSystem::new(g);
        // spectrum supported strictly inside J_3 = [4, 8]
        let fhat = Field::from_freq_fn(g, 1, |xi, o| {
            let t = xi[0].abs();
            o[0] = Complex64::new(if t > 4.6 && t < 7.4 { (t - 6.0).cos() } else { 0.0 }, 0.0);
        })
        .unwrap();
        let f = fhat.inverse_ft().unwrap();
        let e = LqNorm::new(2.0).unwrap();
        for k in 0..=sys.k_max() {
            let b = sys.dyadic_block(&f, k).unwrap();
            if (k - 3).abs() > 1 {
                assert!(b.field.lq_norm(2.0, &e) < 1e-14);
            }
        }
        let (blocks, rem) = sys.blocks(&f).unwrap();
        let mut sum = rem;
        for b in &blocks {
            sum = sum.add(b).unwrap();
        }
        assert!(sum.sub(&f).unwrap().max_abs() < 1e-10 * f.max_abs());
        let zero = Field::zeros(g, 1, Domain::Physical);
        assert!(sys.dyadic_block(&zero, 2).unwrap().field.is_zero());
    }
}
