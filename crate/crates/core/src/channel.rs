//! BPSK over AWGN, LLR conversion and the uniform LLR pre-quantizer.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::quantizer::DiscreteDistribution;
use crate::{Error, Result};

/// Default number of levels of the uniform pre-quantization grid.
pub const GRID_LEVELS: usize = 128;

/// Noise standard deviation for BPSK at `ebn0_db` with code rate `rate`.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param(format!("rate {rate} outside (0, 1]")));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub sigma: f64,
    pub ebn0_db: f64,
    pub rate: f64,
}

impl ChannelParams {
    pub fn from_ebn0(ebn0_db: f64, rate: f64) -> Result<Self> {
        Ok(ChannelParams {
            sigma: ebn0_to_sigma(ebn0_db, rate)?,
            ebn0_db,
            rate,
        })
    }
}

/// BPSK-modulates `codeword` (0 -> +1, 1 -> -1) and adds N(0, sigma^2) noise.
pub fn transmit<R: Rng + ?Sized>(codeword: &[u8], sigma: f64, rng: &mut R) -> Vec<f64> {
    codeword
        .iter()
        .map(|&b| {
            let s = if b == 0 { 1.0 } else { -1.0 };
            let n: f64 = rng.sample(StandardNormal);
            s + sigma * n
        })
        .collect()
}

/// Channel LLR `2y / sigma^2`; positive values favor bit 0.
#[inline]
pub fn llr_convert(y: f64, sigma: f64) -> f64 {
    2.0 * y / (sigma * sigma)
}

/// A symmetric uniform grid of `levels` cells of width `step` starting at `lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub levels: usize,
    pub lo: f64,
    pub step: f64,
}

impl UniformGrid {
    pub fn new(levels: usize, lo: f64, step: f64) -> Result<Self> {
        if levels < 2 || step.is_nan() || step <= 0.0 || !lo.is_finite() {
            return Err(Error::param("grid needs >= 2 levels and a positive step"));
        }
        Ok(UniformGrid { levels, lo, step })
    }

    /// Largest representable magnitude, `levels * step / 2`.
    pub fn range(&self) -> f64 {
        -self.lo
    }

    /// Midpoint of cell `index`. Computed as an offset from the grid center
    /// so that mirrored cells have exactly negated midpoints.
    pub fn midpoint(&self, index: usize) -> f64 {
        (index as f64 - (self.levels - 1) as f64 / 2.0) * self.step
    }

    /// Lower edge of cell `index`.
    pub fn edge(&self, index: usize) -> f64 {
        (index as f64 - self.levels as f64 / 2.0) * self.step
    }
}

/// Grid covering the LLR mode mean `2/sigma^2` plus four mode standard
/// deviations `2/sigma` on either side of zero.
pub fn design_uniform_grid(sigma: f64, levels: usize) -> Result<UniformGrid> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::param("sigma must be positive"));
    }
    let rmax = 2.0 / (sigma * sigma) + 4.0 * (2.0 / sigma);
    UniformGrid::new(levels, -rmax, 2.0 * rmax / levels as f64)
}

/// Saturating cell index of `m` on `grid`.
#[inline]
pub fn quantize_to_grid(m: f64, grid: &UniformGrid) -> usize {
    let pos = ((m - grid.lo) / grid.step).floor();
    if pos <= 0.0 || pos.is_nan() {
        0
    } else {
        (pos as usize).min(grid.levels - 1)
    }
}

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Mass of N(0,1) on [a, b), evaluated on whichever tail keeps precision.
fn std_normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        phi(-a) - phi(-b)
    } else {
        phi(b) - phi(a)
    }
}

/// Exact distribution of the grid index under the bimodal LLR law
/// `½ N(2/sigma^2, 4/sigma^2) + ½ N(-2/sigma^2, 4/sigma^2)`. Representative
/// values are cell midpoints and tail mass is folded into the edge cells.
pub fn grid_distribution(sigma: f64, grid: &UniformGrid) -> Result<DiscreteDistribution> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::param("sigma must be positive"));
    }
    let mean = 2.0 / (sigma * sigma);
    let sd = 2.0 / sigma;
    let levels = grid.levels;
    let mut probs: Vec<f64> = (0..levels)
        .map(|i| {
            let a = if i == 0 { f64::NEG_INFINITY } else { grid.edge(i) };
            let b = if i + 1 == levels {
                f64::INFINITY
            } else {
                grid.edge(i + 1)
            };
            [mean, -mean]
                .iter()
                .map(|mu| 0.5 * std_normal_mass((a - mu) / sd, (b - mu) / sd))
                .sum()
        })
        .collect();
    for i in 0..levels / 2 {
        let avg = 0.5 * (probs[i] + probs[levels - 1 - i]);
        probs[i] = avg;
        probs[levels - 1 - i] = avg;
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let values = (0..levels).map(|i| grid.midpoint(i)).collect();
    DiscreteDistribution::from_sorted(values, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_mapping() {
        assert!((ebn0_to_sigma(0.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((ebn0_to_sigma(0.0, 1.0).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        let db = 10.0 * 2f64.log10();
        assert!((ebn0_to_sigma(db, 0.5).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert!(ebn0_to_sigma(0.0, 0.0).is_err());
        assert!(ebn0_to_sigma(0.0, 1.5).is_err());
    }

    #[test]
    fn transmit_noiseless_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = transmit(&[0, 1], 1e-12, &mut rng);
        assert!((y[0] - 1.0).abs() < 1e-9 && (y[1] + 1.0).abs() < 1e-9);

        let a = transmit(&[0; 16], 1.0, &mut ChaCha8Rng::seed_from_u64(7));
        let b = transmit(&[0; 16], 1.0, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn transmit_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let y = transmit(&vec![0u8; 1_000_000], 1.0, &mut rng);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn llr_examples() {
        assert_eq!(llr_convert(0.0, 1.0), 0.0);
        assert!((llr_convert(0.7, 1.0) - 1.4).abs() < 1e-15);
        assert!((llr_convert(-1.0, 2f64.sqrt()) + 1.0).abs() < 1e-12);
        for y in [0.1, 1.7, -3.3] {
            assert_eq!(llr_convert(-y, 0.8), -llr_convert(y, 0.8));
        }
    }

    #[test]
    fn grid_design_examples() {
        let g = design_uniform_grid(1.0, 128).unwrap();
        assert_eq!(g.range(), 10.0);
        assert_eq!(g.step, 0.15625);
        assert_eq!(g.lo, -10.0);
        let g2 = design_uniform_grid(2.0, 128).unwrap();
        assert!((g2.range() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn grid_quantization() {
        let g = design_uniform_grid(1.0, 128).unwrap();
        assert_eq!(quantize_to_grid(g.lo - 5.0, &g), 0);
        assert_eq!(quantize_to_grid(1e300, &g), 127);
        assert_eq!(quantize_to_grid(f64::INFINITY, &g), 127);
        assert_eq!(quantize_to_grid(0.3, &g), 65);
        for i in 0..g.levels {
            assert_eq!(quantize_to_grid(g.midpoint(i), &g), i);
            assert_eq!(g.midpoint(i), -g.midpoint(g.levels - 1 - i));
        }
    }

    #[test]
    fn grid_distribution_properties() {
        for sigma in [0.5, 1.0, 1.414, 2.0] {
            let g = design_uniform_grid(sigma, 128).unwrap();
            let d = grid_distribution(sigma, &g).unwrap();
            assert_eq!(d.len(), 128);
            let total: f64 = d.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for i in 0..128 {
                assert_eq!(d.probs()[i], d.probs()[127 - i]);
            }
            for k in [1, 3, 5] {
                let m: f64 = d
                    .values()
                    .iter()
                    .zip(d.probs())
                    .map(|(v, p)| v.powi(k) * p)
                    .sum();
                let scale = g.range().powi(k);
                assert!(m.abs() / scale < 1e-12, "odd moment {k}: {m}");
            }
        }
    }

    #[test]
    fn grid_distribution_peak() {
        // Mode separation 4/sigma^2 equals two mode deviations at sigma = 1,
        // so the mixture is flat-topped there and peaks at the center cells.
        let g = design_uniform_grid(1.0, 128).unwrap();
        let d = grid_distribution(1.0, &g).unwrap();
        let argmax = (0..128).max_by(|&a, &b| d.probs()[a].total_cmp(&d.probs()[b])).unwrap();
        assert!(argmax == 63 || argmax == 64, "argmax {argmax}");

        // Bimodal for sigma < 1: the peak sits at the mode mean 2/sigma^2.
        let sigma = 0.5;
        let g = design_uniform_grid(sigma, 128).unwrap();
        let d = grid_distribution(sigma, &g).unwrap();
        let argmax = (64..128).max_by(|&a, &b| d.probs()[a].total_cmp(&d.probs()[b])).unwrap();
        let mode_cell = quantize_to_grid(2.0 / (sigma * sigma), &g);
        assert!(argmax.abs_diff(mode_cell) <= 1, "argmax {argmax} vs {mode_cell}");
        assert!(d.probs()[argmax] > d.probs()[64]);
    }
}
