//! Lookup-table SC/SCL decoding and the uniform-quantized baseline.
//!
//! All messages inside these decoders are unsigned level indices. Only the
//! leaves translate an index back into its stored reconstruction value, for
//! the hard decision and the path-metric update.

use super::{LlrDomain, ScDecoder, SclDecoder};
use crate::channel::{self, quantize_to_grid, UniformGrid};
use crate::code::CodeConfig;
use crate::decode::float::{f_fn, g_fn};
use crate::density::LutSet;
use crate::quantizer::{design_uniform_quantizer, Quantizer, UniformQuantizer};
use crate::{Error, Result};

/// Channel LLR level indices of one frame.
pub type QuantizedFrame = Vec<u16>;

impl LlrDomain for LutSet {
    type Msg = u16;

    #[inline]
    fn f_layer(&self, node: usize, a: &[u16], b: &[u16], out: &mut [u16]) {
        let k = self.recon[node].len();
        let table = &self.luts[node].f_table;
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = table[x as usize * k + y as usize];
        }
    }

    #[inline]
    fn g_layer(&self, node: usize, a: &[u16], b: &[u16], left_bits: &[u8], out: &mut [u16]) {
        let k = self.recon[node].len();
        let table = &self.luts[node].g_table;
        for (((o, &x), &y), &u) in out.iter_mut().zip(a).zip(b).zip(left_bits) {
            *o = table[2 * (x as usize * k + y as usize) + u as usize];
        }
    }

    #[inline]
    fn leaf_llr(&self, leaf: usize, msg: u16) -> f64 {
        self.recon[leaf][msg as usize]
    }
}

/// Maps channel LLRs through the uniform grid and the channel quantizer.
pub fn quantize_channel_llrs(llrs: &[f64], lutset: &LutSet) -> QuantizedFrame {
    llrs.iter().map(|&m| lutset.quantize_llr(m)).collect()
}

fn check_tables(config: &CodeConfig, lutset: &LutSet) -> Result<()> {
    if lutset.code_len() != config.code_len() {
        return Err(Error::param(format!(
            "tables built for N = {}, code has N = {}",
            lutset.code_len(),
            config.code_len()
        )));
    }
    Ok(())
}

pub fn qsc_decode(config: &CodeConfig, frame: &[u16], lutset: &LutSet) -> Result<Vec<u8>> {
    check_tables(config, lutset)?;
    ScDecoder::new(lutset, config).decode(frame)
}

pub fn qscl_decode(
    config: &CodeConfig,
    frame: &[u16],
    lutset: &LutSet,
    list_size: usize,
) -> Result<Vec<u8>> {
    check_tables(config, lutset)?;
    SclDecoder::new(lutset, config, list_size)?.decode(frame)
}

/// Uniform-quantized baseline: channel and internal LLRs all live on one
/// symmetric uniform quantizer. `f` and `g` are evaluated on reconstruction
/// values and re-quantized with saturation, which the same table at every
/// node implements.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformLut {
    grid: UniformGrid,
    uniform: UniformQuantizer,
    channel_quantizer: Quantizer,
    channel_map: Vec<u16>,
    f_table: Vec<u16>,
    g_table: Vec<u16>,
}

impl UniformLut {
    /// Baseline with `bits`-bit messages designed at `design_ebn0_db` for a
    /// code of rate `rate`.
    pub fn design(rate: f64, bits: u32, design_ebn0_db: f64) -> Result<Self> {
        if !(2..=8).contains(&bits) {
            return Err(Error::param(format!("baseline bits {bits} outside 2..=8")));
        }
        let sigma = channel::ebn0_to_sigma(design_ebn0_db, rate)?;
        let grid = channel::design_uniform_grid(sigma, channel::GRID_LEVELS)?;
        let dist = channel::grid_distribution(sigma, &grid)?;
        let design = design_uniform_quantizer(&dist, 1usize << bits)?;
        let uniform = design.uniform;
        let k = uniform.levels();
        let r = uniform.recon();
        let mut f_table = Vec::with_capacity(k * k);
        let mut g_table = Vec::with_capacity(2 * k * k);
        for &a in r {
            for &b in r {
                f_table.push(uniform.cell_of(f_fn(a, b)) as u16);
                g_table.push(uniform.cell_of(g_fn(a, b, 0)) as u16);
                g_table.push(uniform.cell_of(g_fn(a, b, 1)) as u16);
            }
        }
        let channel_map = (0..grid.levels)
            .map(|i| uniform.cell_of(grid.midpoint(i)) as u16)
            .collect();
        Ok(UniformLut {
            grid,
            uniform,
            channel_quantizer: design.quantizer,
            channel_map,
            f_table,
            g_table,
        })
    }

    pub fn uniform(&self) -> &UniformQuantizer {
        &self.uniform
    }

    /// The channel quantizer as a partition of the grid alphabet.
    pub fn channel_quantizer(&self) -> &Quantizer {
        &self.channel_quantizer
    }

    #[inline]
    pub fn quantize_llr(&self, llr: f64) -> u16 {
        self.channel_map[quantize_to_grid(llr, &self.grid)]
    }

    pub fn quantize_frame(&self, llrs: &[f64]) -> QuantizedFrame {
        llrs.iter().map(|&m| self.quantize_llr(m)).collect()
    }
}

impl LlrDomain for UniformLut {
    type Msg = u16;

    #[inline]
    fn f_layer(&self, _node: usize, a: &[u16], b: &[u16], out: &mut [u16]) {
        let k = self.uniform.levels();
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = self.f_table[x as usize * k + y as usize];
        }
    }

    #[inline]
    fn g_layer(&self, _node: usize, a: &[u16], b: &[u16], left_bits: &[u8], out: &mut [u16]) {
        let k = self.uniform.levels();
        for (((o, &x), &y), &u) in out.iter_mut().zip(a).zip(b).zip(left_bits) {
            *o = self.g_table[2 * (x as usize * k + y as usize) + u as usize];
        }
    }

    #[inline]
    fn leaf_llr(&self, _leaf: usize, msg: u16) -> f64 {
        self.uniform.recon()[msg as usize]
    }
}

/// Decodes with the uniform baseline: SC for `list_size == 1`, SCL otherwise.
pub fn uniform_baseline_decode_with(
    config: &CodeConfig,
    llrs: &[f64],
    baseline: &UniformLut,
    list_size: usize,
) -> Result<Vec<u8>> {
    let frame = baseline.quantize_frame(llrs);
    if list_size == 1 {
        ScDecoder::new(baseline, config).decode(&frame)
    } else {
        SclDecoder::new(baseline, config, list_size)?.decode(&frame)
    }
}

/// Uniform baseline designed at 0 dB for the code's own rate.
pub fn uniform_baseline_decode(
    config: &CodeConfig,
    llrs: &[f64],
    bits: u32,
    list_size: usize,
) -> Result<Vec<u8>> {
    let baseline = UniformLut::design(config.rate(), bits, 0.0)?;
    uniform_baseline_decode_with(config, llrs, &baseline, list_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{llr_convert, transmit};
    use crate::code::encode;
    use crate::decode::float::{sc_decode, scl_decode};
    use crate::density::DesignRule;
    use crate::quantizer::design_min_distortion_quantizer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn l1_matches_sc_for_lut_decoder() {
        let cfg = CodeConfig::new(64, 32).unwrap();
        let set = LutSet::design(64, 0.5, 5, 0.0, DesignRule::Symmetric).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigma = channel::ebn0_to_sigma(1.0, 0.5).unwrap();
        for _ in 0..500 {
            let u: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
            let x = encode(&cfg, &u).unwrap();
            let llr: Vec<f64> = transmit(&x, sigma, &mut rng).iter().map(|&y| llr_convert(y, sigma)).collect();
            let frame = quantize_channel_llrs(&llr, &set);
            assert_eq!(
                qsc_decode(&cfg, &frame, &set).unwrap(),
                qscl_decode(&cfg, &frame, &set, 1).unwrap()
            );
        }
    }

    #[test]
    fn noiseless_quantized_decoders() {
        let cfg = CodeConfig::new(128, 64).unwrap();
        let set = LutSet::design(128, 0.5, 4, 0.0, DesignRule::Symmetric).unwrap();
        let baseline = UniformLut::design(0.5, 4, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let u: Vec<u8> = (0..64).map(|_| rng.random_range(0..2)).collect();
            let x = encode(&cfg, &u).unwrap();
            let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
            let frame = quantize_channel_llrs(&llr, &set);
            assert_eq!(qsc_decode(&cfg, &frame, &set).unwrap(), u);
            assert_eq!(qscl_decode(&cfg, &frame, &set, 8).unwrap(), u);
            assert_eq!(uniform_baseline_decode_with(&cfg, &llr, &baseline, 1).unwrap(), u);
            assert_eq!(uniform_baseline_decode_with(&cfg, &llr, &baseline, 4).unwrap(), u);
        }
    }

    #[test]
    fn table_length_mismatch() {
        let cfg = CodeConfig::new(16, 8).unwrap();
        let set = LutSet::design(8, 0.5, 3, 0.0, DesignRule::Symmetric).unwrap();
        assert!(qsc_decode(&cfg, &[0; 16], &set).is_err());
        assert!(qscl_decode(&cfg, &[0; 16], &set, 2).is_err());
    }

    #[test]
    fn channel_quantization_examples() {
        let set = LutSet::design(16, 0.5, 5, 0.0, DesignRule::Symmetric).unwrap();
        let frame = quantize_channel_llrs(&[-1e9, 0.0, 1e9], &set);
        assert_eq!(frame[0], 0);
        assert_eq!(frame[2] as usize, set.channel_quantizer().levels() - 1);
    }

    #[test]
    fn uniform_baseline_saturates() {
        let b = UniformLut::design(0.5, 3, 0.0).unwrap();
        let k = b.uniform().levels();
        let top = (k - 1) as u16;
        let mut out = [0u16; 1];
        b.g_layer(1, &[top], &[top], &[0], &mut out);
        assert_eq!(out[0], top);
        b.g_layer(1, &[top], &[0], &[1], &mut out);
        assert_eq!(out[0], 0);
    }

    #[test]
    fn uniform_distortion_dominates() {
        let sigma = 1.0;
        let grid = channel::design_uniform_grid(sigma, 128).unwrap();
        let dist = channel::grid_distribution(sigma, &grid).unwrap();
        for bits in 2..=6u32 {
            let b = UniformLut::design(0.5, bits, 0.0).unwrap();
            let dp = design_min_distortion_quantizer(&dist, 1 << bits).unwrap();
            assert!(b.channel_quantizer().distortion() >= dp.distortion());
        }
    }

    #[test]
    fn eight_bit_baseline_tracks_float() {
        let cfg = CodeConfig::all_info(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sigma = channel::ebn0_to_sigma(3.0, 1.0).unwrap();
        let baseline = UniformLut::design(1.0, 8, 0.0).unwrap();
        let mut agree = 0;
        for _ in 0..1000 {
            let u: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
            let x = encode(&cfg, &u).unwrap();
            let llr: Vec<f64> = transmit(&x, sigma, &mut rng).iter().map(|&y| llr_convert(y, sigma)).collect();
            let a = uniform_baseline_decode_with(&cfg, &llr, &baseline, 1).unwrap();
            agree += usize::from(a == sc_decode(&cfg, &llr).unwrap());
            let _ = scl_decode(&cfg, &llr, 2).unwrap();
        }
        assert!(agree >= 990, "agreement {agree}/1000");
    }
}
