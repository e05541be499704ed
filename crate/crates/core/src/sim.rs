//! Monte-Carlo BLER/BER simulation over BPSK-AWGN.
//!
//! Frame `i` at a given Eb/N0 is generated from its own ChaCha8 stream, so
//! results do not depend on how frames are scheduled across threads, and
//! different decoders see identical noise realizations for a given seed.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{self, llr_convert, transmit};
use crate::code::{encode, CodeConfig};
use crate::decode::float::FloatLlr;
use crate::decode::quantized::UniformLut;
use crate::decode::{LlrDomain, ScDecoder, SclDecoder};
use crate::density::{DesignRule, LutSet};
use crate::tables;
use crate::{Error, Result};

/// Frames decoded between two checks of the stopping rule.
pub const BATCH_FRAMES: u64 = 512;

pub const CSV_HEADER: &str = "ebn0_db,frames,block_errors,bit_errors,bler,ber";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    FloatSc,
    FloatScl,
    QSc,
    QScl,
    USc,
    UScl,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 6] = [
        DecoderKind::FloatSc,
        DecoderKind::FloatScl,
        DecoderKind::QSc,
        DecoderKind::QScl,
        DecoderKind::USc,
        DecoderKind::UScl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::FloatSc => "float-sc",
            DecoderKind::FloatScl => "float-scl",
            DecoderKind::QSc => "q-sc",
            DecoderKind::QScl => "q-scl",
            DecoderKind::USc => "u-sc",
            DecoderKind::UScl => "u-scl",
        }
    }

    /// Uses the density-evolution lookup tables.
    pub fn needs_tables(self) -> bool {
        matches!(self, DecoderKind::QSc | DecoderKind::QScl)
    }

    pub fn is_uniform(self) -> bool {
        matches!(self, DecoderKind::USc | DecoderKind::UScl)
    }

    pub fn is_list(self) -> bool {
        matches!(
            self,
            DecoderKind::FloatScl | DecoderKind::QScl | DecoderKind::UScl
        )
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown decoder {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code_len: usize,
    pub info_len: usize,
    pub list_size: usize,
    pub decoder: DecoderKind,
    pub quant_bits: u32,
    pub design_ebn0_db: f64,
    pub ebn0_start: f64,
    pub ebn0_stop: f64,
    pub ebn0_step: f64,
    pub max_frames: u64,
    pub target_block_errors: u64,
    pub seed: u64,
    /// Table cache: loaded when present, written after design otherwise.
    pub tables: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            code_len: 256,
            info_len: 128,
            list_size: 8,
            decoder: DecoderKind::FloatSc,
            quant_bits: 5,
            design_ebn0_db: 0.0,
            ebn0_start: 1.0,
            ebn0_stop: 3.0,
            ebn0_step: 0.25,
            max_frames: 100_000,
            target_block_errors: 100,
            seed: 1,
            tables: None,
            output: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(2..=7).contains(&self.quant_bits) {
            return bad(format!("quantization bits {} outside 2..=7", self.quant_bits));
        }
        if self.max_frames == 0 {
            return bad("max frames must be at least 1".into());
        }
        if self.list_size == 0 {
            return bad("list size must be at least 1".into());
        }
        if !self.ebn0_start.is_finite() || !self.ebn0_stop.is_finite() {
            return bad("Eb/N0 bounds must be finite".into());
        }
        if self.ebn0_stop < self.ebn0_start {
            return bad("Eb/N0 sweep is empty".into());
        }
        if self.ebn0_stop > self.ebn0_start && (self.ebn0_step.is_nan() || self.ebn0_step <= 0.0) {
            return bad("Eb/N0 step must be positive".into());
        }
        CodeConfig::new(self.code_len, self.info_len).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn ebn0_points(&self) -> Vec<f64> {
        if self.ebn0_stop <= self.ebn0_start {
            return vec![self.ebn0_start];
        }
        let count = ((self.ebn0_stop - self.ebn0_start) / self.ebn0_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.ebn0_start + i as f64 * self.ebn0_step)
            .collect()
    }

    pub fn levels(&self) -> usize {
        1 << self.quant_bits
    }

    /// List size actually used by the configured decoder.
    pub fn effective_list_size(&self) -> usize {
        if self.decoder.is_list() {
            self.list_size
        } else {
            1
        }
    }

    pub fn code(&self) -> Result<CodeConfig> {
        CodeConfig::new(self.code_len, self.info_len)
    }
}

/// Error statistics at one Eb/N0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub bler: f64,
    pub ber: f64,
    pub elapsed_secs: f64,
}

impl BlerPoint {
    fn new(ebn0_db: f64, frames: u64, block_errors: u64, bit_errors: u64, info_len: usize) -> Self {
        let f = frames.max(1) as f64;
        BlerPoint {
            ebn0_db,
            frames,
            block_errors,
            bit_errors,
            bler: block_errors as f64 / f,
            ber: bit_errors as f64 / (f * info_len as f64),
            elapsed_secs: 0.0,
        }
    }

    /// CSV row matching [`CSV_HEADER`]; timing is not part of the record.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.ebn0_db, self.frames, self.block_errors, self.bit_errors, self.bler, self.ber
        )
    }
}

pub fn write_csv<W: Write>(points: &[BlerPoint], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{}", p.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Random stream of frame `index` at `ebn0_db`.
pub fn frame_rng(seed: u64, ebn0_db: f64, index: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(ebn0_db.to_bits()));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Draws a message, encodes and transmits it; returns the message and the
/// channel LLRs.
pub fn simulate_frame<R: Rng>(config: &CodeConfig, sigma: f64, rng: &mut R) -> (Vec<u8>, Vec<f64>) {
    let msg: Vec<u8> = (0..config.info_len()).map(|_| rng.random_range(0..2u8)).collect();
    let x = encode(config, &msg).expect("message length matches the code");
    let llrs = transmit(&x, sigma, rng)
        .into_iter()
        .map(|y| llr_convert(y, sigma))
        .collect();
    (msg, llrs)
}

/// Decodes channel LLRs into information bits.
pub trait FrameDecoder {
    fn decode_llrs(&mut self, llrs: &[f64]) -> Result<Vec<u8>>;
}

enum Engine<'a, D: LlrDomain> {
    Sc(ScDecoder<'a, D>),
    Scl(SclDecoder<'a, D>),
}

impl<'a, D: LlrDomain> Engine<'a, D> {
    fn new(domain: &'a D, config: &'a CodeConfig, list_size: usize) -> Result<Self> {
        Ok(if list_size == 1 {
            Engine::Sc(ScDecoder::new(domain, config))
        } else {
            Engine::Scl(SclDecoder::new(domain, config, list_size)?)
        })
    }

    fn decode(&mut self, msgs: &[D::Msg]) -> Result<Vec<u8>> {
        match self {
            Engine::Sc(d) => d.decode(msgs),
            Engine::Scl(d) => d.decode(msgs),
        }
    }
}

static FLOAT: FloatLlr = FloatLlr;

struct FloatDecoder<'a>(Engine<'a, FloatLlr>);

impl FrameDecoder for FloatDecoder<'_> {
    fn decode_llrs(&mut self, llrs: &[f64]) -> Result<Vec<u8>> {
        self.0.decode(llrs)
    }
}

trait ChannelQuantize {
    fn quantize(&self, llr: f64) -> u16;
}

impl ChannelQuantize for LutSet {
    fn quantize(&self, llr: f64) -> u16 {
        self.quantize_llr(llr)
    }
}

impl ChannelQuantize for UniformLut {
    fn quantize(&self, llr: f64) -> u16 {
        self.quantize_llr(llr)
    }
}

struct IndexDecoder<'a, D: LlrDomain<Msg = u16>> {
    engine: Engine<'a, D>,
    domain: &'a D,
    frame: Vec<u16>,
}

impl<D: LlrDomain<Msg = u16> + ChannelQuantize> FrameDecoder for IndexDecoder<'_, D> {
    fn decode_llrs(&mut self, llrs: &[f64]) -> Result<Vec<u8>> {
        self.frame.clear();
        self.frame.extend(llrs.iter().map(|&m| self.domain.quantize(m)));
        self.engine.decode(&self.frame)
    }
}

/// One decoder configuration together with whatever tables it needs.
#[derive(Clone, Copy)]
pub struct DecoderSetup<'a> {
    pub kind: DecoderKind,
    pub list_size: usize,
    pub tables: Option<&'a LutSet>,
    pub uniform: Option<&'a UniformLut>,
}

impl<'a> DecoderSetup<'a> {
    pub fn float(list_size: usize) -> Self {
        DecoderSetup {
            kind: if list_size == 1 {
                DecoderKind::FloatSc
            } else {
                DecoderKind::FloatScl
            },
            list_size,
            tables: None,
            uniform: None,
        }
    }

    pub fn lut(tables: &'a LutSet, list_size: usize) -> Self {
        DecoderSetup {
            kind: if list_size == 1 {
                DecoderKind::QSc
            } else {
                DecoderKind::QScl
            },
            list_size,
            tables: Some(tables),
            uniform: None,
        }
    }

    pub fn uniform(baseline: &'a UniformLut, list_size: usize) -> Self {
        DecoderSetup {
            kind: if list_size == 1 {
                DecoderKind::USc
            } else {
                DecoderKind::UScl
            },
            list_size,
            tables: None,
            uniform: Some(baseline),
        }
    }

    pub fn build(&self, config: &'a CodeConfig) -> Result<Box<dyn FrameDecoder + 'a>> {
        let list = if self.kind.is_list() { self.list_size } else { 1 };
        if self.kind.needs_tables() {
            let t = self
                .tables
                .ok_or_else(|| Error::Config(format!("{} needs lookup tables", self.kind)))?;
            if t.code_len() != config.code_len() {
                return Err(Error::Config(format!(
                    "tables built for N = {}, code has N = {}",
                    t.code_len(),
                    config.code_len()
                )));
            }
            Ok(Box::new(IndexDecoder {
                engine: Engine::new(t, config, list)?,
                domain: t,
                frame: Vec::with_capacity(config.code_len()),
            }))
        } else if self.kind.is_uniform() {
            let u = self
                .uniform
                .ok_or_else(|| Error::Config(format!("{} needs a uniform baseline", self.kind)))?;
            Ok(Box::new(IndexDecoder {
                engine: Engine::new(u, config, list)?,
                domain: u,
                frame: Vec::with_capacity(config.code_len()),
            }))
        } else {
            if self.tables.is_some() {
                return Err(Error::Config(format!("{} takes no lookup tables", self.kind)));
            }
            Ok(Box::new(FloatDecoder(Engine::new(&FLOAT, config, list)?)))
        }
    }
}

/// Stopping rule and random seed of one simulation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub max_frames: u64,
    pub target_block_errors: u64,
}

/// Runs several decoders on the same frames at `ebn0_db`. Frames are
/// consumed in index order until every decoder has reached the target error
/// count or `max_frames` is exhausted; the stop test only looks at frames
/// already counted.
pub fn run_point_multi(
    config: &CodeConfig,
    setups: &[DecoderSetup<'_>],
    ebn0_db: f64,
    seed: u64,
    stop: StopRule,
) -> Result<Vec<BlerPoint>> {
    for s in setups {
        s.build(config)?;
    }
    let started = Instant::now();
    let sigma = channel::ebn0_to_sigma(ebn0_db, config.rate())?;
    let d = setups.len();
    let mut frames = 0u64;
    let mut block = vec![0u64; d];
    let mut bits = vec![0u64; d];
    let done = |block: &[u64]| block.iter().all(|&b| b >= stop.target_block_errors);

    'outer: while frames < stop.max_frames && !done(&block) {
        let batch = BATCH_FRAMES.min(stop.max_frames - frames);
        let outcomes: Vec<Vec<u32>> = (frames..frames + batch)
            .into_par_iter()
            .map_init(
                || {
                    setups
                        .iter()
                        .map(|s| s.build(config).expect("setup validated"))
                        .collect::<Vec<_>>()
                },
                |decoders, index| -> Result<Vec<u32>> {
                    let mut rng = frame_rng(seed, ebn0_db, index);
                    let (msg, llrs) = simulate_frame(config, sigma, &mut rng);
                    decoders
                        .iter_mut()
                        .map(|dec| {
                            let out = dec.decode_llrs(&llrs)?;
                            Ok(out.iter().zip(&msg).filter(|(a, b)| a != b).count() as u32)
                        })
                        .collect()
                },
            )
            .collect::<Result<_>>()?;
        for errs in outcomes {
            frames += 1;
            for (i, &e) in errs.iter().enumerate() {
                bits[i] += u64::from(e);
                block[i] += u64::from(e > 0);
            }
            if done(&block) {
                break 'outer;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    Ok((0..d)
        .map(|i| {
            let mut p = BlerPoint::new(ebn0_db, frames, block[i], bits[i], config.info_len());
            p.elapsed_secs = elapsed;
            p
        })
        .collect())
}

/// Baseline tables for the uniform decoders of `cfg`.
pub fn uniform_for(cfg: &SimConfig) -> Result<UniformLut> {
    UniformLut::design(
        cfg.info_len as f64 / cfg.code_len as f64,
        cfg.quant_bits,
        cfg.design_ebn0_db,
    )
}

/// Simulates one Eb/N0 point of `cfg`. `tables` must be given exactly when
/// the decoder is lookup-table based.
pub fn run_bler_point(cfg: &SimConfig, ebn0_db: f64, tables: Option<&LutSet>) -> Result<BlerPoint> {
    cfg.validate()?;
    if cfg.decoder.needs_tables() != tables.is_some() {
        return Err(Error::Config(if tables.is_some() {
            format!("{} takes no lookup tables", cfg.decoder)
        } else {
            format!("{} needs lookup tables", cfg.decoder)
        }));
    }
    let code = cfg.code()?;
    let uniform = if cfg.decoder.is_uniform() {
        Some(uniform_for(cfg)?)
    } else {
        None
    };
    let setup = DecoderSetup {
        kind: cfg.decoder,
        list_size: cfg.effective_list_size(),
        tables,
        uniform: uniform.as_ref(),
    };
    let stop = StopRule {
        max_frames: cfg.max_frames,
        target_block_errors: cfg.target_block_errors,
    };
    Ok(run_point_multi(&code, &[setup], ebn0_db, cfg.seed, stop)?[0])
}

/// Loads tables from the configured cache when they match the design, or
/// designs them (and writes the cache when a path is configured).
pub fn load_or_design_tables(cfg: &SimConfig) -> Result<LutSet> {
    let rate = cfg.info_len as f64 / cfg.code_len as f64;
    if let Some(path) = &cfg.tables {
        if path.exists() {
            let set = tables::import_tables(path)?;
            let sigma = channel::ebn0_to_sigma(cfg.design_ebn0_db, rate)?;
            let grid = channel::design_uniform_grid(sigma, channel::GRID_LEVELS)?;
            if set.code_len() != cfg.code_len
                || set.levels() != cfg.levels()
                || set.design_ebn0_db() != cfg.design_ebn0_db
                || *set.grid() != grid
            {
                return Err(Error::Config(format!(
                    "tables in {} were designed for different parameters",
                    path.display()
                )));
            }
            return Ok(set);
        }
    }
    let set = LutSet::design(
        cfg.code_len,
        rate,
        cfg.quant_bits,
        cfg.design_ebn0_db,
        DesignRule::default(),
    )?;
    if let Some(path) = &cfg.tables {
        tables::export_tables(&set, path)?;
    }
    Ok(set)
}

/// Runs every point of the sweep, designing or loading tables once, and
/// writes the CSV when an output path is configured.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BlerPoint>> {
    cfg.validate()?;
    let tables = if cfg.decoder.needs_tables() {
        Some(load_or_design_tables(cfg)?)
    } else {
        None
    };
    let points = cfg
        .ebn0_points()
        .into_iter()
        .map(|e| run_bler_point(cfg, e, tables.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &cfg.output {
        let file = std::fs::File::create(path)?;
        write_csv(&points, std::io::BufWriter::new(file))?;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            code_len: 64,
            info_len: 32,
            ebn0_start: 2.0,
            ebn0_stop: 2.0,
            max_frames: 2000,
            target_block_errors: 30,
            ..SimConfig::default()
        }
    }

    #[test]
    fn decoder_names_round_trip() {
        for k in DecoderKind::ALL {
            assert_eq!(k.as_str().parse::<DecoderKind>().unwrap(), k);
        }
        assert!("turbo".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn sweep_points() {
        let cfg = SimConfig {
            ebn0_start: 0.0,
            ebn0_stop: 1.0,
            ebn0_step: 0.25,
            ..SimConfig::default()
        };
        assert_eq!(cfg.ebn0_points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let bad = SimConfig {
            quant_bits: 8,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimConfig {
            max_frames: 0,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn high_snr_has_no_errors() {
        let cfg = SimConfig {
            ebn0_start: 12.0,
            ebn0_stop: 12.0,
            max_frames: 1000,
            ..small()
        };
        let p = run_bler_point(&cfg, 12.0, None).unwrap();
        assert_eq!(p.frames, 1000);
        assert_eq!(p.block_errors, 0);
        assert_eq!(p.bler, 0.0);
    }

    #[test]
    fn same_seed_same_record() {
        let cfg = small();
        let a = run_bler_point(&cfg, 2.0, None).unwrap();
        let b = run_bler_point(&cfg, 2.0, None).unwrap();
        assert_eq!(a.csv_row(), b.csv_row());
        assert!(a.block_errors >= 30 || a.frames == 2000);
        assert!((a.bler - a.block_errors as f64 / a.frames as f64).abs() < 1e-15);
    }

    #[test]
    fn stop_rule_is_exact() {
        let cfg = SimConfig {
            ebn0_start: 0.0,
            ebn0_stop: 0.0,
            target_block_errors: 7,
            ..small()
        };
        let p = run_bler_point(&cfg, 0.0, None).unwrap();
        assert_eq!(p.block_errors, 7);
        // The last counted frame is the one that reached the target.
        let shorter = StopRule {
            max_frames: p.frames - 1,
            target_block_errors: 7,
        };
        let code = cfg.code().unwrap();
        let q = run_point_multi(&code, &[DecoderSetup::float(1)], 0.0, cfg.seed, shorter).unwrap();
        assert_eq!(q[0].block_errors, 6);
    }

    #[test]
    fn table_presence_is_checked() {
        let cfg = SimConfig {
            decoder: DecoderKind::QSc,
            ..small()
        };
        assert!(matches!(run_bler_point(&cfg, 2.0, None), Err(Error::Config(_))));
        let set = load_or_design_tables(&cfg).unwrap();
        assert!(run_bler_point(&cfg, 2.0, Some(&set)).is_ok());
        let float = small();
        assert!(matches!(run_bler_point(&float, 2.0, Some(&set)), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_writes_csv_and_caches_tables() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimConfig {
            decoder: DecoderKind::QScl,
            list_size: 2,
            ebn0_start: 1.0,
            ebn0_stop: 2.0,
            ebn0_step: 0.5,
            max_frames: 300,
            tables: Some(dir.path().join("t.lut")),
            output: Some(dir.path().join("out.csv")),
            ..small()
        };
        let points = run_sweep(&cfg).unwrap();
        assert_eq!(points.len(), 3);
        let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(dir.path().join("t.lut").exists());
        // Second run loads the cache and reproduces every byte.
        let again = run_sweep(&cfg).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("out.csv")).unwrap(), csv);
        assert_eq!(again.len(), 3);

        let mismatched = SimConfig {
            quant_bits: 4,
            ..cfg.clone()
        };
        assert!(matches!(run_sweep(&mismatched), Err(Error::Config(_))));
    }

    #[test]
    fn single_point_sweep_matches_point() {
        let cfg = small();
        let sweep = run_sweep(&cfg).unwrap();
        let point = run_bler_point(&cfg, 2.0, None).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0].csv_row(), point.csv_row());
    }

    #[test]
    fn parallel_matches_serial() {
        let cfg = small();
        let code = cfg.code().unwrap();
        let stop = StopRule {
            max_frames: 1500,
            target_block_errors: 40,
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let par = pool
            .install(|| run_point_multi(&code, &[DecoderSetup::float(1)], 1.5, 9, stop))
            .unwrap();
        let serial_pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let ser = serial_pool
            .install(|| run_point_multi(&code, &[DecoderSetup::float(1)], 1.5, 9, stop))
            .unwrap();
        assert_eq!(par[0].csv_row(), ser[0].csv_row());
    }
}
