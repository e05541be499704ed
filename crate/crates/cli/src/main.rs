//! `polarq`: BLER/BER sweeps of float, lookup-table and uniform polar decoders.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use polarq_core::sim::{self, DecoderKind, SimConfig};
use polarq_core::Error;

#[derive(Debug, Parser)]
#[command(name = "polarq", version, about = "Polar code BLER/BER simulation over BPSK-AWGN")]
struct Args {
    /// Code length (power of two).
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Number of information bits.
    #[arg(long, default_value_t = 128)]
    k: usize,
    /// float-sc, float-scl, q-sc, q-scl, u-sc or u-scl.
    #[arg(long, default_value = "float-sc")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 8)]
    list_size: usize,
    /// Message bits of the quantized decoders (2..=7).
    #[arg(long, default_value_t = 5)]
    bits: u32,
    /// Eb/N0 the quantizers are designed at, in dB.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    design_ebn0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    ebn0_start: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    ebn0_stop: f64,
    #[arg(long, default_value_t = 0.25)]
    ebn0_step: f64,
    #[arg(long, default_value_t = 100_000)]
    max_frames: u64,
    /// Block errors after which a point stops.
    #[arg(long, default_value_t = 100)]
    target_errors: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Lookup-table cache; read if present, written after design otherwise.
    #[arg(long)]
    tables: Option<PathBuf>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl From<Args> for SimConfig {
    fn from(a: Args) -> Self {
        SimConfig {
            code_len: a.n,
            info_len: a.k,
            list_size: a.list_size,
            decoder: a.decoder,
            quant_bits: a.bits,
            design_ebn0_db: a.design_ebn0,
            ebn0_start: a.ebn0_start,
            ebn0_stop: a.ebn0_stop,
            ebn0_step: a.ebn0_step,
            max_frames: a.max_frames,
            target_block_errors: a.target_errors,
            seed: a.seed,
            tables: a.tables,
            output: a.out,
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Param(_) | Error::Config(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Load { .. } => EXIT_IO,
        Error::Internal(_) => EXIT_INTERNAL,
    }
}

fn run(cfg: &SimConfig) -> Result<(), Error> {
    let points = sim::run_sweep(cfg)?;
    for p in &points {
        eprintln!(
            "{:>6.2} dB  frames {:>8}  bler {:.3e}  ber {:.3e}  {:.1}s",
            p.ebn0_db, p.frames, p.bler, p.ber, p.elapsed_secs
        );
    }
    if cfg.output.is_none() {
        sim::write_csv(&points, std::io::stdout().lock())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = SimConfig::from(args);
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polarq: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
