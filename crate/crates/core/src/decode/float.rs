//! Float-point SC and SCL decoding with min-sum `f`.

use super::{LlrDomain, ScDecoder, SclDecoder};
use crate::code::CodeConfig;
use crate::Result;

pub use super::{hard_decision, pm_update};

/// `sign(a) sign(b) min(|a|, |b|)` with sign(0) = +1.
#[inline]
pub fn f_fn(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// `(-1)^u a + b`.
#[inline]
pub fn g_fn(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

/// Real-valued LLR messages.
#[derive(Debug, Clone, Copy, Default)]
pub struct FloatLlr;

impl LlrDomain for FloatLlr {
    type Msg = f64;

    #[inline]
    fn f_layer(&self, _node: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = f_fn(x, y);
        }
    }

    #[inline]
    fn g_layer(&self, _node: usize, a: &[f64], b: &[f64], left_bits: &[u8], out: &mut [f64]) {
        for (((o, &x), &y), &u) in out.iter_mut().zip(a).zip(b).zip(left_bits) {
            *o = g_fn(x, y, u);
        }
    }

    #[inline]
    fn leaf_llr(&self, _leaf: usize, msg: f64) -> f64 {
        msg
    }
}

pub fn sc_decode(config: &CodeConfig, llrs: &[f64]) -> Result<Vec<u8>> {
    ScDecoder::new(&FloatLlr, config).decode(llrs)
}

pub fn scl_decode(config: &CodeConfig, llrs: &[f64], list_size: usize) -> Result<Vec<u8>> {
    SclDecoder::new(&FloatLlr, config, list_size)?.decode(llrs)
}
