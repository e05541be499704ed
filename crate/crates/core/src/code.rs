//! Code construction and encoding.

use crate::{Error, Result};

/// Beta-expansion base, 2^(1/4).
pub const BETA: f64 = 1.189_207_115_002_721;

/// Reliability weight of bit channel `index`: the sum of `BETA^j` over the
/// set bits `j` of its binary expansion.
pub fn beta_weight(index: usize) -> f64 {
    let mut w = 0.0;
    let mut pow = 1.0;
    let mut i = index;
    while i != 0 {
        if i & 1 == 1 {
            w += pow;
        }
        pow *= BETA;
        i >>= 1;
    }
    w
}

fn check_length(code_len: usize) -> Result<u32> {
    if code_len < 2 || !code_len.is_power_of_two() {
        return Err(Error::param(format!(
            "code length {code_len} is not a power of two >= 2"
        )));
    }
    Ok(code_len.trailing_zeros())
}

/// The `info_len` most reliable indices of a length-`code_len` code, sorted
/// ascending. Equal weights rank the larger index as more reliable.
pub fn construct_info_set(code_len: usize, info_len: usize) -> Result<Vec<usize>> {
    check_length(code_len)?;
    if info_len == 0 || info_len > code_len {
        return Err(Error::param(format!(
            "info length {info_len} outside 1..={code_len}"
        )));
    }
    let mut order: Vec<usize> = (0..code_len).collect();
    order.sort_by(|&a, &b| {
        beta_weight(b)
            .total_cmp(&beta_weight(a))
            .then_with(|| b.cmp(&a))
    });
    let mut set = order[..info_len].to_vec();
    set.sort_unstable();
    Ok(set)
}

/// Parameters of a (N, K) polar code with frozen bits fixed to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeConfig {
    n_bits: u32,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
}

impl CodeConfig {
    /// Builds a code whose information set comes from beta-expansion.
    pub fn new(code_len: usize, info_len: usize) -> Result<Self> {
        let info_set = construct_info_set(code_len, info_len)?;
        Self::with_info_set(code_len, info_set)
    }

    /// Builds a code from an explicit information set.
    pub fn with_info_set(code_len: usize, mut info_set: Vec<usize>) -> Result<Self> {
        let n_bits = check_length(code_len)?;
        info_set.sort_unstable();
        info_set.dedup();
        if info_set.is_empty() || info_set.iter().any(|&i| i >= code_len) {
            return Err(Error::param("information set must be non-empty and in range"));
        }
        let mut frozen = vec![true; code_len];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(CodeConfig {
            n_bits,
            info_set,
            frozen,
        })
    }

    /// A code where every position carries information.
    pub fn all_info(code_len: usize) -> Result<Self> {
        Self::with_info_set(code_len, (0..code_len).collect())
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn code_len(&self) -> usize {
        self.frozen.len()
    }

    pub fn info_len(&self) -> usize {
        self.info_set.len()
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.frozen[index]
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.code_len() as f64
    }

    /// Places `info_bits` on the information set; frozen positions are zero.
    pub fn scatter(&self, info_bits: &[u8]) -> Result<Vec<u8>> {
        if info_bits.len() != self.info_len() {
            return Err(Error::param(format!(
                "expected {} information bits, got {}",
                self.info_len(),
                info_bits.len()
            )));
        }
        let mut u = vec![0u8; self.code_len()];
        for (&pos, &b) in self.info_set.iter().zip(info_bits) {
            u[pos] = b & 1;
        }
        Ok(u)
    }

    /// Reads the information positions out of a full-length bit vector.
    pub fn gather(&self, u: &[u8]) -> Vec<u8> {
        self.info_set.iter().map(|&i| u[i]).collect()
    }
}

/// In-place `x = u F^{⊗n}` over GF(2), without bit reversal.
pub fn polar_transform(bits: &mut [u8]) {
    let len = bits.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, &b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= b;
            }
        }
        half *= 2;
    }
}

/// Nonsystematic polar encoding of `info_bits` into a codeword of length N.
pub fn encode(config: &CodeConfig, info_bits: &[u8]) -> Result<Vec<u8>> {
    let mut x = config.scatter(info_bits)?;
    polar_transform(&mut x);
    Ok(x)
}
