//! Successive-cancellation decoders.
//!
//! [`ScDecoder`] and [`SclDecoder`] are generic over an [`LlrDomain`], which
//! supplies the `f`/`g` node updates and the leaf LLR. The float-point
//! decoders use plain `f64` arithmetic; the quantized decoders carry small
//! unsigned indices and evaluate `f`/`g` by table lookup.

pub mod float;
pub mod quantized;

use crate::code::CodeConfig;
use crate::{Error, Result};

/// Message arithmetic at the nodes of the decoding tree.
///
/// `node` is the heap index of the node whose LLR vector is `a ++ b`
/// (root = 1); leaf `i` of a length-`N` code is node `N + i`.
pub trait LlrDomain {
    type Msg: Copy + Default;

    fn f_layer(&self, node: usize, a: &[Self::Msg], b: &[Self::Msg], out: &mut [Self::Msg]);

    fn g_layer(
        &self,
        node: usize,
        a: &[Self::Msg],
        b: &[Self::Msg],
        left_bits: &[u8],
        out: &mut [Self::Msg],
    );

    /// Real-valued LLR of the message arriving at a leaf.
    fn leaf_llr(&self, leaf: usize, msg: Self::Msg) -> f64;
}

/// Hard decision: frozen bits are 0, otherwise 0 iff `alpha >= 0`.
#[inline]
pub fn hard_decision(alpha: f64, is_frozen: bool) -> u8 {
    if is_frozen || alpha >= 0.0 {
        0
    } else {
        1
    }
}

/// Path metric after deciding `u_hat` on a leaf with LLR `alpha`: grows by
/// `|alpha|` when the decision disagrees with the LLR sign (sgn(0) = +1).
#[inline]
pub fn pm_update(pm: f64, alpha: f64, u_hat: u8) -> f64 {
    let preferred = if alpha >= 0.0 { 0 } else { 1 };
    if u_hat != preferred {
        pm + alpha.abs()
    } else {
        pm
    }
}

fn check_frame<T>(config: &CodeConfig, frame: &[T]) -> Result<()> {
    if frame.len() != config.code_len() {
        return Err(Error::param(format!(
            "frame length {} does not match code length {}",
            frame.len(),
            config.code_len()
        )));
    }
    Ok(())
}

/// Per-depth LLR and partial-sum buffers. Depth `d` holds `N >> d` entries.
#[derive(Clone)]
struct Workspace<M> {
    llr: Vec<Vec<M>>,
    bits: Vec<Vec<u8>>,
}

impl<M: Copy + Default> Workspace<M> {
    fn new(n_bits: u32) -> Self {
        let len = 1usize << n_bits;
        Workspace {
            llr: (0..=n_bits).map(|d| vec![M::default(); len >> d]).collect(),
            bits: (0..=n_bits).map(|d| vec![0u8; len >> d]).collect(),
        }
    }

    fn f_step<D: LlrDomain<Msg = M>>(&mut self, domain: &D, depth: usize, node: usize) {
        let (upper, lower) = self.llr.split_at_mut(depth + 1);
        let src = &upper[depth];
        let half = src.len() / 2;
        domain.f_layer(node, &src[..half], &src[half..], &mut lower[0][..half]);
    }

    /// Stores the left child's codeword and computes the right child's input.
    fn g_step<D: LlrDomain<Msg = M>>(&mut self, domain: &D, depth: usize, node: usize) {
        let half = self.bits[depth].len() / 2;
        let (bu, bl) = self.bits.split_at_mut(depth + 1);
        bu[depth][..half].copy_from_slice(&bl[0][..half]);
        let (upper, lower) = self.llr.split_at_mut(depth + 1);
        let src = &upper[depth];
        domain.g_layer(
            node,
            &src[..half],
            &src[half..],
            &bu[depth][..half],
            &mut lower[0][..half],
        );
    }

    fn combine(&mut self, depth: usize) {
        let half = self.bits[depth].len() / 2;
        let (bu, bl) = self.bits.split_at_mut(depth + 1);
        let (left, right) = bu[depth].split_at_mut(half);
        let child = &bl[0][..half];
        for (l, &c) in left.iter_mut().zip(child) {
            *l ^= c;
        }
        right.copy_from_slice(child);
    }

    /// Copies the state that later steps still read after leaf `leaf`: all
    /// partial sums, and the LLRs of every depth whose node still has its
    /// `g` child ahead.
    fn copy_live_from(&mut self, src: &Self, leaf: usize) {
        let n_bits = self.llr.len() - 1;
        for d in 0..n_bits {
            if (leaf >> (n_bits - 1 - d)) & 1 == 0 {
                self.llr[d].copy_from_slice(&src.llr[d]);
            }
        }
        for (dst, s) in self.bits.iter_mut().zip(&src.bits) {
            dst.copy_from_slice(s);
        }
    }
}

/// Reusable successive-cancellation decoder.
pub struct ScDecoder<'a, D: LlrDomain> {
    domain: &'a D,
    config: &'a CodeConfig,
    ws: Workspace<D::Msg>,
    u_hat: Vec<u8>,
}

impl<'a, D: LlrDomain> ScDecoder<'a, D> {
    pub fn new(domain: &'a D, config: &'a CodeConfig) -> Self {
        ScDecoder {
            domain,
            config,
            ws: Workspace::new(config.n_bits()),
            u_hat: vec![0; config.code_len()],
        }
    }

    /// Decodes one frame of channel messages and returns the information bits.
    pub fn decode(&mut self, channel: &[D::Msg]) -> Result<Vec<u8>> {
        check_frame(self.config, channel)?;
        self.ws.llr[0].copy_from_slice(channel);
        self.node(0, 1);
        Ok(self.config.gather(&self.u_hat))
    }

    /// Full decision vector of the last decode, frozen positions included.
    pub fn decisions(&self) -> &[u8] {
        &self.u_hat
    }

    fn node(&mut self, depth: usize, heap: usize) {
        let n = self.config.n_bits() as usize;
        if depth == n {
            let leaf = heap - self.config.code_len();
            let alpha = self.domain.leaf_llr(heap, self.ws.llr[n][0]);
            let u = hard_decision(alpha, self.config.is_frozen(leaf));
            self.u_hat[leaf] = u;
            self.ws.bits[n][0] = u;
            return;
        }
        self.ws.f_step(self.domain, depth, heap);
        self.node(depth + 1, 2 * heap);
        self.ws.g_step(self.domain, depth, heap);
        self.node(depth + 1, 2 * heap + 1);
        self.ws.combine(depth);
    }
}

struct Path<M> {
    ws: Workspace<M>,
    u_hat: Vec<u8>,
    pm: f64,
}

/// Reusable successive-cancellation list decoder with LLR-domain path
/// metrics. At information bits every path forks; when more than `L`
/// candidates exist the `L` smallest metrics survive, ties resolved by the
/// parent's list position and then in favor of the penalty-free fork.
pub struct SclDecoder<'a, D: LlrDomain> {
    domain: &'a D,
    config: &'a CodeConfig,
    list_size: usize,
    slots: Vec<Path<D::Msg>>,
    active: Vec<usize>,
    // Scratch for the fork step.
    candidates: Vec<(f64, usize, u8, u8)>,
}

impl<'a, D: LlrDomain> SclDecoder<'a, D> {
    pub fn new(domain: &'a D, config: &'a CodeConfig, list_size: usize) -> Result<Self> {
        if list_size == 0 {
            return Err(Error::param("list size must be at least 1"));
        }
        let slots = (0..list_size)
            .map(|_| Path {
                ws: Workspace::new(config.n_bits()),
                u_hat: vec![0; config.code_len()],
                pm: 0.0,
            })
            .collect();
        Ok(SclDecoder {
            domain,
            config,
            list_size,
            slots,
            active: Vec::with_capacity(list_size),
            candidates: Vec::with_capacity(2 * list_size),
        })
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Decodes one frame and returns the information bits of the surviving
    /// path with the smallest metric.
    pub fn decode(&mut self, channel: &[D::Msg]) -> Result<Vec<u8>> {
        let best = self.decode_list(channel)?;
        Ok(self.config.gather(&self.slots[best].u_hat))
    }

    /// Decodes and returns the slot of the best path; [`Self::paths`] exposes
    /// the whole final list.
    fn decode_list(&mut self, channel: &[D::Msg]) -> Result<usize> {
        check_frame(self.config, channel)?;
        self.active.clear();
        self.active.push(0);
        let root = &mut self.slots[0];
        root.ws.llr[0].copy_from_slice(channel);
        root.pm = 0.0;
        self.node(0, 1);
        let mut best = self.active[0];
        for &s in &self.active[1..] {
            if self.slots[s].pm < self.slots[best].pm {
                best = s;
            }
        }
        Ok(best)
    }

    /// Final list of the last decode as (path metric, full decision vector).
    pub fn paths(&self) -> impl Iterator<Item = (f64, &[u8])> {
        self.active
            .iter()
            .map(|&s| (self.slots[s].pm, self.slots[s].u_hat.as_slice()))
    }

    fn node(&mut self, depth: usize, heap: usize) {
        let n = self.config.n_bits() as usize;
        if depth == n {
            self.leaf(heap);
            return;
        }
        for &s in &self.active {
            self.slots[s].ws.f_step(self.domain, depth, heap);
        }
        self.node(depth + 1, 2 * heap);
        for &s in &self.active {
            self.slots[s].ws.g_step(self.domain, depth, heap);
        }
        self.node(depth + 1, 2 * heap + 1);
        for &s in &self.active {
            self.slots[s].ws.combine(depth);
        }
    }

    fn leaf(&mut self, heap: usize) {
        let n = self.config.n_bits() as usize;
        let leaf = heap - self.config.code_len();
        if self.config.is_frozen(leaf) {
            for &s in &self.active {
                let p = &mut self.slots[s];
                let alpha = self.domain.leaf_llr(heap, p.ws.llr[n][0]);
                p.pm = pm_update(p.pm, alpha, 0);
                p.u_hat[leaf] = 0;
                p.ws.bits[n][0] = 0;
            }
            return;
        }

        // (metric, list position, penalized, bit)
        self.candidates.clear();
        for (pos, &s) in self.active.iter().enumerate() {
            let p = &self.slots[s];
            let alpha = self.domain.leaf_llr(heap, p.ws.llr[n][0]);
            let preferred = hard_decision(alpha, false);
            self.candidates.push((p.pm, pos, 0, preferred));
            self.candidates
                .push((pm_update(p.pm, alpha, 1 - preferred), pos, 1, 1 - preferred));
        }
        if self.candidates.len() > self.list_size {
            self.candidates.sort_by(|x, y| {
                x.0.total_cmp(&y.0)
                    .then(x.1.cmp(&y.1))
                    .then(x.2.cmp(&y.2))
            });
            self.candidates.truncate(self.list_size);
        }

        let m = self.active.len();
        // keep[pos] = (keep bit 0 with metric, keep bit 1 with metric)
        let mut keep: Vec<[Option<f64>; 2]> = vec![[None, None]; m];
        for &(pm, pos, _, bit) in &self.candidates {
            keep[pos][bit as usize] = Some(pm);
        }
        let mut free: Vec<usize> = (0..self.list_size)
            .filter(|s| !self.active.contains(s))
            .collect();
        for (pos, k) in keep.iter().enumerate() {
            if k[0].is_none() && k[1].is_none() {
                free.push(self.active[pos]);
            }
        }

        let mut next = Vec::with_capacity(self.list_size);
        for (pos, k) in keep.iter().enumerate() {
            let s = self.active[pos];
            match (k[0], k[1]) {
                (None, None) => {}
                (Some(pm), None) | (None, Some(pm)) => {
                    let bit = if k[0].is_some() { 0 } else { 1 };
                    self.set_leaf(s, leaf, bit, pm);
                    next.push(s);
                }
                (Some(pm0), Some(pm1)) => {
                    let t = free.pop().expect("a free slot exists for every fork");
                    self.fork(s, t, leaf);
                    self.set_leaf(s, leaf, 0, pm0);
                    self.set_leaf(t, leaf, 1, pm1);
                    next.push(s);
                    next.push(t);
                }
            }
        }
        self.active = next;
    }

    fn set_leaf(&mut self, slot: usize, leaf: usize, bit: u8, pm: f64) {
        let n = self.config.n_bits() as usize;
        let p = &mut self.slots[slot];
        p.pm = pm;
        p.u_hat[leaf] = bit;
        p.ws.bits[n][0] = bit;
    }

    fn fork(&mut self, from: usize, to: usize, leaf: usize) {
        debug_assert_ne!(from, to);
        let (src, dst) = if from < to {
            let (a, b) = self.slots.split_at_mut(to);
            (&a[from], &mut b[0])
        } else {
            let (a, b) = self.slots.split_at_mut(from);
            (&b[0], &mut a[to])
        };
        dst.ws.copy_live_from(&src.ws, leaf);
        dst.u_hat[..=leaf].copy_from_slice(&src.u_hat[..=leaf]);
        dst.pm = src.pm;
    }
}
