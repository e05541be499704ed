//! Quantized density evolution over the SC decoding tree.
//!
//! Every node of the decoding tree holds a vector of LLRs that share one
//! distribution. A node's `f` and `g` outputs are computed by exact
//! enumeration over pairs of its own symbols, compressed back to at most
//! `levels` symbols by a minimum-distortion quantizer, and the resulting
//! symbol maps are stored as lookup tables. Decoding then needs nothing but
//! table lookups on small unsigned indices.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{self, UniformGrid};
use crate::decode::float::{f_fn, g_fn};
use crate::quantizer::{
    apply_quantizer, design_min_distortion_quantizer, design_symmetric_quantizer,
    merge_duplicates, DiscreteDistribution, Quantizer, MASS_TOLERANCE,
};
use crate::{Error, Result};

/// Position of a node in the decoding tree, stored as its heap index: the
/// root is 1 and the `f` and `g` children of `h` are `2h` and `2h + 1`.
/// Leaf `i` of a depth-`n` tree is `2^n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(usize);

impl NodePath {
    pub const ROOT: NodePath = NodePath(1);

    pub fn from_heap(index: usize) -> Self {
        assert!(index >= 1, "heap indices start at 1");
        NodePath(index)
    }

    pub fn heap_index(self) -> usize {
        self.0
    }

    pub fn depth(self) -> u32 {
        usize::BITS - 1 - self.0.leading_zeros()
    }

    pub fn f_child(self) -> Self {
        NodePath(2 * self.0)
    }

    pub fn g_child(self) -> Self {
        NodePath(2 * self.0 + 1)
    }
}

impl fmt::Display for NodePath {
    /// `-` for the root, otherwise the branch sequence over `{f, g}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let depth = self.depth();
        if depth == 0 {
            return f.write_str("-");
        }
        for level in (0..depth).rev() {
            let c = if (self.0 >> level) & 1 == 0 { 'f' } else { 'g' };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(NodePath::ROOT);
        }
        if s.is_empty() || s.len() >= usize::BITS as usize - 1 {
            return Err(Error::param(format!("bad node path {s:?}")));
        }
        let mut h = 1usize;
        for c in s.chars() {
            h = match c {
                'f' => 2 * h,
                'g' => 2 * h + 1,
                _ => return Err(Error::param(format!("bad node path {s:?}"))),
            };
        }
        Ok(NodePath(h))
    }
}

/// How each compression quantizer is designed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DesignRule {
    /// The unconstrained minimum-distortion quantizer.
    MinDistortion,
    /// The minimum-distortion quantizer among mirror-symmetric ones, used
    /// whenever the distribution is symmetric. Keeps every node
    /// distribution symmetric about zero.
    #[default]
    Symmetric,
}

impl DesignRule {
    fn design(self, dist: &DiscreteDistribution, levels: usize) -> Result<Quantizer> {
        let levels = levels.min(dist.len());
        match self {
            DesignRule::Symmetric if dist.is_symmetric(MASS_TOLERANCE) => {
                design_symmetric_quantizer(dist, levels)
            }
            _ => design_min_distortion_quantizer(dist, levels),
        }
    }
}

/// Exact distribution of `f(a, b)` for independent `a ~ da`, `b ~ db`.
pub fn f_output_distribution(
    da: &DiscreteDistribution,
    db: &DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    let mut values = Vec::with_capacity(da.len() * db.len());
    let mut probs = Vec::with_capacity(da.len() * db.len());
    for (&a, &pa) in da.values().iter().zip(da.probs()) {
        for (&b, &pb) in db.values().iter().zip(db.probs()) {
            values.push(f_fn(a, b));
            probs.push(pa * pb);
        }
    }
    merge_duplicates(&values, &probs)
}

/// Exact distribution of `g(a, b, u)` for independent `a ~ da`, `b ~ db`
/// and an equiprobable partial-sum bit `u`.
pub fn g_output_distribution(
    da: &DiscreteDistribution,
    db: &DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    let mut values = Vec::with_capacity(2 * da.len() * db.len());
    let mut probs = Vec::with_capacity(2 * da.len() * db.len());
    for (&a, &pa) in da.values().iter().zip(da.probs()) {
        for (&b, &pb) in db.values().iter().zip(db.probs()) {
            let w = 0.5 * pa * pb;
            values.push(g_fn(a, b, 0));
            probs.push(w);
            values.push(g_fn(a, b, 1));
            probs.push(w);
        }
    }
    merge_duplicates(&values, &probs)
}

/// Lookup tables of one node, row-major over its input symbols: `f_table`
/// is indexed `[i][j]` and `g_table` `[i][j][u]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeLuts {
    pub f_table: Vec<u16>,
    pub g_table: Vec<u16>,
}

/// Tables mapping each input pair to the output cell of `qf` (designed on
/// `f_dist`) and `qg` (designed on `g_dist`).
///
/// Output values are located by their cell's value range, which agrees with
/// the symbol partition for every value in the merged alphabet.
pub fn build_node_luts(
    da: &DiscreteDistribution,
    db: &DiscreteDistribution,
    f_dist: &DiscreteDistribution,
    qf: &Quantizer,
    g_dist: &DiscreteDistribution,
    qg: &Quantizer,
) -> Result<NodeLuts> {
    if qf.source_len() != f_dist.len() || qg.source_len() != g_dist.len() {
        return Err(Error::Internal("quantizer does not match its distribution".into()));
    }
    if qf.levels() > u16::MAX as usize || qg.levels() > u16::MAX as usize {
        return Err(Error::param("too many quantizer levels for 16-bit tables"));
    }
    let (ka, kb) = (da.len(), db.len());
    let mut f_table = Vec::with_capacity(ka * kb);
    let mut g_table = Vec::with_capacity(2 * ka * kb);
    for &a in da.values() {
        for &b in db.values() {
            f_table.push(qf.cell_of_value(f_dist, f_fn(a, b)) as u16);
            for u in 0..2 {
                g_table.push(qg.cell_of_value(g_dist, g_fn(a, b, u)) as u16);
            }
        }
    }
    Ok(NodeLuts { f_table, g_table })
}

/// One node of an evolved tree.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedNode {
    /// Compressed distribution of the node's LLRs; its values are the
    /// node's reconstruction array.
    pub dist: DiscreteDistribution,
    /// Tables into the children's alphabets; empty at leaves.
    pub luts: NodeLuts,
}

/// Result of [`run_quantized_de`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub levels: usize,
    pub channel_quantizer: Quantizer,
    /// Indexed by heap index; slot 0 is unused.
    pub nodes: Vec<EvolvedNode>,
}

impl Evolution {
    pub fn code_len(&self) -> usize {
        self.nodes.len() / 2
    }

    pub fn node(&self, path: NodePath) -> &EvolvedNode {
        &self.nodes[path.heap_index()]
    }
}

/// Runs quantized density evolution for a length-`code_len` code whose
/// channel LLRs follow `channel_dist`, compressing every alphabet to at most
/// `levels` symbols. No information set is involved, so the result serves
/// every rate at this length.
pub fn run_quantized_de(
    channel_dist: &DiscreteDistribution,
    code_len: usize,
    levels: usize,
    rule: DesignRule,
) -> Result<Evolution> {
    if code_len < 2 || !code_len.is_power_of_two() {
        return Err(Error::param(format!("code length {code_len} is not a power of two")));
    }
    if levels < 2 || levels > u16::MAX as usize {
        return Err(Error::param(format!("levels {levels} outside 2..=65535")));
    }
    let channel_quantizer = rule.design(channel_dist, levels)?;
    let root = apply_quantizer(channel_dist, &channel_quantizer)?;

    let placeholder = EvolvedNode {
        dist: DiscreteDistribution::point(0.0),
        luts: NodeLuts::default(),
    };
    let mut nodes = vec![placeholder; 2 * code_len];
    nodes[1].dist = root;

    let mut first = 1;
    while first < code_len {
        // Nodes first..2*first share a depth and evolve independently.
        let results: Vec<_> = (first..2 * first)
            .into_par_iter()
            .map(|h| evolve_node(&nodes[h].dist, levels, rule))
            .collect::<Result<_>>()?;
        for (off, (luts, f_child, g_child)) in results.into_iter().enumerate() {
            let h = first + off;
            nodes[h].luts = luts;
            nodes[2 * h].dist = f_child;
            nodes[2 * h + 1].dist = g_child;
        }
        first *= 2;
    }
    Ok(Evolution {
        levels,
        channel_quantizer,
        nodes,
    })
}

fn evolve_node(
    dist: &DiscreteDistribution,
    levels: usize,
    rule: DesignRule,
) -> Result<(NodeLuts, DiscreteDistribution, DiscreteDistribution)> {
    let f_dist = f_output_distribution(dist, dist)?;
    let g_dist = g_output_distribution(dist, dist)?;
    let qf = rule.design(&f_dist, levels)?;
    let qg = rule.design(&g_dist, levels)?;
    let luts = build_node_luts(dist, dist, &f_dist, &qf, &g_dist, &qg)?;
    Ok((
        luts,
        apply_quantizer(&f_dist, &qf)?,
        apply_quantizer(&g_dist, &qg)?,
    ))
}

/// Per-node lookup tables for quantized SC/SCL decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct LutSet {
    pub(crate) code_len: usize,
    pub(crate) levels: usize,
    pub(crate) design_ebn0_db: f64,
    pub(crate) grid: UniformGrid,
    pub(crate) channel_quantizer: Quantizer,
    /// Grid cell to channel quantizer cell.
    pub(crate) channel_map: Vec<u16>,
    /// Reconstruction values per node, by heap index.
    pub(crate) recon: Vec<Vec<f64>>,
    pub(crate) luts: Vec<NodeLuts>,
}

impl LutSet {
    /// Designs tables for a length-`code_len` code with `bits`-bit messages,
    /// at design Eb/N0 `design_ebn0_db` for a code of rate `rate`.
    pub fn design(
        code_len: usize,
        rate: f64,
        bits: u32,
        design_ebn0_db: f64,
        rule: DesignRule,
    ) -> Result<Self> {
        if !(1..=15).contains(&bits) {
            return Err(Error::param(format!("quantization bits {bits} outside 1..=15")));
        }
        let sigma = channel::ebn0_to_sigma(design_ebn0_db, rate)?;
        let grid = channel::design_uniform_grid(sigma, channel::GRID_LEVELS)?;
        Self::design_on_grid(code_len, 1usize << bits, design_ebn0_db, sigma, grid, rule)
    }

    /// Designs tables on an explicit pre-quantization grid.
    pub fn design_on_grid(
        code_len: usize,
        levels: usize,
        design_ebn0_db: f64,
        sigma: f64,
        grid: UniformGrid,
        rule: DesignRule,
    ) -> Result<Self> {
        let dist = channel::grid_distribution(sigma, &grid)?;
        let evo = run_quantized_de(&dist, code_len, levels, rule)?;
        Self::from_evolution(&evo, design_ebn0_db, grid)
    }

    pub fn from_evolution(evo: &Evolution, design_ebn0_db: f64, grid: UniformGrid) -> Result<Self> {
        let recon = evo.nodes.iter().map(|n| n.dist.values().to_vec()).collect();
        let luts = evo.nodes.iter().map(|n| n.luts.clone()).collect();
        Self::from_parts(
            evo.code_len(),
            evo.levels,
            design_ebn0_db,
            grid,
            evo.channel_quantizer.clone(),
            recon,
            luts,
        )
    }

    /// Assembles and validates a table set.
    pub(crate) fn from_parts(
        code_len: usize,
        levels: usize,
        design_ebn0_db: f64,
        grid: UniformGrid,
        channel_quantizer: Quantizer,
        mut recon: Vec<Vec<f64>>,
        mut luts: Vec<NodeLuts>,
    ) -> Result<Self> {
        // Heap slot 0 is unused.
        if let (Some(r), Some(l)) = (recon.first_mut(), luts.first_mut()) {
            r.clear();
            *l = NodeLuts::default();
        }
        if channel_quantizer.source_len() != grid.levels {
            return Err(Error::param(
                "channel quantizer must partition every grid cell",
            ));
        }
        if channel_quantizer.levels() > levels {
            return Err(Error::param("channel quantizer exceeds the level count"));
        }
        let channel_map = channel_quantizer
            .index_map()
            .into_iter()
            .map(|c| c as u16)
            .collect();
        let set = LutSet {
            code_len,
            levels,
            design_ebn0_db,
            grid,
            channel_quantizer,
            channel_map,
            recon,
            luts,
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        let n = self.code_len;
        if n < 2 || !n.is_power_of_two() || self.recon.len() != 2 * n || self.luts.len() != 2 * n {
            return Err(Error::param("table set does not match its code length"));
        }
        if self.recon[1] != self.channel_quantizer.recon() {
            return Err(Error::param("root reconstruction differs from the channel quantizer"));
        }
        for h in 1..2 * n {
            let path = NodePath(h);
            let r = &self.recon[h];
            if r.is_empty() || r.len() > self.levels {
                return Err(Error::param(format!("node {path}: alphabet size {}", r.len())));
            }
            if r.windows(2).any(|w| w[0] >= w[1]) || r.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("node {path}: reconstruction not ascending")));
            }
            let luts = &self.luts[h];
            if h >= n {
                if !luts.f_table.is_empty() || !luts.g_table.is_empty() {
                    return Err(Error::param(format!("leaf {path} carries tables")));
                }
                continue;
            }
            let a = r.len();
            if luts.f_table.len() != a * a || luts.g_table.len() != 2 * a * a {
                return Err(Error::param(format!("node {path}: table size mismatch")));
            }
            let (kf, kg) = (self.recon[2 * h].len(), self.recon[2 * h + 1].len());
            if luts.f_table.iter().any(|&e| e as usize >= kf)
                || luts.g_table.iter().any(|&e| e as usize >= kg)
            {
                return Err(Error::param(format!("node {path}: table entry out of range")));
            }
        }
        Ok(())
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn design_ebn0_db(&self) -> f64 {
        self.design_ebn0_db
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn channel_quantizer(&self) -> &Quantizer {
        &self.channel_quantizer
    }

    pub fn recon(&self, path: NodePath) -> &[f64] {
        &self.recon[path.heap_index()]
    }

    pub fn node_luts(&self, path: NodePath) -> &NodeLuts {
        &self.luts[path.heap_index()]
    }

    /// Channel quantizer cell of a real channel LLR.
    #[inline]
    pub fn quantize_llr(&self, llr: f64) -> u16 {
        self.channel_map[channel::quantize_to_grid(llr, &self.grid)]
    }

    /// Total number of table entries over all nodes.
    pub fn table_entries(&self) -> usize {
        self.luts
            .iter()
            .map(|l| l.f_table.len() + l.g_table.len())
            .sum()
    }
}
