//! Text persistence of [`LutSet`].
//!
//! ```text
//! polarq-tables 1 N=<N> K=<levels> design_ebn0_db=<dB> grid_levels=<L> grid_lo=<lo> grid_step=<step>
//! channel <cells> <distortion>
//! boundaries <a_0> ... <a_cells>
//! recon <t_1> ... <t_cells>
//! node <path> <alphabet>           one block per node, heap order
//! recon <values>
//! f <row>                          <alphabet> rows of <alphabet> indices
//! g <row>                          <alphabet> rows of 2*<alphabet> indices (u = 0, 1 interleaved)
//! end
//! ```
//!
//! Node paths are `-` for the root, otherwise a string over `{f, g}`. Leaf
//! blocks carry no `f`/`g` rows. Reals are written in shortest round-trip
//! form, so export followed by import is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::channel::UniformGrid;
use crate::density::{LutSet, NodeLuts, NodePath};
use crate::quantizer::Quantizer;
use crate::{Error, Result};

pub const FORMAT_MAGIC: &str = "polarq-tables";
pub const FORMAT_VERSION: u32 = 1;

fn join<T: std::fmt::Debug>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_tables<W: Write>(set: &LutSet, mut w: W) -> Result<()> {
    let g = set.grid();
    writeln!(
        w,
        "{FORMAT_MAGIC} {FORMAT_VERSION} N={} K={} design_ebn0_db={:?} grid_levels={} grid_lo={:?} grid_step={:?}",
        set.code_len(),
        set.levels(),
        set.design_ebn0_db(),
        g.levels,
        g.lo,
        g.step
    )?;
    let q = set.channel_quantizer();
    writeln!(w, "channel {} {:?}", q.levels(), q.distortion())?;
    writeln!(w, "boundaries {}", join(q.boundaries()))?;
    writeln!(w, "recon {}", join(q.recon()))?;
    for h in 1..2 * set.code_len() {
        let path = NodePath::from_heap(h);
        let recon = set.recon(path);
        writeln!(w, "node {path} {}", recon.len())?;
        writeln!(w, "recon {}", join(recon))?;
        let luts = set.node_luts(path);
        if luts.f_table.is_empty() {
            continue;
        }
        let a = recon.len();
        for row in luts.f_table.chunks(a) {
            writeln!(w, "f {}", join(row))?;
        }
        for row in luts.g_table.chunks(2 * a) {
            writeln!(w, "g {}", join(row))?;
        }
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

pub fn export_tables(set: &LutSet, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_tables(set, BufWriter::new(file))
}

pub fn import_tables(path: impl AsRef<Path>) -> Result<LutSet> {
    let file = File::open(path)?;
    read_tables(BufReader::new(file))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Load {
            line: self.line,
            msg: msg.into(),
        }
    }

    /// Next line, split after its leading keyword, which must be `key`.
    fn expect(&mut self, key: &str) -> Result<String> {
        self.line += 1;
        let text = match self.inner.next() {
            Some(l) => l?,
            None => return Err(self.err(format!("unexpected end of file, expected `{key}`"))),
        };
        let mut it = text.splitn(2, ' ');
        if it.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(it.next().unwrap_or("").to_string())
    }

    fn parse_list<T: FromStr>(&self, rest: &str) -> Result<Vec<T>> {
        rest.split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(format!("bad number {t:?}"))))
            .collect()
    }
}

fn header_field<T: FromStr>(lines: &Lines<impl BufRead>, tokens: &[&str], key: &str) -> Result<T> {
    let prefix = format!("{key}=");
    let tok = tokens
        .iter()
        .find_map(|t| t.strip_prefix(prefix.as_str()))
        .ok_or_else(|| lines.err(format!("header lacks `{key}`")))?;
    tok.parse()
        .map_err(|_| lines.err(format!("bad header value for `{key}`")))
}

pub fn read_tables<R: BufRead>(reader: R) -> Result<LutSet> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let header = lines.expect(FORMAT_MAGIC)?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    match tokens.first().map(|v| v.parse::<u32>()) {
        Some(Ok(FORMAT_VERSION)) => {}
        Some(Ok(v)) => return Err(lines.err(format!("unsupported format version {v}"))),
        _ => return Err(lines.err("missing format version")),
    }
    let code_len: usize = header_field(&lines, &tokens, "N")?;
    let levels: usize = header_field(&lines, &tokens, "K")?;
    let design_ebn0_db: f64 = header_field(&lines, &tokens, "design_ebn0_db")?;
    let grid = UniformGrid::new(
        header_field(&lines, &tokens, "grid_levels")?,
        header_field(&lines, &tokens, "grid_lo")?,
        header_field(&lines, &tokens, "grid_step")?,
    )
    .map_err(|e| lines.err(e.to_string()))?;
    if code_len < 2 || !code_len.is_power_of_two() || code_len > 1 << 20 {
        return Err(lines.err(format!("bad code length {code_len}")));
    }

    let rest = lines.expect("channel")?;
    let parts: Vec<&str> = rest.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(lines.err("channel line needs <cells> <distortion>"));
    }
    let cells: usize = parts[0].parse().map_err(|_| lines.err("bad cell count"))?;
    let distortion: f64 = parts[1].parse().map_err(|_| lines.err("bad distortion"))?;
    let rest = lines.expect("boundaries")?;
    let boundaries: Vec<usize> = lines.parse_list(&rest)?;
    let rest = lines.expect("recon")?;
    let recon: Vec<f64> = lines.parse_list(&rest)?;
    if recon.len() != cells {
        return Err(lines.err("channel reconstruction count mismatch"));
    }
    let channel_quantizer = Quantizer::from_parts(boundaries, recon, distortion)
        .map_err(|e| lines.err(e.to_string()))?;

    let mut recons = vec![Vec::new(); 2 * code_len];
    let mut luts = vec![NodeLuts::default(); 2 * code_len];
    for h in 1..2 * code_len {
        let expected = NodePath::from_heap(h);
        let rest = lines.expect("node")?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(lines.err("node line needs <path> <alphabet>"));
        }
        let path: NodePath = parts[0].parse().map_err(|e: Error| lines.err(e.to_string()))?;
        if path != expected {
            return Err(lines.err(format!("expected node {expected}, found {path}")));
        }
        let a: usize = parts[1].parse().map_err(|_| lines.err("bad alphabet size"))?;
        if a == 0 || a > levels {
            return Err(lines.err(format!("node {path}: alphabet size {a} outside 1..={levels}")));
        }
        let rest = lines.expect("recon")?;
        let r: Vec<f64> = lines.parse_list(&rest)?;
        if r.len() != a {
            return Err(lines.err(format!("node {path}: expected {a} reconstruction values")));
        }
        if r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(lines.err(format!("node {path}: reconstruction values not ascending")));
        }
        recons[h] = r;
        if h < code_len {
            let mut f = Vec::with_capacity(a * a);
            for _ in 0..a {
                let rest = lines.expect("f")?;
                let row: Vec<u16> = lines.parse_list(&rest)?;
                if row.len() != a {
                    return Err(lines.err(format!("node {path}: f row needs {a} entries")));
                }
                f.extend(row);
            }
            let mut g = Vec::with_capacity(2 * a * a);
            for _ in 0..a {
                let rest = lines.expect("g")?;
                let row: Vec<u16> = lines.parse_list(&rest)?;
                if row.len() != 2 * a {
                    return Err(lines.err(format!("node {path}: g row needs {} entries", 2 * a)));
                }
                g.extend(row);
            }
            luts[h] = NodeLuts {
                f_table: f,
                g_table: g,
            };
        }
    }
    lines.expect("end")?;
    let line = lines.line;
    LutSet::from_parts(
        code_len,
        levels,
        design_ebn0_db,
        grid,
        channel_quantizer,
        recons,
        luts,
    )
    .map_err(|e| Error::Load {
        line,
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DesignRule;

    fn sample() -> LutSet {
        LutSet::design(8, 0.5, 3, 0.0, DesignRule::Symmetric).unwrap()
    }

    fn to_string(set: &LutSet) -> String {
        let mut buf = Vec::new();
        write_tables(set, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn round_trip() {
        let set = sample();
        let text = to_string(&set);
        let back = read_tables(text.as_bytes()).unwrap();
        assert_eq!(back, set);
        assert_eq!(to_string(&back), text);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.lut");
        let set = LutSet::design(32, 0.5, 5, 0.0, DesignRule::Symmetric).unwrap();
        export_tables(&set, &path).unwrap();
        assert_eq!(import_tables(&path).unwrap(), set);
    }

    #[test]
    fn out_of_range_entry_names_node() {
        let text = to_string(&sample());
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let idx = lines.iter().position(|l| l.starts_with("node g ")).unwrap();
        let f_row = (idx..lines.len()).find(|&i| lines[i].starts_with("f ")).unwrap();
        let mut row: Vec<&str> = lines[f_row].split(' ').collect();
        row[1] = "99";
        lines[f_row] = row.join(" ");
        let err = read_tables(lines.join("\n").as_bytes()).unwrap_err();
        assert!(err.to_string().contains("node g:"), "{err}");
    }

    #[test]
    fn descending_recon_rejected() {
        let text = to_string(&sample());
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let idx = lines.iter().position(|l| l.starts_with("node ff ")).unwrap();
        let mut vals: Vec<&str> = lines[idx + 1][6..].split(' ').collect();
        vals.reverse();
        lines[idx + 1] = format!("recon {}", vals.join(" "));
        let err = read_tables(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Load { line, .. } if line == idx + 2), "{err}");
    }

    #[test]
    fn version_and_truncation() {
        let text = to_string(&sample());
        let bumped = text.replacen("polarq-tables 1", "polarq-tables 2", 1);
        assert!(read_tables(bumped.as_bytes())
            .unwrap_err()
            .to_string()
            .contains("version"));
        let cut: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_tables(cut.as_bytes()), Err(Error::Load { .. })));
    }
}
