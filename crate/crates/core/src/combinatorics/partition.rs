use std::fmt;
use std::str::FromStr;

use crate::error::{arg, Error, Result};

/// A set partition of {1..k}. Blocks are sorted internally and ordered by
/// their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.iter().any(|b| b.is_empty()) {
            return arg("partition blocks must be non-empty");
        }
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        if all.iter().enumerate().any(|(i, &e)| e != i + 1) {
            return arg("blocks must be disjoint and cover {1..k}");
        }
        Ok(Self { blocks })
    }

    /// Partition from a block label per element (restricted growth string).
    fn from_labels(labels: &[usize]) -> Self {
        let m = labels.iter().max().map_or(0, |x| x + 1);
        let mut blocks = vec![Vec::new(); m];
        for (e, &l) in labels.iter().enumerate() {
            blocks[l].push(e + 1);
        }
        Self { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn k(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block index (0-based) holding each element, element order.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.k()];
        for (t, b) in self.blocks.iter().enumerate() {
            for &e in b {
                out[e - 1] = t;
            }
        }
        out
    }

    /// The index i_π: element e receives the value of its block.
    pub fn assemble(&self, block_values: &[usize]) -> Vec<usize> {
        self.labels().iter().map(|&t| block_values[t]).collect()
    }

    /// Whether the multi-index `i` is constant exactly on the blocks of this
    /// partition (equal inside blocks, distinct across blocks).
    pub fn is_kernel_of(&self, i: &[usize]) -> bool {
        let labels = self.labels();
        for a in 0..i.len() {
            for b in a + 1..i.len() {
                if (labels[a] == labels[b]) != (i[a] == i[b]) {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (t, b) in self.blocks.iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (i, e) in b.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = s
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Argument(format!("bad partition '{s}'")))?;
        let mut blocks = Vec::new();
        for part in inner.split('}') {
            let part = part.trim_start_matches(',');
            if part.is_empty() {
                continue;
            }
            let body = part
                .strip_prefix('{')
                .ok_or_else(|| Error::Argument(format!("bad block in '{s}'")))?;
            let block = body
                .split(',')
                .map(|x| x.parse::<usize>().map_err(|_| Error::Argument(format!("bad element '{x}'"))))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
        }
        Partition::new(blocks)
    }
}

/// All set partitions of {1..k}, sorted lexicographically by block list.
pub fn enumerate_partitions(k: usize) -> Result<Vec<Partition>> {
    if !(1..=10).contains(&k) {
        return arg(format!("partitions are enumerated for 1 <= k <= 10, got {k}"));
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; k];
    fn rec(pos: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if pos == labels.len() {
            out.push(Partition::from_labels(labels));
            return;
        }
        for l in 0..=max + 1 {
            labels[pos] = l;
            rec(pos + 1, max.max(l), labels, out);
        }
    }
    if k == 1 {
        out.push(Partition::from_labels(&labels));
    } else {
        rec(1, 0, &mut labels, &mut out);
    }
    out.sort();
    Ok(out)
}

/// Bell numbers by the Bell triangle, an independent count.
pub fn bell_number(k: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}
