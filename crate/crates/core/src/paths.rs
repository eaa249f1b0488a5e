//! Enumeration of the directed input-to-output and bias-to-output paths that
//! index the path-weight embedding, plus the hidden-chain index used by the
//! per-output block views.
//!
//! Path families, in the fixed global order:
//!   - start layer 0: full paths (mu, n_1, ..., n_{L-1}, eta)
//!   - start layer l in 1..L-1: bias paths (n_l, ..., n_{L-1}, eta)
//!   - start layer L: output bias paths (eta)
//! Within a family, paths are ordered lexicographically by neuron indices.

use crate::error::{CoreError, Result};
use crate::network::Architecture;

pub const DEFAULT_PATH_BUDGET: u64 = 10_000_000;

/// One path: a run of neuron indices from `start_layer` through layer L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub start_layer: usize,
    pub neurons: Vec<usize>,
}

impl Path {
    /// Human-readable key: "mu3->nu1.2->eta0" for full paths, prefixed with
    /// "b:" for bias paths. Unicode names for the three neuron roles.
    pub fn key(&self, depth: usize) -> String {
        let mut parts = Vec::with_capacity(self.neurons.len());
        for (offset, &n) in self.neurons.iter().enumerate() {
            let layer = self.start_layer + offset;
            if layer == 0 {
                parts.push(format!("\u{3bc}{n}"));
            } else if layer == depth {
                parts.push(format!("\u{3b7}{n}"));
            } else {
                parts.push(format!("\u{3bd}{layer}.{n}"));
            }
        }
        let body = parts.join("->");
        if self.start_layer == 0 {
            body
        } else {
            format!("b:{body}")
        }
    }
}

/// Index over all path families of an architecture.
#[derive(Clone, Debug)]
pub struct PathIndex {
    widths: Vec<usize>,
    offsets: Vec<usize>,
    block_sizes: Vec<usize>,
    total: usize,
}

impl PathIndex {
    pub fn new(arch: &Architecture, budget: u64) -> Result<Self> {
        let widths = arch.widths().to_vec();
        let depth = arch.depth();
        let mut block_sizes = Vec::with_capacity(depth + 1);
        let mut total: u128 = 0;
        for start in 0..=depth {
            let mut size: u128 = 1;
            for k in start..=depth {
                size = size.saturating_mul(widths[k] as u128);
            }
            total += size;
            block_sizes.push(size);
        }
        if total > budget as u128 {
            return Err(CoreError::PathBudgetExceeded {
                required: total,
                budget,
            });
        }
        let block_sizes: Vec<usize> = block_sizes.into_iter().map(|s| s as usize).collect();
        let mut offsets = Vec::with_capacity(depth + 1);
        let mut acc = 0usize;
        for &s in &block_sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(PathIndex {
            widths,
            offsets,
            block_sizes,
            total: acc,
        })
    }

    pub fn with_default_budget(arch: &Architecture) -> Result<Self> {
        Self::new(arch, DEFAULT_PATH_BUDGET)
    }

    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }
    pub fn total(&self) -> usize {
        self.total
    }
    /// |P_start|.
    pub fn family_size(&self, start_layer: usize) -> usize {
        self.block_sizes[start_layer]
    }
    pub fn family_offset(&self, start_layer: usize) -> usize {
        self.offsets[start_layer]
    }
    pub fn full_count(&self) -> usize {
        self.block_sizes[0]
    }

    pub fn encode(&self, path: &Path) -> usize {
        let depth = self.depth();
        debug_assert_eq!(path.neurons.len(), depth - path.start_layer + 1);
        let mut idx = 0usize;
        for (offset, &n) in path.neurons.iter().enumerate() {
            let layer = path.start_layer + offset;
            debug_assert!(n < self.widths[layer]);
            idx = idx * self.widths[layer] + n;
        }
        self.offsets[path.start_layer] + idx
    }

    pub fn decode(&self, mut index: usize) -> Path {
        assert!(index < self.total, "path index out of range");
        let depth = self.depth();
        let start_layer = (0..=depth)
            .rev()
            .find(|&l| self.offsets[l] <= index)
            .expect("offset table covers zero");
        index -= self.offsets[start_layer];
        let len = depth - start_layer + 1;
        let mut neurons = vec![0usize; len];
        for pos in (0..len).rev() {
            let w = self.widths[start_layer + pos];
            neurons[pos] = index % w;
            index /= w;
        }
        Path {
            start_layer,
            neurons,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Path> + '_ {
        (0..self.total).map(|i| self.decode(i))
    }

    pub fn key_of(&self, index: usize) -> String {
        self.decode(index).key(self.depth())
    }

    /// Index of the full path (mu, chain..., eta) where `chain` is a hidden
    /// chain from layer 1 to layer L-1.
    pub fn full_path(&self, input: usize, chain: &[usize], output: usize) -> usize {
        let mut neurons = Vec::with_capacity(chain.len() + 2);
        neurons.push(input);
        neurons.extend_from_slice(chain);
        neurons.push(output);
        self.encode(&Path {
            start_layer: 0,
            neurons,
        })
    }

    /// Index of the bias path starting at the head of `chain` (a hidden chain
    /// from layer `start_layer` to layer L-1) and ending at `output`.
    pub fn bias_path(&self, start_layer: usize, chain: &[usize], output: usize) -> usize {
        let mut neurons = Vec::with_capacity(chain.len() + 1);
        neurons.extend_from_slice(chain);
        neurons.push(output);
        self.encode(&Path {
            start_layer,
            neurons,
        })
    }

    /// Index of the pure output-bias path (eta).
    pub fn output_bias_path(&self, output: usize) -> usize {
        self.encode(&Path {
            start_layer: self.depth(),
            neurons: vec![output],
        })
    }
}

/// Index over hidden chains Q = union of Q_l, where Q_l holds the chains
/// (n_l, ..., n_{L-1}) from hidden layer l to the last hidden layer.
/// Empty for depth 1. The Q_1 block always comes first.
#[derive(Clone, Debug)]
pub struct ChainIndex {
    widths: Vec<usize>,
    depth: usize,
    offsets: Vec<usize>,
    block_sizes: Vec<usize>,
    total: usize,
}

impl ChainIndex {
    pub fn new(arch: &Architecture) -> Self {
        let widths = arch.widths().to_vec();
        let depth = arch.depth();
        let mut block_sizes = Vec::new();
        let mut offsets = Vec::new();
        let mut acc = 0usize;
        for start in 1..depth {
            let mut size = 1usize;
            for k in start..depth {
                size *= widths[k];
            }
            offsets.push(acc);
            block_sizes.push(size);
            acc += size;
        }
        ChainIndex {
            widths,
            depth,
            offsets,
            block_sizes,
            total: acc,
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }
    /// |Q_1| (0 when depth < 2).
    pub fn first_block(&self) -> usize {
        self.block_sizes.first().copied().unwrap_or(0)
    }

    pub fn encode(&self, start_layer: usize, chain: &[usize]) -> usize {
        debug_assert_eq!(chain.len(), self.depth - start_layer);
        let mut idx = 0usize;
        for (offset, &n) in chain.iter().enumerate() {
            idx = idx * self.widths[start_layer + offset] + n;
        }
        self.offsets[start_layer - 1] + idx
    }

    pub fn decode(&self, mut index: usize) -> (usize, Vec<usize>) {
        assert!(index < self.total, "chain index out of range");
        let start_layer = (1..self.depth)
            .rev()
            .find(|&l| self.offsets[l - 1] <= index)
            .expect("offset table covers zero");
        index -= self.offsets[start_layer - 1];
        let len = self.depth - start_layer;
        let mut chain = vec![0usize; len];
        for pos in (0..len).rev() {
            let w = self.widths[start_layer + pos];
            chain[pos] = index % w;
            index /= w;
        }
        (start_layer, chain)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Vec<usize>)> + '_ {
        (0..self.total).map(|i| self.decode(i))
    }
}
