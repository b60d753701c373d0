//! LDPC-like Tanner graphs for polar codes.
//!
//! A [`TannerGraph`] holds variable nodes (channel-observed or hidden),
//! check nodes and an indexed edge list. Edges are stored check-major, so
//! the edges of check `c` form the contiguous range
//! [`TannerGraph::check_edges`]. Variables are ordered hidden first, then
//! channel-observed variables in channel-position order; this is also the
//! column order of [`SparseParityMatrix`].

mod alist;
mod build;
mod codebook;
mod parity;
mod prune;

use std::ops::Range;

pub use alist::{read_alist, write_alist};
pub use build::{build_full_factor_graph, full_graph_values, StageOrder};
pub use codebook::{codebook, MAX_ENUMERATION_LENGTH};
pub use parity::{dense_parity_from_generator, SparseParityMatrix};
pub use prune::{prune, prune_shuffled, prune_with_stats, PruneStats};

use crate::error::{Error, Result};

/// A variable node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableNode {
    /// 0-based channel position, `None` for hidden variables.
    pub channel_index: Option<usize>,
    /// The variable is known to be zero (frozen input bit).
    pub known_zero: bool,
    /// Identifier of the variable in the graph this one was derived from.
    pub origin: usize,
}

impl VariableNode {
    pub fn is_hidden(&self) -> bool {
        self.channel_index.is_none()
    }
}

/// One edge between a variable and a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub var: usize,
    pub check: usize,
}

/// Bipartite graph of variable and check nodes.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    code_length: usize,
    variables: Vec<VariableNode>,
    edges: Vec<Edge>,
    check_ptr: Vec<usize>,
    var_ptr: Vec<usize>,
    var_adj: Vec<usize>,
    channel_vars: Vec<usize>,
}

impl TannerGraph {
    /// Builds a graph from per-check variable lists, keeping the given
    /// check order. Variables must already be ordered hidden first, then
    /// channel variables by position.
    pub fn from_checks(
        code_length: usize,
        variables: Vec<VariableNode>,
        checks: &[Vec<usize>],
    ) -> Result<Self> {
        let num_hidden = variables.iter().filter(|v| v.is_hidden()).count();
        if variables.len() != num_hidden + code_length {
            return Err(Error::Construction(format!(
                "{} channel variables for code length {code_length}",
                variables.len() - num_hidden
            )));
        }
        for (j, v) in variables[num_hidden..].iter().enumerate() {
            if v.channel_index != Some(j) {
                return Err(Error::Construction(format!(
                    "variable {} should carry channel position {}",
                    num_hidden + j,
                    j + 1
                )));
            }
        }
        let mut edges = Vec::new();
        let mut check_ptr = vec![0];
        for (c, members) in checks.iter().enumerate() {
            let mut sorted = members.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Construction(format!("duplicate edge in check {c}")));
            }
            for &v in &sorted {
                if v >= variables.len() {
                    return Err(Error::Construction(format!(
                        "check {c} references variable {v} out of range"
                    )));
                }
                edges.push(Edge { var: v, check: c });
            }
            check_ptr.push(edges.len());
        }
        let mut counts = vec![0usize; variables.len() + 1];
        for e in &edges {
            counts[e.var + 1] += 1;
        }
        for i in 0..variables.len() {
            counts[i + 1] += counts[i];
        }
        let var_ptr = counts;
        let mut fill = var_ptr.clone();
        let mut var_adj = vec![0; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            var_adj[fill[e.var]] = i;
            fill[e.var] += 1;
        }
        let channel_vars = (num_hidden..variables.len()).collect();
        Ok(Self {
            code_length,
            variables,
            edges,
            check_ptr,
            var_ptr,
            var_adj,
            channel_vars,
        })
    }

    /// Block length `N` (number of channel-observed variables).
    pub fn code_length(&self) -> usize {
        self.code_length
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_hidden(&self) -> usize {
        self.variables.len() - self.code_length
    }

    pub fn num_checks(&self) -> usize {
        self.check_ptr.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn variables(&self) -> &[VariableNode] {
        &self.variables
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices incident to check `c`.
    #[inline]
    pub fn check_edges(&self, c: usize) -> Range<usize> {
        self.check_ptr[c]..self.check_ptr[c + 1]
    }

    /// Edge indices incident to variable `v`, ascending.
    #[inline]
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_adj[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_ptr[c + 1] - self.check_ptr[c]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_ptr[v + 1] - self.var_ptr[v]
    }

    /// Variable carrying channel position `pos` (0-based).
    pub fn channel_var(&self, pos: usize) -> usize {
        self.channel_vars[pos]
    }

    /// Variables of check `c`, ascending.
    pub fn check_vars(&self, c: usize) -> Vec<usize> {
        self.check_edges(c).map(|e| self.edges[e].var).collect()
    }

    /// All checks as sorted variable lists.
    pub fn checks(&self) -> Vec<Vec<usize>> {
        (0..self.num_checks()).map(|c| self.check_vars(c)).collect()
    }

    /// True when every check is satisfied by `bits` (one per variable).
    pub fn satisfies(&self, bits: &[u8]) -> bool {
        (0..self.num_checks()).all(|c| {
            self.check_edges(c)
                .fold(0u8, |acc, e| acc ^ (bits[self.edges[e].var] & 1))
                == 0
        })
    }

    /// Reorders checks and hidden variables into canonical form: checks
    /// sorted by (degree, incident channel positions), hidden variables by
    /// first incidence. Two graphs that differ only by a permutation of
    /// checks or hidden variables canonicalize identically.
    pub fn canonical(&self) -> Self {
        let checks = self.checks();
        let hidden = self.num_hidden();
        let key = |members: &Vec<usize>| {
            let chan: Vec<usize> = members
                .iter()
                .filter_map(|&v| self.variables[v].channel_index)
                .collect();
            let mut hid: Vec<usize> = members
                .iter()
                .filter(|&&v| v < hidden)
                .map(|&v| self.variables[v].origin)
                .collect();
            hid.sort_unstable();
            (members.len(), chan, hid)
        };
        let mut order: Vec<usize> = (0..checks.len()).collect();
        order.sort_by_cached_key(|&c| key(&checks[c]));
        let mut first_seen = vec![usize::MAX; hidden];
        for (rank, &c) in order.iter().enumerate() {
            for &v in &checks[c] {
                if v < hidden && first_seen[v] == usize::MAX {
                    first_seen[v] = rank;
                }
            }
        }
        let mut hidden_order: Vec<usize> = (0..hidden).collect();
        hidden_order.sort_by_key(|&v| (first_seen[v], self.variables[v].origin, v));
        let mut remap = vec![0; self.variables.len()];
        for (new, &old) in hidden_order.iter().enumerate() {
            remap[old] = new;
        }
        for (v, slot) in remap.iter_mut().enumerate().skip(hidden) {
            *slot = v;
        }
        let mut variables = self.variables.clone();
        for (old, var) in self.variables.iter().enumerate() {
            variables[remap[old]] = var.clone();
        }
        let new_checks: Vec<Vec<usize>> = order
            .iter()
            .map(|&c| {
                let mut m: Vec<usize> = checks[c].iter().map(|&v| remap[v]).collect();
                m.sort_unstable();
                m
            })
            .collect();
        Self::from_checks(self.code_length, variables, &new_checks)
            .expect("canonical reordering preserves validity")
    }

    /// Structural fingerprint: the checks as variable lists plus the
    /// channel position of every variable. Ignores provenance.
    pub fn structure(&self) -> (Vec<Vec<usize>>, Vec<Option<usize>>) {
        (
            self.checks(),
            self.variables.iter().map(|v| v.channel_index).collect(),
        )
    }

    /// Check-degree histogram as (degree, count), ascending by degree.
    pub fn check_degree_histogram(&self) -> Vec<(usize, usize)> {
        histogram((0..self.num_checks()).map(|c| self.check_degree(c)))
    }

    /// Variable-degree histogram as (degree, count), ascending by degree.
    pub fn var_degree_histogram(&self) -> Vec<(usize, usize)> {
        histogram((0..self.num_variables()).map(|v| self.var_degree(v)))
    }
}

/// Builds a graph from variables in arbitrary order: hidden variables keep
/// their relative order and go first, channel variables follow by position.
pub(crate) fn assemble(
    code_length: usize,
    nodes: Vec<VariableNode>,
    checks: &[Vec<usize>],
) -> TannerGraph {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&v| match nodes[v].channel_index {
        None => (0, v),
        Some(p) => (1, p),
    });
    let mut remap = vec![0; nodes.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let variables: Vec<VariableNode> = order.iter().map(|&v| nodes[v].clone()).collect();
    let checks: Vec<Vec<usize>> = checks
        .iter()
        .map(|c| c.iter().map(|&v| remap[v]).collect())
        .collect();
    TannerGraph::from_checks(code_length, variables, &checks)
        .expect("assembled graph is well formed")
}

fn histogram(it: impl Iterator<Item = usize>) -> Vec<(usize, usize)> {
    let mut map = std::collections::BTreeMap::new();
    for d in it {
        *map.entry(d).or_insert(0) += 1;
    }
    map.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn channel(pos: usize) -> VariableNode {
        VariableNode {
            channel_index: Some(pos),
            known_zero: false,
            origin: pos,
        }
    }

    #[test]
    fn adjacency_is_consistent() {
        let vars = vec![
            VariableNode {
                channel_index: None,
                known_zero: false,
                origin: 100,
            },
            channel(0),
            channel(1),
            channel(2),
        ];
        let g = TannerGraph::from_checks(3, vars, &[vec![0, 1, 2], vec![0, 3]]).unwrap();
        assert_eq!(g.num_edges(), 5);
        assert_eq!(g.check_edges(1), 3..5);
        assert_eq!(g.var_edges(0), &[0, 3]);
        assert_eq!(g.var_degree(3), 1);
        assert!(g.satisfies(&[1, 1, 0, 1]));
        assert!(!g.satisfies(&[1, 1, 1, 1]));
    }

    #[test]
    fn rejects_duplicate_edges_and_bad_channel_order() {
        let vars = vec![channel(0), channel(1)];
        assert!(TannerGraph::from_checks(2, vars.clone(), &[vec![0, 0]]).is_err());
        let swapped = vec![channel(1), channel(0)];
        assert!(TannerGraph::from_checks(2, swapped, &[vec![0, 1]]).is_err());
        assert!(TannerGraph::from_checks(2, vars, &[vec![0, 5]]).is_err());
    }
}
