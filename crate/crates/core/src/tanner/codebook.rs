use std::collections::BTreeSet;

use super::TannerGraph;
use crate::error::{Error, Result};

/// Largest code length [`codebook`] will enumerate.
pub const MAX_ENUMERATION_LENGTH: usize = 24;

/// Every channel-bit vector that extends to an assignment satisfying all
/// checks (known-zero variables held at zero), in lexicographic order.
///
/// Hidden variables are eliminated exactly: the checks are row-reduced on
/// the hidden columns, and the rows left with no hidden support are the
/// constraints on the channel bits. The 2^N channel vectors are then
/// enumerated against those constraints.
pub fn codebook(graph: &TannerGraph) -> Result<BTreeSet<Vec<u8>>> {
    let n = graph.code_length();
    let hidden = graph.num_hidden();
    if n > MAX_ENUMERATION_LENGTH {
        return Err(Error::TooLarge(n, MAX_ENUMERATION_LENGTH));
    }
    // Each row: (hidden bitset, channel bitset).
    let words = hidden.div_ceil(64).max(1);
    let mut rows: Vec<(Vec<u64>, u32)> = Vec::new();
    let mut push_row = |members: &[usize]| {
        let mut h = vec![0u64; words];
        let mut c = 0u32;
        for &v in members {
            if v < hidden {
                h[v / 64] ^= 1 << (v % 64);
            } else {
                c ^= 1 << (v - hidden);
            }
        }
        rows.push((h, c));
    };
    for c in 0..graph.num_checks() {
        push_row(&graph.check_vars(c));
    }
    for (v, node) in graph.variables().iter().enumerate() {
        if node.known_zero {
            push_row(&[v]);
        }
    }
    let mut pivot_row = 0;
    for col in 0..hidden {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (pivot_row..rows.len()).find(|&r| rows[r].0[w] & bit != 0) else {
            continue;
        };
        rows.swap(pivot_row, p);
        let (ph, pc) = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && row.0[w] & bit != 0 {
                for (a, b) in row.0.iter_mut().zip(&ph) {
                    *a ^= b;
                }
                row.1 ^= pc;
            }
        }
        pivot_row += 1;
    }
    let constraints: Vec<u32> = rows[pivot_row..].iter().map(|r| r.1).collect();
    let mut out = BTreeSet::new();
    for x in 0u32..(1u32 << n) {
        if constraints.iter().all(|&m| (x & m).count_ones() % 2 == 0) {
            out.insert((0..n).map(|j| ((x >> j) & 1) as u8).collect());
        }
    }
    Ok(out)
}
