use super::{TannerGraph, VariableNode};
use crate::polar::CodeSpec;

/// Order in which the butterfly stages of the encoding graph are laid out,
/// counted from the input (u) side. Both orders describe the same encoder
/// because the stage matrices commute; they prune to different graphs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StageOrder {
    /// The stage next to the inputs pairs positions `N/2` apart.
    #[default]
    FarthestFirst,
    /// The stage next to the inputs pairs adjacent positions.
    NearestFirst,
}

impl StageOrder {
    fn spans(self, stages: usize) -> Vec<usize> {
        let mut spans: Vec<usize> = (0..stages).map(|j| 1 << j).collect();
        if self == StageOrder::FarthestFirst {
            spans.reverse();
        }
        spans
    }
}

/// Raw butterfly network: variable count, per-variable channel position,
/// checks as (upper-out, upper-in, lower-in) and the final column.
struct Network {
    num_vars: usize,
    checks: Vec<[usize; 3]>,
    output: Vec<usize>,
}

fn network(length: usize, stages: usize, order: StageOrder) -> Network {
    let mut cur: Vec<usize> = (0..length).collect();
    let mut next_id = length;
    let mut checks = Vec::with_capacity(stages * length / 2);
    for span in order.spans(stages) {
        for i in 0..length {
            if i & span == 0 {
                let (upper, lower) = (cur[i], cur[i + span]);
                let out = next_id;
                next_id += 1;
                checks.push([out, upper, lower]);
                cur[i] = out;
            }
        }
    }
    Network {
        num_vars: next_id,
        checks,
        output: cur,
    }
}

/// Tanner-graph form of the encoding factor graph.
///
/// Each butterfly contributes one degree-3 check
/// `upper_out ⊕ upper_in ⊕ lower_in = 0`; the lower output is the same
/// variable as the lower input. Input variables `0..N` carry the `u` bits
/// (frozen ones flagged known-zero); the last column carries the channel
/// positions. `origin` of every variable is its id in this network.
pub fn build_full_factor_graph(spec: &CodeSpec, order: StageOrder) -> TannerGraph {
    let length = spec.length();
    let net = network(length, spec.stages(), order);
    let mut channel = vec![None; net.num_vars];
    for (pos, &v) in net.output.iter().enumerate() {
        channel[v] = Some(pos);
    }
    let nodes: Vec<VariableNode> = (0..net.num_vars)
        .map(|id| VariableNode {
            channel_index: channel[id],
            known_zero: id < length && spec.is_frozen(id),
            origin: id,
        })
        .collect();
    let checks: Vec<Vec<usize>> = net.checks.iter().map(|c| c.to_vec()).collect();
    super::assemble(length, nodes, &checks)
}

/// Value of every network variable (indexed by origin id) when the
/// encoder is fed `u`.
pub fn full_graph_values(spec: &CodeSpec, order: StageOrder, u: &[u8]) -> Vec<u8> {
    let length = spec.length();
    let net = network(length, spec.stages(), order);
    let mut values = vec![0u8; net.num_vars];
    values[..length].copy_from_slice(u);
    for &[out, upper, lower] in &net.checks {
        values[out] = values[upper] ^ values[lower];
    }
    values
}
