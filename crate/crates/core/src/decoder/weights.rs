//! Trainable variable-node weights and their text file format.

use std::fmt::Write as _;

use crate::error::{parse_err, Error, Result};
use crate::tanner::TannerGraph;

/// Position of each (outgoing edge, extrinsic incoming edge) pair inside
/// one per-edge weight layer.
///
/// For edge `e = (v, c)` the extrinsic edges are `var_edges(v)` without
/// `e`, in ascending order; their weights occupy
/// `start(e) .. start(e) + degree(v) - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightLayout {
    ext_ptr: Vec<usize>,
}

impl WeightLayout {
    pub fn new(graph: &TannerGraph) -> Self {
        let mut ext_ptr = Vec::with_capacity(graph.num_edges() + 1);
        ext_ptr.push(0);
        for e in graph.edges() {
            let d = graph.var_degree(e.var);
            ext_ptr.push(ext_ptr.last().unwrap() + d - 1);
        }
        Self { ext_ptr }
    }

    #[inline]
    pub fn start(&self, edge: usize) -> usize {
        self.ext_ptr[edge]
    }

    /// Weights per variable-node layer.
    pub fn layer_len(&self) -> usize {
        *self.ext_ptr.last().unwrap()
    }

    pub fn num_edges(&self) -> usize {
        self.ext_ptr.len() - 1
    }
}

/// Per-edge weights: `iterations - 1` variable-node layers (the last
/// iteration feeds the output layer directly) plus one output weight per
/// edge.
#[derive(Clone, Debug, PartialEq)]
pub struct PerEdgeWeights {
    pub layers: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

impl PerEdgeWeights {
    /// All weights equal to `value`.
    pub fn constant(layout: &WeightLayout, iterations: usize, value: f64) -> Self {
        Self {
            layers: vec![vec![value; layout.layer_len()]; iterations.saturating_sub(1)],
            output: vec![value; layout.num_edges()],
        }
    }

    pub fn iterations(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum::<usize>() + self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Layer-major flattening, output layer last.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for l in &self.layers {
            out.extend_from_slice(l);
        }
        out.extend_from_slice(&self.output);
        out
    }

    /// Inverse of [`flatten`](Self::flatten) for the same shape.
    pub fn unflatten_like(&self, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), self.len());
        let mut pos = 0;
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let s = flat[pos..pos + l.len()].to_vec();
                pos += l.len();
                s
            })
            .collect();
        Self {
            layers,
            output: flat[pos..].to_vec(),
        }
    }
}

/// Weights on the check-to-variable messages of the variable-node update.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSet {
    /// One weight shared by every edge and layer, output included.
    Single(f64),
    PerEdge(PerEdgeWeights),
}

impl WeightSet {
    pub fn is_finite(&self) -> bool {
        match self {
            WeightSet::Single(w) => w.is_finite(),
            WeightSet::PerEdge(p) => p.flatten().iter().all(|w| w.is_finite()),
        }
    }

    /// Checks that the shape fits `graph` at `iterations` iterations.
    pub fn validate(&self, graph: &TannerGraph, iterations: usize) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite("weight".into()));
        }
        let WeightSet::PerEdge(p) = self else {
            return Ok(());
        };
        let layout = WeightLayout::new(graph);
        if p.iterations() != iterations {
            return Err(Error::InvalidParameter(format!(
                "weights trained for {} iterations, decoder runs {iterations}",
                p.iterations()
            )));
        }
        if p.output.len() != graph.num_edges()
            || p.layers.iter().any(|l| l.len() != layout.layer_len())
        {
            return Err(Error::InvalidParameter(
                "weight shape does not match the graph".into(),
            ));
        }
        Ok(())
    }

    /// Text form: a header (`variant`, `iterations`, `edges`) and the
    /// weights, layer-major then edge-major, one line per edge.
    pub fn to_text(&self, graph: &TannerGraph, iterations: usize) -> String {
        let mut out = String::new();
        match self {
            WeightSet::Single(w) => {
                let _ = writeln!(out, "variant single");
                let _ = writeln!(out, "iterations {iterations}");
                let _ = writeln!(out, "edges {}", graph.num_edges());
                let _ = writeln!(out, "{w:?}");
            }
            WeightSet::PerEdge(p) => {
                let layout = WeightLayout::new(graph);
                let _ = writeln!(out, "variant per-edge");
                let _ = writeln!(out, "iterations {}", p.iterations());
                let _ = writeln!(out, "edges {}", graph.num_edges());
                for (i, layer) in p.layers.iter().enumerate() {
                    let _ = writeln!(out, "# layer {}", i + 1);
                    for e in 0..layout.num_edges() {
                        let s = &layer[layout.start(e)..layout.start(e + 1)];
                        let _ = writeln!(out, "{}", fmt_row(s));
                    }
                }
                let _ = writeln!(out, "# output");
                for w in &p.output {
                    let _ = writeln!(out, "{w:?}");
                }
            }
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output. Returns the weights and the
    /// iteration count from the header; per-edge layers are split using
    /// the `edges` header.
    pub fn parse(text: &str) -> Result<(Self, usize)> {
        let mut variant = None;
        let mut iterations = None;
        let mut edges = None;
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let first = toks.next().unwrap();
            match first {
                "variant" => variant = toks.next().map(str::to_owned),
                "iterations" => iterations = Some(int(ln, toks.next())?),
                "edges" => edges = Some(int(ln, toks.next())?),
                _ => {
                    for t in std::iter::once(first).chain(toks) {
                        let v: f64 = t
                            .parse()
                            .map_err(|_| parse_err(ln, format!("bad weight {t:?}")))?;
                        values.push(v);
                    }
                }
            }
        }
        let iterations = iterations.ok_or_else(|| parse_err(0, "missing `iterations`"))?;
        let edges = edges.ok_or_else(|| parse_err(0, "missing `edges`"))?;
        let set = match variant.as_deref() {
            Some("single") => {
                let [w] = values[..] else {
                    return Err(parse_err(0, "single variant stores exactly one weight"));
                };
                WeightSet::Single(w)
            }
            Some("per-edge") => {
                if values.len() < edges || iterations == 0 {
                    return Err(parse_err(0, "too few weights"));
                }
                let hidden_layers = iterations - 1;
                let body = values.len() - edges;
                let layer_len = if hidden_layers == 0 {
                    if body != 0 {
                        return Err(parse_err(0, "weight count does not match header"));
                    }
                    0
                } else {
                    if body % hidden_layers != 0 {
                        return Err(parse_err(0, "weight count does not match header"));
                    }
                    body / hidden_layers
                };
                let layers = (0..hidden_layers)
                    .map(|l| values[l * layer_len..(l + 1) * layer_len].to_vec())
                    .collect();
                WeightSet::PerEdge(PerEdgeWeights {
                    layers,
                    output: values[body..].to_vec(),
                })
            }
            other => return Err(parse_err(0, format!("unknown variant {other:?}"))),
        };
        if !set.is_finite() {
            return Err(Error::NonFinite("weight".into()));
        }
        Ok((set, iterations))
    }
}

fn fmt_row(s: &[f64]) -> String {
    s.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(" ")
}

fn int(ln: usize, tok: Option<&str>) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(ln, "expected an integer"))
}
