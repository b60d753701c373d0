//! Flooding message-passing decoders over a [`TannerGraph`].
//!
//! LLRs follow `L = log(P(bit = 0) / P(bit = 1))`. One iteration is a
//! check-node half-iteration followed by a variable-node half-iteration;
//! the variable-node half of the last iteration is replaced by the output
//! aggregate `M_v = L_v + Σ w · c2v`, whose sign gives the hard decision
//! (`M_v ≥ 0` decodes to 0).
//!
//! All variants share the same arithmetic: min-sum is weighted min-sum with
//! every weight equal to 1.0, so the two agree bit for bit.

mod weights;

pub use weights::{PerEdgeWeights, WeightLayout, WeightSet};

use crate::error::{Error, Result};
use crate::tanner::TannerGraph;

/// Default saturation level for every message.
pub const DEFAULT_CLIP: f64 = 30.0;

/// Scaling factor commonly used for scaled min-sum.
pub const DEFAULT_SMS_SCALE: f64 = 0.9375;

/// Marker for "no extrinsic edge" in argmin records.
pub const NO_EDGE: u32 = u32::MAX;

/// Decoding algorithm.
#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    SumProduct,
    MinSum,
    /// Min-sum with every check-to-variable message scaled by `α ∈ (0, 1]`.
    ScaledMinSum(f64),
    /// Min-sum with weighted variable-node sums.
    WeightedMinSum(WeightSet),
}

impl Variant {
    /// Short lowercase name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Variant::SumProduct => "spa",
            Variant::MinSum => "ms",
            Variant::ScaledMinSum(_) => "sms",
            Variant::WeightedMinSum(_) => "wms",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoderConfig {
    pub variant: Variant,
    pub iterations: usize,
    /// Stop at the first iteration whose hard decisions satisfy every check.
    pub early_stop: bool,
    pub clip: f64,
}

impl DecoderConfig {
    pub fn new(variant: Variant, iterations: usize) -> Self {
        Self {
            variant,
            iterations,
            early_stop: false,
            clip: DEFAULT_CLIP,
        }
    }

    pub fn with_early_stop(mut self, on: bool) -> Self {
        self.early_stop = on;
        self
    }

    pub fn validate(&self, graph: &TannerGraph) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        if !(self.clip > 0.0 && self.clip.is_finite()) {
            return Err(Error::InvalidParameter(format!("clip level {}", self.clip)));
        }
        match &self.variant {
            Variant::ScaledMinSum(a) if !(*a > 0.0 && *a <= 1.0) => Err(
                Error::InvalidParameter(format!("scaling factor {a} outside (0, 1]")),
            ),
            Variant::WeightedMinSum(w) => w.validate(graph, self.iterations),
            _ => Ok(()),
        }
    }
}

/// Intrinsic LLR of every variable node, hidden ones included.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrVector(pub Vec<f64>);

/// Messages on every edge, one per direction.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMessages {
    pub v2c: Vec<f64>,
    pub c2v: Vec<f64>,
}

impl EdgeMessages {
    pub fn zeros(num_edges: usize) -> Self {
        Self {
            v2c: vec![0.0; num_edges],
            c2v: vec![0.0; num_edges],
        }
    }
}

/// Check-node rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CheckRule {
    SumProduct,
    /// Min-sum, output multiplied by `scale` (1.0 for plain min-sum).
    MinSum { scale: f64 },
}

/// Weights applied in one variable-node layer.
#[derive(Clone, Copy, Debug)]
pub enum LayerWeights<'a> {
    Uniform(f64),
    PerEdge(&'a [f64], &'a WeightLayout),
}

/// Weights applied in the output aggregate.
#[derive(Clone, Copy, Debug)]
pub enum OutputWeights<'a> {
    Uniform(f64),
    PerEdge(&'a [f64]),
}

/// Maps channel LLRs onto the variable nodes: hidden variables start at
/// zero, and variables known to be zero start saturated at `+DEFAULT_CLIP`.
pub fn init_llr(graph: &TannerGraph, channel_llrs: &[f64]) -> Result<LlrVector> {
    let mut out = vec![0.0; graph.num_variables()];
    fill_llr(graph, channel_llrs, &mut out)?;
    Ok(LlrVector(out))
}

pub(crate) fn fill_llr(graph: &TannerGraph, channel_llrs: &[f64], out: &mut [f64]) -> Result<()> {
    if channel_llrs.len() != graph.code_length() {
        return Err(Error::LengthMismatch {
            expected: graph.code_length(),
            actual: channel_llrs.len(),
        });
    }
    if let Some(bad) = channel_llrs.iter().find(|l| !l.is_finite()) {
        return Err(Error::NonFinite(format!("channel LLR {bad}")));
    }
    for (slot, node) in out.iter_mut().zip(graph.variables()) {
        *slot = match node.channel_index {
            _ if node.known_zero => DEFAULT_CLIP,
            Some(j) => channel_llrs[j],
            None => 0.0,
        };
    }
    Ok(())
}

#[inline]
fn is_negative(x: f64) -> bool {
    // sign(0) is +1, including -0.0.
    x < 0.0
}

/// Check-node half-iteration: writes `c2v` from `v2c`.
///
/// For min-sum, `argmin` (if given) receives for each edge the extrinsic
/// edge whose magnitude was selected, ties resolved to the lowest edge
/// index; [`NO_EDGE`] marks a check of degree 1.
pub fn cn_update(
    graph: &TannerGraph,
    rule: CheckRule,
    v2c: &[f64],
    c2v: &mut [f64],
    clip: f64,
    mut argmin: Option<&mut [u32]>,
) {
    for c in 0..graph.num_checks() {
        let range = graph.check_edges(c);
        match rule {
            CheckRule::MinSum { scale } => {
                let (mut m1, mut m2) = (f64::INFINITY, f64::INFINITY);
                let (mut i1, mut i2) = (NO_EDGE, NO_EDGE);
                let mut negative = false;
                for e in range.clone() {
                    let x = v2c[e];
                    negative ^= is_negative(x);
                    let a = x.abs();
                    if a < m1 {
                        m2 = m1;
                        i2 = i1;
                        m1 = a;
                        i1 = e as u32;
                    } else if a < m2 {
                        m2 = a;
                        i2 = e as u32;
                    }
                }
                for e in range {
                    let (mag, src) = if e as u32 == i1 { (m2, i2) } else { (m1, i1) };
                    let neg = negative ^ is_negative(v2c[e]);
                    let signed = if neg { -mag } else { mag };
                    c2v[e] = (signed * scale).clamp(-clip, clip);
                    if let Some(am) = argmin.as_deref_mut() {
                        am[e] = src;
                    }
                }
            }
            CheckRule::SumProduct => {
                for e in range.clone() {
                    let mut prod = 1.0;
                    for e2 in range.clone() {
                        if e2 != e {
                            prod *= (0.5 * v2c[e2]).tanh();
                        }
                    }
                    c2v[e] = (2.0 * prod.atanh()).clamp(-clip, clip);
                }
            }
        }
    }
}

/// Variable-node half-iteration: `v2c(e) = L_v + Σ_{e' ≠ e} w · c2v(e')`.
pub fn vn_update(
    graph: &TannerGraph,
    weights: LayerWeights<'_>,
    llr: &[f64],
    c2v: &[f64],
    v2c: &mut [f64],
    clip: f64,
) {
    for (v, &prior) in llr.iter().enumerate().take(graph.num_variables()) {
        let edges = graph.var_edges(v);
        for &e in edges {
            let mut acc = prior;
            match weights {
                LayerWeights::Uniform(w) => {
                    for &e2 in edges {
                        if e2 != e {
                            acc += w * c2v[e2];
                        }
                    }
                }
                LayerWeights::PerEdge(ws, layout) => {
                    let mut k = layout.start(e);
                    for &e2 in edges {
                        if e2 != e {
                            acc += ws[k] * c2v[e2];
                            k += 1;
                        }
                    }
                }
            }
            v2c[e] = acc.clamp(-clip, clip);
        }
    }
}

/// Output aggregate `M_v = L_v + Σ_{all e'} w · c2v(e')`, before any sigmoid.
pub fn output_marginals(
    graph: &TannerGraph,
    weights: OutputWeights<'_>,
    llr: &[f64],
    c2v: &[f64],
    out: &mut [f64],
) {
    for v in 0..graph.num_variables() {
        let mut acc = llr[v];
        for &e in graph.var_edges(v) {
            let w = match weights {
                OutputWeights::Uniform(w) => w,
                OutputWeights::PerEdge(ws) => ws[e],
            };
            acc += w * c2v[e];
        }
        out[v] = acc;
    }
}

/// Result of one decode call.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    /// Hard decisions on the channel positions.
    pub hard_bits: Vec<u8>,
    /// Output aggregate `M_v` for every variable node.
    pub soft: Vec<f64>,
    pub iterations_used: usize,
    /// Whether the hard decisions on all variables satisfy every check.
    pub parity_ok: bool,
}

impl Variant {
    pub(crate) fn check_rule(&self) -> CheckRule {
        match self {
            Variant::SumProduct => CheckRule::SumProduct,
            Variant::ScaledMinSum(a) => CheckRule::MinSum { scale: *a },
            Variant::MinSum | Variant::WeightedMinSum(_) => CheckRule::MinSum { scale: 1.0 },
        }
    }

    /// Weights of variable-node layer `layer` (0-based).
    pub(crate) fn layer_weights<'a>(
        &'a self,
        layer: usize,
        layout: &'a WeightLayout,
    ) -> LayerWeights<'a> {
        match self {
            Variant::WeightedMinSum(WeightSet::Single(w)) => LayerWeights::Uniform(*w),
            Variant::WeightedMinSum(WeightSet::PerEdge(p)) => {
                LayerWeights::PerEdge(&p.layers[layer], layout)
            }
            _ => LayerWeights::Uniform(1.0),
        }
    }

    pub(crate) fn output_weights(&self) -> OutputWeights<'_> {
        match self {
            Variant::WeightedMinSum(WeightSet::Single(w)) => OutputWeights::Uniform(*w),
            Variant::WeightedMinSum(WeightSet::PerEdge(p)) => OutputWeights::PerEdge(&p.output),
            _ => OutputWeights::Uniform(1.0),
        }
    }
}

/// Reusable decoder: owns its message workspace, borrows the graph.
pub struct Decoder<'g> {
    graph: &'g TannerGraph,
    config: DecoderConfig,
    layout: WeightLayout,
    llr: Vec<f64>,
    msgs: EdgeMessages,
    marginals: Vec<f64>,
    hard: Vec<u8>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g TannerGraph, config: DecoderConfig) -> Result<Self> {
        config.validate(graph)?;
        Ok(Self {
            graph,
            layout: WeightLayout::new(graph),
            llr: vec![0.0; graph.num_variables()],
            msgs: EdgeMessages::zeros(graph.num_edges()),
            marginals: vec![0.0; graph.num_variables()],
            hard: vec![0; graph.num_variables()],
            config,
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    /// Decodes and writes channel-position hard decisions into `hard_out`.
    /// Returns (iterations used, parity satisfied).
    pub fn decode_into(&mut self, channel_llrs: &[f64], hard_out: &mut [u8]) -> Result<(usize, bool)> {
        let g = self.graph;
        fill_llr(g, channel_llrs, &mut self.llr)?;
        let clip = self.config.clip;
        let rule = self.config.variant.check_rule();
        let t_max = self.config.iterations;
        for (m, edge) in self.msgs.v2c.iter_mut().zip(g.edges()) {
            *m = self.llr[edge.var].clamp(-clip, clip);
        }
        let mut used = t_max;
        let mut parity_ok = false;
        for t in 0..t_max {
            cn_update(g, rule, &self.msgs.v2c, &mut self.msgs.c2v, clip, None);
            if self.config.early_stop || t + 1 == t_max {
                output_marginals(
                    g,
                    self.config.variant.output_weights(),
                    &self.llr,
                    &self.msgs.c2v,
                    &mut self.marginals,
                );
                for (h, &m) in self.hard.iter_mut().zip(&self.marginals) {
                    *h = is_negative(m) as u8;
                }
                parity_ok = g.satisfies(&self.hard);
                if parity_ok && self.config.early_stop {
                    used = t + 1;
                    break;
                }
            }
            if t + 1 < t_max {
                let w = self.config.variant.layer_weights(t, &self.layout);
                vn_update(g, w, &self.llr, &self.msgs.c2v, &mut self.msgs.v2c, clip);
            }
        }
        for (pos, h) in hard_out.iter_mut().enumerate() {
            *h = self.hard[g.channel_var(pos)];
        }
        Ok((used, parity_ok))
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<DecodeOutput> {
        let mut hard_bits = vec![0; self.graph.code_length()];
        let (iterations_used, parity_ok) = self.decode_into(channel_llrs, &mut hard_bits)?;
        Ok(DecodeOutput {
            hard_bits,
            soft: self.marginals.clone(),
            iterations_used,
            parity_ok,
        })
    }
}

/// One-shot decode.
pub fn decode(graph: &TannerGraph, channel_llrs: &[f64], config: &DecoderConfig) -> Result<DecodeOutput> {
    Decoder::new(graph, config.clone())?.decode(channel_llrs)
}
