//! Training of min-sum variable-node weights.
//!
//! The decoder is unrolled into a feed-forward network: `T` check-node
//! layers, `T - 1` weighted variable-node layers and a weighted output
//! layer producing `o_v = σ(-M_v)`, the probability that bit `v` is 1. The
//! loss is the mean binary cross-entropy over the channel positions, and
//! its gradient is taken by hand: the min-sum check rule passes gradient
//! only through the recorded minimiser, sign factors are constants, and
//! saturated messages pass none.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::decoder::{
    cn_update, fill_llr, output_marginals, vn_update, CheckRule, PerEdgeWeights, Variant,
    WeightLayout, WeightSet, DEFAULT_CLIP, NO_EDGE,
};
use crate::error::{Error, Result};
use crate::polar::{systematic_encode, CodeSpec};
use crate::rng::{stream, Domain};
use crate::sim::CodewordSource;
use crate::tanner::TannerGraph;

/// Probability clamp inside the loss.
pub const PROB_EPS: f64 = 1e-12;

/// The decoder as a differentiable network with fixed weights.
pub struct UnrolledNetwork<'g> {
    graph: &'g TannerGraph,
    iterations: usize,
    weights: WeightSet,
    layout: WeightLayout,
    clip: f64,
}

/// Forward intermediates needed by [`UnrolledNetwork::backward`].
#[derive(Clone, Debug)]
pub struct Tape {
    llr: Vec<f64>,
    /// Variable-to-check messages entering each check layer.
    v2c: Vec<Vec<f64>>,
    /// Check-to-variable messages leaving each check layer.
    c2v: Vec<Vec<f64>>,
    /// Selected extrinsic edge per edge and check layer.
    argmin: Vec<Vec<u32>>,
    /// Output aggregate before the sigmoid.
    pub marginals: Vec<f64>,
    /// `σ(-M_v)` for every variable.
    pub outputs: Vec<f64>,
}

impl Tape {
    /// True when both tapes took the same min-sum branches: equal selected
    /// minimisers, equal message signs and equal clip saturation.
    pub fn same_branch(&self, other: &Tape, clip: f64) -> bool {
        let signs = |t: &Tape| -> Vec<bool> { t.v2c.iter().flatten().map(|x| *x < 0.0).collect() };
        let sat = |t: &Tape| -> Vec<bool> { t.v2c.iter().flatten().map(|x| x.abs() >= clip).collect() };
        self.argmin == other.argmin && signs(self) == signs(other) && sat(self) == sat(other)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl<'g> UnrolledNetwork<'g> {
    pub fn new(graph: &'g TannerGraph, iterations: usize, weights: WeightSet) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        weights.validate(graph, iterations)?;
        Ok(Self {
            graph,
            iterations,
            weights,
            layout: WeightLayout::new(graph),
            clip: DEFAULT_CLIP,
        })
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn variant(&self) -> Variant {
        Variant::WeightedMinSum(self.weights.clone())
    }

    /// Runs the network on channel LLRs and records the tape.
    pub fn forward(&self, channel_llrs: &[f64]) -> Result<Tape> {
        let g = self.graph;
        let t_max = self.iterations;
        let mut llr = vec![0.0; g.num_variables()];
        fill_llr(g, channel_llrs, &mut llr)?;
        let variant = self.variant();
        let mut v2c0 = vec![0.0; g.num_edges()];
        for (m, e) in v2c0.iter_mut().zip(g.edges()) {
            *m = llr[e.var].clamp(-self.clip, self.clip);
        }
        let mut v2c = vec![v2c0];
        let mut c2v = Vec::with_capacity(t_max);
        let mut argmin = Vec::with_capacity(t_max);
        for t in 0..t_max {
            let mut out = vec![0.0; g.num_edges()];
            let mut am = vec![NO_EDGE; g.num_edges()];
            let rule = CheckRule::MinSum { scale: 1.0 };
            cn_update(g, rule, &v2c[t], &mut out, self.clip, Some(&mut am));
            if t + 1 < t_max {
                let mut next = vec![0.0; g.num_edges()];
                let w = variant.layer_weights(t, &self.layout);
                vn_update(g, w, &llr, &out, &mut next, self.clip);
                v2c.push(next);
            }
            c2v.push(out);
            argmin.push(am);
        }
        let mut marginals = vec![0.0; g.num_variables()];
        output_marginals(g, variant.output_weights(), &llr, &c2v[t_max - 1], &mut marginals);
        let outputs = marginals.iter().map(|&m| sigmoid(-m)).collect();
        Ok(Tape {
            llr,
            v2c,
            c2v,
            argmin,
            marginals,
            outputs,
        })
    }

    /// Outputs on the channel positions, in position order.
    pub fn channel_outputs(&self, tape: &Tape) -> Vec<f64> {
        (0..self.graph.code_length())
            .map(|j| tape.outputs[self.graph.channel_var(j)])
            .collect()
    }

    pub fn loss(&self, tape: &Tape, codeword: &[u8]) -> f64 {
        cross_entropy(&self.channel_outputs(tape), codeword)
    }

    /// Gradient of [`loss`](Self::loss) with respect to the weights, in
    /// the shape of the network's [`WeightSet`].
    pub fn backward(&self, tape: &Tape, codeword: &[u8]) -> Result<WeightSet> {
        let g = self.graph;
        let n = g.code_length();
        let t_max = self.iterations;
        if codeword.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: codeword.len(),
            });
        }
        if tape.c2v.len() != t_max || tape.llr.len() != g.num_variables() {
            return Err(Error::InvalidParameter("tape does not match the network".into()));
        }
        let mut g_m = vec![0.0; g.num_variables()];
        for (j, &x) in codeword.iter().enumerate() {
            let v = g.channel_var(j);
            let o = tape.outputs[v];
            if (PROB_EPS..=1.0 - PROB_EPS).contains(&o) {
                g_m[v] = (f64::from(x) - o) / n as f64;
            }
        }

        let mut g_single = 0.0;
        let mut g_layers: Vec<Vec<f64>> = match &self.weights {
            WeightSet::PerEdge(_) => vec![vec![0.0; self.layout.layer_len()]; t_max - 1],
            WeightSet::Single(_) => Vec::new(),
        };
        let mut g_output = vec![0.0; g.num_edges()];

        let last = &tape.c2v[t_max - 1];
        let mut g_c2v = vec![0.0; g.num_edges()];
        for (e, edge) in g.edges().iter().enumerate() {
            let gm = g_m[edge.var];
            let w = match &self.weights {
                WeightSet::Single(w) => *w,
                WeightSet::PerEdge(p) => p.output[e],
            };
            g_output[e] = gm * last[e];
            g_c2v[e] = gm * w;
        }

        let mut g_v2c = vec![0.0; g.num_edges()];
        for t in (0..t_max).rev() {
            g_v2c.iter_mut().for_each(|x| *x = 0.0);
            cn_backward(g, &tape.v2c[t], &tape.argmin[t], &g_c2v, &mut g_v2c);
            if t == 0 {
                break;
            }
            // Layer t-1 produced v2c[t] from c2v[t-1].
            let c2v_prev = &tape.c2v[t - 1];
            let v2c_t = &tape.v2c[t];
            g_c2v.iter_mut().for_each(|x| *x = 0.0);
            for v in 0..g.num_variables() {
                let edges = g.var_edges(v);
                for &e in edges {
                    let up = g_v2c[e];
                    if up == 0.0 || v2c_t[e].abs() >= self.clip {
                        continue;
                    }
                    let mut k = self.layout.start(e);
                    for &e2 in edges {
                        if e2 == e {
                            continue;
                        }
                        let w = match &self.weights {
                            WeightSet::Single(w) => {
                                g_single += up * c2v_prev[e2];
                                *w
                            }
                            WeightSet::PerEdge(p) => {
                                g_layers[t - 1][k] += up * c2v_prev[e2];
                                p.layers[t - 1][k]
                            }
                        };
                        g_c2v[e2] += up * w;
                        k += 1;
                    }
                }
            }
        }

        Ok(match &self.weights {
            WeightSet::Single(_) => WeightSet::Single(g_single + g_output.iter().sum::<f64>()),
            WeightSet::PerEdge(_) => WeightSet::PerEdge(PerEdgeWeights {
                layers: g_layers,
                output: g_output,
            }),
        })
    }
}

/// Routes check-output gradients to the selected extrinsic inputs.
fn cn_backward(graph: &TannerGraph, v2c: &[f64], argmin: &[u32], g_c2v: &[f64], g_v2c: &mut [f64]) {
    for c in 0..graph.num_checks() {
        let range = graph.check_edges(c);
        let negative = range.clone().fold(false, |s, e| s ^ (v2c[e] < 0.0));
        for e in range {
            let src = argmin[e];
            if src == NO_EDGE || g_c2v[e] == 0.0 {
                continue;
            }
            let src = src as usize;
            // c2v(e) = s_e · |v2c(src)|, s_e the extrinsic sign product.
            let s_e = negative ^ (v2c[e] < 0.0);
            let d = if s_e ^ (v2c[src] < 0.0) { -1.0 } else { 1.0 };
            g_v2c[src] += g_c2v[e] * d;
        }
    }
}

/// Mean binary cross-entropy of probabilities `o` against bits `x`, with
/// `o` clamped to `[ε, 1 - ε]`.
pub fn cross_entropy(o: &[f64], x: &[u8]) -> f64 {
    assert_eq!(o.len(), x.len(), "output and codeword lengths differ");
    let sum: f64 = o
        .iter()
        .zip(x)
        .map(|(&p, &b)| {
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            if b == 0 {
                -(1.0 - p).ln()
            } else {
                -p.ln()
            }
        })
        .sum();
    sum / o.len() as f64
}

/// Which weights are trained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightKind {
    #[default]
    Single,
    PerEdge,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u32,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grad: &[f64], state: &mut AdamState, lr: f64, cfg: &AdamConfig) {
    assert_eq!(params.len(), grad.len(), "parameter and gradient lengths differ");
    assert_eq!(params.len(), state.m.len(), "parameter and state lengths differ");
    state.step += 1;
    let b1t = 1.0 - cfg.beta1.powi(state.step as i32);
    let b2t = 1.0 - cfg.beta2.powi(state.step as i32);
    for i in 0..params.len() {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        let m_hat = state.m[i] / b1t;
        let v_hat = state.v[i] / b2t;
        params[i] -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub kind: WeightKind,
    pub learning_rate: f64,
    pub samples_per_snr: usize,
    pub snr_grid_db: Vec<f64>,
    pub epochs: usize,
    /// Starting value of the shared weight.
    pub single_init: f64,
    /// Mean and standard deviation of per-edge initial weights.
    pub per_edge_init: (f64, f64),
    pub adam: AdamConfig,
    pub seed: u64,
    pub source: CodewordSource,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            kind: WeightKind::Single,
            learning_rate: 0.001,
            samples_per_snr: 30,
            snr_grid_db: vec![1.0, 2.0, 3.0, 4.0],
            epochs: 600,
            single_init: 1.0,
            per_edge_init: (1.0, 0.1),
            adam: AdamConfig::default(),
            seed: 0,
            source: CodewordSource::AllZero,
        }
    }
}

impl TrainConfig {
    pub fn batch_size(&self) -> usize {
        self.samples_per_snr * self.snr_grid_db.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        if self.batch_size() == 0 {
            return Err(Error::InvalidParameter("empty training batch".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate {}", self.learning_rate)));
        }
        if !(self.per_edge_init.1 >= 0.0 && self.single_init.is_finite()) {
            return Err(Error::InvalidParameter("initial weight distribution".into()));
        }
        Ok(())
    }
}

/// Channel LLRs and the codewords they were generated from.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub llrs: Vec<Vec<f64>>,
    pub codewords: Vec<Vec<u8>>,
    pub snr_db: Vec<f64>,
}

/// `samples_per_snr` noisy codewords at every grid point, grid-major.
pub fn make_batch<R: Rng + ?Sized>(spec: &CodeSpec, config: &TrainConfig, rng: &mut R) -> Result<Batch> {
    let mut batch = Batch {
        llrs: Vec::with_capacity(config.batch_size()),
        codewords: Vec::with_capacity(config.batch_size()),
        snr_db: Vec::with_capacity(config.batch_size()),
    };
    for &snr in &config.snr_grid_db {
        let ch = ChannelParams::new(snr, spec.rate())?;
        for _ in 0..config.samples_per_snr {
            let x = match config.source {
                CodewordSource::AllZero => vec![0; spec.length()],
                CodewordSource::RandomSystematic => {
                    let info: Vec<u8> = (0..spec.dimension()).map(|_| rng.gen_range(0..=1)).collect();
                    systematic_encode(spec, &info)?
                }
            };
            batch.llrs.push(ch.transmit(&x, rng));
            batch.codewords.push(x);
            batch.snr_db.push(snr);
        }
    }
    Ok(batch)
}

/// Mean loss and mean gradient (flattened) over a batch.
///
/// Samples are processed in parallel; the sum runs in sample order.
pub fn batch_gradient(net: &UnrolledNetwork<'_>, batch: &Batch) -> Result<(f64, Vec<f64>)> {
    let per_sample: Vec<(f64, Vec<f64>)> = batch
        .llrs
        .par_iter()
        .zip(&batch.codewords)
        .map(|(llr, x)| {
            let tape = net.forward(llr)?;
            let loss = net.loss(&tape, x);
            Ok((loss, flatten(&net.backward(&tape, x)?)))
        })
        .collect::<Result<_>>()?;
    let count = per_sample.len() as f64;
    let mut grad = vec![0.0; per_sample.first().map_or(0, |s| s.1.len())];
    let mut loss = 0.0;
    for (l, g) in &per_sample {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    grad.iter_mut().for_each(|g| *g /= count);
    Ok((loss / count, grad))
}

/// Mean loss over a batch without gradients.
pub fn batch_loss(graph: &TannerGraph, iterations: usize, weights: &WeightSet, batch: &Batch) -> Result<f64> {
    let net = UnrolledNetwork::new(graph, iterations, weights.clone())?;
    let losses: Vec<f64> = batch
        .llrs
        .par_iter()
        .zip(&batch.codewords)
        .map(|(llr, x)| Ok(net.loss(&net.forward(llr)?, x)))
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

pub fn flatten(w: &WeightSet) -> Vec<f64> {
    match w {
        WeightSet::Single(v) => vec![*v],
        WeightSet::PerEdge(p) => p.flatten(),
    }
}

/// Rebuilds a weight set shaped like `like` from flattened values.
pub fn unflatten_like(like: &WeightSet, flat: &[f64]) -> WeightSet {
    match like {
        WeightSet::Single(_) => WeightSet::Single(flat[0]),
        WeightSet::PerEdge(p) => WeightSet::PerEdge(p.unflatten_like(flat)),
    }
}

/// Initial weights per `config`.
pub fn initial_weights(graph: &TannerGraph, config: &TrainConfig) -> Result<WeightSet> {
    match config.kind {
        WeightKind::Single => Ok(WeightSet::Single(config.single_init)),
        WeightKind::PerEdge => {
            let layout = WeightLayout::new(graph);
            let mut p = PerEdgeWeights::constant(&layout, config.iterations, 0.0);
            let (mean, sd) = config.per_edge_init;
            let dist = Normal::new(mean, sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut rng = stream(config.seed, Domain::TrainInit, 0, 0);
            for w in p.layers.iter_mut().flatten().chain(p.output.iter_mut()) {
                *w = dist.sample(&mut rng);
            }
            Ok(WeightSet::PerEdge(p))
        }
    }
}

/// Training history.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    /// Mean batch loss per epoch, measured before that epoch's update.
    pub losses: Vec<f64>,
    /// Shared weight after each epoch's update (single-weight training).
    pub w_trajectory: Vec<f64>,
    pub initial_weights: WeightSet,
    pub final_weights: WeightSet,
    pub seed: u64,
}

impl TrainReport {
    /// CSV `epoch,loss,w_prime` preceded by a version/seed comment line.
    /// `w_prime` is empty for per-edge training.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# sparse-polar {} seed={}\nepoch,loss,w_prime\n",
            env!("CARGO_PKG_VERSION"),
            self.seed
        );
        for (i, loss) in self.losses.iter().enumerate() {
            let w = self.w_trajectory.get(i).map(|w| format!("{w:?}")).unwrap_or_default();
            let _ = writeln!(out, "{},{loss:?},{w}", i + 1);
        }
        out
    }
}

/// Trains weights on `graph` with one Adam step per freshly drawn batch.
pub fn train(spec: &CodeSpec, graph: &TannerGraph, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    if graph.code_length() != spec.length() {
        return Err(Error::LengthMismatch {
            expected: spec.length(),
            actual: graph.code_length(),
        });
    }
    let initial = initial_weights(graph, config)?;
    let mut weights = initial.clone();
    let mut params = flatten(&weights);
    let mut adam = AdamState::new(params.len());
    let mut report = TrainReport {
        losses: Vec::with_capacity(config.epochs),
        w_trajectory: Vec::new(),
        initial_weights: initial,
        final_weights: weights.clone(),
        seed: config.seed,
    };
    for epoch in 0..config.epochs {
        let mut rng = stream(config.seed, Domain::TrainBatch, 0, epoch as u64);
        let batch = make_batch(spec, config, &mut rng)?;
        let net = UnrolledNetwork::new(graph, config.iterations, weights.clone())?;
        let (loss, grad) = batch_gradient(&net, &batch)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch: epoch + 1, loss });
        }
        adam_step(&mut params, &grad, &mut adam, config.learning_rate, &config.adam);
        weights = unflatten_like(&weights, &params);
        report.losses.push(loss);
        if let WeightSet::Single(w) = weights {
            report.w_trajectory.push(w);
        }
    }
    report.final_weights = weights;
    Ok(report)
}

#[cfg(test)]
mod tests;
