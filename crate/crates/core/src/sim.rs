//! Monte Carlo bit-error-rate simulation.
//!
//! Frames are simulated in fixed-size chunks. Frame `i` at point `p` draws
//! from its own random stream, and the stop rule is checked only between
//! chunks, so results do not depend on the number of threads.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::decoder::{Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::polar::{systematic_encode, CodeSpec};
use crate::rng::{stream, Domain};
use crate::tanner::TannerGraph;

/// Frames per chunk between stop-rule checks.
pub const CHUNK_FRAMES: u64 = 256;

/// Which codewords are transmitted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CodewordSource {
    #[default]
    AllZero,
    /// Uniformly random information bits, systematically encoded.
    RandomSystematic,
}

/// Per-point stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub min_bit_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_bit_errors: 500,
            max_frames: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub decoder: DecoderConfig,
    pub points_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    pub source: CodewordSource,
}

/// Counts at one Eb/N0 point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub code_length: usize,
}

impl SimPoint {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / (self.frames as f64 * self.code_length as f64)
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames as f64
    }
}

/// One BER curve.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub decoder: String,
    pub code_length: usize,
    pub dimension: usize,
    pub iterations: usize,
    pub seed: u64,
    pub points: Vec<SimPoint>,
}

pub const CSV_HEADER: &str = "ebn0_db,frames,bit_errors,frame_errors,ber,fer,decoder,N,K,iters";

impl SimResult {
    /// CSV with a leading comment line naming the tool version and seed.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# sparse-polar {} seed={}\n{CSV_HEADER}\n",
            env!("CARGO_PKG_VERSION"),
            self.seed
        );
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e},{},{},{},{}",
                p.ebn0_db,
                p.frames,
                p.bit_errors,
                p.frame_errors,
                p.ber(),
                p.fer(),
                self.decoder,
                self.code_length,
                self.dimension,
                self.iterations
            );
        }
        out
    }
}

/// Whitespace-separated `(ebn0, ber)` pairs, one block per curve, blocks
/// separated by two blank lines (gnuplot `index` layout).
pub fn plot_data(curves: &[SimResult]) -> String {
    let mut out = String::new();
    for (i, c) in curves.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# {} N={} K={} T={}", c.decoder, c.code_length, c.dimension, c.iterations);
        for p in &c.points {
            let _ = writeln!(out, "{} {:e}", p.ebn0_db, p.ber());
        }
    }
    out
}

/// Runs the simulation for every point in `config`.
pub fn run_ber(spec: &CodeSpec, graph: &TannerGraph, config: &SimConfig) -> Result<SimResult> {
    if graph.code_length() != spec.length() {
        return Err(Error::LengthMismatch {
            expected: spec.length(),
            actual: graph.code_length(),
        });
    }
    if config.stop.max_frames == 0 {
        return Err(Error::InvalidParameter("max_frames must be positive".into()));
    }
    if config.points_db.is_empty() {
        return Err(Error::InvalidParameter("no Eb/N0 points".into()));
    }
    config.decoder.validate(graph)?;
    let mut points = Vec::with_capacity(config.points_db.len());
    for (p, &ebn0) in config.points_db.iter().enumerate() {
        points.push(run_point(spec, graph, config, p as u64, ebn0)?);
    }
    Ok(SimResult {
        decoder: config.decoder.variant.name().to_owned(),
        code_length: spec.length(),
        dimension: spec.dimension(),
        iterations: config.decoder.iterations,
        seed: config.seed,
        points,
    })
}

fn run_point(
    spec: &CodeSpec,
    graph: &TannerGraph,
    config: &SimConfig,
    point: u64,
    ebn0_db: f64,
) -> Result<SimPoint> {
    let channel = ChannelParams::new(ebn0_db, spec.rate())?;
    let mut acc = SimPoint {
        ebn0_db,
        frames: 0,
        bit_errors: 0,
        frame_errors: 0,
        code_length: spec.length(),
    };
    while acc.frames < config.stop.max_frames && acc.bit_errors < config.stop.min_bit_errors {
        let end = (acc.frames + CHUNK_FRAMES).min(config.stop.max_frames);
        let (bits, frames_in_error) = (acc.frames..end)
            .into_par_iter()
            .map_init(
                || Decoder::new(graph, config.decoder.clone()),
                |dec, frame| {
                    let dec = dec.as_mut().map_err(|e| Error::Internal(e.to_string()))?;
                    simulate_frame(spec, dec, &channel, config, point, frame)
                },
            )
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        acc.bit_errors += bits;
        acc.frame_errors += frames_in_error;
        acc.frames = end;
    }
    Ok(acc)
}

fn simulate_frame(
    spec: &CodeSpec,
    dec: &mut Decoder<'_>,
    channel: &ChannelParams,
    config: &SimConfig,
    point: u64,
    frame: u64,
) -> Result<(u64, u64)> {
    let mut rng = stream(config.seed, Domain::Ber, point, frame);
    let x = match config.source {
        CodewordSource::AllZero => vec![0; spec.length()],
        CodewordSource::RandomSystematic => {
            let info: Vec<u8> = (0..spec.dimension()).map(|_| rng.gen_range(0..=1)).collect();
            systematic_encode(spec, &info)?
        }
    };
    let llr = channel.transmit(&x, &mut rng);
    let mut hard = vec![0; x.len()];
    dec.decode_into(&llr, &mut hard)?;
    let errors = hard.iter().zip(&x).filter(|(a, b)| a != b).count() as u64;
    Ok((errors, (errors > 0) as u64))
}
