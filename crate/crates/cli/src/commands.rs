//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::ValueEnum;
use sparse_polar::complexity::{
    count_conventional_bp, count_snnd_with, reduction_report, MultiplicationCount, OpCount,
};
use sparse_polar::decoder::{DecoderConfig, Variant, WeightSet, DEFAULT_CLIP};
use sparse_polar::polar::{construct_frozen_set, CodeSpec};
use sparse_polar::sim::{plot_data, run_ber, CodewordSource, SimConfig, StopRule};
use sparse_polar::tanner::{
    build_full_factor_graph, prune, prune_with_stats, read_alist, write_alist, StageOrder,
    TannerGraph,
};
use sparse_polar::training::{train as train_weights, TrainConfig, WeightKind};

use crate::config::render;
use crate::{
    AnalyzeArgs, CodeArgs, ConstructArgs, DecoderArg, MultsArg, SimulateArgs, SourceArg,
    StageOrderArg, TrainArgs, WeightKindArg,
};

/// Reduction band printed next to the measured operation savings.
const REDUCTION_BAND_PCT: (f64, f64) = (45.0, 75.0);

/// Failure class, mapped to the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files.
    Config(anyhow::Error),
    /// The run itself failed.
    Runtime(anyhow::Error),
}

type Outcome<T> = Result<T, Failure>;

trait Classify<T> {
    fn config(self) -> Outcome<T>;
    fn runtime(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Outcome<T> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime(self) -> Outcome<T> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn name<E: ValueEnum>(v: &E) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_owned()
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

fn stage_order(a: StageOrderArg) -> StageOrder {
    match a {
        StageOrderArg::Farthest => StageOrder::FarthestFirst,
        StageOrderArg::Nearest => StageOrder::NearestFirst,
    }
}

fn source(a: SourceArg) -> CodewordSource {
    match a {
        SourceArg::AllZero => CodewordSource::AllZero,
        SourceArg::Random => CodewordSource::RandomSystematic,
    }
}

fn write(dir: &Path, file: &str, text: &str) -> Outcome<PathBuf> {
    let p = dir.join(file);
    fs::write(&p, text)
        .with_context(|| format!("writing {}", p.display()))
        .runtime()?;
    Ok(p)
}

fn make_dir(dir: &Path) -> Outcome<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .config()
}

fn read(p: &Path) -> Outcome<String> {
    fs::read_to_string(p)
        .with_context(|| format!("reading {}", p.display()))
        .config()
}

fn code_entries(c: &CodeArgs) -> Vec<(&'static str, String)> {
    let mut e = vec![("frozen", path(&c.frozen))];
    if let Some(g) = &c.graph {
        e.push(("graph", path(g)));
    }
    e.push(("stage-order", name(&c.stage_order)));
    e
}

/// Loads the code and its graph, checking that they agree.
fn load_code(c: &CodeArgs) -> Outcome<(CodeSpec, TannerGraph)> {
    let spec = CodeSpec::parse_frozen_file(&read(&c.frozen)?)
        .with_context(|| format!("in {}", c.frozen.display()))
        .config()?;
    let graph = match &c.graph {
        Some(p) => read_alist(&read(p)?)
            .with_context(|| format!("in {}", p.display()))
            .config()?,
        None => prune(&build_full_factor_graph(&spec, stage_order(c.stage_order))).runtime()?,
    };
    if graph.code_length() != spec.length() {
        return Err(Failure::Config(anyhow!(
            "graph has {} channel positions, code length is {}",
            graph.code_length(),
            spec.length()
        )));
    }
    Ok((spec, graph))
}

fn histogram(h: &[(usize, usize)]) -> String {
    h.iter()
        .map(|(d, n)| format!("{d}:{n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn construct(a: &ConstructArgs) -> Outcome<()> {
    let spec = match &a.frozen_file {
        Some(p) => {
            let spec = CodeSpec::parse_frozen_file(&read(p)?)
                .with_context(|| format!("in {}", p.display()))
                .config()?;
            if a.n.is_some_and(|n| n != spec.length()) || a.k.is_some_and(|k| k != spec.dimension()) {
                return Err(Failure::Config(anyhow!(
                    "--n/--k disagree with {} ({}, {})",
                    p.display(),
                    spec.length(),
                    spec.dimension()
                )));
            }
            spec
        }
        None => {
            let (Some(n), Some(k)) = (a.n, a.k) else {
                return Err(Failure::Config(anyhow!("--n and --k are required without --frozen-file")));
            };
            construct_frozen_set(n, k, a.design).config()?
        }
    };
    make_dir(&a.out)?;
    let full = build_full_factor_graph(&spec, stage_order(a.stage_order));
    let (graph, stats) = prune_with_stats(&full).runtime()?;

    let mut s = String::new();
    let _ = writeln!(s, "code            N={} K={} rate={}", spec.length(), spec.dimension(), spec.rate());
    let info: Vec<String> = spec.info_set_one_based().iter().map(usize::to_string).collect();
    let _ = writeln!(s, "info set        {}", info.join(" "));
    let _ = writeln!(s, "stage order     {}", name(&a.stage_order));
    let _ = writeln!(
        s,
        "factor graph    variables={} checks={} edges={}",
        full.num_variables(),
        full.num_checks(),
        full.num_edges()
    );
    let _ = writeln!(
        s,
        "pruned graph    variables={} hidden={} checks={} edges={}",
        graph.num_variables(),
        graph.num_hidden(),
        graph.num_checks(),
        graph.num_edges()
    );
    let _ = writeln!(s, "check degrees   {}", histogram(&graph.check_degree_histogram()));
    let _ = writeln!(s, "var degrees     {}", histogram(&graph.var_degree_histogram()));
    let _ = writeln!(
        s,
        "rule firings    known-zero-removed={} degree-1-checks={} merges={} dropped-hidden={} dangling-checks={} joined-checks={}",
        stats.zero_removed,
        stats.degree1_checks,
        stats.merges,
        stats.dropped_hidden,
        stats.dangling_checks,
        stats.joined_checks
    );
    print!("{s}");

    write(&a.out, "frozen.txt", &spec.to_frozen_file())?;
    write(&a.out, "graph.alist", &write_alist(&graph))?;
    write(&a.out, "summary.txt", &s)?;
    let mut conf = Vec::new();
    match &a.frozen_file {
        Some(p) => conf.push(("frozen-file", path(p))),
        None => {
            conf.push(("n", spec.length().to_string()));
            conf.push(("k", spec.dimension().to_string()));
            conf.push(("design", a.design.to_string()));
        }
    }
    conf.push(("stage-order", name(&a.stage_order)));
    conf.push(("out", path(&a.out)));
    write(&a.out, "construct.conf", &render(&conf))?;
    Ok(())
}

pub fn train(a: &TrainArgs) -> Outcome<()> {
    let (spec, graph) = load_code(&a.code)?;
    let cfg = TrainConfig {
        iterations: a.iterations,
        kind: match a.variant {
            WeightKindArg::Single => WeightKind::Single,
            WeightKindArg::PerEdge => WeightKind::PerEdge,
        },
        learning_rate: a.lr,
        samples_per_snr: a.samples_per_snr,
        snr_grid_db: a.snr_grid.0.clone(),
        epochs: a.epochs,
        single_init: a.init,
        per_edge_init: (a.init_mean, a.init_std),
        seed: a.seed,
        source: source(a.source),
        ..TrainConfig::default()
    };
    cfg.validate().config()?;
    make_dir(&a.out)?;
    let report = train_weights(&spec, &graph, &cfg).runtime()?;

    write(&a.out, "weights.txt", &report.final_weights.to_text(&graph, a.iterations))?;
    write(&a.out, "train.csv", &report.to_csv())?;
    let mut conf = code_entries(&a.code);
    conf.extend([
        ("variant", name(&a.variant)),
        ("iterations", a.iterations.to_string()),
        ("lr", a.lr.to_string()),
        ("epochs", a.epochs.to_string()),
        ("samples-per-snr", a.samples_per_snr.to_string()),
        ("snr-grid", a.snr_grid.to_string()),
        ("init", a.init.to_string()),
        ("init-mean", a.init_mean.to_string()),
        ("init-std", a.init_std.to_string()),
        ("seed", a.seed.to_string()),
        ("source", name(&a.source)),
        ("out", path(&a.out)),
    ]);
    write(&a.out, "train.conf", &render(&conf))?;

    if let Some(loss) = report.losses.last() {
        println!("epochs {}  final loss {loss:.6}", report.losses.len());
    }
    if let WeightSet::Single(w) = report.final_weights {
        println!("trained weight w* = {w:.6}");
    }
    Ok(())
}

fn load_weights(spec: &str, graph: &TannerGraph, iterations: usize) -> Outcome<WeightSet> {
    if let Some(v) = spec.strip_prefix("single:") {
        let w: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(anyhow!("bad weight {v:?}")))?;
        return Ok(WeightSet::Single(w));
    }
    let p = Path::new(spec);
    let (w, _) = WeightSet::parse(&read(p)?)
        .with_context(|| format!("in {}", p.display()))
        .config()?;
    w.validate(graph, iterations)
        .with_context(|| format!("weights in {}", p.display()))
        .config()?;
    Ok(w)
}

pub fn simulate(a: &SimulateArgs) -> Outcome<()> {
    let (spec, graph) = load_code(&a.code)?;
    if a.weights.is_some() && a.decoder != DecoderArg::Wms {
        return Err(Failure::Config(anyhow!("--weights only applies to --decoder wms")));
    }
    let variant = match a.decoder {
        DecoderArg::Spa => Variant::SumProduct,
        DecoderArg::Ms => Variant::MinSum,
        DecoderArg::Sms => Variant::ScaledMinSum(a.alpha),
        DecoderArg::Wms => {
            let w = a
                .weights
                .as_deref()
                .ok_or_else(|| Failure::Config(anyhow!("--decoder wms needs --weights")))?;
            Variant::WeightedMinSum(load_weights(w, &graph, a.iterations)?)
        }
    };
    let decoder = DecoderConfig {
        variant,
        iterations: a.iterations,
        early_stop: a.early_stop,
        clip: DEFAULT_CLIP,
    };
    decoder.validate(&graph).config()?;
    let cfg = SimConfig {
        decoder,
        points_db: a.ebn0.0.clone(),
        stop: StopRule {
            min_bit_errors: a.min_errors,
            max_frames: a.max_frames,
        },
        seed: a.seed,
        source: source(a.source),
    };
    make_dir(&a.out)?;
    let stem = a.name.clone().unwrap_or_else(|| name(&a.decoder));
    let result = run_ber(&spec, &graph, &cfg).runtime()?;

    write(&a.out, &format!("ber_{stem}.csv"), &result.to_csv())?;
    write(&a.out, &format!("ber_{stem}.dat"), &plot_data(std::slice::from_ref(&result)))?;
    let mut conf = code_entries(&a.code);
    conf.push(("decoder", name(&a.decoder)));
    if a.decoder == DecoderArg::Sms {
        conf.push(("alpha", a.alpha.to_string()));
    }
    if let Some(w) = &a.weights {
        conf.push(("weights", w.clone()));
    }
    conf.extend([
        ("iterations", a.iterations.to_string()),
        ("ebn0", a.ebn0.to_string()),
        ("min-errors", a.min_errors.to_string()),
        ("max-frames", a.max_frames.to_string()),
        ("seed", a.seed.to_string()),
        ("source", name(&a.source)),
        ("early-stop", a.early_stop.to_string()),
        ("name", stem.clone()),
        ("out", path(&a.out)),
    ]);
    write(&a.out, &format!("{stem}.conf"), &render(&conf))?;

    println!("ebn0_db  frames  bit_errors  ber");
    for p in &result.points {
        println!("{:7}  {:6}  {:10}  {:.3e}", p.ebn0_db, p.frames, p.bit_errors, p.ber());
    }
    Ok(())
}

pub fn analyze(a: &AnalyzeArgs) -> Outcome<()> {
    let (spec, graph) = load_code(&a.code)?;
    let mults = match a.mults {
        MultsArg::PerCheck => MultiplicationCount::PerCheck,
        MultsArg::PerEdge => MultiplicationCount::PerEdge,
    };
    let ours = count_snnd_with(&graph, mults);
    let conventional = count_conventional_bp(spec.length()).config()?;
    let r = reduction_report(&ours, &conventional).runtime()?;

    let mut s = String::new();
    let _ = writeln!(s, "N={} K={} edges={} checks={}", spec.length(), spec.dimension(), graph.num_edges(), graph.num_checks());
    let _ = writeln!(s, "{:<16} {:>10} {:>14}", "per iteration", "sparse", "conventional");
    type Column = (&'static str, fn(&OpCount) -> u64);
    let rows: [Column; 5] = [
        ("additions", |c| c.additions),
        ("multiplications", |c| c.multiplications),
        ("comparisons", |c| c.comparisons),
        ("total", OpCount::total),
        ("latency steps", |c| c.latency_steps),
    ];
    for (label, f) in rows {
        let _ = writeln!(s, "{label:<16} {:>10} {:>14}", f(&ours), f(&conventional));
    }
    let (lo, hi) = REDUCTION_BAND_PCT;
    let inside = (lo..=hi).contains(&r.operations_pct);
    let _ = writeln!(
        s,
        "operation reduction {:.1}% (band [{lo}%, {hi}%]: {})",
        r.operations_pct,
        if inside { "inside" } else { "outside" }
    );
    let _ = writeln!(
        s,
        "latency ratio {:.4} (1/log2 N = {:.4})",
        r.latency_ratio,
        1.0 / f64::from(spec.length().trailing_zeros())
    );
    print!("{s}");

    if let Some(out) = &a.out {
        make_dir(out)?;
        let mut csv = format!(
            "# sparse-polar {} seed=none\ndecoder,additions,multiplications,comparisons,total,latency_steps\n",
            env!("CARGO_PKG_VERSION")
        );
        for (label, c) in [("sparse", &ours), ("conventional-bp", &conventional)] {
            let _ = writeln!(
                csv,
                "{label},{},{},{},{},{}",
                c.additions,
                c.multiplications,
                c.comparisons,
                c.total(),
                c.latency_steps
            );
        }
        write(out, "complexity.csv", &csv)?;
        let mut conf = code_entries(&a.code);
        conf.push(("mults", name(&a.mults)));
        conf.push(("out", path(out)));
        write(out, "analyze.conf", &render(&conf))?;
    }
    Ok(())
}
