//! `mmwave`: simulate, process, listen, replay and bench.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mmwave_core::capture::{
    listen, read_capture_file, replay_capture, write_capture_file, ListenOptions, ReplayOptions,
};
use mmwave_core::pipeline::{
    bench, ensure_dir, run_pipeline, synthetic_frames, write_drops, write_frame, write_manifest,
    write_outputs, DropsFile, FrameDrops, Pipeline, PipelineConfig, RunManifest, RunOptions, SceneFile,
};

#[derive(Parser)]
#[command(name = "mmwave", version, about = "FMCW MIMO radar processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a capture file from a scene description.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a capture file into point clouds and range-Doppler maps.
    Process {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Receive UDP capture packets and process frames as they complete.
    Listen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long)]
        out: PathBuf,
        /// Stop after this many frames.
        #[arg(long)]
        frames: Option<u64>,
        /// Stop after this many seconds without a completed frame.
        #[arg(long)]
        idle_exit_s: Option<f64>,
        /// Address to bind.
        #[arg(long, default_value = "0.0.0.0")]
        bind: String,
    },
    /// Packetize a capture file and send it over UDP.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dest: SocketAddr,
        /// Per-packet drop probability.
        #[arg(long, default_value_t = 0.0)]
        loss: f64,
        /// Maximum packet displacement.
        #[arg(long, default_value_t = 0)]
        reorder: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Packets per second; 0 sends unpaced.
        #[arg(long, default_value_t = 200_000.0)]
        pps: f64,
    },
    /// Time every stage on synthetic frames.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 32)]
        frames: usize,
    },
}

fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = PipelineConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(config: &Path, scene: &Path, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let radar = cfg.validate()?;
    let scene = SceneFile::read(scene)?;
    let cubes = scene.synthesize(&radar)?;
    write_capture_file(out, &radar, &cubes).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} frames to {}", cubes.len(), out.display());
    Ok(())
}

fn process(config: &Path, input: &Path, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let (capture_cfg, cubes) =
        read_capture_file(input).with_context(|| format!("reading {}", input.display()))?;
    if *capture_cfg != cfg.radar {
        bail!("capture radar config does not match {}", config.display());
    }
    let outputs = run_pipeline(&cfg, &cubes, &RunOptions::default())?;
    write_outputs(out, &cfg, &outputs)?;
    let points: usize = outputs.iter().map(|o| o.cloud.len()).sum();
    println!("processed {} frames, {points} points -> {}", outputs.len(), out.display());
    Ok(())
}

fn listen_cmd(
    config: &Path,
    bind: &str,
    port: u16,
    out: &Path,
    max_frames: Option<u64>,
    idle_exit: Option<f64>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let pipeline = Pipeline::new(&cfg)?;
    let addr: SocketAddr = format!("{bind}:{port}")
        .parse()
        .with_context(|| format!("bad bind address {bind}:{port}"))?;
    let listener = listen(addr, *pipeline.radar(), ListenOptions::default())?;
    ensure_dir(out)?;
    write_manifest(out, &RunManifest::new(&cfg, 0))?;
    eprintln!("listening on {}", listener.local_addr());

    let mut drops = DropsFile::default();
    let mut last_frame = Instant::now();
    let mut count = 0u64;
    while max_frames.is_none_or(|m| count < m) {
        if let Some(limit) = idle_exit {
            if last_frame.elapsed().as_secs_f64() >= limit {
                break;
            }
        }
        let Some(frame) = listener.recv_timeout(Duration::from_millis(100)) else {
            continue;
        };
        last_frame = Instant::now();
        let output = pipeline.process(&frame.cube)?;
        write_frame(out, &output)?;
        drops.frames.push(FrameDrops {
            frame: frame.cube.frame_index(),
            report: frame.drops,
        });
        drops.totals = listener.totals();
        drops.queue_overflows = listener.queue_overflows();
        drops.malformed_datagrams = listener.malformed_datagrams();
        write_drops(out, &drops)?;
        count += 1;
    }
    drops.totals = listener.totals();
    drops.queue_overflows = listener.queue_overflows();
    drops.malformed_datagrams = listener.malformed_datagrams();
    write_drops(out, &drops)?;
    write_manifest(out, &RunManifest::new(&cfg, count as usize))?;
    for e in listener.errors() {
        eprintln!("warning: {e}");
    }
    listener.shutdown();
    println!("received {count} frames -> {}", out.display());
    Ok(())
}

fn replay(input: &Path, dest: SocketAddr, loss: f64, reorder: usize, seed: u64, pps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&loss) {
        bail!("--loss must be in [0, 1], got {loss}");
    }
    if !(pps.is_finite() && pps >= 0.0) {
        bail!("--pps must be >= 0, got {pps}");
    }
    let opts = ReplayOptions {
        loss,
        reorder,
        seed,
        packets_per_second: (pps > 0.0).then_some(pps),
        ..ReplayOptions::default()
    };
    let stats = replay_capture(input, dest, &opts).with_context(|| format!("replaying {}", input.display()))?;
    println!(
        "sent {} packets to {dest}, dropped {} ({} bytes)",
        stats.sent,
        stats.dropped_seqs.len(),
        stats.bytes_dropped
    );
    Ok(())
}

fn bench_cmd(config: &Path, frames: usize) -> Result<()> {
    if frames == 0 {
        bail!("--frames must be >= 1");
    }
    let cfg = load_config(config)?;
    let cubes = synthetic_frames(&cfg, frames)?;
    let report = bench(&cfg, &cubes, &RunOptions::default())?;
    print!("{report}");
    if let Some(dir) = &cfg.output_dir {
        ensure_dir(dir)?;
        let path = dir.join("bench.txt");
        fs::write(&path, report.to_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, scene, out } => simulate(&config, &scene, &out),
        Command::Process { config, input, out } => process(&config, &input, &out),
        Command::Listen {
            config,
            port,
            out,
            frames,
            idle_exit_s,
            bind,
        } => listen_cmd(&config, &bind, port, &out, frames, idle_exit_s),
        Command::Replay {
            input,
            dest,
            loss,
            reorder,
            seed,
            pps,
        } => replay(&input, dest, loss, reorder, seed, pps),
        Command::Bench { config, frames } => bench_cmd(&config, frames),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // One JSON object on one line.
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("{}", serde_json::json!({ "error": message }));
            ExitCode::FAILURE
        }
    }
}
