use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use agarcl_core::policy::PolicyKind;
use agarcl_core::scenario::{scenario_library, validate_catalog};
use agarcl_core::{EnvOptions, ObsMode};
use agarcl_harness::commands::{cmd_benchmark, cmd_replay, cmd_run, BenchmarkConfig, RunConfig, DEFAULT_HASH_EVERY};
use agarcl_harness::golden::{default_fixture_dir, write_golden_set};
use agarcl_harness::protocol::ServeMode;
use agarcl_harness::server::{self, ServeConfig};
use agarcl_harness::HarnessError;
use clap::{Args, Parser, Subcommand};

/// Headless runner, benchmark and session server for the agarcl environment.
#[derive(Parser)]
#[command(name = "agarcl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a fixed policy and record the trajectory.
    Run(RunArgs),
    /// Random-agent throughput at frame skip 1 and 4.
    Benchmark(BenchArgs),
    /// Verify a trajectory file or golden fixture.
    Replay(ReplayArgs),
    /// Serve sessions over websocket.
    Serve(ServeArgs),
    /// Regenerate the golden fixtures.
    Golden(GoldenArgs),
    /// List presets and check the catalog.
    Scenarios,
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long, env = "AGARCL_SCENARIO", default_value = "full")]
    scenario: String,
    #[arg(long, env = "AGARCL_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "AGARCL_FRAME_SKIP", default_value_t = agarcl_core::env::DEFAULT_FRAME_SKIP)]
    frame_skip: u32,
    #[arg(long, env = "AGARCL_OBS", default_value = "pixel", value_parser = ["pixel", "symbolic"])]
    obs: String,
    /// Defaults to the scenario's own noise.
    #[arg(long, env = "AGARCL_NOISE_STD")]
    noise_std: Option<f64>,
}

impl EnvArgs {
    fn options(&self) -> Result<EnvOptions, HarnessError> {
        Ok(EnvOptions {
            frame_skip: self.frame_skip,
            obs_mode: obs_mode(&self.obs)?,
            noise_std: self.noise_std,
            ..EnvOptions::default()
        })
    }
}

fn obs_mode(s: &str) -> Result<ObsMode, HarnessError> {
    s.parse().map_err(|e: String| HarnessError::Invalid(e))
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, env = "AGARCL_STEPS", default_value_t = 1000)]
    steps: u64,
    /// random, stationary or bot:<hungry|hungry_shy|aggressive|aggressive_shy>
    #[arg(long, env = "AGARCL_POLICY", default_value = "random")]
    policy: String,
    /// Trajectory file to write.
    #[arg(long, env = "AGARCL_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "AGARCL_HASH_EVERY", default_value_t = DEFAULT_HASH_EVERY)]
    hash_every: u64,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, env = "AGARCL_SCENARIO", default_value = "full")]
    scenario: String,
    #[arg(long, env = "AGARCL_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "AGARCL_OBS", default_value = "pixel", value_parser = ["pixel", "symbolic"])]
    obs: String,
    /// Wall-clock seconds per trial.
    #[arg(long, env = "AGARCL_SECONDS", default_value_t = 3.0)]
    seconds: f64,
    #[arg(long, env = "AGARCL_TRIALS", default_value_t = 10)]
    trials: usize,
    /// Frame-skip settings to measure.
    #[arg(long = "frame-skip", env = "AGARCL_FRAME_SKIP", value_delimiter = ',', default_values_t = [1u32, 4])]
    frame_skip: Vec<u32>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Trajectory file, or a golden fixture (`.json`).
    record: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, env = "AGARCL_PORT", default_value_t = server::DEFAULT_PORT)]
    port: u16,
    #[arg(long, env = "AGARCL_BIND", default_value = "127.0.0.1")]
    bind: String,
    #[arg(long, env = "AGARCL_MODE", default_value = "agent", value_parser = ["agent", "human"])]
    mode: String,
    /// Directory for session trajectories.
    #[arg(long, env = "AGARCL_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "AGARCL_SNAPSHOT_EVERY", default_value_t = server::DEFAULT_SNAPSHOT_EVERY)]
    snapshot_every: u64,
    #[arg(long, env = "AGARCL_TICK_RATE", default_value_t = server::DEFAULT_TICK_RATE)]
    tick_rate: f64,
    /// Seconds an agent session may stay silent.
    #[arg(long, env = "AGARCL_TIMEOUT", default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, env = "AGARCL_HASH_EVERY", default_value_t = DEFAULT_HASH_EVERY)]
    hash_every: u64,
}

#[derive(Args)]
struct GoldenArgs {
    /// Output directory; defaults to the crate's fixture directory.
    #[arg(long, env = "AGARCL_OUT")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run(a) => {
            let policy: PolicyKind = a.policy.parse().map_err(HarnessError::Invalid)?;
            let s = cmd_run(&RunConfig {
                scenario: a.env.scenario.clone(),
                seed: a.env.seed,
                steps: a.steps,
                policy,
                options: a.env.options()?,
                out: a.out,
                hash_every: a.hash_every,
            })?;
            if a.json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                println!("scenario      {} (seed {})", s.scenario, s.seed);
                println!("policy        {}", s.policy);
                println!("steps         {} ({} ticks)", s.steps, s.ticks);
                println!("total reward  {:.4}", s.total_reward);
                if let Some(m) = s.mean_episode_return() {
                    println!("episodes      {} finished, mean return {m:.4}", s.episode_returns.len());
                }
                println!("deaths        {}", s.deaths);
                println!("final mass    {:.4}", s.final_mass);
                println!("steps/s       {:.0}", s.steps_per_sec);
                if let Some(p) = &s.out {
                    println!("trajectory    {}", p.display());
                }
            }
        }
        Command::Benchmark(a) => {
            let r = cmd_benchmark(&BenchmarkConfig {
                scenario: a.scenario,
                seed: a.seed,
                seconds: a.seconds,
                trials: a.trials,
                obs_mode: obs_mode(&a.obs)?,
                frame_skips: a.frame_skip,
            })?;
            if a.json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("{} / {} obs, {} trials", r.scenario, r.obs_mode.name(), a.trials);
                for row in &r.rows {
                    println!(
                        "frame_skip {}: IQM {:.0} steps/s, {:.0} frames/s",
                        row.frame_skip, row.iqm_steps_per_sec, row.iqm_frames_per_sec
                    );
                }
            }
        }
        Command::Replay(a) => {
            let r = cmd_replay(&a.record)?;
            match &r.divergence {
                None => {
                    println!(
                        "ok: {} steps, {} resets, {} hashes checked{}",
                        r.steps,
                        r.resets,
                        r.hashes_checked,
                        if r.truncated { " (damaged tail dropped)" } else { "" }
                    );
                }
                Some(d) => {
                    println!("{d}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Serve(a) => {
            let cfg = ServeConfig {
                bind: a.bind,
                port: a.port,
                scenario: a.env.scenario.clone(),
                seed: a.env.seed,
                mode: a.mode.parse::<ServeMode>().map_err(HarnessError::Invalid)?,
                options: a.env.options()?,
                snapshot_every: a.snapshot_every,
                tick_rate: a.tick_rate,
                agent_timeout: Duration::from_secs_f64(a.timeout),
                out: a.out,
                hash_every: a.hash_every,
            };
            let mode = cfg.mode;
            let handle = server::start(cfg)?;
            eprintln!("serving {mode:?} sessions on {}", handle.url());
            handle.wait()?;
        }
        Command::Golden(a) => {
            let dir = a.out.unwrap_or_else(default_fixture_dir);
            for p in write_golden_set(&dir)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Scenarios => {
            for s in scenario_library() {
                let mode = match s.mode.max_steps() {
                    Some(n) => format!("episodic {n}"),
                    None => "continual".to_string(),
                };
                println!("{:<22} {:<16} {}", s.name, mode, s.description);
            }
            let issues = validate_catalog(scenario_library());
            if !issues.is_empty() {
                for i in &issues {
                    eprintln!("catalog: {i}");
                }
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
