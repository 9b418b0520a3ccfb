//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --release -p agarcl-harness --test acceptance`
//! for representative timings.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use agarcl_core::batch::{evaluate_episodes, map_items, Execution};
use agarcl_core::config::{PlayerSpec, VirusLayout, WorldConfig};
use agarcl_core::entity::{BotBrain, BotKind};
use agarcl_core::observation::{compute_viewport, render_pixel_obs, Viewport};
use agarcl_core::policy::{Policy, PolicyKind};
use agarcl_core::rng::WorldRng;
use agarcl_core::{
    create_world, make_named, scenario, scenario_library, speed_of, step_tick, ControlInput, Discrete, EnvOptions,
    ObsMode, Vec2, WorldState,
};
use agarcl_harness::commands::{cmd_benchmark, cmd_replay, cmd_run, BenchmarkConfig, RunConfig};
use agarcl_harness::golden::{default_fixture_dir, fixture_paths, GOLDEN_SET};
use agarcl_harness::trajectory::{replay, Recorder};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn symbolic(frame_skip: u32) -> EnvOptions {
    EnvOptions {
        frame_skip,
        obs_mode: ObsMode::Symbolic,
        ..EnvOptions::default()
    }
}

fn a1_decay_floor() -> Outcome {
    let started = Instant::now();
    let s = cmd_run(&RunConfig {
        scenario: "mini-3c".into(),
        seed: 0,
        steps: 30_000,
        policy: PolicyKind::Stationary,
        options: EnvOptions {
            noise_std: Some(0.0),
            ..symbolic(4)
        },
        out: None,
        hash_every: 1000,
    })
    .map_err(|e| e.to_string())?;
    let wall = started.elapsed().as_secs_f64();
    ensure!((s.total_reward + 975.0).abs() <= 1.0, "total reward {:.4}", s.total_reward);
    ensure!(wall < 60.0, "took {wall:.1} s");
    Ok(format!(
        "total reward {:.4}, final mass {:.4}, {} ticks in {wall:.2} s",
        s.total_reward, s.final_mass, s.ticks
    ))
}

fn a2_telescoping() -> Outcome {
    let mut env = make_named("mini-1c", 3, symbolic(4)).map_err(|e| e.to_string())?;
    let mut pi = Policy::new(PolicyKind::Random, 3);
    let m0 = env.agent_mass();
    let mut sum = 0.0;
    for _ in 0..100_000 {
        let t = env.advance(pi.act(&env)).map_err(|e| e.to_string())?;
        ensure!(t.info.deaths == 0, "unexpected death in mini-1c");
        sum += t.reward;
    }
    let drift = (sum - (env.agent_mass() - m0)).abs();
    ensure!(drift <= 1e-9, "mini-1c: sum {sum} vs mass change {}", env.agent_mass() - m0);

    let mut env = make_named("full", 8, symbolic(4)).map_err(|e| e.to_string())?;
    let mut pi = Policy::new(PolicyKind::Random, 8);
    let (mut deaths, mut blocks, mut worst) = (0u64, 0u64, 0.0f64);
    while blocks < 50_000 && (deaths < 3 || blocks < 5_000) {
        let t = env.advance(pi.act(&env)).map_err(|e| e.to_string())?;
        let gap = (t.reward - t.info.ledger_delta).abs();
        worst = worst.max(gap);
        ensure!(
            gap <= 1e-9 * t.info.mass.max(1.0),
            "block {blocks}: reward {} vs ledger {}",
            t.reward,
            t.info.ledger_delta
        );
        deaths += u64::from(t.info.deaths);
        blocks += 1;
    }
    ensure!(deaths > 0, "no deaths in {blocks} full-game blocks");
    Ok(format!(
        "mini-1c drift {drift:.2e} over 1e5 steps; full game {blocks} blocks, {deaths} deaths, worst gap {worst:.2e}"
    ))
}

fn a3_determinism() -> Outcome {
    let started = Instant::now();
    let mut presets: Vec<_> = scenario_library().iter().map(|s| s.name.clone()).collect();
    let results = map_items(&mut presets, Execution::Parallel, |i, name| -> Result<(u64, u64), String> {
        let seed = 1000 + i as u64;
        let env = make_named(name, seed, symbolic(4)).map_err(|e| e.to_string())?;
        let mut rec = Recorder::<Vec<u8>>::new(env, 1, "random", None, true).map_err(|e| e.to_string())?;
        let mut pi = Policy::new(PolicyKind::Random, seed);
        let mut ticks = 0u64;
        while ticks < 100_000 {
            if rec.env().is_done() {
                rec.reset().map_err(|e| e.to_string())?;
            }
            let a = pi.act(rec.env());
            ticks += u64::from(rec.step(a).map_err(|e| e.to_string())?.info.ticks_run);
        }
        let (traj, _) = rec.finish().map_err(|e| e.to_string())?;
        let traj = traj.ok_or("recorder kept nothing")?;
        let report = replay(&traj).map_err(|e| e.to_string())?;
        match report.divergence {
            Some(d) => Err(format!("{name}: {d}")),
            None => Ok((ticks, report.hashes_checked)),
        }
    });
    let mut ticks = 0;
    let mut hashes = 0;
    for r in results {
        let (t, h) = r?;
        ticks += t;
        hashes += h;
    }

    let paths = fixture_paths(&default_fixture_dir()).map_err(|e| e.to_string())?;
    ensure!(paths.len() == GOLDEN_SET.len(), "{} fixtures on disk, {} expected", paths.len(), GOLDEN_SET.len());
    for p in &paths {
        let r = cmd_replay(p).map_err(|e| e.to_string())?;
        ensure!(r.ok(), "{}: {}", p.display(), r.divergence.unwrap());
    }
    let wall = started.elapsed().as_secs_f64();
    ensure!(wall < 120.0, "took {wall:.1} s");
    Ok(format!(
        "{} presets, {ticks} ticks, {hashes} hashes matched; {} golden fixtures; {wall:.1} s",
        presets.len(),
        paths.len()
    ))
}

fn a4_speed_law() -> Outcome {
    let text = include_str!("data/speed_oracle.json");
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let samples = doc["samples"].as_array().ok_or("no samples")?;
    ensure!(samples.len() == 10_000, "{} samples", samples.len());
    let mut worst = 0.0f64;
    let mut pairs = Vec::with_capacity(samples.len());
    for s in samples {
        let m: f64 = s[0].as_str().unwrap().parse().unwrap();
        let want: f64 = s[1].as_str().unwrap().parse().unwrap();
        let got = speed_of(m).map_err(|e| e.to_string())?;
        let rel = ((got - want) / want).abs();
        worst = worst.max(rel);
        ensure!(rel <= 1e-12, "mass {m}: {got} vs {want}");
        pairs.push((m, got));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.dedup_by(|a, b| a.0 == b.0);
    for w in pairs.windows(2) {
        ensure!(w[1].1 < w[0].1, "speed not decreasing between {} and {}", w[0].0, w[1].0);
    }
    let mut m = 1.0f64;
    while m < 1e6 {
        let next = m.next_up();
        ensure!(speed_of(next).unwrap() <= speed_of(m).unwrap(), "speed rises past {m}");
        m *= 1.37;
    }
    Ok(format!("worst relative error {worst:.2e}, {} sorted masses strictly decreasing", pairs.len()))
}

fn a5_regeneration() -> Outcome {
    let mut env = make_named("full", 12, symbolic(1)).map_err(|e| e.to_string())?;
    let cap = env.world().config.max_pellets;
    let min_viruses = env.world().config.min_viruses;
    ensure!(cap == 500 && min_viruses == 10, "full preset has {cap} pellets, {min_viruses} viruses");
    let mut pi = Policy::new(PolicyKind::Random, 12);
    let mut prev = env.world().pellets.len();
    let (mut topups, mut refilled) = (0, 0);
    for _ in 0..10_000 {
        env.advance(pi.act(&env)).map_err(|e| e.to_string())?;
        let w = env.world();
        let n = w.pellets.len();
        ensure!(w.viruses.len() >= 10, "tick {}: {} viruses", w.tick, w.viruses.len());
        if w.tick % 600 == 0 {
            ensure!(n == cap, "tick {}: {n} pellets after regeneration", w.tick);
            topups += 1;
            if prev < cap {
                refilled += 1;
            }
        } else {
            ensure!(n <= prev, "tick {}: pellets rose from {prev} to {n}", w.tick);
        }
        prev = n;
    }
    ensure!(refilled > 0, "pellets never dropped below the cap");
    Ok(format!("{topups} top-ups ({refilled} refilled a deficit), viruses >= 10 throughout"))
}

fn lone_agent(mass: f64, at: Vec2, tweak: impl FnOnce(&mut WorldConfig)) -> WorldState {
    let mut cfg = WorldConfig {
        arena_width: 300.0,
        arena_height: 300.0,
        max_pellets: 0,
        min_viruses: 0,
        mass_decay_enabled: false,
        virus_regen_enabled: false,
        players: vec![PlayerSpec::agent(mass.max(25.0)).at(at)],
        ..WorldConfig::default()
    };
    tweak(&mut cfg);
    let mut w = create_world(cfg).unwrap();
    w.players[0].cells[0].mass = mass;
    w
}

fn press(w: &mut WorldState, cursor: Vec2, d: Discrete) -> agarcl_core::TickEvents {
    let mut controls = vec![ControlInput::new(0, cursor, d)];
    for p in w.players.iter().skip(1) {
        controls.push(ControlInput::new(p.index, p.centroid().unwrap(), Discrete::None));
    }
    step_tick(w, &controls).unwrap()
}

fn fuzz_config(seed: u64) -> WorldConfig {
    let mut r = WorldRng::new(seed, 11);
    let side = r.uniform(150.0, 300.0);
    let mut players = vec![PlayerSpec::agent(r.uniform(200.0, 2000.0))];
    for _ in 0..r.below(3) {
        let brain = BotBrain::heuristic(BotKind::ALL[r.below(4) as usize]);
        players.push(PlayerSpec::bot(r.uniform(100.0, 1500.0), brain));
    }
    WorldConfig {
        arena_width: side,
        arena_height: side,
        max_pellets: r.below(80) as usize,
        min_viruses: r.below(4) as usize,
        mass_decay_enabled: r.below(2) == 0,
        seed,
        players,
        ..WorldConfig::default()
    }
}

fn a6_rules() -> Outcome {
    let c = Vec2::new(150.0, 150.0);
    let mut w = lone_agent(100.0, c, |_| {});
    let ev = press(&mut w, c + Vec2::new(50.0, 0.0), Discrete::Split);
    let masses: Vec<f64> = w.players[0].cells.iter().map(|c| c.mass).collect();
    ensure!(ev.splits.len() == 1 && masses == [50.0, 50.0], "split of 100 gave {masses:?}");

    let mut w = lone_agent(49.0, c, |_| {});
    let ev = press(&mut w, c + Vec2::new(50.0, 0.0), Discrete::Split);
    let masses: Vec<f64> = w.players[0].cells.iter().map(|c| c.mass).collect();
    ensure!(ev.splits.is_empty() && masses == [49.0], "split of 49 gave {masses:?}");

    let mut ticks = 0u64;
    let mut most = 0usize;
    let mut seed = 0u64;
    while ticks < 1_000_000 {
        seed += 1;
        let Ok(mut w) = create_world(fuzz_config(seed)) else { continue };
        let cap = w.config.cell_cap;
        let mut r = WorldRng::new(seed, 12);
        for _ in 0..2_000 {
            let controls: Vec<ControlInput> = w
                .players
                .iter()
                .map(|p| {
                    let at = p.centroid().unwrap() + Vec2::new(r.uniform(-60.0, 60.0), r.uniform(-60.0, 60.0));
                    let d = match r.below(4) {
                        0 => Discrete::Split,
                        1 => Discrete::Eject,
                        _ => Discrete::None,
                    };
                    ControlInput::new(p.index, at, d)
                })
                .collect();
            step_tick(&mut w, &controls).unwrap();
            for p in &w.players {
                ensure!(p.cells.len() <= cap, "seed {seed} tick {}: {} cells", w.tick, p.cells.len());
                most = most.max(p.cells.len());
            }
        }
        ticks += 2_000;
    }
    ensure!(most == 14, "fuzz never reached the cap (max {most})");

    let virus_at = Vec2::new(140.0, 150.0);
    let mut w = lone_agent(400.0, Vec2::new(100.0, 150.0), |cfg| {
        cfg.min_viruses = 1;
        cfg.virus_layout = VirusLayout::Line {
            start: virus_at,
            end: virus_at,
            count: 1,
        };
    });
    ensure!(w.viruses.len() == 1, "{} viruses placed", w.viruses.len());
    let (mut fed, mut spawned_at) = (0usize, None);
    for _ in 0..400 {
        let d = if w.blobs.is_empty() && fed < 7 { Discrete::Eject } else { Discrete::None };
        let ev = press(&mut w, virus_at, d);
        fed += ev.blobs_fed;
        if !ev.virus_spawns.is_empty() {
            ensure!(spawned_at.is_none(), "second spawn after {fed} feedings");
            spawned_at = Some(fed);
        }
        if fed >= 7 && w.blobs.is_empty() {
            break;
        }
    }
    ensure!(spawned_at == Some(7) && w.viruses.len() == 2, "spawn after {spawned_at:?} feedings, {fed} fed");

    let (a, b) = (400.1f64, 250.3f64);
    let cfg = WorldConfig {
        arena_width: 300.0,
        arena_height: 300.0,
        max_pellets: 0,
        min_viruses: 0,
        mass_decay_enabled: false,
        virus_regen_enabled: false,
        players: vec![
            PlayerSpec::agent(a).at(c),
            PlayerSpec::bot(b, BotBrain::Stationary).at(c + Vec2::new(3.0, 0.0)),
        ],
        ..WorldConfig::default()
    };
    let mut w = create_world(cfg).unwrap();
    let ev = press(&mut w, c, Discrete::None);
    ensure!(ev.eats.len() == 1, "{} eats", ev.eats.len());
    let got = w.players[0].cells[0].mass;
    ensure!(got.to_bits() == (a + b).to_bits(), "absorbed mass {got:?}, expected {:?}", a + b);
    Ok(format!(
        "100 -> 50 + 50, 49 unchanged, {ticks} fuzz ticks with at most {most} cells, spawn on feeding 7, {a} + {b} = {got}"
    ))
}

fn brute_force_planes(world: &WorldState, player: usize, view: &Viewport, n: usize) -> Vec<f32> {
    let mut out = vec![0.0f32; 4 * n * n];
    let scale = n as f64 / view.side;
    let mut paint = |ch: usize, center: Vec2, r: f64| {
        let cx = (center.x - view.left()) * scale;
        let cy = (center.y - view.top()) * scale;
        let rr = r * scale;
        for row in 0..n {
            for col in 0..n {
                let dx = col as f64 + 0.5 - cx;
                let dy = row as f64 + 0.5 - cy;
                if dx * dx + dy * dy < rr * rr {
                    out[ch * n * n + row * n + col] = 1.0;
                }
            }
        }
    };
    for p in world.pellets.iter() {
        paint(0, p.position, 1.0);
    }
    for v in &world.viruses {
        paint(1, v.position, 10.0);
    }
    for b in &world.blobs {
        paint(2, b.position, b.mass.sqrt());
    }
    for p in &world.players {
        for c in &p.cells {
            paint(if p.index == player { 3 } else { 2 }, c.position, c.mass.sqrt());
        }
    }
    out
}

fn random_controls(w: &WorldState, r: &mut WorldRng) -> Vec<ControlInput> {
    w.players
        .iter()
        .map(|p| {
            let at = p.centroid().unwrap() + Vec2::new(r.uniform(-80.0, 80.0), r.uniform(-80.0, 80.0));
            let d = match r.below(12) {
                0 => Discrete::Split,
                1 => Discrete::Eject,
                _ => Discrete::None,
            };
            ControlInput::new(p.index, at, d)
        })
        .collect()
}

fn a7_observation() -> Outcome {
    let env = make_named("full", 1, EnvOptions::default()).map_err(|e| e.to_string())?;
    let obs = env.observe();
    let px = obs.as_pixel().ok_or("default observation is not pixels")?;
    ensure!(px.shape() == [128, 128, 4], "shape {:?}", px.shape());
    ensure!(obs.to_bytes().len() == 4 * 128 * 128 * 4, "buffer of {} bytes", obs.to_bytes().len());

    let mut steps = 0;
    let mut seed = 0u64;
    while steps < 10_000 {
        seed += 1;
        let Ok(mut w) = create_world(fuzz_config(seed)) else { continue };
        let mut r = WorldRng::new(seed, 13);
        for _ in 0..100 {
            let controls = random_controls(&w, &mut r);
            step_tick(&mut w, &controls).unwrap();
            steps += 1;
            for player in 0..w.players.len() {
                let view = compute_viewport(&w, player);
                for cell in &w.players[player].cells {
                    ensure!(view.contains_circle(cell.position, cell.radius()), "seed {seed}: own cell outside view");
                }
                let obs = render_pixel_obs(&w, player, 48);
                for (a, b) in obs.plane(0).iter().zip(obs.plane(1)) {
                    ensure!(*a == 0.0 || *b == 0.0, "seed {seed} tick {}: pellet and virus share a pixel", w.tick);
                }
                let scale = 48.0 / view.side;
                for p in &w.players {
                    let own = if p.index == player { 3 } else { 2 };
                    for cell in &p.cells {
                        if cell.radius() * scale < 1.0 {
                            continue;
                        }
                        let col = ((cell.position.x - view.left()) * scale).floor();
                        let row = ((cell.position.y - view.top()) * scale).floor();
                        if (0.0..48.0).contains(&row) && (0.0..48.0).contains(&col) {
                            let lit = obs.get(own, row as usize, col as usize);
                            ensure!(lit == 1.0, "seed {seed}: cell missing from channel {own}");
                        }
                    }
                }
            }
        }
    }

    let mut scenes = 0;
    let mut seed = 10_000u64;
    while scenes < 100 {
        seed += 1;
        let Ok(mut w) = create_world(fuzz_config(seed)) else { continue };
        let mut r = WorldRng::new(seed, 14);
        for _ in 0..(seed % 60) {
            let controls = random_controls(&w, &mut r);
            step_tick(&mut w, &controls).unwrap();
        }
        let n = 24 + (seed % 24) as usize;
        let n2 = n * n;
        for player in 0..w.players.len() {
            let obs = render_pixel_obs(&w, player, n);
            let view = compute_viewport(&w, player);
            let bf = brute_force_planes(&w, player, &view, n);
            for ch in 0..3 {
                ensure!(obs.plane(ch) == &bf[ch * n2..(ch + 1) * n2], "scene {seed}: channel {ch} differs");
            }
            for (got, want) in obs.plane(3).iter().zip(&bf[3 * n2..]) {
                let grid = w.config.view.grid_intensity;
                ensure!(
                    if *want == 1.0 { *got == 1.0 } else { *got == 0.0 || *got == grid },
                    "scene {seed}: channel 3 differs"
                );
            }
        }
        scenes += 1;
    }
    Ok(format!("shape 128x128x4, {steps} fuzz steps, {scenes} scenes match the brute-force raster"))
}

fn a8_throughput() -> Outcome {
    let r = cmd_benchmark(&BenchmarkConfig {
        scenario: "full".into(),
        seed: 0,
        seconds: 1.0,
        trials: 10,
        obs_mode: ObsMode::Pixel,
        frame_skips: vec![1, 4],
    })
    .map_err(|e| e.to_string())?;
    let (fs1, fs4) = (r.rows[0].iqm_steps_per_sec, r.rows[1].iqm_steps_per_sec);
    ensure!(fs1 >= 500.0 && fs4 >= 400.0, "IQM {fs1:.0} steps/s at fs1, {fs4:.0} at fs4");
    Ok(format!("IQM {fs1:.0} steps/s at frame skip 1, {fs4:.0} decisions/s at frame skip 4"))
}

fn a9_sanity_bands() -> Outcome {
    let seeds: Vec<u64> = (0..100).collect();
    let mean = |name: &str| -> Result<f64, String> {
        let spec = scenario(name).map_err(|e| e.to_string())?;
        let eps = evaluate_episodes(&spec, &seeds, PolicyKind::Random, &symbolic(4), u64::MAX, Execution::Parallel)
            .map_err(|e| e.to_string())?;
        let cap = spec.mode.max_steps().ok_or(format!("{name} is not episodic"))?;
        if eps.iter().any(|e| !e.terminated && e.steps != cap) {
            return Err(format!("{name}: an episode did not finish"));
        }
        Ok(eps.iter().map(|e| e.total_reward).sum::<f64>() / eps.len() as f64)
    };
    let m1 = mean("mini-1")?;
    let m3 = mean("mini-3")?;
    ensure!((0.0..=50.0).contains(&m1), "mini-1 mean {m1:.2}");
    ensure!(m3 <= -100.0, "mini-3 mean {m3:.2}");
    Ok(format!("mini-1 mean {m1:.2}, mini-3 mean {m3:.2} over 100 episodes"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("A1", a1_decay_floor),
        ("A2", a2_telescoping),
        ("A3", a3_determinism),
        ("A4", a4_speed_law),
        ("A5", a5_regeneration),
        ("A6", a6_rules),
        ("A7", a7_observation),
        ("A8", a8_throughput),
        ("A9", a9_sanity_bands),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS  {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL  {detail} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
