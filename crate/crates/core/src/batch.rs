//! Many independent environments stepped together, data-parallel when the
//! `parallel` feature is on.

use serde::{Deserialize, Serialize};

use crate::env::{make_env, ActionCommand, Env, EnvOptions, Transition};
use crate::error::EnvError;
use crate::policy::{Policy, PolicyKind};
use crate::scenario::ScenarioSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool; identical to `Sequential` without the
    /// `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Applies `f` to every element, in parallel when asked and available.
/// Results keep input order either way.
pub fn map_items<T, R, F>(items: &mut [T], exec: Execution, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter_mut().enumerate().map(|(i, t)| f(i, t)).collect()
        }
        _ => items.iter_mut().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

/// Fixed-size set of independent environments.
pub struct VecEnv {
    envs: Vec<Env>,
    execution: Execution,
}

impl VecEnv {
    /// One env per seed, all on the same scenario.
    pub fn new(spec: &ScenarioSpec, seeds: &[u64], options: &EnvOptions, execution: Execution) -> Result<Self, EnvError> {
        let envs = seeds
            .iter()
            .map(|&s| make_env(spec.clone(), s, options.clone()))
            .collect::<Result<_, _>>()?;
        Ok(Self { envs, execution })
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[Env] {
        &self.envs
    }

    /// Advances every env by one decision. Finished episodic envs are reset
    /// after reporting their final transition.
    pub fn step(&mut self, actions: &[ActionCommand]) -> Result<Vec<Transition>, EnvError> {
        if actions.len() != self.envs.len() {
            return Err(EnvError::InvalidAction(format!(
                "expected {} actions, got {}",
                self.envs.len(),
                actions.len()
            )));
        }
        map_items(&mut self.envs, self.execution, |i, env| {
            let t = env.advance(actions[i])?;
            if env.is_done() && env.spec().mode.is_episodic() {
                env.reset()?;
            }
            Ok(t)
        })
        .into_iter()
        .collect()
    }

    /// State hash of every world.
    pub fn hashes(&self) -> Vec<u64> {
        self.envs.iter().map(|e| e.world().state_hash()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub total_reward: f64,
    pub steps: u64,
    pub deaths: u32,
    pub final_mass: f64,
    pub terminated: bool,
    pub final_hash: u64,
}

/// Runs one episode per seed with a fixed policy, capped at `max_steps`
/// decisions (continual scenarios need the cap).
pub fn evaluate_episodes(
    spec: &ScenarioSpec,
    seeds: &[u64],
    policy: PolicyKind,
    options: &EnvOptions,
    max_steps: u64,
    execution: Execution,
) -> Result<Vec<EpisodeSummary>, EnvError> {
    let mut seeds = seeds.to_vec();
    map_items(&mut seeds, execution, |_, &mut seed| {
        let mut env = make_env(spec.clone(), seed, options.clone())?;
        let mut pi = Policy::new(policy, seed);
        let mut s = EpisodeSummary {
            seed,
            total_reward: 0.0,
            steps: 0,
            deaths: 0,
            final_mass: env.agent_mass(),
            terminated: false,
            final_hash: 0,
        };
        while s.steps < max_steps && !env.is_done() {
            let t = env.advance(pi.act(&env))?;
            s.total_reward += t.reward;
            s.steps += 1;
            s.deaths += t.info.deaths;
            s.terminated |= t.terminated;
        }
        s.final_mass = env.agent_mass();
        s.final_hash = env.world().state_hash();
        Ok(s)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::ObsMode;
    use crate::scenario::scenario;

    fn opts() -> EnvOptions {
        EnvOptions {
            obs_mode: ObsMode::Symbolic,
            ..EnvOptions::default()
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let spec = scenario("mini-5").unwrap();
        let seeds: Vec<u64> = (0..6).collect();
        let a = evaluate_episodes(&spec, &seeds, PolicyKind::Random, &opts(), 200, Execution::Parallel).unwrap();
        let b = evaluate_episodes(&spec, &seeds, PolicyKind::Random, &opts(), 200, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|s| s.seed).collect::<Vec<_>>(), seeds);
    }

    #[test]
    fn vec_env_steps_all_and_auto_resets() {
        let spec = scenario("mini-1").unwrap();
        let mut v = VecEnv::new(&spec, &[1, 2, 3], &opts(), Execution::Parallel).unwrap();
        let mut s = VecEnv::new(&spec, &[1, 2, 3], &opts(), Execution::Sequential).unwrap();
        let actions = vec![ActionCommand::new(0.5, 0.5, crate::dynamics::Discrete::None); 3];
        for _ in 0..501 {
            let a = v.step(&actions).unwrap();
            let b = s.step(&actions).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(v.hashes(), s.hashes());
        assert!(v.envs().iter().all(|e| e.episode() == 1 && e.steps() == 1));
        assert!(v.step(&actions[..2]).is_err());
    }
}
