//! Synthetic two-vehicle-convoy scenes with a known causal graph.
//!
//! Three agents drive in a line-of-sight world: `c0` leads, `c1` follows it
//! at a safe distance, and `i0` drives on its own. The lead and independent
//! vehicles chase a schedule of random velocity goals through a proportional
//! controller; the follower reacts — half a second late and through noisy
//! sensors — to the lead vehicle's position and velocity. The only causal
//! link between the recorded series is therefore `c0 → c1`, which makes the
//! generated scenes ground truth for benchmarking discovery methods.
//!
//! Everything is driven by a [`ChaCha8Rng`] seeded from the config, so a
//! `(config, seed)` pair fully determines the output, byte for byte.

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SummaryGraph;
use crate::scene::{save_scene_csv, TimeSeriesScene, Variant};

/// Simulation and noise parameters for scene generation.
///
/// The defaults are the benchmark settings: 10 Hz simulation, 50–70 s
/// scenes, twelve velocity-goal changes per self-driven vehicle, pure
/// proportional control with unit gain, and noise levels drawn per scene
/// from the listed ranges. Velocities are bounded by a 100 mph cap, and
/// accelerations by comfortable braking/throttle limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneGenConfig {
    /// Which signal the emitted scene carries.
    pub variant: Variant,
    /// Simulation and output sample rate.
    pub frequency_hz: f64,
    /// Scene duration is drawn uniformly from this range (seconds).
    pub duration_range_s: (f64, f64),
    /// Number of velocity-goal changes for the lead vehicle `c0`.
    pub convoy_actions: usize,
    /// Number of velocity-goal changes for the independent vehicle `i0`.
    pub independent_actions: usize,
    /// Initial follower gap is drawn uniformly from this range (meters).
    pub min_convoy_distance_m: f64,
    pub max_convoy_distance_m: f64,
    /// PID gains shared by all controllers; the benchmark is P-only.
    pub proportional_gain: f64,
    pub integral_gain: f64,
    pub derivative_gain: f64,
    /// Minimum spacing between goal changes (seconds).
    pub min_action_interval_s: f64,
    /// Hard velocity limits (m/s).
    pub velocity_bounds_mps: (f64, f64),
    /// Range for starting velocities (m/s); must lie within the bounds.
    pub start_velocity_bounds_mps: (f64, f64),
    /// Hard acceleration limits (m/s^2).
    pub acceleration_bounds_mps2: (f64, f64),
    /// Time headway: the follower's target gap is this many seconds of its
    /// own current speed.
    pub safe_distance_over_velocity_s: f64,
    /// Observation delay of the follower (seconds); rounds to whole samples.
    pub reaction_time_s: f64,
    /// Per-scene draw ranges for the noise model. Actuation noise is
    /// additive Gaussian on each commanded acceleration with
    /// `std = fixed + proportional * |command|`; sensory noise perturbs the
    /// follower's delayed perception of each control error the same way
    /// (`std = fixed + proportional * |perceived deviation|`).
    pub fixed_actuary_noise_mps2: (f64, f64),
    pub proportional_actuary_noise: (f64, f64),
    pub fixed_sensory_noise_m: (f64, f64),
    pub proportional_sensory_noise: (f64, f64),
    /// Base seed; batch generation uses `seed + scene_index`.
    pub seed: u64,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        SceneGenConfig {
            variant: Variant::Velocity,
            frequency_hz: 10.0,
            duration_range_s: (50.0, 70.0),
            convoy_actions: 12,
            independent_actions: 12,
            min_convoy_distance_m: 10.0,
            max_convoy_distance_m: 100.0,
            proportional_gain: 1.0,
            integral_gain: 0.0,
            derivative_gain: 0.0,
            min_action_interval_s: 1.0,
            velocity_bounds_mps: (0.0, 44.7),
            start_velocity_bounds_mps: (4.47, 26.8),
            acceleration_bounds_mps2: (-6.56, 3.5),
            safe_distance_over_velocity_s: 2.24,
            reaction_time_s: 0.5,
            fixed_actuary_noise_mps2: (0.1, 1.6),
            proportional_actuary_noise: (0.1, 1.6),
            fixed_sensory_noise_m: (0.01, 0.16),
            proportional_sensory_noise: (0.005, 0.08),
            seed: 0,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidInput(format!(
            "{name} must be a finite range with lower <= upper, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

impl SceneGenConfig {
    /// Checks all config invariants; every generation entry point calls this.
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "frequency must be positive, got {}",
                self.frequency_hz
            )));
        }
        check_range("duration range", self.duration_range_s)?;
        if self.duration_range_s.0 <= 0.0 {
            return Err(Error::InvalidInput("duration must be positive".into()));
        }
        check_range(
            "convoy distance range",
            (self.min_convoy_distance_m, self.max_convoy_distance_m),
        )?;
        if self.min_convoy_distance_m <= 0.0 {
            return Err(Error::InvalidInput(
                "minimum convoy distance must be positive".into(),
            ));
        }
        for (name, gain) in [
            ("proportional", self.proportional_gain),
            ("integral", self.integral_gain),
            ("derivative", self.derivative_gain),
        ] {
            if !gain.is_finite() {
                return Err(Error::InvalidInput(format!("{name} gain must be finite")));
            }
        }
        check_range("velocity bounds", self.velocity_bounds_mps)?;
        check_range("start velocity bounds", self.start_velocity_bounds_mps)?;
        check_range("acceleration bounds", self.acceleration_bounds_mps2)?;
        if self.start_velocity_bounds_mps.0 < self.velocity_bounds_mps.0
            || self.start_velocity_bounds_mps.1 > self.velocity_bounds_mps.1
        {
            return Err(Error::InvalidInput(
                "start velocity bounds must lie within the velocity bounds".into(),
            ));
        }
        if !(self.min_action_interval_s >= 0.0 && self.min_action_interval_s.is_finite()) {
            return Err(Error::InvalidInput("action interval must be non-negative".into()));
        }
        if !(self.reaction_time_s >= 0.0 && self.reaction_time_s.is_finite()) {
            return Err(Error::InvalidInput("reaction time must be non-negative".into()));
        }
        if !(self.safe_distance_over_velocity_s >= 0.0
            && self.safe_distance_over_velocity_s.is_finite())
        {
            return Err(Error::InvalidInput("time headway must be non-negative".into()));
        }
        for (name, range) in [
            ("fixed actuary noise", self.fixed_actuary_noise_mps2),
            ("proportional actuary noise", self.proportional_actuary_noise),
            ("fixed sensory noise", self.fixed_sensory_noise_m),
            ("proportional sensory noise", self.proportional_sensory_noise),
        ] {
            check_range(name, range)?;
            if range.0 < 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be non-negative")));
            }
        }
        let budget = self.duration_range_s.0;
        for (name, actions) in [
            ("convoy", self.convoy_actions),
            ("independent", self.independent_actions),
        ] {
            if actions as f64 * self.min_action_interval_s > budget {
                return Err(Error::InfeasibleConfig(format!(
                    "{actions} {name} actions spaced >= {} s cannot fit into the minimum \
                     duration of {budget} s",
                    self.min_action_interval_s
                )));
            }
        }
        Ok(())
    }
}

/// The per-scene noise levels actually drawn from the configured ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub fixed_actuary_mps2: f64,
    pub proportional_actuary: f64,
    pub fixed_sensory_m: f64,
    pub proportional_sensory: f64,
}

/// A generated scene together with its ground truth and provenance.
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub scene: TimeSeriesScene,
    /// Always the single-edge graph `c0 -> c1` over the scene's variables.
    pub ground_truth: SummaryGraph,
    /// The base seed this scene was requested with.
    pub seed: u64,
    /// Noise levels drawn for this scene.
    pub realized_noise: NoiseParams,
    /// Realized scene duration in seconds.
    pub duration_s: f64,
    /// Times (seconds) of the lead vehicle's velocity-goal changes.
    pub convoy_goal_times_s: Vec<f64>,
    /// Times (seconds) of the independent vehicle's goal changes.
    pub independent_goal_times_s: Vec<f64>,
    /// How many collision-tainted simulations were discarded before this one.
    pub regenerations: u32,
}

/// Stride between retry seeds after a collision. A large odd constant keeps
/// retries away from the `seed + index` progression that batches use.
const RETRY_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;
/// Give up after this many collision retries; with a working safe-distance
/// controller this only triggers for configs that make collisions inevitable.
const MAX_REGENERATIONS: u32 = 64;

/// Generates a single scene from the config's seed.
///
/// Simulations in which the follower reaches its leader (the inter-vehicle
/// gap hits zero) are discarded and rerun with a derived seed; the count of
/// such discards is reported in [`GeneratedScene::regenerations`].
pub fn generate_scene(config: &SceneGenConfig) -> Result<GeneratedScene> {
    config.validate()?;
    for attempt in 0..MAX_REGENERATIONS {
        let sim_seed = config
            .seed
            .wrapping_add(u64::from(attempt).wrapping_mul(RETRY_STRIDE));
        if let Some(mut generated) = simulate(config, sim_seed)? {
            generated.seed = config.seed;
            generated.regenerations = attempt;
            // Name the scene after the requested seed even when retries
            // moved the simulation seed, so batch file names stay dense.
            generated.scene.scene_id =
                format!("convoy_{}_{:06}", config.variant.suffix(), config.seed);
            return Ok(generated);
        }
    }
    Err(Error::NonConvergence(format!(
        "no collision-free scene within {MAX_REGENERATIONS} attempts from seed {}; \
         the config likely makes rear-end collisions unavoidable",
        config.seed
    )))
}

/// Generates `count` scenes (seeds `config.seed + 0..count`), writes each as
/// CSV into `out_dir`, and records seeds, durations, and realized noise in
/// `manifest.toml` alongside them.
pub fn generate_batch(
    config: &SceneGenConfig,
    count: usize,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<GeneratedScene>> {
    if count == 0 {
        return Err(Error::InvalidInput("scene count must be at least 1".into()));
    }
    config.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(&out_dir.display().to_string(), e))?;

    let scenes: Vec<GeneratedScene> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut scene_config = config.clone();
            scene_config.seed = config.seed.wrapping_add(i as u64);
            generate_scene(&scene_config)
        })
        .collect::<Result<_>>()?;

    for generated in &scenes {
        let path = out_dir.join(format!("{}.csv", generated.scene.scene_id));
        save_scene_csv(&generated.scene, &path)?;
    }
    let manifest = Manifest {
        scene: scenes.iter().map(ManifestEntry::from).collect(),
    };
    let text = toml::to_string(&manifest)
        .map_err(|e| Error::InvalidInput(format!("manifest serialization failed: {e}")))?;
    let manifest_path = out_dir.join("manifest.toml");
    std::fs::write(&manifest_path, text)
        .map_err(|e| Error::io(&manifest_path.display().to_string(), e))?;
    Ok(scenes)
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    scene: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    seed: u64,
    duration_s: f64,
    regenerations: u32,
    fixed_actuary_mps2: f64,
    proportional_actuary: f64,
    fixed_sensory_m: f64,
    proportional_sensory: f64,
}

impl From<&GeneratedScene> for ManifestEntry {
    fn from(g: &GeneratedScene) -> Self {
        ManifestEntry {
            id: g.scene.scene_id.clone(),
            seed: g.seed,
            duration_s: g.duration_s,
            regenerations: g.regenerations,
            fixed_actuary_mps2: g.realized_noise.fixed_actuary_mps2,
            proportional_actuary: g.realized_noise.proportional_actuary,
            fixed_sensory_m: g.realized_noise.fixed_sensory_m,
            proportional_sensory: g.realized_noise.proportional_sensory,
        }
    }
}

/// Velocity-goal schedule: change times (seconds) and the new goals.
fn draw_schedule(
    rng: &mut ChaCha8Rng,
    actions: usize,
    duration: f64,
    min_interval: f64,
    goal_bounds: (f64, f64),
) -> Vec<(f64, f64)> {
    let base = duration / (actions as f64 + 1.0);
    let times: Vec<f64> = if base >= min_interval {
        // Even spacing with jitter small enough to keep the minimum interval.
        let jitter = (base - min_interval) / 2.0;
        (1..=actions)
            .map(|i| i as f64 * base + rng.gen_range(-jitter..=jitter))
            .collect()
    } else {
        // Tight but feasible: pack changes at exactly the minimum interval.
        (1..=actions)
            .map(|i| (i as f64 - 0.5) * min_interval)
            .collect()
    };
    times
        .into_iter()
        .map(|t| (t, rng.gen_range(goal_bounds.0..=goal_bounds.1)))
        .collect()
}

/// PID controller state for one agent.
#[derive(Default)]
struct Pid {
    integral: f64,
    prev_error: Option<f64>,
}

impl Pid {
    fn command(&mut self, error: f64, dt: f64, config: &SceneGenConfig) -> f64 {
        self.integral += error * dt;
        let derivative = match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => 0.0,
        };
        self.prev_error = Some(error);
        config.proportional_gain * error
            + config.integral_gain * self.integral
            + config.derivative_gain * derivative
    }
}

/// Applies actuation noise and both physical limits to a commanded
/// acceleration; returns the realized acceleration and the next velocity.
fn actuate(
    rng: &mut ChaCha8Rng,
    command: f64,
    velocity: f64,
    dt: f64,
    config: &SceneGenConfig,
    noise: &NoiseParams,
) -> (f64, f64) {
    let (acc_lo, acc_hi) = config.acceleration_bounds_mps2;
    let (vel_lo, vel_hi) = config.velocity_bounds_mps;
    let clipped = command.clamp(acc_lo, acc_hi);
    let std = noise.fixed_actuary_mps2 + noise.proportional_actuary * clipped.abs();
    let z: f64 = rng.sample(StandardNormal);
    let applied = (clipped + std * z).clamp(acc_lo, acc_hi);
    let next_velocity = (velocity + applied * dt).clamp(vel_lo, vel_hi);
    // When the velocity clamp binds, the realized acceleration is whatever
    // change actually happened, which is what the scene records.
    let realized = (next_velocity - velocity) / dt;
    (realized, next_velocity)
}

/// Runs one simulation. Returns `None` when the follower collides with the
/// leader, signalling the caller to retry with a fresh seed.
fn simulate(config: &SceneGenConfig, sim_seed: u64) -> Result<Option<GeneratedScene>> {
    let mut rng = ChaCha8Rng::seed_from_u64(sim_seed);
    let f = config.frequency_hz;
    let dt = 1.0 / f;

    // Draw order is fixed: duration, initial gap, start velocities, noise
    // levels, lead schedule, independent schedule, then six normals per
    // step. Changing it would silently re-key every seed.
    let duration = rng.gen_range(config.duration_range_s.0..=config.duration_range_s.1);
    let n_samples = (duration * f).round().max(2.0) as usize;
    let gap0 = rng.gen_range(config.min_convoy_distance_m..=config.max_convoy_distance_m);
    let (start_lo, start_hi) = config.start_velocity_bounds_mps;
    let start_convoy = rng.gen_range(start_lo..=start_hi);
    let start_independent = rng.gen_range(start_lo..=start_hi);
    let noise = NoiseParams {
        fixed_actuary_mps2: rng
            .gen_range(config.fixed_actuary_noise_mps2.0..=config.fixed_actuary_noise_mps2.1),
        proportional_actuary: rng
            .gen_range(config.proportional_actuary_noise.0..=config.proportional_actuary_noise.1),
        fixed_sensory_m: rng
            .gen_range(config.fixed_sensory_noise_m.0..=config.fixed_sensory_noise_m.1),
        proportional_sensory: rng
            .gen_range(config.proportional_sensory_noise.0..=config.proportional_sensory_noise.1),
    };
    let lead_schedule = draw_schedule(
        &mut rng,
        config.convoy_actions,
        duration,
        config.min_action_interval_s,
        config.velocity_bounds_mps,
    );
    let independent_schedule = draw_schedule(
        &mut rng,
        config.independent_actions,
        duration,
        config.min_action_interval_s,
        config.velocity_bounds_mps,
    );
    let delay = (config.reaction_time_s * f).round() as usize;
    let headway = config.safe_distance_over_velocity_s;

    // State: positions along the lane for the convoy pair (the independent
    // vehicle's position never matters), velocities for all three.
    let mut lead_pos = gap0;
    let mut follow_pos = 0.0;
    let (mut lead_vel, mut follow_vel, mut indep_vel) =
        (start_convoy, start_convoy, start_independent);
    let mut lead_goal = start_convoy;
    let mut indep_goal = start_independent;
    let (mut lead_pid, mut follow_pid, mut indep_pid) =
        (Pid::default(), Pid::default(), Pid::default());
    let mut lead_pos_hist = Vec::with_capacity(n_samples);
    let mut lead_vel_hist = Vec::with_capacity(n_samples);
    let mut lead_acc_hist = Vec::with_capacity(n_samples);
    let mut next_lead_change = 0;
    let mut next_indep_change = 0;

    let mut accelerations = DMatrix::zeros(n_samples, 3);
    let mut velocities = DMatrix::zeros(n_samples, 3);

    for t in 0..n_samples {
        let now = t as f64 * dt;
        while next_lead_change < lead_schedule.len() && lead_schedule[next_lead_change].0 <= now {
            lead_goal = lead_schedule[next_lead_change].1;
            next_lead_change += 1;
        }
        while next_indep_change < independent_schedule.len()
            && independent_schedule[next_indep_change].0 <= now
        {
            indep_goal = independent_schedule[next_indep_change].1;
            next_indep_change += 1;
        }
        lead_pos_hist.push(lead_pos);
        lead_vel_hist.push(lead_vel);
        velocities[(t, 0)] = lead_vel;
        velocities[(t, 1)] = follow_vel;
        velocities[(t, 2)] = indep_vel;

        // Self-driven vehicles: P-control toward the current velocity goal.
        let lead_cmd = lead_pid.command(lead_goal - lead_vel, dt, config);
        let (lead_acc, lead_next) = actuate(&mut rng, lead_cmd, lead_vel, dt, config, &noise);
        lead_acc_hist.push(lead_acc);
        let indep_cmd = indep_pid.command(indep_goal - indep_vel, dt, config);
        let (indep_acc, indep_next) = actuate(&mut rng, indep_cmd, indep_vel, dt, config, &noise);

        // Follower: cooperative cruise control from delayed, noisy
        // observations of the leader. A feedforward copy of the observed
        // lead acceleration gives the immediate reaction; feedback on the
        // gap excess over the safe distance and on the closing speed keeps
        // the headway and matches pace. Feedback alone would respond
        // through the slow closed-loop dynamics and smear the lead-follower
        // reaction far past the observation delay.
        let seen = t.saturating_sub(delay);
        let true_gap = lead_pos_hist[seen] - follow_pos;
        let z_gap: f64 = rng.sample(StandardNormal);
        let z_vel: f64 = rng.sample(StandardNormal);
        let z_acc: f64 = rng.sample(StandardNormal);
        // Perception error scales with the magnitude of the perceived
        // deviation (a Weber's-law-style model of the mimicked human
        // driver), on top of a fixed sensor floor. Scaling by the raw gap
        // instead would bury every causal channel under meters of white
        // noise at highway following distances.
        let true_gap_error = true_gap - headway * follow_vel;
        let gap_error = true_gap_error
            + (noise.fixed_sensory_m + noise.proportional_sensory * true_gap_error.abs()) * z_gap;
        let seen_vel = lead_vel_hist[seen];
        let true_closing = seen_vel - follow_vel;
        let closing_error = true_closing
            + (noise.fixed_sensory_m + noise.proportional_sensory * true_closing.abs()) * z_vel;
        let seen_acc = lead_acc_hist[seen];
        let observed_acc =
            seen_acc + (noise.fixed_sensory_m + noise.proportional_sensory * seen_acc.abs()) * z_acc;
        let follow_cmd = observed_acc + follow_pid.command(gap_error + closing_error, dt, config);
        let (follow_acc, follow_next) =
            actuate(&mut rng, follow_cmd, follow_vel, dt, config, &noise);

        accelerations[(t, 0)] = lead_acc;
        accelerations[(t, 1)] = follow_acc;
        accelerations[(t, 2)] = indep_acc;

        lead_vel = lead_next;
        follow_vel = follow_next;
        indep_vel = indep_next;
        lead_pos += lead_vel * dt;
        follow_pos += follow_vel * dt;

        if lead_pos - follow_pos <= 0.0 {
            return Ok(None);
        }
    }

    let suffix = config.variant.suffix();
    let names: Vec<String> = ["c0", "c1", "i0"]
        .iter()
        .map(|v| format!("{v}.{suffix}"))
        .collect();
    let values = match config.variant {
        Variant::Acceleration => accelerations,
        Variant::Velocity => velocities,
    };
    let scene_id = format!("convoy_{suffix}_{:06}", sim_seed);
    let scene = TimeSeriesScene::new(scene_id, config.variant, names.clone(), f, values)?;
    let mut ground_truth = SummaryGraph::new(names);
    ground_truth.add_edge(0, 1)?;

    Ok(Some(GeneratedScene {
        scene,
        ground_truth,
        seed: sim_seed,
        realized_noise: noise,
        duration_s: n_samples as f64 / f,
        convoy_goal_times_s: lead_schedule.iter().map(|&(t, _)| t).collect(),
        independent_goal_times_s: independent_schedule.iter().map(|&(t, _)| t).collect(),
        regenerations: 0,
    }))
}
