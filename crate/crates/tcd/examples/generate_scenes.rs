//! Generates a small batch of synthetic convoy scenes and shows what comes
//! out: CSV files, a manifest, and per-scene ground truth.
//!
//! Each scene records three vehicles — a leader `c0`, a follower `c1`
//! reacting to it through a delayed, noisy controller, and an independent
//! driver `i0` — so the true causal graph is always the single edge
//! `c0 -> c1`. Run with:
//!
//! ```text
//! cargo run --example generate_scenes
//! ```

use tcd::scene::Variant;
use tcd::synth::{generate_batch, SceneGenConfig};

fn main() -> tcd::Result<()> {
    let out_dir = std::env::temp_dir().join("tcd_example_scenes");

    // The defaults are the benchmark settings: 10 Hz, 50-70 s scenes,
    // twelve velocity-goal changes per self-driven vehicle, and per-scene
    // noise levels drawn from the documented ranges.
    let config = SceneGenConfig {
        variant: Variant::Velocity,
        seed: 42,
        ..Default::default()
    };

    let scenes = generate_batch(&config, 5, &out_dir)?;

    println!("wrote {} scenes to {}", scenes.len(), out_dir.display());
    println!();
    println!(
        "{:<22} {:>6} {:>9} {:>8} {:>8} {:>7}",
        "scene", "seed", "duration", "sens", "act", "retries"
    );
    for generated in &scenes {
        println!(
            "{:<22} {:>6} {:>8.1}s {:>8.3} {:>8.3} {:>7}",
            generated.scene.scene_id,
            generated.seed,
            generated.duration_s,
            generated.realized_noise.proportional_sensory,
            generated.realized_noise.proportional_actuary,
            generated.regenerations,
        );
    }

    let first = &scenes[0];
    println!();
    println!(
        "each scene holds {} samples of {:?} at {} Hz",
        first.scene.n_samples(),
        first.scene.variable_names,
        first.scene.sample_rate_hz
    );
    println!(
        "goal changes: {} for the leader, {} for the independent driver",
        first.convoy_goal_times_s.len(),
        first.independent_goal_times_s.len()
    );
    println!("ground truth for every scene:\n{}", first.ground_truth);
    println!("a manifest.toml alongside the CSVs records seeds and noise draws");
    Ok(())
}
