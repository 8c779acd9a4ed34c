//! Temporal causal discovery on multivariate time series, with a synthetic
//! two-vehicle convoy benchmark.
//!
//! The crate has three layers:
//!
//! * **Discovery** ([`methods`]): six algorithms that map a recorded scene to
//!   a directed summary graph — pairwise and multivariate Granger tests,
//!   VAR-LiNGAM, a residual-independence sink search, PCMCI, and a
//!   continuous-optimization VAR pruner — plus a seeded random baseline.
//! * **Synthesis** ([`synth`]): a convoy simulator producing scenes with a
//!   known ground-truth graph (the leading vehicle drives the trailing one).
//! * **Evaluation** ([`eval`]): precision/recall/F1 scoring against ground
//!   truth and a batch harness that sweeps methods over significance levels
//!   and lag windows.
//!
//! Start with the runnable programs in `examples/`: `generate_scenes`,
//! `discover_scene`, `compare_methods`, `paper_sweep`, `preprocess_pipeline`,
//! and `score_graphs` each exercise one layer end to end.
//!
//! ```
//! use tcd::methods::{discover, Method, MethodConfig};
//! use tcd::synth::{generate_scene, SceneGenConfig};
//! use tcd::scene::Variant;
//!
//! let config = SceneGenConfig { seed: 7, variant: Variant::Velocity, ..Default::default() };
//! let generated = generate_scene(&config).unwrap();
//! let outcome = discover(Method::Mvgc, &generated.scene, &MethodConfig::default(), 0).unwrap();
//! println!("{}", outcome.graph);
//! ```

pub mod cli;
pub mod error;
pub mod eval;
pub mod graph;
pub mod methods;
pub mod preprocess;
pub mod scene;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{LaggedCoefficients, ResidualSeries, SummaryGraph};
pub use scene::{load_scene_csv, save_scene_csv, TimeSeriesScene, Variant};
