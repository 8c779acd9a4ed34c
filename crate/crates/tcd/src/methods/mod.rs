//! Causal discovery methods: each maps a scene and a configuration to a
//! directed summary graph over the scene's variables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LaggedCoefficients, SummaryGraph};
use crate::scene::TimeSeriesScene;

mod dynotears;
mod mvgc;
mod pcmci;
mod pwgc;
mod random;
#[cfg(test)]
pub(crate) mod tests_support;
mod timino;
mod varlingam;

pub use dynotears::dynotears_discover;
pub use mvgc::mvgc_discover;
pub use pcmci::pcmci_discover;
pub use pwgc::pwgc_discover;
pub use random::random_discover;
pub use timino::timino_discover;
pub use varlingam::{direct_lingam_order, varlingam_discover, CausalOrdering};

/// The available discovery methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pwgc,
    Mvgc,
    Varlingam,
    Timino,
    Pcmci,
    Dynotears,
    Random,
}

impl Method {
    /// All methods, in canonical order.
    pub const ALL: [Method; 7] = [
        Method::Pwgc,
        Method::Mvgc,
        Method::Varlingam,
        Method::Timino,
        Method::Pcmci,
        Method::Dynotears,
        Method::Random,
    ];

    /// The identifier used on the command line and in config files.
    pub fn id(self) -> &'static str {
        match self {
            Method::Pwgc => "pwgc",
            Method::Mvgc => "mvgc",
            Method::Varlingam => "varlingam",
            Method::Timino => "timino",
            Method::Pcmci => "pcmci",
            Method::Dynotears => "dynotears",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Shared method configuration: significance level, lag window, and
/// method-specific overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    /// Significance level in (0, 1].
    pub alpha: f64,
    /// Maximum time lag in samples, at least 1.
    pub max_lag: usize,
    /// Method-specific numeric parameters. Recognized keys:
    /// `lambda_a` (dynotears penalty, default 0.05) and `edge_threshold`
    /// (dynotears coefficient threshold, default 0.01).
    #[serde(default)]
    pub method_params: BTreeMap<String, f64>,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            alpha: 0.05,
            max_lag: 25,
            method_params: BTreeMap::new(),
        }
    }
}

impl MethodConfig {
    /// Checks the invariants: alpha in (0, 1], max lag at least 1.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.max_lag == 0 {
            return Err(Error::InvalidInput("max lag must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn param(&self, key: &str, default: f64) -> f64 {
        self.method_params.get(key).copied().unwrap_or(default)
    }
}

/// One significance test behind a potential link, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTest {
    pub source: usize,
    pub target: usize,
    /// Lag in samples; 0 when the method tests whole lag blocks at once.
    pub lag: usize,
    pub p_value: f64,
}

/// Per-run diagnostic record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Best score per ordered pair: a p-value for test-based methods, a
    /// coefficient magnitude for regression-based ones.
    pub edge_scores: BTreeMap<(usize, usize), f64>,
    /// Every individual link test the method ran, in a deterministic order.
    pub link_tests: Vec<LinkTest>,
    /// Free-form warnings: degenerate tests, non-convergence, and the like.
    pub notes: Vec<String>,
}

/// Result of one discovery run.
#[derive(Debug, Clone)]
pub struct DiscoveryOutcome {
    /// The inferred summary graph, nodes matching the scene's variables.
    pub graph: SummaryGraph,
    /// Lagged coefficient estimates, for methods that produce them.
    pub lagged: Option<LaggedCoefficients>,
    pub diagnostics: Diagnostics,
    /// True when the method declined to commit to a graph; implies an empty
    /// edge set.
    pub abstained: bool,
}

impl DiscoveryOutcome {
    pub(crate) fn new(graph: SummaryGraph) -> Self {
        DiscoveryOutcome {
            graph,
            lagged: None,
            diagnostics: Diagnostics::default(),
            abstained: false,
        }
    }
}

/// Runs the chosen method. `seed` only affects the random baseline; every
/// method is deterministic given `(scene, config, seed)`.
pub fn discover(
    method: Method,
    scene: &TimeSeriesScene,
    config: &MethodConfig,
    seed: u64,
) -> Result<DiscoveryOutcome> {
    config.validate()?;
    match method {
        Method::Pwgc => pwgc_discover(scene, config),
        Method::Mvgc => mvgc_discover(scene, config),
        Method::Varlingam => varlingam_discover(scene, config),
        Method::Timino => timino_discover(scene, config),
        Method::Pcmci => pcmci_discover(scene, config),
        Method::Dynotears => dynotears_discover(scene, config),
        Method::Random => random_discover(scene, config, seed),
    }
}

/// Insufficient-sample guard shared by the methods: flags `T ≤ min_t` with an
/// error stating the minimum usable length.
pub(crate) fn require_samples(scene: &TimeSeriesScene, min_exclusive: usize) -> Result<()> {
    if scene.n_samples() <= min_exclusive {
        return Err(Error::InsufficientSamples {
            required: min_exclusive + 1,
            actual: scene.n_samples(),
        });
    }
    Ok(())
}

/// Centered copy of a scene, shared preprocessing for every fit.
pub(crate) fn centered(scene: &TimeSeriesScene) -> TimeSeriesScene {
    TimeSeriesScene::new(
        scene.scene_id.clone(),
        scene.variant,
        scene.variable_names.clone(),
        scene.sample_rate_hz,
        scene.centered_values(),
    )
    .expect("centering preserves scene invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_identifiers_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_str(m.id()).unwrap(), m);
        }
        assert!(matches!(
            Method::from_str("granger"),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(MethodConfig::default().validate().is_ok());
        let mut bad = MethodConfig::default();
        bad.alpha = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = MethodConfig::default();
        bad.alpha = 1.5;
        assert!(bad.validate().is_err());
        let mut bad = MethodConfig::default();
        bad.max_lag = 0;
        assert!(bad.validate().is_err());
    }
}
