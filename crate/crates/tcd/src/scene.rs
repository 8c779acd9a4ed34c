//! Multivariate time-series scenes and their CSV representation.
//!
//! A scene is a uniformly sampled recording of named variables, e.g. the
//! acceleration traces of the two convoy vehicles. Scenes are stored
//! column-per-variable and round-trip losslessly through CSV.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which per-vehicle signal a scene carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Acceleration traces.
    Acceleration,
    /// Velocity traces.
    Velocity,
}

impl Variant {
    /// Suffix appended to vehicle names in CSV headers (`"a"` or `"v"`).
    pub fn suffix(self) -> &'static str {
        match self {
            Variant::Acceleration => "a",
            Variant::Velocity => "v",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Acceleration => write!(f, "acceleration"),
            Variant::Velocity => write!(f, "velocity"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acceleration" | "accel" | "a" => Ok(Variant::Acceleration),
            "velocity" | "vel" | "v" => Ok(Variant::Velocity),
            other => Err(Error::InvalidInput(format!(
                "unknown variant {other:?}; expected \"acceleration\" or \"velocity\""
            ))),
        }
    }
}

/// A uniformly sampled multivariate time series.
///
/// Values are stored as a `T x N` matrix: one row per sample, one column per
/// variable. All values are finite, variable names are unique and non-empty,
/// and the sample rate is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesScene {
    /// Identifier for reports; derived from the file stem on load.
    pub scene_id: String,
    /// Which signal the columns carry.
    pub variant: Variant,
    /// Unique, non-empty variable names, one per column.
    pub variable_names: Vec<String>,
    /// Samples per second.
    pub sample_rate_hz: f64,
    values: DMatrix<f64>,
}

impl TimeSeriesScene {
    /// Builds a scene, validating shape and value invariants.
    pub fn new(
        scene_id: impl Into<String>,
        variant: Variant,
        variable_names: Vec<String>,
        sample_rate_hz: f64,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        if variable_names.is_empty() {
            return Err(Error::InvalidInput("scene has no variables".into()));
        }
        if values.ncols() != variable_names.len() {
            return Err(Error::InvalidInput(format!(
                "{} variable names but {} value columns",
                variable_names.len(),
                values.ncols()
            )));
        }
        if values.nrows() == 0 {
            return Err(Error::InvalidInput("scene has no samples".into()));
        }
        for (i, name) in variable_names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::InvalidInput(format!("variable {i} has an empty name")));
            }
            if variable_names[..i].contains(name) {
                return Err(Error::InvalidInput(format!("duplicate variable name {name:?}")));
            }
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("scene contains a non-finite value".into()));
        }
        Ok(TimeSeriesScene {
            scene_id: scene_id.into(),
            variant,
            variable_names,
            sample_rate_hz,
            values,
        })
    }

    /// Number of samples `T`.
    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    /// Number of variables `N`.
    pub fn n_vars(&self) -> usize {
        self.values.ncols()
    }

    /// The full `T x N` value matrix.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// One variable's trace as a vector.
    pub fn column(&self, var: usize) -> Vec<f64> {
        self.values.column(var).iter().copied().collect()
    }

    /// Index of a variable by name.
    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variable_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidInput(format!("no variable named {name:?}")))
    }

    /// Copy of the value matrix with each column shifted to zero mean.
    ///
    /// Discovery methods fit on centered data instead of carrying intercept
    /// terms, so regression coefficients refer to deviations from the mean.
    pub fn centered_values(&self) -> DMatrix<f64> {
        let mut out = self.values.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            col.add_scalar_mut(-mean);
        }
        out
    }

    /// Duration of the recording in seconds, `(T - 1) / rate`.
    pub fn duration_s(&self) -> f64 {
        (self.n_samples() as f64 - 1.0) / self.sample_rate_hz
    }
}

/// Loads a scene from CSV: header of variable names, then one row per sample.
///
/// The scene id is the file stem; the variant is inferred from the header
/// (all names ending in `.v` mean velocity, otherwise acceleration). Parse
/// failures report the offending line.
pub fn load_scene_csv(path: impl AsRef<Path>, sample_rate_hz: f64) -> Result<TimeSeriesScene> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&shown, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io(&shown, e))?,
        None => {
            return Err(Error::Parse {
                path: shown,
                line: 1,
                message: "file is empty; expected a header row".into(),
            })
        }
    };
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(&shown, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::Parse {
                path: shown,
                line: idx + 1,
                message: format!("expected {} fields, found {}", names.len(), fields.len()),
            });
        }
        let mut row = Vec::with_capacity(fields.len());
        for field in fields {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: shown.clone(),
                line: idx + 1,
                message: format!("cannot parse {field:?} as a real number"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: shown,
            line: 2,
            message: "no data rows after the header".into(),
        });
    }

    let variant = if !names.is_empty() && names.iter().all(|n| n.ends_with(".v") || n == "v") {
        Variant::Velocity
    } else {
        Variant::Acceleration
    };
    let scene_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into());
    let values = DMatrix::from_row_iterator(rows.len(), names.len(), rows.into_iter().flatten());
    TimeSeriesScene::new(scene_id, variant, names, sample_rate_hz, values)
}

/// Writes a scene as CSV with LF line endings.
///
/// Floats are written with the shortest representation that parses back to
/// the identical value, so save/load round-trips are exact.
pub fn save_scene_csv(scene: &TimeSeriesScene, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(&shown, e))?,
    );
    write_scene_csv(scene, &mut out).map_err(|e| Error::io(&shown, e))
}

fn write_scene_csv(scene: &TimeSeriesScene, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", scene.variable_names.join(","))?;
    let mut line = String::new();
    for r in 0..scene.n_samples() {
        line.clear();
        for c in 0..scene.n_vars() {
            if c > 0 {
                line.push(',');
            }
            // `{}` on f64 is the shortest string that round-trips.
            line.push_str(&format!("{}", scene.values()[(r, c)]));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene_from_rows(names: &[&str], rows: &[&[f64]]) -> TimeSeriesScene {
        let values = DMatrix::from_row_iterator(
            rows.len(),
            names.len(),
            rows.iter().flat_map(|r| r.iter().copied()),
        );
        TimeSeriesScene::new(
            "test",
            Variant::Velocity,
            names.iter().map(|s| s.to_string()).collect(),
            10.0,
            values,
        )
        .unwrap()
    }

    #[test]
    fn rejects_duplicate_names() {
        let values = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 3.0]);
        let err = TimeSeriesScene::new(
            "dup",
            Variant::Velocity,
            vec!["v".into(), "v".into()],
            10.0,
            values,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_non_finite_values() {
        let values = DMatrix::from_row_slice(2, 1, &[0.0, f64::NAN]);
        assert!(TimeSeriesScene::new("nan", Variant::Velocity, vec!["v".into()], 10.0, values)
            .is_err());
    }

    #[test]
    fn rejects_bad_sample_rate() {
        let values = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(
            TimeSeriesScene::new("rate", Variant::Velocity, vec!["v".into()], 0.0, values.clone())
                .is_err()
        );
        assert!(
            TimeSeriesScene::new("rate", Variant::Velocity, vec!["v".into()], -1.0, values)
                .is_err()
        );
    }

    #[test]
    fn one_by_one_scene_serializes_minimally() {
        let scene = scene_from_rows(&["v"], &[&[0.0]]);
        let mut buf = Vec::new();
        write_scene_csv(&scene, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "v\n0\n");
    }

    #[test]
    fn load_reports_offending_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1.0,2.0\n3.0,oops\n").unwrap();
        let err = load_scene_csv(&path, 10.0).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "a,b\n1.0\n").unwrap();
        let err = load_scene_csv(&path, 10.0).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn load_rejects_empty_body() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "a,b\n").unwrap();
        assert!(load_scene_csv(&path, 10.0).is_err());
    }

    #[test]
    fn variant_inferred_from_header() {
        let dir = tempfile::tempdir().unwrap();
        let vel = dir.path().join("vel.csv");
        std::fs::write(&vel, "c0.v,c1.v\n1,2\n3,4\n").unwrap();
        assert_eq!(load_scene_csv(&vel, 10.0).unwrap().variant, Variant::Velocity);
        let acc = dir.path().join("acc.csv");
        std::fs::write(&acc, "c0.a,c1.a\n1,2\n3,4\n").unwrap();
        assert_eq!(load_scene_csv(&acc, 10.0).unwrap().variant, Variant::Acceleration);
    }

    #[test]
    fn centered_values_have_zero_mean() {
        let scene = scene_from_rows(&["x", "y"], &[&[1.0, 10.0], &[2.0, 20.0], &[6.0, 30.0]]);
        let centered = scene.centered_values();
        for c in 0..2 {
            let mean: f64 = centered.column(c).iter().sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            fn arb_scene()(n_vars in 1usize..5, n_rows in 1usize..20)(
                values in proptest::collection::vec(
                    prop_oneof![
                        any::<f64>().prop_filter("finite", |v| v.is_finite()),
                        -1e3f64..1e3,
                        Just(0.0),
                    ],
                    n_vars * n_rows,
                ),
                n_vars in Just(n_vars),
                n_rows in Just(n_rows),
            ) -> TimeSeriesScene {
                let names = (0..n_vars).map(|i| format!("x{i}")).collect();
                let matrix = DMatrix::from_row_iterator(n_rows, n_vars, values);
                TimeSeriesScene::new("prop", Variant::Acceleration, names, 10.0, matrix).unwrap()
            }
        }

        proptest! {
            #[test]
            fn csv_round_trip_is_exact(scene in arb_scene()) {
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("prop.csv");
                save_scene_csv(&scene, &path).unwrap();
                let loaded = load_scene_csv(&path, scene.sample_rate_hz).unwrap();
                prop_assert_eq!(&loaded.variable_names, &scene.variable_names);
                prop_assert_eq!(loaded.values(), scene.values());
            }
        }
    }
}
