use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::env::{AlgorithmSpec, ArrivalConfig};
use crate::params::ParameterSet;

/// Single-user mode: each replication draws one true type and plays one
/// learner against it for `horizon` slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleUserConfig {
    pub true_type_distribution: Vec<f64>,
    pub horizon: u64,
}

impl SingleUserConfig {
    pub fn as_arrival(&self) -> ArrivalConfig {
        ArrivalConfig {
            num_users: 1,
            tau: self.horizon as usize,
            type_probs: self.true_type_distribution.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Setting {
    Arrival(ArrivalConfig),
    SingleUser(SingleUserConfig),
}

impl Setting {
    pub fn arrival(&self) -> ArrivalConfig {
        match self {
            Self::Arrival(a) => a.clone(),
            Self::SingleUser(s) => s.as_arrival(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_th: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recluster_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elite_only: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub name: String,
    /// Column value in the CSV; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub params: AlgorithmParams,
}

impl AlgorithmEntry {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    pub fn spec(&self) -> Result<AlgorithmSpec, String> {
        let p = &self.params;
        let need = |v: Option<usize>, key: &str| {
            v.ok_or_else(|| format!("algorithm `{}` requires params.{key}", self.name))
        };
        let need_delta = || {
            p.delta
                .ok_or_else(|| format!("algorithm `{}` requires params.delta", self.name))
        };
        Ok(match self.name.as_str() {
            "oracle" => AlgorithmSpec::Oracle,
            "fixed-arm" => AlgorithmSpec::FixedArm {
                arm: need(p.arm, "arm")?,
            },
            "ucb" => AlgorithmSpec::Ucb {
                elite_only: p.elite_only.unwrap_or(false),
            },
            "ucb-kt" => AlgorithmSpec::UcbKt {
                delta: p.delta.unwrap_or(0.0),
            },
            "ucb-on-types" => AlgorithmSpec::UcbOnTypes,
            "unif-clustering-ucb-et" => AlgorithmSpec::UnifClusteringEt {
                m0: need(p.m0, "m0")?,
                delta: need_delta()?,
            },
            "ucb-clustering-ucb-et" => AlgorithmSpec::UcbClusteringEt {
                m0: need(p.m0, "m0")?,
                delta: need_delta()?,
            },
            "clustering-ucb-continuous" => AlgorithmSpec::ContinuousClustering {
                m_th: p.m_th,
                recluster_every: p.recluster_every.unwrap_or(1),
            },
            other => {
                return Err(format!(
                    "unknown algorithm `{other}` (known: {})",
                    ALGORITHM_NAMES.join(", ")
                ))
            }
        })
    }
}

pub const ALGORITHM_NAMES: &[&str] = &[
    "oracle",
    "fixed-arm",
    "ucb",
    "ucb-kt",
    "ucb-on-types",
    "unif-clustering-ucb-et",
    "ucb-clustering-ucb-et",
    "clustering-ucb-continuous",
];

fn default_checkpoint_every() -> u64 {
    100
}

/// On-disk layout of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    parameter_set: ParameterSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arrival: Option<ArrivalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    single_user: Option<SingleUserConfig>,
    algorithms: Vec<AlgorithmEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<u64>,
    runs: usize,
    seed: u64,
    #[serde(default = "default_checkpoint_every")]
    checkpoint_every: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub parameter_set: ParameterSet,
    pub setting: Setting,
    pub algorithms: Vec<AlgorithmEntry>,
    pub runs: usize,
    pub seed: u64,
    pub checkpoint_every: u64,
}

impl ExperimentConfig {
    pub fn horizon(&self) -> u64 {
        match &self.setting {
            Setting::Arrival(a) => a.horizon(),
            Setting::SingleUser(s) => s.horizon,
        }
    }

    pub fn algorithm_specs(&self) -> Result<Vec<AlgorithmSpec>, String> {
        self.algorithms.iter().map(AlgorithmEntry::spec).collect()
    }

    /// Parses and validates a JSON config. Errors carry the 1-based line of
    /// the offending entry.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| HarnessError::Config {
            line: e.line(),
            message: e.to_string(),
        })?;
        let err = |key: &str, nth: usize, message: String| HarnessError::Config {
            line: line_of_key(text, key, nth),
            message,
        };
        let setting = match (file.arrival, file.single_user) {
            (Some(a), None) => Setting::Arrival(a),
            (None, Some(s)) => Setting::SingleUser(s),
            (Some(_), Some(_)) => {
                return Err(err(
                    "single_user",
                    0,
                    "give either `arrival` or `single_user`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(HarnessError::Config {
                    line: 1,
                    message: "missing `arrival` or `single_user`".into(),
                })
            }
        };
        let setting_key = match setting {
            Setting::Arrival(_) => "arrival",
            Setting::SingleUser(_) => "single_user",
        };
        let config = ExperimentConfig {
            parameter_set: file.parameter_set,
            setting,
            algorithms: file.algorithms,
            runs: file.runs,
            seed: file.seed,
            checkpoint_every: file.checkpoint_every,
        };
        if let Some(h) = file.horizon {
            if h != config.horizon() {
                return Err(err(
                    "horizon",
                    0,
                    format!("horizon {h} disagrees with the arrival setting ({})", config.horizon()),
                ));
            }
        }
        config
            .validate()
            .map_err(|(key, nth, message)| {
                let key = if key == "setting" { setting_key } else { key };
                err(key, nth, message)
            })?;
        Ok(config)
    }

    /// Returns `(json key, occurrence, message)` on failure.
    fn validate(&self) -> Result<(), (&'static str, usize, String)> {
        if self.runs == 0 {
            return Err(("runs", 0, "runs must be at least 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(("checkpoint_every", 0, "checkpoint_every must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(("algorithms", 0, "no algorithms listed".into()));
        }
        let arrival = self.setting.arrival();
        if arrival.type_probs.len() != self.parameter_set.n_types() {
            return Err((
                "setting",
                0,
                format!(
                    "type distribution has {} entries but the parameter set has {} types",
                    arrival.type_probs.len(),
                    self.parameter_set.n_types()
                ),
            ));
        }
        arrival.validate().map_err(|e| ("setting", 0, e.to_string()))?;
        for (i, entry) in self.algorithms.iter().enumerate() {
            let spec = entry.spec().map_err(|m| ("name", i, m))?;
            crate::env::check_algorithm(&self.parameter_set, &spec)
                .map_err(|e| ("name", i, format!("algorithm `{}`: {e}", entry.name)))?;
        }
        let mut labels: Vec<&str> = self.algorithms.iter().map(AlgorithmEntry::label).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(("algorithms", 0, format!("duplicate algorithm label `{}`", w[0])));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let (arrival, single_user) = match &self.setting {
            Setting::Arrival(a) => (Some(a.clone()), None),
            Setting::SingleUser(s) => (None, Some(s.clone())),
        };
        let file = ConfigFile {
            parameter_set: self.parameter_set.clone(),
            arrival,
            single_user,
            algorithms: self.algorithms.clone(),
            horizon: Some(self.horizon()),
            runs: self.runs,
            seed: self.seed,
            checkpoint_every: self.checkpoint_every,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Line of the `nth` occurrence of `"key"` in `text`, or 1 if absent.
fn line_of_key(text: &str, key: &str, nth: usize) -> usize {
    let needle = format!("\"{key}\"");
    text.match_indices(&needle)
        .nth(nth)
        .map(|(pos, _)| text[..pos].matches('\n').count() + 1)
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORACLE: &str = r#"{
  "parameter_set": [[0.6, 0.5], [0.5, 0.6]],
  "arrival": {"num_users": 3, "tau": 4, "type_probs": [0.5, 0.5]},
  "algorithms": [
    {"name": "oracle"},
    {"name": "ucb"}
  ],
  "runs": 2,
  "seed": 7
}"#;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::from_json(ORACLE).unwrap();
        assert_eq!(c.horizon(), 12);
        assert_eq!(c.checkpoint_every, 100);
        assert_eq!(c.algorithm_specs().unwrap()[0], AlgorithmSpec::Oracle);
    }

    #[test]
    fn unknown_algorithm_reports_its_line() {
        let text = ORACLE.replace("{\"name\": \"ucb\"}", "{\"name\": \"bogus\"}");
        match ExperimentConfig::from_json(&text) {
            Err(HarnessError::Config { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_required_param() {
        let text = ORACLE.replace("{\"name\": \"ucb\"}", "{\"name\": \"unif-clustering-ucb-et\", \"params\": {\"m0\": 4}}");
        match ExperimentConfig::from_json(&text) {
            Err(HarnessError::Config { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("delta"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_line() {
        let text = ORACLE.replace("\"runs\": 2,", "\"runs\": 2");
        match ExperimentConfig::from_json(&text) {
            Err(HarnessError::Config { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_probabilities_point_at_setting() {
        let text = ORACLE.replace("[0.5, 0.5]}", "[0.5, 0.6]}");
        match ExperimentConfig::from_json(&text) {
            Err(HarnessError::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trips() {
        let c = ExperimentConfig::from_json(ORACLE).unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
