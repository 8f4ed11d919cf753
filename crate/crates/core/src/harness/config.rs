use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::synthetic::generate_synthetic_instance;
use crate::env::ProblemInstance;
use crate::error::{Error, Result};
use crate::linear::baselines::{DEFAULT_DELTA, DEFAULT_SIGMA};
use crate::linear::{
    generate_features, CascadeLinTs, CascadeLinUcb, FeatureMatrix, LinTsCascade, Matrix,
};
use crate::policies::{CascadeKlUcb, CascadeUcb1, Cts, FixedList, Policy, TsCascade};
use crate::rng;

/// Default value of lambda for LinTS-Cascade; 0.08 is the other preset.
pub const LINTS_LAMBDA_PRESETS: [f64; 2] = [0.04, 0.08];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    Explicit {
        #[serde(rename = "K")]
        k: usize,
        w: Vec<f64>,
    },
    Synthetic {
        #[serde(rename = "L")]
        l: usize,
        #[serde(rename = "K")]
        k: usize,
        #[serde(default = "default_w1")]
        w1: f64,
        #[serde(default = "default_w2")]
        w2: f64,
        #[serde(default = "default_w3")]
        w3: f64,
        /// Rows `m` of the historical click matrix used to learn features.
        #[serde(default)]
        training_rows: Option<usize>,
    },
    File {
        path: PathBuf,
    },
}

fn default_w1() -> f64 {
    0.2
}
fn default_w2() -> f64 {
    0.1
}
fn default_w3() -> f64 {
    0.05
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PolicySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// LinTS-Cascade exploration multiplier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Tuning parameter of CascadeLinUCB / CascadeLinTS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Confidence level of CascadeLinUCB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Feature dimension for linear policies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

impl PolicySpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Self::default()
        }
    }

    /// Display name; `lints-cascade(0.04)` style for LinTS-Cascade.
    pub fn display_name(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match self.kind() {
            Ok(PolicyKind::LinTsCascade) => {
                format!("lints-cascade({})", self.lambda().unwrap_or(f64::NAN))
            }
            _ => self.name.clone(),
        }
    }

    fn kind(&self) -> Result<PolicyKind> {
        let base = self.name.split('(').next().unwrap_or("").trim();
        Ok(match base {
            "ts-cascade" => PolicyKind::TsCascade,
            "cts" => PolicyKind::Cts,
            "cascade-ucb1" => PolicyKind::CascadeUcb1,
            "cascade-klucb" => PolicyKind::CascadeKlUcb,
            "lints-cascade" => PolicyKind::LinTsCascade,
            "cascade-linucb" => PolicyKind::CascadeLinUcb,
            "cascade-lints" => PolicyKind::CascadeLinTs,
            "oracle" => PolicyKind::Oracle,
            other => return Err(Error::Config(format!("unknown policy {other:?}"))),
        })
    }

    /// Explicit `lambda`, else a value embedded in the name, else the first preset.
    fn lambda(&self) -> Result<f64> {
        if let Some(l) = self.lambda {
            return Ok(l);
        }
        match self.name.split_once('(') {
            Some((_, rest)) => rest
                .trim_end_matches(')')
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("cannot read lambda from {:?}", self.name))),
            None => Ok(LINTS_LAMBDA_PRESETS[0]),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(
            self.kind(),
            Ok(PolicyKind::LinTsCascade | PolicyKind::CascadeLinUcb | PolicyKind::CascadeLinTs)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PolicyKind {
    TsCascade,
    Cts,
    CascadeUcb1,
    CascadeKlUcb,
    LinTsCascade,
    CascadeLinUcb,
    CascadeLinTs,
    Oracle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    /// Feature file for linear policies when the instance has no training data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    pub policies: Vec<PolicySpec>,
    /// Horizon `T`.
    pub horizon: u64,
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Number of geometrically spaced trajectory checkpoints.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `CASCADE_BANDITS_THREADS` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

fn default_checkpoints() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        // Relative paths inside a config resolve against the config's directory.
        let base = path.parent().unwrap_or(Path::new("."));
        if let InstanceSpec::File { path: p } = &mut cfg.instance {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.features.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("no policies configured".into()));
        }
        for p in &self.policies {
            p.kind()?;
        }
        Ok(())
    }
}

/// An instance plus whatever the linear policies need to build features.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub instance: ProblemInstance,
    training: Option<Matrix>,
    feature_file: Option<Arc<FeatureMatrix>>,
}

impl PreparedInstance {
    pub fn new(instance: ProblemInstance) -> Self {
        Self {
            instance,
            training: None,
            feature_file: None,
        }
    }

    pub fn with_training(mut self, training: Matrix) -> Self {
        self.training = Some(training);
        self
    }

    pub fn with_features(mut self, features: FeatureMatrix) -> Self {
        self.feature_file = Some(Arc::new(features));
        self
    }

    pub fn training(&self) -> Option<&Matrix> {
        self.training.as_ref()
    }

    /// Features of dimension `d`, from the feature file or learned from the
    /// training matrix.
    pub fn features(&self, d: Option<usize>) -> Result<Arc<FeatureMatrix>> {
        if let Some(f) = &self.feature_file {
            if d.is_some_and(|d| d != f.d()) {
                return Err(Error::Config(format!(
                    "policy asks for d={} but the feature file has d={}",
                    d.unwrap_or(0),
                    f.d()
                )));
            }
            if f.l() != self.instance.l() {
                return Err(Error::Config(format!(
                    "feature file has {} items, instance has {}",
                    f.l(),
                    self.instance.l()
                )));
            }
            return Ok(f.clone());
        }
        let training = self.training.as_ref().ok_or_else(|| {
            Error::Config("linear policy needs features or a training matrix".into())
        })?;
        let d = d.ok_or_else(|| Error::Config("linear policy needs d".into()))?;
        Ok(Arc::new(generate_features(training, d, self.instance.k())?))
    }
}

/// Resolves the configured instance. Synthetic instances draw from a stream
/// derived from `base_seed` that no run uses.
pub fn prepare_instance(cfg: &ExperimentConfig) -> Result<PreparedInstance> {
    let mut prepared = match &cfg.instance {
        InstanceSpec::Explicit { k, w } => {
            PreparedInstance::new(ProblemInstance::new(w.clone(), *k)?)
        }
        InstanceSpec::File { path } => PreparedInstance::new(ProblemInstance::from_file(path)?),
        InstanceSpec::Synthetic {
            l,
            k,
            w1,
            w2,
            w3,
            training_rows,
        } => {
            let seed = rng::mix_seed(cfg.base_seed, &[u64::MAX]);
            let s = generate_synthetic_instance(*l, *k, (*w1, *w2, *w3), *training_rows, seed)?;
            let p = PreparedInstance::new(s.instance);
            match s.training {
                Some(t) => p.with_training(t),
                None => p,
            }
        }
    };
    if let Some(path) = &cfg.features {
        let (fm, k) = FeatureMatrix::from_file(path)?;
        if k != prepared.instance.k() {
            return Err(Error::Config(format!(
                "feature file normalized for K={k}, instance has K={}",
                prepared.instance.k()
            )));
        }
        prepared = prepared.with_features(fm);
    }
    Ok(prepared)
}

/// Builds a fresh policy for `spec` on `prepared`.
///
/// Linear policies get their features through `features`, which lets callers
/// share one matrix across runs.
pub fn build_policy(
    spec: &PolicySpec,
    prepared: &PreparedInstance,
    features: Option<Arc<FeatureMatrix>>,
) -> Result<Box<dyn Policy>> {
    let inst = &prepared.instance;
    let (l, k) = (inst.l(), inst.k());
    let need_features = || -> Result<Arc<FeatureMatrix>> {
        match &features {
            Some(f) => Ok(f.clone()),
            None => prepared.features(spec.d),
        }
    };
    Ok(match spec.kind()? {
        PolicyKind::TsCascade => Box::new(TsCascade::new(l, k)),
        PolicyKind::Cts => Box::new(Cts::new(l, k)),
        PolicyKind::CascadeUcb1 => Box::new(CascadeUcb1::new(l, k)),
        PolicyKind::CascadeKlUcb => Box::new(CascadeKlUcb::new(l, k)),
        PolicyKind::Oracle => Box::new(FixedList::new(inst.optimal_list().clone())),
        PolicyKind::LinTsCascade => {
            let lambda = spec.lambda()?;
            if lambda.is_nan() || lambda <= 0.0 {
                return Err(Error::Config(format!(
                    "lambda must be positive, got {lambda}"
                )));
            }
            Box::new(LinTsCascade::new(need_features()?, k, lambda))
        }
        PolicyKind::CascadeLinUcb => {
            let delta = spec.delta.unwrap_or(DEFAULT_DELTA);
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::Config(format!(
                    "delta must lie in (0, 1), got {delta}"
                )));
            }
            Box::new(CascadeLinUcb::new(
                need_features()?,
                k,
                spec.sigma.unwrap_or(DEFAULT_SIGMA),
                delta,
            ))
        }
        PolicyKind::CascadeLinTs => Box::new(CascadeLinTs::new(
            need_features()?,
            k,
            spec.sigma.unwrap_or(DEFAULT_SIGMA),
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let json = r#"{
            "instance": {"kind": "synthetic", "L": 16, "K": 2, "training_rows": 50},
            "policies": [{"name": "ts-cascade"}, {"name": "lints-cascade(0.08)", "d": 2}],
            "horizon": 100,
            "runs": 2
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.checkpoints, 100);
        assert_eq!(cfg.policies[1].display_name(), "lints-cascade(0.08)");
        assert_eq!(
            PolicySpec::named("lints-cascade").display_name(),
            "lints-cascade(0.04)"
        );
        let prepared = prepare_instance(&cfg).unwrap();
        assert!(prepared.training().is_some());
        for p in &cfg.policies {
            build_policy(p, &prepared, None).unwrap();
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let base = ExperimentConfig {
            instance: InstanceSpec::Explicit {
                k: 1,
                w: vec![0.1, 0.2],
            },
            features: None,
            policies: vec![PolicySpec::named("cts")],
            horizon: 10,
            runs: 1,
            base_seed: 0,
            checkpoints: 10,
            output_dir: None,
            threads: None,
        };
        base.validate().unwrap();
        let mut c = base.clone();
        c.runs = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.horizon = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.policies = vec![PolicySpec::named("greedy")];
        assert!(c.validate().is_err());

        // Linear policy without any feature source.
        let prepared = prepare_instance(&base).unwrap();
        let spec = PolicySpec {
            d: Some(1),
            ..PolicySpec::named("cascade-linucb")
        };
        assert!(matches!(
            build_policy(&spec, &prepared, None),
            Err(Error::Config(_))
        ));
    }
}
