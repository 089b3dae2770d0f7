//! Run configuration: TOML file plus command-line overrides.
//!
//! Every field has a default, so an empty config runs the full desk-scale
//! suite. Unknown keys are rejected to catch typos.

use std::path::{Path, PathBuf};

use advpath_core::evolution::{CrossoverKind, EaConfig};
use advpath_core::geometry::{Budget, Norm};
use advpath_core::model::SyntheticSpec;
use advpath_core::pgd::PgdConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Master seed; every sub-seed is derived from it.
    pub seed: u64,
    /// Worker threads for per-case parallelism. Results are identical for any
    /// value.
    pub threads: usize,
    /// Output directory; each command writes into a fresh subdirectory.
    pub out_dir: PathBuf,
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub budgets: BudgetsSection,
    pub pgd: PgdSection,
    pub bezier: BezierSection,
    pub ea: EaSection,
    pub experiments: ExperimentsSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 7,
            threads: 1,
            out_dir: PathBuf::from("runs"),
            dataset: DatasetSection::default(),
            model: ModelSection::default(),
            budgets: BudgetsSection::default(),
            pgd: PgdSection::default(),
            bezier: BezierSection::default(),
            ea: EaSection::default(),
            experiments: ExperimentsSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    pub dim: usize,
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub aux_per_class: usize,
    pub spread: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            dim: 256,
            classes: 8,
            train_per_class: 60,
            test_per_class: 40,
            aux_per_class: 50,
            spread: 0.12,
        }
    }
}

impl DatasetSection {
    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            dim: self.dim,
            class_count: self.classes,
            train_per_class: self.train_per_class,
            test_per_class: self.test_per_class,
            aux_per_class: self.aux_per_class,
            spread: self.spread,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { hidden: vec![32, 32], epochs: 25, lr: 0.05, batch: 16 }
    }
}

impl ModelSection {
    pub fn dims(&self, input: usize, classes: usize) -> Vec<usize> {
        let mut dims = vec![input];
        dims.extend(&self.hidden);
        dims.push(classes);
        dims
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetsSection {
    pub linf: f64,
    pub l2: f64,
    pub l1: f64,
}

impl Default for BudgetsSection {
    fn default() -> Self {
        Self { linf: 0.05, l2: 0.5, l1: 3.0 }
    }
}

impl BudgetsSection {
    pub fn budget(&self, norm: Norm) -> Budget {
        let epsilon = match norm {
            Norm::Linf => self.linf,
            Norm::L2 => self.l2,
            Norm::L1 => self.l1,
        };
        Budget::new(norm, epsilon)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PgdSection {
    pub steps: usize,
    /// Reseeded attempts per endpoint before a case counts as failed.
    pub restarts: usize,
}

impl Default for PgdSection {
    fn default() -> Self {
        Self { steps: 40, restarts: 5 }
    }
}

impl PgdSection {
    /// PGD configuration with the per-norm step-size rule.
    pub fn pgd_config(&self, budget: Budget, seed: u64) -> PgdConfig {
        let mut cfg = PgdConfig::standard(budget, seed);
        cfg.steps = self.steps;
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BezierSection {
    pub iterations: usize,
    pub t_samples: usize,
    pub lr: f64,
    pub w_main: f64,
    pub w_aux: f64,
    /// Evenly spaced interior points used for evaluation.
    pub eval_points: usize,
}

impl Default for BezierSection {
    fn default() -> Self {
        Self { iterations: 30, t_samples: 20, lr: 0.01, w_main: 1.0, w_aux: 0.5, eval_points: 50 }
    }
}

impl BezierSection {
    pub fn optimize_config(&self, seed: u64) -> advpath_core::bezier::OptimizeConfig {
        advpath_core::bezier::OptimizeConfig {
            iterations: self.iterations,
            t_samples: advpath_core::bezier::TSamples::Random(self.t_samples),
            lr: self.lr,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EaSection {
    pub population: usize,
    pub elites: usize,
    pub tournament: usize,
    pub mutation_prob: f64,
    /// σ as a fraction of ε.
    pub mutation_std_frac: f64,
    pub mutation_scale: f64,
    pub max_generations: usize,
}

impl Default for EaSection {
    fn default() -> Self {
        Self {
            population: 30,
            elites: 5,
            tournament: 3,
            mutation_prob: 0.2,
            mutation_std_frac: 0.02,
            mutation_scale: 1.0,
            max_generations: 1000,
        }
    }
}

impl EaSection {
    pub fn ea_config(&self, budget: Budget, crossover: CrossoverKind) -> EaConfig {
        let mut cfg = EaConfig::standard(budget, crossover);
        cfg.population = self.population;
        cfg.elites = self.elites;
        cfg.tournament_size = self.tournament;
        cfg.mutation_prob = self.mutation_prob;
        cfg.mutation_std = self.mutation_std_frac * budget.epsilon;
        cfg.mutation_scale = self.mutation_scale;
        cfg.max_generations = self.max_generations;
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentsSection {
    pub connectivity_cases: usize,
    pub transfer_curves: usize,
    pub transfer_test_images: usize,
    pub aux_counts: Vec<usize>,
    pub aux_cases: usize,
    pub repetitions: usize,
    pub convergence_epochs: Vec<usize>,
    pub convergence_aux: Vec<usize>,
    pub convergence_cases: usize,
    pub compare_samples: usize,
    pub obfuscated_samples: usize,
    pub obfuscated_levels: u32,
    /// Generation cap for the obfuscated experiment only; gradient-free search
    /// that has not succeeded by then almost never does, and the cap keeps the
    /// experiment fast.
    pub obfuscated_max_generations: usize,
}

impl Default for ExperimentsSection {
    fn default() -> Self {
        Self {
            connectivity_cases: 25,
            transfer_curves: 10,
            transfer_test_images: 40,
            aux_counts: vec![0, 5, 10, 15, 20, 25],
            aux_cases: 5,
            repetitions: 5,
            convergence_epochs: vec![10, 20, 30, 40, 50],
            convergence_aux: vec![0, 10, 25],
            convergence_cases: 3,
            compare_samples: 30,
            obfuscated_samples: 30,
            obfuscated_levels: 5,
            obfuscated_max_generations: 300,
        }
    }
}

/// Loads a TOML config file; unknown keys are an error naming the key.
pub fn load_config(path: &Path) -> anyhow::Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let config: Config = toml::from_str(&text)
        .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        let parsed: Config = toml::from_str("").unwrap();
        assert_eq!(parsed.seed, Config::default().seed);
        assert_eq!(parsed.dataset.dim, 256);
        assert_eq!(parsed.budgets.l1, 3.0);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = toml::from_str::<Config>("sede = 3").unwrap_err().to_string();
        assert!(err.contains("sede"), "error should name the bad key: {err}");
        let err = toml::from_str::<Config>("[dataset]\ndimm = 4").unwrap_err().to_string();
        assert!(err.contains("dimm"), "error should name the bad key: {err}");
    }

    #[test]
    fn partial_overrides_merge_with_defaults() {
        let parsed: Config = toml::from_str("seed = 99\n[budgets]\nlinf = 0.25").unwrap();
        assert_eq!(parsed.seed, 99);
        assert_eq!(parsed.budgets.linf, 0.25);
        assert_eq!(parsed.budgets.l2, 0.5);
    }
}
