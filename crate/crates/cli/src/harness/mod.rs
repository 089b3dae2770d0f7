//! Experiment drivers producing CSV summaries and JSON-lines raw records.
//!
//! Every case derives its random stream from the master seed, the experiment
//! label, and the case index, so any single case can be replayed in isolation
//! and thread count never changes results.

mod attacks;
mod curves;

pub use attacks::{run_ea_compare, run_obfuscated, AttackRecord, CompareCell, CompareReport, ObfuscatedCell, ObfuscatedRaw, ObfuscatedReport};
pub use curves::{
    run_aux_ablation, run_connectivity, run_convergence, run_transfer, AuxCell, AuxRaw, AuxReport,
    ConnectivityCell, ConnectivityRaw, ConnectivityReportOut, ConvergenceCell, ConvergenceDensityCell,
    ConvergenceRaw, ConvergenceReport, TransferCell, TransferRaw, TransferReport,
};

use advpath_core::bezier::Setting;
use advpath_core::geometry::{clip_box, Norm};
use advpath_core::model::{Classifier, Dataset, Mlp};
use advpath_core::pgd::{pgd_with_restarts, PgdOutcome};
use advpath_core::rng::{derive_seed, Rng};
use advpath_core::vector::Vector;
use serde::Serialize;

use crate::config::Config;

/// Everything an experiment needs: the trained model, the dataset, and the
/// run configuration (including the master seed).
pub struct Context<'a> {
    pub model: &'a Mlp,
    pub data: &'a Dataset,
    pub config: &'a Config,
}

/// Mean and sample standard deviation (n−1 denominator; 0 for n < 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> MeanStd {
    if values.is_empty() {
        return MeanStd { mean: f64::NAN, std: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return MeanStd { mean, std: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    MeanStd { mean, std: var.sqrt() }
}

/// Indices of samples the model classifies correctly, in dataset order.
pub fn correct_indices(model: &impl Classifier, samples: &[(Vector, usize)]) -> Vec<usize> {
    (0..samples.len()).filter(|&i| model.predict(&samples[i].0) == samples[i].1).collect()
}

/// Correctly classified samples grouped by class.
pub struct CasePool<'a> {
    samples: &'a [(Vector, usize)],
    by_class: Vec<Vec<usize>>,
}

impl<'a> CasePool<'a> {
    pub fn new(model: &impl Classifier, samples: &'a [(Vector, usize)], class_count: usize) -> Self {
        let mut by_class = vec![Vec::new(); class_count];
        for idx in correct_indices(model, samples) {
            by_class[samples[idx].1].push(idx);
        }
        Self { samples, by_class }
    }

    pub fn total(&self) -> usize {
        self.by_class.iter().map(Vec::len).sum()
    }

    /// Draws the images of one case: one for Setting A, a same-class pair for
    /// B, a cross-class pair for C. Returns `None` when the pool cannot supply
    /// the required structure.
    pub fn draw_case(&self, setting: Setting, rng: &mut Rng) -> Option<Vec<(Vector, usize)>> {
        match setting {
            Setting::A => {
                let eligible: Vec<usize> =
                    (0..self.by_class.len()).filter(|&c| !self.by_class[c].is_empty()).collect();
                if eligible.is_empty() {
                    return None;
                }
                let class = eligible[rng.below(eligible.len())];
                let idx = self.by_class[class][rng.below(self.by_class[class].len())];
                Some(vec![self.samples[idx].clone()])
            }
            Setting::B => {
                let eligible: Vec<usize> =
                    (0..self.by_class.len()).filter(|&c| self.by_class[c].len() >= 2).collect();
                if eligible.is_empty() {
                    return None;
                }
                let class = eligible[rng.below(eligible.len())];
                let members = &self.by_class[class];
                let picks = rng.sample_indices(members.len(), 2);
                Some(vec![
                    self.samples[members[picks[0]]].clone(),
                    self.samples[members[picks[1]]].clone(),
                ])
            }
            Setting::C => {
                let eligible: Vec<usize> =
                    (0..self.by_class.len()).filter(|&c| !self.by_class[c].is_empty()).collect();
                if eligible.len() < 2 {
                    return None;
                }
                let picks = rng.sample_indices(eligible.len(), 2);
                let (c1, c2) = (eligible[picks[0]], eligible[picks[1]]);
                let i1 = self.by_class[c1][rng.below(self.by_class[c1].len())];
                let i2 = self.by_class[c2][rng.below(self.by_class[c2].len())];
                Some(vec![self.samples[i1].clone(), self.samples[i2].clone()])
            }
        }
    }
}

/// PGD endpoints for a case: two runs on the single image in Setting A, one
/// run per image otherwise. Returns `None` when any endpoint fails to fool the
/// model within the restart budget.
pub fn case_endpoints(
    ctx: &Context<'_>,
    cases: &[(Vector, usize)],
    budget: advpath_core::geometry::Budget,
    seed: u64,
    ledger: &mut advpath_core::ledger::QueryLedger,
) -> Option<(Vector, Vector)> {
    let cfg = ctx.config.pgd.pgd_config(budget, 0);
    let restarts = ctx.config.pgd.restarts;
    let endpoint = |x: &Vector, y: usize, s: u64, ledger: &mut _| -> PgdOutcome {
        pgd_with_restarts(ctx.model, x, y, &cfg, s, restarts, ledger).0
    };
    let s1 = derive_seed(seed, "endpoint", 1);
    let s2 = derive_seed(seed, "endpoint", 2);
    let (first, second) = match cases {
        [(x, y)] => (endpoint(x, *y, s1, ledger), endpoint(x, *y, s2, ledger)),
        [(x1, y1), (x2, y2)] => (endpoint(x1, *y1, s1, ledger), endpoint(x2, *y2, s2, ledger)),
        _ => unreachable!("cases hold one or two images"),
    };
    (first.success && second.success).then_some((first.delta, second.delta))
}

/// Whether `x + δ`, clipped to the input box, is misclassified.
pub fn fools(model: &impl Classifier, delta: &Vector, x: &Vector, y: usize) -> bool {
    model.predict(&clip_box(&x.add(delta), 0.0, 1.0)) != y
}

/// Sub-seed for one case of one experiment cell.
pub fn cell_seed(master: u64, experiment: &str, setting: Setting, norm: Norm, index: u64) -> u64 {
    let label = format!("{experiment}/{}/{}", setting.name(), norm.name());
    derive_seed(master, &label, index)
}

/// The norms an experiment runs over, honoring a `--norm` restriction.
pub fn selected_norms(filter: Option<Norm>) -> Vec<Norm> {
    match filter {
        Some(norm) => vec![norm],
        None => Norm::ALL.to_vec(),
    }
}
