//! Attack-efficiency experiments: the crossover comparison and the
//! obfuscated-gradient defense.

use std::time::Instant;

use advpath_core::evolution::{run_ea, CrossoverKind};
use advpath_core::geometry::Norm;
use advpath_core::ledger::QueryLedger;
use advpath_core::model::{Classifier, DefenseWrapper};
use advpath_core::pgd::pgd;
use advpath_core::rng::{derive_seed, Rng};
use advpath_core::vector::Vector;
use serde::Serialize;

use super::{mean_std, Context, MeanStd};
use crate::parallel::run_indexed;

/// One attacked sample, as serialized to the JSON-lines raw output.
#[derive(Debug, Clone, Serialize)]
pub struct AttackRecord {
    pub sample_id: usize,
    pub method: String,
    pub norm: String,
    pub epsilon: f64,
    pub success: bool,
    pub generations: u64,
    pub forwards: u64,
    pub backwards: u64,
    pub seconds: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareCell {
    pub norm: String,
    pub method: String,
    pub attacked: usize,
    /// Success rate in percent.
    pub succ_rate: f64,
    /// Mean generations over successful attacks.
    pub avg_gen: MeanStd,
    /// Mean forward queries over all attempts.
    pub avg_forwards: MeanStd,
    /// Mean backward queries over all attempts.
    pub avg_backwards: MeanStd,
}

pub struct CompareReport {
    pub cells: Vec<CompareCell>,
    pub raw: Vec<AttackRecord>,
}

/// Correctly classified test samples for attacking, drawn by a seeded shuffle.
fn attack_samples(
    ctx: &Context<'_>,
    model: &impl Classifier,
    count: usize,
    label: &str,
) -> Vec<(Vector, usize)> {
    let mut order = super::correct_indices(model, &ctx.data.test);
    Rng::new(derive_seed(ctx.config.seed, label, 0)).shuffle(&mut order);
    order.into_iter().take(count).map(|i| ctx.data.test[i].clone()).collect()
}

/// Runs both evolutionary attacks on the same sample set per norm and reports
/// Table-style cells. Wall time goes to the raw records only, keeping the CSV
/// reproducible byte for byte.
pub fn run_ea_compare(ctx: &Context<'_>, norms: &[Norm]) -> CompareReport {
    let mut cells = Vec::new();
    let mut raw = Vec::new();
    for &norm in norms {
        let budget = ctx.config.budgets.budget(norm);
        let samples = attack_samples(
            ctx,
            ctx.model,
            ctx.config.experiments.compare_samples,
            &format!("compare/samples/{}", norm.name()),
        );
        for crossover in [CrossoverKind::Uniform, CrossoverKind::Bezier] {
            let ea = ctx.config.ea.ea_config(budget, crossover);
            let records: Vec<AttackRecord> =
                run_indexed(samples.len(), ctx.config.threads, |i| {
                    let (x, y) = &samples[i];
                    let seed = derive_seed(
                        ctx.config.seed,
                        &format!("compare/{}/{}", norm.name(), crossover.name()),
                        i as u64,
                    );
                    let mut ledger = QueryLedger::new();
                    let start = Instant::now();
                    let result = run_ea(ctx.model, x, *y, &ea, seed, &mut ledger);
                    AttackRecord {
                        sample_id: i,
                        method: crossover.name().to_string(),
                        norm: norm.name().to_string(),
                        epsilon: budget.epsilon,
                        success: result.success,
                        generations: result.generations,
                        forwards: ledger.forwards(),
                        backwards: ledger.backwards(),
                        seconds: start.elapsed().as_secs_f64(),
                        seed,
                    }
                });
            cells.push(summarize_cell(norm, crossover.name(), &records));
            raw.extend(records);
        }
    }
    CompareReport { cells, raw }
}

fn summarize_cell(norm: Norm, method: &str, records: &[AttackRecord]) -> CompareCell {
    let successes: Vec<&AttackRecord> = records.iter().filter(|r| r.success).collect();
    let gens: Vec<f64> = successes.iter().map(|r| r.generations as f64).collect();
    let forwards: Vec<f64> = records.iter().map(|r| r.forwards as f64).collect();
    let backwards: Vec<f64> = records.iter().map(|r| r.backwards as f64).collect();
    CompareCell {
        norm: norm.name().to_string(),
        method: method.to_string(),
        attacked: records.len(),
        succ_rate: 100.0 * successes.len() as f64 / records.len().max(1) as f64,
        avg_gen: mean_std(&gens),
        avg_forwards: mean_std(&forwards),
        avg_backwards: mean_std(&backwards),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ObfuscatedRaw {
    pub sample_id: usize,
    pub method: String,
    pub levels: Option<u32>,
    pub success: bool,
    pub forwards: u64,
    pub backwards: u64,
    pub seconds: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObfuscatedCell {
    pub method: String,
    pub levels: Option<u32>,
    pub attacked: usize,
    pub successes: usize,
    /// Attack success rate in percent.
    pub asr: f64,
}

pub struct ObfuscatedReport {
    pub cells: Vec<ObfuscatedCell>,
    pub raw: Vec<ObfuscatedRaw>,
}

/// PGD versus the Bézier-crossover attack against the input-quantization
/// defense, over samples the *wrapped* model classifies correctly. `levels =
/// None` runs the same protocol without the defense.
pub fn run_obfuscated(ctx: &Context<'_>, norm: Norm, levels: Option<u32>) -> ObfuscatedReport {
    let budget = ctx.config.budgets.budget(norm);
    let wrapped = DefenseWrapper::new(ctx.model.clone(), levels);
    let samples = attack_samples(
        ctx,
        &wrapped,
        ctx.config.experiments.obfuscated_samples,
        "obfuscated/samples",
    );
    let mut ea = ctx.config.ea.ea_config(budget, CrossoverKind::Bezier);
    ea.max_generations = ctx.config.experiments.obfuscated_max_generations;

    let mut cells = Vec::new();
    let mut raw = Vec::new();
    for method in ["pgd", "bezier_ea"] {
        let records: Vec<ObfuscatedRaw> = run_indexed(samples.len(), ctx.config.threads, |i| {
            let (x, y) = &samples[i];
            let seed = derive_seed(
                ctx.config.seed,
                &format!("obfuscated/{method}/{}", norm.name()),
                i as u64,
            );
            let mut ledger = QueryLedger::new();
            let start = Instant::now();
            let success = match method {
                "pgd" => {
                    let cfg = ctx.config.pgd.pgd_config(budget, seed);
                    pgd(&wrapped, x, *y, &cfg, &mut ledger).success
                }
                _ => run_ea(&wrapped, x, *y, &ea, seed, &mut ledger).success,
            };
            ObfuscatedRaw {
                sample_id: i,
                method: method.to_string(),
                levels,
                success,
                forwards: ledger.forwards(),
                backwards: ledger.backwards(),
                seconds: start.elapsed().as_secs_f64(),
                seed,
            }
        });
        let successes = records.iter().filter(|r| r.success).count();
        cells.push(ObfuscatedCell {
            method: method.to_string(),
            levels,
            attacked: records.len(),
            successes,
            asr: 100.0 * successes as f64 / records.len().max(1) as f64,
        });
        raw.extend(records);
    }
    ObfuscatedReport { cells, raw }
}
