//! Curve-centric experiments: connectivity, transferability, the
//! auxiliary-image ablation, and convergence/coverage.

use advpath_core::bezier::{
    evaluate_connectivity, linear_path, optimize_control, sample_path_points, BezierPath,
    CurveObjective, CurveOptimizer, Setting,
};
use advpath_core::geometry::Norm;
use advpath_core::ledger::QueryLedger;
use advpath_core::rng::{derive_seed, Rng};
use advpath_core::vector::Vector;
use serde::Serialize;

use super::{case_endpoints, cell_seed, fools, mean_std, CasePool, Context, MeanStd};
use crate::io::PathFile;
use crate::parallel::run_indexed;

fn objective_for(cases: &[(Vector, usize)], w_main: f64, w_aux: f64) -> CurveObjective {
    let objective = match cases {
        [(x, y)] => CurveObjective::single(x.clone(), *y),
        [(x1, y1), (x2, y2)] => CurveObjective::pair(x1.clone(), *y1, x2.clone(), *y2),
        _ => unreachable!("cases hold one or two images"),
    };
    objective.with_weights(w_main, w_aux)
}

// ---------------------------------------------------------------------------
// Connectivity (attack success along interior points)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityRaw {
    pub setting: String,
    pub norm: String,
    pub method: String,
    pub case_index: usize,
    pub seed: u64,
    pub skipped: bool,
    pub asr1: Option<f64>,
    pub asr2: Option<f64>,
    pub asr_both: Option<f64>,
    pub asr_avg: Option<f64>,
    pub mean_loss: Option<f64>,
    pub min_loss: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityCell {
    pub setting: String,
    pub norm: String,
    pub method: String,
    pub cases_used: usize,
    pub skipped: usize,
    pub asr1: Option<MeanStd>,
    pub asr2: Option<MeanStd>,
    pub asr_both: MeanStd,
    pub asr_avg: MeanStd,
}

pub struct ConnectivityReportOut {
    pub cells: Vec<ConnectivityCell>,
    pub raw: Vec<ConnectivityRaw>,
    pub paths: Vec<PathFile>,
}

struct ConnectivityCase {
    bezier: advpath_core::bezier::ConnectivityReport,
    linear: Option<advpath_core::bezier::ConnectivityReport>,
    path: PathFile,
}

/// Builds PGD endpoints per case, optimizes the Bézier control point, and
/// measures attack success over the interior evaluation grid; optionally also
/// evaluates the straight-segment baseline on the same endpoints.
pub fn run_connectivity(
    ctx: &Context<'_>,
    settings: &[Setting],
    norms: &[Norm],
    include_linear: bool,
) -> ConnectivityReportOut {
    let pool = CasePool::new(ctx.model, &ctx.data.test, ctx.data.class_count);
    let mut cells = Vec::new();
    let mut raw = Vec::new();
    let mut paths = Vec::new();
    for &setting in settings {
        for &norm in norms {
            let budget = ctx.config.budgets.budget(norm);
            let cases = ctx.config.experiments.connectivity_cases;
            let results: Vec<(u64, Option<ConnectivityCase>)> =
                run_indexed(cases, ctx.config.threads, |idx| {
                    let seed = cell_seed(ctx.config.seed, "connect", setting, norm, idx as u64);
                    let mut rng = Rng::new(seed);
                    let mut ledger = QueryLedger::new();
                    let Some(images) = pool.draw_case(setting, &mut rng) else {
                        return (seed, None);
                    };
                    let Some((d1, d2)) = case_endpoints(ctx, &images, budget, seed, &mut ledger)
                    else {
                        return (seed, None);
                    };
                    let objective =
                        objective_for(&images, ctx.config.bezier.w_main, ctx.config.bezier.w_aux);
                    let base = BezierPath::new(d1.clone(), d2.clone(), budget);
                    let optimized = optimize_control(
                        &objective,
                        base,
                        &ctx.config.bezier.optimize_config(derive_seed(seed, "optimize", 0)),
                        ctx.model,
                        &mut ledger,
                    );
                    let points = ctx.config.bezier.eval_points;
                    let bezier =
                        evaluate_connectivity(&optimized, &images, points, ctx.model, &mut ledger);
                    let linear = include_linear.then(|| {
                        evaluate_connectivity(
                            &linear_path(d1, d2, budget),
                            &images,
                            points,
                            ctx.model,
                            &mut ledger,
                        )
                    });
                    let path = PathFile::from_path(&optimized);
                    (seed, Some(ConnectivityCase { bezier, linear, path }))
                });

            let methods: &[&str] = if include_linear { &["bezier", "linear"] } else { &["bezier"] };
            for method in methods {
                let mut asr1 = Vec::new();
                let mut asr2 = Vec::new();
                let mut both = Vec::new();
                let mut avg = Vec::new();
                let mut skipped = 0;
                for (idx, (seed, case)) in results.iter().enumerate() {
                    let report = case.as_ref().map(|c| match *method {
                        "bezier" => &c.bezier,
                        _ => c.linear.as_ref().expect("linear requested"),
                    });
                    raw.push(ConnectivityRaw {
                        setting: setting.name().to_string(),
                        norm: norm.name().to_string(),
                        method: method.to_string(),
                        case_index: idx,
                        seed: *seed,
                        skipped: report.is_none(),
                        asr1: report.and_then(|r| r.asr1),
                        asr2: report.and_then(|r| r.asr2),
                        asr_both: report.map(|r| r.asr_both),
                        asr_avg: report.map(|r| r.asr_avg),
                        mean_loss: report.map(|r| r.mean_loss),
                        min_loss: report.map(|r| r.min_loss),
                    });
                    match report {
                        Some(r) => {
                            if let (Some(a1), Some(a2)) = (r.asr1, r.asr2) {
                                asr1.push(a1);
                                asr2.push(a2);
                            }
                            both.push(r.asr_both);
                            avg.push(r.asr_avg);
                        }
                        None => skipped += 1,
                    }
                }
                cells.push(ConnectivityCell {
                    setting: setting.name().to_string(),
                    norm: norm.name().to_string(),
                    method: method.to_string(),
                    cases_used: both.len(),
                    skipped,
                    asr1: (!asr1.is_empty()).then(|| mean_std(&asr1)),
                    asr2: (!asr2.is_empty()).then(|| mean_std(&asr2)),
                    asr_both: mean_std(&both),
                    asr_avg: mean_std(&avg),
                });
            }
            paths.extend(
                results.into_iter().filter_map(|(_, case)| case.map(|c| c.path)),
            );
        }
    }
    ConnectivityReportOut { cells, raw, paths }
}

// ---------------------------------------------------------------------------
// Transferability (curves from training cases, evaluated on test images)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TransferRaw {
    pub setting: String,
    pub norm: String,
    pub curve_index: usize,
    pub seed: u64,
    pub skipped: bool,
    pub endp_avg: Option<f64>,
    pub path_succ: Option<f64>,
    pub imgs_resc: Option<f64>,
    pub avg_pts: Option<f64>,
    /// Raw flags backing the set identity: counts over the test images.
    pub endpoint_hit: Option<usize>,
    pub path_hit: Option<usize>,
    pub rescued: Option<usize>,
    pub test_images: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferCell {
    pub setting: String,
    pub norm: String,
    pub curves_used: usize,
    pub skipped: usize,
    pub endp_avg: MeanStd,
    pub path_succ: MeanStd,
    pub imgs_resc: MeanStd,
    pub avg_pts: MeanStd,
}

pub struct TransferReport {
    pub cells: Vec<TransferCell>,
    pub raw: Vec<TransferRaw>,
}

#[derive(Clone)]
struct TransferCurve {
    endp_avg: f64,
    path_succ: f64,
    imgs_resc: f64,
    avg_pts: f64,
    endpoint_hit: usize,
    path_hit: usize,
    rescued: usize,
}

fn transfer_metrics(
    ctx: &Context<'_>,
    d1: &Vector,
    d2: &Vector,
    points: &[(f64, Vector)],
    test_images: &[(Vector, usize)],
) -> TransferCurve {
    let mut e1_hits = 0usize;
    let mut e2_hits = 0usize;
    let mut endpoint_hit = 0usize;
    let mut path_hit = 0usize;
    let mut rescued = 0usize;
    let mut successful_points = 0usize;
    for (x, y) in test_images {
        let h1 = fools(ctx.model, d1, x, *y);
        let h2 = fools(ctx.model, d2, x, *y);
        let npts = points.iter().filter(|(_, p)| fools(ctx.model, p, x, *y)).count();
        e1_hits += usize::from(h1);
        e2_hits += usize::from(h2);
        endpoint_hit += usize::from(h1 || h2);
        path_hit += usize::from(npts > 0);
        rescued += usize::from(npts > 0 && !h1 && !h2);
        successful_points += npts;
    }
    let n = test_images.len() as f64;
    TransferCurve {
        endp_avg: 0.5 * (e1_hits + e2_hits) as f64 / n,
        path_succ: path_hit as f64 / n,
        imgs_resc: rescued as f64 / n,
        avg_pts: successful_points as f64 / n,
        endpoint_hit,
        path_hit,
        rescued,
    }
}

/// Fixed evaluation set: the first `transfer_test_images` correctly classified
/// test samples under a seeded shuffle.
fn transfer_test_set(ctx: &Context<'_>) -> Vec<(Vector, usize)> {
    let correct = super::correct_indices(ctx.model, &ctx.data.test);
    let mut order = correct;
    Rng::new(derive_seed(ctx.config.seed, "transfer/test_images", 0)).shuffle(&mut order);
    order
        .into_iter()
        .take(ctx.config.experiments.transfer_test_images)
        .map(|i| ctx.data.test[i].clone())
        .collect()
}

/// Optimizes one curve per training case and reports endpoint vs path transfer
/// to unseen test images.
pub fn run_transfer(ctx: &Context<'_>, settings: &[Setting], norms: &[Norm]) -> TransferReport {
    let pool = CasePool::new(ctx.model, &ctx.data.train, ctx.data.class_count);
    let test_images = transfer_test_set(ctx);
    let mut cells = Vec::new();
    let mut raw = Vec::new();
    for &setting in settings {
        for &norm in norms {
            let budget = ctx.config.budgets.budget(norm);
            let curves = ctx.config.experiments.transfer_curves;
            let results: Vec<(u64, Option<TransferCurve>)> =
                run_indexed(curves, ctx.config.threads, |idx| {
                    let seed = cell_seed(ctx.config.seed, "transfer", setting, norm, idx as u64);
                    let mut rng = Rng::new(seed);
                    let mut ledger = QueryLedger::new();
                    let Some(images) = pool.draw_case(setting, &mut rng) else {
                        return (seed, None);
                    };
                    let Some((d1, d2)) = case_endpoints(ctx, &images, budget, seed, &mut ledger)
                    else {
                        return (seed, None);
                    };
                    let objective =
                        objective_for(&images, ctx.config.bezier.w_main, ctx.config.bezier.w_aux);
                    let optimized = optimize_control(
                        &objective,
                        BezierPath::new(d1.clone(), d2.clone(), budget),
                        &ctx.config.bezier.optimize_config(derive_seed(seed, "optimize", 0)),
                        ctx.model,
                        &mut ledger,
                    );
                    let points = sample_path_points(&optimized, ctx.config.bezier.eval_points);
                    (seed, Some(transfer_metrics(ctx, &d1, &d2, &points, &test_images)))
                });

            let mut endp = Vec::new();
            let mut path = Vec::new();
            let mut resc = Vec::new();
            let mut pts = Vec::new();
            let mut skipped = 0;
            for (idx, (seed, curve)) in results.iter().enumerate() {
                raw.push(TransferRaw {
                    setting: setting.name().to_string(),
                    norm: norm.name().to_string(),
                    curve_index: idx,
                    seed: *seed,
                    skipped: curve.is_none(),
                    endp_avg: curve.as_ref().map(|c| c.endp_avg),
                    path_succ: curve.as_ref().map(|c| c.path_succ),
                    imgs_resc: curve.as_ref().map(|c| c.imgs_resc),
                    avg_pts: curve.as_ref().map(|c| c.avg_pts),
                    endpoint_hit: curve.as_ref().map(|c| c.endpoint_hit),
                    path_hit: curve.as_ref().map(|c| c.path_hit),
                    rescued: curve.as_ref().map(|c| c.rescued),
                    test_images: test_images.len(),
                });
                match curve {
                    Some(c) => {
                        endp.push(c.endp_avg);
                        path.push(c.path_succ);
                        resc.push(c.imgs_resc);
                        pts.push(c.avg_pts);
                    }
                    None => skipped += 1,
                }
            }
            cells.push(TransferCell {
                setting: setting.name().to_string(),
                norm: norm.name().to_string(),
                curves_used: endp.len(),
                skipped,
                endp_avg: mean_std(&endp),
                path_succ: mean_std(&path),
                imgs_resc: mean_std(&resc),
                avg_pts: mean_std(&pts),
            });
        }
    }
    TransferReport { cells, raw }
}

// ---------------------------------------------------------------------------
// Auxiliary-image ablation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AuxRaw {
    pub setting: String,
    pub norm: String,
    pub repetition: usize,
    pub case_index: usize,
    pub aux: usize,
    pub seed: u64,
    pub skipped: bool,
    pub endp_avg: Option<f64>,
    pub path_succ: Option<f64>,
    pub imp: Option<f64>,
    pub rescue: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuxCell {
    pub setting: String,
    pub norm: String,
    pub aux: usize,
    pub endp_avg: MeanStd,
    pub path_succ: MeanStd,
    /// Difference of the Path Succ. and Endp. Avg means.
    pub imp: f64,
    pub rescue: MeanStd,
}

pub struct AuxReport {
    pub cells: Vec<AuxCell>,
    pub raw: Vec<AuxRaw>,
}

/// Draws `count` auxiliary cases per the label policy: main class for Settings
/// A and B, balanced across the two classes for C.
fn draw_aux(
    ctx: &Context<'_>,
    images: &[(Vector, usize)],
    count: usize,
    rng: &mut Rng,
) -> Vec<(Vector, usize)> {
    if count == 0 {
        return Vec::new();
    }
    let from_class = |class: usize, n: usize, rng: &mut Rng| -> Vec<(Vector, usize)> {
        let pool = ctx.data.aux_indices_of_class(class);
        assert!(
            pool.len() >= n,
            "auxiliary pool for class {class} holds {} samples, {n} required",
            pool.len()
        );
        rng.sample_indices(pool.len(), n)
            .into_iter()
            .map(|k| ctx.data.aux[pool[k]].clone())
            .collect()
    };
    match images {
        [(_, y)] => from_class(*y, count, rng),
        [(_, y1), (_, y2)] if y1 == y2 => from_class(*y1, count, rng),
        [(_, y1), (_, y2)] => {
            let first = count / 2 + count % 2;
            let mut aux = from_class(*y1, first, rng);
            aux.extend(from_class(*y2, count - first, rng));
            aux
        }
        _ => unreachable!(),
    }
}

/// One endpoint pair per (repetition, case); each auxiliary count re-optimizes
/// the control point on the same endpoints, so the endpoint columns are
/// bitwise identical down an aux column.
pub fn run_aux_ablation(ctx: &Context<'_>, settings: &[Setting], norms: &[Norm]) -> AuxReport {
    let pool = CasePool::new(ctx.model, &ctx.data.train, ctx.data.class_count);
    let test_images = transfer_test_set(ctx);
    let reps = ctx.config.experiments.repetitions;
    let cases = ctx.config.experiments.aux_cases;
    let aux_counts = &ctx.config.experiments.aux_counts;
    let mut cells = Vec::new();
    let mut raw = Vec::new();
    for &setting in settings {
        for &norm in norms {
            let budget = ctx.config.budgets.budget(norm);
            // (rep, case) → per-aux metrics; endpoints shared across aux counts.
            type CaseRow = Vec<Option<TransferCurve>>;
            let rows: Vec<(u64, CaseRow)> =
                run_indexed(reps * cases, ctx.config.threads, |flat| {
                    let seed =
                        cell_seed(ctx.config.seed, "aux", setting, norm, flat as u64);
                    let mut rng = Rng::new(seed);
                    let mut ledger = QueryLedger::new();
                    let Some(images) = pool.draw_case(setting, &mut rng) else {
                        return (seed, vec![None; aux_counts.len()]);
                    };
                    let Some((d1, d2)) = case_endpoints(ctx, &images, budget, seed, &mut ledger)
                    else {
                        return (seed, vec![None; aux_counts.len()]);
                    };
                    let row = aux_counts
                        .iter()
                        .enumerate()
                        .map(|(ai, &aux_count)| {
                            let mut aux_rng =
                                Rng::new(derive_seed(seed, "aux_pick", aux_count as u64));
                            let aux = draw_aux(ctx, &images, aux_count, &mut aux_rng);
                            let objective = objective_for(
                                &images,
                                ctx.config.bezier.w_main,
                                ctx.config.bezier.w_aux,
                            )
                            .with_aux(aux);
                            let optimized = optimize_control(
                                &objective,
                                BezierPath::new(d1.clone(), d2.clone(), budget),
                                &ctx.config
                                    .bezier
                                    .optimize_config(derive_seed(seed, "optimize", ai as u64)),
                                ctx.model,
                                &mut ledger,
                            );
                            let points =
                                sample_path_points(&optimized, ctx.config.bezier.eval_points);
                            Some(transfer_metrics(ctx, &d1, &d2, &points, &test_images))
                        })
                        .collect();
                    (seed, row)
                });

            for (ai, &aux_count) in aux_counts.iter().enumerate() {
                let mut endp_reps = Vec::new();
                let mut path_reps = Vec::new();
                let mut rescue_reps = Vec::new();
                for rep in 0..reps {
                    let mut endp_cases = Vec::new();
                    let mut path_cases = Vec::new();
                    let mut rescue_cases = Vec::new();
                    for case in 0..cases {
                        let flat = rep * cases + case;
                        let (seed, row) = &rows[flat];
                        let metrics = row[ai].as_ref();
                        raw.push(AuxRaw {
                            setting: setting.name().to_string(),
                            norm: norm.name().to_string(),
                            repetition: rep,
                            case_index: case,
                            aux: aux_count,
                            seed: *seed,
                            skipped: metrics.is_none(),
                            endp_avg: metrics.map(|m| m.endp_avg),
                            path_succ: metrics.map(|m| m.path_succ),
                            imp: metrics.map(|m| m.path_succ - m.endp_avg),
                            rescue: metrics.map(|m| m.imgs_resc),
                        });
                        if let Some(m) = metrics {
                            endp_cases.push(m.endp_avg);
                            path_cases.push(m.path_succ);
                            rescue_cases.push(m.imgs_resc);
                        }
                    }
                    if !endp_cases.is_empty() {
                        endp_reps.push(mean_std(&endp_cases).mean);
                        path_reps.push(mean_std(&path_cases).mean);
                        rescue_reps.push(mean_std(&rescue_cases).mean);
                    }
                }
                let endp = mean_std(&endp_reps);
                let path = mean_std(&path_reps);
                cells.push(AuxCell {
                    setting: setting.name().to_string(),
                    norm: norm.name().to_string(),
                    aux: aux_count,
                    endp_avg: endp,
                    path_succ: path,
                    imp: path.mean - endp.mean,
                    rescue: mean_std(&rescue_reps),
                });
            }
        }
    }
    AuxReport { cells, raw }
}

// ---------------------------------------------------------------------------
// Convergence and sampling density (coverage)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRaw {
    pub setting: String,
    pub norm: String,
    pub aux: usize,
    pub repetition: usize,
    pub case_index: usize,
    pub seed: u64,
    pub skipped: bool,
    /// Coverage of the 100-point grid per checkpointed epoch count.
    pub coverage_by_epoch: Vec<Option<f64>>,
    /// Coverage of the nested 50-point grid (every other point) at the final
    /// epoch; monotone ≤ the 100-point coverage by construction.
    pub coverage_nested_50: Option<f64>,
    pub coverage_full_100: Option<f64>,
    /// Mean per-point coverage at the final epoch for 50 and 100 points.
    pub coverage_per_point_50: Option<f64>,
    pub coverage_per_point_100: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceCell {
    pub setting: String,
    pub aux: usize,
    pub epochs: usize,
    pub coverage: MeanStd,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceDensityCell {
    pub setting: String,
    pub aux: usize,
    pub points: usize,
    pub coverage_per_point: MeanStd,
}

pub struct ConvergenceReport {
    pub cells: Vec<ConvergenceCell>,
    pub density: Vec<ConvergenceDensityCell>,
    pub raw: Vec<ConvergenceRaw>,
}

/// Checkpoints a single optimization trajectory at each epoch count and
/// measures coverage: the fraction of test images hit by at least one sampled
/// point. The 50-point grid is every other point of the 100-point grid, so
/// coverage is monotone in the point count by construction.
pub fn run_convergence(ctx: &Context<'_>, settings: &[Setting], norm: Norm) -> ConvergenceReport {
    let pool = CasePool::new(ctx.model, &ctx.data.train, ctx.data.class_count);
    let test_images = transfer_test_set(ctx);
    let budget = ctx.config.budgets.budget(norm);
    let mut epochs = ctx.config.experiments.convergence_epochs.clone();
    epochs.sort_unstable();
    let reps = ctx.config.experiments.repetitions;
    let cases = ctx.config.experiments.convergence_cases;
    let mut cells = Vec::new();
    let mut density = Vec::new();
    let mut raw = Vec::new();
    for &setting in settings {
        for &aux_count in &ctx.config.experiments.convergence_aux {
            let rows: Vec<(u64, Option<CaseCoverage>)> =
                run_indexed(reps * cases, ctx.config.threads, |flat| {
                    let label = format!("converge/aux{aux_count}");
                    let seed = derive_seed(
                        ctx.config.seed,
                        &format!("{label}/{}/{}", setting.name(), norm.name()),
                        flat as u64,
                    );
                    let mut rng = Rng::new(seed);
                    let mut ledger = QueryLedger::new();
                    let Some(images) = pool.draw_case(setting, &mut rng) else {
                        return (seed, None);
                    };
                    let Some((d1, d2)) = case_endpoints(ctx, &images, budget, seed, &mut ledger)
                    else {
                        return (seed, None);
                    };
                    let mut aux_rng = Rng::new(derive_seed(seed, "aux_pick", aux_count as u64));
                    let aux = draw_aux(ctx, &images, aux_count, &mut aux_rng);
                    let objective = objective_for(
                        &images,
                        ctx.config.bezier.w_main,
                        ctx.config.bezier.w_aux,
                    )
                    .with_aux(aux);
                    let mut optimizer = CurveOptimizer::new(
                        &objective,
                        BezierPath::new(d1, d2, budget),
                        &ctx.config.bezier.optimize_config(derive_seed(seed, "optimize", 0)),
                        ctx.model,
                    );
                    let coverage_of = |path: &BezierPath, stride: usize| -> f64 {
                        let points = sample_path_points(path, 100);
                        let hit = test_images
                            .iter()
                            .filter(|(x, y)| {
                                points
                                    .iter()
                                    .step_by(stride)
                                    .any(|(_, p)| fools(ctx.model, p, x, *y))
                            })
                            .count();
                        hit as f64 / test_images.len() as f64
                    };
                    let mut done = 0;
                    let mut by_epoch = Vec::new();
                    for &epoch in &epochs {
                        optimizer.run(epoch - done, &mut ledger);
                        done = epoch;
                        by_epoch.push(coverage_of(optimizer.path(), 1));
                    }
                    let final_path = optimizer.path();
                    let points = sample_path_points(final_path, 100);
                    let per_point = |stride: usize| -> f64 {
                        let selected: Vec<&(f64, Vector)> = points.iter().step_by(stride).collect();
                        let total: f64 = selected
                            .iter()
                            .map(|(_, p)| {
                                test_images
                                    .iter()
                                    .filter(|(x, y)| fools(ctx.model, p, x, *y))
                                    .count() as f64
                                    / test_images.len() as f64
                            })
                            .sum();
                        total / selected.len() as f64
                    };
                    (
                        seed,
                        Some(CaseCoverage {
                            by_epoch,
                            nested_50: coverage_of(final_path, 2),
                            full_100: coverage_of(final_path, 1),
                            per_point_50: per_point(2),
                            per_point_100: per_point(1),
                        }),
                    )
                });

            // Aggregate per repetition (mean over the rep's cases), then over reps.
            let mut coverage_reps: Vec<Vec<f64>> = vec![Vec::new(); epochs.len()];
            let mut cpp50_reps = Vec::new();
            let mut cpp100_reps = Vec::new();
            for rep in 0..reps {
                let mut per_epoch: Vec<Vec<f64>> = vec![Vec::new(); epochs.len()];
                let mut cpp50 = Vec::new();
                let mut cpp100 = Vec::new();
                for case in 0..cases {
                    let (seed, cov) = &rows[rep * cases + case];
                    raw.push(ConvergenceRaw {
                        setting: setting.name().to_string(),
                        norm: norm.name().to_string(),
                        aux: aux_count,
                        repetition: rep,
                        case_index: case,
                        seed: *seed,
                        skipped: cov.is_none(),
                        coverage_by_epoch: match cov {
                            Some(c) => c.by_epoch.iter().copied().map(Some).collect(),
                            None => vec![None; epochs.len()],
                        },
                        coverage_nested_50: cov.as_ref().map(|c| c.nested_50),
                        coverage_full_100: cov.as_ref().map(|c| c.full_100),
                        coverage_per_point_50: cov.as_ref().map(|c| c.per_point_50),
                        coverage_per_point_100: cov.as_ref().map(|c| c.per_point_100),
                    });
                    if let Some(c) = cov {
                        for (ei, v) in c.by_epoch.iter().enumerate() {
                            per_epoch[ei].push(*v);
                        }
                        cpp50.push(c.per_point_50);
                        cpp100.push(c.per_point_100);
                    }
                }
                for (ei, values) in per_epoch.iter().enumerate() {
                    if !values.is_empty() {
                        coverage_reps[ei].push(mean_std(values).mean);
                    }
                }
                if !cpp50.is_empty() {
                    cpp50_reps.push(mean_std(&cpp50).mean);
                    cpp100_reps.push(mean_std(&cpp100).mean);
                }
            }
            for (ei, &epoch) in epochs.iter().enumerate() {
                cells.push(ConvergenceCell {
                    setting: setting.name().to_string(),
                    aux: aux_count,
                    epochs: epoch,
                    coverage: mean_std(&coverage_reps[ei]),
                });
            }
            density.push(ConvergenceDensityCell {
                setting: setting.name().to_string(),
                aux: aux_count,
                points: 50,
                coverage_per_point: mean_std(&cpp50_reps),
            });
            density.push(ConvergenceDensityCell {
                setting: setting.name().to_string(),
                aux: aux_count,
                points: 100,
                coverage_per_point: mean_std(&cpp100_reps),
            });
        }
    }
    ConvergenceReport { cells, density, raw }
}

struct CaseCoverage {
    by_epoch: Vec<f64>,
    nested_50: f64,
    full_100: f64,
    per_point_50: f64,
    per_point_100: f64,
}
