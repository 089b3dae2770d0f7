//! Fast invariant suite behind the `selftest` subcommand: gradient checks,
//! projection oracles, Bézier identities, and ledger arithmetic.

use advpath_core::bezier::BezierPath;
use advpath_core::evolution::{run_ea, CrossoverKind, EaConfig, FitnessScore};
use advpath_core::geometry::{norm_p, project, sample_uniform_ball, Budget, Norm};
use advpath_core::gradcheck::finite_diff_grad;
use advpath_core::ledger::QueryLedger;
use advpath_core::model::{Classifier, Layer, Matrix, Mlp};
use advpath_core::rng::Rng;
use advpath_core::vector::Vector;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str) -> Self {
        Self { name, passed: true, detail: String::new() }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Self { name, passed: false, detail }
    }
}

/// Euclidean projection by multiresolution grid search, independent of
/// [`advpath_core::geometry::project`]. The optimum lies in the axis-aligned
/// box spanned by the origin and `v`, so the search refines a 9-per-axis grid
/// inside that box down to ~1e-7 cell width.
pub fn brute_force_project(v: &Vector, budget: &Budget) -> Vector {
    let dim = v.dim();
    assert!(dim <= 4, "grid oracle is exponential in the dimension");
    let mut center: Vec<f64> = v.iter().map(|x| x / 2.0).collect();
    let mut width: Vec<f64> = v.iter().map(|x| x.abs() / 2.0).collect();
    let mut best = vec![0.0; dim];
    let mut best_dist = f64::INFINITY;
    let grid = 9usize;
    let mut point = vec![0.0; dim];
    for _round in 0..30 {
        let mut index = vec![0usize; dim];
        'points: loop {
            for d in 0..dim {
                let frac = index[d] as f64 / (grid - 1) as f64 * 2.0 - 1.0;
                point[d] = center[d] + frac * width[d];
            }
            let candidate = Vector::new(point.clone());
            if norm_p(&candidate, budget.norm) <= budget.epsilon * (1.0 + 1e-12) {
                let dist: f64 = point
                    .iter()
                    .zip(v.iter())
                    .map(|(p, x)| (p - x) * (p - x))
                    .sum();
                if dist < best_dist {
                    best_dist = dist;
                    best.copy_from_slice(&point);
                }
            }
            for d in 0..dim {
                index[d] += 1;
                if index[d] < grid {
                    continue 'points;
                }
                index[d] = 0;
            }
            break;
        }
        center.copy_from_slice(&best);
        for w in width.iter_mut() {
            *w *= 0.5;
        }
    }
    Vector::new(best)
}

/// Runs every invariant check. `sabotage` is a test hook: naming a check makes
/// its implementation deliberately wrong so the failure path can be exercised.
pub fn run_selftest(sabotage: Option<&str>) -> Vec<CheckResult> {
    vec![
        check_rng_determinism(),
        check_gradient(),
        check_l1_projection_optimality(sabotage == Some("l1-projection")),
        check_projection_invariants(),
        check_bezier_endpoints(),
        check_bezier_degeneracy(),
        check_ledger_arithmetic(),
        check_fitness_order(),
    ]
}

fn check_rng_determinism() -> CheckResult {
    let name = "rng determinism";
    let mut a = Rng::new(1234);
    let mut b = Rng::new(1234);
    for i in 0..1000 {
        if a.next_u64() != b.next_u64() {
            return CheckResult::fail(name, format!("streams diverged at draw {i}"));
        }
    }
    CheckResult::pass(name)
}

fn check_gradient() -> CheckResult {
    let name = "input gradient vs finite differences";
    let rng = Rng::new(99);
    let mut checked = 0;
    let mut trial = 0u64;
    while checked < 10 {
        trial += 1;
        if trial > 200 {
            return CheckResult::fail(name, "could not find well-conditioned inputs".into());
        }
        let mut stream = rng.split(trial);
        let model = Mlp::init(&[6, 12, 8, 3], &mut stream);
        let x = Vector::new((0..6).map(|_| stream.uniform(0.05, 0.95)).collect());
        if model.relu_margin(&x) < 1e-3 {
            continue;
        }
        let y = (trial % 3) as usize;
        let exact = model.input_grad(&x, y);
        let numeric = match finite_diff_grad(|p| model.loss(p, y), &x, 1e-5) {
            Ok(g) => g,
            Err(e) => return CheckResult::fail(name, e.to_string()),
        };
        let scale = numeric.iter().fold(1e-6f64, |a, b| a.max(b.abs()));
        for i in 0..6 {
            let rel = (exact[i] - numeric[i]).abs() / scale;
            if rel >= 1e-4 {
                return CheckResult::fail(
                    name,
                    format!("trial {trial} coordinate {i}: relative error {rel:.2e}"),
                );
            }
        }
        checked += 1;
    }
    CheckResult::pass(name)
}

fn check_l1_projection_optimality(sabotage: bool) -> CheckResult {
    let name = "l1 projection optimality vs grid oracle";
    let mut rng = Rng::new(7);
    for trial in 0..30 {
        let dim = 2 + trial % 2;
        let v = Vector::new((0..dim).map(|_| rng.uniform(-1.5, 1.5)).collect());
        let budget = Budget::new(Norm::L1, 0.6);
        let mut projected = project(&v, &budget);
        if sabotage {
            // Test hook: corrupt the projection to prove this check can fail.
            let mut data = projected.as_slice().to_vec();
            data[0] += 0.01;
            projected = Vector::new(data);
        }
        let oracle = brute_force_project(&v, &budget);
        let dist = |w: &Vector| norm_p(&w.sub(&v), Norm::L2);
        if (dist(&projected) - dist(&oracle)).abs() > 1e-5 {
            return CheckResult::fail(
                name,
                format!(
                    "trial {trial}: distance {} vs oracle {}",
                    dist(&projected),
                    dist(&oracle)
                ),
            );
        }
    }
    CheckResult::pass(name)
}

fn check_projection_invariants() -> CheckResult {
    let name = "projection idempotence and feasibility";
    let mut rng = Rng::new(21);
    for norm in Norm::ALL {
        let budget = Budget::new(norm, 0.8);
        for _ in 0..100 {
            let dim = 2 + rng.below(6);
            let v = Vector::new((0..dim).map(|_| rng.uniform(-2.0, 2.0)).collect());
            let p = project(&v, &budget);
            if norm_p(&p, norm) > 0.8 * (1.0 + 1e-9) {
                return CheckResult::fail(name, format!("{norm:?}: projection infeasible"));
            }
            let pp = project(&p, &budget);
            for i in 0..p.dim() {
                if (pp[i] - p[i]).abs() > 1e-12 {
                    return CheckResult::fail(name, format!("{norm:?}: projection not idempotent"));
                }
            }
        }
    }
    CheckResult::pass(name)
}

fn check_bezier_endpoints() -> CheckResult {
    let name = "bezier endpoint identity";
    let budget = Budget::new(Norm::Linf, 1.0);
    let mut rng = Rng::new(3);
    let d1 = sample_uniform_ball(&mut rng, 5, &budget);
    let d2 = sample_uniform_ball(&mut rng, 5, &budget);
    let path = BezierPath::new(d1.clone(), d2.clone(), budget)
        .with_control(sample_uniform_ball(&mut rng, 5, &budget).scale(3.0));
    if path.eval(0.0) != d1 || path.eval(1.0) != d2 {
        return CheckResult::fail(name, "B(0) or B(1) differs from its endpoint".into());
    }
    CheckResult::pass(name)
}

fn check_bezier_degeneracy() -> CheckResult {
    let name = "bezier midpoint-control degeneracy";
    let budget = Budget::new(Norm::L2, 1.0);
    let mut rng = Rng::new(4);
    let d1 = sample_uniform_ball(&mut rng, 6, &budget);
    let d2 = sample_uniform_ball(&mut rng, 6, &budget);
    let path = BezierPath::new(d1.clone(), d2.clone(), budget);
    for i in 0..=100 {
        let t = i as f64 / 100.0;
        let curve = path.eval(t);
        let segment = d1.scale(1.0 - t).add(&d2.scale(t));
        for j in 0..6 {
            if (curve[j] - segment[j]).abs() >= 1e-12 {
                return CheckResult::fail(name, format!("deviation at t={t}"));
            }
        }
    }
    CheckResult::pass(name)
}

fn check_ledger_arithmetic() -> CheckResult {
    let name = "evolution ledger arithmetic";
    // A constant classifier predicting class 0: attacking label 0 never
    // succeeds, label 1 succeeds immediately.
    let model = Mlp::from_layers(vec![Layer {
        weights: Matrix::zeros(2, 4),
        bias: Vector::new(vec![1.0, 0.0]),
    }]);
    let x = Vector::new(vec![0.5; 4]);
    let budget = Budget::new(Norm::Linf, 0.05);
    let mut cfg = EaConfig::standard(budget, CrossoverKind::Bezier);
    cfg.max_generations = 3;
    let mut ledger = QueryLedger::new();
    run_ea(&model, &x, 0, &cfg, 5, &mut ledger);
    let n = cfg.population as u64;
    let per_gen = n + 21 * (n / 2);
    let expected = n + 3 * per_gen;
    if ledger.forwards() != expected {
        return CheckResult::fail(
            name,
            format!("exhausted run logged {} forwards, expected {expected}", ledger.forwards()),
        );
    }
    let mut ledger = QueryLedger::new();
    let result = run_ea(&model, &x, 1, &cfg, 5, &mut ledger);
    if !(result.success && result.generations == 0 && ledger.forwards() == n) {
        return CheckResult::fail(
            name,
            format!(
                "immediate success logged {} forwards over {} generations",
                ledger.forwards(),
                result.generations
            ),
        );
    }
    CheckResult::pass(name)
}

fn check_fitness_order() -> CheckResult {
    let name = "fitness ordering is a strict total order";
    let mut rng = Rng::new(8);
    for _ in 0..200 {
        let score = |rng: &mut Rng| FitnessScore {
            success: rng.next_f64() < 0.5,
            true_label_prob: rng.next_f64(),
        };
        let (a, b, c) = (score(&mut rng), score(&mut rng), score(&mut rng));
        if a.cmp(&b) != b.cmp(&a).reverse() {
            return CheckResult::fail(name, "comparison is not antisymmetric".into());
        }
        if a >= b && b >= c && !(a >= c) {
            return CheckResult::fail(name, "comparison is not transitive".into());
        }
    }
    CheckResult::pass(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn healthy_build_passes_every_check() {
        let results = run_selftest(None);
        assert_eq!(results.len(), 8);
        for check in &results {
            assert!(check.passed, "{} failed: {}", check.name, check.detail);
        }
    }

    #[test]
    fn sabotaged_l1_projection_is_caught_by_name() {
        let results = run_selftest(Some("l1-projection"));
        let failed: Vec<&CheckResult> = results.iter().filter(|c| !c.passed).collect();
        assert_eq!(failed.len(), 1);
        assert!(failed[0].name.contains("l1 projection"));
    }

    #[test]
    fn grid_oracle_agrees_with_closed_forms() {
        // ℓ2 projection of (3,4) onto the unit ball is (0.6, 0.8).
        let v = Vector::new(vec![3.0, 4.0]);
        let oracle = brute_force_project(&v, &Budget::new(Norm::L2, 1.0));
        assert!((oracle[0] - 0.6).abs() < 1e-6);
        assert!((oracle[1] - 0.8).abs() < 1e-6);
        // ℓ1 oracle reproduces the soft-threshold result for [0.7, 0.3], ε=0.5.
        let v = Vector::new(vec![0.7, 0.3]);
        let oracle = brute_force_project(&v, &Budget::new(Norm::L1, 0.5));
        assert!((oracle[0] - 0.45).abs() < 1e-5, "{}", oracle[0]);
        assert!((oracle[1] - 0.05).abs() < 1e-5, "{}", oracle[1]);
    }
}
