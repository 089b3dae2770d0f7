//! Quadratic Bézier paths between adversarial perturbations and the
//! control-point optimization that keeps the loss high along them.

use alloc::vec;
use alloc::vec::Vec;

use crate::adam::AdamState;
use crate::geometry::{clip_box, project, project_backward, Budget};
use crate::ledger::QueryLedger;
use crate::model::{cross_entropy, Classifier};
use crate::rng::Rng;
use crate::vector::Vector;

/// A quadratic Bézier path `B(t) = (1−t)²δ1 + 2(1−t)t·δc + t²δ2` between two
/// in-budget endpoint perturbations, with a learnable control point.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierPath {
    delta1: Vector,
    delta2: Vector,
    control: Vector,
    budget: Budget,
}

impl BezierPath {
    /// Path with the control point at the midpoint `(δ1+δ2)/2`, which makes the
    /// curve coincide with the straight segment between the endpoints.
    pub fn new(delta1: Vector, delta2: Vector, budget: Budget) -> Self {
        assert_eq!(delta1.dim(), delta2.dim(), "endpoint dimension mismatch");
        assert!(budget.contains(&delta1), "first endpoint outside the budget ball");
        assert!(budget.contains(&delta2), "second endpoint outside the budget ball");
        let control = delta1.add(&delta2).scale(0.5);
        Self { delta1, delta2, control, budget }
    }

    /// Replaces the control point, keeping the endpoints fixed.
    pub fn with_control(mut self, control: Vector) -> Self {
        assert_eq!(control.dim(), self.delta1.dim(), "control dimension mismatch");
        self.control = control;
        self
    }

    pub fn delta1(&self) -> &Vector {
        &self.delta1
    }

    pub fn delta2(&self) -> &Vector {
        &self.delta2
    }

    pub fn control(&self) -> &Vector {
        &self.control
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn dim(&self) -> usize {
        self.delta1.dim()
    }

    /// The raw curve point at `t ∈ [0,1]`, before any projection.
    pub fn eval(&self, t: f64) -> Vector {
        assert!((0.0..=1.0).contains(&t), "curve parameter outside [0,1]");
        let a = (1.0 - t) * (1.0 - t);
        let b = 2.0 * (1.0 - t) * t;
        let c = t * t;
        Vector::new(
            (0..self.dim())
                .map(|i| a * self.delta1[i] + b * self.control[i] + c * self.delta2[i])
                .collect(),
        )
    }

    /// The curve point at `t`, projected onto the budget ball.
    pub fn eval_projected(&self, t: f64) -> Vector {
        project(&self.eval(t), &self.budget)
    }
}

/// The linear-interpolation baseline path `δt = (1−t)δ1 + t·δ2`, represented as
/// a Bézier path with the midpoint control (the two are identical pointwise).
pub fn linear_path(delta1: Vector, delta2: Vector, budget: Budget) -> BezierPath {
    BezierPath::new(delta1, delta2, budget)
}

/// Connectivity scenario: one image, a same-class pair, or a cross-class pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    A,
    B,
    C,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::A => "A",
            Setting::B => "B",
            Setting::C => "C",
        }
    }
}

/// The weighted multi-image objective evaluated along a curve: main cases carry
/// weight `w_main`, auxiliary cases `w_aux < w_main`, and the total is
/// normalized by the sum of weights so the gradient scale does not depend on
/// how many auxiliary images are attached.
#[derive(Debug, Clone)]
pub struct CurveObjective {
    setting: Setting,
    main: Vec<(Vector, usize)>,
    aux: Vec<(Vector, usize)>,
    w_main: f64,
    w_aux: f64,
}

impl CurveObjective {
    /// Setting A: a single main image.
    pub fn single(x: Vector, y: usize) -> Self {
        Self { setting: Setting::A, main: vec![(x, y)], aux: Vec::new(), w_main: 1.0, w_aux: 0.5 }
    }

    /// A two-image objective: Setting B when the labels agree, Setting C when
    /// they differ. (Setting C with equal labels *is* Setting B.)
    pub fn pair(x1: Vector, y1: usize, x2: Vector, y2: usize) -> Self {
        assert_eq!(x1.dim(), x2.dim(), "main image dimension mismatch");
        let setting = if y1 == y2 { Setting::B } else { Setting::C };
        Self { setting, main: vec![(x1, y1), (x2, y2)], aux: Vec::new(), w_main: 1.0, w_aux: 0.5 }
    }

    /// Attaches auxiliary cases. For Settings A and B these must carry the main
    /// label; for Setting C they must be balanced across the two main labels
    /// (counts differing by at most one).
    pub fn with_aux(mut self, aux: Vec<(Vector, usize)>) -> Self {
        match self.setting {
            Setting::A | Setting::B => {
                let y = self.main[0].1;
                assert!(
                    aux.iter().all(|(_, label)| *label == y),
                    "auxiliary labels must match the main class"
                );
            }
            Setting::C => {
                let (y1, y2) = (self.main[0].1, self.main[1].1);
                let c1 = aux.iter().filter(|(_, label)| *label == y1).count();
                let c2 = aux.iter().filter(|(_, label)| *label == y2).count();
                assert_eq!(c1 + c2, aux.len(), "auxiliary labels must come from the main classes");
                assert!(c1.abs_diff(c2) <= 1, "auxiliary set must balance the two classes");
            }
        }
        self.aux = aux;
        self
    }

    pub fn with_weights(mut self, w_main: f64, w_aux: f64) -> Self {
        assert!(w_main > w_aux && w_aux >= 0.0, "weights must satisfy w_main > w_aux >= 0");
        self.w_main = w_main;
        self.w_aux = w_aux;
        self
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn main_cases(&self) -> &[(Vector, usize)] {
        &self.main
    }

    pub fn aux_cases(&self) -> &[(Vector, usize)] {
        &self.aux
    }

    fn weighted_cases(&self) -> impl Iterator<Item = (&Vector, usize, f64)> {
        self.main
            .iter()
            .map(move |(x, y)| (x, *y, self.w_main))
            .chain(self.aux.iter().map(move |(x, y)| (x, *y, self.w_aux)))
    }

    fn total_weight(&self) -> f64 {
        self.w_main * self.main.len() as f64 + self.w_aux * self.aux.len() as f64
    }
}

/// Weighted mean adversarial loss of the projected curve point at `t` across
/// all cases of the objective. Charges one forward per case.
pub fn path_loss(
    objective: &CurveObjective,
    path: &BezierPath,
    t: f64,
    model: &impl Classifier,
    ledger: &mut QueryLedger,
) -> f64 {
    let point = path.eval_projected(t);
    let mut total = 0.0;
    for (x, y, w) in objective.weighted_cases() {
        ledger.charge_forwards(1);
        total += w * cross_entropy(&model.logits(&x.add(&point)), y);
    }
    total / objective.total_weight()
}

/// How `t` values are drawn during control-point optimization.
#[derive(Debug, Clone)]
pub enum TSamples {
    /// Fresh uniform draws from (0,1) each iteration.
    Random(usize),
    /// A fixed list reused every iteration.
    Fixed(Vec<f64>),
}

/// Control-point optimization schedule.
#[derive(Debug, Clone)]
pub struct OptimizeConfig {
    pub iterations: usize,
    pub t_samples: TSamples,
    pub lr: f64,
    pub seed: u64,
}

impl OptimizeConfig {
    /// The full-curve schedule: 30 Adam iterations at lr 0.01 with 20 random
    /// `t` draws per iteration.
    pub fn standard(seed: u64) -> Self {
        Self { iterations: 30, t_samples: TSamples::Random(20), lr: 0.01, seed }
    }
}

/// Resumable control-point ascent, so convergence experiments can checkpoint a
/// single optimization trajectory at several iteration counts.
pub struct CurveOptimizer<'a, M: Classifier> {
    objective: &'a CurveObjective,
    model: &'a M,
    path: BezierPath,
    adam: AdamState,
    t_samples: TSamples,
    rng: Rng,
}

impl<'a, M: Classifier> CurveOptimizer<'a, M> {
    pub fn new(objective: &'a CurveObjective, path: BezierPath, cfg: &OptimizeConfig, model: &'a M) -> Self {
        if let TSamples::Fixed(ts) = &cfg.t_samples {
            assert!(!ts.is_empty(), "fixed t list must be nonempty");
            assert!(ts.iter().all(|t| (0.0..=1.0).contains(t)), "fixed t outside [0,1]");
        }
        let adam = AdamState::new(path.dim(), cfg.lr);
        Self {
            objective,
            model,
            path,
            adam,
            t_samples: cfg.t_samples.clone(),
            rng: Rng::new(cfg.seed),
        }
    }

    pub fn path(&self) -> &BezierPath {
        &self.path
    }

    pub fn into_path(self) -> BezierPath {
        self.path
    }

    /// Runs `iterations` Adam ascent steps on the Monte-Carlo estimate of the
    /// expected path loss, backpropagating through the ball projection; only
    /// the control point moves, endpoints stay bitwise intact.
    pub fn run(&mut self, iterations: usize, ledger: &mut QueryLedger) {
        let total_weight = self.objective.total_weight();
        let budget = *self.path.budget();
        for _ in 0..iterations {
            let ts: Vec<f64> = match &self.t_samples {
                TSamples::Random(n) => (0..*n).map(|_| self.rng.next_f64()).collect(),
                TSamples::Fixed(ts) => ts.clone(),
            };
            let mut grad = Vector::zeros(self.path.dim());
            for &t in &ts {
                let raw = self.path.eval(t);
                let point = project(&raw, &budget);
                let chain = 2.0 * (1.0 - t) * t;
                for (x, y, w) in self.objective.weighted_cases() {
                    let g = self.model.input_grad(&x.add(&point), y);
                    ledger.charge_forwards(1);
                    ledger.charge_backwards(1);
                    let pulled = project_backward(&raw, &budget, &g);
                    grad = grad.add_scaled(w / total_weight * chain, &pulled);
                }
            }
            grad = grad.scale(1.0 / ts.len() as f64);
            // Adam descends; feed the negated gradient to ascend the loss.
            let control = self.adam.update(self.path.control(), &grad.scale(-1.0));
            self.path.control = control;
        }
    }
}

/// Optimizes the control point and returns the final path.
pub fn optimize_control(
    objective: &CurveObjective,
    path: BezierPath,
    cfg: &OptimizeConfig,
    model: &impl Classifier,
    ledger: &mut QueryLedger,
) -> BezierPath {
    let mut optimizer = CurveOptimizer::new(objective, path, cfg, model);
    optimizer.run(cfg.iterations, ledger);
    optimizer.into_path()
}

/// `count` evenly spaced interior parameters `t ∈ [0.02, 0.98]` with their
/// projected curve points.
pub fn sample_path_points(path: &BezierPath, count: usize) -> Vec<(f64, Vector)> {
    assert!(count >= 2, "need at least two sample points");
    (0..count)
        .map(|i| {
            let t = 0.02 + i as f64 * (0.96 / (count - 1) as f64);
            (t, path.eval_projected(t))
        })
        .collect()
}

/// Attack-success statistics of sampled interior points against the main cases.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityReport {
    /// Fraction of points fooling the first case; `None` in Setting A.
    pub asr1: Option<f64>,
    /// Fraction of points fooling the second case; `None` in Setting A.
    pub asr2: Option<f64>,
    /// Fraction of points fooling every case simultaneously.
    pub asr_both: f64,
    /// Mean of ASR1/ASR2 when defined, otherwise equal to `asr_both`.
    pub asr_avg: f64,
    /// Mean over points of the mean per-case loss (diagnostic).
    pub mean_loss: f64,
    /// Minimum over points of the mean per-case loss (diagnostic).
    pub min_loss: f64,
    pub points: usize,
}

/// Samples `count` interior points and evaluates per-case attack success.
/// Success is measured on the box-clipped input `clip(x + point)`; one forward
/// is charged per (point, case).
pub fn evaluate_connectivity(
    path: &BezierPath,
    cases: &[(Vector, usize)],
    count: usize,
    model: &impl Classifier,
    ledger: &mut QueryLedger,
) -> ConnectivityReport {
    assert!(
        (1..=2).contains(&cases.len()),
        "connectivity cases hold one or two images"
    );
    let points = sample_path_points(path, count);
    let mut fooled = vec![0usize; cases.len()];
    let mut fooled_all = 0usize;
    let mut mean_loss = 0.0;
    let mut min_loss = f64::INFINITY;
    for (_, point) in &points {
        let mut all = true;
        let mut point_loss = 0.0;
        for (i, (x, y)) in cases.iter().enumerate() {
            ledger.charge_forwards(1);
            let logits = model.logits(&clip_box(&x.add(point), 0.0, 1.0));
            let success = logits.argmax() != *y;
            point_loss += cross_entropy(&logits, *y);
            if success {
                fooled[i] += 1;
            } else {
                all = false;
            }
        }
        if all {
            fooled_all += 1;
        }
        point_loss /= cases.len() as f64;
        mean_loss += point_loss;
        min_loss = min_loss.min(point_loss);
    }
    let n = points.len() as f64;
    let asr_both = fooled_all as f64 / n;
    let (asr1, asr2, asr_avg) = if cases.len() == 2 {
        let a1 = fooled[0] as f64 / n;
        let a2 = fooled[1] as f64 / n;
        (Some(a1), Some(a2), 0.5 * (a1 + a2))
    } else {
        (None, None, asr_both)
    };
    ConnectivityReport {
        asr1,
        asr2,
        asr_both,
        asr_avg,
        mean_loss: mean_loss / n,
        min_loss,
        points: points.len(),
    }
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Norm;
    use crate::model::{Layer, Matrix, Mlp};

    fn budget() -> Budget {
        Budget::new(Norm::Linf, 0.5)
    }

    fn sample_path() -> BezierPath {
        let d1 = Vector::new(vec![0.4, -0.2, 0.1]);
        let d2 = Vector::new(vec![-0.3, 0.5, 0.0]);
        BezierPath::new(d1, d2, budget()).with_control(Vector::new(vec![0.9, 0.9, -0.9]))
    }

    #[test]
    fn endpoints_are_exact() {
        let path = sample_path();
        assert_eq!(path.eval(0.0), *path.delta1());
        assert_eq!(path.eval(1.0), *path.delta2());
    }

    #[test]
    fn midpoint_control_degenerates_to_segment() {
        let d1 = Vector::new(vec![0.4, -0.2, 0.1]);
        let d2 = Vector::new(vec![-0.3, 0.5, 0.0]);
        let path = BezierPath::new(d1.clone(), d2.clone(), budget());
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let curve = path.eval(t);
            let segment = d1.scale(1.0 - t).add(&d2.scale(t));
            for j in 0..3 {
                assert!((curve[j] - segment[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    #[should_panic(expected = "outside [0,1]")]
    fn rejects_t_outside_unit_interval() {
        sample_path().eval(1.0001);
    }

    #[test]
    #[should_panic(expected = "outside the budget ball")]
    fn rejects_infeasible_endpoints() {
        BezierPath::new(Vector::new(vec![2.0]), Vector::zeros(1), Budget::new(Norm::Linf, 0.5));
    }

    fn toy_model() -> Mlp {
        Mlp::from_layers(vec![Layer {
            weights: Matrix::from_rows(2, 3, vec![1.0, 0.5, -0.25, -0.5, 1.5, 0.75]),
            bias: Vector::new(vec![0.1, -0.1]),
        }])
    }

    #[test]
    fn setting_a_path_loss_matches_direct_evaluation() {
        let model = toy_model();
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        let objective = CurveObjective::single(x.clone(), 0);
        let path = sample_path();
        let mut ledger = QueryLedger::new();
        let value = path_loss(&objective, &path, 0.3, &model, &mut ledger);
        let direct = cross_entropy(&model.logits(&x.add(&path.eval_projected(0.3))), 0);
        assert!((value - direct).abs() < 1e-15);
        assert_eq!(ledger.forwards(), 1);
    }

    #[test]
    fn zero_aux_weight_recovers_main_objective() {
        let model = toy_model();
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        let aux = vec![(Vector::new(vec![0.9, 0.1, 0.2]), 0)];
        let with_aux = CurveObjective::single(x.clone(), 0)
            .with_weights(1.0, 0.0)
            .with_aux(aux);
        let main_only = CurveObjective::single(x, 0);
        let path = sample_path();
        let mut ledger = QueryLedger::new();
        let a = path_loss(&with_aux, &path, 0.62, &model, &mut ledger);
        let b = path_loss(&main_only, &path, 0.62, &model, &mut ledger);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn pair_with_identical_images_matches_setting_a() {
        let model = toy_model();
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        let pair = CurveObjective::pair(x.clone(), 0, x.clone(), 0);
        assert_eq!(pair.setting(), Setting::B);
        let single = CurveObjective::single(x, 0);
        let path = sample_path();
        let mut ledger = QueryLedger::new();
        let b = path_loss(&pair, &path, 0.41, &model, &mut ledger);
        let a = path_loss(&single, &path, 0.41, &model, &mut ledger);
        assert!((b - a).abs() < 1e-15);
    }

    #[test]
    fn pair_with_distinct_labels_is_setting_c() {
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        assert_eq!(CurveObjective::pair(x.clone(), 0, x, 1).setting(), Setting::C);
    }

    #[test]
    fn zero_iterations_keeps_the_midpoint() {
        let model = toy_model();
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        let objective = CurveObjective::single(x, 0);
        let d1 = Vector::new(vec![0.4, -0.2, 0.1]);
        let d2 = Vector::new(vec![-0.3, 0.5, 0.0]);
        let path = BezierPath::new(d1.clone(), d2.clone(), budget());
        let cfg = OptimizeConfig { iterations: 0, ..OptimizeConfig::standard(3) };
        let mut ledger = QueryLedger::new();
        let optimized = optimize_control(&objective, path, &cfg, &model, &mut ledger);
        assert_eq!(*optimized.control(), d1.add(&d2).scale(0.5));
        assert_eq!(ledger.forwards(), 0);
    }

    #[test]
    fn optimization_is_deterministic_and_pins_endpoints() {
        let model = toy_model();
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        let objective = CurveObjective::single(x, 0);
        let d1 = Vector::new(vec![0.4, -0.2, 0.1]);
        let d2 = Vector::new(vec![-0.3, 0.5, 0.0]);
        let cfg = OptimizeConfig { iterations: 5, ..OptimizeConfig::standard(17) };
        let run = |ledger: &mut QueryLedger| {
            optimize_control(
                &objective,
                BezierPath::new(d1.clone(), d2.clone(), budget()),
                &cfg,
                &model,
                ledger,
            )
        };
        let mut ledger = QueryLedger::new();
        let p1 = run(&mut ledger);
        let p2 = run(&mut QueryLedger::new());
        assert_eq!(p1.control(), p2.control());
        assert_ne!(*p1.control(), d1.add(&d2).scale(0.5));
        assert_eq!(*p1.delta1(), d1);
        assert_eq!(*p1.delta2(), d2);
        // 5 iterations × 20 t draws × 1 case.
        assert_eq!(ledger.forwards(), 100);
        assert_eq!(ledger.backwards(), 100);
    }

    #[test]
    fn sampled_points_span_the_interior_grid() {
        let path = sample_path();
        let points = sample_path_points(&path, 50);
        assert!((points[0].0 - 0.02).abs() < 1e-15);
        assert!((points[49].0 - 0.98).abs() < 1e-15);
        let two = sample_path_points(&path, 2);
        assert_eq!((two[0].0, two[1].0), (0.02, 0.98));
        for (_, p) in &points {
            assert!(path.budget().contains(p));
        }
    }

    #[test]
    fn monte_carlo_objective_matches_quadrature() {
        let model = toy_model();
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        let objective = CurveObjective::single(x, 0);
        let path = sample_path();
        let mut ledger = QueryLedger::new();
        let mut rng = Rng::new(23);
        let draws = 10_000;
        let values: Vec<f64> = (0..draws)
            .map(|_| path_loss(&objective, &path, rng.next_f64(), &model, &mut ledger))
            .collect();
        let mc_mean: f64 = values.iter().sum::<f64>() / draws as f64;
        let variance =
            values.iter().map(|v| (v - mc_mean) * (v - mc_mean)).sum::<f64>() / (draws - 1) as f64;
        let std_err = libm::sqrt(variance / draws as f64);

        // 1000-interval trapezoid estimate of E_{t~U(0,1)} path_loss(t).
        let n = 1000;
        let mut quad = 0.0;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            quad += weight * path_loss(&objective, &path, t, &model, &mut ledger);
        }
        quad /= n as f64;
        assert!(
            (mc_mean - quad).abs() <= 2.0 * std_err,
            "MC {mc_mean} vs quadrature {quad} (2se = {})",
            2.0 * std_err
        );
    }

    #[test]
    fn connectivity_report_on_an_always_fooled_case() {
        // Constant logits favoring class 1, so any input labeled 0 is "fooled".
        let model = Mlp::from_layers(vec![Layer {
            weights: Matrix::zeros(2, 3),
            bias: Vector::new(vec![0.0, 1.0]),
        }]);
        let x = Vector::new(vec![0.5, 0.5, 0.5]);
        let path = sample_path();
        let mut ledger = QueryLedger::new();
        let report = evaluate_connectivity(&path, &[(x, 0)], 50, &model, &mut ledger);
        assert_eq!(report.asr_both, 1.0);
        assert_eq!(report.asr_avg, 1.0);
        assert_eq!(report.asr1, None);
        assert_eq!(ledger.forwards(), 50);
    }

    #[test]
    fn asr_both_is_bounded_by_each_side() {
        let mut rng = Rng::new(31);
        let model = Mlp::init(&[3, 8, 2], &mut rng);
        let x1 = Vector::new(vec![0.2, 0.8, 0.5]);
        let x2 = Vector::new(vec![0.7, 0.3, 0.4]);
        let path = sample_path();
        let report = evaluate_connectivity(
            &path,
            &[(x1, 0), (x2, 1)],
            50,
            &model,
            &mut QueryLedger::new(),
        );
        let a1 = report.asr1.unwrap();
        let a2 = report.asr2.unwrap();
        assert!(report.asr_both <= a1.min(a2) + 1e-15);
        assert!((report.asr_avg - 0.5 * (a1 + a2)).abs() < 1e-15);
    }
}
