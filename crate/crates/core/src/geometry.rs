//! ℓp norms, Euclidean projections onto ε-balls, and box clipping.

use alloc::vec::Vec;

use crate::rng::Rng;
use crate::vector::Vector;

/// Which ℓp ball constrains a perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    Linf,
    L2,
    L1,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::Linf, Norm::L2, Norm::L1];

    pub fn name(self) -> &'static str {
        match self {
            Norm::Linf => "linf",
            Norm::L2 => "l2",
            Norm::L1 => "l1",
        }
    }
}

/// A perturbation budget: a norm kind plus a radius ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub norm: Norm,
    pub epsilon: f64,
}

impl Budget {
    /// Panics on negative ε. ε = 0 is allowed and denotes the degenerate ball {0}.
    pub fn new(norm: Norm, epsilon: f64) -> Self {
        assert!(epsilon >= 0.0 && epsilon.is_finite(), "epsilon must be nonnegative");
        Self { norm, epsilon }
    }

    /// Feasibility with the standard floating-point slack ε·(1 + 1e-9).
    pub fn contains(&self, v: &Vector) -> bool {
        norm_p(v, self.norm) <= self.epsilon * (1.0 + 1e-9)
    }
}

/// ℓp norm of `v`: max-abs, Euclidean, or sum-abs.
pub fn norm_p(v: &Vector, norm: Norm) -> f64 {
    match norm {
        Norm::Linf => v.iter().fold(0.0f64, |acc, x| acc.max(x.abs())),
        Norm::L2 => libm::sqrt(v.iter().map(|x| x * x).sum::<f64>()),
        Norm::L1 => v.iter().map(|x| x.abs()).sum(),
    }
}

/// Euclidean projection of `v` onto the budget ball `{u : ‖u‖p ≤ ε}`.
///
/// Identity when `v` is already feasible. ℓ∞ clamps coordinatewise, ℓ2 scales
/// radially, ℓ1 soft-thresholds at the level θ for which the thresholded
/// magnitudes sum to ε (sort-based, ties broken by coordinate index).
pub fn project(v: &Vector, budget: &Budget) -> Vector {
    let eps = budget.epsilon;
    match budget.norm {
        Norm::Linf => v.map(|x| x.clamp(-eps, eps)),
        Norm::L2 => {
            let n = norm_p(v, Norm::L2);
            if n <= eps {
                v.clone()
            } else {
                v.scale(eps / n)
            }
        }
        Norm::L1 => project_l1(v, eps),
    }
}

fn project_l1(v: &Vector, eps: f64) -> Vector {
    if norm_p(v, Norm::L1) <= eps {
        return v.clone();
    }
    if eps == 0.0 {
        return Vector::zeros(v.dim());
    }
    let mut mags: Vec<(f64, usize)> = v.iter().map(|x| x.abs()).zip(0..).collect();
    mags.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &(mag, _)) in mags.iter().enumerate() {
        cumsum += mag;
        let candidate = (cumsum - eps) / (j + 1) as f64;
        if mag > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    v.map(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// Coordinatewise clamp of a (perturbed) input into `[lo, hi]`.
pub fn clip_box(x: &Vector, lo: f64, hi: f64) -> Vector {
    assert!(lo <= hi, "invalid box bounds");
    x.map(|v| v.clamp(lo, hi))
}

/// Pulls a gradient back through [`project`]: returns `Jᵀ·upstream` where `J`
/// is the Jacobian of the projection at the pre-projection point `raw`.
///
/// Inside the ball the projection is the identity. Outside: ℓ∞ zeroes the
/// clamped coordinates; ℓ2 maps onto the sphere, killing the radial component
/// and scaling the tangential one; ℓ1 soft-thresholds, so off-support
/// coordinates vanish and the support sees its signed mean subtracted.
/// Treating the projection as the identity instead (straight-through) lets
/// ascent inflate the pre-projection point in directions the projection
/// discards, which stalls or regresses the objective for ℓ2/ℓ1.
pub fn project_backward(raw: &Vector, budget: &Budget, upstream: &Vector) -> Vector {
    assert_eq!(raw.dim(), upstream.dim(), "gradient dimension mismatch");
    let eps = budget.epsilon;
    match budget.norm {
        Norm::Linf => Vector::new(
            raw.iter()
                .zip(upstream.iter())
                .map(|(&v, &g)| if v.abs() < eps { g } else { 0.0 })
                .collect(),
        ),
        Norm::L2 => {
            let n = norm_p(raw, Norm::L2);
            if n <= eps {
                return upstream.clone();
            }
            let unit = raw.scale(1.0 / n);
            let radial = unit.dot(upstream);
            upstream.add_scaled(-radial, &unit).scale(eps / n)
        }
        Norm::L1 => {
            if norm_p(raw, Norm::L1) <= eps {
                return upstream.clone();
            }
            let projected = project(raw, budget);
            let support: Vec<usize> =
                (0..raw.dim()).filter(|&i| projected[i] != 0.0).collect();
            if support.is_empty() {
                return Vector::zeros(raw.dim());
            }
            let signed_mean = support
                .iter()
                .map(|&i| projected[i].signum() * upstream[i])
                .sum::<f64>()
                / support.len() as f64;
            let mut out = vec![0.0; raw.dim()];
            for &i in &support {
                let s = projected[i].signum();
                out[i] = upstream[i] - s * signed_mean;
            }
            Vector::new(out)
        }
    }
}

/// Draws a perturbation uniformly "within" the budget ball.
///
/// ℓ∞ is uniform per coordinate in [-ε, ε]; ℓ2 is direction-uniform with the
/// radius corrected for volume; ℓ1 draws from the ℓ∞ box and projects onto the
/// ℓ1 ball. ε = 0 yields the zero vector.
pub fn sample_uniform_ball(rng: &mut Rng, dim: usize, budget: &Budget) -> Vector {
    assert!(dim >= 1, "dimension must be positive");
    let eps = budget.epsilon;
    if eps == 0.0 {
        return Vector::zeros(dim);
    }
    match budget.norm {
        Norm::Linf => Vector::new((0..dim).map(|_| rng.uniform(-eps, eps)).collect()),
        Norm::L2 => {
            let direction = loop {
                let g = rng.normal_vector(dim);
                let n = norm_p(&g, Norm::L2);
                if n > 1e-12 {
                    break g.scale(1.0 / n);
                }
            };
            let radius = eps * libm::pow(rng.next_f64(), 1.0 / dim as f64);
            direction.scale(radius)
        }
        Norm::L1 => {
            let box_point = Vector::new((0..dim).map(|_| rng.uniform(-eps, eps)).collect());
            project(&box_point, budget)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    #[test]
    fn norms_of_reference_vector() {
        let v = Vector::new(vec![3.0, -4.0]);
        assert_eq!(norm_p(&v, Norm::L2), 5.0);
        assert_eq!(norm_p(&v, Norm::Linf), 4.0);
        assert_eq!(norm_p(&v, Norm::L1), 7.0);
    }

    #[test]
    fn linf_projection_clamps() {
        let b = Budget::new(Norm::Linf, 0.5);
        let p = project(&Vector::new(vec![0.9, -0.2]), &b);
        assert_eq!(p.as_slice(), &[0.5, -0.2]);
    }

    #[test]
    fn l2_projection_scales_radially() {
        let b = Budget::new(Norm::L2, 1.0);
        let p = project(&Vector::new(vec![3.0, 4.0]), &b);
        assert!((p[0] - 0.6).abs() < 1e-15);
        assert!((p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn l1_projection_soft_thresholds() {
        // Oracle value refined by the brute-force grid search in the
        // projection integration test: θ = 0.25 → [0.45, 0.05].
        let b = Budget::new(Norm::L1, 0.5);
        let p = project(&Vector::new(vec![0.7, 0.3]), &b);
        assert!((p[0] - 0.45).abs() < 1e-12);
        assert!((p[1] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn clip_box_examples() {
        assert_eq!(clip_box(&Vector::new(vec![1.2, 0.5]), 0.0, 1.0).as_slice(), &[1.0, 0.5]);
        let inside = Vector::new(vec![0.25, 0.75]);
        assert_eq!(clip_box(&inside, 0.0, 1.0), inside);
        assert_eq!(clip_box(&Vector::new(vec![-0.1, 2.0]), 0.0, 1.0).as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn degenerate_ball_samples_zero() {
        let mut rng = Rng::new(5);
        for norm in Norm::ALL {
            let v = sample_uniform_ball(&mut rng, 4, &Budget::new(norm, 0.0));
            assert_eq!(v.as_slice(), &[0.0; 4]);
        }
    }

    #[test]
    fn linf_samples_stay_in_box() {
        let mut rng = Rng::new(9);
        let b = Budget::new(Norm::Linf, 0.1);
        let v = sample_uniform_ball(&mut rng, 3, &b);
        assert!(v.iter().all(|x| (-0.1..=0.1).contains(x)));
    }

    #[test]
    fn l2_samples_stay_in_ball() {
        let mut rng = Rng::new(13);
        let b = Budget::new(Norm::L2, 1.0);
        for _ in 0..1000 {
            let v = sample_uniform_ball(&mut rng, 8, &b);
            assert!(norm_p(&v, Norm::L2) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn projection_backward_matches_finite_differences() {
        // Scalar probe h(w) = Σ c_i·w_i + Σ w_i², so ∇φ of φ(v) = h(Π(v))
        // can be checked coordinatewise against (Jᵀ ∇h)(v).
        let mut rng = Rng::new(61);
        for norm in Norm::ALL {
            let budget = Budget::new(norm, 0.6);
            for trial in 0..40 {
                let dim = 2 + (trial % 4);
                let v = Vector::new((0..dim).map(|_| rng.uniform(-1.2, 1.2)).collect());
                // Keep away from the projection's non-smooth sets.
                if (norm_p(&v, norm) - 0.6).abs() < 0.05 {
                    continue;
                }
                if norm == Norm::L1 && project(&v, &budget).iter().any(|w| w.abs() < 1e-3 && *w != 0.0) {
                    continue;
                }
                let coeffs = Vector::new((0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect());
                let h = |w: &Vector| coeffs.dot(w) + w.iter().map(|x| x * x).sum::<f64>();
                let projected = project(&v, &budget);
                let upstream = Vector::new(
                    (0..dim).map(|i| coeffs[i] + 2.0 * projected[i]).collect(),
                );
                let analytic = project_backward(&v, &budget, &upstream);
                let numeric =
                    crate::gradcheck::finite_diff_grad(|p| h(&project(p, &budget)), &v, 1e-6)
                        .unwrap();
                for i in 0..dim {
                    assert!(
                        (analytic[i] - numeric[i]).abs() < 1e-5,
                        "{:?} trial {trial} coord {i}: {} vs {}",
                        norm,
                        analytic[i],
                        numeric[i]
                    );
                }
            }
        }
    }

    fn small_vector() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, 1..8)
    }

    proptest! {
        #[test]
        fn sampling_respects_every_budget(seed in 0u64..1000, dim in 1usize..12) {
            let mut rng = Rng::new(seed);
            for norm in Norm::ALL {
                let b = Budget::new(norm, 0.37);
                for _ in 0..10 {
                    let v = sample_uniform_ball(&mut rng, dim, &b);
                    prop_assert!(b.contains(&v));
                }
            }
        }

        #[test]
        fn projection_is_feasible_and_idempotent(data in small_vector(), eps in 0.01f64..1.5) {
            let v = Vector::new(data);
            for norm in Norm::ALL {
                let b = Budget::new(norm, eps);
                let p = project(&v, &b);
                prop_assert!(norm_p(&p, norm) <= eps * (1.0 + 1e-9));
                let pp = project(&p, &b);
                for i in 0..p.dim() {
                    prop_assert!((pp[i] - p[i]).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn projection_is_identity_inside(data in small_vector()) {
            let v = Vector::new(data);
            for norm in Norm::ALL {
                let n = norm_p(&v, norm);
                let b = Budget::new(norm, n + 0.1);
                prop_assert_eq!(project(&v, &b), v.clone());
            }
        }

        #[test]
        fn l2_projection_is_nonexpansive(a in small_vector(), seed in 0u64..100) {
            let mut rng = Rng::new(seed);
            let b_vec = Vector::new(a.iter().map(|_| rng.uniform(-2.0, 2.0)).collect::<Vec<_>>());
            let a_vec = Vector::new(a);
            let budget = Budget::new(Norm::L2, 0.5);
            let d_before = norm_p(&a_vec.sub(&b_vec), Norm::L2);
            let d_after = norm_p(&project(&a_vec, &budget).sub(&project(&b_vec, &budget)), Norm::L2);
            prop_assert!(d_after <= d_before + 1e-12);
        }
    }
}
